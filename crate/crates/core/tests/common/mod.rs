//! Shared fixtures: standard knots and the model isotopy families that
//! realize each Reidemeister move as a single singular event.
//!
//! All families keep (x, z) or an equivalent pair on a round circle, so
//! they are embedded in 3-space at every time by construction; events
//! happen only in the projection.

pub mod oracle;

use knotter::curve::{CoordSeries, FourierLoop, IsotopyFamily};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn circle() -> FourierLoop {
    FourierLoop::new(
        CoordSeries::zero(1).with(1, 1.0, 0.0),
        CoordSeries::zero(1).with(1, 0.0, 1.0),
        CoordSeries::zero(1),
    )
    .unwrap()
}

pub fn trefoil_loop() -> FourierLoop {
    FourierLoop::new(
        CoordSeries::zero(3).with(1, 0.0, 1.0).with(2, 0.0, 2.0),
        CoordSeries::zero(3).with(1, 1.0, 0.0).with(2, -2.0, 0.0),
        CoordSeries::zero(3).with(3, 0.0, -1.0),
    )
    .unwrap()
}

/// (2+cos 2u)(cos 3u, sin 3u) with z = sin 4u, expanded into harmonics.
pub fn figure_eight_loop() -> FourierLoop {
    FourierLoop::new(
        CoordSeries::zero(5)
            .with(1, 0.5, 0.0)
            .with(3, 2.0, 0.0)
            .with(5, 0.5, 0.0),
        CoordSeries::zero(5)
            .with(1, 0.0, 0.5)
            .with(3, 0.0, 2.0)
            .with(5, 0.0, 0.5),
        CoordSeries::zero(5).with(4, 0.0, 1.0),
    )
    .unwrap()
}

/// Standard 4_1 PD code (KnotInfo numbering).
pub const FIGURE_EIGHT_PD: &str = "X(4,2,5,1) X(8,6,1,5) X(6,3,7,4) X(2,7,3,8)";

/// Random loop with iid coefficients in [-amplitude, amplitude].
pub fn random_loop(rng: &mut ChaCha8Rng, degree: usize, amplitude: f64) -> FourierLoop {
    let mut mk = |_axis: usize| {
        let mut s = CoordSeries::zero(degree);
        for k in 1..=degree {
            s = s.with(
                k,
                rng.gen_range(-amplitude..amplitude),
                rng.gen_range(-amplitude..amplitude),
            );
        }
        s
    };
    FourierLoop::new(mk(0), mk(1), mk(2)).unwrap()
}

/// Cusp model family: a vertical-tangent point forms at u = 0, t = 1/2.
///
/// x = -cos u, y = sin 2u + (-2 + e_y (t - 1/2)) sin u, z = a_z sin u.
/// Near (0, 1/2): x ~ u²/2, y ~ -u³ + e_y (t-1/2) u, z ~ a_z u, so the
/// cubic coefficient is negative and the curl lives where t-1/2 and e_y
/// agree in sign: e_y = +1 creates a crossing, e_y = -1 removes one.
/// The pair (x, z) stays injective, so 3D embedding holds at all times.
pub fn cusp_family(e_y: f64, a_z: f64) -> IsotopyFamily {
    let make = |t: f64| {
        FourierLoop::new(
            CoordSeries::zero(2).with(1, -1.0, 0.0),
            CoordSeries::zero(2)
                .with(1, 0.0, -2.0 + e_y * (t - 0.5))
                .with(2, 0.0, 1.0),
            CoordSeries::zero(2).with(1, 0.0, a_z),
        )
        .unwrap()
    };
    IsotopyFamily::new(vec![(0.0, make(0.0)), (1.0, make(1.0))]).unwrap()
}

/// Curl-removal family: one-curl unknot flattening to a round embedding.
pub fn curl_removal_family() -> IsotopyFamily {
    cusp_family(-1.0, 1.0)
}

/// Tangency model family: two strands with curvatures b1, b2 meet at
/// t = 1/2 along a common horizontal tangent.
///
/// x = sin u, z = z_sign cos u, and
/// y = y0(u) + drift_sign (t - 1/2) (1 + cos u)/2 where y0 has second
/// derivative 2 b1 at u=0 and 2 b2 at u=π with y0(0) = y0(π) = 0.
/// Crossings satisfy sin²u = h/(b2-b1) for h = drift_sign (t-1/2), so the
/// pair exists on exactly one side of t = 1/2.
pub fn parabola_family(b1: f64, b2: f64, z_sign: f64, drift_sign: f64) -> IsotopyFamily {
    let delta = (b2 - b1) / 8.0;
    let gamma = -(b1 + b2) / 4.0;
    let beta = -delta;
    let alpha = -gamma;
    let make = |t: f64| {
        let h = drift_sign * (t - 0.5);
        FourierLoop::new(
            CoordSeries::zero(3).with(1, 0.0, 1.0),
            CoordSeries::zero(3)
                .with_constant(alpha + 0.5 * h)
                .with(1, beta + 0.5 * h, 0.0)
                .with(2, gamma, 0.0)
                .with(3, delta, 0.0),
            CoordSeries::zero(3).with(1, z_sign, 0.0),
        )
        .unwrap()
    };
    IsotopyFamily::new(vec![(0.0, make(0.0)), (1.0, make(1.0))]).unwrap()
}

/// Triple-point model family: a trifolium whose three branches pass the
/// origin with directions 60° apart; the vertical middle strand drifts
/// across the crossing of the other two, meeting it at t = 1/2.
///
/// Strand passages sit at u = π/3, π, 5π/3; the drift bump
/// g(u) = (4/9)(cos u - 1/2)² vanishes to second order at the two fixed
/// passages, so only the middle strand moves. `z_levels` are the heights
/// of the three strands in passage order.
pub fn three_line_family(z_levels: [f64; 3]) -> IsotopyFamily {
    let [z1, z2, z3] = z_levels;
    // z = z0 + a cos u + b sin u through the three passages.
    let b = (z1 - z3) / 3f64.sqrt();
    let s = 0.5 * (z1 + z3);
    let a = 2.0 / 3.0 * (s - z2);
    let z0 = z2 + a;
    let make = |t: f64| {
        let d = 0.3 * (t - 0.5);
        FourierLoop::new(
            CoordSeries::zero(2)
                .with_constant(d / 3.0)
                .with(1, 0.5 - 4.0 * d / 9.0, 0.0)
                .with(2, 0.5 + 2.0 * d / 9.0, 0.0),
            CoordSeries::zero(2).with(1, 0.0, -0.5).with(2, 0.0, 0.5),
            CoordSeries::zero(2)
                .with_constant(z0)
                .with(1, a, b),
        )
        .unwrap()
    };
    IsotopyFamily::new(vec![(0.0, make(0.0)), (1.0, make(1.0))]).unwrap()
}

/// Two events in order: a tangency creates a crossing pair, then a cusp
/// removes one crossing. Built on the parabola base with an extra sin 2u
/// knob that drives a vertical tangent at u = π/2 late in the family.
pub fn r2_then_r1_family() -> IsotopyFamily {
    let (b1, b2) = (1.0, -1.0);
    let delta = (b2 - b1) / 8.0;
    let gamma = -(b1 + b2) / 4.0;
    let beta = -delta;
    let alpha = -gamma;
    let make = |h: f64, m: f64| {
        FourierLoop::new(
            CoordSeries::zero(3).with(1, 0.0, 1.0),
            CoordSeries::zero(3)
                .with_constant(alpha + 0.5 * h)
                .with(1, beta + 0.5 * h, 0.0)
                .with(2, gamma, m)
                .with(3, delta, 0.0),
            CoordSeries::zero(3).with(1, 1.0, 0.0),
        )
        .unwrap()
    };
    IsotopyFamily::new(vec![
        (0.0, make(0.4, 0.0)),
        (0.5, make(-0.4, 0.0)),
        (1.0, make(-0.4, -1.2)),
    ])
    .unwrap()
}

/// Reversed version: the cusp (now a creation) comes first, the tangency
/// (now an annihilation) second.
pub fn r1_then_r2_family() -> IsotopyFamily {
    let fwd = r2_then_r1_family();
    let times = fwd.keyframe_times().to_vec();
    let frames: Vec<(f64, FourierLoop)> = (0..times.len())
        .rev()
        .map(|j| (1.0 - times[j], fwd.keyframe(j).clone()))
        .collect();
    IsotopyFamily::new(frames).unwrap()
}

/// Seeded random generic loop: a round circle plus decaying noise, retried
/// (by bumping the seed) until the validator passes. Returns the loop and
/// the seed that produced it.
pub fn random_generic_loop(seed: u64, degree: usize) -> (FourierLoop, u64) {
    use knotter::genericity::{validate, GenericityConfig};
    let cfg = GenericityConfig::default();
    let mut s = seed;
    loop {
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let mut mk = |base: (f64, f64), rng: &mut ChaCha8Rng| {
            let mut series = CoordSeries::zero(degree);
            for k in 1..=degree {
                let amp = 0.8 / (k * k) as f64;
                let mut a = rng.gen_range(-amp..amp);
                let mut b = rng.gen_range(-amp..amp);
                if k == 1 {
                    a += base.0;
                    b += base.1;
                }
                series = series.with(k, a, b);
            }
            series
        };
        let x = mk((1.0, 0.0), &mut rng);
        let y = mk((0.0, 1.0), &mut rng);
        let z = mk((0.0, 0.0), &mut rng);
        let loop_ = FourierLoop::new(x, y, z).unwrap();
        if validate(&loop_, &cfg).passed() {
            return (loop_, s);
        }
        s += 101;
    }
}
