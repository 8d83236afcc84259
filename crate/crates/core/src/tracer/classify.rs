//! Classification of singular events from derivative data.
//!
//! Each event kind is the zero of a square system in jet coordinates, so a
//! damped Newton iteration pins the event to machine precision and the
//! local Taylor data then decides the move:
//!
//! - Cusp: `p∘f_u(u,t) = 0` (2 eqs). After rotating the plane so the
//!   second derivative points along +x, the cubic coefficient `c_y` and
//!   the mixed-partial coefficient `e_y` fight over the curl: the
//!   self-intersection exists where `e_y (t-t*)` opposes `c_y ε³`, so the
//!   curl dies (as t grows) exactly when `e_y c_y > 0`. The z-slope `a_z`
//!   picks which strand of the curl is on top, and the curl's crossing
//!   sign is `sign(a_z c_y)`.
//! - Tangency: projected positions agree and tangents are parallel
//!   (3 eqs). The two strands are parabolas `y = b_i x²`; the relative
//!   vertical drift `w` decides creation (`w (b1-b2) < 0`) vs
//!   annihilation.
//! - Triple: two projected coincidences (4 eqs). Strand directions must
//!   be pairwise transverse and each strand must sweep across the
//!   opposite crossing at a nonzero rate; the z-ranking fixes the
//!   variant.

use super::TraceConfig;
use crate::curve::IsotopyFamily;
use crate::geom::{wrap_angle, Vec2};
use crate::numeric::{solve2, solve_small};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    Cusp,
    Tangency,
    Triple,
}

impl std::fmt::Display for EventKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EventKind::Cusp => write!(f, "R1"),
            EventKind::Tangency => write!(f, "R2"),
            EventKind::Triple => write!(f, "R3"),
        }
    }
}

/// Direction of the move as t increases.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MoveDirection {
    Creation,
    Annihilation,
}

impl std::fmt::Display for MoveDirection {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MoveDirection::Creation => write!(f, "creation"),
            MoveDirection::Annihilation => write!(f, "annihilation"),
        }
    }
}

/// Taylor data backing a classification.
#[derive(Debug, Clone)]
pub enum EventData {
    Cusp {
        a_z: f64,
        b_x: f64,
        c_y: f64,
        e_y: f64,
        drift: Vec2,
    },
    Tangency {
        b1: f64,
        b2: f64,
        /// Relative vertical drift of strand 1 against strand 2.
        drift: f64,
        /// Strand at the smaller parameter is the over strand.
        first_over: bool,
        same_side: bool,
    },
    Triple {
        directions: [Vec2; 3],
        drifts: [Vec2; 3],
        /// Strand indices from top to bottom by z.
        z_order: [usize; 3],
        sweep_rates: [f64; 3],
    },
}

/// A localized, classified singular event.
#[derive(Debug, Clone)]
pub struct SingularEvent {
    pub t: f64,
    pub kind: EventKind,
    /// Curve parameters: one for a cusp, two for a tangency, three for a
    /// triple point.
    pub locations: Vec<f64>,
    pub data: EventData,
    /// None for triple points (crossing count does not change).
    pub direction: Option<MoveDirection>,
    /// Expected crossing-count change across the event.
    pub expected_delta: i64,
    pub variant: String,
}

#[derive(Debug, Clone, Error)]
pub enum ClassifyError {
    #[error("newton refinement failed near t={t:.6}")]
    NewtonFailed { t: f64 },
    #[error("degenerate cusp at t={t:.6}: |{which}| = {value:.3e} below margin")]
    DegenerateCusp {
        t: f64,
        which: &'static str,
        value: f64,
    },
    #[error("degenerate tangency at t={t:.6}: {reason}")]
    DegenerateTangency { t: f64, reason: String },
    #[error("degenerate triple point at t={t:.6}: {reason}")]
    DegenerateTriple { t: f64, reason: String },
}

impl ClassifyError {
    pub fn time(&self) -> f64 {
        match self {
            ClassifyError::NewtonFailed { t }
            | ClassifyError::DegenerateCusp { t, .. }
            | ClassifyError::DegenerateTangency { t, .. }
            | ClassifyError::DegenerateTriple { t, .. } => *t,
        }
    }
}

fn clamp_time(t: f64) -> f64 {
    t.clamp(0.0, 1.0)
}

/// Classify a condition-1 failure (vanishing projected tangent) near
/// (t_hint, u_hint) as a first Reidemeister move.
pub fn classify_cusp(
    family: &IsotopyFamily,
    t_hint: f64,
    u_hint: f64,
    config: &TraceConfig,
) -> Result<SingularEvent, ClassifyError> {
    let scale = family.scale().max(1e-12);
    let res_tol = 1e-11 * scale;
    let (mut u, mut t) = (u_hint, clamp_time(t_hint));
    let mut converged = false;
    for _ in 0..60 {
        let jet = family
            .partials(u, t)
            .map_err(|_| ClassifyError::NewtonFailed { t: t_hint })?;
        let g = jet.f_u.project();
        if g.norm() < res_tol {
            converged = true;
            break;
        }
        let ju = jet.f_uu.project();
        let jt = jet.f_ut.project();
        let step = solve2([[ju.x, jt.x], [ju.y, jt.y]], [g.x, g.y])
            .ok_or(ClassifyError::NewtonFailed { t: t_hint })?;
        let cap = 0.05;
        let norm = step[0].hypot(step[1]);
        let damp = if norm > cap { cap / norm } else { 1.0 };
        u -= damp * step[0];
        t = clamp_time(t - damp * step[1]);
    }
    if !converged {
        return Err(ClassifyError::NewtonFailed { t: t_hint });
    }
    let u = wrap_angle(u);
    let jet = family
        .partials(u, t)
        .map_err(|_| ClassifyError::NewtonFailed { t })?;

    let tol = config.classify_tol_rel * scale;
    let a_z = jet.f_u.z;
    if a_z.abs() < tol {
        return Err(ClassifyError::DegenerateCusp {
            t,
            which: "a_z",
            value: a_z,
        });
    }
    let second = jet.f_uu.project();
    let b_x = second.norm();
    if b_x < tol {
        return Err(ClassifyError::DegenerateCusp {
            t,
            which: "b_x",
            value: b_x,
        });
    }
    // Rotate the plane so p∘f'' = (b_x, 0) with b_x > 0.
    let theta = second.angle();
    let c_y = jet.f_uuu.project().rotated(-theta).y;
    if c_y.abs() < tol {
        return Err(ClassifyError::DegenerateCusp {
            t,
            which: "c_y",
            value: c_y,
        });
    }
    let e_y = jet.f_ut.project().rotated(-theta).y;
    if e_y.abs() < tol {
        return Err(ClassifyError::DegenerateCusp {
            t,
            which: "e_y",
            value: e_y,
        });
    }
    let drift = jet.f_t.project().rotated(-theta);

    // The curl exists where ε² = -(e_y/c_y)(t - t*): before t* when
    // e_y c_y > 0, after otherwise.
    let direction = if e_y * c_y > 0.0 {
        MoveDirection::Annihilation
    } else {
        MoveDirection::Creation
    };
    let curl_sign = if a_z * c_y > 0.0 { 1 } else { -1 };
    // The later passage (u* + ε) is on top when a_z > 0.
    let first_role_over = a_z < 0.0;
    let variant = format!(
        "sign={},first={}",
        if curl_sign > 0 { "+" } else { "-" },
        if first_role_over { "O" } else { "U" }
    );
    let expected_delta = match direction {
        MoveDirection::Creation => 1,
        MoveDirection::Annihilation => -1,
    };
    Ok(SingularEvent {
        t,
        kind: EventKind::Cusp,
        locations: vec![u],
        data: EventData::Cusp {
            a_z,
            b_x,
            c_y,
            e_y,
            drift,
        },
        direction: Some(direction),
        expected_delta,
        variant,
    })
}

/// Classify a condition-3 failure (tangential double point) near
/// (t_hint, u1_hint, u2_hint) as a second Reidemeister move.
pub fn classify_tangency(
    family: &IsotopyFamily,
    t_hint: f64,
    u1_hint: f64,
    u2_hint: f64,
    config: &TraceConfig,
) -> Result<SingularEvent, ClassifyError> {
    let scale = family.scale().max(1e-12);
    let res_tol = 1e-11 * scale;
    let (mut u1, mut u2, mut t) = (u1_hint, u2_hint, clamp_time(t_hint));
    let mut converged = false;
    for _ in 0..80 {
        let j1 = family
            .partials(u1, t)
            .map_err(|_| ClassifyError::NewtonFailed { t: t_hint })?;
        let j2 = family
            .partials(u2, t)
            .map_err(|_| ClassifyError::NewtonFailed { t: t_hint })?;
        let f = j1.f.project() - j2.f.project();
        let d1 = j1.f_u.project();
        let d2 = j2.f_u.project();
        let det = d1.cross(d2);
        let residual = (f.norm().powi(2) + (det / scale).powi(2)).sqrt();
        if residual < res_tol {
            converged = true;
            break;
        }
        // Rows: F_x, F_y, det(d1,d2); unknowns u1, u2, t.
        let w1 = j1.f_t.project();
        let w2 = j2.f_t.project();
        let q1 = j1.f_uu.project();
        let q2 = j2.f_uu.project();
        let x1 = j1.f_ut.project();
        let x2 = j2.f_ut.project();
        let mut a = [
            [d1.x, -d2.x, w1.x - w2.x, 0.0],
            [d1.y, -d2.y, w1.y - w2.y, 0.0],
            [
                q1.cross(d2),
                d1.cross(q2),
                x1.cross(d2) + d1.cross(x2),
                0.0,
            ],
            [0.0, 0.0, 0.0, 1.0],
        ];
        let mut b = [f.x, f.y, det, 0.0];
        let step =
            solve_small(&mut a, &mut b, 3).ok_or(ClassifyError::NewtonFailed { t: t_hint })?;
        let cap = 0.05;
        let norm = (step[0].powi(2) + step[1].powi(2) + step[2].powi(2)).sqrt();
        let damp = if norm > cap { cap / norm } else { 1.0 };
        u1 -= damp * step[0];
        u2 -= damp * step[1];
        t = clamp_time(t - damp * step[2]);
    }
    if !converged {
        return Err(ClassifyError::NewtonFailed { t: t_hint });
    }
    let (mut u1, mut u2) = (wrap_angle(u1), wrap_angle(u2));
    if u1 > u2 {
        std::mem::swap(&mut u1, &mut u2);
    }
    let j1 = family
        .partials(u1, t)
        .map_err(|_| ClassifyError::NewtonFailed { t })?;
    let j2 = family
        .partials(u2, t)
        .map_err(|_| ClassifyError::NewtonFailed { t })?;

    let tol = config.classify_tol_rel * scale;
    // Common tangent frame: x along strand 1's direction.
    let d1 = j1.f_u.project();
    let theta = d1.angle();
    let a1 = d1.norm();
    let a2x = j2.f_u.project().rotated(-theta).x;
    if a1 < tol || a2x.abs() < tol {
        return Err(ClassifyError::DegenerateTangency {
            t,
            reason: "a strand has vanishing projected speed".into(),
        });
    }
    let b1 = j1.f_uu.project().rotated(-theta).y / (2.0 * a1 * a1);
    let b2 = j2.f_uu.project().rotated(-theta).y / (2.0 * a2x * a2x);
    if (b1 - b2).abs() < tol {
        return Err(ClassifyError::DegenerateTangency {
            t,
            reason: format!("equal curvatures b1 = b2 = {b1:.3e}"),
        });
    }
    let drift = (j1.f_t.project() - j2.f_t.project()).rotated(-theta).y;
    if drift.abs() < tol {
        return Err(ClassifyError::DegenerateTangency {
            t,
            reason: "vanishing relative drift".into(),
        });
    }
    let z_gap = j1.f.z - j2.f.z;
    if z_gap.abs() < config.genericity.z_tol_rel * scale {
        return Err(ClassifyError::DegenerateTangency {
            t,
            reason: "strands touch in 3D".into(),
        });
    }

    // Gap between the strands: (b1-b2) x^2 + drift (t-t*); crossings need
    // opposite signs of the two terms.
    let direction = if drift * (b1 - b2) < 0.0 {
        MoveDirection::Creation
    } else {
        MoveDirection::Annihilation
    };
    let first_over = z_gap > 0.0;
    let same_side = b1 * b2 > 0.0;
    let expected_delta = match direction {
        MoveDirection::Creation => 2,
        MoveDirection::Annihilation => -2,
    };
    let variant = format!(
        "{},{}",
        if first_over { "first-over" } else { "first-under" },
        if same_side { "same-side" } else { "opposite-side" }
    );
    Ok(SingularEvent {
        t,
        kind: EventKind::Tangency,
        locations: vec![u1, u2],
        data: EventData::Tangency {
            b1,
            b2,
            drift,
            first_over,
            same_side,
        },
        direction: Some(direction),
        expected_delta,
        variant,
    })
}

/// Classify a condition-2 failure (triple point) near the hinted strand
/// parameters as a third Reidemeister move.
pub fn classify_triple(
    family: &IsotopyFamily,
    t_hint: f64,
    u_hints: [f64; 3],
    config: &TraceConfig,
) -> Result<SingularEvent, ClassifyError> {
    let scale = family.scale().max(1e-12);
    let res_tol = 1e-11 * scale;
    let (mut u, mut t) = (u_hints, clamp_time(t_hint));
    let mut converged = false;
    for _ in 0..80 {
        let jets = [
            family
                .partials(u[0], t)
                .map_err(|_| ClassifyError::NewtonFailed { t: t_hint })?,
            family
                .partials(u[1], t)
                .map_err(|_| ClassifyError::NewtonFailed { t: t_hint })?,
            family
                .partials(u[2], t)
                .map_err(|_| ClassifyError::NewtonFailed { t: t_hint })?,
        ];
        let f12 = jets[0].f.project() - jets[1].f.project();
        let f13 = jets[0].f.project() - jets[2].f.project();
        let residual = (f12.norm().powi(2) + f13.norm().powi(2)).sqrt();
        if residual < res_tol {
            converged = true;
            break;
        }
        let d: Vec<Vec2> = jets.iter().map(|j| j.f_u.project()).collect();
        let w: Vec<Vec2> = jets.iter().map(|j| j.f_t.project()).collect();
        let mut a = [
            [d[0].x, -d[1].x, 0.0, w[0].x - w[1].x],
            [d[0].y, -d[1].y, 0.0, w[0].y - w[1].y],
            [d[0].x, 0.0, -d[2].x, w[0].x - w[2].x],
            [d[0].y, 0.0, -d[2].y, w[0].y - w[2].y],
        ];
        let mut b = [f12.x, f12.y, f13.x, f13.y];
        let step =
            solve_small(&mut a, &mut b, 4).ok_or(ClassifyError::NewtonFailed { t: t_hint })?;
        let cap = 0.05;
        let norm = step.iter().map(|s| s * s).sum::<f64>().sqrt();
        let damp = if norm > cap { cap / norm } else { 1.0 };
        for k in 0..3 {
            u[k] -= damp * step[k];
        }
        t = clamp_time(t - damp * step[3]);
    }
    if !converged {
        return Err(ClassifyError::NewtonFailed { t: t_hint });
    }
    let mut u: Vec<f64> = u.iter().map(|v| wrap_angle(*v)).collect();
    u.sort_by(f64::total_cmp);
    let jets = [
        family
            .partials(u[0], t)
            .map_err(|_| ClassifyError::NewtonFailed { t })?,
        family
            .partials(u[1], t)
            .map_err(|_| ClassifyError::NewtonFailed { t })?,
        family
            .partials(u[2], t)
            .map_err(|_| ClassifyError::NewtonFailed { t })?,
    ];

    let tol = config.classify_tol_rel * scale;
    let d = [
        jets[0].f_u.project(),
        jets[1].f_u.project(),
        jets[2].f_u.project(),
    ];
    let w = [
        jets[0].f_t.project(),
        jets[1].f_t.project(),
        jets[2].f_t.project(),
    ];
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        let denom = d[i].norm() * d[j].norm();
        if denom < tol * tol || (d[i].cross(d[j]) / denom).abs() < config.classify_tol_rel {
            return Err(ClassifyError::DegenerateTriple {
                t,
                reason: format!("strands {i} and {j} have near-colinear directions"),
            });
        }
    }
    // Sweep rate of strand i across the crossing of the other two: the
    // rate of change of the signed distance from line i to that crossing.
    let mut sweep_rates = [0.0f64; 3];
    for i in 0..3 {
        let (j, k) = match i {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        };
        // Velocity of the (j,k) intersection point: solve
        // w_j + s_j d_j = w_k + s_k d_k for the common value.
        let det = d[j].cross(d[k]);
        let rhs = w[k] - w[j];
        let s_j = rhs.cross(d[k]) / det;
        let v_cross = w[j] + d[j] * s_j;
        sweep_rates[i] = d[i].cross(v_cross - w[i]) / d[i].norm();
        if sweep_rates[i].abs() < tol {
            return Err(ClassifyError::DegenerateTriple {
                t,
                reason: format!("strand {i} drifts tangentially to the opposite crossing"),
            });
        }
    }
    let z = [jets[0].f.z, jets[1].f.z, jets[2].f.z];
    let z_tol = config.genericity.z_tol_rel * scale;
    if (z[0] - z[1]).abs() < z_tol || (z[0] - z[2]).abs() < z_tol || (z[1] - z[2]).abs() < z_tol {
        return Err(ClassifyError::DegenerateTriple {
            t,
            reason: "strands touch in 3D at the triple point".into(),
        });
    }
    let mut z_order = [0usize, 1, 2];
    z_order.sort_by(|&a, &b| z[b].total_cmp(&z[a]));
    let variant = format!("z-order={}{}{}", z_order[0] + 1, z_order[1] + 1, z_order[2] + 1);
    Ok(SingularEvent {
        t,
        kind: EventKind::Triple,
        locations: u,
        data: EventData::Triple {
            directions: d,
            drifts: w,
            z_order,
            sweep_rates,
        },
        direction: None,
        expected_delta: 0,
        variant,
    })
}
