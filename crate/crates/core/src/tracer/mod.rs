//! Trace an isotopy through time.
//!
//! A family of loops is a path through curve space. While every time slice
//! is a generic diagram the combinatorics cannot change; the interesting
//! times are where one genericity condition fails. Those failures are
//! isolated, and each is one of exactly three local pictures — a cusp, a
//! tangency, or a triple point — realizing the three Reidemeister moves.
//!
//! Detection is two-layered. Crossing-count jumps along a time grid
//! bracket the first and second moves (the count is an integer signal, so
//! bisection is exact); dips of the crossing-separation margin catch the
//! third, which leaves the count unchanged. Every candidate is then pinned
//! by a Newton solve on the exact jet equations and independently verified
//! against the extracted diagrams on both sides.

mod classify;
mod script;

pub use classify::{
    classify_cusp, classify_tangency, classify_triple, ClassifyError, EventData, EventKind,
    MoveDirection, SingularEvent,
};
pub use script::{EventVerification, Interval, MoveScript, TracedEvent};

use crate::curve::{CurveError, IsotopyFamily};
use crate::diagram::{Diagram, MoveKind};
use crate::genericity::{
    check_embedded_on, check_immersion_on, check_no_triple, find_double_points_on, validate,
    DoublePoint, GenericityConfig, LoopGrid,
};
use crate::geom::{circle_dist, wrap_angle};
use crate::numeric::{compass_min_1d, compass_min_3d, golden_min};
use thiserror::Error;

#[derive(Debug, Clone)]
pub struct TraceConfig {
    pub genericity: GenericityConfig,
    /// Samples of the time grid on [0, 1].
    pub time_samples: usize,
    /// Final bracket width for event localization.
    pub bisect_tol: f64,
    /// Time samples for the 3D injectivity sweep.
    pub injectivity_time_samples: usize,
    /// Width below which count bisection hands over to Newton refinement
    /// (grid-scale crossing pairs blur below this).
    pub count_bisect_floor: f64,
    /// Classification margins, relative to the family scale.
    pub classify_tol_rel: f64,
    /// Triple-point detection threshold (margin dip), relative to scale.
    pub triple_detect_rel: f64,
}

impl Default for TraceConfig {
    fn default() -> Self {
        Self {
            genericity: GenericityConfig::default(),
            time_samples: 512,
            bisect_tol: 1e-8,
            injectivity_time_samples: 128,
            count_bisect_floor: 1e-3,
            classify_tol_rel: 1e-4,
            triple_detect_rel: 0.05,
        }
    }
}

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("endpoint t={t} is not a generic diagram:\n{details}")]
    EndpointNotGeneric { t: f64, details: String },
    #[error(
        "not an isotopy: 3D collision at t={t:.6}, (u1,u2)=({u1:.6},{u2:.6}), separation {separation:.3e}"
    )]
    NotAnIsotopy {
        t: f64,
        u1: f64,
        u2: f64,
        separation: f64,
    },
    #[error("resolution conflict in [{t_lo:.6},{t_hi:.6}]: {details}; refine the time grid")]
    ResolutionConflict {
        t_lo: f64,
        t_hi: f64,
        details: String,
    },
    #[error("margin evaluation failed at t={t:.6}: {msg}")]
    MarginFailure { t: f64, msg: String },
    #[error(transparent)]
    Curve(#[from] CurveError),
}

/// The three genericity margins of one time slice.
#[derive(Debug, Clone, Copy)]
pub struct MarginSample {
    pub t: f64,
    /// Condition 1: min |p∘f'|.
    pub immersion: f64,
    /// Condition 2: min separation between projected crossings.
    pub triple_separation: f64,
    /// Condition 3: min |sin angle| over crossings.
    pub transversality: f64,
    pub crossings: usize,
}

/// Result of the 3D injectivity sweep.
#[derive(Debug, Clone, Copy)]
pub struct InjectivityCheck {
    /// min over (u1,u2,t) of |f(u1)-f(u2)| / chord(u1,u2).
    pub margin: f64,
    pub worst: (f64, f64, f64),
}

/// Where a genericity condition fails, before classification.
#[derive(Debug, Clone, Copy)]
pub struct LocalizedEvent {
    pub t: f64,
    /// Failing condition: 1 (immersion), 2 (triple point), 3 (tangency).
    pub condition: u8,
    pub bracket: (f64, f64),
}

// ---------------------------------------------------------------------------
// Margin sampling
// ---------------------------------------------------------------------------

struct Slice {
    t: f64,
    immersion: f64,
    triple_sep: f64,
    transversality: f64,
    dps: Option<Vec<DoublePoint>>,
}

fn slice_at(family: &IsotopyFamily, t: f64, config: &TraceConfig) -> Result<Slice, CurveError> {
    let loop_ = family.at(t)?;
    let m = config.genericity.grid_for(&loop_);
    let grid = LoopGrid::build(&loop_, m);
    let immersion = check_immersion_on(&loop_, &grid, &config.genericity).margin;
    let dps = find_double_points_on(&loop_, &grid, &config.genericity).ok();
    let (triple_sep, transversality) = match &dps {
        Some(list) => (
            check_no_triple(list, 0.0).margin,
            list.iter()
                .map(|d| d.transversality_margin)
                .fold(f64::INFINITY, f64::min),
        ),
        None => (f64::NAN, f64::NAN),
    };
    Ok(Slice {
        t,
        immersion,
        triple_sep,
        transversality,
        dps,
    })
}

/// Retry with small time nudges when a slice lands on a degenerate spot.
fn slice_with_nudge(
    family: &IsotopyFamily,
    t: f64,
    config: &TraceConfig,
    width: f64,
) -> Result<Slice, CurveError> {
    for nudge in [0.0, 0.21, -0.21, 0.43, -0.43] {
        let tn = (t + nudge * width).clamp(0.0, 1.0);
        let s = slice_at(family, tn, config)?;
        if s.dps.is_some() {
            return Ok(s);
        }
    }
    slice_at(family, t, config)
}

/// The three margin functions of module `genericity`, evaluated on the
/// loop at time `t`.
pub fn margin_functions(
    family: &IsotopyFamily,
    t: f64,
    config: &TraceConfig,
) -> Result<MarginSample, TraceError> {
    let s = slice_at(family, t, config)?;
    match s.dps {
        Some(ref list) => Ok(MarginSample {
            t,
            immersion: s.immersion,
            triple_separation: s.triple_sep,
            transversality: s.transversality,
            crossings: list.len(),
        }),
        None => Err(TraceError::MarginFailure {
            t,
            msg: "double-point search failed (degenerate slice)".into(),
        }),
    }
}

// ---------------------------------------------------------------------------
// Injectivity through time
// ---------------------------------------------------------------------------

/// Certify that the family stays embedded in 3-space for all t, or report
/// the first collision witness.
///
/// Sweeps a time grid, then polishes every suspicious sample (and always
/// the global minimum) with a local search over (u1, u2, t): collisions
/// are isolated in time, so their dips can be much narrower than the
/// sweep spacing.
pub fn check_injectivity_through_time(
    family: &IsotopyFamily,
    config: &TraceConfig,
) -> Result<InjectivityCheck, TraceError> {
    let scale = family.scale();
    let threshold = config.genericity.embed_tol_rel * scale;
    let samples = config.injectivity_time_samples.max(2);
    let ratio = |u1: f64, u2: f64, t: f64| -> f64 {
        let l = match family.at(t.clamp(0.0, 1.0)) {
            Ok(l) => l,
            Err(_) => return f64::INFINITY,
        };
        let chord = crate::geom::circle_chord(u1, u2);
        if chord < 1e-12 {
            return l.derivative(u1, 1).norm();
        }
        l.eval(u1).dist(l.eval(u2)) / chord
    };
    let refine = |seed: (f64, f64, f64)| {
        compass_min_3d(
            |u1, u2, t| ratio(u1, u2, t),
            seed,
            1.0 / samples as f64,
            90,
        )
    };

    let mut best = f64::INFINITY;
    let mut best_seed = (0.0, 0.0, 0.0);
    let mut suspects: Vec<(f64, f64, f64)> = Vec::new();
    for k in 0..samples {
        let t = k as f64 / (samples - 1) as f64;
        let loop_ = family.at(t)?;
        let m = config.genericity.grid_for(&loop_);
        let grid = LoopGrid::build(&loop_, m);
        let embed = check_embedded_on(&loop_, &grid, &config.genericity);
        if embed.margin < best {
            best = embed.margin;
            best_seed = (embed.worst.0, embed.worst.1, t);
        }
        if embed.margin < 5.0 * threshold {
            suspects.push((embed.worst.0, embed.worst.1, t));
        }
    }

    // First violation in time order, then the global minimum.
    for seed in suspects {
        let ((u1, u2, tr), refined) = refine(seed);
        if refined < threshold {
            return Err(TraceError::NotAnIsotopy {
                t: tr.clamp(0.0, 1.0),
                u1: wrap_angle(u1),
                u2: wrap_angle(u2),
                separation: refined,
            });
        }
    }
    let ((u1, u2, tr), refined) = refine(best_seed);
    if refined < threshold {
        return Err(TraceError::NotAnIsotopy {
            t: tr.clamp(0.0, 1.0),
            u1: wrap_angle(u1),
            u2: wrap_angle(u2),
            separation: refined,
        });
    }
    Ok(InjectivityCheck {
        margin: refined.min(best),
        worst: (tr, u1, u2),
    })
}

// ---------------------------------------------------------------------------
// Event localization
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
enum Candidate {
    /// Crossing count jumps across the bracket.
    CountJump {
        bracket: (f64, f64),
        delta: i64,
        /// Crossings on the side holding more of them, for seeding.
        seeds: Vec<DoublePoint>,
        seed_t: f64,
    },
    /// Crossing-separation margin dips to ~zero with constant count.
    TripleDip { t_min: f64, bracket: (f64, f64) },
    /// Immersion margin dips to ~zero. The curl of a weak cusp can sit
    /// entirely inside the double-point search's diagonal exclusion band,
    /// leaving no count jump; these dips are classified directly and
    /// verified by probing counts at a visible distance.
    CuspDip {
        t_min: f64,
        u_min: f64,
        bracket: (f64, f64),
    },
    /// Transversality margin dips to ~zero with no count jump recorded.
    TangencyDip { t_min: f64, bracket: (f64, f64) },
}

/// Result of classifying one candidate.
enum Outcome {
    Event(SingularEvent),
    Degenerate(ClassifyError),
    /// Mutually inconsistent observations at grid resolution.
    Conflict(String),
}

fn scan_slices(family: &IsotopyFamily, config: &TraceConfig) -> Result<Vec<Slice>, TraceError> {
    let n = config.time_samples.max(8);
    let width = 1.0 / (n - 1) as f64;
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let t = k as f64 * width;
        out.push(slice_with_nudge(family, t, config, 0.3 * width)?);
    }
    Ok(out)
}

fn find_candidates(
    family: &IsotopyFamily,
    slices: &[Slice],
    config: &TraceConfig,
) -> Result<Vec<Candidate>, TraceError> {
    let scale = family.scale();
    let tau2 = config.genericity.triple_tol_rel * scale;
    let tau1 = config.genericity.immersion_tol_rel * scale;
    let tau3 = config.genericity.transversality_tol;
    let triple_detect = (config.triple_detect_rel * scale).max(10.0 * tau2);
    let mut candidates = Vec::new();

    // Count jumps between good slices.
    let mut last_good: Option<usize> = None;
    for k in 0..slices.len() {
        let Some(dps_k) = &slices[k].dps else {
            continue;
        };
        if let Some(prev) = last_good {
            let dps_prev = slices[prev].dps.as_ref().unwrap();
            if dps_prev.len() != dps_k.len() {
                let delta = dps_k.len() as i64 - dps_prev.len() as i64;
                let (seed_t, seeds) = if dps_k.len() > dps_prev.len() {
                    (slices[k].t, dps_k.clone())
                } else {
                    (slices[prev].t, dps_prev.clone())
                };
                candidates.push(Candidate::CountJump {
                    bracket: (slices[prev].t, slices[k].t),
                    delta,
                    seeds,
                    seed_t,
                });
            }
        }
        last_good = Some(k);
    }

    // Triple-point dips: local minima of the crossing separation with no
    // count change nearby.
    for k in 1..slices.len() - 1 {
        let (Some(a), Some(b), Some(c)) = (&slices[k - 1].dps, &slices[k].dps, &slices[k + 1].dps)
        else {
            continue;
        };
        if a.len() != b.len() || b.len() != c.len() || b.len() < 3 {
            continue;
        }
        let m2 = slices[k].triple_sep;
        if m2.is_nan()
            || m2 > triple_detect
            || m2 > slices[k - 1].triple_sep
            || m2 > slices[k + 1].triple_sep
        {
            continue;
        }
        let bracket = (slices[k - 1].t, slices[k + 1].t);
        let sep = |t: f64| match slice_at(family, t, config) {
            Ok(s) if s.dps.is_some() => s.triple_sep,
            _ => f64::INFINITY,
        };
        let (t_min, refined) = golden_min(sep, bracket.0, bracket.1, config.bisect_tol);
        if refined < tau2.max(1e-6 * scale) {
            candidates.push(Candidate::TripleDip { t_min, bracket });
        }
    }

    // Immersion and transversality dips. These usually accompany a count
    // jump (and deduplicate against it after classification), but they
    // also catch events whose crossings hide below grid resolution.
    for k in 1..slices.len() - 1 {
        let bracket = (slices[k - 1].t, slices[k + 1].t);
        if slices[k].immersion < 10.0 * tau1
            && slices[k].immersion <= slices[k - 1].immersion
            && slices[k].immersion <= slices[k + 1].immersion
        {
            let f = |t: f64| match slice_at(family, t, config) {
                Ok(s) => s.immersion,
                Err(_) => f64::INFINITY,
            };
            let (t_min, refined) = golden_min(f, bracket.0, bracket.1, config.bisect_tol);
            if refined < tau1 {
                let loop_ = family.at(t_min)?;
                let m = config.genericity.grid_for(&loop_);
                let grid = LoopGrid::build(&loop_, m);
                let imm = check_immersion_on(&loop_, &grid, &config.genericity);
                candidates.push(Candidate::CuspDip {
                    t_min,
                    u_min: imm.worst,
                    bracket,
                });
            }
        }
        let m3 = slices[k].transversality;
        if !m3.is_nan()
            && m3 < 10.0 * tau3
            && m3 <= slices[k - 1].transversality
            && m3 <= slices[k + 1].transversality
        {
            let f = |t: f64| match slice_at(family, t, config) {
                Ok(s) => s.transversality,
                Err(_) => f64::INFINITY,
            };
            let (t_min, refined) = golden_min(f, bracket.0, bracket.1, config.bisect_tol);
            if refined < tau3 {
                candidates.push(Candidate::TangencyDip { t_min, bracket });
            }
        }
    }

    Ok(candidates)
}

/// Crossing count near `t`, nudging off degenerate spots.
fn count_near(family: &IsotopyFamily, config: &TraceConfig, t: f64, width: f64) -> Option<usize> {
    slice_with_nudge(family, t.clamp(0.0, 1.0), config, width)
        .ok()?
        .dps
        .map(|d| d.len())
}

/// Verify a dip-classified event by comparing crossing counts at a
/// distance where its crossings are resolvable on the grid.
fn probe_count_delta(
    family: &IsotopyFamily,
    config: &TraceConfig,
    event: &SingularEvent,
    probe: f64,
) -> Option<i64> {
    let cell = 1.0 / (config.time_samples.max(8) - 1) as f64;
    let before = count_near(family, config, event.t - probe, 0.3 * cell)?;
    let after = count_near(family, config, event.t + probe, 0.3 * cell)?;
    Some(after as i64 - before as i64)
}

/// Bisect an integer-valued crossing count over a bracket.
fn bisect_count(
    family: &IsotopyFamily,
    config: &TraceConfig,
    mut lo: f64,
    mut hi: f64,
    c_lo: usize,
) -> (f64, f64) {
    let floor = config.count_bisect_floor.max(config.bisect_tol);
    while hi - lo > floor {
        let mid = 0.5 * (lo + hi);
        match slice_at(family, mid, config) {
            Ok(s) => match s.dps {
                Some(list) => {
                    if list.len() == c_lo {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                None => break,
            },
            Err(_) => break,
        }
    }
    (lo, hi)
}

/// Group the 2k parameters of a crossing cluster into k strands by the
/// largest circular gaps.
fn strand_groups(mut values: Vec<f64>, k: usize) -> Vec<f64> {
    use std::f64::consts::TAU;
    values.sort_by(f64::total_cmp);
    let n = values.len();
    let mut gaps: Vec<(f64, usize)> = (0..n)
        .map(|i| {
            let next = values[(i + 1) % n] + if i + 1 == n { TAU } else { 0.0 };
            (next - values[i], i)
        })
        .collect();
    gaps.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut cut_after: Vec<usize> = gaps.iter().take(k).map(|&(_, i)| i).collect();
    cut_after.sort_unstable();
    let mut centers = Vec::with_capacity(k);
    let mut start = (cut_after[k - 1] + 1) % n;
    for &cut in &cut_after {
        let mut members = Vec::new();
        let mut i = start;
        loop {
            members.push(values[i]);
            if i == cut {
                break;
            }
            i = (i + 1) % n;
        }
        // Average on the circle via the first member's branch.
        let base = members[0];
        let mean = base
            + members
                .iter()
                .map(|v| {
                    let mut d = v - base;
                    if d > std::f64::consts::PI {
                        d -= TAU;
                    }
                    if d < -std::f64::consts::PI {
                        d += TAU;
                    }
                    d
                })
                .sum::<f64>()
                / members.len() as f64;
        centers.push(wrap_angle(mean));
        start = (cut + 1) % n;
    }
    centers
}

/// The mutually closest pair of crossings in parameter space.
fn closest_pair(dps: &[DoublePoint]) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize, f64)> = None;
    for i in 0..dps.len() {
        for j in i + 1..dps.len() {
            let d = circle_dist(dps[i].u1, dps[j].u1) + circle_dist(dps[i].u2, dps[j].u2);
            if best.is_none_or(|(_, _, bd)| d < bd) {
                best = Some((i, j, d));
            }
        }
    }
    best.map(|(i, j, _)| (i, j))
}

/// Distance from the event time at which a cusp's curl crossing clears
/// the diagonal exclusion band of the double-point search.
fn cusp_visible_distance(family: &IsotopyFamily, event: &SingularEvent, config: &TraceConfig) -> f64 {
    let EventData::Cusp { c_y, e_y, .. } = &event.data else {
        return 0.0;
    };
    let loop_ = match family.at(event.t) {
        Ok(l) => l,
        Err(_) => return 0.0,
    };
    let m = config.genericity.grid_for(&loop_) as f64;
    // Curl half-width ε solves ε² = 6 |e_y δ / c_y|; require 2ε outside
    // the band of width 3·2π/M, with a 1.5x safety factor.
    let eps_vis = 1.5 * 1.5 * std::f64::consts::TAU / m;
    eps_vis * eps_vis * c_y.abs() / (6.0 * e_y.abs())
}

/// Distance at which a tangency's crossing pair separates beyond the
/// duplicate-merge radius.
fn tangency_visible_distance(
    family: &IsotopyFamily,
    event: &SingularEvent,
    config: &TraceConfig,
) -> f64 {
    let EventData::Tangency { b1, b2, drift, .. } = &event.data else {
        return 0.0;
    };
    let loop_ = match family.at(event.t) {
        Ok(l) => l,
        Err(_) => return 0.0,
    };
    let m = config.genericity.grid_for(&loop_) as f64;
    let merge = std::f64::consts::TAU / m;
    // Pair separation grows like 2 sqrt(|drift δ / (b1-b2)|) in x; fold in
    // a unit parameter speed and a 1.5x safety factor.
    let half = 1.5 * merge / 2.0;
    half * half * (b1 - b2).abs() / drift.abs().max(1e-12)
}

fn cusp_seed_at(family: &IsotopyFamily, config: &TraceConfig, t: f64) -> Option<f64> {
    let loop_ = family.at(t).ok()?;
    let m = config.genericity.grid_for(&loop_);
    let speed = |u: f64| loop_.derivative(u, 1).project().norm();
    let mut best_u = 0.0;
    let mut best_v = f64::INFINITY;
    for k in 0..m {
        let u = std::f64::consts::TAU * k as f64 / m as f64;
        let v = speed(u);
        if v < best_v {
            best_v = v;
            best_u = u;
        }
    }
    let (u_seed, _) = compass_min_1d(speed, best_u, std::f64::consts::TAU / m as f64, 60);
    Some(wrap_angle(u_seed))
}

fn classify_candidate(family: &IsotopyFamily, config: &TraceConfig, cand: &Candidate) -> Outcome {
    let cell = 1.0 / (config.time_samples.max(8) - 1) as f64;
    match cand {
        Candidate::TripleDip { t_min, bracket } => {
            match classify_triple_at(family, config, *t_min) {
                Ok(event) => match check_in_bracket(event, *bracket, cell) {
                    Ok(e) => Outcome::Event(e),
                    Err(e) => Outcome::Degenerate(e),
                },
                Err(e) => Outcome::Degenerate(e),
            }
        }
        Candidate::CuspDip {
            t_min,
            u_min,
            bracket,
        } => match classify_cusp(family, *t_min, *u_min, config) {
            Ok(event) => {
                let probe = cusp_visible_distance(family, &event, config)
                    .max(2.0 * cell)
                    .min(0.1);
                match probe_count_delta(family, config, &event, probe) {
                    Some(delta) if delta == event.expected_delta => Outcome::Event(event),
                    Some(_) => Outcome::Conflict(format!(
                        "immersion margin vanishes at t={:.6} but crossing counts nearby do \
                         not change accordingly (canceling cusp pair?)",
                        event.t
                    )),
                    None => Outcome::Conflict(format!(
                        "cannot evaluate crossings around the cusp at t={:.6}",
                        event.t
                    )),
                }
            }
            Err(e) => {
                let _ = bracket;
                Outcome::Degenerate(e)
            }
        },
        Candidate::TangencyDip { t_min, bracket } => {
            let seeds = match slice_with_nudge(family, *t_min, config, 0.3 * cell) {
                Ok(s) => s.dps.unwrap_or_default(),
                Err(_) => Vec::new(),
            };
            match classify_tangency_from_side(family, config, *t_min, *t_min, &seeds) {
                Ok(event) => {
                    let probe = tangency_visible_distance(family, &event, config)
                        .max(2.0 * cell)
                        .min(0.1);
                    match probe_count_delta(family, config, &event, probe) {
                        Some(delta) if delta == event.expected_delta => Outcome::Event(event),
                        Some(_) => Outcome::Conflict(format!(
                            "transversality margin vanishes at t={:.6} but crossing counts \
                             nearby do not change accordingly (canceling tangency pair?)",
                            event.t
                        )),
                        None => Outcome::Conflict(format!(
                            "cannot evaluate crossings around the tangency at t={:.6}",
                            event.t
                        )),
                    }
                }
                Err(e) => {
                    let _ = bracket;
                    Outcome::Degenerate(e)
                }
            }
        }
        Candidate::CountJump {
            bracket,
            delta,
            seeds,
            seed_t,
        } => {
            let (lo, hi) = {
                let c_lo = count_at(family, config, bracket.0);
                match c_lo {
                    Some(c) => bisect_count(family, config, bracket.0, bracket.1, c),
                    None => *bracket,
                }
            };
            let t_mid = 0.5 * (lo + hi);
            if delta.abs() >= 3 {
                return Outcome::Conflict(format!(
                    "crossing count changes by {delta} across one time cell"
                ));
            }
            // First guess by the magnitude of the jump; a |delta| of 1 can
            // also be a tangency whose newborn pair is still merged at
            // grid resolution, so fall through between the two.
            let try_cusp = |t: f64| -> Result<SingularEvent, ClassifyError> {
                let u = cusp_seed_at(family, config, t)
                    .ok_or(ClassifyError::NewtonFailed { t })?;
                let event = classify_cusp(family, t, u, config)?;
                check_in_bracket(event, (lo, hi), 3.0 * cell)
            };
            let try_tangency = |t: f64| -> Result<SingularEvent, ClassifyError> {
                let event = classify_tangency_from_side(family, config, t, *seed_t, seeds)?;
                check_in_bracket(event, (lo, hi), 3.0 * cell)
            };
            let (first, second): (
                &dyn Fn(f64) -> Result<SingularEvent, ClassifyError>,
                &dyn Fn(f64) -> Result<SingularEvent, ClassifyError>,
            ) = if delta.abs() == 1 {
                (&try_cusp, &try_tangency)
            } else {
                (&try_tangency, &try_cusp)
            };
            match first(t_mid) {
                Ok(event) => Outcome::Event(event),
                Err(first_err) => match second(t_mid) {
                    Ok(event) => Outcome::Event(event),
                    Err(_) => Outcome::Degenerate(first_err),
                },
            }
        }
    }
}

/// Classify a triple point from the crossing cluster at time `t`.
fn classify_triple_at(
    family: &IsotopyFamily,
    config: &TraceConfig,
    t_min: f64,
) -> Result<SingularEvent, ClassifyError> {
    let s = slice_at(family, t_min, config)
        .map_err(|_| ClassifyError::NewtonFailed { t: t_min })?;
    let dps = s.dps.ok_or(ClassifyError::NewtonFailed { t: t_min })?;
    // The cluster: the two crossings closest in projected position plus
    // the crossing nearest to them.
    let (i, j) = find_position_cluster(&dps).ok_or(ClassifyError::DegenerateTriple {
        t: t_min,
        reason: "no crossing cluster at the separation minimum".into(),
    })?;
    let mut params = vec![dps[i].u1, dps[i].u2, dps[j].u1, dps[j].u2];
    let target = dps[i].pos;
    let mut third = None;
    let mut best = f64::INFINITY;
    for (k, dp) in dps.iter().enumerate() {
        if k == i || k == j {
            continue;
        }
        let d = dp.pos.dist(target);
        if d < best {
            best = d;
            third = Some(k);
        }
    }
    let third = third.ok_or(ClassifyError::DegenerateTriple {
        t: t_min,
        reason: "only two crossings near the separation minimum".into(),
    })?;
    params.push(dps[third].u1);
    params.push(dps[third].u2);
    let centers = strand_groups(params, 3);
    classify_triple(family, t_min, [centers[0], centers[1], centers[2]], config)
}


/// Tangency seeding: the merging pair is the mutually closest crossing
/// pair on the side that still has both.
fn classify_tangency_from_side(
    family: &IsotopyFamily,
    config: &TraceConfig,
    t_mid: f64,
    seed_t: f64,
    seeds: &[DoublePoint],
) -> Result<SingularEvent, ClassifyError> {
    // Prefer fresh crossings close to the event time.
    let side = slice_at(family, seed_t, config)
        .ok()
        .and_then(|s| s.dps)
        .unwrap_or_else(|| seeds.to_vec());
    let (i, j) = closest_pair(&side).ok_or(ClassifyError::DegenerateTangency {
        t: t_mid,
        reason: "no crossing pair available for seeding".into(),
    })?;
    // Pair up each branch with its partner on the other crossing.
    let (a, b) = (&side[i], &side[j]);
    let (u1, u2) = if circle_dist(a.u1, b.u1) + circle_dist(a.u2, b.u2)
        <= circle_dist(a.u1, b.u2) + circle_dist(a.u2, b.u1)
    {
        (
            0.5 * (a.u1 + branch_near(a.u1, b.u1)),
            0.5 * (a.u2 + branch_near(a.u2, b.u2)),
        )
    } else {
        (
            0.5 * (a.u1 + branch_near(a.u1, b.u2)),
            0.5 * (a.u2 + branch_near(a.u2, b.u1)),
        )
    };
    classify_tangency(family, t_mid, wrap_angle(u1), wrap_angle(u2), config)
}

/// Representative of `v` on the branch nearest `base`.
fn branch_near(base: f64, v: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    let mut d = v - base;
    while d > PI {
        d -= TAU;
    }
    while d < -PI {
        d += TAU;
    }
    base + d
}

fn check_in_bracket(
    event: SingularEvent,
    bracket: (f64, f64),
    slack: f64,
) -> Result<SingularEvent, ClassifyError> {
    if event.t < bracket.0 - slack || event.t > bracket.1 + slack {
        return Err(ClassifyError::NewtonFailed { t: event.t });
    }
    Ok(event)
}

fn count_at(family: &IsotopyFamily, config: &TraceConfig, t: f64) -> Option<usize> {
    slice_at(family, t, config).ok()?.dps.map(|d| d.len())
}

/// Two crossings whose projected positions nearly coincide.
fn find_position_cluster(dps: &[DoublePoint]) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize, f64)> = None;
    for i in 0..dps.len() {
        for j in i + 1..dps.len() {
            let d = dps[i].pos.dist(dps[j].pos);
            if best.is_none_or(|(_, _, bd)| d < bd) {
                best = Some((i, j, d));
            }
        }
    }
    best.map(|(i, j, _)| (i, j))
}

fn endpoint_check(family: &IsotopyFamily, config: &TraceConfig, t: f64) -> Result<(), TraceError> {
    let loop_ = family.at(t)?;
    let report = validate(&loop_, &config.genericity);
    if !report.passed() {
        return Err(TraceError::EndpointNotGeneric {
            t,
            details: report.to_string(),
        });
    }
    Ok(())
}

/// Locate all singular times with their failing condition.
pub fn localize_events(
    family: &IsotopyFamily,
    config: &TraceConfig,
) -> Result<Vec<LocalizedEvent>, TraceError> {
    let outcome = run_pipeline(family, config)?;
    Ok(outcome
        .events
        .iter()
        .map(|ev| LocalizedEvent {
            t: ev.t,
            condition: match ev.kind {
                Some(EventKind::Cusp) => 1,
                Some(EventKind::Triple) => 2,
                Some(EventKind::Tangency) => 3,
                None => 0,
            },
            bracket: ev.bracket,
        })
        .collect())
}

struct PipelineEvent {
    t: f64,
    kind: Option<EventKind>,
    bracket: (f64, f64),
    outcome: Result<SingularEvent, ClassifyError>,
}

struct PipelineOutcome {
    events: Vec<PipelineEvent>,
}

fn run_pipeline(
    family: &IsotopyFamily,
    config: &TraceConfig,
) -> Result<PipelineOutcome, TraceError> {
    endpoint_check(family, config, 0.0)?;
    endpoint_check(family, config, 1.0)?;
    check_injectivity_through_time(family, config)?;

    let slices = scan_slices(family, config)?;
    let candidates = find_candidates(family, &slices, config)?;
    let cell = 1.0 / (config.time_samples.max(8) - 1) as f64;

    let mut events: Vec<PipelineEvent> = Vec::new();
    for cand in &candidates {
        let bracket = match cand {
            Candidate::CountJump { bracket, .. } => *bracket,
            Candidate::TripleDip { bracket, .. } => *bracket,
            Candidate::CuspDip { bracket, .. } => *bracket,
            Candidate::TangencyDip { bracket, .. } => *bracket,
        };
        let outcome = match classify_candidate(family, config, cand) {
            Outcome::Event(e) => Ok(e),
            Outcome::Degenerate(e) => Err(e),
            Outcome::Conflict(details) => {
                return Err(TraceError::ResolutionConflict {
                    t_lo: bracket.0,
                    t_hi: bracket.1,
                    details,
                })
            }
        };
        let (t, kind) = match &outcome {
            Ok(ev) => (ev.t, Some(ev.kind)),
            Err(e) => (e.time().clamp(bracket.0, bracket.1), None),
        };
        // The same physical event surfaces from several detectors (count
        // jumps and margin dips) and from adjacent cells when a sample
        // lands in the blur zone; merge duplicates.
        let duplicate = events.iter().any(|prev| {
            prev.kind == kind
                && (prev.t - t).abs() < 2.0 * cell
                && match (&prev.outcome, &outcome) {
                    (Ok(a), Ok(b)) => {
                        a.locations.len() == b.locations.len()
                            && a.locations
                                .iter()
                                .zip(b.locations.iter())
                                .all(|(x, y)| circle_dist(*x, *y) < 0.1)
                    }
                    _ => true,
                }
        });
        if !duplicate {
            events.push(PipelineEvent {
                t,
                kind,
                bracket,
                outcome,
            });
        }
    }
    events.sort_by(|a, b| a.t.total_cmp(&b.t));

    // Distinct events inside one grid cell cannot be ordered reliably.
    for w in events.windows(2) {
        if w[1].t - w[0].t < cell {
            return Err(TraceError::ResolutionConflict {
                t_lo: w[0].t,
                t_hi: w[1].t,
                details: "two distinct events closer than the time grid".into(),
            });
        }
    }
    Ok(PipelineOutcome { events })
}

// ---------------------------------------------------------------------------
// Full trace
// ---------------------------------------------------------------------------

/// Moduli audited for coloring invariance across the whole trace.
const COLORING_MODULI: [u64; 2] = [3, 5];

/// Run the full pipeline: localize, classify, extract interval diagrams,
/// and verify every move against the combinatorics.
pub fn trace(family: &IsotopyFamily, config: &TraceConfig) -> Result<MoveScript, TraceError> {
    let outcome = run_pipeline(family, config)?;
    let scale = family.scale();
    let z_tol = config.genericity.z_tol_rel * scale;

    // Interval diagrams at midpoints, with isomorphism checks at the
    // quarter points.
    let mut boundaries = vec![0.0];
    boundaries.extend(outcome.events.iter().map(|e| e.t));
    boundaries.push(1.0);
    let mut intervals = Vec::new();
    let mut notes = Vec::new();
    for w in boundaries.windows(2) {
        let (a, b) = (w[0], w[1]);
        let mut diagrams = Vec::new();
        for frac in [0.25, 0.5, 0.75] {
            let t = a + (b - a) * frac;
            let loop_ = family.at(t)?;
            let report = validate(&loop_, &config.genericity);
            if !report.passed() {
                notes.push(format!("interval [{a:.6},{b:.6}]: slice t={t:.6} not generic"));
                continue;
            }
            match Diagram::extract(&loop_, &report.double_points, z_tol) {
                Ok(d) => diagrams.push(d),
                Err(e) => notes.push(format!(
                    "interval [{a:.6},{b:.6}]: extraction failed at t={t:.6}: {e}"
                )),
            }
        }
        let samples_isomorphic =
            diagrams.len() == 3 && diagrams.windows(2).all(|p| p[0].isomorphic(&p[1]));
        let diagram = if diagrams.len() == 3 {
            Some(diagrams.swap_remove(1))
        } else {
            diagrams.into_iter().next()
        };
        intervals.push(Interval {
            t_start: a,
            t_end: b,
            diagram,
            samples_isomorphic,
        });
    }

    // Per-event verification: count delta and combinatorial replay.
    let mut events = Vec::new();
    for (k, ev) in outcome.events.into_iter().enumerate() {
        let before = intervals[k].diagram.clone();
        let after = intervals[k + 1].diagram.clone();
        let mut verification = EventVerification {
            delta_crossings: match (&before, &after) {
                (Some(b), Some(a)) => Some(a.crossings() as i64 - b.crossings() as i64),
                _ => None,
            },
            delta_matches_kind: false,
            replay_isomorphic: None,
            notes: Vec::new(),
        };
        if let Ok(event) = &ev.outcome {
            if let Some(delta) = verification.delta_crossings {
                verification.delta_matches_kind = delta == event.expected_delta;
                if !verification.delta_matches_kind {
                    verification.notes.push(format!(
                        "crossing delta {delta:+} does not match expected {:+}",
                        event.expected_delta
                    ));
                }
            }
            if let (Some(b), Some(a)) = (&before, &after) {
                verification.replay_isomorphic = Some(replay_event(event, b, a));
                if verification.replay_isomorphic == Some(false) {
                    verification
                        .notes
                        .push("combinatorial replay does not reproduce the far diagram".into());
                }
            }
        } else {
            verification
                .notes
                .push("event could not be classified".into());
        }
        events.push(TracedEvent {
            t: ev.t,
            outcome: ev.outcome,
            verification,
        });
    }

    let colorings = |d: &Option<Diagram>| -> Vec<(u64, u128)> {
        match d {
            Some(d) => COLORING_MODULI
                .iter()
                .map(|&n| (n, d.fox_colorings(n)))
                .collect(),
            None => Vec::new(),
        }
    };
    let colorings_start = colorings(&intervals.first().and_then(|i| i.diagram.clone()));
    let colorings_end = colorings(&intervals.last().and_then(|i| i.diagram.clone()));

    Ok(MoveScript {
        intervals,
        events,
        colorings_start,
        colorings_end,
        notes,
    })
}

/// Replay the classified move combinatorially: some site of the move's
/// kind on the crossing-richer side must reproduce the other side.
fn replay_event(event: &SingularEvent, before: &Diagram, after: &Diagram) -> bool {
    let (kind, from, to) = match event.kind {
        EventKind::Cusp => {
            if event.expected_delta < 0 {
                (MoveKind::R1Remove, before, after)
            } else {
                (MoveKind::R1Remove, after, before)
            }
        }
        EventKind::Tangency => {
            if event.expected_delta < 0 {
                (MoveKind::R2Remove, before, after)
            } else {
                (MoveKind::R2Remove, after, before)
            }
        }
        EventKind::Triple => (MoveKind::R3, before, after),
    };
    from.enumerate_move_sites(kind)
        .iter()
        .any(|site| match from.apply_move(site) {
            Ok(d) => d.isomorphic(to),
            Err(_) => false,
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::{CoordSeries, FourierLoop};

    fn trefoil() -> FourierLoop {
        FourierLoop::new(
            CoordSeries::zero(3).with(1, 0.0, 1.0).with(2, 0.0, 2.0),
            CoordSeries::zero(3).with(1, 1.0, 0.0).with(2, -2.0, 0.0),
            CoordSeries::zero(3).with(3, 0.0, -1.0),
        )
        .unwrap()
    }

    #[test]
    fn constant_family_margins_and_trace() {
        let t = trefoil();
        let fam = IsotopyFamily::new(vec![(0.0, t.clone()), (1.0, t)]).unwrap();
        let cfg = TraceConfig {
            time_samples: 64,
            injectivity_time_samples: 16,
            ..TraceConfig::default()
        };
        for ts in [0.0, 0.33, 1.0] {
            let m = margin_functions(&fam, ts, &cfg).unwrap();
            assert_eq!(m.crossings, 3);
            assert!(m.immersion > 0.1);
            assert!(m.transversality > 0.1);
        }
        let inj = check_injectivity_through_time(&fam, &cfg).unwrap();
        assert!(inj.margin > 0.01);
        let script = trace(&fam, &cfg).unwrap();
        assert!(script.events.is_empty());
        assert_eq!(script.intervals.len(), 1);
        assert!(script.passed(), "{}", script.to_text());
    }

    #[test]
    fn mirror_family_is_not_an_isotopy() {
        let t = trefoil();
        let mirror = FourierLoop::new(
            t.coord(0).clone(),
            t.coord(1).clone(),
            CoordSeries::zero(3).with(3, 0.0, 1.0),
        )
        .unwrap();
        let fam = IsotopyFamily::new(vec![(0.0, t), (1.0, mirror)]).unwrap();
        let cfg = TraceConfig {
            injectivity_time_samples: 64,
            ..TraceConfig::default()
        };
        match check_injectivity_through_time(&fam, &cfg) {
            Err(TraceError::NotAnIsotopy { t, separation, .. }) => {
                assert!(separation < 1e-3);
                assert!((0.0..=1.0).contains(&t));
            }
            other => panic!("expected NotAnIsotopy, got {other:?}"),
        }
    }

    #[test]
    fn rigid_rotation_family_passes_injectivity() {
        // Rotate the trefoil about the x-axis through keyframes.
        let base = trefoil();
        let rotated = |angle: f64| {
            let c = angle.cos();
            let s = angle.sin();
            // y' = c y - s z, z' = s y + c z per harmonic.
            let mix = |ya: &CoordSeries, za: &CoordSeries, cy: f64, cz: f64| {
                let mut out = CoordSeries::zero(3);
                out.constant = cy * ya.constant + cz * za.constant;
                for k in 0..3 {
                    out.cos[k] = cy * ya.cos[k] + cz * za.cos[k];
                    out.sin[k] = cy * ya.sin[k] + cz * za.sin[k];
                }
                out
            };
            FourierLoop::new(
                base.coord(0).clone(),
                mix(base.coord(1), base.coord(2), c, -s),
                mix(base.coord(1), base.coord(2), s, c),
            )
            .unwrap()
        };
        let frames: Vec<(f64, FourierLoop)> = (0..=4)
            .map(|k| {
                let t = k as f64 / 4.0;
                (t, rotated(0.5 * t))
            })
            .collect();
        let fam = IsotopyFamily::new(frames).unwrap();
        let cfg = TraceConfig {
            injectivity_time_samples: 48,
            ..TraceConfig::default()
        };
        let inj = check_injectivity_through_time(&fam, &cfg).unwrap();
        assert!(inj.margin > 1e-3);
    }

    #[test]
    fn endpoint_not_generic_is_reported() {
        // The flat figure-eight is not embedded, so it cannot anchor an
        // isotopy.
        let flat = FourierLoop::new(
            CoordSeries::zero(2).with(2, 0.0, 1.0),
            CoordSeries::zero(2).with(1, 0.0, 1.0),
            CoordSeries::zero(2),
        )
        .unwrap();
        let fam = IsotopyFamily::new(vec![(0.0, flat.clone()), (1.0, flat)]).unwrap();
        let cfg = TraceConfig::default();
        match trace(&fam, &cfg) {
            Err(TraceError::EndpointNotGeneric { t, .. }) => assert_eq!(t, 0.0),
            other => panic!("expected EndpointNotGeneric, got {other:?}"),
        }
    }
}
