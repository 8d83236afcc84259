//! Numerical genericity checks for knot projections.
//!
//! A projection is a diagram when the projected tangent never vanishes,
//! all multiple points are double points, and those double points are
//! transverse. Each condition is measured as a margin (distance to
//! failure); verdicts are pure threshold functions of the margins. Loops
//! that fail can be nudged into general position by seeded perturbation.

use crate::curve::FourierLoop;
use crate::geom::{circle_chord, circle_dist, wrap_angle, Point2, Vec2};
use crate::numeric::{compass_min_1d, compass_min_2d, solve2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;
use thiserror::Error;

/// Tolerances and grid sizes for all checks. Relative tolerances are
/// multiplied by the loop's coefficient scale.
#[derive(Debug, Clone)]
pub struct GenericityConfig {
    /// Samples per parameter axis; `None` picks `max(256, 8N)`.
    pub grid: Option<usize>,
    /// Newton convergence requirement on |F| at double points.
    pub newton_tol: f64,
    /// 3D embeddedness margin threshold, relative to scale.
    pub embed_tol_rel: f64,
    /// Immersion margin threshold (condition 1), relative to scale.
    pub immersion_tol_rel: f64,
    /// Separation threshold between crossings (condition 2), relative.
    pub triple_tol_rel: f64,
    /// Transversality threshold on |sin angle| (condition 3), absolute.
    pub transversality_tol: f64,
    /// |sin angle| below which a refined double point counts as degenerate.
    pub degenerate_tol: f64,
    /// z-gap below which over/under is ambiguous, relative to scale.
    pub z_tol_rel: f64,
}

impl Default for GenericityConfig {
    fn default() -> Self {
        Self {
            grid: None,
            newton_tol: 1e-10,
            embed_tol_rel: 1e-3,
            immersion_tol_rel: 1e-3,
            triple_tol_rel: 1e-3,
            transversality_tol: 1e-2,
            degenerate_tol: 1e-6,
            z_tol_rel: 1e-7,
        }
    }
}

impl GenericityConfig {
    /// Effective grid size; never below the 4N sampling floor.
    pub fn grid_for(&self, loop_: &FourierLoop) -> usize {
        let floor = 4 * loop_.degree();
        self.grid.unwrap_or(256.max(8 * loop_.degree())).max(floor)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    /// Not evaluated because a prerequisite check failed.
    Skipped,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::Pass => write!(f, "PASS"),
            Verdict::Fail => write!(f, "FAIL"),
            Verdict::Skipped => write!(f, "SKIPPED"),
        }
    }
}

/// A transverse self-intersection of the projected curve.
#[derive(Debug, Clone, Copy)]
pub struct DoublePoint {
    /// Parameters with `u1 < u2`, both in [0, 2π).
    pub u1: f64,
    pub u2: f64,
    /// Projected location of the crossing.
    pub pos: Point2,
    /// |sin| of the angle between the projected tangents.
    pub transversality_margin: f64,
    /// `f_z(u1) - f_z(u2)`; its sign decides which strand is over.
    pub z_gap: f64,
}

#[derive(Debug, Clone)]
pub struct EmbedCheck {
    /// min over the off-diagonal torus of |f(u1)-f(u2)| / chord(u1,u2).
    pub margin: f64,
    pub worst: (f64, f64),
    /// Pairs whose normalized separation fell below the threshold.
    pub offenders: Vec<(f64, f64)>,
}

#[derive(Debug, Clone)]
pub struct ImmersionCheck {
    /// min over u of |p∘f'(u)|.
    pub margin: f64,
    pub worst: f64,
    pub offenders: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct TripleCheck {
    /// min pairwise distance between distinct projected crossings.
    /// `f64::INFINITY` when fewer than two crossings exist.
    pub margin: f64,
    /// Groups of crossing indices closer than the threshold.
    pub clusters: Vec<Vec<usize>>,
}

#[derive(Debug, Error)]
pub enum DoublePointError {
    #[error("newton iteration diverged near (u1,u2)=({u1:.6},{u2:.6})")]
    NewtonDiverged { u1: f64, u2: f64 },
    #[error(
        "degenerate double point at (u1,u2)=({u1:.6},{u2:.6}): |sin angle|={sin_angle:.3e}"
    )]
    Degenerate { u1: f64, u2: f64, sin_angle: f64 },
}

#[derive(Debug, Error)]
pub enum PerturbError {
    #[error("loop is not embedded in 3-space; perturbation only fixes projection genericity")]
    NotEmbedded { u1: f64, u2: f64 },
    #[error("perturbation failed after {attempts} attempts (last magnitude {last_magnitude:.3e})")]
    Failed { attempts: usize, last_magnitude: f64 },
}

/// Aggregate result of all genericity checks on one loop.
#[derive(Debug, Clone)]
pub struct GenericityReport {
    pub scale: f64,
    pub grid: usize,
    pub embedded_margin: f64,
    pub immersion_margin: f64,
    pub triple_margin: Option<f64>,
    pub transversality_margin: Option<f64>,
    pub double_points: Vec<DoublePoint>,
    pub verdict_embedded: Verdict,
    pub verdict_condition1: Verdict,
    pub verdict_condition2: Verdict,
    pub verdict_condition3: Verdict,
    pub diagnostics: Vec<String>,
}

impl GenericityReport {
    pub fn passed(&self) -> bool {
        [
            self.verdict_embedded,
            self.verdict_condition1,
            self.verdict_condition2,
            self.verdict_condition3,
        ]
        .iter()
        .all(|v| *v == Verdict::Pass)
    }

    /// Machine-readable `key=value` lines.
    pub fn to_kv(&self) -> String {
        let opt = |v: Option<f64>| match v {
            None => "unevaluated".to_string(),
            Some(x) if x.is_infinite() => "inf".to_string(),
            Some(x) => format!("{x:.9e}"),
        };
        let mut out = String::new();
        out.push_str(&format!("embedded_margin={:.9e}\n", self.embedded_margin));
        out.push_str(&format!("immersion_margin={:.9e}\n", self.immersion_margin));
        out.push_str(&format!("triple_margin={}\n", opt(self.triple_margin)));
        out.push_str(&format!(
            "transversality_margin={}\n",
            opt(self.transversality_margin)
        ));
        out.push_str(&format!("crossings={}\n", self.double_points.len()));
        out.push_str(&format!("verdict_embedded={}\n", self.verdict_embedded));
        out.push_str(&format!("verdict_condition1={}\n", self.verdict_condition1));
        out.push_str(&format!("verdict_condition2={}\n", self.verdict_condition2));
        out.push_str(&format!("verdict_condition3={}\n", self.verdict_condition3));
        out.push_str(&format!(
            "verdict={}\n",
            if self.passed() { "PASS" } else { "FAIL" }
        ));
        out
    }
}

impl std::fmt::Display for GenericityReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(
            f,
            "genericity report (grid {}, scale {:.3}):",
            self.grid, self.scale
        )?;
        writeln!(
            f,
            "  embedded in 3D   {}  margin {:.6e}",
            self.verdict_embedded, self.embedded_margin
        )?;
        writeln!(
            f,
            "  immersion (C1)   {}  margin {:.6e}",
            self.verdict_condition1, self.immersion_margin
        )?;
        match self.triple_margin {
            Some(m) => writeln!(
                f,
                "  no triples (C2)  {}  margin {:.6e}",
                self.verdict_condition2, m
            )?,
            None => writeln!(f, "  no triples (C2)  {}", self.verdict_condition2)?,
        }
        match self.transversality_margin {
            Some(m) => writeln!(
                f,
                "  transverse (C3)  {}  margin {:.6e}",
                self.verdict_condition3, m
            )?,
            None => writeln!(f, "  transverse (C3)  {}", self.verdict_condition3)?,
        }
        writeln!(f, "  crossings: {}", self.double_points.len())?;
        for (i, dp) in self.double_points.iter().enumerate() {
            writeln!(
                f,
                "    [{i}] u1={:.6} u2={:.6} pos=({:.4},{:.4}) |sin|={:.4} z_gap={:+.4}",
                dp.u1, dp.u2, dp.pos.x, dp.pos.y, dp.transversality_margin, dp.z_gap
            )?;
        }
        for d in &self.diagnostics {
            writeln!(f, "  note: {d}")?;
        }
        Ok(())
    }
}

/// Cached samples of a loop on a uniform parameter grid.
pub(crate) struct LoopGrid {
    pub m: usize,
    pub u: Vec<f64>,
    pub point: Vec<crate::geom::Point3>,
    pub proj: Vec<Point2>,
    pub dproj: Vec<Vec2>,
}

impl LoopGrid {
    pub fn build(loop_: &FourierLoop, m: usize) -> Self {
        let u: Vec<f64> = (0..m).map(|i| TAU * i as f64 / m as f64).collect();
        let point: Vec<_> = u.iter().map(|&ui| loop_.eval(ui)).collect();
        let proj: Vec<_> = point.iter().map(|p| p.project()).collect();
        let dproj: Vec<_> = u.iter().map(|&ui| loop_.derivative(ui, 1).project()).collect();
        Self {
            m,
            u,
            point,
            proj,
            dproj,
        }
    }
}

/// Check 3D embeddedness: the separation |f(u1)-f(u2)| normalized by the
/// parameter-circle chord must stay away from zero off the diagonal. For
/// the round unit circle the margin is exactly 1.
pub fn check_embedded(loop_: &FourierLoop, config: &GenericityConfig) -> EmbedCheck {
    let m = config.grid_for(loop_);
    let grid = LoopGrid::build(loop_, m);
    check_embedded_on(loop_, &grid, config)
}

pub(crate) fn check_embedded_on(
    loop_: &FourierLoop,
    grid: &LoopGrid,
    config: &GenericityConfig,
) -> EmbedCheck {
    let m = grid.m;
    let tau_embed = config.embed_tol_rel * loop_.scale();
    let ratio = |u1: f64, u2: f64| -> f64 {
        let chord = circle_chord(u1, u2);
        if chord < 1e-12 {
            // Diagonal limit: the 3D speed.
            return loop_.derivative(u1, 1).norm();
        }
        loop_.eval(u1).dist(loop_.eval(u2)) / chord
    };

    let mut best = f64::INFINITY;
    let mut best_pair = (0usize, 1usize);
    let mut coarse_offenders: Vec<(usize, usize)> = Vec::new();
    for i in 0..m {
        for j in i + 1..m {
            let chord = circle_chord(grid.u[i], grid.u[j]);
            let r = grid.point[i].dist(grid.point[j]) / chord;
            if r < best {
                best = r;
                best_pair = (i, j);
            }
            if r < tau_embed {
                coarse_offenders.push((i, j));
            }
        }
    }

    let step = TAU / m as f64;
    let ((u1, u2), margin) = compass_min_2d(
        |a, b| ratio(a, b),
        (grid.u[best_pair.0], grid.u[best_pair.1]),
        step,
        80,
    );
    let mut worst = (wrap_angle(u1), wrap_angle(u2));
    if worst.0 > worst.1 {
        worst = (worst.1, worst.0);
    }

    // Cluster coarse offenders so each collision is reported once.
    let mut offenders: Vec<(f64, f64)> = Vec::new();
    'next: for (i, j) in coarse_offenders {
        let cand = (grid.u[i], grid.u[j]);
        for &(a, b) in &offenders {
            if circle_dist(a, cand.0) < 4.0 * step && circle_dist(b, cand.1) < 4.0 * step {
                continue 'next;
            }
        }
        offenders.push(cand);
    }
    // A refined collision missed by the coarse pass is still an offender.
    if margin.min(best) < tau_embed && offenders.is_empty() {
        offenders.push(worst);
    }

    EmbedCheck {
        margin: margin.min(best),
        worst,
        offenders,
    }
}

/// Condition 1: min over u of |p∘f'(u)|.
pub fn check_immersion(loop_: &FourierLoop, config: &GenericityConfig) -> ImmersionCheck {
    let m = config.grid_for(loop_);
    let grid = LoopGrid::build(loop_, m);
    check_immersion_on(loop_, &grid, config)
}

pub(crate) fn check_immersion_on(
    loop_: &FourierLoop,
    grid: &LoopGrid,
    config: &GenericityConfig,
) -> ImmersionCheck {
    let tau1 = config.immersion_tol_rel * loop_.scale();
    let speed = |u: f64| loop_.derivative(u, 1).project().norm();

    let mut best = f64::INFINITY;
    let mut best_i = 0;
    let mut coarse: Vec<usize> = Vec::new();
    for (i, d) in grid.dproj.iter().enumerate() {
        let v = d.norm();
        if v < best {
            best = v;
            best_i = i;
        }
        if v < tau1 {
            coarse.push(i);
        }
    }
    let step = TAU / grid.m as f64;
    let (u_min, margin) = compass_min_1d(speed, grid.u[best_i], step, 70);

    let mut offenders: Vec<f64> = Vec::new();
    for i in coarse {
        let (u, v) = compass_min_1d(speed, grid.u[i], step, 70);
        if v < tau1 {
            let u = wrap_angle(u);
            if offenders.iter().all(|&o| circle_dist(o, u) > 2.0 * step) {
                offenders.push(u);
            }
        }
    }

    ImmersionCheck {
        margin: margin.min(best),
        worst: wrap_angle(u_min),
        offenders,
    }
}

/// Condition 2/3 data: locate all double points of the projection by a
/// torus grid scan followed by 2D Newton refinement.
pub fn find_double_points(
    loop_: &FourierLoop,
    config: &GenericityConfig,
) -> Result<Vec<DoublePoint>, DoublePointError> {
    let m = config.grid_for(loop_);
    let grid = LoopGrid::build(loop_, m);
    find_double_points_on(loop_, &grid, config)
}

pub(crate) fn find_double_points_on(
    loop_: &FourierLoop,
    grid: &LoopGrid,
    config: &GenericityConfig,
) -> Result<Vec<DoublePoint>, DoublePointError> {
    let m = grid.m;
    let step = TAU / m as f64;
    // F always vanishes on the diagonal; self-proximity there is the
    // embeddedness check's business.
    let band = 3usize;

    let fval = |u1: f64, u2: f64| -> Vec2 { loop_.eval(u1).project() - loop_.eval(u2).project() };
    // Gap below which a candidate cell is treated as holding a genuine
    // (possibly degenerate) root rather than a near-miss fold.
    let near_miss_tol = 1e4 * config.newton_tol * loop_.scale().max(1.0);

    let mut roots: Vec<(f64, f64)> = Vec::new();
    let add_root = |u1: f64, u2: f64, roots: &mut Vec<(f64, f64)>| {
        let (mut a, mut b) = (wrap_angle(u1), wrap_angle(u2));
        if a > b {
            std::mem::swap(&mut a, &mut b);
        }
        if circle_dist(a, b) < band as f64 * step {
            return; // collapsed into the diagonal band
        }
        let merge = step;
        for &(ra, rb) in roots.iter() {
            if circle_dist(ra, a) < merge && circle_dist(rb, b) < merge {
                return;
            }
        }
        roots.push((a, b));
    };

    let newton = |start: (f64, f64)| -> Option<(f64, f64)> {
        let (mut u1, mut u2) = start;
        for _ in 0..40 {
            let f = fval(u1, u2);
            if f.norm() < config.newton_tol {
                return Some((u1, u2));
            }
            let d1 = loop_.derivative(u1, 1).project();
            let d2 = loop_.derivative(u2, 1).project();
            let j = [[d1.x, -d2.x], [d1.y, -d2.y]];
            let delta = solve2(j, [f.x, f.y])?;
            let (mut s1, mut s2) = (delta[0], delta[1]);
            let norm = s1.hypot(s2);
            let cap = 2.0 * step;
            if norm > cap {
                s1 *= cap / norm;
                s2 *= cap / norm;
            }
            u1 -= s1;
            u2 -= s2;
            if !u1.is_finite() || !u2.is_finite() {
                return None;
            }
            if circle_dist(u1, start.0) > 6.0 * step || circle_dist(u2, start.1) > 6.0 * step {
                return None; // wandered off; some other cell owns this root
            }
        }
        None
    };

    for i in 0..m {
        for j in 0..m {
            let id = i.abs_diff(j);
            if id.min(m - id) <= band {
                continue;
            }
            // Candidate cells: both components of F change sign among the
            // four corners.
            let corners = [
                (i, j),
                ((i + 1) % m, j),
                (i, (j + 1) % m),
                ((i + 1) % m, (j + 1) % m),
            ];
            let mut fx_min = f64::INFINITY;
            let mut fx_max = f64::NEG_INFINITY;
            let mut fy_min = f64::INFINITY;
            let mut fy_max = f64::NEG_INFINITY;
            for (a, b) in corners {
                let fx = grid.proj[a].x - grid.proj[b].x;
                let fy = grid.proj[a].y - grid.proj[b].y;
                fx_min = fx_min.min(fx);
                fx_max = fx_max.max(fx);
                fy_min = fy_min.min(fy);
                fy_max = fy_max.max(fy);
            }
            if fx_min > 0.0 || fx_max < 0.0 || fy_min > 0.0 || fy_max < 0.0 {
                continue;
            }

            let center = (grid.u[i] + 0.5 * step, grid.u[j] + 0.5 * step);
            if let Some((u1, u2)) = newton(center) {
                add_root(u1, u2, &mut roots);
                continue;
            }
            // One subdivision retry from the four subcell centers.
            let mut found = false;
            for (di, dj) in [(0.25, 0.25), (0.75, 0.25), (0.25, 0.75), (0.75, 0.75)] {
                if let Some((u1, u2)) = newton((grid.u[i] + di * step, grid.u[j] + dj * step)) {
                    add_root(u1, u2, &mut roots);
                    found = true;
                    break;
                }
            }
            if found {
                continue;
            }
            // Newton failed everywhere. Decide between a near-miss fold
            // (the projection folds back without crossing: |F| has a
            // positive local minimum) and a genuinely stuck root, by
            // minimizing |F| outside the diagonal band.
            let objective = |a: f64, b: f64| -> f64 {
                if circle_dist(a, b) < band as f64 * step {
                    return f64::INFINITY;
                }
                let f = fval(a, b);
                f.x * f.x + f.y * f.y
            };
            let ((u1m, u2m), gap2) = compass_min_2d(objective, center, 0.6 * step, 70);
            if gap2.sqrt() > near_miss_tol {
                continue; // the strands come close but do not cross
            }
            if let Some((u1, u2)) = newton((u1m, u2m)) {
                add_root(u1, u2, &mut roots);
                continue;
            }
            let d1 = loop_.derivative(u1m, 1).project();
            let d2 = loop_.derivative(u2m, 1).project();
            let denom = (d1.norm() * d2.norm()).max(1e-300);
            let sin_angle = (d1.cross(d2) / denom).abs();
            if sin_angle < config.transversality_tol {
                // A crossing point the iteration cannot separate: a
                // tangential (condition-3 degenerate) double point.
                return Err(DoublePointError::Degenerate {
                    u1: u1m,
                    u2: u2m,
                    sin_angle,
                });
            }
            return Err(DoublePointError::NewtonDiverged {
                u1: center.0,
                u2: center.1,
            });
        }
    }

    let mut out: Vec<DoublePoint> = Vec::with_capacity(roots.len());
    for (u1, u2) in roots {
        let d1 = loop_.derivative(u1, 1).project();
        let d2 = loop_.derivative(u2, 1).project();
        let denom = d1.norm() * d2.norm();
        let sin_angle = if denom > 0.0 {
            (d1.cross(d2) / denom).abs()
        } else {
            0.0
        };
        if sin_angle < config.degenerate_tol {
            return Err(DoublePointError::Degenerate { u1, u2, sin_angle });
        }
        let p1 = loop_.eval(u1);
        let p2 = loop_.eval(u2);
        out.push(DoublePoint {
            u1,
            u2,
            pos: Point2::new(0.5 * (p1.x + p2.x), 0.5 * (p1.y + p2.y)),
            transversality_margin: sin_angle,
            z_gap: p1.z - p2.z,
        });
    }
    out.sort_by(|a, b| a.u1.total_cmp(&b.u1));
    Ok(out)
}

/// Condition 2: pairwise separation between distinct projected crossings.
pub fn check_no_triple(double_points: &[DoublePoint], tau2: f64) -> TripleCheck {
    let n = double_points.len();
    if n < 2 {
        return TripleCheck {
            margin: f64::INFINITY,
            clusters: Vec::new(),
        };
    }
    let mut margin = f64::INFINITY;
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        if parent[i] != i {
            let r = find(parent, parent[i]);
            parent[i] = r;
        }
        parent[i]
    }
    for i in 0..n {
        for j in i + 1..n {
            let d = double_points[i].pos.dist(double_points[j].pos);
            margin = margin.min(d);
            if d < tau2 {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri] = rj;
                }
            }
        }
    }
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    let mut roots: Vec<usize> = Vec::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        match roots.iter().position(|&x| x == r) {
            Some(k) => clusters[k].push(i),
            None => {
                roots.push(r);
                clusters.push(vec![i]);
            }
        }
    }
    clusters.retain(|c| c.len() > 1);
    TripleCheck { margin, clusters }
}

/// Run every check and aggregate margins, verdicts, and diagnostics.
pub fn validate(loop_: &FourierLoop, config: &GenericityConfig) -> GenericityReport {
    let scale = loop_.scale();
    let m = config.grid_for(loop_);
    let grid = LoopGrid::build(loop_, m);
    let mut diagnostics = Vec::new();

    let embed = check_embedded_on(loop_, &grid, config);
    let tau_embed = config.embed_tol_rel * scale;
    let verdict_embedded = if embed.margin > tau_embed {
        Verdict::Pass
    } else {
        diagnostics.push(format!(
            "NOT_EMBEDDED: separation margin {:.3e} at (u1,u2)=({:.6},{:.6})",
            embed.margin, embed.worst.0, embed.worst.1
        ));
        Verdict::Fail
    };

    let immersion = check_immersion_on(loop_, &grid, config);
    let tau1 = config.immersion_tol_rel * scale;
    let verdict_condition1 = if immersion.margin > tau1 {
        Verdict::Pass
    } else {
        diagnostics.push(format!(
            "condition 1 fails: |p∘f'| = {:.3e} at u = {:.6}",
            immersion.margin, immersion.worst
        ));
        Verdict::Fail
    };

    let mut triple_margin = None;
    let mut transversality_margin = None;
    let mut double_points = Vec::new();
    let (verdict_condition2, verdict_condition3) = if verdict_condition1 == Verdict::Pass
        && verdict_embedded == Verdict::Pass
    {
        match find_double_points_on(loop_, &grid, config) {
            Ok(dps) => {
                let tau2 = config.triple_tol_rel * scale;
                let triple = check_no_triple(&dps, tau2);
                let v2 = if triple.clusters.is_empty() {
                    Verdict::Pass
                } else {
                    diagnostics.push(format!(
                        "condition 2 fails: {} crossing cluster(s) within {:.3e}",
                        triple.clusters.len(),
                        tau2
                    ));
                    Verdict::Fail
                };
                let t_margin = dps
                    .iter()
                    .map(|d| d.transversality_margin)
                    .fold(f64::INFINITY, f64::min);
                let v3 = if t_margin > config.transversality_tol {
                    Verdict::Pass
                } else {
                    diagnostics.push(format!(
                        "condition 3 fails: |sin angle| margin {:.3e}",
                        t_margin
                    ));
                    Verdict::Fail
                };
                triple_margin = Some(triple.margin);
                transversality_margin = Some(t_margin);
                double_points = dps;
                (v2, v3)
            }
            Err(DoublePointError::Degenerate { u1, u2, sin_angle }) => {
                diagnostics.push(format!(
                    "condition 3 fails: degenerate crossing at ({u1:.6},{u2:.6}), |sin|={sin_angle:.3e}"
                ));
                (Verdict::Skipped, Verdict::Fail)
            }
            Err(e @ DoublePointError::NewtonDiverged { .. }) => {
                diagnostics.push(format!("double-point search failed: {e}"));
                (Verdict::Fail, Verdict::Skipped)
            }
        }
    } else {
        (Verdict::Skipped, Verdict::Skipped)
    };

    GenericityReport {
        scale,
        grid: m,
        embedded_margin: embed.margin,
        immersion_margin: immersion.margin,
        triple_margin,
        transversality_margin,
        double_points,
        verdict_embedded,
        verdict_condition1,
        verdict_condition2,
        verdict_condition3,
        diagnostics,
    }
}

/// Nudge a loop into general position with seeded coefficient noise.
///
/// Attempt 0 is the unperturbed loop, so already-generic inputs pass
/// through unchanged; afterwards the magnitude doubles per attempt.
pub fn perturb_to_generic(
    loop_: &FourierLoop,
    seed: u64,
    magnitude: f64,
    config: &GenericityConfig,
) -> Result<FourierLoop, PerturbError> {
    let embed = check_embedded(loop_, config);
    if embed.margin <= config.embed_tol_rel * loop_.scale() {
        return Err(PerturbError::NotEmbedded {
            u1: embed.worst.0,
            u2: embed.worst.1,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mag = magnitude;
    for attempt in 0..=8usize {
        let candidate = if attempt == 0 {
            loop_.clone()
        } else {
            let c = loop_.map_coefficients(|_, v| v + rng.gen_range(-mag..mag));
            mag *= 2.0;
            c
        };
        let report = validate(&candidate, config);
        if report.passed() {
            return Ok(candidate);
        }
    }
    Err(PerturbError::Failed {
        attempts: 8,
        last_magnitude: mag / 2.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::CoordSeries;

    pub(crate) fn circle() -> FourierLoop {
        FourierLoop::new(
            CoordSeries::zero(1).with(1, 1.0, 0.0),
            CoordSeries::zero(1).with(1, 0.0, 1.0),
            CoordSeries::zero(1),
        )
        .unwrap()
    }

    pub(crate) fn trefoil() -> FourierLoop {
        FourierLoop::new(
            CoordSeries::zero(3).with(1, 0.0, 1.0).with(2, 0.0, 2.0),
            CoordSeries::zero(3).with(1, 1.0, 0.0).with(2, -2.0, 0.0),
            CoordSeries::zero(3).with(3, 0.0, -1.0),
        )
        .unwrap()
    }

    /// Plane figure-eight curve (x = sin 2u, y = sin u, z = 0): a genuine
    /// 3D self-intersection at u = 0, π.
    fn flat_eight() -> FourierLoop {
        FourierLoop::new(
            CoordSeries::zero(2).with(2, 0.0, 1.0),
            CoordSeries::zero(2).with(1, 0.0, 1.0),
            CoordSeries::zero(2),
        )
        .unwrap()
    }

    /// Loop with a vertical tangent at u = 0 (projected derivative zero).
    pub(crate) fn vertical_tangent_loop() -> FourierLoop {
        FourierLoop::new(
            CoordSeries::zero(2).with(1, -1.0, 0.0),
            CoordSeries::zero(2).with(1, 0.0, -2.0).with(2, 0.0, 1.0),
            CoordSeries::zero(2).with(1, 0.0, 1.0),
        )
        .unwrap()
    }

    /// Trifolium with z = sin u: three crossings all projecting to the
    /// origin (a deliberate triple point).
    pub(crate) fn concurrent_triple_loop() -> FourierLoop {
        FourierLoop::new(
            CoordSeries::zero(2).with(1, 0.5, 0.0).with(2, 0.5, 0.0),
            CoordSeries::zero(2).with(1, 0.0, -0.5).with(2, 0.0, 0.5),
            CoordSeries::zero(2).with(1, 0.0, 1.0),
        )
        .unwrap()
    }

    #[test]
    fn circle_margins() {
        let cfg = GenericityConfig::default();
        let c = circle();
        let embed = check_embedded(&c, &cfg);
        assert!((embed.margin - 1.0).abs() < 1e-9, "margin {}", embed.margin);
        assert!(embed.offenders.is_empty());
        let imm = check_immersion(&c, &cfg);
        assert!((imm.margin - 1.0).abs() < 1e-9);
        assert!(imm.offenders.is_empty());
        let dps = find_double_points(&c, &cfg).unwrap();
        assert!(dps.is_empty());
        let report = validate(&c, &cfg);
        assert!(report.passed());
        assert_eq!(report.double_points.len(), 0);
    }

    #[test]
    fn trefoil_is_generic_with_three_crossings() {
        let cfg = GenericityConfig::default();
        let report = validate(&trefoil(), &cfg);
        assert!(report.passed(), "{report}");
        assert_eq!(report.double_points.len(), 3);
        for dp in &report.double_points {
            assert!(dp.transversality_margin > 0.1);
            assert!(dp.z_gap.abs() > 1e-3);
        }
    }

    #[test]
    fn flat_eight_is_not_embedded() {
        let cfg = GenericityConfig::default();
        let embed = check_embedded(&flat_eight(), &cfg);
        assert!(embed.margin < 1e-6);
        // Collision at (0, π), in either order and modulo the 2π seam.
        let (a, b) = embed.worst;
        let pi = std::f64::consts::PI;
        let matches = (circle_dist(a, 0.0) < 1e-3 && circle_dist(b, pi) < 1e-3)
            || (circle_dist(a, pi) < 1e-3 && circle_dist(b, 0.0) < 1e-3);
        assert!(matches, "worst pair ({a}, {b})");
        assert!(!embed.offenders.is_empty());
        let report = validate(&flat_eight(), &cfg);
        assert_eq!(report.verdict_embedded, Verdict::Fail);
        assert!(!report.passed());
    }

    #[test]
    fn vertical_tangent_fails_condition1() {
        let cfg = GenericityConfig::default();
        let l = vertical_tangent_loop();
        // p∘f'(0) = (sin 0, 2cos0 - 2cos0) = 0 by construction.
        assert!(l.derivative(0.0, 1).project().norm() < 1e-12);
        let imm = check_immersion(&l, &cfg);
        assert!(imm.margin < 1e-6);
        assert!(!imm.offenders.is_empty());
        assert!(imm.offenders.iter().any(|&u| circle_dist(u, 0.0) < 1e-3));
    }

    #[test]
    fn concurrent_triple_detected() {
        let cfg = GenericityConfig::default();
        let l = concurrent_triple_loop();
        let dps = find_double_points(&l, &cfg).unwrap();
        assert_eq!(dps.len(), 3);
        let triple = check_no_triple(&dps, cfg.triple_tol_rel * l.scale());
        assert_eq!(triple.clusters.len(), 1);
        assert_eq!(triple.clusters[0].len(), 3);
        assert!(triple.margin < 1e-6);
    }

    #[test]
    fn empty_double_points_pass_triple_check() {
        let t = check_no_triple(&[], 1e-3);
        assert!(t.margin.is_infinite());
        assert!(t.clusters.is_empty());
    }

    #[test]
    fn perturb_identity_on_generic_input() {
        let cfg = GenericityConfig::default();
        let t = trefoil();
        let out = perturb_to_generic(&t, 1, 1e-3, &cfg).unwrap();
        assert!(out.coefficient_distance(&t) == 0.0);
    }

    #[test]
    fn perturb_fixes_vertical_tangent() {
        let cfg = GenericityConfig::default();
        let l = vertical_tangent_loop();
        assert!(!validate(&l, &cfg).passed());
        let fixed = perturb_to_generic(&l, 7, 1e-2, &cfg).unwrap();
        let imm = check_immersion(&fixed, &cfg);
        assert!(imm.margin > cfg.immersion_tol_rel * fixed.scale());
        assert!(validate(&fixed, &cfg).passed());
    }

    #[test]
    fn perturb_separates_concurrent_triple() {
        let cfg = GenericityConfig::default();
        let l = concurrent_triple_loop();
        assert!(!validate(&l, &cfg).passed());
        let fixed = perturb_to_generic(&l, 11, 1e-2, &cfg).unwrap();
        let dps = find_double_points(&fixed, &cfg).unwrap();
        assert_eq!(dps.len(), 3);
        let triple = check_no_triple(&dps, cfg.triple_tol_rel * fixed.scale());
        assert!(triple.clusters.is_empty());
    }

    #[test]
    fn perturb_rejects_non_embedded_input() {
        let cfg = GenericityConfig::default();
        match perturb_to_generic(&flat_eight(), 3, 1e-3, &cfg) {
            Err(PerturbError::NotEmbedded { .. }) => {}
            other => panic!("expected NotEmbedded, got {other:?}"),
        }
    }

    #[test]
    fn verdicts_are_threshold_functions() {
        let cfg = GenericityConfig::default();
        let report = validate(&trefoil(), &cfg);
        assert!(report.passed());
        // Shrinking thresholds can only keep a pass passing.
        let tighter = GenericityConfig {
            embed_tol_rel: cfg.embed_tol_rel / 10.0,
            immersion_tol_rel: cfg.immersion_tol_rel / 10.0,
            triple_tol_rel: cfg.triple_tol_rel / 10.0,
            transversality_tol: cfg.transversality_tol / 10.0,
            ..cfg
        };
        assert!(validate(&trefoil(), &tighter).passed());
    }

    #[test]
    fn double_point_symmetry_and_order() {
        let cfg = GenericityConfig::default();
        let dps = find_double_points(&trefoil(), &cfg).unwrap();
        for dp in &dps {
            assert!(dp.u1 < dp.u2);
            // The projected positions of the two branches agree.
            let p1 = trefoil().eval(dp.u1).project();
            let p2 = trefoil().eval(dp.u2).project();
            assert!(p1.dist(p2) < 1e-7);
        }
        for w in dps.windows(2) {
            assert!(w[0].u1 <= w[1].u1);
        }
    }
}
