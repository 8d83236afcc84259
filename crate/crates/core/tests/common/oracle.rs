//! Dense-grid double-point oracle, independent of the library's search.
//!
//! Pure sign tests on a fine torus grid find the roots: candidate cells
//! are clustered by flood fill, one root per cluster. Each cluster is
//! then polished by a derivative-free compass descent on |F|². No
//! analytic derivatives and no Newton steps anywhere, so agreement with
//! `find_double_points` is a genuine two-route check.

use knotter::curve::FourierLoop;
use std::f64::consts::TAU;

pub struct OracleRoot {
    pub u1: f64,
    pub u2: f64,
}

/// Cells of the M x M torus grid where both components of
/// F(u1,u2) = p∘f(u1) - p∘f(u2) change sign, clustered, one root each.
pub fn dense_grid_double_points(loop_: &FourierLoop, m: usize) -> Vec<OracleRoot> {
    let step = TAU / m as f64;
    let band = ((3.0 * TAU / 256.0) / step).ceil() as usize; // match the default exclusion width
    let px: Vec<f64> = (0..m)
        .map(|i| loop_.eval(step * i as f64).project().x)
        .collect();
    let py: Vec<f64> = (0..m)
        .map(|i| loop_.eval(step * i as f64).project().y)
        .collect();

    let sign_change_cell = |i: usize, j: usize| -> bool {
        let corners = [
            (i, j),
            ((i + 1) % m, j),
            (i, (j + 1) % m),
            ((i + 1) % m, (j + 1) % m),
        ];
        let mut fx = (f64::INFINITY, f64::NEG_INFINITY);
        let mut fy = (f64::INFINITY, f64::NEG_INFINITY);
        for (a, b) in corners {
            let vx = px[a] - px[b];
            let vy = py[a] - py[b];
            fx = (fx.0.min(vx), fx.1.max(vx));
            fy = (fy.0.min(vy), fy.1.max(vy));
        }
        fx.0 <= 0.0 && fx.1 >= 0.0 && fy.0 <= 0.0 && fy.1 >= 0.0
    };

    let in_band = |i: usize, j: usize| -> bool {
        let d = i.abs_diff(j);
        d.min(m - d) <= band
    };

    // Candidate cells in the u1 < u2 half (each root also appears
    // mirrored; keeping one half halves the flood fill).
    let mut candidate = vec![false; m * m];
    for i in 0..m {
        for j in 0..m {
            if i < j && !in_band(i, j) && sign_change_cell(i, j) {
                candidate[i * m + j] = true;
            }
        }
    }

    // Polish from every candidate cell. At this resolution a cell is
    // flagged only when both zero curves of F pass within it, so there
    // are few candidates; descending from each one and deduplicating
    // afterwards survives both split and fused cell blobs. Sign-change
    // blobs can also arise where the two zero curves run close without
    // crossing, so a descent only counts as a root when its residual is
    // genuinely zero.
    let accept = 1e-5 * loop_.scale().max(1.0);
    let mut roots: Vec<OracleRoot> = Vec::new();
    for cell in 0..m * m {
        if !candidate[cell] {
            continue;
        }
        let (ci, cj) = (cell / m, cell % m);
        let (u1, u2) = refine_compass(loop_, step * ci as f64, step * cj as f64, step);
        let p = loop_.eval(u1).project();
        let q = loop_.eval(u2).project();
        if (p.x - q.x).hypot(p.y - q.y) > accept {
            continue;
        }
        let (a, b) = if u1 <= u2 { (u1, u2) } else { (u2, u1) };
        let dup = roots
            .iter()
            .any(|r| circ(r.u1, a) < 1e-4 && circ(r.u2, b) < 1e-4);
        if !dup {
            roots.push(OracleRoot { u1: a, u2: b });
        }
    }
    roots
}

fn circ(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

/// Derivative-free local descent on |F|².
fn refine_compass(loop_: &FourierLoop, a0: f64, b0: f64, step: f64) -> (f64, f64) {
    let f2 = |u1: f64, u2: f64| -> f64 {
        let p = loop_.eval(u1).project();
        let q = loop_.eval(u2).project();
        (p.x - q.x).powi(2) + (p.y - q.y).powi(2)
    };
    let (mut a, mut b) = (a0 + 0.5 * step, b0 + 0.5 * step);
    let mut fv = f2(a, b);
    let mut h = step;
    for _ in 0..200 {
        let mut improved = false;
        for (da, db) in [
            (h, 0.0),
            (-h, 0.0),
            (0.0, h),
            (0.0, -h),
            (h, h),
            (-h, -h),
            (h, -h),
            (-h, h),
        ] {
            let cand = f2(a + da, b + db);
            if cand < fv {
                a += da;
                b += db;
                fv = cand;
                improved = true;
            }
        }
        if !improved {
            h *= 0.5;
        }
    }
    (a.rem_euclid(TAU), b.rem_euclid(TAU))
}
