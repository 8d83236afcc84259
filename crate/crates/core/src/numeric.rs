//! Small numerical helpers: tiny dense solves and derivative-free local
//! minimization used to polish grid-scan minima.

/// Solve a 2x2 system. Returns None when the determinant is ~zero.
pub(crate) fn solve2(a: [[f64; 2]; 2], b: [f64; 2]) -> Option<[f64; 2]> {
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    if det.abs() < 1e-300 {
        return None;
    }
    Some([
        (b[0] * a[1][1] - b[1] * a[0][1]) / det,
        (a[0][0] * b[1] - a[1][0] * b[0]) / det,
    ])
}

/// Gaussian elimination with partial pivoting for n <= 4.
pub(crate) fn solve_small(a: &mut [[f64; 4]; 4], b: &mut [f64; 4], n: usize) -> Option<[f64; 4]> {
    for col in 0..n {
        let mut pivot = col;
        for row in col + 1..n {
            if a[row][col].abs() > a[pivot][col].abs() {
                pivot = row;
            }
        }
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let m = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= m * a[col][k];
            }
            b[row] -= m * b[col];
        }
    }
    let mut x = [0.0; 4];
    for col in (0..n).rev() {
        let mut acc = b[col];
        for k in col + 1..n {
            acc -= a[col][k] * x[k];
        }
        x[col] = acc / a[col][col];
    }
    Some(x)
}

/// Compass search in one variable: shrink the step whenever neither
/// neighbor improves. Robust for smooth V-shaped minima.
pub(crate) fn compass_min_1d(
    f: impl Fn(f64) -> f64,
    start: f64,
    mut step: f64,
    iters: usize,
) -> (f64, f64) {
    let mut x = start;
    let mut fx = f(x);
    for _ in 0..iters {
        let mut improved = false;
        for cand in [x + step, x - step] {
            let fc = f(cand);
            if fc < fx {
                x = cand;
                fx = fc;
                improved = true;
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (x, fx)
}

/// Compass search in two variables.
pub(crate) fn compass_min_2d(
    f: impl Fn(f64, f64) -> f64,
    start: (f64, f64),
    mut step: f64,
    iters: usize,
) -> ((f64, f64), f64) {
    let (mut x, mut y) = start;
    let mut fx = f(x, y);
    for _ in 0..iters {
        let mut improved = false;
        for (cx, cy) in [
            (x + step, y),
            (x - step, y),
            (x, y + step),
            (x, y - step),
            (x + step, y + step),
            (x - step, y - step),
            (x + step, y - step),
            (x - step, y + step),
        ] {
            let fc = f(cx, cy);
            if fc < fx {
                x = cx;
                y = cy;
                fx = fc;
                improved = true;
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    ((x, y), fx)
}

/// Compass search in three variables.
pub(crate) fn compass_min_3d(
    f: impl Fn(f64, f64, f64) -> f64,
    start: (f64, f64, f64),
    mut step: f64,
    iters: usize,
) -> ((f64, f64, f64), f64) {
    let (mut x, mut y, mut z) = start;
    let mut fx = f(x, y, z);
    for _ in 0..iters {
        let mut improved = false;
        for d in [
            (step, 0.0, 0.0),
            (-step, 0.0, 0.0),
            (0.0, step, 0.0),
            (0.0, -step, 0.0),
            (0.0, 0.0, step),
            (0.0, 0.0, -step),
        ] {
            let (cx, cy, cz) = (x + d.0, y + d.1, z + d.2);
            let fc = f(cx, cy, cz);
            if fc < fx {
                x = cx;
                y = cy;
                z = cz;
                fx = fc;
                improved = true;
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    ((x, y, z), fx)
}

/// Golden-section minimization of a unimodal function on [a, b].
pub(crate) fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = 0.618_033_988_749_894_9_f64;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve2_roundtrip() {
        let x = solve2([[2.0, 1.0], [1.0, 3.0]], [5.0, 10.0]).unwrap();
        assert!((2.0 * x[0] + x[1] - 5.0).abs() < 1e-12);
        assert!((x[0] + 3.0 * x[1] - 10.0).abs() < 1e-12);
    }

    #[test]
    fn solve_small_4x4() {
        let mut a = [
            [4.0, 1.0, 0.0, 2.0],
            [1.0, 3.0, 1.0, 0.0],
            [0.0, 1.0, 2.0, 1.0],
            [2.0, 0.0, 1.0, 5.0],
        ];
        let orig = a;
        let mut b = [1.0, 2.0, 3.0, 4.0];
        let x = solve_small(&mut a, &mut b, 4).unwrap();
        for row in 0..4 {
            let got: f64 = (0..4).map(|k| orig[row][k] * x[k]).sum();
            assert!((got - [1.0, 2.0, 3.0, 4.0][row]).abs() < 1e-10);
        }
    }

    #[test]
    fn compass_finds_quadratic_minimum() {
        let ((x, y), v) = compass_min_2d(
            |x, y| (x - 1.5).powi(2) + 2.0 * (y + 0.25).powi(2),
            (0.0, 0.0),
            0.5,
            80,
        );
        assert!((x - 1.5).abs() < 1e-9 && (y + 0.25).abs() < 1e-9 && v < 1e-17);
    }

    #[test]
    fn golden_finds_v_minimum() {
        let (x, v) = golden_min(|x| (x - 0.3).abs(), 0.0, 1.0, 1e-12);
        assert!((x - 0.3).abs() < 1e-10 && v < 1e-10);
    }
}
