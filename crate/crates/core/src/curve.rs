//! Smooth closed curves as truncated Fourier series, and time families of them.
//!
//! A [`FourierLoop`] is a map from the circle (parameter `u` in `[0, 2π)`)
//! into 3-space, one truncated Fourier series per coordinate. The
//! representation is closed under differentiation, so every derivative is
//! computed term by term — never by finite differences.
//!
//! An [`IsotopyFamily`] interpolates keyframe loops in time with a
//! per-coefficient cubic Hermite rule (Catmull-Rom tangents, one-sided
//! secants at the ends), which keeps coefficient paths C¹ and makes the
//! mixed partial ∂²f/∂u∂t available everywhere.

use crate::geom::{Point3, Vec3};
use thiserror::Error;

/// Default cap on the series degree. Desk-scale inputs stay well below it.
pub const DEFAULT_MAX_DEGREE: usize = 64;

#[derive(Debug, Error)]
pub enum CurveError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("degree must be between 1 and {max}, got {got}")]
    BadDegree { got: usize, max: usize },
    #[error("coefficient count does not match the declared degree")]
    LengthMismatch,
    #[error("time {t} outside [0, 1]")]
    TimeOutOfRange { t: f64 },
    #[error("keyframes must run from t=0 to t=1 with strictly increasing times")]
    BadKeyframes,
    #[error("all keyframes must share one degree")]
    MixedDegrees,
}

/// One coordinate of a loop: `c0 + Σ_k a_k cos(ku) + b_k sin(ku)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoordSeries {
    pub constant: f64,
    /// Cosine coefficients, index 0 is harmonic k = 1.
    pub cos: Vec<f64>,
    /// Sine coefficients, index 0 is harmonic k = 1.
    pub sin: Vec<f64>,
}

impl CoordSeries {
    pub fn zero(degree: usize) -> Self {
        Self {
            constant: 0.0,
            cos: vec![0.0; degree],
            sin: vec![0.0; degree],
        }
    }

    /// Set harmonic `k` (1-based) to `a cos(ku) + b sin(ku)`.
    pub fn with(mut self, k: usize, a: f64, b: f64) -> Self {
        self.cos[k - 1] = a;
        self.sin[k - 1] = b;
        self
    }

    pub fn with_constant(mut self, c: f64) -> Self {
        self.constant = c;
        self
    }

    fn degree(&self) -> usize {
        self.cos.len()
    }

    /// Evaluate the `order`-th derivative given precomputed `cos(ku)`,
    /// `sin(ku)` tables (index k, starting at k = 1 in slot 1).
    fn eval_deriv(&self, order: u32, cos_k: &[f64], sin_k: &[f64]) -> f64 {
        if order == 0 {
            let mut acc = self.constant;
            for k in 1..=self.degree() {
                acc += self.cos[k - 1] * cos_k[k] + self.sin[k - 1] * sin_k[k];
            }
            return acc;
        }
        // d/du (a cos ku + b sin ku) = (kb) cos ku + (-ka) sin ku,
        // i.e. (a, b) -> k (b, -a); applied `order` times.
        let mut acc = 0.0;
        for k in 1..=self.degree() {
            let (mut a, mut b) = (self.cos[k - 1], self.sin[k - 1]);
            let kf = k as f64;
            for _ in 0..order {
                let (na, nb) = (kf * b, -kf * a);
                a = na;
                b = nb;
            }
            acc += a * cos_k[k] + b * sin_k[k];
        }
        acc
    }
}

/// Harmonic tables cos(ku), sin(ku) for k = 0..=n via angle addition.
fn harmonics(u: f64, n: usize, cos_k: &mut [f64], sin_k: &mut [f64]) {
    let (s1, c1) = u.sin_cos();
    cos_k[0] = 1.0;
    sin_k[0] = 0.0;
    for k in 1..=n {
        cos_k[k] = cos_k[k - 1] * c1 - sin_k[k - 1] * s1;
        sin_k[k] = sin_k[k - 1] * c1 + cos_k[k - 1] * s1;
    }
}

/// A smooth closed curve in R³ as one truncated Fourier series per coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierLoop {
    x: CoordSeries,
    y: CoordSeries,
    z: CoordSeries,
}

impl FourierLoop {
    pub fn new(x: CoordSeries, y: CoordSeries, z: CoordSeries) -> Result<Self, CurveError> {
        Self::with_max_degree(x, y, z, DEFAULT_MAX_DEGREE)
    }

    pub fn with_max_degree(
        x: CoordSeries,
        y: CoordSeries,
        z: CoordSeries,
        max_degree: usize,
    ) -> Result<Self, CurveError> {
        let n = x.degree();
        if n == 0 || n > max_degree {
            return Err(CurveError::BadDegree {
                got: n,
                max: max_degree,
            });
        }
        if y.degree() != n || z.degree() != n {
            return Err(CurveError::LengthMismatch);
        }
        if x.cos.len() != x.sin.len() || y.cos.len() != y.sin.len() || z.cos.len() != z.sin.len() {
            return Err(CurveError::LengthMismatch);
        }
        Ok(Self { x, y, z })
    }

    pub fn degree(&self) -> usize {
        self.x.degree()
    }

    pub fn coord(&self, axis: usize) -> &CoordSeries {
        match axis {
            0 => &self.x,
            1 => &self.y,
            _ => &self.z,
        }
    }

    /// Largest coefficient magnitude over all coordinates and harmonics.
    /// Serves as the curve's length scale for relative tolerances.
    pub fn scale(&self) -> f64 {
        let mut m: f64 = 0.0;
        for s in [&self.x, &self.y, &self.z] {
            m = m.max(s.constant.abs());
            for v in s.cos.iter().chain(s.sin.iter()) {
                m = m.max(v.abs());
            }
        }
        m
    }

    pub fn eval(&self, u: f64) -> Point3 {
        let n = self.degree();
        let mut c = [0.0; DEFAULT_MAX_DEGREE + 1];
        let mut s = [0.0; DEFAULT_MAX_DEGREE + 1];
        harmonics(u, n, &mut c, &mut s);
        Point3::new(
            self.x.eval_deriv(0, &c, &s),
            self.y.eval_deriv(0, &c, &s),
            self.z.eval_deriv(0, &c, &s),
        )
    }

    /// Analytic derivative of the given order (≥ 1) with respect to `u`.
    pub fn derivative(&self, u: f64, order: u32) -> Vec3 {
        assert!(order >= 1, "derivative order must be at least 1");
        let n = self.degree();
        let mut c = [0.0; DEFAULT_MAX_DEGREE + 1];
        let mut s = [0.0; DEFAULT_MAX_DEGREE + 1];
        harmonics(u, n, &mut c, &mut s);
        Vec3::new(
            self.x.eval_deriv(order, &c, &s),
            self.y.eval_deriv(order, &c, &s),
            self.z.eval_deriv(order, &c, &s),
        )
    }

    /// Evaluate as a vector; used for series that represent velocities.
    pub fn eval_vec(&self, u: f64) -> Vec3 {
        let p = self.eval(u);
        Vec3::new(p.x, p.y, p.z)
    }

    /// Map every coefficient (constants included) through `f`.
    /// Index layout matches [`FourierLoop::coefficient_count`].
    pub fn map_coefficients(&self, mut f: impl FnMut(usize, f64) -> f64) -> FourierLoop {
        let mut out = self.clone();
        let mut idx = 0;
        for series in [&mut out.x, &mut out.y, &mut out.z] {
            series.constant = f(idx, series.constant);
            idx += 1;
            for v in series.cos.iter_mut().chain(series.sin.iter_mut()) {
                *v = f(idx, *v);
                idx += 1;
            }
        }
        out
    }

    pub fn coefficient_count(&self) -> usize {
        3 * (1 + 2 * self.degree())
    }

    /// Maximum coefficient-wise distance to another loop of equal degree.
    pub fn coefficient_distance(&self, other: &FourierLoop) -> f64 {
        let mut d: f64 = 0.0;
        for (a, b) in [
            (&self.x, &other.x),
            (&self.y, &other.y),
            (&self.z, &other.z),
        ] {
            d = d.max((a.constant - b.constant).abs());
            for (u, v) in a
                .cos
                .iter()
                .chain(a.sin.iter())
                .zip(b.cos.iter().chain(b.sin.iter()))
            {
                d = d.max((u - v).abs());
            }
        }
        d
    }
}

/// All partial derivatives of a family needed for event classification.
#[derive(Debug, Clone, Copy)]
pub struct FamilyJet {
    pub f: Point3,
    pub f_u: Vec3,
    pub f_t: Vec3,
    pub f_uu: Vec3,
    pub f_ut: Vec3,
    pub f_uuu: Vec3,
}

/// A time-parametrized family of loops given by keyframes on [0, 1].
///
/// Coefficients follow piecewise-cubic Hermite paths with Catmull-Rom
/// tangents at interior knots and one-sided secant tangents at the ends,
/// so a two-keyframe family interpolates linearly.
#[derive(Debug, Clone)]
pub struct IsotopyFamily {
    times: Vec<f64>,
    loops: Vec<FourierLoop>,
}

impl IsotopyFamily {
    pub fn new(keyframes: Vec<(f64, FourierLoop)>) -> Result<Self, CurveError> {
        if keyframes.len() < 2 {
            return Err(CurveError::BadKeyframes);
        }
        let times: Vec<f64> = keyframes.iter().map(|(t, _)| *t).collect();
        if times[0] != 0.0 || *times.last().unwrap() != 1.0 {
            return Err(CurveError::BadKeyframes);
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(CurveError::BadKeyframes);
        }
        let loops: Vec<FourierLoop> = keyframes.into_iter().map(|(_, l)| l).collect();
        let degree = loops[0].degree();
        if loops.iter().any(|l| l.degree() != degree) {
            return Err(CurveError::MixedDegrees);
        }
        Ok(Self { times, loops })
    }

    pub fn degree(&self) -> usize {
        self.loops[0].degree()
    }

    pub fn keyframe_times(&self) -> &[f64] {
        &self.times
    }

    pub fn keyframe(&self, j: usize) -> &FourierLoop {
        &self.loops[j]
    }

    /// Largest keyframe coefficient magnitude.
    pub fn scale(&self) -> f64 {
        self.loops.iter().map(|l| l.scale()).fold(0.0, f64::max)
    }

    fn check_time(&self, t: f64) -> Result<(), CurveError> {
        if !(0.0..=1.0).contains(&t) || t.is_nan() {
            return Err(CurveError::TimeOutOfRange { t });
        }
        Ok(())
    }

    /// Catmull-Rom tangent of coefficient index `idx` at knot `j`.
    fn knot_tangent(&self, idx: usize, j: usize) -> f64 {
        let c = |j: usize| self.coefficient(idx, j);
        let last = self.times.len() - 1;
        if j == 0 {
            (c(1) - c(0)) / (self.times[1] - self.times[0])
        } else if j == last {
            (c(last) - c(last - 1)) / (self.times[last] - self.times[last - 1])
        } else {
            (c(j + 1) - c(j - 1)) / (self.times[j + 1] - self.times[j - 1])
        }
    }

    fn coefficient(&self, idx: usize, j: usize) -> f64 {
        let per = 1 + 2 * self.degree();
        let (axis, within) = (idx / per, idx % per);
        let series = self.loops[j].coord(axis);
        if within == 0 {
            series.constant
        } else if within <= self.degree() {
            series.cos[within - 1]
        } else {
            series.sin[within - self.degree() - 1]
        }
    }

    fn segment_index(&self, t: f64) -> usize {
        // Last knot maps into the final segment so t = 1 stays in range.
        match self.times.windows(2).position(|w| t >= w[0] && t <= w[1]) {
            Some(j) => j,
            None => self.times.len() - 2,
        }
    }

    /// Interpolated loop and its coefficient velocity (d/dt) at time `t`.
    pub fn at_with_velocity(&self, t: f64) -> Result<(FourierLoop, FourierLoop), CurveError> {
        self.check_time(t)?;
        let j = self.segment_index(t);
        let (t0, t1) = (self.times[j], self.times[j + 1]);
        let h = t1 - t0;
        let s = (t - t0) / h;
        // Hermite basis and its derivative in s.
        let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
        let h10 = s * (1.0 - s) * (1.0 - s);
        let h01 = s * s * (3.0 - 2.0 * s);
        let h11 = s * s * (s - 1.0);
        let d00 = 6.0 * s * (s - 1.0);
        let d10 = (1.0 - s) * (1.0 - 3.0 * s);
        let d01 = 6.0 * s * (1.0 - s);
        let d11 = s * (3.0 * s - 2.0);

        let value = self.loops[j].map_coefficients(|idx, c0| {
            let c1 = self.coefficient(idx, j + 1);
            let m0 = self.knot_tangent(idx, j);
            let m1 = self.knot_tangent(idx, j + 1);
            h00 * c0 + h10 * h * m0 + h01 * c1 + h11 * h * m1
        });
        let velocity = self.loops[j].map_coefficients(|idx, c0| {
            let c1 = self.coefficient(idx, j + 1);
            let m0 = self.knot_tangent(idx, j);
            let m1 = self.knot_tangent(idx, j + 1);
            (d00 * c0 + d10 * h * m0 + d01 * c1 + d11 * h * m1) / h
        });
        Ok((value, velocity))
    }

    /// The loop at time `t`.
    pub fn at(&self, t: f64) -> Result<FourierLoop, CurveError> {
        Ok(self.at_with_velocity(t)?.0)
    }

    /// Value and the u/t partials used by the event classifiers.
    pub fn partials(&self, u: f64, t: f64) -> Result<FamilyJet, CurveError> {
        let (value, velocity) = self.at_with_velocity(t)?;
        Ok(FamilyJet {
            f: value.eval(u),
            f_u: value.derivative(u, 1),
            f_t: velocity.eval_vec(u),
            f_uu: value.derivative(u, 2),
            f_ut: velocity.derivative(u, 1),
            f_uuu: value.derivative(u, 3),
        })
    }
}

// ---------------------------------------------------------------------------
// Text formats
// ---------------------------------------------------------------------------

/// Parse a loop spec:
///
/// ```text
/// degree N
/// x: c0 a1 b1 ... aN bN
/// y: ...
/// z: ...
/// ```
///
/// Blank lines and `#` comments are ignored.
pub fn parse_loop(text: &str) -> Result<FourierLoop, CurveError> {
    let mut lines = numbered_lines(text);
    let loop_ = parse_loop_body(&mut lines)?;
    if let Some((line, rest)) = lines.next() {
        return Err(CurveError::Parse {
            line,
            msg: format!("unexpected trailing content: {rest:?}"),
        });
    }
    Ok(loop_)
}

/// Parse an isotopy spec: repeated `keyframe t=<float>` headers, each
/// followed by a loop spec.
pub fn parse_isotopy(text: &str) -> Result<IsotopyFamily, CurveError> {
    let mut lines = numbered_lines(text);
    let mut keyframes = Vec::new();
    loop {
        match lines.next() {
            None => break,
            Some((line, raw)) => {
                let t = parse_keyframe_header(line, &raw)?;
                let loop_ = parse_loop_body(&mut lines)?;
                keyframes.push((t, loop_));
            }
        }
    }
    if keyframes.is_empty() {
        return Err(CurveError::Parse {
            line: 1,
            msg: "no keyframes found".into(),
        });
    }
    IsotopyFamily::new(keyframes)
}

fn parse_keyframe_header(line: usize, raw: &str) -> Result<f64, CurveError> {
    let rest = raw
        .strip_prefix("keyframe")
        .ok_or_else(|| CurveError::Parse {
            line,
            msg: format!("expected `keyframe t=<float>`, got {raw:?}"),
        })?
        .trim();
    let value = rest.strip_prefix("t=").ok_or_else(|| CurveError::Parse {
        line,
        msg: format!("expected `t=<float>` after keyframe, got {rest:?}"),
    })?;
    value.trim().parse::<f64>().map_err(|_| CurveError::Parse {
        line,
        msg: format!("bad keyframe time {value:?}"),
    })
}

fn numbered_lines(text: &str) -> impl Iterator<Item = (usize, String)> + '_ {
    text.lines().enumerate().filter_map(|(i, l)| {
        let stripped = l.split('#').next().unwrap_or("").trim();
        if stripped.is_empty() {
            None
        } else {
            Some((i + 1, stripped.to_string()))
        }
    })
}

fn parse_loop_body(
    lines: &mut impl Iterator<Item = (usize, String)>,
) -> Result<FourierLoop, CurveError> {
    let (line, header) = lines.next().ok_or(CurveError::Parse {
        line: 0,
        msg: "missing `degree N` line".into(),
    })?;
    let degree: usize = header
        .strip_prefix("degree")
        .map(str::trim)
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| CurveError::Parse {
            line,
            msg: format!("expected `degree N`, got {header:?}"),
        })?;

    let mut series = Vec::with_capacity(3);
    for want in ["x", "y", "z"] {
        let (line, raw) = lines.next().ok_or(CurveError::Parse {
            line: line + 1,
            msg: format!("missing `{want}:` coefficient line"),
        })?;
        let rest = raw
            .strip_prefix(want)
            .and_then(|r| r.trim_start().strip_prefix(':'))
            .ok_or_else(|| CurveError::Parse {
                line,
                msg: format!("expected `{want}: ...`, got {raw:?}"),
            })?;
        let values: Result<Vec<f64>, _> = rest.split_whitespace().map(str::parse).collect();
        let values = values.map_err(|e| CurveError::Parse {
            line,
            msg: format!("bad float: {e}"),
        })?;
        if values.len() != 1 + 2 * degree {
            return Err(CurveError::Parse {
                line,
                msg: format!(
                    "expected {} coefficients for degree {degree}, got {}",
                    1 + 2 * degree,
                    values.len()
                ),
            });
        }
        let mut s = CoordSeries::zero(degree).with_constant(values[0]);
        for k in 1..=degree {
            s = s.with(k, values[2 * k - 1], values[2 * k]);
        }
        series.push(s);
    }
    let z = series.pop().unwrap();
    let y = series.pop().unwrap();
    let x = series.pop().unwrap();
    FourierLoop::new(x, y, z)
}

impl std::fmt::Display for FourierLoop {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "degree {}", self.degree())?;
        for (name, s) in [("x", &self.x), ("y", &self.y), ("z", &self.z)] {
            write!(f, "{name}: {}", fmt_float(s.constant))?;
            for k in 0..self.degree() {
                write!(f, " {} {}", fmt_float(s.cos[k]), fmt_float(s.sin[k]))?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

impl std::fmt::Display for IsotopyFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for (t, l) in self.times.iter().zip(self.loops.iter()) {
            writeln!(f, "keyframe t={}", fmt_float(*t))?;
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

fn fmt_float(v: f64) -> String {
    // Shortest round-trip representation keeps files diffable.
    format!("{v}")
}
