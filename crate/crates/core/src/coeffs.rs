//! Distance-diffusion coefficient pairs `(σ², b)` for the generator
//! `L = σ²(x) d²/dx² + b(x) d/dx` (no factor ½ on σ²).

use serde::{Deserialize, Serialize};

use crate::error::{domain, FlowError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Geometry {
    Sphere,
    Euclid,
}

/// Diffusion coefficient and drift of a one-dimensional diffusion on an
/// interval `(0, upper)`; `upper` may be `+∞`.
pub trait CoefficientPair: Send + Sync {
    fn sigma2(&self, x: f64) -> Result<f64>;

    fn drift(&self, x: f64) -> Result<f64>;

    /// Open state interval `(lower, upper)`.
    fn domain(&self) -> (f64, f64);

    /// Both coefficients at once; override when they share work.
    fn both(&self, x: f64) -> Result<(f64, f64)> {
        Ok((self.sigma2(x)?, self.drift(x)?))
    }

    fn check_interior(&self, x: f64) -> Result<()> {
        let (lo, hi) = self.domain();
        if x > lo && x < hi {
            Ok(())
        } else {
            domain(format!("{x} outside the open interval ({lo}, {hi})"))
        }
    }
}

impl<T: CoefficientPair + ?Sized> CoefficientPair for &T {
    fn sigma2(&self, x: f64) -> Result<f64> {
        (**self).sigma2(x)
    }
    fn drift(&self, x: f64) -> Result<f64> {
        (**self).drift(x)
    }
    fn domain(&self) -> (f64, f64) {
        (**self).domain()
    }
    fn both(&self, x: f64) -> Result<(f64, f64)> {
        (**self).both(x)
    }
}

impl<T: CoefficientPair + ?Sized> CoefficientPair for Box<T> {
    fn sigma2(&self, x: f64) -> Result<f64> {
        (**self).sigma2(x)
    }
    fn drift(&self, x: f64) -> Result<f64> {
        (**self).drift(x)
    }
    fn domain(&self) -> (f64, f64) {
        (**self).domain()
    }
    fn both(&self, x: f64) -> Result<(f64, f64)> {
        (**self).both(x)
    }
}

/// Coefficients given by two closures.
pub struct Synthetic<S, B> {
    sigma2: S,
    drift: B,
    upper: f64,
}

impl<S, B> Synthetic<S, B>
where
    S: Fn(f64) -> f64 + Send + Sync,
    B: Fn(f64) -> f64 + Send + Sync,
{
    pub fn new(sigma2: S, drift: B, upper: f64) -> Self {
        Self { sigma2, drift, upper }
    }
}

impl<S, B> CoefficientPair for Synthetic<S, B>
where
    S: Fn(f64) -> f64 + Send + Sync,
    B: Fn(f64) -> f64 + Send + Sync,
{
    fn sigma2(&self, x: f64) -> Result<f64> {
        self.check_interior(x)?;
        Ok((self.sigma2)(x))
    }
    fn drift(&self, x: f64) -> Result<f64> {
        self.check_interior(x)?;
        Ok((self.drift)(x))
    }
    fn domain(&self) -> (f64, f64) {
        (0.0, self.upper)
    }
}

/// `σ² = c·x^α`, `b = μ·c·x^{α−1}`: the exact small-distance law of every
/// isotropic Sobolev distance diffusion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLaw {
    pub c: f64,
    pub alpha: f64,
    pub mu: f64,
    pub upper: f64,
}

impl CoefficientPair for PowerLaw {
    fn sigma2(&self, x: f64) -> Result<f64> {
        self.check_interior(x)?;
        Ok(self.c * x.powf(self.alpha))
    }
    fn drift(&self, x: f64) -> Result<f64> {
        self.check_interior(x)?;
        Ok(self.mu * self.c * x.powf(self.alpha - 1.0))
    }
    fn domain(&self) -> (f64, f64) {
        (0.0, self.upper)
    }
}

/// Generator of `x = ψ²` when `ψ` has coefficients `inner`:
/// `σ̃²(x) = 4x σ²(√x)`, `b̃(x) = 2σ²(√x) + 2√x b(√x)`.
#[derive(Debug, Clone)]
pub struct Squared<C> {
    pub inner: C,
}

impl<C: CoefficientPair> Squared<C> {
    pub fn new(inner: C) -> Self {
        Self { inner }
    }
}

impl<C: CoefficientPair> CoefficientPair for Squared<C> {
    fn sigma2(&self, x: f64) -> Result<f64> {
        self.both(x).map(|p| p.0)
    }
    fn drift(&self, x: f64) -> Result<f64> {
        self.both(x).map(|p| p.1)
    }
    fn domain(&self) -> (f64, f64) {
        let (lo, hi) = self.inner.domain();
        (lo * lo, hi * hi)
    }
    fn both(&self, x: f64) -> Result<(f64, f64)> {
        if !(x > 0.0) {
            return domain(format!("squared process needs x > 0, got {x}"));
        }
        let r = x.sqrt();
        let (s2, b) = self.inner.both(r)?;
        Ok((4.0 * x * s2, 2.0 * s2 + 2.0 * r * b))
    }
}

/// Coordinate used to tabulate coefficients: `u = ln tan(x/2)` on `(0, π)`,
/// `u = ln x` on `(0, ∞)`. Both map power laws at 0 to straight lines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Chart {
    LogTanHalf,
    Log,
}

impl Chart {
    pub fn for_geometry(g: Geometry) -> Self {
        match g {
            Geometry::Sphere => Chart::LogTanHalf,
            Geometry::Euclid => Chart::Log,
        }
    }

    pub fn to_u(self, x: f64) -> f64 {
        match self {
            Chart::LogTanHalf => (0.5 * x).tan().ln(),
            Chart::Log => x.ln(),
        }
    }

    pub fn from_u(self, u: f64) -> f64 {
        match self {
            Chart::LogTanHalf => 2.0 * u.exp().atan(),
            Chart::Log => u.exp(),
        }
    }

    /// Length scale `ℓ(x)` with `b·ℓ/σ²` bounded at both ends.
    pub fn ell(self, x: f64) -> f64 {
        match self {
            Chart::LogTanHalf => x.sin(),
            Chart::Log => x,
        }
    }
}

/// Natural cubic spline on a strictly increasing grid, extended linearly
/// beyond its end points.
#[derive(Debug, Clone, PartialEq)]
pub struct Spline {
    x: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>, // second derivatives
}

impl Spline {
    pub fn natural(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        let n = x.len();
        if n < 3 || y.len() != n || x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(FlowError::InvalidParams("spline needs >= 3 strictly increasing nodes".into()));
        }
        // tridiagonal solve for interior second derivatives
        let mut m = vec![0.0; n];
        let mut c = vec![0.0; n];
        let mut r = vec![0.0; n];
        for i in 1..n - 1 {
            let h0 = x[i] - x[i - 1];
            let h1 = x[i + 1] - x[i];
            let diag = 2.0 * (h0 + h1);
            let rhs = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
            let denom = diag - h0 * c[i - 1];
            c[i] = h1 / denom;
            r[i] = (rhs - h0 * r[i - 1]) / denom;
        }
        for i in (1..n - 1).rev() {
            m[i] = r[i] - c[i] * m[i + 1];
        }
        Ok(Self { x, y, m })
    }

    fn slope_at(&self, i: usize, at_right: bool) -> f64 {
        let h = self.x[i + 1] - self.x[i];
        let dy = (self.y[i + 1] - self.y[i]) / h;
        if at_right {
            dy + h * (2.0 * self.m[i + 1] + self.m[i]) / 6.0
        } else {
            dy - h * (2.0 * self.m[i] + self.m[i + 1]) / 6.0
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let n = self.x.len();
        if t <= self.x[0] {
            return self.y[0] + self.slope_at(0, false) * (t - self.x[0]);
        }
        if t >= self.x[n - 1] {
            return self.y[n - 1] + self.slope_at(n - 2, true) * (t - self.x[n - 1]);
        }
        let i = match self.x.binary_search_by(|v| v.partial_cmp(&t).expect("finite nodes")) {
            Ok(i) => return self.y[i],
            Err(i) => i - 1,
        };
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        a * self.y[i]
            + b * self.y[i + 1]
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h * h / 6.0
    }
}

/// Spline interpolant of an expensive coefficient pair. Tabulates
/// `ln σ²` and `b·ℓ/σ²` against the chart coordinate, so the small-distance
/// power laws are reproduced by linear extrapolation below the grid.
#[derive(Debug, Clone)]
pub struct Tabulated {
    chart: Chart,
    upper: f64,
    log_s2: Spline,
    ratio: Spline,
}

impl Tabulated {
    /// Tabulates `src` at `n` points between `x_min` and `x_max`, uniform in
    /// the chart coordinate. Evaluation runs in parallel.
    pub fn build<C: CoefficientPair>(src: &C, chart: Chart, x_min: f64, x_max: f64, n: usize) -> Result<Self> {
        use rayon::prelude::*;
        if !(x_min > 0.0 && x_max > x_min) || n < 3 {
            return Err(FlowError::InvalidParams("bad tabulation range".into()));
        }
        let (u0, u1) = (chart.to_u(x_min), chart.to_u(x_max));
        let us: Vec<f64> = (0..n).map(|i| u0 + (u1 - u0) * i as f64 / (n - 1) as f64).collect();
        let vals: Vec<(f64, f64)> = us
            .par_iter()
            .map(|&u| {
                let x = chart.from_u(u);
                let (s2, b) = src.both(x)?;
                if !(s2 > 0.0) || !s2.is_finite() || !b.is_finite() {
                    return Err(FlowError::Domain(format!("degenerate coefficients at {x}: σ² = {s2}, b = {b}")));
                }
                Ok((s2.ln(), b * chart.ell(x) / s2))
            })
            .collect::<Result<_>>()?;
        let (ls, rt): (Vec<f64>, Vec<f64>) = vals.into_iter().unzip();
        Ok(Self {
            chart,
            upper: src.domain().1,
            log_s2: Spline::natural(us.clone(), ls)?,
            ratio: Spline::natural(us, rt)?,
        })
    }

    /// `b/σ²` at `x`.
    pub fn q(&self, x: f64) -> f64 {
        self.ratio.eval(self.chart.to_u(x)) / self.chart.ell(x)
    }
}

impl CoefficientPair for Tabulated {
    fn sigma2(&self, x: f64) -> Result<f64> {
        self.check_interior(x)?;
        Ok(self.log_s2.eval(self.chart.to_u(x)).exp())
    }
    fn drift(&self, x: f64) -> Result<f64> {
        self.both(x).map(|p| p.1)
    }
    fn domain(&self) -> (f64, f64) {
        (0.0, self.upper)
    }
    fn both(&self, x: f64) -> Result<(f64, f64)> {
        self.check_interior(x)?;
        let u = self.chart.to_u(x);
        let s2 = self.log_s2.eval(u).exp();
        Ok((s2, self.ratio.eval(u) * s2 / self.chart.ell(x)))
    }
}
