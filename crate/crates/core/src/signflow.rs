//! One-dimensional flow driven by the single vector field `sgn(x)`:
//! `dX = sgn(X) dW`, `C(x, y) = sgn(x)sgn(y)`, `sgn(0) = 1`.
//!
//! Away from the origin the flow is the translation `x + sgn(x)W_t`; once
//! the origin is reached the particle splits into two half-weight copies.
//! With `L_t = sup_{s≤t}{−(|x| + W_s)} ∨ 0` and `R_t = sgn(x)(|x| + W_t + L_t)`,
//! `S_t f(x) = f(R_t)` if `L_t = 0` and `½[f(R_t) + f(−R_t)]` otherwise.
//!
//! The Wiener chaos of `S_t f` is computed from
//! `S^{n+1}_t f = P_t f + ∫_0^t S^n_s(D P_{t−s} f) dW_s`, `D g = sgn·g′`,
//! with the Itô left-point sum on the path grid.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{domain, FlowError, Result};
use crate::specfun::{integrate_1d, QuadratureSpec};
use crate::stats::{mean_se, Z99_ONE_SIDED};
use crate::stream::path_rng;

/// Largest chaos order accepted by the recursion.
pub const MAX_ORDER: usize = 8;
/// Largest order accepted by the direct iterated sum.
pub const MAX_DIRECT_ORDER: usize = 3;
/// Mass fraction outside the grid above which a heat evaluation is flagged.
pub const LEAKAGE_TOL: f64 = 1e-6;

/// Periodic uniform grid `x_i = −X + i·h`, `h = 2X/n`; `x_{n/2} = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub x_max: f64,
    pub n: usize,
}

impl Grid {
    pub fn new(x_max: f64, n: usize) -> Result<Self> {
        if !(x_max > 0.0 && x_max.is_finite()) || n < 4 || !n.is_multiple_of(2) {
            return Err(FlowError::InvalidParams("grid needs X > 0 and an even n >= 4".into()));
        }
        Ok(Self { x_max, n })
    }

    pub fn h(&self) -> f64 {
        2.0 * self.x_max / self.n as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        -self.x_max + i as f64 * self.h()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }

    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        (0..self.n).map(|i| f(self.x(i))).collect()
    }

    /// Grid L² norm `(h Σ u²)^{1/2}`.
    pub fn l2(&self, u: &[f64]) -> f64 {
        (self.h() * u.iter().map(|v| v * v).sum::<f64>()).sqrt()
    }
}

/// Brownian increments on a uniform time grid, with optional exact
/// Brownian-bridge minima between grid points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoisePath {
    pub dt: f64,
    pub increments: Vec<f64>,
    /// `W(t_j)`, `W(0) = 0`.
    pub w: Vec<f64>,
    /// Minimum of the bridge on `[t_j, t_{j+1}]`, when sampled.
    pub bridge_min: Option<Vec<f64>>,
    prefix_min: Vec<f64>,
}

impl NoisePath {
    pub fn from_increments(dt: f64, increments: Vec<f64>, bridge_min: Option<Vec<f64>>) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(FlowError::InvalidParams("dt must be positive".into()));
        }
        if bridge_min.as_ref().is_some_and(|m| m.len() != increments.len()) {
            return Err(FlowError::InvalidParams("one bridge minimum per step".into()));
        }
        let mut w = Vec::with_capacity(increments.len() + 1);
        w.push(0.0);
        for (j, dw) in increments.iter().enumerate() {
            w.push(w[j] + dw);
        }
        let mut prefix_min = Vec::with_capacity(w.len());
        prefix_min.push(0.0f64);
        for j in 0..increments.len() {
            let m = match &bridge_min {
                Some(b) => b[j],
                None => w[j + 1],
            };
            prefix_min.push(prefix_min[j].min(m));
        }
        Ok(Self { dt, increments, w, bridge_min, prefix_min })
    }

    /// `n_steps` increments of variance `dt`; with `bridge` the minimum of
    /// each bridge is drawn from its exact law
    /// `(a + b − √((b − a)² − 2 dt ln U))/2`.
    pub fn sample<R: Rng>(dt: f64, n_steps: usize, bridge: bool, rng: &mut R) -> Result<Self> {
        let sd = dt.sqrt();
        let mut inc = Vec::with_capacity(n_steps);
        let mut mins = bridge.then(|| Vec::with_capacity(n_steps));
        let mut w = 0.0;
        for _ in 0..n_steps {
            let z: f64 = rng.sample(StandardNormal);
            let dw = sd * z;
            if let Some(m) = mins.as_mut() {
                let u: f64 = 1.0 - rng.random::<f64>();
                let disc = (dw * dw - 2.0 * dt * u.ln()).sqrt();
                m.push((w + w + dw - disc) / 2.0);
            }
            inc.push(dw);
            w += dw;
        }
        Self::from_increments(dt, inc, mins)
    }

    pub fn n_steps(&self) -> usize {
        self.increments.len()
    }

    /// `min_{s ≤ t_j} W_s` (continuous when bridge minima are present).
    pub fn running_min(&self, j: usize) -> f64 {
        self.prefix_min[j]
    }

    /// Step index of `t`, which must lie on the grid.
    pub fn index_of(&self, t: f64) -> Result<usize> {
        let j = (t / self.dt).round();
        if !(t >= 0.0) || (j * self.dt - t).abs() > 1e-9 * t.max(1.0) || j as usize > self.n_steps() {
            return domain(format!("t = {t} is not on the path grid"));
        }
        Ok(j as usize)
    }

    /// The same Brownian path seen on a grid `factor` times coarser; bridge
    /// minima coarsen exactly, so the continuous path is unchanged.
    pub fn coarsen(&self, factor: usize) -> Result<Self> {
        if factor == 0 || !self.n_steps().is_multiple_of(factor) {
            return Err(FlowError::InvalidParams(format!("{factor} does not divide the step count")));
        }
        let inc = self.increments.chunks(factor).map(|c| c.iter().sum()).collect();
        let mins = self
            .bridge_min
            .as_ref()
            .map(|m| m.chunks(factor).map(|c| c.iter().copied().fold(f64::INFINITY, f64::min)).collect());
        Self::from_increments(self.dt * factor as f64, inc, mins)
    }

    /// The shifted path `θ_{t_j}W = W_{t_j + ·} − W_{t_j}`.
    pub fn shifted(&self, j: usize) -> Result<Self> {
        let base = self.w[j];
        let mins = self.bridge_min.as_ref().map(|m| m[j..].iter().map(|v| v - base).collect());
        Self::from_increments(self.dt, self.increments[j..].to_vec(), mins)
    }
}

fn sgn(x: f64) -> f64 {
    if x >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// `S_t f(x)` on the given path. At `x = 0` the local time is positive for
/// every `t > 0`.
pub fn exact_solution(f: impl Fn(f64) -> f64, x: f64, path: &NoisePath, t: f64) -> Result<f64> {
    let j = path.index_of(t)?;
    Ok(exact_at(&f, x, path, j))
}

fn exact_at(f: &impl Fn(f64) -> f64, x: f64, path: &NoisePath, j: usize) -> f64 {
    if j == 0 {
        return f(x);
    }
    let ax = x.abs();
    let l = (-ax - path.running_min(j)).max(0.0);
    let r = sgn(x) * (ax + path.w[j] + l);
    if l > 0.0 || x == 0.0 {
        0.5 * (f(r) + f(-r))
    } else {
        f(r)
    }
}

/// `S_t f` at every grid point.
pub fn exact_on_grid(f: impl Fn(f64) -> f64, grid: &Grid, path: &NoisePath, t: f64) -> Result<Vec<f64>> {
    let j = path.index_of(t)?;
    Ok((0..grid.n).map(|i| exact_at(&f, grid.x(i), path, j)).collect())
}

/// `P_t f(x)` for `f(y) = exp(−(y − c)²/s²)`.
pub fn gaussian_heat(x: f64, t: f64, centre: f64, scale: f64) -> f64 {
    let v = scale * scale + 2.0 * t;
    scale / v.sqrt() * (-(x - centre).powi(2) / v).exp()
}

/// `P_t g(x) = E g(x + √t Z)` by quadrature.
pub fn heat_quadrature(g: impl Fn(f64) -> f64, x: f64, t: f64) -> Result<f64> {
    let sd = t.sqrt();
    let norm = 1.0 / (2.0 * PI).sqrt();
    let spec = QuadratureSpec::with_tol(1e-14, 1e-12);
    let h = |z: f64| norm * (-z * z / 2.0).exp() * (g(x + sd * z) + g(x - sd * z));
    integrate_1d(h, 0.0, f64::INFINITY, &spec)?.require()
}

/// FFT plans and wave numbers for a grid.
struct Spectral {
    n: usize,
    xi: Vec<f64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl Spectral {
    fn new(n: usize, period: f64) -> Self {
        let mut planner = FftPlanner::new();
        let xi = (0..n)
            .map(|k| {
                let k = if k < n / 2 {
                    k as f64
                } else if k == n / 2 {
                    0.0
                } else {
                    k as f64 - n as f64
                };
                2.0 * PI * k / period
            })
            .collect();
        Self { n, xi, fwd: planner.plan_fft_forward(n), inv: planner.plan_fft_inverse(n) }
    }

    fn forward(&self, u: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = u.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.fwd.process(&mut buf);
        buf
    }

    fn inverse(&self, mut buf: Vec<Complex64>) -> Vec<f64> {
        self.inv.process(&mut buf);
        let s = 1.0 / self.n as f64;
        buf.iter().map(|c| c.re * s).collect()
    }

    fn heat_factor(&self, t: f64) -> Vec<f64> {
        self.xi.iter().map(|x| (-x * x * t / 2.0).exp()).collect()
    }

    fn heat(&self, u: &[Complex64], t: f64) -> Vec<Complex64> {
        u.iter().zip(&self.xi).map(|(c, x)| c * (-x * x * t / 2.0).exp()).collect()
    }

    fn derivative(&self, u: &[Complex64]) -> Vec<Complex64> {
        u.iter().zip(&self.xi).map(|(c, x)| c * Complex64::new(0.0, *x)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatResult {
    pub values: Vec<f64>,
    /// Mass of `|P_t f|` outside the grid relative to the mass of `|f|`.
    pub leakage: f64,
    pub leaked: bool,
}

/// Gaussian convolution with kernel variance `t`, zero-padded to twice the
/// grid so nothing wraps around.
pub fn heat_semigroup(f: &[f64], t: f64, grid: &Grid) -> Result<HeatResult> {
    if f.len() != grid.n {
        return domain(format!("{} values on a grid of {}", f.len(), grid.n));
    }
    if !(t >= 0.0) {
        return domain("heat semigroup needs t >= 0");
    }
    let n = grid.n;
    let sp = Spectral::new(2 * n, 4.0 * grid.x_max);
    let mut padded = vec![0.0; 2 * n];
    padded[n / 2..n / 2 + n].copy_from_slice(f);
    let out = sp.inverse(sp.heat(&sp.forward(&padded), t));
    let inside: f64 = out[n / 2..n / 2 + n].iter().map(|v| v.abs()).sum();
    let total_in: f64 = f.iter().map(|v| v.abs()).sum();
    let outside = out.iter().map(|v| v.abs()).sum::<f64>() - inside;
    let leakage = if total_in > 0.0 { outside / total_in } else { 0.0 };
    Ok(HeatResult { values: out[n / 2..n / 2 + n].to_vec(), leakage, leaked: leakage > LEAKAGE_TOL })
}

/// Chaos orders of `S_t f` on one path, with the exact solution alongside.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChaosState {
    pub grid: Grid,
    pub t: f64,
    /// `J^0 = P_t f, J^1, …, J^N`.
    pub terms: Vec<Vec<f64>>,
    /// Partial sums `S^n_t f = Σ_{m≤n} J^m`.
    pub orders: Vec<Vec<f64>>,
    pub exact: Vec<f64>,
}

impl ChaosState {
    /// Grid L² distance of `S^n` to the exact solution.
    pub fn error(&self, n: usize) -> f64 {
        let d: Vec<f64> = self.orders[n].iter().zip(&self.exact).map(|(a, b)| a - b).collect();
        self.grid.l2(&d)
    }
}

fn chaos_steps(t: f64, path: &NoisePath) -> Result<usize> {
    let j = path.index_of(t)?;
    if j == 0 {
        return domain("chaos expansion needs t > 0");
    }
    Ok(j)
}

/// Backward sweep over the path: with
/// `V^m_k = Σ_{k≤j_1<…<j_m} P_{t_{j_1}−t_k} D P_{t_{j_2}−t_{j_1}} … D P_{t−t_{j_m}} f ΔW_{j_1}…ΔW_{j_m}`
/// one has `V^m_k = P_dt V^m_{k+1} + ΔW_k·D(P_dt V^{m−1}_{k+1})` and
/// `J^m_t f = V^m_0`, the unrolled form of the recursion above. Heat and
/// derivative act spectrally on the periodic grid; `sgn` acts pointwise.
pub fn chaos_recursion(
    f: impl Fn(f64) -> f64,
    grid: &Grid,
    t: f64,
    path: &NoisePath,
    n_max: usize,
) -> Result<ChaosState> {
    if n_max > MAX_ORDER {
        return Err(FlowError::InvalidParams(format!("chaos order {n_max} exceeds {MAX_ORDER}")));
    }
    let steps = chaos_steps(t, path)?;
    let sp = Spectral::new(grid.n, 2.0 * grid.x_max);
    let signs: Vec<f64> = grid.points().into_iter().map(sgn).collect();
    let hf = sp.heat_factor(path.dt);
    let zero = Complex64::new(0.0, 0.0);
    let mut v: Vec<Vec<Complex64>> = vec![vec![zero; grid.n]; n_max + 1];
    v[0] = sp.forward(&grid.sample(&f));
    for k in (0..steps).rev() {
        let dw = path.increments[k];
        for m in (0..=n_max).rev() {
            for (c, h) in v[m].iter_mut().zip(&hf) {
                *c *= h;
            }
            if m > 0 {
                // v[m-1] still holds V^{m-1}_{k+1}; smooth it by P_dt first
                let smoothed: Vec<Complex64> = v[m - 1].iter().zip(&hf).map(|(c, h)| c * h).collect();
                let g = sp.inverse(sp.derivative(&smoothed));
                let g: Vec<f64> = g.iter().zip(&signs).map(|(a, s)| a * s * dw).collect();
                for (c, d) in v[m].iter_mut().zip(sp.forward(&g)) {
                    *c += d;
                }
            }
        }
    }
    let terms: Vec<Vec<f64>> = v.into_iter().map(|u| sp.inverse(u)).collect();
    let mut orders = Vec::with_capacity(terms.len());
    let mut acc = vec![0.0; grid.n];
    for term in &terms {
        for (a, b) in acc.iter_mut().zip(term) {
            *a += b;
        }
        orders.push(acc.clone());
    }
    let exact = exact_on_grid(&f, grid, path, t)?;
    Ok(ChaosState { grid: *grid, t, terms, orders, exact })
}

/// `J^n_t f` as the literal iterated sum over `j_1 < … < j_n`, each term
/// built from scratch: `P_{t_{j_1}} D P_{t_{j_2}−t_{j_1}} … D P_{t−t_{j_n}} f`.
pub fn chaos_term_direct(f: impl Fn(f64) -> f64, grid: &Grid, t: f64, path: &NoisePath, n: usize) -> Result<Vec<f64>> {
    if n > MAX_DIRECT_ORDER {
        return Err(FlowError::InvalidParams(format!("direct order {n} exceeds {MAX_DIRECT_ORDER}")));
    }
    let steps = chaos_steps(t, path)?;
    let sp = Spectral::new(grid.n, 2.0 * grid.x_max);
    let signs: Vec<f64> = grid.points().into_iter().map(sgn).collect();
    let fhat = sp.forward(&grid.sample(&f));
    let dt = path.dt;
    let mut total = vec![0.0; grid.n];
    let mut idx: Vec<usize> = (0..n).collect();
    if n > steps {
        return Ok(total);
    }
    loop {
        // innermost factor first: P_{t − t_{j_n}} f
        let mut g = sp.heat(&fhat, (steps - idx.last().copied().unwrap_or(0)) as f64 * dt);
        for m in (0..n).rev() {
            let dw = path.increments[idx[m]];
            let real = sp.inverse(sp.derivative(&g));
            let real: Vec<f64> = real.iter().zip(&signs).map(|(a, s)| a * s * dw).collect();
            let prev = if m == 0 { 0 } else { idx[m - 1] };
            g = sp.heat(&sp.forward(&real), (idx[m] - prev) as f64 * dt);
        }
        for (a, b) in total.iter_mut().zip(sp.inverse(g)) {
            *a += b;
        }
        // next strictly increasing index tuple
        let mut m = n;
        loop {
            if m == 0 {
                return Ok(total);
            }
            m -= 1;
            if idx[m] < steps - (n - m) {
                idx[m] += 1;
                for q in m + 1..n {
                    idx[q] = idx[q - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Monte-Carlo summary at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatPoint {
    pub x: f64,
    pub mean: f64,
    pub mean_se: f64,
    /// `P_t f(x)`.
    pub heat: f64,
    pub second_moment: f64,
    pub second_se: f64,
    /// `P_t(f²)(x)`.
    pub heat_of_square: f64,
}

impl StatPoint {
    /// `P_t(f²) − Ê[(S_t f)²]`.
    pub fn gap(&self) -> f64 {
        self.heat_of_square - self.second_moment
    }

    pub fn mean_within(&self, k: f64) -> bool {
        (self.mean - self.heat).abs() <= k * self.mean_se
    }

    pub fn contraction_holds(&self, k: f64) -> bool {
        self.second_moment <= self.heat_of_square + k * self.second_se
    }

    /// One-sided 99% test of `P_t(f²) − E[(S_t f)²] > 0`.
    pub fn strict_gap(&self) -> bool {
        self.gap() - Z99_ONE_SIDED * self.second_se > 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatOptions {
    pub n_paths: usize,
    pub seed: u64,
    /// Path step; bridge minima make the result exact in law for any step.
    pub dt: f64,
}

/// Mean and second moment of `S_t f` over independent paths, against the
/// heat semigroup by quadrature.
pub fn statistical_checks(
    f: impl Fn(f64) -> f64 + Sync,
    t: f64,
    xs: &[f64],
    opts: &StatOptions,
) -> Result<Vec<StatPoint>> {
    if opts.n_paths < 2 || !(t > 0.0) || !(opts.dt > 0.0) {
        return Err(FlowError::InvalidParams("need n_paths >= 2, t > 0 and dt > 0".into()));
    }
    let steps = (t / opts.dt).round().max(1.0) as usize;
    let dt = t / steps as f64;
    let samples: Vec<Vec<f64>> = (0..opts.n_paths)
        .into_par_iter()
        .map(|i| {
            let path = NoisePath::sample(dt, steps, true, &mut path_rng(opts.seed, i as u64))?;
            Ok(xs.iter().map(|&x| exact_at(&f, x, &path, steps)).collect())
        })
        .collect::<Result<_>>()?;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let vals: Vec<f64> = samples.iter().map(|s| s[i]).collect();
            let sq: Vec<f64> = vals.iter().map(|v| v * v).collect();
            let (mean, m_se) = mean_se(&vals);
            let (second_moment, second_se) = mean_se(&sq);
            Ok(StatPoint {
                x,
                mean,
                mean_se: m_se,
                heat: heat_quadrature(&f, x, t)?,
                second_moment,
                second_se,
                heat_of_square: heat_quadrature(|y| f(y) * f(y), x, t)?,
            })
        })
        .collect()
}
