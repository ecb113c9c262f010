//! Spectral sampling of the isotropic field on the periodic box `[0, L)^d`
//! and discrete Kraichnan advection of a pair of points.
//!
//! Modes are the lattice vectors `k ∈ (2π/L)Z^d` with `0 < ‖k‖ ≤ k_max`.
//! Only the half lattice (first non-zero component positive) is stored; the
//! partner `v̂(−k) = conj v̂(k)` is implied, so
//! `v(x) = Σ_k v̂(k)e^{ik·x} = Σ_half 2 Re(v̂(k)e^{ik·x})`.
//! Each `v̂(k)` is circular complex Gaussian with
//! `E v̂ v̂* = w_k (a k̂k̂ᵀ + b/(d−1)(I − k̂k̂ᵀ))`,
//! `w_k = (2π/L)^d (‖k‖²+m²)^{−(d+α)/2}/|S^{d−1}|`,
//! the Riemann sum of the continuum spectral density.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coeffs::CoefficientPair;
use crate::error::{domain, FlowError, Result};
use crate::euclid_cov::{sphere_area, EuclidParams};
use crate::specfun::{gamma_real, gauss_legendre};
use crate::stream::path_rng;

/// Largest number of lattice points per half axis.
const MAX_AXIS_MODES: f64 = 64.0;

/// Half-lattice modes and their covariance weights.
#[derive(Debug, Clone)]
pub struct ModeSet {
    d: usize,
    box_length: f64,
    k_max: f64,
    lattice: Vec<Vec<i32>>,
    wave_vectors: Vec<Vec<f64>>,
    weights: Vec<f64>,
    params: EuclidParams,
}

impl ModeSet {
    pub fn new(p: &EuclidParams, box_length: f64, k_max: f64) -> Result<Self> {
        p.validate()?;
        if !(box_length > 0.0 && box_length.is_finite() && k_max > 0.0 && k_max.is_finite()) {
            return Err(FlowError::InvalidParams("need L > 0 and k_max > 0".into()));
        }
        let dk = 2.0 * PI / box_length;
        let n_axis = (k_max / dk).floor();
        if n_axis > MAX_AXIS_MODES {
            return Err(FlowError::InvalidParams(format!("k_max·L/(2π) = {:.1} exceeds {MAX_AXIS_MODES}", k_max / dk)));
        }
        let d = p.d as usize;
        let n = n_axis as i32;
        let df = d as f64;
        let c = dk.powi(d as i32) / sphere_area(p.d);
        let mut lattice = Vec::new();
        let mut wave_vectors = Vec::new();
        let mut weights = Vec::new();
        let mut idx = vec![-n; d];
        loop {
            let first = idx.iter().find(|&&v| v != 0).copied().unwrap_or(0);
            if first > 0 {
                let k: Vec<f64> = idx.iter().map(|&v| v as f64 * dk).collect();
                let k2: f64 = k.iter().map(|v| v * v).sum();
                if k2 <= k_max * k_max {
                    weights.push(c * (k2 + p.mass * p.mass).powf(-(df + p.alpha) / 2.0));
                    wave_vectors.push(k);
                    lattice.push(idx.clone());
                }
            }
            let mut j = 0;
            while j < d {
                idx[j] += 1;
                if idx[j] <= n {
                    break;
                }
                idx[j] = -n;
                j += 1;
            }
            if j == d {
                break;
            }
        }
        if lattice.is_empty() {
            return Err(FlowError::InvalidParams(format!(
                "no lattice mode with 0 < |k| <= {k_max} for L = {box_length}"
            )));
        }
        Ok(Self { d, box_length, k_max, lattice, wave_vectors, weights, params: *p })
    }

    pub fn len(&self) -> usize {
        self.lattice.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lattice.is_empty()
    }

    pub fn box_length(&self) -> f64 {
        self.box_length
    }

    pub fn k_max(&self) -> f64 {
        self.k_max
    }

    pub fn wave_vectors(&self) -> &[Vec<f64>] {
        &self.wave_vectors
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Per-coordinate single-point variance `B` of the truncated field.
    pub fn velocity_variance(&self) -> f64 {
        let p = &self.params;
        2.0 * self.weights.iter().sum::<f64>() * (p.a + p.b) / self.d as f64
    }

    /// Exact covariance `E v(x) v(x+z)ᵀ` of the truncated field.
    pub fn covariance(&self, z: &[f64]) -> Result<Vec<Vec<f64>>> {
        if z.len() != self.d {
            return domain(format!("vector of length {} in dimension {}", z.len(), self.d));
        }
        let d = self.d;
        let p = &self.params;
        let tr = p.b / (d as f64 - 1.0);
        let mut c = vec![vec![0.0; d]; d];
        for (k, &w) in self.wave_vectors.iter().zip(&self.weights) {
            let k2: f64 = k.iter().map(|v| v * v).sum();
            let phase: f64 = k.iter().zip(z).map(|(a, b)| a * b).sum();
            let f = 2.0 * w * phase.cos();
            for i in 0..d {
                for j in 0..d {
                    let proj = k[i] * k[j] / k2;
                    let id = if i == j { 1.0 } else { 0.0 };
                    c[i][j] += f * (p.a * proj + tr * (id - proj));
                }
            }
        }
        Ok(c)
    }

    /// Draws `Re v̂`, `Im v̂` for every mode into `out` (`2d` values per mode).
    fn draw<R: Rng>(&self, rng: &mut R, out: &mut [f64]) {
        let d = self.d;
        let p = &self.params;
        let sl = p.a.sqrt();
        let st = (p.b / (d as f64 - 1.0)).sqrt();
        let mut g = [0.0f64; 16];
        for (m, (k, &w)) in self.wave_vectors.iter().zip(&self.weights).enumerate() {
            let kn: f64 = k.iter().map(|v| v * v).sum::<f64>().sqrt();
            let s = (w / 2.0).sqrt();
            for part in 0..2 {
                let o = &mut out[(2 * m + part) * d..(2 * m + part + 1) * d];
                o.iter_mut().for_each(|v| *v = 0.0);
                if p.a > 0.0 {
                    let xi: f64 = rng.sample(StandardNormal);
                    for i in 0..d {
                        o[i] += s * sl * xi * k[i] / kn;
                    }
                }
                if p.b > 0.0 {
                    for gi in g.iter_mut().take(d) {
                        *gi = rng.sample(StandardNormal);
                    }
                    let dot: f64 = (0..d).map(|i| g[i] * k[i] / kn).sum();
                    for i in 0..d {
                        o[i] += s * st * (g[i] - dot * k[i] / kn);
                    }
                }
            }
        }
    }

    /// `e^{i k·x}` for every mode, built from per-axis powers.
    fn phases(&self, x: &[f64], table: &mut Vec<Complex64>, out: &mut [Complex64]) {
        let dk = 2.0 * PI / self.box_length;
        let n = (self.k_max / dk).floor() as i32;
        let width = (2 * n + 1) as usize;
        table.clear();
        table.resize(width * self.d, Complex64::new(1.0, 0.0));
        for (j, &xj) in x.iter().enumerate() {
            let row = &mut table[j * width..(j + 1) * width];
            let e = Complex64::from_polar(1.0, dk * xj);
            let c = n as usize;
            for s in 1..=c {
                row[c + s] = row[c + s - 1] * e;
                row[c - s] = row[c + s].conj();
            }
        }
        for (o, idx) in out.iter_mut().zip(&self.lattice) {
            let mut z = Complex64::new(1.0, 0.0);
            for (j, &v) in idx.iter().enumerate() {
                z *= table[j * width + (v + n) as usize];
            }
            *o = z;
        }
    }
}

/// One draw of the field, half-lattice storage.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FieldRealization {
    pub box_length: f64,
    pub wave_vectors: Vec<Vec<f64>>,
    pub mode_coefficients: Vec<Vec<Complex64>>,
    pub weights: Vec<f64>,
}

impl FieldRealization {
    /// `v(x) = Σ_half 2 Re(v̂(k) e^{ik·x})`.
    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        let d = x.len();
        let mut v = vec![0.0; d];
        for (k, c) in self.wave_vectors.iter().zip(&self.mode_coefficients) {
            let phase: f64 = k.iter().zip(x).map(|(a, b)| a * b).sum();
            let e = Complex64::from_polar(1.0, phase);
            for i in 0..d {
                v[i] += 2.0 * (c[i] * e).re;
            }
        }
        v
    }
}

/// Samples one realization with the per-mode covariance above.
pub fn sample_field(p: &EuclidParams, box_length: f64, k_max: f64, seed: u64) -> Result<FieldRealization> {
    let modes = ModeSet::new(p, box_length, k_max)?;
    Ok(sample_from(&modes, &mut path_rng(seed, 0)))
}

/// Samples one realization on a precomputed mode set.
pub fn sample_from<R: Rng>(modes: &ModeSet, rng: &mut R) -> FieldRealization {
    let d = modes.d;
    let mut buf = vec![0.0; 2 * d * modes.len()];
    modes.draw(rng, &mut buf);
    let mode_coefficients = (0..modes.len())
        .map(|m| (0..d).map(|i| Complex64::new(buf[2 * m * d + i], buf[(2 * m + 1) * d + i])).collect())
        .collect();
    FieldRealization {
        box_length: modes.box_length,
        wave_vectors: modes.wave_vectors.clone(),
        mode_coefficients,
        weights: modes.weights.clone(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdvectConfig {
    pub box_length: f64,
    pub k_max: f64,
    pub dt: f64,
    pub t_max: f64,
    pub n_realizations: usize,
    pub seed: u64,
    /// Times at which distances are recorded (rounded to the step grid).
    pub sample_times: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairSample {
    pub times: Vec<f64>,
    /// `distances[j]` holds `‖X − Y‖` at `times[j]` for uncensored realizations.
    pub distances: Vec<Vec<f64>>,
    /// Realizations whose separation exceeded `L/4`.
    pub censored: usize,
    /// `X_T − x0` for every realization (unaffected by censoring).
    pub displacements: Vec<Vec<f64>>,
}

fn wrapped_distance(x: &[f64], y: &[f64], l: f64) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| {
            let z = a - b;
            let z = z - l * (z / l).round();
            z * z
        })
        .sum::<f64>()
        .sqrt()
}

/// Discrete Kraichnan scheme: each step draws a fresh field `v_n` and moves
/// both points by `v_n(·)√dt`.
pub fn advect_pair(p: &EuclidParams, cfg: &AdvectConfig, x0: &[f64], y0: &[f64]) -> Result<PairSample> {
    let modes = ModeSet::new(p, cfg.box_length, cfg.k_max)?;
    let d = modes.d;
    if x0.len() != d || y0.len() != d {
        return domain(format!("start points must have length {d}"));
    }
    if !(cfg.dt > 0.0 && cfg.t_max >= cfg.dt) || cfg.n_realizations == 0 {
        return Err(FlowError::InvalidParams("need 0 < dt <= T and n_realizations > 0".into()));
    }
    let limit = cfg.box_length / 4.0;
    if wrapped_distance(x0, y0, cfg.box_length) > limit {
        return Err(FlowError::InvalidParams("initial separation exceeds L/4".into()));
    }
    let n_steps = (cfg.t_max / cfg.dt).round() as usize;
    let mut marks: Vec<usize> =
        cfg.sample_times.iter().map(|&t| ((t / cfg.dt).round() as usize).min(n_steps)).collect();
    marks.sort_unstable();
    marks.dedup();
    let sq = cfg.dt.sqrt();
    let runs: Vec<(Option<Vec<f64>>, Vec<f64>)> = (0..cfg.n_realizations)
        .into_par_iter()
        .map(|i| {
            let mut rng = path_rng(cfg.seed, i as u64);
            let mut x = x0.to_vec();
            let mut y = y0.to_vec();
            let mut coef = vec![0.0; 2 * d * modes.len()];
            let mut ex = vec![Complex64::new(0.0, 0.0); modes.len()];
            let mut ey = ex.clone();
            let mut table = Vec::new();
            let mut rec = Vec::with_capacity(marks.len());
            let mut censored = false;
            let mut next = 0;
            if marks.first() == Some(&0) {
                rec.push(wrapped_distance(&x, &y, cfg.box_length));
                next = 1;
            }
            let same = x == y;
            for step in 1..=n_steps {
                modes.draw(&mut rng, &mut coef);
                modes.phases(&x, &mut table, &mut ex);
                if !same {
                    modes.phases(&y, &mut table, &mut ey);
                }
                let mut vx = [0.0f64; 16];
                let mut vy = [0.0f64; 16];
                for m in 0..modes.len() {
                    let (re, im) = (&coef[2 * m * d..(2 * m + 1) * d], &coef[(2 * m + 1) * d..(2 * m + 2) * d]);
                    let (cx, sx) = (ex[m].re, ex[m].im);
                    let (cy, sy) = if same { (cx, sx) } else { (ey[m].re, ey[m].im) };
                    for j in 0..d {
                        vx[j] += 2.0 * (re[j] * cx - im[j] * sx);
                        vy[j] += 2.0 * (re[j] * cy - im[j] * sy);
                    }
                }
                for j in 0..d {
                    x[j] += vx[j] * sq;
                    y[j] += vy[j] * sq;
                }
                let r = wrapped_distance(&x, &y, cfg.box_length);
                if r > limit {
                    censored = true;
                }
                if next < marks.len() && marks[next] == step {
                    rec.push(r);
                    next += 1;
                }
            }
            let disp = x.iter().zip(x0).map(|(a, b)| a - b).collect();
            ((!censored).then_some(rec), disp)
        })
        .collect();
    let mut distances = vec![Vec::new(); marks.len()];
    let mut censored = 0;
    let mut displacements = Vec::with_capacity(runs.len());
    for (rec, disp) in runs {
        match rec {
            Some(rec) => {
                for (j, r) in rec.into_iter().enumerate() {
                    distances[j].push(r);
                }
            }
            None => censored += 1,
        }
        displacements.push(disp);
    }
    Ok(PairSample { times: marks.iter().map(|&s| s as f64 * cfg.dt).collect(), distances, censored, displacements })
}

/// Cached Gauss–Legendre rules mapped to `θ ∈ [0, π]`.
fn theta_rule(n: usize) -> &'static (Vec<f64>, Vec<f64>) {
    static RULES: OnceLock<Vec<(Vec<f64>, Vec<f64>)>> = OnceLock::new();
    let rules = RULES.get_or_init(|| {
        RULE_SIZES
            .iter()
            .map(|&n| {
                let (x, w) = gauss_legendre(n);
                (x.iter().map(|v| PI / 2.0 * (v + 1.0)).collect(), w.iter().map(|v| PI / 2.0 * v).collect())
            })
            .collect()
    });
    let i = RULE_SIZES.iter().position(|&s| s == n).expect("cached rule size");
    &rules[i]
}

const RULE_SIZES: [usize; 6] = [64, 128, 256, 512, 1024, 2048];

/// `1 − Λ_n(x)` for `n = d` and `n = d + 2`, where
/// `Λ_n(x) = Γ(n/2)(2/x)^{n/2−1} J_{n/2−1}(x)` is the average of `cos(x u₁)`
/// over the unit sphere in `R^n`. Written as `2 sin²(x cosθ/2)` against
/// `sin^{n−2}θ` so small `x` loses nothing to cancellation.
fn one_minus_lambda_pair(d: u32, x: f64) -> (f64, f64) {
    let need = 40.0 + 1.2 * x;
    match RULE_SIZES.iter().find(|&&s| s as f64 >= need) {
        Some(&n) => {
            let (th, w) = theta_rule(n);
            let (mut s0, mut s2, mut n0, mut n2) = (0.0, 0.0, 0.0, 0.0);
            for (&t, &wt) in th.iter().zip(w) {
                let sn = t.sin();
                let wd = wt * sn.powi(d as i32 - 2);
                let wd2 = wd * sn * sn;
                let h = (x * t.cos() / 2.0).sin();
                let f = 2.0 * h * h;
                s0 += wd * f;
                s2 += wd2 * f;
                n0 += wd;
                n2 += wd2;
            }
            (s0 / n0, s2 / n2)
        }
        None => {
            let lam = |n: f64| {
                gamma_real(n / 2.0) * (2.0 / x).powf((n - 1.0) / 2.0) / PI.sqrt() * (x - (n - 1.0) * PI / 4.0).cos()
            };
            (1.0 - lam(d as f64), 1.0 - lam(d as f64 + 2.0))
        }
    }
}

/// Distance coefficients of the truncated spectrum, averaged over the
/// direction of the separation: the continuum formulas with the radial
/// measure replaced by the lattice weights.
#[derive(Debug, Clone)]
pub struct TruncatedCoeffs {
    params: EuclidParams,
    radii: Vec<f64>,
    radial_weights: Vec<f64>,
    total: f64,
}

impl TruncatedCoeffs {
    pub fn new(modes: &ModeSet) -> Self {
        let mut shells: BTreeMap<u64, (f64, f64)> = BTreeMap::new();
        for (k, &w) in modes.wave_vectors.iter().zip(&modes.weights) {
            let kn = k.iter().map(|v| v * v).sum::<f64>().sqrt();
            let e = shells.entry((kn * 1e9).round() as u64).or_insert((kn, 0.0));
            e.1 += 2.0 * w;
        }
        let (radii, radial_weights): (Vec<f64>, Vec<f64>) = shells.into_values().unzip();
        let total = radial_weights.iter().sum();
        Self { params: modes.params, radii, radial_weights, total }
    }

    /// Scalar spectral mass `Σ_all w_k`, the analogue of `F(R⁺)`.
    pub fn spectral_total(&self) -> f64 {
        self.total
    }

    /// `(D(r), Q_N(r))` with `D = Σ w(1 − Λ_d(‖k‖r))` and
    /// `Q_N = ∫_0^1 u^{d−1}D(ru)du = Σ w(1 − Λ_{d+2}(‖k‖r))/d`.
    fn structure(&self, r: f64) -> (f64, f64) {
        let d = self.params.d;
        let (mut dd, mut qn) = (0.0, 0.0);
        for (&k, &w) in self.radii.iter().zip(&self.radial_weights) {
            let (l0, l2) = one_minus_lambda_pair(d, k * r);
            dd += w * l0;
            qn += w * l2;
        }
        (dd, qn / d as f64)
    }

    /// Direction-averaged `(B_L(r), B_N(r))`.
    pub fn correlators(&self, r: f64) -> Result<(f64, f64)> {
        let (s2, b) = self.both(r)?;
        let p = &self.params;
        let big_b = (p.a + p.b) * self.total / p.d as f64;
        Ok((big_b - s2, big_b - r * b / (p.d as f64 - 1.0)))
    }
}

impl CoefficientPair for TruncatedCoeffs {
    fn sigma2(&self, r: f64) -> Result<f64> {
        self.both(r).map(|v| v.0)
    }

    fn drift(&self, r: f64) -> Result<f64> {
        self.both(r).map(|v| v.1)
    }

    fn domain(&self) -> (f64, f64) {
        (0.0, f64::INFINITY)
    }

    fn both(&self, r: f64) -> Result<(f64, f64)> {
        self.check_interior(r)?;
        let (dd, qn) = self.structure(r);
        let EuclidParams { a, b, d, .. } = self.params;
        let dm1 = d as f64 - 1.0;
        let w = a - b / dm1;
        let q_l = dd - dm1 * qn;
        Ok((w * q_l + b / dm1 * dd, dm1 / r * (w * qn + b / dm1 * dd)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(eta: f64) -> EuclidParams {
        EuclidParams::from_eta(2, 1.0, eta, 1.0).unwrap()
    }

    #[test]
    fn half_lattice_excludes_partners() {
        let m = ModeSet::new(&params(0.5), 4.0 * PI, 8.0).unwrap();
        for (i, a) in m.lattice.iter().enumerate() {
            let neg: Vec<i32> = a.iter().map(|v| -v).collect();
            assert!(!m.lattice.contains(&neg), "mode {i} stored with its partner");
        }
        let full = (-16i32..=16)
            .flat_map(|i| (-16i32..=16).map(move |j| (i, j)))
            .filter(|&(i, j)| (i, j) != (0, 0) && i * i + j * j <= 256)
            .count();
        assert_eq!(2 * m.len(), full);
    }

    #[test]
    fn empty_mode_set_rejected() {
        assert!(ModeSet::new(&params(0.5), 1.0, 1.0).is_err());
        assert!(ModeSet::new(&params(0.5), 4.0 * PI, 1000.0).is_err());
    }

    #[test]
    fn field_is_real_and_periodic() {
        let p = params(0.3);
        let f = sample_field(&p, 2.0 * PI, 4.0, 5).unwrap();
        let x = [0.7, -1.3];
        let v = f.eval(&x);
        let shifted = f.eval(&[x[0] + 2.0 * PI, x[1] - 4.0 * PI]);
        for i in 0..2 {
            assert!((v[i] - shifted[i]).abs() < 1e-11);
        }
        // direct sum over both halves is real
        let mut im = 0.0f64;
        for (k, c) in f.wave_vectors.iter().zip(&f.mode_coefficients) {
            let ph: f64 = k[0] * x[0] + k[1] * x[1];
            let e = Complex64::from_polar(1.0, ph);
            im += (c[0] * e + c[0].conj() * e.conj()).im;
        }
        assert!(im.abs() < 1e-12);
    }

    #[test]
    fn phase_tables_match_direct_exponentials() {
        let m = ModeSet::new(&params(0.5), 4.0 * PI, 6.0).unwrap();
        let x = [1.234, -0.5];
        let mut tab = Vec::new();
        let mut out = vec![Complex64::new(0.0, 0.0); m.len()];
        m.phases(&x, &mut tab, &mut out);
        for (k, z) in m.wave_vectors.iter().zip(&out) {
            let e = Complex64::from_polar(1.0, k[0] * x[0] + k[1] * x[1]);
            assert!((e - z).norm() < 1e-12);
        }
    }

    #[test]
    fn riemann_sum_approaches_continuum_variance() {
        // finer lattice at fixed k_max converges to the truncated integral
        let p = params(0.5);
        let k_max = 4.0;
        let exact = {
            use crate::specfun::{integrate_1d, QuadratureSpec};
            integrate_1d(|r| p.radial_density(r), 0.0, k_max, &QuadratureSpec::with_tol(1e-14, 1e-12)).unwrap().value
                / 2.0
        };
        let coarse = ModeSet::new(&p, 8.0 * PI, k_max).unwrap().velocity_variance();
        let fine = ModeSet::new(&p, 32.0 * PI, k_max).unwrap().velocity_variance();
        assert!((fine - exact).abs() < (coarse - exact).abs());
        assert!((fine / exact - 1.0).abs() < 0.01, "{fine} vs {exact}");
    }

    #[test]
    fn lambda_limits() {
        for d in [2u32, 3, 4] {
            let (a, b) = one_minus_lambda_pair(d, 1e-4);
            assert!((a / (1e-8 / (2.0 * d as f64)) - 1.0).abs() < 1e-6);
            assert!((b / (1e-8 / (2.0 * (d + 2) as f64)) - 1.0).abs() < 1e-6);
        }
        // Λ_3(x) = sin x / x
        for x in [0.5, 3.0, 20.0, 150.0] {
            let (a, _) = one_minus_lambda_pair(3, x);
            assert!((1.0 - a - x.sin() / x).abs() < 1e-13, "x = {x}");
        }
    }

    #[test]
    fn truncated_coeffs_match_mode_sum_along_axis_average() {
        // the direction average of the exact tensor reproduces B_L, B_N
        let p = params(0.4);
        let m = ModeSet::new(&p, 4.0 * PI, 6.0).unwrap();
        let tc = TruncatedCoeffs::new(&m);
        let r = 0.8;
        let n = 720;
        let (mut bl, mut bn) = (0.0, 0.0);
        for i in 0..n {
            let t = 2.0 * PI * i as f64 / n as f64;
            let e = [t.cos(), t.sin()];
            let c = m.covariance(&[r * e[0], r * e[1]]).unwrap();
            let l = e[0] * (c[0][0] * e[0] + c[0][1] * e[1]) + e[1] * (c[1][0] * e[0] + c[1][1] * e[1]);
            let tr = c[0][0] + c[1][1];
            bl += l / n as f64;
            bn += (tr - l) / n as f64;
        }
        let (el, en) = tc.correlators(r).unwrap();
        assert!((bl - el).abs() < 1e-10, "{bl} vs {el}");
        assert!((bn - en).abs() < 1e-10, "{bn} vs {en}");
    }
}
