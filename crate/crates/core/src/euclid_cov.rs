//! Stationary isotropic Sobolev covariance on `R^d` and the induced
//! distance diffusion.
//!
//! With `F(dρ) = ρ^{d−1}(ρ²+m²)^{−(d+α)/2} dρ` the isotropic average
//! `T(r) = ∫∫ cos(ρ u₁ r) ω(du) F(dρ)` is a Matérn function,
//! `T(r) = F(R⁺)·M(mr)`, `M(x) = 2^{1−ν}/Γ(ν) x^ν K_ν(x)`, `ν = α/2`.
//! For a gradient field with longitudinal/normal correlators `P_L, P_N` and
//! trace `T = P_L + (d−1)P_N` one has `P_N(r) = r^{−d} ∫_0^r s^{d−1} T(s) ds`.
//! Writing `D(s) = F(R⁺)(1 − M(ms))` and
//! `Q_N(r) = ∫_0^1 u^{d−1} D(ru) du`, `Q_L = D − (d−1)Q_N`:
//!
//! `σ²(r) = (a − b/(d−1)) Q_L + b/(d−1) D`,
//! `b(r) = (d−1)/r · [(a − b/(d−1)) Q_N + b/(d−1) D]`.
//!
//! Every term is non-negative or small and nothing cancels as `r → 0`.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::coeffs::CoefficientPair;
use crate::error::{domain, FlowError, Result};
use crate::specfun::{beta_fn, gamma_real, integrate_1d, integrate_1d_with_breaks, QuadratureSpec, Upper};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EuclidParams {
    pub d: u32,
    pub alpha: f64,
    pub a: f64,
    pub b: f64,
    pub mass: f64,
}

impl EuclidParams {
    pub fn new(d: u32, alpha: f64, a: f64, b: f64, mass: f64) -> Result<Self> {
        let p = Self { d, alpha, a, b, mass };
        p.validate()?;
        Ok(p)
    }

    /// Parameters with `a + b = 1` and solenoidal fraction `eta`.
    pub fn from_eta(d: u32, alpha: f64, eta: f64, mass: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(FlowError::InvalidParams(format!("eta = {eta} outside [0, 1]")));
        }
        Self::new(d, alpha, 1.0 - eta, eta, mass)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d < 2 {
            return Err(FlowError::InvalidParams("dimension d must be >= 2".into()));
        }
        if !(self.alpha > 0.0) || !self.alpha.is_finite() {
            return Err(FlowError::InvalidParams(format!("alpha = {} must be > 0", self.alpha)));
        }
        if !(self.mass > 0.0) || !self.mass.is_finite() {
            return Err(FlowError::InvalidParams(format!("mass = {} must be > 0", self.mass)));
        }
        if !(self.a >= 0.0 && self.b >= 0.0) || !(self.a + self.b > 0.0) {
            return Err(FlowError::InvalidParams(format!(
                "weights must satisfy a, b >= 0 and a + b > 0, got a = {}, b = {}",
                self.a, self.b
            )));
        }
        Ok(())
    }

    pub fn eta(&self) -> f64 {
        self.b / (self.a + self.b)
    }

    /// Spectral radial density `ρ^{d−1}(ρ²+m²)^{−(d+α)/2}`.
    pub fn radial_density(&self, rho: f64) -> f64 {
        let df = self.d as f64;
        rho.powi(self.d as i32 - 1) * (rho * rho + self.mass * self.mass).powf(-(df + self.alpha) / 2.0)
    }

    /// `F(R⁺) = m^{−α} B(d/2, α/2)/2`.
    pub fn spectral_total_closed(&self) -> f64 {
        let df = self.d as f64;
        self.mass.powf(-self.alpha) * 0.5 * beta_fn(df / 2.0, self.alpha / 2.0).expect("positive Beta arguments")
    }

    /// Single-point variance per coordinate `B = (a+b)F(R⁺)/d`.
    pub fn b_total(&self) -> f64 {
        (self.a + self.b) * self.spectral_total_closed() / self.d as f64
    }
}

/// `F(R⁺)` and `B = (a+b)F(R⁺)/d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralTotal {
    pub f_total: f64,
    pub b: f64,
    pub err_estimate: f64,
}

/// `F(R⁺)` by quadrature of the radial density.
pub fn spectral_total(p: &EuclidParams) -> Result<SpectralTotal> {
    p.validate()?;
    let spec = QuadratureSpec::with_tol(1e-14, 1e-11).levels(40);
    let f = |rho: f64| p.radial_density(rho);
    // split at the regulator scale; the tail ρ = m/v behaves like v^{α−1}
    let head = integrate_1d(f, 0.0, p.mass, &spec)?;
    let tail = integrate_1d(|v: f64| f(p.mass / v) * p.mass / (v * v), 0.0, 1.0, &spec.hint(p.alpha - 1.0))?;
    let v = head.value + tail.value;
    let err = head.err_estimate + tail.err_estimate;
    if !(head.converged && tail.converged) {
        return Err(FlowError::NonConvergence { value: v, err_estimate: err });
    }
    Ok(SpectralTotal { f_total: v, b: (p.a + p.b) * v / p.d as f64, err_estimate: err })
}

/// `1 − M(x)` for the normalized Matérn function of index `ν ∈ (0, 1)`.
pub(crate) fn one_minus_matern(nu: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x < 2.0 {
        // 1 − M(x) = Γ(1−ν)[Σ_k (x/2)^{2k+2ν}/(k!Γ(k+1+ν)) − Σ_{k≥1} (x/2)^{2k}/(k!Γ(k+1−ν))]
        let h = 0.5 * x;
        let h2 = h * h;
        let mut s1 = 0.0;
        let mut t1 = h.powf(2.0 * nu) / gamma_real(1.0 + nu);
        let mut s2 = 0.0;
        let mut t2 = h2 / gamma_real(2.0 - nu);
        for k in 0..40 {
            let kf = k as f64;
            s1 += t1;
            s2 += t2;
            t1 *= h2 / ((kf + 1.0) * (kf + 1.0 + nu));
            t2 *= h2 / ((kf + 2.0) * (kf + 2.0 - nu));
            if t1.abs() < 1e-18 * s1.abs() && t2.abs() < 1e-18 * s2.abs().max(1e-300) {
                break;
            }
        }
        gamma_real(1.0 - nu) * (s1 - s2)
    } else {
        1.0 - matern(nu, x)
    }
}

/// `M(x) = 2^{1−ν}/Γ(ν) x^ν K_ν(x)`, using
/// `K_ν(x) = e^{−x} ∫_0^∞ e^{−x(cosh t − 1)} cosh(νt) dt` for `x ≥ 2`.
pub(crate) fn matern(nu: f64, x: f64) -> f64 {
    if x < 2.0 {
        return 1.0 - one_minus_matern(nu, x);
    }
    if x > 740.0 {
        return 0.0;
    }
    let t_max = (1.0 + 45.0 / x).acosh();
    let spec = QuadratureSpec::with_tol(1e-16, 1e-13).levels(30);
    let r = integrate_1d(|t: f64| (-x * (t.cosh() - 1.0)).exp() * (nu * t).cosh(), 0.0, t_max, &spec)
        .map(|r| r.value)
        .unwrap_or(f64::NAN);
    2f64.powf(1.0 - nu) / gamma_real(nu) * x.powf(nu) * (-x).exp() * r
}

/// Evaluator for `D(r)`, `Q_N(r)` and the derived correlators.
#[derive(Debug, Clone)]
pub struct EuclidKernel {
    params: EuclidParams,
    nu: f64,
    f_total: f64,
    spec: QuadratureSpec,
}

/// Values of the correlator building blocks at one separation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Structure {
    /// `D(r) = F(R⁺) − ∫∫cos(ρu₁r) ω F`
    pub d_full: f64,
    /// `Q_N(r) = ∫_0^1 u^{d−1} D(ru) du`
    pub q_n: f64,
    /// `Q_L(r) = D − (d−1)Q_N`
    pub q_l: f64,
}

/// Beyond this `m·r` the Matérn tail `e^{−mr}` is below double precision.
const FAR_MATERN: f64 = 50.0;

impl EuclidKernel {
    pub fn new(p: &EuclidParams) -> Result<Self> {
        p.validate()?;
        if !(p.alpha < 2.0) {
            return domain(format!("correlators are implemented for α in (0, 2), got {}", p.alpha));
        }
        Ok(Self {
            params: *p,
            nu: p.alpha / 2.0,
            f_total: p.spectral_total_closed(),
            spec: QuadratureSpec::with_tol(1e-300, 1e-11).levels(40),
        })
    }

    pub fn params(&self) -> &EuclidParams {
        &self.params
    }

    pub fn f_total(&self) -> f64 {
        self.f_total
    }

    /// `D(r)`.
    pub fn d_full(&self, r: f64) -> f64 {
        self.f_total * one_minus_matern(self.nu, self.params.mass * r)
    }

    pub fn structure(&self, r: f64) -> Result<Structure> {
        if !(r >= 0.0) || !r.is_finite() {
            return domain(format!("separation {r} must be finite and >= 0"));
        }
        if r == 0.0 {
            return Ok(Structure { d_full: 0.0, q_n: 0.0, q_l: 0.0 });
        }
        let d = self.params.d;
        let dm1 = d as i32 - 1;
        let full = self.d_full(r);
        let x = self.params.mass * r;
        if x > FAR_MATERN {
            // ∫_0^1 u^{d−1}M(xu)du = x^{−d}∫_0^∞ v^{d−1}M(v)dv up to O(e^{−x})
            let nu = self.nu;
            let dh = d as f64 / 2.0;
            let moment = 2f64.powf(d as f64 - 1.0) * gamma_real(dh + nu) * gamma_real(dh) / gamma_real(nu);
            let q_n = self.f_total * (1.0 / d as f64 - moment * x.powi(-(d as i32)));
            return Ok(Structure { d_full: full, q_n, q_l: full - (d as f64 - 1.0) * q_n });
        }
        // D(ru) ~ (ru)^α at small u
        let spec = QuadratureSpec { endpoint_power_hint: Some(d as f64 - 1.0 + self.params.alpha), ..self.spec };
        let knee = 1.0 / (self.params.mass * r);
        let breaks: Vec<f64> = [0.1 * knee, knee, 10.0 * knee].into_iter().filter(|&u| u < 1.0).collect();
        let res = integrate_1d_with_breaks(|u: f64| u.powi(dm1) * self.d_full(r * u), 0.0, 1.0, &breaks, &spec)?;
        if !res.converged {
            return Err(FlowError::NonConvergence { value: res.value, err_estimate: res.err_estimate });
        }
        let q_n = res.value;
        Ok(Structure { d_full: full, q_n, q_l: full - (d as f64 - 1.0) * q_n })
    }

    /// `(B_L(r), B_N(r))`.
    pub fn correlators(&self, r: f64) -> Result<(f64, f64)> {
        let s = self.structure(r)?;
        let EuclidParams { a, b, d, .. } = self.params;
        let dm1 = d as f64 - 1.0;
        let f = self.f_total;
        let df = d as f64;
        // gradient part P_L = F/d − Q_L, P_N = F/d − Q_N; trace T = F − D
        let t = f - s.d_full;
        let pl = f / df - s.q_l;
        let pn = f / df - s.q_n;
        let bl = a * pl + b / dm1 * (t - pl);
        let bn = a * pn + b / dm1 * (t - pn);
        Ok((bl, bn))
    }
}

/// `(B_L(r), B_N(r))`. Valid for every `r ≥ 0` (no oscillatory quadrature).
pub fn correlators(p: &EuclidParams, r: f64) -> Result<(f64, f64)> {
    EuclidKernel::new(p)?.correlators(r)
}

/// Oracle for `D(r)` and `∫∫(1 − cos(ρu₁r)) u₁² ω F`: direct double
/// integral over `u₁ = cos θ` (marginal density ∝ `sin^{d−2}θ`) and `ρ`,
/// with `ρ`-panels of one period up to 40 oscillations and an
/// integration-by-parts tail estimate.
pub fn structure_double_integral(p: &EuclidParams, r: f64) -> Result<(f64, f64)> {
    p.validate()?;
    if !(r > 0.0) {
        return domain("structure_double_integral needs r > 0");
    }
    let dm2 = p.d as i32 - 2;
    let spec = QuadratureSpec::with_tol(1e-12, 1e-8).levels(30);
    let rho_integral = |k: f64| -> f64 {
        // ∫_0^∞ (1 − cos kρ) F(dρ)
        let period = 2.0 * PI / k;
        let n_osc = 40.0;
        let r_end = n_osc * period;
        let mut breaks: Vec<f64> = (1..40).map(|j| j as f64 * period).collect();
        breaks.push(p.mass);
        breaks.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        let head = integrate_1d_with_breaks(
            |rho: f64| (1.0 - (k * rho).cos()) * p.radial_density(rho),
            0.0,
            r_end,
            &breaks,
            &spec,
        )
        .map(|r| r.value)
        .unwrap_or(f64::NAN);
        let smooth = integrate_1d(|rho: f64| p.radial_density(rho), r_end, Upper::Infinity, &spec)
            .map(|r| r.value)
            .unwrap_or(f64::NAN);
        // ∫_R^∞ cos(kρ) f dρ ≈ −sin(kR) f(R)/k, and sin(kR) = 0 at a period end
        head + smooth
    };
    let outer = QuadratureSpec::with_tol(1e-12, 1e-7).levels(25);
    let norm = 1.0 / (2.0 * half_beta_sin_power(p.d));
    // ψ = π/2 − θ; the integrand behaves like ψ^α at ψ = 0
    let res = crate::specfun::integrate_1d_vec(
        |psi: f64| {
            let c = psi.sin();
            if c <= 0.0 {
                return [0.0, 0.0];
            }
            let v = rho_integral(c * r) * psi.cos().powi(dm2);
            [v, v * c * c]
        },
        0.0,
        FRAC_PI_2,
        &[],
        &outer.hint(p.alpha),
    )?;
    let (f0, f2) = (res.value[0], res.value[1]);
    Ok((2.0 * norm * f0, 2.0 * norm * f2))
}

/// `I(d−2, 0) = ∫_0^{π/2} sin^{d−2}θ dθ = B((d−1)/2, 1/2)/2`.
fn half_beta_sin_power(d: u32) -> f64 {
    i_integral(d as f64 - 2.0, 0.0)
}

/// `I(n, t) = ∫_0^{π/2} cos^t θ sin^n θ dθ = B((n+1)/2, (t+1)/2)/2`.
pub fn i_integral(n: f64, t: f64) -> f64 {
    0.5 * beta_fn((n + 1.0) / 2.0, (t + 1.0) / 2.0).expect("positive Beta arguments")
}

/// `∫_0^∞ (1 − cos x) x^{−α−1} dx = π / (2 Γ(α+1) sin(πα/2))`.
pub fn one_minus_cos_moment(alpha: f64) -> f64 {
    PI / (2.0 * gamma_real(alpha + 1.0) * (0.5 * PI * alpha).sin())
}

/// Small-separation constants: `D(r) ≈ α₁ r^α`, and the `u₁²`, `u₂²`
/// weighted analogues `α₂ r^α`, `α₃ r^α`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AlphaConstants {
    pub alpha1: f64,
    pub alpha2: f64,
    pub alpha3: f64,
}

/// `α₁ = c_ω J(α) I(d−2, α)` with `c_ω = 1/I(d−2, 0)`, the normalization of
/// the `u₁`-marginal of the uniform measure on `S^{d−1}`, whose density is
/// proportional to `(1−u₁²)^{(d−3)/2}`.
pub fn alpha_constants(alpha: f64, d: u32) -> Result<AlphaConstants> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return domain(format!("alpha_constants needs α in (0, 2), got {alpha}"));
    }
    if d < 2 {
        return domain("alpha_constants needs d >= 2");
    }
    let df = d as f64;
    let a1 = one_minus_cos_moment(alpha) * i_integral(df - 2.0, alpha) / i_integral(df - 2.0, 0.0);
    Ok(AlphaConstants { alpha1: a1, alpha2: (alpha + 1.0) / (df + alpha) * a1, alpha3: a1 / (df + alpha) })
}

/// `α_constants` is ill-conditioned near the ends of `(0, 2)`.
pub fn alpha_constants_well_conditioned(alpha: f64) -> bool {
    (0.05..=1.95).contains(&alpha)
}

/// `C^{ij}(z) = δ^{ij} B_N + z^i z^j/‖z‖² (B_L − B_N)`, row-major `d×d`.
pub fn covariance_matrix(p: &EuclidParams, z: &[f64]) -> Result<Vec<Vec<f64>>> {
    let d = p.d as usize;
    if z.len() != d {
        return domain(format!("vector of length {} in dimension {d}", z.len()));
    }
    let r = z.iter().map(|v| v * v).sum::<f64>().sqrt();
    let (bl, bn) = correlators(p, r)?;
    let mut c = vec![vec![0.0; d]; d];
    for i in 0..d {
        for j in 0..d {
            let proj = if r > 0.0 { z[i] * z[j] / (r * r) } else { 0.0 };
            c[i][j] = if i == j { bn } else { 0.0 } + proj * (bl - bn);
        }
    }
    Ok(c)
}

/// Area of the unit sphere `S^{d−1}`.
pub fn sphere_area(d: u32) -> f64 {
    let h = d as f64 / 2.0;
    2.0 * PI.powf(h) / gamma_real(h)
}

/// `Ĉ(k) = c(‖k‖²+m²)^{−(d+α)/2}(a kkᵀ/‖k‖² + b/(d−1)(I − kkᵀ/‖k‖²))` with
/// `c = 1/|S^{d−1}|`, the value for which `∫Ĉ(k) dk = C(0) = B·I`.
pub fn spectral_density(p: &EuclidParams, k: &[f64]) -> Result<Vec<Vec<f64>>> {
    p.validate()?;
    let d = p.d as usize;
    if k.len() != d {
        return domain(format!("vector of length {} in dimension {d}", k.len()));
    }
    let k2: f64 = k.iter().map(|v| v * v).sum();
    if !(k2 > 0.0) {
        return domain("spectral density needs k != 0");
    }
    let df = p.d as f64;
    let radial = (k2 + p.mass * p.mass).powf(-(df + p.alpha) / 2.0) / sphere_area(p.d);
    let tr = p.b / (df - 1.0);
    let mut c = vec![vec![0.0; d]; d];
    for i in 0..d {
        for j in 0..d {
            let proj = k[i] * k[j] / k2;
            let id = if i == j { 1.0 } else { 0.0 };
            c[i][j] = radial * (p.a * proj + tr * (id - proj));
        }
    }
    Ok(c)
}

/// Distance-diffusion coefficients on `(0, ∞)`.
#[derive(Debug, Clone)]
pub struct EuclidCoeffs {
    kernel: EuclidKernel,
}

impl EuclidCoeffs {
    pub fn kernel(&self) -> &EuclidKernel {
        &self.kernel
    }
}

/// `σ²(r) = B − B_L(r)`, `b(r) = (d−1)(B − B_N(r))/r`.
pub fn distance_coeffs_rd(p: &EuclidParams) -> Result<EuclidCoeffs> {
    Ok(EuclidCoeffs { kernel: EuclidKernel::new(p)? })
}

impl CoefficientPair for EuclidCoeffs {
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
        let s = self.kernel.structure(r)?;
        let EuclidParams { a, b, d, .. } = self.kernel.params;
        let dm1 = d as f64 - 1.0;
        let w = a - b / dm1;
        let sigma2 = w * s.q_l + b / dm1 * s.d_full;
        let drift = dm1 / r * (w * s.q_n + b / dm1 * s.d_full);
        Ok((sigma2, drift))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn spectral_total_examples() {
        let p = EuclidParams::new(2, 2.0, 1.0, 0.0, 1.0).unwrap();
        let s = spectral_total(&p).unwrap();
        assert!((s.f_total - 0.5).abs() < 1e-10);
        for &(d, alpha, m) in &[(2u32, 1.0, 1.0), (3, 0.7, 2.0), (4, 1.6, 0.5)] {
            let p = EuclidParams::new(d, alpha, 0.3, 0.7, m).unwrap();
            let s = spectral_total(&p).unwrap();
            assert!((s.f_total - p.spectral_total_closed()).abs() < 1e-9 * s.f_total);
            let p2 = EuclidParams::new(d, alpha, 0.6, 1.4, m).unwrap();
            assert!((spectral_total(&p2).unwrap().b - 2.0 * s.b).abs() < 1e-12);
        }
        let mut prev = f64::INFINITY;
        for i in 0..10 {
            let p = EuclidParams::new(3, 1.0, 1.0, 0.0, 0.5 + i as f64).unwrap();
            let f = spectral_total(&p).unwrap().f_total;
            assert!(f < prev);
            prev = f;
        }
    }

    #[test]
    fn matern_half_is_exponential() {
        for &x in &[1e-6, 0.1, 1.0, 1.99, 2.0, 5.0, 30.0] {
            let m = matern(0.5, x);
            assert!((m - (-x).exp()).abs() < 1e-12, "x={x}: {m}");
            let om = one_minus_matern(0.5, x);
            assert!((om - (-(-x).exp_m1())).abs() < 1e-12 * om.max(1e-300).max(1e-12));
        }
        // small x relative accuracy
        let x = 1e-8;
        assert!((one_minus_matern(0.5, x) / (-(-x).exp_m1()) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn matern_continuous_across_branch() {
        for &nu in &[0.1, 0.35, 0.8, 0.97] {
            let a = one_minus_matern(nu, 2.0 - 1e-12);
            let b = 1.0 - matern(nu, 2.0 + 1e-12);
            assert!((a - b).abs() < 1e-10, "ν={nu}: {a} vs {b}");
        }
    }

    #[test]
    fn correlators_at_zero_and_infinity() {
        let p = EuclidParams::new(3, 1.2, 0.4, 0.6, 1.0).unwrap();
        let (bl, bn) = correlators(&p, 0.0).unwrap();
        assert!((bl - p.b_total()).abs() < 1e-14);
        assert!((bn - p.b_total()).abs() < 1e-14);
        let (bl, bn) = correlators(&p, 1e3).unwrap();
        assert!(bl.abs() < 1e-2 * p.b_total() && bn.abs() < 1e-2 * p.b_total(), "{bl} {bn}");
    }

    #[test]
    fn far_branch_continuous() {
        for &(d, alpha) in &[(2u32, 0.7), (3, 1.5)] {
            let p = EuclidParams::new(d, alpha, 1.0, 0.5, 1.0).unwrap();
            let k = EuclidKernel::new(&p).unwrap();
            let lo = k.structure(FAR_MATERN * (1.0 - 1e-9)).unwrap();
            let hi = k.structure(FAR_MATERN * (1.0 + 1e-9)).unwrap();
            assert!((lo.q_n - hi.q_n).abs() < 1e-10 * lo.q_n, "{} vs {}", lo.q_n, hi.q_n);
        }
    }

    #[test]
    fn structure_matches_double_integral() {
        for &(d, alpha, r) in &[(2u32, 1.0, 0.1), (3, 1.5, 0.7), (3, 0.6, 2.0)] {
            let p = EuclidParams::new(d, alpha, 1.0, 0.0, 1.0).unwrap();
            let k = EuclidKernel::new(&p).unwrap();
            let s = k.structure(r).unwrap();
            let (f0, f2) = structure_double_integral(&p, r).unwrap();
            assert!((s.d_full - f0).abs() < 1e-5 * f0, "D: {} vs {f0}", s.d_full);
            // u₁²-weighted part is the gradient-longitudinal deficit Q_L
            assert!((s.q_l - f2).abs() < 1e-4 * f2, "Q_L: {} vs {f2}", s.q_l);
        }
    }

    #[test]
    fn alpha_constants_relations() {
        for &(alpha, d) in &[(0.5, 2u32), (1.0, 2), (1.5, 3), (1.9, 4)] {
            let c = alpha_constants(alpha, d).unwrap();
            let df = d as f64;
            assert!((c.alpha2 / c.alpha1 - (alpha + 1.0) / (df + alpha)).abs() < 1e-14);
            assert!((c.alpha1 - c.alpha2 - (df - 1.0) * c.alpha3).abs() < 1e-14);
            // I(d−2, α+2) = (α+1)/(d+α) I(d−2, α)
            let lhs = i_integral(df - 2.0, alpha + 2.0);
            let rhs = (alpha + 1.0) / (df + alpha) * i_integral(df - 2.0, alpha);
            assert!((lhs - rhs).abs() < 1e-14);
        }
        assert!(alpha_constants(2.0, 2).is_err());
    }

    #[test]
    fn one_minus_cos_moment_quadrature() {
        let spec = QuadratureSpec::with_tol(1e-9, 1e-9).levels(40);
        let f = |x: f64| (1.0 - x.cos()) / (x * x);
        let head =
            integrate_1d_with_breaks(f, 0.0, 200.0 * PI, &(1..200).map(|j| j as f64 * PI).collect::<Vec<_>>(), &spec)
                .unwrap();
        // ∫_R^∞ (1 − cos x)/x² = 1/R − ∫_R^∞ cos x/x²; the latter is O(1/R²) at R = 200π
        let tail = 1.0 / (200.0 * PI);
        assert!((head.value + tail - one_minus_cos_moment(1.0)).abs() < 1e-5);
        assert!((one_minus_cos_moment(1.0) - FRAC_PI_2).abs() < 1e-14);
    }

    #[test]
    fn alpha1_dual_path() {
        // closed form against the measured limit D(r)/r^α (production route)
        // and against the direct double integral at small r
        for &(alpha, d) in &[(1.0, 2u32), (0.7, 3), (1.4, 2)] {
            let c = alpha_constants(alpha, d).unwrap();
            let p = EuclidParams::new(d, alpha, 1.0, 0.0, 1.0).unwrap();
            let k = EuclidKernel::new(&p).unwrap();
            let r = 1e-6;
            let lim = k.d_full(r) / r.powf(alpha);
            assert!((lim / c.alpha1 - 1.0).abs() < 1e-3, "α={alpha} d={d}: {lim} vs {}", c.alpha1);
        }
        let c = alpha_constants(1.0, 2).unwrap();
        let p = EuclidParams::new(2, 1.0, 1.0, 0.0, 1.0).unwrap();
        let r = 1e-3;
        let (f0, _) = structure_double_integral(&p, r).unwrap();
        assert!((f0 / r / c.alpha1 - 1.0).abs() < 1e-2);
    }

    #[test]
    fn small_r_longitudinal_law() {
        let p = EuclidParams::new(2, 1.0, 1.0, 0.0, 1.0).unwrap();
        let (bl, _) = correlators(&p, 0.1).unwrap();
        let c = alpha_constants(1.0, 2).unwrap();
        let law = c.alpha1 * 2.0 / 3.0 * 0.1;
        assert!(((p.b_total() - bl) / law - 1.0).abs() < 0.1);
    }

    #[test]
    fn covariance_matrix_structure() {
        let p = EuclidParams::new(3, 1.3, 0.3, 0.7, 1.0).unwrap();
        let c0 = covariance_matrix(&p, &[0.0, 0.0, 0.0]).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { p.b_total() } else { 0.0 };
                assert!((c0[i][j] - want).abs() < 1e-14);
            }
        }
        let z = [0.3, -0.2, 0.5];
        let r = (0.09f64 + 0.04 + 0.25).sqrt();
        let c = covariance_matrix(&p, &z).unwrap();
        let (bl, bn) = correlators(&p, r).unwrap();
        for i in 0..3 {
            let cz: f64 = (0..3).map(|j| c[i][j] * z[j]).sum();
            assert!((cz - bl * z[i]).abs() < 1e-14);
            for j in 0..3 {
                assert_eq!(c[i][j], c[j][i]);
            }
        }
        let tr = c[0][0] + c[1][1] + c[2][2];
        assert!((tr - bl - 2.0 * bn).abs() < 1e-14);
    }

    #[test]
    fn spectral_density_projectors() {
        let k = [0.4, -1.1, 0.7];
        let p = EuclidParams::new(3, 1.0, 0.0, 1.0, 1.0).unwrap();
        let c = spectral_density(&p, &k).unwrap();
        for row in &c {
            let v: f64 = row.iter().zip(&k).map(|(a, b)| a * b).sum();
            assert!(v.abs() < 1e-16);
        }
        let p = EuclidParams::new(3, 1.0, 1.0, 0.0, 1.0).unwrap();
        let c = spectral_density(&p, &k).unwrap();
        let v = [1.1, 0.4, 0.0]; // v ⊥ k
        for row in &c {
            let w: f64 = row.iter().zip(&v).map(|(a, b)| a * b).sum();
            assert!(w.abs() < 1e-16);
        }
        let p = EuclidParams::new(2, 1.0, 1.0, 1.0, 1.0).unwrap();
        let c = spectral_density(&p, &[0.3, 0.8]).unwrap();
        assert!(c[0][1].abs() < 1e-16 && (c[0][0] - c[1][1]).abs() < 1e-16);
        assert!(spectral_density(&p, &[0.0, 0.0]).is_err());
    }

    #[test]
    fn covariance_is_fourier_transform_of_spectral_density() {
        // d = 2 lattice Riemann sum of ∫ cos(k·z) Ĉ(k) dk
        let p = EuclidParams::new(2, 1.5, 0.6, 0.4, 1.0).unwrap();
        let dk = 0.05;
        let n = 1200i64;
        for &r in &[0.0, 0.5, 1.5, 3.0] {
            let z = [r, 0.0];
            let mut acc = [[0.0; 2]; 2];
            for i in -n..=n {
                for j in -n..=n {
                    if i == 0 && j == 0 {
                        continue;
                    }
                    let k = [i as f64 * dk, j as f64 * dk];
                    let c = spectral_density(&p, &k).unwrap();
                    let ph = (k[0] * z[0] + k[1] * z[1]).cos() * dk * dk;
                    for a in 0..2 {
                        for b in 0..2 {
                            acc[a][b] += c[a][b] * ph;
                        }
                    }
                }
            }
            let cm = covariance_matrix(&p, &z).unwrap();
            for a in 0..2 {
                let tol = 0.05 * p.b_total();
                assert!((acc[a][a] - cm[a][a]).abs() < tol, "r={r}: {} vs {}", acc[a][a], cm[a][a]);
            }
        }
    }

    #[test]
    fn coefficient_small_r_laws() {
        for &(d, alpha, eta) in &[(2u32, 1.0, 0.0), (3, 0.6, 0.5), (2, 1.3, 0.8), (4, 1.2, 0.3)] {
            let p = EuclidParams::from_eta(d, alpha, eta, 1.0).unwrap();
            let c = distance_coeffs_rd(&p).unwrap();
            let mu = (d as f64 - 1.0 + alpha * eta) / (alpha + 1.0 - alpha * eta);
            let r = 1e-4;
            let (s2, b) = c.both(r).unwrap();
            assert!((r * b / s2 / mu - 1.0).abs() < 0.01, "d={d} α={alpha} η={eta}");
            let k = alpha_constants(alpha, d).unwrap();
            let law = k.alpha1 / (d as f64 + alpha) * (alpha + 1.0 - alpha * eta) * r.powf(alpha);
            assert!((s2 / law - 1.0).abs() < 0.01);
            let (s2b, _) = c.both(1e-1).unwrap();
            let (s2a, _) = c.both(1e-3).unwrap();
            let slope = (s2b / s2a).ln() / 100f64.ln();
            assert!((slope - alpha).abs() < 0.05, "slope {slope}");
        }
    }

    #[test]
    fn sigma2_tends_to_b_at_infinity() {
        let p = EuclidParams::from_eta(3, 1.0, 0.4, 1.0).unwrap();
        let c = distance_coeffs_rd(&p).unwrap();
        let s2 = c.sigma2(1e3).unwrap();
        assert!((s2 / p.b_total() - 1.0).abs() < 1e-2);
        // b(r) r/(d−1) → B as well
        let b = c.drift(1e3).unwrap();
        assert!((b * 1e3 / 2.0 / p.b_total() - 1.0).abs() < 1e-2);
    }

    proptest! {
        #[test]
        fn spectral_density_psd(k0 in -3.0f64..3.0, k1 in -3.0f64..3.0, k2 in 0.01f64..3.0,
                                a in 0.0f64..2.0, b in 0.01f64..2.0) {
            let p = EuclidParams::new(3, 1.1, a, b, 1.0).unwrap();
            let c = spectral_density(&p, &[k0, k1, k2]).unwrap();
            // PSD via Sylvester on the symmetric 3x3 (all principal minors ≥ 0 up to rounding)
            let m1 = c[0][0];
            let m2 = c[0][0] * c[1][1] - c[0][1] * c[1][0];
            let det = c[0][0] * (c[1][1] * c[2][2] - c[1][2] * c[2][1])
                - c[0][1] * (c[1][0] * c[2][2] - c[1][2] * c[2][0])
                + c[0][2] * (c[1][0] * c[2][1] - c[1][1] * c[2][0]);
            prop_assert!(m1 >= -1e-12 && m2 >= -1e-12 && det >= -1e-12);
            // quadratic form on random direction
            let v = [k2 - k1, k0 + 0.3, -k1];
            let q: f64 = (0..3).map(|i| (0..3).map(|j| v[i] * c[i][j] * v[j]).sum::<f64>()).sum();
            prop_assert!(q >= -1e-12);
        }
    }
}
