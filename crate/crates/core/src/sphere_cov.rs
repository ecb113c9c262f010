//! Isotropic Sobolev covariance on `S^d` and the induced two-point distance
//! diffusion.
//!
//! The covariance is built from
//! `G(φ) = Σ_{l≥2} (l−1)^{−(α+1)} γ_l(cos φ)`.
//! Besides the truncated series, `G` has the representation
//! `G(φ) = (1/c_d) ∫_0^π Re Li_{α+1}(z) sin^d θ dθ`, `z = cos φ − i sin φ cos θ`,
//! which follows from the integral form of `γ_l`. Differentiating under the
//! integral gives `G′` with integrand `Re[Li_α(z)/z · ∂_φ z]`. Both are
//! evaluated by one vector quadrature, with `G(0) − G(φ)` integrated directly
//! as `ζ(α+1) − Li_{α+1}(z)` so that no cancellation occurs near `φ = 0`.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coeffs::{CoefficientPair, Squared};
use crate::error::{domain, FlowError, Result};
use crate::specfun::{
    c_d_norm, gamma_real, gamma_table, integrate_1d, integrate_1d_vec, integrate_2d, Polylog, QuadratureSpec, Rect,
    Upper,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphereParams {
    pub d: u32,
    pub alpha: f64,
    pub a: f64,
    pub b: f64,
}

impl SphereParams {
    pub fn new(d: u32, alpha: f64, a: f64, b: f64) -> Result<Self> {
        let p = Self { d, alpha, a, b };
        p.validate()?;
        Ok(p)
    }

    /// Parameters with `a + b = 1` and solenoidal fraction `eta`.
    pub fn from_eta(d: u32, alpha: f64, eta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(FlowError::InvalidParams(format!("eta = {eta} outside [0, 1]")));
        }
        Self::new(d, alpha, 1.0 - eta, eta)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d < 2 {
            return Err(FlowError::InvalidParams("sphere dimension d must be >= 2".into()));
        }
        if !(self.alpha > 0.0) || !self.alpha.is_finite() {
            return Err(FlowError::InvalidParams(format!("alpha = {} must be > 0", self.alpha)));
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
}

/// A truncated series with its rigorous tail bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesValue {
    pub value: f64,
    pub tail_bound: f64,
    pub converged: bool,
}

/// Partial sum of `G` up to `l = l_max` with tail bound
/// `Σ_{l>l_max} (l−1)^{−(α+1)}`; `converged` only if the bound is below `tol`.
pub fn g_series(alpha: f64, d: u32, phi: f64, l_max: usize, tol: f64) -> Result<SeriesValue> {
    if l_max < 2 {
        return domain("l_max must be >= 2");
    }
    if !(alpha > 0.0) || !(0.0..=PI).contains(&phi) {
        return domain(format!("bad arguments alpha = {alpha}, φ = {phi}"));
    }
    if d < 2 {
        return domain("d must be >= 2");
    }
    let mut g = vec![0.0; l_max];
    gamma_table(d, phi.cos(), &mut g);
    let s = alpha + 1.0;
    let mut value = 0.0;
    let mut head = 0.0;
    for l in (2..=l_max).rev() {
        let w = ((l - 1) as f64).powf(-s);
        value += w * g[l - 1];
        head += w;
    }
    let tail_bound = (crate::specfun::zeta_real(s) - head).max(0.0);
    Ok(SeriesValue { value, tail_bound, converged: tail_bound < tol })
}

/// Term-wise differentiated series `Σ (l−1)^{−(α+1)} d/dφ γ_l(cos φ)`.
/// Converges only for `α` large enough relative to `d`; used as an oracle.
pub fn g_prime_series(alpha: f64, d: u32, phi: f64, l_max: usize) -> Result<f64> {
    if !(phi > 0.0 && phi < PI) || l_max < 2 {
        return domain("g_prime_series needs interior φ and l_max >= 2");
    }
    let t = phi.cos();
    let mut g = vec![0.0; l_max];
    gamma_table(d + 2, t, &mut g);
    let df = d as f64;
    let mut sum = 0.0;
    for l in (2..=l_max).rev() {
        let lf = l as f64;
        let deriv = (lf - 1.0) * (lf + df) / (df + 2.0) * g[l - 2];
        sum += (lf - 1.0).powf(-(alpha + 1.0)) * deriv;
    }
    Ok(-phi.sin() * sum)
}

/// `G(φ)`, `G(0) − G(φ)` and `G′(φ)` from one quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GValues {
    pub phi: f64,
    pub g: f64,
    pub delta: f64,
    pub g_prime: f64,
    pub err_estimate: f64,
}

/// Evaluator for `G` and its derivative at a fixed `(α, d)`.
#[derive(Debug, Clone)]
pub struct SphereKernel {
    alpha: f64,
    d: u32,
    li_s: Polylog,
    li_a: Polylog,
    c_d: f64,
    // ΔG is integrated as ΔG/φ^e and G′ as G′/φ^{e−1}, e = min(α, 2)
    scale_exp: f64,
    spec: QuadratureSpec,
}

impl SphereKernel {
    pub fn new(alpha: f64, d: u32) -> Result<Self> {
        if !(alpha > 0.0) || d < 2 {
            return Err(FlowError::InvalidParams(format!("kernel needs α > 0, d >= 2 ({alpha}, {d})")));
        }
        Ok(Self {
            alpha,
            d,
            li_s: Polylog::new(alpha + 1.0)?,
            li_a: Polylog::new(alpha)?,
            c_d: c_d_norm(d)?,
            scale_exp: alpha.min(2.0),
            spec: QuadratureSpec::with_tol(1e-14, 1e-11).levels(40),
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    /// `G(0) = ζ(α+1)`.
    pub fn g0(&self) -> f64 {
        self.li_s.zeta()
    }

    pub fn eval(&self, phi: f64) -> Result<GValues> {
        if !(phi > 0.0 && phi <= PI) {
            if phi == 0.0 {
                return Ok(GValues { phi, g: self.g0(), delta: 0.0, g_prime: 0.0, err_estimate: 0.0 });
            }
            return domain(format!("φ = {phi} outside [0, π]"));
        }
        let (sf, cf) = phi.sin_cos();
        let e = self.scale_exp;
        let inv_d = phi.powf(-e);
        let inv_p = phi.powf(1.0 - e);
        let d = self.d as i32;
        // θ = π/2 − ψ; the integrand is even about θ = π/2
        let f = |psi: f64| {
            let (sp, cp) = psi.sin_cos();
            let w = cp.powi(d);
            let mu = Complex64::new(0.5 * (-(sf * cp) * (sf * cp)).ln_1p(), (-sf * sp).atan2(cf));
            let g = self.li_s.li_log(mu).re;
            let dg = self.li_s.zeta_minus_li_log(mu).re;
            let dz = Complex64::new(-sf, -cf * sp);
            let gp = (self.li_a.li_over_w_log(mu) * dz).re;
            [g * w, dg * w * inv_d, gp * w * inv_p]
        };
        let breaks: Vec<f64> = [0.05, 0.5, 5.0, 50.0].iter().map(|k| k * phi).filter(|&x| x < FRAC_PI_2).collect();
        let r = integrate_1d_vec(f, 0.0, FRAC_PI_2, &breaks, &self.spec)?;
        let norm = 2.0 / self.c_d;
        let out = GValues {
            phi,
            g: r.value[0] * norm,
            delta: r.value[1] * norm / inv_d,
            g_prime: r.value[2] * norm / inv_p,
            err_estimate: r.err_estimate.iter().cloned().fold(0.0, f64::max) * norm,
        };
        if !r.converged {
            return Err(FlowError::NonConvergence { value: out.g, err_estimate: out.err_estimate });
        }
        Ok(out)
    }

    /// `(G(0) − G(φ))/φ^{min(α,2)}` and `G′(φ)/φ^{min(α,2)−1}`.
    pub fn scaled(&self, phi: f64) -> Result<(f64, f64, f64)> {
        let v = self.eval(phi)?;
        let e = self.scale_exp;
        Ok((v.g, v.delta / phi.powf(e), v.g_prime / phi.powf(e - 1.0)))
    }
}

/// `G(φ)` by the production quadrature.
pub fn g_value(alpha: f64, d: u32, phi: f64) -> Result<f64> {
    SphereKernel::new(alpha, d)?.eval(phi).map(|v| v.g)
}

/// `G′(φ)` by the production quadrature.
pub fn g_prime(alpha: f64, d: u32, phi: f64) -> Result<f64> {
    if !(phi > 0.0 && phi < PI) {
        return domain("G′ needs φ in (0, π)");
    }
    SphereKernel::new(alpha, d)?.eval(phi).map(|v| v.g_prime)
}

/// `G′(φ)` from the double integral
/// `(1/(Γ(α)c_d)) ∫_0^π ∫_0^∞ Re[e^{−s} ∂_φ z / (1 − e^{−s} z)] s^{α−1} sin^d θ ds dθ`.
/// Slow; serves as an oracle for [`g_prime`].
pub fn g_prime_double_integral(alpha: f64, d: u32, phi: f64, quad: &QuadratureSpec) -> Result<f64> {
    if !(phi > 0.0 && phi < PI) {
        return domain("G′ needs φ in (0, π)");
    }
    let (sf, cf) = phi.sin_cos();
    let di = d as i32;
    let f = |s: f64, th: f64| {
        let (st, ct) = th.sin_cos();
        let z = Complex64::new(cf, -sf * ct);
        let dz = Complex64::new(-sf, -cf * ct);
        let es = (-s).exp();
        let v = es * dz / (Complex64::new(1.0, 0.0) - es * z);
        v.re * s.powf(alpha - 1.0) * st.powi(di)
    };
    let spec = QuadratureSpec { endpoint_power_hint: Some(alpha - 1.0), ..*quad };
    let r = integrate_2d(f, Rect { x: (0.0, Upper::Infinity), y: (0.0, PI.into()) }, &spec)?;
    let v = r.value / (gamma_real(alpha) * c_d_norm(d)?);
    if !r.converged {
        return Err(FlowError::NonConvergence { value: v, err_estimate: r.err_estimate });
    }
    Ok(v)
}

fn check_singular_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return domain(format!("small-angle constant needs α in (0, 2), got {alpha}"));
    }
    Ok(())
}

/// The small-angle constant
/// `K = ∫_0^π ∫_0^∞ cos²θ/(t²+cos²θ) t^{α−1} sin^d θ dt dθ / (Γ(α+1) c_d)`,
/// with the inner integral reduced to `|cos θ|^α π/(2 sin(πα/2))`.
pub fn k_constant(alpha: f64, d: u32) -> Result<f64> {
    check_singular_alpha(alpha)?;
    let di = d as i32;
    // 2∫_0^{π/2} sin^α ψ cos^d ψ dψ after θ = π/2 − ψ
    let spec = QuadratureSpec::with_tol(1e-15, 1e-11).hint(alpha).levels(40);
    let r = integrate_1d(|psi: f64| psi.sin().powf(alpha) * psi.cos().powi(di), 0.0, FRAC_PI_2, &spec)?.require()?;
    let inner = PI / (2.0 * (0.5 * PI * alpha).sin());
    Ok(inner * 2.0 * r / (gamma_real(alpha + 1.0) * c_d_norm(d)?))
}

/// `k_constant` is ill-conditioned near the ends of `(0, 2)`.
pub fn k_constant_well_conditioned(alpha: f64) -> bool {
    (0.05..=1.95).contains(&alpha)
}

/// [`k_constant`] by full two-dimensional quadrature.
pub fn k_constant_2d(alpha: f64, d: u32, quad: &QuadratureSpec) -> Result<f64> {
    check_singular_alpha(alpha)?;
    let di = d as i32;
    // outer variable ψ = π/2 − θ over [0, π/2], doubled
    let f = |t: f64, psi: f64| {
        let c2 = psi.sin().powi(2);
        if c2 == 0.0 {
            return 0.0;
        }
        c2 / (t * t + c2) * t.powf(alpha - 1.0) * psi.cos().powi(di)
    };
    let spec = QuadratureSpec { endpoint_power_hint: Some(alpha - 1.0), ..*quad };
    let r = integrate_2d(f, Rect { x: (0.0, Upper::Infinity), y: (0.0, FRAC_PI_2.into()) }, &spec)?;
    let v = 2.0 * r.value / (gamma_real(alpha + 1.0) * c_d_norm(d)?);
    if !r.converged {
        return Err(FlowError::NonConvergence { value: v, err_estimate: r.err_estimate });
    }
    Ok(v)
}

/// Measured small-angle constant `Λ = lim (G(0) − G(φ))/φ^α`, with the two
/// candidate closed forms it is compared to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SmallAngleConstant {
    pub lambda: f64,
    pub err_estimate: f64,
    pub k: f64,
    pub k_times_g0: f64,
    /// true when `Λ` is closer to `K` than to `K·G(0)`
    pub matches_k: bool,
}

/// Richardson extrapolation of `(G(0) − G(φ))/φ^α` over `φ = φ₀ 2^{−j}`,
/// eliminating the correction exponents `2−α, 2, 4−α`.
pub fn measure_lambda(alpha: f64, d: u32) -> Result<SmallAngleConstant> {
    check_singular_alpha(alpha)?;
    let kern = SphereKernel::new(alpha, d)?;
    let phi0 = 1e-2;
    let levels = 7;
    let mut col: Vec<f64> =
        (0..levels).map(|j| kern.scaled(phi0 * 0.5f64.powi(j)).map(|s| s.1)).collect::<Result<_>>()?;
    let exps = [2.0 - alpha, 2.0, 4.0 - alpha];
    let mut prev_best = *col.last().expect("levels > 0");
    let mut err = f64::INFINITY;
    for &e in &exps {
        let f = 2f64.powf(e);
        col = col.windows(2).map(|w| (f * w[1] - w[0]) / (f - 1.0)).collect();
        let best = *col.last().expect("non-empty column");
        err = (best - prev_best).abs();
        prev_best = best;
    }
    let k = k_constant(alpha, d)?;
    let kg = k * kern.g0();
    Ok(SmallAngleConstant {
        lambda: prev_best,
        err_estimate: err,
        k,
        k_times_g0: kg,
        matches_k: (prev_best - k).abs() < (prev_best - kg).abs(),
    })
}

/// Covariance functions `(α(cos φ), β(cos φ))`.
pub fn alpha_beta(p: &SphereParams, phi: f64) -> Result<(f64, f64)> {
    p.validate()?;
    if !(phi > 0.0 && phi < PI) {
        return domain("alpha_beta needs φ in (0, π)");
    }
    let v = SphereKernel::new(p.alpha, p.d)?.eval(phi)?;
    Ok(alpha_beta_from(p, phi, v.g, v.g_prime))
}

fn alpha_beta_from(p: &SphereParams, phi: f64, g: f64, gp: f64) -> (f64, f64) {
    let (s, c) = phi.sin_cos();
    let dm1 = p.d as f64 - 1.0;
    let al = p.a * g + p.b * (c * g + s / dm1 * gp);
    let be = -p.a / s * gp + p.b * (-g + c / (dm1 * s) * gp);
    (al, be)
}

/// Distance-diffusion coefficients on `(0, π)`.
#[derive(Debug, Clone)]
pub struct SphereCoeffs {
    params: SphereParams,
    kernel: SphereKernel,
}

impl SphereCoeffs {
    pub fn params(&self) -> &SphereParams {
        &self.params
    }

    pub fn kernel(&self) -> &SphereKernel {
        &self.kernel
    }

    /// `α(1) = (a+b)G(0)`.
    pub fn alpha_one(&self) -> f64 {
        (self.params.a + self.params.b) * self.kernel.g0()
    }
}

/// `σ²(φ) = α(1) − α(cos φ) cos φ + β(cos φ) sin²φ` and
/// `b(φ) = (d−1)(α(1) cos φ − α(cos φ))/sin φ`, rearranged to avoid
/// cancellation:
/// `σ² = b·ΔG + a[ΔG + G(1−cos φ) − G′ sin φ]`,
/// `b(φ) = (d−1)/sin φ · {a[ΔG − G(0)(1−cos φ)] + b[cos φ ΔG − sin φ G′/(d−1)]}`.
pub fn distance_coeffs(p: &SphereParams) -> Result<SphereCoeffs> {
    p.validate()?;
    Ok(SphereCoeffs { params: *p, kernel: SphereKernel::new(p.alpha, p.d)? })
}

/// Coefficients of `ψ²` on `(0, π²)`.
pub fn squared_coeffs(p: &SphereParams) -> Result<Squared<SphereCoeffs>> {
    Ok(Squared::new(distance_coeffs(p)?))
}

impl CoefficientPair for SphereCoeffs {
    fn sigma2(&self, x: f64) -> Result<f64> {
        self.both(x).map(|v| v.0)
    }

    fn drift(&self, x: f64) -> Result<f64> {
        self.both(x).map(|v| v.1)
    }

    fn domain(&self) -> (f64, f64) {
        (0.0, PI)
    }

    fn both(&self, phi: f64) -> Result<(f64, f64)> {
        self.check_interior(phi)?;
        let v = self.kernel.eval(phi)?;
        let SphereParams { a, b, d, .. } = self.params;
        let dm1 = d as f64 - 1.0;
        let (s, c) = phi.sin_cos();
        let omc = 2.0 * (0.5 * phi).sin().powi(2);
        let sigma2 = b * v.delta + a * (v.delta + v.g * omc - v.g_prime * s);
        let drift = dm1 / s * (a * (v.delta - self.kernel.g0() * omc) + b * (c * v.delta - s * v.g_prime / dm1));
        Ok((sigma2, drift))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::riemann_zeta;

    #[test]
    fn series_examples() {
        let v = g_series(1.5, 3, 0.0, 5000, 1.0).unwrap();
        let z = riemann_zeta(2.5).unwrap();
        assert!((v.value + v.tail_bound - z).abs() < 1e-12);
        let v = g_series(1.0, 2, 1.0, 5000, 1e-6).unwrap();
        assert!(!v.converged);
        assert!(v.value.abs() <= riemann_zeta(2.0).unwrap());
    }

    #[test]
    fn g_matches_long_brute_force_sum() {
        // d=2, α=1, φ=π/2 against a 10^6-term direct summation
        let brute = g_series(1.0, 2, FRAC_PI_2, 1_000_000, 1.0).unwrap().value;
        let q = g_value(1.0, 2, FRAC_PI_2).unwrap();
        assert!((q - brute).abs() < 1e-6, "{q} vs {brute}");
    }

    #[test]
    fn g_matches_series_where_it_converges_fast() {
        for &(alpha, d) in &[(2.5, 2u32), (3.0, 3), (1.7, 4)] {
            for &phi in &[0.3, 1.2, 2.5] {
                let s = g_series(alpha, d, phi, 200_000, 1.0).unwrap();
                let q = g_value(alpha, d, phi).unwrap();
                assert!((q - s.value).abs() < 1e-7 + s.tail_bound * 0.01, "α={alpha} d={d} φ={phi}");
            }
        }
    }

    #[test]
    fn g_at_zero_and_bounded() {
        let k = SphereKernel::new(1.3, 3).unwrap();
        assert!((k.eval(0.0).unwrap().g - riemann_zeta(2.3).unwrap()).abs() < 1e-13);
        for i in 1..30 {
            let v = k.eval(i as f64 * 0.1).unwrap();
            assert!(v.g.abs() <= k.g0());
            assert!((v.delta - (k.g0() - v.g)).abs() < 1e-10);
        }
    }

    #[test]
    fn g_prime_matches_differentiated_series() {
        let s = g_prime_series(1.5, 2, FRAC_PI_2, 2_000_000).unwrap();
        let q = g_prime(1.5, 2, FRAC_PI_2).unwrap();
        assert!((q - s).abs() < 1e-6, "{q} vs {s}");
    }

    #[test]
    fn g_prime_matches_finite_difference() {
        let k = SphereKernel::new(0.7, 3).unwrap();
        for &phi in &[0.05, 0.4, 1.5, 2.8] {
            let h = 1e-5 * phi;
            let fd = (k.eval(phi + h).unwrap().g - k.eval(phi - h).unwrap().g) / (2.0 * h);
            let an = k.eval(phi).unwrap().g_prime;
            assert!((fd - an).abs() < 1e-6 * an.abs().max(1.0), "φ={phi}: {fd} vs {an}");
        }
    }

    #[test]
    fn g_prime_matches_double_integral() {
        let q = QuadratureSpec::with_tol(1e-9, 1e-9).levels(30);
        for &(alpha, d, phi) in &[(1.5, 2u32, FRAC_PI_2), (0.8, 3, 0.7)] {
            let a = g_prime_double_integral(alpha, d, phi, &q).unwrap();
            let b = g_prime(alpha, d, phi).unwrap();
            assert!((a - b).abs() < 1e-6, "α={alpha} d={d}: {a} vs {b}");
        }
    }

    #[test]
    fn g_prime_negative_near_zero() {
        for &alpha in &[0.5, 1.0, 1.5] {
            for &phi in &[1e-6, 1e-3, 1e-1] {
                assert!(g_prime(alpha, 2, phi).unwrap() < 0.0);
            }
        }
    }

    #[test]
    fn g_prime_small_angle_law() {
        // G′(φ)/φ^{α−1} → −αΛ with Λ the measured constant
        let lam = measure_lambda(1.0, 3).unwrap().lambda;
        let v = g_prime(1.0, 3, 0.01).unwrap();
        assert!(((v / -lam) - 1.0).abs() < 0.1);
    }

    #[test]
    fn k_constant_values() {
        assert!((k_constant(1.0, 2).unwrap() - 2.0 / 3.0).abs() < 1e-12);
        let q = QuadratureSpec::with_tol(1e-11, 1e-11).levels(40);
        let k2 = k_constant_2d(1.0, 2, &q).unwrap();
        assert!((k2 - 2.0 / 3.0).abs() < 1e-8, "{k2}");
        let a = k_constant(1.0, 3).unwrap();
        let b = k_constant_2d(1.0, 3, &q).unwrap();
        assert!((a - b).abs() < 1e-8);
        // closed form via the Beta function: ∫|cos|^α sin^d = B((α+1)/2, (d+1)/2)
        for &(alpha, d) in &[(0.3, 2u32), (1.2, 3), (1.8, 5)] {
            let kb = crate::specfun::beta_fn((alpha + 1.0) / 2.0, (d as f64 + 1.0) / 2.0).unwrap() * PI
                / (2.0 * (0.5 * PI * alpha).sin())
                / (gamma_real(alpha + 1.0) * c_d_norm(d).unwrap());
            let k = k_constant(alpha, d).unwrap();
            assert!(k > 0.0);
            assert!((k - kb).abs() < 1e-10 * kb);
        }
        assert!(k_constant(2.0, 2).is_err());
    }

    #[test]
    fn lambda_equals_k() {
        for &(alpha, d) in &[(0.5, 2u32), (1.0, 2), (1.5, 2), (1.0, 3)] {
            let m = measure_lambda(alpha, d).unwrap();
            assert!(m.matches_k, "{m:?}");
            assert!((m.lambda - m.k).abs() < 1e-3 * m.k, "{m:?}");
        }
    }

    #[test]
    fn alpha_beta_examples() {
        let p = SphereParams::new(3, 1.2, 1.0, 0.0).unwrap();
        let k = SphereKernel::new(1.2, 3).unwrap();
        let phi = 0.9;
        let v = k.eval(phi).unwrap();
        let (al, be) = alpha_beta(&p, phi).unwrap();
        assert!((al - v.g).abs() < 1e-14);
        assert!((be + v.g_prime / phi.sin()).abs() < 1e-13);

        let p = SphereParams::new(2, 1.2, 0.0, 1.0).unwrap();
        let k = SphereKernel::new(1.2, 2).unwrap();
        let v = k.eval(FRAC_PI_2).unwrap();
        let (al, be) = alpha_beta(&p, FRAC_PI_2).unwrap();
        assert!((al - v.g_prime).abs() < 1e-12);
        assert!((be + v.g).abs() < 1e-12);

        let p = SphereParams::new(2, 1.2, 0.4, 0.6).unwrap();
        let (al, _) = alpha_beta(&p, 1e-7).unwrap();
        assert!((al - k.g0()).abs() < 1e-5);
    }

    #[test]
    fn coefficients_match_direct_formulas() {
        let p = SphereParams::new(3, 1.4, 0.3, 0.7).unwrap();
        let c = distance_coeffs(&p).unwrap();
        for &phi in &[0.2, 1.0, 2.0, 3.0] {
            let (al, be) = alpha_beta(&p, phi).unwrap();
            let a1 = c.alpha_one();
            let (s, co) = phi.sin_cos();
            let s2 = a1 - al * co + be * s * s;
            let b = 2.0 / s * (a1 * co - al);
            let (s2c, bc) = c.both(phi).unwrap();
            assert!((s2 - s2c).abs() < 1e-10, "φ={phi}");
            assert!((b - bc).abs() < 1e-9 * b.abs().max(1.0), "φ={phi}");
        }
    }

    #[test]
    fn coefficient_small_angle_laws() {
        for &(d, alpha, eta) in &[(2u32, 1.0, 0.0), (2, 1.3, 0.3), (3, 0.5, 0.8), (4, 1.2, 0.5)] {
            let p = SphereParams::from_eta(d, alpha, eta).unwrap();
            let c = distance_coeffs(&p).unwrap();
            let mu = (d as f64 - 1.0 + alpha * eta) / (alpha + 1.0 - alpha * eta);
            let phi = 1e-4;
            let (s2, b) = c.both(phi).unwrap();
            assert!((phi * b / s2 / mu - 1.0).abs() < 0.01, "d={d} α={alpha} η={eta}: {}", phi * b / s2 / mu);
            let (s2b, bb) = c.both(1e-2).unwrap();
            let slope_s = (s2b / s2).ln() / 100f64.ln();
            let slope_b = (bb / b).ln() / 100f64.ln();
            assert!((slope_s - alpha).abs() < 0.05, "σ² slope {slope_s}");
            assert!((slope_b - (alpha - 1.0)).abs() < 0.05, "b slope {slope_b}");
            // σ²/φ^α → Λ (α+1−αη)
            let lam = measure_lambda(alpha, d).unwrap().lambda;
            let ratio = c.sigma2(1e-6).unwrap() / 1e-6f64.powf(alpha) / (lam * (alpha + 1.0 - alpha * eta));
            assert!((ratio - 1.0).abs() < 0.02, "ratio {ratio}");
        }
    }

    #[test]
    fn sigma2_positive_and_far_end_nondegenerate() {
        for &(d, alpha, eta) in &[(2u32, 0.3, 0.0), (2, 1.9, 1.0), (3, 1.0, 0.5), (5, 2.5, 0.2)] {
            let p = SphereParams::from_eta(d, alpha, eta).unwrap();
            let c = distance_coeffs(&p).unwrap();
            for i in 1..=200 {
                let phi = PI * i as f64 / 201.0;
                assert!(c.sigma2(phi).unwrap() > 0.0);
            }
            // α(1) + α(−1) > 0
            let k = c.kernel();
            let gpi = k.eval(PI).unwrap().g;
            let alpha_m1 = p.a * gpi - p.b * gpi; // cos π = −1, sin π = 0
            assert!(c.alpha_one() + alpha_m1 > 0.0);
        }
    }

    #[test]
    fn squared_generator_matches_change_of_variables() {
        let p = SphereParams::new(2, 1.0, 1.0, 0.0).unwrap();
        let c = distance_coeffs(&p).unwrap();
        let sq = squared_coeffs(&p).unwrap();
        let x: f64 = 0.01;
        let psi = x.sqrt();
        let (ts2, tb) = sq.both(x).unwrap();
        let (s2, b) = c.both(psi).unwrap();
        assert!((tb - 2.0 * s2 - 2.0 * psi * b).abs() < 1e-15);
        // L' f(x) vs L (f∘ψ²)(ψ) by central differences in ψ
        for k in 1..4 {
            let f = |y: f64| y.powi(k);
            let g = |r: f64| f(r * r);
            let h = 1e-4;
            let l = s2 * (g(psi + h) - 2.0 * g(psi) + g(psi - h)) / (h * h) + b * (g(psi + h) - g(psi - h)) / (2.0 * h);
            let kf = k as f64;
            let lp = ts2 * kf * (kf - 1.0) * x.powi(k - 2) + tb * kf * x.powi(k - 1);
            assert!((l - lp).abs() < 1e-5 * lp.abs().max(1e-3), "k={k}: {l} vs {lp}");
        }
        assert!(sq.sigma2(1e-12).unwrap() < 1e-10);
    }
}
