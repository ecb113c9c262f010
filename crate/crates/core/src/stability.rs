//! First Lyapunov exponent of the smooth (`α > 2`) flows and the
//! compressibility at which it changes sign.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::euclid_cov::EuclidParams;
use crate::specfun::{beta_fn, integrate_1d, riemann_zeta, zeta_real, QuadratureSpec};

/// A Lyapunov exponent; `formal` marks `α ≤ 2`, where the flow is not a
/// flow of diffeomorphisms and the formula is only evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lyapunov {
    pub value: f64,
    pub formal: bool,
}

fn check_weights(a: f64, b: f64, d: u32) -> Result<()> {
    if d < 2 {
        return domain(format!("dimension must be at least 2, got {d}"));
    }
    if !(a >= 0.0 && b >= 0.0) {
        return domain(format!("weights must be non-negative, got a = {a}, b = {b}"));
    }
    Ok(())
}

/// `λ₁` on `S^d`:
/// `((d−4)a+db)/(d+2)·[ζ(α−1) + (d−1)ζ(α)] − d(2(d−1)a+db)/(d+2)·ζ(α+1)`.
pub fn lyapunov_sphere(alpha: f64, a: f64, b: f64, d: u32) -> Result<Lyapunov> {
    check_weights(a, b, d)?;
    if !(alpha > 1.0) {
        return domain(format!("λ₁ needs ζ(α−1), so α > 1; got {alpha}"));
    }
    let df = d as f64;
    let c1 = (df - 4.0) * a + df * b;
    let c2 = 2.0 * (df - 1.0) * a + df * b;
    if alpha == 2.0 {
        return domain("λ₁ diverges at α = 2 (pole of ζ(α−1))");
    }
    // for α < 2 the analytic continuation of ζ(α−1) is used
    let zm = zeta_real(alpha - 1.0);
    let value =
        c1 / (df + 2.0) * (zm + (df - 1.0) * zeta_real(alpha)) - df * c2 / (df + 2.0) * riemann_zeta(alpha + 1.0)?;
    Ok(Lyapunov { value, formal: alpha <= 2.0 })
}

/// `η(α, d)` with `λ₁ = 0` for `a = 1−η`, `b = η`.
pub fn eta_critical_sphere(alpha: f64, d: u32) -> Result<f64> {
    if !(alpha > 2.0) {
        return domain(format!("critical η is defined for α > 2, got {alpha}"));
    }
    if d < 2 {
        return domain(format!("dimension must be at least 2, got {d}"));
    }
    let df = d as f64;
    let (zm, z0, zp) = (riemann_zeta(alpha - 1.0)?, riemann_zeta(alpha)?, riemann_zeta(alpha + 1.0)?);
    let num = -(df - 4.0) * zm - (df - 1.0) * (df - 4.0) * z0 + 2.0 * df * (df - 1.0) * zp;
    let den = 4.0 * zm + 4.0 * (df - 1.0) * z0 + df * (df - 2.0) * zp;
    Ok(num / den)
}

/// `∫ρ² F(dρ)` by quadrature, or `None` when it diverges (`α ≤ 2`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SecondMoment {
    pub value: f64,
    pub err_estimate: f64,
}

/// `∫_0^∞ ρ^{d+1}(ρ²+m²)^{−(d+α)/2} dρ`, split at `m`; the tail uses
/// `ρ = m/v`, whose integrand behaves like `v^{α−3}` at 0.
pub fn second_moment(p: &EuclidParams) -> Result<Option<SecondMoment>> {
    p.validate()?;
    if !(p.alpha > 2.0) {
        return Ok(None);
    }
    let (m, df, al) = (p.mass, p.d as f64, p.alpha);
    let spec = QuadratureSpec::with_tol(1e-300, 1e-12).levels(40);
    let head = integrate_1d(|r: f64| r * r * p.radial_density(r), 0.0, m, &spec)?;
    let tail =
        integrate_1d(|v: f64| v.powf(al - 3.0) * (1.0 + v * v).powf(-(df + al) / 2.0), 0.0, 1.0, &spec.hint(al - 3.0))?;
    let scale = m.powf(2.0 - al);
    let err_estimate = head.err_estimate + scale * tail.err_estimate;
    let value = head.require()? + scale * tail.require()?;
    Ok(Some(SecondMoment { value, err_estimate }))
}

/// Closed form `½ m^{2−α} B((d+2)/2, (α−2)/2)` of [`second_moment`].
pub fn second_moment_closed(p: &EuclidParams) -> Result<f64> {
    if !(p.alpha > 2.0) {
        return domain("second moment diverges for α ≤ 2");
    }
    Ok(0.5 * p.mass.powf(2.0 - p.alpha) * beta_fn((p.d as f64 + 2.0) / 2.0, (p.alpha - 2.0) / 2.0)?)
}

/// `λ₁` in ℝ^d, or the sign of its divergence when `∫ρ²F = ∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum LyapunovRd {
    Value {
        lambda: f64,
        moment: f64,
        err_estimate: f64,
    },
    /// `λ₁ = sign·∞` formally; `sign` is that of `(d−4)a + db` (0 when it vanishes).
    Divergent {
        sign: f64,
    },
}

/// `λ₁ = ((d−4)a+db)/(2(d+2)) ∫ρ² F(dρ)`.
pub fn lyapunov_rd(p: &EuclidParams) -> Result<LyapunovRd> {
    let df = p.d as f64;
    let c = (df - 4.0) * p.a + df * p.b;
    match second_moment(p)? {
        Some(mom) => {
            let k = c / (2.0 * (df + 2.0));
            Ok(LyapunovRd::Value {
                lambda: k * mom.value,
                moment: mom.value,
                err_estimate: (k * mom.err_estimate).abs(),
            })
        }
        None => Ok(LyapunovRd::Divergent { sign: if c == 0.0 { 0.0 } else { c.signum() } }),
    }
}

/// `η(d) = (4−d)/4` for `d ≤ 4`; no sign change for `d > 4`.
pub fn eta_critical_rd(d: u32) -> Option<f64> {
    (d <= 4).then(|| (4.0 - d as f64) / 4.0)
}

/// Growth of `|λ₁|` along `α_n → 2+`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceDiagnostic {
    pub alphas: Vec<f64>,
    pub values: Vec<f64>,
    /// Common sign of the values (0 if mixed).
    pub sign: f64,
    /// `|λ₁|` strictly increasing along the sequence.
    pub growing: bool,
}

fn diagnose(alphas: Vec<f64>, values: Vec<f64>) -> DivergenceDiagnostic {
    let pos = values.iter().all(|v| *v > 0.0);
    let neg = values.iter().all(|v| *v < 0.0);
    let sign = if pos {
        1.0
    } else if neg {
        -1.0
    } else {
        0.0
    };
    let growing = values.windows(2).all(|w| w[1].abs() > w[0].abs());
    DivergenceDiagnostic { alphas, values, sign, growing }
}

/// `α_n = 2 + 2^{−n}`, `n = 1..=steps`.
pub fn alpha_sequence(steps: usize) -> Vec<f64> {
    (1..=steps).map(|n| 2.0 + 0.5f64.powi(n as i32)).collect()
}

/// Sphere `λ₁` along `α_n → 2+` at `(a, b) = (1−η, η)`.
pub fn divergence_sphere(eta: f64, d: u32, steps: usize) -> Result<DivergenceDiagnostic> {
    let alphas = alpha_sequence(steps);
    let values =
        alphas.iter().map(|&al| lyapunov_sphere(al, 1.0 - eta, eta, d).map(|l| l.value)).collect::<Result<Vec<_>>>()?;
    Ok(diagnose(alphas, values))
}

/// ℝ^d `λ₁` along `α_n → 2+` at `(a, b) = (1−η, η)`.
pub fn divergence_rd(eta: f64, d: u32, mass: f64, steps: usize) -> Result<DivergenceDiagnostic> {
    let alphas = alpha_sequence(steps);
    let values = alphas
        .iter()
        .map(|&al| {
            let p = EuclidParams::from_eta(d, al, eta, mass)?;
            match lyapunov_rd(&p)? {
                LyapunovRd::Value { lambda, .. } => Ok(lambda),
                LyapunovRd::Divergent { .. } => unreachable!("α > 2 along the sequence"),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(diagnose(alphas, values))
}
