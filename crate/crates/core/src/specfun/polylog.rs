//! Polylogarithm `Li_s(w)` on the closed unit disc for real order `s > 0`.
//!
//! Small `|w|` uses the defining series. Otherwise the expansion in
//! `μ = ln w` is used:
//!
//! `Li_s(w) = Γ(1−s)(−μ)^{s−1} + Σ_k ζ(s−k) μ^k / k!` for non-integer `s`,
//! and for `s = n` the `k = n−1` term becomes
//! `μ^{n−1}/(n−1)! · (H_{n−1} − ln(−μ))`.
//!
//! Coefficients depend on `s` only and are built once per [`Polylog`].

use num_complex::Complex64;

use super::gamma::{gamma_real, zeta_real};
use crate::error::{domain, Result};

const SERIES_RADIUS: f64 = 0.5;
const MU_TERMS: usize = 72;
const INTEGER_SNAP: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct Polylog {
    s: f64,
    // Some(n) when s is (numerically) the integer n
    integer: Option<usize>,
    gamma_1ms: f64,
    // ζ(s−k)/k!, with the singular slot replaced by H_{n−1}/(n−1)!
    coef: Vec<f64>,
    zeta_s: f64,
}

impl Polylog {
    pub fn new(s: f64) -> Result<Self> {
        if !(s > 0.0) || !s.is_finite() {
            return domain(format!("polylog order must be positive, got {s}"));
        }
        let n = s.round();
        let integer = if (s - n).abs() < INTEGER_SNAP { Some(n as usize) } else { None };
        let s = match integer {
            Some(n) => n as f64,
            None => s,
        };
        let mut coef = Vec::with_capacity(MU_TERMS);
        let mut fact = 1.0;
        for k in 0..MU_TERMS {
            if k > 0 {
                fact *= k as f64;
            }
            let c = match integer {
                Some(n) if k + 1 == n => {
                    let h: f64 = (1..n).map(|j| 1.0 / j as f64).sum();
                    h / fact
                }
                _ => zeta_real(s - k as f64) / fact,
            };
            coef.push(c);
        }
        let gamma_1ms = if integer.is_some() { 0.0 } else { gamma_real(1.0 - s) };
        let zeta_s = if s > 1.0 { zeta_real(s) } else { f64::INFINITY };
        Ok(Self { s, integer, gamma_1ms, coef, zeta_s })
    }

    pub fn order(&self) -> f64 {
        self.s
    }

    /// `ζ(s) = Li_s(1)` (infinite for `s ≤ 1`).
    pub fn zeta(&self) -> f64 {
        self.zeta_s
    }

    fn direct(&self, w: Complex64, skip_first: bool) -> Complex64 {
        // Σ_{k≥1} w^k / k^s, optionally divided by w
        let mut sum = Complex64::new(0.0, 0.0);
        let mut pw = if skip_first { Complex64::new(1.0, 0.0) } else { w };
        for k in 1..200 {
            let term = pw * (k as f64).powf(-self.s);
            sum += term;
            if term.norm() < 1e-18 * sum.norm().max(1e-300) {
                break;
            }
            pw *= w;
        }
        sum
    }

    /// Singular part plus the `μ`-series starting at `k0`.
    fn mu_series(&self, mu: Complex64, k0: usize) -> Complex64 {
        let mut sum = Complex64::new(0.0, 0.0);
        let mut pm = Complex64::new(1.0, 0.0);
        for k in 0..MU_TERMS {
            if k >= k0 {
                let mut c = Complex64::new(self.coef[k], 0.0);
                if let Some(n) = self.integer {
                    if k + 1 == n {
                        c -= (-mu).ln() / fact(k);
                    }
                }
                sum += c * pm;
            }
            pm *= mu;
        }
        if self.integer.is_none() {
            sum += self.gamma_1ms * (-mu).powf(self.s - 1.0);
        }
        sum
    }

    fn check(w: Complex64) -> Result<()> {
        if !(w.norm() <= 1.0 + 1e-12) {
            return domain(format!("polylog argument outside the unit disc: {w}"));
        }
        Ok(())
    }

    /// `Li_s(w)` for `|w| ≤ 1` (`w ≠ 1` when `s ≤ 1`).
    pub fn li(&self, w: Complex64) -> Result<Complex64> {
        Self::check(w)?;
        if w.norm() < SERIES_RADIUS {
            return Ok(self.direct(w, false));
        }
        if w == Complex64::new(1.0, 0.0) {
            return Ok(Complex64::new(self.zeta_s, 0.0));
        }
        Ok(self.mu_series(w.ln(), 0))
    }

    /// `Li_s(e^μ)` for `Re μ ≤ 0`, `|Im μ| ≤ π`; passing `μ` directly avoids
    /// the rounding of `ln w` near `w = 1`.
    pub fn li_log(&self, mu: Complex64) -> Complex64 {
        if mu.re < SERIES_RADIUS.ln() {
            self.direct(mu.exp(), false)
        } else if mu == Complex64::new(0.0, 0.0) {
            Complex64::new(self.zeta_s, 0.0)
        } else {
            self.mu_series(mu, 0)
        }
    }

    /// `Li_s(e^μ)/e^μ`.
    pub fn li_over_w_log(&self, mu: Complex64) -> Complex64 {
        if mu.re < SERIES_RADIUS.ln() {
            self.direct(mu.exp(), true)
        } else {
            self.mu_series(mu, 0) * (-mu).exp()
        }
    }

    /// `ζ(s) − Li_s(e^μ)`; needs `s > 1`.
    pub fn zeta_minus_li_log(&self, mu: Complex64) -> Complex64 {
        debug_assert!(self.s > 1.0);
        if mu.re < SERIES_RADIUS.ln() {
            Complex64::new(self.zeta_s, 0.0) - self.direct(mu.exp(), false)
        } else if mu == Complex64::new(0.0, 0.0) {
            Complex64::new(0.0, 0.0)
        } else {
            -self.mu_series(mu, 1)
        }
    }

    /// `Li_s(w)/w`, finite at `w = 0`.
    pub fn li_over_w(&self, w: Complex64) -> Result<Complex64> {
        Self::check(w)?;
        if w.norm() < SERIES_RADIUS {
            return Ok(self.direct(w, true));
        }
        Ok(self.li(w)? / w)
    }

    /// `ζ(s) − Li_s(w)` without cancellation near `w = 1`; needs `s > 1`.
    pub fn zeta_minus_li(&self, w: Complex64) -> Result<Complex64> {
        Self::check(w)?;
        if self.s <= 1.0 {
            return domain("zeta_minus_li needs order > 1");
        }
        if w.norm() < SERIES_RADIUS {
            return Ok(Complex64::new(self.zeta_s, 0.0) - self.direct(w, false));
        }
        if w == Complex64::new(1.0, 0.0) {
            return Ok(Complex64::new(0.0, 0.0));
        }
        // the k = 0 coefficient is ζ(s) unless s = 1, excluded above
        Ok(-self.mu_series(w.ln(), 1))
    }
}

fn fact(k: usize) -> f64 {
    (1..=k).map(|j| j as f64).product()
}
