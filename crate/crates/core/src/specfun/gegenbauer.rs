//! Normalized Gegenbauer polynomials `γ_l(t) = C_{l−1}^{p}(t) / C_{l−1}^{p}(1)`,
//! `p = (d+1)/2`.

use num_complex::Complex64;

use super::gamma::c_d_norm;
use super::quad::{integrate_1d, QuadratureSpec};
use crate::error::{domain, FlowError, Result};

fn check(l: usize, d: u32, t: f64) -> Result<()> {
    if l < 1 {
        return domain("gegenbauer index l must be >= 1");
    }
    if d < 2 {
        return domain("gegenbauer dimension d must be >= 2");
    }
    if !(-1.0..=1.0).contains(&t) {
        return domain(format!("gegenbauer argument {t} outside [-1, 1]"));
    }
    Ok(())
}

/// Fills `out[l-1] = γ_l(t)` for `l = 1..=out.len()`.
///
/// Normalized recurrence with `n = l − 1`:
/// `g_n = [2(n+p−1) t g_{n−1} − (n−1) g_{n−2}] / (n+2p−1)`.
pub(crate) fn gamma_table(d: u32, t: f64, out: &mut [f64]) {
    let p = (d as f64 + 1.0) / 2.0;
    let (mut g2, mut g1) = (0.0, 1.0);
    for (n, slot) in out.iter_mut().enumerate() {
        let g = match n {
            0 => 1.0,
            1 => t,
            _ => {
                let nf = n as f64;
                (2.0 * (nf + p - 1.0) * t * g1 - (nf - 1.0) * g2) / (nf + 2.0 * p - 1.0)
            }
        };
        *slot = g;
        g2 = g1;
        g1 = g;
    }
}

/// `γ_l(t)` in dimension `d`.
pub fn gegenbauer_gamma(l: usize, d: u32, t: f64) -> Result<f64> {
    check(l, d, t)?;
    let mut buf = vec![0.0; l];
    gamma_table(d, t, &mut buf);
    Ok(buf[l - 1])
}

/// `dγ_l/dt = (l−1)(l+d)/(d+2) · γ_{l−1}^{(d+2)}(t)`.
pub fn gegenbauer_gamma_deriv(l: usize, d: u32, t: f64) -> Result<f64> {
    check(l, d, t)?;
    if l == 1 {
        return Ok(0.0);
    }
    let lf = l as f64;
    let df = d as f64;
    Ok((lf - 1.0) * (lf + df) / (df + 2.0) * gegenbauer_gamma(l - 1, d + 2, t)?)
}

/// `(1/c_d) ∫_0^π Re[z^{l−1}] sin^d θ dθ`, `z = cos φ − i sin φ cos θ`.
pub fn gegenbauer_gamma_integral(l: usize, d: u32, phi: f64, quad: &QuadratureSpec) -> Result<f64> {
    if !(0.0..=std::f64::consts::PI).contains(&phi) {
        return domain(format!("angle {phi} outside [0, π]"));
    }
    check(l, d, phi.cos())?;
    let (s, c) = phi.sin_cos();
    let n = (l - 1) as i32;
    let r = integrate_1d(
        |th: f64| {
            let z = Complex64::new(c, -s * th.cos());
            z.powi(n).re * th.sin().powi(d as i32)
        },
        0.0,
        std::f64::consts::PI,
        quad,
    )?;
    let cd = c_d_norm(d)?;
    if !r.converged {
        return Err(FlowError::NonConvergence { value: r.value / cd, err_estimate: r.err_estimate / cd });
    }
    Ok(r.value / cd)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // Unnormalized recurrence n C_n = 2(n+p−1) t C_{n−1} − (n+2p−2) C_{n−2}.
    fn raw_c(n: usize, p: f64, t: f64) -> f64 {
        let (mut c2, mut c1) = (1.0, 2.0 * p * t);
        if n == 0 {
            return 1.0;
        }
        for k in 2..=n {
            let kf = k as f64;
            let c = (2.0 * (kf + p - 1.0) * t * c1 - (kf + 2.0 * p - 2.0) * c2) / kf;
            c2 = c1;
            c1 = c;
        }
        c1
    }

    fn brute(l: usize, d: u32, t: f64) -> f64 {
        let p = (d as f64 + 1.0) / 2.0;
        raw_c(l - 1, p, t) / raw_c(l - 1, p, 1.0)
    }

    #[test]
    fn examples() {
        assert!((gegenbauer_gamma(5, 3, 1.0).unwrap() - 1.0).abs() < 1e-14);
        for d in 2..7 {
            assert!((gegenbauer_gamma(2, d, 0.3).unwrap() - 0.3).abs() < 1e-15);
        }
        let v = gegenbauer_gamma(3, 2, 0.5).unwrap();
        assert!((v - 0.0625).abs() < 1e-15);
        assert!((brute(3, 2, 0.5) - 0.0625).abs() < 1e-15);
        assert!(gegenbauer_gamma(0, 2, 0.5).is_err());
        assert!(gegenbauer_gamma(3, 2, 1.5).is_err());
    }

    #[test]
    fn matches_unnormalized_recurrence() {
        for d in 2..6 {
            for l in 1..60 {
                for i in 0..=20 {
                    let t = -1.0 + 0.1 * i as f64;
                    let a = gegenbauer_gamma(l, d, t).unwrap();
                    assert!((a - brute(l, d, t)).abs() < 1e-11, "l={l} d={d} t={t}");
                }
            }
        }
    }

    #[test]
    fn integral_examples() {
        let q = QuadratureSpec::default();
        assert!((gegenbauer_gamma_integral(1, 2, 1.0, &q).unwrap() - 1.0).abs() < 1e-12);
        let v = gegenbauer_gamma_integral(2, 3, std::f64::consts::PI / 3.0, &q).unwrap();
        assert!((v - 0.5).abs() < 1e-12);
        let v = gegenbauer_gamma_integral(7, 2, 0.8, &q).unwrap();
        assert!((v - gegenbauer_gamma(7, 2, 0.8f64.cos()).unwrap()).abs() < 1e-8);
    }

    #[test]
    fn integral_form_agrees_with_recurrence() {
        let q = QuadratureSpec::default();
        for d in 2..=5 {
            for l in 1..=50 {
                for i in 0..100 {
                    let phi = (std::f64::consts::PI * i as f64 / 99.0).min(std::f64::consts::PI);
                    let a = gegenbauer_gamma(l, d, phi.cos().clamp(-1.0, 1.0)).unwrap();
                    let b = gegenbauer_gamma_integral(l, d, phi, &q).unwrap();
                    assert!((a - b).abs() < 1e-8, "l={l} d={d} φ={phi}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn derivative_by_differences() {
        for d in 2..5 {
            for l in 1..30 {
                for &t in &[-0.7, -0.1, 0.35, 0.8] {
                    let h = 1e-6;
                    let fd =
                        (gegenbauer_gamma(l, d, t + h).unwrap() - gegenbauer_gamma(l, d, t - h).unwrap()) / (2.0 * h);
                    let an = gegenbauer_gamma_deriv(l, d, t).unwrap();
                    assert!((fd - an).abs() < 1e-6 * (1.0 + an.abs()), "l={l} d={d} t={t}");
                }
            }
        }
    }

    proptest! {
        #[test]
        fn bounded_by_one(l in 1usize..300, d in 2u32..8, t in -1.0f64..=1.0) {
            prop_assert!(gegenbauer_gamma(l, d, t).unwrap().abs() <= 1.0 + 1e-12);
        }
    }
}
