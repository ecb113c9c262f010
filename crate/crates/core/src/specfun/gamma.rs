//! Gamma, Beta and Riemann zeta on the real line.

use std::f64::consts::PI;

use crate::error::{domain, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

fn lanczos_sum(x: f64) -> f64 {
    let mut a = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    a
}

/// Γ(x) for any real `x` that is not a non-positive integer.
pub(crate) fn gamma_real(x: f64) -> f64 {
    if x < 0.5 {
        // reflection
        PI / ((PI * x).sin() * gamma_real(1.0 - x))
    } else {
        let x = x - 1.0;
        let t = x + LANCZOS_G + 0.5;
        (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * lanczos_sum(x)
    }
}

/// ln Γ(x) for `x > 0`.
pub(crate) fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x)
    } else {
        let x = x - 1.0;
        let t = x + LANCZOS_G + 0.5;
        0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + lanczos_sum(x).ln()
    }
}

/// Γ(x) for `x > 0`.
pub fn gamma_fn(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return domain(format!("gamma_fn needs x > 0, got {x}"));
    }
    Ok(if x > 170.0 { f64::INFINITY } else { gamma_real(x) })
}

/// B(x, y) = Γ(x)Γ(y)/Γ(x+y) for positive arguments.
pub fn beta_fn(x: f64, y: f64) -> Result<f64> {
    if !(x > 0.0) || !(y > 0.0) || !x.is_finite() || !y.is_finite() {
        return domain(format!("beta_fn needs positive arguments, got ({x}, {y})"));
    }
    if x + y < 150.0 {
        Ok(gamma_real(x) * gamma_real(y) / gamma_real(x + y))
    } else {
        Ok((ln_gamma(x) + ln_gamma(y) - ln_gamma(x + y)).exp())
    }
}

/// `c_d = ∫_0^π sin^d θ dθ = B((d+1)/2, 1/2)`.
pub fn c_d_norm(d: u32) -> Result<f64> {
    if d < 1 {
        return domain("c_d_norm needs d >= 1");
    }
    beta_fn((d as f64 + 1.0) / 2.0, 0.5)
}

// B_{2k} / (2k)!
const BERNOULLI_OVER_FACT: [f64; 10] = [
    1.0 / 6.0 / 2.0,
    -1.0 / 30.0 / 24.0,
    1.0 / 42.0 / 720.0,
    -1.0 / 30.0 / 40_320.0,
    5.0 / 66.0 / 3_628_800.0,
    -691.0 / 2730.0 / 479_001_600.0,
    7.0 / 6.0 / 87_178_291_200.0,
    -3617.0 / 510.0 / 20_922_789_888_000.0,
    43_867.0 / 798.0 / 6_402_373_705_728_000.0,
    -174_611.0 / 330.0 / 2_432_902_008_176_640_000.0,
];

/// Euler–Maclaurin evaluation, valid for real `s ≠ 1` with `s > -10`.
fn zeta_em(s: f64) -> f64 {
    const N: usize = 16;
    let nf = N as f64;
    let mut sum = 0.0;
    for n in (1..N).rev() {
        sum += (n as f64).powf(-s);
    }
    sum += nf.powf(1.0 - s) / (s - 1.0) + 0.5 * nf.powf(-s);
    // rising factorial s(s+1)...(s+2k-2) times N^{-s-2k+1}
    let mut poch = s;
    let mut npow = nf.powf(-s - 1.0);
    for (k, c) in BERNOULLI_OVER_FACT.iter().enumerate() {
        sum += c * poch * npow;
        let j = 2.0 * k as f64;
        poch *= (s + j + 1.0) * (s + j + 2.0);
        npow /= nf * nf;
    }
    sum
}

/// ζ(x) for any real `x ≠ 1` (analytic continuation).
pub(crate) fn zeta_real(x: f64) -> f64 {
    if x >= 0.0 {
        return zeta_em(x);
    }
    if x == x.round() && (x as i64) % 2 == 0 {
        return 0.0;
    }
    // ζ(x) = 2^x π^{x-1} sin(πx/2) Γ(1-x) ζ(1-x)
    let sign = (0.5 * PI * x).sin();
    let logmag = x * 2f64.ln() + (x - 1.0) * PI.ln() + ln_gamma(1.0 - x);
    sign * logmag.exp() * zeta_em(1.0 - x)
}

/// Riemann zeta function for real `s > 1`.
pub fn riemann_zeta(s: f64) -> Result<f64> {
    if !(s > 1.0) || s.is_nan() {
        return domain(format!("riemann_zeta needs s > 1, got {s}"));
    }
    Ok(zeta_em(s))
}
