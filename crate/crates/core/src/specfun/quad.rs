//! Adaptive Gauss–Kronrod quadrature on finite and half-infinite intervals.
//!
//! All routines use the 7-point Gauss / 15-point Kronrod pair with global
//! (worst-panel-first) bisection. A half-infinite range `[a, ∞)` is mapped onto
//! `[0, 1)` by `t = a + u/(1-u)` with the Jacobian folded into the integrand;
//! an integrable power singularity `x^p` (`-1 < p < 0`) at the lower endpoint is
//! removed by `x = a + (b-a) v^{1/(1+p)}`.

use std::collections::BinaryHeap;

use crate::error::{FlowError, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Quadrature scheme selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Scheme {
    AdaptiveComposite,
    Tensor2d,
}

/// Tolerances and refinement limits for the adaptive routines.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct QuadratureSpec {
    pub scheme: Scheme,
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Maximum bisection depth of any panel.
    pub max_subdivisions: u32,
    /// Exponent `p` when the integrand behaves like `(x-a)^p` at the lower endpoint.
    pub endpoint_power_hint: Option<f64>,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            scheme: Scheme::AdaptiveComposite,
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            max_subdivisions: 20,
            endpoint_power_hint: None,
        }
    }
}

impl QuadratureSpec {
    pub fn with_tol(abs_tol: f64, rel_tol: f64) -> Self {
        QuadratureSpec { abs_tol, rel_tol, ..Default::default() }
    }

    pub fn hint(mut self, p: f64) -> Self {
        self.endpoint_power_hint = Some(p);
        self
    }

    pub fn levels(mut self, levels: u32) -> Self {
        self.max_subdivisions = levels;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) || !(self.rel_tol > 0.0) {
            return Err(FlowError::InvalidParams("quadrature tolerances must be positive".into()));
        }
        if self.max_subdivisions < 1 {
            return Err(FlowError::InvalidParams("max_subdivisions must be at least 1".into()));
        }
        if let Some(p) = self.endpoint_power_hint {
            if !(p > -1.0) {
                return Err(FlowError::InvalidParams(format!("endpoint power {p} is not integrable")));
            }
        }
        Ok(())
    }

    fn target(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }
}

/// Upper integration limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Upper {
    Finite(f64),
    Infinity,
}

impl From<f64> for Upper {
    fn from(b: f64) -> Self {
        if b == f64::INFINITY {
            Upper::Infinity
        } else {
            Upper::Finite(b)
        }
    }
}

/// Outcome of an adaptive integration. A non-converged result still carries
/// the best value and its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub err_estimate: f64,
    pub converged: bool,
    pub evaluations: usize,
}

impl Integral {
    /// Turns a non-converged result into [`FlowError::NonConvergence`].
    pub fn require(self) -> Result<f64> {
        if self.converged {
            Ok(self.value)
        } else {
            Err(FlowError::NonConvergence { value: self.value, err_estimate: self.err_estimate })
        }
    }
}

/// Vector-valued variant of [`Integral`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegralN<const N: usize> {
    pub value: [f64; N],
    pub err_estimate: [f64; N],
    pub converged: bool,
    pub evaluations: usize,
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut e = err.abs();
    if res_asc != 0.0 && e != 0.0 {
        let scale = (200.0 * e / res_asc).powf(1.5);
        e = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        e = e.max(50.0 * f64::EPSILON * res_abs);
    }
    e
}

/// One 15-point Kronrod panel for a vector-valued integrand.
fn kronrod<const N: usize, F>(f: &F, a: f64, b: f64) -> ([f64; N], [f64; N])
where
    F: Fn(f64) -> [f64; N],
{
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut rk = [0.0; N];
    let mut rg = [0.0; N];
    let mut rabs = [0.0; N];
    let mut fv1 = [[0.0; N]; 7];
    let mut fv2 = [[0.0; N]; 7];
    for n in 0..N {
        rk[n] = fc[n] * WGK[7];
        rg[n] = fc[n] * WG[3];
        rabs[n] = rk[n].abs();
    }
    for j in 0..7 {
        let x = h * XGK[j];
        let f1 = f(c - x);
        let f2 = f(c + x);
        for n in 0..N {
            let s = f1[n] + f2[n];
            rk[n] += WGK[j] * s;
            rabs[n] += WGK[j] * (f1[n].abs() + f2[n].abs());
            if j % 2 == 1 {
                rg[n] += WG[j / 2] * s;
            }
        }
        fv1[j] = f1;
        fv2[j] = f2;
    }
    let mut val = [0.0; N];
    let mut err = [0.0; N];
    for n in 0..N {
        let mean = rk[n] * 0.5;
        let mut asc = WGK[7] * (fc[n] - mean).abs();
        for j in 0..7 {
            asc += WGK[j] * ((fv1[j][n] - mean).abs() + (fv2[j][n] - mean).abs());
        }
        val[n] = rk[n] * h;
        err[n] = rescale_error((rk[n] - rg[n]) * h, rabs[n] * h.abs(), asc * h.abs());
    }
    (val, err)
}

struct Panel<const N: usize> {
    a: f64,
    b: f64,
    depth: u32,
    val: [f64; N],
    err: [f64; N],
    key: f64,
}

impl<const N: usize> PartialEq for Panel<N> {
    fn eq(&self, o: &Self) -> bool {
        self.key == o.key
    }
}
impl<const N: usize> Eq for Panel<N> {}
impl<const N: usize> PartialOrd for Panel<N> {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}
impl<const N: usize> Ord for Panel<N> {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.key.total_cmp(&o.key)
    }
}

const MAX_PANELS: usize = 20_000;

/// Global adaptive integration of a vector-valued integrand over `[a, b]`,
/// starting from the given breakpoints (which must lie inside `(a, b)`).
/// Convergence is judged componentwise against `max(abs_tol, rel_tol·|I_n|)`.
pub fn adaptive_vec<const N: usize, F>(f: F, breaks: &[f64], spec: &QuadratureSpec) -> IntegralN<N>
where
    F: Fn(f64) -> [f64; N],
{
    let mut heap: BinaryHeap<Panel<N>> = BinaryHeap::new();
    let mut done: Vec<Panel<N>> = Vec::new();
    let mut evals = 0usize;
    let mut make = |a: f64, b: f64, depth: u32| {
        let (val, err) = kronrod(&f, a, b);
        evals += 15;
        Panel { a, b, depth, val, err, key: err.iter().cloned().fold(0.0, f64::max) }
    };
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            heap.push(make(w[0], w[1], 0));
        }
    }
    let totals = |heap: &BinaryHeap<Panel<N>>, done: &Vec<Panel<N>>| {
        let mut v = [0.0; N];
        let mut e = [0.0; N];
        for p in heap.iter().chain(done.iter()) {
            for n in 0..N {
                v[n] += p.val[n];
                e[n] += p.err[n];
            }
        }
        (v, e)
    };
    loop {
        let (v, e) = totals(&heap, &done);
        let ok = (0..N).all(|n| e[n] <= spec.target(v[n]));
        if ok || heap.is_empty() || heap.len() + done.len() >= MAX_PANELS {
            return IntegralN { value: v, err_estimate: e, converged: ok, evaluations: evals };
        }
        let worst = heap.pop().expect("non-empty heap");
        let mid = 0.5 * (worst.a + worst.b);
        if worst.depth >= spec.max_subdivisions || mid <= worst.a || mid >= worst.b {
            done.push(worst);
            continue;
        }
        heap.push(make(worst.a, mid, worst.depth + 1));
        heap.push(make(mid, worst.b, worst.depth + 1));
    }
}

/// Maps `f` on `[a, b]` (or `[a, ∞)`) with the declared endpoint singularity
/// onto a regular integrand on a finite `[0, L]` and integrates it.
fn transformed<const N: usize, F>(
    f: F,
    a: f64,
    b: Upper,
    interior: &[f64],
    spec: &QuadratureSpec,
) -> Result<IntegralN<N>>
where
    F: Fn(f64) -> [f64; N],
{
    spec.validate()?;
    let k = match spec.endpoint_power_hint {
        Some(p) if p > -1.0 && !(p >= 0.0 && p.fract() == 0.0) => 1.0 / (1.0 + p),
        _ => 1.0,
    };
    match b {
        Upper::Finite(b) => {
            if !(b >= a) || !a.is_finite() || !b.is_finite() {
                return Err(FlowError::Domain(format!("bad interval [{a}, {b}]")));
            }
            let len = b - a;
            if len == 0.0 {
                return Ok(IntegralN { value: [0.0; N], err_estimate: [0.0; N], converged: true, evaluations: 0 });
            }
            if k == 1.0 {
                let mut br = vec![a];
                br.extend(interior.iter().cloned().filter(|&x| x > a && x < b));
                br.push(b);
                return Ok(adaptive_vec(f, &br, spec));
            }
            let g = |v: f64| {
                if v <= 0.0 {
                    return [0.0; N];
                }
                let vk = v.powf(k);
                let jac = len * k * vk / v;
                let mut y = f(a + len * vk);
                for n in 0..N {
                    y[n] *= jac;
                }
                y
            };
            let mut br = vec![0.0];
            br.extend(interior.iter().filter(|&&x| x > a && x < b).map(|&x| ((x - a) / len).powf(1.0 / k)));
            br.push(1.0);
            Ok(adaptive_vec(g, &br, spec))
        }
        Upper::Infinity => {
            if !a.is_finite() {
                return Err(FlowError::Domain("lower limit must be finite".into()));
            }
            // t = a + u/(1-u), u = v^k
            let g = |v: f64| {
                if v <= 0.0 || v >= 1.0 {
                    return [0.0; N];
                }
                let u = v.powf(k);
                let om = 1.0 - u;
                let jac = k * u / v / (om * om);
                let mut y = f(a + u / om);
                for n in 0..N {
                    y[n] *= jac;
                    if !y[n].is_finite() {
                        y[n] = 0.0;
                    }
                }
                y
            };
            let mut br = vec![0.0];
            br.extend(interior.iter().filter(|&&x| x > a).map(|&x| {
                let t = x - a;
                (t / (1.0 + t)).powf(1.0 / k)
            }));
            br.push(1.0);
            Ok(adaptive_vec(g, &br, spec))
        }
    }
}

/// Integrates a scalar function over `[a, b]` or `[a, ∞)`.
pub fn integrate_1d<F>(f: F, a: f64, b: impl Into<Upper>, spec: &QuadratureSpec) -> Result<Integral>
where
    F: Fn(f64) -> f64,
{
    integrate_1d_with_breaks(f, a, b, &[], spec)
}

/// [`integrate_1d`] with extra interior breakpoints (kinks, peaks).
pub fn integrate_1d_with_breaks<F>(
    f: F,
    a: f64,
    b: impl Into<Upper>,
    breaks: &[f64],
    spec: &QuadratureSpec,
) -> Result<Integral>
where
    F: Fn(f64) -> f64,
{
    let r = transformed(|x| [f(x)], a, b.into(), breaks, spec)?;
    Ok(Integral {
        value: r.value[0],
        err_estimate: r.err_estimate[0],
        converged: r.converged,
        evaluations: r.evaluations,
    })
}

/// Vector-valued 1-D integration with interior breakpoints.
pub fn integrate_1d_vec<const N: usize, F>(
    f: F,
    a: f64,
    b: impl Into<Upper>,
    breaks: &[f64],
    spec: &QuadratureSpec,
) -> Result<IntegralN<N>>
where
    F: Fn(f64) -> [f64; N],
{
    transformed(f, a, b.into(), breaks, spec)
}

/// Integration rectangle; each side may be unbounded above.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x: (f64, Upper),
    pub y: (f64, Upper),
}

/// Iterated (tensor) adaptive integration of `f(x, y)`: the inner integral
/// runs over `x` with the endpoint hint of `spec`, the outer over `y`.
pub fn integrate_2d<F>(f: F, rect: Rect, spec: &QuadratureSpec) -> Result<Integral>
where
    F: Fn(f64, f64) -> f64,
{
    spec.validate()?;
    let inner_spec = QuadratureSpec { abs_tol: spec.abs_tol * 0.1, rel_tol: spec.rel_tol * 0.1, ..*spec };
    let outer_spec = QuadratureSpec { endpoint_power_hint: None, ..*spec };
    let inner_ok = std::cell::Cell::new(true);
    let inner_err = std::cell::Cell::new(0.0f64);
    let outer = integrate_1d(
        |y| match integrate_1d(|x| f(x, y), rect.x.0, rect.x.1, &inner_spec) {
            Ok(r) => {
                if !r.converged {
                    inner_ok.set(false);
                    inner_err.set(inner_err.get().max(r.err_estimate));
                }
                r.value
            }
            Err(_) => {
                inner_ok.set(false);
                f64::NAN
            }
        },
        rect.y.0,
        rect.y.1,
        &outer_spec,
    )?;
    if outer.value.is_nan() {
        return Err(FlowError::Domain("inner integral failed".into()));
    }
    let mut span = match rect.y.1 {
        Upper::Finite(b) => (b - rect.y.0).abs(),
        Upper::Infinity => 1.0,
    };
    if span == 0.0 {
        span = 1.0;
    }
    Ok(Integral {
        value: outer.value,
        err_estimate: outer.err_estimate + inner_err.get() * span,
        converged: outer.converged && inner_ok.get(),
        evaluations: outer.evaluations,
    })
}

/// `n`-point Gauss–Legendre nodes and weights on `[−1, 1]` (Newton on `P_n`).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p0 = 1.0;
            }
            dp = nf * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}
