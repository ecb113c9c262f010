//! Monte-Carlo simulation of the two-point distance diffusion.
//!
//! The generator `σ² d² + b d` corresponds to
//! `dψ = b dt + √2 σ dB`. The default scheme integrates `x = ψ²`, whose
//! coefficients vanish at 0 instead of blowing up.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coeffs::{Chart, CoefficientPair, Geometry, Squared, Tabulated};
use crate::error::{domain, FlowError, Result};
use crate::feller::ScaleFunction;
use crate::params::FlowParams;
use crate::stats::binomial_se;
use crate::stream::path_rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SimScheme {
    SquaredProcess,
    DirectReflected,
}

/// What happens when `ψ ≤ hit_eps`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HitMode {
    /// Freeze the path (exit boundary).
    Absorb,
    /// Record the first hit and keep integrating (regular or entrance boundary).
    Record,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub dt: f64,
    pub t_max: f64,
    pub n_paths: usize,
    pub seed: u64,
    pub hit_eps: f64,
    pub phi0: f64,
    pub scheme: SimScheme,
    pub hit_mode: HitMode,
}

impl SimConfig {
    /// Validates against the state interval `(0, upper)`.
    pub fn validate(&self, upper: f64) -> Result<()> {
        if !(self.dt > 0.0 && self.t_max > 0.0 && self.dt <= self.t_max) {
            return Err(FlowError::InvalidParams("need 0 < dt <= T".into()));
        }
        if self.n_paths == 0 {
            return Err(FlowError::InvalidParams("n_paths must be positive".into()));
        }
        if !(self.hit_eps > 0.0 && self.hit_eps < self.phi0) {
            return Err(FlowError::InvalidParams("need 0 < hit_eps < phi0".into()));
        }
        if !(self.phi0 < upper) {
            return Err(FlowError::InvalidParams(format!("phi0 must lie in (0, {upper})")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub n_paths: usize,
    pub absorbed_fraction: f64,
    /// First times with `ψ ≤ hit_eps`.
    pub absorption_times: Vec<f64>,
    /// `ψ_T` of paths that never hit.
    pub terminal_values: Vec<f64>,
    /// `min_t ψ_t` per path.
    pub min_values: Vec<f64>,
    /// Paths lost to coefficient failures.
    pub discarded: usize,
    /// Steps whose update went below 0 and were reflected.
    pub negative_steps: u64,
    /// Reflections at the far end `π` (sphere only).
    pub cap_hits: u64,
}

/// Relative size of one local step: drift and noise increments stay below
/// this fraction of the distance to the nearest boundary.
const STEP_FRACTION: f64 = 0.1;
/// Smallest local step as a fraction of `dt`.
const MIN_SUBSTEP: f64 = 1.0 / 4096.0;
/// Largest tolerated share of discarded paths.
const MAX_DISCARD: f64 = 0.01;

/// One path state in the chosen variable (`ψ` or `ψ²`).
struct Stepper<'a, C: CoefficientPair> {
    direct: &'a C,
    squared: Squared<&'a C>,
    scheme: SimScheme,
    upper: f64,
}

impl<'a, C: CoefficientPair> Stepper<'a, C> {
    fn new(coeffs: &'a C, scheme: SimScheme) -> Self {
        Self { direct: coeffs, squared: Squared::new(coeffs), scheme, upper: coeffs.domain().1 }
    }

    fn to_state(&self, psi: f64) -> f64 {
        match self.scheme {
            SimScheme::SquaredProcess => psi * psi,
            SimScheme::DirectReflected => psi,
        }
    }

    fn to_psi(&self, x: f64) -> f64 {
        match self.scheme {
            SimScheme::SquaredProcess => x.max(0.0).sqrt(),
            SimScheme::DirectReflected => x,
        }
    }

    fn coeffs(&self, x: f64) -> Result<(f64, f64)> {
        match self.scheme {
            SimScheme::SquaredProcess => self.squared.both(x),
            SimScheme::DirectReflected => self.direct.both(x),
        }
    }

    /// Local step not exceeding `h`, with `gap` the distance to the nearest
    /// relevant boundary in the state variable.
    fn local_dt(&self, h: f64, gap: f64, s2: f64, b: f64) -> f64 {
        let mut dt = h;
        if b != 0.0 {
            dt = dt.min(STEP_FRACTION * gap / b.abs());
        }
        if s2 > 0.0 {
            dt = dt.min((STEP_FRACTION * gap).powi(2) / (2.0 * s2));
        }
        dt.max(h * MIN_SUBSTEP).min(h)
    }

    /// Euler–Maruyama update with reflection at 0 and at the far end.
    /// Returns the new state and whether a negative or cap reflection happened.
    fn advance(&self, x: f64, s2: f64, b: f64, dt: f64, xi: f64) -> (f64, bool, bool) {
        let mut y = x + b * dt + (2.0 * s2 * dt).sqrt() * xi;
        let neg = y < 0.0;
        if neg {
            y = -y;
        }
        let mut cap = false;
        if self.upper.is_finite() {
            let psi = self.to_psi(y);
            if psi >= self.upper {
                cap = true;
                let refl = (2.0 * self.upper - psi).max(0.0);
                // stay strictly inside
                y = self.to_state(refl.min(self.upper * (1.0 - 1e-12)));
            }
        }
        (y, neg, cap)
    }
}

enum PathEnd {
    Done { hit_time: Option<f64>, terminal: f64, min: f64, neg: u64, cap: u64 },
    Failed,
}

fn run_path<C: CoefficientPair>(st: &Stepper<'_, C>, cfg: &SimConfig, index: u64) -> PathEnd {
    let mut rng = path_rng(cfg.seed, index);
    let x_hit = st.to_state(cfg.hit_eps);
    let mut x = st.to_state(cfg.phi0);
    let mut t = 0.0;
    let mut min_psi = cfg.phi0;
    let mut hit_time = None;
    let (mut neg, mut cap) = (0u64, 0u64);
    let far = if st.upper.is_finite() { st.to_state(st.upper) } else { f64::INFINITY };
    while t < cfg.t_max {
        let (s2, b) = match st.coeffs(x) {
            Ok(v) => v,
            Err(_) => return PathEnd::Failed,
        };
        let h = cfg.dt.min(cfg.t_max - t);
        let gap = x.min(far - x);
        // substeps only matter while approaching a boundary
        let dt = if hit_time.is_some() && cfg.hit_mode == HitMode::Absorb { h } else { st.local_dt(h, gap, s2, b) };
        let xi: f64 = rng.sample(StandardNormal);
        let (y, n, c) = st.advance(x, s2, b, dt, xi);
        neg += n as u64;
        cap += c as u64;
        x = y;
        t += dt;
        let psi = st.to_psi(x);
        min_psi = min_psi.min(psi);
        if psi <= cfg.hit_eps || x <= x_hit {
            if hit_time.is_none() {
                hit_time = Some(t);
            }
            if cfg.hit_mode == HitMode::Absorb {
                break;
            }
        }
    }
    PathEnd::Done { hit_time, terminal: st.to_psi(x), min: min_psi, neg, cap }
}

/// Simulates `cfg.n_paths` independent paths from `phi0`. Identical inputs
/// give bit-identical output for any number of worker threads.
pub fn simulate<C: CoefficientPair>(coeffs: &C, geometry: Geometry, cfg: &SimConfig) -> Result<SimResult> {
    let upper = coeffs.domain().1;
    cfg.validate(upper)?;
    if geometry == Geometry::Sphere && !upper.is_finite() {
        return domain("sphere coefficients must live on (0, π)");
    }
    let st = Stepper::new(coeffs, cfg.scheme);
    let ends: Vec<PathEnd> = (0..cfg.n_paths as u64).into_par_iter().map(|i| run_path(&st, cfg, i)).collect();
    let mut res = SimResult {
        n_paths: 0,
        absorbed_fraction: 0.0,
        absorption_times: Vec::new(),
        terminal_values: Vec::new(),
        min_values: Vec::new(),
        discarded: 0,
        negative_steps: 0,
        cap_hits: 0,
    };
    for e in ends {
        match e {
            PathEnd::Failed => res.discarded += 1,
            PathEnd::Done { hit_time, terminal, min, neg, cap } => {
                res.n_paths += 1;
                res.min_values.push(min);
                res.negative_steps += neg;
                res.cap_hits += cap;
                match hit_time {
                    Some(t) => res.absorption_times.push(t),
                    None => res.terminal_values.push(terminal),
                }
            }
        }
    }
    if res.discarded as f64 > MAX_DISCARD * cfg.n_paths as f64 {
        return Err(FlowError::Simulation(format!("{} of {} paths discarded", res.discarded, cfg.n_paths)));
    }
    res.absorbed_fraction = res.absorption_times.len() as f64 / res.n_paths as f64;
    Ok(res)
}

/// Empirical and scale-function exit-left probabilities on `[l, r]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HittingComparison {
    pub empirical: f64,
    pub analytic: f64,
    /// Binomial standard error at the analytic probability.
    pub std_err: f64,
    pub n_paths: usize,
    pub censored: usize,
}

impl HittingComparison {
    /// `|empirical − analytic|` in standard errors.
    pub fn z_score(&self) -> f64 {
        (self.empirical - self.analytic).abs() / self.std_err
    }
}

/// Largest tolerated share of censored paths.
const MAX_CENSORED: f64 = 0.05;

/// Runs paths from `x` until they leave `[l, r]` (censored after
/// `10·cfg.t_max`) and compares the exit-left frequency with
/// `(s(r) − s(x))/(s(r) − s(l))`.
pub fn hitting_probability_vs_scale<C: CoefficientPair>(
    coeffs: &C,
    cfg: &SimConfig,
    l: f64,
    r: f64,
    x: f64,
) -> Result<HittingComparison> {
    for v in [l, r, x] {
        coeffs.check_interior(v)?;
    }
    if !(l < x && x < r) {
        return domain("need l < x < r");
    }
    if !(cfg.dt > 0.0 && cfg.t_max > 0.0 && cfg.n_paths > 0) {
        return Err(FlowError::InvalidParams("need dt, T > 0 and n_paths > 0".into()));
    }
    let sf = ScaleFunction::new(coeffs, Chart::Log, x, l, r)?;
    let (sl, sr) = (sf.s(l)?, sf.s(r)?);
    let analytic = sr / (sr - sl);
    let st = Stepper::new(coeffs, cfg.scheme);
    let (xl, xr) = (st.to_state(l), st.to_state(r));
    let horizon = 10.0 * cfg.t_max;
    // Some(true) = left exit, Some(false) = right exit, None = censored
    let outcomes: Vec<Result<Option<bool>>> = (0..cfg.n_paths as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = path_rng(cfg.seed, i);
            let mut s = st.to_state(x);
            let mut t = 0.0;
            while t < horizon {
                let (s2, b) = st.coeffs(s)?;
                let dt = st.local_dt(cfg.dt, (s - xl).min(xr - s), s2, b);
                let xi: f64 = rng.sample(StandardNormal);
                s = st.advance(s, s2, b, dt, xi).0;
                t += dt;
                if s <= xl {
                    return Ok(Some(true));
                }
                if s >= xr {
                    return Ok(Some(false));
                }
            }
            Ok(None)
        })
        .collect();
    let (mut left, mut done, mut censored) = (0usize, 0usize, 0usize);
    for o in outcomes {
        match o? {
            Some(true) => {
                left += 1;
                done += 1;
            }
            Some(false) => done += 1,
            None => censored += 1,
        }
    }
    if censored as f64 > MAX_CENSORED * cfg.n_paths as f64 {
        return Err(FlowError::Simulation(format!("{censored} of {} paths censored", cfg.n_paths)));
    }
    Ok(HittingComparison {
        empirical: left as f64 / done as f64,
        analytic,
        std_err: binomial_se(analytic, done),
        n_paths: done,
        censored,
    })
}

/// Spline-tabulated distance coefficients for simulation: exact evaluation
/// costs a quadrature per call.
pub fn tabulated_coeffs(params: &FlowParams) -> Result<Tabulated> {
    let exact = params.coefficients()?;
    let chart = Chart::for_geometry(params.geometry());
    let (lo, hi, n) = match params {
        FlowParams::Sphere(_) => (1e-6, std::f64::consts::PI - 1e-6, 481),
        FlowParams::Euclid(p) => (1e-6 / p.mass, 1e4 / p.mass, 481),
    };
    Tabulated::build(&exact, chart, lo, hi, n)
}
