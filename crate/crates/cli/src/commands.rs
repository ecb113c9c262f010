//! Command implementations. Each returns a [`Rendered`] result plus the
//! exit status it implies.

use std::f64::consts::PI;

use flowlab::distance_sim::{simulate, tabulated_coeffs, HitMode, SimConfig, SimScheme};
use flowlab::euclid_cov::{alpha_constants, EuclidKernel};
use flowlab::feller::{classify_regime_analytic, classify_regime_numeric, mu_exponent, theta1, theta2, NumericOptions};
use flowlab::signflow::{chaos_recursion, statistical_checks, Grid, NoisePath, StatOptions};
use flowlab::specfun::{gegenbauer_gamma, gegenbauer_gamma_integral, riemann_zeta, QuadratureSpec};
use flowlab::sphere_cov::{k_constant, k_constant_2d};
use flowlab::stability::{lyapunov_rd, lyapunov_sphere, LyapunovRd};
use flowlab::stats::{mean_se, wilson_interval, Z99};
use flowlab::stream::path_rng;
use flowlab::torus_field::{advect_pair, AdvectConfig};
use flowlab::{EuclidParams, FlowError, FlowParams, RegimeLabel, SphereParams};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::args::*;
use crate::output::{num, Body, Rendered, Table};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Flow(FlowError),
    Io(std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Flow(FlowError::InvalidParams(_) | FlowError::Domain(_)) => 2,
            CliError::Flow(FlowError::Inconclusive(_)) => 3,
            CliError::Flow(_) | CliError::Io(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(s) => write!(f, "usage error: {s}"),
            CliError::Flow(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl From<FlowError> for CliError {
    fn from(e: FlowError) -> Self {
        CliError::Flow(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Exit status of a completed run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    /// A check failed (exit 1).
    Failed,
    /// The answer is threshold-indeterminate (exit 3).
    Inconclusive,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::Failed => 1,
            Status::Inconclusive => 3,
        }
    }
}

pub fn run(cmd: &Command) -> CliResult<(Rendered, Status)> {
    let mut params = serde_json::to_value(cmd).expect("arguments serialize");
    // the destination is not a parameter: the same run writes the same bytes anywhere
    if let Value::Object(m) = &mut params {
        m.remove("output");
    }
    let (body, status) = match cmd {
        Command::Classify(a) => classify(a)?,
        Command::PhaseDiagram(a) => phase_diagram(a)?,
        Command::SimulateDistance(a) => simulate_distance(a)?,
        Command::SimulatePair(a) => simulate_pair(a)?,
        Command::SignDemo(a) => sign_demo(a)?,
        Command::ChaosDemo(a) => chaos_demo(a)?,
        Command::Selfcheck(_) => selfcheck()?,
    };
    Ok((Rendered { command: cmd.name(), params, body }, status))
}

/// `(a, b)` from either `η` (with `a + b = 1`) or explicit weights.
fn weights(eta: Option<f64>, a: Option<f64>, b: Option<f64>) -> CliResult<(f64, f64)> {
    match (eta, a, b) {
        (Some(e), None, None) => Ok((1.0 - e, e)),
        (None, Some(a), Some(b)) => Ok((a, b)),
        _ => Err(CliError::Usage("give either --eta or both --a and --b".into())),
    }
}

fn flow_params(geometry: GeometryArg, d: u32, alpha: f64, (a, b): (f64, f64), m: f64) -> CliResult<FlowParams> {
    Ok(match geometry {
        GeometryArg::Sphere => FlowParams::Sphere(SphereParams::new(d, alpha, a, b)?),
        GeometryArg::Euclid => FlowParams::Euclid(EuclidParams::new(d, alpha, a, b, m)?),
    })
}

fn label(r: RegimeLabel) -> String {
    format!("{r:?}")
}

/// `λ₁` for `α > 2`, with the sign reported separately so the divergent
/// case in ℝ^d still carries one.
fn lyapunov(p: &FlowParams) -> CliResult<(Option<f64>, f64)> {
    Ok(match p {
        FlowParams::Sphere(s) => {
            let l = lyapunov_sphere(s.alpha, s.a, s.b, s.d)?;
            (Some(l.value), sign(l.value))
        }
        FlowParams::Euclid(e) => match lyapunov_rd(e)? {
            LyapunovRd::Value { lambda, .. } => (Some(lambda), sign(lambda)),
            LyapunovRd::Divergent { sign } => (None, sign),
        },
    })
}

fn sign(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x.signum()
    }
}

fn classify(a: &ClassifyArgs) -> CliResult<(Body, Status)> {
    let p = flow_params(a.geometry, a.d, a.alpha, weights(a.eta, a.a, a.b)?, a.m)?;
    if !(a.band >= 0.0) {
        return Err(CliError::Usage("--band must be non-negative".into()));
    }
    let eta = p.eta();
    let regime = classify_regime_analytic(a.d, a.alpha, eta, a.band)?;
    let mut status = if regime == RegimeLabel::ThresholdIndeterminate { Status::Inconclusive } else { Status::Ok };
    let mut report = json!({
        "geometry": format!("{:?}", p.geometry()).to_lowercase(),
        "d": a.d,
        "alpha": a.alpha,
        "eta": eta,
        "regime": label(regime),
        "theta1": theta1(a.d, a.alpha),
        "theta2": theta2(a.d, a.alpha),
        "mu": mu_exponent(a.d, a.alpha, eta),
    });
    if a.alpha > 2.0 {
        let (value, s) = lyapunov(&p)?;
        report["lambda1"] = json!(value);
        report["lambda1_sign"] = json!(s);
    }
    if a.numeric {
        if a.alpha < 2.0 {
            let opts = NumericOptions { check_high_dimension: true, ..NumericOptions::default() };
            let (numeric, rep) = classify_regime_numeric(&p, &opts)?;
            if numeric == RegimeLabel::ThresholdIndeterminate {
                status = Status::Inconclusive;
            }
            report["numeric"] = json!({
                "regime": label(numeric),
                "agrees": numeric == regime,
                "diagnostics": rep.as_ref().map(|r| r.diagnostics()),
                "report": rep,
            });
        } else {
            report["numeric"] = json!({ "regime": null, "note": "numeric tests apply to alpha < 2 only" });
        }
    }
    Ok((Body::Report(report), status))
}

/// `n` evenly spaced points on `[lo, hi]` (endpoints included).
fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

struct PhaseRow {
    alpha: f64,
    eta: f64,
    regime: String,
    lambda1_sign: Option<f64>,
}

fn phase_diagram(a: &PhaseArgs) -> CliResult<(Body, Status)> {
    if a.steps == 0 {
        return Err(CliError::Usage("--steps must be positive".into()));
    }
    if !(a.alpha_min > 0.0 && a.alpha_min <= a.alpha_max) {
        return Err(CliError::Usage("need 0 < alpha-min <= alpha-max".into()));
    }
    if !(0.0 <= a.eta_min && a.eta_min <= a.eta_max && a.eta_max <= 1.0) {
        return Err(CliError::Usage("need 0 <= eta-min <= eta-max <= 1".into()));
    }
    if let Some(f) = a.numeric_verify {
        if !(0.0..=1.0).contains(&f) {
            return Err(CliError::Usage("--numeric-verify must lie in [0, 1]".into()));
        }
    }
    let points: Vec<(f64, f64)> = linspace(a.alpha_min, a.alpha_max, a.steps)
        .into_iter()
        .flat_map(|al| linspace(a.eta_min, a.eta_max, a.steps).into_iter().map(move |e| (al, e)))
        .collect();
    let mut rows: Vec<PhaseRow> = points
        .par_iter()
        .map(|&(alpha, eta)| -> CliResult<PhaseRow> {
            if alpha == 2.0 {
                return Ok(PhaseRow { alpha, eta, regime: "Unclassified".into(), lambda1_sign: None });
            }
            let regime = label(classify_regime_analytic(a.d, alpha, eta, 0.0)?);
            let lambda1_sign = if alpha > 2.0 {
                Some(lyapunov(&flow_params(a.geometry, a.d, alpha, (1.0 - eta, eta), a.m)?)?.1)
            } else {
                None
            };
            Ok(PhaseRow { alpha, eta, regime, lambda1_sign })
        })
        .collect::<CliResult<_>>()?;
    rows.sort_by(|x, y| x.alpha.total_cmp(&y.alpha).then(x.eta.total_cmp(&y.eta)));

    let mut table = Table {
        columns: vec!["alpha", "eta", "regime", "theta1", "theta2", "mu", "lambda1_sign"],
        rows: rows
            .iter()
            .map(|r| {
                vec![
                    num(r.alpha),
                    num(r.eta),
                    r.regime.clone(),
                    num(theta1(a.d, r.alpha)),
                    num(theta2(a.d, r.alpha)),
                    num(mu_exponent(a.d, r.alpha, r.eta)),
                    r.lambda1_sign.map(num).unwrap_or_default(),
                ]
            })
            .collect(),
        summary: Vec::new(),
    };
    if let Some(fraction) = a.numeric_verify {
        table.summary = verify(a, &rows, fraction)?;
    }
    Ok((Body::Table(table), Status::Ok))
}

/// Re-classifies a seeded random subset of the singular points that lie at
/// least `verify_margin` from both threshold curves.
fn verify(a: &PhaseArgs, rows: &[PhaseRow], fraction: f64) -> CliResult<Vec<(String, Value)>> {
    let eligible: Vec<&PhaseRow> = rows
        .iter()
        .filter(|r| {
            r.alpha < 2.0
                && (r.eta - theta1(a.d, r.alpha)).abs() >= a.verify_margin
                && (r.eta - theta2(a.d, r.alpha)).abs() >= a.verify_margin
        })
        .collect();
    let k = ((fraction * eligible.len() as f64).round() as usize).min(eligible.len());
    let mut picked = rand::seq::index::sample(&mut path_rng(a.seed, 0), eligible.len(), k).into_vec();
    picked.sort_unstable();
    let outcomes: Vec<Option<bool>> = picked
        .par_iter()
        .map(|&i| {
            let r = eligible[i];
            let p = flow_params(a.geometry, a.d, r.alpha, (1.0 - r.eta, r.eta), a.m).ok()?;
            let opts = NumericOptions { check_high_dimension: true, ..NumericOptions::default() };
            classify_regime_numeric(&p, &opts).ok().map(|(l, _)| label(l) == r.regime)
        })
        .collect();
    let agree = outcomes.iter().filter(|o| **o == Some(true)).count();
    let failed = outcomes.iter().filter(|o| o.is_none()).count();
    let (lo, hi) = if k > 0 { wilson_interval(agree, k, Z99) } else { (0.0, 1.0) };
    Ok(vec![
        ("verify_eligible".into(), json!(eligible.len())),
        ("verify_checked".into(), json!(k)),
        ("verify_agree".into(), json!(agree)),
        ("verify_errors".into(), json!(failed)),
        ("verify_agreement".into(), json!(if k > 0 { agree as f64 / k as f64 } else { 1.0 })),
        ("verify_ci99_low".into(), json!(lo)),
        ("verify_ci99_high".into(), json!(hi)),
    ])
}

fn simulate_distance(a: &SimDistanceArgs) -> CliResult<(Body, Status)> {
    let p = flow_params(a.geometry, a.d, a.alpha, weights(a.eta, a.a, a.b)?, a.m)?;
    let hit_mode = match a.hit_mode {
        HitModeArg::Absorb => HitMode::Absorb,
        HitModeArg::Record => HitMode::Record,
        HitModeArg::Auto => match classify_regime_analytic(a.d, a.alpha, p.eta(), 0.0)? {
            RegimeLabel::CoalescentFlow => HitMode::Absorb,
            _ => HitMode::Record,
        },
    };
    let cfg = SimConfig {
        dt: a.dt,
        t_max: a.t,
        n_paths: a.paths,
        seed: a.seed,
        hit_eps: a.hit_eps,
        phi0: a.phi0,
        scheme: match a.scheme {
            SchemeArg::Squared => SimScheme::SquaredProcess,
            SchemeArg::Direct => SimScheme::DirectReflected,
        },
        hit_mode,
    };
    cfg.validate(p.upper())?;
    let coeffs = tabulated_coeffs(&p)?;
    let res = simulate(&coeffs, p.geometry(), &cfg)?;
    let hits = res.absorption_times.len();
    let (lo, hi) = wilson_interval(hits, res.n_paths, Z99);
    let (mean_terminal, se_terminal) = mean_se(&res.terminal_values);
    let report = json!({
        "hit_mode": cfg.hit_mode,
        "n_paths": res.n_paths,
        "hits": hits,
        "absorbed_fraction": res.absorbed_fraction,
        "ci99": [lo, hi],
        "mean_hit_time": if hits > 0 { Some(mean_se(&res.absorption_times).0) } else { None },
        "mean_terminal": mean_terminal,
        "mean_terminal_se": se_terminal,
        "discarded": res.discarded,
        "negative_steps": res.negative_steps,
        "cap_hits": res.cap_hits,
    });
    Ok((Body::Report(report), Status::Ok))
}

fn simulate_pair(a: &SimPairArgs) -> CliResult<(Body, Status)> {
    // η defaults to ½ when no weights are given
    let eta = if a.a.is_none() && a.b.is_none() { a.eta.or(Some(0.5)) } else { a.eta };
    let (wa, wb) = weights(eta, a.a, a.b)?;
    let p = EuclidParams::new(a.d, a.alpha, wa, wb, a.m)?;
    let cfg = AdvectConfig {
        box_length: a.box_length,
        k_max: a.k_max,
        dt: a.dt,
        t_max: a.t,
        n_realizations: a.paths,
        seed: a.seed,
        sample_times: vec![a.t],
    };
    let x0 = vec![0.0; a.d as usize];
    let mut y0 = x0.clone();
    y0[0] = a.r0;
    let s = advect_pair(&p, &cfg, &x0, &y0)?;
    let table = Table {
        columns: vec!["sample", "distance"],
        rows: s.distances[0].iter().enumerate().map(|(i, r)| vec![i.to_string(), num(*r)]).collect(),
        summary: vec![("censored".into(), json!(s.censored)), ("realizations".into(), json!(a.paths))],
    };
    Ok((Body::Table(table), Status::Ok))
}

fn sign_demo(a: &SignDemoArgs) -> CliResult<(Body, Status)> {
    let c = a.shift;
    let f = move |y: f64| (-(y - c) * (y - c)).exp();
    let opts = StatOptions { n_paths: a.paths, seed: a.seed, dt: a.dt };
    let pts = statistical_checks(f, a.t, &a.x, &opts)?;
    let table = Table {
        columns: vec!["x", "mean", "mean_se", "heat", "second_moment", "second_se", "heat_of_square", "gap"],
        rows: pts
            .iter()
            .map(|p| {
                [p.x, p.mean, p.mean_se, p.heat, p.second_moment, p.second_se, p.heat_of_square, p.gap()]
                    .into_iter()
                    .map(num)
                    .collect()
            })
            .collect(),
        summary: Vec::new(),
    };
    Ok((Body::Table(table), Status::Ok))
}

fn chaos_demo(a: &ChaosDemoArgs) -> CliResult<(Body, Status)> {
    if a.paths == 0 {
        return Err(CliError::Usage("--paths must be positive".into()));
    }
    if !(a.dt > 0.0 && a.t > 0.0) {
        return Err(CliError::Usage("need dt, t > 0".into()));
    }
    let grid = Grid::new(a.x_max, a.grid)?;
    let steps = (a.t / a.dt).round() as usize;
    let c = a.shift;
    let f = move |y: f64| (-(y - c) * (y - c)).exp();
    // squared L² error of S^N for every order, path by path
    let per_path: Vec<Vec<f64>> = (0..a.paths as u64)
        .into_par_iter()
        .map(|i| -> CliResult<Vec<f64>> {
            let path = NoisePath::sample(a.dt, steps, true, &mut path_rng(a.seed, i))?;
            let s = chaos_recursion(f, &grid, a.t, &path, a.orders)?;
            Ok((0..=a.orders).map(|n| s.error(n).powi(2)).collect())
        })
        .collect::<CliResult<_>>()?;
    let rows = (0..=a.orders)
        .map(|n| {
            let e: Vec<f64> = per_path.iter().map(|v| v[n]).collect();
            let (m, se) = mean_se(&e);
            vec![n.to_string(), num(m.sqrt()), num(m), num(se)]
        })
        .collect();
    let table = Table { columns: vec!["order", "l2_error", "mean_sq_error", "mean_sq_se"], rows, summary: Vec::new() };
    Ok((Body::Table(table), Status::Ok))
}

struct Check {
    name: String,
    value: f64,
    reference: f64,
    error: f64,
    tolerance: f64,
}

fn check(name: impl Into<String>, value: f64, reference: f64, relative: bool, tolerance: f64) -> Check {
    let diff = (value - reference).abs();
    let error = if relative { diff / reference.abs() } else { diff };
    Check { name: name.into(), value, reference, error, tolerance }
}

/// Oracle cross-checks: each quantity by two independent routes.
fn oracle_checks() -> CliResult<Vec<Check>> {
    let mut out = Vec::new();
    let q = QuadratureSpec::default();
    let mut worst = check("gegenbauer recurrence vs integral", 0.0, 0.0, false, 1e-8);
    for d in 2..=5u32 {
        for l in [1usize, 2, 5, 13, 30, 50] {
            for i in 0..=12 {
                let phi = PI * i as f64 / 12.0;
                let a = gegenbauer_gamma(l, d, phi.cos().clamp(-1.0, 1.0))?;
                let b = gegenbauer_gamma_integral(l, d, phi, &q)?;
                let c = check(format!("gegenbauer l={l} d={d} phi={phi:.4}"), a, b, false, 1e-8);
                if c.error > worst.error {
                    worst = Check { name: "gegenbauer recurrence vs integral".into(), ..c };
                }
            }
        }
    }
    out.push(worst);
    out.push(check("zeta(2) = pi^2/6", riemann_zeta(2.0)?, PI.powi(2) / 6.0, false, 1e-12));
    out.push(check("zeta(4) = pi^4/90", riemann_zeta(4.0)?, PI.powi(4) / 90.0, false, 1e-12));
    out.push(check("zeta(6) = pi^6/945", riemann_zeta(6.0)?, PI.powi(6) / 945.0, false, 1e-12));
    let q2 = QuadratureSpec::with_tol(1e-11, 1e-11).levels(40);
    out.push(check("K alpha=1 d=2 reduced = 2/3", k_constant(1.0, 2)?, 2.0 / 3.0, false, 1e-12));
    out.push(check("K alpha=1 d=2 double integral = 2/3", k_constant_2d(1.0, 2, &q2)?, 2.0 / 3.0, false, 1e-8));
    out.push(check(
        "K alpha=1 d=3 reduced vs double integral",
        k_constant(1.0, 3)?,
        k_constant_2d(1.0, 3, &q2)?,
        false,
        1e-8,
    ));
    for (alpha, d) in [(1.0, 2u32), (0.7, 3), (1.4, 2)] {
        let closed = alpha_constants(alpha, d)?.alpha1;
        let k = EuclidKernel::new(&EuclidParams::new(d, alpha, 1.0, 0.0, 1.0)?)?;
        let r: f64 = 1e-6;
        out.push(check(
            format!("alpha1 closed form vs D(r)/r^alpha alpha={alpha} d={d}"),
            k.d_full(r) / r.powf(alpha),
            closed,
            true,
            1e-3,
        ));
    }
    Ok(out)
}

fn selfcheck() -> CliResult<(Body, Status)> {
    let checks = oracle_checks()?;
    let all_pass = checks.iter().all(|c| c.error <= c.tolerance);
    let table = Table {
        columns: vec!["check", "status", "value", "reference", "error", "tolerance"],
        rows: checks
            .iter()
            .map(|c| {
                vec![
                    c.name.clone(),
                    if c.error <= c.tolerance { "PASS" } else { "FAIL" }.into(),
                    num(c.value),
                    num(c.reference),
                    num(c.error),
                    num(c.tolerance),
                ]
            })
            .collect(),
        summary: vec![("result".into(), json!(if all_pass { "PASS" } else { "FAIL" }))],
    };
    Ok((Body::Table(table), if all_pass { Status::Ok } else { Status::Failed }))
}
