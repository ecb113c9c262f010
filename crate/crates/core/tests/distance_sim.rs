use flowlab::coeffs::{Chart, Geometry};
use flowlab::distance_sim::*;
use flowlab::feller::ScaleFunction;
use flowlab::params::FlowParams;
use flowlab::sphere_cov::SphereParams;
use flowlab::stats::{binomial_se, wilson_interval, Z99_ONE_SIDED};

fn base() -> SimConfig {
    SimConfig {
        dt: 1e-3,
        t_max: 5.0,
        n_paths: 2000,
        seed: 5,
        hit_eps: 1e-4,
        phi0: 0.1,
        scheme: SimScheme::SquaredProcess,
        hit_mode: HitMode::Absorb,
    }
}

fn sphere(d: u32, alpha: f64, eta: f64) -> FlowParams {
    FlowParams::Sphere(SphereParams::from_eta(d, alpha, eta).unwrap())
}

#[test]
fn coalescent_point_absorbs() {
    let tab = tabulated_coeffs(&sphere(2, 1.8, 0.0)).unwrap();
    let r = simulate(&tab, Geometry::Sphere, &base()).unwrap();
    let k = r.absorption_times.len();
    let (lo, _) = wilson_interval(k, r.n_paths, 2.0 * Z99_ONE_SIDED);
    assert!(lo > 0.0, "absorbed {k} of {}", r.n_paths);
    assert!(r.absorption_times.iter().all(|&t| t > 0.0 && t <= 5.0 + 1e-12));
}

#[test]
fn dt_refinement_is_stable() {
    let tab = tabulated_coeffs(&sphere(2, 1.8, 0.0)).unwrap();
    let cfg = SimConfig { t_max: 1.0, ..base() };
    let a = simulate(&tab, Geometry::Sphere, &cfg).unwrap().absorbed_fraction;
    let b = simulate(&tab, Geometry::Sphere, &SimConfig { dt: 5e-4, ..cfg }).unwrap().absorbed_fraction;
    let se = binomial_se(0.5 * (a + b), 2000) * 2f64.sqrt();
    assert!((a - b).abs() < 2.0 * se.max(1e-3), "{a} vs {b}");
}

#[test]
fn entrance_hits_vanish_as_eps_shrinks() {
    let tab = tabulated_coeffs(&sphere(3, 1.0, 0.8)).unwrap();
    let fr: Vec<f64> = [1e-2, 1e-3, 1e-4]
        .iter()
        .map(|&eps| {
            let cfg = SimConfig { hit_eps: eps, hit_mode: HitMode::Record, ..base() };
            simulate(&tab, Geometry::Sphere, &cfg).unwrap().absorbed_fraction
        })
        .collect();
    for w in fr.windows(2) {
        assert!(w[1] <= w[0] + 2.0 * binomial_se(w[0].max(1.0 / 2000.0), 2000), "{fr:?}");
    }
    let (_, hi) = wilson_interval((fr[2] * 2000.0).round() as usize, 2000, 2.576);
    assert!(hi < 0.005, "{fr:?}");
}

#[test]
fn tabulated_scale_matches_exact() {
    let p = sphere(2, 1.5, 0.3);
    let exact = p.coefficients().unwrap();
    let tab = tabulated_coeffs(&p).unwrap();
    let se = ScaleFunction::new(exact.as_ref(), Chart::Log, 0.3, 0.05, 1.0).unwrap();
    let st = ScaleFunction::new(&tab, Chart::Log, 0.3, 0.05, 1.0).unwrap();
    for x in [0.05, 0.1, 0.6, 1.0] {
        let (a, b) = (se.s(x).unwrap(), st.s(x).unwrap());
        assert!((a - b).abs() < 1e-5 * a.abs(), "{x}: {a} vs {b}");
    }
}

#[test]
fn direct_scheme_agrees_away_from_zero() {
    let p = sphere(2, 1.5, 0.3);
    let tab = tabulated_coeffs(&p).unwrap();
    let cfg = SimConfig { n_paths: 3000, scheme: SimScheme::DirectReflected, ..base() };
    let h = hitting_probability_vs_scale(&tab, &cfg, 0.1, 1.0, 0.4).unwrap();
    assert!(h.z_score() < 3.0, "{h:?}");
}
