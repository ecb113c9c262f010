use flowlab::coeffs::Geometry;
use flowlab::euclid_cov::{distance_coeffs_rd, EuclidParams};
use flowlab::feller::*;
use flowlab::params::FlowParams;
use flowlab::sphere_cov::{distance_coeffs, SphereParams};
use std::f64::consts::FRAC_PI_2;

fn sphere_class(d: u32, alpha: f64, eta: f64) -> (BoundaryClass, ScaleSpeedReport) {
    let c = distance_coeffs(&SphereParams::from_eta(d, alpha, eta).unwrap()).unwrap();
    classify_zero_boundary(&c, FRAC_PI_2, &default_probe(FRAC_PI_2)).unwrap()
}

#[test]
fn sphere_zero_boundary_examples() {
    assert_eq!(sphere_class(2, 1.5, 0.05).0, BoundaryClass::ExitAbsorbing);
    assert_eq!(sphere_class(3, 1.5, 0.5).0, BoundaryClass::EntranceOpen);
    assert_eq!(sphere_class(2, 1.0, 0.2).0, BoundaryClass::RegularInstantReflecting);
}

#[test]
fn fitted_mu_matches_formula() {
    for &(d, alpha, eta) in &[(2u32, 1.0, 0.2), (3, 1.5, 0.5), (2, 0.6, 0.9)] {
        let (_, rep) = sphere_class(d, alpha, eta);
        let mu = mu_exponent(d, alpha, eta);
        assert!((rep.mu - mu).abs() <= rep.mu_half_width.max(1e-6), "{} vs {mu}", rep.mu);
    }
}

#[test]
fn numeric_regime_examples() {
    let opts = NumericOptions::default();
    let s = FlowParams::Sphere(SphereParams::from_eta(2, 1.5, 0.3).unwrap());
    assert_eq!(classify_regime_numeric(&s, &opts).unwrap().0, RegimeLabel::DiffusiveWithHitting);
    let e = FlowParams::Euclid(EuclidParams::from_eta(2, 1.5, 0.3, 1.0).unwrap());
    assert_eq!(classify_regime_numeric(&e, &opts).unwrap().0, RegimeLabel::DiffusiveWithHitting);
    let h = FlowParams::Sphere(SphereParams::from_eta(4, 1.3, 0.0).unwrap());
    let (label, rep) = classify_regime_numeric(&h, &opts).unwrap();
    assert_eq!(label, RegimeLabel::DiffusiveWithoutHitting);
    assert!(rep.is_none());
    let full = NumericOptions { check_high_dimension: true, ..opts };
    assert_eq!(classify_regime_numeric(&h, &full).unwrap().0, RegimeLabel::DiffusiveWithoutHitting);
}

#[test]
fn label_invariant_under_anchor() {
    // the sphere anchor can move by at most a factor 2 − ε, since π/2·2 = π
    for &(d, alpha, eta) in &[(2u32, 1.5, 0.05), (2, 1.0, 0.2), (3, 1.5, 0.5)] {
        let s = FlowParams::Sphere(SphereParams::from_eta(d, alpha, eta).unwrap());
        let e = FlowParams::Euclid(EuclidParams::from_eta(d, alpha, eta, 1.0).unwrap());
        for p in [s, e] {
            let scales: &[f64] = match p {
                FlowParams::Sphere(_) => &[0.5, 1.0, 1.5],
                FlowParams::Euclid(_) => &[0.5, 1.0, 2.0],
            };
            let labels: Vec<RegimeLabel> = scales
                .iter()
                .map(|&k| {
                    let o = NumericOptions { anchor_scale: k, ..Default::default() };
                    classify_regime_numeric(&p, &o).unwrap().0
                })
                .collect();
            assert!(labels.iter().all(|l| *l == labels[0]), "{p:?}: {labels:?}");
        }
    }
}

#[test]
fn far_boundary_examples() {
    for &(d, alpha, eta) in &[(2u32, 1.0, 0.2), (3, 0.5, 0.9), (2, 1.8, 0.0)] {
        let c = distance_coeffs(&SphereParams::from_eta(d, alpha, eta).unwrap()).unwrap();
        let f = far_boundary_open(&c, Geometry::Sphere, FRAC_PI_2).unwrap();
        assert!(f.open, "sphere ({d}, {alpha}, {eta}): {:?}", f.fit);
    }
    for &(d, transient) in &[(2u32, false), (3, true)] {
        let c = distance_coeffs_rd(&EuclidParams::from_eta(d, 1.2, 0.4, 1.0).unwrap()).unwrap();
        let f = far_boundary_open(&c, Geometry::Euclid, 1.0).unwrap();
        assert_eq!(f.transient_to_infinity, Some(transient), "d={d}: {:?}", f.fit);
        // s' ~ r^{1−d}
        assert!((f.fit.exponent - (d as f64 - 2.0)).abs() < 1e-6);
    }
}

#[test]
fn numeric_agrees_with_analytic_on_grid() {
    use rayon::prelude::*;
    let mut pts = Vec::new();
    for i in 0..15 {
        for j in 0..15 {
            pts.push((0.1 + 1.85 * (i as f64 + 0.5) / 15.0, j as f64 / 14.0));
        }
    }
    let res: Vec<(f64, f64, RegimeLabel, RegimeLabel)> = pts
        .par_iter()
        .filter_map(|&(alpha, eta)| {
            let an = classify_regime_analytic(2, alpha, eta, 0.05).unwrap();
            if an == RegimeLabel::ThresholdIndeterminate {
                return None;
            }
            let p = FlowParams::Sphere(SphereParams::from_eta(2, alpha, eta).unwrap());
            let nu = classify_regime_numeric(&p, &NumericOptions::default()).unwrap().0;
            Some((alpha, eta, an, nu))
        })
        .collect();
    let bad: Vec<_> = res.iter().filter(|r| r.2 != r.3).collect();
    assert!(bad.is_empty(), "{bad:?}");
}
