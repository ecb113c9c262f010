use flowlab::signflow::{
    chaos_recursion, chaos_term_direct, exact_on_grid, exact_solution, gaussian_heat, heat_quadrature,
    statistical_checks, Grid, NoisePath, StatOptions,
};
use flowlab::stats::mean_se;
use flowlab::stream::path_rng;

fn gauss(x: f64) -> f64 {
    (-x * x).exp()
}

fn shifted_gauss(x: f64) -> f64 {
    (-(x - 1.0) * (x - 1.0)).exp()
}

fn path(dt: f64, t: f64, seed: u64, i: u64) -> NoisePath {
    NoisePath::sample(dt, (t / dt).round() as usize, true, &mut path_rng(seed, i)).unwrap()
}

fn grid() -> Grid {
    Grid::new(8.0, 512).unwrap()
}

#[test]
fn chaos_error_decreases_with_order() {
    let g = grid();
    let n_paths = 200;
    let mut err = [0.0; 5];
    for i in 0..n_paths {
        let s = chaos_recursion(gauss, &g, 0.5, &path(1e-3, 0.5, 9, i), 4).unwrap();
        for (n, e) in err.iter_mut().enumerate() {
            *e += s.error(n).powi(2) / n_paths as f64;
        }
    }
    for n in 1..5 {
        assert!(err[n] < err[n - 1], "order {n}: {err:?}");
    }
}

#[test]
fn recursion_and_direct_sums_agree() {
    let g = grid();
    let p = path(0.02, 0.4, 3, 0);
    let s = chaos_recursion(gauss, &g, 0.4, &p, 3).unwrap();
    for n in 1..=3 {
        let direct = chaos_term_direct(gauss, &g, 0.4, &p, n).unwrap();
        let diff: Vec<f64> = direct.iter().zip(&s.terms[n]).map(|(a, b)| a - b).collect();
        assert!(g.l2(&diff) < 1e-10, "order {n}: {}", g.l2(&diff));
        assert!(g.l2(&direct) > 1e-3);
    }
}

/// `J^1, J^2, J^3` and `S^4` at `x` over coarse independent paths.
fn chaos_samples(x_index: usize, n_paths: u64) -> Vec<[f64; 4]> {
    let g = grid();
    (0..n_paths)
        .map(|i| {
            let s = chaos_recursion(gauss, &g, 0.5, &path(0.025, 0.5, 21, i), 4).unwrap();
            [s.terms[1][x_index], s.terms[2][x_index], s.terms[3][x_index], s.orders[4][x_index]]
        })
        .collect()
}

#[test]
fn chaos_terms_are_centred_and_orthogonal() {
    let g = grid();
    let xi = g.n / 2 + 16; // x = 0.5
    let x = g.x(xi);
    let samples = chaos_samples(xi, 1000);
    for k in 0..3 {
        let v: Vec<f64> = samples.iter().map(|s| s[k]).collect();
        let (m, se) = mean_se(&v);
        assert!(m.abs() <= 3.0 * se, "J^{} mean {m} ± {se}", k + 1);
    }
    let prod: Vec<f64> = samples.iter().map(|s| s[0] * s[1]).collect();
    let (m, se) = mean_se(&prod);
    assert!(m.abs() <= 3.0 * se, "cov(J1, J2) = {m} ± {se}");
    let s4: Vec<f64> = samples.iter().map(|s| s[3]).collect();
    let (m, se) = mean_se(&s4);
    assert!((m - gaussian_heat(x, 0.5, 0.0, 1.0)).abs() <= 3.0 * se);
}

#[test]
fn truncation_floor_shrinks_with_dt() {
    let g = grid();
    let n_paths = 50;
    let mut err = [0.0; 3];
    for i in 0..n_paths {
        let fine = path(1e-3, 0.5, 33, i);
        for (k, factor) in [4usize, 2, 1].iter().enumerate() {
            let p = fine.coarsen(*factor).unwrap();
            err[k] += chaos_recursion(gauss, &g, 0.5, &p, 4).unwrap().error(4).powi(2);
        }
    }
    assert!(err[1] < err[0] && err[2] < err[1], "{err:?}");
}

#[test]
fn coarsened_path_has_same_exact_solution() {
    let g = grid();
    let fine = path(1e-3, 0.5, 34, 0);
    let a = exact_on_grid(gauss, &g, &fine, 0.5).unwrap();
    let b = exact_on_grid(gauss, &g, &fine.coarsen(4).unwrap(), 0.5).unwrap();
    assert_eq!(a, b);
}

#[test]
fn cocycle_identity() {
    let (t, s) = (0.3, 0.2);
    for i in 0..20 {
        for bridge in [true, false] {
            let full = NoisePath::sample(0.01, 50, bridge, &mut path_rng(40, i)).unwrap();
            let j = full.index_of(t).unwrap();
            let tail = full.shifted(j).unwrap();
            let g = |y: f64| exact_solution(shifted_gauss, y, &tail, s).unwrap();
            for x in [-1.5, -0.2, 0.05, 0.7, 2.0] {
                let lhs = exact_solution(shifted_gauss, x, &full, t + s).unwrap();
                let rhs = exact_solution(g, x, &full, t).unwrap();
                assert!((lhs - rhs).abs() < 1e-12, "x = {x}: {lhs} vs {rhs}");
            }
        }
    }
}

#[test]
fn mean_is_heat_semigroup() {
    let opts = StatOptions { n_paths: 100_000, seed: 1, dt: 1e-2 };
    let r = statistical_checks(gauss, 1.0, &[0.5], &opts).unwrap();
    assert!((r[0].mean - 0.531_187_890_452_651_5).abs() <= 3.0 * r[0].mean_se, "{:?}", r[0]);
}

#[test]
fn contraction_on_grid_and_flow_far_from_origin() {
    let xs: Vec<f64> = (-40..=40).map(|i| i as f64 * 0.1).collect();
    let opts = StatOptions { n_paths: 20_000, seed: 2, dt: 1e-2 };
    for f in [gauss, shifted_gauss] {
        let r = statistical_checks(f, 1.0, &xs, &opts).unwrap();
        assert!(r.iter().all(|p| p.contraction_holds(3.0)));
    }
    // at x = 10 the origin is out of reach, so S_t f is f(x + W_t);
    // f is centred there so both sides are of order one
    let near_ten = |y: f64| (-(y - 10.0) * (y - 10.0)).exp();
    let far = statistical_checks(near_ten, 1.0, &[10.0], &opts).unwrap()[0];
    assert!(far.gap().abs() <= 3.0 * far.second_se, "{far:?}");
}

#[test]
fn gap_at_origin_vanishes_for_even_f_and_not_otherwise() {
    let opts = StatOptions { n_paths: 100_000, seed: 3, dt: 1e-2 };
    let even = statistical_checks(gauss, 1.0, &[0.0], &opts).unwrap()[0];
    assert!(even.gap().abs() <= 3.0 * even.second_se, "{even:?}");
    assert!(!even.strict_gap());
    let asymmetric = statistical_checks(shifted_gauss, 1.0, &[0.0], &opts).unwrap()[0];
    assert!(asymmetric.strict_gap(), "{asymmetric:?}");
    // gap = ¼ E[(f(R) − f(−R))²] with R = |W_1|, by quadrature
    let oracle = heat_quadrature(|y| (shifted_gauss(y) - shifted_gauss(-y)).powi(2) / 4.0, 0.0, 1.0).unwrap();
    assert!((asymmetric.gap() - oracle).abs() <= 3.0 * asymmetric.second_se, "{} vs {oracle}", asymmetric.gap());
}
