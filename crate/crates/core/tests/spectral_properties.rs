use std::sync::Arc;

use gdn_core::graph::{drop_edge, SparseGraph};
use gdn_core::laplacian::LaplacianOperator;
use gdn_core::rng;
use gdn_core::spectral::{eigen_decompose, kernels, relative_frobenius, PolynomialFilter};
use gdn_core::synth::erdos_renyi;
use ndarray::{array, Array2};
use proptest::prelude::*;
use rand::Rng;

fn random_graph(n: usize, p: f64, seed: u64) -> Arc<SparseGraph> {
    Arc::new(erdos_renyi(n, p, &mut rng::stream(seed, rng::DATA)).unwrap())
}

fn random_matrix(rows: usize, cols: usize, seed: u64) -> Array2<f64> {
    let mut r = rng::stream(seed, rng::SIGNAL);
    Array2::from_shape_simple_fn((rows, cols), || r.random_range(-1.0..1.0))
}

fn dot(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

fn filters() -> Vec<PolynomialFilter> {
    vec![
        PolynomialFilter::maclaurin_inverse(1),
        PolynomialFilter::maclaurin_inverse(3),
        PolynomialFilter::heat(1.0, 3, false).unwrap(),
        PolynomialFilter::heat(1.0, 10, false).unwrap(),
        PolynomialFilter::heat(1.0, 3, true).unwrap(),
        PolynomialFilter::gcn_propagation(),
    ]
}

/// `Σ c_n λⁿ` evaluated with explicit powers.
fn power_sum(coeffs: &[f64], lambda: f64) -> f64 {
    coeffs.iter().enumerate().map(|(k, c)| c * lambda.powi(k as i32)).sum()
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn laplacian_is_symmetric(n in 2usize..=64, p in 0.0f64..0.3, seed in any::<u64>()) {
        let op = LaplacianOperator::symmetric(random_graph(n, p, seed));
        let x = random_matrix(n, 1, seed);
        let y = random_matrix(n, 1, seed ^ 1);
        let lhs = dot(&y, &op.apply(x.view()).unwrap());
        let rhs = dot(&x, &op.apply(y.view()).unwrap());
        prop_assert!((lhs - rhs).abs() <= 1e-12, "{lhs} vs {rhs}");
    }

    #[test]
    fn spectrum_within_zero_two(n in 2usize..=64, p in 0.0f64..0.4, seed in any::<u64>()) {
        let es = eigen_decompose(&LaplacianOperator::symmetric(random_graph(n, p, seed)), 64).unwrap();
        for &l in es.eigenvalues.iter() {
            prop_assert!((-1e-10..=2.0 + 1e-10).contains(&l), "eigenvalue {l}");
        }
    }

    #[test]
    fn isolated_coordinates_stay_zero(n in 3usize..=40, p in 0.0f64..0.2, seed in any::<u64>()) {
        let g = random_graph(n, p, seed);
        let op = LaplacianOperator::symmetric(g.clone());
        let mut x = random_matrix(n, 2, seed);
        for i in 0..n {
            if g.degree(i) == 0 {
                x.row_mut(i).fill(0.0);
            }
        }
        let lx = op.apply(x.view()).unwrap();
        for i in (0..n).filter(|&i| g.degree(i) == 0) {
            prop_assert!(lx.row(i).iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn drop_edge_output_is_valid(n in 2usize..=64, p in 0.0f64..0.5, keep in 0.0f64..=1.0, seed in any::<u64>()) {
        let g = random_graph(n, p, seed);
        let d = drop_edge(&g, keep, &mut rng::stream(seed, rng::DROP_EDGE));
        prop_assert!(d.check_invariants().is_ok());
        prop_assert_eq!(d.n_nodes(), n);
        prop_assert!(d.edges().iter().all(|&(u, v)| g.has_edge(u, v)));
    }

    #[test]
    fn filters_match_eigen_oracle(n in 2usize..=64, p in 0.02f64..0.3, seed in any::<u64>()) {
        let op = LaplacianOperator::symmetric(random_graph(n, p, seed));
        let es = eigen_decompose(&op, 64).unwrap();
        let x = random_matrix(n, 3, seed);
        for f in filters() {
            let coeffs = f.coeffs().to_vec();
            let fast = f.apply(&op, x.view()).unwrap();
            let exact = es.filter_apply(|l| power_sum(&coeffs, l), x.view()).unwrap();
            let err = relative_frobenius(&fast, &exact);
            prop_assert!(err <= 1e-10, "{:?}: {err}", f.label());
        }
    }

    #[test]
    fn filters_are_linear(n in 2usize..=48, seed in any::<u64>(), a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let op = LaplacianOperator::symmetric(random_graph(n, 0.15, seed));
        let x = random_matrix(n, 2, seed);
        let y = random_matrix(n, 2, seed ^ 7);
        for f in filters() {
            let combined = f.apply(&op, (&x * a + &y * b).view()).unwrap();
            let split = f.apply(&op, x.view()).unwrap() * a + f.apply(&op, y.view()).unwrap() * b;
            let diff = (&combined - &split).iter().fold(0.0f64, |m, v| m.max(v.abs()));
            prop_assert!(diff <= 1e-10, "{diff}");
        }
    }

    #[test]
    fn filters_are_self_adjoint(n in 2usize..=48, seed in any::<u64>()) {
        let op = LaplacianOperator::symmetric(random_graph(n, 0.15, seed));
        let x = random_matrix(n, 2, seed);
        let y = random_matrix(n, 2, seed ^ 3);
        for f in filters() {
            let lhs = dot(&f.apply(&op, x.view()).unwrap(), &y);
            let rhs = dot(&x, &f.apply(&op, y.view()).unwrap());
            prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs()), "{lhs} vs {rhs}");
        }
    }

    #[test]
    fn wavelet_pair_near_inverse_at_order_twelve(n in 2usize..=64, p in 0.02f64..0.3, seed in any::<u64>()) {
        let op = LaplacianOperator::symmetric(random_graph(n, p, seed));
        let fwd = PolynomialFilter::heat(1.0, 12, false).unwrap();
        let inv = PolynomialFilter::heat(1.0, 12, true).unwrap();
        let x = random_matrix(n, 2, seed);
        let round = fwd.apply(&op, inv.apply(&op, x.view()).unwrap().view()).unwrap();
        let err = (&round - &x).iter().fold(0.0f64, |m, v| m.max(v.abs()));
        prop_assert!(err <= 1e-4, "{err}");
    }
}

#[test]
fn wavelet_round_trip_error_at_order_three_is_bounded_by_product_truncation() {
    // The round trip acts spectrally as q(λ)r(λ); its deviation from 1 bounds
    // the error in each eigen-coordinate.
    let fwd = PolynomialFilter::heat(1.0, 3, false).unwrap();
    let inv = PolynomialFilter::heat(1.0, 3, true).unwrap();
    let product_err = (0..=20_000)
        .map(|i| {
            let l = i as f64 * 1e-4;
            (fwd.eval(l) * inv.eval(l) - 1.0).abs()
        })
        .fold(0.0f64, f64::max);
    for seed in 0..10 {
        let g = random_graph(40, 0.1, seed);
        let op = LaplacianOperator::symmetric(g);
        let x = random_matrix(40, 1, seed);
        let round = fwd.apply(&op, inv.apply(&op, x.view()).unwrap().view()).unwrap();
        let l2 = |a: &Array2<f64>| a.iter().map(|v| v * v).sum::<f64>().sqrt();
        let err = l2(&(&round - &x));
        assert!(err <= product_err * (1.0 + 1e-6) * l2(&x) + 1e-12, "seed {seed}: {err} vs {product_err}");
        println!("order 3 round trip, seed {seed}: ‖ΨΨ⁻¹x − x‖∞ = {:.3e}", (&round - &x).iter().fold(0.0f64, |m, v| m.max(v.abs())));
    }
}

#[test]
fn heat_truncation_error_on_grid() {
    let worst = |order: usize| {
        let coeffs: Vec<f64> = (0..=order).map(|k| (-1.0f64).powi(k as i32) / factorial(k)).collect();
        (0..=200)
            .map(|i| {
                let l = i as f64 * 0.01;
                (power_sum(&coeffs, l) - (-l).exp()).abs()
            })
            .fold(0.0f64, f64::max)
    };
    let (e3, e10) = (worst(3), worst(10));
    assert!(e3 <= 0.5, "order 3: {e3}");
    assert!(e10 <= 1e-2, "order 10: {e10}");
    // the library's coefficients are the same series
    for order in [3, 10] {
        let f = PolynomialFilter::heat(1.0, order, false).unwrap();
        for (k, c) in f.coeffs().iter().enumerate() {
            let expect = (-1.0f64).powi(k as i32) / factorial(k);
            assert!((c - expect).abs() <= 1e-15 * expect.abs().max(1.0));
        }
    }
}

#[test]
fn order_three_inverse_error_bound_below_one() {
    let f = PolynomialFilter::maclaurin_inverse(3);
    for i in 0..=90 {
        let l = i as f64 * 0.01;
        let err = (f.eval(l) - kernels::exact_inverse(l)).abs();
        let bound = l.powi(4) / (1.0 - l);
        assert!(err <= bound + 1e-12, "λ={l}: {err} > {bound}");
    }
}

#[test]
fn worked_filter_examples() {
    let k2 = Arc::new(SparseGraph::from_edges(2, [(0, 1)]).unwrap());
    let op = LaplacianOperator::symmetric(k2.clone());
    let x = array![[1.0], [0.0]];
    // p(0) = 1 on (1,1)/√2, p(2) = 15 on (1,-1)/√2
    let inv = PolynomialFilter::maclaurin_inverse(3).apply(&op, x.view()).unwrap();
    assert!((inv[[0, 0]] - 8.0).abs() < 1e-12 && (inv[[1, 0]] + 7.0).abs() < 1e-12);
    // q(0) = 1, q(2) = 1 - 2 + 2 - 4/3 = -1/3
    let heat = PolynomialFilter::heat(1.0, 3, false).unwrap().apply(&op, x.view()).unwrap();
    assert!((heat[[0, 0]] - 1.0 / 3.0).abs() < 1e-12 && (heat[[1, 0]] - 2.0 / 3.0).abs() < 1e-12);
    // exact inverse: components scaled by 1 and -1
    let es = eigen_decompose(&op, 64).unwrap();
    let exact = es.filter_apply(kernels::exact_inverse, x.view()).unwrap();
    assert!(exact[[0, 0]].abs() < 1e-12 && (exact[[1, 0]] - 1.0).abs() < 1e-12);
    // P3 has λ = 1 and the exact inverse is singular there
    let p3 = Arc::new(SparseGraph::from_edges(3, [(0, 1), (1, 2)]).unwrap());
    let es3 = eigen_decompose(&LaplacianOperator::symmetric(p3), 64).unwrap();
    assert!(es3.filter_apply(kernels::exact_inverse, Array2::ones((3, 1)).view()).is_err());
}
