use proptest::prelude::*;

use weblab::analytic::{c, eval_jet, eval_point, parse_expr, serialize_expr, t, value_grad, x1, x2, Expr};
use weblab::datum::{Oscillatory, Table, TableMode};
use weblab::flows::{flow, FlowConfig};
use weblab::hypotheses::{aux_weak_check, jet_kernel_dim, web_curvature_theta, KernelMode};
use weblab::lineardata::{derive_datum, enumerate_associated, n1_matrix_alpha, DerivationStep};
use weblab::sublevel::{sample_sublevel, MeasureConfig};
use weblab::{Domain, TestFunction, TripleDatum, VectorField};

mod common;

use common::{brute_force_counts, factorial, linear_datum, richardson};

fn expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![Just(x1()), Just(x2()), (-2.0..2.0f64).prop_map(c)];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a + b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a * b),
            inner.clone().prop_map(|a| a.sin()),
            inner.clone().prop_map(|a| (c(0.5) * a).exp()),
            inner.clone().prop_map(|a| (c(1.0) + a.clone() * a).ln()),
            (inner.clone(), inner).prop_map(|(a, b)| a / (c(2.0) + b.powi(2))),
        ]
    })
}

fn point() -> impl Strategy<Value = [f64; 2]> {
    (-0.7..0.7f64, -0.7..0.7f64).prop_map(|(a, b)| [a, b])
}

fn dyadic() -> impl Strategy<Value = f64> {
    (-2i32..=2).prop_map(|k| k as f64 / 8.0)
}

/// Polynomial data near the flat web, with dyadic coefficients.
fn poly_datum() -> impl Strategy<Value = TripleDatum> {
    prop::collection::vec(dyadic(), 12).prop_map(|k| {
        let small = |i: usize| c(k[i]) * x1() + c(k[i + 1]) * x2() + c(k[i + 2]) * x1() * x2();
        TripleDatum::new(
            Domain::rect([0.0, 1.0], [0.0, 1.0]),
            [c(1.0) + small(0), c(1.0) + small(3), c(1.0) + small(6)],
            [x1(), x2(), x1() + x2() + small(9)],
        )
    })
}

fn curved(a2: Expr) -> TripleDatum {
    TripleDatum::new(
        Domain::rect([0.5, 1.5], [0.5, 1.5]),
        [c(1.0), a2, c(1.0)],
        [x1(), x2(), x1().powi(2) + x1() * x2() + x2().powi(2)],
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn json_round_trip(e in expr()) {
        let s = serialize_expr(&e);
        prop_assert_eq!(parse_expr(&s).unwrap(), e);
    }

    #[test]
    fn jet_value_and_partials(e in expr(), p in point()) {
        let jet = eval_jet(&e, p, 5).unwrap();
        prop_assert_eq!(*jet.value(), eval_point(&e, p).unwrap());
        for d in 1..=3 {
            for j in 0..=d {
                let i = d - j;
                let exact = jet.coeff(i, j).unwrap() * factorial(i) * factorial(j);
                let fd = richardson(&e, p, i, j);
                let tol = if d < 3 { 1e-6 } else { 1e-5 };
                prop_assert!((exact - fd).abs() <= tol * exact.abs().max(1.0), "d^({},{}) {} vs {}", i, j, exact, fd);
            }
        }
    }

    #[test]
    fn dir_is_directional_derivative(e in expr(), w1 in expr(), w2 in expr(), p in point()) {
        let d = eval_point(&e.clone().dir(w1.clone(), w2.clone()), p).unwrap();
        let (_, g) = value_grad(&e, p).unwrap();
        let want = eval_point(&w1, p).unwrap() * g[0] + eval_point(&w2, p).unwrap() * g[1];
        prop_assert!((d - want).abs() <= 1e-10 * (1.0 + want.abs()));
    }

    #[test]
    fn annihilating_fields_kill_their_maps(d in poly_datum()) {
        for k in 1..=3 {
            let w = d.annihilating_field(k).apply(d.phi[k - 1].clone());
            for x in d.domain.grid(30) {
                prop_assert!(eval_point(&w, x).unwrap().abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn osc_respects_floor(seed in 0u64..1000, terms in 1usize..8, floor in 0.1..3.0f64) {
        let o = Oscillatory::new(seed, terms, 25.0, floor).unwrap();
        for k in 0..10_000 {
            let y = -5.0 + 10.0 * k as f64 / 10_000.0;
            prop_assert!(o.eval(y).abs() >= floor - 1e-12);
        }
    }

    #[test]
    fn cell_table_is_constant_on_cells(values in prop::collection::vec(-5.0..5.0f64, 5), u in 0.0..1.0f64) {
        let tab = Table::new(0.0, 1.0, 0.25, values.clone(), TableMode::Cell).unwrap();
        let cell = ((u / 0.25).floor() as usize).min(3);
        prop_assert_eq!(tab.eval(u).unwrap(), tab.eval(cell as f64 * 0.25).unwrap());
    }

    #[test]
    fn kernel_modes_agree_and_dims_settle(d in poly_datum()) {
        let center = [0.5, 0.25];
        let mut prev = usize::MAX;
        for n in 0..=5 {
            let fl = jet_kernel_dim(&d, center, n, KernelMode::FloatSvd).unwrap().dim;
            let ex = jet_kernel_dim(&d, center, n, KernelMode::ExactRational).unwrap().dim;
            prop_assert_eq!(fl, ex);
            if n >= 2 {
                prop_assert!(ex <= prev);
            }
            prev = ex;
        }
    }

    #[test]
    fn kernel_is_permutation_equivariant(d in poly_datum(), perm in 0usize..6) {
        let orders = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        let o = orders[perm];
        let q = TripleDatum::new(
            d.domain.clone(),
            [d.a[o[0]].clone(), d.a[o[1]].clone(), d.a[o[2]].clone()],
            [d.phi[o[0]].clone(), d.phi[o[1]].clone(), d.phi[o[2]].clone()],
        );
        for n in [2, 4] {
            let a = jet_kernel_dim(&d, [0.5, 0.25], n, KernelMode::ExactRational).unwrap();
            let b = jet_kernel_dim(&q, [0.5, 0.25], n, KernelMode::ExactRational).unwrap();
            prop_assert_eq!(a.dim, b.dim);
        }
    }

    #[test]
    fn aux_weak_swap_invariance(k1 in 0.2..1.5f64, k2 in -0.5..0.5f64) {
        let d = curved((c(k1) * x1().powi(2) + c(k2) * x1() * x2()).exp());
        let a = aux_weak_check(&d, (2, 3, 1), 12, 1e-9).unwrap();
        let b = aux_weak_check(&d, (3, 2, 1), 12, 1e-9).unwrap();
        prop_assert_eq!(a.verdict, b.verdict);
    }

    #[test]
    fn theta_ignores_affine_relabeling(s in prop_oneof![0.5..3.0f64, -3.0..-0.5f64], b in -2.0..2.0f64, p in (0.6..1.4f64, 0.6..1.4f64)) {
        let d = curved(c(1.0));
        let mut e = d.clone();
        e.phi[2] = c(s) * d.phi[2].clone() + c(b);
        let x = [p.0, p.1];
        let u = web_curvature_theta(&d, x).unwrap();
        let v = web_curvature_theta(&e, x).unwrap();
        prop_assert!((u - v).abs() <= 1e-8 * (1.0 + u.abs()));
    }

    #[test]
    fn flows_reverse(p in (-1.0..1.0f64, -1.0..1.0f64), time in -1.0..1.0f64) {
        let w = VectorField::planar(-x2() + c(0.3), x1() * x1() * c(0.2) + c(1.0));
        let dom = Domain::rect([-10.0, 10.0], [-10.0, 10.0]);
        let cfg = FlowConfig::default();
        let y = flow(&w, [p.0, p.1], time, &cfg, &dom).unwrap();
        let back = flow(&w, y, -time, &cfg, &dom).unwrap();
        prop_assert!((back[0] - p.0).abs() < 1e-7 && (back[1] - p.1).abs() < 1e-7);
    }

    #[test]
    fn alpha_is_multilinear(k in -3.0..3.0f64, xs in (0.0..1.0f64, 0.0..1.0f64), y in 0.0..1.0f64) {
        let a = [x1().exp() + x2(), x1() * x2() + c(1.0)];
        let (_, base) = n1_matrix_alpha(&a, &[xs.0, xs.1], y).unwrap();
        let (_, scaled) = n1_matrix_alpha(&[a[0].clone(), c(k) * a[1].clone()], &[xs.0, xs.1], y).unwrap();
        prop_assert!((scaled - k * base).abs() <= 1e-12 * (1.0 + base.abs()));
    }

    #[test]
    fn derive_sizes_follow_the_rules(mult in prop::collection::vec(1usize..=3, 2..=4), pick in 0usize..100) {
        let a = mult.iter().enumerate()
            .map(|(j, &m)| (0..m).map(|k| c(1.0 + j as f64) + c(0.5 + k as f64) * x1()).collect())
            .collect();
        let d = linear_datum(&mult, a);
        let steps = DerivationStep::all(&d);
        let step = &steps[pick % steps.len()];
        let out = derive_datum(&d, step).unwrap();
        let np = mult[step.pivot_index() - 1];
        let total: usize = mult.iter().sum();
        let want = if np == 1 { 2 * (total - 1) } else { 2 * total - np - 1 };
        prop_assert_eq!(out.multiplicity.iter().sum::<usize>(), want);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn enumeration_matches_brute_force(mult in prop::collection::vec(1usize..=2, 2..=3)) {
        prop_assume!(mult.iter().sum::<usize>() <= 5);
        let a = mult.iter().enumerate()
            .map(|(j, &m)| (0..m).map(|k| c(1.0 + j as f64) + c(0.5 + k as f64) * x1() * x2()).collect())
            .collect();
        let d = linear_datum(&mult, a);
        let tree = enumerate_associated(&d, 2, false).unwrap();
        prop_assert_eq!(tree.per_level, brute_force_counts(mult, 2));
    }

    #[test]
    fn sublevel_properties(seeds in (0u64..1000, 0u64..1000, 0u64..1000), perm in 0usize..6) {
        let d = curved(c(1.0) + c(0.25) * x1().powi(2));
        let f: Vec<TestFunction> = [(seeds.0, 0.0), (seeds.1, 0.0), (seeds.2, 1.0)]
            .into_iter()
            .map(|(s, fl)| TestFunction::Osc(Oscillatory::new(s, 4, 10.0, fl).unwrap()))
            .collect();
        let grid = sample_sublevel(&d, &f, &MeasureConfig::grid(256)).unwrap();
        let eps = [0.25, 0.1, 0.03, 0.01];
        let m: Vec<f64> = eps.iter().map(|&e| grid.estimate(e).value).collect();
        prop_assert!(m.windows(2).all(|w| w[1] <= w[0]));

        let mc = sample_sublevel(&d, &f, &MeasureConfig::monte_carlo(1 << 18, seeds.0)).unwrap();
        for &e in &eps[..2] {
            let g = grid.estimate(e).value;
            let est = mc.estimate(e);
            let se = est.stderr.unwrap();
            prop_assert!((est.value - g).abs() <= 4.0 * se + 1e-4, "eps {}: mc {} grid {} se {}", e, est.value, g, se);
        }

        let orders = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        let o = orders[perm];
        let q = TripleDatum::new(
            d.domain.clone(),
            [d.a[o[0]].clone(), d.a[o[1]].clone(), d.a[o[2]].clone()],
            [d.phi[o[0]].clone(), d.phi[o[1]].clone(), d.phi[o[2]].clone()],
        );
        let g: Vec<TestFunction> = o.iter().map(|&k| f[k].clone()).collect();
        let permuted = sample_sublevel(&q, &g, &MeasureConfig::grid(256)).unwrap();
        for &e in &eps {
            let (a, b) = (grid.estimate(e).value, permuted.estimate(e).value);
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a), "eps {}: {} vs {}", e, a, b);
        }
    }
}

#[test]
fn expression_in_t_is_a_test_function() {
    assert!(TestFunction::expr(t().sin()).is_ok());
    assert!(TestFunction::expr(x1()).is_err());
}
