mod common;

use std::f64::consts::TAU;

use common::*;
use flowdet::determinant::{det_formula_symbols, fk_log_det, hs_path_functional, steinberg_delta, SteinbergSymbol};
use flowdet::flow::{flow_trace_error, orbit_restrict, FlowApproximant};
use flowdet::funcalc::{self, CMatrix};
use flowdet::hardy::{
    commutator_block, kernel_norm_identity, semicommutator_block, toeplitz_matrix, HardyWindow, OperatorMatrix,
};
use flowdet::symbol::{FrequencyModule, Lattice, Symbol};
use proptest::prelude::*;

fn close(a: num_complex::Complex64, b: num_complex::Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol * (1.0 + a.norm().max(b.norm()))
}

fn symbols_close(a: &Symbol, b: &Symbol, tol: f64) -> bool {
    a.terms()
        .chain(b.terms())
        .all(|(l, _)| close(a.coeff(l), b.coeff(l), tol))
}

proptest! {
    #[test]
    fn leibniz(phi in circle_symbol(6), psi in circle_symbol(6)) {
        let lhs = phi.product(&psi).unwrap().flow_derivative();
        let rhs = phi.flow_derivative().product(&psi).unwrap().plus(&phi.product(&psi.flow_derivative()).unwrap()).unwrap();
        prop_assert!(symbols_close(&lhs, &rhs, 1e-13));
    }

    #[test]
    fn pairing_is_antisymmetric_bitwise(phi in circle_symbol(8), psi in circle_symbol(8)) {
        prop_assert_eq!(phi.pairing(&psi).unwrap(), -psi.pairing(&phi).unwrap());
    }

    #[test]
    fn pairing_of_real_symbols_is_real(phi in real_circle_symbol(8), psi in real_circle_symbol(8)) {
        let z = phi.pairing(&psi).unwrap();
        prop_assert!(z.im.abs() <= 1e-12 * (1.0 + z.norm()));
    }

    #[test]
    fn pairing_is_integral_of_derivative_product(phi in circle_symbol(5), psi in circle_symbol(5)) {
        // trapezoid rule is exact for degree < points
        let m = 64;
        let avg: num_complex::Complex64 = (0..m)
            .map(|k| {
                let x = [k as f64 / m as f64];
                phi.flow_derivative().evaluate(&x).unwrap() * psi.evaluate(&x).unwrap()
            })
            .sum::<num_complex::Complex64>() / m as f64;
        prop_assert!(close(avg, phi.pairing(&psi).unwrap(), 1e-12));
    }

    #[test]
    fn pairing_of_product_with_derivative_vanishes(phi in circle_symbol(5)) {
        // ∫ (φ²)′ dμ = 0
        let sq = phi.product(&phi).unwrap();
        let one = Symbol::constant(FrequencyModule::circle(), c(1.0, 0.0));
        prop_assert!(sq.pairing(&one).unwrap().norm() <= 1e-12);
    }

    #[test]
    fn c1_sandwich(phi in circle_symbol(6)) {
        let b = phi.c1_norm_bounds(13).unwrap();
        let dense = phi.c1_norm_bounds(13 * 256).unwrap();
        // the coarse grid is a subset of the dense one
        prop_assert!(b.lower <= dense.lower);
        prop_assert!(dense.lower <= b.upper * (1.0 + 1e-14));
        prop_assert!(b.upper == dense.upper);
        // doubling never decreases the sampled end
        let d = phi.c1_norm_bounds(26).unwrap();
        prop_assert!(d.lower >= b.lower);
    }

    #[test]
    fn trace_formula(phi in circle_symbol(8), psi in circle_symbol(8)) {
        let n = ((phi.max_degree() + psi.max_degree()) as usize).max(1);
        let k = commutator_block(&phi, &psi, &HardyWindow::circle(n)).unwrap();
        let rhs = -phi.pairing(&psi).unwrap() / c(0.0, TAU);
        prop_assert!(close(k.weighted_trace(), rhs, 1e-12));
    }

    #[test]
    fn semicommutator_matches_large_truncation(phi in circle_symbol(5), psi in circle_symbol(5)) {
        // the far corner of a truncated product is polluted by the cut; the
        // leading block is not
        let n = ((phi.max_degree() + psi.max_degree()) as usize).max(1);
        let big = HardyWindow::circle(n + 12);
        let direct = toeplitz_matrix(&phi, &big).unwrap().entries * toeplitz_matrix(&psi, &big).unwrap().entries
            - toeplitz_matrix(&phi.product(&psi).unwrap(), &big).unwrap().entries;
        let s = semicommutator_block(&phi, &psi, &HardyWindow::circle(n)).unwrap();
        let lead = direct.view((0, 0), (n, n)).into_owned();
        prop_assert!(max_abs(&(lead - &s.entries)) <= 1e-13);
    }

    #[test]
    fn semicommutator_vanishes_for_analytic_right_factor(phi in circle_symbol(5), psi in circle_symbol(5)) {
        let analytic = Symbol::from_terms(FrequencyModule::circle(), psi.terms().map(|(l, v)| (Lattice::from(l.coords()[0].abs()), *v))).unwrap();
        let n = ((phi.max_degree() + analytic.max_degree()) as usize).max(1);
        let s = semicommutator_block(&phi, &analytic, &HardyWindow::circle(n)).unwrap();
        prop_assert!(s.entries.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn kernel_identity_exact_side(phi in circle_symbol(6)) {
        let win = HardyWindow::two_sided(FrequencyModule::circle(), phi.max_degree() as usize + 1).unwrap();
        let k = kernel_norm_identity(&phi, &win, 1.0).unwrap();
        prop_assert!((k.lhs - k.rhs_exact).abs() <= 1e-10 * (1.0 + k.rhs_exact));
    }

    #[test]
    fn restriction_is_an_algebra_map(
        phi in torus_symbol(0.6180339887498949, 2),
        psi in torus_symbol(0.6180339887498949, 2),
        y1 in 0.0..1.0f64,
        y2 in 0.0..1.0f64,
    ) {
        let a = FlowApproximant::new(0.6180339887498949, 13, 21, [y1, y2]).unwrap();
        let lhs = orbit_restrict(&phi.product(&psi).unwrap(), &a).unwrap().symbol;
        let rhs = orbit_restrict(&phi, &a).unwrap().symbol.product(&orbit_restrict(&psi, &a).unwrap().symbol).unwrap();
        prop_assert!(symbols_close(&lhs, &rhs, 1e-13));
    }

    #[test]
    fn restriction_commutes_with_derivative(phi in torus_symbol(8.0 / 13.0, 3), y1 in 0.0..1.0f64, y2 in 0.0..1.0f64) {
        // on the module of slope p/q itself the two derivatives agree term by term
        let theta = 0.6180339887498949;
        let a = FlowApproximant::new(theta, 8, 13, [y1, y2]).unwrap();
        let lhs = orbit_restrict(&phi.flow_derivative(), &a).unwrap().symbol;
        let rhs = orbit_restrict(&phi, &a).unwrap().symbol.flow_derivative();
        prop_assert!(symbols_close(&lhs, &rhs, 1e-13));
    }

    #[test]
    fn flow_error_matches_closed_form(phi in torus_symbol(0.6180339887498949, 2), psi in torus_symbol(0.6180339887498949, 2)) {
        let theta = 0.6180339887498949;
        let a = FlowApproximant::new(theta, 21, 34, [0.25, 0.5]).unwrap();
        let e = flow_trace_error(&phi, &psi, &a, None).unwrap();
        prop_assume!(!e.aliased);
        let weight: num_complex::Complex64 = phi
            .terms()
            .map(|(l, v)| v * psi.coeff(&l.neg()) * l.coords()[1] as f64)
            .sum();
        let closed = (theta - 21.0 / 34.0).abs() * weight.norm();
        prop_assert!((e.error - closed).abs() <= 1e-12 * (1.0 + closed));
    }

    #[test]
    fn det_formula_bimultiplicative(a in circle_symbol(6), b in circle_symbol(6), psi in circle_symbol(6)) {
        let lhs = det_formula_symbols(&a.plus(&b).unwrap(), &psi).unwrap();
        let rhs = det_formula_symbols(&a, &psi).unwrap() * det_formula_symbols(&b, &psi).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.max(rhs));
    }

    #[test]
    fn steinberg_antisymmetric(phi in circle_symbol(6), psi in circle_symbol(6)) {
        let s = SteinbergSymbol::new(phi, psi).unwrap();
        let prod = steinberg_delta(&s).unwrap() * steinberg_delta(&s.swapped()).unwrap();
        prop_assert!((prod - 1.0).abs() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exp_inverse(seed in any::<u64>(), n in 1usize..12, norm in 0.0..5.0f64) {
        let a = random_with_norm(&mut rng(seed), n, norm.max(1e-3));
        let prod = funcalc::mat_exp(&a).unwrap() * funcalc::mat_exp(&-&a).unwrap();
        prop_assert!(max_abs(&(prod - CMatrix::identity(n, n))) <= 1e-11);
    }

    #[test]
    fn log_abs_det_additive(seed in any::<u64>(), n in 1usize..12) {
        let mut r = rng(seed);
        let a = CMatrix::identity(n, n) * c(2.0, 0.0) + random_with_norm(&mut r, n, 1.0);
        let b = CMatrix::identity(n, n) * c(0.0, 2.0) + random_with_norm(&mut r, n, 1.0);
        let lhs = funcalc::log_abs_det(&(&a * &b)).unwrap();
        let rhs = funcalc::log_abs_det(&a).unwrap() + funcalc::log_abs_det(&b).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs()));
    }

    #[test]
    fn fk_det_multiplicative_and_similarity_invariant(seed in any::<u64>(), n in 2usize..10, w in 0.05..1.0f64) {
        let mut r = rng(seed);
        let win = HardyWindow::circle(n).with_weight(w).unwrap();
        let q1 = CMatrix::identity(n, n) * c(1.5, 0.0) + random_with_norm(&mut r, n, 1.0);
        let q2 = CMatrix::identity(n, n) * c(0.0, 1.5) + random_with_norm(&mut r, n, 1.0);
        let g = CMatrix::identity(n, n) * c(2.0, 0.0) + random_with_norm(&mut r, n, 1.0);
        let d = |m: CMatrix| fk_log_det(&OperatorMatrix::new(win.clone(), m).unwrap()).unwrap().exp();
        let (d1, d2) = (d(q1.clone()), d(q2.clone()));
        let d12 = d(&q1 * &q2);
        prop_assert!((d12 - d1 * d2).abs() <= 1e-10 * d12);
        let conj = &g * &q1 * funcalc::inverse(&g).unwrap();
        prop_assert!((d(conj) - d1).abs() <= 1e-10 * d1);
    }

    #[test]
    fn path_functional_is_trace_of_commutator(seed in any::<u64>(), n in 2usize..16) {
        let mut r = rng(seed);
        let win = HardyWindow::circle(n);
        let t = OperatorMatrix::new(win.clone(), random_with_norm(&mut r, n, 1.0)).unwrap();
        let w = OperatorMatrix::new(win, random_with_norm(&mut r, n, 1.0)).unwrap();
        let got = hs_path_functional(&t, &w, &funcalc::gauss_legendre(32).unwrap()).unwrap();
        let want = funcalc::commutator(&t.entries, &w.entries).trace();
        prop_assert!((got - want).norm() <= 1e-8);
    }

    #[test]
    fn quadrature_converges_spectrally(seed in any::<u64>(), n in 2usize..8) {
        // entire integrand of the path functional: error at 2k nodes is far
        // below error at k nodes
        let mut r = rng(seed);
        let win = HardyWindow::circle(n);
        let t = OperatorMatrix::new(win.clone(), random_with_norm(&mut r, n, 1.0)).unwrap();
        let w = OperatorMatrix::new(win, random_with_norm(&mut r, n, 1.0)).unwrap();
        let exact = funcalc::commutator(&t.entries, &w.entries).trace();
        let err = |k| (hs_path_functional(&t, &w, &funcalc::gauss_legendre(k).unwrap()).unwrap() - exact).norm();
        let (e2, e4) = (err(2), err(4));
        prop_assert!(e4 <= 1e-3 * e2 || e4 <= 1e-13);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn series_tail_bound_never_violated(seed in any::<u64>(), n in 1usize..=16, tn in 0.0..1.0f64) {
        let mut r = rng(seed);
        let t = random_with_norm(&mut r, n, tn);
        let w = random_matrix(&mut r, n);
        let s = funcalc::adjoint_series(&t, &w, 1e-13).unwrap();
        let oracle = funcalc::mat_exp(&t).unwrap() * &w * funcalc::mat_exp(&-&t).unwrap();
        let gap = funcalc::op_norm(&(s.value - oracle)).unwrap();
        let wn = funcalc::op_norm(&w).unwrap();
        prop_assert!(gap <= s.tail_bound + 1e-11 * wn, "gap {gap} bound {}", s.tail_bound);
    }
}

#[test]
fn binomial_matches_recursion() {
    let mut r = rng(3);
    for size in [2usize, 4, 7] {
        let t = random_with_norm(&mut r, size, 1.0);
        let w = random_matrix(&mut r, size);
        let mut nested = w.clone();
        for n in 0..=8 {
            let b = funcalc::commutator_term_binomial(&t, &w, n);
            let scale = max_abs(&nested).max(1.0);
            assert!(max_abs(&(b - &nested)) <= 1e-11 * scale, "n = {n}");
            nested = funcalc::commutator(&t, &nested);
        }
    }
}

#[test]
fn gauss_legendre_invariants() {
    for n in [1usize, 2, 3, 5, 16, 32, 64, 128, 256] {
        let rule = funcalc::gauss_legendre(n).unwrap();
        assert!(rule.weights.iter().all(|&w| w > 0.0));
        assert!((rule.weights.iter().sum::<f64>() - 1.0).abs() <= 1e-14, "n = {n}");
        assert!(rule.node_residual <= 1e-14);
        // ∫₀¹ t^k dt = 1/(k+1) for k ≤ 2n-1
        for k in [0, n, 2 * n - 1] {
            let got: f64 = rule.integrate(|t| t.powi(k as i32));
            assert!((got - 1.0 / (k + 1) as f64).abs() <= 1e-12, "n = {n}, k = {k}");
        }
    }
}
