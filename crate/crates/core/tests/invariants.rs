use ncpoisson::elliptic::{c_coeffs, jac2_certificate, EllipticParams};
use ncpoisson::export::GenDocument;
use ncpoisson::freealg::{poly_mul, NcPoly, TracePoly, Word};
use ncpoisson::matrep::{bracket_value, bracket_value_matrix, eval_trace_poly, CMatrix, MatPoint};
use ncpoisson::nccalc::{cyclic_gradient, Chart};
use ncpoisson::polyvec::{jacobiator, jacobiator_index_formula, random_antisymmetric_rtensor, VectorField};
use ncpoisson::projective::{biv_equiv, descend, transfer_trace};
use ncpoisson::sample::{random_poly, random_trace_poly, random_word, rng};
use ncpoisson::Complex64;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn rel(a: &TracePoly, b: &TracePoly) -> f64 {
    a.distance(b) / a.max_abs().max(b.max_abs()).max(1.0)
}

fn cfg(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(cfg(64))]

    #[test]
    fn words_form_a_group(seed in any::<u64>(), m in 1usize..4) {
        let mut r = rng(seed);
        let a = random_word(&mut r, m, 4, true);
        let b = random_word(&mut r, m, 3, true);
        let d = random_word(&mut r, m, 5, true);
        prop_assert!(a.mul(&a.inverse()).is_one());
        prop_assert!(a.inverse().mul(&a).is_one());
        prop_assert_eq!(a.mul(&b).mul(&d), a.mul(&b.mul(&d)));
        prop_assert_eq!(a.mul(&b).inverse(), b.inverse().mul(&a.inverse()));
    }

    #[test]
    fn word_render_parse_round_trip(seed in any::<u64>(), m in 1usize..5) {
        let w = random_word(&mut rng(seed), m, 6, true);
        prop_assert_eq!(Word::parse(&w.render("u"), "u").unwrap(), w);
    }

    #[test]
    fn lincomb_algebra(seed in any::<u64>()) {
        let mut r = rng(seed);
        let f = random_poly(&mut r, 3, 3, 5, true);
        let g = random_poly(&mut r, 3, 3, 5, true);
        let h = random_poly(&mut r, 3, 2, 4, true);
        prop_assert!((&(&f + &g) - &g).distance(&f) < 1e-12);
        prop_assert!((&f + &(-&f)).is_zero());
        let left = poly_mul(&poly_mul(&f, &g), &h);
        let right = poly_mul(&f, &poly_mul(&g, &h));
        prop_assert!(left.distance(&right) < 1e-10);
        let dist = poly_mul(&f, &(&g + &h)).distance(&(&poly_mul(&f, &g) + &poly_mul(&f, &h)));
        prop_assert!(dist < 1e-10);
        prop_assert!(&f * c(2.0, -1.0) == &(&f * c(1.0, 0.0)) * c(2.0, -1.0));
    }

    #[test]
    fn trace_is_cyclic(seed in any::<u64>()) {
        let mut r = rng(seed);
        let f = random_poly(&mut r, 3, 3, 4, true);
        let g = random_poly(&mut r, 3, 3, 4, true);
        prop_assert!(poly_mul(&f, &g).trace().distance(&poly_mul(&g, &f).trace()) < 1e-10);
    }

    #[test]
    fn euler_relation_counts_net_degree(seed in any::<u64>(), m in 1usize..4, len in 0usize..7) {
        let w = random_word(&mut rng(seed), m, len, true);
        let net: i32 = w.letters().iter().map(|l| l.exponent()).sum();
        let f = TracePoly::monomial(&w);
        let grad = cyclic_gradient(&f, m);
        let expected = &f * f64::from(net);
        prop_assert!(grad.left_euler().trace().distance(&expected) < 1e-12);
        prop_assert!(grad.right_euler().trace().distance(&expected) < 1e-12);
    }

    #[test]
    fn cyclic_gradient_is_linear(seed in any::<u64>()) {
        let mut r = rng(seed);
        let f = random_trace_poly(&mut r, 3, 3, 4, true);
        let g = random_trace_poly(&mut r, 3, 3, 4, true);
        let s = c(0.5, 1.5);
        let lhs = cyclic_gradient(&(&f + &(&g * s)), 3);
        let (df, dg) = (cyclic_gradient(&f, 3), cyclic_gradient(&g, 3));
        for i in 0..3 {
            prop_assert!(lhs.parts[i].distance(&(&df.parts[i] + &(&dg.parts[i] * s))) < 1e-12);
        }
    }

    #[test]
    fn vector_field_commutator_acts_as_commutator(seed in any::<u64>()) {
        let mut r = rng(seed);
        let v = VectorField::new((0..2).map(|_| random_poly(&mut r, 2, 2, 2, false)).collect());
        let w = VectorField::new((0..2).map(|_| random_poly(&mut r, 2, 2, 2, false)).collect());
        let f = random_trace_poly(&mut r, 2, 3, 3, false);
        let lhs = v.commutator(&w).unwrap().apply(&f);
        let rhs = &v.apply(&w.apply(&f)) - &w.apply(&v.apply(&f));
        prop_assert!(rel(&lhs, &rhs) < 1e-10);
    }
}

proptest! {
    #![proptest_config(cfg(24))]

    #[test]
    fn antisymmetric_tensors_give_skew_brackets(seed in any::<u64>(), n in 2usize..5) {
        let mut r = rng(seed);
        let b = random_antisymmetric_rtensor(&mut r, n, 0.3).to_bivector();
        let f = random_trace_poly(&mut r, n, 3, 3, false);
        let g = random_trace_poly(&mut r, n, 3, 3, false);
        prop_assert!(rel(&b.eval(&f, &g), &(-&b.eval(&g, &f))) < 1e-12);
    }

    #[test]
    fn index_formula_matches_direct_jacobiator(seed in any::<u64>(), n in 2usize..4) {
        let mut r = rng(seed);
        let rt = random_antisymmetric_rtensor(&mut r, n, 0.4);
        let b = rt.to_bivector();
        let tr = |r: &mut _| random_trace_poly(r, n, 2, 2, false);
        let (f, g, h) = (tr(&mut r), tr(&mut r), tr(&mut r));
        prop_assert!(rel(&jacobiator(&b, &f, &g, &h), &jacobiator_index_formula(&rt, &f, &g, &h)) < 1e-10);
    }

    #[test]
    fn chart_transfer_round_trips(seed in any::<u64>(), n in 3usize..5, a in 0usize..3, b in 0usize..3) {
        let from = Chart::new(n, a).unwrap();
        let to = Chart::new(n, b).unwrap();
        let f = random_trace_poly(&mut rng(seed), n - 1, 3, 3, true);
        let there = transfer_trace(&f, &from, &to).unwrap();
        let back = transfer_trace(&there, &to, &from).unwrap();
        prop_assert!(rel(&back, &f) < 1e-12);
    }

    #[test]
    fn traces_are_conjugation_invariant(seed in any::<u64>(), size in 1usize..4) {
        let mut r = rng(seed);
        let f = random_trace_poly(&mut r, 2, 3, 4, true);
        let pt = MatPoint::random(&mut r, 2, size);
        let g = MatPoint::random(&mut r, 1, size).mats()[0].clone();
        let before = eval_trace_poly(&f, &pt).unwrap();
        let after = eval_trace_poly(&f, &pt.conjugate(&g).unwrap()).unwrap();
        prop_assert!((before - after).norm() < 1e-8 * before.norm().max(1.0));
    }

    #[test]
    fn matrix_and_symbolic_brackets_agree(seed in any::<u64>(), size in 1usize..4) {
        let mut r = rng(seed);
        let b = random_antisymmetric_rtensor(&mut r, 3, 0.3).to_bivector();
        let f = random_trace_poly(&mut r, 3, 3, 2, false);
        let g = random_trace_poly(&mut r, 3, 3, 2, false);
        let pt = MatPoint::random(&mut r, 3, size);
        let sym = bracket_value(&b, &f, &g, &pt).unwrap();
        let mat = bracket_value_matrix(&b, &f, &g, &pt).unwrap();
        prop_assert!((sym - mat).norm() < 1e-9 * sym.norm().max(1.0));
    }

    #[test]
    fn bracket_equivalence_is_reflexive_and_symmetric(seed in any::<u64>()) {
        let mut r = rng(seed);
        let b1 = random_antisymmetric_rtensor(&mut r, 3, 0.4);
        let b2 = random_antisymmetric_rtensor(&mut r, 3, 0.4);
        let (a1, a2) = (descend(&b1).unwrap(), descend(&b2).unwrap());
        prop_assert!(biv_equiv(&a1, &a1, 2).unwrap().equivalent);
        let forward = biv_equiv(&a1, &a2, 2).unwrap();
        let backward = biv_equiv(&a2, &a1, 2).unwrap();
        prop_assert_eq!(forward.equivalent, backward.equivalent);
        prop_assert!((forward.max_defect - backward.max_defect).abs() < 1e-9 * forward.max_defect.max(1.0));
    }
}

#[test]
fn scaled_brackets_are_not_equivalent() {
    let a = descend(&random_antisymmetric_rtensor(&mut rng(3), 3, 0.5)).unwrap();
    assert!(!biv_equiv(&a, &a.scale(c(2.0, 0.0)), 2).unwrap().equivalent);
}

#[test]
fn jac2_solution_survives_rescaling() {
    // (p, q) scale with lambda, the equations with lambda^2
    let params = EllipticParams::new(5, 2, c(0.3, 1.1)).unwrap();
    let base = c_coeffs(&params).unwrap();
    for s in [c(3.0, -2.0), c(1e-3, 0.0), c(0.0, 40.0)] {
        let cert = jac2_certificate(&base.scale(s));
        assert!(cert.residual < 1e-8, "{s}: {}", cert.residual);
    }
}

#[test]
fn exported_documents_round_trip() {
    for (n, k) in [(3, 1), (3, 2), (4, 1), (5, 2)] {
        let params = EllipticParams::new(n, k, c(0.3, 1.1)).unwrap();
        let doc = GenDocument::generate(&params, n - 1).unwrap();
        let text = serde_json::to_string(&doc).unwrap();
        let back: GenDocument = serde_json::from_str(&text).unwrap();
        assert_eq!(serde_json::to_string(&back).unwrap(), text);
        assert!(back.consistency_defect().unwrap() < 1e-12);
        assert_eq!(back.bracket().unwrap().bivector(), doc.bracket().unwrap().bivector());
    }
}

#[test]
fn scalar_points_reduce_to_commutative_evaluation() {
    let f = &NcPoly::x(0) * c(2.0, 0.0);
    let g = &(&f * &NcPoly::x(1)) + &NcPoly::x(1);
    let pt = MatPoint::scalars(&[c(3.0, 0.0), c(0.0, 1.0)]).unwrap();
    let v = eval_trace_poly(&g.trace(), &pt).unwrap();
    assert!((v - c(0.0, 7.0)).norm() < 1e-14);
    let m: CMatrix = pt.eval_poly(&f).unwrap();
    assert_eq!(m.nrows(), 1);
}
