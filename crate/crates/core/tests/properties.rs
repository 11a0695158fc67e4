mod common;

use common::*;
use crawford_core::*;
use num_complex::Complex64 as C64;
use proptest::prelude::*;
use proptest::strategy::Strategy;

const TOL: f64 = 1e-6;

fn arb_space() -> impl Strategy<Value = SpaceDescriptor> {
    (2usize..=3, prop::sample::select(PS.to_vec()), any::<bool>())
        .prop_map(|(d, p, cplx)| space(d, if cplx { Field::Complex } else { Field::Real }, p))
}

fn arb_operator(space: SpaceDescriptor) -> impl Strategy<Value = Operator> {
    let n = space.dim();
    let cplx = space.field() == Field::Complex;
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n * n).prop_map(move |v| {
        let rows: Vec<Vec<C64>> = (0..n)
            .map(|i| (0..n).map(|j| {
                let (re, im) = v[i * n + j];
                C64::new(re, if cplx { im } else { 0.0 })
            }).collect())
            .collect();
        Operator::from_rows(space.clone(), &rows).unwrap()
    })
}

fn arb_pair() -> impl Strategy<Value = Operator> {
    arb_space().prop_flat_map(arb_operator)
}

fn value(t: &Operator, q: Quantity) -> f64 {
    compute_with(t, q, crawford_core::Strategy::Auto, TOL, &EngineOptions::default()).unwrap().value
}

fn residual(t: &Operator, r: &ComputeResult) -> f64 {
    let s = &r.certificate;
    s.xstar().eval(&apply(t, s.x()).unwrap()).norm()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn quantities_are_ordered(t in arb_pair()) {
        let c = value(&t, Quantity::Crawford);
        let nu = value(&t, Quantity::Radius);
        let m = value(&t, Quantity::MinNorm);
        let big = value(&t, Quantity::OpNorm);
        prop_assert!(c <= nu + 2.0 * TOL);
        prop_assert!(c <= m + 2.0 * TOL);
        prop_assert!(nu <= big + 2.0 * TOL);
        prop_assert!(m <= big + 2.0 * TOL);
    }

    #[test]
    fn certificate_attains_value(t in arb_pair()) {
        let r = crawford_number(&t, crawford_core::Strategy::Auto, TOL).unwrap();
        prop_assert!(r.certificate.defect(t.space()) <= STATE_TOL);
        prop_assert!((residual(&t, &r) - r.value).abs() <= 1e-9);
    }

    #[test]
    fn adjoint_preserves_crawford(t in arb_pair()) {
        let a = value(&t, Quantity::Crawford);
        let b = value(&adjoint(&t), Quantity::Crawford);
        prop_assert!((a - b).abs() <= 2.0 * TOL, "{a} vs {b}");
    }

    #[test]
    fn homogeneous(t in arb_pair(), s in 0.1f64..3.0, theta in 0.0f64..std::f64::consts::TAU) {
        let w = if t.space().field() == Field::Complex { C64::from_polar(s, theta) } else { C64::new(-s, 0.0) };
        let a = value(&t, Quantity::Crawford);
        let b = value(&t.scaled(w).unwrap(), Quantity::Crawford);
        prop_assert!((b - s * a).abs() <= 2.0 * TOL * (1.0 + s), "{b} vs {s} * {a}");
    }

    #[test]
    fn lipschitz_in_operator(t in arb_pair(), seed in any::<u64>()) {
        let mut rng = crawford_core::rng::seeded(seed);
        let e = random_operator(&mut rng, t.space()).scaled(C64::new(0.05, 0.0)).unwrap();
        let te = t.add(&e).unwrap();
        let en = value(&e, Quantity::OpNorm);
        for q in [Quantity::Crawford, Quantity::Radius, Quantity::MinNorm] {
            let d = (value(&te, q) - value(&t, q)).abs();
            prop_assert!(d <= en + 3.0 * TOL, "{q:?}: {d} > {en}");
        }
    }

    #[test]
    fn unitary_invariance_on_l2(t in arb_space().prop_map(|s| space(s.dim(), s.field(), 2.0)).prop_flat_map(arb_operator),
                                theta in 0.0f64..std::f64::consts::TAU) {
        let n = t.dim();
        let (c, s) = (theta.cos(), theta.sin());
        let mut u = vec![vec![C64::new(0.0, 0.0); n]; n];
        for (i, row) in u.iter_mut().enumerate() {
            row[i] = C64::new(1.0, 0.0);
        }
        u[0][0] = C64::new(c, 0.0);
        u[0][1] = C64::new(-s, 0.0);
        u[1][0] = C64::new(s, 0.0);
        u[1][1] = C64::new(c, 0.0);
        let u = Operator::from_rows(t.space().clone(), &u).unwrap();
        let m = u.matrix() * t.matrix() * u.matrix().adjoint();
        let conj = Operator::new(t.space().clone(), m).unwrap();
        for q in [Quantity::Crawford, Quantity::Radius] {
            prop_assert!((value(&t, q) - value(&conj, q)).abs() <= 1e-9);
        }
    }

    #[test]
    fn non_injective_has_kernel_certificate(t in arb_pair()) {
        let n = t.dim();
        let mut m = t.matrix().clone();
        for i in 0..n {
            let v = m[(i, 0)] + m[(i, 1)];
            m[(i, n - 1)] = v;
        }
        if n == 2 {
            for i in 0..n {
                m[(i, 1)] = m[(i, 0)] * 2.0;
            }
        }
        let t = Operator::new(t.space().clone(), m).unwrap();
        let r = crawford_number(&t, crawford_core::Strategy::Auto, TOL).unwrap();
        prop_assert!(r.value <= 1e-12);
        let tx = apply(&t, r.certificate.x()).unwrap();
        prop_assert!(norm(t.space(), &tx).unwrap() <= 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

    #[test]
    fn zero_repair_is_close_and_attained(t in arb_pair(), extra in 0.01f64..0.5) {
        let c = value(&t, Quantity::Crawford);
        let eps = c + extra;
        let o = zero_crawford_repair(&t, eps).unwrap();
        prop_assert!(o.distance <= eps + TOL);
        prop_assert!(o.certificate_value() <= 1e-10);
        let again = repair_dispatch(&o.s, eps, 0).unwrap();
        prop_assert_eq!(again.kind, RepairKind::Zero);
        prop_assert!(again.distance <= 1e-6);
    }

    #[test]
    fn compact_repair_moves_by_min_norm(t in arb_pair()) {
        let m = value(&t, Quantity::MinNorm);
        let o = compact_style_repair(&t, m + 0.1).unwrap();
        prop_assert!(o.distance <= m + 2.0 * TOL);
        prop_assert!(o.certificate_value() <= 1e-10);
    }

    #[test]
    // the step estimates need |x_n*(T_n x_n)| to stay above the step sizes
    fn bpb_steps_respect_bounds(t in arb_space().prop_map(|s| space(2, s.field(), 2.0)).prop_flat_map(arb_operator),
                                eps in 0.25f64..2.0) {
        let r0 = crawford_number(&t, crawford_core::Strategy::Auto, 1e-10).unwrap();
        prop_assume!(r0.value >= eps / 2.0);
        let start = r0.certificate;
        let tr = bpb_refine(&t, &start, &BpbConfig::new(eps)).unwrap();
        let r = eps / 4.0;
        prop_assert!(tr.total_distance <= r / (1.0 - r) + 1e-12);
        for s in &tr.steps {
            prop_assert!(s.op_delta <= s.step_size + 1e-12);
        }
        prop_assert!(tr.final_gap <= 1e-6 + tr.tail);
    }
}

#[test]
fn rotation_is_injective_with_zero_crawford() {
    let s = space(2, Field::Real, 2.0);
    let t = Operator::from_real_rows(s, &[&[0.0, 1.0], &[-1.0, 0.0]]).unwrap();
    let r = crawford_number(&t, crawford_core::Strategy::Auto, TOL).unwrap();
    assert!(r.value <= 1e-12);
    assert!(r.attained);
    assert!((value(&t, Quantity::MinNorm) - 1.0).abs() <= 1e-12);
}

#[test]
fn complex_reflection_attains_zero() {
    let s = space(2, Field::Complex, 2.0);
    let t = Operator::diagonal(s.clone(), &[1.0, -1.0]).unwrap();
    let r = crawford_number(&t, crawford_core::Strategy::HilbertSweep, TOL).unwrap();
    assert!(r.value <= 1e-12);
    assert!(residual(&t, &r) <= 1e-12);
    let x = r.certificate.x().coords();
    assert!((x[0].norm() - x[1].norm()).abs() <= 1e-9);
}

#[test]
fn nilpotent_has_zero_crawford_and_half_radius() {
    let s = space(2, Field::Complex, 2.0);
    let t = Operator::from_real_rows(s, &[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
    assert!(value(&t, Quantity::Crawford) <= 1e-12);
    assert!((value(&t, Quantity::Radius) - 0.5).abs() <= 1e-9);
}

#[test]
fn swap_on_l1_and_linf() {
    for p in [1.0, f64::INFINITY] {
        let s = space(2, Field::Real, p);
        let t = Operator::from_real_rows(s, &[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
        assert!(value(&t, Quantity::Crawford) <= 1e-9, "p = {p}");
        assert!((value(&t, Quantity::Radius) - 1.0).abs() <= 1e-9, "p = {p}");
    }
}
