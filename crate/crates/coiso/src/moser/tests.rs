use super::*;
use crate::expr::{int, rat, Chart};
use crate::exterior::parse_form;
use crate::structures::Structure;
use num_traits::Zero;
use proptest::prelude::*;
use std::sync::Arc;

fn chart(names: &[&str]) -> Arc<Chart> {
    Chart::new(names).unwrap()
}

fn f(text: &str, c: &Arc<Chart>) -> Form {
    parse_form(text, c).unwrap()
}

fn qpzm() -> Arc<Chart> {
    chart(&["q", "p", "z", "mu"])
}

#[test]
fn primitive_examples() {
    let c = qpzm();
    let p = fiber_homotopy_primitive(&f("dmu^dz", &c), &[3]).unwrap();
    assert_eq!(p.theta, f("mu*dz", &c));
    let p = fiber_homotopy_primitive(&f("2*mu*dmu^dq", &c), &[3]).unwrap();
    assert_eq!(p.theta, f("mu^2*dq", &c));
    assert_eq!(p.theta.d(), p.source);
    assert!(matches!(
        fiber_homotopy_primitive(&f("dq^dp", &c), &[3]),
        Err(MoserError::NotVanishingOnSection(_))
    ));
    assert!(matches!(fiber_homotopy_primitive(&f("mu*dq^dp", &c), &[3]), Err(MoserError::NotClosed)));
    assert!(homotopy_operator(&Form::from_scalar(Scalar::one(&c)), &[3]).is_err());
    assert_eq!(section_part(&f("dq^dp + mu*dq^dz + dmu^dz", &c), &[3]), f("dq^dp", &c));
}

fn golden_pair(c: &Arc<Chart>) -> (Form, Form) {
    let w1 = f("dq^dp + dmu^dz", c);
    let w2 = w1.try_add(&f("mu^2*dq", c).d()).unwrap();
    (w1, w2)
}

#[test]
fn vector_field_examples() {
    let c = qpzm();
    let (w1, w2) = golden_pair(&c);
    let same = MoserRun::closed(&w1, &w1, &[3], vec![], 10, 1e-6, 0.1).unwrap();
    let x = vec![rat(1, 3), int(2), int(-1), rat(1, 7)];
    assert_eq!(moser_vector_field_at(&same, &rat(1, 2), &x).unwrap(), vec![int(0); 4]);

    let run = MoserRun::closed(&w1, &w2, &[3], vec![], 10, 1e-6, 0.1).unwrap();
    let MoserMode::Closed(prim) = &run.mode else { panic!() };
    assert_eq!(prim.theta, f("mu^2*dq", &c));
    let on = vec![int(1), int(1), int(1), int(0)];
    assert_eq!(moser_vector_field_at(&run, &rat(1, 3), &on).unwrap(), vec![int(0); 4]);
    // i_X(dq∧dp + dμ∧dz) = −(1/100) dq gives X = (1/100) ∂p.
    let x = vec![int(0), int(0), int(0), rat(1, 10)];
    let v = moser_vector_field_at(&run, &int(0), &x).unwrap();
    assert_eq!(v, vec![int(0), rat(1, 100), int(0), int(0)]);
    let t1 = moser_vector_field_at(&run, &int(1), &x).unwrap();
    assert_eq!(t1, v);

    // A pair degenerate at the sample.
    let d1 = f("dq^dp", &c);
    let d2 = f("dq^dp + mu*dmu^dz", &c);
    let bad = MoserRun::closed(&d1, &d2, &[3], vec![], 10, 1e-6, 0.1).unwrap();
    assert!(matches!(
        moser_vector_field_at(&bad, &int(0), &x),
        Err(MoserError::DegenerateAtPoint { .. })
    ));
}

#[test]
fn run_validation() {
    let c = qpzm();
    let (w1, _) = golden_pair(&c);
    assert!(matches!(
        MoserRun::closed(&w1, &w1.try_add(&f("mu*dq^dp", &c)).unwrap(), &[3], vec![], 10, 1e-6, 0.1),
        Err(MoserError::NotClosed)
    ));
    assert!(MoserRun::closed(&w1, &w1, &[3], vec![], 0, 1e-6, 0.1).is_err());
    assert!(MoserRun::closed(&w1, &w1, &[3], vec![], 1, 0.0, 0.1).is_err());
    assert!(MoserRun::closed(&w1, &f("dq", &c), &[3], vec![], 1, 1.0, 0.1).is_err());
}

#[test]
fn flow_examples() {
    let c = qpzm();
    let (w1, w2) = golden_pair(&c);
    let samples = SampleGrid::random(&c, 11, 6, rat(1, 10)).unwrap().points().to_vec();
    let same = MoserRun::closed(&w1, &w1, &[3], samples.clone(), 50, 1e-12, 0.1).unwrap();
    let rep = moser_flow_verify(&same);
    assert!(rep.pass);
    assert!(rep.max_error < 1e-12);

    let run = MoserRun::closed(&w1, &w2, &[3], samples, 1000, 1e-6, 0.1).unwrap();
    let rep = moser_flow_verify(&run);
    assert!(rep.pass, "{rep:?}");
    assert_eq!(rep.samples.len(), 6);

    let d1 = f("dq^dp", &c);
    let d2 = f("dq^dp + mu*dmu^dz", &c);
    let bad = MoserRun::closed(&d1, &d2, &[3], vec![vec![int(0), int(0), int(0), rat(1, 10)]], 4, 1e-6, 0.1).unwrap();
    let rep = moser_flow_verify(&bad);
    assert!(!rep.pass);
    assert_eq!(rep.samples[0].aborted_at_t, Some(0.0));
}

#[test]
fn contact_flow() {
    let c = chart(&["t", "q", "p", "z", "mu"]);
    let e1 = f("dt - p*dq - mu*dz", &c);
    let e2 = f("dt - p*dq - mu*dz - mu^2*dq", &c);
    let samples = SampleGrid::random(&c, 5, 4, rat(1, 10)).unwrap().points().to_vec();
    let run = MoserRun::contact(&e1, &e2, samples, 200, 1e-6, 0.1).unwrap();
    let x = vec![int(0), int(0), int(0), int(0), rat(1, 10)];
    let v = moser_vector_field_at(&run, &rat(1, 2), &x).unwrap();
    let et = e1.scale(&rat(1, 2)).try_add(&e2.scale(&rat(1, 2))).unwrap();
    assert!(et.eval_at(&x).eval(std::slice::from_ref(&v)).unwrap().is_zero());
    let rep = moser_flow_verify(&run);
    assert!(rep.pass, "{rep:?}");
}

#[test]
fn proportionality_examples() {
    let c = chart(&["t", "th1", "th2"]);
    let cosy = |eta: &str, omega: &str| {
        GeometrySpec::new(&c, Structure::PreCosymplectic { eta: f(eta, &c), omega: f(omega, &c) }).unwrap()
    };
    let s1 = cosy("dth1", "dt^dth2");
    let s2 = cosy("dth1", "dt^dth2 + t*dth1^dt");
    let grid = SampleGrid::lattice(&c, vec![(int(-1), int(1), 3), (int(0), int(1), 2), (int(0), int(1), 2)]).unwrap();
    assert!(reeb_proportionality_check(&s1, &s1, &grid).unwrap().proportional);
    let rep = reeb_proportionality_check(&s1, &s2, &grid).unwrap();
    assert!(!rep.proportional);
    let (w, label) = rep.witness.unwrap();
    assert_ne!(grid.points()[w][0], int(0));
    assert_eq!(label, "R");
    for (x, ok) in grid.points().iter().zip(&rep.per_point) {
        assert_eq!(*ok, x[0].is_zero());
    }
    let scaled = cosy("2*dth1", "dt^dth2");
    assert!(reeb_proportionality_check(&s1, &scaled, &grid).unwrap().proportional);
    let sy = GeometrySpec::new(&c, Structure::PreSymplectic { omega: f("dt^dth2", &c) }).unwrap();
    assert!(reeb_proportionality_check(&sy, &sy, &grid).is_err());
}

fn arb_form(degree: usize) -> impl Strategy<Value = Form> {
    // chart (q, p, mu1, mu2); coefficients of degree ≤ 2
    let tuples: Vec<Vec<usize>> = (0..4).combinations(degree).collect();
    let count = tuples.len();
    prop::collection::vec(prop::collection::vec((-2i64..=2, 0u32..=1, 0u32..=1, 0u32..=1, 0u32..=1), 0..=2), count)
        .prop_map(move |cs| {
            let c = chart(&["q", "p", "mu1", "mu2"]);
            let terms = tuples.iter().zip(cs).map(|(idx, mons)| {
                let s = Scalar::from_terms(&c, mons.into_iter().map(|(k, a, b, m1, m2)| (vec![a, b, m1, m2], int(k))))
                    .unwrap();
                (idx.clone(), s)
            });
            Form::from_terms(&c, degree, terms).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn homotopy_identity(omega in (1usize..=3).prop_flat_map(arb_form)) {
        let fiber = [2, 3];
        let k = homotopy_operator(&omega, &fiber).unwrap();
        let kd = homotopy_operator(&omega.d(), &fiber).unwrap();
        let lhs = k.d().try_add(&kd).unwrap();
        let rhs = omega.try_sub(&section_part(&omega, &fiber)).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn primitive_of_exact_forms(beta in (1usize..=2).prop_flat_map(arb_form)) {
        let fiber = [2, 3];
        let beta = beta.try_sub(&section_part(&beta, &fiber)).unwrap();
        let omega = beta.d();
        prop_assume!(!omega.is_zero());
        let prim = fiber_homotopy_primitive(&omega, &fiber).unwrap();
        prop_assert_eq!(&prim.theta.d(), &omega);
        let c = omega.chart();
        let zero_section: Vec<Scalar> = (0..4).map(|i| if i < 2 { Scalar::coordinate(c, i) } else { Scalar::zero(c) }).collect();
        prop_assert!(prim.theta.pullback(&zero_section).unwrap().is_zero());
        prop_assert!(section_part(&prim.theta, &fiber).is_zero());
    }
}
