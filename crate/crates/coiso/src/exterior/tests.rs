use super::*;
use crate::expr::{int, parse_scalar};
use proptest::prelude::*;

fn chart(names: &[&str]) -> Arc<Chart> {
    Chart::new(names).unwrap()
}

fn f(text: &str, c: &Arc<Chart>) -> Form {
    parse_form(text, c).unwrap()
}

fn v(text: &str, c: &Arc<Chart>) -> VectorField {
    parse_vector_field(text, c).unwrap()
}

#[test]
fn sign_helper() {
    assert_eq!(sort_with_sign(&[2, 0, 1]), Some((vec![0, 1, 2], 1)));
    assert_eq!(sort_with_sign(&[1, 0]), Some((vec![0, 1], -1)));
    assert_eq!(sort_with_sign(&[1, 1]), None);
}

#[test]
fn wedge_examples() {
    let c = chart(&["q", "p", "z"]);
    let w = f("dq", &c).wedge(&f("dp", &c)).unwrap();
    assert_eq!(w.terms().len(), 1);
    assert_eq!(w.coefficient(&[0, 1]), Scalar::one(&c));
    assert!(f("dq", &c).wedge(&f("dq", &c)).unwrap().is_zero());

    // Oracle: evaluate on every basis triple with the Leibniz permutation sum.
    let c = chart(&["t", "q", "p"]);
    let a = f("dt - p*dq", &c);
    let b = f("dq^dp", &c);
    let w = a.wedge(&b).unwrap();
    assert_eq!(w, f("dt^dq^dp", &c));
    let pt = Point::new(&c, vec![int(1), int(2), int(3)]).unwrap();
    let (ta, tb, tw) = (a.evaluate(&pt).unwrap(), b.evaluate(&pt).unwrap(), w.evaluate(&pt).unwrap());
    let e = |i: usize| (0..3).map(|k| if k == i { int(1) } else { int(0) }).collect::<Vec<_>>();
    for perm in [[0, 1, 2], [1, 0, 2], [2, 1, 0]] {
        let vs: Vec<Vec<Rational>> = perm.iter().map(|&i| e(i)).collect();
        let brute = shuffle_product(&ta, &tb, &vs);
        assert_eq!(tw.eval(&vs).unwrap(), brute);
    }
}

/// `(a∧b)(v_1..v_{p+q}) = Σ_σ sign(σ) a(v_σ(1..p)) b(v_σ(p+1..))` over shuffles.
fn shuffle_product(a: &AlternatingTensor, b: &AlternatingTensor, vs: &[Vec<Rational>]) -> Rational {
    let p = a.degree();
    let n = vs.len();
    let mut total = Rational::zero();
    for left in (0..n).combinations(p) {
        let right: Vec<usize> = (0..n).filter(|i| !left.contains(i)).collect();
        let mut order = left.clone();
        order.extend(&right);
        let (_, sign) = sort_with_sign(&order).unwrap();
        let va: Vec<Vec<Rational>> = left.iter().map(|&i| vs[i].clone()).collect();
        let vb: Vec<Vec<Rational>> = right.iter().map(|&i| vs[i].clone()).collect();
        let t = a.eval(&va).unwrap() * b.eval(&vb).unwrap();
        total += if sign < 0 { -t } else { t };
    }
    total
}

use itertools::Itertools;

#[test]
fn exterior_derivative_examples() {
    let c = chart(&["t", "q", "p"]);
    assert_eq!(f("dt - p*dq", &c).d(), f("dq^dp", &c));
    assert!(f("7/3", &c).d().is_zero());

    let c = chart(&["q", "z", "mu"]);
    let a = f("mu*(dz - q*dq)", &c);
    assert_eq!(a.d(), f("dmu^dz - q*dmu^dq", &c));
    assert!(a.d().d().is_zero());
}

#[test]
fn interior_product_examples() {
    let c = chart(&["t", "q", "p", "z"]);
    assert_eq!(
        f("dt", &c).interior_product(&VectorField::coordinate(&c, 0)).unwrap(),
        Form::from_scalar(Scalar::one(&c))
    );
    assert!(f("dq^dp", &c).interior_product(&VectorField::coordinate(&c, 3)).unwrap().is_zero());
    let got = f("dq^dp^dz", &c).interior_product(&VectorField::coordinate(&c, 1)).unwrap();
    assert_eq!(got, f("dp^dz", &c));
    // Brute force: (i_X a)(u, w) = a(X, u, w).
    let a = f("dq^dp^dz", &c).evaluate(&Point::origin(&c)).unwrap();
    let e = |i: usize| (0..4).map(|k| if k == i { int(1) } else { int(0) }).collect::<Vec<_>>();
    assert_eq!(a.eval(&[e(1), e(2), e(3)]).unwrap(), int(1));
    assert_eq!(
        f("q", &c).interior_product(&VectorField::coordinate(&c, 0)),
        Err(FormError::DegreeZero)
    );
}

#[test]
fn lie_derivative_examples() {
    let c = chart(&["q", "p"]);
    assert!(f("dq^dp", &c).lie_derivative(&v("dq", &c)).unwrap().is_zero());
    assert_eq!(f("dq", &c).lie_derivative(&v("q*dq", &c)).unwrap(), f("dq", &c));
    let c = chart(&["z", "mu"]);
    assert_eq!(
        f("dmu^dz", &c).lie_derivative(&v("mu*dmu", &c)).unwrap(),
        f("dmu^dz", &c)
    );
}

#[test]
fn lie_bracket_examples() {
    let c = chart(&["q", "p", "z"]);
    assert!(v("dq", &c).lie_bracket(&v("dp", &c)).unwrap().is_zero());
    assert_eq!(v("dq", &c).lie_bracket(&v("q*dz", &c)).unwrap(), v("dz", &c));
    let x = v("q*dp", &c);
    let y = v("p*dq", &c);
    assert_eq!(x.lie_bracket(&y).unwrap(), v("q*dq - p*dp", &c));
    let zf = v("z*dq + p^2*dz", &c);
    let jacobi = x
        .lie_bracket(&y.lie_bracket(&zf).unwrap())
        .unwrap()
        .try_add(&y.lie_bracket(&zf.lie_bracket(&x).unwrap()).unwrap())
        .unwrap()
        .try_add(&zf.lie_bracket(&x.lie_bracket(&y).unwrap()).unwrap())
        .unwrap();
    assert!(jacobi.is_zero());
}

#[test]
fn pullback_examples() {
    let base = chart(&["q", "p", "z"]);
    let total = chart(&["q", "p", "z", "mu"]);
    let proj: Vec<Scalar> = (0..3).map(|i| Scalar::coordinate(&total, i)).collect();
    assert_eq!(f("dq^dp", &base).pullback(&proj).unwrap(), f("dq^dp", &total));

    let section: Vec<Scalar> = (0..3)
        .map(|i| Scalar::coordinate(&base, i))
        .chain([Scalar::zero(&base)])
        .collect();
    assert!(f("dmu", &total).pullback(&section).unwrap().is_zero());

    let ext = chart(&["q", "p", "z", "mu", "t"]);
    let psi: Vec<Scalar> = vec![
        Scalar::coordinate(&ext, 0),
        Scalar::coordinate(&ext, 1),
        Scalar::coordinate(&ext, 2),
        parse_scalar("t*mu", &ext).unwrap(),
    ];
    assert_eq!(f("dz", &total).pullback(&psi).unwrap(), f("dz", &ext));
    assert_eq!(f("dmu", &total).pullback(&psi).unwrap(), f("t*dmu + mu*dt", &ext));
    let restricted = f("dmu", &total).pullback(&psi).unwrap();
    // With t held fixed (dt dropped) the pullback is t·dμ.
    assert_eq!(restricted.coefficient(&[3]), parse_scalar("t", &ext).unwrap());

    assert!(matches!(
        f("dq", &base).pullback(&proj[..2]),
        Err(FormError::DimensionMismatch { .. })
    ));
}

#[test]
fn evaluation_examples() {
    let c = chart(&["q", "p", "z", "mu"]);
    let pt = Point::new(&c, vec![int(3), int(0), int(0), int(0)]).unwrap();
    let t = f("q*dq^dp", &c).evaluate(&pt).unwrap();
    assert_eq!(t.get(&[0, 1]), int(3));
    let pt2 = Point::new(&c, vec![int(1), int(2), int(5), int(0)]).unwrap();
    assert_eq!(f("q+p", &c).evaluate(&pt2).unwrap().get(&[]), int(3));
    let sym = f("dq^dp + dmu^dz", &c).evaluate(&pt2).unwrap();
    assert_eq!(sym.flat_rank(), 4);
}

#[test]
fn printing_round_trips() {
    let c = chart(&["t", "q", "p", "z1"]);
    for text in [
        "dq^dp + z1*dq^dz1",
        "dt - p*dq",
        "-3/2*q^2*dt^dz1 + (q + 1)*dp^dz1",
        "0",
        "q^2 - 1",
    ] {
        let a = f(text, &c);
        assert_eq!(f(&a.to_string(), &c), a, "{text}");
    }
    assert_eq!(f("dt - p*dq", &c).to_string(), "dt - p*dq");
}

#[test]
fn form_literal_errors() {
    let c = chart(&["q", "p"]);
    assert!(matches!(parse_form("dq + dq^dp", &c), Err(FormError::DegreeMismatch { pos: Some(3), .. })));
    assert!(matches!(parse_form("dq^2", &c), Err(FormError::PowerOfForm { .. })));
    assert!(matches!(parse_form("dq^", &c), Err(FormError::Expr(ExprError::Syntax { .. }))));
    assert!(matches!(parse_form("dw", &c), Err(FormError::Expr(ExprError::UnknownCoordinate(_)))));
    // A zero term coerces to any degree.
    assert_eq!(f("dq^dp + 0", &c), f("dq^dp", &c));
    assert_eq!(f("(q+1)^2*dq", &c), f("q^2*dq + 2*q*dq + dq", &c));
}

#[test]
fn tensor_coframe_images_compose_pointwise() {
    let c = chart(&["q", "p", "z"]);
    // P = (dz − q dq) ⊗ ∂z
    let mut m = vec![vec![Scalar::zero(&c); 3]; 3];
    m[2][0] = parse_scalar("-q", &c).unwrap();
    m[2][2] = Scalar::one(&c);
    let p = TensorField11::new(&c, m).unwrap();
    assert_eq!(p.compose(&p).unwrap(), p);
    let pulled = f("dz", &c).pullback_linear(&p.coframe_images()).unwrap();
    assert_eq!(pulled, f("dz - q*dq", &c));
    let x = v("dq + dp", &c);
    assert_eq!(p.apply(&x).unwrap(), v("-q*dz", &c));
    assert!(TensorField11::identity(&c).is_identity());
}

#[test]
fn lift_pads_coordinates() {
    let base = chart(&["q", "p"]);
    let total = chart(&["q", "p", "mu"]);
    assert_eq!(f("q*dq^dp", &base).lift(&total).unwrap(), f("q*dq^dp", &total));
    assert!(f("dq", &total).lift(&base).is_err());
}

// ---------- random-form properties ----------

#[derive(Debug, Clone)]
struct RawForm {
    degree: usize,
    terms: Vec<(Vec<usize>, Vec<(Vec<u32>, i64)>)>,
}

fn arb_form(dim: usize, max_degree: usize, coeff_degree: u32) -> impl Strategy<Value = RawForm> {
    (0..=max_degree).prop_flat_map(move |degree| {
        let idx = prop::sample::subsequence((0..dim).collect::<Vec<_>>(), degree);
        let coeff = prop::collection::vec((prop::collection::vec(0..=coeff_degree, dim), -5i64..=5), 1..3);
        prop::collection::vec((idx, coeff), 0..3).prop_map(move |terms| RawForm { degree, terms })
    })
}

fn build(c: &Arc<Chart>, raw: &RawForm) -> Form {
    Form::from_terms(
        c,
        raw.degree,
        raw.terms.iter().map(|(idx, coeff)| {
            let s = Scalar::from_terms(
                c,
                coeff.iter().map(|(e, k)| {
                    let mut e = e.clone();
                    // keep coefficient degree ≤ 3 overall
                    let mut total: u32 = e.iter().sum();
                    for x in e.iter_mut() {
                        while total > 3 && *x > 0 {
                            *x -= 1;
                            total -= 1;
                        }
                    }
                    (e, int(*k))
                }),
            )
            .unwrap();
            (idx.clone(), s)
        }),
    )
    .unwrap()
}

fn arb_field(dim: usize) -> impl Strategy<Value = Vec<Vec<(Vec<u32>, i64)>>> {
    prop::collection::vec(prop::collection::vec((prop::collection::vec(0u32..=1, dim), -3i64..=3), 0..3), dim)
}

fn build_field(c: &Arc<Chart>, raw: &[Vec<(Vec<u32>, i64)>]) -> VectorField {
    VectorField::new(
        c,
        raw.iter()
            .map(|terms| Scalar::from_terms(c, terms.iter().map(|(e, k)| (e.clone(), int(*k)))).unwrap())
            .collect(),
    )
    .unwrap()
}

fn chart5() -> Arc<Chart> {
    chart(&["a", "b", "c", "d", "e"])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn d_squared_vanishes(raw in arb_form(5, 3, 3)) {
        let c = chart5();
        prop_assert!(build(&c, &raw).d().d().is_zero());
    }

    #[test]
    fn graded_anticommutativity(a in arb_form(5, 2, 2), b in arb_form(5, 2, 2)) {
        let c = chart5();
        let (a, b) = (build(&c, &a), build(&c, &b));
        let ab = a.wedge(&b).unwrap();
        let ba = b.wedge(&a).unwrap();
        if (a.degree() * b.degree()) % 2 == 0 {
            prop_assert_eq!(ab, ba);
        } else {
            prop_assert_eq!(ab, -&ba);
        }
    }

    #[test]
    fn graded_leibniz(a in arb_form(5, 2, 2), b in arb_form(5, 2, 2)) {
        let c = chart5();
        let (a, b) = (build(&c, &a), build(&c, &b));
        let lhs = a.wedge(&b).unwrap().d();
        let second = a.wedge(&b.d()).unwrap();
        let second = if a.degree() % 2 == 1 { -&second } else { second };
        prop_assert_eq!(lhs, &a.d().wedge(&b).unwrap() + &second);
    }

    #[test]
    fn interior_twice_vanishes(raw in arb_form(5, 3, 2), x in arb_field(5)) {
        let c = chart5();
        let a = build(&c, &raw);
        prop_assume!(a.degree() >= 2);
        let x = build_field(&c, &x);
        prop_assert!(a.interior_product(&x).unwrap().interior_product(&x).unwrap().is_zero());
    }

    #[test]
    fn lie_derivative_commutes_with_d(raw in arb_form(5, 2, 2), x in arb_field(5)) {
        let c = chart5();
        let a = build(&c, &raw);
        let x = build_field(&c, &x);
        prop_assert_eq!(a.lie_derivative(&x).unwrap().d(), a.d().lie_derivative(&x).unwrap());
    }

    #[test]
    fn pullback_is_natural(a in arb_form(4, 2, 2), b in arb_form(4, 1, 2),
                           map in prop::collection::vec(prop::collection::vec((prop::collection::vec(0u32..=2, 3), -3i64..=3), 1..3), 4)) {
        let src = chart(&["u", "v", "w"]);
        let dst = chart(&["a", "b", "c", "d"]);
        let (a, b) = (build(&dst, &a), build(&dst, &b));
        let map: Vec<Scalar> = map.iter()
            .map(|t| Scalar::from_terms(&src, t.iter().map(|(e, k)| (e.clone(), int(*k)))).unwrap())
            .collect();
        prop_assert_eq!(a.d().pullback(&map).unwrap(), a.pullback(&map).unwrap().d());
        prop_assert_eq!(
            a.wedge(&b).unwrap().pullback(&map).unwrap(),
            a.pullback(&map).unwrap().wedge(&b.pullback(&map).unwrap()).unwrap()
        );
    }

    #[test]
    fn evaluation_respects_wedge(a in arb_form(4, 2, 2), b in arb_form(4, 2, 2),
                                 x in prop::collection::vec(-3i64..=3, 4)) {
        let c = chart(&["a", "b", "c", "d"]);
        let (a, b) = (build(&c, &a), build(&c, &b));
        let pt = Point::new(&c, x.iter().map(|&k| int(k)).collect()).unwrap();
        let w = a.wedge(&b).unwrap();
        prop_assume!(w.degree() <= 4);
        let (ta, tb, tw) = (a.evaluate(&pt).unwrap(), b.evaluate(&pt).unwrap(), w.evaluate(&pt).unwrap());
        for tuple in (0..4).combinations(w.degree()) {
            let vs: Vec<Vec<Rational>> = tuple.iter()
                .map(|&i| (0..4).map(|k| if k == i { int(1) } else { int(0) }).collect())
                .collect();
            prop_assert_eq!(tw.eval(&vs).unwrap(), shuffle_product(&ta, &tb, &vs));
        }
    }
}
