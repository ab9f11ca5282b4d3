use super::*;
use crate::expr::{int, rat};
use crate::exterior::{parse_form, parse_vector_field};
use proptest::prelude::*;

fn chart(names: &[&str]) -> Arc<Chart> {
    Chart::new(names).unwrap()
}

fn f(text: &str, c: &Arc<Chart>) -> Form {
    parse_form(text, c).unwrap()
}

fn e(n: usize, i: usize) -> Vec<Rational> {
    (0..n).map(|k| if k == i { int(1) } else { int(0) }).collect()
}

fn cube(c: &Arc<Chart>, steps: usize) -> SampleGrid {
    SampleGrid::lattice(c, vec![(int(-1), int(1), steps); c.dim()]).unwrap()
}

#[test]
fn grids() {
    let c = chart(&["q", "p"]);
    let g = cube(&c, 3);
    assert_eq!(g.len(), 9);
    assert_eq!(g.points()[0], vec![int(-1), int(-1)]);
    assert_eq!(g.points()[5], vec![int(0), int(1)]);
    let r1 = SampleGrid::random(&c, 7, 50, int(1)).unwrap();
    let r2 = SampleGrid::random(&c, 7, 50, int(1)).unwrap();
    assert_eq!(r1, r2);
    assert!(r1.points().iter().flatten().all(|v| *v >= int(-1) && *v <= int(1)));
    assert_ne!(r1.points(), SampleGrid::random(&c, 8, 50, int(1)).unwrap().points());
    assert!(SampleGrid::explicit(&c, vec![vec![int(1)]]).is_err());
    assert!(SampleGrid::lattice(&c, vec![(int(0), int(1), 2)]).is_err());
}

#[test]
fn spec_degrees_and_counts() {
    let c = chart(&["q", "p", "z"]);
    assert!(matches!(
        GeometrySpec::new(&c, Structure::PreSymplectic { omega: f("dq", &c) }),
        Err(StructureError::BadDegree { .. })
    ));
    assert!(matches!(
        GeometrySpec::new(&c, Structure::KPreSymplectic { omegas: vec![] }),
        Err(StructureError::FormCount(_))
    ));
    assert!(GeometrySpec::new(
        &c,
        Structure::KPreCosymplectic {
            etas: vec![f("dz", &c)],
            omegas: vec![f("dq^dp", &c), f("dq^dz", &c)]
        }
    )
    .is_err());
    let other = chart(&["a", "b", "z"]);
    assert!(GeometrySpec::new(&c, Structure::PreContact { eta: f("da", &other) }).is_err());
    let m = GeometrySpec::new(&c, Structure::PreMultisymplectic { omega: f("dq^dp^dz", &c) }).unwrap();
    assert_eq!(m.kind(), Kind::PreMultisymplectic(3));
    assert_eq!(m.kind().default_ell(), 2);
}

#[test]
fn validate_darboux_presymplectic() {
    let c = chart(&["q", "p", "z"]);
    let spec = GeometrySpec::new(&c, Structure::PreSymplectic { omega: f("dq^dp", &c) }).unwrap();
    let rep = validate(&spec, &cube(&c, 3)).unwrap();
    assert!(rep.pass());
    assert!(rep.closedness[0].closed);
    assert!(rep.rank_profile.iter().all(|r| r.char_dim == 1 && r.ranks[0].1 == 2));
    assert!(rep.degenerate_points.is_empty());
}

#[test]
fn validate_contact() {
    let c = chart(&["t", "q", "p"]);
    let spec = GeometrySpec::new(&c, Structure::PreContact { eta: f("dt - p*dq", &c) }).unwrap();
    let rep = validate(&spec, &cube(&c, 3)).unwrap();
    assert!(rep.pass());
    assert!(rep.closedness.is_empty());
    assert!(rep.axioms.iter().all(|a| a.pass));
    assert!((0..27).all(|i| spec.nondegenerate_at(&cube(&c, 3).points()[i])));
}

#[test]
fn validate_rank_drop() {
    let c = chart(&["q", "p"]);
    let spec = GeometrySpec::new(&c, Structure::PreSymplectic { omega: f("q*dq^dp", &c) }).unwrap();
    let g = cube(&c, 3);
    let rep = validate(&spec, &g).unwrap();
    assert!(!rep.constant_rank);
    assert!(!rep.pass());
    let zeros: Vec<usize> = (0..g.len()).filter(|&i| g.points()[i][0].is_zero()).collect();
    assert_eq!(rep.degenerate_points, zeros);
    for i in 0..g.len() {
        let want = if zeros.contains(&i) { 0 } else { 2 };
        assert_eq!(rep.rank_profile[i].ranks[0].1, want);
    }
}

#[test]
fn validate_failures_listed() {
    let c = chart(&["t", "q", "p"]);
    // Not closed, and η vanishes on q = 0.
    let spec = GeometrySpec::new(
        &c,
        Structure::PreCosymplectic {
            eta: f("q*dt", &c),
            omega: f("t*dq^dp", &c),
        },
    )
    .unwrap();
    let rep = validate(&spec, &cube(&c, 3)).unwrap();
    assert_eq!(
        rep.closedness.iter().map(|v| v.closed).collect::<Vec<_>>(),
        vec![false, false]
    );
    let nv = rep.axioms.iter().find(|a| a.name == "eta_nonvanishing").unwrap();
    assert_eq!(nv.failing_points.len(), 9);
    assert!(validate(&spec, &SampleGrid::explicit(&c, vec![]).unwrap()).is_err());
}

#[test]
fn cocontact_volume_axiom() {
    let c = chart(&["s", "t", "q", "p", "z"]);
    let spec = GeometrySpec::new(
        &c,
        Structure::PreCocontact {
            xi: f("ds", &c),
            eta: f("dt - p*dq", &c),
        },
    )
    .unwrap();
    let rep = validate(&spec, &cube(&c, 2)).unwrap();
    assert!(rep.pass(), "{rep:?}");
    assert!(rep.rank_profile.iter().all(|r| r.char_dim == 1));
}

#[test]
fn characteristic_examples() {
    let c = chart(&["t", "q", "p", "z1", "z2"]);
    let zs = Subspace::coordinate(5, &[3, 4]);
    let pt = Point::new(&c, vec![int(1), int(2), int(-1), int(3), int(1)]).unwrap();
    let cosy = GeometrySpec::new(
        &c,
        Structure::PreCosymplectic {
            eta: f("dt", &c),
            omega: f("dq^dp", &c),
        },
    )
    .unwrap();
    assert!(characteristic_distribution(&cosy, &pt).unwrap().same_as(&zs));
    let cont = GeometrySpec::new(&c, Structure::PreContact { eta: f("dt - p*dq", &c) }).unwrap();
    assert!(characteristic_distribution(&cont, &pt).unwrap().same_as(&zs));

    let k = chart(&["q", "p1", "p2", "z"]);
    let ks = GeometrySpec::new(
        &k,
        Structure::KPreSymplectic {
            omegas: vec![f("dq^dp1", &k), f("dq^dp2", &k)],
        },
    )
    .unwrap();
    let kp = Point::origin(&k);
    assert!(characteristic_distribution(&ks, &kp).unwrap().same_as(&Subspace::coordinate(4, &[3])));

    let kc_chart = chart(&["t1", "t2", "q", "p1", "p2", "z"]);
    let kc = GeometrySpec::new(
        &kc_chart,
        Structure::KPreContact {
            etas: vec![f("dt1 - p1*dq", &kc_chart), f("dt2 - p2*dq", &kc_chart)],
        },
    )
    .unwrap();
    let x = vec![int(0), int(1), int(2), int(-1), int(1), int(5)];
    assert!(kc.characteristic_at(&x).same_as(&Subspace::coordinate(6, &[5])));
    assert!(characteristic_distribution(&kc, &Point::origin(&kc_chart)).is_ok());
    assert!(characteristic_distribution(&kc, &pt).is_err());
}

#[test]
fn involutivity_examples() {
    let c = chart(&["t", "q", "p"]);
    let g = cube(&c, 3);
    let v = |s: &str| parse_vector_field(s, &c).unwrap();
    assert!(involutivity_check(&[v("dq"), v("dp")], &g).unwrap().involutive);

    let rep = involutivity_check(&[v("dq + p*dt"), v("dp")], &g).unwrap();
    assert!(!rep.involutive);
    let ce = rep.counterexample.unwrap();
    assert_eq!((ce.point, ce.i, ce.j), (0, 0, 1));
    assert_eq!(ce.bracket, vec![int(-1), int(0), int(0)]);

    let c2 = chart(&["q", "z"]);
    let g2 = cube(&c2, 3);
    let w = |s: &str| parse_vector_field(s, &c2).unwrap();
    assert!(involutivity_check(&[w("dq"), w("q*dq + dz")], &g2).unwrap().involutive);
    assert!(matches!(
        involutivity_check(&[w("dq"), w("q*dq")], &g2),
        Err(StructureError::DependentFrame { index: 0, .. })
    ));
}

#[test]
fn reeb_examples() {
    let c = chart(&["t", "q", "p"]);
    let cosy = GeometrySpec::new(
        &c,
        Structure::PreCosymplectic {
            eta: f("dt", &c),
            omega: f("dq^dp", &c),
        },
    )
    .unwrap();
    let r = reeb_solve(&cosy, &Point::origin(&c)).unwrap();
    assert_eq!(r.len(), 1);
    assert_eq!(r[0].particular, e(3, 0));
    assert!(r[0].kernel.is_empty());

    let c5 = chart(&["t", "q", "p", "z1", "z2"]);
    let pre = GeometrySpec::new(
        &c5,
        Structure::PreCosymplectic {
            eta: f("dt", &c5),
            omega: f("dq^dp", &c5),
        },
    )
    .unwrap();
    let r = reeb_solve(&pre, &Point::origin(&c5)).unwrap();
    assert_eq!(r[0].particular, e(5, 0));
    assert!(Subspace::span(5, &r[0].kernel).same_as(&Subspace::coordinate(5, &[3, 4])));

    let cc = chart(&["s", "t", "q", "p"]);
    let coc = GeometrySpec::new(
        &cc,
        Structure::PreCocontact {
            xi: f("ds", &cc),
            eta: f("dt - p*dq", &cc),
        },
    )
    .unwrap();
    let r = reeb_solve(&coc, &Point::new(&cc, vec![int(1), int(2), int(3), int(4)]).unwrap()).unwrap();
    assert_eq!(r.iter().map(|x| x.label.as_str()).collect::<Vec<_>>(), vec!["R_xi", "R_eta"]);
    assert_eq!(r[0].particular, e(4, 0));
    assert_eq!(r[1].particular, e(4, 1));

    let sy = GeometrySpec::new(&c, Structure::PreSymplectic { omega: f("dq^dp", &c) }).unwrap();
    assert!(matches!(reeb_solve(&sy, &Point::origin(&c)), Err(StructureError::NotReebKind(_))));

    let bad = GeometrySpec::new(
        &c,
        Structure::PreCosymplectic {
            eta: f("q*dt", &c),
            omega: f("dq^dp", &c),
        },
    )
    .unwrap();
    assert!(matches!(reeb_solve(&bad, &Point::origin(&c)), Err(StructureError::NoReebAtPoint { .. })));
}

fn random_form(c: &Arc<Chart>, degree: usize, coeffs: &[i64]) -> Form {
    let n = c.dim();
    let tuples: Vec<Vec<usize>> = itertools::Itertools::combinations(0..n, degree).collect();
    let terms = tuples.into_iter().zip(coeffs.chunks(2)).map(|(idx, cs)| {
        let mut s = crate::expr::Scalar::constant(c, int(cs[0]));
        s = s.try_add(&crate::expr::Scalar::coordinate(c, idx[0]).scale(&int(cs[1]))).unwrap();
        (idx, s)
    });
    Form::from_terms(c, degree, terms).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn characteristic_lies_in_kernels(a in prop::collection::vec(-2i64..=2, 20),
                                      b in prop::collection::vec(-2i64..=2, 20),
                                      x in prop::collection::vec(-3i64..=3, 5)) {
        let c = chart(&["a", "b", "c", "d", "e"]);
        let eta = random_form(&c, 1, &a[..10]);
        let omega = random_form(&c, 2, &b);
        let x: Vec<Rational> = x.into_iter().map(int).collect();
        let specs = [
            GeometrySpec::new(&c, Structure::PreCosymplectic { eta: eta.clone(), omega: omega.clone() }).unwrap(),
            GeometrySpec::new(&c, Structure::PreContact { eta: eta.clone() }).unwrap(),
            GeometrySpec::new(&c, Structure::PreCocontact { xi: random_form(&c, 1, &a[10..]), eta: eta.clone() }).unwrap(),
        ];
        for spec in &specs {
            let v = spec.characteristic_at(&x);
            for (name, form) in spec.named_forms() {
                let t = form.eval_at(&x);
                for w in v.basis() {
                    if form.degree() == 1 {
                        prop_assert!(t.eval(std::slice::from_ref(w)).unwrap().is_zero(), "{}", name);
                    } else if spec.kind() != Kind::PreContact {
                        prop_assert!(t.contract(w).unwrap().is_zero(), "{}", name);
                    }
                }
            }
        }
    }

    #[test]
    fn reeb_members_satisfy_contractions(b in prop::collection::vec(-2i64..=2, 20),
                                          x in prop::collection::vec(-3i64..=3, 5),
                                          mix in prop::collection::vec(-4i64..=4, 5)) {
        let c = chart(&["t", "a", "b", "c", "d"]);
        let eta = f("dt + a*db", &c);
        let omega = random_form(&c, 2, &b);
        let x: Vec<Rational> = x.into_iter().map(int).collect();
        for spec in [
            GeometrySpec::new(&c, Structure::PreCosymplectic { eta: eta.clone(), omega }).unwrap(),
            GeometrySpec::new(&c, Structure::PreContact { eta: eta.clone() }).unwrap(),
        ] {
            let Ok(fams) = reeb_solve_at(&spec, &x) else { continue };
            let fam = &fams[0];
            let mut r = fam.particular.clone();
            for (k, m) in fam.kernel.iter().zip(&mix) {
                for (ri, ki) in r.iter_mut().zip(k) {
                    *ri += ki * int(*m);
                }
            }
            prop_assert!(fam.contains(&r));
            let two = match spec.structure() {
                Structure::PreCosymplectic { omega, .. } => omega.eval_at(&x),
                _ => eta.d().eval_at(&x),
            };
            prop_assert_eq!(eta.eval_at(&x).eval(std::slice::from_ref(&r)).unwrap(), int(1));
            prop_assert!(two.contract(&r).unwrap().is_zero());
        }
    }
}

#[test]
fn darboux_models_have_constant_rank() {
    let cases: Vec<(Vec<&str>, Box<dyn Fn(&Arc<Chart>) -> Structure>, usize)> = vec![
        (vec!["q", "p", "z1", "z2"], Box::new(|c| Structure::PreSymplectic { omega: f("dq^dp", c) }), 2),
        (
            vec!["t", "q", "p", "z1", "z2"],
            Box::new(|c| Structure::PreCosymplectic { eta: f("dt", c), omega: f("dq^dp", c) }),
            2,
        ),
        (vec!["t", "q", "p", "z1", "z2"], Box::new(|c| Structure::PreContact { eta: f("dt - p*dq", c) }), 2),
        (
            vec!["q", "p1", "p2", "z"],
            Box::new(|c| Structure::KPreSymplectic { omegas: vec![f("dq^dp1", c), f("dq^dp2", c)] }),
            1,
        ),
        (vec!["x1", "x2", "x3", "z"], Box::new(|c| Structure::PreMultisymplectic { omega: f("dx1^dx2^dx3", c) }), 1),
    ];
    for (names, build, char_dim) in cases {
        let c = chart(&names);
        let spec = GeometrySpec::new(&c, build(&c)).unwrap();
        let rep = validate(&spec, &SampleGrid::random(&c, 3, 20, rat(5, 2)).unwrap()).unwrap();
        assert!(rep.pass(), "{names:?}");
        assert!(rep.rank_profile.iter().all(|r| r.char_dim == char_dim), "{names:?}");
        let zs: Vec<usize> = (names.len() - char_dim..names.len()).collect();
        let frame: Vec<VectorField> = zs.iter().map(|&i| VectorField::coordinate(&c, i)).collect();
        assert!(involutivity_check(&frame, &cube(&c, 2)).unwrap().involutive);
    }
}
