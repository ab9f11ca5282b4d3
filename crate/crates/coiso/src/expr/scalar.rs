use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_traits::{One, Signed, Zero};

use super::{check_chart, fmt_rational, to_f64, Chart, ExprError, Point, Rational};

/// Exponent vector ordered graded-lexicographically by coordinate index.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    pub fn one(dim: usize) -> Monomial {
        Monomial(vec![0; dim])
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Polynomial with exact rational coefficients over a chart.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scalar {
    chart: Arc<Chart>,
    terms: BTreeMap<Monomial, Rational>,
}

impl Scalar {
    pub fn zero(chart: &Arc<Chart>) -> Scalar {
        Scalar {
            chart: chart.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(chart: &Arc<Chart>, c: Rational) -> Scalar {
        let mut s = Scalar::zero(chart);
        if !c.is_zero() {
            s.terms.insert(Monomial::one(chart.dim()), c);
        }
        s
    }

    pub fn one(chart: &Arc<Chart>) -> Scalar {
        Scalar::constant(chart, Rational::one())
    }

    /// The coordinate function `x^i`.
    pub fn coordinate(chart: &Arc<Chart>, i: usize) -> Scalar {
        let mut e = vec![0; chart.dim()];
        e[i] = 1;
        let mut s = Scalar::zero(chart);
        s.terms.insert(Monomial(e), Rational::one());
        s
    }

    /// Builds a scalar from `(exponents, coefficient)` pairs, merging repeats.
    pub fn from_terms<I>(chart: &Arc<Chart>, terms: I) -> Result<Scalar, ExprError>
    where
        I: IntoIterator<Item = (Vec<u32>, Rational)>,
    {
        let mut s = Scalar::zero(chart);
        for (e, c) in terms {
            if e.len() != chart.dim() {
                return Err(ExprError::Arity {
                    expected: chart.dim(),
                    got: e.len(),
                });
            }
            s.add_term(Monomial(e), c);
        }
        Ok(s)
    }

    pub(crate) fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, Rational> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|m| m.degree() == 0)
    }

    /// The value of a constant scalar.
    pub fn constant_value(&self) -> Option<Rational> {
        if !self.is_constant() {
            return None;
        }
        Some(self.terms.values().next().cloned().unwrap_or_else(Rational::zero))
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn try_add(&self, other: &Scalar) -> Result<Scalar, ExprError> {
        check_chart(&self.chart, &other.chart)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &Scalar) -> Result<Scalar, ExprError> {
        check_chart(&self.chart, &other.chart)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c.clone());
        }
        Ok(out)
    }

    pub fn try_mul(&self, other: &Scalar) -> Result<Scalar, ExprError> {
        check_chart(&self.chart, &other.chart)?;
        let mut out = Scalar::zero(&self.chart);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Rational) -> Scalar {
        if c.is_zero() {
            return Scalar::zero(&self.chart);
        }
        Scalar {
            chart: self.chart.clone(),
            terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect(),
        }
    }

    pub fn pow(&self, n: u32) -> Scalar {
        let mut result = Scalar::one(&self.chart);
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                result = &result * &base;
            }
            n >>= 1;
            if n > 0 {
                base = &base * &base;
            }
        }
        result
    }

    /// Formal partial derivative with respect to coordinate `i`.
    pub fn partial_derivative(&self, i: usize) -> Result<Scalar, ExprError> {
        if i >= self.chart.dim() {
            return Err(ExprError::IndexOutOfRange {
                index: i,
                dim: self.chart.dim(),
            });
        }
        let mut out = Scalar::zero(&self.chart);
        for (m, c) in &self.terms {
            let e = m.0[i];
            if e == 0 {
                continue;
            }
            let mut m2 = m.clone();
            m2.0[i] -= 1;
            out.add_term(m2, c * Rational::from_integer(e.into()));
        }
        Ok(out)
    }

    /// Partial derivative; panics on an out-of-range index.
    pub fn d(&self, i: usize) -> Scalar {
        self.partial_derivative(i).expect("coordinate index in range")
    }

    pub fn evaluate(&self, pt: &Point) -> Result<Rational, ExprError> {
        check_chart(&self.chart, pt.chart())?;
        Ok(self.eval_at(pt.coords()))
    }

    /// Evaluates at raw coordinates, which must match the chart dimension.
    pub fn eval_at(&self, x: &[Rational]) -> Rational {
        debug_assert_eq!(x.len(), self.chart.dim());
        if self.terms.is_empty() {
            return Rational::zero();
        }
        let dim = self.chart.dim();
        let mut max_e = vec![0u32; dim];
        for m in self.terms.keys() {
            for (k, e) in m.0.iter().enumerate() {
                max_e[k] = max_e[k].max(*e);
            }
        }
        let powers: Vec<Vec<Rational>> = (0..dim)
            .map(|k| {
                let mut p = Vec::with_capacity(max_e[k] as usize + 1);
                p.push(Rational::one());
                for j in 1..=max_e[k] as usize {
                    let next = &p[j - 1] * &x[k];
                    p.push(next);
                }
                p
            })
            .collect();
        let mut acc = Rational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (k, e) in m.0.iter().enumerate() {
                if *e > 0 {
                    t *= &powers[k][*e as usize];
                }
            }
            acc += t;
        }
        acc
    }

    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(m, c)| {
                m.0.iter()
                    .zip(x)
                    .fold(to_f64(c), |acc, (e, v)| acc * v.powi(*e as i32))
            })
            .sum()
    }

    /// Composition `f(images[0], ..., images[n-1])`, landing on the images' chart.
    pub fn substitute(&self, images: &[Scalar]) -> Result<Scalar, ExprError> {
        if images.len() != self.chart.dim() {
            return Err(ExprError::Arity {
                expected: self.chart.dim(),
                got: images.len(),
            });
        }
        let target = images[0].chart.clone();
        for im in images {
            check_chart(&target, &im.chart)?;
        }
        let mut cache: Vec<Vec<Scalar>> = images.iter().map(|im| vec![Scalar::one(&target), im.clone()]).collect();
        let mut out = Scalar::zero(&target);
        for (m, c) in &self.terms {
            let mut t = Scalar::constant(&target, c.clone());
            for (k, e) in m.0.iter().enumerate() {
                let e = *e as usize;
                if e == 0 {
                    continue;
                }
                while cache[k].len() <= e {
                    let next = &cache[k][cache[k].len() - 1] * &images[k];
                    cache[k].push(next);
                }
                t = &t * &cache[k][e];
            }
            for (mm, cc) in t.terms {
                out.add_term(mm, cc);
            }
        }
        Ok(out)
    }

    /// Re-expresses the scalar on `target`, whose leading coordinates are this chart's.
    pub fn lift(&self, target: &Arc<Chart>) -> Result<Scalar, ExprError> {
        if !self.chart.is_prefix_of(target) {
            return Err(ExprError::ChartMismatch {
                left: self.chart.id().to_string(),
                right: target.id().to_string(),
            });
        }
        let pad = target.dim() - self.chart.dim();
        Ok(Scalar {
            chart: target.clone(),
            terms: self
                .terms
                .iter()
                .map(|(m, c)| {
                    let mut e = m.0.clone();
                    e.extend(std::iter::repeat_n(0, pad));
                    (Monomial(e), c.clone())
                })
                .collect(),
        })
    }

    fn fmt_monomial(&self, m: &Monomial) -> String {
        let mut parts = Vec::new();
        for (k, e) in m.0.iter().enumerate() {
            match e {
                0 => {}
                1 => parts.push(self.chart.name(k).to_string()),
                _ => parts.push(format!("{}^{}", self.chart.name(k), e)),
            }
        }
        parts.join("*")
    }

    /// Number of stored terms.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Leading coefficient sign, used when printing forms.
    pub(crate) fn leading_is_negative(&self) -> bool {
        self.terms.iter().next_back().is_some_and(|(_, c)| c.is_negative())
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            if i == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            let mono = self.fmt_monomial(m);
            if mono.is_empty() {
                write!(f, "{}", fmt_rational(&abs))?;
            } else if abs.is_one() {
                write!(f, "{mono}")?;
            } else {
                write!(f, "{}*{mono}", fmt_rational(&abs))?;
            }
        }
        Ok(())
    }
}

impl Add for &Scalar {
    type Output = Scalar;
    fn add(self, rhs: &Scalar) -> Scalar {
        self.try_add(rhs).expect("scalar chart mismatch")
    }
}

impl Sub for &Scalar {
    type Output = Scalar;
    fn sub(self, rhs: &Scalar) -> Scalar {
        self.try_sub(rhs).expect("scalar chart mismatch")
    }
}

impl Mul for &Scalar {
    type Output = Scalar;
    fn mul(self, rhs: &Scalar) -> Scalar {
        self.try_mul(rhs).expect("scalar chart mismatch")
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar {
            chart: self.chart.clone(),
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::{int, parse_scalar, rat};
    use super::*;
    use proptest::prelude::*;

    fn chart() -> Arc<Chart> {
        Chart::new(&["q", "p", "z"]).unwrap()
    }

    fn terms_of(s: &Scalar) -> Vec<(Vec<u32>, Rational)> {
        s.terms().iter().map(|(m, c)| (m.0.clone(), c.clone())).collect()
    }

    #[test]
    fn parse_expands_products() {
        let c = chart();
        let s = parse_scalar("q*p - 2", &c).unwrap();
        let mut expect = vec![(vec![0, 0, 0], int(-2)), (vec![1, 1, 0], int(1))];
        expect.sort_by_key(|a| Monomial(a.0.clone()));
        assert_eq!(terms_of(&s), expect);
    }

    #[test]
    fn square_matches_repeated_multiplication() {
        // Oracle: multiply term lists by hand, no pow().
        let c = chart();
        let s = parse_scalar("(q+1)^2", &c).unwrap();
        let base = [(vec![1u32, 0, 0], int(1)), (vec![0, 0, 0], int(1))];
        let mut oracle = BTreeMap::new();
        for (ea, ca) in &base {
            for (eb, cb) in &base {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                *oracle.entry(e).or_insert_with(Rational::zero) += ca * cb;
            }
        }
        let got: BTreeMap<Vec<u32>, Rational> = terms_of(&s).into_iter().collect();
        assert_eq!(got, oracle);
        assert_eq!(got[&vec![2, 0, 0]], int(1));
        assert_eq!(got[&vec![1, 0, 0]], int(2));
        assert_eq!(got[&vec![0, 0, 0]], int(1));
    }

    #[test]
    fn unknown_coordinate_reported() {
        assert_eq!(
            parse_scalar("q + w", &chart()),
            Err(ExprError::UnknownCoordinate("w".into()))
        );
    }

    #[test]
    fn cancellation_leaves_no_terms() {
        let c = chart();
        let a = parse_scalar("q+p", &c).unwrap();
        assert!((&a - &a).is_zero());
        let q = Scalar::coordinate(&c, 0);
        assert_eq!(&q * &q, parse_scalar("q^2", &c).unwrap());
    }

    #[test]
    fn difference_of_squares_agrees_pointwise() {
        let c = chart();
        let lhs = &parse_scalar("q+1", &c).unwrap() * &parse_scalar("q-1", &c).unwrap();
        let rhs = parse_scalar("q^2 - 1", &c).unwrap();
        assert_eq!(lhs, rhs);
        for (a, b) in [(1, 3), (-5, 7), (2, 1), (11, 13), (-1, 9)] {
            let pt = Point::new(&c, vec![rat(a, b), rat(b, a), int(0)]).unwrap();
            let x = rat(a, b);
            assert_eq!(lhs.evaluate(&pt).unwrap(), &x * &x - int(1));
        }
    }

    #[test]
    fn partials() {
        let c = chart();
        let f = parse_scalar("q^2*p", &c).unwrap();
        assert_eq!(f.d(0), parse_scalar("2*q*p", &c).unwrap());
        assert!(f.d(2).is_zero());
        assert!(f.partial_derivative(3).is_err());
    }

    #[test]
    fn derivative_matches_symmetric_quotient() {
        // (f(p+h) - f(p-h)) / 2h differs from f'(p) by h^2 * f'''(p)/6 exactly for a cubic.
        let c = chart();
        let f = parse_scalar("(q+p)^3", &c).unwrap();
        let df = f.d(1);
        assert_eq!(df, parse_scalar("3*(q+p)^2", &c).unwrap());
        let h = rat(1, 1024);
        for (q, p) in [(rat(1, 3), rat(2, 5)), (int(-1), rat(7, 4))] {
            let plus = Point::new(&c, vec![q.clone(), &p + &h, int(0)]).unwrap();
            let minus = Point::new(&c, vec![q.clone(), &p - &h, int(0)]).unwrap();
            let quotient = (f.evaluate(&plus).unwrap() - f.evaluate(&minus).unwrap()) / (int(2) * &h);
            let at = Point::new(&c, vec![q, p, int(0)]).unwrap();
            let gap = quotient - df.evaluate(&at).unwrap();
            assert_eq!(gap, &h * &h);
        }
    }

    #[test]
    fn evaluation_examples() {
        let c = chart();
        let pt = Point::new(&c, vec![int(3), int(1), int(7)]).unwrap();
        assert_eq!(parse_scalar("q*p - 2", &c).unwrap().evaluate(&pt).unwrap(), int(1));
        assert_eq!(Scalar::zero(&c).evaluate(&pt).unwrap(), int(0));
        let half = Point::new(&c, vec![rat(1, 2), int(0), int(0)]).unwrap();
        assert_eq!(parse_scalar("(q+1)^2", &c).unwrap().evaluate(&half).unwrap(), rat(9, 4));
        let other = Chart::new(&["a"]).unwrap();
        let wrong = Point::origin(&other);
        assert!(matches!(Scalar::zero(&c).evaluate(&wrong), Err(ExprError::ChartMismatch { .. })));
    }

    #[test]
    fn substitution_examples() {
        let base = Chart::new(&["z", "mu"]).unwrap();
        let big = Chart::new(&["z", "mu", "t"]).unwrap();
        let f = parse_scalar("mu*z", &base).unwrap();
        let images = vec![
            parse_scalar("z", &big).unwrap(),
            parse_scalar("t*mu", &big).unwrap(),
        ];
        assert_eq!(f.substitute(&images).unwrap(), parse_scalar("t*mu*z", &big).unwrap());

        let c = chart();
        let id: Vec<Scalar> = (0..3).map(|i| Scalar::coordinate(&c, i)).collect();
        let g = parse_scalar("q^2 - 3*p*z + 1/2", &c).unwrap();
        assert_eq!(g.substitute(&id).unwrap(), g);

        let sq = parse_scalar("q^2", &c).unwrap();
        let shifted = vec![
            parse_scalar("q+p", &c).unwrap(),
            Scalar::coordinate(&c, 1),
            Scalar::coordinate(&c, 2),
        ];
        let out = sq.substitute(&shifted).unwrap();
        assert_eq!(out, parse_scalar("q^2 + 2*q*p + p^2", &c).unwrap());
        for (a, b) in [(1, 2), (-3, 5), (7, 1)] {
            let pt = Point::new(&c, vec![int(a), int(b), int(0)]).unwrap();
            assert_eq!(out.evaluate(&pt).unwrap(), int((a + b) * (a + b)));
        }
    }

    #[test]
    fn printing_is_canonical() {
        let c = chart();
        let s = parse_scalar("2 - 3/2*q*p + q^2 - z", &c).unwrap();
        assert_eq!(s.to_string(), "q^2 - 3/2*q*p - z + 2");
        assert_eq!(parse_scalar(&s.to_string(), &c).unwrap(), s);
        assert_eq!(Scalar::zero(&c).to_string(), "0");
        assert_eq!(parse_scalar("-q", &c).unwrap().to_string(), "-q");
    }

    fn arb_scalar(dim: usize, max_deg: u32) -> impl Strategy<Value = Vec<(Vec<u32>, i64, i64)>> {
        prop::collection::vec(
            (prop::collection::vec(0..=max_deg, dim), -9i64..=9, 1i64..=5),
            0..6,
        )
    }

    fn build(c: &Arc<Chart>, raw: &[(Vec<u32>, i64, i64)]) -> Scalar {
        Scalar::from_terms(c, raw.iter().map(|(e, n, d)| (e.clone(), rat(*n, *d)))).unwrap()
    }

    fn chart6() -> Arc<Chart> {
        Chart::new(&["a", "b", "c", "d", "e", "f"]).unwrap()
    }

    proptest! {
        #[test]
        fn ring_axioms(a in arb_scalar(6, 2), b in arb_scalar(6, 2), c in arb_scalar(6, 2)) {
            let ch = chart6();
            let (a, b, c) = (build(&ch, &a), build(&ch, &b), build(&ch, &c));
            prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            prop_assert_eq!(&a * &b, &b * &a);
        }

        #[test]
        fn evaluation_is_multiplicative(a in arb_scalar(6, 2), b in arb_scalar(6, 2),
                                        x in prop::collection::vec((-6i64..=6, 1i64..=4), 6)) {
            let ch = chart6();
            let (a, b) = (build(&ch, &a), build(&ch, &b));
            let pt = Point::new(&ch, x.iter().map(|(n, d)| rat(*n, *d)).collect()).unwrap();
            prop_assert_eq!((&a * &b).evaluate(&pt).unwrap(),
                            a.evaluate(&pt).unwrap() * b.evaluate(&pt).unwrap());
        }

        #[test]
        fn leibniz_rule(a in arb_scalar(6, 2), b in arb_scalar(6, 2), i in 0usize..6) {
            let ch = chart6();
            let (a, b) = (build(&ch, &a), build(&ch, &b));
            prop_assert_eq!((&a * &b).d(i), &(&a.d(i) * &b) + &(&a * &b.d(i)));
        }

        #[test]
        fn parse_print_round_trip(a in arb_scalar(6, 3)) {
            let ch = chart6();
            let a = build(&ch, &a);
            prop_assert_eq!(parse_scalar(&a.to_string(), &ch).unwrap(), a);
        }
    }
}
