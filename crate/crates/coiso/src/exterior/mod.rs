//! Differential forms over a chart, with vector fields and (1,1)-tensor fields.

mod fields;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::sync::Arc;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::expr::{
    ast_to_scalar, check_chart, parse_ast, Chart, ExprError, Mode, Node, Point, Rational,
    Scalar,
};
use crate::pointwise::AlternatingTensor;

pub use fields::{TensorField11, VectorField};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormError {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("cannot add forms of degree {left} and {right}")]
    DegreeMismatch { left: usize, right: usize, pos: Option<usize> },
    #[error("interior product of a 0-form")]
    DegreeZero,
    #[error("expected {expected} components, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("only 0-forms can be raised to a power (offset {pos})")]
    PowerOfForm { pos: usize },
    #[error("expected a {expected}-form, got degree {got}")]
    WrongDegree { expected: usize, got: usize },
}

/// Sorts an index tuple, returning the sorted tuple and the sign of the sorting
/// permutation, or `None` when an index repeats.
///
/// Every sign in the exterior algebra goes through this function.
pub fn sort_with_sign(idx: &[usize]) -> Option<(Vec<usize>, i32)> {
    let mut v = idx.to_vec();
    let mut sign = 1;
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 && v[j - 1] > v[j] {
            v.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if v.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    Some((v, sign))
}

fn signed(c: Rational, sign: i32) -> Rational {
    if sign < 0 {
        -c
    } else {
        c
    }
}

/// A differential form of fixed degree with polynomial coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Form {
    chart: Arc<Chart>,
    degree: usize,
    terms: BTreeMap<Vec<usize>, Scalar>,
}

impl Form {
    pub fn zero(chart: &Arc<Chart>, degree: usize) -> Form {
        Form {
            chart: chart.clone(),
            degree,
            terms: BTreeMap::new(),
        }
    }

    pub fn from_scalar(s: Scalar) -> Form {
        let mut f = Form::zero(s.chart(), 0);
        if !s.is_zero() {
            f.terms.insert(Vec::new(), s);
        }
        f
    }

    /// `dx^{i_1} ∧ … ∧ dx^{i_k}` for an arbitrary (unsorted) tuple.
    pub fn basis(chart: &Arc<Chart>, idx: &[usize]) -> Form {
        let mut f = Form::zero(chart, idx.len());
        if let Some((sorted, sign)) = sort_with_sign(idx) {
            f.terms
                .insert(sorted, Scalar::constant(chart, signed(Rational::one(), sign)));
        }
        f
    }

    pub fn dx(chart: &Arc<Chart>, i: usize) -> Form {
        Form::basis(chart, &[i])
    }

    /// Builds a form from `(tuple, coefficient)` pairs; tuples may be unsorted.
    pub fn from_terms<I>(chart: &Arc<Chart>, degree: usize, terms: I) -> Result<Form, FormError>
    where
        I: IntoIterator<Item = (Vec<usize>, Scalar)>,
    {
        let mut f = Form::zero(chart, degree);
        for (idx, c) in terms {
            if idx.len() != degree {
                return Err(FormError::WrongDegree {
                    expected: degree,
                    got: idx.len(),
                });
            }
            if let Some(&i) = idx.iter().find(|&&i| i >= chart.dim()) {
                return Err(ExprError::IndexOutOfRange { index: i, dim: chart.dim() }.into());
            }
            check_chart(chart, c.chart())?;
            if let Some((sorted, sign)) = sort_with_sign(&idx) {
                let c = if sign < 0 { -&c } else { c };
                f.add_term(sorted, c);
            }
        }
        Ok(f)
    }

    fn add_term(&mut self, idx: Vec<usize>, c: Scalar) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(idx) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = o.get() + &c;
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn terms(&self) -> &BTreeMap<Vec<usize>, Scalar> {
        &self.terms
    }

    pub fn coefficient(&self, idx: &[usize]) -> Scalar {
        self.terms
            .get(idx)
            .cloned()
            .unwrap_or_else(|| Scalar::zero(&self.chart))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The coefficient of a 0-form.
    pub fn as_scalar(&self) -> Option<Scalar> {
        (self.degree == 0).then(|| self.coefficient(&[]))
    }

    fn compatible(&self, other: &Form) -> Result<(), FormError> {
        check_chart(&self.chart, &other.chart)?;
        if self.degree != other.degree && !self.is_zero() && !other.is_zero() {
            return Err(FormError::DegreeMismatch {
                left: self.degree,
                right: other.degree,
                pos: None,
            });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Form) -> Result<Form, FormError> {
        self.compatible(other)?;
        if self.is_zero() {
            return Ok(other.clone());
        }
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.add_term(k.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &Form) -> Result<Form, FormError> {
        self.try_add(&-other)
    }

    pub fn scale(&self, c: &Rational) -> Form {
        let mut out = Form::zero(&self.chart, self.degree);
        if c.is_zero() {
            return out;
        }
        for (k, v) in &self.terms {
            out.terms.insert(k.clone(), v.scale(c));
        }
        out
    }

    /// Multiplication by a function.
    pub fn mul_scalar(&self, f: &Scalar) -> Result<Form, FormError> {
        check_chart(&self.chart, f.chart())?;
        let mut out = Form::zero(&self.chart, self.degree);
        for (k, v) in &self.terms {
            out.add_term(k.clone(), v * f);
        }
        Ok(out)
    }

    pub fn wedge(&self, other: &Form) -> Result<Form, FormError> {
        check_chart(&self.chart, &other.chart)?;
        let mut out = Form::zero(&self.chart, self.degree + other.degree);
        if self.degree + other.degree > self.chart.dim() {
            return Ok(out);
        }
        for (i, a) in &self.terms {
            for (j, b) in &other.terms {
                let mut idx = i.clone();
                idx.extend_from_slice(j);
                if let Some((sorted, sign)) = sort_with_sign(&idx) {
                    let c = a * b;
                    out.add_term(sorted, if sign < 0 { -&c } else { c });
                }
            }
        }
        Ok(out)
    }

    /// `self ∧ self ∧ …` (`n` factors); `n = 0` gives the constant 1.
    pub fn wedge_power(&self, n: usize) -> Form {
        let mut out = Form::from_scalar(Scalar::one(&self.chart));
        for _ in 0..n {
            out = out.wedge(self).expect("same chart");
        }
        out
    }

    pub fn exterior_derivative(&self) -> Form {
        let mut out = Form::zero(&self.chart, self.degree + 1);
        for (idx, c) in &self.terms {
            for j in 0..self.chart.dim() {
                if idx.contains(&j) {
                    continue;
                }
                let dc = c.d(j);
                if dc.is_zero() {
                    continue;
                }
                let mut full = vec![j];
                full.extend_from_slice(idx);
                let (sorted, sign) = sort_with_sign(&full).expect("distinct indices");
                out.add_term(sorted, if sign < 0 { -&dc } else { dc });
            }
        }
        out
    }

    pub fn d(&self) -> Form {
        self.exterior_derivative()
    }

    pub fn interior_product(&self, x: &VectorField) -> Result<Form, FormError> {
        check_chart(&self.chart, x.chart())?;
        if self.degree == 0 {
            return Err(FormError::DegreeZero);
        }
        let mut out = Form::zero(&self.chart, self.degree - 1);
        for (idx, c) in &self.terms {
            for (p, &i) in idx.iter().enumerate() {
                let xi = &x.components()[i];
                if xi.is_zero() {
                    continue;
                }
                let mut rest = idx.clone();
                rest.remove(p);
                let t = c * xi;
                out.add_term(rest, if p % 2 == 1 { -&t } else { t });
            }
        }
        Ok(out)
    }

    /// Lie derivative through Cartan's formula `i_X d a + d i_X a`.
    pub fn lie_derivative(&self, x: &VectorField) -> Result<Form, FormError> {
        check_chart(&self.chart, x.chart())?;
        let first = self.d().interior_product(x)?;
        if self.degree == 0 {
            return Ok(first);
        }
        first.try_add(&self.interior_product(x)?.d())
    }

    /// Pulls back along a polynomial map given by one scalar per coordinate of
    /// this form's chart, all living on the source chart.
    pub fn pullback(&self, map: &[Scalar]) -> Result<Form, FormError> {
        if map.len() != self.chart.dim() {
            return Err(FormError::DimensionMismatch {
                expected: self.chart.dim(),
                got: map.len(),
            });
        }
        let target = map[0].chart().clone();
        for m in map {
            check_chart(&target, m.chart())?;
        }
        let differentials: Vec<Form> = map
            .iter()
            .map(|f| Form::from_scalar(f.clone()).d())
            .collect();
        let mut coeffs = BTreeMap::new();
        for (idx, c) in &self.terms {
            coeffs.insert(idx.clone(), c.substitute(map)?);
        }
        Ok(compose_coframe(&target, self.degree, &coeffs, &differentials))
    }

    /// Replaces each `dx^i` by `images[i]` keeping the coefficients; this is the
    /// pointwise composition `a(T·, …, T·)` when `images[i] = Σ_j T^i_j dx^j`.
    pub fn pullback_linear(&self, images: &[Form]) -> Result<Form, FormError> {
        if images.len() != self.chart.dim() {
            return Err(FormError::DimensionMismatch {
                expected: self.chart.dim(),
                got: images.len(),
            });
        }
        for im in images {
            check_chart(&self.chart, im.chart())?;
            if im.degree != 1 && !im.is_zero() {
                return Err(FormError::WrongDegree { expected: 1, got: im.degree });
            }
        }
        Ok(compose_coframe(&self.chart, self.degree, &self.terms, images))
    }

    /// Re-expresses the form on a chart whose leading coordinates are this chart's.
    pub fn lift(&self, target: &Arc<Chart>) -> Result<Form, FormError> {
        let mut out = Form::zero(target, self.degree);
        for (idx, c) in &self.terms {
            out.terms.insert(idx.clone(), c.lift(target)?);
        }
        Ok(out)
    }

    pub fn evaluate(&self, pt: &Point) -> Result<AlternatingTensor, FormError> {
        check_chart(&self.chart, pt.chart())?;
        Ok(self.eval_at(pt.coords()))
    }

    /// Evaluates at raw coordinates of this chart.
    pub fn eval_at(&self, x: &[Rational]) -> AlternatingTensor {
        AlternatingTensor::from_sorted(
            self.chart.dim(),
            self.degree,
            self.terms
                .iter()
                .map(|(k, c)| (k.clone(), c.eval_at(x)))
                .filter(|(_, v)| !v.is_zero()),
        )
    }

    /// Interprets a 1-form `Σ a_i dx^i` as the vector field `Σ a_i ∂_i`.
    pub fn to_vector_field(&self) -> Result<VectorField, FormError> {
        if self.degree != 1 && !self.is_zero() {
            return Err(FormError::WrongDegree { expected: 1, got: self.degree });
        }
        let comps = (0..self.chart.dim()).map(|i| self.coefficient(&[i])).collect();
        Ok(VectorField::new(&self.chart, comps)?)
    }
}

fn compose_coframe(
    target: &Arc<Chart>,
    degree: usize,
    coeffs: &BTreeMap<Vec<usize>, Scalar>,
    images: &[Form],
) -> Form {
    let mut out = Form::zero(target, degree);
    let mut cache: HashMap<Vec<usize>, Form> = HashMap::new();
    cache.insert(Vec::new(), Form::from_scalar(Scalar::one(target)));
    for (idx, c) in coeffs {
        if c.is_zero() {
            continue;
        }
        for len in 1..=idx.len() {
            if !cache.contains_key(&idx[..len]) {
                let prev = &cache[&idx[..len - 1]];
                let next = prev.wedge(&images[idx[len - 1]]).expect("same chart");
                cache.insert(idx[..len].to_vec(), next);
            }
        }
        let basis = &cache[&idx[..]];
        for (k, v) in &basis.terms {
            out.add_term(k.clone(), v * c);
        }
    }
    out.degree = degree;
    out
}

impl fmt::Display for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        if self.degree == 0 {
            return write!(f, "{}", self.coefficient(&[]));
        }
        for (n, (idx, c)) in self.terms.iter().enumerate() {
            let basis: Vec<String> = idx
                .iter()
                .map(|&i| format!("d{}", self.chart.name(i)))
                .collect();
            let basis = basis.join("^");
            let coeff = if c.len() == 1 {
                let s = c.to_string();
                s.strip_prefix('-').map(str::to_string).unwrap_or(s)
            } else {
                format!("({c})")
            };
            let negative = c.len() == 1 && c.leading_is_negative();
            if n == 0 {
                if negative {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if negative { "-" } else { "+" })?;
            }
            if coeff == "1" {
                write!(f, "{basis}")?;
            } else {
                write!(f, "{coeff}*{basis}")?;
            }
        }
        Ok(())
    }
}

impl Add for &Form {
    type Output = Form;
    fn add(self, rhs: &Form) -> Form {
        self.try_add(rhs).expect("incompatible forms")
    }
}

impl Sub for &Form {
    type Output = Form;
    fn sub(self, rhs: &Form) -> Form {
        self.try_sub(rhs).expect("incompatible forms")
    }
}

impl Neg for &Form {
    type Output = Form;
    fn neg(self) -> Form {
        Form {
            chart: self.chart.clone(),
            degree: self.degree,
            terms: self.terms.iter().map(|(k, c)| (k.clone(), -c)).collect(),
        }
    }
}

/// Parses a form literal such as `dq^dp + z*dq^dz` on `chart`.
///
/// `d<coord>` is the basis covector of a coordinate; an identifier that names a
/// coordinate always denotes the coordinate function.
pub fn parse_form(text: &str, chart: &Arc<Chart>) -> Result<Form, FormError> {
    let ast = parse_ast(text, Mode::Form)?;
    ast_to_form(&ast, chart)
}

/// Parses a vector field written with `d<coord>` standing for `∂/∂coord`.
pub fn parse_vector_field(text: &str, chart: &Arc<Chart>) -> Result<VectorField, FormError> {
    parse_form(text, chart)?.to_vector_field()
}

fn ast_to_form(node: &Node, chart: &Arc<Chart>) -> Result<Form, FormError> {
    let zero_form_product = |a: Form, b: Form| a.wedge(&b);
    Ok(match node {
        Node::Num(_) => Form::from_scalar(ast_to_scalar(node, chart)?),
        Node::Ident { name, .. } => {
            if let Some(i) = chart.index_of(name) {
                Form::from_scalar(Scalar::coordinate(chart, i))
            } else if let Some(i) = name.strip_prefix('d').and_then(|rest| chart.index_of(rest)) {
                Form::dx(chart, i)
            } else {
                return Err(ExprError::UnknownCoordinate(name.clone()).into());
            }
        }
        Node::Neg(a) => -&ast_to_form(a, chart)?,
        Node::Add { lhs, rhs, pos } | Node::Sub { lhs, rhs, pos } => {
            let a = ast_to_form(lhs, chart)?;
            let b = ast_to_form(rhs, chart)?;
            let b = if matches!(node, Node::Sub { .. }) { -&b } else { b };
            a.try_add(&b).map_err(|e| match e {
                FormError::DegreeMismatch { left, right, .. } => FormError::DegreeMismatch {
                    left,
                    right,
                    pos: Some(*pos),
                },
                other => other,
            })?
        }
        Node::Mul { lhs, rhs, .. } | Node::Wedge { lhs, rhs, .. } => {
            zero_form_product(ast_to_form(lhs, chart)?, ast_to_form(rhs, chart)?)?
        }
        Node::Pow { base, exp, pos } => {
            let b = ast_to_form(base, chart)?;
            match b.as_scalar() {
                Some(s) => Form::from_scalar(s.pow(*exp)),
                None if b.is_zero() => b,
                None => return Err(FormError::PowerOfForm { pos: *pos }),
            }
        }
    })
}

#[cfg(test)]
mod tests;
