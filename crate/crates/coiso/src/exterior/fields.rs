use std::fmt;
use std::sync::Arc;

use num_traits::{One, Zero};

use super::{Form, FormError};
use crate::expr::{check_chart, Chart, ExprError, Rational, Scalar};

/// `Σ X^i ∂/∂x^i` with polynomial components.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VectorField {
    chart: Arc<Chart>,
    comps: Vec<Scalar>,
}

impl VectorField {
    pub fn new(chart: &Arc<Chart>, comps: Vec<Scalar>) -> Result<VectorField, ExprError> {
        if comps.len() != chart.dim() {
            return Err(ExprError::Arity {
                expected: chart.dim(),
                got: comps.len(),
            });
        }
        for c in &comps {
            check_chart(chart, c.chart())?;
        }
        Ok(VectorField {
            chart: chart.clone(),
            comps,
        })
    }

    pub fn zero(chart: &Arc<Chart>) -> VectorField {
        VectorField {
            chart: chart.clone(),
            comps: vec![Scalar::zero(chart); chart.dim()],
        }
    }

    /// The coordinate field `∂/∂x^i`.
    pub fn coordinate(chart: &Arc<Chart>, i: usize) -> VectorField {
        let mut v = VectorField::zero(chart);
        v.comps[i] = Scalar::one(chart);
        v
    }

    /// A field with constant components.
    pub fn constant(chart: &Arc<Chart>, values: &[Rational]) -> Result<VectorField, ExprError> {
        VectorField::new(
            chart,
            values.iter().map(|v| Scalar::constant(chart, v.clone())).collect(),
        )
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn components(&self) -> &[Scalar] {
        &self.comps
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(Scalar::is_zero)
    }

    /// Directional derivative `X(f)`.
    pub fn apply(&self, f: &Scalar) -> Result<Scalar, ExprError> {
        check_chart(&self.chart, f.chart())?;
        let mut out = Scalar::zero(&self.chart);
        for (i, xi) in self.comps.iter().enumerate() {
            if !xi.is_zero() {
                out = &out + &(xi * &f.d(i));
            }
        }
        Ok(out)
    }

    /// `[X, Y]^i = X(Y^i) − Y(X^i)`.
    pub fn lie_bracket(&self, other: &VectorField) -> Result<VectorField, ExprError> {
        check_chart(&self.chart, &other.chart)?;
        let comps = (0..self.chart.dim())
            .map(|i| Ok(&self.apply(&other.comps[i])? - &other.apply(&self.comps[i])?))
            .collect::<Result<Vec<_>, ExprError>>()?;
        VectorField::new(&self.chart, comps)
    }

    pub fn try_add(&self, other: &VectorField) -> Result<VectorField, ExprError> {
        check_chart(&self.chart, &other.chart)?;
        let comps = self.comps.iter().zip(&other.comps).map(|(a, b)| a + b).collect();
        VectorField::new(&self.chart, comps)
    }

    pub fn scale(&self, f: &Scalar) -> Result<VectorField, ExprError> {
        check_chart(&self.chart, f.chart())?;
        VectorField::new(&self.chart, self.comps.iter().map(|c| c * f).collect())
    }

    pub fn eval_at(&self, x: &[Rational]) -> Vec<Rational> {
        self.comps.iter().map(|c| c.eval_at(x)).collect()
    }

    /// The 1-form with the same components, used for printing in `d<coord>` notation.
    pub fn to_one_form(&self) -> Form {
        Form::from_terms(
            &self.chart,
            1,
            self.comps.iter().enumerate().map(|(i, c)| (vec![i], c.clone())),
        )
        .expect("components on own chart")
    }

    /// Lifts onto a chart whose leading coordinates are this chart's; the new
    /// components are zero.
    pub fn lift(&self, target: &Arc<Chart>) -> Result<VectorField, ExprError> {
        let mut comps = self
            .comps
            .iter()
            .map(|c| c.lift(target))
            .collect::<Result<Vec<_>, _>>()?;
        comps.resize(target.dim(), Scalar::zero(target));
        VectorField::new(target, comps)
    }
}

impl fmt::Display for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_one_form())
    }
}

/// A (1,1)-tensor field; `m[row][col]` maps input coordinate `col` to output `row`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TensorField11 {
    chart: Arc<Chart>,
    m: Vec<Vec<Scalar>>,
}

impl TensorField11 {
    pub fn new(chart: &Arc<Chart>, m: Vec<Vec<Scalar>>) -> Result<TensorField11, FormError> {
        let n = chart.dim();
        if m.len() != n || m.iter().any(|r| r.len() != n) {
            return Err(FormError::DimensionMismatch {
                expected: n,
                got: m.len(),
            });
        }
        for row in &m {
            for c in row {
                check_chart(chart, c.chart())?;
            }
        }
        Ok(TensorField11 {
            chart: chart.clone(),
            m,
        })
    }

    pub fn zero(chart: &Arc<Chart>) -> TensorField11 {
        let n = chart.dim();
        TensorField11 {
            chart: chart.clone(),
            m: vec![vec![Scalar::zero(chart); n]; n],
        }
    }

    pub fn identity(chart: &Arc<Chart>) -> TensorField11 {
        let mut t = TensorField11::zero(chart);
        for i in 0..chart.dim() {
            t.m[i][i] = Scalar::one(chart);
        }
        t
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn entry(&self, row: usize, col: usize) -> &Scalar {
        &self.m[row][col]
    }

    pub fn rows(&self) -> &[Vec<Scalar>] {
        &self.m
    }

    pub fn apply(&self, x: &VectorField) -> Result<VectorField, ExprError> {
        check_chart(&self.chart, x.chart())?;
        let comps = self
            .m
            .iter()
            .map(|row| {
                row.iter()
                    .zip(x.components())
                    .fold(Scalar::zero(&self.chart), |acc, (a, b)| &acc + &(a * b))
            })
            .collect();
        VectorField::new(&self.chart, comps)
    }

    /// Matrix product `self ∘ other`.
    pub fn compose(&self, other: &TensorField11) -> Result<TensorField11, FormError> {
        check_chart(&self.chart, &other.chart)?;
        let n = self.chart.dim();
        let mut out = TensorField11::zero(&self.chart);
        for i in 0..n {
            for j in 0..n {
                let mut acc = Scalar::zero(&self.chart);
                for k in 0..n {
                    if !self.m[i][k].is_zero() && !other.m[k][j].is_zero() {
                        acc = &acc + &(&self.m[i][k] * &other.m[k][j]);
                    }
                }
                out.m[i][j] = acc;
            }
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &TensorField11) -> Result<TensorField11, FormError> {
        check_chart(&self.chart, &other.chart)?;
        let m = self
            .m
            .iter()
            .zip(&other.m)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x - y).collect())
            .collect();
        TensorField11::new(&self.chart, m)
    }

    /// Images `dx^i ↦ Σ_j m[i][j] dx^j` of the coordinate coframe.
    pub fn coframe_images(&self) -> Vec<Form> {
        self.m
            .iter()
            .map(|row| {
                Form::from_terms(
                    &self.chart,
                    1,
                    row.iter().enumerate().map(|(j, c)| (vec![j], c.clone())),
                )
                .expect("entries on own chart")
            })
            .collect()
    }

    pub fn eval_at(&self, x: &[Rational]) -> Vec<Vec<Rational>> {
        self.m
            .iter()
            .map(|row| row.iter().map(|c| c.eval_at(x)).collect())
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.m.iter().flatten().all(Scalar::is_zero)
    }

    /// True when every entry is the constant of the identity matrix.
    pub fn is_identity(&self) -> bool {
        self.m.iter().enumerate().all(|(i, row)| {
            row.iter().enumerate().all(|(j, c)| {
                let want = if i == j { Rational::one() } else { Rational::zero() };
                c.constant_value() == Some(want)
            })
        })
    }
}
