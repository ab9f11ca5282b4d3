//! Exact scalar fields: rationals, charts, points, polynomial scalars and the
//! expression grammar shared by every input file.

mod parse;
mod scalar;

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

pub use parse::{parse_ast, Mode, Node};
pub use scalar::{Monomial, Scalar};

/// Exact rational number with a positive, reduced denominator.
pub type Rational = BigRational;

/// Builds the rational `n / d`.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Builds the integer rational `n`.
pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Formats a rational as `p` or `p/q`.
pub fn fmt_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `p`, `-p` or `p/q` with integer `p`, `q`.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let text = text.trim();
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (text, "1"),
    };
    let num: BigInt = num.parse().ok()?;
    let den: BigInt = den.parse().ok()?;
    if den.is_zero() {
        return None;
    }
    Some(Rational::new(num, den))
}

/// Converts a rational to the nearest `f64`.
pub fn to_f64(r: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or_else(|| {
        if r.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExprError {
    #[error("syntax error at offset {pos}: expected {}", expected.join(" or "))]
    Syntax { pos: usize, expected: Vec<String> },
    #[error("unknown coordinate `{0}`")]
    UnknownCoordinate(String),
    #[error("chart mismatch: `{left}` vs `{right}`")]
    ChartMismatch { left: String, right: String },
    #[error("invalid chart: {0}")]
    InvalidChart(String),
    #[error("expected {expected} values, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("coordinate index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
}

/// An ordered list of named coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Chart {
    id: String,
    names: Vec<String>,
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl Chart {
    pub fn new<S: AsRef<str>>(names: &[S]) -> Result<Arc<Chart>, ExprError> {
        let names: Vec<String> = names.iter().map(|s| s.as_ref().to_string()).collect();
        let id = format!("({})", names.join(","));
        Chart::with_id(id, names)
    }

    pub fn with_id(id: String, names: Vec<String>) -> Result<Arc<Chart>, ExprError> {
        if names.is_empty() {
            return Err(ExprError::InvalidChart("no coordinates".into()));
        }
        for (i, n) in names.iter().enumerate() {
            if !is_identifier(n) {
                return Err(ExprError::InvalidChart(format!("`{n}` is not an identifier")));
            }
            if names[..i].contains(n) {
                return Err(ExprError::InvalidChart(format!("duplicate coordinate `{n}`")));
            }
        }
        Ok(Arc::new(Chart { id, names }))
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// A new chart whose coordinates are these followed by `extra`.
    pub fn extended<S: AsRef<str>>(&self, extra: &[S]) -> Result<Arc<Chart>, ExprError> {
        let mut names = self.names.clone();
        names.extend(extra.iter().map(|s| s.as_ref().to_string()));
        Chart::new(&names)
    }

    /// True when `self` is a prefix of `other`.
    pub fn is_prefix_of(&self, other: &Chart) -> bool {
        other.names.len() >= self.names.len() && other.names[..self.names.len()] == self.names[..]
    }
}

impl fmt::Display for Chart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.names.join(", "))
    }
}

pub(crate) fn same_chart(a: &Arc<Chart>, b: &Arc<Chart>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

pub(crate) fn check_chart(a: &Arc<Chart>, b: &Arc<Chart>) -> Result<(), ExprError> {
    if same_chart(a, b) {
        Ok(())
    } else {
        Err(ExprError::ChartMismatch {
            left: a.id().to_string(),
            right: b.id().to_string(),
        })
    }
}

/// A point of a chart with exact coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Point {
    chart: Arc<Chart>,
    coords: Vec<Rational>,
}

impl Point {
    pub fn new(chart: &Arc<Chart>, coords: Vec<Rational>) -> Result<Point, ExprError> {
        if coords.len() != chart.dim() {
            return Err(ExprError::Arity {
                expected: chart.dim(),
                got: coords.len(),
            });
        }
        Ok(Point {
            chart: chart.clone(),
            coords,
        })
    }

    pub fn origin(chart: &Arc<Chart>) -> Point {
        Point {
            chart: chart.clone(),
            coords: vec![Rational::zero(); chart.dim()],
        }
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn coords(&self) -> &[Rational] {
        &self.coords
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.coords.iter().map(to_f64).collect()
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .chart
            .names()
            .iter()
            .zip(&self.coords)
            .map(|(n, c)| format!("{n}={}", fmt_rational(c)))
            .collect();
        write!(f, "({})", parts.join(", "))
    }
}

/// Parses an expression in the scalar grammar on `chart`.
pub fn parse_scalar(text: &str, chart: &Arc<Chart>) -> Result<Scalar, ExprError> {
    let ast = parse_ast(text, Mode::Scalar)?;
    ast_to_scalar(&ast, chart)
}

pub(crate) fn ast_to_scalar(node: &Node, chart: &Arc<Chart>) -> Result<Scalar, ExprError> {
    Ok(match node {
        Node::Num(r) => Scalar::constant(chart, r.clone()),
        Node::Ident { name, .. } => match chart.index_of(name) {
            Some(i) => Scalar::coordinate(chart, i),
            None => return Err(ExprError::UnknownCoordinate(name.clone())),
        },
        Node::Neg(a) => -&ast_to_scalar(a, chart)?,
        Node::Add { lhs, rhs, .. } => &ast_to_scalar(lhs, chart)? + &ast_to_scalar(rhs, chart)?,
        Node::Sub { lhs, rhs, .. } => &ast_to_scalar(lhs, chart)? - &ast_to_scalar(rhs, chart)?,
        Node::Mul { lhs, rhs, .. } | Node::Wedge { lhs, rhs, .. } => {
            &ast_to_scalar(lhs, chart)? * &ast_to_scalar(rhs, chart)?
        }
        Node::Pow { base, exp, .. } => ast_to_scalar(base, chart)?.pow(*exp),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chart_rejects_duplicates_and_bad_names() {
        assert!(Chart::new(&["q", "q"]).is_err());
        assert!(Chart::new(&["1q"]).is_err());
        assert!(Chart::new::<&str>(&[]).is_err());
        let c = Chart::new(&["q", "p"]).unwrap();
        assert_eq!(c.index_of("p"), Some(1));
        assert!(c.is_prefix_of(&c.extended(&["mu"]).unwrap()));
    }

    #[test]
    fn rational_text_round_trip() {
        for s in ["3", "-7/2", "0", "12/5"] {
            assert_eq!(fmt_rational(&parse_rational(s).unwrap()), s);
        }
        assert_eq!(parse_rational("4/2"), Some(int(2)));
        assert_eq!(parse_rational("1/0"), None);
    }
}
