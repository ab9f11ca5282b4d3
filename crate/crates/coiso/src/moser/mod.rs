//! Fiber homotopy primitives and numerical Moser-flow verification.
//!
//! Everything up to the vector-field solve is exact; only trajectories and the
//! flow differential are floating point.

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use num_traits::One;
use rayon::prelude::*;
use thiserror::Error;

use crate::expr::{check_chart, fmt_rational, to_f64, ExprError, Monomial, Rational, Scalar};
use crate::exterior::{Form, FormError};
use crate::pointwise::linalg;
use crate::structures::{fmt_coords, reeb_solve_at, GeometrySpec, SampleGrid, StructureError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MoserError {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Form(#[from] FormError),
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error("form is not closed")]
    NotClosed,
    #[error("form does not vanish on the zero section: base part {0}")]
    NotVanishingOnSection(String),
    #[error("the Moser system has no unique solution at t = {t}, {point}")]
    DegenerateAtPoint { t: String, point: String },
    #[error("trajectory left the finite range at t = {t}")]
    NonFiniteState { t: f64 },
    #[error("invalid Moser run: {0}")]
    InvalidRun(String),
}

fn fiber_degree(m: &Monomial, idx: &[usize], fiber: &[usize]) -> u32 {
    let mu: u32 = fiber.iter().map(|&j| m.0[j]).sum();
    mu + idx.iter().filter(|i| fiber.contains(i)).count() as u32
}

/// Terms of joint fiber degree 0, i.e. the pullback to `μ = 0` with `dμ` dropped.
pub fn section_part(omega: &Form, fiber: &[usize]) -> Form {
    let chart = omega.chart();
    let terms = omega.terms().iter().map(|(idx, c)| {
        let kept = c
            .terms()
            .iter()
            .filter(|(m, _)| fiber_degree(m, idx, fiber) == 0)
            .map(|(m, v)| (m.0.clone(), v.clone()));
        (idx.clone(), Scalar::from_terms(chart, kept).expect("own chart"))
    });
    Form::from_terms(chart, omega.degree(), terms).expect("own chart")
}

/// Fiber-scaling homotopy operator `K(Ω) = ∫₀¹ t⁻¹ ψ_t*(i_Δ Ω) dt`, `Δ = Σ μ_j ∂/∂μ_j`.
///
/// A term of joint fiber degree `m ≥ 1` in `{μ, dμ}` maps to `(1/m) i_Δ(term)`;
/// degree-0 terms are dropped. No preconditions.
pub fn homotopy_operator(omega: &Form, fiber: &[usize]) -> Result<Form, MoserError> {
    if omega.degree() == 0 {
        return Err(FormError::DegreeZero.into());
    }
    let chart = omega.chart();
    let n = chart.dim();
    if let Some(&j) = fiber.iter().find(|&&j| j >= n) {
        return Err(ExprError::IndexOutOfRange { index: j, dim: n }.into());
    }
    let mut acc: std::collections::BTreeMap<Vec<usize>, Vec<(Vec<u32>, Rational)>> = Default::default();
    for (idx, c) in omega.terms() {
        for (m, v) in c.terms() {
            let deg = fiber_degree(m, idx, fiber);
            if deg == 0 {
                continue;
            }
            let weight = v / Rational::from_integer(BigInt::from(deg));
            for (p, &i) in idx.iter().enumerate() {
                if !fiber.contains(&i) {
                    continue;
                }
                let mut rest = idx.clone();
                rest.remove(p);
                let mut e = m.0.clone();
                e[i] += 1;
                let w = if p % 2 == 1 { -weight.clone() } else { weight.clone() };
                acc.entry(rest).or_default().push((e, w));
            }
        }
    }
    let terms = acc
        .into_iter()
        .map(|(idx, ts)| Ok((idx, Scalar::from_terms(chart, ts)?)))
        .collect::<Result<Vec<_>, ExprError>>()?;
    Ok(Form::from_terms(chart, omega.degree() - 1, terms)?)
}

/// `θ = K(Ω)` for a closed `Ω` that vanishes on the zero section, so `dθ = Ω`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HomotopyPrimitive {
    pub theta: Form,
    pub source: Form,
    pub fiber: Vec<usize>,
}

pub fn fiber_homotopy_primitive(omega: &Form, fiber: &[usize]) -> Result<HomotopyPrimitive, MoserError> {
    if !omega.d().is_zero() {
        return Err(MoserError::NotClosed);
    }
    let base = section_part(omega, fiber);
    if !base.is_zero() {
        return Err(MoserError::NotVanishingOnSection(base.to_string()));
    }
    Ok(HomotopyPrimitive {
        theta: homotopy_operator(omega, fiber)?,
        source: omega.clone(),
        fiber: fiber.to_vec(),
    })
}

/// The Moser equation used for a pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MoserMode {
    /// `i_X F_t = −K(F₂ − F₁)` for closed forms of degree ≥ 2.
    Closed(HomotopyPrimitive),
    /// `i_X dη_t = η₁ − η₂` with `η_t(X) = 0`.
    Contact,
}

/// A pair of forms, `F_t = (1 − t) F₁ + t F₂`, and sampling parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct MoserRun {
    pub form1: Form,
    pub form2: Form,
    pub mode: MoserMode,
    pub samples: Vec<Vec<Rational>>,
    pub steps: usize,
    pub tolerance: f64,
    /// Sample box half-width; the finite-difference step is `1e-4` of it.
    pub box_size: f64,
}

impl MoserRun {
    pub fn closed(
        form1: &Form,
        form2: &Form,
        fiber: &[usize],
        samples: Vec<Vec<Rational>>,
        steps: usize,
        tolerance: f64,
        box_size: f64,
    ) -> Result<MoserRun, MoserError> {
        check_pair(form1, form2, steps, tolerance, box_size)?;
        if form1.degree() < 2 {
            return Err(MoserError::InvalidRun("closed mode needs forms of degree at least 2".into()));
        }
        let prim = fiber_homotopy_primitive(&form2.try_sub(form1)?, fiber)?;
        Ok(MoserRun {
            form1: form1.clone(),
            form2: form2.clone(),
            mode: MoserMode::Closed(prim),
            samples,
            steps,
            tolerance,
            box_size,
        })
    }

    pub fn contact(
        eta1: &Form,
        eta2: &Form,
        samples: Vec<Vec<Rational>>,
        steps: usize,
        tolerance: f64,
        box_size: f64,
    ) -> Result<MoserRun, MoserError> {
        check_pair(eta1, eta2, steps, tolerance, box_size)?;
        if eta1.degree() != 1 {
            return Err(MoserError::InvalidRun("contact mode needs 1-forms".into()));
        }
        Ok(MoserRun {
            form1: eta1.clone(),
            form2: eta2.clone(),
            mode: MoserMode::Contact,
            samples,
            steps,
            tolerance,
            box_size,
        })
    }

    /// `(F_t, rhs)` whose rows are `F_t(e_i, e_J) X^i = rhs_J` over all sorted `J`.
    fn system(&self) -> System {
        let n = self.form1.chart().dim();
        let (f1, f2, rhs_form) = match &self.mode {
            MoserMode::Closed(p) => (self.form1.clone(), self.form2.clone(), p.theta.scale(&-Rational::one())),
            MoserMode::Contact => (self.form1.d(), self.form2.d(), self.form1.try_sub(&self.form2).expect("same chart")),
        };
        let k = f1.degree();
        let tuples: Vec<Vec<usize>> = (0..n).combinations(k - 1).collect();
        let entry = |f: &Form, i: usize, j: &[usize]| -> Scalar {
            let mut full = vec![i];
            full.extend_from_slice(j);
            match crate::exterior::sort_with_sign(&full) {
                Some((sorted, s)) => {
                    let c = f.coefficient(&sorted);
                    if s < 0 {
                        -&c
                    } else {
                        c
                    }
                }
                None => Scalar::zero(f.chart()),
            }
        };
        let mut rows1 = Vec::new();
        let mut rows2 = Vec::new();
        let mut rhs = Vec::new();
        for j in &tuples {
            rows1.push((0..n).map(|i| entry(&f1, i, j)).collect::<Vec<_>>());
            rows2.push((0..n).map(|i| entry(&f2, i, j)).collect::<Vec<_>>());
            rhs.push(rhs_form.coefficient(j));
        }
        if self.mode == MoserMode::Contact {
            rows1.push((0..n).map(|i| self.form1.coefficient(&[i])).collect());
            rows2.push((0..n).map(|i| self.form2.coefficient(&[i])).collect());
            rhs.push(Scalar::zero(self.form1.chart()));
        }
        System { n, rows1, rows2, rhs }
    }
}

fn check_pair(f1: &Form, f2: &Form, steps: usize, tolerance: f64, box_size: f64) -> Result<(), MoserError> {
    check_chart(f1.chart(), f2.chart())?;
    if f1.degree() != f2.degree() {
        return Err(FormError::DegreeMismatch {
            left: f1.degree(),
            right: f2.degree(),
            pos: None,
        }
        .into());
    }
    if steps == 0 {
        return Err(MoserError::InvalidRun("steps must be at least 1".into()));
    }
    if tolerance.is_nan() || tolerance <= 0.0 {
        return Err(MoserError::InvalidRun("tolerance must be positive".into()));
    }
    if box_size.is_nan() || box_size <= 0.0 {
        return Err(MoserError::InvalidRun("box size must be positive".into()));
    }
    Ok(())
}

struct System {
    n: usize,
    rows1: Vec<Vec<Scalar>>,
    rows2: Vec<Vec<Scalar>>,
    rhs: Vec<Scalar>,
}

/// Exact Moser field at rational `(t, x)`.
pub fn moser_vector_field_at(run: &MoserRun, t: &Rational, x: &[Rational]) -> Result<Vec<Rational>, MoserError> {
    let sys = run.system();
    let one_minus = Rational::one() - t;
    let a: Vec<Vec<Rational>> = sys
        .rows1
        .iter()
        .zip(&sys.rows2)
        .map(|(r1, r2)| {
            r1.iter()
                .zip(r2)
                .map(|(a, b)| &one_minus * a.eval_at(x) + t * b.eval_at(x))
                .collect()
        })
        .collect();
    let b: Vec<Rational> = sys.rhs.iter().map(|s| s.eval_at(x)).collect();
    match linalg::solve_affine(&a, &b, sys.n) {
        Some((sol, kernel)) if kernel.is_empty() => Ok(sol),
        _ => Err(MoserError::DegenerateAtPoint {
            t: fmt_rational(t),
            point: fmt_coords(x),
        }),
    }
}

/// A polynomial compiled for fast `f64` evaluation.
#[derive(Debug, Clone)]
struct FloatPoly(Vec<(f64, Vec<(usize, i32)>)>);

impl FloatPoly {
    fn new(s: &Scalar) -> FloatPoly {
        FloatPoly(
            s.terms()
                .iter()
                .map(|(m, c)| {
                    let vars = m.0.iter().enumerate().filter(|(_, e)| **e > 0).map(|(i, e)| (i, *e as i32)).collect();
                    (to_f64(c), vars)
                })
                .collect(),
        )
    }

    fn eval(&self, x: &[f64]) -> f64 {
        self.0
            .iter()
            .map(|(c, vars)| vars.iter().fold(*c, |acc, (i, e)| acc * x[*i].powi(*e)))
            .sum()
    }
}

struct FloatSystem {
    n: usize,
    rows1: Vec<Vec<FloatPoly>>,
    rows2: Vec<Vec<FloatPoly>>,
    rhs: Vec<FloatPoly>,
}

impl FloatSystem {
    fn new(sys: &System) -> FloatSystem {
        let c = |rows: &Vec<Vec<Scalar>>| rows.iter().map(|r| r.iter().map(FloatPoly::new).collect()).collect();
        FloatSystem {
            n: sys.n,
            rows1: c(&sys.rows1),
            rows2: c(&sys.rows2),
            rhs: sys.rhs.iter().map(FloatPoly::new).collect(),
        }
    }

    fn field(&self, t: f64, x: &[f64]) -> Result<Vec<f64>, MoserError> {
        let m = self.rows1.len();
        let a = DMatrix::from_fn(m, self.n, |r, c| (1.0 - t) * self.rows1[r][c].eval(x) + t * self.rows2[r][c].eval(x));
        let b = DVector::from_fn(m, |r, _| self.rhs[r].eval(x));
        let degenerate = || MoserError::DegenerateAtPoint {
            t: format!("{t}"),
            point: format!("({})", x.iter().map(|v| format!("{v}")).join(", ")),
        };
        let sol = if m == self.n {
            a.clone().lu().solve(&b).ok_or_else(degenerate)?
        } else {
            let svd = a.clone().svd(true, true);
            let smax = svd.singular_values.max();
            if svd.rank(1e-12 * smax.max(1.0)) < self.n {
                return Err(degenerate());
            }
            let sol = svd.solve(&b, 1e-12 * smax.max(1.0)).map_err(|_| degenerate())?;
            if (&a * &sol - &b).amax() > 1e-9 * (1.0 + b.amax()) {
                return Err(degenerate());
            }
            sol
        };
        if sol.iter().any(|v| !v.is_finite()) {
            return Err(degenerate());
        }
        Ok(sol.iter().copied().collect())
    }

    /// Classic fixed-step RK4 from `t = 0` to `t = 1`.
    fn flow(&self, x0: &[f64], steps: usize) -> Result<Vec<f64>, (f64, MoserError)> {
        let h = 1.0 / steps as f64;
        let mut x = x0.to_vec();
        let axpy = |x: &[f64], k: &[f64], s: f64| -> Vec<f64> { x.iter().zip(k).map(|(a, b)| a + s * b).collect() };
        for i in 0..steps {
            let t = i as f64 * h;
            let f = |t: f64, y: &[f64]| self.field(t, y).map_err(|e| (t, e));
            let k1 = f(t, &x)?;
            let k2 = f(t + h / 2.0, &axpy(&x, &k1, h / 2.0))?;
            let k3 = f(t + h / 2.0, &axpy(&x, &k2, h / 2.0))?;
            let k4 = f(t + h, &axpy(&x, &k3, h))?;
            for j in 0..x.len() {
                x[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
            }
            if x.iter().any(|v| !v.is_finite()) {
                return Err((t + h, MoserError::NonFiniteState { t: t + h }));
            }
        }
        Ok(x)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleResult {
    pub point: Vec<Rational>,
    pub max_error: Option<f64>,
    pub pass: bool,
    pub aborted_at_t: Option<f64>,
    pub diagnostic: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MoserReport {
    pub samples: Vec<SampleResult>,
    pub max_error: f64,
    pub pass: bool,
}

fn det(m: &[Vec<f64>]) -> f64 {
    let n = m.len();
    if n == 0 {
        return 1.0;
    }
    DMatrix::from_fn(n, n, |r, c| m[r][c]).determinant()
}

/// Integrates the Moser field from each sample and reports `max |ψ₁*F₂ − F₁|` at the sample.
pub fn moser_flow_verify(run: &MoserRun) -> MoserReport {
    let sys = FloatSystem::new(&run.system());
    let n = sys.n;
    let k = run.form1.degree();
    let tuples: Vec<Vec<usize>> = (0..n).combinations(k).collect();
    let f1: Vec<FloatPoly> = tuples.iter().map(|i| FloatPoly::new(&run.form1.coefficient(i))).collect();
    let f2: Vec<FloatPoly> = tuples.iter().map(|i| FloatPoly::new(&run.form2.coefficient(i))).collect();
    let h = 1e-4 * run.box_size;
    let samples: Vec<SampleResult> = run
        .samples
        .par_iter()
        .map(|pt| {
            let x: Vec<f64> = pt.iter().map(to_f64).collect();
            let abort = |(t, e): (f64, MoserError)| SampleResult {
                point: pt.clone(),
                max_error: None,
                pass: false,
                aborted_at_t: Some(t),
                diagnostic: Some(e.to_string()),
            };
            let center = match sys.flow(&x, run.steps) {
                Ok(c) => c,
                Err(e) => return abort(e),
            };
            // jac[r][c] = ∂ψ^r/∂x^c by central differences
            let mut jac = vec![vec![0.0; n]; n];
            for c in 0..n {
                let mut plus = x.clone();
                plus[c] += h;
                let mut minus = x.clone();
                minus[c] -= h;
                let (yp, ym) = match (sys.flow(&plus, run.steps), sys.flow(&minus, run.steps)) {
                    (Ok(a), Ok(b)) => (a, b),
                    (Err(e), _) | (_, Err(e)) => return abort(e),
                };
                for r in 0..n {
                    jac[r][c] = (yp[r] - ym[r]) / (2.0 * h);
                }
            }
            let f2_at: Vec<f64> = f2.iter().map(|p| p.eval(&center)).collect();
            let mut err: f64 = 0.0;
            for (ii, i) in tuples.iter().enumerate() {
                let mut pulled = 0.0;
                for (kk, kt) in tuples.iter().enumerate() {
                    if f2_at[kk] == 0.0 {
                        continue;
                    }
                    let sub: Vec<Vec<f64>> = kt.iter().map(|&r| i.iter().map(|&c| jac[r][c]).collect()).collect();
                    pulled += f2_at[kk] * det(&sub);
                }
                err = err.max((pulled - f1[ii].eval(&x)).abs());
            }
            SampleResult {
                point: pt.clone(),
                max_error: Some(err),
                pass: err <= run.tolerance,
                aborted_at_t: None,
                diagnostic: None,
            }
        })
        .collect();
    let max_error = samples.iter().filter_map(|s| s.max_error).fold(0.0, f64::max);
    let pass = samples.iter().all(|s| s.pass);
    MoserReport { samples, max_error, pass }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProportionalityReport {
    pub proportional: bool,
    pub per_point: Vec<bool>,
    /// First non-proportional grid point and the Reeb label where it fails.
    pub witness: Option<(usize, String)>,
}

/// Checks pairwise that the particular Reeb solutions of two specs are parallel at every grid point.
pub fn reeb_proportionality_check(
    spec1: &GeometrySpec,
    spec2: &GeometrySpec,
    grid: &SampleGrid,
) -> Result<ProportionalityReport, MoserError> {
    check_chart(spec1.chart(), spec2.chart())?;
    check_chart(spec1.chart(), grid.chart())?;
    let n = spec1.chart().dim();
    let per: Vec<Result<Option<String>, StructureError>> = grid
        .points()
        .par_iter()
        .map(|x| {
            let a = reeb_solve_at(spec1, x)?;
            let b = reeb_solve_at(spec2, x)?;
            for (fa, fb) in a.iter().zip(&b) {
                if linalg::rank(&[fa.particular.clone(), fb.particular.clone()], n) > 1 {
                    return Ok(Some(fa.label.clone()));
                }
            }
            Ok(None)
        })
        .collect();
    let mut per_point = Vec::new();
    let mut witness = None;
    for (i, r) in per.into_iter().enumerate() {
        let bad = r?;
        per_point.push(bad.is_none());
        if witness.is_none() {
            witness = bad.map(|l| (i, l));
        }
    }
    Ok(ProportionalityReport {
        proportional: witness.is_none(),
        per_point,
        witness,
    })
}

#[cfg(test)]
mod tests;
