//! Almost-product projectors in foliated normal form, the Nijenhuis tensor and
//! form splittings.

use std::fmt;
use std::sync::Arc;

use num_traits::{One, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::expr::{check_chart, Chart, ExprError, Rational, Scalar};
use crate::exterior::{Form, FormError, TensorField11, VectorField};
use crate::pointwise::Subspace;
use crate::structures::{involutivity_check, InvolutivityReport, SampleGrid, StructureError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ApsError {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Form(#[from] FormError),
    #[error("projector is not in foliated normal form: {0}")]
    NotFoliatedForm(String),
    #[error("frames are not complementary{}: {reason}", point.as_ref().map(|p| format!(" at {p}")).unwrap_or_default())]
    NotComplementary { point: Option<String>, reason: String },
}

/// An almost-product projector `P` with image spanned by coordinate directions.
///
/// In normal form the vertical rows read `P^A = dz^A + c^A` with `c^A` horizontal,
/// so `c^A = −P^A_a dx^a`; horizontal rows vanish.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProjectorField {
    p: TensorField11,
    vertical: Vec<usize>,
}

impl ProjectorField {
    /// `P^{z^A} = dz^A + c^A` for each `(A, c^A)`; `c^A` may only involve horizontal `dx`.
    pub fn from_corrections(chart: &Arc<Chart>, corrections: &[(usize, Form)]) -> Result<ProjectorField, ApsError> {
        let n = chart.dim();
        let mut vertical: Vec<usize> = corrections.iter().map(|(a, _)| *a).collect();
        vertical.sort_unstable();
        vertical.dedup();
        if vertical.len() != corrections.len() {
            return Err(ApsError::NotFoliatedForm("a vertical direction is listed twice".into()));
        }
        if let Some(&a) = vertical.iter().find(|&&a| a >= n) {
            return Err(ExprError::IndexOutOfRange { index: a, dim: n }.into());
        }
        let mut m = vec![vec![Scalar::zero(chart); n]; n];
        for (a, c) in corrections {
            check_chart(chart, c.chart())?;
            if c.degree() != 1 && !c.is_zero() {
                return Err(FormError::WrongDegree { expected: 1, got: c.degree() }.into());
            }
            m[*a][*a] = Scalar::one(chart);
            for (idx, coeff) in c.terms() {
                if vertical.contains(&idx[0]) {
                    return Err(ApsError::NotFoliatedForm(format!(
                        "correction for {} has a d{} component",
                        chart.name(*a),
                        chart.name(idx[0])
                    )));
                }
                m[*a][idx[0]] = coeff.clone();
            }
        }
        Ok(ProjectorField {
            p: TensorField11::new(chart, m)?,
            vertical,
        })
    }

    /// `P = Σ dz^A ⊗ ∂z^A`.
    pub fn trivial(chart: &Arc<Chart>, vertical: &[usize]) -> Result<ProjectorField, ApsError> {
        let cs: Vec<(usize, Form)> = vertical.iter().map(|&a| (a, Form::zero(chart, 1))).collect();
        ProjectorField::from_corrections(chart, &cs)
    }

    /// Wraps an arbitrary tensor without checks; `verify_projector` reports what fails.
    pub fn from_tensor_unchecked(p: TensorField11, vertical: Vec<usize>) -> ProjectorField {
        ProjectorField { p, vertical }
    }

    pub fn chart(&self) -> &Arc<Chart> {
        self.p.chart()
    }

    pub fn tensor(&self) -> &TensorField11 {
        &self.p
    }

    /// Coordinate indices of the vertical directions, increasing.
    pub fn vertical(&self) -> &[usize] {
        &self.vertical
    }

    pub fn horizontal(&self) -> Vec<usize> {
        (0..self.chart().dim()).filter(|i| !self.vertical.contains(i)).collect()
    }

    /// Checks the normal form: vertical block identity, horizontal rows zero.
    pub fn check_foliated(&self) -> Result<(), ApsError> {
        let n = self.chart().dim();
        for r in 0..n {
            for c in 0..n {
                let e = self.p.entry(r, c);
                let ok = if self.vertical.contains(&r) {
                    if r == c {
                        e.constant_value() == Some(Rational::one())
                    } else {
                        !self.vertical.contains(&c) || e.is_zero()
                    }
                } else {
                    e.is_zero()
                };
                if !ok {
                    return Err(ApsError::NotFoliatedForm(format!(
                        "entry ({}, {}) is {}",
                        self.chart().name(r),
                        self.chart().name(c),
                        e
                    )));
                }
            }
        }
        Ok(())
    }

    /// `P^A_a`, the horizontal-frame coefficient `H_a = ∂x^a + P^A_a ∂z^A`.
    pub fn coefficient(&self, a_vertical: usize, b_horizontal: usize) -> Scalar {
        -self.p.entry(a_vertical, b_horizontal)
    }

    /// `c^A = P^A − dz^A`.
    pub fn correction(&self, a_vertical: usize) -> Form {
        let chart = self.chart();
        Form::from_terms(
            chart,
            1,
            self.horizontal()
                .into_iter()
                .map(|b| (vec![b], self.p.entry(a_vertical, b).clone())),
        )
        .expect("entries on own chart")
    }

    /// The vertical coframe element `P^A = dz^A − P^A_a dx^a`.
    pub fn covector(&self, a_vertical: usize) -> Form {
        &Form::dx(self.chart(), a_vertical) + &self.correction(a_vertical)
    }

    /// `{∂x^a + P^A_a ∂z^A}` over horizontal coordinates in increasing order.
    pub fn horizontal_frame(&self) -> Vec<VectorField> {
        let chart = self.chart();
        self.horizontal()
            .into_iter()
            .map(|a| {
                let comps = (0..chart.dim())
                    .map(|i| {
                        if i == a {
                            Scalar::one(chart)
                        } else if self.vertical.contains(&i) {
                            self.coefficient(i, a)
                        } else {
                            Scalar::zero(chart)
                        }
                    })
                    .collect();
                VectorField::new(chart, comps).expect("own chart")
            })
            .collect()
    }

    pub fn vertical_frame(&self) -> Vec<VectorField> {
        self.vertical.iter().map(|&a| VectorField::coordinate(self.chart(), a)).collect()
    }

    /// `R = 1 − P`.
    pub fn complement(&self) -> TensorField11 {
        TensorField11::identity(self.chart())
            .try_sub(&self.p)
            .expect("same chart")
    }

    /// True when every entry of `P` is constant.
    pub fn is_constant(&self) -> bool {
        self.p.rows().iter().flatten().all(Scalar::is_constant)
    }

    /// Lifts to a chart extending this one; `P` kills the new coordinate directions.
    pub fn lift(&self, target: &Arc<Chart>) -> Result<ProjectorField, ApsError> {
        let cs = self
            .vertical
            .iter()
            .map(|&a| Ok((a, self.correction(a).lift(target)?)))
            .collect::<Result<Vec<_>, FormError>>()?;
        let lifted = ProjectorField::from_corrections(target, &cs)?;
        Ok(lifted)
    }
}

impl fmt::Display for ProjectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .vertical
            .iter()
            .map(|&a| format!("{}: {}", self.chart().name(a), self.correction(a)))
            .collect();
        write!(f, "{{ {} }}", parts.join(", "))
    }
}

fn det(m: &[Vec<Scalar>], chart: &Arc<Chart>) -> Scalar {
    match m.len() {
        0 => Scalar::one(chart),
        1 => m[0][0].clone(),
        n => {
            let mut acc = Scalar::zero(chart);
            for j in 0..n {
                if m[0][j].is_zero() {
                    continue;
                }
                let minor: Vec<Vec<Scalar>> = m[1..]
                    .iter()
                    .map(|r| r.iter().enumerate().filter(|(c, _)| *c != j).map(|(_, v)| v.clone()).collect())
                    .collect();
                let term = &m[0][j] * &det(&minor, chart);
                acc = if j % 2 == 0 { &acc + &term } else { &acc - &term };
            }
            acc
        }
    }
}

/// Inverse of a polynomial matrix whose determinant is a nonzero constant.
fn inverse_const_det(m: &[Vec<Scalar>], chart: &Arc<Chart>) -> Result<Vec<Vec<Scalar>>, ApsError> {
    let n = m.len();
    let d = det(m, chart);
    let dv = match d.constant_value() {
        Some(v) if !v.is_zero() => v,
        Some(_) => {
            return Err(ApsError::NotComplementary {
                point: None,
                reason: "horizontal frame is dependent modulo the vertical directions".into(),
            })
        }
        None => {
            return Err(ApsError::NotComplementary {
                point: None,
                reason: format!("horizontal determinant {d} is not a nonzero constant"),
            })
        }
    };
    let inv = dv.recip();
    let mut out = vec![vec![Scalar::zero(chart); n]; n];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, slot) in row.iter_mut().enumerate() {
            // adj[i][j] = (−1)^{i+j} minor(j, i)
            let minor: Vec<Vec<Scalar>> = m
                .iter()
                .enumerate()
                .filter(|(r, _)| *r != j)
                .map(|(_, r)| r.iter().enumerate().filter(|(c, _)| *c != i).map(|(_, v)| v.clone()).collect())
                .collect();
            let c = det(&minor, chart).scale(&inv);
            *slot = if (i + j) % 2 == 0 { c } else { -&c };
        }
    }
    Ok(out)
}

/// Builds `P` with `P(V_A) = V_A` and `P(H) = 0`.
///
/// The vertical frame must consist of coordinate fields, and the horizontal frame's
/// block along the remaining coordinates must have constant nonzero determinant.
pub fn projector_from_frames(vertical: &[VectorField], horizontal: &[VectorField]) -> Result<ProjectorField, ApsError> {
    let chart = match vertical.first().or(horizontal.first()) {
        Some(v) => v.chart().clone(),
        None => {
            return Err(ApsError::NotComplementary {
                point: None,
                reason: "both frames are empty".into(),
            })
        }
    };
    let n = chart.dim();
    let mut vidx = Vec::new();
    for v in vertical {
        check_chart(&chart, v.chart())?;
        let nz: Vec<usize> = (0..n).filter(|&i| !v.components()[i].is_zero()).collect();
        match nz.as_slice() {
            [a] if v.components()[*a].constant_value() == Some(Rational::one()) => vidx.push(*a),
            _ => {
                return Err(ApsError::NotFoliatedForm(format!(
                    "vertical field {v} is not a coordinate direction"
                )))
            }
        }
    }
    let mut sorted = vidx.clone();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != vidx.len() {
        return Err(ApsError::NotComplementary {
            point: None,
            reason: "vertical frame repeats a direction".into(),
        });
    }
    let hidx: Vec<usize> = (0..n).filter(|i| !sorted.contains(i)).collect();
    if horizontal.len() != hidx.len() {
        return Err(ApsError::NotComplementary {
            point: None,
            reason: format!("need {} horizontal fields, got {}", hidx.len(), horizontal.len()),
        });
    }
    for h in horizontal {
        check_chart(&chart, h.chart())?;
    }
    // X[a][b] = x^a-component of H_b
    let x: Vec<Vec<Scalar>> = hidx
        .iter()
        .map(|&a| horizontal.iter().map(|h| h.components()[a].clone()).collect())
        .collect();
    let xinv = inverse_const_det(&x, &chart)?;
    let mut corrections = Vec::new();
    for &z in &sorted {
        let terms = hidx.iter().enumerate().map(|(ai, &a)| {
            let pa = horizontal
                .iter()
                .enumerate()
                .fold(Scalar::zero(&chart), |acc, (b, h)| &acc + &(&h.components()[z] * &xinv[b][ai]));
            (vec![a], -&pa)
        });
        corrections.push((z, Form::from_terms(&chart, 1, terms)?));
    }
    ProjectorField::from_corrections(&chart, &corrections)
}

/// A projector with the given vertical directions that annihilates every field in `reebs`.
///
/// Picks the lexicographically first set of horizontal coordinates on which the
/// fields' components have constant invertible determinant and completes the
/// horizontal frame with the other coordinate fields.
pub fn projector_annihilating(
    chart: &Arc<Chart>,
    vertical: &[usize],
    reebs: &[VectorField],
) -> Result<ProjectorField, ApsError> {
    let hidx: Vec<usize> = (0..chart.dim()).filter(|i| !vertical.contains(i)).collect();
    let vframe: Vec<VectorField> = vertical.iter().map(|&a| VectorField::coordinate(chart, a)).collect();
    for chosen in itertools::Itertools::combinations(hidx.iter().copied(), reebs.len()) {
        let mut horizontal: Vec<VectorField> = Vec::new();
        let mut r = reebs.iter();
        for &a in &hidx {
            if chosen.contains(&a) {
                horizontal.push(r.next().expect("one field per chosen slot").clone());
            } else {
                horizontal.push(VectorField::coordinate(chart, a));
            }
        }
        match projector_from_frames(&vframe, &horizontal) {
            Ok(p) => return Ok(p),
            Err(ApsError::NotComplementary { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(ApsError::NotComplementary {
        point: None,
        reason: "no horizontal coordinates make the given fields transverse to the vertical directions".into(),
    })
}

/// A `TM`-valued 2-form stored per vertical direction as an antisymmetric matrix
/// over slot symbols, where slot `i` is `dx^i` for horizontal and `P^i` for vertical `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VectorValuedTwoForm {
    chart: Arc<Chart>,
    vertical: Vec<usize>,
    coeffs: Vec<Vec<Vec<Scalar>>>,
}

impl VectorValuedTwoForm {
    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn vertical(&self) -> &[usize] {
        &self.vertical
    }

    /// Coefficient of `slot_i ∧ slot_j ⊗ ∂z^A`.
    pub fn component(&self, a_vertical: usize, i: usize, j: usize) -> Scalar {
        let k = self.vertical.iter().position(|&v| v == a_vertical).expect("vertical label");
        self.coeffs[k][i][j].clone()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().flatten().flatten().all(Scalar::is_zero)
    }

    /// Nonzero `(A, i, j, coefficient)` with `i < j`.
    pub fn nonzero_entries(&self) -> Vec<(usize, usize, usize, Scalar)> {
        let n = self.chart.dim();
        let mut out = Vec::new();
        for (k, &a) in self.vertical.iter().enumerate() {
            for i in 0..n {
                for j in i + 1..n {
                    if !self.coeffs[k][i][j].is_zero() {
                        out.push((a, i, j, self.coeffs[k][i][j].clone()));
                    }
                }
            }
        }
        out
    }

    pub fn slot_symbol(&self, i: usize) -> String {
        if self.vertical.contains(&i) {
            format!("P^{}", self.chart.name(i))
        } else {
            format!("d{}", self.chart.name(i))
        }
    }
}

impl fmt::Display for VectorValuedTwoForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .nonzero_entries()
            .into_iter()
            .map(|(a, i, j, c)| {
                format!(
                    "({c})*{}^{} (x) d/d{}",
                    self.slot_symbol(i),
                    self.slot_symbol(j),
                    self.chart.name(a)
                )
            })
            .collect();
        if parts.is_empty() {
            f.write_str("0")
        } else {
            f.write_str(&parts.join(" + "))
        }
    }
}

/// Nijenhuis tensor of `P` in the adapted coframe `{dx^a, P^A}`.
///
/// For horizontal `a < b` the stored coefficient is
/// `∂_b P^A_a − ∂_a P^A_b + P^B_b ∂_{z^B} P^A_a − P^B_a ∂_{z^B} P^A_b`,
/// the `∂z^A` component of `[H_b, H_a]`. Mixed and vertical slots vanish identically.
pub fn nijenhuis(p: &ProjectorField) -> Result<VectorValuedTwoForm, ApsError> {
    p.check_foliated()?;
    let chart = p.chart().clone();
    let n = chart.dim();
    let h = p.horizontal();
    let mut coeffs = Vec::new();
    for &a_v in p.vertical() {
        let mut m = vec![vec![Scalar::zero(&chart); n]; n];
        for (ia, &a) in h.iter().enumerate() {
            for &b in &h[ia + 1..] {
                let pa = p.coefficient(a_v, a);
                let pb = p.coefficient(a_v, b);
                let mut c = &pa.d(b) - &pb.d(a);
                for &bv in p.vertical() {
                    c = &c + &(&(&p.coefficient(bv, b) * &pa.d(bv)) - &(&p.coefficient(bv, a) * &pb.d(bv)));
                }
                m[b][a] = -&c;
                m[a][b] = c;
            }
        }
        coeffs.push(m);
    }
    Ok(VectorValuedTwoForm {
        chart,
        vertical: p.vertical().to_vec(),
        coeffs,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    ParallelP,
    PerpP,
    ParallelR,
    PerpR,
}

/// Components of `a` along the splitting induced by `P` (or by `R = 1 − P`).
pub fn split_form(a: &Form, p: &ProjectorField, which: Split) -> Result<Form, ApsError> {
    check_chart(a.chart(), p.chart())?;
    let images = match which {
        Split::ParallelP | Split::PerpP => p.tensor().coframe_images(),
        Split::ParallelR | Split::PerpR => p.complement().coframe_images(),
    };
    let parallel = a.pullback_linear(&images)?;
    Ok(match which {
        Split::ParallelP | Split::ParallelR => parallel,
        Split::PerpP | Split::PerpR => a.try_sub(&parallel)?,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProjectorReport {
    pub idempotent: bool,
    /// First entry `(row, col, (P²−P)[row][col])` that is not zero.
    pub offending_entry: Option<(usize, usize, Scalar)>,
    pub image_dims: Vec<usize>,
    pub kernel_dims: Vec<usize>,
    /// Image equals the span of the vertical coordinate directions at every point.
    pub image_is_vertical: bool,
    pub first_bad_image: Option<usize>,
    /// Involutivity of the `ker P` frame; `None` outside foliated normal form.
    pub horizontal_involutivity: Option<InvolutivityReport>,
    pub nijenhuis_zero: Option<bool>,
}

impl ProjectorReport {
    pub fn pass(&self) -> bool {
        self.idempotent && self.image_is_vertical
    }
}

/// Checks `P² = P` exactly and the image, kernel and `ker P` involutivity on the grid.
pub fn verify_projector(p: &ProjectorField, grid: &SampleGrid) -> Result<ProjectorReport, StructureError> {
    check_chart(p.chart(), grid.chart())?;
    let n = p.chart().dim();
    let sq = p.tensor().compose(p.tensor()).expect("same chart");
    let diff = sq.try_sub(p.tensor()).expect("same chart");
    let mut offending_entry = None;
    'outer: for r in 0..n {
        for c in 0..n {
            if !diff.entry(r, c).is_zero() {
                offending_entry = Some((r, c, diff.entry(r, c).clone()));
                break 'outer;
            }
        }
    }
    let vert = Subspace::coordinate(n, p.vertical());
    let dims: Vec<(usize, bool)> = grid
        .points()
        .par_iter()
        .map(|x| {
            let m = p.tensor().eval_at(x);
            let cols: Vec<Vec<Rational>> = (0..n).map(|j| m.iter().map(|row| row[j].clone()).collect()).collect();
            let image = Subspace::span(n, &cols);
            (image.dim(), image.same_as(&vert))
        })
        .collect();
    let first_bad_image = dims.iter().position(|(_, ok)| !ok);
    let foliated = p.check_foliated().is_ok();
    let horizontal_involutivity = if foliated {
        Some(involutivity_check(&p.horizontal_frame(), grid)?)
    } else {
        None
    };
    let nijenhuis_zero = if foliated {
        nijenhuis(p).ok().map(|t| t.is_zero())
    } else {
        None
    };
    Ok(ProjectorReport {
        idempotent: offending_entry.is_none(),
        offending_entry,
        image_dims: dims.iter().map(|(d, _)| *d).collect(),
        kernel_dims: dims.iter().map(|(d, _)| n - d).collect(),
        image_is_vertical: first_bad_image.is_none(),
        first_bad_image,
        horizontal_involutivity,
        nijenhuis_zero,
    })
}
