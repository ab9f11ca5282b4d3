//! Thickened charts, the tautological form and the thickened structures.

use std::sync::Arc;

use itertools::Itertools;
use num_traits::Zero;
use rayon::prelude::*;
use thiserror::Error;

use crate::aps::{ApsError, ProjectorField};
use crate::expr::{check_chart, Chart, ExprError, Rational, Scalar};
use crate::exterior::{Form, FormError, VectorField};
use crate::pointwise::{is_coisotropic, Subspace};
use crate::structures::{
    fmt_coords, reeb_solve_at, ClosednessVerdict, GeometrySpec, Kind, SampleGrid, Structure, StructureError,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ThickenError {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Form(#[from] FormError),
    #[error(transparent)]
    Aps(#[from] ApsError),
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error("projector image {vertical} differs from the characteristic distribution at {point}")]
    VerticalMismatch { point: String, vertical: String },
    #[error("fiber degree must be at least 1")]
    DegreeZero,
}

/// Total space coordinates `base ++ μ_label` over the transversal labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThickenedChart {
    base: Arc<Chart>,
    vertical: Vec<usize>,
    labels: Vec<Vec<usize>>,
    total: Arc<Chart>,
}

impl ThickenedChart {
    /// Builds the total chart; fiber names are `mu_<coords>` made unique against the base.
    pub fn new(base: &Arc<Chart>, vertical: &[usize], labels: Vec<Vec<usize>>) -> Result<ThickenedChart, ThickenError> {
        let mut names: Vec<String> = base.names().to_vec();
        for l in &labels {
            let mut name = format!("mu_{}", l.iter().map(|&i| base.name(i)).join("_"));
            while names.contains(&name) {
                name.push('_');
            }
            names.push(name);
        }
        let total = Chart::new(&names)?;
        Ok(ThickenedChart {
            base: base.clone(),
            vertical: vertical.to_vec(),
            labels,
            total,
        })
    }

    pub fn base(&self) -> &Arc<Chart> {
        &self.base
    }

    pub fn total(&self) -> &Arc<Chart> {
        &self.total
    }

    pub fn labels(&self) -> &[Vec<usize>] {
        &self.labels
    }

    pub fn vertical(&self) -> &[usize] {
        &self.vertical
    }

    /// Total-chart index of the fiber coordinate for label `k`.
    pub fn fiber_index(&self, k: usize) -> usize {
        self.base.dim() + k
    }

    pub fn fiber_names(&self) -> Vec<String> {
        (0..self.labels.len())
            .map(|k| self.total.name(self.fiber_index(k)).to_string())
            .collect()
    }

    /// Wedge symbol of a label, e.g. `dq^P^z`.
    pub fn label_symbol(&self, label: &[usize]) -> String {
        label
            .iter()
            .map(|&i| {
                if self.vertical.contains(&i) {
                    format!("P^{}", self.base.name(i))
                } else {
                    format!("d{}", self.base.name(i))
                }
            })
            .join("^")
    }

    /// `τ`: base coordinates as scalars on the total chart.
    pub fn projection(&self) -> Vec<Scalar> {
        (0..self.base.dim()).map(|i| Scalar::coordinate(&self.total, i)).collect()
    }

    /// The zero section: total coordinates as scalars on the base chart, `μ = 0`.
    pub fn zero_section(&self) -> Vec<Scalar> {
        (0..self.total.dim())
            .map(|i| {
                if i < self.base.dim() {
                    Scalar::coordinate(&self.base, i)
                } else {
                    Scalar::zero(&self.base)
                }
            })
            .collect()
    }

    /// Base point with `μ = 0` appended.
    pub fn on_section(&self, x: &[Rational]) -> Vec<Rational> {
        let mut y = x.to_vec();
        y.extend(std::iter::repeat_n(Rational::zero(), self.labels.len()));
        y
    }
}

/// Strictly increasing `degree`-tuples of base indices with at least one vertical index.
pub fn transversal_coframe(p: &ProjectorField, degree: usize) -> Result<Vec<Vec<usize>>, ThickenError> {
    if degree == 0 {
        return Err(ThickenError::DegreeZero);
    }
    Ok((0..p.chart().dim())
        .combinations(degree)
        .filter(|l| l.iter().any(|i| p.vertical().contains(i)))
        .collect())
}

/// `θ^P = Σ μ_L · (wedge of the label's covectors)`, with `P^A = dz^A − P^A_a dx^a`.
pub fn tautological_form(tc: &ThickenedChart, p: &ProjectorField) -> Result<Form, ThickenError> {
    check_chart(tc.base(), p.chart())?;
    let total = tc.total();
    let degree = tc.labels().first().map_or(1, Vec::len);
    let symbol = |i: usize| -> Result<Form, FormError> {
        if p.vertical().contains(&i) {
            p.covector(i).lift(total)
        } else {
            Ok(Form::dx(total, i))
        }
    };
    let mut theta = Form::zero(total, degree);
    for (k, label) in tc.labels().iter().enumerate() {
        let mut w = symbol(label[0])?;
        for &i in &label[1..] {
            w = w.wedge(&symbol(i)?)?;
        }
        let mu = Scalar::coordinate(total, tc.fiber_index(k));
        theta = theta.try_add(&w.mul_scalar(&mu)?)?;
    }
    Ok(theta)
}

/// Output of [`thicken`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThickeningResult {
    pub chart: ThickenedChart,
    pub theta: Form,
    pub spec_in: GeometrySpec,
    pub spec_out: GeometrySpec,
    pub projector: ProjectorField,
}

/// Checks that `P`'s image is the characteristic distribution at every grid point.
pub fn check_vertical(spec: &GeometrySpec, p: &ProjectorField, grid: &SampleGrid) -> Result<(), ThickenError> {
    check_chart(spec.chart(), p.chart())?;
    check_chart(spec.chart(), grid.chart())?;
    let n = spec.chart().dim();
    let vert = Subspace::coordinate(n, p.vertical());
    let bad = grid
        .points()
        .par_iter()
        .position_first(|x| !spec.characteristic_at(x).same_as(&vert));
    match bad {
        Some(i) => Err(ThickenError::VerticalMismatch {
            point: fmt_coords(&grid.points()[i]),
            vertical: format!(
                "span{{{}}}",
                p.vertical().iter().map(|&a| format!("d/d{}", spec.chart().name(a))).join(", ")
            ),
        }),
        None => Ok(()),
    }
}

/// Thickens `spec` along the fiber of its kind, after checking `P` on `grid`.
pub fn thicken(spec: &GeometrySpec, p: &ProjectorField, grid: &SampleGrid) -> Result<ThickeningResult, ThickenError> {
    let degree = match spec.kind() {
        Kind::PreMultisymplectic(deg) => deg - 1,
        _ => 1,
    };
    let labels = transversal_coframe(p, degree)?;
    thicken_with_labels(spec, p, grid, labels)
}

/// Like [`thicken`] with an explicit label set, e.g. a filtered transversal coframe.
pub fn thicken_with_labels(
    spec: &GeometrySpec,
    p: &ProjectorField,
    grid: &SampleGrid,
    labels: Vec<Vec<usize>>,
) -> Result<ThickeningResult, ThickenError> {
    p.check_foliated()?;
    check_vertical(spec, p, grid)?;
    let tc = ThickenedChart::new(spec.chart(), p.vertical(), labels)?;
    let theta = tautological_form(&tc, p)?;
    let total = tc.total().clone();
    let up = |f: &Form| f.lift(&total);
    let dtheta = theta.d();
    let plus_dtheta = |f: &Form| -> Result<Form, FormError> { up(f)?.try_add(&dtheta) };
    let structure = match spec.structure() {
        Structure::PreSymplectic { omega } => Structure::PreSymplectic { omega: plus_dtheta(omega)? },
        Structure::PreCosymplectic { eta, omega } => Structure::PreCosymplectic {
            eta: up(eta)?,
            omega: plus_dtheta(omega)?,
        },
        Structure::PreContact { eta } => Structure::PreContact {
            eta: up(eta)?.try_sub(&theta)?,
        },
        Structure::PreCocontact { xi, eta } => Structure::PreCocontact {
            xi: up(xi)?,
            eta: up(eta)?.try_add(&theta)?,
        },
        Structure::KPreSymplectic { omegas } => Structure::KPreSymplectic {
            omegas: omegas.iter().map(plus_dtheta).collect::<Result<_, _>>()?,
        },
        Structure::KPreCosymplectic { etas, omegas } => Structure::KPreCosymplectic {
            etas: etas.iter().map(up).collect::<Result<_, _>>()?,
            omegas: omegas.iter().map(plus_dtheta).collect::<Result<_, _>>()?,
        },
        Structure::KPreContact { etas } => Structure::KPreContact {
            etas: etas
                .iter()
                .map(|e| up(e)?.try_sub(&theta))
                .collect::<Result<_, _>>()?,
        },
        Structure::PreMultisymplectic { omega } => Structure::PreMultisymplectic { omega: plus_dtheta(omega)? },
    };
    let spec_out = GeometrySpec::new(&total, structure)?;
    Ok(ThickeningResult {
        chart: tc,
        theta,
        spec_in: spec.clone(),
        spec_out,
        projector: p.clone(),
    })
}

/// Where the thickened Reeb field at a section point differs from the user's choice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReebMismatch {
    pub point: usize,
    pub label: String,
    /// `None` when the thickened system has no unique solution.
    pub thickened: Option<Vec<Rational>>,
    pub expected: Vec<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReebExtension {
    pub pass: bool,
    pub per_point: Vec<bool>,
    pub witness: Option<ReebMismatch>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThickeningReport {
    pub kind_out: String,
    pub zero_section_pullback: bool,
    pub closedness: Vec<ClosednessVerdict>,
    pub on_section: Vec<bool>,
    pub off_section: Vec<bool>,
    /// Off-section verdicts count only when `N_P = 0`.
    pub off_section_required: bool,
    pub ell: usize,
    pub coisotropic: Vec<bool>,
    /// First on-section point whose orthogonal escapes the section, with the escaping vector.
    pub coisotropy_witness: Option<(usize, Vec<Rational>)>,
    pub reeb: Option<ReebExtension>,
}

impl ThickeningReport {
    pub fn pass(&self) -> bool {
        self.zero_section_pullback
            && self.closedness.iter().all(|c| c.closed)
            && self.on_section.iter().all(|&b| b)
            && (!self.off_section_required || self.off_section.iter().all(|&b| b))
            && self.coisotropic.iter().all(|&b| b)
            && self.reeb.as_ref().is_none_or(|r| r.pass)
    }
}

impl ThickeningResult {
    /// Pulls every output form back along the zero section and compares with the input.
    pub fn zero_section_pullback_holds(&self) -> Result<bool, ThickenError> {
        let s = self.chart.zero_section();
        for ((_, out), (_, inp)) in self.spec_out.named_forms().iter().zip(self.spec_in.named_forms()) {
            if out.pullback(&s)? != inp {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Verifies closedness, nondegeneracy, ℓ-coisotropy of the zero section and,
/// when `user_reeb` is given as `(label, field on the base)`, the Reeb extension.
pub fn verify_thickening(
    res: &ThickeningResult,
    on_section: &SampleGrid,
    off_section: &SampleGrid,
    nijenhuis_zero: bool,
    user_reeb: Option<&[(String, VectorField)]>,
) -> Result<ThickeningReport, ThickenError> {
    let total = res.chart.total();
    check_chart(total, on_section.chart())?;
    check_chart(total, off_section.chart())?;
    let spec = &res.spec_out;
    let base_dim = res.chart.base().dim();
    let n = total.dim();
    let ell = res.spec_in.kind().default_ell();
    let closedness = spec
        .closed_forms()
        .into_iter()
        .map(|(form, f)| ClosednessVerdict { form, closed: f.d().is_zero() })
        .collect();
    let on: Vec<bool> = on_section.points().par_iter().map(|x| spec.nondegenerate_at(x)).collect();
    let off: Vec<bool> = off_section.points().par_iter().map(|x| spec.nondegenerate_at(x)).collect();
    let w = Subspace::coordinate(n, &(0..base_dim).collect::<Vec<_>>());
    let cois: Vec<(bool, Option<Vec<Rational>>)> = on_section
        .points()
        .par_iter()
        .map(|x| match is_coisotropic(&w, &spec.at(x), ell) {
            Ok(v) => (v.coisotropic, v.witness),
            Err(_) => (false, None),
        })
        .collect();
    let coisotropy_witness = cois
        .iter()
        .enumerate()
        .find(|(_, (ok, _))| !ok)
        .map(|(i, (_, wv))| (i, wv.clone().unwrap_or_default()));
    let reeb = match user_reeb {
        Some(fields) => Some(reeb_extension(res, on_section, fields)?),
        None => None,
    };
    Ok(ThickeningReport {
        kind_out: res.spec_in.kind().nondegenerate_name(),
        zero_section_pullback: res.zero_section_pullback_holds()?,
        closedness,
        on_section: on,
        off_section: off,
        off_section_required: nijenhuis_zero,
        ell,
        coisotropic: cois.into_iter().map(|(b, _)| b).collect(),
        coisotropy_witness,
        reeb,
    })
}

fn reeb_extension(
    res: &ThickeningResult,
    on_section: &SampleGrid,
    fields: &[(String, VectorField)],
) -> Result<ReebExtension, ThickenError> {
    let base = res.chart.base();
    let base_dim = base.dim();
    let total = res.chart.total();
    for (_, f) in fields {
        check_chart(base, f.chart())?;
    }
    let per: Vec<Result<Option<ReebMismatch>, StructureError>> = on_section
        .points()
        .par_iter()
        .enumerate()
        .map(|(i, x)| {
            let fams = match reeb_solve_at(&res.spec_out, x) {
                Ok(f) => f,
                Err(StructureError::NoReebAtPoint { .. }) => Vec::new(),
                Err(e) => return Err(e),
            };
            for (label, field) in fields {
                let mut expected = field.eval_at(&x[..base_dim]);
                expected.resize(total.dim(), Rational::zero());
                let got = fams
                    .iter()
                    .find(|f| &f.label == label)
                    .filter(|f| f.kernel.is_empty())
                    .map(|f| f.particular.clone());
                if got.as_ref() != Some(&expected) {
                    return Ok(Some(ReebMismatch {
                        point: i,
                        label: label.clone(),
                        thickened: got,
                        expected,
                    }));
                }
            }
            Ok(None)
        })
        .collect();
    let mut per_point = Vec::new();
    let mut witness = None;
    for r in per {
        let m = r?;
        per_point.push(m.is_none());
        if witness.is_none() {
            witness = m;
        }
    }
    Ok(ReebExtension {
        pass: witness.is_none(),
        per_point,
        witness,
    })
}
