//! The eight structure kinds, their axioms, characteristic distributions,
//! Frobenius checks and Reeb solving.

mod grid;

use std::fmt;
use std::sync::Arc;

use num_traits::{One, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::expr::{check_chart, fmt_rational, Chart, ExprError, Point, Rational};
use crate::exterior::{Form, VectorField};
use crate::pointwise::{
    constrained_orthogonal, constrained_orthogonal_joint, form_kernel, linalg, AlternatingTensor,
    PointStructure, Subspace,
};

pub use grid::{GridProvenance, SampleGrid};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StructureError {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("form `{form}` must have degree {expected}, found {got}")]
    BadDegree { form: String, expected: String, got: usize },
    #[error("{0}")]
    FormCount(String),
    #[error("{0} structures have no Reeb fields")]
    NotReebKind(String),
    #[error("the Reeb system is inconsistent at {point}")]
    NoReebAtPoint { point: String },
    #[error("frame is dependent at grid point {index} {point}")]
    DependentFrame { index: usize, point: String },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
}

/// Structure kind, with `k` for the k-kinds and the form degree for the multisymplectic kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Kind {
    PreSymplectic,
    PreCosymplectic,
    PreContact,
    PreCocontact,
    KPreSymplectic(usize),
    KPreCosymplectic(usize),
    KPreContact(usize),
    PreMultisymplectic(usize),
}

impl Kind {
    /// File-format name of the degenerate kind, e.g. `kpresymplectic(2)`.
    pub fn name(&self) -> String {
        match self {
            Kind::PreSymplectic => "presymplectic".into(),
            Kind::PreCosymplectic => "precosymplectic".into(),
            Kind::PreContact => "precontact".into(),
            Kind::PreCocontact => "precocontact".into(),
            Kind::KPreSymplectic(k) => format!("kpresymplectic({k})"),
            Kind::KPreCosymplectic(k) => format!("kprecosymplectic({k})"),
            Kind::KPreContact(k) => format!("kprecontact({k})"),
            Kind::PreMultisymplectic(_) => "premultisymplectic".into(),
        }
    }

    /// Name of the corresponding nondegenerate kind, e.g. `ksymplectic(2)`.
    pub fn nondegenerate_name(&self) -> String {
        match self {
            Kind::PreSymplectic => "symplectic".into(),
            Kind::PreCosymplectic => "cosymplectic".into(),
            Kind::PreContact => "contact".into(),
            Kind::PreCocontact => "cocontact".into(),
            Kind::KPreSymplectic(k) => format!("ksymplectic({k})"),
            Kind::KPreCosymplectic(k) => format!("kcosymplectic({k})"),
            Kind::KPreContact(k) => format!("kcontact({k})"),
            Kind::PreMultisymplectic(_) => "multisymplectic".into(),
        }
    }

    pub fn has_reeb(&self) -> bool {
        matches!(
            self,
            Kind::PreCosymplectic
                | Kind::PreContact
                | Kind::PreCocontact
                | Kind::KPreCosymplectic(_)
                | Kind::KPreContact(_)
        )
    }

    /// ℓ used for coisotropicity of the zero section of a thickening.
    pub fn default_ell(&self) -> usize {
        match self {
            Kind::KPreSymplectic(k) | Kind::KPreCosymplectic(k) | Kind::KPreContact(k) => *k,
            Kind::PreMultisymplectic(deg) => deg - 1,
            _ => 1,
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// Defining forms of each kind.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Structure {
    PreSymplectic { omega: Form },
    PreCosymplectic { eta: Form, omega: Form },
    PreContact { eta: Form },
    PreCocontact { xi: Form, eta: Form },
    KPreSymplectic { omegas: Vec<Form> },
    KPreCosymplectic { etas: Vec<Form>, omegas: Vec<Form> },
    KPreContact { etas: Vec<Form> },
    PreMultisymplectic { omega: Form },
}

/// A structure on a chart, with degrees and counts validated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeometrySpec {
    chart: Arc<Chart>,
    structure: Structure,
    /// `dη` for every contact-type 1-form, in `named_forms` order of the η's.
    detas: Vec<Form>,
}

fn need_degree(name: &str, f: &Form, deg: usize) -> Result<(), StructureError> {
    if f.degree() != deg {
        return Err(StructureError::BadDegree {
            form: name.into(),
            expected: deg.to_string(),
            got: f.degree(),
        });
    }
    Ok(())
}

fn indexed(name: &str, forms: &[Form]) -> Vec<(String, Form)> {
    forms
        .iter()
        .enumerate()
        .map(|(i, f)| (format!("{name}{}", i + 1), f.clone()))
        .collect()
}

impl GeometrySpec {
    pub fn new(chart: &Arc<Chart>, structure: Structure) -> Result<GeometrySpec, StructureError> {
        let mut spec = GeometrySpec {
            chart: chart.clone(),
            structure,
            detas: Vec::new(),
        };
        for (name, f) in spec.named_forms() {
            check_chart(chart, f.chart())?;
            let _ = name;
        }
        match &spec.structure {
            Structure::PreSymplectic { omega } => need_degree("omega", omega, 2)?,
            Structure::PreCosymplectic { eta, omega } => {
                need_degree("eta", eta, 1)?;
                need_degree("omega", omega, 2)?;
            }
            Structure::PreContact { eta } => need_degree("eta", eta, 1)?,
            Structure::PreCocontact { xi, eta } => {
                need_degree("xi", xi, 1)?;
                need_degree("eta", eta, 1)?;
            }
            Structure::KPreSymplectic { omegas } => {
                if omegas.is_empty() {
                    return Err(StructureError::FormCount("k must be at least 1".into()));
                }
                for (n, f) in indexed("omega", omegas) {
                    need_degree(&n, &f, 2)?;
                }
            }
            Structure::KPreCosymplectic { etas, omegas } => {
                if omegas.is_empty() || etas.len() != omegas.len() {
                    return Err(StructureError::FormCount(format!(
                        "need k ≥ 1 forms eta_i and omega_j alike, got {} and {}",
                        etas.len(),
                        omegas.len()
                    )));
                }
                for (n, f) in indexed("eta", etas) {
                    need_degree(&n, &f, 1)?;
                }
                for (n, f) in indexed("omega", omegas) {
                    need_degree(&n, &f, 2)?;
                }
            }
            Structure::KPreContact { etas } => {
                if etas.is_empty() {
                    return Err(StructureError::FormCount("k must be at least 1".into()));
                }
                for (n, f) in indexed("eta", etas) {
                    need_degree(&n, &f, 1)?;
                }
            }
            Structure::PreMultisymplectic { omega } => {
                if omega.degree() < 2 {
                    return Err(StructureError::BadDegree {
                        form: "omega".into(),
                        expected: "at least 2".into(),
                        got: omega.degree(),
                    });
                }
            }
        }
        spec.detas = match &spec.structure {
            Structure::PreContact { eta } | Structure::PreCocontact { eta, .. } => vec![eta.d()],
            Structure::KPreContact { etas } => etas.iter().map(Form::d).collect(),
            _ => Vec::new(),
        };
        Ok(spec)
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn structure(&self) -> &Structure {
        &self.structure
    }

    pub fn kind(&self) -> Kind {
        match &self.structure {
            Structure::PreSymplectic { .. } => Kind::PreSymplectic,
            Structure::PreCosymplectic { .. } => Kind::PreCosymplectic,
            Structure::PreContact { .. } => Kind::PreContact,
            Structure::PreCocontact { .. } => Kind::PreCocontact,
            Structure::KPreSymplectic { omegas } => Kind::KPreSymplectic(omegas.len()),
            Structure::KPreCosymplectic { omegas, .. } => Kind::KPreCosymplectic(omegas.len()),
            Structure::KPreContact { etas } => Kind::KPreContact(etas.len()),
            Structure::PreMultisymplectic { omega } => Kind::PreMultisymplectic(omega.degree()),
        }
    }

    /// Defining forms with their file-format names.
    pub fn named_forms(&self) -> Vec<(String, Form)> {
        match &self.structure {
            Structure::PreSymplectic { omega } | Structure::PreMultisymplectic { omega } => {
                vec![("omega".into(), omega.clone())]
            }
            Structure::PreCosymplectic { eta, omega } => {
                vec![("eta".into(), eta.clone()), ("omega".into(), omega.clone())]
            }
            Structure::PreContact { eta } => vec![("eta".into(), eta.clone())],
            Structure::PreCocontact { xi, eta } => {
                vec![("xi".into(), xi.clone()), ("eta".into(), eta.clone())]
            }
            Structure::KPreSymplectic { omegas } => indexed("omega", omegas),
            Structure::KPreCosymplectic { etas, omegas } => {
                let mut v = indexed("eta", etas);
                v.extend(indexed("omega", omegas));
                v
            }
            Structure::KPreContact { etas } => indexed("eta", etas),
        }
    }

    /// Forms the kind requires to be closed.
    pub fn closed_forms(&self) -> Vec<(String, Form)> {
        match &self.structure {
            Structure::PreContact { .. } | Structure::KPreContact { .. } => Vec::new(),
            Structure::PreCocontact { xi, .. } => vec![("xi".into(), xi.clone())],
            _ => self.named_forms(),
        }
    }

    /// Evaluates the defining tensors at raw coordinates.
    pub fn at(&self, x: &[Rational]) -> PointStructure {
        let ev = |f: &Form| f.eval_at(x);
        match &self.structure {
            Structure::PreSymplectic { omega } => PointStructure::Symplectic { omega: ev(omega) },
            Structure::PreCosymplectic { eta, omega } => PointStructure::Cosymplectic {
                eta: ev(eta),
                omega: ev(omega),
            },
            Structure::PreContact { eta } => PointStructure::Contact {
                eta: ev(eta),
                deta: ev(&self.detas[0]),
            },
            Structure::PreCocontact { xi, eta } => PointStructure::Cocontact {
                xi: ev(xi),
                eta: ev(eta),
                deta: ev(&self.detas[0]),
            },
            Structure::KPreSymplectic { omegas } => PointStructure::KSymplectic {
                omegas: omegas.iter().map(ev).collect(),
            },
            Structure::KPreCosymplectic { etas, omegas } => PointStructure::KCosymplectic {
                etas: etas.iter().map(ev).collect(),
                omegas: omegas.iter().map(ev).collect(),
            },
            Structure::KPreContact { etas } => PointStructure::KContact {
                etas: etas.iter().map(ev).collect(),
                detas: self.detas.iter().map(ev).collect(),
            },
            Structure::PreMultisymplectic { omega } => PointStructure::Multisymplectic { omega: ev(omega) },
        }
    }

    /// Characteristic distribution at raw coordinates.
    pub fn characteristic_at(&self, x: &[Rational]) -> Subspace {
        characteristic_of(&self.at(x), self.chart.dim())
    }

    /// Pointwise nondegeneracy of the corresponding nondegenerate kind.
    pub fn nondegenerate_at(&self, x: &[Rational]) -> bool {
        let n = self.chart.dim();
        let ps = self.at(x);
        match &ps {
            PointStructure::Symplectic { omega } | PointStructure::Multisymplectic { omega } => {
                form_kernel(omega).expect("degree ≥ 1").dim() == 0
            }
            PointStructure::Cosymplectic { eta, omega } => {
                n % 2 == 1 && !eta.wedge(&omega.wedge_power(n / 2)).expect("same dim").is_zero()
            }
            PointStructure::Contact { eta, deta } => {
                n % 2 == 1 && !eta.wedge(&deta.wedge_power(n / 2)).expect("same dim").is_zero()
            }
            PointStructure::Cocontact { xi, eta, deta } => {
                n.is_multiple_of(2)
                    && n >= 2
                    && !xi
                        .wedge(eta)
                        .and_then(|a| a.wedge(&deta.wedge_power((n - 2) / 2)))
                        .expect("same dim")
                        .is_zero()
            }
            PointStructure::KSymplectic { .. } => characteristic_of(&ps, n).dim() == 0,
            PointStructure::KCosymplectic { etas, .. } | PointStructure::KContact { etas, .. } => {
                let refs: Vec<&AlternatingTensor> = etas.iter().collect();
                !wedge_all(&refs).is_zero() && characteristic_of(&ps, n).dim() == 0
            }
        }
    }
}

fn kernel_rows(tensors: &[&AlternatingTensor]) -> Vec<Vec<Rational>> {
    tensors.iter().flat_map(|t| t.flat_rows()).collect()
}

/// Characteristic distribution of the defining tensors at one point.
pub fn characteristic_of(ps: &PointStructure, n: usize) -> Subspace {
    match ps {
        PointStructure::Symplectic { omega } | PointStructure::Multisymplectic { omega } => {
            Subspace::kernel_of(&omega.flat_rows(), n)
        }
        PointStructure::Cosymplectic { eta, omega } => Subspace::kernel_of(&kernel_rows(&[eta, omega]), n),
        PointStructure::Contact { eta, deta } => {
            let ker_eta = Subspace::kernel_of(&eta.flat_rows(), n);
            constrained_orthogonal(&ker_eta, deta, &[eta.as_covector()]).expect("dimensions agree")
        }
        PointStructure::Cocontact { xi, eta, deta } => {
            Subspace::kernel_of(&kernel_rows(&[xi, eta, deta]), n)
        }
        PointStructure::KSymplectic { omegas } => {
            Subspace::kernel_of(&kernel_rows(&omegas.iter().collect::<Vec<_>>()), n)
        }
        PointStructure::KCosymplectic { etas, omegas } => {
            let all: Vec<&AlternatingTensor> = etas.iter().chain(omegas).collect();
            Subspace::kernel_of(&kernel_rows(&all), n)
        }
        PointStructure::KContact { etas, detas } => {
            let d = Subspace::kernel_of(&kernel_rows(&etas.iter().collect::<Vec<_>>()), n);
            let cons: Vec<Vec<Rational>> = etas.iter().map(AlternatingTensor::as_covector).collect();
            constrained_orthogonal_joint(&d, detas, &cons).expect("dimensions agree")
        }
    }
}

/// Characteristic distribution of `spec` at `pt`.
pub fn characteristic_distribution(spec: &GeometrySpec, pt: &Point) -> Result<Subspace, StructureError> {
    check_chart(spec.chart(), pt.chart())?;
    Ok(spec.characteristic_at(pt.coords()))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClosednessVerdict {
    pub form: String,
    pub closed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankEntry {
    pub point: usize,
    pub char_dim: usize,
    /// Rank of `X ↦ i_X F` for each defining form `F` (and `dη` for contact types).
    pub ranks: Vec<(String, usize)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AxiomVerdict {
    pub name: String,
    pub pass: bool,
    pub failing_points: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructureReport {
    pub closedness: Vec<ClosednessVerdict>,
    pub rank_profile: Vec<RankEntry>,
    /// Constant over the supplied grid only.
    pub constant_rank: bool,
    pub degenerate_points: Vec<usize>,
    pub axioms: Vec<AxiomVerdict>,
}

impl StructureReport {
    pub fn pass(&self) -> bool {
        self.closedness.iter().all(|c| c.closed) && self.constant_rank && self.axioms.iter().all(|a| a.pass)
    }
}

fn rank_profile_at(spec: &GeometrySpec, x: &[Rational], index: usize) -> RankEntry {
    let mut ranks: Vec<(String, usize)> = spec
        .named_forms()
        .iter()
        .map(|(n, f)| (n.clone(), f.eval_at(x).flat_rank()))
        .collect();
    let deta_names: Vec<String> = match spec.structure() {
        Structure::PreContact { .. } | Structure::PreCocontact { .. } => vec!["d(eta)".into()],
        Structure::KPreContact { etas } => (1..=etas.len()).map(|i| format!("d(eta{i})")).collect(),
        _ => Vec::new(),
    };
    for (name, f) in deta_names.into_iter().zip(&spec.detas) {
        ranks.push((name, f.eval_at(x).flat_rank()));
    }
    RankEntry {
        point: index,
        char_dim: spec.characteristic_at(x).dim(),
        ranks,
    }
}

fn wedge_all(ts: &[&AlternatingTensor]) -> AlternatingTensor {
    let n = ts[0].dim();
    ts.iter().fold(
        AlternatingTensor::from_entries(n, 0, [(Vec::new(), Rational::one())]).expect("scalar"),
        |acc, t| acc.wedge(t).expect("same dimension"),
    )
}

/// Per-kind axiom checks at one point; returns `(name, pass)` pairs.
fn axioms_at(spec: &GeometrySpec, x: &[Rational], char_dim: usize) -> Vec<(&'static str, bool)> {
    let n = spec.chart().dim();
    let ps = spec.at(x);
    let reeb_ok = || reeb_system(spec, x).iter().all(|(_, a, b)| linalg::solve_affine(a, b, n).is_some());
    match &ps {
        PointStructure::Symplectic { .. } => Vec::new(),
        PointStructure::Cosymplectic { eta, omega } => {
            let r = omega.flat_rank() / 2;
            vec![
                ("eta_nonvanishing", !eta.is_zero()),
                ("eta_wedge_omega_power_nonzero", !eta.wedge(&omega.wedge_power(r)).expect("dim").is_zero()),
            ]
        }
        PointStructure::Contact { eta, deta } => {
            let r = deta.flat_rank() / 2;
            vec![
                ("eta_nonvanishing", !eta.is_zero()),
                ("eta_wedge_deta_power_nonzero", !eta.wedge(&deta.wedge_power(r)).expect("dim").is_zero()),
            ]
        }
        PointStructure::Cocontact { xi, eta, deta } => {
            let corank = n - char_dim;
            let volume = corank >= 2 && (corank - 2).is_multiple_of(2) && {
                let r = (corank - 2) / 2;
                !wedge_all(&[xi, eta, &deta.wedge_power(r)]).is_zero()
            };
            vec![
                ("xi_wedge_eta_nonzero", !xi.wedge(eta).expect("dim").is_zero()),
                ("cocontact_volume_nonzero", volume),
            ]
        }
        PointStructure::KSymplectic { .. } => Vec::new(),
        PointStructure::KCosymplectic { etas, .. } | PointStructure::KContact { etas, .. } => {
            let refs: Vec<&AlternatingTensor> = etas.iter().collect();
            vec![
                ("etas_independent", !wedge_all(&refs).is_zero()),
                ("reeb_solvable", reeb_ok()),
            ]
        }
        PointStructure::Multisymplectic { omega } => vec![("omega_nonzero", !omega.is_zero())],
    }
}

/// Checks closedness symbolically and ranks and axioms at every grid point.
pub fn validate(spec: &GeometrySpec, grid: &SampleGrid) -> Result<StructureReport, StructureError> {
    if grid.is_empty() {
        return Err(StructureError::InvalidGrid("grid has no points".into()));
    }
    check_chart(spec.chart(), grid.chart())?;
    let closedness = spec
        .closed_forms()
        .into_iter()
        .map(|(form, f)| ClosednessVerdict {
            form,
            closed: f.d().is_zero(),
        })
        .collect();
    let per_point: Vec<(RankEntry, Vec<(&'static str, bool)>)> = grid
        .points()
        .par_iter()
        .enumerate()
        .map(|(i, x)| {
            let entry = rank_profile_at(spec, x, i);
            let ax = axioms_at(spec, x, entry.char_dim);
            (entry, ax)
        })
        .collect();
    let first = &per_point[0].0;
    let constant_rank = per_point
        .iter()
        .all(|(e, _)| e.char_dim == first.char_dim && e.ranks == first.ranks);
    let max_ranks: Vec<usize> = (0..first.ranks.len())
        .map(|k| per_point.iter().map(|(e, _)| e.ranks[k].1).max().unwrap_or(0))
        .collect();
    let min_char = per_point.iter().map(|(e, _)| e.char_dim).min().unwrap_or(0);
    let degenerate_points = per_point
        .iter()
        .filter(|(e, _)| e.char_dim > min_char || e.ranks.iter().zip(&max_ranks).any(|((_, r), m)| r < m))
        .map(|(e, _)| e.point)
        .collect();
    let mut axioms: Vec<AxiomVerdict> = Vec::new();
    for (i, (_, ax)) in per_point.iter().enumerate() {
        for (name, ok) in ax {
            let slot = match axioms.iter().position(|a| a.name == *name) {
                Some(p) => p,
                None => {
                    axioms.push(AxiomVerdict {
                        name: name.to_string(),
                        pass: true,
                        failing_points: Vec::new(),
                    });
                    axioms.len() - 1
                }
            };
            if !ok {
                axioms[slot].pass = false;
                axioms[slot].failing_points.push(i);
            }
        }
    }
    Ok(StructureReport {
        closedness,
        rank_profile: per_point.into_iter().map(|(e, _)| e).collect(),
        constant_rank,
        degenerate_points,
        axioms,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvolutivityCounterexample {
    pub point: usize,
    pub i: usize,
    pub j: usize,
    pub bracket: Vec<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvolutivityReport {
    pub involutive: bool,
    pub counterexample: Option<InvolutivityCounterexample>,
}

/// Checks that every bracket of frame fields lies in the frame's span at every grid point.
pub fn involutivity_check(frame: &[VectorField], grid: &SampleGrid) -> Result<InvolutivityReport, StructureError> {
    let m = frame.len();
    let n = grid.chart().dim();
    for x in frame {
        check_chart(grid.chart(), x.chart())?;
    }
    let mut brackets = Vec::new();
    for i in 0..m {
        for j in i + 1..m {
            brackets.push((i, j, frame[i].lie_bracket(&frame[j])?));
        }
    }
    let results: Vec<Result<Option<InvolutivityCounterexample>, usize>> = grid
        .points()
        .par_iter()
        .enumerate()
        .map(|(p, x)| {
            let vecs: Vec<Vec<Rational>> = frame.iter().map(|f| f.eval_at(x)).collect();
            if linalg::rank(&vecs, n) != m {
                return Err(p);
            }
            let span = Subspace::new(n, vecs).expect("independent");
            for (i, j, b) in &brackets {
                let v = b.eval_at(x);
                if !span.contains(&v) {
                    return Ok(Some(InvolutivityCounterexample { point: p, i: *i, j: *j, bracket: v }));
                }
            }
            Ok(None)
        })
        .collect();
    for r in results {
        match r {
            Err(p) => {
                return Err(StructureError::DependentFrame {
                    index: p,
                    point: fmt_coords(&grid.points()[p]),
                })
            }
            Ok(Some(c)) => {
                return Ok(InvolutivityReport {
                    involutive: false,
                    counterexample: Some(c),
                })
            }
            Ok(None) => {}
        }
    }
    Ok(InvolutivityReport {
        involutive: true,
        counterexample: None,
    })
}

pub(crate) fn fmt_coords(x: &[Rational]) -> String {
    format!("({})", x.iter().map(fmt_rational).collect::<Vec<_>>().join(", "))
}

/// An affine solution set `particular + span(kernel)` of a Reeb system.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReebFamily {
    pub label: String,
    pub particular: Vec<Rational>,
    pub kernel: Vec<Vec<Rational>>,
}

impl ReebFamily {
    pub fn contains(&self, v: &[Rational]) -> bool {
        let diff: Vec<Rational> = v.iter().zip(&self.particular).map(|(a, b)| a - b).collect();
        Subspace::span(v.len(), &self.kernel).contains(&diff)
    }
}

fn unit_rows(ones: &[&AlternatingTensor], target: usize) -> (Vec<Vec<Rational>>, Vec<Rational>) {
    let rows = ones.iter().map(|t| t.as_covector()).collect();
    let rhs = (0..ones.len())
        .map(|i| if i == target { Rational::one() } else { Rational::zero() })
        .collect();
    (rows, rhs)
}

/// Linear systems `(label, A, b)` whose solutions are the Reeb fields at `x`.
fn reeb_system(spec: &GeometrySpec, x: &[Rational]) -> Vec<(String, Vec<Vec<Rational>>, Vec<Rational>)> {
    let ps = spec.at(x);
    let build = |label: String, two_forms: &[&AlternatingTensor], ones: &[&AlternatingTensor], target: usize| {
        let (mut rows, mut rhs) = unit_rows(ones, target);
        for f in two_forms {
            let fr = f.flat_rows();
            rhs.extend(std::iter::repeat_n(Rational::zero(), fr.len()));
            rows.extend(fr);
        }
        (label, rows, rhs)
    };
    match &ps {
        PointStructure::Cosymplectic { eta, omega } => vec![build("R".into(), &[omega], &[eta], 0)],
        PointStructure::Contact { eta, deta } => vec![build("R".into(), &[deta], &[eta], 0)],
        PointStructure::Cocontact { xi, eta, deta } => vec![
            build("R_xi".into(), &[deta], &[xi, eta], 0),
            build("R_eta".into(), &[deta], &[xi, eta], 1),
        ],
        PointStructure::KCosymplectic { etas, omegas } => {
            let two: Vec<&AlternatingTensor> = omegas.iter().collect();
            let ones: Vec<&AlternatingTensor> = etas.iter().collect();
            (0..etas.len()).map(|i| build(format!("R{}", i + 1), &two, &ones, i)).collect()
        }
        PointStructure::KContact { etas, detas } => {
            let two: Vec<&AlternatingTensor> = detas.iter().collect();
            let ones: Vec<&AlternatingTensor> = etas.iter().collect();
            (0..etas.len()).map(|i| build(format!("R{}", i + 1), &two, &ones, i)).collect()
        }
        _ => Vec::new(),
    }
}

/// Reeb families at `pt`: one for the cosymplectic and contact kinds, `(R_ξ, R_η)`
/// for cocontact, `k` for the k-kinds.
pub fn reeb_solve(spec: &GeometrySpec, pt: &Point) -> Result<Vec<ReebFamily>, StructureError> {
    check_chart(spec.chart(), pt.chart())?;
    reeb_solve_at(spec, pt.coords())
}

pub fn reeb_solve_at(spec: &GeometrySpec, x: &[Rational]) -> Result<Vec<ReebFamily>, StructureError> {
    if !spec.kind().has_reeb() {
        return Err(StructureError::NotReebKind(spec.kind().name()));
    }
    let n = spec.chart().dim();
    reeb_system(spec, x)
        .into_iter()
        .map(|(label, a, b)| match linalg::solve_affine(&a, &b, n) {
            Some((particular, kernel)) => Ok(ReebFamily { label, particular, kernel }),
            None => Err(StructureError::NoReebAtPoint { point: fmt_coords(x) }),
        })
        .collect()
}

#[cfg(test)]
mod tests;
