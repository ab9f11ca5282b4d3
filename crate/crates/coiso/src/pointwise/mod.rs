//! Exact linear algebra on a single tangent space: alternating tensors,
//! subspaces, kernels, orthogonals and coisotropicity.

pub mod linalg;

use std::collections::BTreeMap;

use itertools::Itertools;
use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::expr::Rational;
use crate::exterior::sort_with_sign;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PointwiseError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("degree {degree} not allowed here: {reason}")]
    BadDegree { degree: usize, reason: String },
    #[error("basis vectors are linearly dependent")]
    DependentBasis,
}

/// An alternating multilinear form on `ℚ^n` stored on strictly increasing tuples.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlternatingTensor {
    n: usize,
    k: usize,
    values: BTreeMap<Vec<usize>, Rational>,
}

impl AlternatingTensor {
    pub fn zero(n: usize, k: usize) -> Self {
        AlternatingTensor {
            n,
            k,
            values: BTreeMap::new(),
        }
    }

    /// Entries must already be keyed by strictly increasing tuples.
    pub(crate) fn from_sorted<I: IntoIterator<Item = (Vec<usize>, Rational)>>(n: usize, k: usize, it: I) -> Self {
        AlternatingTensor {
            n,
            k,
            values: it.into_iter().filter(|(_, v)| !v.is_zero()).collect(),
        }
    }

    /// Builds from arbitrary tuples, applying the permutation sign.
    pub fn from_entries<I: IntoIterator<Item = (Vec<usize>, Rational)>>(
        n: usize,
        k: usize,
        it: I,
    ) -> Result<Self, PointwiseError> {
        let mut t = AlternatingTensor::zero(n, k);
        for (idx, v) in it {
            if idx.len() != k {
                return Err(PointwiseError::DimensionMismatch { expected: k, got: idx.len() });
            }
            if let Some(&i) = idx.iter().find(|&&i| i >= n) {
                return Err(PointwiseError::DimensionMismatch { expected: n, got: i + 1 });
            }
            if let Some((sorted, sign)) = sort_with_sign(&idx) {
                t.add(sorted, if sign < 0 { -v } else { v });
            }
        }
        Ok(t)
    }

    /// A covector from its components.
    pub fn covector(values: &[Rational]) -> Self {
        AlternatingTensor::from_sorted(
            values.len(),
            1,
            values.iter().enumerate().map(|(i, v)| (vec![i], v.clone())),
        )
    }

    fn add(&mut self, idx: Vec<usize>, v: Rational) {
        if v.is_zero() {
            return;
        }
        match self.values.entry(idx) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(v);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += v;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.k
    }

    pub fn values(&self) -> &BTreeMap<Vec<usize>, Rational> {
        &self.values
    }

    pub fn is_zero(&self) -> bool {
        self.values.is_empty()
    }

    /// Value on the basis tuple `idx` (any order).
    pub fn get(&self, idx: &[usize]) -> Rational {
        match sort_with_sign(idx) {
            Some((sorted, sign)) => {
                let v = self.values.get(&sorted).cloned().unwrap_or_else(Rational::zero);
                if sign < 0 {
                    -v
                } else {
                    v
                }
            }
            None => Rational::zero(),
        }
    }

    /// Components of a degree-1 tensor.
    pub fn as_covector(&self) -> Vec<Rational> {
        (0..self.n).map(|i| self.get(&[i])).collect()
    }

    /// `i_v Ω`.
    pub fn contract(&self, v: &[Rational]) -> Result<Self, PointwiseError> {
        if self.k == 0 {
            return Err(PointwiseError::BadDegree {
                degree: 0,
                reason: "contraction of a scalar".into(),
            });
        }
        if v.len() != self.n {
            return Err(PointwiseError::DimensionMismatch { expected: self.n, got: v.len() });
        }
        let mut out = AlternatingTensor::zero(self.n, self.k - 1);
        for (idx, c) in &self.values {
            for (p, &i) in idx.iter().enumerate() {
                if v[i].is_zero() {
                    continue;
                }
                let mut rest = idx.clone();
                rest.remove(p);
                let t = c * &v[i];
                out.add(rest, if p % 2 == 1 { -t } else { t });
            }
        }
        Ok(out)
    }

    pub fn wedge(&self, other: &Self) -> Result<Self, PointwiseError> {
        if self.n != other.n {
            return Err(PointwiseError::DimensionMismatch { expected: self.n, got: other.n });
        }
        let mut out = AlternatingTensor::zero(self.n, self.k + other.k);
        for (i, a) in &self.values {
            for (j, b) in &other.values {
                let mut idx = i.clone();
                idx.extend_from_slice(j);
                if let Some((sorted, sign)) = sort_with_sign(&idx) {
                    let t = a * b;
                    out.add(sorted, if sign < 0 { -t } else { t });
                }
            }
        }
        Ok(out)
    }

    pub fn wedge_power(&self, m: usize) -> Self {
        let mut out = AlternatingTensor::from_sorted(self.n, 0, [(Vec::new(), Rational::from_integer(1.into()))]);
        for _ in 0..m {
            out = out.wedge(self).expect("same dimension");
        }
        out
    }

    /// `Ω(v_1, …, v_k)` by successive contraction.
    pub fn eval(&self, vectors: &[Vec<Rational>]) -> Result<Rational, PointwiseError> {
        if vectors.len() != self.k {
            return Err(PointwiseError::DimensionMismatch { expected: self.k, got: vectors.len() });
        }
        let mut t = self.clone();
        for v in vectors {
            t = t.contract(v)?;
        }
        Ok(t.get(&[]))
    }

    /// Matrix of `X ↦ i_X Ω`: one row per nonzero `(k−1)`-tuple, one column per coordinate.
    pub fn flat_rows(&self) -> Vec<Vec<Rational>> {
        if self.k == 0 {
            return Vec::new();
        }
        let mut rows: BTreeMap<Vec<usize>, Vec<Rational>> = BTreeMap::new();
        for (idx, c) in &self.values {
            for (p, &i) in idx.iter().enumerate() {
                let mut rest = idx.clone();
                rest.remove(p);
                let row = rows
                    .entry(rest)
                    .or_insert_with(|| vec![Rational::zero(); self.n]);
                row[i] += if p % 2 == 1 { -c.clone() } else { c.clone() };
            }
        }
        rows.into_values().collect()
    }

    /// Rank of the flat map `X ↦ i_X Ω`.
    pub fn flat_rank(&self) -> usize {
        linalg::rank(&self.flat_rows(), self.n)
    }
}

/// A linear subspace of `ℚ^n` with an independent basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subspace {
    n: usize,
    basis: Vec<Vec<Rational>>,
}

impl Subspace {
    pub fn new(n: usize, basis: Vec<Vec<Rational>>) -> Result<Subspace, PointwiseError> {
        if let Some(v) = basis.iter().find(|v| v.len() != n) {
            return Err(PointwiseError::DimensionMismatch { expected: n, got: v.len() });
        }
        if linalg::rank(&basis, n) != basis.len() {
            return Err(PointwiseError::DependentBasis);
        }
        Ok(Subspace { n, basis })
    }

    /// Span of arbitrary vectors, keeping the first independent ones.
    pub fn span(n: usize, vectors: &[Vec<Rational>]) -> Subspace {
        let mut basis: Vec<Vec<Rational>> = Vec::new();
        for v in vectors {
            debug_assert_eq!(v.len(), n);
            let mut trial = basis.clone();
            trial.push(v.clone());
            if linalg::rank(&trial, n) == trial.len() {
                basis = trial;
            }
        }
        Subspace { n, basis }
    }

    pub fn zero(n: usize) -> Subspace {
        Subspace { n, basis: Vec::new() }
    }

    pub fn full(n: usize) -> Subspace {
        Subspace::coordinate(n, &(0..n).collect::<Vec<_>>())
    }

    /// Span of the coordinate vectors `e_i`, `i ∈ idx`.
    pub fn coordinate(n: usize, idx: &[usize]) -> Subspace {
        let basis = idx
            .iter()
            .map(|&i| {
                let mut v = vec![Rational::zero(); n];
                v[i] = Rational::from_integer(1.into());
                v
            })
            .collect();
        Subspace { n, basis }
    }

    /// Null space of a matrix with `n` columns.
    pub fn kernel_of(rows: &[Vec<Rational>], n: usize) -> Subspace {
        Subspace {
            n,
            basis: linalg::null_space(rows, n),
        }
    }

    pub fn ambient(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<Rational>] {
        &self.basis
    }

    pub fn contains(&self, v: &[Rational]) -> bool {
        if v.iter().all(Zero::is_zero) {
            return true;
        }
        let mut rows = self.basis.clone();
        rows.push(v.to_vec());
        linalg::rank(&rows, self.n) == self.basis.len()
    }

    pub fn contains_subspace(&self, other: &Subspace) -> bool {
        other.basis.iter().all(|v| self.contains(v))
    }

    /// First basis vector of `other` not in `self`.
    pub fn first_outside(&self, other: &Subspace) -> Option<Vec<Rational>> {
        other.basis.iter().find(|v| !self.contains(v)).cloned()
    }

    pub fn same_as(&self, other: &Subspace) -> bool {
        self.n == other.n && self.dim() == other.dim() && self.contains_subspace(other)
    }

    /// Covectors vanishing on the subspace.
    pub fn annihilator(&self) -> Vec<Vec<Rational>> {
        linalg::null_space(&self.basis, self.n)
    }

    pub fn intersect(&self, other: &Subspace) -> Subspace {
        let mut rows = self.annihilator();
        rows.extend(other.annihilator());
        Subspace::kernel_of(&rows, self.n)
    }
}

/// Kernel `{X : i_X Ω = 0}` of a form of degree ≥ 1.
pub fn form_kernel(omega: &AlternatingTensor) -> Result<Subspace, PointwiseError> {
    if omega.degree() == 0 {
        return Err(PointwiseError::BadDegree {
            degree: 0,
            reason: "kernel of a scalar".into(),
        });
    }
    Ok(Subspace::kernel_of(&omega.flat_rows(), omega.dim()))
}

/// Rows `X ↦ Ω(X, w)` for each basis vector `w` of `W`.
fn pairing_rows(w: &Subspace, omega: &AlternatingTensor) -> Result<Vec<Vec<Rational>>, PointwiseError> {
    if omega.degree() != 2 {
        return Err(PointwiseError::BadDegree {
            degree: omega.degree(),
            reason: "expected a 2-form".into(),
        });
    }
    if omega.dim() != w.ambient() {
        return Err(PointwiseError::DimensionMismatch { expected: w.ambient(), got: omega.dim() });
    }
    w.basis()
        .iter()
        .map(|v| {
            // Ω(X, v) = −(i_v Ω)(X)
            let c = omega.contract(v)?;
            Ok(c.as_covector().into_iter().map(|x| -x).collect())
        })
        .collect()
}

fn check_constraints(n: usize, constraints: &[Vec<Rational>]) -> Result<(), PointwiseError> {
    match constraints.iter().find(|c| c.len() != n) {
        Some(c) => Err(PointwiseError::DimensionMismatch { expected: n, got: c.len() }),
        None => Ok(()),
    }
}

/// `{X : c(X) = 0 ∀ c ∈ constraints, Ω(X, Y) = 0 ∀ Y ∈ W}`.
pub fn constrained_orthogonal(
    w: &Subspace,
    two_form: &AlternatingTensor,
    constraints: &[Vec<Rational>],
) -> Result<Subspace, PointwiseError> {
    constrained_orthogonal_joint(w, std::slice::from_ref(two_form), constraints)
}

/// Joint version over several 2-forms.
pub fn constrained_orthogonal_joint(
    w: &Subspace,
    two_forms: &[AlternatingTensor],
    constraints: &[Vec<Rational>],
) -> Result<Subspace, PointwiseError> {
    let n = w.ambient();
    check_constraints(n, constraints)?;
    let mut rows: Vec<Vec<Rational>> = constraints.to_vec();
    for f in two_forms {
        rows.extend(pairing_rows(w, f)?);
    }
    Ok(Subspace::kernel_of(&rows, n))
}

/// `{X : (i_X Ω)(w_1, …, w_ℓ, ·, …) = 0 for all w_i ∈ W}` for `1 ≤ ℓ ≤ deg Ω − 1`.
pub fn multisymplectic_l_orthogonal(
    w: &Subspace,
    omega: &AlternatingTensor,
    ell: usize,
) -> Result<Subspace, PointwiseError> {
    let deg = omega.degree();
    if ell == 0 || ell + 1 > deg {
        return Err(PointwiseError::BadDegree {
            degree: deg,
            reason: format!("ℓ = {ell} must satisfy 1 ≤ ℓ ≤ degree − 1"),
        });
    }
    if omega.dim() != w.ambient() {
        return Err(PointwiseError::DimensionMismatch { expected: w.ambient(), got: omega.dim() });
    }
    // Ω(X, w_1, …, w_ℓ, ·) = ± (i_{w_ℓ} ⋯ i_{w_1} Ω)(X, ·); the sign does not change the kernel.
    let mut rows = Vec::new();
    for combo in w.basis().iter().combinations(ell) {
        let mut t = omega.clone();
        for v in combo {
            t = t.contract(v)?;
        }
        rows.extend(t.flat_rows());
    }
    Ok(Subspace::kernel_of(&rows, w.ambient()))
}

/// The defining tensors of one of the eight structure kinds at a point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PointStructure {
    Symplectic { omega: AlternatingTensor },
    Cosymplectic { eta: AlternatingTensor, omega: AlternatingTensor },
    Contact { eta: AlternatingTensor, deta: AlternatingTensor },
    Cocontact { xi: AlternatingTensor, eta: AlternatingTensor, deta: AlternatingTensor },
    KSymplectic { omegas: Vec<AlternatingTensor> },
    KCosymplectic { etas: Vec<AlternatingTensor>, omegas: Vec<AlternatingTensor> },
    KContact { etas: Vec<AlternatingTensor>, detas: Vec<AlternatingTensor> },
    Multisymplectic { omega: AlternatingTensor },
}

fn bad_ell(ell: usize, max: usize) -> PointwiseError {
    PointwiseError::BadDegree {
        degree: ell,
        reason: format!("ℓ must lie in 1..={max}"),
    }
}

impl PointStructure {
    /// The structure-appropriate ℓ-orthogonal of `W`.
    pub fn orthogonal(&self, w: &Subspace, ell: usize) -> Result<Subspace, PointwiseError> {
        let cov = |t: &AlternatingTensor| t.as_covector();
        match self {
            PointStructure::Symplectic { omega } => {
                if ell != 1 {
                    return Err(bad_ell(ell, 1));
                }
                constrained_orthogonal(w, omega, &[])
            }
            PointStructure::Cosymplectic { eta, omega } => {
                if ell != 1 {
                    return Err(bad_ell(ell, 1));
                }
                constrained_orthogonal(w, omega, &[cov(eta)])
            }
            PointStructure::Contact { eta, deta } => {
                if ell != 1 {
                    return Err(bad_ell(ell, 1));
                }
                constrained_orthogonal(w, deta, &[cov(eta)])
            }
            PointStructure::Cocontact { xi, eta, deta } => {
                if ell != 1 {
                    return Err(bad_ell(ell, 1));
                }
                constrained_orthogonal(w, deta, &[cov(xi), cov(eta)])
            }
            PointStructure::KSymplectic { omegas } => {
                if ell == 0 || ell > omegas.len() {
                    return Err(bad_ell(ell, omegas.len()));
                }
                constrained_orthogonal_joint(w, &omegas[..ell], &[])
            }
            PointStructure::KCosymplectic { etas, omegas } => {
                if ell == 0 || ell > omegas.len() {
                    return Err(bad_ell(ell, omegas.len()));
                }
                let cons: Vec<_> = etas[..ell].iter().map(cov).collect();
                constrained_orthogonal_joint(w, &omegas[..ell], &cons)
            }
            PointStructure::KContact { etas, detas } => {
                if ell == 0 || ell > etas.len() {
                    return Err(bad_ell(ell, etas.len()));
                }
                let cons: Vec<_> = etas[..ell].iter().map(cov).collect();
                constrained_orthogonal_joint(w, &detas[..ell], &cons)
            }
            PointStructure::Multisymplectic { omega } => multisymplectic_l_orthogonal(w, omega, ell),
        }
    }
}

/// Outcome of a coisotropicity test.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoisotropyVerdict {
    pub coisotropic: bool,
    pub orthogonal: Subspace,
    /// A vector of the orthogonal lying outside `W`, when not coisotropic.
    pub witness: Option<Vec<Rational>>,
}

/// True iff the ℓ-orthogonal of `W` lies inside `W`.
pub fn is_coisotropic(
    w: &Subspace,
    structure: &PointStructure,
    ell: usize,
) -> Result<CoisotropyVerdict, PointwiseError> {
    let orthogonal = structure.orthogonal(w, ell)?;
    let witness = w.first_outside(&orthogonal);
    Ok(CoisotropyVerdict {
        coisotropic: witness.is_none(),
        orthogonal,
        witness,
    })
}

/// Symplectic basis `(q_1..q_r, p_1..p_r, z_1..z_l)` of a 2-form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DarbouxBasis {
    pub basis: Vec<Vec<Rational>>,
    pub r: usize,
}

/// Symplectic Gram–Schmidt starting from the standard basis. The pivot pair is
/// the lexicographically smallest `(i, j)`, `i < j`, among entries of maximal
/// absolute value.
pub fn linear_darboux_basis(omega: &AlternatingTensor) -> Result<DarbouxBasis, PointwiseError> {
    if omega.degree() != 2 {
        return Err(PointwiseError::BadDegree {
            degree: omega.degree(),
            reason: "expected a 2-form".into(),
        });
    }
    let n = omega.dim();
    let pair = |a: &Vec<Rational>, b: &Vec<Rational>| -> Rational {
        omega.eval(&[a.clone(), b.clone()]).expect("degree 2")
    };
    let mut work: Vec<Vec<Rational>> = Subspace::full(n).basis().to_vec();
    let (mut qs, mut ps) = (Vec::new(), Vec::new());
    loop {
        let mut best: Option<(usize, usize, Rational)> = None;
        for i in 0..work.len() {
            for j in i + 1..work.len() {
                let v = pair(&work[i], &work[j]);
                if v.is_zero() {
                    continue;
                }
                if best.as_ref().is_none_or(|(_, _, b)| v.abs() > b.abs()) {
                    best = Some((i, j, v));
                }
            }
        }
        let Some((i, j, v)) = best else { break };
        let e = work[i].clone();
        let f: Vec<Rational> = work[j].iter().map(|x| x / &v).collect();
        work.remove(j);
        work.remove(i);
        for w in work.iter_mut() {
            let wf = pair(w, &f);
            let we = pair(w, &e);
            for k in 0..n {
                w[k] = &w[k] - &wf * &e[k] + &we * &f[k];
            }
        }
        qs.push(e);
        ps.push(f);
    }
    let r = qs.len();
    let mut basis = qs;
    basis.extend(ps);
    basis.extend(work);
    Ok(DarbouxBasis { basis, r })
}
