//! Labeled tensor-product spaces and dense complex operators on them.
//!
//! Factor order is significant: the first factor is the slowest-varying index
//! of the flattened basis. Code elsewhere in the crate addresses factors by
//! label, never by position.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use crate::linalg;
use crate::{Error, Result};

const HERMITIAN_TOL: f64 = 1e-12;
const STATE_NORM_TOL: f64 = 1e-12;
const RHO_HERMITIAN_TOL: f64 = 1e-10;
const RHO_TRACE_TOL: f64 = 1e-8;
const RHO_MIN_EIG: f64 = -1e-8;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Factor {
    pub label: String,
    pub dim: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TensorSpace {
    factors: Vec<Factor>,
}

impl TensorSpace {
    pub fn new<S: Into<String>>(factors: impl IntoIterator<Item = (S, usize)>) -> Result<Self> {
        let mut out: Vec<Factor> = Vec::new();
        for (label, dim) in factors {
            let label = label.into();
            if dim == 0 {
                return Err(Error::InvalidParameter(format!(
                    "factor `{label}` has dimension 0"
                )));
            }
            if out.iter().any(|f| f.label == label) {
                return Err(Error::DuplicateLabel(label));
            }
            out.push(Factor { label, dim });
        }
        if out.is_empty() {
            return Err(Error::InvalidParameter("tensor space needs a factor".into()));
        }
        Ok(Self { factors: out })
    }

    pub fn single(label: impl Into<String>, dim: usize) -> Result<Self> {
        Self::new([(label.into(), dim)])
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn dim(&self) -> usize {
        self.factors.iter().map(|f| f.dim).product()
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.factors.iter().map(|f| f.label.as_str())
    }

    pub fn contains(&self, label: &str) -> bool {
        self.factors.iter().any(|f| f.label == label)
    }

    pub fn position(&self, label: &str) -> Result<usize> {
        self.factors
            .iter()
            .position(|f| f.label == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn factor_dim(&self, label: &str) -> Result<usize> {
        Ok(self.factors[self.position(label)?].dim)
    }

    /// Concatenate factor lists (`self` first).
    pub fn concat(&self, other: &TensorSpace) -> Result<Self> {
        Self::new(
            self.factors
                .iter()
                .chain(other.factors.iter())
                .map(|f| (f.label.clone(), f.dim)),
        )
    }

    /// The subspace made of the named factors, in the order they appear here.
    pub fn subspace(&self, labels: &[&str]) -> Result<Self> {
        for l in labels {
            self.position(l)?;
        }
        Self::new(
            self.factors
                .iter()
                .filter(|f| labels.contains(&f.label.as_str()))
                .map(|f| (f.label.clone(), f.dim)),
        )
    }

    /// Row-major strides: stride of the last factor is 1.
    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.factors.len()];
        for k in (0..self.factors.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * self.factors[k + 1].dim;
        }
        strides
    }

    pub fn digits(&self, mut index: usize) -> Vec<usize> {
        let mut digits = vec![0; self.factors.len()];
        for k in (0..self.factors.len()).rev() {
            digits[k] = index % self.factors[k].dim;
            index /= self.factors[k].dim;
        }
        digits
    }

    pub fn index(&self, digits: &[usize]) -> usize {
        debug_assert_eq!(digits.len(), self.factors.len());
        digits
            .iter()
            .zip(&self.factors)
            .fold(0, |acc, (d, f)| acc * f.dim + d)
    }

    /// Flat index of a basis state given per-label digits; every factor must
    /// be named exactly once.
    pub fn basis_index(&self, assignment: &[(&str, usize)]) -> Result<usize> {
        let mut digits = vec![usize::MAX; self.factors.len()];
        for &(label, value) in assignment {
            let k = self.position(label)?;
            if value >= self.factors[k].dim {
                return Err(Error::DimensionMismatch {
                    expected: self.factors[k].dim,
                    found: value + 1,
                });
            }
            digits[k] = value;
        }
        if let Some(k) = digits.iter().position(|&d| d == usize::MAX) {
            return Err(Error::InvalidParameter(format!(
                "basis index misses factor `{}`",
                self.factors[k].label
            )));
        }
        Ok(self.index(&digits))
    }

    /// Offsets of the flat index split into the contribution of `labels`
    /// (first vector, indexed by the subspace index) and of the remaining
    /// factors (second vector). `full = a[sub] + b[rest]`.
    pub(crate) fn split_offsets(&self, labels: &[&str]) -> Result<(Vec<usize>, Vec<usize>)> {
        let strides = self.strides();
        let mut sel = Vec::new();
        let mut rest = Vec::new();
        for (k, f) in self.factors.iter().enumerate() {
            if labels.contains(&f.label.as_str()) {
                sel.push((f.dim, strides[k]));
            } else {
                rest.push((f.dim, strides[k]));
            }
        }
        if sel.len() != labels.len() {
            let missing = labels.iter().find(|l| !self.contains(l)).copied().unwrap_or("?");
            return Err(Error::UnknownLabel(missing.to_string()));
        }
        Ok((offsets(&sel), offsets(&rest)))
    }
}

fn offsets(parts: &[(usize, usize)]) -> Vec<usize> {
    let mut out = vec![0usize];
    for &(dim, stride) in parts {
        let mut next = Vec::with_capacity(out.len() * dim);
        for &base in &out {
            for d in 0..dim {
                next.push(base + d * stride);
            }
        }
        out = next;
    }
    out
}

impl fmt::Display for TensorSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .factors
            .iter()
            .map(|x| format!("{}[{}]", x.label, x.dim))
            .collect();
        write!(f, "{}", parts.join("⊗"))
    }
}

fn check_same(a: &TensorSpace, b: &TensorSpace) -> Result<()> {
    if a != b {
        return Err(Error::SpaceMismatch {
            left: a.to_string(),
            right: b.to_string(),
        });
    }
    Ok(())
}

pub(crate) fn adjoint_matrix(m: &Array2<C64>) -> Array2<C64> {
    m.t().mapv(|z| z.conj())
}

pub(crate) fn max_abs(m: &Array2<C64>) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// A dense operator on a labeled space.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    space: TensorSpace,
    mat: Array2<C64>,
}

impl Operator {
    pub fn new(space: TensorSpace, mat: Array2<C64>) -> Result<Self> {
        let d = space.dim();
        if mat.dim() != (d, d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: mat.nrows(),
            });
        }
        Ok(Self { space, mat })
    }

    pub fn identity(space: &TensorSpace) -> Self {
        Self {
            mat: Array2::eye(space.dim()),
            space: space.clone(),
        }
    }

    pub fn zeros(space: &TensorSpace) -> Self {
        let d = space.dim();
        Self {
            mat: Array2::zeros((d, d)),
            space: space.clone(),
        }
    }

    /// Build from a function of (row, column).
    pub fn from_fn(space: &TensorSpace, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let d = space.dim();
        Self {
            mat: Array2::from_shape_fn((d, d), |(i, j)| f(i, j)),
            space: space.clone(),
        }
    }

    /// |ket⟩⟨bra|
    pub fn outer(ket: &StateVector, bra: &StateVector) -> Result<Self> {
        check_same(&ket.space, &bra.space)?;
        let d = ket.space.dim();
        Ok(Self {
            mat: Array2::from_shape_fn((d, d), |(i, j)| ket.amps[i] * bra.amps[j].conj()),
            space: ket.space.clone(),
        })
    }

    pub fn space(&self) -> &TensorSpace {
        &self.space
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.mat
    }

    pub fn into_matrix(self) -> Array2<C64> {
        self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.mat[[row, col]]
    }

    pub fn adjoint(&self) -> Self {
        Self {
            mat: adjoint_matrix(&self.mat),
            space: self.space.clone(),
        }
    }

    pub fn scale(&self, c: C64) -> Self {
        Self {
            mat: &self.mat * c,
            space: self.space.clone(),
        }
    }

    pub fn compose(&self, rhs: &Operator) -> Result<Self> {
        check_same(&self.space, &rhs.space)?;
        Ok(Self {
            mat: self.mat.dot(&rhs.mat),
            space: self.space.clone(),
        })
    }

    pub fn try_add(&self, rhs: &Operator) -> Result<Self> {
        check_same(&self.space, &rhs.space)?;
        Ok(Self {
            mat: &self.mat + &rhs.mat,
            space: self.space.clone(),
        })
    }

    pub fn commutator(&self, rhs: &Operator) -> Result<Self> {
        let ab = self.compose(rhs)?;
        let ba = rhs.compose(self)?;
        Ok(Self {
            mat: ab.mat - ba.mat,
            space: self.space.clone(),
        })
    }

    pub fn trace(&self) -> C64 {
        self.mat.diag().sum()
    }

    pub fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        check_same(&self.space, &psi.space)?;
        Ok(StateVector {
            amps: self.mat.dot(&psi.amps),
            space: self.space.clone(),
        })
    }

    /// max |A − B| entrywise.
    pub fn max_abs_diff(&self, rhs: &Operator) -> Result<f64> {
        check_same(&self.space, &rhs.space)?;
        Ok(self
            .mat
            .iter()
            .zip(rhs.mat.iter())
            .fold(0.0, |acc, (a, b)| acc.max((a - b).norm())))
    }

    pub fn hermiticity_error(&self) -> f64 {
        let d = self.dim();
        let mut err: f64 = 0.0;
        for i in 0..d {
            for j in i..d {
                err = err.max((self.mat[[i, j]] - self.mat[[j, i]].conj()).norm());
            }
        }
        err
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermiticity_error() <= HERMITIAN_TOL
    }

    /// max |U U† − I|
    pub fn unitarity_error(&self) -> f64 {
        let prod = self.mat.dot(&adjoint_matrix(&self.mat));
        let d = self.dim();
        let mut err: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                let target = if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
                err = err.max((prod[[i, j]] - target).norm());
            }
        }
        err
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_error() <= tol
    }

    /// U ρ U†
    pub fn conjugate(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        check_same(&self.space, &rho.space)?;
        let mat = self.mat.dot(&rho.mat).dot(&adjoint_matrix(&self.mat));
        Ok(DensityMatrix {
            mat,
            space: self.space.clone(),
        })
    }
}

impl Mul for &Operator {
    type Output = Operator;

    /// Panics when the operands live on different spaces; use
    /// [`Operator::compose`] for the fallible form.
    fn mul(self, rhs: &Operator) -> Operator {
        self.compose(rhs).expect("operator product across different spaces")
    }
}

impl Add for &Operator {
    type Output = Operator;

    fn add(self, rhs: &Operator) -> Operator {
        self.try_add(rhs).expect("operator sum across different spaces")
    }
}

impl Sub for &Operator {
    type Output = Operator;

    fn sub(self, rhs: &Operator) -> Operator {
        check_same(&self.space, &rhs.space).expect("operator difference across different spaces");
        Operator {
            mat: &self.mat - &rhs.mat,
            space: self.space.clone(),
        }
    }
}

/// A normalized pure state.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    space: TensorSpace,
    amps: Array1<C64>,
}

impl StateVector {
    /// Wrap amplitudes that are already normalized (within 1e−12).
    pub fn new(space: TensorSpace, amps: Array1<C64>) -> Result<Self> {
        if amps.len() != space.dim() {
            return Err(Error::DimensionMismatch {
                expected: space.dim(),
                found: amps.len(),
            });
        }
        let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > STATE_NORM_TOL {
            return Err(Error::InvalidState(format!("state norm {norm} != 1")));
        }
        Ok(Self { space, amps })
    }

    /// Normalize arbitrary nonzero amplitudes.
    pub fn normalized(space: TensorSpace, amps: Array1<C64>) -> Result<Self> {
        let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::InvalidState("cannot normalize a zero vector".into()));
        }
        Self::new(space, amps / C64::new(norm, 0.0))
    }

    pub fn basis(space: &TensorSpace, index: usize) -> Result<Self> {
        if index >= space.dim() {
            return Err(Error::DimensionMismatch {
                expected: space.dim(),
                found: index + 1,
            });
        }
        let mut amps = Array1::zeros(space.dim());
        amps[index] = C64::new(1.0, 0.0);
        Ok(Self {
            space: space.clone(),
            amps,
        })
    }

    pub fn space(&self) -> &TensorSpace {
        &self.space
    }

    pub fn amplitudes(&self) -> &Array1<C64> {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// ⟨self|other⟩
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        check_same(&self.space, &other.space)?;
        Ok(self
            .amps
            .iter()
            .zip(other.amps.iter())
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn kron(&self, other: &StateVector) -> Result<Self> {
        let space = self.space.concat(&other.space)?;
        let mut amps = Array1::zeros(space.dim());
        let n = other.amps.len();
        for (i, a) in self.amps.iter().enumerate() {
            for (j, b) in other.amps.iter().enumerate() {
                amps[i * n + j] = a * b;
            }
        }
        Ok(Self { space, amps })
    }

    /// Product of several states, first factor slowest.
    pub fn product(parts: &[&StateVector]) -> Result<Self> {
        let (first, rest) = parts
            .split_first()
            .ok_or_else(|| Error::InvalidParameter("empty product".into()))?;
        rest.iter().try_fold((*first).clone(), |acc, s| acc.kron(s))
    }

    pub fn projector(&self) -> DensityMatrix {
        let d = self.amps.len();
        DensityMatrix {
            mat: Array2::from_shape_fn((d, d), |(i, j)| self.amps[i] * self.amps[j].conj()),
            space: self.space.clone(),
        }
    }

    /// Reorder amplitudes into a (subsystem × rest) matrix.
    pub(crate) fn bipartite_matrix(&self, labels: &[&str]) -> Result<Array2<C64>> {
        let (sel, rest) = self.space.split_offsets(labels)?;
        Ok(Array2::from_shape_fn((sel.len(), rest.len()), |(a, r)| {
            self.amps[sel[a] + rest[r]]
        }))
    }
}

/// A density matrix: Hermitian, unit trace, positive semidefinite.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    space: TensorSpace,
    mat: Array2<C64>,
}

impl DensityMatrix {
    /// Validating constructor with the default trace tolerance (1e−8).
    pub fn new(space: TensorSpace, mat: Array2<C64>) -> Result<Self> {
        Self::with_trace_tolerance(space, mat, RHO_TRACE_TOL)
    }

    pub fn with_trace_tolerance(space: TensorSpace, mat: Array2<C64>, trace_tol: f64) -> Result<Self> {
        let rho = Self::from_matrix_unchecked(space, mat)?;
        let herm = rho.hermiticity_error();
        if herm > RHO_HERMITIAN_TOL {
            return Err(Error::InvalidState(format!(
                "density matrix not Hermitian ({herm:.3e})"
            )));
        }
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > trace_tol || tr.im.abs() > trace_tol {
            return Err(Error::InvalidState(format!("trace {tr} != 1")));
        }
        let min_eig = rho.min_eigenvalue();
        if min_eig < RHO_MIN_EIG {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {min_eig:.3e}"
            )));
        }
        Ok(rho)
    }

    /// Shape check only; used for intermediate results whose invariants are
    /// checked by the caller.
    pub fn from_matrix_unchecked(space: TensorSpace, mat: Array2<C64>) -> Result<Self> {
        let d = space.dim();
        if mat.dim() != (d, d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: mat.nrows(),
            });
        }
        Ok(Self { space, mat })
    }

    pub fn maximally_mixed(space: &TensorSpace) -> Self {
        let d = space.dim();
        Self {
            mat: Array2::eye(d) / C64::new(d as f64, 0.0),
            space: space.clone(),
        }
    }

    pub fn space(&self) -> &TensorSpace {
        &self.space
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.mat
    }

    pub fn into_matrix(self) -> Array2<C64> {
        self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn trace(&self) -> C64 {
        self.mat.diag().sum()
    }

    pub fn populations(&self) -> Vec<f64> {
        self.mat.diag().iter().map(|z| z.re).collect()
    }

    pub fn hermiticity_error(&self) -> f64 {
        let d = self.dim();
        let mut err: f64 = 0.0;
        for i in 0..d {
            for j in i..d {
                err = err.max((self.mat[[i, j]] - self.mat[[j, i]].conj()).norm());
            }
        }
        err
    }

    /// tr(ρ²)
    pub fn purity(&self) -> f64 {
        // ρ Hermitian ⇒ tr(ρ²) = Σ |ρ_ij|²
        self.mat.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Smallest eigenvalue, computed block-by-block over the connected
    /// components of the nonzero pattern.
    pub fn min_eigenvalue(&self) -> f64 {
        linalg::hermitian_eigenvalues(&self.mat)
            .into_iter()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::hermitian_eigenvalues(&self.mat)
    }

    /// max |ρ − σ| entrywise.
    pub fn max_abs_diff(&self, rhs: &DensityMatrix) -> Result<f64> {
        check_same(&self.space, &rhs.space)?;
        Ok(self
            .mat
            .iter()
            .zip(rhs.mat.iter())
            .fold(0.0, |acc, (a, b)| acc.max((a - b).norm())))
    }

    pub fn kron(&self, other: &DensityMatrix) -> Result<Self> {
        let space = self.space.concat(&other.space)?;
        Ok(Self {
            mat: kron_matrix(&self.mat, &other.mat),
            space,
        })
    }
}

fn kron_matrix(a: &Array2<C64>, b: &Array2<C64>) -> Array2<C64> {
    let (ra, ca) = a.dim();
    let (rb, cb) = b.dim();
    let mut out = Array2::zeros((ra * rb, ca * cb));
    for i in 0..ra {
        for j in 0..ca {
            let aij = a[[i, j]];
            if aij == C64::new(0.0, 0.0) {
                continue;
            }
            for k in 0..rb {
                for l in 0..cb {
                    out[[i * rb + k, j * cb + l]] = aij * b[[k, l]];
                }
            }
        }
    }
    out
}

/// A ⊗ B with A's factors leftmost (slowest-varying).
pub fn kron(a: &Operator, b: &Operator) -> Result<Operator> {
    let space = a.space.concat(&b.space)?;
    Ok(Operator {
        mat: kron_matrix(&a.mat, &b.mat),
        space,
    })
}

/// Lift an operator on a single factor into `space`.
pub fn embed(local: &Operator, target_label: &str, space: &TensorSpace) -> Result<Operator> {
    let dim = space.factor_dim(target_label)?;
    if local.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: local.dim(),
        });
    }
    embed_matrix(&local.mat, &[target_label], space)
}

/// Lift an operator whose own factors all appear in `space` (same relative
/// order, same dimensions). Identity on every other factor.
pub fn embed_multi(local: &Operator, space: &TensorSpace) -> Result<Operator> {
    let labels: Vec<&str> = local.space.labels().collect();
    let sub = space.subspace(&labels)?;
    if sub != local.space {
        return Err(Error::SpaceMismatch {
            left: local.space.to_string(),
            right: sub.to_string(),
        });
    }
    embed_matrix(&local.mat, &labels, space)
}

fn embed_matrix(local: &Array2<C64>, labels: &[&str], space: &TensorSpace) -> Result<Operator> {
    let (sel, rest) = space.split_offsets(labels)?;
    let d = space.dim();
    let mut mat = Array2::zeros((d, d));
    for &r in &rest {
        for (a, &oa) in sel.iter().enumerate() {
            for (b, &ob) in sel.iter().enumerate() {
                let v = local[[a, b]];
                if v != C64::new(0.0, 0.0) {
                    mat[[oa + r, ob + r]] = v;
                }
            }
        }
    }
    Ok(Operator {
        mat,
        space: space.clone(),
    })
}

fn partial_trace_matrix(
    mat: &Array2<C64>,
    space: &TensorSpace,
    keep: &[&str],
) -> Result<(TensorSpace, Array2<C64>)> {
    if keep.is_empty() {
        return Err(Error::InvalidParameter("partial trace must keep a factor".into()));
    }
    let kept = space.subspace(keep)?;
    let (sel, rest) = space.split_offsets(keep)?;
    let n = sel.len();
    let mut out = Array2::zeros((n, n));
    for (a, &oa) in sel.iter().enumerate() {
        for (b, &ob) in sel.iter().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for &r in &rest {
                acc += mat[[oa + r, ob + r]];
            }
            out[[a, b]] = acc;
        }
    }
    Ok((kept, out))
}

/// Reduced state on `keep_labels` (kept factors stay in their original order).
pub fn partial_trace(rho: &DensityMatrix, keep_labels: &[&str]) -> Result<DensityMatrix> {
    let (space, mat) = partial_trace_matrix(&rho.mat, &rho.space, keep_labels)?;
    Ok(DensityMatrix { space, mat })
}

/// Reduced state of a pure state, without forming the full projector.
pub fn reduced_pure(psi: &StateVector, keep_labels: &[&str]) -> Result<DensityMatrix> {
    let m = psi.bipartite_matrix(keep_labels)?;
    let space = psi.space.subspace(keep_labels)?;
    let mat = m.dot(&adjoint_matrix(&m));
    Ok(DensityMatrix { space, mat })
}

/// tr(ρ O)
pub fn expectation(rho: &DensityMatrix, op: &Operator) -> Result<C64> {
    check_same(&rho.space, &op.space)?;
    let d = rho.dim();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..d {
        for k in 0..d {
            acc += rho.mat[[i, k]] * op.mat[[k, i]];
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_op(rng: &mut ChaCha8Rng, label: &str, dim: usize) -> Operator {
        let space = TensorSpace::single(label, dim).unwrap();
        Operator::from_fn(&space, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    }

    fn random_rho(rng: &mut ChaCha8Rng, space: &TensorSpace) -> DensityMatrix {
        let d = space.dim();
        let g = Array2::from_shape_fn((d, d), |_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let mut m = g.dot(&adjoint_matrix(&g));
        let tr = m.diag().sum();
        m /= tr;
        DensityMatrix::new(space.clone(), m).unwrap()
    }

    fn sigma_x(label: &str) -> Operator {
        let s = TensorSpace::single(label, 2).unwrap();
        Operator::from_fn(&s, |i, j| if i != j { c(1.0, 0.0) } else { c(0.0, 0.0) })
    }

    fn lowering(label: &str, dim: usize) -> Operator {
        let s = TensorSpace::single(label, dim).unwrap();
        Operator::from_fn(&s, |i, j| {
            if j == i + 1 {
                c((j as f64).sqrt(), 0.0)
            } else {
                c(0.0, 0.0)
            }
        })
    }

    #[test]
    fn space_rejects_duplicate_labels() {
        assert!(matches!(
            TensorSpace::new([("a", 2), ("a", 3)]),
            Err(Error::DuplicateLabel(_))
        ));
    }

    #[test]
    fn digits_round_trip() {
        let s = TensorSpace::new([("a", 3), ("b", 2), ("c", 4)]).unwrap();
        assert_eq!(s.dim(), 24);
        for i in 0..s.dim() {
            assert_eq!(s.index(&s.digits(i)), i);
        }
        assert_eq!(s.basis_index(&[("c", 1), ("a", 2), ("b", 1)]).unwrap(), 2 * 8 + 4 + 1);
    }

    #[test]
    fn kron_identities() {
        let i2a = Operator::identity(&TensorSpace::single("a", 2).unwrap());
        let i2b = Operator::identity(&TensorSpace::single("b", 2).unwrap());
        let i4 = kron(&i2a, &i2b).unwrap();
        assert_eq!(i4.matrix(), &Array2::<C64>::eye(4));
        assert_eq!(i4.space().labels().collect::<Vec<_>>(), vec!["a", "b"]);

        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = random_op(&mut rng, "a", 3);
        let b = random_op(&mut rng, "b", 5);
        assert_eq!(kron(&a, &b).unwrap().dim(), 15);
    }

    #[test]
    fn kron_mixed_product() {
        // (A⊗B)(C⊗D) = (AC)⊗(BD), right side formed by plain matrix products
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = random_op(&mut rng, "a", 2);
        let b = random_op(&mut rng, "b", 3);
        let cc = random_op(&mut rng, "a", 2);
        let d = random_op(&mut rng, "b", 3);
        let lhs = &kron(&a, &b).unwrap() * &kron(&cc, &d).unwrap();
        let ac = a.matrix().dot(cc.matrix());
        let bd = b.matrix().dot(d.matrix());
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..3 {
                    for l in 0..3 {
                        let want = ac[[i, j]] * bd[[k, l]];
                        assert!((lhs.get(i * 3 + k, j * 3 + l) - want).norm() < 1e-13);
                    }
                }
            }
        }
    }

    #[test]
    fn kron_rejects_shared_label() {
        let a = sigma_x("q");
        assert!(kron(&a, &a).is_err());
    }

    #[test]
    fn embed_basis_action() {
        let space = TensorSpace::new([("atom", 2), ("photon", 3)]).unwrap();
        let x = embed(&sigma_x("atom"), "atom", &space).unwrap();
        let g0 = StateVector::basis(&space, space.basis_index(&[("atom", 0), ("photon", 0)]).unwrap()).unwrap();
        let e0 = StateVector::basis(&space, space.basis_index(&[("atom", 1), ("photon", 0)]).unwrap()).unwrap();
        assert_eq!(x.apply(&g0).unwrap(), e0);
    }

    #[test]
    fn embed_identity_and_errors() {
        let space = TensorSpace::new([("el", 4), ("cav", 3)]).unwrap();
        let id = Operator::identity(&TensorSpace::single("cav", 3).unwrap());
        assert_eq!(embed(&id, "cav", &space).unwrap(), Operator::identity(&space));
        assert!(matches!(embed(&id, "nope", &space), Err(Error::UnknownLabel(_))));
        let wrong = Operator::identity(&TensorSpace::single("el", 3).unwrap());
        assert!(matches!(
            embed(&wrong, "el", &space),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn disjoint_embeddings_commute() {
        let space = TensorSpace::new([("el", 5), ("cav", 4)]).unwrap();
        let a = embed(&lowering("cav", 4), "cav", &space).unwrap();
        let b = embed(&lowering("el", 5), "el", &space).unwrap();
        let comm = a.commutator(&b).unwrap();
        assert_eq!(max_abs(comm.matrix()), 0.0);
    }

    #[test]
    fn embed_multi_matches_kron_chain() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_op(&mut rng, "a", 2);
        let cc = random_op(&mut rng, "c", 3);
        let ac = kron(&a, &cc).unwrap();
        let space = TensorSpace::new([("a", 2), ("b", 2), ("c", 3)]).unwrap();
        let lifted = embed_multi(&ac, &space).unwrap();
        let ib = Operator::identity(&TensorSpace::single("b", 2).unwrap());
        let expect = kron(&kron(&a, &ib).unwrap(), &cc).unwrap();
        assert!(lifted.max_abs_diff(&expect).unwrap() < 1e-15);
    }

    #[test]
    fn partial_trace_product_and_bell() {
        let sa = TensorSpace::single("a", 2).unwrap();
        let sb = TensorSpace::single("b", 3).unwrap();
        let psi = StateVector::normalized(sa.clone(), Array1::from(vec![c(1.0, 0.0), c(0.0, 2.0)])).unwrap();
        let phi = StateVector::normalized(sb.clone(), Array1::from(vec![c(1.0, 0.0), c(1.0, 1.0), c(0.0, -1.0)])).unwrap();
        let rho = psi.projector().kron(&phi.projector()).unwrap();
        let red = partial_trace(&rho, &["a"]).unwrap();
        assert!(red.max_abs_diff(&psi.projector()).unwrap() < 1e-15);

        let s2 = TensorSpace::new([("p", 2), ("q", 2)]).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let bell = StateVector::new(s2, Array1::from(vec![c(h, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(h, 0.0)])).unwrap();
        for keep in ["p", "q"] {
            let red = partial_trace(&bell.projector(), &[keep]).unwrap();
            let half = DensityMatrix::maximally_mixed(red.space());
            assert!(red.max_abs_diff(&half).unwrap() < 1e-15);
        }
    }

    #[test]
    fn partial_trace_preserves_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let s = TensorSpace::new([("a", 2), ("b", 3)]).unwrap();
        let rho = random_rho(&mut rng, &s);
        let red = partial_trace(&rho, &["b"]).unwrap();
        assert_abs_diff_eq!(red.trace().re, rho.trace().re, epsilon = 1e-14);
        assert!(matches!(partial_trace(&rho, &["x"]), Err(Error::UnknownLabel(_))));
    }

    #[test]
    fn reduced_pure_matches_partial_trace() {
        let s = TensorSpace::new([("a", 2), ("b", 3), ("c", 2)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let amps = Array1::from_shape_fn(12, |_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let psi = StateVector::normalized(s, amps).unwrap();
        let a = reduced_pure(&psi, &["a", "c"]).unwrap();
        let b = partial_trace(&psi.projector(), &["a", "c"]).unwrap();
        assert!(a.max_abs_diff(&b).unwrap() < 1e-14);
    }

    #[test]
    fn expectation_examples() {
        let s = TensorSpace::single("cav", 4).unwrap();
        let a = lowering("cav", 4);
        let n = &a.adjoint() * &a;
        let vac = StateVector::basis(&s, 0).unwrap().projector();
        let one = StateVector::basis(&s, 1).unwrap().projector();
        assert_abs_diff_eq!(expectation(&vac, &n).unwrap().re, 0.0);
        assert_abs_diff_eq!(expectation(&one, &n).unwrap().re, 1.0, epsilon = 1e-15);
        let mixed = DensityMatrix::maximally_mixed(&s);
        let e = expectation(&mixed, &n).unwrap();
        assert_abs_diff_eq!(e.re, n.trace().re / 4.0, epsilon = 1e-15);
        assert!(e.im.abs() < 1e-10);
        let other = DensityMatrix::maximally_mixed(&TensorSpace::single("el", 4).unwrap());
        assert!(matches!(expectation(&other, &n), Err(Error::SpaceMismatch { .. })));
    }

    #[test]
    fn density_matrix_validation() {
        let s = TensorSpace::single("q", 2).unwrap();
        let bad_trace = Array2::from_diag(&Array1::from(vec![c(0.7, 0.0), c(0.7, 0.0)]));
        assert!(DensityMatrix::new(s.clone(), bad_trace).is_err());
        let negative = Array2::from_diag(&Array1::from(vec![c(1.1, 0.0), c(-0.1, 0.0)]));
        assert!(DensityMatrix::new(s.clone(), negative).is_err());
        let mut nonherm = Array2::eye(2) / c(2.0, 0.0);
        nonherm[[0, 1]] = c(0.1, 0.0);
        assert!(DensityMatrix::new(s, nonherm).is_err());
    }

    #[test]
    fn state_requires_unit_norm() {
        let s = TensorSpace::single("q", 2).unwrap();
        assert!(StateVector::new(s.clone(), Array1::from(vec![c(1.0, 0.0), c(1.0, 0.0)])).is_err());
        assert!(StateVector::normalized(s, Array1::zeros(2)).is_err());
    }
}
