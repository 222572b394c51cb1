//! Dense complex matrix foundation.
//!
//! Operators are stored as dense `nalgebra` matrices of `Complex64`. The
//! validated newtypes [`HermitianOperator`], [`DensityMatrix`] and
//! [`PureState`] carry their invariants, so downstream modules never have to
//! re-check them.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{check_dim, Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Max-norm tolerance for `M = M†`.
pub const HERMITICITY_TOL: f64 = 1e-12;
/// Eigenvalue floor used for positive-semidefiniteness.
pub const PSD_TOL: f64 = 1e-10;
/// Allowed deviation of a density matrix trace from one.
pub const TRACE_TOL: f64 = 1e-10;
/// Allowed deviation of a pure state norm from one.
pub const NORM_TOL: f64 = 1e-12;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `Tr(AB)` without forming the product.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> Complex64 {
    let d = a.nrows();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..d {
        for j in 0..d {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

/// `(M + M†) / 2`.
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Projector `|v⟩⟨v|` for an arbitrary (not necessarily normalized) vector.
pub fn outer(v: &CVector) -> CMatrix {
    v * v.adjoint()
}

fn check_square_finite(m: &CMatrix) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::InvalidOperator(format!(
            "matrix is not square: {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.nrows() == 0 {
        return Err(Error::InvalidDimension("matrix has dimension 0".into()));
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidOperator("matrix has non-finite entries".into()));
    }
    Ok(())
}

/// A square complex matrix with `‖M − M†‖_max` below the hermiticity tolerance.
///
/// The stored matrix is the exact Hermitian part of the input.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator(CMatrix);

impl HermitianOperator {
    pub fn new(m: CMatrix) -> Result<Self> {
        Self::with_tolerance(m, HERMITICITY_TOL)
    }

    pub fn with_tolerance(m: CMatrix, tol: f64) -> Result<Self> {
        check_square_finite(&m)?;
        let deviation = max_abs(&(&m - m.adjoint()));
        if deviation > tol {
            return Err(Error::InvalidOperator(format!(
                "not Hermitian: max |M - M†| = {deviation:e} exceeds {tol:e}"
            )));
        }
        Ok(Self(hermitian_part(&m)))
    }

    /// Wraps a matrix that is Hermitian up to rounding by construction.
    pub(crate) fn from_hermitian_part(m: &CMatrix) -> Self {
        Self(hermitian_part(m))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(CMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        Self(CMatrix::identity(dim, dim))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let v = CVector::from_iterator(diag.len(), diag.iter().map(|&x| c(x, 0.0)));
        Self(CMatrix::from_diagonal(&v))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self(self.0.scale(factor))
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }
}

/// Eigendecomposition `M = V diag(λ) V†` with ascending eigenvalues.
#[derive(Debug, Clone)]
pub struct Eigh {
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors stored as columns, in the order of `values`.
    pub vectors: CMatrix,
}

impl Eigh {
    pub fn vector(&self, k: usize) -> CVector {
        self.vectors.column(k).into_owned()
    }

    pub fn reconstruct(&self) -> CMatrix {
        let mut scaled = self.vectors.clone();
        for (k, &lambda) in self.values.iter().enumerate() {
            scaled.column_mut(k).scale_mut(lambda);
        }
        &scaled * self.vectors.adjoint()
    }
}

pub fn eigh(m: &HermitianOperator) -> Eigh {
    let d = m.dim();
    let decomposition = m.0.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| decomposition.eigenvalues[a].total_cmp(&decomposition.eigenvalues[b]));
    let values = order.iter().map(|&k| decomposition.eigenvalues[k]).collect();
    let vectors = CMatrix::from_fn(d, d, |i, j| decomposition.eigenvectors[(i, order[j])]);
    Eigh { values, vectors }
}

/// Validating front-end to [`eigh`] for raw matrices.
pub fn eigh_matrix(m: &CMatrix) -> Result<Eigh> {
    Ok(eigh(&HermitianOperator::new(m.clone())?))
}

pub fn min_eigenvalue(m: &HermitianOperator) -> f64 {
    eigh(m).values[0]
}

/// True iff the smallest eigenvalue is at least `-tol`.
pub fn is_psd(m: &HermitianOperator, tol: f64) -> bool {
    min_eigenvalue(m) >= -tol
}

/// A unit-trace positive-semidefinite Hermitian operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(HermitianOperator);

impl DensityMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        Self::from_hermitian(HermitianOperator::new(m)?)
    }

    pub fn from_hermitian(h: HermitianOperator) -> Result<Self> {
        let trace = h.0.trace();
        if (trace.re - 1.0).abs() > TRACE_TOL || trace.im.abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace is {trace}, expected 1")));
        }
        let lambda_min = min_eigenvalue(&h);
        if lambda_min < -PSD_TOL {
            return Err(Error::InvalidState(format!(
                "not positive semidefinite: minimum eigenvalue {lambda_min:e}"
            )));
        }
        Ok(Self(h))
    }

    /// Normalizes a positive-semidefinite operator by its trace.
    pub(crate) fn from_psd_unnormalized(m: &CMatrix) -> Result<Self> {
        let trace = m.trace().re;
        if trace <= 0.0 || !trace.is_finite() {
            return Err(Error::InvalidState(format!("cannot normalize operator with trace {trace}")));
        }
        Self::from_hermitian(HermitianOperator::from_hermitian_part(&m.unscale(trace)))
    }

    pub fn from_pure(phi: &PureState) -> Self {
        Self(phi.projector())
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self(HermitianOperator::identity(dim).scale(1.0 / dim as f64))
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn matrix(&self) -> &CMatrix {
        self.0.matrix()
    }

    pub fn operator(&self) -> &HermitianOperator {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0.into_matrix()
    }
}

/// A normalized state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState(CVector);

impl PureState {
    pub fn new(amplitudes: CVector) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidDimension("state vector is empty".into()));
        }
        if amplitudes.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidState("non-finite amplitude".into()));
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidState(format!("state norm is {norm}, expected 1")));
        }
        Ok(Self(amplitudes))
    }

    /// Normalizes the given amplitudes. Fails on the zero vector.
    pub fn normalized(amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidState("cannot normalize a zero or non-finite vector".into()));
        }
        Self::new(amplitudes.unscale(norm))
    }

    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        Self::new(CVector::from_iterator(
            amplitudes.len(),
            amplitudes.iter().map(|&x| c(x, 0.0)),
        ))
    }

    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::InvalidDimension(format!("basis index {index} out of range for dim {dim}")));
        }
        let mut v = CVector::zeros(dim);
        v[index] = c(1.0, 0.0);
        Ok(Self(v))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.0
    }

    pub fn projector(&self) -> HermitianOperator {
        HermitianOperator::from_hermitian_part(&outer(&self.0))
    }
}

/// `⟨φ|M|φ⟩` for any square operator of matching dimension.
pub fn expectation_pure(m: &CMatrix, phi: &PureState) -> Result<Complex64> {
    check_dim(m.nrows(), phi.dim())?;
    Ok(phi.0.dotc(&(m * &phi.0)))
}

/// Fidelity `⟨φ|ρ|φ⟩` of a state with a pure target.
pub fn fidelity_pure(rho: &DensityMatrix, phi: &PureState) -> Result<f64> {
    let value = expectation_pure(rho.matrix(), phi)?.re;
    Ok(clamp_within(value, 0.0, 1.0, PSD_TOL))
}

/// Clamps `x` into `[lo, hi]` only when it lies within `tol` of the interval.
pub(crate) fn clamp_within(x: f64, lo: f64, hi: f64, tol: f64) -> f64 {
    if x < lo && x >= lo - tol {
        lo
    } else if x > hi && x <= hi + tol {
        hi
    } else {
        x
    }
}

/// `e^{−iHφ}` through the eigendecomposition of `H`.
pub fn unitary_exp(h: &HermitianOperator, phi: f64) -> CMatrix {
    let eig = eigh(h);
    let mut scaled = eig.vectors.clone();
    for (k, &lambda) in eig.values.iter().enumerate() {
        let phase = Complex64::from_polar(1.0, -lambda * phi);
        scaled.column_mut(k).iter_mut().for_each(|z| *z *= phase);
    }
    scaled * eig.vectors.adjoint()
}
