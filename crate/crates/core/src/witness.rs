//! Block and POVM coherence witnesses.
//!
//! A Hermitian `W` is a witness for a reference iff its dephased image is
//! positive semidefinite. `dephase(A) − A` has zero mean on every incoherent
//! state, and a negative expectation `Tr(ρW)` certifies coherence of `ρ`.

use crate::error::{check_dim, Error, Result};
use crate::linalg::{
    eigh, expectation_pure, fidelity_pure, outer, trace_product, DensityMatrix, HermitianOperator, PureState,
    PSD_TOL,
};
use crate::measurements::{dephase_block, dephase_povm, povm_max_cross_norm, PovmSet, ProjectorSet, Reference};

/// Floor on the dephased minimum eigenvalue for a witness to be certified.
pub const CERTIFICATION_TOL: f64 = PSD_TOL;
/// A state counts as detected only when `Tr(ρW)` is below minus this value.
pub const DETECTION_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct Witness {
    operator: HermitianOperator,
    reference: Reference,
    certified: bool,
    dephased_min_eigenvalue: f64,
    /// Pure target `|φ⟩` when the witness was built as `dephase(|φ⟩⟨φ|) − |φ⟩⟨φ|`.
    target: Option<PureState>,
}

impl Witness {
    pub fn operator(&self) -> &HermitianOperator {
        &self.operator
    }

    pub fn reference(&self) -> &Reference {
        &self.reference
    }

    pub fn certified(&self) -> bool {
        self.certified
    }

    pub fn dephased_min_eigenvalue(&self) -> f64 {
        self.dephased_min_eigenvalue
    }

    pub fn target(&self) -> Option<&PureState> {
        self.target.as_ref()
    }

    /// Attaches a pure target so [`evaluate`] reports the fidelity form.
    ///
    /// The caller asserts the operator equals `dephase(|φ⟩⟨φ|) − |φ⟩⟨φ|`.
    pub fn with_target(mut self, phi: PureState) -> Result<Self> {
        check_dim(self.operator.dim(), phi.dim())?;
        self.target = Some(phi);
        Ok(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionResult {
    /// `Tr(ρW)`.
    pub expectation: f64,
    /// `−Tr(ρW)`; positive when coherence is detected.
    pub detection_value: f64,
    pub detected: bool,
    /// `⟨φ|dephase(ρ)|φ⟩`, only for pure-target witnesses.
    pub fidelity_dephased: Option<f64>,
    /// `⟨φ|ρ|φ⟩`, only for pure-target witnesses.
    pub fidelity_raw: Option<f64>,
}

fn dephase_hermitian(op: &HermitianOperator, reference: &Reference) -> Result<HermitianOperator> {
    Ok(HermitianOperator::from_hermitian_part(&reference.dephase(op.matrix())?))
}

/// `W = dephase(A) − A` for the kind of `reference`.
pub fn construct_witness(a: &HermitianOperator, reference: &Reference) -> Result<Witness> {
    check_dim(reference.dim(), a.dim())?;
    let dephased = reference.dephase(a.matrix())?;
    let w = HermitianOperator::from_hermitian_part(&(dephased - a.matrix()));
    certify_witness(&w, reference, CERTIFICATION_TOL)
}

/// Computes `dephase(W)` and its smallest eigenvalue; certified iff it is at least `-tol`.
pub fn certify_witness(w: &HermitianOperator, reference: &Reference, tol: f64) -> Result<Witness> {
    check_dim(reference.dim(), w.dim())?;
    let lambda_min = eigh(&dephase_hermitian(w, reference)?).values[0];
    Ok(Witness {
        operator: w.clone(),
        reference: reference.clone(),
        certified: lambda_min >= -tol,
        dephased_min_eigenvalue: lambda_min,
        target: None,
    })
}

/// `W_φ = dephase(|φ⟩⟨φ|) − |φ⟩⟨φ|`, remembering `φ` for the fidelity form.
pub fn witness_from_pure(phi: &PureState, reference: &Reference) -> Result<Witness> {
    let mut w = construct_witness(&phi.projector(), reference)?;
    w.target = Some(phi.clone());
    Ok(w)
}

pub fn evaluate(w: &Witness, rho: &DensityMatrix) -> Result<DetectionResult> {
    evaluate_with_tol(w, rho, DETECTION_TOL)
}

/// [`evaluate`] with an explicit detection threshold.
pub fn evaluate_with_tol(w: &Witness, rho: &DensityMatrix, tol: f64) -> Result<DetectionResult> {
    if !w.certified {
        return Err(Error::UncertifiedWitness { min_eigenvalue: w.dephased_min_eigenvalue });
    }
    check_dim(w.operator.dim(), rho.dim())?;
    let expectation = trace_product(rho.matrix(), w.operator.matrix()).re;
    let (fidelity_dephased, fidelity_raw) = match &w.target {
        Some(phi) => {
            let dephased = w.reference.dephase(rho.matrix())?;
            (Some(expectation_pure(&dephased, phi)?.re), Some(fidelity_pure(rho, phi)?))
        }
        None => (None, None),
    };
    Ok(DetectionResult {
        expectation,
        detection_value: -expectation,
        detected: expectation < -tol,
        fidelity_dephased,
        fidelity_raw,
    })
}

/// Block-incoherent state on which a non-witness has negative mean.
///
/// With `|v⟩` the eigenvector of the smallest eigenvalue `λ` of `Δ̃(W)`,
/// returns `δ = Δ̃(|v⟩⟨v|)`, which satisfies `Tr(δW) = λ`. Returns `None`
/// when `λ ≥ −tol`.
pub fn violating_state(w: &HermitianOperator, p: &ProjectorSet, tol: f64) -> Result<Option<DensityMatrix>> {
    check_dim(p.dim(), w.dim())?;
    let dephased = HermitianOperator::from_hermitian_part(&dephase_block(w.matrix(), p)?);
    let eig = eigh(&dephased);
    if eig.values[0] >= -tol {
        return Ok(None);
    }
    let v = eig.vector(0);
    let delta = dephase_block(&outer(&v), p)?;
    Ok(Some(DensityMatrix::from_psd_unnormalized(&delta)?))
}

/// Raw converse certificate `Δ̄(|v⟩⟨v|)` for a POVM reference.
///
/// For non-projective POVMs this operator is generally neither normalized
/// nor exactly incoherent; its trace and cross norm are reported as-is.
#[derive(Debug, Clone)]
pub struct PovmCertificate {
    pub operator: HermitianOperator,
    pub trace: f64,
    pub max_cross_norm: f64,
    /// `Tr(Δ̄(|v⟩⟨v|) W)`, equal to the smallest eigenvalue of `Δ̄(W)`.
    pub expectation: f64,
    /// True when the POVM is not projective, so incoherence of the
    /// certificate is asserted by the construction rather than verified.
    pub incoherence_unverified: bool,
}

pub fn povm_violating_certificate(w: &HermitianOperator, e: &PovmSet, tol: f64) -> Result<Option<PovmCertificate>> {
    check_dim(e.dim(), w.dim())?;
    let dephased = HermitianOperator::from_hermitian_part(&dephase_povm(w.matrix(), e)?);
    let eig = eigh(&dephased);
    if eig.values[0] >= -tol {
        return Ok(None);
    }
    let v = eig.vector(0);
    let raw = HermitianOperator::from_hermitian_part(&dephase_povm(&outer(&v), e)?);
    Ok(Some(PovmCertificate {
        trace: raw.trace(),
        max_cross_norm: povm_max_cross_norm(raw.matrix(), e),
        expectation: trace_product(raw.matrix(), w.matrix()).re,
        incoherence_unverified: !e.is_projective(),
        operator: raw,
    }))
}
