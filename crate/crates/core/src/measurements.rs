//! Measurement references and the dephasing maps they induce.
//!
//! A [`ProjectorSet`] is a complete family of orthogonal projectors and
//! defines block dephasing `ρ ↦ Σ_s P_s ρ P_s`; rank-1 projectors in the
//! computational basis give ordinary dephasing. A [`PovmSet`] is a complete
//! family of positive effects and defines `ρ ↦ Σ_i E_i ρ E_i`, which is not
//! trace-preserving unless the effects are projectors.

use crate::error::{check_dim, Error, Result};
use crate::linalg::{eigh, frobenius, is_psd, CMatrix, CVector, DensityMatrix, HermitianOperator, PSD_TOL};

/// Frobenius tolerance for idempotence, orthogonality and completeness.
pub const STRUCTURE_TOL: f64 = 1e-10;
/// Default tolerance on cross norms when certifying incoherence.
pub const INCOHERENCE_TOL: f64 = 1e-10;

fn invalid(invariant: &'static str, index: Option<usize>, detail: String) -> Error {
    Error::InvalidMeasurement { invariant, index, detail }
}

fn hermitian_operators(ops: Vec<CMatrix>) -> Result<(usize, Vec<HermitianOperator>)> {
    let dim = match ops.first() {
        Some(first) => first.nrows(),
        None => return Err(invalid("non-empty", None, "no operators given".into())),
    };
    let mut out = Vec::with_capacity(ops.len());
    for (i, m) in ops.into_iter().enumerate() {
        if m.nrows() != dim || m.ncols() != dim {
            return Err(invalid(
                "dimension",
                Some(i),
                format!("operator is {}x{}, expected {dim}x{dim}", m.nrows(), m.ncols()),
            ));
        }
        let h = HermitianOperator::new(m).map_err(|e| invalid("hermitian", Some(i), e.to_string()))?;
        out.push(h);
    }
    Ok((dim, out))
}

fn check_complete(dim: usize, ops: &[HermitianOperator]) -> Result<()> {
    let mut sum = CMatrix::zeros(dim, dim);
    for op in ops {
        sum += op.matrix();
    }
    let deviation = frobenius(&(sum - CMatrix::identity(dim, dim)));
    if deviation > STRUCTURE_TOL {
        return Err(invalid(
            "complete",
            None,
            format!("‖Σ − I‖_F = {deviation:e} exceeds {STRUCTURE_TOL:e}"),
        ));
    }
    Ok(())
}

/// A complete family of mutually orthogonal projectors.
#[derive(Debug, Clone)]
pub struct ProjectorSet {
    dim: usize,
    projectors: Vec<HermitianOperator>,
    ranks: Vec<usize>,
    /// Orthonormal basis of each range, concatenated column-wise into a unitary.
    basis: CMatrix,
}

impl ProjectorSet {
    pub fn new(projectors: Vec<CMatrix>) -> Result<Self> {
        let (dim, projectors) = hermitian_operators(projectors)?;
        for (s, p) in projectors.iter().enumerate() {
            let m = p.matrix();
            let deviation = frobenius(&(m * m - m));
            if deviation > STRUCTURE_TOL {
                return Err(invalid(
                    "idempotent",
                    Some(s),
                    format!("‖P² − P‖_F = {deviation:e} exceeds {STRUCTURE_TOL:e}"),
                ));
            }
        }
        for s in 0..projectors.len() {
            for t in (s + 1)..projectors.len() {
                let overlap = frobenius(&(projectors[s].matrix() * projectors[t].matrix()));
                if overlap > STRUCTURE_TOL {
                    return Err(invalid(
                        "orthogonal",
                        Some(t),
                        format!("‖P_{s} P_{t}‖_F = {overlap:e} exceeds {STRUCTURE_TOL:e}"),
                    ));
                }
            }
        }
        check_complete(dim, &projectors)?;

        let mut ranks = Vec::with_capacity(projectors.len());
        let mut columns = Vec::with_capacity(dim);
        for (s, p) in projectors.iter().enumerate() {
            let eig = eigh(p);
            let range: Vec<usize> = (0..dim).filter(|&k| eig.values[k] > 0.5).collect();
            if range.is_empty() {
                return Err(invalid("non-zero", Some(s), "projector has rank 0".into()));
            }
            ranks.push(range.len());
            columns.extend(range.into_iter().map(|k| eig.vector(k)));
        }
        // orthogonality + completeness leave exactly dim range vectors
        debug_assert_eq!(columns.len(), dim);
        let basis = CMatrix::from_columns(&columns);
        Ok(Self { dim, projectors, ranks, basis })
    }

    /// Builds the set from orthonormal bases of each block (isometries `d × k_s`).
    pub(crate) fn from_block_bases(blocks: &[CMatrix]) -> Result<Self> {
        Self::new(blocks.iter().map(|v| v * v.adjoint()).collect())
    }

    /// Assembles a set from exact orthonormal block bases without re-deriving
    /// ranges. Callers guarantee the concatenated columns form a unitary.
    fn from_exact_bases(blocks: Vec<CMatrix>) -> Self {
        let dim = blocks[0].nrows();
        let ranks = blocks.iter().map(|b| b.ncols()).collect();
        let projectors = blocks
            .iter()
            .map(|v| HermitianOperator::from_hermitian_part(&(v * v.adjoint())))
            .collect();
        let columns: Vec<CVector> = blocks.iter().flat_map(|b| b.column_iter().map(|c| c.into_owned())).collect();
        Self { dim, projectors, ranks, basis: CMatrix::from_columns(&columns) }
    }

    /// Rank-1 projectors `|i⟩⟨i|` of the computational basis.
    pub fn standard_basis(dim: usize) -> Result<Self> {
        if dim < 1 {
            return Err(Error::InvalidDimension("standard basis needs dim >= 1".into()));
        }
        let projectors = (0..dim)
            .map(|i| {
                let mut m = CMatrix::zeros(dim, dim);
                m[(i, i)] = 1.0.into();
                m
            })
            .collect();
        Self::new(projectors)
    }

    /// The single-block reference `{I}`.
    pub fn trivial(dim: usize) -> Result<Self> {
        if dim < 1 {
            return Err(Error::InvalidDimension("trivial reference needs dim >= 1".into()));
        }
        Self::new(vec![CMatrix::identity(dim, dim)])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.projectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projectors.is_empty()
    }

    pub fn projectors(&self) -> &[HermitianOperator] {
        &self.projectors
    }

    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    /// The same operators viewed as a projective POVM.
    pub fn to_povm(&self) -> PovmSet {
        PovmSet { dim: self.dim, effects: self.projectors.clone() }
    }

    fn block_ranges(&self) -> Vec<std::ops::Range<usize>> {
        let mut start = 0;
        self.ranks
            .iter()
            .map(|&k| {
                let r = start..start + k;
                start += k;
                r
            })
            .collect()
    }

    /// `V† ρ V` in the concatenated block basis.
    fn to_block_basis(&self, rho: &CMatrix) -> CMatrix {
        self.basis.adjoint() * rho * &self.basis
    }
}

/// A complete family of positive effects.
#[derive(Debug, Clone)]
pub struct PovmSet {
    dim: usize,
    effects: Vec<HermitianOperator>,
}

impl PovmSet {
    pub fn new(effects: Vec<CMatrix>) -> Result<Self> {
        let (dim, effects) = hermitian_operators(effects)?;
        for (i, e) in effects.iter().enumerate() {
            if frobenius(e.matrix()) == 0.0 {
                return Err(invalid("non-zero", Some(i), "effect is the zero operator".into()));
            }
            if !is_psd(e, PSD_TOL) {
                return Err(invalid(
                    "positive",
                    Some(i),
                    "effect has an eigenvalue below -1e-10".into(),
                ));
            }
        }
        check_complete(dim, &effects)?;
        Ok(Self { dim, effects })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }

    pub fn effects(&self) -> &[HermitianOperator] {
        &self.effects
    }

    /// True when every effect is idempotent, i.e. the measurement is projective.
    pub fn is_projective(&self) -> bool {
        self.effects.iter().all(|e| {
            let m = e.matrix();
            frobenius(&(m * m - m)) <= STRUCTURE_TOL
        })
    }
}

/// Either kind of measurement reference.
#[derive(Debug, Clone)]
pub enum Reference {
    Block(ProjectorSet),
    Povm(PovmSet),
}

impl Reference {
    pub fn dim(&self) -> usize {
        match self {
            Reference::Block(p) => p.dim(),
            Reference::Povm(e) => e.dim(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Reference::Block(_) => "block",
            Reference::Povm(_) => "povm",
        }
    }

    pub fn operators(&self) -> &[HermitianOperator] {
        match self {
            Reference::Block(p) => p.projectors(),
            Reference::Povm(e) => e.effects(),
        }
    }

    /// The dephasing map matching the reference kind.
    pub fn dephase(&self, rho: &CMatrix) -> Result<CMatrix> {
        match self {
            Reference::Block(p) => dephase_block(rho, p),
            Reference::Povm(e) => dephase_povm(rho, e),
        }
    }

    pub fn check_incoherent(&self, rho: &DensityMatrix, tol: f64) -> Result<IncoherenceReport> {
        match self {
            Reference::Block(p) => check_block_incoherent(rho, p, tol),
            Reference::Povm(e) => check_povm_incoherent(rho, e, tol),
        }
    }
}

impl From<ProjectorSet> for Reference {
    fn from(p: ProjectorSet) -> Self {
        Reference::Block(p)
    }
}

impl From<PovmSet> for Reference {
    fn from(e: PovmSet) -> Self {
        Reference::Povm(e)
    }
}

fn check_square(rho: &CMatrix, dim: usize) -> Result<()> {
    check_dim(dim, rho.nrows())?;
    check_dim(dim, rho.ncols())
}

/// Block dephasing `Σ_s P_s ρ P_s`.
pub fn dephase_block(rho: &CMatrix, p: &ProjectorSet) -> Result<CMatrix> {
    check_square(rho, p.dim)?;
    let rotated = p.to_block_basis(rho);
    let mut kept = CMatrix::zeros(p.dim, p.dim);
    for r in p.block_ranges() {
        kept.view_mut((r.start, r.start), (r.len(), r.len()))
            .copy_from(&rotated.view((r.start, r.start), (r.len(), r.len())));
    }
    Ok(&p.basis * kept * p.basis.adjoint())
}

/// POVM dephasing `Σ_i E_i ρ E_i`. The trace is not renormalized.
pub fn dephase_povm(rho: &CMatrix, e: &PovmSet) -> Result<CMatrix> {
    check_square(rho, e.dim)?;
    let mut out = CMatrix::zeros(e.dim, e.dim);
    for effect in &e.effects {
        let m = effect.matrix();
        out += m * rho * m;
    }
    Ok(out)
}

/// Outcome of an incoherence check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IncoherenceReport {
    pub incoherent: bool,
    /// Largest Frobenius norm of a cross term `K_a ρ K_b`, `a ≠ b`.
    pub max_cross_norm: f64,
    /// `‖ρ − dephase(ρ)‖_F`.
    pub residual: f64,
    /// Trace of `dephase(ρ)`; one for block references.
    pub dephased_trace: f64,
}

pub fn check_block_incoherent(rho: &DensityMatrix, p: &ProjectorSet, tol: f64) -> Result<IncoherenceReport> {
    check_square(rho.matrix(), p.dim)?;
    let rotated = p.to_block_basis(rho.matrix());
    let ranges = p.block_ranges();
    let mut max_cross: f64 = 0.0;
    let mut off_block_sq = 0.0;
    for (s, rs) in ranges.iter().enumerate() {
        for (t, rt) in ranges.iter().enumerate() {
            if s == t {
                continue;
            }
            let sq: f64 = rotated
                .view((rs.start, rt.start), (rs.len(), rt.len()))
                .iter()
                .map(|z| z.norm_sqr())
                .sum();
            off_block_sq += sq;
            max_cross = max_cross.max(sq.sqrt());
        }
    }
    Ok(IncoherenceReport {
        incoherent: max_cross <= tol,
        max_cross_norm: max_cross,
        residual: off_block_sq.sqrt(),
        dephased_trace: rho.matrix().trace().re,
    })
}

/// Largest `‖E_i ρ E_j‖_F` over ordered pairs `i ≠ j`.
pub(crate) fn povm_max_cross_norm(rho: &CMatrix, e: &PovmSet) -> f64 {
    let left: Vec<CMatrix> = e.effects.iter().map(|ei| ei.matrix() * rho).collect();
    let mut max_cross: f64 = 0.0;
    for (i, l) in left.iter().enumerate() {
        for (j, ej) in e.effects.iter().enumerate() {
            if i != j {
                max_cross = max_cross.max(frobenius(&(l * ej.matrix())));
            }
        }
    }
    max_cross
}

pub fn check_povm_incoherent(rho: &DensityMatrix, e: &PovmSet, tol: f64) -> Result<IncoherenceReport> {
    let dephased = dephase_povm(rho.matrix(), e)?;
    let max_cross = povm_max_cross_norm(rho.matrix(), e);
    Ok(IncoherenceReport {
        incoherent: max_cross <= tol,
        max_cross_norm: max_cross,
        residual: frobenius(&(rho.matrix() - &dephased)),
        dephased_trace: dephased.trace().re,
    })
}

/// Basis index of the N-qubit ket whose single excitation sits on `qubit`,
/// counting qubits left to right (`qubit = 0` is the leftmost, big-endian).
pub(crate) fn single_excitation_index(n: usize, qubit: usize) -> usize {
    1 << (n - 1 - qubit)
}

/// Reference projectors for detecting block coherence of N-qubit W states.
///
/// `P_0`, `P_1` project onto `(|0…01⟩ ∓ |10…0⟩)/√2`, `P_2 … P_{N−1}` onto the
/// remaining single-excitation kets from `|0…010⟩` up to `|010…0⟩`, and
/// `P_N` is the complement.
pub fn wstate_projector_family(n: usize) -> Result<ProjectorSet> {
    if n < 2 {
        return Err(Error::InvalidDimension(format!("W-state family needs N >= 2, got {n}")));
    }
    if n > 12 {
        return Err(Error::InvalidDimension(format!("W-state family limited to N <= 12, got {n}")));
    }
    let dim = 1usize << n;
    let last = single_excitation_index(n, n - 1);
    let first = single_excitation_index(n, 0);
    let h = std::f64::consts::FRAC_1_SQRT_2;

    let column = |amps: &[(usize, f64)]| {
        let mut v = CMatrix::zeros(dim, 1);
        for &(i, a) in amps {
            v[(i, 0)] = a.into();
        }
        v
    };

    let mut blocks = vec![column(&[(last, h), (first, -h)]), column(&[(last, h), (first, h)])];
    let mut used = vec![last, first];
    for qubit in (1..n - 1).rev() {
        let i = single_excitation_index(n, qubit);
        blocks.push(column(&[(i, 1.0)]));
        used.push(i);
    }
    let rest: Vec<usize> = (0..dim).filter(|i| !used.contains(i)).collect();
    let mut complement = CMatrix::zeros(dim, rest.len());
    for (k, &i) in rest.iter().enumerate() {
        complement[(i, k)] = 1.0.into();
    }
    blocks.push(complement);
    Ok(ProjectorSet::from_exact_bases(blocks))
}
