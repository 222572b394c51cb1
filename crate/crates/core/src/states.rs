//! State and operator factory.
//!
//! Computational basis indices are big-endian: the leftmost qubit of a ket is
//! the most significant bit, so `|10…0⟩` has index `2^(N−1)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{c, eigh, CMatrix, CVector, DensityMatrix, HermitianOperator, PureState};
use crate::measurements::{dephase_block, single_excitation_index, ProjectorSet};

/// Largest qubit count accepted by the W-state constructors (d = 4096).
pub const MAX_QUBITS: usize = 12;

fn check_qubits(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidDimension(format!("W states need N >= 2, got {n}")));
    }
    if n > MAX_QUBITS {
        return Err(Error::InvalidDimension(format!("W states limited to N <= {MAX_QUBITS}, got {n}")));
    }
    Ok(())
}

/// `|W_N⟩`: equal superposition of the N single-excitation kets.
pub fn w_state(n: usize) -> Result<PureState> {
    check_qubits(n)?;
    let mut v = CVector::zeros(1 << n);
    let amp = 1.0 / (n as f64).sqrt();
    for qubit in 0..n {
        v[single_excitation_index(n, qubit)] = c(amp, 0.0);
    }
    PureState::normalized(v)
}

/// `p |W_N⟩⟨W_N| + (1 − p) I / 2^N`.
pub fn noisy_w_state(n: usize, p: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("mixing weight p = {p} outside [0, 1]")));
    }
    let w = w_state(n)?;
    let dim = 1usize << n;
    let m = w.projector().matrix().scale(p) + CMatrix::identity(dim, dim).scale((1.0 - p) / dim as f64);
    DensityMatrix::new(m)
}

fn gaussian_matrix(rng: &mut ChaCha8Rng, dim: usize) -> CMatrix {
    CMatrix::from_fn(dim, dim, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c(re, im)
    })
}

fn check_positive_dim(dim: usize) -> Result<()> {
    if dim < 1 {
        return Err(Error::InvalidDimension("dimension must be >= 1".into()));
    }
    Ok(())
}

/// Seeded random state `GG† / Tr(GG†)` with complex Gaussian `G`.
pub fn random_density(dim: usize, seed: u64) -> Result<DensityMatrix> {
    check_positive_dim(dim)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = gaussian_matrix(&mut rng, dim);
    DensityMatrix::from_psd_unnormalized(&(&g * g.adjoint()))
}

/// Seeded random pure state with complex Gaussian amplitudes.
pub fn random_pure(dim: usize, seed: u64) -> Result<PureState> {
    check_positive_dim(dim)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v = CVector::from_fn(dim, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c(re, im)
    });
    PureState::normalized(v)
}

/// Seeded random Hermitian operator `(G + G†) / 2`.
pub fn random_hermitian(dim: usize, seed: u64) -> Result<HermitianOperator> {
    check_positive_dim(dim)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = gaussian_matrix(&mut rng, dim);
    HermitianOperator::new((&g + g.adjoint()).scale(0.5))
}

/// Seeded random unitary from the eigenvectors of a random Hermitian operator.
pub fn random_unitary(dim: usize, seed: u64) -> Result<CMatrix> {
    Ok(eigh(&random_hermitian(dim, seed)?).vectors)
}

/// Random projector set: random block sizes summing to `dim`, blocks spanned
/// by consecutive columns of a random unitary.
pub fn random_projector_set(dim: usize, seed: u64) -> Result<ProjectorSet> {
    check_positive_dim(dim)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let u = random_unitary(dim, seed)?;
    let mut blocks = Vec::new();
    let mut start = 0;
    while start < dim {
        let size = rng.random_range(1..=dim - start);
        blocks.push(u.columns(start, size).into_owned());
        start += size;
    }
    ProjectorSet::from_block_bases(&blocks)
}

/// Random block-incoherent state `Δ̃(ρ)` with `ρ = random_density`.
pub fn random_block_incoherent(p: &ProjectorSet, seed: u64) -> Result<DensityMatrix> {
    let rho = random_density(p.dim(), seed)?;
    let dephased = dephase_block(rho.matrix(), p)?;
    DensityMatrix::from_psd_unnormalized(&dephased)
}

/// What to build, as named on the command line.
#[derive(Debug, Clone, PartialEq)]
pub enum StateSpec {
    Pure(PureState),
    WState { n: usize },
    NoisyWState { n: usize, p: f64 },
    MaximallyMixed { dim: usize },
    Random { dim: usize, seed: u64 },
    RandomBlockIncoherent { dim: usize, seed: u64 },
}

impl StateSpec {
    pub fn build(&self) -> Result<DensityMatrix> {
        match self {
            StateSpec::Pure(phi) => Ok(DensityMatrix::from_pure(phi)),
            StateSpec::WState { n } => Ok(DensityMatrix::from_pure(&w_state(*n)?)),
            StateSpec::NoisyWState { n, p } => noisy_w_state(*n, *p),
            StateSpec::MaximallyMixed { dim } => {
                check_positive_dim(*dim)?;
                Ok(DensityMatrix::maximally_mixed(*dim))
            }
            StateSpec::Random { dim, seed } => random_density(*dim, *seed),
            StateSpec::RandomBlockIncoherent { dim, seed } => {
                random_block_incoherent(&random_projector_set(*dim, *seed)?, seed.wrapping_add(1))
            }
        }
    }

    /// The pure vector, for kinds that have one.
    pub fn pure(&self) -> Result<Option<PureState>> {
        match self {
            StateSpec::Pure(phi) => Ok(Some(phi.clone())),
            StateSpec::WState { n } => Ok(Some(w_state(*n)?)),
            _ => Ok(None),
        }
    }
}
