//! Phase estimation with degenerate Hamiltonians.
//!
//! The eigenspaces of `H` define the block reference of the estimation task:
//! a probe state without coherence between eigenspaces is invariant under
//! `U_φ = e^{−iHφ}` and carries no information about `φ`.

use rayon::prelude::*;

use crate::error::{check_dim, Error, Result};
use crate::linalg::{eigh, CMatrix, DensityMatrix, Eigh, HermitianOperator, PureState};
use crate::measurements::{check_block_incoherent, ProjectorSet};
use crate::witness::{evaluate, Witness};

/// Default single-linkage gap below which eigenvalues count as degenerate.
pub const GROUPING_TOL: f64 = 1e-8;
/// Eigenvalue pairs of the probe with `c_m + c_n` at or below this are
/// dropped from the SLD and QFI sums.
pub const NULL_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct EnergyLevel {
    /// Mean of the clustered eigenvalues.
    pub energy: f64,
    pub degeneracy: usize,
    /// Orthonormal eigenvectors of the level as columns (`d × k`).
    pub basis: CMatrix,
}

impl EnergyLevel {
    pub fn states(&self) -> Vec<PureState> {
        self.basis
            .column_iter()
            .map(|col| PureState::normalized(col.into_owned()).expect("eigenvectors are unit vectors"))
            .collect()
    }
}

/// A Hamiltonian with its eigenvalues grouped into degenerate levels.
#[derive(Debug, Clone)]
pub struct DegenerateHamiltonian {
    operator: HermitianOperator,
    eig: Eigh,
    levels: Vec<EnergyLevel>,
    grouping_tol: f64,
}

impl DegenerateHamiltonian {
    pub fn new(h: HermitianOperator) -> Result<Self> {
        group_eigenspaces(&h, GROUPING_TOL)
    }

    pub fn operator(&self) -> &HermitianOperator {
        &self.operator
    }

    pub fn levels(&self) -> &[EnergyLevel] {
        &self.levels
    }

    pub fn grouping_tol(&self) -> f64 {
        self.grouping_tol
    }

    pub fn dim(&self) -> usize {
        self.operator.dim()
    }

    /// `e^{−iHφ}` from the stored eigendecomposition.
    pub fn propagator(&self, phi: f64) -> CMatrix {
        let mut scaled = self.eig.vectors.clone();
        for (k, &lambda) in self.eig.values.iter().enumerate() {
            let phase = num_complex::Complex64::from_polar(1.0, -lambda * phi);
            scaled.column_mut(k).iter_mut().for_each(|z| *z *= phase);
        }
        scaled * self.eig.vectors.adjoint()
    }
}

/// Clusters the spectrum of `h` by single linkage with gap threshold `tol`.
///
/// Fails with [`Error::DegeneracyAmbiguous`] when a chain of small gaps
/// produces a cluster wider than `tol`.
pub fn group_eigenspaces(h: &HermitianOperator, tol: f64) -> Result<DegenerateHamiltonian> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidParameter(format!("grouping tolerance must be positive, got {tol}")));
    }
    let eig = eigh(h);
    let values = &eig.values;
    let mut clusters: Vec<std::ops::Range<usize>> = Vec::new();
    let mut start = 0;
    for k in 1..=values.len() {
        if k == values.len() || values[k] - values[k - 1] > tol {
            clusters.push(start..k);
            start = k;
        }
    }
    let mut levels = Vec::with_capacity(clusters.len());
    for r in clusters {
        let diameter = values[r.end - 1] - values[r.start];
        if diameter > tol {
            let gaps = values[r.clone()].windows(2).map(|w| w[1] - w[0]).collect();
            return Err(Error::DegeneracyAmbiguous { gaps });
        }
        let energy = values[r.clone()].iter().sum::<f64>() / r.len() as f64;
        levels.push(EnergyLevel {
            energy,
            degeneracy: r.len(),
            basis: eig.vectors.columns(r.start, r.len()).into_owned(),
        });
    }
    Ok(DegenerateHamiltonian { operator: h.clone(), eig, levels, grouping_tol: tol })
}

/// Eigenspace projectors `P_s = Σ_g |s,g⟩⟨s,g|`.
pub fn hamiltonian_blocks(h: &DegenerateHamiltonian) -> Result<ProjectorSet> {
    let bases: Vec<CMatrix> = h.levels.iter().map(|l| l.basis.clone()).collect();
    ProjectorSet::from_block_bases(&bases)
}

/// `ρ_φ = U_φ ρ U_φ†`.
pub fn evolve(rho_in: &DensityMatrix, h: &DegenerateHamiltonian, phi: f64) -> Result<DensityMatrix> {
    check_dim(h.dim(), rho_in.dim())?;
    let u = h.propagator(phi);
    let out = &u * rho_in.matrix() * u.adjoint();
    DensityMatrix::from_hermitian(HermitianOperator::from_hermitian_part(&out))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimability {
    pub estimable: bool,
    /// `‖ρ − Δ̃(ρ)‖_F` with respect to the eigenspaces of `H`.
    pub off_block_norm: f64,
}

/// A probe can reveal `φ` iff it has coherence between eigenspaces of `H`.
pub fn is_estimable(rho_in: &DensityMatrix, h: &DegenerateHamiltonian, tol: f64) -> Result<Estimability> {
    check_dim(h.dim(), rho_in.dim())?;
    let report = check_block_incoherent(rho_in, &hamiltonian_blocks(h)?, tol)?;
    Ok(Estimability { estimable: report.residual > tol, off_block_norm: report.residual })
}

/// `[H, ρ]` in the eigenbasis of `ρ`, i.e. `(c_n − c_m) ⟨m|H|n⟩`.
struct ProbeFrame {
    eig: Eigh,
    commutator: CMatrix,
}

fn probe_frame(rho_in: &DensityMatrix, h: &DegenerateHamiltonian) -> Result<ProbeFrame> {
    check_dim(h.dim(), rho_in.dim())?;
    let eig = eigh(rho_in.operator());
    let hm = h.operator.matrix();
    let rho = rho_in.matrix();
    let comm = hm * rho - rho * hm;
    let commutator = eig.vectors.adjoint() * comm * &eig.vectors;
    Ok(ProbeFrame { eig, commutator })
}

/// Symmetric logarithmic derivative of `ρ_φ`, satisfying
/// `∂_φ ρ_φ = (L ρ_φ + ρ_φ L) / 2`.
pub fn sld(rho_in: &DensityMatrix, h: &DegenerateHamiltonian, phi: f64) -> Result<HermitianOperator> {
    let frame = probe_frame(rho_in, h)?;
    let c = &frame.eig.values;
    let d = c.len();
    let minus_two_i = num_complex::Complex64::new(0.0, -2.0);
    let in_frame = CMatrix::from_fn(d, d, |m, n| {
        let denom = c[m] + c[n];
        if denom <= NULL_TOL {
            0.0.into()
        } else {
            minus_two_i * frame.commutator[(m, n)] / denom
        }
    });
    let v = &frame.eig.vectors;
    let u = h.propagator(phi);
    let l = &u * (v * in_frame * v.adjoint()) * u.adjoint();
    Ok(HermitianOperator::from_hermitian_part(&l))
}

#[derive(Debug, Clone, PartialEq)]
pub struct QfiResult {
    pub value: f64,
    /// Eigenvalues `c_n` of the probe, ascending.
    pub eigen_spectrum: Vec<f64>,
    /// Ordered `(m, n)` pairs dropped because `c_m + c_n ≤ NULL_TOL`.
    pub skipped_pairs: usize,
}

/// Quantum Fisher information `Σ_{m,n} 4 c_m ((c_n − c_m)/(c_n + c_m))² |⟨m|H|n⟩|²`.
///
/// Evaluated on the probe itself; the value does not depend on `φ`.
pub fn qfi(rho_in: &DensityMatrix, h: &DegenerateHamiltonian) -> Result<QfiResult> {
    let frame = probe_frame(rho_in, h)?;
    let c = &frame.eig.values;
    let mut value = 0.0;
    let mut skipped_pairs = 0;
    for (m, &cm) in c.iter().enumerate() {
        for (n, &cn) in c.iter().enumerate() {
            let denom = cm + cn;
            if denom <= NULL_TOL {
                skipped_pairs += 1;
                continue;
            }
            // |⟨m|[H,ρ]|n⟩|² = (c_n − c_m)² |⟨m|H|n⟩|²
            value += 4.0 * cm * frame.commutator[(m, n)].norm_sqr() / (denom * denom);
        }
    }
    Ok(QfiResult { value, eigen_spectrum: c.clone(), skipped_pairs })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub phi: f64,
    pub expectation: f64,
    pub detection_value: f64,
}

/// `steps` evenly spaced points from `start` to `end` inclusive.
pub fn phi_grid(start: f64, end: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..steps)
            .map(|k| start + (end - start) * k as f64 / (steps - 1) as f64)
            .collect(),
    }
}

/// Witness expectation `Tr(ρ_φ W)` along a grid of phases, in grid order.
pub fn sweep(rho_in: &DensityMatrix, h: &DegenerateHamiltonian, w: &Witness, phis: &[f64]) -> Result<Vec<SweepRow>> {
    check_dim(h.dim(), rho_in.dim())?;
    check_dim(h.dim(), w.operator().dim())?;
    phis.par_iter()
        .map(|&phi| {
            let r = evaluate(w, &evolve(rho_in, h, phi)?)?;
            Ok(SweepRow { phi, expectation: r.expectation, detection_value: r.detection_value })
        })
        .collect()
}
