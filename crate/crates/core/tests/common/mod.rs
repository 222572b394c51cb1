//! Independent oracles and fixtures shared by the integration tests.
//!
//! Everything here uses plain index loops over the matrices so that it does
//! not share a code path with the library routines it checks.

#![allow(dead_code)]

use cohwit::estimation::DegenerateHamiltonian;
use cohwit::linalg::{c, CMatrix, CVector, DensityMatrix, HermitianOperator, PureState};
use cohwit::measurements::{PovmSet, ProjectorSet};
use cohwit::states::{random_density, random_unitary};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn naive_mul(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (n, k, m) = (a.nrows(), a.ncols(), b.ncols());
    let mut out = CMatrix::zeros(n, m);
    for i in 0..n {
        for j in 0..m {
            let mut acc = Complex64::new(0.0, 0.0);
            for l in 0..k {
                acc += a[(i, l)] * b[(l, j)];
            }
            out[(i, j)] = acc;
        }
    }
    out
}

pub fn naive_trace_mul(a: &CMatrix, b: &CMatrix) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..a.nrows() {
        for l in 0..a.ncols() {
            acc += a[(i, l)] * b[(l, i)];
        }
    }
    acc
}

pub fn naive_sandwich_sum(ops: &[&CMatrix], rho: &CMatrix) -> CMatrix {
    let d = rho.nrows();
    let mut out = CMatrix::zeros(d, d);
    for k in ops {
        out += naive_mul(&naive_mul(k, rho), k);
    }
    out
}

pub fn naive_frobenius(m: &CMatrix) -> f64 {
    let mut acc = 0.0;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            acc += m[(i, j)].norm_sqr();
        }
    }
    acc.sqrt()
}

pub fn naive_mat_vec(m: &CMatrix, v: &CVector) -> CVector {
    CVector::from_fn(m.nrows(), |i, _| {
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..m.ncols() {
            acc += m[(i, j)] * v[j];
        }
        acc
    })
}

pub fn naive_inner(a: &CVector, b: &CVector) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// `⟨ψ|H²|ψ⟩ − ⟨ψ|H|ψ⟩²` by direct arithmetic.
pub fn variance(psi: &PureState, h: &CMatrix) -> f64 {
    let v = psi.amplitudes();
    let hv = naive_mat_vec(h, v);
    let mean = naive_inner(v, &hv).re;
    let second = naive_inner(&hv, &hv).re;
    second - mean * mean
}

/// Operators of a projector set as raw matrices.
pub fn ops(p: &ProjectorSet) -> Vec<CMatrix> {
    p.projectors().iter().map(|q| q.matrix().clone()).collect()
}

/// `H = U diag(spectrum) U†` with a random unitary and repeated levels.
pub fn random_degenerate_hamiltonian(dim: usize, seed: u64) -> DegenerateHamiltonian {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let levels = [-2.0, -1.0, 0.0, 1.0, 2.0, 3.0];
    let n_levels = rng.random_range(1..=dim.min(levels.len()));
    let mut spectrum: Vec<f64> = levels[..n_levels].to_vec();
    while spectrum.len() < dim {
        spectrum.push(levels[rng.random_range(0..n_levels)]);
    }
    let u = random_unitary(dim, seed.wrapping_mul(31).wrapping_add(7)).unwrap();
    let diag = HermitianOperator::from_real_diagonal(&spectrum).into_matrix();
    let h = HermitianOperator::new(cohwit::linalg::hermitian_part(&(&u * diag * u.adjoint()))).unwrap();
    DegenerateHamiltonian::new(h).unwrap()
}

/// A non-projective POVM that is diagonal in a random basis, together with
/// a state that is exactly incoherent with respect to it.
///
/// Basis vectors are split into "sharp" ones, owned by a single effect with
/// weight one, and "fuzzy" ones shared by several effects. The state lives on
/// the sharp vectors and has no coherence between vectors of different owners.
pub struct CommutingPovmCase {
    pub povm: PovmSet,
    pub state: DensityMatrix,
}

pub fn commuting_povm_case(dim: usize, seed: u64) -> CommutingPovmCase {
    assert!(dim >= 3);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_effects = rng.random_range(2..=3);
    let n_fuzzy = rng.random_range(1..dim - 1);
    let n_sharp = dim - n_fuzzy;
    let u = random_unitary(dim, seed ^ 0xdead_beef).unwrap();

    let mut weights = vec![vec![0.0; dim]; n_effects];
    let mut owner = vec![usize::MAX; dim];
    for (k, slot) in owner.iter_mut().enumerate().take(n_sharp) {
        let i = if k < n_effects { k } else { rng.random_range(0..n_effects) };
        *slot = i;
        weights[i][k] = 1.0;
    }
    for k in n_sharp..dim {
        let raw: Vec<f64> = (0..n_effects).map(|_| rng.random_range(0.1..1.0)).collect();
        let total: f64 = raw.iter().sum();
        for (w, r) in weights.iter_mut().zip(&raw) {
            w[k] = r / total;
        }
    }
    let effects: Vec<CMatrix> = weights
        .iter()
        .map(|w| {
            let d = HermitianOperator::from_real_diagonal(w).into_matrix();
            cohwit::linalg::hermitian_part(&(&u * d * u.adjoint()))
        })
        .collect();
    let povm = PovmSet::new(effects).unwrap();

    let rho = random_density(dim, seed.wrapping_add(3)).unwrap();
    let local = u.adjoint() * rho.matrix() * &u;
    let mut kept = CMatrix::zeros(dim, dim);
    for a in 0..n_sharp {
        for b in 0..n_sharp {
            if owner[a] == owner[b] {
                kept[(a, b)] = local[(a, b)];
            }
        }
    }
    let trace = kept.trace().re;
    let state = cohwit::linalg::hermitian_part(&(&u * kept.unscale(trace) * u.adjoint()));
    CommutingPovmCase { povm, state: DensityMatrix::new(state).unwrap() }
}

pub fn cplx(re: f64) -> Complex64 {
    c(re, 0.0)
}

/// Succeeds iff the Hermitian matrix is positive definite (plain Cholesky
/// with a real-pivot check).
pub fn cholesky_succeeds(m: &CMatrix) -> bool {
    let d = m.nrows();
    let mut l = CMatrix::zeros(d, d);
    for j in 0..d {
        let mut diag = m[(j, j)].re;
        for k in 0..j {
            diag -= l[(j, k)].norm_sqr();
        }
        if diag.is_nan() || diag <= 0.0 {
            return false;
        }
        let pivot = diag.sqrt();
        l[(j, j)] = c(pivot, 0.0);
        for i in (j + 1)..d {
            let mut acc = m[(i, j)];
            for k in 0..j {
                acc -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = acc / pivot;
        }
    }
    true
}
