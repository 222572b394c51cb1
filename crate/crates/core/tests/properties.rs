mod common;

use cohwit::estimation::{
    evolve, group_eigenspaces, hamiltonian_blocks, is_estimable, qfi, sld, DegenerateHamiltonian,
};
use cohwit::linalg::{
    eigh, fidelity_pure, frobenius, is_psd, unitary_exp, CMatrix, DensityMatrix, HermitianOperator,
};
use cohwit::measurements::{
    check_block_incoherent, check_povm_incoherent, dephase_block, dephase_povm, Reference,
};
use cohwit::states::{
    random_block_incoherent, random_density, random_hermitian, random_projector_set, random_pure, random_unitary,
    w_state,
};
use cohwit::witness::{certify_witness, construct_witness, evaluate, violating_state};
use common::*;
use proptest::prelude::*;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(config(500))]

    #[test]
    fn eigh_reconstructs(dim in 2usize..=16, seed in any::<u64>()) {
        let m = random_hermitian(dim, seed).unwrap();
        let eig = eigh(&m);
        let err = naive_frobenius(&(naive_mul(&naive_mul(&eig.vectors, &CMatrix::from_diagonal(
            &cohwit::linalg::CVector::from_iterator(dim, eig.values.iter().map(|&x| cplx(x))))), &eig.vectors.adjoint())
            - m.matrix()));
        prop_assert!(err <= 1e-10 * naive_frobenius(m.matrix()).max(1.0));
        prop_assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
    }
}

proptest! {
    #![proptest_config(config(200))]

    #[test]
    fn psd_matches_cholesky(dim in 1usize..=10, seed in any::<u64>(), shift in -1.0f64..1.0) {
        // ρ − shift·I/d has λ_min = λ_min(ρ) − shift/d
        let rho = random_density(dim, seed).unwrap();
        let shifted = rho.matrix() - CMatrix::identity(dim, dim).scale(shift / dim as f64);
        let m = HermitianOperator::new(shifted.clone()).unwrap();
        let lambda_min = eigh(&m).values[0];
        prop_assume!(lambda_min.abs() > 1e-6);
        let cholesky_ok = cholesky_succeeds(&(shifted + CMatrix::identity(dim, dim).scale(1e-9)));
        prop_assert_eq!(is_psd(&m, 1e-10), cholesky_ok);
    }

    #[test]
    fn unitary_exp_group_law(dim in 1usize..=8, seed in any::<u64>(), a in -5.0f64..5.0, b in -5.0f64..5.0) {
        let h = random_hermitian(dim, seed).unwrap();
        let lhs = unitary_exp(&h, a) * unitary_exp(&h, b);
        prop_assert!(frobenius(&(lhs - unitary_exp(&h, a + b))) <= 1e-10);
        let u = unitary_exp(&h, a);
        prop_assert!(frobenius(&(u.adjoint() * &u - CMatrix::identity(dim, dim))) <= 1e-10);
    }

    #[test]
    fn fidelity_in_unit_interval(dim in 1usize..=12, s1 in any::<u64>(), s2 in any::<u64>()) {
        let f = fidelity_pure(&random_density(dim, s1).unwrap(), &random_pure(dim, s2).unwrap()).unwrap();
        prop_assert!((-1e-10..=1.0 + 1e-10).contains(&f));
    }
}

proptest! {
    #![proptest_config(config(500))]

    #[test]
    fn block_dephasing_idempotent_and_trace_preserving(dim in 1usize..=32, s1 in any::<u64>(), s2 in any::<u64>()) {
        let p = random_projector_set(dim, s1).unwrap();
        let rho = random_density(dim, s2).unwrap();
        let once = dephase_block(rho.matrix(), &p).unwrap();
        let twice = dephase_block(&once, &p).unwrap();
        prop_assert!(frobenius(&(&twice - &once)) <= 1e-10);
        prop_assert!((once.trace().re - 1.0).abs() <= 1e-10);
        let report = check_block_incoherent(&DensityMatrix::new(cohwit::linalg::hermitian_part(&once)).unwrap(), &p, 1e-10).unwrap();
        prop_assert!(report.incoherent);
    }
}

proptest! {
    #![proptest_config(config(100))]

    #[test]
    fn block_dephasing_matches_naive_sum(dim in 1usize..=12, s1 in any::<u64>(), s2 in any::<u64>()) {
        let p = random_projector_set(dim, s1).unwrap();
        let rho = random_density(dim, s2).unwrap();
        let o = ops(&p);
        let refs: Vec<&CMatrix> = o.iter().collect();
        let naive = naive_sandwich_sum(&refs, rho.matrix());
        prop_assert!(naive_frobenius(&(dephase_block(rho.matrix(), &p).unwrap() - naive)) <= 1e-12);
    }

    #[test]
    fn projective_reduction(dim in 1usize..=16, s1 in any::<u64>(), s2 in any::<u64>()) {
        let p = random_projector_set(dim, s1).unwrap();
        let rho = random_density(dim, s2).unwrap();
        let block = dephase_block(rho.matrix(), &p).unwrap();
        let povm = dephase_povm(rho.matrix(), &p.to_povm()).unwrap();
        prop_assert!(frobenius(&(block - povm)) <= 1e-12);
    }

    #[test]
    fn povm_dephasing_preserves_positivity(dim in 3usize..=10, s1 in any::<u64>(), s2 in any::<u64>()) {
        let case = commuting_povm_case(dim, s1);
        let rho = random_density(dim, s2).unwrap();
        let out = HermitianOperator::new(cohwit::linalg::hermitian_part(&dephase_povm(rho.matrix(), &case.povm).unwrap())).unwrap();
        prop_assert!(eigh(&out).values[0] >= -1e-10);
    }

    #[test]
    fn fixed_point_characterization(dim in 1usize..=12, s1 in any::<u64>(), s2 in any::<u64>(), incoherent in any::<bool>()) {
        let p = random_projector_set(dim, s1).unwrap();
        let rho = if incoherent { random_block_incoherent(&p, s2).unwrap() } else { random_density(dim, s2).unwrap() };
        let tol = 1e-10;
        let r = check_block_incoherent(&rho, &p, tol).unwrap();
        let residual = naive_frobenius(&(rho.matrix() - dephase_block(rho.matrix(), &p).unwrap()));
        prop_assert!((r.residual - residual).abs() <= 1e-12);
        if r.incoherent {
            prop_assert!(residual <= p.len() as f64 * tol);
        }
        if residual <= tol {
            prop_assert!(r.incoherent);
        }
        prop_assert_eq!(r.incoherent, incoherent || dim == 1 || p.len() == 1);
    }

    #[test]
    fn povm_reference_state_is_incoherent(dim in 3usize..=10, seed in any::<u64>()) {
        let case = commuting_povm_case(dim, seed);
        prop_assert!(!case.povm.is_projective());
        let r = check_povm_incoherent(&case.state, &case.povm, 1e-10).unwrap();
        prop_assert!(r.incoherent);
        prop_assert!(r.residual <= 1e-10);
    }
}

proptest! {
    #![proptest_config(config(100))]

    #[test]
    fn witness_scale_covariance(dim in 1usize..=10, s1 in any::<u64>(), s2 in any::<u64>(), scale in -3.0f64..3.0) {
        let reference: Reference = random_projector_set(dim, s1).unwrap().into();
        let a = random_hermitian(dim, s2).unwrap();
        let w1 = construct_witness(&a.scale(scale), &reference).unwrap();
        let w2 = construct_witness(&a, &reference).unwrap();
        prop_assert!(frobenius(&(w1.operator().matrix() - w2.operator().matrix().scale(scale))) <= 1e-12);
    }

    #[test]
    fn witness_soundness(dim in 2usize..=10, s1 in any::<u64>(), s2 in any::<u64>(), s3 in any::<u64>()) {
        let p = random_projector_set(dim, s1).unwrap();
        let reference: Reference = p.clone().into();
        let w = construct_witness(&random_hermitian(dim, s2).unwrap(), &reference).unwrap();
        prop_assert!(w.certified());
        let rho = random_density(dim, s3).unwrap();
        if evaluate(&w, &rho).unwrap().detected {
            prop_assert!(!check_block_incoherent(&rho, &p, 1e-10).unwrap().incoherent);
        }
        let delta = random_block_incoherent(&p, s3).unwrap();
        prop_assert!(!evaluate(&w, &delta).unwrap().detected);
    }

    #[test]
    fn witness_operator_completeness(dim in 2usize..=10, s1 in any::<u64>(), s2 in any::<u64>()) {
        let p = random_projector_set(dim, s1).unwrap();
        let w = random_hermitian(dim, s2).unwrap();
        let cert = certify_witness(&w, &p.clone().into(), 1e-10).unwrap();
        let violation = violating_state(&w, &p, 1e-10).unwrap();
        prop_assert_eq!(cert.certified(), violation.is_none());
        if let Some(delta) = violation {
            let value = naive_trace_mul(delta.matrix(), w.matrix()).re;
            prop_assert!((value - cert.dephased_min_eigenvalue()).abs() <= 1e-9);
        }
    }

    #[test]
    fn random_states_are_valid(dim in 1usize..=32, seed in any::<u64>()) {
        let rho = random_density(dim, seed).unwrap();
        prop_assert!((rho.matrix().trace().re - 1.0).abs() <= 1e-10);
        prop_assert!(eigh(rho.operator()).values[0] >= -1e-10);
        let p = random_projector_set(dim, seed).unwrap();
        let delta = random_block_incoherent(&p, seed).unwrap();
        prop_assert!(check_block_incoherent(&delta, &p, 1e-10).unwrap().incoherent);
    }
}

/// Reorders qubits of a big-endian basis index.
fn permute_index(index: usize, n: usize, perm: &[usize]) -> usize {
    let mut out = 0;
    for (target, &source) in perm.iter().enumerate() {
        let bit = (index >> (n - 1 - source)) & 1;
        out |= bit << (n - 1 - target);
    }
    out
}

#[test]
fn w_state_permutation_invariant() {
    for n in 2..=5 {
        let w = w_state(n).unwrap();
        let proj = w.projector();
        let perms: Vec<Vec<usize>> = vec![(0..n).rev().collect(), (1..n).chain(0..1).collect(), {
            let mut p: Vec<usize> = (0..n).collect();
            p.swap(0, n - 1);
            p
        }];
        for perm in perms {
            let d = 1 << n;
            let permuted = CMatrix::from_fn(d, d, |i, j| proj.matrix()[(permute_index(i, n, &perm), permute_index(j, n, &perm))]);
            assert!(frobenius(&(permuted - proj.matrix())) < 1e-14, "n = {n}");
        }
    }
}

#[test]
fn states_valid_across_many_seeds() {
    for seed in 0..1000u64 {
        let dim = 2 + (seed as usize % 31);
        let rho = random_density(dim, seed).unwrap();
        assert!((rho.matrix().trace().re - 1.0).abs() <= 1e-10);
    }
}

proptest! {
    #![proptest_config(config(100))]

    #[test]
    fn qfi_matches_eigenbasis_sum(dim in 2usize..=8, s1 in any::<u64>(), s2 in any::<u64>()) {
        // direct Σ 4 c_m ((c_n − c_m)/(c_n + c_m))² |⟨m|H|n⟩|² with H in the probe eigenbasis
        let h = DegenerateHamiltonian::new(random_hermitian(dim, s1).unwrap()).unwrap();
        let rho = random_density(dim, s2).unwrap();
        let eig = eigh(rho.operator());
        let h_frame = naive_mul(&naive_mul(&eig.vectors.adjoint(), h.operator().matrix()), &eig.vectors);
        let cs = &eig.values;
        let mut expected = 0.0;
        for m in 0..dim {
            for n in 0..dim {
                let ratio = (cs[n] - cs[m]) / (cs[n] + cs[m]);
                expected += 4.0 * cs[m] * ratio * ratio * h_frame[(m, n)].norm_sqr();
            }
        }
        let got = qfi(&rho, &h).unwrap().value;
        prop_assert!((got - expected).abs() <= 1e-8 * expected.max(1.0));
    }

    #[test]
    fn qfi_phase_invariant(dim in 2usize..=8, s1 in any::<u64>(), s2 in any::<u64>(), phi0 in -3.0f64..3.0) {
        let h = DegenerateHamiltonian::new(random_hermitian(dim, s1).unwrap()).unwrap();
        let rho = random_density(dim, s2).unwrap();
        let a = qfi(&rho, &h).unwrap().value;
        let b = qfi(&evolve(&rho, &h, phi0).unwrap(), &h).unwrap().value;
        prop_assert!((a - b).abs() <= 1e-8);
        prop_assert!(a >= -1e-10);
    }

    #[test]
    fn qfi_additive_over_direct_sums(d1 in 1usize..=5, d2 in 1usize..=5, s in any::<u64>(), w in 0.05f64..0.95) {
        // ρ = w ρ1 ⊕ (1−w) ρ2, H = H1 ⊕ H2  ⇒  F = w F1 + (1−w) F2
        let h1 = random_hermitian(d1, s).unwrap();
        let h2 = random_hermitian(d2, s.wrapping_add(1)).unwrap();
        let r1 = random_density(d1, s.wrapping_add(2)).unwrap();
        let r2 = random_density(d2, s.wrapping_add(3)).unwrap();
        let d = d1 + d2;
        let mut hm = CMatrix::zeros(d, d);
        let mut rm = CMatrix::zeros(d, d);
        hm.view_mut((0, 0), (d1, d1)).copy_from(h1.matrix());
        hm.view_mut((d1, d1), (d2, d2)).copy_from(h2.matrix());
        rm.view_mut((0, 0), (d1, d1)).copy_from(&r1.matrix().scale(w));
        rm.view_mut((d1, d1), (d2, d2)).copy_from(&r2.matrix().scale(1.0 - w));
        let h = DegenerateHamiltonian::new(HermitianOperator::new(hm).unwrap());
        prop_assume!(h.is_ok());
        let total = qfi(&DensityMatrix::new(rm).unwrap(), &h.unwrap()).unwrap().value;
        let f1 = qfi(&r1, &DegenerateHamiltonian::new(h1).unwrap()).unwrap().value;
        let f2 = qfi(&r2, &DegenerateHamiltonian::new(h2).unwrap()).unwrap().value;
        prop_assert!((total - (w * f1 + (1.0 - w) * f2)).abs() <= 1e-8);
    }

    #[test]
    fn sld_identity_on_rank_deficient_probe(dim in 2usize..=6, s1 in any::<u64>(), s2 in any::<u64>(), phi in -2.0f64..2.0) {
        let h = DegenerateHamiltonian::new(random_hermitian(dim, s1).unwrap()).unwrap();
        let rho = DensityMatrix::from_pure(&random_pure(dim, s2).unwrap());
        let step = 1e-5;
        let fd = (evolve(&rho, &h, phi + step).unwrap().into_matrix() - evolve(&rho, &h, phi - step).unwrap().into_matrix())
            .unscale(2.0 * step);
        let l = sld(&rho, &h, phi).unwrap();
        let rho_phi = evolve(&rho, &h, phi).unwrap();
        let sym = (l.matrix() * rho_phi.matrix() + rho_phi.matrix() * l.matrix()).scale(0.5);
        prop_assert!(cohwit::linalg::max_abs(&(sym - fd)) <= 1e-6);
    }

    #[test]
    fn blocks_independent_of_intra_level_basis(seed in any::<u64>()) {
        // same H written in two bases that differ by a rotation inside the degenerate level
        let u = random_unitary(4, seed).unwrap();
        let mut v = CMatrix::identity(4, 4);
        v.view_mut((0, 0), (2, 2)).copy_from(&random_unitary(2, seed.wrapping_add(1)).unwrap());
        let diag = HermitianOperator::from_real_diagonal(&[1.0, 1.0, 2.0, 3.0]).into_matrix();
        let h1 = &u * &diag * u.adjoint();
        let uv = &u * v;
        let h2 = &uv * &diag * uv.adjoint();
        let b1 = hamiltonian_blocks(&DegenerateHamiltonian::new(HermitianOperator::new(cohwit::linalg::hermitian_part(&h1)).unwrap()).unwrap()).unwrap();
        let b2 = hamiltonian_blocks(&DegenerateHamiltonian::new(HermitianOperator::new(cohwit::linalg::hermitian_part(&h2)).unwrap()).unwrap()).unwrap();
        for (p, q) in b1.projectors().iter().zip(b2.projectors()) {
            prop_assert!(frobenius(&(p.matrix() - q.matrix())) <= 1e-9);
        }
        let expected = u.columns(0, 2) * u.columns(0, 2).adjoint();
        prop_assert!(frobenius(&(b1.projectors()[0].matrix() - expected)) <= 1e-9);
    }

    #[test]
    fn estimability_matches_evolution(dim in 2usize..=8, s1 in any::<u64>(), s2 in any::<u64>(), incoherent in any::<bool>()) {
        let h = random_degenerate_hamiltonian(dim, s1);
        let blocks = hamiltonian_blocks(&h).unwrap();
        let rho = if incoherent { random_block_incoherent(&blocks, s2).unwrap() } else { random_density(dim, s2).unwrap() };
        let est = is_estimable(&rho, &h, 1e-10).unwrap();
        let max_change = (0..32)
            .map(|k| {
                let phi = 2.0 * std::f64::consts::PI * k as f64 / 32.0;
                frobenius(&(evolve(&rho, &h, phi).unwrap().into_matrix() - rho.matrix()))
            })
            .fold(0.0, f64::max);
        if est.estimable {
            prop_assert!(max_change > 1e-6);
        } else {
            prop_assert!(max_change <= 1e-10);
        }
        if incoherent {
            prop_assert!(!est.estimable);
        }
    }
}

#[test]
fn grouping_reconstructs_hamiltonian() {
    for seed in 0..50u64 {
        let h = random_degenerate_hamiltonian(6, seed);
        let total: usize = h.levels().iter().map(|l| l.degeneracy).sum();
        assert_eq!(total, 6);
        let mut rebuilt = CMatrix::zeros(6, 6);
        for level in h.levels() {
            rebuilt += (&level.basis * level.basis.adjoint()).scale(level.energy);
        }
        assert!(frobenius(&(rebuilt - h.operator().matrix())) <= 1e-10);
        for pair in h.levels().windows(2) {
            assert!(pair[1].energy - pair[0].energy > h.grouping_tol());
        }
        let regrouped = group_eigenspaces(h.operator(), 1e-6).unwrap();
        assert_eq!(regrouped.levels().len(), h.levels().len());
    }
}

#[test]
fn povm_witness_from_commuting_case_has_zero_mean() {
    for seed in 0..50u64 {
        let case = commuting_povm_case(5, seed);
        let reference: Reference = case.povm.clone().into();
        let a = random_hermitian(5, seed + 100).unwrap();
        let dephased = dephase_povm(a.matrix(), &case.povm).unwrap();
        let w = cohwit::linalg::hermitian_part(&(dephased - a.matrix()));
        assert!(naive_trace_mul(case.state.matrix(), &w).norm() <= 1e-9);
        let built = construct_witness(&a, &reference).unwrap();
        assert!(frobenius(&(built.operator().matrix() - w)) < 1e-12);
    }
}
