use super::*;
use approx::assert_relative_eq;
use nalgebra::DVector;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn fock(n: usize) -> Factor {
    Factor::fock(n)
}

fn lattice(n: usize) -> Factor {
    Factor::lattice(n)
}

/// Lattice site index of momentum n on a lattice with cutoff N.
fn site(n: i64, cutoff: usize) -> usize {
    (n + cutoff as i64) as usize
}

#[test]
fn annihilation_ladder_action() {
    let a = annihilation_operator(&fock(6)).unwrap();
    // a|3⟩ = √3 |2⟩
    let psi = StateVector::basis_state(SpaceDescriptor::single(fock(6)), &[3]);
    let out = a.apply(psi.amplitudes());
    assert_relative_eq!(out[2].re, 3.0_f64.sqrt(), epsilon = 1e-15);
    assert_eq!(out.iter().filter(|v| v.norm() > 0.0).count(), 1);
    // a|0⟩ = 0
    let vac = StateVector::basis_state(SpaceDescriptor::single(fock(6)), &[0]);
    assert_eq!(a.apply(vac.amplitudes()).norm(), 0.0);
}

#[test]
fn number_operator_matches_adagger_a() {
    let a = annihilation_operator(&fock(7)).unwrap();
    let n_op = a.adjoint().matmul(&a).unwrap();
    for n in 0..7 {
        let psi = StateVector::basis_state(SpaceDescriptor::single(fock(7)), &[n]);
        let val = psi.expectation(&n_op).unwrap();
        assert_relative_eq!(val.re, n as f64, epsilon = 1e-12);
        assert_relative_eq!(val.im, 0.0, epsilon = 1e-12);
    }
    let direct = number_operator(&fock(7)).unwrap();
    let diff = (direct.to_dense() - n_op.to_dense()).map(|v| v.norm()).max();
    assert!(diff < 1e-14);
}

#[test]
fn annihilation_rejects_tiny_cutoff() {
    assert!(matches!(
        annihilation_operator(&fock(1)),
        Err(crate::Error::InvalidCutoff { .. })
    ));
}

#[test]
fn cos2kx_action_on_zero_momentum() {
    let n_cut = 4;
    let op = trig_operator(&lattice(n_cut), TrigKind::Cos2kx).unwrap();
    let psi = StateVector::basis_state(
        SpaceDescriptor::single(lattice(n_cut)),
        &[site(0, n_cut)],
    );
    let out = op.apply(psi.amplitudes());
    assert_relative_eq!(out[site(2, n_cut)].re, 0.5, epsilon = 1e-15);
    assert_relative_eq!(out[site(-2, n_cut)].re, 0.5, epsilon = 1e-15);
    assert_eq!(out.iter().filter(|v| v.norm() > 0.0).count(), 2);
}

#[test]
fn sin_sq_half_angle_identity() {
    // sin²(kx)|0⟩ = ½|0⟩ − ¼(|+2⟩ + |−2⟩)
    let n_cut = 3;
    let op = trig_operator(&lattice(n_cut), TrigKind::SinSqKx).unwrap();
    let psi = StateVector::basis_state(
        SpaceDescriptor::single(lattice(n_cut)),
        &[site(0, n_cut)],
    );
    let out = op.apply(psi.amplitudes());
    assert_relative_eq!(out[site(0, n_cut)].re, 0.5, epsilon = 1e-15);
    assert_relative_eq!(out[site(2, n_cut)].re, -0.25, epsilon = 1e-15);
    assert_relative_eq!(out[site(-2, n_cut)].re, -0.25, epsilon = 1e-15);
}

#[test]
fn trig_operators_hermitian_on_truncated_lattice() {
    for kind in [
        TrigKind::Cos2kx,
        TrigKind::Sin2kx,
        TrigKind::CosSqKx,
        TrigKind::SinSqKx,
    ] {
        let op = trig_operator(&lattice(5), kind).unwrap();
        assert!(op.is_hermitian_flagged());
        assert!(op.hermiticity_deviation() <= HERMITIAN_TOL);
    }
}

#[test]
fn cos_sin_commute_on_interior_sites() {
    let n_cut = 6;
    let cos = trig_operator(&lattice(n_cut), TrigKind::Cos2kx).unwrap();
    let sin = trig_operator(&lattice(n_cut), TrigKind::Sin2kx).unwrap();
    let comm = cos
        .matmul(&sin)
        .unwrap()
        .add(&sin.matmul(&cos).unwrap().scale(c(-1.0, 0.0)))
        .unwrap();
    let dense = comm.to_dense();
    // Columns for interior source sites |n| ≤ N−2 must vanish exactly.
    for n in -(n_cut as i64 - 2)..=(n_cut as i64 - 2) {
        let col = site(n, n_cut);
        for r in 0..dense.nrows() {
            assert_eq!(dense[(r, col)], c(0.0, 0.0), "residual at ({r}, {col})");
        }
    }
}

#[test]
fn kinetic_is_real_diagonal_with_recoil_values() {
    let n_cut = 4;
    let op = kinetic_operator(&lattice(n_cut)).unwrap();
    assert!(op.is_diagonal());
    let space = SpaceDescriptor::single(lattice(n_cut));
    let zero = StateVector::basis_state(space.clone(), &[site(0, n_cut)]);
    assert_eq!(zero.expectation(&op).unwrap(), c(0.0, 0.0));
    for n in [-2i64, 2] {
        let psi = StateVector::basis_state(space.clone(), &[site(n, n_cut)]);
        assert_relative_eq!(psi.expectation(&op).unwrap().re, 4.0, epsilon = 1e-15);
    }
    assert!(op.triplets().all(|(_, _, v)| v.im == 0.0));
}

#[test]
fn tensor_dimensions_and_mixed_product() {
    let space = SpaceDescriptor::new(vec![fock(3), fock(4)]);
    let a = annihilation_operator(&fock(3)).unwrap();
    let b = annihilation_operator(&fock(4)).unwrap();
    let a_emb = tensor(&space, &[Some(&a), None]).unwrap();
    let b_emb = tensor(&space, &[None, Some(&b)]).unwrap();
    assert_eq!(a_emb.dim(), 12);
    // (A ⊗ I)(I ⊗ B) = A ⊗ B
    let prod = a_emb.matmul(&b_emb).unwrap();
    let direct = tensor(&space, &[Some(&a), Some(&b)]).unwrap();
    assert_eq!(prod.to_dense(), direct.to_dense());
}

#[test]
fn tensor_of_hermitian_factors_is_flagged_hermitian() {
    let space = SpaceDescriptor::new(vec![fock(3), lattice(2)]);
    let n = number_operator(&fock(3)).unwrap();
    let cos = trig_operator(&lattice(2), TrigKind::Cos2kx).unwrap();
    let t = tensor(&space, &[Some(&n), Some(&cos)]).unwrap();
    assert!(t.is_hermitian_flagged());
    assert!(t.hermiticity_deviation() <= HERMITIAN_TOL);
}

#[test]
fn tensor_rejects_mismatched_factor() {
    let space = SpaceDescriptor::new(vec![fock(3), fock(4)]);
    let wrong = annihilation_operator(&fock(5)).unwrap();
    assert!(tensor(&space, &[Some(&wrong), None]).is_err());
}

#[test]
fn expectation_basics() {
    let space = SpaceDescriptor::single(fock(5));
    let n_op = number_operator(&fock(5)).unwrap();
    let vac = StateVector::basis_state(space.clone(), &[0]);
    assert_eq!(vac.expectation(&n_op).unwrap(), c(0.0, 0.0));
    let three = StateVector::basis_state(space.clone(), &[3]);
    assert_relative_eq!(three.expectation(&n_op).unwrap().re, 3.0, epsilon = 1e-14);

    // Tr(ρ·I) = 1 for any valid ρ.
    let rho = DensityMatrix::from_pure(&three);
    let id = identity(&space);
    assert_relative_eq!(rho.expectation(&id).unwrap().re, 1.0, epsilon = 1e-14);

    // Mismatched spaces are rejected.
    let other = StateVector::basis_state(SpaceDescriptor::single(fock(4)), &[0]);
    assert!(other.expectation(&n_op).is_err());
}

#[test]
fn partial_trace_of_product_state() {
    let space = SpaceDescriptor::new(vec![fock(3), fock(4)]);
    let psi = StateVector::product(
        space.clone(),
        &[
            DVector::from_vec(vec![c(0.6, 0.0), c(0.8, 0.0), c(0.0, 0.0)]),
            DVector::from_vec(vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]),
        ],
    )
    .unwrap();
    let rho = DensityMatrix::from_pure(&psi);
    let reduced = partial_trace(&rho, &[0]).unwrap();
    assert_eq!(reduced.space().total_dim(), 3);
    assert_relative_eq!(reduced.matrix()[(0, 0)].re, 0.36, epsilon = 1e-14);
    assert_relative_eq!(reduced.matrix()[(1, 1)].re, 0.64, epsilon = 1e-14);
    assert_relative_eq!(reduced.matrix()[(0, 1)].re, 0.48, epsilon = 1e-14);
    assert_relative_eq!(reduced.trace().re, 1.0, epsilon = 1e-10);
}

#[test]
fn partial_trace_of_bell_state_is_maximally_mixed() {
    let space = SpaceDescriptor::new(vec![fock(2), fock(2)]);
    let inv = 1.0 / 2.0_f64.sqrt();
    let amps = DVector::from_vec(vec![c(0.0, 0.0), c(inv, 0.0), c(inv, 0.0), c(0.0, 0.0)]);
    let bell = StateVector::normalized(space.clone(), amps).unwrap();
    let rho = DensityMatrix::from_pure(&bell);
    for keep in [&[0usize][..], &[1usize][..]] {
        let reduced = partial_trace(&rho, keep).unwrap();
        assert_relative_eq!(reduced.matrix()[(0, 0)].re, 0.5, epsilon = 1e-14);
        assert_relative_eq!(reduced.matrix()[(1, 1)].re, 0.5, epsilon = 1e-14);
        assert_relative_eq!(reduced.matrix()[(0, 1)].norm(), 0.0, epsilon = 1e-14);
    }
}

#[test]
fn partial_trace_preserves_trace_and_keep_all_is_identity() {
    let space = SpaceDescriptor::new(vec![fock(2), fock(3)]);
    let psi = StateVector::product(
        space.clone(),
        &[
            DVector::from_vec(vec![c(0.8, 0.0), c(0.0, 0.6)]),
            DVector::from_vec(vec![c(0.5, 0.0), c(0.5, 0.5), c(0.0, -0.5)]),
        ],
    )
    .unwrap();
    let rho = DensityMatrix::from_pure(&psi);
    let traced = partial_trace(&rho, &[1]).unwrap();
    assert_relative_eq!(traced.trace().re, rho.trace().re, epsilon = 1e-10);
    let full = partial_trace(&rho, &[0, 1]).unwrap();
    assert_eq!(full.matrix(), rho.matrix());
    assert!(matches!(
        partial_trace(&rho, &[]),
        Err(crate::Error::EmptyKeepSet)
    ));
}

#[test]
fn reduced_density_from_state_matches_partial_trace() {
    let space = SpaceDescriptor::new(vec![fock(3), fock(2), fock(2)]);
    let mut amps = DVector::zeros(space.total_dim());
    for (i, v) in amps.iter_mut().enumerate() {
        *v = c((i as f64 * 0.37).sin(), (i as f64 * 0.61).cos());
    }
    let norm = amps.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    amps /= c(norm, 0.0);
    let psi = StateVector::normalized(space.clone(), amps).unwrap();
    let rho = DensityMatrix::from_pure(&psi);
    for keep in [&[0usize][..], &[1], &[2], &[0, 1], &[0, 2], &[1, 2]] {
        let a = partial_trace(&rho, keep).unwrap();
        let b = reduced_density_from_state(&psi, keep).unwrap();
        let diff = (a.matrix() - b.matrix()).map(|v| v.norm()).max();
        assert!(diff < 1e-13, "keep {keep:?} differs by {diff}");
    }
}

#[test]
fn boundary_leakage_counts_edge_band() {
    let space = SpaceDescriptor::new(vec![lattice(3), fock(2)]);
    // Lattice dim 7; edge band = sites {0, 1, 5, 6}.
    let interior = StateVector::basis_state(space.clone(), &[3, 0]);
    assert_eq!(boundary_leakage(&interior), 0.0);
    let edge = StateVector::basis_state(space.clone(), &[6, 1]);
    assert_relative_eq!(boundary_leakage(&edge), 1.0, epsilon = 1e-15);
    let rho = DensityMatrix::from_pure(&edge);
    assert_relative_eq!(boundary_leakage_dm(&rho), 1.0, epsilon = 1e-12);
}

#[test]
fn density_matrix_validation_rejects_bad_inputs() {
    let space = SpaceDescriptor::single(fock(2));
    // Non-unit trace.
    let m = nalgebra::DMatrix::from_diagonal(&DVector::from_vec(vec![c(0.7, 0.0), c(0.7, 0.0)]));
    assert!(DensityMatrix::new(space.clone(), m).is_err());
    // Negative eigenvalue.
    let m = nalgebra::DMatrix::from_diagonal(&DVector::from_vec(vec![c(1.5, 0.0), c(-0.5, 0.0)]));
    assert!(DensityMatrix::new(space.clone(), m).is_err());
    // Valid mixed state passes.
    let m = nalgebra::DMatrix::from_diagonal(&DVector::from_vec(vec![c(0.5, 0.0), c(0.5, 0.0)]));
    assert!(DensityMatrix::new(space, m).is_ok());
}

#[test]
fn normalized_flag_validates() {
    let space = SpaceDescriptor::single(fock(2));
    let amps = DVector::from_vec(vec![c(0.5, 0.0), c(0.5, 0.0)]);
    assert!(StateVector::normalized(space.clone(), amps.clone()).is_err());
    assert!(StateVector::new(space.clone(), amps.clone()).is_ok());
    let ok = StateVector::new(space, amps).unwrap().renormalized().unwrap();
    assert!(ok.is_normalized_flagged());
    assert_relative_eq!(ok.norm_sqr(), 1.0, epsilon = 1e-14);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// Any operator accepted with the Hermitian flag satisfies the
    /// entrywise bound, and symmetrized random operators always pass.
    #[test]
    fn hermitian_flag_contract(seed in 0u64..5000) {
        let dim = 5usize;
        let space = SpaceDescriptor::single(Factor::fock(dim));
        let mut triplets = Vec::new();
        let mut s = seed.wrapping_mul(0x9E3779B97F4A7C15).wrapping_add(1);
        let mut next = || {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            (s as f64 / u64::MAX as f64) - 0.5
        };
        for i in 0..dim {
            for j in 0..dim {
                let v = c(next(), next());
                if i == j {
                    triplets.push((i, j, c(v.re, 0.0)));
                } else {
                    triplets.push((i, j, v));
                    triplets.push((j, i, v.conj()));
                }
            }
        }
        let op = SparseOperator::from_triplets(space, triplets, true).unwrap();
        prop_assert!(op.hermiticity_deviation() <= HERMITIAN_TOL);
    }

    /// tensor(A, tensor(B, C)) equals tensor(tensor(A, B), C) entrywise
    /// after index flattening.
    #[test]
    fn tensor_is_associative(da in 2usize..4, db in 2usize..4, dc in 2usize..4) {
        let fa = Factor::fock(da.max(2));
        let fb = Factor::fock(db.max(2));
        let fc = Factor::fock(dc.max(2));
        let a = annihilation_operator(&fa).unwrap();
        let b = number_operator(&fb).unwrap();
        let cc = annihilation_operator(&fc).unwrap().adjoint();

        let space_abc = SpaceDescriptor::new(vec![fa.clone(), fb.clone(), fc.clone()]);
        let flat = tensor(&space_abc, &[Some(&a), Some(&b), Some(&cc)]).unwrap();

        // (A ⊗ B) ⊗ C via an intermediate two-factor space.
        let space_ab = SpaceDescriptor::new(vec![fa.clone(), fb.clone()]);
        let ab = tensor(&space_ab, &[Some(&a), Some(&b)]).unwrap();
        let ab_single = SparseOperator::from_triplets(
            SpaceDescriptor::single(Factor::fock(da.max(2) * db.max(2))),
            ab.triplets().collect(),
            false,
        ).unwrap();
        let space_ab_c = SpaceDescriptor::new(vec![Factor::fock(da.max(2) * db.max(2)), fc.clone()]);
        let left = tensor(&space_ab_c, &[Some(&ab_single), Some(&cc)]).unwrap();

        // A ⊗ (B ⊗ C) likewise.
        let space_bc = SpaceDescriptor::new(vec![fb, fc]);
        let bc = tensor(&space_bc, &[Some(&b), Some(&cc)]).unwrap();
        let bc_single = SparseOperator::from_triplets(
            SpaceDescriptor::single(Factor::fock(db.max(2) * dc.max(2))),
            bc.triplets().collect(),
            false,
        ).unwrap();
        let space_a_bc = SpaceDescriptor::new(vec![fa, Factor::fock(db.max(2) * dc.max(2))]);
        let right = tensor(&space_a_bc, &[Some(&a), Some(&bc_single)]).unwrap();

        prop_assert_eq!(flat.to_dense(), left.to_dense());
        prop_assert_eq!(flat.to_dense(), right.to_dense());
    }
}
