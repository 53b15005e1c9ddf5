//! Composite Hilbert spaces, sparse operators and state algebra.
//!
//! Spaces are ordered tensor products of two factor kinds: truncated
//! momentum lattices (basis |p = nħk⟩, n ∈ [−N, N]) and truncated Fock
//! spaces (basis |0⟩ … |N_F − 1⟩). The composite index is row-major in the
//! declared factor order, which is fixed crate-wide as
//! (particle 1, particle 2, field).
//!
//! Operators silently drop momentum-shift components that fall off the
//! lattice edge; the truncation is made observable by the
//! [`boundary_leakage`] monitor rather than hidden in the algebra.

mod operator;
mod space;
mod state;

pub use operator::{tensor, SparseOperator};
pub use space::{Factor, SpaceDescriptor};
pub use state::{DensityMatrix, StateVector};

use crate::{Error, Result};
use num_complex::Complex;

/// Double-precision complex scalar used throughout the crate.
pub type C64 = Complex<f64>;

/// Entrywise tolerance for operators flagged Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Tolerance on ‖ψ‖² for states flagged normalized.
pub const NORM_TOL: f64 = 1e-10;

/// Number of lattice sites per edge counted by the leakage monitor.
pub const EDGE_BAND: usize = 2;

/// Trig-potential operators on a momentum lattice, expressed as
/// momentum-shift operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrigKind {
    /// cos(2kx): |n⟩ ↦ ½(|n+2⟩ + |n−2⟩)
    Cos2kx,
    /// sin(2kx): |n⟩ ↦ (1/2i)(|n+2⟩ − |n−2⟩)
    Sin2kx,
    /// cos²(kx) = ½(1 + cos 2kx)
    CosSqKx,
    /// sin²(kx) = ½(1 − cos 2kx)
    SinSqKx,
}

/// Annihilation operator a|n⟩ = √n |n−1⟩ on a truncated Fock factor.
///
/// The top Fock level is truncated away; cutoffs below 2 are rejected
/// because they cannot carry any ladder action.
pub fn annihilation_operator(factor: &Factor) -> Result<SparseOperator> {
    let dim = fock_dim(factor)?;
    if dim < 2 {
        return Err(Error::InvalidCutoff { min: 2, got: dim });
    }
    let space = SpaceDescriptor::single(factor.clone());
    let triplets = (1..dim)
        .map(|n| (n - 1, n, C64::new((n as f64).sqrt(), 0.0)))
        .collect();
    SparseOperator::from_triplets(space, triplets, false)
}

/// Number operator a†a = diag(0, 1, …, N_F − 1).
pub fn number_operator(factor: &Factor) -> Result<SparseOperator> {
    let dim = fock_dim(factor)?;
    if dim < 2 {
        return Err(Error::InvalidCutoff { min: 2, got: dim });
    }
    let space = SpaceDescriptor::single(factor.clone());
    let triplets = (1..dim).map(|n| (n, n, C64::new(n as f64, 0.0))).collect();
    SparseOperator::from_triplets(space, triplets, true)
}

/// Dimensionless position quadrature x̃ = (b + b†)/√2 on a Fock factor.
pub fn quadrature_x(factor: &Factor) -> Result<SparseOperator> {
    let b = annihilation_operator(factor)?;
    let sum = b.add(&b.adjoint())?;
    sum.scale(C64::new(1.0 / 2.0_f64.sqrt(), 0.0)).into_hermitian()
}

/// Dimensionless momentum quadrature p̃ = (b − b†)/(i√2) on a Fock factor.
pub fn quadrature_p(factor: &Factor) -> Result<SparseOperator> {
    let b = annihilation_operator(factor)?;
    let diff = b.add(&b.adjoint().scale(C64::new(-1.0, 0.0)))?;
    // 1/(i√2) = −i/√2
    diff.scale(C64::new(0.0, -1.0 / 2.0_f64.sqrt())).into_hermitian()
}

/// Momentum operator p = diag(n) (units of ħk) on a momentum lattice.
pub fn lattice_momentum(factor: &Factor) -> Result<SparseOperator> {
    let n_cut = lattice_cutoff(factor)?;
    let space = SpaceDescriptor::single(factor.clone());
    let triplets = (0..2 * n_cut + 1)
        .map(|i| (i, i, C64::new(i as f64 - n_cut as f64, 0.0)))
        .collect();
    SparseOperator::from_triplets(space, triplets, true)
}

/// Kinetic energy p²/2m = diag(n² ω_R) on a momentum lattice (recoil units).
pub fn kinetic_operator(factor: &Factor) -> Result<SparseOperator> {
    let n_cut = lattice_cutoff(factor)?;
    let space = SpaceDescriptor::single(factor.clone());
    let triplets = (0..2 * n_cut + 1)
        .map(|i| {
            let n = i as f64 - n_cut as f64;
            (i, i, C64::new(n * n, 0.0))
        })
        .collect();
    SparseOperator::from_triplets(space, triplets, true)
}

/// Trigonometric potential factors as momentum-shift operators.
///
/// Components shifted past the lattice edge are dropped.
pub fn trig_operator(factor: &Factor, kind: TrigKind) -> Result<SparseOperator> {
    let n_cut = lattice_cutoff(factor)?;
    if n_cut < 1 {
        return Err(Error::InvalidLattice { min: 1, got: n_cut });
    }
    let dim = 2 * n_cut + 1;
    let space = SpaceDescriptor::single(factor.clone());

    // cos(2kx)|n⟩ = ½(|n+2⟩ + |n−2⟩); sin(2kx)|n⟩ = (1/2i)(|n+2⟩ − |n−2⟩).
    // Matrix entries M[target, source].
    let mut triplets: Vec<(usize, usize, C64)> = Vec::with_capacity(3 * dim);
    let (diag, up_coeff, down_coeff) = match kind {
        TrigKind::Cos2kx => (0.0, C64::new(0.5, 0.0), C64::new(0.5, 0.0)),
        TrigKind::Sin2kx => (0.0, C64::new(0.0, -0.5), C64::new(0.0, 0.5)),
        TrigKind::CosSqKx => (0.5, C64::new(0.25, 0.0), C64::new(0.25, 0.0)),
        TrigKind::SinSqKx => (0.5, C64::new(-0.25, 0.0), C64::new(-0.25, 0.0)),
    };
    for src in 0..dim {
        if diag != 0.0 {
            triplets.push((src, src, C64::new(diag, 0.0)));
        }
        if src + 2 < dim {
            triplets.push((src + 2, src, up_coeff));
        }
        if src >= 2 {
            triplets.push((src - 2, src, down_coeff));
        }
    }
    SparseOperator::from_triplets(space, triplets, true)
}

/// Identity operator on a composite space.
pub fn identity(space: &SpaceDescriptor) -> SparseOperator {
    let dim = space.total_dim();
    let triplets = (0..dim).map(|i| (i, i, C64::new(1.0, 0.0))).collect();
    SparseOperator::from_triplets(space.clone(), triplets, true)
        .expect("identity is always valid")
}

/// Objects on which operator expectation values can be taken.
pub trait ExpectationValue {
    fn space(&self) -> &SpaceDescriptor;

    /// ⟨ψ|M|ψ⟩ or Tr(ρM); the spaces must match.
    fn expectation(&self, op: &SparseOperator) -> Result<C64>;
}

/// Expectation value ⟨M⟩ of a Hermitian-flagged operator, as a real number.
///
/// For Hermitian operators on valid states the imaginary part is pure
/// roundoff; anything above tolerance signals a bug and is reported.
pub fn real_expectation<T: ExpectationValue>(state: &T, op: &SparseOperator) -> Result<f64> {
    let v = state.expectation(op)?;
    let tol = 1e-10 * v.re.abs().max(1.0);
    if op.is_hermitian_flagged() && v.im.abs() > tol {
        return Err(Error::Numerical(format!(
            "expectation of Hermitian operator has imaginary part {:.3e}",
            v.im
        )));
    }
    Ok(v.re)
}

/// Total probability on the outermost [`EDGE_BAND`] sites of every momentum
/// lattice factor.
///
/// This is the observable counterpart of the silent shift truncation: when
/// it stays small the lattice cutoff was large enough.
pub fn boundary_leakage_probs(space: &SpaceDescriptor, probs: impl Fn(usize) -> f64) -> f64 {
    let dims = space.dims();
    let edge_factor: Vec<Option<usize>> = space
        .factors()
        .iter()
        .map(|f| match f {
            Factor::MomentumLattice { .. } => Some(f.dim()),
            Factor::FockSpace { .. } => None,
        })
        .collect();
    if edge_factor.iter().all(|e| e.is_none()) {
        return 0.0;
    }
    let mut total = 0.0;
    for idx in 0..space.total_dim() {
        let mut rem = idx;
        let mut on_edge = false;
        for (f, &d) in dims.iter().enumerate().rev() {
            let coord = rem % d;
            rem /= d;
            if let Some(dim) = edge_factor[f] {
                if coord < EDGE_BAND || coord >= dim - EDGE_BAND {
                    on_edge = true;
                }
            }
        }
        if on_edge {
            total += probs(idx);
        }
    }
    total
}

/// Leakage monitor for a state vector.
pub fn boundary_leakage(state: &StateVector) -> f64 {
    boundary_leakage_probs(state.space(), |i| state.amplitudes()[i].norm_sqr())
}

/// Leakage monitor for a density matrix (diagonal probabilities).
pub fn boundary_leakage_dm(rho: &DensityMatrix) -> f64 {
    boundary_leakage_probs(rho.space(), |i| rho.matrix()[(i, i)].re)
}

/// Partial trace over all factors not in `keep`; kept factors retain their
/// original relative order.
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let space = rho.space();
    let keep = canonical_keep(space, keep)?;
    let (kept_offsets, traced_offsets, kept_space) = trace_offsets(space, &keep);

    let k = kept_offsets.len();
    let mut out = nalgebra::DMatrix::<C64>::zeros(k, k);
    let m = rho.matrix();
    for (jj, &oj) in kept_offsets.iter().enumerate() {
        for (ii, &oi) in kept_offsets.iter().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for &ot in &traced_offsets {
                acc += m[(oi + ot, oj + ot)];
            }
            out[(ii, jj)] = acc;
        }
    }
    Ok(DensityMatrix::from_parts_unchecked(kept_space, out))
}

/// Reduced density matrix Tr_traced |ψ⟩⟨ψ| computed directly from a pure
/// state, without materializing the full outer product.
pub fn reduced_density_from_state(psi: &StateVector, keep: &[usize]) -> Result<DensityMatrix> {
    let space = psi.space();
    let keep = canonical_keep(space, keep)?;
    let (kept_offsets, traced_offsets, kept_space) = trace_offsets(space, &keep);

    let k = kept_offsets.len();
    let amps = psi.amplitudes();
    let mut out = nalgebra::DMatrix::<C64>::zeros(k, k);
    for (jj, &oj) in kept_offsets.iter().enumerate() {
        for (ii, &oi) in kept_offsets.iter().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for &ot in &traced_offsets {
                acc += amps[oi + ot] * amps[oj + ot].conj();
            }
            out[(ii, jj)] = acc;
        }
    }
    Ok(DensityMatrix::from_parts_unchecked(kept_space, out))
}

fn canonical_keep(space: &SpaceDescriptor, keep: &[usize]) -> Result<Vec<usize>> {
    if keep.is_empty() {
        return Err(Error::EmptyKeepSet);
    }
    let count = space.factors().len();
    let mut keep: Vec<usize> = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    if let Some(&bad) = keep.iter().find(|&&i| i >= count) {
        return Err(Error::FactorOutOfRange { index: bad, count });
    }
    Ok(keep)
}

/// Flat-index offsets of the kept and traced sub-lattices, plus the kept
/// space descriptor. A full index decomposes as kept_offset + traced_offset.
fn trace_offsets(
    space: &SpaceDescriptor,
    keep: &[usize],
) -> (Vec<usize>, Vec<usize>, SpaceDescriptor) {
    let dims = space.dims();
    let strides = space.strides();
    let traced: Vec<usize> = (0..dims.len()).filter(|i| !keep.contains(i)).collect();

    let offsets = |factors: &[usize]| -> Vec<usize> {
        let mut offs = vec![0usize];
        for &f in factors {
            let mut next = Vec::with_capacity(offs.len() * dims[f]);
            for &o in &offs {
                for c in 0..dims[f] {
                    next.push(o + c * strides[f]);
                }
            }
            offs = next;
        }
        offs
    };

    let kept_space = SpaceDescriptor::new(
        keep.iter().map(|&i| space.factors()[i].clone()).collect(),
    );
    (offsets(keep), offsets(&traced), kept_space)
}

fn fock_dim(factor: &Factor) -> Result<usize> {
    match factor {
        Factor::FockSpace { dim } => Ok(*dim),
        other => Err(Error::WrongFactorStructure {
            expected: "FockSpace".into(),
            got: format!("{other:?}"),
        }),
    }
}

fn lattice_cutoff(factor: &Factor) -> Result<usize> {
    match factor {
        Factor::MomentumLattice { cutoff } => Ok(*cutoff),
        other => Err(Error::WrongFactorStructure {
            expected: "MomentumLattice".into(),
            got: format!("{other:?}"),
        }),
    }
}

#[cfg(test)]
mod tests;
