use serde::{Deserialize, Serialize};

/// One factor of a composite Hilbert space.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Factor {
    /// Truncated momentum lattice: basis states |p = nħk⟩ with n ∈ [−N, N],
    /// dimension 2N + 1. The spacing is ħk so both even and odd sublattices
    /// are representable.
    MomentumLattice { cutoff: usize },
    /// Truncated Fock space |0⟩ … |N_F − 1⟩, dimension N_F.
    FockSpace { dim: usize },
}

impl Factor {
    pub fn lattice(cutoff: usize) -> Self {
        Factor::MomentumLattice { cutoff }
    }

    pub fn fock(dim: usize) -> Self {
        Factor::FockSpace { dim }
    }

    pub fn dim(&self) -> usize {
        match self {
            Factor::MomentumLattice { cutoff } => 2 * cutoff + 1,
            Factor::FockSpace { dim } => *dim,
        }
    }
}

/// Ordered list of factors describing a composite space.
///
/// The composite index is row-major: the first factor varies slowest. The
/// crate-wide ordering convention is (particle 1, particle 2, field).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpaceDescriptor {
    factors: Vec<Factor>,
}

impl SpaceDescriptor {
    pub fn new(factors: Vec<Factor>) -> Self {
        assert!(!factors.is_empty(), "a space needs at least one factor");
        SpaceDescriptor { factors }
    }

    pub fn single(factor: Factor) -> Self {
        SpaceDescriptor {
            factors: vec![factor],
        }
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn total_dim(&self) -> usize {
        self.factors.iter().map(Factor::dim).product()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.factors.iter().map(Factor::dim).collect()
    }

    /// Row-major strides; `strides()[f]` is the index step of factor f.
    pub fn strides(&self) -> Vec<usize> {
        let dims = self.dims();
        let mut strides = vec![1usize; dims.len()];
        for i in (0..dims.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * dims[i + 1];
        }
        strides
    }

    /// Space consisting of the single factor at `idx`.
    pub fn factor_space(&self, idx: usize) -> SpaceDescriptor {
        SpaceDescriptor::single(self.factors[idx].clone())
    }

    /// Composite index of the given per-factor coordinates.
    pub fn flat_index(&self, coords: &[usize]) -> usize {
        debug_assert_eq!(coords.len(), self.factors.len());
        self.strides()
            .iter()
            .zip(coords)
            .map(|(s, c)| s * c)
            .sum()
    }

    /// Short human-readable form, e.g. `(ML(12), ML(12), F(6))`.
    pub fn describe(&self) -> String {
        let parts: Vec<String> = self
            .factors
            .iter()
            .map(|f| match f {
                Factor::MomentumLattice { cutoff } => format!("ML({cutoff})"),
                Factor::FockSpace { dim } => format!("F({dim})"),
            })
            .collect();
        format!("({})", parts.join(", "))
    }
}
