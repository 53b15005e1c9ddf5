use super::{C64, ExpectationValue, SpaceDescriptor, SparseOperator, NORM_TOL};
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};

/// Complex amplitude vector over a composite space.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    space: SpaceDescriptor,
    amplitudes: DVector<C64>,
    normalized: bool,
}

impl StateVector {
    /// Wrap amplitudes without asserting normalization.
    pub fn new(space: SpaceDescriptor, amplitudes: DVector<C64>) -> Result<Self> {
        if amplitudes.len() != space.total_dim() {
            return Err(Error::DimensionMismatch {
                expected: space.total_dim(),
                got: amplitudes.len(),
            });
        }
        Ok(StateVector {
            space,
            amplitudes,
            normalized: false,
        })
    }

    /// Wrap amplitudes and assert ‖ψ‖² = 1 within [`NORM_TOL`].
    pub fn normalized(space: SpaceDescriptor, amplitudes: DVector<C64>) -> Result<Self> {
        let mut state = Self::new(space, amplitudes)?;
        let n2 = state.norm_sqr();
        if (n2 - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized {
                norm_sqr: n2,
                tol: NORM_TOL,
            });
        }
        state.normalized = true;
        Ok(state)
    }

    /// Basis state |coords⟩ of the composite space.
    pub fn basis_state(space: SpaceDescriptor, coords: &[usize]) -> Self {
        let idx = space.flat_index(coords);
        let mut amplitudes = DVector::zeros(space.total_dim());
        amplitudes[idx] = C64::new(1.0, 0.0);
        StateVector {
            space,
            amplitudes,
            normalized: true,
        }
    }

    pub fn space(&self) -> &SpaceDescriptor {
        &self.space
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn is_normalized_flagged(&self) -> bool {
        self.normalized
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Rescaled copy with ‖ψ‖ = 1.
    pub fn renormalized(&self) -> Result<StateVector> {
        let n = self.norm_sqr().sqrt();
        if n == 0.0 {
            return Err(Error::Numerical("cannot normalize the zero vector".into()));
        }
        let amplitudes = &self.amplitudes / C64::new(n, 0.0);
        Ok(StateVector {
            space: self.space.clone(),
            amplitudes,
            normalized: true,
        })
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if self.space != other.space {
            return Err(Error::SpaceMismatch(format!(
                "{} vs {}",
                self.space.describe(),
                other.space.describe()
            )));
        }
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    /// Product state g₁ ⊗ g₂ ⊗ … from per-factor amplitude vectors.
    pub fn product(space: SpaceDescriptor, factors: &[DVector<C64>]) -> Result<Self> {
        if factors.len() != space.factors().len() {
            return Err(Error::WrongFactorStructure {
                expected: format!("{} factor vectors", space.factors().len()),
                got: format!("{}", factors.len()),
            });
        }
        for (f, vec) in factors.iter().enumerate() {
            if vec.len() != space.factors()[f].dim() {
                return Err(Error::DimensionMismatch {
                    expected: space.factors()[f].dim(),
                    got: vec.len(),
                });
            }
        }
        let mut amps = DVector::from_element(1, C64::new(1.0, 0.0));
        for vec in factors {
            let mut next = DVector::zeros(amps.len() * vec.len());
            for (i, a) in amps.iter().enumerate() {
                for (j, b) in vec.iter().enumerate() {
                    next[i * vec.len() + j] = a * b;
                }
            }
            amps = next;
        }
        Self::new(space, amps)
    }
}

impl ExpectationValue for StateVector {
    fn space(&self) -> &SpaceDescriptor {
        &self.space
    }

    fn expectation(&self, op: &SparseOperator) -> Result<C64> {
        if *op.space() != self.space {
            return Err(Error::SpaceMismatch(format!(
                "state on {} vs operator on {}",
                self.space.describe(),
                op.space().describe()
            )));
        }
        let (rp, ci, vals) = op.csr_parts();
        let amps = self.amplitudes.as_slice();
        let mut acc = C64::new(0.0, 0.0);
        for r in 0..op.dim() {
            let mut mx = C64::new(0.0, 0.0);
            for k in rp[r]..rp[r + 1] {
                mx += vals[k] * amps[ci[k]];
            }
            acc += amps[r].conj() * mx;
        }
        Ok(acc)
    }
}

/// Trace-one positive complex matrix over a composite space.
///
/// [`DensityMatrix::new`] validates Hermiticity (1e-10), unit trace (1e-8)
/// and positivity (min eigenvalue ≥ −1e-8). Hot paths construct via
/// [`DensityMatrix::from_parts_unchecked`] and validate at the boundaries.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    space: SpaceDescriptor,
    matrix: DMatrix<C64>,
}

pub const DM_HERMITIAN_TOL: f64 = 1e-10;
pub const DM_TRACE_TOL: f64 = 1e-8;
pub const DM_EIGEN_TOL: f64 = 1e-8;

impl DensityMatrix {
    pub fn new(space: SpaceDescriptor, matrix: DMatrix<C64>) -> Result<Self> {
        let dm = Self::from_parts_unchecked(space, matrix);
        dm.validate()?;
        Ok(dm)
    }

    pub fn from_parts_unchecked(space: SpaceDescriptor, matrix: DMatrix<C64>) -> Self {
        debug_assert_eq!(matrix.nrows(), space.total_dim());
        debug_assert_eq!(matrix.ncols(), space.total_dim());
        DensityMatrix { space, matrix }
    }

    /// |ψ⟩⟨ψ| of a normalized state.
    pub fn from_pure(state: &StateVector) -> Self {
        let n = state.amplitudes().len();
        let mut m = DMatrix::zeros(n, n);
        for j in 0..n {
            let cj = state.amplitudes()[j].conj();
            for i in 0..n {
                m[(i, j)] = state.amplitudes()[i] * cj;
            }
        }
        DensityMatrix {
            space: state.space().clone(),
            matrix: m,
        }
    }

    pub fn space(&self) -> &SpaceDescriptor {
        &self.space
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn trace(&self) -> C64 {
        (0..self.matrix.nrows()).map(|i| self.matrix[(i, i)]).sum()
    }

    /// Check Hermiticity, unit trace and positivity.
    pub fn validate(&self) -> Result<()> {
        let dim = self.matrix.nrows();
        if dim != self.space.total_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.space.total_dim(),
                got: dim,
            });
        }
        let mut herm_dev = 0.0f64;
        for j in 0..dim {
            for i in 0..=j {
                let d = (self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm();
                herm_dev = herm_dev.max(d);
            }
        }
        if herm_dev > DM_HERMITIAN_TOL {
            return Err(Error::InvalidDensityMatrix(format!(
                "Hermiticity deviation {herm_dev:.3e} exceeds {DM_HERMITIAN_TOL:.0e}"
            )));
        }
        let tr = self.trace();
        if (tr.re - 1.0).abs() > DM_TRACE_TOL || tr.im.abs() > DM_TRACE_TOL {
            return Err(Error::InvalidDensityMatrix(format!(
                "trace {tr} deviates from one beyond {DM_TRACE_TOL:.0e}"
            )));
        }
        let eigs = self.matrix.clone().symmetric_eigenvalues();
        let min_eig = eigs.iter().cloned().fold(f64::INFINITY, f64::min);
        if min_eig < -DM_EIGEN_TOL {
            return Err(Error::InvalidDensityMatrix(format!(
                "minimum eigenvalue {min_eig:.3e} below −{DM_EIGEN_TOL:.0e}"
            )));
        }
        Ok(())
    }

    /// ½(ρ + ρ†) with the trace rescaled to one.
    pub fn hermitized_normalized(&self) -> Result<DensityMatrix> {
        let dim = self.matrix.nrows();
        let mut m = DMatrix::zeros(dim, dim);
        for j in 0..dim {
            for i in 0..dim {
                m[(i, j)] = 0.5 * (self.matrix[(i, j)] + self.matrix[(j, i)].conj());
            }
        }
        let tr: C64 = (0..dim).map(|i| m[(i, i)]).sum();
        if tr.re <= 0.0 {
            return Err(Error::Numerical("non-positive trace".into()));
        }
        let m = m / C64::new(tr.re, 0.0);
        Ok(DensityMatrix {
            space: self.space.clone(),
            matrix: m,
        })
    }
}

impl ExpectationValue for DensityMatrix {
    fn space(&self) -> &SpaceDescriptor {
        &self.space
    }

    /// Tr(ρM) = Σ_{(i,j) ∈ M} M_ij ρ_ji.
    fn expectation(&self, op: &SparseOperator) -> Result<C64> {
        if *op.space() != self.space {
            return Err(Error::SpaceMismatch(format!(
                "density matrix on {} vs operator on {}",
                self.space.describe(),
                op.space().describe()
            )));
        }
        let mut acc = C64::new(0.0, 0.0);
        for (i, j, v) in op.triplets() {
            acc += v * self.matrix[(j, i)];
        }
        Ok(acc)
    }
}
