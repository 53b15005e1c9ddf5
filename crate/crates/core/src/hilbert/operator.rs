use super::{C64, SpaceDescriptor, HERMITIAN_TOL};
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};

/// Sparse complex operator on a composite space (CSR storage).
///
/// The Hermitian flag is metadata validated at construction: a flagged
/// operator deviates from its adjoint by at most [`HERMITIAN_TOL`]
/// entrywise. Values are immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    space: SpaceDescriptor,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<C64>,
    hermitian: bool,
}

impl SparseOperator {
    /// Build from coordinate-format entries; duplicates are summed and
    /// exact zeros dropped. Rejects out-of-range indices, and rejects the
    /// Hermitian flag if the entries do not support it.
    pub fn from_triplets(
        space: SpaceDescriptor,
        mut triplets: Vec<(usize, usize, C64)>,
        hermitian: bool,
    ) -> Result<Self> {
        let dim = space.total_dim();
        for &(r, c, _) in &triplets {
            if r >= dim || c >= dim {
                return Err(Error::IndexOutOfRange { row: r, col: c, dim });
            }
        }
        triplets.sort_unstable_by_key(|&(r, c, _)| (r, c));

        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        row_ptr.push(0);
        let mut row = 0usize;
        for (r, c, v) in triplets {
            while row < r {
                row_ptr.push(col_idx.len());
                row += 1;
            }
            if let (Some(&last_c), true) = (col_idx.last(), row_ptr.len() == r + 1) {
                if last_c == c && col_idx.len() > row_ptr[r] {
                    *values.last_mut().unwrap() += v;
                    continue;
                }
            }
            col_idx.push(c);
            values.push(v);
        }
        while row < dim {
            row_ptr.push(col_idx.len());
            row += 1;
        }

        // Drop exact zeros produced by cancellation.
        let mut op = SparseOperator {
            space,
            row_ptr,
            col_idx,
            values,
            hermitian: false,
        };
        op.prune_zeros();

        if hermitian {
            let dev = op.hermiticity_deviation();
            if dev > HERMITIAN_TOL {
                return Err(Error::NotHermitian {
                    deviation: dev,
                    tol: HERMITIAN_TOL,
                });
            }
            op.hermitian = true;
        }
        Ok(op)
    }

    fn prune_zeros(&mut self) {
        if !self.values.iter().any(|v| v.re == 0.0 && v.im == 0.0) {
            return;
        }
        let dim = self.dim();
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut col_idx = Vec::with_capacity(self.col_idx.len());
        let mut values = Vec::with_capacity(self.values.len());
        row_ptr.push(0);
        for r in 0..dim {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                let v = self.values[k];
                if v.re != 0.0 || v.im != 0.0 {
                    col_idx.push(self.col_idx[k]);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        self.row_ptr = row_ptr;
        self.col_idx = col_idx;
        self.values = values;
    }

    pub fn space(&self) -> &SpaceDescriptor {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.row_ptr.len() - 1
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn is_hermitian_flagged(&self) -> bool {
        self.hermitian
    }

    /// Iterate over stored entries as (row, col, value).
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.dim()).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1])
                .map(move |k| (r, self.col_idx[k], self.values[k]))
        })
    }

    /// Max entrywise |M − M†|.
    pub fn hermiticity_deviation(&self) -> f64 {
        let adj = self.adjoint_raw();
        max_abs_entry_diff(self, &adj)
    }

    /// y = M x into a preallocated buffer.
    pub fn apply_into(&self, x: &DVector<C64>, y: &mut DVector<C64>) {
        debug_assert_eq!(x.len(), self.dim());
        debug_assert_eq!(y.len(), self.dim());
        let xs = x.as_slice();
        let ys = y.as_mut_slice();
        for r in 0..self.dim() {
            let mut acc = C64::new(0.0, 0.0);
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.values[k] * xs[self.col_idx[k]];
            }
            ys[r] = acc;
        }
    }

    /// M x as a fresh vector.
    pub fn apply(&self, x: &DVector<C64>) -> DVector<C64> {
        let mut y = DVector::zeros(self.dim());
        self.apply_into(x, &mut y);
        y
    }

    /// M + N; requires equal spaces. Hermitian iff both operands are.
    pub fn add(&self, other: &SparseOperator) -> Result<SparseOperator> {
        if self.space != other.space {
            return Err(Error::SpaceMismatch(format!(
                "{} vs {}",
                self.space.describe(),
                other.space.describe()
            )));
        }
        let dim = self.dim();
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for r in 0..dim {
            let (mut i, ie) = (self.row_ptr[r], self.row_ptr[r + 1]);
            let (mut j, je) = (other.row_ptr[r], other.row_ptr[r + 1]);
            while i < ie || j < je {
                let ci = if i < ie { self.col_idx[i] } else { usize::MAX };
                let cj = if j < je { other.col_idx[j] } else { usize::MAX };
                if ci < cj {
                    col_idx.push(ci);
                    values.push(self.values[i]);
                    i += 1;
                } else if cj < ci {
                    col_idx.push(cj);
                    values.push(other.values[j]);
                    j += 1;
                } else {
                    let v = self.values[i] + other.values[j];
                    if v.re != 0.0 || v.im != 0.0 {
                        col_idx.push(ci);
                        values.push(v);
                    }
                    i += 1;
                    j += 1;
                }
            }
            row_ptr.push(col_idx.len());
        }
        Ok(SparseOperator {
            space: self.space.clone(),
            row_ptr,
            col_idx,
            values,
            hermitian: self.hermitian && other.hermitian,
        })
    }

    /// c · M. The Hermitian flag survives only real scaling.
    pub fn scale(&self, c: C64) -> SparseOperator {
        let mut out = self.clone();
        for v in &mut out.values {
            *v *= c;
        }
        out.hermitian = self.hermitian && c.im == 0.0;
        out
    }

    /// M · N (sparse × sparse); requires equal spaces. The product is not
    /// flagged Hermitian (generally it is not, even for Hermitian factors).
    pub fn matmul(&self, other: &SparseOperator) -> Result<SparseOperator> {
        if self.space != other.space {
            return Err(Error::SpaceMismatch(format!(
                "{} vs {}",
                self.space.describe(),
                other.space.describe()
            )));
        }
        let dim = self.dim();
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);

        let mut acc: Vec<C64> = vec![C64::new(0.0, 0.0); dim];
        let mut marker: Vec<usize> = vec![usize::MAX; dim];
        let mut touched: Vec<usize> = Vec::new();
        for r in 0..dim {
            touched.clear();
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                let a = self.values[k];
                let m = self.col_idx[k];
                for l in other.row_ptr[m]..other.row_ptr[m + 1] {
                    let c = other.col_idx[l];
                    if marker[c] != r {
                        marker[c] = r;
                        acc[c] = C64::new(0.0, 0.0);
                        touched.push(c);
                    }
                    acc[c] += a * other.values[l];
                }
            }
            touched.sort_unstable();
            for &c in &touched {
                let v = acc[c];
                if v.re != 0.0 || v.im != 0.0 {
                    col_idx.push(c);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Ok(SparseOperator {
            space: self.space.clone(),
            row_ptr,
            col_idx,
            values,
            hermitian: false,
        })
    }

    /// M† (conjugate transpose).
    pub fn adjoint(&self) -> SparseOperator {
        self.adjoint_raw()
    }

    fn adjoint_raw(&self) -> SparseOperator {
        let dim = self.dim();
        let mut counts = vec![0usize; dim + 1];
        for &c in &self.col_idx {
            counts[c + 1] += 1;
        }
        for i in 0..dim {
            counts[i + 1] += counts[i];
        }
        let mut col_idx = vec![0usize; self.nnz()];
        let mut values = vec![C64::new(0.0, 0.0); self.nnz()];
        let mut next = counts.clone();
        for r in 0..dim {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                let c = self.col_idx[k];
                let pos = next[c];
                next[c] += 1;
                col_idx[pos] = r;
                values[pos] = self.values[k].conj();
            }
        }
        SparseOperator {
            space: self.space.clone(),
            row_ptr: counts,
            col_idx,
            values,
            hermitian: self.hermitian,
        }
    }

    /// Re-validate Hermiticity and set the flag.
    pub fn into_hermitian(self) -> Result<SparseOperator> {
        let dev = self.hermiticity_deviation();
        if dev > HERMITIAN_TOL {
            return Err(Error::NotHermitian {
                deviation: dev,
                tol: HERMITIAN_TOL,
            });
        }
        let mut op = self;
        op.hermitian = true;
        Ok(op)
    }

    /// Dense copy, for tests and small-system work.
    pub fn to_dense(&self) -> DMatrix<C64> {
        let dim = self.dim();
        let mut m = DMatrix::zeros(dim, dim);
        for (r, c, v) in self.triplets() {
            m[(r, c)] += v;
        }
        m
    }

    /// Read-only CSR views for the dense-matrix kernels.
    pub(crate) fn csr_parts(&self) -> (&[usize], &[usize], &[C64]) {
        (&self.row_ptr, &self.col_idx, &self.values)
    }

    /// True if all entries sit on the diagonal.
    pub fn is_diagonal(&self) -> bool {
        self.triplets().all(|(r, c, _)| r == c)
    }
}

/// Max entrywise |A − B| over the union sparsity pattern.
fn max_abs_entry_diff(a: &SparseOperator, b: &SparseOperator) -> f64 {
    let dim = a.dim();
    let mut max = 0.0f64;
    for r in 0..dim {
        let (mut i, ie) = (a.row_ptr[r], a.row_ptr[r + 1]);
        let (mut j, je) = (b.row_ptr[r], b.row_ptr[r + 1]);
        while i < ie || j < je {
            let ci = if i < ie { a.col_idx[i] } else { usize::MAX };
            let cj = if j < je { b.col_idx[j] } else { usize::MAX };
            let d = if ci < cj {
                i += 1;
                a.values[i - 1].norm()
            } else if cj < ci {
                j += 1;
                b.values[j - 1].norm()
            } else {
                i += 1;
                j += 1;
                (a.values[i - 1] - b.values[j - 1]).norm()
            };
            max = max.max(d);
        }
    }
    max
}

/// Kronecker product in the declared factor order of `space`.
///
/// `parts[f]` is the operator acting on factor f, or `None` for identity.
/// Each provided operator must live on exactly that single factor.
pub fn tensor(space: &SpaceDescriptor, parts: &[Option<&SparseOperator>]) -> Result<SparseOperator> {
    if parts.len() != space.factors().len() {
        return Err(Error::WrongFactorStructure {
            expected: format!("{} factor operators", space.factors().len()),
            got: format!("{}", parts.len()),
        });
    }
    let mut hermitian = true;
    for (f, part) in parts.iter().enumerate() {
        if let Some(op) = part {
            let expected = space.factor_space(f);
            if *op.space() != expected {
                return Err(Error::SpaceMismatch(format!(
                    "factor {f}: operator on {} cannot embed into {}",
                    op.space().describe(),
                    expected.describe()
                )));
            }
            hermitian &= op.is_hermitian_flagged();
        }
    }

    // Fold Kronecker products left to right: (((f0 ⊗ f1) ⊗ f2) …).
    let mut rows: Vec<Vec<(usize, C64)>> = vec![vec![(0, C64::new(1.0, 0.0))]];
    let mut dim = 1usize;
    for (f, part) in parts.iter().enumerate() {
        let fdim = space.factors()[f].dim();
        let mut next: Vec<Vec<(usize, C64)>> = Vec::with_capacity(dim * fdim);
        match part {
            None => {
                for row in &rows {
                    for ib in 0..fdim {
                        let new_row = row
                            .iter()
                            .map(|&(c, v)| (c * fdim + ib, v))
                            .collect();
                        next.push(new_row);
                    }
                }
            }
            Some(op) => {
                let (rp, ci, vals) = op.csr_parts();
                for row in &rows {
                    for ib in 0..fdim {
                        let mut new_row =
                            Vec::with_capacity(row.len() * (rp[ib + 1] - rp[ib]));
                        for &(c, v) in row {
                            for k in rp[ib]..rp[ib + 1] {
                                new_row.push((c * fdim + ci[k], v * vals[k]));
                            }
                        }
                        next.push(new_row);
                    }
                }
            }
        }
        rows = next;
        dim *= fdim;
    }

    let mut row_ptr = Vec::with_capacity(dim + 1);
    let mut col_idx = Vec::new();
    let mut values = Vec::new();
    row_ptr.push(0);
    for row in rows {
        // Column order is ascending by construction (outer factor major).
        for (c, v) in row {
            if v.re != 0.0 || v.im != 0.0 {
                col_idx.push(c);
                values.push(v);
            }
        }
        row_ptr.push(col_idx.len());
    }
    Ok(SparseOperator {
        space: space.clone(),
        row_ptr,
        col_idx,
        values,
        hermitian,
    })
}

/// Tensor embed of a single-factor operator into a composite space.
pub fn embed(space: &SpaceDescriptor, factor: usize, op: &SparseOperator) -> Result<SparseOperator> {
    let mut parts: Vec<Option<&SparseOperator>> = vec![None; space.factors().len()];
    if factor >= parts.len() {
        return Err(Error::FactorOutOfRange {
            index: factor,
            count: parts.len(),
        });
    }
    parts[factor] = Some(op);
    tensor(space, &parts)
}
