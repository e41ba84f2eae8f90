//! Minimal real sparse matrices (CSR) with Kronecker products, plus the
//! symmetric newtype the Hamiltonian pipeline is built on.

use std::fmt;

use nalgebra::{Complex, DMatrix, DVector};

pub type Complex64 = Complex<f64>;

pub type ComplexMatrix = DMatrix<Complex64>;

/// Real square matrix in compressed sparse row form.
///
/// Column indices are sorted within each row and contain no duplicates.
#[derive(Clone, PartialEq)]
pub struct SparseMatrix {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl fmt::Debug for SparseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SparseMatrix").field("dim", &self.dim).field("nnz", &self.nnz()).finish()
    }
}

impl SparseMatrix {
    pub fn zeros(dim: usize) -> Self {
        SparseMatrix { dim, row_ptr: vec![0; dim + 1], cols: Vec::new(), vals: Vec::new() }
    }

    pub fn identity(dim: usize) -> Self {
        SparseMatrix::from_diagonal(&vec![1.0; dim])
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        SparseMatrix::from_triplets(diag.len(), diag.iter().enumerate().map(|(i, &v)| (i, i, v)))
    }

    /// Builds a matrix from coordinate entries. Duplicates are summed and
    /// exact zeros dropped.
    pub fn from_triplets<I>(dim: usize, entries: I) -> Self
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut entries: Vec<(usize, usize, f64)> = entries.into_iter().collect();
        entries.sort_by_key(|e| (e.0, e.1));

        let mut row_ptr = vec![0usize; dim + 1];
        let mut cols = Vec::with_capacity(entries.len());
        let mut vals = Vec::with_capacity(entries.len());
        let mut rows = Vec::with_capacity(entries.len());
        for (r, c, v) in entries {
            assert!(r < dim && c < dim, "entry ({r}, {c}) outside {dim}x{dim}");
            if let (Some(&lr), Some(&lc)) = (rows.last(), cols.last()) {
                if lr == r && lc == c {
                    *vals.last_mut().unwrap() += v;
                    continue;
                }
            }
            rows.push(r);
            cols.push(c);
            vals.push(v);
        }

        let mut out_cols = Vec::with_capacity(cols.len());
        let mut out_vals = Vec::with_capacity(vals.len());
        for ((r, c), v) in rows.into_iter().zip(cols).zip(vals) {
            if v != 0.0 {
                row_ptr[r + 1] += 1;
                out_cols.push(c);
                out_vals.push(v);
            }
        }
        for i in 0..dim {
            row_ptr[i + 1] += row_ptr[i];
        }
        SparseMatrix { dim, row_ptr, cols: out_cols, vals: out_vals }
    }

    pub fn from_dense(m: &DMatrix<f64>) -> Self {
        assert_eq!(m.nrows(), m.ncols(), "square matrices only");
        let n = m.nrows();
        SparseMatrix::from_triplets(n, (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| (i, j, m[(i, j)])))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Stored entries of row `i` as `(column, value)`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[range.clone()].iter().copied().zip(self.vals[range].iter().copied())
    }

    /// All stored entries as `(row, column, value)`.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.dim).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.cols[range.clone()].binary_search(&j) {
            Ok(k) => self.vals[range.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn transpose(&self) -> Self {
        SparseMatrix::from_triplets(self.dim, self.triplets().map(|(i, j, v)| (j, i, v)))
    }

    pub fn scale(&self, factor: f64) -> Self {
        SparseMatrix {
            dim: self.dim,
            row_ptr: self.row_ptr.clone(),
            cols: self.cols.clone(),
            vals: self.vals.iter().map(|v| v * factor).collect(),
        }
    }

    pub fn add(&self, other: &SparseMatrix) -> Self {
        assert_eq!(self.dim, other.dim, "dimension mismatch in add");
        SparseMatrix::from_triplets(self.dim, self.triplets().chain(other.triplets()))
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.vals.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn mul_vec(&self, x: &DVector<f64>) -> DVector<f64> {
        assert_eq!(x.len(), self.dim);
        DVector::from_iterator(self.dim, (0..self.dim).map(|i| self.row(i).map(|(j, v)| v * x[j]).sum()))
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (i, j, v) in self.triplets() {
            m[(i, j)] = v;
        }
        m
    }

    pub fn is_symmetric(&self) -> bool {
        self.triplets().all(|(i, j, v)| self.get(j, i) == v)
    }
}

/// Tensor product `a ⊗ b` with `a` as the most significant factor.
pub fn kron(a: &SparseMatrix, b: &SparseMatrix) -> SparseMatrix {
    let nb = b.dim;
    let entries = a
        .triplets()
        .flat_map(|(ia, ja, va)| b.triplets().map(move |(ib, jb, vb)| (ia * nb + ib, ja * nb + jb, va * vb)));
    SparseMatrix::from_triplets(a.dim * nb, entries)
}

/// Real matrix that is symmetric by construction.
#[derive(Clone, Debug, PartialEq)]
pub struct RealSymMatrix(SparseMatrix);

impl RealSymMatrix {
    /// Wraps `m` if it is exactly symmetric.
    pub fn new(m: SparseMatrix) -> Option<Self> {
        m.is_symmetric().then_some(RealSymMatrix(m))
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        RealSymMatrix(SparseMatrix::from_diagonal(diag))
    }

    /// `m + mᵀ` for an arbitrary `m`; exactly symmetric by construction.
    pub fn symmetrized(m: &SparseMatrix) -> Self {
        RealSymMatrix(m.add(&m.transpose()))
    }

    pub fn sparse(&self) -> &SparseMatrix {
        &self.0
    }

    pub fn into_sparse(self) -> SparseMatrix {
        self.0
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        self.0.to_dense()
    }

    pub fn dim(&self) -> usize {
        self.0.dim
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    pub fn add(&self, other: &RealSymMatrix) -> Self {
        RealSymMatrix(self.0.add(&other.0))
    }

    pub fn scale(&self, factor: f64) -> Self {
        RealSymMatrix(self.0.scale(factor))
    }

    pub fn kron(&self, other: &RealSymMatrix) -> Self {
        RealSymMatrix(kron(&self.0, &other.0))
    }
}

pub fn to_complex(m: &DMatrix<f64>) -> ComplexMatrix {
    m.map(|v| Complex64::new(v, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicates_are_summed_and_zeros_dropped() {
        let m = SparseMatrix::from_triplets(2, [(0, 1, 1.0), (0, 1, 2.0), (1, 0, 1.0), (1, 0, -1.0)]);
        assert_eq!(m.nnz(), 1);
        assert_eq!(m.get(0, 1), 3.0);
        assert_eq!(m.get(1, 0), 0.0);
    }

    #[test]
    fn kron_of_identities_is_identity() {
        let i2 = SparseMatrix::identity(2);
        assert_eq!(kron(&i2, &i2), SparseMatrix::identity(4));
    }

    #[test]
    fn kron_diag_with_identity_repeats_entries() {
        let d = SparseMatrix::from_diagonal(&[3.0, 5.0]);
        let k = kron(&d, &SparseMatrix::identity(2));
        assert_eq!(k, SparseMatrix::from_diagonal(&[3.0, 3.0, 5.0, 5.0]));
    }

    #[test]
    fn kron_matches_nalgebra_kronecker() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, -1.0]);
        let b = DMatrix::from_row_slice(3, 3, &[0.5, 0.0, 1.0, 0.0, 2.0, 0.0, 3.0, 0.0, -0.25]);
        let sparse = kron(&SparseMatrix::from_dense(&a), &SparseMatrix::from_dense(&b));
        assert_eq!(sparse.to_dense(), a.kronecker(&b));
    }

    #[test]
    fn symmetrized_is_symmetric() {
        let m = SparseMatrix::from_triplets(3, [(0, 2, 0.1), (1, 0, 0.7)]);
        let s = RealSymMatrix::symmetrized(&m);
        assert!(s.sparse().is_symmetric());
        assert!(RealSymMatrix::new(m).is_none());
    }
}
