use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{CrnError, Result};
use crate::fock::space::{TruncationBox, DENSE_LIMIT};
use crate::scalar::Real;
use crate::structure::ConservedVector;

/// Sparse real matrix over the states of a [`TruncationBox`], stored as CSR.
/// Explicit zeros are never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator<T> {
    space: TruncationBox,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<T>,
}

impl<T: Real> SparseOperator<T> {
    /// Sums duplicate `(row, col)` entries; drops exact zeros.
    pub fn from_triplets(space: TruncationBox, triplets: impl IntoIterator<Item = (usize, usize, T)>) -> Self {
        let mut acc: BTreeMap<(usize, usize), T> = BTreeMap::new();
        for (r, c, v) in triplets {
            debug_assert!(r < space.len() && c < space.len());
            *acc.entry((r, c)).or_insert_with(T::zero) += v;
        }
        Self::from_sorted(space, acc)
    }

    fn from_sorted(space: TruncationBox, acc: BTreeMap<(usize, usize), T>) -> Self {
        let n = space.len();
        let mut row_ptr = vec![0; n + 1];
        let mut cols = Vec::with_capacity(acc.len());
        let mut vals = Vec::with_capacity(acc.len());
        for ((r, c), v) in acc {
            if v != T::zero() {
                row_ptr[r + 1] += 1;
                cols.push(c);
                vals.push(v);
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        SparseOperator { space, row_ptr, cols, vals }
    }

    pub fn zero(space: TruncationBox) -> Self {
        Self::from_triplets(space, std::iter::empty())
    }

    pub fn identity(space: TruncationBox) -> Self {
        let n = space.len();
        Self::from_triplets(space, (0..n).map(|i| (i, i, T::one())))
    }

    /// Diagonal operator with entry `f(n)` on state `n`.
    pub fn diagonal(space: TruncationBox, f: impl Fn(&[u64]) -> T) -> Self {
        let entries: Vec<_> = space.states().enumerate().map(|(i, n)| (i, i, f(&n))).collect();
        Self::from_triplets(space, entries)
    }

    pub fn space(&self) -> &TruncationBox {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.space.len()
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn is_zero(&self) -> bool {
        self.vals.is_empty()
    }

    pub fn get(&self, row: usize, col: usize) -> T {
        let (a, b) = (self.row_ptr[row], self.row_ptr[row + 1]);
        match self.cols[a..b].binary_search(&col) {
            Ok(p) => self.vals[a + p],
            Err(_) => T::zero(),
        }
    }

    /// `(row, col, value)` in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        (0..self.dim())
            .flat_map(move |r| (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |p| (r, self.cols[p], self.vals[p])))
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.dim()];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn matvec_into(&self, x: &[T], y: &mut [T]) {
        for (r, out) in y.iter_mut().enumerate() {
            let mut acc = T::zero();
            for p in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[p] * x[self.cols[p]];
            }
            *out = acc;
        }
    }

    fn same_box(&self, other: &Self) -> Result<()> {
        if self.space == other.space {
            Ok(())
        } else {
            Err(CrnError::BoxMismatch { left: self.space.caps().to_vec(), right: other.space.caps().to_vec() })
        }
    }

    /// Matrix product `self * other`.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.same_box(other)?;
        let mut acc: BTreeMap<(usize, usize), T> = BTreeMap::new();
        for r in 0..self.dim() {
            for p in self.row_ptr[r]..self.row_ptr[r + 1] {
                let (mid, a) = (self.cols[p], self.vals[p]);
                for q in other.row_ptr[mid]..other.row_ptr[mid + 1] {
                    *acc.entry((r, other.cols[q])).or_insert_with(T::zero) += a * other.vals[q];
                }
            }
        }
        Ok(Self::from_sorted(self.space.clone(), acc))
    }

    /// `self + scale * other`.
    pub fn add_scaled(&self, other: &Self, scale: T) -> Result<Self> {
        self.same_box(other)?;
        let entries = self.iter().chain(other.iter().map(|(r, c, v)| (r, c, scale * v)));
        Ok(Self::from_triplets(self.space.clone(), entries.collect::<Vec<_>>()))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add_scaled(other, -T::one())
    }

    pub fn scale(&self, s: T) -> Self {
        Self::from_triplets(self.space.clone(), self.iter().map(|(r, c, v)| (r, c, s * v)).collect::<Vec<_>>())
    }

    pub fn max_abs(&self) -> T {
        self.vals.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diagonal(&self) -> T {
        (0..self.dim()).fold(T::zero(), |m, i| m.max(self.get(i, i).abs()))
    }

    pub fn column_sums(&self) -> Vec<T> {
        let mut s = vec![T::zero(); self.dim()];
        for (_, c, v) in self.iter() {
            s[c] += v;
        }
        s
    }

    /// Dense copy, only for boxes of at most [`DENSE_LIMIT`] states.
    pub fn to_dense(&self) -> Result<Vec<Vec<T>>> {
        if self.dim() > DENSE_LIMIT {
            return Err(CrnError::InvalidArgument(format!(
                "{} states exceed the dense limit {DENSE_LIMIT}",
                self.dim()
            )));
        }
        let mut d = vec![vec![T::zero(); self.dim()]; self.dim()];
        for (r, c, v) in self.iter() {
            d[r][c] = v;
        }
        Ok(d)
    }

    pub fn from_dense(space: TruncationBox, d: &[Vec<T>]) -> Self {
        let entries: Vec<_> =
            d.iter().enumerate().flat_map(|(r, row)| row.iter().enumerate().map(move |(c, &v)| (r, c, v))).collect();
        Self::from_triplets(space, entries)
    }

    /// Coordinate text: `# caps c_1 ... c_k`, then `row col value` per entry.
    pub fn to_coordinate_text(&self) -> String {
        let mut out = String::from("# caps");
        for c in self.space.caps() {
            let _ = write!(out, " {c}");
        }
        out.push('\n');
        for (r, c, v) in self.iter() {
            let _ = writeln!(out, "{r} {c} {v}");
        }
        out
    }
}

/// `a_i`: `basis(n) -> n_i basis(n - e_i)`.
pub fn annihilation<T: Real>(i: usize, space: &TruncationBox) -> SparseOperator<T> {
    let mut delta = vec![0i64; space.num_species()];
    delta[i] = -1;
    let entries: Vec<_> = space
        .states()
        .enumerate()
        .filter_map(|(col, n)| space.shifted(&n, &delta).map(|row| (row, col, T::from_count(n[i]))))
        .collect();
    SparseOperator::from_triplets(space.clone(), entries)
}

/// `a_i†`: `basis(n) -> basis(n + e_i)`; states at the cap map to zero.
pub fn creation<T: Real>(i: usize, space: &TruncationBox) -> SparseOperator<T> {
    let mut delta = vec![0i64; space.num_species()];
    delta[i] = 1;
    let entries: Vec<_> = space
        .states()
        .enumerate()
        .filter_map(|(col, n)| space.shifted(&n, &delta).map(|row| (row, col, T::one())))
        .collect();
    SparseOperator::from_triplets(space.clone(), entries)
}

/// `N_i = a_i† a_i`, diagonal with entry `n_i`.
pub fn number_operator<T: Real>(i: usize, space: &TruncationBox) -> SparseOperator<T> {
    SparseOperator::diagonal(space.clone(), |n| T::from_count(n[i]))
}

/// `O = sum_i w_i N_i`, diagonal with entry `w · n`.
pub fn linear_observable<T: Real>(w: &ConservedVector, space: &TruncationBox) -> Result<SparseOperator<T>> {
    crate::error::check_dim(space.num_species(), w.0.len())?;
    Ok(SparseOperator::diagonal(space.clone(), |n| T::lit(w.eval(n) as f64)))
}

/// `[A, B] = AB - BA`.
pub fn commutator<T: Real>(a: &SparseOperator<T>, b: &SparseOperator<T>) -> Result<SparseOperator<T>> {
    a.mul(b)?.sub(&b.mul(a)?)
}
