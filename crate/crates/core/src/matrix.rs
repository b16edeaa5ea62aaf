//! Exact matrices over GF(p).
//!
//! Storage is dense for small matrices and sparse (sorted rows) above a size
//! threshold; the two backends are interchangeable and normalised so that
//! stored zeros never survive construction. Vectors follow the row
//! convention: a linear map sends `v` to `v * M`, so composition of maps is
//! matrix multiplication in application order.

use crate::fp::Fp;
use crate::{Error, Result};

/// Sparse row: sorted `(column, nonzero value)` pairs.
pub type SparseRow = Vec<(u32, u64)>;

const DENSE_LIMIT: usize = 1 << 14;

#[derive(Clone, Debug, PartialEq, Eq)]
enum Data {
    Dense(Vec<u64>),
    Sparse(Vec<SparseRow>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FpMat {
    pub rows: usize,
    pub cols: usize,
    field: Fp,
    data: Data,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TensorMode {
    Kronecker,
    DirectSum,
}

impl FpMat {
    pub fn zero(rows: usize, cols: usize, field: Fp) -> Self {
        let data = if rows * cols <= DENSE_LIMIT {
            Data::Dense(vec![0; rows * cols])
        } else {
            Data::Sparse(vec![Vec::new(); rows])
        };
        FpMat { rows, cols, field, data }
    }

    pub fn identity(n: usize, field: Fp) -> Self {
        let mut m = FpMat::zero(n, n, field);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    pub fn from_dense(rows: usize, cols: usize, field: Fp, entries: Vec<i64>) -> Self {
        assert_eq!(entries.len(), rows * cols);
        let mut m = FpMat::zero(rows, cols, field);
        for i in 0..rows {
            for j in 0..cols {
                m.set(i, j, field.reduce(entries[i * cols + j]));
            }
        }
        m
    }

    pub fn from_rows(cols: usize, field: Fp, rows: Vec<SparseRow>) -> Self {
        let n = rows.len();
        let mut m = FpMat::zero(n, cols, field);
        for (i, r) in rows.into_iter().enumerate() {
            for (j, v) in r {
                m.set(i, j as usize, v % field.modulus());
            }
        }
        m
    }

    #[inline]
    pub fn field(&self) -> Fp {
        self.field
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u64 {
        match &self.data {
            Data::Dense(d) => d[i * self.cols + j],
            Data::Sparse(rows) => rows[i]
                .binary_search_by_key(&(j as u32), |e| e.0)
                .map(|k| rows[i][k].1)
                .unwrap_or(0),
        }
    }

    pub fn set(&mut self, i: usize, j: usize, v: u64) {
        debug_assert!(v < self.field.modulus());
        match &mut self.data {
            Data::Dense(d) => d[i * self.cols + j] = v,
            Data::Sparse(rows) => {
                match rows[i].binary_search_by_key(&(j as u32), |e| e.0) {
                    Ok(k) => {
                        if v == 0 {
                            rows[i].remove(k);
                        } else {
                            rows[i][k].1 = v;
                        }
                    }
                    Err(k) => {
                        if v != 0 {
                            rows[i].insert(k, (j as u32, v));
                        }
                    }
                }
            }
        }
    }

    pub fn row_sparse(&self, i: usize) -> SparseRow {
        match &self.data {
            Data::Dense(d) => (0..self.cols)
                .filter_map(|j| {
                    let v = d[i * self.cols + j];
                    (v != 0).then_some((j as u32, v))
                })
                .collect(),
            Data::Sparse(rows) => rows[i].clone(),
        }
    }

    pub fn row_dense(&self, i: usize) -> Vec<u64> {
        match &self.data {
            Data::Dense(d) => d[i * self.cols..(i + 1) * self.cols].to_vec(),
            Data::Sparse(rows) => {
                let mut out = vec![0; self.cols];
                for &(j, v) in &rows[i] {
                    out[j as usize] = v;
                }
                out
            }
        }
    }

    pub fn set_row(&mut self, i: usize, row: &[u64]) {
        for (j, &v) in row.iter().enumerate() {
            self.set(i, j, v);
        }
    }

    pub fn is_zero(&self) -> bool {
        match &self.data {
            Data::Dense(d) => d.iter().all(|&v| v == 0),
            Data::Sparse(rows) => rows.iter().all(|r| r.is_empty()),
        }
    }

    pub fn nnz(&self) -> usize {
        match &self.data {
            Data::Dense(d) => d.iter().filter(|&&v| v != 0).count(),
            Data::Sparse(rows) => rows.iter().map(|r| r.len()).sum(),
        }
    }

    /// `v * self` for a row vector `v`.
    pub fn apply_row(&self, v: &[u64]) -> Vec<u64> {
        assert_eq!(v.len(), self.rows, "row vector length mismatch");
        let f = self.field;
        let mut out = vec![0u64; self.cols];
        for (i, &vi) in v.iter().enumerate() {
            if vi == 0 {
                continue;
            }
            match &self.data {
                Data::Dense(d) => {
                    for j in 0..self.cols {
                        let m = d[i * self.cols + j];
                        if m != 0 {
                            out[j] = f.add(out[j], f.mul(vi, m));
                        }
                    }
                }
                Data::Sparse(rows) => {
                    for &(j, m) in &rows[i] {
                        out[j as usize] = f.add(out[j as usize], f.mul(vi, m));
                    }
                }
            }
        }
        out
    }

    pub fn mul(&self, other: &FpMat) -> FpMat {
        assert_eq!(self.cols, other.rows, "matrix product shape mismatch");
        self.field.same(&other.field).expect("modulus mismatch");
        let f = self.field;
        let mut out = FpMat::zero(self.rows, other.cols, f);
        let mut acc = vec![0u64; other.cols];
        for i in 0..self.rows {
            for a in acc.iter_mut() {
                *a = 0;
            }
            let row = self.row_sparse(i);
            for &(k, v) in &row {
                match &other.data {
                    Data::Dense(d) => {
                        let base = k as usize * other.cols;
                        for j in 0..other.cols {
                            let m = d[base + j];
                            if m != 0 {
                                acc[j] = f.add(acc[j], f.mul(v, m));
                            }
                        }
                    }
                    Data::Sparse(rows) => {
                        for &(j, m) in &rows[k as usize] {
                            acc[j as usize] = f.add(acc[j as usize], f.mul(v, m));
                        }
                    }
                }
            }
            for (j, &v) in acc.iter().enumerate() {
                if v != 0 {
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    pub fn add(&self, other: &FpMat) -> FpMat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let f = self.field;
        let mut out = self.clone();
        for i in 0..other.rows {
            for (j, v) in other.row_sparse(i) {
                let cur = out.get(i, j as usize);
                out.set(i, j as usize, f.add(cur, v));
            }
        }
        out
    }

    pub fn sub(&self, other: &FpMat) -> FpMat {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> FpMat {
        let f = self.field;
        let mut out = FpMat::zero(self.rows, self.cols, f);
        for i in 0..self.rows {
            for (j, v) in self.row_sparse(i) {
                out.set(i, j as usize, f.neg(v));
            }
        }
        out
    }

    pub fn scale(&self, c: u64) -> FpMat {
        let f = self.field;
        let mut out = FpMat::zero(self.rows, self.cols, f);
        if c == 0 {
            return out;
        }
        for i in 0..self.rows {
            for (j, v) in self.row_sparse(i) {
                out.set(i, j as usize, f.mul(c, v));
            }
        }
        out
    }

    pub fn transpose(&self) -> FpMat {
        let mut out = FpMat::zero(self.cols, self.rows, self.field);
        for i in 0..self.rows {
            for (j, v) in self.row_sparse(i) {
                out.set(j as usize, i, v);
            }
        }
        out
    }

    pub fn vstack(&self, other: &FpMat) -> FpMat {
        assert_eq!(self.cols, other.cols);
        let mut out = FpMat::zero(self.rows + other.rows, self.cols, self.field);
        for i in 0..self.rows {
            for (j, v) in self.row_sparse(i) {
                out.set(i, j as usize, v);
            }
        }
        for i in 0..other.rows {
            for (j, v) in other.row_sparse(i) {
                out.set(self.rows + i, j as usize, v);
            }
        }
        out
    }

    pub fn hstack(&self, other: &FpMat) -> FpMat {
        assert_eq!(self.rows, other.rows);
        let mut out = FpMat::zero(self.rows, self.cols + other.cols, self.field);
        for i in 0..self.rows {
            for (j, v) in self.row_sparse(i) {
                out.set(i, j as usize, v);
            }
            for (j, v) in other.row_sparse(i) {
                out.set(i, self.cols + j as usize, v);
            }
        }
        out
    }

    /// Kronecker product (row-major block order) or block-diagonal sum.
    pub fn tensor_and_sum(&self, other: &FpMat, mode: TensorMode) -> Result<FpMat> {
        self.field.same(&other.field)?;
        let f = self.field;
        match mode {
            TensorMode::Kronecker => {
                let mut out = FpMat::zero(self.rows * other.rows, self.cols * other.cols, f);
                for ia in 0..self.rows {
                    for (ja, va) in self.row_sparse(ia) {
                        for ib in 0..other.rows {
                            for (jb, vb) in other.row_sparse(ib) {
                                out.set(
                                    ia * other.rows + ib,
                                    ja as usize * other.cols + jb as usize,
                                    f.mul(va, vb),
                                );
                            }
                        }
                    }
                }
                Ok(out)
            }
            TensorMode::DirectSum => {
                let mut out = FpMat::zero(self.rows + other.rows, self.cols + other.cols, f);
                for i in 0..self.rows {
                    for (j, v) in self.row_sparse(i) {
                        out.set(i, j as usize, v);
                    }
                }
                for i in 0..other.rows {
                    for (j, v) in other.row_sparse(i) {
                        out.set(self.rows + i, self.cols + j as usize, v);
                    }
                }
                Ok(out)
            }
        }
    }

    /// Reduced row echelon form. Pivoting is deterministic: the first nonzero
    /// entry in column order wins, rows are processed top to bottom.
    pub fn rref(&self) -> (FpMat, Vec<usize>, usize) {
        let mut ech = Echelon::new(self.cols, self.field);
        for i in 0..self.rows {
            ech.insert(self.row_sparse(i));
        }
        let rank = ech.rank();
        let pivots: Vec<usize> = ech.pivots.iter().map(|&c| c as usize).collect();
        let mut out = FpMat::zero(self.rows, self.cols, self.field);
        for (k, row) in ech.rows.iter().enumerate() {
            for &(j, v) in row {
                out.set(k, j as usize, v);
            }
        }
        (out, pivots, rank)
    }

    pub fn rank(&self) -> usize {
        let mut ech = Echelon::new(self.cols, self.field);
        for i in 0..self.rows {
            ech.insert(self.row_sparse(i));
        }
        ech.rank()
    }

    /// Basis of the right null space `{x : Mx = 0}`, returned as the columns
    /// of the result. Free variables are chosen in column order and set to 1.
    pub fn kernel_basis(&self) -> FpMat {
        let f = self.field;
        let (r, pivots, rank) = self.rref();
        let mut is_pivot = vec![false; self.cols];
        for &c in &pivots {
            is_pivot[c] = true;
        }
        let free: Vec<usize> = (0..self.cols).filter(|&c| !is_pivot[c]).collect();
        let mut out = FpMat::zero(self.cols, free.len(), f);
        for (k, &fc) in free.iter().enumerate() {
            out.set(fc, k, 1);
            for (prow, &pc) in pivots.iter().enumerate().take(rank) {
                let v = r.get(prow, fc);
                if v != 0 {
                    out.set(pc, k, f.neg(v));
                }
            }
        }
        out
    }

    /// Rows spanning the left null space `{x : xM = 0}`.
    pub fn left_kernel_rows(&self) -> FpMat {
        self.transpose().kernel_basis().transpose()
    }

    /// Solves `Mx = b`; returns `None` when inconsistent. Free variables are
    /// set to zero, making the choice deterministic.
    pub fn solve(&self, b: &[u64]) -> Result<Option<Vec<u64>>> {
        if b.len() != self.rows {
            return Err(Error::DimensionMismatch(format!(
                "solve: {} rows vs rhs of length {}",
                self.rows,
                b.len()
            )));
        }
        let f = self.field;
        let mut ech = Echelon::new(self.cols + 1, f);
        for i in 0..self.rows {
            let mut row = self.row_sparse(i);
            if b[i] != 0 {
                row.push((self.cols as u32, b[i]));
            }
            ech.insert(row);
        }
        // Inconsistent iff some pivot sits in the augmented column.
        if ech.pivots.iter().any(|&c| c as usize == self.cols) {
            return Ok(None);
        }
        let mut x = vec![0u64; self.cols];
        for (k, &c) in ech.pivots.iter().enumerate() {
            let rhs = ech
                .rows[k]
                .iter()
                .find(|&&(j, _)| j as usize == self.cols)
                .map(|&(_, v)| v)
                .unwrap_or(0);
            x[c as usize] = rhs;
        }
        // Back substitution is already done by the reduced form, but pivots
        // may reference free columns of other rows; verify in debug builds.
        debug_assert_eq!(self.apply_cols(&x), b.to_vec());
        let _ = f;
        Ok(Some(x))
    }

    /// `M x` for a column vector `x`.
    pub fn apply_cols(&self, x: &[u64]) -> Vec<u64> {
        assert_eq!(x.len(), self.cols);
        let f = self.field;
        let mut out = vec![0u64; self.rows];
        for i in 0..self.rows {
            let mut acc = 0u64;
            for (j, v) in self.row_sparse(i) {
                acc = f.add(acc, f.mul(v, x[j as usize]));
            }
            out[i] = acc;
        }
        out
    }

    /// Solves `X * self = B` row by row (each row of `B` expressed over the
    /// row space of `self`). Returns `None` if some row is not in the span.
    pub fn solve_left(&self, b: &FpMat) -> Option<FpMat> {
        assert_eq!(self.cols, b.cols);
        let t = self.transpose();
        let mut out = FpMat::zero(b.rows, self.rows, self.field);
        for i in 0..b.rows {
            match t.solve(&b.row_dense(i)).ok()? {
                Some(x) => out.set_row(i, &x),
                None => return None,
            }
        }
        Some(out)
    }

    /// Inverse of a square matrix, if invertible.
    pub fn inverse(&self) -> Option<FpMat> {
        if self.rows != self.cols {
            return None;
        }
        let id = FpMat::identity(self.rows, self.field);
        // X * self = I  =>  X = self^{-1}
        let inv = self.solve_left(&id)?;
        debug_assert!(inv.mul(self).eq(&id));
        Some(inv)
    }

    pub fn is_invertible(&self) -> bool {
        self.rows == self.cols && self.rank() == self.rows
    }

    pub fn trace(&self) -> u64 {
        let f = self.field;
        let mut t = 0u64;
        for i in 0..self.rows.min(self.cols) {
            t = f.add(t, self.get(i, i));
        }
        t
    }

    pub fn pow(&self, mut e: u64) -> FpMat {
        assert_eq!(self.rows, self.cols);
        let mut base = self.clone();
        let mut acc = FpMat::identity(self.rows, self.field);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }
}

/// Incrementally maintained reduced row echelon basis of a row space.
#[derive(Clone, Debug)]
pub struct Echelon {
    pub cols: usize,
    field: Fp,
    /// Rows in reduced echelon form, kept sorted by pivot column.
    pub rows: Vec<SparseRow>,
    pub pivots: Vec<u32>,
}

impl Echelon {
    pub fn new(cols: usize, field: Fp) -> Self {
        Echelon { cols, field, rows: Vec::new(), pivots: Vec::new() }
    }

    pub fn field(&self) -> Fp {
        self.field
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Fully reduces `row` against the current basis: the residue has no
    /// entry in any pivot column.
    pub fn reduce(&self, mut row: SparseRow) -> SparseRow {
        let f = self.field;
        let mut k = 0;
        while k < row.len() {
            let (col, v) = row[k];
            match self.pivots.binary_search(&col) {
                Ok(i) => {
                    // Basis rows are reduced, so this only touches columns
                    // >= col; entries before index k are untouched.
                    row = row_axpy(f, &row, &self.rows[i], f.neg(v));
                }
                Err(_) => k += 1,
            }
        }
        row
    }

    /// Like [`Echelon::reduce`] but also reports the coefficients used, so a
    /// row in the span can be expressed over the basis rows.
    pub fn reduce_with_coeffs(&self, mut row: SparseRow) -> (SparseRow, Vec<(usize, u64)>) {
        let f = self.field;
        let mut coeffs = Vec::new();
        let mut k = 0;
        while k < row.len() {
            let (col, v) = row[k];
            match self.pivots.binary_search(&col) {
                Ok(i) => {
                    coeffs.push((i, v));
                    row = row_axpy(f, &row, &self.rows[i], f.neg(v));
                }
                Err(_) => k += 1,
            }
        }
        (row, coeffs)
    }

    /// Inserts a row, keeping the basis reduced. Returns true if rank grew.
    pub fn insert(&mut self, row: SparseRow) -> bool {
        let f = self.field;
        let mut row = self.reduce(row);
        let Some(&(lead, v)) = row.first() else { return false };
        let inv = f.inv(v).expect("nonzero leading coefficient");
        if inv != 1 {
            row = row_scale(f, &row, inv);
        }
        let k = self.pivots.binary_search(&lead).unwrap_err();
        // Back-substitute into earlier rows to keep the form reduced.
        for i in 0..self.rows.len() {
            if let Ok(pos) = self.rows[i].binary_search_by_key(&lead, |e| e.0) {
                let c = self.rows[i][pos].1;
                self.rows[i] = row_axpy(f, &self.rows[i], &row, f.neg(c));
            }
        }
        self.pivots.insert(k, lead);
        self.rows.insert(k, row);
        true
    }

    pub fn contains(&self, row: SparseRow) -> bool {
        self.reduce(row).is_empty()
    }

    /// The basis as a matrix with `rank` rows.
    pub fn to_mat(&self) -> FpMat {
        FpMat::from_rows(self.cols, self.field, self.rows.clone())
    }
}

/// A subspace with a chosen complement: quotient coordinates are the
/// non-pivot coordinates of the reduced echelon form of the subspace.
#[derive(Clone, Debug)]
pub struct QuotientSpace {
    pub ech: Echelon,
    /// ambient coordinates surviving as quotient coordinates
    pub free: Vec<usize>,
}

impl QuotientSpace {
    pub fn new(ech: Echelon) -> Self {
        let mut is_pivot = vec![false; ech.cols];
        for &p in &ech.pivots {
            is_pivot[p as usize] = true;
        }
        let free = (0..ech.cols).filter(|&c| !is_pivot[c]).collect();
        QuotientSpace { ech, free }
    }

    pub fn dim(&self) -> usize {
        self.free.len()
    }

    /// Image of an ambient row in quotient coordinates.
    pub fn project(&self, row: SparseRow) -> Vec<u64> {
        let residue = self.ech.reduce(row);
        let mut out = vec![0u64; self.free.len()];
        for (k, &c) in self.free.iter().enumerate() {
            if let Ok(pos) = residue.binary_search_by_key(&(c as u32), |e| e.0) {
                out[k] = residue[pos].1;
            }
        }
        out
    }

    /// Canonical lift of a quotient coordinate vector.
    pub fn lift(&self, q: &[u64]) -> SparseRow {
        self.free
            .iter()
            .zip(q.iter())
            .filter(|&(_, &v)| v != 0)
            .map(|(&c, &v)| (c as u32, v))
            .collect()
    }
}

/// Expresses vectors over a fixed list of (independent) spanning rows.
#[derive(Clone, Debug)]
pub struct SpanSolver {
    cols: usize,
    n: usize,
    ech: Echelon,
}

impl SpanSolver {
    /// Rows must be linearly independent.
    pub fn new(cols: usize, field: Fp, rows: &[SparseRow]) -> Self {
        let n = rows.len();
        let mut ech = Echelon::new(cols + n, field);
        for (i, r) in rows.iter().enumerate() {
            let mut aug = r.clone();
            aug.push(((cols + i) as u32, 1));
            let grew = ech.insert(aug);
            assert!(grew, "SpanSolver rows must be independent");
        }
        assert!(
            ech.pivots.iter().all(|&p| (p as usize) < cols),
            "SpanSolver rows must be independent"
        );
        SpanSolver { cols, n, ech }
    }

    /// Coefficients over the original rows, or `None` if outside the span.
    pub fn express(&self, row: SparseRow) -> Option<Vec<u64>> {
        let f = self.ech.field();
        let residue = self.ech.reduce(row);
        let mut coeffs = vec![0u64; self.n];
        for &(c, v) in &residue {
            let c = c as usize;
            if c < self.cols {
                return None;
            }
            coeffs[c - self.cols] = f.neg(v);
        }
        Some(coeffs)
    }
}

/// `a + c * b` on sparse rows.
pub fn row_axpy(f: Fp, a: &SparseRow, b: &SparseRow, c: u64) -> SparseRow {
    if c == 0 {
        return a.clone();
    }
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let ca = a.get(i).map(|e| e.0).unwrap_or(u32::MAX);
        let cb = b.get(j).map(|e| e.0).unwrap_or(u32::MAX);
        if ca < cb {
            out.push(a[i]);
            i += 1;
        } else if cb < ca {
            out.push((cb, f.mul(c, b[j].1)));
            j += 1;
        } else {
            let v = f.add(a[i].1, f.mul(c, b[j].1));
            if v != 0 {
                out.push((ca, v));
            }
            i += 1;
            j += 1;
        }
    }
    out.retain(|&(_, v)| v != 0);
    out
}

pub fn row_scale(f: Fp, a: &SparseRow, c: u64) -> SparseRow {
    if c == 0 {
        return Vec::new();
    }
    a.iter().map(|&(j, v)| (j, f.mul(c, v))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn f(p: u64) -> Fp {
        Fp::new(p).unwrap()
    }

    #[test]
    fn rref_empty_and_identity() {
        let m = FpMat::zero(0, 0, f(3));
        let (r, piv, rank) = m.rref();
        assert_eq!((r.rows, r.cols), (0, 0));
        assert!(piv.is_empty());
        assert_eq!(rank, 0);

        let id = FpMat::identity(3, f(3));
        let (r, piv, rank) = id.rref();
        assert_eq!(r, id);
        assert_eq!(piv, vec![0, 1, 2]);
        assert_eq!(rank, 3);
    }

    #[test]
    fn rref_rank_one() {
        // [[1,2],[2,4]] over GF(5): second row is twice the first.
        let m = FpMat::from_dense(2, 2, f(5), vec![1, 2, 2, 4]);
        let (_, piv, rank) = m.rref();
        assert_eq!(rank, 1);
        assert_eq!(piv, vec![0]);
    }

    #[test]
    fn kernel_cases() {
        let id = FpMat::identity(4, f(3));
        assert_eq!(id.kernel_basis().cols, 0);

        let z = FpMat::zero(2, 3, f(3));
        assert_eq!(z.kernel_basis().cols, 3);

        let m = FpMat::from_dense(2, 2, f(5), vec![1, 2, 2, 4]);
        let k = m.kernel_basis();
        assert_eq!(k.cols, 1);
        // kernel generated by (-2, 1) = (3, 1) up to scalar
        let x = vec![k.get(0, 0), k.get(1, 0)];
        assert_eq!(m.apply_cols(&x), vec![0, 0]);
        assert_ne!(x, vec![0, 0]);
    }

    #[test]
    fn solve_cases() {
        let id = FpMat::identity(3, f(7));
        assert_eq!(id.solve(&[1, 2, 3]).unwrap(), Some(vec![1, 2, 3]));

        let z = FpMat::zero(2, 2, f(3));
        assert_eq!(z.solve(&[1, 0]).unwrap(), None);

        // [[1,1],[0,1]] x = (2,1) over GF(3) => x = (1,1)
        let m = FpMat::from_dense(2, 2, f(3), vec![1, 1, 0, 1]);
        assert_eq!(m.solve(&[2, 1]).unwrap(), Some(vec![1, 1]));

        assert!(m.solve(&[1, 2, 3]).is_err());
    }

    #[test]
    fn tensor_examples() {
        let i2 = FpMat::identity(2, f(3));
        let i3 = FpMat::identity(3, f(3));
        let i6 = i2.tensor_and_sum(&i3, TensorMode::Kronecker).unwrap();
        assert_eq!(i6, FpMat::identity(6, f(3)));

        let a = FpMat::from_dense(1, 1, f(3), vec![2]);
        let b = FpMat::from_dense(1, 1, f(3), vec![1]);
        let d = a.tensor_and_sum(&b, TensorMode::DirectSum).unwrap();
        assert_eq!(d, FpMat::from_dense(2, 2, f(3), vec![2, 0, 0, 1]));

        let n = FpMat::from_dense(2, 2, f(3), vec![0, 1, 0, 0]);
        let one = FpMat::from_dense(1, 1, f(3), vec![1]);
        assert_eq!(n.tensor_and_sum(&one, TensorMode::Kronecker).unwrap(), n);

        let bad = FpMat::identity(2, f(5));
        assert!(i2.tensor_and_sum(&bad, TensorMode::Kronecker).is_err());
    }

    fn random_mat(rng: &mut ChaCha8Rng, rows: usize, cols: usize, p: u64) -> FpMat {
        let field = f(p);
        let mut m = FpMat::zero(rows, cols, field);
        for i in 0..rows {
            for j in 0..cols {
                m.set(i, j, rng.gen_range(0..p));
            }
        }
        m
    }

    #[test]
    fn rref_idempotent_and_rank_nullity() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..60 {
            let rows = rng.gen_range(0..6);
            let cols = rng.gen_range(0..6);
            let p = *[2u64, 3, 5].iter().nth(rng.gen_range(0..3)).unwrap();
            let m = random_mat(&mut rng, rows, cols, p);
            let (r, piv, rank) = m.rref();
            let (r2, piv2, rank2) = r.rref();
            assert_eq!(r, r2);
            assert_eq!(piv, piv2);
            assert_eq!(rank, rank2);
            assert_eq!(rank + m.kernel_basis().cols, cols);
        }
    }

    #[test]
    fn solve_soundness_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..60 {
            let rows = rng.gen_range(1..6);
            let cols = rng.gen_range(1..6);
            let m = random_mat(&mut rng, rows, cols, 3);
            let b: Vec<u64> = (0..rows).map(|_| rng.gen_range(0..3)).collect();
            if let Some(x) = m.solve(&b).unwrap() {
                assert_eq!(m.apply_cols(&x), b);
            } else {
                // b must be outside the column space
                let mut aug = FpMat::zero(rows, cols + 1, f(3));
                for i in 0..rows {
                    for (j, v) in m.row_sparse(i) {
                        aug.set(i, j as usize, v);
                    }
                    aug.set(i, cols, b[i]);
                }
                assert!(aug.rank() > m.rank());
            }
        }
    }

    #[test]
    fn kronecker_mixed_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..20 {
            let (m, n, k) = (rng.gen_range(1..4), rng.gen_range(1..4), rng.gen_range(1..4));
            let (q, r, s) = (rng.gen_range(1..4), rng.gen_range(1..4), rng.gen_range(1..4));
            let a = random_mat(&mut rng, m, n, 5);
            let c = random_mat(&mut rng, n, k, 5);
            let b = random_mat(&mut rng, q, r, 5);
            let d = random_mat(&mut rng, r, s, 5);
            let lhs = a
                .tensor_and_sum(&b, TensorMode::Kronecker)
                .unwrap()
                .mul(&c.tensor_and_sum(&d, TensorMode::Kronecker).unwrap());
            let rhs = a.mul(&c).tensor_and_sum(&b.mul(&d), TensorMode::Kronecker).unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn inverse_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let mut found = 0;
        while found < 10 {
            let m = random_mat(&mut rng, 4, 4, 3);
            if let Some(inv) = m.inverse() {
                assert_eq!(m.mul(&inv), FpMat::identity(4, f(3)));
                assert_eq!(inv.mul(&m), FpMat::identity(4, f(3)));
                found += 1;
            }
        }
    }

    #[test]
    fn echelon_reduce_with_coeffs() {
        let field = f(5);
        let mut ech = Echelon::new(3, field);
        ech.insert(vec![(0, 1), (1, 2)]);
        ech.insert(vec![(1, 1), (2, 3)]);
        let (residue, coeffs) = ech.reduce_with_coeffs(vec![(0, 2), (1, 4)]);
        assert!(residue.is_empty());
        // reconstruct
        let mut acc: SparseRow = Vec::new();
        for (k, c) in coeffs {
            acc = row_axpy(field, &acc, &ech.rows[k], c);
        }
        assert_eq!(acc, vec![(0, 2), (1, 4)]);
    }
}
