//! Dense exact linear algebra over the prime field F_p.
//!
//! Entries are stored as reduced residues in `u16`, so any prime below 2^16 is
//! supported. All products fit in `u32` before reduction. Elimination skips
//! zero entries of the pivot row, which keeps the (typically very sparse)
//! differentials of permutation complexes cheap to reduce.

use std::fmt;

use crate::error::{Error, Result};

/// The prime field F_p.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PrimeField {
    p: u16,
}

impl PrimeField {
    pub fn new(p: u64) -> Result<Self> {
        if !(2..=u16::MAX as u64).contains(&p) || !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        Ok(PrimeField { p: p as u16 })
    }

    #[inline]
    pub fn p(self) -> u32 {
        self.p as u32
    }

    #[inline]
    pub fn reduce(self, x: i64) -> u32 {
        x.rem_euclid(self.p as i64) as u32
    }

    #[inline]
    pub fn add(self, a: u32, b: u32) -> u32 {
        let s = a + b;
        if s >= self.p() {
            s - self.p()
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(self, a: u32, b: u32) -> u32 {
        if a >= b {
            a - b
        } else {
            a + self.p() - b
        }
    }

    #[inline]
    pub fn neg(self, a: u32) -> u32 {
        if a == 0 {
            0
        } else {
            self.p() - a
        }
    }

    #[inline]
    pub fn mul(self, a: u32, b: u32) -> u32 {
        a * b % self.p()
    }

    pub fn pow(self, mut base: u32, mut exp: u64) -> u32 {
        let mut acc = 1 % self.p();
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    /// Multiplicative inverse. Panics on zero.
    pub fn inv(self, a: u32) -> u32 {
        assert!(!a.is_multiple_of(self.p()), "inverse of zero in F_{}", self.p);
        self.pow(a, self.p() as u64 - 2)
    }
}

impl fmt::Display for PrimeField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}", self.p)
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Row operations `dst -= c * src` restricted to the listed columns.
///
/// For small primes a full multiplication table replaces the division in the
/// inner loop.
struct RowOps {
    field: PrimeField,
    table: Option<Vec<u16>>,
}

impl RowOps {
    fn new(field: PrimeField) -> Self {
        let p = field.p() as usize;
        let table = (p <= 256).then(|| {
            let mut t = vec![0u16; p * p];
            for c in 0..p {
                for x in 0..p {
                    t[c * p + x] = (c * x % p) as u16;
                }
            }
            t
        });
        RowOps { field, table }
    }

    #[inline]
    fn sub_scaled(&self, dst: &mut [u16], src: &[u16], c: u32, support: &[usize]) {
        let p = self.field.p();
        let negc = self.field.neg(c);
        if p == 2 {
            for &j in support {
                dst[j] ^= src[j];
            }
            return;
        }
        match &self.table {
            Some(t) => {
                let row = &t[negc as usize * p as usize..(negc as usize + 1) * p as usize];
                for &j in support {
                    let s = dst[j] as u32 + row[src[j] as usize] as u32;
                    dst[j] = if s >= p { (s - p) as u16 } else { s as u16 };
                }
            }
            None => {
                for &j in support {
                    dst[j] = ((dst[j] as u32 + negc * src[j] as u32) % p) as u16;
                }
            }
        }
    }
}

/// Dense row-major matrix over F_p.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matrix {
    field: PrimeField,
    rows: usize,
    cols: usize,
    data: Vec<u16>,
}

/// Output of [`Matrix::rref`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rref {
    pub reduced: Matrix,
    pub rank: usize,
    pub pivots: Vec<usize>,
}

impl Matrix {
    pub fn zeros(field: PrimeField, rows: usize, cols: usize) -> Self {
        Matrix {
            field,
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(field: PrimeField, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    /// Builds a matrix from explicit rows; every entry must already be reduced.
    pub fn from_rows<R: AsRef<[u64]>>(field: PrimeField, cols: usize, rows: &[R]) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            let row = row.as_ref();
            if row.len() != cols {
                return Err(Error::DimensionMismatch(format!(
                    "row of length {} in a matrix with {} columns",
                    row.len(),
                    cols
                )));
            }
            for &v in row {
                if v >= field.p() as u64 {
                    return Err(Error::UnreducedEntry { value: v, p: field.p() });
                }
                data.push(v as u16);
            }
        }
        Ok(Matrix {
            field,
            rows: rows.len(),
            cols,
            data,
        })
    }

    /// Builds a matrix from integer entries, reducing each modulo p.
    pub fn from_fn(field: PrimeField, rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> i64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(field.reduce(f(i, j)) as u16);
            }
        }
        Matrix {
            field,
            rows,
            cols,
            data,
        }
    }

    /// A single column vector.
    pub fn column_vector(field: PrimeField, entries: &[u32]) -> Self {
        Self::from_fn(field, entries.len(), 1, |i, _| entries[i] as i64)
    }

    #[inline]
    pub fn field(&self) -> PrimeField {
        self.field
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.data[i * self.cols + j] as u32
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: u32) {
        debug_assert!(v < self.field.p());
        self.data[i * self.cols + j] = v as u16;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[u16] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<u32> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<u64>> {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|&x| x as u64).collect())
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn nnz(&self) -> usize {
        self.data.iter().filter(|&&x| x != 0).count()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.field, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        t
    }

    fn check_same_shape(&self, other: &Matrix) -> Result<()> {
        if self.shape() != other.shape() || self.field != other.field {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix> {
        self.check_same_shape(other)?;
        let f = self.field;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| f.add(a as u32, b as u32) as u16)
            .collect();
        Ok(Matrix { data, ..*self })
    }

    pub fn sub(&self, other: &Matrix) -> Result<Matrix> {
        self.check_same_shape(other)?;
        let f = self.field;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| f.sub(a as u32, b as u32) as u16)
            .collect();
        Ok(Matrix { data, ..*self })
    }

    pub fn scale(&self, c: u32) -> Matrix {
        let f = self.field;
        let c = c % f.p();
        let data = self.data.iter().map(|&a| f.mul(a as u32, c) as u16).collect();
        Matrix { data, ..*self }
    }

    pub fn neg(&self) -> Matrix {
        self.scale(self.field.p() - 1)
    }

    /// Matrix product. Zero entries of `self` and of the rows of `other` are
    /// skipped, so products of sparse matrices cost roughly their nonzero count.
    pub fn mul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows || self.field != other.field {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let p = self.field.p();
        let n = other.cols;
        let support: Vec<Vec<(usize, u32)>> = (0..other.rows)
            .map(|k| {
                other
                    .row(k)
                    .iter()
                    .enumerate()
                    .filter(|(_, &v)| v != 0)
                    .map(|(j, &v)| (j, v as u32))
                    .collect()
            })
            .collect();
        let mut out = Matrix::zeros(self.field, self.rows, n);
        let mut acc = vec![0u32; n];
        // Accumulate without reduction while the sum provably fits in u32.
        let max_term = (p - 1) * (p - 1);
        let budget = (u32::MAX - p).checked_div(max_term).unwrap_or(u32::MAX);
        for i in 0..self.rows {
            acc.iter_mut().for_each(|x| *x = 0);
            let mut pending = 0u32;
            for (k, &a) in self.row(i).iter().enumerate() {
                if a == 0 || support[k].is_empty() {
                    continue;
                }
                if pending == budget {
                    acc.iter_mut().for_each(|x| *x %= p);
                    pending = 0;
                }
                let a = a as u32;
                for &(j, b) in &support[k] {
                    acc[j] += a * b;
                }
                pending += 1;
            }
            let dst = &mut out.data[i * n..(i + 1) * n];
            for (d, &x) in dst.iter_mut().zip(&acc) {
                *d = (x % p) as u16;
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[u32]) -> Vec<u32> {
        assert_eq!(v.len(), self.cols);
        let p = self.field.p() as u64;
        (0..self.rows)
            .map(|i| {
                let s: u64 = self
                    .row(i)
                    .iter()
                    .zip(v)
                    .filter(|(&a, _)| a != 0)
                    .map(|(&a, &b)| a as u64 * b as u64)
                    .sum();
                (s % p) as u32
            })
            .collect()
    }

    pub fn pow(&self, mut exp: u64) -> Result<Matrix> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch("power of a non-square matrix".into()));
        }
        let mut acc = Matrix::identity(self.field, self.rows);
        let mut base = self.clone();
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc.mul(&base)?;
            }
            exp >>= 1;
            if exp > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(acc)
    }

    /// Kronecker product with index convention (a, b) -> a * other.rows + b.
    pub fn kronecker(&self, other: &Matrix) -> Matrix {
        let f = self.field;
        let (r2, c2) = other.shape();
        let mut out = Matrix::zeros(f, self.rows * r2, self.cols * c2);
        let oc = out.cols;
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.get(i, j);
                if a == 0 {
                    continue;
                }
                for k in 0..r2 {
                    for l in 0..c2 {
                        let b = other.get(k, l);
                        if b != 0 {
                            out.data[(i * r2 + k) * oc + j * c2 + l] = f.mul(a, b) as u16;
                        }
                    }
                }
            }
        }
        out
    }

    /// Copies `block` into `self` with its top-left corner at (row, col).
    pub fn set_block(&mut self, row: usize, col: usize, block: &Matrix) {
        assert!(row + block.rows <= self.rows && col + block.cols <= self.cols);
        for i in 0..block.rows {
            let dst = (row + i) * self.cols + col;
            self.data[dst..dst + block.cols].copy_from_slice(block.row(i));
        }
    }

    pub fn block_diag(field: PrimeField, blocks: &[&Matrix]) -> Matrix {
        let rows = blocks.iter().map(|b| b.rows).sum();
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut out = Matrix::zeros(field, rows, cols);
        let (mut r, mut c) = (0, 0);
        for b in blocks {
            out.set_block(r, c, b);
            r += b.rows;
            c += b.cols;
        }
        out
    }

    pub fn hstack(blocks: &[&Matrix]) -> Result<Matrix> {
        let first = blocks
            .first()
            .ok_or_else(|| Error::DimensionMismatch("empty hstack".into()))?;
        let rows = first.rows;
        if blocks.iter().any(|b| b.rows != rows) {
            return Err(Error::DimensionMismatch("hstack row counts differ".into()));
        }
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut out = Matrix::zeros(first.field, rows, cols);
        let mut c = 0;
        for b in blocks {
            out.set_block(0, c, b);
            c += b.cols;
        }
        Ok(out)
    }

    pub fn vstack(blocks: &[&Matrix]) -> Result<Matrix> {
        let first = blocks
            .first()
            .ok_or_else(|| Error::DimensionMismatch("empty vstack".into()))?;
        let cols = first.cols;
        if blocks.iter().any(|b| b.cols != cols) {
            return Err(Error::DimensionMismatch("vstack column counts differ".into()));
        }
        let mut data = Vec::with_capacity(blocks.iter().map(|b| b.data.len()).sum());
        for b in blocks {
            data.extend_from_slice(&b.data);
        }
        Ok(Matrix {
            field: first.field,
            rows: blocks.iter().map(|b| b.rows).sum(),
            cols,
            data,
        })
    }

    pub fn select_cols(&self, cols: &[usize]) -> Matrix {
        Matrix::from_fn(self.field, self.rows, cols.len(), |i, j| self.get(i, cols[j]) as i64)
    }

    pub fn select_rows(&self, rows: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(rows.len() * self.cols);
        for &r in rows {
            data.extend_from_slice(self.row(r));
        }
        Matrix {
            field: self.field,
            rows: rows.len(),
            cols: self.cols,
            data,
        }
    }

    /// If this is a permutation matrix, returns `perm` with `self * e_j = e_{perm[j]}`.
    pub fn as_permutation(&self) -> Option<Vec<usize>> {
        self.permutation_or_bad_row().ok()
    }

    /// Like [`Self::as_permutation`], but reports the first row that breaks the pattern.
    pub fn permutation_or_bad_row(&self) -> std::result::Result<Vec<usize>, usize> {
        if !self.is_square() {
            return Err(0);
        }
        let n = self.rows;
        let mut perm = vec![usize::MAX; n];
        for i in 0..n {
            let mut hit = None;
            for (j, &v) in self.row(i).iter().enumerate() {
                match v {
                    0 => {}
                    1 if hit.is_none() && perm[j] == usize::MAX => hit = Some(j),
                    _ => return Err(i),
                }
            }
            match hit {
                Some(j) => perm[j] = i,
                None => return Err(i),
            }
        }
        Ok(perm)
    }

    /// Reduced row echelon form over F_p.
    pub fn rref(&self) -> Rref {
        let mut work = self.clone();
        let pivots = work.eliminate(self.cols, true);
        Rref {
            rank: pivots.len(),
            reduced: work,
            pivots,
        }
    }

    pub fn rank(&self) -> usize {
        if self.is_zero() {
            return 0;
        }
        // Eliminate along the shorter side.
        let mut work = if self.rows > self.cols { self.transpose() } else { self.clone() };
        let cols = work.cols;
        work.eliminate(cols, false).len()
    }

    /// Gaussian elimination in place, choosing pivots among the first
    /// `pivot_limit` columns. With `full`, entries above pivots are cleared too
    /// and pivots are normalized to 1 (reduced echelon form).
    fn eliminate(&mut self, pivot_limit: usize, full: bool) -> Vec<usize> {
        let ops = RowOps::new(self.field);
        let cols = self.cols;
        let mut pivots = Vec::new();
        let mut support = Vec::with_capacity(cols);
        let mut r = 0;
        for c in 0..pivot_limit {
            if r == self.rows {
                break;
            }
            let Some(pr) = (r..self.rows).find(|&k| self.data[k * cols + c] != 0) else {
                continue;
            };
            if pr != r {
                for j in c..cols {
                    self.data.swap(r * cols + j, pr * cols + j);
                }
            }
            let lead = self.data[r * cols + c] as u32;
            if lead != 1 && full {
                let inv = self.field.inv(lead);
                for j in c..cols {
                    let x = self.data[r * cols + j] as u32;
                    if x != 0 {
                        self.data[r * cols + j] = self.field.mul(x, inv) as u16;
                    }
                }
            }
            let lead = self.data[r * cols + c] as u32;
            let inv_lead = self.field.inv(lead);
            support.clear();
            support.extend((c..cols).filter(|&j| self.data[r * cols + j] != 0));
            let (before, rest) = self.data.split_at_mut(r * cols);
            let (pivot_row, after) = rest.split_at_mut(cols);
            let start = if full { 0 } else { r + 1 };
            for k in start..self.rows {
                if k == r {
                    continue;
                }
                let row = if k < r {
                    &mut before[k * cols..(k + 1) * cols]
                } else {
                    let off = (k - r - 1) * cols;
                    &mut after[off..off + cols]
                };
                let v = row[c] as u32;
                if v != 0 {
                    let factor = self.field.mul(v, inv_lead);
                    ops.sub_scaled(row, pivot_row, factor, &support);
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    /// Basis of `{x : A x = 0}` as columns. Free variables are taken in
    /// increasing index order, each set to 1 in its own basis vector.
    pub fn nullspace(&self) -> Matrix {
        let Rref { reduced, pivots, .. } = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut out = Matrix::zeros(self.field, self.cols, free.len());
        for (k, &fc) in free.iter().enumerate() {
            out.set(fc, k, 1);
            for (i, &pc) in pivots.iter().enumerate() {
                let v = reduced.get(i, fc);
                if v != 0 {
                    out.set(pc, k, self.field.neg(v));
                }
            }
        }
        out
    }

    /// Solves `A X = B`, returning the particular solution with all free
    /// variables zero, or [`Error::NoSolution`].
    pub fn solve(&self, b: &Matrix) -> Result<Matrix> {
        if self.rows != b.rows || self.field != b.field {
            return Err(Error::DimensionMismatch(format!(
                "solve: A has {} rows, B has {}",
                self.rows, b.rows
            )));
        }
        let mut aug = Matrix::hstack(&[self, b])?;
        let pivots = aug.eliminate(self.cols, true);
        let rank = pivots.len();
        for i in rank..aug.rows {
            if aug.row(i)[self.cols..].iter().any(|&x| x != 0) {
                return Err(Error::NoSolution);
            }
        }
        let mut x = Matrix::zeros(self.field, self.cols, b.cols);
        for (i, &pc) in pivots.iter().enumerate() {
            let src = &aug.row(i)[self.cols..];
            let dst = pc * b.cols;
            x.data[dst..dst + b.cols].copy_from_slice(src);
        }
        Ok(x)
    }

    pub fn inverse(&self) -> Option<Matrix> {
        if !self.is_square() {
            return None;
        }
        let id = Matrix::identity(self.field, self.rows);
        let x = self.solve(&id).ok()?;
        (self.rank() == self.rows).then_some(x)
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Matrix<{}>[{}x{}]", self.field, self.rows, self.cols)?;
        if self.rows * self.cols <= 256 {
            f.debug_list().entries((0..self.rows).map(|i| self.row(i))).finish()?;
        }
        Ok(())
    }
}
