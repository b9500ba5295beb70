//! Dense exact linear algebra over a prime field `F_p`.
//!
//! Everything in the crate that looks like a differential, a cochain map or a
//! coordinate change ends up as an [`FpMatrix`]. Entries are stored as residues
//! in `[0, p)` in row-major order; arithmetic is done in `u64` so any prime
//! below `2^31` is safe.
//!
//! Pivoting is deterministic (first nonzero entry in column order), so every
//! basis produced here is reproducible across runs.

use std::fmt;

use crate::error::{Error, Result};

/// Returns true when `p` is prime.
pub fn is_prime(p: u32) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u32;
    while (d as u64) * (d as u64) <= p as u64 {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

pub fn check_prime(p: u32) -> Result<()> {
    if !is_prime(p) || p >= (1 << 31) {
        return Err(Error::NotPrime(p));
    }
    Ok(())
}

/// Reduces a signed integer into `[0, p)`.
#[inline]
pub fn reduce(x: i64, p: u32) -> u32 {
    x.rem_euclid(p as i64) as u32
}

#[inline]
pub fn add_mod(a: u32, b: u32, p: u32) -> u32 {
    ((a as u64 + b as u64) % p as u64) as u32
}

#[inline]
pub fn sub_mod(a: u32, b: u32, p: u32) -> u32 {
    ((a as u64 + p as u64 - b as u64) % p as u64) as u32
}

#[inline]
pub fn mul_mod(a: u32, b: u32, p: u32) -> u32 {
    ((a as u64 * b as u64) % p as u64) as u32
}

#[inline]
pub fn neg_mod(a: u32, p: u32) -> u32 {
    if a == 0 {
        0
    } else {
        p - a
    }
}

pub fn pow_mod(mut base: u32, mut exp: u64, p: u32) -> u32 {
    let mut acc = 1u32 % p;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, p);
        }
        base = mul_mod(base, base, p);
        exp >>= 1;
    }
    acc
}

/// Multiplicative inverse of a nonzero residue.
pub fn inv_mod(a: u32, p: u32) -> u32 {
    debug_assert!(!a.is_multiple_of(p), "inverse of zero");
    pow_mod(a, p as u64 - 2, p)
}

/// `dst += c * src` entrywise.
pub fn axpy(dst: &mut [u32], c: u32, src: &[u32], p: u32) {
    if c == 0 {
        return;
    }
    let p64 = p as u64;
    for (d, &s) in dst.iter_mut().zip(src) {
        if s != 0 {
            *d = ((*d as u64 + c as u64 * s as u64) % p64) as u32;
        }
    }
}

pub fn is_zero_vec(v: &[u32]) -> bool {
    v.iter().all(|&x| x == 0)
}

/// Dense matrix over `F_p`.
#[derive(Clone, PartialEq, Eq)]
pub struct FpMatrix {
    p: u32,
    rows: usize,
    cols: usize,
    data: Vec<u32>,
}

/// Result of [`FpMatrix::rank_and_rref`].
#[derive(Clone, Debug)]
pub struct RowEchelon {
    pub rank: usize,
    pub rref: FpMatrix,
    pub pivot_cols: Vec<usize>,
}

impl FpMatrix {
    pub fn zeros(p: u32, rows: usize, cols: usize) -> Self {
        FpMatrix {
            p,
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(p: u32, n: usize) -> Self {
        let mut m = Self::zeros(p, n, n);
        for i in 0..n {
            m.data[i * n + i] = 1 % p;
        }
        m
    }

    /// Builds a matrix from signed rows, reducing every entry mod `p`.
    pub fn from_rows(p: u32, rows: &[Vec<i64>]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut m = Self::zeros(p, rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), cols, "ragged rows");
            for (j, &x) in r.iter().enumerate() {
                m.data[i * cols + j] = reduce(x, p);
            }
        }
        m
    }

    /// Builds a `rows x columns.len()` matrix whose columns are the given vectors.
    pub fn from_columns(p: u32, rows: usize, columns: &[Vec<u32>]) -> Self {
        let mut m = Self::zeros(p, rows, columns.len());
        for (j, c) in columns.iter().enumerate() {
            assert_eq!(c.len(), rows, "column length mismatch");
            for (i, &x) in c.iter().enumerate() {
                m.data[i * m.cols + j] = x % p;
            }
        }
        m
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u32 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: u32) {
        self.data[r * self.cols + c] = v % self.p;
    }

    #[inline]
    pub fn add_at(&mut self, r: usize, c: usize, v: u32) {
        let idx = r * self.cols + c;
        self.data[idx] = add_mod(self.data[idx], v, self.p);
    }

    pub fn row(&self, r: usize) -> &[u32] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [u32] {
        let cols = self.cols;
        &mut self.data[r * cols..(r + 1) * cols]
    }

    pub fn column(&self, c: usize) -> Vec<u32> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn columns(&self) -> Vec<Vec<u32>> {
        (0..self.cols).map(|c| self.column(c)).collect()
    }

    pub fn is_zero(&self) -> bool {
        is_zero_vec(&self.data)
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.p, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.data[c * self.rows + r] = self.data[r * self.cols + c];
            }
        }
        t
    }

    pub fn mul(&self, other: &FpMatrix) -> FpMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch in product");
        assert_eq!(self.p, other.p);
        let p = self.p;
        let mut out = FpMatrix::zeros(p, self.rows, other.cols);
        let mut acc = vec![0u64; other.cols];
        // Entries are < 2^31, so up to 4 products fit in a u64 before reducing.
        for r in 0..self.rows {
            acc.iter_mut().for_each(|a| *a = 0);
            let mut pending = 0;
            for k in 0..self.cols {
                let a = self.data[r * self.cols + k];
                if a == 0 {
                    continue;
                }
                let orow = other.row(k);
                for (x, &b) in acc.iter_mut().zip(orow) {
                    *x += a as u64 * b as u64;
                }
                pending += 1;
                if pending == 3 {
                    acc.iter_mut().for_each(|x| *x %= p as u64);
                    pending = 0;
                }
            }
            for (c, x) in acc.iter().enumerate() {
                out.data[r * other.cols + c] = (x % p as u64) as u32;
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[u32]) -> Vec<u32> {
        assert_eq!(v.len(), self.cols, "vector length mismatch");
        let p = self.p as u64;
        (0..self.rows)
            .map(|r| {
                let mut acc = 0u64;
                for (a, b) in self.row(r).iter().zip(v) {
                    acc = (acc + *a as u64 * *b as u64) % p;
                }
                acc as u32
            })
            .collect()
    }

    pub fn add(&self, other: &FpMatrix) -> FpMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a = add_mod(*a, *b, self.p);
        }
        out
    }

    pub fn sub(&self, other: &FpMatrix) -> FpMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a = sub_mod(*a, *b, self.p);
        }
        out
    }

    pub fn scale(&self, c: u32) -> FpMatrix {
        let mut out = self.clone();
        for a in out.data.iter_mut() {
            *a = mul_mod(*a, c, self.p);
        }
        out
    }

    /// Kronecker product `self (x) other`.
    pub fn kron(&self, other: &FpMatrix) -> FpMatrix {
        let p = self.p;
        let mut out = FpMatrix::zeros(p, self.rows * other.rows, self.cols * other.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                let a = self.get(r, c);
                if a == 0 {
                    continue;
                }
                for r2 in 0..other.rows {
                    for c2 in 0..other.cols {
                        let b = other.get(r2, c2);
                        if b != 0 {
                            out.set(r * other.rows + r2, c * other.cols + c2, mul_mod(a, b, p));
                        }
                    }
                }
            }
        }
        out
    }

    pub fn hstack(&self, other: &FpMatrix) -> FpMatrix {
        assert_eq!(self.rows, other.rows);
        let mut out = FpMatrix::zeros(self.p, self.rows, self.cols + other.cols);
        for r in 0..self.rows {
            out.row_mut(r)[..self.cols].copy_from_slice(self.row(r));
            out.row_mut(r)[self.cols..].copy_from_slice(other.row(r));
        }
        out
    }

    pub fn vstack(&self, other: &FpMatrix) -> FpMatrix {
        assert_eq!(self.cols, other.cols);
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        FpMatrix {
            p: self.p,
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        }
    }

    /// In-place Gauss-Jordan elimination. Returns pivot columns.
    fn eliminate(&mut self, full: bool) -> Vec<usize> {
        let p = self.p;
        let cols = self.cols;
        let mut pivots = Vec::new();
        let mut pivot_row = 0;
        for c in 0..cols {
            if pivot_row == self.rows {
                break;
            }
            let Some(r) = (pivot_row..self.rows).find(|&r| self.data[r * cols + c] != 0) else {
                continue;
            };
            if r != pivot_row {
                for k in c..cols {
                    self.data.swap(r * cols + k, pivot_row * cols + k);
                }
            }
            let inv = inv_mod(self.data[pivot_row * cols + c], p);
            if inv != 1 {
                for k in c..cols {
                    let i = pivot_row * cols + k;
                    self.data[i] = mul_mod(self.data[i], inv, p);
                }
            }
            let pivot: Vec<u32> = self.data[pivot_row * cols + c..(pivot_row + 1) * cols].to_vec();
            let start = if full { 0 } else { pivot_row + 1 };
            for r2 in start..self.rows {
                if r2 == pivot_row {
                    continue;
                }
                let f = self.data[r2 * cols + c];
                if f == 0 {
                    continue;
                }
                let row = &mut self.data[r2 * cols + c..(r2 + 1) * cols];
                axpy(row, neg_mod(f, p), &pivot, p);
            }
            pivots.push(c);
            pivot_row += 1;
        }
        pivots
    }

    /// Reduced row echelon form, rank and pivot columns.
    pub fn rank_and_rref(&self) -> RowEchelon {
        let mut rref = self.clone();
        let pivot_cols = rref.eliminate(true);
        RowEchelon {
            rank: pivot_cols.len(),
            rref,
            pivot_cols,
        }
    }

    pub fn rank(&self) -> usize {
        // Eliminate along the shorter side.
        if self.rows > self.cols {
            self.transpose().eliminate(false).len()
        } else {
            self.clone().eliminate(false).len()
        }
    }

    /// Solves `A x = b`, returning the solution with every free variable set to zero.
    pub fn solve(&self, b: &[u32]) -> Option<Vec<u32>> {
        assert_eq!(b.len(), self.rows, "right-hand side length mismatch");
        let aug = self.hstack(&FpMatrix::from_columns(self.p, self.rows, &[b.to_vec()]));
        let ech = aug.rank_and_rref();
        if ech.pivot_cols.last() == Some(&self.cols) {
            return None;
        }
        let mut x = vec![0; self.cols];
        for (i, &c) in ech.pivot_cols.iter().enumerate() {
            x[c] = ech.rref.get(i, self.cols);
        }
        Some(x)
    }

    /// Basis of the null space; one vector per free column, in column order.
    pub fn kernel_basis(&self) -> Vec<Vec<u32>> {
        let ech = self.rank_and_rref();
        let basis = kernel_from_rref(&ech, self.cols, self.p);
        debug_assert_eq!(basis.len() + ech.rank, self.cols, "rank-nullity");
        basis
    }
}

fn kernel_from_rref(ech: &RowEchelon, cols: usize, p: u32) -> Vec<Vec<u32>> {
    let mut is_pivot = vec![false; cols];
    for &c in &ech.pivot_cols {
        is_pivot[c] = true;
    }
    let mut basis = Vec::with_capacity(cols - ech.rank);
    for f in (0..cols).filter(|&c| !is_pivot[c]) {
        let mut v = vec![0; cols];
        v[f] = 1 % p;
        for (i, &pc) in ech.pivot_cols.iter().enumerate() {
            v[pc] = neg_mod(ech.rref.get(i, f), p);
        }
        basis.push(v);
    }
    basis
}

impl fmt::Debug for FpMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "FpMatrix(p={}, {}x{})", self.p, self.rows, self.cols)?;
        for r in 0..self.rows.min(16) {
            writeln!(f, "  {:?}", &self.row(r)[..self.cols.min(32)])?;
        }
        Ok(())
    }
}

/// Precomputed elimination for solving `A x = b` against many right-hand sides.
#[derive(Clone, Debug)]
pub struct LinearSolver {
    p: u32,
    rows: usize,
    cols: usize,
    pivots: Vec<usize>,
    // transform * A = rref(A)
    transform: FpMatrix,
}

impl LinearSolver {
    pub fn new(a: &FpMatrix) -> Self {
        let aug = a.hstack(&FpMatrix::identity(a.p, a.rows));
        let mut ech = aug.clone();
        let mut pivots = ech.eliminate(true);
        pivots.retain(|&c| c < a.cols);
        let mut transform = FpMatrix::zeros(a.p, a.rows, a.rows);
        for r in 0..a.rows {
            transform.row_mut(r).copy_from_slice(&ech.row(r)[a.cols..]);
        }
        LinearSolver {
            p: a.p,
            rows: a.rows,
            cols: a.cols,
            pivots,
            transform,
        }
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn solve(&self, b: &[u32]) -> Option<Vec<u32>> {
        assert_eq!(b.len(), self.rows);
        let c = self.transform.mul_vec(b);
        if c[self.pivots.len()..].iter().any(|&x| x != 0) {
            return None;
        }
        let mut x = vec![0; self.cols];
        for (i, &pc) in self.pivots.iter().enumerate() {
            x[pc] = c[i] % self.p;
        }
        Some(x)
    }
}

/// Incrementally maintained echelon basis of a subspace of `F_p^n`.
#[derive(Clone, Debug)]
pub struct EchelonSpan {
    p: u32,
    n: usize,
    rows: Vec<Vec<u32>>,
    pivots: Vec<usize>,
}

impl EchelonSpan {
    pub fn new(p: u32, n: usize) -> Self {
        EchelonSpan {
            p,
            n,
            rows: Vec::new(),
            pivots: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.n
    }

    fn reduce(&self, v: &mut [u32]) {
        for (row, &pc) in self.rows.iter().zip(&self.pivots) {
            let f = v[pc];
            if f != 0 {
                axpy(v, neg_mod(f, self.p), row, self.p);
            }
        }
    }

    pub fn contains(&self, v: &[u32]) -> bool {
        let mut w = v.to_vec();
        self.reduce(&mut w);
        is_zero_vec(&w)
    }

    /// Adds `v` to the span; returns false when it was already contained.
    pub fn insert(&mut self, v: &[u32]) -> bool {
        assert_eq!(v.len(), self.n);
        let mut w = v.to_vec();
        self.reduce(&mut w);
        let Some(pc) = w.iter().position(|&x| x != 0) else {
            return false;
        };
        let inv = inv_mod(w[pc], self.p);
        for x in w.iter_mut() {
            *x = mul_mod(*x, inv, self.p);
        }
        self.rows.push(w);
        self.pivots.push(pc);
        true
    }
}

/// Basis of a quotient `span(Z) / span(B)` together with the coordinate projection.
#[derive(Clone, Debug)]
pub struct Subquotient {
    ambient: usize,
    boundary_rank: usize,
    reps: Vec<Vec<u32>>,
    solver: LinearSolver,
}

/// Extends a basis of `span(B)` to one of `span(Z)`; the added vectors are the quotient basis.
pub fn subquotient_basis(p: u32, ambient: usize, z: &[Vec<u32>], b: &[Vec<u32>]) -> Result<Subquotient> {
    let mut zspan = EchelonSpan::new(p, ambient);
    for v in z {
        zspan.insert(v);
    }
    let mut span = EchelonSpan::new(p, ambient);
    let mut bbasis = Vec::new();
    for v in b {
        if !zspan.contains(v) {
            return Err(Error::Invalid("subquotient: B is not contained in span(Z)".into()));
        }
        if span.insert(v) {
            bbasis.push(v.clone());
        }
    }
    let boundary_rank = bbasis.len();
    let mut reps = Vec::new();
    for v in z {
        if span.insert(v) {
            reps.push(v.clone());
        }
    }
    let mut cols = bbasis;
    cols.extend(reps.iter().cloned());
    let solver = LinearSolver::new(&FpMatrix::from_columns(p, ambient, &cols));
    Ok(Subquotient {
        ambient,
        boundary_rank,
        reps,
        solver,
    })
}

impl Subquotient {
    pub fn dim(&self) -> usize {
        self.reps.len()
    }

    pub fn boundary_rank(&self) -> usize {
        self.boundary_rank
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn reps(&self) -> &[Vec<u32>] {
        &self.reps
    }

    /// Quotient coordinates of `v`; `None` when `v` is outside `span(Z)`.
    pub fn project(&self, v: &[u32]) -> Option<Vec<u32>> {
        let x = self.solver.solve(v)?;
        Some(x[self.boundary_rank..].to_vec())
    }

    /// True when `v` lies in `span(B)`.
    pub fn is_boundary(&self, v: &[u32]) -> bool {
        self.project(v).is_some_and(|c| is_zero_vec(&c))
    }

    /// Representative `sum_i coords[i] * reps[i]`.
    pub fn lift(&self, coords: &[u32], p: u32) -> Vec<u32> {
        assert_eq!(coords.len(), self.reps.len());
        let mut v = vec![0; self.ambient];
        for (c, r) in coords.iter().zip(&self.reps) {
            axpy(&mut v, *c, r, p);
        }
        v
    }
}
