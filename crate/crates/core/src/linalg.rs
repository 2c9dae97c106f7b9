//! Exact linear algebra over the Gaussian rationals.
//!
//! Two representations live here: [`GMatrix`], a dense row-major matrix for
//! algebra-sized problems (structure constants, Gram matrices, projections),
//! and [`SparseVec`] with [`Echelon`], an incremental reduced row echelon
//! basis used for the much larger chain spaces.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::scalar::{GScalar, Rational};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LinalgError {
    DimensionMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },
    NotHermitian,
    /// The form restricted to the requested subspace has a null vector.
    Degenerate,
    Singular,
}

impl fmt::Display for LinalgError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LinalgError::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {}x{}, found {}x{}", expected.0, expected.1, found.0, found.1)
            }
            LinalgError::NotHermitian => write!(f, "form is not hermitian"),
            LinalgError::Degenerate => write!(f, "form is degenerate on the subspace"),
            LinalgError::Singular => write!(f, "matrix is singular"),
        }
    }
}

/// Dense matrix of Gaussian rationals, row-major.
#[derive(Clone, PartialEq, Eq)]
pub struct GMatrix {
    rows: usize,
    cols: usize,
    data: Vec<GScalar>,
}

impl fmt::Debug for GMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "GMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                write!(f, "{} ", self[(r, c)])?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl core::ops::Index<(usize, usize)> for GMatrix {
    type Output = GScalar;
    fn index(&self, (r, c): (usize, usize)) -> &GScalar {
        &self.data[r * self.cols + c]
    }
}

impl core::ops::IndexMut<(usize, usize)> for GMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut GScalar {
        &mut self.data[r * self.cols + c]
    }
}

impl GMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        GMatrix { rows, cols, data: vec![GScalar::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = GScalar::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<GScalar>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend(row);
        }
        GMatrix { rows: r, cols: c, data }
    }

    pub fn from_cols(rows: usize, cols: &[Vec<GScalar>]) -> Self {
        let mut m = Self::zeros(rows, cols.len());
        for (j, col) in cols.iter().enumerate() {
            assert_eq!(col.len(), rows, "column length");
            for (i, x) in col.iter().enumerate() {
                m[(i, j)] = x.clone();
            }
        }
        m
    }

    /// Integer entries, convenient for tests and fixtures.
    pub fn from_ints(rows: &[&[i64]]) -> Self {
        Self::from_rows(rows.iter().map(|r| r.iter().map(|&x| GScalar::int(x)).collect()).collect())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn col(&self, j: usize) -> Vec<GScalar> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn row(&self, i: usize) -> Vec<GScalar> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn columns(&self) -> Vec<Vec<GScalar>> {
        (0..self.cols).map(|j| self.col(j)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(GScalar::is_zero)
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(j, i)] = self[(i, j)].conj();
            }
        }
        m
    }

    pub fn transpose(&self) -> Self {
        let mut m = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(j, i)] = self[(i, j)].clone();
            }
        }
        m
    }

    pub fn mul(&self, rhs: &GMatrix) -> GMatrix {
        assert_eq!(self.cols, rhs.rows, "inner dimension");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = &rhs[(k, j)];
                    if !b.is_zero() {
                        let p = a * b;
                        out[(i, j)] += &p;
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[GScalar]) -> Vec<GScalar> {
        assert_eq!(self.cols, v.len(), "vector length");
        (0..self.rows)
            .map(|i| {
                let mut acc = GScalar::zero();
                for (k, x) in v.iter().enumerate() {
                    let a = &self[(i, k)];
                    if !a.is_zero() && !x.is_zero() {
                        acc += &(a * x);
                    }
                }
                acc
            })
            .collect()
    }

    pub fn add(&self, rhs: &GMatrix) -> GMatrix {
        assert_eq!(self.shape(), rhs.shape());
        GMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, rhs: &GMatrix) -> GMatrix {
        assert_eq!(self.shape(), rhs.shape());
        GMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale(&self, c: &GScalar) -> GMatrix {
        GMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|a| a * c).collect() }
    }

    /// Reduced row echelon form and pivot columns.
    pub fn rref(&self) -> (GMatrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(p) = (r..m.rows).find(|&i| !m[(i, c)].is_zero()) else { continue };
            if p != r {
                for j in 0..m.cols {
                    m.data.swap(p * m.cols + j, r * m.cols + j);
                }
            }
            let inv = m[(r, c)].inv();
            for j in c..m.cols {
                let v = &m[(r, j)] * &inv;
                m[(r, j)] = v;
            }
            for i in 0..m.rows {
                if i == r || m[(i, c)].is_zero() {
                    continue;
                }
                let f = m[(i, c)].clone();
                for j in c..m.cols {
                    if !m[(r, j)].is_zero() {
                        let d = &f * &m[(r, j)];
                        m[(i, j)] -= &d;
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    pub fn inverse(&self) -> Result<GMatrix, LinalgError> {
        if self.rows != self.cols {
            return Err(LinalgError::Singular);
        }
        let n = self.rows;
        let mut aug = Self::zeros(n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug[(i, j)] = self[(i, j)].clone();
            }
            aug[(i, n + i)] = GScalar::one();
        }
        let (red, piv) = aug.rref();
        if piv.len() < n || piv[n - 1] != n - 1 {
            return Err(LinalgError::Singular);
        }
        let mut inv = Self::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                inv[(i, j)] = red[(i, n + j)].clone();
            }
        }
        Ok(inv)
    }

    /// Solve `self · x = b` for one solution, if any.
    pub fn solve(&self, b: &[GScalar]) -> Option<Vec<GScalar>> {
        assert_eq!(b.len(), self.rows);
        let mut aug = Self::zeros(self.rows, self.cols + 1);
        for i in 0..self.rows {
            for j in 0..self.cols {
                aug[(i, j)] = self[(i, j)].clone();
            }
            aug[(i, self.cols)] = b[i].clone();
        }
        let (red, piv) = aug.rref();
        if piv.last() == Some(&self.cols) {
            return None;
        }
        let mut x = vec![GScalar::zero(); self.cols];
        for (r, &c) in piv.iter().enumerate() {
            x[c] = red[(r, self.cols)].clone();
        }
        Some(x)
    }

    /// Select a maximal independent subset of columns (first occurrences win).
    pub fn independent_columns(&self) -> Vec<usize> {
        self.rref().1
    }
}

pub fn rank(m: &GMatrix) -> usize {
    m.rref().1.len()
}

/// Basis of `ker m` as the columns of the returned matrix.
pub fn kernel_basis(m: &GMatrix) -> GMatrix {
    let (red, piv) = m.rref();
    let free: Vec<usize> = (0..m.cols).filter(|c| !piv.contains(c)).collect();
    let mut k = GMatrix::zeros(m.cols, free.len());
    for (j, &f) in free.iter().enumerate() {
        k[(f, j)] = GScalar::one();
        for (r, &p) in piv.iter().enumerate() {
            k[(p, j)] = -red[(r, f)].clone();
        }
    }
    k
}

/// A sesquilinear form `F(v, w) = v† · gram · w`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HermitianForm {
    gram: GMatrix,
}

impl HermitianForm {
    pub fn new(gram: GMatrix) -> Result<Self, LinalgError> {
        if gram.rows() != gram.cols() {
            return Err(LinalgError::DimensionMismatch { expected: (gram.rows(), gram.rows()), found: gram.shape() });
        }
        if gram.adjoint() != gram {
            return Err(LinalgError::NotHermitian);
        }
        Ok(HermitianForm { gram })
    }

    pub fn gram(&self) -> &GMatrix {
        &self.gram
    }

    pub fn dim(&self) -> usize {
        self.gram.rows()
    }

    pub fn eval(&self, v: &[GScalar], w: &[GScalar]) -> GScalar {
        let gw = self.gram.mul_vec(w);
        v.iter().zip(&gw).fold(GScalar::zero(), |acc, (a, b)| &acc + &(&a.conj() * b))
    }

    /// Positive semidefiniteness by symmetric pivoted elimination: every
    /// pivot must be real and nonnegative, and a zero pivot must have a zero
    /// row.
    pub fn is_positive_semidefinite(&self) -> bool {
        let mut g = self.gram.clone();
        let n = g.rows();
        let mut alive: Vec<usize> = (0..n).collect();
        while let Some(pos) = alive.iter().position(|&i| !g[(i, i)].is_zero()) {
            let p = alive.remove(pos);
            let d = g[(p, p)].clone();
            if !d.is_real() || d.re.is_negative() {
                return false;
            }
            let dinv = d.inv();
            for &i in &alive {
                if g[(i, p)].is_zero() {
                    continue;
                }
                let f = &g[(i, p)] * &dinv;
                for &j in &alive {
                    if !g[(p, j)].is_zero() {
                        let t = &f * &g[(p, j)];
                        g[(i, j)] -= &t;
                    }
                }
            }
        }
        // remaining diagonal is zero; the rows must vanish too
        alive.iter().all(|&i| alive.iter().all(|&j| g[(i, j)].is_zero()))
    }

    pub fn is_positive_definite(&self) -> bool {
        self.is_positive_semidefinite() && rank(&self.gram) == self.dim()
    }

    /// Basis of `{v : F(v, w) = 0 for all w}`.
    pub fn radical(&self) -> GMatrix {
        kernel_basis(&self.gram)
    }

    /// The `F`-orthogonal projection onto the column span of `span`.
    pub fn orth_projection(&self, span: &GMatrix) -> Result<GMatrix, LinalgError> {
        if span.rows() != self.dim() {
            return Err(LinalgError::DimensionMismatch { expected: (self.dim(), span.cols()), found: span.shape() });
        }
        let sh = span.adjoint();
        let small = sh.mul(&self.gram).mul(span);
        let inv = small.inverse().map_err(|_| LinalgError::Degenerate)?;
        Ok(span.mul(&inv).mul(&sh).mul(&self.gram))
    }
}

/// Sparse vector with strictly increasing indices and nonzero entries.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SparseVec {
    entries: Vec<(usize, GScalar)>,
}

impl SparseVec {
    pub fn new() -> Self {
        SparseVec { entries: Vec::new() }
    }

    pub fn unit(i: usize) -> Self {
        SparseVec { entries: vec![(i, GScalar::one())] }
    }

    /// Build from unsorted entries, merging duplicates and dropping zeros.
    pub fn from_entries(mut raw: Vec<(usize, GScalar)>) -> Self {
        raw.sort_by_key(|e| e.0);
        let mut entries: Vec<(usize, GScalar)> = Vec::with_capacity(raw.len());
        for (i, x) in raw {
            match entries.last_mut() {
                Some((j, y)) if *j == i => *y += &x,
                _ => entries.push((i, x)),
            }
        }
        entries.retain(|e| !e.1.is_zero());
        SparseVec { entries }
    }

    pub fn from_dense(v: &[GScalar]) -> Self {
        SparseVec { entries: v.iter().enumerate().filter(|e| !e.1.is_zero()).map(|(i, x)| (i, x.clone())).collect() }
    }

    pub fn to_dense(&self, dim: usize) -> Vec<GScalar> {
        let mut v = vec![GScalar::zero(); dim];
        for (i, x) in &self.entries {
            v[*i] = x.clone();
        }
        v
    }

    pub fn entries(&self) -> &[(usize, GScalar)] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, i: usize) -> GScalar {
        match self.entries.binary_search_by_key(&i, |e| e.0) {
            Ok(k) => self.entries[k].1.clone(),
            Err(_) => GScalar::zero(),
        }
    }

    pub fn leading(&self) -> Option<&(usize, GScalar)> {
        self.entries.first()
    }

    pub fn scale(&self, c: &GScalar) -> SparseVec {
        if c.is_zero() {
            return SparseVec::new();
        }
        SparseVec { entries: self.entries.iter().map(|(i, x)| (*i, x * c)).collect() }
    }

    /// `self + c · other`.
    pub fn axpy(&self, c: &GScalar, other: &SparseVec) -> SparseVec {
        if c.is_zero() {
            return self.clone();
        }
        let mut out = Vec::with_capacity(self.entries.len() + other.entries.len());
        let (mut a, mut b) = (self.entries.iter().peekable(), other.entries.iter().peekable());
        loop {
            match (a.peek(), b.peek()) {
                (Some(&&(i, ref x)), Some(&&(j, ref y))) => {
                    if i < j {
                        out.push((i, x.clone()));
                        a.next();
                    } else if j < i {
                        out.push((j, c * y));
                        b.next();
                    } else {
                        let s = x + &(c * y);
                        if !s.is_zero() {
                            out.push((i, s));
                        }
                        a.next();
                        b.next();
                    }
                }
                (Some(&&(i, ref x)), None) => {
                    out.push((i, x.clone()));
                    a.next();
                }
                (None, Some(&&(j, ref y))) => {
                    out.push((j, c * y));
                    b.next();
                }
                (None, None) => break,
            }
        }
        SparseVec { entries: out }
    }

    pub fn add(&self, other: &SparseVec) -> SparseVec {
        self.axpy(&GScalar::one(), other)
    }

    pub fn sub(&self, other: &SparseVec) -> SparseVec {
        self.axpy(&GScalar::int(-1), other)
    }

    pub fn conj(&self) -> SparseVec {
        SparseVec { entries: self.entries.iter().map(|(i, x)| (*i, x.conj())).collect() }
    }

    pub fn dot(&self, other: &SparseVec) -> GScalar {
        let mut acc = GScalar::zero();
        let (mut a, mut b) = (self.entries.iter().peekable(), other.entries.iter().peekable());
        while let (Some(&&(i, ref x)), Some(&&(j, ref y))) = (a.peek(), b.peek()) {
            if i < j {
                a.next();
            } else if j < i {
                b.next();
            } else {
                acc += &(x * y);
                a.next();
                b.next();
            }
        }
        acc
    }
}

/// Sparse matrix stored by columns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseMatrix {
    rows: usize,
    cols: Vec<SparseVec>,
}

impl SparseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        SparseMatrix { rows, cols: vec![SparseVec::new(); cols] }
    }

    pub fn from_columns(rows: usize, cols: Vec<SparseVec>) -> Self {
        debug_assert!(cols.iter().all(|c| c.entries().last().is_none_or(|e| e.0 < rows)));
        SparseMatrix { rows, cols }
    }

    pub fn identity(n: usize) -> Self {
        SparseMatrix { rows: n, cols: (0..n).map(SparseVec::unit).collect() }
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols.len()
    }

    pub fn column(&self, j: usize) -> &SparseVec {
        &self.cols[j]
    }

    pub fn columns(&self) -> &[SparseVec] {
        &self.cols
    }

    pub fn apply(&self, v: &SparseVec) -> SparseVec {
        let mut acc = SparseVec::new();
        for (j, x) in v.entries() {
            acc = acc.axpy(x, &self.cols[*j]);
        }
        acc
    }

    /// `self · rhs`.
    pub fn compose(&self, rhs: &SparseMatrix) -> SparseMatrix {
        assert_eq!(self.ncols(), rhs.nrows(), "inner dimension");
        SparseMatrix { rows: self.rows, cols: rhs.cols.iter().map(|c| self.apply(c)).collect() }
    }

    pub fn add(&self, rhs: &SparseMatrix) -> SparseMatrix {
        assert_eq!((self.rows, self.ncols()), (rhs.rows, rhs.ncols()));
        SparseMatrix { rows: self.rows, cols: self.cols.iter().zip(&rhs.cols).map(|(a, b)| a.add(b)).collect() }
    }

    /// `self + c · rhs`.
    pub fn axpy(&self, c: &GScalar, rhs: &SparseMatrix) -> SparseMatrix {
        assert_eq!((self.rows, self.ncols()), (rhs.rows, rhs.ncols()));
        SparseMatrix { rows: self.rows, cols: self.cols.iter().zip(&rhs.cols).map(|(a, b)| a.axpy(c, b)).collect() }
    }

    pub fn sub(&self, rhs: &SparseMatrix) -> SparseMatrix {
        assert_eq!((self.rows, self.ncols()), (rhs.rows, rhs.ncols()));
        SparseMatrix { rows: self.rows, cols: self.cols.iter().zip(&rhs.cols).map(|(a, b)| a.sub(b)).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.cols.iter().all(SparseVec::is_zero)
    }

    pub fn to_dense(&self) -> GMatrix {
        let cols: Vec<Vec<GScalar>> = self.cols.iter().map(|c| c.to_dense(self.rows)).collect();
        GMatrix::from_cols(self.rows, &cols)
    }

    pub fn from_dense(m: &GMatrix) -> Self {
        SparseMatrix { rows: m.rows(), cols: m.columns().iter().map(|c| SparseVec::from_dense(c)).collect() }
    }

    /// Flatten column-major into one long vector (used for spans of operators).
    pub fn flatten(&self) -> SparseVec {
        let mut entries = Vec::new();
        for (j, c) in self.cols.iter().enumerate() {
            for (i, x) in c.entries() {
                entries.push((j * self.rows + i, x.clone()));
            }
        }
        SparseVec { entries }
    }

    pub fn rank(&self) -> usize {
        let mut e = Echelon::new(self.rows);
        for c in &self.cols {
            e.insert(c.clone());
        }
        e.rank()
    }

    /// Basis of the kernel, as sparse vectors in the domain.
    pub fn kernel(&self) -> Vec<SparseVec> {
        let mut e = Echelon::with_tracking(self.rows);
        let mut kernel = Vec::new();
        for (j, c) in self.cols.iter().enumerate() {
            if let Insert::Dependent(combo) = e.insert_tracked(c.clone(), j) {
                // c_j - Σ combo = 0
                kernel.push(SparseVec::unit(j).sub(&combo));
            }
        }
        kernel
    }
}

/// Outcome of inserting into an [`Echelon`] basis.
#[derive(Clone, Debug)]
pub enum Insert {
    /// The vector was independent and became a new row.
    New,
    /// The vector lies in the span; with tracking enabled, the combination of
    /// previously inserted tags that produces it.
    Dependent(SparseVec),
}

/// Incremental reduced row echelon basis of a subspace of `GScalar^dim`.
///
/// Rows are kept fully reduced, so reducing a vector against the basis is a
/// single pass over its pivot coordinates. With tracking enabled each row
/// also records which inserted vectors (by caller-supplied tag) it is made of.
#[derive(Clone, Debug)]
pub struct Echelon {
    dim: usize,
    rows: Vec<SparseVec>,
    track: Option<Vec<SparseVec>>,
    pivot_row: BTreeMap<usize, usize>,
}

impl Echelon {
    pub fn new(dim: usize) -> Self {
        Echelon { dim, rows: Vec::new(), track: None, pivot_row: BTreeMap::new() }
    }

    pub fn with_tracking(dim: usize) -> Self {
        Echelon { dim, rows: Vec::new(), track: Some(Vec::new()), pivot_row: BTreeMap::new() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[SparseVec] {
        &self.rows
    }

    pub fn pivots(&self) -> impl Iterator<Item = usize> + '_ {
        self.pivot_row.keys().copied()
    }

    pub fn is_pivot(&self, i: usize) -> bool {
        self.pivot_row.contains_key(&i)
    }

    /// Remainder of `v` after removing its component along the basis, and
    /// the row coefficients used.
    pub fn reduce(&self, v: &SparseVec) -> (SparseVec, Vec<(usize, GScalar)>) {
        let coeffs: Vec<(usize, GScalar)> =
            v.entries().iter().filter_map(|(i, x)| self.pivot_row.get(i).map(|&r| (r, x.clone()))).collect();
        let mut rem = v.clone();
        for (r, c) in &coeffs {
            rem = rem.axpy(&-c.clone(), &self.rows[*r]);
        }
        (rem, coeffs)
    }

    pub fn contains(&self, v: &SparseVec) -> bool {
        self.reduce(v).0.is_zero()
    }

    pub fn insert(&mut self, v: SparseVec) -> bool {
        let (rem, _) = self.reduce(&v);
        if rem.is_zero() {
            return false;
        }
        self.push_row(rem, None);
        true
    }

    /// Insert with a tag; on dependence return the tag combination.
    pub fn insert_tracked(&mut self, v: SparseVec, tag: usize) -> Insert {
        let (rem, coeffs) = self.reduce(&v);
        let track = self.track.as_ref().expect("tracking disabled");
        let mut combo = SparseVec::new();
        for (r, c) in &coeffs {
            combo = combo.axpy(c, &track[*r]);
        }
        if rem.is_zero() {
            return Insert::Dependent(combo);
        }
        // rem = v - combo
        let t = SparseVec::unit(tag).sub(&combo);
        self.push_row(rem, Some(t));
        Insert::New
    }

    fn push_row(&mut self, rem: SparseVec, tag_combo: Option<SparseVec>) {
        let (p, lead) = rem.leading().cloned().expect("nonzero");
        let inv = lead.inv();
        let row = rem.scale(&inv);
        let t = tag_combo.map(|t| t.scale(&inv));
        // keep the basis reduced: clear column p from existing rows
        for k in 0..self.rows.len() {
            let c = self.rows[k].get(p);
            if !c.is_zero() {
                self.rows[k] = self.rows[k].axpy(&-c.clone(), &row);
                if let (Some(tr), Some(t)) = (self.track.as_mut(), t.as_ref()) {
                    tr[k] = tr[k].axpy(&-c.clone(), t);
                }
            }
        }
        self.pivot_row.insert(p, self.rows.len());
        self.rows.push(row);
        if let (Some(tr), Some(t)) = (self.track.as_mut(), t) {
            tr.push(t);
        }
    }

    /// Coordinates of `v` in terms of inserted tags, if `v` is in the span.
    pub fn express(&self, v: &SparseVec) -> Option<SparseVec> {
        let (rem, coeffs) = self.reduce(v);
        if !rem.is_zero() {
            return None;
        }
        let track = self.track.as_ref().expect("tracking disabled");
        let mut combo = SparseVec::new();
        for (r, c) in &coeffs {
            combo = combo.axpy(c, &track[*r]);
        }
        Some(combo)
    }
}

/// Quotient `V / W` of a pair of subspaces `W ⊆ V`, with a chosen basis of
/// the quotient and a coordinate map.
#[derive(Clone, Debug)]
pub struct Subquotient {
    sub: Echelon,
    complement: Echelon,
    reps: Vec<SparseVec>,
}

impl Subquotient {
    /// `outer` spans `V`, `inner` spans `W`. `W ⊆ V` is the caller's contract
    /// and is checked.
    pub fn new(dim: usize, outer: &[SparseVec], inner: &[SparseVec]) -> Self {
        let mut sub = Echelon::new(dim);
        for w in inner {
            sub.insert(w.clone());
        }
        let mut complement = Echelon::new(dim);
        for v in outer {
            let (r, _) = sub.reduce(v);
            complement.insert(r);
        }
        let reps = complement.rows().to_vec();
        Subquotient { sub, complement, reps }
    }

    pub fn dim(&self) -> usize {
        self.complement.rank()
    }

    /// Representative vectors of the quotient basis.
    pub fn representatives(&self) -> &[SparseVec] {
        &self.reps
    }

    /// Coordinates of the class of `v`; `None` if `v ∉ V`.
    pub fn coords(&self, v: &SparseVec) -> Option<Vec<GScalar>> {
        let (r, _) = self.sub.reduce(v);
        let (rem, coeffs) = self.complement.reduce(&r);
        if !rem.is_zero() {
            return None;
        }
        let mut out = vec![GScalar::zero(); self.dim()];
        for (row, c) in coeffs {
            out[row] = c;
        }
        Some(out)
    }
}

/// Convenience: a dense column of rationals.
pub fn rational_col(xs: &[Rational]) -> Vec<GScalar> {
    xs.iter().cloned().map(GScalar::real).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(n: i64) -> GScalar {
        GScalar::int(n)
    }

    #[test]
    fn rank_examples() {
        assert_eq!(rank(&GMatrix::zeros(3, 3)), 0);
        assert_eq!(rank(&GMatrix::identity(3)), 3);
        let m = GMatrix::from_ints(&[&[1, 1]]);
        assert_eq!(rank(&m), 1);
        assert_eq!(rank(&m.adjoint()), 1);
        let k = kernel_basis(&m);
        assert_eq!(k.shape(), (2, 1));
        assert_eq!(k.col(0), vec![g(-1), g(1)]);
        assert!(m.mul(&k).is_zero());
    }

    #[test]
    fn identity_has_empty_kernel() {
        assert_eq!(kernel_basis(&GMatrix::identity(4)).cols(), 0);
    }

    #[test]
    fn radical_examples() {
        let pd = HermitianForm::new(GMatrix::from_ints(&[&[2, 1], &[1, 2]])).unwrap();
        assert_eq!(pd.radical().cols(), 0);
        assert!(pd.is_positive_definite());
        let r1 = HermitianForm::new(GMatrix::from_ints(&[&[1, 1], &[1, 1]])).unwrap();
        let rad = r1.radical();
        assert_eq!(rad.cols(), 1);
        assert!(r1.gram().mul(&rad).is_zero());
        assert!(r1.is_positive_semidefinite());
        assert!(!r1.is_positive_definite());
    }

    #[test]
    fn psd_rejects_indefinite() {
        let f = HermitianForm::new(GMatrix::from_ints(&[&[1, 2], &[2, 1]])).unwrap();
        assert!(!f.is_positive_semidefinite());
        let f = HermitianForm::new(GMatrix::from_ints(&[&[0, 1], &[1, 0]])).unwrap();
        assert!(!f.is_positive_semidefinite());
    }

    #[test]
    fn not_hermitian_rejected() {
        let m = GMatrix::from_rows(vec![vec![g(1), GScalar::i()], vec![GScalar::i(), g(1)]]);
        assert_eq!(HermitianForm::new(m), Err(LinalgError::NotHermitian));
    }

    #[test]
    fn projection_onto_diagonal_line() {
        let f = HermitianForm::new(GMatrix::identity(2)).unwrap();
        let s = GMatrix::from_ints(&[&[1], &[1]]);
        let p = f.orth_projection(&s).unwrap();
        let h = GScalar::ratio(1, 2);
        assert_eq!(p, GMatrix::from_rows(vec![vec![h.clone(), h.clone()], vec![h.clone(), h]]));
        assert_eq!(p.mul(&p), p);
        let whole = f.orth_projection(&GMatrix::identity(2)).unwrap();
        assert_eq!(whole, GMatrix::identity(2));
    }

    #[test]
    fn projection_rejects_degenerate_span() {
        let f = HermitianForm::new(GMatrix::from_ints(&[&[1, 0], &[0, 0]])).unwrap();
        let s = GMatrix::from_ints(&[&[0], &[1]]);
        assert_eq!(f.orth_projection(&s), Err(LinalgError::Degenerate));
    }

    #[test]
    fn echelon_tracking_expresses_dependents() {
        let mut e = Echelon::with_tracking(3);
        let a = SparseVec::from_entries(vec![(0, g(1)), (1, g(2))]);
        let b = SparseVec::from_entries(vec![(1, g(1)), (2, g(1))]);
        assert!(matches!(e.insert_tracked(a.clone(), 0), Insert::New));
        assert!(matches!(e.insert_tracked(b.clone(), 1), Insert::New));
        let c = a.axpy(&g(3), &b);
        let combo = e.express(&c).unwrap();
        assert_eq!(combo, SparseVec::from_entries(vec![(0, g(1)), (1, g(3))]));
    }

    #[test]
    fn sparse_kernel_matches_dense() {
        let m = GMatrix::from_ints(&[&[1, 2, 3, 0], &[2, 4, 6, 1], &[0, 0, 0, 1]]);
        let s = SparseMatrix::from_dense(&m);
        assert_eq!(s.rank(), rank(&m));
        let ker = s.kernel();
        assert_eq!(ker.len(), 4 - rank(&m));
        for v in ker {
            assert!(s.apply(&v).is_zero());
        }
    }

    #[test]
    fn subquotient_coordinates() {
        let e = |i| SparseVec::unit(i);
        let q = Subquotient::new(3, &[e(0), e(1), e(2)], &[e(0).add(&e(1))]);
        assert_eq!(q.dim(), 2);
        // e0 ≡ -e1 modulo W
        let c0 = q.coords(&e(0)).unwrap();
        let c1 = q.coords(&e(1)).unwrap();
        assert_eq!(c0, c1.iter().map(|x| -x.clone()).collect::<Vec<_>>());
        assert!(q.coords(&e(0).add(&e(1))).unwrap().iter().all(GScalar::is_zero));
    }
}
