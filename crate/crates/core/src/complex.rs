//! Presimplicial modules and chain complexes.
//!
//! Algebraic complexes of an extension are realized on Peirce words (see
//! [`crate::peirce`]); geometric complexes of a groupoid on the tuple spaces
//! of [`crate::spaces`].

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::algebra::AlgebraError;
use crate::dimension::FiniteModule;
use crate::fiber_square::FiberSquare;
use crate::groupoid::FiniteGroupoid;
use crate::linalg::{SparseMatrix, SparseVec, Subquotient};
use crate::peirce::{chain_add, closed_words, insert_unit, merge, open_words, wrap, Peirce, Word, WordChain};
use crate::scalar::GScalar;
use crate::spaces::{geometric_face, GeometricKind, GeometricSpace};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ComplexError {
    /// Homology in degree `n` needs the boundary out of degree `n + 1`.
    DegreeOutOfRange {
        degree: usize,
        cap: usize,
    },
    Algebra(AlgebraError),
    /// The coefficient action does not commute with face `face` in `degree`.
    ActionNotEquivariant {
        degree: usize,
        face: usize,
    },
    /// The two sides of the balanced tensor use different Peirce bases.
    PeirceMismatch,
}

impl From<AlgebraError> for ComplexError {
    fn from(e: AlgebraError) -> Self {
        ComplexError::Algebra(e)
    }
}

impl fmt::Display for ComplexError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ComplexError::DegreeOutOfRange { degree, cap } => {
                write!(f, "homology in degree {degree} needs degree {} but the cap is {cap}", degree + 1)
            }
            ComplexError::Algebra(e) => write!(f, "{e}"),
            ComplexError::ActionNotEquivariant { degree, face } => {
                write!(f, "coefficient action does not commute with face {face} in degree {degree}")
            }
            ComplexError::PeirceMismatch => write!(f, "left and right Peirce bases differ"),
        }
    }
}

/// Degrees `0..=cap` of a presimplicial module with its boundary.
#[derive(Clone, Debug)]
pub struct ChainComplex {
    dims: Vec<usize>,
    faces: Vec<Vec<SparseMatrix>>,
    boundaries: Vec<SparseMatrix>,
}

fn alternating_sum(rows: usize, cols: usize, faces: &[SparseMatrix]) -> SparseMatrix {
    let mut d = SparseMatrix::zeros(rows, cols);
    for (i, f) in faces.iter().enumerate() {
        d = if i % 2 == 0 { d.add(f) } else { d.sub(f) };
    }
    d
}

impl ChainComplex {
    /// `faces[n]` lists the face maps out of degree `n` (empty for `n = 0`).
    pub fn from_faces(dims: Vec<usize>, faces: Vec<Vec<SparseMatrix>>) -> Self {
        assert_eq!(dims.len(), faces.len());
        let boundaries = (0..dims.len())
            .map(|n| {
                if n == 0 {
                    SparseMatrix::zeros(0, dims[0])
                } else {
                    alternating_sum(dims[n - 1], dims[n], &faces[n])
                }
            })
            .collect();
        ChainComplex { dims, faces, boundaries }
    }

    pub fn cap(&self) -> usize {
        self.dims.len() - 1
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self, n: usize) -> usize {
        self.dims[n]
    }

    pub fn faces(&self, n: usize) -> &[SparseMatrix] {
        &self.faces[n]
    }

    /// `d_n : C_n → C_{n−1}`; `d_0` is the zero map to the zero space.
    pub fn boundary(&self, n: usize) -> &SparseMatrix {
        &self.boundaries[n]
    }

    /// First degree `n` with `d_{n−1} d_n ≠ 0`.
    pub fn check_d_squared(&self) -> Result<(), usize> {
        for n in 2..self.dims.len() {
            if !self.boundaries[n - 1].compose(&self.boundaries[n]).is_zero() {
                return Err(n);
            }
        }
        Ok(())
    }

    /// First `(n, i, j)` with `π_i π_j ≠ π_{j−1} π_i`.
    pub fn check_presimplicial(&self) -> Result<(), (usize, usize, usize)> {
        for n in 2..self.dims.len() {
            let (cur, prev) = (&self.faces[n], &self.faces[n - 1]);
            for j in 0..cur.len() {
                for i in 0..j {
                    if prev[i].compose(&cur[j]) != prev[j - 1].compose(&cur[i]) {
                        return Err((n, i, j));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn rank(&self, n: usize) -> usize {
        if n == 0 {
            0
        } else {
            self.boundaries[n].rank()
        }
    }

    /// `dim ker d_n − rank d_{n+1}`.
    pub fn homology_dim(&self, n: usize) -> Result<usize, ComplexError> {
        if n >= self.cap() {
            return Err(ComplexError::DegreeOutOfRange { degree: n, cap: self.cap() });
        }
        Ok(self.dims[n] - self.rank(n) - self.rank(n + 1))
    }

    /// `ker d_n / im d_{n+1}`.
    pub fn homology(&self, n: usize) -> Result<Subquotient, ComplexError> {
        if n >= self.cap() {
            return Err(ComplexError::DegreeOutOfRange { degree: n, cap: self.cap() });
        }
        Ok(homology_quotient(self.dims[n], &self.boundaries[n], &self.boundaries[n + 1], n == 0))
    }
}

fn homology_quotient(dim: usize, d_n: &SparseMatrix, d_next: &SparseMatrix, bottom: bool) -> Subquotient {
    let ker: Vec<SparseVec> = if bottom { (0..dim).map(SparseVec::unit).collect() } else { d_n.kernel() };
    Subquotient::new(dim, &ker, d_next.columns())
}

/// Induced action of `actions` (one matrix per coefficient basis element)
/// on a subquotient of the space they act on.
pub fn induced_module(q: &Subquotient, actions: &[SparseMatrix]) -> FiniteModule {
    let k = q.dim();
    let mats = actions
        .iter()
        .map(|t| {
            let cols = q
                .representatives()
                .iter()
                .map(|r| SparseVec::from_dense(&q.coords(&t.apply(r)).expect("action preserves the subquotient")))
                .collect();
            SparseMatrix::from_columns(k, cols)
        })
        .collect();
    FiniteModule::new(k, mats)
}

/// Sizes of the Peirce blocks, `count[k][l] = #{r : left(r) = k, right(r) = l}`.
fn block_counts(p: &Peirce) -> Vec<Vec<u128>> {
    let m = p.frame_len();
    let mut c = vec![vec![0u128; m]; m];
    for r in 0..p.len() {
        c[p.left(r)][p.right(r)] += 1;
    }
    c
}

/// The three word complexes of an extension.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum WordKind {
    /// `K_n = A^{⊗_B (n+2)}`, faces merge neighbours.
    Bar,
    /// Hochschild complex with coefficients in `A`: `B`-coinvariants of
    /// `A^{⊗_B (n+1)}`.
    Cyclic,
    /// Hochschild complex with coefficients in `A ⊗_B A`: `B`-coinvariants
    /// of `A^{⊗_B (n+2)}`.
    Acyclic,
}

impl WordKind {
    pub fn name(self) -> &'static str {
        match self {
            WordKind::Bar => "bar",
            WordKind::Cyclic => "cyclic",
            WordKind::Acyclic => "acyclic",
        }
    }

    pub fn geometric(self) -> GeometricKind {
        match self {
            WordKind::Bar => GeometricKind::Bar,
            WordKind::Cyclic => GeometricKind::Cyclic,
            WordKind::Acyclic => GeometricKind::Acyclic,
        }
    }
}

/// A word complex, evaluated lazily on words.
#[derive(Clone, Debug)]
pub struct WordComplex {
    peirce: Peirce,
    kind: WordKind,
}

impl WordComplex {
    pub fn new(peirce: Peirce, kind: WordKind) -> Self {
        WordComplex { peirce, kind }
    }

    pub fn peirce(&self) -> &Peirce {
        &self.peirce
    }

    pub fn kind(&self) -> WordKind {
        self.kind
    }

    pub fn word_len(&self, n: usize) -> usize {
        match self.kind {
            WordKind::Cyclic => n + 1,
            WordKind::Bar | WordKind::Acyclic => n + 2,
        }
    }

    pub fn words(&self, n: usize) -> Vec<Word> {
        match self.kind {
            WordKind::Bar => open_words(&self.peirce, n + 2),
            WordKind::Cyclic => closed_words(&self.peirce, n + 1),
            WordKind::Acyclic => closed_words(&self.peirce, n + 2),
        }
    }

    /// Number of basis words in degree `n`, without enumerating them.
    pub fn word_count(&self, n: usize) -> u128 {
        let c = block_counts(&self.peirce);
        let m = c.len();
        let len = self.word_len(n);
        // paths[k][l]: words from block k ending at block l
        let mut paths = c.clone();
        for _ in 1..len {
            let mut next = vec![vec![0u128; m]; m];
            for i in 0..m {
                for j in 0..m {
                    if paths[i][j] == 0 {
                        continue;
                    }
                    for l in 0..m {
                        next[i][l] += paths[i][j] * c[j][l];
                    }
                }
            }
            paths = next;
        }
        match self.kind {
            WordKind::Bar => paths.iter().flatten().sum(),
            _ => (0..m).map(|k| paths[k][k]).sum(),
        }
    }

    pub fn face_count(&self, n: usize) -> usize {
        match self.kind {
            WordKind::Bar => n + 1,
            _ if n == 0 => 0,
            _ => n + 1,
        }
    }

    /// Face `i` of a degree-`n` word.
    pub fn face(&self, n: usize, i: usize, w: &[usize]) -> Vec<(Word, GScalar)> {
        let p = &self.peirce;
        match self.kind {
            WordKind::Bar => merge(p, w, i),
            WordKind::Cyclic if i < n => merge(p, w, i),
            WordKind::Acyclic if i < n => merge(p, w, i + 1),
            _ => wrap(p, w),
        }
    }

    pub fn boundary_chain(&self, n: usize, c: &WordChain) -> WordChain {
        let mut out = WordChain::new();
        for (w, x) in c {
            for i in 0..self.face_count(n) {
                let sign = if i % 2 == 0 { x.clone() } else { -x };
                for (v, y) in self.face(n, i, w) {
                    chain_add(&mut out, v, &sign * &y);
                }
            }
        }
        out
    }

    fn single(w: &[usize]) -> WordChain {
        let mut c = WordChain::new();
        c.insert(w.to_vec(), GScalar::one());
        c
    }

    /// `r` (bar: unit in front) or `s` (acyclic: unit after the first
    /// letter). The cyclic complex has no contracting homotopy.
    pub fn homotopy(&self, c: &WordChain) -> Option<WordChain> {
        let pos = match self.kind {
            WordKind::Bar => 0,
            WordKind::Acyclic => 1,
            WordKind::Cyclic => return None,
        };
        let mut out = WordChain::new();
        for (w, x) in c {
            for (v, y) in insert_unit(&self.peirce, w, pos) {
                chain_add(&mut out, v, x * &y);
            }
        }
        Some(out)
    }

    /// Degrees where the homotopy identity is asserted: all `n ≥ 0` for the
    /// augmented bar complex, `n ≥ 1` for the acyclic one.
    pub fn homotopy_range_start(&self) -> Option<usize> {
        match self.kind {
            WordKind::Bar => Some(0),
            WordKind::Acyclic => Some(1),
            WordKind::Cyclic => None,
        }
    }

    /// `d h + h d = id` on every word of degree `n` (with the augmentation
    /// `μ` in place of `d_0` for the bar complex). Returns the first
    /// failing word.
    pub fn check_homotopy(&self, n: usize) -> Result<(), Word> {
        let start = self.homotopy_range_start().ok_or_else(Vec::new)?;
        if n < start {
            return Ok(());
        }
        for w in self.words(n) {
            let c = Self::single(&w);
            let h = self.homotopy(&c).expect("kind has a homotopy");
            let mut total = self.boundary_chain(n + 1, &h);
            let lower = if n == 0 { self.augmentation(&c) } else { self.boundary_chain(n, &c) };
            for (v, x) in self.homotopy(&lower).expect("kind has a homotopy") {
                chain_add(&mut total, v, x);
            }
            if total != c {
                return Err(w);
            }
        }
        Ok(())
    }

    /// `μ(a_0 ⊗ a_1) = a_0 a_1` on bar degree 0, as one-letter words.
    pub fn augmentation(&self, c: &WordChain) -> WordChain {
        let mut out = WordChain::new();
        for (w, x) in c {
            for (v, y) in merge(&self.peirce, w, 0) {
                chain_add(&mut out, v, x * &y);
            }
        }
        out
    }

    /// `d_{n−1} d_n = 0` on every word of degree `n`.
    pub fn check_d_squared(&self, n: usize) -> Result<(), Word> {
        if n < 2 {
            return Ok(());
        }
        for w in self.words(n) {
            let dd = self.boundary_chain(n - 1, &self.boundary_chain(n, &Self::single(&w)));
            if !dd.is_empty() {
                return Err(w);
            }
        }
        Ok(())
    }

    /// `π_i π_j = π_{j−1} π_i` for `i < j` on every word of degree `n`.
    pub fn check_presimplicial(&self, n: usize) -> Result<(), (usize, usize, Word)> {
        if n < 2 {
            return Ok(());
        }
        let apply = |m: usize, i: usize, c: &WordChain| {
            let mut out = WordChain::new();
            for (w, x) in c {
                for (v, y) in self.face(m, i, w) {
                    chain_add(&mut out, v, x * &y);
                }
            }
            out
        };
        for w in self.words(n) {
            let c = Self::single(&w);
            for j in 0..self.face_count(n) {
                let cj = apply(n, j, &c);
                for i in 0..j {
                    if apply(n - 1, i, &cj) != apply(n - 1, j - 1, &apply(n, i, &c)) {
                        return Err((i, j, w));
                    }
                }
            }
        }
        Ok(())
    }

    /// Face matrices out of degree `n` on enumerated words.
    pub fn face_matrices(&self, n: usize, words: &[Word], prev: &BTreeMap<Word, usize>) -> Vec<SparseMatrix> {
        (0..self.face_count(n))
            .map(|i| {
                let cols = words
                    .iter()
                    .map(|w| {
                        SparseVec::from_entries(self.face(n, i, w).into_iter().map(|(v, c)| (prev[&v], c)).collect())
                    })
                    .collect();
                SparseMatrix::from_columns(prev.len(), cols)
            })
            .collect()
    }

    /// Degrees `0..=cap` as matrices, with the enumerated word bases.
    pub fn materialize(&self, cap: usize) -> (ChainComplex, Vec<Vec<Word>>) {
        let levels: Vec<Vec<Word>> = (0..=cap).map(|n| self.words(n)).collect();
        let index: Vec<BTreeMap<Word, usize>> =
            levels.iter().map(|ws| ws.iter().cloned().enumerate().map(|(i, w)| (w, i)).collect()).collect();
        let faces = (0..=cap)
            .map(|n| if n == 0 { Vec::new() } else { self.face_matrices(n, &levels[n], &index[n - 1]) })
            .collect();
        (ChainComplex::from_faces(levels.iter().map(Vec::len).collect(), faces), levels)
    }
}

/// Action of the fiber square on acyclic words through their first two
/// letters, one matrix per basis element of the fiber square.
pub fn fiber_action(fs: &FiberSquare, words: &[Word]) -> Result<Vec<SparseMatrix>, ComplexError> {
    let t = fs.tensor();
    let (pa, pc) = (t.left_peirce(), t.right_peirce());
    if pa.len() != pc.len() || (0..pa.len()).any(|r| pa.vector(r) != pc.vector(r)) {
        return Err(ComplexError::PeirceMismatch);
    }
    let index: BTreeMap<&[usize], usize> = words.iter().enumerate().map(|(i, w)| (w.as_slice(), i)).collect();
    let n = words.len();
    Ok(fs
        .operators()
        .iter()
        .map(|op| {
            let cols = words
                .iter()
                .map(|w| {
                    let p = t.pair_index(w[0], w[1]).expect("closed words start with a pair");
                    let mut entries = Vec::new();
                    for (q, c) in op.column(p).entries() {
                        let (r, s) = t.pairs()[*q];
                        let mut v = Vec::with_capacity(w.len());
                        v.push(r);
                        v.push(s);
                        v.extend_from_slice(&w[2..]);
                        entries.push((index[v.as_slice()], c.clone()));
                    }
                    SparseVec::from_entries(entries)
                })
                .collect();
            SparseMatrix::from_columns(n, cols)
        })
        .collect())
}

/// Faces commute with the coefficient action in every degree `1..=cap`.
pub fn check_equivariant(c: &ChainComplex, actions: &[Vec<SparseMatrix>]) -> Result<(), ComplexError> {
    for n in 1..=c.cap() {
        for (i, f) in c.faces(n).iter().enumerate() {
            for (lo, hi) in actions[n - 1].iter().zip(&actions[n]) {
                if f.compose(hi) != lo.compose(f) {
                    return Err(ComplexError::ActionNotEquivariant { degree: n, face: i });
                }
            }
        }
    }
    Ok(())
}

/// `ℂ[−]` of a geometric space, with 0/1 face matrices.
pub fn geometric_complex(space: &GeometricSpace) -> ChainComplex {
    let dims: Vec<usize> = space.levels.iter().map(|l| l.len()).collect();
    let faces = space
        .levels
        .iter()
        .enumerate()
        .map(|(n, l)| {
            l.faces
                .iter()
                .map(|f| {
                    let cols = f.iter().map(|&k| SparseVec::unit(k)).collect();
                    SparseMatrix::from_columns(if n == 0 { 0 } else { dims[n - 1] }, cols)
                })
                .collect()
        })
        .collect();
    ChainComplex::from_faces(dims, faces)
}

/// Left translation `α·(α_0, …, α_n) = (αα_0, …, αα_n)` on the classifying
/// space, one matrix per groupoid element.
pub fn classifying_action(g: &FiniteGroupoid, space: &GeometricSpace, n: usize) -> Vec<SparseMatrix> {
    let level = space.level(n);
    (0..g.len())
        .map(|a| {
            let cols = level
                .tuples()
                .iter()
                .map(|t| {
                    if g.source(a) != g.target(t[0]) {
                        return SparseVec::new();
                    }
                    let moved: Vec<usize> = t.iter().map(|&b| g.mul(a, b)).collect();
                    SparseVec::unit(level.find(&moved).expect("translation stays in the space"))
                })
                .collect();
            SparseMatrix::from_columns(level.len(), cols)
        })
        .collect()
}

/// `h(α_0, …, α_n) = (1_{t}, α_0, …, α_n)` satisfies `dh + hd = id` on
/// classifying degrees `1..cap`. Returns the first failing degree.
pub fn check_classifying_homotopy(g: &FiniteGroupoid, space: &GeometricSpace) -> Result<(), usize> {
    let c = geometric_complex(space);
    for n in 1..space.cap() {
        let h = |m: usize| {
            let (lvl, up) = (space.level(m), space.level(m + 1));
            let cols = lvl
                .tuples()
                .iter()
                .map(|t| {
                    let mut v = Vec::with_capacity(t.len() + 1);
                    v.push(g.unit(g.target(t[0])));
                    v.extend_from_slice(t);
                    SparseVec::unit(up.find(&v).expect("prepending a unit stays in the space"))
                })
                .collect();
            SparseMatrix::from_columns(up.len(), cols)
        };
        let lhs = c.boundary(n + 1).compose(&h(n)).add(&h(n - 1).compose(c.boundary(n)));
        if lhs != SparseMatrix::identity(c.dim(n)) {
            return Err(n);
        }
    }
    Ok(())
}

/// Explicit comparison of a word complex of `ℂG/L^∞X` with the matching
/// geometric complex: words of the plain Peirce basis are tuples, and
/// faces agree term by term. Returns the first `(degree, face)` mismatch;
/// face `usize::MAX` flags a basis mismatch.
pub fn compare_geometric(wc: &WordComplex, g: &FiniteGroupoid, cap: usize) -> Result<(), (usize, usize)> {
    let p = wc.peirce();
    if !p.is_plain() {
        return Err((0, usize::MAX));
    }
    let space = GeometricSpace::new(g, wc.kind().geometric(), cap);
    let to_tuple = |w: &[usize]| -> Vec<usize> { w.iter().map(|&r| p.plain_index(r).expect("plain")).collect() };
    for n in 0..=cap {
        let words = wc.words(n);
        let level = space.level(n);
        let mut seen = alloc::collections::BTreeSet::new();
        for w in &words {
            match level.find(&to_tuple(w)) {
                Some(k) => {
                    seen.insert(k);
                }
                None => return Err((n, usize::MAX)),
            }
        }
        if seen.len() != level.len() || words.len() != level.len() {
            return Err((n, usize::MAX));
        }
        for i in 0..wc.face_count(n) {
            for w in &words {
                let alg = wc.face(n, i, w);
                let geo = geometric_face(g, wc.kind().geometric(), n, &to_tuple(w), i);
                if alg.len() != 1 || !alg[0].1.is_one() || to_tuple(&alg[0].0) != geo {
                    return Err((n, i));
                }
            }
        }
    }
    Ok(())
}

/// One degree of the classifying/acyclic comparison.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ThetaDegree {
    pub degree: usize,
    pub domain: usize,
    pub codomain: usize,
    pub bijective: bool,
    pub inverse_two_sided: bool,
    pub faces_commute: bool,
    /// `ξ(γ'γ ⋆ ω) = γ'·ξ(γ ⋆ ω)`.
    pub module_map: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ThetaReport {
    pub degrees: Vec<ThetaDegree>,
    /// `θ_n(αω) = (α⁻¹, α) θ_n(ω)` on all tuples.
    pub equivariant: bool,
    /// `θ_n` commutes with faces on all tuples.
    pub theta_faces: bool,
}

impl ThetaReport {
    pub fn holds(&self) -> bool {
        self.equivariant
            && self.theta_faces
            && self.degrees.iter().all(|d| d.bijective && d.inverse_two_sided && d.faces_commute && d.module_map)
    }
}

/// `θ_n(α_0, …, α_n) = (α_n⁻¹, α_0, α_0⁻¹α_1, …, α_{n−1}⁻¹α_n)`.
pub fn theta(g: &FiniteGroupoid, w: &[usize]) -> Vec<usize> {
    let n = w.len() - 1;
    let mut out = Vec::with_capacity(n + 2);
    out.push(g.inverse(w[n]));
    out.push(w[0]);
    for k in 1..=n {
        out.push(g.mul(g.inverse(w[k - 1]), w[k]));
    }
    out
}

/// `(α, β)·(a_0, a_1, …) = (a_0α, βa_1, …)`, if defined.
fn act_env(g: &FiniteGroupoid, (a, b): (usize, usize), t: &[usize]) -> Option<Vec<usize>> {
    let mut out = t.to_vec();
    out[0] = g.compose(t[0], a)?;
    out[1] = g.compose(b, t[1])?;
    Some(out)
}

/// `(α, β)(α', β') = (α'α, ββ')`, if defined.
fn env_mul(g: &FiniteGroupoid, (a, b): (usize, usize), (a2, b2): (usize, usize)) -> Option<(usize, usize)> {
    Some((g.compose(a2, a)?, g.compose(b, b2)?))
}

type Domain = ((usize, usize), Vec<usize>);

/// `ξ_n(γ ⋆ ω) = γ·θ_n(1, ω)`.
fn xi(g: &FiniteGroupoid, (gamma, omega): &Domain) -> Option<Vec<usize>> {
    let x = if omega.is_empty() { g.target(gamma.0) } else { g.target(omega[0]) };
    let mut w = Vec::with_capacity(omega.len() + 1);
    w.push(g.unit(x));
    w.extend_from_slice(omega);
    act_env(g, *gamma, &theta(g, &w))
}

/// Inverse of `ξ_n` through cumulative products.
fn xi_inverse(g: &FiniteGroupoid, t: &[usize]) -> Domain {
    let n = t.len() - 2;
    let mut omega = Vec::with_capacity(n);
    let mut acc: Option<usize> = None;
    for &a in &t[2..] {
        let next = match acc {
            None => a,
            Some(p) => g.mul(p, a),
        };
        omega.push(next);
        acc = Some(next);
    }
    let alpha = match acc {
        None => t[0],
        Some(p) => g.mul(p, t[0]),
    };
    ((alpha, t[1]), omega)
}

/// Domain basis of `ℂG^e ⊗_{ℂG} C_n(EG)`: `γ ⋆ ω` with `ω ∈ E^{n−1}G`
/// sharing the target of the first component of `γ`.
fn theta_domain(g: &FiniteGroupoid, env_pairs: &[(usize, usize)], n: usize) -> Vec<Domain> {
    if n == 0 {
        return env_pairs.iter().map(|&p| (p, Vec::new())).collect();
    }
    let omegas = crate::spaces::geometric_tuples(g, GeometricKind::Classifying, n - 1);
    let mut out = Vec::new();
    for &p in env_pairs {
        for o in &omegas {
            if g.target(o[0]) == g.target(p.0) {
                out.push((p, o.clone()));
            }
        }
    }
    out
}

/// Face `i` of `γ ⋆ ω`, rewritten so the chain starts with a unit.
fn domain_face(g: &FiniteGroupoid, (gamma, omega): &Domain, i: usize) -> Option<Domain> {
    if i == 0 {
        let a = omega[0];
        let moved = env_mul(g, *gamma, (g.inverse(a), a))?;
        let rest = omega[1..].iter().map(|&b| g.mul(g.inverse(a), b)).collect();
        Some((moved, rest))
    } else {
        let mut o = omega.clone();
        o.remove(i - 1);
        Some((*gamma, o))
    }
}

pub fn theta_check(g: &FiniteGroupoid, cap: usize) -> ThetaReport {
    let env = g.enveloping();
    let z = GeometricSpace::new(g, GeometricKind::Acyclic, cap);
    let e = GeometricSpace::new(g, GeometricKind::Classifying, cap);
    let mut degrees = Vec::new();
    for n in 0..=cap {
        let dom = theta_domain(g, &env.pairs, n);
        let level = z.level(n);
        let images: Vec<Option<Vec<usize>>> = dom.iter().map(|d| xi(g, d)).collect();
        let found: Vec<Option<usize>> = images.iter().map(|t| t.as_ref().and_then(|t| level.find(t))).collect();
        let distinct: alloc::collections::BTreeSet<usize> = found.iter().flatten().copied().collect();
        let bijective = found.iter().all(Option::is_some) && distinct.len() == level.len() && dom.len() == level.len();
        let inverse_two_sided = level.tuples().iter().all(|t| {
            let d = xi_inverse(g, t);
            xi(g, &d).as_deref() == Some(t.as_slice())
        }) && dom.iter().all(|d| xi(g, d).map(|t| xi_inverse(g, &t)).as_ref() == Some(d));
        let faces_commute = n == 0
            || dom.iter().all(|d| {
                let t = xi(g, d).expect("checked");
                (0..=n).all(|i| {
                    let lhs = domain_face(g, d, i).and_then(|f| xi(g, &f));
                    lhs == Some(geometric_face(g, GeometricKind::Acyclic, n, &t, i))
                })
            });
        let module_map = dom.iter().all(|d| {
            let t = xi(g, d).expect("checked");
            env.pairs.iter().all(|&h| match env_mul(g, h, d.0) {
                Some(hg) => xi(g, &(hg, d.1.clone())) == act_env(g, h, &t),
                None => act_env(g, h, &t).is_none(),
            })
        });
        degrees.push(ThetaDegree {
            degree: n,
            domain: dom.len(),
            codomain: level.len(),
            bijective,
            inverse_two_sided,
            faces_commute,
            module_map,
        });
    }
    let mut equivariant = true;
    let mut theta_faces = true;
    for n in 0..=cap {
        for w in e.level(n).tuples() {
            let t = theta(g, w);
            for a in 0..g.len() {
                if g.source(a) != g.target(w[0]) {
                    continue;
                }
                let moved: Vec<usize> = w.iter().map(|&b| g.mul(a, b)).collect();
                equivariant &= act_env(g, (g.inverse(a), a), &t).as_ref() == Some(&theta(g, &moved));
            }
            if n > 0 {
                for i in 0..=n {
                    let mut f = w.clone();
                    f.remove(i);
                    theta_faces &= theta(g, &f) == geometric_face(g, GeometricKind::Acyclic, n, &t, i);
                }
            }
        }
    }
    ThetaReport { degrees, equivariant, theta_faces }
}

/// Name used in reports.
pub fn describe(kind: WordKind, n: usize) -> String {
    alloc::format!("{}[{n}]", kind.name())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::TracialAlgebra;
    use crate::extension::{convolution_algebra, Extension};
    use crate::fiber_square::{fiber_square, FiberOptions};
    use crate::groupoid::{FiniteGroup, FiniteMeasuredSpace};

    fn pair(n: usize) -> FiniteGroupoid {
        FiniteGroupoid::pair_relation(FiniteMeasuredSpace::uniform(n))
    }

    fn wc(ext: &Extension, kind: WordKind) -> WordComplex {
        WordComplex::new(Peirce::new(ext).unwrap(), kind)
    }

    #[test]
    fn bar_dimensions_and_homotopy() {
        let d = Extension::matrix_over_diagonal(2);
        let bar = wc(&d, WordKind::Bar);
        assert_eq!(bar.words(0).len(), 8);
        assert_eq!(bar.words(1).len(), 16);
        for n in 0..4 {
            assert_eq!(bar.word_count(n), bar.words(n).len() as u128);
            assert_eq!(bar.check_homotopy(n), Ok(()));
            assert_eq!(bar.check_d_squared(n), Ok(()));
            assert!(bar.check_presimplicial(n).is_ok());
        }
        let (c, _) = bar.materialize(4);
        assert_eq!(c.check_d_squared(), Ok(()));
        assert_eq!(c.check_presimplicial(), Ok(()));
        for n in 1..4 {
            assert_eq!(c.homology_dim(n), Ok(0));
        }
        // B = A: every K_n is A.
        let w = Extension::whole(&TracialAlgebra::group_algebra(&FiniteGroup::cyclic(2)));
        let bar = wc(&w, WordKind::Bar);
        for n in 0..4 {
            assert_eq!(bar.words(n).len(), 2);
        }
    }

    #[test]
    fn hochschild_degree_zero() {
        let d = Extension::matrix_over_diagonal(2);
        let cyc = wc(&d, WordKind::Cyclic);
        assert_eq!(cyc.words(0).len(), 2);
        let acyc = wc(&d, WordKind::Acyclic);
        let (c, _) = acyc.materialize(2);
        assert_eq!(c.dim(0), 4);
        assert_eq!(c.homology_dim(0), Ok(2));
        // HH_0(ℂG/ℂ) = class functions.
        let s3 = Extension::group_over_scalars(&FiniteGroup::symmetric(3));
        let (c, _) = wc(&s3, WordKind::Cyclic).materialize(1);
        assert_eq!(c.dim(0), 6);
        assert_eq!(c.homology_dim(0), Ok(3));
        let c2 = Extension::group_over_scalars(&FiniteGroup::cyclic(2));
        let (c, _) = wc(&c2, WordKind::Cyclic).materialize(1);
        assert_eq!(c.homology_dim(0), Ok(2));
    }

    #[test]
    fn acyclic_homotopy_and_rank_agree() {
        for ext in [Extension::matrix_over_diagonal(2), Extension::group_over_scalars(&FiniteGroup::cyclic(2))] {
            let z = wc(&ext, WordKind::Acyclic);
            let (c, _) = z.materialize(4);
            assert_eq!(c.check_d_squared(), Ok(()));
            assert_eq!(c.check_presimplicial(), Ok(()));
            for n in 1..4 {
                assert_eq!(z.check_homotopy(n), Ok(()));
                assert_eq!(c.homology_dim(n), Ok(0));
            }
        }
    }

    #[test]
    fn word_complexes_match_geometric() {
        for g in [pair(2), FiniteGroupoid::from_group(&FiniteGroup::cyclic(2)), pair(3)] {
            let ext = convolution_algebra(&g);
            for kind in [WordKind::Bar, WordKind::Cyclic, WordKind::Acyclic] {
                assert_eq!(compare_geometric(&wc(&ext, kind), &g, 3), Ok(()), "{}", kind.name());
            }
        }
    }

    #[test]
    fn geometric_complexes() {
        let c2 = FiniteGroupoid::from_group(&FiniteGroup::cyclic(2));
        let s = GeometricSpace::new(&c2, GeometricKind::Classifying, 2);
        let c = geometric_complex(&s);
        assert_eq!(c.dims(), &[2, 4, 8]);
        for g in [pair(2), c2.clone()] {
            for kind in GeometricKind::ALL {
                let c = geometric_complex(&GeometricSpace::new(&g, kind, 4));
                assert_eq!(c.check_d_squared(), Ok(()));
                assert_eq!(c.check_presimplicial(), Ok(()));
            }
            let s = GeometricSpace::new(&g, GeometricKind::Classifying, 4);
            assert_eq!(check_classifying_homotopy(&g, &s), Ok(()));
            let c = geometric_complex(&s);
            for n in 1..4 {
                assert_eq!(c.homology_dim(n), Ok(0));
            }
            assert_eq!(c.homology_dim(0), Ok(g.base().len()));
            let acts: Vec<Vec<SparseMatrix>> = (0..=4).map(|n| classifying_action(&g, &s, n)).collect();
            assert_eq!(check_equivariant(&c, &acts), Ok(()));
        }
    }

    #[test]
    fn theta_is_an_isomorphism() {
        for g in [pair(2), FiniteGroupoid::from_group(&FiniteGroup::cyclic(2)), pair(3)] {
            let r = theta_check(&g, 3);
            assert!(r.holds(), "{r:?}");
        }
        let r = theta_check(&pair(2), 2);
        let dims: Vec<usize> = r.degrees.iter().map(|d| d.codomain).collect();
        assert_eq!(dims, vec![4, 8, 16]);
    }

    #[test]
    fn l2_action_commutes_with_faces() {
        let ext = Extension::matrix_over_diagonal(2);
        let fs = fiber_square(&ext, &ext, FiberOptions::default()).unwrap();
        let z = WordComplex::new(fs.tensor().left_peirce().clone(), WordKind::Acyclic);
        let (c, levels) = z.materialize(3);
        let acts: Vec<Vec<SparseMatrix>> = levels.iter().map(|ws| fiber_action(&fs, ws).unwrap()).collect();
        assert_eq!(check_equivariant(&c, &acts), Ok(()));
        let h0 = c.homology(0).unwrap();
        let m = induced_module(&h0, &acts[0]);
        assert_eq!(m.dim(), 2);
        assert!(m.check(fs.algebra()).is_ok());
    }
}
