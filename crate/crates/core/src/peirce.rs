//! Peirce decomposition of `A` relative to a frame of minimal projections of
//! a commutative `B`.
//!
//! With `B = ⊕ ℂf_k`, every balanced tensor power `A ⊗_B ⋯ ⊗_B A` has a
//! basis of words `(r_1, …, r_m)` of Peirce basis vectors with
//! `right(r_i) = left(r_{i+1})`, and its `B`-bimodule coinvariants have a
//! basis of closed words, where additionally `right(r_m) = left(r_1)`.

use alloc::collections::btree_map::Entry;
use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::algebra::{elem_add, elem_scale, elem_sub, elem_zero, AlgebraError, Elem, SubspaceCoords};
use crate::extension::Extension;
use crate::linalg::{Echelon, SparseVec};
use crate::scalar::GScalar;

/// Orthogonal minimal projections of `B` summing to `1`.
///
/// Candidates are idempotent rescalings of basis elements of `B` and
/// `(1 ± b)/2` for self-adjoint unitaries `b ∈ B`; the frame is their common
/// refinement and must have `dim B` members.
pub fn find_frame(ext: &Extension) -> Result<Vec<Elem>, AlgebraError> {
    if !ext.sub_is_commutative() {
        return Err(AlgebraError::NoProjectionFrame);
    }
    let a = ext.algebra();
    let one = a.one();
    let half = GScalar::ratio(1, 2);
    let mut cands: Vec<Elem> = Vec::new();
    let pool = ext.sub_basis().iter().chain(ext.unitaries().iter().filter(|u| ext.in_sub(u)));
    for b in pool {
        if a.star(b) != *b {
            continue;
        }
        let sq = a.mul(b, b);
        if let Some(k) = b.iter().position(|c| !c.is_zero()) {
            let lambda = &sq[k] * &b[k].inv();
            if !lambda.is_zero() && elem_scale(b, &lambda) == sq {
                cands.push(elem_scale(b, &lambda.inv()));
            }
        }
        if sq == one {
            cands.push(elem_scale(&elem_add(&one, b), &half));
            cands.push(elem_scale(&elem_sub(&one, b), &half));
        }
    }
    let mut frame = vec![one];
    for e in &cands {
        let mut next = Vec::with_capacity(frame.len() + 1);
        for f in &frame {
            let fe = a.mul(f, e);
            if fe.iter().all(GScalar::is_zero) || &fe == f {
                next.push(f.clone());
            } else {
                next.push(elem_sub(f, &fe));
                next.insert(next.len() - 1, fe);
            }
        }
        frame = next;
    }
    if frame.len() != ext.sub_dim() {
        return Err(AlgebraError::NoProjectionFrame);
    }
    Ok(frame)
}

/// A basis of `A` adapted to the blocks `f_j A f_k`, with structure
/// constants in that basis.
#[derive(Clone, Debug)]
pub struct Peirce {
    frame: Vec<Elem>,
    vectors: Vec<Elem>,
    left: Vec<usize>,
    right: Vec<usize>,
    /// Index of the basis element of `A` this vector equals, if any.
    plain: Vec<Option<usize>>,
    /// `products[r·n + s]`, empty unless `right(r) = left(s)`.
    products: Vec<SparseVec>,
    frame_coords: Vec<SparseVec>,
    by_left: Vec<Vec<usize>>,
    coords: SubspaceCoords,
}

impl Peirce {
    pub fn new(ext: &Extension) -> Result<Self, AlgebraError> {
        let frame = find_frame(ext)?;
        Ok(Self::with_frame(ext, frame))
    }

    pub fn with_frame(ext: &Extension, frame: Vec<Elem>) -> Self {
        let a = ext.algebra();
        let n = a.dim();
        let m = frame.len();
        let mut blocks: Vec<Echelon> = (0..m * m).map(|_| Echelon::new(n)).collect();
        let mut vectors = Vec::new();
        let mut left = Vec::new();
        let mut right = Vec::new();
        let mut plain = Vec::new();
        for i in 0..n {
            let e = a.basis(i);
            for j in 0..m {
                let fe = a.mul(&frame[j], &e);
                for k in 0..m {
                    let v = a.mul(&fe, &frame[k]);
                    if blocks[j * m + k].insert(SparseVec::from_dense(&v)) {
                        plain.push((v == e).then_some(i));
                        vectors.push(v);
                        left.push(j);
                        right.push(k);
                    }
                }
            }
        }
        assert_eq!(vectors.len(), n, "Peirce blocks span A");
        let coords = SubspaceCoords::new(n, &vectors);
        let express = |v: &Elem| coords.express(v).expect("Peirce vectors form a basis");
        let mut products = Vec::with_capacity(n * n);
        for r in 0..n {
            for s in 0..n {
                products.push(if right[r] == left[s] {
                    express(&a.mul(&vectors[r], &vectors[s]))
                } else {
                    SparseVec::new()
                });
            }
        }
        let frame_coords = frame.iter().map(express).collect();
        let mut by_left = vec![Vec::new(); m];
        for r in 0..n {
            by_left[left[r]].push(r);
        }
        Peirce { frame, vectors, left, right, plain, products, frame_coords, by_left, coords }
    }

    /// Number of Peirce basis vectors (`dim A`).
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn frame(&self) -> &[Elem] {
        &self.frame
    }

    pub fn frame_len(&self) -> usize {
        self.frame.len()
    }

    pub fn vector(&self, r: usize) -> &Elem {
        &self.vectors[r]
    }

    pub fn left(&self, r: usize) -> usize {
        self.left[r]
    }

    pub fn right(&self, r: usize) -> usize {
        self.right[r]
    }

    /// Peirce vectors starting at frame index `k`.
    pub fn starting_at(&self, k: usize) -> &[usize] {
        &self.by_left[k]
    }

    pub fn plain_index(&self, r: usize) -> Option<usize> {
        self.plain[r]
    }

    /// Every Peirce vector is a basis vector of `A`.
    pub fn is_plain(&self) -> bool {
        self.plain.iter().all(Option::is_some)
    }

    pub fn product(&self, r: usize, s: usize) -> &SparseVec {
        &self.products[r * self.len() + s]
    }

    /// `f_k` in Peirce coordinates.
    pub fn frame_vector(&self, k: usize) -> &SparseVec {
        &self.frame_coords[k]
    }

    pub fn express(&self, a: &[GScalar]) -> SparseVec {
        self.coords.express(a).expect("Peirce vectors form a basis")
    }

    pub fn to_elem(&self, v: &SparseVec) -> Elem {
        let n = self.len();
        v.entries().iter().fold(elem_zero(n), |acc, (r, c)| elem_add(&acc, &elem_scale(&self.vectors[*r], c)))
    }

    pub fn mul(&self, x: &SparseVec, y: &SparseVec) -> SparseVec {
        let mut acc: BTreeMap<usize, GScalar> = BTreeMap::new();
        for (r, a) in x.entries() {
            for (s, b) in y.entries() {
                if self.right[*r] != self.left[*s] {
                    continue;
                }
                let c = a * b;
                for (t, z) in self.product(*r, *s).entries() {
                    *acc.entry(*t).or_insert_with(GScalar::zero) += &(&c * z);
                }
            }
        }
        SparseVec::from_entries(acc.into_iter().collect())
    }
}

/// A word of Peirce indices.
pub type Word = Vec<usize>;

/// Open words of length `len` (`right(w_i) = left(w_{i+1})`), in
/// lexicographic order.
pub fn open_words(p: &Peirce, len: usize) -> Vec<Word> {
    words(p, len, false)
}

/// Closed words of length `len` (also `right(w_last) = left(w_0)`).
pub fn closed_words(p: &Peirce, len: usize) -> Vec<Word> {
    words(p, len, true)
}

fn words(p: &Peirce, len: usize, closed: bool) -> Vec<Word> {
    let mut out = Vec::new();
    if len == 0 {
        return out;
    }
    fn go(p: &Peirce, len: usize, closed: bool, cur: &mut Word, out: &mut Vec<Word>) {
        if cur.len() == len {
            if !closed || p.right(cur[len - 1]) == p.left(cur[0]) {
                out.push(cur.clone());
            }
            return;
        }
        let next: Vec<usize> = match cur.last() {
            None => (0..p.len()).collect(),
            Some(&r) => p.starting_at(p.right(r)).to_vec(),
        };
        for s in next {
            cur.push(s);
            go(p, len, closed, cur, out);
            cur.pop();
        }
    }
    go(p, len, closed, &mut Vec::with_capacity(len), &mut out);
    out
}

/// Sparse linear combination of words.
pub type WordChain = BTreeMap<Word, GScalar>;

pub fn chain_add(acc: &mut WordChain, w: Word, c: GScalar) {
    if c.is_zero() {
        return;
    }
    match acc.entry(w) {
        Entry::Vacant(e) => {
            e.insert(c);
        }
        Entry::Occupied(mut e) => {
            *e.get_mut() += &c;
            if e.get().is_zero() {
                e.remove();
            }
        }
    }
}

/// Replace positions `i, i+1` of `w` by their product.
pub fn merge(p: &Peirce, w: &[usize], i: usize) -> Vec<(Word, GScalar)> {
    p.product(w[i], w[i + 1])
        .entries()
        .iter()
        .map(|(t, c)| {
            let mut v = Vec::with_capacity(w.len() - 1);
            v.extend_from_slice(&w[..i]);
            v.push(*t);
            v.extend_from_slice(&w[i + 2..]);
            (v, c.clone())
        })
        .collect()
}

/// `(w_last·w_0, w_1, …, w_{m−2})`.
pub fn wrap(p: &Peirce, w: &[usize]) -> Vec<(Word, GScalar)> {
    let m = w.len();
    p.product(w[m - 1], w[0])
        .entries()
        .iter()
        .map(|(t, c)| {
            let mut v = Vec::with_capacity(m - 1);
            v.push(*t);
            v.extend_from_slice(&w[1..m - 1]);
            (v, c.clone())
        })
        .collect()
}

/// Insert the frame projection `f_{k}` at position `i`, where `k` is forced
/// by the neighbouring letters (`k = left(w_i)` when `i < len`).
pub fn insert_unit(p: &Peirce, w: &[usize], i: usize) -> Vec<(Word, GScalar)> {
    let k = if i < w.len() { p.left(w[i]) } else { p.right(w[i - 1]) };
    p.frame_vector(k)
        .entries()
        .iter()
        .map(|(t, c)| {
            let mut v = Vec::with_capacity(w.len() + 1);
            v.extend_from_slice(&w[..i]);
            v.push(*t);
            v.extend_from_slice(&w[i..]);
            (v, c.clone())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::TracialAlgebra;
    use crate::extension::{conditional_expectation, convolution_algebra};
    use crate::groupoid::{FiniteGroup, FiniteGroupoid, FiniteMeasuredSpace};

    #[test]
    fn frames() {
        let d = Extension::matrix_over_diagonal(2);
        assert_eq!(find_frame(&d).unwrap().len(), 2);
        let c = Extension::matrix_over_scalars(3);
        assert_eq!(find_frame(&c).unwrap(), vec![c.algebra().one()]);
        // B = span{1, g} in ℂC₂: frame (1 ± g)/2.
        let a = TracialAlgebra::group_algebra(&FiniteGroup::cyclic(2));
        let whole = Extension::whole(&a);
        let f = find_frame(&whole).unwrap();
        assert_eq!(f.len(), 2);
        assert!(f.iter().all(|x| a.is_projection(x)));
        // ℂC₃ needs cube roots of unity.
        let c3 = Extension::whole(&TracialAlgebra::group_algebra(&FiniteGroup::cyclic(3)));
        assert_eq!(find_frame(&c3), Err(AlgebraError::NoProjectionFrame));
        let m2 = TracialAlgebra::matrix_algebra(2);
        let basis: Vec<Elem> = (0..4).map(|i| m2.basis(i)).collect();
        let nc = conditional_expectation(&m2, &basis).unwrap();
        assert_eq!(find_frame(&nc), Err(AlgebraError::NoProjectionFrame));
    }

    #[test]
    fn groupoid_peirce_basis_is_plain() {
        let r = FiniteGroupoid::pair_relation(FiniteMeasuredSpace::uniform(3));
        let p = Peirce::new(&convolution_algebra(&r)).unwrap();
        assert!(p.is_plain());
        for a in 0..r.len() {
            let i = (0..p.len()).find(|&i| p.plain_index(i) == Some(a)).unwrap();
            assert_eq!(p.left(i), r.target(a));
            assert_eq!(p.right(i), r.source(a));
        }
    }

    #[test]
    fn word_counts() {
        let p = Peirce::new(&Extension::matrix_over_diagonal(2)).unwrap();
        assert_eq!(open_words(&p, 2).len(), 8);
        assert_eq!(open_words(&p, 3).len(), 16);
        assert_eq!(closed_words(&p, 1).len(), 2);
        assert_eq!(closed_words(&p, 2).len(), 4);
        let g = Peirce::new(&Extension::group_over_scalars(&FiniteGroup::symmetric(3))).unwrap();
        assert_eq!(closed_words(&g, 3).len(), 216);
    }

    #[test]
    fn products_match_algebra() {
        let ext = Extension::matrix_over_diagonal(3);
        let p = Peirce::new(&ext).unwrap();
        let a = ext.algebra();
        for r in 0..p.len() {
            for s in 0..p.len() {
                let x = SparseVec::unit(r);
                let y = SparseVec::unit(s);
                assert_eq!(p.to_elem(&p.mul(&x, &y)), a.mul(p.vector(r), p.vector(s)));
            }
        }
    }

    #[test]
    fn unit_insertion() {
        let p = Peirce::new(&Extension::matrix_over_diagonal(2)).unwrap();
        let w = vec![1usize];
        let ins = insert_unit(&p, &w, 0);
        assert_eq!(ins.len(), 1);
        let merged = merge(&p, &ins[0].0, 0);
        assert_eq!(merged, vec![(w.clone(), GScalar::one())]);
    }
}
