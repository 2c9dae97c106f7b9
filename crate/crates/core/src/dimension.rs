//! Finite modules over tracial algebras and their von Neumann dimension.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::algebra::{AlgebraError, TracialAlgebra};
use crate::linalg::{GMatrix, LinalgError, SparseMatrix, SparseVec};
use crate::scalar::{GScalar, Rational};

/// A finite-dimensional left module: `actions[j]` is the matrix of basis
/// element `j` of the coefficient algebra.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteModule {
    dim: usize,
    actions: Vec<SparseMatrix>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ModuleViolation {
    Shape,
    Product { i: usize, j: usize },
    Unit,
}

impl fmt::Display for ModuleViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModuleViolation::Shape => write!(f, "action matrices have the wrong shape or count"),
            ModuleViolation::Product { i, j } => write!(f, "action of e{i}·e{j} is not the product of actions"),
            ModuleViolation::Unit => write!(f, "unit does not act as the identity"),
        }
    }
}

impl FiniteModule {
    pub fn new(dim: usize, actions: Vec<SparseMatrix>) -> Self {
        FiniteModule { dim, actions }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn actions(&self) -> &[SparseMatrix] {
        &self.actions
    }

    /// Action of a general element.
    pub fn action_of(&self, a: &[GScalar]) -> SparseMatrix {
        let mut acc = SparseMatrix::zeros(self.dim, self.dim);
        for (c, t) in a.iter().zip(&self.actions) {
            if !c.is_zero() {
                let cols = t.columns().iter().map(|v| v.scale(c)).collect();
                acc = acc.add(&SparseMatrix::from_columns(self.dim, cols));
            }
        }
        acc
    }

    /// The left regular module `F^k`.
    pub fn free(f: &TracialAlgebra, k: usize) -> Self {
        let m = f.dim();
        let actions = (0..m)
            .map(|j| {
                let cols = (0..k * m)
                    .map(|col| {
                        let (slot, i) = (col / m, col % m);
                        let v = f.basis_product(j, i);
                        SparseVec::from_entries(v.entries().iter().map(|(r, c)| (slot * m + r, c.clone())).collect())
                    })
                    .collect();
                SparseMatrix::from_columns(k * m, cols)
            })
            .collect();
        FiniteModule { dim: k * m, actions }
    }

    pub fn direct_sum(&self, other: &FiniteModule) -> Self {
        let (d1, d2) = (self.dim, other.dim);
        let actions =
            self.actions
                .iter()
                .zip(&other.actions)
                .map(|(a, b)| {
                    let mut cols: Vec<SparseVec> = a.columns().to_vec();
                    cols.extend(b.columns().iter().map(|v| {
                        SparseVec::from_entries(v.entries().iter().map(|(r, c)| (r + d1, c.clone())).collect())
                    }));
                    SparseMatrix::from_columns(d1 + d2, cols)
                })
                .collect();
        FiniteModule { dim: d1 + d2, actions }
    }

    /// Conjugate every action by an invertible matrix `p`: `p⁻¹ T p`.
    pub fn conjugate(&self, p: &GMatrix) -> Result<Self, LinalgError> {
        let inv = p.inverse()?;
        let actions = self.actions.iter().map(|t| SparseMatrix::from_dense(&inv.mul(&t.to_dense()).mul(p))).collect();
        Ok(FiniteModule { dim: self.dim, actions })
    }

    /// Representation axioms against the structure constants of `f`.
    pub fn check(&self, f: &TracialAlgebra) -> Result<(), ModuleViolation> {
        let m = f.dim();
        if self.actions.len() != m || self.actions.iter().any(|t| t.nrows() != self.dim || t.ncols() != self.dim) {
            return Err(ModuleViolation::Shape);
        }
        for i in 0..m {
            for j in 0..m {
                let prod = self.action_of(&f.basis_product(i, j).to_dense(m));
                if self.actions[i].compose(&self.actions[j]) != prod {
                    return Err(ModuleViolation::Product { i, j });
                }
            }
        }
        if self.action_of(&f.one()) != SparseMatrix::identity(self.dim) {
            return Err(ModuleViolation::Unit);
        }
        Ok(())
    }
}

/// `dim_F M`: the trace of the orthogonal projection of `F^k` onto the
/// complement of the kernel of `F^k → M`, `e_i ↦ m_i`.
pub fn vn_dimension(f: &TracialAlgebra, m: &FiniteModule) -> Result<Rational, AlgebraError> {
    vn_dimension_with(f, m, &identity_generators(m.dim()))
}

fn identity_generators(k: usize) -> Vec<Vec<GScalar>> {
    (0..k).map(|i| SparseVec::unit(i).to_dense(k)).collect()
}

/// `dim_F M` computed from an arbitrary generating family of `M`.
pub fn vn_dimension_with(
    f: &TracialAlgebra,
    m: &FiniteModule,
    gens: &[Vec<GScalar>],
) -> Result<Rational, AlgebraError> {
    let n = f.dim();
    let gram = f.gns_gram();
    let gram_inv = gram.inverse().map_err(|_| AlgebraError::Linalg(LinalgError::Degenerate))?;
    let k = gens.len();
    if k == 0 || m.dim() == 0 {
        return Ok(Rational::from_int(0));
    }
    // Φ: column (i, j) is e_j · m_i.
    let phi_cols: Vec<Vec<GScalar>> = (0..k * n)
        .map(|col| {
            let (i, j) = (col / n, col % n);
            m.actions()[j].apply(&SparseVec::from_dense(&gens[i])).to_dense(m.dim())
        })
        .collect();
    let phi = GMatrix::from_cols(m.dim(), &phi_cols);
    // Complement of ker Φ is the image of G⁻¹Φ†, G block diagonal.
    let phi_adj = phi.adjoint();
    let block_apply = |g: &GMatrix, v: &[GScalar]| -> Vec<GScalar> {
        let mut out = Vec::with_capacity(v.len());
        for i in 0..k {
            out.extend(g.mul_vec(&v[i * n..(i + 1) * n]));
        }
        out
    };
    let w_cols: Vec<Vec<GScalar>> = (0..phi_adj.cols()).map(|c| block_apply(&gram_inv, &phi_adj.col(c))).collect();
    let w = GMatrix::from_cols(k * n, &w_cols);
    let sel = w.independent_columns();
    if sel.is_empty() {
        return Ok(Rational::from_int(0));
    }
    let s_cols: Vec<Vec<GScalar>> = sel.iter().map(|&c| w.col(c)).collect();
    let s = GMatrix::from_cols(k * n, &s_cols);
    let gs_cols: Vec<Vec<GScalar>> = s_cols.iter().map(|c| block_apply(&gram, c)).collect();
    let gs = GMatrix::from_cols(k * n, &gs_cols);
    let small = s.adjoint().mul(&gs).inverse()?;
    let one = f.one();
    let mut total = GScalar::zero();
    for i in 0..k {
        let mut u = vec![GScalar::zero(); k * n];
        u[i * n..(i + 1) * n].clone_from_slice(&one);
        let y = gs.adjoint().mul_vec(&u);
        let z = small.mul_vec(&y);
        for (a, b) in y.iter().zip(&z) {
            total += &(&a.conj() * b);
        }
    }
    if !total.is_real() {
        return Err(AlgebraError::Linalg(LinalgError::NotHermitian));
    }
    Ok(total.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groupoid::FiniteGroup;

    fn trivial_module(g: &FiniteGroup) -> (TracialAlgebra, FiniteModule) {
        let a = TracialAlgebra::group_algebra(g);
        let acts = (0..a.dim()).map(|_| SparseMatrix::identity(1)).collect();
        (a, FiniteModule::new(1, acts))
    }

    fn column_module(n: usize) -> (TracialAlgebra, FiniteModule) {
        let a = TracialAlgebra::matrix_algebra(n);
        let acts = (0..n * n)
            .map(|k| {
                let (i, j) = (k / n, k % n);
                let cols = (0..n).map(|c| if c == j { SparseVec::unit(i) } else { SparseVec::new() }).collect();
                SparseMatrix::from_columns(n, cols)
            })
            .collect();
        (a, FiniteModule::new(n, acts))
    }

    #[test]
    fn free_modules() {
        for a in [TracialAlgebra::matrix_algebra(2), TracialAlgebra::group_algebra(&FiniteGroup::cyclic(3))] {
            for k in 1..3 {
                let m = FiniteModule::free(&a, k);
                assert!(m.check(&a).is_ok());
                assert_eq!(vn_dimension(&a, &m).unwrap(), Rational::from_int(k as i64));
            }
        }
    }

    #[test]
    fn trivial_and_column_modules() {
        for g in [FiniteGroup::cyclic(2), FiniteGroup::cyclic(3), FiniteGroup::symmetric(3)] {
            let (a, m) = trivial_module(&g);
            assert!(m.check(&a).is_ok());
            assert_eq!(vn_dimension(&a, &m).unwrap(), Rational::new(1, g.order() as i64));
        }
        for n in 1..4 {
            let (a, m) = column_module(n);
            assert!(m.check(&a).is_ok());
            assert_eq!(vn_dimension(&a, &m).unwrap(), Rational::new(1, n as i64));
        }
    }

    #[test]
    fn additivity_and_generators() {
        let (a, col) = column_module(2);
        let free = FiniteModule::free(&a, 1);
        let sum = col.direct_sum(&free);
        assert_eq!(vn_dimension(&a, &sum).unwrap(), Rational::new(3, 2));
        // duplicated and permuted generators
        let gens = vec![SparseVec::unit(1).to_dense(2), SparseVec::unit(0).to_dense(2), SparseVec::unit(1).to_dense(2)];
        assert_eq!(vn_dimension_with(&a, &col, &gens).unwrap(), Rational::new(1, 2));
        let p = GMatrix::from_ints(&[&[1, 1], &[0, 1]]);
        let conj = col.conjugate(&p).unwrap();
        assert!(conj.check(&a).is_ok());
        assert_eq!(vn_dimension(&a, &conj).unwrap(), Rational::new(1, 2));
    }
}
