//! Balanced tensors `A ⊗_B C` and fiber squares `A *_B C`.
//!
//! The balanced tensor is built twice: as the quotient of `A ⊗ C` by the
//! radical of `⟨a⊗b|c⊗d⟩ = tr_B(E(db*) E(a*c))`, and on Peirce pairs
//! relative to a frame of `B`. Fiber squares live on the Peirce model.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::algebra::{elem_add, elem_basis, elem_scale, AlgebraError, AlgebraViolation, Elem, TracialAlgebra};
use crate::extension::{convolution_algebra, Extension};
use crate::groupoid::FiniteGroupoid;
use crate::linalg::{
    kernel_basis, rank, Echelon, GMatrix, HermitianForm, Insert, LinalgError, SparseMatrix, SparseVec, Subquotient,
};
use crate::peirce::Peirce;
use crate::scalar::GScalar;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FiberError {
    Algebra(AlgebraError),
    /// The pair fails the S-condition at this basis element of `B`.
    SCondition {
        basis: usize,
    },
    /// Saturation passed the configured dimension bound.
    Bound {
        limit: usize,
    },
    /// Adjoints of generated operators leave the generated span.
    NotStarClosed,
}

impl From<AlgebraError> for FiberError {
    fn from(e: AlgebraError) -> Self {
        FiberError::Algebra(e)
    }
}

impl From<LinalgError> for FiberError {
    fn from(e: LinalgError) -> Self {
        FiberError::Algebra(AlgebraError::Linalg(e))
    }
}

impl fmt::Display for FiberError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FiberError::Algebra(e) => write!(f, "{e}"),
            FiberError::SCondition { basis } => write!(f, "S-condition fails at basis element {basis} of B"),
            FiberError::Bound { limit } => write!(f, "fiber square saturation exceeded dimension bound {limit}"),
            FiberError::NotStarClosed => write!(f, "generated operators are not closed under the adjoint"),
        }
    }
}

fn check_same_sub(a: &Extension, c: &Extension) -> Result<(), AlgebraError> {
    if a.sub_algebra() != c.sub_algebra() {
        return Err(AlgebraError::SubalgebraMismatch);
    }
    Ok(())
}

/// `tr_B(x y)` for `x, y` in coordinates of `B`.
fn b_pairing(b: &TracialAlgebra) -> impl Fn(&[GScalar], &[GScalar]) -> GScalar + '_ {
    let n = b.dim();
    let table: Vec<GScalar> = (0..n * n).map(|k| b.tr(&b.mul(&b.basis(k / n), &b.basis(k % n)))).collect();
    move |x, y| {
        let mut acc = GScalar::zero();
        for (p, xp) in x.iter().enumerate() {
            if xp.is_zero() {
                continue;
            }
            for (q, yq) in y.iter().enumerate() {
                if !yq.is_zero() {
                    acc += &(&(xp * yq) * &table[p * n + q]);
                }
            }
        }
        acc
    }
}

/// `A ⊗_B C` as the quotient of `A ⊗ C` by the radical of its form.
#[derive(Clone, Debug)]
pub struct RadicalTensor {
    nc: usize,
    gram: GMatrix,
    radical_dim: usize,
    quotient: Subquotient,
    /// The three expressions of the form agree on every basis pair.
    pub expressions_agree: bool,
    /// Balancing relations `ab⊗c − a⊗bc` lie in the radical and span it.
    pub balancing_is_radical: bool,
    /// The induced form on the quotient is positive definite.
    pub form_positive: bool,
}

fn tensor_vec(x: &[GScalar], y: &[GScalar]) -> Vec<GScalar> {
    let mut out = Vec::with_capacity(x.len() * y.len());
    for a in x {
        for b in y {
            out.push(a * b);
        }
    }
    out
}

pub fn balanced_tensor(a: &Extension, c: &Extension) -> Result<RadicalTensor, AlgebraError> {
    check_same_sub(a, c)?;
    let (aa, ca) = (a.algebra(), c.algebra());
    let (na, nc) = (aa.dim(), ca.dim());
    let b = a.sub_algebra();
    let pair = b_pairing(&b);
    let to_b = |e: &Extension, x: &Elem| e.to_sub(&e.e(x)).expect("E lands in B");
    let ea: Vec<Elem> =
        (0..na * na).map(|k| to_b(a, &aa.mul(&aa.star(&aa.basis(k / na)), &aa.basis(k % na)))).collect();
    let ec: Vec<Elem> =
        (0..nc * nc).map(|k| to_b(c, &ca.mul(&ca.basis(k / nc), &ca.star(&ca.basis(k % nc))))).collect();
    let n = na * nc;
    let mut gram = GMatrix::zeros(n, n);
    let mut expressions_agree = true;
    for i in 0..na {
        for j in 0..nc {
            for k in 0..na {
                for l in 0..nc {
                    let eak = &ea[i * na + k];
                    let ecl = &ec[l * nc + j];
                    let v = pair(ecl, eak);
                    let second = ca.tr(&ca.mul3(&ca.star(&ca.basis(j)), &c.from_sub(eak), &ca.basis(l)));
                    let third = aa.tr(&aa.mul3(&aa.basis(k), &a.from_sub(ecl), &aa.star(&aa.basis(i))));
                    expressions_agree &= v == second && v == third;
                    gram[(i * nc + j, k * nc + l)] = v;
                }
            }
        }
    }
    let radical = kernel_basis(&gram).columns();
    let radical_dim = radical.len();
    let mut rel = Echelon::new(n);
    let mut relations_null = true;
    for bk in 0..b.dim() {
        let (ba, bc) = (a.sub_basis()[bk].clone(), c.sub_basis()[bk].clone());
        for i in 0..na {
            let left = aa.mul(&aa.basis(i), &ba);
            for j in 0..nc {
                let right = ca.mul(&bc, &ca.basis(j));
                let v: Vec<GScalar> = tensor_vec(&left, &ca.basis(j))
                    .iter()
                    .zip(tensor_vec(&aa.basis(i), &right))
                    .map(|(x, y)| x - &y)
                    .collect();
                relations_null &= gram.mul_vec(&v).iter().all(GScalar::is_zero);
                rel.insert(SparseVec::from_dense(&v));
            }
        }
    }
    let balancing_is_radical = relations_null && rel.rank() == radical_dim;
    let outer: Vec<SparseVec> = (0..n).map(SparseVec::unit).collect();
    let inner: Vec<SparseVec> = radical.iter().map(|v| SparseVec::from_dense(v)).collect();
    let quotient = Subquotient::new(n, &outer, &inner);
    let reps: Vec<Vec<GScalar>> = quotient.representatives().iter().map(|r| r.to_dense(n)).collect();
    let q = GMatrix::from_cols(n, &reps);
    let form_positive = HermitianForm::new(q.adjoint().mul(&gram).mul(&q)).is_ok_and(|f| f.is_positive_definite());
    Ok(RadicalTensor { nc, gram, radical_dim, quotient, expressions_agree, balancing_is_radical, form_positive })
}

impl RadicalTensor {
    pub fn dim(&self) -> usize {
        self.quotient.dim()
    }

    pub fn radical_dim(&self) -> usize {
        self.radical_dim
    }

    pub fn gram(&self) -> &GMatrix {
        &self.gram
    }

    /// Quotient coordinates of the class of `x ⊗ y`.
    pub fn class(&self, x: &[GScalar], y: &[GScalar]) -> Vec<GScalar> {
        debug_assert_eq!(y.len(), self.nc);
        self.quotient.coords(&SparseVec::from_dense(&tensor_vec(x, y))).expect("every tensor has a class")
    }
}

/// `A ⊗_B C` on Peirce pairs `(r, s)` with `right(r) = left(s)`.
#[derive(Clone, Debug)]
pub struct PeirceTensor {
    pa: Peirce,
    pc: Peirce,
    pairs: Vec<(usize, usize)>,
    index: BTreeMap<(usize, usize), usize>,
    form: GMatrix,
    form_inv: Option<GMatrix>,
    one: SparseVec,
}

pub fn peirce_tensor(a: &Extension, c: &Extension) -> Result<PeirceTensor, AlgebraError> {
    check_same_sub(a, c)?;
    let pa = Peirce::new(a)?;
    let frame_c: Vec<Elem> = pa.frame().iter().map(|f| c.from_sub(&a.to_sub(f).expect("frame lies in B"))).collect();
    let pc = Peirce::with_frame(c, frame_c);
    let mut pairs = Vec::new();
    for r in 0..pa.len() {
        for &s in pc.starting_at(pa.right(r)) {
            pairs.push((r, s));
        }
    }
    let index: BTreeMap<(usize, usize), usize> = pairs.iter().enumerate().map(|(i, &p)| (p, i)).collect();
    let (aa, ca) = (a.algebra(), c.algebra());
    let b = a.sub_algebra();
    let pair = b_pairing(&b);
    let (na, nc) = (pa.len(), pc.len());
    let ea: Vec<Elem> = (0..na * na)
        .map(|k| a.to_sub(&a.e(&aa.mul(&aa.star(pa.vector(k / na)), pa.vector(k % na)))).expect("E lands in B"))
        .collect();
    let ec: Vec<Elem> = (0..nc * nc)
        .map(|k| c.to_sub(&c.e(&ca.mul(pc.vector(k / nc), &ca.star(pc.vector(k % nc))))).expect("E lands in B"))
        .collect();
    let d = pairs.len();
    let mut form = GMatrix::zeros(d, d);
    for (x, &(r, s)) in pairs.iter().enumerate() {
        for (y, &(r2, s2)) in pairs.iter().enumerate() {
            form[(x, y)] = pair(&ec[s2 * nc + s], &ea[r * na + r2]);
        }
    }
    let form_inv = form.inverse().ok();
    let mut t = PeirceTensor { pa, pc, pairs, index, form, form_inv, one: SparseVec::new() };
    t.one = t.class(&aa.one(), &ca.one());
    Ok(t)
}

impl PeirceTensor {
    pub fn dim(&self) -> usize {
        self.pairs.len()
    }

    pub fn left_peirce(&self) -> &Peirce {
        &self.pa
    }

    pub fn right_peirce(&self) -> &Peirce {
        &self.pc
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn pair_index(&self, r: usize, s: usize) -> Option<usize> {
        self.index.get(&(r, s)).copied()
    }

    pub fn form(&self) -> &GMatrix {
        &self.form
    }

    /// The class of `1 ⊗ 1`.
    pub fn one(&self) -> &SparseVec {
        &self.one
    }

    /// Pairs that are `B`-central (`left(r) = right(s)`).
    pub fn central_pairs(&self) -> Vec<usize> {
        (0..self.pairs.len())
            .filter(|&i| {
                let (r, s) = self.pairs[i];
                self.pa.left(r) == self.pc.right(s)
            })
            .collect()
    }

    /// Class of `x ⊗ y` for Peirce coordinate vectors.
    pub fn class_sparse(&self, x: &SparseVec, y: &SparseVec) -> SparseVec {
        let mut out = Vec::new();
        for (r, a) in x.entries() {
            for (s, b) in y.entries() {
                if let Some(i) = self.pair_index(*r, *s) {
                    out.push((i, a * b));
                }
            }
        }
        SparseVec::from_entries(out)
    }

    /// Class of `x ⊗ y` for elements of `A` and `C`.
    pub fn class(&self, x: &[GScalar], y: &[GScalar]) -> SparseVec {
        self.class_sparse(&self.pa.express(x), &self.pc.express(y))
    }

    /// The operator `r ⊗ s ↦ f(r, s)` on Peirce pairs.
    pub fn operator(&self, f: impl Fn(usize, usize) -> SparseVec) -> SparseMatrix {
        let cols = self.pairs.iter().map(|&(r, s)| f(r, s)).collect();
        SparseMatrix::from_columns(self.pairs.len(), cols)
    }

    /// `x ⊗ y ↦ xu ⊗ vy` (no admissibility check).
    pub fn pair_operator(&self, u: &[GScalar], v: &[GScalar]) -> SparseMatrix {
        let (uu, vv) = (self.pa.express(u), self.pc.express(v));
        self.operator(|r, s| {
            let x = self.pa.mul(&SparseVec::unit(r), &uu);
            let y = self.pc.mul(&vv, &SparseVec::unit(s));
            self.class_sparse(&x, &y)
        })
    }

    /// Left multiplication by `a ∈ A`.
    pub fn left_action(&self, a: &[GScalar]) -> SparseMatrix {
        let aa = self.pa.express(a);
        self.operator(|r, s| self.class_sparse(&self.pa.mul(&aa, &SparseVec::unit(r)), &SparseVec::unit(s)))
    }

    /// Right multiplication by `c ∈ C`.
    pub fn right_action(&self, c: &[GScalar]) -> SparseMatrix {
        let cc = self.pc.express(c);
        self.operator(|r, s| self.class_sparse(&SparseVec::unit(r), &self.pc.mul(&SparseVec::unit(s), &cc)))
    }

    /// `x̂ : a ⊗ b ↦ ax ⊗ b` for `x ∈ B` given in `A`.
    pub fn center_operator(&self, x: &[GScalar]) -> SparseMatrix {
        let xx = self.pa.express(x);
        self.operator(|r, s| self.class_sparse(&self.pa.mul(&SparseVec::unit(r), &xx), &SparseVec::unit(s)))
    }

    /// `⟨v|w⟩`.
    pub fn inner(&self, v: &SparseVec, w: &SparseVec) -> GScalar {
        let mut acc = GScalar::zero();
        for (i, a) in v.entries() {
            let ac = a.conj();
            for (j, b) in w.entries() {
                let g = &self.form[(*i, *j)];
                if !g.is_zero() {
                    acc += &(&(&ac * g) * b);
                }
            }
        }
        acc
    }

    /// Adjoint `H⁻¹ T† H` applied to `v`.
    pub fn adjoint_apply(&self, t: &SparseMatrix, v: &SparseVec) -> Option<SparseVec> {
        let inv = self.form_inv.as_ref()?;
        let d = self.dim();
        let hv = self.form.mul_vec(&v.to_dense(d));
        let tv: Vec<GScalar> = (0..d)
            .map(|k| t.column(k).entries().iter().fold(GScalar::zero(), |acc, (l, c)| &acc + &(&c.conj() * &hv[*l])))
            .collect();
        Some(SparseVec::from_dense(&inv.mul_vec(&tv)))
    }
}

/// Rank and form agreement of the two realizations.
pub fn routes_agree(rad: &RadicalTensor, pt: &PeirceTensor) -> bool {
    if rad.dim() != pt.dim() {
        return false;
    }
    let lifts: Vec<Vec<GScalar>> =
        pt.pairs().iter().map(|&(r, s)| tensor_vec(pt.left_peirce().vector(r), pt.right_peirce().vector(s))).collect();
    let n = rad.gram.rows();
    let l = GMatrix::from_cols(n, &lifts);
    if l.adjoint().mul(&rad.gram).mul(&l) != pt.form {
        return false;
    }
    let classes: Vec<Vec<GScalar>> =
        lifts.iter().map(|v| rad.quotient.coords(&SparseVec::from_dense(v)).expect("class")).collect();
    rank(&GMatrix::from_cols(rad.dim(), &classes)) == pt.dim()
}

/// Which form of the S-condition selects generator pairs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Reading {
    /// `u*xu = vxv*` for all `x ∈ B`.
    Standard,
    /// `uxu* = v*xv` for all `x ∈ B`.
    Swapped,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FiberOptions {
    pub reading: Reading,
    /// Saturation stops with an error past this dimension; defaults to
    /// the dimension of the balanced tensor squared.
    pub bound: Option<usize>,
}

impl Default for FiberOptions {
    fn default() -> Self {
        FiberOptions { reading: Reading::Standard, bound: None }
    }
}

/// Check the S-condition on a basis of `B`.
pub fn s_condition(a: &Extension, c: &Extension, u: &[GScalar], v: &[GScalar], reading: Reading) -> Result<(), usize> {
    let (aa, ca) = (a.algebra(), c.algebra());
    let (us, vs) = (aa.star(u), ca.star(v));
    for (k, (xa, xc)) in a.sub_basis().iter().zip(c.sub_basis()).enumerate() {
        let (lhs, rhs) = match reading {
            Reading::Standard => (aa.mul3(&us, xa, u), ca.mul3(v, xc, &vs)),
            Reading::Swapped => (aa.mul3(u, xa, &us), ca.mul3(&vs, xc, v)),
        };
        let (l, r) = (a.to_sub(&lhs), c.to_sub(&rhs));
        if l.is_none() || l != r {
            return Err(k);
        }
    }
    Ok(())
}

/// `u * v` on `A ⊗_B C`, after checking the standard S-condition.
pub fn star_operator(
    a: &Extension,
    c: &Extension,
    t: &PeirceTensor,
    u: &[GScalar],
    v: &[GScalar],
) -> Result<SparseMatrix, FiberError> {
    s_condition(a, c, u, v, Reading::Standard).map_err(|basis| FiberError::SCondition { basis })?;
    Ok(t.pair_operator(u, v))
}

/// `xb u ⊗ v y = x u ⊗ v b y` on all Peirce pairs and basis elements `b`.
fn well_defined(a: &Extension, c: &Extension, t: &PeirceTensor, u: &[GScalar], v: &[GScalar]) -> bool {
    let (pa, pc) = (t.left_peirce(), t.right_peirce());
    let (uu, vv) = (pa.express(u), pc.express(v));
    a.sub_basis().iter().zip(c.sub_basis()).all(|(ba, bc)| {
        let (bb, bcc) = (pa.express(ba), pc.express(bc));
        (0..pa.len()).all(|r| {
            (0..pc.len()).all(|s| {
                let x = SparseVec::unit(r);
                let y = SparseVec::unit(s);
                let lhs = t.class_sparse(&pa.mul(&pa.mul(&x, &bb), &uu), &pc.mul(&vv, &y));
                let rhs = t.class_sparse(&pa.mul(&x, &uu), &pc.mul(&vv, &pc.mul(&bcc, &y)));
                lhs == rhs
            })
        })
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiberReport {
    pub candidate_pairs: usize,
    pub admissible_pairs: usize,
    pub generators: usize,
    pub dim: usize,
    /// Every generator is well defined on the balanced tensor.
    pub well_defined: bool,
    /// Generators commute with the left `A` and right `C` actions.
    pub commutes_with_bimodule: bool,
    /// `(u*v)* = u* * v*` for every generator.
    pub star_rule: bool,
    /// `T(1⊗1)` is `B`-central for every basis element.
    pub ev_central: bool,
    /// `T ↦ T|_{central vectors}` is injective.
    pub faithful_on_invariants: bool,
    /// `T_i ∘ T_j = Σ c_ij^k T_k` for the stored structure constants.
    pub products_realized: bool,
    /// Axiom violations of the resulting tracial algebra other than
    /// associativity, which `products_realized` covers (traciality of φ
    /// included).
    pub violations: Vec<AlgebraViolation>,
    /// Pairs admissible only under the standard, resp. only under the swapped,
    /// reading of the S-condition.
    pub reading_discrepancy: (usize, usize),
    /// Pairs admissible under the other reading whose operator is not well
    /// defined on the balanced tensor.
    pub other_reading_ill_defined: usize,
}

/// `A *_B C`, realized on the Peirce balanced tensor.
#[derive(Clone, Debug)]
pub struct FiberSquare {
    tensor: PeirceTensor,
    generators: Vec<(Elem, Elem)>,
    ops: Vec<SparseMatrix>,
    evs: Vec<SparseVec>,
    ev_basis: Echelon,
    algebra: TracialAlgebra,
    pub report: FiberReport,
}

fn candidates(e: &Extension) -> Vec<Elem> {
    let one = e.algebra().one();
    let mut us = e.normalizing_unitaries();
    if !us.contains(&one) {
        us.insert(0, one);
    }
    us
}

pub fn fiber_square(a: &Extension, c: &Extension, opts: FiberOptions) -> Result<FiberSquare, FiberError> {
    let t = peirce_tensor(a, c)?;
    let d = t.dim();
    let bound = opts.bound.unwrap_or(d * d);
    let (aa, ca) = (a.algebra(), c.algebra());
    let other = match opts.reading {
        Reading::Standard => Reading::Swapped,
        Reading::Swapped => Reading::Standard,
    };
    let (ua, uc) = (candidates(a), candidates(c));
    let mut gen_span = Echelon::new(d);
    gen_span.insert(t.one().clone());
    let mut generators: Vec<(Elem, Elem)> = Vec::new();
    let mut gen_ops: Vec<SparseMatrix> = Vec::new();
    let mut admissible = 0;
    let mut only_this = 0;
    let mut only_other = 0;
    let mut other_ill = 0;
    for u in &ua {
        for v in &uc {
            let this_ok = s_condition(a, c, u, v, opts.reading).is_ok();
            let other_ok = s_condition(a, c, u, v, other).is_ok();
            if this_ok && !other_ok {
                only_this += 1;
            }
            if other_ok && !this_ok {
                only_other += 1;
                if !well_defined(a, c, &t, u, v) {
                    other_ill += 1;
                }
            }
            if !this_ok {
                continue;
            }
            admissible += 1;
            for (x, y) in [(u.clone(), v.clone()), (aa.star(u), ca.star(v))] {
                if gen_span.insert(t.class(&x, &y)) {
                    gen_ops.push(t.pair_operator(&x, &y));
                    generators.push((x, y));
                }
            }
        }
    }
    let well_defined_all = generators.iter().all(|(u, v)| well_defined(a, c, &t, u, v));

    // Saturate from the identity under left composition by generators.
    let mut ops = vec![SparseMatrix::identity(d)];
    let mut evs = vec![t.one().clone()];
    let mut ev_basis = Echelon::with_tracking(d);
    ev_basis.insert_tracked(t.one().clone(), 0);
    let mut idx = 0;
    while idx < ops.len() {
        for g in &gen_ops {
            let ev = g.apply(&evs[idx]);
            if let Insert::New = ev_basis.insert_tracked(ev.clone(), ops.len()) {
                if ops.len() >= bound {
                    return Err(FiberError::Bound { limit: bound });
                }
                ops.push(g.compose(&ops[idx]));
                evs.push(ev);
            }
        }
        idx += 1;
    }
    let m = ops.len();
    let express = |v: &SparseVec| ev_basis.express(v);
    let mut mult = Vec::with_capacity(m * m);
    for op in &ops {
        for ev in &evs {
            mult.push(express(&op.apply(ev)).expect("products stay in the saturated span"));
        }
    }
    let mut star = Vec::with_capacity(m);
    for op in &ops {
        let adj =
            t.adjoint_apply(op, t.one()).ok_or(FiberError::Algebra(AlgebraError::Linalg(LinalgError::Singular)))?;
        star.push(express(&adj).ok_or(FiberError::NotStarClosed)?);
    }
    let trace: Vec<GScalar> = evs.iter().map(|ev| t.inner(t.one(), ev)).collect();
    let mut unit = vec![GScalar::zero(); m];
    unit[0] = GScalar::one();
    let labels = (0..m).map(|i| format!("T{}", i + 1)).collect();
    let algebra = TracialAlgebra::new(labels, mult, unit, star, trace)?;

    let star_rule = generators
        .iter()
        .zip(&gen_ops)
        .all(|((u, v), op)| t.adjoint_apply(op, t.one()).as_ref() == Some(&t.class(&aa.star(u), &ca.star(v))));
    let lefts: Vec<SparseMatrix> = (0..aa.dim()).map(|i| t.left_action(&aa.basis(i))).collect();
    let rights: Vec<SparseMatrix> = (0..ca.dim()).map(|i| t.right_action(&ca.basis(i))).collect();
    let commutes_with_bimodule =
        gen_ops.iter().all(|g| lefts.iter().chain(&rights).all(|l| g.compose(l) == l.compose(g)));
    let central = t.central_pairs();
    let central_set: alloc::collections::BTreeSet<usize> = central.iter().copied().collect();
    let ev_central = evs.iter().all(|v| v.entries().iter().all(|(i, _)| central_set.contains(i)));
    let mut restricted = Echelon::new(d * central.len());
    for op in &ops {
        let mut entries = Vec::new();
        for (k, &col) in central.iter().enumerate() {
            for (i, c) in op.column(col).entries() {
                entries.push((k * d + i, c.clone()));
            }
        }
        restricted.insert(SparseVec::from_entries(entries));
    }
    let faithful_on_invariants = restricted.rank() == m;
    // Structure constants reproduce operator composition; with `ops`
    // independent this also gives associativity.
    let products_realized = (0..m).all(|i| {
        (0..m).all(|j| {
            let c = &algebra.basis_product(i, j);
            let sum = c.entries().iter().fold(SparseMatrix::zeros(d, d), |acc, (k, x)| acc.axpy(x, &ops[*k]));
            ops[i].compose(&ops[j]) == sum
        })
    });
    let violations = algebra.validate_except_associativity();
    let report = FiberReport {
        candidate_pairs: ua.len() * uc.len(),
        admissible_pairs: admissible,
        generators: generators.len(),
        dim: m,
        well_defined: well_defined_all,
        commutes_with_bimodule,
        star_rule,
        ev_central,
        faithful_on_invariants,
        products_realized,
        violations,
        reading_discrepancy: (only_this, only_other),
        other_reading_ill_defined: other_ill,
    };
    Ok(FiberSquare { tensor: t, generators, ops, evs, ev_basis, algebra, report })
}

impl FiberSquare {
    pub fn dim(&self) -> usize {
        self.ops.len()
    }

    pub fn algebra(&self) -> &TracialAlgebra {
        &self.algebra
    }

    pub fn tensor(&self) -> &PeirceTensor {
        &self.tensor
    }

    pub fn generators(&self) -> &[(Elem, Elem)] {
        &self.generators
    }

    /// Basis operators on the Peirce balanced tensor.
    pub fn operators(&self) -> &[SparseMatrix] {
        &self.ops
    }

    /// `T_i(1⊗1)` for the basis operators.
    pub fn evaluations(&self) -> &[SparseVec] {
        &self.evs
    }

    /// Coordinates in the operator basis of the element with `T(1⊗1) = v`.
    pub fn express_ev(&self, v: &SparseVec) -> Option<SparseVec> {
        self.ev_basis.express(v)
    }

    /// `ev(ST)` for the elements with `ev(S) = v`, `ev(T) = w`.
    pub fn ev_product(&self, v: &SparseVec, w: &SparseVec) -> Option<SparseVec> {
        let c = self.express_ev(v)?;
        let mut acc = SparseVec::new();
        for (i, x) in c.entries() {
            acc = acc.axpy(x, &self.ops[*i].apply(w));
        }
        Some(acc)
    }

    /// `φ` of the element with evaluation `class(x ⊗ y)`, if it lies in the
    /// fiber square.
    pub fn trace_of_class(&self, x: &[GScalar], y: &[GScalar]) -> Option<GScalar> {
        let c = self.express_ev(&self.tensor.class(x, y))?;
        Some(self.algebra.tr(&c.to_dense(self.dim())))
    }

    /// Operator of a general element given in the operator basis.
    pub fn operator_of(&self, coords: &[GScalar]) -> SparseMatrix {
        let d = self.tensor.dim();
        let mut acc = SparseMatrix::zeros(d, d);
        for (i, c) in coords.iter().enumerate() {
            if !c.is_zero() {
                let scaled = SparseMatrix::from_columns(d, self.ops[i].columns().iter().map(|v| v.scale(c)).collect());
                acc = acc.add(&scaled);
            }
        }
        acc
    }
}

/// `tr_{A*A}(p*p)` against `tr_B(E(p)²)`; `None` when `p ⊗ p` is not the
/// evaluation of an element of the fiber square.
pub fn projection_trace(fs: &FiberSquare, ext: &Extension, p: &[GScalar]) -> Option<(GScalar, GScalar)> {
    let lhs = fs.trace_of_class(p, p)?;
    let a = ext.algebra();
    let ep = ext.e(p);
    Some((lhs, a.tr(&a.mul(&ep, &ep))))
}

/// Verification that `T ↦ T(1⊗1)` identifies a groupoid fiber square with
/// `ℂ(G^e)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupoidIso {
    pub ev_in_envelope: bool,
    pub dim: usize,
    pub envelope_dim: usize,
    pub structure_match: bool,
    pub star_match: bool,
    pub trace_match: bool,
    pub diagonal_fixed: bool,
}

impl GroupoidIso {
    pub fn holds(&self) -> bool {
        self.ev_in_envelope
            && self.dim == self.envelope_dim
            && self.structure_match
            && self.star_match
            && self.trace_match
            && self.diagonal_fixed
    }
}

/// Needs a fiber square of an extension whose Peirce basis is the groupoid
/// basis (convolution and twisted convolution algebras).
pub fn groupoid_iso(fs: &FiberSquare, g: &FiniteGroupoid) -> GroupoidIso {
    let env = g.enveloping();
    let ce = convolution_algebra(&env.groupoid);
    let ae = ce.algebra();
    let t = fs.tensor();
    let (pa, pc) = (t.left_peirce(), t.right_peirce());
    let ne = env.groupoid.len();
    let psi = |v: &SparseVec| -> Option<Elem> {
        let mut out = vec![GScalar::zero(); ne];
        for (i, c) in v.entries() {
            let (r, s) = t.pairs()[*i];
            let k = env.find(pa.plain_index(r)?, pc.plain_index(s)?)?;
            out[k] = c.clone();
        }
        Some(out)
    };
    let images: Vec<Option<Elem>> = fs.evaluations().iter().map(psi).collect();
    let ev_in_envelope = pa.is_plain() && pc.is_plain() && images.iter().all(Option::is_some);
    let mut structure_match = ev_in_envelope;
    let mut star_match = ev_in_envelope;
    let mut trace_match = ev_in_envelope;
    let mut diagonal_fixed = ev_in_envelope;
    if ev_in_envelope {
        let imgs: Vec<Elem> = images.into_iter().map(Option::unwrap).collect();
        let f = fs.algebra();
        let m = fs.dim();
        let to_env = |coords: &[GScalar]| {
            coords.iter().zip(&imgs).fold(vec![GScalar::zero(); ne], |acc, (c, v)| elem_add(&acc, &elem_scale(v, c)))
        };
        for i in 0..m {
            let ei = f.basis(i);
            for j in 0..m {
                structure_match &= to_env(&f.mul(&ei, &f.basis(j))) == ae.mul(&imgs[i], &imgs[j]);
            }
            star_match &= to_env(&f.star(&ei)) == ae.star(&imgs[i]);
            trace_match &= f.tr(&ei) == ae.tr(&imgs[i]);
        }
        let mut one = vec![GScalar::zero(); g.len()];
        for &u in g.units() {
            one[u] = GScalar::one();
        }
        for x in 0..g.base().len() {
            let dx = elem_basis(g.len(), g.unit(x));
            let ones = &one;
            let left = t.class(&dx, ones);
            let right = t.class(ones, &dx);
            let target = elem_basis(ne, env.groupoid.unit(x));
            diagonal_fixed &= left == right && fs.express_ev(&left).is_some() && psi(&left).as_ref() == Some(&target);
        }
    }
    GroupoidIso {
        ev_in_envelope,
        dim: fs.dim(),
        envelope_dim: ne,
        structure_match,
        star_match,
        trace_match,
        diagonal_fixed,
    }
}

/// Comparison of two fiber squares on the same Peirce pairs through their
/// evaluation images.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EvComparison {
    pub same_subspace: bool,
    pub same_products: bool,
}

impl EvComparison {
    pub fn identical(&self) -> bool {
        self.same_subspace && self.same_products
    }
}

pub fn compare_ev_algebras(f1: &FiberSquare, f2: &FiberSquare) -> EvComparison {
    if f1.tensor().pairs() != f2.tensor().pairs() {
        return EvComparison { same_subspace: false, same_products: false };
    }
    let same_subspace = f1.dim() == f2.dim()
        && f1.evaluations().iter().all(|v| f2.express_ev(v).is_some())
        && f2.evaluations().iter().all(|v| f1.express_ev(v).is_some());
    let same_products = same_subspace
        && f1.evaluations().iter().all(|v| f1.evaluations().iter().all(|w| f1.ev_product(v, w) == f2.ev_product(v, w)));
    EvComparison { same_subspace, same_products }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extension::{twisted_convolution, weighted_sum, SumMode, TwoCocycle};
    use crate::groupoid::{FiniteGroup, FiniteMeasuredSpace};
    use crate::scalar::Rational;

    fn pair(n: usize) -> FiniteGroupoid {
        FiniteGroupoid::pair_relation(FiniteMeasuredSpace::uniform(n))
    }

    #[test]
    fn radical_route_dimensions() {
        let c2 = Extension::group_over_scalars(&FiniteGroup::cyclic(2));
        let t = balanced_tensor(&c2, &c2).unwrap();
        assert_eq!(t.dim(), 4);
        assert_eq!(t.radical_dim(), 0);
        let d = Extension::matrix_over_diagonal(2);
        let t = balanced_tensor(&d, &d).unwrap();
        assert_eq!(t.radical_dim(), 8);
        assert_eq!(t.dim(), 8);
        assert!(t.expressions_agree && t.balancing_is_radical && t.form_positive);
        let w = Extension::whole(&d.sub_algebra());
        let t = balanced_tensor(&w, &w).unwrap();
        assert_eq!(t.dim(), 2);
    }

    #[test]
    fn routes_match() {
        for ext in [
            Extension::matrix_over_diagonal(2),
            Extension::matrix_over_scalars(2),
            convolution_algebra(&pair(3)),
            Extension::group_over_scalars(&FiniteGroup::cyclic(3)),
        ] {
            let rad = balanced_tensor(&ext, &ext).unwrap();
            let pt = peirce_tensor(&ext, &ext).unwrap();
            assert!(routes_agree(&rad, &pt));
            assert!(rad.balancing_is_radical && rad.expressions_agree);
        }
    }

    #[test]
    fn identity_and_center() {
        let ext = convolution_algebra(&pair(2));
        let t = peirce_tensor(&ext, &ext).unwrap();
        let a = ext.algebra();
        let id = star_operator(&ext, &ext, &t, &a.one(), &a.one()).unwrap();
        assert_eq!(id, SparseMatrix::identity(t.dim()));
        for x in ext.normalizing_unitaries().iter().filter(|u| ext.in_sub(u)) {
            let hat = t.center_operator(x);
            assert_eq!(star_operator(&ext, &ext, &t, &a.one(), x).unwrap(), hat);
            assert_eq!(star_operator(&ext, &ext, &t, x, &a.one()).unwrap(), hat);
        }
        let swap = ext.unitaries().iter().find(|u| !ext.in_sub(u)).unwrap().clone();
        assert!(matches!(star_operator(&ext, &ext, &t, &swap, &a.one()), Err(FiberError::SCondition { .. })));
    }

    #[test]
    fn group_fiber_square_is_tensor_square() {
        for g in [FiniteGroup::cyclic(2), FiniteGroup::cyclic(3), FiniteGroup::symmetric(3)] {
            let ext = Extension::group_over_scalars(&g);
            let fs = fiber_square(&ext, &ext, FiberOptions::default()).unwrap();
            let n = g.order();
            assert_eq!(fs.dim(), n * n);
            let r = &fs.report;
            assert!(r.well_defined && r.commutes_with_bimodule && r.star_rule && r.ev_central);
            assert!(r.faithful_on_invariants && r.violations.is_empty(), "{r:?}");
            let iso = groupoid_iso(&fs, &FiniteGroupoid::from_group(&g));
            assert!(iso.holds(), "{iso:?}");
        }
    }

    #[test]
    fn pair_relation_fiber_square() {
        for n in 1..4 {
            let r = pair(n);
            let ext = convolution_algebra(&r);
            let fs = fiber_square(&ext, &ext, FiberOptions::default()).unwrap();
            assert_eq!(fs.dim(), n * n);
            let iso = groupoid_iso(&fs, &r);
            assert!(iso.holds(), "{iso:?}");
            assert!(fs.report.violations.is_empty());
            assert_eq!(fs.report.reading_discrepancy, (0, 0));
        }
    }

    #[test]
    fn fiber_square_of_b_is_b() {
        let diag = Extension::matrix_over_diagonal(2);
        let whole = Extension::whole(&diag.sub_algebra())
            .with_unitaries(vec![vec![GScalar::one(), GScalar::int(-1)], vec![GScalar::int(-1), GScalar::one()]]);
        let fs = fiber_square(&whole, &whole, FiberOptions::default()).unwrap();
        assert_eq!(fs.dim(), 2);
        assert!(fs.report.violations.is_empty());
    }

    #[test]
    fn projection_traces() {
        let ext = Extension::matrix_over_scalars(2);
        let fs = fiber_square(&ext, &ext, FiberOptions::default()).unwrap();
        assert_eq!(fs.dim(), 16);
        let p = ext.algebra().basis(0);
        let (l, r) = projection_trace(&fs, &ext, &p).unwrap();
        assert_eq!(l, r);
        assert_eq!(l, GScalar::ratio(1, 4));
        let d = Extension::matrix_over_diagonal(2);
        let fs = fiber_square(&d, &d, FiberOptions::default()).unwrap();
        let (l, r) = projection_trace(&fs, &d, &p).unwrap();
        assert_eq!((l.clone(), r), (GScalar::ratio(1, 2), GScalar::ratio(1, 2)));
    }

    #[test]
    fn three_atom_cocycle_is_forgotten() {
        let r = pair(3);
        let sigma = TwoCocycle::from_fn(
            3,
            |x, y, z| {
                if x != y && y != z && x != z {
                    GScalar::int(-1)
                } else {
                    GScalar::one()
                }
            },
        );
        let tw = twisted_convolution(&r, &sigma).unwrap();
        let plain = convolution_algebra(&r);
        let f1 = fiber_square(&tw, &tw, FiberOptions::default()).unwrap();
        let f2 = fiber_square(&plain, &plain, FiberOptions::default()).unwrap();
        assert!(compare_ev_algebras(&f1, &f2).identical());
        assert!(groupoid_iso(&f1, &r).holds());
    }

    #[test]
    fn directed_sum_blocks() {
        let m2 = Extension::matrix_over_diagonal(2);
        let c2 = Extension::group_over_scalars(&FiniteGroup::cyclic(2));
        let half = Rational::new(1, 2);
        let s = weighted_sum(&[&m2, &c2], &[half.clone(), half.clone()], SumMode::Componentwise).unwrap();
        let fs = fiber_square(&s.extension, &s.extension, FiberOptions::default()).unwrap();
        let f1 = fiber_square(&m2, &m2, FiberOptions::default()).unwrap();
        let f2 = fiber_square(&c2, &c2, FiberOptions::default()).unwrap();
        assert_eq!(fs.dim(), f1.dim() + f2.dim());
        let a = s.extension.algebra();
        let mut u1 = a.zero();
        u1[..4].clone_from_slice(&m2.algebra().one());
        assert_eq!(fs.trace_of_class(&u1, &u1), Some(GScalar::real(half)));
    }
}
