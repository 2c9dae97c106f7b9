//! Tracial extensions `A/B`: conditional expectations, convolution algebras
//! of groupoids (plain and twisted), weighted sums and compressions.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::algebra::{
    elem_add, elem_basis, elem_is_zero, elem_scale, elem_zero, independent_subset, saturate, AlgebraError,
    AlgebraViolation, Elem, SubspaceCoords, TracialAlgebra,
};
use crate::groupoid::{permutations, FiniteGroup, FiniteGroupoid};
use crate::linalg::{GMatrix, HermitianForm, SparseVec};
use crate::scalar::{GScalar, Rational};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExtensionViolation {
    Algebra(AlgebraViolation),
    /// `E(b a b') != b E(a) b'` for these basis indices.
    Bimodular {
        left: usize,
        a: usize,
        right: usize,
    },
    /// `tr(E(e_a)) != tr(e_a)`.
    TracePreservation {
        a: usize,
    },
    /// `E(b) != b` for this basis element of `B`.
    Retraction {
        b: usize,
    },
}

impl fmt::Display for ExtensionViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtensionViolation::Algebra(v) => write!(f, "{v}"),
            ExtensionViolation::Bimodular { left, a, right } => {
                write!(f, "E is not bimodular at (b{left}, e{a}, b{right})")
            }
            ExtensionViolation::TracePreservation { a } => write!(f, "tr(E(e{a})) != tr(e{a})"),
            ExtensionViolation::Retraction { b } => write!(f, "E(b{b}) != b{b}"),
        }
    }
}

/// A tracial algebra with a unital *-subalgebra `B`, the trace-preserving
/// expectation onto it, and a list of candidate unitaries used to generate
/// fiber squares.
#[derive(Clone, Debug)]
pub struct Extension {
    algebra: TracialAlgebra,
    sub: Vec<Elem>,
    expectation: GMatrix,
    unitaries: Vec<Elem>,
    sub_coords: SubspaceCoords,
}

fn elems_matrix(dim: usize, vs: &[Elem]) -> GMatrix {
    GMatrix::from_cols(dim, vs)
}

/// Build `A/B` from a basis of `B` given in coordinates of `A`; `E` is the
/// GNS-orthogonal projection onto `B`.
pub fn conditional_expectation(a: &TracialAlgebra, sub: &[Elem]) -> Result<Extension, AlgebraError> {
    let n = a.dim();
    if sub.iter().any(|b| b.len() != n) {
        return Err(AlgebraError::Shape("subalgebra vector of wrong length".into()));
    }
    let keep = independent_subset(n, sub);
    let basis: Vec<Elem> = keep.iter().map(|&i| sub[i].clone()).collect();
    let coords = SubspaceCoords::new(n, &basis);
    if !coords.contains(&a.one()) {
        return Err(AlgebraError::NotSubalgebra("does not contain the unit".into()));
    }
    for (i, x) in basis.iter().enumerate() {
        if !coords.contains(&a.star(x)) {
            return Err(AlgebraError::NotSubalgebra(format!("not star-closed at b{i}")));
        }
        for (j, y) in basis.iter().enumerate() {
            if !coords.contains(&a.mul(x, y)) {
                return Err(AlgebraError::NotSubalgebra(format!("b{i} b{j} leaves B")));
            }
        }
    }
    let form = HermitianForm::new(a.gns_gram())?;
    let expectation = form.orth_projection(&elems_matrix(n, &basis))?;
    Ok(Extension { algebra: a.clone(), sub: basis, expectation, unitaries: Vec::new(), sub_coords: coords })
}

/// Result of testing the conjugation rule for `E` on one unitary.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ConjugationCheck {
    /// `E(uau*) = u E(a) u*` on every basis element.
    pub standard: bool,
    /// `E(uau*) = u* E(a) u` on every basis element.
    pub reversed: bool,
}

impl Extension {
    pub fn algebra(&self) -> &TracialAlgebra {
        &self.algebra
    }

    /// Basis of `B` in coordinates of `A`.
    pub fn sub_basis(&self) -> &[Elem] {
        &self.sub
    }

    pub fn sub_dim(&self) -> usize {
        self.sub.len()
    }

    pub fn expectation(&self) -> &GMatrix {
        &self.expectation
    }

    pub fn unitaries(&self) -> &[Elem] {
        &self.unitaries
    }

    pub fn with_unitaries(mut self, us: Vec<Elem>) -> Self {
        self.unitaries = us;
        self
    }

    pub fn e(&self, a: &[GScalar]) -> Elem {
        self.expectation.mul_vec(a)
    }

    pub fn in_sub(&self, a: &[GScalar]) -> bool {
        self.e(a) == a
    }

    /// Coordinates of an element of `B` in the basis of `B`.
    pub fn to_sub(&self, a: &[GScalar]) -> Option<Elem> {
        self.sub_coords.express(a).map(|v| v.to_dense(self.sub.len()))
    }

    /// The element of `A` with the given coordinates in the basis of `B`.
    pub fn from_sub(&self, coords: &[GScalar]) -> Elem {
        coords.iter().zip(&self.sub).fold(self.algebra.zero(), |acc, (c, b)| elem_add(&acc, &elem_scale(b, c)))
    }

    /// `B` as a tracial algebra in its own basis.
    pub fn sub_algebra(&self) -> TracialAlgebra {
        let labels = (0..self.sub.len()).map(|i| format!("b{}", i + 1)).collect();
        self.algebra
            .from_subspace(&self.sub, &self.algebra.one(), &Rational::ONE, labels)
            .expect("B is a subalgebra by construction")
    }

    /// `B` is commutative.
    pub fn sub_is_commutative(&self) -> bool {
        self.sub.iter().all(|x| self.sub.iter().all(|y| self.algebra.commutes(x, y)))
    }

    /// Algebra axioms, bimodularity, trace preservation and `E|_B = id`.
    pub fn validate(&self) -> Vec<ExtensionViolation> {
        let a = &self.algebra;
        let mut out: Vec<ExtensionViolation> = a.validate().into_iter().map(ExtensionViolation::Algebra).collect();
        let n = a.dim();
        for i in 0..n {
            let ei = a.basis(i);
            let ee = self.e(&ei);
            if a.tr(&ee) != a.tr(&ei) {
                out.push(ExtensionViolation::TracePreservation { a: i });
            }
            for (l, bl) in self.sub.iter().enumerate() {
                for (r, br) in self.sub.iter().enumerate() {
                    if self.e(&a.mul3(bl, &ei, br)) != a.mul3(bl, &ee, br) {
                        out.push(ExtensionViolation::Bimodular { left: l, a: i, right: r });
                    }
                }
            }
        }
        for (k, b) in self.sub.iter().enumerate() {
            if &self.e(b) != b {
                out.push(ExtensionViolation::Retraction { b: k });
            }
        }
        out
    }

    /// `u*Bu ⊆ B` (equivalently `= B` at finite dimension).
    pub fn normalizes(&self, u: &[GScalar]) -> Result<(), usize> {
        let a = &self.algebra;
        let us = a.star(u);
        for (k, b) in self.sub.iter().enumerate() {
            if !self.in_sub(&a.mul3(&us, b, u)) || !self.in_sub(&a.mul3(u, b, &us)) {
                return Err(k);
            }
        }
        Ok(())
    }

    /// Candidate unitaries that are unitary and normalize `B`.
    pub fn normalizing_unitaries(&self) -> Vec<Elem> {
        self.unitaries.iter().filter(|u| self.algebra.is_unitary(u) && self.normalizes(u).is_ok()).cloned().collect()
    }

    /// Test both readings of the conjugation rule for `E`.
    pub fn conjugation_rule(&self, u: &[GScalar]) -> ConjugationCheck {
        let a = &self.algebra;
        let us = a.star(u);
        let mut standard = true;
        let mut reversed = true;
        for i in 0..a.dim() {
            let ei = a.basis(i);
            let lhs = self.e(&a.mul3(u, &ei, &us));
            let ee = self.e(&ei);
            standard &= lhs == a.mul3(u, &ee, &us);
            reversed &= lhs == a.mul3(&us, &ee, u);
        }
        ConjugationCheck { standard, reversed }
    }

    /// `A/A`.
    pub fn whole(a: &TracialAlgebra) -> Self {
        let basis: Vec<Elem> = (0..a.dim()).map(|i| a.basis(i)).collect();
        conditional_expectation(a, &basis).expect("A is a subalgebra of itself")
    }

    /// `A/ℂ`.
    pub fn over_scalars(a: &TracialAlgebra) -> Self {
        conditional_expectation(a, &[a.one()]).expect("scalars form a subalgebra")
    }

    /// `M_n(ℂ)/ℂ` with signed permutation matrices as candidate unitaries.
    pub fn matrix_over_scalars(n: usize) -> Self {
        Self::over_scalars(&TracialAlgebra::matrix_algebra(n)).with_unitaries(signed_permutations(n))
    }

    /// `M_n(ℂ)` over its diagonal.
    pub fn matrix_over_diagonal(n: usize) -> Self {
        let a = TracialAlgebra::matrix_algebra(n);
        let diag: Vec<Elem> = (0..n).map(|i| a.basis(i * n + i)).collect();
        conditional_expectation(&a, &diag).expect("diagonal subalgebra").with_unitaries(signed_permutations(n))
    }

    /// `ℂG/ℂ` with the unitaries `±g`.
    pub fn group_over_scalars(g: &FiniteGroup) -> Self {
        let a = TracialAlgebra::group_algebra(g);
        let mut us = Vec::new();
        for x in 0..g.order() {
            let e = a.basis(x);
            us.push(elem_scale(&e, &GScalar::int(-1)));
            us.push(e);
        }
        Self::over_scalars(&a).with_unitaries(us)
    }
}

/// Signed permutation matrices in `M_n`, coordinates `e_ij` at `i·n + j`.
pub fn signed_permutations(n: usize) -> Vec<Elem> {
    let mut out = Vec::new();
    for p in permutations(n) {
        for signs in 0..(1usize << n) {
            let mut u = elem_zero(n * n);
            for (j, &i) in p.iter().enumerate() {
                u[i * n + j] = if signs >> j & 1 == 1 { GScalar::int(-1) } else { GScalar::one() };
            }
            out.push(u);
        }
    }
    out
}

/// `ℂG` with basis the elements, `δ_α δ_β = δ_{αβ}` when composable,
/// `δ_α* = δ_{α⁻¹}` and `tr(δ_α) = μ(x)` when `α` is the unit at `x`.
fn groupoid_algebra(g: &FiniteGroupoid, twist: impl Fn(usize, usize) -> GScalar) -> TracialAlgebra {
    let n = g.len();
    let mut mult = Vec::with_capacity(n * n);
    for a in 0..n {
        for b in 0..n {
            mult.push(match g.compose(a, b) {
                Some(c) => SparseVec::from_entries(vec![(c, twist(a, b))]),
                None => SparseVec::new(),
            });
        }
    }
    let mut unit = elem_zero(n);
    let mut trace = elem_zero(n);
    for x in 0..g.base().len() {
        unit[g.unit(x)] = GScalar::one();
        trace[g.unit(x)] = GScalar::real(g.base().weight(x).clone());
    }
    let star = (0..n).map(|a| SparseVec::unit(g.inverse(a))).collect();
    TracialAlgebra::new(g.labels().to_vec(), mult, unit, star, trace).expect("groupoid algebra shape")
}

/// Unitaries `d·u_S` for every bisection `S` and `d ∈ {1} ∪ {1 − 2·1_x}`.
pub fn bisection_unitaries(g: &FiniteGroupoid) -> Vec<Elem> {
    let n = g.len();
    let m = g.base().len();
    let mut out = Vec::new();
    for b in g.bisections() {
        for flip in core::iter::once(None).chain((0..m).map(Some)) {
            let mut u = elem_zero(n);
            for (x, &a) in b.iter().enumerate() {
                u[a] = if flip == Some(x) { GScalar::int(-1) } else { GScalar::one() };
            }
            out.push(u);
        }
    }
    out
}

fn unit_basis(g: &FiniteGroupoid) -> Vec<Elem> {
    (0..g.base().len()).map(|x| elem_basis(g.len(), g.unit(x))).collect()
}

/// `ℂG/L^∞X`, with `E` the restriction to units.
pub fn convolution_algebra(g: &FiniteGroupoid) -> Extension {
    let a = groupoid_algebra(g, |_, _| GScalar::one());
    groupoid_extension(g, a)
}

fn groupoid_extension(g: &FiniteGroupoid, a: TracialAlgebra) -> Extension {
    let n = g.len();
    let mut e = GMatrix::zeros(n, n);
    for x in 0..g.base().len() {
        e[(g.unit(x), g.unit(x))] = GScalar::one();
    }
    let sub = unit_basis(g);
    let sub_coords = SubspaceCoords::new(n, &sub);
    Extension { algebra: a, sub, expectation: e, unitaries: bisection_unitaries(g), sub_coords }
}

/// A 2-cocycle on an equivalence relation with values in `{±1, ±i}`.
/// `σ(x, y, z)` is stored for every triple of atoms; only related triples
/// are read.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwoCocycle {
    atoms: usize,
    values: Vec<GScalar>,
}

impl TwoCocycle {
    pub fn trivial(atoms: usize) -> Self {
        TwoCocycle { atoms, values: vec![GScalar::one(); atoms * atoms * atoms] }
    }

    pub fn from_fn(atoms: usize, f: impl Fn(usize, usize, usize) -> GScalar) -> Self {
        let mut values = Vec::with_capacity(atoms * atoms * atoms);
        for x in 0..atoms {
            for y in 0..atoms {
                for z in 0..atoms {
                    values.push(f(x, y, z));
                }
            }
        }
        TwoCocycle { atoms, values }
    }

    pub fn atoms(&self) -> usize {
        self.atoms
    }

    pub fn get(&self, x: usize, y: usize, z: usize) -> &GScalar {
        &self.values[(x * self.atoms + y) * self.atoms + z]
    }

    pub fn set(&mut self, x: usize, y: usize, z: usize, v: GScalar) {
        let n = self.atoms;
        self.values[(x * n + y) * n + z] = v;
    }

    /// Values, cocycle identity and skew-symmetric normalization on all
    /// related triples and quadruples of `r`.
    pub fn validate(&self, r: &FiniteGroupoid) -> Result<(), AlgebraError> {
        if !r.is_equivalence_relation() {
            return Err(AlgebraError::NotEquivalenceRelation);
        }
        let n = r.base().len();
        if n != self.atoms {
            return Err(AlgebraError::Shape(format!("cocycle on {} atoms, relation on {n}", self.atoms)));
        }
        let rel = |x: usize, y: usize| r.arrow(x, y).is_some();
        let triples: Vec<(usize, usize, usize)> = (0..n)
            .flat_map(|x| (0..n).flat_map(move |y| (0..n).map(move |z| (x, y, z))))
            .filter(|&(x, y, z)| rel(x, y) && rel(y, z))
            .collect();
        for &(x, y, z) in &triples {
            if !self.get(x, y, z).is_fourth_root_of_unity() {
                return Err(AlgebraError::CocycleValue { triple: (x, y, z) });
            }
        }
        for &(x, y, z) in &triples {
            for t in 0..n {
                if !rel(z, t) {
                    continue;
                }
                let lhs = self.get(x, y, z) * self.get(x, z, t);
                let rhs = self.get(y, z, t) * self.get(x, y, t);
                if lhs != rhs {
                    return Err(AlgebraError::CocycleIdentity { quadruple: (x, y, z, t) });
                }
            }
        }
        for &(x, y, z) in &triples {
            let ok =
                (self.get(x, y, z) * self.get(z, y, x)).is_one() && (x != y || y != z || self.get(x, x, x).is_one());
            if !ok {
                return Err(AlgebraError::CocycleNormalization { triple: (x, y, z) });
            }
        }
        Ok(())
    }
}

/// `ℂR_σ/L^∞X`: `δ_{xy} δ_{yz} = σ(x, y, z) δ_{xz}` and `δ_{xy}* = δ_{yx}`.
pub fn twisted_convolution(r: &FiniteGroupoid, sigma: &TwoCocycle) -> Result<Extension, AlgebraError> {
    sigma.validate(r)?;
    let a = groupoid_algebra(r, |a, b| sigma.get(r.target(a), r.source(a), r.source(b)).clone());
    Ok(groupoid_extension(r, a))
}

/// How `B` sits in a weighted sum.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SumMode {
    /// `B = ⊕ B_n`.
    Componentwise,
    /// One shared `B` embedded diagonally; all summands must have equal `B`.
    Central,
}

#[derive(Clone, Debug)]
pub struct WeightedSum {
    pub extension: Extension,
    /// Offset of each summand's basis in the sum.
    pub offsets: Vec<usize>,
    /// Central mode: `E(Σ a_n) = Σ α_n E(a_n)` held on every basis element.
    pub central_formula: Option<bool>,
}

fn shift(v: &[GScalar], offset: usize, dim: usize) -> Elem {
    let mut out = elem_zero(dim);
    out[offset..offset + v.len()].clone_from_slice(v);
    out
}

/// `⊕ α_n A_n` with trace `Σ α_n tr_n`.
pub fn weighted_sum(parts: &[&Extension], weights: &[Rational], mode: SumMode) -> Result<WeightedSum, AlgebraError> {
    if parts.is_empty() || parts.len() != weights.len() {
        return Err(AlgebraError::Shape("need one positive weight per summand".into()));
    }
    if weights.iter().any(|w| w.is_negative() || w.is_zero()) {
        return Err(AlgebraError::Shape("weights must be positive".into()));
    }
    let total = weights.iter().fold(Rational::ZERO, |acc, w| &acc + w);
    if !total.is_one() {
        return Err(AlgebraError::WeightSum { total });
    }
    let algs: Vec<&TracialAlgebra> = parts.iter().map(|p| p.algebra()).collect();
    let (sum, offsets) = TracialAlgebra::direct_sum(&algs, weights);
    let d = sum.dim();
    let sub: Vec<Elem> = match mode {
        SumMode::Componentwise => {
            parts.iter().zip(&offsets).flat_map(|(p, &o)| p.sub_basis().iter().map(move |b| shift(b, o, d))).collect()
        }
        SumMode::Central => {
            let b0 = parts[0].sub_algebra();
            if parts.iter().any(|p| p.sub_algebra() != b0) {
                return Err(AlgebraError::SubalgebraMismatch);
            }
            (0..b0.dim())
                .map(|k| {
                    parts
                        .iter()
                        .zip(&offsets)
                        .fold(elem_zero(d), |acc, (p, &o)| elem_add(&acc, &shift(&p.sub[k], o, d)))
                })
                .collect()
        }
    };
    // Unitaries: one candidate from each summand, all combinations.
    let mut unitaries: Vec<Elem> = vec![elem_zero(d)];
    for (p, &o) in parts.iter().zip(&offsets) {
        let cands = if p.unitaries.is_empty() { vec![p.algebra.one()] } else { p.unitaries.clone() };
        unitaries =
            unitaries.iter().flat_map(|acc| cands.iter().map(move |u| elem_add(acc, &shift(u, o, d)))).collect();
    }
    let extension = conditional_expectation(&sum, &sub)?.with_unitaries(unitaries);
    let central_formula = (mode == SumMode::Central).then(|| {
        (0..d).all(|i| {
            let k = offsets.iter().rposition(|&o| o <= i).unwrap_or(0);
            let p = parts[k];
            let local = p.e(&p.algebra.basis(i - offsets[k]));
            // Σ α_n E(a_n) with a_n the only nonzero component, embedded diagonally.
            let coeffs = SubspaceCoords::new(p.algebra.dim(), &p.sub)
                .express(&local)
                .expect("E lands in B")
                .to_dense(p.sub.len());
            let w = GScalar::real(weights[k].clone());
            let expected = coeffs
                .iter()
                .enumerate()
                .fold(elem_zero(d), |acc, (j, c)| elem_add(&acc, &elem_scale(&extension.sub[j], &(c * &w))));
            extension.e(&sum.basis(i)) == expected
        })
    });
    Ok(WeightedSum { extension, offsets, central_formula })
}

#[derive(Clone, Debug)]
pub struct Compression {
    /// `A_p/B_p` in its own basis.
    pub extension: Extension,
    /// Basis of `pAp` in coordinates of `A`.
    pub embedding: Vec<Elem>,
    pub p_in_center_of_b: bool,
    pub p_in_b: bool,
    /// `E_p(x)·E(p) = p·E(x)` for every basis element `x` of `pAp`.
    pub restriction_matches: bool,
}

/// `pAp/pBp` with trace `tr(x)/tr(p)`. Requires `p` a projection commuting
/// with `B`.
pub fn compression(ext: &Extension, p: &[GScalar]) -> Result<Compression, AlgebraError> {
    let a = ext.algebra();
    if p.len() != a.dim() {
        return Err(AlgebraError::Shape("projection of wrong length".into()));
    }
    if !a.is_projection(p) || elem_is_zero(p) {
        return Err(AlgebraError::NotProjection);
    }
    if let Some(k) = ext.sub.iter().position(|b| !a.commutes(p, b)) {
        return Err(AlgebraError::NotCommuting { basis: k });
    }
    let n = a.dim();
    let compress = |x: &Elem| a.mul3(p, x, p);
    let all: Vec<Elem> = (0..n).map(|i| compress(&a.basis(i))).collect();
    let keep = independent_subset(n, &all);
    let emb: Vec<Elem> = keep.iter().map(|&i| all[i].clone()).collect();
    let labels: Vec<String> = keep
        .iter()
        .map(|&i| if all[i] == a.basis(i) { a.label(i).into() } else { format!("p{}p", a.label(i)) })
        .collect();
    let scale = match a.tr(p).re.clone() {
        t if !t.is_zero() => t.recip(),
        _ => return Err(AlgebraError::NotProjection),
    };
    let ap = a.from_subspace(&emb, p, &scale, labels)?;
    let coords = SubspaceCoords::new(n, &emb);
    let to_local = |x: &Elem| coords.express(x).expect("inside pAp").to_dense(emb.len());
    let sub_vals: Vec<Elem> = ext.sub.iter().map(|b| to_local(&compress(b))).collect();
    let local_units: Vec<Elem> =
        ext.unitaries.iter().map(compress).map(|u| to_local(&u)).filter(|u| ap.is_unitary(u)).collect();
    let extension = conditional_expectation(&ap, &sub_vals)?.with_unitaries(local_units);
    let from_local = |v: &Elem| v.iter().zip(&emb).fold(elem_zero(n), |acc, (c, e)| elem_add(&acc, &elem_scale(e, c)));
    let ep = ext.e(p);
    let restriction_matches = (0..emb.len()).all(|i| {
        let x = &emb[i];
        let lhs = a.mul(&from_local(&extension.e(&elem_basis(emb.len(), i))), &ep);
        lhs == a.mul(p, &ext.e(x))
    });
    let p_in_b = ext.in_sub(p);
    Ok(Compression {
        extension,
        embedding: emb,
        p_in_center_of_b: p_in_b && ext.sub.iter().all(|b| a.commutes(p, b)),
        p_in_b,
        restriction_matches,
    })
}

/// Smallest subalgebra containing `B` and the given unitaries.
pub fn normalizer_span(ext: &Extension, unitaries: &[Elem]) -> Result<Vec<Elem>, AlgebraError> {
    let a = ext.algebra();
    let mut gens: Vec<Elem> = ext.sub.clone();
    for (i, u) in unitaries.iter().enumerate() {
        if !a.is_unitary(u) {
            return Err(AlgebraError::NotUnitary { index: i });
        }
        if let Err(k) = ext.normalizes(u) {
            return Err(AlgebraError::NotNormalizing { unitary: i, basis: k });
        }
        gens.push(u.clone());
        gens.push(a.star(u));
    }
    Ok(saturate(a, &gens))
}

/// `N/B` for the span `N` of `B` and the unitaries, in its own basis.
pub fn normalizing_extension(ext: &Extension, unitaries: &[Elem]) -> Result<Extension, AlgebraError> {
    let a = ext.algebra();
    let span = normalizer_span(ext, unitaries)?;
    let labels = (0..span.len()).map(|i| format!("n{}", i + 1)).collect();
    let alg = a.from_subspace(&span, &a.one(), &Rational::ONE, labels)?;
    let coords = SubspaceCoords::new(a.dim(), &span);
    let local = |x: &Elem| coords.express(x).expect("inside the span").to_dense(span.len());
    let sub: Vec<Elem> = ext.sub.iter().map(local).collect();
    let mut us: Vec<Elem> = unitaries.iter().map(local).collect();
    us.extend(ext.unitaries.iter().filter(|u| coords.contains(u)).map(local));
    Ok(conditional_expectation(&alg, &sub)?.with_unitaries(us))
}

/// Outcome of pushing a groupoid morphism to convolution algebras.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct InducedMap {
    pub multiplicative: bool,
    pub star: bool,
    pub trace: bool,
    pub expectation: bool,
}

impl InducedMap {
    pub fn is_morphism(&self) -> bool {
        self.multiplicative && self.star && self.trace && self.expectation
    }
}

/// Check `δ_α ↦ δ_{φ(α)}` against the extension structure of `ℂG → ℂH`.
pub fn induced_map(g: &FiniteGroupoid, h: &FiniteGroupoid, phi: &[usize]) -> InducedMap {
    let cg = convolution_algebra(g);
    let ch = convolution_algebra(h);
    let (ag, ah) = (cg.algebra(), ch.algebra());
    let map = |v: &Elem| {
        let mut out = elem_zero(h.len());
        for (i, c) in v.iter().enumerate() {
            out[phi[i]] += c;
        }
        out
    };
    let n = g.len();
    let basis: Vec<Elem> = (0..n).map(|i| ag.basis(i)).collect();
    let multiplicative = basis.iter().all(|x| basis.iter().all(|y| map(&ag.mul(x, y)) == ah.mul(&map(x), &map(y))));
    let star = basis.iter().all(|x| map(&ag.star(x)) == ah.star(&map(x)));
    let trace = basis.iter().all(|x| ag.tr(x) == ah.tr(&map(x)));
    let expectation = basis.iter().all(|x| map(&cg.e(x)) == ch.e(&map(x)));
    InducedMap { multiplicative, star, trace, expectation }
}

impl fmt::Display for SumMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SumMode::Componentwise => "componentwise",
            SumMode::Central => "central",
        })
    }
}

impl SumMode {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "componentwise" => Some(SumMode::Componentwise),
            "central" => Some(SumMode::Central),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groupoid::FiniteMeasuredSpace;

    fn pair(n: usize) -> FiniteGroupoid {
        FiniteGroupoid::pair_relation(FiniteMeasuredSpace::uniform(n))
    }

    #[test]
    fn diagonal_expectation_extracts_diagonal() {
        let ext = Extension::matrix_over_diagonal(2);
        assert!(ext.validate().is_empty());
        let e = ext.expectation();
        let mut expected = GMatrix::zeros(4, 4);
        expected[(0, 0)] = GScalar::one();
        expected[(3, 3)] = GScalar::one();
        assert_eq!(e, &expected);
    }

    #[test]
    fn scalar_expectation_is_trace() {
        let ext = Extension::matrix_over_scalars(2);
        let a = ext.algebra();
        for i in 0..4 {
            let x = a.basis(i);
            assert_eq!(ext.e(&x), elem_scale(&a.one(), &a.tr(&x)));
        }
        let whole = Extension::whole(a);
        assert_eq!(whole.expectation(), &GMatrix::identity(4));
    }

    #[test]
    fn non_subalgebra_rejected() {
        let a = TracialAlgebra::matrix_algebra(2);
        assert!(matches!(conditional_expectation(&a, &[a.basis(0)]), Err(AlgebraError::NotSubalgebra(_))));
        assert!(matches!(conditional_expectation(&a, &[a.one(), a.basis(1)]), Err(AlgebraError::NotSubalgebra(_))));
    }

    #[test]
    fn pair_relation_matches_matrix_algebra() {
        for n in 1..4 {
            let c = convolution_algebra(&pair(n));
            let m = TracialAlgebra::matrix_algebra(n);
            assert_eq!(c.algebra().dim(), m.dim());
            for i in 0..n * n {
                for j in 0..n * n {
                    assert_eq!(c.algebra().basis_product(i, j), m.basis_product(i, j));
                }
            }
            assert_eq!(c.algebra().gns_gram(), m.gns_gram());
            assert!(c.validate().is_empty());
        }
    }

    #[test]
    fn convolution_expectation_is_orthogonal_projection() {
        let g = FiniteGroupoid::action_groupoid(
            &FiniteGroup::cyclic(2),
            FiniteMeasuredSpace::uniform(2),
            &[vec![0, 1], vec![1, 0]],
        )
        .unwrap();
        let c = convolution_algebra(&g);
        let again = conditional_expectation(c.algebra(), c.sub_basis()).unwrap();
        assert_eq!(c.expectation(), again.expectation());
        let t = convolution_algebra(&FiniteGroupoid::trivial(FiniteMeasuredSpace::uniform(3)));
        assert_eq!(t.expectation(), &GMatrix::identity(3));
        assert!(t.algebra().validate().is_empty());
    }

    #[test]
    fn group_algebra_from_groupoid() {
        let g = FiniteGroup::symmetric(3);
        let c = convolution_algebra(&FiniteGroupoid::from_group(&g));
        assert_eq!(c.algebra(), &TracialAlgebra::group_algebra(&g));
    }

    #[test]
    fn trivial_cocycle_gives_plain_algebra() {
        let r = pair(2);
        let t = twisted_convolution(&r, &TwoCocycle::trivial(2)).unwrap();
        assert_eq!(t.algebra(), convolution_algebra(&r).algebra());
    }

    fn alternating() -> TwoCocycle {
        TwoCocycle::from_fn(2, |x, y, z| if x == z && x != y { GScalar::int(-1) } else { GScalar::one() })
    }

    #[test]
    fn alternating_cocycle_is_associative_but_indefinite() {
        let r = pair(2);
        let t = twisted_convolution(&r, &alternating()).unwrap();
        let viol = t.algebra().validate();
        assert!(!viol.iter().any(|v| matches!(v, AlgebraViolation::Associativity { .. })));
        assert!(viol.contains(&AlgebraViolation::NotFaithful));
        let c = convolution_algebra(&r);
        assert_eq!(t.expectation(), c.expectation());
        assert_eq!(t.sub_basis(), c.sub_basis());
        assert_eq!(t.algebra().trace_vector(), c.algebra().trace_vector());
    }

    #[test]
    fn three_atom_cocycle_is_tracial() {
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
        let t = twisted_convolution(&r, &sigma).unwrap();
        assert!(t.validate().is_empty());
        assert_ne!(t.algebra(), convolution_algebra(&r).algebra());
    }

    #[test]
    fn mutated_cocycle_rejected() {
        let mut s = alternating();
        s.set(0, 1, 0, GScalar::one());
        assert!(matches!(twisted_convolution(&pair(2), &s), Err(AlgebraError::CocycleIdentity { .. })));
        let mut s = TwoCocycle::trivial(2);
        s.set(0, 1, 1, GScalar::ratio(1, 2));
        assert!(matches!(twisted_convolution(&pair(2), &s), Err(AlgebraError::CocycleValue { .. })));
    }

    #[test]
    fn weighted_sum_traces() {
        let m2 = Extension::matrix_over_diagonal(2);
        let c2 = Extension::group_over_scalars(&FiniteGroup::cyclic(2));
        let half = Rational::new(1, 2);
        let s = weighted_sum(&[&m2, &c2], &[half.clone(), half.clone()], SumMode::Componentwise).unwrap();
        assert!(s.extension.validate().is_empty());
        assert_eq!(s.extension.sub_dim(), 3);
        let a = s.extension.algebra();
        let first = shift(&m2.algebra().one(), 0, a.dim());
        assert_eq!(a.tr(&first), GScalar::real(half.clone()));
        let bad = weighted_sum(&[&m2, &c2], &[half.clone(), Rational::new(1, 3)], SumMode::Componentwise);
        assert!(matches!(bad, Err(AlgebraError::WeightSum { .. })));
        let single = weighted_sum(&[&m2], &[Rational::ONE], SumMode::Componentwise).unwrap();
        assert_eq!(single.extension.expectation(), m2.expectation());
    }

    #[test]
    fn central_sum_formula() {
        let c2 = Extension::group_over_scalars(&FiniteGroup::cyclic(2));
        let c3 = Extension::group_over_scalars(&FiniteGroup::cyclic(3));
        let half = Rational::new(1, 2);
        let s = weighted_sum(&[&c2, &c3], &[half.clone(), half.clone()], SumMode::Central).unwrap();
        assert_eq!(s.central_formula, Some(true));
        assert_eq!(s.extension.sub_dim(), 1);
        let a = s.extension.algebra();
        let idem = shift(&c2.algebra().one(), 0, a.dim());
        assert_eq!(a.tr(&idem), GScalar::real(half));
        let m2 = Extension::matrix_over_diagonal(2);
        assert!(matches!(
            weighted_sum(&[&c2, &m2], &[Rational::new(1, 2), Rational::new(1, 2)], SumMode::Central),
            Err(AlgebraError::SubalgebraMismatch)
        ));
    }

    #[test]
    fn compressions() {
        let ext = Extension::matrix_over_diagonal(2);
        let p = ext.algebra().basis(0);
        let c = compression(&ext, &p).unwrap();
        assert_eq!(c.extension.algebra().dim(), 1);
        assert_eq!(c.extension.algebra().tr(&c.extension.algebra().one()), GScalar::one());
        assert!(c.p_in_b && c.restriction_matches);

        let over_c = Extension::matrix_over_scalars(2);
        let c = compression(&over_c, &p).unwrap();
        assert_eq!(c.extension.algebra().dim(), 1);
        assert!(!c.p_in_b);
        assert!(c.restriction_matches);

        let one = compression(&ext, &ext.algebra().one()).unwrap();
        assert_eq!(one.extension.algebra(), ext.algebra());

        let mut bad = ext.algebra().zero();
        bad[1] = GScalar::one();
        assert!(matches!(compression(&ext, &bad), Err(AlgebraError::NotProjection)));
        let m2 = TracialAlgebra::matrix_algebra(2);
        let half = GScalar::ratio(1, 2);
        let q = vec![half.clone(), half.clone(), half.clone(), half];
        assert!(matches!(compression(&ext, &q), Err(AlgebraError::NotCommuting { .. })));
        assert!(m2.is_projection(&q));
    }

    #[test]
    fn compression_trace_identity() {
        let ext = Extension::matrix_over_diagonal(3);
        let a = ext.algebra();
        let p = elem_add(&a.basis(0), &a.basis(4));
        let c = compression(&ext, &p).unwrap();
        let ap = c.extension.algebra();
        let tp = a.tr(&p);
        for (i, x) in c.embedding.iter().enumerate() {
            assert_eq!(&ap.tr(&ap.basis(i)) * &tp, a.tr(x));
        }
    }

    #[test]
    fn normalizer_spans() {
        let ext = convolution_algebra(&pair(2));
        assert_eq!(normalizer_span(&ext, &[]).unwrap().len(), 2);
        let us = ext.normalizing_unitaries();
        assert_eq!(normalizer_span(&ext, &us).unwrap().len(), 4);
        let g = Extension::group_over_scalars(&FiniteGroup::symmetric(3));
        assert_eq!(normalizer_span(&g, g.unitaries()).unwrap().len(), 6);
        let diag = Extension::matrix_over_diagonal(2);
        let a = GScalar::new(Rational::new(1, 2), Rational::new(1, 2));
        let b = a.conj();
        let u = vec![a.clone(), b.clone(), b, a];
        assert!(diag.algebra().is_unitary(&u));
        assert!(matches!(
            normalizer_span(&diag, core::slice::from_ref(&u)),
            Err(AlgebraError::NotNormalizing { unitary: 0, basis: 0 })
        ));
        let twice = elem_scale(&u, &GScalar::int(2));
        assert!(matches!(normalizer_span(&diag, &[twice]), Err(AlgebraError::NotUnitary { index: 0 })));
    }

    #[test]
    fn conjugation_rule_on_signed_permutations() {
        let ext = Extension::matrix_over_diagonal(3);
        for u in ext.normalizing_unitaries() {
            let c = ext.conjugation_rule(&u);
            assert!(c.standard);
        }
        let swap = signed_permutations(3)
            .into_iter()
            .find(|u| u[1] == GScalar::one() && u[5] == GScalar::one() && u[6] == GScalar::one())
            .unwrap();
        assert!(!ext.conjugation_rule(&swap).reversed);
    }

    #[test]
    fn diagonal_embedding_induces_morphism() {
        for g in [pair(2), FiniteGroupoid::from_group(&FiniteGroup::cyclic(3))] {
            let env = g.enveloping();
            let m = induced_map(&g, &env.groupoid, &env.diagonal);
            assert!(m.is_morphism(), "{m:?}");
        }
    }

    #[test]
    fn signed_permutation_count() {
        assert_eq!(signed_permutations(2).len(), 8);
        let m2 = TracialAlgebra::matrix_algebra(2);
        assert!(signed_permutations(2).iter().all(|u| m2.is_unitary(u)));
    }

    #[test]
    fn bisection_unitaries_are_unitary() {
        let r = pair(3);
        let c = convolution_algebra(&r);
        assert_eq!(c.unitaries().len(), 6 * 4);
        assert_eq!(c.normalizing_unitaries().len(), 24);
    }
}
