//! Finite-dimensional tracial *-algebras given by structure constants.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::groupoid::FiniteGroup;
use crate::linalg::{Echelon, GMatrix, HermitianForm, LinalgError, SparseVec};
use crate::scalar::{GScalar, Rational};

/// Dense coordinates of an algebra element.
pub type Elem = Vec<GScalar>;

pub fn elem_zero(n: usize) -> Elem {
    vec![GScalar::zero(); n]
}

pub fn elem_basis(n: usize, i: usize) -> Elem {
    let mut v = elem_zero(n);
    v[i] = GScalar::one();
    v
}

pub fn elem_add(a: &[GScalar], b: &[GScalar]) -> Elem {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn elem_sub(a: &[GScalar], b: &[GScalar]) -> Elem {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn elem_scale(a: &[GScalar], c: &GScalar) -> Elem {
    a.iter().map(|x| x * c).collect()
}

pub fn elem_is_zero(a: &[GScalar]) -> bool {
    a.iter().all(GScalar::is_zero)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AlgebraViolation {
    Associativity {
        i: usize,
        j: usize,
        k: usize,
    },
    UnitLaw {
        i: usize,
    },
    StarInvolution {
        i: usize,
    },
    StarAntiMultiplicative {
        i: usize,
        j: usize,
    },
    Tracial {
        i: usize,
        j: usize,
    },
    TraceStar {
        i: usize,
    },
    TraceNormalization {
        value: GScalar,
    },
    /// The GNS form `tr(a*b)` is not positive definite.
    NotFaithful,
}

impl fmt::Display for AlgebraViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlgebraViolation::Associativity { i, j, k } => write!(f, "(e{i} e{j}) e{k} != e{i} (e{j} e{k})"),
            AlgebraViolation::UnitLaw { i } => write!(f, "unit law fails at e{i}"),
            AlgebraViolation::StarInvolution { i } => write!(f, "e{i}** != e{i}"),
            AlgebraViolation::StarAntiMultiplicative { i, j } => write!(f, "(e{i} e{j})* != e{j}* e{i}*"),
            AlgebraViolation::Tracial { i, j } => write!(f, "tr(e{i} e{j}) != tr(e{j} e{i})"),
            AlgebraViolation::TraceStar { i } => write!(f, "tr(e{i}*) != conj tr(e{i})"),
            AlgebraViolation::TraceNormalization { value } => write!(f, "tr(1) = {value}, expected 1"),
            AlgebraViolation::NotFaithful => write!(f, "trace form tr(a*b) is not positive definite"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AlgebraError {
    Invalid(Vec<AlgebraViolation>),
    Shape(String),
    NotSubalgebra(String),
    NotProjection,
    /// `p` fails to commute with this basis element of `B`.
    NotCommuting {
        basis: usize,
    },
    WeightSum {
        total: Rational,
    },
    NotUnitary {
        index: usize,
    },
    /// `u b u*` leaves `B` for this unitary and basis element.
    NotNormalizing {
        unitary: usize,
        basis: usize,
    },
    CocycleValue {
        triple: (usize, usize, usize),
    },
    CocycleIdentity {
        quadruple: (usize, usize, usize, usize),
    },
    CocycleNormalization {
        triple: (usize, usize, usize),
    },
    NotEquivalenceRelation,
    NoProjectionFrame,
    SubalgebraMismatch,
    Linalg(LinalgError),
}

impl From<LinalgError> for AlgebraError {
    fn from(e: LinalgError) -> Self {
        AlgebraError::Linalg(e)
    }
}

impl fmt::Display for AlgebraError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlgebraError::Invalid(vs) => {
                write!(f, "invalid algebra:")?;
                for v in vs {
                    write!(f, " [{v}]")?;
                }
                Ok(())
            }
            AlgebraError::Shape(m) => write!(f, "malformed algebra data: {m}"),
            AlgebraError::NotSubalgebra(m) => write!(f, "not a unital *-subalgebra: {m}"),
            AlgebraError::NotProjection => write!(f, "p is not a projection"),
            AlgebraError::NotCommuting { basis } => write!(f, "p does not commute with basis element {basis} of B"),
            AlgebraError::WeightSum { total } => write!(f, "weights sum to {total}, not 1"),
            AlgebraError::NotUnitary { index } => write!(f, "supplied element {index} is not unitary"),
            AlgebraError::NotNormalizing { unitary, basis } => {
                write!(f, "unitary {unitary} does not normalize B (witness: basis element {basis})")
            }
            AlgebraError::CocycleValue { triple } => {
                write!(f, "cocycle value at {triple:?} is not a fourth root of unity")
            }
            AlgebraError::CocycleIdentity { quadruple } => write!(f, "cocycle identity fails at {quadruple:?}"),
            AlgebraError::CocycleNormalization { triple } => {
                write!(f, "cocycle is not normalized and skew-symmetric at {triple:?}")
            }
            AlgebraError::NotEquivalenceRelation => write!(f, "groupoid is not an equivalence relation"),
            AlgebraError::NoProjectionFrame => {
                write!(f, "could not find a frame of minimal projections for B over the Gaussian rationals")
            }
            AlgebraError::SubalgebraMismatch => write!(f, "extensions do not share the same subalgebra"),
            AlgebraError::Linalg(e) => write!(f, "{e}"),
        }
    }
}

/// A finite-dimensional *-algebra with a trace, in a fixed basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TracialAlgebra {
    labels: Vec<String>,
    /// `mult[i·n + j] = e_i e_j`.
    mult: Vec<SparseVec>,
    unit: Elem,
    /// `star[i] = e_i*`.
    star: Vec<SparseVec>,
    trace: Elem,
}

impl TracialAlgebra {
    pub fn new(
        labels: Vec<String>,
        mult: Vec<SparseVec>,
        unit: Elem,
        star: Vec<SparseVec>,
        trace: Elem,
    ) -> Result<Self, AlgebraError> {
        let n = labels.len();
        if mult.len() != n * n || unit.len() != n || star.len() != n || trace.len() != n {
            return Err(AlgebraError::Shape(format!("inconsistent sizes for dimension {n}")));
        }
        let in_range = |v: &SparseVec| v.entries().last().is_none_or(|e| e.0 < n);
        if !mult.iter().all(in_range) || !star.iter().all(in_range) {
            return Err(AlgebraError::Shape("basis index out of range".into()));
        }
        Ok(TracialAlgebra { labels, mult, unit, star, trace })
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn basis_product(&self, i: usize, j: usize) -> &SparseVec {
        &self.mult[i * self.dim() + j]
    }

    pub fn basis_star(&self, i: usize) -> &SparseVec {
        &self.star[i]
    }

    pub fn trace_vector(&self) -> &[GScalar] {
        &self.trace
    }

    pub fn one(&self) -> Elem {
        self.unit.clone()
    }

    pub fn zero(&self) -> Elem {
        elem_zero(self.dim())
    }

    pub fn basis(&self, i: usize) -> Elem {
        elem_basis(self.dim(), i)
    }

    pub fn mul(&self, a: &[GScalar], b: &[GScalar]) -> Elem {
        let n = self.dim();
        let mut out = elem_zero(n);
        for (i, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                if y.is_zero() {
                    continue;
                }
                let c = x * y;
                for (k, z) in self.mult[i * n + j].entries() {
                    out[*k] += &(&c * z);
                }
            }
        }
        out
    }

    pub fn mul3(&self, a: &[GScalar], b: &[GScalar], c: &[GScalar]) -> Elem {
        self.mul(&self.mul(a, b), c)
    }

    pub fn star(&self, a: &[GScalar]) -> Elem {
        let mut out = elem_zero(self.dim());
        for (i, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            let c = x.conj();
            for (k, z) in self.star[i].entries() {
                out[*k] += &(&c * z);
            }
        }
        out
    }

    pub fn tr(&self, a: &[GScalar]) -> GScalar {
        a.iter().zip(&self.trace).fold(
            GScalar::zero(),
            |acc, (x, t)| {
                if x.is_zero() || t.is_zero() {
                    acc
                } else {
                    &acc + &(x * t)
                }
            },
        )
    }

    /// `⟨a|b⟩ = tr(a* b)`.
    pub fn gns(&self, a: &[GScalar], b: &[GScalar]) -> GScalar {
        self.tr(&self.mul(&self.star(a), b))
    }

    /// Gram matrix of the GNS form in the basis.
    pub fn gns_gram(&self) -> GMatrix {
        let n = self.dim();
        let mut g = GMatrix::zeros(n, n);
        for i in 0..n {
            let si = self.star(&self.basis(i));
            for j in 0..n {
                g[(i, j)] = self.tr(&self.mul(&si, &self.basis(j)));
            }
        }
        g
    }

    pub fn is_unitary(&self, u: &[GScalar]) -> bool {
        let us = self.star(u);
        self.mul(&us, u) == self.unit && self.mul(u, &us) == self.unit
    }

    pub fn is_projection(&self, p: &[GScalar]) -> bool {
        self.star(p) == p && self.mul(p, p) == p
    }

    pub fn commutes(&self, a: &[GScalar], b: &[GScalar]) -> bool {
        self.mul(a, b) == self.mul(b, a)
    }

    /// Matrix of `x ↦ a·x`.
    pub fn left_mult_matrix(&self, a: &[GScalar]) -> GMatrix {
        let n = self.dim();
        let cols: Vec<Elem> = (0..n).map(|j| self.mul(a, &self.basis(j))).collect();
        GMatrix::from_cols(n, &cols)
    }

    /// Every axiom on basis elements, plus faithfulness of the trace.
    pub fn validate(&self) -> Vec<AlgebraViolation> {
        let mut out = self.associativity_violations();
        out.extend(self.validate_except_associativity());
        out
    }

    fn associativity_violations(&self) -> Vec<AlgebraViolation> {
        let n = self.dim();
        let mut out = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let ij = &self.mult[i * n + j];
                for k in 0..n {
                    let left =
                        ij.entries().iter().fold(SparseVec::new(), |acc, (a, c)| acc.axpy(c, &self.mult[a * n + k]));
                    let jk = &self.mult[j * n + k];
                    let right =
                        jk.entries().iter().fold(SparseVec::new(), |acc, (b, c)| acc.axpy(c, &self.mult[i * n + b]));
                    if left != right {
                        out.push(AlgebraViolation::Associativity { i, j, k });
                    }
                }
            }
        }
        out
    }

    /// `validate` without the cubic associativity sweep, for algebras whose
    /// products are realized by composition of operators.
    pub fn validate_except_associativity(&self) -> Vec<AlgebraViolation> {
        let n = self.dim();
        let mut out = Vec::new();
        for i in 0..n {
            let e = self.basis(i);
            if self.mul(&self.unit, &e) != e || self.mul(&e, &self.unit) != e {
                out.push(AlgebraViolation::UnitLaw { i });
            }
            if self.star(&self.star(&e)) != e {
                out.push(AlgebraViolation::StarInvolution { i });
            }
            if self.tr(&self.star(&e)) != self.trace[i].conj() {
                out.push(AlgebraViolation::TraceStar { i });
            }
        }
        for i in 0..n {
            for j in 0..n {
                let (ei, ej) = (self.basis(i), self.basis(j));
                let ij = self.mul(&ei, &ej);
                if self.star(&ij) != self.mul(&self.star(&ej), &self.star(&ei)) {
                    out.push(AlgebraViolation::StarAntiMultiplicative { i, j });
                }
                if self.tr(&ij) != self.tr(&self.mul(&ej, &ei)) {
                    out.push(AlgebraViolation::Tracial { i, j });
                }
            }
        }
        let t1 = self.tr(&self.unit);
        if !t1.is_one() {
            out.push(AlgebraViolation::TraceNormalization { value: t1 });
        }
        match HermitianForm::new(self.gns_gram()) {
            Ok(f) if f.is_positive_definite() => {}
            _ => out.push(AlgebraViolation::NotFaithful),
        }
        out
    }

    /// Trace form nondegenerate, hence semisimple.
    pub fn is_semisimple(&self) -> bool {
        crate::linalg::rank(&self.gns_gram()) == self.dim()
    }

    /// `M_n(ℂ)` with matrix units `e_ij` at index `i·n + j` and normalized trace.
    pub fn matrix_algebra(n: usize) -> Self {
        let d = n * n;
        let mut mult = vec![SparseVec::new(); d * d];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    mult[(i * n + j) * d + (j * n + k)] = SparseVec::unit(i * n + k);
                }
            }
        }
        let mut unit = elem_zero(d);
        let mut trace = elem_zero(d);
        for i in 0..n {
            unit[i * n + i] = GScalar::one();
            trace[i * n + i] = GScalar::ratio(1, n as i64);
        }
        let star = (0..d).map(|k| SparseVec::unit((k % n) * n + k / n)).collect();
        let labels = (0..n).flat_map(|i| (0..n).map(move |j| format!("e{}{}", i + 1, j + 1))).collect();
        TracialAlgebra { labels, mult, unit, star, trace }
    }

    /// `ℂG` with `tr(g) = δ_{g,e}`.
    pub fn group_algebra(g: &FiniteGroup) -> Self {
        let n = g.order();
        let mut mult = Vec::with_capacity(n * n);
        for a in 0..n {
            for b in 0..n {
                mult.push(SparseVec::unit(g.mul(a, b)));
            }
        }
        TracialAlgebra {
            labels: g.labels().to_vec(),
            mult,
            unit: elem_basis(n, g.identity()),
            star: (0..n).map(|a| SparseVec::unit(g.inverse(a))).collect(),
            trace: elem_basis(n, g.identity()),
        }
    }

    /// The one-dimensional algebra `ℂ`.
    pub fn scalars() -> Self {
        TracialAlgebra {
            labels: vec!["1".to_string()],
            mult: vec![SparseVec::unit(0)],
            unit: vec![GScalar::one()],
            star: vec![SparseVec::unit(0)],
            trace: vec![GScalar::one()],
        }
    }

    /// `⊕ A_n` with trace `Σ α_n tr_n`. Returns the algebra and the offset
    /// of each summand's basis.
    pub fn direct_sum(parts: &[&TracialAlgebra], weights: &[Rational]) -> (Self, Vec<usize>) {
        assert_eq!(parts.len(), weights.len());
        let mut offsets = Vec::with_capacity(parts.len());
        let mut d = 0;
        for p in parts {
            offsets.push(d);
            d += p.dim();
        }
        let mut mult = vec![SparseVec::new(); d * d];
        let mut unit = elem_zero(d);
        let mut star = Vec::with_capacity(d);
        let mut trace = elem_zero(d);
        let mut labels = Vec::with_capacity(d);
        for (k, p) in parts.iter().enumerate() {
            let o = offsets[k];
            let w = GScalar::real(weights[k].clone());
            for i in 0..p.dim() {
                for j in 0..p.dim() {
                    let e = p.basis_product(i, j).entries().iter().map(|(x, c)| (x + o, c.clone())).collect();
                    mult[(o + i) * d + (o + j)] = SparseVec::from_entries(e);
                }
                unit[o + i] = p.unit[i].clone();
                trace[o + i] = &p.trace[i] * &w;
                star.push(SparseVec::from_entries(
                    p.basis_star(i).entries().iter().map(|(x, c)| (x + o, c.clone())).collect(),
                ));
                labels.push(format!("{}:{}", k, p.label(i)));
            }
        }
        (TracialAlgebra { labels, mult, unit, star, trace }, offsets)
    }

    /// The algebra carried by a subspace closed under product and star,
    /// with the given unit and trace `tr(x)·scale`. Returns the algebra in
    /// the coordinates of `basis` (assumed independent).
    pub fn from_subspace(
        &self,
        basis: &[Elem],
        unit: &[GScalar],
        scale: &Rational,
        labels: Vec<String>,
    ) -> Result<Self, AlgebraError> {
        let k = basis.len();
        let coords = SubspaceCoords::new(self.dim(), basis);
        if coords.rank() != k {
            return Err(AlgebraError::NotSubalgebra("basis is not independent".into()));
        }
        let express = |v: &Elem, what: &str| {
            coords.express(v).ok_or_else(|| AlgebraError::NotSubalgebra(format!("{what} leaves the subspace")))
        };
        let mut mult = Vec::with_capacity(k * k);
        for a in basis {
            for b in basis {
                mult.push(express(&self.mul(a, b), "product")?);
            }
        }
        let star = basis.iter().map(|a| express(&self.star(a), "star")).collect::<Result<Vec<_>, _>>()?;
        let unit = express(&unit.to_vec(), "unit")?.to_dense(k);
        let s = GScalar::real(scale.clone());
        let trace = basis.iter().map(|a| &self.tr(a) * &s).collect();
        TracialAlgebra::new(labels, mult, unit, star, trace)
    }
}

/// Coordinates with respect to an independent family of dense vectors.
#[derive(Clone, Debug)]
pub struct SubspaceCoords {
    echelon: Echelon,
}

impl SubspaceCoords {
    pub fn new(dim: usize, basis: &[Elem]) -> Self {
        let mut echelon = Echelon::with_tracking(dim);
        for (i, b) in basis.iter().enumerate() {
            echelon.insert_tracked(SparseVec::from_dense(b), i);
        }
        SubspaceCoords { echelon }
    }

    pub fn rank(&self) -> usize {
        self.echelon.rank()
    }

    pub fn contains(&self, v: &[GScalar]) -> bool {
        self.echelon.contains(&SparseVec::from_dense(v))
    }

    pub fn express(&self, v: &[GScalar]) -> Option<SparseVec> {
        self.echelon.express(&SparseVec::from_dense(v))
    }
}

/// Independent subfamily (first occurrences win).
pub fn independent_subset(dim: usize, vs: &[Elem]) -> Vec<usize> {
    let mut e = Echelon::new(dim);
    (0..vs.len()).filter(|&i| e.insert(SparseVec::from_dense(&vs[i]))).collect()
}

/// Span closure of a family under multiplication (the subalgebra it
/// generates together with the unit). Returns an independent basis.
pub fn saturate(a: &TracialAlgebra, gens: &[Elem]) -> Vec<Elem> {
    let n = a.dim();
    let mut e = Echelon::new(n);
    let mut basis: Vec<Elem> = Vec::new();
    let push = |v: Elem, e: &mut Echelon, basis: &mut Vec<Elem>| {
        if e.insert(SparseVec::from_dense(&v)) {
            basis.push(v);
        }
    };
    push(a.one(), &mut e, &mut basis);
    for g in gens {
        push(g.clone(), &mut e, &mut basis);
    }
    let mut done = 0;
    while done < basis.len() {
        let x = basis[done].clone();
        for g in gens {
            push(a.mul(g, &x), &mut e, &mut basis);
        }
        done += 1;
    }
    basis
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_algebra_is_valid() {
        let m2 = TracialAlgebra::matrix_algebra(2);
        assert!(m2.validate().is_empty());
        let g = m2.gns_gram();
        assert_eq!(g, GMatrix::identity(4).scale(&GScalar::ratio(1, 2)));
    }

    #[test]
    fn group_algebra_is_valid() {
        let c3 = TracialAlgebra::group_algebra(&FiniteGroup::cyclic(3));
        assert!(c3.validate().is_empty());
        let s3 = TracialAlgebra::group_algebra(&FiniteGroup::symmetric(3));
        assert!(s3.validate().is_empty());
    }

    #[test]
    fn bad_normalization_is_reported() {
        let c2 = TracialAlgebra::group_algebra(&FiniteGroup::cyclic(2));
        let mut t = c2.trace_vector().to_vec();
        t[0] = GScalar::int(2);
        let bad = TracialAlgebra::new(
            c2.labels().to_vec(),
            (0..4).map(|k| c2.basis_product(k / 2, k % 2).clone()).collect(),
            c2.one(),
            (0..2).map(|i| c2.basis_star(i).clone()).collect(),
            t,
        )
        .unwrap();
        assert!(bad.validate().iter().any(|v| matches!(v, AlgebraViolation::TraceNormalization { .. })));
    }

    #[test]
    fn direct_sum_weights_units() {
        let m2 = TracialAlgebra::matrix_algebra(2);
        let c2 = TracialAlgebra::group_algebra(&FiniteGroup::cyclic(2));
        let half = Rational::new(1, 2);
        let (s, off) = TracialAlgebra::direct_sum(&[&m2, &c2], &[half.clone(), half.clone()]);
        assert!(s.validate().is_empty());
        let mut first_unit = s.zero();
        first_unit[off[0]] = GScalar::one();
        first_unit[off[0] + 3] = GScalar::one();
        assert_eq!(s.tr(&first_unit), GScalar::real(half));
    }

    #[test]
    fn saturation_of_generator() {
        let c3 = TracialAlgebra::group_algebra(&FiniteGroup::cyclic(3));
        assert_eq!(saturate(&c3, &[c3.basis(1)]).len(), 3);
        assert_eq!(saturate(&c3, &[]).len(), 1);
    }
}
