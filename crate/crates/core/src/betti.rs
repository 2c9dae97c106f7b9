//! L²-Betti numbers of extensions and groupoids, and the theorem checks
//! built on them.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::algebra::{AlgebraError, TracialAlgebra};
use crate::complex::{
    check_classifying_homotopy, classifying_action, fiber_action, geometric_complex, induced_module, ChainComplex,
    ComplexError, WordComplex, WordKind,
};
use crate::dimension::{vn_dimension, FiniteModule, ModuleViolation};
use crate::extension::{
    compression, convolution_algebra, normalizing_extension, twisted_convolution, weighted_sum, Extension, SumMode,
    TwoCocycle,
};
use crate::fiber_square::{fiber_square, projection_trace, FiberError, FiberOptions, FiberSquare};
use crate::groupoid::FiniteGroupoid;
use crate::linalg::{SparseMatrix, SparseVec};
use crate::scalar::{GScalar, Rational};
use crate::spaces::{GeometricKind, GeometricSpace};

/// Word budget for materializing a complex and computing ranks directly.
pub const RANK_WORD_LIMIT: u128 = 6000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Pipeline {
    /// `dim_{A*A} H_n` of the acyclic complex with coefficients `A ⊗_B A`.
    Hochschild,
    /// `dim_{ℂG} Tor_n^{ℂG}(L^∞X, ℂG)` through the classifying complex.
    Sauer,
}

impl Pipeline {
    pub fn name(self) -> &'static str {
        match self {
            Pipeline::Hochschild => "hochschild",
            Pipeline::Sauer => "sauer",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "hochschild" => Some(Pipeline::Hochschild),
            "sauer" => Some(Pipeline::Sauer),
            _ => None,
        }
    }
}

/// How the homology of one degree was determined.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    /// Kernel and image ranks of materialized boundary matrices.
    Rank,
    /// A contracting homotopy verified on every basis word.
    Homotopy,
    /// Both, with equal answers.
    RankAndHomotopy,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Rank => "rank",
            Method::Homotopy => "homotopy",
            Method::RankAndHomotopy => "rank+homotopy",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BettiTable {
    pub pipeline: Pipeline,
    /// Degrees `0..cap` are reported.
    pub cap: usize,
    pub values: Vec<Rational>,
    /// Complex dimension of each homology space.
    pub homology_dims: Vec<usize>,
    pub methods: Vec<Method>,
    /// Dimension of the coefficient algebra the dimensions are taken over.
    pub coefficient_dim: usize,
    pub input_hash: Option<String>,
    pub notes: Vec<String>,
}

impl BettiTable {
    pub fn with_hash(mut self, h: String) -> Self {
        self.input_hash = Some(h);
        self
    }

    /// Same numbers in every degree.
    pub fn same_values(&self, other: &BettiTable) -> bool {
        self.values == other.values
    }
}

const NOTE_FINITE: &str =
    "finite dimension: the von Neumann closures equal their algebraic counterparts, so no completion is taken";

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BettiError {
    Fiber(FiberError),
    Complex(ComplexError),
    Algebra(AlgebraError),
    Module {
        degree: usize,
        violation: ModuleViolation,
    },
    /// Neither the rank path nor a homotopy applies in this degree.
    TooLarge {
        degree: usize,
        words: u128,
    },
    /// The contracting homotopy fails on a basis element of this degree.
    HomotopyFailed {
        degree: usize,
    },
    /// The rank path finds homology where a homotopy certifies none.
    PathsDisagree {
        degree: usize,
        rank_dim: usize,
    },
    ZeroDegreeCap,
}

impl From<FiberError> for BettiError {
    fn from(e: FiberError) -> Self {
        BettiError::Fiber(e)
    }
}

impl From<ComplexError> for BettiError {
    fn from(e: ComplexError) -> Self {
        BettiError::Complex(e)
    }
}

impl From<AlgebraError> for BettiError {
    fn from(e: AlgebraError) -> Self {
        BettiError::Algebra(e)
    }
}

impl fmt::Display for BettiError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BettiError::Fiber(e) => write!(f, "fiber square: {e}"),
            BettiError::Complex(e) => write!(f, "complex: {e}"),
            BettiError::Algebra(e) => write!(f, "{e}"),
            BettiError::Module { degree, violation } => write!(f, "homology module in degree {degree}: {violation}"),
            BettiError::TooLarge { degree, words } => {
                write!(f, "degree {degree} has {words} words and no homotopy applies")
            }
            BettiError::HomotopyFailed { degree } => write!(f, "contracting homotopy fails in degree {degree}"),
            BettiError::PathsDisagree { degree, rank_dim } => {
                write!(f, "degree {degree}: ranks give homology of dimension {rank_dim}, the homotopy gives 0")
            }
            BettiError::ZeroDegreeCap => write!(f, "the degree cap must be at least 1"),
        }
    }
}

/// Homology dimension, module and method of one degree.
struct Degree {
    module: Option<FiniteModule>,
    homology_dim: usize,
    method: Method,
}

/// Shared driver: `materialized` answers degrees below its cap by ranks; the
/// homotopy check covers the degrees from `homotopy_from` on.
fn compute_degrees(
    cap: usize,
    materialized: Option<&ChainComplex>,
    homotopy_from: Option<usize>,
    homotopy_ok: &mut dyn FnMut(usize) -> bool,
    words: &dyn Fn(usize) -> u128,
    module_of: &mut dyn FnMut(usize, &ChainComplex) -> Result<FiniteModule, BettiError>,
) -> Result<Vec<Degree>, BettiError> {
    let mut out = Vec::with_capacity(cap);
    for n in 0..cap {
        let rank = materialized.filter(|c| n < c.cap()).map(|c| c.homology_dim(n)).transpose()?;
        let homotopy = match homotopy_from {
            Some(s) if n >= s => {
                if !homotopy_ok(n) {
                    return Err(BettiError::HomotopyFailed { degree: n });
                }
                true
            }
            _ => false,
        };
        let d = match (rank, homotopy) {
            (Some(h), true) if h != 0 => return Err(BettiError::PathsDisagree { degree: n, rank_dim: h }),
            (Some(_), true) => Degree { module: None, homology_dim: 0, method: Method::RankAndHomotopy },
            (None, true) => Degree { module: None, homology_dim: 0, method: Method::Homotopy },
            (Some(h), false) => {
                let c = materialized.expect("rank path materialized");
                let module = if h == 0 { None } else { Some(module_of(n, c)?) };
                Degree { module, homology_dim: h, method: Method::Rank }
            }
            (None, false) => return Err(BettiError::TooLarge { degree: n, words: words(n + 1) }),
        };
        out.push(d);
    }
    Ok(out)
}

fn table(
    pipeline: Pipeline,
    cap: usize,
    coeff: &TracialAlgebra,
    degrees: Vec<Degree>,
    notes: Vec<String>,
) -> Result<BettiTable, BettiError> {
    let mut values = Vec::with_capacity(cap);
    for (n, d) in degrees.iter().enumerate() {
        let v = match &d.module {
            None => Rational::ZERO,
            Some(m) => {
                m.check(coeff).map_err(|violation| BettiError::Module { degree: n, violation })?;
                vn_dimension(coeff, m)?
            }
        };
        values.push(v);
    }
    Ok(BettiTable {
        pipeline,
        cap,
        values,
        homology_dims: degrees.iter().map(|d| d.homology_dim).collect(),
        methods: degrees.iter().map(|d| d.method).collect(),
        coefficient_dim: coeff.dim(),
        input_hash: None,
        notes,
    })
}

/// Largest `m ≤ cap` such that degrees `0..=m` fit the word budget.
fn rank_reach(cap: usize, count: impl Fn(usize) -> u128) -> Option<usize> {
    let mut total = 0u128;
    let mut reach = None;
    for m in 0..=cap {
        total = total.saturating_add(count(m));
        if total > RANK_WORD_LIMIT {
            break;
        }
        reach = Some(m);
    }
    reach.filter(|&m| m >= 1)
}

/// Hochschild pipeline with a precomputed fiber square.
pub fn betti_from_fiber_square(fs: &FiberSquare, cap: usize) -> Result<BettiTable, BettiError> {
    if cap == 0 {
        return Err(BettiError::ZeroDegreeCap);
    }
    let wc = WordComplex::new(fs.tensor().left_peirce().clone(), WordKind::Acyclic);
    let reach = rank_reach(cap, |m| wc.word_count(m));
    let (complex, levels) = match reach {
        Some(m) => {
            let (c, l) = wc.materialize(m);
            (Some(c), l)
        }
        None => (None, Vec::new()),
    };
    let mut homotopy_ok = |n: usize| wc.check_homotopy(n).is_ok();
    let words = |n: usize| wc.word_count(n);
    let mut module_of = |n: usize, c: &ChainComplex| -> Result<FiniteModule, BettiError> {
        let q = c.homology(n)?;
        let acts = fiber_action(fs, &levels[n])?;
        Ok(induced_module(&q, &acts))
    };
    let degrees =
        compute_degrees(cap, complex.as_ref(), wc.homotopy_range_start(), &mut homotopy_ok, &words, &mut module_of)?;
    let notes = vec![
        NOTE_FINITE.to_string(),
        "coefficients A⊗_B A as a left module over the fiber square, acting on the first two letters".to_string(),
        format!("fiber square of dimension {}", fs.dim()),
    ];
    table(Pipeline::Hochschild, cap, fs.algebra(), degrees, notes)
}

/// `β_n(A/B)` for `n < cap`.
pub fn betti_hochschild(ext: &Extension, cap: usize) -> Result<BettiTable, BettiError> {
    let fs = fiber_square(ext, ext, FiberOptions::default())?;
    betti_from_fiber_square(&fs, cap)
}

/// `β_n(G)` for `n < cap`, with `L^∞X` resolved by the classifying complex.
pub fn betti_sauer(g: &FiniteGroupoid, cap: usize) -> Result<BettiTable, BettiError> {
    if cap == 0 {
        return Err(BettiError::ZeroDegreeCap);
    }
    let conv = convolution_algebra(g);
    // tuples (α_0..α_m) with a common target
    let level_size =
        |m: usize| -> u128 { (0..g.base().len()).map(|x| (g.with_targets(x).count() as u128).pow(m as u32 + 1)).sum() };
    let space = GeometricSpace::new(g, GeometricKind::Classifying, cap);
    let homotopy = check_classifying_homotopy(g, &space);
    let complex = geometric_complex(&space);
    let mut homotopy_ok = |n: usize| match homotopy {
        Ok(()) => true,
        Err(k) => n < k,
    };
    let mut module_of = |n: usize, c: &ChainComplex| -> Result<FiniteModule, BettiError> {
        let q = c.homology(n)?;
        Ok(induced_module(&q, &classifying_action(g, &space, n)))
    };
    let degrees = compute_degrees(cap, Some(&complex), Some(1), &mut homotopy_ok, &level_size, &mut module_of)?;
    let notes = vec![
        NOTE_FINITE.to_string(),
        "Tor computed on the classifying complex with left translation; ℂG ⊗_ℂG C(EG) = C(EG)".to_string(),
    ];
    table(Pipeline::Sauer, cap, conv.algebra(), degrees, notes)
}

/// `∇_n(A/B) = β_n(N/B)` for `N` the span of `B` and the given normalizing
/// unitaries.
pub fn residual_betti(ext: &Extension, unitaries: &[Vec<GScalar>], cap: usize) -> Result<BettiTable, BettiError> {
    let n = normalizing_extension(ext, unitaries)?;
    let mut t = betti_hochschild(&n, cap)?;
    t.notes.push(format!("normalizing algebra of dimension {}", n.algebra().dim()));
    Ok(t)
}

/// Dimension of the center of an algebra.
pub fn center_dim(a: &TracialAlgebra) -> usize {
    let n = a.dim();
    let cols = (0..n)
        .map(|j| {
            let mut entries = Vec::new();
            for i in 0..n {
                let c = a.basis_product(j, i).to_dense(n);
                let d = a.basis_product(i, j).to_dense(n);
                for k in 0..n {
                    let v = &c[k] - &d[k];
                    if !v.is_zero() {
                        entries.push((i * n + k, v));
                    }
                }
            }
            SparseVec::from_entries(entries)
        })
        .collect();
    SparseMatrix::from_columns(n * n, cols).kernel().len()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Theorem {
    Compression,
    DirectedSum,
    CentralQuadratic,
    GroupoidEquality,
    Residual,
}

impl Theorem {
    pub const ALL: [Theorem; 5] = [
        Theorem::Compression,
        Theorem::DirectedSum,
        Theorem::CentralQuadratic,
        Theorem::GroupoidEquality,
        Theorem::Residual,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Theorem::Compression => "compression",
            Theorem::DirectedSum => "directed_sum",
            Theorem::CentralQuadratic => "central_quadratic",
            Theorem::GroupoidEquality => "groupoid_equality",
            Theorem::Residual => "residual",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Theorem::ALL.iter().copied().find(|t| t.name() == s || t.name().replace('_', "-") == s)
    }
}

/// Whether a verified identity is a proven statement or an empirical probe.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scope {
    /// Hypotheses of the theorem hold for the instance.
    Asserted,
    /// Outside the proven hypotheses; reported, not asserted.
    Extended,
    /// Finite stand-in for a statement about diffuse algebras.
    DeskScale,
}

impl Scope {
    pub fn name(self) -> &'static str {
        match self {
            Scope::Asserted => "asserted",
            Scope::Extended => "extended",
            Scope::DeskScale => "desk-scale",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TheoremReport {
    pub theorem: Theorem,
    pub scope: Scope,
    pub lhs: Vec<Rational>,
    pub rhs: Vec<Rational>,
    /// Auxiliary identities checked along the way.
    pub side_checks: Vec<(String, bool)>,
    /// Tables the two sides were assembled from.
    pub tables: Vec<(String, BettiTable)>,
    pub notes: Vec<String>,
}

impl TheoremReport {
    pub fn sides_equal(&self) -> bool {
        self.lhs == self.rhs
    }

    pub fn holds(&self) -> bool {
        self.sides_equal() && self.side_checks.iter().all(|(_, ok)| *ok)
    }

    /// `lhs − rhs` per degree.
    pub fn discrepancy(&self) -> Vec<Rational> {
        self.lhs.iter().zip(&self.rhs).map(|(a, b)| a - b).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum VerifyError {
    Betti(BettiError),
    Algebra(AlgebraError),
    /// `p` commutes with `B` but is not in its center, and `A` is not a
    /// factor.
    OutsideScope {
        center_dim: usize,
    },
    /// `p ⊗ p` is not the evaluation of an element of the fiber square.
    ProjectionNotInFiberSquare,
}

impl From<BettiError> for VerifyError {
    fn from(e: BettiError) -> Self {
        VerifyError::Betti(e)
    }
}

impl From<AlgebraError> for VerifyError {
    fn from(e: AlgebraError) -> Self {
        VerifyError::Algebra(e)
    }
}

impl From<FiberError> for VerifyError {
    fn from(e: FiberError) -> Self {
        VerifyError::Betti(BettiError::Fiber(e))
    }
}

impl fmt::Display for VerifyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VerifyError::Betti(e) => write!(f, "{e}"),
            VerifyError::Algebra(e) => write!(f, "precondition: {e}"),
            VerifyError::OutsideScope { center_dim } => write!(
                f,
                "precondition: p is not in the center of B and A is not a factor (center of dimension {center_dim}); \
                 pass the extended-scope flag to test it anyway"
            ),
            VerifyError::ProjectionNotInFiberSquare => {
                write!(f, "p ⊗ p is not the evaluation of a fiber-square element")
            }
        }
    }
}

/// One instance of a theorem check.
#[derive(Clone, Debug)]
pub enum Instance {
    Compression { ext: Extension, p: Vec<GScalar> },
    DirectedSum { parts: Vec<Extension>, weights: Vec<Rational> },
    CentralQuadratic { parts: Vec<Extension>, weights: Vec<Rational> },
    GroupoidEquality { groupoid: FiniteGroupoid },
    Residual { relation: FiniteGroupoid, cocycle: TwoCocycle },
}

impl Instance {
    pub fn theorem(&self) -> Theorem {
        match self {
            Instance::Compression { .. } => Theorem::Compression,
            Instance::DirectedSum { .. } => Theorem::DirectedSum,
            Instance::CentralQuadratic { .. } => Theorem::CentralQuadratic,
            Instance::GroupoidEquality { .. } => Theorem::GroupoidEquality,
            Instance::Residual { .. } => Theorem::Residual,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VerifyOptions {
    pub cap: usize,
    pub extended_scope: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { cap: 1, extended_scope: false }
    }
}

pub fn verify_theorem(instance: &Instance, opts: VerifyOptions) -> Result<TheoremReport, VerifyError> {
    match instance {
        Instance::Compression { ext, p } => verify_compression(ext, p, opts),
        Instance::DirectedSum { parts, weights } => verify_sum(parts, weights, SumMode::Componentwise, opts.cap),
        Instance::CentralQuadratic { parts, weights } => verify_sum(parts, weights, SumMode::Central, opts.cap),
        Instance::GroupoidEquality { groupoid } => verify_groupoid_equality(groupoid, opts.cap),
        Instance::Residual { relation, cocycle } => verify_residual(relation, cocycle, opts.cap),
    }
}

/// `β(A_p/B_p) = β(A/B) / tr_B(E(p)²)`.
pub fn verify_compression(ext: &Extension, p: &[GScalar], opts: VerifyOptions) -> Result<TheoremReport, VerifyError> {
    let comp = compression(ext, p)?;
    let a = ext.algebra();
    let zdim = center_dim(a);
    let scope = if comp.p_in_center_of_b || zdim == 1 {
        Scope::Asserted
    } else if opts.extended_scope {
        Scope::Extended
    } else {
        return Err(VerifyError::OutsideScope { center_dim: zdim });
    };
    let fs = fiber_square(ext, ext, FiberOptions::default())?;
    let (tr_pp, tr_ep2) = projection_trace(&fs, ext, p).ok_or(VerifyError::ProjectionNotInFiberSquare)?;
    let whole = betti_from_fiber_square(&fs, opts.cap)?;
    let small = betti_hochschild(&comp.extension, opts.cap)?;
    let factor = tr_ep2.re.clone();
    let rhs = whole.values.iter().map(|b| b / &factor).collect();
    let mut notes = vec![format!("tr_B(E(p)²) = {factor}")];
    if scope == Scope::Extended {
        notes.push("p lies in B′∩A but not in the center of B; checked empirically".to_string());
    }
    Ok(TheoremReport {
        theorem: Theorem::Compression,
        scope,
        lhs: small.values.clone(),
        rhs,
        side_checks: vec![
            ("tr_{A*A}(p*p) = tr_B(E(p)²)".to_string(), tr_pp == tr_ep2 && tr_ep2.is_real()),
            ("E_p is the compressed expectation".to_string(), comp.restriction_matches),
        ],
        tables: vec![("A_p/B_p".to_string(), small), ("A/B".to_string(), whole)],
        notes,
    })
}

fn verify_sum(
    parts: &[Extension],
    weights: &[Rational],
    mode: SumMode,
    cap: usize,
) -> Result<TheoremReport, VerifyError> {
    let refs: Vec<&Extension> = parts.iter().collect();
    let sum = weighted_sum(&refs, weights, mode)?;
    let total = betti_hochschild(&sum.extension, cap)?;
    let mut rhs = vec![Rational::ZERO; cap];
    let mut tables = vec![("sum".to_string(), total.clone())];
    for (k, (e, w)) in parts.iter().zip(weights).enumerate() {
        let t = betti_hochschild(e, cap)?;
        let coeff = match mode {
            SumMode::Componentwise => w.clone(),
            SumMode::Central => w * w,
        };
        for (acc, b) in rhs.iter_mut().zip(&t.values) {
            *acc = &*acc + &(&coeff * b);
        }
        tables.push((format!("summand {}", k + 1), t));
    }
    let (theorem, side_checks) = match mode {
        SumMode::Componentwise => (Theorem::DirectedSum, Vec::new()),
        SumMode::Central => (
            Theorem::CentralQuadratic,
            vec![("E(Σ a_n) = Σ α_n E(a_n)".to_string(), sum.central_formula.unwrap_or(false))],
        ),
    };
    Ok(TheoremReport {
        theorem,
        scope: Scope::Asserted,
        lhs: total.values,
        rhs,
        side_checks,
        tables,
        notes: Vec::new(),
    })
}

/// Sauer's numbers against the Hochschild numbers of `ℂG/L^∞X`.
pub fn verify_groupoid_equality(g: &FiniteGroupoid, cap: usize) -> Result<TheoremReport, VerifyError> {
    let sauer = betti_sauer(g, cap)?;
    let hoch = betti_hochschild(&convolution_algebra(g), cap)?;
    Ok(TheoremReport {
        theorem: Theorem::GroupoidEquality,
        scope: Scope::DeskScale,
        lhs: sauer.values.clone(),
        rhs: hoch.values.clone(),
        side_checks: Vec::new(),
        tables: vec![("sauer".to_string(), sauer), ("hochschild".to_string(), hoch)],
        notes: Vec::new(),
    })
}

/// Residual numbers of `ℂR_σ/L^∞X` against Sauer's numbers of `R`, with the
/// untwisted residual numbers as a side check.
pub fn verify_residual(r: &FiniteGroupoid, sigma: &TwoCocycle, cap: usize) -> Result<TheoremReport, VerifyError> {
    let twisted = twisted_convolution(r, sigma)?;
    let plain = convolution_algebra(r);
    let tw = residual_betti(&twisted, &normalizers(&twisted), cap)?;
    let un = residual_betti(&plain, &normalizers(&plain), cap)?;
    let sauer = betti_sauer(r, cap)?;
    Ok(TheoremReport {
        theorem: Theorem::Residual,
        scope: Scope::DeskScale,
        lhs: tw.values.clone(),
        rhs: sauer.values.clone(),
        side_checks: vec![("twisted and untwisted residual numbers agree".to_string(), tw.same_values(&un))],
        tables: vec![
            ("residual twisted".to_string(), tw),
            ("residual untwisted".to_string(), un),
            ("sauer".to_string(), sauer),
        ],
        notes: vec!["finite relation in place of a Cartan inclusion with diffuse B".to_string()],
    })
}

fn normalizers(e: &Extension) -> Vec<Vec<GScalar>> {
    e.unitaries().iter().filter(|u| e.algebra().is_unitary(u) && e.normalizes(u).is_ok()).cloned().collect()
}
