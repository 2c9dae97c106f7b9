//! JSON input documents and their conversion to library objects.

use std::collections::BTreeMap;
use std::fmt;

use serde::Deserialize;

use l2betti::algebra::{AlgebraViolation, TracialAlgebra};
use l2betti::extension::{
    compression, conditional_expectation, convolution_algebra, twisted_convolution, weighted_sum, Extension,
    ExtensionViolation, SumMode, TwoCocycle,
};
use l2betti::groupoid::{FiniteGroup, FiniteGroupoid, FiniteMeasuredSpace, GroupoidError, GroupoidParts, Violation};
use l2betti::linalg::SparseVec;
use l2betti::{GScalar, Rational};

/// A parse or conversion failure, tagged with where it happened.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InputError {
    pub location: String,
    pub message: String,
}

impl InputError {
    fn at(location: &str, message: impl Into<String>) -> Self {
        InputError { location: location.to_string(), message: message.into() }
    }
}

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.location, self.message)
    }
}

type Res<T> = Result<T, InputError>;

#[derive(Deserialize, Debug, Clone)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Document {
    Groupoid(GroupoidSpec),
    Extension(ExtensionSpec),
    Cocycle(CocycleSpec),
    Instance(InstanceSpec),
}

impl Document {
    pub fn kind(&self) -> &'static str {
        match self {
            Document::Groupoid(_) => "groupoid",
            Document::Extension(_) => "extension",
            Document::Cocycle(_) => "cocycle",
            Document::Instance(_) => "instance",
        }
    }
}

/// Parse a document; syntax errors carry `line:column`.
pub fn parse_document(name: &str, text: &str) -> Res<Document> {
    serde_json::from_str(text)
        .map_err(|e| InputError::at(&format!("{name}:{}:{}", e.line(), e.column()), e.to_string()))
}

#[derive(Deserialize, Debug, Clone)]
#[serde(untagged)]
pub enum AtomsSpec {
    Count(usize),
    List(Vec<AtomSpec>),
}

#[derive(Deserialize, Debug, Clone)]
#[serde(deny_unknown_fields)]
pub struct AtomSpec {
    pub label: String,
    pub weight: String,
}

#[derive(Deserialize, Debug, Clone)]
#[serde(untagged)]
pub enum GroupSpec {
    /// `C<n>` or `S<n>`.
    Name(String),
    Table {
        labels: Vec<String>,
        table: Vec<Vec<String>>,
    },
}

#[derive(Deserialize, Debug, Clone)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum GroupoidRecipe {
    Trivial {
        atoms: AtomsSpec,
    },
    Group {
        group: GroupSpec,
    },
    PairRelation {
        atoms: AtomsSpec,
    },
    PartitionRelation {
        atoms: AtomsSpec,
        blocks: Vec<Vec<usize>>,
    },
    /// `action[g][x] = g·x`, groups elements in table order.
    ActionGroupoid {
        group: GroupSpec,
        atoms: AtomsSpec,
        action: Vec<Vec<usize>>,
    },
}

#[derive(Deserialize, Debug, Clone)]
#[serde(deny_unknown_fields)]
pub struct ElementSpec {
    pub id: String,
    pub source: String,
    pub target: String,
}

#[derive(Deserialize, Debug, Clone, Default)]
pub struct GroupoidSpec {
    pub construct: Option<GroupoidRecipe>,
    pub atoms: Option<AtomsSpec>,
    pub elements: Option<Vec<ElementSpec>>,
    /// `id → inverse id`.
    pub inverse: Option<BTreeMap<String, String>>,
    /// Triples `[a, b, ab]`.
    pub compose: Option<Vec<[String; 3]>>,
}

#[derive(Deserialize, Debug, Clone)]
#[serde(untagged)]
pub enum ElemSpec {
    Dense(Vec<String>),
    Sparse(BTreeMap<String, String>),
}

#[derive(Deserialize, Debug, Clone)]
#[serde(deny_unknown_fields)]
pub struct ProductSpec {
    pub left: String,
    pub right: String,
    pub result: ElemSpec,
}

#[derive(Deserialize, Debug, Clone)]
#[serde(deny_unknown_fields)]
pub struct AlgebraSpec {
    pub labels: Vec<String>,
    pub unit: ElemSpec,
    /// Omitted labels have trace 0.
    #[serde(default)]
    pub trace: BTreeMap<String, String>,
    pub star: BTreeMap<String, ElemSpec>,
    /// Omitted products are 0.
    #[serde(default)]
    pub products: Vec<ProductSpec>,
}

#[derive(Deserialize, Debug, Clone)]
#[serde(deny_unknown_fields)]
pub struct PartSpec {
    pub weight: String,
    pub extension: ExtensionSpec,
}

#[derive(Deserialize, Debug, Clone)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ExtensionRecipe {
    MatrixOverScalars { n: usize },
    MatrixOverDiagonal { n: usize },
    GroupOverScalars { group: GroupSpec },
    Convolution { groupoid: GroupoidSpec },
    Twisted { cocycle: Box<CocycleSpec> },
    WeightedSum { mode: String, parts: Vec<PartSpec> },
    Compression { extension: Box<ExtensionSpec>, projection: ElemSpec },
}

#[derive(Deserialize, Debug, Clone, Default)]
pub struct ExtensionSpec {
    pub construct: Option<ExtensionRecipe>,
    pub algebra: Option<AlgebraSpec>,
    pub subalgebra: Option<Vec<ElemSpec>>,
    pub unitaries: Option<Vec<ElemSpec>>,
}

#[derive(Deserialize, Debug, Clone)]
#[serde(deny_unknown_fields)]
pub struct CocycleValue {
    pub triple: [String; 3],
    pub value: String,
}

#[derive(Deserialize, Debug, Clone)]
pub struct CocycleSpec {
    pub relation: GroupoidSpec,
    /// Value on triples not listed; 1 when omitted.
    pub default: Option<String>,
    #[serde(default)]
    pub values: Vec<CocycleValue>,
}

#[derive(Deserialize, Debug, Clone)]
#[serde(tag = "theorem", rename_all = "snake_case")]
pub enum InstanceSpec {
    Compression { extension: ExtensionSpec, projection: ElemSpec },
    DirectedSum { parts: Vec<PartSpec> },
    CentralQuadratic { parts: Vec<PartSpec> },
    GroupoidEquality { groupoid: GroupoidSpec },
    Residual { cocycle: CocycleSpec },
}

fn rational(s: &str, loc: &str) -> Res<Rational> {
    s.parse().map_err(|e| InputError::at(loc, format!("{e}")))
}

fn scalar(s: &str, loc: &str) -> Res<GScalar> {
    s.parse().map_err(|e| InputError::at(loc, format!("{e}")))
}

fn space(spec: &AtomsSpec, loc: &str) -> Res<FiniteMeasuredSpace> {
    match spec {
        AtomsSpec::Count(0) => Err(InputError::at(loc, "at least one atom is needed")),
        AtomsSpec::Count(n) => Ok(FiniteMeasuredSpace::uniform(*n)),
        AtomsSpec::List(list) => {
            let labels = list.iter().map(|a| a.label.clone()).collect();
            let weights = list
                .iter()
                .enumerate()
                .map(|(i, a)| rational(&a.weight, &format!("{loc}[{i}].weight")))
                .collect::<Res<Vec<_>>>()?;
            FiniteMeasuredSpace::new(labels, weights).map_err(|e| InputError::at(loc, e.to_string()))
        }
    }
}

fn group(spec: &GroupSpec, loc: &str) -> Res<FiniteGroup> {
    match spec {
        GroupSpec::Name(name) => {
            let (kind, n) = name.split_at(1.min(name.len()));
            let n: usize = n.parse().map_err(|_| InputError::at(loc, format!("unknown group `{name}`")))?;
            match kind {
                "C" if n >= 1 => Ok(FiniteGroup::cyclic(n)),
                "S" if n >= 1 => Ok(FiniteGroup::symmetric(n)),
                _ => Err(InputError::at(loc, format!("unknown group `{name}`; use C<n>, S<n> or a table"))),
            }
        }
        GroupSpec::Table { labels, table } => {
            let index: BTreeMap<&str, usize> = labels.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
            let rows = table
                .iter()
                .enumerate()
                .map(|(i, row)| {
                    row.iter()
                        .enumerate()
                        .map(|(j, l)| {
                            index.get(l.as_str()).copied().ok_or_else(|| {
                                InputError::at(&format!("{loc}.table[{i}][{j}]"), format!("unknown element `{l}`"))
                            })
                        })
                        .collect::<Res<Vec<_>>>()
                })
                .collect::<Res<Vec<_>>>()?;
            FiniteGroup::from_table(labels.clone(), rows).map_err(|e| InputError::at(loc, e.to_string()))
        }
    }
}

fn groupoid_error(loc: &str, e: GroupoidError) -> InputError {
    InputError::at(loc, e.to_string())
}

/// A groupoid before its axioms are checked.
pub fn groupoid_unchecked(spec: &GroupoidSpec, loc: &str) -> Res<FiniteGroupoid> {
    if let Some(recipe) = &spec.construct {
        let loc = &format!("{loc}.construct");
        return match recipe {
            GroupoidRecipe::Trivial { atoms } => Ok(FiniteGroupoid::trivial(space(atoms, &format!("{loc}.atoms"))?)),
            GroupoidRecipe::Group { group: g } => Ok(FiniteGroupoid::from_group(&group(g, &format!("{loc}.group"))?)),
            GroupoidRecipe::PairRelation { atoms } => {
                Ok(FiniteGroupoid::pair_relation(space(atoms, &format!("{loc}.atoms"))?))
            }
            GroupoidRecipe::PartitionRelation { atoms, blocks } => {
                FiniteGroupoid::partition_relation(space(atoms, &format!("{loc}.atoms"))?, blocks)
                    .map_err(|e| groupoid_error(&format!("{loc}.blocks"), e))
            }
            GroupoidRecipe::ActionGroupoid { group: g, atoms, action } => FiniteGroupoid::action_groupoid(
                &group(g, &format!("{loc}.group"))?,
                space(atoms, &format!("{loc}.atoms"))?,
                action,
            )
            .map_err(|e| groupoid_error(&format!("{loc}.action"), e)),
        };
    }
    let need = |what: &str| InputError::at(loc, format!("missing `{what}` (or give `construct`)"));
    let base = space(spec.atoms.as_ref().ok_or_else(|| need("atoms"))?, &format!("{loc}.atoms"))?;
    let elements = spec.elements.as_ref().ok_or_else(|| need("elements"))?;
    let inverse = spec.inverse.as_ref().ok_or_else(|| need("inverse"))?;
    let compose = spec.compose.as_ref().ok_or_else(|| need("compose"))?;
    let atom = |l: &str, at: String| -> Res<usize> {
        (0..base.len()).find(|&x| base.label(x) == l).ok_or_else(|| InputError::at(&at, format!("unknown atom `{l}`")))
    };
    let mut index = BTreeMap::new();
    for (i, e) in elements.iter().enumerate() {
        if index.insert(e.id.as_str(), i).is_some() {
            return Err(InputError::at(&format!("{loc}.elements[{i}].id"), format!("duplicate id `{}`", e.id)));
        }
    }
    let elem = |l: &str, at: String| -> Res<usize> {
        index.get(l).copied().ok_or_else(|| InputError::at(&at, format!("unknown element `{l}`")))
    };
    let source = elements
        .iter()
        .enumerate()
        .map(|(i, e)| atom(&e.source, format!("{loc}.elements[{i}].source")))
        .collect::<Res<Vec<_>>>()?;
    let target = elements
        .iter()
        .enumerate()
        .map(|(i, e)| atom(&e.target, format!("{loc}.elements[{i}].target")))
        .collect::<Res<Vec<_>>>()?;
    let inv = elements
        .iter()
        .map(|e| {
            let at = format!("{loc}.inverse.{}", e.id);
            let l = inverse.get(&e.id).ok_or_else(|| InputError::at(&at, "missing inverse"))?;
            elem(l, at)
        })
        .collect::<Res<Vec<_>>>()?;
    let triples = compose
        .iter()
        .enumerate()
        .map(|(k, [a, b, c])| {
            let at = || format!("{loc}.compose[{k}]");
            Ok((elem(a, at())?, elem(b, at())?, elem(c, at())?))
        })
        .collect::<Res<Vec<_>>>()?;
    // the unit at x is the idempotent arrow x → x
    let units = (0..base.len())
        .map(|x| {
            let idem: Vec<usize> = (0..elements.len())
                .filter(|&a| source[a] == x && target[a] == x && triples.contains(&(a, a, a)))
                .collect();
            match idem.as_slice() {
                [u] => Ok(*u),
                [] => Err(InputError::at(&format!("{loc}.compose"), format!("no unit at atom `{}`", base.label(x)))),
                _ => Err(InputError::at(
                    &format!("{loc}.compose"),
                    format!("several idempotents at `{}`", base.label(x)),
                )),
            }
        })
        .collect::<Res<Vec<_>>>()?;
    let parts = GroupoidParts {
        labels: elements.iter().map(|e| e.id.clone()).collect(),
        source,
        target,
        inverse: inv,
        compose: triples,
        units,
        base,
    };
    FiniteGroupoid::from_parts_unchecked(parts).map_err(|e| groupoid_error(loc, e))
}

/// A groupoid whose axioms hold.
pub fn groupoid(spec: &GroupoidSpec, loc: &str) -> Res<FiniteGroupoid> {
    let g = groupoid_unchecked(spec, loc)?;
    let v = groupoid_violations(&g);
    if v.is_empty() {
        Ok(g)
    } else {
        Err(InputError::at(loc, format!("invalid groupoid: {}", join(&v))))
    }
}

pub fn groupoid_violations(g: &FiniteGroupoid) -> Vec<Violation> {
    g.validate()
}

fn join<T: fmt::Display>(xs: &[T]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

pub fn elem(spec: &ElemSpec, labels: &[String], loc: &str) -> Res<Vec<GScalar>> {
    let n = labels.len();
    match spec {
        ElemSpec::Dense(xs) => {
            if xs.len() != n {
                return Err(InputError::at(loc, format!("expected {n} coordinates, found {}", xs.len())));
            }
            xs.iter().enumerate().map(|(i, s)| scalar(s, &format!("{loc}[{i}]"))).collect()
        }
        ElemSpec::Sparse(map) => {
            let mut out = vec![GScalar::zero(); n];
            for (l, s) in map {
                let i = labels
                    .iter()
                    .position(|x| x == l)
                    .ok_or_else(|| InputError::at(&format!("{loc}.{l}"), format!("unknown basis label `{l}`")))?;
                out[i] = scalar(s, &format!("{loc}.{l}"))?;
            }
            Ok(out)
        }
    }
}

fn algebra(spec: &AlgebraSpec, loc: &str) -> Res<TracialAlgebra> {
    let labels = &spec.labels;
    let n = labels.len();
    let idx = |l: &str, at: String| -> Res<usize> {
        labels.iter().position(|x| x == l).ok_or_else(|| InputError::at(&at, format!("unknown basis label `{l}`")))
    };
    let mut mult = vec![SparseVec::new(); n * n];
    for (k, p) in spec.products.iter().enumerate() {
        let at = format!("{loc}.products[{k}]");
        let (i, j) = (idx(&p.left, format!("{at}.left"))?, idx(&p.right, format!("{at}.right"))?);
        mult[i * n + j] = SparseVec::from_dense(&elem(&p.result, labels, &format!("{at}.result"))?);
    }
    let star = labels
        .iter()
        .map(|l| {
            let at = format!("{loc}.star.{l}");
            let e = spec.star.get(l).ok_or_else(|| InputError::at(&at, "missing star"))?;
            Ok(SparseVec::from_dense(&elem(e, labels, &at)?))
        })
        .collect::<Res<Vec<_>>>()?;
    for l in spec.star.keys().chain(spec.trace.keys()) {
        idx(l, format!("{loc}.{l}"))?;
    }
    let trace = labels
        .iter()
        .map(|l| spec.trace.get(l).map_or(Ok(GScalar::zero()), |s| scalar(s, &format!("{loc}.trace.{l}"))))
        .collect::<Res<Vec<_>>>()?;
    let unit = elem(&spec.unit, labels, &format!("{loc}.unit"))?;
    TracialAlgebra::new(labels.clone(), mult, unit, star, trace).map_err(|e| InputError::at(loc, e.to_string()))
}

/// An extension and the violations found while assembling it; explicit
/// algebras are not rejected here so that `validate` can list every
/// violation.
pub struct BuiltExtension {
    pub extension: Extension,
    pub algebra_violations: Vec<AlgebraViolation>,
    pub extension_violations: Vec<ExtensionViolation>,
}

pub fn extension_unchecked(spec: &ExtensionSpec, loc: &str) -> Res<BuiltExtension> {
    let plain = |e: Extension| BuiltExtension {
        extension: e,
        algebra_violations: Vec::new(),
        extension_violations: Vec::new(),
    };
    if let Some(recipe) = &spec.construct {
        let loc = &format!("{loc}.construct");
        let alg_err = |e: l2betti::algebra::AlgebraError| InputError::at(loc, e.to_string());
        return Ok(plain(match recipe {
            ExtensionRecipe::MatrixOverScalars { n } if *n >= 1 => Extension::matrix_over_scalars(*n),
            ExtensionRecipe::MatrixOverDiagonal { n } if *n >= 1 => Extension::matrix_over_diagonal(*n),
            ExtensionRecipe::MatrixOverScalars { .. } | ExtensionRecipe::MatrixOverDiagonal { .. } => {
                return Err(InputError::at(&format!("{loc}.n"), "matrix size must be at least 1"))
            }
            ExtensionRecipe::GroupOverScalars { group: g } => {
                Extension::group_over_scalars(&group(g, &format!("{loc}.group"))?)
            }
            ExtensionRecipe::Convolution { groupoid: g } => {
                convolution_algebra(&groupoid(g, &format!("{loc}.groupoid"))?)
            }
            ExtensionRecipe::Twisted { cocycle: c } => {
                let (r, sigma) = cocycle(c, &format!("{loc}.cocycle"))?;
                twisted_convolution(&r, &sigma).map_err(alg_err)?
            }
            ExtensionRecipe::WeightedSum { mode, parts } => {
                let mode = match mode.as_str() {
                    "componentwise" => SumMode::Componentwise,
                    "central" => SumMode::Central,
                    other => {
                        return Err(InputError::at(
                            &format!("{loc}.mode"),
                            format!("unknown mode `{other}`; use componentwise or central"),
                        ))
                    }
                };
                let (exts, weights) = parts_of(parts, &format!("{loc}.parts"))?;
                let refs: Vec<&Extension> = exts.iter().collect();
                weighted_sum(&refs, &weights, mode).map_err(alg_err)?.extension
            }
            ExtensionRecipe::Compression { extension, projection } => {
                let e = self::extension(extension, &format!("{loc}.extension"))?;
                let p = elem(projection, e.algebra().labels(), &format!("{loc}.projection"))?;
                compression(&e, &p).map_err(alg_err)?.extension
            }
        }));
    }
    let a_spec = spec.algebra.as_ref().ok_or_else(|| InputError::at(loc, "missing `algebra` (or give `construct`)"))?;
    let a = algebra(a_spec, &format!("{loc}.algebra"))?;
    let algebra_violations = a.validate();
    let labels = a.labels().to_vec();
    let sub = match &spec.subalgebra {
        Some(vs) => vs
            .iter()
            .enumerate()
            .map(|(i, v)| elem(v, &labels, &format!("{loc}.subalgebra[{i}]")))
            .collect::<Res<Vec<_>>>()?,
        None => vec![a.one()],
    };
    let us = match &spec.unitaries {
        Some(vs) => vs
            .iter()
            .enumerate()
            .map(|(i, v)| elem(v, &labels, &format!("{loc}.unitaries[{i}]")))
            .collect::<Res<Vec<_>>>()?,
        None => Vec::new(),
    };
    let extension = conditional_expectation(&a, &sub)
        .map_err(|e| InputError::at(&format!("{loc}.subalgebra"), e.to_string()))?
        .with_unitaries(us);
    let extension_violations =
        extension.validate().into_iter().filter(|v| !matches!(v, ExtensionViolation::Algebra(_))).collect();
    Ok(BuiltExtension { extension, algebra_violations, extension_violations })
}

/// An extension whose axioms hold.
pub fn extension(spec: &ExtensionSpec, loc: &str) -> Res<Extension> {
    let b = extension_unchecked(spec, loc)?;
    if !b.algebra_violations.is_empty() {
        return Err(InputError::at(loc, format!("invalid algebra: {}", join(&b.algebra_violations))));
    }
    if !b.extension_violations.is_empty() {
        return Err(InputError::at(loc, format!("invalid extension: {}", join(&b.extension_violations))));
    }
    Ok(b.extension)
}

pub fn parts_of(parts: &[PartSpec], loc: &str) -> Res<(Vec<Extension>, Vec<Rational>)> {
    let mut exts = Vec::with_capacity(parts.len());
    let mut weights = Vec::with_capacity(parts.len());
    for (i, p) in parts.iter().enumerate() {
        weights.push(rational(&p.weight, &format!("{loc}[{i}].weight"))?);
        exts.push(extension(&p.extension, &format!("{loc}[{i}].extension"))?);
    }
    Ok((exts, weights))
}

/// The relation and the cocycle table; the cocycle is not validated here.
pub fn cocycle_unchecked(spec: &CocycleSpec, loc: &str) -> Res<(FiniteGroupoid, TwoCocycle)> {
    let r = groupoid(&spec.relation, &format!("{loc}.relation"))?;
    let base = r.base();
    let default = match &spec.default {
        Some(s) => scalar(s, &format!("{loc}.default"))?,
        None => GScalar::one(),
    };
    let mut sigma = TwoCocycle::from_fn(base.len(), |_, _, _| default.clone());
    for (k, v) in spec.values.iter().enumerate() {
        let at = format!("{loc}.values[{k}]");
        let mut xs = [0usize; 3];
        for (slot, l) in xs.iter_mut().zip(&v.triple) {
            *slot = (0..base.len())
                .find(|&x| base.label(x) == l)
                .ok_or_else(|| InputError::at(&format!("{at}.triple"), format!("unknown atom `{l}`")))?;
        }
        sigma.set(xs[0], xs[1], xs[2], scalar(&v.value, &format!("{at}.value"))?);
    }
    Ok((r, sigma))
}

pub fn cocycle(spec: &CocycleSpec, loc: &str) -> Res<(FiniteGroupoid, TwoCocycle)> {
    let (r, sigma) = cocycle_unchecked(spec, loc)?;
    sigma.validate(&r).map_err(|e| InputError::at(loc, format!("invalid cocycle: {e}")))?;
    Ok((r, sigma))
}
