//! Finite measured spaces and finite groupoids over them.
//!
//! Arrows go right to left: `α·β` is defined when `s(α) = t(β)`, and then
//! `s(αβ) = s(β)`, `t(αβ) = t(α)`.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::scalar::Rational;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteMeasuredSpace {
    labels: Vec<String>,
    weights: Vec<Rational>,
}

impl FiniteMeasuredSpace {
    pub fn new(labels: Vec<String>, weights: Vec<Rational>) -> Result<Self, GroupoidError> {
        if labels.len() != weights.len() {
            return Err(GroupoidError::Inconsistent(format!(
                "{} atom labels but {} weights",
                labels.len(),
                weights.len()
            )));
        }
        Ok(FiniteMeasuredSpace { labels, weights })
    }

    /// `n` atoms labelled `0..n` with weight `1/n` each.
    pub fn uniform(n: usize) -> Self {
        let w = Rational::new(1, n.max(1) as i64);
        FiniteMeasuredSpace { labels: (0..n).map(|i| i.to_string()).collect(), weights: vec![w; n] }
    }

    pub fn point() -> Self {
        Self::uniform(1)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, x: usize) -> &str {
        &self.labels[x]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn weight(&self, x: usize) -> &Rational {
        &self.weights[x]
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn total_mass(&self) -> Rational {
        self.weights.iter().fold(Rational::ZERO, |a, w| &a + w)
    }

    /// Violations of positivity and normalization.
    pub fn check_probability(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for (x, w) in self.weights.iter().enumerate() {
            if w.is_negative() || w.is_zero() {
                out.push(Violation::NonPositiveWeight { atom: x });
            }
        }
        let total = self.total_mass();
        if !total.is_one() {
            out.push(Violation::NotProbability { total });
        }
        out
    }
}

/// One violated groupoid axiom, with the elements that witness it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    NonPositiveWeight {
        atom: usize,
    },
    NotProbability {
        total: Rational,
    },
    OutOfRange {
        what: &'static str,
        index: usize,
    },
    InverseSource {
        elem: usize,
    },
    InverseTarget {
        elem: usize,
    },
    InverseInvolution {
        elem: usize,
    },
    /// Composition is defined on a non-composable pair, or missing on a
    /// composable one.
    CompositionDomain {
        left: usize,
        right: usize,
    },
    CompositionEndpoints {
        left: usize,
        right: usize,
    },
    Associativity {
        a: usize,
        b: usize,
        c: usize,
    },
    UnitEndpoints {
        atom: usize,
    },
    UnitLaw {
        elem: usize,
    },
    InverseLaw {
        elem: usize,
    },
    /// The canonical carrier measure is not preserved by the target map at
    /// this atom (the base measure is not invariant).
    TargetMeasure {
        atom: usize,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NonPositiveWeight { atom } => write!(f, "atom {atom} has nonpositive weight"),
            Violation::NotProbability { total } => write!(f, "weights sum to {total}, not 1"),
            Violation::OutOfRange { what, index } => write!(f, "{what} index {index} out of range"),
            Violation::InverseSource { elem } => write!(f, "s(inv({elem})) != t({elem})"),
            Violation::InverseTarget { elem } => write!(f, "t(inv({elem})) != s({elem})"),
            Violation::InverseInvolution { elem } => write!(f, "inv(inv({elem})) != {elem}"),
            Violation::CompositionDomain { left, right } => {
                write!(f, "composition of ({left}, {right}) defined iff composable fails")
            }
            Violation::CompositionEndpoints { left, right } => {
                write!(f, "composite of ({left}, {right}) has wrong source or target")
            }
            Violation::Associativity { a, b, c } => write!(f, "({a}{b}){c} != {a}({b}{c})"),
            Violation::UnitEndpoints { atom } => write!(f, "unit at atom {atom} is not a loop at {atom}"),
            Violation::UnitLaw { elem } => write!(f, "unit law fails at element {elem}"),
            Violation::InverseLaw { elem } => write!(f, "{elem} * inv({elem}) is not a unit"),
            Violation::TargetMeasure { atom } => {
                write!(f, "target map does not preserve the carrier measure over atom {atom}")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GroupoidError {
    Inconsistent(String),
    Invalid(Vec<Violation>),
}

impl fmt::Display for GroupoidError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupoidError::Inconsistent(m) => write!(f, "inconsistent groupoid description: {m}"),
            GroupoidError::Invalid(vs) => {
                write!(f, "invalid groupoid:")?;
                for v in vs {
                    write!(f, " [{v}]")?;
                }
                Ok(())
            }
        }
    }
}

/// A finite group by its multiplication table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteGroup {
    labels: Vec<String>,
    table: Vec<Vec<usize>>,
    identity: usize,
    inverse: Vec<usize>,
}

impl FiniteGroup {
    pub fn from_table(labels: Vec<String>, table: Vec<Vec<usize>>) -> Result<Self, GroupoidError> {
        let n = table.len();
        let bad = |m: &str| Err(GroupoidError::Inconsistent(m.to_string()));
        if labels.len() != n || n == 0 {
            return bad("group table and labels disagree or are empty");
        }
        if table.iter().any(|r| r.len() != n || r.iter().any(|&x| x >= n)) {
            return bad("group table is not square over its elements");
        }
        let Some(e) = (0..n).find(|&e| (0..n).all(|g| table[e][g] == g && table[g][e] == g)) else {
            return bad("group table has no identity");
        };
        let mut inverse = vec![0; n];
        for g in 0..n {
            match (0..n).find(|&h| table[g][h] == e && table[h][g] == e) {
                Some(h) => inverse[g] = h,
                None => return bad("group element without inverse"),
            }
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if table[table[a][b]][c] != table[a][table[b][c]] {
                        return Err(GroupoidError::Inconsistent(format!(
                            "group table not associative at ({a},{b},{c})"
                        )));
                    }
                }
            }
        }
        Ok(FiniteGroup { labels, table, identity: e, inverse })
    }

    /// `ℤ/n`, element `k` labelled `g^k`.
    pub fn cyclic(n: usize) -> Self {
        let labels = (0..n).map(|k| if k == 0 { "e".to_string() } else { format!("g{k}") }).collect();
        let table = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
        Self::from_table(labels, table).expect("cyclic group")
    }

    /// Symmetric group on `n` letters; permutations in lexicographic order
    /// (so the identity comes first), product `(στ)(i) = σ(τ(i))`.
    pub fn symmetric(n: usize) -> Self {
        let perms = permutations(n);
        let index: BTreeMap<Vec<usize>, usize> = perms.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect();
        let table = perms
            .iter()
            .map(|s| {
                perms
                    .iter()
                    .map(|t| {
                        let st: Vec<usize> = (0..n).map(|i| s[t[i]]).collect();
                        index[&st]
                    })
                    .collect()
            })
            .collect();
        let labels = perms
            .iter()
            .map(|p| {
                let mut s = String::from("[");
                for (k, x) in p.iter().enumerate() {
                    if k > 0 {
                        s.push(' ');
                    }
                    s.push_str(&x.to_string());
                }
                s.push(']');
                s
            })
            .collect();
        Self::from_table(labels, table).expect("symmetric group")
    }

    pub fn order(&self) -> usize {
        self.table.len()
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a][b]
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn inverse(&self, g: usize) -> usize {
        self.inverse[g]
    }

    pub fn label(&self, g: usize) -> &str {
        &self.labels[g]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn table(&self) -> &[Vec<usize>] {
        &self.table
    }

    /// Conjugacy classes, each sorted, ordered by least element.
    pub fn conjugacy_classes(&self) -> Vec<Vec<usize>> {
        let n = self.order();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for x in 0..n {
            if seen[x] {
                continue;
            }
            let class: BTreeSet<usize> = (0..n).map(|g| self.mul(self.mul(g, x), self.inverse(g))).collect();
            for &c in &class {
                seen[c] = true;
            }
            out.push(class.into_iter().collect());
        }
        out
    }
}

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        let n = used.len();
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        for i in 0..n {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                go(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// A finite groupoid over a finite measured space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteGroupoid {
    base: FiniteMeasuredSpace,
    labels: Vec<String>,
    source: Vec<usize>,
    target: Vec<usize>,
    inverse: Vec<usize>,
    /// Row-major `n × n`; entry `(a, b)` is `a·b` when defined.
    table: Vec<Option<usize>>,
    units: Vec<usize>,
}

/// Raw ingredients of a groupoid, before validation.
#[derive(Clone, Debug)]
pub struct GroupoidParts {
    pub base: FiniteMeasuredSpace,
    pub labels: Vec<String>,
    pub source: Vec<usize>,
    pub target: Vec<usize>,
    pub inverse: Vec<usize>,
    /// Triples `(a, b, ab)`.
    pub compose: Vec<(usize, usize, usize)>,
    pub units: Vec<usize>,
}

impl FiniteGroupoid {
    /// Assemble without checking the axioms. Index ranges are checked, since
    /// nothing else can be inspected safely otherwise.
    pub fn from_parts_unchecked(p: GroupoidParts) -> Result<Self, GroupoidError> {
        let n = p.labels.len();
        let m = p.base.len();
        let range = |what: &'static str, idx: &[usize], bound: usize| -> Result<(), GroupoidError> {
            match idx.iter().find(|&&i| i >= bound) {
                Some(&index) => Err(GroupoidError::Invalid(vec![Violation::OutOfRange { what, index }])),
                None => Ok(()),
            }
        };
        if p.source.len() != n || p.target.len() != n || p.inverse.len() != n || p.units.len() != m {
            return Err(GroupoidError::Inconsistent("table lengths disagree with element/atom counts".into()));
        }
        range("source", &p.source, m)?;
        range("target", &p.target, m)?;
        range("inverse", &p.inverse, n)?;
        range("unit", &p.units, n)?;
        let mut table = vec![None; n * n];
        for &(a, b, c) in &p.compose {
            range("composition", &[a, b, c], n)?;
            if table[a * n + b].replace(c).is_some_and(|old| old != c) {
                return Err(GroupoidError::Inconsistent(format!("composition ({a},{b}) given twice")));
            }
        }
        Ok(FiniteGroupoid {
            base: p.base,
            labels: p.labels,
            source: p.source,
            target: p.target,
            inverse: p.inverse,
            table,
            units: p.units,
        })
    }

    /// Assemble and validate.
    pub fn from_parts(p: GroupoidParts) -> Result<Self, GroupoidError> {
        let g = Self::from_parts_unchecked(p)?;
        let v = g.validate();
        if v.is_empty() {
            Ok(g)
        } else {
            Err(GroupoidError::Invalid(v))
        }
    }

    pub fn to_parts(&self) -> GroupoidParts {
        let n = self.len();
        let mut compose = Vec::new();
        for a in 0..n {
            for b in 0..n {
                if let Some(c) = self.table[a * n + b] {
                    compose.push((a, b, c));
                }
            }
        }
        GroupoidParts {
            base: self.base.clone(),
            labels: self.labels.clone(),
            source: self.source.clone(),
            target: self.target.clone(),
            inverse: self.inverse.clone(),
            compose,
            units: self.units.clone(),
        }
    }

    /// Every axiom, exhaustively. Empty means valid.
    pub fn validate(&self) -> Vec<Violation> {
        let n = self.len();
        let mut out = self.base.check_probability();
        for a in 0..n {
            let ai = self.inverse[a];
            if self.source[ai] != self.target[a] {
                out.push(Violation::InverseSource { elem: a });
            }
            if self.target[ai] != self.source[a] {
                out.push(Violation::InverseTarget { elem: a });
            }
            if self.inverse[ai] != a {
                out.push(Violation::InverseInvolution { elem: a });
            }
        }
        for a in 0..n {
            for b in 0..n {
                let composable = self.source[a] == self.target[b];
                match self.table[a * n + b] {
                    Some(c) if composable => {
                        if self.source[c] != self.source[b] || self.target[c] != self.target[a] {
                            out.push(Violation::CompositionEndpoints { left: a, right: b });
                        }
                    }
                    None if !composable => {}
                    _ => out.push(Violation::CompositionDomain { left: a, right: b }),
                }
            }
        }
        if out.iter().any(|v| matches!(v, Violation::CompositionDomain { .. })) {
            // the remaining checks assume composition is defined where expected
            return out;
        }
        for a in 0..n {
            for b in 0..n {
                let Some(ab) = self.table[a * n + b] else { continue };
                for c in 0..n {
                    let Some(bc) = self.table[b * n + c] else { continue };
                    let left = self.table[ab * n + c];
                    let right = self.table[a * n + bc];
                    if left != right || left.is_none() {
                        out.push(Violation::Associativity { a, b, c });
                    }
                }
            }
        }
        for (x, &u) in self.units.iter().enumerate() {
            if self.source[u] != x || self.target[u] != x {
                out.push(Violation::UnitEndpoints { atom: x });
            }
        }
        if out.iter().any(|v| matches!(v, Violation::UnitEndpoints { .. })) {
            return out;
        }
        for a in 0..n {
            let right = self.table[a * n + self.units[self.source[a]]];
            let left = self.table[self.units[self.target[a]] * n + a];
            if right != Some(a) || left != Some(a) {
                out.push(Violation::UnitLaw { elem: a });
            }
            if self.table[a * n + self.inverse[a]] != Some(self.units[self.target[a]]) {
                out.push(Violation::InverseLaw { elem: a });
            }
        }
        for x in 0..self.base.len() {
            let mass = (0..n)
                .filter(|&a| self.target[a] == x)
                .fold(Rational::ZERO, |acc, a| &acc + self.base.weight(self.source[a]));
            let count = (0..n).filter(|&a| self.target[a] == x).count() as i64;
            if mass != &Rational::from_int(count) * self.base.weight(x) {
                out.push(Violation::TargetMeasure { atom: x });
            }
        }
        out
    }

    pub fn base(&self) -> &FiniteMeasuredSpace {
        &self.base
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, a: usize) -> &str {
        &self.labels[a]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn source(&self, a: usize) -> usize {
        self.source[a]
    }

    pub fn target(&self, a: usize) -> usize {
        self.target[a]
    }

    pub fn sources(&self) -> &[usize] {
        &self.source
    }

    pub fn targets(&self) -> &[usize] {
        &self.target
    }

    pub fn inverse(&self, a: usize) -> usize {
        self.inverse[a]
    }

    pub fn unit(&self, x: usize) -> usize {
        self.units[x]
    }

    pub fn units(&self) -> &[usize] {
        &self.units
    }

    pub fn is_unit(&self, a: usize) -> bool {
        self.units[self.source[a]] == a
    }

    pub fn compose(&self, a: usize, b: usize) -> Option<usize> {
        self.table[a * self.len() + b]
    }

    /// `a·b`, panicking if not composable.
    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.compose(a, b).unwrap_or_else(|| panic!("elements {a} and {b} are not composable"))
    }

    /// Canonical carrier measure: `α` weighs `μ(s(α))`.
    pub fn element_weight(&self, a: usize) -> &Rational {
        self.base.weight(self.source[a])
    }

    /// No nontrivial isotropy.
    pub fn is_equivalence_relation(&self) -> bool {
        (0..self.len()).all(|a| self.source[a] != self.target[a] || self.is_unit(a))
    }

    pub fn with_targets(&self, x: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(move |&a| self.target[a] == x)
    }

    pub fn with_sources(&self, x: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(move |&a| self.source[a] == x)
    }

    /// Element with the given endpoints in an equivalence relation.
    pub fn arrow(&self, target: usize, source: usize) -> Option<usize> {
        (0..self.len()).find(|&a| self.target[a] == target && self.source[a] == source)
    }

    /// The trivial groupoid `1_X`.
    pub fn trivial(base: FiniteMeasuredSpace) -> Self {
        let n = base.len();
        let labels = base.labels().to_vec();
        let ids: Vec<usize> = (0..n).collect();
        let compose = (0..n).map(|x| (x, x, x)).collect();
        Self::from_parts(GroupoidParts {
            base,
            labels,
            source: ids.clone(),
            target: ids.clone(),
            inverse: ids.clone(),
            compose,
            units: ids,
        })
        .expect("trivial groupoid")
    }

    /// A group over a one-point space.
    pub fn from_group(g: &FiniteGroup) -> Self {
        let n = g.order();
        let mut compose = Vec::with_capacity(n * n);
        for a in 0..n {
            for b in 0..n {
                compose.push((a, b, g.mul(a, b)));
            }
        }
        Self::from_parts(GroupoidParts {
            base: FiniteMeasuredSpace::point(),
            labels: g.labels().to_vec(),
            source: vec![0; n],
            target: vec![0; n],
            inverse: (0..n).map(|a| g.inverse(a)).collect(),
            compose,
            units: vec![g.identity()],
        })
        .expect("group groupoid")
    }

    /// The full relation `X × X`; the pair `(x, y)` has target `x` and
    /// source `y`, and sits at index `x·|X| + y`.
    pub fn pair_relation(base: FiniteMeasuredSpace) -> Self {
        let m = base.len();
        Self::relation(base, |_, _| true).unwrap_or_else(|_| panic!("pair relation on {m} atoms"))
    }

    /// Equivalence relation with the given blocks.
    pub fn partition_relation(base: FiniteMeasuredSpace, blocks: &[Vec<usize>]) -> Result<Self, GroupoidError> {
        let m = base.len();
        let mut block_of = vec![usize::MAX; m];
        for (k, b) in blocks.iter().enumerate() {
            for &x in b {
                if x >= m || block_of[x] != usize::MAX {
                    return Err(GroupoidError::Inconsistent(format!("blocks do not partition the atoms (atom {x})")));
                }
                block_of[x] = k;
            }
        }
        if block_of.contains(&usize::MAX) {
            return Err(GroupoidError::Inconsistent("blocks do not cover the atoms".into()));
        }
        Self::relation(base, |x, y| block_of[x] == block_of[y])
    }

    fn relation(base: FiniteMeasuredSpace, related: impl Fn(usize, usize) -> bool) -> Result<Self, GroupoidError> {
        let m = base.len();
        let mut index = BTreeMap::new();
        let mut pairs = Vec::new();
        for x in 0..m {
            for y in 0..m {
                if related(x, y) {
                    index.insert((x, y), pairs.len());
                    pairs.push((x, y));
                }
            }
        }
        let mut compose = Vec::new();
        for (a, &(x, y)) in pairs.iter().enumerate() {
            for (b, &(y2, z)) in pairs.iter().enumerate() {
                if y == y2 {
                    compose.push((a, b, index[&(x, z)]));
                }
            }
        }
        let labels = pairs.iter().map(|&(x, y)| format!("({},{})", base.label(x), base.label(y))).collect();
        Self::from_parts(GroupoidParts {
            labels,
            source: pairs.iter().map(|p| p.1).collect(),
            target: pairs.iter().map(|p| p.0).collect(),
            inverse: pairs.iter().map(|&(x, y)| index[&(y, x)]).collect(),
            compose,
            units: (0..m).map(|x| index[&(x, x)]).collect(),
            base,
        })
    }

    /// Transformation groupoid of a left action; `action[g][x] = g·x`.
    /// Element `(g, x)` has source `x`, target `g·x`, and sits at index
    /// `g·|X| + x`.
    pub fn action_groupoid(
        group: &FiniteGroup,
        base: FiniteMeasuredSpace,
        action: &[Vec<usize>],
    ) -> Result<Self, GroupoidError> {
        let m = base.len();
        let n = group.order();
        if action.len() != n || action.iter().any(|p| p.len() != m || p.iter().any(|&y| y >= m)) {
            return Err(GroupoidError::Inconsistent("action table has wrong shape".into()));
        }
        for x in 0..m {
            if action[group.identity()][x] != x {
                return Err(GroupoidError::Inconsistent(format!("identity moves atom {x}")));
            }
            for g in 0..n {
                for h in 0..n {
                    if action[group.mul(g, h)][x] != action[g][action[h][x]] {
                        return Err(GroupoidError::Inconsistent(format!("not an action at g={g}, h={h}, x={x}")));
                    }
                }
            }
        }
        let idx = |g: usize, x: usize| g * m + x;
        let mut compose = Vec::new();
        for h in 0..n {
            for y in 0..m {
                for g in 0..n {
                    for x in 0..m {
                        if action[g][x] == y {
                            compose.push((idx(h, y), idx(g, x), idx(group.mul(h, g), x)));
                        }
                    }
                }
            }
        }
        let mut labels = Vec::with_capacity(n * m);
        let mut source = Vec::with_capacity(n * m);
        let mut target = Vec::with_capacity(n * m);
        let mut inverse = Vec::with_capacity(n * m);
        for g in 0..n {
            for x in 0..m {
                labels.push(format!("({},{})", group.label(g), base.label(x)));
                source.push(x);
                target.push(action[g][x]);
                inverse.push(idx(group.inverse(g), action[g][x]));
            }
        }
        Self::from_parts(GroupoidParts {
            labels,
            source,
            target,
            inverse,
            compose,
            units: (0..m).map(|x| idx(group.identity(), x)).collect(),
            base,
        })
    }

    /// All bisections, each given as `b[x]` = the element with target `x`.
    /// Enumerated depth-first in element order, so the result is
    /// deterministic.
    pub fn bisections(&self) -> Vec<Vec<usize>> {
        let m = self.base.len();
        let by_target: Vec<Vec<usize>> = (0..m).map(|x| self.with_targets(x).collect()).collect();
        let mut out = Vec::new();
        let mut cur = Vec::with_capacity(m);
        let mut used = vec![false; m];
        fn go(
            g: &FiniteGroupoid,
            by_target: &[Vec<usize>],
            cur: &mut Vec<usize>,
            used: &mut Vec<bool>,
            out: &mut Vec<Vec<usize>>,
        ) {
            let x = cur.len();
            if x == by_target.len() {
                out.push(cur.clone());
                return;
            }
            for &a in &by_target[x] {
                let s = g.source(a);
                if !used[s] {
                    used[s] = true;
                    cur.push(a);
                    go(g, by_target, cur, used, out);
                    cur.pop();
                    used[s] = false;
                }
            }
        }
        go(self, &by_target, &mut cur, &mut used, &mut out);
        out
    }

    pub fn is_bisection(&self, subset: &[usize]) -> bool {
        let m = self.base.len();
        if subset.len() != m || subset.iter().any(|&a| a >= self.len()) {
            return false;
        }
        let s: BTreeSet<usize> = subset.iter().map(|&a| self.source[a]).collect();
        let t: BTreeSet<usize> = subset.iter().map(|&a| self.target[a]).collect();
        s.len() == m && t.len() == m
    }

    /// Orbit equivalence relation (image of `(t, s)`) and isotropy groupoid
    /// (kernel), with the factorization of every element checked.
    pub fn orbit_and_isotropy(&self) -> OrbitIsotropy {
        let m = self.base.len();
        let mut related = vec![false; m * m];
        for a in 0..self.len() {
            related[self.target[a] * m + self.source[a]] = true;
        }
        let orbit = Self::relation(self.base.clone(), |x, y| related[x * m + y]).expect("orbit relation");
        let iso_elems: Vec<usize> = (0..self.len()).filter(|&a| self.source[a] == self.target[a]).collect();
        let isotropy = self.restrict(&iso_elems).expect("isotropy subgroupoid");
        // section: first element over each orbit pair
        let mut section = BTreeMap::new();
        for a in 0..self.len() {
            section.entry((self.target[a], self.source[a])).or_insert(a);
        }
        let factorization_holds = (0..self.len()).all(|a| {
            let sigma = section[&(self.target[a], self.source[a])];
            let k = self.mul(self.inverse[sigma], a);
            self.source[k] == self.target[k] && self.mul(sigma, k) == a
        });
        OrbitIsotropy { orbit, isotropy, isotropy_elements: iso_elems, factorization_holds }
    }

    /// Subgroupoid on a subset of elements that contains all units and is
    /// closed under composition and inverses.
    pub fn restrict(&self, elems: &[usize]) -> Result<Self, GroupoidError> {
        let pos: BTreeMap<usize, usize> = elems.iter().enumerate().map(|(i, &a)| (a, i)).collect();
        let find = |a: usize| {
            pos.get(&a).copied().ok_or_else(|| GroupoidError::Inconsistent(format!("subset not closed at element {a}")))
        };
        let mut compose = Vec::new();
        for &a in elems {
            for &b in elems {
                if let Some(c) = self.compose(a, b) {
                    compose.push((find(a)?, find(b)?, find(c)?));
                }
            }
        }
        Self::from_parts(GroupoidParts {
            base: self.base.clone(),
            labels: elems.iter().map(|&a| self.labels[a].clone()).collect(),
            source: elems.iter().map(|&a| self.source[a]).collect(),
            target: elems.iter().map(|&a| self.target[a]).collect(),
            inverse: elems.iter().map(|&a| find(self.inverse[a])).collect::<Result<_, _>>()?,
            compose,
            units: self.units.iter().map(|&u| find(u)).collect::<Result<_, _>>()?,
        })
    }

    /// The enveloping groupoid.
    ///
    /// Its elements are pairs `(α, β)` with `s(α) = t(β)` and `t(α) = s(β)`,
    /// multiplied by `(α, β)(α', β') = (α'α, ββ')`. For that product to be
    /// defined exactly on composable pairs the endpoints must be
    /// `s(α, β) = t(α)` and `t(α, β) = s(α)`; the diagonal `α ↦ (α⁻¹, α)`
    /// is then a morphism.
    pub fn enveloping(&self) -> Enveloping {
        let n = self.len();
        let mut pairs = Vec::new();
        for a in 0..n {
            for b in 0..n {
                if self.source[a] == self.target[b] && self.target[a] == self.source[b] {
                    pairs.push((a, b));
                }
            }
        }
        let index: BTreeMap<(usize, usize), usize> = pairs.iter().enumerate().map(|(i, &p)| (p, i)).collect();
        let mut compose = Vec::new();
        for (i, &(a, b)) in pairs.iter().enumerate() {
            for (j, &(a2, b2)) in pairs.iter().enumerate() {
                if let (Some(aa), Some(bb)) = (self.compose(a2, a), self.compose(b, b2)) {
                    compose.push((i, j, index[&(aa, bb)]));
                }
            }
        }
        let groupoid = Self::from_parts(GroupoidParts {
            base: self.base.clone(),
            labels: pairs.iter().map(|&(a, b)| format!("({};{})", self.labels[a], self.labels[b])).collect(),
            source: pairs.iter().map(|&(a, _)| self.target[a]).collect(),
            target: pairs.iter().map(|&(a, _)| self.source[a]).collect(),
            inverse: pairs.iter().map(|&(a, b)| index[&(self.inverse[a], self.inverse[b])]).collect(),
            compose,
            units: self.units.iter().map(|&u| index[&(u, u)]).collect(),
        })
        .expect("enveloping groupoid");
        let diagonal = (0..n).map(|a| index[&(self.inverse[a], a)]).collect();
        Enveloping { groupoid, pairs, index, diagonal }
    }
}

#[derive(Clone, Debug)]
pub struct OrbitIsotropy {
    pub orbit: FiniteGroupoid,
    pub isotropy: FiniteGroupoid,
    /// Indices, in the original groupoid, of the isotropy elements.
    pub isotropy_elements: Vec<usize>,
    /// Every element is (section of its orbit pair) · (isotropy element).
    pub factorization_holds: bool,
}

#[derive(Clone, Debug)]
pub struct Enveloping {
    pub groupoid: FiniteGroupoid,
    pub pairs: Vec<(usize, usize)>,
    pub index: BTreeMap<(usize, usize), usize>,
    /// `diagonal[α]` is the index of `(α⁻¹, α)`.
    pub diagonal: Vec<usize>,
}

impl Enveloping {
    pub fn pair(&self, i: usize) -> (usize, usize) {
        self.pairs[i]
    }

    pub fn find(&self, a: usize, b: usize) -> Option<usize> {
        self.index.get(&(a, b)).copied()
    }

    /// The diagonal embedding preserves source, target, inverse and products.
    pub fn diagonal_is_morphism(&self, g: &FiniteGroupoid) -> bool {
        let e = &self.groupoid;
        let d = &self.diagonal;
        (0..g.len()).all(|a| {
            e.source(d[a]) == g.source(a)
                && e.target(d[a]) == g.target(a)
                && e.inverse(d[a]) == d[g.inverse(a)]
                && (0..g.len()).all(|b| match g.compose(a, b) {
                    Some(c) => e.compose(d[a], d[b]) == Some(d[c]),
                    None => true,
                })
        })
    }

    pub fn diagonal_is_bijective(&self) -> bool {
        let set: BTreeSet<usize> = self.diagonal.iter().copied().collect();
        set.len() == self.diagonal.len() && set.len() == self.groupoid.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(n: usize) -> FiniteGroupoid {
        FiniteGroupoid::pair_relation(FiniteMeasuredSpace::uniform(n))
    }

    #[test]
    fn builders_have_expected_sizes() {
        let t = FiniteGroupoid::trivial(FiniteMeasuredSpace::uniform(3));
        assert_eq!(t.len(), 3);
        assert!(t.validate().is_empty());
        let c2 = FiniteGroupoid::from_group(&FiniteGroup::cyclic(2));
        assert_eq!(c2.len(), 2);
        let p = pair(2);
        assert_eq!(p.len(), 4);
        assert_eq!(p.units(), &[0, 3]);
        let singletons =
            FiniteGroupoid::partition_relation(FiniteMeasuredSpace::uniform(3), &[vec![0], vec![1], vec![2]]).unwrap();
        assert_eq!(singletons.len(), 3);
        assert!(singletons.is_equivalence_relation());
        assert!((0..3).all(|a| singletons.is_unit(a)));
    }

    #[test]
    fn swap_action_orbit_is_pair_relation() {
        let g = FiniteGroupoid::action_groupoid(
            &FiniteGroup::cyclic(2),
            FiniteMeasuredSpace::uniform(2),
            &[vec![0, 1], vec![1, 0]],
        )
        .unwrap();
        assert_eq!(g.len(), 4);
        let oi = g.orbit_and_isotropy();
        assert_eq!(oi.orbit.len(), 4);
        assert_eq!(oi.isotropy.len(), 2);
        assert!(oi.factorization_holds);
    }

    #[test]
    fn group_on_point_has_full_isotropy() {
        let g =
            FiniteGroupoid::action_groupoid(&FiniteGroup::cyclic(2), FiniteMeasuredSpace::point(), &[vec![0], vec![0]])
                .unwrap();
        let oi = g.orbit_and_isotropy();
        assert_eq!(oi.isotropy.len(), 2);
        assert_eq!(oi.orbit.len(), 1);
    }

    #[test]
    fn corrupted_composition_reports_witness() {
        let mut parts = pair(2).to_parts();
        // (0,1)(1,0) = (0,0); redirect it to (0,1)'s wrong partner
        let k = parts.compose.iter().position(|&(a, b, _)| a == 1 && b == 2).unwrap();
        parts.compose[k].2 = 1;
        let err = FiniteGroupoid::from_parts(parts).unwrap_err();
        let GroupoidError::Invalid(vs) = err else { panic!() };
        assert!(vs.iter().any(|v| matches!(v, Violation::Associativity { .. })));
    }

    #[test]
    fn enveloping_examples() {
        let p = pair(3);
        let e = p.enveloping();
        assert_eq!(e.groupoid.len(), 9);
        assert!(e.diagonal_is_morphism(&p));
        assert!(e.diagonal_is_bijective());
        let s3 = FiniteGroupoid::from_group(&FiniteGroup::symmetric(3));
        let e = s3.enveloping();
        assert_eq!(e.groupoid.len(), 36);
        assert!(e.diagonal_is_morphism(&s3));
        let t = FiniteGroupoid::trivial(FiniteMeasuredSpace::uniform(2));
        assert_eq!(t.enveloping().groupoid.len(), 2);
    }

    #[test]
    fn bisection_counts() {
        assert_eq!(FiniteGroupoid::from_group(&FiniteGroup::symmetric(3)).bisections().len(), 6);
        assert_eq!(pair(3).bisections().len(), 6);
        assert_eq!(FiniteGroupoid::trivial(FiniteMeasuredSpace::uniform(4)).bisections().len(), 1);
        let p = pair(3);
        assert!(p.bisections().iter().all(|b| p.is_bisection(b)));
    }

    #[test]
    fn symmetric_group_conjugacy() {
        assert_eq!(FiniteGroup::symmetric(3).conjugacy_classes().len(), 3);
        assert_eq!(FiniteGroup::cyclic(4).conjugacy_classes().len(), 4);
    }

    #[test]
    fn nonuniform_pair_relation_breaks_target_measure() {
        let base =
            FiniteMeasuredSpace::new(vec!["a".into(), "b".into()], vec![Rational::new(1, 3), Rational::new(2, 3)])
                .unwrap();
        let g = FiniteGroupoid::from_parts_unchecked(pair(2).to_parts()).unwrap();
        let mut parts = g.to_parts();
        parts.base = base;
        let g = FiniteGroupoid::from_parts_unchecked(parts).unwrap();
        assert!(g.validate().iter().any(|v| matches!(v, Violation::TargetMeasure { .. })));
    }
}
