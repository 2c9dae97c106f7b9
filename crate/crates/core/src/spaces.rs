//! Multibundles over a finite base, fiber products, Lusin partitions and the
//! geometric presimplicial spaces of a groupoid.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::groupoid::{FiniteGroupoid, FiniteMeasuredSpace};

/// A finite carrier with named maps to the atoms of a base space. Carrier
/// points are tuples of indices (groupoid elements, for geometric spaces).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiBundle {
    pub base: FiniteMeasuredSpace,
    pub carrier: Vec<Vec<usize>>,
    pub maps: Vec<(String, Vec<usize>)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BundleError {
    NoMaps,
    PartialMap { map: String },
    UnknownMap(String),
    BaseMismatch,
    NotAMorphism { map: String },
}

impl fmt::Display for BundleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BundleError::NoMaps => write!(f, "multibundle has no bundle maps"),
            BundleError::PartialMap { map } => write!(f, "bundle map {map} is not total"),
            BundleError::UnknownMap(m) => write!(f, "no bundle map named {m}"),
            BundleError::BaseMismatch => write!(f, "multibundles have different bases"),
            BundleError::NotAMorphism { map } => {
                write!(f, "bundle map {map} of the codomain does not pull back to a bundle map of the domain")
            }
        }
    }
}

impl MultiBundle {
    pub fn new(
        base: FiniteMeasuredSpace,
        carrier: Vec<Vec<usize>>,
        maps: Vec<(String, Vec<usize>)>,
    ) -> Result<Self, BundleError> {
        if maps.is_empty() {
            return Err(BundleError::NoMaps);
        }
        for (name, m) in &maps {
            if m.len() != carrier.len() || m.iter().any(|&x| x >= base.len()) {
                return Err(BundleError::PartialMap { map: name.clone() });
            }
        }
        Ok(MultiBundle { base, carrier, maps })
    }

    /// The base itself with the identity map.
    pub fn trivial(base: FiniteMeasuredSpace) -> Self {
        let n = base.len();
        MultiBundle { carrier: (0..n).map(|x| vec![x]).collect(), maps: vec![("id".into(), (0..n).collect())], base }
    }

    /// The groupoid carrier with `s` and `t`.
    pub fn of_groupoid(g: &FiniteGroupoid) -> Self {
        MultiBundle {
            base: g.base().clone(),
            carrier: (0..g.len()).map(|a| vec![a]).collect(),
            maps: vec![("t".into(), g.targets().to_vec()), ("s".into(), g.sources().to_vec())],
        }
    }

    pub fn len(&self) -> usize {
        self.carrier.len()
    }

    pub fn is_empty(&self) -> bool {
        self.carrier.is_empty()
    }

    pub fn map(&self, name: &str) -> Result<&[usize], BundleError> {
        self.maps
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, m)| m.as_slice())
            .ok_or_else(|| BundleError::UnknownMap(name.into()))
    }

    pub fn map_index(&self, name: &str) -> Result<usize, BundleError> {
        self.maps.iter().position(|(n, _)| n == name).ok_or_else(|| BundleError::UnknownMap(name.into()))
    }

    /// Fiber sizes of a bundle map.
    pub fn fiber_sizes(&self, map: &str) -> Result<Vec<usize>, BundleError> {
        let m = self.map(map)?;
        let mut sizes = vec![0; self.base.len()];
        for &x in m {
            sizes[x] += 1;
        }
        Ok(sizes)
    }

    /// Restriction to the points where two maps agree.
    pub fn equalizer(&self, pi: &str, sigma: &str) -> Result<(MultiBundle, Vec<usize>), BundleError> {
        let (p, s) = (self.map(pi)?, self.map(sigma)?);
        let keep: Vec<usize> = (0..self.len()).filter(|&u| p[u] == s[u]).collect();
        let sub = MultiBundle {
            base: self.base.clone(),
            carrier: keep.iter().map(|&u| self.carrier[u].clone()).collect(),
            maps: self.maps.iter().map(|(n, m)| (n.clone(), keep.iter().map(|&u| m[u]).collect())).collect(),
        };
        Ok((sub, keep))
    }
}

/// `U π⋆σ V = {(u, v) : π(u) = σ(v)}`, with carrier tuples concatenated. The
/// maps of `U` keep their names prefixed by `l.`, those of `V` by `r.`; `σ`
/// is dropped since it coincides with `π` on the product.
pub fn fiber_product(u: &MultiBundle, pi: &str, v: &MultiBundle, sigma: &str) -> Result<MultiBundle, BundleError> {
    if u.base != v.base {
        return Err(BundleError::BaseMismatch);
    }
    let (p, s) = (u.map(pi)?, v.map(sigma)?);
    let mut by_value: Vec<Vec<usize>> = vec![Vec::new(); u.base.len()];
    for (j, &x) in s.iter().enumerate() {
        by_value[x].push(j);
    }
    let mut pairs = Vec::new();
    for i in 0..u.len() {
        for &j in &by_value[p[i]] {
            pairs.push((i, j));
        }
    }
    let carrier = pairs
        .iter()
        .map(|&(i, j)| {
            let mut t = u.carrier[i].clone();
            t.extend_from_slice(&v.carrier[j]);
            t
        })
        .collect();
    let mut maps: Vec<(String, Vec<usize>)> =
        u.maps.iter().map(|(n, m)| (format!("l.{n}"), pairs.iter().map(|&(i, _)| m[i]).collect())).collect();
    for (n, m) in &v.maps {
        if n != sigma {
            maps.push((format!("r.{n}"), pairs.iter().map(|&(_, j)| m[j]).collect()));
        }
    }
    Ok(MultiBundle { base: u.base.clone(), carrier, maps })
}

/// Partition the carrier so that `π` is injective on each part. Part `k`
/// holds the `k`-th point (in carrier order) of every fiber, so the number of
/// parts is the largest fiber size.
pub fn lusin_partition(u: &MultiBundle, pi: &str) -> Result<Vec<Vec<usize>>, BundleError> {
    let p = u.map(pi)?;
    let mut seen = vec![0usize; u.base.len()];
    let mut parts: Vec<Vec<usize>> = Vec::new();
    for (i, &x) in p.iter().enumerate() {
        let k = seen[x];
        seen[x] += 1;
        if parts.len() <= k {
            parts.push(Vec::new());
        }
        parts[k].push(i);
    }
    Ok(parts)
}

/// Partition on which every bundle map is injective (greedy, first fit).
pub fn lusin_partition_all(u: &MultiBundle) -> Vec<Vec<usize>> {
    let mut parts: Vec<Vec<usize>> = Vec::new();
    let mut used: Vec<Vec<Vec<bool>>> = Vec::new();
    for i in 0..u.len() {
        let fits = |used: &Vec<Vec<bool>>| u.maps.iter().enumerate().all(|(k, (_, m))| !used[k][m[i]]);
        let k = match used.iter().position(fits) {
            Some(k) => k,
            None => {
                parts.push(Vec::new());
                used.push(vec![vec![false; u.base.len()]; u.maps.len()]);
                parts.len() - 1
            }
        };
        for (j, (_, m)) in u.maps.iter().enumerate() {
            used[k][j][m[i]] = true;
        }
        parts[k].push(i);
    }
    parts
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GeometricKind {
    Nerve,
    Bar,
    Cyclic,
    Acyclic,
    Classifying,
}

impl GeometricKind {
    pub const ALL: [GeometricKind; 5] = [
        GeometricKind::Nerve,
        GeometricKind::Bar,
        GeometricKind::Cyclic,
        GeometricKind::Acyclic,
        GeometricKind::Classifying,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GeometricKind::Nerve => "nerve",
            GeometricKind::Bar => "bar",
            GeometricKind::Cyclic => "cyclic",
            GeometricKind::Acyclic => "acyclic",
            GeometricKind::Classifying => "classifying",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }
}

/// One degree of a geometric space.
#[derive(Clone, Debug)]
pub struct Level {
    pub bundle: MultiBundle,
    pub index: BTreeMap<Vec<usize>, usize>,
    /// `faces[i][k]` is the index in the previous level of face `i` of tuple `k`.
    pub faces: Vec<Vec<usize>>,
}

impl Level {
    pub fn len(&self) -> usize {
        self.bundle.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bundle.is_empty()
    }

    pub fn tuples(&self) -> &[Vec<usize>] {
        &self.bundle.carrier
    }

    pub fn find(&self, t: &[usize]) -> Option<usize> {
        self.index.get(t).copied()
    }
}

/// Degrees `0..=cap` of one of the five presimplicial spaces of a groupoid.
#[derive(Clone, Debug)]
pub struct GeometricSpace {
    pub kind: GeometricKind,
    pub levels: Vec<Level>,
}

/// Composable chains `(α_1, …, α_len)` with `s(α_i) = t(α_{i+1})`.
fn chains(g: &FiniteGroupoid, len: usize) -> Vec<Vec<usize>> {
    let mut cur: Vec<Vec<usize>> = (0..g.len()).map(|a| vec![a]).collect();
    for _ in 1..len {
        let mut next = Vec::new();
        for t in &cur {
            let last = *t.last().expect("nonempty");
            for b in g.with_targets(g.source(last)) {
                let mut t2 = t.clone();
                t2.push(b);
                next.push(t2);
            }
        }
        cur = next;
    }
    cur
}

/// Merge positions `i` and `i+1` of a chain.
fn merge(g: &FiniteGroupoid, t: &[usize], i: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(t.len() - 1);
    out.extend_from_slice(&t[..i]);
    out.push(g.mul(t[i], t[i + 1]));
    out.extend_from_slice(&t[i + 2..]);
    out
}

/// Tuples of one degree of a geometric space.
pub fn geometric_tuples(g: &FiniteGroupoid, kind: GeometricKind, n: usize) -> Vec<Vec<usize>> {
    match kind {
        GeometricKind::Nerve if n == 0 => g.units().iter().map(|&u| vec![u]).collect(),
        GeometricKind::Nerve => chains(g, n),
        GeometricKind::Bar => chains(g, n + 2),
        GeometricKind::Cyclic => cyclic_tuples(g, n + 1),
        GeometricKind::Acyclic => cyclic_tuples(g, n + 2),
        GeometricKind::Classifying => {
            let mut cur: Vec<Vec<usize>> = (0..g.len()).map(|a| vec![a]).collect();
            for _ in 0..n {
                let mut next = Vec::new();
                for t in &cur {
                    for b in g.with_targets(g.target(t[0])) {
                        let mut t2 = t.clone();
                        t2.push(b);
                        next.push(t2);
                    }
                }
                cur = next;
            }
            cur
        }
    }
}

fn cyclic_tuples(g: &FiniteGroupoid, len: usize) -> Vec<Vec<usize>> {
    chains(g, len).into_iter().filter(|t| g.source(t[len - 1]) == g.target(t[0])).collect()
}

/// Face `i` of a tuple at degree `n`.
pub fn geometric_face(g: &FiniteGroupoid, kind: GeometricKind, n: usize, t: &[usize], i: usize) -> Vec<usize> {
    match kind {
        GeometricKind::Nerve => {
            if n == 1 {
                let x = if i == 0 { g.source(t[0]) } else { g.target(t[0]) };
                vec![g.unit(x)]
            } else if i == 0 {
                t[1..].to_vec()
            } else if i == n {
                t[..n - 1].to_vec()
            } else {
                merge(g, t, i - 1)
            }
        }
        GeometricKind::Bar => merge(g, t, i),
        GeometricKind::Cyclic => cyclic_face(g, t, i),
        GeometricKind::Acyclic => cyclic_face(g, t, i + 1),
        GeometricKind::Classifying => {
            let mut out = t.to_vec();
            out.remove(i);
            out
        }
    }
}

/// `h'_{n,i}` on `(α_0, …, α_n)`.
fn cyclic_face(g: &FiniteGroupoid, t: &[usize], i: usize) -> Vec<usize> {
    let n = t.len() - 1;
    if i < n {
        merge(g, t, i)
    } else {
        let mut out = Vec::with_capacity(n);
        out.push(g.mul(t[n], t[0]));
        out.extend_from_slice(&t[1..n]);
        out
    }
}

fn bundle_maps(g: &FiniteGroupoid, kind: GeometricKind, n: usize, tuples: &[Vec<usize>]) -> Vec<(String, Vec<usize>)> {
    let col = |f: &dyn Fn(&[usize]) -> usize| tuples.iter().map(|t| f(t)).collect::<Vec<usize>>();
    match kind {
        GeometricKind::Nerve if n == 0 => vec![("x0".into(), col(&|t| g.source(t[0])))],
        GeometricKind::Nerve | GeometricKind::Bar => {
            let len = tuples.first().map_or(0, |t| t.len());
            let mut maps = vec![("x0".into(), col(&|t| g.target(t[0])))];
            for k in 0..len {
                maps.push((format!("x{}", k + 1), col(&|t| g.source(t[k]))));
            }
            maps
        }
        GeometricKind::Cyclic | GeometricKind::Acyclic => {
            let len = tuples.first().map_or(0, |t| t.len());
            (0..len.max(1)).map(|k| (format!("x{k}"), col(&|t| g.target(t[k])))).collect()
        }
        GeometricKind::Classifying => {
            let mut maps = vec![("t".into(), col(&|t| g.target(t[0])))];
            for k in 0..=n {
                maps.push((format!("s{k}"), col(&|t| g.source(t[k]))));
            }
            maps
        }
    }
}

/// Number of faces out of degree `n`.
pub fn face_count(_kind: GeometricKind, n: usize) -> usize {
    if n == 0 {
        0
    } else {
        n + 1
    }
}

impl GeometricSpace {
    pub fn new(g: &FiniteGroupoid, kind: GeometricKind, cap: usize) -> Self {
        let mut levels: Vec<Level> = Vec::with_capacity(cap + 1);
        for n in 0..=cap {
            let tuples = geometric_tuples(g, kind, n);
            let index: BTreeMap<Vec<usize>, usize> = tuples.iter().cloned().enumerate().map(|(i, t)| (t, i)).collect();
            let faces = if n == 0 {
                Vec::new()
            } else {
                let prev = &levels[n - 1];
                (0..face_count(kind, n))
                    .map(|i| {
                        tuples
                            .iter()
                            .map(|t| {
                                let f = geometric_face(g, kind, n, t, i);
                                prev.find(&f).unwrap_or_else(|| panic!("{} face {i} leaves the space", kind.name()))
                            })
                            .collect()
                    })
                    .collect()
            };
            let maps = bundle_maps(g, kind, n, &tuples);
            let bundle = MultiBundle { base: g.base().clone(), carrier: tuples, maps };
            levels.push(Level { bundle, index, faces });
        }
        GeometricSpace { kind, levels }
    }

    pub fn cap(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn level(&self, n: usize) -> &Level {
        &self.levels[n]
    }

    /// All `π_i π_j = π_{j−1} π_i` for `i < j`, at every degree `≥ 2`.
    /// Returns the first failure as `(degree, i, j, tuple index)`.
    pub fn check_presimplicial(&self) -> Result<(), (usize, usize, usize, usize)> {
        for n in 2..self.levels.len() {
            let (cur, prev) = (&self.levels[n], &self.levels[n - 1]);
            for j in 0..cur.faces.len() {
                for i in 0..j {
                    for k in 0..cur.len() {
                        let a = prev.faces[i][cur.faces[j][k]];
                        let b = prev.faces[j - 1][cur.faces[i][k]];
                        if a != b {
                            return Err((n, i, j, k));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groupoid::FiniteGroup;

    fn pair(n: usize) -> FiniteGroupoid {
        FiniteGroupoid::pair_relation(FiniteMeasuredSpace::uniform(n))
    }

    #[test]
    fn tuple_counts() {
        let p2 = pair(2);
        assert_eq!(geometric_tuples(&p2, GeometricKind::Nerve, 1).len(), 4);
        assert_eq!(geometric_tuples(&p2, GeometricKind::Nerve, 0).len(), 2);
        assert_eq!(geometric_tuples(&p2, GeometricKind::Classifying, 1).len(), 8);
        let c2 = FiniteGroupoid::from_group(&FiniteGroup::cyclic(2));
        assert_eq!(geometric_tuples(&c2, GeometricKind::Cyclic, 0).len(), 2);
        let cl = GeometricSpace::new(&c2, GeometricKind::Classifying, 2);
        let dims: Vec<usize> = cl.levels.iter().map(Level::len).collect();
        assert_eq!(dims, vec![2, 4, 8]);
    }

    #[test]
    fn presimplicial_identities_hold() {
        let gs = [
            pair(2),
            pair(3),
            FiniteGroupoid::from_group(&FiniteGroup::symmetric(3)),
            FiniteGroupoid::trivial(FiniteMeasuredSpace::uniform(2)),
        ];
        for g in &gs {
            for kind in GeometricKind::ALL {
                let sp = GeometricSpace::new(g, kind, 4);
                assert_eq!(sp.check_presimplicial(), Ok(()), "{}", kind.name());
            }
        }
    }

    #[test]
    fn fiber_product_examples() {
        let p2 = pair(2);
        let u = MultiBundle::of_groupoid(&p2);
        let fp = fiber_product(&u, "s", &u, "t").unwrap();
        let nerve2 = geometric_tuples(&p2, GeometricKind::Nerve, 2);
        assert_eq!(fp.carrier, nerve2);
        let triv = MultiBundle::trivial(p2.base().clone());
        assert_eq!(fiber_product(&u, "s", &triv, "id").unwrap().len(), u.len());
        let u3 = MultiBundle::of_groupoid(&pair(3));
        assert_eq!(fiber_product(&u3, "s", &u3, "t").unwrap().len(), 27);
        assert!(fp.maps.len() < u.maps.len() * 2);
    }

    #[test]
    fn lusin_examples() {
        let p3 = MultiBundle::of_groupoid(&pair(3));
        let parts = lusin_partition(&p3, "s").unwrap();
        assert_eq!(parts.len(), 3);
        let triv = MultiBundle::trivial(FiniteMeasuredSpace::uniform(3));
        assert_eq!(lusin_partition(&triv, "id").unwrap().len(), 1);
        let empty =
            MultiBundle { base: FiniteMeasuredSpace::uniform(1), carrier: vec![], maps: vec![("id".into(), vec![])] };
        assert!(lusin_partition(&empty, "id").unwrap().is_empty());
        let all = lusin_partition_all(&p3);
        for part in &all {
            for (_, m) in &p3.maps {
                let mut v: Vec<usize> = part.iter().map(|&i| m[i]).collect();
                v.sort();
                v.dedup();
                assert_eq!(v.len(), part.len());
            }
        }
    }
}
