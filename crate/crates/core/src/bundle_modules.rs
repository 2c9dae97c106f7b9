//! Function modules `ℂ[U]` of multibundles: base actions, base-valued inner
//! products, pushforwards, the star product isomorphism and the
//! invariants/coinvariants comparison.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::{Echelon, SparseMatrix, SparseVec};
use crate::scalar::GScalar;
use crate::spaces::{fiber_product, BundleError, MultiBundle};

/// `ℂ[U]`: the free space on the carrier of a multibundle.
#[derive(Clone, Debug)]
pub struct CModule {
    pub bundle: MultiBundle,
}

pub fn c_module(u: &MultiBundle) -> CModule {
    CModule { bundle: u.clone() }
}

impl CModule {
    pub fn dim(&self) -> usize {
        self.bundle.len()
    }

    /// Diagonal of the action of a base function `a` through map `π`.
    pub fn action(&self, map: &str, a: &[GScalar]) -> Result<Vec<GScalar>, BundleError> {
        let p = self.bundle.map(map)?;
        Ok(p.iter().map(|&x| a[x].clone()).collect())
    }

    /// `(f*g)(x) = Σ_{π(u)=x} conj(f(u)) g(u)`.
    pub fn inner(&self, map: &str, f: &[GScalar], g: &[GScalar]) -> Result<Vec<GScalar>, BundleError> {
        let p = self.bundle.map(map)?;
        let mut out = vec![GScalar::zero(); self.bundle.base.len()];
        for (u, &x) in p.iter().enumerate() {
            if !f[u].is_zero() && !g[u].is_zero() {
                out[x] += &(&f[u].conj() * &g[u]);
            }
        }
        Ok(out)
    }

    /// Scalar form `∫_X (f*g) dμ` for the given map.
    pub fn scalar_inner(&self, map: &str, f: &[GScalar], g: &[GScalar]) -> Result<GScalar, BundleError> {
        let v = self.inner(map, f, g)?;
        Ok(v.iter()
            .zip(self.bundle.base.weights())
            .fold(GScalar::zero(), |acc, (a, w)| &acc + &(a * &GScalar::real(w.clone()))))
    }
}

/// Linear map between function modules, with the pairs of bundle maps
/// `(codomain map, domain map)` it intertwines.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModuleMap {
    pub matrix: SparseMatrix,
    pub intertwines: Vec<(String, String)>,
}

/// `ℂ[φ](f)(v) = Σ_{φ(u)=v} f(u)` for a morphism of multibundles.
pub fn pushforward(u: &MultiBundle, v: &MultiBundle, phi: &[usize]) -> Result<ModuleMap, BundleError> {
    if u.base != v.base {
        return Err(BundleError::BaseMismatch);
    }
    assert_eq!(phi.len(), u.len(), "morphism must be total");
    let mut intertwines = Vec::new();
    for (name, sigma) in &v.maps {
        let pulled: Vec<usize> = phi.iter().map(|&j| sigma[j]).collect();
        match u.maps.iter().find(|(_, m)| *m == pulled) {
            Some((uname, _)) => intertwines.push((name.clone(), uname.clone())),
            None => return Err(BundleError::NotAMorphism { map: name.clone() }),
        }
    }
    let cols = phi.iter().map(|&j| SparseVec::unit(j)).collect();
    Ok(ModuleMap { matrix: SparseMatrix::from_columns(v.len(), cols), intertwines })
}

/// Result of comparing `ℂ[U] ⊗_{L^∞X} ℂ[V]` with `ℂ[U ⋆ V]`.
#[derive(Clone, Debug)]
pub struct StarIso {
    pub product: MultiBundle,
    /// Dimension of the plain tensor product `ℂ[U] ⊗ ℂ[V]`.
    pub tensor_dim: usize,
    pub radical_dim: usize,
    /// `δ_u ⊗ δ_v ↦ δ_(u,v)` or zero; indexed by `i·|V| + j`.
    pub basis_image: Vec<Option<usize>>,
    /// The balancing relations span exactly the radical of the form.
    pub balancing_is_radical: bool,
    /// Gram matrices of the quotient and of `ℂ[U ⋆ V]` agree entrywise.
    pub gram_preserved: bool,
}

impl StarIso {
    pub fn quotient_dim(&self) -> usize {
        self.tensor_dim - self.radical_dim
    }

    pub fn is_isomorphism(&self) -> bool {
        self.quotient_dim() == self.product.len() && self.balancing_is_radical && self.gram_preserved
    }
}

/// Balanced tensor over the base realized as a radical quotient, and the
/// star product map onto the fiber product.
pub fn star_iso(u: &MultiBundle, pi: &str, v: &MultiBundle, sigma: &str) -> Result<StarIso, BundleError> {
    let product = fiber_product(u, pi, v, sigma)?;
    let (p, s) = (u.map(pi)?, v.map(sigma)?);
    let (nu, nv) = (u.len(), v.len());
    let dim = nu * nv;
    let weights = &u.base.weights();
    // ⟨f⊗g | f'⊗g'⟩ = ∫ g*((f*f')∘σ)g' dμ, on basis vectors
    let gram_entry = |i: usize, j: usize| -> GScalar {
        if p[i] == s[j] {
            GScalar::real(weights[s[j]].clone())
        } else {
            GScalar::zero()
        }
    };
    let gram = SparseMatrix::from_columns(
        dim,
        (0..dim).map(|k| SparseVec::from_entries(vec![(k, gram_entry(k / nv, k % nv))])).collect(),
    );
    let radical = gram.kernel();
    let mut balancing = Echelon::new(dim);
    for x in 0..u.base.len() {
        for i in 0..nu {
            for j in 0..nv {
                let a_right = if p[i] == x { 1 } else { 0 };
                let a_left = if s[j] == x { 1 } else { 0 };
                let c = GScalar::int(a_right - a_left);
                if !c.is_zero() {
                    balancing.insert(SparseVec::from_entries(vec![(i * nv + j, c)]));
                }
            }
        }
    }
    let mut rad_span = Echelon::new(dim);
    for r in &radical {
        rad_span.insert(r.clone());
    }
    let balancing_is_radical = balancing.rank() == rad_span.rank() && radical.iter().all(|r| balancing.contains(r));

    let index: alloc::collections::BTreeMap<&[usize], usize> =
        product.carrier.iter().enumerate().map(|(k, t)| (t.as_slice(), k)).collect();
    let mut basis_image = Vec::with_capacity(dim);
    for i in 0..nu {
        for j in 0..nv {
            if p[i] == s[j] {
                let mut t = u.carrier[i].clone();
                t.extend_from_slice(&v.carrier[j]);
                basis_image.push(index.get(t.as_slice()).copied());
            } else {
                basis_image.push(None);
            }
        }
    }
    let target = c_module(&product);
    let merged = alloc::format!("l.{pi}");
    let mut gram_preserved = true;
    for k in 0..dim {
        if let Some(img) = basis_image[k] {
            let e = SparseVec::unit(img).to_dense(product.len());
            if target.scalar_inner(&merged, &e, &e)? != gram_entry(k / nv, k % nv) {
                gram_preserved = false;
            }
        } else if !gram_entry(k / nv, k % nv).is_zero() {
            gram_preserved = false;
        }
    }
    Ok(StarIso {
        product,
        tensor_dim: dim,
        radical_dim: radical.len(),
        basis_image,
        balancing_is_radical,
        gram_preserved,
    })
}

/// Invariants versus coinvariants of `ℂ[U]` for the bimodule structure given
/// by two bundle maps.
#[derive(Clone, Debug)]
pub struct InvariantsCoinvariants {
    /// Basis of the invariants, as carrier indices (they are exactly the
    /// points where the maps agree).
    pub invariant_support: Vec<usize>,
    pub invariant_dim: usize,
    pub coinvariant_dim: usize,
    /// Inclusion followed by the quotient map is bijective.
    pub psi_bijective: bool,
}

pub fn invariants_coinvariants(u: &MultiBundle, pi: &str, sigma: &str) -> Result<InvariantsCoinvariants, BundleError> {
    let (p, s) = (u.map(pi)?, u.map(sigma)?);
    let n = u.len();
    // (a∘π − a∘σ) for a = δ_x, stacked over x; diagonal in the carrier basis
    let mut stacked_rows: Vec<SparseVec> = Vec::new();
    let mut commutators = Echelon::new(n);
    for x in 0..u.base.len() {
        let mut diag = Vec::new();
        for k in 0..n {
            let c = (p[k] == x) as i64 - (s[k] == x) as i64;
            if c != 0 {
                diag.push((k, GScalar::int(c)));
            }
        }
        for (k, c) in &diag {
            commutators.insert(SparseVec::from_entries(vec![(*k, c.clone())]));
        }
        stacked_rows.extend(diag.into_iter().map(|(k, c)| SparseVec::from_entries(vec![(k, c)])));
    }
    // invariants: kernel of the stacked operator, computed as the common null
    // space of its rows
    let mut row_space = Echelon::new(n);
    for r in &stacked_rows {
        row_space.insert(r.clone());
    }
    let invariant_dim = n - row_space.rank();
    let invariant_support: Vec<usize> = (0..n).filter(|&k| p[k] == s[k]).collect();
    let coinvariant_dim = n - commutators.rank();
    // Ψ: images of invariant basis vectors in the quotient are independent
    let mut img = commutators.clone();
    let mut independent = true;
    for &k in &invariant_support {
        if !img.insert(SparseVec::unit(k)) {
            independent = false;
        }
    }
    let psi_bijective = independent && invariant_support.len() == coinvariant_dim && invariant_dim == coinvariant_dim;
    Ok(InvariantsCoinvariants { invariant_support, invariant_dim, coinvariant_dim, psi_bijective })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groupoid::{FiniteGroup, FiniteGroupoid, FiniteMeasuredSpace};
    use crate::spaces::{geometric_tuples, GeometricKind};

    fn pair(n: usize) -> FiniteGroupoid {
        FiniteGroupoid::pair_relation(FiniteMeasuredSpace::uniform(n))
    }

    #[test]
    fn c_module_examples() {
        let triv = c_module(&MultiBundle::trivial(FiniteMeasuredSpace::uniform(3)));
        assert_eq!(triv.dim(), 3);
        let p = c_module(&MultiBundle::of_groupoid(&pair(2)));
        assert_eq!(p.dim(), 4);
        // δ_(0,1) has source 1
        let d = SparseVec::unit(1).to_dense(4);
        assert_eq!(p.inner("s", &d, &d).unwrap(), vec![GScalar::zero(), GScalar::one()]);
    }

    #[test]
    fn pushforward_examples() {
        let g = pair(2);
        let u = MultiBundle::of_groupoid(&g);
        let id = pushforward(&u, &u, &[0, 1, 2, 3]).unwrap();
        assert_eq!(id.matrix, SparseMatrix::identity(4));
        let x = MultiBundle::trivial(g.base().clone());
        let collapse = pushforward(&u, &x, g.sources()).unwrap();
        for c in collapse.matrix.columns() {
            assert_eq!(c.nnz(), 1);
        }
        assert_eq!(collapse.intertwines, vec![("id".into(), "s".into())]);
        // two-step chain: nerve(2) → G via first coordinate → X via s
        let n2 = fiber_product(&u, "s", &u, "t").unwrap();
        let first: Vec<usize> = n2.carrier.iter().map(|t| t[0]).collect();
        let step1 = pushforward(&n2, &u, &first).unwrap();
        let direct: Vec<usize> = n2.carrier.iter().map(|t| g.source(t[0])).collect();
        let step2 = pushforward(&u, &x, g.sources()).unwrap();
        let whole = pushforward(&n2, &x, &direct).unwrap();
        assert_eq!(step2.matrix.compose(&step1.matrix), whole.matrix);
        // units are a morphism; the off-diagonal section is not (s pulls back to a swap)
        assert!(pushforward(&x, &u, &[0, 3]).is_ok());
        assert!(pushforward(&x, &u, &[1, 2]).is_err());
    }

    #[test]
    fn star_iso_examples() {
        let g = pair(2);
        let u = MultiBundle::of_groupoid(&g);
        let iso = star_iso(&u, "s", &u, "t").unwrap();
        assert_eq!(iso.quotient_dim(), 8);
        assert_eq!(iso.quotient_dim(), geometric_tuples(&g, GeometricKind::Nerve, 2).len());
        assert!(iso.is_isomorphism());
        let x = MultiBundle::trivial(g.base().clone());
        let iso = star_iso(&u, "s", &x, "id").unwrap();
        assert_eq!(iso.quotient_dim(), u.len());
        assert!(iso.is_isomorphism());
    }

    #[test]
    fn invariants_examples() {
        let g = pair(2);
        let u = MultiBundle::of_groupoid(&g);
        let same = invariants_coinvariants(&u, "s", "s").unwrap();
        assert_eq!(same.invariant_dim, 4);
        assert!(same.psi_bijective);
        let st = invariants_coinvariants(&u, "s", "t").unwrap();
        assert_eq!(st.invariant_dim, 2);
        assert!(st.psi_bijective);
        let s3 = FiniteGroupoid::from_group(&FiniteGroup::symmetric(3));
        let cyc = MultiBundle::of_groupoid(&s3);
        let r = invariants_coinvariants(&cyc, "s", "t").unwrap();
        assert_eq!(r.invariant_dim, 6);
        assert!(r.psi_bijective);
    }
}
