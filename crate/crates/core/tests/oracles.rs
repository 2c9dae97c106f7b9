//! Closed forms computed independently of the pipelines.

use l2betti::algebra::TracialAlgebra;
use l2betti::betti::{betti_hochschild, betti_sauer};
use l2betti::complex::{WordComplex, WordKind};
use l2betti::extension::{convolution_algebra, Extension};
use l2betti::groupoid::{FiniteGroup, FiniteGroupoid, FiniteMeasuredSpace};
use l2betti::peirce::Peirce;
use l2betti::{GScalar, Rational};

/// `∫ 1/|t⁻¹(x)| dμ(x)`.
fn beta0_oracle(g: &FiniteGroupoid) -> Rational {
    (0..g.base().len()).fold(Rational::ZERO, |acc, x| {
        let arrows = g.with_targets(x).count() as i64;
        &acc + &(g.base().weight(x) * &Rational::new(1, arrows))
    })
}

fn groups() -> Vec<FiniteGroup> {
    vec![FiniteGroup::cyclic(2), FiniteGroup::cyclic(3), FiniteGroup::cyclic(4), FiniteGroup::symmetric(3)]
}

#[test]
fn averaging_idempotent_has_trace_one_over_order() {
    for g in groups() {
        let a = TracialAlgebra::group_algebra(&g);
        let n = g.order() as i64;
        let p = vec![GScalar::ratio(1, n); g.order()];
        assert!(a.is_projection(&p));
        assert_eq!(a.tr(&p), GScalar::ratio(1, n));
        let b = betti_hochschild(&Extension::group_over_scalars(&g), 1).unwrap();
        assert_eq!(GScalar::real(b.values[0].clone()), a.tr(&p));
    }
}

#[test]
fn cyclic_degree_zero_counts_conjugacy_classes() {
    for g in groups() {
        let ext = Extension::group_over_scalars(&g);
        let wc = WordComplex::new(Peirce::new(&ext).unwrap(), WordKind::Cyclic);
        let (cx, _) = wc.materialize(1);
        assert_eq!(cx.homology_dim(0).unwrap(), g.conjugacy_classes().len());
    }
}

#[test]
fn matrix_algebras_have_one_dimensional_cyclic_zero() {
    for n in 1..=3 {
        let ext = Extension::matrix_over_scalars(n);
        let wc = WordComplex::new(Peirce::new(&ext).unwrap(), WordKind::Cyclic);
        let (cx, _) = wc.materialize(1);
        assert_eq!(cx.homology_dim(0).unwrap(), 1);
    }
}

#[test]
fn groupoid_beta0_matches_orbit_integral() {
    let weights = |ws: &[(i64, i64)]| {
        let labels = (0..ws.len()).map(|i| i.to_string()).collect();
        FiniteMeasuredSpace::new(labels, ws.iter().map(|&(n, d)| Rational::new(n, d)).collect()).unwrap()
    };
    let cases = vec![
        FiniteGroupoid::pair_relation(FiniteMeasuredSpace::uniform(4)),
        FiniteGroupoid::partition_relation(weights(&[(1, 4), (1, 2), (1, 4)]), &[vec![0, 2], vec![1]]).unwrap(),
        FiniteGroupoid::trivial(weights(&[(1, 5), (4, 5)])),
        FiniteGroupoid::from_group(&FiniteGroup::symmetric(3)),
        FiniteGroupoid::action_groupoid(
            &FiniteGroup::cyclic(2),
            weights(&[(1, 3), (1, 3), (1, 3)]),
            &[vec![0, 1, 2], vec![1, 0, 2]],
        )
        .unwrap(),
    ];
    for g in cases {
        let want = beta0_oracle(&g);
        let h = betti_hochschild(&convolution_algebra(&g), 2).unwrap();
        let s = betti_sauer(&g, 2).unwrap();
        assert_eq!(h.values, vec![want.clone(), Rational::ZERO]);
        assert_eq!(s.values, h.values);
    }
}
