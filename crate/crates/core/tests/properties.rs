use std::sync::Arc;

use proptest::prelude::*;

use iqf_core::actions::{
    action_inverse_image, check_partial_unit_laws, invariant_elements, module_of_gset_over, tensor_over_q,
    unions_of_classes, GSet,
};
use iqf_core::bimodules::{
    algmorph_to_hom_over, biset_diagrams, bimodule_of_biset, compose_algmorphs, enumerate_algmorphs, Biset,
};
use iqf_core::generators::{groupoids_up_to, right_objects};
use iqf_core::groupoid::FiniteGroupoid;
use iqf_core::invsemi::{check_completion_iso, compatible_ideal_completion, partial_units};
use iqf_core::io::{emit_value, load_str, Kind, Value};
use iqf_core::lattice::{compute_left_adjoint, names, FiniteSupLattice, SupHom};
use iqf_core::quantale::{
    check_roundtrip_groupoid, enumerate_unital_homs, quantale_of_groupoid, validate_hom, InvolutiveQuantale,
};
use iqf_core::verify::{run_suite, VerifyConfig};

const BUDGET: u64 = 1 << 22;

fn points(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("p{i}")).collect()
}

/// A cyclic group acting on up to 3 points through a permutation, possibly
/// disjoint-unioned with a small grid groupoid.
fn arb_groupoid() -> impl Strategy<Value = FiniteGroupoid> {
    let perm = (1usize..=3).prop_flat_map(|n| Just((0..n).collect::<Vec<_>>()).prop_shuffle());
    let extra = prop::option::of(0..groupoids_up_to(2).len());
    (perm, extra).prop_map(|(sigma, extra)| {
        let n = sigma.len();
        let mut powers = vec![(0..n).collect::<Vec<_>>()];
        loop {
            let next: Vec<usize> = powers.last().unwrap().iter().map(|&x| sigma[x]).collect();
            if next == powers[0] {
                break;
            }
            powers.push(next);
        }
        let g = FiniteGroupoid::action(&FiniteGroupoid::cyclic(powers.len()), points(n), &powers).unwrap();
        match extra {
            Some(i) => FiniteGroupoid::disjoint_union(&g, &groupoids_up_to(2)[i].value),
            None => g,
        }
    })
}

fn o(g: &FiniteGroupoid) -> Arc<InvolutiveQuantale> {
    Arc::new(quantale_of_groupoid(g).unwrap())
}

fn left_gsets(g: &FiniteGroupoid) -> Vec<GSet> {
    vec![GSet::left_translation(g), GSet::objects(g)]
}

fn right_gsets(g: &FiniteGroupoid) -> Vec<GSet> {
    vec![GSet::right_translation(g), right_objects(g)]
}

fn round_trip(v: &Value, kind: Kind) -> String {
    let text = emit_value(v);
    let back = load_str(&text, kind).unwrap();
    emit_value(&back)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn load_emit_identity(g in arb_groupoid()) {
        let gv = Value::Groupoid(g.clone());
        prop_assert_eq!(round_trip(&gv, Kind::Groupoid), emit_value(&gv));
        let qv = Value::Quantale(quantale_of_groupoid(&g).unwrap());
        prop_assert_eq!(round_trip(&qv, Kind::Quantale), emit_value(&qv));
        for s in left_gsets(&g).into_iter().chain(right_gsets(&g)) {
            let sv = Value::Gset(s);
            prop_assert_eq!(round_trip(&sv, Kind::Gset), emit_value(&sv));
        }
    }

    #[test]
    fn groupoid_quantale_round_trip(g in arb_groupoid()) {
        prop_assert!(g.validate().is_valid());
        prop_assert!(o(&g).validate_iqf().is_valid());
        let r = check_roundtrip_groupoid(&g);
        prop_assert!(r.is_valid(), "{:?}", r.first_failure());
    }

    #[test]
    fn invariants_are_unions_of_orbits(g in arb_groupoid()) {
        let q = o(&g);
        for s in left_gsets(&g).into_iter().chain(right_gsets(&g)) {
            prop_assume!(s.point_count() <= 8);
            let m = module_of_gset_over(&s, q.clone()).unwrap();
            prop_assert!(m.validate().is_valid());
            let inv = invariant_elements(&m);
            prop_assert!(inv.report.is_valid(), "{:?}", inv.report.first_failure());
            prop_assert_eq!(inv.elements, unions_of_classes(&s.orbits()));
        }
    }

    #[test]
    fn partial_unit_laws(g in arb_groupoid()) {
        let q = o(&g);
        for s in left_gsets(&g) {
            prop_assume!(s.point_count() <= 8);
            let m = module_of_gset_over(&s, q.clone()).unwrap();
            let r = check_partial_unit_laws(&m);
            prop_assert!(r.is_valid(), "{:?}", r.first_failure());
        }
    }

    #[test]
    fn inverse_image_adjunction(g in arb_groupoid(), seed in any::<u64>()) {
        for s in left_gsets(&g) {
            let x = (seed as usize) & ((1usize << s.point_count()) - 1);
            let ii = action_inverse_image(&s, x).unwrap();
            prop_assert!(ii.report.is_valid(), "{:?}", ii.report.first_failure());
        }
    }

    #[test]
    fn tensor_closures_agree(g in arb_groupoid()) {
        for x in right_gsets(&g) {
            for y in left_gsets(&g) {
                let t = tensor_over_q(&x, &y).unwrap();
                prop_assert!(t.report.is_valid(), "{:?}", t.report.first_failure());
                // classes are exactly the diagonal orbits
                let mut orbits = t.diagonal.gset.orbits();
                let mut classes = t.classes.clone();
                orbits.sort();
                classes.sort();
                prop_assert_eq!(classes, orbits);
            }
        }
    }

    #[test]
    fn completion_recovers_quantale(g in arb_groupoid()) {
        let q = o(&g);
        let pu = partial_units(&q).unwrap();
        prop_assert!(pu.semigroup.validate().is_valid());
        prop_assume!(pu.elements.len() <= 40);
        let c = compatible_ideal_completion(&pu.semigroup, 40, 1 << 14).unwrap();
        let r = check_completion_iso(&q, &pu, &c);
        prop_assert!(r.is_valid(), "{:?}", r.first_failure());
    }

    #[test]
    fn biset_diagrams_match_bimodule_laws(g in arb_groupoid(), pick in any::<prop::sample::Index>()) {
        prop_assume!(g.arrow_count() <= 6);
        let b = Biset::unit(&g);
        let ps = b.perturbations();
        let c = &ps[pick.index(ps.len())];
        let lattice = bimodule_of_biset(c).map(|m| m.validate().is_valid()).unwrap_or(false);
        prop_assert_eq!(biset_diagrams(c).is_valid(), lattice);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn unital_homs_are_involutive(a in 0..groupoids_up_to(4).len(), b in 0..groupoids_up_to(4).len()) {
        let grid = groupoids_up_to(4);
        let (q, r) = (o(&grid[a].value), o(&grid[b].value));
        for h in enumerate_unital_homs(&q, &r, BUDGET).unwrap() {
            prop_assert!(validate_hom(&h).0.involutive);
        }
    }

    #[test]
    fn algmorphs_compose_like_homs(
        a in 0..groupoids_up_to(4).len(),
        b in 0..groupoids_up_to(4).len(),
        c in 0..groupoids_up_to(4).len(),
    ) {
        let grid = groupoids_up_to(4);
        let (g, h, k) = (&grid[a].value, &grid[b].value, &grid[c].value);
        let (og, oh, ok) = (o(g), o(h), o(k));
        let first = enumerate_algmorphs(g, h, BUDGET).unwrap();
        let second = enumerate_algmorphs(h, k, BUDGET).unwrap();
        prop_assert_eq!(first.len(), enumerate_unital_homs(&og, &oh, BUDGET).unwrap().len());
        for a1 in &first {
            for a2 in &second {
                let c = compose_algmorphs(a1, a2).unwrap();
                prop_assert_eq!(
                    algmorph_to_hom_over(&c, &og, &ok),
                    algmorph_to_hom_over(a1, &og, &oh).then(&algmorph_to_hom_over(a2, &oh, &ok))
                );
            }
        }
    }

    /// The right adjoint of a sup-hom between powersets has the sup-hom as
    /// its left adjoint.
    #[test]
    fn left_adjoint_of_right_adjoint(n in 1usize..=3, m in 1usize..=3, seed in prop::collection::vec(any::<usize>(), 3)) {
        let l = Arc::new(FiniteSupLattice::powerset(names((0..n).map(|i| format!("a{i}")))).unwrap());
        let t = Arc::new(FiniteSupLattice::powerset(names((0..m).map(|i| format!("b{i}")))).unwrap());
        let images: Vec<usize> = seed.iter().take(n).map(|s| s % t.size()).collect();
        let f = SupHom::from_ji_images(l.clone(), t.clone(), &images);
        prop_assert!(f.is_join_preserving());
        // right adjoint r(y) = ⋁{x : f(x) ≤ y}
        let r: Vec<usize> = t
            .elements()
            .map(|y| l.join_iter(l.elements().filter(|&x| t.leq(f.apply(x), y))))
            .collect();
        let back = compute_left_adjoint(&t, &l, &r).expect("right adjoints have left adjoints");
        prop_assert_eq!(back.map, f.map);
    }
}

#[test]
fn seeded_verification_is_deterministic() {
    let cfg = VerifyConfig {
        seed: Some(11),
        random_count: 4,
        ..VerifyConfig::default()
    };
    let mut a = run_suite("roundtrip", &cfg).unwrap();
    let mut b = run_suite("roundtrip", &cfg).unwrap();
    a.wall_time = 0.0;
    b.wall_time = 0.0;
    assert_eq!(a, b);
    let plain = run_suite("roundtrip", &VerifyConfig::default()).unwrap();
    assert_eq!(a.instances, plain.instances + 4);
}
