//! Deterministic instance grids for the verification suites.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::actions::{GSet, Side};
use crate::groupoid::FiniteGroupoid;
use crate::lattice::FiniteSupLattice;
use crate::quantale::InvolutiveQuantale;

/// A named instance.
#[derive(Clone, Debug)]
pub struct Named<T> {
    pub name: String,
    pub value: T,
}

fn named<T>(name: impl Into<String>, value: T) -> Named<T> {
    Named {
        name: name.into(),
        value,
    }
}

/// Groups of order at most 6, up to isomorphism.
pub fn groups() -> Vec<Named<FiniteGroupoid>> {
    vec![
        named("trivial", FiniteGroupoid::trivial()),
        named("Z2", FiniteGroupoid::cyclic(2)),
        named("Z3", FiniteGroupoid::cyclic(3)),
        named("Z4", FiniteGroupoid::cyclic(4)),
        named("V4", FiniteGroupoid::klein()),
        named("Z5", FiniteGroupoid::cyclic(5)),
        named("Z6", FiniteGroupoid::cyclic(6)),
        named("S3", FiniteGroupoid::symmetric3()),
    ]
}

fn points(n: usize) -> Vec<String> {
    (0..n).map(|i| ["x", "y", "z", "w"][i].to_string()).collect()
}

fn permutation_action(name: &str, group: FiniteGroupoid, n: usize, act: Vec<Vec<usize>>) -> Named<FiniteGroupoid> {
    let g = FiniteGroupoid::action(&group, points(n), &act).expect("valid action");
    named(name, g)
}

/// The groupoid grid: groups of order ≤ 6, pair and discrete groupoids on
/// ≤ 3 points, action groupoids and disjoint unions.
pub fn groupoid_grid() -> Vec<Named<FiniteGroupoid>> {
    let mut out = groups();
    for n in 1..=3 {
        out.push(named(format!("P{n}"), FiniteGroupoid::pair(points(n)).unwrap()));
        out.push(named(format!("D{n}"), FiniteGroupoid::discrete(points(n)).unwrap()));
    }
    let z2 = FiniteGroupoid::cyclic(2);
    let z3 = FiniteGroupoid::cyclic(3);
    let z4 = FiniteGroupoid::cyclic(4);
    let v4 = FiniteGroupoid::klein();
    out.push(permutation_action("Z2⋉swap", z2.clone(), 2, vec![vec![0, 1], vec![1, 0]]));
    out.push(permutation_action("Z2⋉fix2", z2.clone(), 2, vec![vec![0, 1], vec![0, 1]]));
    out.push(permutation_action("Z2⋉3", z2.clone(), 3, vec![vec![0, 1, 2], vec![1, 0, 2]]));
    out.push(permutation_action("Z2⋉4", z2.clone(), 4, vec![vec![0, 1, 2, 3], vec![1, 0, 3, 2]]));
    out.push(permutation_action("Z3⋉fix2", z3.clone(), 2, vec![vec![0, 1]; 3]));
    out.push(permutation_action("Z4⋉parity", z4.clone(), 2, vec![vec![0, 1], vec![1, 0], vec![0, 1], vec![1, 0]]));
    out.push(permutation_action("V4⋉2", v4.clone(), 2, vec![vec![0, 1], vec![1, 0], vec![1, 0], vec![0, 1]]));
    let g = |n: &str| out.iter().find(|x| x.name == n).unwrap().value.clone();
    let unions = [
        ("Z2", "trivial"),
        ("Z2", "Z2"),
        ("P2", "trivial"),
        ("P2", "Z2"),
        ("P2", "P2"),
        ("Z3", "Z2"),
        ("Z3", "Z3"),
        ("Z4", "Z2"),
        ("V4", "Z2"),
        ("S3", "trivial"),
        ("P2", "Z3"),
        ("D2", "Z2"),
        ("Z6", "Z2"),
        ("V4", "V4"),
        ("Z4", "Z4"),
        ("S3", "Z2"),
    ];
    let extra: Vec<Named<FiniteGroupoid>> = unions
        .iter()
        .map(|(a, b)| named(format!("{a}⊔{b}"), FiniteGroupoid::disjoint_union(&g(a), &g(b))))
        .collect();
    out.extend(extra);
    out
}

/// The grid restricted to at most `max_arrows` arrows.
pub fn groupoids_up_to(max_arrows: usize) -> Vec<Named<FiniteGroupoid>> {
    groupoid_grid()
        .into_iter()
        .filter(|g| g.value.arrow_count() <= max_arrows)
        .collect()
}

/// Extra disjoint unions of grid members with at most 8 arrows, chosen by a
/// seeded generator.
pub fn random_unions(seed: u64, count: usize) -> Vec<Named<FiniteGroupoid>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let small = groupoids_up_to(4);
    let mut out = Vec::new();
    while out.len() < count {
        let a = small.choose(&mut rng).unwrap();
        let b = small.choose(&mut rng).unwrap();
        if a.value.arrow_count() + b.value.arrow_count() <= 8 {
            out.push(named(
                format!("{}⊔{}#{seed}", a.name, b.name),
                FiniteGroupoid::disjoint_union(&a.value, &b.value),
            ));
        }
    }
    out
}

/// Finite chains and a product of chains viewed as frames (`ab = a∧b`,
/// `a* = a`, `e = ⊤`); these are non-Boolean inverse quantal frames.
pub fn frame_iqfs() -> Vec<Named<InvolutiveQuantale>> {
    let mut out = Vec::new();
    for n in 2..=4 {
        let l = FiniteSupLattice::chain((0..n).map(|i| format!("c{i}")).collect()).unwrap();
        out.push(named(format!("chain{n}"), InvolutiveQuantale::of_frame(Arc::new(l)).unwrap()));
    }
    // 2 × 3
    let els: Vec<String> = (0..2).flat_map(|a| (0..3).map(move |b| format!("{a}{b}"))).collect();
    let mut leq = Vec::new();
    for x in 0..6 {
        for y in 0..6 {
            if x / 3 <= y / 3 && x % 3 <= y % 3 {
                leq.push((x, y));
            }
        }
    }
    let l = FiniteSupLattice::explicit(els, &leq).unwrap();
    out.push(named("chain2×chain3", InvolutiveQuantale::of_frame(Arc::new(l)).unwrap()));
    out
}

/// Right objects action: `x·g = r(g)` when `x = d(g)`.
pub fn right_objects(g: &FiniteGroupoid) -> GSet {
    let anchor = (0..g.object_count()).collect();
    GSet::from_fn(g.clone(), g.objects().to_vec(), anchor, Side::Right, |a, x| {
        (g.dom(a) == x).then(|| g.cod(a))
    })
    .expect("object action is well formed")
}

/// Left groupoid sets of a groupoid: translations, objects, and the
/// trivial action on two copies of the objects.
pub fn left_gsets(g: &Named<FiniteGroupoid>) -> Vec<Named<GSet>> {
    let gg = &g.value;
    let no = gg.object_count();
    let doubled = GSet::from_fn(
        gg.clone(),
        (0..2 * no).map(|i| format!("{}{}", gg.objects()[i % no], if i < no { "'" } else { "\"" })).collect(),
        (0..2 * no).map(|i| i % no).collect(),
        Side::Left,
        |a, x| {
            // g·x' = d(g)'
            (gg.cod(a) == x % no).then(|| gg.dom(a) + (x / no) * no)
        },
    )
    .expect("well formed");
    vec![
        named(format!("{}:left-translation", g.name), GSet::left_translation(gg)),
        named(format!("{}:objects", g.name), GSet::objects(gg)),
        named(format!("{}:objects×2", g.name), doubled),
    ]
}

pub fn right_gsets(g: &Named<FiniteGroupoid>) -> Vec<Named<GSet>> {
    vec![
        named(format!("{}:right-translation", g.name), GSet::right_translation(&g.value)),
        named(format!("{}:objects", g.name), right_objects(&g.value)),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_shape() {
        let grid = groupoid_grid();
        assert!(grid.len() >= 30);
        for g in &grid {
            assert!(g.value.validate().is_valid(), "{}", g.name);
        }
        assert!(grid.iter().filter(|g| g.value.arrow_count() <= 8).count() >= 30);
        let mut names: Vec<&str> = grid.iter().map(|g| g.name.as_str()).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), grid.len());
    }

    #[test]
    fn gsets_are_valid() {
        for g in groupoids_up_to(4) {
            for s in left_gsets(&g).into_iter().chain(right_gsets(&g)) {
                assert!(s.value.validate().is_valid(), "{}", s.name);
            }
        }
    }

    #[test]
    fn random_unions_are_deterministic() {
        let a: Vec<String> = random_unions(7, 5).into_iter().map(|g| g.name).collect();
        let b: Vec<String> = random_unions(7, 5).into_iter().map(|g| g.name).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn frames_are_iqfs() {
        for q in frame_iqfs() {
            assert!(q.value.validate_iqf().is_valid(), "{}", q.name);
        }
    }
}
