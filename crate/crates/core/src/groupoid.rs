//! Finite discrete groupoids and functors between them.
//!
//! Composition is written in diagrammatic order: `(g, h)` is composable iff
//! `cod(g) = dom(h)`, and then `dom(gh) = dom(g)`, `cod(gh) = cod(h)`.
//! `cod` plays the role of the range map `r` and `dom` of the domain map `d`.

use std::collections::HashMap;
use std::fmt;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::report::ValidationReport;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupoidError {
    #[error("malformed groupoid tables: {0}")]
    Shape(String),
    #[error("invalid constructor input: {0}")]
    InvalidSpec(String),
    #[error("hypothesis {hypothesis} violated: {witness}")]
    HypothesisViolated {
        hypothesis: &'static str,
        witness: String,
    },
    #[error("multiplicativity fails although all hypotheses hold: {0}")]
    ConclusionFailed(String),
    #[error("search budget of {0} nodes exceeded")]
    SearchBudgetExceeded(u64),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteGroupoid {
    objects: Vec<String>,
    arrows: Vec<String>,
    dom: Vec<usize>,
    cod: Vec<usize>,
    unit: Vec<usize>,
    inv: Vec<usize>,
    /// Row-major `arrows × arrows` composition table.
    comp: Vec<Option<usize>>,
}

impl FiniteGroupoid {
    /// Assembles a groupoid from raw tables. Only shapes and index ranges are
    /// checked here; the axioms are checked by [`FiniteGroupoid::validate`].
    pub fn from_tables(
        objects: Vec<String>,
        arrows: Vec<String>,
        dom: Vec<usize>,
        cod: Vec<usize>,
        unit: Vec<usize>,
        inv: Vec<usize>,
        comp: Vec<Option<usize>>,
    ) -> Result<Self, GroupoidError> {
        let (no, na) = (objects.len(), arrows.len());
        let shape = |ok: bool, what: &str| {
            if ok {
                Ok(())
            } else {
                Err(GroupoidError::Shape(what.to_string()))
            }
        };
        shape(dom.len() == na && cod.len() == na, "dom/cod must list every arrow")?;
        shape(unit.len() == no, "unit must list every object")?;
        shape(inv.len() == na, "inv must list every arrow")?;
        shape(comp.len() == na * na, "comp must be arrows × arrows")?;
        shape(dom.iter().chain(&cod).all(|&x| x < no), "dom/cod out of range")?;
        shape(unit.iter().chain(&inv).all(|&g| g < na), "unit/inv out of range")?;
        shape(comp.iter().flatten().all(|&g| g < na), "comp out of range")?;
        shape(unique(&objects) && unique(&arrows), "duplicate identifiers")?;
        Ok(Self {
            objects,
            arrows,
            dom,
            cod,
            unit,
            inv,
            comp,
        })
    }

    /// Builds a groupoid from structure maps, computing `comp` from a
    /// composition function defined on composable pairs.
    fn assemble(
        objects: Vec<String>,
        arrows: Vec<String>,
        dom: Vec<usize>,
        cod: Vec<usize>,
        unit: Vec<usize>,
        inv: Vec<usize>,
        compose: impl Fn(usize, usize) -> usize,
    ) -> Result<Self, GroupoidError> {
        let na = arrows.len();
        let mut comp = vec![None; na * na];
        for g in 0..na {
            for h in 0..na {
                if cod[g] == dom[h] {
                    comp[g * na + h] = Some(compose(g, h));
                }
            }
        }
        Self::from_tables(objects, arrows, dom, cod, unit, inv, comp)
    }

    pub fn objects(&self) -> &[String] {
        &self.objects
    }

    pub fn arrows(&self) -> &[String] {
        &self.arrows
    }

    pub fn object_count(&self) -> usize {
        self.objects.len()
    }

    pub fn arrow_count(&self) -> usize {
        self.arrows.len()
    }

    #[inline]
    pub fn dom(&self, g: usize) -> usize {
        self.dom[g]
    }

    #[inline]
    pub fn cod(&self, g: usize) -> usize {
        self.cod[g]
    }

    #[inline]
    pub fn unit(&self, x: usize) -> usize {
        self.unit[x]
    }

    #[inline]
    pub fn inv(&self, g: usize) -> usize {
        self.inv[g]
    }

    #[inline]
    pub fn comp(&self, g: usize, h: usize) -> Option<usize> {
        self.comp[g * self.arrows.len() + h]
    }

    pub fn is_unit(&self, g: usize) -> bool {
        self.unit[self.dom[g]] == g
    }

    pub fn arrow_index(&self, name: &str) -> Option<usize> {
        self.arrows.iter().position(|a| a == name)
    }

    pub fn object_index(&self, name: &str) -> Option<usize> {
        self.objects.iter().position(|a| a == name)
    }

    /// Arrows with domain `x` (the d-fiber).
    pub fn star(&self, x: usize) -> Vec<usize> {
        (0..self.arrow_count()).filter(|&g| self.dom[g] == x).collect()
    }

    pub fn hom_set(&self, x: usize, y: usize) -> Vec<usize> {
        (0..self.arrow_count())
            .filter(|&g| self.dom[g] == x && self.cod[g] == y)
            .collect()
    }

    pub fn is_group(&self) -> bool {
        self.objects.len() == 1
    }

    /// Checks every groupoid axiom, reporting the first counterexample for each.
    pub fn validate(&self) -> ValidationReport {
        let mut r = ValidationReport::new("groupoid");
        let no = self.object_count();
        let na = self.arrow_count();
        let arrows = 0..na;
        let pairs = || (0..na).flat_map(move |g| (0..na).map(move |h| (g, h)));

        r.check_all("dom(unit(x)) = cod(unit(x)) = x", 0..no, |&x| {
            self.dom[self.unit[x]] == x && self.cod[self.unit[x]] == x
        });
        r.check_all("comp(g,h) defined iff cod(g) = dom(h)", pairs(), |&(g, h)| {
            self.comp(g, h).is_some() == (self.cod[g] == self.dom[h])
        });
        r.check_all("dom(gh) = dom(g) and cod(gh) = cod(h)", pairs(), |&(g, h)| {
            self.comp(g, h)
                .is_none_or(|gh| self.dom[gh] == self.dom[g] && self.cod[gh] == self.cod[h])
        });
        let triples = (0..na).flat_map(move |g| pairs().map(move |(h, k)| (g, h, k)));
        r.check_all("associativity", triples, |&(g, h, k)| {
            let left = self.comp(g, h).and_then(|gh| self.comp(gh, k));
            let right = self.comp(h, k).and_then(|hk| self.comp(g, hk));
            left == right
        });
        r.check_all("unit laws", arrows.clone(), |&g| {
            self.comp(self.unit[self.dom[g]], g) == Some(g)
                && self.comp(g, self.unit[self.cod[g]]) == Some(g)
        });
        r.check_all("inverse laws", arrows.clone(), |&g| {
            let i = self.inv[g];
            self.comp(g, i) == Some(self.unit[self.dom[g]])
                && self.comp(i, g) == Some(self.unit[self.cod[g]])
        });
        r.check_all("inv is an involution", arrows.clone(), |&g| {
            self.inv[self.inv[g]] == g
        });
        r.check_all("inv(unit(x)) = unit(x)", 0..no, |&x| {
            self.inv[self.unit[x]] == self.unit[x]
        });
        r.check_all("dom(inv(g)) = cod(g)", arrows, |&g| {
            self.dom[self.inv[g]] == self.cod[g] && self.cod[self.inv[g]] == self.dom[g]
        });
        r
    }

    // ---- standard constructors -------------------------------------------------

    /// A group as a one-object groupoid. `table[a][b]` is the product `ab`.
    pub fn group(names: Vec<String>, table: &[Vec<usize>]) -> Result<Self, GroupoidError> {
        let n = names.len();
        if n == 0 || table.len() != n || table.iter().any(|row| row.len() != n) {
            return Err(GroupoidError::InvalidSpec("group table must be n × n".into()));
        }
        if table.iter().flatten().any(|&c| c >= n) {
            return Err(GroupoidError::InvalidSpec("group table out of range".into()));
        }
        let e = (0..n)
            .find(|&e| (0..n).all(|x| table[e][x] == x && table[x][e] == x))
            .ok_or_else(|| GroupoidError::InvalidSpec("no identity element".into()))?;
        let inv = (0..n)
            .map(|a| {
                (0..n)
                    .find(|&b| table[a][b] == e && table[b][a] == e)
                    .ok_or_else(|| GroupoidError::InvalidSpec(format!("{} has no inverse", names[a])))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let g = Self::assemble(
            vec!["*".into()],
            names,
            vec![0; n],
            vec![0; n],
            vec![e],
            inv,
            |a, b| table[a][b],
        )?;
        let report = g.validate();
        if let Some(f) = report.first_failure() {
            return Err(GroupoidError::InvalidSpec(format!("not a group: {}", f.law)));
        }
        Ok(g)
    }

    pub fn trivial() -> Self {
        Self::cyclic(1)
    }

    /// The cyclic group `Z_n` with elements named `0..n`.
    pub fn cyclic(n: usize) -> Self {
        let table: Vec<Vec<usize>> = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
        Self::group((0..n).map(|i| i.to_string()).collect(), &table)
            .expect("cyclic groups are groups")
    }

    /// `Z_2 × Z_2` with elements `e, a, b, c`.
    pub fn klein() -> Self {
        let table: Vec<Vec<usize>> = (0..4).map(|a| (0..4).map(|b| a ^ b).collect()).collect();
        Self::group(vec!["e".into(), "a".into(), "b".into(), "c".into()], &table)
            .expect("Klein group is a group")
    }

    /// The symmetric group on three letters, elements as permutations in one-line notation.
    pub fn symmetric3() -> Self {
        let perms: Vec<[usize; 3]> = vec![
            [0, 1, 2],
            [1, 0, 2],
            [0, 2, 1],
            [2, 1, 0],
            [1, 2, 0],
            [2, 0, 1],
        ];
        let idx: HashMap<[usize; 3], usize> = perms.iter().enumerate().map(|(i, p)| (*p, i)).collect();
        // ab = "apply a, then b" to match diagrammatic composition
        let table: Vec<Vec<usize>> = perms
            .iter()
            .map(|a| {
                perms
                    .iter()
                    .map(|b| idx[&[b[a[0]], b[a[1]], b[a[2]]]])
                    .collect()
            })
            .collect();
        let names = perms
            .iter()
            .map(|p| p.iter().map(|d| d.to_string()).collect::<String>())
            .collect();
        Self::group(names, &table).expect("S3 is a group")
    }

    /// The pair groupoid: one arrow `(x,y)` for every ordered pair of points.
    pub fn pair(points: Vec<String>) -> Result<Self, GroupoidError> {
        if !unique(&points) {
            return Err(GroupoidError::InvalidSpec("duplicate points".into()));
        }
        let n = points.len();
        let arrows = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| format!("({},{})", points[i], points[j]))
            .collect();
        let dom = (0..n * n).map(|g| g / n).collect();
        let cod = (0..n * n).map(|g| g % n).collect();
        let unit = (0..n).map(|i| i * n + i).collect();
        let inv = (0..n * n).map(|g| (g % n) * n + g / n).collect();
        Self::assemble(points, arrows, dom, cod, unit, inv, |g, h| (g / n) * n + h % n)
    }

    /// Objects only, with identity arrows named `1_x`.
    pub fn discrete(points: Vec<String>) -> Result<Self, GroupoidError> {
        if !unique(&points) {
            return Err(GroupoidError::InvalidSpec("duplicate points".into()));
        }
        let n = points.len();
        let arrows = points.iter().map(|p| format!("1_{p}")).collect();
        let ids: Vec<usize> = (0..n).collect();
        Self::assemble(points, arrows, ids.clone(), ids.clone(), ids.clone(), ids, |g, _| g)
    }

    /// Action groupoid of a left action `act[γ][x] = γ·x` of a group (given as
    /// a one-object groupoid) on `points`. Arrow `(γ,x)` has domain `x` and
    /// codomain `γ·x`; `(γ,x)(δ,γx) = (γδ', x)` where `γδ'` is "γ then δ",
    /// i.e. the group product `comp(γ, δ)` acting as δ after γ.
    pub fn action(
        group: &FiniteGroupoid,
        points: Vec<String>,
        act: &[Vec<usize>],
    ) -> Result<Self, GroupoidError> {
        if !group.is_group() {
            return Err(GroupoidError::InvalidSpec("action needs a one-object groupoid".into()));
        }
        let ng = group.arrow_count();
        let n = points.len();
        if act.len() != ng || act.iter().any(|row| row.len() != n || row.iter().any(|&y| y >= n)) {
            return Err(GroupoidError::InvalidSpec("action table must be group × points".into()));
        }
        let e = group.unit(0);
        for x in 0..n {
            if act[e][x] != x {
                return Err(GroupoidError::InvalidSpec("identity must act trivially".into()));
            }
        }
        // diagrammatic product γδ acts as "γ first, then δ"
        for g in 0..ng {
            for d in 0..ng {
                let gd = group.comp(g, d).expect("groups compose");
                for x in 0..n {
                    if act[gd][x] != act[d][act[g][x]] {
                        return Err(GroupoidError::InvalidSpec(format!(
                            "not an action at ({}, {}, {})",
                            group.arrows[g], group.arrows[d], points[x]
                        )));
                    }
                }
            }
        }
        let arrow = |g: usize, x: usize| g * n + x;
        let arrows = (0..ng * n)
            .map(|a| format!("({},{})", group.arrows[a / n], points[a % n]))
            .collect();
        let dom = (0..ng * n).map(|a| a % n).collect();
        let cod = (0..ng * n).map(|a| act[a / n][a % n]).collect();
        let unit = (0..n).map(|x| arrow(e, x)).collect();
        let inv = (0..ng * n)
            .map(|a| arrow(group.inv(a / n), act[a / n][a % n]))
            .collect();
        Self::assemble(points, arrows, dom, cod, unit, inv, |a, b| {
            arrow(group.comp(a / n, b / n).expect("groups compose"), a % n)
        })
    }

    /// Disjoint union; identifiers are prefixed with `L.` and `R.`.
    pub fn disjoint_union(left: &FiniteGroupoid, right: &FiniteGroupoid) -> Self {
        let (lo, la) = (left.object_count(), left.arrow_count());
        let objects = left
            .objects
            .iter()
            .map(|o| format!("L.{o}"))
            .chain(right.objects.iter().map(|o| format!("R.{o}")))
            .collect();
        let arrows = left
            .arrows
            .iter()
            .map(|a| format!("L.{a}"))
            .chain(right.arrows.iter().map(|a| format!("R.{a}")))
            .collect();
        let dom = left.dom.iter().copied().chain(right.dom.iter().map(|x| x + lo)).collect();
        let cod = left.cod.iter().copied().chain(right.cod.iter().map(|x| x + lo)).collect();
        let unit = left.unit.iter().copied().chain(right.unit.iter().map(|g| g + la)).collect();
        let inv = left.inv.iter().copied().chain(right.inv.iter().map(|g| g + la)).collect();
        Self::assemble(objects, arrows, dom, cod, unit, inv, |g, h| {
            if g < la {
                left.comp(g, h).expect("composable")
            } else {
                right.comp(g - la, h - la).expect("composable") + la
            }
        })
        .expect("disjoint union of valid groupoids")
    }

    pub fn build_standard(spec: &StandardSpec) -> Result<Self, GroupoidError> {
        match spec {
            StandardSpec::Group { elements, table } => Self::group(elements.clone(), table),
            StandardSpec::Cyclic { order } => {
                if *order == 0 {
                    Err(GroupoidError::InvalidSpec("order must be positive".into()))
                } else {
                    Ok(Self::cyclic(*order))
                }
            }
            StandardSpec::Klein => Ok(Self::klein()),
            StandardSpec::Symmetric3 => Ok(Self::symmetric3()),
            StandardSpec::Pair { points } => Self::pair(points.clone()),
            StandardSpec::Discrete { points } => Self::discrete(points.clone()),
            StandardSpec::Action { group, points, act } => {
                let g = Self::build_standard(group)?;
                Self::action(&g, points.clone(), act)
            }
            StandardSpec::DisjointUnion { left, right } => Ok(Self::disjoint_union(
                &Self::build_standard(left)?,
                &Self::build_standard(right)?,
            )),
        }
    }
}

/// Descriptions of the standard constructions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StandardSpec {
    Group {
        elements: Vec<String>,
        table: Vec<Vec<usize>>,
    },
    Cyclic {
        order: usize,
    },
    Klein,
    Symmetric3,
    Pair {
        points: Vec<String>,
    },
    Discrete {
        points: Vec<String>,
    },
    Action {
        group: Box<StandardSpec>,
        points: Vec<String>,
        act: Vec<Vec<usize>>,
    },
    DisjointUnion {
        left: Box<StandardSpec>,
        right: Box<StandardSpec>,
    },
}

fn unique(names: &[String]) -> bool {
    let mut seen = std::collections::HashSet::new();
    names.iter().all(|n| seen.insert(n))
}

impl fmt::Display for FiniteGroupoid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "groupoid({} objects, {} arrows)",
            self.object_count(),
            self.arrow_count()
        )
    }
}

// ---- functors -----------------------------------------------------------------

/// A pair of object and arrow maps.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupoidFunctor {
    pub f0: Vec<usize>,
    pub f1: Vec<usize>,
}

impl GroupoidFunctor {
    pub fn identity(g: &FiniteGroupoid) -> Self {
        Self {
            f0: (0..g.object_count()).collect(),
            f1: (0..g.arrow_count()).collect(),
        }
    }

    /// `self` followed by `then`.
    pub fn then(&self, then: &GroupoidFunctor) -> Self {
        Self {
            f0: self.f0.iter().map(|&x| then.f0[x]).collect(),
            f1: self.f1.iter().map(|&g| then.f1[g]).collect(),
        }
    }

    pub fn is_bijective(&self, _g: &FiniteGroupoid, h: &FiniteGroupoid) -> bool {
        is_bijection(&self.f0, h.object_count()) && is_bijection(&self.f1, h.arrow_count())
    }

    /// Preimage of a set of target arrows.
    pub fn preimage(&self, set: &FixedBitSet, source_arrows: usize) -> FixedBitSet {
        let mut out = FixedBitSet::with_capacity(source_arrows);
        for (g, &fg) in self.f1.iter().enumerate() {
            if set.contains(fg) {
                out.insert(g);
            }
        }
        out
    }
}

fn is_bijection(map: &[usize], n: usize) -> bool {
    if map.len() != n {
        return false;
    }
    let mut hit = vec![false; n];
    map.iter().all(|&y| y < n && !std::mem::replace(&mut hit[y], true))
}

/// Checks the five functor equations.
pub fn validate_functor(f: &GroupoidFunctor, g: &FiniteGroupoid, h: &FiniteGroupoid) -> ValidationReport {
    let mut r = ValidationReport::new("functor");
    if f.f0.len() != g.object_count()
        || f.f1.len() != g.arrow_count()
        || f.f0.iter().any(|&y| y >= h.object_count())
        || f.f1.iter().any(|&k| k >= h.arrow_count())
    {
        r.record("maps are total and in range", Some("shape mismatch".into()));
        return r;
    }
    let arrows = 0..g.arrow_count();
    r.check_all("f0∘d = d∘f1", arrows.clone(), |&a| f.f0[g.dom(a)] == h.dom(f.f1[a]));
    r.check_all("f0∘r = r∘f1", arrows.clone(), |&a| f.f0[g.cod(a)] == h.cod(f.f1[a]));
    r.check_all("f1∘u = u∘f0", 0..g.object_count(), |&x| f.f1[g.unit(x)] == h.unit(f.f0[x]));
    r.check_all("f1∘i = i∘f1", arrows, |&a| f.f1[g.inv(a)] == h.inv(f.f1[a]));
    let n = g.arrow_count();
    let composable = (0..n).flat_map(|a| (0..n).map(move |b| (a, b)));
    r.check_all(
        "f1(gh) = f1(g)f1(h)",
        composable.filter(|&(a, b)| g.comp(a, b).is_some()),
        |&(a, b)| h.comp(f.f1[a], f.f1[b]) == Some(f.f1[g.comp(a, b).unwrap()]),
    );
    r
}

/// Promotes a pair of maps satisfying the i-, u- and d-equations and the lax
/// multiplicativity condition (whenever `f1(g)f1(h)` is defined for a
/// composable pair it equals `f1(gh)`) to a functor, after checking
/// exhaustively that `f1(g)f1(h)` is in fact always defined.
pub fn promote_lax_to_functor(
    f0: &[usize],
    f1: &[usize],
    g: &FiniteGroupoid,
    h: &FiniteGroupoid,
) -> Result<GroupoidFunctor, GroupoidError> {
    let violated = |hypothesis: &'static str, witness: String| {
        Err(GroupoidError::HypothesisViolated { hypothesis, witness })
    };
    if f0.len() != g.object_count()
        || f1.len() != g.arrow_count()
        || f0.iter().any(|&y| y >= h.object_count())
        || f1.iter().any(|&k| k >= h.arrow_count())
    {
        return violated("maps are total", "shape mismatch".into());
    }
    for a in 0..g.arrow_count() {
        if f1[g.inv(a)] != h.inv(f1[a]) {
            return violated("f1∘i = i∘f1", g.arrows[a].clone());
        }
    }
    for x in 0..g.object_count() {
        if f1[g.unit(x)] != h.unit(f0[x]) {
            return violated("f1∘u = u∘f0", g.objects[x].clone());
        }
    }
    for a in 0..g.arrow_count() {
        if f0[g.dom(a)] != h.dom(f1[a]) {
            return violated("f0∘d = d∘f1", g.arrows[a].clone());
        }
    }
    let n = g.arrow_count();
    for a in 0..n {
        for b in 0..n {
            if let (Some(ab), Some(img)) = (g.comp(a, b), h.comp(f1[a], f1[b])) {
                if img != f1[ab] {
                    return violated(
                        "m∘(f1×f1) ≤ f1∘m",
                        format!("({}, {})", g.arrows[a], g.arrows[b]),
                    );
                }
            }
        }
    }
    for a in 0..n {
        for b in 0..n {
            if let Some(ab) = g.comp(a, b) {
                if h.comp(f1[a], f1[b]) != Some(f1[ab]) {
                    return Err(GroupoidError::ConclusionFailed(format!(
                        "({}, {})",
                        g.arrows[a], g.arrows[b]
                    )));
                }
            }
        }
    }
    let f = GroupoidFunctor {
        f0: f0.to_vec(),
        f1: f1.to_vec(),
    };
    debug_assert!(validate_functor(&f, g, h).is_valid());
    Ok(f)
}

/// First failure of the preimage map `f1⁻¹ : P(H₁) → P(G₁)` to be a unital
/// quantale homomorphism, checked on the unit and on all pairs of atoms.
pub fn covering_failure(f: &GroupoidFunctor, g: &FiniteGroupoid, h: &FiniteGroupoid) -> Option<String> {
    let (ng, nh) = (g.arrow_count(), h.arrow_count());
    let units_of = |gr: &FiniteGroupoid| {
        let mut s = FixedBitSet::with_capacity(gr.arrow_count());
        for x in 0..gr.object_count() {
            s.insert(gr.unit(x));
        }
        s
    };
    if f.preimage(&units_of(h), ng) != units_of(g) {
        return Some("f1⁻¹(e_H) ≠ e_G".into());
    }
    let singleton = |k: usize| {
        let mut s = FixedBitSet::with_capacity(nh);
        s.insert(k);
        s
    };
    let pre: Vec<FixedBitSet> = (0..nh).map(|k| f.preimage(&singleton(k), ng)).collect();
    for k in 0..nh {
        for l in 0..nh {
            let mut lhs = FixedBitSet::with_capacity(ng);
            for a in pre[k].ones() {
                for b in pre[l].ones() {
                    if let Some(ab) = g.comp(a, b) {
                        lhs.insert(ab);
                    }
                }
            }
            let rhs = match h.comp(k, l) {
                Some(kl) => pre[kl].clone(),
                None => FixedBitSet::with_capacity(ng),
            };
            if lhs != rhs {
                return Some(format!(
                    "f1⁻¹({{{}}})·f1⁻¹({{{}}}) ≠ f1⁻¹({{{}}}·{{{}}})",
                    h.arrows[k], h.arrows[l], h.arrows[k], h.arrows[l]
                ));
            }
        }
    }
    None
}

/// Whether `f1⁻¹` is a homomorphism of unital quantales.
pub fn is_covering_functor(f: &GroupoidFunctor, g: &FiniteGroupoid, h: &FiniteGroupoid) -> bool {
    covering_failure(f, g, h).is_none()
}

/// Whether `f1` restricts to a bijection from each star of `G` onto the star
/// of `H` at the image object.
pub fn is_star_bijective(f: &GroupoidFunctor, g: &FiniteGroupoid, h: &FiniteGroupoid) -> bool {
    (0..g.object_count()).all(|x| {
        let star = g.star(x);
        let target = h.star(f.f0[x]);
        let mut images: Vec<usize> = star.iter().map(|&a| f.f1[a]).collect();
        images.sort_unstable();
        images.dedup();
        images.len() == star.len() && images == target
    })
}

/// Exhaustive search for all functors `g → h`, in lexicographic order of
/// `(f0, f1)`.
pub fn enumerate_functors(
    g: &FiniteGroupoid,
    h: &FiniteGroupoid,
    budget: u64,
) -> Result<Vec<GroupoidFunctor>, GroupoidError> {
    let mut out = Vec::new();
    let mut nodes = 0u64;
    let mut f0 = vec![0; g.object_count()];
    enum_objects(g, h, 0, &mut f0, &mut out, &mut nodes, budget)?;
    Ok(out)
}

fn enum_objects(
    g: &FiniteGroupoid,
    h: &FiniteGroupoid,
    x: usize,
    f0: &mut Vec<usize>,
    out: &mut Vec<GroupoidFunctor>,
    nodes: &mut u64,
    budget: u64,
) -> Result<(), GroupoidError> {
    if x == g.object_count() {
        let mut f1 = vec![usize::MAX; g.arrow_count()];
        for y in 0..g.object_count() {
            f1[g.unit(y)] = h.unit(f0[y]);
        }
        return enum_arrows(g, h, 0, f0, &mut f1, out, nodes, budget);
    }
    for y in 0..h.object_count() {
        f0[x] = y;
        enum_objects(g, h, x + 1, f0, out, nodes, budget)?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn enum_arrows(
    g: &FiniteGroupoid,
    h: &FiniteGroupoid,
    a: usize,
    f0: &[usize],
    f1: &mut Vec<usize>,
    out: &mut Vec<GroupoidFunctor>,
    nodes: &mut u64,
    budget: u64,
) -> Result<(), GroupoidError> {
    *nodes += 1;
    if *nodes > budget {
        return Err(GroupoidError::SearchBudgetExceeded(budget));
    }
    if a == g.arrow_count() {
        let f = GroupoidFunctor {
            f0: f0.to_vec(),
            f1: f1.clone(),
        };
        if validate_functor(&f, g, h).is_valid() {
            out.push(f);
        }
        return Ok(());
    }
    if f1[a] != usize::MAX {
        return enum_arrows(g, h, a + 1, f0, f1, out, nodes, budget);
    }
    let inv = g.inv(a);
    for k in h.hom_set(f0[g.dom(a)], f0[g.cod(a)]) {
        if f1[inv] != usize::MAX && f1[inv] != h.inv(k) {
            continue;
        }
        f1[a] = k;
        let set_inv = f1[inv] == usize::MAX;
        if set_inv {
            f1[inv] = h.inv(k);
        }
        // composition with arrows already assigned
        let consistent = (0..g.arrow_count()).filter(|&b| f1[b] != usize::MAX).all(|b| {
            let ok = |x: usize, y: usize| match g.comp(x, y) {
                Some(xy) if f1[xy] != usize::MAX => h.comp(f1[x], f1[y]) == Some(f1[xy]),
                _ => true,
            };
            ok(a, b) && ok(b, a)
        });
        if consistent {
            enum_arrows(g, h, a + 1, f0, f1, out, nodes, budget)?;
        }
        if set_inv {
            f1[inv] = usize::MAX;
        }
        f1[a] = usize::MAX;
    }
    Ok(())
}

/// Backtracking search for an isomorphism, pruned by star and hom-set sizes.
pub fn find_isomorphism(g: &FiniteGroupoid, h: &FiniteGroupoid) -> Option<GroupoidFunctor> {
    if g.object_count() != h.object_count() || g.arrow_count() != h.arrow_count() {
        return None;
    }
    let profile = |gr: &FiniteGroupoid, x: usize| {
        let mut sizes: Vec<usize> = (0..gr.object_count())
            .map(|y| gr.hom_set(x, y).len())
            .collect();
        sizes.sort_unstable();
        (gr.hom_set(x, x).len(), sizes)
    };
    let gp: Vec<_> = (0..g.object_count()).map(|x| profile(g, x)).collect();
    let hp: Vec<_> = (0..h.object_count()).map(|x| profile(h, x)).collect();
    let mut f0 = vec![usize::MAX; g.object_count()];
    let mut used = vec![false; h.object_count()];
    iso_objects(g, h, 0, &gp, &hp, &mut f0, &mut used)
}

type Profile = (usize, Vec<usize>);

fn iso_objects(
    g: &FiniteGroupoid,
    h: &FiniteGroupoid,
    x: usize,
    gp: &[Profile],
    hp: &[Profile],
    f0: &mut Vec<usize>,
    used: &mut Vec<bool>,
) -> Option<GroupoidFunctor> {
    if x == g.object_count() {
        // arrows: try all functors over this object bijection, keep a bijective one
        let found = enum_functors_over(g, h, f0);
        return found.into_iter().find(|f| f.is_bijective(g, h));
    }
    for y in 0..h.object_count() {
        if used[y] || gp[x] != hp[y] {
            continue;
        }
        let sizes_ok = (0..x).all(|z| {
            g.hom_set(x, z).len() == h.hom_set(y, f0[z]).len()
                && g.hom_set(z, x).len() == h.hom_set(f0[z], y).len()
        });
        if !sizes_ok {
            continue;
        }
        f0[x] = y;
        used[y] = true;
        if let Some(f) = iso_objects(g, h, x + 1, gp, hp, f0, used) {
            return Some(f);
        }
        used[y] = false;
    }
    f0[x] = usize::MAX;
    None
}

fn enum_functors_over(g: &FiniteGroupoid, h: &FiniteGroupoid, f0: &[usize]) -> Vec<GroupoidFunctor> {
    let mut out = Vec::new();
    let mut f1 = vec![usize::MAX; g.arrow_count()];
    for y in 0..g.object_count() {
        f1[g.unit(y)] = h.unit(f0[y]);
    }
    let mut nodes = 0;
    let _ = enum_arrows(g, h, 0, f0, &mut f1, &mut out, &mut nodes, u64::MAX);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::names;

    fn p2() -> FiniteGroupoid {
        FiniteGroupoid::pair(names(["0", "1"])).unwrap()
    }

    fn z2() -> FiniteGroupoid {
        FiniteGroupoid::cyclic(2)
    }

    fn parity() -> GroupoidFunctor {
        let g = p2();
        let f1 = g
            .arrows()
            .iter()
            .map(|a| if a == "(0,1)" || a == "(1,0)" { 1 } else { 0 })
            .collect();
        GroupoidFunctor { f0: vec![0, 0], f1 }
    }

    #[test]
    fn standard_groupoids_are_valid() {
        for g in [
            p2(),
            z2(),
            FiniteGroupoid::klein(),
            FiniteGroupoid::symmetric3(),
            FiniteGroupoid::cyclic(5),
            FiniteGroupoid::discrete(names(["x", "y"])).unwrap(),
            FiniteGroupoid::disjoint_union(&z2(), &p2()),
        ] {
            let r = g.validate();
            assert!(r.is_valid(), "{r}");
        }
    }

    #[test]
    fn constructor_shapes() {
        let d = FiniteGroupoid::discrete(names(["x", "y"])).unwrap();
        assert_eq!((d.object_count(), d.arrow_count()), (2, 2));
        let p = p2();
        assert_eq!((p.object_count(), p.arrow_count()), (2, 4));
        let a01 = p.arrow_index("(0,1)").unwrap();
        let a10 = p.arrow_index("(1,0)").unwrap();
        let a00 = p.arrow_index("(0,0)").unwrap();
        assert_eq!(p.dom(a01), 0);
        assert_eq!(p.cod(a01), 1);
        assert_eq!(p.comp(a01, a10), Some(a00));
        assert_eq!(p.comp(a10, a10), None);
    }

    #[test]
    fn broken_inverse_is_reported() {
        let p = p2();
        let a01 = p.arrow_index("(0,1)").unwrap();
        let mut inv = p.inv.clone();
        inv[a01] = a01;
        let bad = FiniteGroupoid::from_tables(
            p.objects.clone(),
            p.arrows.clone(),
            p.dom.clone(),
            p.cod.clone(),
            p.unit.clone(),
            inv,
            p.comp.clone(),
        )
        .unwrap();
        let r = bad.validate();
        assert!(!r.is_valid());
        assert_eq!(r.passed("inverse laws"), Some(false));
    }

    #[test]
    fn swap_action_groupoid_is_a_pair_groupoid() {
        let act = vec![vec![0, 1], vec![1, 0]];
        let a = FiniteGroupoid::action(&z2(), names(["x", "y"]), &act).unwrap();
        assert!(a.validate().is_valid());
        assert_eq!((a.object_count(), a.arrow_count()), (2, 4));
        let pxy = FiniteGroupoid::pair(names(["x", "y"])).unwrap();
        let iso = find_isomorphism(&a, &pxy).unwrap();
        assert!(validate_functor(&iso, &a, &pxy).is_valid());
        assert!(iso.is_bijective(&a, &pxy));
        assert!(find_isomorphism(&a, &FiniteGroupoid::disjoint_union(&z2(), &FiniteGroupoid::trivial())).is_none());
    }

    #[test]
    fn functor_examples() {
        let p = p2();
        assert!(validate_functor(&GroupoidFunctor::identity(&p), &p, &p).is_valid());
        let collapse = GroupoidFunctor {
            f0: vec![0, 0],
            f1: vec![0; 4],
        };
        assert!(validate_functor(&collapse, &p, &z2()).is_valid());
        assert!(validate_functor(&parity(), &p, &z2()).is_valid());
    }

    #[test]
    fn lax_promotion() {
        let z = z2();
        let id = promote_lax_to_functor(&[0], &[0, 1], &z, &z).unwrap();
        assert_eq!(id, GroupoidFunctor::identity(&z));
        let par = parity();
        let f = promote_lax_to_functor(&par.f0, &par.f1, &p2(), &z).unwrap();
        assert_eq!(f, par);
        // send (0,1) to s but (1,0) to e: breaks the i-equation
        let p = p2();
        let mut f1 = par.f1.clone();
        f1[p.arrow_index("(1,0)").unwrap()] = 0;
        let err = promote_lax_to_functor(&par.f0, &f1, &p, &z).unwrap_err();
        assert!(matches!(
            err,
            GroupoidError::HypothesisViolated { hypothesis: "f1∘i = i∘f1", .. }
        ));
    }

    #[test]
    fn covering_examples() {
        let p = p2();
        let z = z2();
        assert!(is_covering_functor(&GroupoidFunctor::identity(&p), &p, &p));
        assert!(is_covering_functor(&parity(), &p, &z));
        // collapsing two discrete points is bijective on stars, hence covering
        let d2 = FiniteGroupoid::discrete(names(["x", "y"])).unwrap();
        let d1 = FiniteGroupoid::discrete(names(["x"])).unwrap();
        let collapse = GroupoidFunctor {
            f0: vec![0, 0],
            f1: vec![0, 0],
        };
        assert!(is_covering_functor(&collapse, &d2, &d1));
        // including one point of P2 is not: f1⁻¹{(0,1)}·f1⁻¹{(1,0)} = ∅ ≠ f1⁻¹{(0,0)}
        let incl = GroupoidFunctor {
            f0: vec![0],
            f1: vec![p.arrow_index("(0,0)").unwrap()],
        };
        assert!(validate_functor(&incl, &d1, &p).is_valid());
        let why = covering_failure(&incl, &d1, &p).unwrap();
        assert!(why.contains("(0,1)"), "{why}");
        // Z2 → 1 fails the unit
        let to_trivial = GroupoidFunctor {
            f0: vec![0],
            f1: vec![0, 0],
        };
        assert_eq!(
            covering_failure(&to_trivial, &z, &FiniteGroupoid::trivial()).as_deref(),
            Some("f1⁻¹(e_H) ≠ e_G")
        );
    }

    #[test]
    fn functor_enumeration_counts() {
        // homomorphisms Z2 → Z2: trivial and identity
        assert_eq!(enumerate_functors(&z2(), &z2(), 1 << 20).unwrap().len(), 2);
        // Z3 → Z2: only trivial
        assert_eq!(enumerate_functors(&FiniteGroupoid::cyclic(3), &z2(), 1 << 20).unwrap().len(), 1);
        // functors into a pair groupoid are determined by object maps
        let p = p2();
        assert_eq!(enumerate_functors(&p, &p, 1 << 20).unwrap().len(), 4);
        // P2 → Z2: the object map is forced, the arrow map picks the image of (0,1)
        assert_eq!(enumerate_functors(&p, &z2(), 1 << 20).unwrap().len(), 2);
        let s3 = FiniteGroupoid::symmetric3();
        // |Hom(S3, S3)| = 10 (6 automorphisms, 3 onto order-2 subgroups, 1 trivial)
        assert_eq!(enumerate_functors(&s3, &s3, 1 << 22).unwrap().len(), 10);
    }
}
