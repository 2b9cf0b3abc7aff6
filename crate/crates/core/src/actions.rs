//! Groupoid sets, quantale modules, invariant elements, diagonal actions and
//! tensor products over `𝒪(G)`.

use std::collections::HashMap;
use std::sync::Arc;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::groupoid::FiniteGroupoid;
use crate::lattice::{Elem, FiniteSupLattice, LatticeError, HARD_MAX_CARRIER};
use crate::quantale::{quantale_of_groupoid_bounded, InvolutiveQuantale, QuantaleError};
use crate::report::ValidationReport;
use crate::unionfind::UnionFind;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ActionError {
    #[error("malformed action tables: {0}")]
    Shape(String),
    #[error("anchors incompatible: {0}")]
    AnchorsIncompatible(String),
    #[error("operation needs a module built from a groupoid set")]
    NotSetDerived,
    #[error(transparent)]
    Quantale(#[from] QuantaleError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

/// A set with a partial action of a groupoid, fibred over its objects.
///
/// Left: `g·x` is defined iff `r(g) = p(x)` and lands over `d(g)`.
/// Right: `x·g` is defined iff `p(x) = d(g)` and lands over `r(g)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GSet {
    groupoid: FiniteGroupoid,
    points: Vec<String>,
    anchor: Vec<usize>,
    side: Side,
    /// `act[g * points + x]`
    act: Vec<Option<usize>>,
}

impl GSet {
    pub fn new(
        groupoid: FiniteGroupoid,
        points: Vec<String>,
        anchor: Vec<usize>,
        side: Side,
        act: Vec<Option<usize>>,
    ) -> Result<Self, ActionError> {
        let np = points.len();
        if anchor.len() != np || anchor.iter().any(|&o| o >= groupoid.object_count()) {
            return Err(ActionError::Shape("anchor must map every point to an object".into()));
        }
        if act.len() != groupoid.arrow_count() * np || act.iter().flatten().any(|&y| y >= np) {
            return Err(ActionError::Shape("action must be arrows × points".into()));
        }
        Ok(Self {
            groupoid,
            points,
            anchor,
            side,
            act,
        })
    }

    pub fn from_fn(
        groupoid: FiniteGroupoid,
        points: Vec<String>,
        anchor: Vec<usize>,
        side: Side,
        f: impl Fn(usize, usize) -> Option<usize>,
    ) -> Result<Self, ActionError> {
        let np = points.len();
        let act = (0..groupoid.arrow_count() * np).map(|i| f(i / np, i % np)).collect();
        Self::new(groupoid, points, anchor, side, act)
    }

    /// `G` acting on its arrows by left multiplication, anchored by `d`.
    pub fn left_translation(g: &FiniteGroupoid) -> Self {
        let anchor = (0..g.arrow_count()).map(|a| g.dom(a)).collect();
        Self::from_fn(g.clone(), g.arrows().to_vec(), anchor, Side::Left, |a, b| g.comp(a, b))
            .expect("translation tables are well formed")
    }

    /// `G` acting on its arrows by right multiplication, anchored by `r`.
    pub fn right_translation(g: &FiniteGroupoid) -> Self {
        let anchor = (0..g.arrow_count()).map(|a| g.cod(a)).collect();
        Self::from_fn(g.clone(), g.arrows().to_vec(), anchor, Side::Right, |a, x| g.comp(x, a))
            .expect("translation tables are well formed")
    }

    /// The canonical left action on objects, `g·r(g) = d(g)`.
    pub fn objects(g: &FiniteGroupoid) -> Self {
        let anchor = (0..g.object_count()).collect();
        Self::from_fn(g.clone(), g.objects().to_vec(), anchor, Side::Left, |a, x| {
            (g.cod(a) == x).then(|| g.dom(a))
        })
        .expect("object action is well formed")
    }

    pub fn groupoid(&self) -> &FiniteGroupoid {
        &self.groupoid
    }

    pub fn points(&self) -> &[String] {
        &self.points
    }

    pub fn point_count(&self) -> usize {
        self.points.len()
    }

    pub fn anchor(&self, x: usize) -> usize {
        self.anchor[x]
    }

    pub fn anchors(&self) -> &[usize] {
        &self.anchor
    }

    pub fn side(&self) -> Side {
        self.side
    }

    /// `g·x` for left sets, `x·g` for right sets.
    #[inline]
    pub fn act(&self, g: usize, x: usize) -> Option<usize> {
        self.act[g * self.points.len() + x]
    }

    pub fn validate(&self) -> ValidationReport {
        let g = &self.groupoid;
        let mut r = ValidationReport::new(match self.side {
            Side::Left => "left groupoid set",
            Side::Right => "right groupoid set",
        });
        let np = self.point_count();
        let na = g.arrow_count();
        let pairs = || (0..na).flat_map(move |a| (0..np).map(move |x| (a, x)));
        let (base, lands): (fn(&FiniteGroupoid, usize) -> usize, fn(&FiniteGroupoid, usize) -> usize) =
            match self.side {
                Side::Left => (FiniteGroupoid::cod, FiniteGroupoid::dom),
                Side::Right => (FiniteGroupoid::dom, FiniteGroupoid::cod),
            };
        let (defined, anchored, unit, assoc) = match self.side {
            Side::Left => ("g·x defined iff r(g) = p(x)", "p(g·x) = d(g)", "u(p(x))·x = x", "g·(h·x) = (gh)·x"),
            Side::Right => ("x·g defined iff p(x) = d(g)", "p(x·g) = r(g)", "x·u(p(x)) = x", "(x·g)·h = x·(gh)"),
        };
        r.check_all(defined, pairs(), |&(a, x)| {
            self.act(a, x).is_some() == (base(g, a) == self.anchor[x])
        });
        r.check_all(anchored, pairs(), |&(a, x)| {
            self.act(a, x).is_none_or(|y| self.anchor[y] == lands(g, a))
        });
        r.check_all(unit, 0..np, |&x| self.act(g.unit(self.anchor[x]), x) == Some(x));
        let triples = (0..na).flat_map(move |a| pairs().map(move |(b, x)| (a, b, x)));
        r.check_all(assoc, triples, |&(a, b, x)| {
            // left: a·(b·x) = (ab)·x ; right: (x·a)·b = x·(ab)
            let (first, second, composite) = match self.side {
                Side::Left => (b, a, g.comp(a, b)),
                Side::Right => (a, b, g.comp(a, b)),
            };
            match (self.act(first, x), composite) {
                (Some(y), Some(c)) => self.act(second, y) == self.act(c, x),
                _ => true,
            }
        });
        r
    }

    /// Orbits of the action, computed with union-find.
    pub fn orbits(&self) -> Vec<Vec<usize>> {
        let mut uf = UnionFind::new(self.point_count());
        for a in 0..self.groupoid.arrow_count() {
            for x in 0..self.point_count() {
                if let Some(y) = self.act(a, x) {
                    uf.union(x, y);
                }
            }
        }
        uf.classes()
    }
}

// ---- modules --------------------------------------------------------------------

/// A left or right module over a quantale, with the action stored on pairs
/// of join-irreducibles. `act(a, x)` means `a·x` for left modules and `x·a`
/// for right modules.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QModule {
    quantale: Arc<InvolutiveQuantale>,
    lattice: Arc<FiniteSupLattice>,
    act_ji: Vec<Elem>,
    side: Side,
}

impl QModule {
    pub fn new(
        quantale: Arc<InvolutiveQuantale>,
        lattice: Arc<FiniteSupLattice>,
        act_ji: Vec<Elem>,
        side: Side,
    ) -> Result<Self, ActionError> {
        if act_ji.len() != quantale.lattice().ji_count() * lattice.ji_count() {
            return Err(ActionError::Shape("action table must be JI(Q) × JI(X)".into()));
        }
        if let Some(&x) = act_ji.iter().find(|&&x| !lattice.contains(x)) {
            return Err(LatticeError::UnknownElement(x).into());
        }
        Ok(Self {
            quantale,
            lattice,
            act_ji,
            side,
        })
    }

    pub fn quantale(&self) -> &Arc<InvolutiveQuantale> {
        &self.quantale
    }

    pub fn lattice(&self) -> &FiniteSupLattice {
        &self.lattice
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn act(&self, a: Elem, x: Elem) -> Elem {
        let (ql, xl) = (self.quantale.lattice(), &*self.lattice);
        let k = xl.ji_count();
        if ql.is_powerset() && xl.is_powerset() {
            let mut out = 0;
            let mut s = a;
            while s != 0 {
                let i = s.trailing_zeros() as usize;
                s &= s - 1;
                let row = &self.act_ji[i * k..(i + 1) * k];
                let mut y = x;
                while y != 0 {
                    out |= row[y.trailing_zeros() as usize];
                    y &= y - 1;
                }
            }
            out
        } else {
            xl.join_iter(
                ql.ji_below(a)
                    .flat_map(|i| xl.ji_below(x).map(move |j| self.act_ji[i * k + j])),
            )
        }
    }

    /// Unit, associativity, sup-linearity and the anchor condition
    /// `b·x = b·1 ∧ x` for `b ≤ e`.
    pub fn validate(&self) -> ValidationReport {
        let q = &*self.quantale;
        let (ql, xl) = (q.lattice(), &*self.lattice);
        let mut r = ValidationReport::new("module");
        let (qj, xj) = (ql.join_irreducibles(), xl.join_irreducibles());
        if !(ql.is_powerset() && xl.is_powerset()) {
            let qpairs = ql.elements().flat_map(|a| ql.elements().map(move |b| (a, b)));
            r.check_all("action distributes over joins in Q", qpairs, |&(a, b)| {
                xj.iter()
                    .all(|&x| self.act(ql.join(a, b), x) == xl.join(self.act(a, x), self.act(b, x)))
            });
            let xpairs = xl.elements().flat_map(|x| xl.elements().map(move |y| (x, y)));
            r.check_all("action distributes over joins in X", xpairs, |&(x, y)| {
                qj.iter()
                    .all(|&a| self.act(a, xl.join(x, y)) == xl.join(self.act(a, x), self.act(a, y)))
            });
        }
        r.check_all("e acts as the identity", xj.iter(), |&&x| self.act(q.unit(), x) == x);
        let triples = qj
            .iter()
            .flat_map(|&a| qj.iter().flat_map(move |&b| xj.iter().map(move |&x| (a, b, x))));
        r.check_all("associativity", triples, |&(a, b, x)| match self.side {
            Side::Left => self.act(a, self.act(b, x)) == self.act(q.mult(a, b), x),
            Side::Right => self.act(b, self.act(a, x)) == self.act(q.mult(a, b), x),
        });
        let base = q.base_locale();
        let top = xl.top();
        let pairs = base.iter().flat_map(|&b| xl.elements().map(move |x| (b, x)));
        r.check_all("anchor condition b·x = b·1 ∧ x", pairs, |&(b, x)| {
            self.act(b, x) == xl.meet(self.act(b, top), x)
        });
        r
    }
}

/// The powerset module of a groupoid set over `𝒪(G)`.
pub fn module_of_gset(a: &GSet) -> Result<QModule, ActionError> {
    let q = Arc::new(quantale_of_groupoid_bounded(a.groupoid(), HARD_MAX_CARRIER)?);
    module_of_gset_over(a, q)
}

/// As [`module_of_gset`] with `𝒪(G)` supplied by the caller.
pub fn module_of_gset_over(a: &GSet, q: Arc<InvolutiveQuantale>) -> Result<QModule, ActionError> {
    let lattice = Arc::new(FiniteSupLattice::powerset_bounded(a.points().to_vec(), HARD_MAX_CARRIER)?);
    let (na, np) = (a.groupoid().arrow_count(), a.point_count());
    let act_ji = (0..na * np)
        .map(|i| a.act(i / np, i % np).map_or(0, |y| 1 << y))
        .collect();
    QModule::new(q, lattice, act_ji, a.side())
}

// ---- inverse image of the action ------------------------------------------------------

/// `𝔞*(x)` inside the powerset of composable pairs `{(g, y) : r(g) = p(y)}`.
#[derive(Clone, Debug)]
pub struct InverseImage {
    pub pairs: Vec<(usize, usize)>,
    pub value: FixedBitSet,
    pub report: ValidationReport,
}

/// Computes `𝔞*(x)` both as `⋁{ξ : 𝔞_!(ξ) ≤ x}` and as `⋁_{s ∈ Q_I} s ⊗ s*x`.
pub fn action_inverse_image(a: &GSet, x: Elem) -> Result<InverseImage, ActionError> {
    if a.side() != Side::Left {
        return Err(ActionError::NotSetDerived);
    }
    let g = a.groupoid();
    let np = a.point_count();
    if np > HARD_MAX_CARRIER || x >> np != 0 {
        return Err(LatticeError::UnknownElement(x).into());
    }
    let pairs: Vec<(usize, usize)> = (0..g.arrow_count())
        .flat_map(|h| (0..np).map(move |y| (h, y)))
        .filter(|&(h, y)| a.act(h, y).is_some())
        .collect();
    let index: HashMap<(usize, usize), usize> = pairs.iter().enumerate().map(|(i, &p)| (p, i)).collect();
    let in_x = |y: usize| x >> y & 1 == 1;
    let push = |set: &FixedBitSet| -> Elem {
        set.ones().fold(0, |acc, i| {
            let (h, y) = pairs[i];
            acc | 1 << a.act(h, y).unwrap()
        })
    };

    let mut adjoint = FixedBitSet::with_capacity(pairs.len());
    adjoint.extend((0..pairs.len()).filter(|&i| in_x(a.act(pairs[i].0, pairs[i].1).unwrap())));

    let q = quantale_of_groupoid_bounded(g, HARD_MAX_CARRIER)?;
    let module = module_of_gset_over(a, Arc::new(q.clone()))?;
    let mut via_units = FixedBitSet::with_capacity(pairs.len());
    for s in q.partial_unit_elements() {
        let z = module.act(q.invol(s), x);
        for h in (0..g.arrow_count()).filter(|&h| s >> h & 1 == 1) {
            for y in (0..np).filter(|&y| z >> y & 1 == 1) {
                if let Some(&i) = index.get(&(h, y)) {
                    via_units.insert(i);
                }
            }
        }
    }

    let mut report = ValidationReport::new("inverse image of the action");
    let name = |set: &FixedBitSet| {
        set.ones()
            .map(|i| format!("({},{})", g.arrows()[pairs[i].0], a.points()[pairs[i].1]))
            .collect::<Vec<_>>()
            .join(" ")
    };
    report.record(
        "adjoint form = partial-unit form",
        (adjoint != via_units).then(|| format!("[{}] vs [{}]", name(&adjoint), name(&via_units))),
    );
    report.record("𝔞_!(𝔞*(x)) ≤ x", (push(&adjoint) & !x != 0).then(|| name(&adjoint)));
    report.check_all("ξ ≤ 𝔞*(𝔞_!(ξ))", 0..pairs.len(), |&i| {
        let mut single = FixedBitSet::with_capacity(pairs.len());
        single.insert(i);
        let image = push(&single);
        let (h, y) = pairs[i];
        image >> a.act(h, y).unwrap() & 1 == 1
    });
    Ok(InverseImage {
        pairs,
        value: adjoint,
        report,
    })
}

// ---- invariant elements -------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct InvariantElements {
    pub elements: Vec<Elem>,
    pub report: ValidationReport,
}

impl InvariantElements {
    /// The invariant elements as a lattice ordered as in the module.
    pub fn lattice(&self, module: &QModule) -> Result<FiniteSupLattice, LatticeError> {
        let l = module.lattice();
        let n = l.size();
        let sets: Vec<FixedBitSet> = self
            .elements
            .iter()
            .map(|&x| {
                let mut s = FixedBitSet::with_capacity(n);
                s.extend(l.elements().filter(|&y| l.leq(y, x)));
                s
            })
            .collect();
        let names = self.elements.iter().map(|&x| l.element_name(x)).collect();
        FiniteSupLattice::from_sets(names, &sets, sets.len().max(1))
    }
}

/// `{x : 1·x ≤ x}`, after checking that the four characterizations agree
/// and that the result is closed under joins and meets.
pub fn invariant_elements(m: &QModule) -> InvariantElements {
    let q = &**m.quantale();
    let (ql, xl) = (q.lattice(), m.lattice());
    let top = ql.top();
    let units = q.partial_unit_elements();
    let mut r = ValidationReport::new("invariant elements");
    let mut elements = Vec::new();
    let mut disagree = None;
    for x in xl.elements() {
        let all = ql.elements().all(|a| xl.leq(m.act(a, x), x));
        let partial = units.iter().all(|&s| xl.leq(m.act(s, x), x));
        let tx = m.act(top, x);
        let below = xl.leq(tx, x);
        let equal = tx == x;
        if disagree.is_none() && !(all == partial && partial == below && below == equal) {
            disagree = Some(xl.element_name(x));
        }
        if below {
            elements.push(x);
        }
    }
    r.record("ax ≤ x ∀a ⟺ sx ≤ x ∀s ∈ Q_I ⟺ 1x ≤ x ⟺ 1x = x", disagree);
    let pairs = elements.iter().flat_map(|&x| elements.iter().map(move |&y| (x, y)));
    let inv = |z: Elem| xl.leq(m.act(top, z), z);
    r.check_all("closed under joins and meets", pairs, |&(x, y)| {
        inv(xl.join(x, y)) && inv(xl.meet(x, y))
    });
    r.record(
        "contains ⊥ and ⊤",
        (!(inv(xl.bottom()) && inv(xl.top()))).then(|| "bounds".into()),
    );
    InvariantElements { elements, report: r }
}

/// Unions of classes of a partition of `0..n`, as bitmasks, sorted.
pub fn unions_of_classes(classes: &[Vec<usize>]) -> Vec<Elem> {
    let masks: Vec<Elem> = classes
        .iter()
        .map(|c| c.iter().fold(0, |acc, &x| acc | 1 << x))
        .collect();
    let mut out: Vec<Elem> = (0..1usize << masks.len())
        .map(|sel| {
            (0..masks.len())
                .filter(|&i| sel >> i & 1 == 1)
                .fold(0, |acc, i| acc | masks[i])
        })
        .collect();
    out.sort_unstable();
    out
}

/// `s(x∧y) = sx∧sy`, `s(x∧s*y) = sx∧y` for partial units and
/// `b(x∧y) = bx∧by`, `bx∧y = x∧by` for `b ≤ e`.
pub fn check_partial_unit_laws(m: &QModule) -> ValidationReport {
    let q = &**m.quantale();
    let xl = m.lattice();
    let mut r = ValidationReport::new("partial unit laws");
    let units = q.partial_unit_elements();
    let base = q.base_locale();
    let xs = || xl.elements().flat_map(|x| xl.elements().map(move |y| (x, y)));
    let triples = |set: &[Elem]| {
        set.iter()
            .flat_map(move |&s| xs().map(move |(x, y)| (s, x, y)))
            .collect::<Vec<_>>()
    };
    let ut = triples(&units);
    r.check_all("s(x∧y) = sx∧sy", ut.iter(), |&&(s, x, y)| {
        m.act(s, xl.meet(x, y)) == xl.meet(m.act(s, x), m.act(s, y))
    });
    r.check_all("s(x∧s*y) = sx∧y", ut.iter(), |&&(s, x, y)| {
        m.act(s, xl.meet(x, m.act(q.invol(s), y))) == xl.meet(m.act(s, x), y)
    });
    let bt = triples(&base);
    r.check_all("b(x∧y) = bx∧by", bt.iter(), |&&(b, x, y)| {
        m.act(b, xl.meet(x, y)) == xl.meet(m.act(b, x), m.act(b, y))
    });
    r.check_all("bx∧y = x∧by", bt.iter(), |&&(b, x, y)| {
        xl.meet(m.act(b, x), y) == xl.meet(x, m.act(b, y))
    });
    r
}

// ---- diagonal actions and tensors -----------------------------------------------------

/// The fibred product `{(x, y) : p(x) = q(y)}` with `g·(x, y) = (x·g⁻¹, g·y)`.
#[derive(Clone, Debug)]
pub struct Diagonal {
    pub pairs: Vec<(usize, usize)>,
    pub gset: GSet,
}

pub fn diagonal_action(xr: &GSet, yl: &GSet) -> Result<Diagonal, ActionError> {
    if xr.side() != Side::Right || yl.side() != Side::Left {
        return Err(ActionError::AnchorsIncompatible("need a right set and a left set".into()));
    }
    if xr.groupoid() != yl.groupoid() {
        return Err(ActionError::AnchorsIncompatible("different groupoids".into()));
    }
    let g = xr.groupoid();
    let pairs: Vec<(usize, usize)> = (0..xr.point_count())
        .flat_map(|x| (0..yl.point_count()).map(move |y| (x, y)))
        .filter(|&(x, y)| xr.anchor(x) == yl.anchor(y))
        .collect();
    let index: HashMap<(usize, usize), usize> = pairs.iter().enumerate().map(|(i, &p)| (p, i)).collect();
    let names = pairs
        .iter()
        .map(|&(x, y)| format!("{}⊗{}", xr.points()[x], yl.points()[y]))
        .collect();
    let anchor = pairs.iter().map(|&(x, _)| xr.anchor(x)).collect();
    let gset = GSet::from_fn(g.clone(), names, anchor, Side::Left, |a, i| {
        let (x, y) = pairs[i];
        let x2 = xr.act(g.inv(a), x)?;
        let y2 = yl.act(a, y)?;
        index.get(&(x2, y2)).copied()
    })?;
    Ok(Diagonal { pairs, gset })
}

/// A finite set of Horn clauses `premises ⇒ conclusion` over `0..n`.
#[derive(Clone, Debug, Default)]
pub struct HornTheory {
    pub n: usize,
    pub clauses: Vec<(Vec<usize>, usize)>,
}

impl HornTheory {
    pub fn closure(&self, seed: &FixedBitSet) -> FixedBitSet {
        let mut cur = seed.clone();
        cur.grow(self.n);
        loop {
            let mut grew = false;
            for (prem, c) in &self.clauses {
                if !cur.contains(*c) && prem.iter().all(|&p| cur.contains(p)) {
                    cur.insert(*c);
                    grew = true;
                }
            }
            if !grew {
                return cur;
            }
        }
    }

    pub fn is_closed(&self, set: &FixedBitSet) -> bool {
        self.clauses
            .iter()
            .all(|(prem, c)| set.contains(*c) || !prem.iter().all(|&p| set.contains(p)))
    }

    /// First clause of `other` that fails in some set closed under `self`.
    pub fn first_unentailed<'a>(&self, other: &'a HornTheory) -> Option<&'a (Vec<usize>, usize)> {
        other.clauses.iter().find(|(prem, c)| {
            let mut seed = FixedBitSet::with_capacity(self.n);
            seed.extend(prem.iter().copied());
            !self.closure(&seed).contains(*c)
        })
    }

    /// All closed sets by exhaustive search, or `None` above `max_n` points.
    pub fn closed_sets(&self, max_n: usize) -> Option<Vec<FixedBitSet>> {
        if self.n > max_n {
            return None;
        }
        Some(
            (0..1u64 << self.n)
                .map(|bits| {
                    let mut s = FixedBitSet::with_capacity(self.n);
                    s.extend((0..self.n).filter(|&i| bits >> i & 1 == 1));
                    s
                })
                .filter(|s| self.is_closed(s))
                .collect(),
        )
    }
}

/// Fibred products up to this size are also compared by exhaustive search.
pub const TENSOR_BRUTE_FORCE_POINTS: usize = 12;

#[derive(Clone, Debug)]
pub struct Tensor {
    pub diagonal: Diagonal,
    /// Orbits of the diagonal action; the tensor is the powerset of these.
    pub classes: Vec<Vec<usize>>,
    pub report: ValidationReport,
}

impl Tensor {
    pub fn lattice(&self) -> Result<FiniteSupLattice, LatticeError> {
        let names = self
            .classes
            .iter()
            .map(|c| {
                let members: Vec<&str> =
                    c.iter().map(|&i| self.diagonal.gset.points()[i].as_str()).collect();
                format!("[{}]", members.join(","))
            })
            .collect();
        FiniteSupLattice::powerset_bounded(names, HARD_MAX_CARRIER)
    }
}

/// `X ⊗_{𝒪(G)} Y`, computed both as the invariants of the diagonal action and
/// as the subsets of `X ×_{G0} Y` closed under `xs⊗y ≤ ξ ⟺ x⊗sy ≤ ξ`.
pub fn tensor_over_q(xr: &GSet, yl: &GSet) -> Result<Tensor, ActionError> {
    let diagonal = diagonal_action(xr, yl)?;
    let g = xr.groupoid();
    let n = diagonal.pairs.len();
    let index: HashMap<(usize, usize), usize> =
        diagonal.pairs.iter().enumerate().map(|(i, &p)| (p, i)).collect();

    let mut invariant = HornTheory { n, clauses: Vec::new() };
    for a in 0..g.arrow_count() {
        for z in 0..n {
            if let Some(w) = diagonal.gset.act(a, z) {
                invariant.clauses.push((vec![z], w));
            }
        }
    }

    let q = quantale_of_groupoid_bounded(g, HARD_MAX_CARRIER)?;
    let mut midlin = HornTheory { n, clauses: Vec::new() };
    for s in q.partial_unit_elements() {
        let arrows: Vec<usize> = (0..g.arrow_count()).filter(|&a| s >> a & 1 == 1).collect();
        for x in 0..xr.point_count() {
            for y in 0..yl.point_count() {
                let left: Vec<usize> = arrows
                    .iter()
                    .filter_map(|&a| xr.act(a, x))
                    .filter_map(|x2| index.get(&(x2, y)).copied())
                    .collect();
                let right: Vec<usize> = arrows
                    .iter()
                    .filter_map(|&a| yl.act(a, y))
                    .filter_map(|y2| index.get(&(x, y2)).copied())
                    .collect();
                for &c in &right {
                    midlin.clauses.push((left.clone(), c));
                }
                for &c in &left {
                    midlin.clauses.push((right.clone(), c));
                }
            }
        }
    }

    let names = diagonal.gset.points();
    let show = |cl: &(Vec<usize>, usize)| {
        let prem: Vec<&str> = cl.0.iter().map(|&i| names[i].as_str()).collect();
        format!("{{{}}} ⇒ {}", prem.join(","), names[cl.1])
    };
    let mut report = ValidationReport::new("tensor");
    report.record(
        "middle-linear sets are invariant",
        midlin.first_unentailed(&invariant).map(show),
    );
    report.record(
        "invariant sets are middle-linear",
        invariant.first_unentailed(&midlin).map(show),
    );
    let classes = diagonal.gset.orbits();
    if let (Some(a), Some(b)) = (
        invariant.closed_sets(TENSOR_BRUTE_FORCE_POINTS),
        midlin.closed_sets(TENSOR_BRUTE_FORCE_POINTS),
    ) {
        report.record(
            "exhaustive: invariants = middle-linear sets",
            (a != b).then(|| format!("{} vs {} closed sets", a.len(), b.len())),
        );
        report.record(
            "exhaustive: one closed set per union of orbits",
            (a.len() != 1 << classes.len()).then(|| format!("{} closed sets, {} orbits", a.len(), classes.len())),
        );
    }
    Ok(Tensor {
        diagonal,
        classes,
        report,
    })
}

/// `𝒪(G) ⊗ 𝒪(G) ≅ 𝒪(G)` via `ξ ↦ 𝔞_!(ξ)`: each orbit of composable pairs
/// has a single product, and orbits correspond bijectively to arrows.
pub fn check_unit_tensor(g: &FiniteGroupoid) -> Result<ValidationReport, ActionError> {
    let t = tensor_over_q(&GSet::right_translation(g), &GSet::left_translation(g))?;
    let mut r = ValidationReport::new("Q ⊗_Q Q ≅ Q");
    r.merge(t.report.clone());
    let product = |i: usize| {
        let (x, y) = t.diagonal.pairs[i];
        g.comp(x, y).expect("fibred pairs compose")
    };
    let mut images = Vec::new();
    let mut constant = None;
    for c in &t.classes {
        let p = product(c[0]);
        if constant.is_none() && c.iter().any(|&i| product(i) != p) {
            constant = Some(t.diagonal.gset.points()[c[0]].clone());
        }
        images.push(p);
    }
    r.record("product is constant on orbits", constant);
    images.sort_unstable();
    r.record(
        "orbits ↔ arrows",
        (images != (0..g.arrow_count()).collect::<Vec<_>>()).then(|| format!("{images:?}")),
    );
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::names;

    fn z2() -> FiniteGroupoid {
        FiniteGroupoid::cyclic(2)
    }

    fn swap() -> GSet {
        GSet::from_fn(z2(), names(["x", "y"]), vec![0, 0], Side::Left, |g, x| Some(if g == 1 { 1 - x } else { x }))
            .unwrap()
    }

    #[test]
    fn translations_are_valid() {
        for g in [z2(), FiniteGroupoid::pair(names(["0", "1"])).unwrap()] {
            for a in [GSet::left_translation(&g), GSet::right_translation(&g), GSet::objects(&g)] {
                let r = a.validate();
                assert!(r.is_valid(), "{r}");
                let m = module_of_gset(&a).unwrap();
                let r = m.validate();
                assert!(r.is_valid(), "{r}");
            }
        }
    }

    #[test]
    fn wrong_anchor_is_rejected() {
        let p2 = FiniteGroupoid::pair(names(["0", "1"])).unwrap();
        let anchor = (0..4).map(|a| p2.cod(a)).collect();
        let bad = GSet::from_fn(p2.clone(), p2.arrows().to_vec(), anchor, Side::Left, |a, b| p2.comp(a, b)).unwrap();
        assert!(!bad.validate().is_valid());
    }

    #[test]
    fn swap_module() {
        let m = module_of_gset(&swap()).unwrap();
        assert_eq!(m.act(0b10, 0b01), 0b10);
        let inv = invariant_elements(&m);
        assert!(inv.report.is_valid());
        assert_eq!(inv.elements, vec![0b00, 0b11]);
    }

    #[test]
    fn invariant_examples() {
        let m = module_of_gset(&GSet::left_translation(&z2())).unwrap();
        assert_eq!(invariant_elements(&m).elements, vec![0, 3]);
        let p2 = FiniteGroupoid::pair(names(["0", "1"])).unwrap();
        let a = GSet::left_translation(&p2);
        let inv = invariant_elements(&module_of_gset(&a).unwrap());
        assert_eq!(inv.elements.len(), 4);
        assert_eq!(inv.elements, unions_of_classes(&a.orbits()));
        // the discrete groupoid on one object acting trivially
        let d1 = FiniteGroupoid::discrete(names(["x"])).unwrap();
        let t = GSet::from_fn(d1, names(["p", "q"]), vec![0, 0], Side::Left, |_, x| Some(x)).unwrap();
        assert_eq!(invariant_elements(&module_of_gset(&t).unwrap()).elements.len(), 4);
    }

    #[test]
    fn inverse_image_examples() {
        let a = GSet::left_translation(&z2());
        let r = action_inverse_image(&a, 0b00).unwrap();
        assert!(r.report.is_valid());
        assert_eq!(r.value.count_ones(..), 0);
        let r = action_inverse_image(&a, 0b01).unwrap();
        assert!(r.report.is_valid(), "{}", r.report);
        let got: Vec<(usize, usize)> = r.value.ones().map(|i| r.pairs[i]).collect();
        assert_eq!(got, vec![(0, 0), (1, 1)]);
        assert_eq!(action_inverse_image(&a, 0b11).unwrap().value.count_ones(..), 4);
    }

    #[test]
    fn partial_unit_laws_hold() {
        let m = module_of_gset(&GSet::left_translation(&z2())).unwrap();
        assert!(check_partial_unit_laws(&m).is_valid());
        let p2 = FiniteGroupoid::pair(names(["0", "1"])).unwrap();
        let m = module_of_gset(&GSet::left_translation(&p2)).unwrap();
        assert!(check_partial_unit_laws(&m).is_valid());
    }

    #[test]
    fn diagonal_of_z2() {
        let g = z2();
        let d = diagonal_action(&GSet::right_translation(&g), &GSet::left_translation(&g)).unwrap();
        assert_eq!(d.pairs.len(), 4);
        // s·(e, e) = (e·s⁻¹, s·e) = (s, s)
        let i = d.pairs.iter().position(|&p| p == (0, 0)).unwrap();
        assert_eq!(d.pairs[d.gset.act(1, i).unwrap()], (1, 1));
        assert!(d.gset.validate().is_valid());
        assert!(module_of_gset(&d.gset).unwrap().validate().is_valid());
    }

    #[test]
    fn unit_tensors() {
        for g in [z2(), FiniteGroupoid::pair(names(["0", "1"])).unwrap()] {
            let r = check_unit_tensor(&g).unwrap();
            assert!(r.is_valid(), "{r}");
        }
        let p2 = FiniteGroupoid::pair(names(["0", "1"])).unwrap();
        let t = tensor_over_q(&GSet::right_translation(&p2), &GSet::left_translation(&p2)).unwrap();
        assert_eq!(t.lattice().unwrap().size(), 16);
    }

    #[test]
    fn tensor_with_swap_set() {
        let t = tensor_over_q(&GSet::right_translation(&z2()), &swap()).unwrap();
        assert!(t.report.is_valid(), "{}", t.report);
        assert_eq!(t.classes.len(), 2);
    }

    #[test]
    fn horn_closure() {
        let th = HornTheory {
            n: 3,
            clauses: vec![(vec![0, 1], 2), (vec![2], 0)],
        };
        let mut s = FixedBitSet::with_capacity(3);
        s.insert(2);
        assert_eq!(th.closure(&s).ones().collect::<Vec<_>>(), vec![0, 2]);
        assert_eq!(th.closed_sets(3).unwrap().len(), 5);
    }
}
