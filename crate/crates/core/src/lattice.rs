//! Finite sup-lattices, frames, join-preserving maps and Galois adjoints.
//!
//! Every lattice element is an index ([`Elem`]). Powerset lattices use the
//! subset bitmask itself as the index (bit `i` is the `i`-th carrier point),
//! so joins and meets are single bit operations. Explicit lattices carry
//! precomputed join/meet tables.
//!
//! Join-irreducible elements are cached per lattice. Multiplications, actions
//! and homomorphisms elsewhere in the crate are stored on join-irreducibles and
//! extended by joins.

use std::fmt;
use std::sync::Arc;

use fixedbitset::FixedBitSet;
use thiserror::Error;

pub type Elem = usize;

/// Default bound on the carrier of a powerset lattice.
pub const DEFAULT_MAX_CARRIER: usize = 16;
/// Default bound on the number of elements of an explicit lattice.
pub const DEFAULT_MAX_ELEMENTS: usize = 256;
/// Hard limit on powerset carriers: elements are `u64` masks stored densely.
pub const HARD_MAX_CARRIER: usize = 24;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LatticeError {
    #[error("carrier of size {size} exceeds the bound {bound}")]
    CarrierTooLarge { size: usize, bound: usize },
    #[error("lattice with {size} elements exceeds the bound {bound}")]
    TooLarge { size: usize, bound: usize },
    #[error("unknown element {0}")]
    UnknownElement(Elem),
    #[error("duplicate element name {0:?}")]
    DuplicateName(String),
    #[error("order is not antisymmetric: {0:?} and {1:?}")]
    NotAntisymmetric(String, String),
    #[error("elements {0:?} and {1:?} have no least upper bound")]
    NoJoin(String, String),
    #[error("elements {0:?} and {1:?} have no greatest lower bound")]
    NoMeet(String, String),
    #[error("a lattice needs at least one element")]
    Empty,
    #[error("search space of {needed} candidates exceeds the budget of {budget}")]
    SearchBudgetExceeded { needed: u128, budget: u64 },
}

#[derive(Clone, Debug)]
enum Kind {
    Powerset { carrier: Vec<String> },
    Explicit(Box<Explicit>),
}

#[derive(Clone, Debug)]
struct Explicit {
    names: Vec<String>,
    /// `up[a]` = { c : a ≤ c }.
    up: Vec<FixedBitSet>,
    join: Vec<Elem>,
    meet: Vec<Elem>,
    bottom: Elem,
    top: Elem,
    /// Positions (into `jis`) of the join-irreducibles below each element.
    below_ji: Vec<Vec<usize>>,
}

/// A finite complete lattice.
#[derive(Clone, Debug)]
pub struct FiniteSupLattice {
    kind: Kind,
    jis: Vec<Elem>,
}

impl PartialEq for FiniteSupLattice {
    fn eq(&self, other: &Self) -> bool {
        match (&self.kind, &other.kind) {
            (Kind::Powerset { carrier: a }, Kind::Powerset { carrier: b }) => a == b,
            (Kind::Explicit(a), Kind::Explicit(b)) => a.names == b.names && a.up == b.up,
            _ => false,
        }
    }
}

impl Eq for FiniteSupLattice {}

/// Iterator over positions of join-irreducibles below an element.
pub enum JiIter<'a> {
    Bits(u64),
    Slice(std::slice::Iter<'a, usize>),
}

impl Iterator for JiIter<'_> {
    type Item = usize;

    #[inline]
    fn next(&mut self) -> Option<usize> {
        match self {
            JiIter::Bits(bits) => {
                if *bits == 0 {
                    None
                } else {
                    let i = bits.trailing_zeros() as usize;
                    *bits &= *bits - 1;
                    Some(i)
                }
            }
            JiIter::Slice(it) => it.next().copied(),
        }
    }
}

impl FiniteSupLattice {
    /// The lattice of all subsets of `carrier`, bounded by [`DEFAULT_MAX_CARRIER`].
    pub fn powerset(carrier: Vec<String>) -> Result<Self, LatticeError> {
        Self::powerset_bounded(carrier, DEFAULT_MAX_CARRIER)
    }

    pub fn powerset_bounded(carrier: Vec<String>, bound: usize) -> Result<Self, LatticeError> {
        let bound = bound.min(HARD_MAX_CARRIER);
        if carrier.len() > bound {
            return Err(LatticeError::CarrierTooLarge {
                size: carrier.len(),
                bound,
            });
        }
        check_unique(&carrier)?;
        let jis = (0..carrier.len()).map(|i| 1usize << i).collect();
        Ok(Self {
            kind: Kind::Powerset { carrier },
            jis,
        })
    }

    /// Builds a lattice from generating order pairs `(i, j)` meaning `i ≤ j`.
    /// The reflexive-transitive closure is taken; antisymmetry and the
    /// existence of all binary joins and meets are checked.
    pub fn explicit(names: Vec<String>, leq: &[(usize, usize)]) -> Result<Self, LatticeError> {
        Self::explicit_bounded(names, leq, DEFAULT_MAX_ELEMENTS)
    }

    pub fn explicit_bounded(
        names: Vec<String>,
        leq: &[(usize, usize)],
        bound: usize,
    ) -> Result<Self, LatticeError> {
        let n = names.len();
        for &(a, b) in leq {
            if a >= n {
                return Err(LatticeError::UnknownElement(a));
            }
            if b >= n {
                return Err(LatticeError::UnknownElement(b));
            }
        }
        let mut up: Vec<FixedBitSet> = (0..n)
            .map(|a| {
                let mut s = FixedBitSet::with_capacity(n);
                s.insert(a);
                s
            })
            .collect();
        for &(a, b) in leq {
            up[a].insert(b);
        }
        // Warshall closure on up-sets.
        for k in 0..n {
            let upk = up[k].clone();
            for row in up.iter_mut() {
                if row.contains(k) {
                    row.union_with(&upk);
                }
            }
        }
        Self::from_up_sets(names, up, bound)
    }

    /// Builds the lattice of the given sets ordered by inclusion.
    pub fn from_sets(
        names: Vec<String>,
        sets: &[FixedBitSet],
        bound: usize,
    ) -> Result<Self, LatticeError> {
        let n = sets.len();
        let up = (0..n)
            .map(|a| {
                let mut s = FixedBitSet::with_capacity(n);
                for b in 0..n {
                    if sets[a].is_subset(&sets[b]) {
                        s.insert(b);
                    }
                }
                s
            })
            .collect();
        Self::from_up_sets(names, up, bound)
    }

    fn from_up_sets(
        names: Vec<String>,
        up: Vec<FixedBitSet>,
        bound: usize,
    ) -> Result<Self, LatticeError> {
        let n = names.len();
        if n == 0 {
            return Err(LatticeError::Empty);
        }
        if n > bound {
            return Err(LatticeError::TooLarge { size: n, bound });
        }
        check_unique(&names)?;
        for a in 0..n {
            for b in up[a].ones() {
                if b != a && up[b].contains(a) {
                    return Err(LatticeError::NotAntisymmetric(
                        names[a].clone(),
                        names[b].clone(),
                    ));
                }
            }
        }
        let mut down: Vec<FixedBitSet> = vec![FixedBitSet::with_capacity(n); n];
        for a in 0..n {
            for b in up[a].ones() {
                down[b].insert(a);
            }
        }
        let down_count: Vec<usize> = down.iter().map(|d| d.count_ones(..)).collect();
        let up_count: Vec<usize> = up.iter().map(|u| u.count_ones(..)).collect();

        let least_of = |set: &FixedBitSet, up: &[FixedBitSet]| -> Option<Elem> {
            let cand = set.ones().min_by_key(|&c| down_count[c])?;
            set.is_subset(&up[cand]).then_some(cand)
        };
        let greatest_of = |set: &FixedBitSet, down: &[FixedBitSet]| -> Option<Elem> {
            let cand = set.ones().min_by_key(|&c| up_count[c])?;
            set.is_subset(&down[cand]).then_some(cand)
        };

        let mut join = vec![0; n * n];
        let mut meet = vec![0; n * n];
        for a in 0..n {
            for b in a..n {
                let mut ub = up[a].clone();
                ub.intersect_with(&up[b]);
                let j = least_of(&ub, &up)
                    .ok_or_else(|| LatticeError::NoJoin(names[a].clone(), names[b].clone()))?;
                let mut lb = down[a].clone();
                lb.intersect_with(&down[b]);
                let m = greatest_of(&lb, &down)
                    .ok_or_else(|| LatticeError::NoMeet(names[a].clone(), names[b].clone()))?;
                join[a * n + b] = j;
                join[b * n + a] = j;
                meet[a * n + b] = m;
                meet[b * n + a] = m;
            }
        }
        let mut all = FixedBitSet::with_capacity(n);
        all.insert_range(..);
        let bottom = least_of(&all, &up).expect("finite lattice has a bottom");
        let top = greatest_of(&all, &down).expect("finite lattice has a top");

        // x is join-irreducible iff x ≠ ⊥ and the join of everything strictly below x is not x.
        let mut jis = Vec::new();
        for x in 0..n {
            if x == bottom {
                continue;
            }
            let below = down[x]
                .ones()
                .filter(|&y| y != x)
                .fold(bottom, |acc, y| join[acc * n + y]);
            if below != x {
                jis.push(x);
            }
        }
        let below_ji = (0..n)
            .map(|x| {
                jis.iter()
                    .enumerate()
                    .filter(|(_, &j)| down[x].contains(j))
                    .map(|(p, _)| p)
                    .collect()
            })
            .collect();
        Ok(Self {
            kind: Kind::Explicit(Box::new(Explicit {
                names,
                up,
                join,
                meet,
                bottom,
                top,
                below_ji,
            })),
            jis,
        })
    }

    /// A chain `0 < 1 < ... < n-1` with the given names.
    pub fn chain(names: Vec<String>) -> Result<Self, LatticeError> {
        let pairs: Vec<_> = (1..names.len()).map(|i| (i - 1, i)).collect();
        Self::explicit(names, &pairs)
    }

    pub fn size(&self) -> usize {
        match &self.kind {
            Kind::Powerset { carrier } => 1 << carrier.len(),
            Kind::Explicit(e) => e.names.len(),
        }
    }

    pub fn elements(&self) -> std::ops::Range<Elem> {
        0..self.size()
    }

    pub fn contains(&self, x: Elem) -> bool {
        x < self.size()
    }

    pub fn is_powerset(&self) -> bool {
        matches!(self.kind, Kind::Powerset { .. })
    }

    pub fn carrier(&self) -> Option<&[String]> {
        match &self.kind {
            Kind::Powerset { carrier } => Some(carrier),
            Kind::Explicit(_) => None,
        }
    }

    #[inline]
    pub fn bottom(&self) -> Elem {
        match &self.kind {
            Kind::Powerset { .. } => 0,
            Kind::Explicit(e) => e.bottom,
        }
    }

    #[inline]
    pub fn top(&self) -> Elem {
        match &self.kind {
            Kind::Powerset { carrier } => (1 << carrier.len()) - 1,
            Kind::Explicit(e) => e.top,
        }
    }

    #[inline]
    pub fn leq(&self, a: Elem, b: Elem) -> bool {
        match &self.kind {
            Kind::Powerset { .. } => a & !b == 0,
            Kind::Explicit(e) => e.up[a].contains(b),
        }
    }

    #[inline]
    pub fn join(&self, a: Elem, b: Elem) -> Elem {
        match &self.kind {
            Kind::Powerset { .. } => a | b,
            Kind::Explicit(e) => e.join[a * e.names.len() + b],
        }
    }

    #[inline]
    pub fn meet(&self, a: Elem, b: Elem) -> Elem {
        match &self.kind {
            Kind::Powerset { .. } => a & b,
            Kind::Explicit(e) => e.meet[a * e.names.len() + b],
        }
    }

    /// Least upper bound of a set; the empty join is ⊥.
    pub fn join_all(&self, set: &[Elem]) -> Result<Elem, LatticeError> {
        self.check_all(set)?;
        Ok(self.join_iter(set.iter().copied()))
    }

    /// Greatest lower bound of a set; the empty meet is ⊤.
    pub fn meet_all(&self, set: &[Elem]) -> Result<Elem, LatticeError> {
        self.check_all(set)?;
        Ok(set.iter().fold(self.top(), |acc, &x| self.meet(acc, x)))
    }

    #[inline]
    pub fn join_iter(&self, it: impl IntoIterator<Item = Elem>) -> Elem {
        it.into_iter()
            .fold(self.bottom(), |acc, x| self.join(acc, x))
    }

    fn check_all(&self, set: &[Elem]) -> Result<(), LatticeError> {
        match set.iter().find(|&&x| !self.contains(x)) {
            Some(&x) => Err(LatticeError::UnknownElement(x)),
            None => Ok(()),
        }
    }

    /// The join-irreducible elements, in canonical order.
    pub fn join_irreducibles(&self) -> &[Elem] {
        &self.jis
    }

    pub fn ji_count(&self) -> usize {
        self.jis.len()
    }

    #[inline]
    pub fn ji(&self, pos: usize) -> Elem {
        self.jis[pos]
    }

    /// Positions of the join-irreducibles below `x`; their join is `x`.
    #[inline]
    pub fn ji_below(&self, x: Elem) -> JiIter<'_> {
        match &self.kind {
            Kind::Powerset { .. } => JiIter::Bits(x as u64),
            Kind::Explicit(e) => JiIter::Slice(e.below_ji[x].iter()),
        }
    }

    /// Position of `x` among the join-irreducibles, if it is one.
    pub fn ji_position(&self, x: Elem) -> Option<usize> {
        match &self.kind {
            Kind::Powerset { .. } => x.is_power_of_two().then(|| x.trailing_zeros() as usize),
            Kind::Explicit(_) => self.jis.iter().position(|&j| j == x),
        }
    }

    /// Elements covering ⊥.
    pub fn atoms(&self) -> Vec<Elem> {
        let bot = self.bottom();
        self.jis
            .iter()
            .copied()
            .filter(|&j| self.elements().all(|y| y == bot || y == j || !self.leq(y, j)))
            .collect()
    }

    pub fn element_name(&self, x: Elem) -> String {
        match &self.kind {
            Kind::Powerset { carrier } => {
                let parts: Vec<&str> = JiIter::Bits(x as u64)
                    .map(|i| carrier[i].as_str())
                    .collect();
                format!("{{{}}}", parts.join(","))
            }
            Kind::Explicit(e) => e.names[x].clone(),
        }
    }

    /// Looks up an explicit element by name, or a powerset element by the
    /// names of its points.
    pub fn element_by_name(&self, name: &str) -> Option<Elem> {
        match &self.kind {
            Kind::Powerset { carrier } => carrier
                .iter()
                .position(|c| c == name)
                .map(|i| 1usize << i),
            Kind::Explicit(e) => e.names.iter().position(|n| n == name),
        }
    }

    pub fn subset_of(&self, points: &[&str]) -> Option<Elem> {
        let carrier = self.carrier()?;
        points.iter().try_fold(0usize, |acc, p| {
            carrier.iter().position(|c| c == p).map(|i| acc | (1 << i))
        })
    }

    pub fn explicit_names(&self) -> Option<&[String]> {
        match &self.kind {
            Kind::Explicit(e) => Some(&e.names),
            Kind::Powerset { .. } => None,
        }
    }

    /// Generating order pairs (the full order relation minus reflexive pairs).
    pub fn order_pairs(&self) -> Vec<(Elem, Elem)> {
        let mut out = Vec::new();
        for a in self.elements() {
            for b in self.elements() {
                if a != b && self.leq(a, b) {
                    out.push((a, b));
                }
            }
        }
        out
    }

    /// Checks binary distributivity `x ∧ (y ∨ z) = (x ∧ y) ∨ (x ∧ z)`, which
    /// is the full frame law for finite lattices.
    pub fn validate_frame(&self) -> FrameReport {
        if self.is_powerset() {
            return FrameReport {
                is_frame: true,
                counterexample: None,
            };
        }
        for x in self.elements() {
            for y in self.elements() {
                for z in self.elements() {
                    let lhs = self.meet(x, self.join(y, z));
                    let rhs = self.join(self.meet(x, y), self.meet(x, z));
                    if lhs != rhs {
                        return FrameReport {
                            is_frame: false,
                            counterexample: Some((x, y, z)),
                        };
                    }
                }
            }
        }
        FrameReport {
            is_frame: true,
            counterexample: None,
        }
    }

    /// Distributive and complemented.
    pub fn is_boolean(&self) -> bool {
        if self.is_powerset() {
            return true;
        }
        if !self.validate_frame().is_frame {
            return false;
        }
        let (bot, top) = (self.bottom(), self.top());
        self.elements().all(|x| {
            self.elements()
                .any(|y| self.meet(x, y) == bot && self.join(x, y) == top)
        })
    }

    /// Number of elements below `x`, used as an isomorphism invariant.
    fn down_count(&self, x: Elem) -> usize {
        self.elements().filter(|&y| self.leq(y, x)).count()
    }
}

fn check_unique(names: &[String]) -> Result<(), LatticeError> {
    let mut seen = std::collections::HashSet::new();
    for n in names {
        if !seen.insert(n.as_str()) {
            return Err(LatticeError::DuplicateName(n.clone()));
        }
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FrameReport {
    pub is_frame: bool,
    pub counterexample: Option<(Elem, Elem, Elem)>,
}

/// A join-preserving map between finite lattices, stored as a full table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SupHom {
    pub source: Arc<FiniteSupLattice>,
    pub target: Arc<FiniteSupLattice>,
    pub map: Vec<Elem>,
}

impl SupHom {
    /// Extends images of the source's join-irreducibles by joins. The result
    /// is only join-preserving if the assignment is consistent; see
    /// [`SupHom::is_join_preserving`].
    pub fn from_ji_images(
        source: Arc<FiniteSupLattice>,
        target: Arc<FiniteSupLattice>,
        images: &[Elem],
    ) -> Self {
        let map = source
            .elements()
            .map(|x| target.join_iter(source.ji_below(x).map(|p| images[p])))
            .collect();
        Self {
            source,
            target,
            map,
        }
    }

    pub fn identity(l: Arc<FiniteSupLattice>) -> Self {
        let map = l.elements().collect();
        Self {
            source: l.clone(),
            target: l,
            map,
        }
    }

    #[inline]
    pub fn apply(&self, x: Elem) -> Elem {
        self.map[x]
    }

    pub fn is_monotone(&self) -> bool {
        monotone(&self.source, &self.target, &self.map)
    }

    pub fn is_join_preserving(&self) -> bool {
        let (s, t) = (&*self.source, &*self.target);
        self.map[s.bottom()] == t.bottom()
            && s.elements().all(|a| {
                s.elements()
                    .all(|b| self.map[s.join(a, b)] == t.join(self.map[a], self.map[b]))
            })
    }

    pub fn preserves_finite_meets(&self) -> bool {
        let (s, t) = (&*self.source, &*self.target);
        self.map[s.top()] == t.top()
            && s.elements().all(|a| {
                s.elements()
                    .all(|b| self.map[s.meet(a, b)] == t.meet(self.map[a], self.map[b]))
            })
    }

    pub fn compose(&self, after: &SupHom) -> SupHom {
        SupHom {
            source: self.source.clone(),
            target: after.target.clone(),
            map: self.map.iter().map(|&x| after.map[x]).collect(),
        }
    }
}

fn monotone(s: &FiniteSupLattice, t: &FiniteSupLattice, map: &[Elem]) -> bool {
    s.elements().all(|a| {
        s.elements()
            .all(|b| !s.leq(a, b) || t.leq(map[a], map[b]))
    })
}

/// Left adjoint of a monotone map `h: source → target`, i.e. the map
/// `g(x) = ⋀{ y : x ≤ h(y) }` provided `g(x) ≤ y ⟺ x ≤ h(y)` holds for all
/// `x, y`. Returns `None` when `h` has no left adjoint.
pub fn compute_left_adjoint(
    source: &Arc<FiniteSupLattice>,
    target: &Arc<FiniteSupLattice>,
    h: &[Elem],
) -> Option<SupHom> {
    if !monotone(source, target, h) {
        return None;
    }
    let g: Vec<Elem> = target
        .elements()
        .map(|x| {
            source
                .elements()
                .filter(|&y| target.leq(x, h[y]))
                .fold(source.top(), |acc, y| source.meet(acc, y))
        })
        .collect();
    let adjoint = target.elements().all(|x| {
        source
            .elements()
            .all(|y| source.leq(g[x], y) == target.leq(x, h[y]))
    });
    adjoint.then(|| SupHom {
        source: target.clone(),
        target: source.clone(),
        map: g,
    })
}

/// All join-preserving maps `l → m` accepted by `filter`. A candidate is an
/// arbitrary assignment of images to the join-irreducibles of `l`, extended
/// by joins and then checked for join preservation.
pub fn enumerate_sup_homs(
    l: &Arc<FiniteSupLattice>,
    m: &Arc<FiniteSupLattice>,
    filter: impl Fn(&SupHom) -> bool,
    budget: u64,
) -> Result<Vec<SupHom>, LatticeError> {
    let k = l.ji_count();
    let needed = (m.size() as u128).checked_pow(k as u32).unwrap_or(u128::MAX);
    if needed > budget as u128 {
        return Err(LatticeError::SearchBudgetExceeded { needed, budget });
    }
    let mut out = Vec::new();
    let mut images = vec![m.bottom(); k];
    let mut digits = vec![0usize; k];
    loop {
        for (img, &d) in images.iter_mut().zip(&digits) {
            *img = d;
        }
        let h = SupHom::from_ji_images(l.clone(), m.clone(), &images);
        if h.is_join_preserving() && filter(&h) {
            out.push(h);
        }
        // odometer
        let mut i = 0;
        loop {
            if i == k {
                return Ok(out);
            }
            digits[i] += 1;
            if digits[i] < m.size() {
                break;
            }
            digits[i] = 0;
            i += 1;
        }
    }
}

/// Searches for an order isomorphism `l → m`, matching join-irreducibles
/// first (pruned by the number of elements below and the order among already
/// matched join-irreducibles) and verifying the join-extension at the leaves.
pub fn find_isomorphism(l: &FiniteSupLattice, m: &FiniteSupLattice) -> Option<Vec<Elem>> {
    if l.size() != m.size() || l.ji_count() != m.ji_count() {
        return None;
    }
    let lj = l.join_irreducibles();
    let mj = m.join_irreducibles();
    let ld: Vec<usize> = lj.iter().map(|&j| l.down_count(j)).collect();
    let md: Vec<usize> = mj.iter().map(|&j| m.down_count(j)).collect();
    let mut assign = vec![usize::MAX; lj.len()];
    let mut used = vec![false; mj.len()];

    fn rec(
        i: usize,
        l: &FiniteSupLattice,
        m: &FiniteSupLattice,
        ld: &[usize],
        md: &[usize],
        assign: &mut [usize],
        used: &mut [bool],
    ) -> Option<Vec<Elem>> {
        let lj = l.join_irreducibles();
        let mj = m.join_irreducibles();
        if i == lj.len() {
            let map: Vec<Elem> = l
                .elements()
                .map(|x| m.join_iter(l.ji_below(x).map(|p| mj[assign[p]])))
                .collect();
            let mut hit = vec![false; m.size()];
            for &y in &map {
                if hit[y] {
                    return None;
                }
                hit[y] = true;
            }
            let iso = l.elements().all(|a| {
                l.elements()
                    .all(|b| l.leq(a, b) == m.leq(map[a], map[b]))
            });
            return iso.then_some(map);
        }
        for c in 0..mj.len() {
            if used[c] || md[c] != ld[i] {
                continue;
            }
            let consistent = (0..i).all(|p| {
                l.leq(lj[p], lj[i]) == m.leq(mj[assign[p]], mj[c])
                    && l.leq(lj[i], lj[p]) == m.leq(mj[c], mj[assign[p]])
            });
            if !consistent {
                continue;
            }
            assign[i] = c;
            used[c] = true;
            if let Some(found) = rec(i + 1, l, m, ld, md, assign, used) {
                return Some(found);
            }
            used[c] = false;
        }
        None
    }

    rec(0, l, m, &ld, &md, &mut assign, &mut used)
}

impl fmt::Display for FiniteSupLattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            Kind::Powerset { carrier } => write!(f, "P({{{}}})", carrier.join(",")),
            Kind::Explicit(e) => write!(f, "lattice[{}]", e.names.join(",")),
        }
    }
}

/// Helper for tests and generators: string names from displayable items.
pub fn names<I, T>(items: I) -> Vec<String>
where
    I: IntoIterator<Item = T>,
    T: ToString,
{
    items.into_iter().map(|t| t.to_string()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(carrier: &[&str]) -> Arc<FiniteSupLattice> {
        Arc::new(FiniteSupLattice::powerset(names(carrier)).unwrap())
    }

    fn m3() -> FiniteSupLattice {
        FiniteSupLattice::explicit(
            names(["0", "a", "b", "c", "1"]),
            &[(0, 1), (0, 2), (0, 3), (1, 4), (2, 4), (3, 4)],
        )
        .unwrap()
    }

    /// Independent brute-force distributivity check, returning the
    /// lexicographically first failing triple.
    fn brute_distributivity(l: &FiniteSupLattice) -> Option<(Elem, Elem, Elem)> {
        let n = l.size();
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    // compute joins/meets from the order alone
                    let lub = |a: Elem, b: Elem| {
                        (0..n)
                            .filter(|&u| l.leq(a, u) && l.leq(b, u))
                            .find(|&u| (0..n).all(|v| !(l.leq(a, v) && l.leq(b, v)) || l.leq(u, v)))
                            .unwrap()
                    };
                    let glb = |a: Elem, b: Elem| {
                        (0..n)
                            .filter(|&u| l.leq(u, a) && l.leq(u, b))
                            .find(|&u| (0..n).all(|v| !(l.leq(v, a) && l.leq(v, b)) || l.leq(v, u)))
                            .unwrap()
                    };
                    if glb(x, lub(y, z)) != lub(glb(x, y), glb(x, z)) {
                        return Some((x, y, z));
                    }
                }
            }
        }
        None
    }

    #[test]
    fn powerset_sizes() {
        assert_eq!(p(&[]).size(), 1);
        assert_eq!(p(&[]).top(), p(&[]).bottom());
        let one = p(&["x"]);
        assert_eq!(one.size(), 2);
        assert!(one.leq(one.bottom(), one.top()));
        let two = p(&["0", "1"]);
        assert_eq!(two.size(), 4);
        assert_eq!(two.atoms().len(), 2);
        assert_eq!(two.carrier().unwrap(), &names(["0", "1"])[..]);
    }

    #[test]
    fn carrier_bound_is_enforced() {
        let carrier = names(0..17);
        assert_eq!(
            FiniteSupLattice::powerset(carrier),
            Err(LatticeError::CarrierTooLarge { size: 17, bound: 16 })
        );
        assert!(FiniteSupLattice::powerset_bounded(names(0..3), 2).is_err());
    }

    #[test]
    fn frame_check() {
        assert!(p(&["0", "1"]).validate_frame().is_frame);
        let m = m3();
        let r = m.validate_frame();
        assert!(!r.is_frame);
        // brute force over all triples: first failure is (a, b, c)
        assert_eq!(brute_distributivity(&m), Some((1, 2, 3)));
        assert_eq!(r.counterexample, Some((1, 2, 3)));
        let chain = FiniteSupLattice::chain(names(["0", "m", "1"])).unwrap();
        assert_eq!(brute_distributivity(&chain), None);
        assert!(chain.validate_frame().is_frame);
        assert!(!chain.is_boolean());
    }

    #[test]
    fn joins_and_meets() {
        let l = p(&["0", "1"]);
        assert_eq!(l.join_all(&[0b01, 0b10]).unwrap(), 0b11);
        assert_eq!(l.meet_all(&[]).unwrap(), l.top());
        assert_eq!(l.join_all(&[]).unwrap(), l.bottom());
        assert_eq!(l.join_all(&[9]), Err(LatticeError::UnknownElement(9)));
        let c4 = FiniteSupLattice::chain(names(["0", "a", "b", "1"])).unwrap();
        assert_eq!(c4.join_all(&[1, 2]).unwrap(), 2);
        assert_eq!(c4.meet_all(&[1, 2]).unwrap(), 1);
    }

    #[test]
    fn explicit_rejects_non_lattices() {
        // two incomparable maximal elements: no join
        let r = FiniteSupLattice::explicit(names(["0", "a", "b"]), &[(0, 1), (0, 2)]);
        assert!(matches!(r, Err(LatticeError::NoJoin(..))));
        let r = FiniteSupLattice::explicit(names(["a", "b"]), &[(0, 1), (1, 0)]);
        assert!(matches!(r, Err(LatticeError::NotAntisymmetric(..))));
    }

    #[test]
    fn join_irreducibles_of_m3_and_chain() {
        assert_eq!(m3().join_irreducibles(), &[1, 2, 3]);
        let c4 = FiniteSupLattice::chain(names(["0", "a", "b", "1"])).unwrap();
        assert_eq!(c4.join_irreducibles(), &[1, 2, 3]);
        assert_eq!(c4.ji_below(2).collect::<Vec<_>>(), vec![0, 1]);
    }

    #[test]
    fn left_adjoints() {
        let l = p(&["0", "1"]);
        let id: Vec<Elem> = l.elements().collect();
        let g = compute_left_adjoint(&l, &l, &id).unwrap();
        assert_eq!(g.map, id);

        // preimage of the map {0,1} → {*}: ∅ ↦ ∅, {*} ↦ {0,1}
        let star = p(&["*"]);
        let h = vec![0b00, 0b11];
        let g = compute_left_adjoint(&star, &l, &h).unwrap();
        // direct image: ∅ ↦ ∅, {0} ↦ {*}, {1} ↦ {*}, {0,1} ↦ {*}
        assert_eq!(g.map, vec![0, 1, 1, 1]);
        // brute-force adjunction check
        for x in l.elements() {
            for y in star.elements() {
                assert_eq!(star.leq(g.map[x], y), l.leq(x, h[y]));
            }
        }

        // constant-⊥ on the 2-chain does not preserve ⊤, so no left adjoint
        let c2 = p(&["x"]);
        assert!(compute_left_adjoint(&c2, &c2, &[0, 0]).is_none());
        // constant-⊤ preserves all meets: its left adjoint is constant-⊥
        let g = compute_left_adjoint(&c2, &c2, &[1, 1]).unwrap();
        assert_eq!(g.map, vec![0, 0]);
    }

    #[test]
    fn sup_hom_counts() {
        let c2 = p(&["x"]);
        assert_eq!(enumerate_sup_homs(&c2, &c2, |_| true, 1 << 20).unwrap().len(), 2);
        let b4 = p(&["0", "1"]);
        assert_eq!(enumerate_sup_homs(&b4, &b4, |_| true, 1 << 20).unwrap().len(), 16);
        let one = p(&[]);
        assert_eq!(enumerate_sup_homs(&one, &b4, |_| true, 1 << 20).unwrap().len(), 1);
        let big = p(&["a", "b", "c", "d"]);
        assert!(matches!(
            enumerate_sup_homs(&big, &big, |_| true, 1000),
            Err(LatticeError::SearchBudgetExceeded { .. })
        ));
    }

    #[test]
    fn isomorphism_search() {
        let b4 = p(&["0", "1"]);
        let explicit_b4 = FiniteSupLattice::explicit(
            names(["bot", "l", "r", "top"]),
            &[(0, 1), (0, 2), (1, 3), (2, 3)],
        )
        .unwrap();
        let iso = find_isomorphism(&b4, &explicit_b4).unwrap();
        assert_eq!(iso[0], 0);
        assert_eq!(iso[3], 3);
        let c4 = FiniteSupLattice::chain(names(["0", "a", "b", "1"])).unwrap();
        assert!(find_isomorphism(&b4, &c4).is_none());
        assert!(find_isomorphism(&m3(), &m3()).is_some());
    }
}
