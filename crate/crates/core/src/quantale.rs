//! Unital involutive quantales over finite lattices, inverse quantal frame
//! axioms, the constructions `𝒪` and `𝒢`, and quantale homomorphisms.

use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::groupoid::{FiniteGroupoid, GroupoidError, GroupoidFunctor};
use crate::lattice::{Elem, FiniteSupLattice, LatticeError, DEFAULT_MAX_CARRIER};
use crate::report::ValidationReport;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QuantaleError {
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Groupoid(#[from] GroupoidError),
    #[error("malformed quantale tables: {0}")]
    Shape(String),
    #[error("lattice is not Boolean; only discrete groupoids are reconstructed")]
    NotBoolean,
    #[error("not an inverse quantal frame: {law} fails (witness: {witness})")]
    NotIqf { law: String, witness: String },
    #[error("not a preimage map: {0}")]
    NotPreimageMap(String),
    #[error("invertible elements do not form a group: {0}")]
    NotAGroup(String),
    #[error("search budget of {0} nodes exceeded")]
    SearchBudgetExceeded(u64),
}

/// A unital involutive quantale. Products and involution are stored on
/// join-irreducibles and extended by joins.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InvolutiveQuantale {
    lattice: Arc<FiniteSupLattice>,
    /// Row-major `k × k` table over join-irreducible positions.
    mult_ji: Vec<Elem>,
    invol_ji: Vec<Elem>,
    unit: Elem,
    atom_labels: Option<Vec<String>>,
}

impl InvolutiveQuantale {
    pub fn new(
        lattice: Arc<FiniteSupLattice>,
        mult_ji: Vec<Elem>,
        invol_ji: Vec<Elem>,
        unit: Elem,
    ) -> Result<Self, QuantaleError> {
        let k = lattice.ji_count();
        if mult_ji.len() != k * k {
            return Err(QuantaleError::Shape(format!(
                "product table has {} entries, expected {}",
                mult_ji.len(),
                k * k
            )));
        }
        if invol_ji.len() != k {
            return Err(QuantaleError::Shape("involution must list every join-irreducible".into()));
        }
        if let Some(&x) = mult_ji.iter().chain(&invol_ji).chain([&unit]).find(|&&x| !lattice.contains(x)) {
            return Err(QuantaleError::Lattice(LatticeError::UnknownElement(x)));
        }
        Ok(Self {
            lattice,
            mult_ji,
            invol_ji,
            unit,
            atom_labels: None,
        })
    }

    /// Samples full operations on join-irreducibles.
    pub fn from_operations(
        lattice: Arc<FiniteSupLattice>,
        mult: impl Fn(Elem, Elem) -> Elem,
        invol: impl Fn(Elem) -> Elem,
        unit: Elem,
    ) -> Result<Self, QuantaleError> {
        let jis = lattice.join_irreducibles().to_vec();
        let mult_ji = jis.iter().flat_map(|&a| jis.iter().map(move |&b| (a, b))).map(|(a, b)| mult(a, b)).collect();
        let invol_ji = jis.iter().map(|&a| invol(a)).collect();
        Self::new(lattice, mult_ji, invol_ji, unit)
    }

    /// The frame viewed as a quantale with `ab = a ∧ b`, `a* = a`, `e = ⊤`.
    pub fn of_frame(lattice: Arc<FiniteSupLattice>) -> Result<Self, QuantaleError> {
        let l = lattice.clone();
        let top = lattice.top();
        Self::from_operations(lattice, |a, b| l.meet(a, b), |a| a, top)
    }

    pub fn with_atom_labels(mut self, labels: Vec<String>) -> Self {
        self.atom_labels = Some(labels);
        self
    }

    pub fn lattice(&self) -> &FiniteSupLattice {
        &self.lattice
    }

    pub fn lattice_arc(&self) -> &Arc<FiniteSupLattice> {
        &self.lattice
    }

    pub fn unit(&self) -> Elem {
        self.unit
    }

    pub fn top(&self) -> Elem {
        self.lattice.top()
    }

    pub fn bottom(&self) -> Elem {
        self.lattice.bottom()
    }

    pub fn size(&self) -> usize {
        self.lattice.size()
    }

    pub fn atom_labels(&self) -> Option<&[String]> {
        self.atom_labels.as_deref()
    }

    pub fn mult_ji_table(&self) -> &[Elem] {
        &self.mult_ji
    }

    pub fn invol_ji_table(&self) -> &[Elem] {
        &self.invol_ji
    }

    /// Overwrites one entry of the join-irreducible product table. Used by
    /// fault-injection fixtures.
    pub fn set_ji_product(&mut self, i: usize, j: usize, value: Elem) {
        let k = self.lattice.ji_count();
        self.mult_ji[i * k + j] = value;
    }

    pub fn mult(&self, a: Elem, b: Elem) -> Elem {
        let k = self.lattice.ji_count();
        if self.lattice.is_powerset() {
            let mut out = 0;
            let mut x = a;
            while x != 0 {
                let i = x.trailing_zeros() as usize;
                x &= x - 1;
                let row = &self.mult_ji[i * k..(i + 1) * k];
                let mut y = b;
                while y != 0 {
                    out |= row[y.trailing_zeros() as usize];
                    y &= y - 1;
                }
            }
            out
        } else {
            self.lattice.join_iter(
                self.lattice
                    .ji_below(a)
                    .flat_map(|i| self.lattice.ji_below(b).map(move |j| self.mult_ji[i * k + j])),
            )
        }
    }

    pub fn invol(&self, a: Elem) -> Elem {
        self.lattice.join_iter(self.lattice.ji_below(a).map(|i| self.invol_ji[i]))
    }

    pub fn is_partial_unit(&self, s: Elem) -> bool {
        let si = self.invol(s);
        self.lattice.leq(self.mult(s, si), self.unit) && self.lattice.leq(self.mult(si, s), self.unit)
    }

    pub fn partial_unit_elements(&self) -> Vec<Elem> {
        self.lattice.elements().filter(|&s| self.is_partial_unit(s)).collect()
    }

    /// The elements below `e`.
    pub fn base_locale(&self) -> Vec<Elem> {
        self.lattice.elements().filter(|&b| self.lattice.leq(b, self.unit)).collect()
    }

    /// Name of atom `pos` (a join-irreducible position), preferring labels.
    pub fn atom_name(&self, pos: usize) -> String {
        match &self.atom_labels {
            Some(l) if l.len() == self.lattice.ji_count() => l[pos].clone(),
            _ => self.lattice.element_name(self.lattice.ji(pos)),
        }
    }

    /// Unital involutive quantale laws. Products are bilinear by construction
    /// on powersets; on other lattices the join extension is checked.
    pub fn validate_quantale(&self) -> ValidationReport {
        let mut r = ValidationReport::new("involutive quantale");
        let l = &*self.lattice;
        let jis = l.join_irreducibles();
        if !l.is_powerset() {
            let pairs = l.elements().flat_map(|a| l.elements().map(move |b| (a, b)));
            r.check_all("multiplication distributes over joins", pairs.clone(), |&(a, b)| {
                jis.iter().all(|&j| {
                    self.mult(l.join(a, b), j) == l.join(self.mult(a, j), self.mult(b, j))
                        && self.mult(j, l.join(a, b)) == l.join(self.mult(j, a), self.mult(j, b))
                })
            });
            r.check_all("involution preserves joins", pairs, |&(a, b)| {
                self.invol(l.join(a, b)) == l.join(self.invol(a), self.invol(b))
            });
        }
        let triples = jis
            .iter()
            .flat_map(|&a| jis.iter().flat_map(move |&b| jis.iter().map(move |&c| (a, b, c))));
        r.check_all("associativity", triples, |&(a, b, c)| {
            self.mult(self.mult(a, b), c) == self.mult(a, self.mult(b, c))
        });
        r.check_all("ea = a = ae", jis.iter(), |&&a| {
            self.mult(self.unit, a) == a && self.mult(a, self.unit) == a
        });
        r.check_all("a** = a", jis.iter(), |&&a| self.invol(self.invol(a)) == a);
        let pairs = jis.iter().flat_map(|&a| jis.iter().map(move |&b| (a, b)));
        r.check_all("(ab)* = b*a*", pairs, |&(a, b)| {
            self.invol(self.mult(a, b)) == self.mult(self.invol(b), self.invol(a))
        });
        r
    }

    /// Quantale laws, the frame law, the three inverse quantal frame axioms and
    /// the consequences `ba = b1∧a`, `ab = 1b∧a` for `b ≤ e`.
    pub fn validate_iqf(&self) -> ValidationReport {
        let mut r = ValidationReport::new("inverse quantal frame");
        r.merge(self.validate_quantale());
        let l = &*self.lattice;
        let frame = l.validate_frame();
        r.record(
            "frame",
            frame.counterexample.map(|(x, y, z)| {
                format!("({}, {}, {})", l.element_name(x), l.element_name(y), l.element_name(z))
            }),
        );
        let (e, top) = (self.unit, l.top());
        let name = |a: &Elem| l.element_name(*a);
        let w = l
            .elements()
            .find(|&a| l.meet(self.mult(a, top), e) != l.meet(self.mult(a, self.invol(a)), e));
        r.record("a1∧e = aa*∧e", w.as_ref().map(name));
        let w = l
            .elements()
            .find(|&a| self.mult(l.meet(self.mult(a, top), e), a) != a);
        r.record("(a1∧e)a = a", w.as_ref().map(name));
        let joined = l.join_iter(self.partial_unit_elements());
        r.record("⋁Q_I = 1", (joined != top).then(|| name(&joined)));
        let base = self.base_locale();
        let pairs = || base.iter().flat_map(|&b| l.elements().map(move |a| (b, a)));
        let w = pairs().find(|&(b, a)| self.mult(b, a) != l.meet(self.mult(b, top), a));
        r.record("ba = b1∧a for b ≤ e", w.map(|(b, a)| format!("({}, {})", name(&b), name(&a))));
        let w = pairs().find(|&(b, a)| self.mult(a, b) != l.meet(self.mult(top, b), a));
        r.record("ab = 1b∧a for b ≤ e", w.map(|(b, a)| format!("({}, {})", name(&b), name(&a))));
        r
    }
}

/// `𝒪(G)`: subsets of arrows with pointwise products and inverses.
pub fn quantale_of_groupoid(g: &FiniteGroupoid) -> Result<InvolutiveQuantale, QuantaleError> {
    quantale_of_groupoid_bounded(g, DEFAULT_MAX_CARRIER)
}

pub fn quantale_of_groupoid_bounded(
    g: &FiniteGroupoid,
    bound: usize,
) -> Result<InvolutiveQuantale, QuantaleError> {
    let lattice = Arc::new(FiniteSupLattice::powerset_bounded(g.arrows().to_vec(), bound)?);
    let n = g.arrow_count();
    let mult_ji = (0..n * n)
        .map(|p| g.comp(p / n, p % n).map_or(0, |c| 1 << c))
        .collect();
    let invol_ji = (0..n).map(|a| 1 << g.inv(a)).collect();
    let unit = (0..g.object_count()).fold(0, |acc, x| acc | 1 << g.unit(x));
    Ok(InvolutiveQuantale::new(lattice, mult_ji, invol_ji, unit)?.with_atom_labels(g.arrows().to_vec()))
}

fn not_iqf(law: &str, witness: impl Into<String>) -> QuantaleError {
    QuantaleError::NotIqf {
        law: law.into(),
        witness: witness.into(),
    }
}

/// `𝒢(Q)` for a Boolean inverse quantal frame: arrows are the atoms, objects
/// the atoms below `e`.
pub fn groupoid_of_quantale(q: &InvolutiveQuantale) -> Result<FiniteGroupoid, QuantaleError> {
    let l = q.lattice();
    if !l.is_boolean() {
        return Err(QuantaleError::NotBoolean);
    }
    if let Some(f) = q.validate_iqf().first_failure() {
        return Err(not_iqf(&f.law, f.witness.clone().unwrap_or_default()));
    }
    let atoms = l.join_irreducibles().to_vec();
    let pos = |x: Elem| atoms.iter().position(|&a| a == x);
    let arrows: Vec<String> = (0..atoms.len()).map(|i| q.atom_name(i)).collect();
    let units: Vec<usize> = (0..atoms.len()).filter(|&i| l.leq(atoms[i], q.unit())).collect();
    let objects = units.iter().map(|&i| arrows[i].clone()).collect();
    let side = |g: usize, left: bool| {
        let found: Vec<usize> = (0..units.len())
            .filter(|&x| {
                let b = atoms[units[x]];
                let p = if left { q.mult(b, atoms[g]) } else { q.mult(atoms[g], b) };
                p == atoms[g]
            })
            .collect();
        match found.as_slice() {
            [x] => Ok(*x),
            _ => Err(not_iqf("unique base atom", arrows[g].clone())),
        }
    };
    let dom = (0..atoms.len()).map(|g| side(g, true)).collect::<Result<Vec<_>, _>>()?;
    let cod = (0..atoms.len()).map(|g| side(g, false)).collect::<Result<Vec<_>, _>>()?;
    let inv = (0..atoms.len())
        .map(|g| pos(q.invol(atoms[g])).ok_or_else(|| not_iqf("g* is an atom", arrows[g].clone())))
        .collect::<Result<Vec<_>, _>>()?;
    let mut comp = Vec::with_capacity(atoms.len() * atoms.len());
    for g in 0..atoms.len() {
        for h in 0..atoms.len() {
            let p = q.mult(atoms[g], atoms[h]);
            comp.push(if p == l.bottom() {
                None
            } else {
                Some(pos(p).ok_or_else(|| {
                    not_iqf("products of atoms are atoms or ⊥", format!("({}, {})", arrows[g], arrows[h]))
                })?)
            });
        }
    }
    let g = FiniteGroupoid::from_tables(objects, arrows, dom, cod, units, inv, comp)?;
    if let Some(f) = g.validate().first_failure() {
        return Err(not_iqf(&f.law, f.witness.clone().unwrap_or_default()));
    }
    Ok(g)
}

/// The canonical isomorphism `G → 𝒢(𝒪(G))`: identity on arrows, objects sent
/// to their unit arrows.
pub fn canonical_iota(g: &FiniteGroupoid, gg: &FiniteGroupoid) -> GroupoidFunctor {
    GroupoidFunctor {
        f0: (0..g.object_count())
            .map(|x| gg.unit_position(g.unit(x)).unwrap_or(usize::MAX))
            .collect(),
        f1: (0..g.arrow_count()).collect(),
    }
}

/// `𝒢(𝒪(G)) ≅ G` via the canonical map and `𝒪(𝒢(𝒪(G))) = 𝒪(G)`.
pub fn check_roundtrip_groupoid(g: &FiniteGroupoid) -> ValidationReport {
    check_roundtrip_with(g, quantale_of_groupoid)
}

/// Like [`check_roundtrip_groupoid`] with a replaceable `𝒪`, so that faulty
/// implementations can be shown to be caught.
pub fn check_roundtrip_with(
    g: &FiniteGroupoid,
    o: impl Fn(&FiniteGroupoid) -> Result<InvolutiveQuantale, QuantaleError>,
) -> ValidationReport {
    let mut r = ValidationReport::new("round trip");
    let q = match o(g) {
        Ok(q) => q,
        Err(e) => {
            r.record("𝒪(G) is defined", Some(e.to_string()));
            return r;
        }
    };
    let gg = match groupoid_of_quantale(&q) {
        Ok(gg) => gg,
        Err(e) => {
            r.record("𝒢(𝒪(G)) is defined", Some(e.to_string()));
            return r;
        }
    };
    let iota = canonical_iota(g, &gg);
    let valid = crate::groupoid::validate_functor(&iota, g, &gg);
    r.record(
        "𝒢(𝒪(G)) ≅ G via ι",
        if !valid.is_valid() {
            valid.first_failure().map(|f| f.law.clone())
        } else if !iota.is_bijective(g, &gg) || gg.arrows() != g.arrows() {
            Some("ι is not bijective".into())
        } else {
            None
        },
    );
    r.record(
        "𝒪(𝒢(𝒪(G))) = 𝒪(G)",
        match o(&gg) {
            Ok(q2) if q2 == q => None,
            Ok(_) => Some("tables differ".into()),
            Err(e) => Some(e.to_string()),
        },
    );
    r
}

/// `𝒪(𝒢(Q)) = Q` up to the canonical atom relabelling.
pub fn check_roundtrip_quantale(q: &InvolutiveQuantale) -> ValidationReport {
    let mut r = ValidationReport::new("round trip");
    let gg = match groupoid_of_quantale(q) {
        Ok(g) => g,
        Err(e) => {
            r.record("𝒢(Q) is defined", Some(e.to_string()));
            return r;
        }
    };
    let q2 = match quantale_of_groupoid_bounded(&gg, crate::lattice::HARD_MAX_CARRIER) {
        Ok(q2) => q2,
        Err(e) => {
            r.record("𝒪(𝒢(Q)) is defined", Some(e.to_string()));
            return r;
        }
    };
    let l = q.lattice();
    let relabel = |x: Elem| l.ji_below(x).fold(0usize, |acc, p| acc | 1 << p);
    let mut hit = vec![false; q2.size()];
    for x in l.elements() {
        hit[relabel(x)] = true;
    }
    r.record(
        "relabelling is a lattice bijection",
        (l.size() != q2.size() || hit.contains(&false)).then(|| "sizes differ".into()),
    );
    let jis = l.join_irreducibles();
    let pairs = jis.iter().flat_map(|&a| jis.iter().map(move |&b| (a, b)));
    r.check_all("𝒪(𝒢(Q)) = Q: products", pairs, |&(a, b)| {
        relabel(q.mult(a, b)) == q2.mult(relabel(a), relabel(b))
    });
    r.check_all("𝒪(𝒢(Q)) = Q: involution", jis.iter(), |&&a| {
        relabel(q.invol(a)) == q2.invol(relabel(a))
    });
    r.record(
        "𝒪(𝒢(Q)) = Q: unit",
        (relabel(q.unit()) != q2.unit()).then(|| l.element_name(q.unit())),
    );
    r
}

// ---- homomorphisms ---------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuantaleHom {
    pub source: Arc<InvolutiveQuantale>,
    pub target: Arc<InvolutiveQuantale>,
    pub map: Vec<Elem>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct HomFlags {
    pub join_preserving: bool,
    pub multiplicative: bool,
    pub unital: bool,
    pub involutive: bool,
    pub finite_meet: bool,
    pub lax: bool,
}

impl QuantaleHom {
    pub fn from_ji_images(
        source: Arc<InvolutiveQuantale>,
        target: Arc<InvolutiveQuantale>,
        images: &[Elem],
    ) -> Self {
        let (s, t) = (source.lattice(), target.lattice());
        let map = s
            .elements()
            .map(|x| t.join_iter(s.ji_below(x).map(|p| images[p])))
            .collect();
        Self { source, target, map }
    }

    pub fn identity(q: Arc<InvolutiveQuantale>) -> Self {
        let map = q.lattice().elements().collect();
        Self {
            source: q.clone(),
            target: q,
            map,
        }
    }

    #[inline]
    pub fn apply(&self, x: Elem) -> Elem {
        self.map[x]
    }

    /// `self` followed by `then`.
    pub fn then(&self, then: &QuantaleHom) -> QuantaleHom {
        QuantaleHom {
            source: self.source.clone(),
            target: then.target.clone(),
            map: self.map.iter().map(|&x| then.map[x]).collect(),
        }
    }

    /// Images of the source's join-irreducibles.
    pub fn ji_images(&self) -> Vec<Elem> {
        self.source
            .lattice()
            .join_irreducibles()
            .iter()
            .map(|&j| self.map[j])
            .collect()
    }

    pub fn flags(&self) -> HomFlags {
        validate_hom(self).0
    }
}

/// Evaluates every flag and records the first failure of each.
pub fn validate_hom(h: &QuantaleHom) -> (HomFlags, ValidationReport) {
    let (sq, tq) = (&*h.source, &*h.target);
    let (s, t) = (sq.lattice(), tq.lattice());
    let mut r = ValidationReport::new("quantale homomorphism");
    let name = |x: Elem| s.element_name(x);
    let pair_name = |(a, b): (Elem, Elem)| format!("({}, {})", name(a), name(b));
    let all_pairs = || s.elements().flat_map(move |a| s.elements().map(move |b| (a, b)));
    let ji_pairs = || {
        let jis = s.join_irreducibles();
        jis.iter().flat_map(move |&a| jis.iter().map(move |&b| (a, b)))
    };

    let jp = if h.map[s.bottom()] != t.bottom() {
        Some(name(s.bottom()))
    } else if s.is_powerset() {
        s.elements()
            .find(|&a| h.map[a] != t.join_iter(s.ji_below(a).map(|p| h.map[s.ji(p)])))
            .map(name)
    } else {
        all_pairs()
            .find(|&(a, b)| h.map[s.join(a, b)] != t.join(h.map[a], h.map[b]))
            .map(pair_name)
    };
    let join_preserving = jp.is_none();
    r.record("join-preserving", jp);

    // Join preservation reduces the remaining checks to join-irreducibles.
    let pairs: Box<dyn Iterator<Item = (Elem, Elem)>> = if join_preserving {
        Box::new(ji_pairs())
    } else {
        Box::new(all_pairs())
    };
    let singles: Vec<Elem> = if join_preserving {
        s.join_irreducibles().to_vec()
    } else {
        s.elements().collect()
    };
    let mut sub = None;
    let mut mul = None;
    for (a, b) in pairs {
        let lhs = tq.mult(h.map[a], h.map[b]);
        let rhs = h.map[sq.mult(a, b)];
        if mul.is_none() && lhs != rhs {
            mul = Some(pair_name((a, b)));
        }
        if sub.is_none() && !t.leq(lhs, rhs) {
            sub = Some(pair_name((a, b)));
        }
        if mul.is_some() && sub.is_some() {
            break;
        }
    }
    let multiplicative = mul.is_none();
    r.record("multiplicative", mul);
    let un = (h.map[sq.unit()] != tq.unit()).then(|| name(sq.unit()));
    let unital = un.is_none();
    r.record("unital", un);
    let inv = singles
        .iter()
        .copied()
        .find(|&a| h.map[sq.invol(a)] != tq.invol(h.map[a]))
        .map(name);
    let involutive = inv.is_none();
    r.record("involutive", inv.clone());

    let fm = if h.map[s.top()] != t.top() {
        Some(name(s.top()))
    } else if join_preserving && s.is_powerset() && t.validate_frame().is_frame {
        // images of distinct atoms must be disjoint
        ji_pairs()
            .find(|&(a, b)| a != b && t.meet(h.map[a], h.map[b]) != t.bottom())
            .map(pair_name)
    } else {
        all_pairs()
            .find(|&(a, b)| h.map[s.meet(a, b)] != t.meet(h.map[a], h.map[b]))
            .map(pair_name)
    };
    let finite_meet = fm.is_none();
    r.record("finite-meet", fm);

    let lax_unit = t.leq(tq.unit(), h.map[sq.unit()]);
    let lax_w = sub
        .map(|w| format!("h(a)h(b) ≰ h(ab) at {w}"))
        .or(inv.map(|w| format!("h(a*) ≠ h(a)* at {w}")))
        .or((!lax_unit).then(|| "e ≰ h(e)".to_string()));
    let lax = join_preserving && lax_w.is_none();
    r.record("lax", lax_w);
    (
        HomFlags {
            join_preserving,
            multiplicative,
            unital,
            involutive,
            finite_meet,
            lax,
        },
        r,
    )
}

/// Every unital multiplicative join-preserving map `q → r`, sorted by the
/// images of join-irreducibles. Involutivity is not used for pruning.
pub fn enumerate_unital_homs(
    q: &Arc<InvolutiveQuantale>,
    r: &Arc<InvolutiveQuantale>,
    budget: u64,
) -> Result<Vec<QuantaleHom>, QuantaleError> {
    let s = q.lattice();
    let k = s.ji_count();
    // JIs below the unit first, so that unit preservation is checked early.
    let mut order: Vec<usize> = (0..k).filter(|&p| s.leq(s.ji(p), q.unit())).collect();
    let unit_ready = order.len();
    order.extend((0..k).filter(|&p| !s.leq(s.ji(p), q.unit())));
    let mut rank = vec![0; k];
    for (i, &p) in order.iter().enumerate() {
        rank[p] = i;
    }
    // product checks become possible once every JI involved is assigned
    let mut checks: Vec<Vec<(usize, usize)>> = vec![Vec::new(); k];
    for a in 0..k {
        for b in 0..k {
            let prod = q.mult(s.ji(a), s.ji(b));
            let ready = s
                .ji_below(prod)
                .map(|p| rank[p])
                .chain([rank[a], rank[b]])
                .max()
                .unwrap();
            checks[ready].push((a, b));
        }
    }
    let mut order_checks: Vec<Vec<(usize, usize)>> = vec![Vec::new(); k];
    for a in 0..k {
        for b in 0..k {
            if a != b && s.leq(s.ji(a), s.ji(b)) {
                order_checks[rank[a].max(rank[b])].push((a, b));
            }
        }
    }
    let search = Search {
        q,
        r,
        order: &order,
        unit_ready,
        checks: &checks,
        order_checks: &order_checks,
        budget,
    };
    let mut images = vec![0; k];
    let mut out = Vec::new();
    let mut nodes = 0;
    search.descend(0, &mut images, &mut nodes, &mut out)?;
    out.sort_by_key(|h| h.ji_images());
    Ok(out)
}

struct Search<'a> {
    q: &'a Arc<InvolutiveQuantale>,
    r: &'a Arc<InvolutiveQuantale>,
    order: &'a [usize],
    unit_ready: usize,
    checks: &'a [Vec<(usize, usize)>],
    order_checks: &'a [Vec<(usize, usize)>],
    budget: u64,
}

impl Search<'_> {
    fn image(&self, images: &[Elem], x: Elem) -> Elem {
        let (s, t) = (self.q.lattice(), self.r.lattice());
        t.join_iter(s.ji_below(x).map(|p| images[p]))
    }

    fn descend(
        &self,
        depth: usize,
        images: &mut Vec<Elem>,
        nodes: &mut u64,
        out: &mut Vec<QuantaleHom>,
    ) -> Result<(), QuantaleError> {
        let (s, t) = (self.q.lattice(), self.r.lattice());
        if depth > 0 {
            let step = depth - 1;
            if depth == self.unit_ready && self.image(images, self.q.unit()) != self.r.unit() {
                return Ok(());
            }
            for &(a, b) in &self.order_checks[step] {
                if !t.leq(images[a], images[b]) {
                    return Ok(());
                }
            }
            for &(a, b) in &self.checks[step] {
                let lhs = self.r.mult(images[a], images[b]);
                if lhs != self.image(images, self.q.mult(s.ji(a), s.ji(b))) {
                    return Ok(());
                }
            }
        }
        if depth == self.order.len() {
            if self.unit_ready == 0 && self.image(images, self.q.unit()) != self.r.unit() {
                return Ok(());
            }
            let h = QuantaleHom::from_ji_images(self.q.clone(), self.r.clone(), images);
            if s.is_powerset() || validate_hom(&h).0.join_preserving {
                out.push(h);
            }
            return Ok(());
        }
        let p = self.order[depth];
        for y in t.elements() {
            *nodes += 1;
            if *nodes > self.budget {
                return Err(QuantaleError::SearchBudgetExceeded(self.budget));
            }
            images[p] = y;
            self.descend(depth + 1, images, nodes, out)?;
        }
        Ok(())
    }
}

/// All join-preserving maps satisfying the requested flags, by brute force
/// over join-irreducible images.
pub fn enumerate_homs_with(
    q: &Arc<InvolutiveQuantale>,
    r: &Arc<InvolutiveQuantale>,
    want: impl Fn(&HomFlags) -> bool,
    budget: u64,
) -> Result<Vec<QuantaleHom>, QuantaleError> {
    let sups = crate::lattice::enumerate_sup_homs(q.lattice_arc(), r.lattice_arc(), |_| true, budget)?;
    Ok(sups
        .into_iter()
        .map(|h| QuantaleHom {
            source: q.clone(),
            target: r.clone(),
            map: h.map,
        })
        .filter(|h| want(&h.flags()))
        .collect())
}

/// The preimage map `f1⁻¹ : 𝒪(H) → 𝒪(G)`.
pub fn preimage_hom(
    f: &GroupoidFunctor,
    og: &Arc<InvolutiveQuantale>,
    oh: &Arc<InvolutiveQuantale>,
) -> QuantaleHom {
    let nh = oh.lattice().ji_count();
    let images: Vec<Elem> = (0..nh)
        .map(|k| {
            f.f1.iter()
                .enumerate()
                .filter(|&(_, &fk)| fk == k)
                .fold(0, |acc, (g, _)| acc | 1 << g)
        })
        .collect();
    QuantaleHom::from_ji_images(oh.clone(), og.clone(), &images)
}

/// The direct image map `U ↦ f1(U)`, `𝒪(G) → 𝒪(H)`.
pub fn direct_image_hom(
    f: &GroupoidFunctor,
    og: &Arc<InvolutiveQuantale>,
    oh: &Arc<InvolutiveQuantale>,
) -> QuantaleHom {
    let images: Vec<Elem> = f.f1.iter().map(|&k| 1 << k).collect();
    QuantaleHom::from_ji_images(og.clone(), oh.clone(), &images)
}

/// The functor `𝒢(Q) → 𝒢(R)` whose preimage map is `h : R → Q`.
pub fn functor_of_iqloc_morphism(h: &QuantaleHom) -> Result<GroupoidFunctor, QuantaleError> {
    let (rq, qq) = (&*h.source, &*h.target);
    let (rl, ql) = (rq.lattice(), qq.lattice());
    if !rl.is_boolean() || !ql.is_boolean() {
        return Err(QuantaleError::NotBoolean);
    }
    let flags = h.flags();
    if !(flags.join_preserving && flags.multiplicative && flags.unital && flags.finite_meet) {
        return Err(QuantaleError::NotPreimageMap(format!("{flags:?}")));
    }
    let g = groupoid_of_quantale(qq)?;
    let hh = groupoid_of_quantale(rq)?;
    let cover = |atom: Elem, candidates: &mut dyn Iterator<Item = usize>| {
        let found: Vec<usize> = candidates.filter(|&k| ql.leq(atom, h.map[rl.ji(k)])).collect();
        match found.as_slice() {
            [k] => Ok(*k),
            _ => Err(QuantaleError::NotPreimageMap(ql.element_name(atom))),
        }
    };
    let f1 = (0..ql.ji_count())
        .map(|a| cover(ql.ji(a), &mut (0..rl.ji_count())))
        .collect::<Result<Vec<_>, _>>()?;
    let f0 = (0..g.object_count())
        .map(|x| {
            let k = cover(ql.ji(g.unit(x)), &mut (0..hh.object_count()).map(|y| hh.unit(y)))?;
            Ok(hh.unit_position(k).expect("unit arrow"))
        })
        .collect::<Result<Vec<_>, QuantaleError>>()?;
    let f = GroupoidFunctor { f0, f1 };
    if let Some(fail) = crate::groupoid::validate_functor(&f, &g, &hh).first_failure() {
        return Err(QuantaleError::NotPreimageMap(fail.law.clone()));
    }
    Ok(f)
}

// ---- groups ----------------------------------------------------------------------

/// The group of invertible elements `{a : ab = e = ba for some b}`.
#[derive(Clone, Debug)]
pub struct GroupUnits {
    pub elements: Vec<Elem>,
    pub group: FiniteGroupoid,
}

pub fn group_units(q: &InvolutiveQuantale) -> Result<GroupUnits, QuantaleError> {
    let l = q.lattice();
    let e = q.unit();
    let elements: Vec<Elem> = l
        .elements()
        .filter(|&a| l.elements().any(|b| q.mult(a, b) == e && q.mult(b, a) == e))
        .collect();
    let mut table = Vec::with_capacity(elements.len());
    for &a in &elements {
        let row = elements
            .iter()
            .map(|&b| {
                let ab = q.mult(a, b);
                elements
                    .iter()
                    .position(|&c| c == ab)
                    .ok_or_else(|| QuantaleError::NotAGroup(format!("{}·{}", l.element_name(a), l.element_name(b))))
            })
            .collect::<Result<Vec<_>, _>>()?;
        table.push(row);
    }
    let names = elements.iter().map(|&a| l.element_name(a)).collect();
    let group = FiniteGroupoid::group(names, &table).map_err(|e| QuantaleError::NotAGroup(e.to_string()))?;
    Ok(GroupUnits { elements, group })
}

/// For a homomorphism of groups: `f⁻¹` is a unital quantale homomorphism
/// exactly when `f` is an isomorphism, and the direct image always is one.
pub fn check_group_lemma(f: &GroupoidFunctor, g: &FiniteGroupoid, h: &FiniteGroupoid) -> ValidationReport {
    let mut r = ValidationReport::new("group case");
    let (og, oh) = match (quantale_of_groupoid(g), quantale_of_groupoid(h)) {
        (Ok(a), Ok(b)) => (Arc::new(a), Arc::new(b)),
        _ => {
            r.record("groups fit the powerset bound", Some("too large".into()));
            return r;
        }
    };
    let pre = preimage_hom(f, &og, &oh).flags();
    let pre_hom = pre.join_preserving && pre.multiplicative && pre.unital;
    let iso = f.is_bijective(g, h);
    r.record(
        "f⁻¹ unital quantale hom ⟺ f isomorphism",
        (pre_hom != iso).then(|| format!("f⁻¹ hom: {pre_hom}, iso: {iso}")),
    );
    let dir = direct_image_hom(f, &og, &oh).flags();
    r.record(
        "direct image is a unital quantale hom",
        (!(dir.join_preserving && dir.multiplicative && dir.unital)).then(|| format!("{dir:?}")),
    );
    r
}

/// The lax conditions for `f1⁻¹`, and strictness against covering.
pub fn check_lax_image(f: &GroupoidFunctor, g: &FiniteGroupoid, h: &FiniteGroupoid) -> ValidationReport {
    let mut r = ValidationReport::new("lax image");
    let (og, oh) = match (quantale_of_groupoid(g), quantale_of_groupoid(h)) {
        (Ok(a), Ok(b)) => (Arc::new(a), Arc::new(b)),
        _ => {
            r.record("groupoids fit the powerset bound", Some("too large".into()));
            return r;
        }
    };
    let pre = preimage_hom(f, &og, &oh);
    let (flags, report) = validate_hom(&pre);
    r.record(
        "f1⁻¹ is lax",
        (!flags.lax).then(|| {
            report
                .checks
                .iter()
                .find(|c| c.law == "lax")
                .and_then(|c| c.witness.clone())
                .unwrap_or_default()
        }),
    );
    let strict = flags.multiplicative && flags.unital;
    let covering = crate::groupoid::is_covering_functor(f, g, h);
    r.record(
        "f1⁻¹ strict ⟺ f covering",
        (strict != covering).then(|| format!("strict: {strict}, covering: {covering}")),
    );
    r
}

impl FiniteGroupoid {
    /// Position of a unit arrow among the objects.
    pub fn unit_position(&self, arrow: usize) -> Option<usize> {
        (0..self.object_count()).find(|&x| self.unit(x) == arrow)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groupoid::{enumerate_functors, find_isomorphism, GroupoidFunctor};
    use crate::lattice::names;

    fn p2() -> FiniteGroupoid {
        FiniteGroupoid::pair(names(["0", "1"])).unwrap()
    }

    fn o(g: &FiniteGroupoid) -> Arc<InvolutiveQuantale> {
        Arc::new(quantale_of_groupoid(g).unwrap())
    }

    fn parity() -> GroupoidFunctor {
        let f1 = p2()
            .arrows()
            .iter()
            .map(|a| usize::from(a == "(0,1)" || a == "(1,0)"))
            .collect();
        GroupoidFunctor { f0: vec![0, 0], f1 }
    }

    fn chain(n: usize) -> Arc<InvolutiveQuantale> {
        let l = FiniteSupLattice::chain((0..n).map(|i| format!("c{i}")).collect()).unwrap();
        Arc::new(InvolutiveQuantale::of_frame(Arc::new(l)).unwrap())
    }

    #[test]
    fn groupoid_quantales_are_iqfs() {
        let d = FiniteGroupoid::discrete(names(["x", "y"])).unwrap();
        let q = o(&d);
        assert_eq!(q.unit(), q.top());
        for a in q.lattice().elements() {
            for b in q.lattice().elements() {
                assert_eq!(q.mult(a, b), a & b);
            }
        }
        for g in [p2(), d, FiniteGroupoid::cyclic(2), FiniteGroupoid::symmetric3()] {
            let r = o(&g).validate_iqf();
            assert!(r.is_valid(), "{r}");
        }
        let q = o(&p2());
        assert_eq!(q.partial_unit_elements().len(), 7);
    }

    #[test]
    fn wrong_unit_fails() {
        let q = o(&FiniteGroupoid::cyclic(2));
        let bad = InvolutiveQuantale::new(
            q.lattice_arc().clone(),
            q.mult_ji_table().to_vec(),
            q.invol_ji_table().to_vec(),
            q.top(),
        )
        .unwrap();
        assert_eq!(bad.validate_iqf().passed("involutive quantale: ea = a = ae"), Some(false));
    }

    #[test]
    fn chains_are_iqfs_but_not_boolean() {
        let c = chain(3);
        assert!(c.validate_iqf().is_valid());
        assert_eq!(groupoid_of_quantale(&c), Err(QuantaleError::NotBoolean));
    }

    #[test]
    fn reconstruction() {
        let q = o(&p2());
        let g = groupoid_of_quantale(&q).unwrap();
        assert!(find_isomorphism(&g, &p2()).is_some());
        let z = groupoid_of_quantale(&o(&FiniteGroupoid::cyclic(2))).unwrap();
        assert_eq!((z.object_count(), z.arrow_count()), (1, 2));
        let du = FiniteGroupoid::disjoint_union(
            &FiniteGroupoid::cyclic(2),
            &FiniteGroupoid::discrete(names(["x"])).unwrap(),
        );
        for g in [p2(), du] {
            let r = check_roundtrip_groupoid(&g);
            assert!(r.is_valid(), "{r}");
        }
        let r = check_roundtrip_quantale(&o(&FiniteGroupoid::cyclic(2)));
        assert!(r.is_valid(), "{r}");
    }

    #[test]
    fn hom_flag_examples() {
        let q = o(&p2());
        let (flags, _) = validate_hom(&QuantaleHom::identity(q.clone()));
        assert!(flags.multiplicative && flags.unital && flags.involutive && flags.finite_meet && flags.lax);

        let z = o(&FiniteGroupoid::cyclic(2));
        let pre = preimage_hom(&parity(), &q, &z).flags();
        assert!(pre.multiplicative && pre.unital && pre.involutive && pre.finite_meet);
        let dir = direct_image_hom(&parity(), &q, &z).flags();
        // f{(0,1)}·f{(0,1)} = {e} while f({(0,1)}·{(0,1)}) = ∅
        assert!(dir.unital && dir.involutive);
        assert!(!dir.multiplicative && !dir.finite_meet);
    }

    #[test]
    fn unital_hom_counts() {
        let z = o(&FiniteGroupoid::cyclic(2));
        let homs = enumerate_unital_homs(&z, &z, 1 << 20).unwrap();
        assert_eq!(homs.len(), 2);
        assert!(homs.iter().all(|h| h.flags().involutive));
        let two = o(&FiniteGroupoid::trivial());
        assert_eq!(enumerate_unital_homs(&z, &two, 1 << 20).unwrap().len(), 1);
        assert_eq!(enumerate_unital_homs(&two, &two, 1 << 20).unwrap().len(), 1);
        let c3 = chain(3);
        // the middle element may go anywhere
        assert_eq!(enumerate_unital_homs(&c3, &c3, 1 << 20).unwrap().len(), 3);
        // the oracle agrees
        let brute = enumerate_homs_with(&z, &z, |f| f.multiplicative && f.unital, 1 << 20).unwrap();
        assert_eq!(brute, homs);
    }

    #[test]
    fn functors_from_preimages() {
        let q = o(&p2());
        assert_eq!(
            functor_of_iqloc_morphism(&QuantaleHom::identity(q.clone())).unwrap(),
            GroupoidFunctor::identity(&p2())
        );
        let z = o(&FiniteGroupoid::cyclic(2));
        assert_eq!(functor_of_iqloc_morphism(&preimage_hom(&parity(), &q, &z)).unwrap(), parity());
        // the unital hom 2-chain → P(Z2) does not preserve ⊤
        let two = o(&FiniteGroupoid::trivial());
        let h = QuantaleHom::from_ji_images(two, z, &[0b01]);
        assert!(matches!(functor_of_iqloc_morphism(&h), Err(QuantaleError::NotPreimageMap(_))));
    }

    #[test]
    fn units_of_groups() {
        let z = o(&FiniteGroupoid::cyclic(2));
        let u = group_units(&z).unwrap();
        assert_eq!(u.elements, vec![0b01, 0b10]);
        assert_eq!(group_units(&chain(2)).unwrap().elements, vec![1]);
        // e and the global bisection {(0,1),(1,0)}
        assert_eq!(group_units(&o(&p2())).unwrap().elements.len(), 2);
    }

    #[test]
    fn group_lemma_examples() {
        let z2 = FiniteGroupoid::cyclic(2);
        let z4 = FiniteGroupoid::cyclic(4);
        let id = GroupoidFunctor::identity(&z2);
        assert!(check_group_lemma(&id, &z2, &z2).is_valid());
        let trivial = GroupoidFunctor { f0: vec![0], f1: vec![0, 0] };
        assert!(check_group_lemma(&trivial, &z2, &z2).is_valid());
        let incl = GroupoidFunctor { f0: vec![0], f1: vec![0, 2] };
        assert!(check_group_lemma(&incl, &z2, &z4).is_valid());
        let pre = preimage_hom(&incl, &o(&z2), &o(&z4)).flags();
        assert!(!pre.multiplicative);
    }

    #[test]
    fn lax_images() {
        let p = p2();
        let z = FiniteGroupoid::cyclic(2);
        for f in enumerate_functors(&p, &z, 1 << 20).unwrap() {
            assert!(check_lax_image(&f, &p, &z).is_valid());
        }
        let d1 = FiniteGroupoid::discrete(names(["x"])).unwrap();
        let incl = GroupoidFunctor { f0: vec![0], f1: vec![0] };
        let r = check_lax_image(&incl, &d1, &p);
        assert!(r.is_valid(), "{r}");
        let flags = preimage_hom(&incl, &o(&d1), &o(&p)).flags();
        assert!(flags.lax && !flags.multiplicative);
    }
}
