//! Finite inverse semigroups, partial units of a quantale and the
//! completion of an inverse semigroup under compatible joins.

use std::collections::HashMap;
use std::sync::Arc;

use fixedbitset::FixedBitSet;
use thiserror::Error;

use crate::lattice::{Elem, FiniteSupLattice, LatticeError};
use crate::quantale::InvolutiveQuantale;
use crate::report::ValidationReport;

/// Default bound on `|S|` for [`compatible_ideal_completion`].
pub const DEFAULT_MAX_SEMIGROUP: usize = 12;
/// Default bound on the number of ideals produced by the completion.
pub const DEFAULT_MAX_IDEALS: usize = 1 << 12;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InvSemiError {
    #[error("malformed semigroup tables: {0}")]
    Shape(String),
    #[error("partial units are not closed under multiplication: {0}")]
    NotClosed(String),
    #[error("not an inverse semigroup: {0}")]
    Invalid(String),
    #[error("semigroup has {size} elements, bound is {bound}")]
    TooLarge { size: usize, bound: usize },
    #[error("more than {0} compatible ideals")]
    BudgetExceeded(usize),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteInverseSemigroup {
    names: Vec<String>,
    mult: Vec<usize>,
    inv: Vec<usize>,
}

impl FiniteInverseSemigroup {
    /// `mult` is row-major `n × n`.
    pub fn new(names: Vec<String>, mult: Vec<usize>, inv: Vec<usize>) -> Result<Self, InvSemiError> {
        let n = names.len();
        if mult.len() != n * n || inv.len() != n {
            return Err(InvSemiError::Shape("tables must be n × n and n".into()));
        }
        if mult.iter().chain(&inv).any(|&x| x >= n) {
            return Err(InvSemiError::Shape("table entry out of range".into()));
        }
        Ok(Self { names, mult, inv })
    }

    pub fn size(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    #[inline]
    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mult[a * self.names.len() + b]
    }

    #[inline]
    pub fn inv(&self, a: usize) -> usize {
        self.inv[a]
    }

    pub fn is_idempotent(&self, a: usize) -> bool {
        self.mul(a, a) == a
    }

    pub fn idempotents(&self) -> Vec<usize> {
        (0..self.size()).filter(|&a| self.is_idempotent(a)).collect()
    }

    /// Associativity, regularity with respect to `inv`, commuting idempotents.
    pub fn validate(&self) -> ValidationReport {
        let mut r = ValidationReport::new("inverse semigroup");
        let n = self.size();
        let names = |t: &[usize]| t.iter().map(|&i| self.names[i].clone()).collect::<Vec<_>>();
        let triples = (0..n).flat_map(|a| (0..n).flat_map(move |b| (0..n).map(move |c| [a, b, c])));
        let w = triples
            .into_iter()
            .find(|&[a, b, c]| self.mul(self.mul(a, b), c) != self.mul(a, self.mul(b, c)));
        r.record("associativity", w.map(|t| format!("{:?}", names(&t))));
        r.check_all("s·inv(s)·s = s", self.names.iter(), |s| {
            let a = self.index(s);
            self.mul(self.mul(a, self.inv(a)), a) == a
        });
        r.check_all("inv(s)·s·inv(s) = inv(s)", self.names.iter(), |s| {
            let a = self.index(s);
            let i = self.inv(a);
            self.mul(self.mul(i, a), i) == i
        });
        let idem = self.idempotents();
        let w = idem
            .iter()
            .flat_map(|&e| idem.iter().map(move |&f| (e, f)))
            .find(|&(e, f)| self.mul(e, f) != self.mul(f, e));
        r.record(
            "idempotents commute",
            w.map(|(e, f)| format!("({}, {})", self.names[e], self.names[f])),
        );
        r
    }

    fn index(&self, name: &str) -> usize {
        self.names.iter().position(|n| n == name).expect("own name")
    }

    /// `s ≤ t` iff `s = t·inv(s)·s`.
    pub fn leq(&self, s: usize, t: usize) -> bool {
        s == self.mul(self.mul(t, self.inv(s)), s)
    }

    /// `s ~ t` iff `s·inv(t)` and `inv(s)·t` are idempotent.
    pub fn compatible(&self, s: usize, t: usize) -> bool {
        self.is_idempotent(self.mul(s, self.inv(t))) && self.is_idempotent(self.mul(self.inv(s), t))
    }
}

/// Natural partial order and compatibility relation as dense boolean matrices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrderAndCompatibility {
    pub order: Vec<Vec<bool>>,
    pub compatibility: Vec<Vec<bool>>,
}

pub fn natural_order_and_compatibility(s: &FiniteInverseSemigroup) -> OrderAndCompatibility {
    let n = s.size();
    OrderAndCompatibility {
        order: (0..n).map(|a| (0..n).map(|b| s.leq(a, b)).collect()).collect(),
        compatibility: (0..n)
            .map(|a| (0..n).map(|b| s.compatible(a, b)).collect())
            .collect(),
    }
}

/// The partial units of a quantale together with their positions in it.
#[derive(Clone, Debug)]
pub struct PartialUnits {
    pub semigroup: FiniteInverseSemigroup,
    /// `elements[i]` is the quantale element behind semigroup element `i`.
    pub elements: Vec<Elem>,
}

/// `Q_I = {s : ss* ≤ e and s*s ≤ e}` with the inherited operations.
pub fn partial_units(q: &InvolutiveQuantale) -> Result<PartialUnits, InvSemiError> {
    let elements = q.partial_unit_elements();
    let pos: HashMap<Elem, usize> = elements.iter().enumerate().map(|(i, &x)| (x, i)).collect();
    let n = elements.len();
    let mut mult = Vec::with_capacity(n * n);
    for &a in &elements {
        for &b in &elements {
            let ab = q.mult(a, b);
            let i = pos.get(&ab).ok_or_else(|| {
                let l = q.lattice();
                InvSemiError::NotClosed(format!("{}·{}", l.element_name(a), l.element_name(b)))
            })?;
            mult.push(*i);
        }
    }
    let inv = elements
        .iter()
        .map(|&a| {
            pos.get(&q.invol(a))
                .copied()
                .ok_or_else(|| InvSemiError::NotClosed(format!("{}*", q.lattice().element_name(a))))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let names = elements.iter().map(|&a| q.lattice().element_name(a)).collect();
    Ok(PartialUnits {
        semigroup: FiniteInverseSemigroup::new(names, mult, inv)?,
        elements,
    })
}

/// `ℒ(S)` as a quantale, with its compatible ideals and the embedding of `S`.
#[derive(Clone, Debug)]
pub struct Completion {
    pub quantale: InvolutiveQuantale,
    /// `ideals[x]` is the ideal behind element `x` of the quantale's lattice.
    pub ideals: Vec<FixedBitSet>,
    /// `embedding[s]` is the element `closure(↓s)`.
    pub embedding: Vec<Elem>,
}

struct Closure<'a> {
    s: &'a FiniteInverseSemigroup,
    up: Vec<FixedBitSet>,
    down: Vec<FixedBitSet>,
}

impl<'a> Closure<'a> {
    fn new(s: &'a FiniteInverseSemigroup) -> Self {
        let n = s.size();
        let mut up = vec![FixedBitSet::with_capacity(n); n];
        let mut down = vec![FixedBitSet::with_capacity(n); n];
        for a in 0..n {
            for b in 0..n {
                if s.leq(a, b) {
                    up[a].insert(b);
                    down[b].insert(a);
                }
            }
        }
        Self { s, up, down }
    }

    /// Smallest downset containing `x` that contains `t` whenever `t` is the
    /// join in `S` of the elements of the set below `t`. Sets bounded above
    /// are compatible, so this covers every existing compatible join.
    fn close(&self, x: &FixedBitSet) -> FixedBitSet {
        let n = self.s.size();
        let mut cur = FixedBitSet::with_capacity(n);
        for a in x.ones() {
            cur.union_with(&self.down[a]);
        }
        loop {
            let mut grew = false;
            for t in 0..n {
                if cur.contains(t) {
                    continue;
                }
                let mut ub = FixedBitSet::with_capacity(n);
                ub.insert_range(..);
                for z in cur.ones().filter(|&z| self.down[t].contains(z)) {
                    ub.intersect_with(&self.up[z]);
                }
                if ub.is_subset(&self.up[t]) {
                    cur.union_with(&self.down[t]);
                    grew = true;
                }
            }
            if !grew {
                return cur;
            }
        }
    }
}

/// Enumerates all closed sets of a closure operator on `0..n` in lectic order.
fn next_closure(
    n: usize,
    close: impl Fn(&FixedBitSet) -> FixedBitSet,
    limit: usize,
) -> Result<Vec<FixedBitSet>, InvSemiError> {
    let mut out = vec![close(&FixedBitSet::with_capacity(n))];
    loop {
        let a = out.last().unwrap().clone();
        let mut next = None;
        for i in (0..n).rev() {
            if a.contains(i) {
                continue;
            }
            let mut seed = FixedBitSet::with_capacity(n);
            seed.extend(a.ones().filter(|&j| j < i));
            seed.insert(i);
            let b = close(&seed);
            if b.ones().take_while(|&j| j < i).all(|j| a.contains(j)) {
                next = Some(b);
                break;
            }
        }
        match next {
            Some(b) => {
                if out.len() == limit {
                    return Err(InvSemiError::BudgetExceeded(limit));
                }
                out.push(b);
            }
            None => return Ok(out),
        }
    }
}

/// The completion `ℒ(S)`: downsets closed under the compatible joins that
/// exist in `S`, ordered by inclusion.
pub fn compatible_ideal_completion(
    s: &FiniteInverseSemigroup,
    max_semigroup: usize,
    max_ideals: usize,
) -> Result<Completion, InvSemiError> {
    let n = s.size();
    if n > max_semigroup {
        return Err(InvSemiError::TooLarge {
            size: n,
            bound: max_semigroup,
        });
    }
    if let Some(f) = s.validate().first_failure() {
        return Err(InvSemiError::Invalid(f.law.clone()));
    }
    let cl = Closure::new(s);
    let ideals = next_closure(n, |x| cl.close(x), max_ideals)?;
    let index: HashMap<FixedBitSet, Elem> =
        ideals.iter().enumerate().map(|(i, x)| (x.clone(), i)).collect();
    let names = ideals
        .iter()
        .map(|x| {
            let members: Vec<&str> = x.ones().map(|i| s.names[i].as_str()).collect();
            format!("{{{}}}", members.join(","))
        })
        .collect();
    let lattice = Arc::new(FiniteSupLattice::from_sets(names, &ideals, max_ideals)?);
    let lookup = |x: &FixedBitSet| index[&cl.close(x)];

    let jis = lattice.join_irreducibles().to_vec();
    let mut mult_ji = Vec::with_capacity(jis.len() * jis.len());
    for &i in &jis {
        for &j in &jis {
            let mut prod = FixedBitSet::with_capacity(n);
            for a in ideals[i].ones() {
                for b in ideals[j].ones() {
                    prod.insert(s.mul(a, b));
                }
            }
            mult_ji.push(lookup(&prod));
        }
    }
    let invol_ji = jis
        .iter()
        .map(|&i| {
            let mut star = FixedBitSet::with_capacity(n);
            star.extend(ideals[i].ones().map(|a| s.inv(a)));
            lookup(&star)
        })
        .collect();
    let mut idem = FixedBitSet::with_capacity(n);
    idem.extend(s.idempotents());
    let unit = lookup(&idem);
    let embedding = (0..n)
        .map(|a| {
            let mut x = FixedBitSet::with_capacity(n);
            x.insert(a);
            lookup(&x)
        })
        .collect();
    let quantale = InvolutiveQuantale::new(lattice, mult_ji, invol_ji, unit)
        .map_err(|e| InvSemiError::Invalid(e.to_string()))?;
    Ok(Completion {
        quantale,
        ideals,
        embedding,
    })
}

/// Checks that `I ↦ ⋁I` is an isomorphism `ℒ(Q_I) → Q` of unital involutive
/// quantales with inverse `q ↦ {s ∈ Q_I : s ≤ q}`.
pub fn check_completion_iso(
    q: &InvolutiveQuantale,
    pu: &PartialUnits,
    c: &Completion,
) -> ValidationReport {
    let mut r = ValidationReport::new("ℒ(Q_I) ≅ Q");
    let l = q.lattice();
    let cl = c.quantale.lattice();
    let phi: Vec<Elem> = c
        .ideals
        .iter()
        .map(|i| l.join_iter(i.ones().map(|s| pu.elements[s])))
        .collect();
    let mut hit = vec![false; l.size()];
    for &x in &phi {
        hit[x] = true;
    }
    r.record(
        "I ↦ ⋁I is a bijection",
        (phi.len() != l.size() || hit.iter().any(|h| !h))
            .then(|| format!("{} ideals for {} elements", phi.len(), l.size())),
    );
    let psi = |x: Elem| {
        let mut set = FixedBitSet::with_capacity(pu.elements.len());
        set.extend((0..pu.elements.len()).filter(|&s| l.leq(pu.elements[s], x)));
        set
    };
    r.check_all("q ↦ {s ≤ q} is inverse to I ↦ ⋁I", cl.elements(), |&i| {
        psi(phi[i]) == c.ideals[i]
    });
    let pairs = cl.elements().flat_map(|a| cl.elements().map(move |b| (a, b)));
    r.check_all("order isomorphism", pairs, |&(a, b)| {
        cl.leq(a, b) == l.leq(phi[a], phi[b])
    });
    let jis = cl.join_irreducibles();
    let ji_pairs = jis.iter().flat_map(|&a| jis.iter().map(move |&b| (a, b)));
    r.check_all("⋁(IJ) = ⋁I·⋁J", ji_pairs, |&(a, b)| {
        phi[c.quantale.mult(a, b)] == q.mult(phi[a], phi[b])
    });
    r.check_all("⋁(I*) = (⋁I)*", jis.iter(), |&&a| {
        phi[c.quantale.invol(a)] == q.invol(phi[a])
    });
    r.record(
        "⋁e = e",
        (phi[c.quantale.unit()] != q.unit()).then(|| l.element_name(phi[c.quantale.unit()])),
    );
    r
}

/// Joins of compatible pairs and triples of partial units exist in `Q` and are
/// again partial units.
pub fn check_compatible_joins(q: &InvolutiveQuantale, pu: &PartialUnits) -> ValidationReport {
    let mut r = ValidationReport::new("compatible joins of partial units");
    let s = &pu.semigroup;
    let n = s.size();
    let mut witness = None;
    'outer: for a in 0..n {
        for b in a..n {
            if !s.compatible(a, b) {
                continue;
            }
            for c in b..n {
                if !(s.compatible(a, c) && s.compatible(b, c)) {
                    continue;
                }
                let j = q
                    .lattice()
                    .join_iter([pu.elements[a], pu.elements[b], pu.elements[c]]);
                if !q.is_partial_unit(j) {
                    witness = Some(format!("{{{}, {}, {}}}", s.names[a], s.names[b], s.names[c]));
                    break 'outer;
                }
            }
        }
    }
    r.record("⋁Z ∈ Q_I for compatible Z", witness);
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groupoid::FiniteGroupoid;
    use crate::lattice::names;
    use crate::quantale::quantale_of_groupoid;

    fn z2() -> FiniteInverseSemigroup {
        FiniteInverseSemigroup::new(names(["e", "s"]), vec![0, 1, 1, 0], vec![0, 1]).unwrap()
    }

    #[test]
    fn validation_examples() {
        assert!(z2().validate().is_valid());
        let left_zero =
            FiniteInverseSemigroup::new(names(["x", "y"]), vec![0, 0, 1, 1], vec![0, 1]).unwrap();
        let r = left_zero.validate();
        assert_eq!(r.passed("idempotents commute"), Some(false));
        // symmetric inverse monoid on one point: ∅ map and identity
        let sim1 =
            FiniteInverseSemigroup::new(names(["0", "id"]), vec![0, 0, 0, 1], vec![0, 1]).unwrap();
        assert!(sim1.validate().is_valid());
        let oc = natural_order_and_compatibility(&sim1);
        assert!(oc.order[0][1] && !oc.order[1][0]);
        assert!(oc.compatibility[0][1]);
    }

    #[test]
    fn z2_order_is_equality() {
        let oc = natural_order_and_compatibility(&z2());
        assert_eq!(oc.order, vec![vec![true, false], vec![false, true]]);
        assert_eq!(oc.compatibility, oc.order);
    }

    #[test]
    fn partial_unit_counts() {
        let p2 = FiniteGroupoid::pair(names(["0", "1"])).unwrap();
        let q = quantale_of_groupoid(&p2).unwrap();
        let pu = partial_units(&q).unwrap();
        assert_eq!(pu.semigroup.size(), 7);
        assert!(pu.semigroup.validate().is_valid());
        // idempotents are exactly the elements below e
        let below_e: Vec<Elem> = q.lattice().elements().filter(|&x| q.lattice().leq(x, q.unit())).collect();
        let idem: Vec<Elem> = pu.semigroup.idempotents().iter().map(|&i| pu.elements[i]).collect();
        assert_eq!(idem, below_e);

        let qz = quantale_of_groupoid(&FiniteGroupoid::cyclic(2)).unwrap();
        assert_eq!(partial_units(&qz).unwrap().elements, vec![0b00, 0b01, 0b10]);
    }

    #[test]
    fn completions() {
        let c = compatible_ideal_completion(&z2(), 12, 1 << 10).unwrap();
        assert_eq!(c.quantale.lattice().size(), 4);

        let p2 = FiniteGroupoid::pair(names(["0", "1"])).unwrap();
        let q = quantale_of_groupoid(&p2).unwrap();
        let pu = partial_units(&q).unwrap();
        let c = compatible_ideal_completion(&pu.semigroup, 12, 1 << 10).unwrap();
        assert_eq!(c.quantale.lattice().size(), 16);
        let r = check_completion_iso(&q, &pu, &c);
        assert!(r.is_valid(), "{r}");

        // the empty set is a compatible set whose join in S is its least element
        let single = FiniteInverseSemigroup::new(names(["e"]), vec![0], vec![0]).unwrap();
        let c = compatible_ideal_completion(&single, 12, 16).unwrap();
        assert_eq!(c.quantale.lattice().size(), 1);
    }

    #[test]
    fn completion_respects_bounds() {
        let s = FiniteInverseSemigroup::new(
            (0..13).map(|i| i.to_string()).collect(),
            vec![0; 169],
            vec![0; 13],
        )
        .unwrap();
        assert!(matches!(
            compatible_ideal_completion(&s, 12, 16),
            Err(InvSemiError::TooLarge { size: 13, bound: 12 })
        ));
    }
}
