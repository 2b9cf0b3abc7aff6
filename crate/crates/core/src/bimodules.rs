//! Bisets and bimodules, composition by tensor product, the bimodule of a
//! homomorphism, and algebraic morphisms of groupoids.

use std::collections::HashMap;
use std::sync::Arc;

use thiserror::Error;

use crate::actions::{module_of_gset, tensor_over_q, ActionError, GSet, QModule, Side, Tensor};
use crate::groupoid::FiniteGroupoid;
use crate::lattice::{Elem, LatticeError};
use crate::quantale::{
    enumerate_unital_homs, groupoid_of_quantale, quantale_of_groupoid, validate_hom, InvolutiveQuantale,
    QuantaleError, QuantaleHom,
};
use crate::report::ValidationReport;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BimoduleError {
    #[error("malformed tables: {0}")]
    Shape(String),
    #[error("groupoids do not match: {0}")]
    Mismatch(String),
    #[error("not a unital multiplicative join-preserving map: {0}")]
    NotUnitalHom(String),
    #[error("search budget of {0} nodes exceeded")]
    BudgetExceeded(u64),
    #[error(transparent)]
    Action(#[from] ActionError),
    #[error(transparent)]
    Quantale(#[from] QuantaleError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

// ---- bisets ----------------------------------------------------------------------

/// A set with a left `G`-action anchored by `p` and a right `H`-action
/// anchored by `q`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Biset {
    left: FiniteGroupoid,
    right: FiniteGroupoid,
    points: Vec<String>,
    p: Vec<usize>,
    q: Vec<usize>,
    /// `act_left[g * points + x]`
    act_left: Vec<Option<usize>>,
    /// `act_right[h * points + x]`
    act_right: Vec<Option<usize>>,
}

impl Biset {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        left: FiniteGroupoid,
        right: FiniteGroupoid,
        points: Vec<String>,
        p: Vec<usize>,
        q: Vec<usize>,
        act_left: Vec<Option<usize>>,
        act_right: Vec<Option<usize>>,
    ) -> Result<Self, BimoduleError> {
        let n = points.len();
        if p.len() != n || q.len() != n {
            return Err(BimoduleError::Shape("anchors must cover every point".into()));
        }
        if p.iter().any(|&o| o >= left.object_count()) || q.iter().any(|&o| o >= right.object_count()) {
            return Err(BimoduleError::Shape("anchor out of range".into()));
        }
        if act_left.len() != left.arrow_count() * n || act_right.len() != right.arrow_count() * n {
            return Err(BimoduleError::Shape("actions must be arrows × points".into()));
        }
        if act_left.iter().chain(&act_right).flatten().any(|&y| y >= n) {
            return Err(BimoduleError::Shape("action value out of range".into()));
        }
        Ok(Self {
            left,
            right,
            points,
            p,
            q,
            act_left,
            act_right,
        })
    }

    /// `G_1` with left and right translations.
    pub fn unit(g: &FiniteGroupoid) -> Self {
        let n = g.arrow_count();
        let comp = |a: usize, b: usize| g.comp(a, b);
        Self {
            left: g.clone(),
            right: g.clone(),
            points: g.arrows().to_vec(),
            p: (0..n).map(|a| g.dom(a)).collect(),
            q: (0..n).map(|a| g.cod(a)).collect(),
            act_left: (0..n * n).map(|i| comp(i / n, i % n)).collect(),
            act_right: (0..n * n).map(|i| comp(i % n, i / n)).collect(),
        }
    }

    pub fn left_groupoid(&self) -> &FiniteGroupoid {
        &self.left
    }

    pub fn right_groupoid(&self) -> &FiniteGroupoid {
        &self.right
    }

    pub fn points(&self) -> &[String] {
        &self.points
    }

    pub fn point_count(&self) -> usize {
        self.points.len()
    }

    pub fn left_anchor(&self, x: usize) -> usize {
        self.p[x]
    }

    pub fn right_anchor(&self, x: usize) -> usize {
        self.q[x]
    }

    /// `g·x`
    #[inline]
    pub fn act_left(&self, g: usize, x: usize) -> Option<usize> {
        self.act_left[g * self.points.len() + x]
    }

    /// `x·h`
    #[inline]
    pub fn act_right(&self, x: usize, h: usize) -> Option<usize> {
        self.act_right[h * self.points.len() + x]
    }

    pub fn left_gset(&self) -> GSet {
        GSet::new(self.left.clone(), self.points.clone(), self.p.clone(), Side::Left, self.act_left.clone())
            .expect("checked at construction")
    }

    pub fn right_gset(&self) -> GSet {
        GSet::new(self.right.clone(), self.points.clone(), self.q.clone(), Side::Right, self.act_right.clone())
            .expect("checked at construction")
    }

    /// Every biset obtained by changing one entry of one action table.
    pub fn perturbations(&self) -> Vec<Biset> {
        let n = self.point_count();
        let alternatives = |cur: Option<usize>| {
            std::iter::once(None)
                .chain((0..n).map(Some))
                .filter(move |&v| v != cur)
        };
        let mut out = Vec::new();
        for i in 0..self.act_left.len() {
            for v in alternatives(self.act_left[i]) {
                let mut b = self.clone();
                b.act_left[i] = v;
                out.push(b);
            }
        }
        for i in 0..self.act_right.len() {
            for v in alternatives(self.act_right[i]) {
                let mut b = self.clone();
                b.act_right[i] = v;
                out.push(b);
            }
        }
        out
    }
}

/// The groupoid-level axioms: both actions valid, each anchor invariant
/// under the other action, and the actions commute.
pub fn biset_diagrams(b: &Biset) -> ValidationReport {
    let mut r = ValidationReport::new("biset");
    r.merge(b.left_gset().validate());
    r.merge(b.right_gset().validate());
    let n = b.point_count();
    let lefts = || (0..b.left.arrow_count()).flat_map(move |g| (0..n).map(move |x| (g, x)));
    let rights = || (0..b.right.arrow_count()).flat_map(move |h| (0..n).map(move |x| (x, h)));
    let point = |x: usize| b.points[x].clone();
    r.check_all("q(g·x) = q(x)", lefts().map(|(g, x)| (b.left.arrows()[g].clone(), point(x), g, x)), |c| {
        b.act_left(c.2, c.3).is_none_or(|y| b.q[y] == b.q[c.3])
    });
    r.check_all("p(x·h) = p(x)", rights().map(|(x, h)| (point(x), b.right.arrows()[h].clone(), x, h)), |c| {
        b.act_right(c.2, c.3).is_none_or(|y| b.p[y] == b.p[c.2])
    });
    let triples = (0..b.left.arrow_count())
        .flat_map(|g| rights().map(move |(x, h)| (g, x, h)))
        .map(|(g, x, h)| (b.left.arrows()[g].clone(), point(x), b.right.arrows()[h].clone(), g, x, h));
    r.check_all("(g·x)·h = g·(x·h)", triples, |c| {
        let (g, x, h) = (c.3, c.4, c.5);
        match (b.act_left(g, x).and_then(|y| b.act_right(y, h)), b.act_right(x, h).and_then(|y| b.act_left(g, y))) {
            (Some(a), Some(c)) => a == c,
            _ => true,
        }
    });
    r
}

/// Groupoid-level diagrams together with the bimodule laws of the induced
/// powerset bimodule.
pub fn validate_biset(b: &Biset) -> ValidationReport {
    let mut r = biset_diagrams(b);
    match bimodule_of_biset(b) {
        Ok(m) => r.merge(m.validate()),
        Err(e) => r.record("induced bimodule", Some(e.to_string())),
    }
    r
}

// ---- lattice-level bimodules ------------------------------------------------------

/// A sup-lattice with a left and a right quantale action.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bimodule {
    pub left: QModule,
    pub right: QModule,
}

impl Bimodule {
    pub fn new(left: QModule, right: QModule) -> Result<Self, BimoduleError> {
        if left.side() != Side::Left || right.side() != Side::Right {
            return Err(BimoduleError::Shape("need a left and a right module".into()));
        }
        if left.lattice() != right.lattice() {
            return Err(BimoduleError::Shape("modules have different carriers".into()));
        }
        Ok(Self { left, right })
    }

    /// Both module structures, their anchor conditions and
    /// `(a·x)·b = a·(x·b)`.
    pub fn validate(&self) -> ValidationReport {
        let mut r = ValidationReport::new("bimodule");
        let mut l = self.left.validate();
        l.subject = "left module".into();
        let mut rr = self.right.validate();
        rr.subject = "right module".into();
        r.merge(l);
        r.merge(rr);
        let (ql, rl, xl) = (
            self.left.quantale().lattice(),
            self.right.quantale().lattice(),
            self.left.lattice(),
        );
        let (qj, rj, xj) = (ql.join_irreducibles(), rl.join_irreducibles(), xl.join_irreducibles());
        let triples = qj
            .iter()
            .flat_map(|&a| xj.iter().flat_map(move |&x| rj.iter().map(move |&b| (a, x, b))));
        r.check_all("(a·x)·b = a·(x·b)", triples, |&(a, x, b)| {
            self.right.act(b, self.left.act(a, x)) == self.left.act(a, self.right.act(b, x))
        });
        r
    }
}

pub fn bimodule_of_biset(b: &Biset) -> Result<Bimodule, BimoduleError> {
    Bimodule::new(module_of_gset(&b.left_gset())?, module_of_gset(&b.right_gset())?)
}

/// `X_h`: the carrier of the target with `a·x = h(a)x` and `x·b = xb`.
pub fn bimodule_of_hom(h: &QuantaleHom) -> Result<Bimodule, BimoduleError> {
    let flags = h.flags();
    if !(flags.join_preserving && flags.multiplicative && flags.unital) {
        return Err(BimoduleError::NotUnitalHom(format!("{flags:?}")));
    }
    let (q, r) = (&h.source, &h.target);
    let (ql, rl) = (q.lattice(), r.lattice());
    let k = rl.ji_count();
    let left: Vec<Elem> = (0..ql.ji_count())
        .flat_map(|i| (0..k).map(move |j| (i, j)))
        .map(|(i, j)| r.mult(h.apply(ql.ji(i)), rl.ji(j)))
        .collect();
    let right: Vec<Elem> = (0..k)
        .flat_map(|i| (0..k).map(move |j| (i, j)))
        .map(|(i, j)| r.mult(rl.ji(j), rl.ji(i)))
        .collect();
    let carrier = r.lattice_arc().clone();
    Bimodule::new(
        QModule::new(q.clone(), carrier.clone(), left, Side::Left)?,
        QModule::new(r.clone(), carrier, right, Side::Right)?,
    )
}

// ---- composition ---------------------------------------------------------------

/// `B1 ⊗_H B2` as the orbit biset of the diagonal action.
#[derive(Clone, Debug)]
pub struct Composite {
    pub biset: Biset,
    pub tensor: Tensor,
    class_of: HashMap<(usize, usize), usize>,
    pub report: ValidationReport,
}

impl Composite {
    /// The orbit containing `x ⊗ y`, if `(x, y)` lies in the fibred product.
    pub fn class_of(&self, x: usize, y: usize) -> Option<usize> {
        self.class_of.get(&(x, y)).copied()
    }

    /// A representative `(x, y)` of an orbit.
    pub fn representative(&self, c: usize) -> (usize, usize) {
        self.tensor.diagonal.pairs[self.tensor.classes[c][0]]
    }

    pub fn bimodule(&self) -> Result<Bimodule, BimoduleError> {
        bimodule_of_biset(&self.biset)
    }
}

/// `B2 ∘ B1 = B1 ⊗_H B2` with outer actions `g·[x⊗y] = [gx⊗y]` and
/// `[x⊗y]·k = [x⊗yk]`.
pub fn compose_bimodules(b1: &Biset, b2: &Biset) -> Result<Composite, BimoduleError> {
    if b1.right != b2.left {
        return Err(BimoduleError::Mismatch("middle groupoids differ".into()));
    }
    let tensor = tensor_over_q(&b1.right_gset(), &b2.left_gset())?;
    let pairs = &tensor.diagonal.pairs;
    let mut class_of = HashMap::new();
    for (c, members) in tensor.classes.iter().enumerate() {
        for &i in members {
            class_of.insert(pairs[i], c);
        }
    }
    let names = tensor.lattice()?.carrier().map(|c| c.to_vec()).unwrap_or_default();
    let reps: Vec<(usize, usize)> = tensor.classes.iter().map(|c| pairs[c[0]]).collect();
    let nc = reps.len();
    let (g, k) = (&b1.left, &b2.right);
    let left_of = |a: usize, (x, y): (usize, usize)| b1.act_left(a, x).and_then(|x2| class_of.get(&(x2, y)).copied());
    let right_of = |(x, y): (usize, usize), a: usize| b2.act_right(y, a).and_then(|y2| class_of.get(&(x, y2)).copied());
    let act_left = (0..g.arrow_count() * nc).map(|i| left_of(i / nc, reps[i % nc])).collect();
    let act_right = (0..k.arrow_count() * nc).map(|i| right_of(reps[i % nc], i / nc)).collect();
    let biset = Biset::new(
        g.clone(),
        k.clone(),
        names,
        reps.iter().map(|&(x, _)| b1.p[x]).collect(),
        reps.iter().map(|&(_, y)| b2.q[y]).collect(),
        act_left,
        act_right,
    )?;

    let mut report = ValidationReport::new("composite");
    report.merge(tensor.report.clone());
    let members = || {
        tensor
            .classes
            .iter()
            .enumerate()
            .flat_map(|(c, m)| m.iter().map(move |&i| (c, pairs[i])))
    };
    report.check_all("anchors are constant on orbits", members(), |&(c, (x, y))| {
        b1.p[x] == biset.p[c] && b2.q[y] == biset.q[c]
    });
    let lcases = members().flat_map(|m| (0..g.arrow_count()).map(move |a| (a, m)));
    report.check_all("g·[x⊗y] is well defined", lcases, |&(a, (c, xy))| {
        left_of(a, xy) == biset.act_left(a, c)
    });
    let rcases = members().flat_map(|m| (0..k.arrow_count()).map(move |a| (a, m)));
    report.check_all("[x⊗y]·k is well defined", rcases, |&(a, (c, xy))| {
        right_of(xy, a) == biset.act_right(c, a)
    });
    report.merge(validate_biset(&biset));
    Ok(Composite {
        biset,
        tensor,
        class_of,
        report,
    })
}

/// Checks that `map` is an isomorphism of bisets `a → b`.
pub fn check_biset_map(a: &Biset, b: &Biset, map: &[usize]) -> ValidationReport {
    let mut r = ValidationReport::new("biset isomorphism");
    if a.left != b.left || a.right != b.right || map.len() != a.point_count() {
        r.record("same groupoids and sizes", Some("shape".into()));
        return r;
    }
    let mut seen = vec![false; b.point_count()];
    let mut bij = a.point_count() == b.point_count();
    for &y in map {
        if y >= seen.len() || seen[y] {
            bij = false;
            break;
        }
        seen[y] = true;
    }
    r.record("bijective", (!bij).then(|| format!("{map:?}")));
    if !bij {
        return r;
    }
    let n = a.point_count();
    r.check_all("preserves anchors", 0..n, |&x| {
        a.p[x] == b.p[map[x]] && a.q[x] == b.q[map[x]]
    });
    let lefts = (0..a.left.arrow_count()).flat_map(|g| (0..n).map(move |x| (g, x)));
    r.check_all("φ(g·x) = g·φ(x)", lefts, |&(g, x)| {
        a.act_left(g, x).map(|y| map[y]) == b.act_left(g, map[x])
    });
    let rights = (0..a.right.arrow_count()).flat_map(|h| (0..n).map(move |x| (x, h)));
    r.check_all("φ(x·h) = φ(x)·h", rights, |&(x, h)| {
        a.act_right(x, h).map(|y| map[y]) == b.act_right(map[x], h)
    });
    r
}

/// An isomorphism of bisets found by backtracking over anchor-compatible
/// point assignments.
pub fn find_biset_isomorphism(a: &Biset, b: &Biset) -> Option<Vec<usize>> {
    if a.left != b.left || a.right != b.right || a.point_count() != b.point_count() {
        return None;
    }
    fn go(a: &Biset, b: &Biset, map: &mut Vec<usize>, used: &mut Vec<bool>) -> bool {
        let x = map.len();
        if x == a.point_count() {
            return check_biset_map(a, b, map).is_valid();
        }
        for y in 0..b.point_count() {
            if used[y] || a.p[x] != b.p[y] || a.q[x] != b.q[y] {
                continue;
            }
            // actions between already assigned points must agree
            map.push(y);
            let ok = (0..a.left.arrow_count()).all(|g| {
                (0..=x).all(|z| match a.act_left(g, z) {
                    Some(w) if w <= x => b.act_left(g, map[z]) == Some(map[w]),
                    _ => true,
                })
            }) && (0..a.right.arrow_count()).all(|h| {
                (0..=x).all(|z| match a.act_right(z, h) {
                    Some(w) if w <= x => b.act_right(map[z], h) == Some(map[w]),
                    _ => true,
                })
            });
            used[y] = true;
            if ok && go(a, b, map, used) {
                return true;
            }
            used[y] = false;
            map.pop();
        }
        false
    }
    let mut map = Vec::new();
    let mut used = vec![false; b.point_count()];
    go(a, b, &mut map, &mut used).then_some(map)
}

/// `U_G ∘ B ≅ B` via `[g⊗x] ↦ g·x`.
pub fn check_left_unitor(b: &Biset) -> Result<ValidationReport, BimoduleError> {
    let c = compose_bimodules(&Biset::unit(&b.left), b)?;
    Ok(canonical(c, b, |g, x| b.act_left(g, x), "[g⊗x] ↦ g·x"))
}

/// `B ∘ U_H ≅ B` via `[x⊗h] ↦ x·h`.
pub fn check_right_unitor(b: &Biset) -> Result<ValidationReport, BimoduleError> {
    let c = compose_bimodules(b, &Biset::unit(&b.right))?;
    Ok(canonical(c, b, |x, h| b.act_right(x, h), "[x⊗h] ↦ x·h"))
}

/// `(B1 ⊗ B2) ⊗ B3 ≅ B1 ⊗ (B2 ⊗ B3)` via `[[x⊗y]⊗z] ↦ [x⊗[y⊗z]]`.
pub fn check_associator(b1: &Biset, b2: &Biset, b3: &Biset) -> Result<ValidationReport, BimoduleError> {
    let c12 = compose_bimodules(b1, b2)?;
    let c23 = compose_bimodules(b2, b3)?;
    let lhs = compose_bimodules(&c12.biset, b3)?;
    let rhs = compose_bimodules(b1, &c23.biset)?;
    let mut r = ValidationReport::new("associator");
    let mut map = Vec::with_capacity(lhs.biset.point_count());
    let mut undefined = None;
    for i in 0..lhs.biset.point_count() {
        let (xy, z) = lhs.representative(i);
        let (x, y) = c12.representative(xy);
        match c23.class_of(y, z).and_then(|yz| rhs.class_of(x, yz)) {
            Some(t) => map.push(t),
            None => {
                undefined.get_or_insert_with(|| lhs.biset.points()[i].clone());
                map.push(0);
            }
        }
    }
    r.record("[[x⊗y]⊗z] ↦ [x⊗[y⊗z]] is defined", undefined);
    // independence of the representative
    let mut indep = None;
    for (i, members) in lhs.tensor.classes.iter().enumerate() {
        for &m in members {
            let (xy, z) = lhs.tensor.diagonal.pairs[m];
            for &m2 in &c12.tensor.classes[xy] {
                let (x, y) = c12.tensor.diagonal.pairs[m2];
                let t = c23.class_of(y, z).and_then(|yz| rhs.class_of(x, yz));
                if t.is_some() && t != Some(map[i]) && indep.is_none() {
                    indep = Some(lhs.biset.points()[i].clone());
                }
            }
        }
    }
    r.record("independent of representatives", indep);
    for part in [&c12.report, &c23.report, &lhs.report, &rhs.report] {
        r.merge(part.clone());
    }
    r.merge(check_biset_map(&lhs.biset, &rhs.biset, &map));
    Ok(r)
}

fn canonical(
    c: Composite,
    b: &Biset,
    formula: impl Fn(usize, usize) -> Option<usize>,
    law: &str,
) -> ValidationReport {
    let mut r = ValidationReport::new(law);
    r.merge(c.report.clone());
    let pairs = &c.tensor.diagonal.pairs;
    let map: Vec<usize> = c
        .tensor
        .classes
        .iter()
        .map(|m| {
            let (x, y) = pairs[m[0]];
            formula(x, y).unwrap_or(usize::MAX)
        })
        .collect();
    let members = c
        .tensor
        .classes
        .iter()
        .enumerate()
        .flat_map(|(i, m)| m.iter().map(move |&j| (i, j)));
    r.check_all("constant on orbits", members, |&(i, j)| {
        let (x, y) = pairs[j];
        formula(x, y) == Some(map[i])
    });
    r.merge(check_biset_map(&c.biset, b, &map));
    r
}

// ---- algebraic morphisms -----------------------------------------------------------

/// A left action of `G` on `H_1`, anchored by `p : H_1 → G_0`, commuting with
/// right multiplication in `H`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlgebraicMorphism {
    source: FiniteGroupoid,
    target: FiniteGroupoid,
    anchor: Vec<usize>,
    /// `act[g * |H_1| + k]`
    act: Vec<Option<usize>>,
}

impl AlgebraicMorphism {
    pub fn new(
        source: FiniteGroupoid,
        target: FiniteGroupoid,
        anchor: Vec<usize>,
        act: Vec<Option<usize>>,
    ) -> Result<Self, BimoduleError> {
        let (ng, nh) = (source.arrow_count(), target.arrow_count());
        if anchor.len() != nh || anchor.iter().any(|&x| x >= source.object_count()) {
            return Err(BimoduleError::Shape("anchor must map target arrows to source objects".into()));
        }
        if act.len() != ng * nh || act.iter().flatten().any(|&k| k >= nh) {
            return Err(BimoduleError::Shape("action must be source arrows × target arrows".into()));
        }
        Ok(Self {
            source,
            target,
            anchor,
            act,
        })
    }

    pub fn source(&self) -> &FiniteGroupoid {
        &self.source
    }

    pub fn target(&self) -> &FiniteGroupoid {
        &self.target
    }

    pub fn anchor(&self, k: usize) -> usize {
        self.anchor[k]
    }

    pub fn anchors(&self) -> &[usize] {
        &self.anchor
    }

    /// `g·k`
    #[inline]
    pub fn act(&self, g: usize, k: usize) -> Option<usize> {
        self.act[g * self.target.arrow_count() + k]
    }

    pub fn table(&self) -> &[Option<usize>] {
        &self.act
    }

    pub fn gset(&self) -> GSet {
        GSet::new(
            self.source.clone(),
            self.target.arrows().to_vec(),
            self.anchor.clone(),
            Side::Left,
            self.act.clone(),
        )
        .expect("checked at construction")
    }

    /// `H_1` as a `G`-`H` biset.
    pub fn biset(&self) -> Biset {
        let h = &self.target;
        let n = h.arrow_count();
        Biset::new(
            self.source.clone(),
            h.clone(),
            h.arrows().to_vec(),
            self.anchor.clone(),
            (0..n).map(|k| h.cod(k)).collect(),
            self.act.clone(),
            (0..n * n).map(|i| h.comp(i % n, i / n)).collect(),
        )
        .expect("tables have matching shapes")
    }
}

pub fn validate_algmorph(a: &AlgebraicMorphism) -> ValidationReport {
    let mut r = ValidationReport::new("algebraic morphism");
    r.merge(a.gset().validate());
    let (g, h) = (&a.source, &a.target);
    let (ng, nh) = (g.arrow_count(), h.arrow_count());
    let pairs = || (0..ng).flat_map(move |x| (0..nh).map(move |k| (x, k)));
    r.check_all("r(g·k) = r(k)", pairs(), |&(x, k)| a.act(x, k).is_none_or(|y| h.cod(y) == h.cod(k)));
    let hpairs = (0..nh).flat_map(|k| (0..nh).map(move |l| (k, l)));
    r.check_all("p(k·k') = p(k)", hpairs, |&(k, l)| {
        h.comp(k, l).is_none_or(|kl| a.anchor[kl] == a.anchor[k])
    });
    let triples = pairs().flat_map(|(x, k)| (0..nh).map(move |l| (x, k, l)));
    r.check_all("g·(k·k') = (g·k)·k'", triples, |&(x, k, l)| match h.comp(k, l) {
        Some(kl) => a.act(x, kl) == a.act(x, k).and_then(|y| h.comp(y, l)),
        None => true,
    });
    r
}

/// `(d, m)`: left translation of `G` on `G_1`.
pub fn identity_algmorph(g: &FiniteGroupoid) -> AlgebraicMorphism {
    let n = g.arrow_count();
    AlgebraicMorphism::new(
        g.clone(),
        g.clone(),
        (0..n).map(|k| g.dom(k)).collect(),
        (0..n * n).map(|i| g.comp(i / n, i % n)).collect(),
    )
    .expect("translation tables are well formed")
}

/// `(q, 𝔟) ∘ (p, 𝔞) = (p∘u_H∘q, 𝔠)` with `g·𝔠 k = (g·𝔞 u_H(q k))·𝔟 k`.
pub fn compose_algmorphs(
    a1: &AlgebraicMorphism,
    a2: &AlgebraicMorphism,
) -> Result<AlgebraicMorphism, BimoduleError> {
    if a1.target != a2.source {
        return Err(BimoduleError::Mismatch("middle groupoids differ".into()));
    }
    let h = &a1.target;
    let k = &a2.target;
    let nk = k.arrow_count();
    let anchor = (0..nk).map(|x| a1.anchor[h.unit(a2.anchor[x])]).collect();
    let act = (0..a1.source.arrow_count() * nk)
        .map(|i| {
            let (g, x) = (i / nk, i % nk);
            a1.act(g, h.unit(a2.anchor[x])).and_then(|y| a2.act(y, x))
        })
        .collect();
    AlgebraicMorphism::new(a1.source.clone(), k.clone(), anchor, act)
}

/// Reads `X_h` as a bi-action. `h` must go between quantales whose atoms are
/// indexed by the arrows of `g` and `hh`.
pub fn hom_to_algmorph_on(
    h: &QuantaleHom,
    g: &FiniteGroupoid,
    hh: &FiniteGroupoid,
) -> Result<AlgebraicMorphism, BimoduleError> {
    let (sl, tl) = (h.source.lattice(), h.target.lattice());
    if !sl.is_boolean() || !tl.is_boolean() {
        return Err(QuantaleError::NotBoolean.into());
    }
    if sl.ji_count() != g.arrow_count() || tl.ji_count() != hh.arrow_count() {
        return Err(BimoduleError::Mismatch("atoms do not match arrows".into()));
    }
    let flags = h.flags();
    if !(flags.join_preserving && flags.multiplicative && flags.unital) {
        return Err(BimoduleError::NotUnitalHom(format!("{flags:?}")));
    }
    let image = |a: usize| -> Vec<usize> {
        let v = h.apply(sl.ji(a));
        (0..tl.ji_count()).filter(|&j| tl.leq(tl.ji(j), v)).collect()
    };
    let nh = hh.arrow_count();
    let mut anchor = Vec::with_capacity(nh);
    for k in 0..nh {
        let u = hh.unit(hh.dom(k));
        let found: Vec<usize> = (0..g.object_count())
            .filter(|&x| image(g.unit(x)).contains(&u))
            .collect();
        match found.as_slice() {
            [x] => anchor.push(*x),
            _ => return Err(BimoduleError::NotUnitalHom(format!("anchor of {} is ambiguous", hh.arrows()[k]))),
        }
    }
    let mut act = Vec::with_capacity(g.arrow_count() * nh);
    for a in 0..g.arrow_count() {
        let img = image(a);
        for k in 0..nh {
            let found: Vec<usize> = img.iter().filter_map(|&b| hh.comp(b, k)).collect();
            match found.as_slice() {
                [] => act.push(None),
                [y] => act.push(Some(*y)),
                _ => {
                    return Err(BimoduleError::NotUnitalHom(format!(
                        "h({})·{} has several atoms",
                        g.arrows()[a],
                        hh.arrows()[k]
                    )))
                }
            }
        }
    }
    AlgebraicMorphism::new(g.clone(), hh.clone(), anchor, act)
}

/// `h ↦ X_h` read as an algebraic morphism `𝒢(Q) → 𝒢(R)`.
pub fn hom_to_algmorph(h: &QuantaleHom) -> Result<AlgebraicMorphism, BimoduleError> {
    let g = groupoid_of_quantale(&h.source)?;
    let hh = groupoid_of_quantale(&h.target)?;
    hom_to_algmorph_on(h, &g, &hh)
}

/// `h(U) = {g·u_y : g ∈ U, y ∈ H_0}` as a map `og → oh` between the quantales
/// of the source and target groupoids.
pub fn algmorph_to_hom_over(
    a: &AlgebraicMorphism,
    og: &Arc<InvolutiveQuantale>,
    oh: &Arc<InvolutiveQuantale>,
) -> QuantaleHom {
    let hh = &a.target;
    let images: Vec<Elem> = (0..a.source.arrow_count())
        .map(|g| {
            (0..hh.object_count())
                .filter_map(|y| a.act(g, hh.unit(y)))
                .fold(0, |acc, k| acc | 1 << k)
        })
        .collect();
    QuantaleHom::from_ji_images(og.clone(), oh.clone(), &images)
}

pub fn algmorph_to_hom(a: &AlgebraicMorphism) -> Result<QuantaleHom, BimoduleError> {
    let og = Arc::new(quantale_of_groupoid(&a.source)?);
    let oh = Arc::new(quantale_of_groupoid(&a.target)?);
    Ok(algmorph_to_hom_over(a, &og, &oh))
}

/// Every algebraic morphism `G → H`, sorted by anchor then action table.
///
/// The action is determined by its values on unit arrows, since
/// `g·k = (g·u_{d k})·k`; those values are chosen by backtracking over
/// the arrows of `G`, checking `(gg')·u = g·(g'·u)` as soon as all three
/// arrows are assigned.
pub fn enumerate_algmorphs(
    g: &FiniteGroupoid,
    h: &FiniteGroupoid,
    budget: u64,
) -> Result<Vec<AlgebraicMorphism>, BimoduleError> {
    let (g0, h0) = (g.object_count(), h.object_count());
    let mut out = Vec::new();
    let mut nodes = 0u64;
    let total = (g0 as f64).powi(h0 as i32);
    if total > budget as f64 {
        return Err(BimoduleError::BudgetExceeded(budget));
    }
    let mut p0 = vec![0usize; h0];
    loop {
        let mut st = AlgSearch {
            g,
            h,
            p0: &p0,
            values: vec![None; g.arrow_count() * h0],
            nodes: &mut nodes,
            budget,
            out: &mut out,
        };
        st.arrow(0)?;
        // next anchor on objects
        let mut i = 0;
        loop {
            if i == h0 {
                out.sort_by(|a, b| (&a.anchor, &a.act).cmp(&(&b.anchor, &b.act)));
                return Ok(out);
            }
            p0[i] += 1;
            if p0[i] < g0 {
                break;
            }
            p0[i] = 0;
            i += 1;
        }
    }
}

struct AlgSearch<'a> {
    g: &'a FiniteGroupoid,
    h: &'a FiniteGroupoid,
    p0: &'a [usize],
    /// `values[a * |H_0| + y] = a·u_y`
    values: Vec<Option<usize>>,
    nodes: &'a mut u64,
    budget: u64,
    out: &'a mut Vec<AlgebraicMorphism>,
}

impl AlgSearch<'_> {
    fn slot(&self, a: usize, y: usize) -> usize {
        a * self.h.object_count() + y
    }

    /// `a·k` from the unit values, for arrows already assigned.
    fn act(&self, a: usize, k: usize) -> Option<usize> {
        let b = self.values[self.slot(a, self.h.dom(k))]?;
        self.h.comp(b, k)
    }

    fn arrow(&mut self, a: usize) -> Result<(), BimoduleError> {
        if a == self.g.arrow_count() {
            self.emit()?;
            return Ok(());
        }
        let ys: Vec<usize> = (0..self.h.object_count())
            .filter(|&y| self.p0[y] == self.g.cod(a))
            .collect();
        self.fill(a, &ys, 0)
    }

    fn fill(&mut self, a: usize, ys: &[usize], i: usize) -> Result<(), BimoduleError> {
        *self.nodes += 1;
        if *self.nodes > self.budget {
            return Err(BimoduleError::BudgetExceeded(self.budget));
        }
        if i == ys.len() {
            if self.consistent(a) {
                self.arrow(a + 1)?;
            }
            return Ok(());
        }
        let y = ys[i];
        let s = self.slot(a, y);
        let candidates: Vec<usize> = if self.g.is_unit(a) {
            vec![self.h.unit(y)]
        } else {
            (0..self.h.arrow_count())
                .filter(|&b| self.h.cod(b) == y && self.p0[self.h.dom(b)] == self.g.dom(a))
                .collect()
        };
        for b in candidates {
            self.values[s] = Some(b);
            self.fill(a, ys, i + 1)?;
        }
        self.values[s] = None;
        Ok(())
    }

    /// `(xx')·u_y = x·(x'·u_y)` for composable arrows assigned so far, with
    /// `a` the largest of the three.
    fn consistent(&self, a: usize) -> bool {
        let g = self.g;
        for x in 0..=a {
            for x2 in 0..=a {
                let Some(c) = g.comp(x, x2) else { continue };
                if x.max(x2).max(c) != a {
                    continue;
                }
                for y in (0..self.h.object_count()).filter(|&y| self.p0[y] == g.cod(x2)) {
                    let lhs = self.values[self.slot(c, y)];
                    let rhs = self.values[self.slot(x2, y)].and_then(|k| self.act(x, k));
                    if lhs != rhs {
                        return false;
                    }
                }
            }
        }
        true
    }

    fn emit(&mut self) -> Result<(), BimoduleError> {
        let nh = self.h.arrow_count();
        let anchor = (0..nh).map(|k| self.p0[self.h.dom(k)]).collect();
        let act = (0..self.g.arrow_count() * nh)
            .map(|i| {
                let (a, k) = (i / nh, i % nh);
                if self.p0[self.h.dom(k)] == self.g.cod(a) {
                    self.act(a, k)
                } else {
                    None
                }
            })
            .collect();
        let m = AlgebraicMorphism::new(self.g.clone(), self.h.clone(), anchor, act)?;
        if validate_algmorph(&m).is_valid() {
            self.out.push(m);
        }
        Ok(())
    }
}

/// `X_{a1} ⊗ X_{a2} ≅ X_{a2∘a1}` via `[k⊗l] ↦ k·l`, the action of `a2`.
pub fn check_composite_bimodule(
    a1: &AlgebraicMorphism,
    a2: &AlgebraicMorphism,
) -> Result<ValidationReport, BimoduleError> {
    let c = compose_bimodules(&a1.biset(), &a2.biset())?;
    let direct = compose_algmorphs(a1, a2)?.biset();
    Ok(canonical(c, &direct, |k, l| a2.act(k, l), "[k⊗l] ↦ k·l"))
}

/// Compares algebraic morphisms `G → H` with unital homomorphisms
/// `𝒪(G) → 𝒪(H)`: equal counts, mutually inverse round trips, and every
/// image a unital involutive quantale homomorphism.
pub fn check_algmorph_correspondence(
    g: &FiniteGroupoid,
    h: &FiniteGroupoid,
    og: &Arc<InvolutiveQuantale>,
    oh: &Arc<InvolutiveQuantale>,
    budget: u64,
) -> Result<(Vec<AlgebraicMorphism>, Vec<QuantaleHom>, ValidationReport), BimoduleError> {
    let ams = enumerate_algmorphs(g, h, budget)?;
    let homs = enumerate_unital_homs(og, oh, budget)?;
    let mut r = ValidationReport::new(format!("algebraic morphisms {} arrows → {} arrows", g.arrow_count(), h.arrow_count()));
    r.record(
        "|algebraic morphisms| = |unital homs|",
        (ams.len() != homs.len()).then(|| format!("{} vs {}", ams.len(), homs.len())),
    );
    let images: Vec<QuantaleHom> = ams.iter().map(|a| algmorph_to_hom_over(a, og, oh)).collect();
    r.check_all("algmorph_to_hom gives a unital involutive quantale hom", 0..ams.len(), |&i| {
        let (f, _) = validate_hom(&images[i]);
        f.join_preserving && f.multiplicative && f.unital && f.involutive
    });
    r.check_all("hom_to_algmorph(algmorph_to_hom(A)) = A", 0..ams.len(), |&i| {
        hom_to_algmorph_on(&images[i], g, h).as_ref() == Ok(&ams[i])
    });
    r.check_all("algmorph_to_hom(hom_to_algmorph(h)) = h", 0..homs.len(), |&i| {
        hom_to_algmorph_on(&homs[i], g, h).is_ok_and(|a| algmorph_to_hom_over(&a, og, oh) == homs[i])
    });
    let mut sorted = images.clone();
    sorted.sort_by(|a, b| a.map.cmp(&b.map));
    sorted.dedup();
    r.record(
        "algmorph_to_hom is injective",
        (sorted.len() != images.len()).then(|| format!("{} distinct of {}", sorted.len(), images.len())),
    );
    Ok((ams, homs, r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::names;

    fn z2() -> FiniteGroupoid {
        FiniteGroupoid::cyclic(2)
    }

    fn p2() -> FiniteGroupoid {
        FiniteGroupoid::pair(names(["0", "1"])).unwrap()
    }

    fn oq(g: &FiniteGroupoid) -> Arc<InvolutiveQuantale> {
        Arc::new(quantale_of_groupoid(g).unwrap())
    }

    #[test]
    fn unit_biset_is_valid() {
        for g in [z2(), p2()] {
            let r = validate_biset(&Biset::unit(&g));
            assert!(r.is_valid(), "{r}");
        }
    }

    #[test]
    fn parity_twisted_biset() {
        let (p, z) = (p2(), z2());
        let n = p.arrow_count();
        let flip = |x: usize| p.arrow_index(&format!("({},{})", p.dom(x), 1 - p.cod(x))).unwrap();
        let b = Biset::new(
            p.clone(),
            z.clone(),
            p.arrows().to_vec(),
            (0..n).map(|x| p.dom(x)).collect(),
            vec![0; n],
            (0..n * n).map(|i| p.comp(i / n, i % n)).collect(),
            (0..2 * n).map(|i| Some(if i / n == 1 { flip(i % n) } else { i % n })).collect(),
        )
        .unwrap();
        let r = validate_biset(&b);
        assert!(r.is_valid(), "{r}");
    }

    #[test]
    fn non_invariant_anchor_fails() {
        // left Z2 acting by swapping two points over different right objects
        let (z, d) = (z2(), FiniteGroupoid::discrete(names(["a", "b"])).unwrap());
        let b = Biset::new(
            z.clone(),
            d.clone(),
            names(["x", "y"]),
            vec![0, 0],
            vec![0, 1],
            (0..4).map(|i| Some(if i / 2 == 1 { 1 - i % 2 } else { i % 2 })).collect(),
            (0..4).map(|i| (i / 2 == i % 2).then_some(i % 2)).collect(),
        )
        .unwrap();
        let r = validate_biset(&b);
        let f = r.first_failure().unwrap();
        assert_eq!(f.law, "q(g·x) = q(x)");
        assert!(f.witness.as_ref().unwrap().contains("x"));
    }

    #[test]
    fn perturbations_break_both_levels() {
        let b = Biset::unit(&z2());
        for c in b.perturbations() {
            assert_eq!(biset_diagrams(&c).is_valid(), bimodule_of_biset(&c).unwrap().validate().is_valid());
        }
    }

    #[test]
    fn unit_composition() {
        let u = Biset::unit(&z2());
        let c = compose_bimodules(&u, &u).unwrap();
        assert!(c.report.is_valid(), "{}", c.report);
        assert_eq!(c.biset.point_count(), 2);
        assert!(find_biset_isomorphism(&c.biset, &u).is_some());
        assert!(check_left_unitor(&u).unwrap().is_valid());
        assert!(check_right_unitor(&u).unwrap().is_valid());
        let r = check_associator(&u, &u, &u).unwrap();
        assert!(r.is_valid(), "{r}");
    }

    #[test]
    fn hom_bimodules() {
        let q = oq(&z2());
        let homs = enumerate_unital_homs(&q, &q, 1 << 20).unwrap();
        assert_eq!(homs.len(), 2);
        for h in &homs {
            let m = bimodule_of_hom(h).unwrap();
            assert!(m.validate().is_valid(), "{}", m.validate());
            let a = hom_to_algmorph(h).unwrap();
            assert_eq!(bimodule_of_biset(&a.biset()).unwrap(), m);
        }
        assert_eq!(bimodule_of_hom(&QuantaleHom::identity(q.clone())).unwrap(), bimodule_of_biset(&Biset::unit(&z2())).unwrap());
        // 2-chain into P(Z2)
        let chain = Arc::new(
            InvolutiveQuantale::of_frame(Arc::new(crate::lattice::FiniteSupLattice::chain(names(["0", "1"])).unwrap()))
                .unwrap(),
        );
        let hs = enumerate_unital_homs(&chain, &q, 1 << 20).unwrap();
        assert_eq!(hs.len(), 1);
        assert!(bimodule_of_hom(&hs[0]).unwrap().validate().is_valid());
    }

    #[test]
    fn identity_algmorphs() {
        for g in [z2(), p2()] {
            let r = validate_algmorph(&identity_algmorph(&g));
            assert!(r.is_valid(), "{r}");
        }
        let p = p2();
        let n = p.arrow_count();
        let bad = AlgebraicMorphism::new(
            p.clone(),
            p.clone(),
            (0..n).map(|k| p.cod(k)).collect(),
            (0..n * n).map(|i| p.comp(i / n, i % n)).collect(),
        )
        .unwrap();
        let r = validate_algmorph(&bad);
        assert!(!r.is_valid());
        assert!(r.first_failure().unwrap().law.contains("defined iff"));
    }

    #[test]
    fn z2_algmorphs() {
        let z = z2();
        let all = enumerate_algmorphs(&z, &z, 1 << 20).unwrap();
        assert_eq!(all.len(), 2);
        let id = identity_algmorph(&z);
        let triv = all.iter().find(|a| **a != id).unwrap().clone();
        assert!(all.contains(&id));
        assert_eq!(triv.act(1, 0), Some(0));
        assert_eq!(compose_algmorphs(&id, &triv).unwrap(), triv);
        assert_eq!(compose_algmorphs(&triv, &id).unwrap(), triv);
        assert_eq!(compose_algmorphs(&triv, &triv).unwrap(), triv);
        assert_eq!(compose_algmorphs(&id, &id).unwrap(), id);
        let h = algmorph_to_hom(&triv).unwrap();
        assert_eq!(h.ji_images(), vec![0b01, 0b01]);
        assert_eq!(algmorph_to_hom(&id).unwrap(), QuantaleHom::identity(oq(&z)));
        assert_eq!(hom_to_algmorph_on(&QuantaleHom::identity(oq(&z)), &z, &z).unwrap(), id);
        assert!(validate_algmorph(&hom_to_algmorph(&QuantaleHom::identity(oq(&z))).unwrap()).is_valid());
    }

    #[test]
    fn correspondence_small() {
        let gs = [z2(), p2(), FiniteGroupoid::trivial(), FiniteGroupoid::discrete(names(["a", "b"])).unwrap()];
        for g in &gs {
            for h in &gs {
                let (og, oh) = (oq(g), oq(h));
                let (ams, _, r) = check_algmorph_correspondence(g, h, &og, &oh, 1 << 22).unwrap();
                assert!(r.is_valid(), "{r}");
                for a in &ams {
                    assert_eq!(compose_algmorphs(&identity_algmorph(g), a).unwrap(), *a);
                    assert_eq!(compose_algmorphs(a, &identity_algmorph(h)).unwrap(), *a);
                }
            }
        }
    }

    #[test]
    fn associativity_over_z2_p2_z2() {
        let (z, p) = (z2(), p2());
        let a1 = enumerate_algmorphs(&z, &p, 1 << 20).unwrap();
        let a2 = enumerate_algmorphs(&p, &z, 1 << 20).unwrap();
        let a3 = enumerate_algmorphs(&z, &z, 1 << 20).unwrap();
        for x in &a1 {
            for y in &a2 {
                for w in &a3 {
                    let l = compose_algmorphs(&compose_algmorphs(x, y).unwrap(), w).unwrap();
                    let r = compose_algmorphs(x, &compose_algmorphs(y, w).unwrap()).unwrap();
                    assert_eq!(l, r);
                    assert!(validate_algmorph(&l).is_valid());
                }
            }
        }
    }

    #[test]
    fn hom_composition_matches_tensor() {
        let (z, p) = (z2(), p2());
        let (oz, op) = (oq(&z), oq(&p));
        for h in enumerate_unital_homs(&oz, &op, 1 << 20).unwrap() {
            for k in enumerate_unital_homs(&op, &oz, 1 << 20).unwrap() {
                let (ah, ak) = (hom_to_algmorph(&h).unwrap(), hom_to_algmorph(&k).unwrap());
                let r = check_composite_bimodule(&ah, &ak).unwrap();
                assert!(r.is_valid(), "{r}");
                assert_eq!(compose_algmorphs(&ah, &ak).unwrap(), hom_to_algmorph(&h.then(&k)).unwrap());
                let c = compose_bimodules(&ah.biset(), &ak.biset()).unwrap();
                let direct = hom_to_algmorph(&h.then(&k)).unwrap().biset();
                assert!(find_biset_isomorphism(&c.biset, &direct).is_some());
            }
        }
    }
}
