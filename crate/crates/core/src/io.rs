//! JSON forms of every value kind, loading with JSON-pointer error locations,
//! and deterministic emission.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;
use std::sync::Arc;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::actions::{GSet, Side};
use crate::bimodules::AlgebraicMorphism;
use crate::groupoid::{FiniteGroupoid, StandardSpec};
use crate::invsemi::FiniteInverseSemigroup;
use crate::lattice::{Elem, FiniteSupLattice, DEFAULT_MAX_CARRIER, DEFAULT_MAX_ELEMENTS};
use crate::quantale::{InvolutiveQuantale, QuantaleHom};
use crate::report::ValidationReport;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IoError {
    #[error("cannot read {path}: {message}")]
    Read { path: String, message: String },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("schema error at {pointer:?}: {message}")]
    Schema { pointer: String, message: String },
    #[error("validation error at {pointer:?}: {law}{}", witness.as_ref().map(|w| format!(" (witness: {w})")).unwrap_or_default())]
    Validation {
        pointer: String,
        law: String,
        witness: Option<String>,
    },
    #[error("cannot tell which kind of instance this is")]
    UnknownKind,
}

impl IoError {
    fn invalid(pointer: impl Into<String>, law: impl Into<String>, witness: impl Into<String>) -> Self {
        IoError::Validation {
            pointer: pointer.into(),
            law: law.into(),
            witness: Some(witness.into()),
        }
    }

    fn from_report(pointer: &str, r: &ValidationReport) -> Option<Self> {
        r.first_failure().map(|f| IoError::Validation {
            pointer: pointer.to_string(),
            law: f.law.clone(),
            witness: f.witness.clone(),
        })
    }
}

/// The value kinds understood by the loader.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Lattice,
    InverseSemigroup,
    Groupoid,
    Standard,
    Quantale,
    Hom,
    Gset,
    Algmorph,
}

#[derive(Clone, Debug)]
pub enum Value {
    Lattice(FiniteSupLattice),
    InverseSemigroup(FiniteInverseSemigroup),
    Groupoid(FiniteGroupoid),
    Quantale(InvolutiveQuantale),
    Hom(QuantaleHom),
    Gset(GSet),
    Algmorph(AlgebraicMorphism),
}

// ---- parsing helpers -------------------------------------------------------------

pub fn parse<T: DeserializeOwned>(text: &str) -> Result<T, IoError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let pointer = pointer_of(e.path());
        let inner = e.into_inner();
        if inner.is_syntax() || inner.is_eof() {
            IoError::Parse {
                line: inner.line(),
                column: inner.column(),
                message: inner.to_string(),
            }
        } else {
            IoError::Schema {
                pointer,
                message: inner.to_string(),
            }
        }
    })
}

fn pointer_of(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        match seg {
            Segment::Seq { index } => out.push_str(&format!("/{index}")),
            Segment::Map { key } | Segment::Enum { variant: key } => {
                out.push('/');
                out.push_str(&key.replace('~', "~0").replace('/', "~1"));
            }
            Segment::Unknown => out.push_str("/?"),
        }
    }
    out
}

/// Pretty JSON with sorted object keys and a trailing newline.
pub fn emit_json<T: Serialize>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("serializable value");
    let mut s = serde_json::to_string_pretty(&v).expect("serializable value");
    s.push('\n');
    s
}

fn index_of(names: &[String]) -> HashMap<&str, usize> {
    names.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect()
}

fn lookup(map: &HashMap<&str, usize>, name: &str, pointer: String, what: &str) -> Result<usize, IoError> {
    map.get(name)
        .copied()
        .ok_or_else(|| IoError::invalid(pointer, format!("{what} exists"), name))
}

// ---- lattices ------------------------------------------------------------------

/// An element reference: an index, an element name (for powersets the name
/// of a single point), or a list of points of a powerset.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ElemRef {
    Index(usize),
    Name(String),
    Set(Vec<String>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LatticeJson {
    Powerset {
        carrier: Vec<String>,
    },
    Explicit {
        elements: Vec<String>,
        leq: Vec<(ElemRef, ElemRef)>,
    },
}

fn resolve(l: &FiniteSupLattice, r: &ElemRef, pointer: String) -> Result<Elem, IoError> {
    let found = match r {
        ElemRef::Index(i) => l.contains(*i).then_some(*i),
        ElemRef::Name(n) => l.element_by_name(n),
        ElemRef::Set(pts) => {
            let refs: Vec<&str> = pts.iter().map(String::as_str).collect();
            l.subset_of(&refs)
        }
    };
    found.ok_or_else(|| IoError::invalid(pointer, "element exists", format!("{r:?}")))
}

fn resolve_ji(l: &FiniteSupLattice, r: &ElemRef, pointer: String) -> Result<usize, IoError> {
    if let ElemRef::Index(i) = r {
        return (*i < l.ji_count())
            .then_some(*i)
            .ok_or_else(|| IoError::invalid(pointer, "join-irreducible position exists", i.to_string()));
    }
    let e = resolve(l, r, pointer.clone())?;
    l.ji_position(e)
        .ok_or_else(|| IoError::invalid(pointer, "element is join-irreducible", l.element_name(e)))
}

pub fn elem_ref(l: &FiniteSupLattice, x: Elem) -> ElemRef {
    match l.carrier() {
        Some(c) => ElemRef::Set((0..c.len()).filter(|&i| x >> i & 1 == 1).map(|i| c[i].clone()).collect()),
        None => ElemRef::Name(l.element_name(x)),
    }
}

fn ji_ref(l: &FiniteSupLattice, pos: usize) -> ElemRef {
    match l.carrier() {
        Some(c) => ElemRef::Name(c[pos].clone()),
        None => ElemRef::Name(l.element_name(l.ji(pos))),
    }
}

pub fn lattice_from_json(j: &LatticeJson, pointer: &str) -> Result<FiniteSupLattice, IoError> {
    let err = |e: crate::lattice::LatticeError| IoError::invalid(pointer, "lattice", e.to_string());
    match j {
        LatticeJson::Powerset { carrier } => {
            FiniteSupLattice::powerset_bounded(carrier.clone(), DEFAULT_MAX_CARRIER).map_err(err)
        }
        LatticeJson::Explicit { elements, leq } => {
            let idx = index_of(elements);
            let at = |r: &ElemRef, i: usize, side: usize| -> Result<usize, IoError> {
                let p = format!("{pointer}/leq/{i}/{side}");
                match r {
                    ElemRef::Index(x) if *x < elements.len() => Ok(*x),
                    ElemRef::Name(n) => lookup(&idx, n, p, "element"),
                    _ => Err(IoError::invalid(p, "element exists", format!("{r:?}"))),
                }
            };
            let pairs = leq
                .iter()
                .enumerate()
                .map(|(i, (a, b))| Ok((at(a, i, 0)?, at(b, i, 1)?)))
                .collect::<Result<Vec<_>, IoError>>()?;
            FiniteSupLattice::explicit_bounded(elements.clone(), &pairs, DEFAULT_MAX_ELEMENTS).map_err(err)
        }
    }
}

pub fn lattice_to_json(l: &FiniteSupLattice) -> LatticeJson {
    match l.carrier() {
        Some(c) => LatticeJson::Powerset { carrier: c.to_vec() },
        None => LatticeJson::Explicit {
            elements: l.elements().map(|x| l.element_name(x)).collect(),
            leq: l
                .order_pairs()
                .into_iter()
                .map(|(a, b)| (ElemRef::Index(a), ElemRef::Index(b)))
                .collect(),
        },
    }
}

// ---- inverse semigroups -----------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InverseSemigroupJson {
    pub elements: Vec<String>,
    pub mult: Vec<(String, String, String)>,
    pub inv: Vec<(String, String)>,
}

pub fn inverse_semigroup_from_json(j: &InverseSemigroupJson) -> Result<FiniteInverseSemigroup, IoError> {
    let idx = index_of(&j.elements);
    let n = j.elements.len();
    let mut mult = vec![None; n * n];
    for (i, (a, b, c)) in j.mult.iter().enumerate() {
        let p = |k: usize| format!("/mult/{i}/{k}");
        let (a, b, c) = (lookup(&idx, a, p(0), "element")?, lookup(&idx, b, p(1), "element")?, lookup(&idx, c, p(2), "element")?);
        if mult[a * n + b].is_some_and(|x| x != c) {
            return Err(IoError::invalid(format!("/mult/{i}"), "multiplication is a function", format!("({}, {})", j.elements[a], j.elements[b])));
        }
        mult[a * n + b] = Some(c);
    }
    let mult = mult
        .iter()
        .enumerate()
        .map(|(k, m)| m.ok_or_else(|| IoError::invalid("/mult", "multiplication is total", format!("({}, {})", j.elements[k / n], j.elements[k % n]))))
        .collect::<Result<Vec<_>, _>>()?;
    let mut inv = vec![None; n];
    for (i, (a, b)) in j.inv.iter().enumerate() {
        let (a, b) = (lookup(&idx, a, format!("/inv/{i}/0"), "element")?, lookup(&idx, b, format!("/inv/{i}/1"), "element")?);
        inv[a] = Some(b);
    }
    let inv = inv
        .iter()
        .enumerate()
        .map(|(k, v)| v.ok_or_else(|| IoError::invalid("/inv", "inverse is total", j.elements[k].clone())))
        .collect::<Result<Vec<_>, _>>()?;
    FiniteInverseSemigroup::new(j.elements.clone(), mult, inv).map_err(|e| IoError::invalid("", "inverse semigroup", e.to_string()))
}

pub fn inverse_semigroup_to_json(s: &FiniteInverseSemigroup) -> InverseSemigroupJson {
    let names = s.names();
    let n = names.len();
    InverseSemigroupJson {
        elements: names.to_vec(),
        mult: (0..n * n)
            .map(|k| (names[k / n].clone(), names[k % n].clone(), names[s.mul(k / n, k % n)].clone()))
            .collect(),
        inv: (0..n).map(|a| (names[a].clone(), names[s.inv(a)].clone())).collect(),
    }
}

// ---- groupoids -----------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArrowJson {
    pub id: String,
    pub dom: String,
    pub cod: String,
    pub inv: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupoidJson {
    pub objects: Vec<String>,
    pub arrows: Vec<ArrowJson>,
    pub comp: Vec<(String, String, String)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unit: Option<BTreeMap<String, String>>,
}

pub fn groupoid_from_json(j: &GroupoidJson, pointer: &str) -> Result<FiniteGroupoid, IoError> {
    let objs = index_of(&j.objects);
    let ids: Vec<String> = j.arrows.iter().map(|a| a.id.clone()).collect();
    let arrows = index_of(&ids);
    if objs.len() != j.objects.len() || arrows.len() != ids.len() {
        return Err(IoError::invalid(pointer, "identifiers are unique", "duplicate"));
    }
    let na = ids.len();
    let mut dom = Vec::with_capacity(na);
    let mut cod = Vec::with_capacity(na);
    let mut inv = Vec::with_capacity(na);
    for (i, a) in j.arrows.iter().enumerate() {
        let p = |f: &str| format!("{pointer}/arrows/{i}/{f}");
        dom.push(lookup(&objs, &a.dom, p("dom"), "object")?);
        cod.push(lookup(&objs, &a.cod, p("cod"), "object")?);
        inv.push(lookup(&arrows, &a.inv, p("inv"), "arrow")?);
    }
    let mut comp = vec![None; na * na];
    for (i, (g, h, gh)) in j.comp.iter().enumerate() {
        let p = |k: usize| format!("{pointer}/comp/{i}/{k}");
        let (g, h, gh) = (
            lookup(&arrows, g, p(0), "arrow")?,
            lookup(&arrows, h, p(1), "arrow")?,
            lookup(&arrows, gh, p(2), "arrow")?,
        );
        if cod[g] != dom[h] {
            return Err(IoError::invalid(
                format!("{pointer}/comp/{i}"),
                "comp(g,h) defined iff cod(g) = dom(h)",
                format!("({}, {})", ids[g], ids[h]),
            ));
        }
        if comp[g * na + h].is_some_and(|x| x != gh) {
            return Err(IoError::invalid(format!("{pointer}/comp/{i}"), "composition is a function", format!("({}, {})", ids[g], ids[h])));
        }
        comp[g * na + h] = Some(gh);
    }
    for g in 0..na {
        for h in 0..na {
            if cod[g] == dom[h] && comp[g * na + h].is_none() {
                return Err(IoError::invalid(
                    format!("{pointer}/comp"),
                    "comp(g,h) defined iff cod(g) = dom(h)",
                    format!("({}, {})", ids[g], ids[h]),
                ));
            }
        }
    }
    let unit = match &j.unit {
        Some(map) => {
            let mut unit = vec![None; j.objects.len()];
            for (o, a) in map {
                let p = format!("{pointer}/unit/{}", o.replace('~', "~0").replace('/', "~1"));
                let x = lookup(&objs, o, p.clone(), "object")?;
                unit[x] = Some(lookup(&arrows, a, p, "arrow")?);
            }
            unit.iter()
                .enumerate()
                .map(|(x, u)| u.ok_or_else(|| IoError::invalid(format!("{pointer}/unit"), "every object has a unit", j.objects[x].clone())))
                .collect::<Result<Vec<_>, _>>()?
        }
        None => (0..j.objects.len())
            .map(|x| {
                let found: Vec<usize> = (0..na)
                    .filter(|&a| dom[a] == x && cod[a] == x)
                    .filter(|&a| {
                        (0..na).all(|h| dom[h] != x || comp[a * na + h] == Some(h))
                            && (0..na).all(|k| cod[k] != x || comp[k * na + a] == Some(k))
                    })
                    .collect();
                match found.as_slice() {
                    [a] => Ok(*a),
                    _ => Err(IoError::invalid(format!("{pointer}/unit"), "every object has a unique identity arrow", j.objects[x].clone())),
                }
            })
            .collect::<Result<Vec<_>, _>>()?,
    };
    let g = FiniteGroupoid::from_tables(j.objects.clone(), ids, dom, cod, unit, inv, comp)
        .map_err(|e| IoError::invalid(pointer, "groupoid tables", e.to_string()))?;
    match IoError::from_report(pointer, &g.validate()) {
        Some(e) => Err(e),
        None => Ok(g),
    }
}

pub fn groupoid_to_json(g: &FiniteGroupoid) -> GroupoidJson {
    let (objs, arrs) = (g.objects(), g.arrows());
    let na = g.arrow_count();
    GroupoidJson {
        objects: objs.to_vec(),
        arrows: (0..na)
            .map(|a| ArrowJson {
                id: arrs[a].clone(),
                dom: objs[g.dom(a)].clone(),
                cod: objs[g.cod(a)].clone(),
                inv: arrs[g.inv(a)].clone(),
            })
            .collect(),
        comp: (0..na * na)
            .filter_map(|k| g.comp(k / na, k % na).map(|c| (arrs[k / na].clone(), arrs[k % na].clone(), arrs[c].clone())))
            .collect(),
        unit: Some((0..g.object_count()).map(|x| (objs[x].clone(), arrs[g.unit(x)].clone())).collect()),
    }
}

// ---- quantales and homomorphisms --------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuantaleJson {
    pub lattice: LatticeJson,
    /// `[i, j, ij]` over join-irreducibles; missing products are ⊥.
    pub mult_atoms: Vec<(ElemRef, ElemRef, ElemRef)>,
    /// Involution of each join-irreducible, in join-irreducible order.
    pub invol: Vec<ElemRef>,
    pub unit: ElemRef,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub atom_labels: Option<Vec<String>>,
}

pub fn quantale_from_json(j: &QuantaleJson, pointer: &str) -> Result<InvolutiveQuantale, IoError> {
    let l = Arc::new(lattice_from_json(&j.lattice, &format!("{pointer}/lattice"))?);
    let k = l.ji_count();
    let mut mult: Vec<Option<Elem>> = vec![None; k * k];
    for (n, (a, b, c)) in j.mult_atoms.iter().enumerate() {
        let p = |s: usize| format!("{pointer}/mult_atoms/{n}/{s}");
        let (a, b) = (resolve_ji(&l, a, p(0))?, resolve_ji(&l, b, p(1))?);
        let c = resolve(&l, c, p(2))?;
        if mult[a * k + b].is_some_and(|x| x != c) {
            return Err(IoError::invalid(format!("{pointer}/mult_atoms/{n}"), "multiplication is a function", format!("({a}, {b})")));
        }
        mult[a * k + b] = Some(c);
    }
    let mult = mult.into_iter().map(|m| m.unwrap_or(l.bottom())).collect();
    if j.invol.len() != k {
        return Err(IoError::invalid(format!("{pointer}/invol"), "involution lists every join-irreducible", format!("{} of {k}", j.invol.len())));
    }
    let invol = j
        .invol
        .iter()
        .enumerate()
        .map(|(n, r)| resolve(&l, r, format!("{pointer}/invol/{n}")))
        .collect::<Result<Vec<_>, _>>()?;
    let unit = resolve(&l, &j.unit, format!("{pointer}/unit"))?;
    let q = InvolutiveQuantale::new(l, mult, invol, unit).map_err(|e| IoError::invalid(pointer, "quantale tables", e.to_string()))?;
    Ok(match &j.atom_labels {
        Some(labels) if labels.len() == k => q.with_atom_labels(labels.clone()),
        Some(_) => return Err(IoError::invalid(format!("{pointer}/atom_labels"), "one label per join-irreducible", "")),
        None => q,
    })
}

pub fn quantale_to_json(q: &InvolutiveQuantale) -> QuantaleJson {
    let l = q.lattice();
    let k = l.ji_count();
    let table = q.mult_ji_table();
    QuantaleJson {
        lattice: lattice_to_json(l),
        mult_atoms: (0..k * k)
            .filter(|&n| table[n] != l.bottom())
            .map(|n| (ji_ref(l, n / k), ji_ref(l, n % k), elem_ref(l, table[n])))
            .collect(),
        invol: q.invol_ji_table().iter().map(|&x| elem_ref(l, x)).collect(),
        unit: elem_ref(l, q.unit()),
        atom_labels: q.atom_labels().map(|a| a.to_vec()),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HomJson {
    pub source: QuantaleJson,
    pub target: QuantaleJson,
    /// Image of each join-irreducible of the source, in order.
    pub images: Vec<ElemRef>,
}

pub fn hom_from_json(j: &HomJson) -> Result<QuantaleHom, IoError> {
    let s = Arc::new(quantale_from_json(&j.source, "/source")?);
    let t = Arc::new(quantale_from_json(&j.target, "/target")?);
    if j.images.len() != s.lattice().ji_count() {
        return Err(IoError::invalid("/images", "one image per join-irreducible", format!("{}", j.images.len())));
    }
    let images = j
        .images
        .iter()
        .enumerate()
        .map(|(n, r)| resolve(t.lattice(), r, format!("/images/{n}")))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(QuantaleHom::from_ji_images(s, t, &images))
}

pub fn hom_to_json(h: &QuantaleHom) -> HomJson {
    HomJson {
        source: quantale_to_json(&h.source),
        target: quantale_to_json(&h.target),
        images: h.ji_images().iter().map(|&x| elem_ref(h.target.lattice(), x)).collect(),
    }
}

// ---- groupoid sets and algebraic morphisms -----------------------------------------

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GSetJson {
    pub groupoid: GroupoidJson,
    pub points: Vec<String>,
    pub anchor: BTreeMap<String, String>,
    pub side: Side,
    /// `[g, x, y]` meaning `g·x = y` (left) or `x·g = y` (right).
    pub act: Vec<(String, String, String)>,
}

pub fn gset_from_json(j: &GSetJson, pointer: &str) -> Result<GSet, IoError> {
    let g = groupoid_from_json(&j.groupoid, &format!("{pointer}/groupoid"))?;
    let pts = index_of(&j.points);
    let objs = index_of(g.objects());
    let arrows = index_of(g.arrows());
    let np = j.points.len();
    let mut anchor = vec![None; np];
    for (x, o) in &j.anchor {
        let p = format!("{pointer}/anchor/{x}");
        let i = lookup(&pts, x, p.clone(), "point")?;
        anchor[i] = Some(lookup(&objs, o, p, "object")?);
    }
    let anchor = anchor
        .iter()
        .enumerate()
        .map(|(x, a)| a.ok_or_else(|| IoError::invalid(format!("{pointer}/anchor"), "every point is anchored", j.points[x].clone())))
        .collect::<Result<Vec<_>, _>>()?;
    let mut act = vec![None; g.arrow_count() * np];
    for (n, (a, x, y)) in j.act.iter().enumerate() {
        let p = |k: usize| format!("{pointer}/act/{n}/{k}");
        let (a, x, y) = (lookup(&arrows, a, p(0), "arrow")?, lookup(&pts, x, p(1), "point")?, lookup(&pts, y, p(2), "point")?);
        act[a * np + x] = Some(y);
    }
    let s = GSet::new(g, j.points.clone(), anchor, j.side, act).map_err(|e| IoError::invalid(pointer, "action tables", e.to_string()))?;
    match IoError::from_report(&format!("{pointer}/act"), &s.validate()) {
        Some(e) => Err(e),
        None => Ok(s),
    }
}

pub fn gset_to_json(s: &GSet) -> GSetJson {
    let g = s.groupoid();
    let (pts, objs) = (s.points(), g.objects());
    GSetJson {
        groupoid: groupoid_to_json(g),
        points: pts.to_vec(),
        anchor: (0..pts.len()).map(|x| (pts[x].clone(), objs[s.anchor(x)].clone())).collect(),
        side: s.side(),
        act: (0..g.arrow_count())
            .flat_map(|a| (0..pts.len()).map(move |x| (a, x)))
            .filter_map(|(a, x)| s.act(a, x).map(|y| (g.arrows()[a].clone(), pts[x].clone(), pts[y].clone())))
            .collect(),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgMorphJson {
    pub source: GroupoidJson,
    pub target: GroupoidJson,
    pub anchor: BTreeMap<String, String>,
    /// `[g, k, g·k]`
    pub act: Vec<(String, String, String)>,
}

pub fn algmorph_from_json(j: &AlgMorphJson) -> Result<AlgebraicMorphism, IoError> {
    let g = groupoid_from_json(&j.source, "/source")?;
    let h = groupoid_from_json(&j.target, "/target")?;
    let (garr, harr, gobj) = (index_of(g.arrows()), index_of(h.arrows()), index_of(g.objects()));
    let nh = h.arrow_count();
    let mut anchor = vec![None; nh];
    for (k, o) in &j.anchor {
        let p = format!("/anchor/{k}");
        let i = lookup(&harr, k, p.clone(), "arrow")?;
        anchor[i] = Some(lookup(&gobj, o, p, "object")?);
    }
    let anchor = anchor
        .iter()
        .enumerate()
        .map(|(k, a)| a.ok_or_else(|| IoError::invalid("/anchor", "every target arrow is anchored", h.arrows()[k].clone())))
        .collect::<Result<Vec<_>, _>>()?;
    let mut act = vec![None; g.arrow_count() * nh];
    for (n, (a, k, l)) in j.act.iter().enumerate() {
        let p = |s: usize| format!("/act/{n}/{s}");
        let (a, k, l) = (lookup(&garr, a, p(0), "arrow")?, lookup(&harr, k, p(1), "arrow")?, lookup(&harr, l, p(2), "arrow")?);
        act[a * nh + k] = Some(l);
    }
    AlgebraicMorphism::new(g, h, anchor, act).map_err(|e| IoError::invalid("", "algebraic morphism tables", e.to_string()))
}

pub fn algmorph_to_json(a: &AlgebraicMorphism) -> AlgMorphJson {
    let (g, h) = (a.source(), a.target());
    let nh = h.arrow_count();
    AlgMorphJson {
        source: groupoid_to_json(g),
        target: groupoid_to_json(h),
        anchor: (0..nh).map(|k| (h.arrows()[k].clone(), g.objects()[a.anchor(k)].clone())).collect(),
        act: (0..g.arrow_count())
            .flat_map(|x| (0..nh).map(move |k| (x, k)))
            .filter_map(|(x, k)| a.act(x, k).map(|l| (g.arrows()[x].clone(), h.arrows()[k].clone(), h.arrows()[l].clone())))
            .collect(),
    }
}

// ---- loading -------------------------------------------------------------------

/// Guesses the kind of a document from its top-level keys.
pub fn detect_kind(text: &str) -> Result<Kind, IoError> {
    let v: serde_json::Value = parse(text)?;
    let obj = v.as_object().ok_or(IoError::UnknownKind)?;
    let has = |k: &str| obj.contains_key(k);
    Ok(if has("mult_atoms") {
        Kind::Quantale
    } else if has("images") {
        Kind::Hom
    } else if has("groupoid") && has("points") {
        Kind::Gset
    } else if has("source") && has("anchor") {
        Kind::Algmorph
    } else if has("objects") && has("arrows") {
        Kind::Groupoid
    } else if has("mult") && has("inv") {
        Kind::InverseSemigroup
    } else if has("carrier") || has("leq") {
        Kind::Lattice
    } else if has("kind") {
        Kind::Standard
    } else {
        return Err(IoError::UnknownKind);
    })
}

/// Parses a document of the given kind without checking axioms beyond what
/// construction needs.
pub fn parse_value(text: &str, kind: Kind) -> Result<Value, IoError> {
    Ok(match kind {
        Kind::Lattice => Value::Lattice(lattice_from_json(&parse(text)?, "")?),
        Kind::InverseSemigroup => Value::InverseSemigroup(inverse_semigroup_from_json(&parse(text)?)?),
        Kind::Groupoid => Value::Groupoid(groupoid_from_json(&parse(text)?, "")?),
        Kind::Standard => {
            let spec: StandardSpec = parse(text)?;
            Value::Groupoid(FiniteGroupoid::build_standard(&spec).map_err(|e| IoError::invalid("", "standard groupoid", e.to_string()))?)
        }
        Kind::Quantale => Value::Quantale(quantale_from_json(&parse(text)?, "")?),
        Kind::Hom => Value::Hom(hom_from_json(&parse(text)?)?),
        Kind::Gset => Value::Gset(gset_from_json(&parse(text)?, "")?),
        Kind::Algmorph => Value::Algmorph(algmorph_from_json(&parse(text)?)?),
    })
}

/// Parses and validates: lattices must be lattices, semigroups inverse,
/// groupoids and groupoid sets valid, quantales inverse quantal frames,
/// algebraic morphisms valid.
pub fn load_str(text: &str, kind: Kind) -> Result<Value, IoError> {
    let v = parse_value(text, kind)?;
    let report = match &v {
        Value::InverseSemigroup(s) => Some(s.validate()),
        Value::Quantale(q) => Some(q.validate_iqf()),
        Value::Hom(h) => {
            let mut r = h.source.validate_quantale();
            r.merge(h.target.validate_quantale());
            Some(r)
        }
        Value::Algmorph(a) => Some(crate::bimodules::validate_algmorph(a)),
        _ => None,
    };
    match report.and_then(|r| IoError::from_report("", &r)) {
        Some(e) => Err(e),
        None => Ok(v),
    }
}

pub fn load_instance(path: &Path, kind: Option<Kind>) -> Result<Value, IoError> {
    let text = std::fs::read_to_string(path).map_err(|e| IoError::Read {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let kind = match kind {
        Some(k) => k,
        None => detect_kind(&text)?,
    };
    load_str(&text, kind)
}

/// The JSON form of any value.
pub fn emit_value(v: &Value) -> String {
    match v {
        Value::Lattice(l) => emit_json(&lattice_to_json(l)),
        Value::InverseSemigroup(s) => emit_json(&inverse_semigroup_to_json(s)),
        Value::Groupoid(g) => emit_json(&groupoid_to_json(g)),
        Value::Quantale(q) => emit_json(&quantale_to_json(q)),
        Value::Hom(h) => emit_json(&hom_to_json(h)),
        Value::Gset(s) => emit_json(&gset_to_json(s)),
        Value::Algmorph(a) => emit_json(&algmorph_to_json(a)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::names;
    use crate::quantale::quantale_of_groupoid;

    fn p2() -> FiniteGroupoid {
        FiniteGroupoid::pair(names(["0", "1"])).unwrap()
    }

    #[test]
    fn groupoid_round_trip() {
        let g = p2();
        let text = emit_json(&groupoid_to_json(&g));
        let Value::Groupoid(back) = load_str(&text, Kind::Groupoid).unwrap() else { panic!() };
        assert_eq!(back, g);
        assert_eq!(detect_kind(&text).unwrap(), Kind::Groupoid);
    }

    #[test]
    fn units_are_inferred() {
        let mut j = groupoid_to_json(&p2());
        j.unit = None;
        assert_eq!(groupoid_from_json(&j, "").unwrap(), p2());
    }

    #[test]
    fn missing_comp_triple() {
        let mut j = groupoid_to_json(&p2());
        j.comp.remove(3);
        let err = groupoid_from_json(&j, "").unwrap_err();
        let IoError::Validation { pointer, .. } = err else { panic!("{err:?}") };
        assert_eq!(pointer, "/comp");
    }

    #[test]
    fn schema_errors_carry_pointers() {
        let text = r#"{"objects": ["x"], "arrows": [{"id": "1", "dom": "x", "cod": 3, "inv": "1"}], "comp": []}"#;
        let err = parse::<GroupoidJson>(text).unwrap_err();
        let IoError::Schema { pointer, .. } = err else { panic!("{err:?}") };
        assert_eq!(pointer, "/arrows/0/cod");
        assert!(matches!(parse::<GroupoidJson>("{"), Err(IoError::Parse { .. })));
    }

    #[test]
    fn quantale_round_trip_is_byte_identical() {
        for g in [FiniteGroupoid::cyclic(2), p2()] {
            let q = quantale_of_groupoid(&g).unwrap();
            let a = emit_json(&quantale_to_json(&q));
            let Value::Quantale(back) = load_str(&a, Kind::Quantale).unwrap() else { panic!() };
            assert_eq!(back, q);
            assert_eq!(emit_json(&quantale_to_json(&back)), a);
        }
    }

    #[test]
    fn failing_iqf_axiom_is_named() {
        let text = r#"{
            "lattice": {"kind": "powerset", "carrier": ["u", "a"]},
            "mult_atoms": [["u", "u", ["u"]], ["u", "a", ["a"]], ["a", "u", ["a"]]],
            "invol": [["u"], ["a"]],
            "unit": ["u"]
        }"#;
        let err = load_str(text, Kind::Quantale).unwrap_err();
        let IoError::Validation { law, witness, .. } = err else { panic!("{err:?}") };
        assert_eq!(law, "(a1∧e)a = a");
        assert_eq!(witness.as_deref(), Some("{a}"));
    }

    #[test]
    fn explicit_lattice_round_trip() {
        let l = FiniteSupLattice::chain(names(["0", "m", "1"])).unwrap();
        let text = emit_json(&lattice_to_json(&l));
        let Value::Lattice(back) = load_str(&text, Kind::Lattice).unwrap() else { panic!() };
        assert_eq!(back, l);
    }

    #[test]
    fn other_kinds_round_trip() {
        let g = FiniteGroupoid::cyclic(2);
        let s = GSet::left_translation(&g);
        let text = emit_json(&gset_to_json(&s));
        let Value::Gset(back) = load_str(&text, Kind::Gset).unwrap() else { panic!() };
        assert_eq!(back, s);
        let a = crate::bimodules::identity_algmorph(&p2());
        let text = emit_json(&algmorph_to_json(&a));
        assert_eq!(detect_kind(&text).unwrap(), Kind::Algmorph);
        let Value::Algmorph(back) = load_str(&text, Kind::Algmorph).unwrap() else { panic!() };
        assert_eq!(back, a);
        let q = Arc::new(quantale_of_groupoid(&g).unwrap());
        let h = QuantaleHom::identity(q);
        let text = emit_json(&hom_to_json(&h));
        let Value::Hom(back) = load_str(&text, Kind::Hom).unwrap() else { panic!() };
        assert_eq!(back, h);
        let spec = r#"{"kind": "cyclic", "order": 3}"#;
        assert_eq!(detect_kind(spec).unwrap(), Kind::Standard);
        let Value::Groupoid(c3) = load_str(spec, Kind::Standard).unwrap() else { panic!() };
        assert_eq!(c3, FiniteGroupoid::cyclic(3));
    }
}
