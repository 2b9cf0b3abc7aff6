//! The verification harness: property suites over the generator grid with
//! machine-readable reports.

use std::fmt;
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::actions::{
    action_inverse_image, check_partial_unit_laws, check_unit_tensor, invariant_elements, module_of_gset_over,
    tensor_over_q, unions_of_classes, GSet, Side,
};
use crate::bimodules::{
    algmorph_to_hom_over, biset_diagrams, bimodule_of_biset, bimodule_of_hom, check_algmorph_correspondence,
    check_associator, check_composite_bimodule, check_left_unitor, check_right_unitor, compose_algmorphs,
    enumerate_algmorphs, hom_to_algmorph_on, identity_algmorph, AlgebraicMorphism, Biset,
};
use crate::generators::{self, Named};
use crate::groupoid::{enumerate_functors, find_isomorphism, is_covering_functor, FiniteGroupoid, GroupoidFunctor};
use crate::invsemi::{check_compatible_joins, check_completion_iso, compatible_ideal_completion, partial_units};
use crate::io::{groupoid_to_json, gset_to_json, quantale_to_json};
use crate::lattice::HARD_MAX_CARRIER;
use crate::quantale::{
    check_group_lemma, check_lax_image, check_roundtrip_quantale, check_roundtrip_with, enumerate_unital_homs,
    functor_of_iqloc_morphism, group_units, preimage_hom, quantale_of_groupoid, validate_hom, InvolutiveQuantale,
    QuantaleError, QuantaleHom,
};
use crate::report::ValidationReport;

pub const DEFAULT_BUDGET: u64 = 1 << 24;
/// Partial-unit semigroups up to this size are completed.
pub const COMPLETION_MAX_SEMIGROUP: usize = 40;
pub const COMPLETION_MAX_IDEALS: usize = 1 << 14;
/// Quantales with at most this many atoms enter the involution suite.
pub const INVOLUTION_MAX_ATOMS: usize = 4;
/// Groupoids with at most this many arrows enter the functor, equivalence
/// and composition suites.
pub const PAIR_MAX_ARROWS: usize = 6;
/// Triples for composition and bimodule coherence use at most this many
/// arrows per groupoid.
pub const TRIPLE_MAX_ARROWS: usize = 4;
/// Modules with at most this many points are checked exhaustively.
pub const MODULE_MAX_POINTS: usize = 8;

pub const SUITES: &[&str] = &[
    "roundtrip",
    "iqf_axioms",
    "completion",
    "involution",
    "group_case",
    "covering",
    "lax",
    "orbits",
    "inverse_image",
    "tensor",
    "partial_unit_laws",
    "equivalence",
    "bimodules",
    "biset_perturbation",
];

#[derive(Clone, Debug)]
pub struct VerifyConfig {
    /// Node budget for every exhaustive enumeration.
    pub budget: u64,
    /// Run only the group-case suite.
    pub groups_only: bool,
    /// Adds seeded random disjoint unions to the grid.
    pub seed: Option<u64>,
    pub random_count: usize,
    /// Replaces `𝒪` by a faulty construction (test fixture).
    pub mutate_o: bool,
    /// Restricts to the named suites.
    pub suites: Option<Vec<String>>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            budget: DEFAULT_BUDGET,
            groups_only: false,
            seed: None,
            random_count: 8,
            mutate_o: false,
            suites: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub theorem: String,
    pub instance: serde_json::Value,
    pub witness: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub suite: String,
    pub instances: usize,
    pub passes: usize,
    pub failures: Vec<Failure>,
    pub wall_time: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub skipped: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    #[serde(default)]
    pub budget_exceeded: bool,
}

impl Report {
    fn new(suite: &str) -> Self {
        Self {
            suite: suite.to_string(),
            instances: 0,
            passes: 0,
            failures: Vec::new(),
            wall_time: 0.0,
            skipped: None,
            notes: Vec::new(),
            budget_exceeded: false,
        }
    }

    pub fn is_success(&self) -> bool {
        self.failures.is_empty() && !self.budget_exceeded
    }

    pub fn failed_instances(&self) -> usize {
        self.failures.len()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub suites: Vec<Report>,
}

impl VerifyReport {
    pub fn instances(&self) -> usize {
        self.suites.iter().map(|s| s.instances).sum()
    }

    pub fn is_success(&self) -> bool {
        self.suites.iter().all(Report::is_success)
    }

    pub fn budget_exceeded(&self) -> bool {
        self.suites.iter().any(|s| s.budget_exceeded)
    }

    pub fn suite(&self, name: &str) -> Option<&Report> {
        self.suites.iter().find(|s| s.suite == name)
    }

    /// 0 pass, 1 verification failure, 3 budget exceeded.
    pub fn exit_code(&self) -> i32 {
        if self.suites.iter().any(|s| !s.failures.is_empty()) {
            1
        } else if self.budget_exceeded() {
            3
        } else {
            0
        }
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.suites {
            if let Some(why) = &s.skipped {
                writeln!(f, "{:<20} skipped: {why}", s.suite)?;
                continue;
            }
            let status = if s.is_success() {
                "ok"
            } else if s.failures.is_empty() {
                "BUDGET"
            } else {
                "FAIL"
            };
            writeln!(
                f,
                "{:<20} {:<6} {:>5} instances {:>5} passed {:>4} failed  {:.2}s",
                s.suite,
                status,
                s.instances,
                s.passes,
                s.failed_instances(),
                s.wall_time
            )?;
            for fail in s.failures.iter().take(5) {
                writeln!(f, "    {}: {}", fail.theorem, fail.witness)?;
            }
            for n in &s.notes {
                writeln!(f, "    note: {n}")?;
            }
        }
        write!(
            f,
            "total: {} instances, {}",
            self.instances(),
            if self.is_success() { "all passed" } else { "FAILURES" }
        )
    }
}

// ---- harness plumbing ----------------------------------------------------------------

/// The outcome of one instance.
enum Outcome {
    Checked(serde_json::Value, ValidationReport),
    Budget(serde_json::Value, String),
}

/// One failure per failing instance, tagged with the first violated law, so
/// that `passes + |failures| = instances`. Instances that ran out of budget
/// are not counted.
fn tally(report: &mut Report, outcomes: Vec<Outcome>) {
    for o in outcomes {
        match o {
            Outcome::Checked(inst, r) => {
                report.instances += 1;
                let failed: Vec<_> = r.failures().collect();
                let Some(first) = failed.first() else {
                    report.passes += 1;
                    continue;
                };
                let theorem = if r.subject.is_empty() {
                    first.law.clone()
                } else {
                    format!("{}: {}", r.subject, first.law)
                };
                let mut witness = first.witness.clone().unwrap_or_default();
                if failed.len() > 1 {
                    witness.push_str(&format!(" (+{} more violated laws)", failed.len() - 1));
                }
                report.failures.push(Failure {
                    theorem,
                    instance: inst,
                    witness,
                });
            }
            Outcome::Budget(inst, why) => {
                report.budget_exceeded = true;
                report.notes.push(format!("budget exceeded on {}: {why}", short(&inst)));
            }
        }
    }
}

fn short(v: &serde_json::Value) -> String {
    v.get("name")
        .and_then(|n| n.as_str())
        .map(str::to_string)
        .unwrap_or_else(|| v.to_string().chars().take(60).collect())
}

fn instance(name: &str, g: &FiniteGroupoid) -> serde_json::Value {
    let mut v = serde_json::to_value(groupoid_to_json(g)).expect("serializable");
    v["name"] = name.into();
    v
}

fn pair_instance(a: &Named<FiniteGroupoid>, b: &Named<FiniteGroupoid>) -> serde_json::Value {
    serde_json::json!({
        "name": format!("{} → {}", a.name, b.name),
        "source": groupoid_to_json(&a.value),
        "target": groupoid_to_json(&b.value),
    })
}

/// `𝒪(G)` with the product `a·a*` of the last arrow set to ⊥.
pub fn mutated_quantale_of_groupoid(g: &FiniteGroupoid) -> Result<InvolutiveQuantale, QuantaleError> {
    let mut q = quantale_of_groupoid(g)?;
    let a = g.arrow_count() - 1;
    q.set_ji_product(a, g.inv(a), 0);
    Ok(q)
}

struct Ctx {
    cfg: VerifyConfig,
    grid: Vec<Named<FiniteGroupoid>>,
    quantales: Vec<Arc<InvolutiveQuantale>>,
}

impl Ctx {
    fn new(cfg: VerifyConfig) -> Self {
        let mut grid = generators::groupoid_grid();
        if let Some(seed) = cfg.seed {
            grid.extend(generators::random_unions(seed, cfg.random_count));
        }
        let quantales = grid
            .iter()
            .map(|g| Arc::new(quantale_of_groupoid(&g.value).expect("grid fits the powerset bound")))
            .collect();
        Self { cfg, grid, quantales }
    }

    fn o(&self, g: &FiniteGroupoid) -> Result<InvolutiveQuantale, QuantaleError> {
        if self.cfg.mutate_o {
            mutated_quantale_of_groupoid(g)
        } else {
            quantale_of_groupoid(g)
        }
    }

    fn small(&self, max_arrows: usize) -> Vec<usize> {
        (0..self.grid.len())
            .filter(|&i| self.grid[i].value.arrow_count() <= max_arrows)
            .collect()
    }

    fn pairs(&self, max_arrows: usize) -> Vec<(usize, usize)> {
        let s = self.small(max_arrows);
        s.iter().flat_map(|&a| s.iter().map(move |&b| (a, b))).collect()
    }

    fn modules(&self) -> Vec<(usize, Named<GSet>)> {
        (0..self.grid.len())
            .flat_map(|i| {
                let g = &self.grid[i];
                generators::left_gsets(g)
                    .into_iter()
                    .chain(generators::right_gsets(g))
                    .map(move |s| (i, s))
            })
            .filter(|(_, s)| s.value.point_count() <= MODULE_MAX_POINTS)
            .collect()
    }
}

fn gset_instance(s: &Named<GSet>) -> serde_json::Value {
    let mut v = serde_json::to_value(gset_to_json(&s.value)).expect("serializable");
    v["name"] = s.name.clone().into();
    v
}

// ---- suites ------------------------------------------------------------------------

fn suite_roundtrip(ctx: &Ctx) -> Report {
    let mut rep = Report::new("roundtrip");
    let out = ctx
        .grid
        .par_iter()
        .enumerate()
        .map(|(i, g)| {
            let mut r = check_roundtrip_with(&g.value, |x| ctx.o(x));
            if !ctx.cfg.mutate_o {
                r.merge(check_roundtrip_quantale(&ctx.quantales[i]));
            }
            Outcome::Checked(instance(&g.name, &g.value), r)
        })
        .collect();
    tally(&mut rep, out);
    rep
}

fn suite_iqf(ctx: &Ctx) -> Report {
    let mut rep = Report::new("iqf_axioms");
    let mut out: Vec<Outcome> = ctx
        .grid
        .par_iter()
        .map(|g| {
            let r = match ctx.o(&g.value) {
                Ok(q) => q.validate_iqf(),
                Err(e) => {
                    let mut r = ValidationReport::new("inverse quantal frame");
                    r.record("𝒪(G) is defined", Some(e.to_string()));
                    r
                }
            };
            Outcome::Checked(instance(&g.name, &g.value), r)
        })
        .collect();
    for q in generators::frame_iqfs() {
        let mut inst = serde_json::to_value(quantale_to_json(&q.value)).expect("serializable");
        inst["name"] = q.name.clone().into();
        out.push(Outcome::Checked(inst, q.value.validate_iqf()));
    }
    tally(&mut rep, out);
    rep
}

fn completion_candidates(ctx: &Ctx) -> Vec<Named<Arc<InvolutiveQuantale>>> {
    let mut qs: Vec<Named<Arc<InvolutiveQuantale>>> = ctx
        .grid
        .iter()
        .zip(&ctx.quantales)
        .map(|(g, q)| Named {
            name: format!("𝒪({})", g.name),
            value: q.clone(),
        })
        .collect();
    qs.extend(generators::frame_iqfs().into_iter().map(|q| Named {
        name: q.name,
        value: Arc::new(q.value),
    }));
    qs
}

fn quantale_instance(q: &Named<Arc<InvolutiveQuantale>>) -> serde_json::Value {
    let mut v = serde_json::to_value(quantale_to_json(&q.value)).expect("serializable");
    v["name"] = q.name.clone().into();
    v
}

fn suite_completion(ctx: &Ctx) -> Report {
    let mut rep = Report::new("completion");
    let qs: Vec<_> = completion_candidates(ctx)
        .into_iter()
        .filter(|q| q.value.partial_unit_elements().len() <= COMPLETION_MAX_SEMIGROUP)
        .collect();
    let out = qs
        .par_iter()
        .map(|q| {
            let inst = quantale_instance(q);
            let mut r = ValidationReport::new("ℒ(Q_I) ≅ Q");
            match partial_units(&q.value) {
                Ok(pu) => {
                    r.merge(check_compatible_joins(&q.value, &pu));
                    match compatible_ideal_completion(&pu.semigroup, COMPLETION_MAX_SEMIGROUP, COMPLETION_MAX_IDEALS) {
                        Ok(c) => r.merge(check_completion_iso(&q.value, &pu, &c)),
                        Err(e) => return Outcome::Budget(inst, e.to_string()),
                    }
                }
                Err(e) => r.record("Q_I is an inverse semigroup", Some(e.to_string())),
            }
            Outcome::Checked(inst, r)
        })
        .collect();
    tally(&mut rep, out);
    rep
}

fn suite_involution(ctx: &Ctx) -> Report {
    let mut rep = Report::new("involution");
    let qs: Vec<_> = completion_candidates(ctx)
        .into_iter()
        .filter(|q| q.value.lattice().ji_count() <= INVOLUTION_MAX_ATOMS)
        .collect();
    let pairs: Vec<(usize, usize)> = (0..qs.len()).flat_map(|a| (0..qs.len()).map(move |b| (a, b))).collect();
    let out = pairs
        .par_iter()
        .map(|&(a, b)| {
            let inst = serde_json::json!({ "name": format!("{} → {}", qs[a].name, qs[b].name) });
            match enumerate_unital_homs(&qs[a].value, &qs[b].value, ctx.cfg.budget) {
                Ok(homs) => {
                    let mut r = ValidationReport::new("unital homs are involutive");
                    r.check_all("h(a*) = h(a)*", homs.iter().map(|h| h.ji_images()), |imgs| {
                        let h = QuantaleHom::from_ji_images(qs[a].value.clone(), qs[b].value.clone(), imgs);
                        validate_hom(&h).0.involutive
                    });
                    Outcome::Checked(inst, r)
                }
                Err(e) => Outcome::Budget(inst, e.to_string()),
            }
        })
        .collect();
    tally(&mut rep, out);
    rep
}

fn suite_group_case(ctx: &Ctx) -> Report {
    let mut rep = Report::new("group_case");
    let gs = generators::groups();
    let qs: Vec<Arc<InvolutiveQuantale>> = gs
        .iter()
        .map(|g| Arc::new(quantale_of_groupoid(&g.value).expect("small group")))
        .collect();
    let pairs: Vec<(usize, usize)> = (0..gs.len()).flat_map(|a| (0..gs.len()).map(move |b| (a, b))).collect();
    let mut out: Vec<Outcome> = pairs
        .par_iter()
        .map(|&(a, b)| {
            let (g, h) = (&gs[a].value, &gs[b].value);
            let inst = pair_instance(&gs[a], &gs[b]);
            let fs = match enumerate_functors(g, h, ctx.cfg.budget) {
                Ok(fs) => fs,
                Err(e) => return Outcome::Budget(inst, e.to_string()),
            };
            let homs = match enumerate_unital_homs(&qs[a], &qs[b], ctx.cfg.budget) {
                Ok(hs) => hs,
                Err(e) => return Outcome::Budget(inst, e.to_string()),
            };
            let mut r = ValidationReport::new("group case");
            for f in &fs {
                r.merge(check_group_lemma(f, g, h));
            }
            r.record(
                "|hom(G,H)| = |unital homs 𝒫G → 𝒫H|",
                (fs.len() != homs.len()).then(|| format!("{} vs {}", fs.len(), homs.len())),
            );
            Outcome::Checked(inst, r)
        })
        .collect();
    for (g, q) in gs.iter().zip(&qs) {
        let mut r = ValidationReport::new("group of units");
        match group_units(q) {
            Ok(u) => r.record(
                "𝒫G^× ≅ G",
                find_isomorphism(&u.group, &g.value).is_none().then(|| format!("{} units", u.elements.len())),
            ),
            Err(e) => r.record("𝒫G^× is a group", Some(e.to_string())),
        }
        out.push(Outcome::Checked(instance(&g.name, &g.value), r));
    }
    tally(&mut rep, out);
    rep
}

fn functor_pairs(ctx: &Ctx) -> Vec<(usize, usize, Result<Vec<GroupoidFunctor>, String>)> {
    ctx.pairs(PAIR_MAX_ARROWS)
        .par_iter()
        .map(|&(a, b)| {
            let fs = enumerate_functors(&ctx.grid[a].value, &ctx.grid[b].value, ctx.cfg.budget).map_err(|e| e.to_string());
            (a, b, fs)
        })
        .collect()
}

fn suite_covering(ctx: &Ctx) -> Report {
    let mut rep = Report::new("covering");
    let out = functor_pairs(ctx)
        .into_par_iter()
        .map(|(a, b, fs)| {
            let inst = pair_instance(&ctx.grid[a], &ctx.grid[b]);
            let fs = match fs {
                Ok(fs) => fs,
                Err(e) => return Outcome::Budget(inst, e),
            };
            let (g, h) = (&ctx.grid[a].value, &ctx.grid[b].value);
            let (og, oh) = (&ctx.quantales[a], &ctx.quantales[b]);
            let mut r = ValidationReport::new("covering functors");
            r.check_all(
                "covering ⟺ f1⁻¹ multiplicative, unital and finite-meet preserving",
                fs.iter().map(|f| &f.f1),
                |f1| {
                    let f = fs.iter().find(|f| &&f.f1 == f1).unwrap();
                    let fl = preimage_hom(f, og, oh).flags();
                    is_covering_functor(f, g, h) == (fl.multiplicative && fl.unital && fl.finite_meet)
                },
            );
            r.check_all(
                "functor of f1⁻¹ is F for covering F",
                fs.iter().filter(|f| is_covering_functor(f, g, h)).map(|f| &f.f1),
                |f1| {
                    let f = fs.iter().find(|f| &&f.f1 == f1).unwrap();
                    match functor_of_iqloc_morphism(&preimage_hom(f, og, oh)) {
                        Ok(back) => {
                            // objects of 𝒢(𝒪(G)) are the unit arrows in order
                            let gg = crate::quantale::groupoid_of_quantale(og).unwrap();
                            let hh = crate::quantale::groupoid_of_quantale(oh).unwrap();
                            back.f1 == f.f1
                                && (0..g.object_count()).all(|x| {
                                    let gx = gg.unit_position(g.unit(x)).unwrap();
                                    let hy = hh.unit_position(h.unit(f.f0[x])).unwrap();
                                    back.f0[gx] == hy
                                })
                        }
                        Err(_) => false,
                    }
                },
            );
            Outcome::Checked(inst, r)
        })
        .collect();
    tally(&mut rep, out);
    rep
}

fn suite_lax(ctx: &Ctx) -> Report {
    let mut rep = Report::new("lax");
    let out = functor_pairs(ctx)
        .into_par_iter()
        .map(|(a, b, fs)| {
            let inst = pair_instance(&ctx.grid[a], &ctx.grid[b]);
            let fs = match fs {
                Ok(fs) => fs,
                Err(e) => return Outcome::Budget(inst, e),
            };
            let (g, h) = (&ctx.grid[a].value, &ctx.grid[b].value);
            let mut r = ValidationReport::new("lax images");
            for f in &fs {
                r.merge(check_lax_image(f, g, h));
            }
            let mut maps: Vec<Vec<usize>> = fs
                .iter()
                .map(|f| preimage_hom(f, &ctx.quantales[a], &ctx.quantales[b]).map)
                .collect();
            maps.sort();
            maps.dedup();
            r.record(
                "distinct functors have distinct preimage maps",
                (maps.len() != fs.len()).then(|| format!("{} maps for {} functors", maps.len(), fs.len())),
            );
            Outcome::Checked(inst, r)
        })
        .collect();
    tally(&mut rep, out);
    rep
}

fn suite_orbits(ctx: &Ctx) -> Report {
    let mut rep = Report::new("orbits");
    let out = ctx
        .modules()
        .par_iter()
        .map(|(i, s)| {
            let inst = gset_instance(s);
            let mut r = ValidationReport::new("invariant elements");
            match module_of_gset_over(&s.value, ctx.quantales[*i].clone()) {
                Ok(m) => {
                    let inv = invariant_elements(&m);
                    r.merge(inv.report.clone());
                    let oracle = unions_of_classes(&s.value.orbits());
                    r.record(
                        "invariant elements = unions of orbits",
                        (inv.elements != oracle).then(|| format!("{} vs {} elements", inv.elements.len(), oracle.len())),
                    );
                }
                Err(e) => r.record("module is defined", Some(e.to_string())),
            }
            Outcome::Checked(inst, r)
        })
        .collect();
    tally(&mut rep, out);
    rep
}

fn suite_inverse_image(ctx: &Ctx) -> Report {
    let mut rep = Report::new("inverse_image");
    let out = ctx
        .modules()
        .into_par_iter()
        .filter(|(_, s)| s.value.side() == Side::Left)
        .map(|(_, s)| {
            let inst = gset_instance(&s);
            let n = s.value.point_count();
            let mut r = ValidationReport::new("𝔞*");
            for x in 0..1usize << n {
                match action_inverse_image(&s.value, x) {
                    Ok(ii) => {
                        if !ii.report.is_valid() {
                            r.merge(ii.report);
                            break;
                        }
                    }
                    Err(e) => {
                        r.record("𝔞* is defined", Some(e.to_string()));
                        break;
                    }
                }
            }
            r.record("all subsets checked", None);
            Outcome::Checked(inst, r)
        })
        .collect();
    tally(&mut rep, out);
    rep
}

fn suite_tensor(ctx: &Ctx) -> Report {
    let mut rep = Report::new("tensor");
    let mut cases = Vec::new();
    for g in ctx.small(8).into_iter().map(|i| &ctx.grid[i]) {
        for x in generators::right_gsets(g) {
            for y in generators::left_gsets(g) {
                cases.push((x.clone(), y));
            }
        }
    }
    let mut out: Vec<Outcome> = cases
        .par_iter()
        .map(|(x, y)| {
            let inst = serde_json::json!({
                "name": format!("{} ⊗ {}", x.name, y.name),
                "right": gset_to_json(&x.value),
                "left": gset_to_json(&y.value),
            });
            let mut r = ValidationReport::new("tensor");
            match tensor_over_q(&x.value, &y.value) {
                Ok(t) => {
                    r.merge(t.report.clone());
                    if t.diagonal.gset.point_count() <= HARD_MAX_CARRIER {
                        r.merge(t.diagonal.gset.validate());
                        match crate::actions::module_of_gset(&t.diagonal.gset) {
                            Ok(m) => r.merge(m.validate()),
                            Err(e) => r.record("diagonal module is defined", Some(e.to_string())),
                        }
                    }
                }
                Err(e) => r.record("tensor is defined", Some(e.to_string())),
            }
            Outcome::Checked(inst, r)
        })
        .collect();
    let units: Vec<Outcome> = ctx
        .grid
        .par_iter()
        .map(|g| {
            let r = check_unit_tensor(&g.value).unwrap_or_else(|e| {
                let mut r = ValidationReport::new("Q ⊗_Q Q ≅ Q");
                r.record("tensor is defined", Some(e.to_string()));
                r
            });
            Outcome::Checked(instance(&g.name, &g.value), r)
        })
        .collect();
    out.extend(units);
    tally(&mut rep, out);
    rep.notes.push(format!(
        "Q ⊗_Q Q ≅ Q checked on the {} Boolean quantales 𝒪(G); the non-Boolean frames have no groupoid sets",
        ctx.grid.len()
    ));
    rep
}

fn suite_partial_units(ctx: &Ctx) -> Report {
    let mut rep = Report::new("partial_unit_laws");
    let out = ctx
        .modules()
        .par_iter()
        .filter(|(_, s)| s.value.side() == Side::Left)
        .map(|(i, s)| {
            let inst = gset_instance(s);
            let r = match module_of_gset_over(&s.value, ctx.quantales[*i].clone()) {
                Ok(m) => check_partial_unit_laws(&m),
                Err(e) => {
                    let mut r = ValidationReport::new("partial unit laws");
                    r.record("module is defined", Some(e.to_string()));
                    r
                }
            };
            Outcome::Checked(inst, r)
        })
        .collect();
    tally(&mut rep, out);
    rep
}

fn cube(n: usize) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::with_capacity(n * n * n);
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                out.push((a, b, c));
            }
        }
    }
    out
}

type AlgTable = Vec<Vec<Result<Vec<AlgebraicMorphism>, String>>>;

fn suite_equivalence(ctx: &Ctx) -> Report {
    let mut rep = Report::new("equivalence");
    let small = ctx.small(PAIR_MAX_ARROWS);
    let pairs = ctx.pairs(PAIR_MAX_ARROWS);
    let results: Vec<(usize, usize, Result<(Vec<AlgebraicMorphism>, ValidationReport), String>)> = pairs
        .par_iter()
        .map(|&(a, b)| {
            let res = check_algmorph_correspondence(
                &ctx.grid[a].value,
                &ctx.grid[b].value,
                &ctx.quantales[a],
                &ctx.quantales[b],
                ctx.cfg.budget,
            )
            .map(|(ams, _, r)| (ams, r))
            .map_err(|e| e.to_string());
            (a, b, res)
        })
        .collect();
    let pos = |i: usize| small.iter().position(|&x| x == i).unwrap();
    let mut table: AlgTable = vec![vec![Err(String::new()); small.len()]; small.len()];
    let mut out = Vec::new();
    for (a, b, res) in results {
        let inst = pair_instance(&ctx.grid[a], &ctx.grid[b]);
        match res {
            Ok((ams, r)) => {
                out.push(Outcome::Checked(inst, r));
                table[pos(a)][pos(b)] = Ok(ams);
            }
            Err(e) => {
                out.push(Outcome::Budget(inst, e.clone()));
                table[pos(a)][pos(b)] = Err(e);
            }
        }
    }
    // identities
    for &a in &small {
        let g = &ctx.grid[a].value;
        let mut r = ValidationReport::new("identities");
        let h = algmorph_to_hom_over(&identity_algmorph(g), &ctx.quantales[a], &ctx.quantales[a]);
        r.record(
            "algmorph_to_hom(id) = id",
            (h != QuantaleHom::identity(ctx.quantales[a].clone())).then(|| format!("{:?}", h.ji_images())),
        );
        out.push(Outcome::Checked(instance(&ctx.grid[a].name, g), r));
    }
    // composition on triples
    let tri: Vec<usize> = ctx.small(TRIPLE_MAX_ARROWS);
    let triples: Vec<(usize, usize, usize)> = cube(tri.len())
        .into_iter()
        .map(|(a, b, c)| (tri[a], tri[b], tri[c]))
        .collect();
    let comp: Vec<Outcome> = triples
        .par_iter()
        .map(|&(a, b, c)| {
            let inst = serde_json::json!({
                "name": format!("{} → {} → {}", ctx.grid[a].name, ctx.grid[b].name, ctx.grid[c].name),
            });
            let (Ok(x), Ok(y)) = (&table[pos(a)][pos(b)], &table[pos(b)][pos(c)]) else {
                return Outcome::Budget(inst, "enumeration failed".into());
            };
            let (qa, qb, qc) = (&ctx.quantales[a], &ctx.quantales[b], &ctx.quantales[c]);
            let mut r = ValidationReport::new("composition");
            let cases = x.iter().flat_map(|a1| y.iter().map(move |a2| (a1, a2)));
            let mut witness = None;
            for (a1, a2) in cases {
                let ok = compose_algmorphs(a1, a2).is_ok_and(|c12| {
                    crate::bimodules::validate_algmorph(&c12).is_valid()
                        && algmorph_to_hom_over(&c12, qa, qc)
                            == algmorph_to_hom_over(a1, qa, qb).then(&algmorph_to_hom_over(a2, qb, qc))
                });
                if !ok {
                    witness = Some(format!("{:?} ∘ {:?}", a1.table(), a2.table()));
                    break;
                }
            }
            r.record("algmorph_to_hom(A2∘A1) = algmorph_to_hom(A1) then algmorph_to_hom(A2)", witness);
            Outcome::Checked(inst, r)
        })
        .collect();
    out.extend(comp);
    tally(&mut rep, out);
    rep
}

fn suite_bimodules(ctx: &Ctx) -> Report {
    let mut rep = Report::new("bimodules");
    let tri = ctx.small(TRIPLE_MAX_ARROWS);
    let homs: Vec<Vec<Result<Vec<QuantaleHom>, String>>> = tri
        .par_iter()
        .map(|&a| {
            tri.iter()
                .map(|&b| enumerate_unital_homs(&ctx.quantales[a], &ctx.quantales[b], ctx.cfg.budget).map_err(|e| e.to_string()))
                .collect()
        })
        .collect();
    let triples = cube(tri.len());
    let mut out: Vec<Outcome> = triples
        .par_iter()
        .map(|&(a, b, c)| {
            let (ga, gb, gc) = (&ctx.grid[tri[a]], &ctx.grid[tri[b]], &ctx.grid[tri[c]]);
            let inst = serde_json::json!({ "name": format!("{} → {} → {}", ga.name, gb.name, gc.name) });
            let (Ok(hs), Ok(ks)) = (&homs[a][b], &homs[b][c]) else {
                return Outcome::Budget(inst, "enumeration failed".into());
            };
            let mut r = ValidationReport::new("X_{k∘h} ≅ X_h ∘ X_k");
            for h in hs {
                for k in ks {
                    let (Ok(ah), Ok(ak)) = (
                        hom_to_algmorph_on(h, &ga.value, &gb.value),
                        hom_to_algmorph_on(k, &gb.value, &gc.value),
                    ) else {
                        r.record("hom_to_algmorph is defined", Some(format!("{:?} / {:?}", h.ji_images(), k.ji_images())));
                        return Outcome::Checked(inst, r);
                    };
                    let direct = hom_to_algmorph_on(&h.then(k), &ga.value, &gc.value);
                    let composed = compose_algmorphs(&ah, &ak);
                    if direct.as_ref().ok() != composed.as_ref().ok() {
                        r.record("X_{k∘h} = X_k ∘ X_h as bi-actions", Some(format!("{:?} then {:?}", h.ji_images(), k.ji_images())));
                        return Outcome::Checked(inst, r);
                    }
                    match check_composite_bimodule(&ah, &ak) {
                        Ok(rep) if rep.is_valid() => {}
                        Ok(rep) => {
                            r.merge(rep);
                            return Outcome::Checked(inst, r);
                        }
                        Err(e) => {
                            r.record("composite is defined", Some(e.to_string()));
                            return Outcome::Checked(inst, r);
                        }
                    }
                }
            }
            r.record("all composable pairs checked", None);
            Outcome::Checked(inst, r)
        })
        .collect();
    // X_h is a bimodule and agrees with the bi-action; unit coherence
    let pairs: Vec<(usize, usize)> = (0..tri.len()).flat_map(|a| (0..tri.len()).map(move |b| (a, b))).collect();
    let singles: Vec<Outcome> = pairs
        .par_iter()
        .map(|&(a, b)| {
            let (ga, gb) = (&ctx.grid[tri[a]], &ctx.grid[tri[b]]);
            let inst = pair_instance(ga, gb);
            let Ok(hs) = &homs[a][b] else {
                return Outcome::Budget(inst, "enumeration failed".into());
            };
            let mut r = ValidationReport::new("X_h");
            for h in hs {
                let am = hom_to_algmorph_on(h, &ga.value, &gb.value);
                let ok = match (bimodule_of_hom(h), &am) {
                    (Ok(m), Ok(am)) => {
                        m.validate().is_valid()
                            && bimodule_of_biset(&am.biset()).is_ok_and(|m2| m2 == m)
                            && check_left_unitor(&am.biset()).is_ok_and(|x| x.is_valid())
                            && check_right_unitor(&am.biset()).is_ok_and(|x| x.is_valid())
                    }
                    _ => false,
                };
                if !ok {
                    r.record("X_h is a bimodule with unit coherence", Some(format!("{:?}", h.ji_images())));
                    return Outcome::Checked(inst, r);
                }
            }
            r.record("X_h is a bimodule with unit coherence", None);
            Outcome::Checked(inst, r)
        })
        .collect();
    out.extend(singles);
    // one associativity instance: Z2 → P2 → Z2 → Z2
    let z2 = FiniteGroupoid::cyclic(2);
    let p2 = FiniteGroupoid::pair(vec!["x".into(), "y".into()]).unwrap();
    let inst = serde_json::json!({ "name": "associator Z2 → P2 → Z2 → Z2" });
    let assoc = (|| {
        let a1 = enumerate_algmorphs(&z2, &p2, ctx.cfg.budget)?;
        let a2 = enumerate_algmorphs(&p2, &z2, ctx.cfg.budget)?;
        let a3 = enumerate_algmorphs(&z2, &z2, ctx.cfg.budget)?;
        let mut r = ValidationReport::new("associator");
        for x in &a1 {
            for y in &a2 {
                for w in &a3 {
                    r.merge(check_associator(&x.biset(), &y.biset(), &w.biset())?);
                }
            }
        }
        Ok::<_, crate::bimodules::BimoduleError>(r)
    })();
    out.push(match assoc {
        Ok(r) => Outcome::Checked(inst, r),
        Err(e) => Outcome::Budget(inst, e.to_string()),
    });
    tally(&mut rep, out);
    rep
}

fn suite_perturbation(ctx: &Ctx) -> Report {
    let mut rep = Report::new("biset_perturbation");
    let mut bisets: Vec<(String, Biset)> = ctx
        .small(3)
        .into_iter()
        .map(|i| (format!("U({})", ctx.grid[i].name), Biset::unit(&ctx.grid[i].value)))
        .collect();
    let z2 = FiniteGroupoid::cyclic(2);
    if let Ok(ams) = enumerate_algmorphs(&z2, &z2, ctx.cfg.budget) {
        bisets.extend(ams.iter().enumerate().map(|(i, a)| (format!("X_{i}(Z2 → Z2)"), a.biset())));
    }
    let out = bisets
        .par_iter()
        .map(|(name, b)| {
            let inst = serde_json::json!({ "name": name });
            let mut r = ValidationReport::new("diagrams ⟺ bimodule laws");
            let cases = std::iter::once(b.clone()).chain(b.perturbations());
            r.check_all("groupoid diagrams hold ⟺ bimodule laws hold", cases.enumerate(), |(_, c)| {
                let lattice = bimodule_of_biset(c).map(|m| m.validate().is_valid()).unwrap_or(false);
                biset_diagrams(c).is_valid() == lattice
            });
            Outcome::Checked(inst, r)
        })
        .collect();
    tally(&mut rep, out);
    rep
}

/// Runs every selected suite.
pub fn verify_all(cfg: &VerifyConfig) -> VerifyReport {
    let ctx = Ctx::new(cfg.clone());
    let selected = |s: &str| cfg.suites.as_ref().is_none_or(|l| l.iter().any(|x| x == s));
    let mut suites = Vec::new();
    for &name in SUITES {
        if !selected(name) {
            continue;
        }
        if cfg.groups_only && name != "group_case" {
            let mut r = Report::new(name);
            r.skipped = Some("groups-only configuration".into());
            suites.push(r);
            continue;
        }
        let start = Instant::now();
        let mut r = match name {
            "roundtrip" => suite_roundtrip(&ctx),
            "iqf_axioms" => suite_iqf(&ctx),
            "completion" => suite_completion(&ctx),
            "involution" => suite_involution(&ctx),
            "group_case" => suite_group_case(&ctx),
            "covering" => suite_covering(&ctx),
            "lax" => suite_lax(&ctx),
            "orbits" => suite_orbits(&ctx),
            "inverse_image" => suite_inverse_image(&ctx),
            "tensor" => suite_tensor(&ctx),
            "partial_unit_laws" => suite_partial_units(&ctx),
            "equivalence" => suite_equivalence(&ctx),
            "bimodules" => suite_bimodules(&ctx),
            "biset_perturbation" => suite_perturbation(&ctx),
            _ => unreachable!(),
        };
        r.wall_time = start.elapsed().as_secs_f64();
        suites.push(r);
    }
    VerifyReport { suites }
}

/// Runs a single suite by name.
pub fn run_suite(name: &str, cfg: &VerifyConfig) -> Option<Report> {
    if !SUITES.contains(&name) {
        return None;
    }
    let cfg = VerifyConfig {
        suites: Some(vec![name.to_string()]),
        ..cfg.clone()
    };
    verify_all(&cfg).suites.into_iter().next()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn groups_only_skips_groupoid_suites() {
        let cfg = VerifyConfig {
            groups_only: true,
            ..VerifyConfig::default()
        };
        let r = verify_all(&cfg);
        assert!(r.is_success(), "{r}");
        assert!(r.suite("group_case").unwrap().skipped.is_none());
        assert!(r.suite("roundtrip").unwrap().skipped.is_some());
    }

    #[test]
    fn mutation_is_caught() {
        let cfg = VerifyConfig {
            mutate_o: true,
            ..VerifyConfig::default()
        };
        let r = run_suite("roundtrip", &cfg).unwrap();
        assert!(!r.failures.is_empty());
        assert!(r.failures.iter().all(|f| !f.witness.is_empty()));
        assert_eq!(r.instances, r.passes + r.failed_instances());
    }
}
