//! Acceptance run: one line per criterion, exact equality, pinned runtimes.

use std::process::ExitCode;

use iqf_core::generators::groupoid_grid;
use iqf_core::verify::{run_suite, verify_all, Report, VerifyConfig, VerifyReport};

const ROUNDTRIP_MAX_SECS: f64 = 10.0;
const COMPLETION_MAX_SECS: f64 = 30.0;
const TENSOR_MAX_SECS: f64 = 60.0;
const EQUIVALENCE_MAX_SECS: f64 = 120.0;

struct Criterion {
    id: usize,
    title: &'static str,
    problems: Vec<String>,
}

impl Criterion {
    fn new(id: usize, title: &'static str) -> Self {
        Self {
            id,
            title,
            problems: Vec::new(),
        }
    }

    fn require(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.problems.push(what.into());
        }
    }

    /// The suite passed with no failures, no budget overrun and a consistent tally.
    fn suite(&mut self, r: &VerifyReport, name: &str, min_instances: usize, max_secs: Option<f64>) -> Option<Report> {
        let Some(s) = r.suite(name) else {
            self.problems.push(format!("suite {name} missing"));
            return None;
        };
        self.require(s.skipped.is_none(), format!("{name} skipped"));
        self.require(s.failures.is_empty(), format!(
            "{name}: {} failures, first: {}",
            s.failures.len(),
            s.failures.first().map(|f| format!("{} ({})", f.theorem, f.witness)).unwrap_or_default()
        ));
        self.require(!s.budget_exceeded, format!("{name}: budget exceeded"));
        self.require(s.passes + s.failures.len() == s.instances, format!("{name}: tally inconsistent"));
        self.require(s.instances >= min_instances, format!("{name}: {} < {min_instances} instances", s.instances));
        if let Some(limit) = max_secs {
            self.require(s.wall_time < limit, format!("{name}: {:.2}s ≥ {limit}s", s.wall_time));
        }
        Some(s.clone())
    }

    fn print(&self) -> bool {
        let ok = self.problems.is_empty();
        println!(
            "criterion {:>2} {} {}{}",
            self.id,
            if ok { "PASS" } else { "FAIL" },
            self.title,
            if ok { String::new() } else { format!(": {}", self.problems.join("; ")) }
        );
        ok
    }
}

fn main() -> ExitCode {
    let report = verify_all(&VerifyConfig::default());
    let mut out = Vec::new();

    let mut c = Criterion::new(1, "round trip 𝒪(𝒢(𝒪(G))) = 𝒪(G), 𝒢(𝒪(G)) ≅ G");
    let up_to_8 = groupoid_grid().iter().filter(|g| g.value.arrow_count() <= 8).count();
    c.require(up_to_8 >= 30, format!("only {up_to_8} groupoids with ≤ 8 arrows"));
    c.suite(&report, "roundtrip", groupoid_grid().len(), Some(ROUNDTRIP_MAX_SECS));
    out.push(c);

    let mut c = Criterion::new(2, "IQF axioms on 𝒪(G); mutated fixture caught");
    c.suite(&report, "iqf_axioms", groupoid_grid().len(), None);
    let mutated = VerifyConfig {
        mutate_o: true,
        ..VerifyConfig::default()
    };
    for name in ["iqf_axioms", "roundtrip"] {
        let m = run_suite(name, &mutated).expect("known suite");
        c.require(!m.failures.is_empty(), format!("mutated {name} passed"));
        c.require(
            m.failures.iter().all(|f| !f.witness.is_empty() && f.instance.is_object()),
            format!("mutated {name}: failure without witness"),
        );
    }
    out.push(c);

    let mut c = Criterion::new(3, "ℒ(Q_I) ≅ Q via I ↦ ⋁I");
    c.suite(&report, "completion", 20, Some(COMPLETION_MAX_SECS));
    out.push(c);

    let mut c = Criterion::new(4, "unital homs between IQFs with ≤ 4 atoms are involutive");
    c.suite(&report, "involution", 1, None);
    out.push(c);

    let mut c = Criterion::new(5, "group case: f⁻¹ unital iff iso, |hom(G,H)| = |hom(𝒫G,𝒫H)|, 𝒫G^× ≅ G");
    c.suite(&report, "group_case", 64, None);
    out.push(c);

    let mut c = Criterion::new(6, "covering functors ⟺ IQF homs f1⁻¹; functor of f1⁻¹ = F");
    c.suite(&report, "covering", 1, None);
    out.push(c);

    let mut c = Criterion::new(7, "lax images; faithfulness of F ↦ f1⁻¹");
    c.suite(&report, "lax", 1, None);
    out.push(c);

    let mut c = Criterion::new(8, "invariant elements = unions of orbits");
    c.suite(&report, "orbits", 1, None);
    out.push(c);

    let mut c = Criterion::new(9, "middle-linear = invariant; Q ⊗_Q Q ≅ Q");
    c.suite(&report, "tensor", 1, Some(TENSOR_MAX_SECS));
    out.push(c);

    let mut c = Criterion::new(10, "partial-unit laws on every module");
    c.suite(&report, "partial_unit_laws", 1, None);
    out.push(c);

    let mut c = Criterion::new(11, "|algebraic morphisms| = |unital homs|, round trips, composition");
    c.suite(&report, "equivalence", 1, Some(EQUIVALENCE_MAX_SECS));
    out.push(c);

    let mut c = Criterion::new(12, "X_{k∘h} ≅ X_h ∘ X_k; unitors; associator");
    c.suite(&report, "bimodules", 1, None);
    c.suite(&report, "biset_perturbation", 1, None);
    out.push(c);

    let mut ok = out.iter().map(Criterion::print).fold(true, |a, b| a & b);
    let total = report.instances();
    println!("verify-all: {total} instances, exit code {}", report.exit_code());
    if total < 200 || report.exit_code() != 0 {
        println!("verify-all FAIL: expected ≥ 200 instances and exit code 0");
        ok = false;
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
