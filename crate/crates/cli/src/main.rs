use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value as Json};

use iqf_core::actions::{invariant_elements, module_of_gset, tensor_over_q, GSet, Side};
use iqf_core::bimodules::{
    algmorph_to_hom, compose_algmorphs, enumerate_algmorphs, hom_to_algmorph, validate_algmorph, AlgebraicMorphism,
    BimoduleError,
};
use iqf_core::groupoid::{FiniteGroupoid, GroupoidError};
use iqf_core::io::{
    algmorph_to_json, emit_json, emit_value, groupoid_to_json, hom_to_json, load_instance, parse_value, IoError, Kind,
    Value,
};
use iqf_core::lattice::LatticeError;
use iqf_core::quantale::{
    check_roundtrip_quantale, check_roundtrip_with, enumerate_homs_with, enumerate_unital_homs, groupoid_of_quantale,
    quantale_of_groupoid, validate_hom, InvolutiveQuantale, QuantaleError, QuantaleHom,
};
use iqf_core::report::ValidationReport;
use iqf_core::verify::{verify_all, VerifyConfig, DEFAULT_BUDGET, SUITES};

const EXIT_FAIL: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_BUDGET: u8 = 3;

#[derive(Parser)]
#[command(name = "iqf-lab", version, about = "Finite étale groupoids and inverse quantal frames")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Node budget for exhaustive searches (overrides IQF_LAB_BUDGET).
    #[arg(long, global = true)]
    budget: Option<u64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Lattice,
    InverseSemigroup,
    Groupoid,
    Standard,
    Quantale,
    Hom,
    Gset,
    Algmorph,
}

impl From<KindArg> for Kind {
    fn from(k: KindArg) -> Kind {
        match k {
            KindArg::Lattice => Kind::Lattice,
            KindArg::InverseSemigroup => Kind::InverseSemigroup,
            KindArg::Groupoid => Kind::Groupoid,
            KindArg::Standard => Kind::Standard,
            KindArg::Quantale => Kind::Quantale,
            KindArg::Hom => Kind::Hom,
            KindArg::Gset => Kind::Gset,
            KindArg::Algmorph => Kind::Algmorph,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Check a JSON instance against the axioms of its kind.
    Validate {
        file: PathBuf,
        #[arg(long, value_enum)]
        kind: Option<KindArg>,
    },
    /// Build a groupoid from a standard description (cyclic, pair, action, ...).
    Build { spec: PathBuf },
    /// The quantale 𝒪(G) of a groupoid.
    Quantalize { groupoid: PathBuf },
    /// The groupoid 𝒢(Q) of an inverse quantal frame.
    Groupoidify { quantale: PathBuf },
    /// Check 𝒪(𝒢(𝒪(G))) = 𝒪(G) or 𝒪(𝒢(Q)) ≅ Q.
    Roundtrip { file: PathBuf },
    /// Enumerate homomorphisms Q → R.
    Homs {
        source: PathBuf,
        target: PathBuf,
        #[arg(long)]
        unital: bool,
        #[arg(long)]
        finite_meet: bool,
        /// Lax homomorphisms instead of multiplicative ones.
        #[arg(long)]
        lax: bool,
    },
    /// Tensor product of a right and a left groupoid set.
    Tensor { right: PathBuf, left: PathBuf },
    /// Orbits and invariant elements of a groupoid set.
    Orbits { gset: PathBuf },
    #[command(subcommand)]
    Algmorph(AlgmorphCommand),
    /// Run every verification suite over the instance grid.
    VerifyAll {
        /// Only the group-case suite.
        #[arg(long)]
        groups_only: bool,
        /// Add seeded random disjoint unions to the grid.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 8)]
        random_count: usize,
        /// Restrict to these suites.
        #[arg(long = "suite", value_parser = clap::builder::PossibleValuesParser::new(SUITES))]
        suites: Vec<String>,
    },
}

#[derive(Subcommand)]
enum AlgmorphCommand {
    /// All algebraic morphisms G → H.
    Enumerate { source: PathBuf, target: PathBuf },
    /// The composite of A1: G → H and A2: H → K.
    Compose { first: PathBuf, second: PathBuf },
    /// The unital quantale hom 𝒪(G) → 𝒪(H) of an algebraic morphism.
    Tohom { algmorph: PathBuf },
    /// The algebraic morphism of a unital quantale hom between inverse quantal frames.
    Fromhom { hom: PathBuf },
}

struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn input(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        Self::input(e.to_string())
    }
}

macro_rules! budget_aware {
    ($t:ty, $($pat:pat),+) => {
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                let code = match e {
                    $($pat)|+ => EXIT_BUDGET,
                    #[allow(unreachable_patterns)]
                    _ => EXIT_INPUT,
                };
                Self { code, message: e.to_string() }
            }
        }
    };
}

budget_aware!(QuantaleError, QuantaleError::SearchBudgetExceeded(_), QuantaleError::Lattice(LatticeError::SearchBudgetExceeded { .. }));
budget_aware!(GroupoidError, GroupoidError::SearchBudgetExceeded(_));
budget_aware!(BimoduleError, BimoduleError::BudgetExceeded(_), BimoduleError::Quantale(QuantaleError::SearchBudgetExceeded(_)));
budget_aware!(LatticeError, LatticeError::SearchBudgetExceeded { .. });

impl From<iqf_core::actions::ActionError> for CliError {
    fn from(e: iqf_core::actions::ActionError) -> Self {
        Self::input(e.to_string())
    }
}

/// What a command produced: a JSON document, its text rendering and an exit code.
struct Output {
    json: Json,
    text: String,
    code: u8,
}

impl Output {
    fn ok(json: Json, text: String) -> Self {
        Self { json, text, code: 0 }
    }

    /// A JSON instance whose text form is the instance itself.
    fn instance(text: String) -> Self {
        let json = serde_json::from_str(&text).expect("emitted JSON parses");
        Self { json, text, code: 0 }
    }

    fn report(r: &ValidationReport) -> Self {
        let mut text = String::new();
        for c in &r.checks {
            let mark = if c.passed { "ok  " } else { "FAIL" };
            text.push_str(&format!("{mark} {}", c.law));
            if let Some(w) = c.witness.as_ref().filter(|_| !c.passed) {
                text.push_str(&format!("  (witness: {w})"));
            }
            text.push('\n');
        }
        text.push_str(if r.is_valid() { "valid" } else { "INVALID" });
        Self {
            json: serde_json::to_value(r).expect("serializable"),
            text,
            code: if r.is_valid() { 0 } else { EXIT_FAIL },
        }
    }
}

fn budget(global: &Global) -> Result<u64, CliError> {
    if let Some(b) = global.budget {
        return Ok(b);
    }
    match std::env::var("IQF_LAB_BUDGET") {
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|_| CliError::input(format!("IQF_LAB_BUDGET is not a number: {s:?}"))),
        Err(_) => Ok(DEFAULT_BUDGET),
    }
}

fn load(path: &Path) -> Result<Value, CliError> {
    Ok(load_instance(path, None)?)
}

fn load_groupoid(path: &Path) -> Result<FiniteGroupoid, CliError> {
    match load(path)? {
        Value::Groupoid(g) => Ok(g),
        _ => Err(CliError::input(format!("{}: expected a groupoid", path.display()))),
    }
}

fn load_quantale(path: &Path) -> Result<InvolutiveQuantale, CliError> {
    match load(path)? {
        Value::Quantale(q) => Ok(q),
        Value::Groupoid(g) => Ok(quantale_of_groupoid(&g)?),
        _ => Err(CliError::input(format!("{}: expected a quantale or a groupoid", path.display()))),
    }
}

fn load_gset(path: &Path) -> Result<GSet, CliError> {
    match load(path)? {
        Value::Gset(s) => Ok(s),
        _ => Err(CliError::input(format!("{}: expected a groupoid set", path.display()))),
    }
}

fn load_algmorph(path: &Path) -> Result<AlgebraicMorphism, CliError> {
    match load(path)? {
        Value::Algmorph(a) => Ok(a),
        _ => Err(CliError::input(format!("{}: expected an algebraic morphism", path.display()))),
    }
}

fn kind_name(v: &Value) -> &'static str {
    match v {
        Value::Lattice(_) => "lattice",
        Value::InverseSemigroup(_) => "inverse semigroup",
        Value::Groupoid(_) => "groupoid",
        Value::Quantale(_) => "inverse quantal frame",
        Value::Hom(_) => "quantale hom",
        Value::Gset(_) => "groupoid set",
        Value::Algmorph(_) => "algebraic morphism",
    }
}

fn validate(file: &Path, kind: Option<KindArg>) -> Result<Output, CliError> {
    let text = std::fs::read_to_string(file).map_err(|e| CliError::input(format!("cannot read {}: {e}", file.display())))?;
    let kind = match kind {
        Some(k) => k.into(),
        None => iqf_core::io::detect_kind(&text)?,
    };
    let v = parse_value(&text, kind)?;
    let r = match &v {
        Value::Lattice(_) => {
            let mut r = ValidationReport::new("lattice");
            r.record("well formed", None);
            r
        }
        Value::InverseSemigroup(s) => s.validate(),
        Value::Groupoid(g) => g.validate(),
        Value::Quantale(q) => q.validate_iqf(),
        Value::Hom(h) => validate_hom(h).1,
        Value::Gset(s) => s.validate(),
        Value::Algmorph(a) => validate_algmorph(a),
    };
    let mut out = Output::report(&r);
    out.text = format!("{}\n{}", kind_name(&v), out.text);
    Ok(out)
}

fn roundtrip(file: &Path) -> Result<Output, CliError> {
    let r = match load(file)? {
        Value::Groupoid(g) => check_roundtrip_with(&g, quantale_of_groupoid),
        Value::Quantale(q) => check_roundtrip_quantale(&q),
        v => return Err(CliError::input(format!("roundtrip needs a groupoid or a quantale, got a {}", kind_name(&v)))),
    };
    Ok(Output::report(&r))
}

fn homs(source: &Path, target: &Path, unital: bool, finite_meet: bool, lax: bool, budget: u64) -> Result<Output, CliError> {
    let q = Arc::new(load_quantale(source)?);
    let r = Arc::new(load_quantale(target)?);
    let found: Vec<QuantaleHom> = if unital && !lax {
        enumerate_unital_homs(&q, &r, budget)?
            .into_iter()
            .filter(|h| !finite_meet || h.flags().finite_meet)
            .collect()
    } else {
        enumerate_homs_with(
            &q,
            &r,
            |f| {
                (if lax { f.lax } else { f.multiplicative })
                    && (!unital || f.unital)
                    && (!finite_meet || f.finite_meet)
            },
            budget,
        )?
    };
    let rows: Vec<Json> = found
        .iter()
        .map(|h| {
            json!({
                "hom": serde_json::to_value(hom_to_json(h)).expect("serializable"),
                "flags": serde_json::to_value(h.flags()).expect("serializable"),
            })
        })
        .collect();
    let mut text = format!("{} homomorphisms\n", found.len());
    for h in &found {
        let l = r.lattice();
        let imgs: Vec<String> = h.ji_images().iter().map(|&y| l.element_name(y)).collect();
        text.push_str(&format!("  [{}]\n", imgs.join(", ")));
    }
    Ok(Output::ok(json!({ "count": found.len(), "homs": rows }), text.trim_end().to_string()))
}

fn class_name(points: &[String], class: &[usize]) -> String {
    let names: Vec<&str> = class.iter().map(|&x| points[x].as_str()).collect();
    format!("{{{}}}", names.join(", "))
}

fn tensor(right: &Path, left: &Path) -> Result<Output, CliError> {
    let (x, y) = (load_gset(right)?, load_gset(left)?);
    if x.side() != Side::Right || y.side() != Side::Left {
        return Err(CliError::input("tensor needs a right groupoid set followed by a left one"));
    }
    let t = tensor_over_q(&x, &y)?;
    let points = t.diagonal.gset.points();
    let classes: Vec<Vec<&str>> = t
        .classes
        .iter()
        .map(|c| c.iter().map(|&p| points[p].as_str()).collect())
        .collect();
    let mut text = format!(
        "fibered product: {} points\ntensor: powerset of {} classes\n",
        points.len(),
        t.classes.len()
    );
    for c in &t.classes {
        text.push_str(&format!("  {}\n", class_name(points, c)));
    }
    let rep = Output::report(&t.report);
    text.push_str(&rep.text);
    Ok(Output {
        json: json!({
            "fibered_product": points,
            "classes": classes,
            "report": rep.json,
        }),
        text,
        code: rep.code,
    })
}

fn orbits(file: &Path) -> Result<Output, CliError> {
    let s = load_gset(file)?;
    let points = s.points();
    let orbits = s.orbits();
    let named: Vec<Vec<&str>> = orbits.iter().map(|c| c.iter().map(|&p| points[p].as_str()).collect()).collect();
    let mut text = format!("{} orbits\n", orbits.len());
    for c in &orbits {
        text.push_str(&format!("  {}\n", class_name(points, c)));
    }
    let mut json = json!({ "orbits": named });
    let mut code = 0;
    if s.side() == Side::Left {
        let m = module_of_gset(&s)?;
        let inv = invariant_elements(&m);
        text.push_str(&format!("{} invariant elements\n", inv.elements.len()));
        let rep = Output::report(&inv.report);
        text.push_str(&rep.text);
        json["invariant_elements"] = inv.elements.len().into();
        json["report"] = rep.json;
        code = rep.code;
    }
    Ok(Output {
        json,
        text: text.trim_end().to_string(),
        code,
    })
}

fn algmorph(cmd: &AlgmorphCommand, budget: u64) -> Result<Output, CliError> {
    match cmd {
        AlgmorphCommand::Enumerate { source, target } => {
            let (g, h) = (load_groupoid(source)?, load_groupoid(target)?);
            let ams = enumerate_algmorphs(&g, &h, budget)?;
            let docs: Vec<Json> = ams
                .iter()
                .map(|a| serde_json::to_value(algmorph_to_json(a)).expect("serializable"))
                .collect();
            let mut text = format!("{} algebraic morphisms\n", ams.len());
            for a in &ams {
                let anchor: Vec<String> = (0..h.arrow_count())
                    .map(|k| format!("{}↦{}", h.arrows()[k], g.objects()[a.anchor(k)]))
                    .collect();
                text.push_str(&format!("  anchor {}\n", anchor.join(" ")));
            }
            Ok(Output::ok(json!({ "count": ams.len(), "algmorphs": docs }), text.trim_end().to_string()))
        }
        AlgmorphCommand::Compose { first, second } => {
            let c = compose_algmorphs(&load_algmorph(first)?, &load_algmorph(second)?)?;
            Ok(Output::instance(emit_json(&algmorph_to_json(&c))))
        }
        AlgmorphCommand::Tohom { algmorph } => {
            let h = algmorph_to_hom(&load_algmorph(algmorph)?)?;
            Ok(Output::instance(emit_json(&hom_to_json(&h))))
        }
        AlgmorphCommand::Fromhom { hom } => {
            let h = match load(hom)? {
                Value::Hom(h) => h,
                v => return Err(CliError::input(format!("expected a quantale hom, got a {}", kind_name(&v)))),
            };
            Ok(Output::instance(emit_json(&algmorph_to_json(&hom_to_algmorph(&h)?))))
        }
    }
}

fn run(cli: &Cli) -> Result<Output, CliError> {
    let budget = budget(&cli.global)?;
    match &cli.command {
        Command::Validate { file, kind } => validate(file, *kind),
        Command::Build { spec } => match load_instance(spec, Some(Kind::Standard))? {
            v @ Value::Groupoid(_) => Ok(Output::instance(emit_value(&v))),
            v => Err(CliError::input(format!("expected a standard groupoid, got a {}", kind_name(&v)))),
        },
        Command::Quantalize { groupoid } => {
            let q = quantale_of_groupoid(&load_groupoid(groupoid)?)?;
            Ok(Output::instance(emit_value(&Value::Quantale(q))))
        }
        Command::Groupoidify { quantale } => {
            let g = groupoid_of_quantale(&load_quantale(quantale)?)?;
            Ok(Output::instance(emit_json(&groupoid_to_json(&g))))
        }
        Command::Roundtrip { file } => roundtrip(file),
        Command::Homs {
            source,
            target,
            unital,
            finite_meet,
            lax,
        } => homs(source, target, *unital, *finite_meet, *lax, budget),
        Command::Tensor { right, left } => tensor(right, left),
        Command::Orbits { gset } => orbits(gset),
        Command::Algmorph(cmd) => algmorph(cmd, budget),
        Command::VerifyAll {
            groups_only,
            seed,
            random_count,
            suites,
        } => {
            let cfg = VerifyConfig {
                budget,
                groups_only: *groups_only,
                seed: *seed,
                random_count: *random_count,
                mutate_o: false,
                suites: (!suites.is_empty()).then(|| suites.clone()),
            };
            let r = verify_all(&cfg);
            Ok(Output {
                json: serde_json::to_value(&r).expect("serializable"),
                text: r.to_string(),
                code: r.exit_code() as u8,
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = match run(&cli) {
        Ok(out) => out,
        Err(e) => {
            eprintln!("iqf-lab: {}", e.message);
            return ExitCode::from(e.code);
        }
    };
    let mut body = match cli.global.format {
        Format::Json => emit_json(&out.json),
        Format::Text => out.text,
    };
    if !body.ends_with('\n') {
        body.push('\n');
    }
    match &cli.global.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, body) {
                eprintln!("iqf-lab: cannot write {}: {e}", path.display());
                return ExitCode::from(EXIT_INPUT);
            }
        }
        None => print!("{body}"),
    }
    ExitCode::from(out.code)
}
