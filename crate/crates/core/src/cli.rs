//! The `rtc` command line.
//!
//! Exit status: 0 when every obligation is proved, 1 when any is falsified,
//! 2 when some are unknown and none falsified, 3 or more on tool errors.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::{json, Value as Json};

use crate::ast::{Property, SpecProgram};
use crate::check::{
    discharge, emit_smtlib, first_trace, CheckError, CheckResult, Engine, EngineConfig, EnumerationDomain, SmtMode,
    SolverConfig, Verdict,
};
use crate::compose::{compose_monolithic, gen_all_obligations, AssumptionRule, Obligation, ObligationKind};
use crate::oracle::{pattern_in_constraint_suite, constraint_in_pattern_suite, observer_suite, constraint_suite, SuiteConfig, SuiteReport};
use crate::parser::{parse_expr, parse_source};
use crate::pattern::{lower_observer, parse_pattern, LoweringMode, Pattern};
use crate::print::{program_to_string, quote};
use crate::semantics::{trace_admissible, TimedTrace};
use crate::source::Source;
use crate::value::{parse_rational, Rational};
use crate::Error;

pub const EXIT_PROVED: i32 = 0;
pub const EXIT_FALSIFIED: i32 = 1;
pub const EXIT_UNKNOWN: i32 = 2;
pub const EXIT_ERROR: i32 = 3;
pub const EXIT_USAGE: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "rtc", version, about = "Real-time contract checker")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate and discharge every obligation of a program or component system.
    Check(CheckArgs),
    /// Step a program and print a timed trace, or validate a supplied one.
    Simulate(SimulateArgs),
    /// Print the obligations of a component system as core-language programs.
    Compose(ComposeArgs),
    /// Print a pattern lowering, the elaborated program or an SMT-LIB script.
    Emit(EmitArgs),
    /// Run the randomized and exhaustive lowering equivalence suites.
    Oracle(OracleArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Human,
    Json,
}

#[derive(Args, Debug, Default)]
pub struct Common {
    /// Configuration file; defaults to `rtc.toml` in the working directory when present.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Log the effective configuration and where each value came from.
    #[arg(long, short, global = true)]
    pub verbose: bool,
}

#[derive(Args, Debug)]
pub struct EngineArgs {
    /// explicit, bmc or kind
    #[arg(long)]
    pub engine: Option<String>,
    /// BMC depth or maximum induction depth.
    #[arg(short = 'k', long = "depth")]
    pub k: Option<usize>,
    /// Path to an SMT-LIB 2.6 solver.
    #[arg(long)]
    pub solver: Option<PathBuf>,
    /// Comma-separated positive time increments for the explicit engine.
    #[arg(long = "time-grid")]
    pub time_grid: Option<String>,
    /// Trace length for the explicit engine.
    #[arg(long)]
    pub horizon: Option<usize>,
    /// Auxiliary invariant, `name: expr` or `expr`; proved before use.
    #[arg(long = "lemma")]
    pub lemmas: Vec<String>,
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    pub file: PathBuf,
    #[command(flatten)]
    pub engine: EngineArgs,
    /// Discharge assumptions with every sibling guarantee (unsound under cycles).
    #[arg(long = "unsafe-weak-assumptions")]
    pub weak: bool,
    /// Comma-separated order of the top component's subcomponents.
    #[arg(long)]
    pub order: Option<String>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    pub file: PathBuf,
    #[arg(long, default_value_t = 5)]
    pub steps: usize,
    /// Trace JSON: a full trace is validated, a partial one fixes inputs.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[arg(long = "time-grid")]
    pub time_grid: Option<String>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct ComposeArgs {
    pub file: PathBuf,
    #[arg(long = "unsafe-weak-assumptions")]
    pub weak: bool,
    #[arg(long)]
    pub order: Option<String>,
    /// Print the flattened system and its top-level property instead.
    #[arg(long)]
    pub monolithic: bool,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum EmitMode {
    Observer,
    Constraint,
    Sidecondition,
    /// The program after pattern lowering.
    Core,
    Smt,
}

#[derive(Args, Debug)]
pub struct EmitArgs {
    pub file: Option<PathBuf>,
    /// A single pattern to lower instead of a file.
    #[arg(long)]
    pub pattern: Option<String>,
    #[arg(long, value_enum, default_value = "core")]
    pub mode: EmitMode,
    #[arg(short = 'k', long = "depth", default_value_t = 8)]
    pub k: usize,
    /// Script kind for `--mode smt`: bmc or kind.
    #[arg(long, default_value = "bmc")]
    pub engine: String,
    /// Property to encode for `--mode smt`; defaults to the first.
    #[arg(long)]
    pub property: Option<String>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    All,
    Observer,
    Constraint,
    PatternInConstraint,
    ConstraintInPattern,
}

#[derive(Args, Debug)]
pub struct OracleArgs {
    #[arg(long, value_enum, default_value = "all")]
    pub suite: Suite,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Random traces per randomized suite.
    #[arg(long, default_value_t = 10_000)]
    pub cases: u64,
    #[arg(long)]
    pub horizon: Option<usize>,
    #[arg(long = "time-grid")]
    pub time_grid: Option<String>,
    #[command(flatten)]
    pub common: Common,
}

/// Keys accepted in `rtc.toml`.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub engine: Option<String>,
    pub k: Option<usize>,
    pub solver: Option<PathBuf>,
    pub time_grid: Option<Vec<toml::Value>>,
    pub horizon: Option<usize>,
    pub format: Option<Format>,
    pub seed: Option<u64>,
    pub order: Option<Vec<String>>,
    pub unsafe_weak_assumptions: Option<bool>,
    pub lemmas: Option<Vec<String>>,
    pub solver_timeout_secs: Option<u64>,
}

impl FileConfig {
    pub fn load(explicit: Option<&Path>) -> Result<(FileConfig, Option<PathBuf>), Error> {
        let path = match explicit {
            Some(p) => p.to_path_buf(),
            None => {
                let p = PathBuf::from("rtc.toml");
                if !p.exists() {
                    return Ok((FileConfig::default(), None));
                }
                p
            }
        };
        let text = std::fs::read_to_string(&path)
            .map_err(|e| Error::Usage(format!("cannot read config {}: {e}", path.display())))?;
        let cfg = toml::from_str(&text).map_err(|e| Error::Usage(format!("config {}: {e}", path.display())))?;
        Ok((cfg, Some(path)))
    }

    fn time_grid_text(&self) -> Option<Result<String, Error>> {
        self.time_grid.as_ref().map(|items| {
            let parts: Result<Vec<String>, Error> = items
                .iter()
                .map(|v| match v {
                    toml::Value::Integer(i) => Ok(i.to_string()),
                    toml::Value::Float(f) => Ok(f.to_string()),
                    toml::Value::String(s) => Ok(s.clone()),
                    other => Err(Error::Usage(format!("time_grid entry {other} is not a number"))),
                })
                .collect();
            parts.map(|p| p.join(","))
        })
    }
}

/// Resolves one setting with flag > file > default precedence.
struct Resolver {
    log: Vec<String>,
}

impl Resolver {
    fn pick<T: std::fmt::Debug>(&mut self, key: &str, flag: Option<T>, file: Option<T>, default: T) -> T {
        let (v, from) = match (flag, file) {
            (Some(v), _) => (v, "flag"),
            (None, Some(v)) => (v, "config"),
            (None, None) => (default, "default"),
        };
        self.log.push(format!("{key} = {v:?} ({from})"));
        v
    }

    fn flush(&self, verbose: bool) {
        if verbose {
            for l in &self.log {
                eprintln!("rtc: {l}");
            }
        }
    }
}

pub fn parse_time_grid(s: &str) -> Result<Vec<Rational>, Error> {
    let grid: Option<Vec<Rational>> = s.split(',').map(|x| parse_rational(x.trim())).collect();
    grid.filter(|g| !g.is_empty()).ok_or_else(|| Error::Usage(format!("--time-grid: cannot parse `{s}`")))
}

pub fn parse_lemma(text: &str, index: usize) -> Result<Property, Error> {
    // `name: expr` unless the colon belongs to the expression
    if let Some((name, body)) = text.split_once(':') {
        let name = name.trim();
        if !name.is_empty() && name.chars().all(|c| c.is_alphanumeric() || c == '_' || c == ' ') {
            return Ok(Property::new(name.to_string(), parse_expr(body)?));
        }
    }
    Ok(Property::new(format!("lemma{}", index + 1), parse_expr(text)?))
}

fn parse_order(s: &str) -> Vec<String> {
    s.split(',').map(|x| x.trim().to_string()).filter(|x| !x.is_empty()).collect()
}

fn read_source(path: &Path) -> Result<Source, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
    })?;
    Ok(parse_source(&text)?)
}

/// Effective settings of `rtc check`.
#[derive(Debug)]
pub struct RunConfig {
    pub file: PathBuf,
    pub engine: EngineConfig,
    pub rule: AssumptionRule,
    pub order: Option<Vec<String>>,
    pub format: Format,
}

impl RunConfig {
    pub fn resolve(a: &CheckArgs) -> Result<RunConfig, Error> {
        let (file, cfg_path) = FileConfig::load(a.common.config.as_deref())?;
        let mut r = Resolver { log: vec![] };
        if let Some(p) = &cfg_path {
            r.log.push(format!("config file {}", p.display()));
        }
        let e = &a.engine;
        let engine_name = r.pick("engine", e.engine.clone(), file.engine.clone(), "kind".to_string());
        let engine = Engine::from_name(&engine_name)
            .ok_or_else(|| Error::Usage(format!("unknown engine `{engine_name}`; expected explicit, bmc or kind")))?;
        let k = r.pick("k", e.k, file.k, 8);
        if k == 0 {
            return Err(Error::Usage("-k must be at least 1".into()));
        }
        let solver_path = r.pick("solver", e.solver.clone(), file.solver.clone(), SolverConfig::default().path);
        let grid_text = r.pick("time_grid", e.time_grid.clone(), file.time_grid_text().transpose()?, "5,10".into());
        let horizon = r.pick("horizon", e.horizon, file.horizon, 5);
        let format = r.pick("format", a.common.format, file.format, Format::Human);
        let weak = r.pick("unsafe_weak_assumptions", a.weak.then_some(true), file.unsafe_weak_assumptions, false);
        let order = r.pick("order", a.order.as_deref().map(parse_order), file.order.clone().map(Some).unwrap_or(None), vec![]);
        let lemma_texts = r.pick(
            "lemmas",
            (!e.lemmas.is_empty()).then(|| e.lemmas.clone()),
            file.lemmas.clone(),
            vec![],
        );
        r.flush(a.common.verbose);

        let lemmas = lemma_texts.iter().enumerate().map(|(i, t)| parse_lemma(t, i)).collect::<Result<Vec<_>, _>>()?;
        let mut solver = SolverConfig::with_path(solver_path);
        if let Some(s) = file.solver_timeout_secs {
            solver.timeout = Duration::from_secs(s);
        }
        let domain = EnumerationDomain { horizon, time_grid: parse_time_grid(&grid_text)?, ..Default::default() };
        domain.validate().map_err(|e| Error::Usage(e.to_string()))?;
        Ok(RunConfig {
            file: a.file.clone(),
            engine: EngineConfig { engine, k, solver, domain, restrict_smt: false, lemmas },
            rule: if weak { AssumptionRule::Weak } else { AssumptionRule::Ordered },
            order: (!order.is_empty()).then_some(order),
            format,
        })
    }
}

/// One row of the report.
#[derive(Clone, Debug)]
pub struct Row {
    pub name: String,
    pub kind: String,
    pub formula: Option<u8>,
    pub component: Option<String>,
    pub property: String,
    pub result: Result<CheckResult, String>,
}

impl Row {
    pub fn verdict_name(&self) -> &'static str {
        match &self.result {
            Ok(r) => r.verdict.name(),
            Err(_) => "error",
        }
    }

    pub fn to_json(&self) -> Json {
        let (k, step, cex, wall, diag) = match &self.result {
            Ok(r) => {
                let (k, step, cex) = match &r.verdict {
                    Verdict::Proved { k } => (Some(*k), None, None),
                    Verdict::Falsified { trace, step } => (None, Some(*step), Some(trace.to_json())),
                    Verdict::Unknown { bound, .. } => (Some(*bound), None, None),
                };
                let diag = match &r.verdict {
                    Verdict::Unknown { reason, .. } => Some(reason.clone()),
                    _ => r.diagnostic.clone(),
                };
                (k, step, cex, r.wall_ms, diag)
            }
            Err(e) => (None, None, None, 0, Some(e.clone())),
        };
        json!({
            "name": self.name,
            "kind": self.kind,
            "formula": self.formula,
            "component": self.component,
            "property": self.property,
            "verdict": self.verdict_name(),
            "k": k,
            "step": step,
            "counterexample": cex,
            "wall_ms": wall,
            "diagnostic": diag,
        })
    }
}

/// Exit status from the verdict multiset.
pub fn exit_code(rows: &[Row]) -> i32 {
    let has = |v: &str| rows.iter().any(|r| r.verdict_name() == v);
    if has("error") {
        EXIT_ERROR
    } else if has("falsified") {
        EXIT_FALSIFIED
    } else if has("unknown") {
        EXIT_UNKNOWN
    } else {
        EXIT_PROVED
    }
}

fn program_obligations(p: &SpecProgram) -> Vec<Obligation> {
    p.properties
        .iter()
        .map(|prop| Obligation {
            name: prop.name.clone(),
            kind: ObligationKind::TopInvariant,
            formula: 0,
            component: String::new(),
            program: p.clone(),
            property: prop.expr.clone(),
        })
        .collect()
}

/// Generates and discharges the obligations of `cfg.file`.
pub fn run_check(cfg: &RunConfig) -> Result<Vec<Row>, Error> {
    let rows = check_source(read_source(&cfg.file)?, &cfg.engine, cfg.rule, cfg.order.as_deref())?;
    if rows.is_empty() {
        return Err(Error::Usage(format!("{}: nothing to check", cfg.file.display())));
    }
    Ok(rows)
}

/// Every property of a program, or every obligation of a system, discharged
/// with `engine`.
pub fn check_source(src: Source, engine: &EngineConfig, rule: AssumptionRule, order: Option<&[String]>) -> Result<Vec<Row>, Error> {
    let (obligations, is_program) = match src {
        Source::Program(ps) => (program_obligations(&ps.elaborate()?), true),
        Source::System(sys) => (gen_all_obligations(&sys, rule, order)?, false),
    };
    Ok(discharge(obligations, engine)
        .into_iter()
        .map(|d| {
            let ob = d.obligation;
            Row {
                name: ob.name,
                kind: if is_program { "property".into() } else { ob.kind.name().into() },
                formula: (!is_program).then_some(ob.formula),
                component: (!is_program).then_some(ob.component),
                property: ob.property.to_string(),
                result: d.result.map_err(|e| e.to_string()),
            }
        })
        .collect())
}

pub fn report_json(cfg: &RunConfig, rows: &[Row]) -> Json {
    let count = |v: &str| rows.iter().filter(|r| r.verdict_name() == v).count();
    json!({
        "tool": "rtc",
        "version": env!("CARGO_PKG_VERSION"),
        "command": "check",
        "file": cfg.file.display().to_string(),
        "engine": cfg.engine.engine.name(),
        "k": cfg.engine.k,
        "rule": match cfg.rule { AssumptionRule::Weak => "weak", AssumptionRule::Strong => "strong", AssumptionRule::Ordered => "ordered" },
        "order": cfg.order,
        "obligations": rows.iter().map(Row::to_json).collect::<Vec<_>>(),
        "summary": {
            "total": rows.len(),
            "proved": count("proved"),
            "falsified": count("falsified"),
            "unknown": count("unknown"),
            "error": count("error"),
        },
        "exit_code": exit_code(rows),
    })
}

pub fn trace_table(tr: &TimedTrace) -> String {
    let mut out = String::new();
    for i in 1..=tr.len() {
        let cells: Vec<String> = tr.vars().iter().map(|d| format!("{}={}", d.name, tr.get(&d.name, i).unwrap())).collect();
        let _ = writeln!(out, "    {i:>3}  t={}  {}", crate::print::const_text(&crate::value::Value::Real(tr.time(i).clone())), cells.join(" "));
    }
    out
}

pub fn report_human(rows: &[Row]) -> String {
    let mut out = String::new();
    let width = rows.iter().map(|r| r.name.len()).max().unwrap_or(0);
    for r in rows {
        let detail = match &r.result {
            Ok(res) => {
                let what = match &res.verdict {
                    Verdict::Proved { k } if res.engine == Engine::Kind => format!("proved (k = {k})"),
                    Verdict::Proved { k } => format!("no violation within {k} steps"),
                    Verdict::Falsified { step, .. } => format!("falsified at step {step}"),
                    Verdict::Unknown { bound, reason } => format!("unknown at bound {bound}: {reason}"),
                };
                let mut s = format!("{what} [{}, {} ms]", res.engine.name(), res.wall_ms);
                let repeated = matches!(&res.verdict, Verdict::Unknown { reason, .. } if Some(reason) == res.diagnostic.as_ref());
                if let Some(d) = res.diagnostic.as_ref().filter(|_| !repeated) {
                    let _ = write!(s, "; {d}");
                }
                s
            }
            Err(e) => format!("error: {e}"),
        };
        let _ = writeln!(out, "{:<width$}  {detail}", r.name);
        if let Ok(CheckResult { verdict: Verdict::Falsified { trace, .. }, .. }) = &r.result {
            out.push_str(&trace_table(trace));
        }
    }
    let count = |v: &str| rows.iter().filter(|r| r.verdict_name() == v).count();
    let _ = writeln!(
        out,
        "{} obligation(s): {} proved, {} falsified, {} unknown, {} error",
        rows.len(),
        count("proved"),
        count("falsified"),
        count("unknown"),
        count("error")
    );
    out
}

fn cmd_check(a: &CheckArgs) -> Result<i32, Error> {
    let cfg = RunConfig::resolve(a)?;
    let rows = run_check(&cfg)?;
    match cfg.format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&report_json(&cfg, &rows)).unwrap()),
        Format::Human => print!("{}", report_human(&rows)),
    }
    Ok(exit_code(&rows))
}

fn cmd_simulate(a: &SimulateArgs) -> Result<i32, Error> {
    let p = match read_source(&a.file)? {
        Source::Program(ps) => ps.elaborate()?,
        Source::System(sys) => compose_monolithic(&sys)?.0,
    };
    let supplied = match &a.trace {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            let v: Json = serde_json::from_str(&text).map_err(|e| Error::Usage(format!("{}: {e}", path.display())))?;
            Some(TimedTrace::from_json(&v).map_err(|e| Error::Usage(format!("{}: {e}", path.display())))?)
        }
        None => None,
    };
    let complete = supplied.as_ref().is_some_and(|tr| p.vars.iter().all(|d| tr.has_var(&d.name)));
    let json_out = a.common.format == Some(Format::Json);
    if complete {
        let tr = supplied.unwrap();
        return match trace_admissible(&p, &tr) {
            Ok(()) => {
                if json_out {
                    println!("{}", json!({"admissible": true, "trace": tr.to_json()}));
                } else {
                    println!("admissible: {} step(s)", tr.len());
                }
                Ok(0)
            }
            Err(v) => {
                if json_out {
                    println!("{}", json!({"admissible": false, "step": v.step, "constraint": v.constraint, "detail": v.detail}));
                } else {
                    println!("inadmissible: {v}");
                }
                Ok(EXIT_FALSIFIED)
            }
        };
    }
    let mut dom = EnumerationDomain { horizon: a.steps.max(1), ..Default::default() };
    if let Some(g) = &a.time_grid {
        dom.time_grid = parse_time_grid(g)?;
    }
    if let Some(tr) = supplied {
        if tr.len() < dom.horizon {
            return Err(Error::Usage(format!("supplied inputs cover {} step(s), {} requested", tr.len(), dom.horizon)));
        }
        dom.pinned = Some(tr);
    }
    match first_trace(&p, &dom).map_err(check_err)? {
        Ok(tr) => {
            println!("{}", serde_json::to_string_pretty(&tr.to_json()).unwrap());
            Ok(0)
        }
        Err(reached) => {
            let msg = format!("no admissible step {} after {reached} step(s) (calendar exhausted or constraints unsatisfiable)", reached + 1);
            if json_out {
                println!("{}", json!({"admissible": false, "step": reached + 1, "constraint": "calendar", "detail": msg}));
            } else {
                println!("{msg}");
            }
            Ok(EXIT_FALSIFIED)
        }
    }
}

fn obligation_text(ob: &Obligation) -> String {
    let mut out = format!(
        "// {} ({}, formula {}, component {})\n",
        ob.name,
        ob.kind.name(),
        ob.formula,
        ob.component
    );
    let mut p = ob.program.clone();
    p.properties = vec![Property::new(ob.name.clone(), ob.property.clone())];
    out.push_str(&program_to_string(&p));
    out
}

fn cmd_compose(a: &ComposeArgs) -> Result<i32, Error> {
    let Source::System(sys) = read_source(&a.file)? else {
        return Err(Error::Usage(format!("{}: no components to compose", a.file.display())));
    };
    if a.monolithic {
        let (mut p, prop) = compose_monolithic(&sys)?;
        p.properties = vec![Property::new(sys.top.name.clone(), prop)];
        print!("{}", program_to_string(&p));
        return Ok(0);
    }
    let rule = if a.weak { AssumptionRule::Weak } else { AssumptionRule::Ordered };
    let order = a.order.as_deref().map(parse_order);
    let obs = gen_all_obligations(&sys, rule, order.as_deref())?;
    let json_out = a.common.format == Some(Format::Json);
    if json_out {
        let items: Vec<Json> = obs
            .iter()
            .map(|o| json!({"name": o.name, "kind": o.kind.name(), "formula": o.formula, "component": o.component, "program": obligation_text(o)}))
            .collect();
        println!("{}", serde_json::to_string_pretty(&items).unwrap());
    } else {
        let texts: Vec<String> = obs.iter().map(obligation_text).collect();
        print!("{}", texts.join("\n"));
    }
    Ok(0)
}

/// A host declaring each variable the pattern reads as a boolean.
pub fn pattern_host(pat: &Pattern) -> SpecProgram {
    let mut p = SpecProgram::default();
    for e in pat.exprs() {
        for v in e.vars() {
            if v != crate::ast::TIME_VAR && !p.vars.iter().any(|d| d.name == v) {
                p.vars.push(crate::ast::VarDecl::new(v, crate::ast::TypeTag::Bool));
            }
        }
    }
    p
}

fn cmd_emit(a: &EmitArgs) -> Result<i32, Error> {
    let lowering = match a.mode {
        EmitMode::Observer => Some(LoweringMode::PropertyObserver),
        EmitMode::Constraint => Some(LoweringMode::Constraint),
        EmitMode::Sidecondition => Some(LoweringMode::PropSideCondition),
        _ => None,
    };
    if let Some(text) = &a.pattern {
        let pat = parse_pattern(text)?;
        let Some(mode) = lowering else {
            return Err(Error::Usage("--pattern needs --mode observer, constraint or sidecondition".into()));
        };
        let bundle = lower_observer(&pat, &pattern_host(&pat), mode, None)?;
        print!("{}", bundle.to_text());
        return Ok(0);
    }
    let Some(file) = &a.file else {
        return Err(Error::Usage("emit needs a file or --pattern".into()));
    };
    let p = match read_source(file)? {
        Source::Program(ps) => ps.elaborate()?,
        Source::System(sys) => {
            let (mut p, prop) = compose_monolithic(&sys)?;
            p.properties = vec![Property::new(sys.top.name.clone(), prop)];
            p
        }
    };
    match a.mode {
        EmitMode::Core => print!("{}", program_to_string(&p)),
        EmitMode::Smt => {
            let prop = match &a.property {
                Some(n) => p.properties.iter().find(|q| &q.name == n).ok_or_else(|| Error::Usage(format!("no property {}", quote(n))))?,
                None => p.properties.first().ok_or_else(|| Error::Usage("program has no property".into()))?,
            };
            let mode = match Engine::from_name(&a.engine) {
                Some(Engine::Bmc) => SmtMode::Bmc(a.k),
                Some(Engine::Kind) => SmtMode::KInduction(a.k),
                _ => return Err(Error::Usage(format!("--engine for smt scripts is bmc or kind, not `{}`", a.engine))),
            };
            print!("{}", emit_smtlib(&p, &prop.expr, mode).map_err(check_err)?);
        }
        _ => {
            return Err(Error::Usage("file lowering modes are core and smt; use --pattern for a single lowering".into()))
        }
    }
    Ok(0)
}

fn cmd_oracle(a: &OracleArgs) -> Result<i32, Error> {
    let (file, _) = FileConfig::load(a.common.config.as_deref())?;
    let mut r = Resolver { log: vec![] };
    let seed = r.pick("seed", a.seed, file.seed, 2024);
    let horizon = r.pick("horizon", a.horizon, file.horizon, 5);
    let grid = r.pick("time_grid", a.time_grid.clone(), file.time_grid_text().transpose()?, "5,10".into());
    r.flush(a.common.verbose);
    let cfg = SuiteConfig { horizon, time_grid: parse_time_grid(&grid)?, ..Default::default() };
    let want = |s: Suite| a.suite == Suite::All || a.suite == s;
    let mut reports: Vec<SuiteReport> = vec![];
    if want(Suite::Observer) {
        reports.push(observer_suite(&cfg).map_err(check_err)?);
    }
    if want(Suite::Constraint) {
        reports.push(constraint_suite(&cfg).map_err(check_err)?);
    }
    if want(Suite::PatternInConstraint) {
        reports.push(pattern_in_constraint_suite(seed, a.cases).map_err(check_err)?);
    }
    if want(Suite::ConstraintInPattern) {
        reports.push(constraint_in_pattern_suite(seed, a.cases).map_err(check_err)?);
    }
    if a.common.format == Some(Format::Json) {
        println!("{}", serde_json::to_string_pretty(&json!({"seed": seed, "suites": reports})).unwrap());
    } else {
        println!("seed {seed}");
        for s in &reports {
            let status = if s.passed() { "ok" } else { "FAILED" };
            println!("{:<10} {status}  {} case(s), {} discrepancy(ies), {} ms", s.suite, s.cases, s.discrepancies.len(), s.wall_ms);
            for d in s.discrepancies.iter().take(10) {
                println!("    {d}");
            }
        }
    }
    Ok(if reports.iter().all(SuiteReport::passed) { 0 } else { EXIT_FALSIFIED })
}

fn check_err(e: CheckError) -> Error {
    Error::from(e)
}

pub fn run(cli: &Cli) -> Result<i32, Error> {
    match &cli.command {
        Command::Check(a) => cmd_check(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Compose(a) => cmd_compose(a),
        Command::Emit(a) => cmd_emit(a),
        Command::Oracle(a) => cmd_oracle(a),
    }
}

pub fn main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { 0 };
        }
    };
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("rtc: {e}");
            match e {
                Error::Usage(_) => EXIT_USAGE,
                _ => EXIT_ERROR,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lemma_flags() {
        let l = parse_lemma("gap: x >= 0", 0).unwrap();
        assert_eq!(l.name, "gap");
        let l = parse_lemma("x >= 0", 2).unwrap();
        assert_eq!(l.name, "lemma3");
    }

    #[test]
    fn time_grid_flags() {
        assert_eq!(parse_time_grid("5, 10, 2.5").unwrap().len(), 3);
        assert!(parse_time_grid("5,x").is_err());
    }

    #[test]
    fn exit_codes_follow_verdicts() {
        let row = |v: Result<Verdict, String>| Row {
            name: "p".into(),
            kind: "property".into(),
            formula: None,
            component: None,
            property: "true".into(),
            result: v.map(|verdict| CheckResult { verdict, engine: Engine::Bmc, wall_ms: 0, diagnostic: None }),
        };
        let proved = row(Ok(Verdict::Proved { k: 1 }));
        let unknown = row(Ok(Verdict::Unknown { bound: 1, reason: "r".into() }));
        let falsified = row(Ok(Verdict::Falsified { trace: TimedTrace::new(vec![]), step: 1 }));
        assert_eq!(exit_code(std::slice::from_ref(&proved)), 0);
        assert_eq!(exit_code(&[proved.clone(), unknown.clone()]), 2);
        assert_eq!(exit_code(&[unknown, falsified]), 1);
        assert_eq!(exit_code(&[proved, row(Err("boom".into()))]), 3);
    }
}
