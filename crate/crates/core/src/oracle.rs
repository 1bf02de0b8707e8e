//! Desk-scale equivalence suites between the pattern lowerings and the
//! direct trace-set definitions.

use std::collections::BTreeSet;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::ast::{Expr, TypeTag, VarDecl};
use crate::check::{check_invariant_explicit, enumerate_traces_observing, CheckError, EnumerationDomain, Verdict};
use crate::parser::parse_program;
use crate::pattern::{
    compile_constraint, compile_prop_side_condition, compile_property_observer, membership_prop_cons, pattern_membership,
    Interval, Pattern,
};
use crate::semantics::TimedTrace;
use crate::value::{rat, Rational, Value};

/// Host programs over the two free signals `c` and `e`.
pub const HOSTS: &[(&str, &str)] = &[
    ("free", "c, e : bool;"),
    ("disjoint", "c, e : bool; not (c and e);"),
    ("echo", "c, e : bool; e = (false -> pre(c));"),
    ("no effect", "c, e : bool; not e;"),
    ("single cause", "c, e : bool; c = (true -> false);"),
    ("held effect", "c, e : bool; e = (false -> pre(c) or pre(e));"),
    ("effect after a cause", "c, e, seen : bool; seen = (c or (false -> pre(seen))); e => (false -> pre(seen));"),
    ("sparse cause", "c, e : bool; assert c occurs sporadic with IAT 15.0;"),
];

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub cases: u64,
    pub discrepancies: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub wall_ms: u64,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.discrepancies.is_empty()
    }
}

#[derive(Clone, Debug)]
pub struct SuiteConfig {
    pub horizon: usize,
    pub time_grid: Vec<Rational>,
    pub window: Interval,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            horizon: 5,
            time_grid: vec![rat(5, 1), rat(10, 1)],
            window: Interval::closed(rat(10, 1), rat(20, 1)).unwrap(),
        }
    }
}

impl SuiteConfig {
    fn pattern(&self) -> Pattern {
        Pattern::WheneverEventEvent { cause: Expr::var("c"), effect: Expr::var("e"), iv: self.window.clone(), exclusive: false }
    }

    fn domain(&self) -> EnumerationDomain {
        EnumerationDomain { horizon: self.horizon, time_grid: self.time_grid.clone(), ..Default::default() }
    }
}

fn host_signals() -> Vec<String> {
    vec!["c".into(), "e".into()]
}

fn key(tr: &TimedTrace) -> String {
    tr.project(&host_signals()).to_json().to_string()
}

fn describe(tr: &TimedTrace) -> String {
    let mut out = vec![];
    for i in 1..=tr.len() {
        let on: Vec<&str> = ["c", "e"].into_iter().filter(|v| tr.get(v, i) == Some(Value::Bool(true))).collect();
        out.push(format!("{}:{}", tr.time(i), on.join("+")));
    }
    out.join(" ")
}

/// Every admissible host trace is in the pattern's trace set exactly when
/// the observer's `pass` is invariant over all its extensions; and the
/// same holds for the host as a whole.
pub fn observer_suite(cfg: &SuiteConfig) -> Result<SuiteReport, CheckError> {
    let start = Instant::now();
    let pat = cfg.pattern();
    let dom = cfg.domain();
    let t = Expr::time();
    let mut cases = 0u64;
    let mut discrepancies = vec![];
    for (name, src) in HOSTS {
        let host = parse_program(src).map_err(|e| CheckError::Internal(e.to_string()))?;
        let obs = compile_property_observer(&pat, &host, Some("obs")).map_err(|e| CheckError::Internal(e.to_string()))?;
        let mut m = host.clone();
        obs.install(&mut m, "observer");
        let pass = obs.property.clone().expect("observer property");

        let traces = enumerate_traces_observing(&host, &dom, &[&t])?;
        let per_trace: Vec<Result<Option<String>, CheckError>> = traces
            .par_iter()
            .map(|tr| {
                let member = pattern_membership(&pat, tr)?.is_member();
                let holds = matches!(
                    check_invariant_explicit(&m, &pass, &EnumerationDomain::pinned_to(tr))?.verdict,
                    Verdict::Proved { .. }
                );
                Ok((member != holds).then(|| format!("{name}: {} member={member} pass={holds}", describe(tr))))
            })
            .collect();
        let mut all_member = true;
        for (tr, r) in traces.iter().zip(per_trace) {
            cases += 1;
            if let Some(d) = r? {
                discrepancies.push(d);
            }
            all_member &= pattern_membership(&pat, tr)?.is_member();
        }
        let holds = matches!(check_invariant_explicit(&m, &pass, &dom)?.verdict, Verdict::Proved { .. });
        cases += 1;
        if holds != all_member {
            discrepancies.push(format!("{name}: host-level pass={holds}, all traces member={all_member}"));
        }
    }
    Ok(SuiteReport { suite: "observer".into(), cases, discrepancies, seed: None, wall_ms: start.elapsed().as_millis() as u64 })
}

/// On hosts whose traces all satisfy the non-overlap side condition, the
/// constraint lowering admits exactly the traces in the pattern's set.
pub fn constraint_suite(cfg: &SuiteConfig) -> Result<SuiteReport, CheckError> {
    let start = Instant::now();
    let pat = cfg.pattern();
    let dom = cfg.domain();
    let t = Expr::time();
    let internal = |e: crate::pattern::PatternError| CheckError::Internal(e.to_string());
    let mut cases = 0u64;
    let mut discrepancies = vec![];
    for (name, src) in HOSTS {
        let host = parse_program(src).map_err(|e| CheckError::Internal(e.to_string()))?;
        // restrict the host to the side condition
        let side = compile_prop_side_condition(&pat, &host, Some("prop")).map_err(internal)?;
        let mut hp = host.clone();
        side.install(&mut hp, "prop");
        hp.assert(side.property.clone().expect("side condition property"));

        let base = enumerate_traces_observing(&hp, &dom, &[&t])?;
        let mut filtered = BTreeSet::new();
        for tr in &base {
            cases += 1;
            let pc = membership_prop_cons(&pat, tr)?;
            if !pc.prop.is_member() {
                discrepancies.push(format!("{name}: restricted host admits {} outside the side condition", describe(tr)));
            }
            if pattern_membership(&pat, tr)?.is_member() {
                filtered.insert(key(tr));
            }
        }

        let cons = compile_constraint(&pat, &hp, Some("cons")).map_err(internal)?;
        let mut hc = hp.clone();
        cons.install(&mut hc, "cons");
        let constrained: BTreeSet<String> = enumerate_traces_observing(&hc, &dom, &[&t])?.iter().map(key).collect();

        for k in constrained.symmetric_difference(&filtered) {
            let side = if constrained.contains(k) { "only under the constraint" } else { "only in the pattern set" };
            discrepancies.push(format!("{name}: {k} {side}"));
        }
    }
    Ok(SuiteReport { suite: "constraint".into(), cases, discrepancies, seed: None, wall_ms: start.elapsed().as_millis() as u64 })
}

fn random_trace(rng: &mut ChaCha8Rng) -> TimedTrace {
    let mut tr = TimedTrace::new(vec![VarDecl::new("c", TypeTag::Bool), VarDecl::new("e", TypeTag::Bool)]);
    let len = rng.gen_range(1..=10);
    let mut time = Rational::from_integer(0.into());
    for i in 0..len {
        if i > 0 {
            time += rat(rng.gen_range(1..=24), 2);
        }
        tr.push(time.clone(), vec![Value::Bool(rng.gen_bool(0.4)), Value::Bool(rng.gen_bool(0.4))]);
    }
    tr
}

fn random_window(rng: &mut ChaCha8Rng) -> Interval {
    let low = rat(rng.gen_range(0..=4) * 5, 1);
    let high = &low + rat(rng.gen_range(0..=3) * 5, 1);
    let point = low == high;
    let (lc, hc) = if point { (true, true) } else { (rng.gen_bool(0.7), rng.gen_bool(0.7)) };
    Interval::new(low, high, lc, hc).expect("valid window")
}

fn random_suite(
    name: &str,
    seed: u64,
    n: u64,
    check: impl Fn(&Pattern, &TimedTrace) -> Result<Option<String>, CheckError>,
) -> Result<SuiteReport, CheckError> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut discrepancies = vec![];
    for _ in 0..n {
        let iv = random_window(&mut rng);
        let tr = random_trace(&mut rng);
        let pat = Pattern::WheneverEventEvent { cause: Expr::var("c"), effect: Expr::var("e"), iv, exclusive: false };
        if let Some(d) = check(&pat, &tr)? {
            discrepancies.push(format!("{pat}: {} {d}", describe(&tr)));
        }
    }
    Ok(SuiteReport { suite: name.into(), cases: n, discrepancies, seed: Some(seed), wall_ms: start.elapsed().as_millis() as u64 })
}

/// Every member of the pattern set is a member of the constraint set.
pub fn pattern_in_constraint_suite(seed: u64, n: u64) -> Result<SuiteReport, CheckError> {
    random_suite("pattern-in-constraint", seed, n, |pat, tr| {
        let patt = pattern_membership(pat, tr)?;
        let cons = membership_prop_cons(pat, tr)?.cons;
        Ok((patt.is_member() && !cons.is_member()).then(|| format!("patt={patt:?} cons={cons:?}")))
    })
}

/// Under the side condition, every member of the constraint set is a
/// member of the pattern set.
pub fn constraint_in_pattern_suite(seed: u64, n: u64) -> Result<SuiteReport, CheckError> {
    random_suite("constraint-in-pattern", seed, n, |pat, tr| {
        let pc = membership_prop_cons(pat, tr)?;
        let patt = pattern_membership(pat, tr)?;
        Ok((pc.prop.is_member() && pc.cons.is_member() && !patt.is_member()).then(|| format!("cons={:?} patt={patt:?}", pc.cons)))
    })
}

/// Random well-formed programs over two booleans, an integer and an
/// optional timeout, written in the surface syntax.
pub struct ProgramGen {
    rng: ChaCha8Rng,
}

const BOOLS: [&str; 2] = ["b0", "b1"];

impl ProgramGen {
    pub fn new(seed: u64) -> Self {
        ProgramGen { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    /// `current` lists the variables whose current value may be read.
    fn bool_expr(&mut self, depth: u32, current: &[&str]) -> String {
        let bools: Vec<&str> = current.iter().copied().filter(|v| v.starts_with('b')).collect();
        let leaf = depth == 0 || self.rng.gen_bool(0.3);
        if leaf {
            return match self.rng.gen_range(0..5) {
                0 => ["true", "false"][self.rng.gen_range(0..2)].to_string(),
                1 | 2 if !bools.is_empty() => bools[self.rng.gen_range(0..bools.len())].to_string(),
                3 => format!("(false -> pre({}))", BOOLS[self.rng.gen_range(0..2)]),
                _ => {
                    let op = ["<", "<=", "=", ">=", ">"][self.rng.gen_range(0..5)];
                    format!("({} {op} {})", self.int_expr(0, current), self.rng.gen_range(-1..=3))
                }
            };
        }
        match self.rng.gen_range(0..6) {
            0 => format!("(not {})", self.bool_expr(depth - 1, current)),
            1 => format!("({} and {})", self.bool_expr(depth - 1, current), self.bool_expr(depth - 1, current)),
            2 => format!("({} or {})", self.bool_expr(depth - 1, current), self.bool_expr(depth - 1, current)),
            3 => format!("({} => {})", self.bool_expr(depth - 1, current), self.bool_expr(depth - 1, current)),
            4 => format!("({} -> pre({}))", self.bool_expr(depth - 1, current), self.bool_expr(depth - 1, &["b0", "b1", "i0"])),
            _ => {
                let (a, b) = (self.int_expr(depth - 1, current), self.int_expr(depth - 1, current));
                match self.rng.gen_range(0..4) {
                    0 => format!("({a} < {b})"),
                    1 => format!("({a} <= {b})"),
                    2 => format!("({a} = {b})"),
                    _ => format!("(not ({a} = {b}))"),
                }
            }
        }
    }

    fn int_expr(&mut self, depth: u32, current: &[&str]) -> String {
        let leaf = depth == 0 || self.rng.gen_bool(0.35);
        if leaf {
            return match self.rng.gen_range(0..3) {
                0 if current.contains(&"i0") => "i0".to_string(),
                1 => "(0 -> pre(i0))".to_string(),
                _ => self.rng.gen_range(-1..=2).to_string(),
            };
        }
        match self.rng.gen_range(0..4) {
            0 => format!("({} + {})", self.int_expr(depth - 1, current), self.int_expr(depth - 1, current)),
            1 => format!("({} - {})", self.int_expr(depth - 1, current), self.int_expr(depth - 1, current)),
            2 => format!(
                "ite({}, {}, {})",
                self.bool_expr(depth - 1, current),
                self.int_expr(depth - 1, current),
                self.int_expr(depth - 1, current)
            ),
            _ => format!("({} -> pre({}) + {})", self.int_expr(0, current), self.int_expr(depth - 1, &["b0", "b1", "i0"]), self.rng.gen_range(0..=1)),
        }
    }

    /// Program text and property text.
    pub fn next_pair(&mut self) -> (String, String) {
        let mut src = String::from("b0, b1 : bool;\ni0 : int;\n");
        let timed = self.rng.gen_bool(0.3);
        let mut current: Vec<&str> = vec![];
        // each variable is free or defined from those before it
        for v in ["b0", "i0", "b1"] {
            if self.rng.gen_bool(0.5) {
                let rhs = if v.starts_with('b') { self.bool_expr(2, &current) } else { self.int_expr(2, &current) };
                src.push_str(&format!("{v} = {rhs};\n"));
            }
            current.push(v);
        }
        if timed {
            let gap = ["5.0", "10.0"][self.rng.gen_range(0..2)];
            src.push_str(&format!("d : real;\ntimeout d;\nd = (5.0 -> ite(b0, pre(d) + {gap}, pre(d) + 5.0));\n"));
        }
        if self.rng.gen_bool(0.4) {
            src.push_str(&format!("{};\n", self.bool_expr(2, &current)));
        }
        let body = if self.rng.gen_bool(0.2) {
            let lim = ["10.0", "15.0", "25.0"][self.rng.gen_range(0..3)];
            format!("(t <= {lim} or {})", self.bool_expr(1, &current))
        } else {
            self.bool_expr(3, &current)
        };
        let prop = if self.rng.gen_bool(0.25) { format!("hist({}) => {body}", self.bool_expr(1, &current)) } else { body };
        (src, prop)
    }
}

fn smt_cfg(engine: crate::check::Engine, dom: &EnumerationDomain, solver: &crate::check::SolverConfig) -> crate::check::EngineConfig {
    crate::check::EngineConfig {
        engine,
        k: dom.horizon,
        solver: solver.clone(),
        domain: dom.clone(),
        restrict_smt: true,
        lemmas: vec![],
    }
}

/// Explicit enumeration against BMC and k-induction on `n` random
/// programs, with the SMT engines confined to the enumeration domain.
/// Every counterexample is replayed through the trace semantics.
pub fn engine_agreement_suite(seed: u64, n: u64, horizon: usize, solver: &crate::check::SolverConfig) -> Result<SuiteReport, CheckError> {
    use crate::check::{run_engine, validate_counterexample, Engine};
    let start = Instant::now();
    let dom = EnumerationDomain { horizon, ..Default::default() };
    let mut gen = ProgramGen::new(seed);
    let pairs: Vec<(String, String)> = (0..n).map(|_| gen.next_pair()).collect();
    let results: Vec<Result<Vec<String>, CheckError>> = pairs
        .par_iter()
        .map(|(src, prop_text)| {
            let p = parse_program(src).map_err(|e| CheckError::Internal(format!("{e}\n{src}")))?;
            let prop = crate::parser::parse_expr(prop_text).map_err(|e| CheckError::Internal(e.to_string()))?;
            let ex = run_engine(&p, &prop, &crate::check::EngineConfig { engine: Engine::Explicit, domain: dom.clone(), ..Default::default() })?;
            let bmc = run_engine(&p, &prop, &smt_cfg(Engine::Bmc, &dom, solver))?;
            let kind = run_engine(&p, &prop, &smt_cfg(Engine::Kind, &dom, solver))?;
            let mut out = vec![];
            let tag = |what: String| format!("{what}\n--- program\n{src}--- property\n{prop_text}");
            for r in [&ex, &bmc, &kind] {
                if let Verdict::Falsified { trace, step } = &r.verdict {
                    if let Err(e) = validate_counterexample(&p, &prop, trace, *step) {
                        out.push(tag(format!("{} counterexample does not replay: {e}", r.engine.name())));
                    }
                }
            }
            let step_of = |v: &Verdict| match v {
                Verdict::Falsified { step, .. } => Some(*step),
                _ => None,
            };
            let (es, bs, ks) = (step_of(&ex.verdict), step_of(&bmc.verdict), step_of(&kind.verdict));
            if matches!(bmc.verdict, Verdict::Unknown { .. }) || es != bs {
                out.push(tag(format!("explicit {:?} vs bmc {:?}", ex.verdict.name(), bmc.verdict.name())));
            }
            let kind_conflict = match &kind.verdict {
                Verdict::Proved { .. } => es.is_some(),
                Verdict::Falsified { .. } => ks != es,
                Verdict::Unknown { .. } => false,
            };
            if kind_conflict {
                out.push(tag(format!("explicit {:?} vs kind {:?}", ex.verdict.name(), kind.verdict.name())));
            }
            Ok(out)
        })
        .collect();
    let mut discrepancies = vec![];
    for r in results {
        discrepancies.extend(r?);
    }
    Ok(SuiteReport { suite: "engine-agreement".into(), cases: n, discrepancies, seed: Some(seed), wall_ms: start.elapsed().as_millis() as u64 })
}
