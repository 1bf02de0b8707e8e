//! Verification engines: exhaustive enumeration over finite domains, and
//! bounded model checking and k-induction through an external SMT solver.

pub mod defs;
pub mod explicit;
pub mod smt;
pub mod solver;

use std::time::Instant;

use rayon::prelude::*;
use thiserror::Error;

use crate::ast::{BinOp, Expr, Property, SpecProgram};
use crate::compose::Obligation;
use crate::semantics::{check_invariant_on_trace, trace_admissible, EvalError, TimedTrace};
use crate::typeck::{check_property, type_check, TypeError};
use crate::wf::check_well_formed;

pub use explicit::{check_invariant_explicit, count_traces, enumerate_traces, enumerate_traces_observing, first_trace, EnumerationDomain};
pub use smt::{decode_counterexample, emit_smtlib, Encoder, SmtMode};
pub use solver::{parse_model, SatResult, Session, SolverConfig};

#[derive(Clone, Debug, PartialEq, Error)]
pub enum CheckError {
    #[error("enumeration ceiling of {ceiling} states exceeded (about {estimate:.3e} candidate states)")]
    DomainExplosion { ceiling: u64, estimate: f64 },
    #[error("invalid enumeration domain: {0}")]
    InvalidDomain(String),
    #[error(transparent)]
    Type(#[from] TypeError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("ill-formed property: `pre` not guarded by `->` at `{0}`")]
    IllFormed(String),
    #[error("unsupported by the SMT encoding: {0}")]
    Unsupported(String),
    #[error("solver: {0}")]
    Solver(String),
    #[error("internal error: {0}")]
    Internal(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Engine {
    Explicit,
    Bmc,
    Kind,
}

impl Engine {
    pub fn name(self) -> &'static str {
        match self {
            Engine::Explicit => "explicit",
            Engine::Bmc => "bmc",
            Engine::Kind => "kind",
        }
    }

    pub fn from_name(s: &str) -> Option<Engine> {
        match s {
            "explicit" => Some(Engine::Explicit),
            "bmc" => Some(Engine::Bmc),
            "kind" | "kinduction" | "k-induction" => Some(Engine::Kind),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    /// k-induction: proved outright. Explicit and BMC: no violation within
    /// `k` steps.
    Proved { k: usize },
    /// `trace` is admissible and the property fails at `step`.
    Falsified { trace: TimedTrace, step: usize },
    Unknown { bound: usize, reason: String },
}

impl Verdict {
    pub fn name(&self) -> &'static str {
        match self {
            Verdict::Proved { .. } => "proved",
            Verdict::Falsified { .. } => "falsified",
            Verdict::Unknown { .. } => "unknown",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckResult {
    pub verdict: Verdict,
    pub engine: Engine,
    pub wall_ms: u64,
    pub diagnostic: Option<String>,
}

impl CheckResult {
    pub fn new(verdict: Verdict, engine: Engine, start: Instant) -> Self {
        CheckResult { verdict, engine, wall_ms: start.elapsed().as_millis() as u64, diagnostic: None }
    }
}

#[derive(Clone, Debug)]
pub struct EngineConfig {
    pub engine: Engine,
    /// Unrolling depth for BMC, maximum induction depth for k-induction.
    pub k: usize,
    pub solver: SolverConfig,
    /// Used by the explicit engine, and by the SMT engines when
    /// `restrict_smt` is set.
    pub domain: EnumerationDomain,
    pub restrict_smt: bool,
    /// Extra invariants, each proved before being assumed.
    pub lemmas: Vec<Property>,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            engine: Engine::Kind,
            k: 8,
            solver: SolverConfig::default(),
            domain: EnumerationDomain::default(),
            restrict_smt: false,
            lemmas: vec![],
        }
    }
}

/// Re-checks a counterexample with the evaluator. Failure is an encoder bug.
pub fn validate_counterexample(p: &SpecProgram, prop: &Expr, tr: &TimedTrace, step: usize) -> Result<(), CheckError> {
    if let Err(v) = trace_admissible(p, tr) {
        return Err(CheckError::Internal(format!("decoded counterexample is not admissible: {v}")));
    }
    match check_invariant_on_trace(prop, tr)? {
        Some(s) if s == step => Ok(()),
        other => Err(CheckError::Internal(format!(
            "decoded counterexample should fail at step {step}, evaluator says {other:?}"
        ))),
    }
}

fn prepare(p: &SpecProgram, prop: &Expr) -> Result<(), CheckError> {
    let tp = type_check(p)?;
    check_property(&tp, prop, "property")?;
    if let Err(v) = check_well_formed(prop) {
        return Err(CheckError::IllFormed(v.expr.to_string()));
    }
    Ok(())
}

/// What the SMT engines check: `check` under the extra per-step
/// constraints `hyps`. `orig` is the property as stated, used to re-validate
/// counterexamples.
struct Goal {
    orig: Expr,
    check: Expr,
    hyps: Vec<Expr>,
}

fn conjuncts(e: &Expr, out: &mut Vec<Expr>) {
    match e {
        Expr::Binary(BinOp::And, a, b) => {
            conjuncts(a, out);
            conjuncts(b, out);
        }
        _ => out.push(e.clone()),
    }
}

impl Goal {
    /// `hist(A) and R => G` holds at every step iff `R => G` holds at every
    /// step of the program constrained by `A`: steps are checked on
    /// prefixes, and a prefix along which `A` always held is admissible
    /// under the constraint.
    fn new(prop: &Expr) -> Goal {
        let plain = Goal { orig: prop.clone(), check: prop.clone(), hyps: vec![] };
        let Expr::Binary(BinOp::Implies, lhs, rhs) = prop else { return plain };
        let mut parts = vec![];
        conjuncts(lhs, &mut parts);
        let (hist, rest): (Vec<Expr>, Vec<Expr>) = parts.into_iter().partition(|e| matches!(e, Expr::Hist(_)));
        if hist.is_empty() {
            return plain;
        }
        let hyps = hist
            .into_iter()
            .map(|h| match h {
                Expr::Hist(a) => *a,
                _ => unreachable!(),
            })
            .collect();
        let check = if rest.is_empty() { (**rhs).clone() } else { Expr::implies(Expr::conj(rest), (**rhs).clone()) };
        Goal { orig: prop.clone(), check, hyps }
    }
}

struct Bmc {
    session: Session,
    enc: Encoder,
    depth: usize,
}

impl Bmc {
    fn new(p: &SpecProgram, goal: &Goal, assumed: &[Expr], cfg: &EngineConfig) -> Result<Bmc, CheckError> {
        let mut enc = Encoder::new(p, false)?;
        goal.hyps.iter().chain(assumed).for_each(|a| enc.assume(a.clone()));
        if cfg.restrict_smt {
            enc.restrict_to(&cfg.domain, &goal.orig);
        }
        Ok(Bmc { session: Session::start(&cfg.solver)?, enc, depth: 0 })
    }

    /// Looks for a violation at exactly the next depth, all shorter ones
    /// having been excluded.
    fn next(&mut self, goal: &Goal) -> Result<Option<Verdict>, CheckError> {
        self.depth += 1;
        let n = self.depth;
        let text = self.enc.unroll_to(n)?;
        self.session.send(&text)?;
        let pn = self.enc.bool_at(&goal.check, n)?;
        let aux = self.enc.take();
        self.session.send(&aux)?;
        self.session.send(&format!("(push 1)\n(assert (not {pn}))\n"))?;
        match self.session.check_sat()? {
            SatResult::Unsat => {
                self.session.send(&format!("(pop 1)\n(assert {pn})\n"))?;
                Ok(None)
            }
            SatResult::Sat => {
                let model = parse_model(&self.session.get_model()?).map_err(CheckError::Solver)?;
                let trace = self.enc.decode(&model, n);
                validate_counterexample(self.enc.program(), &goal.orig, &trace, n)?;
                Ok(Some(Verdict::Falsified { trace, step: n }))
            }
            SatResult::Unknown(reason) => Ok(Some(Verdict::Unknown { bound: n - 1, reason })),
        }
    }
}

fn bmc(p: &SpecProgram, goal: &Goal, cfg: &EngineConfig) -> Result<Verdict, CheckError> {
    let mut b = Bmc::new(p, goal, &[], cfg)?;
    for _ in 1..=cfg.k {
        if let Some(v) = b.next(goal)? {
            return Ok(v);
        }
    }
    Ok(Verdict::Proved { k: cfg.k })
}

fn kinduction(p: &SpecProgram, goal: &Goal, assumed: &[Expr], cfg: &EngineConfig) -> Result<Verdict, CheckError> {
    let mut base = Bmc::new(p, goal, assumed, cfg)?;
    let mut step = Session::start(&cfg.solver)?;
    let mut enc = Encoder::new(p, true)?;
    goal.hyps.iter().chain(assumed).for_each(|a| enc.assume(a.clone()));
    if cfg.restrict_smt {
        enc.restrict_to(&cfg.domain, &goal.orig);
    }
    for n in 1..=cfg.k {
        if let Some(v) = base.next(goal)? {
            return Ok(v);
        }
        let text = enc.unroll_to(n + 1)?;
        step.send(&text)?;
        let hyp = enc.bool_at(&goal.check, n)?;
        let concl = enc.bool_at(&goal.check, n + 1)?;
        let aux = enc.take();
        step.send(&format!("{aux}(assert {hyp})\n(push 1)\n(assert (not {concl}))\n"))?;
        match step.check_sat()? {
            SatResult::Unsat => return Ok(Verdict::Proved { k: n }),
            SatResult::Sat => step.send("(pop 1)\n")?,
            SatResult::Unknown(reason) => return Ok(Verdict::Unknown { bound: n, reason }),
        }
    }
    Ok(Verdict::Unknown { bound: cfg.k, reason: format!("not inductive within k = {}", cfg.k) })
}

/// Proves `p.lemmas` and `cfg.lemmas` in order, each assuming the earlier
/// ones and the goal's hypotheses. Returns the proved expressions or the
/// first failure.
fn prove_lemmas(p: &SpecProgram, goal: &Goal, cfg: &EngineConfig) -> Result<Result<Vec<Expr>, String>, CheckError> {
    let declared = p.names();
    let mut proved: Vec<Expr> = vec![];
    for l in p.lemmas.iter().chain(&cfg.lemmas) {
        if !l.expr.vars().is_subset(&declared) {
            continue;
        }
        prepare(p, &l.expr)?;
        let lg = Goal { orig: l.expr.clone(), check: l.expr.clone(), hyps: goal.hyps.clone() };
        match kinduction(p, &lg, &proved, cfg)? {
            Verdict::Proved { .. } => proved.push(l.expr.clone()),
            Verdict::Falsified { step, .. } => return Ok(Err(format!("lemma `{}` is false (fails at step {step})", l.name))),
            Verdict::Unknown { reason, .. } => return Ok(Err(format!("lemma `{}` not proved: {reason}", l.name))),
        }
    }
    Ok(Ok(proved))
}

/// Checks that `prop` holds at every step of every admissible trace.
pub fn run_engine(p: &SpecProgram, prop: &Expr, cfg: &EngineConfig) -> Result<CheckResult, CheckError> {
    let start = Instant::now();
    prepare(p, prop)?;
    let goal = Goal::new(prop);
    let (verdict, diagnostic) = match cfg.engine {
        Engine::Explicit => {
            let dom = &cfg.domain;
            return check_invariant_explicit(p, prop, dom);
        }
        Engine::Bmc => (bmc(p, &goal, cfg)?, None),
        Engine::Kind => match prove_lemmas(p, &goal, cfg)? {
            Ok(lemmas) => {
                let n = lemmas.len();
                (kinduction(p, &goal, &lemmas, cfg)?, (n > 0).then(|| format!("{n} lemma(s) proved and assumed")))
            }
            Err(why) => {
                // the property may still be refutable without lemmas
                match bmc(p, &goal, cfg)? {
                    v @ Verdict::Falsified { .. } => (v, Some(why)),
                    _ => (Verdict::Unknown { bound: cfg.k, reason: why.clone() }, Some(why)),
                }
            }
        },
    };
    let mut r = CheckResult::new(verdict, cfg.engine, start);
    r.diagnostic = diagnostic;
    Ok(r)
}

/// Result of one obligation, in input order.
#[derive(Clone, Debug)]
pub struct Discharged {
    pub obligation: Obligation,
    pub result: Result<CheckResult, CheckError>,
}

/// Discharges obligations concurrently, one solver process each.
pub fn discharge(obligations: Vec<Obligation>, cfg: &EngineConfig) -> Vec<Discharged> {
    obligations
        .into_par_iter()
        .map(|ob| {
            let result = run_engine(&ob.program, &ob.property, cfg);
            Discharged { obligation: ob, result }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_expr, parse_program};

    #[test]
    fn engine_names_round_trip() {
        for e in [Engine::Explicit, Engine::Bmc, Engine::Kind] {
            assert_eq!(Engine::from_name(e.name()), Some(e));
        }
    }

    #[test]
    fn explicit_through_run_engine() {
        let p = parse_program("x : int; x = (0 -> pre(x) + 1);").unwrap();
        let cfg = EngineConfig { engine: Engine::Explicit, domain: EnumerationDomain::default().with_horizon(4), ..Default::default() };
        let r = run_engine(&p, &parse_expr("x < 3").unwrap(), &cfg).unwrap();
        assert!(matches!(r.verdict, Verdict::Falsified { step: 4, .. }));
    }

    #[test]
    fn ill_typed_property_is_rejected() {
        let p = parse_program("x : int;").unwrap();
        let cfg = EngineConfig { engine: Engine::Explicit, ..Default::default() };
        assert!(matches!(run_engine(&p, &parse_expr("x + 1").unwrap(), &cfg), Err(CheckError::Type(_))));
    }

    fn smt(engine: Engine, k: usize) -> EngineConfig {
        EngineConfig { engine, k, ..Default::default() }
    }

    #[test]
    fn bmc_counter() {
        let p = parse_program("x : int; x = (0 -> pre(x) + 1);").unwrap();
        let r = run_engine(&p, &parse_expr("x < 3").unwrap(), &smt(Engine::Bmc, 5)).unwrap();
        match r.verdict {
            Verdict::Falsified { trace, step } => {
                assert_eq!(step, 4);
                let xs: Vec<String> = (1..=4).map(|i| trace.get("x", i).unwrap().to_string()).collect();
                assert_eq!(xs, ["0", "1", "2", "3"]);
            }
            v => panic!("{v:?}"),
        }
    }

    #[test]
    fn kind_proves_and_falsifies() {
        let p = parse_program("x : int; x = (0 -> pre(x) + 1);").unwrap();
        let r = run_engine(&p, &parse_expr("x >= 0").unwrap(), &smt(Engine::Kind, 4)).unwrap();
        assert_eq!(r.verdict, Verdict::Proved { k: 1 });
        let r = run_engine(&p, &parse_expr("true").unwrap(), &smt(Engine::Kind, 1)).unwrap();
        assert_eq!(r.verdict, Verdict::Proved { k: 1 });
        let r = run_engine(&p, &parse_expr("x < 3").unwrap(), &smt(Engine::Kind, 8)).unwrap();
        assert!(matches!(r.verdict, Verdict::Falsified { step: 4, .. }));
    }

    #[test]
    fn leaf_contract_proved_at_one() {
        let p = parse_program("i, o : int; o = i + 1;").unwrap();
        let r = run_engine(&p, &parse_expr("hist(i >= 0) => o >= 1").unwrap(), &smt(Engine::Kind, 4)).unwrap();
        assert_eq!(r.verdict, Verdict::Proved { k: 1 });
        let r = run_engine(&p, &parse_expr("hist(i >= 0) => o >= 2").unwrap(), &smt(Engine::Kind, 4)).unwrap();
        match r.verdict {
            Verdict::Falsified { trace, step: 1 } => assert_eq!(trace.get("i", 1), Some(crate::value::Value::int(0))),
            v => panic!("{v:?}"),
        }
    }

    #[test]
    fn calendar_timeouts() {
        let p = parse_program(
            "to : real; timeout to; to = (10.0 -> ite(pre(to) = pre(t), pre(t) + 10.0, pre(to)));",
        )
        .unwrap();
        let r = run_engine(&p, &parse_expr("t < 30.0").unwrap(), &smt(Engine::Bmc, 6)).unwrap();
        match r.verdict {
            Verdict::Falsified { trace, step } => {
                assert_eq!(step, 4);
                assert_eq!(trace.time(4), &crate::value::rat(30, 1));
            }
            v => panic!("{v:?}"),
        }
        let r = run_engine(&p, &parse_expr("true -> t > pre(t)").unwrap(), &smt(Engine::Kind, 4)).unwrap();
        assert!(matches!(r.verdict, Verdict::Proved { .. }), "{:?}", r.verdict);
    }

    #[test]
    fn lemma_makes_property_inductive() {
        let p = parse_program("x, y : int; x = (0 -> pre(x) + 1); y = (0 -> pre(y) + 1);").unwrap();
        let prop = parse_expr("x >= 0 and (x = y => y >= 0)").unwrap();
        let r = run_engine(&p, &parse_expr("true -> pre(x) = pre(y) => x = y").unwrap(), &smt(Engine::Kind, 2)).unwrap();
        assert!(matches!(r.verdict, Verdict::Proved { .. }));
        let mut cfg = smt(Engine::Kind, 2);
        cfg.lemmas.push(Property::new("eq", parse_expr("x = y").unwrap()));
        let r = run_engine(&p, &prop, &cfg).unwrap();
        assert!(matches!(r.verdict, Verdict::Proved { .. }));
        assert!(r.diagnostic.unwrap().contains("1 lemma"));
    }
}

