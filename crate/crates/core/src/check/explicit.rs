//! Exhaustive bounded enumeration of admissible traces over finite domains.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use num_bigint::BigInt;
use num_traits::Zero;

use crate::ast::{Expr, SpecProgram, TypeTag, TIME_VAR};
use crate::semantics::{advance_time, check_calendar_step, eval_bool, eval_expr, TimedTrace};
use crate::value::{rat_int, Rational, Value};

use super::defs::{analyze, Plan, Slot};
use super::{CheckError, CheckResult, Engine, Verdict};

/// Finite value sets the enumerator draws free values from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnumerationDomain {
    pub horizon: usize,
    pub int_grid: Vec<BigInt>,
    pub real_grid: Vec<Rational>,
    /// Strictly positive time increments.
    pub time_grid: Vec<Rational>,
    /// Per-variable value sets, overriding the grids.
    pub overrides: BTreeMap<String, Vec<Value>>,
    /// Abort after visiting this many states.
    pub ceiling: u64,
    /// Variables present in this trace (and `t`) take its values.
    pub pinned: Option<TimedTrace>,
}

impl Default for EnumerationDomain {
    fn default() -> Self {
        EnumerationDomain {
            horizon: 5,
            int_grid: [-1, 0, 1, 2].into_iter().map(BigInt::from).collect(),
            real_grid: vec![rat_int(0), rat_int(1)],
            time_grid: vec![rat_int(5), rat_int(10)],
            overrides: BTreeMap::new(),
            ceiling: 1_000_000,
            pinned: None,
        }
    }
}

impl EnumerationDomain {
    pub fn with_horizon(mut self, horizon: usize) -> Self {
        self.horizon = horizon;
        self
    }

    /// Domain that replays `tr` for its variables and time stamps.
    pub fn pinned_to(tr: &TimedTrace) -> Self {
        EnumerationDomain { horizon: tr.len(), pinned: Some(tr.clone()), ..Default::default() }
    }

    pub fn validate(&self) -> Result<(), CheckError> {
        let bad = |m: &str| Err(CheckError::InvalidDomain(m.to_string()));
        if self.horizon == 0 {
            return bad("horizon must be at least 1");
        }
        if self.int_grid.is_empty() || self.real_grid.is_empty() || self.time_grid.is_empty() {
            return bad("grids must be nonempty");
        }
        if self.time_grid.iter().any(|d| d <= &Rational::zero()) {
            return bad("time grid must be strictly positive");
        }
        if let Some((v, _)) = self.overrides.iter().find(|(_, vals)| vals.is_empty()) {
            return Err(CheckError::InvalidDomain(format!("empty value set for `{v}`")));
        }
        if let Some(p) = &self.pinned {
            if p.len() < self.horizon {
                return bad("pinned trace is shorter than the horizon");
            }
        }
        Ok(())
    }

    fn pinned_names(&self) -> BTreeSet<String> {
        let mut s: BTreeSet<String> = BTreeSet::new();
        if let Some(p) = &self.pinned {
            s.extend(p.vars().iter().map(|d| d.name.clone()));
            s.insert(TIME_VAR.into());
        }
        s
    }
}

/// Whether time stamps can influence anything. When they cannot, the
/// enumerator uses a single time increment.
pub fn time_observed(p: &SpecProgram, extra: &[&Expr]) -> bool {
    let mentions_t = |e: &Expr| e.vars().contains(TIME_VAR);
    p.is_timed() || p.transition.iter().any(|c| mentions_t(&c.expr)) || extra.iter().any(|e| mentions_t(e))
}

enum Flow {
    Continue,
    Prune,
}

struct Enumerator<'a> {
    p: &'a SpecProgram,
    dom: &'a EnumerationDomain,
    plan: Plan,
    /// Constraints to evaluate once slot `k` is assigned.
    checks: Vec<Vec<usize>>,
    time_observed: bool,
    tr: TimedTrace,
    visited: u64,
    limit: usize,
}

impl<'a> Enumerator<'a> {
    fn new(p: &'a SpecProgram, dom: &'a EnumerationDomain, extra: &[&Expr]) -> Result<Self, CheckError> {
        dom.validate()?;
        let plan = analyze(p, &dom.pinned_names());
        let mut checks = vec![vec![]; plan.slots.len()];
        for (k, c) in p.transition.iter().enumerate() {
            if plan.is_definition(k) {
                continue;
            }
            let at = c.expr.current_vars().iter().filter_map(|v| plan.position(v)).max().unwrap_or(0);
            checks[at].push(k);
        }
        let time_observed = time_observed(p, extra);
        Ok(Enumerator {
            p,
            dom,
            plan,
            checks,
            time_observed,
            tr: TimedTrace::new(p.vars.clone()),
            visited: 0,
            limit: dom.horizon,
        })
    }

    fn estimate(&self) -> f64 {
        let per_step: f64 = self
            .plan
            .slots
            .iter()
            .map(|s| match s {
                Slot::Time if self.time_observed => self.dom.time_grid.len() as f64,
                Slot::Free(v) => self.domain_size(v) as f64,
                _ => 1.0,
            })
            .product();
        per_step.powi(self.dom.horizon as i32)
    }

    fn domain_size(&self, v: &str) -> usize {
        if let Some(o) = self.dom.overrides.get(v) {
            return o.len();
        }
        match self.p.var_type(v) {
            Some(TypeTag::Bool) => 2,
            Some(TypeTag::Int) => self.dom.int_grid.len(),
            _ if self.p.is_timeout(v) => self.dom.time_grid.len() + 1,
            _ => self.dom.real_grid.len(),
        }
    }

    fn pinned_value(&self, v: &str, step: usize) -> Option<Value> {
        self.dom.pinned.as_ref().and_then(|p| p.get(v, step))
    }

    fn time_candidates(&self, step: usize) -> Vec<Rational> {
        if let Some(Value::Real(r)) = self.pinned_value(TIME_VAR, step) {
            return vec![r];
        }
        if step == 1 {
            return vec![Rational::zero()];
        }
        let prev = self.tr.time(step - 1).clone();
        let grid = if self.time_observed { &self.dom.time_grid[..] } else { &self.dom.time_grid[..1] };
        let mut out: Vec<Rational> = grid.iter().map(|d| &prev + d).collect();
        for to in &self.p.timeouts {
            if let Some(Value::Real(r)) = self.tr.get(to, step - 1) {
                if r > prev {
                    out.push(r);
                }
            }
        }
        out.sort();
        out.dedup();
        out
    }

    fn free_values(&self, v: &str, step: usize) -> Vec<Value> {
        if let Some(x) = self.pinned_value(v, step) {
            return vec![x];
        }
        if let Some(o) = self.dom.overrides.get(v) {
            return o.clone();
        }
        match self.p.var_type(v) {
            Some(TypeTag::Bool) => vec![Value::Bool(false), Value::Bool(true)],
            Some(TypeTag::Int) => self.dom.int_grid.iter().cloned().map(Value::Int).collect(),
            _ if self.p.is_timeout(v) => {
                let base = if step == 1 { Rational::zero() } else { self.tr.time(step - 1).clone() };
                let mut out = vec![Value::Infinity];
                out.extend(self.dom.time_grid.iter().map(|d| Value::Real(&base + d)));
                out
            }
            _ => self.dom.real_grid.iter().cloned().map(Value::Real).collect(),
        }
    }

    fn checks_pass(&self, slot: usize, step: usize) -> bool {
        self.checks[slot].iter().all(|&k| matches!(eval_bool(&self.p.transition[k].expr, &self.tr, step), Ok(true)))
    }

    fn run<F>(&mut self, visit: &mut F) -> Result<(), CheckError>
    where
        F: FnMut(&TimedTrace, &mut usize) -> Result<Flow, CheckError>,
    {
        self.extend(1, 0, visit)
    }

    fn extend<F>(&mut self, step: usize, slot: usize, visit: &mut F) -> Result<(), CheckError>
    where
        F: FnMut(&TimedTrace, &mut usize) -> Result<Flow, CheckError>,
    {
        if step > self.limit {
            return Ok(());
        }
        if slot == 0 {
            let placeholder = self.p.vars.iter().map(|_| Value::Bool(false)).collect();
            self.tr.push(Rational::zero(), placeholder);
            let r = self.assign(step, 0, visit);
            self.tr.pop();
            return r;
        }
        self.assign(step, slot, visit)
    }

    fn assign<F>(&mut self, step: usize, slot: usize, visit: &mut F) -> Result<(), CheckError>
    where
        F: FnMut(&TimedTrace, &mut usize) -> Result<Flow, CheckError>,
    {
        if slot == self.plan.slots.len() {
            return self.complete(step, visit);
        }
        let choices: Vec<Value> = match &self.plan.slots[slot] {
            Slot::Time => self.time_candidates(step).into_iter().map(Value::Real).collect(),
            Slot::TimeCal => {
                let prev = (step > 1).then(|| self.tr.time(step - 1).clone());
                let tos: Vec<Value> = self.p.timeouts.iter().filter_map(|n| self.tr.get(n, step)).collect();
                match advance_time(prev.as_ref(), &tos, step) {
                    Ok(r) => vec![Value::Real(r)],
                    Err(_) => vec![],
                }
            }
            Slot::Free(v) => self.free_values(v, step),
            Slot::Def(_, k) => {
                let crate::ast::Expr::Binary(_, _, rhs) = &self.p.transition[*k].expr else { unreachable!() };
                match eval_expr(rhs, &self.tr, step) {
                    Ok(v) => vec![v],
                    Err(_) => vec![],
                }
            }
        };
        let var = self.plan.slots[slot].var().to_string();
        for v in choices {
            if var == TIME_VAR {
                match v {
                    Value::Real(r) => self.tr.set(TIME_VAR, step, Value::Real(r)),
                    _ => continue,
                }
            } else {
                self.tr.set(&var, step, v);
            }
            if self.checks_pass(slot, step) {
                self.assign(step, slot + 1, visit)?;
            }
        }
        Ok(())
    }

    fn complete<F>(&mut self, step: usize, visit: &mut F) -> Result<(), CheckError>
    where
        F: FnMut(&TimedTrace, &mut usize) -> Result<Flow, CheckError>,
    {
        self.visited += 1;
        if self.visited > self.dom.ceiling {
            return Err(CheckError::DomainExplosion { ceiling: self.dom.ceiling, estimate: self.estimate() });
        }
        if step > 1 && self.tr.time(step - 1) >= self.tr.time(step) {
            return Ok(());
        }
        if self.p.is_timed() && check_calendar_step(self.p, &self.tr, step).is_err() {
            return Ok(());
        }
        match visit(&self.tr, &mut self.limit)? {
            Flow::Prune => Ok(()),
            Flow::Continue => self.extend(step + 1, 0, visit),
        }
    }
}

/// Every admissible trace of exactly `dom.horizon` steps, in a
/// deterministic depth-first order.
pub fn enumerate_traces(p: &SpecProgram, dom: &EnumerationDomain) -> Result<Vec<TimedTrace>, CheckError> {
    enumerate_traces_observing(p, dom, &[])
}

/// As [`enumerate_traces`], with time stamps varied as if `observers` were
/// part of the program.
pub fn enumerate_traces_observing(p: &SpecProgram, dom: &EnumerationDomain, observers: &[&Expr]) -> Result<Vec<TimedTrace>, CheckError> {
    let mut e = Enumerator::new(p, dom, observers)?;
    let mut out = vec![];
    let horizon = dom.horizon;
    e.run(&mut |tr, _| {
        if tr.len() == horizon {
            out.push(tr.clone());
            Ok(Flow::Prune)
        } else {
            Ok(Flow::Continue)
        }
    })?;
    Ok(out)
}

/// The first admissible trace of `dom.horizon` steps in enumeration order.
/// `Err(n)` gives the longest admissible prefix length when none exists.
pub fn first_trace(p: &SpecProgram, dom: &EnumerationDomain) -> Result<Result<TimedTrace, usize>, CheckError> {
    let mut e = Enumerator::new(p, dom, &[])?;
    let mut found = None;
    let mut deepest = 0;
    let horizon = dom.horizon;
    e.run(&mut |tr, limit| {
        deepest = deepest.max(tr.len());
        if tr.len() == horizon {
            found = Some(tr.clone());
            *limit = 0;
            Ok(Flow::Prune)
        } else {
            Ok(Flow::Continue)
        }
    })?;
    Ok(found.ok_or(deepest))
}

/// Number of admissible traces of exactly `dom.horizon` steps.
pub fn count_traces(p: &SpecProgram, dom: &EnumerationDomain) -> Result<u64, CheckError> {
    let mut e = Enumerator::new(p, dom, &[])?;
    let mut n = 0u64;
    let horizon = dom.horizon;
    e.run(&mut |tr, _| {
        if tr.len() == horizon {
            n += 1;
            Ok(Flow::Prune)
        } else {
            Ok(Flow::Continue)
        }
    })?;
    Ok(n)
}

/// Searches the domain for a shortest admissible trace on which `prop`
/// fails at its last step. No counterexample is reported as `Proved` at
/// the horizon.
pub fn check_invariant_explicit(p: &SpecProgram, prop: &Expr, dom: &EnumerationDomain) -> Result<CheckResult, CheckError> {
    let start = Instant::now();
    let mut e = Enumerator::new(p, dom, &[prop])?;
    let mut best: Option<TimedTrace> = None;
    e.run(&mut |tr, limit| {
        let step = tr.len();
        match eval_bool(prop, tr, step) {
            Ok(true) => Ok(Flow::Continue),
            Ok(false) => {
                best = Some(tr.clone());
                *limit = step - 1;
                Ok(Flow::Prune)
            }
            Err(err) => Err(CheckError::Eval(err)),
        }
    })?;
    let verdict = match best {
        Some(trace) => Verdict::Falsified { step: trace.len(), trace },
        None => Verdict::Proved { k: dom.horizon },
    };
    Ok(CheckResult::new(verdict, Engine::Explicit, start))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_expr, parse_program};
    use crate::semantics::trace_admissible;

    fn dom(h: usize) -> EnumerationDomain {
        EnumerationDomain::default().with_horizon(h)
    }

    #[test]
    fn counter_has_one_trace() {
        let p = parse_program("x : int; x = (0 -> pre(x) + 1);").unwrap();
        let trs = enumerate_traces(&p, &dom(3)).unwrap();
        assert_eq!(trs.len(), 1);
        let xs: Vec<Value> = (1..=3).map(|i| trs[0].get("x", i).unwrap()).collect();
        assert_eq!(xs, vec![Value::int(0), Value::int(1), Value::int(2)]);
    }

    #[test]
    fn free_boolean_and_false_constraint() {
        let p = parse_program("b : bool;").unwrap();
        assert_eq!(enumerate_traces(&p, &dom(2)).unwrap().len(), 4);
        let p = parse_program("b : bool; false;").unwrap();
        assert!(enumerate_traces(&p, &dom(2)).unwrap().is_empty());
    }

    #[test]
    fn counter_invariants() {
        let p = parse_program("x : int; x = (0 -> pre(x) + 1);").unwrap();
        let r = check_invariant_explicit(&p, &parse_expr("x < 3").unwrap(), &dom(4)).unwrap();
        assert!(matches!(r.verdict, Verdict::Falsified { step: 4, .. }));
        let r = check_invariant_explicit(&p, &parse_expr("x >= 0").unwrap(), &dom(6)).unwrap();
        assert_eq!(r.verdict, Verdict::Proved { k: 6 });
    }

    #[test]
    fn shortest_counterexample_is_reported() {
        let p = parse_program("b : bool; n : int; n = (0 -> pre(n) + ite(b, 1, 0));").unwrap();
        let r = check_invariant_explicit(&p, &parse_expr("n < 2").unwrap(), &dom(5)).unwrap();
        match r.verdict {
            Verdict::Falsified { step, trace } => {
                assert_eq!(step, 3);
                assert!(trace_admissible(&p, &trace).is_ok());
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn timed_traces_follow_the_calendar() {
        let p = parse_program("to : real; timeout to; to = (10.0 -> ite(pre(to) = pre(t), pre(t) + 10.0, pre(to)));")
            .unwrap();
        let trs = enumerate_traces(&p, &dom(3)).unwrap();
        assert_eq!(trs.len(), 1);
        assert_eq!(trs[0].times(), &[rat_int(0), rat_int(10), rat_int(20)]);
        for tr in &trs {
            assert!(trace_admissible(&p, tr).is_ok());
        }
    }

    #[test]
    fn ceiling_aborts_with_estimate() {
        let p = parse_program("a, b, c : bool;").unwrap();
        let d = EnumerationDomain { ceiling: 100, ..dom(6) };
        assert!(matches!(enumerate_traces(&p, &d), Err(CheckError::DomainExplosion { .. })));
    }

    #[test]
    fn pinned_domain_replays_the_trace() {
        let host = parse_program("b : bool;").unwrap();
        let tr = &enumerate_traces(&host, &dom(3)).unwrap()[5];
        let p = parse_program("b, r : bool; r => b;").unwrap();
        let all = enumerate_traces(&p, &EnumerationDomain::pinned_to(tr)).unwrap();
        assert!(all.iter().all(|x| x.project(&["b".into()]) == *tr));
    }
}
