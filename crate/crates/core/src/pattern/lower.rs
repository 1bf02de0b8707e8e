use std::collections::BTreeSet;
use std::fmt::Write;

use num_traits::Zero;

use crate::ast::{Constraint, Expr, SpecProgram, TypeTag, VarDecl};
use crate::value::{Rational, Value};

use super::{Interval, Pattern, PatternError};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LoweringMode {
    PropertyObserver,
    Constraint,
    PropSideCondition,
}

impl LoweringMode {
    pub fn name(self) -> &'static str {
        match self {
            LoweringMode::PropertyObserver => "observer",
            LoweringMode::Constraint => "constraint",
            LoweringMode::PropSideCondition => "sidecondition",
        }
    }
}

/// Allocates variable names that collide with nothing already in use.
#[derive(Clone, Debug)]
pub struct FreshNames {
    taken: BTreeSet<String>,
    prefix: Option<String>,
}

impl FreshNames {
    pub fn new(taken: BTreeSet<String>, prefix: Option<&str>) -> Self {
        FreshNames { taken, prefix: prefix.map(sanitize) }
    }

    pub fn for_host(host: &SpecProgram, prefix: Option<&str>) -> Self {
        FreshNames::new(host.names(), prefix)
    }

    pub fn fresh(&mut self, stem: &str) -> String {
        let base = match &self.prefix {
            Some(p) => format!("{p}.{stem}"),
            None => stem.to_string(),
        };
        let mut name = base.clone();
        let mut k = 1;
        while self.taken.contains(&name) || crate::parser::is_reserved(&name) {
            name = format!("{base}_{k}");
            k += 1;
        }
        self.taken.insert(name.clone());
        name
    }
}

/// Turns an item label into an identifier fragment.
pub fn sanitize(name: &str) -> String {
    let mut s: String = name.chars().map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' }).collect();
    if s.is_empty() || !s.starts_with(|c: char| c.is_ascii_alphabetic() || c == '_') {
        s.insert(0, '_');
    }
    s
}

/// Fresh variables and constraints produced by lowering one pattern.
///
/// Constraints flagged in `is_definition` only define a fresh variable; the
/// others restrict behaviour. `property`, when present, is the obligation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObserverBundle {
    pub mode: LoweringMode,
    pub fresh_vars: Vec<VarDecl>,
    pub constraints: Vec<Expr>,
    pub is_definition: Vec<bool>,
    pub property: Option<Expr>,
    /// Fresh variables that join the host's calendar.
    pub timeouts: Vec<String>,
}

impl ObserverBundle {
    fn new(mode: LoweringMode) -> Self {
        ObserverBundle { mode, fresh_vars: vec![], constraints: vec![], is_definition: vec![], property: None, timeouts: vec![] }
    }

    fn var(&mut self, names: &mut FreshNames, stem: &str, ty: TypeTag) -> String {
        let n = names.fresh(stem);
        self.fresh_vars.push(VarDecl::new(n.clone(), ty));
        n
    }

    fn define(&mut self, name: &str, e: Expr) {
        self.constraints.push(Expr::eq(Expr::var(name), e));
        self.is_definition.push(true);
    }

    fn restrict(&mut self, e: Expr) {
        self.constraints.push(e);
        self.is_definition.push(false);
    }

    /// Conjunction of the non-definitional constraints.
    pub fn restriction(&self) -> Expr {
        Expr::conj(self.constraints.iter().zip(&self.is_definition).filter(|(_, d)| !**d).map(|(c, _)| c.clone()))
    }

    /// Adds every fresh variable, constraint and timeout to `host`.
    pub fn install(&self, host: &mut SpecProgram, label: &str) {
        self.install_filtered(host, label, false);
    }

    /// Adds the fresh variables and only the defining equations.
    pub fn install_definitions(&self, host: &mut SpecProgram, label: &str) {
        self.install_filtered(host, label, true);
    }

    fn install_filtered(&self, host: &mut SpecProgram, label: &str, only_definitions: bool) {
        host.vars.extend(self.fresh_vars.iter().cloned());
        for (e, def) in self.constraints.iter().zip(&self.is_definition) {
            if *def || !only_definitions {
                host.transition.push(Constraint::named(label, e.clone()));
            }
        }
        for t in &self.timeouts {
            if !host.timeouts.contains(t) {
                host.timeouts.push(t.clone());
            }
        }
    }

    /// The lowering in the surface syntax, one statement per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for d in &self.fresh_vars {
            let _ = writeln!(out, "var {} : {};", d.name, d.ty);
        }
        if !self.timeouts.is_empty() {
            let _ = writeln!(out, "timeout {};", self.timeouts.join(", "));
        }
        for c in &self.constraints {
            let _ = writeln!(out, "{c};");
        }
        if let Some(p) = &self.property {
            let _ = writeln!(out, "property {} : {p};", crate::print::quote(self.mode.name()));
        }
        out
    }
}

fn num(r: &Rational) -> Expr {
    Expr::Const(Value::Real(r.clone()))
}

fn zero() -> Expr {
    Expr::real(Rational::zero())
}

fn one() -> Expr {
    Expr::real(Rational::from_integer(1.into()))
}

/// `d` satisfies the lower bound: `l <= d` (or `l < d` when open).
fn lo(iv: &Interval, d: Expr) -> Expr {
    if iv.low_closed {
        Expr::le(num(&iv.low), d)
    } else {
        Expr::lt(num(&iv.low), d)
    }
}

/// `d` satisfies the upper bound: `d <= h` (or `d < h` when open).
fn hi(iv: &Interval, d: Expr) -> Expr {
    if iv.high_closed {
        Expr::le(d, num(&iv.high))
    } else {
        Expr::lt(d, num(&iv.high))
    }
}

fn since(v: &str) -> Expr {
    Expr::sub(Expr::time(), Expr::pre(Expr::var(v)))
}

fn unsupported(p: &Pattern, mode: LoweringMode, reason: &'static str) -> PatternError {
    PatternError::Unsupported { pattern: p.to_string(), mode: mode.name(), reason }
}

/// `v = ite(c, t, 0.0 -> pre(v))`: time of the latest occurrence of `c`.
fn latest(b: &mut ObserverBundle, names: &mut FreshNames, stem: &str, c: &Expr) -> String {
    let v = b.var(names, stem, TypeTag::Real);
    b.define(&v, Expr::ite(c.clone(), Expr::time(), Expr::arrow(zero(), Expr::pre(Expr::var(&v)))));
    v
}

/// `v = c or (false -> pre(v))`: `c` has occurred.
fn occurred(b: &mut ObserverBundle, names: &mut FreshNames, stem: &str, c: &Expr) -> String {
    let v = b.var(names, stem, TypeTag::Bool);
    b.define(&v, Expr::or(c.clone(), Expr::arrow(Expr::ff(), Expr::pre(Expr::var(&v)))));
    v
}

/// The recorded-occurrence observer for event-event windows.
fn window_observer(b: &mut ObserverBundle, names: &mut FreshNames, c: &Expr, e: &Expr, iv: &Interval) {
    let run = b.var(names, "run", TypeTag::Bool);
    let timer = b.var(names, "timer", TypeTag::Real);
    let rec = b.var(names, "rec_c", TypeTag::Bool);
    let pass = b.var(names, "pass", TypeTag::Bool);
    let (run_v, timer_v, rec_v) = (Expr::var(&run), Expr::var(&timer), Expr::var(&rec));
    b.define(
        &run,
        Expr::arrow(
            rec_v.clone(),
            Expr::ite(
                Expr::conj([Expr::pre(run_v.clone()), e.clone(), lo(iv, timer_v.clone()), hi(iv, timer_v.clone())]),
                Expr::ff(),
                Expr::ite(rec_v.clone(), Expr::tt(), Expr::pre(run_v.clone())),
            ),
        ),
    );
    b.define(&timer, elapsed_timer(&run, &timer));
    b.restrict(Expr::implies(rec_v, c.clone()));
    b.define(&pass, hi(iv, timer_v));
    b.property = Some(Expr::var(pass));
}

/// `0.0 -> ite(pre(run), pre(timer) + (t - pre(t)), 0.0)`
fn elapsed_timer(run: &str, timer: &str) -> Expr {
    Expr::arrow(
        zero(),
        Expr::ite(
            Expr::pre(Expr::var(run)),
            Expr::add(Expr::pre(Expr::var(timer)), Expr::sub(Expr::time(), Expr::pre(Expr::time()))),
            zero(),
        ),
    )
}

/// Defines the trigger of a condition-event pattern: the first step of a
/// continuous `cond` stretch at which the stretch has lasted a duration in
/// `iv`.
fn condition_trigger(b: &mut ObserverBundle, names: &mut FreshNames, cond: &Expr, iv: &Interval) -> String {
    let start = b.var(names, "cs", TypeTag::Real);
    let trig = b.var(names, "trig", TypeTag::Bool);
    let fired = b.var(names, "fired", TypeTag::Bool);
    let rising = Expr::and(cond.clone(), Expr::arrow(Expr::tt(), Expr::not(Expr::pre(cond.clone()))));
    b.define(&start, Expr::ite(rising, Expr::time(), Expr::arrow(zero(), Expr::pre(Expr::var(&start)))));
    let held = Expr::sub(Expr::time(), Expr::var(&start));
    let fired_before = Expr::arrow(Expr::ff(), Expr::and(Expr::pre(cond.clone()), Expr::pre(Expr::var(&fired))));
    b.define(
        &trig,
        Expr::conj([cond.clone(), lo(iv, held.clone()), hi(iv, held), Expr::not(fired_before.clone())]),
    );
    b.define(&fired, Expr::or(Expr::var(&trig), Expr::and(cond.clone(), fired_before)));
    trig
}

/// Lowers `pat` in the requested mode.
pub fn lower_observer(
    pat: &Pattern,
    host: &SpecProgram,
    mode: LoweringMode,
    prefix: Option<&str>,
) -> Result<ObserverBundle, PatternError> {
    match mode {
        LoweringMode::PropertyObserver => compile_property_observer(pat, host, prefix),
        LoweringMode::Constraint => compile_constraint(pat, host, prefix),
        LoweringMode::PropSideCondition => compile_prop_side_condition(pat, host, prefix),
    }
}

/// Observer whose `pass` variable is invariant iff every admissible trace
/// satisfies the pattern.
pub fn compile_property_observer(
    pat: &Pattern,
    host: &SpecProgram,
    prefix: Option<&str>,
) -> Result<ObserverBundle, PatternError> {
    let mode = LoweringMode::PropertyObserver;
    let mut names = FreshNames::for_host(host, prefix);
    let mut b = ObserverBundle::new(mode);
    match pat {
        Pattern::WheneverEventEvent { exclusive: true, .. } => {
            return Err(unsupported(pat, mode, "`exclusively` can only restrict behaviour, use it in an assertion"))
        }
        Pattern::WheneverEventEvent { cause, effect, iv, .. } => window_observer(&mut b, &mut names, cause, effect, iv),
        Pattern::WheneverEventCondition { cause, cond, iv } => {
            let run = b.var(&mut names, "run", TypeTag::Bool);
            let timer = b.var(&mut names, "timer", TypeTag::Real);
            let rec = b.var(&mut names, "rec_c", TypeTag::Bool);
            let pass = b.var(&mut names, "pass", TypeTag::Bool);
            b.define(&run, Expr::or(Expr::var(&rec), Expr::arrow(Expr::ff(), Expr::pre(Expr::var(&run)))));
            b.define(&timer, elapsed_timer(&run, &timer));
            let tv = Expr::var(&timer);
            b.define(
                &pass,
                Expr::implies(Expr::conj([Expr::var(&run), lo(iv, tv.clone()), hi(iv, tv)]), cond.clone()),
            );
            b.restrict(Expr::implies(Expr::var(&rec), cause.clone()));
            b.property = Some(Expr::var(pass));
        }
        Pattern::WhenConditionEvent { cond, cond_iv, event, event_iv } => {
            let trig = condition_trigger(&mut b, &mut names, cond, cond_iv);
            window_observer(&mut b, &mut names, &Expr::var(trig), event, event_iv);
        }
        Pattern::Always { cond } => b.property = Some(cond.clone()),
        Pattern::Sporadic { event, iat, jitter } => {
            let hase = occurred(&mut b, &mut names, "hase", event);
            let last = latest(&mut b, &mut names, "last", event);
            let pass = b.var(&mut names, "pass", TypeTag::Bool);
            b.define(&pass, sporadic_ok(event, &hase, &last, iat, jitter));
            b.property = Some(Expr::var(pass));
        }
        Pattern::Periodic { .. } => {
            return Err(unsupported(pat, mode, "the grid anchor is existential, use it as an assumption or assertion"))
        }
    }
    Ok(b)
}

/// `true -> (e and pre(hase) => t - pre(last) >= iat - jitter)`
fn sporadic_ok(event: &Expr, hase: &str, last: &str, iat: &Rational, jitter: &Rational) -> Expr {
    Expr::arrow(
        Expr::tt(),
        Expr::implies(
            Expr::and(event.clone(), Expr::pre(Expr::var(hase))),
            Expr::ge(since(last), num(&(iat - jitter))),
        ),
    )
}

/// Constraints restricting the host to the pattern's trace set (the sound
/// over-approximation for event-event windows).
pub fn compile_constraint(pat: &Pattern, host: &SpecProgram, prefix: Option<&str>) -> Result<ObserverBundle, PatternError> {
    let mode = LoweringMode::Constraint;
    let mut names = FreshNames::for_host(host, prefix);
    let mut b = ObserverBundle::new(mode);
    match pat {
        Pattern::WheneverEventEvent { cause, effect, iv, exclusive } => {
            let tc = latest(&mut b, &mut names, "tc", cause);
            let pend = b.var(&mut names, "pend", TypeTag::Bool);
            b.define(
                &pend,
                Expr::or(
                    cause.clone(),
                    Expr::arrow(
                        Expr::ff(),
                        Expr::and(
                            Expr::pre(Expr::var(&pend)),
                            Expr::not(Expr::and(effect.clone(), lo(iv, since(&tc)))),
                        ),
                    ),
                ),
            );
            if host.is_timed() && iv.high_closed {
                // a calendar entry at each pending deadline
                let dl = b.var(&mut names, "dl", TypeTag::Real);
                b.define(
                    &dl,
                    Expr::arrow(
                        Expr::infinity(),
                        Expr::ite(
                            Expr::pre(Expr::var(&pend)),
                            Expr::add(Expr::pre(Expr::var(&tc)), num(&iv.high)),
                            Expr::infinity(),
                        ),
                    ),
                );
                b.timeouts.push(dl);
            }
            b.restrict(Expr::arrow(Expr::tt(), Expr::implies(Expr::pre(Expr::var(&pend)), hi(iv, since(&tc)))));
            if *exclusive {
                b.restrict(Expr::implies(
                    effect.clone(),
                    Expr::arrow(Expr::ff(), Expr::and(Expr::pre(Expr::var(&pend)), lo(iv, since(&tc)))),
                ));
            }
        }
        Pattern::WheneverEventCondition { cause, cond, iv } => {
            if !(iv.low.is_zero() && iv.low_closed) {
                return Err(unsupported(pat, mode, "only windows starting at a closed 0 are supported"));
            }
            let hasc = occurred(&mut b, &mut names, "hasc", cause);
            let tc = latest(&mut b, &mut names, "tc", cause);
            b.restrict(Expr::implies(
                Expr::and(Expr::var(hasc), hi(iv, Expr::sub(Expr::time(), Expr::var(tc)))),
                cond.clone(),
            ));
        }
        Pattern::WhenConditionEvent { .. } => {
            return Err(unsupported(pat, mode, "needs unbounded memory of pending triggers"))
        }
        Pattern::Always { cond } => b.restrict(cond.clone()),
        Pattern::Sporadic { event, iat, jitter } => {
            let hase = occurred(&mut b, &mut names, "hase", event);
            let last = latest(&mut b, &mut names, "last", event);
            b.restrict(sporadic_ok(event, &hase, &last, iat, jitter));
        }
        Pattern::Periodic { event, period, jitter } => {
            let cnt = b.var(&mut names, "cnt", TypeTag::Real);
            let anc = b.var(&mut names, "anc", TypeTag::Real);
            let before = Expr::arrow(zero(), Expr::pre(Expr::var(&cnt)));
            b.define(&cnt, Expr::add(before.clone(), Expr::ite(event.clone(), one(), zero())));
            let nominal = Expr::add(Expr::var(&anc), Expr::bin(crate::ast::BinOp::Mul, before, num(period)));
            if host.is_timed() {
                let dl = b.var(&mut names, "dl", TypeTag::Real);
                b.define(&dl, Expr::add(nominal.clone(), num(jitter)));
                b.timeouts.push(dl);
            }
            b.restrict(Expr::and(Expr::le(zero(), Expr::var(&anc)), Expr::le(Expr::var(&anc), num(period))));
            b.restrict(Expr::arrow(Expr::tt(), Expr::eq(Expr::var(&anc), Expr::pre(Expr::var(&anc)))));
            b.restrict(Expr::le(Expr::time(), Expr::add(nominal.clone(), num(jitter))));
            b.restrict(Expr::implies(event.clone(), Expr::ge(Expr::time(), Expr::sub(nominal, num(jitter)))));
        }
    }
    Ok(b)
}

/// Observer for the non-overlap side condition: between a cause and a later
/// cause within the window's upper bound, an effect past the lower bound must
/// have occurred.
pub fn compile_prop_side_condition(
    pat: &Pattern,
    host: &SpecProgram,
    prefix: Option<&str>,
) -> Result<ObserverBundle, PatternError> {
    let mode = LoweringMode::PropSideCondition;
    let Pattern::WheneverEventEvent { cause, effect, iv, exclusive: false } = pat else {
        return Err(unsupported(pat, mode, "defined for non-exclusive event-event windows only"));
    };
    let mut names = FreshNames::for_host(host, prefix);
    let mut b = ObserverBundle::new(mode);
    let hasc = occurred(&mut b, &mut names, "hasc", cause);
    let tc = latest(&mut b, &mut names, "tc", cause);
    let seen = b.var(&mut names, "seen", TypeTag::Bool);
    let pass = b.var(&mut names, "pass", TypeTag::Bool);
    b.define(
        &seen,
        Expr::arrow(
            Expr::ff(),
            Expr::or(
                Expr::and(Expr::not(Expr::pre(cause.clone())), Expr::pre(Expr::var(&seen))),
                Expr::and(effect.clone(), lo(iv, since(&tc))),
            ),
        ),
    );
    b.define(
        &pass,
        Expr::arrow(
            Expr::tt(),
            Expr::implies(
                Expr::conj([cause.clone(), Expr::pre(Expr::var(&hasc)), hi(iv, since(&tc))]),
                Expr::var(&seen),
            ),
        ),
    );
    b.property = Some(Expr::var(pass));
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pattern::parse_pattern;

    fn host() -> SpecProgram {
        crate::parser::parse_program("a : bool; b : bool;").unwrap()
    }

    #[test]
    fn observer_has_the_four_constraints() {
        let p = parse_pattern("whenever a occurs b occurs during [10.0, 20.0]").unwrap();
        let b = compile_property_observer(&p, &host(), None).unwrap();
        let text: Vec<String> = b.constraints.iter().map(|c| c.to_string()).collect();
        assert_eq!(
            text,
            vec![
                "run = (rec_c -> ite(pre(run) and b and 10.0 <= timer and timer <= 20.0, false, ite(rec_c, true, pre(run))))",
                "timer = (0.0 -> ite(pre(run), pre(timer) + (t - pre(t)), 0.0))",
                "rec_c => a",
                "pass = (timer <= 20.0)",
            ]
        );
        assert_eq!(b.property, Some(Expr::var("pass")));
    }

    #[test]
    fn fresh_names_avoid_collisions() {
        let h = crate::parser::parse_program("a : bool; b : bool; run : int;").unwrap();
        let p = parse_pattern("whenever a occurs b occurs during [10.0, 20.0]").unwrap();
        let b = compile_property_observer(&p, &h, None).unwrap();
        assert_eq!(b.fresh_vars[0].name, "run_1");
        let b = compile_property_observer(&p, &h, Some("stop")).unwrap();
        assert_eq!(b.fresh_vars[0].name, "stop.run");
    }

    #[test]
    fn unsupported_modes_are_explicit() {
        let p = parse_pattern("when a holds during [0.0, 5.0] b occurs during [0.0, 5.0]").unwrap();
        let err = compile_constraint(&p, &host(), None).unwrap_err();
        assert!(matches!(err, PatternError::Unsupported { mode: "constraint", .. }), "{err}");
    }
}
