//! Unrolling of programs and properties into SMT-LIB 2.6 over linear
//! integer/real arithmetic.
//!
//! Step `i` of variable `x` is the symbol `|x@i|`. Timeout variables use the
//! negative-sentinel convention: a negative value stands for Infinity.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write;

use num_traits::{Signed, Zero};

use crate::ast::{BinOp, Expr, SpecProgram, TypeTag, UnOp, TIME_VAR};
use crate::semantics::{eval_expr, TimedTrace};
use crate::typeck::{type_check, TypedProgram};
use crate::value::{Rational, Value};

use super::defs::{analyze, Plan, Slot};
use super::explicit::{time_observed, EnumerationDomain};
use super::solver::ModelValue;
use super::CheckError;

/// Which script `emit_smtlib` produces.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SmtMode {
    /// Search for a violation within `k` steps.
    Bmc(usize),
    /// Base case up to `k` and the `k`-step inductive case.
    KInduction(usize),
}

pub fn sym(var: &str, step: usize) -> String {
    format!("|{var}@{step}|")
}

fn sort(ty: TypeTag) -> &'static str {
    match ty {
        TypeTag::Bool => "Bool",
        TypeTag::Int => "Int",
        TypeTag::Real => "Real",
    }
}

fn real_lit(r: &Rational) -> String {
    let body = |r: &Rational| {
        if r.is_integer() {
            format!("{}.0", r.numer())
        } else {
            format!("(/ {}.0 {}.0)", r.numer(), r.denom())
        }
    };
    if r.is_negative() {
        format!("(- {})", body(&-r))
    } else {
        body(r)
    }
}

pub fn value_lit(v: &Value) -> String {
    match v {
        Value::Bool(b) => b.to_string(),
        Value::Int(i) if i.is_negative() => format!("(- {})", -i),
        Value::Int(i) => i.to_string(),
        Value::Real(r) => real_lit(r),
        Value::Infinity => "(- 1.0)".into(),
    }
}

/// Translated term: plain, or a possibly-infinite real as (is-inf, value).
#[derive(Clone, Debug)]
enum Term {
    Plain(String),
    Ext { inf: String, val: String },
}

impl Term {
    fn ext(self) -> (String, String) {
        match self {
            Term::Plain(v) => ("false".into(), v),
            Term::Ext { inf, val } => (inf, val),
        }
    }

    fn plain(self) -> Result<String, CheckError> {
        match self {
            Term::Plain(s) => Ok(s),
            Term::Ext { .. } => Err(CheckError::Internal("infinite value where a finite one is required".into())),
        }
    }
}

fn ite(c: &str, a: &str, b: &str) -> String {
    format!("(ite {c} {a} {b})")
}

/// Incremental encoder for one program. `free_start` leaves the first
/// position unconstrained except through the `first` flag, for the
/// inductive step.
pub struct Encoder {
    tp: TypedProgram,
    free_start: bool,
    assumptions: Vec<Expr>,
    restrict: Option<(EnumerationDomain, Plan, bool)>,
    ids: HashMap<Expr, usize>,
    memo: HashMap<(usize, usize, u8), String>,
    pending: String,
    aux: usize,
    declared: usize,
}

impl Encoder {
    pub fn new(p: &SpecProgram, free_start: bool) -> Result<Encoder, CheckError> {
        let tp = type_check(p).map_err(CheckError::Type)?;
        Ok(Encoder {
            tp,
            free_start,
            assumptions: vec![],
            restrict: None,
            ids: HashMap::new(),
            memo: HashMap::new(),
            pending: String::new(),
            aux: 0,
            declared: 0,
        })
    }

    /// Invariants asserted at every position.
    pub fn assume(&mut self, e: Expr) {
        self.assumptions.push(e);
    }

    /// Confines free values to the enumeration domain so the search space
    /// matches the explicit engine's.
    pub fn restrict_to(&mut self, dom: &EnumerationDomain, prop: &Expr) {
        let pinned: BTreeSet<String> = match &dom.pinned {
            Some(tr) => tr.vars().iter().map(|d| d.name.clone()).chain([TIME_VAR.to_string()]).collect(),
            None => BTreeSet::new(),
        };
        let plan = analyze(&self.tp.program, &pinned);
        let observed = time_observed(&self.tp.program, &[prop]);
        self.restrict = Some((dom.clone(), plan, observed));
    }

    pub fn program(&self) -> &SpecProgram {
        &self.tp.program
    }

    fn id(&mut self, e: &Expr) -> usize {
        let n = self.ids.len();
        *self.ids.entry(e.clone()).or_insert(n)
    }

    fn fresh(&mut self, stem: &str, ty: &str) -> String {
        self.aux += 1;
        let s = format!("|{stem}!{}|", self.aux);
        let _ = writeln!(self.pending, "(declare-const {s} {ty})");
        s
    }

    fn first(&self, i: usize) -> String {
        if i == 1 && self.free_start {
            sym("first", 1)
        } else if i == 1 {
            "true".into()
        } else {
            "false".into()
        }
    }

    fn is_ext_var(&self, v: &str) -> bool {
        self.tp.program.is_timeout(v)
    }

    fn term(&mut self, e: &Expr, i: usize) -> Result<Term, CheckError> {
        Ok(match e {
            Expr::Const(Value::Infinity) => Term::Ext { inf: "true".into(), val: "0.0".into() },
            Expr::Const(v) => Term::Plain(value_lit(v)),
            Expr::Var(v) if self.is_ext_var(v) => {
                let s = sym(v, i);
                Term::Ext { inf: format!("(< {s} 0.0)"), val: s }
            }
            Expr::Var(v) => Term::Plain(sym(v, i)),
            Expr::Unary(UnOp::Not, a) => Term::Plain(format!("(not {})", self.term(a, i)?.plain()?)),
            Expr::Unary(UnOp::Neg, a) => Term::Plain(format!("(- {})", self.term(a, i)?.plain()?)),
            Expr::Binary(op, a, b) => self.binary(*op, a, b, i)?,
            Expr::Ite(c, a, b) => {
                let c = self.term(c, i)?.plain()?;
                match (self.term(a, i)?, self.term(b, i)?) {
                    (Term::Plain(x), Term::Plain(y)) => Term::Plain(ite(&c, &x, &y)),
                    (x, y) => {
                        let ((ia, va), (ib, vb)) = (x.ext(), y.ext());
                        Term::Ext { inf: ite(&c, &ia, &ib), val: ite(&c, &va, &vb) }
                    }
                }
            }
            Expr::Arrow(a, b) => {
                if i > 1 {
                    self.term(b, i)?
                } else if !self.free_start {
                    self.term(a, i)?
                } else {
                    let f = self.first(1);
                    match (self.term(a, i)?, self.term(b, i)?) {
                        (Term::Plain(x), Term::Plain(y)) => Term::Plain(ite(&f, &x, &y)),
                        (x, y) => {
                            let ((ia, va), (ib, vb)) = (x.ext(), y.ext());
                            Term::Ext { inf: ite(&f, &ia, &ib), val: ite(&f, &va, &vb) }
                        }
                    }
                }
            }
            Expr::Pre(a) => {
                if i > 1 {
                    self.term(a, i - 1)?
                } else if self.free_start {
                    let key = (self.id(e), 0, 0);
                    let ty = self.tp.type_of(a).map_err(CheckError::Type)?;
                    let s = match self.memo.get(&key) {
                        Some(s) => s.clone(),
                        None => {
                            let s = self.fresh("pre", sort(ty.tag));
                            if **a == Expr::time() {
                                // time before the window is non-negative and earlier
                                let (f, t1) = (self.first(1), sym(TIME_VAR, 1));
                                let _ = writeln!(self.pending, "(assert (=> (not {f}) (and (>= {s} 0.0) (< {s} {t1}))))");
                            }
                            self.memo.insert(key, s.clone());
                            s
                        }
                    };
                    if ty.extended {
                        Term::Ext { inf: format!("(< {s} 0.0)"), val: s }
                    } else {
                        Term::Plain(s)
                    }
                } else {
                    return Err(CheckError::Internal(format!("`{e}` evaluated at the first step")));
                }
            }
            Expr::Hist(a) => {
                let key = (self.id(e), i, 1);
                if let Some(s) = self.memo.get(&key) {
                    return Ok(Term::Plain(s.clone()));
                }
                let cur = self.term(a, i)?.plain()?;
                let before = if i > 1 {
                    self.term(e, i - 1)?.plain()?
                } else if self.free_start {
                    let h = self.fresh("histpre", "Bool");
                    format!("(or {} {h})", self.first(1))
                } else {
                    "true".into()
                };
                let s = self.fresh("hist", "Bool");
                let _ = writeln!(self.pending, "(assert (= {s} (and {cur} {before})))");
                self.memo.insert(key, s.clone());
                Term::Plain(s)
            }
            Expr::Initz(a) => {
                if i > 1 {
                    Term::Plain(self.term(a, i - 1)?.plain()?)
                } else if self.free_start {
                    let key = (self.id(e), 0, 2);
                    let z = match self.memo.get(&key) {
                        Some(s) => s.clone(),
                        None => {
                            let s = self.fresh("initzpre", "Bool");
                            self.memo.insert(key, s.clone());
                            s
                        }
                    };
                    Term::Plain(format!("(or {} {z})", self.first(1)))
                } else {
                    Term::Plain("true".into())
                }
            }
        })
    }

    fn constant(e: &Expr) -> Option<Value> {
        if !e.is_ground() {
            return None;
        }
        let mut tr = TimedTrace::new(vec![]);
        tr.push(Rational::zero(), vec![]);
        eval_expr(e, &tr, 1).ok()
    }

    fn binary(&mut self, op: BinOp, a: &Expr, b: &Expr, i: usize) -> Result<Term, CheckError> {
        let name = match op {
            BinOp::And => "and",
            BinOp::Or => "or",
            BinOp::Implies => "=>",
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Eq => "=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
        };
        if op == BinOp::Mul && Self::constant(a).is_none() && Self::constant(b).is_none() {
            return Err(CheckError::Unsupported(format!("nonlinear product `{a} * {b}`")));
        }
        let name = if op == BinOp::Div {
            match Self::constant(b) {
                Some(v) if matches!(&v, Value::Int(n) if n.is_zero()) || matches!(&v, Value::Real(r) if r.is_zero()) => {
                    return Err(CheckError::Unsupported(format!("division by zero in `{a} / {b}`")))
                }
                Some(Value::Int(_)) => "div",
                Some(_) => "/",
                None => return Err(CheckError::Unsupported(format!("division by a non-constant in `{a} / {b}`"))),
            }
        } else {
            name
        };
        let (ta, tb) = (self.term(a, i)?, self.term(b, i)?);
        if let (Term::Plain(x), Term::Plain(y)) = (&ta, &tb) {
            return Ok(Term::Plain(format!("({name} {x} {y})")));
        }
        let ((ia, va), (ib, vb)) = (ta.ext(), tb.ext());
        Ok(match op {
            BinOp::Eq => Term::Plain(format!("(and (= {ia} {ib}) (or {ia} (= {va} {vb})))")),
            BinOp::Lt => Term::Plain(format!("(and (not {ia}) (or {ib} (< {va} {vb})))")),
            BinOp::Le => Term::Plain(format!("(or {ib} (and (not {ia}) (<= {va} {vb})))")),
            BinOp::Gt => Term::Plain(format!("(and (not {ib}) (or {ia} (> {va} {vb})))")),
            BinOp::Ge => Term::Plain(format!("(or {ia} (and (not {ib}) (>= {va} {vb})))")),
            BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div => {
                Term::Ext { inf: format!("(or {ia} {ib})"), val: format!("({name} {va} {vb})") }
            }
            BinOp::And | BinOp::Or | BinOp::Implies => unreachable!("logic on reals is rejected by typing"),
        })
    }

    /// Boolean term for `e` at position `i`; auxiliary declarations are
    /// queued and returned by the next `take`.
    pub fn bool_at(&mut self, e: &Expr, i: usize) -> Result<String, CheckError> {
        self.term(e, i)?.plain()
    }

    pub fn take(&mut self) -> String {
        std::mem::take(&mut self.pending)
    }

    /// Declarations and assertions for every position up to `i`.
    pub fn unroll_to(&mut self, i: usize) -> Result<String, CheckError> {
        let mut out = String::new();
        while self.declared < i {
            self.declared += 1;
            out.push_str(&self.position(self.declared)?);
        }
        Ok(out)
    }

    pub fn declared(&self) -> usize {
        self.declared
    }

    fn position(&mut self, i: usize) -> Result<String, CheckError> {
        let mut out = String::new();
        let p = self.tp.program.clone();
        let _ = writeln!(out, "; position {i}");
        let _ = writeln!(out, "(declare-const {} Real)", sym(TIME_VAR, i));
        for d in &p.vars {
            let _ = writeln!(out, "(declare-const {} {})", sym(&d.name, i), sort(d.ty));
        }
        let t = sym(TIME_VAR, i);
        if i == 1 {
            if self.free_start {
                let _ = writeln!(out, "(declare-const {} Bool)", sym("first", 1));
                let _ = writeln!(out, "(assert (>= {t} 0.0))");
                let _ = writeln!(out, "(assert (=> {} (= {t} 0.0)))", sym("first", 1));
            } else {
                let _ = writeln!(out, "(assert (= {t} 0.0))");
            }
        } else {
            let tp = sym(TIME_VAR, i - 1);
            let _ = writeln!(out, "(assert (> {t} {tp}))");
            if p.is_timed() {
                out.push_str(&self.calendar(i));
            }
        }
        for (k, c) in p.transition.iter().enumerate() {
            let term = self.bool_at(&c.expr, i)?;
            out.push_str(&self.take());
            let _ = writeln!(out, "(assert {term}) ; {}", p.constraint_label(k));
        }
        for a in self.assumptions.clone() {
            let term = self.bool_at(&a, i)?;
            out.push_str(&self.take());
            let _ = writeln!(out, "(assert {term}) ; lemma");
        }
        if let Some(r) = self.restriction(i)? {
            out.push_str(&r);
        }
        Ok(out)
    }

    /// `t = pre(t) + min_pos(to_k - pre(t))` as an ite chain with sentinel
    /// -1 for "no positive candidate yet".
    fn calendar(&mut self, i: usize) -> String {
        let tp = sym(TIME_VAR, i - 1);
        let mut acc = "(- 1.0)".to_string();
        for to in &self.tp.program.timeouts {
            let s = sym(to, i);
            let d = format!("(- {s} {tp})");
            acc = format!("(ite (and (>= {s} 0.0) (> {d} 0.0) (or (<= {acc} 0.0) (< {d} {acc}))) {d} {acc})");
        }
        let m = sym("minpos", i);
        format!(
            "(declare-const {m} Real)\n(assert (= {m} {acc}))\n(assert (> {m} 0.0))\n(assert (= {} (+ {tp} {m})))\n",
            sym(TIME_VAR, i)
        )
    }

    fn restriction(&mut self, i: usize) -> Result<Option<String>, CheckError> {
        let Some((dom, plan, observed)) = &self.restrict else { return Ok(None) };
        let p = &self.tp.program;
        let mut out = String::new();
        let one_of = |lhs: &str, opts: Vec<String>| {
            let alts: Vec<String> = opts.iter().map(|o| format!("(= {lhs} {o})")).collect();
            format!("(assert (or {}))\n", alts.join(" "))
        };
        let prev_t = if i == 1 { "0.0".to_string() } else { sym(TIME_VAR, i - 1) };
        for slot in &plan.slots {
            match slot {
                Slot::Time => {
                    if let Some(v) = dom.pinned.as_ref().and_then(|tr| tr.get(TIME_VAR, i)) {
                        out.push_str(&one_of(&sym(TIME_VAR, i), vec![value_lit(&v)]));
                    } else if i > 1 {
                        let grid = if *observed { &dom.time_grid[..] } else { &dom.time_grid[..1] };
                        let t = sym(TIME_VAR, i);
                        let mut alts: Vec<String> =
                            grid.iter().map(|d| format!("(= {t} (+ {prev_t} {}))", real_lit(d))).collect();
                        for to in &p.timeouts {
                            let s = sym(to, i - 1);
                            alts.push(format!("(and (>= {s} 0.0) (= {t} {s}))"));
                        }
                        let _ = writeln!(out, "(assert (or {}))", alts.join(" "));
                    }
                }
                Slot::Free(v) => {
                    let s = sym(v, i);
                    if let Some(x) = dom.pinned.as_ref().and_then(|tr| tr.get(v, i)) {
                        out.push_str(&one_of(&s, vec![value_lit(&x)]));
                        continue;
                    }
                    if let Some(o) = dom.overrides.get(v) {
                        out.push_str(&one_of(&s, o.iter().map(value_lit).collect()));
                        continue;
                    }
                    match p.var_type(v) {
                        Some(TypeTag::Bool) => {}
                        Some(TypeTag::Int) => {
                            out.push_str(&one_of(&s, dom.int_grid.iter().map(|n| value_lit(&Value::Int(n.clone()))).collect()))
                        }
                        _ if p.is_timeout(v) => {
                            let mut alts = vec![format!("(< {s} 0.0)")];
                            alts.extend(dom.time_grid.iter().map(|d| format!("(= {s} (+ {prev_t} {}))", real_lit(d))));
                            let _ = writeln!(out, "(assert (or {}))", alts.join(" "));
                        }
                        _ => out.push_str(&one_of(&s, dom.real_grid.iter().map(real_lit).collect())),
                    }
                }
                Slot::TimeCal | Slot::Def(..) => {}
            }
        }
        Ok(Some(out))
    }

    /// Decodes steps `1..=len` of a model into a trace. Absent symbols take
    /// default values.
    pub fn decode(&self, model: &HashMap<String, ModelValue>, len: usize) -> TimedTrace {
        decode_counterexample(model, &self.tp.program, len)
    }
}

/// Trace over the program's variables read from model constants named
/// `x@i`. Negative timeout values decode to Infinity.
pub fn decode_counterexample(model: &HashMap<String, ModelValue>, p: &SpecProgram, len: usize) -> TimedTrace {
    let mut tr = TimedTrace::new(p.vars.clone());
    let num = |name: &str, i: usize| match model.get(&format!("{name}@{i}")) {
        Some(ModelValue::Num(r)) => Some(r.clone()),
        _ => None,
    };
    for i in 1..=len {
        let t = num(TIME_VAR, i).unwrap_or_else(Rational::zero);
        let row = p
            .vars
            .iter()
            .map(|d| match d.ty {
                TypeTag::Bool => Value::Bool(matches!(model.get(&format!("{}@{i}", d.name)), Some(ModelValue::Bool(true)))),
                TypeTag::Int => Value::Int(num(&d.name, i).map(|r| r.to_integer()).unwrap_or_default()),
                TypeTag::Real => match num(&d.name, i) {
                    Some(r) if p.is_timeout(&d.name) && r.is_negative() => Value::Infinity,
                    Some(r) => Value::Real(r),
                    None => Value::Real(Rational::zero()),
                },
            })
            .collect();
        tr.push(t, row);
    }
    tr
}

fn header(title: &str) -> String {
    format!("; {title}\n(set-option :produce-models true)\n(set-logic ALL)\n")
}

/// A self-contained script. For `Bmc(k)` it asserts that the property
/// fails somewhere within `k` steps and ends with `check-sat` and
/// `get-model`. For `KInduction(k)` it holds the base case and the
/// inductive step as two push/pop blocks; both unsat means proved.
pub fn emit_smtlib(p: &SpecProgram, prop: &Expr, mode: SmtMode) -> Result<String, CheckError> {
    let lemmas: Vec<Expr> = p.lemmas.iter().map(|l| l.expr.clone()).collect();
    match mode {
        SmtMode::Bmc(k) => {
            let mut e = Encoder::new(p, false)?;
            let mut out = header(&format!("bounded model check, depth {k}"));
            out.push_str(&e.unroll_to(k)?);
            let mut fails = vec![];
            for i in 1..=k {
                fails.push(format!("(not {})", e.bool_at(prop, i)?));
                out.push_str(&e.take());
            }
            let _ = writeln!(out, "(assert (or {}))\n(check-sat)\n(get-model)", fails.join(" "));
            Ok(out)
        }
        SmtMode::KInduction(k) => {
            let mut out = header(&format!("k-induction, k = {k}"));
            let mut base = Encoder::new(p, false)?;
            lemmas.iter().for_each(|l| base.assume(l.clone()));
            out.push_str("; base case\n(push 1)\n");
            out.push_str(&base.unroll_to(k)?);
            let mut fails = vec![];
            for i in 1..=k {
                fails.push(format!("(not {})", base.bool_at(prop, i)?));
                out.push_str(&base.take());
            }
            let _ = writeln!(out, "(assert (or {}))\n(check-sat)\n(pop 1)", fails.join(" "));
            let mut step = Encoder::new(p, true)?;
            lemmas.iter().for_each(|l| step.assume(l.clone()));
            out.push_str("; inductive step\n(push 1)\n");
            out.push_str(&step.unroll_to(k + 1)?);
            for i in 1..=k {
                let h = step.bool_at(prop, i)?;
                out.push_str(&step.take());
                let _ = writeln!(out, "(assert {h})");
            }
            let last = step.bool_at(prop, k + 1)?;
            out.push_str(&step.take());
            let _ = writeln!(out, "(assert (not {last}))\n(check-sat)\n(pop 1)");
            Ok(out)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_expr, parse_program};

    #[test]
    fn literals_are_exact() {
        assert_eq!(value_lit(&Value::real(15, 1)), "15.0");
        assert_eq!(value_lit(&Value::real(-1, 3)), "(- (/ 1.0 3.0))");
        assert_eq!(value_lit(&Value::int(-4)), "(- 4)");
    }

    #[test]
    fn calendar_is_an_ite_chain() {
        let p = parse_program("a, b : real; timeout a, b; a = (5.0 -> pre(a)); b = (7.0 -> pre(b));").unwrap();
        let s = emit_smtlib(&p, &parse_expr("true").unwrap(), SmtMode::Bmc(2)).unwrap();
        assert!(s.contains("(ite (and (>= |b@2| 0.0)"), "{s}");
        assert!(s.contains("(assert (= |t@2| (+ |t@1| |minpos@2|)))"));
    }

    #[test]
    fn nonlinear_is_rejected() {
        let p = parse_program("x, y : int; x = y * y;").unwrap();
        assert!(matches!(
            emit_smtlib(&p, &parse_expr("true").unwrap(), SmtMode::Bmc(1)),
            Err(CheckError::Unsupported(_))
        ));
    }

    #[test]
    fn decode_sentinel_is_infinity() {
        let p = parse_program("to : real; timeout to;").unwrap();
        let mut m = HashMap::new();
        m.insert("to@1".to_string(), ModelValue::Num(Rational::from_integer((-1).into())));
        m.insert("t@1".to_string(), ModelValue::Num(Rational::zero()));
        let tr = decode_counterexample(&m, &p, 1);
        assert_eq!(tr.get("to", 1), Some(Value::Infinity));
    }
}
