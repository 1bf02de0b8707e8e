//! Evaluation over timed traces, the calendar time model and admissibility.

mod eval;
mod trace;

use std::fmt;

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::ast::{Expr, SpecProgram};
use crate::value::{Rational, Value};

pub use eval::{eval_bool, eval_expr, eval_historically, eval_z};
pub use trace::TimedTrace;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("step {step}: `pre` evaluated at the first step")]
    PreAtFirstStep { step: usize },
    #[error("step {step}: calendar exhausted, no timeout lies strictly in the future")]
    CalendarExhausted { step: usize },
    #[error("step {step}: division by zero")]
    DivisionByZero { step: usize },
    #[error("step {step}: type error: {msg}")]
    Type { step: usize, msg: String },
    #[error("unknown variable `{0}`")]
    UnknownVar(String),
    #[error("step {step} is outside the trace (length {len})")]
    StepOutOfRange { step: usize, len: usize },
    #[error("{0}")]
    Unsupported(String),
}

/// Least strictly positive finite element; `None` when there is none.
pub fn min_pos(deltas: &[Value]) -> Option<Rational> {
    deltas
        .iter()
        .filter_map(|d| d.as_real())
        .filter(|r| r.is_positive())
        .min()
        .cloned()
}

/// Next time stamp under the calendar: 0 initially, otherwise
/// `prev + min_pos(timeout - prev)`.
pub fn advance_time(prev_t: Option<&Rational>, timeouts: &[Value], step: usize) -> Result<Rational, EvalError> {
    let Some(prev) = prev_t else { return Ok(Rational::zero()) };
    let deltas: Vec<Value> = timeouts
        .iter()
        .map(|v| match v {
            Value::Real(r) => Value::Real(r - prev),
            other => other.clone(),
        })
        .collect();
    min_pos(&deltas).map(|m| prev + m).ok_or(EvalError::CalendarExhausted { step })
}

/// Why a trace is not admissible.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub step: usize,
    /// Constraint label, or one of `time-progress`, `calendar`, `timeout-range`.
    pub constraint: String,
    pub detail: Option<String>,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "step {}: constraint {} violated", self.step, self.constraint)?;
        if let Some(d) = &self.detail {
            write!(f, " ({d})")?;
        }
        Ok(())
    }
}

/// Calendar and timeout-range check at one step of a timed program.
pub fn check_calendar_step(p: &SpecProgram, tr: &TimedTrace, step: usize) -> Result<(), Violation> {
    let mut timeouts = Vec::with_capacity(p.timeouts.len());
    for name in &p.timeouts {
        let v = tr.get(name, step).ok_or_else(|| Violation {
            step,
            constraint: "calendar".into(),
            detail: Some(format!("timeout `{name}` missing from trace")),
        })?;
        match &v {
            Value::Infinity => {}
            Value::Real(r) if !r.is_negative() => {}
            _ => {
                return Err(Violation {
                    step,
                    constraint: "timeout-range".into(),
                    detail: Some(format!("timeout `{name}` = {v} is neither >= 0 nor infinity")),
                })
            }
        }
        timeouts.push(v);
    }
    let prev = if step == 1 { None } else { Some(tr.time(step - 1)) };
    match advance_time(prev, &timeouts, step) {
        Ok(expected) if &expected == tr.time(step) => Ok(()),
        Ok(expected) => Err(Violation {
            step,
            constraint: "calendar".into(),
            detail: Some(format!("t = {} but the calendar gives {}", Value::Real(tr.time(step).clone()), Value::Real(expected))),
        }),
        Err(e) => Err(Violation { step, constraint: "calendar".into(), detail: Some(e.to_string()) }),
    }
}

/// Checks the transition constraints at a single step.
pub fn check_step(p: &SpecProgram, tr: &TimedTrace, step: usize) -> Result<(), Violation> {
    if step > 1 && tr.time(step - 1) >= tr.time(step) {
        return Err(Violation { step, constraint: "time-progress".into(), detail: None });
    }
    if step == 1 && tr.time(1).is_negative() {
        return Err(Violation { step, constraint: "time-progress".into(), detail: Some("negative time".into()) });
    }
    if p.is_timed() {
        check_calendar_step(p, tr, step)?;
    }
    for (k, c) in p.transition.iter().enumerate() {
        match eval_bool(&c.expr, tr, step) {
            Ok(true) => {}
            Ok(false) => return Err(Violation { step, constraint: p.constraint_label(k), detail: None }),
            Err(e) => return Err(Violation { step, constraint: p.constraint_label(k), detail: Some(e.to_string()) }),
        }
    }
    Ok(())
}

/// Every transition constraint, the calendar and strict time progress hold
/// at every step. Reports the first violation.
pub fn trace_admissible(p: &SpecProgram, tr: &TimedTrace) -> Result<(), Violation> {
    for name in p.vars.iter().map(|d| &d.name) {
        if !tr.has_var(name) {
            return Err(Violation { step: 1, constraint: "state".into(), detail: Some(format!("trace lacks `{name}`")) });
        }
    }
    (1..=tr.len()).try_for_each(|i| check_step(p, tr, i))
}

/// `Ok(None)` when `prop` holds at every step, else the first failing step.
pub fn check_invariant_on_trace(prop: &Expr, tr: &TimedTrace) -> Result<Option<usize>, EvalError> {
    for i in 1..=tr.len() {
        if !eval_bool(prop, tr, i)? {
            return Ok(Some(i));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::{TypeTag, VarDecl};
    use crate::parser::parse_program;
    use crate::value::rat;

    fn counter_trace(xs: &[i64]) -> TimedTrace {
        let mut tr = TimedTrace::new(vec![VarDecl::new("x", TypeTag::Int)]);
        for (k, x) in xs.iter().enumerate() {
            tr.push(rat(k as i64, 1), vec![Value::int(*x)]);
        }
        tr
    }

    #[test]
    fn min_pos_examples() {
        assert_eq!(min_pos(&[Value::real(20, 1), Value::real(40, 1)]), Some(rat(20, 1)));
        assert_eq!(min_pos(&[Value::real(-5, 1), Value::real(15, 1), Value::Infinity]), Some(rat(15, 1)));
        assert_eq!(min_pos(&[Value::real(-5, 1), Value::real(-10, 1)]), None);
    }

    #[test]
    fn advance_time_examples() {
        assert_eq!(advance_time(Some(&rat(0, 1)), &[Value::real(50, 1), Value::Infinity], 2).unwrap(), rat(50, 1));
        assert_eq!(advance_time(Some(&rat(10, 1)), &[Value::real(60, 1), Value::real(15, 1)], 2).unwrap(), rat(15, 1));
        assert_eq!(advance_time(None, &[], 1).unwrap(), rat(0, 1));
        assert_eq!(
            advance_time(Some(&rat(10, 1)), &[Value::real(5, 1)], 3),
            Err(EvalError::CalendarExhausted { step: 3 })
        );
    }

    #[test]
    fn counter_admissibility() {
        let p = parse_program("x : int; x = (0 -> pre(x) + 1);").unwrap();
        assert!(trace_admissible(&p, &counter_trace(&[0, 1, 2])).is_ok());
        let v = trace_admissible(&p, &counter_trace(&[0, 1, 5])).unwrap_err();
        assert_eq!(v.step, 3);
        let prop = crate::parser::parse_expr("x < 2").unwrap();
        assert_eq!(check_invariant_on_trace(&prop, &counter_trace(&[0, 1, 2])).unwrap(), Some(3));
    }

    #[test]
    fn calendar_forbids_time_regression() {
        let p = parse_program("to : real; timeout to; to = (10.0 -> ite(pre(to) = pre(t), pre(t) + 10.0, pre(to)));")
            .unwrap();
        let mut tr = TimedTrace::new(p.vars.clone());
        tr.push(rat(0, 1), vec![Value::real(10, 1)]);
        tr.push(rat(10, 1), vec![Value::real(10, 1)]);
        tr.push(rat(20, 1), vec![Value::real(20, 1)]);
        assert!(trace_admissible(&p, &tr).is_ok());
        let mut skip = tr.prefix(2);
        skip.push(rat(25, 1), vec![Value::real(20, 1)]);
        assert_eq!(trace_admissible(&p, &skip).unwrap_err().constraint, "calendar");
        let mut bad = TimedTrace::new(p.vars.clone());
        bad.push(rat(0, 1), vec![Value::real(10, 1)]);
        bad.push(rat(0, 1), vec![Value::real(20, 1)]);
        assert_eq!(trace_admissible(&p, &bad).unwrap_err().constraint, "time-progress");
    }
}
