use num_traits::Zero;

use crate::ast::Expr;
use crate::semantics::{eval_bool, EvalError, TimedTrace};
use crate::value::Rational;

use super::{Interval, Pattern};

/// Bounded-trace membership verdict.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Membership {
    In,
    /// No violation yet, but the obligation raised at `step` has an open
    /// window at the end of the trace.
    InPending { step: usize },
    /// The obligation raised at `witness` cannot be met by any extension.
    Out { witness: usize },
}

impl Membership {
    /// Pending obligations count as members.
    pub fn is_member(&self) -> bool {
        !matches!(self, Membership::Out { .. })
    }
}

/// The pair of bounded verdicts for the side condition and the constraint
/// over-approximation of an event-event window.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PropCons {
    pub prop: Membership,
    pub cons: Membership,
}

fn series(e: &Expr, tr: &TimedTrace) -> Result<Vec<bool>, EvalError> {
    (1..=tr.len()).map(|i| eval_bool(e, tr, i)).collect()
}

fn elapsed(tr: &TimedTrace, i: usize, j: usize) -> Rational {
    tr.time(j) - tr.time(i)
}

/// Shared bounded rule: an undischarged obligation from step `i` is a
/// violation once the trace reaches a time past the window.
fn settle(tr: &TimedTrace, iv: &Interval, i: usize, discharged: bool, pending: &mut Option<usize>) -> Option<Membership> {
    if discharged {
        return None;
    }
    if iv.expired(&elapsed(tr, i, tr.len())) {
        return Some(Membership::Out { witness: i });
    }
    pending.get_or_insert(i);
    None
}

fn finish(pending: Option<usize>) -> Membership {
    match pending {
        Some(step) => Membership::InPending { step },
        None => Membership::In,
    }
}

fn event_event(c: &[bool], e: &[bool], iv: &Interval, exclusive: bool, tr: &TimedTrace) -> Membership {
    let n = tr.len();
    let mut pending = None;
    for i in (1..=n).filter(|&i| c[i - 1]) {
        let ok = (i + 1..=n).any(|j| e[j - 1] && iv.contains(&elapsed(tr, i, j)));
        if let Some(out) = settle(tr, iv, i, ok, &mut pending) {
            return out;
        }
    }
    if exclusive {
        for j in (1..=n).filter(|&j| e[j - 1]) {
            if !(1..j).any(|i| c[i - 1] && iv.contains(&elapsed(tr, i, j))) {
                return Membership::Out { witness: j };
            }
        }
    }
    finish(pending)
}

/// Trigger steps of a condition-event pattern: the first step of each
/// continuous `cond` stretch at which the stretch has lasted a duration in
/// `iv`.
pub(crate) fn condition_triggers(cond: &[bool], iv: &Interval, tr: &TimedTrace) -> Vec<bool> {
    let mut out = vec![false; cond.len()];
    let mut start = 0usize;
    let mut fired = false;
    for i in 1..=cond.len() {
        if !cond[i - 1] {
            fired = false;
            continue;
        }
        if i == 1 || !cond[i - 2] {
            start = i;
            fired = false;
        }
        if !fired && iv.contains(&elapsed(tr, start, i)) {
            out[i - 1] = true;
            fired = true;
        }
    }
    out
}

/// Direct evaluation of the pattern's trace set on a finite trace.
pub fn pattern_membership(pat: &Pattern, tr: &TimedTrace) -> Result<Membership, EvalError> {
    let n = tr.len();
    Ok(match pat {
        Pattern::WheneverEventEvent { cause, effect, iv, exclusive } => {
            event_event(&series(cause, tr)?, &series(effect, tr)?, iv, *exclusive, tr)
        }
        Pattern::WheneverEventCondition { cause, cond, iv } => {
            let (c, k) = (series(cause, tr)?, series(cond, tr)?);
            for i in (1..=n).filter(|&i| c[i - 1]) {
                if (i..=n).any(|j| iv.contains(&elapsed(tr, i, j)) && !k[j - 1]) {
                    return Ok(Membership::Out { witness: i });
                }
            }
            Membership::In
        }
        Pattern::WhenConditionEvent { cond, cond_iv, event, event_iv } => {
            let trig = condition_triggers(&series(cond, tr)?, cond_iv, tr);
            event_event(&trig, &series(event, tr)?, event_iv, false, tr)
        }
        Pattern::Always { cond } => match series(cond, tr)?.iter().position(|b| !b) {
            Some(k) => Membership::Out { witness: k + 1 },
            None => Membership::In,
        },
        Pattern::Sporadic { event, iat, jitter } => {
            let e = series(event, tr)?;
            let gap = iat - jitter;
            for i in (1..=n).filter(|&i| e[i - 1]) {
                if (i + 1..=n).any(|j| e[j - 1] && elapsed(tr, i, j) < gap) {
                    return Ok(Membership::Out { witness: i });
                }
            }
            Membership::In
        }
        Pattern::Periodic { event, period, jitter } => {
            // feasible anchors form an interval [lo, hi] within [0, period]
            let e = series(event, tr)?;
            let (mut lo, mut hi) = (Rational::zero(), period.clone());
            let mut before = Rational::zero();
            for i in 1..=n {
                let shift = &before * period;
                let t = tr.time(i);
                let upper = t - &shift - jitter;
                if upper > lo {
                    lo = upper;
                }
                if e[i - 1] {
                    let lower = t - &shift + jitter;
                    if lower < hi {
                        hi = lower;
                    }
                    before += Rational::from_integer(1.into());
                }
                if lo > hi {
                    return Ok(Membership::Out { witness: i });
                }
            }
            Membership::In
        }
    })
}

/// Bounded verdicts for the side condition and the constraint
/// over-approximation. Defined for event-event windows only.
pub fn membership_prop_cons(pat: &Pattern, tr: &TimedTrace) -> Result<PropCons, EvalError> {
    let Pattern::WheneverEventEvent { cause, effect, iv, .. } = pat else {
        return Err(EvalError::Unsupported(format!("side condition and constraint sets are defined for event-event windows, not `{pat}`")));
    };
    let (c, e) = (series(cause, tr)?, series(effect, tr)?);
    let n = tr.len();

    let mut prop = Membership::In;
    'outer: for i in (1..=n).filter(|&i| c[i - 1]) {
        for j in (i + 1..=n).filter(|&j| c[j - 1] && iv.below_high(&elapsed(tr, i, j))) {
            if !(i + 1..=j).any(|k| e[k - 1] && iv.above_low(&elapsed(tr, i, k))) {
                prop = Membership::Out { witness: i };
                break 'outer;
            }
        }
    }

    let mut pending = None;
    let mut cons = None;
    for i in (1..=n).filter(|&i| c[i - 1]) {
        let ok = (i + 1..=n).any(|j| {
            let d = elapsed(tr, i, j);
            (e[j - 1] && iv.contains(&d)) || (c[j - 1] && iv.below_high(&d))
        });
        if let Some(out) = settle(tr, iv, i, ok, &mut pending) {
            cons = Some(out);
            break;
        }
    }
    Ok(PropCons { prop, cons: cons.unwrap_or_else(|| finish(pending)) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::{TypeTag, VarDecl};
    use crate::pattern::parse_pattern;
    use crate::value::{rat, Value};

    /// Trace over booleans `a`, `b` given (time, a, b) rows.
    fn tr(rows: &[(i64, bool, bool)]) -> TimedTrace {
        let mut t = TimedTrace::new(vec![VarDecl::new("a", TypeTag::Bool), VarDecl::new("b", TypeTag::Bool)]);
        for (time, a, b) in rows {
            t.push(rat(*time, 1), vec![Value::Bool(*a), Value::Bool(*b)]);
        }
        t
    }

    fn window() -> Pattern {
        parse_pattern("whenever a occurs b occurs during [10.0, 20.0]").unwrap()
    }

    #[test]
    fn event_event_examples() {
        let p = window();
        assert!(pattern_membership(&p, &tr(&[(0, true, false), (15, false, true)])).unwrap().is_member());
        assert_eq!(
            pattern_membership(&p, &tr(&[(0, true, false), (25, false, true), (30, false, false)])).unwrap(),
            Membership::Out { witness: 1 }
        );
        assert_eq!(pattern_membership(&p, &tr(&[(0, false, true), (5, false, false)])).unwrap(), Membership::In);
        assert_eq!(
            pattern_membership(&p, &tr(&[(0, true, false), (5, false, false)])).unwrap(),
            Membership::InPending { step: 1 }
        );
    }

    #[test]
    fn sporadic_example() {
        let p = parse_pattern("a occurs sporadic with IAT 50.0").unwrap();
        assert_eq!(pattern_membership(&p, &tr(&[(0, true, false), (40, true, false)])).unwrap(), Membership::Out { witness: 1 });
        assert_eq!(
            pattern_membership(&p, &tr(&[(0, true, false), (50, true, false), (120, true, false)])).unwrap(),
            Membership::In
        );
    }

    #[test]
    fn cons_is_weaker_than_patt() {
        let p = window();
        let t = tr(&[(0, true, false), (15, true, false), (40, false, false)]);
        let pc = membership_prop_cons(&p, &t).unwrap();
        assert!(!pattern_membership(&p, &t).unwrap().is_member());
        assert_eq!(pc.prop, Membership::Out { witness: 1 });
        // the second cause at 15 discharges the first; the second expires at 35
        assert_eq!(pc.cons, Membership::Out { witness: 2 });
        let t = tr(&[(0, true, false), (15, true, false), (30, false, false)]);
        let pc = membership_prop_cons(&p, &t).unwrap();
        assert!(pc.cons.is_member());
        assert!(!pattern_membership(&p, &t).unwrap().is_member());
    }

    #[test]
    fn periodic_anchor() {
        let p = parse_pattern("a occurs each 10.0 with jitter 1.0").unwrap();
        let ok = tr(&[(0, false, false), (4, true, false), (15, true, false), (23, true, false)]);
        assert!(pattern_membership(&p, &ok).unwrap().is_member());
        let late = tr(&[(0, false, false), (4, true, false), (17, false, false)]);
        assert_eq!(pattern_membership(&p, &late).unwrap(), Membership::Out { witness: 3 });
    }

    #[test]
    fn condition_triggers_first_step_in_window() {
        let t = tr(&[(0, true, false), (5, true, false), (10, true, false), (15, false, false), (20, true, false)]);
        let iv = Interval::closed(rat(5, 1), rat(100, 1)).unwrap();
        assert_eq!(condition_triggers(&[true, true, true, false, true], &iv, &t), vec![false, true, false, false, false]);
    }
}
