//! Real-time requirement patterns: phrase parsing, direct trace-set
//! membership, and lowering to observers or transition constraints.

mod lower;
mod membership;
mod parse;

use std::fmt;

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::ast::Expr;
use crate::print::const_text;
use crate::value::{Rational, Value};

pub use lower::{
    compile_constraint, compile_prop_side_condition, compile_property_observer, lower_observer, FreshNames,
    LoweringMode, ObserverBundle,
};
pub use membership::{membership_prop_cons, pattern_membership, Membership, PropCons};
pub use parse::{parse_pattern, parse_pattern_phrase};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum PatternError {
    #[error("interval lower bound {low} exceeds upper bound {high}")]
    BoundOrder { low: String, high: String },
    #[error("interval bounds must be non-negative")]
    NegativeBound,
    #[error("{what} must be strictly positive")]
    NonPositive { what: &'static str },
    #[error("jitter must be non-negative")]
    NegativeJitter,
    #[error("jitter {jitter} must be less than {limit}")]
    JitterTooLarge { jitter: String, limit: String },
    #[error("unknown pattern keyword `{0}`")]
    UnknownKeyword(String),
    #[error("{0}")]
    Syntax(String),
    #[error("lemma `{lemma}` refers to unknown variable `{name}`")]
    UnknownLemmaVar { lemma: String, name: String },
    #[error("pattern `{pattern}` is not supported in {mode} mode: {reason}")]
    Unsupported { pattern: String, mode: &'static str, reason: &'static str },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interval {
    pub low: Rational,
    pub high: Rational,
    pub low_closed: bool,
    pub high_closed: bool,
}

impl Interval {
    pub fn new(low: Rational, high: Rational, low_closed: bool, high_closed: bool) -> Result<Self, PatternError> {
        if low.is_negative() || high.is_negative() {
            return Err(PatternError::NegativeBound);
        }
        if low > high {
            return Err(PatternError::BoundOrder { low: const_text(&Value::Real(low)), high: const_text(&Value::Real(high)) });
        }
        Ok(Interval { low, high, low_closed, high_closed })
    }

    pub fn closed(low: Rational, high: Rational) -> Result<Self, PatternError> {
        Interval::new(low, high, true, true)
    }

    /// Does an elapsed duration `d` satisfy the lower bound?
    pub fn above_low(&self, d: &Rational) -> bool {
        if self.low_closed {
            *d >= self.low
        } else {
            *d > self.low
        }
    }

    pub fn below_high(&self, d: &Rational) -> bool {
        if self.high_closed {
            *d <= self.high
        } else {
            *d < self.high
        }
    }

    pub fn contains(&self, d: &Rational) -> bool {
        self.above_low(d) && self.below_high(d)
    }

    /// The window is definitely over once `d` fails the upper bound.
    pub fn expired(&self, d: &Rational) -> bool {
        !self.below_high(d)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}{}, {}{}",
            if self.low_closed { '[' } else { '(' },
            const_text(&Value::Real(self.low.clone())),
            const_text(&Value::Real(self.high.clone())),
            if self.high_closed { ']' } else { ')' }
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Pattern {
    /// whenever `cause` occurs `effect` occurs during `iv`
    WheneverEventEvent { cause: Expr, effect: Expr, iv: Interval, exclusive: bool },
    /// whenever `cause` occurs `cond` holds during `iv`
    WheneverEventCondition { cause: Expr, cond: Expr, iv: Interval },
    /// when `cond` holds during `cond_iv` `event` occurs during `event_iv`
    WhenConditionEvent { cond: Expr, cond_iv: Interval, event: Expr, event_iv: Interval },
    /// always `cond`
    Always { cond: Expr },
    /// `event` occurs each `period` with jitter `jitter`
    Periodic { event: Expr, period: Rational, jitter: Rational },
    /// `event` occurs sporadic with IAT `iat` and jitter `jitter`
    Sporadic { event: Expr, iat: Rational, jitter: Rational },
}

impl Pattern {
    pub fn periodic(event: Expr, period: Rational, jitter: Rational) -> Result<Pattern, PatternError> {
        if !period.is_positive() {
            return Err(PatternError::NonPositive { what: "period" });
        }
        if jitter.is_negative() {
            return Err(PatternError::NegativeJitter);
        }
        let limit = &period / Rational::from_integer(2.into());
        if jitter >= limit {
            return Err(PatternError::JitterTooLarge {
                jitter: const_text(&Value::Real(jitter)),
                limit: const_text(&Value::Real(limit)),
            });
        }
        Ok(Pattern::Periodic { event, period, jitter })
    }

    pub fn sporadic(event: Expr, iat: Rational, jitter: Rational) -> Result<Pattern, PatternError> {
        if !iat.is_positive() {
            return Err(PatternError::NonPositive { what: "inter-arrival time" });
        }
        if jitter.is_negative() {
            return Err(PatternError::NegativeJitter);
        }
        if jitter >= iat {
            return Err(PatternError::JitterTooLarge {
                jitter: const_text(&Value::Real(jitter)),
                limit: const_text(&Value::Real(iat)),
            });
        }
        Ok(Pattern::Sporadic { event, iat, jitter })
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Pattern::WheneverEventEvent { .. } => "whenever-event-event",
            Pattern::WheneverEventCondition { .. } => "whenever-event-condition",
            Pattern::WhenConditionEvent { .. } => "when-condition-event",
            Pattern::Always { .. } => "always",
            Pattern::Periodic { .. } => "periodic",
            Pattern::Sporadic { .. } => "sporadic",
        }
    }

    /// Expressions the pattern reads from the host.
    pub fn exprs(&self) -> Vec<&Expr> {
        match self {
            Pattern::WheneverEventEvent { cause, effect, .. } => vec![cause, effect],
            Pattern::WheneverEventCondition { cause, cond, .. } => vec![cause, cond],
            Pattern::WhenConditionEvent { cond, event, .. } => vec![cond, event],
            Pattern::Always { cond } => vec![cond],
            Pattern::Periodic { event, .. } | Pattern::Sporadic { event, .. } => vec![event],
        }
    }

    pub fn map_exprs(&self, f: &dyn Fn(&Expr) -> Expr) -> Pattern {
        match self {
            Pattern::WheneverEventEvent { cause, effect, iv, exclusive } => Pattern::WheneverEventEvent {
                cause: f(cause),
                effect: f(effect),
                iv: iv.clone(),
                exclusive: *exclusive,
            },
            Pattern::WheneverEventCondition { cause, cond, iv } => {
                Pattern::WheneverEventCondition { cause: f(cause), cond: f(cond), iv: iv.clone() }
            }
            Pattern::WhenConditionEvent { cond, cond_iv, event, event_iv } => Pattern::WhenConditionEvent {
                cond: f(cond),
                cond_iv: cond_iv.clone(),
                event: f(event),
                event_iv: event_iv.clone(),
            },
            Pattern::Always { cond } => Pattern::Always { cond: f(cond) },
            Pattern::Periodic { event, period, jitter } => {
                Pattern::Periodic { event: f(event), period: period.clone(), jitter: jitter.clone() }
            }
            Pattern::Sporadic { event, iat, jitter } => {
                Pattern::Sporadic { event: f(event), iat: iat.clone(), jitter: jitter.clone() }
            }
        }
    }
}

fn num_text(r: &Rational) -> String {
    const_text(&Value::Real(r.clone()))
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pattern::WheneverEventEvent { cause, effect, iv, exclusive } => write!(
                f,
                "whenever {cause} occurs {effect} {}occurs during {iv}",
                if *exclusive { "exclusively " } else { "" }
            ),
            Pattern::WheneverEventCondition { cause, cond, iv } => {
                write!(f, "whenever {cause} occurs {cond} holds during {iv}")
            }
            Pattern::WhenConditionEvent { cond, cond_iv, event, event_iv } => {
                write!(f, "when {cond} holds during {cond_iv} {event} occurs during {event_iv}")
            }
            Pattern::Always { cond } => write!(f, "always {cond}"),
            Pattern::Periodic { event, period, jitter } => {
                write!(f, "{event} occurs each {}", num_text(period))?;
                if !jitter.is_zero() {
                    write!(f, " with jitter {}", num_text(jitter))?;
                }
                Ok(())
            }
            Pattern::Sporadic { event, iat, jitter } => {
                write!(f, "{event} occurs sporadic with IAT {}", num_text(iat))?;
                if !jitter.is_zero() {
                    write!(f, " and jitter {}", num_text(jitter))?;
                }
                Ok(())
            }
        }
    }
}
