use std::cmp::Ordering;

use num_traits::Zero;

use crate::ast::{BinOp, Expr, UnOp};
use crate::value::{euclid_div, Value};

use super::{EvalError, TimedTrace};

fn type_err(step: usize, msg: impl Into<String>) -> EvalError {
    EvalError::Type { step, msg: msg.into() }
}

/// Value of `e` at step `i` (1-based) of `tr`.
pub fn eval_expr(e: &Expr, tr: &TimedTrace, i: usize) -> Result<Value, EvalError> {
    if i == 0 || i > tr.len() {
        return Err(EvalError::StepOutOfRange { step: i, len: tr.len() });
    }
    eval(e, tr, i)
}

pub fn eval_bool(e: &Expr, tr: &TimedTrace, i: usize) -> Result<bool, EvalError> {
    eval_expr(e, tr, i)?.as_bool().ok_or_else(|| type_err(i, format!("`{e}` is not boolean")))
}

/// `hist(e)` at step `i`: `e` held at every step up to `i`.
pub fn eval_historically(e: &Expr, tr: &TimedTrace, i: usize) -> Result<bool, EvalError> {
    for k in 1..=i {
        if !eval_bool(e, tr, k)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `initz(e)` at step `i`: true at step 1, else `e` at `i - 1`.
pub fn eval_z(e: &Expr, tr: &TimedTrace, i: usize) -> Result<bool, EvalError> {
    if i == 1 {
        Ok(true)
    } else {
        eval_bool(e, tr, i - 1)
    }
}

fn bool_at(e: &Expr, tr: &TimedTrace, i: usize) -> Result<bool, EvalError> {
    eval(e, tr, i)?.as_bool().ok_or_else(|| type_err(i, format!("`{e}` is not boolean")))
}

fn eval(e: &Expr, tr: &TimedTrace, i: usize) -> Result<Value, EvalError> {
    match e {
        Expr::Const(v) => Ok(v.clone()),
        Expr::Var(name) => tr.get(name, i).ok_or_else(|| EvalError::UnknownVar(name.clone())),
        Expr::Unary(UnOp::Not, a) => Ok(Value::Bool(!bool_at(a, tr, i)?)),
        Expr::Unary(UnOp::Neg, a) => match eval(a, tr, i)? {
            Value::Int(n) => Ok(Value::Int(-n)),
            Value::Real(r) => Ok(Value::Real(-r)),
            other => Err(type_err(i, format!("cannot negate {other}"))),
        },
        Expr::Binary(op, a, b) => match op {
            BinOp::And => Ok(Value::Bool(bool_at(a, tr, i)? && bool_at(b, tr, i)?)),
            BinOp::Or => Ok(Value::Bool(bool_at(a, tr, i)? || bool_at(b, tr, i)?)),
            BinOp::Implies => Ok(Value::Bool(!bool_at(a, tr, i)? || bool_at(b, tr, i)?)),
            _ => binary(*op, eval(a, tr, i)?, eval(b, tr, i)?, i),
        },
        Expr::Ite(c, a, b) => {
            if bool_at(c, tr, i)? {
                eval(a, tr, i)
            } else {
                eval(b, tr, i)
            }
        }
        Expr::Arrow(a, b) => {
            if i == 1 {
                eval(a, tr, i)
            } else {
                eval(b, tr, i)
            }
        }
        Expr::Pre(a) => {
            if i == 1 {
                Err(EvalError::PreAtFirstStep { step: i })
            } else {
                eval(a, tr, i - 1)
            }
        }
        Expr::Hist(a) => {
            for k in 1..=i {
                if !bool_at(a, tr, k)? {
                    return Ok(Value::Bool(false));
                }
            }
            Ok(Value::Bool(true))
        }
        Expr::Initz(a) => Ok(Value::Bool(i == 1 || bool_at(a, tr, i - 1)?)),
    }
}

fn binary(op: BinOp, a: Value, b: Value, i: usize) -> Result<Value, EvalError> {
    if op.is_comparison() {
        let ord = match (&a, &b) {
            (Value::Bool(x), Value::Bool(y)) if op == BinOp::Eq => return Ok(Value::Bool(x == y)),
            _ => a.num_cmp(&b).ok_or_else(|| type_err(i, format!("cannot compare {a} and {b}")))?,
        };
        let r = match op {
            BinOp::Eq => ord == Ordering::Equal,
            BinOp::Lt => ord == Ordering::Less,
            BinOp::Le => ord != Ordering::Greater,
            BinOp::Gt => ord == Ordering::Greater,
            BinOp::Ge => ord != Ordering::Less,
            _ => unreachable!(),
        };
        return Ok(Value::Bool(r));
    }
    match (a, b) {
        (Value::Int(x), Value::Int(y)) => Ok(Value::Int(match op {
            BinOp::Add => x + y,
            BinOp::Sub => x - y,
            BinOp::Mul => x * y,
            BinOp::Div => {
                if y.is_zero() {
                    return Err(EvalError::DivisionByZero { step: i });
                }
                euclid_div(&x, &y)
            }
            _ => unreachable!(),
        })),
        (Value::Real(x), Value::Real(y)) => Ok(Value::Real(match op {
            BinOp::Add => x + y,
            BinOp::Sub => x - y,
            BinOp::Mul => x * y,
            BinOp::Div => {
                if y.is_zero() {
                    return Err(EvalError::DivisionByZero { step: i });
                }
                x / y
            }
            _ => unreachable!(),
        })),
        (a, b) => Err(type_err(i, format!("cannot apply `{}` to {a} and {b}", op.symbol()))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::{TypeTag, VarDecl};
    use crate::parser::parse_expr;
    use crate::value::rat;

    fn bools(name: &str, xs: &[bool]) -> TimedTrace {
        let mut tr = TimedTrace::new(vec![VarDecl::new(name, TypeTag::Bool)]);
        for (k, x) in xs.iter().enumerate() {
            tr.push(rat(k as i64, 1), vec![Value::Bool(*x)]);
        }
        tr
    }

    #[test]
    fn arrow_true_then_false() {
        let tr = bools("a", &[true, true, true]);
        let e = parse_expr("true -> false").unwrap();
        let got: Vec<bool> = (1..=3).map(|i| eval_bool(&e, &tr, i).unwrap()).collect();
        assert_eq!(got, vec![true, false, false]);
    }

    #[test]
    fn pre_at_first_step_is_error() {
        let tr = bools("a", &[true]);
        let e = parse_expr("pre(a)").unwrap();
        assert_eq!(eval_expr(&e, &tr, 1), Err(EvalError::PreAtFirstStep { step: 1 }));
    }

    #[test]
    fn hist_and_initz() {
        let a = Expr::var("a");
        let tr = bools("a", &[true, true, false, true]);
        let h: Vec<bool> = (1..=4).map(|i| eval_historically(&a, &tr, i).unwrap()).collect();
        assert_eq!(h, vec![true, true, false, false]);
        let tr = bools("a", &[false, true, false]);
        let z: Vec<bool> = (1..=3).map(|i| eval_z(&a, &tr, i).unwrap()).collect();
        assert_eq!(z, vec![true, false, true]);
    }

    #[test]
    fn ite_identity_and_division() {
        let mut tr = TimedTrace::new(vec![VarDecl::new("x", TypeTag::Int)]);
        tr.push(rat(0, 1), vec![Value::int(-7)]);
        assert_eq!(eval_expr(&parse_expr("ite(true, x, 0)").unwrap(), &tr, 1).unwrap(), Value::int(-7));
        assert_eq!(eval_expr(&parse_expr("x / 2").unwrap(), &tr, 1).unwrap(), Value::int(-4));
        assert_eq!(eval_expr(&parse_expr("x / 0").unwrap(), &tr, 1), Err(EvalError::DivisionByZero { step: 1 }));
    }

    #[test]
    fn infinity_comparisons() {
        let tr = bools("a", &[true]);
        assert_eq!(eval_bool(&parse_expr("5.0 < infinity").unwrap(), &tr, 1), Ok(true));
        assert_eq!(eval_bool(&parse_expr("infinity <= 5.0").unwrap(), &tr, 1), Ok(false));
        assert_eq!(eval_bool(&parse_expr("infinity = infinity").unwrap(), &tr, 1), Ok(true));
    }
}
