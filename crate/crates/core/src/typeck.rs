//! Static typing. No implicit int/real coercion.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::ast::{BinOp, Expr, SpecProgram, TypeTag, UnOp, TIME_VAR};
use crate::value::Value;

/// Type of an expression. `extended` marks reals that may be Infinity.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Ty {
    pub tag: TypeTag,
    pub extended: bool,
}

impl Ty {
    fn plain(tag: TypeTag) -> Ty {
        Ty { tag, extended: false }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{context}, at {}: {msg}", fmt_path(.path))]
pub struct TypeError {
    /// Which constraint or property.
    pub context: String,
    /// Child indices from the root of that expression.
    pub path: Vec<usize>,
    pub msg: String,
}

fn fmt_path(p: &[usize]) -> String {
    if p.is_empty() {
        "root".into()
    } else {
        p.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(".")
    }
}

/// A program whose every constraint, property and lemma is boolean.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypedProgram {
    pub program: SpecProgram,
    env: BTreeMap<String, Ty>,
}

impl TypedProgram {
    pub fn var_ty(&self, name: &str) -> Option<Ty> {
        self.env.get(name).copied()
    }

    /// Type of an arbitrary expression over this program's variables.
    pub fn type_of(&self, e: &Expr) -> Result<Ty, TypeError> {
        type_of(e, &|n| self.env.get(n).copied())
    }
}

impl fmt::Display for Ty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.extended {
            write!(f, "{}+inf", self.tag)
        } else {
            write!(f, "{}", self.tag)
        }
    }
}

fn env_of(p: &SpecProgram) -> BTreeMap<String, Ty> {
    let mut env: BTreeMap<String, Ty> =
        p.vars.iter().map(|d| (d.name.clone(), Ty { tag: d.ty, extended: p.is_timeout(&d.name) })).collect();
    env.insert(TIME_VAR.into(), Ty::plain(TypeTag::Real));
    env
}

/// Type of `e` given variable types from `env`.
pub fn type_of(e: &Expr, env: &dyn Fn(&str) -> Option<Ty>) -> Result<Ty, TypeError> {
    let mut path = vec![];
    go(e, env, &mut path).map_err(|(path, msg)| TypeError { context: "expression".into(), path, msg })
}

type R = Result<Ty, (Vec<usize>, String)>;

fn go(e: &Expr, env: &dyn Fn(&str) -> Option<Ty>, path: &mut Vec<usize>) -> R {
    let fail = |path: &Vec<usize>, msg: String| Err((path.clone(), msg));
    let child = |k: usize, c: &Expr, path: &mut Vec<usize>| -> R {
        path.push(k);
        let r = go(c, env, path);
        path.pop();
        r
    };
    let boolean = Ty::plain(TypeTag::Bool);
    match e {
        Expr::Const(Value::Bool(_)) => Ok(boolean),
        Expr::Const(Value::Int(_)) => Ok(Ty::plain(TypeTag::Int)),
        Expr::Const(Value::Real(_)) => Ok(Ty::plain(TypeTag::Real)),
        Expr::Const(Value::Infinity) => Ok(Ty { tag: TypeTag::Real, extended: true }),
        Expr::Var(n) => match env(n) {
            Some(t) => Ok(t),
            None => fail(path, format!("unknown variable `{n}`")),
        },
        Expr::Unary(UnOp::Not, a) => {
            let t = child(0, a, path)?;
            if t.tag != TypeTag::Bool {
                return fail(path, format!("`not` needs bool, found {t}"));
            }
            Ok(boolean)
        }
        Expr::Unary(UnOp::Neg, a) => {
            let t = child(0, a, path)?;
            if t.tag == TypeTag::Bool || t.extended {
                return fail(path, format!("cannot negate {t}"));
            }
            Ok(t)
        }
        Expr::Binary(op, a, b) => {
            let (ta, tb) = (child(0, a, path)?, child(1, b, path)?);
            if op.is_logic() {
                if ta.tag != TypeTag::Bool || tb.tag != TypeTag::Bool {
                    return fail(path, format!("`{}` needs bool operands, found {ta} and {tb}", op.symbol()));
                }
                return Ok(boolean);
            }
            if ta.tag != tb.tag {
                return fail(path, format!("`{}` applied to {ta} and {tb}", op.symbol()));
            }
            if op.is_comparison() {
                if ta.tag == TypeTag::Bool && *op != BinOp::Eq {
                    return fail(path, format!("`{}` is not defined on bool", op.symbol()));
                }
                return Ok(boolean);
            }
            if ta.tag == TypeTag::Bool {
                return fail(path, format!("arithmetic `{}` on bool", op.symbol()));
            }
            Ok(Ty { tag: ta.tag, extended: ta.extended || tb.extended })
        }
        Expr::Ite(c, a, b) => {
            let tc = child(0, c, path)?;
            if tc.tag != TypeTag::Bool {
                return fail(path, format!("ite condition is {tc}"));
            }
            let (ta, tb) = (child(1, a, path)?, child(2, b, path)?);
            if ta.tag != tb.tag {
                return fail(path, format!("ite branches disagree: {ta} and {tb}"));
            }
            Ok(Ty { tag: ta.tag, extended: ta.extended || tb.extended })
        }
        Expr::Arrow(a, b) => {
            let (ta, tb) = (child(0, a, path)?, child(1, b, path)?);
            if ta.tag != tb.tag {
                return fail(path, format!("`->` sides disagree: {ta} and {tb}"));
            }
            Ok(Ty { tag: ta.tag, extended: ta.extended || tb.extended })
        }
        Expr::Pre(a) => child(0, a, path),
        Expr::Hist(a) | Expr::Initz(a) => {
            let t = child(0, a, path)?;
            if t.tag != TypeTag::Bool {
                let op = if matches!(e, Expr::Hist(_)) { "hist" } else { "initz" };
                return fail(path, format!("`{op}` needs bool, found {t}"));
            }
            Ok(boolean)
        }
    }
}

fn expect_bool(e: &Expr, env: &BTreeMap<String, Ty>, context: String) -> Result<(), TypeError> {
    let mut path = vec![];
    match go(e, &|n| env.get(n).copied(), &mut path) {
        Ok(t) if t.tag == TypeTag::Bool => Ok(()),
        Ok(t) => Err(TypeError { context, path: vec![], msg: format!("expected bool, found {t}") }),
        Err((path, msg)) => Err(TypeError { context, path, msg }),
    }
}

/// Checks every constraint, property and lemma, and that timeouts are real.
pub fn type_check(p: &SpecProgram) -> Result<TypedProgram, TypeError> {
    let env = env_of(p);
    for name in &p.timeouts {
        match p.var_type(name) {
            Some(TypeTag::Real) => {}
            Some(other) => {
                return Err(TypeError {
                    context: format!("timeout `{name}`"),
                    path: vec![],
                    msg: format!("timeouts must be real, `{name}` is {other}"),
                })
            }
            None => {
                return Err(TypeError { context: format!("timeout `{name}`"), path: vec![], msg: "undeclared".into() })
            }
        }
    }
    for (k, c) in p.transition.iter().enumerate() {
        expect_bool(&c.expr, &env, format!("constraint {}", p.constraint_label(k)))?;
    }
    for prop in &p.properties {
        expect_bool(&prop.expr, &env, format!("property {}", prop.name))?;
    }
    for l in &p.lemmas {
        expect_bool(&l.expr, &env, format!("lemma {}", l.name))?;
    }
    Ok(TypedProgram { program: p.clone(), env })
}

/// Checks `prop` against an already typed program.
pub fn check_property(tp: &TypedProgram, prop: &Expr, context: &str) -> Result<(), TypeError> {
    expect_bool(prop, &tp.env, context.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_expr, parse_program};

    fn ty(src: &str) -> Result<Ty, TypeError> {
        let env = |n: &str| match n {
            "b" => Some(Ty::plain(TypeTag::Bool)),
            "x" => Some(Ty::plain(TypeTag::Real)),
            _ => None,
        };
        type_of(&parse_expr(src).unwrap(), &env)
    }

    #[test]
    fn examples() {
        assert_eq!(ty("ite(b, 1, 2)").unwrap().tag, TypeTag::Int);
        assert!(ty("ite(b, 1, 2.0)").unwrap_err().msg.contains("branches"));
        assert!(ty("hist(x)").unwrap_err().msg.contains("bool"));
        assert!(ty("x + 1").is_err());
        assert!(ty("x < infinity").is_ok());
    }

    #[test]
    fn error_path_points_at_subexpression() {
        let e = ty("b and (x + 1 > 0.0)").unwrap_err();
        assert_eq!(e.path, vec![1, 0]);
    }

    #[test]
    fn timeouts_must_be_real() {
        let p = parse_program("n : int; timeout n; n = 0;").unwrap();
        assert!(type_check(&p).is_err());
        let p = parse_program("x : int; x = (0 -> pre(x) + 1);").unwrap();
        assert!(type_check(&p).is_ok());
    }
}
