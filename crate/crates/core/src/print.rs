//! Pretty printing to the surface syntax and to canonical s-expressions.

use std::fmt::Write;

use crate::ast::{BinOp, Expr, SpecProgram, UnOp};
use crate::value::{to_decimal, Rational, Value};

const ARROW: u8 = 0;
const IMPLIES: u8 = 1;
const OR: u8 = 2;
const AND: u8 = 3;
const NOT: u8 = 4;
const CMP: u8 = 5;
const ADD: u8 = 6;
const MUL: u8 = 7;
const NEG: u8 = 8;

fn level(op: BinOp) -> u8 {
    match op {
        BinOp::Implies => IMPLIES,
        BinOp::Or => OR,
        BinOp::And => AND,
        BinOp::Eq | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => CMP,
        BinOp::Add | BinOp::Sub => ADD,
        BinOp::Mul | BinOp::Div => MUL,
    }
}

pub fn const_text(v: &Value) -> String {
    match v {
        Value::Bool(b) => b.to_string(),
        Value::Int(i) => i.to_string(),
        Value::Real(r) => real_literal(r),
        Value::Infinity => "infinity".to_string(),
    }
}

fn real_literal(r: &Rational) -> String {
    match to_decimal(r) {
        Some(s) => s,
        None => format!("rat({}, {})", r.numer(), r.denom()),
    }
}

/// Surface syntax that re-parses to the same tree.
pub fn expr_to_string(e: &Expr) -> String {
    fmt_expr(e, ARROW)
}

fn paren(s: String, own: u8, ctx: u8) -> String {
    if own < ctx {
        format!("({s})")
    } else {
        s
    }
}

fn fmt_expr(e: &Expr, ctx: u8) -> String {
    match e {
        Expr::Const(v) => {
            let s = const_text(v);
            // negative literals bind like an atom only at token level
            if s.starts_with('-') && ctx > NEG {
                format!("({s})")
            } else {
                s
            }
        }
        Expr::Var(v) => v.clone(),
        Expr::Unary(UnOp::Not, a) => paren(format!("not {}", fmt_expr(a, NOT)), NOT, ctx),
        Expr::Unary(UnOp::Neg, a) => {
            let inner = match a.as_ref() {
                Expr::Const(Value::Int(_) | Value::Real(_)) => format!("({})", const_text(match a.as_ref() {
                    Expr::Const(v) => v,
                    _ => unreachable!(),
                })),
                other => fmt_expr(other, NEG),
            };
            let sep = if inner.starts_with('-') { " " } else { "" };
            paren(format!("-{sep}{inner}"), NEG, ctx)
        }
        Expr::Binary(op, a, b) => {
            let l = level(*op);
            let (lc, rc) = match op {
                BinOp::Implies => (l + 1, l),
                _ if op.is_comparison() => (l + 1, l + 1),
                _ => (l, l + 1),
            };
            paren(format!("{} {} {}", fmt_expr(a, lc), op.symbol(), fmt_expr(b, rc)), l, ctx)
        }
        Expr::Arrow(a, b) => paren(format!("{} -> {}", fmt_expr(a, ARROW + 1), fmt_expr(b, ARROW)), ARROW, ctx),
        Expr::Ite(c, a, b) => format!(
            "ite({}, {}, {})",
            fmt_expr(c, ARROW),
            fmt_expr(a, ARROW),
            fmt_expr(b, ARROW)
        ),
        Expr::Pre(a) => format!("pre({})", fmt_expr(a, ARROW)),
        Expr::Hist(a) => format!("hist({})", fmt_expr(a, ARROW)),
        Expr::Initz(a) => format!("initz({})", fmt_expr(a, ARROW)),
    }
}

impl std::fmt::Display for Expr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&expr_to_string(self))
    }
}

pub fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            _ => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Program text in the `.rtc` surface syntax.
pub fn program_to_string(p: &SpecProgram) -> String {
    let mut out = String::new();
    for d in &p.vars {
        let _ = writeln!(out, "var {} : {};", d.name, d.ty);
    }
    if !p.timeouts.is_empty() {
        let _ = writeln!(out, "timeout {};", p.timeouts.join(", "));
    }
    for c in &p.transition {
        match &c.name {
            Some(n) => {
                let _ = writeln!(out, "assert {} : {};", quote(n), c.expr);
            }
            None => {
                let _ = writeln!(out, "assert {};", c.expr);
            }
        }
    }
    for l in &p.lemmas {
        let _ = writeln!(out, "lemma {} : {};", quote(&l.name), l.expr);
    }
    for prop in &p.properties {
        let _ = writeln!(out, "property {} : {};", quote(&prop.name), prop.expr);
    }
    out
}

/// Canonical s-expression used by golden tests.
pub fn expr_sexpr(e: &Expr) -> String {
    match e {
        Expr::Const(Value::Bool(b)) => format!("(bool {b})"),
        Expr::Const(Value::Int(i)) => format!("(int {i})"),
        Expr::Const(Value::Real(r)) => format!("(real {}/{})", r.numer(), r.denom()),
        Expr::Const(Value::Infinity) => "infinity".to_string(),
        Expr::Var(v) => format!("(var {v})"),
        Expr::Unary(UnOp::Not, a) => format!("(not {})", expr_sexpr(a)),
        Expr::Unary(UnOp::Neg, a) => format!("(neg {})", expr_sexpr(a)),
        Expr::Binary(op, a, b) => format!("({} {} {})", op.symbol(), expr_sexpr(a), expr_sexpr(b)),
        Expr::Ite(c, a, b) => format!("(ite {} {} {})", expr_sexpr(c), expr_sexpr(a), expr_sexpr(b)),
        Expr::Arrow(a, b) => format!("(arrow {} {})", expr_sexpr(a), expr_sexpr(b)),
        Expr::Pre(a) => format!("(pre {})", expr_sexpr(a)),
        Expr::Hist(a) => format!("(hist {})", expr_sexpr(a)),
        Expr::Initz(a) => format!("(initz {})", expr_sexpr(a)),
    }
}

pub fn program_sexpr(p: &SpecProgram) -> String {
    let vars: Vec<String> = p.vars.iter().map(|d| format!("({} {})", d.name, d.ty)).collect();
    let trans: Vec<String> = p.transition.iter().map(|c| expr_sexpr(&c.expr)).collect();
    let props: Vec<String> = p
        .properties
        .iter()
        .map(|q| format!("({} {})", quote(&q.name), expr_sexpr(&q.expr)))
        .collect();
    format!(
        "(program (vars{}) (timeouts{}) (transition{}) (properties{}))",
        prefixed(&vars),
        prefixed(&p.timeouts),
        prefixed(&trans),
        prefixed(&props)
    )
}

fn prefixed(items: &[String]) -> String {
    items.iter().map(|s| format!(" {s}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::value::rat;

    #[test]
    fn counter_prints_with_arrow_parenthesized() {
        let e = Expr::eq(Expr::var("x"), Expr::arrow(Expr::int(0), Expr::add(Expr::pre(Expr::var("x")), Expr::int(1))));
        assert_eq!(expr_to_string(&e), "x = (0 -> pre(x) + 1)");
        assert_eq!(
            expr_sexpr(&e),
            "(= (var x) (arrow (int 0) (+ (pre (var x)) (int 1))))"
        );
    }

    #[test]
    fn literals() {
        assert_eq!(const_text(&Value::Real(rat(1, 3))), "rat(1, 3)");
        assert_eq!(const_text(&Value::Real(rat(20, 1))), "20.0");
        assert_eq!(expr_to_string(&Expr::neg(Expr::int(5))), "-(5)");
        assert_eq!(expr_to_string(&Expr::sub(Expr::var("a"), Expr::int(-5))), "a - -5");
    }
}
