//! Well-formedness of temporal operators.
//!
//! Every `pre` must sit inside the right-hand side of an `->`, and two nested
//! `pre`s need an `->` between them. `initz(e)` reads `e` one step back, so
//! its operand resets the guard exactly like `pre`.

use std::fmt;

use crate::ast::Expr;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WfViolation {
    /// Child-index path from the checked root to the offending `pre`.
    pub path: Vec<usize>,
    pub expr: Expr,
}

impl fmt::Display for WfViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let path: Vec<String> = self.path.iter().map(|i| i.to_string()).collect();
        write!(
            f,
            "`pre` outside the right-hand side of `->` at path [{}]: {}",
            path.join("."),
            self.expr
        )
    }
}

impl std::error::Error for WfViolation {}

/// Accepts iff every `pre` is guarded. On failure reports the innermost
/// offending `pre` (deepest path, first in traversal order on ties).
pub fn check_well_formed(e: &Expr) -> Result<(), WfViolation> {
    let mut worst: Option<Vec<usize>> = None;
    let mut path = Vec::new();
    walk(e, false, &mut path, &mut worst);
    match worst {
        None => Ok(()),
        Some(p) => Err(WfViolation {
            expr: e.at_path(&p).cloned().unwrap_or_else(|| e.clone()),
            path: p,
        }),
    }
}

pub fn is_well_formed(e: &Expr) -> bool {
    check_well_formed(e).is_ok()
}

fn walk(e: &Expr, guarded: bool, path: &mut Vec<usize>, worst: &mut Option<Vec<usize>>) {
    match e {
        Expr::Arrow(a, b) => {
            path.push(0);
            walk(a, guarded, path, worst);
            path.pop();
            path.push(1);
            walk(b, true, path, worst);
            path.pop();
        }
        Expr::Pre(a) => {
            if !guarded && worst.as_ref().is_none_or(|w| path.len() > w.len()) {
                *worst = Some(path.clone());
            }
            path.push(0);
            walk(a, false, path, worst);
            path.pop();
        }
        Expr::Initz(a) => {
            path.push(0);
            walk(a, false, path, worst);
            path.pop();
        }
        _ => {
            for (i, c) in e.children().into_iter().enumerate() {
                path.push(i);
                walk(c, guarded, path, worst);
                path.pop();
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> Expr {
        Expr::var("x")
    }

    #[test]
    fn nested_pre_separated_by_arrow_is_ok() {
        let e = Expr::arrow(Expr::tt(), Expr::pre(Expr::arrow(x(), Expr::pre(x()))));
        assert!(check_well_formed(&e).is_ok());
    }

    #[test]
    fn nested_pre_without_arrow_is_rejected() {
        let e = Expr::arrow(Expr::tt(), Expr::pre(Expr::pre(x())));
        let v = check_well_formed(&e).unwrap_err();
        assert_eq!(v.path, vec![1, 0]);
        assert_eq!(v.expr, Expr::pre(x()));
    }

    #[test]
    fn no_temporal_operators() {
        assert!(check_well_formed(&Expr::add(x(), Expr::int(1))).is_ok());
    }

    #[test]
    fn pre_in_arrow_lhs_is_rejected() {
        let e = Expr::arrow(Expr::pre(x()), x());
        assert_eq!(check_well_formed(&e).unwrap_err().path, vec![0]);
    }

    #[test]
    fn innermost_violation_reported() {
        let e = Expr::pre(Expr::pre(x()));
        assert_eq!(check_well_formed(&e).unwrap_err().path, vec![0]);
    }

    #[test]
    fn initz_resets_guard() {
        let ok = Expr::initz(Expr::arrow(x(), Expr::pre(x())));
        assert!(is_well_formed(&ok));
        let bad = Expr::arrow(Expr::tt(), Expr::initz(Expr::pre(x())));
        assert!(!is_well_formed(&bad));
        assert!(is_well_formed(&Expr::hist(Expr::arrow(Expr::tt(), Expr::pre(x())))));
    }
}
