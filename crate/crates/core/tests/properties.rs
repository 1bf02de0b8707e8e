use proptest::prelude::*;
use proptest::strategy::ValueTree;
use proptest::test_runner::{Config, TestRunner};

use rtc_core::ast::{BinOp, Expr, TypeTag, UnOp, VarDecl};
use rtc_core::parser::parse_expr;
use rtc_core::print::expr_to_string;
use rtc_core::semantics::{eval_bool, TimedTrace};
use rtc_core::value::{rat, Value};
use rtc_core::wf::check_well_formed;

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        Just(Expr::tt()),
        Just(Expr::ff()),
        (0i64..20).prop_map(Expr::int),
        (0i64..40).prop_map(|n| Expr::real(rat(n, 4))),
        prop::sample::select(vec!["a", "b", "x", "y", "t"]).prop_map(Expr::var),
    ]
}

fn expr() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(5, 48, 3, |inner| {
        let bin = prop::sample::select(vec![
            BinOp::Add,
            BinOp::Sub,
            BinOp::Mul,
            BinOp::Div,
            BinOp::Or,
            BinOp::And,
            BinOp::Implies,
            BinOp::Eq,
            BinOp::Lt,
            BinOp::Le,
            BinOp::Gt,
            BinOp::Ge,
        ]);
        prop_oneof![
            inner.clone().prop_map(Expr::not),
            inner.clone().prop_map(Expr::neg),
            (bin, inner.clone(), inner.clone()).prop_map(|(op, a, b)| Expr::bin(op, a, b)),
            (inner.clone(), inner.clone(), inner.clone()).prop_map(|(c, a, b)| Expr::ite(c, a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::arrow(a, b)),
            inner.clone().prop_map(Expr::pre),
            inner.clone().prop_map(Expr::hist),
            inner.prop_map(Expr::initz),
        ]
    })
}

#[test]
fn print_then_parse_is_identity() {
    let mut runner = TestRunner::new(Config { cases: 2000, ..Config::default() });
    runner
        .run(&expr(), |e| {
            let text = expr_to_string(&e);
            let back = parse_expr(&text).map_err(|err| TestCaseError::fail(format!("{text}: {err}")))?;
            prop_assert_eq!(&back, &e, "printed as {}", text);
            Ok(())
        })
        .unwrap();
}

/// Every `pre` needs an `->` right-hand side between it and the nearest
/// enclosing `pre` or `initz` (or the root). Computed from explicit
/// root-to-node paths.
fn naive_well_formed(e: &Expr) -> bool {
    #[derive(Clone, Copy)]
    enum Step {
        ArrowRhs,
        Reset,
        Other,
    }
    fn nodes<'a>(e: &'a Expr, trail: Vec<Step>, out: &mut Vec<(&'a Expr, Vec<Step>)>) {
        out.push((e, trail.clone()));
        let kids = e.children();
        for (i, c) in kids.iter().enumerate() {
            let step = match e {
                Expr::Arrow(..) if i == 1 => Step::ArrowRhs,
                Expr::Pre(_) | Expr::Initz(_) => Step::Reset,
                _ => Step::Other,
            };
            let mut t = trail.clone();
            t.push(step);
            nodes(c, t, out);
        }
    }
    let mut all = vec![];
    nodes(e, vec![], &mut all);
    all.iter().filter(|(n, _)| matches!(n, Expr::Pre(_))).all(|(_, trail)| {
        let mut crossings = 0;
        for s in trail.iter().rev() {
            match s {
                Step::ArrowRhs => crossings += 1,
                Step::Reset => break,
                Step::Other => {}
            }
        }
        crossings > 0
    })
}

#[test]
fn well_formedness_matches_naive_oracle() {
    let mut runner = TestRunner::new(Config { cases: 1000, ..Config::default() });
    let mut accepted = 0u32;
    let mut rejected = 0u32;
    runner
        .run(&expr(), |e| {
            let verdict = check_well_formed(&e);
            prop_assert_eq!(verdict.is_ok(), naive_well_formed(&e), "{}", e);
            if let Err(v) = verdict {
                prop_assert!(matches!(e.at_path(&v.path), Some(Expr::Pre(_))), "path {:?} in {}", v.path, e);
            }
            Ok(())
        })
        .unwrap();
    // both classes must actually occur
    let mut rng = TestRunner::deterministic();
    for _ in 0..1000 {
        let e = expr().new_tree(&mut rng).unwrap().current();
        if check_well_formed(&e).is_ok() {
            accepted += 1;
        } else {
            rejected += 1;
        }
    }
    assert!(accepted > 100 && rejected > 100, "accepted {accepted}, rejected {rejected}");
}

#[test]
fn well_formedness_examples() {
    let wf = |s: &str| check_well_formed(&parse_expr(s).unwrap()).is_ok();
    assert!(!wf("true -> pre(pre(x))"));
    assert!(wf("true -> pre(true -> pre(x))"));
    assert!(!wf("pre(x)"));
    assert!(wf("0 -> pre(x) + 1"));
}

fn bool_trace(bits: &[bool]) -> TimedTrace {
    let mut tr = TimedTrace::new(vec![VarDecl::new("b", TypeTag::Bool)]);
    for (i, b) in bits.iter().enumerate() {
        tr.push(rat(5 * i as i64, 1), vec![Value::Bool(*b)]);
    }
    tr
}

proptest! {
    #[test]
    fn hist_is_a_running_conjunction(bits in prop::collection::vec(any::<bool>(), 1..12)) {
        let tr = bool_trace(&bits);
        let h = Expr::hist(Expr::var("b"));
        for i in 1..=bits.len() {
            prop_assert_eq!(eval_bool(&h, &tr, i).unwrap(), bits[..i].iter().all(|b| *b));
        }
    }

    #[test]
    fn initz_is_true_then_one_step_late(bits in prop::collection::vec(any::<bool>(), 1..12)) {
        let tr = bool_trace(&bits);
        let z = Expr::initz(Expr::var("b"));
        prop_assert!(eval_bool(&z, &tr, 1).unwrap());
        for i in 2..=bits.len() {
            prop_assert_eq!(eval_bool(&z, &tr, i).unwrap(), bits[i - 2]);
        }
    }

    #[test]
    fn initz_hist_is_hist_of_the_past(bits in prop::collection::vec(any::<bool>(), 1..12)) {
        let tr = bool_trace(&bits);
        let e = Expr::initz(Expr::hist(Expr::var("b")));
        for i in 1..=bits.len() {
            prop_assert_eq!(eval_bool(&e, &tr, i).unwrap(), bits[..i - 1].iter().all(|b| *b));
        }
    }

    #[test]
    fn negation_and_arrow(bits in prop::collection::vec(any::<bool>(), 1..12)) {
        let tr = bool_trace(&bits);
        let e = Expr::arrow(Expr::tt(), Expr::Unary(UnOp::Not, Box::new(Expr::pre(Expr::var("b")))));
        for i in 1..=bits.len() {
            prop_assert_eq!(eval_bool(&e, &tr, i).unwrap(), i == 1 || !bits[i - 2]);
        }
    }
}
