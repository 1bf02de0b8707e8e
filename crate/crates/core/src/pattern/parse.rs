use num_traits::Zero;

use crate::ast::Expr;
use crate::lexer::Tok;
use crate::parser::{ParseError, Parser};
use crate::value::Rational;

use super::{Interval, Pattern, PatternError};

fn perr(p: &Parser, source: PatternError) -> ParseError {
    ParseError::Pattern { span: p.span(), source }
}

fn keyword(p: &mut Parser, kw: &str) -> Result<(), ParseError> {
    if p.eat_kw(kw) {
        return Ok(());
    }
    match p.peek().clone() {
        Tok::Ident(s) => Err(perr(p, PatternError::UnknownKeyword(s))),
        other => p.error(format!("expected `{kw}`, found {}", other.describe())),
    }
}

/// A bound; a leading minus is accepted so it can be reported as negative.
fn bound(p: &mut Parser) -> Result<Rational, ParseError> {
    let neg = p.eat_sym("-");
    let r = p.number()?;
    Ok(if neg { -r } else { r })
}

fn interval(p: &mut Parser) -> Result<Interval, ParseError> {
    let start = p.span();
    let low_closed = if p.eat_sym("[") {
        true
    } else if p.eat_sym("(") {
        false
    } else {
        return p.error(format!("expected `[` or `(`, found {}", p.peek().describe()));
    };
    let low = bound(p)?;
    p.expect_sym(",")?;
    let high = bound(p)?;
    let high_closed = if p.eat_sym("]") {
        true
    } else if p.eat_sym(")") {
        false
    } else {
        return p.error(format!("expected `]` or `)`, found {}", p.peek().describe()));
    };
    Interval::new(low, high, low_closed, high_closed).map_err(|source| ParseError::Pattern { span: start, source })
}

/// Parses a pattern phrase. When `lead` is given, the event expression has
/// already been consumed and the parser sits on `occurs`.
pub fn parse_pattern_phrase(p: &mut Parser, lead: Option<Expr>) -> Result<Pattern, ParseError> {
    if let Some(event) = lead {
        keyword(p, "occurs")?;
        if p.eat_kw("each") {
            let period = p.number()?;
            let jitter = if p.eat_kw("with") {
                keyword(p, "jitter")?;
                p.number()?
            } else {
                Rational::zero()
            };
            return Pattern::periodic(event, period, jitter).map_err(|e| perr(p, e));
        }
        if p.eat_kw("sporadic") {
            keyword(p, "with")?;
            keyword(p, "IAT")?;
            let iat = p.number()?;
            let jitter = if p.eat_kw("and") {
                keyword(p, "jitter")?;
                p.number()?
            } else {
                Rational::zero()
            };
            return Pattern::sporadic(event, iat, jitter).map_err(|e| perr(p, e));
        }
        return match p.peek().clone() {
            Tok::Ident(s) => Err(perr(p, PatternError::UnknownKeyword(s))),
            other => p.error(format!("expected `each` or `sporadic`, found {}", other.describe())),
        };
    }
    if p.eat_kw("always") {
        return Ok(Pattern::Always { cond: p.expr()? });
    }
    if p.eat_kw("whenever") {
        let cause = p.expr()?;
        keyword(p, "occurs")?;
        let second = p.expr()?;
        if p.eat_kw("holds") {
            keyword(p, "during")?;
            let iv = interval(p)?;
            return Ok(Pattern::WheneverEventCondition { cause, cond: second, iv });
        }
        let exclusive = p.eat_kw("exclusively");
        // `occurs` may be dropped before `during`
        p.eat_kw("occurs");
        keyword(p, "during")?;
        let iv = interval(p)?;
        return Ok(Pattern::WheneverEventEvent { cause, effect: second, iv, exclusive });
    }
    if p.eat_kw("when") {
        let cond = p.expr()?;
        keyword(p, "holds")?;
        keyword(p, "during")?;
        let cond_iv = interval(p)?;
        let event = p.expr()?;
        keyword(p, "occurs")?;
        keyword(p, "during")?;
        let event_iv = interval(p)?;
        return Ok(Pattern::WhenConditionEvent { cond, cond_iv, event, event_iv });
    }
    match p.peek().clone() {
        Tok::Ident(s) => Err(perr(p, PatternError::UnknownKeyword(s))),
        other => p.error(format!("expected a pattern phrase, found {}", other.describe())),
    }
}

/// Parses a standalone pattern phrase such as
/// `whenever a occurs b occurs during [10.0, 20.0]`.
pub fn parse_pattern(text: &str) -> Result<Pattern, ParseError> {
    let mut p = Parser::new(text)?;
    let pat = if p.is_kw("whenever") || p.is_kw("when") || p.is_kw("always") {
        parse_pattern_phrase(&mut p, None)?
    } else {
        let e = p.expr()?;
        parse_pattern_phrase(&mut p, Some(e))?
    };
    p.expect_eof()?;
    Ok(pat)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::value::rat;

    #[test]
    fn event_event() {
        let p = parse_pattern("whenever thread_start occurs thread_stop occurs during [10.0, 20.0]").unwrap();
        assert_eq!(
            p,
            Pattern::WheneverEventEvent {
                cause: Expr::var("thread_start"),
                effect: Expr::var("thread_stop"),
                iv: Interval::closed(rat(10, 1), rat(20, 1)).unwrap(),
                exclusive: false,
            }
        );
        assert_eq!(p.to_string(), "whenever thread_start occurs thread_stop occurs during [10.0, 20.0]");
    }

    #[test]
    fn sporadic_and_periodic() {
        let p = parse_pattern("new_message occurs sporadic with IAT 50.0").unwrap();
        assert_eq!(p, Pattern::Sporadic { event: Expr::var("new_message"), iat: rat(50, 1), jitter: rat(0, 1) });
        let p = parse_pattern("m occurs each 10000.0 with jitter 50.0").unwrap();
        assert_eq!(p, Pattern::Periodic { event: Expr::var("m"), period: rat(10000, 1), jitter: rat(50, 1) });
        assert!(parse_pattern("m occurs each 10.0 with jitter 5.0").is_err());
    }

    #[test]
    fn exclusive_without_occurs() {
        let p = parse_pattern("whenever a occurs b exclusively during (0.0, 5.0]").unwrap();
        match p {
            Pattern::WheneverEventEvent { exclusive, iv, .. } => {
                assert!(exclusive);
                assert!(!iv.low_closed && iv.high_closed);
            }
            _ => panic!(),
        }
    }

    #[test]
    fn errors() {
        let e = parse_pattern("whenever a occurs b occurs during [20.0, 10.0]").unwrap_err();
        assert!(matches!(e, ParseError::Pattern { source: PatternError::BoundOrder { .. }, .. }), "{e}");
        let e = parse_pattern("whenever a occurs b occurs during [-1.0, 10.0]").unwrap_err();
        assert!(matches!(e, ParseError::Pattern { source: PatternError::NegativeBound, .. }));
        let e = parse_pattern("whenever a occurs b happens during [1.0, 10.0]").unwrap_err();
        assert!(matches!(e, ParseError::Pattern { source: PatternError::UnknownKeyword(ref k), .. } if k == "happens"));
    }

    #[test]
    fn condition_patterns() {
        let p = parse_pattern("whenever a occurs x > 0 holds during [0.0, 5.0]").unwrap();
        assert_eq!(p.kind_name(), "whenever-event-condition");
        let p = parse_pattern("when busy holds during [5.0, 5.0] alarm occurs during [0.0, 10.0]").unwrap();
        assert_eq!(p.kind_name(), "when-condition-event");
        assert_eq!(parse_pattern(&p.to_string()).unwrap(), p);
    }
}
