//! Front end for `.rtc` files.
//!
//! A file is either a flat program (declarations, assertions, properties) or a
//! single top-level `component` block describing a system.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use thiserror::Error;

use crate::ast::{BinOp, Constraint, Expr, Property, Span, SpecProgram, TypeTag, UnOp, VarDecl, TIME_VAR};
use crate::compose::{Component, Connection, Contract, ContractBody, ContractItem, Port, PortDir, SystemModel};
use crate::lexer::{lex, Tok, Token};
use crate::pattern::{parse_pattern_phrase, Pattern, PatternError};
use crate::source::{PatternItem, PatternRole, ProgramSource, Source};
use crate::value::{Rational, Value};
use crate::wf::{check_well_formed, WfViolation};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{span}: syntax error: {msg}")]
    Syntax { span: Span, msg: String },
    #[error("{span}: duplicate declaration of `{name}`")]
    Duplicate { span: Span, name: String },
    #[error("{span}: unknown identifier `{name}`")]
    Unknown { span: Span, name: String },
    #[error("{span}: ill-formed expression: {violation}")]
    IllFormed { span: Span, violation: WfViolation },
    #[error("{span}: {source}")]
    Pattern { span: Span, source: PatternError },
}

impl ParseError {
    pub fn span(&self) -> Span {
        match self {
            ParseError::Syntax { span, .. }
            | ParseError::Duplicate { span, .. }
            | ParseError::Unknown { span, .. }
            | ParseError::IllFormed { span, .. }
            | ParseError::Pattern { span, .. } => *span,
        }
    }
}

const RESERVED: &[&str] = &[
    "var", "eq", "assert", "property", "lemma", "timeout", "assume", "guarantee", "component", "input", "output",
    "connect", "and", "or", "not", "pre", "ite", "hist", "initz", "true", "false", "infinity", "rat", "whenever",
    "when", "occurs", "during", "holds", "always", "each", "with", "jitter", "sporadic", "IAT", "exclusively",
    "nonoverlap", "bool", "int", "real", "boolean", "integer",
];

pub fn is_reserved(s: &str) -> bool {
    RESERVED.contains(&s)
}

/// A statement's body: a plain boolean expression or a pattern phrase.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ItemBody {
    Expr(Expr),
    Pattern(Pattern),
}

pub struct Parser {
    toks: Vec<Token>,
    pos: usize,
    refs: Vec<(String, Span)>,
}

impl Parser {
    pub fn new(text: &str) -> Result<Parser, ParseError> {
        let toks = lex(text).map_err(|e| ParseError::Syntax { span: e.span, msg: e.msg })?;
        Ok(Parser { toks, pos: 0, refs: Vec::new() })
    }

    pub fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    pub fn peek_at(&self, n: usize) -> &Tok {
        let i = (self.pos + n).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    pub fn span(&self) -> Span {
        self.toks[self.pos].span
    }

    pub fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    pub fn error<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::Syntax { span: self.span(), msg: msg.into() })
    }

    pub fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    pub fn is_sym(&self, sym: &str) -> bool {
        matches!(self.peek(), Tok::Sym(s) if *s == sym)
    }

    pub fn eat_kw(&mut self, kw: &str) -> bool {
        if self.is_kw(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    pub fn eat_sym(&mut self, sym: &str) -> bool {
        if self.is_sym(sym) {
            self.bump();
            true
        } else {
            false
        }
    }

    pub fn expect_kw(&mut self, kw: &str) -> Result<(), ParseError> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            self.error(format!("expected `{kw}`, found {}", self.peek().describe()))
        }
    }

    pub fn expect_sym(&mut self, sym: &str) -> Result<(), ParseError> {
        if self.eat_sym(sym) {
            Ok(())
        } else {
            self.error(format!("expected `{sym}`, found {}", self.peek().describe()))
        }
    }

    pub fn expect_eof(&mut self) -> Result<(), ParseError> {
        if matches!(self.peek(), Tok::Eof) {
            Ok(())
        } else {
            self.error(format!("unexpected {}", self.peek().describe()))
        }
    }

    pub fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) if !is_reserved(&s) => {
                self.bump();
                Ok(s)
            }
            other => self.error(format!("expected identifier, found {}", other.describe())),
        }
    }

    /// Non-negative numeric literal (integer or decimal) as a rational.
    pub fn number(&mut self) -> Result<Rational, ParseError> {
        match self.peek().clone() {
            Tok::Int(i) => {
                self.bump();
                Ok(Rational::from_integer(i))
            }
            Tok::Decimal(r) => {
                self.bump();
                Ok(r)
            }
            other => self.error(format!("expected number, found {}", other.describe())),
        }
    }

    fn take_refs(&mut self) -> Vec<(String, Span)> {
        std::mem::take(&mut self.refs)
    }

    // ---- expressions ----

    pub fn expr(&mut self) -> Result<Expr, ParseError> {
        let lhs = self.implies()?;
        if self.eat_sym("->") {
            let rhs = self.expr()?;
            return Ok(Expr::arrow(lhs, rhs));
        }
        Ok(lhs)
    }

    fn implies(&mut self) -> Result<Expr, ParseError> {
        let lhs = self.or()?;
        if self.eat_sym("=>") {
            let rhs = self.implies()?;
            return Ok(Expr::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.and()?;
        while self.eat_kw("or") {
            lhs = Expr::or(lhs, self.and()?);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.not()?;
        while self.eat_kw("and") {
            lhs = Expr::and(lhs, self.not()?);
        }
        Ok(lhs)
    }

    fn not(&mut self) -> Result<Expr, ParseError> {
        if self.eat_kw("not") {
            return Ok(Expr::not(self.not()?));
        }
        self.cmp()
    }

    fn cmp(&mut self) -> Result<Expr, ParseError> {
        let lhs = self.add()?;
        let op = match self.peek() {
            Tok::Sym("=") => BinOp::Eq,
            Tok::Sym("<") => BinOp::Lt,
            Tok::Sym("<=") => BinOp::Le,
            Tok::Sym(">") => BinOp::Gt,
            Tok::Sym(">=") => BinOp::Ge,
            _ => return Ok(lhs),
        };
        self.bump();
        let rhs = self.add()?;
        if matches!(self.peek(), Tok::Sym("=" | "<" | "<=" | ">" | ">=")) {
            return self.error("comparison operators do not chain; add parentheses");
        }
        Ok(Expr::bin(op, lhs, rhs))
    }

    fn add(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.mul()?;
        loop {
            let op = match self.peek() {
                Tok::Sym("+") => BinOp::Add,
                Tok::Sym("-") => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            lhs = Expr::bin(op, lhs, self.mul()?);
        }
    }

    fn mul(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Sym("*") => BinOp::Mul,
                Tok::Sym("/") => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            lhs = Expr::bin(op, lhs, self.unary()?);
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.is_sym("-") {
            match self.peek_at(1).clone() {
                Tok::Int(i) => {
                    self.bump();
                    self.bump();
                    return Ok(Expr::Const(Value::Int(-i)));
                }
                Tok::Decimal(r) => {
                    self.bump();
                    self.bump();
                    return Ok(Expr::Const(Value::Real(-r)));
                }
                _ => {
                    self.bump();
                    return Ok(Expr::Unary(UnOp::Neg, Box::new(self.unary()?)));
                }
            }
        }
        self.atom()
    }

    fn call1(&mut self) -> Result<Expr, ParseError> {
        self.expect_sym("(")?;
        let e = self.expr()?;
        self.expect_sym(")")?;
        Ok(e)
    }

    fn signed_int(&mut self) -> Result<BigInt, ParseError> {
        let neg = self.eat_sym("-");
        match self.peek().clone() {
            Tok::Int(i) => {
                self.bump();
                Ok(if neg { -i } else { i })
            }
            other => self.error(format!("expected integer, found {}", other.describe())),
        }
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let span = self.span();
        match self.peek().clone() {
            Tok::Int(i) => {
                self.bump();
                Ok(Expr::Const(Value::Int(i)))
            }
            Tok::Decimal(r) => {
                self.bump();
                Ok(Expr::Const(Value::Real(r)))
            }
            Tok::Sym("(") => {
                self.bump();
                let e = self.expr()?;
                self.expect_sym(")")?;
                Ok(e)
            }
            Tok::Ident(s) => match s.as_str() {
                "true" => {
                    self.bump();
                    Ok(Expr::tt())
                }
                "false" => {
                    self.bump();
                    Ok(Expr::ff())
                }
                "infinity" => {
                    self.bump();
                    Ok(Expr::infinity())
                }
                "pre" => {
                    self.bump();
                    Ok(Expr::pre(self.call1()?))
                }
                "hist" => {
                    self.bump();
                    Ok(Expr::hist(self.call1()?))
                }
                "initz" => {
                    self.bump();
                    Ok(Expr::initz(self.call1()?))
                }
                "ite" => {
                    self.bump();
                    self.expect_sym("(")?;
                    let c = self.expr()?;
                    self.expect_sym(",")?;
                    let a = self.expr()?;
                    self.expect_sym(",")?;
                    let b = self.expr()?;
                    self.expect_sym(")")?;
                    Ok(Expr::ite(c, a, b))
                }
                "rat" => {
                    self.bump();
                    self.expect_sym("(")?;
                    let n = self.signed_int()?;
                    self.expect_sym(",")?;
                    let d = self.signed_int()?;
                    self.expect_sym(")")?;
                    if d == BigInt::from(0) {
                        return Err(ParseError::Syntax { span, msg: "zero denominator".into() });
                    }
                    Ok(Expr::Const(Value::Real(Rational::new(n, d))))
                }
                _ if is_reserved(&s) => self.error(format!("unexpected keyword `{s}`")),
                _ => {
                    self.bump();
                    self.refs.push((s.clone(), span));
                    Ok(Expr::Var(s))
                }
            },
            other => self.error(format!("expected expression, found {}", other.describe())),
        }
    }

    fn string_name(&mut self) -> Option<String> {
        if let Tok::Str(s) = self.peek().clone() {
            if matches!(self.peek_at(1), Tok::Sym(":")) {
                self.bump();
                self.bump();
                return Some(s);
            }
        }
        None
    }

    fn type_tag(&mut self) -> Result<TypeTag, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => match TypeTag::from_keyword(&s) {
                Some(t) => {
                    self.bump();
                    Ok(t)
                }
                None => self.error(format!("expected type, found `{s}`")),
            },
            other => self.error(format!("expected type, found {}", other.describe())),
        }
    }

    fn item_body(&mut self) -> Result<ItemBody, ParseError> {
        let span = self.span();
        if self.is_kw("whenever") || self.is_kw("when") || self.is_kw("always") {
            return Ok(ItemBody::Pattern(parse_pattern_phrase(self, None).map_err(|e| at(span, e))?));
        }
        let e = self.expr()?;
        if self.is_kw("occurs") {
            return Ok(ItemBody::Pattern(parse_pattern_phrase(self, Some(e)).map_err(|e| at(span, e))?));
        }
        Ok(ItemBody::Expr(e))
    }

    fn name_list(&mut self) -> Result<Vec<(String, Span)>, ParseError> {
        let mut names = vec![(self.ident_spanned()?)];
        while self.eat_sym(",") {
            names.push(self.ident_spanned()?);
        }
        Ok(names)
    }

    fn ident_spanned(&mut self) -> Result<(String, Span), ParseError> {
        let span = self.span();
        Ok((self.ident()?, span))
    }
}

fn at(span: Span, e: ParseError) -> ParseError {
    match e {
        ParseError::Pattern { source, .. } => ParseError::Pattern { span, source },
        other => other,
    }
}

fn check_wf(e: &Expr, span: Span) -> Result<(), ParseError> {
    check_well_formed(e).map_err(|violation| ParseError::IllFormed { span, violation })
}

fn check_body_wf(b: &ItemBody, span: Span) -> Result<(), ParseError> {
    match b {
        ItemBody::Expr(e) => check_wf(e, span),
        ItemBody::Pattern(p) => p.exprs().into_iter().try_for_each(|e| check_wf(e, span)),
    }
}

/// Statements shared by flat programs and component bodies.
#[derive(Default)]
struct BodyBuilder {
    source: ProgramSource,
    declared: BTreeSet<String>,
    refs: Vec<(String, Span)>,
    body_items: usize,
}

impl BodyBuilder {
    fn declare(&mut self, name: String, ty: TypeTag, span: Span) -> Result<(), ParseError> {
        if name == TIME_VAR || !self.declared.insert(name.clone()) {
            return Err(ParseError::Duplicate { span, name });
        }
        self.source.program.vars.push(VarDecl::new(name, ty));
        Ok(())
    }

    /// Parses one body statement if the current token starts one.
    fn statement(&mut self, p: &mut Parser) -> Result<bool, ParseError> {
        let span = p.span();
        if p.eat_kw("var") {
            let names = p.name_list()?;
            p.expect_sym(":")?;
            let ty = p.type_tag()?;
            p.expect_sym(";")?;
            for (n, s) in names {
                self.declare(n, ty, s)?;
            }
            self.body_items += 1;
            return Ok(true);
        }
        if p.eat_kw("eq") {
            let (name, nspan) = p.ident_spanned()?;
            p.expect_sym(":")?;
            let ty = p.type_tag()?;
            p.expect_sym("=")?;
            let e = p.expr()?;
            p.expect_sym(";")?;
            check_wf(&e, span)?;
            self.declare(name.clone(), ty, nspan)?;
            self.refs.extend(p.take_refs());
            self.source.program.transition.push(Constraint {
                name: Some(name.clone()),
                expr: Expr::eq(Expr::var(name), e),
                span: Some(span),
            });
            self.body_items += 1;
            return Ok(true);
        }
        if p.eat_kw("timeout") {
            let names = p.name_list()?;
            p.expect_sym(";")?;
            for (n, s) in names {
                self.refs.push((n.clone(), s));
                if !self.source.program.timeouts.contains(&n) {
                    self.source.program.timeouts.push(n);
                }
            }
            self.body_items += 1;
            return Ok(true);
        }
        if p.eat_kw("assert") {
            let name = p.string_name();
            let body = p.item_body()?;
            p.expect_sym(";")?;
            check_body_wf(&body, span)?;
            self.refs.extend(p.take_refs());
            match body {
                ItemBody::Expr(expr) => self.source.program.transition.push(Constraint { name, expr, span: Some(span) }),
                ItemBody::Pattern(pattern) => {
                    let n = self.source.patterns.len() + 1;
                    self.source.patterns.push(PatternItem {
                        name: name.unwrap_or_else(|| format!("assert{n}")),
                        role: PatternRole::Constraint,
                        pattern,
                        span: Some(span),
                    })
                }
            }
            self.body_items += 1;
            return Ok(true);
        }
        if p.eat_kw("property") {
            let side = p.eat_kw("nonoverlap");
            let name = p
                .string_name()
                .unwrap_or_else(|| format!("property{}", self.source.program.properties.len() + self.source.patterns.len() + 1));
            let body = p.item_body()?;
            p.expect_sym(";")?;
            check_body_wf(&body, span)?;
            self.refs.extend(p.take_refs());
            match (body, side) {
                (ItemBody::Expr(expr), false) => self.source.program.properties.push(Property { name, expr }),
                (ItemBody::Expr(_), true) => {
                    return Err(ParseError::Syntax { span, msg: "`nonoverlap` requires a pattern phrase".into() })
                }
                (ItemBody::Pattern(pattern), side) => self.source.patterns.push(PatternItem {
                    name,
                    role: if side { PatternRole::SideCondition } else { PatternRole::Property },
                    pattern,
                    span: Some(span),
                }),
            }
            return Ok(true);
        }
        if p.eat_kw("lemma") {
            let name = p
                .string_name()
                .unwrap_or_else(|| format!("lemma{}", self.source.program.lemmas.len() + 1));
            let e = p.expr()?;
            p.expect_sym(";")?;
            check_wf(&e, span)?;
            // may name variables introduced by pattern lowering; resolved by `elaborate`
            p.take_refs();
            self.source.program.lemmas.push(Property { name, expr: e });
            return Ok(true);
        }
        // `x : int;` / `x, y : bool;`
        if let Tok::Ident(s) = p.peek().clone() {
            if !is_reserved(&s) && matches!(p.peek_at(1), Tok::Sym(":" | ",")) {
                let names = p.name_list()?;
                p.expect_sym(":")?;
                let ty = p.type_tag()?;
                p.expect_sym(";")?;
                for (n, s) in names {
                    self.declare(n, ty, s)?;
                }
                self.body_items += 1;
                return Ok(true);
            }
        }
        Ok(false)
    }

    fn bare_constraint(&mut self, p: &mut Parser) -> Result<(), ParseError> {
        let span = p.span();
        let e = p.expr()?;
        p.expect_sym(";")?;
        check_wf(&e, span)?;
        self.refs.extend(p.take_refs());
        self.source.program.transition.push(Constraint { name: None, expr: e, span: Some(span) });
        self.body_items += 1;
        Ok(())
    }

    fn resolve(&self, extra: &BTreeSet<String>) -> Result<(), ParseError> {
        for (name, span) in &self.refs {
            if name != TIME_VAR && !self.declared.contains(name) && !extra.contains(name) {
                return Err(ParseError::Unknown { span: *span, name: name.clone() });
            }
        }
        Ok(())
    }
}

/// Parses a `.rtc` file.
pub fn parse_source(text: &str) -> Result<Source, ParseError> {
    let mut p = Parser::new(text)?;
    if p.is_kw("component") {
        let top = parse_component(&mut p, &BTreeSet::new())?;
        p.expect_eof()?;
        return Ok(Source::System(SystemModel { top }));
    }
    let mut b = BodyBuilder::default();
    while !matches!(p.peek(), Tok::Eof) {
        if p.is_kw("component") {
            return p.error("components cannot be mixed with top-level program statements");
        }
        if !b.statement(&mut p)? {
            b.bare_constraint(&mut p)?;
        }
    }
    b.resolve(&BTreeSet::new())?;
    Ok(Source::Program(b.source))
}

/// Parses a flat program and lowers its pattern statements.
pub fn parse_program(text: &str) -> Result<SpecProgram, crate::Error> {
    match parse_source(text)? {
        Source::Program(src) => Ok(src.elaborate()?),
        Source::System(_) => Err(crate::Error::Usage("expected a program, found a component".into())),
    }
}

/// Parses a standalone expression (syntax only).
pub fn parse_expr(text: &str) -> Result<Expr, ParseError> {
    let mut p = Parser::new(text)?;
    let e = p.expr()?;
    p.expect_eof()?;
    Ok(e)
}

fn parse_component(p: &mut Parser, _outer: &BTreeSet<String>) -> Result<Component, ParseError> {
    p.expect_kw("component")?;
    let (name, _) = p.ident_spanned()?;
    p.expect_sym("{")?;
    let mut b = BodyBuilder::default();
    let mut ports: Vec<Port> = Vec::new();
    let mut contract = Contract::default();
    let mut contract_refs: Vec<(String, Span)> = Vec::new();
    let mut subs: Vec<Component> = Vec::new();
    let mut connections: Vec<(Connection, Span)> = Vec::new();
    while !p.eat_sym("}") {
        if matches!(p.peek(), Tok::Eof) {
            return p.error(format!("unterminated component `{name}`"));
        }
        let span = p.span();
        let dir = if p.eat_kw("input") {
            Some(PortDir::Input)
        } else if p.eat_kw("output") {
            Some(PortDir::Output)
        } else {
            None
        };
        if let Some(dir) = dir {
            let names = p.name_list()?;
            p.expect_sym(":")?;
            let ty = p.type_tag()?;
            p.expect_sym(";")?;
            for (n, s) in names {
                if n == TIME_VAR || b.declared.contains(&n) {
                    return Err(ParseError::Duplicate { span: s, name: n });
                }
                b.declared.insert(n.clone());
                ports.push(Port { name: n, ty, dir });
            }
            continue;
        }
        let assume = p.eat_kw("assume");
        if assume || p.eat_kw("guarantee") {
            let n = if assume { contract.assumptions.len() } else { contract.guarantees.len() } + 1;
            let item_name = p
                .string_name()
                .unwrap_or_else(|| format!("{}{}", if assume { "assume" } else { "guarantee" }, n));
            let body = p.item_body()?;
            p.expect_sym(";")?;
            check_body_wf(&body, span)?;
            contract_refs.extend(p.take_refs());
            let item = ContractItem {
                name: item_name,
                body: match body {
                    ItemBody::Expr(e) => ContractBody::Expr(e),
                    ItemBody::Pattern(pt) => ContractBody::Pattern(pt),
                },
            };
            if assume {
                contract.assumptions.push(item);
            } else {
                contract.guarantees.push(item);
            }
            continue;
        }
        if p.is_kw("component") {
            let sub = parse_component(p, &b.declared)?;
            if subs.iter().any(|s| s.name == sub.name) {
                return Err(ParseError::Duplicate { span, name: sub.name });
            }
            subs.push(sub);
            continue;
        }
        if p.eat_kw("connect") {
            let (from, _) = p.ident_spanned()?;
            p.expect_sym("->")?;
            let (to, _) = p.ident_spanned()?;
            p.expect_sym(";")?;
            connections.push((Connection { from, to }, span));
            continue;
        }
        if !b.statement(p)? {
            b.bare_constraint(p)?;
        }
    }

    let interface: BTreeSet<String> = ports.iter().map(|q| q.name.clone()).collect();
    for (n, span) in &contract_refs {
        if n != TIME_VAR && !interface.contains(n) {
            return Err(ParseError::Unknown { span: *span, name: n.clone() });
        }
    }
    b.resolve(&BTreeSet::new())?;

    let port_of = |path: &str| -> Option<TypeTag> {
        match path.split_once('.') {
            None => ports.iter().find(|q| q.name == path).map(|q| q.ty),
            Some((sub, port)) => subs
                .iter()
                .find(|s| s.name == sub)
                .and_then(|s| s.ports.iter().find(|q| q.name == port))
                .map(|q| q.ty),
        }
    };
    for (c, span) in &connections {
        for end in [&c.from, &c.to] {
            if port_of(end).is_none() {
                return Err(ParseError::Unknown { span: *span, name: end.clone() });
            }
        }
        if port_of(&c.from) != port_of(&c.to) {
            return Err(ParseError::Syntax {
                span: *span,
                msg: format!("connection {} -> {} joins ports of different types", c.from, c.to),
            });
        }
    }

    let has_body = b.body_items > 0 || !b.source.patterns.is_empty();
    if has_body && !subs.is_empty() {
        return Err(ParseError::Syntax {
            span: p.span(),
            msg: format!("component `{name}` has both a body and subcomponents"),
        });
    }
    let lemmas = std::mem::take(&mut b.source.program.lemmas);
    let body = if has_body {
        let mut src = b.source;
        let mut vars: Vec<VarDecl> = ports.iter().map(|q| VarDecl::new(q.name.clone(), q.ty)).collect();
        vars.append(&mut src.program.vars);
        src.program.vars = vars;
        Some(src)
    } else {
        None
    };
    Ok(Component {
        name,
        contract,
        ports,
        body,
        subcomponents: subs,
        connections: connections.into_iter().map(|(c, _)| c).collect(),
        lemmas,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::print::{expr_to_string, program_sexpr};

    fn program(text: &str) -> ProgramSource {
        match parse_source(text).unwrap() {
            Source::Program(p) => p,
            _ => panic!("expected program"),
        }
    }

    #[test]
    fn counter_program() {
        let src = program("x : int; x = (0 -> pre(x) + 1);");
        assert_eq!(src.program.vars.len(), 1);
        assert_eq!(src.program.transition.len(), 1);
        assert_eq!(
            program_sexpr(&src.program),
            "(program (vars (x int)) (timeouts) (transition (= (var x) (arrow (int 0) (+ (pre (var x)) (int 1))))) (properties))"
        );
    }

    #[test]
    fn empty_file_is_empty_program() {
        let src = program("");
        assert!(src.program.vars.is_empty());
        assert!(src.program.transition.is_empty());
    }

    #[test]
    fn unguarded_pre_is_rejected() {
        let err = parse_source("x : int; x = pre(x);").unwrap_err();
        assert!(matches!(err, ParseError::IllFormed { .. }), "{err}");
        assert_eq!(err.span(), Span { line: 1, col: 10 });
    }

    #[test]
    fn duplicate_and_unknown() {
        assert!(matches!(parse_source("x : int; var x : bool;"), Err(ParseError::Duplicate { .. })));
        let err = parse_source("x : int;\nx = y;").unwrap_err();
        assert_eq!(err, ParseError::Unknown { span: Span { line: 2, col: 5 }, name: "y".into() });
        assert!(matches!(parse_source("t : real;"), Err(ParseError::Duplicate { .. })));
    }

    #[test]
    fn syntax_error_has_position() {
        let err = parse_source("x : int;\nx = (1 + ;").unwrap_err();
        assert!(matches!(err, ParseError::Syntax { span: Span { line: 2, col: 10 }, .. }), "{err}");
    }

    #[test]
    fn precedence() {
        let e = parse_expr("a and not b or c => d -> e").unwrap();
        assert_eq!(expr_to_string(&e), "a and not b or c => d -> e");
        let e = parse_expr("not a = b").unwrap();
        assert_eq!(e, Expr::not(Expr::eq(Expr::var("a"), Expr::var("b"))));
        let e = parse_expr("-5 * x").unwrap();
        assert_eq!(e, Expr::bin(BinOp::Mul, Expr::int(-5), Expr::var("x")));
        assert!(parse_expr("a < b < c").is_err());
    }

    #[test]
    fn pattern_statements() {
        let src = program(
            "new_message : bool; thread_start : bool; thread_stop : bool;\n\
             assert \"nm\" : new_message occurs sporadic with IAT 50.0;\n\
             assert always new_message = thread_start;\n\
             property \"stop\" : whenever thread_start occurs thread_stop occurs during [10.0, 20.0];",
        );
        assert_eq!(src.patterns.len(), 3);
        assert_eq!(src.patterns[0].role, PatternRole::Constraint);
        assert_eq!(src.patterns[1].name, "assert2");
        assert_eq!(src.patterns[2].role, PatternRole::Property);
    }

    #[test]
    fn component_tree() {
        let sys = match parse_source(
            "component top {\n input a : int; output b : int;\n guarantee \"g\" : b > 0;\n\
             component w { input i : int; output o : int; assume i > 0; guarantee o > 0; o = i; }\n\
             component v { input i : int; output o : int; o = i + 1; }\n\
             connect a -> w.i; connect w.o -> v.i; connect v.o -> b;\n}",
        )
        .unwrap()
        {
            Source::System(s) => s,
            _ => panic!(),
        };
        assert_eq!(sys.top.subcomponents.len(), 2);
        assert_eq!(sys.top.connections.len(), 3);
        assert!(sys.top.body.is_none());
        let w = &sys.top.subcomponents[0];
        assert_eq!(w.contract.assumptions.len(), 1);
        assert_eq!(w.body.as_ref().unwrap().program.vars.len(), 2);
    }

    #[test]
    fn contract_must_use_interface_vars() {
        let err = parse_source("component c { input a : int; var l : int; l = a; guarantee l > 0; }").unwrap_err();
        assert!(matches!(err, ParseError::Unknown { ref name, .. } if name == "l"), "{err}");
    }

    #[test]
    fn connection_type_mismatch() {
        let err = parse_source(
            "component top { component w { output o : bool; o = true; } component v { input i : int; } connect w.o -> v.i; }",
        )
        .unwrap_err();
        assert!(matches!(err, ParseError::Syntax { .. }));
    }
}
