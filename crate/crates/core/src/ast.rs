//! Abstract syntax of the transition-system language.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::value::{Rational, Value};

/// Name of the implicit, real-typed time variable.
pub const TIME_VAR: &str = "t";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TypeTag {
    Bool,
    Int,
    Real,
}

impl TypeTag {
    pub fn keyword(self) -> &'static str {
        match self {
            TypeTag::Bool => "bool",
            TypeTag::Int => "int",
            TypeTag::Real => "real",
        }
    }

    pub fn from_keyword(s: &str) -> Option<TypeTag> {
        match s {
            "bool" | "boolean" => Some(TypeTag::Bool),
            "int" | "integer" => Some(TypeTag::Int),
            "real" => Some(TypeTag::Real),
            _ => None,
        }
    }
}

impl fmt::Display for TypeTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum UnOp {
    Neg,
    Not,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Or,
    And,
    Implies,
    Eq,
    Lt,
    Le,
    Gt,
    Ge,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Or => "or",
            BinOp::And => "and",
            BinOp::Implies => "=>",
            BinOp::Eq => "=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
        }
    }

    pub fn is_arith(self) -> bool {
        matches!(self, BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div)
    }

    pub fn is_logic(self) -> bool {
        matches!(self, BinOp::Or | BinOp::And | BinOp::Implies)
    }

    pub fn is_comparison(self) -> bool {
        matches!(self, BinOp::Eq | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr {
    Const(Value),
    Var(String),
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Ite(Box<Expr>, Box<Expr>, Box<Expr>),
    /// `lhs -> rhs`: `lhs` in the initial state, `rhs` afterwards.
    Arrow(Box<Expr>, Box<Expr>),
    Pre(Box<Expr>),
    /// Holds iff the operand held at every step so far.
    Hist(Box<Expr>),
    /// True at the first step, then the previous value of the operand.
    Initz(Box<Expr>),
}

#[allow(clippy::should_implement_trait)]
impl Expr {
    pub fn tt() -> Expr {
        Expr::Const(Value::Bool(true))
    }

    pub fn ff() -> Expr {
        Expr::Const(Value::Bool(false))
    }

    pub fn int(i: i64) -> Expr {
        Expr::Const(Value::Int(BigInt::from(i)))
    }

    pub fn real(r: Rational) -> Expr {
        Expr::Const(Value::Real(r))
    }

    pub fn infinity() -> Expr {
        Expr::Const(Value::Infinity)
    }

    pub fn var(name: impl Into<String>) -> Expr {
        Expr::Var(name.into())
    }

    pub fn time() -> Expr {
        Expr::Var(TIME_VAR.to_string())
    }

    pub fn not(e: Expr) -> Expr {
        Expr::Unary(UnOp::Not, Box::new(e))
    }

    pub fn neg(e: Expr) -> Expr {
        Expr::Unary(UnOp::Neg, Box::new(e))
    }

    pub fn bin(op: BinOp, a: Expr, b: Expr) -> Expr {
        Expr::Binary(op, Box::new(a), Box::new(b))
    }

    pub fn and(a: Expr, b: Expr) -> Expr {
        Expr::bin(BinOp::And, a, b)
    }

    pub fn or(a: Expr, b: Expr) -> Expr {
        Expr::bin(BinOp::Or, a, b)
    }

    pub fn implies(a: Expr, b: Expr) -> Expr {
        Expr::bin(BinOp::Implies, a, b)
    }

    pub fn eq(a: Expr, b: Expr) -> Expr {
        Expr::bin(BinOp::Eq, a, b)
    }

    pub fn add(a: Expr, b: Expr) -> Expr {
        Expr::bin(BinOp::Add, a, b)
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        Expr::bin(BinOp::Sub, a, b)
    }

    pub fn lt(a: Expr, b: Expr) -> Expr {
        Expr::bin(BinOp::Lt, a, b)
    }

    pub fn le(a: Expr, b: Expr) -> Expr {
        Expr::bin(BinOp::Le, a, b)
    }

    pub fn gt(a: Expr, b: Expr) -> Expr {
        Expr::bin(BinOp::Gt, a, b)
    }

    pub fn ge(a: Expr, b: Expr) -> Expr {
        Expr::bin(BinOp::Ge, a, b)
    }

    pub fn ite(c: Expr, a: Expr, b: Expr) -> Expr {
        Expr::Ite(Box::new(c), Box::new(a), Box::new(b))
    }

    pub fn arrow(a: Expr, b: Expr) -> Expr {
        Expr::Arrow(Box::new(a), Box::new(b))
    }

    pub fn pre(e: Expr) -> Expr {
        Expr::Pre(Box::new(e))
    }

    pub fn hist(e: Expr) -> Expr {
        Expr::Hist(Box::new(e))
    }

    pub fn initz(e: Expr) -> Expr {
        Expr::Initz(Box::new(e))
    }

    /// Conjunction of a list; `true` when empty.
    pub fn conj(items: impl IntoIterator<Item = Expr>) -> Expr {
        let mut it = items.into_iter();
        match it.next() {
            None => Expr::tt(),
            Some(first) => it.fold(first, Expr::and),
        }
    }

    pub fn children(&self) -> Vec<&Expr> {
        match self {
            Expr::Const(_) | Expr::Var(_) => vec![],
            Expr::Unary(_, a) | Expr::Pre(a) | Expr::Hist(a) | Expr::Initz(a) => vec![a],
            Expr::Binary(_, a, b) | Expr::Arrow(a, b) => vec![a, b],
            Expr::Ite(c, a, b) => vec![c, a, b],
        }
    }

    /// Subexpression at a child-index path.
    pub fn at_path(&self, path: &[usize]) -> Option<&Expr> {
        let mut cur = self;
        for &i in path {
            cur = *cur.children().get(i)?;
        }
        Some(cur)
    }

    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        if let Expr::Var(v) = self {
            out.insert(v.clone());
        }
        for c in self.children() {
            c.collect_vars(out);
        }
    }

    /// Variables read at the current step (not under `pre`/`initz`).
    pub fn current_vars(&self) -> BTreeSet<String> {
        fn go(e: &Expr, out: &mut BTreeSet<String>) {
            match e {
                Expr::Var(v) => {
                    out.insert(v.clone());
                }
                Expr::Pre(_) | Expr::Initz(_) => {}
                _ => e.children().into_iter().for_each(|c| go(c, out)),
            }
        }
        let mut out = BTreeSet::new();
        go(self, &mut out);
        out
    }

    /// True when the expression contains no variable reference and no
    /// temporal operator.
    pub fn is_ground(&self) -> bool {
        match self {
            Expr::Const(_) => true,
            Expr::Var(_) | Expr::Pre(_) | Expr::Hist(_) | Expr::Initz(_) | Expr::Arrow(..) => false,
            _ => self.children().iter().all(|c| c.is_ground()),
        }
    }

    pub fn has_temporal(&self) -> bool {
        match self {
            Expr::Pre(_) | Expr::Hist(_) | Expr::Initz(_) | Expr::Arrow(..) => true,
            _ => self.children().iter().any(|c| c.has_temporal()),
        }
    }

    pub fn rename_vars(&self, f: &dyn Fn(&str) -> String) -> Expr {
        self.map_vars(&|v| Expr::Var(f(v)))
    }

    /// Replace every variable reference.
    pub fn map_vars(&self, f: &dyn Fn(&str) -> Expr) -> Expr {
        let m = |e: &Expr| Box::new(e.map_vars(f));
        match self {
            Expr::Const(c) => Expr::Const(c.clone()),
            Expr::Var(v) => f(v),
            Expr::Unary(op, a) => Expr::Unary(*op, m(a)),
            Expr::Binary(op, a, b) => Expr::Binary(*op, m(a), m(b)),
            Expr::Ite(c, a, b) => Expr::Ite(m(c), m(a), m(b)),
            Expr::Arrow(a, b) => Expr::Arrow(m(a), m(b)),
            Expr::Pre(a) => Expr::Pre(m(a)),
            Expr::Hist(a) => Expr::Hist(m(a)),
            Expr::Initz(a) => Expr::Initz(m(a)),
        }
    }

    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|c| c.size()).sum::<usize>()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct Span {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VarDecl {
    pub name: String,
    pub ty: TypeTag,
}

impl VarDecl {
    pub fn new(name: impl Into<String>, ty: TypeTag) -> Self {
        VarDecl { name: name.into(), ty }
    }
}

/// One conjunct of the transition relation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint {
    pub name: Option<String>,
    pub expr: Expr,
    pub span: Option<Span>,
}

impl Constraint {
    pub fn new(expr: Expr) -> Self {
        Constraint { name: None, expr, span: None }
    }

    pub fn named(name: impl Into<String>, expr: Expr) -> Self {
        Constraint { name: Some(name.into()), expr, span: None }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Property {
    pub name: String,
    pub expr: Expr,
}

impl Property {
    pub fn new(name: impl Into<String>, expr: Expr) -> Self {
        Property { name: name.into(), expr }
    }
}

/// A transition system: variables, transition constraints, properties.
///
/// `t` is always readable; when `timeouts` is non-empty the calendar
/// constraint on `t` is part of the transition relation.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SpecProgram {
    pub vars: Vec<VarDecl>,
    pub transition: Vec<Constraint>,
    pub properties: Vec<Property>,
    pub timeouts: Vec<String>,
    pub lemmas: Vec<Property>,
}

impl SpecProgram {
    pub fn new() -> Self {
        SpecProgram::default()
    }

    pub fn var_type(&self, name: &str) -> Option<TypeTag> {
        if name == TIME_VAR {
            return Some(TypeTag::Real);
        }
        self.vars.iter().find(|d| d.name == name).map(|d| d.ty)
    }

    pub fn is_declared(&self, name: &str) -> bool {
        name == TIME_VAR || self.vars.iter().any(|d| d.name == name)
    }

    pub fn is_timed(&self) -> bool {
        !self.timeouts.is_empty()
    }

    pub fn is_timeout(&self, name: &str) -> bool {
        self.timeouts.iter().any(|t| t == name)
    }

    pub fn declare(&mut self, name: impl Into<String>, ty: TypeTag) {
        self.vars.push(VarDecl::new(name, ty));
    }

    pub fn assert(&mut self, expr: Expr) {
        self.transition.push(Constraint::new(expr));
    }

    pub fn property(&self, name: &str) -> Option<&Property> {
        self.properties.iter().find(|p| p.name == name)
    }

    /// Every name in use, including `t`.
    pub fn names(&self) -> BTreeSet<String> {
        let mut s: BTreeSet<String> = self.vars.iter().map(|d| d.name.clone()).collect();
        s.insert(TIME_VAR.to_string());
        s
    }

    /// Label used in reports for constraint `idx`.
    pub fn constraint_label(&self, idx: usize) -> String {
        match &self.transition[idx].name {
            Some(n) => n.clone(),
            None => format!("#{}", idx + 1),
        }
    }
}
