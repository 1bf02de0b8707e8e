use std::collections::BTreeSet;

use thiserror::Error;

use crate::ast::{Constraint, Expr, Property, SpecProgram, VarDecl};
use crate::pattern::{compile_constraint, compile_property_observer, PatternError};

use super::{prefixer, Component, ContractBody, ContractItem, PortDir, SystemModel};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ComposeError {
    #[error("component `{0}` has neither a body nor subcomponents")]
    MissingBody(String),
    #[error("assumption of `{component}` reads input `{var}` which has no incoming connection")]
    UnconnectedAssumption { component: String, var: String },
    #[error("variable `{0}` is declared twice after prefixing")]
    Collision(String),
    #[error("--order must be a permutation of {expected:?}, got {got:?}")]
    BadOrder { expected: Vec<String>, got: Vec<String> },
    #[error("component `{component}`: {source}")]
    Pattern { component: String, source: PatternError },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ObligationKind {
    AssumptionDischarge,
    GuaranteeCheck,
    TopInvariant,
    LeafContract,
}

impl ObligationKind {
    pub fn name(self) -> &'static str {
        match self {
            ObligationKind::AssumptionDischarge => "assumption-discharge",
            ObligationKind::GuaranteeCheck => "guarantee-check",
            ObligationKind::TopInvariant => "top-invariant",
            ObligationKind::LeafContract => "leaf-contract",
        }
    }
}

/// Which hypotheses an assumption obligation may use.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum AssumptionRule {
    /// System assumptions only.
    Strong,
    /// System assumptions and every other sibling's guarantees. Unsound
    /// under feedback cycles.
    Weak,
    /// System assumptions, the previous-step guarantees of all siblings and
    /// the current guarantees of siblings earlier in the order.
    #[default]
    Ordered,
}

impl AssumptionRule {
    pub fn formula(self) -> u8 {
        match self {
            AssumptionRule::Strong => 2,
            AssumptionRule::Weak => 3,
            AssumptionRule::Ordered => 4,
        }
    }
}

/// A closed invariant-checking problem: `property` must hold at every step
/// of every admissible trace of `program`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Obligation {
    pub name: String,
    pub kind: ObligationKind,
    /// Which of the five rule formulas this instantiates.
    pub formula: u8,
    /// Hierarchical path of the component it belongs to.
    pub component: String,
    pub program: SpecProgram,
    pub property: Expr,
}

/// Builds an obligation program incrementally, lowering contract patterns
/// as hypotheses (restrictions) or conclusions (observers).
struct Ctx<'a> {
    prog: SpecProgram,
    component: &'a str,
}

impl Ctx<'_> {
    fn err(&self, source: PatternError) -> ComposeError {
        ComposeError::Pattern { component: self.component.to_string(), source }
    }

    fn hypothesis(&mut self, item: &ContractItem, label: &str) -> Result<Expr, ComposeError> {
        match &item.body {
            ContractBody::Expr(e) => Ok(e.clone()),
            ContractBody::Pattern(p) => {
                let b = compile_constraint(p, &self.prog, Some(label)).map_err(|e| self.err(e))?;
                b.install_definitions(&mut self.prog, label);
                Ok(b.restriction())
            }
        }
    }

    fn conclusion(&mut self, item: &ContractItem, label: &str) -> Result<Expr, ComposeError> {
        match &item.body {
            ContractBody::Expr(e) => Ok(e.clone()),
            ContractBody::Pattern(p) => {
                let b = compile_property_observer(p, &self.prog, Some(label)).map_err(|e| self.err(e))?;
                b.install(&mut self.prog, label);
                Ok(b.property.clone().unwrap_or_else(Expr::tt))
            }
        }
    }

    fn hypotheses(&mut self, items: &[ContractItem], prefix: Option<&str>) -> Result<Expr, ComposeError> {
        let mut out = vec![];
        for it in items {
            let (it, label) = localize(it, prefix);
            out.push(self.hypothesis(&it, &label)?);
        }
        Ok(Expr::conj(out))
    }

    fn conclusions(&mut self, items: &[ContractItem], prefix: Option<&str>) -> Result<Expr, ComposeError> {
        let mut out = vec![];
        for it in items {
            let (it, label) = localize(it, prefix);
            out.push(self.conclusion(&it, &label)?);
        }
        Ok(Expr::conj(out))
    }

    fn finish(mut self, name: String, kind: ObligationKind, formula: u8, lemmas: &[Property], property: Expr) -> Obligation {
        let declared = self.prog.names();
        self.prog.lemmas = lemmas.iter().filter(|l| l.expr.vars().is_subset(&declared)).cloned().collect();
        Obligation { name, kind, formula, component: self.component.to_string(), program: self.prog, property }
    }
}

fn localize(item: &ContractItem, prefix: Option<&str>) -> (ContractItem, String) {
    match prefix {
        None => (item.clone(), item.name.clone()),
        Some(p) => (item.renamed(&prefixer(p)), format!("{p}.{}", item.name)),
    }
}

fn item_vars(item: &ContractItem) -> BTreeSet<String> {
    match &item.body {
        ContractBody::Expr(e) => e.vars(),
        ContractBody::Pattern(p) => p.exprs().into_iter().flat_map(|e| e.vars()).collect(),
    }
}

/// Subcomponent order: declaration order unless `custom` names a
/// permutation of the subcomponents.
pub fn order_components<'a>(sys: &'a Component, custom: Option<&[String]>) -> Result<Vec<&'a Component>, ComposeError> {
    let Some(names) = custom else { return Ok(sys.subcomponents.iter().collect()) };
    let mut expected: Vec<String> = sys.subcomponents.iter().map(|c| c.name.clone()).collect();
    let mut got = names.to_vec();
    expected.sort();
    got.sort();
    if expected != got {
        return Err(ComposeError::BadOrder { expected, got: names.to_vec() });
    }
    Ok(names.iter().filter_map(|n| sys.sub(n)).collect())
}

/// Interface of `sys` plus every subcomponent's ports under `sub.` and the
/// connections as equalities. Bodies are not included.
fn contracts_only(sys: &Component) -> Result<SpecProgram, ComposeError> {
    let mut p = SpecProgram::new();
    for port in &sys.ports {
        p.declare(port.name.clone(), port.ty);
    }
    for c in &sys.subcomponents {
        for port in &c.ports {
            let name = format!("{}.{}", c.name, port.name);
            if p.is_declared(&name) {
                return Err(ComposeError::Collision(name));
            }
            p.declare(name, port.ty);
        }
    }
    for conn in &sys.connections {
        p.transition.push(Constraint::named("connect", Expr::eq(Expr::var(&conn.to), Expr::var(&conn.from))));
    }
    for c in &sys.subcomponents {
        for a in &c.contract.assumptions {
            for v in item_vars(a) {
                let is_input = c.port(&v).is_some_and(|pt| pt.dir == PortDir::Input);
                let target = format!("{}.{v}", c.name);
                if is_input && !sys.connections.iter().any(|k| k.to == target) {
                    return Err(ComposeError::UnconnectedAssumption { component: c.name.clone(), var: v });
                }
            }
        }
    }
    Ok(p)
}

/// One obligation per subcomponent assumption conjunct.
pub fn gen_assumption_obligations(
    sys: &Component,
    path: &str,
    rule: AssumptionRule,
    order: Option<&[String]>,
) -> Result<Vec<Obligation>, ComposeError> {
    let order = order_components(sys, order)?;
    let base = contracts_only(sys)?;
    let mut out = vec![];
    for (pos, c) in order.iter().enumerate() {
        for a in &c.contract.assumptions {
            let mut ctx = Ctx { prog: base.clone(), component: path };
            let mut hyps = vec![Expr::hist(ctx.hypotheses(&sys.contract.assumptions, None)?)];
            for (k, w) in order.iter().enumerate() {
                if w.contract.guarantees.is_empty() {
                    continue;
                }
                let take = match rule {
                    AssumptionRule::Strong => false,
                    AssumptionRule::Weak => k != pos,
                    AssumptionRule::Ordered => true,
                };
                if !take {
                    continue;
                }
                let g = Expr::hist(ctx.hypotheses(&w.contract.guarantees, Some(&w.name))?);
                if rule == AssumptionRule::Ordered {
                    hyps.push(Expr::initz(g.clone()));
                    if k < pos {
                        hyps.push(g);
                    }
                } else {
                    hyps.push(g);
                }
            }
            let (item, label) = localize(a, Some(&c.name));
            let concl = ctx.conclusion(&item, &label)?;
            let name = format!("{path}: assumption {}.{}", c.name, a.name);
            let prop = Expr::implies(Expr::conj(hyps), concl);
            out.push(ctx.finish(name, ObligationKind::AssumptionDischarge, rule.formula(), &sys.lemmas, prop));
        }
    }
    Ok(out)
}

/// Subcomponent guarantees establish the system guarantees.
pub fn gen_guarantee_obligation(sys: &Component, path: &str) -> Result<Obligation, ComposeError> {
    if sys.is_leaf() {
        return gen_leaf_obligation(sys, path);
    }
    let mut ctx = Ctx { prog: contracts_only(sys)?, component: path };
    let mut hyps = vec![Expr::hist(ctx.hypotheses(&sys.contract.assumptions, None)?)];
    for c in &sys.subcomponents {
        if !c.contract.guarantees.is_empty() {
            hyps.push(Expr::hist(ctx.hypotheses(&c.contract.guarantees, Some(&c.name))?));
        }
    }
    let concl = ctx.conclusions(&sys.contract.guarantees, None)?;
    let prop = Expr::implies(Expr::conj(hyps), concl);
    Ok(ctx.finish(format!("{path}: guarantees"), ObligationKind::GuaranteeCheck, 5, &sys.lemmas, prop))
}

/// The body implements the contract: `hist(A) => G`.
pub fn gen_leaf_obligation(c: &Component, path: &str) -> Result<Obligation, ComposeError> {
    let body = c.body.as_ref().ok_or_else(|| ComposeError::MissingBody(path.to_string()))?;
    let prog = body.elaborate().map_err(|source| ComposeError::Pattern { component: path.to_string(), source })?;
    let mut ctx = Ctx { prog, component: path };
    let hyp = Expr::hist(ctx.hypotheses(&c.contract.assumptions, None)?);
    let concl = ctx.conclusions(&c.contract.guarantees, None)?;
    let kind = if path.contains('.') { ObligationKind::LeafContract } else { ObligationKind::TopInvariant };
    let mut lemmas = c.lemmas.clone();
    lemmas.extend(body.program.lemmas.iter().cloned());
    Ok(ctx.finish(format!("{path}: contract"), kind, 1, &lemmas, Expr::implies(hyp, concl)))
}

/// Every obligation of the tree, parents before children. `order` applies
/// to the top component only.
pub fn gen_all_obligations(
    sys: &SystemModel,
    rule: AssumptionRule,
    order: Option<&[String]>,
) -> Result<Vec<Obligation>, ComposeError> {
    fn walk(c: &Component, path: &str, rule: AssumptionRule, order: Option<&[String]>, out: &mut Vec<Obligation>) -> Result<(), ComposeError> {
        if c.is_leaf() {
            out.push(gen_leaf_obligation(c, path)?);
            return Ok(());
        }
        out.extend(gen_assumption_obligations(c, path, rule, order)?);
        out.push(gen_guarantee_obligation(c, path)?);
        for s in &c.subcomponents {
            walk(s, &format!("{path}.{}", s.name), rule, None, out)?;
        }
        Ok(())
    }
    let mut out = vec![];
    walk(&sys.top, &sys.top.name, rule, order, &mut out)?;
    Ok(out)
}

fn declare_checked(p: &mut SpecProgram, d: VarDecl) -> Result<(), ComposeError> {
    if p.is_declared(&d.name) {
        return Err(ComposeError::Collision(d.name));
    }
    p.vars.push(d);
    Ok(())
}

fn flatten(c: &Component, prefix: Option<&str>, path: &str, out: &mut SpecProgram) -> Result<(), ComposeError> {
    let rename = |v: &str| match prefix {
        Some(p) => prefixer(p)(v),
        None => v.to_string(),
    };
    if c.is_leaf() {
        let body = c.body.as_ref().ok_or_else(|| ComposeError::MissingBody(path.to_string()))?;
        let p = body.elaborate().map_err(|source| ComposeError::Pattern { component: path.to_string(), source })?;
        for d in p.vars {
            declare_checked(out, VarDecl::new(rename(&d.name), d.ty))?;
        }
        for k in p.transition {
            out.transition.push(Constraint { name: k.name, expr: k.expr.rename_vars(&rename), span: k.span });
        }
        out.timeouts.extend(p.timeouts.iter().map(|t| rename(t)));
        let lemmas = p.lemmas.iter().chain(&c.lemmas);
        out.lemmas.extend(lemmas.map(|l| Property::new(rename(&l.name), l.expr.rename_vars(&rename))));
        return Ok(());
    }
    for port in &c.ports {
        declare_checked(out, VarDecl::new(rename(&port.name), port.ty))?;
    }
    for s in &c.subcomponents {
        let sp = match prefix {
            Some(p) => format!("{p}.{}", s.name),
            None => s.name.clone(),
        };
        flatten(s, Some(&sp), &format!("{path}.{}", s.name), out)?;
    }
    for conn in &c.connections {
        out.transition.push(Constraint::named(
            "connect",
            Expr::eq(Expr::var(rename(&conn.to)), Expr::var(rename(&conn.from))),
        ));
    }
    Ok(())
}

/// All leaf bodies under hierarchical prefixes, joined by the connection
/// equalities, with the top contract as the single property.
pub fn compose_monolithic(sys: &SystemModel) -> Result<(SpecProgram, Expr), ComposeError> {
    let top = &sys.top;
    let mut prog = SpecProgram::new();
    flatten(top, None, &top.name, &mut prog)?;
    let mut ctx = Ctx { prog, component: &top.name };
    let hyp = Expr::hist(ctx.hypotheses(&top.contract.assumptions, None)?);
    let concl = ctx.conclusions(&top.contract.guarantees, None)?;
    let prop = Expr::implies(hyp, concl);
    let mut prog = ctx.prog;
    prog.properties.push(Property::new(top.name.clone(), prop.clone()));
    Ok((prog, prop))
}
