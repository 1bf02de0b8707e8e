//! Parsed source before pattern lowering.

use crate::ast::{Constraint, Property, Span, SpecProgram, TIME_VAR};
use crate::compose::SystemModel;
use crate::pattern::{compile_constraint, compile_prop_side_condition, compile_property_observer, Pattern, PatternError};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Source {
    Program(ProgramSource),
    System(SystemModel),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PatternRole {
    /// `assert` position: restricts the admissible traces.
    Constraint,
    /// `property` position: checked through an observer.
    Property,
    /// `property nonoverlap`: the single-window side condition.
    SideCondition,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PatternItem {
    pub name: String,
    pub role: PatternRole,
    pub pattern: Pattern,
    pub span: Option<Span>,
}

/// A program plus the pattern statements that still need lowering.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ProgramSource {
    pub program: SpecProgram,
    pub patterns: Vec<PatternItem>,
}

impl ProgramSource {
    /// Lowers every pattern statement into the core language, in source order.
    pub fn elaborate(&self) -> Result<SpecProgram, PatternError> {
        let mut p = self.program.clone();
        for item in &self.patterns {
            let bundle = match item.role {
                PatternRole::Constraint => compile_constraint(&item.pattern, &p, Some(&item.name))?,
                PatternRole::Property => compile_property_observer(&item.pattern, &p, Some(&item.name))?,
                PatternRole::SideCondition => compile_prop_side_condition(&item.pattern, &p, Some(&item.name))?,
            };
            bundle.install(&mut p, &item.name);
            if let Some(prop) = &bundle.property {
                p.properties.push(Property::new(item.name.clone(), prop.clone()));
            }
            if let Some(span) = item.span {
                for c in p.transition.iter_mut().rev().take(bundle.constraints.len()) {
                    c.span = Some(span);
                }
            }
        }
        let known = p.names();
        for l in &p.lemmas {
            if let Some(v) = l.expr.vars().into_iter().find(|v| v != TIME_VAR && !known.contains(v)) {
                return Err(PatternError::UnknownLemmaVar { lemma: l.name.clone(), name: v });
            }
        }
        Ok(p)
    }
}

/// Installs a plain constraint list; used by tests and the composition code.
pub fn push_constraints(p: &mut SpecProgram, label: &str, exprs: &[crate::ast::Expr]) {
    for e in exprs {
        p.transition.push(Constraint::named(label, e.clone()));
    }
}
