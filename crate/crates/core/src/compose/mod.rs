//! Component trees with assume-guarantee contracts and the proof
//! obligations that establish a system's contract from its parts.

mod obligations;

use crate::ast::{Expr, Property, TypeTag};
use crate::pattern::Pattern;
use crate::source::ProgramSource;

pub use obligations::{
    compose_monolithic, gen_all_obligations, gen_assumption_obligations, gen_guarantee_obligation,
    gen_leaf_obligation, order_components, AssumptionRule, ComposeError, Obligation, ObligationKind,
};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ContractBody {
    Expr(Expr),
    Pattern(Pattern),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContractItem {
    pub name: String,
    pub body: ContractBody,
}

impl ContractItem {
    pub fn expr(name: impl Into<String>, e: Expr) -> Self {
        ContractItem { name: name.into(), body: ContractBody::Expr(e) }
    }

    fn renamed(&self, f: &dyn Fn(&str) -> String) -> ContractItem {
        let g = |e: &Expr| e.rename_vars(f);
        ContractItem {
            name: self.name.clone(),
            body: match &self.body {
                ContractBody::Expr(e) => ContractBody::Expr(g(e)),
                ContractBody::Pattern(p) => ContractBody::Pattern(p.map_exprs(&g)),
            },
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Contract {
    pub assumptions: Vec<ContractItem>,
    pub guarantees: Vec<ContractItem>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PortDir {
    Input,
    Output,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Port {
    pub name: String,
    pub ty: TypeTag,
    pub dir: PortDir,
}

/// `from -> to`; endpoints are `port` or `sub.port`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Connection {
    pub from: String,
    pub to: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Component {
    pub name: String,
    pub contract: Contract,
    pub ports: Vec<Port>,
    /// Leaf implementation; its variables include the ports.
    pub body: Option<ProgramSource>,
    pub subcomponents: Vec<Component>,
    pub connections: Vec<Connection>,
    pub lemmas: Vec<Property>,
}

impl Component {
    pub fn new(name: impl Into<String>) -> Self {
        Component {
            name: name.into(),
            contract: Contract::default(),
            ports: vec![],
            body: None,
            subcomponents: vec![],
            connections: vec![],
            lemmas: vec![],
        }
    }

    pub fn is_leaf(&self) -> bool {
        self.subcomponents.is_empty()
    }

    pub fn port(&self, name: &str) -> Option<&Port> {
        self.ports.iter().find(|p| p.name == name)
    }

    pub fn sub(&self, name: &str) -> Option<&Component> {
        self.subcomponents.iter().find(|c| c.name == name)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SystemModel {
    pub top: Component,
}

/// Prefixes every variable except the time variable.
pub(crate) fn prefixer(prefix: &str) -> impl Fn(&str) -> String + '_ {
    move |v: &str| {
        if v == crate::ast::TIME_VAR {
            v.to_string()
        } else {
            format!("{prefix}.{v}")
        }
    }
}
