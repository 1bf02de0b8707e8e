//! Which variables are functionally defined at each step, and in what order
//! a step's values can be computed.

use std::collections::{BTreeMap, BTreeSet};

use crate::ast::{BinOp, Expr, SpecProgram, TIME_VAR};

/// How one value of a step is obtained.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Slot {
    /// `t` chosen from candidates.
    Time,
    /// `t` computed from the current timeout values by the calendar.
    TimeCal,
    /// Chosen from a finite domain.
    Free(String),
    /// Computed from the right-hand side of transition constraint `idx`.
    Def(String, usize),
}

impl Slot {
    pub fn var(&self) -> &str {
        match self {
            Slot::Time | Slot::TimeCal => TIME_VAR,
            Slot::Free(v) | Slot::Def(v, _) => v,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Plan {
    pub slots: Vec<Slot>,
    /// Constraint index to the defined variable.
    pub definitions: BTreeMap<usize, String>,
}

impl Plan {
    pub fn is_definition(&self, constraint: usize) -> bool {
        self.definitions.contains_key(&constraint)
    }

    pub fn free_vars(&self) -> impl Iterator<Item = &str> {
        self.slots.iter().filter_map(|s| match s {
            Slot::Free(v) => Some(v.as_str()),
            _ => None,
        })
    }

    pub fn position(&self, var: &str) -> Option<usize> {
        self.slots.iter().position(|s| s.var() == var)
    }
}

/// A top-level `v = rhs` whose current-step dependencies are acyclic defines
/// `v`; variables on a dependency cycle and everything else are free. In a
/// timed program `t` is computed from the timeouts unless that is cyclic.
/// Variables in `pinned` are never defined.
pub fn analyze(p: &SpecProgram, pinned: &BTreeSet<String>) -> Plan {
    let mut defs: BTreeMap<String, (usize, BTreeSet<String>)> = BTreeMap::new();
    for (k, c) in p.transition.iter().enumerate() {
        if let Expr::Binary(BinOp::Eq, lhs, rhs) = &c.expr {
            if let Expr::Var(v) = lhs.as_ref() {
                if v != TIME_VAR && p.is_declared(v) && !pinned.contains(v) && !defs.contains_key(v) {
                    defs.insert(v.clone(), (k, rhs.current_vars()));
                }
            }
        }
    }
    let time_node = p.is_timed() && !pinned.contains(TIME_VAR);
    let mut deps: BTreeMap<String, BTreeSet<String>> = defs.iter().map(|(v, (_, d))| (v.clone(), d.clone())).collect();
    if time_node {
        deps.insert(TIME_VAR.into(), p.timeouts.iter().cloned().collect());
    }
    // edges only among computed nodes
    let nodes: BTreeSet<String> = deps.keys().cloned().collect();
    for d in deps.values_mut() {
        d.retain(|x| nodes.contains(x));
    }

    let mut demoted: BTreeSet<String> = BTreeSet::new();
    let order = loop {
        let live: BTreeSet<&String> = nodes.iter().filter(|n| !demoted.contains(*n)).collect();
        let (order, left) = kahn(&live, &deps);
        if left.is_empty() {
            break order;
        }
        let cyclic: Vec<String> = left.iter().filter(|n| reaches(n, n, &left, &deps)).map(|n| n.to_string()).collect();
        if cyclic.iter().any(|n| n == TIME_VAR) {
            demoted.insert(TIME_VAR.to_string());
        } else {
            demoted.extend(cyclic);
        }
    };

    let mut slots = vec![];
    if !time_node || demoted.contains(TIME_VAR) {
        slots.push(Slot::Time);
    }
    for d in &p.vars {
        if d.name != TIME_VAR && (!defs.contains_key(&d.name) || demoted.contains(&d.name)) {
            slots.push(Slot::Free(d.name.clone()));
        }
    }
    let mut definitions = BTreeMap::new();
    for v in order {
        if v == TIME_VAR {
            slots.push(Slot::TimeCal);
        } else {
            let k = defs[&v].0;
            definitions.insert(k, v.clone());
            slots.push(Slot::Def(v, k));
        }
    }
    Plan { slots, definitions }
}

fn kahn(live: &BTreeSet<&String>, deps: &BTreeMap<String, BTreeSet<String>>) -> (Vec<String>, BTreeSet<String>) {
    let mut done: BTreeSet<String> = BTreeSet::new();
    let mut order = vec![];
    loop {
        let ready: Vec<String> = live
            .iter()
            .filter(|n| !done.contains(**n))
            .filter(|n| deps[**n].iter().all(|d| done.contains(d) || !live.contains(d)))
            .map(|n| n.to_string())
            .collect();
        if ready.is_empty() {
            break;
        }
        for n in ready {
            done.insert(n.clone());
            order.push(n);
        }
    }
    let left = live.iter().filter(|n| !done.contains(**n)).map(|n| n.to_string()).collect();
    (order, left)
}

fn reaches(from: &str, target: &str, within: &BTreeSet<String>, deps: &BTreeMap<String, BTreeSet<String>>) -> bool {
    let mut stack: Vec<&str> = deps[from].iter().map(|s| s.as_str()).collect();
    let mut seen = BTreeSet::new();
    while let Some(n) = stack.pop() {
        if n == target {
            return true;
        }
        if within.contains(n) && seen.insert(n) {
            stack.extend(deps[n].iter().map(|s| s.as_str()));
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_program;

    fn plan(src: &str) -> Plan {
        analyze(&parse_program(src).unwrap(), &BTreeSet::new())
    }

    #[test]
    fn counter_is_defined() {
        let p = plan("x : int; x = (0 -> pre(x) + 1);");
        assert_eq!(p.slots, vec![Slot::Time, Slot::Def("x".into(), 0)]);
    }

    #[test]
    fn definitions_are_ordered_by_dependency() {
        let p = plan("a, b : int; c : bool; b = a + 1; a = (0 -> pre(b)); c = (b > 2);");
        let names: Vec<&str> = p.slots.iter().map(|s| s.var()).collect();
        assert_eq!(names, vec!["t", "a", "b", "c"]);
    }

    #[test]
    fn cycles_are_demoted() {
        let p = plan("a, b : int; a = b; b = a;");
        assert_eq!(p.free_vars().collect::<Vec<_>>(), vec!["a", "b"]);
        assert!(p.definitions.is_empty());
        let p = plan("x : bool; x = (not x);");
        assert_eq!(p.free_vars().collect::<Vec<_>>(), vec!["x"]);
    }

    #[test]
    fn calendar_time_follows_timeouts() {
        let p = plan("to : real; timeout to; to = (10.0 -> ite(pre(to) = pre(t), pre(t) + 10.0, pre(to)));");
        assert_eq!(p.slots, vec![Slot::Def("to".into(), 0), Slot::TimeCal]);
        let p = plan("to : real; timeout to; to = t + 5.0;");
        assert_eq!(p.slots, vec![Slot::Time, Slot::Def("to".into(), 0)]);
    }
}
