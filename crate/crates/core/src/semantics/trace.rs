use std::collections::HashMap;

use serde_json::{json, Map};

use crate::ast::{TypeTag, VarDecl, TIME_VAR};
use crate::value::{format_num_den, parse_rational, Rational, Value};

/// Paired sequences of states and time stamps. Steps are 1-based in every
/// public accessor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TimedTrace {
    vars: Vec<VarDecl>,
    index: HashMap<String, usize>,
    times: Vec<Rational>,
    states: Vec<Vec<Value>>,
}

impl TimedTrace {
    pub fn new(vars: Vec<VarDecl>) -> Self {
        let vars: Vec<VarDecl> = vars.into_iter().filter(|d| d.name != TIME_VAR).collect();
        let index = vars.iter().enumerate().map(|(i, d)| (d.name.clone(), i)).collect();
        TimedTrace { vars, index, times: Vec::new(), states: Vec::new() }
    }

    pub fn vars(&self) -> &[VarDecl] {
        &self.vars
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[Rational] {
        &self.times
    }

    pub fn time(&self, step: usize) -> &Rational {
        &self.times[step - 1]
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn has_var(&self, name: &str) -> bool {
        name == TIME_VAR || self.index.contains_key(name)
    }

    /// Appends a state. `values` follows the order of `vars()`.
    pub fn push(&mut self, time: Rational, values: Vec<Value>) {
        debug_assert_eq!(values.len(), self.vars.len());
        self.times.push(time);
        self.states.push(values);
    }

    /// Appends a state given by name; missing variables are an error.
    pub fn push_named(&mut self, time: Rational, values: &HashMap<String, Value>) -> Result<(), String> {
        let mut row = Vec::with_capacity(self.vars.len());
        for d in &self.vars {
            row.push(values.get(&d.name).cloned().ok_or_else(|| format!("missing value for `{}`", d.name))?);
        }
        self.push(time, row);
        Ok(())
    }

    pub fn pop(&mut self) {
        self.times.pop();
        self.states.pop();
    }

    pub fn truncate(&mut self, len: usize) {
        self.times.truncate(len);
        self.states.truncate(len);
    }

    pub fn prefix(&self, len: usize) -> TimedTrace {
        let mut t = self.clone();
        t.truncate(len);
        t
    }

    pub fn state(&self, step: usize) -> &[Value] {
        &self.states[step - 1]
    }

    pub fn state_mut(&mut self, step: usize) -> &mut Vec<Value> {
        &mut self.states[step - 1]
    }

    /// Value of `name` at `step` (1-based); `t` reads the time stamp.
    pub fn get(&self, name: &str, step: usize) -> Option<Value> {
        if step == 0 || step > self.times.len() {
            return None;
        }
        if name == TIME_VAR {
            return Some(Value::Real(self.times[step - 1].clone()));
        }
        self.index.get(name).map(|&i| self.states[step - 1][i].clone())
    }

    pub fn get_ref(&self, name: &str, step: usize) -> Option<&Value> {
        self.index.get(name).and_then(|&i| self.states.get(step.wrapping_sub(1)).map(|s| &s[i]))
    }

    pub fn set(&mut self, name: &str, step: usize, v: Value) {
        if name == TIME_VAR {
            self.times[step - 1] = v.as_real().cloned().expect("time must be a finite real");
        } else if let Some(&i) = self.index.get(name) {
            self.states[step - 1][i] = v;
        }
    }

    /// Restriction to a subset of variables.
    pub fn project(&self, names: &[String]) -> TimedTrace {
        let vars: Vec<VarDecl> = self.vars.iter().filter(|d| names.contains(&d.name)).cloned().collect();
        let idx: Vec<usize> = vars.iter().map(|d| self.index[&d.name]).collect();
        let mut out = TimedTrace::new(vars);
        for (k, t) in self.times.iter().enumerate() {
            out.push(t.clone(), idx.iter().map(|&i| self.states[k][i].clone()).collect());
        }
        out
    }

    /// Time strictly increases along the trace.
    pub fn strictly_increasing(&self) -> bool {
        self.times.windows(2).all(|w| w[0] < w[1])
    }

    /// Divergence check used in simulation reports.
    pub fn reaches(&self, threshold: &Rational) -> bool {
        self.times.last().is_some_and(|t| t >= threshold)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let vars: Vec<serde_json::Value> =
            self.vars.iter().map(|d| json!({"name": d.name, "type": d.ty.keyword()})).collect();
        let steps: Vec<serde_json::Value> = self
            .times
            .iter()
            .zip(&self.states)
            .map(|(t, row)| {
                let mut m = Map::new();
                m.insert(TIME_VAR.to_string(), serde_json::Value::String(format_num_den(t)));
                for (d, v) in self.vars.iter().zip(row) {
                    m.insert(d.name.clone(), v.to_json());
                }
                serde_json::Value::Object(m)
            })
            .collect();
        json!({"vars": vars, "steps": steps})
    }

    pub fn from_json(v: &serde_json::Value) -> Result<TimedTrace, String> {
        let vars_json = v.get("vars").and_then(|x| x.as_array()).ok_or("trace JSON needs a `vars` array")?;
        let mut vars = Vec::new();
        for d in vars_json {
            let (name, ty) = match d {
                serde_json::Value::Object(o) => {
                    let name = o.get("name").and_then(|x| x.as_str()).ok_or("var entry needs `name`")?;
                    let ty = o.get("type").and_then(|x| x.as_str()).ok_or("var entry needs `type`")?;
                    (name.to_string(), ty.to_string())
                }
                _ => return Err("var entries are {\"name\", \"type\"} objects".into()),
            };
            let ty = TypeTag::from_keyword(&ty).ok_or_else(|| format!("unknown type `{ty}`"))?;
            if name != TIME_VAR {
                vars.push(VarDecl::new(name, ty));
            }
        }
        let mut tr = TimedTrace::new(vars);
        let steps = v.get("steps").and_then(|x| x.as_array()).ok_or("trace JSON needs a `steps` array")?;
        for (k, s) in steps.iter().enumerate() {
            let obj = s.as_object().ok_or_else(|| format!("step {} is not an object", k + 1))?;
            let t = obj
                .get(TIME_VAR)
                .and_then(|x| match x {
                    serde_json::Value::String(s) => parse_rational(s),
                    serde_json::Value::Number(n) => parse_rational(&n.to_string()),
                    _ => None,
                })
                .ok_or_else(|| format!("step {}: missing or malformed `t`", k + 1))?;
            let mut row = Vec::new();
            for d in &tr.vars {
                let raw = obj.get(&d.name).ok_or_else(|| format!("step {}: missing `{}`", k + 1, d.name))?;
                row.push(
                    Value::from_json(d.ty, raw)
                        .ok_or_else(|| format!("step {}: malformed value for `{}`", k + 1, d.name))?,
                );
            }
            tr.push(t, row);
        }
        Ok(tr)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::value::rat;

    #[test]
    fn json_round_trip() {
        let mut tr = TimedTrace::new(vec![VarDecl::new("x", TypeTag::Int), VarDecl::new("to", TypeTag::Real)]);
        tr.push(rat(0, 1), vec![Value::int(0), Value::Infinity]);
        tr.push(rat(15, 1), vec![Value::int(-3), Value::real(1, 3)]);
        let j = tr.to_json();
        assert_eq!(j["steps"][1]["t"], "15/1");
        assert_eq!(j["steps"][1]["x"], "-3");
        assert_eq!(j["steps"][0]["to"], "inf");
        assert_eq!(TimedTrace::from_json(&j).unwrap(), tr);
    }
}
