//! SMT-LIB 2.6 solver subprocess and model parsing.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Write};
use std::path::PathBuf;
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{channel, Receiver, RecvTimeoutError};
use std::thread;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_traits::Zero;

use crate::value::Rational;

use super::CheckError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolverConfig {
    pub path: PathBuf,
    /// Extra arguments; `None` picks defaults from the executable name.
    pub args: Option<Vec<String>>,
    /// Wall-clock budget for one `check-sat`.
    pub timeout: Duration,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let path = std::env::var_os("RTC_SOLVER").map(PathBuf::from).unwrap_or_else(|| PathBuf::from("z3"));
        SolverConfig { path, args: None, timeout: Duration::from_secs(120) }
    }
}

impl SolverConfig {
    pub fn with_path(path: impl Into<PathBuf>) -> Self {
        SolverConfig { path: path.into(), ..Default::default() }
    }

    fn argv(&self) -> Vec<String> {
        if let Some(a) = &self.args {
            return a.clone();
        }
        let name = self.path.file_name().map(|s| s.to_string_lossy().to_lowercase()).unwrap_or_default();
        if name.contains("z3") {
            vec!["-in".into(), "-smt2".into()]
        } else if name.contains("cvc") {
            vec!["--lang=smt2".into(), "--incremental".into(), "--produce-models".into()]
        } else {
            vec![]
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SatResult {
    Sat,
    Unsat,
    Unknown(String),
}

/// One running solver fed incrementally over a pipe.
pub struct Session {
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<String>,
    timeout: Duration,
    /// Everything sent, for diagnostics.
    pub transcript: String,
}

impl Session {
    pub fn start(cfg: &SolverConfig) -> Result<Session, CheckError> {
        let mut child = Command::new(&cfg.path)
            .args(cfg.argv())
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|e| CheckError::Solver(format!("cannot start `{}`: {e}", cfg.path.display())))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        let (tx, rx) = channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                match line {
                    Ok(l) => {
                        if tx.send(l).is_err() {
                            break;
                        }
                    }
                    Err(_) => break,
                }
            }
        });
        let mut s = Session { child, stdin, lines: rx, timeout: cfg.timeout, transcript: String::new() };
        s.send("(set-option :produce-models true)\n(set-logic ALL)\n")?;
        Ok(s)
    }

    pub fn send(&mut self, text: &str) -> Result<(), CheckError> {
        self.transcript.push_str(text);
        self.stdin
            .write_all(text.as_bytes())
            .and_then(|_| self.stdin.flush())
            .map_err(|e| CheckError::Solver(format!("solver pipe closed: {e}")))
    }

    fn next_line(&mut self, deadline: Instant) -> Result<Option<String>, CheckError> {
        let left = deadline.saturating_duration_since(Instant::now());
        match self.lines.recv_timeout(left) {
            Ok(l) => Ok(Some(l)),
            Err(RecvTimeoutError::Timeout) => Ok(None),
            Err(RecvTimeoutError::Disconnected) => Err(CheckError::Solver("solver exited unexpectedly".into())),
        }
    }

    pub fn check_sat(&mut self) -> Result<SatResult, CheckError> {
        self.send("(check-sat)\n")?;
        let deadline = Instant::now() + self.timeout;
        loop {
            let Some(line) = self.next_line(deadline)? else {
                let _ = self.child.kill();
                return Ok(SatResult::Unknown(format!("timeout after {:?}", self.timeout)));
            };
            match line.trim() {
                "sat" => return Ok(SatResult::Sat),
                "unsat" => return Ok(SatResult::Unsat),
                "unknown" => return Ok(SatResult::Unknown("solver returned unknown".into())),
                "" | "success" => continue,
                other if other.starts_with("(error") => return Err(CheckError::Solver(other.to_string())),
                other => return Err(CheckError::Solver(format!("unexpected solver output `{other}`"))),
            }
        }
    }

    pub fn get_model(&mut self) -> Result<String, CheckError> {
        self.send("(get-model)\n")?;
        let deadline = Instant::now() + self.timeout;
        let mut text = String::new();
        let mut depth = 0i64;
        let mut started = false;
        while !(started && depth == 0) {
            let Some(line) = self.next_line(deadline)? else {
                return Err(CheckError::Solver("timeout while reading the model".into()));
            };
            for c in line.chars() {
                match c {
                    '(' => {
                        depth += 1;
                        started = true;
                    }
                    ')' => depth -= 1,
                    _ => {}
                }
            }
            text.push_str(&line);
            text.push('\n');
        }
        if text.trim_start().starts_with("(error") {
            return Err(CheckError::Solver(text.trim().to_string()));
        }
        Ok(text)
    }
}

impl Drop for Session {
    fn drop(&mut self) {
        let _ = self.stdin.write_all(b"(exit)\n");
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

/// S-expression tree of solver output.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SExpr {
    Atom(String),
    List(Vec<SExpr>),
}

pub fn parse_sexprs(text: &str) -> Result<Vec<SExpr>, String> {
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    let mut stack: Vec<Vec<SExpr>> = vec![vec![]];
    while i < chars.len() {
        let c = chars[i];
        match c {
            '(' => {
                stack.push(vec![]);
                i += 1;
            }
            ')' => {
                let done = stack.pop().ok_or("unbalanced `)`")?;
                stack.last_mut().ok_or("unbalanced `)`")?.push(SExpr::List(done));
                i += 1;
            }
            ';' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '|' => {
                let start = i;
                i += 1;
                while i < chars.len() && chars[i] != '|' {
                    i += 1;
                }
                i += 1;
                let atom: String = chars[start..i.min(chars.len())].iter().collect();
                stack.last_mut().unwrap().push(SExpr::Atom(atom));
            }
            '"' => {
                let start = i;
                i += 1;
                while i < chars.len() && chars[i] != '"' {
                    i += 1;
                }
                i += 1;
                let atom: String = chars[start..i.min(chars.len())].iter().collect();
                stack.last_mut().unwrap().push(SExpr::Atom(atom));
            }
            c if c.is_whitespace() => i += 1,
            _ => {
                let start = i;
                while i < chars.len() && !chars[i].is_whitespace() && !"()|;".contains(chars[i]) {
                    i += 1;
                }
                stack.last_mut().unwrap().push(SExpr::Atom(chars[start..i].iter().collect()));
            }
        }
    }
    if stack.len() != 1 {
        return Err("unbalanced `(`".into());
    }
    Ok(stack.pop().unwrap())
}

/// A constant assigned by a model.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ModelValue {
    Bool(bool),
    Num(Rational),
}

fn numeral(s: &str) -> Option<Rational> {
    if let Some((a, b)) = s.split_once('.') {
        let digits = format!("{a}{b}");
        let n: BigInt = digits.parse().ok()?;
        let d = num_traits::pow(BigInt::from(10), b.len());
        return Some(Rational::new(n, d));
    }
    s.parse::<BigInt>().ok().map(Rational::from_integer)
}

fn eval_value(e: &SExpr) -> Option<ModelValue> {
    match e {
        SExpr::Atom(a) if a == "true" => Some(ModelValue::Bool(true)),
        SExpr::Atom(a) if a == "false" => Some(ModelValue::Bool(false)),
        SExpr::Atom(a) => numeral(a).map(ModelValue::Num),
        SExpr::List(xs) => {
            let op = match xs.first()? {
                SExpr::Atom(a) => a.as_str(),
                _ => return None,
            };
            let args: Option<Vec<Rational>> = xs[1..]
                .iter()
                .map(|x| match eval_value(x)? {
                    ModelValue::Num(r) => Some(r),
                    _ => None,
                })
                .collect();
            let args = args?;
            let r = match (op, args.as_slice()) {
                ("-", [a]) => -a.clone(),
                ("-", [a, b]) => a - b,
                ("+", _) => args.iter().fold(Rational::zero(), |acc, x| acc + x),
                ("/", [a, b]) if !b.is_zero() => a / b,
                ("to_real", [a]) => a.clone(),
                _ => return None,
            };
            Some(ModelValue::Num(r))
        }
    }
}

fn unquote(s: &str) -> &str {
    s.strip_prefix('|').and_then(|x| x.strip_suffix('|')).unwrap_or(s)
}

/// Constants of a `get-model` response, keyed by unquoted symbol name.
/// Accepts both `(model ...)` and bare-list layouts.
pub fn parse_model(text: &str) -> Result<HashMap<String, ModelValue>, String> {
    let top = parse_sexprs(text)?;
    let mut out = HashMap::new();
    let mut items: Vec<&SExpr> = vec![];
    for e in &top {
        if let SExpr::List(xs) = e {
            let body = match xs.first() {
                Some(SExpr::Atom(a)) if a == "model" => &xs[1..],
                _ => &xs[..],
            };
            items.extend(body.iter());
        }
    }
    for it in items {
        let SExpr::List(xs) = it else { continue };
        if xs.len() != 5 || xs[0] != SExpr::Atom("define-fun".into()) {
            continue;
        }
        if xs[2] != SExpr::List(vec![]) {
            continue;
        }
        let SExpr::Atom(name) = &xs[1] else { continue };
        if let Some(v) = eval_value(&xs[4]) {
            out.insert(unquote(name).to_string(), v);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::value::rat;

    #[test]
    fn model_values() {
        let m = parse_model(
            "(\n  (define-fun |t@2| () Real\n    15.0)\n  (define-fun |x@1| () Int\n    (- 3))\n  (define-fun |r@1| () Real (/ 1.0 3.0))\n  (define-fun b () Bool true)\n)",
        )
        .unwrap();
        assert_eq!(m["t@2"], ModelValue::Num(rat(15, 1)));
        assert_eq!(m["x@1"], ModelValue::Num(rat(-3, 1)));
        assert_eq!(m["r@1"], ModelValue::Num(rat(1, 3)));
        assert_eq!(m["b"], ModelValue::Bool(true));
        let m = parse_model("(model (define-fun |to@1| () Real (- (/ 1.0 2.0))))").unwrap();
        assert_eq!(m["to@1"], ModelValue::Num(rat(-1, 2)));
    }
}
