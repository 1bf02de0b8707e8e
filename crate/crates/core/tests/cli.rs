use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rtc_core::parser::parse_source;
use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn solver() -> String {
    std::env::var("RTC_SOLVER").unwrap_or_else(|_| {
        if Path::new("/usr/local/bin/z3").exists() {
            "/usr/local/bin/z3".into()
        } else {
            "z3".into()
        }
    })
}

fn rtc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rtc")).args(args).output().expect("run rtc")
}

fn rtc_in(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rtc")).current_dir(dir).args(args).output().expect("run rtc")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn check_json(file: &str, extra: &[&str]) -> (i32, Value) {
    let f = fixture(file);
    let s = solver();
    let mut args = vec!["check", f.to_str().unwrap(), "--solver", &s, "--format", "json"];
    args.extend_from_slice(extra);
    let o = rtc(&args);
    let report: Value = serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(&o)));
    (o.status.code().unwrap(), report)
}

fn validate(report: &Value) {
    let text = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("schema/report.schema.json")).unwrap();
    let schema: Value = serde_json::from_str(&text).unwrap();
    let compiled = jsonschema::JSONSchema::compile(&schema).expect("schema compiles");
    let msgs: Vec<String> = match compiled.validate(report) {
        Ok(()) => vec![],
        Err(errors) => errors.map(|e| format!("{} at {}", e, e.instance_path)).collect(),
    };
    assert!(msgs.is_empty(), "report does not match the schema: {msgs:?}");
}

#[test]
fn avionics_is_proved_by_kind() {
    let (code, report) = check_json("avionics.rtc", &["--engine", "kind", "-k", "8"]);
    validate(&report);
    assert_eq!(code, 0, "{report:#}");
    assert_eq!(report["summary"]["proved"], report["summary"]["total"]);
}

#[test]
fn cyclic_fails_on_the_first_assumption() {
    let (code, report) = check_json("cyclic.rtc", &[]);
    validate(&report);
    assert_eq!(code, 1);
    let obs = report["obligations"].as_array().unwrap();
    let bad: Vec<&Value> = obs.iter().filter(|o| o["verdict"] == "falsified").collect();
    assert_eq!(bad.len(), 1);
    assert_eq!(bad[0]["name"], "loop: assumption w.pos");
    assert_eq!(bad[0]["step"], 1);
    assert_eq!(bad[0]["counterexample"]["steps"].as_array().unwrap().len(), 1);
}

#[test]
fn weak_rule_and_order_flags() {
    let (code, report) = check_json("cyclic.rtc", &["--unsafe-weak-assumptions"]);
    assert_eq!(code, 0);
    assert_eq!(report["rule"], "weak");
    let (code, report) = check_json("cyclic.rtc", &["--order", "v,w"]);
    assert_eq!(code, 1);
    let bad: Vec<&Value> =
        report["obligations"].as_array().unwrap().iter().filter(|o| o["verdict"] == "falsified").collect();
    assert_eq!(bad[0]["name"], "loop: assumption v.pos");
    let f = fixture("cyclic.rtc");
    let o = rtc(&["check", f.to_str().unwrap(), "--order", "v"]);
    assert!(o.status.code().unwrap() > 2);
}

#[test]
fn program_properties_and_engines() {
    for engine in ["explicit", "bmc", "kind"] {
        let (code, report) = check_json("counter.rtc", &["--engine", engine, "-k", "6", "--horizon", "6"]);
        validate(&report);
        assert_eq!(code, 1, "{engine}");
        let lt3 = &report["obligations"][0];
        assert_eq!(lt3["verdict"], "falsified");
        assert_eq!(lt3["step"], 4);
        assert_eq!(report["obligations"][1]["verdict"], "proved");
    }
}

#[test]
fn unknown_exits_two() {
    // not inductive at depth 1 and no violation within it
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("slow.rtc");
    std::fs::write(&p, "x : int; x = (0 -> pre(x) + 1); property \"small\" : x < 5;").unwrap();
    let s = solver();
    let o = rtc(&["check", p.to_str().unwrap(), "--solver", &s, "--engine", "kind", "-k", "1"]);
    assert_eq!(o.status.code(), Some(2), "{}", stdout(&o));
}

#[test]
fn tool_errors_exit_above_two() {
    let o = rtc(&["check", "missing.rtc"]);
    assert!(o.status.code().unwrap() > 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("missing.rtc"));
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.rtc");
    std::fs::write(&p, "x : int; x = ;").unwrap();
    let o = rtc(&["check", p.to_str().unwrap()]);
    assert!(o.status.code().unwrap() > 2);
    let o = rtc(&["check", fixture("counter.rtc").to_str().unwrap(), "--engine", "pdr"]);
    assert!(o.status.code().unwrap() > 2);
}

#[test]
fn config_file_sits_below_flags() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("rtc.toml"), "engine = \"bmc\"\nk = 5\ntime_grid = [5, 10]\n").unwrap();
    let f = fixture("counter.rtc");
    let s = solver();
    let o = rtc_in(dir.path(), &["check", f.to_str().unwrap(), "--solver", &s, "--format", "json", "--verbose"]);
    let report: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["engine"], "bmc");
    assert_eq!(report["k"], 5);
    let log = String::from_utf8_lossy(&o.stderr);
    assert!(log.contains("engine = \"bmc\" (config)"), "{log}");
    assert!(log.contains("solver = ") && log.contains("(flag)"), "{log}");
    let o = rtc_in(dir.path(), &["check", f.to_str().unwrap(), "--engine", "explicit", "--format", "json"]);
    let report: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["engine"], "explicit");
    assert_eq!(report["k"], 5);

    std::fs::write(dir.path().join("rtc.toml"), "engin = \"bmc\"\n").unwrap();
    let o = rtc_in(dir.path(), &["check", f.to_str().unwrap()]);
    assert!(o.status.code().unwrap() > 2);
}

#[test]
fn lemma_flag_is_checked_before_use() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("two.rtc");
    // x and y swap every step; `x >= 0` alone is not 1-inductive
    std::fs::write(&p, "x, y : int; x = (0 -> pre(y)); y = (0 -> pre(x)); property \"nonneg\" : x >= 0;").unwrap();
    let s = solver();
    let path = p.to_str().unwrap();
    let o = rtc(&["check", path, "--solver", &s, "-k", "1"]);
    assert_eq!(o.status.code(), Some(2), "{}", stdout(&o));
    let o = rtc(&["check", path, "--solver", &s, "-k", "1", "--lemma", "both: x >= 0 and y >= 0"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    // a false lemma is not assumed
    let o = rtc(&["check", path, "--solver", &s, "-k", "1", "--lemma", "x > y"]);
    assert_eq!(o.status.code(), Some(2), "{}", stdout(&o));
}

#[test]
fn simulate_counter() {
    let f = fixture("counter.rtc");
    let o = rtc(&["simulate", f.to_str().unwrap(), "--steps", "4"]);
    assert_eq!(o.status.code(), Some(0));
    let tr: Value = serde_json::from_slice(&o.stdout).unwrap();
    let xs: Vec<&str> = tr["steps"].as_array().unwrap().iter().map(|s| s["x"].as_str().unwrap()).collect();
    assert_eq!(xs, ["0", "1", "2", "3"]);
}

#[test]
fn simulate_rejects_supplied_traces() {
    let dir = tempfile::tempdir().unwrap();
    let tr = dir.path().join("bad.json");
    std::fs::write(
        &tr,
        r#"{"vars":[{"name":"x","type":"int"}],"steps":[{"t":"0","x":"0"},{"t":"5","x":"2"}]}"#,
    )
    .unwrap();
    let f = fixture("counter.rtc");
    let o = rtc(&["simulate", f.to_str().unwrap(), "--trace", tr.to_str().unwrap(), "--format", "json"]);
    assert_eq!(o.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["admissible"], false);
    assert_eq!(v["step"], 2);

    let prog = dir.path().join("msg.rtc");
    std::fs::write(&prog, "msg : real;\ntimeout msg;\nassert \"arrivals\" : msg = (10.0 -> pre(msg) + 10.0);\n").unwrap();
    std::fs::write(&tr, r#"{"vars":[{"name":"msg","type":"real"}],"steps":[{"t":"0","msg":"0"}]}"#).unwrap();
    let o = rtc(&["simulate", prog.to_str().unwrap(), "--trace", tr.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("step 1"), "{}", stdout(&o));
    assert!(stdout(&o).contains("arrivals"), "{}", stdout(&o));
}

#[test]
fn simulate_reports_calendar_exhaustion() {
    let dir = tempfile::tempdir().unwrap();
    let prog = dir.path().join("stuck.rtc");
    // every timeout lies in the past after the first step
    std::fs::write(&prog, "msg : real;\ntimeout msg;\nmsg = (10.0 -> pre(msg));\n").unwrap();
    let o = rtc(&["simulate", prog.to_str().unwrap(), "--steps", "4"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("calendar"), "{}", stdout(&o));
}

#[test]
fn emit_observer_lowering() {
    let o = rtc(&["emit", "--pattern", "whenever a occurs b occurs during [10.0,20.0]", "--mode", "observer"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    for v in ["run", "timer", "rec_c", "pass"] {
        assert!(text.contains(&format!("var {v} :")), "{text}");
    }
    let asserts = text.lines().filter(|l| !l.starts_with("var ") && !l.starts_with("property")).count();
    assert_eq!(asserts, 4, "{text}");
    assert!(text.contains("rec_c => a"));
    assert!(text.contains("pass = (timer <= 20.0)"));
}

#[test]
fn emit_constraint_unsupported() {
    let o = rtc(&[
        "emit",
        "--pattern",
        "when a holds during [0.0, 5.0] b occurs during [1.0, 2.0]",
        "--mode",
        "constraint",
    ]);
    assert!(o.status.code().unwrap() > 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("not supported in constraint mode"));
}

#[test]
fn emit_smt_matches_golden() {
    let f = fixture("counter.rtc");
    let o = rtc(&["emit", f.to_str().unwrap(), "--mode", "smt", "-k", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let golden = include_str!("golden/counter_bmc3.smt2");
    assert_eq!(stdout(&o), golden);
}

#[test]
fn emitted_core_text_parses_back() {
    for name in ["counter.rtc", "example1.rtc", "avionics.rtc", "pipeline3.rtc"] {
        let f = fixture(name);
        let o = rtc(&["emit", f.to_str().unwrap(), "--mode", "core"]);
        assert_eq!(o.status.code(), Some(0), "{name}");
        let text = stdout(&o);
        parse_source(&text).unwrap_or_else(|e| panic!("{name}: {e}\n{text}"));
        let again = rtc_in(Path::new(env!("CARGO_MANIFEST_DIR")), &["emit", f.to_str().unwrap(), "--mode", "core"]);
        assert_eq!(stdout(&again), text, "{name}: emit is not byte-stable");
    }
}

#[test]
fn compose_lists_obligations() {
    let f = fixture("pipeline3.rtc");
    let o = rtc(&["compose", f.to_str().unwrap(), "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let items: Vec<Value> = serde_json::from_slice(&o.stdout).unwrap();
    let formulas: Vec<u64> = items.iter().map(|i| i["formula"].as_u64().unwrap()).collect();
    assert_eq!(formulas, [4, 4, 4, 5, 1, 1, 1]);
    for i in &items {
        parse_source(i["program"].as_str().unwrap()).unwrap();
    }
    let o = rtc(&["compose", f.to_str().unwrap(), "--monolithic"]);
    assert_eq!(o.status.code(), Some(0));
    parse_source(&stdout(&o)).unwrap();
}

#[test]
fn oracle_prints_its_seed() {
    let o = rtc(&["oracle", "--suite", "pattern-in-constraint", "--seed", "11", "--cases", "300"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("seed 11\n"), "{}", stdout(&o));
    let o = rtc(&["oracle", "--suite", "constraint-in-pattern", "--seed", "11", "--cases", "300", "--format", "json"]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["seed"], 11);
    assert_eq!(v["suites"][0]["discrepancies"].as_array().unwrap().len(), 0);
}
