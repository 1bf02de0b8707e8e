//! C ABI over `rtc_core`.
//!
//! Every function returns an [`RtcStatus`]. On failure the message is kept in
//! a thread-local slot readable through [`rtc_last_error`]. Strings handed out
//! through `out` parameters are owned by the caller and released with
//! [`rtc_string_free`]; models with [`rtc_model_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use rtc_core::ast::{Property, SpecProgram};
use rtc_core::check::{emit_smtlib, Engine, EngineConfig, SmtMode, SolverConfig};
use rtc_core::cli::{check_source, exit_code, pattern_host};
use rtc_core::compose::{compose_monolithic, AssumptionRule};
use rtc_core::parser::parse_source;
use rtc_core::pattern::{lower_observer, parse_pattern, LoweringMode};
use rtc_core::print::program_to_string;
use rtc_core::semantics::{trace_admissible, TimedTrace};
use rtc_core::source::Source;
use rtc_core::Error;

/// Result of every call. Values below 3 mirror the verdicts of `rtc check`.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RtcStatus {
    Ok = 0,
    Falsified = 1,
    Unknown = 2,
    NullArgument = 3,
    InvalidUtf8 = 4,
    Parse = 5,
    Usage = 6,
    Tool = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RtcEngine {
    Explicit = 0,
    Bmc = 1,
    Kind = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RtcLowering {
    Observer = 0,
    Constraint = 1,
    SideCondition = 2,
}

/// Options for [`rtc_check`]. Zero fields take the defaults: k = 8, horizon
/// 5, solver from `RTC_SOLVER` or `z3` on the path.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct RtcCheckOptions {
    pub engine: RtcEngine,
    pub k: usize,
    pub horizon: usize,
    /// Nullable path to an SMT-LIB solver.
    pub solver: *const c_char,
    /// Discharge assumptions with the weak rule instead of the ordered one.
    pub weak_assumptions: bool,
}

/// A parsed program or component system.
pub struct RtcModel {
    source: Source,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let s = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(s).ok());
}

fn status_of(e: &Error) -> RtcStatus {
    match e {
        Error::Parse(_) | Error::Pattern(_) | Error::Type(_) => RtcStatus::Parse,
        Error::Usage(_) => RtcStatus::Usage,
        _ => RtcStatus::Tool,
    }
}

struct Fail(RtcStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<RtcStatus, Fail>) -> RtcStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(s)) => s,
        Ok(Err(Fail(s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("panic inside rtc");
            RtcStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail(RtcStatus::NullArgument, format!("{what} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail(RtcStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn model<'a>(m: *const RtcModel) -> Result<&'a RtcModel, Fail> {
    m.as_ref().ok_or_else(|| Fail(RtcStatus::NullArgument, "model is null".into()))
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail(RtcStatus::NullArgument, "output pointer is null".into()));
    }
    *out = CString::new(s.replace('\0', " ")).unwrap().into_raw();
    Ok(())
}

/// The flattened program: elaborated patterns, or the monolithic composition
/// of a system with its top guarantee as the only property.
fn flat(m: &RtcModel) -> Result<SpecProgram, Error> {
    Ok(match &m.source {
        Source::Program(ps) => ps.elaborate()?,
        Source::System(sys) => {
            let (mut p, prop) = compose_monolithic(sys)?;
            p.properties = vec![Property::new(sys.top.name.clone(), prop)];
            p
        }
    })
}

/// Version string of the library. Static, never freed.
#[no_mangle]
pub extern "C" fn rtc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next call on the same thread.
#[no_mangle]
pub extern "C" fn rtc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// # Safety
/// `s` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn rtc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses and elaborates `source`.
///
/// # Safety
/// `source` must be a NUL-terminated string, `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn rtc_model_parse(source: *const c_char, out: *mut *mut RtcModel) -> RtcStatus {
    guard(|| {
        if out.is_null() {
            return Err(Fail(RtcStatus::NullArgument, "output pointer is null".into()));
        }
        let src = parse_source(text(source, "source")?).map_err(Error::from)?;
        if let Source::Program(ps) = &src {
            ps.elaborate().map_err(Error::from)?;
        }
        *out = Box::into_raw(Box::new(RtcModel { source: src }));
        Ok(RtcStatus::Ok)
    })
}

/// # Safety
/// `m` must come from [`rtc_model_parse`] or be null.
#[no_mangle]
pub unsafe extern "C" fn rtc_model_free(m: *mut RtcModel) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// True when the model is a component system.
///
/// # Safety
/// `m` must be a live model or null.
#[no_mangle]
pub unsafe extern "C" fn rtc_model_is_system(m: *const RtcModel) -> bool {
    m.as_ref().is_some_and(|m| matches!(m.source, Source::System(_)))
}

/// The model printed in the core language, patterns lowered.
///
/// # Safety
/// `m` must be a live model, `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn rtc_model_to_core(m: *const RtcModel, out: *mut *mut c_char) -> RtcStatus {
    guard(|| {
        let p = flat(model(m)?)?;
        put_string(out, program_to_string(&p))?;
        Ok(RtcStatus::Ok)
    })
}

/// SMT-LIB script for one property. `property` may be null for the first.
/// `engine` is `RTC_ENGINE_BMC` or `RTC_ENGINE_KIND`.
///
/// # Safety
/// `m` must be a live model, `property` null or a string, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rtc_emit_smt(
    m: *const RtcModel,
    property: *const c_char,
    engine: RtcEngine,
    k: usize,
    out: *mut *mut c_char,
) -> RtcStatus {
    guard(|| {
        let p = flat(model(m)?)?;
        let prop = if property.is_null() {
            p.properties.first()
        } else {
            let name = text(property, "property")?;
            p.properties.iter().find(|q| q.name == name)
        }
        .ok_or_else(|| Fail(RtcStatus::Usage, "no such property".into()))?;
        let mode = match engine {
            RtcEngine::Bmc => SmtMode::Bmc(k.max(1)),
            RtcEngine::Kind => SmtMode::KInduction(k.max(1)),
            RtcEngine::Explicit => return Err(Fail(RtcStatus::Usage, "smt scripts are for bmc or kind".into())),
        };
        let script = emit_smtlib(&p, &prop.expr, mode).map_err(Error::from)?;
        put_string(out, script)?;
        Ok(RtcStatus::Ok)
    })
}

/// Discharges every property of a program, or every obligation of a system.
/// Returns the combined verdict and, when `report` is not null, a JSON report
/// with `obligations` and `summary`.
///
/// # Safety
/// `m` must be a live model, `opts` null or valid, `report` null or writable.
#[no_mangle]
pub unsafe extern "C" fn rtc_check(m: *const RtcModel, opts: *const RtcCheckOptions, report: *mut *mut c_char) -> RtcStatus {
    guard(|| {
        let m = model(m)?;
        let mut cfg = EngineConfig::default();
        let mut rule = AssumptionRule::Ordered;
        if let Some(o) = opts.as_ref() {
            cfg.engine = match o.engine {
                RtcEngine::Explicit => Engine::Explicit,
                RtcEngine::Bmc => Engine::Bmc,
                RtcEngine::Kind => Engine::Kind,
            };
            if o.k > 0 {
                cfg.k = o.k;
            }
            if o.horizon > 0 {
                cfg.domain.horizon = o.horizon;
            }
            if !o.solver.is_null() {
                cfg.solver = SolverConfig::with_path(text(o.solver, "solver")?);
            }
            if o.weak_assumptions {
                rule = AssumptionRule::Weak;
            }
        }
        let rows = check_source(m.source.clone(), &cfg, rule, None)?;
        if rows.is_empty() {
            return Err(Fail(RtcStatus::Usage, "nothing to check".into()));
        }
        if !report.is_null() {
            let count = |v: &str| rows.iter().filter(|r| r.verdict_name() == v).count();
            let json = serde_json::json!({
                "engine": cfg.engine.name(),
                "k": cfg.k,
                "obligations": rows.iter().map(|r| r.to_json()).collect::<Vec<_>>(),
                "summary": {
                    "total": rows.len(),
                    "proved": count("proved"),
                    "falsified": count("falsified"),
                    "unknown": count("unknown"),
                    "error": count("error"),
                },
            });
            put_string(report, json.to_string())?;
        }
        Ok(match exit_code(&rows) {
            0 => RtcStatus::Ok,
            1 => RtcStatus::Falsified,
            2 => RtcStatus::Unknown,
            _ => {
                let msg = rows.iter().find_map(|r| r.result.as_ref().err().map(|e| format!("{}: {e}", r.name)));
                set_error(msg.unwrap_or_else(|| "obligation failed".into()));
                return Ok(RtcStatus::Tool);
            }
        })
    })
}

/// Checks a JSON trace against the model's constraints and calendar.
/// Returns `RTC_STATUS_OK` when admissible. Otherwise returns
/// `RTC_STATUS_FALSIFIED`, writes the failing step to `step` when it is not
/// null, and leaves the violation in [`rtc_last_error`].
///
/// # Safety
/// `m` must be a live model, `trace_json` a string, `step` null or writable.
#[no_mangle]
pub unsafe extern "C" fn rtc_trace_admissible(m: *const RtcModel, trace_json: *const c_char, step: *mut usize) -> RtcStatus {
    guard(|| {
        let p = flat(model(m)?)?;
        let bad = |e: String| Fail(RtcStatus::Usage, format!("trace: {e}"));
        let v: serde_json::Value = serde_json::from_str(text(trace_json, "trace")?).map_err(|e| bad(e.to_string()))?;
        let tr = TimedTrace::from_json(&v).map_err(bad)?;
        match trace_admissible(&p, &tr) {
            Ok(()) => Ok(RtcStatus::Ok),
            Err(v) => {
                if !step.is_null() {
                    *step = v.step;
                }
                Err(Fail(RtcStatus::Falsified, v.to_string()))
            }
        }
    })
}

/// Lowers a single pattern, e.g. `"whenever a occurs b occurs during [0.0, 5.0]"`,
/// into core-language text: fresh variables, definitions, constraints and
/// the property if any.
///
/// # Safety
/// `pattern` must be a string, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rtc_pattern_lower(pattern: *const c_char, mode: RtcLowering, out: *mut *mut c_char) -> RtcStatus {
    guard(|| {
        let pat = parse_pattern(text(pattern, "pattern")?).map_err(Error::from)?;
        let mode = match mode {
            RtcLowering::Observer => LoweringMode::PropertyObserver,
            RtcLowering::Constraint => LoweringMode::Constraint,
            RtcLowering::SideCondition => LoweringMode::PropSideCondition,
        };
        let bundle = lower_observer(&pat, &pattern_host(&pat), mode, None).map_err(Error::from)?;
        put_string(out, bundle.to_text())?;
        Ok(RtcStatus::Ok)
    })
}
