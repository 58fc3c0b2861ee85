//! C ABI over the `waml` library.
//!
//! Handles are opaque heap objects released with their `_free` function.
//! Every fallible call returns a [`WamlStatus`]; on failure a message is
//! available from [`waml_last_error`] until the next call on the same thread.
//! Strings returned through out-parameters are owned by the caller and must be
//! released with [`waml_string_free`].

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use waml::bisim::{distinguishing_formula, greatest_bisim};
use waml::interp::{build_counterexample, verify_lemma1};
use waml::model::{load, save, NModel};
use waml::proof::{check_script, ProofScript};
use waml::semantics::check;
use waml::translate::{st, tptp_export, Role};
use waml::{Error, Formula};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WamlStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Syntax = 3,
    InvalidModel = 4,
    UnknownWorld = 5,
    ArityMismatch = 6,
    BudgetExceeded = 7,
    InvalidArgument = 8,
    Script = 9,
    Internal = 10,
    Panic = 11,
}

/// Opaque n-model.
pub struct WamlModel(NModel);

/// Opaque formula.
pub struct WamlFormula(Formula);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(WamlStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        let status = match e {
            Error::Syntax { .. } => WamlStatus::Syntax,
            Error::InvalidModel(_) | Error::Json { .. } => WamlStatus::InvalidModel,
            Error::UnknownWorld(_) => WamlStatus::UnknownWorld,
            Error::ArityMismatch { .. } | Error::RelationArity { .. } => WamlStatus::ArityMismatch,
            Error::BudgetExceeded { .. } => WamlStatus::BudgetExceeded,
            Error::Script(_) | Error::TooManyAtoms { .. } | Error::IncompleteSubstitution(_) => WamlStatus::Script,
            Error::Internal(_) => WamlStatus::Internal,
            _ => WamlStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

fn set_error(msg: Option<String>) {
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = msg.map(|m| CString::new(m.replace('\0', " ")).expect("nul bytes removed"));
    });
}

fn guard(body: impl FnOnce() -> Result<(), Failure>) -> WamlStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            set_error(None);
            WamlStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(Some(msg));
            status
        }
        Err(_) => {
            set_error(Some("panic inside waml".into()));
            WamlStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(WamlStatus::NullArgument, format!("`{what}` is null"))
}

unsafe fn cstr<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(WamlStatus::InvalidUtf8, format!("`{what}` is not UTF-8")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn put<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

fn owned_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " "))
        .expect("nul bytes removed")
        .into_raw()
}

fn alphabet(letters: &str) -> BTreeSet<String> {
    letters
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect()
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn waml_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn waml_version() -> *const c_char {
    static VERSION: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(v) => v,
        Err(_) => panic!("version string"),
    };
    VERSION.as_ptr()
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn waml_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn waml_formula_parse(text: *const c_char, out: *mut *mut WamlFormula) -> WamlStatus {
    guard(|| {
        let f = waml::parse(cstr(text, "text")?)?;
        put(out, Box::into_raw(Box::new(WamlFormula(f))), "out")
    })
}

/// Canonical printed form of a formula.
///
/// # Safety
/// `f` must be a live formula handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn waml_formula_print(f: *const WamlFormula, out: *mut *mut c_char) -> WamlStatus {
    guard(|| {
        let f = handle(f, "formula")?;
        put(out, owned_string(f.0.to_string()), "out")
    })
}

/// # Safety
/// `f` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn waml_formula_free(f: *mut WamlFormula) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// Loads a model from `len` bytes of JSON.
///
/// # Safety
/// `json` must point to `len` readable bytes; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn waml_model_load_json(json: *const u8, len: usize, out: *mut *mut WamlModel) -> WamlStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        let m = load(std::slice::from_raw_parts(json, len))?;
        put(out, Box::into_raw(Box::new(WamlModel(m))), "out")
    })
}

/// Canonical JSON form of a model.
///
/// # Safety
/// `m` must be a live model handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn waml_model_save_json(m: *const WamlModel, out: *mut *mut c_char) -> WamlStatus {
    guard(|| {
        let m = handle(m, "model")?;
        let bytes = save(&m.0);
        let s = String::from_utf8(bytes).map_err(|e| Failure(WamlStatus::Internal, e.to_string()))?;
        put(out, owned_string(s), "out")
    })
}

/// # Safety
/// `m` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn waml_model_free(m: *mut WamlModel) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Writes whether `f` holds at `world`.
///
/// # Safety
/// Handles must be live, `world` NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn waml_check(
    m: *const WamlModel,
    world: *const c_char,
    f: *const WamlFormula,
    out: *mut bool,
) -> WamlStatus {
    guard(|| {
        let holds = check(&handle(m, "model")?.0, cstr(world, "world")?, &handle(f, "formula")?.0)?;
        put(out, holds, "out")
    })
}

/// Writes whether `w` and `v` are bisimilar over the comma-separated `letters`.
///
/// # Safety
/// Handles must be live, strings NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn waml_bisimilar(
    left: *const WamlModel,
    w: *const c_char,
    right: *const WamlModel,
    v: *const c_char,
    letters: *const c_char,
    out: *mut bool,
) -> WamlStatus {
    guard(|| {
        let (l, r) = (&handle(left, "left")?.0, &handle(right, "right")?.0);
        let (w, v) = (cstr(w, "w")?, cstr(v, "v")?);
        let pair = (l.world_index(w)?, r.world_index(v)?);
        let z = greatest_bisim(l, r, &alphabet(cstr(letters, "letters")?))?;
        put(out, z.pairs.contains(&pair), "out")
    })
}

/// Writes a formula true at `w` and false at `v`, or null when they are bisimilar.
///
/// # Safety
/// Handles must be live, strings NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn waml_distinguish(
    left: *const WamlModel,
    w: *const c_char,
    right: *const WamlModel,
    v: *const c_char,
    letters: *const c_char,
    out: *mut *mut WamlFormula,
) -> WamlStatus {
    guard(|| {
        let d = distinguishing_formula(
            &handle(left, "left")?.0,
            cstr(w, "w")?,
            &handle(right, "right")?.0,
            cstr(v, "v")?,
            &alphabet(cstr(letters, "letters")?),
        )?;
        let p = d.map_or(ptr::null_mut(), |f| Box::into_raw(Box::new(WamlFormula(f))));
        put(out, p, "out")
    })
}

/// TPTP `fof` axiom for the standard translation of `f`, free variable grounded to `ground`.
///
/// # Safety
/// `f` must be live, strings NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn waml_translate_tptp(
    f: *const WamlFormula,
    arity: usize,
    name: *const c_char,
    ground: *const c_char,
    out: *mut *mut c_char,
) -> WamlStatus {
    guard(|| {
        let g = st(&handle(f, "formula")?.0, arity, "x");
        let grounding = BTreeMap::from([("x".to_string(), cstr(ground, "ground")?.to_string())]);
        let s = tptp_export(&g, Role::Axiom, cstr(name, "name")?, &grounding)?;
        put(out, owned_string(s), "out")
    })
}

/// Checks a proof script given as JSON. `out_invalid_line` receives 0 when
/// every line is justified, otherwise the 1-based number of the first bad line.
///
/// # Safety
/// `json` must be NUL-terminated, `out_invalid_line` writable.
#[no_mangle]
pub unsafe extern "C" fn waml_proof_check_json(json: *const c_char, out_invalid_line: *mut usize) -> WamlStatus {
    guard(|| {
        let script = ProofScript::from_json(cstr(json, "json")?.as_bytes())?;
        let bad = check_script(&script)?.map_or(0, |l| l.line);
        put(out_invalid_line, bad, "out_invalid_line")
    })
}

/// Builds and verifies the interpolation counterexample for arity `n`;
/// `sat_bound = 0` skips the corroborating search.
///
/// # Safety
/// `out_pass` must be writable.
#[no_mangle]
pub unsafe extern "C" fn waml_interp_verify(n: usize, sat_bound: usize, out_pass: *mut bool) -> WamlStatus {
    guard(|| {
        let report = verify_lemma1(&build_counterexample(n)?, sat_bound, None)?;
        put(out_pass, report.pass, "out_pass")
    })
}
