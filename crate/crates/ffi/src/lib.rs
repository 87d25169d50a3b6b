//! C interface to `mbqnet`.
//!
//! Networks live behind an opaque [`MbqNetwork`] handle. Every call returns an
//! [`MbqStatus`]; on failure [`mbq_last_error`] describes what went wrong on
//! the calling thread. Strings handed out by this library are JSON reports or
//! DSL text and must be released with [`mbq_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use mbqnet::dsl::{parse_network, render_network};
use mbqnet::inputs::load_inputs;
use mbqnet::netmodel::Network;
use mbqnet::report::{self, render_report};
use mbqnet::semantics::{check_schedules, denotational, equivalent, operational};
use thiserror::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MbqStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    UnknownProtocol = 4,
    Inputs = 5,
    Semantics = 6,
    Panic = 7,
}

/// A parsed, validated network.
pub struct MbqNetwork(Network);

#[derive(Debug, Error)]
enum FfiError {
    #[error("null pointer passed as {0}")]
    Null(&'static str),
    #[error("{0} is not valid UTF-8")]
    Utf8(&'static str),
    #[error("{0}")]
    Parse(String),
    #[error(transparent)]
    Library(#[from] mbqnet::library::LibraryError),
    #[error(transparent)]
    Inputs(#[from] mbqnet::inputs::InputsError),
    #[error(transparent)]
    Semantics(#[from] mbqnet::semantics::SemanticsError),
}

impl FfiError {
    fn status(&self) -> MbqStatus {
        match self {
            FfiError::Null(_) => MbqStatus::NullPointer,
            FfiError::Utf8(_) => MbqStatus::InvalidUtf8,
            FfiError::Parse(_) => MbqStatus::Parse,
            FfiError::Library(_) => MbqStatus::UnknownProtocol,
            FfiError::Inputs(_) => MbqStatus::Inputs,
            FfiError::Semantics(_) => MbqStatus::Semantics,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let text = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = text);
}

fn guard(f: impl FnOnce() -> Result<(), FfiError>) -> MbqStatus {
    set_error("");
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => MbqStatus::Ok,
        Ok(Err(e)) => {
            set_error(&e.to_string());
            e.status()
        }
        Err(_) => {
            set_error("internal panic");
            MbqStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, FfiError> {
    if p.is_null() {
        return Err(FfiError::Null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| FfiError::Utf8(what))
}

unsafe fn optional_text<'a>(p: *const c_char, what: &'static str) -> Result<Option<&'a str>, FfiError> {
    if p.is_null() {
        Ok(None)
    } else {
        text(p, what).map(Some)
    }
}

unsafe fn network<'a>(p: *const MbqNetwork, what: &'static str) -> Result<&'a Network, FfiError> {
    p.as_ref().map(|n| &n.0).ok_or(FfiError::Null(what))
}

unsafe fn write_out<T>(out: *mut T, value: T, what: &'static str) -> Result<(), FfiError> {
    if out.is_null() {
        return Err(FfiError::Null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn write_string(out: *mut *mut c_char, s: String) -> Result<(), FfiError> {
    if out.is_null() {
        return Err(FfiError::Null("out"));
    }
    let c = CString::new(s).map_err(|_| FfiError::Utf8("output"))?;
    out.write(c.into_raw());
    Ok(())
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn mbq_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mbq_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parse DSL source; the last network in the source is returned.
///
/// # Safety
/// `source` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn mbq_network_parse(source: *const c_char, out: *mut *mut MbqNetwork) -> MbqStatus {
    guard(|| {
        let src = text(source, "source")?;
        let parsed = parse_network(src).map_err(|diags| {
            FfiError::Parse(diags.iter().map(|d| d.render(Some(src))).collect::<Vec<_>>().join("\n"))
        })?;
        write_out(out, Box::into_raw(Box::new(MbqNetwork(parsed.network))), "out")
    })
}

/// A library protocol such as `teleport` or `bitflip(pi/4)`.
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn mbq_network_library(name: *const c_char, out: *mut *mut MbqNetwork) -> MbqStatus {
    guard(|| {
        let n = mbqnet::library::by_name(text(name, "name")?)?;
        write_out(out, Box::into_raw(Box::new(MbqNetwork(n))), "out")
    })
}

/// # Safety
/// `net` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mbq_network_free(net: *mut MbqNetwork) {
    if !net.is_null() {
        drop(Box::from_raw(net));
    }
}

/// Canonical DSL text of the network.
///
/// # Safety
/// `net` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn mbq_network_render(net: *const MbqNetwork, out: *mut *mut c_char) -> MbqStatus {
    guard(|| write_string(out, render_network(network(net, "net")?)))
}

/// Run under the round-robin schedule. `inputs` is an optional TOML inputs
/// document; with `merge` false every path is reported.
///
/// # Safety
/// `net` must be a live handle, `inputs` null or NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mbq_run(
    net: *const MbqNetwork,
    inputs: *const c_char,
    merge: bool,
    out: *mut *mut c_char,
) -> MbqStatus {
    guard(|| {
        let n = network(net, "net")?;
        let i = load_inputs(n, optional_text(inputs, "inputs")?)?;
        let pts = operational(n, &i.classical, &i.quantum)?;
        write_string(out, render_report(&report::pts_report(n, &pts, !merge)))
    })
}

/// Kraus table report for every classical input.
///
/// # Safety
/// `net` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mbq_denote(net: *const MbqNetwork, out: *mut *mut c_char) -> MbqStatus {
    guard(|| {
        let n = network(net, "net")?;
        let d = denotational(n)?;
        write_string(out, render_report(&report::denotation_report(n, &d)))
    })
}

/// Equivalence verdict; `equivalent_out` receives the answer and `out` the report.
///
/// # Safety
/// `first` and `second` must be live handles; `equivalent_out` and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mbq_equiv(
    first: *const MbqNetwork,
    second: *const MbqNetwork,
    tol: f64,
    equivalent_out: *mut bool,
    out: *mut *mut c_char,
) -> MbqStatus {
    guard(|| {
        let (a, b) = (network(first, "first")?, network(second, "second")?);
        let v = equivalent(a, b, tol)?;
        write_out(equivalent_out, v.equivalent, "equivalent_out")?;
        write_string(out, render_report(&report::verdict_report(a, b, &v, tol)))
    })
}

/// Compare every interleaving; `passed` receives the verdict.
///
/// # Safety
/// `net` must be a live handle, `inputs` null or NUL-terminated, `passed` and
/// `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mbq_check_schedules(
    net: *const MbqNetwork,
    inputs: *const c_char,
    passed: *mut bool,
    out: *mut *mut c_char,
) -> MbqStatus {
    guard(|| {
        let n = network(net, "net")?;
        let i = load_inputs(n, optional_text(inputs, "inputs")?)?;
        let c = check_schedules(n, &i.classical, &i.quantum)?;
        write_out(passed, c.passed, "passed")?;
        write_string(out, render_report(&report::schedules_report(n, &i.classical, &c)))
    })
}
