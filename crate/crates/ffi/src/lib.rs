//! C ABI for `mlex`.
//!
//! Objects cross the boundary as opaque handles released with the matching
//! `_free` function. Every entry point returns an [`MlexStatus`]; on failure
//! the message is available from [`mlex_last_error`] until the next call on
//! the same thread. Strings returned through out-parameters are owned by the
//! caller and released with [`mlex_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use mlex::cli::format::{self, Workspace};
use mlex::cocycle::is_compatible;
use mlex::cohomology::{enumerate_h2, ActionScope};
use mlex::Error;

/// Result codes shared by every function.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MlexStatus {
    Ok = 0,
    /// A checked property failed; the report carries the witness.
    Violation = 1,
    /// Bad input: unknown names, parse or validation errors, exceeded budgets.
    Usage = 2,
    NullPointer = 3,
    InvalidUtf8 = 4,
    /// A Rust panic was caught at the boundary.
    Panic = 5,
}

/// A loaded, validated workspace.
pub struct MlexWorkspace {
    inner: Workspace,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let c = CString::new(msg.into().replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

struct Fail(MlexStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Fail {
        Fail(MlexStatus::Usage, e.to_string())
    }
}

impl From<format::LoadError> for Fail {
    fn from(e: format::LoadError) -> Fail {
        Fail(MlexStatus::Usage, e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<MlexStatus, Fail>) -> MlexStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(s)) => s,
        Ok(Err(Fail(s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("panic inside mlex");
            MlexStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail(MlexStatus::NullPointer, "null string argument".into()));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail(MlexStatus::InvalidUtf8, "argument is not valid UTF-8".into()))
}

unsafe fn workspace<'a>(p: *const MlexWorkspace) -> Result<&'a Workspace, Fail> {
    p.as_ref().map(|w| &w.inner).ok_or_else(|| Fail(MlexStatus::NullPointer, "null workspace handle".into()))
}

unsafe fn write_out<T>(out: *mut T, v: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail(MlexStatus::NullPointer, "null output pointer".into()));
    }
    out.write(v);
    Ok(())
}

fn to_c(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).expect("nul bytes removed").into_raw()
}

/// The message of the last failed call on this thread, or null. Valid until
/// the next call into the library.
#[no_mangle]
pub extern "C" fn mlex_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// The library version as a static string.
#[no_mangle]
pub extern "C" fn mlex_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn mlex_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Loads and validates a workspace file.
///
/// # Safety
/// `path` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mlex_workspace_load(path: *const c_char, out: *mut *mut MlexWorkspace) -> MlexStatus {
    guard(|| {
        let ws = format::load(text(path)?)?;
        write_out(out, Box::into_raw(Box::new(MlexWorkspace { inner: ws })))?;
        Ok(MlexStatus::Ok)
    })
}

/// Parses and validates workspace text.
///
/// # Safety
/// `source` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mlex_workspace_parse(source: *const c_char, out: *mut *mut MlexWorkspace) -> MlexStatus {
    guard(|| {
        let ws = format::load_str("<memory>", text(source)?)?;
        write_out(out, Box::into_raw(Box::new(MlexWorkspace { inner: ws })))?;
        Ok(MlexStatus::Ok)
    })
}

/// Releases a workspace. Null is ignored.
///
/// # Safety
/// `ws` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn mlex_workspace_free(ws: *mut MlexWorkspace) {
    if !ws.is_null() {
        drop(Box::from_raw(ws));
    }
}

/// Canonical text of a workspace; free with [`mlex_string_free`].
///
/// # Safety
/// `ws` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mlex_workspace_save(ws: *const MlexWorkspace, out: *mut *mut c_char) -> MlexStatus {
    guard(|| {
        let text = workspace(ws)?.save();
        write_out(out, to_c(text))?;
        Ok(MlexStatus::Ok)
    })
}

/// Number of objects of a kind (`module`, `algebra`, `ideal`, `variety`,
/// `datum`, `action`, `cocycle`, `extension` or `hs`).
///
/// # Safety
/// `ws` must be a live handle, `kind` a nul-terminated string, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mlex_workspace_count(ws: *const MlexWorkspace, kind: *const c_char, out: *mut usize) -> MlexStatus {
    guard(|| {
        let w = workspace(ws)?;
        let n = match text(kind)? {
            "module" => w.modules.len(),
            "algebra" => w.algebras.len(),
            "ideal" => w.ideals.len(),
            "variety" => w.varieties.len(),
            "datum" => w.data.len(),
            "action" => w.actions.len(),
            "cocycle" => w.cocycles.len(),
            "extension" => w.extensions.len(),
            "hs" => w.hs.len(),
            k => return Err(Fail(MlexStatus::Usage, format!("unknown kind `{k}`"))),
        };
        write_out(out, n)?;
        Ok(MlexStatus::Ok)
    })
}

/// Whether a cocycle of the workspace is compatible with a variety (`mlf`
/// names the bare multilinear theory). Writes 1 or 0 to `out`.
///
/// # Safety
/// `ws` must be a live handle, the names nul-terminated strings, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mlex_cocycle_is_compatible(
    ws: *const MlexWorkspace,
    cocycle: *const c_char,
    variety: *const c_char,
    out: *mut i32,
) -> MlexStatus {
    guard(|| {
        let w = workspace(ws)?;
        let (d, t) = w.cocycle_datum(text(cocycle)?)?;
        let v = w.variety(text(variety)?, d.sig())?;
        write_out(out, i32::from(is_compatible(&d, &t, &v)?))?;
        Ok(MlexStatus::Ok)
    })
}

/// Number of cohomology classes of the cocycle's datum and action.
///
/// # Safety
/// `ws` must be a live handle, the names nul-terminated strings, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mlex_h2_count(
    ws: *const MlexWorkspace,
    cocycle: *const c_char,
    variety: *const c_char,
    budget: u64,
    out: *mut usize,
) -> MlexStatus {
    guard(|| {
        let w = workspace(ws)?;
        let (d, t) = w.cocycle_datum(text(cocycle)?)?;
        let v = w.variety(text(variety)?, d.sig())?;
        let classes = enumerate_h2(&d, &v, &ActionScope::Fixed(t.action), budget as u128)?;
        write_out(out, classes.len())?;
        Ok(MlexStatus::Ok)
    })
}

/// Runs a command line as the `mlex` binary would (`argv[0]` is the program
/// name). The report text goes to `out`, or the error text when the status
/// is [`MlexStatus::Usage`]; free it with [`mlex_string_free`].
///
/// # Safety
/// `argv` must hold `argc` nul-terminated strings; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mlex_run(argc: usize, argv: *const *const c_char, out: *mut *mut c_char) -> MlexStatus {
    guard(|| {
        if argv.is_null() && argc > 0 {
            return Err(Fail(MlexStatus::NullPointer, "null argv".into()));
        }
        let args: Vec<String> = (0..argc).map(|k| text(*argv.add(k)).map(str::to_string)).collect::<Result<_, _>>()?;
        let (stdout, stderr, code) = mlex::cli::main_with(args);
        let status = match code {
            0 => MlexStatus::Ok,
            1 => MlexStatus::Violation,
            _ => MlexStatus::Usage,
        };
        if status == MlexStatus::Usage {
            set_error(stderr.trim_end().to_string());
        }
        write_out(out, to_c(if stdout.is_empty() { stderr } else { stdout }))?;
        Ok(status)
    })
}
