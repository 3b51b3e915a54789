//! C ABI over `sandwich-core`.
//!
//! Objects cross the boundary as opaque handles created by `*_new`/`*_from_*`
//! functions and released by the matching `*_free`. Every fallible call
//! returns a [`SandwichStatus`]; on failure a description is kept per thread
//! and can be read with [`sandwich_last_error_message`]. Panics never unwind
//! into the caller.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use sandwich_core::config::{parse_config, RunConfig};
use sandwich_core::model::{max_mesh, validate_assumptions};
use sandwich_core::noise::{NoiseGenerator, NoisePath};
use sandwich_core::solver::{check_sandwich, simulate, SimulatedPath};
use sandwich_core::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SandwichStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Domain = 4,
    MeshCondition = 5,
    Numerical = 6,
    BufferTooSmall = 7,
    Io = 8,
    Panic = 9,
}

/// A parsed run configuration: model, driver and solver options.
pub struct SandwichModel {
    config: RunConfig,
    generator: Option<NoiseGenerator>,
}

/// One sampled driver path on the model grid.
pub struct SandwichNoise(NoisePath);

/// One simulated solution path.
pub struct SandwichPath(SimulatedPath);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> SandwichStatus {
    match err {
        Error::InvalidParameter(_) | Error::NotNested { .. } | Error::Refused(_) => {
            SandwichStatus::InvalidArgument
        }
        Error::Config(_) | Error::Json(_) => SandwichStatus::Config,
        Error::Domain { .. } => SandwichStatus::Domain,
        Error::MeshCondition { .. } => SandwichStatus::MeshCondition,
        Error::Step { source, .. } | Error::Path { source, .. } => status_of(source),
        Error::Io(_) => SandwichStatus::Io,
        _ => SandwichStatus::Numerical,
    }
}

fn fail(status: SandwichStatus, msg: impl Into<String>) -> SandwichStatus {
    set_error(msg.into());
    status
}

/// Runs `f`, recording errors and converting panics.
fn guard(f: impl FnOnce() -> Result<(), SandwichStatus>) -> SandwichStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SandwichStatus::Ok,
        Ok(Err(s)) => s,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            fail(SandwichStatus::Panic, format!("internal panic: {msg}"))
        }
    }
}

fn check(err: Error) -> SandwichStatus {
    fail(status_of(&err), err.to_string())
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, SandwichStatus> {
    p.as_ref()
        .ok_or_else(|| fail(SandwichStatus::NullPointer, format!("{what} is null")))
}

unsafe fn out_ptr<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, SandwichStatus> {
    p.as_mut()
        .ok_or_else(|| fail(SandwichStatus::NullPointer, format!("{what} is null")))
}

unsafe fn copy_out(values: &[f64], buf: *mut f64, len: usize) -> Result<(), SandwichStatus> {
    if len < values.len() {
        return Err(fail(
            SandwichStatus::BufferTooSmall,
            format!("buffer holds {len} values, {} needed", values.len()),
        ));
    }
    if buf.is_null() {
        return Err(fail(SandwichStatus::NullPointer, "buffer is null"));
    }
    ptr::copy_nonoverlapping(values.as_ptr(), buf, values.len());
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sandwich_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or NULL. The pointer stays
/// valid until the next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn sandwich_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parses a JSON configuration into a new model handle.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sandwich_model_from_json(
    json: *const c_char,
    out: *mut *mut SandwichModel,
) -> SandwichStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        if json.is_null() {
            return Err(fail(SandwichStatus::NullPointer, "json is null"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|e| fail(SandwichStatus::Config, format!("configuration is not UTF-8: {e}")))?;
        let config = parse_config(text).map_err(check)?;
        *out = Box::into_raw(Box::new(SandwichModel {
            config,
            generator: None,
        }));
        Ok(())
    })
}

/// Releases a model. NULL is ignored.
///
/// # Safety
/// `model` must come from [`sandwich_model_from_json`] and not be used again.
#[no_mangle]
pub unsafe extern "C" fn sandwich_model_free(model: *mut SandwichModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Number of grid steps `N` of the model.
///
/// # Safety
/// `model` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sandwich_model_steps(model: *const SandwichModel, out: *mut usize) -> SandwichStatus {
    guard(|| {
        let m = deref(model, "model")?;
        *out_ptr(out, "out")? = m.config.model.grid_points();
        Ok(())
    })
}

/// Largest admissible mesh of the model.
///
/// # Safety
/// `model` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sandwich_model_max_mesh(model: *const SandwichModel, out: *mut f64) -> SandwichStatus {
    guard(|| {
        let m = deref(model, "model")?;
        *out_ptr(out, "out")? = max_mesh(&m.config.model).delta_max;
        Ok(())
    })
}

/// Runs the assumption checks; `*all_pass` is 1 when every check passes.
/// Failing check descriptions are available from the last error message.
///
/// # Safety
/// `model` must be a live handle and `all_pass` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sandwich_model_validate(
    model: *const SandwichModel,
    all_pass: *mut i32,
) -> SandwichStatus {
    guard(|| {
        let m = deref(model, "model")?;
        let out = out_ptr(all_pass, "all_pass")?;
        let report = validate_assumptions(&m.config.model);
        *out = report.all_pass() as i32;
        if !report.all_pass() {
            let msg: Vec<String> = report
                .failures()
                .map(|e| format!("{} {}: {}", e.code, e.label, e.detail))
                .collect();
            set_error(msg.join("; "));
        }
        Ok(())
    })
}

/// Samples the model's driver with the given seed. The first call builds the
/// sampler (for example a Cholesky factor), and later calls reuse it.
///
/// # Safety
/// `model` must be a live handle not used concurrently, `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sandwich_noise_sample(
    model: *mut SandwichModel,
    seed: u64,
    out: *mut *mut SandwichNoise,
) -> SandwichStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let m = out_ptr(model, "model")?;
        if m.generator.is_none() {
            let grid = m.config.model.grid();
            let g = NoiseGenerator::new(&m.config.noise, &grid, m.config.noise_method).map_err(check)?;
            m.generator = Some(g);
        }
        let path = m.generator.as_ref().map(|g| g.sample(seed)).expect("generator was just built");
        *out = Box::into_raw(Box::new(SandwichNoise(path)));
        Ok(())
    })
}

/// Releases a noise path. NULL is ignored.
///
/// # Safety
/// `noise` must come from [`sandwich_noise_sample`] and not be used again.
#[no_mangle]
pub unsafe extern "C" fn sandwich_noise_free(noise: *mut SandwichNoise) {
    if !noise.is_null() {
        drop(Box::from_raw(noise));
    }
}

/// Number of values `N + 1` of a noise path.
///
/// # Safety
/// `noise` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn sandwich_noise_len(noise: *const SandwichNoise) -> usize {
    noise.as_ref().map_or(0, |n| n.0.values.len())
}

/// Copies the noise values `Z(t_0), …, Z(t_N)` into `buf`.
///
/// # Safety
/// `noise` must be a live handle and `buf` writable for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn sandwich_noise_values(
    noise: *const SandwichNoise,
    buf: *mut f64,
    len: usize,
) -> SandwichStatus {
    guard(|| copy_out(&deref(noise, "noise")?.0.values, buf, len))
}

/// Simulates the model driven by `noise`.
///
/// # Safety
/// `model` and `noise` must be live handles, `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sandwich_simulate(
    model: *const SandwichModel,
    noise: *const SandwichNoise,
    out: *mut *mut SandwichPath,
) -> SandwichStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let m = deref(model, "model")?;
        let z = deref(noise, "noise")?;
        let path = simulate(&m.config.model, &z.0, &m.config.simulate_options()).map_err(check)?;
        *out = Box::into_raw(Box::new(SandwichPath(path)));
        Ok(())
    })
}

/// Releases a solution path. NULL is ignored.
///
/// # Safety
/// `path` must come from [`sandwich_simulate`] and not be used again.
#[no_mangle]
pub unsafe extern "C" fn sandwich_path_free(path: *mut SandwichPath) {
    if !path.is_null() {
        drop(Box::from_raw(path));
    }
}

/// Number of values `N + 1` of a solution path.
///
/// # Safety
/// `path` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn sandwich_path_len(path: *const SandwichPath) -> usize {
    path.as_ref().map_or(0, |p| p.0.values.len())
}

/// Copies `Ŷ(t_0), …, Ŷ(t_N)` into `buf`.
///
/// # Safety
/// `path` must be a live handle and `buf` writable for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn sandwich_path_values(
    path: *const SandwichPath,
    buf: *mut f64,
    len: usize,
) -> SandwichStatus {
    guard(|| copy_out(&deref(path, "path")?.0.values, buf, len))
}

/// Smallest distances of the path to the lower and (two-sided) upper bound;
/// `*upper` is set to infinity for one-sided models.
///
/// # Safety
/// `model` and `path` must be live handles, `lower` and `upper` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn sandwich_path_bound_distance(
    model: *const SandwichModel,
    path: *const SandwichPath,
    lower: *mut f64,
    upper: *mut f64,
) -> SandwichStatus {
    guard(|| {
        let m = deref(model, "model")?;
        let p = deref(path, "path")?;
        let lo = out_ptr(lower, "lower")?;
        let hi = out_ptr(upper, "upper")?;
        let report = check_sandwich(&p.0, &m.config.model, None);
        *lo = report.min_distance_lower;
        *hi = report.min_distance_upper.unwrap_or(f64::INFINITY);
        Ok(())
    })
}
