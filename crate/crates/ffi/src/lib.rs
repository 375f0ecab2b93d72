//! C ABI for the stochastic Navier-Stokes lab.
//!
//! Every object crosses the boundary as an opaque pointer created by a
//! `*_new`/`*_load` function and released by the matching `*_free`. Every
//! fallible call returns an [`SnsStatus`]; the message of the most recent
//! failure on the calling thread is available from
//! [`sns_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use sns_core::cli::{load_config, parse_config, simulate};
use sns_core::solver::{Solver, SolverConfig};
use sns_core::spectral::snapshot::{read_snapshot, write_snapshot};
use sns_core::spectral::{l2_norm, leray_project, FourierGrid, SpectralVectorField};
use sns_core::SnsError;

/// Result codes of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SnsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    GridMismatch = 3,
    NotDivergenceFree = 4,
    Format = 5,
    Config = 6,
    Explosion = 7,
    NumericNan = 8,
    NonConvergence = 9,
    Manifest = 10,
    Io = 11,
    BufferTooSmall = 12,
    Panic = 13,
}

/// Fourier grid handle.
pub struct SnsGrid(FourierGrid);

/// Divergence-free vector field handle.
pub struct SnsField(SpectralVectorField);

/// Running solver handle.
pub struct SnsSimulation(Solver);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &SnsError) -> SnsStatus {
    match e {
        SnsError::InvalidArgument(_) => SnsStatus::InvalidArgument,
        SnsError::GridMismatch(..) => SnsStatus::GridMismatch,
        SnsError::NotDivergenceFree(_) => SnsStatus::NotDivergenceFree,
        SnsError::Format(_) => SnsStatus::Format,
        SnsError::Config { .. } => SnsStatus::Config,
        SnsError::Explosion { .. } => SnsStatus::Explosion,
        SnsError::NumericNan { .. } => SnsStatus::NumericNan,
        SnsError::NonConvergence { .. } => SnsStatus::NonConvergence,
        SnsError::Manifest(_) => SnsStatus::Manifest,
        SnsError::Io(_) => SnsStatus::Io,
    }
}

fn fail(status: SnsStatus, msg: impl Into<String>) -> SnsStatus {
    set_error(msg.into());
    status
}

/// Runs `f`, recording errors and turning panics into [`SnsStatus::Panic`].
fn guard(f: impl FnOnce() -> Result<(), SnsStatus>) -> SnsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            SnsStatus::Ok
        }
        Ok(Err(s)) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(SnsStatus::Panic, msg)
        }
    }
}

trait OrStatus<T> {
    fn or_status(self) -> Result<T, SnsStatus>;
}

impl<T> OrStatus<T> for sns_core::Result<T> {
    fn or_status(self) -> Result<T, SnsStatus> {
        self.map_err(|e| fail(status_of(&e), e.to_string()))
    }
}

unsafe fn deref<'a, T>(p: *const T, name: &str) -> Result<&'a T, SnsStatus> {
    p.as_ref().ok_or_else(|| fail(SnsStatus::NullPointer, format!("{name} is null")))
}

unsafe fn deref_mut<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, SnsStatus> {
    p.as_mut().ok_or_else(|| fail(SnsStatus::NullPointer, format!("{name} is null")))
}

unsafe fn out_ptr<T>(p: *mut *mut T) -> Result<&'static mut *mut T, SnsStatus> {
    let slot = p.as_mut().ok_or_else(|| fail(SnsStatus::NullPointer, "output pointer is null"))?;
    *slot = ptr::null_mut();
    Ok(slot)
}

unsafe fn c_str<'a>(p: *const c_char, name: &str) -> Result<&'a str, SnsStatus> {
    if p.is_null() {
        return Err(fail(SnsStatus::NullPointer, format!("{name} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(SnsStatus::InvalidArgument, format!("{name} is not valid UTF-8")))
}

unsafe fn slice<'a>(p: *const f64, len: usize, name: &str) -> Result<&'a [f64], SnsStatus> {
    if p.is_null() {
        return Err(fail(SnsStatus::NullPointer, format!("{name} is null")));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut<'a>(p: *mut f64, len: usize, name: &str) -> Result<&'a mut [f64], SnsStatus> {
    if p.is_null() {
        return Err(fail(SnsStatus::NullPointer, format!("{name} is null")));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

fn check_len(len: usize, want: usize) -> Result<(), SnsStatus> {
    if len < want {
        return Err(fail(
            SnsStatus::BufferTooSmall,
            format!("buffer holds {len} values, {want} needed"),
        ));
    }
    Ok(())
}

/// Copies the last error message of this thread into `buf` as a
/// NUL-terminated string and returns its length without the terminator.
/// A message longer than `len - 1` bytes is truncated. Passing a null `buf`
/// only queries the length.
///
/// # Safety
/// `buf` must be null or valid for writes of `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn sns_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr(), buf as *mut u8, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Creates an `n × n` grid; `dealiased != 0` applies the two-thirds truncation.
///
/// # Safety
/// `out` must be valid for one pointer write.
#[no_mangle]
pub unsafe extern "C" fn sns_grid_new(n: usize, dealiased: i32, out: *mut *mut SnsGrid) -> SnsStatus {
    guard(|| {
        let slot = out_ptr(out)?;
        let g = FourierGrid::with_dealiasing(n, dealiased != 0).or_status()?;
        *slot = Box::into_raw(Box::new(SnsGrid(g)));
        Ok(())
    })
}

/// Releases a grid; null is ignored.
///
/// # Safety
/// `grid` must be null or a pointer returned by [`sns_grid_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sns_grid_free(grid: *mut SnsGrid) {
    if !grid.is_null() {
        drop(Box::from_raw(grid));
    }
}

/// Points per side, or 0 for a null grid.
///
/// # Safety
/// `grid` must be null or a live grid handle.
#[no_mangle]
pub unsafe extern "C" fn sns_grid_n(grid: *const SnsGrid) -> usize {
    grid.as_ref().map_or(0, |g| g.0.n())
}

/// Largest retained frequency per axis, or -1 for a null grid.
///
/// # Safety
/// `grid` must be null or a live grid handle.
#[no_mangle]
pub unsafe extern "C" fn sns_grid_kmax(grid: *const SnsGrid) -> i32 {
    grid.as_ref().map_or(-1, |g| g.0.kmax())
}

/// Builds a field from physical samples (row-major, `n*n` values per
/// component), removing the mean and projecting onto divergence-free fields.
///
/// # Safety
/// `grid` must be a live grid handle, `u1` and `u2` valid for `len` reads and
/// `out` valid for one pointer write.
#[no_mangle]
pub unsafe extern "C" fn sns_field_from_physical(
    grid: *const SnsGrid,
    u1: *const f64,
    u2: *const f64,
    len: usize,
    out: *mut *mut SnsField,
) -> SnsStatus {
    guard(|| {
        let slot = out_ptr(out)?;
        let g = &deref(grid, "grid")?.0;
        let want = g.len();
        if len != want {
            return Err(fail(
                SnsStatus::InvalidArgument,
                format!("expected {want} values per component, got {len}"),
            ));
        }
        let values = [slice(u1, len, "u1")?.to_vec(), slice(u2, len, "u2")?.to_vec()];
        if values.iter().flatten().any(|v| !v.is_finite()) {
            return Err(fail(SnsStatus::InvalidArgument, "non-finite sample"));
        }
        let f = leray_project(&SpectralVectorField::from_physical(g, &values));
        *slot = Box::into_raw(Box::new(SnsField(f)));
        Ok(())
    })
}

/// Writes the physical samples of `field` into `u1` and `u2`, each of
/// capacity `len >= n*n`.
///
/// # Safety
/// `field` must be a live field handle and `u1`, `u2` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn sns_field_to_physical(
    field: *const SnsField,
    u1: *mut f64,
    u2: *mut f64,
    len: usize,
) -> SnsStatus {
    guard(|| {
        let f = &deref(field, "field")?.0;
        check_len(len, f.grid().len())?;
        let [a, b] = f.to_physical();
        slice_mut(u1, len, "u1")?[..a.len()].copy_from_slice(&a);
        slice_mut(u2, len, "u2")?[..b.len()].copy_from_slice(&b);
        Ok(())
    })
}

/// Grid size of a field, or 0 for null.
///
/// # Safety
/// `field` must be null or a live field handle.
#[no_mangle]
pub unsafe extern "C" fn sns_field_n(field: *const SnsField) -> usize {
    field.as_ref().map_or(0, |f| f.0.grid().n())
}

/// L² norm of a field on the unit-area torus.
///
/// # Safety
/// `field` must be a live field handle and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn sns_field_l2_norm(field: *const SnsField, out: *mut f64) -> SnsStatus {
    guard(|| {
        let f = &deref(field, "field")?.0;
        *deref_mut(out, "out")? = l2_norm(f);
        Ok(())
    })
}

/// Reads an SNSF snapshot file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` valid for one pointer write.
#[no_mangle]
pub unsafe extern "C" fn sns_field_load(path: *const c_char, out: *mut *mut SnsField) -> SnsStatus {
    guard(|| {
        let slot = out_ptr(out)?;
        let path = c_str(path, "path")?;
        let file = std::fs::File::open(path).map_err(|e| fail(SnsStatus::Io, format!("{path}: {e}")))?;
        let f = read_snapshot(std::io::BufReader::new(file)).or_status()?;
        *slot = Box::into_raw(Box::new(SnsField(f)));
        Ok(())
    })
}

/// Writes a field as an SNSF snapshot file.
///
/// # Safety
/// `field` must be a live field handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn sns_field_save(field: *const SnsField, path: *const c_char) -> SnsStatus {
    guard(|| {
        let f = &deref(field, "field")?.0;
        let path = c_str(path, "path")?;
        let file = std::fs::File::create(path).map_err(|e| fail(SnsStatus::Io, format!("{path}: {e}")))?;
        write_snapshot(std::io::BufWriter::new(file), f).or_status()
    })
}

/// Releases a field; null is ignored.
///
/// # Safety
/// `field` must be null or a pointer returned by this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sns_field_free(field: *mut SnsField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}

fn parse_text(text: &str, base: &str) -> Result<SolverConfig, SnsStatus> {
    parse_config(text, Path::new(base)).or_status()
}

/// Creates a solver from config text in the `key = value` format of the CLI;
/// relative paths resolve against `base_dir`.
///
/// # Safety
/// `config_text` and `base_dir` must be NUL-terminated strings and `out`
/// valid for one pointer write.
#[no_mangle]
pub unsafe extern "C" fn sns_simulation_new(
    config_text: *const c_char,
    base_dir: *const c_char,
    out: *mut *mut SnsSimulation,
) -> SnsStatus {
    guard(|| {
        let slot = out_ptr(out)?;
        let cfg = parse_text(c_str(config_text, "config_text")?, c_str(base_dir, "base_dir")?)?;
        let s = Solver::new(cfg).or_status()?;
        *slot = Box::into_raw(Box::new(SnsSimulation(s)));
        Ok(())
    })
}

/// Advances the solver by `steps` time steps. Stops at the first step that
/// reports an explosion or a non-finite value.
///
/// # Safety
/// `sim` must be a live simulation handle.
#[no_mangle]
pub unsafe extern "C" fn sns_simulation_step(sim: *mut SnsSimulation, steps: usize) -> SnsStatus {
    guard(|| {
        let s = &mut deref_mut(sim, "sim")?.0;
        for _ in 0..steps {
            s.step().or_status()?;
        }
        Ok(())
    })
}

/// Current time, or NaN for null.
///
/// # Safety
/// `sim` must be null or a live simulation handle.
#[no_mangle]
pub unsafe extern "C" fn sns_simulation_time(sim: *const SnsSimulation) -> f64 {
    sim.as_ref().map_or(f64::NAN, |s| s.0.time())
}

/// Current frequency level, or NaN for null.
///
/// # Safety
/// `sim` must be null or a live simulation handle.
#[no_mangle]
pub unsafe extern "C" fn sns_simulation_lambda(sim: *const SnsSimulation) -> f64 {
    sim.as_ref().map_or(f64::NAN, |s| s.0.lambda())
}

/// Copies the remainder `w` into a new field handle.
///
/// # Safety
/// `sim` must be a live simulation handle and `out` valid for one pointer write.
#[no_mangle]
pub unsafe extern "C" fn sns_simulation_w(sim: *const SnsSimulation, out: *mut *mut SnsField) -> SnsStatus {
    guard(|| {
        let slot = out_ptr(out)?;
        let w = deref(sim, "sim")?.0.w().clone();
        *slot = Box::into_raw(Box::new(SnsField(w)));
        Ok(())
    })
}

/// Copies the full velocity `u = X + Y + w` into a new field handle.
///
/// # Safety
/// `sim` must be a live simulation handle and `out` valid for one pointer write.
#[no_mangle]
pub unsafe extern "C" fn sns_simulation_velocity(sim: *const SnsSimulation, out: *mut *mut SnsField) -> SnsStatus {
    guard(|| {
        let slot = out_ptr(out)?;
        let s = &deref(sim, "sim")?.0;
        let u = &(&s.x() + s.y()) + s.w();
        *slot = Box::into_raw(Box::new(SnsField(u)));
        Ok(())
    })
}

/// Releases a simulation; null is ignored.
///
/// # Safety
/// `sim` must be null or a pointer returned by [`sns_simulation_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sns_simulation_free(sim: *mut SnsSimulation) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

/// Runs `sns simulate` on a config file, writing every artifact to its
/// `out_dir`. Returns [`SnsStatus::Explosion`] or [`SnsStatus::NumericNan`]
/// when the run stopped early; the artifacts are written in either case.
///
/// # Safety
/// `config_path` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn sns_run_config(config_path: *const c_char) -> SnsStatus {
    guard(|| {
        let path = c_str(config_path, "config_path")?;
        let cfg = load_config(Path::new(path)).or_status()?;
        let outcome = simulate(&cfg).or_status()?;
        match outcome.output.status {
            sns_core::solver::RunStatus::Completed => Ok(()),
            sns_core::solver::RunStatus::Explosion { t, norm } => Err(fail(
                SnsStatus::Explosion,
                format!("EXPLOSION_SUSPECTED at t={t}: |w|={norm:e}"),
            )),
            sns_core::solver::RunStatus::NumericNan { t } => {
                Err(fail(SnsStatus::NumericNan, format!("NUMERIC_NAN at t={t}")))
            }
        }
    })
}
