// SPDX-License-Identifier: Apache-2.0

//! C ABI for `plsqpt`.
//!
//! Objects cross the boundary as opaque handles owned by the caller and released with the
//! matching `*_free` function. Every fallible call returns a [`QptStatus`]; on failure the
//! message is available from [`qpt_last_error_message`] on the same thread.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use plsqpt::channel::{choi_of, distance, ChannelKind, ChannelSpec, Metric, UnitarySpec};
use plsqpt::designs::Scenario;
use plsqpt::estimators::ls_estimate;
use plsqpt::linalg::{c, CMatrix};
use plsqpt::projections::{choi_dim, pls_pipeline, project_to_cptp, Method, PipelineConfig, ProjectionConfig};
use plsqpt::simulator::{sample, FrequencyTable, SamplingPlan, Scheme};
use plsqpt::QptError;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QptStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidDimension = 2,
    DimensionMismatch = 3,
    ConstraintViolation = 4,
    InvalidRank = 5,
    NotImplemented = 6,
    InvalidPlan = 7,
    ScenarioMismatch = 8,
    InvalidInput = 9,
    Domain = 10,
    NotConverged = 11,
    Config = 12,
    Parse = 13,
    Io = 14,
    Panic = 15,
}

impl From<&QptError> for QptStatus {
    fn from(e: &QptError) -> Self {
        match e {
            QptError::InvalidDimension(_) => QptStatus::InvalidDimension,
            QptError::DimensionMismatch { .. } => QptStatus::DimensionMismatch,
            QptError::ConstraintViolation(_) => QptStatus::ConstraintViolation,
            QptError::InvalidRank { .. } => QptStatus::InvalidRank,
            QptError::NotImplemented(_) => QptStatus::NotImplemented,
            QptError::InvalidPlan(_) => QptStatus::InvalidPlan,
            QptError::ScenarioMismatch { .. } => QptStatus::ScenarioMismatch,
            QptError::InvalidInput(_) => QptStatus::InvalidInput,
            QptError::Domain(_) => QptStatus::Domain,
            QptError::NotConverged(_) => QptStatus::NotConverged,
            QptError::Config(_) => QptStatus::Config,
            QptError::Parse(_) => QptStatus::Parse,
            QptError::Io(_) => QptStatus::Io,
        }
    }
}

/// Ground-truth unitary for [`qpt_channel_unitary`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QptUnitary {
    Identity = 0,
    Qft = 1,
    /// Haar-random, drawn from the seed argument.
    Haar = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QptMethod {
    Ap = 0,
    Dykstra = 1,
    OneHip = 2,
    PureHip = 3,
    HipSwitch = 4,
    Dual = 5,
}

impl From<QptMethod> for Method {
    fn from(m: QptMethod) -> Self {
        match m {
            QptMethod::Ap => Method::Ap,
            QptMethod::Dykstra => Method::Dykstra,
            QptMethod::OneHip => Method::OneHip,
            QptMethod::PureHip => Method::PureHip,
            QptMethod::HipSwitch => Method::HipSwitch,
            QptMethod::Dual => Method::Dual,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QptMetric {
    Trace = 0,
    Frobenius = 1,
    Operator = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QptScheme {
    Fixed = 0,
    Random = 1,
}

/// A Hermitian `d² × d²` matrix in the Choi representation; not necessarily physical.
pub struct QptChoi {
    dim: usize,
    matrix: CMatrix,
}

/// Observed frequencies of one measurement scenario.
pub struct QptTable {
    table: FrequencyTable,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let clean = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = clean);
}

/// Run `f`, translating errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), QptStatusError>) -> QptStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            QptStatus::Ok
        }
        Ok(Err(e)) => {
            set_error(&e.message);
            e.status
        }
        Err(_) => {
            set_error("internal panic");
            QptStatus::Panic
        }
    }
}

struct QptStatusError {
    status: QptStatus,
    message: String,
}

impl From<QptError> for QptStatusError {
    fn from(e: QptError) -> Self {
        Self { status: (&e).into(), message: e.to_string() }
    }
}

fn null(what: &str) -> QptStatusError {
    QptStatusError { status: QptStatus::NullPointer, message: format!("{what} is null") }
}

fn invalid(message: String) -> QptStatusError {
    QptStatusError { status: QptStatus::InvalidInput, message }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, QptStatusError> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn emit<T>(out: *mut *mut T, value: T) -> Result<(), QptStatusError> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

fn scenario(n: u8) -> Result<Scenario, QptStatusError> {
    Scenario::try_from(n).map_err(Into::into)
}

fn emit_spec(spec: ChannelSpec, out: *mut *mut QptChoi) -> QptStatus {
    guard(|| {
        let phi = choi_of(&spec)?;
        unsafe { emit(out, QptChoi { dim: phi.dim(), matrix: phi.into_matrix() }) }
    })
}

/// Library version, a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn qpt_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread; empty after a success. Valid until the
/// next call on the same thread.
#[no_mangle]
pub extern "C" fn qpt_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Choi matrix of a unitary channel on dimension `dim`.
#[no_mangle]
pub unsafe extern "C" fn qpt_channel_unitary(
    unitary: QptUnitary,
    dim: usize,
    seed: u64,
    out: *mut *mut QptChoi,
) -> QptStatus {
    let u = match unitary {
        QptUnitary::Identity => UnitarySpec::Identity,
        QptUnitary::Qft => UnitarySpec::Qft,
        QptUnitary::Haar => UnitarySpec::Haar { seed },
    };
    emit_spec(ChannelSpec::new(ChannelKind::Unitary { unitary: u }, dim), out)
}

/// Choi matrix of the depolarizing channel `ρ ↦ (1-p)ρ + p𝟙/d`.
#[no_mangle]
pub unsafe extern "C" fn qpt_channel_depolarizing(dim: usize, p: f64, out: *mut *mut QptChoi) -> QptStatus {
    emit_spec(ChannelSpec::new(ChannelKind::Depolarizing { p }, dim), out)
}

/// Choi matrix of a Kraus-rank-`rank` mixed-unitary channel with a Haar base unitary.
#[no_mangle]
pub unsafe extern "C" fn qpt_channel_mixed_unitary(
    dim: usize,
    rank: usize,
    seed: u64,
    out: *mut *mut QptChoi,
) -> QptStatus {
    let kind = ChannelKind::MixedUnitary { rank, base: UnitarySpec::Haar { seed } };
    emit_spec(ChannelSpec::new(kind, dim), out)
}

/// Copy a row-major `d² × d²` matrix given as separate real and imaginary arrays of
/// length `d⁴`. The matrix must be Hermitian.
#[no_mangle]
pub unsafe extern "C" fn qpt_choi_from_entries(
    dim: usize,
    re: *const f64,
    im: *const f64,
    len: usize,
    out: *mut *mut QptChoi,
) -> QptStatus {
    guard(|| {
        if re.is_null() || im.is_null() {
            return Err(null("entry array"));
        }
        let n = dim.checked_mul(dim).ok_or_else(|| invalid(format!("dimension {dim} overflows")))?;
        if dim < 2 || len != n * n {
            return Err(invalid(format!("expected {} entries for d = {dim}, got {len}", n * n)));
        }
        let (re, im) = (std::slice::from_raw_parts(re, len), std::slice::from_raw_parts(im, len));
        let matrix = CMatrix::from_fn(n, n, |i, j| c(re[i * n + j], im[i * n + j]));
        if !plsqpt::linalg::is_hermitian(&matrix, 1e-12) {
            return Err(invalid("matrix is not Hermitian".into()));
        }
        emit(out, QptChoi { dim, matrix })
    })
}

/// Sample a frequency table from a physical Choi matrix.
#[no_mangle]
pub unsafe extern "C" fn qpt_simulate(
    choi: *const QptChoi,
    scenario_number: u8,
    scheme: QptScheme,
    shots: u64,
    seed: u64,
    out: *mut *mut QptTable,
) -> QptStatus {
    guard(|| {
        let m = deref(choi, "choi")?;
        let phi = plsqpt::channel::ChoiMatrix::new(m.dim, m.matrix.clone())?;
        let scheme = match scheme {
            QptScheme::Fixed => Scheme::Fixed,
            QptScheme::Random => Scheme::Random,
        };
        let table = sample(&phi, scenario(scenario_number)?, &SamplingPlan::new(scheme, shots, seed))?;
        emit(out, QptTable { table })
    })
}

/// Least-squares estimate from a frequency table.
#[no_mangle]
pub unsafe extern "C" fn qpt_estimate_ls(table: *const QptTable, out: *mut *mut QptChoi) -> QptStatus {
    guard(|| {
        let t = deref(table, "table")?;
        let ls = ls_estimate(&t.table)?;
        emit(out, QptChoi { dim: ls.dim, matrix: ls.matrix })
    })
}

/// Projected least-squares estimate: least squares, thresholded trace-one projection, then
/// projection onto physical channels with `method`.
#[no_mangle]
pub unsafe extern "C" fn qpt_estimate_pls(
    table: *const QptTable,
    method: QptMethod,
    out: *mut *mut QptChoi,
) -> QptStatus {
    guard(|| {
        let t = deref(table, "table")?;
        let ls = ls_estimate(&t.table)?;
        let pls = pls_pipeline(&ls, &PipelineConfig { method: method.into(), ..Default::default() })?;
        let dim = pls.estimate.dim();
        emit(out, QptChoi { dim, matrix: pls.estimate.into_matrix() })
    })
}

/// Project a trace-one Hermitian matrix onto physical channels.
#[no_mangle]
pub unsafe extern "C" fn qpt_project(choi: *const QptChoi, method: QptMethod, out: *mut *mut QptChoi) -> QptStatus {
    guard(|| {
        let m = deref(choi, "choi")?;
        let (est, _) = project_to_cptp(&m.matrix, method.into(), &ProjectionConfig::default())?;
        emit(out, QptChoi { dim: est.dim(), matrix: est.into_matrix() })
    })
}

/// Channel dimension `d` of a handle.
#[no_mangle]
pub unsafe extern "C" fn qpt_choi_dim(choi: *const QptChoi, dim: *mut usize) -> QptStatus {
    guard(|| {
        let m = deref(choi, "choi")?;
        if dim.is_null() {
            return Err(null("dim"));
        }
        *dim = choi_dim(&m.matrix)?;
        Ok(())
    })
}

/// Copy the entries row-major into `re` and `im`, each of length `len = d⁴`.
#[no_mangle]
pub unsafe extern "C" fn qpt_choi_entries(choi: *const QptChoi, re: *mut f64, im: *mut f64, len: usize) -> QptStatus {
    guard(|| {
        let m = deref(choi, "choi")?;
        if re.is_null() || im.is_null() {
            return Err(null("entry array"));
        }
        let n = m.matrix.nrows();
        if len != n * n {
            return Err(invalid(format!("buffer holds {len} entries, matrix has {}", n * n)));
        }
        let (re, im) = (std::slice::from_raw_parts_mut(re, len), std::slice::from_raw_parts_mut(im, len));
        for i in 0..n {
            for j in 0..n {
                let z = m.matrix[(i, j)];
                re[i * n + j] = z.re;
                im[i * n + j] = z.im;
            }
        }
        Ok(())
    })
}

/// Distance between two matrices of equal size.
#[no_mangle]
pub unsafe extern "C" fn qpt_distance(
    a: *const QptChoi,
    b: *const QptChoi,
    metric: QptMetric,
    value: *mut f64,
) -> QptStatus {
    guard(|| {
        let (a, b) = (deref(a, "a")?, deref(b, "b")?);
        if value.is_null() {
            return Err(null("value"));
        }
        let metric = match metric {
            QptMetric::Trace => Metric::Trace,
            QptMetric::Frobenius => Metric::Frobenius,
            QptMetric::Operator => Metric::Operator,
        };
        *value = distance(&a.matrix, &b.matrix, metric)?;
        Ok(())
    })
}

/// Total number of shots recorded in a table.
#[no_mangle]
pub unsafe extern "C" fn qpt_table_shots(table: *const QptTable, shots: *mut u64) -> QptStatus {
    guard(|| {
        let t = deref(table, "table")?;
        if shots.is_null() {
            return Err(null("shots"));
        }
        *shots = t.table.total_shots();
        Ok(())
    })
}

/// Release a matrix handle; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn qpt_choi_free(choi: *mut QptChoi) {
    if !choi.is_null() {
        drop(Box::from_raw(choi));
    }
}

/// Release a table handle; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn qpt_table_free(table: *mut QptTable) {
    if !table.is_null() {
        drop(Box::from_raw(table));
    }
}

/// Last error message as an owned Rust string; for Rust callers and tests.
pub fn last_error() -> String {
    unsafe { CStr::from_ptr(qpt_last_error_message()) }.to_string_lossy().into_owned()
}

