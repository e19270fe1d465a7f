//! C interface to `fqbarrier`.
//!
//! Every function returns an [`FqbStatus`]; on failure a message is kept per
//! thread and can be read with [`fqb_last_error_message`]. Quantized chains
//! are opaque handles created by [`fqb_chain_new`] and released by
//! [`fqb_chain_free`].

use fqbarrier::brownian::BrownianProductQuantizer;
use fqbarrier::closed_form::bs_barrier_closed_form;
use fqbarrier::contract::{BarrierContract, BarrierType, PayoffType};
use fqbarrier::mc::{rbb_price, Estimator, McConfig};
use fqbarrier::model::Model;
use fqbarrier::quant_pricer::price_barrier;
use fqbarrier::quantizer::optimal_normal_quantizer;
use fqbarrier::transition::{CdfMode, QuantizedChain};
use fqbarrier::Error;
use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FqbStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NoConvergence = 3,
    DimensionMismatch = 4,
    NumericalFailure = 5,
    Unsupported = 6,
    Io = 7,
    Parse = 8,
    BufferTooSmall = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FqbModelKind {
    BlackScholes = 0,
    PseudoCev = 1,
}

/// Model parameters; `sigma` is read for Black-Scholes, `vartheta` and
/// `delta` for pseudo-CEV.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct FqbModel {
    pub kind: FqbModelKind,
    pub r: f64,
    pub sigma: f64,
    pub vartheta: f64,
    pub delta: f64,
    pub x0: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FqbBarrier {
    UpAndOut = 0,
    DownAndOut = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FqbPayoff {
    Call = 0,
    Put = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct FqbContract {
    pub barrier_type: FqbBarrier,
    pub payoff: FqbPayoff,
    pub strike: f64,
    pub barrier: f64,
    pub maturity: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FqbEstimator {
    Indicator = 0,
    Conditional = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct FqbQuantPrice {
    pub call: f64,
    pub put: f64,
    pub survival: f64,
    pub elapsed: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct FqbMcResult {
    pub price: f64,
    pub sample_variance: f64,
    pub std_error: f64,
    pub elapsed: f64,
}

/// Opaque quantized price chain.
pub struct FqbChain {
    inner: QuantizedChain,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> FqbStatus {
    match e {
        Error::InvalidArgument(_) => FqbStatus::InvalidArgument,
        Error::NoConvergence { .. } => FqbStatus::NoConvergence,
        Error::DimensionMismatch(_) => FqbStatus::DimensionMismatch,
        Error::NonFiniteState { .. } | Error::NonPositiveState { .. } => FqbStatus::NumericalFailure,
        Error::Unsupported(_) => FqbStatus::Unsupported,
        Error::Io(_) => FqbStatus::Io,
        Error::Parse(_) => FqbStatus::Parse,
    }
}

enum Failure {
    Status(FqbStatus, String),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

fn null() -> Failure {
    Failure::Status(FqbStatus::NullPointer, "null pointer argument".into())
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> FqbStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            FqbStatus::Ok
        }
        Ok(Err(Failure::Core(e))) => {
            set_error(&e.to_string());
            status_of(&e)
        }
        Ok(Err(Failure::Status(s, msg))) => {
            set_error(&msg);
            s
        }
        Err(_) => {
            set_error("internal panic");
            FqbStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(null)
}

fn to_model(m: &FqbModel) -> Result<Model, Error> {
    match m.kind {
        FqbModelKind::BlackScholes => Model::black_scholes(m.r, m.sigma, m.x0),
        FqbModelKind::PseudoCev => Model::pseudo_cev(m.r, m.vartheta, m.delta, m.x0),
    }
}

fn to_contract(c: &FqbContract) -> Result<BarrierContract, Error> {
    let bt = match c.barrier_type {
        FqbBarrier::UpAndOut => BarrierType::UpAndOut,
        FqbBarrier::DownAndOut => BarrierType::DownAndOut,
    };
    let pt = match c.payoff {
        FqbPayoff::Call => PayoffType::Call,
        FqbPayoff::Put => PayoffType::Put,
    };
    BarrierContract::new(bt, pt, c.strike, c.barrier, c.maturity)
}

/// Message of the last failed call on this thread, or an empty string.
/// The pointer stays valid until the next call into the library.
#[no_mangle]
pub extern "C" fn fqb_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn fqb_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds the price grids and transition matrices on `[0, horizon]` from
/// the optimal product quantizer of size at most `budget`.
///
/// # Safety
/// `model` must point to a valid `FqbModel` and `out` to writable storage.
#[no_mangle]
pub unsafe extern "C" fn fqb_chain_new(
    model: *const FqbModel,
    horizon: f64,
    n_steps: usize,
    budget: usize,
    substeps: usize,
    out: *mut *mut FqbChain,
) -> FqbStatus {
    guard(|| {
        if out.is_null() {
            return Err(null());
        }
        *out = std::ptr::null_mut();
        let m = to_model(deref(model)?)?;
        let q = BrownianProductQuantizer::optimal(budget, horizon)?;
        let inner = QuantizedChain::build(&m, &q, n_steps, substeps, CdfMode::preferred(&m))?;
        *out = Box::into_raw(Box::new(FqbChain { inner }));
        Ok(())
    })
}

/// Releases a chain; null is ignored.
///
/// # Safety
/// `chain` must come from `fqb_chain_new` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn fqb_chain_free(chain: *mut FqbChain) {
    if !chain.is_null() {
        drop(Box::from_raw(chain));
    }
}

/// Number of price levels per date, or 0 for a null handle.
///
/// # Safety
/// `chain` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fqb_chain_levels(chain: *const FqbChain) -> usize {
    chain.as_ref().map_or(0, |c| c.inner.grid.size())
}

/// Call and put prices of the contract by forward induction on the chain.
///
/// # Safety
/// `chain` must be a live handle, `contract` valid and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fqb_chain_price(
    chain: *const FqbChain,
    contract: *const FqbContract,
    out: *mut FqbQuantPrice,
) -> FqbStatus {
    guard(|| {
        let chain = deref(chain)?;
        let c = to_contract(deref(contract)?)?;
        let out = out.as_mut().ok_or_else(null)?;
        let p = price_barrier(&chain.inner, &c)?;
        *out = FqbQuantPrice {
            call: p.call,
            put: p.put,
            survival: p.survival,
            elapsed: p.elapsed,
        };
        Ok(())
    })
}

/// Closed-form Black-Scholes knock-out price.
///
/// # Safety
/// `model` and `contract` must be valid, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fqb_closed_form(
    model: *const FqbModel,
    contract: *const FqbContract,
    out: *mut f64,
) -> FqbStatus {
    guard(|| {
        let m = to_model(deref(model)?)?;
        let c = to_contract(deref(contract)?)?;
        let out = out.as_mut().ok_or_else(null)?;
        let Model::BlackScholes { r, sigma, x0 } = m else {
            return Err(Failure::Status(
                FqbStatus::Unsupported,
                "closed form unavailable for pseudo-CEV".into(),
            ));
        };
        *out = bs_barrier_closed_form(&c, x0, r, sigma)?;
        Ok(())
    })
}

/// Regular Brownian bridge Monte Carlo price.
///
/// # Safety
/// `model` and `contract` must be valid, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fqb_rbb_price(
    model: *const FqbModel,
    contract: *const FqbContract,
    n_steps: usize,
    n_paths: usize,
    seed: u64,
    estimator: FqbEstimator,
    out: *mut FqbMcResult,
) -> FqbStatus {
    guard(|| {
        let m = to_model(deref(model)?)?;
        let c = to_contract(deref(contract)?)?;
        let out = out.as_mut().ok_or_else(null)?;
        let est = match estimator {
            FqbEstimator::Indicator => Estimator::Indicator,
            FqbEstimator::Conditional => Estimator::Conditional,
        };
        let r = rbb_price(&m, &c, &McConfig::new(n_steps, n_paths, seed, est)?)?;
        *out = FqbMcResult {
            price: r.price,
            sample_variance: r.sample_variance,
            std_error: r.std_error,
            elapsed: r.elapsed,
        };
        Ok(())
    })
}

/// Optimal `levels`-point quantizer of N(0,1) written into caller buffers
/// of length at least `levels`. `weights` may be null.
///
/// # Safety
/// `points` (and `weights` when not null) must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn fqb_normal_quantizer(
    levels: usize,
    points: *mut f64,
    weights: *mut f64,
    len: usize,
    distortion: *mut f64,
) -> FqbStatus {
    guard(|| {
        if points.is_null() {
            return Err(null());
        }
        if len < levels {
            return Err(Failure::Status(
                FqbStatus::BufferTooSmall,
                format!("buffer of {len} cannot hold {levels} levels"),
            ));
        }
        let q = optimal_normal_quantizer(levels)?;
        std::slice::from_raw_parts_mut(points, levels).copy_from_slice(&q.points);
        if !weights.is_null() {
            std::slice::from_raw_parts_mut(weights, levels).copy_from_slice(&q.weights);
        }
        if let Some(d) = distortion.as_mut() {
            *d = q.distortion;
        }
        Ok(())
    })
}
