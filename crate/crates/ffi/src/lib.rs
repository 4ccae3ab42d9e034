//! C ABI over `unruh-core`.
//!
//! Every fallible function returns an [`UnruhStatus`] and writes its result
//! through an out-pointer. On failure the message is kept per thread and can
//! be read with [`unruh_last_error_message`]. States are opaque handles that
//! the caller releases with [`unruh_state_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use num_complex::Complex64;
use unruh_core::bell::{chsh_parity, duan_epr, ChshSetting};
use unruh_core::coinflip::{self, Cheat, CoinFlipConfig, DetectorModel, Party};
use unruh_core::frames::{self, AccelParams, Direction, FramePair};
use unruh_core::gaussian::{self, GaussianState, PhasePoint};
use unruh_core::teleport::{self, OutcomeMode, TeleportationConfig};
use unruh_core::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnruhStatus {
    Ok = 0,
    NullPointer = 1,
    MuOutOfRange = 2,
    InvalidParameter = 3,
    DimensionMismatch = 4,
    UnknownMode = 5,
    Numerical = 6,
    BufferTooSmall = 7,
    Panic = 8,
}

impl From<&Error> for UnruhStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::MuOutOfRange(_) => UnruhStatus::MuOutOfRange,
            Error::DimensionMismatch { .. } | Error::ShapeMismatch(_) => {
                UnruhStatus::DimensionMismatch
            }
            Error::UnknownMode(_) | Error::DuplicateLabel(_) => UnruhStatus::UnknownMode,
            Error::InvalidParameter(_) | Error::NonCommuting(..) | Error::DegenerateObservables => {
                UnruhStatus::InvalidParameter
            }
            Error::NotSymplectic(_)
            | Error::NotSymmetric(_)
            | Error::UncertaintyViolated(_)
            | Error::SingularCovariance
            | Error::NotPure(_)
            | Error::Truncation { .. } => UnruhStatus::Numerical,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

struct Failure(UnruhStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(UnruhStatus::from(&e), e.to_string())
    }
}

fn null() -> Failure {
    Failure(UnruhStatus::NullPointer, "null pointer argument".into())
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> UnruhStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => UnruhStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            UnruhStatus::Panic
        }
    }
}

/// Message of the last failed call on this thread, or null. The pointer is
/// valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn unruh_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn unruh_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Opaque Gaussian state.
pub struct UnruhGaussianState {
    inner: GaussianState,
}

fn boxed(state: GaussianState) -> *mut UnruhGaussianState {
    Box::into_raw(Box::new(UnruhGaussianState { inner: state }))
}

unsafe fn state_ref<'a>(s: *const UnruhGaussianState) -> Result<&'a GaussianState, Failure> {
    // SAFETY: caller passes a handle from this library or null.
    unsafe { s.as_ref() }.map(|s| &s.inner).ok_or_else(null)
}

unsafe fn write<T>(out: *mut T, v: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null());
    }
    // SAFETY: non-null, caller guarantees it points to writable storage.
    unsafe { out.write(v) };
    Ok(())
}

unsafe fn fill(buf: *mut f64, len: usize, values: &[f64]) -> Result<(), Failure> {
    if buf.is_null() {
        return Err(null());
    }
    if len < values.len() {
        return Err(Failure(
            UnruhStatus::BufferTooSmall,
            format!("buffer holds {len} values, need {}", values.len()),
        ));
    }
    // SAFETY: buf has room for `len >= values.len()` doubles.
    unsafe { ptr::copy_nonoverlapping(values.as_ptr(), buf, values.len()) };
    Ok(())
}

/// Vacuum on `n_modes` modes labelled "0", "1", ...
///
/// # Safety
/// `out` must be a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn unruh_state_vacuum(
    n_modes: usize,
    out: *mut *mut UnruhGaussianState,
) -> UnruhStatus {
    guard(|| {
        if n_modes == 0 {
            return Err(Failure(
                UnruhStatus::InvalidParameter,
                "need at least one mode".into(),
            ));
        }
        let labels: Vec<String> = (0..n_modes).map(|i| i.to_string()).collect();
        let s = gaussian::vacuum_state(&labels)?;
        unsafe { write(out, boxed(s)) }
    })
}

/// Two-mode squeezed vacuum with modes "0" and "1"; `sign` is +1 or -1.
///
/// # Safety
/// `out` must be a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn unruh_state_two_mode_squeezed(
    mu: f64,
    sign: f64,
    out: *mut *mut UnruhGaussianState,
) -> UnruhStatus {
    guard(|| {
        let s = gaussian::two_mode_squeezed(mu, sign, ["0", "1"])?;
        unsafe { write(out, boxed(s)) }
    })
}

/// Minkowski description of a cooled Rindler pair, modes "0" and "1".
///
/// # Safety
/// `out` must be a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn unruh_state_rindler_vacuum_in_minkowski(
    mu: f64,
    out: *mut *mut UnruhGaussianState,
) -> UnruhStatus {
    guard(|| {
        let s = frames::rindler_vacuum_in_minkowski(mu)?.relabel(vec!["0".into(), "1".into()])?;
        unsafe { write(out, boxed(s)) }
    })
}

/// Applies the frame change to modes `first` and `first + 1` of a state.
/// `to_rindler` nonzero maps the inertial description to the accelerated one.
///
/// # Safety
/// `state` must be a live handle; `out` a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn unruh_state_change_frame(
    state: *const UnruhGaussianState,
    first: usize,
    mu: f64,
    to_rindler: i32,
    out: *mut *mut UnruhGaussianState,
) -> UnruhStatus {
    guard(|| {
        let s = unsafe { state_ref(state) }?;
        if first + 1 >= s.n_modes() {
            return Err(Failure(
                UnruhStatus::UnknownMode,
                format!("no mode pair at index {first}"),
            ));
        }
        let labels = s.labels();
        let (a, b) = (labels[first].clone(), labels[first + 1].clone());
        let (ta, tb) = (format!("{a}'"), format!("{b}'"));
        let direction = if to_rindler != 0 {
            Direction::ToRindler
        } else {
            Direction::ToMinkowski
        };
        let pair = match direction {
            Direction::ToRindler => FramePair::new(&ta, &tb, (&a, &b), mu)?,
            Direction::ToMinkowski => FramePair::new(&a, &b, (&ta, &tb), mu)?,
        };
        let t = frames::transform_state(s, &[pair], direction)?.relabel(labels.to_vec())?;
        unsafe { write(out, boxed(t)) }
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `state` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn unruh_state_free(state: *mut UnruhGaussianState) {
    if !state.is_null() {
        // SAFETY: handle came from Box::into_raw in this library.
        drop(unsafe { Box::from_raw(state) });
    }
}

/// Number of modes, or 0 for a null handle.
///
/// # Safety
/// `state` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn unruh_state_n_modes(state: *const UnruhGaussianState) -> usize {
    unsafe { state.as_ref() }.map_or(0, |s| s.inner.n_modes())
}

/// Copies the `2M` mean vector into `buf`.
///
/// # Safety
/// `state` must be a live handle and `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn unruh_state_mean(
    state: *const UnruhGaussianState,
    buf: *mut f64,
    len: usize,
) -> UnruhStatus {
    guard(|| {
        let s = unsafe { state_ref(state) }?;
        unsafe { fill(buf, len, s.mean().as_slice()) }
    })
}

/// Copies the `2M x 2M` covariance matrix into `buf`, row-major.
///
/// # Safety
/// `state` must be a live handle and `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn unruh_state_covariance(
    state: *const UnruhGaussianState,
    buf: *mut f64,
    len: usize,
) -> UnruhStatus {
    guard(|| {
        let s = unsafe { state_ref(state) }?;
        let c = s.covariance();
        let rows: Vec<f64> = (0..c.nrows())
            .flat_map(|i| c.row(i).iter().copied().collect::<Vec<_>>())
            .collect();
        unsafe { fill(buf, len, &rows) }
    })
}

/// Normalized Wigner function at a `2M`-dimensional point.
///
/// # Safety
/// `state` must be a live handle, `point` must hold `len` doubles, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn unruh_state_wigner(
    state: *const UnruhGaussianState,
    point: *const f64,
    len: usize,
    out: *mut f64,
) -> UnruhStatus {
    guard(|| {
        let s = unsafe { state_ref(state) }?;
        if point.is_null() {
            return Err(null());
        }
        // SAFETY: caller guarantees `len` readable doubles.
        let p = unsafe { std::slice::from_raw_parts(point, len) };
        let w = gaussian::wigner_value(s, &PhasePoint::new(p.to_vec()))?;
        unsafe { write(out, w) }
    })
}

/// Purity `Tr(rho^2)`.
///
/// # Safety
/// `state` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn unruh_state_purity(
    state: *const UnruhGaussianState,
    out: *mut f64,
) -> UnruhStatus {
    guard(|| {
        let s = unsafe { state_ref(state) }?;
        unsafe { write(out, gaussian::purity(s)) }
    })
}

/// Mean photon number of mode `mode`.
///
/// # Safety
/// `state` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn unruh_state_mean_photons(
    state: *const UnruhGaussianState,
    mode: usize,
    out: *mut f64,
) -> UnruhStatus {
    guard(|| {
        let s = unsafe { state_ref(state) }?;
        let label = s
            .labels()
            .get(mode)
            .ok_or_else(|| Failure(UnruhStatus::UnknownMode, format!("no mode {mode}")))?;
        let stats = gaussian::mode_stats(s, label)?;
        unsafe { write(out, stats.mean_photons) }
    })
}

/// `Var(x_1 - x_2) + Var(p_1 + p_2)` of a two-mode state.
///
/// # Safety
/// `state` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn unruh_duan_epr(
    state: *const UnruhGaussianState,
    out: *mut f64,
) -> UnruhStatus {
    guard(|| {
        let s = unsafe { state_ref(state) }?;
        unsafe { write(out, duan_epr(s)?) }
    })
}

/// Displaced-parity CHSH value with test points `{0, a}` and `{0, b}`.
///
/// # Safety
/// `state` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn unruh_chsh_parity(
    state: *const UnruhGaussianState,
    a_re: f64,
    a_im: f64,
    b_re: f64,
    b_im: f64,
    out: *mut f64,
) -> UnruhStatus {
    guard(|| {
        let s = unsafe { state_ref(state) }?;
        let setting = ChshSetting::new(Complex64::new(a_re, a_im), Complex64::new(b_re, b_im))?;
        unsafe { write(out, chsh_parity(s, &setting)?) }
    })
}

/// `mu = exp(-pi omega c / a)`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn unruh_mu_from_acceleration(
    acceleration: f64,
    rindler_frequency: f64,
    speed_of_light: f64,
    out: *mut f64,
) -> UnruhStatus {
    guard(|| {
        let p = AccelParams {
            speed_of_light,
            ..AccelParams::new(acceleration, rindler_frequency)?
        }
        .validated()?;
        unsafe { write(out, frames::mu_from_acceleration(&p)) }
    })
}

/// Acceleration at which `mu^2 = 1/2`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn unruh_fair_coin_acceleration(
    rindler_frequency: f64,
    speed_of_light: f64,
    out: *mut f64,
) -> UnruhStatus {
    guard(|| unsafe {
        write(
            out,
            frames::fair_coin_acceleration(rindler_frequency, speed_of_light)?,
        )
    })
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnruhCheat {
    None = 0,
    Injection = 1,
    ReportFlip = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnruhParty {
    Alice = 0,
    Bob = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnruhCoinFlipConfig {
    pub mu: f64,
    pub efficiency_alice: f64,
    pub dark_count_alice: f64,
    pub efficiency_bob: f64,
    pub dark_count_bob: f64,
    pub trials: u64,
    pub seed: u64,
    pub cheat: UnruhCheat,
    /// Injection: extra photons and evasion probability.
    pub photons: u64,
    pub evade_prob: f64,
    /// Report flip: the party that negates its bit.
    pub cheater: UnruhParty,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct UnruhCoinFlipStats {
    pub p_outcome0: f64,
    pub p_outcome1: f64,
    pub p_fail: f64,
    pub agreement_rate: f64,
    pub epsilon0: f64,
    pub epsilon0_stderr: f64,
    pub epsilon1: f64,
    pub epsilon1_stderr: f64,
    pub abort_adjusted_bias0: f64,
    pub abort_adjusted_bias1: f64,
    /// 0 for Alice, 1 for Bob.
    pub reference_party: u32,
}

/// Runs the coin flip on `shards` threads; results do not depend on `shards`.
///
/// # Safety
/// `config` must be readable and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn unruh_coinflip_run(
    config: *const UnruhCoinFlipConfig,
    shards: usize,
    out: *mut UnruhCoinFlipStats,
) -> UnruhStatus {
    guard(|| {
        let c = unsafe { config.as_ref() }.ok_or_else(null)?;
        let party = |p: UnruhParty| match p {
            UnruhParty::Alice => Party::Alice,
            UnruhParty::Bob => Party::Bob,
        };
        let cheat = match c.cheat {
            UnruhCheat::None => Cheat::None,
            UnruhCheat::Injection => Cheat::Injection {
                photons: c.photons,
                evade_prob: c.evade_prob,
            },
            UnruhCheat::ReportFlip => Cheat::ReportFlip {
                party: party(c.cheater),
            },
        };
        let s = coinflip::run(
            &CoinFlipConfig {
                mu: c.mu,
                alice_detector: DetectorModel::new(c.efficiency_alice, c.dark_count_alice)?,
                bob_detector: DetectorModel::new(c.efficiency_bob, c.dark_count_bob)?,
                trials: c.trials,
                seed: c.seed,
                cheat,
            },
            shards,
        )?;
        let stats = UnruhCoinFlipStats {
            p_outcome0: s.p_outcome0,
            p_outcome1: s.p_outcome1,
            p_fail: s.p_fail,
            agreement_rate: s.agreement_rate,
            epsilon0: s.epsilon_estimates[0].value,
            epsilon0_stderr: s.epsilon_estimates[0].stderr,
            epsilon1: s.epsilon_estimates[1].value,
            epsilon1_stderr: s.epsilon_estimates[1].stderr,
            abort_adjusted_bias0: s.abort_adjusted_bias[0],
            abort_adjusted_bias1: s.abort_adjusted_bias[1],
            reference_party: match s.reference_party {
                Party::Alice => 0,
                Party::Bob => 1,
            },
        };
        unsafe { write(out, stats) }
    })
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct UnruhConditional {
    /// Centre `(x, p)` of the state Alice assigns to Bob's mode.
    pub center: [f64; 2],
    /// Row-major 2x2 covariance.
    pub covariance: [f64; 4],
    /// Overlap of the recentred state with the input coherent state.
    pub fidelity_recentred: f64,
}

/// Alice's conditional description of Bob's mode for given outcomes `(x, p)`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn unruh_teleport_conditional(
    mu: f64,
    alpha_re: f64,
    alpha_im: f64,
    x: f64,
    p: f64,
    out: *mut UnruhConditional,
) -> UnruhStatus {
    guard(|| {
        let r = teleport::run_teleportation(&TeleportationConfig::new(
            mu,
            Complex64::new(alpha_re, alpha_im),
            OutcomeMode::Fixed { x, p },
        ))?;
        let m = r.bob_conditional.mean();
        let c = r.bob_conditional.covariance();
        let cond = UnruhConditional {
            center: [m[0], m[1]],
            covariance: [c[(0, 0)], c[(0, 1)], c[(1, 0)], c[(1, 1)]],
            fidelity_recentred: r.fidelity_recentred,
        };
        unsafe { write(out, cond) }
    })
}
