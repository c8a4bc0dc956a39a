//! C ABI for the blowtorch library.
//!
//! Networks live behind an opaque [`BtNetwork`] handle. Every fallible call
//! returns a [`BtStatus`]; on failure the message is available from
//! [`bt_last_error`] on the same thread. Strings handed out by the library are
//! released with [`bt_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use blowtorch::blowtorch::{synthesize, Direction, SynthesisOptions};
use blowtorch::heat::{heat_bounds, heat_order, Relation};
use blowtorch::lowtemp::{lowt_profile, phi_for};
use blowtorch::sim::{empirical_stats, simulate};
use blowtorch::stationary::{stationary, MethodChoice, RateMatrix};
use blowtorch::trees::Limits;
use blowtorch::{parse_network, Error, Network};

/// Result of every fallible call. Values 1 to 4 match the command-line exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BtStatus {
    Ok = 0,
    /// Malformed input, failed validation or an unknown state.
    Validation = 1,
    /// A computational cap was hit, or no positive-heat path exists.
    Cap = 2,
    /// The request contradicts a hypothesis, e.g. synthesis on a heat-ordered pair.
    Hypothesis = 3,
    Internal = 4,
    NullPointer = 5,
    /// An output buffer has the wrong length.
    BufferSize = 6,
    /// A Rust panic was caught at the boundary.
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BtMethod {
    Auto = 0,
    Solve = 1,
    Trees = 2,
    MatrixTree = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BtRelation {
    StrictlyGreater = 0,
    WeaklyGreater = 1,
    EqualByZeroHeat = 2,
    Incomparable = 3,
    WeaklyLess = 4,
    StrictlyLess = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BtDirection {
    XOverY = 0,
    YOverX = 1,
}

/// Opaque network handle.
pub struct BtNetwork {
    net: Network,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(err: Error) -> BtStatus {
    let status = match err.exit_code() {
        1 => BtStatus::Validation,
        2 => BtStatus::Cap,
        3 => BtStatus::Hypothesis,
        _ => BtStatus::Internal,
    };
    set_error(err.to_string());
    status
}

fn guard<F: FnOnce() -> BtStatus>(f: F) -> BtStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => {
            set_error("panic inside blowtorch".into());
            BtStatus::Panic
        }
    }
}

macro_rules! try_bt {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(err) => return fail(err),
        }
    };
}

macro_rules! non_null {
    ($($p:ident),+) => {
        $(if $p.is_null() {
            set_error(format!("`{}` is null", stringify!($p)));
            return BtStatus::NullPointer;
        })+
    };
}

fn check_len(got: usize, want: usize) -> Result<(), BtStatus> {
    if got == want {
        Ok(())
    } else {
        set_error(format!("buffer holds {got} values, expected {want}"));
        Err(BtStatus::BufferSize)
    }
}

fn check_state(net: &Network, x: usize) -> Result<(), Error> {
    if x < net.n_states() {
        Ok(())
    } else {
        Err(Error::UnknownState(format!("index {x}")))
    }
}

/// Message of the last failure on this thread, or null. Valid until the next
/// failing call on the same thread.
#[no_mangle]
pub extern "C" fn bt_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parses and validates a network document (UTF-8 JSON).
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bt_network_parse(json: *const c_char, out: *mut *mut BtNetwork) -> BtStatus {
    guard(|| {
        non_null!(json, out);
        let text = match CStr::from_ptr(json).to_str() {
            Ok(t) => t,
            Err(_) => return fail(Error::Schema("input is not UTF-8".into())),
        };
        let net = try_bt!(parse_network(text));
        *out = Box::into_raw(Box::new(BtNetwork { net }));
        BtStatus::Ok
    })
}

/// # Safety
/// `net` must come from [`bt_network_parse`] and not be freed twice. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn bt_network_free(net: *mut BtNetwork) {
    if !net.is_null() {
        drop(Box::from_raw(net));
    }
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn bt_network_state_count(net: *const BtNetwork, out: *mut usize) -> BtStatus {
    guard(|| {
        non_null!(net, out);
        *out = (*net).net.n_states();
        BtStatus::Ok
    })
}

/// Index of the state with the given label.
///
/// # Safety
/// Pointers must be valid; `label` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn bt_network_state_index(
    net: *const BtNetwork,
    label: *const c_char,
    out: *mut usize,
) -> BtStatus {
    guard(|| {
        non_null!(net, label, out);
        let label = CStr::from_ptr(label).to_string_lossy();
        *out = try_bt!((*net).net.index_of(&label));
        BtStatus::Ok
    })
}

/// Stationary occupations at `beta` into `probs[0..len]`, `len` = state count.
///
/// # Safety
/// `probs` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn bt_stationary(
    net: *const BtNetwork,
    beta: f64,
    method: BtMethod,
    probs: *mut f64,
    len: usize,
) -> BtStatus {
    guard(|| {
        non_null!(net, probs);
        let net = &(*net).net;
        if let Err(s) = check_len(len, net.n_states()) {
            return s;
        }
        let choice = match method {
            BtMethod::Auto => MethodChoice::Auto,
            BtMethod::Solve => MethodChoice::Solve,
            BtMethod::Trees => MethodChoice::Trees,
            BtMethod::MatrixTree => MethodChoice::MatrixTree,
        };
        let rates = try_bt!(RateMatrix::build(net, beta));
        let dist = try_bt!(stationary(&rates, choice, &Limits::default()));
        std::slice::from_raw_parts_mut(probs, len).copy_from_slice(&dist.probs);
        BtStatus::Ok
    })
}

/// Minimum and maximum heat over self-avoiding paths `y -> x`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn bt_heat_bounds(
    net: *const BtNetwork,
    x: usize,
    y: usize,
    min_heat: *mut f64,
    max_heat: *mut f64,
) -> BtStatus {
    guard(|| {
        non_null!(net, min_heat, max_heat);
        let net = &(*net).net;
        try_bt!(check_state(net, x).and(check_state(net, y)));
        let b = try_bt!(heat_bounds(net, x, y, &Limits::default()));
        *min_heat = b.min_heat;
        *max_heat = b.max_heat;
        BtStatus::Ok
    })
}

/// Heat-order relation of `x` against `y`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn bt_heat_relation(
    net: *const BtNetwork,
    x: usize,
    y: usize,
    out: *mut BtRelation,
) -> BtStatus {
    guard(|| {
        non_null!(net, out);
        let net = &(*net).net;
        try_bt!(check_state(net, x).and(check_state(net, y)));
        let r = try_bt!(heat_order(net, x, y, &Limits::default()));
        *out = match r.relation {
            Relation::StrictlyGreater => BtRelation::StrictlyGreater,
            Relation::WeaklyGreater => BtRelation::WeaklyGreater,
            Relation::EqualByZeroHeat => BtRelation::EqualByZeroHeat,
            Relation::Incomparable => BtRelation::Incomparable,
            Relation::WeaklyLess => BtRelation::WeaklyLess,
            Relation::StrictlyLess => BtRelation::StrictlyLess,
        };
        BtStatus::Ok
    })
}

/// Zero-temperature classification using the network's exponent table
/// (or `q/2`). Writes `Psi(x)` to `psi[0..len]`, 1 or 0 per state to
/// `dominant[0..len]`, and the escherian flag.
///
/// # Safety
/// Buffers must hold `len` elements; `escherian` must be valid.
#[no_mangle]
pub unsafe extern "C" fn bt_lowtemp(
    net: *const BtNetwork,
    psi: *mut f64,
    dominant: *mut u8,
    len: usize,
    escherian: *mut bool,
) -> BtStatus {
    guard(|| {
        non_null!(net, psi, dominant, escherian);
        let net = &(*net).net;
        if let Err(s) = check_len(len, net.n_states()) {
            return s;
        }
        let profile = lowt_profile(&try_bt!(phi_for(net)));
        std::slice::from_raw_parts_mut(psi, len).copy_from_slice(&profile.psi);
        let mask = std::slice::from_raw_parts_mut(dominant, len);
        mask.fill(0);
        for &x in &profile.dominant {
            mask[x] = 1;
        }
        *escherian = profile.escherian;
        BtStatus::Ok
    })
}

/// Synthesizes activations forcing the requested order at the network's beta.
/// On success `*json_out` holds the certified assignment as JSON; release it
/// with [`bt_string_free`].
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn bt_blowtorch(
    net: *const BtNetwork,
    x: usize,
    y: usize,
    direction: BtDirection,
    allow_one_sided: bool,
    json_out: *mut *mut c_char,
) -> BtStatus {
    guard(|| {
        non_null!(net, json_out);
        let net = &(*net).net;
        try_bt!(check_state(net, x).and(check_state(net, y)));
        let dir = match direction {
            BtDirection::XOverY => Direction::XOverY,
            BtDirection::YOverX => Direction::YOverX,
        };
        let opts = SynthesisOptions { allow_one_sided };
        let k = try_bt!(synthesize(net, x, y, dir, &Limits::default(), opts));
        let text = CString::new(k.to_json().to_string()).expect("JSON has no NUL");
        *json_out = text.into_raw();
        BtStatus::Ok
    })
}

/// Simulates from `initial` over `[0, horizon]` and reports empirical
/// occupations, the entropy flux and the number of jumps.
///
/// # Safety
/// `occupation` must hold `len` doubles; other pointers must be valid.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn bt_simulate(
    net: *const BtNetwork,
    beta: f64,
    initial: usize,
    horizon: f64,
    seed: u64,
    occupation: *mut f64,
    len: usize,
    entropy_flux: *mut f64,
    jumps: *mut usize,
) -> BtStatus {
    guard(|| {
        non_null!(net, occupation, entropy_flux, jumps);
        let net = &(*net).net;
        if let Err(s) = check_len(len, net.n_states()) {
            return s;
        }
        try_bt!(check_state(net, initial));
        let rates = try_bt!(RateMatrix::build(net, beta));
        let traj = try_bt!(simulate(&rates, initial, horizon, seed));
        let stats = try_bt!(empirical_stats(&traj, net));
        std::slice::from_raw_parts_mut(occupation, len).copy_from_slice(&stats.occupation);
        *entropy_flux = stats.entropy_flux;
        *jumps = traj.events.len();
        BtStatus::Ok
    })
}

/// # Safety
/// `s` must come from this library and not be freed twice. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn bt_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
