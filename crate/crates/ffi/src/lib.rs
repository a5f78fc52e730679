//! C ABI over the simulator.
//!
//! Configurations are opaque handles created by `endos_config_default` or
//! `endos_config_parse` and released with `endos_config_free`. Every fallible
//! call returns an `EndosStatus`; on failure a message is available from
//! `endos_last_error_message` on the same thread. Strings returned through
//! out-parameters are owned by the caller and freed with
//! `endos_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use endos::compiler::Circuit;
use endos::config::MachineConfig;
use endos::error::EndosError;
use endos::physics::{closed_form_frequencies, modulation_frequency};
use endos::readout::classify_frequency;
use endos::report::{self, RunOptions};
use endos::timing::{decoherence_budget, reference_cnot_time};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EndosStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    InvalidInput = 4,
    Unclassifiable = 5,
    Panic = 6,
}

/// Opaque machine configuration.
pub struct EndosConfig {
    inner: MachineConfig,
}

/// Closed-form resonance frequencies, Hz.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct EndosClosedForms {
    pub single_qubit: f64,
    pub single_qubit_bare: f64,
    pub control_electron: f64,
    pub tip_nucleus: f64,
    pub target_electron_one: f64,
    pub target_electron_zero: f64,
    pub target_nucleus: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(err: &EndosError) -> EndosStatus {
    match err {
        EndosError::Parse { .. } => EndosStatus::Parse,
        EndosError::UnclassifiableFrequency { .. } => EndosStatus::Unclassifiable,
        _ => EndosStatus::InvalidInput,
    }
}

fn fail(err: EndosError) -> EndosStatus {
    let status = status_of(&err);
    set_error(err.to_string());
    status
}

/// Runs `f`, converting a panic into `EndosStatus::Panic`.
fn guarded(f: impl FnOnce() -> EndosStatus) -> EndosStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic");
            EndosStatus::Panic
        }
    }
}

unsafe fn read_str<'a>(p: *const c_char) -> Result<&'a str, EndosStatus> {
    if p.is_null() {
        set_error("null string argument");
        return Err(EndosStatus::NullPointer);
    }
    // SAFETY: caller passes a NUL-terminated string.
    unsafe { CStr::from_ptr(p) }.to_str().map_err(|_| {
        set_error("string argument is not valid UTF-8");
        EndosStatus::InvalidUtf8
    })
}

unsafe fn config_ref<'a>(p: *const EndosConfig) -> Result<&'a MachineConfig, EndosStatus> {
    if p.is_null() {
        set_error("null config handle");
        return Err(EndosStatus::NullPointer);
    }
    // SAFETY: handle came from endos_config_default or endos_config_parse.
    Ok(unsafe { &(*p).inner })
}

macro_rules! try_status {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(s) => return s,
        }
    };
}

macro_rules! out_ptr {
    ($p:expr) => {
        if $p.is_null() {
            set_error("null output pointer");
            return EndosStatus::NullPointer;
        }
    };
}

/// Message for the last failed call on this thread, or NULL. Valid until
/// the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn endos_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

#[no_mangle]
pub extern "C" fn endos_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

#[no_mangle]
pub extern "C" fn endos_config_default() -> *mut EndosConfig {
    Box::into_raw(Box::new(EndosConfig {
        inner: MachineConfig::default(),
    }))
}

/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn endos_config_parse(text: *const c_char, out: *mut *mut EndosConfig) -> EndosStatus {
    guarded(|| {
        out_ptr!(out);
        let text = try_status!(unsafe { read_str(text) });
        match MachineConfig::parse(text) {
            Ok(inner) => {
                // SAFETY: checked non-null above.
                unsafe { *out = Box::into_raw(Box::new(EndosConfig { inner })) };
                EndosStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `config` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn endos_config_free(config: *mut EndosConfig) {
    if !config.is_null() {
        // SAFETY: handle was created by Box::into_raw in this crate.
        drop(unsafe { Box::from_raw(config) });
    }
}

/// Compiles and simulates a circuit, returning the JSON run report.
/// `tips` of 0 skips scheduling. `exit_code` receives the code the CLI
/// would exit with.
///
/// # Safety
/// Pointers must be valid; `circuit` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn endos_run_circuit(
    config: *const EndosConfig,
    circuit: *const c_char,
    seed: u64,
    tips: usize,
    verify_frequencies: bool,
    report_json: *mut *mut c_char,
    exit_code: *mut i32,
) -> EndosStatus {
    guarded(|| {
        out_ptr!(report_json);
        out_ptr!(exit_code);
        let cfg = try_status!(unsafe { config_ref(config) });
        let text = try_status!(unsafe { read_str(circuit) });
        let circuit = match Circuit::parse(text) {
            Ok(c) => c,
            Err(e) => return fail(e),
        };
        let opts = RunOptions {
            seed,
            tips: (tips > 0).then_some(tips),
            verify_frequencies,
            ..Default::default()
        };
        match report::run(cfg, &circuit, &opts) {
            Ok(r) => {
                let json = CString::new(r.to_json()).expect("JSON has no NUL");
                // SAFETY: both checked non-null above.
                unsafe {
                    *report_json = json.into_raw();
                    *exit_code = r.exit_code;
                }
                EndosStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `s` must be NULL or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn endos_string_free(s: *mut c_char) {
    if !s.is_null() {
        // SAFETY: produced by CString::into_raw in this crate.
        drop(unsafe { CString::from_raw(s) });
    }
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn endos_closed_form_frequencies(
    config: *const EndosConfig,
    out: *mut EndosClosedForms,
) -> EndosStatus {
    guarded(|| {
        out_ptr!(out);
        let cfg = try_status!(unsafe { config_ref(config) });
        let f = closed_form_frequencies(cfg);
        // SAFETY: checked non-null above.
        unsafe {
            *out = EndosClosedForms {
                single_qubit: f.single_qubit,
                single_qubit_bare: f.single_qubit_bare,
                control_electron: f.ec,
                tip_nucleus: f.a,
                target_electron_one: f.et1,
                target_electron_zero: f.et0,
                target_nucleus: f.p,
            }
        };
        EndosStatus::Ok
    })
}

/// Readout line for donor bit `p_bit` and tip bit `a_bit`, Hz.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn endos_modulation_frequency(
    config: *const EndosConfig,
    p_bit: u8,
    a_bit: u8,
    out: *mut f64,
) -> EndosStatus {
    guarded(|| {
        out_ptr!(out);
        let cfg = try_status!(unsafe { config_ref(config) });
        if p_bit > 1 || a_bit > 1 {
            set_error("bits must be 0 or 1");
            return EndosStatus::InvalidInput;
        }
        // SAFETY: checked non-null above.
        unsafe { *out = modulation_frequency(p_bit, a_bit, cfg) };
        EndosStatus::Ok
    })
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn endos_classify_frequency(
    config: *const EndosConfig,
    frequency: f64,
    tolerance: f64,
    p_bit: *mut u8,
    a_bit: *mut u8,
) -> EndosStatus {
    guarded(|| {
        out_ptr!(p_bit);
        out_ptr!(a_bit);
        let cfg = try_status!(unsafe { config_ref(config) });
        match classify_frequency(frequency, cfg, tolerance) {
            Ok((p, a)) => {
                // SAFETY: checked non-null above.
                unsafe {
                    *p_bit = p;
                    *a_bit = a;
                }
                EndosStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Wall time of one CNOT between neighbouring donors, seconds.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn endos_reference_cnot_time(config: *const EndosConfig, out: *mut f64) -> EndosStatus {
    guarded(|| {
        out_ptr!(out);
        let cfg = try_status!(unsafe { config_ref(config) });
        // SAFETY: checked non-null above.
        unsafe { *out = reference_cnot_time(cfg) };
        EndosStatus::Ok
    })
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn endos_decoherence_budget(
    config: *const EndosConfig,
    mean_gate_time: f64,
    out: *mut u64,
) -> EndosStatus {
    guarded(|| {
        out_ptr!(out);
        let cfg = try_status!(unsafe { config_ref(config) });
        match decoherence_budget(cfg, mean_gate_time) {
            Ok(n) => {
                // SAFETY: checked non-null above.
                unsafe { *out = n };
                EndosStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}
