use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use endos_ffi::*;

fn last_error() -> String {
    let p = endos_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn run_circuit_returns_report() {
    let cfg = endos_config_default();
    let circuit = CString::new("INIT\nROT 0 3.141592653589793 0\nCNOT 0 1\nMEASURE 1\n").unwrap();
    let mut json = ptr::null_mut();
    let mut code = -1;
    let status = unsafe { endos_run_circuit(cfg, circuit.as_ptr(), 7, 2, true, &mut json, &mut code) };
    assert_eq!(status, EndosStatus::Ok);
    assert_eq!(code, 0);
    let text = unsafe { CStr::from_ptr(json) }.to_str().unwrap().to_owned();
    let report: serde_json::Value = serde_json::from_str(&text).unwrap();
    let last = report["measurements"].as_array().unwrap().last().unwrap().clone();
    assert_eq!(last["inferred_p_bit"], 1);
    assert_eq!(report["verification"]["audit_passed"], true);
    unsafe {
        endos_string_free(json);
        endos_config_free(cfg);
    }
}

#[test]
fn parse_errors_carry_status_and_message() {
    let cfg = endos_config_default();
    let circuit = CString::new("CNOT 0 0\n").unwrap();
    let mut json = ptr::null_mut();
    let mut code = 0;
    let status = unsafe { endos_run_circuit(cfg, circuit.as_ptr(), 1, 0, false, &mut json, &mut code) };
    assert_eq!(status, EndosStatus::Parse);
    assert!(json.is_null());
    assert!(last_error().contains("line 1"), "{}", last_error());

    let bad = CString::new("b_field = 5\nwarp = 9\n").unwrap();
    let mut handle = ptr::null_mut();
    assert_eq!(unsafe { endos_config_parse(bad.as_ptr(), &mut handle) }, EndosStatus::Parse);
    assert!(handle.is_null());
    assert!(last_error().contains("line 2"));
    unsafe { endos_config_free(cfg) };
}

#[test]
fn null_arguments_are_rejected() {
    let mut out = 0.0;
    assert_eq!(unsafe { endos_reference_cnot_time(ptr::null(), &mut out) }, EndosStatus::NullPointer);
    let cfg = endos_config_default();
    assert_eq!(unsafe { endos_reference_cnot_time(cfg, ptr::null_mut()) }, EndosStatus::NullPointer);
    unsafe {
        endos_config_free(cfg);
        endos_config_free(ptr::null_mut());
        endos_string_free(ptr::null_mut());
    }
}

#[test]
fn numeric_helpers_match_the_library() {
    let text = CString::new("b_field = 5\n").unwrap();
    let mut cfg = ptr::null_mut();
    assert_eq!(unsafe { endos_config_parse(text.as_ptr(), &mut cfg) }, EndosStatus::Ok);

    let mut forms = EndosClosedForms::default();
    assert_eq!(unsafe { endos_closed_form_frequencies(cfg, &mut forms) }, EndosStatus::Ok);
    let lib = endos::physics::closed_form_frequencies(&endos::MachineConfig::default());
    assert_eq!(forms.control_electron, lib.ec);
    assert_eq!(forms.target_nucleus, lib.p);

    for (p, a) in [(0u8, 0u8), (0, 1), (1, 0), (1, 1)] {
        let mut f = 0.0;
        assert_eq!(unsafe { endos_modulation_frequency(cfg, p, a, &mut f) }, EndosStatus::Ok);
        let (mut gp, mut ga) = (9u8, 9u8);
        assert_eq!(unsafe { endos_classify_frequency(cfg, f, 1e6, &mut gp, &mut ga) }, EndosStatus::Ok);
        assert_eq!((gp, ga), (p, a));
    }
    let (mut gp, mut ga) = (0u8, 0u8);
    assert_eq!(
        unsafe { endos_classify_frequency(cfg, 1.0, 1e6, &mut gp, &mut ga) },
        EndosStatus::Unclassifiable
    );
    let mut f = 0.0;
    assert_eq!(unsafe { endos_modulation_frequency(cfg, 2, 0, &mut f) }, EndosStatus::InvalidInput);

    let mut t = 0.0;
    assert_eq!(unsafe { endos_reference_cnot_time(cfg, &mut t) }, EndosStatus::Ok);
    assert!((t - 75.6e-6).abs() < 1e-12);
    let mut n = 0u64;
    assert_eq!(unsafe { endos_decoherence_budget(cfg, 100e-6, &mut n) }, EndosStatus::Ok);
    assert_eq!(n, 100_000);
    assert_eq!(unsafe { endos_decoherence_budget(cfg, 0.0, &mut n) }, EndosStatus::InvalidInput);
    unsafe { endos_config_free(cfg) };
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(endos_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

/// The generated header is valid C.
#[test]
fn header_compiles() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/endos.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for name in ["endos_run_circuit", "endos_config_free", "ENDOS_STATUS_PARSE", "EndosClosedForms"] {
        assert!(text.contains(name), "{name} missing from header");
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(
        &src,
        "#include \"endos.h\"\nint main(void) { EndosConfig *c = endos_config_default(); endos_config_free(c); return ENDOS_STATUS_OK; }\n",
    )
    .unwrap();
    let Ok(out) = Command::new("cc")
        .args(["-std=c11", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(header.parent().unwrap())
        .arg(&src)
        .output()
    else {
        eprintln!("no C compiler; skipping");
        return;
    };
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
