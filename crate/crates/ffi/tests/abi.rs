use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use ordbreuil_ffi::*;

const WEIGHTS: [u32; 3] = [0, 4, 8];

fn module(params: [i64; 7]) -> *mut OrdbModule {
    let mut m = ptr::null_mut();
    let st = unsafe { ordb_module_new(13, WEIGHTS.as_ptr(), params.as_ptr(), &mut m) };
    assert_eq!(st, OrdbStatus::Ok);
    m
}

fn last_error() -> String {
    let mut buf = vec![0 as std::ffi::c_char; 256];
    unsafe { ordb_last_error(buf.as_mut_ptr(), buf.len()) };
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

#[test]
fn genericity_predicate() {
    assert_eq!(ordb_is_strongly_generic(13, 0, 4, 8), 1);
    assert_eq!(ordb_is_strongly_generic(13, 0, 3, 8), 0);
}

#[test]
fn monodromy_through_handles() {
    let m = module([1, 0, 1, 1, 1, 1, 1]);
    let mut exists = 0;
    assert_eq!(unsafe { ordb_monodromy_exists(m, &mut exists) }, OrdbStatus::Ok);
    assert_eq!(exists, 1);
    let mut out = vec![0u32; 39];
    assert_eq!(unsafe { ordb_monodromy(m, out.as_mut_ptr(), 10) }, OrdbStatus::BufferTooSmall);
    assert_eq!(unsafe { ordb_monodromy(m, out.as_mut_ptr(), out.len()) }, OrdbStatus::Ok);
    // single monomials in each block, matching the library's own worked case
    assert_eq!(out.iter().filter(|&&c| c != 0).count(), 3);
    let mut dim = 0;
    assert_eq!(unsafe { ordb_tangent_dimension(m, OrdbTangent::WithMonodromy, &mut dim) }, OrdbStatus::Ok);
    assert_eq!(dim, 6);
    assert_eq!(unsafe { ordb_tangent_dimension(m, OrdbTangent::Quasi, &mut dim) }, OrdbStatus::Ok);
    assert_eq!(dim, 7);
    let (mut frob, mut hw) = ([0u32; 9], [0u32; 3]);
    assert_eq!(unsafe { ordb_fl_module(m, frob.as_mut_ptr(), hw.as_mut_ptr()) }, OrdbStatus::Ok);
    assert_eq!(hw, [0, 5, 10]);
    unsafe { ordb_module_free(m) };
}

#[test]
fn missing_monodromy_is_reported() {
    let m = module([1, 2, 1, 1, 1, 1, 1]);
    let mut out = vec![0u32; 39];
    assert_eq!(unsafe { ordb_monodromy(m, out.as_mut_ptr(), out.len()) }, OrdbStatus::NoMonodromy);
    assert!(!last_error().is_empty());
    unsafe { ordb_module_free(m) };
}

#[test]
fn invalid_arguments() {
    let mut m = ptr::null_mut();
    let params = [0i64; 7];
    let st = unsafe { ordb_module_new(13, WEIGHTS.as_ptr(), params.as_ptr(), &mut m) };
    assert_eq!(st, OrdbStatus::InvalidInput);
    assert!(m.is_null());
    assert_eq!(unsafe { ordb_module_new(12, WEIGHTS.as_ptr(), params.as_ptr(), &mut m) }, OrdbStatus::InvalidInput);
    assert_eq!(unsafe { ordb_monodromy_exists(ptr::null(), ptr::null_mut()) }, OrdbStatus::NullPointer);
    unsafe { ordb_module_free(ptr::null_mut()) };
}

#[test]
fn json_commands() {
    let cmd = CString::new("monodromy").unwrap();
    let input = CString::new(
        r#"{"prime": 13, "weights": [0, 4, 8], "coefficients": "Fp",
            "gauge": {"v10": 1, "v20": 0, "v20p": 1, "v21": 1, "alpha": [1, 1, 1]}}"#,
    )
    .unwrap();
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { ordb_run_json(cmd.as_ptr(), input.as_ptr(), 0, &mut out) }, OrdbStatus::Ok);
    let text = unsafe { CStr::from_ptr(out) }.to_str().unwrap().to_owned();
    unsafe { ordb_string_free(out) };
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["status"], "ok");
    assert_eq!(v["result"]["exists"], true);

    let bad = CString::new("no-such-command").unwrap();
    assert_eq!(unsafe { ordb_run_json(bad.as_ptr(), input.as_ptr(), 0, &mut out) }, OrdbStatus::InvalidInput);
    assert!(out.is_null());
}

#[test]
fn header_compiles_as_c() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let header = dir.join("include").join("ordbreuil.h");
    let text = std::fs::read_to_string(&header).expect("header generated by the build script");
    for symbol in ["ordb_module_new", "ordb_monodromy", "ordb_run_json", "ordb_string_free", "OrdbStatus"] {
        assert!(text.contains(symbol), "{symbol} missing from header");
    }
    let src = std::env::temp_dir().join(format!("ordb_header_{}.c", std::process::id()));
    std::fs::write(&src, "#include \"ordbreuil.h\"\nint main(void) { return ordb_is_strongly_generic(13, 0, 4, 8) ? 0 : 1; }\n")
        .unwrap();
    let status = Command::new("cc").arg("-fsyntax-only").arg("-I").arg(dir.join("include")).arg(&src).status();
    let _ = std::fs::remove_file(&src);
    match status {
        Ok(s) => assert!(s.success(), "C compiler rejected the header"),
        Err(e) => eprintln!("skipping C compile check: {e}"),
    }
}
