use std::ffi::{c_char, CStr, CString};
use std::ptr;

use waml_ffi::*;

const M2: &str = include_str!("../../../fixtures/m2.json");
const N2: &str = include_str!("../../../fixtures/n2.json");
const PROOF3: &str = include_str!("../../../fixtures/proof3.json");

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

unsafe fn take(s: *mut c_char) -> String {
    assert!(!s.is_null());
    let out = CStr::from_ptr(s).to_str().unwrap().to_string();
    waml_string_free(s);
    out
}

unsafe fn last_error() -> String {
    let p = waml_last_error();
    assert!(!p.is_null(), "no error recorded");
    CStr::from_ptr(p).to_str().unwrap().to_string()
}

unsafe fn model(json: &str) -> *mut WamlModel {
    let mut m = ptr::null_mut();
    assert_eq!(waml_model_load_json(json.as_ptr(), json.len(), &mut m), WamlStatus::Ok);
    m
}

unsafe fn formula(text: &str) -> *mut WamlFormula {
    let mut f = ptr::null_mut();
    assert_eq!(waml_formula_parse(c(text).as_ptr(), &mut f), WamlStatus::Ok);
    f
}

#[test]
fn parse_print_and_check() {
    unsafe {
        let m = model(M2);
        let f = formula("box(~p|~q) & dia q");
        let mut printed = ptr::null_mut();
        assert_eq!(waml_formula_print(f, &mut printed), WamlStatus::Ok);
        assert_eq!(take(printed), "box (~p | ~q) & dia q");
        let mut holds = false;
        assert_eq!(waml_check(m, c("w").as_ptr(), f, &mut holds), WamlStatus::Ok);
        assert!(holds);
        assert!(waml_last_error().is_null());
        assert_eq!(
            waml_check(m, c("nosuch").as_ptr(), f, &mut holds),
            WamlStatus::UnknownWorld
        );
        assert!(last_error().contains("nosuch"));
        let mut saved = ptr::null_mut();
        assert_eq!(waml_model_save_json(m, &mut saved), WamlStatus::Ok);
        assert_eq!(take(saved), M2);
        waml_formula_free(f);
        waml_model_free(m);
    }
}

#[test]
fn errors_are_reported_not_raised() {
    unsafe {
        let mut f = ptr::null_mut();
        assert_eq!(waml_formula_parse(c("p &").as_ptr(), &mut f), WamlStatus::Syntax);
        assert!(f.is_null());
        assert!(!last_error().is_empty());
        assert_eq!(waml_formula_parse(ptr::null(), &mut f), WamlStatus::NullArgument);
        let bad = [0xffu8, 0];
        assert_eq!(waml_formula_parse(bad.as_ptr().cast(), &mut f), WamlStatus::InvalidUtf8);
        let mut m = ptr::null_mut();
        let junk = b"{\"arity\": 0}";
        assert_eq!(
            waml_model_load_json(junk.as_ptr(), junk.len(), &mut m),
            WamlStatus::InvalidModel
        );
        assert_eq!(
            waml_formula_parse(c("p").as_ptr(), ptr::null_mut()),
            WamlStatus::NullArgument
        );
        waml_formula_free(ptr::null_mut());
        waml_model_free(ptr::null_mut());
        waml_string_free(ptr::null_mut());
    }
}

#[test]
fn bisimulation_and_separation() {
    unsafe {
        let (m, n) = (model(M2), model(N2));
        let mut linked = false;
        let (w, v) = (c("w"), c("v"));
        assert_eq!(
            waml_bisimilar(m, w.as_ptr(), n, v.as_ptr(), c("p").as_ptr(), &mut linked),
            WamlStatus::Ok
        );
        assert!(linked);
        assert_eq!(
            waml_bisimilar(m, w.as_ptr(), n, v.as_ptr(), c("p,q").as_ptr(), &mut linked),
            WamlStatus::Ok
        );
        assert!(!linked);
        let mut d = ptr::null_mut();
        assert_eq!(
            waml_distinguish(m, w.as_ptr(), n, v.as_ptr(), c("p,q").as_ptr(), &mut d),
            WamlStatus::Ok
        );
        assert!(!d.is_null());
        let mut holds = true;
        assert_eq!(waml_check(n, v.as_ptr(), d, &mut holds), WamlStatus::Ok);
        assert!(!holds);
        waml_formula_free(d);
        assert_eq!(
            waml_distinguish(m, w.as_ptr(), n, v.as_ptr(), c("p").as_ptr(), &mut d),
            WamlStatus::Ok
        );
        assert!(d.is_null());
        waml_model_free(m);
        waml_model_free(n);
    }
}

#[test]
fn translation_proofs_and_counterexamples() {
    unsafe {
        let f = formula("box p");
        let mut out = ptr::null_mut();
        let status = waml_translate_tptp(f, 2, c("name").as_ptr(), c("c").as_ptr(), &mut out);
        assert_eq!(status, WamlStatus::Ok);
        assert_eq!(
            take(out),
            "fof(name, axiom, ! [Y1,Y2] : (r(c,Y1,Y2) => (p_p(Y1) | p_p(Y2))))."
        );
        let status = waml_translate_tptp(f, 2, c("Bad Name").as_ptr(), c("c").as_ptr(), &mut out);
        assert_eq!(status, WamlStatus::InvalidArgument);
        waml_formula_free(f);

        let mut bad_line = usize::MAX;
        assert_eq!(waml_proof_check_json(c(PROOF3).as_ptr(), &mut bad_line), WamlStatus::Ok);
        assert_eq!(bad_line, 0);
        let tampered = PROOF3.replacen("box (p & ~q)", "box (p & q & q)", 1);
        assert_eq!(
            waml_proof_check_json(c(&tampered).as_ptr(), &mut bad_line),
            WamlStatus::Ok
        );
        assert!(bad_line > 0);

        let mut pass = false;
        for n in 2..=4 {
            assert_eq!(waml_interp_verify(n, 0, &mut pass), WamlStatus::Ok);
            assert!(pass, "n={n}");
        }
        assert_eq!(waml_interp_verify(1, 0, &mut pass), WamlStatus::InvalidArgument);
        assert!(!CStr::from_ptr(waml_version()).to_bytes().is_empty());
    }
}

/// Every exported symbol is declared in the shipped header.
#[test]
fn header_declares_every_export() {
    let src = include_str!("../src/lib.rs");
    let header = include_str!("../include/waml.h");
    let exports: Vec<&str> = src
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(exports.len() >= 15, "{exports:?}");
    for name in exports {
        assert!(header.contains(&format!("{name}(")), "{name} missing from header");
    }
    for variant in ["WAML_STATUS_OK = 0", "WAML_STATUS_PANIC = 11"] {
        assert!(header.contains(variant), "{variant}");
    }
    for handle in [
        "typedef struct WamlModel WamlModel;",
        "typedef struct WamlFormula WamlFormula;",
    ] {
        assert!(header.contains(handle), "{handle}");
    }
}
