use std::ffi::{CStr, CString};
use std::ptr;

use ccs_playground_ffi::*;

fn parse(text: &str) -> *mut CcsgProcess {
    let c = CString::new(text).unwrap();
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { ccsg_process_parse(c.as_ptr(), &mut p) }, CcsgStatus::Ok);
    p
}

fn take(s: *mut std::ffi::c_char) -> String {
    let out = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_string();
    unsafe { ccsg_string_free(s) };
    out
}

#[test]
fn round_trip_and_translation() {
    let p = parse("[1] a1.0 + a1.tick.0");
    assert_eq!(unsafe { ccsg_process_context(p) }, 1);
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { ccsg_process_to_string(p, &mut s) }, CcsgStatus::Ok);
    assert_eq!(take(s), "[1] a1.0 + a1.tick.0");
    assert_eq!(unsafe { ccsg_translate(p, &mut s) }, CcsgStatus::Ok);
    assert_eq!(take(s), "⟨in1↦⊕[⟨_↦∅⟩, ⟨tick↦⟨_↦∅⟩, _↦∅⟩], _↦∅⟩");
    unsafe { ccsg_process_free(p) };
}

#[test]
fn parse_errors_are_reported() {
    let c = CString::new("[1] a2.0").unwrap();
    let mut p = ptr::dangling_mut::<CcsgProcess>();
    assert_eq!(unsafe { ccsg_process_parse(c.as_ptr(), &mut p) }, CcsgStatus::Parse);
    assert!(p.is_null());
    let msg = unsafe { CStr::from_ptr(ccsg_last_error()) }.to_str().unwrap();
    assert!(msg.contains("channel 2"), "{msg}");
    assert_eq!(unsafe { ccsg_process_parse(ptr::null(), &mut p) }, CcsgStatus::NullPointer);
    let bytes = [0xffu8, 0];
    assert_eq!(unsafe { ccsg_process_parse(bytes.as_ptr().cast(), &mut p) }, CcsgStatus::InvalidUtf8);
    let q = parse("[0] 0");
    assert!(ccsg_last_error().is_null());
    unsafe { ccsg_process_free(q) };
}

#[test]
fn checks() {
    let (p, q, r) = (parse("[1] a1.0"), parse("[1] 0"), parse("[1] new a. (a2.0 | 'a2.0)"));
    let mut v = CcsgVerdict::Inconclusive;
    assert_eq!(unsafe { ccsg_bot_s(q, 100, &mut v) }, CcsgStatus::Ok);
    assert_eq!(v, CcsgVerdict::Fail);
    assert_eq!(unsafe { ccsg_weak_bisim(r, q, 6, 1000, &mut v) }, CcsgStatus::Ok);
    assert_eq!(v, CcsgVerdict::Pass);
    assert_eq!(unsafe { ccsg_weak_bisim(p, q, 6, 1000, &mut v) }, CcsgStatus::Ok);
    assert_eq!(v, CcsgVerdict::Fail);
    let mut report = ptr::null_mut();
    assert_eq!(unsafe { ccsg_fair_equiv_standard(p, q, 2, 2, 10_000, &mut v, &mut report) }, CcsgStatus::Ok);
    assert_eq!(v, CcsgVerdict::Fail);
    let json: serde_json::Value = serde_json::from_str(&take(report)).unwrap();
    assert_eq!(json["witness"]["test"], "'a1.tick.0");
    assert_eq!(unsafe { ccsg_fair_equiv_standard(r, q, 1, 2, 10_000, &mut v, ptr::null_mut()) }, CcsgStatus::Ok);
    assert_eq!(v, CcsgVerdict::Pass);
    for h in [p, q, r] {
        unsafe { ccsg_process_free(h) };
    }
}

#[test]
fn misuse() {
    let (p, z) = (parse("[1] 0"), parse("[0] 0"));
    let mut v = CcsgVerdict::Pass;
    assert_eq!(unsafe { ccsg_weak_bisim(p, z, 6, 100, &mut v) }, CcsgStatus::ContextMismatch);
    assert_eq!(unsafe { ccsg_bot_s(ptr::null(), 100, &mut v) }, CcsgStatus::NullPointer);
    assert_eq!(unsafe { ccsg_bot_s(p, 100, ptr::null_mut()) }, CcsgStatus::NullPointer);
    assert_eq!(unsafe { ccsg_process_context(ptr::null()) }, 0);
    unsafe {
        ccsg_process_free(ptr::null_mut());
        ccsg_string_free(ptr::null_mut());
        ccsg_process_free(p);
        ccsg_process_free(z);
    }
}

#[test]
fn header_declares_every_function() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/ccs_playground.h")).unwrap();
    for f in [
        "ccsg_process_parse",
        "ccsg_process_free",
        "ccsg_process_context",
        "ccsg_process_to_string",
        "ccsg_translate",
        "ccsg_bot_s",
        "ccsg_weak_bisim",
        "ccsg_fair_equiv_standard",
        "ccsg_last_error",
        "ccsg_string_free",
    ] {
        assert!(header.contains(&format!("{f}(")), "{f}");
    }
    assert!(header.contains("typedef struct CcsgProcess CcsgProcess;"));
    assert!(header.contains("CCSG_STATUS_CONTEXT_MISMATCH = 4"));
}
