use std::ffi::{CStr, CString};
use std::ptr;

use bqt_ffi::*;

fn last_error() -> String {
    let p = bqt_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn analytic_entry_points() {
    let mut v = 0.0;
    unsafe {
        assert_eq!(bqt_no_resource_error(2, &mut v), BqtStatus::Ok);
        assert_eq!(v, 0.75);
        let mut branch = BqtBranch::NoEntanglement;
        let mut tight = -1;
        assert_eq!(
            bqt_isotropic_error(2, 0.5, 9, &mut v, &mut branch, &mut tight),
            BqtStatus::Ok
        );
        assert!((v - 27.0 / 64.0).abs() < 1e-15);
        assert_eq!((branch, tight), (BqtBranch::HighDimension, 0));
        assert_eq!(
            bqt_isotropic_error(2, 1.0, 4, &mut v, ptr::null_mut(), ptr::null_mut()),
            BqtStatus::Ok
        );
        assert_eq!(v, 0.0);
        assert_eq!(bqt_gadc_error(0.0, 0.4, &mut v), BqtStatus::Ok);
        assert_eq!(v, 0.0);
    }
}

#[test]
fn errors_are_reported() {
    let mut v = 0.0;
    unsafe {
        assert_eq!(bqt_gadc_error(1.5, 0.0, &mut v), BqtStatus::InvalidParameter);
        assert!(last_error().contains("gamma"));
        assert_eq!(bqt_no_resource_error(2, ptr::null_mut()), BqtStatus::NullPointer);
        let mut s = ptr::null_mut();
        let bad = CString::new("{\"dimA\":1}").unwrap();
        assert_eq!(bqt_state_from_json(bad.as_ptr(), &mut s), BqtStatus::Json);
        assert!(s.is_null());
        assert_eq!(bqt_state_isotropic(0.5, 1, &mut s), BqtStatus::InvalidParameter);
        bqt_state_free(ptr::null_mut());
        bqt_solution_free(ptr::null_mut());
    }
}

#[test]
fn solve_and_read_witness() {
    unsafe {
        let mut s = ptr::null_mut();
        assert_eq!(bqt_state_maximally_mixed(2, &mut s), BqtStatus::Ok);
        let (mut da, mut db) = (0, 0);
        assert_eq!(bqt_state_dims(s, &mut da, &mut db), BqtStatus::Ok);
        assert_eq!((da, db), (2, 2));

        let mut sol = ptr::null_mut();
        assert_eq!(bqt_ppt_simulation_error(s, 2, &mut sol), BqtStatus::Ok);
        let mut v = 0.0;
        assert_eq!(bqt_solution_raw_value(sol, &mut v), BqtStatus::Ok);
        assert!((v - 0.75).abs() < 1e-6);
        let mut st = BqtSolveStatus::NumericalFailure;
        assert_eq!(bqt_solution_status(sol, &mut st), BqtStatus::Ok);
        assert_eq!(st, BqtSolveStatus::Optimal);

        let mut n = 0;
        let k = BqtPovmElement::K;
        assert_eq!(
            bqt_solution_witness(sol, k, ptr::null_mut(), ptr::null_mut(), 0, &mut n),
            BqtStatus::Ok
        );
        assert_eq!(n, 4);
        let mut trace = 0.0;
        for which in [BqtPovmElement::K, BqtPovmElement::L, BqtPovmElement::N] {
            let (mut re, mut im) = (vec![0.0; 16], vec![0.0; 16]);
            let st = bqt_solution_witness(sol, which, re.as_mut_ptr(), im.as_mut_ptr(), 16, &mut n);
            assert_eq!(st, BqtStatus::Ok);
            trace += (0..4).map(|i| re[i * 4 + i]).sum::<f64>();
        }
        // K + L + N = I on a 4-dimensional space
        assert!((trace - 4.0).abs() < 1e-7);
        let mut short = vec![0.0; 3];
        let st = bqt_solution_witness(sol, k, short.as_mut_ptr(), short.as_mut_ptr(), 3, &mut n);
        assert_eq!(st, BqtStatus::DimensionMismatch);

        bqt_solution_free(sol);
        bqt_state_free(s);
    }
}

#[test]
fn json_state_round_trip() {
    let text = r#"{"dimA":1,"dimB":2,"rows":2,"cols":2,"re":[[0.5,0],[0,0.5]],"im":[[0,0],[0,0]]}"#;
    let c = CString::new(text).unwrap();
    unsafe {
        let mut s = ptr::null_mut();
        assert_eq!(bqt_state_from_json(c.as_ptr(), &mut s), BqtStatus::Ok);
        let (mut da, mut db) = (0, 0);
        bqt_state_dims(s, &mut da, &mut db);
        assert_eq!((da, db), (1, 2));
        bqt_state_free(s);
    }
}

#[test]
fn version_is_a_c_string() {
    let v = unsafe { CStr::from_ptr(bqt_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
