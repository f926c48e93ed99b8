//! Drives the C ABI end to end from Rust, exactly as a C caller would.

use qcsurgery_ffi::*;
use std::ffi::CString;

#[test]
fn map_lifecycle_and_census() {
    unsafe {
        // z^2 + 4
        let re = [4.0, 0.0, 1.0];
        let im = [0.0, 0.0, 0.0];
        let mut map: *mut QcsMap = std::ptr::null_mut();
        assert_eq!(qcs_map_new_poly(re.as_ptr(), im.as_ptr(), 3, &mut map), QCS_OK);
        assert_eq!(qcs_map_degree(map), 2);

        let (mut vre, mut vim) = (0.0, 0.0);
        assert_eq!(qcs_map_eval(map, 2.0, 0.0, &mut vre, &mut vim), QCS_OK);
        assert!((vre - 8.0).abs() < 1e-12 && vim.abs() < 1e-12);

        let mut count = u32::MAX;
        assert_eq!(qcs_map_escape_census(map, 1000, 1e4, &mut count), QCS_OK);
        assert_eq!(count, 1);

        let mut pts = [0.0f64; 16];
        let mut len = 0usize;
        let mut escaped = 0i32;
        assert_eq!(
            qcs_map_orbit(map, 0.0, 0.0, 10, 100.0, pts.as_mut_ptr(), 8, &mut len, &mut escaped),
            QCS_OK
        );
        assert_eq!(escaped, 1);
        assert_eq!(len, 4);
        assert!((pts[6] - 404.0).abs() < 1e-9);

        let mut g = 0.0;
        assert_eq!(qcs_map_green(map, 100.0, 0.0, 64, &mut g), QCS_OK);
        assert!((g - 100.0f64.ln()).abs() < 1e-2);

        qcs_map_free(map);
    }
}

#[test]
fn error_paths_set_messages() {
    unsafe {
        // zero polynomial is rejected with a readable message
        let re = [0.0];
        let im = [0.0];
        let mut map: *mut QcsMap = std::ptr::null_mut();
        let code = qcs_map_new_poly(re.as_ptr(), im.as_ptr(), 1, &mut map);
        assert_ne!(code, QCS_OK);
        let mut buf = [0i8; 256];
        let n = qcs_last_error(buf.as_mut_ptr(), buf.len());
        assert!(n > 0);
        let msg = std::ffi::CStr::from_ptr(buf.as_ptr()).to_string_lossy();
        assert!(msg.contains("leading"), "message: {msg}");

        // degree floor
        let re = [1.0, 1.0];
        let im = [0.0, 0.0];
        let code = qcs_map_new_poly(re.as_ptr(), im.as_ptr(), 2, &mut map);
        assert_ne!(code, QCS_OK);

        assert_eq!(qcs_map_eval(std::ptr::null(), 0.0, 0.0, std::ptr::null_mut(), std::ptr::null_mut()), QCS_NULL_ARGUMENT);

        let mut m = 0.0;
        assert_ne!(qcs_round_modulus(1.0, 0.5, &mut m), QCS_OK);
    }
}

#[test]
fn blend_handle_and_modulus() {
    unsafe {
        let mut m = 0.0;
        assert_eq!(qcs_round_modulus(0.5, 1.0, &mut m), QCS_OK);
        assert!((m - 0.5f64.ln().abs() / (2.0 * std::f64::consts::PI)).abs() < 1e-12);

        let mut blend: *mut QcsBlend = std::ptr::null_mut();
        assert_eq!(qcs_blend_new(0.5, 128, &mut blend), QCS_OK);
        let mut sup = 0.0;
        assert_eq!(qcs_blend_sup_norm(blend, &mut sup), QCS_OK);
        assert!(sup > 0.0 && sup < 1.0);
        let (mut re, mut im) = (0.0, 0.0);
        assert_eq!(qcs_blend_eval(blend, 0.0, 0.0, &mut re, &mut im), QCS_OK);
        assert!((re - 0.625).abs() < 1e-12 && im.abs() < 1e-12);
        qcs_blend_free(blend);

        // too-thin ring propagates its error code
        let code = qcs_blend_new(0.99, 128, &mut blend);
        assert_ne!(code, QCS_OK);
    }
}

#[test]
fn version_and_experiment_not_applicable() {
    unsafe {
        let v = std::ffi::CStr::from_ptr(qcs_version());
        assert!(!v.to_bytes().is_empty());

        // a map with empty postcritical proxy reports not-applicable (2)
        let config = CString::new("map = z2p4\ndepths = 1\nresolution = 256\n").unwrap();
        let mut outcome = -1i32;
        let mut s_before = u32::MAX;
        let code = qcs_experiment_run(config.as_ptr(), std::ptr::null(), &mut outcome, &mut s_before);
        assert_eq!(code, QCS_OK);
        assert_eq!(outcome, 2);
        assert_eq!(s_before, 1);
    }
}
