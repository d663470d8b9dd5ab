use std::ffi::CStr;
use std::ptr;

use weightlab_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(wl_last_error_message()) }.to_string_lossy().into_owned()
}

fn line(n: usize) -> *mut WlSpace {
    let dist: Vec<f64> = (0..n * n).map(|k| ((k / n) as f64 - (k % n) as f64).abs()).collect();
    let mu = vec![1.0; n];
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { wl_space_new(n, dist.as_ptr(), mu.as_ptr(), &mut s) }, WlStatus::Ok);
    s
}

fn weight(values: &[f64]) -> *mut WlWeight {
    let mut w = ptr::null_mut();
    assert_eq!(unsafe { wl_weight_new(values.as_ptr(), values.len(), &mut w) }, WlStatus::Ok);
    w
}

#[test]
fn space_round_trip() {
    let s = line(4);
    let (mut n, mut kappa, mut c, mut d) = (0usize, 0.0, 0.0, 0.0);
    unsafe {
        assert_eq!(wl_space_structure(s, &mut n, &mut kappa, &mut c, &mut d), WlStatus::Ok);
        assert_eq!((n, kappa, c), (4, 1.0, 3.0));
        assert_eq!(d, 3f64.log2());

        let w = weight(&[1.0, 1.0, 1.0, 1.0]);
        let mut v = 0.0;
        assert_eq!(wl_space_ap_constant(s, w, 2.0, &mut v), WlStatus::Ok);
        assert_eq!(v, 1.0);
        assert_eq!(wl_space_fujii_wilson(s, w, &mut v), WlStatus::Ok);
        assert_eq!(v, 1.0);
        assert_eq!(wl_space_exp_constant(s, w, &mut v), WlStatus::Ok);
        assert_eq!(v, 1.0);

        let f = [0.0, 1.0, 0.0, 0.0];
        let mut m = [0.0; 4];
        assert_eq!(wl_space_hl_maximal(s, f.as_ptr(), 4, m.as_mut_ptr()), WlStatus::Ok);
        assert_eq!(m, [0.5, 1.0, 1.0 / 3.0, 1.0 / 3.0]);
        assert!(last_error().is_empty());

        wl_weight_free(w);
        wl_space_free(s);
    }
}

#[test]
fn grid_round_trip() {
    let mut g = ptr::null_mut();
    unsafe {
        assert_eq!(wl_grid_new(1, 3, ptr::null(), &mut g), WlStatus::Ok);
        assert_eq!(wl_grid_cells(g), 8);
        let values = [1.0, 2.0, 4.0, 8.0, 8.0, 4.0, 2.0, 1.0];
        let w = weight(&values);
        let mut v = 0.0;
        for fam in [WL_FAMILY_DYADIC, WL_FAMILY_ALL_CUBES] {
            assert_eq!(wl_grid_fujii_wilson(g, w, fam, &mut v), WlStatus::Ok);
            assert!(v >= 1.0);
            assert_eq!(wl_grid_ap_constant(g, w, 2.0, fam, &mut v), WlStatus::Ok);
            assert!(v >= 1.0);
            assert_eq!(wl_grid_exp_constant(g, w, fam, &mut v), WlStatus::Ok);
            assert!(v >= 1.0);
        }
        let mut m = [0.0; 8];
        assert_eq!(wl_grid_dyadic_maximal(g, values.as_ptr(), 8, m.as_mut_ptr()), WlStatus::Ok);
        assert_eq!(m[3], 8.0);
        assert_eq!(m[0], 3.75);
        wl_weight_free(w);
        wl_grid_free(g);
    }
}

#[test]
fn errors_map_to_status_codes() {
    unsafe {
        let mut out = ptr::null_mut();
        let bad = [1.0, 0.0];
        assert_eq!(wl_weight_new(bad.as_ptr(), 2, &mut out), WlStatus::InvalidArgument);
        assert!(out.is_null());
        assert!(last_error().contains("index 1"), "{}", last_error());

        let asym = [0.0, 1.0, 2.0, 0.0];
        let mu = [1.0, 1.0];
        let mut s = ptr::null_mut();
        assert_eq!(wl_space_new(2, asym.as_ptr(), mu.as_ptr(), &mut s), WlStatus::StructuralViolation);

        assert_eq!(wl_space_new(2, ptr::null(), mu.as_ptr(), &mut s), WlStatus::NullPointer);
        assert!(last_error().contains("dist"));

        let space = line(3);
        let w = weight(&[1.0, 2.0]);
        let mut v = 0.0;
        assert_eq!(wl_space_ap_constant(space, w, 2.0, &mut v), WlStatus::InvalidArgument);
        assert_eq!(wl_space_ap_constant(space, ptr::null(), 2.0, &mut v), WlStatus::NullPointer);

        let mut g = ptr::null_mut();
        assert_eq!(wl_grid_new(1, 2, ptr::null(), &mut g), WlStatus::Ok);
        let gw = weight(&[1.0; 4]);
        assert_eq!(wl_grid_fujii_wilson(g, gw, 7, &mut v), WlStatus::InvalidArgument);

        let (mut tau, mut r) = (0.0, 0.0);
        assert_eq!(wl_r_exponent(0.5, 1.0, 1.0, &mut tau, &mut r), WlStatus::InvalidArgument);
        assert_eq!(wl_r_exponent(2.0, 1.0, 1.0, &mut tau, &mut r), WlStatus::Ok);
        assert_eq!(r, 1.0 + 1.0 / (2.0 * tau));

        wl_weight_free(gw);
        wl_grid_free(g);
        wl_weight_free(w);
        wl_space_free(space);
        wl_space_free(ptr::null_mut());
    }
}

#[test]
fn version_is_the_crate_version() {
    let v = unsafe { CStr::from_ptr(wl_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
