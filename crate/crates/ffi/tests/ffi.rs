use std::ffi::CStr;
use std::ptr;

use cutlocus_ffi::*;

fn last_error() -> String {
    let p = cutlocus_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn params_and_sequences() {
    unsafe {
        let mut p = ptr::null_mut();
        assert_eq!(cutlocus_params_new(3, 3, std::f64::consts::FRAC_PI_4, 0.1, &mut p), CutlocusStatus::Ok);
        assert_eq!(cutlocus_params_n(p), 3);
        let (mut v, mut b) = (0.0, 0.0);
        assert_eq!(cutlocus_r_seq(p, -1, &mut v, &mut b), CutlocusStatus::Ok);
        assert!((v - 1.6265057859303223).abs() < 1e-12 && b < 1e-12);
        assert_eq!(cutlocus_r_seq(p, 0, &mut v, ptr::null_mut()), CutlocusStatus::Ok);
        assert!((v - 0.6265057859303223).abs() < 1e-12);
        let mut a = 0.0;
        assert_eq!(cutlocus_alpha(p, 0, &mut a), CutlocusStatus::Ok);
        assert!((a - 1.5).abs() < 1e-15);
        cutlocus_params_free(p);

        let mut c = ptr::null_mut();
        assert_eq!(cutlocus_params_canonical(3, 0.5, 0.1, &mut c), CutlocusStatus::Ok);
        assert_eq!(cutlocus_params_n(c), 6);
        cutlocus_params_free(c);
    }
}

#[test]
fn error_codes() {
    unsafe {
        let mut p = ptr::null_mut();
        assert_eq!(cutlocus_params_new(3, 1, 0.5, 0.1, &mut p), CutlocusStatus::InvalidParams);
        assert!(p.is_null());
        assert!(last_error().contains("n = 1"));
        assert_eq!(cutlocus_params_new(2, 3, 0.5, 0.1, &mut p), CutlocusStatus::Ok);
        let mut v = 0.0;
        assert_eq!(cutlocus_r_seq(p, 0, &mut v, ptr::null_mut()), CutlocusStatus::DivergentSeries);
        assert_eq!(cutlocus_alpha(p, 0, &mut v), CutlocusStatus::DegenerateAlpha);
        assert_eq!(cutlocus_r_seq(ptr::null(), 0, &mut v, ptr::null_mut()), CutlocusStatus::InvalidArgument);
        assert_eq!(cutlocus_r_seq(p, 0, ptr::null_mut(), ptr::null_mut()), CutlocusStatus::DivergentSeries);
        cutlocus_params_free(p);
        cutlocus_params_free(ptr::null_mut());
        assert_eq!(cutlocus_params_n(ptr::null()), 0);
    }
}

#[test]
fn dimension() {
    assert!((cutlocus_analytic_dimension(2, 3) - 5f64.ln() / 3f64.ln()).abs() < 1e-15);
    assert!(cutlocus_analytic_dimension(1, 3).is_nan());
}

#[test]
fn tree_handle() {
    unsafe {
        let mut p = ptr::null_mut();
        cutlocus_params_new(3, 3, std::f64::consts::FRAC_PI_4, 0.1, &mut p);
        let mut t = ptr::null_mut();
        assert_eq!(cutlocus_tree_build(p, 2, &mut t), CutlocusStatus::Ok);
        assert_eq!(cutlocus_tree_node_count(t), 1 + 1 + 5 + 25);
        assert!(cutlocus_tree_sphere_residual(t) < 1e-9);
        let mut buf = [0.0; 3];
        assert_eq!(cutlocus_tree_node_position(t, 0, buf.as_mut_ptr(), 3), CutlocusStatus::Ok);
        assert!((buf[0] - std::f64::consts::SQRT_2).abs() < 1e-15 && buf[1] == 0.0 && buf[2] == 0.0);
        assert_eq!(cutlocus_tree_node_position(t, 0, buf.as_mut_ptr(), 2), CutlocusStatus::InvalidArgument);
        assert_eq!(cutlocus_tree_node_position(t, 999, buf.as_mut_ptr(), 3), CutlocusStatus::InvalidArgument);
        cutlocus_tree_free(t);
        cutlocus_params_free(p);
    }
}

#[test]
fn hull_handle() {
    unsafe {
        let mut h = ptr::null_mut();
        assert_eq!(cutlocus_hull_demo(2, &mut h), CutlocusStatus::Ok);
        assert_eq!(cutlocus_hull_patch_count(h), 3);
        assert!(cutlocus_hull_max_tangency_residual(h) < 1e-12);
        let mut d = 0.0;
        assert_eq!(cutlocus_hull_signed_distance(h, [0.0, 0.0].as_ptr(), 2, &mut d), CutlocusStatus::Ok);
        assert!((d + std::f64::consts::SQRT_2).abs() < 1e-12);
        assert_eq!(cutlocus_hull_signed_distance(h, [0.0].as_ptr(), 1, &mut d), CutlocusStatus::InvalidArgument);
        let (mut pass, mut cells) = (false, 0.0);
        assert_eq!(cutlocus_hull_verify_cut_locus(h, 96, &mut pass, &mut cells), CutlocusStatus::Ok);
        assert!(pass && cells < 2.0);
        cutlocus_hull_free(h);

        let mut p = ptr::null_mut();
        cutlocus_params_new(3, 3, std::f64::consts::FRAC_PI_4, 0.1, &mut p);
        assert_eq!(cutlocus_hull_assemble(p, 1, &mut h), CutlocusStatus::Geometry);
        assert!(last_error().contains("overlapping"));
        assert_eq!(cutlocus_hull_assemble(p, 0, &mut h), CutlocusStatus::Ok);
        cutlocus_hull_free(h);
        cutlocus_params_free(p);
        assert_eq!(cutlocus_hull_demo(1, &mut h), CutlocusStatus::InvalidParams);
    }
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/cutlocus.h")).unwrap();
    for name in [
        "cutlocus_last_error_message",
        "cutlocus_params_new",
        "cutlocus_params_free",
        "cutlocus_r_seq",
        "cutlocus_tree_build",
        "cutlocus_tree_node_position",
        "cutlocus_hull_demo",
        "cutlocus_hull_signed_distance",
        "cutlocus_hull_verify_cut_locus",
        "cutlocus_verify_all",
        "typedef struct CutlocusHull CutlocusHull",
        "CUTLOCUS_STATUS_DIVERGENT_SERIES = 3",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
}
