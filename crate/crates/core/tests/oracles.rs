//! Reference values. Closed forms are recomputed here; the rest are frozen.

use std::f64::consts::{FRAC_PI_4, PI, SQRT_2};

use cutlocus::bumps::{g_sigma, BumpH};
use cutlocus::params::ConstructionParams;
use cutlocus::randers::{ray_length_closed_form, MagneticProfile};
use cutlocus::selfsim::{analytic_dimension, canonical_n, mandala_system, moran_dimension};
use cutlocus::sequences::{alpha0, alpha_seq, l_seq, r_seq, t_seq, total_tree_length};
use cutlocus::smoothing::{smooth_profile, SeamGeometry};
use cutlocus::zeta::{closed_form_bound, zeta_ratio};

fn p(k: u32, n: usize) -> ConstructionParams {
    ConstructionParams::new(k, n, FRAC_PI_4, 0.1).unwrap()
}

fn close(a: f64, b: f64, tol: f64) {
    assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol:e})");
}

#[test]
fn step_and_edge_lengths() {
    let p = p(3, 3);
    close(t_seq(1, &p), 1.0 / 9.0, 1e-16);
    close(l_seq(0, &p), SQRT_2, 1e-15);
    // phi sinc(phi/3) = 3 sin(phi/3)
    close(l_seq(1, &p), 1.0 / (9.0 * (PI / 12.0).sin()), 1e-15);
    close(l_seq(2, &p), 0.14165078081073895, 1e-15);
}

#[test]
fn radii() {
    let p = p(3, 3);
    let r0 = r_seq(0, &p).unwrap();
    let rm1 = r_seq(-1, &p).unwrap();
    close(r0.value, 0.6265057859300718, 1e-12);
    close(rm1.value, 1.6265057859295715, 1e-12);
    close(r_seq(1, &p).unwrap().value, 0.2118334739781413, 1e-12);
    assert!(r0.bound < 1e-11 && rm1.bound < 1e-11);
    close(rm1.value - r0.value, 1.0, r0.bound + rm1.bound);
}

#[test]
fn alpha_fixed_point() {
    // alpha_0 = alpha_0 / 3^{k-2} + 1
    for k in 3..=6 {
        let a = alpha0(&p(k, 3)).unwrap();
        close(a, 1.0 / (1.0 - 3f64.powi(2 - k as i32)), 1e-15);
        close(alpha_seq(2, &p(k, 3)).unwrap(), a * 3f64.powi(-2 * (k as i32 - 1)), 1e-15);
    }
    close(alpha0(&p(3, 3)).unwrap(), 1.5, 1e-15);
}

#[test]
fn tree_lengths() {
    close(total_tree_length(&p(3, 3)).value().unwrap(), 2.055907147523567, 1e-12);
    close(total_tree_length(&p(4, 3)).value().unwrap(), 1.5750177856866734, 1e-12);
}

#[test]
fn dimensions() {
    close(analytic_dimension(2, 3).s, 5f64.ln() / 3f64.ln(), 1e-15);
    close(analytic_dimension(2, 3).s, 1.4649735207179269, 1e-15);
    for (k, n) in [(3, 6), (4, 3), (5, 10)] {
        let s = (2.0 * n as f64 - 1.0).ln() / ((k - 1) as f64 * 3f64.ln());
        close(analytic_dimension(k, n).s, s, 1e-14);
        close(moran_dimension(&mandala_system(&p(k, n)).unwrap(), 1e-14), s, 1e-12);
    }
    close(analytic_dimension(3, 6).s, 1.091329169322069, 1e-14);
    assert_eq!(canonical_n(3).n, 6);
}

#[test]
fn zeta_bound() {
    // (1/2) 3^-3 (pi/4)^-2 0.1^-3
    close(closed_form_bound(&p(3, 3)), 8000.0 / (27.0 * PI * PI), 1e-11);
    let z = zeta_ratio(8, 3, &p(3, 3)).unwrap();
    close(z.leading, 29.760442782586036, 1e-9);
    assert!(z.leading < closed_form_bound(&p(3, 3)));
}

#[test]
fn smoothing_demo_geometry() {
    let s = SeamGeometry::demo(0.1).unwrap();
    close(s.r1, SQRT_2 + 0.1, 1e-15);
    close(s.r2, SQRT_2 / 2.0 + 0.1, 1e-15);
    close(s.psi, FRAC_PI_4, 1e-15);
    close(s.x_c, SQRT_2 / 2.0, 1e-15);
    let pr = smooth_profile(s).unwrap();
    close(pr.x_q, 0.28869453026516234, 1e-10);
    close(pr.x_s, 0.4958531417677441, 1e-10);
    close(pr.y_b, 1.5072110944448591, 1e-10);
    close(pr.eval(0.0), s.d(), 1e-12);
}

#[test]
fn bump_values() {
    close(g_sigma(0.5, 1.0), 0.5, 1e-15);
    let h = BumpH::new(0.5, 0.5).unwrap();
    close(h.eval(0.0), 0.5, 1e-15);
    assert_eq!(h.eval(0.5), 0.0);
    assert_eq!(h.eval(-0.5), 0.0);
    let prof = MagneticProfile::new(h, 0.0, 1.0).unwrap();
    close(ray_length_closed_form(&prof), 1.125, 1e-12);
    close(prof.integral_simpson(), 0.125, 1e-10);
}
