use std::f64::consts::{FRAC_PI_4, TAU};

use cutlocus::boxcount::box_counts;
use cutlocus::bumps::{g_sigma, BumpH};
use cutlocus::geometry::dist;
use cutlocus::hull::assemble_demo;
use cutlocus::params::ConstructionParams;
use cutlocus::randers::{
    classify_region, demo_field, potential_defect, randers_norm, region_memberships, region_one_point, MagneticProfile,
    RandersMetric,
};
use cutlocus::selfsim::mandala_sample;
use cutlocus::sequences::{alpha_seq, l_seq, t_seq};
use cutlocus::smoothing::{verify_profile, SeamGeometry, SmoothedProfile};
use cutlocus::tree::{build_tree, node_position, Address};
use cutlocus::zeta::zeta_ratio;
use proptest::prelude::*;

fn address(n: usize, max_len: usize) -> impl Strategy<Value = Address> {
    let m = n as i32 - 1;
    prop::collection::vec(-m..=m, 1..=max_len).prop_map(Address)
}

fn params() -> impl Strategy<Value = ConstructionParams> {
    (3u32..=6, 2usize..=6, 0.2f64..1.3).prop_map(|(k, n, phi)| ConstructionParams::new(k, n, phi, 0.1).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn child_sits_on_parent_sphere(p in params(), seed in any::<u64>(), len in 1usize..=8) {
        let m = p.n as i32 - 1;
        let letters: Vec<i32> = (0..len).map(|i| ((seed >> (3 * i)) % (2 * m as u64 + 1)) as i32 - m).collect();
        let addr = Address(letters);
        let child = node_position(&addr, &p).unwrap();
        let parent = node_position(&addr.parent().unwrap(), &p).unwrap();
        let l = l_seq(addr.depth() as u32, &p);
        prop_assert!((dist(&child, &parent) - l).abs() <= 1e-12 * l.max(1.0));
    }

    #[test]
    fn letters_outside_alphabet_are_rejected(a in address(3, 4)) {
        let p = ConstructionParams::new(3, 3, FRAC_PI_4, 0.1).unwrap();
        prop_assert!(node_position(&a, &p).is_ok());
        let mut bad = a.0.clone();
        bad.push(3);
        prop_assert!(node_position(&Address(bad), &p).is_err());
    }

    #[test]
    fn alpha_recursion_holds(k in 3u32..=8, i in 0u32..40) {
        let p = ConstructionParams::new(k, 3, FRAC_PI_4, 0.1).unwrap();
        let a = alpha_seq(i, &p).unwrap();
        let rhs = 3.0 * alpha_seq(i + 1, &p).unwrap() + t_seq(i, &p);
        prop_assert!((a - rhs).abs() <= 1e-12 * a);
    }

    #[test]
    fn step_is_monotone_and_symmetric(t in -0.5f64..1.5, u in -0.5f64..1.5, sigma in 0.05f64..3.0) {
        let (a, b) = (g_sigma(t * sigma, sigma), g_sigma(u * sigma, sigma));
        prop_assert!((0.0..=1.0).contains(&a));
        if t <= u {
            prop_assert!(a <= b);
        }
        prop_assert!((a + g_sigma(sigma - t * sigma, sigma) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bump_is_even_and_supported(c in 0.01f64..0.99, delta in 0.01f64..0.99, t in -1.5f64..1.5) {
        let h = BumpH::new(c, delta).unwrap();
        prop_assert_eq!(h.eval(t), h.eval(-t));
        prop_assert!(h.eval(t) >= 0.0 && h.eval(t) <= c);
        if t.abs() >= delta {
            prop_assert_eq!(h.eval(t), 0.0);
        }
    }

    #[test]
    fn randers_norm_is_homogeneous_and_positive(
        r in 0.0f64..0.99, th in 0.0f64..TAU, y0 in -3.0f64..3.0, y1 in -3.0f64..3.0, lam in 0.01f64..100.0,
    ) {
        prop_assume!(y0.hypot(y1) > 1e-3);
        let prof = MagneticProfile::new(BumpH::new(0.9, 0.5).unwrap(), 0.0, 1.0).unwrap();
        let m = RandersMetric::ball(prof);
        let x = [r * th.cos(), r * th.sin()];
        let y = [y0, y1];
        let f = randers_norm(&m, x, y).unwrap();
        prop_assert!(f > 0.0);
        let g = randers_norm(&m, x, [lam * y0, lam * y1]).unwrap();
        prop_assert!((g - lam * f).abs() <= 1e-12 * g.abs().max(1.0));
        // F(y) - F(-y) = 2 beta(y), and |beta| <= |b| alpha
        let back = randers_norm(&m, x, [-y0, -y1]).unwrap();
        prop_assert!((f - back).abs() <= 2.0 * m.beta_norm(x).unwrap() * m.alpha(x, y) + 1e-12);
    }

    #[test]
    fn classification_agrees_with_memberships(x in -1.7f64..2.0, y in -1.7f64..1.7) {
        let eps = 0.1;
        let member = region_memberships([x, y], eps);
        match classify_region([x, y], eps) {
            Ok(c) => prop_assert!(member.contains(&c.region), "{:?} not in {:?}", c.region, member),
            Err(_) => prop_assert!(member.is_empty(), "({x}, {y}) in {:?}", member),
        }
    }

    #[test]
    fn hull_distance_is_lipschitz(a in prop::array::uniform2(-2.0f64..3.0), b in prop::array::uniform2(-2.0f64..3.0)) {
        let s = assemble_demo(2);
        let d = (s.signed_distance(&a) - s.signed_distance(&b)).abs();
        prop_assert!(d <= dist(&a, &b) + 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn closed_paths_have_zero_defect(uv in prop::collection::vec(prop::array::uniform2(0.0f64..1.0), 2..8)) {
        let eps = 0.1;
        let metric = RandersMetric::demo(demo_field(BumpH::new(0.5, 0.5).unwrap(), eps).unwrap());
        let verts: Vec<[f64; 2]> = uv.iter().map(|&q| region_one_point(q, eps)).collect();
        prop_assert!(potential_defect(&metric, &verts).unwrap().abs() < 1e-8);
    }

    #[test]
    fn smoothing_checks_hold_for_any_gap(eps in 0.02f64..0.3, fraction in 0.2f64..0.8) {
        let prof = SmoothedProfile::build(SeamGeometry::demo(eps).unwrap(), fraction).unwrap();
        let rep = verify_profile(&prof);
        prop_assert!(rep.pass, "{:?}", rep);
    }

    #[test]
    fn zeta_levels_scale(m in 7u32..14, r in 1u32..=4) {
        let p = ConstructionParams::new(3, 3, FRAC_PI_4, 0.1).unwrap();
        let a = zeta_ratio(m, r, &p).unwrap().leading;
        let b = zeta_ratio(m + 1, r, &p).unwrap().leading;
        let expect = 3f64.powi(r as i32 - 3);
        prop_assert!((b / a / expect - 1.0).abs() < 0.05);
    }
}

#[test]
fn step_is_flat_at_both_ends() {
    // g_1(t) / t^j -> 0 for every order j: no polynomial part at the gluing points.
    for j in 1..=6 {
        let t: f64 = 0.02;
        assert!(g_sigma(t, 1.0) / t.powi(j) < 1e-10, "order {j}");
        assert!((1.0 - g_sigma(1.0 - t, 1.0)) / t.powi(j) < 1e-10, "order {j}");
    }
}

#[test]
fn box_counts_decrease_with_scale() {
    let p = ConstructionParams::new(3, 6, FRAC_PI_4, 0.1).unwrap();
    let pts = mandala_sample(3, &p).unwrap();
    let counts = box_counts(&pts, &[1.0, 1.0 / 3.0, 1.0 / 9.0, 1.0 / 27.0, 1.0 / 81.0]);
    assert!(counts.windows(2).all(|w| w[0] <= w[1]), "{counts:?}");
    assert!(*counts.last().unwrap() <= pts.len());
}

#[test]
fn parallel_results_do_not_depend_on_thread_count() {
    let p = ConstructionParams::new(3, 3, FRAC_PI_4, 0.1).unwrap();
    let run = |threads| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| (build_tree(5, &p).unwrap().to_csv(), mandala_sample(5, &p).unwrap()))
    };
    assert_eq!(run(1), run(4));
}
