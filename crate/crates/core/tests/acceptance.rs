//! The twelve acceptance checks at full tolerance. Each prints one line.

use cutlocus::bumps::BumpH;
use cutlocus::randers::{demo_field, potential_defect, region_one_point, RandersMetric};
use cutlocus::suite::{self, CriterionResult, SuiteConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(r: &CriterionResult) {
    println!("{}", r.line());
    assert!(r.pass, "criterion {} failed: {}", r.id, r.detail);
}

#[test]
fn acceptance() {
    let cfg = SuiteConfig::default();
    assert_eq!(cfg.resolution, 512);
    let results = suite::run_all(&cfg);
    assert_eq!(results.len(), 12);
    let mut failed = Vec::new();
    for r in &results {
        println!("{}", r.line());
        if !r.pass {
            failed.push(r.id);
        }
    }
    println!("{}/12 passed", 12 - failed.len());
    assert!(failed.is_empty(), "failed criteria: {failed:?}");

    // Wall-clock limits. The closed form is timed internally.
    assert!(results[1].seconds < 60.0, "box counting took {:.1} s", results[1].seconds);
    assert!(results[5].seconds < 120.0, "medial axis took {:.1} s", results[5].seconds);
}

#[test]
fn c01_dimension_closed_form() {
    let r = suite::dimension_closed_form();
    report(&r);
    assert!(r.detail.contains("s = 1.464974"));
}

#[test]
fn c11_random_polygonal_paths() {
    let eps = 0.1;
    let metric = RandersMetric::demo(demo_field(BumpH::new(0.5, 0.5).unwrap(), eps).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let verts: Vec<[f64; 2]> = (0..5).map(|_| region_one_point([rng.random(), rng.random()], eps)).collect();
        worst = worst.max(potential_defect(&metric, &verts).unwrap().abs());
    }
    println!("[{}] 11 random paths                 max defect {worst:.2e}", if worst < 1e-8 { "PASS" } else { "FAIL" });
    assert!(worst < 1e-8);
}
