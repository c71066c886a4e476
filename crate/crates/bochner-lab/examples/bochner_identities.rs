//! Runs the whole identity and inequality battery on one divergence-enforced
//! random curved scene and prints each report line.
//!
//! Run with: cargo run --release --example bochner_identities

use bochner_lab::identity::evaluate_all;
use bochner_lab::metric::MetricKind;
use bochner_lab::slicing::{enforce_pointwise_divfree, Normalization, SceneGeometry, SlicingScene};

fn main() {
    let scene =
        SlicingScene::random(99, 4, 3, MetricKind::Conformal, Normalization::UnitTop).unwrap();
    let enforced = enforce_pointwise_divfree(&scene).unwrap();
    let geom = SceneGeometry::new(&enforced.scene).unwrap();
    let reports = evaluate_all(&geom).unwrap();
    println!(
        "{:<28} {:>5} {:>16} {:>16} {:>11} {:>6}",
        "identity", "level", "lhs", "rhs", "relative", "pass"
    );
    for r in &reports {
        println!(
            "{:<28} {:>5} {:>16.8e} {:>16.8e} {:>11.3e} {:>6}",
            format!("{:?}", r.name),
            r.level.map(|l| l.to_string()).unwrap_or_else(|| "-".into()),
            r.lhs,
            r.rhs,
            r.relative,
            if r.passed { "ok" } else { "FAIL" }
        );
        if !r.variant.is_empty() {
            println!("    note: {}", r.variant);
        }
    }
    let failed = reports.iter().filter(|r| !r.passed).count();
    println!("\n{} checks, {} failed", reports.len(), failed);
}
