//! A full slicing scene: adapted frame, cascade norms, divergence
//! enforcement, PDE residuals under both displayed forms, and the JSON
//! round trip of the scene document.
//!
//! Run with: cargo run --release --example slicing_cascade

use bochner_lab::metric::MetricKind;
use bochner_lab::slicing::{
    divergence_data, enforce_pointwise_divfree, pde_residuals, pde_residuals_nolog_variant,
    Normalization, SceneGeometry, SlicingScene,
};

fn main() {
    let scene = SlicingScene::random(
        2026,
        4,
        2,
        MetricKind::PerturbedFlat,
        Normalization::UnitTop,
    )
    .unwrap();
    let geom = SceneGeometry::new(&scene).unwrap();
    println!(
        "n = {}, s = {}, comass at p = {:.6}",
        geom.n, geom.s, geom.comass
    );
    println!("adapted frame (rows, coordinate components):");
    for (i, v) in geom.frame.vectors.iter().enumerate() {
        let tag = if i < geom.s { "normal " } else { "tangent" };
        println!("  {tag} {i}: {v:?}");
    }
    println!("cascade norms |Z_m|(p):");
    for (m, z) in geom.znorm.iter().enumerate() {
        println!("  |Z_{m}| = {:.10}", z.value);
    }
    println!("divergences before enforcement:");
    for m in 0..geom.s {
        let (d, dd) = divergence_data(&geom, m).unwrap();
        println!("  div_Sigma Z_{m} = {d:+.6e}, normal derivative {dd:+.6e}");
    }

    let enf = enforce_pointwise_divfree(&scene).unwrap();
    println!(
        "enforcement: coefficients {:?} on coordinate squares {:?}",
        enf.coefficients, enf.directions
    );
    let geom = SceneGeometry::new(&enf.scene).unwrap();
    for m in 0..geom.s {
        let (d, dd) = divergence_data(&geom, m).unwrap();
        println!("  after: div_Sigma Z_{m} = {d:+.3e}, normal derivative {dd:+.6e}");
    }

    // the rewritten PDE system, logarithmic and bare gradient variants
    let with_log = pde_residuals(&geom).unwrap();
    let without = pde_residuals_nolog_variant(&geom).unwrap();
    println!("PDE residuals (log form)   : {with_log:?}");
    println!("PDE residuals (bare form)  : {without:?}");

    // scenes serialize bit-exactly
    let text = enf.scene.to_json().unwrap();
    let back = SlicingScene::from_json(&text).unwrap();
    assert_eq!(enf.scene, back);
    println!("scene JSON round trip: {} bytes, bit-exact", text.len());
}
