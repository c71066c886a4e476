//! The coarea / Gauss-Bonnet experiment on a perturbed flat 3-torus:
//! harmonic circle-valued function, level-set Euler characteristics, and the
//! curvature integral. Optionally exports one level set as an OFF mesh.
//!
//! Run with: cargo run --release --example stern_torus [-- /path/to/mesh.off]

use bochner_lab::field::{ScalarFieldSpec, TrigMode};
use bochner_lab::metric::MetricField;
use bochner_lab::stern::{
    level_set_mesh, solve_harmonic_torus, stern_report, write_off, TorusGrid,
};

fn main() {
    let phi = ScalarFieldSpec::TrigPolynomial {
        modes: vec![
            TrigMode {
                freq: vec![1, 1, 0],
                cos_amp: 0.05,
                sin_amp: 0.0,
            },
            TrigMode {
                freq: vec![0, 1, -1],
                cos_amp: 0.0,
                sin_amp: 0.03,
            },
        ],
    };
    let grid = TorusGrid::new(32, MetricField::Conformal { dim: 3, phi }).unwrap();
    let report = stern_report(&grid, 16).unwrap();
    println!("grid 32^3, 16 levels");
    println!("solver residual         : {:.3e}", report.solver_residual);
    println!("lhs (4 pi mean chi)     : {:+.6e}", report.lhs);
    println!("rhs (curvature integral): {:+.6e}", report.rhs);
    println!("margin                  : {:+.6e}", report.margin);
    println!(
        "discretization estimate : {:.3e}",
        report.discretization_estimate
    );
    println!("passed                  : {}", report.passed);
    for topo in report.per_level.iter().take(4) {
        println!(
            "level {:.4}: V {} E {} F {} chi {} components {}",
            topo.level,
            topo.vertices,
            topo.edges,
            topo.faces,
            topo.euler_characteristic,
            topo.components
        );
    }
    println!(
        "... ({} levels total, {} skipped)",
        report.per_level.len(),
        report.skipped_levels
    );

    if let Some(path) = std::env::args().nth(1) {
        let sol = solve_harmonic_torus(&grid).unwrap();
        let (_, mesh) = level_set_mesh(&grid, &sol.correction, 0.77).unwrap();
        write_off(&mesh, std::path::Path::new(&path)).unwrap();
        println!("wrote level-set mesh to {path}");
    }
}
