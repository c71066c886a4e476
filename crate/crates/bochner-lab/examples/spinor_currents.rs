//! Dirac currents of a harmonic spinor: the orthogonal equal-length triple,
//! the divergence-free quadruple, and the Lichnerowicz-type slack.
//!
//! Run with: cargo run --release --example spinor_currents

use bochner_lab::rng::Rng;
use bochner_lab::spinor::{
    currents, dirac_apply, divfree_quadruple, harmonic_linear_spinor, spinor_property_suite,
};

fn main() {
    let psi = harmonic_linear_spinor(4);
    let p = [0.3, -0.8, 1.2];
    let d = dirac_apply(&psi, &p).unwrap();
    println!(
        "|D psi| at {p:?}: {:.3e} (harmonic by construction)",
        d.iter().map(|x| x * x).sum::<f64>().sqrt()
    );
    println!(
        "divergence quadruple: {:?}",
        divfree_quadruple(&psi, &p).unwrap()
    );

    let cur = currents(&psi, &p).unwrap();
    let x = cur.x_values();
    let a = cur.a_values();
    let b = cur.b_values();
    let len = |v: &[f64; 3]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let ip = |u: &[f64; 3], v: &[f64; 3]| u.iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
    println!("X = {x:?}");
    println!("A = {a:?}");
    println!("B = {b:?}");
    println!(
        "|X| = {:.10}, |A| = {:.10}, |B| = {:.10}",
        len(&x),
        len(&a),
        len(&b)
    );
    println!(
        "<X,A> = {:+.3e}, <X,B> = {:+.3e}, <A,B> = {:+.3e}",
        ip(&x, &a),
        ip(&x, &b),
        ip(&a, &b)
    );

    let mut rng = Rng::new(8);
    let pts: Vec<[f64; 3]> = (0..2000)
        .map(|_| [rng.symmetric(2.0), rng.symmetric(2.0), rng.symmetric(2.0)])
        .collect();
    let rep = spinor_property_suite(&psi, &pts).unwrap();
    println!(
        "over {} sample points: max divergence {:.3e}, min Kato slack {:+.6e}, min Lichnerowicz slack {:+.6e}",
        rep.points_checked, rep.max_divergence, rep.min_kato_slack, rep.min_lichnerowicz_slack
    );
}
