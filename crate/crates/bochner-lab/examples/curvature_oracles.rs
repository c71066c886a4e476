//! Curvature operators checked against closed forms: conformal scalar
//! curvature, the stereographic sphere, and intermediate curvature traces.
//!
//! Run with: cargo run --release --example curvature_oracles

use bochner_lab::curvature::{curvature_at, intermediate_curvature, sectional};
use bochner_lab::linalg;
use bochner_lab::metric::{eval_metric, random_scene, MetricField, MetricKind};

fn main() {
    // conformal metric g = e^{2 phi} delta on a random scene
    let (metric, _, p) = random_scene(17, 4, 1, MetricKind::Conformal).unwrap();
    let gj = eval_metric(&metric, &p).unwrap();
    let curv = curvature_at(&gj);
    let phi = match &metric {
        MetricField::Conformal { phi, .. } => phi.jet_at(&p).unwrap(),
        _ => unreachable!(),
    };
    let n = 4usize;
    let lap: f64 = (0..n).map(|i| phi.h(i, i)).sum();
    let grad2: f64 = phi.grad.iter().map(|x| x * x).sum();
    let nf = n as f64;
    let closed_form =
        (-2.0 * (nf - 1.0) * lap - (nf - 1.0) * (nf - 2.0) * grad2) * (-2.0 * phi.value).exp();
    println!("conformal scal computed    : {:+.12e}", curv.scal);
    println!("conformal scal closed form : {:+.12e}", closed_form);

    // stereographic 2-sphere chart: constant curvature +1
    let warp = bochner_lab::field::ScalarFieldSpec::Polynomial {
        center: vec![],
        monomials: vec![
            bochner_lab::field::Monomial {
                coeff: 2.0,
                exponents: vec![0, 0],
            },
            bochner_lab::field::Monomial {
                coeff: -2.0,
                exponents: vec![2, 0],
            },
            bochner_lab::field::Monomial {
                coeff: -2.0,
                exponents: vec![0, 2],
            },
        ],
    };
    let sphere = MetricField::DiagonalWarped {
        dim: 2,
        warps: vec![warp.clone(), warp],
    };
    let c2 = curvature_at(&eval_metric(&sphere, &[0.0, 0.0]).unwrap());
    let k = sectional(&c2, &[1.0, 0.0], &[0.0, 1.0]).unwrap();
    println!("sphere sectional curvature : {k:+.12} (exact: +1)");
    println!("sphere scalar curvature    : {:+.12} (exact: +2)", c2.scal);

    // intermediate curvature interpolates Ricci and scal/2
    let mut frame: Vec<Vec<f64>> = Vec::new();
    let g0 = gj.g0();
    for i in 0..n {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        for e in &frame {
            let ip = linalg::ip_g(&g0, &v, e);
            for (vi, ei) in v.iter_mut().zip(e) {
                *vi -= ip * ei;
            }
        }
        let nrm = linalg::norm_g(&g0, &v);
        v.iter_mut().for_each(|x| *x /= nrm);
        frame.push(v);
    }
    let c1 = intermediate_curvature(&curv, &frame, 1).unwrap();
    let ctop = intermediate_curvature(&curv, &frame, n - 1).unwrap();
    println!(
        "C_1 = {c1:+.10e} vs Ric(e1, e1) = {:+.10e}",
        curv.ric(&frame[0], &frame[0])
    );
    println!(
        "C_(n-1) = {ctop:+.10e} vs scal/2 = {:+.10e}",
        0.5 * curv.scal
    );
}
