//! Flat three-dimensional spinor computations in the Pauli representation:
//! the Dirac operator, the Dirac current and its two quaternionic partners,
//! the divergence-free quadruple, and the Kato/Lichnerowicz-type checks.
//!
//! Spinors are stored as four real component fields with psi = (a + b i,
//! c + d i); complex arithmetic appears only inside the Dirac application.
//! The Hermitian product is conjugate linear in the first argument, which
//! pins every sign below.

use crate::error::{Error, Result};
use crate::field::ScalarFieldSpec;
use crate::jet::Jet3;
use crate::rng::Rng;

/// psi = (a + b i, c + d i) on a flat 3-d chart.
#[derive(Debug, Clone)]
pub struct SpinorField {
    pub a: ScalarFieldSpec,
    pub b: ScalarFieldSpec,
    pub c: ScalarFieldSpec,
    pub d: ScalarFieldSpec,
}

/// Jets of the four real components at a point.
#[derive(Debug, Clone)]
pub struct SpinorJet {
    pub a: Jet3,
    pub b: Jet3,
    pub c: Jet3,
    pub d: Jet3,
}

impl SpinorField {
    pub fn jet_at(&self, p: &[f64; 3]) -> Result<SpinorJet> {
        Ok(SpinorJet {
            a: self.a.jet_at(p)?,
            b: self.b.jet_at(p)?,
            c: self.c.jet_at(p)?,
            d: self.d.jet_at(p)?,
        })
    }
}

/// Complex 2-vector as four reals (re1, im1, re2, im2).
pub type Spinor2 = [f64; 4];

/// D psi = sum_i (i sigma_i) d_i psi with the Pauli matrices and the flat
/// connection. Component form of the four real equations:
///   Re1 = -d_1 d + d_2 c - d_3 b
///   Im1 =  d_1 c + d_2 d + d_3 a
///   Re2 = -d_1 b - d_2 a + d_3 d
///   Im2 =  d_1 a - d_2 b - d_3 c
pub fn dirac_apply(psi: &SpinorField, p: &[f64; 3]) -> Result<Spinor2> {
    let j = psi.jet_at(p)?;
    Ok(dirac_of_jet(&j))
}

fn dirac_of_jet(j: &SpinorJet) -> Spinor2 {
    [
        -j.d.grad[0] + j.c.grad[1] - j.b.grad[2],
        j.c.grad[0] + j.d.grad[1] + j.a.grad[2],
        -j.b.grad[0] - j.a.grad[1] + j.d.grad[2],
        j.a.grad[0] - j.b.grad[1] - j.c.grad[2],
    ]
}

/// The four flat divergences of (-d, c, -b), (c, d, a), (-b, -a, d),
/// (a, -b, -c); all four vanish at a point iff the Dirac operator does.
pub fn divfree_quadruple(psi: &SpinorField, p: &[f64; 3]) -> Result<[f64; 4]> {
    let j = psi.jet_at(p)?;
    Ok(dirac_of_jet(&j))
}

/// The Dirac current X and the two quaternionic currents A and B as
/// jet-valued fields, with X_i = <i e_i psi, psi> and the companion
/// fields from J phi = e_2 conj(phi).
#[derive(Debug, Clone)]
pub struct CurrentTriple {
    pub x: [Jet3; 3],
    pub a: [Jet3; 3],
    pub b: [Jet3; 3],
}

impl CurrentTriple {
    pub fn x_values(&self) -> [f64; 3] {
        [self.x[0].value, self.x[1].value, self.x[2].value]
    }

    pub fn a_values(&self) -> [f64; 3] {
        [self.a[0].value, self.a[1].value, self.a[2].value]
    }

    pub fn b_values(&self) -> [f64; 3] {
        [self.b[0].value, self.b[1].value, self.b[2].value]
    }
}

pub fn currents(psi: &SpinorField, p: &[f64; 3]) -> Result<CurrentTriple> {
    let j = psi.jet_at(p)?;
    Ok(currents_of_jet(&j))
}

fn currents_of_jet(j: &SpinorJet) -> CurrentTriple {
    let (a, b, c, d) = (&j.a, &j.b, &j.c, &j.d);
    let two = 2.0;
    let x = [
        a.mul(c).add(&b.mul(d)).scale(-two),
        a.mul(d).scale(-two).add(&b.mul(c).scale(two)),
        c.square()
            .add(&d.square())
            .sub(&a.square())
            .sub(&b.square()),
    ];
    let av = [
        a.mul(b).scale(-two).add(&c.mul(d).scale(two)),
        b.square()
            .add(&d.square())
            .sub(&a.square())
            .sub(&c.square()),
        a.mul(d).add(&b.mul(c)).scale(two),
    ];
    let bv = [
        b.square()
            .add(&c.square())
            .sub(&a.square())
            .sub(&d.square()),
        a.mul(b).add(&c.mul(d)).scale(two),
        a.mul(c).sub(&b.mul(d)).scale(two),
    ];
    CurrentTriple { x, a: av, b: bv }
}

/// Pointwise current algebra from raw component values; used by the random
/// quadruple scans.
pub fn currents_at_values(q: [f64; 4]) -> ([f64; 3], [f64; 3], [f64; 3]) {
    let [a, b, c, d] = q;
    (
        [
            -2.0 * a * c - 2.0 * b * d,
            -2.0 * a * d + 2.0 * b * c,
            -a * a - b * b + c * c + d * d,
        ],
        [
            -2.0 * a * b + 2.0 * c * d,
            -a * a + b * b - c * c + d * d,
            2.0 * a * d + 2.0 * b * c,
        ],
        [
            -a * a + b * b + c * c - d * d,
            2.0 * a * b + 2.0 * c * d,
            2.0 * a * c - 2.0 * b * d,
        ],
    )
}

/// div X for arbitrary psi equals 2 Re <i D psi, psi>; both sides evaluated.
pub fn div_x_against_dirac(psi: &SpinorField, p: &[f64; 3]) -> Result<(f64, f64)> {
    let j = psi.jet_at(p)?;
    let cur = currents_of_jet(&j);
    let div_x: f64 = (0..3).map(|i| cur.x[i].grad[i]).sum();
    let dpsi = dirac_of_jet(&j);
    // <i D psi, psi> with the product conjugate linear in the first slot:
    // Re = b Re1 - a Im1 + d Re2 - c Im2
    let re = j.b.value * dpsi[0] - j.a.value * dpsi[1] + j.d.value * dpsi[2] - j.c.value * dpsi[3];
    Ok((div_x, 2.0 * re))
}

/// psi(x) = psi_0 + sum_i x_i phi_i with constant spinors solving
/// sum_i e_i phi_i = 0; the kernel of that constraint has dimension 8 and
/// the sample is deterministic in the seed.
pub fn harmonic_linear_spinor(seed: u64) -> SpinorField {
    let mut rng = Rng::new(seed ^ 0x51f0_0d5e);
    let mut sample = || rng.symmetric(1.0);
    // free block: phi_1 = (a1,b1,c1,d1), phi_2 = (a2,b2,c2,d2); then
    //   a3 = -c1 - d2,  b3 = -d1 + c2,  c3 = a1 - b2,  d3 = b1 + a2
    let (a1, b1, c1, d1) = (sample(), sample(), sample(), sample());
    let (a2, b2, c2, d2) = (sample(), sample(), sample(), sample());
    let a3 = -c1 - d2;
    let b3 = -d1 + c2;
    let c3 = a1 - b2;
    let d3 = b1 + a2;
    let constant = |v: f64| ScalarFieldSpec::constant(v);
    let linear = |k0: f64, k1: f64, k2: f64, k3: f64| {
        ScalarFieldSpec::Sum(vec![
            constant(k0),
            ScalarFieldSpec::Scale(k1, Box::new(ScalarFieldSpec::Coordinate(0))),
            ScalarFieldSpec::Scale(k2, Box::new(ScalarFieldSpec::Coordinate(1))),
            ScalarFieldSpec::Scale(k3, Box::new(ScalarFieldSpec::Coordinate(2))),
        ])
    };
    SpinorField {
        a: linear(sample(), a1, a2, a3),
        b: linear(sample(), b1, b2, b3),
        c: linear(sample(), c1, c2, c3),
        d: linear(sample(), d1, d2, d3),
    }
}

/// Rank of the 4 x 12 real constraint matrix of sum_i e_i phi_i = 0; the
/// kernel dimension is 12 minus this.
pub fn dirac_constraint_rank() -> usize {
    // variables ordered (a1,b1,c1,d1, a2,b2,c2,d2, a3,b3,c3,d3)
    let rows: [[f64; 12]; 4] = [
        // -d1 + c2 - b3 = 0
        [0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 1.0, 0.0, 0.0, -1.0, 0.0, 0.0],
        // c1 + d2 + a3 = 0
        [0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0],
        // -b1 - a2 + d3 = 0
        [0.0, -1.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0],
        // a1 - b2 - c3 = 0
        [1.0, 0.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0, -1.0, 0.0],
    ];
    let mut m: Vec<Vec<f64>> = rows.iter().map(|r| r.to_vec()).collect();
    let mut rank = 0;
    for col in 0..12 {
        if rank == 4 {
            break;
        }
        let piv =
            (rank..4).max_by(|&r1, &r2| m[r1][col].abs().partial_cmp(&m[r2][col].abs()).unwrap());
        let piv = piv.unwrap();
        if m[piv][col].abs() < 1e-12 {
            continue;
        }
        m.swap(rank, piv);
        for r in rank + 1..4 {
            let f = m[r][col] / m[rank][col];
            for c in col..12 {
                m[r][c] -= f * m[rank][c];
            }
        }
        rank += 1;
    }
    rank
}

/// Outcome of the harmonic-spinor property battery.
#[derive(Debug, Clone)]
pub struct SpinorSuiteReport {
    pub max_divergence: f64,
    /// Minimum Kato slack 2 lap |psi|^2 - |grad |psi|^2|^2 / |psi|^2.
    pub min_kato_slack: f64,
    /// Minimum Lichnerowicz slack 2 lap |X| - |grad X|^2 / |X|.
    pub min_lichnerowicz_slack: f64,
    pub points_checked: usize,
}

/// Verifies div X = div A = div B = 0 and the Kato / Lichnerowicz-type
/// inequalities (flat space, so the scalar curvature term is absent) for a
/// harmonic spinor at the sample points. Points where |psi| nearly vanishes
/// are skipped for the ratio checks.
pub fn spinor_property_suite(psi: &SpinorField, points: &[[f64; 3]]) -> Result<SpinorSuiteReport> {
    let mut max_div: f64 = 0.0;
    let mut min_kato = f64::INFINITY;
    let mut min_lich = f64::INFINITY;
    let mut checked = 0;
    for p in points {
        let j = psi.jet_at(p)?;
        let dpsi = dirac_of_jet(&j);
        let dnorm: f64 = dpsi.iter().map(|x| x * x).sum::<f64>().sqrt();
        let scale = [&j.a, &j.b, &j.c, &j.d]
            .iter()
            .map(|c| c.max_abs())
            .fold(1.0f64, f64::max);
        if dnorm > 1e-10 * scale {
            return Err(Error::Precondition(format!(
                "spinor is not harmonic at {p:?}: |D psi| = {dnorm}"
            )));
        }
        let cur = currents_of_jet(&j);
        for field in [&cur.x, &cur.a, &cur.b] {
            let div: f64 = (0..3).map(|i| field[i].grad[i]).sum();
            max_div = max_div.max(div.abs() / scale.powi(2));
        }
        // |psi|^2 = a^2 + b^2 + c^2 + d^2 as a jet
        let norm_sq =
            j.a.square()
                .add(&j.b.square())
                .add(&j.c.square())
                .add(&j.d.square());
        if norm_sq.value <= 1e-8 {
            continue;
        }
        checked += 1;
        let lap = |f: &Jet3| (0..3).map(|i| f.h(i, i)).sum::<f64>();
        let grad_sq = |f: &Jet3| f.grad.iter().map(|x| x * x).sum::<f64>();
        let kato = 2.0 * lap(&norm_sq) - grad_sq(&norm_sq) / norm_sq.value;
        min_kato = min_kato.min(kato / norm_sq.value.max(1.0));
        // |X| = |psi|^2 pointwise, but evaluate it from the current itself
        let x_norm = cur.x[0]
            .square()
            .add(&cur.x[1].square())
            .add(&cur.x[2].square())
            .sqrt()?;
        let grad_x_sq: f64 = cur.x.iter().map(grad_sq).sum();
        let lich = 2.0 * lap(&x_norm) - grad_x_sq / x_norm.value;
        min_lich = min_lich.min(lich / x_norm.value.max(1.0));
    }
    Ok(SpinorSuiteReport {
        max_divergence: max_div,
        min_kato_slack: if min_kato.is_finite() { min_kato } else { 0.0 },
        min_lichnerowicz_slack: if min_lich.is_finite() { min_lich } else { 0.0 },
        points_checked: checked,
    })
}

/// Report of the two-dimensional Cauchy-Riemann counterpart: gradients of a
/// holomorphic pair are divergence free, orthogonal, and of equal length.
#[derive(Debug, Clone)]
pub struct CauchyRiemannReport {
    pub max_laplacian: f64,
    pub max_inner_product: f64,
    pub max_length_mismatch: f64,
}

pub fn cauchy_riemann_pair_check(
    u: &ScalarFieldSpec,
    v: &ScalarFieldSpec,
    points: &[[f64; 2]],
) -> Result<CauchyRiemannReport> {
    let mut max_lap: f64 = 0.0;
    let mut max_ip: f64 = 0.0;
    let mut max_len: f64 = 0.0;
    for p in points {
        let ju = u.jet_at(p)?;
        let jv = v.jet_at(p)?;
        let scale = ju.max_abs().max(jv.max_abs()).max(1.0);
        let cr1 = ju.grad[0] - jv.grad[1];
        let cr2 = ju.grad[1] + jv.grad[0];
        if cr1.abs() > 1e-10 * scale || cr2.abs() > 1e-10 * scale {
            return Err(Error::Precondition(format!(
                "Cauchy-Riemann equations fail at {p:?}: ({cr1}, {cr2})"
            )));
        }
        max_lap = max_lap.max((ju.h(0, 0) + ju.h(1, 1)).abs() / scale);
        max_lap = max_lap.max((jv.h(0, 0) + jv.h(1, 1)).abs() / scale);
        let ip = ju.grad[0] * jv.grad[0] + ju.grad[1] * jv.grad[1];
        max_ip = max_ip.max(ip.abs() / scale.powi(2));
        let lu = ju.grad[0].powi(2) + ju.grad[1].powi(2);
        let lv = jv.grad[0].powi(2) + jv.grad[1].powi(2);
        max_len = max_len.max((lu - lv).abs() / scale.powi(2));
    }
    Ok(CauchyRiemannReport {
        max_laplacian: max_lap,
        max_inner_product: max_ip,
        max_length_mismatch: max_len,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn constant_spinor(q: [f64; 4]) -> SpinorField {
        SpinorField {
            a: ScalarFieldSpec::constant(q[0]),
            b: ScalarFieldSpec::constant(q[1]),
            c: ScalarFieldSpec::constant(q[2]),
            d: ScalarFieldSpec::constant(q[3]),
        }
    }

    /// (a, b, c, d) = (x3, 0, 0, -x2)
    fn example_spinor() -> SpinorField {
        SpinorField {
            a: ScalarFieldSpec::Coordinate(2),
            b: ScalarFieldSpec::constant(0.0),
            c: ScalarFieldSpec::constant(0.0),
            d: ScalarFieldSpec::Scale(-1.0, Box::new(ScalarFieldSpec::Coordinate(1))),
        }
    }

    #[test]
    fn constant_spinor_is_harmonic() {
        let psi = constant_spinor([0.3, -0.7, 1.1, 0.2]);
        let d = dirac_apply(&psi, &[0.4, -1.0, 2.0]).unwrap();
        assert!(d.iter().all(|&x| x == 0.0));
        let q = divfree_quadruple(&psi, &[0.0, 0.0, 0.0]).unwrap();
        assert!(q.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn example_spinor_is_harmonic_with_known_current() {
        let psi = example_spinor();
        let d = dirac_apply(&psi, &[0.5, 1.5, -0.3]).unwrap();
        assert!(d.iter().all(|&x| x.abs() < 1e-15));
        // at p = (0, 1, 1): psi = (1, 0, 0, -1): X = (0, 2, 0), |X| = 2
        let cur = currents(&psi, &[0.0, 1.0, 1.0]).unwrap();
        assert_eq!(cur.x_values(), [0.0, 2.0, 0.0]);
    }

    #[test]
    fn coordinate_spinor_breaks_one_divergence() {
        // psi = (x1, 0, 0, 0): div(a, -b, -c) = d_1 a = 1
        let psi = SpinorField {
            a: ScalarFieldSpec::Coordinate(0),
            b: ScalarFieldSpec::constant(0.0),
            c: ScalarFieldSpec::constant(0.0),
            d: ScalarFieldSpec::constant(0.0),
        };
        let q = divfree_quadruple(&psi, &[0.2, 0.1, -0.4]).unwrap();
        assert_eq!(q[3], 1.0);
        assert_eq!(q[0], 0.0);
        assert_eq!(q[1], 0.0);
        assert_eq!(q[2], 0.0);
        let d = dirac_apply(&psi, &[0.2, 0.1, -0.4]).unwrap();
        assert!(d.iter().any(|&x| x != 0.0));
    }

    #[test]
    fn unit_spinor_current_triple() {
        // psi = (1, 0, 0, 0): X = (0,0,-1), A = (0,-1,0), B = (-1,0,0)
        let cur = currents(&constant_spinor([1.0, 0.0, 0.0, 0.0]), &[0.0; 3]).unwrap();
        assert_eq!(cur.x_values(), [0.0, 0.0, -1.0]);
        assert_eq!(cur.a_values(), [0.0, -1.0, 0.0]);
        assert_eq!(cur.b_values(), [-1.0, 0.0, 0.0]);
    }

    #[test]
    fn current_algebra_on_random_quadruples() {
        let mut rng = Rng::new(7);
        for _ in 0..1000 {
            let q = [
                rng.symmetric(2.0),
                rng.symmetric(2.0),
                rng.symmetric(2.0),
                rng.symmetric(2.0),
            ];
            let (x, a, b) = currents_at_values(q);
            let norm_sq: f64 = q.iter().map(|v| v * v).sum();
            let len = |v: &[f64; 3]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
            let ip = |u: &[f64; 3], v: &[f64; 3]| u.iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
            let tol = 1e-12 * norm_sq.max(1.0).powi(2);
            assert!((len(&x) - norm_sq).abs() <= tol);
            assert!((len(&a) - norm_sq).abs() <= tol);
            assert!((len(&b) - norm_sq).abs() <= tol);
            assert!(ip(&x, &a).abs() <= tol);
            assert!(ip(&x, &b).abs() <= tol);
            assert!(ip(&a, &b).abs() <= tol);
        }
    }

    #[test]
    fn dirac_equation_equivalent_to_quadruple() {
        let mut rng = Rng::new(100);
        for seed in 0..100 {
            let psi = harmonic_linear_spinor(seed);
            let p = [rng.symmetric(2.0), rng.symmetric(2.0), rng.symmetric(2.0)];
            let d = dirac_apply(&psi, &p).unwrap();
            let q = divfree_quadruple(&psi, &p).unwrap();
            let dn: f64 = d.iter().map(|x| x * x).sum();
            let qn: f64 = q.iter().map(|x| x * x).sum();
            assert!(dn <= 1e-24, "seed {seed}: harmonic by construction");
            assert!((dn - qn).abs() <= 1e-24);
        }
    }

    #[test]
    fn div_x_matches_dirac_pairing_for_nonharmonic_fields() {
        // arbitrary polynomial spinor, not harmonic
        let psi = SpinorField {
            a: ScalarFieldSpec::Polynomial {
                center: vec![],
                monomials: vec![
                    crate::field::Monomial {
                        coeff: 0.8,
                        exponents: vec![2, 0, 0],
                    },
                    crate::field::Monomial {
                        coeff: -0.4,
                        exponents: vec![0, 1, 1],
                    },
                ],
            },
            b: ScalarFieldSpec::Coordinate(1),
            c: ScalarFieldSpec::Polynomial {
                center: vec![],
                monomials: vec![crate::field::Monomial {
                    coeff: 1.2,
                    exponents: vec![1, 1, 0],
                }],
            },
            d: ScalarFieldSpec::Coordinate(0),
        };
        let mut rng = Rng::new(3);
        for _ in 0..50 {
            let p = [rng.symmetric(1.5), rng.symmetric(1.5), rng.symmetric(1.5)];
            let (div_x, pairing) = div_x_against_dirac(&psi, &p).unwrap();
            assert!(
                (div_x - pairing).abs() <= 1e-10 * div_x.abs().max(1.0),
                "div X {div_x} vs 2 Re <i D psi, psi> {pairing}"
            );
        }
    }

    #[test]
    fn example_lies_in_harmonic_kernel() {
        // the representable example psi = (x3, 0, 0, -x2) satisfies the
        // kernel relations phi_2 = (0,0,0,-1), phi_3 = (1,0,0,0)
        let psi = example_spinor();
        for p in [[0.0, 0.0, 0.0], [1.0, -2.0, 0.7]] {
            let d = dirac_apply(&psi, &p).unwrap();
            assert!(d.iter().all(|&x| x.abs() < 1e-14));
        }
    }

    #[test]
    fn constraint_rank_is_four_kernel_eight() {
        assert_eq!(dirac_constraint_rank(), 4);
        // kernel dimension = 12 - 4 = 8
        assert_eq!(12 - dirac_constraint_rank(), 8);
    }

    #[test]
    fn harmonic_spinors_satisfy_dirac_everywhere() {
        let mut rng = Rng::new(11);
        for seed in 0..20 {
            let psi = harmonic_linear_spinor(seed);
            for _ in 0..100 {
                let p = [rng.symmetric(3.0), rng.symmetric(3.0), rng.symmetric(3.0)];
                let d = dirac_apply(&psi, &p).unwrap();
                let dn: f64 = d.iter().map(|x| x * x).sum::<f64>().sqrt();
                assert!(dn <= 1e-12);
            }
        }
    }

    #[test]
    fn property_suite_hand_checked_divergence() {
        // psi = (x3, 0, 0, -x2): div X vanishes by the hand computation
        // d_2(2 x2 x3) + d_3(x2^2 - x3^2) = 2 x3 - 2 x3 = 0
        let psi = example_spinor();
        let pts: Vec<[f64; 3]> = vec![[0.3, 1.0, 0.5], [1.0, -1.0, 2.0], [0.0, 0.5, -0.5]];
        let rep = spinor_property_suite(&psi, &pts).unwrap();
        assert!(rep.max_divergence <= 1e-13);
        assert!(rep.min_kato_slack >= -1e-10);
        assert!(rep.min_lichnerowicz_slack >= -1e-10);
    }

    #[test]
    fn property_suite_rejects_nonharmonic() {
        let psi = SpinorField {
            a: ScalarFieldSpec::Coordinate(0),
            b: ScalarFieldSpec::constant(0.0),
            c: ScalarFieldSpec::constant(0.0),
            d: ScalarFieldSpec::constant(0.0),
        };
        assert!(spinor_property_suite(&psi, &[[0.1, 0.2, 0.3]]).is_err());
    }

    #[test]
    fn lichnerowicz_scan_fifty_spinors() {
        let mut rng = Rng::new(42);
        let mut worst = f64::INFINITY;
        for seed in 0..50 {
            let psi = harmonic_linear_spinor(seed);
            let pts: Vec<[f64; 3]> = (0..1000)
                .map(|_| [rng.symmetric(2.0), rng.symmetric(2.0), rng.symmetric(2.0)])
                .collect();
            let rep = spinor_property_suite(&psi, &pts).unwrap();
            worst = worst.min(rep.min_lichnerowicz_slack);
            assert!(rep.max_divergence <= 1e-10, "seed {seed}");
        }
        assert!(worst >= -1e-10, "minimum Lichnerowicz slack {worst}");
    }

    #[test]
    fn cauchy_riemann_pairs() {
        // u = x, v = y
        let pts: Vec<[f64; 2]> = vec![[0.0, 0.0], [1.0, 2.0], [-0.3, 0.4]];
        let rep = cauchy_riemann_pair_check(
            &ScalarFieldSpec::Coordinate(0),
            &ScalarFieldSpec::Coordinate(1),
            &pts,
        )
        .unwrap();
        assert_eq!(rep.max_laplacian, 0.0);
        assert_eq!(rep.max_inner_product, 0.0);
        assert_eq!(rep.max_length_mismatch, 0.0);

        // z^2: u = x^2 - y^2, v = 2xy
        let u = ScalarFieldSpec::Polynomial {
            center: vec![],
            monomials: vec![
                crate::field::Monomial {
                    coeff: 1.0,
                    exponents: vec![2, 0],
                },
                crate::field::Monomial {
                    coeff: -1.0,
                    exponents: vec![0, 2],
                },
            ],
        };
        let v = ScalarFieldSpec::Polynomial {
            center: vec![],
            monomials: vec![crate::field::Monomial {
                coeff: 2.0,
                exponents: vec![1, 1],
            }],
        };
        let rep = cauchy_riemann_pair_check(&u, &v, &pts).unwrap();
        assert!(rep.max_laplacian <= 1e-14);
        assert!(rep.max_inner_product <= 1e-14);
        assert!(rep.max_length_mismatch <= 1e-14);

        // e^x cos y, e^x sin y via the Exp spec
        let u = ScalarFieldSpec::Product(vec![
            ScalarFieldSpec::Exp(Box::new(ScalarFieldSpec::Coordinate(0))),
            ScalarFieldSpec::TrigPolynomial {
                modes: vec![crate::field::TrigMode {
                    freq: vec![0, 1],
                    cos_amp: 1.0,
                    sin_amp: 0.0,
                }],
            },
        ]);
        let v = ScalarFieldSpec::Product(vec![
            ScalarFieldSpec::Exp(Box::new(ScalarFieldSpec::Coordinate(0))),
            ScalarFieldSpec::TrigPolynomial {
                modes: vec![crate::field::TrigMode {
                    freq: vec![0, 1],
                    cos_amp: 0.0,
                    sin_amp: 1.0,
                }],
            },
        ]);
        let mut rng = Rng::new(9);
        let pts: Vec<[f64; 2]> = (0..20)
            .map(|_| [rng.symmetric(1.0), rng.symmetric(3.0)])
            .collect();
        let rep = cauchy_riemann_pair_check(&u, &v, &pts).unwrap();
        assert!(rep.max_laplacian <= 1e-12);
        assert!(rep.max_inner_product <= 1e-12);
        assert!(rep.max_length_mismatch <= 1e-12);
    }

    #[test]
    fn cauchy_riemann_violation_rejected() {
        let pts = [[0.5, 0.5]];
        assert!(cauchy_riemann_pair_check(
            &ScalarFieldSpec::Coordinate(0),
            &ScalarFieldSpec::Coordinate(0),
            &pts,
        )
        .is_err());
    }
}
