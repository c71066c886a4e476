//! Scalar field specifications on chart domains and their exact jets.
//!
//! Every function handed to the geometric operators is described by a
//! [`ScalarFieldSpec`]; evaluation produces exact order-3 jets (no truncation
//! error beyond floating point for polynomial and trigonometric fields).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::Jet3;

/// One monomial `coeff * prod_i (x_i - center_i)^exponents[i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub coeff: f64,
    pub exponents: Vec<u32>,
}

/// One Fourier mode `cos_amp * cos(freq . x) + sin_amp * sin(freq . x)`,
/// periodic with period 2*pi in every coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrigMode {
    pub freq: Vec<i32>,
    pub cos_amp: f64,
    pub sin_amp: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ScalarFieldSpec {
    Coordinate(usize),
    Polynomial {
        center: Vec<f64>,
        monomials: Vec<Monomial>,
    },
    TrigPolynomial {
        modes: Vec<TrigMode>,
    },
    Sum(Vec<ScalarFieldSpec>),
    Product(Vec<ScalarFieldSpec>),
    Scale(f64, Box<ScalarFieldSpec>),
    Exp(Box<ScalarFieldSpec>),
}

impl ScalarFieldSpec {
    pub fn constant(c: f64) -> Self {
        ScalarFieldSpec::Polynomial {
            center: vec![],
            monomials: vec![Monomial {
                coeff: c,
                exponents: vec![],
            }],
        }
    }

    pub fn zero() -> Self {
        ScalarFieldSpec::constant(0.0)
    }

    /// Checks dimensional consistency and the degree bound.
    pub fn validate(&self, dim: usize) -> Result<()> {
        match self {
            ScalarFieldSpec::Coordinate(i) => {
                if *i >= dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        got: *i + 1,
                    });
                }
            }
            ScalarFieldSpec::Polynomial { center, monomials } => {
                if !center.is_empty() && center.len() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        got: center.len(),
                    });
                }
                for m in monomials {
                    if !m.exponents.is_empty() && m.exponents.len() != dim {
                        return Err(Error::DimensionMismatch {
                            expected: dim,
                            got: m.exponents.len(),
                        });
                    }
                    let total: u32 = m.exponents.iter().sum();
                    if total > 4 {
                        return Err(Error::Precondition(format!(
                            "polynomial total degree {total} exceeds 4"
                        )));
                    }
                }
            }
            ScalarFieldSpec::TrigPolynomial { modes } => {
                for m in modes {
                    if m.freq.len() != dim {
                        return Err(Error::DimensionMismatch {
                            expected: dim,
                            got: m.freq.len(),
                        });
                    }
                }
            }
            ScalarFieldSpec::Sum(parts) | ScalarFieldSpec::Product(parts) => {
                for p in parts {
                    p.validate(dim)?;
                }
            }
            ScalarFieldSpec::Scale(_, inner) | ScalarFieldSpec::Exp(inner) => {
                inner.validate(dim)?;
            }
        }
        Ok(())
    }

    /// Exact order-3 jet of the field at `p`.
    pub fn jet_at(&self, p: &[f64]) -> Result<Jet3> {
        let dim = p.len();
        self.validate(dim)?;
        Ok(self.jet_unchecked(p))
    }

    fn jet_unchecked(&self, p: &[f64]) -> Jet3 {
        let dim = p.len();
        match self {
            ScalarFieldSpec::Coordinate(i) => Jet3::coordinate(dim, *i, p[*i]),
            ScalarFieldSpec::Polynomial { center, monomials } => {
                let mut acc = Jet3::zero(dim);
                for m in monomials {
                    let mut term = Jet3::constant(dim, m.coeff);
                    for (i, &e) in m.exponents.iter().enumerate() {
                        let c = if center.is_empty() { 0.0 } else { center[i] };
                        let xi = Jet3::coordinate(dim, i, p[i] - c);
                        for _ in 0..e {
                            term = term.mul(&xi);
                        }
                    }
                    acc = acc.add(&term);
                }
                acc
            }
            ScalarFieldSpec::TrigPolynomial { modes } => {
                let mut acc = Jet3::zero(dim);
                for m in modes {
                    let mut phase = Jet3::zero(dim);
                    for (i, &f) in m.freq.iter().enumerate() {
                        phase.value += f as f64 * p[i];
                        phase.grad[i] = f as f64;
                    }
                    if m.cos_amp != 0.0 {
                        acc = acc.add(&phase.cos().scale(m.cos_amp));
                    }
                    if m.sin_amp != 0.0 {
                        acc = acc.add(&phase.sin().scale(m.sin_amp));
                    }
                }
                acc
            }
            ScalarFieldSpec::Sum(parts) => {
                let mut acc = Jet3::zero(dim);
                for part in parts {
                    acc = acc.add(&part.jet_unchecked(p));
                }
                acc
            }
            ScalarFieldSpec::Product(parts) => {
                let mut acc = Jet3::constant(dim, 1.0);
                for part in parts {
                    acc = acc.mul(&part.jet_unchecked(p));
                }
                acc
            }
            ScalarFieldSpec::Scale(s, inner) => inner.jet_unchecked(p).scale(*s),
            ScalarFieldSpec::Exp(inner) => inner.jet_unchecked(p).exp(),
        }
    }

    /// Plain value evaluation, independent of the jet machinery; the finite
    /// difference oracle differentiates these.
    pub fn value_at(&self, p: &[f64]) -> f64 {
        match self {
            ScalarFieldSpec::Coordinate(i) => p[*i],
            ScalarFieldSpec::Polynomial { center, monomials } => monomials
                .iter()
                .map(|m| {
                    let mut v = m.coeff;
                    for (i, &e) in m.exponents.iter().enumerate() {
                        let c = if center.is_empty() { 0.0 } else { center[i] };
                        v *= (p[i] - c).powi(e as i32);
                    }
                    v
                })
                .sum(),
            ScalarFieldSpec::TrigPolynomial { modes } => modes
                .iter()
                .map(|m| {
                    let theta: f64 = m.freq.iter().zip(p).map(|(&f, &x)| f as f64 * x).sum();
                    m.cos_amp * theta.cos() + m.sin_amp * theta.sin()
                })
                .sum(),
            ScalarFieldSpec::Sum(parts) => parts.iter().map(|s| s.value_at(p)).sum(),
            ScalarFieldSpec::Product(parts) => parts.iter().map(|s| s.value_at(p)).product(),
            ScalarFieldSpec::Scale(s, inner) => s * inner.value_at(p),
            ScalarFieldSpec::Exp(inner) => inner.value_at(p).exp(),
        }
    }
}

/// Max relative deviation of jet derivatives from central finite differences.
#[derive(Debug, Clone, Copy)]
pub struct FdReport {
    pub grad_dev: f64,
    pub hess_dev: f64,
}

/// Cross-checks `jet_at` gradients and Hessians against central finite
/// differences of the field's pointwise values.
pub fn fd_crosscheck(field: &ScalarFieldSpec, p: &[f64], h: f64) -> Result<FdReport> {
    if !(1e-5..=1e-3).contains(&h) {
        return Err(Error::Precondition(format!(
            "finite difference step {h} outside [1e-5, 1e-3]"
        )));
    }
    let dim = p.len();
    let jet = field.jet_at(p)?;
    let shift = |i: usize, s: f64, j: usize, t: f64| {
        let mut q = p.to_vec();
        q[i] += s;
        q[j] += t;
        field.value_at(&q)
    };
    let scale = jet.max_abs().max(1.0);
    let mut grad_dev: f64 = 0.0;
    let mut hess_dev: f64 = 0.0;
    let f0 = field.value_at(p);
    for i in 0..dim {
        let fp = shift(i, h, i, 0.0);
        let fm = shift(i, -h, i, 0.0);
        grad_dev = grad_dev.max(((fp - fm) / (2.0 * h) - jet.grad[i]).abs() / scale);
        hess_dev = hess_dev.max(((fp - 2.0 * f0 + fm) / (h * h) - jet.h(i, i)).abs() / scale);
        for j in i + 1..dim {
            let fd = (shift(i, h, j, h) - shift(i, h, j, -h) - shift(i, -h, j, h)
                + shift(i, -h, j, -h))
                / (4.0 * h * h);
            hess_dev = hess_dev.max((fd - jet.h(i, j)).abs() / scale);
        }
    }
    Ok(FdReport { grad_dev, hess_dev })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly_x0sq_x1() -> ScalarFieldSpec {
        // u(x) = x0^2 * x1
        ScalarFieldSpec::Polynomial {
            center: vec![],
            monomials: vec![Monomial {
                coeff: 1.0,
                exponents: vec![2, 1, 0],
            }],
        }
    }

    #[test]
    fn hand_differentiated_monomial() {
        let u = poly_x0sq_x1();
        let j = u.jet_at(&[1.0, 2.0, 0.0]).unwrap();
        assert_eq!(j.value, 2.0);
        assert_eq!(j.grad, vec![4.0, 1.0, 0.0]);
        // hess rows ((4,2,0),(2,0,0),(0,0,0))
        assert_eq!(j.h(0, 0), 4.0);
        assert_eq!(j.h(0, 1), 2.0);
        assert_eq!(j.h(1, 0), 2.0);
        assert_eq!(j.h(1, 1), 0.0);
        // cubic [0][0][1] = 2, symmetric placements, everything else zero
        assert_eq!(j.cubic_at(0, 0, 1), 2.0);
        assert_eq!(j.c(1, 0, 0), 2.0);
        assert_eq!(j.c(0, 0, 0), 0.0);
        assert!(j.is_symmetric());
    }

    #[test]
    fn coordinate_field_jet() {
        let u = ScalarFieldSpec::Coordinate(0);
        let j = u.jet_at(&[3.5, -1.0, 2.0]).unwrap();
        assert_eq!(j.value, 3.5);
        assert_eq!(j.grad, vec![1.0, 0.0, 0.0]);
        assert!(j.hess.iter().all(|&x| x == 0.0));
        assert!(j.cubic.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn single_trig_mode_chain_rule() {
        // u = sin(x0 + 2 x1) at the origin
        let u = ScalarFieldSpec::TrigPolynomial {
            modes: vec![TrigMode {
                freq: vec![1, 2],
                cos_amp: 0.0,
                sin_amp: 1.0,
            }],
        };
        let j = u.jet_at(&[0.0, 0.0]).unwrap();
        assert_eq!(j.value, 0.0);
        assert_eq!(j.grad, vec![1.0, 2.0]);
        // -sin(0) * k x k = 0
        assert!(j.hess.iter().all(|&x| x == 0.0));
        // cubic = -cos(0) * k x k x k
        assert_eq!(j.c(0, 0, 0), -1.0);
        assert_eq!(j.c(0, 0, 1), -2.0);
        assert_eq!(j.c(1, 1, 1), -8.0);
    }

    #[test]
    fn fd_crosscheck_polynomial_tight() {
        let u = poly_x0sq_x1();
        let rep = fd_crosscheck(&u, &[0.3, -0.7, 0.1], 1e-4).unwrap();
        assert!(rep.grad_dev <= 1e-9, "grad dev {}", rep.grad_dev);
    }

    #[test]
    fn fd_crosscheck_trig() {
        let u = ScalarFieldSpec::TrigPolynomial {
            modes: vec![
                TrigMode {
                    freq: vec![1, -1, 2],
                    cos_amp: 0.8,
                    sin_amp: -0.3,
                },
                TrigMode {
                    freq: vec![0, 2, 1],
                    cos_amp: -0.4,
                    sin_amp: 0.9,
                },
            ],
        };
        let rep = fd_crosscheck(&u, &[0.4, 1.3, -2.0], 1e-4).unwrap();
        assert!(rep.grad_dev <= 1e-7, "grad dev {}", rep.grad_dev);
        assert!(rep.hess_dev <= 1e-6, "hess dev {}", rep.hess_dev);
    }

    #[test]
    fn fd_crosscheck_coordinate_exact() {
        let u = ScalarFieldSpec::Coordinate(1);
        let rep = fd_crosscheck(&u, &[0.1, 0.2], 1e-4).unwrap();
        assert!(rep.grad_dev <= 1e-12);
        assert!(rep.hess_dev <= 1e-8);
    }

    #[test]
    fn fd_step_out_of_range_rejected() {
        let u = ScalarFieldSpec::Coordinate(0);
        assert!(fd_crosscheck(&u, &[0.0], 1e-2).is_err());
    }

    #[test]
    fn degree_bound_enforced() {
        let u = ScalarFieldSpec::Polynomial {
            center: vec![],
            monomials: vec![Monomial {
                coeff: 1.0,
                exponents: vec![3, 2],
            }],
        };
        assert!(u.validate(2).is_err());
    }
}
