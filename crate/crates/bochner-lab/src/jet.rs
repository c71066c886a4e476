//! Truncated multivariate Taylor arithmetic through order 3.
//!
//! A [`Jet3`] carries a value together with its gradient, Hessian, and
//! symmetric third-derivative tensor with respect to the chart coordinates.
//! Arithmetic propagates derivatives exactly through order 3 (Leibniz and
//! Faa di Bruno); nothing of order 4 is ever represented. Quantities built
//! from differentiated jets simply carry fewer meaningful orders, which is
//! all the downstream operators consume.

use crate::error::{Error, Result};

/// Value, gradient, Hessian, and third derivatives of a scalar at a point.
///
/// `hess` and `cubic` are stored full but kept symmetric by every operation.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet3 {
    pub dim: usize,
    pub value: f64,
    pub grad: Vec<f64>,
    /// Row-major dim x dim, symmetric.
    pub hess: Vec<f64>,
    /// dim x dim x dim, fully symmetric; index via [`Jet3::cubic_at`].
    pub cubic: Vec<f64>,
}

impl Jet3 {
    pub fn zero(dim: usize) -> Self {
        Jet3 {
            dim,
            value: 0.0,
            grad: vec![0.0; dim],
            hess: vec![0.0; dim * dim],
            cubic: vec![0.0; dim * dim * dim],
        }
    }

    pub fn constant(dim: usize, value: f64) -> Self {
        let mut j = Jet3::zero(dim);
        j.value = value;
        j
    }

    /// The jet of the coordinate function `x_i` at a point with `x_i = value`.
    pub fn coordinate(dim: usize, i: usize, value: f64) -> Self {
        let mut j = Jet3::constant(dim, value);
        j.grad[i] = 1.0;
        j
    }

    #[inline]
    pub fn h(&self, i: usize, j: usize) -> f64 {
        self.hess[i * self.dim + j]
    }

    #[inline]
    pub fn c(&self, i: usize, j: usize, k: usize) -> f64 {
        self.cubic[(i * self.dim + j) * self.dim + k]
    }

    /// Canonical sorted-index accessor for the symmetric third derivatives.
    pub fn cubic_at(&self, mut i: usize, mut j: usize, mut k: usize) -> f64 {
        if i > j {
            std::mem::swap(&mut i, &mut j);
        }
        if j > k {
            std::mem::swap(&mut j, &mut k);
        }
        if i > j {
            std::mem::swap(&mut i, &mut j);
        }
        self.c(i, j, k)
    }

    fn set_h(&mut self, i: usize, j: usize, v: f64) {
        self.hess[i * self.dim + j] = v;
    }

    fn set_c(&mut self, i: usize, j: usize, k: usize, v: f64) {
        self.cubic[(i * self.dim + j) * self.dim + k] = v;
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
            && self.grad.iter().all(|x| x.is_finite())
            && self.hess.iter().all(|x| x.is_finite())
            && self.cubic.iter().all(|x| x.is_finite())
    }

    /// Largest absolute entry across all orders.
    pub fn max_abs(&self) -> f64 {
        let mut m = self.value.abs();
        for x in self.grad.iter().chain(&self.hess).chain(&self.cubic) {
            m = m.max(x.abs());
        }
        m
    }

    pub fn add(&self, other: &Jet3) -> Jet3 {
        self.check_dim(other);
        let mut out = self.clone();
        out.value += other.value;
        for (a, b) in out.grad.iter_mut().zip(&other.grad) {
            *a += b;
        }
        for (a, b) in out.hess.iter_mut().zip(&other.hess) {
            *a += b;
        }
        for (a, b) in out.cubic.iter_mut().zip(&other.cubic) {
            *a += b;
        }
        out
    }

    pub fn sub(&self, other: &Jet3) -> Jet3 {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Jet3 {
        self.scale(-1.0)
    }

    pub fn scale(&self, s: f64) -> Jet3 {
        let mut out = self.clone();
        out.value *= s;
        out.grad.iter_mut().for_each(|x| *x *= s);
        out.hess.iter_mut().for_each(|x| *x *= s);
        out.cubic.iter_mut().for_each(|x| *x *= s);
        out
    }

    pub fn add_scalar(&self, s: f64) -> Jet3 {
        let mut out = self.clone();
        out.value += s;
        out
    }

    /// Leibniz product through order 3. Each symmetric entry is computed
    /// once for sorted indices and copied to every permutation slot, so the
    /// symmetry of hess and cubic is exact rather than up to rounding.
    pub fn mul(&self, b: &Jet3) -> Jet3 {
        self.check_dim(b);
        let n = self.dim;
        let a = self;
        let mut out = Jet3::zero(n);
        out.value = a.value * b.value;
        for i in 0..n {
            out.grad[i] = a.grad[i] * b.value + a.value * b.grad[i];
        }
        for i in 0..n {
            for j in i..n {
                let v = a.h(i, j) * b.value
                    + a.grad[i] * b.grad[j]
                    + a.grad[j] * b.grad[i]
                    + a.value * b.h(i, j);
                out.set_h(i, j, v);
                out.set_h(j, i, v);
            }
        }
        for i in 0..n {
            for j in i..n {
                for k in j..n {
                    let v = a.c(i, j, k) * b.value
                        + a.value * b.c(i, j, k)
                        + a.h(i, j) * b.grad[k]
                        + a.h(i, k) * b.grad[j]
                        + a.h(j, k) * b.grad[i]
                        + b.h(i, j) * a.grad[k]
                        + b.h(i, k) * a.grad[j]
                        + b.h(j, k) * a.grad[i];
                    out.set_c_sym(i, j, k, v);
                }
            }
        }
        out
    }

    /// Writes one symmetric cubic entry to all index permutations.
    fn set_c_sym(&mut self, i: usize, j: usize, k: usize, v: f64) {
        for (a, b, c) in [
            (i, j, k),
            (i, k, j),
            (j, i, k),
            (j, k, i),
            (k, i, j),
            (k, j, i),
        ] {
            self.set_c(a, b, c, v);
        }
    }

    pub fn div(&self, b: &Jet3) -> Result<Jet3> {
        if b.value == 0.0 {
            return Err(Error::SingularDenominator);
        }
        Ok(self.mul(&b.recip()?))
    }

    /// Faa di Bruno composition with outer derivatives f, f', f'', f'''.
    fn compose(&self, f0: f64, f1: f64, f2: f64, f3: f64) -> Jet3 {
        let n = self.dim;
        let a = self;
        let mut out = Jet3::zero(n);
        out.value = f0;
        for i in 0..n {
            out.grad[i] = f1 * a.grad[i];
        }
        for i in 0..n {
            for j in i..n {
                let v = f2 * a.grad[i] * a.grad[j] + f1 * a.h(i, j);
                out.set_h(i, j, v);
                out.set_h(j, i, v);
            }
        }
        for i in 0..n {
            for j in i..n {
                for k in j..n {
                    let v = f3 * a.grad[i] * a.grad[j] * a.grad[k]
                        + f2 * (a.h(i, j) * a.grad[k]
                            + a.h(i, k) * a.grad[j]
                            + a.h(j, k) * a.grad[i])
                        + f1 * a.c(i, j, k);
                    out.set_c_sym(i, j, k, v);
                }
            }
        }
        out
    }

    pub fn recip(&self) -> Result<Jet3> {
        let x = self.value;
        if x == 0.0 {
            return Err(Error::SingularArgument {
                op: "recip",
                value: x,
            });
        }
        let inv = 1.0 / x;
        Ok(self.compose(
            inv,
            -inv * inv,
            2.0 * inv * inv * inv,
            -6.0 * inv * inv * inv * inv,
        ))
    }

    pub fn sqrt(&self) -> Result<Jet3> {
        let x = self.value;
        if x <= 0.0 {
            return Err(Error::SingularArgument {
                op: "sqrt",
                value: x,
            });
        }
        let r = x.sqrt();
        Ok(self.compose(r, 0.5 / r, -0.25 / (r * x), 0.375 / (r * x * x)))
    }

    pub fn ln(&self) -> Result<Jet3> {
        let x = self.value;
        if x <= 0.0 {
            return Err(Error::SingularArgument {
                op: "log",
                value: x,
            });
        }
        let inv = 1.0 / x;
        Ok(self.compose(x.ln(), inv, -inv * inv, 2.0 * inv * inv * inv))
    }

    pub fn exp(&self) -> Jet3 {
        let e = self.value.exp();
        self.compose(e, e, e, e)
    }

    pub fn square(&self) -> Jet3 {
        self.mul(self)
    }

    /// cos(theta) where `self` is the phase; exact for any phase jet.
    pub fn cos(&self) -> Jet3 {
        let (s, c) = self.value.sin_cos();
        self.compose(c, -s, -c, s)
    }

    pub fn sin(&self) -> Jet3 {
        let (s, c) = self.value.sin_cos();
        self.compose(s, c, -s, -c)
    }

    /// Derivative extraction: the jet of `d(self)/d x_i`, one order lower.
    ///
    /// The returned cubic part is zero; only value/grad/hess are meaningful.
    pub fn partial(&self, i: usize) -> Jet3 {
        let n = self.dim;
        let mut out = Jet3::zero(n);
        out.value = self.grad[i];
        for j in 0..n {
            out.grad[j] = self.h(i, j);
        }
        for j in 0..n {
            for k in 0..n {
                out.set_h(j, k, self.c(i, j, k));
            }
        }
        out
    }

    fn check_dim(&self, other: &Jet3) {
        debug_assert_eq!(self.dim, other.dim, "jet dimension mismatch");
    }

    /// Max relative entrywise deviation from `other` across all orders.
    pub fn rel_distance(&self, other: &Jet3) -> f64 {
        let scale = self.max_abs().max(other.max_abs()).max(1.0);
        let mut worst = (self.value - other.value).abs();
        for (a, b) in self
            .grad
            .iter()
            .chain(&self.hess)
            .chain(&self.cubic)
            .zip(other.grad.iter().chain(&other.hess).chain(&other.cubic))
        {
            worst = worst.max((a - b).abs());
        }
        worst / scale
    }

    /// Exact symmetry check of hess and cubic.
    pub fn is_symmetric(&self) -> bool {
        let n = self.dim;
        for i in 0..n {
            for j in 0..n {
                if self.h(i, j) != self.h(j, i) {
                    return false;
                }
                for k in 0..n {
                    let c = self.c(i, j, k);
                    if c != self.c(i, k, j)
                        || c != self.c(j, i, k)
                        || c != self.c(j, k, i)
                        || c != self.c(k, i, j)
                        || c != self.c(k, j, i)
                    {
                        return false;
                    }
                }
            }
        }
        true
    }
}

impl std::ops::Add for &Jet3 {
    type Output = Jet3;
    fn add(self, rhs: &Jet3) -> Jet3 {
        Jet3::add(self, rhs)
    }
}

impl std::ops::Sub for &Jet3 {
    type Output = Jet3;
    fn sub(self, rhs: &Jet3) -> Jet3 {
        Jet3::sub(self, rhs)
    }
}

impl std::ops::Mul for &Jet3 {
    type Output = Jet3;
    fn mul(self, rhs: &Jet3) -> Jet3 {
        Jet3::mul(self, rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_product() {
        let a = Jet3::constant(3, 3.0);
        let b = Jet3::constant(3, 4.0);
        let c = a.mul(&b);
        assert_eq!(c.value, 12.0);
        assert!(c.grad.iter().all(|&x| x == 0.0));
        assert!(c.hess.iter().all(|&x| x == 0.0));
        assert!(c.cubic.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn self_division_is_one() {
        let mut a = Jet3::coordinate(2, 0, 1.7);
        a.set_h(0, 1, 0.3);
        a.set_h(1, 0, 0.3);
        let q = a.div(&a).unwrap();
        assert!((q.value - 1.0).abs() < 1e-15);
        assert!(q.grad.iter().all(|&x| x.abs() < 1e-14));
        assert!(q.hess.iter().all(|&x| x.abs() < 1e-14));
        assert!(q.cubic.iter().all(|&x| x.abs() < 1e-13));
    }

    #[test]
    fn coordinate_product_hessian() {
        // x0 * x1 at (1, 1): value 1, grad (1,1), mixed Hessian 1, cubic 0
        let x = Jet3::coordinate(2, 0, 1.0);
        let y = Jet3::coordinate(2, 1, 1.0);
        let p = x.mul(&y);
        assert_eq!(p.value, 1.0);
        assert_eq!(p.grad, vec![1.0, 1.0]);
        assert_eq!(p.h(0, 1), 1.0);
        assert_eq!(p.h(1, 0), 1.0);
        assert_eq!(p.h(0, 0), 0.0);
        assert!(p.cubic.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn log_of_constant_e() {
        let a = Jet3::constant(2, std::f64::consts::E);
        let l = a.ln().unwrap();
        assert!((l.value - 1.0).abs() < 1e-15);
        assert!(l.grad.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn sqrt_of_square_matches_abs_jet() {
        // f = x^2 (1d) at x = 2: sqrt(f) should be the jet of |x| = x there.
        let x = Jet3::coordinate(1, 0, 2.0);
        let f = x.square();
        let s = f.sqrt().unwrap();
        assert!((s.value - 2.0).abs() < 1e-15);
        assert!((s.grad[0] - 1.0).abs() < 1e-14);
        assert!(s.h(0, 0).abs() < 1e-14);
        assert!(s.c(0, 0, 0).abs() < 1e-13);
    }

    #[test]
    fn log_exp_roundtrip() {
        let mut a = Jet3::coordinate(3, 1, 0.4);
        a.grad = vec![0.3, -0.2, 0.9];
        for i in 0..3 {
            for j in 0..3 {
                let v = 0.1 * (i + j) as f64;
                a.set_h(i, j, v);
                for k in 0..3 {
                    let c = 0.05 * (i as f64 - j as f64 + k as f64);
                    // symmetrize
                    let s = |a: usize, b: usize, c0: usize| {
                        let mut v = [a, b, c0];
                        v.sort_unstable();
                        0.02 * (v[0] + 2 * v[1] + 3 * v[2]) as f64
                    };
                    let _ = c;
                    a.set_c(i, j, k, s(i, j, k));
                }
            }
        }
        let back = a.exp().ln().unwrap();
        assert!(a.rel_distance(&back) <= 1e-12);
    }

    #[test]
    fn division_by_zero_jet_fails() {
        let a = Jet3::constant(2, 1.0);
        let b = Jet3::constant(2, 0.0);
        assert!(matches!(a.div(&b), Err(Error::SingularDenominator)));
    }

    #[test]
    fn sqrt_of_negative_reports_value() {
        let a = Jet3::constant(2, -3.0);
        match a.sqrt() {
            Err(Error::SingularArgument { op, value }) => {
                assert_eq!(op, "sqrt");
                assert_eq!(value, -3.0);
            }
            _ => panic!("expected singular argument"),
        }
    }

    #[test]
    fn partial_shifts_orders() {
        // f = x0^2 * x1 at (1, 2): df/dx0 = 2 x0 x1 -> value 4, grad (4, 2)
        let x = Jet3::coordinate(2, 0, 1.0);
        let y = Jet3::coordinate(2, 1, 2.0);
        let f = x.square().mul(&y);
        let d0 = f.partial(0);
        assert_eq!(d0.value, 4.0);
        assert_eq!(d0.grad, vec![4.0, 2.0]);
        assert_eq!(d0.h(0, 1), 2.0);
    }
}
