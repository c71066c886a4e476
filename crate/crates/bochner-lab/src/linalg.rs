//! Dense f64 helpers for the small matrices (dim <= 8) that appear at a point.

use crate::error::{Error, Result};

/// Row-major n x n determinant via LU with partial pivoting.
pub fn det(a: &[f64], n: usize) -> f64 {
    let mut m = a.to_vec();
    let mut sign = 1.0;
    let mut d = 1.0;
    for col in 0..n {
        let mut piv = col;
        for r in col + 1..n {
            if m[r * n + col].abs() > m[piv * n + col].abs() {
                piv = r;
            }
        }
        if m[piv * n + col] == 0.0 {
            return 0.0;
        }
        if piv != col {
            for c in 0..n {
                m.swap(col * n + c, piv * n + c);
            }
            sign = -sign;
        }
        d *= m[col * n + col];
        for r in col + 1..n {
            let f = m[r * n + col] / m[col * n + col];
            for c in col..n {
                m[r * n + c] -= f * m[col * n + c];
            }
        }
    }
    sign * d
}

/// Solves A x = b for square A (row-major), Gaussian elimination with pivoting.
pub fn solve(a: &[f64], b: &[f64], n: usize) -> Result<Vec<f64>> {
    let mut m = a.to_vec();
    let mut rhs = b.to_vec();
    for col in 0..n {
        let mut piv = col;
        for r in col + 1..n {
            if m[r * n + col].abs() > m[piv * n + col].abs() {
                piv = r;
            }
        }
        if m[piv * n + col].abs() < 1e-300 {
            return Err(Error::EnforcementFailed {
                reason: format!("singular linear system at column {col}"),
            });
        }
        if piv != col {
            for c in 0..n {
                m.swap(col * n + c, piv * n + c);
            }
            rhs.swap(col, piv);
        }
        for r in col + 1..n {
            let f = m[r * n + col] / m[col * n + col];
            for c in col..n {
                m[r * n + c] -= f * m[col * n + c];
            }
            rhs[r] -= f * rhs[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let mut acc = rhs[r];
        for c in r + 1..n {
            acc -= m[r * n + c] * x[c];
        }
        x[r] = acc / m[r * n + r];
    }
    Ok(x)
}

/// Leading principal minors; used for the positive-definiteness check.
pub fn leading_minors(a: &[f64], n: usize) -> Vec<f64> {
    (1..=n)
        .map(|k| {
            let sub: Vec<f64> = (0..k)
                .flat_map(|i| (0..k).map(move |j| a[i * n + j]))
                .collect();
            det(&sub, k)
        })
        .collect()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// g-inner product with a row-major metric matrix.
pub fn ip_g(g: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let n = a.len();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += g[i * n + j] * a[i] * b[j];
        }
    }
    s
}

pub fn norm_g(g: &[f64], a: &[f64]) -> f64 {
    ip_g(g, a, a).max(0.0).sqrt()
}
