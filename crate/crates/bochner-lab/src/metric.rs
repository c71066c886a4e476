//! Metric tensors on chart domains and their order-3 jets, plus the
//! randomized curved scenes used by the identity trials.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Monomial, ScalarFieldSpec, TrigMode};
use crate::jet::Jet3;
use crate::linalg;
use crate::rng::Rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum MetricField {
    Flat {
        dim: usize,
    },
    Conformal {
        dim: usize,
        phi: ScalarFieldSpec,
    },
    DiagonalWarped {
        dim: usize,
        warps: Vec<ScalarFieldSpec>,
    },
    /// g = delta + epsilon * h(x) with h symmetric (row-major dim x dim).
    PerturbedFlat {
        dim: usize,
        h: Vec<ScalarFieldSpec>,
        epsilon: f64,
    },
}

/// Metric kind selector for the random scene generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    Flat,
    Conformal,
    DiagonalWarped,
    PerturbedFlat,
}

impl MetricKind {
    pub const ALL_CURVED: [MetricKind; 3] = [
        MetricKind::Conformal,
        MetricKind::DiagonalWarped,
        MetricKind::PerturbedFlat,
    ];

    pub fn parse(s: &str) -> Result<MetricKind> {
        match s {
            "flat" => Ok(MetricKind::Flat),
            "conformal" => Ok(MetricKind::Conformal),
            "warped" | "diagonal_warped" => Ok(MetricKind::DiagonalWarped),
            "perturbed" | "perturbed_flat" => Ok(MetricKind::PerturbedFlat),
            other => Err(Error::Config {
                key: "metric".into(),
                reason: format!("unknown metric kind `{other}`"),
            }),
        }
    }
}

impl MetricField {
    pub fn dim(&self) -> usize {
        match self {
            MetricField::Flat { dim }
            | MetricField::Conformal { dim, .. }
            | MetricField::DiagonalWarped { dim, .. }
            | MetricField::PerturbedFlat { dim, .. } => *dim,
        }
    }
}

/// Jets of g_ij and of the inverse g^ij at a point.
#[derive(Debug, Clone)]
pub struct MetricJet {
    pub dim: usize,
    pub entries: Vec<Jet3>,
    pub inv: Vec<Jet3>,
}

impl MetricJet {
    #[inline]
    pub fn g(&self, i: usize, j: usize) -> &Jet3 {
        &self.entries[i * self.dim + j]
    }

    #[inline]
    pub fn ginv(&self, i: usize, j: usize) -> &Jet3 {
        &self.inv[i * self.dim + j]
    }

    /// Value matrix g(p), row-major.
    pub fn g0(&self) -> Vec<f64> {
        self.entries.iter().map(|j| j.value).collect()
    }

    pub fn ginv0(&self) -> Vec<f64> {
        self.inv.iter().map(|j| j.value).collect()
    }

    /// Max relative deviation of g * g^-1 from the identity across jet orders.
    pub fn inverse_defect(&self) -> f64 {
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let mut acc = Jet3::zero(n);
                for k in 0..n {
                    acc = acc.add(&self.g(i, k).mul(self.ginv(k, j)));
                }
                let target = Jet3::constant(n, if i == j { 1.0 } else { 0.0 });
                worst = worst.max(acc.rel_distance(&target));
            }
        }
        worst
    }
}

/// Inverts a symmetric matrix of jets by Gauss-Jordan elimination in jet
/// arithmetic; exact through order 3.
fn invert_jet_matrix(entries: &[Jet3], n: usize) -> Result<Vec<Jet3>> {
    let dim = entries[0].dim;
    let mut a: Vec<Jet3> = entries.to_vec();
    let mut inv: Vec<Jet3> = (0..n * n)
        .map(|idx| Jet3::constant(dim, if idx / n == idx % n { 1.0 } else { 0.0 }))
        .collect();
    for col in 0..n {
        let mut piv = col;
        for r in col + 1..n {
            if a[r * n + col].value.abs() > a[piv * n + col].value.abs() {
                piv = r;
            }
        }
        if a[piv * n + col].value.abs() < 1e-300 {
            return Err(Error::NotPositiveDefinite {
                index: col,
                minor: 0.0,
            });
        }
        if piv != col {
            for c in 0..n {
                a.swap(col * n + c, piv * n + c);
                inv.swap(col * n + c, piv * n + c);
            }
        }
        let pivot = a[col * n + col].clone();
        let pinv = pivot.recip()?;
        for c in 0..n {
            a[col * n + c] = a[col * n + c].mul(&pinv);
            inv[col * n + c] = inv[col * n + c].mul(&pinv);
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = a[r * n + col].clone();
            if f.max_abs() == 0.0 {
                continue;
            }
            for c in 0..n {
                a[r * n + c] = a[r * n + c].sub(&f.mul(&a[col * n + c]));
                inv[r * n + c] = inv[r * n + c].sub(&f.mul(&inv[col * n + c]));
            }
        }
    }
    Ok(inv)
}

/// Evaluates the metric to jets at `p`, propagating the inverse through jet
/// arithmetic. Rejects evaluation points where g is not positive definite.
pub fn eval_metric(metric: &MetricField, p: &[f64]) -> Result<MetricJet> {
    let n = metric.dim();
    if p.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: p.len(),
        });
    }
    let mut entries = vec![Jet3::zero(n); n * n];
    match metric {
        MetricField::Flat { .. } => {
            for i in 0..n {
                entries[i * n + i] = Jet3::constant(n, 1.0);
            }
        }
        MetricField::Conformal { phi, .. } => {
            let factor = phi.jet_at(p)?.scale(2.0).exp();
            for i in 0..n {
                entries[i * n + i] = factor.clone();
            }
        }
        MetricField::DiagonalWarped { warps, .. } => {
            if warps.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: warps.len(),
                });
            }
            for i in 0..n {
                entries[i * n + i] = warps[i].jet_at(p)?.square();
            }
        }
        MetricField::PerturbedFlat { h, epsilon, .. } => {
            for i in 0..n {
                for j in 0..n {
                    let mut e = h[i * n + j].jet_at(p)?.scale(*epsilon);
                    if i == j {
                        e = e.add_scalar(1.0);
                    }
                    entries[i * n + j] = e;
                }
            }
            // symmetrize exactly against spec asymmetries
            for i in 0..n {
                for j in 0..i {
                    let avg = entries[i * n + j].add(&entries[j * n + i]).scale(0.5);
                    entries[i * n + j] = avg.clone();
                    entries[j * n + i] = avg;
                }
            }
        }
    }
    let values: Vec<f64> = entries.iter().map(|j| j.value).collect();
    let minors = linalg::leading_minors(&values, n);
    for (k, &m) in minors.iter().enumerate() {
        if m <= 0.0 {
            return Err(Error::NotPositiveDefinite {
                index: k + 1,
                minor: m,
            });
        }
    }
    let inv = invert_jet_matrix(&entries, n)?;
    Ok(MetricJet {
        dim: n,
        entries,
        inv,
    })
}

fn random_trig(rng: &mut Rng, dim: usize, modes: usize, amp: f64) -> ScalarFieldSpec {
    let mut out = Vec::with_capacity(modes);
    for _ in 0..modes {
        let mut freq = vec![0i32; dim];
        while freq.iter().all(|&f| f == 0) {
            for f in freq.iter_mut() {
                *f = rng.int_range(-1, 1) as i32;
            }
        }
        out.push(TrigMode {
            freq,
            cos_amp: rng.symmetric(amp),
            sin_amp: rng.symmetric(amp),
        });
    }
    ScalarFieldSpec::TrigPolynomial { modes: out }
}

/// Random quadratic + cubic polynomial centered at `p` (zero value and zero
/// gradient there), amplitude `amp`.
fn random_centered_poly(rng: &mut Rng, p: &[f64], amp: f64) -> ScalarFieldSpec {
    let dim = p.len();
    let mut monomials = Vec::new();
    for i in 0..dim {
        for j in i..dim {
            let mut exps = vec![0u32; dim];
            exps[i] += 1;
            exps[j] += 1;
            monomials.push(Monomial {
                coeff: rng.symmetric(amp),
                exponents: exps,
            });
        }
    }
    for _ in 0..dim {
        let mut exps = vec![0u32; dim];
        for _ in 0..3 {
            exps[rng.below(dim)] += 1;
        }
        monomials.push(Monomial {
            coeff: rng.symmetric(amp),
            exponents: exps,
        });
    }
    ScalarFieldSpec::Polynomial {
        center: p.to_vec(),
        monomials,
    }
}

pub const U_AMPLITUDE: f64 = 0.1;
pub const METRIC_AMPLITUDE: f64 = 0.05;

/// Deterministic random scene: a metric, `s` slicing functions whose linear
/// parts are distinct coordinates plus small centered quadratic/cubic terms,
/// and an evaluation point. The construction keeps the comass bounded away
/// from zero at the point and retries with shrunk amplitude if the metric
/// fails the positivity check there.
pub fn random_scene(
    seed: u64,
    n: usize,
    s: usize,
    kind: MetricKind,
) -> Result<(MetricField, Vec<ScalarFieldSpec>, Vec<f64>)> {
    assert!((2..=6).contains(&n), "dimension out of range");
    assert!((1..n).contains(&s), "need 1 <= s <= n-1");
    let mut rng = Rng::new(seed ^ 0xb0c4_17e5);
    let p: Vec<f64> = (0..n)
        .map(|_| rng.range(0.0, std::f64::consts::TAU))
        .collect();

    let u: Vec<ScalarFieldSpec> = (0..s)
        .map(|m| {
            ScalarFieldSpec::Sum(vec![
                ScalarFieldSpec::Coordinate(m),
                random_centered_poly(&mut rng, &p, U_AMPLITUDE),
            ])
        })
        .collect();

    let mut eps = METRIC_AMPLITUDE;
    for retry in 0..100 {
        let mut mrng = rng.fork(retry as u64 + 1);
        let metric = match kind {
            MetricKind::Flat => MetricField::Flat { dim: n },
            MetricKind::Conformal => MetricField::Conformal {
                dim: n,
                phi: random_trig(&mut mrng, n, 2, eps),
            },
            MetricKind::DiagonalWarped => MetricField::DiagonalWarped {
                dim: n,
                warps: (0..n)
                    .map(|_| {
                        ScalarFieldSpec::Sum(vec![
                            ScalarFieldSpec::constant(1.0),
                            random_trig(&mut mrng, n, 1, eps),
                        ])
                    })
                    .collect(),
            },
            MetricKind::PerturbedFlat => {
                let mut h = vec![ScalarFieldSpec::zero(); n * n];
                for i in 0..n {
                    for j in i..n {
                        let f = random_trig(&mut mrng, n, 1, 1.0);
                        h[i * n + j] = f.clone();
                        h[j * n + i] = f;
                    }
                }
                MetricField::PerturbedFlat {
                    dim: n,
                    h,
                    epsilon: eps,
                }
            }
        };
        if eval_metric(&metric, &p).is_ok() {
            return Ok((metric, u, p));
        }
        eps *= 0.5;
    }
    Err(Error::GenerationFailed { retries: 100 })
}
