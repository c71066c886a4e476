//! Nested level-set slicings: adapted frames, induced differential operators,
//! second fundamental forms, the Z-cascade under both normalizations,
//! pointwise divergence enforcement, Y-fields, and PDE-system residuals.
//!
//! Every submanifold operator is realized as an ambient jet expression
//! contracted with projection fields; no intrinsic coordinates on a level set
//! are ever constructed, so each quantity stays exactly differentiable as far
//! as the input jets reach.

use serde::{Deserialize, Serialize};

use crate::curvature::{christoffel, curvature_at, ChristoffelJet, CurvatureAtPoint};
use crate::error::{Error, Result};
use crate::field::{Monomial, ScalarFieldSpec};
use crate::jet::Jet3;
use crate::linalg;
use crate::metric::{eval_metric, random_scene, MetricField, MetricJet, MetricKind};
use crate::rng::Rng;

/// Comass and projected gradients must stay above this; below it operations
/// fail loudly instead of returning amplified noise.
pub const DEGENERACY_THRESHOLD: f64 = 1e-8;

/// Which end of the cascade carries the unit normalization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// |Z_s| = 1.
    UnitTop,
    /// |Z_0| = 1.
    UnitBottom,
}

/// Everything an identity check consumes: dimension, slicing functions,
/// metric, normalization, and the evaluation point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlicingScene {
    pub seed: u64,
    pub n: usize,
    pub s: usize,
    pub metric: MetricField,
    pub u_specs: Vec<ScalarFieldSpec>,
    pub point: Vec<f64>,
    pub normalization: Normalization,
}

impl SlicingScene {
    pub fn random(
        seed: u64,
        n: usize,
        s: usize,
        kind: MetricKind,
        normalization: Normalization,
    ) -> Result<SlicingScene> {
        let (metric, u_specs, point) = random_scene(seed, n, s, kind)?;
        Ok(SlicingScene {
            seed,
            n,
            s,
            metric,
            u_specs,
            point,
            normalization,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<SlicingScene> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Jet-valued contravariant vector (ambient components).
pub type JetVec = Vec<Jet3>;
/// Jet-valued (1,1)-tensor, row index first: `m[i * n + j] = T^i_j`.
pub type JetMat = Vec<Jet3>;

/// Metric-dependent data shared by every rebuild of the same scene point
/// (the divergence enforcement perturbs only the u's).
#[derive(Debug, Clone)]
pub struct MetricData {
    pub g: MetricJet,
    pub gamma: ChristoffelJet,
    pub curv: CurvatureAtPoint,
}

impl MetricData {
    pub fn at(metric: &MetricField, p: &[f64]) -> Result<MetricData> {
        let g = eval_metric(metric, p)?;
        let gamma = christoffel(&g);
        let curv = curvature_at(&g);
        Ok(MetricData { g, gamma, curv })
    }
}

/// Orthonormal frame adapted to the slicing: the s unit normals followed by
/// a tangent completion of Sigma_s.
#[derive(Debug, Clone)]
pub struct AdaptedFrame {
    pub n: usize,
    pub s: usize,
    /// frame[0..s] are nu_1..nu_s; frame[s..n] complete the tangent space.
    pub vectors: Vec<Vec<f64>>,
}

impl AdaptedFrame {
    /// Max deviation of the Gram matrix from the identity w.r.t. g(p).
    pub fn gram_deviation(&self, g0: &[f64]) -> f64 {
        let mut dev: f64 = 0.0;
        for a in 0..self.n {
            for b in 0..self.n {
                let ip = linalg::ip_g(g0, &self.vectors[a], &self.vectors[b]);
                let target = if a == b { 1.0 } else { 0.0 };
                dev = dev.max((ip - target).abs());
            }
        }
        dev
    }
}

/// Fully evaluated slicing at a point: jets of the normals, projections, the
/// cascade norms |Z_m|, the Z-fields, and the adapted frame.
#[derive(Debug, Clone)]
pub struct SceneGeometry {
    pub n: usize,
    pub s: usize,
    pub normalization: Normalization,
    pub p: Vec<f64>,
    pub md: MetricData,
    pub u_jets: Vec<Jet3>,
    /// Ambient gradient fields of the u's.
    pub grad_u: Vec<JetVec>,
    /// Projections P_0..P_s onto the tangent bundles of Sigma_0..Sigma_s.
    pub proj: Vec<JetMat>,
    /// Unit normal fields; normals[m] is nu_{m+1}, the normal of
    /// Sigma_{m+1} inside Sigma_m, equal to Z_m/|Z_m|.
    pub normals: Vec<JetVec>,
    /// Projected gradient fields w_m = P_m grad u_m.
    pub w: Vec<JetVec>,
    /// lambda_m = |P_m grad u_m|.
    pub lambda: Vec<Jet3>,
    /// |Z_0|..|Z_s| as ambient jet scalars under the scene normalization.
    pub znorm: Vec<Jet3>,
    /// Z_0..Z_{s-1}.
    pub zfield: Vec<JetVec>,
    pub comass: f64,
    pub frame: AdaptedFrame,
}

impl SceneGeometry {
    pub fn new(scene: &SlicingScene) -> Result<SceneGeometry> {
        let md = MetricData::at(&scene.metric, &scene.point)?;
        SceneGeometry::with_metric(md, scene)
    }

    /// Builds the u-cascade on top of precomputed metric data.
    pub fn with_metric(md: MetricData, scene: &SlicingScene) -> Result<SceneGeometry> {
        let n = scene.n;
        let s = scene.s;
        if scene.u_specs.len() != s {
            return Err(Error::DimensionMismatch {
                expected: s,
                got: scene.u_specs.len(),
            });
        }
        let p = scene.point.clone();
        let u_jets: Vec<Jet3> = scene
            .u_specs
            .iter()
            .map(|u| u.jet_at(&p))
            .collect::<Result<_>>()?;

        let grad_u: Vec<JetVec> = u_jets.iter().map(|u| raise_grad(&md.g, u)).collect();

        let mut proj: Vec<JetMat> = vec![identity_mat(n)];
        let mut normals: Vec<JetVec> = Vec::with_capacity(s);
        let mut w_fields: Vec<JetVec> = Vec::with_capacity(s);
        let mut lambda: Vec<Jet3> = Vec::with_capacity(s);
        for m in 0..s {
            let w = apply_mat(&proj[m], &grad_u[m]);
            let lam_sq = vec_ip(&md.g, &w, &w);
            if lam_sq.value <= DEGENERACY_THRESHOLD * DEGENERACY_THRESHOLD {
                return Err(Error::DegenerateSlicing {
                    value: lam_sq.value.max(0.0).sqrt(),
                });
            }
            let lam = lam_sq.sqrt()?;
            let lam_inv = lam.recip()?;
            let nu: JetVec = w.iter().map(|c| c.mul(&lam_inv)).collect();
            let nu_flat = lower(&md.g, &nu);
            let mut next = proj[m].clone();
            for i in 0..n {
                for j in 0..n {
                    next[i * n + j] = next[i * n + j].sub(&nu[i].mul(&nu_flat[j]));
                }
            }
            proj.push(next);
            normals.push(nu);
            w_fields.push(w);
            lambda.push(lam);
        }
        let comass = lambda.iter().map(|l| l.value).product::<f64>();
        if comass <= DEGENERACY_THRESHOLD {
            return Err(Error::DegenerateSlicing { value: comass });
        }

        // cascade norms |Z_m|
        let one = Jet3::constant(n, 1.0);
        let mut znorm = vec![one.clone(); s + 1];
        match scene.normalization {
            Normalization::UnitTop => {
                for m in (0..s).rev() {
                    znorm[m] = znorm[m + 1].mul(&lambda[m]);
                }
            }
            Normalization::UnitBottom => {
                for m in 0..s {
                    znorm[m + 1] = znorm[m].div(&lambda[m])?;
                }
            }
        }
        let zfield: Vec<JetVec> = (0..s)
            .map(|m| {
                w_fields[m]
                    .iter()
                    .map(|c| c.mul(&znorm[m + 1]))
                    .collect::<JetVec>()
            })
            .collect();

        let frame = build_frame(&md.g.g0(), n, s, &normals)?;

        Ok(SceneGeometry {
            n,
            s,
            normalization: scene.normalization,
            p,
            md,
            u_jets,
            grad_u,
            proj,
            normals,
            w: w_fields,
            lambda,
            znorm,
            zfield,
            comass,
            frame,
        })
    }

    pub fn g0(&self) -> Vec<f64> {
        self.md.g.g0()
    }

    /// Values of the projection P_m at the point.
    pub fn proj0(&self, m: usize) -> Vec<f64> {
        self.proj[m].iter().map(|j| j.value).collect()
    }

    /// Frame vectors spanning the tangent space of Sigma_m.
    pub fn tangent_frame(&self, m: usize) -> &[Vec<f64>] {
        &self.frame.vectors[m..]
    }

    /// Ambient covariant derivative of a jet vector field:
    /// (nabla V)^i_j = d_j V^i + Gamma^i_{jk} V^k.
    pub fn covariant_deriv(&self, v: &JetVec) -> JetMat {
        let n = self.n;
        let mut out = vec![Jet3::zero(n); n * n];
        for i in 0..n {
            for j in 0..n {
                let mut acc = v[i].partial(j);
                for k in 0..n {
                    acc = acc.add(&self.md.gamma.at(i, j, k).mul(&v[k]));
                }
                out[i * n + j] = acc;
            }
        }
        out
    }

    /// Ambient gradient field of a jet scalar.
    pub fn grad_field(&self, f: &Jet3) -> JetVec {
        raise_grad(&self.md.g, f)
    }

    /// Value-level covariant Hessian of an ambient jet scalar at p.
    pub fn hess0(&self, f: &Jet3) -> Vec<f64> {
        let n = self.n;
        let mut h = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let mut v = f.h(i, j);
                for k in 0..n {
                    v -= self.md.gamma.value(k, i, j) * f.grad[k];
                }
                h[i * n + j] = v;
            }
        }
        h
    }

    /// Value-level ambient gradient (index raised) at p.
    pub fn grad0(&self, f: &Jet3) -> Vec<f64> {
        let n = self.n;
        let ginv0 = self.md.g.ginv0();
        (0..n)
            .map(|i| (0..n).map(|j| ginv0[i * n + j] * f.grad[j]).sum())
            .collect()
    }

    /// Tangential gradient values P_m grad f at p.
    pub fn tangential_grad0(&self, m: usize, f: &Jet3) -> Vec<f64> {
        let n = self.n;
        let p0 = self.proj0(m);
        let amb = self.grad0(f);
        (0..n)
            .map(|i| (0..n).map(|j| p0[i * n + j] * amb[j]).sum())
            .collect()
    }

    /// Mean curvature vector of the codimension-m joint level set at p
    /// (ambient components).
    pub fn mean_curvature_vector(&self, m: usize) -> Vec<f64> {
        let n = self.n;
        let p0 = self.proj0(m);
        let mut h = vec![0.0; n];
        for beta in 0..m {
            let dnu = self.covariant_deriv(&self.normals[beta]);
            let mut div_t = 0.0;
            for i in 0..n {
                for k in 0..n {
                    div_t += p0[i * n + k] * dnu[k * n + i].value;
                }
            }
            for i in 0..n {
                h[i] -= div_t * self.normals[beta][i].value;
            }
        }
        h
    }

    /// Directional derivative of an ambient jet scalar along nu_{m+1} at p.
    pub fn normal_deriv(&self, m: usize, f: &Jet3) -> f64 {
        (0..self.n)
            .map(|i| self.normals[m][i].value * f.grad[i])
            .sum()
    }
}

fn identity_mat(n: usize) -> JetMat {
    (0..n * n)
        .map(|idx| Jet3::constant(n, if idx / n == idx % n { 1.0 } else { 0.0 }))
        .collect()
}

fn apply_mat(m: &JetMat, v: &JetVec) -> JetVec {
    let n = v.len();
    (0..n)
        .map(|i| {
            let mut acc = Jet3::zero(n);
            for j in 0..n {
                acc = acc.add(&m[i * n + j].mul(&v[j]));
            }
            acc
        })
        .collect()
}

fn raise_grad(g: &MetricJet, f: &Jet3) -> JetVec {
    let n = g.dim;
    (0..n)
        .map(|i| {
            let mut acc = Jet3::zero(n);
            for j in 0..n {
                acc = acc.add(&g.ginv(i, j).mul(&f.partial(j)));
            }
            acc
        })
        .collect()
}

fn lower(g: &MetricJet, v: &JetVec) -> JetVec {
    let n = g.dim;
    (0..n)
        .map(|i| {
            let mut acc = Jet3::zero(n);
            for j in 0..n {
                acc = acc.add(&g.g(i, j).mul(&v[j]));
            }
            acc
        })
        .collect()
}

/// g-inner product of two jet vector fields.
pub fn vec_ip(g: &MetricJet, a: &JetVec, b: &JetVec) -> Jet3 {
    let n = g.dim;
    let mut acc = Jet3::zero(n);
    for i in 0..n {
        for j in 0..n {
            acc = acc.add(&g.g(i, j).mul(&a[i].mul(&b[j])));
        }
    }
    acc
}

fn build_frame(g0: &[f64], n: usize, s: usize, normals: &[JetVec]) -> Result<AdaptedFrame> {
    let mut vectors: Vec<Vec<f64>> = normals
        .iter()
        .map(|nu| nu.iter().map(|c| c.value).collect())
        .collect();
    for i in 0..n {
        if vectors.len() == n {
            break;
        }
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        for e in &vectors {
            let ip = linalg::ip_g(g0, &v, e);
            for (vi, ei) in v.iter_mut().zip(e) {
                *vi -= ip * ei;
            }
        }
        let nrm = linalg::norm_g(g0, &v);
        if nrm > 1e-6 {
            v.iter_mut().for_each(|x| *x /= nrm);
            vectors.push(v);
        }
    }
    if vectors.len() != n {
        return Err(Error::DegenerateSlicing { value: 0.0 });
    }
    Ok(AdaptedFrame { n, s, vectors })
}

/// The adapted frame of a scene, checked against the comass precondition.
pub fn adapted_frame(scene: &SlicingScene) -> Result<AdaptedFrame> {
    Ok(SceneGeometry::new(scene)?.frame)
}

/// Tangential gradient, Laplacian, and frame Hessians of the restriction of
/// an ambient scalar to Sigma_m.
#[derive(Debug, Clone)]
pub struct SigmaOps {
    /// Ambient components of the tangential gradient at p.
    pub grad: Vec<f64>,
    pub laplacian: f64,
    /// Intrinsic Hessian in the tangent frame of Sigma_m, row-major
    /// (n - m) x (n - m).
    pub hess: Vec<f64>,
}

/// Induced operators on Sigma_m applied to an ambient jet scalar: the
/// tangential trace of the ambient covariant Hessian plus the mean-curvature
/// correction.
pub fn sigma_ops(geom: &SceneGeometry, m: usize, f: &Jet3) -> Result<SigmaOps> {
    if m > geom.s {
        return Err(Error::Precondition(format!(
            "level {m} exceeds slicing depth {}",
            geom.s
        )));
    }
    let n = geom.n;
    let hess = geom.hess0(f);
    let grad_amb = geom.grad0(f);
    let hvec = geom.mean_curvature_vector(m);
    let tangent = geom.tangent_frame(m);
    let t = tangent.len();

    let hess_bilinear = |a: &[f64], b: &[f64]| -> f64 {
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += hess[i * n + j] * a[i] * b[j];
            }
        }
        acc
    };

    let g0 = geom.g0();
    let mut lap = linalg::ip_g(&g0, &grad_amb, &hvec);
    for e in tangent {
        lap += hess_bilinear(e, e);
    }

    // intrinsic Hessian: ambient Hessian plus second-fundamental-form term
    let dnu: Vec<JetMat> = (0..m)
        .map(|beta| geom.covariant_deriv(&geom.normals[beta]))
        .collect();
    let mut hess_frame = vec![0.0; t * t];
    for a in 0..t {
        for b in 0..t {
            let mut v = hess_bilinear(&tangent[a], &tangent[b]);
            for beta in 0..m {
                // <II(E_a, E_b), nu_{beta+1}> = -<E_b, nabla_{E_a} nu_{beta+1}>
                let mut d = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        let mut low = 0.0;
                        for k in 0..n {
                            low += g0[i * n + k] * tangent[b][k];
                        }
                        d += low * dnu[beta][i * n + j].value * tangent[a][j];
                    }
                }
                let nf = linalg::ip_g(
                    &g0,
                    &grad_amb,
                    &geom.normals[beta]
                        .iter()
                        .map(|c| c.value)
                        .collect::<Vec<_>>(),
                );
                v -= d * nf;
            }
            hess_frame[a * t + b] = v;
        }
    }

    Ok(SigmaOps {
        grad: geom.tangential_grad0(m, f),
        laplacian: lap,
        hess: hess_frame,
    })
}

/// Second fundamental form of Sigma_{m+1} inside Sigma_m, expressed in the
/// orthonormal tangent frame of Sigma_{m+1}, together with its trace.
pub fn fundamental_forms(geom: &SceneGeometry, m: usize) -> Result<(Vec<f64>, f64)> {
    if m >= geom.s {
        return Err(Error::Precondition(format!(
            "no second fundamental form at level {m} of a depth-{} slicing",
            geom.s
        )));
    }
    let n = geom.n;
    let g0 = geom.g0();
    let dnu = geom.covariant_deriv(&geom.normals[m]);
    let tangent = geom.tangent_frame(m + 1);
    let t = tangent.len();
    let mut a_mat = vec![0.0; t * t];
    for (ai, ea) in tangent.iter().enumerate() {
        for (bi, eb) in tangent.iter().enumerate() {
            // A(E_a, E_b) = <nabla_{E_a} nu_{m+1}, E_b>
            let mut v = 0.0;
            for i in 0..n {
                let mut low = 0.0;
                for k in 0..n {
                    low += g0[i * n + k] * eb[k];
                }
                for j in 0..n {
                    v += low * dnu[i * n + j].value * ea[j];
                }
            }
            a_mat[ai * t + bi] = v;
        }
    }
    let h = (0..t).map(|a| a_mat[a * t + a]).sum();
    Ok((a_mat, h))
}

/// Induced curvature of every slice, built recursively from the ambient
/// tensor through the Gauss equation.
#[derive(Debug, Clone)]
pub struct InducedCurvature {
    pub n: usize,
    pub s: usize,
    /// riemann tensors per level in the adapted frame; level m entries are
    /// valid for indices >= m. Full n^4 storage for indexing simplicity.
    pub levels: Vec<Vec<f64>>,
    /// Ric_{Sigma_m}(nu_{m+1}, nu_{m+1}) for m = 0..s-1.
    pub ricci_normal: Vec<f64>,
    /// Gaussian curvature of Sigma_{n-2} when the slicing reaches it.
    pub gauss_codim2: Option<f64>,
}

impl InducedCurvature {
    #[inline]
    pub fn rm(&self, level: usize, a: usize, b: usize, c: usize, d: usize) -> f64 {
        let n = self.n;
        self.levels[level][((a * n + b) * n + c) * n + d]
    }
}

pub fn induced_curvature(geom: &SceneGeometry) -> Result<InducedCurvature> {
    let n = geom.n;
    let s = geom.s;
    // ambient tensor contracted into the adapted frame
    let f = &geom.frame.vectors;
    let mut r0 = vec![0.0; n * n * n * n];
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    r0[((a * n + b) * n + c) * n + d] =
                        geom.md.curv.rm4(&f[a], &f[b], &f[c], &f[d]);
                }
            }
        }
    }
    let mut levels = vec![r0];
    let mut ricci_normal = Vec::with_capacity(s);
    for m in 0..s {
        // Ricci of Sigma_m in its normal direction nu_{m+1} (frame index m)
        let mut ric = 0.0;
        for a in m..n {
            if a != m {
                ric += levels[m][((a * n + m) * n + a) * n + m];
            }
        }
        ricci_normal.push(ric);
        // Gauss step to Sigma_{m+1}
        let (a_mat, _) = fundamental_forms(geom, m)?;
        let t = n - m - 1;
        let aval = |x: usize, y: usize| a_mat[(x - m - 1) * t + (y - m - 1)];
        let mut next = vec![0.0; n * n * n * n];
        for a in m + 1..n {
            for b in m + 1..n {
                for c in m + 1..n {
                    for d in m + 1..n {
                        next[((a * n + b) * n + c) * n + d] =
                            levels[m][((a * n + b) * n + c) * n + d] + aval(a, c) * aval(b, d)
                                - aval(a, d) * aval(b, c);
                    }
                }
            }
        }
        levels.push(next);
    }
    let gauss_codim2 = if s >= n - 2 {
        let a = n - 2;
        let b = n - 1;
        Some(levels[n - 2][((a * n + b) * n + a) * n + b])
    } else {
        None
    };
    Ok(InducedCurvature {
        n,
        s,
        levels,
        ricci_normal,
        gauss_codim2,
    })
}

/// div_{Sigma_m} Z_m as an ambient jet scalar: trace of P_m against the
/// covariant derivative of Z_m.
fn divergence_field(geom: &SceneGeometry, m: usize) -> Jet3 {
    let n = geom.n;
    let dz = geom.covariant_deriv(&geom.zfield[m]);
    let mut acc = Jet3::zero(n);
    for i in 0..n {
        for k in 0..n {
            acc = acc.add(&geom.proj[m][i * n + k].mul(&dz[k * n + i]));
        }
    }
    acc
}

/// Tangential divergence of an arbitrary jet vector field along Sigma_m.
pub fn sigma_divergence(geom: &SceneGeometry, m: usize, v: &JetVec) -> Jet3 {
    let n = geom.n;
    let dv = geom.covariant_deriv(v);
    let mut acc = Jet3::zero(n);
    for i in 0..n {
        for k in 0..n {
            acc = acc.add(&geom.proj[m][i * n + k].mul(&dv[k * n + i]));
        }
    }
    acc
}

/// (div_{Sigma_m} Z_m, nabla^{Sigma_m}_{nu_{m+1}} div_{Sigma_m} Z_m) at p.
pub fn divergence_data(geom: &SceneGeometry, m: usize) -> Result<(f64, f64)> {
    if m >= geom.s {
        return Err(Error::Precondition(format!(
            "no Z-field at level {m} of a depth-{} slicing",
            geom.s
        )));
    }
    let d = divergence_field(geom, m);
    Ok((d.value, geom.normal_deriv(m, &d)))
}

/// PDE-system residuals of the scene under its normalization:
/// UnitTop:    r_m = lap_{Sigma_m} u_m + sum_{k>m} <grad u_m, grad log lambda_k>
/// UnitBottom: r_m = lap_{Sigma_m} u_m - sum_{k<=m} <grad u_m, grad log lambda_k>
/// with all gradients tangential to Sigma_m.
pub fn pde_residuals(geom: &SceneGeometry) -> Result<Vec<f64>> {
    pde_residuals_impl(geom, true)
}

/// Variant with the bare lambda gradient instead of the logarithmic one,
/// matching the alternative display of the four-dimensional system.
pub fn pde_residuals_nolog_variant(geom: &SceneGeometry) -> Result<Vec<f64>> {
    pde_residuals_impl(geom, false)
}

fn pde_residuals_impl(geom: &SceneGeometry, log_form: bool) -> Result<Vec<f64>> {
    let s = geom.s;
    let g0 = geom.g0();
    let mut out = Vec::with_capacity(s);
    for m in 0..s {
        let ops = sigma_ops(geom, m, &geom.u_jets[m])?;
        let grad_um = &ops.grad;
        let mut acc = ops.laplacian;
        let range: Box<dyn Iterator<Item = usize>> = match geom.normalization {
            Normalization::UnitTop => Box::new(m + 1..s),
            Normalization::UnitBottom => Box::new(0..=m),
        };
        let sign = match geom.normalization {
            Normalization::UnitTop => 1.0,
            Normalization::UnitBottom => -1.0,
        };
        for k in range {
            let lam_term = if log_form {
                geom.lambda[k].ln()?
            } else {
                geom.lambda[k].clone()
            };
            let grad_lam = geom.tangential_grad0(m, &lam_term);
            acc += sign * linalg::ip_g(&g0, grad_um, &grad_lam);
        }
        out.push(acc);
    }
    Ok(out)
}

/// The divergence-free Y-fields Y_m = Z_m |Z_m|^{-1} |Z_0| at p, plus the
/// top-level direction when the slicing is full depth.
#[derive(Debug, Clone)]
pub struct YFields {
    pub vectors: Vec<Vec<f64>>,
    pub norms: Vec<f64>,
    /// Pairwise g-inner products, row-major over the returned vectors.
    pub gram: Vec<f64>,
    pub z0_norm: f64,
}

pub fn y_fields(geom: &SceneGeometry) -> YFields {
    let z0 = geom.znorm[0].value;
    let mut vectors: Vec<Vec<f64>> = geom
        .normals
        .iter()
        .map(|nu| nu.iter().map(|c| c.value * z0).collect())
        .collect();
    if geom.s == geom.n - 1 {
        // Z_{n-1} is tangent to the one-dimensional Sigma_{n-1}
        vectors.push(
            geom.frame.vectors[geom.n - 1]
                .iter()
                .map(|x| x * z0)
                .collect(),
        );
    }
    let g0 = geom.g0();
    let norms: Vec<f64> = vectors.iter().map(|v| linalg::norm_g(&g0, v)).collect();
    let k = vectors.len();
    let mut gram = vec![0.0; k * k];
    for i in 0..k {
        for j in 0..k {
            gram[i * k + j] = linalg::ip_g(&g0, &vectors[i], &vectors[j]);
        }
    }
    YFields {
        vectors,
        norms,
        gram,
        z0_norm: z0,
    }
}

/// Witness for the weighted-divergence lemma: a field W tangential to
/// Sigma_{m+1} with div_{Sigma_{m+1}} W = 0 at p must satisfy
/// div_{Sigma_m}(lambda_m W) = 0 at p.
#[derive(Debug, Clone)]
pub struct WitnessReport {
    /// div_{Sigma_{m+1}} W at p after the correction (should be ~0).
    pub inner_divergence: f64,
    /// div_{Sigma_m}(lambda_m W) at p.
    pub weighted_divergence: f64,
    /// Residual relative to the field scale.
    pub residual: f64,
    pub field_scale: f64,
}

pub fn lemma_divergence_witness(
    geom: &SceneGeometry,
    m: usize,
    seed: u64,
) -> Result<WitnessReport> {
    lemma_divergence_witness_with_defect(geom, m, seed, 0.0)
}

/// Same construction, but leaves a prescribed inner divergence `delta` in
/// place; the weighted divergence then equals lambda_m * delta, which probes
/// that the hypothesis is necessary.
pub fn lemma_divergence_witness_with_defect(
    geom: &SceneGeometry,
    m: usize,
    seed: u64,
    delta: f64,
) -> Result<WitnessReport> {
    if m >= geom.s {
        return Err(Error::Precondition(format!(
            "witness level {m} needs a slicing of depth > {m}"
        )));
    }
    let n = geom.n;
    let mut rng = Rng::new(seed ^ 0x5eed_cafe);
    // random ambient linear field, then projected to stay tangential nearby
    let mut raw: JetVec = Vec::with_capacity(n);
    for i in 0..n {
        let mut c = Jet3::constant(n, rng.symmetric(1.0));
        for j in 0..n {
            let slope = rng.symmetric(1.0);
            c.grad[j] = slope;
        }
        let _ = i;
        raw.push(c);
    }
    let tangential = apply_mat(&geom.proj[m + 1], &raw);
    let d0 = sigma_divergence(geom, m + 1, &tangential).value;
    // radial correction: div_{Sigma_{m+1}} (P_{m+1}(x - p)) = n - m - 1 at p
    let radial: JetVec = (0..n).map(|i| Jet3::coordinate(n, i, 0.0)).collect();
    let radial_t = apply_mat(&geom.proj[m + 1], &radial);
    let c = (d0 - delta) / (n - m - 1) as f64;
    let w: JetVec = tangential
        .iter()
        .zip(&radial_t)
        .map(|(t, r)| t.sub(&r.scale(c)))
        .collect();
    let inner = sigma_divergence(geom, m + 1, &w).value;
    let weighted: JetVec = w.iter().map(|c| c.mul(&geom.lambda[m])).collect();
    let weighted_div = sigma_divergence(geom, m, &weighted).value;
    let g0 = geom.g0();
    let w0: Vec<f64> = w.iter().map(|c| c.value).collect();
    let scale = linalg::norm_g(&g0, &w0).max(geom.lambda[m].value).max(1.0);
    let expected = geom.lambda[m].value * delta;
    Ok(WitnessReport {
        inner_divergence: inner,
        weighted_divergence: weighted_div,
        residual: (weighted_div - expected).abs() / scale,
        field_scale: scale,
    })
}

/// Result of the pointwise divergence enforcement.
#[derive(Debug, Clone)]
pub struct Enforcement {
    pub scene: SlicingScene,
    /// Quadratic coefficients applied per level (zero when untouched).
    pub coefficients: Vec<f64>,
    /// Coordinate square used per level.
    pub directions: Vec<usize>,
    /// Residual divergences after enforcement.
    pub residuals: Vec<f64>,
}

fn divergence_residuals(geom: &SceneGeometry) -> Result<Vec<f64>> {
    (0..geom.s)
        .map(|m| Ok(divergence_data(geom, m)?.0))
        .collect()
}

fn add_square(spec: &ScalarFieldSpec, p: &[f64], coord: usize, coeff: f64) -> ScalarFieldSpec {
    let mut exps = vec![0u32; p.len()];
    exps[coord] = 2;
    let square = ScalarFieldSpec::Polynomial {
        center: p.to_vec(),
        monomials: vec![Monomial {
            coeff,
            exponents: exps,
        }],
    };
    match spec {
        ScalarFieldSpec::Sum(parts) => {
            let mut parts = parts.clone();
            parts.push(square);
            ScalarFieldSpec::Sum(parts)
        }
        other => ScalarFieldSpec::Sum(vec![other.clone(), square]),
    }
}

/// Adds quadratic terms c_m (x_{t_m} - p_{t_m})^2 to the u's so that
/// div_{Sigma_m} Z_m vanishes at p for every level. Corrections have zero
/// gradient at p, so the comass and the whole first-order frame are
/// untouched. The residuals are exactly linear in the coefficients, so one
/// joint linear solve lands every level simultaneously; candidate coordinate
/// squares are tried tangential-first and the solve retries with the next
/// candidate when a sensitivity column degenerates.
pub fn enforce_pointwise_divfree(scene: &SlicingScene) -> Result<Enforcement> {
    let md = MetricData::at(&scene.metric, &scene.point)?;
    let base = SceneGeometry::with_metric(md.clone(), scene)?;
    let s = scene.s;
    let n = scene.n;
    let r0 = divergence_residuals(&base)?;
    let scale = base
        .znorm
        .iter()
        .map(|z| z.value.abs())
        .fold(1.0f64, f64::max);
    if r0.iter().all(|r| r.abs() <= 1e-12 * scale) {
        return Ok(Enforcement {
            scene: scene.clone(),
            coefficients: vec![0.0; s],
            directions: vec![0; s],
            residuals: r0,
        });
    }

    // candidate coordinates per level, best tangential alignment first
    let g0 = base.g0();
    let candidates: Vec<Vec<usize>> = (0..s)
        .map(|m| {
            let p0 = base.proj0(m + 1);
            let mut scored: Vec<(f64, usize)> = (0..n)
                .map(|t| {
                    let col: Vec<f64> = (0..n).map(|i| p0[i * n + t]).collect();
                    (linalg::norm_g(&g0, &col), t)
                })
                .collect();
            scored.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
            scored.into_iter().map(|(_, t)| t).collect()
        })
        .collect();

    let mut choice = vec![0usize; s];
    'attempts: for attempt in 0..(3 * n) {
        let dirs: Vec<usize> = (0..s).map(|m| candidates[m][choice[m] % n]).collect();
        // sensitivity matrix by unit-coefficient re-evaluation; exact because
        // the residuals are linear in the quadratic coefficients
        let mut mat = vec![0.0; s * s];
        for j in 0..s {
            let mut probe = scene.clone();
            probe.u_specs[j] = add_square(&probe.u_specs[j], &scene.point, dirs[j], 1.0);
            let geom = SceneGeometry::with_metric(md.clone(), &probe)?;
            let rj = divergence_residuals(&geom)?;
            for m in 0..s {
                mat[m * s + j] = rj[m] - r0[m];
            }
        }
        // degenerate column: rotate that level's candidate and retry
        for j in 0..s {
            let col_norm: f64 = (0..s).map(|m| mat[m * s + j].abs()).sum();
            if col_norm < 1e-10 * scale {
                choice[j] += 1;
                if attempt + 1 < 3 * n {
                    continue 'attempts;
                }
                return Err(Error::EnforcementFailed {
                    reason: format!("no usable quadratic direction at level {j}"),
                });
            }
        }
        let neg_r: Vec<f64> = r0.iter().map(|r| -r).collect();
        let coeff = match linalg::solve(&mat, &neg_r, s) {
            Ok(c) => c,
            Err(_) => {
                choice.iter_mut().for_each(|c| *c += 1);
                continue 'attempts;
            }
        };
        let mut adjusted = scene.clone();
        for m in 0..s {
            if coeff[m] != 0.0 {
                adjusted.u_specs[m] =
                    add_square(&adjusted.u_specs[m], &scene.point, dirs[m], coeff[m]);
            }
        }
        let geom = SceneGeometry::with_metric(md.clone(), &adjusted)?;
        let residuals = divergence_residuals(&geom)?;
        if residuals.iter().any(|r| r.abs() > 1e-9 * scale) {
            choice.iter_mut().for_each(|c| *c += 1);
            continue 'attempts;
        }
        return Ok(Enforcement {
            scene: adjusted,
            coefficients: coeff,
            directions: dirs,
            residuals,
        });
    }
    Err(Error::EnforcementFailed {
        reason: "exhausted quadratic direction candidates".into(),
    })
}
