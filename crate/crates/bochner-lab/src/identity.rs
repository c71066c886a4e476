//! Two-sided numeric evaluation of every displayed identity and inequality:
//! one side built from Laplacians of ambient jet scalars, the other from
//! curvature, fundamental forms, and divergence data, with nothing moved
//! across sides before comparison.

use serde::{Deserialize, Serialize};

use crate::curvature::intermediate_curvature;
use crate::error::{Error, Result};
use crate::jet::Jet3;
use crate::linalg;
use crate::slicing::{
    divergence_data, fundamental_forms, induced_curvature, sigma_ops, Normalization, SceneGeometry,
};

pub const EQUALITY_TOLERANCE: f64 = 1e-8;
pub const INEQUALITY_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, PartialOrd, Ord)]
pub enum IdentityName {
    LemmaH,
    LemmaHGeneral,
    LemmaAH,
    LemmaMain,
    CorollaryMain,
    TheoremMainGeneral,
    TheoremMainInequality,
    TheoremSpinorsCompensated,
    TheoremIntermediate,
    IteratedGaussFull,
    IteratedGaussCodim2,
    SternLocal,
    ClassicalBochner,
}

impl IdentityName {
    pub const EQUALITIES: [IdentityName; 11] = [
        IdentityName::LemmaH,
        IdentityName::LemmaHGeneral,
        IdentityName::LemmaAH,
        IdentityName::LemmaMain,
        IdentityName::CorollaryMain,
        IdentityName::TheoremMainGeneral,
        IdentityName::TheoremIntermediate,
        IdentityName::IteratedGaussFull,
        IdentityName::IteratedGaussCodim2,
        IdentityName::SternLocal,
        IdentityName::ClassicalBochner,
    ];

    pub fn is_level_identity(self) -> bool {
        matches!(
            self,
            IdentityName::LemmaH
                | IdentityName::LemmaHGeneral
                | IdentityName::LemmaAH
                | IdentityName::LemmaMain
                | IdentityName::CorollaryMain
        )
    }
}

/// Named identity check outcome with both sides, the residual, and the
/// effective tolerance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IdentityReport {
    pub name: IdentityName,
    pub level: Option<usize>,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub relative: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub inequality: bool,
    pub variant: String,
}

impl IdentityReport {
    fn equality(
        name: IdentityName,
        level: Option<usize>,
        lhs: f64,
        rhs: f64,
        tolerance: f64,
        variant: String,
    ) -> IdentityReport {
        let residual = lhs - rhs;
        let relative = residual.abs() / lhs.abs().max(rhs.abs()).max(1.0);
        IdentityReport {
            name,
            level,
            lhs,
            rhs,
            residual,
            relative,
            tolerance,
            passed: relative <= tolerance,
            inequality: false,
            variant,
        }
    }

    fn inequality(
        name: IdentityName,
        lhs: f64,
        rhs: f64,
        floor: f64,
        variant: String,
    ) -> IdentityReport {
        let residual = lhs - rhs;
        let relative = residual.abs() / lhs.abs().max(rhs.abs()).max(1.0);
        IdentityReport {
            name,
            level: None,
            lhs,
            rhs,
            residual,
            relative,
            tolerance: floor,
            passed: residual >= -floor,
            inequality: true,
            variant,
        }
    }
}

/// Inequality outcome together with the nonnegative slack decomposition.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InequalityOutcome {
    pub report: IdentityReport,
    /// Individually nonnegative terms whose sum is the slack.
    pub slack_terms: Vec<f64>,
    /// | (lhs - rhs) - sum(slack_terms) | relative to scale.
    pub decomposition_residual: f64,
}

/// All per-level and global scalars the identity formulas consume, evaluated
/// once per scene.
pub struct IdentityTerms {
    pub s: usize,
    /// lap_{Sigma_m} log|Z_m| for m = 0..=s.
    pub lap_log_z: Vec<f64>,
    /// grad^{Sigma_m}_{nu_{m+1}} log|Z_m| for m = 0..s-1.
    pub normal_deriv_log_z: Vec<f64>,
    /// |grad_{Sigma_m} log|Z_m||^2 (tangential to Sigma_m) for m = 0..=s.
    pub grad_log_z_sq: Vec<f64>,
    /// A_{Sigma_{m+1}} Frobenius norm squared and trace.
    pub a_sq: Vec<f64>,
    pub h: Vec<f64>,
    /// Ric_{Sigma_m}(nu_{m+1}, nu_{m+1}).
    pub ricci_normal: Vec<f64>,
    /// div_{Sigma_m} Z_m and its nu_{m+1}-derivative.
    pub div_z: Vec<f64>,
    pub div_z_deriv: Vec<f64>,
    /// |Z_m|(p) for m = 0..=s.
    pub z_norm: Vec<f64>,
    /// |nabla_{Sigma_m} nu-hat_m|^2, the full covariant-derivative norm of
    /// the unit cascade direction within Sigma_m.
    pub nu_grad_sq: Vec<f64>,
    /// <grad_{Sigma_{m+1}} log lambda_m, grad_{Sigma_{m+1}} log|Z_{m+1}|>.
    pub cross_log: Vec<f64>,
    /// Same with the bare |Z_{m+1}| gradient instead of the log.
    pub cross_bare: Vec<f64>,
    /// |grad_{Sigma_{m+1}} log|Z_{m+1}||^2 for m = 0..s-1.
    pub grad_log_z_next_sq: Vec<f64>,
    /// Ambient laplacian of |Z_0|.
    pub lap_z0: f64,
    /// Full |nabla Z_0|^2 (covariant derivative of the Z_0 field).
    pub grad_z0_field_sq: f64,
    pub scal: f64,
    pub gauss_codim2: Option<f64>,
    /// Conditioning: max(1, max |A|, 1/comass); scales tolerances.
    pub conditioning: f64,
}

impl IdentityTerms {
    pub fn new(geom: &SceneGeometry) -> Result<IdentityTerms> {
        let s = geom.s;
        let n = geom.n;
        let g0 = geom.g0();
        let log_z: Vec<Jet3> = geom.znorm.iter().map(|z| z.ln()).collect::<Result<_>>()?;
        let mut lap_log_z = Vec::with_capacity(s + 1);
        let mut grad_log_z_sq = Vec::with_capacity(s + 1);
        for m in 0..=s {
            lap_log_z.push(sigma_ops(geom, m, &log_z[m])?.laplacian);
            let tg = geom.tangential_grad0(m, &log_z[m]);
            grad_log_z_sq.push(linalg::ip_g(&g0, &tg, &tg));
        }
        let ind = induced_curvature(geom)?;
        let mut normal_deriv_log_z = Vec::with_capacity(s);
        let mut a_sq = Vec::with_capacity(s);
        let mut h = Vec::with_capacity(s);
        let mut div_z = Vec::with_capacity(s);
        let mut div_z_deriv = Vec::with_capacity(s);
        let mut nu_grad_sq = Vec::with_capacity(s);
        let mut cross_log = Vec::with_capacity(s);
        let mut cross_bare = Vec::with_capacity(s);
        let mut grad_log_z_next_sq = Vec::with_capacity(s);
        let mut max_a: f64 = 0.0;
        for m in 0..s {
            normal_deriv_log_z.push(geom.normal_deriv(m, &log_z[m]));
            let (a_mat, tr) = fundamental_forms(geom, m)?;
            let frob: f64 = a_mat.iter().map(|x| x * x).sum();
            max_a = max_a.max(frob.sqrt());
            a_sq.push(frob);
            h.push(tr);
            let (d, dd) = divergence_data(geom, m)?;
            div_z.push(d);
            div_z_deriv.push(dd);

            // |nabla_{Sigma_m} nu|^2 over the tangent frame of Sigma_m
            let dnu = geom.covariant_deriv(&geom.normals[m]);
            let tangent = geom.tangent_frame(m);
            let mut acc = 0.0;
            for ea in tangent {
                for eb in tangent {
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
                    acc += v * v;
                }
            }
            nu_grad_sq.push(acc);

            let log_lam = geom.lambda[m].ln()?;
            let tg_lam = geom.tangential_grad0(m + 1, &log_lam);
            let tg_log_next = geom.tangential_grad0(m + 1, &log_z[m + 1]);
            let tg_bare_next = geom.tangential_grad0(m + 1, &geom.znorm[m + 1]);
            cross_log.push(linalg::ip_g(&g0, &tg_lam, &tg_log_next));
            cross_bare.push(linalg::ip_g(&g0, &tg_lam, &tg_bare_next));
            grad_log_z_next_sq.push(linalg::ip_g(&g0, &tg_log_next, &tg_log_next));
        }
        let lap_z0 = sigma_ops(geom, 0, &geom.znorm[0])?.laplacian;

        // full covariant-derivative norm of the Z_0 field
        let dz0 = geom.covariant_deriv(&geom.zfield[0]);
        let ginv0 = geom.md.g.ginv0();
        let mut grad_z0_field_sq = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        grad_z0_field_sq += g0[i * n + k]
                            * ginv0[j * n + l]
                            * dz0[i * n + j].value
                            * dz0[k * n + l].value;
                    }
                }
            }
        }

        Ok(IdentityTerms {
            s,
            lap_log_z,
            normal_deriv_log_z,
            grad_log_z_sq,
            a_sq,
            h,
            ricci_normal: ind.ricci_normal,
            div_z,
            div_z_deriv,
            z_norm: geom.znorm.iter().map(|z| z.value).collect(),
            nu_grad_sq,
            cross_log,
            cross_bare,
            grad_log_z_next_sq,
            lap_z0,
            grad_z0_field_sq,
            scal: geom.md.curv.scal,
            gauss_codim2: ind.gauss_codim2,
            conditioning: max_a.max(1.0 / geom.comass).max(1.0),
        })
    }

    fn tolerance(&self) -> f64 {
        EQUALITY_TOLERANCE * self.conditioning
    }

    fn floor(&self) -> f64 {
        INEQUALITY_FLOOR * self.conditioning
    }

    /// Divergence precondition for the identities that assume enforcement.
    fn require_divfree(&self) -> Result<()> {
        let scale = self.z_norm.iter().fold(1.0f64, |m, z| m.max(z.abs()));
        for (m, d) in self.div_z.iter().enumerate() {
            if d.abs() > 1e-8 * scale {
                return Err(Error::Precondition(format!(
                    "div_Sigma Z_{m} = {d} at the point; enforce divergences first"
                )));
            }
        }
        Ok(())
    }
}

/// Per-level identities: the mean-curvature lemma (with and without the
/// divergence hypothesis), the A-H identity, the main formula, and its
/// corollary form.
pub fn check_level_identity(
    geom: &SceneGeometry,
    terms: &IdentityTerms,
    m: usize,
    name: IdentityName,
) -> Result<IdentityReport> {
    if !name.is_level_identity() {
        return Err(Error::WrongScope {
            identity: "check_level_identity",
            requirement: format!("{name:?} is a global identity"),
        });
    }
    if m >= geom.s {
        return Err(Error::Precondition(format!(
            "level {m} out of range for s = {}",
            geom.s
        )));
    }
    if name != IdentityName::LemmaHGeneral {
        terms.require_divfree()?;
    }
    let tol = terms.tolerance();
    let report = match name {
        IdentityName::LemmaH => IdentityReport::equality(
            name,
            Some(m),
            terms.h[m],
            -terms.normal_deriv_log_z[m],
            tol,
            String::new(),
        ),
        IdentityName::LemmaHGeneral => IdentityReport::equality(
            name,
            Some(m),
            -terms.normal_deriv_log_z[m],
            terms.h[m] - terms.div_z[m] / terms.z_norm[m],
            tol,
            "no divergence hypothesis; div term retained".into(),
        ),
        IdentityName::LemmaAH => {
            let lhs = terms.a_sq[m] - terms.h[m] * terms.h[m];
            let common = terms.nu_grad_sq[m] + terms.grad_log_z_next_sq[m] - terms.grad_log_z_sq[m];
            let rhs_log = common + 2.0 * terms.cross_log[m];
            let rhs_bare = common + 2.0 * terms.cross_bare[m];
            let res_log = (lhs - rhs_log).abs();
            let res_bare = (lhs - rhs_bare).abs();
            let variant = format!(
                "log-gradient variant residual {res_log:.3e}, bare-gradient variant residual {res_bare:.3e}; log variant reported"
            );
            IdentityReport::equality(name, Some(m), lhs, rhs_log, tol, variant)
        }
        IdentityName::LemmaMain => {
            let lhs = terms.lap_log_z[m] - terms.lap_log_z[m + 1];
            let rhs = terms.ricci_normal[m] + terms.a_sq[m] - terms.h[m] * terms.h[m]
                + terms.div_z_deriv[m] / terms.z_norm[m]
                - terms.cross_log[m];
            IdentityReport::equality(name, Some(m), lhs, rhs, tol, String::new())
        }
        IdentityName::CorollaryMain => {
            let lhs = terms.lap_log_z[m] - terms.lap_log_z[m + 1];
            let rhs = terms.ricci_normal[m]
                + 0.5 * (terms.a_sq[m] - terms.h[m] * terms.h[m])
                + terms.div_z_deriv[m] / terms.z_norm[m]
                + 0.5 * terms.nu_grad_sq[m]
                + 0.5 * terms.grad_log_z_next_sq[m]
                - 0.5 * terms.grad_log_z_sq[m];
            IdentityReport::equality(name, Some(m), lhs, rhs, tol, String::new())
        }
        _ => unreachable!(),
    };
    Ok(report)
}

/// The extrinsic double sum of the iterated Gauss equation:
/// sum_{m=1}^{s-1} sum_{p=m+1}^{s} sum_{q=p+1}^{n} of
/// A_{Sigma_m}(e_p, e_p) A_{Sigma_m}(e_q, e_q) - A_{Sigma_m}(e_p, e_q)^2
/// in one-based frame indices.
fn gauss_extrinsic_sum(geom: &SceneGeometry) -> Result<f64> {
    let n = geom.n;
    let s = geom.s;
    let mut acc = 0.0;
    for m in 1..s {
        let (a_mat, _) = fundamental_forms(geom, m - 1)?;
        let t = n - m;
        let aval = |x: usize, y: usize| a_mat[(x - m) * t + (y - m)];
        for p in m + 1..=s {
            for q in p + 1..=n {
                let (pp, qq) = (p - 1, q - 1);
                acc += aval(pp, pp) * aval(qq, qq) - aval(pp, qq) * aval(pp, qq);
            }
        }
    }
    Ok(acc)
}

/// Global identities on a divergence-enforced scene. The normal derivatives
/// of the divergences are retained wherever the original statements assume
/// them away under global hypotheses.
pub fn check_global_identity(
    geom: &SceneGeometry,
    terms: &IdentityTerms,
    name: IdentityName,
) -> Result<IdentityReport> {
    let s = geom.s;
    let n = geom.n;
    terms.require_divfree()?;
    let tol = terms.tolerance();
    let sum_div: f64 = (0..s).map(|m| terms.div_z_deriv[m] / terms.z_norm[m]).sum();
    let report = match name {
        IdentityName::TheoremMainGeneral => {
            if s != n - 1 {
                return Err(Error::WrongScope {
                    identity: "TheoremMainGeneral",
                    requirement: format!("s = n-1, got s = {s}, n = {n}"),
                });
            }
            let lhs =
                2.0 * terms.lap_z0 / terms.z_norm[0] - 2.0 * terms.lap_log_z[s] - 2.0 * sum_div;
            let rhs = terms.scal
                + terms.nu_grad_sq.iter().sum::<f64>()
                + terms.grad_log_z_sq[s]
                + terms.grad_log_z_sq[0];
            IdentityReport::equality(name, None, lhs, rhs, tol, String::new())
        }
        IdentityName::TheoremIntermediate => {
            let lhs = terms.lap_log_z[0] - terms.lap_log_z[s];
            let c_s = intermediate_curvature(&geom.md.curv, &geom.frame.vectors, s)?;
            let rhs = (0..s)
                .map(|m| terms.a_sq[m] - terms.h[m] * terms.h[m])
                .sum::<f64>()
                + c_s
                + gauss_extrinsic_sum(geom)?
                + (0..s)
                    .map(|m| terms.div_z_deriv[m] / terms.z_norm[m] - terms.cross_log[m])
                    .sum::<f64>();
            IdentityReport::equality(name, None, lhs, rhs, tol, String::new())
        }
        IdentityName::IteratedGaussFull => {
            if s != n - 1 {
                return Err(Error::WrongScope {
                    identity: "IteratedGaussFull",
                    requirement: format!("s = n-1, got s = {s}, n = {n}"),
                });
            }
            let lhs: f64 = (0..s)
                .map(|m| terms.ricci_normal[m] + 0.5 * (terms.a_sq[m] - terms.h[m] * terms.h[m]))
                .sum();
            IdentityReport::equality(name, None, lhs, 0.5 * terms.scal, tol, String::new())
        }
        IdentityName::IteratedGaussCodim2 => {
            if s != n - 2 {
                return Err(Error::WrongScope {
                    identity: "IteratedGaussCodim2",
                    requirement: format!("s = n-2, got s = {s}, n = {n}"),
                });
            }
            let lhs: f64 = (0..s)
                .map(|m| terms.ricci_normal[m] + 0.5 * (terms.a_sq[m] - terms.h[m] * terms.h[m]))
                .sum();
            let k = terms.gauss_codim2.expect("slicing reaches codimension 2");
            IdentityReport::equality(name, None, lhs, 0.5 * terms.scal - k, tol, String::new())
        }
        IdentityName::SternLocal => {
            if s != n - 2 {
                return Err(Error::WrongScope {
                    identity: "SternLocal",
                    requirement: format!("s = n-2, got s = {s}, n = {n}"),
                });
            }
            if geom.normalization != Normalization::UnitTop {
                return Err(Error::WrongScope {
                    identity: "SternLocal",
                    requirement: "unit-top normalization |Z_{n-2}| = 1".into(),
                });
            }
            let k = terms.gauss_codim2.expect("slicing reaches codimension 2");
            let lhs =
                2.0 * terms.lap_z0 / terms.z_norm[0] - 2.0 * terms.lap_log_z[s] - 2.0 * sum_div;
            let rhs = terms.scal - 2.0 * k
                + terms.nu_grad_sq.iter().sum::<f64>()
                + terms.grad_log_z_sq[0];
            IdentityReport::equality(
                name,
                None,
                lhs,
                rhs,
                tol,
                "hypothesis |Z_{s-2}| = 1 read as unit-top |Z_{n-2}| = 1; \
                 normal derivatives of divergences retained"
                    .into(),
            )
        }
        IdentityName::ClassicalBochner => {
            if s != 1 || geom.normalization != Normalization::UnitTop {
                return Err(Error::WrongScope {
                    identity: "ClassicalBochner",
                    requirement: "s = 1 with unit-top normalization".into(),
                });
            }
            // |grad u| lap |grad u| = Ric(grad u, grad u) + |hess u|^2
            //                         - |grad |grad u||^2 + <grad u, grad lap u>
            let lhs = terms.z_norm[0] * terms.lap_z0;
            let gradu: Vec<f64> = geom.grad_u[0].iter().map(|c| c.value).collect();
            let ric = geom.md.curv.ric(&gradu, &gradu);
            let hess = geom.hess0(&geom.u_jets[0]);
            let ginv0 = geom.md.g.ginv0();
            let mut hess_sq = 0.0;
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        for l in 0..n {
                            hess_sq += ginv0[i * n + k]
                                * ginv0[j * n + l]
                                * hess[i * n + j]
                                * hess[k * n + l];
                        }
                    }
                }
            }
            let rhs = ric + hess_sq - terms.grad_log_z_sq[0] * terms.z_norm[0].powi(2)
                + terms.z_norm[0] * terms.div_z_deriv[0];
            IdentityReport::equality(
                name,
                None,
                lhs,
                rhs,
                tol,
                "gradient correction <grad u, grad lap u> retained".into(),
            )
        }
        other => {
            return Err(Error::WrongScope {
                identity: "check_global_identity",
                requirement: format!("{other:?} is not a global equality"),
            })
        }
    };
    Ok(report)
}

/// Inequalities with pointwise compensation: the normal derivatives of the
/// divergences are carried to the right-hand side, and the slack is checked
/// against its independently summed nonnegative decomposition.
pub fn check_inequality(
    geom: &SceneGeometry,
    terms: &IdentityTerms,
    name: IdentityName,
) -> Result<InequalityOutcome> {
    let s = geom.s;
    let n = geom.n;
    terms.require_divfree()?;
    let floor = terms.floor();
    let sum_div: f64 = (0..s).map(|m| terms.div_z_deriv[m] / terms.z_norm[m]).sum();
    match name {
        IdentityName::TheoremMainInequality => {
            if s != n - 1 {
                return Err(Error::WrongScope {
                    identity: "TheoremMainInequality",
                    requirement: format!("s = n-1, got s = {s}, n = {n}"),
                });
            }
            let lhs = 2.0 * terms.lap_z0 / terms.z_norm[0] - 2.0 * terms.lap_log_z[s];
            let rhs = terms.scal + terms.grad_log_z_sq[0] + 2.0 * sum_div;
            let mut slack_terms = terms.nu_grad_sq.clone();
            slack_terms.push(terms.grad_log_z_sq[s]);
            let slack = lhs - rhs;
            let dec: f64 = slack_terms.iter().sum();
            let scale = lhs.abs().max(rhs.abs()).max(1.0);
            let report = IdentityReport::inequality(
                name,
                lhs,
                rhs,
                floor,
                "pointwise compensation: normal derivatives of divergences on the right".into(),
            );
            Ok(InequalityOutcome {
                report,
                slack_terms,
                decomposition_residual: (slack - dec).abs() / scale,
            })
        }
        IdentityName::TheoremSpinorsCompensated => {
            if s != n - 1 || geom.normalization != Normalization::UnitTop {
                return Err(Error::WrongScope {
                    identity: "TheoremSpinorsCompensated",
                    requirement: "s = n-1 under unit-top normalization".into(),
                });
            }
            let z0 = terms.z_norm[0];
            let lhs = 2.0 * terms.lap_z0;
            let rhs = terms.grad_z0_field_sq / z0 + terms.scal * z0 + 2.0 * z0 * sum_div;
            let slack_terms: Vec<f64> = (1..s).map(|m| z0 * terms.nu_grad_sq[m]).collect();
            let slack = lhs - rhs;
            let dec: f64 = slack_terms.iter().sum();
            let scale = lhs.abs().max(rhs.abs()).max(1.0);
            let report = IdentityReport::inequality(
                name,
                lhs,
                rhs,
                floor,
                "divergence hypothesis enforced at the point only; compensation terms on the right"
                    .into(),
            );
            Ok(InequalityOutcome {
                report,
                slack_terms,
                decomposition_residual: (slack - dec).abs() / scale,
            })
        }
        other => Err(Error::WrongScope {
            identity: "check_inequality",
            requirement: format!("{other:?} is not an inequality"),
        }),
    }
}

/// Every identity admissible for the scene's (n, s, normalization), levels
/// included; inequalities are appended when the slicing has full depth.
pub fn evaluate_all(geom: &SceneGeometry) -> Result<Vec<IdentityReport>> {
    let terms = IdentityTerms::new(geom)?;
    let mut out = Vec::new();
    for m in 0..geom.s {
        for name in [
            IdentityName::LemmaH,
            IdentityName::LemmaHGeneral,
            IdentityName::LemmaAH,
            IdentityName::LemmaMain,
            IdentityName::CorollaryMain,
        ] {
            out.push(check_level_identity(geom, &terms, m, name)?);
        }
    }
    out.push(check_global_identity(
        geom,
        &terms,
        IdentityName::TheoremIntermediate,
    )?);
    if geom.s == geom.n - 1 {
        out.push(check_global_identity(
            geom,
            &terms,
            IdentityName::TheoremMainGeneral,
        )?);
        out.push(check_global_identity(
            geom,
            &terms,
            IdentityName::IteratedGaussFull,
        )?);
        let ineq = check_inequality(geom, &terms, IdentityName::TheoremMainInequality)?;
        out.push(ineq.report);
        if geom.normalization == Normalization::UnitTop {
            let spin = check_inequality(geom, &terms, IdentityName::TheoremSpinorsCompensated)?;
            out.push(spin.report);
        }
    }
    if geom.s == geom.n - 2 {
        out.push(check_global_identity(
            geom,
            &terms,
            IdentityName::IteratedGaussCodim2,
        )?);
        if geom.normalization == Normalization::UnitTop {
            out.push(check_global_identity(
                geom,
                &terms,
                IdentityName::SternLocal,
            )?);
        }
    }
    if geom.s == 1 && geom.normalization == Normalization::UnitTop {
        out.push(check_global_identity(
            geom,
            &terms,
            IdentityName::ClassicalBochner,
        )?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Monomial, ScalarFieldSpec};
    use crate::metric::{MetricField, MetricKind};
    use crate::slicing::{enforce_pointwise_divfree, SlicingScene};

    fn coord(i: usize) -> ScalarFieldSpec {
        ScalarFieldSpec::Coordinate(i)
    }

    fn flat_product_scene(n: usize, s: usize, norm: Normalization) -> SlicingScene {
        SlicingScene {
            seed: 0,
            n,
            s,
            metric: MetricField::Flat { dim: n },
            u_specs: (0..s).map(coord).collect(),
            point: vec![0.0; n],
            normalization: norm,
        }
    }

    fn enforced_geometry(
        seed: u64,
        n: usize,
        s: usize,
        kind: MetricKind,
        norm: Normalization,
    ) -> SceneGeometry {
        let scene = SlicingScene::random(seed, n, s, kind, norm).unwrap();
        let enf = enforce_pointwise_divfree(&scene).unwrap();
        SceneGeometry::new(&enf.scene).unwrap()
    }

    #[test]
    fn flat_product_everything_vanishes() {
        for &norm in &[Normalization::UnitTop, Normalization::UnitBottom] {
            let scene = flat_product_scene(4, 3, norm);
            let geom = SceneGeometry::new(&scene).unwrap();
            let reports = evaluate_all(&geom).unwrap();
            assert!(reports.len() >= 15);
            for r in &reports {
                assert_eq!(r.lhs, 0.0, "{:?} lhs", r.name);
                assert_eq!(r.rhs, 0.0, "{:?} rhs", r.name);
                assert!(r.passed);
            }
        }
    }

    #[test]
    fn lemma_main_random_curved_tight() {
        let geom = enforced_geometry(41, 4, 3, MetricKind::PerturbedFlat, Normalization::UnitTop);
        let terms = IdentityTerms::new(&geom).unwrap();
        for m in 0..3 {
            let rep = check_level_identity(&geom, &terms, m, IdentityName::LemmaMain).unwrap();
            assert!(
                rep.relative <= 1e-8,
                "level {m}: relative residual {}",
                rep.relative
            );
        }
    }

    #[test]
    fn lemma_h_general_with_prescribed_divergence() {
        // u0 = x0 + 0.35 x1^2 on flat R^2: div Z_0 = lap u0 = 0.7 at 0
        let u0 = ScalarFieldSpec::Sum(vec![
            coord(0),
            ScalarFieldSpec::Polynomial {
                center: vec![],
                monomials: vec![Monomial {
                    coeff: 0.35,
                    exponents: vec![0, 2],
                }],
            },
        ]);
        let scene = SlicingScene {
            seed: 0,
            n: 2,
            s: 1,
            metric: MetricField::Flat { dim: 2 },
            u_specs: vec![u0],
            point: vec![0.0, 0.0],
            normalization: Normalization::UnitTop,
        };
        let geom = SceneGeometry::new(&scene).unwrap();
        let terms = IdentityTerms::new(&geom).unwrap();
        assert!((terms.div_z[0] - 0.7).abs() < 1e-14);
        let rep = check_level_identity(&geom, &terms, 0, IdentityName::LemmaHGeneral).unwrap();
        assert!(rep.relative <= 1e-9, "residual {}", rep.relative);
        // the enforced-precondition names must refuse this scene
        assert!(check_level_identity(&geom, &terms, 0, IdentityName::LemmaH).is_err());
    }

    #[test]
    fn lemma_ah_log_variant_is_the_consistent_one() {
        let geom = enforced_geometry(13, 4, 3, MetricKind::Conformal, Normalization::UnitBottom);
        let terms = IdentityTerms::new(&geom).unwrap();
        for m in 0..2 {
            let lhs = terms.a_sq[m] - terms.h[m] * terms.h[m];
            let common = terms.nu_grad_sq[m] + terms.grad_log_z_next_sq[m] - terms.grad_log_z_sq[m];
            let res_log = (lhs - common - 2.0 * terms.cross_log[m]).abs();
            let res_bare = (lhs - common - 2.0 * terms.cross_bare[m]).abs();
            assert!(res_log <= 1e-9 * lhs.abs().max(1.0));
            // the bare variant genuinely differs away from |Z| = 1
            if (terms.z_norm[m + 1] - 1.0).abs() > 1e-3 {
                assert!(res_bare > res_log, "level {m}");
            }
        }
    }

    #[test]
    fn theorem_main_general_and_bridge_to_intermediate() {
        for seed in 0..5 {
            let geom = enforced_geometry(
                seed,
                3,
                2,
                MetricKind::ALL_CURVED[seed as usize % 3],
                Normalization::UnitTop,
            );
            let terms = IdentityTerms::new(&geom).unwrap();
            let tmg =
                check_global_identity(&geom, &terms, IdentityName::TheoremMainGeneral).unwrap();
            assert!(tmg.relative <= 1e-8, "seed {seed}: {}", tmg.relative);
            let ti =
                check_global_identity(&geom, &terms, IdentityName::TheoremIntermediate).unwrap();
            assert!(ti.relative <= 1e-8);
            // bridge: TMG lhs = 2 TI lhs + 2 |grad log|Z_0||^2 - 2 sum div terms
            let sum_div: f64 = (0..geom.s)
                .map(|m| terms.div_z_deriv[m] / terms.z_norm[m])
                .sum();
            let bridge = 2.0 * ti.lhs + 2.0 * terms.grad_log_z_sq[0] - 2.0 * sum_div;
            assert!(
                (tmg.lhs - bridge).abs() <= 1e-9 * tmg.lhs.abs().max(1.0),
                "seed {seed}: {} vs {bridge}",
                tmg.lhs
            );
            // sum of per-level residuals matches the global one after the
            // log-to-plain Laplacian conversion
            let mut sum_cm = 0.0;
            for m in 0..geom.s {
                let cm =
                    check_level_identity(&geom, &terms, m, IdentityName::CorollaryMain).unwrap();
                sum_cm += cm.residual;
            }
            assert!((tmg.residual - 2.0 * sum_cm).abs() <= 1e-9);
        }
    }

    #[test]
    fn classical_bochner_direct_oracle() {
        for seed in 0..5 {
            let geom = enforced_geometry(
                100 + seed,
                4,
                1,
                MetricKind::ALL_CURVED[seed as usize % 3],
                Normalization::UnitTop,
            );
            let terms = IdentityTerms::new(&geom).unwrap();
            let rep = check_global_identity(&geom, &terms, IdentityName::ClassicalBochner).unwrap();
            assert!(rep.relative <= 1e-9, "seed {seed}: {}", rep.relative);
        }
    }

    #[test]
    fn stern_local_and_codim2_gauss() {
        for seed in 0..5 {
            for &n in &[3usize, 4, 5] {
                let geom = enforced_geometry(
                    300 + seed,
                    n,
                    n - 2,
                    MetricKind::ALL_CURVED[seed as usize % 3],
                    Normalization::UnitTop,
                );
                let terms = IdentityTerms::new(&geom).unwrap();
                let ig = check_global_identity(&geom, &terms, IdentityName::IteratedGaussCodim2)
                    .unwrap();
                assert!(ig.relative <= 1e-8, "n {n} seed {seed}: {}", ig.relative);
                let st = check_global_identity(&geom, &terms, IdentityName::SternLocal).unwrap();
                assert!(st.relative <= 1e-8, "n {n} seed {seed}: {}", st.relative);
            }
        }
    }

    #[test]
    fn inequalities_nonnegative_with_matching_decomposition() {
        for seed in 0..10 {
            let geom = enforced_geometry(
                seed,
                4,
                3,
                MetricKind::ALL_CURVED[seed as usize % 3],
                Normalization::UnitTop,
            );
            let terms = IdentityTerms::new(&geom).unwrap();
            for name in [
                IdentityName::TheoremMainInequality,
                IdentityName::TheoremSpinorsCompensated,
            ] {
                let out = check_inequality(&geom, &terms, name).unwrap();
                assert!(
                    out.report.residual >= -1e-9,
                    "seed {seed} {name:?}: slack {}",
                    out.report.residual
                );
                assert!(out.decomposition_residual <= 1e-8);
                for t in &out.slack_terms {
                    assert!(*t >= -1e-10);
                }
                assert!(out.report.passed);
            }
        }
    }

    #[test]
    fn flat_product_inequality_slack_zero() {
        let scene = flat_product_scene(3, 2, Normalization::UnitTop);
        let geom = SceneGeometry::new(&scene).unwrap();
        let terms = IdentityTerms::new(&geom).unwrap();
        let out = check_inequality(&geom, &terms, IdentityName::TheoremMainInequality).unwrap();
        assert_eq!(out.report.residual, 0.0);
        assert!(out.slack_terms.iter().all(|&t| t == 0.0));
    }

    #[test]
    fn wrong_scope_is_reported() {
        let scene = flat_product_scene(4, 2, Normalization::UnitBottom);
        let geom = SceneGeometry::new(&scene).unwrap();
        let terms = IdentityTerms::new(&geom).unwrap();
        assert!(matches!(
            check_global_identity(&geom, &terms, IdentityName::TheoremMainGeneral),
            Err(Error::WrongScope { .. })
        ));
        assert!(matches!(
            check_global_identity(&geom, &terms, IdentityName::ClassicalBochner),
            Err(Error::WrongScope { .. })
        ));
        assert!(matches!(
            check_inequality(&geom, &terms, IdentityName::TheoremSpinorsCompensated),
            Err(Error::WrongScope { .. })
        ));
    }
}
