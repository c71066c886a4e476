//! Suite runner: executes the verification batteries from a config, collects
//! uniform check records, and emits one deterministic JSON report document.

use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{fd_crosscheck, ScalarFieldSpec};
use crate::identity::{self, IdentityName, IdentityTerms};
use crate::metric::{eval_metric, random_scene, MetricField, MetricKind};
use crate::rng::Rng;
use crate::slicing::{enforce_pointwise_divfree, Normalization, SceneGeometry, SlicingScene};
use crate::spinor;
use crate::stern::{stern_report, TorusGrid};

pub const SCHEMA: &str = "bochner-lab/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Jets,
    Curvature,
    Identities,
    Spinors,
    Stern,
    All,
}

impl Suite {
    pub fn parse(s: &str) -> Result<Suite> {
        match s {
            "jets" => Ok(Suite::Jets),
            "curvature" => Ok(Suite::Curvature),
            "identities" => Ok(Suite::Identities),
            "spinors" => Ok(Suite::Spinors),
            "stern" => Ok(Suite::Stern),
            "all" => Ok(Suite::All),
            other => Err(Error::Config {
                key: "suite".into(),
                reason: format!("unknown suite `{other}`"),
            }),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SuiteConfig {
    pub suite: Suite,
    pub trials: usize,
    pub seed: u64,
    pub dims: Vec<usize>,
    /// Restrict slicing depths; every entry must fit at least one dim.
    pub s_values: Option<Vec<usize>>,
    pub metrics: Vec<MetricKind>,
    /// Relative tolerance override for equality checks.
    pub tolerance: Option<f64>,
    pub epsilon: f64,
    pub grid: usize,
    pub levels: usize,
    /// Report destination; not part of the report body itself.
    #[serde(skip_serializing)]
    pub out: Option<PathBuf>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            suite: Suite::All,
            trials: 100,
            seed: 7,
            dims: vec![3, 4, 5],
            s_values: None,
            metrics: MetricKind::ALL_CURVED.to_vec(),
            tolerance: None,
            epsilon: 0.05,
            grid: 48,
            levels: 32,
            out: None,
        }
    }
}

impl SuiteConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config {
                key: "trials".into(),
                reason: "must be at least 1".into(),
            });
        }
        for &n in &self.dims {
            if !(3..=5).contains(&n) {
                return Err(Error::Config {
                    key: "dims".into(),
                    reason: format!("dimension {n} outside {{3, 4, 5}}"),
                });
            }
        }
        if self.dims.is_empty() {
            return Err(Error::Config {
                key: "dims".into(),
                reason: "no dimensions selected".into(),
            });
        }
        if let Some(svals) = &self.s_values {
            let max_n = *self.dims.iter().max().expect("dims nonempty");
            for &s in svals {
                if s == 0 || s > max_n - 1 {
                    return Err(Error::Config {
                        key: "s".into(),
                        reason: format!(
                            "s = {s} admits no selected dimension (need 1 <= s <= n-1)"
                        ),
                    });
                }
            }
        }
        if self.metrics.is_empty() {
            return Err(Error::Config {
                key: "metric".into(),
                reason: "no metric kinds selected".into(),
            });
        }
        if !(16..=96).contains(&self.grid) {
            return Err(Error::Config {
                key: "grid".into(),
                reason: format!("grid {} outside 16..=96", self.grid),
            });
        }
        if self.levels == 0 {
            return Err(Error::Config {
                key: "levels".into(),
                reason: "must be at least 1".into(),
            });
        }
        if !(self.epsilon >= 0.0 && self.epsilon <= 0.2) {
            return Err(Error::Config {
                key: "epsilon".into(),
                reason: format!("epsilon {} outside [0, 0.2]", self.epsilon),
            });
        }
        Ok(())
    }
}

/// A single uniform check record; every battery reduces to these.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckRecord {
    pub suite: String,
    pub seed: u64,
    pub n: usize,
    pub s: usize,
    pub metric: String,
    pub normalization: String,
    pub name: String,
    pub level: i64,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub relative: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub inequality: bool,
    pub variant: String,
}

impl CheckRecord {
    fn sort_key(&self) -> (String, u64, usize, usize, String, String, String, i64) {
        (
            self.suite.clone(),
            self.seed,
            self.n,
            self.s,
            self.metric.clone(),
            self.normalization.clone(),
            self.name.clone(),
            self.level,
        )
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteReport {
    pub schema: String,
    pub config: SuiteConfig,
    pub summary: Summary,
    pub records: Vec<CheckRecord>,
}

impl SuiteReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn all_passed(&self) -> bool {
        self.summary.failed == 0
    }
}

fn metric_name(kind: MetricKind) -> &'static str {
    match kind {
        MetricKind::Flat => "flat",
        MetricKind::Conformal => "conformal",
        MetricKind::DiagonalWarped => "warped",
        MetricKind::PerturbedFlat => "perturbed",
    }
}

fn norm_name(n: Normalization) -> &'static str {
    match n {
        Normalization::UnitTop => "unit_top",
        Normalization::UnitBottom => "unit_bottom",
    }
}

fn simple_record(
    suite: &str,
    seed: u64,
    name: &str,
    value: f64,
    tolerance: f64,
    inequality: bool,
) -> CheckRecord {
    // equality-style: value compared against zero; inequality-style: value
    // must stay above -tolerance
    let passed = if inequality {
        value >= -tolerance
    } else {
        value.abs() <= tolerance
    };
    CheckRecord {
        suite: suite.into(),
        seed,
        n: 0,
        s: 0,
        metric: String::new(),
        normalization: String::new(),
        name: name.into(),
        level: -1,
        lhs: value,
        rhs: 0.0,
        residual: value,
        relative: value.abs(),
        tolerance,
        passed,
        inequality,
        variant: String::new(),
    }
}

fn jets_suite(config: &SuiteConfig) -> Result<Vec<CheckRecord>> {
    let trials: Vec<u64> = (0..config.trials as u64).collect();
    let records: Vec<CheckRecord> = trials
        .par_iter()
        .map(|&trial| {
            let mut rng = Rng::new(config.seed ^ 0x1e75).fork(trial);
            let n = 3 + (trial % 3) as usize;
            // alternate polynomial and trig fields
            let (_, u_specs, p) =
                random_scene(config.seed.wrapping_add(trial), n, 1, MetricKind::Flat)
                    .expect("flat scene");
            let field = if trial % 2 == 0 {
                u_specs[0].clone()
            } else {
                ScalarFieldSpec::TrigPolynomial {
                    modes: (0..3)
                        .map(|_| crate::field::TrigMode {
                            freq: (0..n).map(|_| rng.int_range(-2, 2) as i32).collect(),
                            cos_amp: rng.symmetric(1.0),
                            sin_amp: rng.symmetric(1.0),
                        })
                        .collect(),
                }
            };
            let rep = fd_crosscheck(&field, &p, 1e-4).expect("fd report");
            vec![
                simple_record(
                    "jets",
                    trial,
                    "fd_gradient_deviation",
                    rep.grad_dev,
                    1e-6,
                    false,
                ),
                simple_record(
                    "jets",
                    trial,
                    "fd_hessian_deviation",
                    rep.hess_dev,
                    1e-6,
                    false,
                ),
            ]
        })
        .flatten()
        .collect();
    Ok(records)
}

fn curvature_suite(config: &SuiteConfig) -> Result<Vec<CheckRecord>> {
    let trials: Vec<u64> = (0..config.trials.max(50) as u64).collect();
    let records: Vec<CheckRecord> = trials
        .par_iter()
        .map(|&trial| {
            let n = 3 + (trial % 3) as usize;
            let (metric, _, p) = random_scene(
                config.seed.wrapping_add(2 * trial),
                n,
                1,
                MetricKind::Conformal,
            )
            .expect("conformal scene");
            let phi = match &metric {
                MetricField::Conformal { phi, .. } => phi.clone(),
                _ => unreachable!(),
            };
            let gj = eval_metric(&metric, &p).expect("SPD");
            let c = crate::curvature::curvature_at(&gj);
            let pj = phi.jet_at(&p).expect("jet");
            let lap: f64 = (0..n).map(|i| pj.h(i, i)).sum();
            let grad2: f64 = pj.grad.iter().map(|x| x * x).sum();
            let nf = n as f64;
            let expect = (-2.0 * (nf - 1.0) * lap - (nf - 1.0) * (nf - 2.0) * grad2)
                * (-2.0 * pj.value).exp();
            let rel = (c.scal - expect).abs() / expect.abs().max(1.0);

            // symmetry + Bianchi deviations relative to tensor scale
            let scale = c.tensor_scale();
            let mut sym_dev: f64 = 0.0;
            let mut bianchi_dev: f64 = 0.0;
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        for l in 0..n {
                            let r = c.rm(i, j, k, l);
                            sym_dev = sym_dev
                                .max((r + c.rm(j, i, k, l)).abs())
                                .max((r + c.rm(i, j, l, k)).abs())
                                .max((r - c.rm(k, l, i, j)).abs());
                            bianchi_dev =
                                bianchi_dev.max((r + c.rm(i, k, l, j) + c.rm(i, l, j, k)).abs());
                        }
                    }
                }
            }
            vec![
                simple_record(
                    "curvature",
                    trial,
                    "conformal_scal_oracle",
                    rel,
                    1e-9,
                    false,
                ),
                simple_record(
                    "curvature",
                    trial,
                    "riemann_symmetry",
                    sym_dev / scale,
                    1e-10,
                    false,
                ),
                simple_record(
                    "curvature",
                    trial,
                    "first_bianchi",
                    bianchi_dev / scale,
                    1e-10,
                    false,
                ),
            ]
        })
        .flatten()
        .collect();
    Ok(records)
}

fn identity_records_for_scene(
    config: &SuiteConfig,
    trial_seed: u64,
    n: usize,
    s: usize,
    kind: MetricKind,
    norm: Normalization,
) -> Result<Vec<CheckRecord>> {
    let scene = SlicingScene::random(trial_seed, n, s, kind, norm)?;
    let mut out = Vec::new();
    let to_record = |rep: &identity::IdentityReport, variant_extra: &str| CheckRecord {
        suite: "identities".into(),
        seed: trial_seed,
        n,
        s,
        metric: metric_name(kind).into(),
        normalization: norm_name(norm).into(),
        name: format!("{:?}", rep.name),
        level: rep.level.map(|l| l as i64).unwrap_or(-1),
        lhs: rep.lhs,
        rhs: rep.rhs,
        residual: rep.residual,
        relative: rep.relative,
        tolerance: rep.tolerance,
        passed: rep.passed,
        inequality: rep.inequality,
        variant: if variant_extra.is_empty() {
            rep.variant.clone()
        } else if rep.variant.is_empty() {
            variant_extra.into()
        } else {
            format!("{}; {}", rep.variant, variant_extra)
        },
    };

    // the no-hypothesis lemma runs on the raw scene, before enforcement
    let raw_geom = SceneGeometry::new(&scene)?;
    let raw_terms = IdentityTerms::new(&raw_geom)?;
    for m in 0..s {
        let rep =
            identity::check_level_identity(&raw_geom, &raw_terms, m, IdentityName::LemmaHGeneral)?;
        out.push(to_record(&rep, "raw scene"));
    }

    let enforced = enforce_pointwise_divfree(&scene)?;
    let geom = SceneGeometry::new(&enforced.scene)?;
    let reports = identity::evaluate_all(&geom)?;
    for rep in &reports {
        if rep.name == IdentityName::LemmaHGeneral {
            continue;
        }
        out.push(to_record(rep, ""));
    }
    // honor a tolerance override by re-judging the equality records
    if let Some(tol) = config.tolerance {
        for r in &mut out {
            if !r.inequality {
                r.tolerance = tol;
                r.passed = r.relative <= tol;
            }
        }
    }
    Ok(out)
}

fn identities_suite(config: &SuiteConfig) -> Result<Vec<CheckRecord>> {
    let mut cases: Vec<(u64, usize, usize, MetricKind, Normalization)> = Vec::new();
    let root = Rng::new(config.seed);
    for &n in &config.dims {
        for s in 1..n {
            if let Some(svals) = &config.s_values {
                if !svals.contains(&s) {
                    continue;
                }
            }
            for trial in 0..config.trials {
                let kind = config.metrics[trial % config.metrics.len()];
                let trial_seed = root
                    .fork((n as u64) << 32 | (s as u64) << 16 | trial as u64)
                    .next_u64();
                for norm in [Normalization::UnitTop, Normalization::UnitBottom] {
                    cases.push((trial_seed, n, s, kind, norm));
                }
            }
        }
    }
    let results: Result<Vec<Vec<CheckRecord>>> = cases
        .par_iter()
        .map(|&(seed, n, s, kind, norm)| identity_records_for_scene(config, seed, n, s, kind, norm))
        .collect();
    Ok(results?.into_iter().flatten().collect())
}

fn spinors_suite(config: &SuiteConfig) -> Result<Vec<CheckRecord>> {
    let mut records = Vec::new();
    let mut rng = Rng::new(config.seed ^ 0x5917);

    // Dirac <-> divergence-quadruple equivalence on random linear spinors
    let mut max_equiv_dev: f64 = 0.0;
    for k in 0..config.trials.max(100) as u64 {
        let psi = spinor::harmonic_linear_spinor(config.seed.wrapping_add(k));
        let p = [rng.symmetric(2.0), rng.symmetric(2.0), rng.symmetric(2.0)];
        let d = spinor::dirac_apply(&psi, &p)?;
        let q = spinor::divfree_quadruple(&psi, &p)?;
        for (a, b) in d.iter().zip(&q) {
            max_equiv_dev = max_equiv_dev.max((a - b).abs());
        }
        let dn: f64 = d.iter().map(|x| x * x).sum::<f64>().sqrt();
        max_equiv_dev = max_equiv_dev.max(dn);
    }
    records.push(simple_record(
        "spinors",
        config.seed,
        "dirac_quadruple_equivalence",
        max_equiv_dev,
        1e-12,
        false,
    ));

    // current algebra on 1000 random pointwise quadruples
    let mut max_algebra_dev: f64 = 0.0;
    for _ in 0..1000 {
        let q = [
            rng.symmetric(2.0),
            rng.symmetric(2.0),
            rng.symmetric(2.0),
            rng.symmetric(2.0),
        ];
        let (x, a, b) = spinor::currents_at_values(q);
        let norm_sq: f64 = q.iter().map(|v| v * v).sum();
        let scale = norm_sq.max(1.0).powi(2);
        let len = |v: &[f64; 3]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let ip = |u: &[f64; 3], v: &[f64; 3]| u.iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
        for dev in [
            (len(&x) - norm_sq).abs(),
            (len(&a) - norm_sq).abs(),
            (len(&b) - norm_sq).abs(),
            ip(&x, &a).abs(),
            ip(&x, &b).abs(),
            ip(&a, &b).abs(),
        ] {
            max_algebra_dev = max_algebra_dev.max(dev / scale);
        }
    }
    records.push(simple_record(
        "spinors",
        config.seed,
        "current_algebra",
        max_algebra_dev,
        1e-12,
        false,
    ));

    // div X = 2 Re <i D psi, psi> for a non-harmonic field
    let psi = spinor::SpinorField {
        a: ScalarFieldSpec::Polynomial {
            center: vec![],
            monomials: vec![crate::field::Monomial {
                coeff: 0.9,
                exponents: vec![2, 0, 0],
            }],
        },
        b: ScalarFieldSpec::Coordinate(1),
        c: ScalarFieldSpec::Coordinate(2),
        d: ScalarFieldSpec::Coordinate(0),
    };
    let mut max_pairing_dev: f64 = 0.0;
    for _ in 0..100 {
        let p = [rng.symmetric(2.0), rng.symmetric(2.0), rng.symmetric(2.0)];
        let (div_x, pairing) = spinor::div_x_against_dirac(&psi, &p)?;
        max_pairing_dev = max_pairing_dev.max((div_x - pairing).abs() / div_x.abs().max(1.0));
    }
    records.push(simple_record(
        "spinors",
        config.seed,
        "div_x_dirac_pairing",
        max_pairing_dev,
        1e-10,
        false,
    ));

    // harmonic battery: 50 spinors x 1000 points
    let mut min_lich: f64 = f64::INFINITY;
    let mut min_kato: f64 = f64::INFINITY;
    let mut max_div: f64 = 0.0;
    for k in 0..50u64 {
        let psi = spinor::harmonic_linear_spinor(config.seed.wrapping_add(1000 + k));
        let pts: Vec<[f64; 3]> = (0..1000)
            .map(|_| [rng.symmetric(2.0), rng.symmetric(2.0), rng.symmetric(2.0)])
            .collect();
        let rep = spinor::spinor_property_suite(&psi, &pts)?;
        min_lich = min_lich.min(rep.min_lichnerowicz_slack);
        min_kato = min_kato.min(rep.min_kato_slack);
        max_div = max_div.max(rep.max_divergence);
    }
    records.push(simple_record(
        "spinors",
        config.seed,
        "current_divergences",
        max_div,
        1e-10,
        false,
    ));
    records.push(simple_record(
        "spinors",
        config.seed,
        "kato_slack_min",
        min_kato,
        1e-10,
        true,
    ));
    records.push(simple_record(
        "spinors",
        config.seed,
        "lichnerowicz_slack_min",
        min_lich,
        1e-10,
        true,
    ));
    Ok(records)
}

fn stern_suite(config: &SuiteConfig) -> Result<Vec<CheckRecord>> {
    let mut records = Vec::new();

    let flat = TorusGrid::new(config.grid.min(32), MetricField::Flat { dim: 3 })?;
    let flat_rep = stern_report(&flat, config.levels.min(8))?;
    records.push(simple_record(
        "stern",
        config.seed,
        "flat_lhs",
        flat_rep.lhs,
        1e-10,
        false,
    ));
    records.push(simple_record(
        "stern",
        config.seed,
        "flat_rhs",
        flat_rep.rhs,
        1e-10,
        false,
    ));

    let phi = ScalarFieldSpec::TrigPolynomial {
        modes: vec![
            crate::field::TrigMode {
                freq: vec![1, 1, 0],
                cos_amp: config.epsilon,
                sin_amp: 0.0,
            },
            crate::field::TrigMode {
                freq: vec![0, 1, -1],
                cos_amp: 0.0,
                sin_amp: 0.6 * config.epsilon,
            },
        ],
    };
    let grid = TorusGrid::new(config.grid, MetricField::Conformal { dim: 3, phi })?;
    let rep = stern_report(&grid, config.levels)?;
    records.push(simple_record(
        "stern",
        config.seed,
        "solver_residual",
        rep.solver_residual,
        1e-10,
        false,
    ));
    let max_chi = rep
        .per_level
        .iter()
        .map(|t| t.euler_characteristic.unsigned_abs())
        .max()
        .unwrap_or(0);
    records.push(simple_record(
        "stern",
        config.seed,
        "level_chi_max_abs",
        max_chi as f64,
        0.5,
        false,
    ));
    records.push(simple_record(
        "stern",
        config.seed,
        "skipped_levels",
        rep.skipped_levels as f64,
        0.5,
        false,
    ));
    let mut margin = simple_record(
        "stern",
        config.seed,
        "coarea_margin",
        rep.margin,
        rep.discretization_estimate,
        true,
    );
    margin.lhs = rep.lhs;
    margin.rhs = rep.rhs;
    margin.variant = rep.measure.clone();
    records.push(margin);
    Ok(records)
}

/// Runs the configured suites and returns the aggregated report, with the
/// records sorted for byte-stable output.
pub fn run_suite(config: &SuiteConfig) -> Result<SuiteReport> {
    config.validate()?;
    let mut records = Vec::new();
    let selected = |s: Suite| config.suite == Suite::All || config.suite == s;
    if selected(Suite::Jets) {
        records.extend(jets_suite(config)?);
    }
    if selected(Suite::Curvature) {
        records.extend(curvature_suite(config)?);
    }
    if selected(Suite::Identities) {
        records.extend(identities_suite(config)?);
    }
    if selected(Suite::Spinors) {
        records.extend(spinors_suite(config)?);
    }
    if selected(Suite::Stern) {
        records.extend(stern_suite(config)?);
    }
    records.sort_by_key(|r| r.sort_key());
    let passed = records.iter().filter(|r| r.passed).count();
    let summary = Summary {
        total: records.len(),
        passed,
        failed: records.len() - passed,
    };
    Ok(SuiteReport {
        schema: SCHEMA.into(),
        config: config.clone(),
        summary,
        records,
    })
}
