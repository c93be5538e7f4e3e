//! Empirical probing of the local error bound `d(z, F) <= kappa * residual(z)`.
//!
//! Samples share one stream of unit-ball points across radii, so the
//! per-radius estimates are directly comparable.

use crate::cq_checker::{run_check, CheckConfig, CqKind, CqStatus, CqVerdict};
use crate::error::{Result, SoccpError};
use crate::linalg::{norm, sub};
use crate::problem_model::{residual, Block, BlockKind, ProblemInstance};
use crate::soc_core::{jacobian_element, project_soc};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// A point counts as feasible once its natural residual is below this.
pub const FEASIBILITY_TOL: f64 = 1e-10;
const PENALTY_STAGES: i32 = 7;
const GN_ITERS: usize = 12;
const POLISH_ITERS: usize = 200;
/// Growth per decade at or above this is divergence (10x up to rounding).
const DIVERGING_GROWTH: f64 = 10.0 * (1.0 - 1e-6);
/// Growth per decade below this is boundedness.
const BOUNDED_GROWTH: f64 = 3.162_277_66;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeConfig {
    pub radii: Vec<f64>,
    pub samples_per_radius: usize,
    pub seed: u64,
    pub residual_floor: f64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self {
            radii: vec![1e-1, 1e-2, 1e-3],
            samples_per_radius: 500,
            seed: 0,
            residual_floor: 1e-12,
        }
    }
}

impl ProbeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.radii.is_empty() || self.radii.iter().any(|r| r.is_nan() || *r <= 0.0 || !r.is_finite()) {
            return Err(SoccpError::Dimension("radii must be positive and finite".into()));
        }
        if self.radii.windows(2).any(|w| w[1] >= w[0]) {
            return Err(SoccpError::Dimension("radii must be strictly decreasing".into()));
        }
        if self.samples_per_radius == 0 {
            return Err(SoccpError::Dimension("samples_per_radius must be at least 1".into()));
        }
        Ok(())
    }
}

/// Search effort for [`distance_to_solution_set`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceBudget {
    pub starts: usize,
    pub seed: u64,
}

impl Default for DistanceBudget {
    fn default() -> Self {
        Self { starts: 16, seed: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Trend {
    Bounded,
    Diverging,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiusSummary {
    pub radius: f64,
    /// Largest `distance / distance-residual` over the samples.
    pub kappa_hat: f64,
    /// The same ratio against the natural residual.
    pub kappa_hat_natural: f64,
    pub worst_point: Vec<f64>,
    pub n_feasible_skipped: usize,
    pub n_failed: usize,
    /// Points whose two residuals violate `natural <= distance <= sqrt(2) natural`.
    pub n_bracket_flags: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub instance: String,
    pub per_radius: Vec<RadiusSummary>,
    /// `kappa_hat` growth factor per decade between consecutive radii.
    pub growth_per_decade: Vec<f64>,
    pub trend: Trend,
}

/// One probed point, for CSV export.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRow {
    pub radius: f64,
    pub index: usize,
    pub z: Vec<f64>,
    pub residual_distance: f64,
    pub residual_natural: f64,
    /// `None` when the point is feasible or no feasible point was found.
    pub distance: Option<f64>,
    pub ratio: Option<f64>,
}

/// `P` stacked into one quadratic map, with the natural residual on top.
struct System {
    n: usize,
    a: DMatrix<f64>,
    b: Vec<f64>,
    q: Vec<Option<DMatrix<f64>>>,
    blocks: Vec<Block>,
}

impl System {
    fn new(inst: &ProblemInstance) -> Result<Self> {
        let (b, a) = inst.eval_p(&vec![0.0; inst.n])?;
        let q = inst
            .p_hessians()
            .into_iter()
            .map(|h| (h.iter().any(|v| *v != 0.0)).then_some(h))
            .collect();
        Ok(Self {
            n: inst.n,
            a,
            b,
            q,
            blocks: inst.blocks(),
        })
    }

    fn p(&self, x: &[f64]) -> Vec<f64> {
        (0..self.b.len())
            .map(|i| {
                let mut v = self.b[i];
                v += (0..self.n).map(|j| self.a[(i, j)]).zip(x).map(|(a, xj)| a * xj).sum::<f64>();
                if let Some(h) = &self.q[i] {
                    for j in 0..self.n {
                        for k in 0..self.n {
                            v += 0.5 * x[j] * h[(j, k)] * x[k];
                        }
                    }
                }
                v
            })
            .collect()
    }

    fn p_jac(&self, x: &[f64]) -> DMatrix<f64> {
        let mut j = self.a.clone();
        for (i, h) in self.q.iter().enumerate() {
            if let Some(h) = h {
                for c in 0..self.n {
                    for k in 0..self.n {
                        j[(i, c)] += h[(c, k)] * x[k];
                    }
                }
            }
        }
        j
    }

    fn gather(b: &Block, p: &[f64]) -> Vec<f64> {
        b.coords.iter().map(|&c| p[c]).collect()
    }

    /// Natural residual vector of all blocks.
    fn r(&self, x: &[f64]) -> Vec<f64> {
        let p = self.p(x);
        let mut r = Vec::with_capacity(p.len());
        for b in &self.blocks {
            let pb = Self::gather(b, &p);
            match b.kind {
                BlockKind::Eq => r.push(pb[0]),
                BlockKind::Ineq => r.push(pb[0].max(0.0)),
                BlockKind::Soc(_) => r.extend(sub(&pb, &project_soc(&pb))),
                BlockKind::Comp(m) => {
                    let (x, y) = pb.split_at(m);
                    r.extend(sub(x, &project_soc(&sub(x, y))));
                }
            }
        }
        r
    }

    /// Residual vector and one element of its generalized Jacobian.
    fn r_jac(&self, x: &[f64]) -> (Vec<f64>, DMatrix<f64>) {
        let p = self.p(x);
        let jp = self.p_jac(x);
        let r = self.r(x);
        let mut jac = DMatrix::zeros(r.len(), self.n);
        let mut row = 0;
        for b in &self.blocks {
            let pb = Self::gather(b, &p);
            let jb = jp.select_rows(&b.coords);
            // d r_b / d p_b
            let d = match b.kind {
                BlockKind::Eq => DMatrix::identity(1, 1),
                BlockKind::Ineq => DMatrix::from_element(1, 1, if pb[0] > 0.0 { 1.0 } else { 0.0 }),
                BlockKind::Soc(m) => DMatrix::identity(m, m) - jacobian_element(&pb, 0.0),
                BlockKind::Comp(m) => {
                    let (x, y) = pb.split_at(m);
                    let j = jacobian_element(&sub(x, y), 0.0);
                    let mut d = DMatrix::zeros(m, 2 * m);
                    d.view_mut((0, 0), (m, m)).copy_from(&(DMatrix::identity(m, m) - &j));
                    d.view_mut((0, m), (m, m)).copy_from(&j);
                    d
                }
            };
            let k = d.nrows();
            jac.rows_mut(row, k).copy_from(&(d * jb));
            row += k;
        }
        (r, jac)
    }

    fn penalty_obj(&self, z: &[f64], x: &[f64], mu: f64) -> f64 {
        let r = self.r(x);
        let d = norm(&sub(x, z));
        0.5 * d * d + 0.5 * mu * crate::linalg::dot(&r, &r)
    }

    /// Gauss-Newton on `|x - z|^2 / 2 + mu |r(x)|^2 / 2` for increasing `mu`.
    fn penalty_descent(&self, z: &[f64], start: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x = start.to_vec();
        for stage in 0..PENALTY_STAGES {
            let mu = 100f64.powi(stage);
            for _ in 0..GN_ITERS {
                let (r, j) = self.r_jac(&x);
                let rv = DVector::from_vec(r);
                let g = DVector::from_vec(sub(&x, z)) + mu * j.transpose() * &rv;
                let h = DMatrix::identity(n, n) + mu * j.transpose() * &j;
                let Some(ch) = h.cholesky() else { break };
                let step = -ch.solve(&g);
                let f0 = self.penalty_obj(z, &x, mu);
                let mut t = 1.0;
                let mut moved = false;
                for _ in 0..30 {
                    let cand: Vec<f64> = x.iter().zip(step.iter()).map(|(a, s)| a + t * s).collect();
                    if self.penalty_obj(z, &cand, mu) < f0 {
                        x = cand;
                        moved = true;
                        break;
                    }
                    t *= 0.5;
                }
                if !moved || t * step.norm() <= 1e-12 * (1.0 + norm(&x)) {
                    break;
                }
            }
        }
        x
    }

    /// Minimum-norm semismooth Newton on `r(x) = 0`, run until it stalls.
    fn polish(&self, start: Vec<f64>) -> (Vec<f64>, f64) {
        let mut x = start;
        let (mut r, mut j) = self.r_jac(&x);
        let mut nr = norm(&r);
        for _ in 0..POLISH_ITERS {
            if nr == 0.0 {
                break;
            }
            let svd = j.clone().svd(true, true);
            let Ok(step) = svd.solve(&DVector::from_vec(r.clone()), 1e-12) else { break };
            let mut t = 1.0;
            let mut improved = false;
            for _ in 0..40 {
                let cand: Vec<f64> = x.iter().zip(step.iter()).map(|(a, s)| a - t * s).collect();
                let rc = self.r(&cand);
                let nc = norm(&rc);
                if nc < nr {
                    x = cand;
                    (r, j) = self.r_jac(&x);
                    nr = nc;
                    improved = true;
                    break;
                }
                t *= 0.5;
            }
            if !improved {
                break;
            }
        }
        (x, nr)
    }
}

fn unit_ball_point(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let g: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    let ng = norm(&g);
    let rad: f64 = rng.random::<f64>().powf(1.0 / n as f64);
    if ng == 0.0 {
        return vec![0.0; n];
    }
    g.iter().map(|v| v * rad / ng).collect()
}

/// `(lower_evidence, upper)` for `d(z, F)`.
///
/// The upper bound is the closest feasible point found by penalty
/// continuation from several starts followed by a Newton projection. The
/// lower evidence is `|r(z)| / L` with `L` a local Lipschitz estimate of the
/// natural residual; it is reported, not certified.
pub fn distance_to_solution_set(
    inst: &ProblemInstance,
    z: &[f64],
    budget: &DistanceBudget,
) -> Result<(f64, f64)> {
    if z.len() != inst.n {
        return Err(SoccpError::Dimension(format!("z has {} entries, expected {}", z.len(), inst.n)));
    }
    distance_inner(&System::new(inst)?, &inst.z_star, z, budget)
}

fn distance_inner(sys: &System, z_star: &[f64], z: &[f64], budget: &DistanceBudget) -> Result<(f64, f64)> {
    let nr0 = norm(&sys.r(z));
    if nr0 == 0.0 {
        return Ok((0.0, 0.0));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);
    let gap = norm(&sub(z, z_star)).max(1e-12);
    let mut starts = vec![z.to_vec(), z_star.to_vec()];
    while starts.len() < budget.starts.max(2) {
        let xi = unit_ball_point(&mut rng, sys.n);
        let s = if starts.len() % 2 == 0 {
            // Around z.
            z.iter().zip(&xi).map(|(a, b)| a + gap * b).collect()
        } else {
            // Along the segment to z*.
            let t: f64 = rng.random();
            z.iter()
                .zip(z_star)
                .zip(&xi)
                .map(|((a, b), c)| b + t * (a - b) + 0.1 * gap * c)
                .collect()
        };
        starts.push(s);
    }
    let best = starts
        .iter()
        .enumerate()
        .filter_map(|(i, s)| {
            let x = if i == 1 { s.clone() } else { sys.penalty_descent(z, s) };
            let (x, nr) = sys.polish(x);
            (nr <= FEASIBILITY_TOL).then(|| norm(&sub(&x, z)))
        })
        .fold(f64::INFINITY, f64::min);
    if !best.is_finite() {
        return Err(SoccpError::NoFeasibleFound);
    }
    let lip = 2.0 * (sys.blocks.len().max(1) as f64).sqrt() * sys.p_jac(z).singular_values().max();
    let lower = if lip > 0.0 { (nr0 / lip).min(best) } else { 0.0 };
    Ok((lower, best))
}

fn mix(seed: u64, a: u64, b: u64) -> u64 {
    let mut x = seed ^ a.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ b.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x ^= x >> 31;
    x.wrapping_mul(0x94D0_49BB_1331_11EB)
}

fn classify_trend(per: &[RadiusSummary]) -> (Vec<f64>, Trend) {
    if per.iter().all(|s| s.kappa_hat == 0.0) {
        return (vec![1.0; per.len().saturating_sub(1)], Trend::Bounded);
    }
    let growth: Vec<f64> = per
        .windows(2)
        .map(|w| {
            let decades = (w[0].radius / w[1].radius).log10();
            match (w[0].kappa_hat, w[1].kappa_hat) {
                (0.0, _) => f64::INFINITY,
                (a, b) => (b / a).powf(1.0 / decades),
            }
        })
        .collect();
    let trend = if growth.is_empty() {
        Trend::Inconclusive
    } else if growth.iter().all(|g| *g >= DIVERGING_GROWTH) {
        Trend::Diverging
    } else if growth.iter().all(|g| *g < BOUNDED_GROWTH) {
        Trend::Bounded
    } else {
        Trend::Inconclusive
    };
    (growth, trend)
}

pub fn estimate_kappa(inst: &ProblemInstance, cfg: &ProbeConfig) -> Result<ProbeReport> {
    estimate_kappa_with_rows(inst, cfg).map(|(r, _)| r)
}

/// [`estimate_kappa`] together with every probed point.
pub fn estimate_kappa_with_rows(
    inst: &ProblemInstance,
    cfg: &ProbeConfig,
) -> Result<(ProbeReport, Vec<SampleRow>)> {
    cfg.validate()?;
    let sys = System::new(inst)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let dirs: Vec<Vec<f64>> = (0..cfg.samples_per_radius)
        .map(|_| unit_ball_point(&mut rng, inst.n))
        .collect();
    let mut per = Vec::new();
    let mut rows = Vec::new();
    for (ri, &radius) in cfg.radii.iter().enumerate() {
        let sampled: Vec<Result<SampleRow>> = dirs
            .par_iter()
            .enumerate()
            .map(|(k, xi)| {
                let z: Vec<f64> = inst.z_star.iter().zip(xi).map(|(a, b)| a + radius * b).collect();
                let res = residual(inst, &z)?;
                let mut row = SampleRow {
                    radius,
                    index: k,
                    z: z.clone(),
                    residual_distance: res.distance,
                    residual_natural: res.natural,
                    distance: None,
                    ratio: None,
                };
                if res.distance <= cfg.residual_floor {
                    return Ok(row);
                }
                let budget = DistanceBudget {
                    starts: 16,
                    seed: mix(cfg.seed, ri as u64, k as u64),
                };
                match distance_inner(&sys, &inst.z_star, &z, &budget) {
                    Ok((_, d)) => {
                        row.distance = Some(d);
                        row.ratio = Some(d / res.distance);
                    }
                    Err(SoccpError::NoFeasibleFound) => {}
                    Err(e) => return Err(e),
                }
                Ok(row)
            })
            .collect();
        let sampled = sampled.into_iter().collect::<Result<Vec<_>>>()?;
        let mut s = RadiusSummary {
            radius,
            kappa_hat: 0.0,
            kappa_hat_natural: 0.0,
            worst_point: inst.z_star.clone(),
            n_feasible_skipped: 0,
            n_failed: 0,
            n_bracket_flags: 0,
        };
        for row in &sampled {
            if row.residual_distance <= cfg.residual_floor {
                s.n_feasible_skipped += 1;
                continue;
            }
            let (lo, hi) = (row.residual_natural, row.residual_natural * std::f64::consts::SQRT_2);
            if row.residual_distance < lo * (1.0 - 1e-6) || row.residual_distance > hi * (1.0 + 1e-6) {
                s.n_bracket_flags += 1;
            }
            match (row.distance, row.ratio) {
                (Some(d), Some(ratio)) => {
                    if ratio > s.kappa_hat {
                        s.kappa_hat = ratio;
                        s.worst_point = row.z.clone();
                    }
                    if row.residual_natural > cfg.residual_floor {
                        s.kappa_hat_natural = s.kappa_hat_natural.max(d / row.residual_natural);
                    }
                }
                _ => s.n_failed += 1,
            }
        }
        per.push(s);
        rows.extend(sampled);
    }
    let (growth_per_decade, trend) = classify_trend(&per);
    Ok((
        ProbeReport {
            instance: inst.name.clone(),
            per_radius: per,
            growth_per_decade,
            trend,
        },
        rows,
    ))
}

/// A verdict and whether it speaks about the error bound of the whole system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JudgedVerdict {
    #[serde(flatten)]
    pub verdict: CqVerdict,
    pub predicts_error_bound: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossValidation {
    pub instance: String,
    pub verdicts: Vec<JudgedVerdict>,
    pub probe: ProbeReport,
    pub consistent: bool,
    pub inconsistencies: Vec<String>,
    pub notes: Vec<String>,
}

/// True when a verdict of `kind` is sufficient for the error bound of the full system.
fn predicts(inst: &ProblemInstance, kind: CqKind, condition: &str) -> bool {
    let blocks = inst.blocks();
    let only_eq_ineq = blocks
        .iter()
        .all(|b| matches!(b.kind, BlockKind::Eq | BlockKind::Ineq));
    let only_mpec = blocks
        .iter()
        .all(|b| !b.from_cone && matches!(b.kind, BlockKind::Eq | BlockKind::Ineq | BlockKind::Comp(1)));
    match kind {
        CqKind::Nnamcq | CqKind::Foscms | CqKind::Final => true,
        CqKind::EqIneq => only_eq_ineq && !matches!(condition, "quasinormality" | "RCPLD"),
        CqKind::Mpec => only_mpec && condition != "MPEC quasi-normality",
        CqKind::Split | CqKind::All => false,
    }
}

pub fn cross_validate(
    inst: &ProblemInstance,
    check: &CheckConfig,
    probe: &ProbeConfig,
) -> Result<CrossValidation> {
    cross_validate_with(inst, check, probe, &[], false)
}

/// [`cross_validate`] with a split partition and optional per-check timing.
pub fn cross_validate_with(
    inst: &ProblemInstance,
    check: &CheckConfig,
    probe: &ProbeConfig,
    partition: &[usize],
    timing: bool,
) -> Result<CrossValidation> {
    let kinds: Vec<CqKind> = if partition.is_empty() {
        vec![CqKind::Nnamcq, CqKind::Foscms, CqKind::EqIneq, CqKind::Mpec, CqKind::Final]
    } else {
        vec![CqKind::Nnamcq, CqKind::Foscms, CqKind::Split, CqKind::EqIneq, CqKind::Mpec, CqKind::Final]
    };
    let mut verdicts = Vec::new();
    for kind in kinds {
        let t = std::time::Instant::now();
        let vs = run_check(inst, kind, partition, check)?;
        let ms = t.elapsed().as_secs_f64() * 1e3;
        for mut v in vs {
            if timing {
                v.wall_time_ms = Some(ms);
            }
            verdicts.push(JudgedVerdict {
                predicts_error_bound: predicts(inst, kind, &v.condition),
                verdict: v,
            });
        }
    }
    let report = estimate_kappa(inst, probe)?;
    let mut inconsistencies = Vec::new();
    let mut notes = Vec::new();
    for jv in &verdicts {
        let v = &jv.verdict;
        match v.status {
            CqStatus::Certified if jv.predicts_error_bound && report.trend == Trend::Diverging => {
                inconsistencies.push(format!("{} is certified but the probe diverges", v.condition))
            }
            CqStatus::Violated if jv.predicts_error_bound => notes.push(format!(
                "{} is violated; it is only sufficient, so no prediction (trend {:?})",
                v.condition, report.trend
            )),
            _ => {}
        }
    }
    Ok(CrossValidation {
        instance: inst.name.clone(),
        verdicts,
        probe: report,
        consistent: inconsistencies.is_empty(),
        inconsistencies,
        notes,
    })
}
