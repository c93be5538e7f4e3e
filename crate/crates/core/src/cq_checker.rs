//! Tri-state certification of sufficient conditions for local error bounds.
//!
//! Multiplier conditions reduce to finitely many cone-piece feasibility
//! problems solved by [`crate::conic_lp`]. Directional conditions split the
//! linearized cone into per-block branch patterns; a pattern is settled
//! exactly when its normal cones do not vary with the direction, and by
//! deterministic direction sampling otherwise.

use crate::block_cones::{self, NormalSpec};
use crate::cone_rep::{ConePiece, ConeUnionRep, FamilyKind};
use crate::conic_lp::{find_nonzero, maximize, ConicSystem, Feasibility};
use crate::error::{Result, SoccpError};
use crate::linalg::{dot, max_abs, mat_vec, mat_vec_snapped, matrix_rows, norm, null_space, rank, scale, sub};
use crate::problem_model::{Block, BlockKind, ProblemInstance};
use crate::sampling::sphere_points;
use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub const DEFAULT_DIR_SAMPLES: usize = 512;
/// Parameter samples per origin family.
const FAMILY_SAMPLES: usize = 64;
const ALPHAS: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];
/// Bound on `|grad P^T lambda|` for an accepted multiplier.
pub const ADJOINT_TOL: f64 = 1e-8;
const MEMBER_TOL: f64 = 1e-7;
/// LP maximisers used as extra direction samples per pattern.
const MAX_LP_DIRECTIONS: usize = 64;
const CHUNK: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CqStatus {
    Violated,
    Certified,
    /// Sampling found no violation; the condition is not proved.
    InconclusiveSampled,
    /// A subproblem could not be decided (solver budget or unproved premise).
    Inconclusive,
    NotImplemented,
    /// The condition does not apply to this instance.
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub w: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub lambda: Option<Vec<f64>>,
    pub piece_labels: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CqVerdict {
    pub condition: String,
    pub status: CqStatus,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub certificate: Option<Certificate>,
    pub samples_used: usize,
    pub pieces_examined: usize,
    /// Exhaustive case list behind a `Certified` verdict.
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub cases: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub note: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub wall_time_ms: Option<f64>,
}

impl CqVerdict {
    fn new(condition: &str, status: CqStatus) -> Self {
        Self {
            condition: condition.to_string(),
            status,
            certificate: None,
            samples_used: 0,
            pieces_examined: 0,
            cases: Vec::new(),
            note: None,
            wall_time_ms: None,
        }
    }

    fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    fn failed(condition: &str, e: &SoccpError) -> Self {
        Self::new(condition, CqStatus::Inconclusive).with_note(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CheckConfig {
    pub n_dir_samples: usize,
    pub seed: u64,
    pub tol: f64,
}

impl Default for CheckConfig {
    fn default() -> Self {
        Self {
            n_dir_samples: DEFAULT_DIR_SAMPLES,
            seed: 0,
            tol: crate::comp_set::DEFAULT_TOL,
        }
    }
}

/// `P(z*)`, its derivatives and a selection of blocks.
struct Ctx {
    n: usize,
    pdim: usize,
    p: Vec<f64>,
    jac: DMatrix<f64>,
    hess: Vec<DMatrix<f64>>,
    blocks: Vec<Block>,
    tol: f64,
}

impl Ctx {
    fn new(inst: &ProblemInstance, keep: impl Fn(&Block) -> bool, tol: f64) -> Result<Self> {
        let (p, jac) = inst.eval_p(&inst.z_star)?;
        Ok(Self {
            n: inst.n,
            pdim: p.len(),
            p,
            jac,
            hess: inst.p_hessians(),
            blocks: inst.blocks().into_iter().filter(|b| keep(b)).collect(),
            tol,
        })
    }

    fn block_p(&self, b: &Block) -> Vec<f64> {
        b.coords.iter().map(|&c| self.p[c]).collect()
    }

    fn block_jac(&self, b: &Block) -> DMatrix<f64> {
        DMatrix::from_fn(b.coords.len(), self.n, |i, j| self.jac[(b.coords[i], j)])
    }

    fn selector(&self, b: &Block) -> DMatrix<f64> {
        DMatrix::from_fn(b.coords.len(), self.pdim, |i, j| {
            if b.coords[i] == j {
                1.0
            } else {
                0.0
            }
        })
    }

    fn block_lambda(&self, b: &Block, lam: &[f64]) -> Vec<f64> {
        b.coords.iter().map(|&c| lam[c]).collect()
    }

    fn coords_where(&self, keep: impl Fn(&Block) -> bool) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .blocks
            .iter()
            .filter(|b| keep(b))
            .flat_map(|b| b.coords.iter().copied())
            .collect();
        out.sort_unstable();
        out
    }

    fn covered(&self) -> Vec<bool> {
        let mut c = vec![false; self.pdim];
        for b in &self.blocks {
            for &i in &b.coords {
                c[i] = true;
            }
        }
        c
    }

    /// `-(w^T hess_i w)_i`: the row of `w^T hess(lambda^T P) w >= 0` as `row . lambda <= 0`.
    fn hessian_row(&self, w: &[f64]) -> Vec<f64> {
        self.hess.iter().map(|h| -dot(w, &mat_vec(h, w))).collect()
    }

    fn adjoint(&self, lam: &[f64]) -> Vec<f64> {
        crate::linalg::mat_t_vec(&self.jac, lam)
    }
}

#[derive(Debug, Default, Clone, Copy)]
struct Stats {
    pieces: usize,
    samples: usize,
}

impl Stats {
    fn add(&mut self, o: Stats) {
        self.pieces += o.pieces;
        self.samples += o.samples;
    }
}

#[derive(Debug, Clone)]
enum Search {
    Found { lambda: Vec<f64>, labels: Vec<String> },
    /// Every piece admits only `lambda_S = 0`.
    NoneExact,
    /// Families were sampled without success.
    NoneSampled,
    Undecided,
}

/// One choice of piece (exact) or family relaxation for a block.
enum Opt {
    Piece(usize),
    Family(usize),
}

/// Searches `{lambda : grad P^T lambda = 0, extra . lambda <= 0, lambda_b in reps[b], lambda_S != 0}`.
fn search_multipliers(
    ctx: &Ctx,
    reps: &[ConeUnionRep],
    support: &[usize],
    extra: &[Vec<f64>],
    seed: u64,
    stats: &mut Stats,
) -> Search {
    if support.is_empty() {
        return Search::NoneExact;
    }
    let mut base = ConePiece::free(ctx.pdim, "");
    for k in 0..ctx.n {
        let col: Vec<f64> = (0..ctx.pdim).map(|i| ctx.jac[(i, k)]).collect();
        base = base.eq(&col);
    }
    for (c, cov) in ctx.covered().iter().enumerate() {
        if !cov {
            base = base.eq(&crate::linalg::unit(ctx.pdim, c));
        }
    }
    for r in extra {
        base = base.le(r);
    }
    let sels: Vec<DMatrix<f64>> = ctx.blocks.iter().map(|b| ctx.selector(b)).collect();
    let opts: Vec<Vec<Opt>> = reps
        .iter()
        .map(|r| {
            (0..r.pieces.len())
                .map(Opt::Piece)
                .chain((0..r.families.len()).map(Opt::Family))
                .collect()
        })
        .collect();
    if opts.iter().any(|o| o.is_empty()) {
        return Search::NoneExact;
    }
    let mut idx = vec![0usize; opts.len()];
    let mut sampled = false;
    let mut undecided = false;
    loop {
        let mut piece = base.clone();
        let mut fams = Vec::new();
        for (b, &i) in idx.iter().enumerate() {
            match opts[b][i] {
                Opt::Piece(k) => piece = piece.intersect(&reps[b].pieces[k].pullback(&sels[b])),
                Opt::Family(k) => {
                    piece = piece.intersect(&reps[b].families[k].relaxation.pullback(&sels[b]));
                    fams.push((b, k));
                }
            }
        }
        stats.pieces += 1;
        match find_nonzero(&ConicSystem::from_piece(&piece), support) {
            Feasibility::Found(lam) => {
                if fams.is_empty() {
                    match verify_multiplier(ctx, reps, support, extra, &lam) {
                        Some((lambda, labels)) => return Search::Found { lambda, labels },
                        None => undecided = true,
                    }
                } else {
                    sampled = true;
                    if let Some(found) =
                        sample_families(ctx, reps, support, extra, &idx, &opts, &fams, &lam, seed, stats)
                    {
                        return found;
                    }
                }
            }
            Feasibility::Infeasible => {}
            Feasibility::Undecided => undecided = true,
        }
        // Odometer step.
        let mut b = 0;
        loop {
            if b == idx.len() {
                return if undecided {
                    Search::Undecided
                } else if sampled {
                    Search::NoneSampled
                } else {
                    Search::NoneExact
                };
            }
            idx[b] += 1;
            if idx[b] < opts[b].len() {
                break;
            }
            idx[b] = 0;
            b += 1;
        }
    }
}

/// Candidate `w` (for `xi = (1, w)`) suggested by a relaxed multiplier block.
fn family_hints(kind: FamilyKind, m: usize, lam_b: &[f64]) -> Vec<Vec<f64>> {
    let (u, v) = lam_b.split_at(m);
    let mut out = Vec::new();
    let mut push = |a: &[f64], s: f64| {
        let na = norm(&a[1..]);
        if na > 1e-12 {
            out.push(a[1..].iter().map(|x| s * x / na).collect());
        }
    };
    match kind {
        FamilyKind::RayPolar => push(u, -1.0),
        FamilyKind::PolarRay => push(v, -1.0),
        FamilyKind::Mixed => {
            for s in [1.0, -1.0] {
                push(u, s);
                push(v, s);
            }
        }
    }
    out
}

#[allow(clippy::too_many_arguments)]
fn sample_families(
    ctx: &Ctx,
    reps: &[ConeUnionRep],
    support: &[usize],
    extra: &[Vec<f64>],
    idx: &[usize],
    opts: &[Vec<Opt>],
    fams: &[(usize, usize)],
    relaxed_lam: &[f64],
    seed: u64,
    stats: &mut Stats,
) -> Option<Search> {
    let mut exact = ConePiece::free(ctx.pdim, "");
    for k in 0..ctx.n {
        let col: Vec<f64> = (0..ctx.pdim).map(|i| ctx.jac[(i, k)]).collect();
        exact = exact.eq(&col);
    }
    for (c, cov) in ctx.covered().iter().enumerate() {
        if !cov {
            exact = exact.eq(&crate::linalg::unit(ctx.pdim, c));
        }
    }
    for r in extra {
        exact = exact.le(r);
    }
    for (b, &i) in idx.iter().enumerate() {
        if let Opt::Piece(k) = opts[b][i] {
            exact = exact.intersect(&reps[b].pieces[k].pullback(&ctx.selector(&ctx.blocks[b])));
        }
    }
    let cands: Vec<Vec<Vec<f64>>> = fams
        .iter()
        .map(|&(b, k)| {
            let fam = &reps[b].families[k];
            let lam_b = ctx.block_lambda(&ctx.blocks[b], relaxed_lam);
            let mut c = family_hints(fam.kind, fam.m, &lam_b);
            c.extend(sphere_points(fam.m - 1, FAMILY_SAMPLES, seed.wrapping_add(b as u64)));
            c
        })
        .collect();
    let count = cands.iter().map(|c| c.len()).max().unwrap_or(0);
    let uses_alpha = fams
        .iter()
        .any(|&(b, k)| reps[b].families[k].kind == FamilyKind::Mixed);
    let alphas: &[f64] = if uses_alpha { &ALPHAS } else { &ALPHAS[..1] };
    for s in 0..count {
        for &alpha in alphas {
            let mut piece = exact.clone();
            for (j, &(b, k)) in fams.iter().enumerate() {
                let w = &cands[j][s % cands[j].len()];
                let inst = reps[b].families[k].instantiate(w, alpha);
                piece = piece.intersect(&inst.pullback(&ctx.selector(&ctx.blocks[b])));
            }
            stats.samples += 1;
            if let Feasibility::Found(lam) = find_nonzero(&ConicSystem::from_piece(&piece), support) {
                if let Some((lambda, labels)) = verify_multiplier(ctx, reps, support, extra, &lam) {
                    return Some(Search::Found { lambda, labels });
                }
            }
        }
    }
    None
}

/// Rescales to `|lambda|_inf = 1` and re-checks every condition independently of the LP.
fn verify_multiplier(
    ctx: &Ctx,
    reps: &[ConeUnionRep],
    support: &[usize],
    extra: &[Vec<f64>],
    lam: &[f64],
) -> Option<(Vec<f64>, Vec<String>)> {
    let mx = max_abs(lam);
    if mx == 0.0 {
        return None;
    }
    let lam: Vec<f64> = lam
        .iter()
        .map(|v| {
            let x = v / mx;
            if x.abs() < 1e-12 {
                0.0
            } else {
                x
            }
        })
        .collect();
    if norm(&ctx.adjoint(&lam)) > ADJOINT_TOL {
        return None;
    }
    if support.iter().all(|&i| lam[i].abs() < 1e-9) {
        return None;
    }
    if extra.iter().any(|r| dot(r, &lam) > ADJOINT_TOL * norm(r).max(1.0)) {
        return None;
    }
    let cov = ctx.covered();
    if lam.iter().zip(&cov).any(|(v, c)| !c && *v != 0.0) {
        return None;
    }
    let mut labels = Vec::new();
    for (b, rep) in ctx.blocks.iter().zip(reps) {
        let lb = ctx.block_lambda(b, &lam);
        let nb = norm(&lb);
        let unit = if nb > 0.0 { scale(1.0 / nb, &lb) } else { lb };
        let l = rep.matching_label(&unit, MEMBER_TOL)?;
        labels.push(format!("{}: {}", b.name, l));
    }
    Some((lam, labels))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mode {
    Limiting,
    Directional,
}

struct BranchOpt {
    region: ConePiece,
    normal: NormalSpec,
    label: String,
}

impl BranchOpt {
    fn is_exact(&self) -> bool {
        matches!(self.normal, NormalSpec::Fixed(_))
    }
}

fn block_branches(ctx: &Ctx, b: &Block, mode: Mode) -> Result<Vec<BranchOpt>> {
    let p = ctx.block_p(b);
    if mode == Mode::Limiting {
        if let Some(region) = block_cones::convex_tangent_piece(b.kind, &p, ctx.tol) {
            return Ok(vec![BranchOpt {
                region,
                normal: NormalSpec::Fixed(block_cones::limiting_rep(b.kind, &p, ctx.tol)?),
                label: format!("{}: tangent", b.name),
            }]);
        }
    }
    let lim = block_cones::limiting_rep(b.kind, &p, ctx.tol)?;
    Ok(block_cones::direction_branches(b.kind, &p, ctx.tol)?
        .into_iter()
        .map(|br| {
            let normal = match mode {
                Mode::Directional => br.normal,
                // The region of a varying branch stays a relaxation, so keep it inexact.
                Mode::Limiting => match br.normal {
                    NormalSpec::Fixed(_) => NormalSpec::Fixed(lim.clone()),
                    NormalSpec::Varying { .. } => NormalSpec::Varying { relaxed: lim.clone() },
                },
            };
            BranchOpt {
                region: br.region,
                normal,
                label: format!("{}: {}", b.name, br.label),
            }
        })
        .collect())
}

struct Pattern {
    choice: Vec<usize>,
    region: ConePiece,
    rep: Option<Vec<f64>>,
    exact: bool,
    labels: Vec<String>,
}

fn region_has_rows(p: &ConePiece) -> bool {
    p.eq_rows.nrows() + p.ineq_rows.nrows() + p.strict_rows.nrows() + p.soc.len() + p.soc_strict.len() > 0
}

/// Depth-first enumeration of branch patterns whose pulled-back region has a nonzero point.
fn enumerate_patterns(ctx: &Ctx, branches: &[Vec<BranchOpt>], stats: &mut Stats) -> Vec<Pattern> {
    let all: Vec<usize> = (0..ctx.n).collect();
    let jacs: Vec<DMatrix<f64>> = ctx.blocks.iter().map(|b| ctx.block_jac(b)).collect();
    let mut out = Vec::new();
    let mut choice = Vec::new();
    #[allow(clippy::too_many_arguments)]
    fn rec(
        branches: &[Vec<BranchOpt>],
        jacs: &[DMatrix<f64>],
        all: &[usize],
        region: ConePiece,
        choice: &mut Vec<usize>,
        out: &mut Vec<Pattern>,
        stats: &mut Stats,
    ) {
        let depth = choice.len();
        if depth == branches.len() {
            stats.pieces += 1;
            let f = find_nonzero(&ConicSystem::from_piece(&region), all);
            let rep = match f {
                Feasibility::Infeasible => return,
                Feasibility::Found(w) => Some(w),
                Feasibility::Undecided => None,
            };
            let exact = choice
                .iter()
                .enumerate()
                .all(|(b, &i)| branches[b][i].is_exact());
            let labels = choice
                .iter()
                .enumerate()
                .map(|(b, &i)| branches[b][i].label.clone())
                .collect();
            out.push(Pattern {
                choice: choice.clone(),
                region,
                rep,
                exact,
                labels,
            });
            return;
        }
        let single_free = branches[depth].len() == 1 && !region_has_rows(&branches[depth][0].region);
        for (i, br) in branches[depth].iter().enumerate() {
            let next = region.intersect(&br.region.pullback(&jacs[depth]));
            if !single_free && depth + 1 < branches.len() {
                stats.pieces += 1;
                if find_nonzero(&ConicSystem::from_piece(&next), all) == Feasibility::Infeasible {
                    continue;
                }
            }
            choice.push(i);
            rec(branches, jacs, all, next, choice, out, stats);
            choice.pop();
        }
    }
    if ctx.n == 0 {
        return out;
    }
    rec(
        branches,
        &jacs,
        &all,
        ConePiece::free(ctx.n, "linearized cone"),
        &mut choice,
        &mut out,
        stats,
    );
    out
}

/// One branch pattern of the linearized cone.
#[derive(Debug, Clone, PartialEq)]
pub struct CriticalPattern {
    /// Per-block tangent case labels.
    pub case_pattern: Vec<String>,
    /// The pattern's directions in `w`-space (a relaxation when `nonpolyhedral`).
    pub piece: ConePiece,
    pub representative: Option<Vec<f64>>,
    pub nonpolyhedral: bool,
}

/// The linearized cone as a union of branch patterns; empty means the cone is `{0}`.
#[derive(Debug, Clone, PartialEq)]
pub struct CriticalDirectionCone {
    pub patterns: Vec<CriticalPattern>,
}

impl CriticalDirectionCone {
    pub fn is_trivial(&self) -> bool {
        self.patterns.is_empty()
    }
}

pub fn build_critical_directions(inst: &ProblemInstance) -> Result<CriticalDirectionCone> {
    build_critical_directions_with(inst, &CheckConfig::default())
}

pub fn build_critical_directions_with(
    inst: &ProblemInstance,
    cfg: &CheckConfig,
) -> Result<CriticalDirectionCone> {
    let ctx = Ctx::new(inst, |_| true, cfg.tol)?;
    let branches = ctx
        .blocks
        .iter()
        .map(|b| block_branches(&ctx, b, Mode::Directional))
        .collect::<Result<Vec<_>>>()?;
    let mut stats = Stats::default();
    let patterns = enumerate_patterns(&ctx, &branches, &mut stats)
        .into_iter()
        .map(|p| CriticalPattern {
            case_pattern: p.labels,
            nonpolyhedral: !p.exact,
            piece: p.region,
            representative: p.rep,
        })
        .collect();
    Ok(CriticalDirectionCone { patterns })
}

/// Which multipliers the implication forces to zero and how normal cones are taken.
struct Implication {
    modes: Vec<Mode>,
    support: Vec<usize>,
    second_order: bool,
}

enum PatternResult {
    Certified,
    Violated(Certificate),
    Sampled,
    Undecided,
}

struct Outcome {
    status: CqStatus,
    certificate: Option<Certificate>,
    stats: Stats,
    cases: Vec<String>,
}

impl Outcome {
    fn into_verdict(self, condition: &str) -> CqVerdict {
        let mut v = CqVerdict::new(condition, self.status);
        v.certificate = self.certificate;
        v.samples_used = self.stats.samples;
        v.pieces_examined = self.stats.pieces;
        v.cases = self.cases;
        v
    }
}

fn block_reps_at(ctx: &Ctx, modes: &[Mode], w: &[f64]) -> Result<Option<Vec<ConeUnionRep>>> {
    let mut reps = Vec::with_capacity(ctx.blocks.len());
    for (b, &mode) in ctx.blocks.iter().zip(modes) {
        let p = ctx.block_p(b);
        let q = mat_vec_snapped(&ctx.block_jac(b), w);
        if !block_cones::tangent_contains(b.kind, &p, &q, ctx.tol)? {
            return Ok(None);
        }
        reps.push(match mode {
            Mode::Limiting => block_cones::limiting_rep(b.kind, &p, ctx.tol)?,
            Mode::Directional => block_cones::directional_rep(b.kind, &p, &q, ctx.tol)?,
        });
    }
    Ok(Some(reps))
}

/// Checks `lambda` against the exact cones at the direction `w`.
fn verify_at_direction(ctx: &Ctx, imp: &Implication, w: &[f64], lam: &[f64]) -> Option<Vec<String>> {
    let reps = block_reps_at(ctx, &imp.modes, w).ok()??;
    let extra = if imp.second_order {
        vec![ctx.hessian_row(w)]
    } else {
        Vec::new()
    };
    verify_multiplier(ctx, &reps, &imp.support, &extra, lam).map(|(_, l)| l)
}

fn direction_samples(ctx: &Ctx, pat: &Pattern, cfg: &CheckConfig, idx: usize) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    let push = |w: Vec<f64>, out: &mut Vec<Vec<f64>>| {
        let nw = norm(&w);
        if nw < 1e-9 {
            return;
        }
        let w = scale(1.0 / nw, &w);
        if out.iter().all(|o| norm(&sub(o, &w)) > 1e-9) {
            out.push(w);
        }
    };
    if let Some(r) = &pat.rep {
        push(r.clone(), &mut out);
    }
    let seed = cfg.seed.wrapping_add(1_000_003 * idx as u64);
    let basis = null_space(&pat.region.eq_rows, 1e-10);
    if !basis.is_empty() {
        let mut accepted = 0;
        for c in sphere_points(basis.len(), cfg.n_dir_samples.saturating_mul(8), seed) {
            if accepted >= cfg.n_dir_samples {
                break;
            }
            let mut w = vec![0.0; ctx.n];
            for (ci, b) in c.iter().zip(&basis) {
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi += ci * bi;
                }
            }
            if pat.region.contains(&w, 1e-9) {
                accepted += 1;
                push(w, &mut out);
            }
        }
    }
    let sys = ConicSystem::from_piece(&pat.region);
    let lp_count = cfg.n_dir_samples.min(MAX_LP_DIRECTIONS);
    for c in sphere_points(ctx.n, lp_count, seed.wrapping_add(7)) {
        if let Some(w) = maximize(&sys, &c, 1.0) {
            push(w, &mut out);
        }
    }
    out
}

fn process_pattern(
    ctx: &Ctx,
    imp: &Implication,
    branches: &[Vec<BranchOpt>],
    pat: &Pattern,
    cfg: &CheckConfig,
    idx: usize,
) -> (PatternResult, Stats) {
    let mut stats = Stats::default();
    let relaxed: Vec<ConeUnionRep> = pat
        .choice
        .iter()
        .enumerate()
        .map(|(b, &i)| match &branches[b][i].normal {
            NormalSpec::Fixed(r) => r.clone(),
            NormalSpec::Varying { relaxed } => relaxed.clone(),
        })
        .collect();
    let ray = null_space(&pat.region.eq_rows, 1e-10).len() <= 1;
    let extra = match (&pat.rep, imp.second_order && ray) {
        (Some(w), true) => vec![ctx.hessian_row(w)],
        _ => Vec::new(),
    };
    let seed = cfg.seed.wrapping_add(idx as u64);
    let first = search_multipliers(ctx, &relaxed, &imp.support, &extra, seed, &mut stats);
    if let Search::NoneExact = first {
        return (PatternResult::Certified, stats);
    }
    let fixed = pat.exact && pat.rep.is_some() && (ray || !imp.second_order);
    if fixed {
        let w = pat.rep.as_ref().expect("checked above");
        let res = match first {
            Search::Found { lambda, labels } => match verify_at_direction(ctx, imp, w, &lambda) {
                Some(_) => PatternResult::Violated(Certificate {
                    w: Some(w.clone()),
                    lambda: Some(lambda),
                    piece_labels: pat.labels.iter().cloned().chain(labels).collect(),
                }),
                None => PatternResult::Undecided,
            },
            Search::NoneSampled => PatternResult::Sampled,
            _ => PatternResult::Undecided,
        };
        return (res, stats);
    }
    let ws = direction_samples(ctx, pat, cfg, idx);
    let mut accepted = 0;
    let mut undecided = false;
    for chunk in ws.chunks(CHUNK) {
        let results: Vec<(Option<Search>, Stats)> = chunk
            .par_iter()
            .map(|w| {
                let mut st = Stats::default();
                let reps = match block_reps_at(ctx, &imp.modes, w) {
                    Ok(Some(r)) => r,
                    _ => return (None, st),
                };
                let extra = if imp.second_order {
                    vec![ctx.hessian_row(w)]
                } else {
                    Vec::new()
                };
                let s = search_multipliers(ctx, &reps, &imp.support, &extra, seed, &mut st);
                (Some(s), st)
            })
            .collect();
        for (w, (s, st)) in chunk.iter().zip(results) {
            stats.add(st);
            let Some(s) = s else { continue };
            accepted += 1;
            stats.samples += 1;
            match s {
                Search::Found { lambda, labels } => {
                    let cert = Certificate {
                        w: Some(w.clone()),
                        lambda: Some(lambda),
                        piece_labels: pat.labels.iter().cloned().chain(labels).collect(),
                    };
                    return (PatternResult::Violated(cert), stats);
                }
                Search::Undecided => undecided = true,
                _ => {}
            }
        }
    }
    if accepted == 0 || undecided {
        (PatternResult::Undecided, stats)
    } else {
        (PatternResult::Sampled, stats)
    }
}

fn run_implication(ctx: &Ctx, imp: &Implication, cfg: &CheckConfig) -> Result<Outcome> {
    let branches = ctx
        .blocks
        .iter()
        .zip(&imp.modes)
        .map(|(b, &m)| block_branches(ctx, b, m))
        .collect::<Result<Vec<_>>>()?;
    let mut stats = Stats::default();
    let patterns = enumerate_patterns(ctx, &branches, &mut stats);
    if patterns.is_empty() {
        return Ok(Outcome {
            status: CqStatus::Certified,
            certificate: None,
            stats,
            cases: vec!["linearized cone is {0}".into()],
        });
    }
    let results: Vec<(PatternResult, Stats)> = patterns
        .par_iter()
        .enumerate()
        .map(|(i, p)| process_pattern(ctx, imp, &branches, p, cfg, i))
        .collect();
    let mut all_certified = true;
    let mut undecided = false;
    let mut cases = Vec::new();
    for (pat, (res, st)) in patterns.iter().zip(results) {
        stats.add(st);
        match res {
            PatternResult::Violated(cert) => {
                return Ok(Outcome {
                    status: CqStatus::Violated,
                    certificate: Some(cert),
                    stats,
                    cases: Vec::new(),
                })
            }
            PatternResult::Certified => cases.push(pat.labels.join("; ")),
            PatternResult::Sampled => all_certified = false,
            PatternResult::Undecided => {
                all_certified = false;
                undecided = true;
            }
        }
    }
    let status = if all_certified {
        CqStatus::Certified
    } else if undecided {
        CqStatus::Inconclusive
    } else {
        CqStatus::InconclusiveSampled
    };
    if status != CqStatus::Certified {
        cases.clear();
    }
    Ok(Outcome {
        status,
        certificate: None,
        stats,
        cases,
    })
}

/// NNAMCQ-type check: no nonzero `lambda_S` in the limiting normal cones with `grad P^T lambda = 0`.
fn nnamcq_on(ctx: &Ctx, support: &[usize], name: &str, cfg: &CheckConfig) -> Result<CqVerdict> {
    let reps = ctx
        .blocks
        .iter()
        .map(|b| block_cones::limiting_rep(b.kind, &ctx.block_p(b), ctx.tol))
        .collect::<Result<Vec<_>>>()?;
    let mut stats = Stats::default();
    let s = search_multipliers(ctx, &reps, support, &[], cfg.seed, &mut stats);
    let status = match &s {
        Search::Found { .. } => CqStatus::Violated,
        Search::NoneExact => CqStatus::Certified,
        Search::NoneSampled => CqStatus::InconclusiveSampled,
        Search::Undecided => CqStatus::Inconclusive,
    };
    let mut v = CqVerdict::new(name, status);
    v.samples_used = stats.samples;
    v.pieces_examined = stats.pieces;
    match s {
        Search::Found { lambda, labels } => {
            v.certificate = Some(Certificate {
                w: None,
                lambda: Some(lambda),
                piece_labels: labels,
            })
        }
        Search::NoneExact => {
            v.cases = reps
                .iter()
                .zip(&ctx.blocks)
                .map(|(r, b)| {
                    let labels: Vec<&str> = r.pieces.iter().map(|p| p.label.as_str()).collect();
                    format!("{}: {}", b.name, labels.join(" | "))
                })
                .collect()
        }
        _ => {}
    }
    Ok(v)
}

pub fn check_nnamcq(inst: &ProblemInstance) -> CqVerdict {
    check_nnamcq_with(inst, &CheckConfig::default())
}

pub fn check_nnamcq_with(inst: &ProblemInstance, cfg: &CheckConfig) -> CqVerdict {
    let run = || -> Result<CqVerdict> {
        let ctx = Ctx::new(inst, |_| true, cfg.tol)?;
        let support = ctx.coords_where(|_| true);
        nnamcq_on(&ctx, &support, "NNAMCQ", cfg)
    };
    run().unwrap_or_else(|e| CqVerdict::failed("NNAMCQ", &e))
}

fn foscms_on(ctx: &Ctx, name: &str, cfg: &CheckConfig) -> Result<CqVerdict> {
    let support = ctx.coords_where(|_| true);
    let nn = nnamcq_on(ctx, &support, name, cfg)?;
    if nn.status == CqStatus::Certified {
        let mut v = CqVerdict::new(name, CqStatus::Certified).with_note("implied by NNAMCQ");
        v.pieces_examined = nn.pieces_examined;
        v.cases = nn.cases;
        return Ok(v);
    }
    let imp = Implication {
        modes: vec![Mode::Directional; ctx.blocks.len()],
        support,
        second_order: false,
    };
    let mut v = run_implication(ctx, &imp, cfg)?.into_verdict(name);
    v.pieces_examined += nn.pieces_examined;
    Ok(v)
}

pub fn check_foscms(inst: &ProblemInstance, n_dir_samples: usize, seed: u64) -> CqVerdict {
    check_foscms_with(
        inst,
        &CheckConfig {
            n_dir_samples,
            seed,
            ..CheckConfig::default()
        },
    )
}

pub fn check_foscms_with(inst: &ProblemInstance, cfg: &CheckConfig) -> CqVerdict {
    let run = || -> Result<CqVerdict> {
        let ctx = Ctx::new(inst, |_| true, cfg.tol)?;
        foscms_on(&ctx, "FOSCMS", cfg)
    };
    run().unwrap_or_else(|e| CqVerdict::failed("FOSCMS", &e))
}

/// FOSCMS where only the multipliers of groups outside `subsystem_one` must vanish.
pub fn check_split_foscms(
    inst: &ProblemInstance,
    subsystem_one: &[usize],
    n_dir_samples: usize,
    seed: u64,
) -> Result<CqVerdict> {
    check_split_foscms_with(
        inst,
        subsystem_one,
        &CheckConfig {
            n_dir_samples,
            seed,
            ..CheckConfig::default()
        },
    )
}

pub fn check_split_foscms_with(
    inst: &ProblemInstance,
    subsystem_one: &[usize],
    cfg: &CheckConfig,
) -> Result<CqVerdict> {
    let groups = inst.group_count();
    let mut seen = vec![false; groups];
    for &g in subsystem_one {
        if g >= groups {
            return Err(SoccpError::Partition(format!(
                "group {g} out of range (instance has {groups} groups)"
            )));
        }
        if std::mem::replace(&mut seen[g], true) {
            return Err(SoccpError::Partition(format!("group {g} listed twice")));
        }
    }
    let name = "split FOSCMS";
    let run = || -> Result<CqVerdict> {
        let ctx = Ctx::new(inst, |_| true, cfg.tol)?;
        let support = ctx.coords_where(|b| !seen[b.group]);
        let imp = Implication {
            modes: vec![Mode::Directional; ctx.blocks.len()],
            support,
            second_order: false,
        };
        Ok(run_implication(&ctx, &imp, cfg)?.into_verdict(name))
    };
    Ok(run().unwrap_or_else(|e| CqVerdict::failed(name, &e)))
}

fn is_eq_ineq(b: &Block) -> bool {
    !b.from_cone && matches!(b.kind, BlockKind::Eq | BlockKind::Ineq)
}

fn active_ineq(ctx: &Ctx, b: &Block) -> bool {
    b.kind == BlockKind::Ineq && ctx.p[b.coords[0]] >= -ctx.tol
}

/// Rank test of the gradients of `rows`; on failure returns a left null combination.
fn independence(ctx: &Ctx, rows: &[usize], name: &str) -> CqVerdict {
    let m = DMatrix::from_fn(rows.len(), ctx.n, |i, j| ctx.jac[(rows[i], j)]);
    if rank(&m, 1e-10) == rows.len() {
        let mut v = CqVerdict::new(name, CqStatus::Certified);
        v.cases = vec![format!("{} independent gradients", rows.len())];
        return v;
    }
    let null = null_space(&m.transpose(), 1e-10);
    let mut lam = vec![0.0; ctx.pdim];
    for (c, &r) in null[0].iter().zip(rows) {
        lam[r] = *c;
    }
    let mx = max_abs(&lam);
    let lam = scale(1.0 / mx, &lam);
    let mut v = CqVerdict::new(name, CqStatus::Violated);
    v.certificate = Some(Certificate {
        w: None,
        lambda: Some(lam),
        piece_labels: vec!["linear dependence of active gradients".into()],
    });
    v
}

fn affine_verdict(inst: &ProblemInstance, ctx: &Ctx, name: &str) -> CqVerdict {
    let rows = ctx.coords_where(|_| true);
    if inst.rows_affine(&rows) {
        let mut v = CqVerdict::new(name, CqStatus::Certified);
        v.cases = vec!["all maps affine".into()];
        v
    } else {
        CqVerdict::new(name, CqStatus::NotApplicable).with_note("some maps are not affine")
    }
}

/// Nonzero point of the linearized cone of the selected blocks, using convex tangent pieces.
fn nonzero_direction(ctx: &Ctx, name: &str, modes: &[Mode], stats: &mut Stats) -> Result<CqVerdict> {
    let branches = ctx
        .blocks
        .iter()
        .zip(modes)
        .map(|(b, &m)| block_branches(ctx, b, m))
        .collect::<Result<Vec<_>>>()?;
    let pats = enumerate_patterns(ctx, &branches, stats);
    let mut v = if pats.is_empty() {
        let mut v = CqVerdict::new(name, CqStatus::Certified);
        v.cases = vec!["linearized cone is {0}".into()];
        v
    } else if let Some(p) = pats.iter().find(|p| p.rep.is_some()) {
        let mut v = CqVerdict::new(name, CqStatus::Violated);
        v.certificate = Some(Certificate {
            w: p.rep.clone(),
            lambda: None,
            piece_labels: p.labels.clone(),
        });
        v
    } else {
        CqVerdict::new(name, CqStatus::Inconclusive)
    };
    v.pieces_examined = stats.pieces;
    Ok(v)
}

fn not_implemented(name: &str) -> CqVerdict {
    CqVerdict::new(name, CqStatus::NotImplemented).with_note("not implemented by design")
}

/// Conditions for the equality/inequality part of `F`.
pub fn eq_ineq_ms_report(inst: &ProblemInstance) -> Vec<(String, CqVerdict)> {
    eq_ineq_ms_report_with(inst, &CheckConfig::default())
}

pub fn eq_ineq_ms_report_with(inst: &ProblemInstance, cfg: &CheckConfig) -> Vec<(String, CqVerdict)> {
    let names = [
        "Linear CQ",
        "LICQ",
        "MFCQ",
        "NNAMCQ",
        "quasinormality",
        "RCPLD",
        "no nonzero linearized direction",
        "SOSCMS",
    ];
    let ctx = match Ctx::new(inst, is_eq_ineq, cfg.tol) {
        Ok(c) => c,
        Err(e) => {
            return names
                .iter()
                .map(|n| (n.to_string(), CqVerdict::failed(n, &e)))
                .collect()
        }
    };
    let all = ctx.coords_where(|_| true);
    let eq_rows = ctx.coords_where(|b| b.kind == BlockKind::Eq);
    let active: Vec<usize> = ctx.coords_where(|b| active_ineq(&ctx, b));
    let or_fail = |name: &str, r: Result<CqVerdict>| r.unwrap_or_else(|e| CqVerdict::failed(name, &e));

    let linear = affine_verdict(inst, &ctx, names[0]);
    let licq = {
        let rows: Vec<usize> = eq_rows.iter().chain(&active).copied().collect();
        independence(&ctx, &rows, names[1])
    };
    let nnamcq = or_fail(names[3], nnamcq_on(&ctx, &all, names[3], cfg));
    let mfcq = {
        let dep = independence(&ctx, &eq_rows, names[2]);
        if dep.status == CqStatus::Violated || active.is_empty() {
            dep
        } else {
            let mut piece = ConePiece::free(ctx.n, "strict descent");
            for &r in &eq_rows {
                piece = piece.eq(&matrix_rows(&ctx.jac)[r]);
            }
            for &r in &active {
                piece = piece.lt(&matrix_rows(&ctx.jac)[r]);
            }
            let support: Vec<usize> = (0..ctx.n).collect();
            let mut v = match find_nonzero(&ConicSystem::from_piece(&piece), &support) {
                Feasibility::Found(d) => {
                    let mut v = CqVerdict::new(names[2], CqStatus::Certified);
                    v.cases = vec![format!("strict descent direction {d:?}")];
                    v
                }
                Feasibility::Infeasible => {
                    // Without a strict direction a nonzero abnormal multiplier exists.
                    let mut v = CqVerdict::new(names[2], nnamcq.status);
                    if nnamcq.status == CqStatus::Violated {
                        v.certificate = nnamcq.certificate.clone();
                    } else {
                        v.status = CqStatus::Inconclusive;
                    }
                    v
                }
                Feasibility::Undecided => CqVerdict::new(names[2], CqStatus::Inconclusive),
            };
            v.pieces_examined = 1;
            v
        }
    };
    let mut stats = Stats::default();
    let modes = vec![Mode::Limiting; ctx.blocks.len()];
    let direction = or_fail(names[6], nonzero_direction(&ctx, names[6], &modes, &mut stats));
    let soscms = or_fail(
        names[7],
        run_implication(
            &ctx,
            &Implication {
                modes,
                support: all.clone(),
                second_order: true,
            },
            cfg,
        )
        .map(|o| o.into_verdict(names[7])),
    );
    vec![
        linear,
        licq,
        mfcq,
        nnamcq,
        not_implemented(names[4]),
        not_implemented(names[5]),
        direction,
        soscms,
    ]
    .into_iter()
    .map(|v| (v.condition.clone(), v))
    .collect()
}

fn premise_holds(report: &[(String, CqVerdict)]) -> bool {
    report.iter().any(|(_, v)| v.status == CqStatus::Certified)
}

fn downgrade_without_premise(mut v: CqVerdict, premise: bool, what: &str) -> CqVerdict {
    if !premise && v.status == CqStatus::Certified {
        v.status = CqStatus::Inconclusive;
        v.cases.clear();
        v.note = Some(format!("{what} not certified"));
    }
    v
}

/// Conditions for the equality/inequality/vector complementarity part of `F`.
pub fn mpec_ms_report(inst: &ProblemInstance) -> Vec<(String, CqVerdict)> {
    mpec_ms_report_with(inst, &CheckConfig::default())
}

pub fn mpec_ms_report_with(inst: &ProblemInstance, cfg: &CheckConfig) -> Vec<(String, CqVerdict)> {
    let names = [
        "Linearity CQ",
        "MPEC LICQ",
        "MPEC NNAMCQ",
        "MPEC quasi-normality",
        "MPEC linearized cone is {0}",
        "MPEC FOSCMS",
        "MPEC SOSCMS",
    ];
    let wrap = |vs: Vec<CqVerdict>| vs.into_iter().map(|v| (v.condition.clone(), v)).collect();
    let f_blocks: Vec<Block> = inst.blocks().into_iter().filter(|b| !b.from_cone).collect();
    if f_blocks
        .iter()
        .any(|b| matches!(b.kind, BlockKind::Soc(_)) || matches!(b.kind, BlockKind::Comp(m) if m > 1))
    {
        return wrap(
            names
                .iter()
                .map(|n| {
                    CqVerdict::new(n, CqStatus::NotApplicable)
                        .with_note("F has second-order cone blocks")
                })
                .collect(),
        );
    }
    let ctx = match Ctx::new(inst, |b| !b.from_cone, cfg.tol) {
        Ok(c) => c,
        Err(e) => return wrap(names.iter().map(|n| CqVerdict::failed(n, &e)).collect()),
    };
    let or_fail = |name: &str, r: Result<CqVerdict>| r.unwrap_or_else(|e| CqVerdict::failed(name, &e));
    let all = ctx.coords_where(|_| true);
    let linear = affine_verdict(inst, &ctx, names[0]);
    let licq = {
        let mut rows = Vec::new();
        for b in &ctx.blocks {
            match b.kind {
                BlockKind::Eq => rows.push(b.coords[0]),
                BlockKind::Ineq if active_ineq(&ctx, b) => rows.push(b.coords[0]),
                BlockKind::Comp(1) => {
                    for &c in &b.coords {
                        if ctx.p[c].abs() <= ctx.tol {
                            rows.push(c);
                        }
                    }
                }
                _ => {}
            }
        }
        independence(&ctx, &rows, names[1])
    };
    let nnamcq = or_fail(names[2], nnamcq_on(&ctx, &all, names[2], cfg));
    let modes: Vec<Mode> = ctx
        .blocks
        .iter()
        .map(|b| {
            if is_eq_ineq(b) {
                Mode::Limiting
            } else {
                Mode::Directional
            }
        })
        .collect();
    let mut stats = Stats::default();
    let direction = or_fail(names[4], nonzero_direction(&ctx, names[4], &modes, &mut stats));
    let premise = premise_holds(&eq_ineq_ms_report_with(inst, cfg));
    let comp = ctx.coords_where(|b| !is_eq_ineq(b));
    let implication = |name: &str, second_order: bool| {
        let imp = Implication {
            modes: modes.clone(),
            support: comp.clone(),
            second_order,
        };
        let v = or_fail(name, run_implication(&ctx, &imp, cfg).map(|o| o.into_verdict(name)));
        downgrade_without_premise(v, premise, "metric subregularity of the g, h subsystem")
    };
    wrap(vec![
        linear,
        licq,
        nnamcq,
        not_implemented(names[3]),
        direction,
        implication(names[5], false),
        implication(names[6], true),
    ])
}

/// The combined condition for SOC complementarity pairs on top of `F(z) in Lambda`.
pub fn check_final_theorem(inst: &ProblemInstance, n_dir_samples: usize, seed: u64) -> CqVerdict {
    check_final_theorem_with(
        inst,
        &CheckConfig {
            n_dir_samples,
            seed,
            ..CheckConfig::default()
        },
    )
}

pub fn check_final_theorem_with(inst: &ProblemInstance, cfg: &CheckConfig) -> CqVerdict {
    let name = "final theorem";
    let run = || -> Result<CqVerdict> {
        let f_blocks: Vec<Block> = inst.blocks().into_iter().filter(|b| !b.from_cone).collect();
        let premise = if f_blocks.is_empty() {
            true
        } else if f_blocks.iter().all(is_eq_ineq) {
            premise_holds(&eq_ineq_ms_report_with(inst, cfg))
        } else if f_blocks
            .iter()
            .all(|b| is_eq_ineq(b) || b.kind == BlockKind::Comp(1))
        {
            premise_holds(&mpec_ms_report_with(inst, cfg))
        } else {
            let fctx = Ctx::new(inst, |b| !b.from_cone, cfg.tol)?;
            foscms_on(&fctx, "FOSCMS of F", cfg)?.status == CqStatus::Certified
        };
        let ctx = Ctx::new(inst, |_| true, cfg.tol)?;
        let modes = ctx
            .blocks
            .iter()
            .map(|b| {
                if is_eq_ineq(b) {
                    Mode::Limiting
                } else {
                    Mode::Directional
                }
            })
            .collect();
        let imp = Implication {
            modes,
            support: ctx.coords_where(|b| b.from_cone),
            second_order: false,
        };
        let v = run_implication(&ctx, &imp, cfg)?.into_verdict(name);
        Ok(downgrade_without_premise(v, premise, "metric subregularity of F(z) in Lambda"))
    };
    run().unwrap_or_else(|e| CqVerdict::failed(name, &e))
}

/// Which conditions [`run_check`] evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CqKind {
    Nnamcq,
    Foscms,
    Split,
    EqIneq,
    Mpec,
    Final,
    All,
}

/// Runs the selected checks; `partition` is only used by the split check.
pub fn run_check(
    inst: &ProblemInstance,
    kind: CqKind,
    partition: &[usize],
    cfg: &CheckConfig,
) -> Result<Vec<CqVerdict>> {
    let strip = |r: Vec<(String, CqVerdict)>| r.into_iter().map(|(_, v)| v).collect::<Vec<_>>();
    Ok(match kind {
        CqKind::Nnamcq => vec![check_nnamcq_with(inst, cfg)],
        CqKind::Foscms => vec![check_foscms_with(inst, cfg)],
        CqKind::Split => vec![check_split_foscms_with(inst, partition, cfg)?],
        CqKind::EqIneq => strip(eq_ineq_ms_report_with(inst, cfg)),
        CqKind::Mpec => strip(mpec_ms_report_with(inst, cfg)),
        CqKind::Final => vec![check_final_theorem_with(inst, cfg)],
        CqKind::All => {
            let mut out = vec![check_nnamcq_with(inst, cfg), check_foscms_with(inst, cfg)];
            if !partition.is_empty() {
                out.push(check_split_foscms_with(inst, partition, cfg)?);
            }
            out.extend(strip(eq_ineq_ms_report_with(inst, cfg)));
            out.extend(strip(mpec_ms_report_with(inst, cfg)));
            out.push(check_final_theorem_with(inst, cfg));
            out
        }
    })
}

/// Independent re-check of a multiplier certificate: adjoint residual,
/// normalisation and membership of every block in its cone at `w`
/// (directional) or at `P(z*)` (limiting, when `w` is `None`).
pub fn verify_certificate(inst: &ProblemInstance, cert: &Certificate, tol: f64) -> bool {
    let Some(lam) = &cert.lambda else {
        return cert.w.as_ref().is_some_and(|w| norm(w) > 0.0);
    };
    let Ok(ctx) = Ctx::new(inst, |_| true, tol) else {
        return false;
    };
    if lam.len() != ctx.pdim || (max_abs(lam) - 1.0).abs() > 1e-12 {
        return false;
    }
    if norm(&ctx.adjoint(lam)) > ADJOINT_TOL {
        return false;
    }
    ctx.blocks.iter().all(|b| {
        let p = ctx.block_p(b);
        let rep = match &cert.w {
            Some(w) => {
                let q = mat_vec_snapped(&ctx.block_jac(b), w);
                if is_eq_ineq(b) {
                    block_cones::limiting_rep(b.kind, &p, tol)
                } else {
                    block_cones::directional_rep(b.kind, &p, &q, tol)
                }
            }
            None => block_cones::limiting_rep(b.kind, &p, tol),
        };
        let lb = ctx.block_lambda(b, lam);
        let nb = norm(&lb);
        let unit = if nb > 0.0 { scale(1.0 / nb, &lb) } else { lb };
        rep.is_ok_and(|r| r.contains(&unit, MEMBER_TOL))
    })
}
