//! Random points, pairs, directions and instances.

use super::soc::{self, hat, scale, Region};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use soccp::comp_set::CompCaseTag;
use soccp::problem_model::{
    LambdaBlockSpec, LambdaBlockType, LambdaStructure, MapSpec, ProblemInstance,
};

pub type R = ChaCha8Rng;

pub fn rng(seed: u64) -> R {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gauss(r: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| r.sample(StandardNormal)).collect()
}

pub fn unit(r: &mut R, n: usize) -> Vec<f64> {
    loop {
        let g = gauss(r, n);
        if soc::norm(&g) > 1e-3 {
            return soc::unit(&g);
        }
    }
}

/// A point of the region with a relative margin of 0.2 from the other regions.
pub fn point_in(r: &mut R, m: usize, region: Region) -> Vec<f64> {
    let rad: f64 = r.random_range(0.5..2.0);
    let pos = |r: &mut R, first: f64, tail: f64| -> Vec<f64> {
        let mut z = vec![first];
        if m > 1 {
            z.extend(unit(r, m - 1).iter().map(|v| v * tail));
        }
        z
    };
    match region {
        Region::Zero => vec![0.0; m],
        Region::InteriorK => {
            let c: f64 = r.random_range(0.0..0.8);
            pos(r, rad, c * rad)
        }
        Region::BoundaryK => pos(r, rad, rad),
        Region::Outside => {
            let c: f64 = r.random_range(-0.8..0.8);
            pos(r, c * rad, rad)
        }
        Region::InteriorNegK => scale(-1.0, &point_in(r, m, Region::InteriorK)),
        Region::BoundaryNegK => scale(-1.0, &point_in(r, m, Region::BoundaryK)),
    }
}

pub fn tags_for(m: usize) -> Vec<CompCaseTag> {
    use CompCaseTag::*;
    if m == 1 {
        vec![XZeroYInt, XIntYZero, BothZero]
    } else {
        vec![XZeroYInt, XIntYZero, BothBoundary, XBoundaryYZero, XZeroYBoundary, BothZero]
    }
}

/// A pair of the complementarity set in the requested case.
pub fn pair_in(r: &mut R, m: usize, tag: CompCaseTag) -> (Vec<f64>, Vec<f64>) {
    use CompCaseTag::*;
    let z = vec![0.0; m];
    match tag {
        XZeroYInt => (z, point_in(r, m, Region::InteriorK)),
        XIntYZero => (point_in(r, m, Region::InteriorK), z),
        XBoundaryYZero => (point_in(r, m, Region::BoundaryK), z),
        XZeroYBoundary => (z, point_in(r, m, Region::BoundaryK)),
        BothBoundary => {
            let x = point_in(r, m, Region::BoundaryK);
            let k: f64 = r.random_range(0.2..5.0);
            let y = scale(k, &hat(&x));
            (x, y)
        }
        BothZero => (z.clone(), z),
    }
}

/// A tangent direction `(Pi'(s; h), Pi'(s; h) - h)` with `s = x - y`.
pub fn tangent_direction(r: &mut R, x: &[f64], y: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let s = soc::sub(x, y);
    let h = gauss(r, x.len());
    let d = soccp::soc_core::project_soc_dir_deriv(&s, &h);
    let w = soc::sub(&d, &h);
    (d, w)
}

fn small_int(r: &mut R) -> f64 {
    [-1.0, 0.0, 0.0, 1.0, 2.0][r.random_range(0..5)]
}

fn lam(kind: LambdaBlockType, dim: usize) -> LambdaBlockSpec {
    LambdaBlockSpec { kind, dim }
}

/// Splits the stacked value/Jacobian targets into `F`, `G`, `H` maps at `z* = 0`.
#[allow(clippy::too_many_arguments)]
fn assemble(
    name: String,
    n: usize,
    lambda: Vec<LambdaBlockSpec>,
    soc_dims: Vec<usize>,
    p0: Vec<f64>,
    jac: DMatrix<f64>,
    quad: bool,
    r: &mut R,
) -> ProblemInstance {
    let l: usize = lambda.iter().map(|b| b.dim).sum();
    let mc: usize = soc_dims.iter().sum();
    let map = |rows: std::ops::Range<usize>, r: &mut R| -> MapSpec {
        let a = jac.rows(rows.start, rows.len()).into_owned();
        let b = p0[rows.clone()].to_vec();
        if quad {
            let q = rows
                .map(|_| {
                    let g = DMatrix::from_fn(n, n, |_, _| small_int(r));
                    &g + g.transpose()
                })
                .collect();
            MapSpec::quadratic(q, a, b)
        } else {
            MapSpec::affine(a, b)
        }
    };
    let f = map(0..l, r);
    let g = map(l..l + mc, r);
    let h = map(l + mc..l + 2 * mc, r);
    ProblemInstance {
        name,
        n,
        f,
        g,
        h,
        lambda_structure: LambdaStructure { blocks: lambda },
        soc_dims,
        z_star: vec![0.0; n],
    }
}

/// Stacks per-block values in `P` order: `Lambda` entries first, then the `G` and `H` halves.
struct Layout {
    lambda: Vec<LambdaBlockSpec>,
    f_vals: Vec<f64>,
    soc_dims: Vec<usize>,
    g_vals: Vec<f64>,
    h_vals: Vec<f64>,
}

impl Layout {
    fn new() -> Self {
        Self {
            lambda: Vec::new(),
            f_vals: Vec::new(),
            soc_dims: Vec::new(),
            g_vals: Vec::new(),
            h_vals: Vec::new(),
        }
    }

    fn p0(&self) -> Vec<f64> {
        let mut p = self.f_vals.clone();
        p.extend(&self.g_vals);
        p.extend(&self.h_vals);
        p
    }
}

fn scalar_pair_value(r: &mut R) -> (f64, f64) {
    match r.random_range(0..4) {
        0 | 1 => (0.0, 0.0),
        2 => (1.0, 0.0),
        _ => (0.0, 1.0),
    }
}

/// A random instance whose blocks are all scalar: equalities, inequalities,
/// half-lines and scalar complementarity pairs.
pub fn scalar_instance(r: &mut R, idx: usize) -> ProblemInstance {
    let n = r.random_range(1..=3);
    let mut lay = Layout::new();
    let nblocks = r.random_range(1..=4);
    for _ in 0..nblocks {
        match r.random_range(0..5) {
            0 => {
                lay.lambda.push(lam(LambdaBlockType::Eq, 1));
                lay.f_vals.push(0.0);
            }
            1 => {
                lay.lambda.push(lam(LambdaBlockType::Ineq, 1));
                lay.f_vals.push(if r.random_bool(0.75) { 0.0 } else { -1.0 });
            }
            2 => {
                lay.lambda.push(lam(LambdaBlockType::Soc, 1));
                lay.f_vals.push(if r.random_bool(0.75) { 0.0 } else { 1.0 });
            }
            3 => {
                let (a, b) = scalar_pair_value(r);
                lay.lambda.push(lam(LambdaBlockType::Veccomp, 2));
                lay.f_vals.extend([a, b]);
            }
            _ => {
                let (a, b) = scalar_pair_value(r);
                lay.soc_dims.push(1);
                lay.g_vals.push(a);
                lay.h_vals.push(b);
            }
        }
    }
    let p0 = lay.p0();
    let jac = DMatrix::from_fn(p0.len(), n, |_, _| small_int(r));
    let quad = r.random_bool(0.3);
    assemble(format!("scalar_{idx}"), n, lay.lambda, lay.soc_dims, p0, jac, quad, r)
}

/// Random mixed blocks with SOC pairs of dimension up to 3; returns the layout
/// and per-block values at `z* = 0`.
fn mixed_layout(r: &mut R, allow_comp: bool) -> Layout {
    let mut lay = Layout::new();
    let nblocks = r.random_range(1..=3);
    for _ in 0..nblocks {
        let choice = if allow_comp { r.random_range(0..5) } else { r.random_range(0..3) };
        match choice {
            0 => {
                lay.lambda.push(lam(LambdaBlockType::Eq, 1));
                lay.f_vals.push(0.0);
            }
            1 => {
                lay.lambda.push(lam(LambdaBlockType::Ineq, 1));
                lay.f_vals.push(if r.random_bool(0.7) { 0.0 } else { -1.0 });
            }
            2 => {
                let m = r.random_range(1..=3);
                let region = [Region::Zero, Region::BoundaryK, Region::InteriorK][r.random_range(0..3)];
                let region = if m == 1 && region == Region::BoundaryK { Region::Zero } else { region };
                lay.lambda.push(lam(LambdaBlockType::Soc, m));
                lay.f_vals.extend(point_in(r, m, region));
            }
            3 => {
                let m = r.random_range(1..=3);
                let tags = tags_for(m);
                let tag = tags[r.random_range(0..tags.len())];
                let (x, y) = pair_in(r, m, tag);
                lay.lambda.push(lam(LambdaBlockType::Soccomp, 2 * m));
                lay.f_vals.extend(x);
                lay.f_vals.extend(y);
            }
            _ => {
                let m = r.random_range(1..=3);
                let tags = tags_for(m);
                let tag = tags[r.random_range(0..tags.len())];
                let (x, y) = pair_in(r, m, tag);
                lay.soc_dims.push(m);
                lay.g_vals.extend(x);
                lay.h_vals.extend(y);
            }
        }
    }
    lay
}

/// An instance whose Jacobian at `z*` has a nontrivial kernel.
pub fn rank_deficient_instance(r: &mut R, idx: usize) -> ProblemInstance {
    let n = r.random_range(2..=3);
    let lay = mixed_layout(r, true);
    let p0 = lay.p0();
    let mut jac = DMatrix::from_fn(p0.len(), n, |_, _| small_int(r));
    // last column repeats (a multiple of) the first
    let c: f64 = [1.0, -1.0, 2.0][r.random_range(0..3)];
    for i in 0..jac.nrows() {
        jac[(i, n - 1)] = c * jac[(i, 0)];
    }
    assemble(format!("rank_deficient_{idx}"), n, lay.lambda, lay.soc_dims, p0, jac, false, r)
}

/// A tangent direction of the block with value `p` (equality, inequality or cone).
fn tangent_of(r: &mut R, kind: LambdaBlockType, p: &[f64]) -> Vec<f64> {
    match kind {
        LambdaBlockType::Eq => vec![0.0],
        LambdaBlockType::Ineq => {
            if p[0] < 0.0 {
                vec![r.random_range(-1.0..1.0)]
            } else {
                vec![-r.random_range(0.0..1.0)]
            }
        }
        _ => {
            let m = p.len();
            if soc::norm(p) == 0.0 {
                {
                let reg = [Region::InteriorK, Region::BoundaryK][r.random_range(0..2)];
                point_in(r, m, reg)
            }
            } else if m == 1 || p[0] > soc::tail_norm(p) + 1e-12 {
                gauss(r, m)
            } else {
                // alpha p + beta t with t orthogonal to p_hat
                let ph = soc::unit(&hat(p));
                let g = gauss(r, m);
                let t = soc::sub(&g, &scale(soc::dot(&g, &ph), &ph));
                let a: f64 = r.random_range(0.0..1.0);
                soc::add(&scale(a, p), &t)
            }
        }
    }
}

/// A convex instance (equalities, inequalities, cones) with a known nonzero
/// linearized direction `w0`.
pub fn convex_instance(r: &mut R, idx: usize) -> ProblemInstance {
    let n = r.random_range(2..=3);
    let lay = mixed_layout(r, false);
    let p0 = lay.p0();
    let base = DMatrix::from_fn(p0.len(), n, |_, _| small_int(r));
    let w0 = unit(r, n);
    let mut target = Vec::new();
    let mut off = 0;
    for spec in &lay.lambda {
        let pb = &p0[off..off + spec.dim];
        match spec.kind {
            LambdaBlockType::Eq | LambdaBlockType::Ineq => {
                for i in 0..spec.dim {
                    target.extend(tangent_of(r, spec.kind, &pb[i..i + 1]));
                }
            }
            _ => target.extend(tangent_of(r, spec.kind, pb)),
        }
        off += spec.dim;
    }
    // rank-one correction so that jac * w0 = target
    let bw = &base * nalgebra::DVector::from_column_slice(&w0);
    let corr = nalgebra::DVector::from_vec(target) - bw;
    let jac = &base + corr * nalgebra::DVector::from_column_slice(&w0).transpose();
    assemble(format!("convex_{idx}"), n, lay.lambda, lay.soc_dims, p0, jac, false, r)
}
