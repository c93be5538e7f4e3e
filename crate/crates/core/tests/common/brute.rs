//! Exhaustive first-order check for instances whose blocks are all scalar.
//!
//! Every block's tangent cone is split into relatively open faces; on each
//! face the directional normal cone is constant and polyhedral. The
//! condition fails iff some combination of faces admits a nonzero direction
//! and a nonzero multiplier annihilated by the transposed Jacobian.

use microlp::{ComparisonOp, OptimizationDirection, Problem};
use nalgebra::DMatrix;
use soccp::problem_model::{BlockKind, ProblemInstance};

const ZERO: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
enum Sign {
    Free,
    Zero,
    NonNeg,
    NonPos,
}

/// Face of a block's tangent cone: each block coordinate is `= 0`, `> 0`,
/// `< 0` or free, with the list of normal pieces valid on it.
#[derive(Clone, Debug)]
struct Face {
    dir: Vec<Sign>,
    normals: Vec<Vec<Sign>>,
}

fn face(dir: &[Sign], normals: &[&[Sign]]) -> Face {
    Face {
        dir: dir.to_vec(),
        normals: normals.iter().map(|n| n.to_vec()).collect(),
    }
}

fn faces_of(kind: BlockKind, p: &[f64]) -> Vec<Face> {
    use Sign::*;
    let zero = |v: f64| v.abs() <= ZERO;
    match kind {
        BlockKind::Eq => vec![face(&[Zero], &[&[Free]])],
        BlockKind::Ineq => {
            if zero(p[0]) {
                vec![face(&[NonPos], &[&[Zero]]), face(&[Zero], &[&[NonNeg]])]
            } else {
                vec![face(&[Free], &[&[Zero]])]
            }
        }
        BlockKind::Soc(1) => {
            if zero(p[0]) {
                vec![face(&[NonNeg], &[&[Zero]]), face(&[Zero], &[&[NonPos]])]
            } else {
                vec![face(&[Free], &[&[Zero]])]
            }
        }
        BlockKind::Comp(1) => match (zero(p[0]), zero(p[1])) {
            (false, true) => vec![face(&[Free, Zero], &[&[Zero, Free]])],
            (true, false) => vec![face(&[Zero, Free], &[&[Free, Zero]])],
            _ => vec![
                face(&[NonNeg, Zero], &[&[Zero, Free]]),
                face(&[Zero, NonNeg], &[&[Free, Zero]]),
                face(&[Zero, Zero], &[&[NonPos, NonPos], &[Zero, Free], &[Free, Zero]]),
            ],
        },
        other => panic!("brute force handles scalar blocks only, got {other:?}"),
    }
}

/// `NonNeg`/`NonPos` on direction faces mean strictly positive/negative.
fn direction_exists(jac: &DMatrix<f64>, rows: &[(usize, Sign)]) -> bool {
    let n = jac.ncols();
    let strict: Vec<_> = rows.iter().filter(|(_, s)| matches!(s, Sign::NonNeg | Sign::NonPos)).collect();
    let eqs: Vec<usize> = rows.iter().filter(|(_, s)| *s == Sign::Zero).map(|(i, _)| *i).collect();
    if strict.is_empty() {
        if eqs.is_empty() {
            return n > 0;
        }
        let sub = DMatrix::from_fn(eqs.len(), n, |r, c| jac[(eqs[r], c)]);
        return sub.rank(1e-9) < n;
    }
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let w: Vec<_> = (0..n).map(|_| lp.add_var(0.0, (f64::NEG_INFINITY, f64::INFINITY))).collect();
    let row = |i: usize| -> Vec<_> { (0..n).map(|c| (w[c], jac[(i, c)])).collect() };
    for &i in &eqs {
        lp.add_constraint(row(i), ComparisonOp::Eq, 0.0);
    }
    for (i, s) in strict {
        match s {
            Sign::NonNeg => lp.add_constraint(row(*i), ComparisonOp::Ge, 1.0),
            _ => lp.add_constraint(row(*i), ComparisonOp::Le, -1.0),
        }
    }
    lp.solve().is_ok()
}

/// Nonzero `lambda` with the given sign pattern and `jac^T lambda = 0`.
fn multiplier_exists(jac: &DMatrix<f64>, signs: &[Sign]) -> bool {
    let (pdim, n) = jac.shape();
    for j in 0..pdim {
        for target in [1.0, -1.0] {
            let ok = match signs[j] {
                Sign::Zero => false,
                Sign::NonNeg => target > 0.0,
                Sign::NonPos => target < 0.0,
                Sign::Free => true,
            };
            if !ok {
                continue;
            }
            let mut lp = Problem::new(OptimizationDirection::Minimize);
            let lam: Vec<_> = (0..pdim)
                .map(|i| {
                    let b = if i == j {
                        (target, target)
                    } else {
                        match signs[i] {
                            Sign::Free => (f64::NEG_INFINITY, f64::INFINITY),
                            Sign::Zero => (0.0, 0.0),
                            Sign::NonNeg => (0.0, f64::INFINITY),
                            Sign::NonPos => (f64::NEG_INFINITY, 0.0),
                        }
                    };
                    lp.add_var(0.0, b)
                })
                .collect();
            for c in 0..n {
                let expr: Vec<_> = (0..pdim).map(|i| (lam[i], jac[(i, c)])).collect();
                lp.add_constraint(expr, ComparisonOp::Eq, 0.0);
            }
            if lp.solve().is_ok() {
                return true;
            }
        }
    }
    false
}

/// True when the first-order condition holds at `z*`.
pub fn foscms_holds(inst: &ProblemInstance) -> bool {
    let (p, jac) = inst.eval_p(&inst.z_star).expect("instance evaluates");
    let blocks = inst.blocks();
    let per_block: Vec<(Vec<usize>, Vec<Face>)> = blocks
        .iter()
        .map(|b| {
            let vals: Vec<f64> = b.coords.iter().map(|&c| p[c]).collect();
            (b.coords.clone(), faces_of(b.kind, &vals))
        })
        .collect();
    let mut idx = vec![0usize; per_block.len()];
    loop {
        let mut rows = Vec::new();
        for (k, (coords, faces)) in per_block.iter().enumerate() {
            for (c, s) in coords.iter().zip(&faces[idx[k]].dir) {
                if *s != Sign::Free {
                    rows.push((*c, *s));
                }
            }
        }
        if direction_exists(&jac, &rows) && any_multiplier(&jac, &per_block, &idx) {
            return false;
        }
        if !advance(&mut idx, |k| per_block[k].1.len()) {
            return true;
        }
    }
}

fn any_multiplier(jac: &DMatrix<f64>, per_block: &[(Vec<usize>, Vec<Face>)], fidx: &[usize]) -> bool {
    let mut pidx = vec![0usize; per_block.len()];
    loop {
        let mut signs = vec![Sign::Zero; jac.nrows()];
        for (k, (coords, faces)) in per_block.iter().enumerate() {
            for (c, s) in coords.iter().zip(&faces[fidx[k]].normals[pidx[k]]) {
                signs[*c] = *s;
            }
        }
        if multiplier_exists(jac, &signs) {
            return true;
        }
        if !advance(&mut pidx, |k| per_block[k].1[fidx[k]].normals.len()) {
            return false;
        }
    }
}

/// Odometer step over mixed radices; false after the last combination.
fn advance(idx: &mut [usize], radix: impl Fn(usize) -> usize) -> bool {
    for (k, i) in idx.iter_mut().enumerate() {
        *i += 1;
        if *i < radix(k) {
            return true;
        }
        *i = 0;
    }
    false
}
