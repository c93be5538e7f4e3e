//! Tangent and normal cone data for the constraint blocks of an instance.
//!
//! Every block value `p` (and direction `q`) lives in the block's own
//! coordinates. Direction branches split the tangent cone into regions on
//! which the directional normal cone is a fixed finite union.

use crate::comp_set::{self, CompCaseTag};
use crate::cone_rep::{ConePiece, ConeUnionRep};
use crate::error::{Result, SoccpError};
use crate::linalg::{dot, norm, orth_complement, scale};
use crate::problem_model::BlockKind;
use crate::soc_core::{classify_point, hat, in_cone, ConeRegion};

pub fn block_dim(kind: BlockKind) -> usize {
    match kind {
        BlockKind::Eq | BlockKind::Ineq => 1,
        BlockKind::Soc(m) => m,
        BlockKind::Comp(m) => 2 * m,
    }
}

/// Normal cone attached to a direction branch.
#[derive(Debug, Clone, PartialEq)]
pub enum NormalSpec {
    /// The same union for every direction in the region.
    Fixed(ConeUnionRep),
    /// Depends on the direction; `relaxed` contains every instance.
    Varying { relaxed: ConeUnionRep },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DirBranch {
    /// Directions `q` selecting this branch. For varying branches this is a
    /// convex relaxation of the true (nonconvex) region.
    pub region: ConePiece,
    pub normal: NormalSpec,
    pub label: String,
}

impl DirBranch {
    pub fn is_exact(&self) -> bool {
        matches!(self.normal, NormalSpec::Fixed(_))
    }
}

fn single(dim: usize, p: ConePiece) -> ConeUnionRep {
    ConeUnionRep::from_pieces(dim, vec![p])
}

fn ineq_active(p: &[f64], tol: f64) -> bool {
    p[0] >= -tol
}

fn soc_region(p: &[f64], tol: f64) -> ConeRegion {
    classify_point(p, tol)
}

fn unit(a: &[f64]) -> Vec<f64> {
    scale(1.0 / norm(a), a)
}

/// Limiting normal cone of the block's set at `p`.
pub fn limiting_rep(kind: BlockKind, p: &[f64], tol: f64) -> Result<ConeUnionRep> {
    let dim = block_dim(kind);
    Ok(match kind {
        BlockKind::Eq => single(1, ConePiece::free(1, "free")),
        BlockKind::Ineq => {
            if ineq_active(p, tol) {
                single(1, ConePiece::free(1, "lambda >= 0").le(&[-1.0]))
            } else {
                single(1, ConePiece::free(1, "lambda = 0").block_zero(0, 1))
            }
        }
        BlockKind::Soc(m) => single(dim, soc_normal_at(p, m, tol)),
        BlockKind::Comp(m) => {
            let (x, y) = p.split_at(m);
            comp_set::limiting_normal_rep(x, y, tol)?
        }
    })
}

/// Normal cone of `K` at `p`.
fn soc_normal_at(p: &[f64], m: usize, tol: f64) -> ConePiece {
    match soc_region(p, tol) {
        ConeRegion::Zero => ConePiece::free(m, "-K").block_cone(0, m, -1.0),
        ConeRegion::BoundaryKNonzero => {
            ConePiece::free(m, "R- p_hat").block_ray(0, &unit(&hat(p)), -1.0)
        }
        _ => ConePiece::free(m, "{0}").block_zero(0, m),
    }
}

pub fn tangent_contains(kind: BlockKind, p: &[f64], q: &[f64], tol: f64) -> Result<bool> {
    let s = tol * norm(q).max(1.0);
    Ok(match kind {
        BlockKind::Eq => q[0].abs() <= s,
        BlockKind::Ineq => !ineq_active(p, tol) || q[0] <= s,
        BlockKind::Soc(_) => match soc_region(p, tol) {
            ConeRegion::InteriorK => true,
            ConeRegion::BoundaryKNonzero => dot(q, &unit(&hat(p))) >= -s,
            ConeRegion::Zero => in_cone(q, s),
            _ => return Err(SoccpError::NotInOmega { residual: norm(p) }),
        },
        BlockKind::Comp(m) => {
            let (x, y) = p.split_at(m);
            let (d, w) = q.split_at(m);
            comp_set::tangent_contains(x, y, d, w, tol)?
        }
    })
}

/// Tangent cone at `p` as a single convex piece; `None` for complementarity blocks.
pub fn convex_tangent_piece(kind: BlockKind, p: &[f64], tol: f64) -> Option<ConePiece> {
    let dim = block_dim(kind);
    let free = ConePiece::free(dim, "tangent");
    match kind {
        BlockKind::Eq => Some(free.block_zero(0, 1)),
        BlockKind::Ineq if ineq_active(p, tol) => Some(free.le(&[1.0])),
        BlockKind::Ineq => Some(free),
        BlockKind::Soc(m) => Some(match soc_region(p, tol) {
            ConeRegion::BoundaryKNonzero => {
                let neg: Vec<f64> = unit(&hat(p)).iter().map(|v| -v).collect();
                free.block_polar(0, &neg)
            }
            ConeRegion::Zero => free.block_cone(0, m, 1.0),
            _ => free,
        }),
        BlockKind::Comp(_) => None,
    }
}

/// Directional normal cone at `p` in the tangent direction `q`.
pub fn directional_rep(kind: BlockKind, p: &[f64], q: &[f64], tol: f64) -> Result<ConeUnionRep> {
    if !tangent_contains(kind, p, q, tol)? {
        return Err(SoccpError::DirectionNotTangent);
    }
    let dim = block_dim(kind);
    let nq = norm(q);
    let s = tol * nq.max(1.0);
    Ok(match kind {
        BlockKind::Eq => limiting_rep(kind, p, tol)?,
        BlockKind::Ineq => {
            if ineq_active(p, tol) && q[0] >= -s {
                limiting_rep(kind, p, tol)?
            } else {
                single(1, ConePiece::free(1, "lambda = 0").block_zero(0, 1))
            }
        }
        BlockKind::Soc(m) => {
            // For a convex set the directional cone is N(p) intersected with q-perp.
            let zero = || single(m, ConePiece::free(m, "{0}").block_zero(0, m));
            match soc_region(p, tol) {
                ConeRegion::BoundaryKNonzero if dot(q, &unit(&hat(p))) > s => zero(),
                ConeRegion::Zero => {
                    let qn = if nq > 0.0 { scale(1.0 / nq, q) } else { q.to_vec() };
                    match soc_region(&qn, tol) {
                        ConeRegion::Zero => limiting_rep(kind, p, tol)?,
                        ConeRegion::BoundaryKNonzero => single(
                            m,
                            ConePiece::free(m, "R- q_hat").block_ray(0, &unit(&hat(&qn)), -1.0),
                        ),
                        _ => zero(),
                    }
                }
                _ => limiting_rep(kind, p, tol)?,
            }
        }
        BlockKind::Comp(m) => {
            let (x, y) = p.split_at(m);
            let (d, w) = q.split_at(m);
            comp_set::directional_normal_rep(x, y, d, w, tol)?
        }
    })
    .inspect(|r: &ConeUnionRep| debug_assert_eq!(r.dim, dim))
}

fn fixed(region: ConePiece, normal: ConeUnionRep, label: &str) -> DirBranch {
    DirBranch {
        region: region.with_label(label),
        normal: NormalSpec::Fixed(normal),
        label: label.to_string(),
    }
}

/// Splits the tangent cone at `p` into regions with a fixed directional normal cone.
pub fn direction_branches(kind: BlockKind, p: &[f64], tol: f64) -> Result<Vec<DirBranch>> {
    let dim = block_dim(kind);
    let free = |l: &str| ConePiece::free(dim, l);
    let zero_normal = || single(dim, free("{0}").block_zero(0, dim));
    Ok(match kind {
        BlockKind::Eq => vec![fixed(free("").block_zero(0, 1), limiting_rep(kind, p, tol)?, "q=0")],
        BlockKind::Ineq => {
            if ineq_active(p, tol) {
                vec![
                    fixed(free("").lt(&[1.0]), zero_normal(), "active, q<0"),
                    fixed(free("").block_zero(0, 1), limiting_rep(kind, p, tol)?, "active, q=0"),
                ]
            } else {
                vec![fixed(free(""), zero_normal(), "inactive")]
            }
        }
        BlockKind::Soc(m) => soc_branches(p, m, tol),
        BlockKind::Comp(m) => comp_branches(p, m, tol)?,
    })
}

fn soc_branches(p: &[f64], m: usize, tol: f64) -> Vec<DirBranch> {
    let free = |l: &str| ConePiece::free(m, l);
    let zero_normal = || single(m, free("{0}").block_zero(0, m));
    match soc_region(p, tol) {
        ConeRegion::BoundaryKNonzero => {
            let ph = unit(&hat(p));
            let neg: Vec<f64> = ph.iter().map(|v| -v).collect();
            vec![
                fixed(free("").block_polar_strict(0, &neg), zero_normal(), "bd, <q,p_hat> > 0"),
                fixed(
                    free("").block_perp(0, &ph),
                    single(m, soc_normal_at(p, m, tol)),
                    "bd, <q,p_hat> = 0",
                ),
            ]
        }
        ConeRegion::Zero => {
            let mut out = vec![
                fixed(free("").block_cone_interior(0, m, 1.0), zero_normal(), "zero, q in int K"),
                fixed(
                    free("").block_zero(0, m),
                    single(m, soc_normal_at(p, m, tol)),
                    "zero, q=0",
                ),
            ];
            if m == 2 {
                for s in [1.0, -1.0] {
                    let a = [1.0, s];
                    let label = format!("zero, q in R++(1,{s})");
                    out.push(fixed(
                        free("").block_ray(0, &a, 1.0).block_polar_strict(0, &[-1.0, -s]),
                        single(m, free("R- q_hat").block_ray(0, &unit(&[1.0, -s]), -1.0)),
                        &label,
                    ));
                }
            } else if m >= 3 {
                out.push(DirBranch {
                    region: free("zero, q in bd K").block_cone(0, m, 1.0),
                    normal: NormalSpec::Varying {
                        relaxed: single(m, free("-K").block_cone(0, m, -1.0)),
                    },
                    label: "zero, q in bd K \\ {0}".into(),
                });
            }
            out
        }
        _ => vec![fixed(free(""), zero_normal(), "interior")],
    }
}

fn comp_branches(p: &[f64], m: usize, tol: f64) -> Result<Vec<DirBranch>> {
    let dim = 2 * m;
    let (x, y) = p.split_at(m);
    let case = comp_set::classify_pair(x, y, tol)?;
    let n = (dot(p, p)).sqrt();
    let (x, y): (Vec<f64>, Vec<f64>) = if n > 0.0 {
        (scale(1.0 / n, x), scale(1.0 / n, y))
    } else {
        (x.to_vec(), y.to_vec())
    };
    let free = || ConePiece::free(dim, "");
    let lim = |a: &[f64], b: &[f64]| comp_set::limiting_normal_rep(a, b, tol);
    let piece1 = |l: &str, pc: ConePiece| single(dim, pc.with_label(l));
    use CompCaseTag::*;
    Ok(match case.tag {
        XZeroYInt => vec![fixed(free().block_zero(0, m), lim(&x, &y)?, "d=0")],
        XIntYZero => vec![fixed(free().block_zero(m, m), lim(&x, &y)?, "w=0")],
        BothBoundary => {
            let mut region = free()
                .block_perp(0, &unit(&y))
                .block_perp(m, &unit(&x));
            for r in orth_complement(&x) {
                let mut row: Vec<f64> = r.iter().map(|v| -y[0] * v).collect();
                row.extend(hat(&r).iter().map(|v| x[0] * v));
                region = region.eq(&row);
            }
            vec![fixed(region, lim(&x, &y)?, "d perp y, w perp x, x1 w_hat - y1 d in R x")]
        }
        XBoundaryYZero => {
            let xh = unit(&hat(&x));
            let nxh: Vec<f64> = xh.iter().map(|v| -v).collect();
            vec![
                fixed(
                    free().block_polar_strict(0, &nxh).block_zero(m, m),
                    piece1("u=0", free().block_zero(0, m)),
                    "<d,x_hat> > 0, w=0",
                ),
                fixed(
                    free().block_perp(0, &xh).block_zero(m, m),
                    lim(&x, &y)?,
                    "<d,x_hat> = 0, w=0",
                ),
                fixed(
                    free()
                        .block_perp(0, &xh)
                        .block_ray(m, &xh, 1.0)
                        .block_polar_strict(m, &nxh),
                    piece1(
                        "u in R xhat, v perp xhat",
                        free().block_line(0, &xh).block_perp(m, &xh),
                    ),
                    "d perp x_hat, w in R++ x_hat",
                ),
            ]
        }
        XZeroYBoundary => {
            let yh = unit(&hat(&y));
            let nyh: Vec<f64> = yh.iter().map(|v| -v).collect();
            vec![
                fixed(
                    free().block_zero(0, m).block_polar_strict(m, &nyh),
                    piece1("v=0", free().block_zero(m, m)),
                    "d=0, <w,y_hat> > 0",
                ),
                fixed(
                    free().block_zero(0, m).block_perp(m, &yh),
                    lim(&x, &y)?,
                    "d=0, <w,y_hat> = 0",
                ),
                fixed(
                    free()
                        .block_ray(0, &yh, 1.0)
                        .block_polar_strict(0, &nyh)
                        .block_perp(m, &yh),
                    piece1(
                        "u perp yhat, v in R yhat",
                        free().block_perp(0, &yh).block_line(m, &yh),
                    ),
                    "d in R++ y_hat, w perp y_hat",
                ),
            ]
        }
        BothZero => origin_comp_branches(m)?,
    })
}

fn origin_comp_branches(m: usize) -> Result<Vec<DirBranch>> {
    let dim = 2 * m;
    let free = || ConePiece::free(dim, "");
    let lim = |a: &[f64], b: &[f64]| comp_set::limiting_normal_rep(a, b, comp_set::DEFAULT_TOL);
    let e1 = {
        let mut v = vec![0.0; m];
        v[0] = 1.0;
        v
    };
    let z = vec![0.0; m];
    let mut out = vec![
        fixed(
            free().block_zero(0, m).block_cone_interior(m, m, 1.0),
            lim(&z, &e1)?,
            "d=0, w in int K",
        ),
        fixed(
            free().block_cone_interior(0, m, 1.0).block_zero(m, m),
            lim(&e1, &z)?,
            "d in int K, w=0",
        ),
        fixed(free().block_zero(0, dim), lim(&z, &z)?, "d=0, w=0"),
    ];
    if m == 2 {
        for s in [1.0, -1.0] {
            let a = [1.0, s];
            let ah = [1.0, -s];
            let na = [-1.0, -s];
            let nah = [-1.0, s];
            out.push(fixed(
                free().block_zero(0, m).block_ray(m, &a, 1.0).block_polar_strict(m, &na),
                lim(&z, &a)?,
                &format!("d=0, w in R++(1,{s})"),
            ));
            out.push(fixed(
                free().block_ray(0, &a, 1.0).block_polar_strict(0, &na).block_zero(m, m),
                lim(&a, &z)?,
                &format!("d in R++(1,{s}), w=0"),
            ));
            out.push(fixed(
                free()
                    .block_ray(0, &a, 1.0)
                    .block_polar_strict(0, &na)
                    .block_ray(m, &ah, 1.0)
                    .block_polar_strict(m, &nah),
                lim(&a, &ah)?,
                &format!("d in R++(1,{s}), w in R++(1,{})", -s),
            ));
        }
    } else if m >= 3 {
        out.push(DirBranch {
            region: free()
                .block_cone(0, m, 1.0)
                .block_cone(m, m, 1.0)
                .with_label("d, w in K"),
            normal: NormalSpec::Varying {
                relaxed: single(dim, free().with_label("free")),
            },
            label: "(d,w) in Omega with a boundary component".into(),
        });
    }
    Ok(out)
}

/// Short description of the block's case at `p`.
pub fn describe(kind: BlockKind, p: &[f64], tol: f64) -> Result<String> {
    Ok(match kind {
        BlockKind::Eq => "equality".into(),
        BlockKind::Ineq => {
            if ineq_active(p, tol) {
                "active".into()
            } else {
                "inactive".into()
            }
        }
        BlockKind::Soc(_) => format!("{:?}", soc_region(p, tol)),
        BlockKind::Comp(m) => {
            let (x, y) = p.split_at(m);
            let c = comp_set::classify_pair(x, y, tol)?;
            match c.k_ratio {
                Some(k) => format!("{:?} (k={k})", c.tag),
                None => format!("{:?}", c.tag),
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conic_lp::{find_nonzero, ConicSystem};

    /// Every branch region point is tangent and its directional cone matches the branch normal.
    fn check_branches(kind: BlockKind, p: &[f64]) {
        let tol = 1e-8;
        let dim = block_dim(kind);
        for br in direction_branches(kind, p, tol).unwrap() {
            let sys = ConicSystem::from_piece(&br.region);
            let support: Vec<usize> = (0..dim).collect();
            let q = match find_nonzero(&sys, &support).found() {
                Some(q) => q.to_vec(),
                None => vec![0.0; dim],
            };
            if !br.is_exact() {
                continue;
            }
            assert!(tangent_contains(kind, p, &q, tol).unwrap(), "{} at {q:?}", br.label);
            let exact = directional_rep(kind, p, &q, tol).unwrap();
            if let NormalSpec::Fixed(rep) = &br.normal {
                assert_eq!(
                    exact.pieces.len() + exact.families.len(),
                    rep.pieces.len() + rep.families.len(),
                    "{}",
                    br.label
                );
            }
        }
    }

    #[test]
    fn branches_agree_with_directional_cones() {
        check_branches(BlockKind::Ineq, &[0.0]);
        check_branches(BlockKind::Soc(2), &[0.0, 0.0]);
        check_branches(BlockKind::Soc(3), &[1.0, 1.0, 0.0]);
        check_branches(BlockKind::Comp(1), &[0.0, 0.0]);
        check_branches(BlockKind::Comp(2), &[0.0; 4]);
        check_branches(BlockKind::Comp(3), &[1.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
        check_branches(BlockKind::Comp(3), &[0.0, 0.0, 0.0, 1.0, 0.0, 1.0]);
        check_branches(BlockKind::Comp(3), &[1.0, 1.0, 0.0, 2.0, -2.0, 0.0]);
    }
}
