//! Variational calculus of the complementarity set
//! `Omega = {(x, y) : K contains x, K contains y, x perp y}` of one cone.
//!
//! Pairs, directions and multipliers are passed as separate `x`/`y` (resp.
//! `d`/`w`, `u`/`v`) slices. Representations are over `(u, v)` in `R^2m`
//! with `u` first.

use crate::cone_rep::{ConePiece, ConeUnionRep, FamilyKind, ParametricFamily};
use crate::error::{Result, SoccpError};
use crate::linalg::{concat, dot, norm, reject, scale, sub};
use crate::soc_core::{
    self, classify_point, hat, in_cone, in_ray, project_soc, ConeRegion,
};
use serde::{Deserialize, Serialize};

/// Default slack of membership tests.
pub const DEFAULT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CompCaseTag {
    XZeroYInt,
    XIntYZero,
    BothBoundary,
    XBoundaryYZero,
    XZeroYBoundary,
    BothZero,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompCase {
    pub tag: CompCaseTag,
    /// `k` with `y = k x_hat` for boundary pairs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_ratio: Option<f64>,
}

fn check_dims(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() || x.is_empty() {
        return Err(SoccpError::Dimension(format!(
            "pair blocks have lengths {} and {}",
            x.len(),
            y.len()
        )));
    }
    Ok(())
}

fn pair_norm(a: &[f64], b: &[f64]) -> f64 {
    (dot(a, a) + dot(b, b)).sqrt()
}

/// `x - Pi(x - y)`.
pub fn natural_residual(x: &[f64], y: &[f64]) -> Vec<f64> {
    sub(x, &project_soc(&sub(x, y)))
}

pub fn in_omega(x: &[f64], y: &[f64], tol: f64) -> Result<bool> {
    check_dims(x, y)?;
    Ok(norm(&natural_residual(x, y)) <= tol * pair_norm(x, y).max(1.0))
}

fn require_omega(x: &[f64], y: &[f64], tol: f64) -> Result<()> {
    if !in_omega(x, y, tol)? {
        return Err(SoccpError::NotInOmega {
            residual: norm(&natural_residual(x, y)),
        });
    }
    Ok(())
}

fn region_in_pair(z: &[f64], tol: f64, scale: f64) -> ConeRegion {
    if norm(z) <= tol * scale.max(1.0) {
        ConeRegion::Zero
    } else {
        classify_point(z, tol)
    }
}

pub fn classify_pair(x: &[f64], y: &[f64], tol: f64) -> Result<CompCase> {
    require_omega(x, y, tol)?;
    let sc = pair_norm(x, y);
    let rx = region_in_pair(x, tol, sc);
    let ry = region_in_pair(y, tol, sc);
    use CompCaseTag::*;
    use ConeRegion::*;
    let tag = match (rx, ry) {
        (Zero, Zero) => BothZero,
        (Zero, InteriorK) => XZeroYInt,
        (Zero, BoundaryKNonzero) => XZeroYBoundary,
        (InteriorK, Zero) => XIntYZero,
        (BoundaryKNonzero, Zero) => XBoundaryYZero,
        (BoundaryKNonzero, BoundaryKNonzero) => BothBoundary,
        _ => {
            return Err(SoccpError::NotInOmega {
                residual: norm(&natural_residual(x, y)),
            })
        }
    };
    let k_ratio = (tag == BothBoundary).then(|| y[0] / x[0]);
    Ok(CompCase { tag, k_ratio })
}

fn unit_vec(a: &[f64]) -> Vec<f64> {
    let n = norm(a);
    a.iter().map(|v| v / n).collect()
}

/// Scales a pair to unit norm (no-op for the zero pair).
fn normalize_pair(a: &[f64], b: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = pair_norm(a, b);
    if n > 0.0 {
        (scale(1.0 / n, a), scale(1.0 / n, b))
    } else {
        (a.to_vec(), b.to_vec())
    }
}

/// `<d, a_unit> >= 0`, i.e. `d` in the tangent cone of `K` at a boundary
/// point whose reflection is `a` (absolute slack `s`).
fn in_halfspace(d: &[f64], a: &[f64], s: f64) -> bool {
    dot(d, &unit_vec(a)) >= -s
}

/// Explicit six-case tangent cone formula.
pub fn tangent_contains(x: &[f64], y: &[f64], d: &[f64], w: &[f64], tol: f64) -> Result<bool> {
    check_dims(d, w)?;
    let case = classify_pair(x, y, tol)?;
    let (x, y) = normalize_pair(x, y);
    let (d, w) = normalize_pair(d, w);
    let s = tol;
    use CompCaseTag::*;
    Ok(match case.tag {
        XZeroYInt => norm(&d) <= s,
        XIntYZero => norm(&w) <= s,
        BothBoundary => {
            let xu = unit_vec(&x);
            let yu = unit_vec(&y);
            let a: Vec<f64> = hat(&w)
                .iter()
                .zip(&d)
                .map(|(wi, di)| x[0] * wi - y[0] * di)
                .collect();
            dot(&d, &yu).abs() <= s
                && dot(&w, &xu).abs() <= s
                && norm(&reject(&a, &xu)) <= s
        }
        XZeroYBoundary => {
            let yh = hat(&y);
            (norm(&d) <= s && in_halfspace(&w, &yh, s))
                || (in_ray(&d, &yh, s) && dot(&w, &unit_vec(&yh)).abs() <= s)
        }
        XBoundaryYZero => {
            let xh = hat(&x);
            (norm(&w) <= s && in_halfspace(&d, &xh, s))
                || (dot(&d, &unit_vec(&xh)).abs() <= s && in_ray(&w, &xh, s))
        }
        BothZero => {
            let scale = 1f64.max(norm(&d) * norm(&w));
            in_cone(&d, s) && in_cone(&w, s) && dot(&d, &w).abs() <= s * scale
        }
    })
}

/// Tangent cone membership through `Pi'(x - y; d - w) = d`.
pub fn tangent_contains_oracle(
    x: &[f64],
    y: &[f64],
    d: &[f64],
    w: &[f64],
    tol: f64,
) -> Result<bool> {
    check_dims(d, w)?;
    require_omega(x, y, tol)?;
    let (x, y) = normalize_pair(x, y);
    let (d, w) = normalize_pair(d, w);
    let z = sub(&x, &y);
    let h = sub(&d, &w);
    let zero_band = if norm(&z) <= tol { vec![0.0; z.len()] } else { z };
    let pd = soc_core::project_soc_dir_deriv_tol(&zero_band, &h, tol);
    Ok(norm(&sub(&pd, &d)) <= tol * norm(&d).max(1.0))
}

/// Tangent cone for `m <= 2` via the simplified low-dimensional formula.
pub fn tangent_contains_low_dim(
    x: &[f64],
    y: &[f64],
    d: &[f64],
    w: &[f64],
    tol: f64,
) -> Result<bool> {
    let m = x.len();
    if m > 2 {
        return Err(SoccpError::Dimension("low-dimensional formula needs m <= 2".into()));
    }
    let case = classify_pair(x, y, tol)?;
    let (x, y) = normalize_pair(x, y);
    let (d, w) = normalize_pair(d, w);
    let s = tol;
    use CompCaseTag::*;
    Ok(match case.tag {
        XZeroYInt => norm(&d) <= s,
        XIntYZero => norm(&w) <= s,
        BothBoundary => dot(&d, &unit_vec(&y)).abs() <= s && dot(&w, &unit_vec(&x)).abs() <= s,
        XZeroYBoundary => {
            let yh = hat(&y);
            (norm(&d) <= s && in_halfspace(&w, &yh, s))
                || (in_ray(&d, &yh, s) && dot(&w, &unit_vec(&yh)).abs() <= s)
        }
        XBoundaryYZero => {
            let xh = hat(&x);
            (norm(&w) <= s && in_halfspace(&d, &xh, s))
                || (dot(&d, &unit_vec(&xh)).abs() <= s && in_ray(&w, &xh, s))
        }
        BothZero => {
            if m == 1 {
                d[0] >= -s && w[0] >= -s && (d[0] * w[0]).abs() <= s
            } else {
                in_cone(&d, s) && in_cone(&w, s) && dot(&d, &w).abs() <= s
            }
        }
    })
}

fn piece(m: usize, label: &str) -> ConePiece {
    ConePiece::free(2 * m, label)
}

/// Regular normal cone pieces at a classified (normalized) pair.
fn regular_pieces(x: &[f64], y: &[f64], tag: CompCaseTag) -> Vec<ConePiece> {
    let m = x.len();
    use CompCaseTag::*;
    match tag {
        XZeroYInt => vec![piece(m, "v=0").block_zero(m, m)],
        XIntYZero => vec![piece(m, "u=0").block_zero(0, m)],
        BothBoundary => vec![both_boundary_piece(x, y)],
        XZeroYBoundary => {
            let yh = unit_vec(&hat(y));
            vec![piece(m, "u in yhat polar, v in R- yhat")
                .block_polar(0, &yh)
                .block_ray(m, &yh, -1.0)]
        }
        XBoundaryYZero => {
            let xh = unit_vec(&hat(x));
            vec![piece(m, "u in R- xhat, v in xhat polar")
                .block_ray(0, &xh, -1.0)
                .block_polar(m, &xh)]
        }
        BothZero => vec![piece(m, "u in -K, v in -K")
            .block_cone(0, m, -1.0)
            .block_cone(m, m, -1.0)],
    }
}

/// `u perp x, v perp y, x1 u_hat + y1 v in R x`.
fn both_boundary_piece(x: &[f64], y: &[f64]) -> ConePiece {
    let m = x.len();
    let mut p = piece(m, "u perp x, v perp y, x1 u_hat + y1 v in R x")
        .block_perp(0, &unit_vec(x))
        .block_perp(m, &unit_vec(y));
    for r in crate::linalg::orth_complement(x) {
        let mut row: Vec<f64> = hat(&r).iter().map(|v| x[0] * v).collect();
        row.extend(r.iter().map(|v| y[0] * v));
        p = p.eq(&row);
    }
    p
}

fn limiting_rep_at(x: &[f64], y: &[f64], tag: CompCaseTag) -> ConeUnionRep {
    let m = x.len();
    let dim = 2 * m;
    use CompCaseTag::*;
    match tag {
        XZeroYInt | XIntYZero | BothBoundary => {
            ConeUnionRep::from_pieces(dim, regular_pieces(x, y, tag))
        }
        XZeroYBoundary => {
            let yh = unit_vec(&hat(y));
            let mut pieces = vec![
                piece(m, "v=0").block_zero(m, m),
                piece(m, "u perp yhat, v in R yhat")
                    .block_perp(0, &yh)
                    .block_line(m, &yh),
            ];
            pieces.extend(regular_pieces(x, y, tag));
            ConeUnionRep::from_pieces(dim, pieces)
        }
        XBoundaryYZero => {
            let xh = unit_vec(&hat(x));
            let mut pieces = vec![
                piece(m, "u=0").block_zero(0, m),
                piece(m, "u in R xhat, v perp xhat")
                    .block_line(0, &xh)
                    .block_perp(m, &xh),
            ];
            pieces.extend(regular_pieces(x, y, tag));
            ConeUnionRep::from_pieces(dim, pieces)
        }
        BothZero => origin_limiting_rep(m),
    }
}

/// Limiting normal cone at the origin.
pub fn origin_limiting_rep(m: usize) -> ConeUnionRep {
    let dim = 2 * m;
    let mut pieces = regular_pieces(&vec![0.0; m], &vec![0.0; m], CompCaseTag::BothZero);
    pieces.push(piece(m, "v=0").block_zero(m, m));
    pieces.push(piece(m, "u=0").block_zero(0, m));
    let mut families = Vec::new();
    match m {
        1 => {}
        2 => {
            for w in [1.0, -1.0] {
                let xi = [1.0, w];
                let xh = hat(&xi);
                let tag = if w > 0.0 { "+" } else { "-" };
                pieces.push(
                    piece(m, &format!("u in R- xi, v in xi polar, xi=(1,{tag}1)"))
                        .block_ray(0, &xi, -1.0)
                        .block_polar(m, &xi),
                );
                pieces.push(
                    piece(m, &format!("u in xi polar, v in R- xi, xi=(1,{tag}1)"))
                        .block_polar(0, &xi)
                        .block_ray(m, &xi, -1.0),
                );
                pieces.push(
                    piece(m, &format!("u in R xi_hat, v in R xi, xi=(1,{tag}1)"))
                        .block_line(0, &xh)
                        .block_line(m, &xi),
                );
            }
        }
        _ => {
            for kind in [FamilyKind::RayPolar, FamilyKind::PolarRay, FamilyKind::Mixed] {
                families.push(ParametricFamily::new(kind, m));
            }
        }
    }
    ConeUnionRep {
        dim,
        pieces,
        families,
    }
}

fn normalized_multiplier(u: &[f64], v: &[f64]) -> Vec<f64> {
    let (u, v) = normalize_pair(u, v);
    concat(&u, &v)
}

pub fn regular_normal_rep(x: &[f64], y: &[f64], tol: f64) -> Result<ConeUnionRep> {
    let case = classify_pair(x, y, tol)?;
    let (x, y) = normalize_pair(x, y);
    Ok(ConeUnionRep::from_pieces(
        2 * x.len(),
        regular_pieces(&x, &y, case.tag),
    ))
}

pub fn limiting_normal_rep(x: &[f64], y: &[f64], tol: f64) -> Result<ConeUnionRep> {
    let case = classify_pair(x, y, tol)?;
    let (x, y) = normalize_pair(x, y);
    Ok(limiting_rep_at(&x, &y, case.tag))
}

pub fn regular_normal_contains(
    x: &[f64],
    y: &[f64],
    u: &[f64],
    v: &[f64],
    tol: f64,
) -> Result<bool> {
    check_dims(u, v)?;
    let rep = regular_normal_rep(x, y, tol)?;
    Ok(rep.contains(&normalized_multiplier(u, v), tol))
}

pub fn limiting_normal_contains(
    x: &[f64],
    y: &[f64],
    u: &[f64],
    v: &[f64],
    tol: f64,
) -> Result<bool> {
    check_dims(u, v)?;
    let rep = limiting_normal_rep(x, y, tol)?;
    Ok(rep.contains(&normalized_multiplier(u, v), tol))
}

/// The branch of the directional normal cone selected by a direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DirectionalBranch {
    /// The limiting normal cone at the base point.
    Limiting,
    /// `u = 0` (`d` in the interior of the tangent cone of `K` at `x`, `w = 0`).
    UZero,
    /// `v = 0` (`d = 0`, `w` in the interior of the tangent cone at `y`).
    VZero,
    /// `u in R x_hat, v perp x_hat`.
    ULineXhat,
    /// `v in R y_hat, u perp y_hat`.
    VLineYhat,
    /// The limiting normal cone at the direction itself (origin case).
    AtDirection,
}

/// Selects the directional branch for a tangent direction.
pub fn directional_branch(
    x: &[f64],
    y: &[f64],
    d: &[f64],
    w: &[f64],
    tol: f64,
) -> Result<DirectionalBranch> {
    if !tangent_contains(x, y, d, w, tol)? {
        return Err(SoccpError::DirectionNotTangent);
    }
    let case = classify_pair(x, y, tol)?;
    let (x, y) = normalize_pair(x, y);
    let (d, w) = normalize_pair(d, w);
    let s = tol;
    use CompCaseTag::*;
    Ok(match case.tag {
        XZeroYInt | XIntYZero | BothBoundary => DirectionalBranch::Limiting,
        XBoundaryYZero => {
            if norm(&w) <= s {
                if dot(&d, &unit_vec(&hat(&x))) > s {
                    DirectionalBranch::UZero
                } else {
                    DirectionalBranch::Limiting
                }
            } else {
                DirectionalBranch::ULineXhat
            }
        }
        XZeroYBoundary => {
            if norm(&d) <= s {
                if dot(&w, &unit_vec(&hat(&y))) > s {
                    DirectionalBranch::VZero
                } else {
                    DirectionalBranch::Limiting
                }
            } else {
                DirectionalBranch::VLineYhat
            }
        }
        BothZero => DirectionalBranch::AtDirection,
    })
}

pub fn directional_normal_rep(
    x: &[f64],
    y: &[f64],
    d: &[f64],
    w: &[f64],
    tol: f64,
) -> Result<ConeUnionRep> {
    let branch = directional_branch(x, y, d, w, tol)?;
    let m = x.len();
    let (xn, yn) = normalize_pair(x, y);
    Ok(match branch {
        DirectionalBranch::Limiting => limiting_normal_rep(x, y, tol)?,
        DirectionalBranch::UZero => {
            ConeUnionRep::from_pieces(2 * m, vec![piece(m, "u=0").block_zero(0, m)])
        }
        DirectionalBranch::VZero => {
            ConeUnionRep::from_pieces(2 * m, vec![piece(m, "v=0").block_zero(m, m)])
        }
        DirectionalBranch::ULineXhat => {
            let xh = unit_vec(&hat(&xn));
            ConeUnionRep::from_pieces(
                2 * m,
                vec![piece(m, "u in R xhat, v perp xhat")
                    .block_line(0, &xh)
                    .block_perp(m, &xh)],
            )
        }
        DirectionalBranch::VLineYhat => {
            let yh = unit_vec(&hat(&yn));
            ConeUnionRep::from_pieces(
                2 * m,
                vec![piece(m, "u perp yhat, v in R yhat")
                    .block_perp(0, &yh)
                    .block_line(m, &yh)],
            )
        }
        DirectionalBranch::AtDirection => {
            let (d, w) = normalize_pair(d, w);
            // The direction is in Omega; reclassify with the same slack.
            let d = snap_zero(&d, tol);
            let w = snap_zero(&w, tol);
            let case = classify_pair(&d, &w, tol)?;
            limiting_rep_at(&d, &w, case.tag)
        }
    })
}

fn snap_zero(a: &[f64], tol: f64) -> Vec<f64> {
    if norm(a) <= tol {
        vec![0.0; a.len()]
    } else {
        a.to_vec()
    }
}

#[allow(clippy::too_many_arguments)]
pub fn directional_normal_contains(
    x: &[f64],
    y: &[f64],
    d: &[f64],
    w: &[f64],
    u: &[f64],
    v: &[f64],
    tol: f64,
) -> Result<bool> {
    check_dims(u, v)?;
    let rep = directional_normal_rep(x, y, d, w, tol)?;
    Ok(rep.contains(&normalized_multiplier(u, v), tol))
}

/// One block of a product: a base pair with its direction or multiplier.
pub type PairBlock = (Vec<f64>, Vec<f64>);

pub fn product_tangent_contains(
    blocks: &[PairBlock],
    directions: &[PairBlock],
    tol: f64,
) -> Result<bool> {
    if blocks.len() != directions.len() {
        return Err(SoccpError::Dimension("block and direction counts differ".into()));
    }
    for ((x, y), (d, w)) in blocks.iter().zip(directions) {
        if !tangent_contains(x, y, d, w, tol)? {
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn product_directional_normal_contains(
    blocks: &[PairBlock],
    directions: &[PairBlock],
    multipliers: &[PairBlock],
    tol: f64,
) -> Result<bool> {
    if blocks.len() != directions.len() || blocks.len() != multipliers.len() {
        return Err(SoccpError::Dimension("block counts differ".into()));
    }
    for (((x, y), (d, w)), (u, v)) in blocks.iter().zip(directions).zip(multipliers) {
        if !directional_normal_contains(x, y, d, w, u, v, tol)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Bracket `lower <= dist((x, y), Omega) <= upper`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceBracket {
    pub lower: f64,
    pub upper: f64,
}

/// Exact distance to the scalar complementarity set `{a >= 0, b >= 0, ab = 0}`.
pub fn distance_to_theta(a: f64, b: f64) -> f64 {
    let to_b_axis = (a.min(0.0).powi(2) + b * b).sqrt();
    let to_a_axis = (a * a + b.min(0.0).powi(2)).sqrt();
    to_b_axis.min(to_a_axis)
}

pub fn distance_to_omega(x: &[f64], y: &[f64]) -> DistanceBracket {
    distance_to_omega_seeded(x, y, 0)
}

/// Multistart local minimization of `|(x, y) - (Pi(s), Pi(s) - s)|` over `s`.
pub fn distance_to_omega_seeded(x: &[f64], y: &[f64], seed: u64) -> DistanceBracket {
    let nat = norm(&natural_residual(x, y));
    if x.len() == 1 {
        let dv = distance_to_theta(x[0], y[0]);
        return DistanceBracket { lower: dv, upper: dv };
    }
    if nat == 0.0 {
        return DistanceBracket { lower: 0.0, upper: 0.0 };
    }
    let m = x.len();
    let mut starts = vec![sub(x, y), x.to_vec(), scale(-1.0, y)];
    starts.push(sub(&project_soc(x), &project_soc(y)));
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0a3e);
    let base = pair_norm(x, y).max(1e-12);
    for _ in 0..4 {
        starts.push((0..m).map(|_| base * rng.random_range(-1.0..1.0)).collect());
    }
    let mut best = 2f64.sqrt() * nat;
    for s0 in starts {
        best = best.min(local_descent(x, y, s0));
    }
    DistanceBracket {
        lower: nat,
        upper: best,
    }
}

fn omega_objective(x: &[f64], y: &[f64], s: &[f64]) -> f64 {
    let p = project_soc(s);
    let a = sub(x, &p);
    let b: Vec<f64> = y.iter().zip(&p).zip(s).map(|((yi, pi), si)| yi - pi + si).collect();
    dot(&a, &a) + dot(&b, &b)
}

fn local_descent(x: &[f64], y: &[f64], mut s: Vec<f64>) -> f64 {
    let m = x.len();
    let mut f = omega_objective(x, y, &s);
    let mut step = 0.5;
    for _ in 0..200 {
        let p = project_soc(&s);
        let j = soc_core::jacobian_element(&s, soc_core::DEFAULT_CLASSIFY_TOL);
        let a = sub(x, &p);
        let b: Vec<f64> = y.iter().zip(&p).zip(&s).map(|((yi, pi), si)| yi - pi + si).collect();
        let ja = crate::linalg::mat_vec(&j, &a);
        let jb = crate::linalg::mat_vec(&j, &b);
        let g: Vec<f64> = (0..m).map(|i| -2.0 * ja[i] + 2.0 * (b[i] - jb[i])).collect();
        let gg = dot(&g, &g);
        if gg <= 1e-30 {
            break;
        }
        let mut accepted = false;
        let mut t = step;
        for _ in 0..40 {
            let cand: Vec<f64> = s.iter().zip(&g).map(|(si, gi)| si - t * gi).collect();
            let fc = omega_objective(x, y, &cand);
            if fc <= f - 1e-4 * t * gg {
                s = cand;
                f = fc;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
        step = (2.0 * t).min(1.0);
    }
    f.max(0.0).sqrt()
}
