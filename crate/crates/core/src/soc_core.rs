//! Closed-form primitives of a single second-order cone
//! `K = {(z1, z2) : z1 >= |z2|}` of dimension `m`.
//!
//! Vectors are plain slices `[z1, z2...]`. For `m = 1` the cone is the
//! half-line `R+` and every routine takes a scalar path.

use crate::error::{Result, SoccpError};
use crate::linalg::{axpy, dot, norm, reject, scale, sub};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// Default tolerance for region classification.
pub const DEFAULT_CLASSIFY_TOL: f64 = 1e-9;

/// A point `(z1, z2)` of `R x R^(m-1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SocPoint {
    data: Vec<f64>,
}

impl SocPoint {
    pub fn new(z1: f64, z2: &[f64]) -> Self {
        let mut data = Vec::with_capacity(z2.len() + 1);
        data.push(z1);
        data.extend_from_slice(z2);
        Self { data }
    }

    pub fn from_vec(data: Vec<f64>) -> Self {
        assert!(!data.is_empty(), "a cone point needs at least one coordinate");
        Self { data }
    }

    pub fn zeros(m: usize) -> Self {
        Self::from_vec(vec![0.0; m])
    }

    pub fn z1(&self) -> f64 {
        self.data[0]
    }

    pub fn z2(&self) -> &[f64] {
        &self.data[1..]
    }

    pub fn m(&self) -> usize {
        self.data.len()
    }

    /// Reflection `(z1, -z2)`.
    pub fn hat(&self) -> SocPoint {
        SocPoint::from_vec(hat(&self.data))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }
}

impl std::ops::Deref for SocPoint {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.data
    }
}

impl From<Vec<f64>> for SocPoint {
    fn from(v: Vec<f64>) -> Self {
        SocPoint::from_vec(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConeRegion {
    InteriorK,
    BoundaryKNonzero,
    Zero,
    InteriorNegK,
    BoundaryNegKNonzero,
    Outside,
}

impl ConeRegion {
    pub fn is_differentiable(self) -> bool {
        matches!(
            self,
            ConeRegion::InteriorK | ConeRegion::InteriorNegK | ConeRegion::Outside
        )
    }
}

/// Spectral data of `z` with respect to `K` (`m >= 2`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralDecomposition {
    pub lambda1: f64,
    pub lambda2: f64,
    pub c1: Vec<f64>,
    pub c2: Vec<f64>,
    /// Set when `z2 = 0` and the first canonical direction stood in for `z2/|z2|`.
    pub tie_broken: bool,
}

pub fn hat(z: &[f64]) -> Vec<f64> {
    let mut out = z.to_vec();
    for v in out.iter_mut().skip(1) {
        *v = -*v;
    }
    out
}

fn tail_norm(z: &[f64]) -> f64 {
    norm(&z[1..])
}

/// `z2 / |z2|`, or the first canonical direction when `z2 = 0`.
fn unit_tail(z: &[f64]) -> (Vec<f64>, bool) {
    let t = tail_norm(z);
    if t > 0.0 {
        (z[1..].iter().map(|v| v / t).collect(), false)
    } else {
        let mut e = vec![0.0; z.len() - 1];
        e[0] = 1.0;
        (e, true)
    }
}

/// Region of `z`. Boundaries use the relative band `tol * max(1, |z|)`;
/// `Zero` is reported when `|z| <= tol`.
pub fn classify_point(z: &[f64], tol: f64) -> ConeRegion {
    let nz = norm(z);
    if nz <= tol {
        return ConeRegion::Zero;
    }
    if z.len() == 1 {
        return if z[0] > 0.0 {
            ConeRegion::InteriorK
        } else {
            ConeRegion::InteriorNegK
        };
    }
    let t = tail_norm(z);
    let band = tol * nz.max(1.0);
    if z[0] > 0.0 && (z[0] - t).abs() <= band {
        ConeRegion::BoundaryKNonzero
    } else if z[0] < 0.0 && (z[0] + t).abs() <= band {
        ConeRegion::BoundaryNegKNonzero
    } else if z[0] > t {
        ConeRegion::InteriorK
    } else if z[0] < -t {
        ConeRegion::InteriorNegK
    } else {
        ConeRegion::Outside
    }
}

pub fn spectral(z: &[f64]) -> Result<SpectralDecomposition> {
    if z.len() < 2 {
        return Err(SoccpError::Dimension(
            "spectral decomposition needs m >= 2".into(),
        ));
    }
    let t = tail_norm(z);
    let (bar, tie_broken) = unit_tail(z);
    let mut c1 = vec![0.5];
    let mut c2 = vec![0.5];
    c1.extend(bar.iter().map(|b| -0.5 * b));
    c2.extend(bar.iter().map(|b| 0.5 * b));
    Ok(SpectralDecomposition {
        lambda1: z[0] - t,
        lambda2: z[0] + t,
        c1,
        c2,
        tie_broken,
    })
}

/// Metric projection onto `K`.
pub fn project_soc(z: &[f64]) -> Vec<f64> {
    if z.len() == 1 {
        return vec![z[0].max(0.0)];
    }
    let t = tail_norm(z);
    if z[0] >= t {
        z.to_vec()
    } else if z[0] <= -t {
        vec![0.0; z.len()]
    } else {
        let a = 0.5 * (z[0] + t);
        let mut out = Vec::with_capacity(z.len());
        out.push(a);
        out.extend(z[1..].iter().map(|v| a * v / t));
        out
    }
}

/// Membership in `K` with absolute slack `s`.
pub fn in_cone(z: &[f64], s: f64) -> bool {
    if z.len() == 1 {
        return z[0] >= -s;
    }
    z[0] >= tail_norm(z) - s
}

/// Membership in `int K` with margin `s`.
pub fn in_cone_interior(z: &[f64], s: f64) -> bool {
    if z.len() == 1 {
        return z[0] > s;
    }
    z[0] - tail_norm(z) > s
}

/// Directional derivative `Pi'(z; h)` with the default classification band.
pub fn project_soc_dir_deriv(z: &[f64], h: &[f64]) -> Vec<f64> {
    project_soc_dir_deriv_tol(z, h, DEFAULT_CLASSIFY_TOL)
}

pub fn project_soc_dir_deriv_tol(z: &[f64], h: &[f64], tol: f64) -> Vec<f64> {
    let region = classify_point(z, tol);
    match region {
        ConeRegion::InteriorK => h.to_vec(),
        ConeRegion::InteriorNegK => vec![0.0; h.len()],
        ConeRegion::Zero => project_soc(h),
        ConeRegion::Outside => crate::linalg::mat_vec(&outside_jacobian(z), h),
        ConeRegion::BoundaryKNonzero => {
            let sd = spectral(z).expect("m >= 2 on the boundary");
            let a = dot(&sd.c1, h).min(0.0);
            axpy(h, -2.0 * a, &sd.c1)
        }
        ConeRegion::BoundaryNegKNonzero => {
            let sd = spectral(z).expect("m >= 2 on the boundary");
            let a = dot(&sd.c2, h).max(0.0);
            scale(2.0 * a, &sd.c2)
        }
    }
}

fn outside_jacobian(z: &[f64]) -> DMatrix<f64> {
    let m = z.len();
    let t = tail_norm(z);
    let r = z[0] / t;
    let (bar, _) = unit_tail(z);
    let mut j = DMatrix::<f64>::identity(m, m) * (0.5 * (1.0 + r));
    j[(0, 0)] += -0.5 * r;
    for i in 1..m {
        j[(0, i)] += 0.5 * bar[i - 1];
        j[(i, 0)] += 0.5 * bar[i - 1];
        for k in 1..m {
            j[(i, k)] += -0.5 * r * bar[i - 1] * bar[k - 1];
        }
    }
    j
}

/// Jacobian of the projection on the differentiable regions.
pub fn jacobian_proj(z: &[f64]) -> Result<DMatrix<f64>> {
    jacobian_proj_tol(z, DEFAULT_CLASSIFY_TOL)
}

pub fn jacobian_proj_tol(z: &[f64], tol: f64) -> Result<DMatrix<f64>> {
    let m = z.len();
    match classify_point(z, tol) {
        ConeRegion::InteriorK => Ok(DMatrix::identity(m, m)),
        ConeRegion::InteriorNegK => Ok(DMatrix::zeros(m, m)),
        ConeRegion::Outside => Ok(outside_jacobian(z)),
        other => Err(SoccpError::NotDifferentiable(format!("{other:?}"))),
    }
}

/// The finitely many elements of the B-subdifferential of the projection at `z`.
/// At the origin (`m >= 2`) the continuum family is not included.
pub fn b_subdifferential_finite(z: &[f64], tol: f64) -> Vec<DMatrix<f64>> {
    let m = z.len();
    let region = classify_point(z, tol);
    if region.is_differentiable() {
        return vec![jacobian_proj_tol(z, tol).expect("differentiable region")];
    }
    match region {
        ConeRegion::Zero => vec![DMatrix::zeros(m, m), DMatrix::identity(m, m)],
        ConeRegion::BoundaryKNonzero => {
            let (bar, _) = unit_tail(z);
            let mut b = DMatrix::<f64>::identity(m, m);
            b += boundary_block(&bar, -1.0, -1.0) * 0.5;
            vec![DMatrix::identity(m, m), b]
        }
        ConeRegion::BoundaryNegKNonzero => {
            let (bar, _) = unit_tail(z);
            vec![DMatrix::zeros(m, m), boundary_block(&bar, 1.0, 1.0) * 0.5]
        }
        _ => unreachable!(),
    }
}

/// `[[a, bar^T], [bar, c bar bar^T]]`.
fn boundary_block(bar: &[f64], a: f64, c: f64) -> DMatrix<f64> {
    let m = bar.len() + 1;
    DMatrix::from_fn(m, m, |i, k| match (i, k) {
        (0, 0) => a,
        (0, k) => bar[k - 1],
        (i, 0) => bar[i - 1],
        (i, k) => c * bar[i - 1] * bar[k - 1],
    })
}

/// One element of the B-subdifferential, used by Newton-type methods.
pub fn jacobian_element(z: &[f64], tol: f64) -> DMatrix<f64> {
    let m = z.len();
    match classify_point(z, tol) {
        ConeRegion::Zero | ConeRegion::BoundaryNegKNonzero => DMatrix::zeros(m, m),
        ConeRegion::BoundaryKNonzero => DMatrix::identity(m, m),
        _ => jacobian_proj_tol(z, tol).expect("differentiable region"),
    }
}

fn close(a: &[f64], b: &[f64], s: f64) -> bool {
    norm(&sub(a, b)) <= s
}

/// `r` in the ray `R+ c`, with slack `s`.
pub(crate) fn in_ray(r: &[f64], c: &[f64], s: f64) -> bool {
    if norm(r) <= s {
        return true;
    }
    norm(&reject(r, c)) <= s && dot(r, c) >= 0.0
}

fn slack(tol: f64, u: &[f64], x: &[f64]) -> f64 {
    tol * 1f64.max(norm(u)).max(norm(x))
}

/// `x* in D^*Pi(z)(u*)` for the regular coderivative.
pub fn in_regular_coderivative(z: &[f64], u_star: &[f64], x_star: &[f64], tol: f64) -> bool {
    let s = slack(tol, u_star, x_star);
    let region = classify_point(z, tol);
    if region.is_differentiable() {
        let j = jacobian_proj_tol(z, tol).expect("differentiable region");
        return close(x_star, &crate::linalg::mat_vec(&j, u_star), s);
    }
    let r = sub(u_star, x_star);
    match region {
        ConeRegion::Zero => in_cone(x_star, s) && in_cone(&r, s),
        ConeRegion::BoundaryKNonzero => {
            let sd = spectral(z).expect("m >= 2");
            in_ray(&r, &sd.c1, s) && dot(x_star, &sd.c1) >= -s
        }
        ConeRegion::BoundaryNegKNonzero => {
            let sd = spectral(z).expect("m >= 2");
            in_ray(x_star, &sd.c2, s) && dot(&r, &sd.c2) >= -s
        }
        _ => unreachable!(),
    }
}

/// `x* in D*Pi(z)(u*)` for the limiting coderivative.
pub fn in_limiting_coderivative(z: &[f64], u_star: &[f64], x_star: &[f64], tol: f64) -> bool {
    if in_regular_coderivative(z, u_star, x_star, tol) {
        return true;
    }
    let s = slack(tol, u_star, x_star);
    for b in b_subdifferential_finite(z, tol) {
        if close(x_star, &crate::linalg::mat_vec(&b, u_star), s) {
            return true;
        }
    }
    if classify_point(z, tol) != ConeRegion::Zero || z.len() == 1 {
        return false;
    }
    in_origin_family_image(u_star, x_star, s)
        || in_origin_xi_branch(u_star, x_star, s)
        || in_origin_eta_branch(u_star, x_star, s)
}

/// `x* = V(w, alpha) u*` for some unit `w` and `alpha in [0, 1]`, where
/// `V u = 2<c2, u> c2 + alpha (0, (I - w w^T) u2)` and `c2 = (1, w)/2`.
fn in_origin_family_image(u: &[f64], x: &[f64], s: f64) -> bool {
    let m = u.len();
    let (u1, u2) = (u[0], &u[1..]);
    let (x1, x2) = (x[0], &x[1..]);
    let mut candidates: Vec<Vec<f64>> = Vec::new();
    if m == 2 {
        candidates.push(vec![1.0]);
        candidates.push(vec![-1.0]);
    } else {
        let sval = 2.0 * x1 - u1;
        let nu2 = norm(u2);
        let gap = nu2 * nu2 - sval * sval;
        if gap > 1e-14 * nu2.max(1.0).powi(2) {
            let alpha = (dot(x2, u2) - sval * x1) / gap;
            let den = x1 - alpha * sval;
            if den.abs() > 1e-300 {
                candidates.push(x2.iter().zip(u2).map(|(a, b)| (a - alpha * b) / den).collect());
            }
            // Degenerate denominator: any unit w with w^T u2 = sval.
            let mut e = crate::linalg::orth_complement(u2)
                .into_iter()
                .next()
                .unwrap_or_else(|| vec![0.0; m - 1]);
            let c = (1.0 - (sval / nu2).powi(2)).max(0.0).sqrt();
            for v in e.iter_mut() {
                *v *= c;
            }
            candidates.push(axpy(&e, sval / (nu2 * nu2), u2));
        }
        if nu2 > 0.0 {
            candidates.push(u2.iter().map(|v| v / nu2).collect());
            candidates.push(u2.iter().map(|v| -v / nu2).collect());
        }
        if x1.abs() > 0.0 {
            candidates.push(x2.iter().map(|v| v / x1).collect());
        }
    }
    for w in candidates {
        let nw = norm(&w);
        if nw.is_nan() || nw <= 0.0 || !nw.is_finite() {
            continue;
        }
        let w: Vec<f64> = w.iter().map(|v| v / nw).collect();
        let mut c2 = vec![0.5];
        c2.extend(w.iter().map(|v| 0.5 * v));
        let a = scale(2.0 * dot(&c2, u), &c2);
        let mut p = vec![0.0];
        p.extend(reject(u2, &w));
        let pp = dot(&p, &p);
        let alpha = if pp > 0.0 {
            (dot(&sub(x, &a), &p) / pp).clamp(0.0, 1.0)
        } else {
            0.0
        };
        if close(x, &axpy(&a, alpha, &p), s) {
            return true;
        }
    }
    false
}

/// `u* - x* in R+ xi`, `<x*, xi> >= 0` for some `xi in C`.
fn in_origin_xi_branch(u: &[f64], x: &[f64], s: f64) -> bool {
    let r = sub(u, x);
    let nr = norm(&r);
    if nr > s {
        let t = tail_norm(&r);
        r[0] > 0.0 && (r[0] - t).abs() <= s && dot(x, &r) >= -s * nr
    } else {
        x[0] + tail_norm(x) >= -s
    }
}

/// `x* in R+ eta`, `<u* - x*, eta> >= 0` for some `eta in C`.
fn in_origin_eta_branch(u: &[f64], x: &[f64], s: f64) -> bool {
    let nx = norm(x);
    if nx > s {
        let t = tail_norm(x);
        x[0] > 0.0 && (x[0] - t).abs() <= s && dot(&sub(u, x), x) >= -s * nx
    } else {
        u[0] + tail_norm(u) >= -s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn approx(a: &[f64], b: &[f64]) {
        assert!(close(a, b, 1e-12), "{a:?} vs {b:?}");
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify_point(&[2.0, 1.0, 0.0], 1e-9), ConeRegion::InteriorK);
        assert_eq!(classify_point(&[1.0, 1.0, 0.0], 1e-9), ConeRegion::BoundaryKNonzero);
        assert_eq!(classify_point(&[0.0, 2.0, 0.0], 1e-9), ConeRegion::Outside);
        assert_eq!(classify_point(&[-1.0, 1.0, 0.0], 1e-9), ConeRegion::BoundaryNegKNonzero);
        assert_eq!(classify_point(&[0.0, 0.0, 0.0], 1e-9), ConeRegion::Zero);
        assert_eq!(classify_point(&[-3.0], 1e-9), ConeRegion::InteriorNegK);
    }

    #[test]
    fn spectral_examples() {
        let sd = spectral(&[0.0, 2.0, 0.0]).unwrap();
        assert_eq!((sd.lambda1, sd.lambda2), (-2.0, 2.0));
        approx(&sd.c1, &[0.5, -0.5, 0.0]);
        approx(&sd.c2, &[0.5, 0.5, 0.0]);
        assert!(!sd.tie_broken);

        let sd = spectral(&[1.0, 0.0, 0.0]).unwrap();
        assert_eq!((sd.lambda1, sd.lambda2), (1.0, 1.0));
        approx(&sd.c2, &[0.5, 0.5, 0.0]);
        assert!(sd.tie_broken);

        let sd = spectral(&[3.0, 0.0, 4.0]).unwrap();
        assert_eq!((sd.lambda1, sd.lambda2), (-1.0, 7.0));
        approx(&sd.c2, &[0.5, 0.0, 0.5]);

        assert!(matches!(spectral(&[1.0]), Err(SoccpError::Dimension(_))));
    }

    #[test]
    fn projection_examples() {
        approx(&project_soc(&[2.0, 1.0, 0.0]), &[2.0, 1.0, 0.0]);
        approx(&project_soc(&[0.0, 2.0, 0.0]), &[1.0, 1.0, 0.0]);
        approx(&project_soc(&[-3.0, 1.0, 0.0]), &[0.0, 0.0, 0.0]);
        approx(&project_soc(&[-0.5]), &[0.0]);
    }

    #[test]
    fn dir_deriv_examples() {
        let h = [0.3, -0.7, 1.1];
        approx(&project_soc_dir_deriv(&[2.0, 1.0, 0.0], &h), &h);
        approx(&project_soc_dir_deriv(&[0.0, 0.0, 0.0], &[0.0, 2.0, 0.0]), &[1.0, 1.0, 0.0]);
        approx(&project_soc_dir_deriv(&[1.0, 1.0, 0.0], &[0.0, 0.0, 1.0]), &[0.0, 0.0, 1.0]);
    }

    #[test]
    fn jacobian_examples() {
        let j = jacobian_proj(&[2.0, 1.0, 0.0]).unwrap();
        assert_eq!(j, DMatrix::identity(3, 3));
        let j = jacobian_proj(&[-2.0, 1.0, 0.0]).unwrap();
        assert_eq!(j, DMatrix::zeros(3, 3));
        // Outside, z1/|z2| = 0; the (3,3) entry is 1/2 (checked by finite differences below).
        let j = jacobian_proj(&[0.0, 2.0, 0.0]).unwrap();
        let expected =
            DMatrix::from_row_slice(3, 3, &[1.0, 1.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0]) * 0.5;
        assert!((j - expected).norm() < 1e-14);
        assert!(matches!(
            jacobian_proj(&[1.0, 1.0, 0.0]),
            Err(SoccpError::NotDifferentiable(_))
        ));
    }

    #[test]
    fn jacobian_matches_central_differences() {
        let z = [0.0, 2.0, 0.0];
        let j = jacobian_proj(&z).unwrap();
        let eps = 1e-6;
        for k in 0..3 {
            let mut zp = z.to_vec();
            let mut zm = z.to_vec();
            zp[k] += eps;
            zm[k] -= eps;
            let col = scale(0.5 / eps, &sub(&project_soc(&zp), &project_soc(&zm)));
            for i in 0..3 {
                assert!((j[(i, k)] - col[i]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn coderivative_examples() {
        let zi = [2.0, 1.0, 0.0];
        let u = [0.4, -1.0, 3.0];
        assert!(in_regular_coderivative(&zi, &u, &u, 1e-8));
        assert!(in_limiting_coderivative(&zi, &u, &u, 1e-8));

        let o = [0.0, 0.0, 0.0];
        assert!(in_regular_coderivative(&o, &[2.0, 0.0, 0.0], &[1.0, 1.0, 0.0], 1e-8));
        assert!(!in_regular_coderivative(&o, &[0.0, 0.0, 0.0], &[1.0, 0.0, 0.0], 1e-8));

        assert!(in_limiting_coderivative(&[1.0, 1.0, 0.0], &u, &u, 1e-8));
        assert!(in_limiting_coderivative(&o, &[1.0, 1.0, 0.0], &[0.0, 0.0, 0.0], 1e-8));
    }

    #[test]
    fn origin_family_image_is_recognised() {
        // x* = V(w, alpha) u* for a generic w and alpha.
        let w = [0.6, 0.8];
        let alpha = 0.3;
        let u = [0.7, -0.2, 1.3];
        let mut c2 = vec![0.5];
        c2.extend(w.iter().map(|v| 0.5 * v));
        let a = scale(2.0 * dot(&c2, &u), &c2);
        let mut p = vec![0.0];
        p.extend(reject(&u[1..], &w));
        let x = axpy(&a, alpha, &p);
        assert!(!in_regular_coderivative(&[0.0; 3], &u, &x, 1e-8));
        assert!(in_limiting_coderivative(&[0.0; 3], &u, &x, 1e-8));
    }
}
