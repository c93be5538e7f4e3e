//! Finite-union representations of closed cones.
//!
//! A [`ConePiece`] is a convex cone cut out by linear equalities,
//! inequalities and second-order cone constraints `M x in K`. Unions of
//! pieces plus a few sphere-parametrised families describe every normal
//! cone and direction region used by the certification layer.

use crate::linalg::{dot, norm, orth_complement, rows_to_matrix, sub};
use crate::soc_core::{hat, in_cone};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// `{x : E x = 0, F x <= 0, S x < 0, M_i x in K, N_j x in int K}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConePiece {
    pub dim: usize,
    pub eq_rows: DMatrix<f64>,
    pub ineq_rows: DMatrix<f64>,
    pub strict_rows: DMatrix<f64>,
    pub soc: Vec<DMatrix<f64>>,
    pub soc_strict: Vec<DMatrix<f64>>,
    pub label: String,
}

fn push_row(m: &mut DMatrix<f64>, row: &[f64]) {
    let r = m.nrows();
    let c = m.ncols();
    let mut grown = m.clone().resize_vertically(r + 1, 0.0);
    for j in 0..c {
        grown[(r, j)] = row[j];
    }
    *m = grown;
}

fn normalized(row: &[f64]) -> Option<Vec<f64>> {
    let n = norm(row);
    (n > 0.0).then(|| row.iter().map(|v| v / n).collect())
}

/// Embeds a block vector `a` at `offset` into a row of length `dim`.
pub fn embed(dim: usize, offset: usize, a: &[f64]) -> Vec<f64> {
    let mut row = vec![0.0; dim];
    row[offset..offset + a.len()].copy_from_slice(a);
    row
}

impl ConePiece {
    /// The whole space.
    pub fn free(dim: usize, label: impl Into<String>) -> Self {
        Self {
            dim,
            eq_rows: DMatrix::zeros(0, dim),
            ineq_rows: DMatrix::zeros(0, dim),
            strict_rows: DMatrix::zeros(0, dim),
            soc: Vec::new(),
            soc_strict: Vec::new(),
            label: label.into(),
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Adds `row . x = 0`. Zero rows are dropped.
    pub fn eq(mut self, row: &[f64]) -> Self {
        if let Some(r) = normalized(row) {
            push_row(&mut self.eq_rows, &r);
        }
        self
    }

    /// Adds `row . x <= 0`.
    pub fn le(mut self, row: &[f64]) -> Self {
        if let Some(r) = normalized(row) {
            push_row(&mut self.ineq_rows, &r);
        }
        self
    }

    /// Adds `row . x < 0`. A zero row makes the piece empty.
    pub fn lt(mut self, row: &[f64]) -> Self {
        let r = normalized(row).unwrap_or_else(|| row.to_vec());
        push_row(&mut self.strict_rows, &r);
        self
    }

    /// Adds `M x in K`.
    pub fn in_soc(mut self, m: DMatrix<f64>) -> Self {
        self.soc.push(m);
        self
    }

    /// Adds `M x in int K`.
    pub fn in_soc_interior(mut self, m: DMatrix<f64>) -> Self {
        self.soc_strict.push(m);
        self
    }

    /// Block `[offset, offset + m)` is zero.
    pub fn block_zero(mut self, offset: usize, m: usize) -> Self {
        for i in 0..m {
            let row = embed(self.dim, offset + i, &[1.0]);
            self = self.eq(&row);
        }
        self
    }

    /// Block is orthogonal to `a`.
    pub fn block_perp(self, offset: usize, a: &[f64]) -> Self {
        let row = embed(self.dim, offset, a);
        self.eq(&row)
    }

    /// `<block, a> <= 0`.
    pub fn block_polar(self, offset: usize, a: &[f64]) -> Self {
        let row = embed(self.dim, offset, a);
        self.le(&row)
    }

    /// `<block, a> < 0`.
    pub fn block_polar_strict(self, offset: usize, a: &[f64]) -> Self {
        let row = embed(self.dim, offset, a);
        self.lt(&row)
    }

    /// Block lies on the line `R a`.
    pub fn block_line(mut self, offset: usize, a: &[f64]) -> Self {
        for r in orth_complement(a) {
            let row = embed(self.dim, offset, &r);
            self = self.eq(&row);
        }
        self
    }

    /// Block lies on the ray `R+ a` (`sign = 1`) or `R- a` (`sign = -1`).
    pub fn block_ray(self, offset: usize, a: &[f64], sign: f64) -> Self {
        let neg: Vec<f64> = a.iter().map(|v| -sign * v).collect();
        self.block_line(offset, a).block_polar(offset, &neg)
    }

    /// Block lies in `sign * K` (closed).
    pub fn block_cone(self, offset: usize, m: usize, sign: f64) -> Self {
        let mat = selector(self.dim, offset, m, sign);
        self.in_soc(mat)
    }

    /// Block lies in `sign * int K`.
    pub fn block_cone_interior(self, offset: usize, m: usize, sign: f64) -> Self {
        let mat = selector(self.dim, offset, m, sign);
        self.in_soc_interior(mat)
    }

    /// Conjunction of two pieces over the same space.
    pub fn intersect(&self, other: &ConePiece) -> ConePiece {
        assert_eq!(self.dim, other.dim);
        let stack = |a: &DMatrix<f64>, b: &DMatrix<f64>| {
            let mut m = DMatrix::zeros(a.nrows() + b.nrows(), self.dim);
            m.rows_mut(0, a.nrows()).copy_from(a);
            m.rows_mut(a.nrows(), b.nrows()).copy_from(b);
            m
        };
        let label = match (self.label.is_empty(), other.label.is_empty()) {
            (true, _) => other.label.clone(),
            (_, true) => self.label.clone(),
            _ => format!("{}; {}", self.label, other.label),
        };
        ConePiece {
            dim: self.dim,
            eq_rows: stack(&self.eq_rows, &other.eq_rows),
            ineq_rows: stack(&self.ineq_rows, &other.ineq_rows),
            strict_rows: stack(&self.strict_rows, &other.strict_rows),
            soc: self.soc.iter().chain(&other.soc).cloned().collect(),
            soc_strict: self.soc_strict.iter().chain(&other.soc_strict).cloned().collect(),
            label,
        }
    }

    /// Places this piece (over `self.dim` variables) at `offset` in a space of `dim` variables.
    pub fn lift(&self, dim: usize, offset: usize) -> ConePiece {
        let place = |m: &DMatrix<f64>| {
            let mut out = DMatrix::zeros(m.nrows(), dim);
            out.view_mut((0, offset), (m.nrows(), m.ncols())).copy_from(m);
            out
        };
        ConePiece {
            dim,
            eq_rows: place(&self.eq_rows),
            ineq_rows: place(&self.ineq_rows),
            strict_rows: place(&self.strict_rows),
            soc: self.soc.iter().map(place).collect(),
            soc_strict: self.soc_strict.iter().map(place).collect(),
            label: self.label.clone(),
        }
    }

    /// Cartesian product with `other` (variables of `other` follow).
    pub fn product(&self, other: &ConePiece) -> ConePiece {
        let dim = self.dim + other.dim;
        let mut p = self.lift(dim, 0).intersect(&other.lift(dim, self.dim));
        p.label = format!("{} | {}", self.label, other.label);
        p
    }

    /// Substitutes `x = A z`, giving the piece `{z : A z in self}`.
    pub fn pullback(&self, a: &DMatrix<f64>) -> ConePiece {
        assert_eq!(a.nrows(), self.dim);
        let tr = |m: &DMatrix<f64>| m * a;
        let mut out = ConePiece::free(a.ncols(), self.label.clone());
        for r in 0..self.eq_rows.nrows() {
            let row: Vec<f64> = tr(&self.eq_rows.rows(r, 1).into_owned()).iter().cloned().collect();
            out = out.eq(&row);
        }
        for r in 0..self.ineq_rows.nrows() {
            let row: Vec<f64> = tr(&self.ineq_rows.rows(r, 1).into_owned()).iter().cloned().collect();
            out = out.le(&row);
        }
        for r in 0..self.strict_rows.nrows() {
            let row: Vec<f64> =
                tr(&self.strict_rows.rows(r, 1).into_owned()).iter().cloned().collect();
            out = out.lt(&row);
        }
        out.soc = self.soc.iter().map(tr).collect();
        out.soc_strict = self.soc_strict.iter().map(tr).collect();
        out
    }

    pub fn has_strict(&self) -> bool {
        self.strict_rows.nrows() > 0 || !self.soc_strict.is_empty()
    }

    pub fn is_polyhedral(&self) -> bool {
        self.soc.iter().chain(&self.soc_strict).all(|m| m.nrows() <= 2)
    }

    /// Membership of the closure with absolute slack `s` (rows are unit norm).
    pub fn contains(&self, x: &[f64], s: f64) -> bool {
        let v = DMatrix::from_column_slice(self.dim, 1, x);
        let ok_eq = (&self.eq_rows * &v).iter().all(|r| r.abs() <= s);
        let ok_le = (&self.ineq_rows * &v).iter().all(|r| *r <= s);
        let ok_lt = (&self.strict_rows * &v).iter().all(|r| *r <= s);
        let ok_soc = self
            .soc
            .iter()
            .chain(&self.soc_strict)
            .all(|m| in_cone((m * &v).as_slice(), s * m.norm().max(1.0)));
        ok_eq && ok_le && ok_lt && ok_soc
    }

    /// Membership with strict constraints enforced by margin `s`.
    pub fn contains_strict(&self, x: &[f64], s: f64) -> bool {
        let v = DMatrix::from_column_slice(self.dim, 1, x);
        let ok_lt = (&self.strict_rows * &v).iter().all(|r| *r < -s);
        let ok_int = self
            .soc_strict
            .iter()
            .all(|m| crate::soc_core::in_cone_interior((m * &v).as_slice(), s));
        ok_lt && ok_int && self.contains(x, s)
    }
}

/// `sign * I` on block `[offset, offset + m)` as an `m x dim` matrix.
pub fn selector(dim: usize, offset: usize, m: usize, sign: f64) -> DMatrix<f64> {
    DMatrix::from_fn(m, dim, |i, j| if j == offset + i { sign } else { 0.0 })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FamilyKind {
    /// `u in R- xi, v in xi polar`.
    RayPolar,
    /// `u in xi polar, v in R- xi`.
    PolarRay,
    /// `u perp xi, v perp xi_hat, alpha u_hat + (1 - alpha) v in R xi`.
    Mixed,
}

/// A union over `xi = (1, w)`, `|w| = 1`, of pieces over `(u, v)` in `R^m x R^m`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParametricFamily {
    pub kind: FamilyKind,
    pub m: usize,
    pub label: String,
    /// A convex piece containing every member of the family.
    pub relaxation: ConePiece,
}

impl ParametricFamily {
    pub fn new(kind: FamilyKind, m: usize) -> Self {
        let dim = 2 * m;
        let (label, relaxation) = match kind {
            FamilyKind::RayPolar => (
                "u in R- xi, v in xi polar",
                ConePiece::free(dim, "").block_cone(0, m, -1.0),
            ),
            FamilyKind::PolarRay => (
                "u in xi polar, v in R- xi",
                ConePiece::free(dim, "").block_cone(m, m, -1.0),
            ),
            FamilyKind::Mixed => (
                "u perp xi, v perp xi_hat, alpha u_hat + (1-alpha) v in R xi",
                ConePiece::free(dim, ""),
            ),
        };
        Self {
            kind,
            m,
            label: label.into(),
            relaxation: relaxation.with_label(format!("relaxed[{label}]")),
        }
    }

    /// The member piece for `xi = (1, w/|w|)` and `alpha` (used by `Mixed` only).
    pub fn instantiate(&self, w: &[f64], alpha: f64) -> ConePiece {
        let m = self.m;
        let nw = norm(w);
        let mut xi = vec![1.0];
        xi.extend(w.iter().map(|v| v / nw));
        let xh = hat(&xi);
        let dim = 2 * m;
        let label = format!("{} @ xi={:?}", self.label, xi);
        match self.kind {
            FamilyKind::RayPolar => ConePiece::free(dim, label)
                .block_ray(0, &xi, -1.0)
                .block_polar(m, &xi),
            FamilyKind::PolarRay => ConePiece::free(dim, label)
                .block_polar(0, &xi)
                .block_ray(m, &xi, -1.0),
            FamilyKind::Mixed => {
                let mut p = ConePiece::free(dim, format!("{label}, alpha={alpha}"))
                    .block_perp(0, &xi)
                    .block_perp(m, &xh);
                for r in orth_complement(&xi) {
                    // <r, alpha u_hat + (1 - alpha) v> = alpha <r_hat, u> + (1 - alpha) <r, v>
                    let mut row: Vec<f64> = hat(&r).iter().map(|v| alpha * v).collect();
                    row.extend(r.iter().map(|v| (1.0 - alpha) * v));
                    p = p.eq(&row);
                }
                p
            }
        }
    }

    /// Decides membership of `(u, v)` by eliminating `xi` (and `alpha`) algebraically.
    pub fn contains(&self, lam: &[f64], s: f64) -> bool {
        let m = self.m;
        let (u, v) = lam.split_at(m);
        match self.kind {
            FamilyKind::RayPolar => ray_polar_member(u, v, s),
            FamilyKind::PolarRay => ray_polar_member(v, u, s),
            FamilyKind::Mixed => mixed_member(u, v, s),
        }
    }
}

/// `a in R- xi` and `b in xi polar` for some `xi in C`.
fn ray_polar_member(a: &[f64], b: &[f64], s: f64) -> bool {
    let na = norm(a);
    if na <= s {
        // Need some xi with <b, xi> <= 0, i.e. b1 - |b2| <= 0.
        return b[0] - norm(&b[1..]) <= s;
    }
    // -a must be a positive multiple of some xi in C.
    let xi: Vec<f64> = a.iter().map(|v| -v / na).collect();
    let t = norm(&xi[1..]);
    xi[0] > 0.0 && (xi[0] - t).abs() <= s && dot(b, &xi) <= s
}

fn mixed_member(u: &[f64], v: &[f64], s: f64) -> bool {
    let uh = hat(u);
    let vh = hat(v);
    let diff = sub(&uh, v);
    let a_of = |al: f64| -> Vec<f64> { v.iter().zip(&diff).map(|(vi, di)| vi + al * di).collect() };
    let mut alphas = vec![0.0, 0.5, 1.0];
    // <u, a(alpha)> = alpha <u, u_hat> + (1 - alpha) <u, v>.
    let lin = |p: f64, q: f64, out: &mut Vec<f64>| {
        if (p - q).abs() > 1e-300 {
            out.push(q / (q - p));
        }
    };
    lin(dot(u, &uh), dot(u, v), &mut alphas);
    // <v, a_hat(alpha)> = alpha <v, u> + (1 - alpha) <v, v_hat>.
    lin(dot(v, u), dot(v, &vh), &mut alphas);
    // <a, a_hat> = 0 is quadratic in alpha.
    let (c0, c1, c2) = {
        let dh = hat(&diff);
        (dot(v, &vh), 2.0 * dot(v, &dh), dot(&diff, &dh))
    };
    if c2.abs() > 1e-300 {
        let disc = c1 * c1 - 4.0 * c2 * c0;
        if disc >= 0.0 {
            let sq = disc.sqrt();
            alphas.push((-c1 + sq) / (2.0 * c2));
            alphas.push((-c1 - sq) / (2.0 * c2));
        } else {
            alphas.push(-c1 / (2.0 * c2));
        }
    } else if c1.abs() > 1e-300 {
        alphas.push(-c0 / c1);
    }
    // Least-squares zero of a(alpha).
    let dd = dot(&diff, &diff);
    if dd > 0.0 {
        alphas.push(-dot(v, &diff) / dd);
    }
    for al in alphas {
        if !al.is_finite() || !(-1e-12..=1.0 + 1e-12).contains(&al) {
            continue;
        }
        let al = al.clamp(0.0, 1.0);
        let a = a_of(al);
        let na = norm(&a);
        if na <= s {
            if exists_unit_w(u, v, s) {
                return true;
            }
            continue;
        }
        let t = norm(&a[1..]);
        if (a[0].abs() - t).abs() > s || a[0].abs() <= s {
            continue;
        }
        let xi: Vec<f64> = a.iter().map(|x| x / a[0]).collect();
        let scale = norm(&xi);
        if dot(u, &xi).abs() <= s * scale && dot(v, &hat(&xi)).abs() <= s * scale {
            return true;
        }
    }
    false
}

/// Some unit `w` with `u1 + <u2, w> = 0` and `v1 - <v2, w> = 0`.
fn exists_unit_w(u: &[f64], v: &[f64], s: f64) -> bool {
    let k = u.len() - 1;
    let a = rows_to_matrix(&[u[1..].to_vec(), v[1..].iter().map(|x| -x).collect()], k);
    let rhs = nalgebra::DVector::from_vec(vec![-u[0], -v[0]]);
    let svd = a.clone().svd(true, true);
    let w0 = match svd.solve(&rhs, 1e-12) {
        Ok(w) => w,
        Err(_) => return false,
    };
    let res = (&a * &w0 - &rhs).norm();
    if res > s {
        return false;
    }
    let nw = w0.norm();
    let rank = crate::linalg::rank(&a, 1e-12);
    if rank < k {
        nw <= 1.0 + s
    } else {
        (nw - 1.0).abs() <= s
    }
}

/// A finite union of pieces plus parametric families, all over `dim` variables.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConeUnionRep {
    pub dim: usize,
    pub pieces: Vec<ConePiece>,
    pub families: Vec<ParametricFamily>,
}

impl ConeUnionRep {
    pub fn from_pieces(dim: usize, pieces: Vec<ConePiece>) -> Self {
        Self {
            dim,
            pieces,
            families: Vec::new(),
        }
    }

    pub fn contains(&self, x: &[f64], s: f64) -> bool {
        self.pieces.iter().any(|p| p.contains(x, s))
            || self.families.iter().any(|f| f.contains(x, s))
    }

    /// Label of the first piece or family containing `x`.
    pub fn matching_label(&self, x: &[f64], s: f64) -> Option<String> {
        self.pieces
            .iter()
            .find(|p| p.contains(x, s))
            .map(|p| p.label.clone())
            .or_else(|| {
                self.families
                    .iter()
                    .find(|f| f.contains(x, s))
                    .map(|f| f.label.clone())
            })
    }

    pub fn is_finite(&self) -> bool {
        self.families.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ray_encoding() {
        let p = ConePiece::free(2, "ray").block_ray(0, &[1.0, -1.0], -1.0);
        assert!(p.contains(&[-2.0, 2.0], 1e-12));
        assert!(!p.contains(&[2.0, -2.0], 1e-12));
        assert!(!p.contains(&[1.0, 1.0], 1e-12));
    }

    #[test]
    fn family_instances_are_members() {
        let w = [0.6, -0.8];
        for kind in [FamilyKind::RayPolar, FamilyKind::PolarRay, FamilyKind::Mixed] {
            let fam = ParametricFamily::new(kind, 3);
            let piece = fam.instantiate(&w, 0.3);
            // Sample a point of the piece from its null space and sign-fix.
            let basis = crate::linalg::null_space(&piece.eq_rows, 1e-12);
            for b in &basis {
                for sgn in [1.0, -1.0] {
                    let x: Vec<f64> = b.iter().map(|v| sgn * v).collect();
                    if piece.contains(&x, 1e-10) {
                        assert!(fam.contains(&x, 1e-8), "{kind:?} {x:?}");
                        assert!(fam.relaxation.contains(&x, 1e-8));
                    }
                }
            }
        }
    }

    #[test]
    fn mixed_member_detects_non_members() {
        let fam = ParametricFamily::new(FamilyKind::Mixed, 3);
        // u = e1 cannot be orthogonal to any xi = (1, w).
        assert!(!fam.contains(&[1.0, 0.0, 0.0, 0.0, 0.0, 0.0], 1e-9));
    }
}
