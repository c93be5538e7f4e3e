//! Explicit sequences realising directional normals of the complementarity set.
//!
//! Points of `Omega` are parametrised as `p(s) = (Pi(s), Pi(s) - s)`. A tuple
//! fixes a base `s`, a direction `h`, a second-order tilt `e` and the stratum
//! the perturbed points `s_k = s + t h + t^1.25 e` fall into. The limit of the
//! regular normal cones along the sequence is known in closed form.

use super::gen::{self, R};
use super::soc::{self, dot, hat, scale, sub, unit, Region};
use nalgebra::{DMatrix, DVector};
use rand::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stratum {
    Int,
    NegInt,
    Outside,
    BdK,
    BdNegK,
    Zero,
}

impl Stratum {
    fn mirror(self) -> Self {
        match self {
            Stratum::Int => Stratum::NegInt,
            Stratum::NegInt => Stratum::Int,
            Stratum::BdK => Stratum::BdNegK,
            Stratum::BdNegK => Stratum::BdK,
            s => s,
        }
    }
}

fn region_stratum(r: Region) -> Stratum {
    match r {
        Region::InteriorK => Stratum::Int,
        Region::InteriorNegK => Stratum::NegInt,
        Region::Outside => Stratum::Outside,
        Region::BoundaryK => Stratum::BdK,
        Region::BoundaryNegK => Stratum::BdNegK,
        Region::Zero => Stratum::Zero,
    }
}

/// Stratum of `s` with a relative slack of 1e-12.
pub fn stratum_of(s: &[f64]) -> Stratum {
    let n = soc::norm(s);
    if n == 0.0 {
        return Stratum::Zero;
    }
    let slack = 1e-12 * n;
    if s.len() == 1 {
        return if s[0] > 0.0 { Stratum::Int } else { Stratum::NegInt };
    }
    let t = soc::tail_norm(s);
    if s[0] > t + slack {
        Stratum::Int
    } else if s[0] < -t - slack {
        Stratum::NegInt
    } else if (s[0] - t).abs() <= slack {
        Stratum::BdK
    } else if (s[0] + t).abs() <= slack {
        Stratum::BdNegK
    } else {
        Stratum::Outside
    }
}

#[derive(Debug, Clone)]
pub enum Limit {
    At(Vec<f64>, Stratum),
    UZero,
    VZero,
    /// `u in R a, v perp a`.
    ULine(Vec<f64>),
    /// `v in R a, u perp a`.
    VLine(Vec<f64>),
}

impl Limit {
    fn mirror(self) -> Self {
        match self {
            Limit::At(s, st) => Limit::At(scale(-1.0, &s), st.mirror()),
            Limit::UZero => Limit::VZero,
            Limit::VZero => Limit::UZero,
            Limit::ULine(a) => Limit::VLine(a),
            Limit::VLine(a) => Limit::ULine(a),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Tuple {
    pub label: &'static str,
    pub s: Vec<f64>,
    pub h: Vec<f64>,
    pub e: Vec<f64>,
    /// Radial snap of every `s_k` onto `bd K` or `-bd K`.
    pub snap: Option<Stratum>,
    /// Stratum of every `s_k`.
    pub stratum: Stratum,
    pub limit: Limit,
}

impl Tuple {
    fn mirror(self) -> Self {
        Tuple {
            label: self.label,
            s: scale(-1.0, &self.s),
            h: scale(-1.0, &self.h),
            e: scale(-1.0, &self.e),
            snap: self.snap.map(Stratum::mirror),
            stratum: self.stratum.mirror(),
            limit: self.limit.mirror(),
        }
    }

    pub fn point(&self, t: f64) -> Vec<f64> {
        let mut s: Vec<f64> = (0..self.s.len())
            .map(|i| self.s[i] + t * self.h[i] + t.powf(1.25) * self.e[i])
            .collect();
        match self.snap {
            Some(Stratum::BdK) => s[0] = soc::tail_norm(&s),
            Some(Stratum::BdNegK) => s[0] = -soc::tail_norm(&s),
            _ => {}
        }
        s
    }
}

/// Jacobian of the projection at a point outside `K u -K`.
fn outside_jacobian(s: &[f64]) -> DMatrix<f64> {
    let m = s.len();
    let r = soc::tail_norm(s);
    let ub: Vec<f64> = s[1..].iter().map(|v| v / r).collect();
    let q = s[0] / r;
    let mut j = DMatrix::zeros(m, m);
    j[(0, 0)] = 0.5;
    for i in 1..m {
        j[(0, i)] = 0.5 * ub[i - 1];
        j[(i, 0)] = 0.5 * ub[i - 1];
        for k in 1..m {
            let id = if i == k { 1.0 } else { 0.0 };
            j[(i, k)] = 0.5 * ((1.0 + q) * id - q * ub[i - 1] * ub[k - 1]);
        }
    }
    j
}

fn split(g: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let m = g.len() / 2;
    (g[..m].to_vec(), g[m..].to_vec())
}

fn join(u: Vec<f64>, v: Vec<f64>) -> Vec<f64> {
    let mut out = u;
    out.extend(v);
    out
}

/// `g - <g, a> a` for unit `a`.
fn perp(g: &[f64], a: &[f64]) -> Vec<f64> {
    sub(g, &scale(dot(g, a), a))
}

/// Projection of `g` onto the regular normal cone of `Omega` at `p(s)`.
pub fn regular_normal_proj(s: &[f64], st: Stratum, g: &[f64]) -> Vec<f64> {
    let m = s.len();
    let (gu, gv) = split(g);
    let zero = vec![0.0; m];
    match st {
        Stratum::Int => join(zero, gv),
        Stratum::NegInt => join(gu, zero),
        Stratum::Zero => join(soc::proj_neg(&gu), soc::proj_neg(&gv)),
        Stratum::BdK => {
            let a = unit(&hat(s));
            let u = scale(dot(&gu, &a).min(0.0), &a);
            let v = sub(&gv, &scale(dot(&gv, &a).max(0.0), &a));
            join(u, v)
        }
        Stratum::BdNegK => {
            let b = unit(&hat(&scale(-1.0, s)));
            let v = scale(dot(&gv, &b).min(0.0), &b);
            let u = sub(&gu, &scale(dot(&gu, &b).max(0.0), &b));
            join(u, v)
        }
        Stratum::Outside => {
            let j = outside_jacobian(s);
            let mut mm = DMatrix::zeros(2 * m, m);
            mm.view_mut((0, 0), (m, m)).copy_from(&j);
            mm.view_mut((m, 0), (m, m)).copy_from(&(&j - DMatrix::identity(m, m)));
            let gv_ = DVector::from_column_slice(g);
            let gram = mm.transpose() * &mm;
            let coef = gram.cholesky().expect("tangent space has full rank").solve(&(mm.transpose() * &gv_));
            (gv_ - mm * coef).iter().copied().collect()
        }
    }
}

/// Projection of `g` onto the limit cone.
pub fn limit_proj(limit: &Limit, g: &[f64]) -> Vec<f64> {
    let m = g.len() / 2;
    let (gu, gv) = split(g);
    match limit {
        Limit::At(s, st) => regular_normal_proj(s, *st, g),
        Limit::UZero => join(vec![0.0; m], gv),
        Limit::VZero => join(gu, vec![0.0; m]),
        Limit::ULine(a) => join(scale(dot(&gu, a), a), perp(&gv, a)),
        Limit::VLine(a) => join(perp(&gu, a), scale(dot(&gv, a), a)),
    }
}

fn small(r: &mut R, m: usize, len: f64) -> Vec<f64> {
    scale(len, &gen::unit(r, m))
}

/// Tangential part of a random vector at a boundary point with inward normal `a`.
fn tangential(r: &mut R, a: &[f64]) -> Vec<f64> {
    let m = a.len();
    let p = perp(&gen::gauss(r, m), a);
    if soc::norm(&p) < 1e-6 {
        return vec![0.0; m];
    }
    scale(0.5, &unit(&p))
}

/// Number of tuple families for cone dimension `m`.
pub fn families(m: usize) -> usize {
    if m == 1 {
        3
    } else {
        19
    }
}

/// A tuple of the given family.
pub fn tuple(r: &mut R, m: usize, family: usize) -> Tuple {
    if m == 1 {
        return scalar_tuple(r, family);
    }
    match family {
        0 => {
            let reg = [Region::InteriorK, Region::InteriorNegK, Region::Outside][r.random_range(0..3)];
            let s = gen::point_in(r, m, reg);
            let st = region_stratum(reg);
            Tuple {
                label: "open stratum",
                h: gen::gauss(r, m),
                e: small(r, m, 0.5),
                snap: None,
                stratum: st,
                limit: Limit::At(s.clone(), st),
                s,
            }
        }
        1..=5 => boundary_tuple(r, m, family),
        6..=10 => boundary_tuple(r, m, family - 5).mirror(),
        11 => {
            let reg = [Region::InteriorK, Region::InteriorNegK, Region::Outside][r.random_range(0..3)];
            let h = gen::point_in(r, m, reg);
            let st = region_stratum(reg);
            Tuple {
                label: "origin, open direction",
                s: vec![0.0; m],
                e: small(r, m, 0.05),
                snap: None,
                stratum: st,
                limit: Limit::At(h.clone(), st),
                h,
            }
        }
        12..=14 => origin_boundary_tuple(r, m, family),
        15..=17 => origin_boundary_tuple(r, m, family - 3).mirror(),
        _ => {
            let reg = soc::ALL_REGIONS[r.random_range(0..6)];
            let zeta = gen::point_in(r, m, reg);
            let st = region_stratum(reg);
            Tuple {
                label: "origin, zero direction",
                s: vec![0.0; m],
                h: vec![0.0; m],
                e: zeta.clone(),
                snap: None,
                stratum: st,
                limit: Limit::At(zeta, st),
            }
        }
    }
}

fn scalar_tuple(r: &mut R, family: usize) -> Tuple {
    let sign = if r.random_bool(0.5) { 1.0 } else { -1.0 };
    let st = if sign > 0.0 { Stratum::Int } else { Stratum::NegInt };
    let mag: f64 = r.random_range(0.5..2.0);
    let noise: f64 = r.random_range(-1.0..1.0);
    match family {
        0 => Tuple {
            label: "open stratum",
            s: vec![sign * mag],
            h: vec![noise],
            e: vec![0.3 * noise],
            snap: None,
            stratum: st,
            limit: Limit::At(vec![sign * mag], st),
        },
        1 => Tuple {
            label: "origin, open direction",
            s: vec![0.0],
            h: vec![sign * mag],
            e: vec![0.05 * noise],
            snap: None,
            stratum: st,
            limit: Limit::At(vec![sign * mag], st),
        },
        _ => {
            let zeta = if r.random_bool(0.2) { 0.0 } else { sign * mag };
            let st = stratum_of(&[zeta]);
            Tuple {
                label: "origin, zero direction",
                s: vec![0.0],
                h: vec![0.0],
                e: vec![zeta],
                snap: None,
                stratum: st,
                limit: Limit::At(vec![zeta], st),
            }
        }
    }
}

/// `s` on `bd K`: families 1..=5 are inward, outward, tangential tilted in,
/// tangential tilted out and tangential along the boundary.
fn boundary_tuple(r: &mut R, m: usize, family: usize) -> Tuple {
    let s = gen::point_in(r, m, Region::BoundaryK);
    let a = unit(&hat(&s));
    let hp = tangential(r, &a);
    let c: f64 = r.random_range(0.5..1.5);
    let (label, h, e, snap, stratum, limit) = match family {
        1 => ("boundary, inward", soc::add(&hp, &scale(c, &a)), small(r, m, 0.1), None, Stratum::Int, Limit::UZero),
        2 => (
            "boundary, outward",
            sub(&hp, &scale(c, &a)),
            small(r, m, 0.1),
            None,
            Stratum::Outside,
            Limit::ULine(a.clone()),
        ),
        3 => ("boundary, tangential, tilted in", hp, a.clone(), None, Stratum::Int, Limit::UZero),
        4 => (
            "boundary, tangential, tilted out",
            hp,
            scale(-1.0, &a),
            None,
            Stratum::Outside,
            Limit::ULine(a.clone()),
        ),
        _ => (
            "boundary, along the boundary",
            hp,
            vec![0.0; m],
            Some(Stratum::BdK),
            Stratum::BdK,
            Limit::At(s.clone(), Stratum::BdK),
        ),
    };
    Tuple { label, s, h, e, snap, stratum, limit }
}

/// `s = 0` with `h` on `bd K`: families 12..=14 tilt in, tilt out, stay on the boundary.
fn origin_boundary_tuple(r: &mut R, m: usize, family: usize) -> Tuple {
    let h = gen::point_in(r, m, Region::BoundaryK);
    let a = unit(&hat(&h));
    let s = vec![0.0; m];
    match family {
        12 => Tuple {
            label: "origin, boundary direction, tilted in",
            s,
            e: a.clone(),
            h,
            snap: None,
            stratum: Stratum::Int,
            limit: Limit::UZero,
        },
        13 => Tuple {
            label: "origin, boundary direction, tilted out",
            s,
            e: scale(-1.0, &a),
            h,
            snap: None,
            stratum: Stratum::Outside,
            limit: Limit::ULine(a),
        },
        _ => {
            let e = tangential(r, &a);
            Tuple {
                label: "origin, boundary direction, along the boundary",
                s,
                e,
                snap: Some(Stratum::BdK),
                stratum: Stratum::BdK,
                limit: Limit::At(h.clone(), Stratum::BdK),
                h,
            }
        }
    }
}
