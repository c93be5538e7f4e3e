//! Second-order cone computations written without the library's spectral code.

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(s: f64, a: &[f64]) -> Vec<f64> {
    a.iter().map(|x| s * x).collect()
}

pub fn unit(a: &[f64]) -> Vec<f64> {
    scale(1.0 / norm(a), a)
}

pub fn tail_norm(z: &[f64]) -> f64 {
    norm(&z[1..])
}

/// `(z1, -z2)`.
pub fn hat(z: &[f64]) -> Vec<f64> {
    let mut h = scale(-1.0, z);
    h[0] = z[0];
    h
}

pub fn in_k(z: &[f64], s: f64) -> bool {
    z[0] >= tail_norm(z) - s
}

/// Projection onto `K` by minimising over the boundary ray in the plane of `e1` and `z`.
pub fn proj(z: &[f64]) -> Vec<f64> {
    if z.len() == 1 {
        return vec![z[0].max(0.0)];
    }
    let t = tail_norm(z);
    if z[0] >= t {
        return z.to_vec();
    }
    if z[0] <= -t {
        return vec![0.0; z.len()];
    }
    // minimise (r - z1)^2 + (r - t)^2 over r >= 0 by bisection on the derivative
    let (mut lo, mut hi) = (0.0, norm(z));
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if 2.0 * mid - z[0] - t > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let r = 0.5 * (lo + hi);
    let mut x = vec![r];
    x.extend(z[1..].iter().map(|v| r * v / t));
    x
}

/// Projection onto `-K`.
pub fn proj_neg(z: &[f64]) -> Vec<f64> {
    scale(-1.0, &proj(&scale(-1.0, z)))
}

/// The pair `(Pi(s), Pi(s) - s)` of the complementarity set.
pub fn pair(s: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let x = proj(s);
    let y = sub(&x, s);
    (x, y)
}

/// Regions of a single point, used to steer generators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Region {
    InteriorK,
    BoundaryK,
    Zero,
    InteriorNegK,
    BoundaryNegK,
    Outside,
}

pub const ALL_REGIONS: [Region; 6] = [
    Region::InteriorK,
    Region::BoundaryK,
    Region::Zero,
    Region::InteriorNegK,
    Region::BoundaryNegK,
    Region::Outside,
];

pub fn regions_for(m: usize) -> Vec<Region> {
    if m == 1 {
        vec![Region::InteriorK, Region::Zero, Region::InteriorNegK]
    } else {
        ALL_REGIONS.to_vec()
    }
}
