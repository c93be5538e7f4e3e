//! Deterministic low-discrepancy point sets.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const PRIMES: [u64; 24] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89,
];

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    r
}

/// A Halton sequence in `[0, 1)^dim` with a seeded random shift modulo 1.
#[derive(Debug, Clone)]
pub struct Halton {
    dim: usize,
    shift: Vec<f64>,
    next: u64,
}

impl Halton {
    pub fn new(dim: usize, seed: u64) -> Self {
        assert!(dim <= PRIMES.len(), "Halton dimension too large");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shift = if seed == 0 {
            vec![0.0; dim]
        } else {
            (0..dim).map(|_| rng.random::<f64>()).collect()
        };
        Self { dim, shift, next: 1 }
    }

    pub fn next_point(&mut self) -> Vec<f64> {
        let i = self.next;
        self.next += 1;
        (0..self.dim)
            .map(|k| (radical_inverse(i, PRIMES[k]) + self.shift[k]).fract())
            .collect()
    }
}

/// `count` points on the unit sphere of `R^n` (Box-Muller on a Halton stream).
pub fn sphere_points(n: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    if n == 0 {
        return Vec::new();
    }
    let pairs = n.div_ceil(2);
    let mut h = Halton::new(2 * pairs, seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let u = h.next_point();
        let mut g = Vec::with_capacity(2 * pairs);
        for k in 0..pairs {
            let r = (-2.0 * (1.0 - u[2 * k]).max(1e-300).ln()).sqrt();
            let th = 2.0 * std::f64::consts::PI * u[2 * k + 1];
            g.push(r * th.cos());
            g.push(r * th.sin());
        }
        g.truncate(n);
        let nn = crate::linalg::norm(&g);
        if nn > 1e-12 {
            out.push(g.iter().map(|v| v / nn).collect());
        }
    }
    out
}
