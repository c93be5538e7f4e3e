//! Small dense helpers shared by the cone kernels.

use nalgebra::DMatrix;

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

/// `a + s * b`.
pub fn axpy(a: &[f64], s: f64, b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + s * y).collect()
}

pub fn concat(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    out.extend_from_slice(a);
    out.extend_from_slice(b);
    out
}

pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Orthonormal basis of the orthogonal complement of `a` (Householder).
/// Returns `a.len() - 1` rows; for `a = 0` returns the full identity.
pub fn orth_complement(a: &[f64]) -> Vec<Vec<f64>> {
    let n = a.len();
    let na = norm(a);
    if na == 0.0 {
        return (0..n).map(|i| unit(n, i)).collect();
    }
    let mut v: Vec<f64> = a.iter().map(|x| x / na).collect();
    let s = if v[0] >= 0.0 { 1.0 } else { -1.0 };
    v[0] += s;
    let vv = dot(&v, &v);
    // H = I - 2 v v^T / vv maps a/|a| to -s e_0; rows 1.. of H span a^perp.
    (1..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let id = if i == j { 1.0 } else { 0.0 };
                    id - 2.0 * v[i] * v[j] / vv
                })
                .collect()
        })
        .collect()
}

pub fn unit(n: usize, i: usize) -> Vec<f64> {
    let mut e = vec![0.0; n];
    e[i] = 1.0;
    e
}

/// Component of `a` orthogonal to the line spanned by `dir`.
pub fn reject(a: &[f64], dir: &[f64]) -> Vec<f64> {
    let dd = dot(dir, dir);
    if dd == 0.0 {
        return a.to_vec();
    }
    axpy(a, -dot(a, dir) / dd, dir)
}

pub fn mat_vec(m: &DMatrix<f64>, x: &[f64]) -> Vec<f64> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)] * x[j]).sum())
        .collect()
}

/// `m x` with entries below `1e-12 |m_i| |x|` set to zero, so that rounding
/// noise in `x` or in the sum does not read as a direction.
pub fn mat_vec_snapped(m: &DMatrix<f64>, x: &[f64]) -> Vec<f64> {
    let nx = norm(x);
    (0..m.nrows())
        .map(|i| {
            let row = m.row(i);
            let y: f64 = (0..m.ncols()).map(|j| row[j] * x[j]).sum();
            if y.abs() <= 1e-12 * row.norm() * nx {
                0.0
            } else {
                y
            }
        })
        .collect()
}

pub fn mat_t_vec(m: &DMatrix<f64>, y: &[f64]) -> Vec<f64> {
    (0..m.ncols())
        .map(|j| (0..m.nrows()).map(|i| m[(i, j)] * y[i]).sum())
        .collect()
}

pub fn rows_to_matrix(rows: &[Vec<f64>], ncols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j])
}

pub fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

/// Numerical rank with a relative singular-value cutoff.
pub fn rank(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|s| **s > rel_tol * smax.max(1.0)).count()
}

/// Orthonormal basis (as rows) of the null space of `m`.
pub fn null_space(m: &DMatrix<f64>, rel_tol: f64) -> Vec<Vec<f64>> {
    let n = m.ncols();
    if m.nrows() == 0 {
        return (0..n).map(|i| unit(n, i)).collect();
    }
    // Pad to at least n rows so the thin SVD returns a full V.
    let rows = m.nrows().max(n);
    let padded = DMatrix::from_fn(rows, n, |i, j| if i < m.nrows() { m[(i, j)] } else { 0.0 });
    let svd = padded.svd(false, true);
    let vt = svd.v_t.expect("v_t requested");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let cut = rel_tol * smax.max(1.0);
    let mut out = Vec::new();
    for (k, s) in svd.singular_values.iter().enumerate() {
        if *s <= cut {
            out.push((0..n).map(|j| vt[(k, j)]).collect());
        }
    }
    out
}

/// Orthonormal basis (as rows) of the row space of `m`.
pub fn row_space(m: &DMatrix<f64>, rel_tol: f64) -> Vec<Vec<f64>> {
    let n = m.ncols();
    if m.nrows() == 0 || n == 0 {
        return Vec::new();
    }
    let rows = m.nrows().max(n);
    let padded = DMatrix::from_fn(rows, n, |i, j| if i < m.nrows() { m[(i, j)] } else { 0.0 });
    let svd = padded.svd(false, true);
    let vt = svd.v_t.expect("v_t requested");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    if smax == 0.0 {
        return Vec::new();
    }
    let cut = rel_tol * smax.max(1.0);
    let mut out = Vec::new();
    for (k, s) in svd.singular_values.iter().enumerate() {
        if *s > cut {
            out.push((0..n).map(|j| vt[(k, j)]).collect());
        }
    }
    out
}

/// Orthogonal projection of `x` onto the span of orthonormal `basis` rows.
pub fn project_span(x: &[f64], basis: &[Vec<f64>]) -> Vec<f64> {
    let mut out = vec![0.0; x.len()];
    for b in basis {
        let c = dot(x, b);
        for (o, bi) in out.iter_mut().zip(b) {
            *o += c * bi;
        }
    }
    out
}
