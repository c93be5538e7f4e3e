//! SOC complementarity system instances: maps, cone structure, reference
//! point, derivatives and residuals.
//!
//! An instance describes `F(z) in Lambda` together with
//! `K_i contains G_i(z) perp H_i(z) in K_i`. The stacked map
//! `P(z) = (F(z), G(z), H(z))` is what the certification layer works with.

use crate::comp_set::{distance_to_omega, distance_to_theta, natural_residual};
use crate::error::{LoadError, Result, SoccpError};
use crate::linalg::norm;
use crate::soc_core::project_soc;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

/// Largest residual accepted for the reference point at load time.
pub const LOAD_FEASIBILITY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MapKind {
    Affine,
    Quadratic,
}

/// `z -> (1/2 z^T Q_i z + (A z)_i + b_i)_i`; affine maps have no `Q`.
#[derive(Debug, Clone, PartialEq)]
pub struct MapSpec {
    pub kind: MapKind,
    pub a: DMatrix<f64>,
    pub b: Vec<f64>,
    pub q: Vec<DMatrix<f64>>,
}

impl MapSpec {
    pub fn affine(a: DMatrix<f64>, b: Vec<f64>) -> Self {
        Self {
            kind: MapKind::Affine,
            a,
            b,
            q: Vec::new(),
        }
    }

    pub fn quadratic(q: Vec<DMatrix<f64>>, a: DMatrix<f64>, b: Vec<f64>) -> Self {
        Self {
            kind: MapKind::Quadratic,
            a,
            b,
            q,
        }
    }

    /// The map with no outputs.
    pub fn empty(n: usize) -> Self {
        Self::affine(DMatrix::zeros(0, n), Vec::new())
    }

    pub fn in_dim(&self) -> usize {
        self.a.ncols()
    }

    pub fn out_dim(&self) -> usize {
        self.b.len()
    }

    /// Hessian of output `i` (constant for these map kinds).
    pub fn hessian(&self, i: usize) -> DMatrix<f64> {
        match self.q.get(i) {
            Some(q) => q.clone(),
            None => DMatrix::zeros(self.in_dim(), self.in_dim()),
        }
    }

    pub fn row_is_affine(&self, i: usize) -> bool {
        self.q.get(i).is_none_or(|q| q.iter().all(|v| *v == 0.0))
    }

    pub fn is_affine(&self) -> bool {
        (0..self.out_dim()).all(|i| self.row_is_affine(i))
    }

    /// Value and Jacobian at `z`.
    pub fn eval(&self, z: &[f64]) -> Result<(Vec<f64>, DMatrix<f64>)> {
        if z.len() != self.in_dim() {
            return Err(SoccpError::Dimension(format!(
                "map expects {} inputs, got {}",
                self.in_dim(),
                z.len()
            )));
        }
        let zv = DMatrix::from_column_slice(z.len(), 1, z);
        let az = &self.a * &zv;
        let mut value: Vec<f64> = (0..self.out_dim()).map(|i| az[i] + self.b[i]).collect();
        let mut jac = self.a.clone();
        for (i, q) in self.q.iter().enumerate() {
            let qz = q * &zv;
            value[i] += 0.5 * (zv.transpose() * &qz)[0];
            for j in 0..self.in_dim() {
                jac[(i, j)] += qz[j];
            }
        }
        Ok((value, jac))
    }
}

pub fn eval_map(map: &MapSpec, z: &[f64]) -> Result<(Vec<f64>, DMatrix<f64>)> {
    map.eval(z)
}

/// `w^T Hess(lambda^T map)(z) w = sum_i lambda_i w^T Q_i w`.
pub fn eval_hessian_form(map: &MapSpec, lambda: &[f64], w: &[f64], z: &[f64]) -> Result<f64> {
    let n = map.in_dim();
    if lambda.len() != map.out_dim() || w.len() != n || z.len() != n {
        return Err(SoccpError::Dimension("hessian form arguments".into()));
    }
    let wv = DMatrix::from_column_slice(n, 1, w);
    Ok(map
        .q
        .iter()
        .zip(lambda)
        .map(|(q, l)| l * (wv.transpose() * q * &wv)[0])
        .sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LambdaBlockType {
    /// `{0}^dim`.
    Eq,
    /// `R_-^dim`.
    Ineq,
    /// `dim / 2` scalar complementarity pairs laid out as `(phi_1, psi_1, ...)`.
    Veccomp,
    /// One SOC complementarity pair of cone dimension `dim / 2`, `x` then `y`.
    Soccomp,
    /// One second-order cone of dimension `dim`.
    Soc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LambdaBlockSpec {
    #[serde(rename = "type")]
    pub kind: LambdaBlockType,
    pub dim: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LambdaStructure {
    pub blocks: Vec<LambdaBlockSpec>,
}

impl LambdaStructure {
    pub fn total_dim(&self) -> usize {
        self.blocks.iter().map(|b| b.dim).sum()
    }
}

/// A constraint block over coordinates of `P = (F, G, H)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BlockKind {
    /// `P_c = 0`.
    Eq,
    /// `P_c <= 0`.
    Ineq,
    /// `P_c in K` of dimension `m`.
    Soc(usize),
    /// `(P_x, P_y) in Omega` of cone dimension `m`.
    Comp(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub kind: BlockKind,
    /// Indices into `P`; for `Comp(m)` the first `m` are `x`, the rest `y`.
    pub coords: Vec<usize>,
    /// `lambda_structure` entry index, or `entries + i` for the `i`-th SOC pair of `(G, H)`.
    pub group: usize,
    /// True for the SOC pairs built from `(G, H)`.
    pub from_cone: bool,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    pub name: String,
    pub n: usize,
    pub f: MapSpec,
    pub g: MapSpec,
    pub h: MapSpec,
    pub lambda_structure: LambdaStructure,
    pub soc_dims: Vec<usize>,
    pub z_star: Vec<f64>,
}

/// Active index sets at a point (indices count within each kind).
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ActiveIndexSets {
    pub i_g: Vec<usize>,
    pub i_phi: Vec<usize>,
    pub i_psi: Vec<usize>,
}

/// Distance-based and natural residuals of the system at a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub distance: f64,
    pub natural: f64,
}

impl ProblemInstance {
    pub fn l(&self) -> usize {
        self.f.out_dim()
    }

    pub fn cone_dim(&self) -> usize {
        self.soc_dims.iter().sum()
    }

    pub fn p_dim(&self) -> usize {
        self.l() + 2 * self.cone_dim()
    }

    /// Constraint blocks in a fixed order: `Lambda` entries, then SOC pairs.
    pub fn blocks(&self) -> Vec<Block> {
        let mut out = Vec::new();
        let mut off = 0;
        for (gi, spec) in self.lambda_structure.blocks.iter().enumerate() {
            match spec.kind {
                LambdaBlockType::Eq | LambdaBlockType::Ineq => {
                    let (kind, tag) = if spec.kind == LambdaBlockType::Eq {
                        (BlockKind::Eq, "eq")
                    } else {
                        (BlockKind::Ineq, "ineq")
                    };
                    for i in 0..spec.dim {
                        out.push(Block {
                            kind,
                            coords: vec![off + i],
                            group: gi,
                            from_cone: false,
                            name: format!("F[{}] {tag}", off + i),
                        });
                    }
                }
                LambdaBlockType::Veccomp => {
                    for i in 0..spec.dim / 2 {
                        let c = off + 2 * i;
                        out.push(Block {
                            kind: BlockKind::Comp(1),
                            coords: vec![c, c + 1],
                            group: gi,
                            from_cone: false,
                            name: format!("F[{c},{}] veccomp", c + 1),
                        });
                    }
                }
                LambdaBlockType::Soccomp => {
                    let m = spec.dim / 2;
                    out.push(Block {
                        kind: BlockKind::Comp(m),
                        coords: (off..off + spec.dim).collect(),
                        group: gi,
                        from_cone: false,
                        name: format!("F[{}..{}] soccomp", off, off + spec.dim),
                    });
                }
                LambdaBlockType::Soc => out.push(Block {
                    kind: BlockKind::Soc(spec.dim),
                    coords: (off..off + spec.dim).collect(),
                    group: gi,
                    from_cone: false,
                    name: format!("F[{}..{}] soc", off, off + spec.dim),
                }),
            }
            off += spec.dim;
        }
        let l = self.l();
        let mc = self.cone_dim();
        let mut coff = 0;
        let base = self.lambda_structure.blocks.len();
        for (i, &m) in self.soc_dims.iter().enumerate() {
            let mut coords: Vec<usize> = (l + coff..l + coff + m).collect();
            coords.extend(l + mc + coff..l + mc + coff + m);
            out.push(Block {
                kind: BlockKind::Comp(m),
                coords,
                group: base + i,
                from_cone: true,
                name: format!("SOC pair {i} (m={m})"),
            });
            coff += m;
        }
        out
    }

    /// Number of partition groups.
    pub fn group_count(&self) -> usize {
        self.lambda_structure.blocks.len() + self.soc_dims.len()
    }

    /// `P(z)` and its Jacobian.
    pub fn eval_p(&self, z: &[f64]) -> Result<(Vec<f64>, DMatrix<f64>)> {
        let (fv, fj) = self.f.eval(z)?;
        let (gv, gj) = self.g.eval(z)?;
        let (hv, hj) = self.h.eval(z)?;
        let mut v = fv;
        v.extend(gv);
        v.extend(hv);
        let rows = fj.nrows() + gj.nrows() + hj.nrows();
        let mut j = DMatrix::zeros(rows, self.n);
        j.rows_mut(0, fj.nrows()).copy_from(&fj);
        j.rows_mut(fj.nrows(), gj.nrows()).copy_from(&gj);
        j.rows_mut(fj.nrows() + gj.nrows(), hj.nrows()).copy_from(&hj);
        Ok((v, j))
    }

    /// Hessians of every coordinate of `P`.
    pub fn p_hessians(&self) -> Vec<DMatrix<f64>> {
        let mut out = Vec::with_capacity(self.p_dim());
        for map in [&self.f, &self.g, &self.h] {
            for i in 0..map.out_dim() {
                out.push(map.hessian(i));
            }
        }
        out
    }

    /// True when the coordinates `rows` of `P` are all affine.
    pub fn rows_affine(&self, rows: &[usize]) -> bool {
        let l = self.l();
        let mc = self.cone_dim();
        rows.iter().all(|&r| {
            if r < l {
                self.f.row_is_affine(r)
            } else if r < l + mc {
                self.g.row_is_affine(r - l)
            } else {
                self.h.row_is_affine(r - l - mc)
            }
        })
    }

    /// Active inequality and complementarity indices at `z`.
    pub fn active_sets(&self, z: &[f64], tol: f64) -> Result<ActiveIndexSets> {
        let (fv, _) = self.f.eval(z)?;
        let mut out = ActiveIndexSets::default();
        let mut off = 0;
        let mut gi = 0;
        let mut ci = 0;
        for spec in &self.lambda_structure.blocks {
            match spec.kind {
                LambdaBlockType::Ineq => {
                    for i in 0..spec.dim {
                        if fv[off + i].abs() <= tol {
                            out.i_g.push(gi);
                        }
                        gi += 1;
                    }
                }
                LambdaBlockType::Veccomp => {
                    for i in 0..spec.dim / 2 {
                        if fv[off + 2 * i].abs() <= tol {
                            out.i_phi.push(ci);
                        }
                        if fv[off + 2 * i + 1].abs() <= tol {
                            out.i_psi.push(ci);
                        }
                        ci += 1;
                    }
                }
                _ => {}
            }
            off += spec.dim;
        }
        Ok(out)
    }
}

/// Per-block residual contributions `(distance, natural)` at `P`.
pub fn block_residual(kind: BlockKind, p: &[f64]) -> (f64, f64) {
    match kind {
        BlockKind::Eq => (p[0].abs(), p[0].abs()),
        BlockKind::Ineq => (p[0].max(0.0), p[0].max(0.0)),
        BlockKind::Soc(_) => {
            let d = norm(&crate::linalg::sub(p, &project_soc(p)));
            (d, d)
        }
        BlockKind::Comp(1) => (distance_to_theta(p[0], p[1]), p[0].min(p[1]).abs()),
        BlockKind::Comp(m) => {
            let (x, y) = p.split_at(m);
            let nat = norm(&natural_residual(x, y));
            (distance_to_omega(x, y).upper, nat)
        }
    }
}

/// Residuals of the system at `z`, summed over blocks.
pub fn residual(instance: &ProblemInstance, z: &[f64]) -> Result<Residual> {
    let (p, _) = instance.eval_p(z)?;
    let mut r = Residual {
        distance: 0.0,
        natural: 0.0,
    };
    for b in instance.blocks() {
        let pb: Vec<f64> = b.coords.iter().map(|&c| p[c]).collect();
        let (d, nat) = block_residual(b.kind, &pb);
        r.distance += d;
        r.natural += nat;
    }
    Ok(r)
}

fn schema(field: &str, message: impl Into<String>) -> LoadError {
    LoadError::Schema {
        field: field.to_string(),
        message: message.into(),
    }
}

fn field<'a>(obj: &'a Value, key: &str, path: &str) -> std::result::Result<&'a Value, LoadError> {
    obj.get(key)
        .ok_or_else(|| schema(path, "missing required field"))
}

fn as_f64(v: &Value, path: &str) -> std::result::Result<f64, LoadError> {
    v.as_f64().ok_or_else(|| schema(path, "expected a number"))
}

fn as_vec(v: &Value, path: &str) -> std::result::Result<Vec<f64>, LoadError> {
    let arr = v.as_array().ok_or_else(|| schema(path, "expected an array of numbers"))?;
    arr.iter()
        .enumerate()
        .map(|(i, x)| as_f64(x, &format!("{path}[{i}]")))
        .collect()
}

fn as_usize(v: &Value, path: &str) -> std::result::Result<usize, LoadError> {
    v.as_u64()
        .map(|x| x as usize)
        .ok_or_else(|| schema(path, "expected a non-negative integer"))
}

fn as_matrix(v: &Value, ncols: usize, path: &str) -> std::result::Result<DMatrix<f64>, LoadError> {
    let arr = v.as_array().ok_or_else(|| schema(path, "expected an array of rows"))?;
    let mut rows = Vec::with_capacity(arr.len());
    for (i, r) in arr.iter().enumerate() {
        let row = as_vec(r, &format!("{path}[{i}]"))?;
        if row.len() != ncols {
            return Err(LoadError::DimMismatch(format!(
                "{path}[{i}] has {} entries, expected {ncols}",
                row.len()
            )));
        }
        rows.push(row);
    }
    Ok(crate::linalg::rows_to_matrix(&rows, ncols))
}

fn parse_map(v: &Value, n: usize, path: &str) -> std::result::Result<MapSpec, LoadError> {
    let kind = field(v, "kind", &format!("{path}.kind"))?;
    let kind = match kind.as_str() {
        Some("affine") => MapKind::Affine,
        Some("quadratic") => MapKind::Quadratic,
        _ => return Err(schema(&format!("{path}.kind"), "expected \"affine\" or \"quadratic\"")),
    };
    let a = as_matrix(field(v, "A", &format!("{path}.A"))?, n, &format!("{path}.A"))?;
    let b = as_vec(field(v, "b", &format!("{path}.b"))?, &format!("{path}.b"))?;
    if a.nrows() != b.len() {
        return Err(LoadError::DimMismatch(format!(
            "{path}.A has {} rows but {path}.b has {} entries",
            a.nrows(),
            b.len()
        )));
    }
    match kind {
        MapKind::Affine => {
            if v.get("Q").is_some() {
                return Err(schema(&format!("{path}.Q"), "affine maps take no Q"));
            }
            Ok(MapSpec::affine(a, b))
        }
        MapKind::Quadratic => {
            let qv = field(v, "Q", &format!("{path}.Q"))?;
            let qa = qv
                .as_array()
                .ok_or_else(|| schema(&format!("{path}.Q"), "expected an array of matrices"))?;
            if qa.len() != b.len() {
                return Err(LoadError::DimMismatch(format!(
                    "{path}.Q has {} matrices, expected {}",
                    qa.len(),
                    b.len()
                )));
            }
            let mut q = Vec::with_capacity(qa.len());
            for (i, qi) in qa.iter().enumerate() {
                let p = format!("{path}.Q[{i}]");
                let m = as_matrix(qi, n, &p)?;
                if m.nrows() != n {
                    return Err(LoadError::DimMismatch(format!("{p} must be {n}x{n}")));
                }
                if (&m - m.transpose()).amax() > 1e-12 * m.amax().max(1.0) {
                    return Err(schema(&p, "matrix is not symmetric"));
                }
                q.push(m);
            }
            Ok(MapSpec::quadratic(q, a, b))
        }
    }
}

/// Parses and validates an instance document.
pub fn load_instance(bytes: &[u8]) -> std::result::Result<ProblemInstance, LoadError> {
    let doc: Value = serde_json::from_slice(bytes).map_err(|e| LoadError::Json(e.to_string()))?;
    if !doc.is_object() {
        return Err(schema("$", "expected a JSON object"));
    }
    let name = field(&doc, "name", "name")?
        .as_str()
        .ok_or_else(|| schema("name", "expected a string"))?
        .to_string();
    let n = as_usize(field(&doc, "n", "n")?, "n")?;
    if n == 0 {
        return Err(schema("n", "must be at least 1"));
    }
    let maps = field(&doc, "maps", "maps")?;
    let f = parse_map(field(maps, "F", "maps.F")?, n, "maps.F")?;
    let g = parse_map(field(maps, "G", "maps.G")?, n, "maps.G")?;
    let h = parse_map(field(maps, "H", "maps.H")?, n, "maps.H")?;
    let ls = field(&doc, "lambda_structure", "lambda_structure")?;
    let ls: LambdaStructure = serde_json::from_value(ls.clone())
        .map_err(|e| schema("lambda_structure", e.to_string()))?;
    for (i, b) in ls.blocks.iter().enumerate() {
        let p = format!("lambda_structure[{i}].dim");
        if b.dim == 0 {
            return Err(schema(&p, "must be positive"));
        }
        if matches!(b.kind, LambdaBlockType::Veccomp | LambdaBlockType::Soccomp) && b.dim % 2 == 1 {
            return Err(schema(&p, "complementarity blocks need an even dimension"));
        }
    }
    let sd = field(&doc, "soc_dims", "soc_dims")?;
    let soc_dims: Vec<usize> = sd
        .as_array()
        .ok_or_else(|| schema("soc_dims", "expected an array of integers"))?
        .iter()
        .enumerate()
        .map(|(i, v)| as_usize(v, &format!("soc_dims[{i}]")))
        .collect::<std::result::Result<_, _>>()?;
    if let Some(i) = soc_dims.iter().position(|m| *m == 0) {
        return Err(schema(&format!("soc_dims[{i}]"), "cone dimension must be positive"));
    }
    let z_star = as_vec(field(&doc, "z_star", "z_star")?, "z_star")?;
    if z_star.len() != n {
        return Err(LoadError::DimMismatch(format!(
            "z_star has {} entries, expected n = {n}",
            z_star.len()
        )));
    }
    if ls.total_dim() != f.out_dim() {
        return Err(LoadError::DimMismatch(format!(
            "lambda_structure covers {} coordinates but F has {}",
            ls.total_dim(),
            f.out_dim()
        )));
    }
    let mc: usize = soc_dims.iter().sum();
    if mc != g.out_dim() || mc != h.out_dim() {
        return Err(LoadError::DimMismatch(format!(
            "soc_dims sum to {mc} but G has {} and H has {} outputs",
            g.out_dim(),
            h.out_dim()
        )));
    }
    let inst = ProblemInstance {
        name,
        n,
        f,
        g,
        h,
        lambda_structure: ls,
        soc_dims,
        z_star,
    };
    let r = residual(&inst, &inst.z_star).map_err(|e| LoadError::DimMismatch(e.to_string()))?;
    if r.distance > LOAD_FEASIBILITY_TOL {
        return Err(LoadError::Infeasible {
            residual: r.distance,
            limit: LOAD_FEASIBILITY_TOL,
        });
    }
    Ok(inst)
}

fn matrix_json(m: &DMatrix<f64>) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| Value::Array((0..m.ncols()).map(|j| json!(m[(i, j)])).collect()))
            .collect(),
    )
}

fn map_json(m: &MapSpec) -> Value {
    let mut v = json!({
        "kind": m.kind,
        "A": matrix_json(&m.a),
        "b": m.b,
    });
    if m.kind == MapKind::Quadratic {
        v["Q"] = Value::Array(m.q.iter().map(matrix_json).collect());
    }
    v
}

/// Serialises an instance in the load format.
pub fn instance_to_json(inst: &ProblemInstance) -> Value {
    json!({
        "name": inst.name,
        "n": inst.n,
        "maps": {"F": map_json(&inst.f), "G": map_json(&inst.g), "H": map_json(&inst.h)},
        "lambda_structure": inst.lambda_structure,
        "soc_dims": inst.soc_dims,
        "z_star": inst.z_star,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cone_theta() -> &'static str {
        r#"{"name": "ex41", "n": 2,
            "maps": {"F": {"kind": "affine", "A": [[1,0],[0,1],[1,0],[0,1]], "b": [0,0,0,0]},
                     "G": {"kind": "affine", "A": [], "b": []},
                     "H": {"kind": "affine", "A": [], "b": []}},
            "lambda_structure": [{"type": "soc", "dim": 2}, {"type": "veccomp", "dim": 2}],
            "soc_dims": [], "z_star": [0, 0]}"#
    }

    #[test]
    fn loads_cone_theta() {
        let inst = load_instance(cone_theta().as_bytes()).unwrap();
        assert_eq!(inst.p_dim(), 4);
        assert_eq!(residual(&inst, &[0.0, 0.0]).unwrap().distance, 0.0);
        let blocks = inst.blocks();
        assert_eq!(blocks.len(), 2);
        assert_eq!(blocks[0].kind, BlockKind::Soc(2));
        assert_eq!(blocks[1].kind, BlockKind::Comp(1));
        let back = instance_to_json(&inst).to_string();
        assert_eq!(load_instance(back.as_bytes()).unwrap(), inst);
    }

    #[test]
    fn cone_theta_residuals() {
        let inst = load_instance(cone_theta().as_bytes()).unwrap();
        let t = 0.3;
        assert_eq!(residual(&inst, &[t, 0.0]).unwrap().distance, 0.0);
        // (0, t) lies in the complementarity set, and its distance to K is t / sqrt 2.
        let r = residual(&inst, &[0.0, t]).unwrap();
        assert!((r.distance - t / 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let doc = cone_theta().replace(r#""soc_dims": []"#, r#""soc_dims": [2]"#);
        assert!(matches!(load_instance(doc.as_bytes()), Err(LoadError::DimMismatch(_))));
        let doc = cone_theta().replace(r#""z_star": [0, 0]"#, r#""z_star": [0, 1]"#);
        assert!(matches!(load_instance(doc.as_bytes()), Err(LoadError::Infeasible { .. })));
        let doc = cone_theta().replace(r#""kind": "affine", "A": [[1"#, r#""kind": "cubic", "A": [[1"#);
        match load_instance(doc.as_bytes()) {
            Err(LoadError::Schema { field, .. }) => assert_eq!(field, "maps.F.kind"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn map_evaluation_examples() {
        let id = MapSpec::affine(DMatrix::identity(2, 2), vec![0.0, 0.0]);
        let (v, j) = eval_map(&id, &[0.4, -1.0]).unwrap();
        assert_eq!(v, vec![0.4, -1.0]);
        assert_eq!(j, DMatrix::identity(2, 2));

        let q = MapSpec::quadratic(
            vec![DMatrix::identity(2, 2) * 2.0],
            DMatrix::zeros(1, 2),
            vec![0.0],
        );
        let (v, j) = eval_map(&q, &[1.0, 1.0]).unwrap();
        assert_eq!(v, vec![2.0]);
        assert_eq!(j, DMatrix::from_row_slice(1, 2, &[2.0, 2.0]));
        assert_eq!(eval_hessian_form(&q, &[1.0], &[1.0, 0.0], &[0.0, 0.0]).unwrap(), 2.0);

        // g1 = z1 - z2^2.
        let g1 = MapSpec::quadratic(
            vec![DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, -2.0])],
            DMatrix::from_row_slice(1, 2, &[1.0, 0.0]),
            vec![0.0],
        );
        let (v, j) = eval_map(&g1, &[0.0, 0.0]).unwrap();
        assert_eq!(v, vec![0.0]);
        assert_eq!(j, DMatrix::from_row_slice(1, 2, &[1.0, 0.0]));
        assert_eq!(eval_hessian_form(&g1, &[1.0], &[0.0, 1.0], &[0.0, 0.0]).unwrap(), -2.0);
        assert_eq!(eval_hessian_form(&id, &[1.0, 2.0], &[1.0, 1.0], &[0.0, 0.0]).unwrap(), 0.0);
        assert!(eval_map(&id, &[1.0]).is_err());
    }
}
