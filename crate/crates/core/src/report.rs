//! Documents emitted by the command-line front end: block cases, cone
//! queries and combined check + probe reports.

use crate::block_cones::{self, describe};
use crate::comp_set::{classify_pair, CompCase};
use crate::cone_rep::ConePiece;
use crate::corpus::CORPUS;
use crate::cq_checker::CheckConfig;
use crate::eb_probe::{cross_validate_with, CrossValidation, ProbeConfig};
use crate::error::{Result, SoccpError};
use crate::linalg::{mat_vec_snapped, matrix_rows};
use crate::problem_model::{load_instance, BlockKind, ProblemInstance};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub check_config: CheckConfig,
    pub probe_config: ProbeConfig,
    pub results: Vec<CrossValidation>,
}

impl Report {
    pub fn consistent(&self) -> bool {
        self.results.iter().all(|r| r.consistent)
    }
}

/// Report for one instance. Wall times are included only when `timing` is set,
/// which keeps the default output reproducible byte for byte.
pub fn build_report(
    inst: &ProblemInstance,
    partition: &[usize],
    check: &CheckConfig,
    probe: &ProbeConfig,
    timing: bool,
) -> Result<Report> {
    Ok(Report {
        check_config: *check,
        probe_config: probe.clone(),
        results: vec![cross_validate_with(inst, check, probe, partition, timing)?],
    })
}

/// Report over every bundled instance, in corpus order.
pub fn corpus_report(check: &CheckConfig, probe: &ProbeConfig, timing: bool) -> Result<Report> {
    let mut results = Vec::with_capacity(CORPUS.len());
    for e in CORPUS {
        let inst = load_instance(e.json.as_bytes())?;
        results.push(cross_validate_with(&inst, check, probe, e.partition, timing)?);
    }
    Ok(Report {
        check_config: *check,
        probe_config: probe.clone(),
        results,
    })
}

/// One block of a `classify` document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockCase {
    pub name: String,
    pub kind: BlockKind,
    pub group: usize,
    pub value: Vec<f64>,
    pub case: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub comp_case: Option<CompCase>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub instance: String,
    pub z_star: Vec<f64>,
    pub blocks: Vec<BlockCase>,
}

/// Case of every block at `z*`.
pub fn classify_instance(inst: &ProblemInstance, tol: f64) -> Result<Classification> {
    let (p, _) = inst.eval_p(&inst.z_star)?;
    let mut blocks = Vec::new();
    for b in inst.blocks() {
        let value: Vec<f64> = b.coords.iter().map(|&c| p[c]).collect();
        let comp_case = match b.kind {
            BlockKind::Comp(m) => Some(classify_pair(&value[..m], &value[m..], tol)?),
            _ => None,
        };
        blocks.push(BlockCase {
            case: describe(b.kind, &value, tol)?,
            name: b.name,
            kind: b.kind,
            group: b.group,
            value,
            comp_case,
        });
    }
    Ok(Classification {
        instance: inst.name.clone(),
        z_star: inst.z_star.clone(),
        blocks,
    })
}

/// A polyhedral piece written out row by row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PieceListing {
    pub label: String,
    /// Rows `e` with `e . lambda = 0`.
    pub eq: Vec<Vec<f64>>,
    /// Rows `f` with `f . lambda <= 0`.
    pub le: Vec<Vec<f64>>,
    /// Rows `s` with `s . lambda < 0`.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub lt: Vec<Vec<f64>>,
    /// Number of `M lambda in K` constraints.
    #[serde(skip_serializing_if = "is_zero")]
    pub soc_constraints: usize,
}

fn is_zero(n: &usize) -> bool {
    *n == 0
}

impl From<&ConePiece> for PieceListing {
    fn from(p: &ConePiece) -> Self {
        Self {
            label: p.label.clone(),
            eq: matrix_rows(&p.eq_rows),
            le: matrix_rows(&p.ineq_rows),
            lt: matrix_rows(&p.strict_rows),
            soc_constraints: p.soc.len() + p.soc_strict.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockCones {
    pub name: String,
    pub case: String,
    /// The block of `grad P(z*) w`.
    pub direction: Vec<f64>,
    pub tangent: bool,
    /// Pieces of the directional normal cone; empty when the direction is not tangent.
    pub pieces: Vec<PieceListing>,
    /// Sphere-parametrised families, by label.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub families: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConesQuery {
    pub instance: String,
    pub w: Vec<f64>,
    /// True when every block direction is tangent, i.e. `w` is a linearized direction.
    pub linearized: bool,
    pub blocks: Vec<BlockCones>,
}

/// Tangent membership and directional normal cones of every block along `grad P(z*) w`.
pub fn cones_query(inst: &ProblemInstance, w: &[f64], tol: f64) -> Result<ConesQuery> {
    if w.len() != inst.n {
        return Err(SoccpError::Dimension(format!(
            "direction has {} entries, expected {}",
            w.len(),
            inst.n
        )));
    }
    let (p, jac) = inst.eval_p(&inst.z_star)?;
    let q = mat_vec_snapped(&jac, w);
    let mut blocks = Vec::new();
    for b in inst.blocks() {
        let pb: Vec<f64> = b.coords.iter().map(|&c| p[c]).collect();
        let qb: Vec<f64> = b.coords.iter().map(|&c| q[c]).collect();
        let tangent = block_cones::tangent_contains(b.kind, &pb, &qb, tol)?;
        let (pieces, families) = if tangent {
            let rep = block_cones::directional_rep(b.kind, &pb, &qb, tol)?;
            (
                rep.pieces.iter().map(PieceListing::from).collect(),
                rep.families.iter().map(|f| f.label.clone()).collect(),
            )
        } else {
            (Vec::new(), Vec::new())
        };
        blocks.push(BlockCones {
            name: b.name,
            case: describe(b.kind, &pb, tol)?,
            direction: qb,
            tangent,
            pieces,
            families,
        });
    }
    Ok(ConesQuery {
        instance: inst.name.clone(),
        w: w.to_vec(),
        linearized: blocks.iter().all(|b| b.tangent),
        blocks,
    })
}
