//! Feasibility of conic systems `{x : Ex = 0, Fx <= 0, Sx < 0, M x in K}`
//! by linear programming, with second-order constraints handled through
//! outer polyhedral approximations refined by tangent cuts.

use crate::cone_rep::ConePiece;
use crate::linalg::{dot, matrix_rows, norm, row_space, rows_to_matrix};
use microlp::{ComparisonOp, OptimizationDirection, Problem, SolveOutcome, Variable};
use nalgebra::DMatrix;

/// Largest number of cut rounds before giving up.
const MAX_CUT_ROUNDS: usize = 60;
/// Strict constraints need a margin above this value.
const STRICT_MARGIN: f64 = 1e-9;
/// Bound on variables outside the normalised support.
const FREE_BOUND: f64 = 1e6;

#[derive(Debug, Clone, PartialEq)]
pub struct ConicSystem {
    pub n: usize,
    pub eq: Vec<Vec<f64>>,
    pub le: Vec<Vec<f64>>,
    pub lt: Vec<Vec<f64>>,
    pub soc: Vec<DMatrix<f64>>,
    pub soc_strict: Vec<DMatrix<f64>>,
}

impl ConicSystem {
    pub fn from_piece(p: &ConePiece) -> Self {
        Self {
            n: p.dim,
            eq: matrix_rows(&p.eq_rows),
            le: matrix_rows(&p.ineq_rows),
            lt: matrix_rows(&p.strict_rows),
            soc: p.soc.clone(),
            soc_strict: p.soc_strict.clone(),
        }
    }

    fn has_strict(&self) -> bool {
        !self.lt.is_empty() || !self.soc_strict.is_empty()
    }

    /// Residual check of a candidate (strict rows need a positive margin).
    pub fn satisfied_by(&self, x: &[f64], tol: f64) -> bool {
        let s = tol * norm(x).max(1.0);
        self.eq.iter().all(|r| dot(r, x).abs() <= s)
            && self.le.iter().all(|r| dot(r, x) <= s)
            && self.lt.iter().all(|r| dot(r, x) < 0.0)
            && self.soc.iter().all(|m| soc_slack(m, x) >= -s)
            && self.soc_strict.iter().all(|m| soc_slack(m, x) > 0.0)
    }
}

fn soc_slack(m: &DMatrix<f64>, x: &[f64]) -> f64 {
    let y = crate::linalg::mat_vec(m, x);
    y[0] - norm(&y[1..])
}

#[derive(Debug, Clone, PartialEq)]
pub enum Feasibility {
    Found(Vec<f64>),
    Infeasible,
    /// The cut loop did not settle within its budget, or the solver failed.
    Undecided,
}

impl Feasibility {
    pub fn found(&self) -> Option<&[f64]> {
        match self {
            Feasibility::Found(x) => Some(x),
            _ => None,
        }
    }
}

/// A linear cut `row . x + slack_coeff * t >= 0` on the cone constraint.
#[derive(Clone)]
struct Cut {
    row: Vec<f64>,
    strict: bool,
}

fn initial_cuts(m: &DMatrix<f64>, strict: bool) -> Vec<Cut> {
    let rows = matrix_rows(m);
    let mut cuts = vec![Cut {
        row: rows[0].clone(),
        strict,
    }];
    for r in rows.iter().skip(1) {
        for sg in [1.0, -1.0] {
            cuts.push(Cut {
                row: rows[0].iter().zip(r).map(|(a, b)| a - sg * b).collect(),
                strict,
            });
        }
    }
    cuts
}

fn tangent_cut(m: &DMatrix<f64>, x: &[f64], strict: bool) -> Option<Cut> {
    let y = crate::linalg::mat_vec(m, x);
    let t = norm(&y[1..]);
    if t == 0.0 {
        return None;
    }
    let rows = matrix_rows(m);
    let mut row = rows[0].clone();
    for (i, r) in rows.iter().enumerate().skip(1) {
        let c = y[i] / t;
        for (o, v) in row.iter_mut().zip(r) {
            *o -= c * v;
        }
    }
    Some(Cut { row, strict })
}

struct LpSpec<'a> {
    sys: &'a ConicSystem,
    bounds: Vec<(f64, f64)>,
    objective: Vec<f64>,
    with_margin: bool,
}

/// Runs the cut loop; returns the point and the margin variable.
fn cut_loop(spec: &LpSpec) -> std::result::Result<(Vec<f64>, f64), Feasibility> {
    let sys = spec.sys;
    let eq = if sys.eq.is_empty() {
        Vec::new()
    } else {
        row_space(&rows_to_matrix(&sys.eq, sys.n), 1e-11)
    };
    let mut cuts: Vec<(usize, Cut)> = Vec::new();
    for (k, m) in sys.soc.iter().enumerate() {
        cuts.extend(initial_cuts(m, false).into_iter().map(|c| (k, c)));
    }
    let off = sys.soc.len();
    for (k, m) in sys.soc_strict.iter().enumerate() {
        cuts.extend(initial_cuts(m, true).into_iter().map(|c| (off + k, c)));
    }
    for _ in 0..MAX_CUT_ROUNDS {
        let mut lp = Problem::new(OptimizationDirection::Maximize);
        let vars: Vec<Variable> = (0..sys.n)
            .map(|i| lp.add_var(spec.objective[i], spec.bounds[i]))
            .collect();
        let t = spec.with_margin.then(|| lp.add_var(1.0, (0.0, 1.0)));
        let expr = |row: &[f64]| -> Vec<(Variable, f64)> {
            row.iter()
                .enumerate()
                .filter(|(_, c)| **c != 0.0)
                .map(|(i, c)| (vars[i], *c))
                .collect()
        };
        for r in &eq {
            lp.add_constraint(expr(r), ComparisonOp::Eq, 0.0);
        }
        for r in &sys.le {
            lp.add_constraint(expr(r), ComparisonOp::Le, 0.0);
        }
        for r in &sys.lt {
            let mut e = expr(r);
            if let Some(t) = t {
                e.push((t, 1.0));
            }
            lp.add_constraint(e, ComparisonOp::Le, 0.0);
        }
        for (_, c) in &cuts {
            let mut e = expr(&c.row);
            if c.strict {
                if let Some(t) = t {
                    e.push((t, -1.0));
                }
            }
            lp.add_constraint(e, ComparisonOp::Ge, 0.0);
        }
        let sol = match lp.solve() {
            Ok(SolveOutcome::Solution(s)) => s,
            Ok(SolveOutcome::Interrupted(_)) => return Err(Feasibility::Undecided),
            Err(microlp::Error::Infeasible) => return Err(Feasibility::Infeasible),
            Err(_) => return Err(Feasibility::Undecided),
        };
        let x: Vec<f64> = vars.iter().map(|v| sol.var_value(*v)).collect();
        let margin = t.map(|t| sol.var_value(t)).unwrap_or(0.0);
        if spec.with_margin && margin <= STRICT_MARGIN {
            return Err(Feasibility::Infeasible);
        }
        let scale = norm(&x).max(1.0);
        let mut added = false;
        for (k, m) in sys.soc.iter().enumerate() {
            if soc_slack(m, &x) < -1e-10 * scale {
                if let Some(c) = tangent_cut(m, &x, false) {
                    cuts.push((k, c));
                    added = true;
                }
            }
        }
        for (k, m) in sys.soc_strict.iter().enumerate() {
            if soc_slack(m, &x) < margin - 1e-10 * scale {
                if let Some(c) = tangent_cut(m, &x, true) {
                    cuts.push((off + k, c));
                    added = true;
                }
            }
        }
        if !added {
            return Ok((x, margin));
        }
    }
    Err(Feasibility::Undecided)
}

/// Looks for `x` in the system with `x_j != 0` for some `j` in `support`.
///
/// Each `j` and sign is tried with `x_j = +-1` and `|x_i| <= 1` on the
/// support. An empty support is vacuously infeasible.
pub fn find_nonzero(sys: &ConicSystem, support: &[usize]) -> Feasibility {
    let mut undecided = false;
    for &j in support {
        for sign in [1.0, -1.0] {
            let mut bounds = vec![(-FREE_BOUND, FREE_BOUND); sys.n];
            for &i in support {
                bounds[i] = (-1.0, 1.0);
            }
            bounds[j] = (sign, sign);
            let spec = LpSpec {
                sys,
                bounds,
                objective: vec![0.0; sys.n],
                with_margin: sys.has_strict(),
            };
            match cut_loop(&spec) {
                Ok((x, _)) => return Feasibility::Found(x),
                Err(Feasibility::Undecided) => undecided = true,
                Err(_) => {}
            }
        }
    }
    if undecided {
        Feasibility::Undecided
    } else {
        Feasibility::Infeasible
    }
}

/// Maximises `c . x` over the closure of the system intersected with the box `|x_i| <= bound`.
pub fn maximize(sys: &ConicSystem, c: &[f64], bound: f64) -> Option<Vec<f64>> {
    let relaxed = ConicSystem {
        n: sys.n,
        eq: sys.eq.clone(),
        le: sys.le.iter().chain(&sys.lt).cloned().collect(),
        lt: Vec::new(),
        soc: sys.soc.iter().chain(&sys.soc_strict).cloned().collect(),
        soc_strict: Vec::new(),
    };
    let spec = LpSpec {
        sys: &relaxed,
        bounds: vec![(-bound, bound); sys.n],
        objective: c.to_vec(),
        with_margin: false,
    };
    cut_loop(&spec).ok().map(|(x, _)| x)
}
