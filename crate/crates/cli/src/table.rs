//! Plain-text renderings for `--pretty`.

use soccp::eb_probe::ProbeReport;
use soccp::report::{Classification, ConesQuery, Report};
use soccp::CqVerdict;
use std::fmt::Write;

fn vec_str(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.6}")).collect();
    format!("({})", parts.join(", "))
}

pub fn classification(c: &Classification) -> String {
    let mut s = format!("{}  z* = {}\n", c.instance, vec_str(&c.z_star));
    for b in &c.blocks {
        let _ = writeln!(s, "  {:<28} {:<22} {}", b.name, b.case, vec_str(&b.value));
    }
    s
}

pub fn cones(q: &ConesQuery) -> String {
    let mut s = format!(
        "{}  w = {}  linearized: {}\n",
        q.instance,
        vec_str(&q.w),
        q.linearized
    );
    for b in &q.blocks {
        let _ = writeln!(
            s,
            "  {:<28} {:<22} q = {}  tangent: {}",
            b.name,
            b.case,
            vec_str(&b.direction),
            b.tangent
        );
        for p in &b.pieces {
            let _ = writeln!(s, "      piece: {}", p.label);
        }
        for f in &b.families {
            let _ = writeln!(s, "      family: {f}");
        }
    }
    s
}

pub fn verdicts(instance: &str, vs: &[CqVerdict]) -> String {
    let mut s = format!("{instance}\n");
    for v in vs {
        let _ = write!(
            s,
            "  {:<34} {:<20} samples {:>5}  pieces {:>5}",
            v.condition,
            format!("{:?}", v.status),
            v.samples_used,
            v.pieces_examined
        );
        if let Some(t) = v.wall_time_ms {
            let _ = write!(s, "  {t:.1} ms");
        }
        s.push('\n');
        if let Some(c) = &v.certificate {
            if let Some(w) = &c.w {
                let _ = writeln!(s, "      w      = {}", vec_str(w));
            }
            if let Some(l) = &c.lambda {
                let _ = writeln!(s, "      lambda = {}", vec_str(l));
            }
        }
        if let Some(n) = &v.note {
            let _ = writeln!(s, "      note: {n}");
        }
    }
    s
}

pub fn probe(r: &ProbeReport) -> String {
    let mut s = format!("{}  trend: {:?}\n", r.instance, r.trend);
    let _ = writeln!(
        s,
        "  {:>8} {:>14} {:>14} {:>8} {:>7} {:>6}",
        "radius", "kappa_hat", "kappa_natural", "skipped", "failed", "flags"
    );
    for p in &r.per_radius {
        let _ = writeln!(
            s,
            "  {:>8.0e} {:>14.6} {:>14.6} {:>8} {:>7} {:>6}",
            p.radius, p.kappa_hat, p.kappa_hat_natural, p.n_feasible_skipped, p.n_failed, p.n_bracket_flags
        );
    }
    if !r.growth_per_decade.is_empty() {
        let g: Vec<String> = r.growth_per_decade.iter().map(|g| format!("{g:.3}")).collect();
        let _ = writeln!(s, "  growth per decade: {}", g.join(", "));
    }
    s
}

pub fn report(r: &Report) -> String {
    let mut s = String::new();
    for cv in &r.results {
        let vs: Vec<CqVerdict> = cv.verdicts.iter().map(|j| j.verdict.clone()).collect();
        s.push_str(&verdicts(&cv.instance, &vs));
        s.push_str(&probe(&cv.probe));
        let _ = writeln!(s, "  consistent: {}", cv.consistent);
        for i in &cv.inconsistencies {
            let _ = writeln!(s, "  INCONSISTENT: {i}");
        }
        s.push('\n');
    }
    s
}
