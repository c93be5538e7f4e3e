//! Regression table of verdicts and probe estimates over the bundled corpus.

use soccp::cq_checker::{run_check, verify_certificate};
use soccp::eb_probe::estimate_kappa;
use soccp::{corpus, CheckConfig, CqKind, CqStatus, ProbeConfig, Trend};

/// One letter per verdict of `run_check(All)`:
/// V violated, C certified, S sampled, I inconclusive, N not implemented, A not applicable.
const EXPECTED: &[(&str, &str)] = &[
    ("cone_theta", "VCCCCCCNNVCAAAAAAAC"),
    ("second_order_origin", "VVAVVVNNVCAVVNVCCC"),
    ("square_ineq", "VVAVVVNNVVAVVNVIII"),
    ("affine_polyhedral", "CCCVCCNNVCCVCNVCCC"),
    ("cone_theta_soc", "VCCCCCCNNVCCCCNVCCC"),
    ("soc3_case4_violation", "VVCCCCNNVCCCCNVCCV"),
    ("soc3_interior", "CCCCCCNNVCCCCNVCCC"),
    ("soc3_origin", "VCCCCCNNVCCCCNVCCC"),
    ("split_example", "VVCCVVVNNVVCVVNVCCC"),
    ("mpec_biactive", "CCCCCCNNVCCCCNVCCC"),
];

fn letter(s: CqStatus) -> char {
    match s {
        CqStatus::Violated => 'V',
        CqStatus::Certified => 'C',
        CqStatus::InconclusiveSampled => 'S',
        CqStatus::Inconclusive => 'I',
        CqStatus::NotImplemented => 'N',
        CqStatus::NotApplicable => 'A',
    }
}

#[test]
fn table_covers_the_corpus() {
    let names: Vec<&str> = corpus::CORPUS.iter().map(|e| e.name).collect();
    let table: Vec<&str> = EXPECTED.iter().map(|(n, _)| *n).collect();
    assert_eq!(names, table);
}

#[test]
fn verdicts_match_the_table_and_certificates_verify() {
    let cfg = CheckConfig::default();
    for (name, want) in EXPECTED {
        let e = corpus::entry(name).unwrap();
        let inst = corpus::load(name).unwrap();
        let vs = run_check(&inst, CqKind::All, e.partition, &cfg).unwrap();
        let got: String = vs.iter().map(|v| letter(v.status)).collect();
        assert_eq!(&got, want, "{name}");
        for v in &vs {
            let first_order = v.condition == "NNAMCQ" || v.condition == "FOSCMS";
            if v.status == CqStatus::Violated && first_order {
                let cert = v.certificate.as_ref().unwrap_or_else(|| panic!("{name}: {} without certificate", v.condition));
                assert!(verify_certificate(&inst, cert, 1e-8), "{name}: {}", v.condition);
            }
        }
    }
}

#[test]
fn probe_estimates() {
    let cfg = ProbeConfig::default();
    let expect = [
        ("cone_theta", 1.3992, Trend::Bounded),
        ("second_order_origin", 1.0, Trend::Bounded),
        ("affine_polyhedral", 1.0, Trend::Bounded),
        ("soc3_case4_violation", std::f64::consts::FRAC_1_SQRT_2, Trend::Bounded),
    ];
    for (name, kappa, trend) in expect {
        let r = estimate_kappa(&corpus::load(name).unwrap(), &cfg).unwrap();
        assert_eq!(r.trend, trend, "{name}");
        for p in &r.per_radius {
            assert!((p.kappa_hat - kappa).abs() < 1e-3 * kappa, "{name}: {}", p.kappa_hat);
        }
    }
    let r = estimate_kappa(&corpus::load("square_ineq").unwrap(), &cfg).unwrap();
    assert_eq!(r.trend, Trend::Diverging);
    assert!(r.growth_per_decade.iter().all(|g| *g > 9.9), "{:?}", r.growth_per_decade);
}
