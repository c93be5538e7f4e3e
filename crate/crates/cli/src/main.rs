//! `soccp`: batch front end over the soccp library.
//!
//! Exit codes: 0 success, 1 violation found (with `--fail-on-violation`),
//! 2 usage error, 3 instance load error.

mod table;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use soccp::cq_checker::run_check;
use soccp::eb_probe::{estimate_kappa_with_rows, SampleRow};
use soccp::problem_model::{load_instance, ProblemInstance};
use soccp::report::{build_report, classify_instance, cones_query, corpus_report, Report};
use soccp::{CheckConfig, CqKind, CqStatus, CqVerdict, ProbeConfig, SoccpError};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "soccp", version, about = "Certify error-bound conditions of SOC complementarity systems")]
struct Cli {
    /// Membership and classification tolerance.
    #[arg(long, global = true, env = "SOCCP_DEFAULT_TOL", default_value_t = 1e-8)]
    tol: f64,
    /// Write the output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Human-readable tables instead of JSON.
    #[arg(long, global = true)]
    pretty: bool,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Case of every constraint block at z*.
    Classify { instance: PathBuf },
    /// Tangent membership and directional normal cones along grad P(z*) w.
    Cones {
        instance: PathBuf,
        /// The direction w in R^n, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        direction: Vec<f64>,
    },
    /// Certify a sufficient condition for a local error bound.
    Check {
        instance: PathBuf,
        #[arg(long, value_enum, default_value_t = Cq::All)]
        cq: Cq,
        #[command(flatten)]
        opts: CheckOpts,
    },
    /// Estimate the error-bound modulus around z* by sampling.
    Probe {
        instance: PathBuf,
        #[command(flatten)]
        opts: ProbeOpts,
        /// Also write every probed point as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Checks, probe and their cross-validation in one document.
    Report {
        /// Instance file; omit with --corpus.
        #[arg(required_unless_present = "corpus", conflicts_with = "corpus")]
        instance: Option<PathBuf>,
        /// Run over the bundled instance corpus.
        #[arg(long)]
        corpus: bool,
        #[command(flatten)]
        opts: CheckOpts,
        #[arg(long, default_value_t = 500)]
        probe_samples: usize,
        #[arg(long, value_delimiter = ',', default_values_t = [1e-1, 1e-2, 1e-3])]
        radii: Vec<f64>,
    },
}

#[derive(Args, Debug)]
struct CheckOpts {
    /// Direction samples per nonpolyhedral pattern.
    #[arg(long, default_value_t = 512)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Groups presumed metrically subregular, for the split check (comma separated).
    #[arg(long, value_delimiter = ',')]
    partition: Vec<usize>,
    /// Record wall times (makes the output run-dependent).
    #[arg(long)]
    timing: bool,
    /// Exit with status 1 when a verdict is Violated.
    #[arg(long)]
    fail_on_violation: bool,
}

#[derive(Args, Debug)]
struct ProbeOpts {
    #[arg(long, value_delimiter = ',', default_values_t = [1e-1, 1e-2, 1e-3])]
    radii: Vec<f64>,
    #[arg(long, default_value_t = 500)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-12)]
    residual_floor: f64,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Cq {
    Nnamcq,
    Foscms,
    Split,
    EqIneq,
    Mpec,
    Final,
    All,
}

impl From<Cq> for CqKind {
    fn from(c: Cq) -> Self {
        match c {
            Cq::Nnamcq => CqKind::Nnamcq,
            Cq::Foscms => CqKind::Foscms,
            Cq::Split => CqKind::Split,
            Cq::EqIneq => CqKind::EqIneq,
            Cq::Mpec => CqKind::Mpec,
            Cq::Final => CqKind::Final,
            Cq::All => CqKind::All,
        }
    }
}

enum Failure {
    Usage(String),
    Load(String),
}

impl From<SoccpError> for Failure {
    fn from(e: SoccpError) -> Self {
        match e {
            SoccpError::Load(l) => Failure::Load(l.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

/// Verdicts of one instance, as printed by `check`.
#[derive(Serialize)]
struct CheckOutput<'a> {
    instance: &'a str,
    verdicts: Vec<CqVerdict>,
}

fn load(path: &Path) -> Result<ProblemInstance, Failure> {
    let bytes = std::fs::read(path).map_err(|e| Failure::Load(format!("{}: {e}", path.display())))?;
    load_instance(&bytes).map_err(|e| Failure::Load(format!("{}: {e}", path.display())))
}

fn check_config(opts: &CheckOpts, tol: f64) -> CheckConfig {
    CheckConfig {
        n_dir_samples: opts.samples,
        seed: opts.seed,
        tol,
    }
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("documents serialize");
    s.push('\n');
    s
}

fn any_violated(vs: &[CqVerdict]) -> bool {
    vs.iter().any(|v| v.status == CqStatus::Violated)
}

/// Runs one command and returns the text to emit plus whether a violation was found.
fn execute(cli: &Cli) -> Result<(String, bool), Failure> {
    let tol = cli.tol;
    if tol.is_nan() || tol <= 0.0 {
        return Err(Failure::Usage(format!("tolerance must be positive, got {tol}")));
    }
    match &cli.command {
        Command::Classify { instance } => {
            let doc = classify_instance(&load(instance)?, tol)?;
            Ok((if cli.pretty { table::classification(&doc) } else { to_json(&doc) }, false))
        }
        Command::Cones { instance, direction } => {
            let doc = cones_query(&load(instance)?, direction, tol)?;
            Ok((if cli.pretty { table::cones(&doc) } else { to_json(&doc) }, false))
        }
        Command::Check { instance, cq, opts } => {
            if *cq == Cq::Split && opts.partition.is_empty() {
                return Err(Failure::Usage("--cq split needs --partition".into()));
            }
            let inst = load(instance)?;
            let cfg = check_config(opts, tol);
            let start = std::time::Instant::now();
            let mut verdicts = run_check(&inst, (*cq).into(), &opts.partition, &cfg)?;
            if opts.timing {
                let ms = start.elapsed().as_secs_f64() * 1e3;
                for v in &mut verdicts {
                    v.wall_time_ms = Some(ms);
                }
            }
            let flag = opts.fail_on_violation && any_violated(&verdicts);
            let out = CheckOutput {
                instance: &inst.name,
                verdicts,
            };
            let text = if cli.pretty {
                table::verdicts(out.instance, &out.verdicts)
            } else {
                to_json(&out)
            };
            Ok((text, flag))
        }
        Command::Probe { instance, opts, csv } => {
            let inst = load(instance)?;
            let cfg = ProbeConfig {
                radii: opts.radii.clone(),
                samples_per_radius: opts.samples,
                seed: opts.seed,
                residual_floor: opts.residual_floor,
            };
            let (report, rows) = estimate_kappa_with_rows(&inst, &cfg)?;
            if let Some(path) = csv {
                write_csv(path, inst.n, &rows).map_err(Failure::Usage)?;
            }
            Ok((if cli.pretty { table::probe(&report) } else { to_json(&report) }, false))
        }
        Command::Report {
            instance,
            corpus,
            opts,
            probe_samples,
            radii,
        } => {
            let check = check_config(opts, tol);
            let probe = ProbeConfig {
                radii: radii.clone(),
                samples_per_radius: *probe_samples,
                seed: opts.seed,
                ..ProbeConfig::default()
            };
            let report: Report = if *corpus {
                corpus_report(&check, &probe, opts.timing)?
            } else {
                let path = instance.as_ref().expect("clap requires an instance without --corpus");
                build_report(&load(path)?, &opts.partition, &check, &probe, opts.timing)?
            };
            for r in &report.results {
                for msg in &r.inconsistencies {
                    eprintln!("inconsistency in {}: {msg}", r.instance);
                }
            }
            let flag = opts.fail_on_violation
                && report
                    .results
                    .iter()
                    .any(|r| r.verdicts.iter().any(|v| v.verdict.status == CqStatus::Violated));
            Ok((if cli.pretty { table::report(&report) } else { to_json(&report) }, flag))
        }
    }
}

fn write_csv(path: &Path, n: usize, rows: &[SampleRow]) -> Result<(), String> {
    let err = |e: csv::Error| format!("{}: {e}", path.display());
    let mut w = csv::Writer::from_path(path).map_err(err)?;
    let mut header = vec!["radius".to_string(), "index".to_string()];
    header.extend((1..=n).map(|i| format!("z{i}")));
    header.extend(["residual_distance", "residual_natural", "distance", "ratio"].map(String::from));
    w.write_record(&header).map_err(err)?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in rows {
        let mut rec = vec![r.radius.to_string(), r.index.to_string()];
        rec.extend(r.z.iter().map(f64::to_string));
        rec.push(r.residual_distance.to_string());
        rec.push(r.residual_natural.to_string());
        rec.push(opt(r.distance));
        rec.push(opt(r.ratio));
        w.write_record(&rec).map_err(err)?;
    }
    w.flush().map_err(|e| format!("{}: {e}", path.display()))
}

fn emit(out: Option<&Path>, text: &str) -> std::io::Result<()> {
    match out {
        Some(p) => std::fs::write(p, text),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match execute(&cli) {
        Ok((text, violated)) => {
            if let Err(e) = emit(cli.out.as_deref(), &text) {
                eprintln!("error: cannot write output: {e}");
                return ExitCode::from(2);
            }
            ExitCode::from(if violated { 1 } else { 0 })
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Load(msg)) => {
            eprintln!("error: cannot load instance: {msg}");
            ExitCode::from(3)
        }
    }
}
