//! The `qhlab` command line.

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::Value;

use crate::harness::{
    infeasibility_search, run_commuting_chain, run_parallel_chain, run_soliton_chain, ChainConfig,
    ChainReport, Constraint, ConstraintSet, SearchConfig, SearchSpace,
};
use crate::hypersurface::{canonicalize_conjugation, classify_normal};
use crate::quadric::QuadricModel;
use crate::report::{emit_report, CliConfig, Format, ReportEnvelope};
use crate::suite::{self, Check};
use crate::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VIOLATION: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "qhlab",
    version,
    about = "Star-Ricci tensor laboratory for real hypersurfaces in the complex quadric"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Complex dimension of the quadric.
    #[arg(long, global = true, default_value_t = 3)]
    m: usize,
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Multistart restarts; instance count for the identity commands.
    #[arg(long, global = true, default_value_t = 100)]
    restarts: usize,
    #[arg(long, global = true, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Quadric model invariants.
    Model,
    /// Canonical gauge and singular type of seeded normals.
    Classify,
    /// Almost contact, gauge, helper, curvature and Codazzi identities.
    CheckIdentities,
    /// Trace form against the closed forms of the star-Ricci tensor.
    StarRicci,
    /// Soliton forcing, isotropic construction and contradiction scale.
    Soliton,
    /// Replay a theorem chain.
    Chain {
        #[arg(value_enum)]
        which: ChainKind,
    },
    /// Feasibility search for Hopf data with commuting star-Ricci tensor.
    Search,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ChainKind {
    Commuting,
    Parallel,
    Soliton,
}

impl Command {
    fn label(&self) -> String {
        match self {
            Command::Model => "model".into(),
            Command::Classify => "classify".into(),
            Command::CheckIdentities => "check-identities".into(),
            Command::StarRicci => "star-ricci".into(),
            Command::Soliton => "soliton".into(),
            Command::Chain { which } => {
                let name = which
                    .to_possible_value()
                    .map(|v| v.get_name().to_string())
                    .unwrap_or_default();
                format!("chain {name}")
            }
            Command::Search => "search".into(),
        }
    }
}

/// Runs the CLI on `args` (program name first) and returns the exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(envelope) => match write_envelope(&envelope, &cli) {
            Ok(()) if envelope.summary.violated() => EXIT_VIOLATION,
            Ok(()) => EXIT_OK,
            Err(e) => {
                eprintln!("error: {e}");
                EXIT_USAGE
            }
        },
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}

fn write_envelope(envelope: &ReportEnvelope, cli: &Cli) -> Result<()> {
    let bytes = emit_report(envelope, cli.format)?;
    match &cli.out {
        Some(path) => std::fs::write(path, bytes)?,
        None => std::io::stdout().write_all(&bytes)?,
    }
    Ok(())
}

fn payload<T: Serialize>(value: &T) -> Result<Value> {
    Ok(serde_json::to_value(value)?)
}

/// Builds the report for a parsed command line.
fn execute(cli: &Cli) -> Result<ReportEnvelope> {
    if cli.m < 3 {
        return Err(Error::DimensionTooSmall(cli.m));
    }
    if !(cli.tol.is_finite() && cli.tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "--tol must be positive, got {}",
            cli.tol
        )));
    }
    let config = CliConfig {
        command: cli.command.label(),
        m: cli.m,
        seed: cli.seed,
        restarts: cli.restarts,
        tol: cli.tol,
        out: cli.out.clone(),
        format: cli.format,
    };
    let (m, seed, tol) = (cli.m, cli.seed, cli.tol);
    let (value, rows) = match &cli.command {
        Command::Model => {
            let model = QuadricModel::build(m, seed)?;
            (
                payload(&model.invariant_report())?,
                suite::model_checks(&model, tol),
            )
        }
        Command::Classify => {
            let model = QuadricModel::build(m, seed)?;
            let normals = suite::sample_normals(&model, seed, cli.restarts);
            let mut entries = Vec::with_capacity(normals.len());
            for n in &normals {
                let gauge = canonicalize_conjugation(&model, n)?;
                entries.push(serde_json::json!({
                    "kind": classify_normal(&gauge).kind,
                    "t": gauge.t,
                    "cos_2t": gauge.cos_2t,
                    "theta_star": gauge.theta_star,
                }));
            }
            (
                Value::Array(entries),
                suite::classify_checks(&model, &normals, tol)?,
            )
        }
        Command::CheckIdentities => {
            let rows = suite::identity_checks(m, seed, cli.restarts.max(1), tol)?;
            (payload(&rows)?, rows)
        }
        Command::StarRicci => {
            let rows = suite::star_ricci_checks(m, seed, cli.restarts.clamp(1, 20), tol)?;
            (payload(&rows)?, rows)
        }
        Command::Soliton => {
            let rows = suite::soliton_checks(m, seed, tol)?;
            (payload(&rows)?, rows)
        }
        Command::Chain { which } => {
            let cfg = ChainConfig {
                restarts: cli.restarts.max(1),
                seed,
                tol,
            };
            let report = match which {
                ChainKind::Commuting => run_commuting_chain(m, &cfg)?,
                ChainKind::Parallel => run_parallel_chain(m, &cfg)?,
                ChainKind::Soliton => run_soliton_chain(m, &cfg)?,
            };
            let rows = chain_rows(&report);
            (payload(&report)?, rows)
        }
        Command::Search => {
            let set = ConstraintSet::new(
                "hopf+commuting",
                [Constraint::Hopf, Constraint::CommutingStarRicci],
            );
            let cfg = SearchConfig {
                restarts: cli.restarts.max(1),
                seed,
                tol,
                ..Default::default()
            };
            let report = infeasibility_search(&set, &SearchSpace::hopf(m, seed), &cfg)?;
            let mut rows = vec![Check::info("best_residual", report.best_residual, "")];
            rows.extend(report.breakdown.iter().map(|c| {
                Check::info(
                    format!("constraint {}", c.name),
                    c.norm,
                    format!("weight {}", c.weight),
                )
            }));
            (payload(&report)?, rows)
        }
    };
    Ok(ReportEnvelope::new(config, value, rows))
}

fn chain_rows(report: &ChainReport) -> Vec<Check> {
    report
        .steps
        .iter()
        .map(|s| Check {
            name: s.name.clone(),
            value: s.value,
            tolerance: None,
            verdict: s.verdict,
            gating: s.gating,
            note: format!("\"{}\" {}", s.anchor, s.note)
                .trim_end()
                .to_string(),
        })
        .collect()
}
