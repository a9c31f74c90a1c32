//! `supdiff`: normal cones, subdifferentials and optimality certificates for
//! suprema of polyhedral convex functions, from JSON scenario files.
//!
//! Exit codes: 0 success, 1 expectation or oracle mismatch, 2 usage or
//! schema error, 3 computation refused because a hypothesis fails.

mod query;
mod report;
mod scenario;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use query::classify;
use report::{run_query, run_suite};
use scenario::{
    load_scenario, parse_scalar_arg, parse_vector_arg, parse_weights_arg, usage, Command, Params,
};

#[derive(Parser)]
#[command(
    name = "supdiff",
    version,
    about = "Exact normal cones, subdifferentials and KKT certificates for suprema of convex functions"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Normal cone to dom f from the weighted ε-subdifferentials.
    NormalCone(QueryArgs),
    /// Normal cone as the limit of scaled hulls over the ε schedule.
    NormalConeLimit(QueryArgs),
    /// Normal cone as the sum of active, non-active and improper parts.
    NormalConeSplit(QueryArgs),
    /// Subdifferential of the supremum.
    Subdiff(QueryArgs),
    /// Subdifferential as a three-part sum (needs continuity).
    SubdiffSplit(QueryArgs),
    /// Subdifferential from active ε-subdifferentials only (needs f_t(x) = f(x) for all t).
    Brondsted(QueryArgs),
    /// Small-support convex combination carrying an ε-subgradient.
    Decompose {
        #[command(flatten)]
        query: QueryArgs,
        /// The ε-subgradient, comma separated.
        #[arg(long, allow_hyphen_values = true)]
        g: String,
    },
    /// Certify or refute optimality of a point for a convex program.
    Kkt(QueryArgs),
    /// Same, for a linear objective with affine constraints.
    Silp(QueryArgs),
    /// Run every scenario in a directory and compare with its expectations.
    RunSuite {
        dir: PathBuf,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Args)]
struct QueryArgs {
    /// Scenario file, or a bare family or program.
    scenario: PathBuf,
    /// Comma separated rationals, e.g. `0,1/2`.
    #[arg(long, allow_hyphen_values = true)]
    point: String,
    /// ε, or the first value of the schedule.
    #[arg(long, default_value = "1", allow_hyphen_values = true)]
    eps: String,
    /// Number of schedule values ε, ε/2, ε/4, ...
    #[arg(long = "schedule", value_name = "DEPTH", default_value_t = 8)]
    depth: usize,
    /// rho, unit or custom:<file>.
    #[arg(long, default_value = "rho")]
    weights: String,
    /// Use the exact active set in the split subdifferential.
    #[arg(long)]
    exact_active: bool,
    /// Compare with the brute-force oracle; a mismatch exits with 1.
    #[arg(long)]
    certify: bool,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct Output {
    /// JSON output (the default).
    #[arg(long, conflicts_with = "text")]
    json: bool,
    /// Human-readable output.
    #[arg(long)]
    text: bool,
}

fn params(a: &QueryArgs, g: Option<&str>) -> Result<Params> {
    if a.depth == 0 {
        return usage("--schedule must be at least 1");
    }
    Ok(Params {
        point: parse_vector_arg(&a.point, "--point")?,
        eps: parse_scalar_arg(&a.eps, "--eps")?,
        depth: a.depth,
        weights: parse_weights_arg(&a.weights)?,
        exact_active: a.exact_active,
        certify: a.certify,
        g: g.map(|g| parse_vector_arg(g, "--g")).transpose()?,
    })
}

/// Writes to stdout; a closed pipe downstream is not an error.
fn emit(text: &str) -> Result<()> {
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        other => Ok(other?),
    }
}

fn single(command: Command, a: &QueryArgs, g: Option<&str>) -> Result<u8> {
    let p = params(a, g)?;
    let s = load_scenario(&a.scenario)?;
    let rec = run_query(&s.subject, 0, command, &p, None);
    if a.output.text {
        let mut text = format!("{}\n", rec.text);
        for problem in &rec.problems {
            text.push_str(&format!("  {problem}\n"));
        }
        emit(&text)?;
    } else {
        let mut v = rec.to_json();
        v["scenario"] = s.name.clone().into();
        emit(&format!("{}\n", serde_json::to_string_pretty(&v)?))?;
    }
    if let Some((_, msg)) = &rec.error {
        eprintln!("supdiff: {msg}");
    }
    Ok(rec.exit_code())
}

fn suite(dir: &Path, output: &Output) -> Result<u8> {
    let r = run_suite(dir)?;
    if output.text {
        emit(&r.to_text())?;
    } else {
        emit(&format!("{}\n", serde_json::to_string_pretty(&r.to_json())?))?;
    }
    for line in r.failures() {
        eprintln!("{line}");
    }
    Ok(r.exit_code())
}

fn run(cli: Cli) -> Result<u8> {
    match &cli.command {
        Cmd::NormalCone(a) => single(Command::NormalCone, a, None),
        Cmd::NormalConeLimit(a) => single(Command::NormalConeLimit, a, None),
        Cmd::NormalConeSplit(a) => single(Command::NormalConeSplit, a, None),
        Cmd::Subdiff(a) => single(Command::Subdiff, a, None),
        Cmd::SubdiffSplit(a) => single(Command::SubdiffSplit, a, None),
        Cmd::Brondsted(a) => single(Command::Brondsted, a, None),
        Cmd::Decompose { query, g } => single(Command::Decompose, query, Some(g)),
        Cmd::Kkt(a) => single(Command::Kkt, a, None),
        Cmd::Silp(a) => single(Command::Silp, a, None),
        Cmd::RunSuite { dir, output } => suite(dir, output),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("supdiff: {e:#}");
            ExitCode::from(classify(&e).exit_code())
        }
    }
}
