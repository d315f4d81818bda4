//! `serrin`: command-line driver for the torsion, spectrum and branch tools.
//!
//! Every subcommand reads a flat `key = value` configuration (optional file
//! given by `--config`, then `--set key=value`, then dedicated flags) and
//! writes its payload files plus a `<command>.bundle.json` manifest into the
//! output directory.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serrin_core::io::RunConfig;

use crate::commands::Status;

#[derive(Parser, Debug)]
#[command(name = "serrin", version, about = "Serrin domains bifurcating from Clifford tori in the 3-sphere")]
struct Cli {
    /// Output directory. Defaults to $SERRIN_OUT_DIR, then ./serrin-out.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Plain `key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Extra `key=value` override, applied after the config file.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Worker threads for independent (axis, n) items.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Eigenvalue curves sigma_n(lambda) as plot-ready CSV.
    Sweep(SweepArgs),
    /// Bifurcation points lambda_n with derivative checks.
    Roots(RootsArgs),
    /// Torsion problem on a tube with a given boundary profile.
    Solve(SolveArgs),
    /// Finite-difference check of the linearized Neumann operator.
    CheckLinearization(LinearizationArgs),
    /// Continuation of a bifurcating branch of Serrin domains.
    Branch(BranchArgs),
    /// Run the verification battery and write the pass/fail matrix.
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// xi, eta or both.
    #[arg(long)]
    axis: Option<String>,
    /// Mode range such as 0..8.
    #[arg(long)]
    n: Option<String>,
    /// Samples per curve.
    #[arg(long)]
    points: Option<String>,
    /// Lower end of the lambda range.
    #[arg(long)]
    lambda_min: Option<String>,
    /// Upper end of the lambda range.
    #[arg(long)]
    lambda_max: Option<String>,
}

#[derive(Args, Debug)]
struct RootsArgs {
    /// xi, eta or both.
    #[arg(long)]
    axis: Option<String>,
    /// Mode range such as 2..8.
    #[arg(long)]
    n: Option<String>,
    /// Root-finder tolerance in lambda.
    #[arg(long)]
    tol: Option<String>,
}

#[derive(Args, Debug)]
struct SolveArgs {
    /// xi or eta (ignored with --profile).
    #[arg(long)]
    axis: Option<String>,
    /// Constant profile value.
    #[arg(long)]
    lambda: Option<String>,
    /// Comma-separated cosine coefficients c0,c1,...
    #[arg(long)]
    coeffs: Option<String>,
    /// Profile JSON file (as written by `branch`).
    #[arg(long)]
    profile: Option<String>,
    /// Grid as NxM.
    #[arg(long)]
    resolution: Option<String>,
    /// even or full angular storage.
    #[arg(long)]
    symmetry: Option<String>,
}

#[derive(Args, Debug)]
struct LinearizationArgs {
    /// xi or eta.
    #[arg(long)]
    axis: Option<String>,
    /// Base tube radius.
    #[arg(long)]
    lambda: Option<String>,
    /// Cosine mode of the perturbation.
    #[arg(long)]
    mode: Option<String>,
    /// Comma-separated finite-difference steps.
    #[arg(long)]
    steps: Option<String>,
    /// Grid as NxM.
    #[arg(long)]
    resolution: Option<String>,
    /// Pass threshold for the extrapolated deviation.
    #[arg(long)]
    tol: Option<String>,
}

#[derive(Args, Debug)]
struct BranchArgs {
    /// xi or eta.
    #[arg(long)]
    axis: Option<String>,
    /// Bifurcation mode j (at least 2).
    #[arg(long)]
    mode: Option<String>,
    /// Largest branch amplitude s.
    #[arg(long)]
    smax: Option<String>,
    /// Number of continuation steps up to smax.
    #[arg(long)]
    steps: Option<String>,
    /// Grid as NxM.
    #[arg(long)]
    resolution: Option<String>,
    /// Highest cosine mode kept in the profile.
    #[arg(long)]
    truncation: Option<String>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// xi, eta or both.
    #[arg(long)]
    axis: Option<String>,
    /// Grid as NxM for the PDE checks.
    #[arg(long)]
    resolution: Option<String>,
    /// Deliberate defect for harness self-tests.
    #[arg(long, hide = true)]
    fault: Option<String>,
}

fn flags(pairs: &[(&str, &Option<String>)]) -> RunConfig {
    let mut cfg = RunConfig::new();
    for (k, v) in pairs {
        if let Some(v) = v {
            cfg.set(k, v);
        }
    }
    cfg
}

fn build_config(cli: &Cli) -> serrin_core::Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::new(),
    };
    for o in &cli.overrides {
        cfg.merge(&RunConfig::parse(o)?);
    }
    let from_flags = match &cli.command {
        Command::Sweep(a) => flags(&[
            ("axis", &a.axis),
            ("n", &a.n),
            ("points", &a.points),
            ("lambda_min", &a.lambda_min),
            ("lambda_max", &a.lambda_max),
        ]),
        Command::Roots(a) => flags(&[("axis", &a.axis), ("n", &a.n), ("tol", &a.tol)]),
        Command::Solve(a) => flags(&[
            ("axis", &a.axis),
            ("lambda", &a.lambda),
            ("coeffs", &a.coeffs),
            ("profile", &a.profile),
            ("resolution", &a.resolution),
            ("symmetry", &a.symmetry),
        ]),
        Command::CheckLinearization(a) => flags(&[
            ("axis", &a.axis),
            ("lambda", &a.lambda),
            ("mode", &a.mode),
            ("steps", &a.steps),
            ("resolution", &a.resolution),
            ("tol", &a.tol),
        ]),
        Command::Branch(a) => flags(&[
            ("axis", &a.axis),
            ("mode", &a.mode),
            ("smax", &a.smax),
            ("steps", &a.steps),
            ("resolution", &a.resolution),
            ("truncation", &a.truncation),
        ]),
        Command::Verify(a) => flags(&[("axis", &a.axis), ("resolution", &a.resolution), ("fault", &a.fault)]),
    };
    cfg.merge(&from_flags);
    Ok(cfg)
}

fn out_dir(cli: &Cli) -> PathBuf {
    cli.out
        .clone()
        .or_else(|| std::env::var_os("SERRIN_OUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("serrin-out"))
}

fn exit_code_for(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<serrin_core::Error>() {
        Some(e) if e.is_config() => 2,
        // A hypothesis check that did not hold, e.g. a failed branch certificate.
        Some(serrin_core::Error::Analysis(_)) => 1,
        _ => 3,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = build_config(&cli).map_err(anyhow::Error::from).and_then(|cfg| {
        if cli.jobs == 0 {
            return Err(serrin_core::Error::Config("--jobs must be at least 1".into()).into());
        }
        let pool = rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build()?;
        let dir = out_dir(&cli);
        pool.install(|| match &cli.command {
            Command::Sweep(_) => commands::sweep(&cfg, &dir),
            Command::Roots(_) => commands::roots(&cfg, &dir),
            Command::Solve(_) => commands::solve(&cfg, &dir),
            Command::CheckLinearization(_) => commands::check_linearization(&cfg, &dir),
            Command::Branch(_) => commands::branch(&cfg, &dir),
            Command::Verify(_) => commands::verify(&cfg, &dir),
        })
    });
    match result {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::CheckFailed) => ExitCode::from(1),
        Ok(Status::NumericalFailure) => ExitCode::from(3),
        Err(e) => {
            eprintln!("serrin: {e:#}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
