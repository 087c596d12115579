//! `mixtens`: run verification campaigns and inspect invariants, generators and closures.
//!
//! Exit status: 0 when everything checked passed, 1 when a campaign record failed,
//! 2 on usage or runtime errors.

use std::fmt;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;

use mixtens_core::closure::headroom_stability;
use mixtens_core::generators::{closure_seeds, GeneratorId};
use mixtens_core::oracle::invariant_space;
use mixtens_core::verify::{run_campaign, CampaignConfig, ModeChoice, Report};
use mixtens_core::{closure, ClosureConfig, Field, GaussianRational, Grade, GroupKind, GroupSpec, Mode, MixedTensor};

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Core(#[from] mixtens_core::Error),
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Usage(String),
    #[error("cannot write to stdout: {0}")]
    Stdout(io::Error),
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Parser)]
#[command(name = "mixtens", version, about = "Invariants of classical groups in the mixed tensor algebra over C^n")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compare oracles, spanning sets, closures and Monte Carlo estimates over a grid.
    Campaign(CampaignArgs),
    /// Print a named generator tensor as JSON.
    Gen(GenArgs),
    /// Compute the invariant space of a group at one grade.
    Invariants(InvariantArgs),
    /// Compute the contraction closure of a seed set.
    Closure(ClosureArgs),
}

#[derive(Args)]
struct CampaignArgs {
    /// Group names (`gl`, `u`, `sl`, `slk:K`, `monomial`, `o`, `so`, `sym`, `signed`,
    /// `alt`, `signed-alt`, `sp`) or `all`; repeat or separate with commas.
    #[arg(long = "group", value_delimiter = ',', default_value = "all")]
    groups: Vec<String>,
    /// Dimensions to test, comma separated.
    #[arg(long = "n", value_delimiter = ',')]
    ns: Option<Vec<usize>>,
    #[arg(long)]
    max_degree: Option<usize>,
    #[arg(long, default_value_t = 1)]
    headroom: usize,
    #[arg(long, default_value = "auto")]
    mode: ModeChoice,
    #[arg(long, default_value_t = mixtens_core::DEFAULT_TOL)]
    tol: f64,
    /// Haar samples per Monte Carlo batch; 0 skips Monte Carlo records.
    #[arg(long, default_value_t = 2000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Largest coordinate count for the headroom-stability rerun.
    #[arg(long, default_value_t = 2187)]
    stability_budget: u64,
    /// JSON report path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// CSV report path.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Directory for the bases of failing records.
    #[arg(long)]
    dump_on_fail: Option<PathBuf>,
    /// Record per-record wall-clock time (reports are then not reproducible).
    #[arg(long)]
    timings: bool,
}

#[derive(Args)]
struct GenArgs {
    /// Generator name, e.g. `det`, `h:3`, `alt:0,1,2`, `detpow*:2`.
    name: GeneratorId,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value = "exact")]
    mode: Mode,
}

#[derive(Args)]
struct InvariantArgs {
    #[arg(long)]
    group: GroupKind,
    #[arg(long)]
    n: usize,
    /// Grade as `k,l`.
    #[arg(long)]
    grade: Grade,
    #[arg(long, default_value = "exact")]
    mode: Mode,
    #[arg(long, default_value_t = mixtens_core::DEFAULT_TOL)]
    tol: f64,
    /// Print the basis as JSON instead of the dimension.
    #[arg(long)]
    basis: bool,
}

#[derive(Args)]
struct ClosureArgs {
    #[arg(long)]
    n: usize,
    /// Seed generator; repeatable.
    #[arg(long = "gen")]
    gens: Vec<GeneratorId>,
    /// Use the catalogue seed set of a group instead of (or in addition to) `--gen`.
    #[arg(long)]
    group: Option<GroupKind>,
    /// Largest reported grade as `K,L`.
    #[arg(long)]
    caps: Grade,
    #[arg(long, default_value_t = 1)]
    headroom: usize,
    #[arg(long, default_value = "exact")]
    mode: Mode,
    #[arg(long, default_value_t = mixtens_core::DEFAULT_TOL)]
    tol: f64,
    /// Also compare against the closure at headroom + 1.
    #[arg(long)]
    stability: bool,
    /// Print the table as JSON keyed by `k,l`.
    #[arg(long)]
    json: bool,
}

/// Writes one line to stdout. A closed pipe (e.g. `| head`) surfaces as an error
/// that `main` treats as a quiet exit.
fn emit(args: fmt::Arguments) -> Result<()> {
    writeln!(io::stdout().lock(), "{args}").map_err(CliError::Stdout)
}

macro_rules! out {
    ($($arg:tt)*) => {
        emit(format_args!($($arg)*))?
    };
}

fn write_file(path: &PathBuf, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|source| CliError::Write { path: path.clone(), source })
}

fn parse_groups(names: &[String]) -> Result<Vec<GroupKind>> {
    if names.iter().any(|g| g.trim().eq_ignore_ascii_case("all")) {
        return Ok(GroupKind::all());
    }
    let mut out = Vec::new();
    for name in names {
        let kind: GroupKind = name.parse()?;
        if !out.contains(&kind) {
            out.push(kind);
        }
    }
    Ok(out)
}

fn print_summary(report: &Report) -> Result<()> {
    for r in report.records.iter().filter(|r| !r.passed()) {
        out!(
            "FAIL {:?} {} n={} ({},{}) oracle={:?} fft={:?} closure={:?} monte_carlo={:?} {}",
            r.check,
            r.group,
            r.n,
            r.k,
            r.l,
            r.dim_oracle,
            r.dim_fft,
            r.dim_closure,
            r.dim_monte_carlo,
            r.note.as_deref().unwrap_or("")
        );
    }
    let s = &report.summary;
    out!(
        "records {} passed {} failed {} skipped {} errors {} stability-unchecked {}",
        s.total, s.passed, s.failed, s.skipped, s.errors, s.stability_unchecked
    );
    Ok(())
}

fn campaign(args: CampaignArgs) -> Result<bool> {
    let config = CampaignConfig {
        groups: parse_groups(&args.groups)?,
        ns: args.ns,
        max_degree: args.max_degree,
        headroom: args.headroom,
        mode: args.mode,
        tol: args.tol,
        samples: args.samples,
        seed: args.seed,
        timings: args.timings,
        stability_budget: args.stability_budget,
        dump_on_fail: args.dump_on_fail,
    };
    let report = run_campaign(&config)?;
    if let Some(path) = &args.out {
        write_file(path, &report.to_json()?)?;
    }
    if let Some(path) = &args.csv {
        write_file(path, &report.to_csv())?;
    }
    // The exit status must reflect the records even if stdout is already closed.
    match print_summary(&report) {
        Err(CliError::Stdout(e)) if e.kind() == io::ErrorKind::BrokenPipe => {}
        other => other?,
    }
    Ok(report.success())
}

fn gen(args: GenArgs) -> Result<()> {
    let json = match args.mode {
        Mode::Exact => args.name.build::<GaussianRational>(args.n)?.to_json(),
        Mode::Float => args.name.build::<Complex64>(args.n)?.to_json(),
    };
    out!("{}", serde_json::to_string_pretty(&json).map_err(mixtens_core::Error::from)?);
    Ok(())
}

fn invariants_in<F: Field>(args: &InvariantArgs) -> Result<()> {
    let spec = GroupSpec::new(args.group, args.n)?;
    let basis = invariant_space::<F>(spec, args.grade, args.tol)?;
    if args.basis {
        out!("{}", serde_json::to_string_pretty(&basis.to_json()).map_err(mixtens_core::Error::from)?);
    } else {
        out!("{}", basis.dim());
    }
    Ok(())
}

fn closure_in<F: Field>(args: &ClosureArgs) -> Result<()> {
    let mut seeds: Vec<MixedTensor<F>> = args
        .gens
        .iter()
        .map(|g| g.build::<F>(args.n))
        .collect::<mixtens_core::Result<_>>()?;
    if let Some(kind) = args.group {
        let spec = GroupSpec::new(kind, args.n)?;
        let degree = args.caps.degree() + 2 * (args.headroom + 1);
        seeds.extend(closure_seeds(spec, degree)?.iter().map(|s| s.map_field(F::from_exact)));
    }
    let config = ClosureConfig::new(args.caps, args.headroom, args.tol);
    let table = closure::<F>(args.n, &seeds, &config)?;
    if args.json {
        out!("{}", serde_json::to_string_pretty(&table.to_json()).map_err(mixtens_core::Error::from)?);
    } else {
        for (grade, dim) in table.dims() {
            out!("{} {dim}", grade.key());
        }
        out!("converged {}", table.converged());
        out!("column-space {}", table.column_space_dim()?);
    }
    if args.stability {
        out!("headroom-stable {}", headroom_stability::<F>(args.n, &seeds, &config)?);
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Campaign(args) => campaign(args),
        Command::Gen(args) => gen(args).map(|_| true),
        Command::Invariants(args) => match args.mode {
            Mode::Exact => invariants_in::<GaussianRational>(&args),
            Mode::Float => invariants_in::<Complex64>(&args),
        }
        .map(|_| true),
        Command::Closure(args) => {
            if args.gens.is_empty() && args.group.is_none() {
                return Err(CliError::Usage("closure needs --gen or --group".into()));
            }
            match args.mode {
                Mode::Exact => closure_in::<GaussianRational>(&args),
                Mode::Float => closure_in::<Complex64>(&args),
            }
            .map(|_| true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(CliError::Stdout(e)) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
