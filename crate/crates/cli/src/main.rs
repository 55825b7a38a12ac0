//! `confbound`: conformal Laplacian and Yamabe-invariant bounds from the
//! command line.
//!
//! Exit codes: 0 success, 1 failed verification suite, 2 usage error,
//! 3 malformed JSON, 4 invalid input, 5 solver failure.

mod output;

use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use confbound::bounds::{bounds_report, catalog, catalog_entry, BoundsOptions};
use confbound::spheregeom::iso_profile;
use confbound::suites::{run_suite, Suite};
use confbound::{
    bbg_constant, best_hypothesis, build_potential, least_eigenvalue, radial_spectrum, Dim, Hypothesis,
    ManifoldSummary, PotentialRecord, StepPotential, SummaryRecord, YamabeOptions,
};
use serde::de::DeserializeOwned;
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "confbound", version, about = "Conformal Laplacian and Yamabe-invariant lower bounds")]
pub struct RunConfig {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Comparison constant a(n, eps, alpha).
    Constant {
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        n: u32,
        #[arg(long, allow_hyphen_values = true, value_parser = clap::value_parser!(i8).range(-1..=1))]
        epsilon: i8,
        /// Ignored for eps = 0.
        #[arg(long, default_value_t = 0.0)]
        alpha: f64,
    },
    /// Full bounds report for a manifold summary.
    Bound {
        #[command(flatten)]
        source: SummarySource,
        #[command(flatten)]
        solver: SolverArgs,
        /// Cells for the linear eigenvalue.
        #[arg(long, default_value_t = 2000, value_parser = grid_size)]
        grid: usize,
        /// Relative tolerance of the conformal-sphere decision.
        #[arg(long, default_value_t = 1e-3)]
        rigidity_tol: f64,
    },
    /// Least eigenvalue(s) of c_n Delta + h for a step potential.
    Spectrum {
        #[command(flatten)]
        source: PotentialSource,
        #[arg(long, default_value_t = 2000, value_parser = grid_size)]
        grid: usize,
        /// Number of eigenvalues; 1 reports the ground state in full.
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
        count: u32,
    },
    /// Minimizes the Yamabe-type quotient for a step potential.
    Yamabe {
        #[command(flatten)]
        source: PotentialSource,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Model isoperimetric profile Is(s) on an even grid of s in [0, 1].
    Profile {
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        n: u32,
        #[arg(long, default_value_t = 11, value_parser = clap::value_parser!(u32).range(2..))]
        points: u32,
    },
    /// Runs a seeded verification suite.
    Verify {
        #[arg(long, value_parser = suite_name)]
        suite: Suite,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
        count: u64,
    },
    /// Lists the built-in reference summaries.
    Catalog,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct SummarySource {
    /// Built-in summary by name.
    #[arg(long, value_parser = catalog_name)]
    catalog: Option<String>,
    /// Summary JSON file, or `-` for standard input.
    #[arg(long, value_parser = input_path)]
    input: Option<PathBuf>,
    /// Summary JSON given inline.
    #[arg(long)]
    json: Option<String>,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct PotentialSource {
    /// Potential built from a catalog summary.
    #[arg(long, value_parser = catalog_name)]
    catalog: Option<String>,
    /// Potential JSON file, or `-` for standard input.
    #[arg(long, value_parser = input_path)]
    input: Option<PathBuf>,
    /// Potential JSON given inline.
    #[arg(long)]
    json: Option<String>,
}

#[derive(Debug, Args)]
struct SolverArgs {
    /// Cells for the Yamabe descent.
    #[arg(long, default_value_t = 2000, value_parser = grid_size)]
    yamabe_grid: usize,
    #[arg(long, default_value_t = 10_000)]
    max_iterations: usize,
    #[arg(long, default_value_t = 1e-12)]
    stagnation_tol: f64,
    #[arg(long, default_value_t = 5)]
    window: usize,
}

impl SolverArgs {
    fn options(&self) -> YamabeOptions {
        YamabeOptions {
            grid_size: self.yamabe_grid,
            max_iterations: self.max_iterations,
            stagnation_tol: self.stagnation_tol,
            window: self.window,
            ..YamabeOptions::default()
        }
    }
}

fn grid_size(s: &str) -> Result<usize, String> {
    let m: usize = s.parse().map_err(|e| format!("{e}"))?;
    if m < confbound::spectral::MIN_CELLS {
        return Err(format!("grid size must be at least {}", confbound::spectral::MIN_CELLS));
    }
    Ok(m)
}

fn input_path(s: &str) -> Result<PathBuf, String> {
    let p = PathBuf::from(s);
    if s == "-" || p.is_file() {
        Ok(p)
    } else {
        Err(format!("no such file: {s}"))
    }
}

fn catalog_name(s: &str) -> Result<String, String> {
    let names: Vec<String> = catalog().map_err(|e| e.to_string())?.into_iter().map(|e| e.name).collect();
    if names.iter().any(|n| n == s) {
        Ok(s.to_string())
    } else {
        Err(format!("unknown catalog entry; expected one of {}", names.join(", ")))
    }
}

fn suite_name(s: &str) -> Result<Suite, String> {
    s.parse::<Suite>().map_err(|_| {
        let names: Vec<&str> = Suite::ALL.iter().map(|s| s.label()).collect();
        format!("expected one of {}", names.join(", "))
    })
}

#[derive(Debug)]
enum Failure {
    Malformed(String),
    Invalid(String),
    Solver(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Malformed(_) => 3,
            Failure::Invalid(_) => 4,
            Failure::Solver(_) => 5,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Malformed(m) | Failure::Invalid(m) | Failure::Solver(m) => m,
        }
    }
}

impl From<confbound::Error> for Failure {
    fn from(e: confbound::Error) -> Self {
        if e.is_solver_failure() {
            Failure::Solver(e.to_string())
        } else {
            Failure::Invalid(e.to_string())
        }
    }
}

fn read_source(input: &Option<PathBuf>, json: &Option<String>) -> Result<String, Failure> {
    if let Some(j) = json {
        return Ok(j.clone());
    }
    let path = input.as_ref().expect("clap requires one source");
    let mut text = String::new();
    let read = if path.as_os_str() == "-" {
        io::stdin().read_to_string(&mut text).map(|_| ())
    } else {
        fs::read_to_string(path).map(|t| text = t)
    };
    read.map_err(|e| Failure::Malformed(format!("cannot read {}: {e}", path.display())))?;
    Ok(text)
}

/// Parses the wire record (shape errors are malformed input), then validates.
fn parse_validated<R, T>(text: &str) -> Result<T, Failure>
where
    R: DeserializeOwned,
    T: TryFrom<R, Error = confbound::Error>,
{
    let record: R = serde_json::from_str(text).map_err(|e| Failure::Malformed(format!("malformed JSON: {e}")))?;
    Ok(T::try_from(record)?)
}

fn load_summary(src: &SummarySource) -> Result<ManifoldSummary, Failure> {
    if let Some(name) = &src.catalog {
        return Ok(catalog_entry(name)?.summary);
    }
    parse_validated::<SummaryRecord, ManifoldSummary>(&read_source(&src.input, &src.json)?)
}

fn load_potential(src: &PotentialSource) -> Result<StepPotential, Failure> {
    if let Some(name) = &src.catalog {
        let summary = catalog_entry(name)?.summary;
        let a = best_hypothesis(&summary)?;
        return Ok(build_potential(&summary, &a)?);
    }
    parse_validated::<PotentialRecord, StepPotential>(&read_source(&src.input, &src.json)?)
}

fn dim(n: u32) -> Result<Dim, Failure> {
    Ok(Dim::new(n as usize)?)
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct Eigenvalues {
    n: usize,
    grid_size: usize,
    eigenvalues: Vec<f64>,
}

#[derive(Serialize)]
struct ProfileRow {
    s: f64,
    #[serde(rename = "is")]
    value: f64,
}

#[derive(Serialize)]
struct ProfileTable {
    n: usize,
    points: Vec<ProfileRow>,
}

struct Rendered {
    body: String,
    code: u8,
}

fn render<T: Serialize>(format: Format, value: &T, text: impl FnOnce(&T) -> String) -> Result<Rendered, Failure> {
    let body = match format {
        Format::Json => {
            let mut s = output::to_json(value).map_err(|e| Failure::Invalid(format!("cannot serialize output: {e}")))?;
            s.push('\n');
            s
        }
        Format::Text => text(value),
    };
    Ok(Rendered { body, code: 0 })
}

fn run(config: &RunConfig) -> Result<Rendered, Failure> {
    let fmt = config.format;
    match &config.command {
        Command::Constant { n, epsilon, alpha } => {
            let c = bbg_constant(dim(*n)?, Hypothesis::new(*epsilon, *alpha)?)?;
            render(fmt, &c, output::constant_text)
        }
        Command::Bound {
            source,
            solver,
            grid,
            rigidity_tol,
        } => {
            let summary = load_summary(source)?;
            let opts = BoundsOptions {
                spectral_grid: *grid,
                yamabe: solver.options(),
                rigidity_tol: *rigidity_tol,
            };
            render(fmt, &bounds_report(&summary, &opts)?, output::report_text)
        }
        Command::Spectrum { source, grid, count } => {
            let h = load_potential(source)?;
            if *count == 1 {
                render(fmt, &least_eigenvalue(&h, *grid)?, output::spectrum_text)
            } else {
                let e = Eigenvalues {
                    n: h.n().get(),
                    grid_size: *grid,
                    eigenvalues: radial_spectrum(&h, *count as usize, *grid)?,
                };
                render(fmt, &e, |e| output::eigenvalues_text(&e.eigenvalues))
            }
        }
        Command::Yamabe { source, solver } => {
            let h = load_potential(source)?;
            let res = confbound::minimize_quotient(&h, &solver.options())?;
            render(fmt, &res, output::yamabe_text)
        }
        Command::Profile { n, points } => {
            let d = dim(*n)?;
            let k = *points as usize;
            let rows = (0..k)
                .map(|i| {
                    let s = i as f64 / (k - 1) as f64;
                    iso_profile(d, s).map(|v| ProfileRow { s, value: v })
                })
                .collect::<confbound::Result<Vec<_>>>()?;
            let table = ProfileTable {
                n: d.get(),
                points: rows,
            };
            render(fmt, &table, |t| {
                let pairs: Vec<(f64, f64)> = t.points.iter().map(|r| (r.s, r.value)).collect();
                output::profile_text(&pairs)
            })
        }
        Command::Verify { suite, seed, count } => {
            let report = run_suite(*suite, *seed, *count as usize)?;
            let mut out = render(fmt, &report, output::suite_text)?;
            if !report.passed() {
                out.code = 1;
            }
            Ok(out)
        }
        Command::Catalog => render(fmt, &catalog()?, |c| output::catalog_text(c)),
    }
}

/// Parses `argv` (program name first).
pub fn parse_args<I, T>(argv: I) -> Result<RunConfig, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    RunConfig::try_parse_from(argv)
}

fn main() -> ExitCode {
    let config = match parse_args(std::env::args_os()) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&config) {
        Ok(out) => {
            let mut stdout = io::stdout().lock();
            if stdout.write_all(out.body.as_bytes()).and_then(|_| stdout.flush()).is_err() {
                return ExitCode::from(3);
            }
            ExitCode::from(out.code)
        }
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
