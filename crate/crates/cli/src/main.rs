//! `sepcheck`: entanglement tests on bipartite density matrices.
//!
//! Exit status is 0 on success, 2 for bad input or a state that fails
//! validation, and 3 when the decomposition search finds nothing.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::value::RawValue;

use sepcheck::criteria::parse_criteria;
use sepcheck::oracle::{search, SearchConfig};
use sepcheck::statefile::{number, StateFile};
use sepcheck::sweep::{self, find_threshold, Grid, BISECTION_TOL};
use sepcheck::{ComplexMatrix, Criterion, Execution, Family};

const EXIT_INPUT: u8 = 2;
const EXIT_NOT_FOUND: u8 = 3;

#[derive(Parser)]
#[command(name = "sepcheck", version, about = "Inseparability tests for bipartite density matrices")]
struct Cli {
    /// Evaluate batches on one thread
    #[arg(long, global = true)]
    sequential: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run criteria on a state file and print their reports as JSON
    Analyze {
        #[arg(long)]
        state: PathBuf,
        #[arg(long, default_value = "ppt,chsh,renyi2")]
        criteria: String,
    },
    /// Tabulate criteria along a state family
    Scan {
        #[command(flatten)]
        family: FamilyArgs,
        /// Grid `start:stop:step` (inclusive) or a single value
        #[arg(long)]
        x: String,
        #[arg(long, default_value = "ppt,chsh,renyi2")]
        criteria: String,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Locate where a criterion starts detecting along a family
    Threshold {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long)]
        criterion: String,
        /// Bracket width at which bisection stops
        #[arg(long, default_value_t = BISECTION_TOL)]
        tol: f64,
    },
    /// Search for a mixture of product states reproducing the state
    Decompose {
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        restarts: Option<usize>,
        #[arg(long)]
        iterations: Option<usize>,
        /// Frobenius residual accepted as a match
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Terms per restart; defaults to (dA·dB)²
        #[arg(long)]
        max_terms: Option<usize>,
    },
    /// Report Hermiticity, trace and positivity defects of a state file
    Validate {
        #[arg(long)]
        state: PathBuf,
    },
    /// Write a family member as a state file
    State {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long)]
        x: f64,
        /// Output path; stdout if omitted
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct FamilyArgs {
    /// werner, gisin or singlet_polarized
    #[arg(long)]
    family: String,
    /// Gisin amplitude of |01⟩ as `re[,im]`
    #[arg(long, allow_hyphen_values = true, value_parser = parse_complex)]
    a: Option<Complex64>,
    /// Gisin amplitude of |10⟩ as `re[,im]`
    #[arg(long, allow_hyphen_values = true, value_parser = parse_complex)]
    b: Option<Complex64>,
}

impl FamilyArgs {
    fn family(&self) -> Result<Family> {
        if self.family != "gisin" && (self.a.is_some() || self.b.is_some()) {
            bail!("--a/--b only apply to the gisin family");
        }
        Ok(Family::from_name(&self.family, self.a, self.b)?)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

fn parse_complex(s: &str) -> Result<Complex64, String> {
    let parts: Vec<&str> = s.split(',').collect();
    let num = |p: &str| p.trim().parse::<f64>().map_err(|_| format!("`{s}` is not `re[,im]`"));
    match parts[..] {
        [re] => Ok(Complex64::new(num(re)?, 0.0)),
        [re, im] => Ok(Complex64::new(num(re)?, num(im)?)),
        _ => Err(format!("`{s}` is not `re[,im]`")),
    }
}

/// Outcome of a subcommand that ran to completion.
enum Done {
    Ok,
    NotFound,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let exec = if cli.sequential {
        Execution::Sequential
    } else {
        Execution::default()
    };
    match run(cli.command, exec) {
        Ok(Done::Ok) => ExitCode::SUCCESS,
        Ok(Done::NotFound) => ExitCode::from(EXIT_NOT_FOUND),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}

fn run(command: Command, exec: Execution) -> Result<Done> {
    match command {
        Command::Analyze { state, criteria } => analyze(&state, &criteria),
        Command::Scan {
            family,
            x,
            criteria,
            format,
        } => {
            let family = family.family()?;
            let grid: Grid = x.parse()?;
            let criteria = parse_criteria(&criteria)?;
            let rows = sweep::scan(&family, &grid.points(), &criteria, exec)?;
            match format {
                Format::Csv => emit(&sweep::to_csv(&criteria, &rows)),
                Format::Json => emit(&(sweep::to_json(&rows) + "\n")),
            }
        }
        Command::Threshold { family, criterion, tol } => {
            let criterion: Criterion = criterion.parse()?;
            let result = find_threshold(&family.family()?, criterion, tol)?;
            print_json(&result)
        }
        Command::Decompose {
            state,
            restarts,
            iterations,
            tol,
            seed,
            max_terms,
        } => {
            let defaults = SearchConfig::default();
            let cfg = SearchConfig {
                max_terms: max_terms.or(defaults.max_terms),
                restarts: restarts.unwrap_or(defaults.restarts),
                iterations: iterations.unwrap_or(defaults.iterations),
                residual_tol: tol.unwrap_or(defaults.residual_tol),
                seed: seed.unwrap_or(defaults.seed),
            };
            decompose(&state, &cfg, exec)
        }
        Command::Validate { state } => validate(&state),
        Command::State { family, x, out } => {
            let rho = family.family()?.state(x)?;
            let file = StateFile::from_state(&rho);
            match out {
                Some(path) => {
                    file.write(&path)?;
                    Ok(Done::Ok)
                }
                None => emit(&(file.to_json() + "\n")),
            }
        }
    }
}

fn emit(text: &str) -> Result<Done> {
    let mut out = std::io::stdout().lock();
    out.write_all(text.as_bytes())?;
    out.flush()?;
    Ok(Done::Ok)
}

fn print_json<T: Serialize>(value: &T) -> Result<Done> {
    emit(&(serde_json::to_string_pretty(value)? + "\n"))
}

fn load(path: &PathBuf) -> Result<StateFile> {
    StateFile::read(path).with_context(|| format!("reading {}", path.display()))
}

fn analyze(path: &PathBuf, criteria: &str) -> Result<Done> {
    let criteria = parse_criteria(criteria)?;
    let rho = load(path)?.into_state().context("state failed validation")?;
    let reports = criteria
        .iter()
        .map(|c| c.evaluate(&rho))
        .collect::<Result<Vec<_>, _>>()?;
    print_json(&reports)
}

#[derive(Serialize)]
struct ValidateOutput {
    dims: [usize; 2],
    hermitian_defect: f64,
    trace_defect: f64,
    min_eigenvalue: f64,
    valid: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

fn validate(path: &PathBuf) -> Result<Done> {
    let file = load(path)?;
    let report = file.report()?;
    let check = report.check(file.matrix.trace().re);
    let out = ValidateOutput {
        dims: [file.dims.0, file.dims.1],
        hermitian_defect: report.hermitian_defect,
        trace_defect: report.trace_defect,
        min_eigenvalue: report.min_eigenvalue,
        valid: check.is_ok(),
        error: check.as_ref().err().map(|e| e.to_string()),
    };
    print_json(&out)?;
    check?;
    Ok(Done::Ok)
}

type RawMatrix = Vec<Vec<[Box<RawValue>; 2]>>;

fn raw_matrix(m: &ComplexMatrix) -> RawMatrix {
    (0..m.dim())
        .map(|i| (0..m.dim()).map(|j| [number(m[(i, j)].re), number(m[(i, j)].im)]).collect())
        .collect()
}

#[derive(Serialize)]
struct Found {
    found: bool,
    restart: usize,
    residual: Box<RawValue>,
    weights: Vec<Box<RawValue>>,
    factors_a: Vec<RawMatrix>,
    factors_b: Vec<RawMatrix>,
}

#[derive(Serialize)]
struct NotFound {
    found: bool,
    restarts: usize,
    best_residual: f64,
}

fn decompose(path: &PathBuf, cfg: &SearchConfig, exec: Execution) -> Result<Done> {
    let rho = load(path)?.into_state().context("state failed validation")?;
    let outcome = search(&rho, cfg, exec)?;
    match (outcome.decomposition, outcome.restart) {
        (Some(d), Some(restart)) => {
            print_json(&Found {
                found: true,
                restart,
                residual: number(d.residual),
                weights: d.weights.iter().map(|&w| number(w)).collect(),
                factors_a: d.factors_a.iter().map(raw_matrix).collect(),
                factors_b: d.factors_b.iter().map(raw_matrix).collect(),
            })?;
            Ok(Done::Ok)
        }
        _ => {
            print_json(&NotFound {
                found: false,
                restarts: cfg.restarts,
                best_residual: outcome.best_residual,
            })?;
            Ok(Done::NotFound)
        }
    }
}
