//! `tops`: batch front-end for dyadic grids with tops, Alpert bases,
//! expansions, invariant checks and bilinear forms.
//!
//! Exit status is 0 when every requested check passes, 1 when a check
//! misses its tolerance and 2 for unreadable inputs or violated
//! preconditions. Worker threads follow `RAYON_NUM_THREADS`.

mod commands;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;

use tops_core::io::{FunctionDoc, GridDoc, KernelDoc, MeasureDoc, SystemDoc, SCHEMA_VERSION};
use tops_core::{GridSpec, Measure, MomentSystem, PiecewisePolyFn};

#[derive(Parser)]
#[command(name = "tops", version, about = "Dyadic grids with tops, weighted Alpert wavelets and two-weight bilinear forms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the tops of a grid and check that they tile space.
    Tops(TopsArgs),
    /// Build the Alpert bases of every cube in a scale window.
    Basis(BasisArgs),
    /// Expand a function into a coefficient tree.
    Expand(ExpandArgs),
    /// Run the invariant suite on random probes.
    Verify(VerifyArgs),
    /// Evaluate a bilinear form directly, by the four-term split and by tops.
    Bilinear(BilinearArgs),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    grid: PathBuf,
    /// Output directory, created if missing.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct SystemArgs {
    /// Monomials of degree below K.
    #[arg(long)]
    kappa: Option<usize>,
    /// JSON file `{"kappa": K}` or `{"id": "..."}`.
    #[arg(long)]
    system: Option<PathBuf>,
}

#[derive(Args)]
struct TopsArgs {
    #[command(flatten)]
    common: Common,
    /// Number of tiling sample points.
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    /// Side `2^m` of the sampling box centered at the origin.
    #[arg(long, default_value_t = 5)]
    sample_scale: i64,
}

#[derive(Args)]
struct BasisArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    measure: PathBuf,
    #[command(flatten)]
    system: SystemArgs,
    /// `fine:coarse`, scales of the cubes carrying bases.
    #[arg(long, allow_hyphen_values = true)]
    window: Window,
}

#[derive(Args)]
struct ExpandArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    measure: PathBuf,
    #[arg(long)]
    function: PathBuf,
    #[command(flatten)]
    system: SystemArgs,
    #[arg(long, allow_hyphen_values = true)]
    window: Window,
    /// Allowed relative Parseval gap.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    measure: PathBuf,
    /// Extra probe besides the random ones.
    #[arg(long)]
    function: Option<PathBuf>,
    #[command(flatten)]
    system: SystemArgs,
    #[arg(long, allow_hyphen_values = true)]
    window: Window,
    /// Tolerance of the identity checks.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 5)]
    probes: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct BilinearArgs {
    #[command(flatten)]
    common: Common,
    /// `sigma` then `omega`.
    #[arg(long, num_args = 1, required = true)]
    measure: Vec<PathBuf>,
    /// `f` then `g`.
    #[arg(long, num_args = 1, required = true)]
    function: Vec<PathBuf>,
    #[arg(long)]
    kernel: PathBuf,
    #[command(flatten)]
    system: SystemArgs,
    /// `fine:N`, finest wavelet scale and split scale.
    #[arg(long, allow_hyphen_values = true)]
    window: Window,
    /// Allowed disagreement relative to the absolute form.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
}

#[derive(Clone, Copy, Debug)]
struct Window {
    fine: i64,
    coarse: i64,
}

impl std::str::FromStr for Window {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (a, b) = s.split_once(':').ok_or_else(|| format!("window `{s}` is not of the form mmin:mmax"))?;
        let parse = |t: &str| t.trim().parse::<i64>().map_err(|_| format!("window bound `{t}` is not an integer"));
        let (fine, coarse) = (parse(a)?, parse(b)?);
        if fine >= coarse {
            return Err(format!("window {fine}:{coarse} is not well ordered"));
        }
        Ok(Window { fine, coarse })
    }
}

/// Failure of a run, mapped onto the exit status.
#[derive(Debug)]
enum Failure {
    /// Unreadable input or violated precondition.
    Input(String),
    /// A check missed its tolerance.
    Tolerance(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 2,
            Failure::Tolerance(_) => 1,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Input(m) => write!(f, "error: {m}"),
            Failure::Tolerance(m) => write!(f, "check failed: {m}"),
        }
    }
}

fn input(e: impl fmt::Display) -> Failure {
    Failure::Input(e.to_string())
}

fn read_doc<T: DeserializeOwned>(path: &Path, what: &str) -> Result<T, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Input(format!("cannot read {what} {}: {e}", path.display())))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| Failure::Input(format!("{what} {}: {e}", path.display())))?;
    if let Some(v) = value.get("schema") {
        if v.as_u64() != Some(u64::from(SCHEMA_VERSION)) {
            return Err(Failure::Input(format!("{what} {}: unsupported schema {v}", path.display())));
        }
    }
    serde_json::from_value(value).map_err(|e| Failure::Input(format!("{what} {}: {e}", path.display())))
}

fn load_grid(path: &Path) -> Result<GridSpec, Failure> {
    read_doc::<GridDoc>(path, "grid")?
        .build()
        .map_err(|e| Failure::Input(format!("grid {}: {e}", path.display())))
}

fn load_measure(path: &Path, grid: &GridSpec) -> Result<Measure, Failure> {
    let mu = read_doc::<MeasureDoc>(path, "measure")?
        .build()
        .map_err(|e| Failure::Input(format!("measure {}: {e}", path.display())))?;
    if mu.dimension() != grid.dimension() {
        return Err(Failure::Input(format!(
            "measure {} has dimension {}, the grid has {}",
            path.display(),
            mu.dimension(),
            grid.dimension()
        )));
    }
    Ok(mu)
}

fn load_system(args: &SystemArgs, dim: usize) -> Result<MomentSystem, Failure> {
    match (&args.kappa, &args.system) {
        (Some(k), _) => MomentSystem::monomials(dim, *k).map_err(input),
        (None, Some(path)) => read_doc::<SystemDoc>(path, "system")?
            .build(dim)
            .map_err(|e| Failure::Input(format!("system {}: {e}", path.display()))),
        (None, None) => Err(Failure::Input("one of --kappa or --system is required".into())),
    }
}

fn load_function(path: &Path, sys: &MomentSystem) -> Result<PiecewisePolyFn, Failure> {
    read_doc::<FunctionDoc>(path, "function")?
        .build(sys)
        .map_err(|e| Failure::Input(format!("function {}: {e}", path.display())))
}

fn load_kernel(path: &Path) -> Result<tops_core::bilinear::KernelSpec, Failure> {
    read_doc::<KernelDoc>(path, "kernel")?
        .build()
        .map_err(|e| Failure::Input(format!("kernel {}: {e}", path.display())))
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Tops(a) => commands::tops(&a),
        Command::Basis(a) => commands::basis(&a),
        Command::Expand(a) => commands::expand(&a),
        Command::Verify(a) => commands::verify(&a),
        Command::Bilinear(a) => commands::bilinear(&a),
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
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{f}");
            ExitCode::from(f.code())
        }
    }
}
