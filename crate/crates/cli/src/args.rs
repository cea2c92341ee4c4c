use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Discrete-time quantum walk simulator and long-time theory.
///
/// Angles are in radians; pass π numerically (e.g. 1.5707963267948966).
#[derive(Debug, Parser)]
#[command(name = "qwalk", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evolve one initial qubit and write its final distribution and moment series.
    Simulate(SimulateArgs),
    /// Average the walk over a grid of initial qubits.
    Ensemble(EnsembleArgs),
    /// Evaluate the long-time coefficients.
    Analytic(AnalyticArgs),
    /// Fit A + B·t + C·t² to a variance series.
    Fit(FitArgs),
    /// Tabulate the dispersion velocity over a grid of initial qubits.
    Surface(SurfaceArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StateKind {
    Local,
    Gaussian,
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodKind {
    Quadrature,
    FitTable,
}

#[derive(Debug, Clone, Args)]
pub struct WalkArgs {
    /// Initial position profile.
    #[arg(long, value_enum)]
    pub state: StateKind,

    /// Gaussian width in lattice sites (gaussian only).
    #[arg(long)]
    pub sigma0: Option<f64>,

    /// Odd box width in sites (uniform only) [default: 2001].
    #[arg(long)]
    pub box_width: Option<usize>,

    /// Coin parameters `q,theta,phi`.
    #[arg(long, value_parser = parse_triple, default_value = "0.5,0,0", allow_hyphen_values = true)]
    pub coin: (f64, f64, f64),

    /// Number of time steps.
    #[arg(long)]
    pub steps: usize,

    /// Record moments every N steps (the last step is always recorded).
    #[arg(long, default_value_t = 1)]
    pub record_every: usize,

    /// Output directory, created if missing.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub walk: WalkArgs,

    /// Polar Bloch angle α ∈ [0, π].
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub alpha: f64,

    /// Azimuthal Bloch angle β.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub beta: f64,
}

#[derive(Debug, Clone, Args)]
pub struct EnsembleArgs {
    #[command(flatten)]
    pub walk: WalkArgs,

    /// Spacing of the (α, β) grid.
    #[arg(long, default_value_t = 0.1)]
    pub grid_step: f64,

    /// Worker threads [default: available parallelism].
    #[arg(long)]
    pub workers: Option<usize>,

    /// Fraction of the time range discarded before fitting.
    #[arg(long, default_value_t = qwalk::numerics::DEFAULT_BURN_IN)]
    pub burn_in: f64,
}

#[derive(Debug, Clone, Args)]
pub struct TheoryArgs {
    /// Initial position family.
    #[arg(long, value_enum)]
    pub model: StateKind,

    /// Gaussian width (gaussian only).
    #[arg(long)]
    pub sigma0: Option<f64>,

    /// Coin phases `theta,phi` of a balanced coin.
    #[arg(long, value_parser = parse_pair, default_value = "0,0", allow_hyphen_values = true)]
    pub coin_phases: (f64, f64),

    /// How the Gaussian spectral integral is obtained.
    #[arg(long, value_enum, default_value_t = MethodKind::Quadrature)]
    pub method: MethodKind,

    /// Fit-table JSON replacing the built-in table.
    #[arg(long)]
    pub fit_table: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct AnalyticArgs {
    #[command(flatten)]
    pub theory: TheoryArgs,

    /// Polar Bloch angle α ∈ [0, π].
    #[arg(long, conflicts_with = "spin_averaged", allow_hyphen_values = true)]
    pub alpha: Option<f64>,

    /// Azimuthal Bloch angle β.
    #[arg(long, conflicts_with = "spin_averaged", allow_hyphen_values = true)]
    pub beta: Option<f64>,

    /// Average over all initial qubits instead of one (α, β).
    #[arg(long)]
    pub spin_averaged: bool,
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    /// CSV with columns `t` and `variance`; `#` lines are ignored.
    #[arg(long)]
    pub input: PathBuf,

    /// Fraction of the time range discarded before fitting.
    #[arg(long, default_value_t = qwalk::numerics::DEFAULT_BURN_IN)]
    pub burn_in: f64,
}

#[derive(Debug, Clone, Args)]
pub struct SurfaceArgs {
    #[command(flatten)]
    pub theory: TheoryArgs,

    /// Spacing of the (α, β) grid.
    #[arg(long, default_value_t = 0.1)]
    pub grid_step: f64,

    /// Output directory, created if missing.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

fn parse_list(s: &str, n: usize) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != n {
        return Err(format!("expected {n} comma-separated numbers, got {:?}", s));
    }
    parts
        .iter()
        .map(|p| p.parse::<f64>().map_err(|e| format!("{p:?}: {e}")))
        .collect()
}

fn parse_triple(s: &str) -> Result<(f64, f64, f64), String> {
    let v = parse_list(s, 3)?;
    Ok((v[0], v[1], v[2]))
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let v = parse_list(s, 2)?;
    Ok((v[0], v[1]))
}
