//! `qwalk` command-line front end.
//!
//! Exit codes: 0 success, 1 numerical failure, 2 usage error.

mod args;
mod output;

use std::fmt;
use std::path::Path;
use std::process::ExitCode;

use clap::Parser;
use serde::Serialize;

use qwalk::analytic::{
    avg_variance_coeff, long_time_variance_coeff, velocity_surface, AnalyticError, FitTable,
    GaussianMethod, Model,
};
use qwalk::model::{build_initial_state, CoinParams, InitialDistribution, SpinGrid, SpinState};
use qwalk::numerics::{quadratic_fit, FitError, FitResult};
use qwalk::observables::{
    ensemble_average, probability_distribution, record_walk, DistributionSnapshot, EnsembleOptions,
    Side, VarianceSeries,
};

use args::{
    AnalyticArgs, Cli, Command, EnsembleArgs, FitArgs, MethodKind, SimulateArgs, StateKind,
    SurfaceArgs, TheoryArgs, WalkArgs,
};
use output::{ensure_dir, header_lines, num, to_json, write_csv, Provenance};

const DEFAULT_BOX_WIDTH: usize = 2001;

#[derive(Debug)]
enum CliError {
    Usage(String),
    Numerical(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numerical(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Numerical(m) => write!(f, "error: {m}"),
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

// Invalid parameters are the caller's mistake; everything else is numerical.
impl From<qwalk::Error> for CliError {
    fn from(e: qwalk::Error) -> Self {
        match e {
            qwalk::Error::Model(_) => CliError::Usage(e.to_string()),
            qwalk::Error::Fit(FitError::InvalidBurnIn(_)) => CliError::Usage(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<qwalk::model::ModelError> for CliError {
    fn from(e: qwalk::model::ModelError) -> Self {
        qwalk::Error::from(e).into()
    }
}

impl From<AnalyticError> for CliError {
    fn from(e: AnalyticError) -> Self {
        qwalk::Error::from(e).into()
    }
}

impl From<FitError> for CliError {
    fn from(e: FitError) -> Self {
        qwalk::Error::from(e).into()
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Numerical(format!("I/O failure: {e}"))
    }
}

fn invocation() -> String {
    std::iter::once("qwalk".to_string())
        .chain(std::env::args().skip(1))
        .collect::<Vec<_>>()
        .join(" ")
}

fn distribution(walk: &WalkArgs) -> Result<InitialDistribution, CliError> {
    let dist = match walk.state {
        StateKind::Local => {
            if walk.sigma0.is_some() || walk.box_width.is_some() {
                return Err(usage(
                    "--sigma0 and --box-width do not apply to --state local",
                ));
            }
            InitialDistribution::Local
        }
        StateKind::Gaussian => {
            if walk.box_width.is_some() {
                return Err(usage("--box-width applies only to --state uniform"));
            }
            let sigma0 = walk
                .sigma0
                .ok_or_else(|| usage("--state gaussian requires --sigma0"))?;
            InitialDistribution::gaussian(sigma0)?
        }
        StateKind::Uniform => {
            if walk.sigma0.is_some() {
                return Err(usage("--sigma0 applies only to --state gaussian"));
            }
            InitialDistribution::uniform_box(walk.box_width.unwrap_or(DEFAULT_BOX_WIDTH))?
        }
    };
    if walk.record_every == 0 {
        return Err(usage("--record-every must be at least 1"));
    }
    Ok(dist)
}

fn coin(walk: &WalkArgs) -> Result<CoinParams, CliError> {
    let (q, theta, phi) = walk.coin;
    Ok(CoinParams::new(q, theta, phi)?)
}

fn distribution_rows(snap: &DistributionSnapshot) -> Vec<Vec<String>> {
    snap.records()
        .map(|r| vec![r.j.to_string(), num(r.p_up), num(r.p_down), num(r.p_total)])
        .collect()
}

fn variance_rows(series: &VarianceSeries) -> Vec<Vec<String>> {
    series
        .points
        .iter()
        .map(|p| {
            vec![
                p.t.to_string(),
                num(p.mean),
                num(p.second_moment),
                num(p.variance),
            ]
        })
        .collect()
}

const DISTRIBUTION_COLUMNS: [&str; 4] = ["j", "p_up", "p_down", "p_total"];
const VARIANCE_COLUMNS: [&str; 4] = ["t", "mean", "second_moment", "variance"];

fn simulate(args: &SimulateArgs) -> Result<(), CliError> {
    let dist = distribution(&args.walk)?;
    let coin = coin(&args.walk)?;
    let spin = SpinState::new(args.alpha, args.beta)?;
    let steps = args.walk.steps;
    let state = build_initial_state(&dist, &spin, steps.max(1))?;
    let (state, series) = record_walk(state, &coin, steps, args.walk.record_every)?;
    let snap = probability_distribution(&state);

    let out = &args.walk.out;
    ensure_dir(out)?;
    let header = header_lines(&invocation());
    write_csv(
        &out.join("distribution.csv"),
        &header,
        &DISTRIBUTION_COLUMNS,
        distribution_rows(&snap),
    )?;
    write_csv(
        &out.join("variance.csv"),
        &header,
        &VARIANCE_COLUMNS,
        variance_rows(&series),
    )?;
    Ok(())
}

#[derive(Serialize)]
struct SideRatios {
    negative: Option<f64>,
    positive: Option<f64>,
}

#[derive(Serialize)]
struct EnsembleSummary {
    provenance: Provenance,
    grid_step: f64,
    grid_size: usize,
    steps: usize,
    burn_in: f64,
    fit: FitResult,
    side_ratios: SideRatios,
}

fn ensemble(args: &EnsembleArgs) -> Result<(), CliError> {
    let dist = distribution(&args.walk)?;
    let coin = coin(&args.walk)?;
    if args.workers == Some(0) {
        return Err(usage("--workers must be at least 1"));
    }
    let grid = SpinGrid::new(args.grid_step)?;
    let opts = EnsembleOptions {
        steps: args.walk.steps,
        record_every: args.walk.record_every,
        workers: args.workers,
    };
    let avg = ensemble_average(&dist, &coin, &grid.spins(), &opts)?;

    let out = &args.walk.out;
    ensure_dir(out)?;
    let invocation = invocation();
    let header = header_lines(&invocation);
    write_csv(
        &out.join("avg_distribution.csv"),
        &header,
        &DISTRIBUTION_COLUMNS,
        distribution_rows(&avg.distribution),
    )?;
    write_csv(
        &out.join("avg_variance.csv"),
        &header,
        &VARIANCE_COLUMNS,
        variance_rows(&avg.variance),
    )?;

    let fit = quadratic_fit(&avg.variance.fit_points(), args.burn_in)?;
    let summary = EnsembleSummary {
        provenance: Provenance::new(&invocation),
        grid_step: args.grid_step,
        grid_size: avg.members,
        steps: args.walk.steps,
        burn_in: args.burn_in,
        fit,
        side_ratios: SideRatios {
            negative: avg.distribution.side_ratio(Side::Negative).ok(),
            positive: avg.distribution.side_ratio(Side::Positive).ok(),
        },
    };
    std::fs::write(out.join("summary.json"), to_json(&summary))?;
    Ok(())
}

fn load_table(path: Option<&Path>) -> Result<FitTable, CliError> {
    match path {
        None => Ok(FitTable::published()),
        Some(p) => {
            let text =
                std::fs::read_to_string(p).map_err(|e| usage(format!("{}: {e}", p.display())))?;
            FitTable::from_json_str(&text).map_err(|e| usage(format!("{}: {e}", p.display())))
        }
    }
}

fn theory_model(args: &TheoryArgs) -> Result<(Model, FitTable), CliError> {
    if args.fit_table.is_some() && args.method != MethodKind::FitTable {
        return Err(usage("--fit-table requires --method fit-table"));
    }
    let model = match args.model {
        StateKind::Gaussian => {
            let sigma0 = args
                .sigma0
                .ok_or_else(|| usage("--model gaussian requires --sigma0"))?;
            if !(sigma0.is_finite() && sigma0 > 0.0) {
                return Err(usage(format!("--sigma0 must be positive, got {sigma0}")));
            }
            if !FitTable::is_within_validity(sigma0) {
                eprintln!("warning: sigma0 = {sigma0} < 1 is outside the validated range; results are extrapolated");
            }
            let method = match args.method {
                MethodKind::Quadrature => GaussianMethod::Quadrature,
                MethodKind::FitTable => GaussianMethod::FitTable,
            };
            Model::Gaussian { sigma0, method }
        }
        other => {
            if args.sigma0.is_some() {
                return Err(usage("--sigma0 applies only to --model gaussian"));
            }
            if args.method == MethodKind::FitTable {
                return Err(usage("--method fit-table applies only to --model gaussian"));
            }
            if other == StateKind::Local {
                Model::Local
            } else {
                Model::UniformLimit
            }
        }
    };
    Ok((model, load_table(args.fit_table.as_deref())?))
}

fn balanced_coin(phases: (f64, f64)) -> Result<CoinParams, CliError> {
    Ok(CoinParams::balanced(phases.0, phases.1)?)
}

#[derive(Serialize)]
struct AnalyticReport {
    #[serde(rename = "I")]
    integral: f64,
    mean_coeff: f64,
    var_coeff: f64,
    velocity: f64,
}

fn analytic(args: &AnalyticArgs) -> Result<(), CliError> {
    let (model, table) = theory_model(&args.theory)?;
    let coin = balanced_coin(args.theory.coin_phases)?;
    let integral = model.integral(coin.delta(), &table)?;
    let report = if args.spin_averaged {
        // the drift averages to zero over the sphere
        let var_coeff = avg_variance_coeff(&model, coin.delta(), &table)?;
        AnalyticReport {
            integral,
            mean_coeff: 0.0,
            var_coeff,
            velocity: var_coeff.sqrt(),
        }
    } else {
        let spin = SpinState::new(args.alpha.unwrap_or(0.0), args.beta.unwrap_or(0.0))?;
        let law = long_time_variance_coeff(integral, &spin, coin.theta());
        AnalyticReport {
            integral,
            mean_coeff: law.mean_coeff,
            var_coeff: law.var_coeff,
            velocity: law.velocity,
        }
    };
    print!("{}", to_json(&report));
    Ok(())
}

fn read_variance_csv(path: &Path) -> Result<Vec<(f64, f64)>, CliError> {
    let bad = |m: String| usage(format!("{}: {m}", path.display()));
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| bad(e.to_string()))?;
    let headers = reader.headers().map_err(|e| bad(e.to_string()))?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| bad(format!("missing column {name:?}")))
    };
    let (ti, vi) = (column("t")?, column("variance")?);
    let mut points = Vec::new();
    for (n, record) in reader.records().enumerate() {
        let record = record.map_err(|e| bad(e.to_string()))?;
        let field = |i: usize| -> Result<f64, CliError> {
            let raw = record.get(i).unwrap_or("");
            raw.parse::<f64>()
                .map_err(|_| bad(format!("row {}: cannot parse {raw:?} as a number", n + 1)))
        };
        points.push((field(ti)?, field(vi)?));
    }
    Ok(points)
}

fn fit(args: &FitArgs) -> Result<(), CliError> {
    let points = read_variance_csv(&args.input)?;
    let result = quadratic_fit(&points, args.burn_in)?;
    print!("{}", to_json(&result));
    Ok(())
}

fn surface(args: &SurfaceArgs) -> Result<(), CliError> {
    let (model, table) = theory_model(&args.theory)?;
    let coin = balanced_coin(args.theory.coin_phases)?;
    let grid = SpinGrid::new(args.grid_step)?;
    let points = velocity_surface(&model, &coin, &grid, &table)?;
    ensure_dir(&args.out)?;
    let rows = points
        .iter()
        .map(|p| vec![num(p.alpha), num(p.beta), num(p.velocity)]);
    write_csv(
        &args.out.join("surface.csv"),
        &header_lines(&invocation()),
        &["alpha", "beta", "velocity"],
        rows,
    )?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Ensemble(a) => ensemble(a),
        Command::Analytic(a) => analytic(a),
        Command::Fit(a) => fit(a),
        Command::Surface(a) => surface(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.code())
        }
    }
}
