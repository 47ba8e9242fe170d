//! Command-line workflows behind the `mvar` binary.
//!
//! JSON results go to `--out` (written atomically) or to stdout when no path
//! is given. Human-readable summaries go to stdout for `fit` and `compare` and
//! are suppressed by `--quiet`. Row indices on the command line are zero-based.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::{MvarError, Result};
use crate::estimation::{candidate_grid, em_fit, select_order, Criterion, EmOptions, FitReport, InitStrategy};
use crate::forecasting::{predictive_h_step_mc, predictive_one_step, predictive_two_step};
use crate::io::acf::acf_ccf;
use crate::io::compare::{compare_models, model_label};
use crate::io::data::{default_names, load_series, write_series_csv, InputKind};
use crate::io::json::{MixtureMvJson, MomentsJson, PortfolioJson, RiskInput, RiskJson};
use crate::io::model_file::{write_atomic, ModelFile, Provenance};
use crate::model::{is_stable, ForecastOrigin, ModelSpec, MvarParameters, SeriesMatrix};
use crate::portfolio::{horizon_portfolio, project, MixtureNormal1D, Objective};
use crate::risk::{density_grid, var_es};
use crate::rng::RNG_ALGORITHM;
use crate::simulation::{simulate, SimulationConfig, DEFAULT_BURN_IN};

/// Number of points in density-grid CSVs.
pub const GRID_POINTS: usize = 512;

/// Exit code for a fit that stopped at the iteration cap.
pub const EXIT_NOT_CONVERGED: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "mvar", version, about = "Mixture vector autoregressive models")]
pub struct Cli {
    /// Seed for EM starts, simulation and Monte Carlo.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Output file; JSON outputs go to stdout when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Suppress summaries.
    #[arg(long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a path from a model file; writes CSV plus a config JSON.
    Simulate(SimulateArgs),
    /// Fit one specification or sweep a grid of them.
    Fit(FitArgs),
    /// Predictive distribution at a horizon.
    Forecast(ForecastArgs),
    /// Markowitz portfolio from conditional moments.
    Portfolio(PortfolioArgs),
    /// VaR and expected shortfall of a return mixture.
    Risk(RiskArgs),
    /// Out-of-sample comparison of several specifications.
    Compare(CompareArgs),
    /// Sample auto- and cross-correlations.
    Acf(AcfArgs),
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// CSV with a `date` column followed by one column per asset.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_enum, default_value_t = InputKind::Returns)]
    pub input_kind: InputKind,
}

#[derive(Debug, Args)]
pub struct EmArgs {
    #[arg(long, default_value_t = 10)]
    pub starts: usize,
    #[arg(long, default_value_t = 500)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
}

impl EmArgs {
    fn options(&self) -> EmOptions {
        EmOptions { max_iter: self.max_iter, tol: self.tol }
    }

    fn init(&self, seed: u64) -> InitStrategy {
        InitStrategy::RandomStarts { starts: self.starts, seed }
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(short, long)]
    pub n: usize,
    #[arg(long, default_value_t = DEFAULT_BURN_IN)]
    pub burn_in: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CriterionArg {
    Aic,
    Bic,
}

impl CriterionArg {
    fn label(self) -> &'static str {
        match self {
            CriterionArg::Aic => "AIC",
            CriterionArg::Bic => "BIC",
        }
    }
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Component orders, e.g. `2,1` for MVAR(2;2,1).
    #[arg(long, value_delimiter = ',', required_unless_present = "sweep_g")]
    pub orders: Vec<usize>,
    /// Component counts to sweep.
    #[arg(long, value_delimiter = ',', requires = "sweep_p", conflicts_with = "orders")]
    pub sweep_g: Vec<usize>,
    /// Common orders to sweep.
    #[arg(long, value_delimiter = ',', requires = "sweep_g")]
    pub sweep_p: Vec<usize>,
    #[arg(long, value_enum, default_value_t = CriterionArg::Bic)]
    pub criterion: CriterionArg,
    #[command(flatten)]
    pub em: EmArgs,
    /// Drop this many trailing rows before fitting.
    #[arg(long, default_value_t = 0)]
    pub holdout: usize,
    /// Record the creation time in the provenance block.
    #[arg(long)]
    pub stamp: bool,
}

#[derive(Debug, Args)]
pub struct OriginArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[command(flatten)]
    pub data: DataArgs,
    /// Row of the last observation used; defaults to the final row.
    #[arg(long)]
    pub origin: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ForecastArgs {
    #[command(flatten)]
    pub origin: OriginArgs,
    #[arg(long, default_value_t = 1)]
    pub horizon: usize,
    /// Monte Carlo paths for horizons beyond 2.
    #[arg(long, default_value_t = 100_000)]
    pub paths: usize,
    /// Write the marginal density of `--asset` as `x,density` CSV.
    #[arg(long)]
    pub grid: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub asset: usize,
}

#[derive(Debug, Args)]
pub struct PortfolioArgs {
    #[command(flatten)]
    pub origin: OriginArgs,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub horizon: u8,
    /// Target expected return for an efficient portfolio.
    #[arg(long, conflicts_with = "mvp", required_unless_present = "mvp", allow_hyphen_values = true)]
    pub target: Option<f64>,
    /// Minimum variance portfolio.
    #[arg(long)]
    pub mvp: bool,
    /// Write the portfolio return density as `x,density` CSV.
    #[arg(long)]
    pub grid: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RiskArgs {
    /// Return mixture JSON, or the output of `portfolio`.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 0.95)]
    pub alpha: f64,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// One specification per flag as component orders, e.g. `--models 3,2,1 --models 3`.
    #[arg(long = "models", required = true)]
    pub models: Vec<String>,
    #[arg(long, default_value_t = 2)]
    pub holdout: usize,
    #[arg(long, default_value_t = 0.95)]
    pub alpha: f64,
    #[command(flatten)]
    pub em: EmArgs,
}

#[derive(Debug, Args)]
pub struct AcfArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, default_value_t = 20)]
    pub max_lag: usize,
}

/// Runs one command and returns the process exit code.
pub fn run(cli: &Cli) -> Result<u8> {
    run_with(cli, &mut Stdout(std::io::stdout().lock()))
}

/// Stdout that treats a closed pipe (`mvar ... | head`) as a sink.
struct Stdout<'a>(std::io::StdoutLock<'a>);

impl Write for Stdout<'_> {
    fn write(&mut self, buf: &[u8]) -> std::io::Result<usize> {
        match self.0.write(buf) {
            Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(buf.len()),
            r => r,
        }
    }

    fn flush(&mut self) -> std::io::Result<()> {
        match self.0.flush() {
            Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
            r => r,
        }
    }
}

/// As [`run`], writing stdout output to `console`.
pub fn run_with(cli: &Cli, console: &mut dyn Write) -> Result<u8> {
    let mut ctx = Context { out: cli.out.as_deref(), quiet: cli.quiet, seed: cli.seed, console };
    match &cli.command {
        Command::Simulate(a) => ctx.simulate(a),
        Command::Fit(a) => ctx.fit(a),
        Command::Forecast(a) => ctx.forecast(a),
        Command::Portfolio(a) => ctx.portfolio(a),
        Command::Risk(a) => ctx.risk(a),
        Command::Compare(a) => ctx.compare(a),
        Command::Acf(a) => ctx.acf(a),
    }
}

struct Context<'a> {
    out: Option<&'a Path>,
    quiet: bool,
    seed: u64,
    console: &'a mut dyn Write,
}

#[derive(Serialize)]
struct SimulationJson<'a> {
    n: usize,
    burn_in: usize,
    seed: u64,
    rng: &'a str,
    model: &'a ModelFile,
}

#[derive(Serialize)]
struct McJson {
    horizon: usize,
    origin: usize,
    paths: usize,
    seed: u64,
    moments: MomentsJson,
}

#[derive(Serialize)]
struct SweepRow {
    rank: usize,
    model: String,
    score: Option<f64>,
    error: Option<String>,
}

impl<'a> Context<'a> {
    fn required_out(&self) -> Result<&'a Path> {
        self.out.ok_or_else(|| MvarError::Io("this command needs --out".into()))
    }

    fn emit_json<T: Serialize>(&mut self, value: &T) -> Result<()> {
        let text = serde_json::to_string_pretty(value)?;
        match self.out {
            Some(path) => write_atomic(path, text.as_bytes()),
            None => writeln!(self.console, "{text}").map_err(Into::into),
        }
    }

    fn say(&mut self, text: &str) -> Result<()> {
        if !self.quiet {
            writeln!(self.console, "{text}")?;
        }
        Ok(())
    }

    fn simulate(&mut self, a: &SimulateArgs) -> Result<u8> {
        let out = self.required_out()?;
        let file = ModelFile::load(&a.model)?;
        let params = file.params()?;
        let mut config = SimulationConfig::new(params, a.n, self.seed);
        config.burn_in = a.burn_in;
        let path = simulate(&config)?;

        let mut csv = Vec::new();
        write_series_csv(&path.series, &default_names(file.spec.m), &mut csv)?;
        write_atomic(out, &csv)?;
        let meta = SimulationJson {
            n: a.n,
            burn_in: a.burn_in,
            seed: self.seed,
            rng: RNG_ALGORITHM,
            model: &file,
        };
        let config_path = out.with_extension("config.json");
        write_atomic(&config_path, serde_json::to_string_pretty(&meta)?.as_bytes())?;
        self.say(&format!("wrote {} rows to {}", a.n, out.display()))?;
        Ok(0)
    }

    fn fit(&mut self, a: &FitArgs) -> Result<u8> {
        let out = self.required_out()?;
        let (full, _, hash) = load_series(&a.data.data, a.data.input_kind)?;
        let series = drop_tail(&full, a.holdout)?;
        let init = a.em.init(self.seed);
        let options = a.em.options();

        let report = if a.sweep_g.is_empty() {
            let spec = ModelSpec::new(series.dim(), a.orders.clone())?;
            em_fit(&series, &spec, &init, &options)?
        } else {
            let criterion = match a.criterion {
                CriterionArg::Aic => Criterion::Aic,
                CriterionArg::Bic => Criterion::Bic,
            };
            let specs = candidate_grid(series.dim(), &a.sweep_g, &a.sweep_p)?;
            let ranked = select_order(&series, &specs, criterion, &init, &options);
            for c in &ranked {
                let row = SweepRow {
                    rank: c.rank,
                    model: model_label(&c.spec),
                    score: c.score,
                    error: c.fit.as_ref().err().map(ToString::to_string),
                };
                let line = match (&row.score, &row.error) {
                    (Some(s), _) => format!("{:>3}  {:<16} {} {s:.4}", row.rank, row.model, a.criterion.label()),
                    (None, Some(e)) => format!("{:>3}  {:<16} failed: {e}", row.rank, row.model),
                    (None, None) => unreachable!("a candidate either scores or fails"),
                };
                self.say(&line)?;
            }
            let best = ranked.into_iter().next().ok_or_else(|| MvarError::InvalidSpec("empty sweep".into()))?;
            best.fit?
        };

        let stability = is_stable(&report.params)?;
        let provenance = Provenance {
            data_sha256: Some(hash),
            data_rows: Some(series.len()),
            seed: Some(self.seed),
            starts: Some(a.em.starts),
            max_iter: Some(a.em.max_iter),
            tol: Some(a.em.tol),
            rng: Some(RNG_ALGORITHM.to_string()),
            loglik: Some(report.loglik),
            aic: Some(report.aic),
            bic: Some(report.bic),
            iterations: Some(report.iterations),
            converged: Some(report.converged),
            spectral_radius: Some(stability.spectral_radius),
            created_unix: a.stamp.then(unix_now),
        };
        ModelFile::from_params(&report.params, provenance).save(out)?;
        self.say(&fit_summary(&report, stability.spectral_radius, stability.stable))?;
        Ok(if report.converged { 0 } else { EXIT_NOT_CONVERGED })
    }

    fn load_origin(&self, a: &OriginArgs) -> Result<(MvarParameters, ForecastOrigin)> {
        let params = ModelFile::load(&a.model)?.params()?;
        let (series, _, _) = load_series(&a.data.data, a.data.input_kind)?;
        if series.dim() != params.spec().m() {
            return Err(MvarError::DimensionMismatch { expected: params.spec().m(), found: series.dim() });
        }
        let t = a.origin.unwrap_or(series.len().saturating_sub(1));
        let origin = ForecastOrigin::from_series(&series, t, params.spec().p())?;
        Ok((params, origin))
    }

    fn forecast(&mut self, a: &ForecastArgs) -> Result<u8> {
        let (params, origin) = self.load_origin(&a.origin)?;
        let m = params.spec().m();
        if a.asset >= m {
            return Err(MvarError::DimensionMismatch { expected: m, found: a.asset + 1 });
        }
        match a.horizon {
            1 | 2 => {
                let mix = if a.horizon == 1 {
                    predictive_one_step(&params, &origin)?
                } else {
                    predictive_two_step(&params, &origin)?
                };
                if let Some(grid) = &a.grid {
                    let unit = nalgebra::DVector::from_fn(m, |i, _| if i == a.asset { 1.0 } else { 0.0 });
                    write_grid(grid, &project(&mix, &unit)?)?;
                }
                self.emit_json(&MixtureMvJson::from(&mix))?;
            }
            h => {
                if a.grid.is_some() {
                    return Err(MvarError::InvalidParameters(
                        "density grids are available for horizons 1 and 2 only".into(),
                    ));
                }
                let mc = predictive_h_step_mc(&params, &origin, h, a.paths, self.seed)?;
                self.emit_json(&McJson {
                    horizon: h,
                    origin: origin.time(),
                    paths: a.paths,
                    seed: self.seed,
                    moments: MomentsJson::from(&mc.moments),
                })?;
            }
        }
        Ok(0)
    }

    fn portfolio(&mut self, a: &PortfolioArgs) -> Result<u8> {
        let (params, origin) = self.load_origin(&a.origin)?;
        let objective = match a.target {
            Some(t) => Objective::TargetReturn(t),
            None => Objective::MinimumVariance,
        };
        let (sol, mix) = horizon_portfolio(&params, &origin, a.horizon as usize, objective)?;
        if let Some(grid) = &a.grid {
            write_grid(grid, &mix)?;
        }
        self.emit_json(&PortfolioJson::new(&sol, &mix))?;
        Ok(0)
    }

    fn risk(&mut self, a: &RiskArgs) -> Result<u8> {
        let text = std::fs::read_to_string(&a.input)
            .map_err(|e| MvarError::Io(format!("{}: {e}", a.input.display())))?;
        let input: RiskInput = serde_json::from_str(&text)?;
        let report = var_es(&input.mixture()?, a.alpha)?;
        self.emit_json(&RiskJson::from(&report))?;
        Ok(0)
    }

    fn compare(&mut self, a: &CompareArgs) -> Result<u8> {
        let (series, _, _) = load_series(&a.data.data, a.data.input_kind)?;
        let specs = a
            .models
            .iter()
            .map(|s| parse_orders(s).and_then(|o| ModelSpec::new(series.dim(), o)))
            .collect::<Result<Vec<_>>>()?;
        let report =
            compare_models(&series, &specs, a.holdout, a.alpha, &a.em.init(self.seed), &a.em.options())?;
        if !self.quiet {
            let mut table = format!(
                "{:<16} {:>2} {:>11} {:>11} {:>11} {:>11} {:>11} {:>11}",
                "model", "h", "mean", "sd", "VaR", "ES", "CRPS", "realized"
            );
            for r in &report.rows {
                table.push_str(&format!(
                    "\n{:<16} {:>2} {:>11.6} {:>11.6} {:>11.6} {:>11.6} {:>11.6} {:>11.6}",
                    r.model, r.horizon, r.mean, r.sd, r.var, r.es, r.crps, r.realized
                ));
            }
            for f in &report.failures {
                table.push_str(&format!("\n{:<16} failed: {}", f.model, f.error));
            }
            // The table shares stdout with JSON only when --out is given.
            if self.out.is_some() {
                self.say(&table)?;
            } else {
                eprintln!("{table}");
            }
        }
        self.emit_json(&report)?;
        Ok(0)
    }

    fn acf(&mut self, a: &AcfArgs) -> Result<u8> {
        let (series, _, _) = load_series(&a.data.data, a.data.input_kind)?;
        let table = acf_ccf(&series, a.max_lag)?;
        let text = table.to_json()?;
        match self.out {
            Some(path) => write_atomic(path, text.as_bytes())?,
            None => writeln!(self.console, "{text}")?,
        }
        Ok(0)
    }
}

fn drop_tail(series: &SeriesMatrix, holdout: usize) -> Result<SeriesMatrix> {
    if holdout >= series.len() {
        return Err(MvarError::SeriesTooShort { needed: holdout + 1, have: series.len() });
    }
    series.slice(0..series.len() - holdout)
}

/// Parses `3,2,1` into component orders.
pub fn parse_orders(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<usize>()
                .map_err(|_| MvarError::InvalidSpec(format!("`{s}` is not a comma-separated list of orders")))
        })
        .collect()
}

fn fit_summary(report: &FitReport, rho: f64, stable: bool) -> String {
    format!(
        "model       {}\nloglik      {:.6}\nAIC         {:.6}\nBIC         {:.6}\nstability   rho = {rho:.6} ({})\niterations  {}{}",
        report.params.spec(),
        report.loglik,
        report.aic,
        report.bic,
        if stable { "stable" } else { "not stable" },
        report.iterations,
        if report.converged { "" } else { " (not converged)" },
    )
}

fn write_grid(path: &Path, mix: &MixtureNormal1D) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["x", "density"])?;
    for (x, d) in density_grid(mix, GRID_POINTS) {
        w.write_record([format!("{x:?}"), format!("{d:?}")])?;
    }
    let bytes = w.into_inner().map_err(|e| MvarError::Io(e.to_string()))?;
    write_atomic(path, &bytes)
}

fn unix_now() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}
