//! `smmv` command-line front end: JSON run configs in, CSV or JSON out.
//!
//! Exit codes: 0 success, 2 usage or configuration error, 3 numerical
//! failure, 4 I/O error.

use crate::beta::{solve_beta, strong_equilibrium_margin, BetaError, BetaSolution, SolverConfig};
use crate::equilibrium::{
    equilibrium_value, mv_strategy, onec_strategy, ConstantStrategy, EquilibriumStrategy, MvStrategy,
};
use crate::market::{Curve, MarketError, MarketParams, TimeGrid};
use crate::measure::{g_objective, solve_lambda, DiscreteMeasure, MeasureError};
use crate::montecarlo::{empirical_value, simulate, Scheme, SeMethod, SimConfig, SimError};
use crate::spike::{
    default_epsilons, fit_leading_order, run_experiment, theory_leading_order,
    SpikeError, SpikeMode,
};
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use sha2::{Digest, Sha256};
use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use thiserror::Error;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numeric(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl From<MarketError> for CliError {
    fn from(e: MarketError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<BetaError> for CliError {
    fn from(e: BetaError) -> Self {
        match e {
            BetaError::InvalidConfig(_) | BetaError::Market(_) => CliError::Config(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<MeasureError> for CliError {
    fn from(e: MeasureError) -> Self {
        match e {
            MeasureError::InfeasibleMeasure { .. } | MeasureError::EmptyIndicatorSet(_) => {
                CliError::Numeric(e.to_string())
            }
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Measure(m) => m.into(),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<SpikeError> for CliError {
    fn from(e: SpikeError) -> Self {
        match e {
            SpikeError::IllConditionedFit { .. } => CliError::Numeric(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

// ---------------------------------------------------------------------------
// Configuration

/// Full run configuration. Unknown keys are rejected.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub market: MarketParams,
    #[serde(default)]
    pub grid: GridConfig,
    pub sweep: Option<SweepConfig>,
    pub value: Option<ValueConfig>,
    pub simulate: Option<SimulateConfig>,
    pub spike: Option<SpikeConfig>,
    pub preference: Option<PreferenceConfig>,
    pub output: Option<OutputConfig>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// Number of grid nodes including both ends.
    #[serde(default = "default_nodes")]
    pub n_nodes: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_true")]
    pub allow_degenerate: bool,
}

fn default_nodes() -> usize {
    2501
}
fn default_tol() -> f64 {
    1e-10
}
fn default_max_iter() -> usize {
    200
}
fn default_true() -> bool {
    true
}
fn default_x() -> f64 {
    1.0
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { n_nodes: default_nodes(), tol: default_tol(), max_iter: default_max_iter(), allow_degenerate: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    Zeta,
    /// Constant market price of risk.
    Vartheta,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub variable: SweepVariable,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValueConfig {
    pub t: Vec<f64>,
    pub x: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyChoice {
    Equilibrium,
    Mv,
    Constant(f64),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub n_paths: usize,
    #[serde(default = "default_steps")]
    pub n_steps: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_scheme")]
    pub scheme: Scheme,
    #[serde(default)]
    pub t0: f64,
    #[serde(default = "default_x")]
    pub x0: f64,
    #[serde(default = "default_strategy")]
    pub strategy: StrategyChoice,
}

fn default_steps() -> usize {
    1000
}
fn default_scheme() -> Scheme {
    Scheme::ExactGaussian
}
fn default_strategy() -> StrategyChoice {
    StrategyChoice::Equilibrium
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpikeModes {
    OpenLoop,
    ClosedLoop,
    Both,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpikeConfig {
    #[serde(default = "default_modes")]
    pub mode: SpikeModes,
    pub t: Vec<f64>,
    /// Spike amounts; the equilibrium amount at each `t` when absent.
    pub xi: Option<Vec<f64>>,
    /// Spike lengths; `2^-k`, `k = 4..=12` when absent.
    pub eps: Option<Vec<f64>>,
    #[serde(default = "default_x")]
    pub x: f64,
}

fn default_modes() -> SpikeModes {
    SpikeModes::Both
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PreferenceConfig {
    /// Sample CSV with column `x` and optional `z`, `w`. Relative paths are
    /// resolved against the config file's directory.
    pub samples: PathBuf,
    #[serde(default)]
    pub se: SeMethod,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub path: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        let g = &self.grid;
        if g.n_nodes < 3 {
            return Err(CliError::Config("grid.n_nodes must be at least 3".into()));
        }
        if !(g.tol > 0.0) {
            return Err(CliError::Config("grid.tol must be positive".into()));
        }
        if g.max_iter == 0 {
            return Err(CliError::Config("grid.max_iter must be at least 1".into()));
        }
        Ok(())
    }

    fn solver(&self) -> SolverConfig {
        SolverConfig {
            tol: self.grid.tol,
            max_iter: self.grid.max_iter,
            allow_degenerate: self.grid.allow_degenerate,
            record_history: false,
        }
    }

    fn time_grid(&self, params: &MarketParams) -> Result<TimeGrid, CliError> {
        Ok(TimeGrid::uniform(params.horizon(), self.grid.n_nodes - 1)?)
    }

    fn solve(&self, params: &MarketParams, solver: &SolverConfig) -> Result<BetaSolution, CliError> {
        let sol = solve_beta(params, &self.time_grid(params)?, solver)?;
        if sol.degenerate_nodes() > 0 {
            eprintln!(
                "warning: vartheta vanishes near T; beta set to 1 on {} nodes",
                sol.degenerate_nodes()
            );
        }
        Ok(sol)
    }
}

fn require<'a, T>(block: &'a Option<T>, name: &str) -> Result<&'a T, CliError> {
    block.as_ref().ok_or_else(|| CliError::Config(format!("missing \"{name}\" block")))
}

fn non_empty(v: &[f64], name: &str) -> Result<(), CliError> {
    if v.is_empty() {
        return Err(CliError::Config(format!("{name} must not be empty")));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(CliError::Config(format!("{name} must be finite")));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Output

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

struct CsvOut {
    path: PathBuf,
    writer: csv::Writer<BufWriter<File>>,
}

impl CsvOut {
    fn create(path: &Path, meta: &Meta, header: &[&str]) -> Result<Self, CliError> {
        let file = File::create(path).map_err(|e| io_err(path, e))?;
        let mut buf = BufWriter::new(file);
        writeln!(buf, "{}", meta.comment()).map_err(|e| io_err(path, e))?;
        let mut writer = csv::Writer::from_writer(buf);
        writer.write_record(header).map_err(|e| io_err(path, e))?;
        Ok(Self { path: path.to_path_buf(), writer })
    }

    fn row<I, S>(&mut self, fields: I) -> Result<(), CliError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.writer.write_record(fields).map_err(|e| io_err(&self.path, e))
    }

    fn finish(mut self) -> Result<(), CliError> {
        self.writer.flush().map_err(|e| io_err(&self.path, e))
    }
}

/// Provenance written at the top of every output.
#[derive(Debug, Clone)]
pub struct Meta {
    pub command: &'static str,
    pub config_sha256: String,
}

impl Meta {
    fn comment(&self) -> String {
        format!("# smmv {VERSION} command={} config_sha256={}", self.command, self.config_sha256)
    }

    fn json(&self) -> serde_json::Value {
        serde_json::json!({
            "tool": "smmv",
            "version": VERSION,
            "command": self.command,
            "config_sha256": self.config_sha256,
        })
    }
}

// ---------------------------------------------------------------------------
// Commands

pub fn cmd_beta(cfg: &RunConfig, meta: &Meta, out: &Path) -> Result<(), CliError> {
    let params = &cfg.market;
    let sol = cfg.solve(params, &cfg.solver())?;
    let margin = strong_equilibrium_margin(&sol, params);
    let mut w = CsvOut::create(out, meta, &["t", "beta", "beta_prime", "y", "residual", "margin"])?;
    for i in 0..sol.times().len() {
        w.row([
            num(sol.times()[i]),
            num(sol.beta()[i]),
            num(sol.beta_prime_nodes()[i]),
            num(sol.y()[i]),
            num(sol.residual()[i]),
            num(margin.margin[i]),
        ])?;
    }
    w.finish()
}

pub fn cmd_sweep(cfg: &RunConfig, meta: &Meta, out: &Path) -> Result<(), CliError> {
    let sweep = require(&cfg.sweep, "sweep")?;
    non_empty(&sweep.values, "sweep.values")?;
    let mut w = CsvOut::create(out, meta, &["sweep_value", "t", "pi_smmv", "pi_mv", "beta"])?;
    for &v in &sweep.values {
        let params = match sweep.variable {
            SweepVariable::Zeta => cfg.market.with_zeta(v)?,
            SweepVariable::Vartheta => cfg.market.with_vartheta(Curve::constant(v))?,
        };
        let sol = cfg.solve(&params, &cfg.solver())?;
        for (i, &t) in sol.times().iter().enumerate() {
            w.row([
                num(v),
                num(t),
                num(onec_strategy(&params, &sol, t)?),
                num(mv_strategy(&params, t)?),
                num(sol.beta()[i]),
            ])?;
        }
    }
    w.finish()
}

pub fn cmd_value(cfg: &RunConfig, meta: &Meta, out: &Path) -> Result<(), CliError> {
    let block = require(&cfg.value, "value")?;
    non_empty(&block.t, "value.t")?;
    non_empty(&block.x, "value.x")?;
    let params = &cfg.market;
    for &t in &block.t {
        params.check_time(t)?;
    }
    let sol = cfg.solve(params, &cfg.solver())?;
    let mut w = CsvOut::create(out, meta, &["t", "x", "J_bar"])?;
    for &t in &block.t {
        for &x in &block.x {
            w.row([num(t), num(x), num(equilibrium_value(params, &sol, t, x)?)])?;
        }
    }
    w.finish()
}

pub fn cmd_simulate(cfg: &RunConfig, meta: &Meta, out: &Path) -> Result<(), CliError> {
    let block = require(&cfg.simulate, "simulate")?;
    let params = &cfg.market;
    let sim = SimConfig {
        n_paths: block.n_paths,
        n_steps: block.n_steps,
        seed: block.seed,
        scheme: block.scheme,
        t0: block.t0,
        x0: block.x0,
        store_paths: false,
    };
    let batch = match block.strategy {
        StrategyChoice::Equilibrium => {
            params.check_time(block.t0)?;
            let sol = cfg.solve(params, &cfg.solver())?;
            simulate(params, &EquilibriumStrategy::new(&sol), &sim)?
        }
        StrategyChoice::Mv => simulate(params, &MvStrategy, &sim)?,
        StrategyChoice::Constant(c) => simulate(params, &ConstantStrategy(c), &sim)?,
    };
    let mut w = CsvOut::create(out, meta, &["x"])?;
    for &x in batch.terminal_wealth() {
        w.row([num(x)])?;
    }
    w.finish()
}

pub fn cmd_spike(cfg: &RunConfig, meta: &Meta, out: &Path) -> Result<(), CliError> {
    let block = require(&cfg.spike, "spike")?;
    non_empty(&block.t, "spike.t")?;
    if let Some(xi) = &block.xi {
        non_empty(xi, "spike.xi")?;
    }
    let eps = block.eps.clone().unwrap_or_else(default_epsilons);
    non_empty(&eps, "spike.eps")?;
    if eps.iter().any(|&e| !(e > 0.0)) {
        return Err(CliError::Config("spike.eps must be positive".into()));
    }
    let params = &cfg.market;
    for &t in &block.t {
        if t < 0.0 || t + eps.iter().copied().fold(0.0, f64::max) > params.horizon() {
            return Err(CliError::Config(format!("spike window at t = {t} leaves [0, T]")));
        }
    }
    // Gaps of order eps^3 need the fixed point well below the default tolerance.
    let solver = SolverConfig { tol: cfg.grid.tol.min(1e-13), ..cfg.solver() };
    let sol = cfg.solve(params, &solver)?;
    let modes: &[SpikeMode] = match block.mode {
        SpikeModes::OpenLoop => &[SpikeMode::OpenLoop],
        SpikeModes::ClosedLoop => &[SpikeMode::ClosedLoop],
        SpikeModes::Both => &[SpikeMode::OpenLoop, SpikeMode::ClosedLoop],
    };
    let mut w = CsvOut::create(
        out,
        meta,
        &["mode", "t", "xi", "eps", "gap", "fitted_order", "fitted_coeff", "theory_coeff", "margin"],
    )?;
    for &mode in modes {
        for &t in &block.t {
            let margin = params.r(t) - sol.beta_prime(t).abs() / sol.beta_at(t);
            let xis = match &block.xi {
                Some(v) => v.clone(),
                None => vec![onec_strategy(params, &sol, t)?],
            };
            for &xi in &xis {
                let exp = run_experiment(params, &sol, t, block.x, xi, &eps, mode)?;
                let theory = theory_leading_order(params, &sol, t, xi, mode)?;
                let order = theory.map_or(3, |lo| lo.order);
                let fit = match fit_leading_order(&exp, order) {
                    Ok(f) => Some(f),
                    Err(e) => {
                        eprintln!("warning: {} t={t} xi={xi}: {e}", mode.as_str());
                        None
                    }
                };
                for (&e, &gap) in exp.epsilons.iter().zip(&exp.gaps) {
                    w.row([
                        mode.as_str().to_string(),
                        num(t),
                        num(xi),
                        num(e),
                        num(gap),
                        opt_num(fit.map(|f| f.empirical_order)),
                        opt_num(fit.map(|f| f.coefficient)),
                        opt_num(theory.map(|lo| lo.coefficient)),
                        num(margin),
                    ])?;
                }
            }
        }
    }
    w.finish()
}

pub fn cmd_preference(
    cfg: &RunConfig,
    meta: &Meta,
    out: &Path,
    config_dir: &Path,
) -> Result<(), CliError> {
    let block = require(&cfg.preference, "preference")?;
    let path = if block.samples.is_absolute() { block.samples.clone() } else { config_dir.join(&block.samples) };
    let file = File::open(&path).map_err(|e| io_err(&path, e))?;
    let zeta = cfg.market.zeta();
    let theta = cfg.market.theta();
    let measure = DiscreteMeasure::from_csv_reader(file, zeta)?;
    let atoms = measure.atoms();
    let uniform = atoms.iter().all(|a| a.w == atoms[0].w && a.z == atoms[0].z);
    let report = if uniform {
        let xs: Vec<f64> = atoms.iter().map(|a| a.x).collect();
        let v = empirical_value(&xs, atoms[0].z, theta, block.se)?;
        serde_json::json!({
            "lambda": v.lambda, "g": v.g, "se": v.se_g, "se_lambda": v.se_lambda, "n": v.n,
        })
    } else {
        eprintln!("warning: weighted or heterogeneous samples; standard errors are not reported");
        let lr = solve_lambda(&measure, theta)?;
        serde_json::json!({
            "lambda": lr.lambda, "g": g_objective(&measure, theta)?, "se": null, "se_lambda": null,
            "n": atoms.len(),
        })
    };
    let mut doc = report;
    doc["meta"] = meta.json();
    let text = serde_json::to_string_pretty(&doc).map_err(|e| CliError::Numeric(e.to_string()))?;
    std::fs::write(out, text + "\n").map_err(|e| io_err(out, e))
}

// ---------------------------------------------------------------------------
// Entry point

#[derive(Debug, Parser)]
#[command(name = "smmv", version, about = "Equilibrium strategies under monotone mean-variance preferences")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve for beta and write t, beta, beta_prime, y, residual, margin.
    Beta(IoArgs),
    /// Strategy curves over a zeta or vartheta sweep.
    Sweep(IoArgs),
    /// Equilibrium value on a (t, x) grid.
    Value(IoArgs),
    /// Simulate terminal wealth.
    Simulate(IoArgs),
    /// Spike-gap report.
    Spike(IoArgs),
    /// Preference value of a sample file.
    Preference(IoArgs),
}

#[derive(Debug, Args)]
struct IoArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output file; overrides `output.path` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Beta(_) => "beta",
            Command::Sweep(_) => "sweep",
            Command::Value(_) => "value",
            Command::Simulate(_) => "simulate",
            Command::Spike(_) => "spike",
            Command::Preference(_) => "preference",
        }
    }

    fn io(&self) -> &IoArgs {
        match self {
            Command::Beta(a)
            | Command::Sweep(a)
            | Command::Value(a)
            | Command::Simulate(a)
            | Command::Spike(a)
            | Command::Preference(a) => a,
        }
    }
}

fn thread_count() -> Result<Option<usize>, CliError> {
    match std::env::var("SMMV_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(CliError::Config(format!("SMMV_THREADS must be a positive integer, got {v:?}"))),
        },
        Err(_) => Ok(None),
    }
}

fn run(command: &Command) -> Result<(), CliError> {
    let io = command.io();
    let raw = std::fs::read(&io.config).map_err(|e| io_err(&io.config, e))?;
    let text = String::from_utf8(raw.clone()).map_err(|e| CliError::Config(e.to_string()))?;
    let cfg = RunConfig::from_json(&text)?;
    let out = io
        .out
        .clone()
        .or_else(|| cfg.output.as_ref().and_then(|o| o.path.clone()))
        .ok_or_else(|| CliError::Config("no output path (--out or output.path)".into()))?;
    let meta = Meta { command: command.name(), config_sha256: hex::encode(Sha256::digest(&raw)) };
    let config_dir = io.config.parent().map(Path::to_path_buf).unwrap_or_default();
    let exec = || match command {
        Command::Beta(_) => cmd_beta(&cfg, &meta, &out),
        Command::Sweep(_) => cmd_sweep(&cfg, &meta, &out),
        Command::Value(_) => cmd_value(&cfg, &meta, &out),
        Command::Simulate(_) => cmd_simulate(&cfg, &meta, &out),
        Command::Spike(_) => cmd_spike(&cfg, &meta, &out),
        Command::Preference(_) => cmd_preference(&cfg, &meta, &out, &config_dir),
    };
    match thread_count()? {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Config(e.to_string()))?
            .install(exec),
        None => exec(),
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run(&cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("smmv {}: {e}", cli.command.name());
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MARKET: &str = r#""market": {"r": {"kind": "constant", "value": 0.012},
        "sigma": {"kind": "constant", "value": 0.158},
        "vartheta": {"kind": "constant", "value": 0.343},
        "theta": 5.0, "zeta": 0.5, "T": 25.0}"#;

    #[test]
    fn config_parsing() {
        let cfg = RunConfig::from_json(&format!("{{{MARKET}}}")).unwrap();
        assert_eq!(cfg.grid.n_nodes, 2501);
        assert!(cfg.sweep.is_none());
        let bad = format!("{{{MARKET}, \"extra\": 1}}");
        assert!(matches!(RunConfig::from_json(&bad), Err(CliError::Config(_))));
        let sim = format!(
            "{{{MARKET}, \"simulate\": {{\"n_paths\": 10, \"scheme\": \"euler\", \"strategy\": {{\"constant\": 0.5}}}}}}"
        );
        let cfg = RunConfig::from_json(&sim).unwrap();
        let s = cfg.simulate.unwrap();
        assert_eq!(s.scheme, Scheme::Euler);
        assert_eq!(s.strategy, StrategyChoice::Constant(0.5));
        let grid = format!("{{{MARKET}, \"grid\": {{\"n_nodes\": 2}}}}");
        assert!(RunConfig::from_json(&grid).is_err());
    }

    #[test]
    fn number_format_has_17_significant_digits() {
        assert_eq!(num(0.1), "1.0000000000000001e-1");
        assert_eq!(num(1.0), "1.0000000000000000e0");
    }

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Config(String::new()).exit_code(), 2);
        assert_eq!(CliError::Numeric(String::new()).exit_code(), 3);
        assert_eq!(CliError::Io(String::new()).exit_code(), 4);
        assert_eq!(main_with_args(["smmv", "bogus"]), 2);
        assert_eq!(main_with_args(["smmv", "beta", "--config", "/nonexistent/x.json", "--out", "o"]), 4);
    }
}
