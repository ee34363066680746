//! Command-line front end.
//!
//! Every subcommand resolves its parameters from three layers: built-in
//! defaults, an optional TOML file given with `--config`, and flags, later
//! layers winning. The resolved parameters are written to `config.toml` in
//! the output directory; passing that file back with `--config` repeats the
//! run.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::data::{radial_decompose, LabeledPanel, RadialSample};
use crate::error::MesError;
use crate::evt::{
    adjusted_mes, auto_s, cai_from_radial, confidence_interval_serial, default_lag, emp_from_radial,
    fit_tail, plain_mes, second_order_params, variance_inflation, CiKind, SerialAdjustment, Variant,
};
use crate::models::presets::{interval_component, reference_truth};
use crate::models::series::{ar1_pareto, armax_frechet};
use crate::models::{preset, sample_model, ModelSpec};
use crate::oracle::{true_mes_batched, DEFAULT_BATCH};
use crate::returns::{
    build_report, compute_returns, gamma_stability, return_period_tau, write_outputs, PricePanel,
    ReportOptions, ReturnKind,
};
use crate::sim::{
    default_k_grid, emit_outputs, k_grid_from_fractions, run_experiment, CiSpec, Components,
    ExperimentConfig,
};

/// Environment variable holding the default output directory.
pub const OUT_ENV: &str = "RADIAL_MES_OUT";

#[derive(Debug, Parser)]
#[command(name = "radial-mes", version, about = "Extreme marginal expected shortfall estimation")]
pub struct Cli {
    /// Master seed for every random draw
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (default: available parallelism)
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output directory (default: $RADIAL_MES_OUT, else ./out)
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// TOML file with default parameters; flags take precedence
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Monte Carlo bias, variance, MSE and interval coverage over a k grid
    Simulate(SimulateFlags),
    /// Ground-truth MES by brute-force simulation
    Oracle(OracleFlags),
    /// Draw a sample panel from a model
    Sample(SampleFlags),
    /// MES estimates and intervals for a data panel
    Estimate(EstimateFlags),
    /// Institution risk report from weekly prices
    Analyze(AnalyzeFlags),
    /// Serial extremal dependence and the variance inflation factor
    Serial(SerialFlags),
}

impl Command {
    fn section(&self) -> &'static str {
        match self {
            Command::Simulate(_) => "simulate",
            Command::Oracle(_) => "oracle",
            Command::Sample(_) => "sample",
            Command::Estimate(_) => "estimate",
            Command::Analyze(_) => "analyze",
            Command::Serial(_) => "serial",
        }
    }
}

#[derive(Debug, Clone, Default, Args, Serialize)]
pub struct ModelFlags {
    /// Preset name (model_i..model_v) or a label for a custom model
    #[arg(long)]
    pub model: Option<String>,
    /// Custom copula: clayton:<delta>, gumbel:<theta>, joe:<theta>, t:<dof>,<rho>
    #[arg(long)]
    pub copula: Option<String>,
    /// Custom margins, e.g. halft:2,burr:2,3 separated by ';'
    #[arg(long, value_delimiter = ';')]
    pub marginals: Option<Vec<String>>,
}

#[derive(Debug, Clone, Default, Args, Serialize)]
pub struct SimulateFlags {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelFlags,
    #[arg(long)]
    pub n: Option<usize>,
    /// Number of Monte Carlo replicates
    #[arg(long = "M", visible_alias = "replicates")]
    pub replicates: Option<usize>,
    #[arg(long)]
    pub tau: Option<f64>,
    /// Grid as fractions of n, comma separated
    #[arg(long, value_delimiter = ',', conflicts_with = "k_grid")]
    pub k_fractions: Option<Vec<f64>>,
    /// Grid of k values, comma separated
    #[arg(long, value_delimiter = ',')]
    pub k_grid: Option<Vec<usize>>,
    /// Subset of plain,adjusted,emp,cai
    #[arg(long, value_delimiter = ',')]
    pub estimators: Option<Vec<String>>,
    /// Subset of basic_plain,basic_adjusted,refined_plain,refined_adjusted
    #[arg(long, value_delimiter = ',')]
    pub intervals: Option<Vec<String>>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// `all`, `auto` or a component number from 1
    #[arg(long)]
    pub components: Option<String>,
    /// Component number (from 1) whose intervals are evaluated
    #[arg(long)]
    pub interval_component: Option<usize>,
    /// True MES per component, comma separated
    #[arg(long, value_delimiter = ',', conflicts_with = "truth_draws")]
    pub truth: Option<Vec<f64>>,
    /// Compute the truth with the oracle from this many draws
    #[arg(long)]
    pub truth_draws: Option<u64>,
    /// Second-order estimation level
    #[arg(long)]
    pub s: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateConfig {
    pub model: String,
    pub copula: Option<String>,
    pub marginals: Option<Vec<String>>,
    pub n: usize,
    pub replicates: usize,
    pub tau: f64,
    pub k_fractions: Option<Vec<f64>>,
    pub k_grid: Option<Vec<usize>>,
    pub estimators: Vec<String>,
    pub intervals: Vec<String>,
    pub alpha: f64,
    pub components: String,
    pub interval_component: Option<usize>,
    pub truth: Option<Vec<f64>>,
    pub truth_draws: Option<u64>,
    pub s: Option<usize>,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self {
            model: "model_ii".into(),
            copula: None,
            marginals: None,
            n: 500,
            replicates: 1000,
            tau: 0.998,
            k_fractions: None,
            k_grid: None,
            estimators: Variant::ALL.iter().map(|v| v.to_string()).collect(),
            intervals: CiSpec::ALL.iter().map(|c| c.to_string()).collect(),
            alpha: 0.05,
            components: "auto".into(),
            interval_component: None,
            truth: None,
            truth_draws: None,
            s: None,
        }
    }
}

#[derive(Debug, Clone, Default, Args, Serialize)]
pub struct OracleFlags {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelFlags,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub draws: Option<u64>,
    #[arg(long)]
    pub batch: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleConfig {
    pub model: String,
    pub copula: Option<String>,
    pub marginals: Option<Vec<String>>,
    pub tau: f64,
    pub draws: u64,
    pub batch: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            model: "model_i".into(),
            copula: None,
            marginals: None,
            tau: 0.998,
            draws: 10_000_000,
            batch: DEFAULT_BATCH,
        }
    }
}

#[derive(Debug, Clone, Default, Args, Serialize)]
pub struct SampleFlags {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelFlags,
    #[arg(long)]
    pub n: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SampleConfig {
    pub model: String,
    pub copula: Option<String>,
    pub marginals: Option<Vec<String>>,
    pub n: usize,
}

impl Default for SampleConfig {
    fn default() -> Self {
        Self { model: "model_i".into(), copula: None, marginals: None, n: 500 }
    }
}

#[derive(Debug, Clone, Default, Args, Serialize)]
pub struct EstimateFlags {
    /// CSV panel with a header row
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub tau: Option<f64>,
    /// Subset of plain,adjusted,emp,cai
    #[arg(long, value_delimiter = ',')]
    pub estimators: Option<Vec<String>>,
    /// basic or refined
    #[arg(long)]
    pub ci: Option<String>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Serial truncation lag for the interval; 0 assumes independence
    #[arg(long)]
    pub serial_lags: Option<usize>,
    #[arg(long)]
    pub s: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimateConfig {
    pub data: Option<PathBuf>,
    pub k: Option<usize>,
    pub tau: f64,
    pub estimators: Vec<String>,
    pub ci: String,
    pub alpha: f64,
    pub serial_lags: usize,
    pub s: Option<usize>,
}

impl Default for EstimateConfig {
    fn default() -> Self {
        Self {
            data: None,
            k: None,
            tau: 0.998,
            estimators: Variant::ALL.iter().map(|v| v.to_string()).collect(),
            ci: "refined".into(),
            alpha: 0.05,
            serial_lags: 0,
            s: None,
        }
    }
}

#[derive(Debug, Clone, Default, Args, Serialize)]
pub struct AnalyzeFlags {
    /// Price file: date,<name>_open,<name>_close,...
    #[arg(long)]
    pub prices: Option<PathBuf>,
    /// Capitalization file: name,capitalization
    #[arg(long)]
    pub caps: Option<PathBuf>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, conflicts_with = "return_period")]
    pub tau: Option<f64>,
    /// Horizon in years; tau = 1 - 1/(freq * years)
    #[arg(long)]
    pub return_period: Option<f64>,
    /// Observations per year
    #[arg(long)]
    pub freq: Option<f64>,
    /// intra-week or close-to-close
    #[arg(long)]
    pub returns: Option<String>,
    /// plain or adjusted
    #[arg(long)]
    pub estimator: Option<String>,
    /// basic or refined
    #[arg(long)]
    pub ci: Option<String>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub serial_lags: Option<usize>,
    #[arg(long)]
    pub s: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalyzeConfig {
    pub prices: Option<PathBuf>,
    pub caps: Option<PathBuf>,
    pub k: Option<usize>,
    pub tau: Option<f64>,
    pub return_period: Option<f64>,
    pub freq: f64,
    pub returns: String,
    pub estimator: String,
    pub ci: String,
    pub alpha: f64,
    pub serial_lags: usize,
    pub s: Option<usize>,
}

impl Default for AnalyzeConfig {
    fn default() -> Self {
        Self {
            prices: None,
            caps: None,
            k: None,
            tau: None,
            return_period: None,
            freq: 52.0,
            returns: "intra-week".into(),
            estimator: "adjusted".into(),
            ci: "refined".into(),
            alpha: 0.05,
            serial_lags: 0,
            s: None,
        }
    }
}

#[derive(Debug, Clone, Default, Args, Serialize)]
pub struct SerialFlags {
    /// CSV panel; rows are summed into radii
    #[arg(long, conflicts_with = "process")]
    pub data: Option<PathBuf>,
    /// Generated series: a preset name, armax:<alpha>,<phi> or ar1:<phi>,<gamma>
    #[arg(long)]
    pub process: Option<String>,
    /// Length of the generated series
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    /// Truncation lag (default min(floor(sqrt(n)), 50))
    #[arg(long)]
    pub lags: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SerialConfig {
    pub data: Option<PathBuf>,
    pub process: Option<String>,
    pub n: usize,
    pub k: Option<usize>,
    pub lags: Option<usize>,
}

impl Default for SerialConfig {
    fn default() -> Self {
        Self { data: None, process: None, n: 1000, k: None, lags: None }
    }
}

/// The fully resolved run parameters, as echoed to `config.toml`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Resolved<T> {
    pub seed: u64,
    pub threads: usize,
    pub out: PathBuf,
    #[serde(flatten)]
    pub section: std::collections::BTreeMap<String, T>,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Run(MesError),
}

impl From<MesError> for CliError {
    fn from(e: MesError) -> Self {
        CliError::Run(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Run(MesError::Io(e))
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Runs the command line and returns the process exit code: 0 on success,
/// 1 on a runtime error, 2 on a usage error. Errors are reported on stderr
/// as one `error: kind=<Name> message="..."` line.
pub fn dispatch<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: kind=Usage message={msg:?}");
            2
        }
        Err(CliError::Run(e)) => {
            eprintln!("error: kind={} message={:?}", e.name(), e.to_string());
            1
        }
    }
}

/// Global options after merging flags, file and environment.
struct Globals {
    seed: u64,
    threads: usize,
    out: PathBuf,
}

fn load_config(path: Option<&Path>) -> CliResult<toml::Table> {
    match path {
        None => Ok(toml::Table::new()),
        Some(p) => {
            let text = fs::read_to_string(p)?;
            text.parse::<toml::Table>().map_err(|e| usage(format!("config {}: {e}", p.display())))
        }
    }
}

fn merge_section<F: Serialize, C: DeserializeOwned>(file: &toml::Table, section: &str, flags: &F) -> CliResult<C> {
    let mut merged = match file.get(section) {
        None => toml::Table::new(),
        Some(toml::Value::Table(t)) => t.clone(),
        Some(_) => return Err(usage(format!("config section [{section}] must be a table"))),
    };
    let overlay = toml::Table::try_from(flags).map_err(|e| usage(e.to_string()))?;
    merged.extend(overlay);
    toml::Value::Table(merged)
        .try_into()
        .map_err(|e: toml::de::Error| usage(format!("[{section}]: {}", e.message())))
}

fn globals(cli: &Cli, file: &toml::Table) -> CliResult<Globals> {
    let int = |key: &str| -> CliResult<Option<i64>> {
        match file.get(key) {
            None => Ok(None),
            Some(toml::Value::Integer(v)) if *v >= 0 => Ok(Some(*v)),
            Some(_) => Err(usage(format!("config key '{key}' must be a nonnegative integer"))),
        }
    };
    let seed = cli.seed.or(int("seed")?.map(|v| v as u64)).unwrap_or(1);
    let threads = cli
        .threads
        .or(int("threads")?.map(|v| v as usize))
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1));
    if threads == 0 {
        return Err(usage("--threads must be positive"));
    }
    let out = match (&cli.out, file.get("out")) {
        (Some(o), _) => o.clone(),
        (None, Some(toml::Value::String(s))) => PathBuf::from(s),
        (None, Some(_)) => return Err(usage("config key 'out' must be a string")),
        (None, None) => std::env::var_os(OUT_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("out")),
    };
    Ok(Globals { seed, threads, out })
}

fn echo<T: Serialize>(g: &Globals, section: &str, cfg: &T) -> CliResult<()> {
    fs::create_dir_all(&g.out)?;
    let resolved = Resolved {
        seed: g.seed,
        threads: g.threads,
        out: g.out.clone(),
        section: [(section.to_string(), cfg)].into_iter().collect(),
    };
    let text = toml::to_string(&resolved).map_err(|e| MesError::InvalidInput(e.to_string()))?;
    fs::write(g.out.join("config.toml"), text)?;
    Ok(())
}

fn run(cli: Cli) -> CliResult<()> {
    let file = load_config(cli.config.as_deref())?;
    let g = globals(&cli, &file)?;
    let section = cli.command.section();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(g.threads)
        .build()
        .map_err(|e| usage(format!("thread pool: {e}")))?;
    pool.install(|| match &cli.command {
        Command::Simulate(f) => {
            let cfg: SimulateConfig = merge_section(&file, section, f)?;
            echo(&g, section, &cfg)?;
            simulate(&g, &cfg)
        }
        Command::Oracle(f) => {
            let cfg: OracleConfig = merge_section(&file, section, f)?;
            echo(&g, section, &cfg)?;
            oracle(&g, &cfg)
        }
        Command::Sample(f) => {
            let cfg: SampleConfig = merge_section(&file, section, f)?;
            echo(&g, section, &cfg)?;
            sample(&g, &cfg)
        }
        Command::Estimate(f) => {
            let cfg: EstimateConfig = merge_section(&file, section, f)?;
            echo(&g, section, &cfg)?;
            estimate(&g, &cfg)
        }
        Command::Analyze(f) => {
            let cfg: AnalyzeConfig = merge_section(&file, section, f)?;
            echo(&g, section, &cfg)?;
            analyze(&g, &cfg)
        }
        Command::Serial(f) => {
            let cfg: SerialConfig = merge_section(&file, section, f)?;
            echo(&g, section, &cfg)?;
            serial(&g, &cfg)
        }
    })
}

fn build_model(model: &str, copula: &Option<String>, marginals: &Option<Vec<String>>) -> CliResult<ModelSpec> {
    match (copula, marginals) {
        (Some(c), Some(m)) => Ok(ModelSpec::parse(model, c, m)?),
        (None, None) => Ok(preset(model)?),
        _ => Err(usage("a custom model needs both --copula and --marginals")),
    }
}

fn parse_list<T: std::str::FromStr<Err = MesError>>(items: &[String]) -> CliResult<Vec<T>> {
    items.iter().map(|s| s.trim().parse().map_err(|e: MesError| usage(e.to_string()))).collect()
}

fn simulate(g: &Globals, cfg: &SimulateConfig) -> CliResult<()> {
    let model = build_model(&cfg.model, &cfg.copula, &cfg.marginals)?;
    let d = model.d();
    let custom = cfg.copula.is_some();
    let truth = match (&cfg.truth, cfg.truth_draws) {
        (Some(t), _) => Some(t.clone()),
        // offset seed keeps the truth draws apart from the replicate streams
        (None, Some(draws)) => Some(true_mes_batched(&model, cfg.tau, draws, g.seed ^ 0x7275_7468, DEFAULT_BATCH)?.theta),
        (None, None) if !custom && cfg.tau == 0.998 => reference_truth(&cfg.model),
        (None, None) => None,
    };
    if truth.is_none() {
        return Err(usage("no reference truth for this model and tau; pass --truth or --truth-draws"));
    }
    let k_grid = match (&cfg.k_grid, &cfg.k_fractions) {
        (Some(k), _) => k.clone(),
        (None, Some(f)) => k_grid_from_fractions(cfg.n, f),
        (None, None) => default_k_grid(cfg.n),
    };
    let components = match cfg.components.as_str() {
        "all" => Components::All,
        "auto" if model.name() == "model_iv" && !custom => Components::All,
        "auto" => Components::One(0),
        other => match other.parse::<usize>() {
            Ok(j) if j >= 1 => Components::One(j - 1),
            _ => return Err(usage(format!("components must be all, auto or a number from 1, got '{other}'"))),
        },
    };
    let interval_components = match cfg.interval_component {
        Some(0) => return Err(usage("interval component numbers start at 1")),
        Some(j) => Components::One(j - 1),
        None if custom => Components::One(0),
        None => Components::One(interval_component(&cfg.model)),
    };
    let exp = ExperimentConfig {
        model,
        n: cfg.n,
        replicates: cfg.replicates,
        tau: cfg.tau,
        k_grid,
        estimators: parse_list(&cfg.estimators)?,
        intervals: parse_list(&cfg.intervals)?,
        alpha: cfg.alpha,
        components,
        interval_components,
        master_seed: g.seed,
        truth,
        second_order_s: cfg.s,
    };
    let result = run_experiment(&exp)?;
    let written = emit_outputs(&result, &g.out)?;
    println!("{} replicates of {} (d = {d}, n = {})", exp.replicates, result.model, exp.n);
    for p in written {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn oracle(g: &Globals, cfg: &OracleConfig) -> CliResult<()> {
    let model = build_model(&cfg.model, &cfg.copula, &cfg.marginals)?;
    let res = true_mes_batched(&model, cfg.tau, cfg.draws, g.seed, cfg.batch)?;
    let path = g.out.join("oracle.csv");
    res.write_csv(&path)?;
    print!("{}", res.to_csv()?);
    println!("system ES {} (se {}), {} exceedances", res.system_es, res.system_se, res.exceedance_count);
    println!("wrote {}", path.display());
    Ok(())
}

fn sample(g: &Globals, cfg: &SampleConfig) -> CliResult<()> {
    let model = build_model(&cfg.model, &cfg.copula, &cfg.marginals)?;
    let batch = sample_model(&model, cfg.n, g.seed)?;
    let path = g.out.join("panel.csv");
    LabeledPanel::unnamed(batch.data).write_csv(&path)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn require<T: Clone>(v: &Option<T>, flag: &str) -> CliResult<T> {
    v.clone().ok_or_else(|| usage(format!("--{flag} is required")))
}

#[derive(Serialize)]
struct EstimateRow<'a> {
    component: usize,
    name: &'a str,
    estimator: Variant,
    theta: f64,
    lower: f64,
    upper: f64,
}

fn estimate(g: &Globals, cfg: &EstimateConfig) -> CliResult<()> {
    let panel = LabeledPanel::read_csv(&require(&cfg.data, "data")?)?;
    let k = require(&cfg.k, "k")?;
    let kind: CiKind = cfg.ci.parse().map_err(|e: MesError| usage(e.to_string()))?;
    let estimators: Vec<Variant> = parse_list(&cfg.estimators)?;
    let x = &panel.data;
    let r = radial_decompose(x);
    let needs_so = estimators.iter().any(|v| matches!(v, Variant::Plain | Variant::Adjusted));
    let so = if needs_so { Some(second_order_params(&r, cfg.s.unwrap_or_else(|| auto_s(&r)))?) } else { None };
    let mut fit = fit_tail(&r, k, None)?;
    fit.second_order = so;
    let serial = if cfg.serial_lags > 0 {
        variance_inflation(&r, k, cfg.serial_lags)?
    } else {
        SerialAdjustment::independent()
    };

    let mut w = csv::Writer::from_writer(Vec::new());
    for &v in &estimators {
        let (theta, bounds) = match v {
            Variant::Plain | Variant::Adjusted => {
                let est = match v {
                    Variant::Plain => plain_mes(&r, k, cfg.tau)?,
                    _ => adjusted_mes(&r, k, cfg.tau, so.as_ref().expect("fitted for proposed estimators"))?,
                };
                let bounds = match confidence_interval_serial(&est, &fit, kind, cfg.alpha, &serial) {
                    Ok(b) => Some(b),
                    Err(e) => {
                        eprintln!("note: no interval for {v}: {e}");
                        None
                    }
                };
                (est.theta_hat, bounds)
            }
            _ => {
                let f = if v == Variant::Emp { emp_from_radial } else { cai_from_radial };
                ((0..x.d()).map(|j| f(x, &r, j, k, cfg.tau)).collect::<Result<Vec<_>, _>>()?, None)
            }
        };
        for j in 0..x.d() {
            let (lower, upper) = bounds.as_ref().map(|b| (b[j].lower, b[j].upper)).unwrap_or((f64::NAN, f64::NAN));
            w.serialize(EstimateRow { component: j + 1, name: &panel.names[j], estimator: v, theta: theta[j], lower, upper })
                .map_err(MesError::from)?;
        }
    }
    let bytes = w.into_inner().map_err(|e| MesError::Io(e.into_error()))?;
    let path = g.out.join("estimate.csv");
    fs::write(&path, &bytes)?;
    print!("{}", String::from_utf8_lossy(&bytes));
    println!("gamma {} at k = {k}, inflation {}", fit.gamma_hat, serial.inflation);
    println!("wrote {}", path.display());
    Ok(())
}

fn analyze(g: &Globals, cfg: &AnalyzeConfig) -> CliResult<()> {
    let panel = PricePanel::from_csv(&require(&cfg.prices, "prices")?, &require(&cfg.caps, "caps")?)?;
    let k = require(&cfg.k, "k")?;
    let tau = match (cfg.tau, cfg.return_period) {
        (Some(t), None) => t,
        (None, Some(years)) => return_period_tau(cfg.freq, years)?,
        (Some(_), Some(_)) => return Err(usage("give either --tau or --return-period, not both")),
        (None, None) => return Err(usage("--tau or --return-period is required")),
    };
    let kind: ReturnKind = cfg.returns.parse().map_err(|e: MesError| usage(e.to_string()))?;
    let options = ReportOptions {
        variant: cfg.estimator.parse().map_err(|e: MesError| usage(e.to_string()))?,
        ci_kind: cfg.ci.parse().map_err(|e: MesError| usage(e.to_string()))?,
        alpha: cfg.alpha,
        serial_lag: cfg.serial_lags,
        second_order_s: cfg.s,
    };
    let x = compute_returns(&panel, kind)?;
    let report = build_report(&x, panel.names(), &panel.weights(), k, tau, &options)?;
    let ks = default_k_grid(x.n());
    let stability = gamma_stability(&x, &ks, cfg.s)?;
    write_outputs(&report, &stability, &g.out)?;
    print!("{}", report.summary());
    println!(
        "{} institutions hold more than half of the system ES",
        report.institutions_covering(0.5)
    );
    println!("wrote {}", g.out.join("report.csv").display());
    Ok(())
}

fn serial_sample(cfg: &SerialConfig, seed: u64) -> CliResult<RadialSample> {
    if let Some(path) = &cfg.data {
        return Ok(radial_decompose(&LabeledPanel::read_csv(path)?.data));
    }
    let process = require(&cfg.process, "data or --process")?;
    let params = |s: &str| -> CliResult<(f64, f64)> {
        let v: Vec<f64> = s.split(',').map(|p| p.trim().parse::<f64>()).collect::<Result<_, _>>()
            .map_err(|_| usage(format!("bad process parameters '{s}'")))?;
        match v[..] {
            [a, b] => Ok((a, b)),
            _ => Err(usage(format!("process '{process}' takes two parameters"))),
        }
    };
    let radii = match process.split_once(':') {
        Some(("armax", p)) => {
            let (alpha, phi) = params(p)?;
            armax_frechet(cfg.n, alpha, phi, seed)?
        }
        Some(("ar1", p)) => {
            let (phi, gamma) = params(p)?;
            ar1_pareto(cfg.n, phi, gamma, seed)?
        }
        _ => {
            let model = preset(&process)?;
            return Ok(radial_decompose(&sample_model(&model, cfg.n, seed)?.data));
        }
    };
    Ok(RadialSample::from_radii(radii)?)
}

#[derive(Serialize)]
struct SerialRow {
    lag: usize,
    r_hat: f64,
}

fn serial(g: &Globals, cfg: &SerialConfig) -> CliResult<()> {
    let r = serial_sample(cfg, g.seed)?;
    let n = r.n();
    let k = cfg.k.unwrap_or((n / 10).max(1));
    let lag = cfg.lags.unwrap_or_else(|| default_lag(n));
    let adj = variance_inflation(&r, k, lag)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    for (t, v) in adj.r_hat.iter().enumerate() {
        w.serialize(SerialRow { lag: t + 1, r_hat: *v }).map_err(MesError::from)?;
    }
    let bytes = w.into_inner().map_err(|e| MesError::Io(e.into_error()))?;
    let path = g.out.join("serial.csv");
    fs::write(&path, bytes)?;
    println!("n = {n}, k = {k}, lags = {}, inflation = {}", adj.lag, adj.inflation);
    println!("wrote {}", path.display());
    Ok(())
}
