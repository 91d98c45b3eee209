//! Command-line front end.
//!
//! Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | I/O or other runtime failure |
//! | 2 | bad flags, empty suite or empty model set |
//! | 3 | model parse error |
//! | 4 | inconsistent model (no valid product) |
//! | 5 | suite does not match the model |
//! | 6 | exact enumeration refused by the budget |
//!
//! Every command writes `manifest.json` next to its outputs. In
//! iteration-capped and sampled modes, `twise replay <manifest>` reproduces
//! the other outputs byte for byte.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::coverage::{
    self, CoverageReport, CurveMode, Estimator, ValidTSetSample, DEFAULT_ENUMERATION_BUDGET,
};
use crate::generation::{search_generate, unpredictable_generate, SearchConfig};
use crate::io::{self, ModelFormat, OutputBundle, RunManifest, MANIFEST_SCHEMA_VERSION};
use crate::model::generate_random_model;
use crate::prioritization::{
    area_under_curve, greedy_prioritize, near_optimal_prioritize, random_prioritize, Prioritizer,
};
use crate::similarity::fitness;
use crate::{stats, Error, FeatureModel, Product, Result};

pub const OUT_DIR_ENV: &str = "TWISE_OUT_DIR";
const RANDOM_ORDER_SEEDS: u64 = 10;
const PATH_FLAGS: [&str; 3] = ["--model", "--suite", "--models"];

#[derive(Debug, Parser)]
#[command(name = "twise", version, about = "Similarity-driven t-wise test suites for feature models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a prioritized product suite.
    Generate(GenerateArgs),
    /// Reorder an existing suite.
    Prioritize(PrioritizeArgs),
    /// Measure t-wise coverage of a suite.
    Coverage(CoverageArgs),
    /// Compare strategies and prioritizers over a set of models.
    Evaluate(EvaluateArgs),
    /// Rerun a command from its manifest.
    Replay(ReplayArgs),
}

#[derive(Debug, Args, Serialize)]
struct ModelArgs {
    /// Feature model file.
    #[arg(long)]
    model: PathBuf,
    /// Model format; inferred from the extension when omitted
    /// (.cnf/.dimacs, .json, .tree/.fm).
    #[arg(long, value_enum)]
    format: Option<ModelFormat>,
}

#[derive(Debug, Args, Serialize)]
struct OutArgs {
    /// Output directory.
    #[arg(long, env = OUT_DIR_ENV, default_value = "out")]
    #[serde(skip)]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Strategy {
    Search,
    Unpredictable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum PrioritizerArg {
    Greedy,
    NearOptimal,
}

impl From<PrioritizerArg> for Prioritizer {
    fn from(p: PrioritizerArg) -> Self {
        match p {
            PrioritizerArg::Greedy => Prioritizer::Greedy,
            PrioritizerArg::NearOptimal => Prioritizer::NearOptimal,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Algorithm {
    Random,
    Greedy,
    NearOptimal,
}

impl Algorithm {
    fn name(self) -> &'static str {
        match self {
            Algorithm::Random => "random",
            Algorithm::Greedy => "greedy",
            Algorithm::NearOptimal => "near_optimal",
        }
    }

    fn apply(self, suite: &[Product], seed: u64) -> Result<Vec<Product>> {
        Ok(match self {
            Algorithm::Random => random_prioritize(suite, seed).products,
            Algorithm::Greedy => greedy_prioritize(suite)?.products,
            Algorithm::NearOptimal => near_optimal_prioritize(suite)?.products,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Mode {
    Exact,
    Sampled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum EstimatorArg {
    UniformRejection,
    CoveredSet,
}

impl From<EstimatorArg> for Estimator {
    fn from(e: EstimatorArg) -> Self {
        match e {
            EstimatorArg::UniformRejection => Estimator::UniformRejection,
            EstimatorArg::CoveredSet => Estimator::CoveredSetSampling,
        }
    }
}

#[derive(Debug, Args, Serialize)]
#[group(id = "stop", multiple = false)]
struct StopArgs {
    /// Wall-clock budget in seconds (default 60 when no cap is given).
    #[arg(long, group = "stop")]
    budget_seconds: Option<f64>,
    /// Iteration cap; makes the run reproducible.
    #[arg(long, group = "stop")]
    iterations: Option<u64>,
}

impl StopArgs {
    fn config(&self, products: usize, seed: u64) -> Result<SearchConfig> {
        match (self.iterations, self.budget_seconds) {
            (Some(k), _) => Ok(SearchConfig::with_iterations(products, k, seed)),
            (None, s) => {
                let s = s.unwrap_or(60.0);
                if !(s.is_finite() && s > 0.0) {
                    return Err(Error::InvalidConfig("--budget-seconds must be > 0".into()));
                }
                Ok(SearchConfig::with_time_budget(products, Duration::from_secs_f64(s), seed))
            }
        }
    }

    fn reproducible(&self) -> bool {
        self.iterations.is_some()
    }
}

#[derive(Debug, Args, Serialize)]
struct GenerateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    model: ModelArgs,
    /// Number of products.
    #[arg(long, default_value_t = 10)]
    products: usize,
    #[arg(long, value_enum, default_value_t = Strategy::Search)]
    strategy: Strategy,
    #[command(flatten)]
    #[serde(flatten)]
    stop: StopArgs,
    #[arg(long, value_enum, default_value_t = PrioritizerArg::NearOptimal)]
    prioritizer: PrioritizerArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    #[serde(skip)]
    out: OutArgs,
}

#[derive(Debug, Args, Serialize)]
struct PrioritizeArgs {
    #[command(flatten)]
    #[serde(flatten)]
    model: ModelArgs,
    /// products.csv to reorder.
    #[arg(long)]
    suite: PathBuf,
    #[arg(long, value_enum, default_value_t = Algorithm::NearOptimal)]
    algorithm: Algorithm,
    /// Seed for the random algorithm.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    #[serde(skip)]
    out: OutArgs,
}

#[derive(Debug, Args, Serialize)]
struct CoverageArgs {
    #[command(flatten)]
    #[serde(flatten)]
    model: ModelArgs,
    #[arg(long)]
    suite: PathBuf,
    /// Interaction strength.
    #[arg(long, default_value_t = 2)]
    t: usize,
    #[arg(long, value_enum, default_value_t = Mode::Exact)]
    mode: Mode,
    /// Sample size in sampled mode.
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = EstimatorArg::UniformRejection)]
    estimator: EstimatorArg,
    /// Largest t-set index space exact mode will enumerate.
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_BUDGET)]
    budget: u128,
    /// Also write the per-prefix coverage curve and its area.
    #[arg(long)]
    curve: bool,
    #[command(flatten)]
    #[serde(skip)]
    out: OutArgs,
}

#[derive(Debug, Clone, Serialize)]
struct RandomModels {
    count: usize,
    size: usize,
    seed: u64,
}

fn parse_random_models(s: &str) -> std::result::Result<RandomModels, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [count, size, seed] = parts.as_slice() else {
        return Err("expected N,SIZE,SEED".into());
    };
    let count: usize = count.parse().map_err(|e| format!("N: {e}"))?;
    let size: usize = size.parse().map_err(|e| format!("SIZE: {e}"))?;
    let seed: u64 = seed.parse().map_err(|e| format!("SEED: {e}"))?;
    Ok(RandomModels { count, size, seed })
}

#[derive(Debug, Args, Serialize)]
#[group(id = "source", required = true, multiple = false)]
struct SourceArgs {
    /// Directory of model files.
    #[arg(long, group = "source")]
    models: Option<PathBuf>,
    /// Generate N random models of SIZE features from SEED.
    #[arg(long, value_name = "N,SIZE,SEED", value_parser = parse_random_models, group = "source")]
    random_models: Option<RandomModels>,
}

#[derive(Debug, Args, Serialize)]
struct EvaluateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    source: SourceArgs,
    /// Clauses per feature for random models.
    #[arg(long, default_value_t = 0.5)]
    density: f64,
    /// Interaction strengths.
    #[arg(long, value_delimiter = ',', default_value = "2")]
    t: Vec<usize>,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "search,unpredictable")]
    strategies: Vec<Strategy>,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "random,greedy,near-optimal")]
    prioritizers: Vec<Algorithm>,
    #[arg(long, default_value_t = 1)]
    repeats: usize,
    #[arg(long, default_value_t = 10)]
    products: usize,
    #[command(flatten)]
    #[serde(flatten)]
    stop: StopArgs,
    /// Sample size when exact enumeration exceeds the budget.
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_BUDGET)]
    budget: u128,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    #[serde(skip)]
    out: OutArgs,
}

#[derive(Debug, Args)]
struct ReplayArgs {
    /// manifest.json of the run to repeat.
    manifest: PathBuf,
    #[command(flatten)]
    out: OutArgs,
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse { .. } | Error::InvalidModel(_) | Error::LiteralOutOfRange { .. } => 3,
        Error::InconsistentModel => 4,
        Error::SuiteMismatch(_) | Error::LengthMismatch { .. } | Error::InvalidProduct { .. } => 5,
        Error::BudgetExceeded { .. } => 6,
        Error::EmptySuite
        | Error::InvalidConfig(_)
        | Error::StrengthOutOfRange { .. }
        | Error::InvalidTSet(_)
        | Error::ContradictoryAssumptions(_) => 2,
        _ => 1,
    }
}

/// Runs the tool on `args` (including the program name) and returns the
/// process exit code. Diagnostics go to standard error.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let raw: Vec<String> = args.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    match dispatch(cli.command, &raw) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn dispatch(command: Command, raw: &[String]) -> Result<()> {
    let started = chrono::Utc::now();
    let (name, bundle, meta, out) = match command {
        Command::Generate(a) => ("generate", generate(&a)?, meta_for(&a, Some(&a.model), Some(a.seed), a.stop.reproducible())?, a.out.out),
        Command::Prioritize(a) => ("prioritize", prioritize(&a)?, meta_for(&a, Some(&a.model), Some(a.seed), true)?, a.out.out),
        Command::Coverage(a) => ("coverage", coverage(&a)?, meta_for(&a, Some(&a.model), Some(a.seed), true)?, a.out.out),
        Command::Evaluate(a) => ("evaluate", evaluate(&a)?, meta_for(&a, None, Some(a.seed), a.stop.reproducible())?, a.out.out),
        Command::Replay(a) => return replay(&a),
    };
    write_bundle(name, bundle, meta, manifest_args(raw)?, started, &out)
}

struct Meta {
    parameters: BTreeMap<String, serde_json::Value>,
    model_path: Option<String>,
    model_format: Option<ModelFormat>,
    seed: Option<u64>,
    reproducible: bool,
}

fn meta_for<A: Serialize>(args: &A, model: Option<&ModelArgs>, seed: Option<u64>, reproducible: bool) -> Result<Meta> {
    let parameters = match serde_json::to_value(args)? {
        serde_json::Value::Object(map) => map.into_iter().collect(),
        other => BTreeMap::from([("value".to_string(), other)]),
    };
    Ok(Meta {
        parameters,
        model_path: model.map(|m| absolute(&m.model).display().to_string()),
        model_format: model.and_then(|m| m.format.or_else(|| ModelFormat::from_path(&m.model))),
        seed,
        reproducible,
    })
}

fn absolute(path: &Path) -> PathBuf {
    fs::canonicalize(path).unwrap_or_else(|_| path.to_path_buf())
}

/// Raw arguments with `--out` removed and input paths made absolute, so a
/// manifest can be replayed from any directory.
fn manifest_args(raw: &[String]) -> Result<Vec<String>> {
    let mut out = Vec::with_capacity(raw.len());
    let mut it = raw.iter();
    while let Some(arg) = it.next() {
        if arg == "--out" {
            it.next();
            continue;
        }
        if arg.starts_with("--out=") {
            continue;
        }
        if PATH_FLAGS.contains(&arg.as_str()) {
            out.push(arg.clone());
            if let Some(v) = it.next() {
                out.push(absolute(Path::new(v)).display().to_string());
            }
            continue;
        }
        if let Some((flag, v)) = arg.split_once('=') {
            if PATH_FLAGS.contains(&flag) {
                out.push(format!("{flag}={}", absolute(Path::new(v)).display()));
                continue;
            }
        }
        out.push(arg.clone());
    }
    Ok(out)
}

fn write_bundle(
    command: &str,
    mut bundle: OutputBundle,
    meta: Meta,
    args: Vec<String>,
    started: chrono::DateTime<chrono::Utc>,
    out: &Path,
) -> Result<()> {
    let args = args.into_iter().skip(1).collect();
    let mut outputs = bundle.names();
    outputs.push("manifest.json".into());
    let manifest = RunManifest {
        schema_version: MANIFEST_SCHEMA_VERSION,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        command: command.to_string(),
        args,
        model_path: meta.model_path,
        model_format: meta.model_format,
        parameters: meta.parameters,
        seed: meta.seed,
        reproducible: meta.reproducible,
        outputs,
        started_at: started.to_rfc3339(),
        finished_at: chrono::Utc::now().to_rfc3339(),
    };
    let mut json = serde_json::to_string_pretty(&manifest)?;
    json.push('\n');
    bundle.add("manifest.json", json);
    for path in bundle.write_to(out)? {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn replay(a: &ReplayArgs) -> Result<()> {
    let manifest = RunManifest::read(&a.manifest)?;
    if !manifest.reproducible {
        eprintln!("warning: the original run was limited by wall-clock time; outputs may differ");
    }
    let mut argv: Vec<OsString> = vec!["twise".into(), manifest.command.clone().into()];
    argv.extend(manifest.args.iter().map(OsString::from));
    argv.push("--out".into());
    argv.push(a.out.out.clone().into_os_string());
    let cli = Cli::try_parse_from(&argv)
        .map_err(|e| Error::InvalidConfig(format!("manifest arguments do not parse: {e}")))?;
    if matches!(cli.command, Command::Replay(_)) {
        return Err(Error::InvalidConfig("a manifest cannot replay another replay".into()));
    }
    let raw: Vec<String> = argv.iter().skip(1).map(|s| s.to_string_lossy().into_owned()).collect();
    dispatch(cli.command, &raw)
}

fn load_model(m: &ModelArgs) -> Result<FeatureModel> {
    Ok(io::read_model(&m.model, m.format)?.0)
}

fn load_suite(fm: &FeatureModel, path: &Path) -> Result<Vec<Product>> {
    let suite = io::products_from_csv(fm, &fs::read_to_string(path)?)?;
    if suite.is_empty() {
        return Err(Error::EmptySuite);
    }
    for (index, p) in suite.iter().enumerate() {
        if !fm.is_valid_product(p)? {
            return Err(Error::InvalidProduct { index });
        }
    }
    Ok(suite)
}

fn generate(a: &GenerateArgs) -> Result<OutputBundle> {
    let fm = load_model(&a.model)?;
    let cfg = a.stop.config(a.products, a.seed)?.prioritizer(a.prioritizer.into());
    cfg.validate()?;
    let mut bundle = OutputBundle::new();
    match a.strategy {
        Strategy::Search => {
            let outcome = search_generate(&fm, &cfg)?;
            bundle.add("products.csv", io::products_to_csv(&fm, &outcome.suite.products)?);
            bundle.add("trace.csv", io::trace_to_csv(&outcome.trace, !a.stop.reproducible())?);
            eprintln!(
                "search: {} iterations, {} accepted, fitness {:.6} -> {:.6}",
                outcome.iterations,
                outcome.trace.accepted(),
                outcome.trace.initial_fitness,
                outcome.fitness
            );
        }
        Strategy::Unpredictable => {
            let products = unpredictable_generate(&fm, a.products, a.seed)?;
            let order = cfg.prioritizer.order(&crate::similarity::DistanceMatrix::new(&products)?);
            let ordered: Vec<Product> = order.into_iter().map(|i| products[i].clone()).collect();
            bundle.add("products.csv", io::products_to_csv(&fm, &ordered)?);
        }
    }
    Ok(bundle)
}

fn prioritize(a: &PrioritizeArgs) -> Result<OutputBundle> {
    let fm = load_model(&a.model)?;
    let suite = load_suite(&fm, &a.suite)?;
    let ordered = a.algorithm.apply(&suite, a.seed)?;
    let mut bundle = OutputBundle::new();
    bundle.add("products.csv", io::products_to_csv(&fm, &ordered)?);
    Ok(bundle)
}

fn sampled_invocation(a: &CoverageArgs) -> String {
    format!(
        "twise coverage --model {} --suite {} --t {} --mode sampled --samples 100000 --seed {}",
        a.model.model.display(),
        a.suite.display(),
        a.t,
        a.seed
    )
}

fn coverage(a: &CoverageArgs) -> Result<OutputBundle> {
    let fm = load_model(&a.model)?;
    let suite = load_suite(&fm, &a.suite)?;
    let (report, curve) = match a.mode {
        Mode::Exact => {
            let report = coverage::exact_coverage_with_budget(&fm, &suite, a.t, a.budget).inspect_err(|e| {
                if matches!(e, Error::BudgetExceeded { .. }) {
                    eprintln!("exact enumeration is too large; try:\n  {}", sampled_invocation(a));
                }
            })?;
            let curve = if a.curve {
                Some(coverage::coverage_curve(&fm, &suite, a.t, CurveMode::Exact { budget: a.budget })?)
            } else {
                None
            };
            (report, curve)
        }
        Mode::Sampled => {
            let estimator: Estimator = a.estimator.into();
            let sample = if a.curve || estimator == Estimator::UniformRejection {
                Some(ValidTSetSample::draw(&fm, a.t, a.samples, a.seed)?)
            } else {
                None
            };
            let report = match (&sample, estimator) {
                (Some(s), Estimator::UniformRejection) => s.report(&suite),
                _ => coverage::estimate_coverage_with(&fm, &suite, a.t, a.samples, a.seed, estimator)?,
            };
            let curve = if a.curve {
                sample.as_ref().map(|s| coverage::sampled_curve(s, &suite))
            } else {
                None
            };
            (report, curve)
        }
    };
    let auc = curve.as_deref().map(area_under_curve).transpose()?;
    let mut bundle = OutputBundle::new();
    bundle.add("report.json", report_json(&report, auc)?);
    bundle.add("report.csv", io::report_to_csv(&report, auc)?);
    if let Some(curve) = &curve {
        bundle.add("curve.csv", io::curve_to_csv(curve)?);
    }
    eprintln!("{}-wise coverage: {:.6}", report.t, report.coverage);
    Ok(bundle)
}

fn report_json(report: &CoverageReport, auc: Option<f64>) -> Result<String> {
    let mut value = serde_json::to_value(report)?;
    if let (Some(auc), serde_json::Value::Object(map)) = (auc, &mut value) {
        map.insert("auc".into(), serde_json::json!(auc));
    }
    let mut s = serde_json::to_string_pretty(&value)?;
    s.push('\n');
    Ok(s)
}

/// Per-(model, t) coverage meter: exact when the index space fits the
/// budget, otherwise one shared sample.
enum Meter {
    Exact { total: u64 },
    Sampled(ValidTSetSample),
}

impl Meter {
    fn new(fm: &FeatureModel, t: usize, budget: u128, samples: u64, seed: u64) -> Result<Self> {
        match coverage::exact_valid_tsets_with_budget(fm, t, budget) {
            Ok(total) => Ok(Meter::Exact { total }),
            Err(Error::BudgetExceeded { .. }) => Ok(Meter::Sampled(ValidTSetSample::draw(fm, t, samples, seed)?)),
            Err(e) => Err(e),
        }
    }

    fn method(&self) -> &'static str {
        match self {
            Meter::Exact { .. } => "exact",
            Meter::Sampled(_) => "sampled",
        }
    }

    fn curve(&self, fm: &FeatureModel, ordered: &[Product], t: usize) -> Result<Vec<f64>> {
        match self {
            Meter::Exact { total } => coverage::exact_curve(fm, ordered, t, *total),
            Meter::Sampled(s) => Ok(coverage::sampled_curve(s, ordered)),
        }
    }
}

fn load_models(a: &EvaluateArgs) -> Result<Vec<(String, FeatureModel)>> {
    let mut models = Vec::new();
    if let Some(dir) = &a.source.models {
        let mut paths: Vec<PathBuf> = fs::read_dir(dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_file() && ModelFormat::from_path(p).is_some())
            .collect();
        paths.sort();
        for p in paths {
            let name = p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
            models.push((name, io::read_model(&p, None)?.0));
        }
    }
    if let Some(r) = &a.source.random_models {
        for i in 0..r.count {
            let seed = r.seed.wrapping_add(i as u64);
            models.push((format!("random-{i}"), generate_random_model(r.size, a.density, seed)?));
        }
    }
    if models.is_empty() {
        return Err(Error::InvalidConfig("the model set is empty".into()));
    }
    Ok(models)
}

fn dedup<T: PartialEq + Copy>(xs: &[T]) -> Vec<T> {
    let mut out = Vec::new();
    for &x in xs {
        if !out.contains(&x) {
            out.push(x);
        }
    }
    out
}

fn strategy_name(s: Strategy) -> &'static str {
    match s {
        Strategy::Search => "search",
        Strategy::Unpredictable => "unpredictable",
    }
}

struct Row {
    model: String,
    features: usize,
    strategy: Strategy,
    t: usize,
    method: &'static str,
    coverage: Vec<f64>,
    fitness: Vec<f64>,
    auc: Vec<Vec<f64>>,
    seeds: Vec<u64>,
}

fn evaluate(a: &EvaluateArgs) -> Result<OutputBundle> {
    if a.repeats == 0 || a.products == 0 {
        return Err(Error::InvalidConfig("--repeats and --products must be >= 1".into()));
    }
    let ts = dedup(&a.t);
    let strategies = dedup(&a.strategies);
    let mut prioritizers = dedup(&a.prioritizers);
    prioritizers.sort();
    let models = load_models(a)?;
    for &t in &ts {
        for (_, fm) in &models {
            if t < 2 || t > fm.num_features() {
                return Err(Error::StrengthOutOfRange { t, features: fm.num_features() });
            }
        }
    }

    let mut rows = Vec::new();
    let mut timings = csv_writer();
    timings.write_record(["model", "strategy", "repeat", "seed", "generate_ms"])?;
    for (mi, (name, fm)) in models.iter().enumerate() {
        let meters = ts
            .iter()
            .map(|&t| Meter::new(fm, t, a.budget, a.samples, a.seed.wrapping_add(mi as u64)))
            .collect::<Result<Vec<_>>>()?;
        for &strategy in &strategies {
            let mut cells: Vec<Row> = ts
                .iter()
                .zip(&meters)
                .map(|(&t, meter)| Row {
                    model: name.clone(),
                    features: fm.num_features(),
                    strategy,
                    t,
                    method: meter.method(),
                    coverage: Vec::new(),
                    fitness: Vec::new(),
                    auc: vec![Vec::new(); prioritizers.len()],
                    seeds: Vec::new(),
                })
                .collect();
            for r in 0..a.repeats {
                // Paired: every strategy sees the same seed for a given
                // model and repeat.
                let seed = a.seed.wrapping_add((mi * a.repeats + r) as u64);
                let clock = Instant::now();
                let suite = match strategy {
                    Strategy::Search => search_generate(fm, &a.stop.config(a.products, seed)?)?.suite.products,
                    Strategy::Unpredictable => unpredictable_generate(fm, a.products, seed)?,
                };
                timings.write_record([
                    name.clone(),
                    strategy_name(strategy).to_string(),
                    r.to_string(),
                    seed.to_string(),
                    clock.elapsed().as_millis().to_string(),
                ])?;
                let f = fitness(&suite)?;
                for (cell, meter) in cells.iter_mut().zip(&meters) {
                    cell.seeds.push(seed);
                    cell.fitness.push(f);
                    let full = meter.curve(fm, &suite, cell.t)?;
                    cell.coverage.push(*full.last().expect("suite is non-empty"));
                    for (k, &p) in prioritizers.iter().enumerate() {
                        let auc = if p == Algorithm::Random {
                            let mut sum = 0.0;
                            for s in 0..RANDOM_ORDER_SEEDS {
                                let ordered = p.apply(&suite, seed.wrapping_mul(RANDOM_ORDER_SEEDS).wrapping_add(s))?;
                                sum += area_under_curve(&meter.curve(fm, &ordered, cell.t)?)?;
                            }
                            sum / RANDOM_ORDER_SEEDS as f64
                        } else {
                            area_under_curve(&meter.curve(fm, &p.apply(&suite, seed)?, cell.t)?)?
                        };
                        cell.auc[k].push(auc);
                    }
                }
            }
            rows.extend(cells);
        }
    }

    let mut results = csv_writer();
    let mut header: Vec<String> = [
        "model",
        "features",
        "strategy",
        "t",
        "method",
        "repeats",
        "coverage_mean",
        "coverage_std",
        "fitness_mean",
    ]
    .map(String::from)
    .to_vec();
    header.extend(prioritizers.iter().map(|p| format!("auc_{}", p.name())));
    header.push("seeds".into());
    results.write_record(&header)?;
    for row in &rows {
        let mut rec = vec![
            row.model.clone(),
            row.features.to_string(),
            strategy_name(row.strategy).to_string(),
            row.t.to_string(),
            row.method.to_string(),
            row.coverage.len().to_string(),
            stats::mean(&row.coverage).to_string(),
            stats::std_dev(&row.coverage).to_string(),
            stats::mean(&row.fitness).to_string(),
        ];
        rec.extend(row.auc.iter().map(|v| stats::mean(v).to_string()));
        rec.push(row.seeds.iter().map(u64::to_string).collect::<Vec<_>>().join(";"));
        results.write_record(&rec)?;
    }

    let mut summary = csv_writer();
    let mut header = vec!["models".to_string(), "rows".to_string()];
    let mut rec = vec![models.len().to_string(), rows.len().to_string()];
    let mut cov_means = BTreeMap::new();
    for &s in &strategies {
        let means: Vec<f64> = rows.iter().filter(|r| r.strategy == s).map(|r| stats::mean(&r.coverage)).collect();
        let m = stats::mean(&means);
        cov_means.insert(strategy_name(s), m);
        header.push(format!("coverage_mean_{}", strategy_name(s)));
        rec.push(m.to_string());
    }
    let mut auc_means = BTreeMap::new();
    for (k, p) in prioritizers.iter().enumerate() {
        let means: Vec<f64> = rows.iter().map(|r| stats::mean(&r.auc[k])).collect();
        let m = stats::mean(&means);
        auc_means.insert(*p, m);
        header.push(format!("auc_mean_{}", p.name()));
        rec.push(m.to_string());
    }
    header.push("search_ge_unpredictable".into());
    rec.push(match (cov_means.get("search"), cov_means.get("unpredictable")) {
        (Some(s), Some(u)) => (s >= u).to_string(),
        _ => String::new(),
    });
    header.push("auc_ordered".into());
    rec.push(
        match (
            auc_means.get(&Algorithm::Random),
            auc_means.get(&Algorithm::Greedy),
            auc_means.get(&Algorithm::NearOptimal),
        ) {
            (Some(r), Some(g), Some(n)) => (r <= g && g <= n).to_string(),
            _ => String::new(),
        },
    );
    summary.write_record(&header)?;
    summary.write_record(&rec)?;

    let mut bundle = OutputBundle::new();
    bundle.add("results.csv", finish(results)?);
    bundle.add("summary.csv", finish(summary)?);
    bundle.add("timings.csv", finish(timings)?);
    Ok(bundle)
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<Vec<u8>> {
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}
