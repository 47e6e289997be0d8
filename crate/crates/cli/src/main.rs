//! `outcome-forge` command-line interface.
//!
//! Exit codes: 0 success, 2 usage or data error, 3 infeasible experiment
//! (for example a single-class cohort).

mod config;

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use outcome_forge::cohort::{
    class_counts, load_csv, synthesize_cohort, write_records, CohortSpec, Design, Feature,
    FeatureSchema, PatientRecord,
};
use outcome_forge::eval::{
    feature_subset_search, run_design, CvMode, ExperimentConfig, Leakage, Resampling,
    SearchStrategy,
};
use outcome_forge::learners::ModelId;
use outcome_forge::report::{subset_csv, ReportTable};
use outcome_forge::resample::{Method, ResampleConfig};
use outcome_forge::Error;

use config::ConfigFile;

const THREADS_ENV: &str = "OUTCOME_FORGE_THREADS";

#[derive(Debug)]
pub struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: 2,
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Imbalance(_) | Error::InsufficientData(_) => 3,
            _ => 2,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "outcome-forge", version)]
#[command(about = "Epilepsy-surgery outcome classification experiments")]
#[command(arg_required_else_help = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a synthetic cohort drawn from the published marginals.
    Synth(SynthArgs),
    /// Cross-validate classifiers and write a report table.
    Run(RunArgs),
    /// Rank clinical feature subsets by cross-validated accuracy.
    Subset(SubsetArgs),
}

#[derive(Args, Debug)]
struct SynthArgs {
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    n: u64,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Draw the label independently of the features.
    #[arg(long)]
    no_association: bool,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum CvArg {
    Loocv,
    Kfold,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Csv,
    Markdown,
}

#[derive(Args, Debug)]
struct SourceArgs {
    /// Cohort CSV in the canonical column layout.
    #[arg(long, conflicts_with = "synth_n")]
    data: Option<PathBuf>,
    /// Use a synthetic cohort of this size instead of `--data`.
    #[arg(long)]
    synth_n: Option<usize>,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// `all` (the ten standard models) or a comma-separated list of ids.
    #[arg(long)]
    models: Option<String>,
    #[arg(long, value_enum)]
    cv: Option<CvArg>,
    #[arg(long)]
    k: Option<usize>,
    /// Stratify k-fold splits by class.
    #[arg(long)]
    stratified: bool,
    /// `none` or one of random, smote, borderline_smote, svm_smote, adasyn.
    #[arg(long)]
    resample: Option<String>,
    /// before_split or within_fold.
    #[arg(long)]
    leakage: Option<String>,
    #[arg(long)]
    group_by: Option<String>,
    #[arg(long)]
    k_neighbors: Option<usize>,
    #[arg(long)]
    m_neighbors: Option<usize>,
    #[arg(long)]
    adasyn_beta: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// `key = value` file; command-line flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SubsetArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[arg(long, default_value = "knn")]
    model: String,
    #[arg(long, default_value_t = 3)]
    max_size: usize,
    /// exhaustive or greedy_forward.
    #[arg(long, default_value = "exhaustive")]
    strategy: String,
    #[arg(long, value_enum, default_value_t = CvArg::Loocv)]
    cv: CvArg,
    #[arg(long, default_value_t = 8)]
    k: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse<T>(what: &str, s: &str) -> Result<T, CliError>
where
    T: std::str::FromStr,
    T::Err: fmt::Display,
{
    s.parse().map_err(|e| CliError::usage(format!("{what}: {e}")))
}

/// Writes through a temporary file in the target directory and renames it
/// into place; `None` writes to stdout.
fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    let Some(path) = out else {
        let mut stdout = std::io::stdout().lock();
        return stdout
            .write_all(text.as_bytes())
            .map_err(|e| CliError::usage(format!("cannot write stdout: {e}")));
    };
    let fail = |e: &dyn fmt::Display| CliError::usage(format!("cannot write {}: {e}", path.display()));
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| fail(&e))?;
    tmp.write_all(text.as_bytes()).map_err(|e| fail(&e))?;
    tmp.persist(path).map_err(|e| fail(&e.error))?;
    Ok(())
}

fn records_to_csv(records: &[PatientRecord], schema: &FeatureSchema) -> Result<String, CliError> {
    let mut buf = Vec::new();
    write_records(&mut buf, records, schema)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

fn cmd_synth(args: &SynthArgs) -> Result<(), CliError> {
    let spec = if args.no_association {
        CohortSpec::reference().with_association(None)
    } else {
        CohortSpec::reference()
    };
    let schema = FeatureSchema::canonical();
    let records = synthesize_cohort(&spec, args.n as usize, args.seed)?;
    emit(Some(&args.out), &records_to_csv(&records, &schema)?)?;
    for (label, count) in class_counts(&records) {
        println!("class {label}: {count}");
    }
    Ok(())
}

fn load_source(data: Option<&Path>, synth_n: Option<usize>, seed: u64) -> Result<Vec<PatientRecord>, CliError> {
    let schema = FeatureSchema::canonical();
    match (data, synth_n) {
        (Some(path), None) => Ok(load_csv(path, &schema)?),
        (None, Some(n)) => {
            if n == 0 {
                return Err(CliError::usage("--synth-n must be at least 1"));
            }
            Ok(synthesize_cohort(&CohortSpec::reference(), n, seed)?)
        }
        (Some(_), Some(_)) => Err(CliError::usage("--data and --synth-n are mutually exclusive")),
        (None, None) => Err(CliError::usage("one of --data or --synth-n is required")),
    }
}

fn parse_models(list: &str) -> Result<Vec<ModelId>, CliError> {
    if list.trim() == "all" {
        return Ok(ModelId::STANDARD.to_vec());
    }
    let models = list
        .split(',')
        .map(|s| parse::<ModelId>("--models", s.trim()))
        .collect::<Result<Vec<_>, _>>()?;
    if models.is_empty() {
        return Err(CliError::usage("--models is empty"));
    }
    Ok(models)
}

fn parse_feature(s: &str) -> Result<Feature, CliError> {
    Feature::from_name(s).ok_or_else(|| CliError::usage(format!("unknown feature {s:?}")))
}

fn cv_mode(cv: CvArg, k: usize, stratified: bool) -> CvMode {
    match cv {
        CvArg::Loocv => CvMode::Loocv,
        CvArg::Kfold => CvMode::KFold { k, stratified },
    }
}

/// Fully resolved `run` settings.
#[derive(Debug)]
struct RunConfig {
    data: Option<PathBuf>,
    synth_n: Option<usize>,
    experiment: ExperimentConfig,
    out: Option<PathBuf>,
    format: FormatArg,
}

fn resolve_run(args: &RunArgs) -> Result<RunConfig, CliError> {
    let file = match &args.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    let (data, synth_n) = if args.source.data.is_some() || args.source.synth_n.is_some() {
        (args.source.data.clone(), args.source.synth_n)
    } else {
        (file.get("data").map(PathBuf::from), file.parsed("synth_n")?)
    };
    let seed = match args.seed {
        Some(s) => s,
        None => file
            .parsed("seed")?
            .ok_or_else(|| CliError::usage("a master --seed is required"))?,
    };
    let models = match args.models.as_deref().or(file.get("models")) {
        Some(list) => parse_models(list)?,
        None => ModelId::STANDARD.to_vec(),
    };
    let cv = match args.cv {
        Some(c) => c,
        None => match file.get("cv") {
            Some(s) => CvArg::from_str(s, true).map_err(|e| CliError::usage(format!("cv: {e}")))?,
            None => CvArg::Loocv,
        },
    };
    let k = match args.k {
        Some(k) => k,
        None => file.parsed("k")?.unwrap_or(8),
    };
    let stratified = args.stratified || file.parsed("stratified")?.unwrap_or(false);
    let resample = args
        .resample
        .clone()
        .or_else(|| file.get("resample").map(String::from))
        .unwrap_or_else(|| Method::Random.as_str().to_string());
    let leakage: Leakage = match args.leakage.as_deref().or(file.get("leakage")) {
        Some(s) => parse("--leakage", s)?,
        None => Leakage::default(),
    };
    let resampling = if resample == "none" {
        if args.leakage.is_some() {
            return Err(CliError::usage("--leakage requires a resampling method"));
        }
        None
    } else {
        let mut rc = ResampleConfig::new(parse("--resample", &resample)?, seed);
        if let Some(k) = args.k_neighbors.or(file.parsed("k_neighbors")?) {
            rc.k_neighbors = k;
        }
        if let Some(m) = args.m_neighbors.or(file.parsed("m_neighbors")?) {
            rc.m_neighbors = m;
        }
        if let Some(b) = args.adasyn_beta.or(file.parsed("adasyn_beta")?) {
            rc.adasyn_beta = b;
        }
        rc.validate()?;
        Some(Resampling { config: rc, leakage })
    };
    let group_by = args
        .group_by
        .as_deref()
        .or(file.get("group_by"))
        .map(parse_feature)
        .transpose()?;
    if group_by.is_some_and(Feature::is_numeric) {
        return Err(CliError::usage("--group-by needs a categorical feature"));
    }
    let format = match args.format {
        Some(f) => f,
        None => match file.get("format") {
            Some(s) => FormatArg::from_str(s, true).map_err(|e| CliError::usage(format!("format: {e}")))?,
            None => FormatArg::Csv,
        },
    };
    let out = args.out.clone().or_else(|| file.get("out").map(PathBuf::from));
    Ok(RunConfig {
        data,
        synth_n,
        experiment: ExperimentConfig {
            models,
            cv: cv_mode(cv, k, stratified),
            resampling,
            group_by,
            seed,
        },
        out,
        format,
    })
}

fn cmd_run(args: &RunArgs) -> Result<(), CliError> {
    let cfg = resolve_run(args)?;
    let records = load_source(cfg.data.as_deref(), cfg.synth_n, cfg.experiment.seed)?;
    if records.is_empty() {
        return Err(CliError::usage("the cohort has no records"));
    }
    let design = Design::<f64>::from_records(&records, &FeatureSchema::canonical())?;
    let result = run_design(&design, &cfg.experiment)?;
    let table = ReportTable::from_experiment(&result);
    let text = match cfg.format {
        FormatArg::Csv => table.to_csv(),
        FormatArg::Markdown => table.to_markdown(),
    };
    emit(cfg.out.as_deref(), &text)?;
    for m in result.models.iter().filter(|m| !m.converged) {
        log::warn!("{} did not converge on every fold", m.model);
    }
    Ok(())
}

fn cmd_subset(args: &SubsetArgs) -> Result<(), CliError> {
    if args.max_size > Feature::ALL.len() {
        return Err(CliError::usage(format!(
            "--max-size must be at most {}",
            Feature::ALL.len()
        )));
    }
    let strategy: SearchStrategy = parse("--strategy", &args.strategy)?;
    let model: ModelId = parse("--model", &args.model)?;
    let records = load_source(args.source.data.as_deref(), args.source.synth_n, args.seed)?;
    let design = Design::<f64>::from_records(&records, &FeatureSchema::canonical())?;
    let scores = feature_subset_search(
        &design,
        &model.default_spec(model.index() as u64),
        args.max_size,
        strategy,
        cv_mode(args.cv, args.k, false),
        args.seed,
    )?;
    emit(args.out.as_deref(), &subset_csv(&scores))
}

fn init_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n >= 1)
        .ok_or_else(|| CliError::usage(format!("{THREADS_ENV} must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::usage(format!("cannot size thread pool: {e}")))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = init_threads().and_then(|()| match &cli.command {
        Command::Synth(a) => cmd_synth(a),
        Command::Run(a) => cmd_run(a),
        Command::Subset(a) => cmd_subset(a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}
