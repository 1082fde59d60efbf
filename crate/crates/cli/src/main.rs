//! cardiopipe: command-line surface of the cardiac severity pipeline.
//!
//! Exit codes: 0 success, 2 input or format error, 3 pipeline/agent failure,
//! 4 precondition violation.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};

use cardiopipe_core::blackboard::{run_pipeline, PipelineConfig, PipelineOutcome};
use cardiopipe_core::error::CoreError;
use cardiopipe_core::eval::{self, EvalError};
use cardiopipe_core::ingest::{
    labeled_distribution, parse_processed, parse_raw, AttributeSchema, ClassLabel, Dataset,
    IngestError, CLASS_COUNT,
};
use cardiopipe_core::nbc::{self, NbcError, NbcModel};
use cardiopipe_core::preprocess::{
    discretize, filter_select, wrapper_select, FeatureSubset, SelectError, SelectionConfig,
};
use cardiopipe_core::report::emit_tables;
use cardiopipe_core::significance::{
    rank_symptoms, ranking_to_csv, LabelCollapse, MiMode, SignificanceError, SignificanceMode,
};

const SCHEMA_ENV: &str = "CARDIOPIPE_SCHEMA";

#[derive(Parser)]
#[command(name = "cardiopipe", version, about = "Heart-disease severity pipeline: ingestion, feature selection, symptom ranking, naive Bayes classification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a dataset file and print its record count and severity distribution
    Ingest(IngestArgs),
    /// Filter-stage feature selection; writes the subset CSV
    Filter(FilterArgs),
    /// Wrapper-stage selection starting from a subset CSV
    Wrapper(WrapperArgs),
    /// Rank symptoms by the significance index S = I/I0
    Rank(RankArgs),
    /// Fit the naive Bayes model and write its serialization
    Train(TrainArgs),
    /// Score one record with a model, or a symptom set against a likelihood table
    Predict(PredictArgs),
    /// Stratified cross-validation metrics over a selected subset
    Evaluate(EvaluateArgs),
    /// Full blackboard pipeline per dataset; writes reports and manifests
    Pipeline(PipelineArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Raw,
    Processed,
}

#[derive(Clone, Copy, ValueEnum)]
enum MiModeArg {
    Standard,
    Literal,
}

impl From<MiModeArg> for MiMode {
    fn from(value: MiModeArg) -> Self {
        match value {
            MiModeArg::Standard => MiMode::Standard,
            MiModeArg::Literal => MiMode::Literal,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum I0ModeArg {
    Binary,
    Multiclass,
}

impl From<I0ModeArg> for LabelCollapse {
    fn from(value: I0ModeArg) -> Self {
        match value {
            I0ModeArg::Binary => LabelCollapse::Binary,
            I0ModeArg::Multiclass => LabelCollapse::Multiclass,
        }
    }
}

#[derive(Args)]
struct InputOpts {
    /// Dataset file to read
    path: PathBuf,
    /// Schema file (default: $CARDIOPIPE_SCHEMA, then the built-in schema)
    #[arg(long)]
    schema: Option<PathBuf>,
    /// Input format
    #[arg(long, value_enum, default_value = "raw")]
    format: Format,
}

#[derive(Args)]
struct SelectionOpts {
    /// Selection config file (`key = value` lines)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Seed for fold assignment and all randomized choices [default: 0]
    #[arg(long)]
    seed: Option<u64>,
    /// Missing-ratio cap of the filter stage [default: 0.5]
    #[arg(long)]
    missing_cap: Option<f64>,
    /// Relevance threshold delta of the filter stage [default: 0.01]
    #[arg(long)]
    delta: Option<f64>,
    /// Stopping improvement epsilon of the wrapper stage [default: 0.001]
    #[arg(long)]
    epsilon: Option<f64>,
    /// Internal folds of the wrapper stage [default: 5]
    #[arg(long)]
    folds: Option<usize>,
}

impl SelectionOpts {
    fn build(&self) -> Result<SelectionConfig, CliError> {
        let mut config = match &self.config {
            Some(path) => SelectionConfig::from_file(path).map_err(input_error)?,
            None => SelectionConfig::default(),
        };
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(cap) = self.missing_cap {
            config.missing_ratio_cap = cap;
        }
        if let Some(delta) = self.delta {
            config.relevance_threshold = delta;
        }
        if let Some(epsilon) = self.epsilon {
            config.wrapper_epsilon = epsilon;
        }
        if let Some(folds) = self.folds {
            config.wrapper_folds = folds;
        }
        config.validate().map_err(input_error)?;
        Ok(config)
    }
}

#[derive(Args)]
struct IngestArgs {
    #[command(flatten)]
    input: InputOpts,
}

#[derive(Args)]
struct FilterArgs {
    #[command(flatten)]
    input: InputOpts,
    #[command(flatten)]
    selection: SelectionOpts,
    /// Equal-frequency bin count for continuous attributes
    #[arg(long, default_value_t = 4)]
    bins: usize,
    /// Output CSV path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct WrapperArgs {
    #[command(flatten)]
    input: InputOpts,
    /// Starting subset CSV (the filter stage's output)
    #[arg(long)]
    subset: PathBuf,
    #[command(flatten)]
    selection: SelectionOpts,
    /// Equal-frequency bin count for continuous attributes
    #[arg(long, default_value_t = 4)]
    bins: usize,
    /// Output CSV path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RankArgs {
    #[command(flatten)]
    input: InputOpts,
    /// Subset CSV to rank (filter runs internally when omitted)
    #[arg(long)]
    subset: Option<PathBuf>,
    #[command(flatten)]
    selection: SelectionOpts,
    /// Equal-frequency bin count for continuous attributes
    #[arg(long, default_value_t = 4)]
    bins: usize,
    /// Mutual-information expression
    #[arg(long, value_enum, default_value = "standard")]
    mi_mode: MiModeArg,
    /// Label collapse for I and I0
    #[arg(long, value_enum, default_value = "binary")]
    i0_mode: I0ModeArg,
    /// Output CSV path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    input: InputOpts,
    /// Subset CSV to train on (filter + wrapper run internally when omitted)
    #[arg(long)]
    subset: Option<PathBuf>,
    #[command(flatten)]
    selection: SelectionOpts,
    /// Laplace smoothing
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// Equal-frequency bin count for continuous attributes
    #[arg(long, default_value_t = 4)]
    bins: usize,
    /// Output model path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PredictArgs {
    /// Fitted model file (pairs with --record)
    #[arg(long, conflicts_with = "table", requires = "record")]
    model: Option<PathBuf>,
    /// Single-record file to score
    #[arg(long)]
    record: Option<PathBuf>,
    /// Record file schema (default: $CARDIOPIPE_SCHEMA, then built-in)
    #[arg(long)]
    schema: Option<PathBuf>,
    /// Record file format
    #[arg(long, value_enum, default_value = "processed")]
    format: Format,
    /// Symptom likelihood CSV (pairs with --present/--absent)
    #[arg(long)]
    table: Option<PathBuf>,
    /// Symptom reported present (repeatable)
    #[arg(long)]
    present: Vec<String>,
    /// Symptom reported absent (repeatable)
    #[arg(long)]
    absent: Vec<String>,
    /// Five comma-separated class priors [default: uniform]
    #[arg(long)]
    priors: Option<String>,
}

#[derive(Args)]
struct EvaluateArgs {
    #[command(flatten)]
    input: InputOpts,
    /// Subset CSV to evaluate (filter + wrapper run internally when omitted)
    #[arg(long)]
    subset: Option<PathBuf>,
    #[command(flatten)]
    selection: SelectionOpts,
    /// Cross-validation folds
    #[arg(long, default_value_t = 5)]
    k: usize,
    /// Laplace smoothing
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// Equal-frequency bin count for continuous attributes
    #[arg(long, default_value_t = 4)]
    bins: usize,
    /// Write metrics CSV here as well
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PipelineArgs {
    /// Dataset files (one pipeline run each)
    #[arg(required = true)]
    paths: Vec<PathBuf>,
    /// Schema file (default: $CARDIOPIPE_SCHEMA, then the built-in schema)
    #[arg(long)]
    schema: Option<PathBuf>,
    /// Input format
    #[arg(long, value_enum, default_value = "raw")]
    format: Format,
    #[command(flatten)]
    selection: SelectionOpts,
    /// Laplace smoothing of the classifier
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// Equal-frequency bin count for continuous attributes
    #[arg(long, default_value_t = 4)]
    bins: usize,
    /// Evaluation cross-validation folds
    #[arg(long, default_value_t = 5)]
    k: usize,
    /// Mutual-information expression
    #[arg(long, value_enum, default_value = "standard")]
    mi_mode: MiModeArg,
    /// Label collapse for I and I0
    #[arg(long, value_enum, default_value = "binary")]
    i0_mode: I0ModeArg,
    /// Output directory
    #[arg(long, default_value = "cardiopipe-out")]
    out: PathBuf,
    /// Datasets processed concurrently (outputs are identical regardless)
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

struct CliError {
    code: u8,
    message: String,
}

fn input_error(e: impl std::fmt::Display) -> CliError {
    CliError { code: 2, message: e.to_string() }
}

fn precondition_error(e: impl std::fmt::Display) -> CliError {
    CliError { code: 4, message: e.to_string() }
}

fn classify_nbc(e: &NbcError) -> u8 {
    match e {
        NbcError::EmptyTrainingSet
        | NbcError::InvalidAlpha(_)
        | NbcError::UnknownAttribute(_)
        | NbcError::UnknownSymptomName(_)
        | NbcError::InvalidPriors(_) => 4,
        NbcError::RowArity { .. }
        | NbcError::ValueOutOfRange { .. }
        | NbcError::BadHeader(_)
        | NbcError::BadModelFile { .. }
        | NbcError::Io(_) => 2,
    }
}

fn classify_select(e: &SelectError) -> u8 {
    match e {
        SelectError::InvalidConfig { .. } | SelectError::InvalidSubsetCsv { .. } | SelectError::Io(_) => 2,
        SelectError::InvalidBinCount(_) | SelectError::NoCoverage { .. } | SelectError::UnknownAttribute(_) => 4,
        SelectError::Model(e) => classify_nbc(e),
    }
}

fn classify_core(e: &CoreError) -> u8 {
    match e {
        CoreError::Ingest(_) => 2,
        CoreError::Select(e) => classify_select(e),
        CoreError::Significance(
            SignificanceError::EmptyDistribution
            | SignificanceError::DegenerateLabels
            | SignificanceError::NoCoverage(_)
            | SignificanceError::UnknownAttribute(_),
        ) => 4,
        CoreError::Nbc(e) => classify_nbc(e),
        CoreError::Eval(EvalError::TooFewRecords { .. }) => 4,
        CoreError::Eval(EvalError::Model(e)) => classify_nbc(e),
    }
}

impl From<IngestError> for CliError {
    fn from(e: IngestError) -> Self {
        CliError { code: 2, message: e.to_string() }
    }
}

impl From<SelectError> for CliError {
    fn from(e: SelectError) -> Self {
        CliError { code: classify_select(&e), message: e.to_string() }
    }
}

impl From<NbcError> for CliError {
    fn from(e: NbcError) -> Self {
        CliError { code: classify_nbc(&e), message: e.to_string() }
    }
}

impl From<SignificanceError> for CliError {
    fn from(e: SignificanceError) -> Self {
        CliError { code: 4, message: e.to_string() }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        let code = match &e {
            EvalError::TooFewRecords { .. } => 4,
            EvalError::Model(m) => classify_nbc(m),
        };
        CliError { code, message: e.to_string() }
    }
}

impl From<cardiopipe_core::blackboard::BlackboardError> for CliError {
    fn from(e: cardiopipe_core::blackboard::BlackboardError) -> Self {
        use cardiopipe_core::blackboard::BlackboardError as B;
        let code = match &e {
            B::AgentFailure { source, .. } => match classify_core(source) {
                2 => 2,
                _ => 3,
            },
            _ => 3,
        };
        CliError { code, message: e.to_string() }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(error) => {
            eprintln!("error: {}", error.message);
            ExitCode::from(error.code)
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Ingest(args) => cmd_ingest(args),
        Command::Filter(args) => cmd_filter(args),
        Command::Wrapper(args) => cmd_wrapper(args),
        Command::Rank(args) => cmd_rank(args),
        Command::Train(args) => cmd_train(args),
        Command::Predict(args) => cmd_predict(args),
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::Pipeline(args) => cmd_pipeline(args),
    }
}

fn resolve_schema(explicit: &Option<PathBuf>, format: Format) -> Result<Arc<AttributeSchema>, CliError> {
    let from_env = std::env::var_os(SCHEMA_ENV).map(PathBuf::from);
    let path = explicit.clone().or(from_env);
    match path {
        Some(path) => {
            let schema = AttributeSchema::from_file(&path).map_err(input_error)?;
            Ok(Arc::new(schema))
        }
        None => Ok(match format {
            Format::Raw => AttributeSchema::heart76(),
            Format::Processed => AttributeSchema::processed14(),
        }),
    }
}

fn load_dataset(input: &InputOpts) -> Result<Dataset, CliError> {
    let schema = resolve_schema(&input.schema, input.format)?;
    let text = std::fs::read_to_string(&input.path)
        .map_err(|e| input_error(format!("{}: {e}", input.path.display())))?;
    let name = input
        .path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".into());
    let dataset = match input.format {
        Format::Raw => parse_raw(&text, &schema, &name)?,
        Format::Processed => parse_processed(&text, &schema, &name)?,
    };
    Ok(dataset)
}

fn write_or_print(out: &Option<PathBuf>, contents: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, contents)
            .map_err(|e| input_error(format!("{}: {e}", path.display()))),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

fn distribution_line(counts: &[usize; CLASS_COUNT]) -> String {
    ClassLabel::ALL
        .iter()
        .map(|class| format!("{}={}", class.name(), counts[class.code() as usize]))
        .collect::<Vec<_>>()
        .join(" ")
}

fn cmd_ingest(args: IngestArgs) -> Result<(), CliError> {
    let dataset = load_dataset(&args.input)?;
    println!("{} records", dataset.len());
    let (counts, unlabeled) = labeled_distribution(&dataset);
    println!("class distribution: {}", distribution_line(&counts));
    if unlabeled > 0 {
        println!("records without a usable label: {unlabeled}");
    }
    Ok(())
}

fn cmd_filter(args: FilterArgs) -> Result<(), CliError> {
    let dataset = load_dataset(&args.input)?;
    let config = args.selection.build()?;
    let view = discretize(&dataset, args.bins)?;
    let subset = filter_select(&dataset, &view, &config)?;
    if subset.is_empty_selection() {
        eprintln!("warning: empty selection, no attribute reached delta = {}", config.relevance_threshold);
    }
    write_or_print(&args.out, &subset.to_csv(dataset.schema()))
}

fn load_subset(path: &Path, schema: &AttributeSchema) -> Result<FeatureSubset, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| input_error(format!("{}: {e}", path.display())))?;
    Ok(FeatureSubset::from_csv(&text, schema)?)
}

fn cmd_wrapper(args: WrapperArgs) -> Result<(), CliError> {
    let dataset = load_dataset(&args.input)?;
    let config = args.selection.build()?;
    let view = discretize(&dataset, args.bins)?;
    let start = load_subset(&args.subset, dataset.schema())?;
    if start.is_empty_selection() {
        return Err(precondition_error("starting subset retains no attributes"));
    }
    let (subset, trace) = wrapper_select(&view, &start, &config)?;
    eprintln!(
        "wrapper baseline {:.6}, {} accepted steps",
        trace.baseline,
        trace.steps.len()
    );
    write_or_print(&args.out, &subset.to_csv(dataset.schema()))
}

fn cmd_rank(args: RankArgs) -> Result<(), CliError> {
    let dataset = load_dataset(&args.input)?;
    let config = args.selection.build()?;
    let view = discretize(&dataset, args.bins)?;
    let subset = match &args.subset {
        Some(path) => load_subset(path, dataset.schema())?,
        None => filter_select(&dataset, &view, &config)?,
    };
    let mode = SignificanceMode { mi: args.mi_mode.into(), collapse: args.i0_mode.into() };
    let scores = rank_symptoms(&view, &subset, mode)?;
    write_or_print(&args.out, &ranking_to_csv(&scores, dataset.schema()))
}

/// Filter plus wrapper when no explicit subset is supplied.
fn select_for(
    dataset: &Dataset,
    view: &cardiopipe_core::preprocess::DiscretizedView,
    config: &SelectionConfig,
) -> Result<FeatureSubset, CliError> {
    let filtered = filter_select(dataset, view, config)?;
    let (subset, _) = wrapper_select(view, &filtered, config)?;
    Ok(subset)
}

fn cmd_train(args: TrainArgs) -> Result<(), CliError> {
    let dataset = load_dataset(&args.input)?;
    if dataset.is_empty() {
        return Err(precondition_error("no records to train on"));
    }
    let config = args.selection.build()?;
    let view = discretize(&dataset, args.bins)?;
    let subset = match &args.subset {
        Some(path) => load_subset(path, dataset.schema())?,
        None => select_for(&dataset, &view, &config)?,
    };
    let model = nbc::fit(&view, &subset, args.alpha)?;
    write_or_print(&args.out, &nbc::write_model(&model))
}

fn print_posterior(model: &NbcModel, record: &cardiopipe_core::ingest::PatientRecord) {
    let posterior = model.posterior(record);
    let parts: Vec<String> = ClassLabel::ALL
        .iter()
        .map(|class| format!("{}={:.6}", class.name(), posterior.probs[class.code() as usize]))
        .collect();
    println!("posterior: {}", parts.join(" "));
    println!("log-evidence: {:.6}", posterior.log_evidence);
    println!("predicted: {}", posterior.predicted.name());
}

fn cmd_predict(args: PredictArgs) -> Result<(), CliError> {
    match (&args.model, &args.table) {
        (Some(model_path), None) => {
            let record_path = args.record.as_ref().expect("clap enforces --record");
            let model = nbc::read_model_file(model_path)?;
            let input = InputOpts {
                path: record_path.clone(),
                schema: args.schema.clone(),
                format: args.format,
            };
            let dataset = load_dataset(&input)?;
            if dataset.is_empty() {
                return Err(precondition_error("record file holds no records"));
            }
            print_posterior(&model, dataset.record(0));
            Ok(())
        }
        (None, Some(table_path)) => {
            if args.present.is_empty() && args.absent.is_empty() {
                return Err(precondition_error("give at least one --present or --absent symptom"));
            }
            let text = std::fs::read_to_string(table_path)
                .map_err(|e| input_error(format!("{}: {e}", table_path.display())))?;
            let table = nbc::load_prior_table(&text)?;
            let priors = match &args.priors {
                Some(spec) => parse_priors(spec)?,
                None => [1.0 / CLASS_COUNT as f64; CLASS_COUNT],
            };
            let model = nbc::seed_model_from_table(&table, priors)?;
            let schema = AttributeSchema::heart76();
            let mut record = cardiopipe_core::ingest::PatientRecord::new(
                0,
                vec![None; cardiopipe_core::ingest::ATTRIBUTE_COUNT],
                "query".into(),
            )
            .expect("fixed-width record");
            for (names, value) in [(&args.present, 1.0), (&args.absent, 0.0)] {
                for name in names {
                    let descriptor = schema
                        .by_name(name)
                        .ok_or_else(|| CliError::from(NbcError::UnknownSymptomName(name.clone())))?;
                    record.set_value(descriptor.id, Some(value));
                }
            }
            print_posterior(&model, &record);
            Ok(())
        }
        _ => Err(precondition_error("use either --model with --record, or --table with --present/--absent")),
    }
}

fn parse_priors(spec: &str) -> Result<[f64; CLASS_COUNT], CliError> {
    let parts: Vec<&str> = spec.split(',').collect();
    if parts.len() != CLASS_COUNT {
        return Err(input_error(format!("--priors needs {CLASS_COUNT} comma-separated values")));
    }
    let mut priors = [0.0f64; CLASS_COUNT];
    for (slot, part) in priors.iter_mut().zip(&parts) {
        *slot = part
            .trim()
            .parse()
            .map_err(|_| input_error(format!("bad prior value {part:?}")))?;
    }
    Ok(priors)
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<(), CliError> {
    let dataset = load_dataset(&args.input)?;
    if dataset.is_empty() {
        return Err(precondition_error("no records to evaluate"));
    }
    let config = args.selection.build()?;
    let view = discretize(&dataset, args.bins)?;
    let subset = match &args.subset {
        Some(path) => load_subset(path, dataset.schema())?,
        None => select_for(&dataset, &view, &config)?,
    };
    let evaluation = eval::evaluate(&view, &subset, args.k, config.seed, args.alpha)?;
    let m = &evaluation.metrics;
    println!("records evaluated: {}", evaluation.confusion.total());
    if evaluation.excluded_unlabeled > 0 {
        println!("records without a usable label: {}", evaluation.excluded_unlabeled);
    }
    println!("accuracy: {:.6}", m.accuracy);
    println!("majority baseline: {:.6}", m.majority_baseline);
    println!("binary-collapse accuracy: {:.6}", m.binary_accuracy);
    println!("macro F1: {:.6}", m.macro_f1);
    print!("{}", evaluation.confusion.render_text());
    if let Some(path) = &args.out {
        let mut csv = String::from("metric,value\n");
        csv.push_str(&format!("accuracy,{}\n", m.accuracy));
        csv.push_str(&format!("majority_baseline,{}\n", m.majority_baseline));
        csv.push_str(&format!("binary_accuracy,{}\n", m.binary_accuracy));
        csv.push_str(&format!("macro_f1,{}\n", m.macro_f1));
        std::fs::write(path, csv).map_err(|e| input_error(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

fn pipeline_config(args: &PipelineArgs) -> Result<PipelineConfig, CliError> {
    let selection = args.selection.build()?;
    Ok(PipelineConfig {
        selection,
        alpha: args.alpha,
        bins: args.bins,
        eval_folds: args.k,
        mi_mode: args.mi_mode.into(),
        collapse: args.i0_mode.into(),
    })
}

fn cmd_pipeline(args: PipelineArgs) -> Result<(), CliError> {
    let config = pipeline_config(&args)?;
    let schema_for_output = AttributeSchema::heart76();

    // parse everything first so format errors exit 2 before any run starts
    let mut datasets = Vec::with_capacity(args.paths.len());
    for path in &args.paths {
        let input =
            InputOpts { path: path.clone(), schema: args.schema.clone(), format: args.format };
        datasets.push(load_dataset(&input)?);
    }

    let jobs = args.jobs.max(1);
    let total = datasets.len();
    let mut pending: Vec<(usize, Dataset)> = datasets.into_iter().enumerate().collect();
    let mut outcomes: Vec<Option<Result<PipelineOutcome, CliError>>> =
        (0..total).map(|_| None).collect();
    while !pending.is_empty() {
        let take = jobs.min(pending.len());
        let chunk: Vec<(usize, Dataset)> = pending.drain(..take).collect();
        let results: Vec<(usize, Result<PipelineOutcome, CliError>)> = std::thread::scope(|scope| {
            let handles: Vec<_> = chunk
                .into_iter()
                .map(|(index, dataset)| {
                    let config = &config;
                    scope.spawn(move || (index, run_pipeline(dataset, config).map_err(CliError::from)))
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("pipeline thread panicked")).collect()
        });
        for (index, result) in results {
            outcomes[index] = Some(result);
        }
    }

    let out_dir = &args.out;
    std::fs::create_dir_all(out_dir).map_err(|e| input_error(format!("{}: {e}", out_dir.display())))?;
    let mut reports = Vec::with_capacity(outcomes.len());
    for outcome in outcomes.into_iter() {
        let outcome = outcome.expect("every slot filled")?;
        let report = outcome.report.as_ref().clone();
        let dir = out_dir.join(&report.dataset_name);
        std::fs::create_dir_all(&dir).map_err(|e| input_error(format!("{}: {e}", dir.display())))?;
        let write = |name: &str, contents: &str| -> Result<(), CliError> {
            let path = dir.join(name);
            std::fs::write(&path, contents).map_err(|e| input_error(format!("{}: {e}", path.display())))
        };
        write("report.txt", &report.render_text(&schema_for_output))?;
        write("manifest.txt", &outcome.manifest.render_text())?;
        write("model.txt", &nbc::write_model(&outcome.model))?;
        for (name, contents) in report.csv_files(&schema_for_output) {
            write(&name, &contents)?;
        }
        let m = &report.evaluation.metrics;
        println!(
            "{}: {} records, accuracy {:.4}, binary {:.4}, report in {}",
            report.dataset_name,
            report.record_count,
            m.accuracy,
            m.binary_accuracy,
            dir.display()
        );
        reports.push(report);
    }

    let document = emit_tables(&reports, nbc::builtin_table6());
    let report_path = out_dir.join("report.txt");
    std::fs::write(&report_path, &document.text)
        .map_err(|e| input_error(format!("{}: {e}", report_path.display())))?;
    for (name, contents) in &document.csv_files {
        let path = out_dir.join(name);
        std::fs::write(&path, contents).map_err(|e| input_error(format!("{}: {e}", path.display())))?;
    }
    println!("aggregate report in {}", report_path.display());
    Ok(())
}
