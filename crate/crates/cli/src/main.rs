//! `sdg`: run the indicator pipeline, export reports and graphs, or serve the
//! HTTP API.
//!
//! Exit codes: 0 success, 1 invalid input or failed consistency check,
//! 2 I/O error.

mod load;
mod text;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sdg_core::analytics::{graph_query, summary_stats, synthesize, SynthesisConfig};
use sdg_core::catalog::{Catalog, GoalId};
use sdg_core::correlation::{run_indicator_method, CorrelationConfig, DEFAULT_MIN_OVERLAP};
use sdg_core::evaluation::{EvaluationStore, Method};
use sdg_core::ingest::{load_indicator_file, IngestError};
use sdg_core::report::{pair_listing, targets_document, to_json_bytes, ReportBundle, Sign};
use sdg_service::config::{AdminSeed, ServiceConfig, DEFAULT_PORT};
use sdg_service::ServeError;

#[derive(Debug)]
pub enum CliError {
    Invalid(String),
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Invalid(_) => 1,
            CliError::Io(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Invalid(m) | CliError::Io(m) => f.write_str(m),
        }
    }
}

#[derive(Parser)]
#[command(name = "sdg", version, about = "SDG target interaction analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the indicator method on raw observations and write the results
    /// table and report bundle.
    Analyze(AnalyzeArgs),
    /// Intersect expert and indicator results (files in either order).
    Synthesize(SynthesizeArgs),
    /// Interaction graph between two goals.
    ExportGraph(GraphArgs),
    /// Evaluated counts and class percentages for one method.
    Stats(StatsArgs),
    /// Results pages: positive or negative pairs, target verdicts, synthesis.
    Results(ResultsArgs),
    /// Run the HTTP service.
    Serve(ServeArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Args)]
struct Output {
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    /// Write to this file instead of standard output.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Stores {
    /// Expert answers (target_a,target_b,score[,explanation]).
    #[arg(long)]
    expert: Option<PathBuf>,
    /// Indicator results table, or raw indicator observations.
    #[arg(long)]
    indicator: Option<PathBuf>,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Raw observations: indicator_code,year,value
    #[arg(long)]
    indicators: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Expert answers to include in the bundle and synthesis.
    #[arg(long)]
    expert: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_MIN_OVERLAP)]
    min_overlap: usize,
    /// Recorded verbatim as the bundle's generation time.
    #[arg(long)]
    generated_at: Option<String>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Args)]
struct SynthesizeArgs {
    first: PathBuf,
    second: PathBuf,
    #[arg(long, default_value_t = 2)]
    multi_negative_min: usize,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct GraphArgs {
    #[arg(long)]
    method: Method,
    #[arg(long)]
    a: u32,
    #[arg(long)]
    b: u32,
    #[command(flatten)]
    stores: Stores,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct StatsArgs {
    #[arg(long)]
    method: Method,
    #[command(flatten)]
    stores: Stores,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct ResultsArgs {
    #[command(subcommand)]
    page: Page,
}

#[derive(Subcommand)]
enum Page {
    Positive(PageArgs),
    Negative(PageArgs),
    Targets(PlainPageArgs),
    Synthesis(PlainPageArgs),
}

#[derive(Args)]
struct PageArgs {
    #[arg(long)]
    method: Method,
    #[command(flatten)]
    stores: Stores,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct PlainPageArgs {
    #[command(flatten)]
    stores: Stores,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long, env = "PORT", default_value_t = DEFAULT_PORT)]
    port: u16,
    /// Snapshot file; in-memory when omitted.
    #[arg(long, env = "STORE_PATH")]
    store_path: Option<PathBuf>,
    #[arg(long, env = "BATCH_SIZE", default_value_t = 20)]
    batch_size: usize,
    #[arg(long, env = "GOAL_MIN", default_value_t = 2)]
    goal_min: usize,
    #[arg(long, env = "RNG_SEED", default_value_t = 0)]
    rng_seed: u64,
    #[arg(long, env = "SESSION_TTL_SECS", default_value_t = 12 * 60 * 60)]
    session_ttl_secs: u64,
    /// Administrator as username:password; repeatable.
    #[arg(long = "admin", env = "ADMINS", value_delimiter = ',')]
    admins: Vec<AdminSeed>,
    /// Expert answers loaded as final into an empty store.
    #[arg(long, env = "EXPERT_SEED")]
    expert_seed: Option<PathBuf>,
    /// Indicator results loaded when none are stored.
    #[arg(long, env = "INDICATOR_SEED")]
    indicator_seed: Option<PathBuf>,
}

fn write_out(
    output: &Output,
    json: Vec<u8>,
    text: impl FnOnce() -> String,
) -> Result<(), CliError> {
    let bytes = match output.format {
        Format::Json => json,
        Format::Text => text().into_bytes(),
    };
    match &output.out {
        Some(path) => {
            fs::write(path, bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
        }
        None => std::io::stdout()
            .write_all(&bytes)
            .map_err(|e| CliError::Io(format!("standard output: {e}"))),
    }
}

fn goal(n: u32) -> Result<GoalId, CliError> {
    GoalId::new(n).map_err(|e| CliError::Invalid(e.to_string()))
}

fn stores_of(
    s: &Stores,
    catalog: &Catalog,
) -> Result<(EvaluationStore, EvaluationStore), CliError> {
    load::stores(s.expert.as_deref(), s.indicator.as_deref(), catalog)
}

fn pick(method: Method, (e, i): (EvaluationStore, EvaluationStore)) -> EvaluationStore {
    match method {
        Method::Expert => e,
        Method::Indicator => i,
    }
}

fn analyze(args: &AnalyzeArgs, catalog: &Catalog) -> Result<(), CliError> {
    let loaded = load_indicator_file(&args.indicators).map_err(|e| match e {
        IngestError::FileUnreadable { .. } => CliError::Io(e.to_string()),
        other => CliError::Invalid(format!("{}: {other}", args.indicators.display())),
    })?;
    let report = &loaded.report;
    eprintln!(
        "{} rows: {} accepted, {} missing, {} malformed, {} out of range",
        report.rows,
        report.accepted,
        report.skipped_missing_value,
        report.skipped_malformed,
        report.skipped_year_out_of_range
    );
    let config = CorrelationConfig {
        min_overlap: args.min_overlap,
    };
    let results = run_indicator_method(&loaded.series, catalog, &config);
    let indicator = EvaluationStore::indicator(&results);
    let expert = args
        .expert
        .as_deref()
        .map(|p| load::load_as(p, Method::Expert, catalog))
        .transpose()?;

    let mut stores = vec![&indicator];
    stores.extend(expert.as_ref());
    let mut bundle = ReportBundle::new(&stores, catalog);
    bundle.generated_at = args.generated_at.clone();
    if let Some(e) = &expert {
        bundle.synthesis = Some(
            synthesize(e, &indicator, catalog, &SynthesisConfig::default()).expect("two methods"),
        );
    }
    bundle.check().map_err(CliError::Invalid)?;

    let io = |p: &Path, e: std::io::Error| CliError::Io(format!("{}: {e}", p.display()));
    fs::create_dir_all(&args.out).map_err(|e| io(&args.out, e))?;
    let csv_path = args.out.join("indicator_results.csv");
    fs::write(&csv_path, results.to_csv_string()).map_err(|e| io(&csv_path, e))?;
    let report_path = args.out.join("report.json");
    fs::write(&report_path, to_json_bytes(&bundle)).map_err(|e| io(&report_path, e))?;

    let output = Output {
        format: args.format,
        out: None,
    };
    write_out(&output, to_json_bytes(&bundle), || text::bundle(&bundle))
}

fn serve(args: &ServeArgs) -> Result<(), CliError> {
    let config = ServiceConfig {
        port: args.port,
        store_path: args.store_path.clone(),
        batch_size: args.batch_size,
        goal_min: args.goal_min,
        seed: args.rng_seed,
        session_ttl: Duration::from_secs(args.session_ttl_secs),
        admins: args.admins.clone(),
        expert_seed: args.expert_seed.clone(),
        indicator_seed: args.indicator_seed.clone(),
    };
    let runtime = tokio::runtime::Runtime::new().map_err(|e| CliError::Io(e.to_string()))?;
    eprintln!("listening on port {}", config.port);
    runtime
        .block_on(sdg_service::serve(config))
        .map_err(|e| match e {
            ServeError::ConfigInvalid(_) => CliError::Invalid(e.to_string()),
            _ => CliError::Io(e.to_string()),
        })
}

fn run(cli: Cli) -> Result<(), CliError> {
    let catalog = Catalog::bundled();
    match cli.command {
        Command::Analyze(args) => analyze(&args, catalog),
        Command::Synthesize(args) => {
            let first = load::load(&args.first, catalog)?;
            let second = load::load(&args.second, catalog)?;
            if first.method() == second.method() {
                return Err(CliError::Invalid(format!(
                    "both files hold {} data; synthesis needs one expert and one indicator file",
                    first.method()
                )));
            }
            let config = SynthesisConfig {
                multi_negative_min: args.multi_negative_min,
            };
            let report = synthesize(&first.into_store(), &second.into_store(), catalog, &config)
                .map_err(|e| CliError::Invalid(e.to_string()))?;
            write_out(&args.output, to_json_bytes(&report), || {
                text::synthesis(&report)
            })
        }
        Command::ExportGraph(args) => {
            let (a, b) = (goal(args.a)?, goal(args.b)?);
            let store = pick(args.method, stores_of(&args.stores, catalog)?);
            let doc = graph_query(&store, catalog, a, b);
            write_out(&args.output, to_json_bytes(&doc), || text::graph(&doc))
        }
        Command::Stats(args) => {
            let store = pick(args.method, stores_of(&args.stores, catalog)?);
            let stats = summary_stats(&store, catalog);
            write_out(&args.output, to_json_bytes(&stats), || text::stats(&stats))
        }
        Command::Results(ResultsArgs { page }) => match page {
            Page::Positive(args) => listing(args, Sign::Positive, catalog),
            Page::Negative(args) => listing(args, Sign::Negative, catalog),
            Page::Targets(args) => {
                let (e, i) = stores_of(&args.stores, catalog)?;
                let doc = targets_document(&e, &i, catalog);
                write_out(&args.output, to_json_bytes(&doc), || text::targets(&doc))
            }
            Page::Synthesis(args) => {
                let (e, i) = stores_of(&args.stores, catalog)?;
                let report =
                    synthesize(&e, &i, catalog, &SynthesisConfig::default()).expect("two methods");
                write_out(&args.output, to_json_bytes(&report), || {
                    text::synthesis(&report)
                })
            }
        },
        Command::Serve(args) => serve(&args),
    }
}

fn listing(args: PageArgs, sign: Sign, catalog: &Catalog) -> Result<(), CliError> {
    let store = pick(args.method, stores_of(&args.stores, catalog)?);
    let doc = pair_listing(&store, catalog, sign);
    write_out(&args.output, to_json_bytes(&doc), || text::pairs(&doc))
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("sdg: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
