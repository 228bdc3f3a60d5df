use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tracing_subscriber::EnvFilter;

use gesturelog_core::annotation::Summary;
use gesturelog_core::dataset::{load_landmark_jsonl, synthetic, write_landmark_jsonl, LandmarkDataset};
use gesturelog_core::metrics::evaluate;
use gesturelog_core::raster::RasterStyle;
use gesturelog_core::{model_file, GestureClass, LabelMapping, CLASS_ORDER};
use gesturelog_server::{AppState, ServerConfig};
use gesturelog_tools::config::ToolConfig;
use gesturelog_tools::replay::{replay, ReplayOptions};
use gesturelog_tools::trace::{synthetic_trace, ReplayTrace};
use gesturelog_tools::train::{load_model, train_eval, write_file};
use gesturelog_tools::{preprocess, report, ToolError};

/// Gesture annotation tooling.
///
/// Exit codes: 0 success, 1 validation error, 2 I/O or network error.
#[derive(Debug, Parser)]
#[command(name = "gesturelog", version)]
struct Cli {
    /// TOML configuration file; flags take precedence over its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for every random choice (default: config `seed`, else 0).
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Validate a landmark dataset or generate a synthetic one.
    Ingest(IngestArgs),
    /// Rasterize every sample to `<source_id>_<style>.png` plus manifest.csv.
    Preprocess(PreprocessArgs),
    /// Train with a 70/15/15 split and evaluate on the test part.
    Train(TrainArgs),
    /// Score a saved model on every sample of a dataset.
    Eval(EvalArgs),
    /// Run the annotation server.
    Serve(ServeArgs),
    /// Stream a recorded trace to a server and verify the results.
    Replay(ReplayArgs),
    /// Render a session summary as a text table.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    LandmarkJsonl,
    Synthetic,
}

#[derive(Debug, Args)]
struct DataArgs {
    /// landmark-jsonl file; a synthetic dataset is generated when absent.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Samples per class for the synthetic dataset.
    #[arg(long)]
    per_class: Option<usize>,
}

#[derive(Debug, Args)]
struct IngestArgs {
    #[arg(long, value_enum, default_value = "landmark-jsonl")]
    format: Format,
    /// Input file for landmark-jsonl.
    #[arg(long, required_if_eq("format", "landmark-jsonl"))]
    input: Option<PathBuf>,
    #[arg(long)]
    per_class: Option<usize>,
    /// Write the validated dataset here as landmark-jsonl.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PreprocessArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, value_enum)]
    style: Option<StyleArg>,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum StyleArg {
    Type1,
    Type2,
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, default_value = "model.hlm")]
    model_out: PathBuf,
    #[arg(long, default_value = "report.json")]
    report_out: PathBuf,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    data: DataArgs,
    /// Print the full report as JSON instead of a table.
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct ServeArgs {
    #[arg(long, env = "GESTURELOG_HOST")]
    host: Option<String>,
    #[arg(long, env = "GESTURELOG_PORT")]
    port: Option<u16>,
    /// Model file; without one a model is trained on synthetic data at startup.
    #[arg(long, env = "GESTURELOG_MODEL")]
    model: Option<PathBuf>,
    /// Directory for per-session `<id>.jsonl` journals.
    #[arg(long, env = "GESTURELOG_LOG_DIR")]
    log_dir: Option<PathBuf>,
    #[arg(long, env = "GESTURELOG_THRESHOLD")]
    threshold: Option<f64>,
    #[arg(long, env = "GESTURELOG_OPEN_COUNT")]
    open_count: Option<u32>,
    #[arg(long, env = "GESTURELOG_CLOSE_COUNT")]
    close_count: Option<u32>,
}

#[derive(Debug, Args)]
struct ReplayArgs {
    #[arg(long, default_value = "http://127.0.0.1:8080")]
    server: String,
    /// Trace JSON file; a synthetic trace is generated when absent.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long, default_value_t = 60.0)]
    seconds: f64,
    #[arg(long, default_value_t = 30.0)]
    fps: f64,
    #[arg(long, default_value_t = 1.0)]
    speed: f64,
    #[arg(long, default_value_t = 32)]
    window: usize,
    /// `gesture=label`, repeatable. Defaults to the config mapping, else every gesture to its own name.
    #[arg(long = "map", value_parser = parse_map_entry)]
    map: Vec<(GestureClass, String)>,
    /// Write the replay report as JSON.
    #[arg(long)]
    report_out: Option<PathBuf>,
    /// Save the exported CSV.
    #[arg(long)]
    csv_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ReportArgs {
    /// Summary JSON as returned by `GET /sessions/{id}/summary`.
    #[arg(long, conflicts_with_all = ["server", "session"])]
    summary: Option<PathBuf>,
    #[arg(long, requires = "session")]
    server: Option<String>,
    #[arg(long, requires = "server")]
    session: Option<String>,
}

fn parse_map_entry(s: &str) -> Result<(GestureClass, String), String> {
    let (g, label) = s.split_once('=').ok_or_else(|| format!("expected gesture=label, got {s:?}"))?;
    Ok((g.parse().map_err(|e| format!("{e}"))?, label.to_string()))
}

struct Ctx {
    config: ToolConfig,
    seed: u64,
}

impl Ctx {
    fn dataset(&self, args: &DataArgs) -> Result<LandmarkDataset, ToolError> {
        match &args.data {
            Some(path) => Ok(load_landmark_jsonl(path)?),
            None => {
                let mut params = self.config.synthetic.clone();
                if let Some(n) = args.per_class {
                    params.per_class = n;
                }
                Ok(synthetic(&params, self.seed))
            }
        }
    }
}

fn class_counts(ds: &LandmarkDataset) -> String {
    CLASS_ORDER
        .iter()
        .map(|g| format!("{}={}", g.as_str(), ds.samples.iter().filter(|s| s.gesture == *g).count()))
        .collect::<Vec<_>>()
        .join(" ")
}

fn run_ingest(ctx: &Ctx, a: IngestArgs) -> Result<(), ToolError> {
    let ds = match a.format {
        Format::LandmarkJsonl => {
            ctx.dataset(&DataArgs { data: a.input.clone(), per_class: None })?
        }
        Format::Synthetic => ctx.dataset(&DataArgs { data: None, per_class: a.per_class })?,
    };
    println!("{} samples ({}), provenance {}", ds.len(), class_counts(&ds), ds.provenance);
    if let Some(out) = a.out {
        write_file(&out, write_landmark_jsonl(&ds.samples).as_bytes())?;
    }
    Ok(())
}

fn run_preprocess(ctx: &Ctx, a: PreprocessArgs) -> Result<(), ToolError> {
    let ds = ctx.dataset(&a.data)?;
    let mut spec = ctx.config.raster.clone();
    if let Some(s) = a.style {
        spec.style = match s {
            StyleArg::Type1 => RasterStyle::Type1,
            StyleArg::Type2 => RasterStyle::Type2,
        };
    }
    let manifest = preprocess::preprocess_batch(&ds, &spec, &a.out_dir)?;
    println!("wrote {} images to {}", manifest.len(), a.out_dir.display());
    Ok(())
}

fn run_train(ctx: &Ctx, a: TrainArgs) -> Result<(), ToolError> {
    let ds = ctx.dataset(&a.data)?;
    let mut cfg = ctx.config.training.clone();
    cfg.seed = ctx.seed;
    let out = train_eval(&ds, ctx.seed, &cfg)?;
    write_file(&a.model_out, &model_file::encode(&out.model))?;
    write_file(&a.report_out, &out.report.to_json_bytes())?;
    print!("{}", report::render_evaluation(&out.report.test));
    println!("best epoch {}, model {}, report {}", out.report.best_epoch, a.model_out.display(), a.report_out.display());
    Ok(())
}

fn run_eval(ctx: &Ctx, a: EvalArgs) -> Result<(), ToolError> {
    let model = load_model(&a.model)?;
    let ds = ctx.dataset(&a.data)?;
    let r = evaluate(&model, &ds.features()?)?;
    if a.json {
        println!("{}", serde_json::to_string_pretty(&r).expect("report serializes"));
    } else {
        print!("{}", report::render_evaluation(&r));
    }
    Ok(())
}

async fn run_serve(ctx: &Ctx, a: ServeArgs) -> Result<(), ToolError> {
    let file = &ctx.config.server;
    let host = a.host.or_else(|| file.host.clone()).unwrap_or_else(|| "127.0.0.1".into());
    let port = a.port.or(file.port).unwrap_or(8080);
    let mut seg = ctx.config.segmenter;
    if let Some(t) = a.threshold {
        seg.confidence_threshold = t;
    }
    if let Some(n) = a.open_count {
        seg.open_count = n;
    }
    if let Some(n) = a.close_count {
        seg.close_count = n;
    }
    seg.validate().map_err(ToolError::invalid)?;

    let model = match a.model.or_else(|| file.model.clone()) {
        Some(path) => load_model(&path)?,
        None => {
            tracing::info!(seed = ctx.seed, "no model given, training on synthetic data");
            let mut cfg = ctx.config.training.clone();
            cfg.seed = ctx.seed;
            train_eval(&synthetic(&ctx.config.synthetic, ctx.seed), ctx.seed, &cfg)?.model
        }
    };
    let log_dir = a.log_dir.or_else(|| file.log_dir.clone());
    if let Some(dir) = &log_dir {
        std::fs::create_dir_all(dir).map_err(|e| ToolError::io(format!("creating {}", dir.display()), e))?;
    }

    let addr: SocketAddr = format!("{host}:{port}").parse().map_err(|e| ToolError::invalid(format!("address {host}:{port}: {e}")))?;
    let listener = tokio::net::TcpListener::bind(addr).await.map_err(|e| ToolError::io(format!("binding {addr}"), e))?;
    let state = AppState::new(model, ServerConfig { log_dir, segmenter_defaults: seg });
    tracing::info!(%addr, "listening");
    gesturelog_server::serve(listener, state).await.map_err(|e| ToolError::io("serving", e))
}

async fn run_replay(ctx: &Ctx, a: ReplayArgs) -> Result<(), ToolError> {
    let trace = match &a.trace {
        Some(p) => ReplayTrace::load(p)?,
        None => synthetic_trace(a.seconds, a.fps, ctx.seed),
    };
    let mapping = if !a.map.is_empty() {
        LabelMapping::from_pairs(a.map).map_err(ToolError::invalid)?
    } else if let Some(m) = &ctx.config.mapping {
        m.clone()
    } else {
        LabelMapping::from_pairs(CLASS_ORDER.iter().map(|g| (*g, g.as_str()))).expect("default mapping is valid")
    };
    let mut opts = ReplayOptions::new(mapping);
    opts.speed = a.speed;
    opts.window = a.window;
    let r = replay(&trace, &a.server, &opts).await?;
    print!("{}", report::render_replay(&r));
    if let Some(p) = &a.report_out {
        let mut bytes = serde_json::to_vec_pretty(&r).expect("report serializes");
        bytes.push(b'\n');
        write_file(p, &bytes)?;
    }
    if let Some(p) = &a.csv_out {
        write_file(p, &r.csv)?;
    }
    Ok(())
}

async fn run_report(a: ReportArgs) -> Result<(), ToolError> {
    let summary: Summary = match (&a.summary, &a.server, &a.session) {
        (Some(p), _, _) => {
            let text = read(p)?;
            serde_json::from_str(&text).map_err(|e| ToolError::invalid(format!("summary: {e}")))?
        }
        (None, Some(server), Some(id)) => {
            let url = format!("{}/sessions/{id}/summary", server.trim_end_matches('/'));
            let resp = reqwest::get(&url).await?;
            if !resp.status().is_success() {
                return Err(ToolError::invalid(format!("{url}: HTTP {}", resp.status())));
            }
            resp.json().await?
        }
        _ => return Err(ToolError::invalid("pass --summary FILE or --server URL --session ID")),
    };
    print!("{}", report::render_summary(&summary));
    Ok(())
}

fn read(p: &Path) -> Result<String, ToolError> {
    std::fs::read_to_string(p).map_err(|e| ToolError::io(format!("reading {}", p.display()), e))
}

async fn run(cli: Cli) -> Result<(), ToolError> {
    let config = ToolConfig::load_opt(cli.config.as_deref())?;
    let seed = cli.seed.or(config.seed).unwrap_or(0);
    let ctx = Ctx { config, seed };
    match cli.command {
        Command::Ingest(a) => run_ingest(&ctx, a),
        Command::Preprocess(a) => run_preprocess(&ctx, a),
        Command::Train(a) => run_train(&ctx, a),
        Command::Eval(a) => run_eval(&ctx, a),
        Command::Serve(a) => run_serve(&ctx, a).await,
        Command::Replay(a) => run_replay(&ctx, a).await,
        Command::Report(a) => run_report(a).await,
    }
}

#[tokio::main]
async fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("info")))
        .with_writer(std::io::stderr)
        .init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli).await {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
