mod export;
mod input;
mod report;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use phasefold_core::grid::{build_ladder_with_growth, DEFAULT_GROWTH};
use phasefold_core::ingest::{threshold_events, write_events_csv, Predicate};
use phasefold_core::units::parse_duration;
use phasefold_core::{
    precompute_grid, BinAggregation, EventSeries, Measure, PeriodGrid, DEFAULT_BIN_COUNT,
};
use phasefold_service::{AppState, ServiceConfig};

use crate::report::{DatasetInfo, Parameters, RankReport};

#[derive(Parser)]
#[command(
    name = "phasefold",
    version,
    about = "Periodicity exploration for event time series"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Rank period lengths of an event file by entropy and vector strength.
    Analyze(AnalyzeArgs),
    /// Threshold one column of a sampled series into an event file.
    DeriveEvents(DeriveArgs),
    /// Run the HTTP API.
    Serve(ServeArgs),
    /// Write every grid row as CSV, plus a table of measures.
    ExportGrid(ExportArgs),
}

fn duration(text: &str) -> Result<f64, String> {
    parse_duration(text).map_err(|e| e.to_string())
}

#[derive(Args)]
struct GridArgs {
    /// Events file (CSV, or JSON/NDJSON by extension).
    file: PathBuf,
    #[arg(long, default_value_t = DEFAULT_BIN_COUNT)]
    bins: usize,
    /// Smallest period length on the ladder (s, min, h, d, y suffixes).
    #[arg(long, default_value = "60s", value_parser = duration)]
    lower: f64,
    /// Ratio between consecutive geometric ladder samples.
    #[arg(long, default_value_t = DEFAULT_GROWTH)]
    growth: f64,
    #[arg(long, default_value = "timestamp")]
    timestamp: String,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long, default_value_t = 10)]
    top: usize,
    /// Rank by one measure only; both are reported when omitted.
    #[arg(long)]
    measure: Option<Measure>,
    /// Report file; `.csv` selects CSV, anything else JSON. Stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
#[command(group = clap::ArgGroup::new("predicate").required(true))]
struct DeriveArgs {
    /// Sampled series CSV.
    file: PathBuf,
    #[arg(long)]
    column: String,
    #[arg(long, group = "predicate", allow_negative_numbers = true)]
    gt: Option<f64>,
    #[arg(long, group = "predicate", allow_negative_numbers = true)]
    lt: Option<f64>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value = "timestamp")]
    timestamp: String,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long, env = "PHASEFOLD_PORT", default_value_t = 8080)]
    port: u16,
    #[arg(long, env = "PHASEFOLD_BIND", default_value = "127.0.0.1")]
    bind: std::net::IpAddr,
    /// Persist the catalog and grid caches here.
    #[arg(long, env = "PHASEFOLD_DATA_DIR")]
    data_dir: Option<PathBuf>,
    /// Only allow this origin through CORS (any origin otherwise).
    #[arg(long, env = "PHASEFOLD_ALLOW_ORIGIN")]
    allow_origin: Option<String>,
    #[arg(long, default_value_t = DEFAULT_BIN_COUNT)]
    bins: usize,
    #[arg(long, default_value = "60s", value_parser = duration)]
    lower: f64,
    #[arg(long, default_value_t = DEFAULT_GROWTH)]
    growth: f64,
}

#[derive(Args)]
struct ExportArgs {
    #[command(flatten)]
    grid: GridArgs,
    /// `count`, `mean:<attribute>` or `variance:<attribute>`.
    #[arg(long, default_value = "count")]
    aggregation: BinAggregation,
    #[arg(long)]
    out: PathBuf,
    /// Measures table; defaults to `<out stem>.measures.csv` beside `--out`.
    #[arg(long)]
    measures: Option<PathBuf>,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn build_grid(args: &GridArgs, aggregation: &BinAggregation) -> Result<(EventSeries, PeriodGrid)> {
    let series = input::load_events(&args.file, &args.timestamp)?;
    let ladder = build_ladder_with_growth(series.extent(), args.lower, args.growth)?;
    let grid = precompute_grid(&series, &ladder, args.bins, aggregation)?;
    Ok((series, grid))
}

fn analyze(args: AnalyzeArgs) -> Result<()> {
    let (series, grid) = build_grid(&args.grid, &BinAggregation::Count)?;
    let measures = match args.measure {
        Some(m) => vec![m],
        None => vec![Measure::Entropy, Measure::VectorStrength],
    };
    let name = args
        .grid
        .file
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let report = RankReport {
        dataset: DatasetInfo {
            id: args.grid.file.display().to_string(),
            name,
            event_count: series.len(),
            t_start: series.t_start(),
            t_end: series.t_end(),
        },
        parameters: Parameters {
            bin_count: grid.bin_count(),
            lower_bound: grid.lower_bound(),
            upper_bound: grid.upper_bound(),
            growth: args.grid.growth,
            ladder_samples: grid.len(),
        },
        rankings: measures
            .into_iter()
            .map(|m| report::ranking(&grid, m, args.top))
            .collect(),
    };
    match &args.out {
        Some(path) if path.extension().is_some_and(|e| e == "csv") => {
            report.write_csv(create(path)?)?
        }
        Some(path) => report.write_json(create(path)?)?,
        None => report.write_json(io::stdout().lock())?,
    }
    Ok(())
}

fn derive_events(args: DeriveArgs) -> Result<()> {
    let raw = input::load_raw(&args.file, &args.timestamp)?;
    let predicate = match (args.gt, args.lt) {
        (Some(v), None) => Predicate::GreaterThan(v),
        (None, Some(v)) => Predicate::LessThan(v),
        _ => bail!("pass exactly one of --gt or --lt"),
    };
    let events = threshold_events(&raw, &args.column, predicate)?;
    let mut out = create(&args.out)?;
    write_events_csv(&events, &mut out)?;
    out.flush()?;
    eprintln!("{} events written to {}", events.len(), args.out.display());
    Ok(())
}

fn export_grid(args: ExportArgs) -> Result<()> {
    let (_, grid) = build_grid(&args.grid, &args.aggregation)?;
    let measures = args.measures.clone().unwrap_or_else(|| {
        let stem = args
            .out
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        args.out.with_file_name(format!("{stem}.measures.csv"))
    });
    export::write_bins(&grid, create(&args.out)?)?;
    export::write_measures(&grid, create(&measures)?)?;
    Ok(())
}

fn serve(args: ServeArgs) -> Result<()> {
    let allowed_origin = args
        .allow_origin
        .map(|o| o.parse().with_context(|| format!("invalid origin `{o}`")))
        .transpose()?;
    let config = ServiceConfig {
        bin_count: args.bins,
        lower_bound: args.lower,
        growth: args.growth,
        allowed_origin,
    };
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async move {
        let addr = SocketAddr::new(args.bind, args.port);
        let listener = tokio::net::TcpListener::bind(addr)
            .await
            .with_context(|| format!("binding {addr}"))?;
        let state = match &args.data_dir {
            Some(dir) => {
                AppState::open(config, dir).with_context(|| format!("opening {}", dir.display()))?
            }
            None => AppState::in_memory(config),
        };
        eprintln!("listening on http://{}", listener.local_addr()?);
        phasefold_service::serve(listener, state).await?;
        Ok(())
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Analyze(a) => analyze(a),
        Command::DeriveEvents(a) => derive_events(a),
        Command::Serve(a) => serve(a),
        Command::ExportGrid(a) => export_grid(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
