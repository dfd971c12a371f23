//! `corrnet`: command line front end.
//!
//! Exit status is 0 on success, 1 for usage or configuration errors and 2 for data errors.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use corrnet_core::calendar::Month;
use corrnet_core::io::{parse_f64_list, parse_key_values, read_edgelist_file, write_edgelist, write_graphml, write_mi_table, write_partition};
use corrnet_core::mapeq::{detect_communities, CommunityOptions, DEFAULT_RUNS};
use corrnet_core::panel::{FillPolicy, ReturnPanel};
use corrnet_core::pipeline::{
    self, load_returns, mi_series, month_matrix, unconditional_matrix, MonthlyGraphs, PipelineConfig,
};
use corrnet_core::synth::{self, FactorSpec};
use corrnet_core::corr::correlation_surface_lenient;
use corrnet_core::{filtgraph, stats, Error, FilteredGraph};

#[derive(Parser)]
#[command(name = "corrnet", version, about = "Correlation networks of multivariate return series")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct InputArgs {
    /// Price table with header `date,<label1>,...`.
    #[arg(long)]
    input: PathBuf,
    /// Missing-value policy: forward or strict.
    #[arg(long, default_value = "forward")]
    fill: FillPolicy,
}

#[derive(Clone, Copy, ValueEnum)]
enum GraphFormat {
    Edgelist,
    Graphml,
}

#[derive(Clone, Copy, ValueEnum)]
enum SynthKind {
    Equicorr,
    Blocks,
    Shift,
}

#[derive(Subcommand)]
enum Command {
    /// Log returns of a price table.
    Returns {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Correlation matrix of one window, or of the whole panel without --window.
    Corr {
        #[command(flatten)]
        input: InputArgs,
        /// End month, YYYY-MM.
        #[arg(long)]
        window: Option<Month>,
        #[arg(long, default_value_t = 0.25)]
        dt: f64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Mean correlation for every month and evaluation period.
    Surface {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, default_value = "0.25,0.5,1,2,5")]
        dts: String,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Minimum spanning tree of one window.
    Mst(GraphArgs),
    /// Planar maximally filtered graph of one window.
    Pmfg(GraphArgs),
    /// Link mutual information between successive monthly graphs.
    Mi {
        /// Directory of `YYYY-MM.csv` edge lists.
        #[arg(long)]
        graphs: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Map-equation communities of a graph.
    Communities {
        /// Edge list to partition.
        #[arg(long, conflicts_with = "input", required_unless_present = "input")]
        graph: Option<PathBuf>,
        /// Price table; its full-period PMFG is partitioned.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, default_value = "forward")]
        fill: FillPolicy,
        #[arg(long, default_value_t = DEFAULT_RUNS)]
        runs: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Eigenvalue, eigenvector and threshold tables for every month.
    Spectral {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, default_value_t = 0.25)]
        dt: f64,
        /// Orientation label; defaults to the first series.
        #[arg(long = "ref")]
        reference: Option<String>,
        #[arg(long, default_value_t = pipeline::DEFAULT_TOP_EIGENVALUES)]
        top: usize,
        /// Directory for eigenvalues.csv, eigenvectors.csv and thresholds.csv.
        #[arg(long)]
        output_dir: PathBuf,
    },
    /// Welch test of MST against PMFG link correlations for every month.
    Ttest {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, default_value_t = 0.25)]
        dt: f64,
        /// Drop PMFG links that are also MST links from the PMFG sample.
        #[arg(long)]
        exclude_shared: bool,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Synthetic price panel from a factor model.
    Synth {
        kind: SynthKind,
        /// `key = value` parameter file.
        #[arg(long)]
        params: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Full monthly analysis into an output directory.
    Pipeline {
        /// `key = value` config file; flags below override it.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        fill: Option<FillPolicy>,
        /// Surface evaluation periods, comma separated.
        #[arg(long)]
        dts: Option<String>,
        /// Evaluation period of the monthly graphs.
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long = "ref")]
        reference: Option<String>,
        #[arg(long)]
        top: Option<usize>,
        #[arg(long)]
        runs: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        events: Option<PathBuf>,
        #[arg(long)]
        exclude_shared: bool,
    },
}

#[derive(clap::Args)]
struct GraphArgs {
    #[command(flatten)]
    input: InputArgs,
    /// End month, YYYY-MM.
    #[arg(long)]
    window: Month,
    #[arg(long, default_value_t = 0.25)]
    dt: f64,
    #[arg(long, value_enum, default_value = "edgelist")]
    format: GraphFormat,
    #[arg(long)]
    output: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Data(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::InvalidArgument(_) | Error::InvalidDeltaT(_) | Error::InvalidSpec(_) => {
                Failure::Usage(e.to_string())
            }
            e => Failure::Data(e),
        }
    }
}

type CliResult<T = ()> = Result<T, Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

/// Runs `f` against the output file, or stdout when none is given.
fn emit(output: Option<&Path>, f: impl FnOnce(&mut dyn Write) -> corrnet_core::Result<()>) -> CliResult {
    match output {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).map_err(|e| usage(format!("{}: {e}", dir.display())))?;
            }
            let file = File::create(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
            let mut w = BufWriter::new(file);
            f(&mut w)?;
            w.flush().map_err(|e| usage(format!("{}: {e}", path.display())))?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            f(&mut w)?;
        }
    }
    Ok(())
}

fn returns_of(input: &InputArgs) -> CliResult<ReturnPanel> {
    if !input.input.exists() {
        return Err(usage(format!("input file {} does not exist", input.input.display())));
    }
    Ok(load_returns(&input.input, input.fill)?)
}

fn graph(args: &GraphArgs, planar: bool) -> CliResult {
    let panel = returns_of(&args.input)?;
    let matrix = month_matrix(&panel, args.window, args.dt)?;
    let g = if planar { filtgraph::pmfg(&matrix)? } else { filtgraph::mst(&matrix)? };
    emit(args.output.as_deref(), |w| match args.format {
        GraphFormat::Edgelist => write_edgelist(w, &g),
        GraphFormat::Graphml => write_graphml(w, &g),
    })
}

/// Monthly edge lists named `YYYY-MM.csv`; months absent from the directory break the MI chain.
fn mi(dir: &Path, output: Option<&Path>) -> CliResult {
    let entries = fs::read_dir(dir).map_err(|e| usage(format!("{}: {e}", dir.display())))?;
    let mut graphs: BTreeMap<Month, FilteredGraph> = BTreeMap::new();
    for entry in entries {
        let path = entry.map_err(|e| usage(e.to_string()))?.path();
        if path.extension().and_then(|e| e.to_str()) != Some("csv") {
            continue;
        }
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
        let month: Month = stem
            .parse()
            .map_err(|_| usage(format!("{}: file name is not YYYY-MM.csv", path.display())))?;
        graphs.insert(month, read_edgelist_file(&path)?);
    }
    let (Some(&first), Some(&last)) = (graphs.keys().next(), graphs.keys().next_back()) else {
        return Err(usage(format!("no YYYY-MM.csv edge lists in {}", dir.display())));
    };
    let months: Vec<Month> = Month::range_inclusive(first, last).collect();
    let slots: Vec<Option<FilteredGraph>> = months.iter().map(|m| graphs.remove(m)).collect();
    let (rows, failures) = mi_series(&months, &slots, "mi");
    for f in &failures {
        log::warn!("{}: {}", f.month.map_or(String::new(), |m| m.to_string()), f.message);
    }
    emit(output, |w| write_mi_table(w, &rows))
}

fn config_keys(path: &Path) -> CliResult<BTreeMap<String, String>> {
    let text = fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    parse_key_values(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn take<T: std::str::FromStr>(params: &mut BTreeMap<String, String>, key: &str) -> CliResult<Option<T>>
where
    T::Err: std::fmt::Display,
{
    params
        .remove(key)
        .map(|v| v.parse::<T>().map_err(|e| usage(format!("{key} = {v:?}: {e}"))))
        .transpose()
}

fn need<T: std::str::FromStr>(params: &mut BTreeMap<String, String>, key: &str) -> CliResult<T>
where
    T::Err: std::fmt::Display,
{
    take(params, key)?.ok_or_else(|| usage(format!("missing parameter {key}")))
}

/// `t` records, or enough records to end on `end` (YYYY-MM-DD).
fn record_count(params: &mut BTreeMap<String, String>) -> CliResult<usize> {
    let t: Option<usize> = take(params, "t")?;
    let end: Option<chrono::NaiveDate> = take(params, "end")?;
    match (t, end) {
        (Some(t), None) => Ok(t),
        (None, Some(end)) => Ok(synth::records_through(synth::default_start(), end)),
        _ => Err(usage("give exactly one of t and end")),
    }
}

fn block_sizes(params: &mut BTreeMap<String, String>) -> CliResult<Vec<usize>> {
    let sizes: String = need(params, "block_sizes")?;
    sizes
        .split(',')
        .map(|s| s.trim().parse::<usize>().map_err(|e| usage(format!("block_sizes: {e}"))))
        .collect()
}

fn synth(kind: SynthKind, params_path: &Path, seed: Option<u64>, output: Option<&Path>) -> CliResult {
    let mut params = config_keys(params_path)?;
    let seed = match seed {
        Some(s) => {
            params.remove("seed");
            s
        }
        None => take(&mut params, "seed")?.unwrap_or(42),
    };
    let volatility: f64 = take(&mut params, "volatility")?.unwrap_or(DEFAULT_VOLATILITY);
    if !(volatility > 0.0 && volatility.is_finite()) {
        return Err(usage(format!("volatility must be positive, got {volatility}")));
    }
    let panel = match kind {
        SynthKind::Equicorr => {
            let n: usize = need(&mut params, "n")?;
            let rho: f64 = need(&mut params, "rho")?;
            let t = record_count(&mut params)?;
            reject_unknown(&params)?;
            synth::gen_equicorrelated(n, t, rho, seed)?
        }
        SynthKind::Blocks => {
            let sizes = block_sizes(&mut params)?;
            let rho_in: f64 = need(&mut params, "rho_in")?;
            let rho_out: f64 = need(&mut params, "rho_out")?;
            let t = record_count(&mut params)?;
            reject_unknown(&params)?;
            synth::gen_blocks(&FactorSpec::with_block_sizes(&sizes, rho_in, rho_out, t, seed))?
        }
        SynthKind::Shift => {
            let sizes = block_sizes(&mut params)?;
            let shift: Month = need(&mut params, "shift_month")?;
            let before_in: f64 = need(&mut params, "rho_in_before")?;
            let before_out: f64 = need(&mut params, "rho_out_before")?;
            let after_in: f64 = need(&mut params, "rho_in_after")?;
            let after_out: f64 = need(&mut params, "rho_out_after")?;
            let t = record_count(&mut params)?;
            let k = synth::records_before(synth::default_start(), shift);
            if k == 0 || k >= t {
                return Err(usage(format!("shift_month {shift} is outside the generated period")));
            }
            let before = FactorSpec::with_block_sizes(&sizes, before_in, before_out, k, seed);
            let relabel: bool = take(&mut params, "relabel")?.unwrap_or(false);
            let mut after = FactorSpec::with_block_sizes(&sizes, after_in, after_out, t - k, seed.wrapping_add(1));
            if relabel {
                // Deal series round-robin into the blocks instead of contiguously.
                let n_blocks = sizes.len();
                after.block_assignment = (0..after.n_series).map(|i| i % n_blocks).collect();
            }
            reject_unknown(&params)?;
            synth::gen_regime_shift(&before, &after, shift)?
        }
    };
    let prices = scaled(&panel, volatility)?.to_prices(100.0)?;
    emit(output, |w| prices.write_csv(w))
}

/// Generators draw unit-variance returns; prices are built from `volatility * r` so that
/// long panels stay within a sane price range.
const DEFAULT_VOLATILITY: f64 = 0.01;

fn scaled(panel: &ReturnPanel, volatility: f64) -> corrnet_core::Result<ReturnPanel> {
    let returns = (0..panel.n_series())
        .map(|i| panel.series(i).iter().map(|r| r * volatility).collect())
        .collect();
    ReturnPanel::new(panel.dates().to_vec(), panel.labels().to_vec(), returns, panel.base_date())
}

fn reject_unknown(params: &BTreeMap<String, String>) -> CliResult {
    match params.keys().next() {
        Some(k) => Err(usage(format!("unknown parameter {k:?}"))),
        None => Ok(()),
    }
}

fn run(cli: Cli) -> CliResult {
    match cli.command {
        Command::Returns { input, output } => {
            let panel = returns_of(&input)?;
            emit(output.as_deref(), |w| panel.write_csv(w))
        }
        Command::Corr {
            input,
            window,
            dt,
            output,
        } => {
            let panel = returns_of(&input)?;
            let matrix = match window {
                Some(m) => month_matrix(&panel, m, dt)?,
                None => unconditional_matrix(&panel)?,
            };
            emit(output.as_deref(), |w| matrix.write_csv(w))
        }
        Command::Surface { input, dts, output } => {
            let dts = parse_f64_list(&dts)?;
            let panel = returns_of(&input)?;
            let (surface, errors) = correlation_surface_lenient(&panel, &dts)?;
            for (m, dt, e) in &errors {
                log::warn!("{m}: surface dt={dt}: {e}");
            }
            emit(output.as_deref(), |w| surface.write_csv(w))
        }
        Command::Mst(args) => graph(&args, false),
        Command::Pmfg(args) => graph(&args, true),
        Command::Mi { graphs, output } => mi(&graphs, output.as_deref()),
        Command::Communities {
            graph,
            input,
            fill,
            runs,
            seed,
            output,
        } => {
            let g = match (graph, input) {
                (Some(path), _) => {
                    if !path.exists() {
                        return Err(usage(format!("graph file {} does not exist", path.display())));
                    }
                    read_edgelist_file(&path)?
                }
                (None, Some(input)) => {
                    let panel = returns_of(&InputArgs { input, fill })?;
                    filtgraph::pmfg(&unconditional_matrix(&panel)?)?
                }
                (None, None) => return Err(usage("give --graph or --input")),
            };
            let options = CommunityOptions {
                n_runs: runs,
                seed,
                ..CommunityOptions::default()
            };
            let partition = detect_communities(&g, &options)?;
            emit(output.as_deref(), |w| write_partition(w, g.labels(), &partition))
        }
        Command::Spectral {
            input,
            dt,
            reference,
            top,
            output_dir,
        } => {
            if top == 0 {
                return Err(usage("--top must be at least 1"));
            }
            let panel = returns_of(&input)?;
            let reference = reference.unwrap_or_else(|| panel.labels()[0].clone());
            if !panel.labels().contains(&reference) {
                return Err(usage(format!("reference label {reference:?} is not in the input")));
            }
            let monthly = MonthlyGraphs::compute(&panel, dt)?;
            let (series, failures) = monthly.spectral(&reference, top, panel.labels());
            for f in monthly.failures.iter().chain(&failures) {
                log::warn!("{}: {}: {}", f.month.map_or(String::new(), |m| m.to_string()), f.step, f.message);
            }
            emit(Some(&output_dir.join("eigenvalues.csv")), |w| series.write_eigenvalues(w))?;
            emit(Some(&output_dir.join("eigenvectors.csv")), |w| series.write_eigenvectors(w))?;
            emit(Some(&output_dir.join("thresholds.csv")), |w| series.write_thresholds(w))
        }
        Command::Ttest {
            input,
            dt,
            exclude_shared,
            output,
        } => {
            let panel = returns_of(&input)?;
            let monthly = MonthlyGraphs::compute(&panel, dt)?;
            let (rows, failures) = monthly.welch(exclude_shared);
            for f in monthly.failures.iter().chain(&failures) {
                log::warn!("{}: {}: {}", f.month.map_or(String::new(), |m| m.to_string()), f.step, f.message);
            }
            emit(output.as_deref(), |w| stats::write_ttest_table(w, &rows))
        }
        Command::Synth {
            kind,
            params,
            seed,
            output,
        } => synth(kind, &params, seed, output.as_deref()),
        Command::Pipeline {
            config,
            input,
            output,
            fill,
            dts,
            dt,
            reference,
            top,
            runs,
            seed,
            events,
            exclude_shared,
        } => {
            let mut cfg = match &config {
                Some(path) => {
                    let mut cfg = PipelineConfig::default();
                    cfg.apply(&config_keys(path)?)?;
                    cfg
                }
                None => PipelineConfig::default(),
            };
            if let Some(v) = input {
                cfg.input = v;
            }
            if let Some(v) = output {
                cfg.output = v;
            }
            if let Some(v) = fill {
                cfg.fill = v;
            }
            if let Some(v) = dts {
                cfg.delta_ts = parse_f64_list(&v)?;
            }
            if let Some(v) = dt {
                cfg.analysis_dt = v;
            }
            if reference.is_some() {
                cfg.reference = reference;
            }
            if let Some(v) = top {
                cfg.top_eigenvalues = v;
            }
            if let Some(v) = runs {
                cfg.runs = v;
            }
            if let Some(v) = seed {
                cfg.seed = v;
            }
            if events.is_some() {
                cfg.events = events;
            }
            cfg.exclude_shared |= exclude_shared;
            cfg.validate()?;
            if !cfg.input.exists() {
                return Err(usage(format!("input file {} does not exist", cfg.input.display())));
            }
            let report = pipeline::run_pipeline(&cfg)?;
            for f in &report.failures {
                log::warn!("{}: {}: {}", f.month.map_or(String::new(), |m| m.to_string()), f.step, f.message);
            }
            eprintln!(
                "{} months, {} failures, {} files written to {}",
                report.months.len(),
                report.failures.len(),
                report.files.len(),
                cfg.output.display()
            );
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::from(2)
        }
    }
}
