//! The monthly analysis loop and its output files.
//!
//! Per-month steps run concurrently; everything is computed in memory and written in month
//! order afterwards, so reruns are byte-identical and a bad input leaves no partial output.
//! A month whose window fails is listed in `manifest.csv` and skipped in the series tables.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;

use crate::calendar::{delta_t_months, Month};
use crate::corr::{correlation_surface_lenient, mean_offdiag, pearson_matrix, CorrelationMatrix};
use crate::error::{Error, Result};
use crate::filtgraph::{degree_profile, mst, pmfg, FilteredGraph};
use crate::io;
use crate::mapeq::{detect_communities, CommunityOptions, Partition, DEFAULT_RUNS};
use crate::netinfo::{link_mutual_information, LinkMIResult};
use crate::panel::{load_prices, log_returns, FillPolicy, ReturnPanel};
use crate::spectral::{eigen_series, EigenSeries};
use crate::stats::{welch_on_graphs, write_ttest_table, WelchResult};

pub const DEFAULT_ANALYSIS_DT: f64 = 0.25;
pub const DEFAULT_SURFACE_DTS: [f64; 5] = [0.25, 0.5, 1.0, 2.0, 5.0];
pub const DEFAULT_TOP_EIGENVALUES: usize = 10;

/// Keys accepted in a pipeline config file.
pub const CONFIG_KEYS: [&str; 11] = [
    "input",
    "output",
    "fill",
    "delta_t",
    "analysis_dt",
    "reference",
    "top",
    "runs",
    "seed",
    "events",
    "exclude_shared",
];

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub input: PathBuf,
    pub output: PathBuf,
    pub fill: FillPolicy,
    /// Evaluation periods of the correlation surface, in years.
    pub delta_ts: Vec<f64>,
    /// Evaluation period of the monthly graphs and tables.
    pub analysis_dt: f64,
    /// Eigenvector orientation label; the first label when unset.
    pub reference: Option<String>,
    pub top_eigenvalues: usize,
    pub runs: usize,
    pub seed: u64,
    pub events: Option<PathBuf>,
    pub exclude_shared: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            input: PathBuf::new(),
            output: PathBuf::new(),
            fill: FillPolicy::default(),
            delta_ts: DEFAULT_SURFACE_DTS.to_vec(),
            analysis_dt: DEFAULT_ANALYSIS_DT,
            reference: None,
            top_eigenvalues: DEFAULT_TOP_EIGENVALUES,
            runs: DEFAULT_RUNS,
            seed: 42,
            events: None,
            exclude_shared: false,
        }
    }
}

fn config_value<T: FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e| Error::Config(format!("{key} = {value:?}: {e}")))
}

impl PipelineConfig {
    /// Applies `key = value` settings on top of `self`.
    pub fn apply(&mut self, settings: &BTreeMap<String, String>) -> Result<()> {
        for (key, value) in settings {
            match key.as_str() {
                "input" => self.input = PathBuf::from(value),
                "output" => self.output = PathBuf::from(value),
                "fill" => self.fill = config_value(key, value)?,
                "delta_t" => {
                    self.delta_ts = io::parse_f64_list(value).map_err(|e| Error::Config(e.to_string()))?
                }
                "analysis_dt" => self.analysis_dt = config_value(key, value)?,
                "reference" => self.reference = Some(value.clone()).filter(|v| !v.is_empty()),
                "top" => self.top_eigenvalues = config_value(key, value)?,
                "runs" => self.runs = config_value(key, value)?,
                "seed" => self.seed = config_value(key, value)?,
                "events" => self.events = Some(PathBuf::from(value)).filter(|p| !p.as_os_str().is_empty()),
                "exclude_shared" => self.exclude_shared = config_value(key, value)?,
                other => {
                    return Err(Error::Config(format!(
                        "unknown key {other:?}; expected one of {}",
                        CONFIG_KEYS.join(", ")
                    )))
                }
            }
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let settings = io::parse_key_values(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut config = PipelineConfig::default();
        config.apply(&settings)?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.input.as_os_str().is_empty() {
            return Err(Error::Config("no input file given".into()));
        }
        if self.output.as_os_str().is_empty() {
            return Err(Error::Config("no output directory given".into()));
        }
        if self.delta_ts.is_empty() {
            return Err(Error::Config("delta_t list is empty".into()));
        }
        for &dt in self.delta_ts.iter().chain([self.analysis_dt].iter()) {
            delta_t_months(dt).map_err(|e| Error::Config(e.to_string()))?;
        }
        if self.runs == 0 {
            return Err(Error::Config("runs must be at least 1".into()));
        }
        if self.top_eigenvalues == 0 {
            return Err(Error::Config("top must be at least 1".into()));
        }
        Ok(())
    }
}

/// A month (or the whole run, when `month` is `None`) that produced no output for one step.
#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub month: Option<Month>,
    pub step: &'static str,
    pub message: String,
}

/// Reads a price file and converts it to log returns. An empty file is a configuration error.
pub fn load_returns(path: &Path, fill: FillPolicy) -> Result<ReturnPanel> {
    let meta = fs::metadata(path).map_err(|e| Error::io(path, e))?;
    if meta.len() == 0 {
        return Err(Error::Config(format!("input file {} is empty", path.display())));
    }
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    log_returns(&load_prices(std::io::BufReader::new(file), fill)?)
}

/// End months with a complete window of `delta_t_years`, up to the last data month.
pub fn analysis_months(panel: &ReturnPanel, delta_t_years: f64) -> Result<Vec<Month>> {
    let k = delta_t_months(delta_t_years)?;
    let first = panel.first_month().offset(k as i32 - 1);
    let last = panel.last_month();
    if first > last {
        return Err(Error::InsufficientHistory {
            end_month: last,
            delta_t_years,
            start: last.offset(1 - k as i32),
            first_month: panel.first_month(),
        });
    }
    Ok(Month::range_inclusive(first, last).collect())
}

pub fn month_matrix(panel: &ReturnPanel, month: Month, delta_t_years: f64) -> Result<CorrelationMatrix> {
    pearson_matrix(&panel.window(month, delta_t_years)?)
}

/// Correlation matrix estimated from every record of the panel.
pub fn unconditional_matrix(panel: &ReturnPanel) -> Result<CorrelationMatrix> {
    pearson_matrix(&panel.full_window())
}

/// Per-month results for the analysis period; failed months are `None`.
#[derive(Debug, Clone)]
pub struct MonthlyGraphs {
    pub months: Vec<Month>,
    pub matrices: Vec<Option<CorrelationMatrix>>,
    pub msts: Vec<Option<FilteredGraph>>,
    pub pmfgs: Vec<Option<FilteredGraph>>,
    pub failures: Vec<Failure>,
}

impl MonthlyGraphs {
    pub fn compute(panel: &ReturnPanel, delta_t_years: f64) -> Result<Self> {
        let months = analysis_months(panel, delta_t_years)?;
        let results: Vec<Result<(CorrelationMatrix, FilteredGraph, FilteredGraph), (&'static str, Error)>> = months
            .par_iter()
            .map(|&m| {
                let matrix = month_matrix(panel, m, delta_t_years).map_err(|e| ("correlation", e))?;
                let tree = mst(&matrix).map_err(|e| ("mst", e))?;
                let planar = pmfg(&matrix).map_err(|e| ("pmfg", e))?;
                Ok((matrix, tree, planar))
            })
            .collect();
        let mut out = MonthlyGraphs {
            months: months.clone(),
            matrices: Vec::with_capacity(months.len()),
            msts: Vec::with_capacity(months.len()),
            pmfgs: Vec::with_capacity(months.len()),
            failures: Vec::new(),
        };
        for (&m, r) in months.iter().zip(results) {
            match r {
                Ok((c, t, p)) => {
                    out.matrices.push(Some(c));
                    out.msts.push(Some(t));
                    out.pmfgs.push(Some(p));
                }
                Err((step, e)) => {
                    log::warn!("{m}: {step} failed: {e}");
                    out.failures.push(Failure {
                        month: Some(m),
                        step,
                        message: e.to_string(),
                    });
                    out.matrices.push(None);
                    out.msts.push(None);
                    out.pmfgs.push(None);
                }
            }
        }
        Ok(out)
    }

    pub fn mean_corr(&self) -> Vec<(Month, f64)> {
        self.months
            .iter()
            .zip(&self.matrices)
            .filter_map(|(&m, c)| Some((m, mean_offdiag(c.as_ref()?).ok()?)))
            .collect()
    }

    pub fn welch(&self, exclude_shared: bool) -> (Vec<(Month, WelchResult)>, Vec<Failure>) {
        let mut rows = Vec::new();
        let mut failures = Vec::new();
        for ((&m, t), p) in self.months.iter().zip(&self.msts).zip(&self.pmfgs) {
            let (Some(t), Some(p)) = (t, p) else { continue };
            match welch_on_graphs(t, p, exclude_shared) {
                Ok(r) => rows.push((m, r)),
                Err(e) => failures.push(Failure {
                    month: Some(m),
                    step: "ttest",
                    message: e.to_string(),
                }),
            }
        }
        (rows, failures)
    }

    pub fn spectral(&self, reference: &str, top: usize, ordering: &[String]) -> (EigenSeries, Vec<Failure>) {
        let mut series = EigenSeries {
            column_labels: ordering.to_vec(),
            rows: Vec::new(),
        };
        let mut failures = Vec::new();
        for (&m, c) in self.months.iter().zip(&self.matrices) {
            let Some(c) = c else { continue };
            match eigen_series(std::slice::from_ref(c), reference, top.min(c.n()), ordering) {
                Ok(s) => series.rows.extend(s.rows),
                Err(e) => failures.push(Failure {
                    month: Some(m),
                    step: "spectral",
                    message: e.to_string(),
                }),
            }
        }
        (series, failures)
    }
}

/// Mutual information between each graph and the one before it; row months are the later month.
/// Missing graphs break the chain and are listed as failures.
pub fn mi_series(months: &[Month], graphs: &[Option<FilteredGraph>], step: &'static str) -> (Vec<(Month, LinkMIResult)>, Vec<Failure>) {
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for k in 1..months.len() {
        let (Some(a), Some(b)) = (&graphs[k - 1], &graphs[k]) else {
            failures.push(Failure {
                month: Some(months[k]),
                step,
                message: "graph missing for this or the previous month".into(),
            });
            continue;
        };
        match link_mutual_information(a, b) {
            Ok(r) => rows.push((months[k], r)),
            Err(Error::ZeroEntropy { result, .. }) => rows.push((months[k], *result)),
            Err(e) => failures.push(Failure {
                month: Some(months[k]),
                step,
                message: e.to_string(),
            }),
        }
    }
    (rows, failures)
}

/// Degree of each vertex per month, with columns in `ordering`.
pub fn degree_rows(months: &[Month], graphs: &[Option<FilteredGraph>], ordering: &[String]) -> Result<Vec<(Month, Vec<usize>)>> {
    let present: Vec<(Month, &FilteredGraph)> = months
        .iter()
        .zip(graphs)
        .filter_map(|(&m, g)| Some((m, g.as_ref()?)))
        .collect();
    let graphs: Vec<FilteredGraph> = present.iter().map(|(_, g)| (*g).clone()).collect();
    let profile = degree_profile(&graphs, ordering)?;
    Ok(present.iter().map(|(m, _)| *m).zip(profile).collect())
}

/// Unconditional PMFG of the whole panel and its communities.
pub fn unconditional_communities(panel: &ReturnPanel, options: &CommunityOptions) -> Result<(FilteredGraph, Partition)> {
    let graph = pmfg(&unconditional_matrix(panel)?)?;
    let partition = detect_communities(&graph, options)?;
    Ok((graph, partition))
}

/// Labels ordered by community, then by flow rank inside the community.
pub fn community_ordering(labels: &[String], partition: &Partition) -> Vec<String> {
    partition.vertex_order().into_iter().map(|v| labels[v].clone()).collect()
}

pub fn write_mean_corr<W: Write>(writer: W, rows: &[(Month, f64)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["month", "mean_corr"])?;
    for (m, v) in rows {
        w.write_record([m.to_string(), v.to_string()])?;
    }
    w.flush().map_err(|e| Error::io("<output>", e))
}

pub fn write_manifest<W: Write>(writer: W, failures: &[Failure]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["month", "step", "error"])?;
    for f in failures {
        w.write_record([
            f.month.map_or(String::new(), |m| m.to_string()),
            f.step.to_string(),
            f.message.clone(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<output>", e))
}

pub fn write_events<W: Write>(writer: W, events: &[(Month, String)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["month", "label"])?;
    for (m, l) in events {
        w.write_record([m.to_string(), l.clone()])?;
    }
    w.flush().map_err(|e| Error::io("<output>", e))
}

/// What a pipeline run produced.
#[derive(Debug, Clone)]
pub struct PipelineReport {
    pub months: Vec<Month>,
    pub failures: Vec<Failure>,
    pub partition: Partition,
    /// Written files relative to the output directory, in write order.
    pub files: Vec<PathBuf>,
}

struct Sink {
    root: PathBuf,
    files: Vec<PathBuf>,
}

impl Sink {
    fn write(&mut self, rel: impl AsRef<Path>, f: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
        let rel = rel.as_ref();
        let path = self.root.join(rel);
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
        let mut w = BufWriter::new(file);
        f(&mut w)?;
        w.flush().map_err(|e| Error::io(&path, e))?;
        self.files.push(rel.to_path_buf());
        Ok(())
    }
}

/// Runs the whole analysis and writes every table under `config.output`.
///
/// Layout: `correlation/`, `mst/` and `pmfg/` hold one `YYYY-MM.csv` per month; series
/// tables, the surface, the unconditional PMFG (`unconditional_pmfg.csv`, `.graphml`),
/// `communities.csv`, `events.csv` and `manifest.csv` sit at the top level.
pub fn run_pipeline(config: &PipelineConfig) -> Result<PipelineReport> {
    config.validate()?;
    let events = match &config.events {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            io::parse_events(&text).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?
        }
        None => Vec::new(),
    };
    let panel = load_returns(&config.input, config.fill)?;
    let labels = panel.labels().to_vec();
    let reference = config.reference.clone().unwrap_or_else(|| labels[0].clone());
    if !labels.contains(&reference) {
        return Err(Error::Config(format!("reference label {reference:?} is not in the input")));
    }

    let monthly = MonthlyGraphs::compute(&panel, config.analysis_dt)?;
    let (surface, surface_errors) = correlation_surface_lenient(&panel, &config.delta_ts)?;
    let options = CommunityOptions {
        n_runs: config.runs,
        seed: config.seed,
        ..CommunityOptions::default()
    };
    let (unconditional, partition) = unconditional_communities(&panel, &options)?;
    let ordering = community_ordering(&labels, &partition);

    let mut failures = monthly.failures.clone();
    failures.extend(surface_errors.into_iter().map(|(m, dt, e)| Failure {
        month: Some(m),
        step: "surface",
        message: format!("dt={dt}: {e}"),
    }));
    let mean_corr = monthly.mean_corr();
    let (ttest, f) = monthly.welch(config.exclude_shared);
    failures.extend(f);
    let (mi_mst, f) = mi_series(&monthly.months, &monthly.msts, "mi_mst");
    failures.extend(f);
    let (mi_pmfg, f) = mi_series(&monthly.months, &monthly.pmfgs, "mi_pmfg");
    failures.extend(f);
    let degrees_mst = degree_rows(&monthly.months, &monthly.msts, &ordering)?;
    let degrees_pmfg = degree_rows(&monthly.months, &monthly.pmfgs, &ordering)?;
    let (eigen, f) = monthly.spectral(&reference, config.top_eigenvalues, &labels);
    failures.extend(f);
    // Stable, so steps keep their order within a month.
    failures.sort_by_key(|f| f.month);

    let mut sink = Sink {
        root: config.output.clone(),
        files: Vec::new(),
    };
    for (k, &m) in monthly.months.iter().enumerate() {
        if let Some(c) = &monthly.matrices[k] {
            sink.write(format!("correlation/{m}.csv"), |w| c.write_csv(w))?;
        }
        if let Some(g) = &monthly.msts[k] {
            sink.write(format!("mst/{m}.csv"), |w| io::write_edgelist(w, g))?;
        }
        if let Some(g) = &monthly.pmfgs[k] {
            sink.write(format!("pmfg/{m}.csv"), |w| io::write_edgelist(w, g))?;
        }
    }
    sink.write("mean_corr.csv", |w| write_mean_corr(w, &mean_corr))?;
    sink.write("ttest.csv", |w| write_ttest_table(w, &ttest))?;
    sink.write("mi_mst.csv", |w| io::write_mi_table(w, &mi_mst))?;
    sink.write("mi_pmfg.csv", |w| io::write_mi_table(w, &mi_pmfg))?;
    sink.write("degree_mst.csv", |w| io::write_degree_profile(w, &ordering, &degrees_mst))?;
    sink.write("degree_pmfg.csv", |w| io::write_degree_profile(w, &ordering, &degrees_pmfg))?;
    sink.write("eigenvalues.csv", |w| eigen.write_eigenvalues(w))?;
    sink.write("eigenvectors.csv", |w| eigen.write_eigenvectors(w))?;
    sink.write("thresholds.csv", |w| eigen.write_thresholds(w))?;
    sink.write("surface.csv", |w| surface.write_csv(w))?;
    sink.write("unconditional_pmfg.csv", |w| io::write_edgelist(w, &unconditional))?;
    sink.write("unconditional_pmfg.graphml", |w| io::write_graphml(w, &unconditional))?;
    sink.write("communities.csv", |w| io::write_partition(w, &labels, &partition))?;
    if config.events.is_some() {
        sink.write("events.csv", |w| write_events(w, &events))?;
    }
    sink.write("manifest.csv", |w| write_manifest(w, &failures))?;

    Ok(PipelineReport {
        months: monthly.months,
        failures,
        partition,
        files: sink.files,
    })
}
