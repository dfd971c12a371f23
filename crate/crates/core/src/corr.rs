//! Pearson correlation matrices and the average-correlation surface.

use std::io::Write;

use rayon::prelude::*;

use crate::calendar::Month;
use crate::error::{Error, Result};
use crate::panel::{ReturnPanel, ReturnWindow};

/// Standard deviations below this are treated as zero variance.
pub const ZERO_VARIANCE_THRESHOLD: f64 = 1e-15;

/// Symmetric `N x N` correlation matrix, row-major, with optional window metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    labels: Vec<String>,
    values: Vec<f64>,
    end_month: Option<Month>,
    delta_t_years: Option<f64>,
    record_count: usize,
}

impl CorrelationMatrix {
    /// Validates unit diagonal, symmetry (1e-12) and the `[-1, 1]` range.
    pub fn new(labels: Vec<String>, values: Vec<f64>) -> Result<Self> {
        let n = labels.len();
        if values.len() != n * n {
            return Err(Error::InvalidMatrix(format!(
                "{} values for {} labels",
                values.len(),
                n
            )));
        }
        for i in 0..n {
            if values[i * n + i] != 1.0 {
                return Err(Error::InvalidMatrix(format!(
                    "diagonal entry {i} is {}",
                    values[i * n + i]
                )));
            }
            for j in 0..n {
                let v = values[i * n + j];
                if !(-1.0..=1.0).contains(&v) {
                    return Err(Error::InvalidMatrix(format!("entry ({i},{j}) = {v} outside [-1,1]")));
                }
                if (v - values[j * n + i]).abs() > 1e-12 {
                    return Err(Error::InvalidMatrix(format!("asymmetric at ({i},{j})")));
                }
            }
        }
        Ok(CorrelationMatrix {
            labels,
            values,
            end_month: None,
            delta_t_years: None,
            record_count: 0,
        })
    }

    /// Population matrix with constant off-diagonal `rho`.
    pub fn equicorrelated(labels: Vec<String>, rho: f64) -> Result<Self> {
        let n = labels.len();
        let values = (0..n * n)
            .map(|k| if k / n == k % n { 1.0 } else { rho })
            .collect();
        Self::new(labels, values)
    }

    pub fn with_window(mut self, end_month: Month, delta_t_years: f64, record_count: usize) -> Self {
        self.end_month = Some(end_month);
        self.delta_t_years = Some(delta_t_years);
        self.record_count = record_count;
        self
    }

    /// Sets the number of records the matrix was estimated from.
    pub fn with_record_count(mut self, record_count: usize) -> Self {
        self.record_count = record_count;
        self
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n() + j]
    }

    /// Row-major values.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn end_month(&self) -> Option<Month> {
        self.end_month
    }

    pub fn delta_t_years(&self) -> Option<f64> {
        self.delta_t_years
    }

    pub fn record_count(&self) -> usize {
        self.record_count
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Applies `f` to every off-diagonal entry, keeping the result symmetric.
    pub fn map_offdiag(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        let n = self.n();
        let mut values = self.values.clone();
        for i in 0..n {
            for j in (i + 1)..n {
                let v = f(self.get(i, j));
                values[i * n + j] = v;
                values[j * n + i] = v;
            }
        }
        let mut out = Self::new(self.labels.clone(), values)?;
        out.end_month = self.end_month;
        out.delta_t_years = self.delta_t_years;
        out.record_count = self.record_count;
        Ok(out)
    }

    /// Writes a labelled CSV matrix: header `label,<l1>,...`, one row per series.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["label".to_string()];
        header.extend(self.labels.iter().cloned());
        w.write_record(&header)?;
        for (i, label) in self.labels.iter().enumerate() {
            let mut row = vec![label.clone()];
            row.extend((0..self.n()).map(|j| self.get(i, j).to_string()));
            w.write_record(&row)?;
        }
        w.flush().map_err(|e| Error::io("<output>", e))?;
        Ok(())
    }
}

/// Pearson correlation with population (`1/T`) moments over the window's records.
pub fn pearson_matrix(window: &ReturnWindow) -> Result<CorrelationMatrix> {
    let m = pearson_from_series(&window.labels, &window.records)?;
    Ok(m.with_window(window.end_month, window.delta_t_years, window.record_count()))
}

pub fn pearson_from_series(labels: &[String], series: &[Vec<f64>]) -> Result<CorrelationMatrix> {
    let n = labels.len();
    let t = series.first().map_or(0, Vec::len);
    if t < 2 {
        return Err(Error::TooFewRows { needed: 2, found: t });
    }
    let tf = t as f64;
    // z[i][k] = (r_ik - mu_i) / (sigma_i * sqrt(T)) so that c_ij = sum_k z_ik z_jk.
    let mut z = Vec::with_capacity(n);
    for (label, x) in labels.iter().zip(series) {
        let mean = x.iter().sum::<f64>() / tf;
        let dev: Vec<f64> = x.iter().map(|v| v - mean).collect();
        let var = dev.iter().map(|d| d * d).sum::<f64>() / tf;
        let sd = var.sqrt();
        if !(sd >= ZERO_VARIANCE_THRESHOLD) {
            return Err(Error::ZeroVariance { label: label.clone() });
        }
        let scale = 1.0 / (sd * tf.sqrt());
        z.push(dev.into_iter().map(|d| d * scale).collect::<Vec<f64>>());
    }
    let mut values = vec![0.0; n * n];
    for i in 0..n {
        values[i * n + i] = 1.0;
        for j in (i + 1)..n {
            let c = z[i]
                .iter()
                .zip(&z[j])
                .map(|(a, b)| a * b)
                .sum::<f64>()
                .clamp(-1.0, 1.0);
            values[i * n + j] = c;
            values[j * n + i] = c;
        }
    }
    CorrelationMatrix::new(labels.to_vec(), values)
}

/// Mean of the `N(N-1)/2` upper-triangle entries.
pub fn mean_offdiag(matrix: &CorrelationMatrix) -> Result<f64> {
    let n = matrix.n();
    if n < 2 {
        return Err(Error::TooFewSeries { needed: 2, found: n });
    }
    let mut sum = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            sum += matrix.get(i, j);
        }
    }
    Ok(sum / (n * (n - 1) / 2) as f64)
}

/// Average off-diagonal correlation over a grid of month ends and evaluation periods.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationSurface {
    pub months: Vec<Month>,
    pub delta_ts: Vec<f64>,
    /// `mean_corr[d][m]` for `delta_ts[d]` and `months[m]`; `None` where history is insufficient.
    pub mean_corr: Vec<Vec<Option<f64>>>,
    pub valid_mask: Vec<Vec<bool>>,
}

impl CorrelationSurface {
    /// Long format `month,dt,mean_corr,valid`, grouped by dt then month.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["month", "dt", "mean_corr", "valid"])?;
        for (d, dt) in self.delta_ts.iter().enumerate() {
            for (m, month) in self.months.iter().enumerate() {
                let value = self.mean_corr[d][m].map_or(String::new(), |v| v.to_string());
                w.write_record([
                    month.to_string(),
                    dt.to_string(),
                    value,
                    self.valid_mask[d][m].to_string(),
                ])?;
            }
        }
        w.flush().map_err(|e| Error::io("<output>", e))?;
        Ok(())
    }
}

/// Mean off-diagonal correlation of one surface cell; `Ok(None)` when history is insufficient.
pub fn surface_cell(panel: &ReturnPanel, month: Month, delta_t_years: f64) -> Result<Option<f64>> {
    match panel.window(month, delta_t_years) {
        Ok(w) => mean_offdiag(&pearson_matrix(&w)?).map(Some),
        Err(Error::InsufficientHistory { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

pub fn correlation_surface(panel: &ReturnPanel, delta_ts: &[f64]) -> Result<CorrelationSurface> {
    let (surface, mut errors) = correlation_surface_lenient(panel, delta_ts)?;
    match errors.is_empty() {
        true => Ok(surface),
        false => {
            let (month, _, e) = errors.swap_remove(0);
            Err(e.at_month(month))
        }
    }
}

/// Like [`correlation_surface`], but a cell whose window fails (e.g. a zero-variance series)
/// is marked invalid and its error returned alongside, in (ΔT, month) order.
pub fn correlation_surface_lenient(
    panel: &ReturnPanel,
    delta_ts: &[f64],
) -> Result<(CorrelationSurface, Vec<(Month, f64, Error)>)> {
    if delta_ts.is_empty() {
        return Err(Error::InvalidArgument("no evaluation periods given".into()));
    }
    for &dt in delta_ts {
        crate::calendar::delta_t_months(dt)?;
    }
    let months: Vec<Month> = Month::range_inclusive(panel.first_month(), panel.last_month()).collect();
    let cells: Vec<(usize, usize)> = (0..delta_ts.len())
        .flat_map(|d| (0..months.len()).map(move |m| (d, m)))
        .collect();
    let values: Vec<Result<Option<f64>>> = cells
        .par_iter()
        .map(|&(d, m)| surface_cell(panel, months[m], delta_ts[d]))
        .collect();

    let mut mean_corr = vec![vec![None; months.len()]; delta_ts.len()];
    let mut valid_mask = vec![vec![false; months.len()]; delta_ts.len()];
    let mut history = vec![false; delta_ts.len()];
    let mut errors = Vec::new();
    for (&(d, m), v) in cells.iter().zip(values) {
        match v {
            Ok(v) => {
                history[d] |= v.is_some();
                valid_mask[d][m] = v.is_some();
                mean_corr[d][m] = v;
            }
            Err(e) => {
                history[d] = true;
                errors.push((months[m], delta_ts[d], e));
            }
        }
    }
    let shortest = delta_ts
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(d, _)| d)
        .expect("non-empty");
    if !history[shortest] {
        return Err(Error::InvalidArgument(format!(
            "panel shorter than the shortest evaluation period {}",
            delta_ts[shortest]
        )));
    }
    Ok((
        CorrelationSurface {
            months,
            delta_ts: delta_ts.to_vec(),
            mean_corr,
            valid_mask,
        },
        errors,
    ))
}
