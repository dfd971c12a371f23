//! Price ingestion, log returns and calendar windows.

use std::io::{Read, Write};
use std::str::FromStr;

use chrono::NaiveDate;

use crate::calendar::{delta_t_months, Month};
use crate::error::{Error, Result};

/// How missing price cells are handled on load.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FillPolicy {
    /// Replace a missing cell with the most recent prior value of the same series.
    #[default]
    ForwardFill,
    /// Any missing cell is an error.
    Strict,
}

impl FromStr for FillPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "forward" | "forward_fill" | "ffill" => Ok(FillPolicy::ForwardFill),
            "strict" => Ok(FillPolicy::Strict),
            other => Err(Error::InvalidArgument(format!(
                "unknown fill policy {other:?} (expected forward|strict)"
            ))),
        }
    }
}

/// Date-indexed price levels for `N` labeled series, stored series-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PricePanel {
    dates: Vec<NaiveDate>,
    labels: Vec<String>,
    prices: Vec<Vec<f64>>,
}

impl PricePanel {
    pub fn new(dates: Vec<NaiveDate>, labels: Vec<String>, prices: Vec<Vec<f64>>) -> Result<Self> {
        check_labels(&labels)?;
        check_dates(&dates)?;
        if dates.len() < 2 {
            return Err(Error::TooFewRows {
                needed: 2,
                found: dates.len(),
            });
        }
        if prices.len() != labels.len() || prices.iter().any(|p| p.len() != dates.len()) {
            return Err(Error::InvalidArgument("price matrix shape mismatch".into()));
        }
        for (label, series) in labels.iter().zip(&prices) {
            if let Some(k) = series.iter().position(|p| !(*p > 0.0) || !p.is_finite()) {
                return Err(Error::NonPositivePrice {
                    label: label.clone(),
                    date: dates[k],
                    value: series[k],
                });
            }
        }
        Ok(PricePanel {
            dates,
            labels,
            prices,
        })
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Prices of series `i`, one per date.
    pub fn series(&self, i: usize) -> &[f64] {
        &self.prices[i]
    }

    pub fn n_series(&self) -> usize {
        self.labels.len()
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    /// Writes the panel as `date,<label1>,...` CSV.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["date".to_string()];
        header.extend(self.labels.iter().cloned());
        w.write_record(&header)?;
        for (k, date) in self.dates.iter().enumerate() {
            let mut row = vec![date.to_string()];
            row.extend(self.prices.iter().map(|s| s[k].to_string()));
            w.write_record(&row)?;
        }
        w.flush().map_err(|e| Error::io("<output>", e))?;
        Ok(())
    }
}

/// Reads a comma-separated price table with header `date,<label1>,...,<labelN>`.
pub fn load_prices<R: Read>(source: R, fill: FillPolicy) -> Result<PricePanel> {
    load_prices_delimited(source, fill, b',')
}

pub fn load_prices_delimited<R: Read>(source: R, fill: FillPolicy, delimiter: u8) -> Result<PricePanel> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .has_headers(true)
        .trim(csv::Trim::All)
        .flexible(false)
        .from_reader(source);
    let header = reader.headers()?.clone();
    if header.len() < 2 {
        return Err(Error::Parse {
            line: 1,
            message: "header needs a date column and at least one series".into(),
        });
    }
    let labels: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    check_labels(&labels)?;

    let n = labels.len();
    let mut dates = Vec::new();
    let mut prices: Vec<Vec<f64>> = vec![Vec::new(); n];
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        let line = row + 2;
        let date = NaiveDate::parse_from_str(&record[0], "%Y-%m-%d").map_err(|e| Error::Parse {
            line,
            message: format!("bad date {:?}: {e}", &record[0]),
        })?;
        if let Some(&previous) = dates.last() {
            if date <= previous {
                return Err(Error::NonMonotoneDates { previous, next: date });
            }
        }
        for (i, field) in record.iter().skip(1).enumerate() {
            let value = if field.is_empty() {
                match (fill, prices[i].last()) {
                    (FillPolicy::ForwardFill, Some(&prior)) => prior,
                    _ => {
                        return Err(Error::MissingValue {
                            label: labels[i].clone(),
                            date,
                        })
                    }
                }
            } else {
                field.parse::<f64>().map_err(|e| Error::Parse {
                    line,
                    message: format!("bad price {field:?}: {e}"),
                })?
            };
            prices[i].push(value);
        }
        dates.push(date);
    }
    if dates.len() < 2 {
        return Err(Error::TooFewRows {
            needed: 2,
            found: dates.len(),
        });
    }
    PricePanel::new(dates, labels, prices)
}

/// Daily log returns, one row per later day of each consecutive price pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnPanel {
    dates: Vec<NaiveDate>,
    labels: Vec<String>,
    returns: Vec<Vec<f64>>,
    base_date: NaiveDate,
}

impl ReturnPanel {
    /// `base_date` is the date of the price observation preceding the first return.
    pub fn new(
        dates: Vec<NaiveDate>,
        labels: Vec<String>,
        returns: Vec<Vec<f64>>,
        base_date: NaiveDate,
    ) -> Result<Self> {
        check_labels(&labels)?;
        check_dates(&dates)?;
        if dates.is_empty() {
            return Err(Error::TooFewRows { needed: 1, found: 0 });
        }
        if base_date >= dates[0] {
            return Err(Error::NonMonotoneDates {
                previous: base_date,
                next: dates[0],
            });
        }
        if returns.len() != labels.len() || returns.iter().any(|r| r.len() != dates.len()) {
            return Err(Error::InvalidArgument("return matrix shape mismatch".into()));
        }
        Ok(ReturnPanel {
            dates,
            labels,
            returns,
            base_date,
        })
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn series(&self, i: usize) -> &[f64] {
        &self.returns[i]
    }

    pub fn n_series(&self) -> usize {
        self.labels.len()
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    pub fn base_date(&self) -> NaiveDate {
        self.base_date
    }

    /// First month with price data; windows may not start earlier.
    pub fn first_month(&self) -> Month {
        Month::of(self.base_date)
    }

    pub fn last_month(&self) -> Month {
        Month::of(*self.dates.last().expect("non-empty panel"))
    }

    /// Rebuilds price levels as `initial * exp(cumulative return)`.
    pub fn to_prices(&self, initial: f64) -> Result<PricePanel> {
        let mut dates = Vec::with_capacity(self.dates.len() + 1);
        dates.push(self.base_date);
        dates.extend_from_slice(&self.dates);
        let prices = self
            .returns
            .iter()
            .map(|r| {
                let mut level = initial.ln();
                let mut out = Vec::with_capacity(r.len() + 1);
                out.push(initial);
                for x in r {
                    level += x;
                    out.push(level.exp());
                }
                out
            })
            .collect();
        PricePanel::new(dates, self.labels.clone(), prices)
    }

    /// Return records dated within the `delta_t_years` calendar months ending with `end_month`.
    pub fn window(&self, end_month: Month, delta_t_years: f64) -> Result<ReturnWindow> {
        let months = delta_t_months(delta_t_years)?;
        let start_month = end_month.offset(1 - months as i32);
        if start_month < self.first_month() {
            return Err(Error::InsufficientHistory {
                end_month,
                delta_t_years,
                start: start_month,
                first_month: self.first_month(),
            });
        }
        if end_month > self.last_month() {
            return Err(Error::InvalidArgument(format!(
                "window end {end_month} is after the last data month {}",
                self.last_month()
            )));
        }
        let start = start_month.first_day();
        let end = end_month.last_day();
        let lo = self.dates.partition_point(|d| *d < start);
        let hi = self.dates.partition_point(|d| *d <= end);
        if hi <= lo {
            return Err(Error::TooFewRecords {
                end_month,
                delta_t_years,
                records: 0,
            });
        }
        let window = ReturnWindow {
            end_month,
            delta_t_years,
            start,
            end,
            labels: self.labels.clone(),
            dates: self.dates[lo..hi].to_vec(),
            records: self.returns.iter().map(|r| r[lo..hi].to_vec()).collect(),
        };
        if window.record_count() <= window.labels.len() {
            log::warn!(
                "window {end_month} dt={delta_t_years}: {} records for {} series, correlation matrix will be singular",
                window.record_count(),
                window.labels.len()
            );
        }
        Ok(window)
    }

    /// Writes `date,<label1>,...` CSV of log returns; the base date is not written.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["date".to_string()];
        header.extend(self.labels.iter().cloned());
        w.write_record(&header)?;
        for (k, date) in self.dates.iter().enumerate() {
            let mut row = vec![date.to_string()];
            row.extend(self.returns.iter().map(|s| s[k].to_string()));
            w.write_record(&row)?;
        }
        w.flush().map_err(|e| Error::io("<output>", e))?;
        Ok(())
    }

    /// Every record of the panel as one window (the unconditional estimate).
    pub fn full_window(&self) -> ReturnWindow {
        let first = self.first_month();
        let last = self.last_month();
        ReturnWindow {
            end_month: last,
            delta_t_years: (first.months_until(last) + 1) as f64 / 12.0,
            start: first.first_day(),
            end: last.last_day(),
            labels: self.labels.clone(),
            dates: self.dates.clone(),
            records: self.returns.clone(),
        }
    }
}

/// Computes `r[k] = ln P[k+1] - ln P[k]` for every series.
pub fn log_returns(panel: &PricePanel) -> Result<ReturnPanel> {
    for (label, series) in panel.labels.iter().zip(&panel.prices) {
        if let Some(k) = series.iter().position(|p| !(*p > 0.0)) {
            return Err(Error::NonPositivePrice {
                label: label.clone(),
                date: panel.dates[k],
                value: series[k],
            });
        }
    }
    let returns = panel
        .prices
        .iter()
        .map(|p| p.windows(2).map(|w| w[1].ln() - w[0].ln()).collect())
        .collect();
    ReturnPanel::new(
        panel.dates[1..].to_vec(),
        panel.labels.clone(),
        returns,
        panel.dates[0],
    )
}

/// Returns of `N` series inside one calendar window.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnWindow {
    pub end_month: Month,
    pub delta_t_years: f64,
    pub start: NaiveDate,
    pub end: NaiveDate,
    pub labels: Vec<String>,
    pub dates: Vec<NaiveDate>,
    /// `records[i]` holds the returns of series `i`.
    pub records: Vec<Vec<f64>>,
}

impl ReturnWindow {
    pub fn record_count(&self) -> usize {
        self.dates.len()
    }
}

fn check_labels(labels: &[String]) -> Result<()> {
    if labels.is_empty() {
        return Err(Error::TooFewSeries { needed: 1, found: 0 });
    }
    let mut seen = std::collections::HashSet::new();
    for l in labels {
        if l.is_empty() || l.contains(',') || l.contains('\n') {
            return Err(Error::InvalidArgument(format!("invalid series label {l:?}")));
        }
        if !seen.insert(l.as_str()) {
            return Err(Error::InvalidArgument(format!("duplicate series label {l:?}")));
        }
    }
    Ok(())
}

fn check_dates(dates: &[NaiveDate]) -> Result<()> {
    for w in dates.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::NonMonotoneDates {
                previous: w[0],
                next: w[1],
            });
        }
    }
    Ok(())
}
