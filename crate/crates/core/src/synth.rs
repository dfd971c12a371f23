//! Gaussian factor-model return panels with known correlation structure.

use chrono::NaiveDate;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::calendar::{business_days, business_days_between, Month};
use crate::corr::{pearson_from_series, CorrelationMatrix};
use crate::error::{Error, Result};
use crate::panel::ReturnPanel;

/// Country labels for up to 57 series, used as default synthetic labels.
pub const INDEX_LABELS: [&str; 57] = [
    "Argentina", "Australia", "Austria", "Belgium", "Bermuda", "Brazil", "Canada", "Chile",
    "China", "CostaRica", "CzechRepublic", "Denmark", "Egypt", "Spain", "Finland", "France",
    "Germany", "Greece", "HongKong", "Hungary", "Indonesia", "India", "Ireland", "Iceland",
    "Israel", "Italy", "Jamaica", "Japan", "Kenya", "Korea", "SaudiArabia", "Morocco",
    "Malaysia", "Mexico", "Mauritius", "Netherlands", "Norway", "NewZealand", "Oman",
    "Pakistan", "Peru", "Philippines", "Poland", "Portugal", "SouthAfrica", "Russia",
    "Slovenia", "SriLanka", "Switzerland", "Slovakia", "Sweden", "Thailand", "Turkey",
    "Taiwan", "UK", "USA", "Venezuela",
];

pub fn default_start() -> NaiveDate {
    NaiveDate::from_ymd_opt(1996, 1, 1).expect("valid date")
}

/// Country names when `n <= 57`, otherwise `S001`, `S002`, ...
pub fn default_labels(n: usize) -> Vec<String> {
    if n <= INDEX_LABELS.len() {
        INDEX_LABELS[..n].iter().map(|s| s.to_string()).collect()
    } else {
        (1..=n).map(|i| format!("S{i:03}")).collect()
    }
}

/// Block one-factor model: correlation `rho_in` inside a block, `rho_out` across blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorSpec {
    pub n_series: usize,
    pub n_records: usize,
    /// Block id of each series.
    pub block_assignment: Vec<usize>,
    pub rho_in: f64,
    pub rho_out: f64,
    pub seed: u64,
    /// Calendar start; the base price sits on the first business day on or after it.
    pub start: NaiveDate,
    pub labels: Vec<String>,
}

impl FactorSpec {
    /// `n_blocks` contiguous blocks of `block_size` series each.
    pub fn blocks(n_blocks: usize, block_size: usize, rho_in: f64, rho_out: f64, n_records: usize, seed: u64) -> Self {
        let n = n_blocks * block_size;
        FactorSpec {
            n_series: n,
            n_records,
            block_assignment: (0..n).map(|i| i / block_size.max(1)).collect(),
            rho_in,
            rho_out,
            seed,
            start: default_start(),
            labels: default_labels(n),
        }
    }

    /// Contiguous blocks with the given sizes, e.g. `[14, 14, 14, 15]`.
    pub fn with_block_sizes(sizes: &[usize], rho_in: f64, rho_out: f64, n_records: usize, seed: u64) -> Self {
        let block_assignment: Vec<usize> = sizes
            .iter()
            .enumerate()
            .flat_map(|(b, &s)| std::iter::repeat_n(b, s))
            .collect();
        let n = block_assignment.len();
        FactorSpec {
            n_series: n,
            n_records,
            block_assignment,
            rho_in,
            rho_out,
            seed,
            start: default_start(),
            labels: default_labels(n),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_series == 0 || self.n_records == 0 {
            return Err(Error::InvalidSpec("n_series and n_records must be positive".into()));
        }
        if self.block_assignment.len() != self.n_series || self.labels.len() != self.n_series {
            return Err(Error::InvalidSpec(format!(
                "{} series but {} block ids and {} labels",
                self.n_series,
                self.block_assignment.len(),
                self.labels.len()
            )));
        }
        if !(0.0 <= self.rho_out && self.rho_out <= self.rho_in && self.rho_in < 1.0) {
            return Err(Error::InvalidSpec(format!(
                "need 0 <= rho_out <= rho_in < 1, got rho_in={} rho_out={}",
                self.rho_in, self.rho_out
            )));
        }
        Ok(())
    }

    pub fn n_blocks(&self) -> usize {
        self.block_assignment.iter().max().map_or(0, |m| m + 1)
    }

    /// Exact correlation matrix implied by the spec.
    pub fn population_matrix(&self) -> Result<CorrelationMatrix> {
        self.validate()?;
        let n = self.n_series;
        let mut v = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                v[i * n + j] = if i == j {
                    1.0
                } else if self.block_assignment[i] == self.block_assignment[j] {
                    self.rho_in
                } else {
                    self.rho_out
                };
            }
        }
        CorrelationMatrix::new(self.labels.clone(), v)
    }

    fn draw(&self, rng: &mut ChaCha8Rng, count: usize) -> Vec<Vec<f64>> {
        let n = self.n_series;
        let k = self.n_blocks();
        let a = self.rho_out.sqrt();
        let b = (self.rho_in - self.rho_out).sqrt();
        let c = (1.0 - self.rho_in).sqrt();
        let mut out = vec![Vec::with_capacity(count); n];
        let mut block = vec![0.0; k];
        for _ in 0..count {
            let g: f64 = rng.sample(StandardNormal);
            for f in block.iter_mut() {
                *f = rng.sample(StandardNormal);
            }
            for (i, series) in out.iter_mut().enumerate() {
                let e: f64 = rng.sample(StandardNormal);
                series.push(a * g + b * block[self.block_assignment[i]] + c * e);
            }
        }
        out
    }
}

fn calendar(start: NaiveDate, n_records: usize) -> (NaiveDate, Vec<NaiveDate>) {
    let mut days = business_days(start, n_records + 1);
    let base = days.remove(0);
    (base, days)
}

/// Unit-variance Gaussian returns with correlation `rho` between every pair.
pub fn gen_equicorrelated(n: usize, t: usize, rho: f64, seed: u64) -> Result<ReturnPanel> {
    if n < 2 || t == 0 {
        return Err(Error::InvalidSpec("need n >= 2 and t >= 1".into()));
    }
    let lower = -1.0 / (n as f64 - 1.0);
    if !(rho > lower && rho < 1.0) {
        return Err(Error::InvalidSpec(format!(
            "rho={rho} outside the positive-definite range ({lower}, 1)"
        )));
    }
    // y_i = e_i + beta * sum_j e_j has correlation (2b + n b^2) / (1 + 2b + n b^2).
    let nf = n as f64;
    let beta = (-1.0 + (1.0 + nf * rho / (1.0 - rho)).sqrt()) / nf;
    let scale = 1.0 / (1.0 + 2.0 * beta + nf * beta * beta).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut returns = vec![Vec::with_capacity(t); n];
    let mut e = vec![0.0; n];
    for _ in 0..t {
        for x in e.iter_mut() {
            *x = rng.sample(StandardNormal);
        }
        let s: f64 = e.iter().sum();
        for (series, x) in returns.iter_mut().zip(&e) {
            series.push((x + beta * s) * scale);
        }
    }
    let (base, dates) = calendar(default_start(), t);
    ReturnPanel::new(dates, default_labels(n), returns, base)
}

pub fn gen_blocks(spec: &FactorSpec) -> Result<ReturnPanel> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let returns = spec.draw(&mut rng, spec.n_records);
    let (base, dates) = calendar(spec.start, spec.n_records);
    ReturnPanel::new(dates, spec.labels.clone(), returns, base)
}

/// Number of return records dated before the first day of `month` for a panel starting at `start`.
pub fn records_before(start: NaiveDate, month: Month) -> usize {
    let base = business_days(start, 1)[0];
    let boundary = month.first_day();
    if boundary <= base {
        return 0;
    }
    business_days_between(base, boundary).saturating_sub(1)
}

/// Number of return records when the price calendar runs from `start` through `end` inclusive.
pub fn records_through(start: NaiveDate, end: NaiveDate) -> usize {
    business_days_between(start, end + chrono::Days::new(1)).saturating_sub(1)
}

/// `before.n_records` records from `before`, then `after.n_records` records from `after`.
/// The first record of `after` must be the first business day of `shift_month`.
pub fn gen_regime_shift(before: &FactorSpec, after: &FactorSpec, shift_month: Month) -> Result<ReturnPanel> {
    before.validate()?;
    after.validate()?;
    if before.n_series != after.n_series {
        return Err(Error::InvalidSpec(format!(
            "mismatched dimensions: {} vs {} series",
            before.n_series, after.n_series
        )));
    }
    let expected = records_before(before.start, shift_month);
    if before.n_records != expected {
        return Err(Error::InvalidSpec(format!(
            "shift month {shift_month} needs {expected} records before the shift, spec has {}",
            before.n_records
        )));
    }
    let mut rng_before = ChaCha8Rng::seed_from_u64(before.seed);
    let mut rng_after = ChaCha8Rng::seed_from_u64(after.seed);
    let mut returns = before.draw(&mut rng_before, before.n_records);
    for (series, tail) in returns.iter_mut().zip(after.draw(&mut rng_after, after.n_records)) {
        series.extend(tail);
    }
    let (base, dates) = calendar(before.start, before.n_records + after.n_records);
    ReturnPanel::new(dates, before.labels.clone(), returns, base)
}

/// Sample correlation matrix of a random multi-factor Gaussian panel with `T = 2N + 10`
/// records. Positive definite with probability one; used for property checks and benches.
pub fn random_correlation_matrix(n: usize, seed: u64) -> Result<CorrelationMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t = 2 * n + 10;
    let n_factors = rng.random_range(1..=4usize);
    let loadings: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..n_factors).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    let mut series = vec![Vec::with_capacity(t); n];
    let mut f = vec![0.0; n_factors];
    for _ in 0..t {
        for x in f.iter_mut() {
            *x = rng.sample(StandardNormal);
        }
        for (i, s) in series.iter_mut().enumerate() {
            let e: f64 = rng.sample(StandardNormal);
            s.push(loadings[i].iter().zip(&f).map(|(l, x)| l * x).sum::<f64>() + e);
        }
    }
    Ok(pearson_from_series(&default_labels(n), &series)?.with_record_count(t))
}
