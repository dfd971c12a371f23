//! Eigen-decomposition of correlation matrices and random-matrix threshold counting.

use std::io::Write;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::calendar::Month;
use crate::corr::CorrelationMatrix;
use crate::error::{Error, Result};

/// Upper edge of the Marchenko–Pastur spectrum for unit-variance i.i.d. series:
/// `(1 + sqrt(N / T))^2`.
pub fn rmt_upper_bound(n_series: usize, n_records: usize) -> Result<f64> {
    if n_series == 0 || n_records == 0 {
        return Err(Error::InvalidArgument(format!(
            "rmt bound needs positive sizes, got N={n_series}, T={n_records}"
        )));
    }
    let q = (n_series as f64 / n_records as f64).sqrt();
    Ok((1.0 + q) * (1.0 + q))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSummary {
    pub labels: Vec<String>,
    /// Descending.
    pub eigenvalues: Vec<f64>,
    /// `eigenvectors[k]` belongs to `eigenvalues[k]`, oriented so the reference component is non-negative.
    pub eigenvectors: Vec<Vec<f64>>,
    pub rmt_upper: f64,
    pub n_above: usize,
    pub reference_label: String,
    pub n_records: usize,
}

/// Flips `v` so that `v[reference] >= 0`; on a zero reference component the component sum decides.
pub fn orient(v: &mut [f64], reference: usize) {
    let flip = if v[reference] != 0.0 {
        v[reference] < 0.0
    } else {
        v.iter().sum::<f64>() < 0.0
    };
    if flip {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Full symmetric eigen-decomposition. The matrix must carry its record count, which sets
/// the random-matrix threshold.
pub fn eigen_decompose(matrix: &CorrelationMatrix, reference_label: &str) -> Result<SpectralSummary> {
    let n = matrix.n();
    let reference = matrix
        .index_of(reference_label)
        .ok_or_else(|| Error::UnknownLabel(reference_label.to_string()))?;
    let n_records = matrix.record_count();
    let rmt_upper = rmt_upper_bound(n, n_records)?;
    let values = matrix.values();
    for i in 0..n {
        for j in (i + 1)..n {
            if (values[i * n + j] - values[j * n + i]).abs() > 1e-12 {
                return Err(Error::InvalidMatrix(format!("asymmetric at ({i},{j})")));
            }
        }
    }
    let eig = SymmetricEigen::new(DMatrix::from_row_slice(n, n, values));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let eigenvalues: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let eigenvectors = order
        .iter()
        .map(|&k| {
            let mut v: Vec<f64> = eig.eigenvectors.column(k).iter().copied().collect();
            orient(&mut v, reference);
            v
        })
        .collect();
    let mut summary = SpectralSummary {
        labels: matrix.labels().to_vec(),
        eigenvalues,
        eigenvectors,
        rmt_upper,
        n_above: 0,
        reference_label: reference_label.to_string(),
        n_records,
    };
    summary.n_above = count_above_threshold(&summary);
    Ok(summary)
}

/// Eigenvalues strictly greater than the random-matrix upper edge.
pub fn count_above_threshold(summary: &SpectralSummary) -> usize {
    summary.eigenvalues.iter().filter(|&&l| l > summary.rmt_upper).count()
}

/// Per-month eigenvalue statistics with eigenvector components in a fixed column order.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSeriesRow {
    pub month: Option<Month>,
    pub top_eigenvalues: Vec<f64>,
    pub n_above: usize,
    pub lambda_plus: f64,
    /// First and second eigenvector components, in `EigenSeries::column_labels` order.
    pub v1: Vec<f64>,
    pub v2: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenSeries {
    pub column_labels: Vec<String>,
    pub rows: Vec<EigenSeriesRow>,
}

/// Spectral table for an ordered list of matrices. `ordering` gives the column layout of the
/// eigenvector components and must be a permutation of the labels.
pub fn eigen_series(
    matrices: &[CorrelationMatrix],
    reference_label: &str,
    k: usize,
    ordering: &[String],
) -> Result<EigenSeries> {
    let Some(first) = matrices.first() else {
        return Ok(EigenSeries {
            column_labels: ordering.to_vec(),
            rows: Vec::new(),
        });
    };
    let n = first.n();
    if k > n {
        return Err(Error::InvalidArgument(format!("k={k} exceeds N={n}")));
    }
    let mut sorted_order = ordering.to_vec();
    sorted_order.sort();
    let mut sorted_labels = first.labels().to_vec();
    sorted_labels.sort();
    if sorted_order != sorted_labels {
        return Err(Error::LabelMismatch);
    }
    let columns: Vec<usize> = ordering
        .iter()
        .map(|l| first.index_of(l).expect("checked"))
        .collect();
    let rows = matrices
        .iter()
        .map(|m| {
            if m.labels() != first.labels() {
                return Err(Error::LabelMismatch);
            }
            let s = eigen_decompose(m, reference_label)?;
            let pick = |v: &Vec<f64>| columns.iter().map(|&c| v[c]).collect::<Vec<f64>>();
            Ok(EigenSeriesRow {
                month: m.end_month(),
                top_eigenvalues: s.eigenvalues[..k].to_vec(),
                n_above: s.n_above,
                lambda_plus: s.rmt_upper,
                v1: s.eigenvectors.first().map(pick).unwrap_or_default(),
                v2: s.eigenvectors.get(1).map(pick).unwrap_or_default(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EigenSeries {
        column_labels: ordering.to_vec(),
        rows,
    })
}

fn month_str(m: Option<Month>) -> String {
    m.map_or(String::new(), |m| m.to_string())
}

impl EigenSeries {
    /// `month,rank,eigenvalue`, rank 1 = largest.
    pub fn write_eigenvalues<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["month", "rank", "eigenvalue"])?;
        for row in &self.rows {
            for (r, l) in row.top_eigenvalues.iter().enumerate() {
                w.write_record([month_str(row.month), (r + 1).to_string(), l.to_string()])?;
            }
        }
        w.flush().map_err(|e| Error::io("<output>", e))?;
        Ok(())
    }

    /// `month,label,v1_component,v2_component` in column order.
    pub fn write_eigenvectors<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["month", "label", "v1_component", "v2_component"])?;
        for row in &self.rows {
            for (c, label) in self.column_labels.iter().enumerate() {
                w.write_record([
                    month_str(row.month),
                    label.clone(),
                    row.v1.get(c).map_or(String::new(), f64::to_string),
                    row.v2.get(c).map_or(String::new(), f64::to_string),
                ])?;
            }
        }
        w.flush().map_err(|e| Error::io("<output>", e))?;
        Ok(())
    }

    /// `month,n_above,lambda_plus`.
    pub fn write_thresholds<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["month", "n_above", "lambda_plus"])?;
        for row in &self.rows {
            w.write_record([
                month_str(row.month),
                row.n_above.to_string(),
                row.lambda_plus.to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<output>", e))?;
        Ok(())
    }
}
