//! Welch's unequal-variance t-test and its use on MST vs PMFG link correlations.

use std::io::Write;

use statrs::function::beta::beta_reg;

use crate::calendar::Month;
use crate::corr::CorrelationMatrix;
use crate::error::{Error, Result};
use crate::filtgraph::{mst, pmfg, FilteredGraph};

#[derive(Debug, Clone, PartialEq)]
pub struct WelchResult {
    pub t_statistic: f64,
    /// Welch–Satterthwaite degrees of freedom.
    pub dof: f64,
    /// Two-sided p-value.
    pub p_value: f64,
    pub n1: usize,
    pub n2: usize,
    pub mean1: f64,
    pub mean2: f64,
    /// Unbiased (`n - 1`) sample variances.
    pub var1: f64,
    pub var2: f64,
}

/// Two-sided tail probability `P(|T| >= |t|)` of Student's t with `dof` degrees of freedom.
pub fn student_t_two_sided(t: f64, dof: f64) -> f64 {
    if t == 0.0 {
        return 1.0;
    }
    beta_reg(dof / 2.0, 0.5, dof / (dof + t * t)).clamp(0.0, 1.0)
}

/// `P(T <= t)` for Student's t.
pub fn student_t_cdf(t: f64, dof: f64) -> f64 {
    let tail = 0.5 * student_t_two_sided(t, dof);
    if t <= 0.0 {
        tail
    } else {
        1.0 - tail
    }
}

fn moments(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

pub fn welch_ttest(sample1: &[f64], sample2: &[f64]) -> Result<WelchResult> {
    let (n1, n2) = (sample1.len(), sample2.len());
    if n1 < 2 || n2 < 2 {
        return Err(Error::SampleTooSmall { n1, n2 });
    }
    let (mean1, var1) = moments(sample1);
    let (mean2, var2) = moments(sample2);
    if var1 == 0.0 && var2 == 0.0 {
        return Err(Error::ZeroVarianceBoth);
    }
    let a = var1 / n1 as f64;
    let b = var2 / n2 as f64;
    let se2 = a + b;
    let t_statistic = (mean1 - mean2) / se2.sqrt();
    let dof = se2 * se2 / (a * a / (n1 as f64 - 1.0) + b * b / (n2 as f64 - 1.0));
    Ok(WelchResult {
        t_statistic,
        dof,
        p_value: student_t_two_sided(t_statistic, dof),
        n1,
        n2,
        mean1,
        mean2,
        var1,
        var2,
    })
}

/// Welch test of MST link correlations (sample 1) against PMFG link correlations (sample 2).
/// With `exclude_shared`, PMFG links that are also MST links are dropped from sample 2.
pub fn welch_on_graphs(tree: &FilteredGraph, planar: &FilteredGraph, exclude_shared: bool) -> Result<WelchResult> {
    let s1: Vec<f64> = tree.edges().iter().map(|e| e.weight).collect();
    let s2: Vec<f64> = planar
        .edges()
        .iter()
        .filter(|e| !(exclude_shared && tree.contains_edge(e.i, e.j)))
        .map(|e| e.weight)
        .collect();
    welch_ttest(&s1, &s2)
}

pub fn mst_vs_pmfg(matrix: &CorrelationMatrix, exclude_shared: bool) -> Result<WelchResult> {
    welch_on_graphs(&mst(matrix)?, &pmfg(matrix)?, exclude_shared)
}

pub fn mst_vs_pmfg_pvalues(matrices: &[CorrelationMatrix], exclude_shared: bool) -> Result<Vec<WelchResult>> {
    matrices
        .iter()
        .map(|m| {
            mst_vs_pmfg(m, exclude_shared).map_err(|e| match m.end_month() {
                Some(month) => e.at_month(month),
                None => e,
            })
        })
        .collect()
}

/// `month,t,dof,p,mean_mst,mean_pmfg`.
pub fn write_ttest_table<W: Write>(writer: W, rows: &[(Month, WelchResult)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["month", "t", "dof", "p", "mean_mst", "mean_pmfg"])?;
    for (month, r) in rows {
        w.write_record([
            month.to_string(),
            r.t_statistic.to_string(),
            r.dof.to_string(),
            r.p_value.to_string(),
            r.mean1.to_string(),
            r.mean2.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<output>", e))?;
    Ok(())
}
