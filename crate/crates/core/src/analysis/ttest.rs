use serde::Serialize;
use thiserror::Error;

use super::special::student_t_two_tailed;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatError {
    #[error("need at least {needed} observations, got {got}")]
    TooFew { needed: usize, got: usize },
    #[error("sample variance is zero")]
    ZeroVariance,
    #[error("non-finite observation {0}")]
    NonFinite(f64),
    #[error("no observations in cell {0}")]
    EmptyCell(String),
    #[error("factor `{0}` needs at least two levels")]
    Levels(String),
    #[error("invalid model: {0}")]
    Model(String),
    #[error("no residual degrees of freedom")]
    NoResidual,
}

/// One test statistic with its degrees of freedom and p-value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatResult {
    /// What was tested, e.g. a model term.
    pub name: String,
    /// `t` or `F`.
    pub statistic: String,
    pub value: f64,
    pub df: Vec<f64>,
    pub p_value: f64,
}

/// Two-tailed one-sample t-test of `values` against `mu`.
pub fn one_sample_ttest(values: &[f64], mu: f64) -> Result<StatResult, StatError> {
    if values.len() < 2 {
        return Err(StatError::TooFew {
            needed: 2,
            got: values.len(),
        });
    }
    if let Some(&v) = values.iter().chain([&mu]).find(|v| !v.is_finite()) {
        return Err(StatError::NonFinite(v));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    if var == 0.0 {
        return Err(StatError::ZeroVariance);
    }
    let t = (mean - mu) / (var.sqrt() / n.sqrt());
    let df = n - 1.0;
    Ok(StatResult {
        name: format!("mean vs {mu}"),
        statistic: "t".into(),
        value: t,
        df: vec![df],
        p_value: student_t_two_tailed(t, df),
    })
}
