//! JSON test report.

use serde::{Deserialize, Serialize};

use matvar_core::{DenseMatrix, FlipFlopReport, NormalityTest};

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Reject,
    FailToReject,
}

impl Decision {
    pub fn exit_code(self) -> i32 {
        match self {
            Decision::FailToReject => 0,
            Decision::Reject => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetInfo {
    pub source: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub rows: usize,
    pub cols: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlipFlopDiagnostics {
    pub iterations: usize,
    pub converged: bool,
    pub final_loglik: f64,
    /// `None` when only one iteration ran.
    pub loglik_delta: Option<f64>,
    pub normalization_kappa: f64,
}

impl From<&FlipFlopReport> for FlipFlopDiagnostics {
    fn from(r: &FlipFlopReport) -> Self {
        Self {
            iterations: r.iterations,
            converged: r.converged,
            final_loglik: r.final_loglik,
            loglik_delta: r.loglik_delta.is_finite().then_some(r.loglik_delta),
            normalization_kappa: r.normalization_kappa,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub dataset: DatasetInfo,
    pub alpha: f64,
    pub statistic: f64,
    pub threshold: f64,
    pub decision: Decision,
    pub flip_flop: FlipFlopDiagnostics,
    pub elapsed_ms: f64,
}

impl TestReport {
    pub fn new(source: impl Into<String>, rows: usize, cols: usize, test: &NormalityTest, elapsed_ms: f64) -> Self {
        let ks = &test.ks;
        Self {
            dataset: DatasetInfo { source: source.into(), n: ks.n_a, rows, cols },
            alpha: ks.alpha,
            statistic: ks.statistic,
            threshold: ks.threshold,
            decision: if ks.reject { Decision::Reject } else { Decision::FailToReject },
            flip_flop: (&test.flip_flop).into(),
            elapsed_ms,
        }
    }
}

/// Output of `matvar estimate`: the fitted parameters as nested row arrays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub dataset: DatasetInfo,
    pub mean: Vec<Vec<f64>>,
    pub row_scale: Vec<Vec<f64>>,
    pub col_scale: Vec<Vec<f64>>,
    pub flip_flop: FlipFlopDiagnostics,
    pub loglik_trace: Vec<f64>,
}

fn nested(m: &DenseMatrix) -> Vec<Vec<f64>> {
    (0..m.rows()).map(|i| m.row(i).to_vec()).collect()
}

impl EstimateReport {
    pub fn new(dataset: DatasetInfo, r: &FlipFlopReport) -> Self {
        Self {
            dataset,
            mean: nested(r.params.mean()),
            row_scale: nested(r.params.row_scale().matrix()),
            col_scale: nested(r.params.col_scale().matrix()),
            flip_flop: r.into(),
            loglik_trace: r.loglik_trace.clone(),
        }
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// Pretty JSON followed by a newline. Floats are written in shortest
/// round-trip form.
pub fn write_report(report: &TestReport) -> Result<String> {
    to_json(report)
}

pub fn parse_report(text: &str) -> Result<TestReport> {
    Ok(serde_json::from_str(text)?)
}
