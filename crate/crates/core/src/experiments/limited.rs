use super::{run_example, ExperimentReport, ExperimentSpec};
use crate::error::{Error, Result};
use crate::parallel::Execution;
use crate::solvers::Method;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntervalChoice {
    /// Frequency window `(λ_lo, λ_hi)`.
    pub range: [f64; 2],
    /// Replaces every method's penalty weight on this window.
    #[serde(default)]
    pub alpha: Option<f64>,
}

/// One experiment repeated over several frequency windows with the same
/// number of measurements in each.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitedDataStudy {
    pub base: ExperimentSpec,
    pub intervals: Vec<IntervalChoice>,
}

impl LimitedDataStudy {
    pub fn spec_for(&self, choice: &IntervalChoice) -> ExperimentSpec {
        let mut spec = self.base.clone();
        spec.lambda_range = choice.range;
        if let Some(alpha) = choice.alpha {
            for m in spec.methods.iter_mut().filter(|m| m.method != Method::Cgls) {
                m.alpha = Some(alpha);
            }
        }
        spec
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntervalRow {
    pub range: [f64; 2],
    pub method: Method,
    pub alpha: Option<f64>,
    pub mean_relative_error: f64,
    pub variance: f64,
    /// Per-run errors in run order.
    pub errors: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitedDataTable {
    pub rows: Vec<IntervalRow>,
    /// One full report per window, in window order.
    pub reports: Vec<ExperimentReport>,
}

impl LimitedDataTable {
    /// Mean errors of `method`, in window order.
    pub fn means(&self, method: Method) -> Vec<f64> {
        self.rows.iter().filter(|r| r.method == method).map(|r| r.mean_relative_error).collect()
    }
}

/// Run index `i` uses the same noise seed on every window, so the windows
/// are compared on common noise draws.
pub fn run_limited_data_study(study: &LimitedDataStudy, execution: Execution) -> Result<LimitedDataTable> {
    if study.intervals.is_empty() {
        return Err(Error::arg("no frequency windows given"));
    }
    let mut rows = Vec::new();
    let mut reports = Vec::new();
    for choice in &study.intervals {
        let report = run_example(&study.spec_for(choice), execution)?;
        for s in &report.summaries {
            rows.push(IntervalRow {
                range: choice.range,
                method: s.method,
                alpha: s.alpha,
                mean_relative_error: s.mean_relative_error,
                variance: s.variance,
                errors: report.errors(s.method),
            });
        }
        reports.push(report);
    }
    Ok(LimitedDataTable { rows, reports })
}
