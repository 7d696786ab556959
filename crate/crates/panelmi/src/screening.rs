//! Variable screening and the end-to-end pipeline: a trial imputation
//! weeds out variables that break the chained equations, carry too much
//! missing information, or drift away from their observed distribution;
//! the survivors get the production imputation and the full quality report.

use std::time::Instant;

use crate::datamodel::{PanelDataset, Role};
use crate::diagnostics::{
    self, ConvergenceStat, CorrelationComparison, DescriptiveComparison,
};
use crate::error::{Error, Result};
use crate::mice::{run_mice, ImputationResult, MiceConfig};
use crate::pooling;

/// Screening outcome for one variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerdictStatus {
    Accepted,
    /// The variable's imputation step failed (collinear or underdetermined
    /// regression, or no observed values at all) in at least one chain.
    RejectedImputationFailure,
    /// Pooled fraction of missing information above the threshold.
    RejectedHighFmi,
    /// Completed-data descriptives drifted too far from the observed ones.
    RejectedDescriptiveDivergence,
}

impl VerdictStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            VerdictStatus::Accepted => "accepted",
            VerdictStatus::RejectedImputationFailure => "rejected_imputation_failure",
            VerdictStatus::RejectedHighFmi => "rejected_high_fmi",
            VerdictStatus::RejectedDescriptiveDivergence => "rejected_descriptive_divergence",
        }
    }
}

#[derive(Debug, Clone)]
pub struct VariableVerdict {
    pub code: String,
    pub status: VerdictStatus,
    /// Pooled fraction of missing information, when the trial reached it.
    pub fmi: Option<f64>,
    pub mean_diff: Option<f64>,
    pub sd_ratio: Option<f64>,
    /// Human-readable cause detail for rejections.
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct ScreeningVerdict {
    /// One verdict per imputation target, in schema order.
    pub verdicts: Vec<VariableVerdict>,
}

impl ScreeningVerdict {
    /// Codes of accepted targets, in schema order.
    pub fn accepted(&self) -> Vec<String> {
        self.verdicts
            .iter()
            .filter(|v| v.status == VerdictStatus::Accepted)
            .map(|v| v.code.clone())
            .collect()
    }

    pub fn count(&self, status: VerdictStatus) -> usize {
        self.verdicts.iter().filter(|v| v.status == status).count()
    }
}

/// Rejection thresholds.
#[derive(Debug, Clone, Copy)]
pub struct ScreeningThresholds {
    /// Reject above this pooled fraction of missing information.
    pub fmi: f64,
    /// Reject above this standardized mean difference.
    pub mean_diff: f64,
    /// Reject when the completed/observed sd ratio leaves this interval.
    pub sd_ratio_low: f64,
    pub sd_ratio_high: f64,
}

impl Default for ScreeningThresholds {
    fn default() -> Self {
        ScreeningThresholds {
            fmi: 0.60,
            mean_diff: 0.25,
            sd_ratio_low: 2.0 / 3.0,
            sd_ratio_high: 1.5,
        }
    }
}

/// Completed dataset used for descriptive and correlation comparisons:
/// the middle imputation, index ceil(m/2) counting from 1.
pub fn comparison_index(m: usize) -> usize {
    m.div_ceil(2)
}

fn step_failure(err: &Error) -> Option<(String, String)> {
    match err {
        Error::UnimputableVariable { code, cause } => Some((code.clone(), cause.to_string())),
        Error::AllMissing(code) => Some((code.clone(), err.to_string())),
        _ => None,
    }
}

/// Run the trial imputation and classify every imputation target.
///
/// Variables whose step raises an imputation failure are dropped and the
/// trial restarts without them, repeating until a full run succeeds. The
/// surviving variables are then screened for high fraction of missing
/// information and for descriptive divergence, in that priority order.
/// Remaining variables are not re-imputed within this call.
pub fn screen_variables(
    ds: &PanelDataset,
    trial: &MiceConfig,
    thresholds: &ScreeningThresholds,
) -> Result<ScreeningVerdict> {
    if trial.m < 2 {
        return Err(Error::InvalidConfig("screening needs a trial m >= 2".into()));
    }
    let target_codes: Vec<String> = ds
        .variables()
        .iter()
        .filter(|m| m.role == Role::ImputationTarget)
        .map(|m| m.code.clone())
        .collect();

    // Restart loop: drop step-failing variables one at a time until the
    // trial completes.
    let mut failures: Vec<(String, String)> = Vec::new();
    let mut current = ds.clone();
    let result = loop {
        match run_mice(&current, trial) {
            Ok(result) => break result,
            Err(err) => match step_failure(&err) {
                Some((code, detail)) => {
                    failures.push((code.clone(), detail));
                    let keep: Vec<String> = current
                        .variables()
                        .iter()
                        .map(|m| m.code.clone())
                        .filter(|c| *c != code)
                        .collect();
                    current = current.select_variables(&keep)?;
                }
                None => return Err(err),
            },
        }
    };

    let cmp_ds = &result.completed[comparison_index(result.m()) - 1];
    let descriptive = diagnostics::describe_compare(&current, cmp_ds)?;

    let mut verdicts = Vec::with_capacity(target_codes.len());
    for code in &target_codes {
        if let Some((_, detail)) = failures.iter().find(|(c, _)| c == code) {
            verdicts.push(VariableVerdict {
                code: code.clone(),
                status: VerdictStatus::RejectedImputationFailure,
                fmi: None,
                mean_diff: None,
                sd_ratio: None,
                detail: detail.clone(),
            });
            continue;
        }
        let fmi = pooling::per_variable_fmi(&result, code)?.fmi;
        let row = descriptive
            .rows
            .iter()
            .find(|r| &r.code == code)
            .expect("descriptive table covers every surviving variable");
        let (status, detail) = if fmi > thresholds.fmi {
            (
                VerdictStatus::RejectedHighFmi,
                format!("fmi {fmi:.4} above {:.2}", thresholds.fmi),
            )
        } else if row.std_mean_diff > thresholds.mean_diff
            || row.sd_ratio < thresholds.sd_ratio_low
            || row.sd_ratio > thresholds.sd_ratio_high
        {
            (
                VerdictStatus::RejectedDescriptiveDivergence,
                format!(
                    "mean diff {:.4}, sd ratio {:.4}",
                    row.std_mean_diff, row.sd_ratio
                ),
            )
        } else {
            (VerdictStatus::Accepted, String::new())
        };
        verdicts.push(VariableVerdict {
            code: code.clone(),
            status,
            fmi: Some(fmi),
            mean_diff: Some(row.std_mean_diff),
            sd_ratio: Some(row.sd_ratio),
            detail,
        });
    }
    Ok(ScreeningVerdict { verdicts })
}

/// Kernel-density overlap of one variable's observed values against the
/// comparison dataset.
#[derive(Debug, Clone)]
pub struct OvlRow {
    pub code: String,
    /// Observed vs all completed values; `None` when a density is
    /// undefined (fewer than 2 distinct values on either side).
    pub completed: Option<f64>,
    /// Observed vs imputed-only values.
    pub imputed_only: Option<f64>,
}

/// Diagnostics knobs for [`pipeline_run`].
#[derive(Debug, Clone, Copy)]
pub struct DiagnosticsOptions {
    /// 1-based completed-dataset index used for descriptive and
    /// correlation comparisons; `None` picks the middle imputation.
    pub comparison_index: Option<usize>,
    pub rhat_threshold: f64,
    /// Fraction of leading iterations discarded before the convergence
    /// check.
    pub discard: f64,
}

impl Default for DiagnosticsOptions {
    fn default() -> Self {
        DiagnosticsOptions {
            comparison_index: None,
            rhat_threshold: 1.2,
            discard: 0.5,
        }
    }
}

/// Everything the pipeline produced.
#[derive(Debug, Clone)]
pub struct PipelineReport {
    pub verdicts: ScreeningVerdict,
    /// Input dataset restricted to accepted targets (plus auxiliaries and
    /// identifiers).
    pub accepted: PanelDataset,
    pub production: ImputationResult,
    pub descriptive: DescriptiveComparison,
    pub correlation: CorrelationComparison,
    /// Per traced variable; variables without missing cells have nothing
    /// to converge and are absent.
    pub convergence: Vec<(String, ConvergenceStat)>,
    pub ovl: Vec<OvlRow>,
    /// 1-based index of the completed dataset used in the comparisons.
    pub comparison_index: usize,
    pub trial_seconds: f64,
    pub production_seconds: f64,
}

/// Screen with the trial config, impute the accepted variables with the
/// production config, and assemble the quality report.
pub fn pipeline_run(
    ds: &PanelDataset,
    trial: &MiceConfig,
    production: &MiceConfig,
    thresholds: &ScreeningThresholds,
    options: &DiagnosticsOptions,
) -> Result<PipelineReport> {
    if production.m < 2 {
        return Err(Error::InvalidConfig("production m must be >= 2".into()));
    }
    let t0 = Instant::now();
    let verdicts = screen_variables(ds, trial, thresholds)?;
    let trial_seconds = t0.elapsed().as_secs_f64();

    let accepted_targets = verdicts.accepted();
    let keep: Vec<String> = ds
        .variables()
        .iter()
        .filter(|m| m.role != Role::ImputationTarget || accepted_targets.contains(&m.code))
        .map(|m| m.code.clone())
        .collect();
    let accepted = ds.select_variables(&keep)?;

    let t1 = Instant::now();
    let result = run_mice(&accepted, production)?;
    let production_seconds = t1.elapsed().as_secs_f64();

    let cmp_idx = options
        .comparison_index
        .unwrap_or_else(|| comparison_index(result.m()));
    if cmp_idx < 1 || cmp_idx > result.m() {
        return Err(Error::InvalidConfig(format!(
            "comparison index {cmp_idx} outside 1..={}",
            result.m()
        )));
    }
    let cmp_ds = &result.completed[cmp_idx - 1];

    let descriptive = diagnostics::describe_compare(&accepted, cmp_ds)?;
    let correlation = diagnostics::corr_compare(&accepted, cmp_ds, &accepted_targets)?;

    let mut convergence = Vec::new();
    for code in &result.traces.variables {
        let stat = diagnostics::convergence_stat(
            &result.traces,
            code,
            options.discard,
            options.rhat_threshold,
        )?;
        convergence.push((code.clone(), stat));
    }

    let mut ovl = Vec::new();
    for code in &accepted_targets {
        let v = accepted.var_index(code)?;
        let observed = accepted.observed_values(code)?;
        let completed_vals: Vec<f64> =
            (0..cmp_ds.n_rows()).filter_map(|r| cmp_ds.get(r, v)).collect();
        let imputed_vals: Vec<f64> = result
            .imputed_cells
            .iter()
            .filter(|&&(_, iv)| iv == v)
            .filter_map(|&(row, _)| cmp_ds.get(row, v))
            .collect();
        let obs_kde = diagnostics::kde(&observed, None, None).ok();
        let completed = obs_kde.as_ref().and_then(|o| {
            diagnostics::kde(&completed_vals, None, None)
                .ok()
                .map(|c| diagnostics::ovl(o, &c))
        });
        let imputed_only = obs_kde.as_ref().and_then(|o| {
            diagnostics::kde(&imputed_vals, None, None)
                .ok()
                .map(|c| diagnostics::ovl(o, &c))
        });
        ovl.push(OvlRow {
            code: code.clone(),
            completed,
            imputed_only,
        });
    }

    Ok(PipelineReport {
        verdicts,
        accepted,
        production: result,
        descriptive,
        correlation,
        convergence,
        ovl,
        comparison_index: cmp_idx,
        trial_seconds,
        production_seconds,
    })
}
