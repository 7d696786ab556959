//! Single-variable predictive mean matching: fit a regression on the rows
//! where the target is observed, perturb the coefficients with a posterior
//! draw, and fill each missing cell with the observed value of a donor
//! whose predicted value is close to the recipient's.
//!
//! Every imputed value is, bit for bit, a member of the target's observed
//! value set; PMM never extrapolates.

use rand::Rng;

use crate::error::{Error, Result};
use crate::linmodel::{self, Design};

/// Which coefficient set produces the predicted values used for matching.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatchType {
    /// Donors and recipients both predicted with the drawn coefficients a*.
    BothStar,
    /// Donors predicted with the least-squares coefficients, recipients with
    /// the drawn coefficients. Common software default; offered for
    /// comparison.
    ObservedHatMissingStar,
}

#[derive(Debug, Clone)]
pub struct PmmSettings {
    /// Donor-pool size, >= 1. Capped at the number of observed rows.
    pub k: usize,
    pub match_type: MatchType,
}

impl Default for PmmSettings {
    fn default() -> Self {
        PmmSettings {
            k: 5,
            match_type: MatchType::BothStar,
        }
    }
}

/// Outcome of one variable step.
#[derive(Debug, Clone)]
pub struct PmmOutcome {
    /// (row, imputed value) for every originally-missing row, in stable row
    /// order. Empty when the target has no missing cells.
    pub imputed: Vec<(usize, f64)>,
    /// Mean of the target column after filling.
    pub column_mean: f64,
    /// Standard deviation (n-1) of the target column after filling.
    pub column_sd: f64,
}

/// Impute the missing cells of one target column.
///
/// `design` covers all rows (intercept included by the caller), `target` is
/// the current working column, and `observed` is the target's original
/// observation mask. Missing rows are processed in stable row order so the
/// rng stream is reproducible.
pub fn impute_variable_pmm<R: Rng>(
    design: &Design,
    target: &[f64],
    observed: &[bool],
    settings: &PmmSettings,
    ridge_rescue: bool,
    rng: &mut R,
) -> Result<PmmOutcome> {
    if settings.k < 1 {
        return Err(Error::InvalidConfig("pmm donor count k must be >= 1".into()));
    }
    if design.n != target.len() || design.n != observed.len() {
        return Err(Error::DimensionMismatch(format!(
            "design rows {} vs target {} vs mask {}",
            design.n,
            target.len(),
            observed.len()
        )));
    }

    let donor_rows: Vec<usize> = (0..design.n).filter(|&i| observed[i]).collect();
    let recipient_rows: Vec<usize> = (0..design.n).filter(|&i| !observed[i]).collect();

    let mut filled = target.to_vec();
    if recipient_rows.is_empty() {
        let (mean, sd) = mean_sd(&filled);
        return Ok(PmmOutcome {
            imputed: Vec::new(),
            column_mean: mean,
            column_sd: sd,
        });
    }

    let obs_design = Design::from_rows(
        &donor_rows.iter().map(|&i| design.row(i)).collect::<Vec<_>>(),
    );
    let y_obs: Vec<f64> = donor_rows.iter().map(|&i| target[i]).collect();
    let fit = if ridge_rescue {
        linmodel::fit_ols_ridge_rescue(&obs_design, &y_obs)?
    } else {
        linmodel::fit_ols(&obs_design, &y_obs)?
    };
    let draw = linmodel::draw_posterior(&fit, rng);

    let pred_star = linmodel::predict(&draw.beta_star, design)?;
    let donor_preds: Vec<f64> = match settings.match_type {
        MatchType::BothStar => donor_rows.iter().map(|&i| pred_star[i]).collect(),
        MatchType::ObservedHatMissingStar => {
            let pred_hat = linmodel::predict(&fit.beta_hat, design)?;
            donor_rows.iter().map(|&i| pred_hat[i]).collect()
        }
    };

    // Donors sorted by predicted value (row index as tie key) so each
    // recipient's k nearest come from a two-sided window scan.
    let mut order: Vec<usize> = (0..donor_rows.len()).collect();
    order.sort_by(|&a, &b| {
        donor_preds[a]
            .total_cmp(&donor_preds[b])
            .then(donor_rows[a].cmp(&donor_rows[b]))
    });
    let sorted_preds: Vec<f64> = order.iter().map(|&i| donor_preds[i]).collect();
    let sorted_values: Vec<f64> = order.iter().map(|&i| y_obs[i]).collect();

    let k = settings.k.min(donor_rows.len());
    let mut imputed = Vec::with_capacity(recipient_rows.len());
    for &r in &recipient_rows {
        let pool = donor_pool(&sorted_preds, pred_star[r], k);
        let pick = pool.0 + rng.gen_range(0..pool.1 - pool.0);
        let value = sorted_values[pick];
        filled[r] = value;
        imputed.push((r, value));
    }

    let (mean, sd) = mean_sd(&filled);
    Ok(PmmOutcome {
        imputed,
        column_mean: mean,
        column_sd: sd,
    })
}

/// Half-open index range `[lo, hi)` into the sorted donor array holding the
/// k nearest donors by |pred - target|, extended to include every donor at
/// exactly the k-th distance.
fn donor_pool(sorted_preds: &[f64], target_pred: f64, k: usize) -> (usize, usize) {
    let n = sorted_preds.len();
    let split = sorted_preds.partition_point(|&p| p < target_pred);
    let (mut lo, mut hi) = (split, split);
    for _ in 0..k {
        let left = if lo > 0 {
            Some((target_pred - sorted_preds[lo - 1]).abs())
        } else {
            None
        };
        let right = if hi < n {
            Some((sorted_preds[hi] - target_pred).abs())
        } else {
            None
        };
        match (left, right) {
            (Some(dl), Some(dr)) if dl <= dr => lo -= 1,
            (Some(_), Some(_)) => hi += 1,
            (Some(_), None) => lo -= 1,
            (None, Some(_)) => hi += 1,
            (None, None) => break,
        }
    }
    // Boundary ties: admit all donors at exactly the k-th distance.
    let mut d_max = 0.0f64;
    for i in lo..hi {
        d_max = d_max.max((sorted_preds[i] - target_pred).abs());
    }
    while lo > 0 && (target_pred - sorted_preds[lo - 1]).abs() == d_max {
        lo -= 1;
    }
    while hi < n && (sorted_preds[hi] - target_pred).abs() == d_max {
        hi += 1;
    }
    (lo, hi)
}

fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
    (mean, (ss / (n - 1) as f64).sqrt())
}
