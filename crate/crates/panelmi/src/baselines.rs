//! Benchmark machinery: controlled amputation under the three classic
//! missingness mechanisms, the single-imputation comparators (listwise
//! deletion, mean substitution, deterministic regression imputation,
//! available-case correlations), and an evaluation harness scoring any
//! completion against the ground truth it was amputed from.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::datamodel::{PanelDataset, Role};
use crate::diagnostics;
use crate::error::{Error, Result};
use crate::linmodel::{self, Design};

/// How missingness is generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mechanism {
    /// Each cell masked independently with probability `rate`.
    Mcar,
    /// Masking probability increases with a fully observed driver variable.
    Mar,
    /// Masking probability increases with the cell's own value.
    Mnar,
}

impl Mechanism {
    pub fn parse(s: &str) -> Option<Mechanism> {
        match s.trim().to_ascii_lowercase().as_str() {
            "mcar" => Some(Mechanism::Mcar),
            "mar" => Some(Mechanism::Mar),
            "mnar" => Some(Mechanism::Mnar),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Mechanism::Mcar => "mcar",
            Mechanism::Mar => "mar",
            Mechanism::Mnar => "mnar",
        }
    }
}

/// Amputation recipe.
#[derive(Debug, Clone)]
pub struct AmputationPlan {
    pub mechanism: Mechanism,
    /// Target missing fraction, strictly inside (0, 1).
    pub rate: f64,
    /// Driver variable code; required for MAR, ignored otherwise.
    pub driver: Option<String>,
    /// Variable codes to punch holes into.
    pub targets: Vec<String>,
    pub seed: u64,
}

/// Every removed value, addressed by (row, variable index).
#[derive(Debug, Clone)]
pub struct DeletedTruth {
    pub cells: Vec<(usize, usize, f64)>,
}

/// Logistic slope for MAR/MNAR masking probabilities.
pub const AMPUTE_SLOPE: f64 = 2.0;
/// The intercept search stops when the expected missing fraction is
/// within this distance of the requested rate.
pub const RATE_TOLERANCE: f64 = 1e-4;

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Solve logistic(alpha + slope z_i) averaged over `z` = `rate` by
/// bisection. The mean is monotone in alpha so the root is unique.
fn solve_intercept(z: &[f64], rate: f64) -> f64 {
    let mean_p = |alpha: f64| {
        z.iter().map(|&zi| logistic(alpha + AMPUTE_SLOPE * zi)).sum::<f64>() / z.len() as f64
    };
    let mut lo = -50.0;
    let mut hi = 50.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let p = mean_p(mid);
        if (p - rate).abs() < RATE_TOLERANCE {
            return mid;
        }
        if p < rate {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn standardize(values: &[f64]) -> Vec<f64> {
    let s = diagnostics::stats(values);
    if s.sd > 0.0 {
        values.iter().map(|&x| (x - s.mean) / s.sd).collect()
    } else {
        vec![0.0; values.len()]
    }
}

/// Punch holes into a complete dataset according to `plan`.
///
/// Returns the amputed dataset and the exact values removed. Target and
/// driver columns must be fully observed going in; the driver column is
/// never touched.
pub fn ampute(truth: &PanelDataset, plan: &AmputationPlan) -> Result<(PanelDataset, DeletedTruth)> {
    if !(plan.rate > 0.0 && plan.rate < 1.0) {
        return Err(Error::InfeasibleRate(plan.rate));
    }
    if plan.targets.is_empty() {
        return Err(Error::InvalidConfig("amputation needs at least one target".into()));
    }
    let driver_idx = match plan.mechanism {
        Mechanism::Mar => {
            let code = plan.driver.as_deref().ok_or_else(|| {
                Error::InvalidConfig("MAR amputation needs a driver variable".into())
            })?;
            if plan.targets.iter().any(|t| t == code) {
                return Err(Error::InvalidConfig(
                    "the MAR driver cannot also be a target".into(),
                ));
            }
            Some(truth.var_index(code)?)
        }
        _ => None,
    };

    let n = truth.n_rows();
    let target_idx: Vec<usize> = plan
        .targets
        .iter()
        .map(|c| truth.var_index(c))
        .collect::<Result<Vec<_>>>()?;
    for (&v, code) in target_idx.iter().zip(&plan.targets) {
        if truth.missing_count(v) > 0 {
            return Err(Error::InvalidConfig(format!(
                "amputation target '{code}' already has missing cells"
            )));
        }
    }
    let driver_z = match driver_idx {
        Some(v) => {
            if truth.missing_count(v) > 0 {
                return Err(Error::InvalidConfig("MAR driver has missing cells".into()));
            }
            let vals: Vec<f64> = (0..n).map(|row| truth.get(row, v).unwrap()).collect();
            Some(standardize(&vals))
        }
        None => None,
    };

    let mut rng = ChaCha12Rng::seed_from_u64(plan.seed);
    let mut masked = Vec::new();
    let mut deleted = Vec::new();
    for &v in &target_idx {
        let probs: Vec<f64> = match plan.mechanism {
            Mechanism::Mcar => vec![plan.rate; n],
            Mechanism::Mar => {
                let z = driver_z.as_ref().unwrap();
                let alpha = solve_intercept(z, plan.rate);
                z.iter().map(|&zi| logistic(alpha + AMPUTE_SLOPE * zi)).collect()
            }
            Mechanism::Mnar => {
                let own: Vec<f64> = (0..n).map(|row| truth.get(row, v).unwrap()).collect();
                let z = standardize(&own);
                let alpha = solve_intercept(&z, plan.rate);
                z.iter().map(|&zi| logistic(alpha + AMPUTE_SLOPE * zi)).collect()
            }
        };
        for (row, &p) in probs.iter().enumerate() {
            if rng.gen::<f64>() < p {
                deleted.push((row, v, truth.get(row, v).unwrap()));
                masked.push((row, v));
            }
        }
    }
    Ok((truth.with_masked(&masked), DeletedTruth { cells: deleted }))
}

fn target_indices(ds: &PanelDataset) -> Vec<usize> {
    ds.variables()
        .iter()
        .enumerate()
        .filter(|(_, m)| m.role == Role::ImputationTarget)
        .map(|(v, _)| v)
        .collect()
}

/// Keep only rows with zero missing cells across the imputation targets.
/// Dropped rows become fully masked; order is preserved.
pub fn listwise_delete(ds: &PanelDataset) -> PanelDataset {
    let targets = target_indices(ds);
    let keep: Vec<usize> = (0..ds.n_rows())
        .filter(|&row| targets.iter().all(|&v| ds.is_observed(row, v)))
        .collect();
    ds.select_rows(&keep)
}

/// Replace every missing target cell with the observed mean of its variable.
pub fn mean_substitute(ds: &PanelDataset) -> Result<PanelDataset> {
    let mut fills = Vec::new();
    for &v in &target_indices(ds) {
        let meta = &ds.variables()[v];
        let observed = ds.observed_values(&meta.code)?;
        if observed.is_empty() {
            return Err(Error::AllMissing(meta.code.clone()));
        }
        let mean = observed.iter().sum::<f64>() / observed.len() as f64;
        for row in 0..ds.n_rows() {
            if !ds.is_observed(row, v) {
                fills.push((row, v, mean));
            }
        }
    }
    Ok(ds.with_cells(&fills))
}

/// Conditional-mean (regression) imputation: each target's missing cells
/// take OLS fitted values, without noise, so imputations can fall outside
/// the observed range.
///
/// `predictors` maps target codes to their regressor codes. Predictor
/// columns are completed with [`mean_substitute`] first so every row has a
/// usable design; only rows observed in the target enter the fit.
pub fn regression_impute(
    ds: &PanelDataset,
    predictors: &[(String, Vec<String>)],
) -> Result<PanelDataset> {
    let base = mean_substitute(ds)?;
    let mut fills = Vec::new();
    for (target, preds) in predictors {
        let tv = ds.var_index(target)?;
        let pv: Vec<usize> = preds
            .iter()
            .map(|c| ds.var_index(c))
            .collect::<Result<Vec<_>>>()?;
        if pv.contains(&tv) {
            return Err(Error::InvalidConfig(format!(
                "'{target}' cannot predict itself"
            )));
        }
        let missing_rows: Vec<usize> =
            (0..ds.n_rows()).filter(|&r| !ds.is_observed(r, tv)).collect();
        if missing_rows.is_empty() {
            continue;
        }
        let observed_rows: Vec<usize> =
            (0..ds.n_rows()).filter(|&r| ds.is_observed(r, tv)).collect();
        let q = pv.len() + 1;
        let mut design = Design::new(observed_rows.len(), q);
        let mut y = Vec::with_capacity(observed_rows.len());
        for (i, &row) in observed_rows.iter().enumerate() {
            let out = design.row_mut(i);
            out[0] = 1.0;
            for (c, &v) in pv.iter().enumerate() {
                out[c + 1] = base.get(row, v).unwrap();
            }
            y.push(ds.get(row, tv).unwrap());
        }
        let fit = linmodel::fit_ols(&design, &y)?;
        for &row in &missing_rows {
            let mut x = vec![1.0; q];
            for (c, &v) in pv.iter().enumerate() {
                x[c + 1] = base.get(row, v).unwrap();
            }
            let yhat: f64 = x.iter().zip(&fit.beta_hat).map(|(a, b)| a * b).sum();
            fills.push((row, tv, yhat));
        }
    }
    Ok(ds.with_cells(&fills))
}

/// Available-case (pairwise-complete) Pearson correlation matrix over the
/// listed variables. Pairs with fewer than 3 jointly observed rows are
/// unavailable.
pub fn pairwise_corr(
    ds: &PanelDataset,
    variables: &[String],
) -> Result<Vec<Vec<Option<f64>>>> {
    Ok(diagnostics::corr_compare(ds, ds, variables)?.observed)
}

/// Two-sample Kolmogorov-Smirnov distance.
pub fn ks_distance(a: &[f64], b: &[f64]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return f64::NAN;
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let mut i = 0;
    let mut j = 0;
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Per-variable recovery scores for one completion method.
#[derive(Debug, Clone)]
pub struct EvaluationMetrics {
    pub rows: Vec<EvaluationRow>,
}

#[derive(Debug, Clone)]
pub struct EvaluationRow {
    pub code: String,
    /// Completed mean minus true mean, averaged over completions.
    pub mean_bias: f64,
    /// KS distance between the filled-in values and the deleted truth,
    /// averaged over completions. NaN when the variable lost no cells.
    pub ks: f64,
    /// Largest absolute pairwise-correlation difference against the truth,
    /// averaged over completions.
    pub max_corr_distortion: f64,
}

/// Score completed datasets against the truth they were amputed from.
///
/// With several completions (multiple imputation) every metric is computed
/// per dataset and averaged.
pub fn evaluate(
    truth: &PanelDataset,
    deleted: &DeletedTruth,
    completed: &[PanelDataset],
) -> Result<EvaluationMetrics> {
    if completed.is_empty() {
        return Err(Error::InvalidConfig("evaluate needs at least one completed dataset".into()));
    }
    let targets = target_indices(truth);
    let codes: Vec<String> = targets
        .iter()
        .map(|&v| truth.variables()[v].code.clone())
        .collect();
    let truth_corr = pairwise_corr(truth, &codes)?;

    let mut acc: Vec<(f64, f64, f64, usize)> = vec![(0.0, 0.0, 0.0, 0); targets.len()];
    for comp in completed {
        if comp.n_rows() != truth.n_rows() || comp.n_vars() != truth.n_vars() {
            return Err(Error::ShapeMismatch(
                "completed dataset does not match the truth grid".into(),
            ));
        }
        let comp_corr = pairwise_corr(comp, &codes)?;
        for (ti, &v) in targets.iter().enumerate() {
            let true_vals: Vec<f64> = (0..truth.n_rows())
                .map(|r| {
                    truth.get(r, v).ok_or_else(|| {
                        Error::ShapeMismatch(format!("truth has a missing cell in '{}'", codes[ti]))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let comp_vals: Vec<f64> = (0..comp.n_rows())
                .filter_map(|r| comp.get(r, v))
                .collect();
            let tm = true_vals.iter().sum::<f64>() / true_vals.len() as f64;
            let cm = comp_vals.iter().sum::<f64>() / comp_vals.len().max(1) as f64;

            let deleted_here: Vec<f64> = deleted
                .cells
                .iter()
                .filter(|&&(_, dv, _)| dv == v)
                .map(|&(_, _, x)| x)
                .collect();
            let filled: Vec<f64> = deleted
                .cells
                .iter()
                .filter(|&&(_, dv, _)| dv == v)
                .filter_map(|&(row, _, _)| comp.get(row, v))
                .collect();
            let ks = if deleted_here.is_empty() {
                f64::NAN
            } else {
                ks_distance(&filled, &deleted_here)
            };

            let mut distortion: f64 = 0.0;
            for a in 0..codes.len() {
                for b in 0..a {
                    if a == ti || b == ti {
                        if let (Some(rt), Some(rc)) = (truth_corr[a][b], comp_corr[a][b]) {
                            distortion = distortion.max((rc - rt).abs());
                        }
                    }
                }
            }

            let e = &mut acc[ti];
            e.0 += cm - tm;
            if ks.is_finite() {
                e.1 += ks;
                e.3 += 1;
            }
            e.2 += distortion;
        }
    }

    let mf = completed.len() as f64;
    let rows = codes
        .iter()
        .zip(&acc)
        .map(|(code, &(bias, ks_sum, dist, ks_n))| EvaluationRow {
            code: code.clone(),
            mean_bias: bias / mf,
            ks: if ks_n > 0 { ks_sum / ks_n as f64 } else { f64::NAN },
            max_corr_distortion: dist / mf,
        })
        .collect();
    Ok(EvaluationMetrics { rows })
}
