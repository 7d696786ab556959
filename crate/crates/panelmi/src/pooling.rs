//! Rubin's-rules combination of per-imputation estimates, plus pooled OLS
//! and the per-variable fraction-of-missing-information estimate used by
//! screening.

use crate::datamodel::PanelDataset;
use crate::error::{Error, Result};
use crate::linmodel::{self, Design};
use crate::mice::ImputationResult;

/// Pooled scalar estimate.
///
/// With estimates Q_i and within variances U_i over m imputations:
/// Q-bar is their mean, U-bar the mean within variance, B the (m-1)
/// between variance, T = U-bar + (1 + 1/m) B the total variance,
/// r = (1 + 1/m) B / U-bar, df = (m-1)(1 + 1/r)^2,
/// lambda = (1 + 1/m) B / T, fmi = (r + 2/(df+3)) / (r+1), and
/// re = 1 / (1 + fmi/m).
#[derive(Debug, Clone, Copy)]
pub struct PooledEstimate {
    pub q_bar: f64,
    pub u_bar: f64,
    pub b: f64,
    pub t: f64,
    pub r: f64,
    /// `f64::INFINITY` in the degenerate B = 0 case.
    pub df: f64,
    pub lambda: f64,
    pub fmi: f64,
    pub re: f64,
    pub m: usize,
}

/// Rubin's rules over (estimate, within-variance) pairs. Requires m >= 2
/// and nonnegative within variances.
pub fn pool(estimates: &[(f64, f64)]) -> Result<PooledEstimate> {
    let m = estimates.len();
    if m < 2 {
        return Err(Error::InvalidConfig(format!(
            "pooling needs m >= 2 estimates, got {m}"
        )));
    }
    for &(_, u) in estimates {
        if u < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "negative within-imputation variance {u}"
            )));
        }
    }
    let mf = m as f64;
    let q_bar = estimates.iter().map(|&(q, _)| q).sum::<f64>() / mf;
    let u_bar = estimates.iter().map(|&(_, u)| u).sum::<f64>() / mf;
    let b = estimates
        .iter()
        .map(|&(q, _)| (q - q_bar) * (q - q_bar))
        .sum::<f64>()
        / (mf - 1.0);

    if b == 0.0 {
        return Ok(PooledEstimate {
            q_bar,
            u_bar,
            b: 0.0,
            t: u_bar,
            r: 0.0,
            df: f64::INFINITY,
            lambda: 0.0,
            fmi: 0.0,
            re: 1.0,
            m,
        });
    }

    let inflation = (1.0 + 1.0 / mf) * b;
    let t = u_bar + inflation;
    let r = inflation / u_bar;
    let df = (mf - 1.0) * (1.0 + 1.0 / r) * (1.0 + 1.0 / r);
    let lambda = inflation / t;
    let fmi = (r + 2.0 / (df + 3.0)) / (r + 1.0);
    let re = 1.0 / (1.0 + fmi / mf);
    Ok(PooledEstimate {
        q_bar,
        u_bar,
        b,
        t,
        r,
        df,
        lambda,
        fmi,
        re,
        m,
    })
}

/// Relative efficiency of m imputations at a given fraction of missing
/// information.
pub fn relative_efficiency(fmi: f64, m: usize) -> f64 {
    1.0 / (1.0 + fmi / m as f64)
}

/// One pooled coefficient from [`pooled_regress`].
#[derive(Debug, Clone)]
pub struct PooledCoefficient {
    /// "intercept" or the regressor code.
    pub name: String,
    pub estimate: PooledEstimate,
}

/// Fit `response ~ regressors` by OLS in each completed dataset and pool
/// every coefficient across the m fits.
pub fn pooled_regress(
    result: &ImputationResult,
    response: &str,
    regressors: &[String],
) -> Result<Vec<PooledCoefficient>> {
    if result.m() < 2 {
        return Err(Error::InvalidConfig(
            "pooled regression needs m >= 2 completed datasets".into(),
        ));
    }
    let q = regressors.len() + 1;
    let mut per_dataset: Vec<(Vec<f64>, Vec<f64>)> = Vec::with_capacity(result.m());
    for (idx, ds) in result.completed.iter().enumerate() {
        let fit = regress_completed(ds, response, regressors).map_err(|e| match e {
            Error::Collinearity => Error::InvalidConfig(format!(
                "collinear regressors in completed dataset {}",
                idx + 1
            )),
            other => other,
        })?;
        per_dataset.push((fit.beta_hat.clone(), fit.squared_standard_errors()));
    }

    let mut out = Vec::with_capacity(q);
    for j in 0..q {
        let estimates: Vec<(f64, f64)> = per_dataset
            .iter()
            .map(|(beta, se2)| (beta[j], se2[j]))
            .collect();
        let name = if j == 0 {
            "intercept".to_string()
        } else {
            regressors[j - 1].clone()
        };
        out.push(PooledCoefficient {
            name,
            estimate: pool(&estimates)?,
        });
    }
    Ok(out)
}

fn regress_completed(
    ds: &PanelDataset,
    response: &str,
    regressors: &[String],
) -> Result<linmodel::RegressionFit> {
    let yv = ds.var_index(response)?;
    let xs: Vec<usize> = regressors
        .iter()
        .map(|c| ds.var_index(c))
        .collect::<Result<Vec<_>>>()?;
    let n = ds.n_rows();
    let mut design = Design::new(n, xs.len() + 1);
    let mut y = vec![0.0; n];
    for row in 0..n {
        let r = design.row_mut(row);
        r[0] = 1.0;
        for (c, &v) in xs.iter().enumerate() {
            r[c + 1] = ds
                .get(row, v)
                .ok_or_else(|| Error::ShapeMismatch(format!("missing cell in completed dataset at row {row}")))?;
        }
        y[row] = ds
            .get(row, yv)
            .ok_or_else(|| Error::ShapeMismatch(format!("missing response at row {row}")))?;
    }
    linmodel::fit_ols(&design, &y)
}

/// Pool the estimand "mean of `var`" across the completed datasets:
/// Q_i is the dataset mean, U_i the sample variance over n. The resulting
/// fmi drives the high-FMI screen.
pub fn per_variable_fmi(result: &ImputationResult, var: &str) -> Result<PooledEstimate> {
    if result.m() < 2 {
        return Err(Error::InvalidConfig(
            "per-variable fmi needs m >= 2 completed datasets".into(),
        ));
    }
    let mut estimates = Vec::with_capacity(result.m());
    for ds in &result.completed {
        let v = ds.var_index(var)?;
        let n = ds.n_rows();
        let mut vals = Vec::with_capacity(n);
        for row in 0..n {
            vals.push(ds.get(row, v).ok_or_else(|| {
                Error::ShapeMismatch(format!("missing cell for '{var}' in completed dataset"))
            })?);
        }
        let nf = n as f64;
        let mean = vals.iter().sum::<f64>() / nf;
        let var_s = if n < 2 {
            0.0
        } else {
            vals.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (nf - 1.0)
        };
        estimates.push((mean, var_s / nf));
    }
    pool(&estimates)
}
