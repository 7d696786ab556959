//! Ordinary least squares on the normal equations with a Bayesian posterior
//! draw of coefficients and residual scale. This is the regression engine
//! behind each predictive-mean-matching step.
//!
//! The solver is a Cholesky factorization of X'X. A pivot smaller than
//! `PD_TOLERANCE` times the largest diagonal entry of X'X fails the
//! factorization with [`Error::Collinearity`]; that is the declared
//! positive-definiteness tolerance.

use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Relative Cholesky pivot tolerance for declaring X'X non-positive-definite.
pub const PD_TOLERANCE: f64 = 1e-10;

/// Relative threshold under which a residual sum of squares is snapped to
/// zero, so that exact linear fits trigger the degenerate posterior rule
/// despite floating-point residue.
const RSS_ZERO_SNAP: f64 = 1e-20;

/// A fitted least-squares regression.
#[derive(Debug, Clone)]
pub struct RegressionFit {
    /// Coefficients, length q (intercept column is the caller's business).
    pub beta_hat: Vec<f64>,
    /// Residual variance RSS / (n - q).
    pub sigma2_hat: f64,
    /// Lower-triangular Cholesky factor L of X'X, row-major q x q.
    chol: Vec<f64>,
    pub n_obs: usize,
    pub q: usize,
}

/// One draw from the posterior of (beta, sigma).
#[derive(Debug, Clone)]
pub struct PosteriorDraw {
    pub beta_star: Vec<f64>,
    pub sigma_star: f64,
}

/// Dense row-major matrix helper for design matrices.
#[derive(Debug, Clone)]
pub struct Design {
    pub data: Vec<f64>,
    pub n: usize,
    pub q: usize,
}

impl Design {
    pub fn new(n: usize, q: usize) -> Design {
        Design {
            data: vec![0.0; n * q],
            n,
            q,
        }
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.q..(i + 1) * self.q]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.q..(i + 1) * self.q]
    }

    pub fn from_rows(rows: &[&[f64]]) -> Design {
        let n = rows.len();
        let q = if n == 0 { 0 } else { rows[0].len() };
        let mut d = Design::new(n, q);
        for (i, r) in rows.iter().enumerate() {
            d.row_mut(i).copy_from_slice(r);
        }
        d
    }
}

/// Cholesky factorization of a symmetric matrix given as packed row-major
/// q x q, with a relative pivot tolerance. Returns the lower factor L.
fn cholesky(a: &[f64], q: usize) -> Result<Vec<f64>> {
    let mut max_diag = 0.0f64;
    for j in 0..q {
        max_diag = max_diag.max(a[j * q + j].abs());
    }
    let floor = PD_TOLERANCE * max_diag.max(f64::MIN_POSITIVE);
    let mut l = vec![0.0; q * q];
    for i in 0..q {
        for j in 0..=i {
            let mut s = a[i * q + j];
            for k in 0..j {
                s -= l[i * q + k] * l[j * q + k];
            }
            if i == j {
                if s <= floor {
                    return Err(Error::Collinearity);
                }
                l[i * q + i] = s.sqrt();
            } else {
                l[i * q + j] = s / l[j * q + j];
            }
        }
    }
    Ok(l)
}

/// Solve L y = b (forward), then L' x = y (backward).
fn chol_solve(l: &[f64], q: usize, b: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; q];
    for i in 0..q {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i * q + k] * y[k];
        }
        y[i] = s / l[i * q + i];
    }
    let mut x = vec![0.0; q];
    for i in (0..q).rev() {
        let mut s = y[i];
        for k in (i + 1)..q {
            s -= l[k * q + i] * x[k];
        }
        x[i] = s / l[i * q + i];
    }
    x
}

/// Solve L' w = z (backward substitution only). Since X'X = L L',
/// (X'X)^-1 = L^-T L^-1, so w = L^-T z has covariance (X'X)^-1 when z is
/// standard normal.
fn chol_transpose_solve(l: &[f64], q: usize, z: &[f64]) -> Vec<f64> {
    let mut w = vec![0.0; q];
    for i in (0..q).rev() {
        let mut s = z[i];
        for k in (i + 1)..q {
            s -= l[k * q + i] * w[k];
        }
        w[i] = s / l[i * q + i];
    }
    w
}

fn fit_normal_equations(design: &Design, y: &[f64], ridge: Option<f64>) -> Result<RegressionFit> {
    let (n, q) = (design.n, design.q);
    // X'X (symmetric, fill both halves) and X'y in one pass.
    let mut xtx = vec![0.0; q * q];
    let mut xty = vec![0.0; q];
    for i in 0..n {
        let row = design.row(i);
        for a in 0..q {
            let ra = row[a];
            if ra == 0.0 {
                continue;
            }
            xty[a] += ra * y[i];
            let base = a * q;
            for b in a..q {
                xtx[base + b] += ra * row[b];
            }
        }
    }
    for a in 0..q {
        for b in 0..a {
            xtx[a * q + b] = xtx[b * q + a];
        }
    }
    if let Some(lambda) = ridge {
        for a in 0..q {
            xtx[a * q + a] += lambda;
        }
    }

    let chol = cholesky(&xtx, q)?;
    let beta_hat = chol_solve(&chol, q, &xty);

    let mut rss = 0.0;
    let mut yty = 0.0;
    for i in 0..n {
        let row = design.row(i);
        let pred: f64 = row.iter().zip(&beta_hat).map(|(x, b)| x * b).sum();
        let r = y[i] - pred;
        rss += r * r;
        yty += y[i] * y[i];
    }
    if rss < RSS_ZERO_SNAP * yty.max(1.0) {
        rss = 0.0;
    }
    let sigma2_hat = rss / (n - q) as f64;

    Ok(RegressionFit {
        beta_hat,
        sigma2_hat,
        chol,
        n_obs: n,
        q,
    })
}

/// Least-squares fit of `y` on `design` (caller supplies the intercept
/// column). Fails with [`Error::InsufficientData`] when n <= q and
/// [`Error::Collinearity`] when X'X is not positive definite within
/// tolerance.
pub fn fit_ols(design: &Design, y: &[f64]) -> Result<RegressionFit> {
    if design.n != y.len() {
        return Err(Error::DimensionMismatch(format!(
            "design has {} rows, response has {}",
            design.n,
            y.len()
        )));
    }
    if design.q < 1 || design.n <= design.q {
        return Err(Error::InsufficientData {
            n_obs: design.n,
            q: design.q,
        });
    }
    fit_normal_equations(design, y, None)
}

/// As [`fit_ols`], but on a collinearity failure retries once with a ridge
/// term lambda = 1e-6 * trace(X'X) / q added to the diagonal.
pub fn fit_ols_ridge_rescue(design: &Design, y: &[f64]) -> Result<RegressionFit> {
    match fit_ols(design, y) {
        Err(Error::Collinearity) => {
            let q = design.q;
            let mut trace = 0.0;
            for i in 0..design.n {
                for x in design.row(i) {
                    trace += x * x;
                }
            }
            let lambda = 1e-6 * trace / q as f64;
            fit_normal_equations(design, y, Some(lambda))
        }
        other => other,
    }
}

impl RegressionFit {
    /// Diagonal of (X'X)^-1, used for coefficient standard errors.
    pub fn xtx_inverse_diag(&self) -> Vec<f64> {
        let q = self.q;
        let mut diag = vec![0.0; q];
        for j in 0..q {
            let mut e = vec![0.0; q];
            e[j] = 1.0;
            let x = chol_solve(&self.chol, q, &e);
            diag[j] = x[j];
        }
        diag
    }

    /// Squared standard errors sigma2_hat * diag((X'X)^-1).
    pub fn squared_standard_errors(&self) -> Vec<f64> {
        self.xtx_inverse_diag()
            .iter()
            .map(|d| self.sigma2_hat * d)
            .collect()
    }
}

/// Draw (beta*, sigma*) from the standard noninformative-prior posterior:
/// sigma*^2 = sigma2_hat * (n-q) / g with g ~ chi-squared(n-q), and
/// beta* = beta_hat + sigma* * L^-T z with z standard normal.
///
/// When sigma2_hat is exactly zero the draw degenerates to
/// (beta_hat, 0).
pub fn draw_posterior<R: Rng>(fit: &RegressionFit, rng: &mut R) -> PosteriorDraw {
    if fit.sigma2_hat == 0.0 {
        return PosteriorDraw {
            beta_star: fit.beta_hat.clone(),
            sigma_star: 0.0,
        };
    }
    let dof = (fit.n_obs - fit.q) as f64;
    let g: f64 = ChiSquared::new(dof).expect("dof > 0").sample(rng);
    let sigma_star = (fit.sigma2_hat * dof / g).sqrt();
    let z: Vec<f64> = (0..fit.q).map(|_| rng.sample(StandardNormal)).collect();
    let w = chol_transpose_solve(&fit.chol, fit.q, &z);
    let beta_star = fit
        .beta_hat
        .iter()
        .zip(&w)
        .map(|(b, wi)| b + sigma_star * wi)
        .collect();
    PosteriorDraw {
        beta_star,
        sigma_star,
    }
}

/// Exact matrix-vector product: one prediction per design row.
pub fn predict(beta: &[f64], design: &Design) -> Result<Vec<f64>> {
    if beta.len() != design.q {
        return Err(Error::DimensionMismatch(format!(
            "beta has {} entries, design has {} columns",
            beta.len(),
            design.q
        )));
    }
    Ok((0..design.n)
        .map(|i| design.row(i).iter().zip(beta).map(|(x, b)| x * b).sum())
        .collect())
}
