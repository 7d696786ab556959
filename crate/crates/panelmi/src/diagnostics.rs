//! The four-way quality check: descriptive comparison of observed vs
//! completed data, Gaussian kernel densities with overlap coefficients,
//! pairwise-correlation preservation, and a split-chain potential-scale-
//! reduction statistic over imputation traces.

use crate::datamodel::PanelDataset;
use crate::error::{Error, Result};
use crate::mice::ChainTrace;

/// Five-number descriptive block.
#[derive(Debug, Clone, Copy)]
pub struct Stats {
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
    pub min: f64,
    pub max: f64,
}

pub fn stats(values: &[f64]) -> Stats {
    let n = values.len();
    if n == 0 {
        return Stats {
            n: 0,
            mean: f64::NAN,
            sd: f64::NAN,
            min: f64::NAN,
            max: f64::NAN,
        };
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let sd = if n < 2 {
        0.0
    } else {
        (values.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64).sqrt()
    };
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Stats { n, mean, sd, min, max }
}

/// One row of the observed-vs-completed descriptive table.
#[derive(Debug, Clone)]
pub struct DescriptiveRow {
    pub code: String,
    pub observed: Stats,
    pub completed: Stats,
    /// |mean_completed - mean_observed| / sd_observed; 0 when both sides
    /// are degenerate and equal.
    pub std_mean_diff: f64,
    /// sd_completed / sd_observed; 1 when both are zero.
    pub sd_ratio: f64,
}

#[derive(Debug, Clone)]
pub struct DescriptiveComparison {
    pub rows: Vec<DescriptiveRow>,
}

/// Descriptive statistics of every shared variable: masked-true cells on
/// the observed side, all cells on the completed side.
pub fn describe_compare(
    observed: &PanelDataset,
    completed: &PanelDataset,
) -> Result<DescriptiveComparison> {
    check_same_grid(observed, completed)?;
    let mut rows = Vec::new();
    for meta in observed.variables() {
        let obs_vals = observed.observed_values(&meta.code)?;
        let comp_vals = completed.observed_values(&meta.code)?;
        let o = stats(&obs_vals);
        let c = stats(&comp_vals);
        let std_mean_diff = if o.sd > 0.0 {
            (c.mean - o.mean).abs() / o.sd
        } else if (c.mean - o.mean).abs() < f64::EPSILON * o.mean.abs().max(1.0) {
            0.0
        } else {
            f64::INFINITY
        };
        let sd_ratio = if o.sd > 0.0 {
            c.sd / o.sd
        } else if c.sd == 0.0 {
            1.0
        } else {
            f64::INFINITY
        };
        rows.push(DescriptiveRow {
            code: meta.code.clone(),
            observed: o,
            completed: c,
            std_mean_diff,
            sd_ratio,
        });
    }
    Ok(DescriptiveComparison { rows })
}

fn check_same_grid(a: &PanelDataset, b: &PanelDataset) -> Result<()> {
    if a.countries() != b.countries()
        || a.years() != b.years()
        || a.variables().len() != b.variables().len()
        || a.variables()
            .iter()
            .zip(b.variables())
            .any(|(x, y)| x.code != y.code)
    {
        return Err(Error::ShapeMismatch(
            "datasets differ in countries, years, or variables".into(),
        ));
    }
    Ok(())
}

/// A density evaluated on a uniform grid.
#[derive(Debug, Clone)]
pub struct DensityCurve {
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
}

pub const KDE_GRID_POINTS: usize = 512;

/// Silverman's rule of thumb: 0.9 min(sd, IQR/1.34) n^(-1/5). When the
/// interquartile range collapses to zero the spread falls back to the
/// standard deviation alone.
pub fn silverman_bandwidth(values: &[f64]) -> Result<f64> {
    let s = stats(values);
    let iqr = quantile(values, 0.75) - quantile(values, 0.25);
    let spread = if iqr > 0.0 {
        s.sd.min(iqr / 1.34)
    } else {
        s.sd
    };
    if !(spread > 0.0) {
        return Err(Error::InvalidConfig(
            "automatic bandwidth needs at least 2 distinct values".into(),
        ));
    }
    Ok(0.9 * spread * (values.len() as f64).powf(-0.2))
}

/// Linear-interpolation quantile (the common "type 7" definition).
fn quantile(values: &[f64], p: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    if v.is_empty() {
        return f64::NAN;
    }
    let h = p * (v.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    v[lo] + (h - lo as f64) * (v[hi] - v[lo])
}

/// Gaussian kernel density estimate on a uniform grid.
///
/// `bandwidth`: `None` for Silverman's rule. `grid`: `None` for 512 uniform
/// points on [min - 3h, max + 3h].
pub fn kde(
    values: &[f64],
    bandwidth: Option<f64>,
    grid: Option<Vec<f64>>,
) -> Result<DensityCurve> {
    if values.is_empty() {
        return Err(Error::InvalidConfig("kde needs at least one value".into()));
    }
    let h = match bandwidth {
        Some(h) if h > 0.0 => h,
        Some(h) => {
            return Err(Error::InvalidConfig(format!("bandwidth must be > 0, got {h}")));
        }
        None => silverman_bandwidth(values)?,
    };
    let grid = match grid {
        Some(g) => g,
        None => {
            let s = stats(values);
            uniform_grid(s.min - 3.0 * h, s.max + 3.0 * h, KDE_GRID_POINTS)
        }
    };
    let norm = 1.0 / (values.len() as f64 * h * (2.0 * std::f64::consts::PI).sqrt());
    let density = grid
        .iter()
        .map(|&g| {
            values
                .iter()
                .map(|&x| {
                    let z = (g - x) / h;
                    (-0.5 * z * z).exp()
                })
                .sum::<f64>()
                * norm
        })
        .collect();
    Ok(DensityCurve { grid, density })
}

fn uniform_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let step = (hi - lo) / (points - 1) as f64;
    (0..points).map(|i| lo + i as f64 * step).collect()
}

/// Trapezoid integral of a curve on its grid.
pub fn trapezoid(grid: &[f64], values: &[f64]) -> f64 {
    grid.windows(2)
        .zip(values.windows(2))
        .map(|(g, v)| 0.5 * (g[1] - g[0]) * (v[0] + v[1]))
        .sum()
}

/// Overlap coefficient: the integral of the pointwise minimum of two
/// densities. The curves are resampled onto a shared uniform grid spanning
/// both supports first.
pub fn ovl(d1: &DensityCurve, d2: &DensityCurve) -> f64 {
    let lo = d1.grid[0].min(d2.grid[0]);
    let hi = d1.grid[d1.grid.len() - 1].max(d2.grid[d2.grid.len() - 1]);
    let grid = uniform_grid(lo, hi, 2 * KDE_GRID_POINTS);
    let a = resample(d1, &grid);
    let b = resample(d2, &grid);
    let mins: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x.min(*y)).collect();
    trapezoid(&grid, &mins).clamp(0.0, 1.0)
}

/// Linear interpolation of a curve onto a new grid; zero outside support.
fn resample(d: &DensityCurve, grid: &[f64]) -> Vec<f64> {
    grid.iter()
        .map(|&x| {
            if x < d.grid[0] || x > d.grid[d.grid.len() - 1] {
                return 0.0;
            }
            let i = d.grid.partition_point(|&g| g < x);
            if i == 0 {
                return d.density[0];
            }
            let (g0, g1) = (d.grid[i - 1], d.grid[i.min(d.grid.len() - 1)]);
            if g1 == g0 {
                return d.density[i - 1];
            }
            let w = (x - g0) / (g1 - g0);
            d.density[i - 1] * (1.0 - w) + d.density[i.min(d.density.len() - 1)] * w
        })
        .collect()
}

/// Pairwise correlation matrices and their element-wise differences.
#[derive(Debug, Clone)]
pub struct CorrelationComparison {
    pub variables: Vec<String>,
    /// Pairwise-complete Pearson correlations of the observed data;
    /// `None` where fewer than 3 jointly observed rows exist.
    pub observed: Vec<Vec<Option<f64>>>,
    /// All-rows correlations of the completed data.
    pub completed: Vec<Vec<Option<f64>>>,
    /// |completed - observed| where both sides are available.
    pub abs_diff: Vec<Vec<Option<f64>>>,
    /// Sign flips among pairs with |observed rho| > 0.1.
    pub sign_flips: usize,
}

fn pearson(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len();
    if n < 2 {
        return None;
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for i in 0..n {
        let dx = xs[i] - mx;
        let dy = ys[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}

/// Pairwise-complete correlations on the observed side vs all-rows
/// correlations on the completed side, for the listed variables.
/// Observed-side pairs with fewer than 3 jointly observed rows are marked
/// unavailable rather than erroring.
pub fn corr_compare(
    observed: &PanelDataset,
    completed: &PanelDataset,
    variables: &[String],
) -> Result<CorrelationComparison> {
    let p = variables.len();
    let obs_idx: Vec<usize> = variables
        .iter()
        .map(|c| observed.var_index(c))
        .collect::<Result<Vec<_>>>()?;
    let comp_idx: Vec<usize> = variables
        .iter()
        .map(|c| completed.var_index(c))
        .collect::<Result<Vec<_>>>()?;

    let mut obs = vec![vec![None; p]; p];
    let mut comp = vec![vec![None; p]; p];
    for a in 0..p {
        obs[a][a] = Some(1.0);
        comp[a][a] = Some(1.0);
        for b in 0..a {
            // Observed: jointly observed rows only.
            let mut xs = Vec::new();
            let mut ys = Vec::new();
            for row in 0..observed.n_rows() {
                if let (Some(x), Some(y)) = (
                    observed.get(row, obs_idx[a]),
                    observed.get(row, obs_idx[b]),
                ) {
                    xs.push(x);
                    ys.push(y);
                }
            }
            let ro = if xs.len() >= 3 { pearson(&xs, &ys) } else { None };
            obs[a][b] = ro;
            obs[b][a] = ro;

            let mut xs = Vec::new();
            let mut ys = Vec::new();
            for row in 0..completed.n_rows() {
                if let (Some(x), Some(y)) = (
                    completed.get(row, comp_idx[a]),
                    completed.get(row, comp_idx[b]),
                ) {
                    xs.push(x);
                    ys.push(y);
                }
            }
            let rc = pearson(&xs, &ys);
            comp[a][b] = rc;
            comp[b][a] = rc;
        }
    }

    let mut abs_diff = vec![vec![None; p]; p];
    let mut sign_flips = 0;
    for a in 0..p {
        abs_diff[a][a] = Some(0.0);
        for b in 0..a {
            if let (Some(ro), Some(rc)) = (obs[a][b], comp[a][b]) {
                let d = (rc - ro).abs();
                abs_diff[a][b] = Some(d);
                abs_diff[b][a] = Some(d);
                if ro.abs() > 0.1 && ro.signum() != rc.signum() {
                    sign_flips += 1;
                }
            }
        }
    }

    Ok(CorrelationComparison {
        variables: variables.to_vec(),
        observed: obs,
        completed: comp,
        abs_diff,
        sign_flips,
    })
}

/// Split-chain potential-scale-reduction estimates for one variable.
#[derive(Debug, Clone, Copy)]
pub struct ConvergenceStat {
    pub rhat_mean: f64,
    pub rhat_sd: f64,
    pub pass: bool,
}

/// Split-chain R-hat over the trace's mean and sd series for `variable`.
/// The first `discard` fraction of iterations is dropped, remaining
/// iterations are split into half-chains, and
/// R-hat = sqrt(((T'-1)/T' W + B'/T') / W). Identical constant chains give
/// exactly 1.
pub fn convergence_stat(
    traces: &ChainTrace,
    variable: &str,
    discard: f64,
    threshold: f64,
) -> Result<ConvergenceStat> {
    let means = traces.mean_series(variable)?;
    let sds = traces.sd_series(variable)?;
    if traces.m < 2 {
        return Err(Error::InvalidConfig(
            "convergence check needs at least 2 chains".into(),
        ));
    }
    let rhat_mean = split_rhat(&means, discard)?;
    let rhat_sd = split_rhat(&sds, discard)?;
    Ok(ConvergenceStat {
        rhat_mean,
        rhat_sd,
        pass: rhat_mean < threshold && rhat_sd < threshold,
    })
}

/// Split-chain R-hat over raw series `[chain][iteration]`.
pub fn split_rhat(series: &[Vec<f64>], discard: f64) -> Result<f64> {
    let total = series[0].len();
    let start = (total as f64 * discard).floor() as usize;
    let retained = total - start;
    if retained < 4 {
        return Err(Error::InsufficientIterations {
            need: 4,
            have: retained,
        });
    }
    let half = retained / 2;
    // With an odd retained count the middle element is dropped.
    let mut halves: Vec<&[f64]> = Vec::with_capacity(series.len() * 2);
    for chain in series {
        let kept = &chain[start..];
        halves.push(&kept[..half]);
        halves.push(&kept[kept.len() - half..]);
    }

    let t_prime = half as f64;
    let means: Vec<f64> = halves
        .iter()
        .map(|h| h.iter().sum::<f64>() / t_prime)
        .collect();
    let vars: Vec<f64> = halves
        .iter()
        .zip(&means)
        .map(|(h, &m)| h.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (t_prime - 1.0))
        .collect();
    let w = vars.iter().sum::<f64>() / vars.len() as f64;
    let grand = means.iter().sum::<f64>() / means.len() as f64;
    let b_over_t = means
        .iter()
        .map(|m| (m - grand) * (m - grand))
        .sum::<f64>()
        / (means.len() as f64 - 1.0);
    // b_over_t is B'/T' directly (variance of half-chain means). When the
    // within variance is zero and the half-chain means coincide, the chains
    // are identical constants and the statistic is 1 by definition. The
    // bitwise mean comparison matters: grand-mean accumulation can leave
    // b_over_t a rounding hair above zero even for identical chains.
    if w == 0.0 && means.windows(2).all(|p| p[0] == p[1]) {
        return Ok(1.0);
    }
    Ok((((t_prime - 1.0) / t_prime * w + b_over_t) / w).sqrt())
}
