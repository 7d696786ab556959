//! Batch front end: each `cmd_*` function backs one subcommand of the
//! `panelmi` binary, reading CSV/schema inputs and writing report files
//! plus a `manifest.txt` of name and content hash under the output
//! directory. Everything is deterministic given the configured seed.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::baselines::{self, AmputationPlan, DeletedTruth};
use crate::datamodel::{PanelDataset, Role};
use crate::diagnostics;
use crate::error::{Error, Result};
use crate::indices::{self, CapacityIndexTable, IndexRow};
use crate::ingest::{self, Decimals, SchemaFile};
use crate::mice::{run_mice, ChainTrace, ImputationResult, MiceConfig};
use crate::pooling;
use crate::screening::{self, DiagnosticsOptions, ScreeningThresholds};

/// Flat `key = value` config file, the same grammar as the schema file.
/// Unknown keys are errors; command-line flags override these values.
pub fn parse_config(text: &str) -> Result<HashMap<String, String>> {
    const KNOWN: &[&str] = &[
        "input",
        "schema",
        "out",
        "seed",
        "trial_m",
        "trial_iterations",
        "production_m",
        "production_iterations",
        "donors",
        "visit_order",
        "ridge_rescue",
        "year_predictor",
        "country_indicators",
        "fmi_threshold",
        "mean_diff_threshold",
        "sd_ratio_low",
        "sd_ratio_high",
        "comparison_index",
        "rhat_threshold",
        "discard",
        "year",
        "workers",
        "decimals",
    ];
    let mut out = HashMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Schema {
            line: i + 1,
            message: "expected 'key = value'".into(),
        })?;
        let key = key.trim();
        if !KNOWN.contains(&key) {
            return Err(Error::Schema {
                line: i + 1,
                message: format!("unknown config key '{key}'"),
            });
        }
        out.insert(key.to_string(), value.trim().to_string());
    }
    Ok(out)
}

/// Run `f` on a dedicated thread pool capping chain parallelism. Results
/// do not depend on the worker count.
pub fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    match workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .expect("worker pool")
            .install(f),
        None => f(),
    }
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)
        .map_err(|e| Error::io(format!("creating output directory {}", dir.display()), e))
}

fn fmt(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else {
        format!("{x}")
    }
}

fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush().map_err(|e| Error::io("flushing csv", e))?;
    Ok(())
}

/// Write `manifest.txt`: one `name<TAB>sha256` line per file, sorted by
/// name, preceded by a status line.
pub fn write_manifest(out_dir: &Path, files: &[PathBuf], complete: bool) -> Result<PathBuf> {
    let mut entries: Vec<(String, String)> = Vec::new();
    for f in files {
        let bytes =
            std::fs::read(f).map_err(|e| Error::io(format!("hashing {}", f.display()), e))?;
        let name = f
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        entries.push((name, format!("{:x}", Sha256::digest(&bytes))));
    }
    entries.sort();
    let mut text = format!("status\t{}\n", if complete { "complete" } else { "failed" });
    for (name, hash) in entries {
        text.push_str(&format!("{name}\t{hash}\n"));
    }
    let path = out_dir.join("manifest.txt");
    std::fs::write(&path, text).map_err(|e| Error::io("writing manifest", e))?;
    Ok(path)
}

fn load(input: &Path, schema_path: &Path) -> Result<(SchemaFile, PanelDataset)> {
    let schema = ingest::read_schema(schema_path)?;
    let ds = ingest::read_wide_csv(input, &schema)?;
    Ok((schema, ds))
}

/// Per-variable missingness report (`missing_profile.csv`).
pub fn cmd_profile(input: &Path, schema_path: &Path, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let (_, ds) = load(input, schema_path)?;
    ensure_dir(out_dir)?;
    let profile = ds.missing_profile();
    let rows: Vec<Vec<String>> = profile
        .rows
        .iter()
        .map(|r| {
            vec![
                r.code.clone(),
                r.observed.to_string(),
                r.missing.to_string(),
                format!("{:.2}", r.fraction * 100.0),
            ]
        })
        .collect();
    let path = out_dir.join("missing_profile.csv");
    write_csv(&path, &["variable", "observed", "missing", "missing_pct"], &rows)?;
    let manifest = write_manifest(out_dir, &[path.clone()], true)?;
    Ok(vec![path, manifest])
}

fn write_trace_csv(traces: &ChainTrace, path: &Path) -> Result<()> {
    let rows: Vec<Vec<String>> = traces
        .points
        .iter()
        .map(|p| {
            vec![
                p.chain.to_string(),
                p.iteration.to_string(),
                traces.variables[p.variable].clone(),
                fmt(p.mean),
                fmt(p.sd),
            ]
        })
        .collect();
    write_csv(path, &["chain", "iteration", "variable", "mean", "sd"], &rows)
}

fn write_imputation_outputs(
    ds: &PanelDataset,
    result: &ImputationResult,
    out_dir: &Path,
    decimals: Decimals,
) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    let width = result.m().to_string().len().max(3);
    for (i, completed) in result.completed.iter().enumerate() {
        let path = out_dir.join(format!("imp_{:0width$}.csv", i + 1, width = width));
        ingest::write_wide_csv(completed, &path, decimals)?;
        files.push(path);
    }

    let rows: Vec<Vec<String>> = result
        .imputed_cells
        .iter()
        .map(|&(row, v)| {
            vec![
                ds.country_of_row(row).to_string(),
                ds.year_of_row(row).to_string(),
                ds.variables()[v].code.clone(),
                "imputed".to_string(),
            ]
        })
        .collect();
    let prov = out_dir.join("provenance.csv");
    write_csv(&prov, &["country", "year", "variable", "status"], &rows)?;
    files.push(prov);

    let trace = out_dir.join("trace.csv");
    write_trace_csv(&result.traces, &trace)?;
    files.push(trace);
    Ok(files)
}

/// Production imputation: `imp_*.csv` per completed dataset, plus
/// `provenance.csv` and `trace.csv`.
pub fn cmd_impute(
    input: &Path,
    schema_path: &Path,
    out_dir: &Path,
    config: &MiceConfig,
    workers: Option<usize>,
    decimals: Decimals,
) -> Result<Vec<PathBuf>> {
    let (_, ds) = load(input, schema_path)?;
    ensure_dir(out_dir)?;
    let result = with_workers(workers, || run_mice(&ds, config))?;
    let mut files = write_imputation_outputs(&ds, &result, out_dir, decimals)?;
    let manifest = write_manifest(out_dir, &files, true)?;
    files.push(manifest);
    Ok(files)
}

/// Screening, production imputation, and the full diagnostics file set.
#[allow(clippy::too_many_arguments)]
pub fn cmd_pipeline(
    input: &Path,
    schema_path: &Path,
    out_dir: &Path,
    trial: &MiceConfig,
    production: &MiceConfig,
    thresholds: &ScreeningThresholds,
    options: &DiagnosticsOptions,
    workers: Option<usize>,
    decimals: Decimals,
) -> Result<Vec<PathBuf>> {
    let (_, ds) = load(input, schema_path)?;
    ensure_dir(out_dir)?;
    let report = match with_workers(workers, || {
        screening::pipeline_run(&ds, trial, production, thresholds, options)
    }) {
        Ok(r) => r,
        Err(e) => {
            // Flush a manifest recording the failed state before bailing.
            let _ = write_manifest(out_dir, &[], false);
            return Err(e);
        }
    };

    let mut files = Vec::new();

    let verdict_rows: Vec<Vec<String>> = report
        .verdicts
        .verdicts
        .iter()
        .map(|v| {
            vec![
                v.code.clone(),
                v.status.as_str().to_string(),
                v.fmi.map(fmt).unwrap_or_default(),
                v.mean_diff.map(fmt).unwrap_or_default(),
                v.sd_ratio.map(fmt).unwrap_or_default(),
                v.detail.clone(),
            ]
        })
        .collect();
    let verdicts = out_dir.join("verdicts.csv");
    write_csv(
        &verdicts,
        &["variable", "status", "fmi", "mean_diff", "sd_ratio", "detail"],
        &verdict_rows,
    )?;
    files.push(verdicts);

    files.extend(write_imputation_outputs(
        &report.accepted,
        &report.production,
        out_dir,
        decimals,
    )?);

    let desc_rows: Vec<Vec<String>> = report
        .descriptive
        .rows
        .iter()
        .map(|r| {
            vec![
                r.code.clone(),
                r.observed.n.to_string(),
                fmt(r.observed.mean),
                fmt(r.observed.sd),
                fmt(r.observed.min),
                fmt(r.observed.max),
                r.completed.n.to_string(),
                fmt(r.completed.mean),
                fmt(r.completed.sd),
                fmt(r.completed.min),
                fmt(r.completed.max),
                fmt(r.std_mean_diff),
                fmt(r.sd_ratio),
            ]
        })
        .collect();
    let desc = out_dir.join("descriptive.csv");
    write_csv(
        &desc,
        &[
            "variable",
            "obs_n",
            "obs_mean",
            "obs_sd",
            "obs_min",
            "obs_max",
            "comp_n",
            "comp_mean",
            "comp_sd",
            "comp_min",
            "comp_max",
            "std_mean_diff",
            "sd_ratio",
        ],
        &desc_rows,
    )?;
    files.push(desc);

    let corr = out_dir.join("correlation.csv");
    write_correlation_csv(&report.correlation, &corr)?;
    files.push(corr);

    let conv_rows: Vec<Vec<String>> = report
        .convergence
        .iter()
        .map(|(code, s)| {
            vec![
                code.clone(),
                fmt(s.rhat_mean),
                fmt(s.rhat_sd),
                s.pass.to_string(),
            ]
        })
        .collect();
    let conv = out_dir.join("convergence.csv");
    write_csv(&conv, &["variable", "rhat_mean", "rhat_sd", "pass"], &conv_rows)?;
    files.push(conv);

    let ovl_rows: Vec<Vec<String>> = report
        .ovl
        .iter()
        .map(|r| {
            vec![
                r.code.clone(),
                r.completed.map(fmt).unwrap_or_default(),
                r.imputed_only.map(fmt).unwrap_or_default(),
            ]
        })
        .collect();
    let ovl = out_dir.join("ovl.csv");
    write_csv(&ovl, &["variable", "ovl_completed", "ovl_imputed_only"], &ovl_rows)?;
    files.push(ovl);

    // Density plot data per accepted target with missing cells.
    let cmp_ds = &report.production.completed[report.comparison_index - 1];
    for code in &report.production.traces.variables {
        let v = report.accepted.var_index(code)?;
        let observed = report.accepted.observed_values(code)?;
        let completed_vals: Vec<f64> =
            (0..cmp_ds.n_rows()).filter_map(|r| cmp_ds.get(r, v)).collect();
        let imputed_vals: Vec<f64> = report
            .production
            .imputed_cells
            .iter()
            .filter(|&&(_, iv)| iv == v)
            .filter_map(|&(row, _)| cmp_ds.get(row, v))
            .collect();
        let Ok(obs_curve) = diagnostics::kde(&observed, None, None) else {
            continue;
        };
        let grid = obs_curve.grid.clone();
        let comp_curve = diagnostics::kde(&completed_vals, None, Some(grid.clone())).ok();
        let imp_curve = diagnostics::kde(&imputed_vals, None, Some(grid.clone())).ok();
        let rows: Vec<Vec<String>> = grid
            .iter()
            .enumerate()
            .map(|(i, &g)| {
                vec![
                    fmt(g),
                    fmt(obs_curve.density[i]),
                    comp_curve.as_ref().map(|c| fmt(c.density[i])).unwrap_or_default(),
                    imp_curve.as_ref().map(|c| fmt(c.density[i])).unwrap_or_default(),
                ]
            })
            .collect();
        let path = out_dir.join(format!("density_{code}.csv"));
        write_csv(
            &path,
            &["grid", "observed", "completed", "imputed_only"],
            &rows,
        )?;
        files.push(path);
    }

    // Pooled per-variable mean with its fraction of missing information.
    let mut fmi_rows = Vec::new();
    for meta in report.accepted.variables() {
        if meta.role != Role::ImputationTarget {
            continue;
        }
        let p = pooling::per_variable_fmi(&report.production, &meta.code)?;
        fmi_rows.push(vec![
            meta.code.clone(),
            fmt(p.q_bar),
            fmt(p.t),
            fmt(p.fmi),
            fmt(p.re),
        ]);
    }
    let fmi = out_dir.join("fmi.csv");
    write_csv(&fmi, &["variable", "pooled_mean", "total_variance", "fmi", "re"], &fmi_rows)?;
    files.push(fmi);

    let timing = out_dir.join("timings.csv");
    write_csv(
        &timing,
        &["stage", "m", "iterations", "seconds"],
        &[
            vec![
                "trial".into(),
                trial.m.to_string(),
                trial.iterations.to_string(),
                format!("{:.3}", report.trial_seconds),
            ],
            vec![
                "production".into(),
                production.m.to_string(),
                production.iterations.to_string(),
                format!("{:.3}", report.production_seconds),
            ],
        ],
    )?;
    files.push(timing);

    let manifest = write_manifest(out_dir, &files, true)?;
    files.push(manifest);
    Ok(files)
}

fn write_correlation_csv(corr: &diagnostics::CorrelationComparison, path: &Path) -> Result<()> {
    let mut rows = Vec::new();
    let p = corr.variables.len();
    for a in 0..p {
        for b in 0..a {
            rows.push(vec![
                corr.variables[a].clone(),
                corr.variables[b].clone(),
                corr.observed[a][b].map(fmt).unwrap_or_default(),
                corr.completed[a][b].map(fmt).unwrap_or_default(),
                corr.abs_diff[a][b].map(fmt).unwrap_or_default(),
            ]);
        }
    }
    write_csv(
        path,
        &["var_a", "var_b", "rho_observed", "rho_completed", "abs_diff"],
        &rows,
    )
}

/// What `cmd_pool` estimates from the completed datasets.
#[derive(Debug, Clone)]
pub enum Estimand {
    /// Per-variable mean (one pooled row per imputation target).
    VariableMeans,
    Regression {
        response: String,
        regressors: Vec<String>,
    },
}

fn fake_result(completed: Vec<PanelDataset>) -> ImputationResult {
    let m = completed.len();
    ImputationResult {
        completed,
        imputed_cells: Vec::new(),
        traces: ChainTrace {
            variables: Vec::new(),
            m,
            iterations: 0,
            points: Vec::new(),
        },
    }
}

/// Pool an estimand across completed-dataset files (`pooled.csv`).
pub fn cmd_pool(
    imp_files: &[PathBuf],
    schema_path: &Path,
    out_dir: &Path,
    estimand: &Estimand,
) -> Result<Vec<PathBuf>> {
    if imp_files.len() < 2 {
        return Err(Error::InvalidConfig(format!(
            "pooling needs at least 2 completed datasets, got {}",
            imp_files.len()
        )));
    }
    let schema = ingest::read_schema(schema_path)?;
    let completed: Vec<PanelDataset> = imp_files
        .iter()
        .map(|p| ingest::read_wide_csv(p, &schema))
        .collect::<Result<Vec<_>>>()?;
    ensure_dir(out_dir)?;
    let result = fake_result(completed);

    let header = [
        "estimand", "q_bar", "u_bar", "b", "t", "r", "df", "lambda", "fmi", "re",
    ];
    let to_row = |name: String, p: &pooling::PooledEstimate| {
        vec![
            name,
            fmt(p.q_bar),
            fmt(p.u_bar),
            fmt(p.b),
            fmt(p.t),
            fmt(p.r),
            if p.df.is_infinite() { "inf".to_string() } else { fmt(p.df) },
            fmt(p.lambda),
            fmt(p.fmi),
            fmt(p.re),
        ]
    };
    let rows: Vec<Vec<String>> = match estimand {
        Estimand::VariableMeans => result.completed[0]
            .variables()
            .iter()
            .filter(|m| m.role == Role::ImputationTarget)
            .map(|m| {
                pooling::per_variable_fmi(&result, &m.code)
                    .map(|p| to_row(format!("mean({})", m.code), &p))
            })
            .collect::<Result<Vec<_>>>()?,
        Estimand::Regression {
            response,
            regressors,
        } => pooling::pooled_regress(&result, response, regressors)?
            .iter()
            .map(|c| to_row(format!("{response} ~ {}", c.name), &c.estimate))
            .collect(),
    };
    let path = out_dir.join("pooled.csv");
    write_csv(&path, &header, &rows)?;
    let manifest = write_manifest(out_dir, &[path.clone()], true)?;
    Ok(vec![path, manifest])
}

/// Punch holes into a complete dataset: writes `amputed.csv` and the
/// removed values as `deleted.csv` (long layout).
pub fn cmd_ampute(
    input: &Path,
    schema_path: &Path,
    out_dir: &Path,
    plan: &AmputationPlan,
    decimals: Decimals,
) -> Result<Vec<PathBuf>> {
    let (_, ds) = load(input, schema_path)?;
    ensure_dir(out_dir)?;
    let (amputed, deleted) = baselines::ampute(&ds, plan)?;
    let amputed_path = out_dir.join("amputed.csv");
    ingest::write_wide_csv(&amputed, &amputed_path, decimals)?;
    let deleted_rows: Vec<Vec<String>> = deleted
        .cells
        .iter()
        .map(|&(row, v, x)| {
            vec![
                ds.country_of_row(row).to_string(),
                ds.year_of_row(row).to_string(),
                ds.variables()[v].code.clone(),
                fmt(x),
            ]
        })
        .collect();
    let deleted_path = out_dir.join("deleted.csv");
    write_csv(&deleted_path, &["country", "year", "variable", "value"], &deleted_rows)?;
    let manifest = write_manifest(out_dir, &[amputed_path.clone(), deleted_path.clone()], true)?;
    Ok(vec![amputed_path, deleted_path, manifest])
}

fn read_deleted(path: &Path, truth: &PanelDataset) -> Result<DeletedTruth> {
    let mut reader = csv::Reader::from_path(path)?;
    let mut cells = Vec::new();
    for (ri, record) in reader.records().enumerate() {
        let record = record?;
        let country = record.get(0).unwrap_or("").trim();
        let year: i32 = record.get(1).unwrap_or("").trim().parse().map_err(|_| {
            Error::ParseCell {
                row: ri + 2,
                column: "year".into(),
                token: record.get(1).unwrap_or("").to_string(),
            }
        })?;
        let code = record.get(2).unwrap_or("").trim();
        let value: f64 = record.get(3).unwrap_or("").trim().parse().map_err(|_| {
            Error::ParseCell {
                row: ri + 2,
                column: "value".into(),
                token: record.get(3).unwrap_or("").to_string(),
            }
        })?;
        let row = truth.row_of(country, year).ok_or_else(|| Error::UnknownCode {
            kind: "country/year",
            code: format!("{country}/{year}"),
        })?;
        cells.push((row, truth.var_index(code)?, value));
    }
    Ok(DeletedTruth { cells })
}

/// Score completed datasets against the truth they were amputed from
/// (`evaluation.csv`).
pub fn cmd_evaluate(
    truth_path: &Path,
    deleted_path: &Path,
    completed_paths: &[PathBuf],
    schema_path: &Path,
    out_dir: &Path,
    method: &str,
) -> Result<Vec<PathBuf>> {
    let (schema, truth) = load(truth_path, schema_path)?;
    let deleted = read_deleted(deleted_path, &truth)?;
    let completed: Vec<PanelDataset> = completed_paths
        .iter()
        .map(|p| ingest::read_wide_csv(p, &schema))
        .collect::<Result<Vec<_>>>()?;
    ensure_dir(out_dir)?;
    let metrics = baselines::evaluate(&truth, &deleted, &completed)?;
    let rows: Vec<Vec<String>> = metrics
        .rows
        .iter()
        .map(|r| {
            vec![
                method.to_string(),
                r.code.clone(),
                fmt(r.mean_bias),
                fmt(r.ks),
                fmt(r.max_corr_distortion),
            ]
        })
        .collect();
    let path = out_dir.join("evaluation.csv");
    write_csv(
        &path,
        &["method", "variable", "mean_bias", "ks", "max_corr_distortion"],
        &rows,
    )?;
    let manifest = write_manifest(out_dir, &[path.clone()], true)?;
    Ok(vec![path, manifest])
}

const RANK_HEADER: [&str; 9] = [
    "Rank",
    "Country",
    "Tech_Index",
    "Finance_Index",
    "Infrastructure_Index",
    "HumanCapacity_Index",
    "PublicPolicy_Index",
    "SocialCapacity_Index",
    "AbsorptiveCapacity_Index",
];

/// Read a table that already carries the six capacity indices per country
/// (header `Country,Tech_Index,...,SocialCapacity_Index`, with an optional
/// trailing absorptive column that is ignored). The absorptive index is
/// recomputed as the mean of the six.
pub fn read_preindexed(path: &Path) -> Result<CapacityIndexTable> {
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    // A leading Rank column (as emitted by cmd_rank itself) is skipped.
    let offset = usize::from(headers.get(0) == Some("Rank"));
    let expect = &RANK_HEADER[1..8];
    let matches = headers.len() >= offset + 7
        && headers
            .iter()
            .skip(offset)
            .take(7)
            .zip(expect)
            .all(|(h, e)| h == *e);
    if !matches {
        return Err(Error::CsvLayout(format!(
            "pre-indexed table needs the header {}",
            expect.join(",")
        )));
    }
    let mut rows = Vec::new();
    for (ri, record) in reader.records().enumerate() {
        let record = record?;
        let mut capacity = [0.0; 6];
        for (i, c) in capacity.iter_mut().enumerate() {
            let col = offset + i + 1;
            let token = record.get(col).unwrap_or("").trim();
            *c = token.parse().map_err(|_| Error::ParseCell {
                row: ri + 2,
                column: headers.get(col).unwrap_or("").to_string(),
                token: token.to_string(),
            })?;
        }
        rows.push(IndexRow {
            country: record.get(offset).unwrap_or("").trim().to_string(),
            capacity,
            absorptive: capacity.iter().sum::<f64>() / 6.0,
        });
    }
    Ok(CapacityIndexTable { year: 0, rows })
}

fn write_ranking_csv(table: &indices::RankingTable, path: &Path) -> Result<()> {
    let rows: Vec<Vec<String>> = table
        .rows
        .iter()
        .map(|r| {
            let mut row = vec![r.rank.to_string(), r.country.clone()];
            row.extend(r.capacity.iter().map(|&x| format!("{x:.6}")));
            row.push(format!("{:.6}", r.absorptive));
            row
        })
        .collect();
    write_csv(path, &RANK_HEADER, &rows)
}

/// Country ranking by absorptive-capacity index (`ranking.csv`).
///
/// With `preindexed` the input already holds the six index values per
/// country; otherwise the indices are computed from a completed dataset
/// for `year`.
pub fn cmd_rank(
    input: &Path,
    schema_path: Option<&Path>,
    year: Option<i32>,
    preindexed: bool,
    out_dir: &Path,
) -> Result<Vec<PathBuf>> {
    let table = if preindexed {
        read_preindexed(input)?
    } else {
        let schema_path = schema_path
            .ok_or_else(|| Error::InvalidConfig("ranking from raw data needs a schema".into()))?;
        let year =
            year.ok_or_else(|| Error::InvalidConfig("ranking from raw data needs a year".into()))?;
        let (_, ds) = load(input, schema_path)?;
        indices::capacity_indices(&ds, year)?
    };
    let ranking = indices::rank(&table)?;
    ensure_dir(out_dir)?;
    let path = out_dir.join("ranking.csv");
    write_ranking_csv(&ranking, &path)?;
    let manifest = write_manifest(out_dir, &[path.clone()], true)?;
    Ok(vec![path, manifest])
}

/// Diagnostics over existing files: descriptive, correlation, and overlap
/// reports comparing an observed dataset with one completed dataset.
pub fn cmd_diagnose(
    observed_path: &Path,
    completed_path: &Path,
    schema_path: &Path,
    out_dir: &Path,
) -> Result<Vec<PathBuf>> {
    let schema = ingest::read_schema(schema_path)?;
    let observed = ingest::read_wide_csv(observed_path, &schema)?;
    let completed = ingest::read_wide_csv(completed_path, &schema)?;
    ensure_dir(out_dir)?;

    let mut files = Vec::new();
    let descriptive = diagnostics::describe_compare(&observed, &completed)?;
    let rows: Vec<Vec<String>> = descriptive
        .rows
        .iter()
        .map(|r| {
            vec![
                r.code.clone(),
                r.observed.n.to_string(),
                fmt(r.observed.mean),
                fmt(r.observed.sd),
                fmt(r.completed.mean),
                fmt(r.completed.sd),
                fmt(r.std_mean_diff),
                fmt(r.sd_ratio),
            ]
        })
        .collect();
    let desc = out_dir.join("descriptive.csv");
    write_csv(
        &desc,
        &[
            "variable",
            "obs_n",
            "obs_mean",
            "obs_sd",
            "comp_mean",
            "comp_sd",
            "std_mean_diff",
            "sd_ratio",
        ],
        &rows,
    )?;
    files.push(desc);

    let targets: Vec<String> = observed
        .variables()
        .iter()
        .filter(|m| m.role == Role::ImputationTarget)
        .map(|m| m.code.clone())
        .collect();
    let corr = diagnostics::corr_compare(&observed, &completed, &targets)?;
    let corr_path = out_dir.join("correlation.csv");
    write_correlation_csv(&corr, &corr_path)?;
    files.push(corr_path);

    let mut ovl_rows = Vec::new();
    for code in &targets {
        let v = completed.var_index(code)?;
        let obs_vals = observed.observed_values(code)?;
        let comp_vals: Vec<f64> =
            (0..completed.n_rows()).filter_map(|r| completed.get(r, v)).collect();
        let o = diagnostics::kde(&obs_vals, None, None)
            .and_then(|a| diagnostics::kde(&comp_vals, None, None).map(|b| diagnostics::ovl(&a, &b)))
            .ok();
        ovl_rows.push(vec![code.clone(), o.map(fmt).unwrap_or_default()]);
    }
    let ovl = out_dir.join("ovl.csv");
    write_csv(&ovl, &["variable", "ovl_completed"], &ovl_rows)?;
    files.push(ovl);

    let manifest = write_manifest(out_dir, &files, true)?;
    files.push(manifest);
    Ok(files)
}
