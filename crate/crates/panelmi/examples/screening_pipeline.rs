//! Screen a variable set with a trial imputation run, then impute the
//! accepted variables at production settings and report diagnostics.

use panelmi::datamodel::{build_panel, Capacity, CellRecord, VariableMeta};
use panelmi::mice::MiceConfig;
use panelmi::screening::{pipeline_run, DiagnosticsOptions, ScreeningThresholds};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

fn main() -> panelmi::Result<()> {
    let mut rng = ChaCha12Rng::seed_from_u64(11);
    let countries: Vec<String> = (0..30).map(|i| format!("C{i:02}")).collect();
    let years: Vec<i32> = (2012..2020).collect();
    let mut variables: Vec<VariableMeta> = (0..8)
        .map(|i| VariableMeta::target(&format!("v{i}"), Capacity::Infrastructure))
        .collect();
    // One variable observed so rarely its regression is underdetermined.
    variables.push(VariableMeta::target("sparse", Capacity::Social));

    let mut cells = Vec::new();
    for (row, _) in (0..countries.len() * years.len()).enumerate() {
        let base: f64 = rng.sample(StandardNormal);
        for meta in &variables {
            let rate = if meta.code == "sparse" { 0.97 } else { 0.2 };
            if rng.gen::<f64>() < rate {
                continue;
            }
            let noise: f64 = rng.sample(StandardNormal);
            cells.push(CellRecord {
                country: countries[row / years.len()].clone(),
                year: years[row % years.len()],
                variable: meta.code.clone(),
                value: 0.8 * base + 0.6 * noise,
            });
        }
    }
    let ds = build_panel(countries, years, variables, &cells)?;

    let trial = MiceConfig {
        m: 20,
        iterations: 5,
        seed: 1,
        include_country_indicators: false,
        ..MiceConfig::default()
    };
    let production = MiceConfig {
        m: 10,
        iterations: 10,
        ..trial.clone()
    };
    let report = pipeline_run(
        &ds,
        &trial,
        &production,
        &ScreeningThresholds::default(),
        &DiagnosticsOptions::default(),
    )?;

    for v in &report.verdicts.verdicts {
        println!("{:<8} {}", v.code, v.status.as_str());
    }
    println!();
    for (code, stat) in &report.convergence {
        println!(
            "{code}: rhat(mean) {:.3}, rhat(sd) {:.3}, pass {}",
            stat.rhat_mean, stat.rhat_sd, stat.pass
        );
    }
    println!(
        "\ntrial {:.2}s, production {:.2}s, {} datasets on {} accepted variables",
        report.trial_seconds,
        report.production_seconds,
        report.production.m(),
        report.verdicts.accepted().len()
    );
    Ok(())
}
