//! Distribution and correlation diagnostics for a completed dataset:
//! kernel density overlap between observed and completed values, and the
//! observed-vs-completed correlation matrix comparison.

use panelmi::baselines::{ampute, AmputationPlan, Mechanism};
use panelmi::datamodel::{build_panel, Capacity, CellRecord, VariableMeta};
use panelmi::diagnostics::{corr_compare, kde, ovl};
use panelmi::mice::{run_mice, MiceConfig};
use panelmi::screening::comparison_index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

fn main() -> panelmi::Result<()> {
    let mut rng = ChaCha12Rng::seed_from_u64(17);
    let countries: Vec<String> = (0..60).map(|i| format!("C{i:02}")).collect();
    let years: Vec<i32> = (2015..2020).collect();
    let codes = ["a", "b", "c"];
    let variables: Vec<VariableMeta> = codes
        .iter()
        .map(|c| VariableMeta::target(c, Capacity::PublicPolicy))
        .collect();
    let mut cells = Vec::new();
    for (row, _) in (0..300).enumerate() {
        let f: f64 = rng.sample(StandardNormal);
        for code in codes {
            let noise: f64 = rng.sample(StandardNormal);
            cells.push(CellRecord {
                country: countries[row / 5].clone(),
                year: years[row % 5],
                variable: code.into(),
                value: 0.8 * f + 0.6 * noise,
            });
        }
    }
    let truth = build_panel(countries, years, variables, &cells)?;
    let (observed, _) = ampute(
        &truth,
        &AmputationPlan {
            mechanism: Mechanism::Mcar,
            rate: 0.3,
            driver: None,
            targets: vec!["a".into(), "b".into()],
            seed: 4,
        },
    )?;

    let config = MiceConfig {
        m: 5,
        iterations: 10,
        seed: 8,
        include_country_indicators: false,
        ..MiceConfig::default()
    };
    let result = run_mice(&observed, &config)?;
    let completed = &result.completed[comparison_index(result.m()) - 1];

    for code in ["a", "b"] {
        let obs = observed.observed_values(code)?;
        let v = completed.var_index(code)?;
        let full: Vec<f64> = (0..completed.n_rows())
            .filter_map(|r| completed.get(r, v))
            .collect();
        let overlap = ovl(&kde(&obs, None, None)?, &kde(&full, None, None)?);
        println!("{code}: observed/completed density overlap {overlap:.3}");
    }

    let names: Vec<String> = codes.iter().map(|s| s.to_string()).collect();
    let corr = corr_compare(&observed, completed, &names)?;
    println!("\npairwise correlations (observed -> completed):");
    for i in 0..codes.len() {
        for j in 0..i {
            if let (Some(o), Some(c)) = (corr.observed[i][j], corr.completed[i][j]) {
                println!("  {} ~ {}: {o:.3} -> {c:.3}", codes[j], codes[i]);
            }
        }
    }
    println!("sign flips: {}", corr.sign_flips);
    Ok(())
}
