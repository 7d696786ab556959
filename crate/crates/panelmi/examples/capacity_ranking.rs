//! Build per-capacity indices for one cross-section year and rank
//! countries by the combined absorptive-capacity index.

use panelmi::datamodel::{build_panel, Capacity, CellRecord, VariableMeta};
use panelmi::indices::{capacity_indices, rank};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

fn main() -> panelmi::Result<()> {
    let mut rng = ChaCha12Rng::seed_from_u64(2019);
    let countries: Vec<String> = (0..12).map(|i| format!("Country{:02}", i + 1)).collect();
    let years = vec![2019];

    // Two indicators per capacity; the second in each pair is
    // lower-is-better so its direction is flipped before averaging.
    let mut variables = Vec::new();
    for cap in Capacity::INDEXED {
        let tag = cap.as_str();
        variables.push(VariableMeta::target(&format!("{tag}_a"), cap));
        let mut worse = VariableMeta::target(&format!("{tag}_b"), cap);
        worse.direction = -1;
        variables.push(worse);
    }

    let mut cells = Vec::new();
    for (i, c) in countries.iter().enumerate() {
        // A latent quality level plus indicator noise.
        let quality = i as f64 / 4.0;
        for meta in &variables {
            let noise: f64 = rng.sample(StandardNormal);
            let sign = meta.direction as f64;
            cells.push(CellRecord {
                country: c.clone(),
                year: 2019,
                variable: meta.code.clone(),
                value: sign * quality + 0.3 * noise,
            });
        }
    }
    let ds = build_panel(countries, years, variables, &cells)?;

    let table = capacity_indices(&ds, 2019)?;
    let ranking = rank(&table)?;
    println!("{:<12} {:>5} {:>10}", "country", "rank", "index");
    for row in &ranking.rows {
        println!("{:<12} {:>5} {:>10.4}", row.country, row.rank, row.absorptive);
    }
    Ok(())
}
