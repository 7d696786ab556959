//! Composite capacity indices and the country ranking built from them.
//!
//! Each variable is z-scored across countries within one year, signed by
//! its direction, averaged into its capacity-group index, and the six
//! group indices average into the overall absorptive-capacity index.

use crate::datamodel::{Capacity, PanelDataset, Role};
use crate::error::{Error, Result};

/// Per-country index values for one year.
#[derive(Debug, Clone)]
pub struct CapacityIndexTable {
    pub year: i32,
    pub rows: Vec<IndexRow>,
}

#[derive(Debug, Clone)]
pub struct IndexRow {
    pub country: String,
    /// Six group indices in [`Capacity::INDEXED`] order: technology,
    /// financial, infrastructure, human, public policy, social.
    pub capacity: [f64; 6],
    /// Arithmetic mean of the six group indices.
    pub absorptive: f64,
}

/// Ranked view of a [`CapacityIndexTable`].
#[derive(Debug, Clone)]
pub struct RankingTable {
    pub year: i32,
    pub rows: Vec<RankedRow>,
}

#[derive(Debug, Clone)]
pub struct RankedRow {
    /// 1 = highest absorptive index.
    pub rank: usize,
    pub country: String,
    pub capacity: [f64; 6],
    pub absorptive: f64,
}

/// Build the six capacity indices and the absorptive index per country for
/// one year of a completed dataset.
///
/// Each indexed variable becomes a cross-country z-score ((n-1) standard
/// deviation) within `year`, multiplied by the variable's direction sign.
/// A zero-variance variable contributes 0. A capacity index is the
/// unweighted mean of its variables' signed z-scores.
pub fn capacity_indices(completed: &PanelDataset, year: i32) -> Result<CapacityIndexTable> {
    if !completed.years().contains(&year) {
        return Err(Error::UnknownCode {
            kind: "year",
            code: format!(
                "{year} (available: {})",
                completed
                    .years()
                    .iter()
                    .map(|y| y.to_string())
                    .collect::<Vec<_>>()
                    .join(", ")
            ),
        });
    }
    let n = completed.countries().len();
    let nf = n as f64;

    // Per-variable signed z-score columns, grouped by capacity.
    let mut group_cols: Vec<Vec<Vec<f64>>> = vec![Vec::new(); 6];
    for (v, meta) in completed.variables().iter().enumerate() {
        if meta.role != Role::ImputationTarget {
            continue;
        }
        let Some(g) = Capacity::INDEXED.iter().position(|&c| c == meta.capacity) else {
            continue;
        };
        let mut vals = Vec::with_capacity(n);
        for (ci, country) in completed.countries().iter().enumerate() {
            let row = completed.row_of(country, year).unwrap();
            debug_assert_eq!(row / completed.years().len(), ci);
            let x = completed.get(row, v).ok_or_else(|| {
                Error::ShapeMismatch(format!(
                    "index construction needs complete data; '{}' is missing for {country} in {year}",
                    meta.code
                ))
            })?;
            vals.push(x);
        }
        let mean = vals.iter().sum::<f64>() / nf;
        let sd = if n < 2 {
            0.0
        } else {
            (vals.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (nf - 1.0)).sqrt()
        };
        let sign = meta.direction as f64;
        let z: Vec<f64> = if sd > 0.0 {
            vals.iter().map(|x| sign * (x - mean) / sd).collect()
        } else {
            vec![0.0; n]
        };
        group_cols[g].push(z);
    }
    for (g, cols) in group_cols.iter().enumerate() {
        if cols.is_empty() {
            return Err(Error::InvalidConfig(format!(
                "capacity group '{}' has no indexed variables",
                Capacity::INDEXED[g].as_str()
            )));
        }
    }

    let rows = completed
        .countries()
        .iter()
        .enumerate()
        .map(|(ci, country)| {
            let mut capacity = [0.0; 6];
            for g in 0..6 {
                let cols = &group_cols[g];
                capacity[g] =
                    cols.iter().map(|z| z[ci]).sum::<f64>() / cols.len() as f64;
            }
            let absorptive = capacity.iter().sum::<f64>() / 6.0;
            IndexRow {
                country: country.clone(),
                capacity,
                absorptive,
            }
        })
        .collect();
    Ok(CapacityIndexTable { year, rows })
}

/// Rank countries by descending absorptive index; equal values fall back
/// to lexicographic country order. Ranks are 1..N.
pub fn rank(table: &CapacityIndexTable) -> Result<RankingTable> {
    if table.rows.is_empty() {
        return Err(Error::InvalidConfig("cannot rank an empty index table".into()));
    }
    let mut order: Vec<&IndexRow> = table.rows.iter().collect();
    order.sort_by(|a, b| {
        b.absorptive
            .partial_cmp(&a.absorptive)
            .unwrap()
            .then_with(|| a.country.cmp(&b.country))
    });
    let rows = order
        .into_iter()
        .enumerate()
        .map(|(i, r)| RankedRow {
            rank: i + 1,
            country: r.country.clone(),
            capacity: r.capacity,
            absorptive: r.absorptive,
        })
        .collect();
    Ok(RankingTable {
        year: table.year,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datamodel::{build_panel, CellRecord, VariableMeta};
    use approx::assert_abs_diff_eq;

    fn six_group_panel(values: &[(&str, [f64; 6])]) -> PanelDataset {
        // One variable per capacity group; one year.
        let metas: Vec<VariableMeta> = Capacity::INDEXED
            .iter()
            .enumerate()
            .map(|(i, &cap)| VariableMeta::target(&format!("v{i}"), cap))
            .collect();
        let countries: Vec<String> = values.iter().map(|(c, _)| c.to_string()).collect();
        let mut cells = Vec::new();
        for (c, vals) in values {
            for (i, x) in vals.iter().enumerate() {
                cells.push(CellRecord {
                    country: c.to_string(),
                    year: 2019,
                    variable: format!("v{i}"),
                    value: *x,
                });
            }
        }
        build_panel(countries, vec![2019], metas, &cells).unwrap()
    }

    #[test]
    fn absorptive_is_mean_of_six() {
        let ds = six_group_panel(&[
            ("AAA", [1.0, 2.0, 3.0, 4.0, 5.0, 6.0]),
            ("BBB", [2.0, 1.0, 5.0, 3.0, 8.0, 0.0]),
            ("CCC", [0.0, 0.0, 1.0, 9.0, 2.0, 3.0]),
        ]);
        let table = capacity_indices(&ds, 2019).unwrap();
        for row in &table.rows {
            let mean = row.capacity.iter().sum::<f64>() / 6.0;
            assert_abs_diff_eq!(row.absorptive, mean, epsilon = 1e-9);
        }
        // Signed z-scores of each column sum to zero across countries.
        for g in 0..6 {
            let total: f64 = table.rows.iter().map(|r| r.capacity[g]).sum();
            assert_abs_diff_eq!(total, 0.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn identical_countries_give_all_zero() {
        let ds = six_group_panel(&[
            ("AAA", [1.0, 2.0, 3.0, 4.0, 5.0, 6.0]),
            ("BBB", [1.0, 2.0, 3.0, 4.0, 5.0, 6.0]),
        ]);
        let table = capacity_indices(&ds, 2019).unwrap();
        for row in &table.rows {
            assert_eq!(row.capacity, [0.0; 6]);
            assert_eq!(row.absorptive, 0.0);
        }
    }

    #[test]
    fn direction_sign_flips_zscore() {
        let mut metas: Vec<VariableMeta> = Capacity::INDEXED
            .iter()
            .enumerate()
            .map(|(i, &cap)| VariableMeta::target(&format!("v{i}"), cap))
            .collect();
        metas[0].direction = -1;
        let countries = vec!["AAA".to_string(), "BBB".to_string(), "CCC".to_string()];
        let mut cells = Vec::new();
        for (ci, c) in countries.iter().enumerate() {
            for i in 0..6 {
                cells.push(CellRecord {
                    country: c.clone(),
                    year: 2019,
                    variable: format!("v{i}"),
                    value: (ci * (i + 1)) as f64,
                });
            }
        }
        let ds = build_panel(countries, vec![2019], metas, &cells).unwrap();
        let table = capacity_indices(&ds, 2019).unwrap();
        // v0 increases with country index but carries direction -1, so its
        // group index decreases while the others increase.
        assert!(table.rows[0].capacity[0] > table.rows[2].capacity[0]);
        assert!(table.rows[0].capacity[1] < table.rows[2].capacity[1]);
    }

    #[test]
    fn affine_invariance() {
        let base = [
            ("AAA", [1.0, 2.0, 3.0, 4.0, 5.0, 6.0]),
            ("BBB", [2.0, 1.0, 5.0, 3.0, 8.0, 0.0]),
            ("CCC", [0.0, 0.0, 1.0, 9.0, 2.0, 3.0]),
        ];
        let ds = six_group_panel(&base);
        // Rescale variable 2 by a positive affine map.
        let scaled: Vec<(&str, [f64; 6])> = base
            .iter()
            .map(|&(c, mut v)| {
                v[2] = 10.0 + 3.5 * v[2];
                (c, v)
            })
            .collect();
        let ds2 = six_group_panel(&scaled);
        let t1 = capacity_indices(&ds, 2019).unwrap();
        let t2 = capacity_indices(&ds2, 2019).unwrap();
        for (a, b) in t1.rows.iter().zip(&t2.rows) {
            for g in 0..6 {
                assert_abs_diff_eq!(a.capacity[g], b.capacity[g], epsilon = 1e-12);
            }
            assert_abs_diff_eq!(a.absorptive, b.absorptive, epsilon = 1e-12);
        }
    }

    #[test]
    fn country_order_permutation_invariant() {
        let base = [
            ("AAA", [1.0, 2.0, 3.0, 4.0, 5.0, 6.0]),
            ("BBB", [2.0, 1.0, 5.0, 3.0, 8.0, 0.0]),
            ("CCC", [0.0, 0.0, 1.0, 9.0, 2.0, 3.0]),
        ];
        let mut permuted = base;
        permuted.swap(0, 2);
        let t1 = capacity_indices(&six_group_panel(&base), 2019).unwrap();
        let t2 = capacity_indices(&six_group_panel(&permuted), 2019).unwrap();
        let find = |t: &CapacityIndexTable, c: &str| {
            t.rows.iter().find(|r| r.country == c).unwrap().absorptive
        };
        for c in ["AAA", "BBB", "CCC"] {
            assert_abs_diff_eq!(find(&t1, c), find(&t2, c), epsilon = 1e-12);
        }
        let r1 = rank(&t1).unwrap();
        let r2 = rank(&t2).unwrap();
        for (a, b) in r1.rows.iter().zip(&r2.rows) {
            assert_eq!(a.country, b.country);
            assert_eq!(a.rank, b.rank);
        }
    }

    #[test]
    fn rank_order_and_ties() {
        let table = CapacityIndexTable {
            year: 2019,
            rows: vec![
                IndexRow {
                    country: "BBB".into(),
                    capacity: [0.0; 6],
                    absorptive: 1.0,
                },
                IndexRow {
                    country: "AAA".into(),
                    capacity: [0.0; 6],
                    absorptive: 1.0,
                },
                IndexRow {
                    country: "CCC".into(),
                    capacity: [0.0; 6],
                    absorptive: 2.0,
                },
            ],
        };
        let r = rank(&table).unwrap();
        assert_eq!(r.rows[0].country, "CCC");
        assert_eq!(r.rows[0].rank, 1);
        // Tie broken lexicographically.
        assert_eq!(r.rows[1].country, "AAA");
        assert_eq!(r.rows[2].country, "BBB");
        assert_eq!(r.rows[2].rank, 3);
    }

    #[test]
    fn single_country_ranks_first() {
        let table = CapacityIndexTable {
            year: 2019,
            rows: vec![IndexRow {
                country: "AAA".into(),
                capacity: [0.0; 6],
                absorptive: 0.5,
            }],
        };
        let r = rank(&table).unwrap();
        assert_eq!(r.rows.len(), 1);
        assert_eq!(r.rows[0].rank, 1);
    }

    #[test]
    fn unknown_year_names_available_years() {
        let ds = six_group_panel(&[("AAA", [1.0; 6]), ("BBB", [2.0; 6])]);
        let err = capacity_indices(&ds, 1990).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("2019"), "{msg}");
    }
}
