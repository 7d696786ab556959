//! Core panel representation: a rectangular country x year x variable grid
//! with an explicit missingness mask and per-variable metadata.
//!
//! A dataset is immutable after construction. Derived datasets (imputed,
//! amputed, substituted) are built by copying and editing the value/mask
//! buffers through [`PanelDataset::with_cells`].

use std::collections::HashMap;

use crate::error::{Error, Result};

/// Capacity group a variable belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Capacity {
    Technology,
    Financial,
    Human,
    Infrastructure,
    PublicPolicy,
    Social,
    Auxiliary,
    Identifier,
}

impl Capacity {
    /// The six groups that feed composite capacity indices, in report order.
    pub const INDEXED: [Capacity; 6] = [
        Capacity::Technology,
        Capacity::Financial,
        Capacity::Infrastructure,
        Capacity::Human,
        Capacity::PublicPolicy,
        Capacity::Social,
    ];

    pub fn parse(s: &str) -> Option<Capacity> {
        match s.trim().to_ascii_lowercase().as_str() {
            "technology" => Some(Capacity::Technology),
            "financial" | "finance" => Some(Capacity::Financial),
            "human" => Some(Capacity::Human),
            "infrastructure" => Some(Capacity::Infrastructure),
            "public_policy" | "publicpolicy" => Some(Capacity::PublicPolicy),
            "social" => Some(Capacity::Social),
            "auxiliary" => Some(Capacity::Auxiliary),
            "identifier" => Some(Capacity::Identifier),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Capacity::Technology => "technology",
            Capacity::Financial => "financial",
            Capacity::Human => "human",
            Capacity::Infrastructure => "infrastructure",
            Capacity::PublicPolicy => "public_policy",
            Capacity::Social => "social",
            Capacity::Auxiliary => "auxiliary",
            Capacity::Identifier => "identifier",
        }
    }
}

/// What part a variable plays in the imputation model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    ImputationTarget,
    AuxiliaryPredictor,
    Identifier,
}

impl Role {
    pub fn parse(s: &str) -> Option<Role> {
        match s.trim().to_ascii_lowercase().as_str() {
            "target" | "imputation-target" => Some(Role::ImputationTarget),
            "auxiliary" | "auxiliary-predictor" => Some(Role::AuxiliaryPredictor),
            "identifier" => Some(Role::Identifier),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Role::ImputationTarget => "target",
            Role::AuxiliaryPredictor => "auxiliary",
            Role::Identifier => "identifier",
        }
    }
}

/// Per-variable metadata.
#[derive(Debug, Clone)]
pub struct VariableMeta {
    pub code: String,
    pub label: String,
    pub capacity: Capacity,
    /// Higher-is-better sign for index construction: +1 or -1.
    pub direction: i8,
    pub role: Role,
}

impl VariableMeta {
    pub fn target(code: &str, capacity: Capacity) -> Self {
        VariableMeta {
            code: code.to_string(),
            label: code.to_string(),
            capacity,
            direction: 1,
            role: Role::ImputationTarget,
        }
    }

    pub fn auxiliary(code: &str) -> Self {
        VariableMeta {
            code: code.to_string(),
            label: code.to_string(),
            capacity: Capacity::Auxiliary,
            direction: 1,
            role: Role::AuxiliaryPredictor,
        }
    }
}

/// One addressed input value for [`build_panel`].
#[derive(Debug, Clone)]
pub struct CellRecord {
    pub country: String,
    pub year: i32,
    pub variable: String,
    pub value: f64,
}

/// Rectangular country x year x variable grid of reals with a missingness mask.
///
/// Row order is (country, year) with years nested inside countries; this is
/// the stable row order used everywhere (donor pools, CSV emission, traces).
#[derive(Debug, Clone)]
pub struct PanelDataset {
    countries: Vec<String>,
    years: Vec<i32>,
    variables: Vec<VariableMeta>,
    /// Dense values, index `(row * n_vars + var)` where `row = ci * n_years + yi`.
    values: Vec<f64>,
    /// true = observed.
    mask: Vec<bool>,
    var_index: HashMap<String, usize>,
    country_index: HashMap<String, usize>,
    year_index: HashMap<i32, usize>,
}

/// Per-variable missingness summary.
#[derive(Debug, Clone)]
pub struct MissingProfile {
    pub rows: Vec<MissingRow>,
}

#[derive(Debug, Clone)]
pub struct MissingRow {
    pub code: String,
    pub observed: usize,
    pub missing: usize,
    pub fraction: f64,
}

impl PanelDataset {
    pub fn countries(&self) -> &[String] {
        &self.countries
    }

    pub fn years(&self) -> &[i32] {
        &self.years
    }

    pub fn variables(&self) -> &[VariableMeta] {
        &self.variables
    }

    pub fn n_rows(&self) -> usize {
        self.countries.len() * self.years.len()
    }

    pub fn n_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn var_index(&self, code: &str) -> Result<usize> {
        self.var_index.get(code).copied().ok_or_else(|| Error::UnknownCode {
            kind: "variable",
            code: code.to_string(),
        })
    }

    pub fn country_of_row(&self, row: usize) -> &str {
        &self.countries[row / self.years.len()]
    }

    pub fn year_of_row(&self, row: usize) -> i32 {
        self.years[row % self.years.len()]
    }

    pub fn row_of(&self, country: &str, year: i32) -> Option<usize> {
        let ci = *self.country_index.get(country)?;
        let yi = *self.year_index.get(&year)?;
        Some(ci * self.years.len() + yi)
    }

    fn cell(&self, row: usize, var: usize) -> usize {
        row * self.variables.len() + var
    }

    /// Value of a cell, `None` when masked missing.
    pub fn get(&self, row: usize, var: usize) -> Option<f64> {
        let c = self.cell(row, var);
        if self.mask[c] {
            Some(self.values[c])
        } else {
            None
        }
    }

    pub fn is_observed(&self, row: usize, var: usize) -> bool {
        self.mask[self.cell(row, var)]
    }

    /// Raw value buffer for a variable column, paired with its mask.
    /// Missing entries hold an unspecified value and must be gated by the mask.
    pub fn column(&self, var: usize) -> (Vec<f64>, Vec<bool>) {
        let n = self.n_rows();
        let mut vals = Vec::with_capacity(n);
        let mut mask = Vec::with_capacity(n);
        for row in 0..n {
            let c = self.cell(row, var);
            vals.push(self.values[c]);
            mask.push(self.mask[c]);
        }
        (vals, mask)
    }

    /// Masked-true values of `var` in stable (country, year) row order.
    pub fn observed_values(&self, var: &str) -> Result<Vec<f64>> {
        let v = self.var_index(var)?;
        let mut out = Vec::new();
        for row in 0..self.n_rows() {
            if let Some(x) = self.get(row, v) {
                out.push(x);
            }
        }
        Ok(out)
    }

    /// Per-variable observed/missing counts and fractions.
    pub fn missing_profile(&self) -> MissingProfile {
        let total = self.n_rows();
        let rows = self
            .variables
            .iter()
            .enumerate()
            .map(|(v, meta)| {
                let observed = (0..total).filter(|&row| self.is_observed(row, v)).count();
                let missing = total - observed;
                MissingRow {
                    code: meta.code.clone(),
                    observed,
                    missing,
                    fraction: if total == 0 {
                        0.0
                    } else {
                        missing as f64 / total as f64
                    },
                }
            })
            .collect();
        MissingProfile { rows }
    }

    pub fn missing_count(&self, var: usize) -> usize {
        (0..self.n_rows()).filter(|&row| !self.is_observed(row, var)).count()
    }

    /// Derived dataset with the given cells overwritten as observed.
    /// Cells not listed keep their value and mask.
    pub fn with_cells(&self, cells: &[(usize, usize, f64)]) -> PanelDataset {
        let mut ds = self.clone();
        for &(row, var, value) in cells {
            let c = row * ds.variables.len() + var;
            ds.values[c] = value;
            ds.mask[c] = true;
        }
        ds
    }

    /// Derived dataset with the given cells masked missing.
    pub fn with_masked(&self, cells: &[(usize, usize)]) -> PanelDataset {
        let mut ds = self.clone();
        for &(row, var) in cells {
            let c = row * ds.variables.len() + var;
            ds.mask[c] = false;
        }
        ds
    }

    /// Derived dataset keeping only the listed variables (by code), in the
    /// order given.
    pub fn select_variables(&self, codes: &[String]) -> Result<PanelDataset> {
        let idxs = codes
            .iter()
            .map(|c| self.var_index(c))
            .collect::<Result<Vec<_>>>()?;
        let metas: Vec<VariableMeta> = idxs.iter().map(|&i| self.variables[i].clone()).collect();
        let n = self.n_rows();
        let mut values = Vec::with_capacity(n * idxs.len());
        let mut mask = Vec::with_capacity(n * idxs.len());
        for row in 0..n {
            for &v in &idxs {
                let c = self.cell(row, v);
                values.push(self.values[c]);
                mask.push(self.mask[c]);
            }
        }
        Ok(PanelDataset {
            countries: self.countries.clone(),
            years: self.years.clone(),
            variables: metas.clone(),
            values,
            mask,
            var_index: index_of(metas.iter().map(|m| m.code.clone())),
            country_index: self.country_index.clone(),
            year_index: self.year_index.clone(),
        })
    }

    /// Derived dataset keeping only the listed rows, in input order.
    pub fn select_rows(&self, rows: &[usize]) -> PanelDataset {
        // The row subset breaks the rectangular country x year product only
        // when entire countries or years drop out; cells for retained
        // (country, year) pairs not in `rows` become all-missing.
        let keep: std::collections::HashSet<usize> = rows.iter().copied().collect();
        let mut ds = self.clone();
        for row in 0..self.n_rows() {
            if !keep.contains(&row) {
                for v in 0..self.n_vars() {
                    let c = row * ds.variables.len() + v;
                    ds.mask[c] = false;
                }
            }
        }
        ds
    }
}

fn index_of(codes: impl Iterator<Item = String>) -> HashMap<String, usize> {
    codes.enumerate().map(|(i, c)| (c, i)).collect()
}

/// Materialize a rectangular panel from addressed cell records.
/// Unaddressed cells are masked missing.
pub fn build_panel(
    countries: Vec<String>,
    years: Vec<i32>,
    variables: Vec<VariableMeta>,
    cells: &[CellRecord],
) -> Result<PanelDataset> {
    if countries.is_empty() || years.is_empty() {
        return Err(Error::InvalidConfig(
            "country and year lists must be non-empty".into(),
        ));
    }
    let country_index = index_of(countries.iter().cloned());
    if country_index.len() != countries.len() {
        return Err(Error::InvalidConfig("duplicate country code".into()));
    }
    let year_index: HashMap<i32, usize> =
        years.iter().enumerate().map(|(i, &y)| (y, i)).collect();
    if year_index.len() != years.len() {
        return Err(Error::InvalidConfig("duplicate year".into()));
    }
    let var_index = index_of(variables.iter().map(|m| m.code.clone()));
    if var_index.len() != variables.len() {
        return Err(Error::InvalidConfig("duplicate variable code".into()));
    }

    let n_rows = countries.len() * years.len();
    let n_vars = variables.len();
    let mut values = vec![0.0; n_rows * n_vars];
    let mut mask = vec![false; n_rows * n_vars];

    for rec in cells {
        let ci = *country_index.get(&rec.country).ok_or_else(|| Error::UnknownCode {
            kind: "country",
            code: rec.country.clone(),
        })?;
        let yi = *year_index.get(&rec.year).ok_or_else(|| Error::UnknownCode {
            kind: "year",
            code: rec.year.to_string(),
        })?;
        let vi = *var_index.get(&rec.variable).ok_or_else(|| Error::UnknownCode {
            kind: "variable",
            code: rec.variable.clone(),
        })?;
        if !rec.value.is_finite() {
            return Err(Error::NonFiniteValue {
                country: rec.country.clone(),
                year: rec.year,
                variable: rec.variable.clone(),
                value: rec.value,
            });
        }
        let cell = (ci * years.len() + yi) * n_vars + vi;
        if mask[cell] {
            return Err(Error::DuplicateCell {
                country: rec.country.clone(),
                year: rec.year,
                variable: rec.variable.clone(),
            });
        }
        values[cell] = rec.value;
        mask[cell] = true;
    }

    Ok(PanelDataset {
        countries,
        years,
        variables,
        values,
        mask,
        var_index,
        country_index,
        year_index,
    })
}
