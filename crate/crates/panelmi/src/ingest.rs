//! File formats: the schema text file describing variables, and wide/long
//! CSV layouts for panels.
//!
//! Schema grammar (one statement per line, `#` comments):
//!
//! ```text
//! country_column = country
//! year_column = year
//! missing_tokens = NA, .
//! years = 2005-2019
//! countries = AFG, ALB, DZA
//! variable = tscitjar; Scientific and technical journal articles; technology; +1; target
//! ```
//!
//! `countries` and `years` are optional; when absent the grid is inferred
//! from the data file (first-appearance order). The empty cell is always a
//! missing token, in addition to the configured list (default `NA`, `.`).
//!
//! Wide CSV: header `country,year,<code>...`, one row per (country, year).
//! Long CSV: header `country,year,variable,value`, one row per cell.
//! Both writers emit every cell, leaving the value empty when missing, so
//! a full-precision write/read cycle reproduces the dataset bit-exactly.

use std::collections::HashSet;
use std::path::Path;

use crate::datamodel::{build_panel, Capacity, CellRecord, PanelDataset, Role, VariableMeta};
use crate::error::{Error, Result};

/// Parsed schema file.
#[derive(Debug, Clone)]
pub struct SchemaFile {
    pub country_column: String,
    pub year_column: String,
    /// Tokens that read as missing, besides the empty string.
    pub missing_tokens: Vec<String>,
    /// Optional declared grid extents.
    pub countries: Option<Vec<String>>,
    pub years: Option<Vec<i32>>,
    pub variables: Vec<VariableMeta>,
}

impl SchemaFile {
    pub fn variable(&self, code: &str) -> Option<&VariableMeta> {
        self.variables.iter().find(|m| m.code == code)
    }

    fn is_missing(&self, token: &str) -> bool {
        token.is_empty() || self.missing_tokens.iter().any(|t| t == token)
    }
}

/// Parse schema text. See the module docs for the grammar.
pub fn parse_schema(text: &str) -> Result<SchemaFile> {
    let mut country_column = "country".to_string();
    let mut year_column = "year".to_string();
    let mut missing_tokens = vec!["NA".to_string(), ".".to_string()];
    let mut countries = None;
    let mut years = None;
    let mut variables: Vec<VariableMeta> = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Schema {
            line: line_no,
            message: "expected 'key = value'".into(),
        })?;
        let value = value.trim();
        match key.trim() {
            "country_column" => country_column = value.to_string(),
            "year_column" => year_column = value.to_string(),
            "missing_tokens" => {
                missing_tokens = value
                    .split(',')
                    .map(|t| t.trim().to_string())
                    .filter(|t| !t.is_empty())
                    .collect();
            }
            "countries" => {
                countries = Some(
                    value
                        .split(',')
                        .map(|t| t.trim().to_string())
                        .filter(|t| !t.is_empty())
                        .collect::<Vec<_>>(),
                );
            }
            "years" => {
                years = Some(parse_years(value, line_no)?);
            }
            "variable" => {
                let parts: Vec<&str> = value.split(';').map(str::trim).collect();
                if parts.len() != 5 {
                    return Err(Error::Schema {
                        line: line_no,
                        message: "variable needs 'code; label; capacity; direction; role'".into(),
                    });
                }
                let capacity = Capacity::parse(parts[2]).ok_or_else(|| Error::Schema {
                    line: line_no,
                    message: format!("unknown capacity '{}'", parts[2]),
                })?;
                let direction = match parts[3] {
                    "+1" | "1" => 1,
                    "-1" => -1,
                    other => {
                        return Err(Error::Schema {
                            line: line_no,
                            message: format!("direction must be +1 or -1, got '{other}'"),
                        });
                    }
                };
                let role = Role::parse(parts[4]).ok_or_else(|| Error::Schema {
                    line: line_no,
                    message: format!("unknown role '{}'", parts[4]),
                })?;
                if variables.iter().any(|m| m.code == parts[0]) {
                    return Err(Error::Schema {
                        line: line_no,
                        message: format!("duplicate variable code '{}'", parts[0]),
                    });
                }
                variables.push(VariableMeta {
                    code: parts[0].to_string(),
                    label: parts[1].to_string(),
                    capacity,
                    direction,
                    role,
                });
            }
            other => {
                return Err(Error::Schema {
                    line: line_no,
                    message: format!("unknown key '{other}'"),
                });
            }
        }
    }
    if variables.is_empty() {
        return Err(Error::Schema {
            line: text.lines().count(),
            message: "schema declares no variables".into(),
        });
    }
    Ok(SchemaFile {
        country_column,
        year_column,
        missing_tokens,
        countries,
        years,
        variables,
    })
}

fn parse_years(value: &str, line: usize) -> Result<Vec<i32>> {
    let bad = |message: String| Error::Schema { line, message };
    if let Some((a, b)) = value.split_once('-') {
        if !a.trim().is_empty() && !b.trim().is_empty() && !value.contains(',') {
            let lo: i32 = a
                .trim()
                .parse()
                .map_err(|_| bad(format!("bad year '{}'", a.trim())))?;
            let hi: i32 = b
                .trim()
                .parse()
                .map_err(|_| bad(format!("bad year '{}'", b.trim())))?;
            if hi < lo {
                return Err(bad(format!("empty year range {lo}-{hi}")));
            }
            return Ok((lo..=hi).collect());
        }
    }
    value
        .split(',')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| bad(format!("bad year '{}'", t.trim())))
        })
        .collect()
}

/// Read and parse a schema file from disk.
pub fn read_schema(path: &Path) -> Result<SchemaFile> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::io(format!("reading schema {}", path.display()), e))?;
    parse_schema(&text)
}

/// Number formatting for the CSV writers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decimals {
    /// Shortest representation that round-trips the exact value.
    Full,
    Fixed(usize),
}

impl Decimals {
    pub fn parse(s: &str) -> Option<Decimals> {
        if s.eq_ignore_ascii_case("full") {
            Some(Decimals::Full)
        } else {
            s.parse().ok().map(Decimals::Fixed)
        }
    }

    fn format(&self, x: f64) -> String {
        match self {
            Decimals::Full => format!("{x}"),
            Decimals::Fixed(k) => format!("{x:.k$}", k = k),
        }
    }
}

/// Read a wide-layout CSV. The dataset's variable order follows the file's
/// column order; every non-key column must be declared in the schema.
pub fn read_wide_csv(path: &Path, schema: &SchemaFile) -> Result<PanelDataset> {
    let mut reader = csv::ReaderBuilder::new().flexible(false).from_path(path)?;
    let headers = reader.headers()?.clone();
    let mut country_col = None;
    let mut year_col = None;
    let mut var_cols: Vec<(usize, String)> = Vec::new();
    for (i, name) in headers.iter().enumerate() {
        if name == schema.country_column {
            country_col = Some(i);
        } else if name == schema.year_column {
            year_col = Some(i);
        } else {
            if schema.variable(name).is_none() {
                return Err(Error::CsvLayout(format!(
                    "column '{name}' is not declared in the schema"
                )));
            }
            var_cols.push((i, name.to_string()));
        }
    }
    let country_col = country_col.ok_or_else(|| {
        Error::CsvLayout(format!("missing country column '{}'", schema.country_column))
    })?;
    let year_col = year_col
        .ok_or_else(|| Error::CsvLayout(format!("missing year column '{}'", schema.year_column)))?;
    if var_cols.is_empty() {
        return Err(Error::CsvLayout("no variable columns in header".into()));
    }

    let mut countries: Vec<String> = schema.countries.clone().unwrap_or_default();
    let mut years: Vec<i32> = schema.years.clone().unwrap_or_default();
    let infer_countries = schema.countries.is_none();
    let infer_years = schema.years.is_none();
    let mut seen: HashSet<(String, i32)> = HashSet::new();
    let mut cells = Vec::new();

    for (ri, record) in reader.records().enumerate() {
        let record = record?;
        let file_row = ri + 2; // 1-based, counting the header
        let country = record.get(country_col).unwrap_or("").trim().to_string();
        let year_tok = record.get(year_col).unwrap_or("").trim();
        let year: i32 = year_tok.parse().map_err(|_| Error::ParseCell {
            row: file_row,
            column: schema.year_column.clone(),
            token: year_tok.to_string(),
        })?;
        if !seen.insert((country.clone(), year)) {
            return Err(Error::DuplicateRow { country, year });
        }
        if infer_countries && !countries.contains(&country) {
            countries.push(country.clone());
        }
        if infer_years && !years.contains(&year) {
            years.push(year);
        }
        for (col, code) in &var_cols {
            let token = record.get(*col).unwrap_or("").trim();
            if schema.is_missing(token) {
                continue;
            }
            let value: f64 = token.parse().map_err(|_| Error::ParseCell {
                row: file_row,
                column: code.clone(),
                token: token.to_string(),
            })?;
            cells.push(CellRecord {
                country: country.clone(),
                year,
                variable: code.clone(),
                value,
            });
        }
    }

    let variables: Vec<VariableMeta> = var_cols
        .iter()
        .map(|(_, code)| schema.variable(code).unwrap().clone())
        .collect();
    build_panel(countries, years, variables, &cells)
}

/// Write a wide-layout CSV; missing cells become empty fields.
pub fn write_wide_csv(ds: &PanelDataset, path: &Path, decimals: Decimals) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    let mut header = vec!["country".to_string(), "year".to_string()];
    header.extend(ds.variables().iter().map(|m| m.code.clone()));
    writer.write_record(&header)?;
    for row in 0..ds.n_rows() {
        let mut rec = vec![
            ds.country_of_row(row).to_string(),
            ds.year_of_row(row).to_string(),
        ];
        for v in 0..ds.n_vars() {
            rec.push(match ds.get(row, v) {
                Some(x) => decimals.format(x),
                None => String::new(),
            });
        }
        writer.write_record(&rec)?;
    }
    writer.flush().map_err(|e| Error::io("flushing csv", e))?;
    Ok(())
}

/// Read a long-layout CSV (`country,year,variable,value`). The dataset's
/// variable set and order come from the schema; unknown codes in the
/// variable column are errors.
pub fn read_long_csv(path: &Path, schema: &SchemaFile) -> Result<PanelDataset> {
    let mut reader = csv::ReaderBuilder::new().flexible(false).from_path(path)?;
    let headers = reader.headers()?.clone();
    let expect = ["country", "year", "variable", "value"];
    if headers.len() != 4 || headers.iter().zip(expect).any(|(h, e)| h != e) {
        return Err(Error::CsvLayout(
            "long layout needs the header country,year,variable,value".into(),
        ));
    }

    let mut countries: Vec<String> = schema.countries.clone().unwrap_or_default();
    let mut years: Vec<i32> = schema.years.clone().unwrap_or_default();
    let infer_countries = schema.countries.is_none();
    let infer_years = schema.years.is_none();
    let mut cells = Vec::new();

    for (ri, record) in reader.records().enumerate() {
        let record = record?;
        let file_row = ri + 2;
        let country = record.get(0).unwrap_or("").trim().to_string();
        let year_tok = record.get(1).unwrap_or("").trim();
        let year: i32 = year_tok.parse().map_err(|_| Error::ParseCell {
            row: file_row,
            column: "year".into(),
            token: year_tok.to_string(),
        })?;
        let code = record.get(2).unwrap_or("").trim().to_string();
        if schema.variable(&code).is_none() {
            return Err(Error::UnknownCode {
                kind: "variable",
                code,
            });
        }
        if infer_countries && !countries.contains(&country) {
            countries.push(country.clone());
        }
        if infer_years && !years.contains(&year) {
            years.push(year);
        }
        let token = record.get(3).unwrap_or("").trim();
        if schema.is_missing(token) {
            continue;
        }
        let value: f64 = token.parse().map_err(|_| Error::ParseCell {
            row: file_row,
            column: "value".into(),
            token: token.to_string(),
        })?;
        cells.push(CellRecord {
            country,
            year,
            variable: code,
            value,
        });
    }

    build_panel(countries, years, schema.variables.clone(), &cells)
}

/// Write a long-layout CSV with one row per cell, missing cells included
/// with an empty value field.
pub fn write_long_csv(ds: &PanelDataset, path: &Path, decimals: Decimals) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record(["country", "year", "variable", "value"])?;
    for row in 0..ds.n_rows() {
        for (v, meta) in ds.variables().iter().enumerate() {
            writer.write_record([
                ds.country_of_row(row),
                &ds.year_of_row(row).to_string(),
                &meta.code,
                &match ds.get(row, v) {
                    Some(x) => decimals.format(x),
                    None => String::new(),
                },
            ])?;
        }
    }
    writer.flush().map_err(|e| Error::io("flushing csv", e))?;
    Ok(())
}

/// Schema text matching a dataset's variables, with declared grid extents.
/// Useful for emitting a self-describing bundle next to written CSVs.
pub fn schema_text(ds: &PanelDataset) -> String {
    let mut out = String::new();
    out.push_str("country_column = country\nyear_column = year\n");
    out.push_str(&format!("countries = {}\n", ds.countries().join(", ")));
    out.push_str(&format!(
        "years = {}\n",
        ds.years()
            .iter()
            .map(|y| y.to_string())
            .collect::<Vec<_>>()
            .join(", ")
    ));
    for m in ds.variables() {
        out.push_str(&format!(
            "variable = {}; {}; {}; {}; {}\n",
            m.code,
            m.label,
            m.capacity.as_str(),
            if m.direction >= 0 { "+1" } else { "-1" },
            m.role.as_str()
        ));
    }
    out
}
