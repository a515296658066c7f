//! Tabular datasets: column schema, CSV parsing/serialization, and missing
//! value handling.
//!
//! The CSV dialect is deliberately strict: a header row naming every column,
//! numeric fields, and empty fields for missing values. Quoting is not
//! supported, so column names must not contain commas, quotes, or line
//! breaks. Missing values are stored as NaN internally and tracked per
//! column; estimation later drops incomplete rows pair by pair.

use crate::error::{Error, Result};
use crate::marginals::MarginalKind;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Name and declared kind of one dataset column.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnSchema {
    pub name: String,
    pub kind: MarginalKind,
}

impl ColumnSchema {
    pub fn new(name: impl Into<String>, kind: MarginalKind) -> Self {
        ColumnSchema {
            name: name.into(),
            kind,
        }
    }
}

/// Tolerance when validating that declared-discrete values are integral.
const DISCRETE_INTEGER_TOL: f64 = 1e-9;

/// A schema plus column-major data; missing entries are NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    schema: Vec<ColumnSchema>,
    columns: Vec<Vec<f64>>,
    n_rows: usize,
}

fn validate_schema(schema: &[ColumnSchema]) -> Result<()> {
    if schema.is_empty() {
        return Err(Error::Schema("schema has no columns".into()));
    }
    let mut seen = std::collections::HashSet::new();
    for col in schema {
        if col.name.is_empty() {
            return Err(Error::Schema("column names must be non-empty".into()));
        }
        if col.name.contains([',', '"', '\n', '\r']) {
            return Err(Error::Schema(format!(
                "column name {:?} contains a comma, quote, or line break",
                col.name
            )));
        }
        if !seen.insert(col.name.as_str()) {
            return Err(Error::Schema(format!(
                "duplicate column name {:?}",
                col.name
            )));
        }
    }
    Ok(())
}

impl Dataset {
    /// Builds a dataset from column-major data, validating lengths, the
    /// schema, and integrality of declared-discrete columns (within 1e-9;
    /// values are stored rounded).
    pub fn new(schema: Vec<ColumnSchema>, mut columns: Vec<Vec<f64>>) -> Result<Self> {
        validate_schema(&schema)?;
        if columns.len() != schema.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} schema columns but {} data columns",
                schema.len(),
                columns.len()
            )));
        }
        let n_rows = columns.first().map_or(0, Vec::len);
        for (j, col) in columns.iter_mut().enumerate() {
            if col.len() != n_rows {
                return Err(Error::DimensionMismatch(format!(
                    "column {:?} has {} rows, expected {}",
                    schema[j].name,
                    col.len(),
                    n_rows
                )));
            }
            for (i, v) in col.iter_mut().enumerate() {
                if v.is_nan() {
                    continue;
                }
                if !v.is_finite() {
                    return Err(Error::Schema(format!(
                        "column {:?} has a non-finite value at row {}",
                        schema[j].name,
                        i + 1
                    )));
                }
                if schema[j].kind == MarginalKind::Discrete {
                    let rounded = v.round();
                    if (*v - rounded).abs() > DISCRETE_INTEGER_TOL {
                        return Err(Error::Schema(format!(
                            "column {:?} is declared discrete but row {} holds {}",
                            schema[j].name,
                            i + 1,
                            v
                        )));
                    }
                    *v = rounded;
                }
            }
        }
        Ok(Dataset {
            schema,
            columns,
            n_rows,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.schema.len()
    }

    pub fn schema(&self) -> &[ColumnSchema] {
        &self.schema
    }

    pub fn name(&self, j: usize) -> &str {
        &self.schema[j].name
    }

    pub fn kind(&self, j: usize) -> MarginalKind {
        self.schema[j].kind
    }

    /// Column `j` with NaN for missing entries.
    pub fn column(&self, j: usize) -> &[f64] {
        &self.columns[j]
    }

    /// Number of missing entries in column `j`.
    pub fn missing_count(&self, j: usize) -> usize {
        self.columns[j].iter().filter(|v| v.is_nan()).count()
    }

    /// Rows where both columns are present, as two aligned vectors.
    pub fn pairwise_complete(&self, j: usize, k: usize) -> (Vec<f64>, Vec<f64>) {
        let (cj, ck) = (&self.columns[j], &self.columns[k]);
        let mut xs = Vec::with_capacity(self.n_rows);
        let mut ys = Vec::with_capacity(self.n_rows);
        for i in 0..self.n_rows {
            if !cj[i].is_nan() && !ck[i].is_nan() {
                xs.push(cj[i]);
                ys.push(ck[i]);
            }
        }
        (xs, ys)
    }

    /// Serializes to the strict CSV dialect (header plus one row per record);
    /// missing entries become empty fields.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        let names: Vec<&str> = self.schema.iter().map(|c| c.name.as_str()).collect();
        out.push_str(&names.join(","));
        out.push('\n');
        for i in 0..self.n_rows {
            for (j, col) in self.columns.iter().enumerate() {
                if j > 0 {
                    out.push(',');
                }
                if !col[i].is_nan() {
                    out.push_str(&fmt_sig10(col[i]));
                }
            }
            out.push('\n');
        }
        out
    }

    /// Parses the strict CSV dialect against `schema`; the header must match
    /// the schema names exactly and in order.
    pub fn from_csv_str(text: &str, schema: Vec<ColumnSchema>) -> Result<Self> {
        validate_schema(&schema)?;
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or(Error::CsvParse {
            line: 1,
            message: "file is empty".into(),
        })?;
        let header_names: Vec<&str> = header.split(',').map(str::trim).collect();
        if header_names.len() != schema.len() {
            return Err(Error::CsvParse {
                line: 1,
                message: format!(
                    "header has {} columns but schema declares {}",
                    header_names.len(),
                    schema.len()
                ),
            });
        }
        for (j, (have, want)) in header_names.iter().zip(&schema).enumerate() {
            if *have != want.name {
                return Err(Error::CsvParse {
                    line: 1,
                    message: format!(
                        "header column {} is {:?} but schema declares {:?}",
                        j + 1,
                        have,
                        want.name
                    ),
                });
            }
        }
        let mut columns: Vec<Vec<f64>> = vec![Vec::new(); schema.len()];
        for (idx, line) in lines {
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != schema.len() {
                return Err(Error::CsvParse {
                    line: idx + 1,
                    message: format!("row has {} fields, expected {}", fields.len(), schema.len()),
                });
            }
            for (j, field) in fields.iter().enumerate() {
                let field = field.trim();
                if field.is_empty() {
                    columns[j].push(f64::NAN);
                } else {
                    let v: f64 = field.parse().map_err(|_| Error::CsvParse {
                        line: idx + 1,
                        message: format!(
                            "column {:?} holds non-numeric field {:?}",
                            schema[j].name, field
                        ),
                    })?;
                    columns[j].push(v);
                }
            }
        }
        Dataset::new(schema, columns)
    }
}

/// Reads a dataset from `path` using `schema` to validate and type columns.
pub fn load_csv(path: &Path, schema: Vec<ColumnSchema>) -> Result<Dataset> {
    let text = std::fs::read_to_string(path)?;
    Dataset::from_csv_str(&text, schema)
}

/// Reads a schema JSON file: an array of `{"name": ..., "kind": ...}` objects.
pub fn load_schema(path: &Path) -> Result<Vec<ColumnSchema>> {
    let text = std::fs::read_to_string(path)?;
    let schema: Vec<ColumnSchema> = serde_json::from_str(&text)?;
    validate_schema(&schema)?;
    Ok(schema)
}

/// Serializes a schema to pretty-printed JSON.
pub fn schema_to_json(schema: &[ColumnSchema]) -> Result<String> {
    Ok(serde_json::to_string_pretty(schema)?)
}

/// Formats a float with 10 significant digits, enough to round-trip
/// estimator comparisons; integers in range print in fixed notation.
pub fn fmt_sig10(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let mag = x.abs().log10().floor() as i32;
    if (-4..16).contains(&mag) {
        let decimals = (9 - mag).max(0) as usize;
        format!("{:.*}", decimals, x)
    } else {
        format!("{:.9e}", x)
    }
}
