use std::io::{Read, Write};
use std::path::Path;

use crate::data::dataset::Dataset;
use crate::data::schema::{Feature, FeatureKind, FeatureSchema};
use crate::error::{CalexError, Result};

/// Options controlling CSV ingestion.
#[derive(Debug, Clone)]
pub struct CsvOptions {
    /// Name of the label column (must hold exactly two distinct values).
    pub label_column: String,
    /// Raw label value to map to class 1. Defaults to the lexicographically
    /// larger of the two observed values.
    pub positive_label: Option<String>,
    /// Column names to treat as categorical even if every cell parses as a
    /// number.
    pub force_categorical: Vec<String>,
    /// Declared schema. When present, column kinds and categorical value
    /// indices are taken from it instead of being inferred, and cells that
    /// do not conform are errors.
    pub schema: Option<FeatureSchema>,
}

impl CsvOptions {
    pub fn new(label_column: impl Into<String>) -> Self {
        CsvOptions {
            label_column: label_column.into(),
            positive_label: None,
            force_categorical: Vec::new(),
            schema: None,
        }
    }
}

/// Loads a dataset from a CSV file (RFC 4180: comma-separated, quoted
/// fields, first row is the header).
///
/// Without a declared schema, column kinds are inferred: a column whose
/// every cell parses as a finite real is numeric, anything else is
/// categorical with value indices assigned by first appearance. Missing
/// (empty) cells are rejected.
pub fn load_csv(path: impl AsRef<Path>, opts: &CsvOptions) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path)
        .map_err(|e| CalexError::config(format!("cannot open '{}': {e}", path.display())))?;
    load_csv_from(file, opts)
}

/// Same as [`load_csv`] but from any reader.
pub fn load_csv_from(reader: impl Read, opts: &CsvOptions) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers: Vec<String> = rdr.headers()?.iter().map(|s| s.to_string()).collect();
    let label_idx = headers
        .iter()
        .position(|h| *h == opts.label_column)
        .ok_or_else(|| {
            CalexError::data(format!("label column '{}' not found in header", opts.label_column))
        })?;
    for name in &opts.force_categorical {
        if !headers.iter().any(|h| h == name) {
            return Err(CalexError::config(format!(
                "--categorical column '{name}' not found in header"
            )));
        }
    }

    let mut records = Vec::new();
    for rec in rdr.records() {
        records.push(rec?);
    }
    if records.is_empty() {
        return Err(CalexError::data("empty dataset".to_string()));
    }
    for (i, rec) in records.iter().enumerate() {
        for (j, cell) in rec.iter().enumerate() {
            if cell.is_empty() {
                return Err(CalexError::data(format!(
                    "missing value at row {i} column '{}'",
                    headers[j]
                )));
            }
        }
    }

    let feature_cols: Vec<usize> = (0..headers.len()).filter(|&j| j != label_idx).collect();
    let label_values = resolve_label_values(&records, label_idx, opts)?;
    let y = encode_labels(&records, label_idx, &label_values, &opts.label_column)?;

    let (features, x) = match &opts.schema {
        Some(schema) => parse_with_schema(schema, &headers, &feature_cols, &records)?,
        None => infer_columns(&headers, &feature_cols, &records, &opts.force_categorical)?,
    };

    Dataset::new(
        FeatureSchema { features, label_name: opts.label_column.clone(), label_values },
        x,
        y,
    )
}

fn resolve_label_values(
    records: &[csv::StringRecord],
    label_idx: usize,
    opts: &CsvOptions,
) -> Result<[String; 2]> {
    if let Some(schema) = &opts.schema {
        return Ok(schema.label_values.clone());
    }
    let mut distinct: Vec<&str> = Vec::new();
    for rec in records {
        let raw = &rec[label_idx];
        if !distinct.contains(&raw) {
            distinct.push(raw);
        }
        if distinct.len() > 2 {
            return Err(CalexError::data(format!(
                "label column '{}' has more than two distinct values",
                opts.label_column
            )));
        }
    }
    if distinct.len() < 2 {
        return Err(CalexError::data(format!(
            "label column '{}' has a single distinct value; need exactly two",
            opts.label_column
        )));
    }
    distinct.sort_unstable();
    let mut values = [distinct[0].to_string(), distinct[1].to_string()];
    if let Some(pos) = &opts.positive_label {
        if *pos == values[0] {
            values.swap(0, 1);
        } else if *pos != values[1] {
            return Err(CalexError::config(format!(
                "positive label '{pos}' does not occur in the label column \
                 (values are '{}' and '{}')",
                values[0], values[1]
            )));
        }
    }
    Ok(values)
}

fn encode_labels(
    records: &[csv::StringRecord],
    label_idx: usize,
    label_values: &[String; 2],
    label_column: &str,
) -> Result<Vec<u8>> {
    records
        .iter()
        .enumerate()
        .map(|(i, rec)| {
            let raw = &rec[label_idx];
            if raw == label_values[0] {
                Ok(0)
            } else if raw == label_values[1] {
                Ok(1)
            } else {
                Err(CalexError::data(format!(
                    "row {i}: label '{raw}' in column '{label_column}' is not one of \
                     '{}' / '{}'",
                    label_values[0], label_values[1]
                )))
            }
        })
        .collect()
}

fn parse_finite(cell: &str) -> Option<f64> {
    cell.parse::<f64>().ok().filter(|v| v.is_finite())
}

fn parse_with_schema(
    schema: &FeatureSchema,
    headers: &[String],
    feature_cols: &[usize],
    records: &[csv::StringRecord],
) -> Result<(Vec<Feature>, Vec<Vec<f64>>)> {
    let names: Vec<&str> = feature_cols.iter().map(|&j| headers[j].as_str()).collect();
    let declared: Vec<&str> = schema.features.iter().map(|f| f.name.as_str()).collect();
    if names != declared {
        return Err(CalexError::data(format!(
            "CSV feature columns {names:?} do not match the declared schema {declared:?}"
        )));
    }
    let mut x = Vec::with_capacity(records.len());
    for (i, rec) in records.iter().enumerate() {
        let mut row = Vec::with_capacity(feature_cols.len());
        for (f, &j) in feature_cols.iter().enumerate() {
            let cell = &rec[j];
            let value = match &schema.features[f].kind {
                FeatureKind::Numeric => parse_finite(cell).ok_or_else(|| {
                    CalexError::data(format!(
                        "row {i} column '{}': cannot parse '{cell}' as a number",
                        headers[j]
                    ))
                })?,
                FeatureKind::Categorical { values } => {
                    values.iter().position(|v| v == cell).ok_or_else(|| {
                        CalexError::data(format!(
                            "row {i} column '{}': value '{cell}' is not in the declared \
                             value list",
                            headers[j]
                        ))
                    })? as f64
                }
            };
            row.push(value);
        }
        x.push(row);
    }
    Ok((schema.features.clone(), x))
}

fn infer_columns(
    headers: &[String],
    feature_cols: &[usize],
    records: &[csv::StringRecord],
    force_categorical: &[String],
) -> Result<(Vec<Feature>, Vec<Vec<f64>>)> {
    let n = records.len();
    let mut features = Vec::with_capacity(feature_cols.len());
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(feature_cols.len());
    for &j in feature_cols {
        let name = headers[j].clone();
        let forced = force_categorical.iter().any(|c| *c == name);
        let numeric: Option<Vec<f64>> = if forced {
            None
        } else {
            records.iter().map(|rec| parse_finite(&rec[j])).collect()
        };
        match numeric {
            Some(col) => {
                features.push(Feature::numeric(name));
                columns.push(col);
            }
            None => {
                // Categorical: value indices by first appearance in the file.
                let mut values: Vec<String> = Vec::new();
                let mut col = Vec::with_capacity(n);
                for rec in records {
                    let cell = &rec[j];
                    let idx = match values.iter().position(|v| v == cell) {
                        Some(idx) => idx,
                        None => {
                            values.push(cell.to_string());
                            values.len() - 1
                        }
                    };
                    col.push(idx as f64);
                }
                features.push(Feature::categorical(name, values));
                columns.push(col);
            }
        }
    }
    let x = (0..n).map(|i| columns.iter().map(|col| col[i]).collect()).collect();
    Ok((features, x))
}

/// Writes a dataset to a CSV file. Numeric cells use the shortest
/// representation that parses back to the identical value, so a write
/// followed by [`load_csv`] with the same schema round-trips exactly.
pub fn write_csv(data: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path)
        .map_err(|e| CalexError::config(format!("cannot create '{}': {e}", path.display())))?;
    write_csv_to(data, file)
}

/// Same as [`write_csv`] but to any writer.
pub fn write_csv_to(data: &Dataset, writer: impl Write) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let mut header: Vec<&str> = data.schema.features.iter().map(|f| f.name.as_str()).collect();
    header.push(data.schema.label_name.as_str());
    wtr.write_record(&header)?;
    for (row, &label) in data.x.iter().zip(&data.y) {
        let mut rec = Vec::with_capacity(row.len() + 1);
        for (j, &cell) in row.iter().enumerate() {
            match &data.schema.features[j].kind {
                FeatureKind::Numeric => rec.push(format!("{cell}")),
                FeatureKind::Categorical { values } => rec.push(values[cell as usize].clone()),
            }
        }
        rec.push(data.schema.label_values[label as usize].clone());
        wtr.write_record(&rec)?;
    }
    wtr.flush()?;
    Ok(())
}
