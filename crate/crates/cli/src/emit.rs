//! Writes a [`ResultSet`] as CSV tables or one JSON document.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::experiments::ResultSet;

#[derive(Debug, Error)]
pub enum EmitError {
    #[error("writing {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(format!("expected csv or json, got `{s}`")),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Json => "json",
        })
    }
}

/// Header plus one record per row, in order.
pub fn table_csv<T: Serialize>(rows: &[T]) -> Result<String, EmitError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| csv::Error::from(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn to_json(results: &ResultSet) -> Result<String, EmitError> {
    Ok(serde_json::to_string_pretty(results)?)
}

fn write(path: PathBuf, contents: &str, written: &mut Vec<PathBuf>) -> Result<(), EmitError> {
    fs::write(&path, contents).map_err(|source| EmitError::Io {
        path: path.display().to_string(),
        source,
    })?;
    written.push(path);
    Ok(())
}

fn file_safe(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '.' || c == '-' { c } else { '_' })
        .collect()
}

/// CSV: one file per non-empty table, `provenance.json`, and
/// `matrices/<label>.{csv,json}` when matrices were kept. JSON: a single
/// `<experiment>.json`. Returns the files written.
pub fn emit(results: &ResultSet, format: Format, dir: &Path) -> Result<Vec<PathBuf>, EmitError> {
    let mkdir = |d: &Path| {
        fs::create_dir_all(d).map_err(|source| EmitError::Io {
            path: d.display().to_string(),
            source,
        })
    };
    mkdir(dir)?;
    let mut written = Vec::new();

    if format == Format::Json {
        let name = format!("{}.json", results.provenance.experiment);
        write(dir.join(name), &to_json(results)?, &mut written)?;
        return Ok(written);
    }

    if !results.eigenvalues.is_empty() {
        write(dir.join("eigenvalues.csv"), &table_csv(&results.eigenvalues)?, &mut written)?;
    }
    if !results.capacity.is_empty() {
        write(dir.join("capacity.csv"), &table_csv(&results.capacity)?, &mut written)?;
    }
    if !results.fresnel.is_empty() {
        write(dir.join("fresnel.csv"), &table_csv(&results.fresnel)?, &mut written)?;
    }
    if !results.validation.is_empty() {
        write(dir.join("validation.csv"), &table_csv(&results.validation)?, &mut written)?;
    }
    if !results.image_validation.is_empty() {
        write(
            dir.join("image_validation.csv"),
            &table_csv(&results.image_validation)?,
            &mut written,
        )?;
    }
    let provenance = serde_json::to_string_pretty(&results.provenance)?;
    write(dir.join("provenance.json"), &provenance, &mut written)?;

    if !results.matrices.is_empty() {
        let mdir = dir.join("matrices");
        mkdir(&mdir)?;
        for m in &results.matrices {
            let stem = file_safe(&m.label);
            write(mdir.join(format!("{stem}.csv")), &m.matrix.to_csv(), &mut written)?;
            write(mdir.join(format!("{stem}.json")), &m.matrix.to_json(), &mut written)?;
        }
    }
    Ok(written)
}
