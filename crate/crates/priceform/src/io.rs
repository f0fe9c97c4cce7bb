//! CSV input and output. Floats are written in shortest round-trip form.

use std::fs;
use std::path::Path;

use priceform_core::{Grid, SampledProfile};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Deserialize)]
struct DatumRow {
    x: f64,
    f: f64,
}

/// Reads a density from a CSV with columns `x,f`. The `x` column must be
/// the nodes of a uniform grid over `[-L, L]`.
pub fn read_datum(path: &Path, half_width: f64) -> Result<SampledProfile> {
    let csv_err = |source| CliError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(csv_err)?;
    let rows: Vec<DatumRow> = reader
        .deserialize()
        .collect::<std::result::Result<_, _>>()
        .map_err(csv_err)?;
    let bad = |message: String| CliError::Parse {
        path: path.to_path_buf(),
        message,
    };
    if rows.len() < 3 {
        return Err(bad(format!("need at least 3 rows, found {}", rows.len())));
    }
    let grid = Grid::new(half_width, rows.len() - 1).map_err(|e| bad(e.to_string()))?;
    let tolerance = 1e-9 * half_width;
    for (i, row) in rows.iter().enumerate() {
        if (row.x - grid.node(i)).abs() > tolerance {
            return Err(bad(format!(
                "row {}: x = {} is not node {i} = {} of the uniform grid on [-{half_width}, {half_width}]",
                i + 2,
                row.x,
                grid.node(i)
            )));
        }
        if !row.f.is_finite() {
            return Err(bad(format!("row {}: f = {} is not finite", i + 2, row.f)));
        }
    }
    SampledProfile::new(grid, rows.into_iter().map(|r| r.f).collect()).map_err(|e| bad(e.to_string()))
}

/// Writes `header` followed by one record per row.
pub fn write_table<R: Serialize>(
    path: &Path,
    header: &[&str],
    rows: impl IntoIterator<Item = R>,
) -> Result<()> {
    let csv_err = |source| CliError::Csv {
        path: path.to_path_buf(),
        source,
    };
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|source| CliError::Write {
            path: parent.to_path_buf(),
            source,
        })?;
    }
    let mut writer = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(csv_err)?;
    writer.write_record(header).map_err(csv_err)?;
    for row in rows {
        writer.serialize(row).map_err(csv_err)?;
    }
    writer.flush().map_err(|source| CliError::Write {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|source| CliError::Write {
            path: parent.to_path_buf(),
            source,
        })?;
    }
    fs::write(path, text).map_err(|source| CliError::Write {
        path: path.to_path_buf(),
        source,
    })
}
