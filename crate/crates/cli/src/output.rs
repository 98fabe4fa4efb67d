//! Write-once output files and number formatting.

use std::fs::{File, OpenOptions};
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::{CliError, CliResult};

/// 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Creates `path`, refusing to replace an existing file unless `force`.
pub fn open_output(path: &Path, force: bool) -> CliResult<BufWriter<File>> {
    let mut opts = OpenOptions::new();
    opts.write(true);
    if force {
        opts.create(true).truncate(true);
    } else {
        opts.create_new(true);
    }
    match opts.open(path) {
        Ok(f) => Ok(BufWriter::new(f)),
        Err(e) if e.kind() == io::ErrorKind::AlreadyExists => Err(CliError::Exists(path.to_path_buf())),
        Err(source) => Err(CliError::Write {
            path: path.to_path_buf(),
            source,
        }),
    }
}

pub fn write_bytes(path: &Path, force: bool, bytes: &[u8]) -> CliResult<()> {
    let mut f = open_output(path, force)?;
    f.write_all(bytes)
        .and_then(|_| f.flush())
        .map_err(|source| CliError::Write {
            path: path.to_path_buf(),
            source,
        })
}

pub fn to_json(value: &impl Serialize) -> CliResult<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Serialize(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Writes a JSON report to `path`, or to stdout when no path is given.
pub fn emit_json(value: &impl Serialize, path: Option<&Path>, force: bool) -> CliResult<()> {
    let text = to_json(value)?;
    match path {
        Some(p) => write_bytes(p, force, text.as_bytes()),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|source| CliError::Write {
                    path: "<stdout>".into(),
                    source,
                })
        }
    }
}

/// Plain CSV table; cells are already formatted.
pub fn write_table(path: &Path, force: bool, header: &[&str], rows: &[Vec<String>]) -> CliResult<()> {
    let file = open_output(path, force)?;
    let wrap = |e: csv::Error| CliError::Write {
        path: path.to_path_buf(),
        source: e.into(),
    };
    let mut w = csv::Writer::from_writer(file);
    w.write_record(header).map_err(wrap)?;
    for row in rows {
        w.write_record(row).map_err(wrap)?;
    }
    w.flush().map_err(|source| CliError::Write {
        path: path.to_path_buf(),
        source,
    })
}
