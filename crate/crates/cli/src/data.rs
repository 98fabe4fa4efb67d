//! Dataset files: comma-separated with a header `i1,…,iK,y,x1,…,xd`.

use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;

use maxscore_core::{Dataset, MultiIndexGrid, Observation};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::output::{fmt_f64, open_output};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadOptions {
    /// Read outcomes coded `{0, 1}` and map 0 to −1.
    pub y01: bool,
    /// Reject files that leave cells of the inferred grid empty.
    pub require_complete: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoadSummary {
    pub records: usize,
    pub grid: Vec<usize>,
    pub cells: usize,
    pub fill_rate: f64,
    pub dim: usize,
}

impl LoadSummary {
    pub fn of(data: &Dataset) -> Self {
        Self {
            records: data.len(),
            grid: data.grid().sizes().to_vec(),
            cells: data.grid().cell_count(),
            fill_rate: data.fill_rate(),
            dim: data.dim(),
        }
    }
}

struct Layout {
    index_cols: Vec<usize>,
    y_col: usize,
    x_cols: Vec<usize>,
}

/// Positions of `prefix1, prefix2, …` in the header, which must be
/// consecutive from 1.
fn numbered(header: &csv::StringRecord, prefix: &str) -> Result<Vec<usize>, String> {
    let mut found: Vec<(usize, usize)> = Vec::new();
    for (pos, name) in header.iter().enumerate() {
        if let Some(num) = name.strip_prefix(prefix) {
            match num.parse::<usize>() {
                Ok(k) if k >= 1 && !num.starts_with('0') => found.push((k, pos)),
                _ => return Err(format!("unexpected column `{name}`")),
            }
        }
    }
    found.sort();
    for (want, &(k, _)) in found.iter().enumerate() {
        if k != want + 1 {
            return Err(format!(
                "columns {prefix}1..{prefix}{} must be numbered consecutively",
                found.len()
            ));
        }
    }
    Ok(found.into_iter().map(|(_, pos)| pos).collect())
}

fn layout(header: &csv::StringRecord) -> Result<Layout, String> {
    let index_cols = numbered(header, "i")?;
    let x_cols = numbered(header, "x")?;
    let y: Vec<usize> = header
        .iter()
        .enumerate()
        .filter(|(_, n)| *n == "y")
        .map(|(p, _)| p)
        .collect();
    if y.len() != 1 {
        return Err("header needs exactly one `y` column".into());
    }
    if index_cols.is_empty() {
        return Err("header has no index columns i1, i2, …".into());
    }
    if x_cols.is_empty() {
        return Err("header has no covariate columns x1, x2, …".into());
    }
    let known = index_cols.len() + x_cols.len() + 1;
    if known != header.len() {
        let extra = header
            .iter()
            .find(|n| *n != "y" && !n.starts_with('i') && !n.starts_with('x'))
            .unwrap_or("");
        return Err(format!("unexpected column `{extra}`"));
    }
    Ok(Layout {
        index_cols,
        y_col: y[0],
        x_cols,
    })
}

/// Parses a dataset; `path` only labels error messages.
pub fn read_dataset(reader: impl Read, path: &Path, options: LoadOptions) -> CliResult<Dataset> {
    let fail = |message: String| CliError::Data {
        path: path.to_path_buf(),
        message,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = rdr.headers().map_err(|e| fail(e.to_string()))?.clone();
    let lay = layout(&header).map_err(fail)?;
    let k = lay.index_cols.len();

    let mut records = Vec::new();
    let mut first_line: HashMap<Vec<u32>, u64> = HashMap::new();
    let mut max_index = vec![0u32; k];
    for row in rdr.records() {
        let row = row.map_err(|e| fail(e.to_string()))?;
        let line = row.position().map_or(0, |p| p.line());
        let field = |pos: usize| row.get(pos).unwrap_or("");

        let mut index = Vec::with_capacity(k);
        for (j, &pos) in lay.index_cols.iter().enumerate() {
            match field(pos).parse::<u32>() {
                Ok(v) if v >= 1 => {
                    max_index[j] = max_index[j].max(v);
                    index.push(v);
                }
                _ => {
                    return Err(fail(format!(
                        "line {line}, column i{}: index `{}` is not a positive integer",
                        j + 1,
                        field(pos)
                    )))
                }
            }
        }
        let raw_y = field(lay.y_col);
        let y = match (raw_y, options.y01) {
            ("1", _) => 1,
            ("-1", false) => -1,
            ("0", true) => -1,
            _ => {
                let allowed = if options.y01 { "0 or 1" } else { "-1 or 1" };
                return Err(fail(format!(
                    "line {line}: outcome y = `{raw_y}` is not {allowed}"
                )));
            }
        };
        let mut x = Vec::with_capacity(lay.x_cols.len());
        for (l, &pos) in lay.x_cols.iter().enumerate() {
            let v: f64 = field(pos).parse().map_err(|_| {
                fail(format!(
                    "line {line}, column x{}: `{}` is not a number",
                    l + 1,
                    field(pos)
                ))
            })?;
            if !v.is_finite() {
                return Err(fail(format!(
                    "line {line}, column x{}: non-finite value `{}`",
                    l + 1,
                    field(pos)
                )));
            }
            x.push(v);
        }
        if let Some(prev) = first_line.insert(index.clone(), line) {
            return Err(fail(format!(
                "cell {index:?} appears on lines {prev} and {line}"
            )));
        }
        records.push((index, Observation { y, x }));
    }
    if records.is_empty() {
        return Err(CliError::Core(maxscore_core::Error::EmptyDataset));
    }
    let grid = MultiIndexGrid::new(max_index.iter().map(|&m| m as usize).collect())?;
    let data = Dataset::from_records(grid, lay.x_cols.len(), records)?;
    if options.require_complete && !data.is_complete() {
        return Err(fail(format!(
            "{} of {} cells are present; a complete grid is required",
            data.len(),
            data.grid().cell_count()
        )));
    }
    Ok(data)
}

pub fn load_dataset(path: &Path, options: LoadOptions) -> CliResult<Dataset> {
    let file = std::fs::File::open(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    read_dataset(std::io::BufReader::new(file), path, options)
}

/// Writes `data` with `{:.16e}` covariates, which read back bit for bit.
pub fn write_dataset_to(data: &Dataset, out: impl Write) -> csv::Result<()> {
    let k = data.grid().k_dims();
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = (1..=k).map(|j| format!("i{j}")).collect();
    header.push("y".into());
    header.extend((1..=data.dim()).map(|l| format!("x{l}")));
    w.write_record(&header)?;
    for r in 0..data.len() {
        let mut row: Vec<String> = data.index(r).iter().map(u32::to_string).collect();
        row.push(data.y(r).to_string());
        row.extend(data.x(r).iter().map(|&v| fmt_f64(v)));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_dataset(data: &Dataset, path: &Path, force: bool) -> CliResult<()> {
    let file = open_output(path, force)?;
    write_dataset_to(data, file).map_err(|e| CliError::Write {
        path: path.to_path_buf(),
        source: e.into(),
    })
}
