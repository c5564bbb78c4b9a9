//! CSV formats for count tables and Monte Carlo histograms.

use std::fmt::Write as _;
use std::path::Path;

use num_bigint::BigUint;
use sha2::{Digest, Sha256};
use svperc_core::montecarlo::Histogram;
use svperc_core::{LatticeConfig, SvTable};

use crate::error::{CliError, CliResult};

pub const TABLE_MAGIC: &str = "# svtable v1";
pub const HISTOGRAM_HEADER: &str = "n,m,count";

/// `# svtable v1 d=<d> n_max=<N> pc=<p_c>` followed by `n,m,count` rows in
/// `(n, m)` order. `p_c` is printed in shortest round-trip form.
pub fn table_to_csv(table: &SvTable) -> String {
    let c = table.config();
    let mut out = format!(
        "{TABLE_MAGIC} d={} n_max={} pc={}\n",
        c.dim(),
        table.n_max(),
        c.p_c()
    );
    for ((n, m), count) in table.cells() {
        writeln!(out, "{n},{m},{count}").unwrap();
    }
    out
}

pub fn table_from_csv(text: &str, path: &Path) -> CliResult<SvTable> {
    let err = |line: usize, message: String| CliError::Format {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| err(1, "empty file".into()))?;
    let rest = header
        .strip_prefix(TABLE_MAGIC)
        .ok_or_else(|| err(1, format!("expected header starting with `{TABLE_MAGIC}`")))?;
    let (mut d, mut n_max, mut pc) = (None, None, None);
    for field in rest.split_whitespace() {
        let (key, value) = field
            .split_once('=')
            .ok_or_else(|| err(1, format!("bad header field `{field}`")))?;
        let bad = || err(1, format!("bad value in `{field}`"));
        match key {
            "d" => d = Some(value.parse::<usize>().map_err(|_| bad())?),
            "n_max" => n_max = Some(value.parse::<usize>().map_err(|_| bad())?),
            "pc" => pc = Some(value.parse::<f64>().map_err(|_| bad())?),
            _ => return Err(err(1, format!("unknown header field `{key}`"))),
        }
    }
    let (Some(d), Some(n_max), Some(pc)) = (d, n_max, pc) else {
        return Err(err(1, "header needs d, n_max and pc".into()));
    };
    let config = LatticeConfig::new(d, pc)?;
    let mut cells = Vec::new();
    let mut last: Option<(usize, usize)> = None;
    for (i, line) in lines {
        let lineno = i + 1;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(err(lineno, format!("expected `n,m,count`, got `{line}`")));
        }
        let n: usize = fields[0].parse().map_err(|_| err(lineno, "bad n".into()))?;
        let m: usize = fields[1].parse().map_err(|_| err(lineno, "bad m".into()))?;
        let count: BigUint = fields[2].parse().map_err(|_| err(lineno, "bad count".into()))?;
        if last.is_some_and(|prev| prev >= (n, m)) {
            return Err(err(lineno, format!("row ({n},{m}) out of order")));
        }
        last = Some((n, m));
        cells.push(((n, m), count));
    }
    Ok(SvTable::from_cells(config, n_max, cells)?)
}

pub fn read_file(path: &Path) -> CliResult<Vec<u8>> {
    std::fs::read(path).map_err(|e| CliError::io(path, e))
}

pub fn write_file(path: &Path, bytes: &[u8]) -> CliResult<()> {
    std::fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

/// A table read from disk with the SHA-256 of its bytes.
#[derive(Debug, Clone)]
pub struct LoadedTable {
    pub table: SvTable,
    pub sha256: String,
}

pub fn load_table(path: &Path) -> CliResult<LoadedTable> {
    let bytes = read_file(path)?;
    let text = String::from_utf8(bytes.clone()).map_err(|_| CliError::Format {
        path: path.to_path_buf(),
        line: 0,
        message: "not UTF-8".into(),
    })?;
    Ok(LoadedTable {
        table: table_from_csv(&text, path)?,
        sha256: sha256_hex(&bytes),
    })
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .fold(String::with_capacity(64), |mut s, b| {
            write!(s, "{b:02x}").unwrap();
            s
        })
}

/// `n,m,count` rows of the histogram cells; the overflow buckets live in the
/// JSON summary.
pub fn histogram_to_csv(hist: &Histogram) -> String {
    let mut out = format!("{HISTOGRAM_HEADER}\n");
    for ((n, m), c) in hist.cells() {
        writeln!(out, "{n},{m},{c}").unwrap();
    }
    out
}

pub fn histogram_cells_from_csv(text: &str, path: &Path) -> CliResult<Vec<((usize, usize), u64)>> {
    let err = |line: usize, message: String| CliError::Format {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == HISTOGRAM_HEADER => {}
        _ => return Err(err(1, format!("expected header `{HISTOGRAM_HEADER}`"))),
    }
    lines
        .map(|(i, line)| {
            let f: Vec<&str> = line.split(',').collect();
            let parse = |s: &str| s.parse::<u64>().map_err(|_| err(i + 1, format!("bad row `{line}`")));
            if f.len() != 3 {
                return Err(err(i + 1, format!("bad row `{line}`")));
            }
            Ok(((parse(f[0])? as usize, parse(f[1])? as usize), parse(f[2])?))
        })
        .collect()
}
