//! Plain-text ensemble dump.
//!
//! ```text
//! # specklenoise ensemble v1
//! # mean_t=0.01
//! # seed=42
//! # grid=0;0.5;16
//! realization,grid_index,re,im
//! 0,0,0.0123,-0.0456
//! ...
//! ```
//!
//! The data section lists every `(realization, grid_index)` pair exactly once,
//! in any order. Numbers use the shortest round-trip representation.

use std::fmt::Write as _;
use std::io::{self, Write};

use num_complex::Complex64;

use super::SpeckleEnsemble;
use crate::error::{Error, Result};

const MAGIC: &str = "# specklenoise ensemble v1";
const HEADER: &str = "realization,grid_index,re,im";
/// Upper bound on `R * K` accepted by the parser.
const MAX_CELLS: usize = 1 << 28;

pub fn write_ensemble_csv<W: Write>(ens: &SpeckleEnsemble, mut w: W) -> io::Result<()> {
    let grid = ens
        .grid()
        .iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(";");
    let mut buf = String::new();
    writeln!(buf, "{MAGIC}").unwrap();
    writeln!(buf, "# mean_t={}", ens.mean_t()).unwrap();
    writeln!(buf, "# seed={}", ens.seed()).unwrap();
    writeln!(buf, "# grid={grid}").unwrap();
    writeln!(buf, "{HEADER}").unwrap();
    w.write_all(buf.as_bytes())?;
    for r in 0..ens.realizations() {
        buf.clear();
        for (k, t) in ens.row(r).iter().enumerate() {
            writeln!(buf, "{r},{k},{},{}", t.re, t.im).unwrap();
        }
        w.write_all(buf.as_bytes())?;
    }
    Ok(())
}

fn err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn meta<'a>(line: Option<(usize, &'a str)>, key: &str) -> Result<(usize, &'a str)> {
    let (i, text) = line.ok_or_else(|| err(0, format!("missing `# {key}=` line")))?;
    let value = text
        .strip_prefix("# ")
        .and_then(|s| s.strip_prefix(key))
        .and_then(|s| s.strip_prefix('='))
        .ok_or_else(|| err(i + 1, format!("expected `# {key}=...`")))?;
    Ok((i + 1, value.trim()))
}

pub fn parse_ensemble_csv(text: &str) -> Result<SpeckleEnsemble> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, l)) if l.trim_end() == MAGIC => {}
        _ => return Err(err(1, format!("expected `{MAGIC}`"))),
    }
    let (ln, mean_t) = meta(lines.next(), "mean_t")?;
    let mean_t: f64 = mean_t.parse().map_err(|e| err(ln, format!("mean_t: {e}")))?;
    let (ln, seed) = meta(lines.next(), "seed")?;
    let seed: u64 = seed.parse().map_err(|e| err(ln, format!("seed: {e}")))?;
    let (ln, grid) = meta(lines.next(), "grid")?;
    let grid = grid
        .split(';')
        .map(|s| s.trim().parse::<f64>().map_err(|e| err(ln, format!("grid: {e}"))))
        .collect::<Result<Vec<f64>>>()?;
    match lines.next() {
        Some((_, l)) if l.trim_end() == HEADER => {}
        Some((i, _)) => return Err(err(i + 1, format!("expected header `{HEADER}`"))),
        None => return Err(err(5, "missing header row")),
    }

    let k_count = grid.len();
    let mut cells: Vec<(usize, usize, Complex64)> = Vec::new();
    let mut max_r = 0usize;
    for (i, line) in lines {
        let ln = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 4 {
            return Err(err(ln, format!("expected 4 fields, found {}", fields.len())));
        }
        let r: usize = fields[0].parse().map_err(|e| err(ln, format!("realization: {e}")))?;
        let k: usize = fields[1].parse().map_err(|e| err(ln, format!("grid index: {e}")))?;
        let re: f64 = fields[2].parse().map_err(|e| err(ln, format!("re: {e}")))?;
        let im: f64 = fields[3].parse().map_err(|e| err(ln, format!("im: {e}")))?;
        if k >= k_count {
            return Err(err(ln, format!("grid index {k} out of range for {k_count} points")));
        }
        if r.saturating_add(1).saturating_mul(k_count) > MAX_CELLS {
            return Err(err(ln, format!("realization index {r} too large")));
        }
        max_r = max_r.max(r);
        cells.push((r, k, Complex64::new(re, im)));
    }
    if cells.is_empty() {
        return Err(err(6, "no amplitude rows"));
    }
    let total = (max_r + 1) * k_count;
    if cells.len() != total {
        return Err(err(0, format!("expected {total} amplitudes, found {}", cells.len())));
    }
    let mut amps = vec![None; total];
    for (r, k, t) in cells {
        let slot = &mut amps[r * k_count + k];
        if slot.is_some() {
            return Err(err(0, format!("duplicate entry for realization {r}, grid index {k}")));
        }
        *slot = Some(t);
    }
    let amps = amps.into_iter().map(|t| t.expect("all cells filled")).collect();
    SpeckleEnsemble::from_parts(amps, grid, mean_t, seed)
}
