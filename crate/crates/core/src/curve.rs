//! Correlation curves and their plain-text CSV form.
//!
//! The table format is a mandatory header row whose first column is `x`,
//! followed by one row per offset. Fields are separated by `,`, decimal
//! separator is `.`, lines end with LF. Values are written in Rust's shortest
//! round-trip representation, so parsing a written table is lossless.

use std::fmt::Write as _;
use std::io::{self, Write};

use serde::Serialize;

use crate::error::{domain, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub x: f64,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stderr: Option<f64>,
}

/// Correlation values on an increasing grid of normalized offsets.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationCurve {
    label: String,
    points: Vec<CurvePoint>,
}

impl CorrelationCurve {
    pub fn new(label: impl Into<String>, points: Vec<CurvePoint>) -> Result<Self> {
        if points.windows(2).any(|w| !(w[1].x > w[0].x)) {
            return Err(domain("curve offsets must be strictly increasing"));
        }
        if let Some(p) = points.iter().find(|p| matches!(p.stderr, Some(s) if !(s >= 0.0))) {
            return Err(domain(format!("negative or NaN standard error at x = {}", p.x)));
        }
        Ok(Self {
            label: label.into(),
            points,
        })
    }

    /// Evaluates `f` on every offset of `grid`.
    pub fn tabulate(
        label: impl Into<String>,
        grid: &[f64],
        mut f: impl FnMut(f64) -> Result<f64>,
    ) -> Result<Self> {
        let points = grid
            .iter()
            .map(|&x| {
                Ok(CurvePoint {
                    x,
                    value: f(x)?,
                    stderr: None,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(label, points)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn points(&self) -> &[CurvePoint] {
        &self.points
    }

    pub fn xs(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.x)
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.value)
    }
}

/// Column-oriented table sharing one `x` column.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl CurveTable {
    /// Joins curves defined on the same grid into one table. Column names are
    /// the curve labels.
    pub fn from_curves(curves: &[CorrelationCurve]) -> Result<Self> {
        let first = curves.first().ok_or_else(|| domain("no curves to tabulate"))?;
        let xs: Vec<f64> = first.xs().collect();
        for c in curves {
            if !c.xs().eq(xs.iter().copied()) {
                return Err(domain(format!("curve {} uses a different grid", c.label)));
            }
        }
        let mut columns = vec!["x".to_string()];
        columns.extend(curves.iter().map(|c| c.label.clone()));
        let rows = xs
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                std::iter::once(x)
                    .chain(curves.iter().map(|c| c.points[i].value))
                    .collect()
            })
            .collect();
        Ok(Self { columns, rows })
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            for (i, v) in row.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write!(out, "{v}").expect("writing to a String cannot fail");
            }
            out.push('\n');
        }
        out
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        w.write_all(self.to_csv_string().as_bytes())
    }

    /// Parses a table written by [`CurveTable::write_csv`]. Accepts CRLF input,
    /// rejects ragged rows, non-numeric fields and a non-increasing `x` column.
    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            message: "missing header row".into(),
        })?;
        let columns: Vec<String> = header.split(',').map(|s| s.trim().to_string()).collect();
        if columns[0] != "x" {
            return Err(Error::Parse {
                line: 1,
                message: format!("first column must be `x`, found `{}`", columns[0]),
            });
        }
        if let Some(c) = columns.iter().find(|c| c.is_empty()) {
            return Err(Error::Parse {
                line: 1,
                message: format!("empty column name `{c}`"),
            });
        }
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (i, line) in lines {
            let line_no = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            let row = line
                .split(',')
                .map(|f| {
                    f.trim().parse::<f64>().map_err(|e| Error::Parse {
                        line: line_no,
                        message: format!("`{f}`: {e}"),
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            if row.len() != columns.len() {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("expected {} fields, found {}", columns.len(), row.len()),
                });
            }
            let x = row[0];
            if !x.is_finite() || x < 0.0 {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("offset {x} is not finite and non-negative"),
                });
            }
            if let Some(prev) = rows.last() {
                if !(x > prev[0]) {
                    return Err(Error::Parse {
                        line: line_no,
                        message: "offsets must be strictly increasing".into(),
                    });
                }
            }
            rows.push(row);
        }
        Ok(Self { columns, rows })
    }
}
