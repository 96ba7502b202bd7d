//! Plain-text Betti tables for reference data.
//!
//! ```text
//! # CP^1 x CP^1
//! k j | 0 2 4 6 7
//! 1 0 | 1 2 1 . .
//! 3 1 | . . . . 2
//! ```
//!
//! The header lists the degrees that label the columns. Each row holds the
//! weight-`j` Betti numbers of `C_k`, one line per weight as in a printed
//! table; `.` stands for zero and weights with no classes may be left out.
//! Lines starting with `#` are comments. Two tables are compared as sets of
//! non-zero `(k, i, j)` entries, so column choice and row order do not matter.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::cohomology::BettiTable2;
use crate::error::{Error, Result};

/// Non-zero `β_{i,j}(C_k)` keyed by `(k, i, j)`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GoldenTable {
    entries: BTreeMap<(usize, u32, u32), u64>,
}

impl GoldenTable {
    pub fn from_tables(tables: &[BettiTable2]) -> Self {
        let entries = tables
            .iter()
            .flat_map(|t| t.entries().map(move |((i, j), b)| ((t.k(), i, j), b)))
            .collect();
        Self { entries }
    }

    pub fn get(&self, k: usize, i: u32, j: u32) -> u64 {
        self.entries.get(&(k, i, j)).copied().unwrap_or(0)
    }

    pub fn entries(&self) -> impl Iterator<Item = ((usize, u32, u32), u64)> + '_ {
        self.entries.iter().map(|(&key, &b)| (key, b))
    }

    /// Values of `k` with at least one row.
    pub fn ks(&self) -> BTreeSet<usize> {
        self.entries.keys().map(|(k, _, _)| *k).collect()
    }

    /// Only the rows with `k` in `ks`.
    pub fn restrict(&self, ks: &BTreeSet<usize>) -> Self {
        let entries = self
            .entries
            .iter()
            .filter(|((k, _, _), _)| ks.contains(k))
            .map(|(&key, &b)| (key, b))
            .collect();
        Self { entries }
    }
}

/// A single disagreement between expected and computed tables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mismatch {
    pub k: usize,
    pub i: u32,
    pub j: u32,
    pub expected: u64,
    pub actual: u64,
}

impl std::fmt::Display for Mismatch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "k={} i={} j={}: expected {}, computed {}",
            self.k, self.i, self.j, self.expected, self.actual
        )
    }
}

/// Entries that differ, restricted to the values of `k` the golden table covers.
pub fn compare(golden: &GoldenTable, computed: &GoldenTable) -> Vec<Mismatch> {
    let ks = golden.ks();
    let computed = computed.restrict(&ks);
    let keys: BTreeSet<(usize, u32, u32)> = golden.entries.keys().chain(computed.entries.keys()).copied().collect();
    keys.into_iter()
        .filter_map(|(k, i, j)| {
            let (expected, actual) = (golden.get(k, i, j), computed.get(k, i, j));
            (expected != actual).then_some(Mismatch {
                k,
                i,
                j,
                expected,
                actual,
            })
        })
        .collect()
}

fn golden_err(line: usize, message: impl Into<String>) -> Error {
    Error::Golden(format!("line {line}: {}", message.into()))
}

pub fn parse_golden(text: &str) -> Result<GoldenTable> {
    let mut columns: Option<Vec<u32>> = None;
    let mut table = GoldenTable::default();
    let mut seen = BTreeSet::new();
    for (n, raw) in text.lines().enumerate() {
        let line_no = n + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (left, right) = line
            .split_once('|')
            .ok_or_else(|| golden_err(line_no, "expected '|' separating labels from values"))?;
        let labels: Vec<&str> = left.split_whitespace().collect();
        let cells: Vec<&str> = right.split_whitespace().collect();
        let Some(cols) = &columns else {
            if labels != ["k", "j"] {
                return Err(golden_err(line_no, "header must start with 'k j |'"));
            }
            let degrees = cells
                .iter()
                .map(|c| {
                    c.parse::<u32>()
                        .map_err(|_| golden_err(line_no, format!("bad degree '{c}'")))
                })
                .collect::<Result<Vec<_>>>()?;
            if degrees.windows(2).any(|w| w[0] >= w[1]) {
                return Err(golden_err(line_no, "column degrees must increase"));
            }
            columns = Some(degrees);
            continue;
        };
        let [k, j] = labels[..] else {
            return Err(golden_err(line_no, "row must start with 'k j |'"));
        };
        let k: usize = k.parse().map_err(|_| golden_err(line_no, format!("bad k '{k}'")))?;
        let j: u32 = j
            .parse()
            .map_err(|_| golden_err(line_no, format!("bad weight '{j}'")))?;
        if k == 0 {
            return Err(golden_err(line_no, "k must be positive"));
        }
        if !seen.insert((k, j)) {
            return Err(golden_err(line_no, format!("duplicate row k={k} j={j}")));
        }
        if cells.len() != cols.len() {
            return Err(golden_err(
                line_no,
                format!("expected {} values, found {}", cols.len(), cells.len()),
            ));
        }
        for (&i, cell) in cols.iter().zip(&cells) {
            if *cell == "." {
                continue;
            }
            let b: u64 = cell
                .parse()
                .map_err(|_| golden_err(line_no, format!("bad Betti number '{cell}'")))?;
            if b > 0 {
                table.entries.insert((k, i, j), b);
            }
        }
    }
    if columns.is_none() {
        return Err(Error::Golden("missing header line".into()));
    }
    Ok(table)
}

/// Render with one column per degree that carries a class.
pub fn emit_golden(table: &GoldenTable) -> String {
    let degrees: BTreeSet<u32> = table.entries.keys().map(|(_, i, _)| *i).collect();
    let rows: BTreeSet<(usize, u32)> = table.entries.keys().map(|(k, _, j)| (*k, *j)).collect();
    let width = table
        .entries
        .values()
        .map(|b| b.to_string().len())
        .chain(degrees.iter().map(|d| d.to_string().len()))
        .max()
        .unwrap_or(1);
    let label = rows.iter().map(|(k, _)| k.to_string().len()).max().unwrap_or(1);

    let mut out = String::new();
    let _ = write!(out, "{:<label$} j |", "k");
    for d in &degrees {
        let _ = write!(out, " {d:>width$}");
    }
    out.push('\n');
    for (k, j) in rows {
        let _ = write!(out, "{k:<label$} {j} |");
        for &i in &degrees {
            match table.get(k, i, j) {
                0 => {
                    let _ = write!(out, " {:>width$}", ".");
                }
                b => {
                    let _ = write!(out, " {b:>width$}");
                }
            }
        }
        out.push('\n');
    }
    out
}
