//! Verdict records and CSV emission.

use std::fmt::Write as _;
use std::io;
use std::path::Path;

use serde::Serialize;
use weakinv_core::lindblad::Trajectory;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    /// |measured − target| ≤ tolerance
    Within,
    /// measured ≥ bound − tolerance
    AtLeast,
    /// measured ≤ bound + tolerance
    AtMost,
}

/// One pass/fail record. Non-finite measurements serialize as `null` and fail.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub paper_ref_label: String,
    pub measured: f64,
    pub bound_or_target: f64,
    pub tolerance: f64,
    pub comparison: Comparison,
    pub pass: bool,
}

impl Check {
    pub fn new(name: &str, label: &str, comparison: Comparison, measured: f64, bound: f64, tolerance: f64) -> Self {
        let pass = match comparison {
            Comparison::Within => (measured - bound).abs() <= tolerance,
            Comparison::AtLeast => measured >= bound - tolerance,
            Comparison::AtMost => measured <= bound + tolerance,
        };
        Self {
            name: name.to_owned(),
            paper_ref_label: label.to_owned(),
            measured,
            bound_or_target: bound,
            tolerance,
            comparison,
            pass,
        }
    }

    pub fn within(name: &str, label: &str, measured: f64, target: f64, tolerance: f64) -> Self {
        Self::new(name, label, Comparison::Within, measured, target, tolerance)
    }

    pub fn at_least(name: &str, label: &str, measured: f64, bound: f64, tolerance: f64) -> Self {
        Self::new(name, label, Comparison::AtLeast, measured, bound, tolerance)
    }

    pub fn at_most(name: &str, label: &str, measured: f64, bound: f64, tolerance: f64) -> Self {
        Self::new(name, label, Comparison::AtMost, measured, bound, tolerance)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerdictReport {
    pub scenario: String,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    pub checks: Vec<Check>,
}

impl VerdictReport {
    pub fn from_checks(scenario: &str, checks: Vec<Check>, notes: Vec<String>) -> Self {
        debug_assert!(
            checks.iter().enumerate().all(|(i, c)| checks[..i].iter().all(|d| d.name != c.name)),
            "duplicate check names"
        );
        Self { scenario: scenario.to_owned(), pass: checks.iter().all(|c| c.pass), error: None, notes, checks }
    }

    pub fn aborted(scenario: &str, error: String) -> Self {
        Self { scenario: scenario.to_owned(), pass: false, error: Some(error), notes: Vec::new(), checks: Vec::new() }
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn write(&self, path: &Path) -> io::Result<()> {
        let mut text = serde_json::to_string_pretty(self).map_err(io::Error::other)?;
        text.push('\n');
        std::fs::write(path, text)
    }
}

pub const SERIES_HEADER: [&str; 11] = [
    "t",
    "exp_I",
    "var_I",
    "growth_formula",
    "growth_fd",
    "S_vn",
    "S_renyi",
    "bound_vn",
    "bound_renyi",
    "trace_err",
    "min_eig",
];

/// Comma-separated table with floats written to 17 significant digits.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    text: String,
    width: usize,
    rows: usize,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        let mut text = header.join(",");
        text.push('\n');
        Self { text, width: header.len(), rows: 0 }
    }

    pub fn push(&mut self, cells: &[Cell]) {
        assert_eq!(cells.len(), self.width, "row width does not match header");
        for (i, c) in cells.iter().enumerate() {
            if i > 0 {
                self.text.push(',');
            }
            match c {
                Cell::F(x) => write!(self.text, "{x:.16e}"),
                Cell::U(n) => write!(self.text, "{n}"),
            }
            .expect("writing to a String cannot fail");
        }
        self.text.push('\n');
        self.rows += 1;
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }

    pub fn write(&self, path: &Path) -> io::Result<()> {
        std::fs::write(path, &self.text)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    F(f64),
    U(u64),
}

/// The standard per-node series of a quantum trajectory.
pub fn series_table(traj: &Trajectory) -> Table {
    let mut table = Table::new(&SERIES_HEADER);
    for r in &traj.records {
        table.push(&[
            Cell::F(r.t),
            Cell::F(r.exp_i),
            Cell::F(r.var_i),
            Cell::F(r.growth_formula),
            Cell::F(r.growth_fd),
            Cell::F(r.s_vn),
            Cell::F(r.s_renyi),
            Cell::F(r.bound_vn),
            Cell::F(r.bound_renyi),
            Cell::F(r.trace_err),
            Cell::F(r.min_eig),
        ]);
    }
    table
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_through_the_table() {
        let mut t = Table::new(&["a", "b", "c"]);
        let x = 0.1 + 0.2;
        t.push(&[Cell::F(x), Cell::U(7), Cell::F(f64::NAN)]);
        let line = t.as_str().lines().nth(1).unwrap();
        let cells: Vec<&str> = line.split(',').collect();
        assert_eq!(cells[0].parse::<f64>().unwrap(), x);
        assert_eq!(cells[1], "7");
        assert!(cells[2].parse::<f64>().unwrap().is_nan());
        assert_eq!(t.rows(), 1);
    }

    #[test]
    fn comparisons() {
        assert!(Check::within("a", "", 1.0 + 1e-9, 1.0, 1e-8).pass);
        assert!(!Check::within("a", "", 1.1, 1.0, 1e-8).pass);
        assert!(Check::at_least("a", "", -1e-10, 0.0, 1e-9).pass);
        assert!(!Check::at_least("a", "", -1e-8, 0.0, 1e-9).pass);
        assert!(Check::at_most("a", "", 0.5, 1.0, 0.0).pass);
        assert!(!Check::at_most("a", "", f64::NAN, 1.0, 0.0).pass);
    }

    #[test]
    fn verdict_serializes_nan_as_null() {
        let v = VerdictReport::from_checks("spin", vec![Check::at_most("x", "label", f64::NAN, 1.0, 0.0)], Vec::new());
        let json = serde_json::to_value(&v).unwrap();
        assert!(json["checks"][0]["measured"].is_null());
        assert_eq!(json["pass"], false);
    }
}
