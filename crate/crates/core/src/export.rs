//! CSV tables. Every table starts with the schema line, then a column header.
//! Numbers use Rust's shortest round-trip formatting, so output is byte-stable.

use std::fmt::Write as _;

use crate::interferometer::{CharFuncSeries, DftEstimate};
use crate::quench::BlochTrajectory;
use crate::workstats::IdentityReport;

pub const SCHEMA_LINE: &str = "# qarrow-schema 1";

/// Seconds to μs, rounded to the picosecond so that `100e-6` prints as `100.0`.
pub fn to_micros(t: f64) -> f64 {
    (t * 1e12).round() / 1e6
}

#[derive(Debug, Clone, PartialEq)]
pub enum Field {
    Num(f64),
    Int(i64),
    Text(String),
}

impl From<f64> for Field {
    fn from(x: f64) -> Self {
        Field::Num(x)
    }
}

impl From<usize> for Field {
    fn from(x: usize) -> Self {
        Field::Int(x as i64)
    }
}

impl From<&str> for Field {
    fn from(x: &str) -> Self {
        Field::Text(x.to_string())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    columns: Vec<String>,
    rows: Vec<Vec<Field>>,
}

impl CsvTable {
    pub fn new(columns: &[&str]) -> Self {
        CsvTable { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Panics if the row width does not match the header.
    pub fn push(&mut self, row: Vec<Field>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn extend(&mut self, other: CsvTable) {
        assert_eq!(self.columns, other.columns, "column mismatch");
        self.rows.extend(other.rows);
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(SCHEMA_LINE);
        out.push('\n');
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            for (k, f) in row.iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                match f {
                    Field::Num(x) => write!(out, "{x:?}").unwrap(),
                    Field::Int(i) => write!(out, "{i}").unwrap(),
                    Field::Text(s) => out.push_str(s),
                }
            }
            out.push('\n');
        }
        out
    }
}

pub fn series_table(series: &CharFuncSeries) -> CsvTable {
    let mut t = CsvTable::new(&["s", "u_seconds", "re_chi", "im_chi"]);
    for ((s, u), z) in series.s_parameter.iter().zip(&series.u_grid).zip(&series.samples) {
        t.push(vec![(*s).into(), (*u).into(), z.re.into(), z.im.into()]);
    }
    t
}

/// Real part of each bin, which is the probability estimate at that work value.
pub fn spectrum_table(est: &DftEstimate) -> CsvTable {
    let mut t = CsvTable::new(&["bin_hkHz", "amplitude"]);
    for b in &est.bins {
        t.push(vec![b.work.into(), b.amplitude.re.into()]);
    }
    t
}

pub fn trajectory_table(traj: &BlochTrajectory) -> CsvTable {
    let mut t = CsvTable::new(&["direction", "t_us", "x", "y", "z"]);
    append_trajectory(&mut t, traj.protocol.direction().label(), traj);
    t
}

/// Adds trajectory rows under an arbitrary label, e.g. `quasistatic`.
pub fn append_trajectory(t: &mut CsvTable, label: &str, traj: &BlochTrajectory) {
    for (time, r) in traj.times.iter().zip(&traj.vectors) {
        t.push(vec![label.into(), to_micros(*time).into(), r[0].into(), r[1].into(), r[2].into()]);
    }
}

pub fn identity_table(reports: &[IdentityReport]) -> CsvTable {
    let mut t = CsvTable::new(&[
        "tau_us",
        "t_us",
        "mean_sigma",
        "kl_forward_backward",
        "kl_final_vs_eq",
        "max_deviation",
    ]);
    for r in reports {
        for row in &r.rows {
            t.push(vec![
                to_micros(r.protocol.tau()).into(),
                to_micros(row.t).into(),
                r.mean_sigma.into(),
                row.kl_forward_backward.into(),
                r.kl_final_vs_eq.into(),
                r.max_deviation.into(),
            ]);
        }
    }
    t
}
