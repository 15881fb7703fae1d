//! CSV and JSON writers. Floats are printed with 17 significant digits.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::energy::EnergyLedger;
use crate::error::Result;

/// Column-labelled numeric table.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: Vec<String>) -> Self {
        Self { columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }

    pub fn write_csv(&self, mut out: impl Write) -> Result<()> {
        writeln!(out, "{}", self.columns.join(","))?;
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(|x| fmt_float(*x)).collect();
            writeln!(out, "{}", line.join(","))?;
        }
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_csv(&mut w)?;
        w.flush()?;
        Ok(())
    }
}

pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn save_json(value: &impl Serialize, path: impl AsRef<Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| crate::Error::Parse(e.to_string()))?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}

pub fn ledger_table(ledgers: &[EnergyLedger]) -> Table {
    let cols = [
        "t",
        "H_D",
        "H_B_b1",
        "H_B_b2",
        "S_D_b1",
        "S_D_b2",
        "interaction_power_b1",
        "interaction_power_b2",
        "balance_residual_b1",
        "balance_residual_b2",
        "external_power",
        "dissipated_power",
        "total",
    ];
    let mut t = Table::new(cols.iter().map(|s| s.to_string()).collect());
    for l in ledgers {
        t.push(vec![
            l.time,
            l.h_d_total,
            l.h_b[0],
            l.h_b[1],
            l.s_d[0],
            l.s_d[1],
            l.interaction_power[0],
            l.interaction_power[1],
            l.balance_residual[0],
            l.balance_residual[1],
            l.external_power,
            l.dissipated_power,
            l.total,
        ]);
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE] {
            let s = fmt_float(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
    }

    #[test]
    fn csv_header_and_rows() {
        let mut t = Table::new(vec!["t".into(), "x".into()]);
        t.push(vec![0.0, 1.5]);
        t.push(vec![0.5, -2.0]);
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text.starts_with("t,x\n"));
        assert_eq!(t.column("x").unwrap(), vec![1.5, -2.0]);
        assert!(t.column("y").is_none());
    }
}
