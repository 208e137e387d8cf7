//! Diagnostic time series: one row per diagnostic step, fixed column
//! layout, CSV rendering, and named-series access for post-hoc fits.
//!
//! Quantities that only make sense for a particular scenario (the moving
//! window monitors, segment balances) hold NaN elsewhere.

use std::io::{self, Write};

/// One diagnostic row. `cone_balance` has one entry per configured anchor:
/// the running divergence balance of that cone, its closure error once the
/// apex is reached.
#[derive(Clone, Debug)]
pub struct LedgerRow {
    pub t: f64,
    pub total_energy: f64,
    pub total_momentum: f64,
    pub r1: f64,
    pub r2: f64,
    pub cone_balance: Vec<f64>,
    pub mu: f64,
    pub window_energy: f64,
    pub mu_floor: f64,
    pub max_v1: f64,
    pub max_v2: f64,
    pub v1_ratio: f64,
    pub v2_ratio: f64,
    pub lemma_ratio: f64,
    pub dilation_d: f64,
    pub dilation_rhs: f64,
    pub continuity: f64,
    pub seg_forward_err: f64,
    pub seg_backward_err: f64,
    pub max_abs_a: f64,
}

#[derive(Clone, Debug, Default)]
pub struct DiagnosticsLedger {
    pub n_anchors: usize,
    pub rows: Vec<LedgerRow>,
}

impl DiagnosticsLedger {
    pub fn new(n_anchors: usize) -> Self {
        Self {
            n_anchors,
            rows: Vec::new(),
        }
    }

    pub fn column_names(&self) -> Vec<String> {
        let mut names = vec!["t", "total_energy", "total_momentum", "r1", "r2"]
            .into_iter()
            .map(String::from)
            .collect::<Vec<_>>();
        for i in 0..self.n_anchors {
            names.push(format!("cone_balance_{i}"));
        }
        for n in [
            "mu",
            "window_energy",
            "mu_floor",
            "max_v1",
            "max_v2",
            "v1_ratio",
            "v2_ratio",
            "lemma_ratio",
            "dilation_d",
            "dilation_rhs",
            "continuity",
            "seg_forward_err",
            "seg_backward_err",
            "max_abs_a",
        ] {
            names.push(n.into());
        }
        names
    }

    fn row_values(&self, row: &LedgerRow) -> Vec<f64> {
        let mut v = vec![row.t, row.total_energy, row.total_momentum, row.r1, row.r2];
        debug_assert_eq!(row.cone_balance.len(), self.n_anchors);
        v.extend_from_slice(&row.cone_balance);
        v.extend_from_slice(&[
            row.mu,
            row.window_energy,
            row.mu_floor,
            row.max_v1,
            row.max_v2,
            row.v1_ratio,
            row.v2_ratio,
            row.lemma_ratio,
            row.dilation_d,
            row.dilation_rhs,
            row.continuity,
            row.seg_forward_err,
            row.seg_backward_err,
            row.max_abs_a,
        ]);
        v
    }

    /// Time series (t, value) of a named column.
    pub fn series(&self, name: &str) -> Option<Vec<(f64, f64)>> {
        let idx = self.column_names().iter().position(|c| c == name)?;
        Some(
            self.rows
                .iter()
                .map(|r| (r.t, self.row_values(r)[idx]))
                .collect(),
        )
    }

    /// Comma-separated table with a header row; float formatting is the
    /// shortest round-trip representation, so identical runs produce
    /// identical bytes.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{}", self.column_names().join(","))?;
        for row in &self.rows {
            let vals = self.row_values(row);
            let line = vals
                .iter()
                .map(|v| format!("{v}"))
                .collect::<Vec<_>>()
                .join(",");
            writeln!(w, "{line}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_row(t: f64) -> LedgerRow {
        LedgerRow {
            t,
            total_energy: 1.5,
            total_momentum: 0.0,
            r1: 0.0,
            r2: 0.0,
            cone_balance: vec![0.1, -0.2],
            mu: f64::NAN,
            window_energy: f64::NAN,
            mu_floor: f64::NAN,
            max_v1: 1.0,
            max_v2: 2.0,
            v1_ratio: 0.5,
            v2_ratio: 0.25,
            lemma_ratio: 1.0,
            dilation_d: 0.0,
            dilation_rhs: 1.0,
            continuity: 0.0,
            seg_forward_err: f64::NAN,
            seg_backward_err: f64::NAN,
            max_abs_a: 0.0,
        }
    }

    #[test]
    fn empty_ledger_renders_header_only() {
        let l = DiagnosticsLedger::new(1);
        let mut buf = Vec::new();
        l.write_csv(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(s.lines().count(), 1);
        assert!(s.starts_with("t,total_energy,"));
        assert!(s.contains("cone_balance_0"));
    }

    #[test]
    fn one_row_matches_schema() {
        let mut l = DiagnosticsLedger::new(2);
        l.rows.push(sample_row(0.5));
        let mut buf = Vec::new();
        l.write_csv(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        let mut lines = s.lines();
        let header: Vec<&str> = lines.next().unwrap().split(',').collect();
        let data: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(header.len(), data.len());
        assert_eq!(data[0], "0.5");
        assert_eq!(header[5], "cone_balance_0");
        assert_eq!(data[6], "-0.2");
    }

    #[test]
    fn named_series_extraction() {
        let mut l = DiagnosticsLedger::new(2);
        l.rows.push(sample_row(1.0));
        l.rows.push(sample_row(2.0));
        let s = l.series("max_v2").unwrap();
        assert_eq!(s, vec![(1.0, 2.0), (2.0, 2.0)]);
        assert!(l.series("nope").is_none());
        let c = l.series("cone_balance_1").unwrap();
        assert_eq!(c[0].1, -0.2);
    }
}
