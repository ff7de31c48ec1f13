//! Check records and the three report renderings.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::Result;

pub const TSV_HEADER: &str = "scenario\tcheck\tvalue\treference\ttol\tleakage\tpass\tms\tanchor";

/// One numerical check.
#[derive(Clone, Debug, PartialEq)]
pub struct Record {
    pub scenario: String,
    pub check: String,
    pub value: f64,
    pub reference: f64,
    pub tol: f64,
    pub leakage: f64,
    pub pass: bool,
    pub ms: f64,
    /// Name of the identity the check certifies.
    pub anchor: String,
    /// Set when the check could not be computed.
    pub note: Option<String>,
}

impl Record {
    /// `pass` is `|value − reference| ≤ tol + leakage`; NaN never passes.
    pub fn new(
        scenario: &str,
        check: &str,
        anchor: &str,
        value: f64,
        reference: f64,
        tol: f64,
        leakage: f64,
    ) -> Self {
        let pass = (value - reference).abs() <= tol + leakage;
        Record {
            scenario: scenario.to_string(),
            check: check.to_string(),
            value,
            reference,
            tol,
            leakage,
            pass,
            ms: 0.0,
            anchor: anchor.to_string(),
            note: None,
        }
    }

    pub fn failed(scenario: &str, check: &str, anchor: &str, note: String) -> Self {
        Record {
            note: Some(note),
            ..Record::new(scenario, check, anchor, f64::NAN, 0.0, 0.0, 0.0)
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Report {
    pub records: Vec<Record>,
}

impl Report {
    pub fn push(&mut self, r: Record) {
        self.records.push(r);
    }

    pub fn extend(&mut self, other: Report) {
        self.records.extend(other.records);
    }

    /// Canonical order, independent of how the checks were scheduled.
    pub fn sort(&mut self) {
        self.records
            .sort_by(|a, b| (&a.scenario, &a.check).cmp(&(&b.scenario, &b.check)));
    }

    pub fn passed(&self) -> usize {
        self.records.iter().filter(|r| r.pass).count()
    }

    pub fn failed(&self) -> usize {
        self.records.len() - self.passed()
    }

    pub fn all_pass(&self) -> bool {
        self.records.iter().all(|r| r.pass)
    }

    /// Tab-separated records. Wall times are written only when asked for,
    /// so that the default output is reproducible byte for byte.
    pub fn to_tsv(&self, timings: bool) -> String {
        let mut out = String::from(TSV_HEADER);
        out.push('\n');
        for r in &self.records {
            let ms = if timings { r.ms } else { 0.0 };
            let _ = writeln!(
                out,
                "{}\t{}\t{:e}\t{:e}\t{:e}\t{:e}\t{}\t{:.3}\t{}",
                r.scenario, r.check, r.value, r.reference, r.tol, r.leakage, r.pass, ms, r.anchor
            );
        }
        out
    }

    pub fn summary(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "checks\t{}", self.records.len());
        let _ = writeln!(out, "passed\t{}", self.passed());
        let _ = writeln!(out, "failed\t{}", self.failed());
        let mut scenarios: Vec<&str> = self.records.iter().map(|r| r.scenario.as_str()).collect();
        scenarios.dedup();
        for s in scenarios {
            let (n, p) = self
                .records
                .iter()
                .filter(|r| r.scenario == s)
                .fold((0, 0), |(n, p), r| (n + 1, p + r.pass as usize));
            let _ = writeln!(out, "scenario\t{s}\t{p}/{n}");
        }
        for r in self.records.iter().filter(|r| !r.pass) {
            let _ = writeln!(out, "fail\t{}\t{}", r.scenario, r.check);
        }
        out
    }

    pub fn table(&self, timings: bool) -> String {
        let wc = self
            .records
            .iter()
            .map(|r| r.scenario.len() + r.check.len() + 1)
            .max()
            .unwrap_or(5)
            .max(5);
        let mut out = String::new();
        let _ = write!(out, "{:<wc$}  {:>10}  {:>10}  {:>9}  {:>9}  {:<4}", "check", "value", "reference", "tol", "leakage", "ok");
        if timings {
            let _ = write!(out, "  {:>9}", "ms");
        }
        out.push('\n');
        for r in &self.records {
            let name = format!("{}/{}", r.scenario, r.check);
            let _ = write!(
                out,
                "{name:<wc$}  {:>10.3e}  {:>10.3e}  {:>9.1e}  {:>9.1e}  {:<4}",
                r.value,
                r.reference,
                r.tol,
                r.leakage,
                if r.pass { "ok" } else { "FAIL" }
            );
            if timings {
                let _ = write!(out, "  {:>9.1}", r.ms);
            }
            if let Some(n) = &r.note {
                let _ = write!(out, "  ({n})");
            }
            out.push('\n');
        }
        let _ = writeln!(out, "{} of {} checks passed", self.passed(), self.records.len());
        out
    }

    /// Writes `records.tsv` and `summary.txt` into `dir`.
    pub fn write(&self, dir: &Path, timings: bool) -> Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("records.tsv"), self.to_tsv(timings))?;
        fs::write(dir.join("summary.txt"), self.summary())?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_rule_and_nan() {
        assert!(Record::new("s", "c", "a", 1.0 + 1e-7, 1.0, 1e-7, 1e-9).pass);
        assert!(!Record::new("s", "c", "a", 1.0 + 2e-7, 1.0, 1e-7, 0.0).pass);
        assert!(!Record::failed("s", "c", "a", "boom".into()).pass);
    }

    #[test]
    fn tsv_is_sorted_and_stable() {
        let mut r = Report::default();
        let mut b = Record::new("weyl", "b", "x", 1e-9, 0.0, 1e-8, 0.0);
        b.ms = 12.5;
        r.push(b);
        r.push(Record::new("dyson", "a", "y", 0.5, 0.5, 0.0, 0.0));
        r.sort();
        let tsv = r.to_tsv(false);
        let lines: Vec<&str> = tsv.lines().collect();
        assert_eq!(lines[0], TSV_HEADER);
        assert_eq!(lines[1], "dyson\ta\t5e-1\t5e-1\t0e0\t0e0\ttrue\t0.000\ty");
        assert_eq!(lines[2], "weyl\tb\t1e-9\t0e0\t1e-8\t0e0\ttrue\t0.000\tx");
        assert!(r.to_tsv(true).contains("12.500"));
        assert!(r.summary().starts_with("checks\t2\npassed\t2\nfailed\t0\n"));
    }
}
