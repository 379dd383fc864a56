//! Report structures and their CSV serializations. All CSV outputs
//! start with a versioned schema comment so downstream readers can
//! detect format changes.

use std::path::Path;

use crate::empirical::DiagnosticsReport;
use crate::error::Result;

/// One line of the experiment report. `oracle`, `tolerance` and `pass`
/// are present only for rows that are checked against a reference
/// value.
#[derive(Clone, Debug)]
pub struct ReportRow {
    pub section: String,
    pub name: String,
    pub value: f64,
    pub oracle: Option<f64>,
    pub tolerance: Option<f64>,
    pub pass: Option<bool>,
}

impl ReportRow {
    pub fn info(section: &str, name: impl Into<String>, value: f64) -> Self {
        ReportRow {
            section: section.into(),
            name: name.into(),
            value,
            oracle: None,
            tolerance: None,
            pass: None,
        }
    }

    pub fn checked(
        section: &str,
        name: impl Into<String>,
        value: f64,
        oracle: f64,
        tolerance: f64,
    ) -> Self {
        ReportRow {
            section: section.into(),
            name: name.into(),
            value,
            oracle: Some(oracle),
            tolerance: Some(tolerance),
            // inclusive boundary: a deviation equal to the tolerance passes
            pass: Some((value - oracle).abs() <= tolerance),
        }
    }
}

/// Full output of one replication experiment.
#[derive(Clone, Debug)]
pub struct ExperimentReport {
    pub rows: Vec<ReportRow>,
    /// Functional names, in configuration order.
    pub functional_names: Vec<String>,
    /// Process values: `zn[f][i]` is functional `f` in replication `i`.
    pub zn: Vec<Vec<f64>>,
    /// Sample covariance matrix of the process values across
    /// replications.
    pub covariance: Vec<Vec<f64>>,
    /// Diagnostics for the first replication.
    pub diagnostics: Option<DiagnosticsReport>,
}

impl ExperimentReport {
    /// True when every checked row passed.
    pub fn overall_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass != Some(false))
    }

    pub fn write_report_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::from("# schema=1\nsection,name,value,oracle,tolerance,pass\n");
        for r in &self.rows {
            let oracle = r.oracle.map(|v| format!("{v}")).unwrap_or_default();
            let tol = r.tolerance.map(|v| format!("{v}")).unwrap_or_default();
            let pass = r
                .pass
                .map(|p| if p { "1" } else { "0" }.to_string())
                .unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.section, r.name, r.value, oracle, tol, pass
            ));
        }
        std::fs::write(path, out)?;
        Ok(())
    }

    pub fn write_zn_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::from("# schema=1\nreplication,functional,value\n");
        if let Some(reps) = self.zn.first().map(|z| z.len()) {
            for i in 0..reps {
                for (name, z) in self.functional_names.iter().zip(&self.zn) {
                    out.push_str(&format!("{i},{name},{}\n", z[i]));
                }
            }
        }
        std::fs::write(path, out)?;
        Ok(())
    }

    pub fn write_diagnostics_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::from("# schema=1\nsection,name,value\n");
        if let Some(d) = &self.diagnostics {
            for (name, v) in &d.truncation_ratio {
                out.push_str(&format!("truncation_ratio,{name},{v}\n"));
            }
            for (name, v) in &d.lindeberg_tail {
                out.push_str(&format!("lindeberg_tail,{name},{v}\n"));
            }
            for ((x, y), v) in &d.moment_curve {
                out.push_str(&format!("moment_curve,({x};{y}],{v}\n"));
            }
            out.push_str(&format!("theta,fraction_nonzero,{}\n", d.theta.fraction_nonzero));
            out.push_str(&format!("theta,raw,{}\n", d.theta.raw));
            out.push_str(&format!("theta,log_corrected,{}\n", d.theta.log_corrected));
            for (i, w) in d.warnings.iter().enumerate() {
                out.push_str(&format!("warning,{i},0 # {w}\n"));
            }
        }
        std::fs::write(path, out)?;
        Ok(())
    }

    /// Write `report.csv`, `zn_values.csv` and `diagnostics.csv` into a
    /// directory.
    pub fn write_all(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        self.write_report_csv(&dir.join("report.csv"))?;
        self.write_zn_csv(&dir.join("zn_values.csv"))?;
        self.write_diagnostics_csv(&dir.join("diagnostics.csv"))?;
        Ok(())
    }

    /// Human-readable summary for terminal output.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let mut section = String::new();
        for r in &self.rows {
            if r.section != section {
                section = r.section.clone();
                out.push_str(&format!("[{section}]\n"));
            }
            match (r.oracle, r.pass) {
                (Some(o), Some(p)) => out.push_str(&format!(
                    "  {:<40} {:>12.6} (expect {:.6} +/- {:.4}) {}\n",
                    r.name,
                    r.value,
                    o,
                    r.tolerance.unwrap_or(0.0),
                    if p { "ok" } else { "FAIL" }
                )),
                _ => out.push_str(&format!("  {:<40} {:>12.6}\n", r.name, r.value)),
            }
        }
        out.push_str(&format!(
            "overall: {}\n",
            if self.overall_pass() { "pass" } else { "FAIL" }
        ));
        out
    }
}
