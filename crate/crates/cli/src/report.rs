//! Verification reports: analytic, asymptotic and Monte Carlo columns per `x`,
//! emitted as CSV (fixed header) and JSON (with a metadata block).

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use levydraw::sim::mc::McEstimate;

use crate::config::ExperimentConfig;

pub const CSV_HEADER: &str = "x,analytic,asymptotic,mc_mean,mc_se,ci_lo,ci_hi,pass";

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt17(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}

fn opt17(v: Option<f64>) -> String {
    v.map(fmt17).unwrap_or_default()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub x: f64,
    pub analytic: Option<f64>,
    pub asymptotic: Option<f64>,
    pub mc: Option<McEstimate>,
    /// `None` when no declared tolerance applies to this row.
    pub pass: Option<bool>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Versions {
    pub levydraw: String,
    pub levydraw_cli: String,
}

impl Versions {
    pub fn current() -> Self {
        Self { levydraw: levydraw::VERSION.to_string(), levydraw_cli: env!("CARGO_PKG_VERSION").to_string() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub seed: u64,
    pub n: usize,
    /// Grid step used by the Monte Carlo column, when one ran.
    pub delta: Option<f64>,
    pub bridge: bool,
    pub stream_policy: String,
    pub versions: Versions,
    pub config: ExperimentConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub metadata: Metadata,
    pub rows: Vec<ReportRow>,
}

impl VerificationReport {
    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.pass == Some(false)).count()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let (mean, se, lo, hi) = match &r.mc {
                Some(m) => (Some(m.mean), Some(m.std_error), Some(m.ci95.0), Some(m.ci95.1)),
                None => (None, None, None, None),
            };
            let pass = r.pass.map(|p| p.to_string()).unwrap_or_default();
            let cells = [
                fmt17(r.x),
                opt17(r.analytic),
                opt17(r.asymptotic),
                opt17(mean),
                opt17(se),
                opt17(lo),
                opt17(hi),
                pass,
            ];
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    pub fn write_csv(&self, path: &Path) -> std::io::Result<()> {
        write_atomic(path, self.to_csv().as_bytes())
    }

    pub fn write_json(&self, path: &Path) -> std::io::Result<()> {
        write_atomic(path, self.to_json().as_bytes())
    }
}

/// Writes through a sibling temporary file so concurrent runs never see a
/// partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| "out".into());
    let tmp = path.with_file_name(format!(".{name}.{}.tmp", std::process::id()));
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_report(rows: Vec<ReportRow>) -> VerificationReport {
        let cfg = ExperimentConfig::from_toml(
            "kind = \"u_star\"\nx_grid = []\n[model]\ndrift = -0.5\nsigma = 1.0\n[horizon]\ntype = \"fixed\"\nt = 0.0\ns = 1.0\n",
        )
        .unwrap();
        VerificationReport {
            metadata: Metadata {
                seed: 1,
                n: 0,
                delta: None,
                bridge: true,
                stream_policy: "p".into(),
                versions: Versions::current(),
                config: cfg,
            },
            rows,
        }
    }

    #[test]
    fn empty_report_is_header_only() {
        assert_eq!(sample_report(vec![]).to_csv(), format!("{CSV_HEADER}\n"));
    }

    #[test]
    fn seventeen_digits_round_trip() {
        for v in [0.1, 1.0 / 3.0, 2f64.sqrt() * 1e-300, 123456.789] {
            let s = fmt17(v);
            assert_eq!(s.parse::<f64>().unwrap(), v);
            let mantissa = s.split('e').next().unwrap().replace(['.', '-'], "");
            assert_eq!(mantissa.len(), 17, "{s}");
        }
    }

    #[test]
    fn csv_and_json() {
        let mc = McEstimate::from_indicators(&[true, false, false, true], 1, 0.01, true);
        let rep = sample_report(vec![
            ReportRow { x: 0.5, analytic: Some(0.5), asymptotic: None, mc: Some(mc), pass: Some(true), notes: vec![] },
            ReportRow {
                x: 1.0,
                analytic: None,
                asymptotic: Some(0.25),
                mc: None,
                pass: None,
                notes: vec!["no analytic route".into()],
            },
        ]);
        let csv = rep.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines[1].split(',').count(), 8);
        assert!(lines[1].ends_with(",true"));
        assert_eq!(lines[2], format!("{},,{},,,,,", fmt17(1.0), fmt17(0.25)));
        let back = VerificationReport::from_json(&rep.to_json()).unwrap();
        assert_eq!(back, rep);
    }
}
