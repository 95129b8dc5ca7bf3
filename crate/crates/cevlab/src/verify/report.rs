//! Experiment reports: the JSON artifact every verification run produces.
//!
//! Stable key set: `{config, estimates, targets, distances, verdict,
//! diagnostics, runtime_seconds}`. Every theoretical target carries its
//! anchor string in `paper_ref`, and the verdict is pass exactly when every
//! distance sits within its tolerance.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::verify::config::ExperimentConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub name: String,
    pub value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub se: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Target {
    pub name: String,
    pub value: f64,
    pub paper_ref: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Distance {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    /// Starved conditioning: a statistical non-answer, not a theory
    /// violation.
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct Diagnostics {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exceedances: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub saturation: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evaluator_method: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evaluator_accuracy: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inner_samples: Option<u64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub config: ExperimentConfig,
    pub estimates: Vec<Estimate>,
    pub targets: Vec<Target>,
    pub distances: Vec<Distance>,
    pub verdict: Verdict,
    pub diagnostics: Diagnostics,
    pub runtime_seconds: f64,
}

impl Report {
    /// Verdict implied by the distances.
    pub fn verdict_from_distances(distances: &[Distance]) -> Verdict {
        if distances.iter().all(|d| d.value <= d.tolerance) {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    /// Serialized form with the runtime zeroed; the unit of comparison for
    /// determinism checks, which must ignore wall-clock jitter.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        let mut c = self.clone();
        c.runtime_seconds = 0.0;
        let mut bytes = serde_json::to_vec_pretty(&c).expect("report serializes");
        bytes.push(b'\n');
        bytes
    }
}

/// Writes a report as pretty JSON. Parent directories are not created;
/// a missing directory is an error.
pub fn write_report(report: &Report, path: &Path) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(report)?;
    bytes.push(b'\n');
    std::fs::write(path, bytes)?;
    Ok(())
}

/// Reads a report back.
pub fn read_report(path: &Path) -> Result<Report> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::config::ExperimentKind;

    fn sample_report() -> Report {
        let mut cfg = ExperimentConfig::new(ExperimentKind::ProductTail);
        cfg.model = Some(crate::models::ModelSpec::ExpAr1 { alpha: 2.0, phi: 0.5 });
        cfg.n = 100;
        cfg.hill_k = Some(10);
        cfg.tolerance = 0.1;
        Report {
            config: cfg,
            estimates: vec![Estimate { name: "hill".into(), value: 1.31, se: Some(0.02) }],
            targets: vec![Target {
                name: "product_tail_index".into(),
                value: 4.0 / 3.0,
                paper_ref: "eq:tail-product-cev".into(),
            }],
            distances: vec![Distance { name: "abs_error".into(), value: 0.02, tolerance: 0.1 }],
            verdict: Verdict::Pass,
            diagnostics: Diagnostics { exceedances: Some(11), ..Default::default() },
            runtime_seconds: 0.25,
        }
    }

    #[test]
    fn write_then_read_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("report.json");
        let report = sample_report();
        write_report(&report, &path).unwrap();
        let back = read_report(&path).unwrap();
        assert_eq!(report, back);
    }

    #[test]
    fn missing_directory_is_an_error() {
        let report = sample_report();
        assert!(write_report(&report, Path::new("/no-such-dir-cevlab/report.json")).is_err());
    }

    #[test]
    fn verdict_values_serialize_to_schema_strings() {
        for (v, s) in [
            (Verdict::Pass, "\"pass\""),
            (Verdict::Fail, "\"fail\""),
            (Verdict::Inconclusive, "\"inconclusive\""),
        ] {
            assert_eq!(serde_json::to_string(&v).unwrap(), s);
        }
    }

    #[test]
    fn verdict_follows_distances() {
        let pass = vec![Distance { name: "d".into(), value: 0.1, tolerance: 0.1 }];
        assert_eq!(Report::verdict_from_distances(&pass), Verdict::Pass);
        let fail = vec![
            Distance { name: "d".into(), value: 0.1, tolerance: 0.1 },
            Distance { name: "e".into(), value: 0.2, tolerance: 0.1 },
        ];
        assert_eq!(Report::verdict_from_distances(&fail), Verdict::Fail);
    }

    #[test]
    fn canonical_bytes_ignore_runtime_only() {
        let a = sample_report();
        let mut b = a.clone();
        b.runtime_seconds = 99.0;
        assert_eq!(a.canonical_bytes(), b.canonical_bytes());
        let mut c = a.clone();
        c.estimates[0].value += 1e-12;
        assert_ne!(a.canonical_bytes(), c.canonical_bytes());
    }

    #[test]
    fn targets_carry_paper_anchor_strings() {
        let report = sample_report();
        let json: serde_json::Value =
            serde_json::from_slice(&report.canonical_bytes()).unwrap();
        for t in json["targets"].as_array().unwrap() {
            let anchor = t["paper_ref"].as_str().unwrap();
            assert!(!anchor.is_empty());
        }
    }
}
