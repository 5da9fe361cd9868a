//! JSON documents read and written by the command-line tool.
//!
//! A configuration document:
//!
//! ```json
//! {
//!   "dimension": 3,
//!   "covectors": [["1.0", "0.0", "0.0"], ["0.0", "1.0", "0.0"]],
//!   "labels": ["1", "2"],
//!   "source": "A3",
//!   "parameters": { "c1": 1.0 }
//! }
//! ```
//!
//! Entries of `covectors` are columns. Numbers may be JSON numbers or
//! decimal strings; writing always uses the shortest string that parses
//! back to the same `f64`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::catalogue::Params;
use crate::config::{CovectorConfiguration, Tolerance};
use crate::deform::{build_system, Mode};
use crate::error::VeeError;
use crate::verify::{check_harmonic, check_vee, solve_weights, nu_trace, FlatKind, HarmonicRecord, VeeReport, WeightSolution};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum Number {
    Text(String),
    Value(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigDocument {
    pub dimension: usize,
    covectors: Vec<Vec<Number>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parameters: Option<Params>,
}

#[derive(Debug, thiserror::Error)]
pub enum DocumentError {
    #[error("{0}")]
    Json(#[from] serde_json::Error),
    #[error("covectors[{column}][{row}]: {message}")]
    Field { column: usize, row: usize, message: String },
    #[error("covectors[{0}] has {1} entries, dimension is {2}")]
    ColumnLength(usize, usize, usize),
    #[error(transparent)]
    Vee(#[from] VeeError),
}

impl ConfigDocument {
    pub fn from_config(config: &CovectorConfiguration) -> Self {
        let m = config.matrix();
        ConfigDocument {
            dimension: config.dimension(),
            covectors: (0..m.ncols())
                .map(|j| m.column(j).iter().map(|x| Number::Text(format!("{x:?}"))).collect())
                .collect(),
            labels: Some(config.labels().to_vec()),
            source: None,
            parameters: None,
        }
    }

    pub fn parse(text: &str) -> Result<Self, DocumentError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("documents serialize") + "\n"
    }

    pub fn to_config(&self) -> Result<CovectorConfiguration, DocumentError> {
        let d = self.dimension;
        let mut m = DMatrix::zeros(d, self.covectors.len());
        for (j, col) in self.covectors.iter().enumerate() {
            if col.len() != d {
                return Err(DocumentError::ColumnLength(j, col.len(), d));
            }
            for (i, x) in col.iter().enumerate() {
                m[(i, j)] = match x {
                    Number::Value(v) => *v,
                    Number::Text(s) => s.trim().parse().map_err(|_| DocumentError::Field {
                        column: j,
                        row: i,
                        message: format!("{s:?} is not a number"),
                    })?,
                };
            }
        }
        Ok(match &self.labels {
            Some(l) => CovectorConfiguration::with_labels(m, l.clone())?,
            None => CovectorConfiguration::new(m)?,
        })
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NuRow {
    pub flat: Vec<String>,
    pub nu: f64,
    pub nu_trace: f64,
}

/// Infinite spectral gaps (no dropped singular value) are written as `null`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Coranks {
    pub free_nu: usize,
    pub fixed_nu: usize,
    pub free_gap: f64,
    pub fixed_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportDocument {
    pub tool_version: String,
    pub input_sha256: String,
    pub rtol: f64,
    pub labels: Vec<String>,
    pub vee: VeeReport,
    pub flats: Vec<Vec<String>>,
    pub near_degenerate: bool,
    pub nu_table: Vec<NuRow>,
    pub weights: WeightSolution,
    pub coranks: Option<Coranks>,
    pub harmonic: Vec<HarmonicRecord>,
    /// Wall-clock milliseconds; the only field that varies between runs.
    pub timing_ms: f64,
}

impl ReportDocument {
    /// Runs every analysis on `config`. `input` is the raw input, hashed into the report.
    pub fn build(config: &CovectorConfiguration, input: &[u8], tol: Tolerance) -> Result<Self, VeeError> {
        let start = std::time::Instant::now();
        let vee = check_vee(config, tol)?;
        let labels = config.labels().to_vec();
        let d = &vee.decomposition;
        let mut nu_table = Vec::new();
        for v in vee.per_flat.iter().filter(|v| v.kind == FlatKind::Multi) {
            nu_table.push(NuRow {
                flat: v.flat.members.iter().map(|&m| labels[m].clone()).collect(),
                nu: v.nu_factor.unwrap_or(f64::NAN),
                nu_trace: nu_trace(config, &v.flat)?,
            });
        }
        let coranks = if vee.is_vee_system {
            let free = build_system(config, Mode::FreeNu, tol)?;
            let fixed = build_system(config, Mode::FixedNu, tol)?;
            Some(Coranks {
                free_nu: free.corank,
                fixed_nu: fixed.corank,
                free_gap: free.spectral_gap,
                fixed_gap: fixed.spectral_gap,
            })
        } else {
            None
        };
        let weights = solve_weights(config)?;
        let harmonic = check_harmonic(config, 1e-8)?;
        Ok(ReportDocument {
            tool_version: env!("CARGO_PKG_VERSION").into(),
            input_sha256: sha256_hex(input),
            rtol: tol.rtol,
            flats: d.label_sets(&labels),
            near_degenerate: d.near_degenerate,
            labels,
            nu_table,
            weights,
            coranks,
            harmonic,
            vee,
            timing_ms: start.elapsed().as_secs_f64() * 1e3,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize") + "\n"
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalogue::Catalogue;

    #[test]
    fn round_trip_is_bit_exact() {
        let cat = Catalogue::builtin();
        let c = cat.construct("H4A1", &Params::new()).unwrap();
        let text = ConfigDocument::from_config(&c).to_json();
        let back = ConfigDocument::parse(&text).unwrap().to_config().unwrap();
        assert_eq!(back.matrix(), c.matrix());
        assert_eq!(back.labels(), c.labels());
    }

    #[test]
    fn numbers_or_strings() {
        let d = ConfigDocument::parse(r#"{"dimension":2,"covectors":[[1,0],["0","1.5"]]}"#).unwrap();
        let c = d.to_config().unwrap();
        assert_eq!(c.matrix()[(1, 1)], 1.5);
    }

    #[test]
    fn field_diagnostics() {
        let e = ConfigDocument::parse(r#"{"dimension":2,"covectors":[[1,0],["x","1"]]}"#)
            .unwrap()
            .to_config()
            .unwrap_err();
        assert_eq!(e.to_string(), "covectors[1][0]: \"x\" is not a number");
        let e = ConfigDocument::parse(r#"{"dimension":2,"covectors":[[1,0,0]]}"#)
            .unwrap()
            .to_config()
            .unwrap_err();
        assert!(matches!(e, DocumentError::ColumnLength(0, 3, 2)));
        assert!(ConfigDocument::parse("{\"dimension\": 3,\n \"covectors\": [").is_err());
    }

    #[test]
    fn report_is_deterministic() {
        let cat = Catalogue::builtin();
        let c = cat.construct("G3", &[("t".to_string(), 1.0)].into()).unwrap();
        let strip = |mut r: ReportDocument| {
            r.timing_ms = 0.0;
            r.to_json()
        };
        let a = strip(ReportDocument::build(&c, b"x", Tolerance::default()).unwrap());
        let b = strip(ReportDocument::build(&c, b"x", Tolerance::default()).unwrap());
        assert_eq!(a, b);
    }
}
