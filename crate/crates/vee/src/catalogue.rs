//! The catalogue of known rank-3 vee-systems, loaded from `data/catalogue.toml`.
//!
//! The embedded data is checked against `data/catalogue.sha256` at load
//! time. [`Catalogue::from_path`] reads a replacement file at runtime and
//! checks it against a sidecar `<path>.sha256` when one exists.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::sync::OnceLock;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{canonical_form, CovectorConfiguration, Tolerance};
use crate::deform::{build_system, Mode};
use crate::error::CatalogueError;
use crate::expr::{eval, holds, Env};
use crate::matroid::decompose;
use crate::verify::check_vee_with;

pub const FORMAT_VERSION: u32 = 1;

const EMBEDDED: &str = include_str!("../data/catalogue.toml");
const EMBEDDED_SHA256: &str = include_str!("../data/catalogue.sha256");

pub type Params = BTreeMap<String, f64>;

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
pub struct FlatSpec {
    pub nu: String,
    pub members: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
pub struct CatalogueEntry {
    pub id: String,
    pub name: String,
    pub params: Vec<String>,
    pub admissible: Vec<String>,
    pub samples: Vec<Params>,
    pub grid: Vec<Params>,
    #[serde(rename = "let", default)]
    pub bindings: Vec<(String, String)>,
    pub columns: Vec<[String; 3]>,
    pub gram_scale: String,
    pub gram: [[String; 3]; 3],
    pub pairs: Vec<[usize; 2]>,
    #[serde(default)]
    pub flats: Vec<FlatSpec>,
    pub erratum: Option<String>,
}

#[derive(Debug, Deserialize)]
struct CatalogueFile {
    format_version: u32,
    entry: Vec<CatalogueEntry>,
}

#[derive(Debug, Clone)]
pub struct Catalogue {
    entries: Vec<CatalogueEntry>,
    sha256: String,
}

fn sha256_hex(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

impl Catalogue {
    /// Parses catalogue text, checking `expected_sha256` when given.
    pub fn parse(text: &str, expected_sha256: Option<&str>) -> Result<Self, CatalogueError> {
        let actual = sha256_hex(text);
        if let Some(expected) = expected_sha256 {
            let expected = expected.split_whitespace().next().unwrap_or("");
            if expected != actual {
                return Err(CatalogueError::ChecksumMismatch {
                    expected: expected.into(),
                    actual,
                });
            }
        }
        let file: CatalogueFile = toml::from_str(text).map_err(|e| CatalogueError::Data(e.to_string()))?;
        if file.format_version != FORMAT_VERSION {
            return Err(CatalogueError::Data(format!(
                "format_version {} unsupported",
                file.format_version
            )));
        }
        Ok(Catalogue {
            entries: file.entry,
            sha256: actual,
        })
    }

    pub fn from_path(path: &Path) -> Result<Self, CatalogueError> {
        let text = std::fs::read_to_string(path).map_err(|e| CatalogueError::Data(e.to_string()))?;
        let mut side = path.as_os_str().to_owned();
        side.push(".sha256");
        let sum = std::fs::read_to_string(&side).ok();
        Self::parse(&text, sum.as_deref())
    }

    /// The embedded catalogue.
    pub fn builtin() -> &'static Catalogue {
        static CAT: OnceLock<Catalogue> = OnceLock::new();
        CAT.get_or_init(|| Catalogue::parse(EMBEDDED, Some(EMBEDDED_SHA256)).expect("embedded catalogue is valid"))
    }

    pub fn entries(&self) -> &[CatalogueEntry] {
        &self.entries
    }

    pub fn sha256(&self) -> &str {
        &self.sha256
    }

    pub fn get(&self, id: &str) -> Result<&CatalogueEntry, CatalogueError> {
        self.entries
            .iter()
            .find(|e| e.id == id)
            .ok_or_else(|| CatalogueError::UnknownId(id.into()))
    }

    pub fn construct(&self, id: &str, params: &Params) -> Result<CovectorConfiguration, CatalogueError> {
        self.get(id)?.construct(params)
    }
}

impl CatalogueEntry {
    pub fn is_parametric(&self) -> bool {
        !self.params.is_empty()
    }

    pub fn n(&self) -> usize {
        self.columns.len()
    }

    /// Parameters plus `let` bindings, after the admissibility check.
    pub fn environment(&self, params: &Params) -> Result<Env, CatalogueError> {
        for p in &self.params {
            if !params.contains_key(p) {
                return Err(CatalogueError::MissingParameter(p.clone()));
            }
        }
        for k in params.keys() {
            if !self.params.contains(k) {
                return Err(CatalogueError::UnexpectedParameter(k.clone()));
            }
        }
        let mut env: Env = params.clone();
        for pred in &self.admissible {
            if !holds(pred, &env)? {
                return Err(CatalogueError::InadmissibleParameters(pred.clone()));
            }
        }
        for (name, expr) in &self.bindings {
            let v = eval(expr, &env)?;
            env.insert(name.clone(), v);
        }
        Ok(env)
    }

    /// The covector matrix evaluated without the admissibility check.
    pub fn matrix_unchecked(&self, params: &Params) -> Result<DMatrix<f64>, CatalogueError> {
        let mut env: Env = params.clone();
        for (name, expr) in &self.bindings {
            let v = eval(expr, &env)?;
            env.insert(name.clone(), v);
        }
        self.matrix_in(&env)
    }

    fn matrix_in(&self, env: &Env) -> Result<DMatrix<f64>, CatalogueError> {
        let n = self.n();
        let mut m = DMatrix::zeros(3, n);
        for (j, col) in self.columns.iter().enumerate() {
            for (i, e) in col.iter().enumerate() {
                m[(i, j)] = eval(e, env)?;
            }
        }
        Ok(m)
    }

    pub fn construct(&self, params: &Params) -> Result<CovectorConfiguration, CatalogueError> {
        let env = self.environment(params)?;
        Ok(CovectorConfiguration::new(self.matrix_in(&env)?)?)
    }

    pub fn expected_gram(&self, params: &Params) -> Result<DMatrix<f64>, CatalogueError> {
        let env = self.environment(params)?;
        let s = eval(&self.gram_scale, &env)?;
        let mut g = DMatrix::zeros(3, 3);
        for i in 0..3 {
            for j in 0..3 {
                g[(i, j)] = s * eval(&self.gram[i][j], &env)?;
            }
        }
        Ok(g)
    }

    /// Expected flats as label sets with their nu values (pairs carry none).
    pub fn expected_flats(&self, params: &Params) -> Result<Vec<(BTreeSet<usize>, Option<f64>)>, CatalogueError> {
        let env = self.environment(params)?;
        let mut out: Vec<(BTreeSet<usize>, Option<f64>)> =
            self.pairs.iter().map(|p| (p.iter().copied().collect(), None)).collect();
        for f in &self.flats {
            let nu = eval(&f.nu, &env)?;
            for m in &f.members {
                out.push((m.iter().copied().collect(), Some(nu)));
            }
        }
        Ok(out)
    }

    /// Formats parameters as `k=v,...` in declaration order.
    pub fn describe(&self, params: &Params) -> String {
        let inner: Vec<String> = self
            .params
            .iter()
            .filter_map(|p| params.get(p).map(|v| format!("{p}={v}")))
            .collect();
        if inner.is_empty() {
            self.id.clone()
        } else {
            format!("{}({})", self.id, inner.join(","))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NuCheck {
    pub members: Vec<usize>,
    pub expected: f64,
    pub computed: f64,
    pub relative_error: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntryReport {
    pub id: String,
    pub params: Params,
    pub gram_relative_error: f64,
    pub gram_ok: bool,
    /// Expected label sets absent from the computation.
    pub missing_flats: Vec<Vec<usize>>,
    /// Computed label sets absent from the expectation.
    pub extra_flats: Vec<Vec<usize>>,
    pub nu_checks: Vec<NuCheck>,
    pub max_residual: f64,
    pub is_vee_system: bool,
    pub erratum: Option<String>,
    pub pass: bool,
    pub failures: Vec<String>,
}

/// Relative tolerance for Gram and nu comparisons.
pub const ORACLE_RTOL: f64 = 1e-8;

pub fn verify_entry(cat: &Catalogue, id: &str, params: &Params, tol: Tolerance) -> Result<EntryReport, CatalogueError> {
    let entry = cat.get(id)?;
    let config = entry.construct(params)?;
    let form = canonical_form(&config)?;
    let expected_gram = entry.expected_gram(params)?;
    let gram_relative_error = (&form.gram - &expected_gram).amax() / expected_gram.amax();
    let d = decompose(&config)?;
    let report = check_vee_with(&config, &form, d, tol)?;
    let label = |i: usize| -> usize { config.label(i).parse().expect("catalogue labels are numeric") };
    let computed: Vec<(BTreeSet<usize>, Option<f64>)> = report
        .per_flat
        .iter()
        .map(|v| (v.flat.members.iter().map(|&m| label(m)).collect(), v.nu))
        .collect();
    let expected = entry.expected_flats(params)?;
    let cset: BTreeSet<&BTreeSet<usize>> = computed.iter().map(|c| &c.0).collect();
    let eset: BTreeSet<&BTreeSet<usize>> = expected.iter().map(|e| &e.0).collect();
    let missing_flats: Vec<Vec<usize>> = eset.difference(&cset).map(|s| s.iter().copied().collect()).collect();
    let extra_flats: Vec<Vec<usize>> = cset.difference(&eset).map(|s| s.iter().copied().collect()).collect();
    let mut nu_checks = Vec::new();
    for (set, nu) in &expected {
        if let Some(e) = nu {
            if let Some((_, Some(c))) = computed.iter().find(|(s, _)| s == set) {
                let rel = (c - e).abs() / e.abs();
                nu_checks.push(NuCheck {
                    members: set.iter().copied().collect(),
                    expected: *e,
                    computed: *c,
                    relative_error: rel,
                    ok: rel < ORACLE_RTOL,
                });
            }
        }
    }
    let gram_ok = gram_relative_error < ORACLE_RTOL;
    let mut failures = Vec::new();
    if !gram_ok {
        failures.push(format!("gram relative error {gram_relative_error:e}"));
    }
    if !missing_flats.is_empty() {
        failures.push(format!("missing flats {missing_flats:?}"));
    }
    if !extra_flats.is_empty() {
        failures.push(format!("unexpected flats {extra_flats:?}"));
    }
    for c in nu_checks.iter().filter(|c| !c.ok) {
        failures.push(format!("nu{:?} = {} expected {}", c.members, c.computed, c.expected));
    }
    if !report.is_vee_system {
        failures.push(format!("max residual {:e}", report.max_residual));
    }
    Ok(EntryReport {
        id: id.into(),
        params: params.clone(),
        gram_relative_error,
        gram_ok,
        missing_flats,
        extra_flats,
        nu_checks,
        max_residual: report.max_residual,
        is_vee_system: report.is_vee_system,
        erratum: entry.erratum.clone(),
        pass: failures.is_empty(),
        failures,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanRow {
    pub params: Params,
    pub free_nu_corank: Option<usize>,
    pub fixed_nu_corank: Option<usize>,
    pub free_gap: Option<f64>,
    pub fixed_gap: Option<f64>,
    pub error: Option<String>,
}

/// Coranks of both systems over a parameter grid; per-point errors are kept.
pub fn scan_family(cat: &Catalogue, id: &str, grid: &[Params], tol: Tolerance) -> Result<Vec<ScanRow>, CatalogueError> {
    let entry = cat.get(id)?;
    Ok(grid
        .iter()
        .map(|p| {
            let run = || -> Result<(usize, usize, f64, f64), CatalogueError> {
                let c = entry.construct(p)?;
                let f = build_system(&c, Mode::FreeNu, tol)?;
                let x = build_system(&c, Mode::FixedNu, tol)?;
                Ok((f.corank, x.corank, f.spectral_gap, x.spectral_gap))
            };
            match run() {
                Ok((f, x, gf, gx)) => ScanRow {
                    params: p.clone(),
                    free_nu_corank: Some(f),
                    fixed_nu_corank: Some(x),
                    free_gap: Some(gf),
                    fixed_gap: Some(gx),
                    error: None,
                },
                Err(e) => ScanRow {
                    params: p.clone(),
                    free_nu_corank: None,
                    fixed_nu_corank: None,
                    free_gap: None,
                    fixed_gap: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect())
}

/// Parses `k=v[,k=v]`.
pub fn parse_params(s: &str) -> Result<Params, String> {
    let mut p = Params::new();
    for part in s.split(',').map(str::trim).filter(|x| !x.is_empty()) {
        let (k, v) = part.split_once('=').ok_or_else(|| format!("expected k=v, got {part:?}"))?;
        let v: f64 = v.trim().parse().map_err(|_| format!("bad number in {part:?}"))?;
        p.insert(k.trim().to_string(), v);
    }
    Ok(p)
}

/// The B3 matrix in the labelling of the B3 reconstruction script.
pub fn b3_standard() -> CovectorConfiguration {
    let rows = [
        [1.0, 1.0, 0.0, 0.0, 1.0, 1.0, 1.0, 0.0, 0.0],
        [1.0, -1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, -1.0, 1.0, 1.0, -1.0, 0.0, 0.0, 1.0],
    ];
    CovectorConfiguration::new(DMatrix::from_fn(3, 9, |i, j| rows[i][j])).expect("fixture is valid")
}
