//! Extensions and degenerations between catalogue systems.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::catalogue::{Catalogue, Params};
use crate::config::{canonical_form, CovectorConfiguration, Tolerance};
use crate::error::CatalogueError;
use crate::expr::{eval, Env};
use crate::matroid::{decompose, find_isomorphism, fingerprint};
use crate::verify::{check_extension, check_vee, FlatKind};

const EMBEDDED: &str = include_str!("../data/relations.toml");

/// Offsets from the limit used for degenerations.
pub const EPSILONS: [f64; 2] = [1e-3, 1e-4];
/// Smallest accepted decay exponent of a vanishing G-norm.
pub const MIN_DECAY: f64 = 0.45;
/// Largest accepted decay exponent of a surviving G-norm.
pub const MAX_SURVIVOR_DECAY: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RelationKind {
    Extension,
    Degeneration,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
pub struct RelationEntry {
    pub kind: RelationKind,
    pub system: String,
    pub target: String,
    pub label: String,
    pub covectors: Vec<usize>,
    pub corrected: Option<Vec<usize>>,
    pub note: Option<String>,
    #[serde(default)]
    pub outer_params: Params,
    pub inner_params: Option<Params>,
    #[serde(default)]
    pub params: Params,
    #[serde(default)]
    pub path: std::collections::BTreeMap<String, String>,
    pub limit: Option<String>,
    pub implemented: Option<String>,
    pub target_params: Option<Params>,
    #[serde(default)]
    pub flagged: bool,
}

#[derive(Debug, Deserialize)]
struct RelationFile {
    format_version: u32,
    relation: Vec<RelationEntry>,
}

pub fn relations() -> &'static [RelationEntry] {
    static R: OnceLock<Vec<RelationEntry>> = OnceLock::new();
    R.get_or_init(|| {
        let f: RelationFile = toml::from_str(EMBEDDED).expect("embedded relations are valid");
        assert_eq!(f.format_version, 1);
        f.relation
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpsilonCheck {
    pub eps: f64,
    pub max_vanishing_norm: f64,
    pub min_surviving_norm: f64,
    pub survivor_residual: f64,
    pub survivor_tolerance: f64,
    pub fingerprint_match: bool,
    pub nu_scale_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelationReport {
    pub label: String,
    pub kind: RelationKind,
    pub covectors: Vec<usize>,
    pub corrected: bool,
    pub flagged: bool,
    pub skipped: bool,
    pub pass: bool,
    pub failures: Vec<String>,
    /// Covectors whose G-norm decays, as detected numerically.
    pub detected_vanishing: Vec<usize>,
    pub decay_exponents: Vec<(usize, f64)>,
    pub epsilon_checks: Vec<EpsilonCheck>,
    pub nu_ratio: Option<f64>,
}

fn indices(config: &CovectorConfiguration, labels: &[usize]) -> Result<Vec<usize>, String> {
    labels
        .iter()
        .map(|l| {
            config
                .index_of(&l.to_string())
                .ok_or_else(|| format!("no covector labelled {l}"))
        })
        .collect()
}

fn label_num(config: &CovectorConfiguration, i: usize) -> usize {
    config.label(i).parse().unwrap_or(0)
}

/// Sorted nu values of the multi flats.
fn nu_multiset(config: &CovectorConfiguration, tol: Tolerance) -> Result<Vec<f64>, CatalogueError> {
    let r = check_vee(config, tol)?;
    let mut v: Vec<f64> = r
        .per_flat
        .iter()
        .filter(|f| f.kind == FlatKind::Multi)
        .filter_map(|f| f.nu)
        .collect();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// Largest relative deviation between two multisets after a common rescaling.
fn scale_error(a: &[f64], b: &[f64]) -> Option<f64> {
    if a.len() != b.len() || a.is_empty() {
        return None;
    }
    let s = b[b.len() - 1] / a[a.len() - 1];
    Some(
        a.iter()
            .zip(b)
            .map(|(x, y)| (x * s - y).abs() / y.abs())
            .fold(0.0, f64::max),
    )
}

/// Verifies one relation. With `strict`, the printed label set is used and
/// flagged rows are skipped; otherwise corrections apply.
pub fn verify_relation(
    cat: &Catalogue,
    rel: &RelationEntry,
    strict: bool,
    tol: Tolerance,
) -> Result<RelationReport, CatalogueError> {
    let covectors = match (&rel.corrected, strict) {
        (Some(c), false) => c.clone(),
        _ => rel.covectors.clone(),
    };
    let mut report = RelationReport {
        label: rel.label.clone(),
        kind: rel.kind,
        covectors: covectors.clone(),
        corrected: !strict && rel.corrected.is_some(),
        flagged: rel.flagged,
        skipped: strict && rel.flagged,
        pass: false,
        failures: vec![],
        detected_vanishing: vec![],
        decay_exponents: vec![],
        epsilon_checks: vec![],
        nu_ratio: None,
    };
    if report.skipped {
        report.pass = true;
        return Ok(report);
    }
    match rel.kind {
        RelationKind::Extension => extension(cat, rel, &covectors, tol, &mut report)?,
        RelationKind::Degeneration => degeneration(cat, rel, &covectors, tol, &mut report)?,
    }
    report.pass = report.failures.is_empty();
    Ok(report)
}

fn extension(
    cat: &Catalogue,
    rel: &RelationEntry,
    added: &[usize],
    tol: Tolerance,
    report: &mut RelationReport,
) -> Result<(), CatalogueError> {
    let outer = cat.construct(&rel.target, &rel.outer_params)?;
    let added_idx = match indices(&outer, added) {
        Ok(i) => i,
        Err(e) => {
            report.failures.push(e);
            return Ok(());
        }
    };
    let keep: Vec<usize> = (0..outer.len()).filter(|i| !added_idx.contains(i)).collect();
    let sub = outer.subset(&keep)?;
    let sub_report = check_vee(&sub, tol)?;
    if !sub_report.is_vee_system {
        report
            .failures
            .push(format!("remaining covectors are not a vee-system (residual {:e})", sub_report.max_residual));
        return Ok(());
    }
    let entry = cat.get(&rel.system)?;
    let inner_params = rel
        .inner_params
        .clone()
        .unwrap_or_else(|| entry.samples.first().cloned().unwrap_or_default());
    let inner = entry.construct(&inner_params)?;
    if find_isomorphism(&decompose(&inner)?, &sub_report.decomposition).is_none() {
        report.failures.push(format!("remaining covectors do not form the {} matroid", rel.system));
    }
    if rel.inner_params.is_some() {
        let a = nu_multiset(&inner, tol)?;
        let b = nu_multiset(&sub, tol)?;
        match scale_error(&a, &b) {
            Some(e) if e < 1e-8 => {}
            other => report.failures.push(format!("nu multiset differs from {} ({other:?})", entry.describe(&inner_params))),
        }
    }
    let ext = check_extension(&sub, &outer, &keep, tol)?;
    if !ext.is_extension {
        report.failures.push("covectors are not proportional to their images".into());
    }
    report.nu_ratio = ext.nu_ratio;
    if ext.nu_ratio.is_none() {
        report.failures.push("no common nu ratio over corresponding flats".into());
    }
    Ok(())
}

fn degeneration(
    cat: &Catalogue,
    rel: &RelationEntry,
    vanishing: &[usize],
    tol: Tolerance,
    report: &mut RelationReport,
) -> Result<(), CatalogueError> {
    let entry = cat.get(&rel.system)?;
    let target_entry = cat.get(&rel.target)?;
    let target_params = rel
        .target_params
        .clone()
        .unwrap_or_else(|| target_entry.samples.first().cloned().unwrap_or_default());
    let target = target_entry.construct(&target_params)?;
    let target_fp = fingerprint(&decompose(&target)?);
    let target_nu = match &rel.target_params {
        Some(_) => Some(nu_multiset(&target, tol)?),
        None => None,
    };
    let mut norms: Vec<Vec<f64>> = Vec::new();
    let mut first: Option<CovectorConfiguration> = None;
    for &eps in &EPSILONS {
        let mut params = rel.params.clone();
        let mut env = Env::new();
        env.insert("eps".into(), eps);
        for (k, e) in &rel.path {
            params.insert(k.clone(), eval(e, &env)?);
        }
        let config = entry.construct(&params)?;
        let form = canonical_form(&config)?;
        let p = form.pairing_matrix(&config);
        let nrm: Vec<f64> = (0..config.len()).map(|i| p[(i, i)].sqrt()).collect();
        let van_idx = match indices(&config, vanishing) {
            Ok(i) => i,
            Err(e) => {
                report.failures.push(e);
                return Ok(());
            }
        };
        let keep: Vec<usize> = (0..config.len()).filter(|i| !van_idx.contains(i)).collect();
        let survivors = config.subset(&keep)?;
        let stol = Tolerance::new(tol.rtol.max(10.0 * eps));
        let sr = check_vee(&survivors, stol)?;
        let fp = fingerprint(&sr.decomposition);
        let fingerprint_match = fp.canonical_profile == target_fp.canonical_profile;
        let nu_scale_error = match &target_nu {
            Some(t) => {
                let mut s: Vec<f64> = sr.per_flat.iter().filter_map(|f| f.nu).collect();
                s.sort_by(f64::total_cmp);
                Some(scale_error(&s, t).unwrap_or(f64::INFINITY))
            }
            None => None,
        };
        let check = EpsilonCheck {
            eps,
            max_vanishing_norm: van_idx.iter().map(|&i| nrm[i]).fold(0.0, f64::max),
            min_surviving_norm: keep.iter().map(|&i| nrm[i]).fold(f64::INFINITY, f64::min),
            survivor_residual: sr.max_residual,
            survivor_tolerance: stol.rtol,
            fingerprint_match,
            nu_scale_error,
        };
        if !sr.is_vee_system {
            report.failures.push(format!(
                "eps={eps:e}: survivors fail the vee-conditions (residual {:e} > {:e})",
                sr.max_residual, stol.rtol
            ));
        }
        if !fingerprint_match {
            report.failures.push(format!("eps={eps:e}: survivors' matroid differs from {}", rel.target));
        }
        if let Some(e) = nu_scale_error {
            if e > 10.0 * eps {
                report.failures.push(format!("eps={eps:e}: nu multiset off by {e:e} after rescaling"));
            }
        }
        report.epsilon_checks.push(check);
        norms.push(nrm);
        first.get_or_insert(config);
    }
    let config = first.expect("two epsilons evaluated");
    let ratio = (EPSILONS[0] / EPSILONS[1]).log10();
    for i in 0..config.len() {
        let k = (norms[0][i] / norms[1][i]).log10() / ratio;
        let l = label_num(&config, i);
        report.decay_exponents.push((l, k));
        if k >= MIN_DECAY {
            report.detected_vanishing.push(l);
        }
        let listed = vanishing.contains(&l);
        if listed && k < MIN_DECAY {
            report.failures.push(format!("covector {l} does not vanish (decay exponent {k:.3})"));
        }
        if !listed && k > MAX_SURVIVOR_DECAY {
            report.failures.push(format!("covector {l} vanishes but is not listed (decay exponent {k:.3})"));
        }
    }
    Ok(())
}
