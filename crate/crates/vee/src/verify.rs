//! The vee-conditions, the nu-function, admissible weights, and the
//! harmonic and extension checks.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::config::{canonical_form, restrict_forms, CanonicalForm, CovectorConfiguration, Tolerance};
use crate::error::VeeError;
use crate::matroid::{decompose, Flat, FlatDecomposition};
use crate::projgeom::{cross_ratio, ProjectivePoint};

/// Relative level below which a normalized pairing counts as orthogonal.
pub const ORTHOGONAL_TOL: f64 = 1e-8;
/// Residual threshold for the admissible-weight system.
pub const FEASIBLE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FlatKind {
    Pair,
    Multi,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlatVerdict {
    pub flat: Flat,
    pub kind: FlatKind,
    pub residual: f64,
    /// Half the sum of squared norms (multi flats).
    pub nu: Option<f64>,
    /// Least-squares factor of `G^Pi` against `G` on `Pi^v` (multi flats).
    pub nu_factor: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VeeReport {
    pub is_vee_system: bool,
    pub per_flat: Vec<FlatVerdict>,
    pub max_residual: f64,
    pub condition_number: f64,
    pub rtol: f64,
    #[serde(skip)]
    pub decomposition: FlatDecomposition,
}

impl VeeReport {
    /// `nu` keyed by index into `decomposition.flats`, multi flats only.
    pub fn nu_function(&self) -> BTreeMap<usize, f64> {
        self.per_flat
            .iter()
            .enumerate()
            .filter_map(|(k, v)| v.nu.map(|nu| (k, nu)))
            .collect()
    }
}

pub fn check_vee(config: &CovectorConfiguration, tol: Tolerance) -> Result<VeeReport, VeeError> {
    let form = canonical_form(config)?;
    let d = decompose(config)?;
    check_vee_with(config, &form, d, tol)
}

pub(crate) fn check_vee_with(
    config: &CovectorConfiguration,
    form: &CanonicalForm,
    d: FlatDecomposition,
    tol: Tolerance,
) -> Result<VeeReport, VeeError> {
    let p = form.pairing_matrix(config);
    let mut per_flat = Vec::with_capacity(d.flats.len());
    let mut max_residual: f64 = 0.0;
    for f in &d.flats {
        let verdict = if f.is_pair() {
            let (i, j) = (f.members[0], f.members[1]);
            let residual = p[(i, j)].abs() / (p[(i, i)] * p[(j, j)]).sqrt();
            FlatVerdict {
                flat: f.clone(),
                kind: FlatKind::Pair,
                residual,
                nu: None,
                nu_factor: None,
            }
        } else {
            let plane = restrict_forms(config, form, &f.members)?;
            let (factor, residual) = plane.proportionality();
            let nu = 0.5 * f.members.iter().map(|&m| p[(m, m)]).sum::<f64>();
            FlatVerdict {
                flat: f.clone(),
                kind: FlatKind::Multi,
                residual,
                nu: Some(nu),
                nu_factor: Some(factor),
            }
        };
        max_residual = max_residual.max(verdict.residual);
        per_flat.push(verdict);
    }
    Ok(VeeReport {
        is_vee_system: max_residual < tol.rtol,
        per_flat,
        max_residual,
        condition_number: form.condition_number,
        rtol: tol.rtol,
        decomposition: d,
    })
}

/// `nu(Pi) = 1/2 sum |a|^2` over the members of a multi flat.
pub fn nu_trace(config: &CovectorConfiguration, flat: &Flat) -> Result<f64, VeeError> {
    if flat.size() < 3 {
        return Err(VeeError::NotMultiFlat(flat.size()));
    }
    let form = canonical_form(config)?;
    let p = form.pairing_matrix(config);
    Ok(0.5 * flat.members.iter().map(|&m| p[(m, m)]).sum::<f64>())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightStatus {
    Feasible,
    Infeasible,
    Underdetermined,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightSolution {
    pub status: WeightStatus,
    /// Weight per multi flat, keyed by index into the decomposition.
    pub weights: BTreeMap<usize, f64>,
    pub universal_value: Option<f64>,
    pub constraint_residual: f64,
    /// Dimension of the solution space when feasible.
    pub nullity: usize,
}

/// Solves `sum_{Pi containing a} x_Pi = 1` over the multi flats.
pub fn solve_weights(config: &CovectorConfiguration) -> Result<WeightSolution, VeeError> {
    let report = check_vee(config, Tolerance::default())?;
    Ok(solve_weights_from(&report, config.len()))
}

pub(crate) fn solve_weights_from(report: &VeeReport, n: usize) -> WeightSolution {
    let d = &report.decomposition;
    let multi = &d.multi_flats;
    let infeasible = |residual| WeightSolution {
        status: WeightStatus::Infeasible,
        weights: BTreeMap::new(),
        universal_value: None,
        constraint_residual: residual,
        nullity: 0,
    };
    if multi.is_empty() {
        return infeasible(1.0);
    }
    let m = DMatrix::from_fn(n, multi.len(), |a, k| {
        if d.flats[multi[k]].contains(a) {
            1.0
        } else {
            0.0
        }
    });
    let ones = DVector::from_element(n, 1.0);
    let svd = m.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let eps = smax * 1e-10 * (n.max(multi.len()) as f64);
    let rank = svd.singular_values.iter().filter(|&&s| s > eps).count();
    let x = svd.solve(&ones, eps).expect("u and v were computed");
    let residual = (&m * &x - &ones).amax();
    if residual >= FEASIBLE_TOL {
        return infeasible(residual);
    }
    let weights: BTreeMap<usize, f64> = multi.iter().zip(x.iter()).map(|(&k, &w)| (k, w)).collect();
    let universal: f64 = weights
        .iter()
        .map(|(&k, &w)| w * report.per_flat[k].nu.unwrap_or(0.0))
        .sum();
    let nullity = multi.len() - rank;
    WeightSolution {
        status: if nullity == 0 {
            WeightStatus::Feasible
        } else {
            WeightStatus::Underdetermined
        },
        weights,
        universal_value: Some(universal),
        constraint_residual: residual,
        nullity,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HarmonicRecord {
    pub flat: Vec<usize>,
    /// All G-orthogonal pairs found in the flat.
    pub orthogonal_pairs: Vec<(usize, usize)>,
    /// The ordering `(a, b; c, d)` with the orthogonal pair last.
    pub ordering: Option<[usize; 4]>,
    pub cross_ratio: Option<f64>,
    pub verdict: bool,
    /// Set when the flat has no orthogonal pair.
    pub no_orthogonal_pair: bool,
}

/// Checks every 4-member flat for a harmonic range with an orthogonal pair.
///
pub fn check_harmonic(config: &CovectorConfiguration, tol: f64) -> Result<Vec<HarmonicRecord>, VeeError> {
    let form = canonical_form(config)?;
    let d = decompose(config)?;
    let p = form.pairing_matrix(config);
    let mut out = Vec::new();
    for f in d.flats.iter().filter(|f| f.size() == 4) {
        let m = &f.members;
        let mut ortho = Vec::new();
        for x in 0..4 {
            for y in x + 1..4 {
                let (i, j) = (m[x], m[y]);
                if p[(i, j)].abs() / (p[(i, i)] * p[(j, j)]).sqrt() < ORTHOGONAL_TOL {
                    ortho.push((i, j));
                }
            }
        }
        if ortho.is_empty() {
            out.push(HarmonicRecord {
                flat: m.clone(),
                orthogonal_pairs: vec![],
                ordering: None,
                cross_ratio: None,
                verdict: false,
                no_orthogonal_pair: true,
            });
            continue;
        }
        // Every orthogonal pair must split the flat harmonically; the record
        // reports the ordering of the first pair.
        let mut first = None;
        let mut verdict = true;
        for &(c, dd) in &ortho {
            let rest: Vec<usize> = m.iter().copied().filter(|&k| k != c && k != dd).collect();
            let ordering = [rest[0], rest[1], c, dd];
            let pts: Vec<ProjectivePoint> = ordering
                .iter()
                .map(|&k| ProjectivePoint::new(config.covector(k).as_slice()))
                .collect::<Result<_, _>>()
                .map_err(|_| VeeError::ZeroCovector(ordering[0]))?;
            let cr = cross_ratio(&pts[0], &pts[1], &pts[2], &pts[3]).ok();
            verdict &= cr.is_some_and(|v| (v + 1.0).abs() < tol);
            first.get_or_insert((ordering, cr));
        }
        let (ordering, cr) = first.expect("at least one pair");
        out.push(HarmonicRecord {
            flat: m.clone(),
            orthogonal_pairs: ortho,
            ordering: Some(ordering),
            cross_ratio: cr,
            verdict,
            no_orthogonal_pair: false,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlatRatio {
    /// Inner flat members (inner indices).
    pub inner: Vec<usize>,
    /// Outer flat containing the image (outer indices).
    pub outer: Vec<usize>,
    /// `nu_inner / nu_outer`.
    pub ratio: f64,
    /// The outer flat has members outside the image.
    pub enlarged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtensionReport {
    pub is_extension: bool,
    /// Common ratio over the corresponding (non-enlarged) multi flats.
    pub nu_ratio: Option<f64>,
    pub flat_ratios: Vec<FlatRatio>,
    pub max_angle: f64,
}

/// Checks that `inner` sits inside `outer` through `embedding`.
///
/// `embedding[i]` is the outer index of inner covector `i`. Ratios are
/// `nu_inner / nu_outer`; outer flats that pick up extra covectors are
/// listed but do not take part in the common ratio.
pub fn check_extension(
    inner: &CovectorConfiguration,
    outer: &CovectorConfiguration,
    embedding: &[usize],
    tol: Tolerance,
) -> Result<ExtensionReport, VeeError> {
    if embedding.len() != inner.len() {
        return Err(VeeError::BadEmbedding(format!(
            "{} images for {} covectors",
            embedding.len(),
            inner.len()
        )));
    }
    let n_out = outer.len();
    for (i, &e) in embedding.iter().enumerate() {
        if e >= n_out {
            return Err(VeeError::BadEmbedding(format!("image {e} out of range")));
        }
        if embedding[..i].contains(&e) {
            return Err(VeeError::BadEmbedding(format!("image {e} used twice")));
        }
    }
    let mut max_angle: f64 = 0.0;
    for (i, &e) in embedding.iter().enumerate() {
        let a = inner.covector(i).normalize();
        let b = outer.covector(e).normalize();
        let c = a.dot(&b);
        max_angle = max_angle.max((&b - &a * c).norm());
    }
    let is_extension = inner.dimension() == outer.dimension() && max_angle < 1e-8;
    if !is_extension {
        return Ok(ExtensionReport {
            is_extension,
            nu_ratio: None,
            flat_ratios: vec![],
            max_angle,
        });
    }
    let ri = check_vee(inner, tol)?;
    let ro = check_vee(outer, tol)?;
    let mut flat_ratios = Vec::new();
    for v in ri.per_flat.iter().filter(|v| v.kind == FlatKind::Multi) {
        let image: Vec<usize> = v.flat.members.iter().map(|&m| embedding[m]).collect();
        let o = ro
            .per_flat
            .iter()
            .find(|w| image.iter().all(|&x| w.flat.contains(x)))
            .expect("images of a flat lie on one outer flat");
        let nu_o = o.nu.unwrap_or(f64::NAN);
        flat_ratios.push(FlatRatio {
            inner: v.flat.members.clone(),
            outer: o.flat.members.clone(),
            ratio: v.nu.unwrap_or(f64::NAN) / nu_o,
            enlarged: o.flat.size() != image.len(),
        });
    }
    let kept: Vec<f64> = flat_ratios.iter().filter(|r| !r.enlarged).map(|r| r.ratio).collect();
    let nu_ratio = kept.first().copied().filter(|&r0| {
        kept.iter().all(|&r| (r - r0).abs() <= 1e-8 * r0.abs())
    });
    Ok(ExtensionReport {
        is_extension,
        nu_ratio,
        flat_ratios,
        max_angle,
    })
}

/// Direct check of `sum_b b(a^v) b^v = nu a^v` for every member of every plane.
///
/// Returns the largest relative deviation; used as an independent oracle.
pub fn per_covector_residual(config: &CovectorConfiguration) -> Result<f64, VeeError> {
    let form = canonical_form(config)?;
    let d = decompose(config)?;
    let n = config.len();
    let duals: Vec<DVector<f64>> = (0..n).map(|i| &form.gram_inverse * config.covector(i)).collect();
    let mut worst: f64 = 0.0;
    for f in &d.flats {
        for &a in &f.members {
            let mut s = DVector::zeros(config.dimension());
            for &b in &f.members {
                s += &duals[b] * config.covector(b).dot(&duals[a]);
            }
            let scale = s.norm().max(duals[a].norm() * 1e-300);
            let nu = s.dot(&duals[a]) / duals[a].norm_squared();
            worst = worst.max((&s - &duals[a] * nu).norm() / scale);
        }
    }
    Ok(worst)
}
