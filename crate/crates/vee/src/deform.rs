//! Linearised vee-conditions in the scaling velocities `xi`.
//!
//! With `X = sum xi_a a a^T`, pair flats contribute `X(a^v, b^v) = 0`. A
//! multi flat with basis `(u, v) = (a^v, b^v)` contributes the restriction
//! `M = (X^Pi - nu X)|Pi^v`, written as the triple `(M_uu, M_uv, M_vv)`.
//! In free mode `M` must be proportional to `G|Pi^v`; the unknown factor
//! is eliminated with two components of the cross product against the
//! triple of `G`. In fixed mode all three entries vanish.

use nalgebra::{DMatrix, DVector, Vector3};
use serde::Serialize;

use crate::config::{canonical_form, restrict_forms, CovectorConfiguration, Tolerance};
use crate::error::VeeError;
use crate::verify::{check_vee_with, VeeReport};

/// Singular values below `s_max * RANK_FACTOR * max(m, n)` count as zero.
pub const RANK_FACTOR: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    FreeNu,
    FixedNu,
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "free" | "freeNu" | "free-nu" => Ok(Mode::FreeNu),
            "fixed" | "fixedNu" | "fixed-nu" => Ok(Mode::FixedNu),
            _ => Err(format!("unknown mode {s:?} (free|fixed)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeformationSystem {
    pub mode: Mode,
    #[serde(skip)]
    pub matrix: DMatrix<f64>,
    pub rows: usize,
    pub unknowns: usize,
    pub rank: usize,
    pub corank: usize,
    #[serde(skip)]
    pub kernel_basis: Vec<DVector<f64>>,
    /// Descending; padded with zeros to `n` entries when `m < n`.
    pub singular_values: Vec<f64>,
    pub threshold: f64,
    /// Smallest kept over largest dropped singular value.
    pub spectral_gap: f64,
}

impl DeformationSystem {
    /// `|M xi|_inf / |xi|_inf`.
    pub fn residual(&self, xi: &DVector<f64>) -> f64 {
        (&self.matrix * xi).amax() / xi.amax()
    }
}

/// Rows of the linear system for a configuration known to be a vee-system.
pub fn assemble(config: &CovectorConfiguration, report: &VeeReport, mode: Mode) -> Result<DMatrix<f64>, VeeError> {
    let form = canonical_form(config)?;
    let n = config.len();
    let a = config.matrix();
    let duals: Vec<DVector<f64>> = (0..n).map(|i| &form.gram_inverse * a.column(i)).collect();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for v in &report.per_flat {
        let m = &v.flat.members;
        if v.flat.is_pair() {
            let (i, j) = (m[0], m[1]);
            rows.push((0..n).map(|g| a.column(g).dot(&duals[i]) * a.column(g).dot(&duals[j])).collect());
            continue;
        }
        let nu = v.nu.expect("multi flat carries nu");
        let plane = restrict_forms(config, &form, m)?;
        let (u, w) = (&plane.basis[0], &plane.basis[1]);
        let g = &plane.restricted_gram;
        let gt = Vector3::new(g[(0, 0)], g[(0, 1)], g[(1, 1)]);
        // Column g of the 3 x n block holds the contribution of xi_g.
        let block: Vec<Vector3<f64>> = (0..n)
            .map(|c| {
                let col = a.column(c);
                let (cu, cw) = (col.dot(u), col.dot(w));
                let weight = if v.flat.contains(c) { 1.0 - nu } else { -nu };
                Vector3::new(cu * cu, cu * cw, cw * cw) * weight
            })
            .collect();
        match mode {
            Mode::FixedNu => {
                for k in 0..3 {
                    rows.push(block.iter().map(|b| b[k]).collect());
                }
            }
            Mode::FreeNu => {
                let pivot = gt.iamax();
                let crosses: Vec<Vector3<f64>> = block.iter().map(|b| b.cross(&gt)).collect();
                for k in (0..3).filter(|&k| k != pivot) {
                    rows.push(crosses.iter().map(|c| c[k]).collect());
                }
            }
        }
    }
    let m = rows.len();
    let mut mat = DMatrix::from_fn(m, n, |i, j| rows[i][j]);
    for mut r in mat.row_iter_mut() {
        let nrm = r.norm();
        if nrm > 0.0 {
            r /= nrm;
        }
    }
    Ok(mat)
}

pub fn build_system(config: &CovectorConfiguration, mode: Mode, tol: Tolerance) -> Result<DeformationSystem, VeeError> {
    let form = canonical_form(config)?;
    let report = check_vee_with(config, &form, crate::matroid::decompose(config)?, tol)?;
    if !report.is_vee_system {
        return Err(VeeError::NotAVeeSystem(report.max_residual));
    }
    let matrix = assemble(config, &report, mode)?;
    Ok(analyse(matrix, mode))
}

fn analyse(matrix: DMatrix<f64>, mode: Mode) -> DeformationSystem {
    let (m, n) = matrix.shape();
    let padded = if m < n {
        let mut p = DMatrix::zeros(n, n);
        p.view_mut((0, 0), (m, n)).copy_from(&matrix);
        p
    } else {
        matrix.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("v_t requested");
    let mut idx: Vec<usize> = (0..svd.singular_values.len()).collect();
    idx.sort_by(|&x, &y| svd.singular_values[y].total_cmp(&svd.singular_values[x]));
    let mut sv: Vec<f64> = idx.iter().map(|&i| svd.singular_values[i]).collect();
    sv.resize(n, 0.0);
    let smax = sv.first().copied().unwrap_or(0.0);
    let threshold = smax * RANK_FACTOR * (m.max(n) as f64);
    let rank = sv.iter().filter(|&&s| s > threshold).count();
    let kernel_basis: Vec<DVector<f64>> = idx[rank.min(idx.len())..]
        .iter()
        .map(|&i| v_t.row(i).transpose().into_owned())
        .collect();
    let spectral_gap = if rank == 0 || rank >= n || sv[rank] == 0.0 {
        f64::INFINITY
    } else {
        sv[rank - 1] / sv[rank]
    };
    DeformationSystem {
        mode,
        matrix,
        rows: m,
        unknowns: n,
        rank,
        corank: n - rank,
        kernel_basis,
        singular_values: sv,
        threshold,
        spectral_gap,
    }
}

/// Corank of the free system; 1 means only global scaling survives.
pub fn deformation_dimension(config: &CovectorConfiguration) -> Result<usize, VeeError> {
    Ok(build_system(config, Mode::FreeNu, Tolerance::default())?.corank)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RigidityReport {
    pub corank: usize,
    pub scaling_only: bool,
    /// Residual of the all-ones vector.
    pub ones_residual: f64,
    pub spectral_gap: f64,
}

pub fn rigidity_test(config: &CovectorConfiguration) -> Result<RigidityReport, VeeError> {
    let d = crate::matroid::decompose(config)?;
    let components = d.multi_flat_components();
    if components > 1 {
        return Err(VeeError::Reducible { components });
    }
    let sys = build_system(config, Mode::FixedNu, Tolerance::default())?;
    let ones = DVector::from_element(config.len(), 1.0);
    let ones_residual = sys.residual(&ones);
    Ok(RigidityReport {
        corank: sys.corank,
        scaling_only: sys.corank == 1 && ones_residual < 1e-9,
        ones_residual,
        spectral_gap: sys.spectral_gap,
    })
}
