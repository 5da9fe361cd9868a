//! Covector configurations and their canonical form.
//!
//! A configuration is an `r x n` matrix whose columns are covectors. The
//! canonical form is `G = sum_a a a^T`; duals are `a^v = G^{-1} a`.

use nalgebra::{DMatrix, DVector, Matrix2, SymmetricEigen};
use serde::Serialize;

use crate::error::VeeError;

/// Default relative tolerance used by every comparison.
pub const DEFAULT_RTOL: f64 = 1e-9;

/// Relative tolerance carried through the analyses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerance {
    pub rtol: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { rtol: DEFAULT_RTOL }
    }
}

impl Tolerance {
    pub fn new(rtol: f64) -> Self {
        Tolerance { rtol }
    }
}

/// A labelled, simple, spanning set of covectors.
#[derive(Debug, Clone, PartialEq)]
pub struct CovectorConfiguration {
    matrix: DMatrix<f64>,
    labels: Vec<String>,
}

impl CovectorConfiguration {
    /// Builds a configuration from an `r x n` matrix with default labels `1..n`.
    pub fn new(matrix: DMatrix<f64>) -> Result<Self, VeeError> {
        let labels = (1..=matrix.ncols()).map(|i| i.to_string()).collect();
        Self::with_labels(matrix, labels)
    }

    pub fn with_labels(matrix: DMatrix<f64>, labels: Vec<String>) -> Result<Self, VeeError> {
        Self::validated(matrix, labels, DEFAULT_RTOL)
    }

    /// Builds a configuration from columns.
    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self, VeeError> {
        let r = columns.first().ok_or(VeeError::Empty)?.len();
        for (i, c) in columns.iter().enumerate() {
            if c.len() != r {
                return Err(VeeError::DimensionMismatch {
                    index: i,
                    expected: r,
                    got: c.len(),
                });
            }
        }
        let m = DMatrix::from_fn(r, columns.len(), |i, j| columns[j][i]);
        Self::new(m)
    }

    fn validated(matrix: DMatrix<f64>, labels: Vec<String>, rtol: f64) -> Result<Self, VeeError> {
        let (r, n) = matrix.shape();
        if r == 0 || n == 0 {
            return Err(VeeError::Empty);
        }
        if labels.len() != n {
            return Err(VeeError::LabelCount {
                labels: labels.len(),
                covectors: n,
            });
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(VeeError::DuplicateLabel(l.clone()));
            }
        }
        if matrix.iter().any(|x| !x.is_finite()) {
            return Err(VeeError::NonFinite("covector entry".into()));
        }
        let units: Vec<DVector<f64>> = (0..n)
            .map(|j| {
                let c = matrix.column(j).into_owned();
                let nrm = c.norm();
                if nrm == 0.0 {
                    Err(VeeError::ZeroCovector(j))
                } else {
                    Ok(c / nrm)
                }
            })
            .collect::<Result<_, _>>()?;
        for i in 0..n {
            for j in i + 1..n {
                let d = units[i].dot(&units[j]);
                let sine = (&units[j] - &units[i] * d).norm();
                if sine < rtol {
                    return Err(VeeError::ProportionalCovectors(i, j));
                }
            }
        }
        let rank = numerical_rank(&matrix, rtol);
        if rank < r {
            return Err(VeeError::SingularForm { rank, dimension: r });
        }
        Ok(CovectorConfiguration { matrix, labels })
    }

    pub fn dimension(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn len(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.matrix.ncols() == 0
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn covector(&self, i: usize) -> DVector<f64> {
        self.matrix.column(i).into_owned()
    }

    /// Applies `C` to every covector.
    pub fn transformed(&self, c: &DMatrix<f64>) -> Result<Self, VeeError> {
        Self::with_labels(c * &self.matrix, self.labels.clone())
    }

    /// Multiplies every covector by `lambda`.
    pub fn scaled(&self, lambda: f64) -> Result<Self, VeeError> {
        Self::with_labels(&self.matrix * lambda, self.labels.clone())
    }

    /// Keeps the listed covectors, preserving their labels.
    pub fn subset(&self, keep: &[usize]) -> Result<Self, VeeError> {
        let n = self.len();
        if let Some(&bad) = keep.iter().find(|&&k| k >= n) {
            return Err(VeeError::IndexOutOfRange { index: bad, n });
        }
        let m = self.matrix.select_columns(keep);
        let labels = keep.iter().map(|&k| self.labels[k].clone()).collect();
        Self::with_labels(m, labels)
    }

    /// Reorders covectors: column `j` of the result is column `perm[j]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self, VeeError> {
        self.subset(perm)
    }
}

fn numerical_rank(m: &DMatrix<f64>, rtol: f64) -> usize {
    let sv = m.clone().svd(false, false).singular_values;
    let smax = sv.max();
    sv.iter().filter(|&&s| s > smax * rtol).count()
}

/// The form `G`, its inverse, and its spectral condition number.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalForm {
    pub gram: DMatrix<f64>,
    pub gram_inverse: DMatrix<f64>,
    pub condition_number: f64,
}

impl CanonicalForm {
    /// `G(x, y)` for vectors of `V`.
    pub fn apply(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        (x.transpose() * &self.gram * y)[(0, 0)]
    }

    /// The matrix of pairings `a_i^T G^{-1} a_j`.
    pub fn pairing_matrix(&self, config: &CovectorConfiguration) -> DMatrix<f64> {
        let a = config.matrix();
        a.transpose() * &self.gram_inverse * a
    }
}

pub fn canonical_form(config: &CovectorConfiguration) -> Result<CanonicalForm, VeeError> {
    let a = config.matrix();
    let g = a * a.transpose();
    let g = (&g + g.transpose()) * 0.5;
    let r = g.nrows();
    let eig = SymmetricEigen::new(g.clone());
    let emax = eig.eigenvalues.max();
    let emin = eig.eigenvalues.min();
    if emin <= emax * DEFAULT_RTOL {
        let rank = eig
            .eigenvalues
            .iter()
            .filter(|&&e| e > emax * DEFAULT_RTOL)
            .count();
        return Err(VeeError::SingularForm { rank, dimension: r });
    }
    let inv = &eig.eigenvectors
        * DMatrix::from_diagonal(&eig.eigenvalues.map(|e| 1.0 / e))
        * eig.eigenvectors.transpose();
    Ok(CanonicalForm {
        gram: g,
        gram_inverse: (&inv + inv.transpose()) * 0.5,
        condition_number: emax / emin,
    })
}

/// `a_i^v = G^{-1} a_i` (0-based index).
pub fn dual(config: &CovectorConfiguration, form: &CanonicalForm, index: usize) -> DVector<f64> {
    &form.gram_inverse * config.matrix().column(index)
}

/// `G(a_i^v, a_j^v) = a_i^T G^{-1} a_j` (0-based indices).
pub fn pairing(config: &CovectorConfiguration, form: &CanonicalForm, i: usize, j: usize) -> f64 {
    let a = config.matrix();
    (a.column(i).transpose() * &form.gram_inverse * a.column(j))[(0, 0)]
}

/// Restrictions of `G` and `G^Pi` to `Pi^v`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneForm {
    pub members: Vec<usize>,
    pub restricted_gram: Matrix2<f64>,
    pub restricted_plane_gram: Matrix2<f64>,
    pub basis: [DVector<f64>; 2],
}

impl PlaneForm {
    /// Least-squares factor `nu` with `G^Pi ~ nu G` and the relative deviation.
    pub fn proportionality(&self) -> (f64, f64) {
        let g = &self.restricted_gram;
        let p = &self.restricted_plane_gram;
        let nu = p.dot(g) / g.dot(g);
        let dev = (p - g * nu).norm() / p.norm().max(g.norm() * nu.abs()).max(f64::MIN_POSITIVE);
        (nu, dev)
    }
}

/// Restricts both forms to the plane spanned by the duals of the first two members.
pub fn restrict_forms(
    config: &CovectorConfiguration,
    form: &CanonicalForm,
    members: &[usize],
) -> Result<PlaneForm, VeeError> {
    let (a, b) = match members {
        [a, b, ..] => (*a, *b),
        _ => return Err(VeeError::NotMultiFlat(members.len())),
    };
    let u = dual(config, form, a);
    let v = dual(config, form, b);
    let cos = u.dot(&v) / (u.norm() * v.norm());
    if 1.0 - cos.abs() < DEFAULT_RTOL {
        return Err(VeeError::DegeneratePlane(a, b));
    }
    let g = Matrix2::new(
        form.apply(&u, &u),
        form.apply(&u, &v),
        form.apply(&v, &u),
        form.apply(&v, &v),
    );
    let mut p = Matrix2::zeros();
    for &m in members {
        let c = config.matrix().column(m);
        let cu = c.dot(&u);
        let cv = c.dot(&v);
        p += Matrix2::new(cu * cu, cu * cv, cv * cu, cv * cv);
    }
    Ok(PlaneForm {
        members: members.to_vec(),
        restricted_gram: g,
        restricted_plane_gram: p,
        basis: [u, v],
    })
}
