//! Points of the real projective plane, meets, cross-ratios, and
//! reconstruction scripts.
//!
//! # Script format
//!
//! One record per line; `#` starts a comment.
//!
//! ```text
//! basis: 4 5 6 7
//! branch: x^2-x-1
//! 9 = (6 5 ; 3 *) @ x
//! 1 = (5 4) ^ (6 7)
//! ```
//!
//! * `basis:` names the four points fixed as a projective basis.
//! * `t = (a b) ^ (c d)` places `t` at the meet of lines `ab` and `cd`.
//! * `branch:` gives a quadratic `p x^2 + q x + r` in `x`.
//! * `t = (a b ; c *) @ x` places `t` on line `ab` so that the cross-ratio
//!   `(a, b; c, t)` equals the chosen root. `*` may sit in the third slot
//!   instead, giving `(a, b; t, c)`.

use std::collections::BTreeMap;
use std::str::FromStr;

use nalgebra::Vector3;
use serde::Serialize;

use crate::config::CovectorConfiguration;
use crate::error::GeomError;

const POINT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProjectivePoint {
    coords: [f64; 3],
}

impl ProjectivePoint {
    pub fn new(v: &[f64]) -> Result<Self, GeomError> {
        if v.len() != 3 {
            return Err(GeomError::DegenerateLine);
        }
        Self::from_vector(Vector3::new(v[0], v[1], v[2])).ok_or(GeomError::DegenerateLine)
    }

    fn from_vector(v: Vector3<f64>) -> Option<Self> {
        let n = v.norm();
        if n.is_nan() || n <= 0.0 || !n.is_finite() {
            return None;
        }
        let v = v / n;
        let s = v.iter().find(|x| x.abs() > 1e-12).map_or(1.0, |x| x.signum());
        let v = v * s;
        Some(ProjectivePoint {
            coords: [v[0], v[1], v[2]],
        })
    }

    pub fn coords(&self) -> [f64; 3] {
        self.coords
    }

    fn v(&self) -> Vector3<f64> {
        Vector3::from(self.coords)
    }

    /// Euclidean distance between unit representatives, minimized over sign.
    pub fn distance(&self, other: &Self) -> f64 {
        let (a, b) = (self.v(), other.v());
        (a - b).norm().min((a + b).norm())
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.distance(other) < tol
    }

    /// Applies a linear map to the representative.
    pub fn mapped(&self, m: &nalgebra::Matrix3<f64>) -> Option<Self> {
        Self::from_vector(m * self.v())
    }
}

fn line(p: &ProjectivePoint, q: &ProjectivePoint) -> Result<Vector3<f64>, GeomError> {
    let l = p.v().cross(&q.v());
    if l.norm() < POINT_TOL {
        return Err(GeomError::DegenerateLine);
    }
    Ok(l.normalize())
}

/// Intersection of line `p1 p2` with line `q1 q2`.
pub fn meet(
    p1: &ProjectivePoint,
    p2: &ProjectivePoint,
    q1: &ProjectivePoint,
    q2: &ProjectivePoint,
) -> Result<ProjectivePoint, GeomError> {
    let l1 = line(p1, p2)?;
    let l2 = line(q1, q2)?;
    let x = l1.cross(&l2);
    if x.norm() < POINT_TOL {
        return Err(GeomError::CoincidentLines);
    }
    ProjectivePoint::from_vector(x).ok_or(GeomError::CoincidentLines)
}

/// Homogeneous coordinates of collinear points on the line through the first two.
fn line_coordinates(pts: &[ProjectivePoint; 4]) -> Result<[(f64, f64); 4], GeomError> {
    let e1 = pts[0].v();
    let w = pts[1].v() - e1 * e1.dot(&pts[1].v());
    if w.norm() < POINT_TOL {
        return Err(GeomError::DuplicatePoints);
    }
    let e2 = w.normalize();
    let normal = e1.cross(&e2);
    for p in &pts[2..] {
        if p.v().dot(&normal).abs() > 1e-9 {
            return Err(GeomError::NotCollinear);
        }
    }
    let mut out = [(0.0, 0.0); 4];
    for (o, p) in out.iter_mut().zip(pts) {
        *o = (p.v().dot(&e1), p.v().dot(&e2));
    }
    Ok(out)
}

/// `(p1, p2; p3, p4)` from the homogeneous two-coordinate formula.
///
/// A vanishing denominator is returned as infinity.
pub fn cross_ratio(
    p1: &ProjectivePoint,
    p2: &ProjectivePoint,
    p3: &ProjectivePoint,
    p4: &ProjectivePoint,
) -> Result<f64, GeomError> {
    let pts = [*p1, *p2, *p3, *p4];
    for i in 0..4 {
        for j in i + 1..4 {
            if pts[i].approx_eq(&pts[j], 1e-9) {
                return Err(GeomError::DuplicatePoints);
            }
        }
    }
    let c = line_coordinates(&pts)?;
    let det = |a: (f64, f64), b: (f64, f64)| a.0 * b.1 - b.0 * a.1;
    let num = det(c[0], c[2]) * det(c[1], c[3]);
    let den = det(c[0], c[3]) * det(c[1], c[2]);
    if den == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(num / den)
}

/// Point `t` on line `a b` with `(a, b; c, t) = x`, or `(a, b; t, c) = x`
/// when `third_slot` is set.
fn place_by_cross_ratio(
    a: &ProjectivePoint,
    b: &ProjectivePoint,
    c: &ProjectivePoint,
    x: f64,
    third_slot: bool,
) -> Result<ProjectivePoint, GeomError> {
    // In the basis (a, b): a = [1, 0], b = [0, 1], c = [xc, yc], t = [u, w].
    // (a, b; c, t) = (yc / w) (u / xc) and (a, b; t, c) is its reciprocal.
    let av = a.v();
    let bv = b.v();
    let m = nalgebra::Matrix3x2::from_columns(&[av, bv]);
    let sol = m
        .svd(true, true)
        .solve(&c.v(), 1e-14)
        .map_err(|_| GeomError::DegenerateLine)?;
    let (xc, yc) = (sol[0], sol[1]);
    let target = if third_slot { 1.0 / x } else { x };
    // (yc u) / (xc w) = target  =>  u = target xc, w = yc.
    let t = av * (target * xc) + bv * yc;
    ProjectivePoint::from_vector(t).ok_or(GeomError::DegenerateLine)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Step {
    Meet {
        target: String,
        left: (String, String),
        right: (String, String),
    },
    Branch {
        target: String,
        line: (String, String),
        reference: String,
        /// True when the unknown sits in the third slot of the cross-ratio.
        third_slot: bool,
    },
}

impl Step {
    pub fn target(&self) -> &str {
        match self {
            Step::Meet { target, .. } | Step::Branch { target, .. } => target,
        }
    }

    fn sources(&self) -> Vec<&str> {
        match self {
            Step::Meet { left, right, .. } => vec![&left.0, &left.1, &right.0, &right.1],
            Step::Branch { line, reference, .. } => vec![&line.0, &line.1, reference],
        }
    }
}

/// Quadratic `p x^2 + q x + r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Quadratic {
    pub p: f64,
    pub q: f64,
    pub r: f64,
}

impl Quadratic {
    /// Roots ordered `[(-q + s) / 2p, (-q - s) / 2p]`.
    pub fn roots(&self) -> Result<[f64; 2], GeomError> {
        let disc = self.q * self.q - 4.0 * self.p * self.r;
        if disc < 0.0 || self.p == 0.0 {
            return Err(GeomError::NoRealRoots);
        }
        let s = disc.sqrt();
        Ok([(-self.q + s) / (2.0 * self.p), (-self.q - s) / (2.0 * self.p)])
    }
}

impl FromStr for Quadratic {
    type Err = String;

    /// Parses sums of `c*x^2`, `c*x`, `c` terms, e.g. `x^2-x-1`.
    fn from_str(s: &str) -> Result<Self, String> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err("empty equation".into());
        }
        let mut terms = Vec::new();
        let mut cur = String::new();
        for (i, ch) in compact.char_indices() {
            if (ch == '+' || ch == '-') && i > 0 && !compact[..i].ends_with('^') {
                terms.push(std::mem::take(&mut cur));
            }
            cur.push(ch);
        }
        terms.push(cur);
        let mut q = Quadratic { p: 0.0, q: 0.0, r: 0.0 };
        for t in terms {
            let (coef, power) = if let Some(c) = t.strip_suffix("x^2") {
                (c, 2)
            } else if let Some(c) = t.strip_suffix('x') {
                (c, 1)
            } else {
                (t.as_str(), 0)
            };
            let coef = coef.trim_end_matches('*');
            let v = match coef {
                "" | "+" => 1.0,
                "-" => -1.0,
                c => c.parse::<f64>().map_err(|_| format!("bad term {t:?}"))?,
            };
            match power {
                2 => q.p += v,
                1 => q.q += v,
                _ => q.r += v,
            }
        }
        Ok(q)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReconstructionScript {
    pub basis_labels: [String; 4],
    pub steps: Vec<Step>,
    pub branch_equation: Option<Quadratic>,
}

fn parse_pair(s: &str, line: usize) -> Result<(String, String), GeomError> {
    let inner = s
        .trim()
        .strip_prefix('(')
        .and_then(|x| x.strip_suffix(')'))
        .ok_or_else(|| GeomError::Parse {
            line,
            message: format!("expected (a b), got {s:?}"),
        })?;
    let parts: Vec<&str> = inner.split(|c: char| c.is_whitespace() || c == ',').filter(|p| !p.is_empty()).collect();
    match parts.as_slice() {
        [a, b] => Ok((a.to_string(), b.to_string())),
        _ => Err(GeomError::Parse {
            line,
            message: format!("expected two labels in {s:?}"),
        }),
    }
}

impl FromStr for ReconstructionScript {
    type Err = GeomError;

    fn from_str(text: &str) -> Result<Self, GeomError> {
        let mut basis: Option<[String; 4]> = None;
        let mut branch = None;
        let mut steps = Vec::new();
        for (no, raw) in text.lines().enumerate() {
            let line = no + 1;
            let l = raw.split('#').next().unwrap_or("").trim();
            if l.is_empty() {
                continue;
            }
            let err = |message: String| GeomError::Parse { line, message };
            if let Some(rest) = l.strip_prefix("basis:") {
                let b: Vec<String> = rest.split_whitespace().map(String::from).collect();
                basis = Some(b.try_into().map_err(|_| err("basis needs four labels".into()))?);
            } else if let Some(rest) = l.strip_prefix("branch:") {
                branch = Some(rest.parse::<Quadratic>().map_err(err)?);
            } else {
                let (target, rhs) = l.split_once('=').ok_or_else(|| err(format!("unrecognised record {l:?}")))?;
                let target = target.trim().to_string();
                if let Some((spec, var)) = rhs.split_once('@') {
                    if var.trim() != "x" {
                        return Err(err("branch steps use the variable x".into()));
                    }
                    let spec = spec.trim();
                    let inner = spec
                        .strip_prefix('(')
                        .and_then(|x| x.strip_suffix(')'))
                        .ok_or_else(|| err(format!("expected (a b ; c *), got {spec:?}")))?;
                    let (lhs, rhs) = inner.split_once(';').ok_or_else(|| err("missing ';'".into()))?;
                    let line_pair = parse_pair(&format!("({lhs})"), line)?;
                    let tail: Vec<&str> = rhs.split_whitespace().collect();
                    let (reference, third_slot) = match tail.as_slice() {
                        [c, "*"] => (c.to_string(), false),
                        ["*", c] => (c.to_string(), true),
                        _ => return Err(err("expected 'c *' or '* c' after ';'".into())),
                    };
                    steps.push(Step::Branch {
                        target,
                        line: line_pair,
                        reference,
                        third_slot,
                    });
                } else {
                    let (a, b) = rhs.split_once('^').ok_or_else(|| err("expected (a b) ^ (c d)".into()))?;
                    steps.push(Step::Meet {
                        target,
                        left: parse_pair(a, line)?,
                        right: parse_pair(b, line)?,
                    });
                }
            }
        }
        let basis_labels = basis.ok_or(GeomError::Parse {
            line: 0,
            message: "missing basis record".into(),
        })?;
        let script = ReconstructionScript {
            basis_labels,
            steps,
            branch_equation: branch,
        };
        script.check_order()?;
        Ok(script)
    }
}

impl ReconstructionScript {
    fn check_order(&self) -> Result<(), GeomError> {
        let mut defined: Vec<&str> = self.basis_labels.iter().map(String::as_str).collect();
        for (k, s) in self.steps.iter().enumerate() {
            for src in s.sources() {
                if !defined.contains(&src) {
                    return Err(GeomError::Parse {
                        line: 0,
                        message: format!("step {} uses {src:?} before it is defined", k + 1),
                    });
                }
            }
            if defined.contains(&s.target()) {
                return Err(GeomError::Parse {
                    line: 0,
                    message: format!("label {:?} defined twice", s.target()),
                });
            }
            defined.push(s.target());
        }
        if self.steps.iter().any(|s| matches!(s, Step::Branch { .. })) && self.branch_equation.is_none() {
            return Err(GeomError::Parse {
                line: 0,
                message: "branch step without a branch equation".into(),
            });
        }
        Ok(())
    }

    pub fn has_branch(&self) -> bool {
        self.steps.iter().any(|s| matches!(s, Step::Branch { .. }))
    }

    /// All labels in definition order.
    pub fn labels(&self) -> Vec<String> {
        self.basis_labels
            .iter()
            .cloned()
            .chain(self.steps.iter().map(|s| s.target().to_string()))
            .collect()
    }
}

/// Scripts shipped with the library, by name.
pub const BUILTIN_SCRIPTS: [(&str, &str); 4] = [
    ("a3", include_str!("../data/scripts/a3.txt")),
    ("b3", include_str!("../data/scripts/b3.txt")),
    ("h3", include_str!("../data/scripts/h3.txt")),
    ("h4a1", include_str!("../data/scripts/h4a1.txt")),
];

pub fn builtin_script(name: &str) -> Option<ReconstructionScript> {
    let key = name.to_ascii_lowercase();
    BUILTIN_SCRIPTS
        .iter()
        .find(|(n, _)| *n == key)
        .map(|(_, text)| text.parse().expect("shipped scripts parse"))
}

/// Which root of the branch equation to use: 0 takes `+sqrt`, 1 takes `-sqrt`.
pub type BranchChoice = usize;

/// Executes the script from four basis points; returns every point by label.
pub fn run_reconstruction(
    script: &ReconstructionScript,
    basis: &[ProjectivePoint; 4],
    branch: Option<BranchChoice>,
) -> Result<BTreeMap<String, ProjectivePoint>, GeomError> {
    for i in 0..4 {
        for j in i + 1..4 {
            for k in j + 1..4 {
                let m = nalgebra::Matrix3::from_columns(&[basis[i].v(), basis[j].v(), basis[k].v()]);
                if m.determinant().abs() < 1e-9 {
                    return Err(GeomError::StepDegenerate {
                        step: 0,
                        target: "basis".into(),
                        reason: "three basis points are collinear".into(),
                    });
                }
            }
        }
    }
    let root = match (script.has_branch(), branch) {
        (false, _) => None,
        (true, None) => return Err(GeomError::BranchRequired),
        (true, Some(b)) => {
            let eq = script.branch_equation.ok_or(GeomError::BranchRequired)?;
            Some(eq.roots()?[b.min(1)])
        }
    };
    let mut pts: BTreeMap<String, ProjectivePoint> = script
        .basis_labels
        .iter()
        .cloned()
        .zip(basis.iter().copied())
        .collect();
    let get = |pts: &BTreeMap<String, ProjectivePoint>, l: &str| pts.get(l).copied().ok_or_else(|| GeomError::UnknownLabel(l.into()));
    for (k, s) in script.steps.iter().enumerate() {
        let wrap = |e: GeomError| GeomError::StepDegenerate {
            step: k + 1,
            target: s.target().into(),
            reason: e.to_string(),
        };
        let p = match s {
            Step::Meet { left, right, .. } => meet(
                &get(&pts, &left.0)?,
                &get(&pts, &left.1)?,
                &get(&pts, &right.0)?,
                &get(&pts, &right.1)?,
            )
            .map_err(wrap)?,
            Step::Branch {
                line,
                reference,
                third_slot,
                ..
            } => place_by_cross_ratio(
                &get(&pts, &line.0)?,
                &get(&pts, &line.1)?,
                &get(&pts, reference)?,
                root.expect("root chosen above"),
                *third_slot,
            )
            .map_err(wrap)?,
        };
        pts.insert(s.target().to_string(), p);
    }
    Ok(pts)
}

/// Sign-normalized directions of the covectors of a rank-3 configuration.
pub fn projectivize(config: &CovectorConfiguration) -> Result<BTreeMap<String, ProjectivePoint>, GeomError> {
    if config.dimension() != 3 {
        return Err(GeomError::DegenerateLine);
    }
    (0..config.len())
        .map(|i| Ok((config.label(i).to_string(), ProjectivePoint::new(config.covector(i).as_slice())?)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReconstructionCheck {
    pub branch: Option<BranchChoice>,
    pub root: Option<f64>,
    pub points: BTreeMap<String, ProjectivePoint>,
    /// Largest angle between a reconstructed point and the configuration's.
    pub max_error: f64,
    /// Configuration labels the script never reaches.
    pub unreached: Vec<String>,
}

/// Runs `script` from the configuration's own basis points and measures the
/// angular error against every other covector.
pub fn check_reconstruction(
    script: &ReconstructionScript,
    config: &CovectorConfiguration,
    branch: Option<BranchChoice>,
) -> Result<ReconstructionCheck, GeomError> {
    let target = projectivize(config)?;
    let basis: Vec<ProjectivePoint> = script
        .basis_labels
        .iter()
        .map(|l| target.get(l).copied().ok_or_else(|| GeomError::UnknownLabel(l.clone())))
        .collect::<Result<_, _>>()?;
    let basis: [ProjectivePoint; 4] = basis.try_into().expect("four labels");
    let points = run_reconstruction(script, &basis, branch)?;
    let mut max_error: f64 = 0.0;
    let mut unreached = Vec::new();
    for (l, p) in &target {
        match points.get(l) {
            Some(q) => max_error = max_error.max(p.distance(q)),
            None => unreached.push(l.clone()),
        }
    }
    let root = match (branch, script.branch_equation) {
        (Some(b), Some(eq)) if script.has_branch() => Some(eq.roots()?[b.min(1)]),
        _ => None,
    };
    Ok(ReconstructionCheck {
        branch,
        root,
        points,
        max_error,
        unreached,
    })
}
