//! Rank-2 flats of the vector matroid and relabelling-invariant fingerprints.

use std::collections::BTreeMap;

use nalgebra::{DVector, Matrix3};
use serde::Serialize;

use crate::config::CovectorConfiguration;
use crate::error::VeeError;

/// Determinant threshold for coplanarity of unit covectors.
pub const COPLANAR_TOL: f64 = 1e-9;
/// Covector norms below this mark a decomposition as near-degenerate.
pub const SMALL_NORM: f64 = 1e-7;
/// Largest size for which `same_matroid` runs the exact search.
pub const EXACT_SEARCH_LIMIT: usize = 12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Flat {
    /// Sorted 0-based covector indices.
    pub members: Vec<usize>,
    /// Unit normal, first nonzero coordinate positive (rank 3 only).
    pub normal: Option<Vec<f64>>,
}

impl Flat {
    pub fn size(&self) -> usize {
        self.members.len()
    }

    pub fn is_pair(&self) -> bool {
        self.members.len() == 2
    }

    pub fn contains(&self, i: usize) -> bool {
        self.members.binary_search(&i).is_ok()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlatDecomposition {
    pub n: usize,
    /// Flats sorted by `(size, members)`.
    pub flats: Vec<Flat>,
    pub pair_flats: Vec<usize>,
    pub multi_flats: Vec<usize>,
    /// Set when some covector is shorter than [`SMALL_NORM`].
    pub near_degenerate: bool,
}

impl FlatDecomposition {
    fn from_member_sets(n: usize, mut sets: Vec<Vec<usize>>, normals: Option<Vec<Vec<f64>>>) -> Self {
        let mut keyed: Vec<(Vec<usize>, Option<Vec<f64>>)> = match normals {
            Some(ns) => sets.drain(..).zip(ns.into_iter().map(Some)).collect(),
            None => sets.drain(..).map(|s| (s, None)).collect(),
        };
        keyed.sort_by(|a, b| (a.0.len(), &a.0).cmp(&(b.0.len(), &b.0)));
        let flats: Vec<Flat> = keyed
            .into_iter()
            .map(|(members, normal)| Flat { members, normal })
            .collect();
        let pair_flats = (0..flats.len()).filter(|&i| flats[i].is_pair()).collect();
        let multi_flats = (0..flats.len()).filter(|&i| !flats[i].is_pair()).collect();
        FlatDecomposition {
            n,
            flats,
            pair_flats,
            multi_flats,
            near_degenerate: false,
        }
    }

    /// `table[i][j]` is the index of the flat containing `{i, j}`.
    pub fn pair_table(&self) -> Vec<Vec<usize>> {
        let mut t = vec![vec![usize::MAX; self.n]; self.n];
        for (k, f) in self.flats.iter().enumerate() {
            for &a in &f.members {
                for &b in &f.members {
                    if a != b {
                        t[a][b] = k;
                    }
                }
            }
        }
        t
    }

    /// The flat containing both indices.
    pub fn flat_of(&self, i: usize, j: usize) -> Option<&Flat> {
        self.flats.iter().find(|f| f.contains(i) && f.contains(j))
    }

    /// Flats as sets of labels, each sorted by label order in `labels`.
    pub fn label_sets(&self, labels: &[String]) -> Vec<Vec<String>> {
        self.flats
            .iter()
            .map(|f| f.members.iter().map(|&m| labels[m].clone()).collect())
            .collect()
    }

    /// Connected components of the graph joining members of common multi flats.
    pub fn multi_flat_components(&self) -> usize {
        let mut uf = UnionFind::new(self.n);
        for &k in &self.multi_flats {
            let m = &self.flats[k].members;
            for w in m.windows(2) {
                uf.union(w[0], w[1]);
            }
        }
        (0..self.n).filter(|&i| uf.find(i) == i).count()
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

fn pair_id(n: usize, i: usize, j: usize) -> usize {
    let (a, b) = if i < j { (i, j) } else { (j, i) };
    a * n + b
}

fn sign_normalized(v: DVector<f64>) -> Vec<f64> {
    let v = v.normalize();
    let s = v
        .iter()
        .find(|x| x.abs() > 1e-12)
        .map(|x| x.signum())
        .unwrap_or(1.0);
    (v * s).iter().copied().collect()
}

pub fn decompose(config: &CovectorConfiguration) -> Result<FlatDecomposition, VeeError> {
    let r = config.dimension();
    let n = config.len();
    let near_degenerate = (0..n).any(|i| config.covector(i).norm() < SMALL_NORM);
    match r {
        1 => {
            return Err(VeeError::SingularForm { rank: 1, dimension: 2 });
        }
        2 => {
            let mut d = FlatDecomposition::from_member_sets(n, vec![(0..n).collect()], None);
            d.near_degenerate = near_degenerate;
            return Ok(d);
        }
        3 => {}
        _ => return Err(VeeError::RankTooHigh(r)),
    }
    let units: Vec<DVector<f64>> = (0..n).map(|i| config.covector(i).normalize()).collect();
    let mut uf = UnionFind::new(n * n);
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let m = Matrix3::from_columns(&[
                    units[i].fixed_rows::<3>(0).into_owned(),
                    units[j].fixed_rows::<3>(0).into_owned(),
                    units[k].fixed_rows::<3>(0).into_owned(),
                ]);
                if m.determinant().abs() < COPLANAR_TOL {
                    uf.union(pair_id(n, i, j), pair_id(n, i, k));
                    uf.union(pair_id(n, i, j), pair_id(n, j, k));
                }
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..n {
        for j in i + 1..n {
            let root = uf.find(pair_id(n, i, j));
            let g = groups.entry(root).or_default();
            g.push(i);
            g.push(j);
        }
    }
    let mut sets = Vec::new();
    let mut normals = Vec::new();
    for (_, mut g) in groups {
        g.sort_unstable();
        g.dedup();
        let a = units[g[0]].fixed_rows::<3>(0).into_owned();
        let b = units[g[1]].fixed_rows::<3>(0).into_owned();
        let normal = a.cross(&b);
        normals.push(sign_normalized(DVector::from_column_slice(normal.as_slice())));
        sets.push(g);
    }
    let mut d = FlatDecomposition::from_member_sets(n, sets, Some(normals));
    d.near_degenerate = near_degenerate;
    Ok(d)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MatroidFingerprint {
    pub flat_size_multiset: Vec<usize>,
    /// Per covector, sorted sizes of the flats through it.
    pub point_profile: Vec<Vec<usize>>,
    pub canonical_profile: Vec<Vec<usize>>,
}

pub fn fingerprint(d: &FlatDecomposition) -> MatroidFingerprint {
    let mut sizes: Vec<usize> = d.flats.iter().map(Flat::size).collect();
    sizes.sort_unstable();
    let point_profile: Vec<Vec<usize>> = (0..d.n)
        .map(|p| {
            let mut s: Vec<usize> = d
                .flats
                .iter()
                .filter(|f| f.contains(p))
                .map(Flat::size)
                .collect();
            s.sort_unstable();
            s
        })
        .collect();
    let mut canonical_profile = point_profile.clone();
    canonical_profile.sort();
    MatroidFingerprint {
        flat_size_multiset: sizes,
        point_profile,
        canonical_profile,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Yes,
    No,
    Unknown,
}

pub fn same_matroid(d1: &FlatDecomposition, d2: &FlatDecomposition) -> Verdict {
    if d1.n != d2.n || fingerprint(d1).canonical_profile != fingerprint(d2).canonical_profile {
        return Verdict::No;
    }
    let identity: Vec<usize> = (0..d1.n).collect();
    if is_isomorphism(d1, d2, &identity) {
        return Verdict::Yes;
    }
    if d1.n > EXACT_SEARCH_LIMIT {
        return Verdict::Unknown;
    }
    match find_isomorphism(d1, d2) {
        Some(_) => Verdict::Yes,
        None => Verdict::No,
    }
}

/// True when `sigma` carries every flat of `d1` onto a flat of `d2`.
pub fn is_isomorphism(d1: &FlatDecomposition, d2: &FlatDecomposition, sigma: &[usize]) -> bool {
    if d1.n != d2.n || sigma.len() != d1.n || d1.flats.len() != d2.flats.len() {
        return false;
    }
    let targets: std::collections::BTreeSet<Vec<usize>> = d2.flats.iter().map(|f| f.members.clone()).collect();
    d1.flats.iter().all(|f| {
        let mut img: Vec<usize> = f.members.iter().map(|&m| sigma[m]).collect();
        img.sort_unstable();
        targets.contains(&img)
    })
}

/// Backtracking search for `sigma` mapping every flat of `d1` onto a flat of `d2`.
///
/// `sigma[i]` is the image of covector `i`. No size cutoff is applied.
pub fn find_isomorphism(d1: &FlatDecomposition, d2: &FlatDecomposition) -> Option<Vec<usize>> {
    if d1.n != d2.n {
        return None;
    }
    let f1 = fingerprint(d1);
    let f2 = fingerprint(d2);
    if f1.canonical_profile != f2.canonical_profile || f1.flat_size_multiset != f2.flat_size_multiset {
        return None;
    }
    let n = d1.n;
    let t1 = d1.pair_table();
    let t2 = d2.pair_table();
    let size1: Vec<usize> = d1.flats.iter().map(Flat::size).collect();
    let size2: Vec<usize> = d2.flats.iter().map(Flat::size).collect();
    let candidates: Vec<Vec<usize>> = (0..n)
        .map(|i| (0..n).filter(|&j| f1.point_profile[i] == f2.point_profile[j]).collect())
        .collect();
    // Most constrained points first, then points sharing large flats with earlier ones.
    let mut order: Vec<usize> = Vec::with_capacity(n);
    let mut placed = vec![false; n];
    while order.len() < n {
        let next = (0..n)
            .filter(|&i| !placed[i])
            .max_by_key(|&i| {
                let link: usize = order.iter().map(|&o| size1[t1[i][o]]).sum();
                (link, usize::MAX - candidates[i].len(), usize::MAX - i)
            })
            .unwrap();
        placed[next] = true;
        order.push(next);
    }
    let mut sigma = vec![usize::MAX; n];
    let mut used = vec![false; n];
    let ctx = Search {
        t1: &t1,
        t2: &t2,
        size1: &size1,
        size2: &size2,
        candidates: &candidates,
        order: &order,
    };
    if ctx.extend(0, &mut sigma, &mut used) {
        Some(sigma)
    } else {
        None
    }
}

struct Search<'a> {
    t1: &'a [Vec<usize>],
    t2: &'a [Vec<usize>],
    size1: &'a [usize],
    size2: &'a [usize],
    candidates: &'a [Vec<usize>],
    order: &'a [usize],
}

impl Search<'_> {
    fn extend(&self, depth: usize, sigma: &mut [usize], used: &mut [bool]) -> bool {
        if depth == self.order.len() {
            return true;
        }
        let p = self.order[depth];
        for &q in &self.candidates[p] {
            if used[q] || !self.consistent(depth, p, q, sigma) {
                continue;
            }
            sigma[p] = q;
            used[q] = true;
            if self.extend(depth + 1, sigma, used) {
                return true;
            }
            used[q] = false;
            sigma[p] = usize::MAX;
        }
        false
    }

    fn consistent(&self, depth: usize, p: usize, q: usize, sigma: &[usize]) -> bool {
        let done = &self.order[..depth];
        for &a in done {
            let fa = self.t1[p][a];
            let ga = self.t2[q][sigma[a]];
            if self.size1[fa] != self.size2[ga] {
                return false;
            }
        }
        for (x, &a) in done.iter().enumerate() {
            for &b in &done[x + 1..] {
                let col1 = self.t1[p][a] == self.t1[a][b];
                let col2 = self.t2[q][sigma[a]] == self.t2[sigma[a]][sigma[b]];
                if col1 != col2 {
                    return false;
                }
            }
        }
        true
    }
}
