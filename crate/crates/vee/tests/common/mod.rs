//! Randomised property checks shared by the property and acceptance suites.

#![allow(dead_code)]

use nalgebra::DMatrix;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

use vee::catalogue::{Catalogue, Params};
use vee::config::CovectorConfiguration;
use vee::deform::{build_system, Mode};
use vee::matroid::decompose;
use vee::verify::{check_vee, nu_trace, per_covector_residual, FlatKind};
use vee::Tolerance;

pub const CASES: u32 = 200;

/// A catalogue system at one of its samples, chosen by index.
pub fn catalogue_system(k: usize) -> CovectorConfiguration {
    let cat = Catalogue::builtin();
    let e = &cat.entries()[k % cat.entries().len()];
    let p = if e.samples.is_empty() { Params::new() } else { e.samples[(k / 17) % e.samples.len()].clone() };
    e.construct(&p).unwrap()
}

pub fn matrix3() -> impl Strategy<Value = DMatrix<f64>> {
    prop::collection::vec(-2.0..2.0f64, 9).prop_map(|v| DMatrix::from_vec(3, 3, v))
}

fn well_conditioned(c: &DMatrix<f64>) -> bool {
    let s = c.clone().svd(false, false).singular_values;
    s.min() > 0.2 && s.max() / s.min() < 50.0
}

fn multi_nu(c: &CovectorConfiguration) -> Vec<(Vec<usize>, f64)> {
    let r = check_vee(c, Tolerance::default()).unwrap();
    r.per_flat
        .iter()
        .filter(|v| v.kind == FlatKind::Multi)
        .map(|v| (v.flat.members.clone(), v.nu_factor.unwrap()))
        .collect()
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs())
}

/// A vee-system stays one under an invertible map, with the same flats,
/// nu values and free corank.
pub fn gl_invariance(k: usize, c: &DMatrix<f64>) -> Result<(), TestCaseError> {
    prop_assume!(well_conditioned(c));
    let a = catalogue_system(k);
    let b = a.transformed(c).unwrap();
    let rb = check_vee(&b, Tolerance::new(1e-8)).unwrap();
    prop_assert!(rb.is_vee_system, "residual {}", rb.max_residual);
    let (na, nb) = (multi_nu(&a), multi_nu(&b));
    prop_assert_eq!(na.len(), nb.len());
    for ((fa, x), (fb, y)) in na.iter().zip(&nb) {
        prop_assert_eq!(fa, fb);
        prop_assert!(close(*x, *y, 1e-8), "nu {} vs {}", x, y);
    }
    let ka = build_system(&a, Mode::FreeNu, Tolerance::default()).unwrap().corank;
    let kb = build_system(&b, Mode::FreeNu, Tolerance::new(1e-8)).unwrap().corank;
    prop_assert_eq!(ka, kb);
    Ok(())
}

/// nu is unchanged when every covector is multiplied by the same factor.
pub fn scaling_invariance(k: usize, lambda: f64) -> Result<(), TestCaseError> {
    let a = catalogue_system(k);
    let b = a.scaled(lambda).unwrap();
    for ((_, x), (f, y)) in multi_nu(&a).iter().zip(&multi_nu(&b)) {
        prop_assert!(close(*x, *y, 1e-10), "nu {} vs {}", x, y);
        let flat = vee::matroid::Flat { members: f.clone(), normal: None };
        prop_assert!(close(nu_trace(&b, &flat).unwrap(), *y, 1e-8));
    }
    Ok(())
}

/// Every pair of covectors lies in exactly one flat.
pub fn pair_coverage(k: usize, keep_mask: u32, c: &DMatrix<f64>) -> Result<(), TestCaseError> {
    prop_assume!(well_conditioned(c));
    let a = catalogue_system(k).transformed(c).unwrap();
    let keep: Vec<usize> = (0..a.len()).filter(|i| keep_mask >> (i % 32) & 1 == 1 || *i < 3).collect();
    let s = match a.subset(&keep) {
        Ok(s) => s,
        Err(_) => return Err(TestCaseError::reject("subset not spanning")),
    };
    let d = match decompose(&s) {
        Ok(d) => d,
        Err(_) => return Err(TestCaseError::reject("rank below 3")),
    };
    let n = s.len();
    let covered: usize = d.flats.iter().map(|f| f.size() * (f.size() - 1) / 2).sum();
    prop_assert_eq!(covered, n * (n - 1) / 2);
    Ok(())
}

/// Four covectors: either a generic set or a rotated A2 plus an orthogonal
/// line, mapped by `c`. The flat-based verdict must agree with the direct
/// per-covector check.
pub fn four_covector_oracle(vee_case: bool, raw: &[f64], c: &DMatrix<f64>) -> Result<(), TestCaseError> {
    prop_assume!(well_conditioned(c));
    let cols: Vec<Vec<f64>> = if vee_case {
        let (t, l) = (raw[0] * 3.0, 0.3 + raw[1].abs());
        (0..3)
            .map(|k| {
                let a = t + k as f64 * std::f64::consts::PI / 3.0;
                vec![a.cos(), a.sin(), 0.0]
            })
            .chain(std::iter::once(vec![0.0, 0.0, l]))
            .collect()
    } else {
        raw.chunks(3).map(|ch| ch.to_vec()).collect()
    };
    let base = match CovectorConfiguration::from_columns(&cols) {
        Ok(b) => b,
        Err(_) => return Err(TestCaseError::reject("degenerate draw")),
    };
    let cfg = base.transformed(c).unwrap();
    let oracle = match per_covector_residual(&cfg) {
        Ok(r) => r,
        Err(_) => return Err(TestCaseError::reject("rank below 3")),
    };
    prop_assume!(!(1e-7..1e-3).contains(&oracle));
    let r = check_vee(&cfg, Tolerance::new(1e-8)).unwrap();
    prop_assert_eq!(r.is_vee_system, oracle < 1e-7, "oracle {} residual {}", oracle, r.max_residual);
    if vee_case {
        prop_assert!(r.is_vee_system);
    }
    Ok(())
}

fn run<S: Strategy>(strategy: S, f: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Result<(), String>
where
    S::Value: std::fmt::Debug,
{
    let mut runner = TestRunner::new(Config {
        cases: CASES,
        max_global_rejects: 20 * CASES,
        failure_persistence: None,
        ..Config::default()
    });
    runner.run(&strategy, f).map_err(|e| e.to_string())
}

/// Runs the four properties with [`CASES`] trials each.
pub fn run_all() -> Vec<(&'static str, Result<(), String>)> {
    vec![
        ("GL-invariance", run((0..1000usize, matrix3()), |(k, c)| gl_invariance(k, &c))),
        ("uniform scaling", run((0..1000usize, 0.1..10.0f64), |(k, l)| scaling_invariance(k, l))),
        ("pair coverage", run((0..1000usize, any::<u32>(), matrix3()), |(k, m, c)| pair_coverage(k, m, &c))),
        (
            "4-covector oracle",
            run((any::<bool>(), prop::collection::vec(-1.0..1.0f64, 12), matrix3()), |(v, raw, c)| {
                four_covector_oracle(v, &raw, &c)
            }),
        ),
    ]
}
