use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;
use vee::catalogue::Catalogue;
use vee::document::ConfigDocument;
use vee::CovectorConfiguration;

fn vee(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vee")).args(args).output().unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("vee-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn verify_h3_reports_nu() {
    let o = vee(&["verify", "--catalogue", "H3"]);
    assert_eq!(o.status.code(), Some(0));
    let r = json(&o);
    let mut nu: Vec<f64> = r["nu_table"].as_array().unwrap().iter().map(|x| x["nu"].as_f64().unwrap()).collect();
    nu.sort_by(f64::total_cmp);
    nu.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    assert_eq!(nu.len(), 2);
    assert!((nu[0] - 0.3).abs() < 1e-9 && (nu[1] - 0.5).abs() < 1e-9);
    assert_eq!(r["rtol"].as_f64(), Some(1e-9));
}

#[test]
fn verify_exit_codes() {
    assert_eq!(vee(&["verify", "--catalogue", "D3", "--params", "t=2,s=2"]).status.code(), Some(0));
    assert_eq!(vee(&["verify", "--catalogue", "D3", "--params", "t=0,s=0"]).status.code(), Some(2));
    assert_eq!(vee(&["verify", "--catalogue", "Z9"]).status.code(), Some(2));
    assert_eq!(vee(&["verify"]).status.code(), Some(2));
    assert_eq!(vee(&["verify", "--catalogue", "D3", "--params", "t"]).status.code(), Some(2));

    let a3 = Catalogue::builtin().get("A3").unwrap();
    let c = a3.construct(&a3.samples[0]).unwrap();
    let mut m = c.matrix().clone();
    for (k, x) in m.iter_mut().enumerate() {
        *x += 1e-2 * (k as f64 * 1.7).sin();
    }
    let p = CovectorConfiguration::with_labels(m, c.labels().to_vec()).unwrap();
    let path = tmp("perturbed-a3.json");
    std::fs::write(&path, ConfigDocument::from_config(&p).to_json()).unwrap();
    assert_eq!(vee(&["verify", path.to_str().unwrap()]).status.code(), Some(1));

    let bad = tmp("bad.json");
    std::fs::write(&bad, "{\"dimension\": 3, \"covectors\": [[\"1\", \"oops\", \"0\"]]}").unwrap();
    let o = vee(&["verify", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("covectors[0][1]"));
}

#[test]
fn deform_commands() {
    let o = vee(&["deform", "--catalogue", "D3", "--grid", "default"]);
    assert_eq!(o.status.code(), Some(0));
    let rows = json(&o)["rows"].as_array().unwrap().clone();
    assert_eq!(rows.len(), 5);
    assert!(rows.iter().all(|r| r["free_nu_corank"] == 3));

    let o = vee(&["deform", "--catalogue", "H4A1"]);
    assert!(json(&o)["systems"].as_array().unwrap().iter().all(|s| s["corank"] == 1));

    let o = vee(&["deform", "--catalogue", "A3", "--mode", "fixed"]);
    let s = json(&o)["systems"].as_array().unwrap().clone();
    assert_eq!(s.len(), 1);
    assert_eq!(s[0]["corank"], 1);
    assert_eq!(vee(&["deform", "--catalogue", "A3", "--mode", "loose"]).status.code(), Some(2));
}

#[test]
fn catalogue_commands() {
    let o = vee(&["catalogue", "list"]);
    assert_eq!(json(&o)["entries"].as_array().unwrap().len(), 17);
    let o = vee(&["catalogue", "relations"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stderr).contains("extensions: 5 rows, degenerations: 11 rows"));
    assert_eq!(vee(&["catalogue", "verify-all"]).status.code(), Some(0));
    // Printed sets with errata fail under --strict.
    assert_eq!(vee(&["catalogue", "relations", "--strict"]).status.code(), Some(1));
}

#[test]
fn other_subcommands() {
    let o = vee(&["matroid", "--catalogue", "B3"]);
    assert_eq!(json(&o)["flats"].as_array().unwrap().len(), 13);
    let o = vee(&["weights", "--catalogue", "A3"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["status"], "feasible");
    assert_eq!(vee(&["weights", "--catalogue", "D3"]).status.code(), Some(1));
    assert_eq!(vee(&["harmonic", "--catalogue", "B3"]).status.code(), Some(0));
    assert_eq!(vee(&["nu", "--catalogue", "G3", "--params", "t=1"]).status.code(), Some(0));
    assert_eq!(vee(&["reconstruct", "--catalogue", "H3", "--script", "h3", "--branch", "1"]).status.code(), Some(0));
    assert_eq!(vee(&["reconstruct", "--catalogue", "H3", "--script", "h3", "--branch", "0"]).status.code(), Some(1));
    assert_eq!(vee(&["reconstruct", "--catalogue", "H3", "--script", "h3"]).status.code(), Some(2));
}

#[test]
fn reports_are_deterministic_and_round_trip() {
    let out1 = tmp("r1.json");
    let out2 = tmp("r2.json");
    let cfg = tmp("h4a1.json");
    let h = Catalogue::builtin().construct("H4A1", &Default::default()).unwrap();
    std::fs::write(&cfg, ConfigDocument::from_config(&h).to_json()).unwrap();
    for out in [&out1, &out2] {
        let o = vee(&["verify", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--rtol", "1e-10"]);
        assert_eq!(o.status.code(), Some(0));
    }
    let strip = |p: &PathBuf| {
        let mut v: Value = serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap();
        v.as_object_mut().unwrap().remove("timing_ms");
        v.to_string()
    };
    assert_eq!(strip(&out1), strip(&out2));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out1).unwrap()).unwrap();
    assert_eq!(v["rtol"].as_f64(), Some(1e-10));
    let doc = ConfigDocument::parse(&std::fs::read_to_string(&cfg).unwrap()).unwrap();
    assert_eq!(doc.to_config().unwrap().matrix(), h.matrix());
}
