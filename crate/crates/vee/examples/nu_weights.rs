//! The nu-function of H3 and the universal relation for systems with
//! admissible weights.
//!
//! ```bash
//! cargo run -p vee --example nu_weights
//! ```

use vee::catalogue::{Catalogue, Params};
use vee::verify::{check_vee, nu_trace, solve_weights, FlatKind};
use vee::Tolerance;

fn main() {
    let cat = Catalogue::builtin();
    let h3 = cat.construct("H3", &Params::new()).unwrap();
    let report = check_vee(&h3, Tolerance::default()).unwrap();
    for v in report.per_flat.iter().filter(|v| v.kind == FlatKind::Multi) {
        let labels: Vec<&str> = v.flat.members.iter().map(|&m| h3.label(m)).collect();
        println!(
            "{:<12} nu {:.6} trace {:.6}",
            labels.join(","),
            v.nu_factor.unwrap(),
            nu_trace(&h3, &v.flat).unwrap()
        );
    }

    for id in ["A3", "D3", "B3", "H3", "H4A1"] {
        let e = cat.get(id).unwrap();
        let c = e.construct(&e.samples[0]).unwrap();
        let w = solve_weights(&c).unwrap();
        println!("{:<5} {:?} sum x nu = {:?}", id, w.status, w.universal_value);
    }
}
