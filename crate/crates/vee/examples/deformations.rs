//! Coranks of the linearised vee-conditions: the A3 family moves in three
//! directions plus scaling, while (H4,A1) only scales.
//!
//! ```bash
//! cargo run -p vee --example deformations
//! ```

use vee::catalogue::{scan_family, Catalogue, Params};
use vee::deform::{build_system, rigidity_test, Mode};
use vee::Tolerance;

fn main() {
    let cat = Catalogue::builtin();
    let tol = Tolerance::default();
    for id in ["A3", "H4A1"] {
        let e = cat.get(id).unwrap();
        let c = e.construct(e.samples.first().unwrap_or(&Params::new())).unwrap();
        for mode in [Mode::FreeNu, Mode::FixedNu] {
            let s = build_system(&c, mode, tol).unwrap();
            println!("{id:<5} {mode:?}: {} rows, corank {}, gap {:.1e}", s.rows, s.corank, s.spectral_gap);
        }
        let r = rigidity_test(&c).unwrap();
        println!("      scaling only with fixed nu: {}", r.scaling_only);
    }

    let grid = &cat.get("D3").unwrap().grid;
    for row in scan_family(cat, "D3", grid, tol).unwrap() {
        println!("D3 {:?}: free {:?}", row.params, row.free_nu_corank);
    }
}
