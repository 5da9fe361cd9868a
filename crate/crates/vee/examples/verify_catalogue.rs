//! Checks every catalogue entry at its sample parameters against the stored
//! Gram matrices, flat lists and nu values.
//!
//! ```bash
//! cargo run -p vee --example verify_catalogue
//! ```

use vee::catalogue::{verify_entry, Catalogue};
use vee::Tolerance;

fn main() {
    let cat = Catalogue::builtin();
    println!("catalogue sha256 {}", cat.sha256());
    for entry in cat.entries() {
        for params in &entry.samples {
            let r = verify_entry(cat, &entry.id, params, Tolerance::default()).expect("sample is admissible");
            println!(
                "{:<34} {} residual {:.1e} gram err {:.1e}",
                entry.describe(params),
                if r.pass { "pass" } else { "FAIL" },
                r.max_residual,
                r.gram_relative_error
            );
            if let Some(e) = &r.erratum {
                println!("    erratum: {e}");
            }
        }
    }
}
