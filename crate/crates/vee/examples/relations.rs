//! Extensions and degenerations between catalogue systems.
//!
//! ```bash
//! cargo run -p vee --example relations
//! ```

use vee::catalogue::Catalogue;
use vee::relations::{relations, verify_relation};
use vee::Tolerance;

fn main() {
    let cat = Catalogue::builtin();
    for rel in relations() {
        let r = verify_relation(cat, rel, false, Tolerance::default()).unwrap();
        print!("{:<48} {}", r.label, if r.pass { "pass" } else { "FAIL" });
        if let Some(x) = r.nu_ratio {
            print!("  nu ratio {x:.6}");
        }
        if !r.detected_vanishing.is_empty() {
            print!("  vanishing {:?}", r.detected_vanishing);
        }
        println!();
        if let (Some(c), Some(n)) = (&rel.corrected, &rel.note) {
            println!("    printed {:?}, used {:?}: {n}", rel.covectors, c);
        }
    }
}
