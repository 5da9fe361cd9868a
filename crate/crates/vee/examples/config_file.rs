//! Writes a configuration document, reads it back, and prints the report
//! the command-line tool would produce.
//!
//! ```bash
//! cargo run -p vee --example config_file
//! ```

use vee::catalogue::Catalogue;
use vee::document::{ConfigDocument, ReportDocument};
use vee::Tolerance;

fn main() {
    let g3 = Catalogue::builtin().construct("G3", &[("t".into(), 1.0)].into()).unwrap();
    let text = ConfigDocument::from_config(&g3).to_json();
    let back = ConfigDocument::parse(&text).unwrap().to_config().unwrap();
    assert_eq!(back.matrix(), g3.matrix());
    let report = ReportDocument::build(&back, text.as_bytes(), Tolerance::default()).unwrap();
    println!("input sha256 {}", report.input_sha256);
    println!("vee-system {}", report.vee.is_vee_system);
    for row in &report.nu_table {
        println!("  {{{}}} nu {:.6}", row.flat.join(" "), row.nu);
    }
    println!("coranks {:?}", report.coranks);
}
