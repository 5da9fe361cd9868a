//! Cross-ratios of the 4-member flats of every catalogue system.
//!
//! ```bash
//! cargo run -p vee --example harmonic
//! ```

use vee::catalogue::{Catalogue, Params};
use vee::verify::check_harmonic;

fn main() {
    let cat = Catalogue::builtin();
    for e in cat.entries() {
        let c = e.construct(e.samples.first().unwrap_or(&Params::new())).unwrap();
        let recs = check_harmonic(&c, 1e-8).unwrap();
        if recs.is_empty() {
            continue;
        }
        let ok = recs.iter().filter(|r| r.verdict).count();
        println!("{:<12} {ok}/{} four-point flats harmonic", e.id, recs.len());
        for r in recs.iter().filter(|r| !r.verdict) {
            println!("    {:?} cross-ratio {:?}", r.flat, r.cross_ratio);
        }
    }
}
