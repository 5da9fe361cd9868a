//! Builds a configuration by hand and prints its 2-flats, then compares
//! matroids of two A3 realisations.
//!
//! ```bash
//! cargo run -p vee --example flats
//! ```

use vee::catalogue::Catalogue;
use vee::matroid::{decompose, fingerprint, same_matroid};
use vee::CovectorConfiguration;

fn main() {
    // B3: e_i, e_i + e_j, e_i - e_j.
    let b3 = CovectorConfiguration::from_columns(&[
        vec![1.0, 0.0, 0.0],
        vec![0.0, 1.0, 0.0],
        vec![0.0, 0.0, 1.0],
        vec![1.0, 1.0, 0.0],
        vec![1.0, -1.0, 0.0],
        vec![1.0, 0.0, 1.0],
        vec![1.0, 0.0, -1.0],
        vec![0.0, 1.0, 1.0],
        vec![0.0, 1.0, -1.0],
    ])
    .unwrap();
    let d = decompose(&b3).unwrap();
    for f in d.label_sets(b3.labels()) {
        println!("{{{}}}", f.join(" "));
    }
    println!("{:?}", fingerprint(&d).flat_size_multiset);

    let cat = Catalogue::builtin();
    let a = cat.construct("A3", &[("c1".into(), 1.0), ("c2".into(), 1.0), ("c3".into(), 1.0)].into()).unwrap();
    let b = cat.construct("A3", &[("c1".into(), 2.0), ("c2".into(), 3.0), ("c3".into(), 5.0)].into()).unwrap();
    let v = same_matroid(&decompose(&a).unwrap(), &decompose(&b).unwrap());
    println!("A3(1,1,1) vs A3(2,3,5): {v:?}");
}
