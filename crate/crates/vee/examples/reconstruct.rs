//! Rebuilds H3 from four points. One point is fixed by a cross-ratio that
//! solves x^2 - x - 1 = 0, so there are two realisations.
//!
//! ```bash
//! cargo run -p vee --example reconstruct
//! ```

use vee::catalogue::{Catalogue, Params};
use vee::projgeom::{builtin_script, check_reconstruction};

fn main() {
    let cat = Catalogue::builtin();
    for (script, id) in [("a3", "A3"), ("h3", "H3"), ("h4a1", "H4A1")] {
        let e = cat.get(id).unwrap();
        let c = e.construct(e.samples.first().unwrap_or(&Params::new())).unwrap();
        let s = builtin_script(script).unwrap();
        let branches: Vec<Option<usize>> = if s.has_branch() { vec![Some(0), Some(1)] } else { vec![None] };
        for b in branches {
            let r = check_reconstruction(&s, &c, b).unwrap();
            println!(
                "{id:<5} root {:>10} points {:>2} max error vs catalogue {:.2e}",
                r.root.map_or("-".into(), |x| format!("{x:.6}")),
                r.points.len(),
                r.max_error
            );
        }
    }
}
