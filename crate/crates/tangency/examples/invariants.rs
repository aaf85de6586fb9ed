//! Tangency sequence and the (nu, type) pair for the running example
//! ideal y^2 + x z^n + x^(n+1) under theta = (d/dy, d/dz).
//!
//!     cargo run --example invariants

use tangency::ideal::Backend;
use tangency::invariants::{h_sequence, tg_invariant};
use tangency::parse::parse_problem;

fn main() {
    for n in [3u32, 4, 5] {
        let text = format!("vars x y z; theta d/dy, d/dz; ideal y^2 + x*z^{n} + x^{}", n + 1);
        let p = parse_problem(&text).unwrap();
        let seq = h_sequence(&p.theta, &p.ideal, 32, Backend::Local).unwrap();
        let tg = tg_invariant(&p.theta, &p.ideal, 32, Backend::Local).unwrap();
        println!("n = {n}: {tg}");
        for (i, stage) in seq.stages.iter().enumerate() {
            let gens: Vec<String> =
                stage.reduced_generators().iter().map(|g| g.to_string()).collect();
            println!("  H({i}) = ({})", gens.join(", "));
        }
    }
}
