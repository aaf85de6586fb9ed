//! The full three-step driver on the running example, printing the chart
//! tree and the verification report.
//!
//!     cargo run --example resolve_walkthrough

use tangency::parse::parse_problem;
use tangency::report::{render_tree_text, tree_doc};
use tangency::resolve::{resolve_local, verify_resolution, ResolveOptions};

fn main() {
    let p = parse_problem("vars x y z; theta d/dy, d/dz; ideal y^2 + x*z^3 + x^4").unwrap();
    let tree = resolve_local(&p.theta, &p.ideal, &ResolveOptions::default()).unwrap();
    print!("{}", render_tree_text(&tree_doc(&tree)));

    let report = verify_resolution(&tree);
    println!("\nverification: {}", if report.passed { "PASS" } else { "FAIL" });
    for (_, ok, msg) in &report.leaf_results {
        println!("  [{}] {msg}", if *ok { "ok" } else { "FAIL" });
    }
    let admissible = report.edge_results.iter().filter(|(_, ok, _)| *ok).count();
    println!("  {admissible}/{} edges admissible", report.edge_results.len());
}
