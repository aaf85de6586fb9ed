//! Combinatorial principalization of a monomial ideal, printed as a
//! chart tree with the total transforms.
//!
//!     cargo run --example principalize

use tangency::algebra::{Frame, Monomial, Poly, Q};
use tangency::blowup::{monomial_ideal_principal, principalize_monomial, MonomialTree};
use tangency::ideal::FGIdeal;
use num::One;

fn print_tree(tree: &MonomialTree, id: usize, depth: usize) {
    let node = &tree.nodes[id];
    let pad = "  ".repeat(depth);
    let edge = match &node.blowup {
        None => "root".to_string(),
        Some(b) => format!(
            "({}) chart {}",
            b.center.display(&tree.nodes[node.parent.unwrap()].frame),
            b.child_frame.name(b.chart_var)
        ),
    };
    let principal = if monomial_ideal_principal(&node.ideal) { " principal" } else { "" };
    println!("{pad}{edge}: {}{principal}", node.ideal);
    for &c in &node.children {
        print_tree(tree, c, depth + 1);
    }
}

fn main() {
    let f = Frame::with_exceptional(&["x", "y"], &["x", "y"]);
    let mk = |ex: u32, ey: u32| Poly::monomial(&f, Monomial::new(vec![ex, ey]), Q::one());

    // the drop ideal of the running example: (y^2, x^4)
    let ideal = FGIdeal::new(&f, vec![mk(0, 2), mk(4, 0)]);
    let tree = principalize_monomial(&ideal, &[0, 1], 4096).unwrap();
    println!("principalizing {ideal}:");
    print_tree(&tree, 0, 1);
    println!("depth {}, {} charts, {} leaves", tree.depth(), tree.nodes.len(), tree.leaves().len());
}
