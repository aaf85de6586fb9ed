use tangency::parse::parse_problem;
use tangency::report::{render_tree_text, tree_doc};
use tangency::resolve::{resolve_local, ResolveOptions};

fn main() {
    let p = parse_problem("vars v0 v1! v2!; theta d/dv0, v1*d/dv1 + v2*d/dv2; ideal v1^3*v2 + 2*v0*v2^3").unwrap();
    let tree = resolve_local(&p.theta, &p.ideal, &ResolveOptions { max_branches: 20000, ..Default::default() }).unwrap();
    print!("{}", render_tree_text(&tree_doc(&tree)));
    for n in &tree.nodes {
        if n.id == 11 {
            println!("node 11 theta:");
            for g in n.state.theta.generators() { println!("  {g}"); }
            println!("node 11 warnings: {:?}", n.warnings);
        }
    }
}
