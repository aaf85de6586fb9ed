use std::time::Instant;
use tangency::algebra::Frame;
use tangency::foliation::{Derivation, Distribution, SNCDivisor};
use tangency::ideal::FGIdeal;
use tangency::parse::parse_poly;
use tangency::resolve::{resolve_local, verify_resolution, ResolveOptions};

fn main() {
    let f = Frame::from_names(&["v0", "v1", "v2"]);
    let g1 = parse_poly("-2*v1^3*v2 - v0^2*v2^2 + 2*v0^3", &f).unwrap();
    let g2 = parse_poly("2*v0^3*v1", &f).unwrap();
    let ideal = FGIdeal::new(&f, vec![g1, g2]);
    let theta = Distribution::new(&f, (0..3).map(|i| Derivation::coordinate(&f, i)).collect(), SNCDivisor::empty());
    let t0 = Instant::now();
    match resolve_local(&theta, &ideal, &ResolveOptions { max_branches: 60000, ..Default::default() }) {
        Ok(tree) => {
            let rep = verify_resolution(&tree);
            println!("tree {} nodes, verify {} in {:?}", tree.nodes.len(), rep.passed, t0.elapsed());
        }
        Err(e) => println!("error {e} in {:?}", t0.elapsed()),
    }
}
