//! Fitting-ideal dichotomy: one admissible and one inadmissible center
//! for theta = (d/dx, d/dy) on 3-space.
//!
//!     cargo run --example admissible_centers

use tangency::algebra::Poly;
use tangency::ideal::FGIdeal;
use tangency::invariants::{check_theta_admissible, fitting_ideal};
use tangency::parse::parse_problem;

fn main() {
    let p = parse_problem("vars x y z; theta d/dx, d/dy; ideal x").unwrap();
    let f = &p.frame;
    let (x, y, z) = (Poly::var(f, 0), Poly::var(f, 1), Poly::var(f, 2));

    // the plane through x = z = 0
    let coord_center = FGIdeal::new(f, vec![x.clone(), z.clone()]);
    println!("center (x, z): {}", check_theta_admissible(&p.theta, &coord_center));
    for k in 1..=2 {
        let d = fitting_ideal(&p.theta, &coord_center, k);
        let gens: Vec<String> = d.generators.iter().map(|g| g.to_string()).collect();
        println!("  Gamma_{k} = ({}) -> {:?}", gens.join(", "), d.verdict);
    }

    // the parabola x^2 = z in the plane y = 0
    let parabola = FGIdeal::new(f, vec![x.pow(2).sub(&z), y.clone()]);
    println!("center (x^2 - z, y): {}", check_theta_admissible(&p.theta, &parabola));
    for k in 1..=2 {
        let d = fitting_ideal(&p.theta, &parabola, k);
        let gens: Vec<String> = d.generators.iter().map(|g| g.to_string()).collect();
        println!("  Gamma_{k} = ({}) -> {:?}", gens.join(", "), d.verdict);
    }
}
