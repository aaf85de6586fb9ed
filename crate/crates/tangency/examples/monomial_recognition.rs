//! Monomial-form recognition, first integrals, and eigen-block splitting
//! of an invariant ideal.
//!
//!     cargo run --example monomial_recognition

use tangency::algebra::{q, Frame, Poly};
use tangency::foliation::{
    check_monomial_form, eigen_blocks, first_integrals, invariant_generators, Derivation,
    Distribution, SNCDivisor,
};
use tangency::ideal::FGIdeal;
use tangency::parse::parse_derivation;

fn main() {
    let f = Frame::from_names(&["x", "y", "z"]);

    for text in ["x*d/dx - y*d/dy", "y*d/dx + x*d/dz", "d/dy"] {
        let d = parse_derivation(text, &f).unwrap();
        let theta = Distribution::new_unchecked(&f, vec![d], SNCDivisor::empty());
        let verdict = check_monomial_form(&theta);
        println!("({text}) -> {verdict}");
        if let Some(form) = verdict.form() {
            for beta in first_integrals(&f, form) {
                let parts: Vec<String> = beta
                    .iter()
                    .enumerate()
                    .filter(|(_, b)| !num::Zero::is_zero(*b))
                    .map(|(i, b)| format!("{}^({})", f.name(i), b))
                    .collect();
                println!("  first integral: {}", parts.join(" * "));
            }
        }
    }

    // eigen blocks of x d/dx on the running generator
    let d = parse_derivation("x*d/dx", &f).unwrap();
    let x = Poly::var(&f, 0);
    let y = Poly::var(&f, 1);
    let z = Poly::var(&f, 2);
    let g = y.pow(2).add(&x.mul(&z.pow(3))).add(&x.pow(4));
    println!("\nblocks of {g} under x*d/dx:");
    for b in eigen_blocks(&d, &g).unwrap() {
        println!("  zeta = {}: {}", b.eigenvalue, b.block);
    }

    // invariant generator extraction for a diagonal distribution
    let theta = Distribution::new(
        &f,
        vec![Derivation::diagonal(&f, &[q(1), q(-1), q(0)])],
        SNCDivisor::empty(),
    );
    let i = FGIdeal::new(
        &f,
        vec![x.pow(2).mul(&y.pow(2)).add(&x.pow(3).mul(&y.pow(3))).add(&x)],
    );
    let out = invariant_generators(&theta, &i).unwrap();
    println!("\ninvariant generators of {i}: {out}");
}
