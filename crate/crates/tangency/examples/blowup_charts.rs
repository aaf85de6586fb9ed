//! Chart-by-chart transforms: the opening example where blowing up the
//! curve V(y,z) ruins log-canonicity, and the admissible alternative.
//!
//!     cargo run --example blowup_charts

use tangency::blowup::{blowup_charts, transform_distribution, transform_ideal, Center, TransformKind};
use tangency::foliation::check_monomial_form;
use tangency::parse::parse_problem;

fn main() {
    let p = parse_problem("vars x y z; theta d/dx + x*d/dz; ideal y, z").unwrap();
    println!("theta = ({})", p.theta.generators()[0]);

    let center = Center::new(&p.frame, vec![1, 2]).unwrap();
    println!("\nblowing up V(y,z):");
    for chart in blowup_charts(&p.frame, &center) {
        let out = transform_distribution(&p.theta, &chart);
        let verdict = check_monomial_form(&out.distribution);
        let gens: Vec<String> =
            out.distribution.generators().iter().map(|g| g.to_string()).collect();
        println!(
            "  {}-chart: theta~ = ({})  [{verdict}]",
            chart.child_frame.name(chart.chart_var),
            gens.join(", ")
        );
    }

    println!("\nblowing up the origin first keeps the class:");
    let center = Center::new(&p.frame, vec![0, 1, 2]).unwrap();
    for chart in blowup_charts(&p.frame, &center) {
        let out = transform_distribution(&p.theta, &chart);
        let verdict = check_monomial_form(&out.distribution);
        let total = transform_ideal(&p.ideal, &chart, TransformKind::Total).unwrap();
        let gens: Vec<String> =
            out.distribution.generators().iter().map(|g| g.to_string()).collect();
        println!(
            "  {}-chart: theta~ = ({})  total I~ = {}  [{verdict}]",
            chart.child_frame.name(chart.chart_var),
            gens.join(", "),
            total
        );
    }
}
