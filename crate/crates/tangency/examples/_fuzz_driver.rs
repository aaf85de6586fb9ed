use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tangency::algebra::{q, Frame, Monomial, Poly, Q};
use tangency::foliation::{check_monomial_form, Derivation, Distribution, SNCDivisor};
use tangency::ideal::FGIdeal;
use tangency::resolve::{resolve_local, verify_resolution, ResolveError, ResolveOptions};
use num::One;

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(2026);
    let mut ok = 0; let mut subclass = 0; let mut budget = 0;
    for trial in 0..400 {
        
        let dim = rng.gen_range(2..=3usize);
        let names: Vec<String> = (0..dim).map(|i| format!("v{i}")).collect();
        let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
        // random divisor subset
        let exc: Vec<&str> = refs.iter().enumerate().filter(|_| rng.gen_bool(0.3)).map(|(_, s)| *s).collect();
        let frame = Frame::with_exceptional(&refs, &exc);
        // random monomial distribution: regulars on non-exceptional vars, one optional diagonal
        let mut gens: Vec<Derivation> = Vec::new();
        for i in 0..dim {
            if !frame.is_exceptional(i) && rng.gen_bool(0.6) {
                gens.push(Derivation::coordinate(&frame, i));
            }
        }
        let reg: Vec<usize> = (0..dim).filter(|&i| gens.iter().any(|g| g == &Derivation::coordinate(&frame, i))).collect();
        if rng.gen_bool(0.5) {
            let alpha: Vec<Q> = (0..dim).map(|i| if reg.contains(&i) { q(0) } else { q(rng.gen_range(-2..=2)) }).collect();
            let d = Derivation::diagonal(&frame, &alpha);
            if !d.is_zero() { gens.push(d); }
        }
        if gens.is_empty() { continue; }
        let theta = Distribution::new(&frame, gens, SNCDivisor::from_frame(&frame));
        if !check_monomial_form(&theta).is_monomial() { continue; }
        // random ideal: 1-2 generators, degree <= 4
        let ngens = rng.gen_range(1..=2);
        let gens: Vec<Poly> = (0..ngens).map(|_| {
            let mut p = Poly::zero(&frame);
            for _ in 0..rng.gen_range(1..=3) {
                let mut exps = vec![0u32; dim];
                let mut left = 4u32;
                for e in exps.iter_mut() { *e = rng.gen_range(0..=left.min(3)); left -= *e; }
                p = p.add(&Poly::monomial(&frame, Monomial::new(exps), q(rng.gen_range(-2..=2))));
            }
            p
        }).filter(|p| !p.is_zero()).collect();
        let ideal = FGIdeal::new(&frame, gens);
        if ideal.is_zero() { continue; }
        let opts = ResolveOptions { max_branches: 20000, ..Default::default() };
        if trial == 68 {
            let gens: Vec<String> = theta.generators().iter().map(|g| g.to_string()).collect();
            println!("trial 68 instance: frame {frame} theta ({}) ideal {ideal}", gens.join("; "));
        }
        match resolve_local(&theta, &ideal, &opts) {
            Ok(tree) => {
                let rep = verify_resolution(&tree);
                if !rep.passed {
                    println!("trial {trial}: VERIFY FAILED {:?}\n  theta gens over {frame}: I = {ideal}", rep.first_failure);
                    std::process::exit(1);
                }
                ok += 1;
            }
            Err(ResolveError::Subclass(_)) => subclass += 1,
            Err(ResolveError::Budget(m)) => { budget += 1; println!("trial {trial}: budget: {m}  I = {ideal}"); }
            Err(e) => {
                println!("trial {trial}: HARD ERROR {e}\n  frame {frame}: I = {ideal}");
                std::process::exit(1);
            }
        }
    }
    println!("fuzz done: {ok} resolved+verified, {subclass} subclass aborts, {budget} budget");
}
