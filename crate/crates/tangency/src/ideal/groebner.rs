use num::One;

use crate::algebra::{Frame, Monomial, Poly, Q};

/// A basis element together with its expression in the original
/// generators: `poly = sum_j cofactors[j] * gens[j]`.
#[derive(Clone, Debug)]
pub struct Tracked {
    pub poly: Poly,
    pub cofactors: Vec<Poly>,
}

impl Tracked {
    fn generator(gens: &[Poly], j: usize) -> Tracked {
        let frame = gens[j].frame().clone();
        let mut cofactors = vec![Poly::zero(&frame); gens.len()];
        cofactors[j] = Poly::one(&frame);
        Tracked { poly: gens[j].clone(), cofactors }
    }

    fn sub_scaled(&self, t: &Poly, other: &Tracked) -> Tracked {
        Tracked {
            poly: self.poly.sub(&t.mul(&other.poly)),
            cofactors: self
                .cofactors
                .iter()
                .zip(&other.cofactors)
                .map(|(a, b)| a.sub(&t.mul(b)))
                .collect(),
        }
    }

    fn scale(&self, c: &Q) -> Tracked {
        Tracked {
            poly: self.poly.scale(c),
            cofactors: self.cofactors.iter().map(|p| p.scale(c)).collect(),
        }
    }

    pub fn certificate_holds(&self, gens: &[Poly]) -> bool {
        let frame = self.poly.frame().clone();
        let mut acc = Poly::zero(&frame);
        for (c, g) in self.cofactors.iter().zip(gens) {
            acc = acc.add(&c.mul(g));
        }
        acc == self.poly
    }
}

/// Fully reduces `f` by the tracked set under grevlex, keeping the
/// combination certificate intact.
fn reduce_tracked(f: &Tracked, set: &[Tracked]) -> Tracked {
    let frame = f.poly.frame().clone();
    let mut work = f.clone();
    let mut out_poly = Poly::zero(&frame);
    let mut out_cof = work.cofactors.iter().map(|_| Poly::zero(&frame)).collect::<Vec<_>>();
    'outer: while let Some((wm, wc)) = work.poly.leading_term_grevlex() {
        for g in set {
            if let Some((gm, gc)) = g.poly.leading_term_grevlex() {
                if gm.divides(&wm) {
                    let t = Poly::monomial(&frame, wm.div(&gm), wc.clone() / gc.clone());
                    work = work.sub_scaled(&t, g);
                    continue 'outer;
                }
            }
        }
        let t = Poly::monomial(&frame, wm, wc);
        out_poly = out_poly.add(&t);
        work.poly = work.poly.sub(&t);
    }
    for (o, w) in out_cof.iter_mut().zip(&work.cofactors) {
        *o = w.clone();
    }
    Tracked { poly: out_poly, cofactors: out_cof }
}

fn s_pair(a: &Tracked, b: &Tracked) -> Tracked {
    let frame = a.poly.frame().clone();
    let (am, ac) = a.poly.leading_term_grevlex().unwrap();
    let (bm, bc) = b.poly.leading_term_grevlex().unwrap();
    let l = am.lcm(&bm);
    let ta = Poly::monomial(&frame, l.div(&am), Q::one() / ac);
    let tb = Poly::monomial(&frame, l.div(&bm), Q::one() / bc);
    let scaled_a = Tracked {
        poly: ta.mul(&a.poly),
        cofactors: a.cofactors.iter().map(|c| ta.mul(c)).collect(),
    };
    scaled_a.sub_scaled(&tb, b)
}

/// Buchberger completion with the normal selection strategy (minimal lcm
/// degree, grevlex tie-break) and the coprimality criterion. Deterministic
/// for a fixed generator order. Returns the reduced basis, each element
/// monic and carrying its combination certificate.
pub fn groebner_basis(frame: &Frame, gens: &[Poly]) -> Vec<Tracked> {
    let gens: Vec<Poly> = gens.iter().filter(|g| !g.is_zero()).cloned().collect();
    if gens.is_empty() {
        return Vec::new();
    }
    let mut basis: Vec<Tracked> = Vec::new();
    for j in 0..gens.len() {
        let t = Tracked::generator(&gens, j);
        let r = reduce_tracked(&t, &basis);
        if !r.poly.is_zero() {
            basis.push(r);
        }
    }
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for i in 0..basis.len() {
        for j in (i + 1)..basis.len() {
            pairs.push((i, j));
        }
    }
    let lcm_of = |basis: &[Tracked], i: usize, j: usize| -> Monomial {
        let (mi, _) = basis[i].poly.leading_term_grevlex().unwrap();
        let (mj, _) = basis[j].poly.leading_term_grevlex().unwrap();
        mi.lcm(&mj)
    };
    while !pairs.is_empty() {
        // normal strategy: smallest lcm degree, then grevlex-smallest lcm,
        // then smallest index pair
        let mut best = 0;
        for k in 1..pairs.len() {
            let la = lcm_of(&basis, pairs[k].0, pairs[k].1);
            let lb = lcm_of(&basis, pairs[best].0, pairs[best].1);
            let ord = la
                .total_degree()
                .cmp(&lb.total_degree())
                .then_with(|| la.cmp_grevlex(&lb))
                .then_with(|| pairs[k].cmp(&pairs[best]));
            if ord == std::cmp::Ordering::Less {
                best = k;
            }
        }
        let (i, j) = pairs.swap_remove(best);
        let (mi, _) = basis[i].poly.leading_term_grevlex().unwrap();
        let (mj, _) = basis[j].poly.leading_term_grevlex().unwrap();
        if mi.coprime(&mj) {
            continue;
        }
        let s = s_pair(&basis[i], &basis[j]);
        let r = reduce_tracked(&s, &basis);
        if !r.poly.is_zero() {
            let new_idx = basis.len();
            basis.push(r);
            for k in 0..new_idx {
                pairs.push((k, new_idx));
            }
        }
    }
    inter_reduce(frame, basis)
}

/// Removes redundant elements and tail-reduces the rest, producing the
/// unique reduced basis (sorted by ascending leading monomial).
fn inter_reduce(frame: &Frame, mut basis: Vec<Tracked>) -> Vec<Tracked> {
    // drop elements whose leading monomial is divisible by another's
    let mut keep: Vec<bool> = vec![true; basis.len()];
    for i in 0..basis.len() {
        if !keep[i] {
            continue;
        }
        let (mi, _) = basis[i].poly.leading_term_grevlex().unwrap();
        for j in 0..basis.len() {
            if i == j || !keep[j] {
                continue;
            }
            let (mj, _) = basis[j].poly.leading_term_grevlex().unwrap();
            if mj.divides(&mi) && (mj != mi || j < i) {
                keep[i] = false;
                break;
            }
        }
    }
    let mut kept: Vec<Tracked> = basis
        .drain(..)
        .zip(keep)
        .filter_map(|(t, k)| if k { Some(t) } else { None })
        .collect();
    // tail-reduce each element by the others
    let mut reduced: Vec<Tracked> = Vec::with_capacity(kept.len());
    for i in 0..kept.len() {
        let others: Vec<Tracked> = kept
            .iter()
            .enumerate()
            .filter_map(|(j, t)| if j != i { Some(t.clone()) } else { None })
            .collect();
        let r = reduce_tracked(&kept[i], &others);
        let (_, lc) = r.poly.leading_term_grevlex().expect("reduced basis element is nonzero");
        reduced.push(r.scale(&(Q::one() / lc)));
    }
    let _ = frame;
    reduced.sort_by(|a, b| {
        let (ma, _) = a.poly.leading_term_grevlex().unwrap();
        let (mb, _) = b.poly.leading_term_grevlex().unwrap();
        ma.cmp_grevlex(&mb)
    });
    let _ = &mut kept;
    reduced
}
