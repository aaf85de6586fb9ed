use std::collections::BTreeMap;

use num::Zero;

use crate::algebra::{Monomial, Poly, Q};

/// All exponent vectors of total degree at most `n` in `dim` variables,
/// in a fixed deterministic order.
pub fn monomials_up_to(dim: usize, n: u32) -> Vec<Monomial> {
    let mut out = Vec::new();
    let mut current = vec![0u32; dim];
    fn rec(out: &mut Vec<Monomial>, current: &mut Vec<u32>, pos: usize, left: u32) {
        if pos == current.len() {
            out.push(Monomial::new(current.clone()));
            return;
        }
        for e in 0..=left {
            current[pos] = e;
            rec(out, current, pos + 1, left - e);
        }
        current[pos] = 0;
    }
    rec(&mut out, &mut current, 0, n);
    out
}

/// Precomputed column space of the ideal modulo total degree `n+1`: an
/// echelon basis of the span of all truncated multiples `mu * g_i`.
/// Queries are reductions against the echelon rows, so one space serves
/// many membership questions.
pub struct JetSpace {
    n: u32,
    dim: usize,
    row_index: BTreeMap<Monomial, usize>,
    echelon: Vec<(usize, Vec<Q>)>,
}

impl JetSpace {
    pub fn new(frame_dim: usize, gens: &[Poly], n: u32) -> Self {
        let monoms = monomials_up_to(frame_dim, n);
        let row_index: BTreeMap<Monomial, usize> =
            monoms.iter().cloned().enumerate().map(|(i, m)| (m, i)).collect();
        let rows = monoms.len();
        let mut space = JetSpace { n, dim: frame_dim, row_index, echelon: Vec::new() };
        for g in gens {
            if g.is_zero() {
                continue;
            }
            let g_ord = g.order().unwrap_or(0);
            for mu in &monoms {
                if mu.total_degree() + g_ord > n {
                    continue;
                }
                if space.echelon.len() == rows {
                    break;
                }
                let prod = g.mul_monomial(mu).truncate(n);
                let mut vec = vec![Q::zero(); rows];
                for (m, c) in prod.terms() {
                    vec[space.row_index[m]] = c.clone();
                }
                space.insert(vec);
            }
        }
        space
    }

    // rows are kept mutually reduced (full reduced echelon form), so a
    // single pass eliminates every pivot
    fn reduce(&self, vec: &mut [Q]) {
        for (pivot, row) in &self.echelon {
            if vec[*pivot].is_zero() {
                continue;
            }
            let factor = vec[*pivot].clone();
            for (i, r) in row.iter().enumerate() {
                if !r.is_zero() {
                    let sub = r.clone() * factor.clone();
                    vec[i] -= sub;
                }
            }
        }
    }

    fn insert(&mut self, mut vec: Vec<Q>) {
        self.reduce(&mut vec);
        let Some(pivot) = vec.iter().position(|c| !c.is_zero()) else {
            return;
        };
        let inv = Q::from_integer(1.into()) / vec[pivot].clone();
        for c in vec.iter_mut() {
            if !c.is_zero() {
                *c *= inv.clone();
            }
        }
        // back-eliminate the fresh pivot from every stored row
        for (_, row) in self.echelon.iter_mut() {
            if row[pivot].is_zero() {
                continue;
            }
            let factor = row[pivot].clone();
            for (i, v) in vec.iter().enumerate() {
                if !v.is_zero() {
                    let sub = v.clone() * factor.clone();
                    row[i] -= sub;
                }
            }
        }
        self.echelon.push((pivot, vec));
        self.echelon.sort_by_key(|(p, _)| *p);
    }

    /// Membership of `f` in the ideal plus `m^(n+1)`.
    pub fn contains(&self, f: &Poly) -> bool {
        let f = f.truncate(self.n);
        if f.is_zero() {
            return true;
        }
        assert_eq!(f.frame().dim(), self.dim);
        let rows = self.row_index.len();
        let mut vec = vec![Q::zero(); rows];
        for (m, c) in f.terms() {
            vec[self.row_index[m]] = c.clone();
        }
        self.reduce(&mut vec);
        vec.iter().all(|c| c.is_zero())
    }
}

/// Decides membership modulo total degree `n+1` by exact linear algebra:
/// polynomial cofactors are sought for the truncated combination. This is
/// the independent oracle the Groebner and Mora backends are checked
/// against.
pub fn jet_member(f: &Poly, gens: &[Poly], n: u32) -> bool {
    JetSpace::new(f.frame().dim(), gens, n).contains(f)
}
