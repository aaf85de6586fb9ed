use num::One;

use crate::algebra::{jet_inverse, Frame, Monomial, Poly, Q};
use crate::foliation::MonomialForm;
use crate::ideal::FGIdeal;
use crate::invariants::TgInvariant;

use super::ResolveError;

/// Generators arranged so the first is `v^nu * U + sum_{j<=nu-2} v^j a_j`
/// with `U` a unit, the rest `v^nu * tail + sum_{j<=nu-1} v^j a_j`, and
/// all coefficients free of `v`.
#[derive(Clone, Debug)]
pub struct WTForm {
    pub v: usize,
    pub nu: usize,
    /// Reordered generators, the distinguished one first.
    pub generators: Vec<Poly>,
    /// The `v`-adic tail of each generator from power `nu` upward; the
    /// first is the unit `U`.
    pub tails: Vec<Poly>,
    /// `coeffs[i][j]` is the coefficient of `v^j` in generator `i`, for
    /// `j < nu`; all free of `v`.
    pub coeffs: Vec<Vec<Poly>>,
    /// Whether the distinguished `v^(nu-1)` coefficient vanished exactly
    /// (as opposed to modulo the jet order).
    pub exact: bool,
}

/// What the caller must do before a WT form exists at this origin.
#[derive(Clone, Debug)]
pub enum WTOutcome {
    Ready(WTForm),
    /// Replace coordinates so `d/d(kept) + factor * d/d(absorbed)`
    /// becomes a coordinate field, then retry.
    NeedsShear { kept: usize, absorbed: usize, factor: Q },
    /// Shift the distinguished variable by the given `v`-free polynomial,
    /// then retry.
    NeedsShift { var: usize, by: Poly, exact: bool },
}

fn iterated_partial(g: &Poly, var: usize, k: usize) -> Poly {
    let mut out = g.clone();
    for _ in 0..k {
        out = out.partial(var);
    }
    out
}

/// The `v`-adic tail from power `nu` upward: `sum_{k>=nu} c_k v^(k-nu)`.
fn v_tail(g: &Poly, v: usize, nu: usize) -> Poly {
    let frame = g.frame().clone();
    let mut acc = Poly::zero(&frame);
    for k in nu as u32..=g.degree_in(v) {
        let part = g.coeff_of_power(v, k);
        let vp = Poly::monomial(&frame, Monomial::var(v, frame.dim()).pow(k - nu as u32), Q::one());
        acc = acc.add(&part.mul(&vp));
    }
    acc
}

fn build_wt(ideal: &FGIdeal, v: usize, nu: usize, g1: usize, exact: bool) -> WTForm {
    let mut generators: Vec<Poly> = Vec::with_capacity(ideal.generators().len());
    generators.push(ideal.generators()[g1].clone());
    for (i, g) in ideal.generators().iter().enumerate() {
        if i != g1 {
            generators.push(g.clone());
        }
    }
    let tails: Vec<Poly> = generators.iter().map(|g| v_tail(g, v, nu)).collect();
    let coeffs: Vec<Vec<Poly>> = generators
        .iter()
        .map(|g| (0..nu as u32).map(|j| g.coeff_of_power(v, j)).collect())
        .collect();
    WTForm { v, nu, generators, tails, coeffs, exact }
}

/// Looks for the distinguished pair: the first regular direction (by
/// variable order) maximizing how many generators have a unit `nu`-fold
/// derivative, preferring the hint when it still works.
fn find_distinguished(
    ideal: &FGIdeal,
    mf: &MonomialForm,
    nu: usize,
    hint: Option<usize>,
) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize, usize)> = None; // (count, v, g1)
    let mut order: Vec<usize> = mf.regular_part.clone();
    if let Some(h) = hint {
        if let Some(pos) = order.iter().position(|&w| w == h) {
            order.remove(pos);
            order.insert(0, h);
        }
    }
    for &w in &order {
        let mut count = 0usize;
        let mut first_g = None;
        for (i, g) in ideal.generators().iter().enumerate() {
            if iterated_partial(g, w, nu).is_unit_at_origin() {
                count += 1;
                if first_g.is_none() {
                    first_g = Some(i);
                }
            }
        }
        if count > 0 {
            let better = match best {
                None => true,
                Some((c, _, _)) => count > c,
            };
            if better {
                best = Some((count, w, first_g.unwrap()));
            }
        }
    }
    best.map(|(_, v, g1)| (v, g1))
}

/// Applies `d/da + t d/db` to `g` exactly `nu` times.
fn mixed_power(g: &Poly, a: usize, b: usize, t: &Q, nu: usize) -> Poly {
    let mut out = g.clone();
    for _ in 0..nu {
        out = out.partial(a).add(&out.partial(b).scale(t));
    }
    out
}

/// Computes the Weierstrass-Tschirnhaus analysis at the origin. The
/// caller owns applying shears and shifts as chart-tree edges and calling
/// again; this keeps every coordinate change on the record.
pub fn weierstrass_form(
    ideal: &FGIdeal,
    mf: &MonomialForm,
    tg: TgInvariant,
    jet_order: u32,
    hint: Option<usize>,
) -> Result<WTOutcome, ResolveError> {
    if !tg.is_type_one() || tg.nu == 0 {
        return Err(ResolveError::Internal(
            "weierstrass form requested outside type 1 with positive order".to_string(),
        ));
    }
    let nu = tg.nu;
    let Some((v, g1)) = find_distinguished(ideal, mf, nu, hint) else {
        // type 1 guarantees a distinguished direction after mixing the
        // regular directions; search small rational shears
        for (i, &a) in mf.regular_part.iter().enumerate() {
            for &b in mf.regular_part.iter().skip(i + 1) {
                for t in [1i64, -1, 2, -2, 3, -3] {
                    let t = crate::algebra::q(t);
                    for g in ideal.generators() {
                        if mixed_power(g, a, b, &t, nu).is_unit_at_origin() {
                            return Ok(WTOutcome::NeedsShear { kept: a, absorbed: b, factor: t });
                        }
                    }
                }
            }
        }
        return Err(ResolveError::Internal(
            "no distinguished direction found, contradicting type 1".to_string(),
        ));
    };
    let g = &ideal.generators()[g1];
    let c = g.coeff_of_power(v, nu as u32 - 1);
    let residual_ok = c.is_zero() || c.order().map(|o| o > jet_order).unwrap_or(true);
    if residual_ok {
        return Ok(WTOutcome::Ready(build_wt(ideal, v, nu, g1, c.is_zero())));
    }
    // exact shift: leading v-coefficient divides the offending one
    if g.degree_in(v) == nu as u32 {
        let u0 = g.coeff_of_power(v, nu as u32);
        if let Some(q) = c.div_exact(&u0) {
            let phi = q.scale(&(Q::one() / Q::from_integer((nu as i64).into())));
            return Ok(WTOutcome::NeedsShift { var: v, by: phi, exact: true });
        }
    }
    // jet shift by Newton iteration on the coefficient equation
    let phi = newton_shift(g, v, nu, jet_order)?;
    Ok(WTOutcome::NeedsShift { var: v, by: phi, exact: false })
}

/// Substitutes `v -> v - phi` (with `phi` free of `v`) into `g`.
pub fn apply_shift(g: &Poly, v: usize, phi: &Poly) -> Poly {
    let frame = g.frame().clone();
    let images: Vec<Poly> = (0..frame.dim())
        .map(|i| {
            if i == v {
                Poly::var(&frame, i).sub(phi)
            } else {
                Poly::var(&frame, i)
            }
        })
        .collect();
    g.substitute(&frame, &images)
}

fn newton_shift(g: &Poly, v: usize, nu: usize, jet_order: u32) -> Result<Poly, ResolveError> {
    let frame = g.frame().clone();
    let mut phi = Poly::zero(&frame);
    let g_v = g.partial(v);
    let max_iter = 2 * (32 - (jet_order + 1).leading_zeros()) as usize + 4;
    for _ in 0..max_iter {
        let shifted = apply_shift(g, v, &phi);
        let r = shifted.coeff_of_power(v, nu as u32 - 1).truncate(jet_order);
        if r.is_zero() {
            return Ok(phi);
        }
        let d = apply_shift(&g_v, v, &phi)
            .coeff_of_power(v, nu as u32 - 1)
            .neg();
        let d_inv = jet_inverse(&d, jet_order).map_err(|_| {
            ResolveError::Internal("singular Newton derivative in Tschirnhaus shift".to_string())
        })?;
        let delta = r.mul(d_inv.poly()).truncate(jet_order);
        phi = phi.sub(&delta).truncate(jet_order);
    }
    Err(ResolveError::Budget(format!(
        "jet budget {jet_order} insufficient for the Tschirnhaus shift"
    )))
}

/// Weierstrass data with every coefficient factored as exceptional
/// monomial times unit (or exactly zero).
#[derive(Clone, Debug)]
pub struct PreparedForm {
    pub wt: WTForm,
    /// `factors[i][j]` mirrors `wt.coeffs`: `None` for a zero
    /// coefficient, otherwise the monomial part and the unit cofactor.
    pub factors: Vec<Vec<Option<(Monomial, Poly)>>>,
}

impl PreparedForm {
    /// The prepared exponent list `(i, j, r)` over the given block
    /// variables, for the fiber analysis.
    pub fn r_list(&self, block: &[usize]) -> Vec<(usize, usize, Vec<u32>)> {
        let mut out = Vec::new();
        for (i, row) in self.factors.iter().enumerate() {
            for (j, f) in row.iter().enumerate() {
                if let Some((r, _)) = f {
                    out.push((i, j, block.iter().map(|&b| r.exp(b)).collect()));
                }
            }
        }
        out
    }
}

/// Tries to read the WT form as prepared: every nonzero coefficient an
/// exceptional monomial times a unit. Returns `None` when some
/// coefficient still needs the preparation recursion.
pub fn prepare_check(frame: &Frame, wt: &WTForm) -> Option<PreparedForm> {
    let exceptional = frame.exceptional_indices();
    let mut factors = Vec::with_capacity(wt.coeffs.len());
    for row in &wt.coeffs {
        let mut frow = Vec::with_capacity(row.len());
        for a in row {
            if a.is_zero() {
                frow.push(None);
                continue;
            }
            let r = a.common_monomial_factor(&exceptional);
            let b = a.div_monomial(&r).expect("content divides");
            if b.is_unit_at_origin() {
                frow.push(Some((r, b)));
            } else {
                return None;
            }
        }
        factors.push(frow);
    }
    Some(PreparedForm { wt: wt.clone(), factors })
}
