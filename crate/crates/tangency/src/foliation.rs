//! Derivations, singular distributions tangent to an SNC divisor,
//! monomial-form recognition at chart origins, first integrals, and
//! eigen-block decomposition of invariant ideals.

use std::collections::BTreeSet;
use std::fmt;

use num::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::algebra::{AlgebraError, Frame, LocalElement, Monomial, Poly, Q};
use crate::ideal::FGIdeal;
use crate::linalg;

/// A union of coordinate hyperplanes `{variable = 0}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SNCDivisor {
    components: BTreeSet<usize>,
}

impl SNCDivisor {
    pub fn empty() -> Self {
        SNCDivisor { components: BTreeSet::new() }
    }

    pub fn new(frame: &Frame, components: impl IntoIterator<Item = usize>) -> Self {
        let components: BTreeSet<usize> = components.into_iter().collect();
        for &c in &components {
            assert!(c < frame.dim(), "divisor component out of frame");
        }
        SNCDivisor { components }
    }

    /// The divisor cut out by the frame's exceptional flags.
    pub fn from_frame(frame: &Frame) -> Self {
        SNCDivisor { components: frame.exceptional_indices().into_iter().collect() }
    }

    pub fn components(&self) -> impl Iterator<Item = usize> + '_ {
        self.components.iter().copied()
    }

    pub fn contains(&self, idx: usize) -> bool {
        self.components.contains(&idx)
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn insert(&self, idx: usize) -> SNCDivisor {
        let mut components = self.components.clone();
        components.insert(idx);
        SNCDivisor { components }
    }
}

/// A vector field with one coefficient per frame variable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Derivation {
    frame: Frame,
    coeffs: Vec<LocalElement>,
}

impl Derivation {
    pub fn new(frame: &Frame, coeffs: Vec<LocalElement>) -> Self {
        assert_eq!(coeffs.len(), frame.dim());
        Derivation { frame: frame.clone(), coeffs }
    }

    pub fn zero(frame: &Frame) -> Self {
        Derivation::new(frame, vec![LocalElement::zero(frame); frame.dim()])
    }

    /// The coordinate field `d/d(var)`.
    pub fn coordinate(frame: &Frame, idx: usize) -> Self {
        let mut coeffs = vec![LocalElement::zero(frame); frame.dim()];
        coeffs[idx] = LocalElement::one(frame);
        Derivation::new(frame, coeffs)
    }

    /// The diagonal field `sum alpha_i x_i d/dx_i`.
    pub fn diagonal(frame: &Frame, alpha: &[Q]) -> Self {
        assert_eq!(alpha.len(), frame.dim());
        let coeffs = alpha
            .iter()
            .enumerate()
            .map(|(i, a)| LocalElement::from_poly(Poly::var(frame, i).scale(a)))
            .collect();
        Derivation::new(frame, coeffs)
    }

    pub fn from_polys(frame: &Frame, coeffs: Vec<Poly>) -> Self {
        Derivation::new(frame, coeffs.into_iter().map(LocalElement::from_poly).collect())
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn coeffs(&self) -> &[LocalElement] {
        &self.coeffs
    }

    pub fn coeff(&self, idx: usize) -> &LocalElement {
        &self.coeffs[idx]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// All coefficients are honest polynomials.
    pub fn is_polynomial(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_polynomial())
    }

    pub fn add(&self, other: &Derivation) -> Derivation {
        Derivation::new(
            &self.frame,
            self.coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a.add(b))
                .collect(),
        )
    }

    pub fn sub(&self, other: &Derivation) -> Derivation {
        Derivation::new(
            &self.frame,
            self.coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a.sub(b))
                .collect(),
        )
    }

    pub fn scale(&self, c: &Q) -> Derivation {
        Derivation::new(&self.frame, self.coeffs.iter().map(|k| k.scale(c)).collect())
    }

    pub fn mul_local(&self, e: &LocalElement) -> Derivation {
        Derivation::new(&self.frame, self.coeffs.iter().map(|k| k.mul(e)).collect())
    }

    pub fn mul_poly(&self, p: &Poly) -> Derivation {
        Derivation::new(&self.frame, self.coeffs.iter().map(|k| k.mul_poly(p)).collect())
    }

    /// Applies the derivation to a local element.
    pub fn apply(&self, f: &LocalElement) -> Result<LocalElement, AlgebraError> {
        if f.frame() != &self.frame {
            return Err(AlgebraError::FrameMismatch {
                left: self.frame.to_string(),
                right: f.frame().to_string(),
            });
        }
        let mut acc = LocalElement::zero(&self.frame);
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            acc = acc.add(&c.mul(&f.partial(i)));
        }
        Ok(acc)
    }

    /// Applies to a polynomial, returning the numerator of the result
    /// (a generator of the same local ideal; exact when all coefficients
    /// are polynomials).
    pub fn apply_poly(&self, f: &Poly) -> Poly {
        let e = self
            .apply(&LocalElement::from_poly(f.clone()))
            .expect("frames match");
        e.num().clone()
    }

    /// The commutator `[self, other]`.
    pub fn lie_bracket(&self, other: &Derivation) -> Result<Derivation, AlgebraError> {
        if other.frame != self.frame {
            return Err(AlgebraError::FrameMismatch {
                left: self.frame.to_string(),
                right: other.frame.to_string(),
            });
        }
        let mut coeffs = Vec::with_capacity(self.frame.dim());
        for k in 0..self.frame.dim() {
            let a = self.apply(&other.coeffs[k])?;
            let b = other.apply(&self.coeffs[k])?;
            coeffs.push(a.sub(&b));
        }
        Ok(Derivation::new(&self.frame, coeffs))
    }

    /// Tangency to the divisor: the coefficient of every component
    /// direction must be divisible by its variable.
    pub fn is_tangent_to(&self, divisor: &SNCDivisor) -> bool {
        divisor.components().all(|u| {
            let c = &self.coeffs[u];
            c.is_zero() || c.num().min_exp_in(u) >= 1
        })
    }

    /// The linear part at the origin as a matrix `L[i][j] = d(coeff_i)/dx_j (0)`.
    pub fn linear_part(&self) -> Vec<Vec<Q>> {
        let n = self.frame.dim();
        let mut l = vec![vec![Q::zero(); n]; n];
        for i in 0..n {
            // linear terms of the numerator, adjusted by the unit denominator
            let c = &self.coeffs[i];
            let den0 = c.den().eval_origin();
            for j in 0..n {
                let num_lin = c.num().partial(j).eval_origin();
                let den_lin = c.den().partial(j).eval_origin();
                let num0 = c.num().eval_origin();
                // d/dxj (num/den) at 0 by the quotient rule
                l[i][j] = (num_lin * den0.clone() - num0 * den_lin) / (den0.clone() * den0.clone());
            }
        }
        l
    }

    /// Nilpotency of the linear part, tested by exact matrix powers.
    pub fn linear_part_nilpotent(&self) -> bool {
        let n = self.frame.dim();
        let mut m = self.linear_part();
        for _ in 0..n.ilog2() + 1 {
            m = mat_mul(&m, &m);
        }
        m.iter().all(|row| row.iter().all(|c| c.is_zero()))
    }

    /// Substitutes in every coefficient; positional, used when renaming
    /// frames without a coordinate change.
    pub fn reframe(&self, frame: &Frame) -> Derivation {
        Derivation::new(
            frame,
            self.coeffs
                .iter()
                .map(|c| {
                    LocalElement::new(c.num().reframe(frame), c.den().reframe(frame))
                        .expect("unit denominator is frame independent")
                })
                .collect(),
        )
    }
}

fn mat_mul(a: &[Vec<Q>], b: &[Vec<Q>]) -> Vec<Vec<Q>> {
    let n = a.len();
    let mut out = vec![vec![Q::zero(); n]; n];
    for i in 0..n {
        for k in 0..n {
            if a[i][k].is_zero() {
                continue;
            }
            for j in 0..n {
                let add = a[i][k].clone() * b[k][j].clone();
                out[i][j] += add;
            }
        }
    }
    out
}

impl fmt::Display for Derivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut wrote = false;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if wrote {
                write!(f, " + ")?;
            }
            wrote = true;
            if c == &LocalElement::one(&self.frame) {
                write!(f, "d/d{}", self.frame.name(i))?;
            } else if c.is_polynomial() && c.num().num_terms() == 1 {
                write!(f, "{}*d/d{}", c, self.frame.name(i))?;
            } else {
                write!(f, "({})*d/d{}", c, self.frame.name(i))?;
            }
        }
        if !wrote {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// A finitely generated singular distribution with its divisor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Distribution {
    frame: Frame,
    generators: Vec<Derivation>,
    divisor: SNCDivisor,
    leaf_dimension: usize,
}

impl Distribution {
    pub fn new(frame: &Frame, generators: Vec<Derivation>, divisor: SNCDivisor) -> Self {
        let generators: Vec<Derivation> =
            generators.into_iter().filter(|g| !g.is_zero()).collect();
        for g in &generators {
            assert_eq!(g.frame(), frame, "generator frame mismatch");
            assert!(
                g.is_tangent_to(&divisor),
                "distribution generator not tangent to the divisor: {g}"
            );
        }
        let leaf_dimension = generic_rank(frame, &generators);
        Distribution { frame: frame.clone(), generators, divisor, leaf_dimension }
    }

    /// Like `new` but without the tangency assertion; used by transform
    /// code that enforces tangency itself and flags failures.
    pub fn new_unchecked(frame: &Frame, generators: Vec<Derivation>, divisor: SNCDivisor) -> Self {
        let generators: Vec<Derivation> =
            generators.into_iter().filter(|g| !g.is_zero()).collect();
        let leaf_dimension = generic_rank(frame, &generators);
        Distribution { frame: frame.clone(), generators, divisor, leaf_dimension }
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn generators(&self) -> &[Derivation] {
        &self.generators
    }

    pub fn divisor(&self) -> &SNCDivisor {
        &self.divisor
    }

    pub fn leaf_dimension(&self) -> usize {
        self.leaf_dimension
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    /// `θ[I]`: the ideal generated by every generator applied to every
    /// generator.
    pub fn apply_ideal(&self, ideal: &FGIdeal) -> FGIdeal {
        assert_eq!(ideal.frame(), &self.frame);
        let mut gens = Vec::new();
        for d in &self.generators {
            for g in ideal.generators() {
                let dg = d.apply_poly(g);
                if !dg.is_zero() {
                    gens.push(dg);
                }
            }
        }
        FGIdeal::new(&self.frame, gens)
    }

    /// Is `I` invariant, i.e. `θ[I] ⊆ I`, under the backend semantics.
    pub fn leaves_invariant(&self, ideal: &FGIdeal, backend: crate::ideal::Backend) -> bool {
        self.apply_ideal(ideal).contained_in(ideal, backend)
    }
}

/// Generic rank of the coefficient matrix over the fraction field,
/// computed by fraction-free elimination on polynomial entries.
fn generic_rank(frame: &Frame, gens: &[Derivation]) -> usize {
    let mut mat: Vec<Vec<Poly>> = gens
        .iter()
        .map(|g| g.coeffs().iter().map(|c| c.num().clone()).collect())
        .collect();
    let rows = mat.len();
    let cols = frame.dim();
    let mut rank = 0usize;
    let mut row = 0usize;
    for col in 0..cols {
        let Some(sel) = (row..rows).find(|&r| !mat[r][col].is_zero()) else {
            continue;
        };
        mat.swap(row, sel);
        for r in (row + 1)..rows {
            if mat[r][col].is_zero() {
                continue;
            }
            let a = mat[row][col].clone();
            let b = mat[r][col].clone();
            for c in 0..cols {
                mat[r][c] = mat[r][c].mul(&a).sub(&mat[row][c].mul(&b));
            }
        }
        rank += 1;
        row += 1;
        if row == rows {
            break;
        }
    }
    rank
}

/// The recognized normal form of Def-style monomial distributions:
/// coordinate fields on the regular part plus diagonal fields with a
/// rational coefficient matrix on the complementary block.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonomialForm {
    /// Indices of variables `w` with `d/dw` among the generators.
    pub regular_part: Vec<usize>,
    /// Indices of the diagonal block (all non-regular variables).
    pub u_block: Vec<usize>,
    /// One row per singular generator, columns indexed by `u_block`.
    pub alpha: Vec<Vec<Q>>,
    /// The normalized basis witnessing the form.
    pub basis: Vec<Derivation>,
}

/// Outcome of the monomial-form check at a chart origin.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MonomialVerdict {
    Monomial(MonomialForm),
    /// A necessary condition for log-canonicity fails (nilpotent linear
    /// part); the distribution cannot be monomial in any coordinates.
    NotLogCanonical,
    /// Not recognized; the caller must not guess.
    Unknown,
}

impl MonomialVerdict {
    pub fn is_monomial(&self) -> bool {
        matches!(self, MonomialVerdict::Monomial(_))
    }

    pub fn form(&self) -> Option<&MonomialForm> {
        match self {
            MonomialVerdict::Monomial(f) => Some(f),
            _ => None,
        }
    }
}

impl fmt::Display for MonomialVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MonomialVerdict::Monomial(_) => write!(f, "Monomial"),
            MonomialVerdict::NotLogCanonical => write!(f, "NotLogCanonical"),
            MonomialVerdict::Unknown => write!(f, "Unknown"),
        }
    }
}

/// Checks whether a derivation is exactly `d/dw` for some `w`.
fn as_pure_coordinate(d: &Derivation) -> Option<usize> {
    let mut found = None;
    for (i, c) in d.coeffs().iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        if found.is_some() {
            return None;
        }
        if c != &LocalElement::one(d.frame()) {
            return None;
        }
        found = Some(i);
    }
    found
}

/// Checks whether a derivation is exactly diagonal-linear and returns its
/// alpha vector over the full frame.
fn as_diagonal(d: &Derivation) -> Option<Vec<Q>> {
    let n = d.frame().dim();
    let mut alpha = vec![Q::zero(); n];
    for (i, c) in d.coeffs().iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let p = c.as_poly()?;
        let (m, coeff) = p.as_monomial()?;
        if *m != Monomial::var(i, n) {
            return None;
        }
        alpha[i] = coeff.clone();
    }
    Some(alpha)
}

/// Decides monomiality at the chart origin after a normalization pass:
/// rational row elimination on the constant parts, straightening cleanup
/// against exact coordinate generators, then syntactic recognition of
/// diagonal singular generators. Maximality is checked as linear
/// independence of the alpha rows within the recognized coordinates, a
/// documented approximation of the abstract condition.
pub fn check_monomial_form(theta: &Distribution) -> MonomialVerdict {
    let frame = theta.frame().clone();
    let n = frame.dim();
    let mut gens: Vec<Derivation> =
        theta.generators().iter().filter(|g| !g.is_zero()).cloned().collect();
    if gens.is_empty() {
        return MonomialVerdict::Monomial(MonomialForm {
            regular_part: Vec::new(),
            u_block: (0..n).collect(),
            alpha: Vec::new(),
            basis: Vec::new(),
        });
    }
    for g in &gens {
        if !g.is_tangent_to(theta.divisor()) {
            return MonomialVerdict::Unknown;
        }
    }
    // rational elimination on the constant coefficients
    let mut row = 0usize;
    for col in 0..n {
        let Some(sel) = (row..gens.len()).find(|&r| !gens[r].coeff(col).eval_origin().is_zero())
        else {
            continue;
        };
        gens.swap(row, sel);
        let pivot_c = gens[row].coeff(col).eval_origin();
        gens[row] = gens[row].scale(&(Q::one() / pivot_c));
        for r in 0..gens.len() {
            if r != row {
                let c = gens[r].coeff(col).eval_origin();
                if !c.is_zero() {
                    gens[r] = gens[r].sub(&gens[row].scale(&c));
                }
            }
        }
        row += 1;
        if row == gens.len() {
            break;
        }
    }
    gens.retain(|g| !g.is_zero());
    // split into regular candidates (unit coefficient somewhere) and
    // singular candidates (all coefficients vanish at the origin)
    let mut exact_regular: Vec<(usize, Derivation)> = Vec::new();
    let mut pending: Vec<Derivation> = Vec::new();
    for g in &gens {
        if g.coeffs().iter().any(|c| !c.eval_origin().is_zero()) {
            pending.push(g.clone());
        }
    }
    let singular: Vec<Derivation> = gens
        .iter()
        .filter(|g| g.coeffs().iter().all(|c| c.eval_origin().is_zero()))
        .cloned()
        .collect();
    // iterate: collect generators already of the pure form, then use them
    // to strip matching components off the rest (triangular cleanup)
    let mut changed = true;
    while changed {
        changed = false;
        let mut rest = Vec::new();
        for g in pending.drain(..) {
            if let Some(w) = as_pure_coordinate(&g) {
                exact_regular.push((w, g));
                changed = true;
            } else {
                rest.push(g);
            }
        }
        for g in rest {
            let mut h = g;
            for (w, pw) in &exact_regular {
                let cw = h.coeff(*w).clone();
                if !cw.is_zero() {
                    h = h.sub(&pw.mul_local(&cw));
                }
            }
            pending.push(h);
        }
        pending.retain(|g| !g.is_zero());
    }
    if !pending.is_empty() {
        // something with a unit coefficient resisted straightening
        return MonomialVerdict::Unknown;
    }
    // clean singular generators against the exact regular ones as well
    let mut diag_rows: Vec<Vec<Q>> = Vec::new();
    let mut diag_gens: Vec<Derivation> = Vec::new();
    let single_generator = theta.generators().len() == 1;
    for g in &singular {
        let mut h = g.clone();
        for (w, pw) in &exact_regular {
            let cw = h.coeff(*w).clone();
            if !cw.is_zero() {
                h = h.sub(&pw.mul_local(&cw));
            }
        }
        if h.is_zero() {
            continue;
        }
        match as_diagonal(&h) {
            Some(alpha) => {
                diag_rows.push(alpha);
                diag_gens.push(h);
            }
            None => {
                if single_generator && h.linear_part_nilpotent() {
                    return MonomialVerdict::NotLogCanonical;
                }
                return MonomialVerdict::Unknown;
            }
        }
    }
    let regular_part: Vec<usize> = {
        let mut v: Vec<usize> = exact_regular.iter().map(|(w, _)| *w).collect();
        v.sort_unstable();
        v.dedup();
        if v.len() != exact_regular.len() {
            return MonomialVerdict::Unknown;
        }
        v
    };
    // a coordinate field in an exceptional direction breaks tangency and
    // cannot occur here, but keep the guard explicit
    if regular_part.iter().any(|&w| theta.divisor().contains(w)) {
        return MonomialVerdict::Unknown;
    }
    let u_block: Vec<usize> = (0..n).filter(|i| !regular_part.contains(i)).collect();
    // diagonal rows may not touch regular directions
    for alpha in &diag_rows {
        for &w in &regular_part {
            if !alpha[w].is_zero() {
                return MonomialVerdict::Unknown;
            }
        }
    }
    let alpha: Vec<Vec<Q>> = diag_rows
        .iter()
        .map(|row| u_block.iter().map(|&j| row[j].clone()).collect())
        .collect();
    // maximality within the recognized frame: independent alpha rows
    if !alpha.is_empty() && linalg::rank(&alpha) != alpha.len() {
        return MonomialVerdict::Unknown;
    }
    let mut basis: Vec<Derivation> = exact_regular.into_iter().map(|(_, g)| g).collect();
    basis.extend(diag_gens);
    // certificate: a recognized basis commutes pairwise
    for i in 0..basis.len() {
        for j in (i + 1)..basis.len() {
            let br = basis[i].lie_bracket(&basis[j]).expect("shared frame");
            if !br.is_zero() {
                return MonomialVerdict::Unknown;
            }
        }
    }
    MonomialVerdict::Monomial(MonomialForm { regular_part, u_block, alpha, basis })
}

/// Monomial first integrals: a basis of exponent vectors `beta` with
/// `alpha · beta = 0`, padded with zeros on the regular part. Exponents
/// are rational.
pub fn first_integrals(frame: &Frame, mf: &MonomialForm) -> Vec<Vec<Q>> {
    let k = mf.u_block.len();
    let kernel = if mf.alpha.is_empty() {
        // no singular generators: every u-coordinate is an integral
        (0..k)
            .map(|i| {
                let mut v = vec![Q::zero(); k];
                v[i] = Q::one();
                v
            })
            .collect()
    } else {
        linalg::nullspace(&mf.alpha)
    };
    kernel
        .into_iter()
        .map(|v| {
            let mut full = vec![Q::zero(); frame.dim()];
            for (pos, &j) in mf.u_block.iter().enumerate() {
                full[j] = v[pos].clone();
            }
            full
        })
        .collect()
}

/// One eigenvalue block of a Taylor expansion: `apply(d, block)` equals
/// `eigenvalue * block` exactly, and the blocks scaled by their cofactor
/// monomials sum back to the decomposed polynomial.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EigenBlock {
    pub eigenvalue: Q,
    pub block: Poly,
    /// `w^j` for the regular grouping, the unit monomial for diagonal
    /// fields.
    pub cofactor: Monomial,
}

/// Shape of derivations supported by `eigen_blocks`.
enum BlockKind {
    Diagonal(Vec<Q>),
    Regular(usize),
}

fn classify_for_blocks(d: &Derivation) -> Option<BlockKind> {
    if let Some(w) = as_pure_coordinate(d) {
        return Some(BlockKind::Regular(w));
    }
    as_diagonal(d).map(BlockKind::Diagonal)
}

/// Splits `f` into eigen blocks of a diagonal field, or into coefficients
/// of powers of `w` for a regular field (all with eigenvalue zero, per
/// the invariant-generator lemma).
pub fn eigen_blocks(d: &Derivation, f: &Poly) -> Result<Vec<EigenBlock>, AlgebraError> {
    let frame = f.frame().clone();
    let kind = classify_for_blocks(d).ok_or_else(|| AlgebraError::FrameMismatch {
        left: "diagonal or coordinate derivation".into(),
        right: d.to_string(),
    })?;
    match kind {
        BlockKind::Diagonal(alpha) => {
            let mut groups: Vec<(Q, Poly)> = Vec::new();
            for (m, c) in f.terms() {
                let mut zeta = Q::zero();
                for (i, a) in alpha.iter().enumerate() {
                    if !a.is_zero() {
                        zeta += a.clone() * Q::from_integer((m.exp(i) as i64).into());
                    }
                }
                match groups.iter_mut().find(|(z, _)| *z == zeta) {
                    Some((_, p)) => *p = p.add(&Poly::monomial(&frame, m.clone(), c.clone())),
                    None => groups.push((zeta, Poly::monomial(&frame, m.clone(), c.clone()))),
                }
            }
            groups.sort_by(|a, b| a.0.cmp(&b.0));
            Ok(groups
                .into_iter()
                .map(|(eigenvalue, block)| EigenBlock {
                    eigenvalue,
                    block,
                    cofactor: Monomial::one(frame.dim()),
                })
                .collect())
        }
        BlockKind::Regular(w) => {
            let mut out = Vec::new();
            for j in 0..=f.degree_in(w) {
                let block = f.coeff_of_power(w, j);
                if block.is_zero() {
                    continue;
                }
                let mut exps = vec![0u32; frame.dim()];
                exps[w] = j;
                out.push(EigenBlock {
                    eigenvalue: Q::zero(),
                    block,
                    cofactor: Monomial::new(exps),
                });
            }
            Ok(out)
        }
    }
}

/// Generators of `I` that are scaled-invariant under every element of a
/// monomial basis, obtained by iterated block decomposition. Generates
/// the same local ideal whenever `θ[I] ⊆ I`.
pub fn invariant_generators(theta: &Distribution, ideal: &FGIdeal) -> Result<FGIdeal, AlgebraError> {
    let mut gens: Vec<Poly> = ideal.generators().to_vec();
    for d in theta.generators() {
        let mut next = Vec::new();
        for g in &gens {
            for b in eigen_blocks(d, g)? {
                next.push(b.block);
            }
        }
        gens = next;
    }
    Ok(FGIdeal::new(ideal.frame(), gens))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::q;
    use crate::ideal::Backend;

    fn xyz() -> Frame {
        Frame::from_names(&["x", "y", "z"])
    }

    #[test]
    fn apply_example_field_to_coordinate() {
        // (d/dx + x d/dz) applied to z gives x
        let f = xyz();
        let mut d = Derivation::coordinate(&f, 0);
        d = d.add(&Derivation::new(
            &f,
            vec![
                LocalElement::zero(&f),
                LocalElement::zero(&f),
                LocalElement::from_poly(Poly::var(&f, 0)),
            ],
        ));
        let z = LocalElement::from_poly(Poly::var(&f, 2));
        assert_eq!(d.apply(&z).unwrap(), LocalElement::from_poly(Poly::var(&f, 0)));
        let c = LocalElement::from_poly(Poly::constant(&f, q(7)));
        assert!(d.apply(&c).unwrap().is_zero());
    }

    #[test]
    fn apply_ideal_matches_tangency_sequence_generators() {
        let f = xyz();
        let theta = Distribution::new(
            &f,
            vec![Derivation::coordinate(&f, 1), Derivation::coordinate(&f, 2)],
            SNCDivisor::empty(),
        );
        let x = Poly::var(&f, 0);
        let y = Poly::var(&f, 1);
        let z = Poly::var(&f, 2);
        let g = y.pow(2).add(&x.mul(&z.pow(3))).add(&x.pow(4));
        let i = FGIdeal::new(&f, vec![g]);
        let di = theta.apply_ideal(&i);
        let expect = FGIdeal::new(&f, vec![y.scale(&q(2)), x.mul(&z.pow(2)).scale(&q(3))]);
        assert!(di.equals(&expect, Backend::Global));
    }

    #[test]
    fn lie_bracket_table() {
        let f = xyz();
        let dx = Derivation::coordinate(&f, 0);
        let x_dz = Derivation::new(
            &f,
            vec![
                LocalElement::zero(&f),
                LocalElement::zero(&f),
                LocalElement::from_poly(Poly::var(&f, 0)),
            ],
        );
        // [d/dx, x d/dz] = d/dz
        assert_eq!(dx.lie_bracket(&x_dz).unwrap(), Derivation::coordinate(&f, 2));
        // [x d/dx, y d/dy] = 0
        let xdx = Derivation::diagonal(&f, &[q(1), q(0), q(0)]);
        let ydy = Derivation::diagonal(&f, &[q(0), q(1), q(0)]);
        assert!(xdx.lie_bracket(&ydy).unwrap().is_zero());
        // [y d/dx, x d/dz] = y d/dz
        let y_dx = Derivation::new(
            &f,
            vec![
                LocalElement::from_poly(Poly::var(&f, 1)),
                LocalElement::zero(&f),
                LocalElement::zero(&f),
            ],
        );
        let expect = Derivation::new(
            &f,
            vec![
                LocalElement::zero(&f),
                LocalElement::zero(&f),
                LocalElement::from_poly(Poly::var(&f, 1)),
            ],
        );
        assert_eq!(y_dx.lie_bracket(&x_dz).unwrap(), expect);
    }

    #[test]
    fn tangency_checks() {
        let f = xyz();
        let div = SNCDivisor::new(&f, [0]);
        let u_du = Derivation::diagonal(&f, &[q(1), q(0), q(0)]);
        assert!(u_du.is_tangent_to(&div));
        assert!(!Derivation::coordinate(&f, 0).is_tangent_to(&div));
        // x d/dx - y d/dy + (x - z) d/dz is tangent to {x = 0}
        let mixed = Derivation::new(
            &f,
            vec![
                LocalElement::from_poly(Poly::var(&f, 0)),
                LocalElement::from_poly(Poly::var(&f, 1).neg()),
                LocalElement::from_poly(Poly::var(&f, 0).sub(&Poly::var(&f, 2))),
            ],
        );
        assert!(mixed.is_tangent_to(&div));
    }

    #[test]
    fn monomial_recognition_positive() {
        let f = xyz();
        let theta = Distribution::new(
            &f,
            vec![Derivation::coordinate(&f, 1), Derivation::coordinate(&f, 2)],
            SNCDivisor::new(&f, [0]),
        );
        let v = check_monomial_form(&theta);
        let form = v.form().expect("monomial");
        assert_eq!(form.regular_part, vec![1, 2]);
        assert_eq!(form.u_block, vec![0]);
        assert!(form.alpha.is_empty());
    }

    #[test]
    fn monomial_recognition_diagonal() {
        let f = Frame::from_names(&["x", "y"]);
        let theta = Distribution::new(
            &f,
            vec![Derivation::diagonal(&f, &[q(1), q(-1)])],
            SNCDivisor::empty(),
        );
        let v = check_monomial_form(&theta);
        let form = v.form().expect("monomial");
        assert_eq!(form.alpha, vec![vec![q(1), q(-1)]]);
    }

    #[test]
    fn nilpotent_linear_part_detected() {
        // y d/dx + x d/dz from the opening example
        let f = xyz();
        let d = Derivation::new(
            &f,
            vec![
                LocalElement::from_poly(Poly::var(&f, 1)),
                LocalElement::zero(&f),
                LocalElement::from_poly(Poly::var(&f, 0))
            ],
        );
        let theta = Distribution::new(&f, vec![d], SNCDivisor::empty());
        assert_eq!(check_monomial_form(&theta), MonomialVerdict::NotLogCanonical);
    }

    #[test]
    fn first_integrals_examples() {
        let f2 = Frame::from_names(&["x", "y"]);
        let theta = Distribution::new(
            &f2,
            vec![Derivation::diagonal(&f2, &[q(1), q(-1)])],
            SNCDivisor::empty(),
        );
        let form = check_monomial_form(&theta);
        let ints = first_integrals(&f2, form.form().unwrap());
        assert_eq!(ints.len(), 1);
        assert_eq!(ints[0][0], ints[0][1]);

        let f3 = xyz();
        let theta = Distribution::new(
            &f3,
            vec![Derivation::coordinate(&f3, 1), Derivation::coordinate(&f3, 2)],
            SNCDivisor::empty(),
        );
        let form = check_monomial_form(&theta);
        let ints = first_integrals(&f3, form.form().unwrap());
        assert_eq!(ints.len(), 1);
        assert_eq!(ints[0], vec![q(1), q(0), q(0)]);
    }

    #[test]
    fn eigen_block_decomposition() {
        let f = xyz();
        let x_dx = Derivation::diagonal(&f, &[q(1), q(0), q(0)]);
        let x = Poly::var(&f, 0);
        let y = Poly::var(&f, 1);
        let z = Poly::var(&f, 2);
        let g = y.pow(2).add(&x.mul(&z.pow(3))).add(&x.pow(4));
        let blocks = eigen_blocks(&x_dx, &g).unwrap();
        assert_eq!(blocks.len(), 3);
        let find = |k: i64| blocks.iter().find(|b| b.eigenvalue == q(k)).unwrap();
        assert_eq!(find(0).block, y.pow(2));
        assert_eq!(find(1).block, x.mul(&z.pow(3)));
        assert_eq!(find(4).block, x.pow(4));
        // each block is an exact eigenvector and the blocks sum to f
        let mut total = Poly::zero(&f);
        for b in &blocks {
            assert_eq!(x_dx.apply_poly(&b.block), b.block.scale(&b.eigenvalue));
            total = total.add(&b.block.mul_monomial(&b.cofactor));
        }
        assert_eq!(total, g);
    }

    #[test]
    fn invariant_generator_extraction() {
        // θ = (x d/dx - y d/dy), I = (x^2 y^2 + x^3 y^3 + x)
        let f = Frame::from_names(&["x", "y"]);
        let theta = Distribution::new(
            &f,
            vec![Derivation::diagonal(&f, &[q(1), q(-1)])],
            SNCDivisor::empty(),
        );
        let x = Poly::var(&f, 0);
        let y = Poly::var(&f, 1);
        let g = x
            .pow(2)
            .mul(&y.pow(2))
            .add(&x.pow(3).mul(&y.pow(3)))
            .add(&x);
        let i = FGIdeal::new(&f, vec![g]);
        let out = invariant_generators(&theta, &i).unwrap();
        let expect = FGIdeal::new(
            &f,
            vec![x.pow(2).mul(&y.pow(2)).add(&x.pow(3).mul(&y.pow(3))), x.clone()],
        );
        assert_eq!(out.generators().len(), 2);
        assert!(out.equals(&expect, Backend::Global));
        // and the output generates the same ideal (invariance holds here)
        assert!(theta.leaves_invariant(&i, Backend::Local));
        assert!(out.equals(&i, Backend::Local));
    }
}
