//! Blow-up charts of coordinate-subspace centers, total and birational
//! transforms of ideals, strict transforms of distributions (with closed
//! forms for monomial distributions cross-checked against the generic
//! chain-rule path), combinatorial principalization of monomial ideals,
//! and the fiber-point matrix analysis behind the third resolution step.

use num::{BigInt, One, Zero};
use thiserror::Error;

use crate::algebra::{Frame, LocalElement, Monomial, Poly, Q, Substitution};
use crate::foliation::{check_monomial_form, Derivation, Distribution, MonomialForm, SNCDivisor};
use crate::ideal::{Backend, FGIdeal};
use crate::linalg;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BlowupError {
    #[error("center must have codimension at least two, got {0} variables")]
    CenterTooSmall(usize),
    #[error("center variable out of frame")]
    CenterOutOfFrame,
    #[error("birational transform requested but the center does not lie in the support of the ideal")]
    NotOrderOne,
    #[error("ideal has a non-monomial generator: {0}")]
    NonMonomialGenerator(String),
    #[error("generator {0} involves variables outside the declared divisor set")]
    OutsideDivisor(String),
    #[error("branch budget {0} exhausted during principalization")]
    BranchBudget(usize),
    #[error("inconsistent blow-up history: accumulated exponent matrix is not unimodular")]
    NotUnimodular,
}

/// A coordinate-subspace blow-up center: the common zero set of the
/// listed variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Center {
    vars: Vec<usize>,
}

impl Center {
    pub fn new(frame: &Frame, vars: Vec<usize>) -> Result<Self, BlowupError> {
        if vars.len() < 2 {
            return Err(BlowupError::CenterTooSmall(vars.len()));
        }
        let mut vars = vars;
        vars.sort_unstable();
        vars.dedup();
        if vars.iter().any(|&v| v >= frame.dim()) {
            return Err(BlowupError::CenterOutOfFrame);
        }
        Ok(Center { vars })
    }

    pub fn vars(&self) -> &[usize] {
        &self.vars
    }

    pub fn ideal(&self, frame: &Frame) -> FGIdeal {
        FGIdeal::new(frame, self.vars.iter().map(|&v| Poly::var(frame, v)).collect())
    }

    pub fn display(&self, frame: &Frame) -> String {
        self.vars
            .iter()
            .map(|&v| frame.name(v).to_string())
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// One chart of a blow-up: the substitution expressing parent coordinates
/// in child coordinates, plus which center variable this chart solves for.
#[derive(Clone, Debug)]
pub struct BlowupChart {
    pub center: Center,
    /// Index of the chart variable (same position in parent and child).
    pub chart_var: usize,
    pub child_frame: Frame,
    pub subst: Substitution,
}

fn child_name(name: &str) -> String {
    format!("{name}~")
}

/// All charts of the blow-up with the given center. In the chart of
/// center variable `v0` the map reads `v0 = x0~`, `v = x0~ * v~` for the
/// other center variables, and fixes everything else. The chart variable
/// becomes a divisor component; old components persist through their
/// strict transforms at the same index.
pub fn blowup_charts(frame: &Frame, center: &Center) -> Vec<BlowupChart> {
    center
        .vars()
        .iter()
        .map(|&v0| {
            let vars = frame
                .vars()
                .iter()
                .enumerate()
                .map(|(i, v)| crate::algebra::VarInfo {
                    name: child_name(&v.name),
                    exceptional: v.exceptional || i == v0,
                })
                .collect();
            let child_frame = Frame::new(vars);
            let x0 = Poly::var(&child_frame, v0);
            let images = (0..frame.dim())
                .map(|i| {
                    if i == v0 || !center.vars().contains(&i) {
                        Poly::var(&child_frame, i)
                    } else {
                        x0.mul(&Poly::var(&child_frame, i))
                    }
                })
                .collect();
            BlowupChart {
                center: center.clone(),
                chart_var: v0,
                child_frame: child_frame.clone(),
                subst: Substitution::new(frame.clone(), child_frame, images),
            }
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum TransformKind {
    Total,
    Birational,
}

impl std::fmt::Display for TransformKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TransformKind::Total => write!(f, "total"),
            TransformKind::Birational => write!(f, "birational"),
        }
    }
}

/// Whether the center lies in the support of the ideal, i.e. every
/// generator belongs to the center ideal.
pub fn center_in_support(ideal: &FGIdeal, center: &Center) -> bool {
    let c = center.ideal(ideal.frame());
    ideal.generators().iter().all(|g| c.contains(g, Backend::Global))
}

/// Total or birational (marked, one exceptional power) transform of an
/// ideal through one chart.
pub fn transform_ideal(
    ideal: &FGIdeal,
    chart: &BlowupChart,
    kind: TransformKind,
) -> Result<FGIdeal, BlowupError> {
    if kind == TransformKind::Birational && !center_in_support(ideal, &chart.center) {
        return Err(BlowupError::NotOrderOne);
    }
    let x0 = Monomial::var(chart.chart_var, chart.child_frame.dim());
    let gens = ideal
        .generators()
        .iter()
        .map(|g| {
            let total = chart.subst.apply(g);
            match kind {
                TransformKind::Total => Ok(total),
                TransformKind::Birational => total
                    .div_monomial(&x0)
                    .ok_or(BlowupError::NotOrderOne),
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(FGIdeal::new(&chart.child_frame, gens))
}

/// Pulls one derivation through a blow-up chart by the chain rule and
/// clears the exceptional pole minimally (then saturates: while every
/// coefficient is divisible by the chart variable, divide).
pub fn transform_derivation(d: &Derivation, chart: &BlowupChart) -> Derivation {
    let child = &chart.child_frame;
    let v0 = chart.chart_var;
    let x0_mon = Monomial::var(v0, child.dim());
    // coefficients of x0~ * (pullback of d)
    let pulled: Vec<LocalElement> = (0..child.dim())
        .map(|j| {
            let a_j = chart
                .subst
                .apply_local(d.coeff(j))
                .expect("unit denominators survive origin-preserving charts");
            if j == v0 {
                // x0 * D(v0-image) with D(v0) = a_{v0}
                a_j.mul_poly(&Poly::var(child, v0))
            } else if chart.center.vars().contains(&j) {
                // x0 * D(u_j / v0) = D(u_j) - u_j~ * D(v0)
                let a_v0 = chart
                    .subst
                    .apply_local(d.coeff(v0))
                    .expect("unit denominators survive origin-preserving charts");
                a_j.sub(&a_v0.mul_poly(&Poly::var(child, j)))
            } else {
                a_j.mul_poly(&Poly::var(child, v0))
            }
        })
        .collect();
    let mut coeffs = pulled;
    // divide out common x0~ factors
    loop {
        let divisible = coeffs.iter().all(|c| {
            c.is_zero()
                || c.num()
                    .div_monomial(&x0_mon)
                    .is_some()
        });
        if !divisible || coeffs.iter().all(|c| c.is_zero()) {
            break;
        }
        coeffs = coeffs
            .iter()
            .map(|c| {
                if c.is_zero() {
                    c.clone()
                } else {
                    LocalElement::new(c.num().div_monomial(&x0_mon).unwrap(), c.den().clone())
                        .expect("denominator untouched")
                }
            })
            .collect();
    }
    Derivation::new(child, coeffs)
}

/// Result of a distribution transform; warnings record generators that
/// needed forcing to stay tangent to the enlarged divisor.
#[derive(Clone, Debug)]
pub struct DistributionTransform {
    pub distribution: Distribution,
    pub warnings: Vec<String>,
}

/// Strict transform of a distribution through one chart: chain-rule
/// pullbacks of the generators with poles cleared, then tangency to the
/// new divisor enforced. When the input is recognized monomial, the
/// closed-form transforms are produced and cross-checked against the
/// generic path.
pub fn transform_distribution(theta: &Distribution, chart: &BlowupChart) -> DistributionTransform {
    let child = &chart.child_frame;
    let child_divisor = SNCDivisor::from_frame(child);
    let mut warnings = Vec::new();

    let mf = check_monomial_form(theta);
    let generic: Vec<Derivation> = if let Some(form) = mf.form() {
        form.basis.iter().map(|g| transform_derivation(g, chart)).collect()
    } else {
        theta.generators().iter().map(|g| transform_derivation(g, chart)).collect()
    };

    let mut gens = Vec::new();
    for g in generic.iter() {
        let mut h = g.clone();
        let mut guard = 0;
        while !h.is_tangent_to(&child_divisor) {
            // force tangency by multiplying with each violated component
            let bad = child_divisor
                .components()
                .find(|&u| {
                    let c = h.coeff(u);
                    !(c.is_zero() || c.num().min_exp_in(u) >= 1)
                })
                .expect("non-tangent derivation has a violated component");
            h = h.mul_poly(&Poly::var(child, bad));
            guard += 1;
            if guard > child.dim() {
                break;
            }
        }
        if guard > 0 {
            warnings.push(format!(
                "generator {g} forced tangent by multiplying {guard} divisor variable(s)"
            ));
        }
        if !h.is_zero() {
            gens.push(h);
        }
    }

    // closed-form construction and cross-check for the monomial case
    if let Some(form) = mf.form() {
        let closed = closed_form_transform(theta.frame(), form, chart);
        if closed != gens {
            warnings.push("closed-form and chain-rule transforms disagree".to_string());
            debug_assert_eq!(closed, gens, "closed-form transform mismatch");
        }
    }

    DistributionTransform {
        distribution: Distribution::new_unchecked(child, gens, child_divisor),
        warnings,
    }
}

/// The transforms read off the admissible-center normal form: diagonal
/// generators stay diagonal with shifted rows, a regular generator at the
/// chart variable becomes the radial field minus the other center
/// directions, and the remaining regular generators stay coordinate
/// fields.
fn closed_form_transform(parent: &Frame, form: &MonomialForm, chart: &BlowupChart) -> Vec<Derivation> {
    let child = &chart.child_frame;
    let v0 = chart.chart_var;
    let in_center = |j: usize| chart.center.vars().contains(&j);
    let mut out = Vec::new();
    for &w in &form.regular_part {
        if w == v0 {
            // x0 d/dx0 - sum over other center variables u~ d/du~
            let mut alpha = vec![Q::zero(); child.dim()];
            alpha[v0] = Q::one();
            for &j in chart.center.vars() {
                if j != v0 {
                    alpha[j] = -Q::one();
                }
            }
            out.push(Derivation::diagonal(child, &alpha));
        } else {
            out.push(Derivation::coordinate(child, w));
        }
    }
    for row in &form.alpha {
        let full = |j: usize| -> Q {
            match form.u_block.iter().position(|&u| u == j) {
                Some(p) => row[p].clone(),
                None => Q::zero(),
            }
        };
        let a_v0 = full(v0);
        let mut alpha = vec![Q::zero(); child.dim()];
        for j in 0..child.dim() {
            alpha[j] = if j == v0 {
                a_v0.clone()
            } else if in_center(j) {
                full(j) - a_v0.clone()
            } else {
                full(j)
            };
        }
        out.push(Derivation::diagonal(child, &alpha));
    }
    let _ = parent;
    out.into_iter().filter(|d| !d.is_zero()).collect()
}

/// A node of a combinatorial principalization tree. The ideal carried is
/// the total transform, kept monomial.
#[derive(Clone, Debug)]
pub struct MonomialNode {
    pub frame: Frame,
    pub parent: Option<usize>,
    pub blowup: Option<BlowupChart>,
    pub ideal: FGIdeal,
    pub children: Vec<usize>,
    pub depth: usize,
}

#[derive(Clone, Debug)]
pub struct MonomialTree {
    pub nodes: Vec<MonomialNode>,
    /// The divisor-block variable indices the combinatorics runs over
    /// (stable across all charts).
    pub block: Vec<usize>,
}

impl MonomialTree {
    pub fn leaves(&self) -> Vec<usize> {
        (0..self.nodes.len()).filter(|&i| self.nodes[i].children.is_empty()).collect()
    }

    pub fn depth(&self) -> usize {
        self.nodes.iter().map(|n| n.depth).max().unwrap_or(0)
    }
}

fn minimal_monomial_generators(ideal: &FGIdeal) -> Vec<Monomial> {
    let mut mons: Vec<Monomial> = ideal
        .generators()
        .iter()
        .map(|g| g.as_monomial().expect("monomial ideal").0.clone())
        .collect();
    mons.sort();
    mons.dedup();
    let mut keep: Vec<Monomial> = Vec::new();
    for m in &mons {
        if !mons.iter().any(|o| o != m && o.divides(m)) {
            keep.push(m.clone());
        }
    }
    keep
}

/// True when the monomial ideal is principal: one minimal generator.
pub fn monomial_ideal_principal(ideal: &FGIdeal) -> bool {
    minimal_monomial_generators(ideal).len() == 1
}

/// Maximal-exponent variable of a monomial within the block, ties broken
/// by variable order.
fn max_exp_var(m: &Monomial, block: &[usize]) -> Option<usize> {
    block
        .iter()
        .copied()
        .filter(|&i| m.exp(i) > 0)
        .max_by_key(|&i| (m.exp(i), std::cmp::Reverse(i)))
}

/// Picks the next center from the lexicographically first pair of minimal
/// generators: one maximal-exponent variable out of each coprime part.
/// Working on the coprime parts is what makes the combinatorics shrink;
/// full exponent vectors would ratchet the shared content forever.
fn select_center(gens: &[Monomial], block: &[usize]) -> Option<(usize, usize)> {
    if gens.len() < 2 {
        return None;
    }
    // minimal generators are pairwise incomparable, take the first pair
    let g = gens[0].gcd(&gens[1]);
    let u = gens[0].div(&g);
    let w = gens[1].div(&g);
    let p = max_exp_var(&u, block)?;
    let q = max_exp_var(&w, block)?;
    debug_assert_ne!(p, q, "coprime parts have disjoint supports");
    Some((p.min(q), p.max(q)))
}

/// Combinatorial principalization: blow up two-variable strata of the
/// declared divisor block until the total transform is principal in every
/// leaf chart. Deterministic center selection for golden tests.
pub fn principalize_monomial(
    ideal: &FGIdeal,
    block: &[usize],
    max_nodes: usize,
) -> Result<MonomialTree, BlowupError> {
    for g in ideal.generators() {
        let Some((m, _)) = g.as_monomial() else {
            return Err(BlowupError::NonMonomialGenerator(g.to_string()));
        };
        for i in 0..ideal.frame().dim() {
            if m.exp(i) > 0 && !block.contains(&i) {
                return Err(BlowupError::OutsideDivisor(g.to_string()));
            }
        }
    }
    let root = MonomialNode {
        frame: ideal.frame().clone(),
        parent: None,
        blowup: None,
        ideal: ideal.clone(),
        children: Vec::new(),
        depth: 0,
    };
    let mut tree = MonomialTree { nodes: vec![root], block: block.to_vec() };
    let mut work = vec![0usize];
    while let Some(idx) = work.pop() {
        if tree.nodes.len() > max_nodes {
            return Err(BlowupError::BranchBudget(max_nodes));
        }
        let gens = minimal_monomial_generators(&tree.nodes[idx].ideal);
        let Some((i, j)) = select_center(&gens, block) else {
            continue;
        };
        let frame = tree.nodes[idx].frame.clone();
        let center = Center::new(&frame, vec![i, j]).expect("two distinct variables");
        for chart in blowup_charts(&frame, &center) {
            let transformed = transform_ideal(&tree.nodes[idx].ideal, &chart, TransformKind::Total)
                .expect("total transform cannot fail");
            let child = MonomialNode {
                frame: chart.child_frame.clone(),
                parent: Some(idx),
                blowup: Some(chart),
                ideal: transformed,
                children: Vec::new(),
                depth: tree.nodes[idx].depth + 1,
            };
            let cid = tree.nodes.len();
            tree.nodes.push(child);
            tree.nodes[idx].children.push(cid);
            work.push(cid);
        }
    }
    Ok(tree)
}

/// Recenters chart data at a nearby point: each listed variable is
/// shifted by a nonzero constant, and divisor components that no longer
/// pass through the new origin are dropped. Translations act on vector
/// fields by plain coefficient substitution.
pub fn recenter(
    frame: &Frame,
    theta: &Distribution,
    ideal: &FGIdeal,
    shifts: &[(usize, Q)],
) -> (Frame, Distribution, FGIdeal) {
    let shifted: Vec<usize> = shifts.iter().map(|(i, _)| *i).collect();
    let new_frame = Frame::new(
        frame
            .vars()
            .iter()
            .enumerate()
            .map(|(i, v)| crate::algebra::VarInfo {
                name: v.name.clone(),
                exceptional: v.exceptional && !shifted.contains(&i),
            })
            .collect(),
    );
    let images: Vec<Poly> = (0..frame.dim())
        .map(|i| {
            let v = Poly::var(&new_frame, i);
            match shifts.iter().find(|(j, _)| *j == i) {
                Some((_, c)) => v.add(&Poly::constant(&new_frame, c.clone())),
                None => v,
            }
        })
        .collect();
    let subst = Substitution::new(frame.clone(), new_frame.clone(), images);
    let new_ideal = ideal.substitute(&subst);
    let gens = theta
        .generators()
        .iter()
        .map(|d| {
            let coeffs = d
                .coeffs()
                .iter()
                .map(|c| subst.apply_local(c).expect("translation moves the origin off the poles"))
                .collect();
            Derivation::new(&new_frame, coeffs)
        })
        .collect();
    let new_theta =
        Distribution::new_unchecked(&new_frame, gens, SNCDivisor::from_frame(&new_frame));
    (new_frame, new_theta, new_ideal)
}

/// Which of the exponent-analysis cases applies at a fiber point class.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum FiberCase {
    /// The first block has full rank; the distinguished direction
    /// survives as a coordinate.
    Case1,
    /// Rank defect; the distinguished coordinate becomes a monomial in
    /// the vanishing block.
    Case2,
    /// No blow-up has engaged the distinguished variable at this class;
    /// no drop is guaranteed.
    Degenerate,
}

/// Predicted invariant at a fiber point class.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum FiberPrediction {
    Exact(usize),
    AtMost(usize),
}

impl FiberPrediction {
    pub fn matches(&self, observed: usize) -> bool {
        match self {
            FiberPrediction::Exact(k) => observed == *k,
            FiberPrediction::AtMost(k) => observed <= *k,
        }
    }
}

/// The matrix data of one fiber point class.
#[derive(Clone, Debug)]
pub struct FiberFrame {
    /// Unimodular accumulated exponent matrix, rows = original divisor
    /// block then the distinguished variable, columns reordered so the
    /// vanishing leaf variables come first.
    pub a_matrix: Vec<Vec<u32>>,
    pub t: usize,
    pub a1: Vec<Vec<Q>>,
    pub a2: Vec<Vec<Q>>,
    pub alpha1: Vec<Q>,
    pub alpha2: Vec<Q>,
    /// Sampled nonzero shifts for the non-vanishing coordinates; empty
    /// when the analysis is purely symbolic.
    pub gamma: Vec<Q>,
    /// Unit-absorption exponent matrix of the normalizing coordinate
    /// change.
    pub lambda: Vec<Vec<Q>>,
    pub case: FiberCase,
    pub prediction: FiberPrediction,
    /// Exponent vectors over the vanishing columns: the distinguished
    /// power first, then one entry per prepared coefficient.
    pub s_exponents: Vec<(String, Vec<u32>)>,
}

fn q_of(n: u32) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// Exponent analysis at one fiber point class of a combinatorial blow-up
/// history.
///
/// `a_full` has one row per original block variable (the distinguished
/// variable last) giving its monomial exponents in the leaf block
/// variables; `vanishing` lists leaf columns that vanish at the class;
/// `nu` is the prepared invariant and `r_list` the prepared coefficient
/// exponents (rows over the first `l` block variables) tagged `(i, j)`.
pub fn fiber_analysis(
    a_full: &[Vec<u32>],
    vanishing: &[usize],
    nu: usize,
    r_list: &[(usize, usize, Vec<u32>)],
    gamma: Vec<Q>,
) -> Result<FiberFrame, BlowupError> {
    let n = a_full.len();
    assert!(n >= 1);
    for row in a_full {
        assert_eq!(row.len(), n, "exponent matrix must be square");
    }
    let big: Vec<Vec<BigInt>> = a_full
        .iter()
        .map(|r| r.iter().map(|&e| BigInt::from(e)).collect())
        .collect();
    if !linalg::is_unimodular(&big) {
        return Err(BlowupError::NotUnimodular);
    }
    let l = n - 1;
    let t = vanishing.len();
    assert!(t >= 1, "a fiber point lies on the exceptional divisor");
    // reorder columns: vanishing first
    let mut order: Vec<usize> = vanishing.to_vec();
    for c in 0..n {
        if !vanishing.contains(&c) {
            order.push(c);
        }
    }
    let reordered: Vec<Vec<u32>> = a_full
        .iter()
        .map(|row| order.iter().map(|&c| row[c]).collect())
        .collect();
    let a1: Vec<Vec<Q>> = reordered[..l]
        .iter()
        .map(|row| row[..t].iter().map(|&e| q_of(e)).collect())
        .collect();
    let a2: Vec<Vec<Q>> = reordered[..l]
        .iter()
        .map(|row| row[t..].iter().map(|&e| q_of(e)).collect())
        .collect();
    let alpha1: Vec<Q> = reordered[l][..t].iter().map(|&e| q_of(e)).collect();
    let alpha2: Vec<Q> = reordered[l][t..].iter().map(|&e| q_of(e)).collect();

    // exponents over the vanishing columns
    let restrict = |coef_v: u32, r: Option<&Vec<u32>>| -> Vec<u32> {
        (0..t)
            .map(|c| {
                let mut e = coef_v * reordered[l][c];
                if let Some(r) = r {
                    for (row, &ri) in r.iter().enumerate() {
                        e += ri * reordered[row][c];
                    }
                }
                e
            })
            .collect()
    };
    let mut s_exponents: Vec<(String, Vec<u32>)> =
        vec![("v^nu".to_string(), restrict(nu as u32, None))];
    for (i, j, r) in r_list {
        assert_eq!(r.len(), l);
        s_exponents.push((format!("a[{i},{j}]"), restrict(*j as u32, Some(r))));
    }

    let leq = |a: &[u32], b: &[u32]| a.iter().zip(b).all(|(x, y)| x <= y);
    let s_nu = s_exponents[0].1.clone();
    let minimal = s_exponents
        .iter()
        .position(|(_, s)| s_exponents.iter().all(|(_, o)| leq(s, o)));

    // distinguished variable still alive as a coordinate at this class?
    let v_row = &reordered[l];
    let v_elementary = {
        let nonzero: Vec<usize> = (0..n).filter(|&c| v_row[c] > 0).collect();
        nonzero.len() == 1 && v_row[nonzero[0]] == 1 && nonzero[0] < t
    };

    let rank_a1 = linalg::rank(&a1);
    let (case, prediction) = if v_elementary && r_list.is_empty() {
        (FiberCase::Degenerate, FiberPrediction::AtMost(nu))
    } else if rank_a1 == t {
        match minimal {
            Some(0) => (
                FiberCase::Case1,
                FiberPrediction::AtMost(nu.saturating_sub(1)),
            ),
            Some(_) => {
                // largest prepared j achieving the minimal exponent
                let min_vec = s_exponents[minimal.unwrap()].1.clone();
                let mut j1 = 0usize;
                for (label_idx, (_, s)) in s_exponents.iter().enumerate() {
                    if label_idx == 0 || *s != min_vec {
                        continue;
                    }
                    let (_, j, _) = r_list[label_idx - 1];
                    j1 = j1.max(j);
                }
                (FiberCase::Case1, FiberPrediction::Exact(j1))
            }
            None => (FiberCase::Degenerate, FiberPrediction::AtMost(nu)),
        }
    } else {
        debug_assert!(
            !linalg::in_row_span(&a1, &alpha1),
            "unimodularity forces the distinguished row out of the span"
        );
        match minimal {
            Some(_) => (FiberCase::Case2, FiberPrediction::Exact(0)),
            None => (FiberCase::Degenerate, FiberPrediction::AtMost(nu)),
        }
    };
    let _ = s_nu;

    // unit-absorption exponents: solve alpha1 * mu = alpha2 when possible
    let lambda = compute_lambda(&a1, &a2, &alpha1, &alpha2, case);

    Ok(FiberFrame {
        a_matrix: reordered,
        t,
        a1,
        a2,
        alpha1,
        alpha2,
        gamma,
        lambda,
        case,
        prediction,
        s_exponents,
    })
}

fn compute_lambda(
    a1: &[Vec<Q>],
    a2: &[Vec<Q>],
    alpha1: &[Q],
    alpha2: &[Q],
    case: FiberCase,
) -> Vec<Vec<Q>> {
    match case {
        FiberCase::Case1 => {
            // [[0],[Id]] shape: the non-vanishing directions survive
            let rows = a1.len();
            let cols = a2.first().map(|r| r.len()).unwrap_or(0);
            let mut m = vec![vec![Q::zero(); cols]; rows];
            for (k, row) in m.iter_mut().rev().enumerate().take(cols.min(rows)) {
                let col = cols - 1 - k;
                row[col] = Q::one();
            }
            m
        }
        FiberCase::Case2 => {
            // Lambda = A2 - A1 * mu with alpha1 * mu = alpha2
            let t = alpha1.len();
            let cols = alpha2.len();
            let norm: Q = alpha1.iter().map(|a| a.clone() * a.clone()).sum();
            if norm.is_zero() {
                return a2.to_vec();
            }
            let mut mu = vec![vec![Q::zero(); cols]; t];
            for i in 0..t {
                for j in 0..cols {
                    mu[i][j] = alpha1[i].clone() * alpha2[j].clone() / norm.clone();
                }
            }
            a1.iter()
                .zip(a2)
                .map(|(r1, r2)| {
                    (0..cols)
                        .map(|j| {
                            let mut acc = r2[j].clone();
                            for (i, v) in r1.iter().enumerate() {
                                acc -= v.clone() * mu[i][j].clone();
                            }
                            acc
                        })
                        .collect()
                })
                .collect()
        }
        FiberCase::Degenerate => Vec::new(),
    }
}
