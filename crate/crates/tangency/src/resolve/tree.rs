use crate::algebra::{Frame, LocalElement, Monomial, Poly, Q, Substitution};
use crate::blowup::TransformKind;
use crate::foliation::{Distribution, MonomialVerdict, SNCDivisor};
use crate::ideal::FGIdeal;
use crate::invariants::{AdmissibilityVerdict, TgInvariant};

/// Everything attached to one chart of the resolution tree.
#[derive(Clone, Debug)]
pub struct ChartState {
    pub frame: Frame,
    pub theta: Distribution,
    /// The current transform of the ideal (the marked chain: birational
    /// where the order was positive, total otherwise, with exceptional
    /// content divided off through marking edges).
    pub ideal: FGIdeal,
    /// Exceptional monomial with `pullback_factor * ideal` equal to the
    /// full pull-back of the input ideal in this chart.
    pub pullback_factor: Monomial,
    /// Units declared invertible by open restriction.
    pub declared_units: Vec<LocalElement>,
    pub local_only: bool,
}

impl ChartState {
    pub fn divisor(&self) -> SNCDivisor {
        SNCDivisor::from_frame(&self.frame)
    }

    /// The full pulled-back ideal in this chart.
    pub fn pullback_ideal(&self) -> FGIdeal {
        let factor = Poly::monomial(&self.frame, self.pullback_factor.clone(), num::One::one());
        FGIdeal::new(
            &self.frame,
            self.ideal.generators().iter().map(|g| g.mul(&factor)).collect(),
        )
    }
}

/// How a chart arose from its parent.
#[derive(Clone, Debug)]
pub enum EdgeKind {
    Blowup {
        center: Vec<usize>,
        chart_var: usize,
        transform: TransformKind,
    },
    /// Codimension-one step: flag the variable as a divisor component (a
    /// blow-up with divisorial center is an isomorphism) and divide the
    /// ideal by it `times` times.
    DivisorMark { var: usize, times: u32 },
    /// Tschirnhaus shift of the distinguished variable.
    Shift { var: usize, by: Poly },
    /// Linear recoordination mixing two regular directions.
    Shear { kept: usize, absorbed: usize, factor: Q },
}

#[derive(Clone, Debug)]
pub struct Edge {
    pub kind: EdgeKind,
    pub admissibility: Option<AdmissibilityVerdict>,
}

/// Fiber-analysis payload recorded on every leaf of a step-3 subtree.
#[derive(Clone, Debug)]
pub struct Step3Data {
    /// Indices of the divisor-block variables (exceptional ones then the
    /// distinguished variable), stable across the subtree.
    pub fblock: Vec<usize>,
    pub nu: usize,
    /// Prepared exponents `(generator, power, r-vector over the
    /// exceptional block)`.
    pub r_list: Vec<(usize, usize, Vec<u32>)>,
    /// Accumulated exponent matrix of the subtree history at this leaf.
    pub a_matrix: Vec<Vec<u32>>,
}

#[derive(Clone, Debug)]
pub struct ChartNode {
    pub id: usize,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    pub edge: Option<Edge>,
    pub state: ChartState,
    /// Composition of the chart maps from the root frame.
    pub root_map: Substitution,
    pub tg: Option<TgInvariant>,
    pub monomial: Option<MonomialVerdict>,
    /// Which driver phase produced this node.
    pub phase: String,
    pub step3: Option<Step3Data>,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct ChartTree {
    pub nodes: Vec<ChartNode>,
}

impl ChartTree {
    pub fn new(root_state: ChartState) -> Self {
        let root_map = Substitution::identity(&root_state.frame);
        ChartTree {
            nodes: vec![ChartNode {
                id: 0,
                parent: None,
                children: Vec::new(),
                edge: None,
                state: root_state,
                root_map,
                tg: None,
                monomial: None,
                phase: "root".to_string(),
                step3: None,
                warnings: Vec::new(),
            }],
        }
    }

    pub fn push_child(
        &mut self,
        parent: usize,
        state: ChartState,
        subst: Substitution,
        edge: Edge,
        phase: &str,
    ) -> usize {
        let id = self.nodes.len();
        let root_map = self.nodes[parent].root_map.then(&subst);
        self.nodes.push(ChartNode {
            id,
            parent: Some(parent),
            children: Vec::new(),
            edge: Some(edge),
            state,
            root_map,
            tg: None,
            monomial: None,
            phase: phase.to_string(),
            step3: None,
            warnings: Vec::new(),
        });
        self.nodes[parent].children.push(id);
        id
    }

    pub fn leaves(&self) -> Vec<usize> {
        (0..self.nodes.len()).filter(|&i| self.nodes[i].children.is_empty()).collect()
    }

    pub fn node(&self, id: usize) -> &ChartNode {
        &self.nodes[id]
    }
}
