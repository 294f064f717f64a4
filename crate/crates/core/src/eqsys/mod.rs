//! The equation system over `μ(q,s)`: flow equations through the product,
//! normalisation on locally positive SCCs, and zeros on nodes that cannot
//! reach one. Solved exactly for concrete evaluations, or written out as
//! SMT-LIB for synthesis.

mod grid;
mod linsolve;
mod query;
mod smt;

use std::collections::BTreeSet;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::gba::{translate, Gba, GbaError, GbaState};
use crate::ltl::{atomic_props, Formula, LtlError};
use crate::pmc::{Diagnostic, Evaluation, Pmc, PmcError, Rational, RationalFunction};
use crate::product::{
    build_product_with, classify, Classification, ClassifyOptions, ProductError, ProductGraph, Scope,
    DEFAULT_MAX_NODES,
};

pub use grid::{grid_points, synth_grid, GridOutcome};
pub use linsolve::{solve, LinearEquation, SolveError};
pub use query::{parse_query, Interval, PltlQuery};
pub use smt::{check_smtlib, emit_smtlib, evaluate_smtlib, SmtError, SmtEvaluation, SmtSummary};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EqsysError {
    #[error(transparent)]
    Formula(#[from] LtlError),
    #[error(transparent)]
    Automaton(#[from] GbaError),
    #[error(transparent)]
    Model(#[from] PmcError),
    #[error(transparent)]
    Product(#[from] ProductError),
    #[error("evaluation is not well defined: {0}")]
    IllDefined(Diagnostic),
    #[error(transparent)]
    Linear(#[from] SolveError),
    #[error("solution leaves [0,1]: mu{node} = {value}")]
    OutOfRange { node: String, value: Rational },
    #[error("invalid query: {0}")]
    Query(String),
    #[error("interval {0} is empty or not within [0,1]")]
    InvalidInterval(String),
    #[error("parameter `{0}` needs finite bounds for grid search")]
    UnboundedParam(String),
    #[error("grid of {0} points per axis is not searchable")]
    GridSize(usize),
}

/// `Σ_k coeff_k · Σ_{t ∈ targets_k} μ(t)` for one node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowTerm {
    pub coefficient: RationalFunction,
    /// Variable indices, one per product arc using this row entry.
    pub targets: Vec<usize>,
}

/// The system over the product nodes in scope of a classification.
#[derive(Debug, Clone)]
pub struct EquationSystem<'a> {
    m: &'a Pmc,
    a: &'a Gba,
    g: &'a ProductGraph,
    nodes: Vec<u32>,
    index: Vec<u32>,
    flow: Vec<Vec<FlowTerm>>,
    positives: Vec<Vec<usize>>,
    zero: Vec<bool>,
    target: Vec<usize>,
}

const NONE: u32 = u32::MAX;

/// Builds the system for the nodes in scope of `c`.
pub fn build_system<'a>(g: &'a ProductGraph, a: &'a Gba, c: &Classification, m: &'a Pmc) -> EquationSystem<'a> {
    let nodes: Vec<u32> = (0..g.num_nodes() as u32).filter(|&v| c.in_scope[v as usize]).collect();
    let mut index = vec![NONE; g.num_nodes()];
    for (i, &v) in nodes.iter().enumerate() {
        index[v as usize] = i as u32;
    }

    let flow = nodes
        .iter()
        .map(|&v| {
            let v = v as usize;
            let row = m.row(g.chain_state(v));
            let mut terms: Vec<FlowTerm> = Vec::new();
            let mut last = usize::MAX;
            for arc in g.arc_range(v) {
                let k = g.arc_entry(arc);
                let t = index[g.arc_target(arc)] as usize;
                if k == last {
                    terms.last_mut().expect("open group").targets.push(t);
                } else {
                    terms.push(FlowTerm {
                        coefficient: row[k].1.clone(),
                        targets: vec![t],
                    });
                    last = k;
                }
            }
            terms
        })
        .collect();

    let mut positives = Vec::new();
    let mut pos_nodes = Vec::new();
    for &id in &c.pos {
        let record = &c.records[id];
        pos_nodes.extend(record.members.iter().map(|&v| v as usize));
        for &s in &record.projection {
            let group: Vec<usize> = record
                .members
                .iter()
                .filter(|&&v| g.chain_state(v as usize) == s as usize)
                .map(|&v| index[v as usize] as usize)
                .collect();
            positives.push(group);
        }
    }

    let reaches_pos = g.graph().reversed().reachable_from(pos_nodes);
    let zero = nodes.iter().map(|&v| !reaches_pos[v as usize]).collect();
    let target = g.initial_nodes().iter().map(|&v| index[v as usize] as usize).collect();

    EquationSystem {
        m,
        a,
        g,
        nodes,
        index,
        flow,
        positives,
        zero,
        target,
    }
}

/// Exact solution of a concrete instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    /// `Σ_{q0 ∈ Q0} μ(q0, s̄)`.
    pub target: Rational,
    /// `μ` per variable, aligned with [`EquationSystem::nodes`].
    pub values: Vec<Rational>,
}

impl Solution {
    pub fn value(&self, sys: &EquationSystem, v: usize) -> Option<&Rational> {
        sys.variable(v).map(|i| &self.values[i])
    }
}

impl<'a> EquationSystem<'a> {
    pub fn num_variables(&self) -> usize {
        self.nodes.len()
    }

    /// Product node of each variable.
    pub fn nodes(&self) -> &[u32] {
        &self.nodes
    }

    pub fn variable(&self, v: usize) -> Option<usize> {
        match self.index.get(v) {
            Some(&i) if i != NONE => Some(i as usize),
            _ => None,
        }
    }

    pub fn flow(&self, i: usize) -> &[FlowTerm] {
        &self.flow[i]
    }

    /// Variable groups whose sums are fixed to 1.
    pub fn positives(&self) -> &[Vec<usize>] {
        &self.positives
    }

    pub fn zeros(&self) -> impl Iterator<Item = usize> + '_ {
        self.zero.iter().enumerate().filter(|(_, &z)| z).map(|(i, _)| i)
    }

    pub fn is_zero(&self, i: usize) -> bool {
        self.zero[i]
    }

    /// Variables summed by the target.
    pub fn target(&self) -> &[usize] {
        &self.target
    }

    /// Whether no initial node can reach a locally positive SCC.
    pub fn target_is_zero(&self) -> bool {
        self.target.iter().all(|&i| self.zero[i])
    }

    pub fn model(&self) -> &Pmc {
        self.m
    }

    pub fn product(&self) -> &ProductGraph {
        self.g
    }

    pub fn automaton(&self) -> &Gba {
        self.a
    }

    pub fn node_name(&self, i: usize) -> String {
        self.g.node_name(self.nodes[i] as usize)
    }

    /// A name for variable `i` made only of identifier characters.
    pub fn symbol(&self, i: usize) -> String {
        let (q, s) = self.g.split(self.nodes[i] as usize);
        let q_name = match &self.a.states()[q] {
            GbaState::Named(n) if is_ident(n) => n.clone(),
            _ => format!("q{q}"),
        };
        let s_name = self.m.state_name(s);
        let s_name = if is_ident(s_name) {
            s_name.to_string()
        } else {
            format!("s{s}")
        };
        format!("mu({q_name},{s_name})")
    }

    /// Substitutes `v`, fixes the zeros, and solves the remaining variables
    /// exactly. The solution must be unique and within `[0,1]`.
    pub fn solve_concrete(&self, v: &Evaluation) -> Result<Solution, EqsysError> {
        self.m.well_defined(v).map_err(EqsysError::IllDefined)?;
        let rows: Vec<Vec<(usize, Rational)>> = self.m.concrete_rows(v)?;

        // unknowns are the non-zero variables, renumbered densely
        let mut unknown = vec![usize::MAX; self.nodes.len()];
        let mut back = Vec::new();
        for i in 0..self.nodes.len() {
            if !self.zero[i] {
                unknown[i] = back.len();
                back.push(i);
            }
        }

        let mut equations = Vec::with_capacity(back.len() + self.positives.len());
        for &i in &back {
            let node = self.nodes[i] as usize;
            let row = &rows[self.g.chain_state(node)];
            let mut eq = LinearEquation::new();
            eq.add(unknown[i], &Rational::one());
            for arc in self.g.arc_range(node) {
                let j = self.index[self.g.arc_target(arc)] as usize;
                if !self.zero[j] {
                    eq.add(unknown[j], &-(&row[self.g.arc_entry(arc)].1));
                }
            }
            equations.push(eq);
        }
        for group in &self.positives {
            let mut eq = LinearEquation::new();
            for &i in group {
                eq.add(unknown[i], &Rational::one());
            }
            eq.rhs = Rational::one();
            equations.push(eq);
        }

        let x = solve(back.len(), equations)?;
        let mut values = vec![Rational::zero(); self.nodes.len()];
        for (u, &i) in back.iter().enumerate() {
            let value = &x[u];
            if value < &Rational::zero() || value > &Rational::one() {
                return Err(EqsysError::OutOfRange {
                    node: self.node_name(i),
                    value: value.clone(),
                });
            }
            values[i] = value.clone();
        }
        let target = self.target.iter().map(|&i| &values[i]).sum();
        Ok(Solution { target, values })
    }
}

fn is_ident(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.')
}

/// Limits for the translate-product-classify pipeline.
#[derive(Debug, Clone, Copy)]
pub struct PipelineOptions {
    pub max_product_nodes: usize,
    pub classify: ClassifyOptions,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            max_product_nodes: DEFAULT_MAX_NODES,
            classify: ClassifyOptions::default(),
        }
    }
}

impl PipelineOptions {
    pub fn with_scope(mut self, scope: Scope) -> Self {
        self.classify.scope = scope;
        self
    }
}

/// Automaton, product and classification for one model and property.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub automaton: Gba,
    pub product: ProductGraph,
    pub classification: Classification,
}

impl Analysis {
    /// Translates `phi` over the model's propositions and classifies the product.
    pub fn run(m: &Pmc, phi: &Formula, opts: PipelineOptions) -> Result<Analysis, EqsysError> {
        let mut universe: BTreeSet<String> = m.aps();
        universe.extend(atomic_props(phi));
        let a = translate(phi, &universe)?;
        Analysis::with_automaton(m, a, opts)
    }

    pub fn with_automaton(m: &Pmc, a: Gba, opts: PipelineOptions) -> Result<Analysis, EqsysError> {
        let g = build_product_with(&a, m, opts.max_product_nodes)?;
        let c = classify(&g, &a, m, opts.classify)?;
        Ok(Analysis {
            automaton: a,
            product: g,
            classification: c,
        })
    }

    pub fn system<'a>(&'a self, m: &'a Pmc) -> EquationSystem<'a> {
        build_system(&self.product, &self.automaton, &self.classification, m)
    }
}

/// `𝔓(φ)` in the chain induced by `v`.
pub fn probability(m: &Pmc, phi: &Formula, v: &Evaluation) -> Result<Rational, EqsysError> {
    m.well_defined(v).map_err(EqsysError::IllDefined)?;
    let an = Analysis::run(m, phi, PipelineOptions::default())?;
    Ok(an.system(m).solve_concrete(v)?.target)
}

/// Whether the initial state satisfies `query` under `v`, with the probability.
pub fn check_pltl(m: &Pmc, query: &PltlQuery, v: &Evaluation) -> Result<(bool, Rational), EqsysError> {
    let p = probability(m, &query.formula, v)?;
    Ok((query.interval.contains(&p), p))
}
