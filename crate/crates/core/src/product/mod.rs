//! The product graph of an automaton and a chain, its SCCs, and their
//! classification into locally positive and negative components.

mod complete;

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::gba::Gba;
use crate::graph::{tarjan, Csr, Sccs};
use crate::pmc::Pmc;

pub use complete::{is_complete_oracle, is_complete_rd, OracleVerdict};

/// Default cap on the number of product nodes.
pub const DEFAULT_MAX_NODES: usize = 5_000_000;
/// Default cap on subsets visited by the completeness oracle, per SCC.
pub const DEFAULT_ORACLE_BUDGET: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProductError {
    #[error("product would have {nodes} nodes, above the cap of {cap}")]
    Capacity { nodes: usize, cap: usize },
    #[error("automaton is not reverse deterministic on its reenterable states; use the completeness oracle")]
    NotReverseDeterministic,
    #[error("completeness oracle exceeded its budget of {budget} subsets on SCC {scc}")]
    OracleBudget { scc: usize, budget: usize },
}

/// `G = A × M`. Node `(q, s)` has id `s * |Q| + q`.
#[derive(Debug, Clone)]
pub struct ProductGraph {
    nq: usize,
    ns: usize,
    graph: Csr,
    /// Automaton edge consumed by each arc.
    arc_edge: Vec<u32>,
    /// Position of `(s, s')` in the source state's row.
    arc_entry: Vec<u32>,
    initial: Vec<u32>,
    state_names: Vec<String>,
    chain_names: Vec<String>,
}

pub fn build_product(a: &Gba, m: &Pmc) -> Result<ProductGraph, ProductError> {
    build_product_with(a, m, DEFAULT_MAX_NODES)
}

/// Arcs `((q,s),(q',s'))` with `P(s,s') ≠ 0` and `q' ∈ T(q, L(s))`, the
/// label projected onto the automaton's propositions.
pub fn build_product_with(a: &Gba, m: &Pmc, max_nodes: usize) -> Result<ProductGraph, ProductError> {
    let (nq, ns) = (a.num_states(), m.num_states());
    let nodes = nq.saturating_mul(ns);
    if nodes > max_nodes || nodes > u32::MAX as usize {
        return Err(ProductError::Capacity {
            nodes,
            cap: max_nodes.min(u32::MAX as usize),
        });
    }
    let mut offsets = Vec::with_capacity(nodes + 1);
    let mut targets = Vec::new();
    let mut arc_edge = Vec::new();
    let mut arc_entry = Vec::new();
    offsets.push(0);
    for s in 0..ns {
        let letter = a.project(m.label(s));
        let row = m.row(s);
        for q in 0..nq {
            let edges = a.successor_edges(q, letter);
            for (k, (t, _)) in row.iter().enumerate() {
                for e in edges.clone() {
                    targets.push((t * nq + a.edges()[e].target as usize) as u32);
                    arc_edge.push(e as u32);
                    arc_entry.push(k as u32);
                }
            }
            offsets.push(targets.len());
        }
    }
    let initial = a
        .initial()
        .iter()
        .map(|&q| (m.initial() * nq + q as usize) as u32)
        .collect();
    Ok(ProductGraph {
        nq,
        ns,
        graph: Csr::from_parts(offsets, targets),
        arc_edge,
        arc_entry,
        initial,
        state_names: (0..nq).map(|q| a.state_name(q)).collect(),
        chain_names: m.state_names().to_vec(),
    })
}

impl ProductGraph {
    pub fn num_nodes(&self) -> usize {
        self.nq * self.ns
    }

    pub fn num_arcs(&self) -> usize {
        self.graph.num_edges()
    }

    pub fn num_automaton_states(&self) -> usize {
        self.nq
    }

    pub fn num_chain_states(&self) -> usize {
        self.ns
    }

    pub fn node(&self, q: usize, s: usize) -> usize {
        s * self.nq + q
    }

    /// `(q, s)` of a node id.
    pub fn split(&self, v: usize) -> (usize, usize) {
        (v % self.nq, v / self.nq)
    }

    pub fn chain_state(&self, v: usize) -> usize {
        v / self.nq
    }

    pub fn graph(&self) -> &Csr {
        &self.graph
    }

    pub fn successors(&self, v: usize) -> &[u32] {
        self.graph.successors(v)
    }

    pub fn arc_range(&self, v: usize) -> std::ops::Range<usize> {
        self.graph.edge_range(v)
    }

    pub fn arc_target(&self, arc: usize) -> usize {
        self.graph.targets()[arc] as usize
    }

    pub fn arc_edge(&self, arc: usize) -> usize {
        self.arc_edge[arc] as usize
    }

    /// Index into `M.row(s)` of the chain transition used by `arc`.
    pub fn arc_entry(&self, arc: usize) -> usize {
        self.arc_entry[arc] as usize
    }

    pub fn initial_nodes(&self) -> &[u32] {
        &self.initial
    }

    pub fn node_name(&self, v: usize) -> String {
        let (q, s) = self.split(v);
        format!("({},{})", self.state_names[q], self.chain_names[s])
    }

    pub fn automaton_state_name(&self, q: usize) -> &str {
        &self.state_names[q]
    }

    pub fn chain_state_name(&self, s: usize) -> &str {
        &self.chain_names[s]
    }

    /// Finds a node by automaton and chain state names.
    pub fn find_node(&self, q: &str, s: &str) -> Option<usize> {
        let q = self.state_names.iter().position(|n| n == q)?;
        let s = self.chain_names.iter().position(|n| n == s)?;
        Some(self.node(q, s))
    }
}

/// SCCs of the product in topological order with their condensation.
#[derive(Debug, Clone)]
pub struct SccPartition {
    pub sccs: Sccs,
    /// Arcs between distinct SCCs, possibly repeated.
    pub condensation: Csr,
    /// Union of acceptance marks over arcs internal to each SCC.
    pub internal_acc: Vec<u64>,
    pub nontrivial: Vec<bool>,
    pub bottom: Vec<bool>,
    /// Sorted chain states occurring in each SCC.
    pub projections: Vec<Vec<u32>>,
}

impl SccPartition {
    pub fn len(&self) -> usize {
        self.sccs.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sccs.components.is_empty()
    }

    pub fn members(&self, c: usize) -> &[u32] {
        &self.sccs.components[c]
    }

    pub fn component_of(&self, v: usize) -> usize {
        self.sccs.component_of[v] as usize
    }

    /// `c1 ⪯ c2`: some member of `c2` is reachable from `c1`.
    pub fn precedes(&self, c1: usize, c2: usize) -> bool {
        c1 == c2 || self.condensation.reachable_from([c1])[c2]
    }
}

pub fn scc_decompose(g: &ProductGraph, a: &Gba) -> SccPartition {
    let sccs = tarjan(&g.graph);
    let n = sccs.components.len();
    let mut internal_acc = vec![0u64; n];
    let mut nontrivial = vec![false; n];
    let mut bottom = vec![true; n];
    let mut cond_edges = Vec::new();
    for v in 0..g.num_nodes() {
        let c = sccs.component_of[v];
        for arc in g.arc_range(v) {
            let w = g.arc_target(arc);
            let d = sccs.component_of[w];
            if d == c {
                nontrivial[c as usize] = true;
                internal_acc[c as usize] |= a.edge_acceptance(g.arc_edge(arc));
            } else {
                bottom[c as usize] = false;
                cond_edges.push((c, d));
            }
        }
    }
    let projections = sccs
        .components
        .iter()
        .map(|members| {
            let mut p: Vec<u32> = members.iter().map(|&v| g.chain_state(v as usize) as u32).collect();
            p.sort_unstable();
            p.dedup();
            p
        })
        .collect();
    SccPartition {
        condensation: Csr::from_edges(n, &cond_edges),
        sccs,
        internal_acc,
        nontrivial,
        bottom,
        projections,
    }
}

/// Which SCCs are classified.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scope {
    /// SCCs reachable from an initial product node.
    #[default]
    Reachable,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompletenessMethod {
    ReverseDeterministic,
    Oracle,
}

impl fmt::Display for CompletenessMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CompletenessMethod::ReverseDeterministic => write!(f, "reverse-deterministic"),
            CompletenessMethod::Oracle => write!(f, "oracle"),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ClassifyOptions {
    pub scope: Scope,
    pub oracle_budget: usize,
    /// Decide completeness with the oracle even when the shortcut applies.
    pub force_oracle: bool,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            scope: Scope::Reachable,
            oracle_budget: DEFAULT_ORACLE_BUDGET,
            force_oracle: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SccRecord {
    pub id: usize,
    pub members: Vec<u32>,
    pub projection: Vec<u32>,
    pub trivial: bool,
    pub in_scope: bool,
    pub accepting: bool,
    /// `None` when the oracle ran out of budget on an SCC that cannot be
    /// locally positive anyway.
    pub complete: Option<bool>,
    pub bottom_in_g: bool,
    pub projection_is_bscc: bool,
    pub locally_positive: bool,
}

#[derive(Debug, Clone)]
pub struct Classification {
    pub partition: SccPartition,
    pub records: Vec<SccRecord>,
    /// Ids of the locally positive SCCs in scope.
    pub pos: Vec<usize>,
    /// Ids of the bottom SCCs in scope that are not locally positive.
    pub neg: Vec<usize>,
    pub method: CompletenessMethod,
    /// Per node: reachable from an initial node (or everything, for `Scope::All`).
    pub in_scope: Vec<bool>,
}

impl Classification {
    pub fn nontrivial_count(&self) -> usize {
        self.records.iter().filter(|r| r.in_scope && !r.trivial).count()
    }

    pub fn pos_count(&self) -> usize {
        self.pos.len()
    }

    /// Whether the acceptance probability is nonzero.
    pub fn qualitative_nonzero(&self) -> bool {
        !self.pos.is_empty()
    }
}

/// Bottom-SCC membership of chain states: `Some(c)` if `s` lies in bottom SCC `c`.
fn chain_bsccs(m: &Pmc) -> (Vec<Option<usize>>, Vec<usize>) {
    let g = m.underlying_graph();
    let sccs = tarjan(&g);
    let n = sccs.components.len();
    let mut bottom = vec![true; n];
    for v in 0..g.num_nodes() {
        for &w in g.successors(v) {
            if sccs.component_of[v] != sccs.component_of[w as usize] {
                bottom[sccs.component_of[v] as usize] = false;
            }
        }
    }
    let which = (0..g.num_nodes())
        .map(|s| {
            let c = sccs.component_of[s] as usize;
            bottom[c].then_some(c)
        })
        .collect();
    let sizes = sccs.components.iter().map(Vec::len).collect();
    (which, sizes)
}

/// Classifies every SCC in scope; completeness uses the reverse-determinism
/// criterion when the automaton allows it and the oracle otherwise.
pub fn classify(
    g: &ProductGraph,
    a: &Gba,
    m: &Pmc,
    opts: ClassifyOptions,
) -> Result<Classification, ProductError> {
    let partition = scc_decompose(g, a);
    let in_scope = match opts.scope {
        Scope::Reachable => g.graph.reachable_from(g.initial.iter().map(|&v| v as usize)),
        Scope::All => vec![true; g.num_nodes()],
    };
    let (bscc_of, bscc_size) = chain_bsccs(m);
    let full = a.full_acceptance_mask();

    let mut records: Vec<SccRecord> = (0..partition.len())
        .map(|c| {
            let members = partition.members(c).to_vec();
            let projection = partition.projections[c].clone();
            let trivial = !partition.nontrivial[c];
            let accepting = !trivial && partition.internal_acc[c] & full == full;
            let projection_is_bscc = match bscc_of[projection[0] as usize] {
                Some(k) => {
                    projection.iter().all(|&s| bscc_of[s as usize] == Some(k))
                        && projection.len() == bscc_size[k]
                }
                None => false,
            };
            SccRecord {
                id: c,
                in_scope: in_scope[members[0] as usize],
                members,
                projection,
                trivial,
                accepting,
                complete: if trivial { Some(false) } else { None },
                bottom_in_g: partition.bottom[c],
                projection_is_bscc,
                locally_positive: false,
            }
        })
        .collect();

    let rd_ok = !opts.force_oracle && a.check_reverse_deterministic().exactly_one;
    let method = if rd_ok {
        let complete = is_complete_rd(&partition, a)?;
        for r in records.iter_mut().filter(|r| !r.trivial) {
            r.complete = Some(complete[r.id]);
        }
        CompletenessMethod::ReverseDeterministic
    } else {
        for r in records.iter_mut().filter(|r| !r.trivial && r.in_scope) {
            let candidate = r.accepting && r.projection_is_bscc;
            match is_complete_oracle(g, &partition, r.id, m, opts.oracle_budget) {
                Ok(v) => r.complete = Some(v.complete),
                Err(e) if candidate => return Err(e),
                Err(_) => r.complete = None,
            }
        }
        CompletenessMethod::Oracle
    };

    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for r in records.iter_mut().filter(|r| r.in_scope) {
        r.locally_positive = r.accepting && r.complete == Some(true) && r.projection_is_bscc;
        if r.locally_positive {
            pos.push(r.id);
        } else if r.bottom_in_g {
            neg.push(r.id);
        }
    }
    Ok(Classification {
        partition,
        records,
        pos,
        neg,
        method,
        in_scope,
    })
}

/// Counts reported by the `classify` command.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProductStats {
    pub chain_states: usize,
    pub nodes: usize,
    pub arcs: usize,
    pub nontrivial_sccs: usize,
    pub positive_sccs: usize,
}

impl ProductStats {
    pub fn of(g: &ProductGraph, c: &Classification) -> Self {
        ProductStats {
            chain_states: g.num_chain_states(),
            nodes: g.num_nodes(),
            arcs: g.num_arcs(),
            nontrivial_sccs: c.nontrivial_count(),
            positive_sccs: c.pos_count(),
        }
    }
}

/// Groups SCC ids by projection; used by the completeness criterion.
pub(crate) fn group_by_projection(part: &SccPartition) -> HashMap<&[u32], Vec<usize>> {
    let mut groups: HashMap<&[u32], Vec<usize>> = HashMap::new();
    for c in 0..part.len() {
        if part.nontrivial[c] {
            groups.entry(part.projections[c].as_slice()).or_default().push(c);
        }
    }
    groups
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gba::{parse_gba, translate};
    use crate::ltl::parse_formula;
    use crate::pmc::parse_model;

    fn load(model: &str, automaton: &str) -> (Gba, Pmc) {
        (
            parse_gba(automaton).unwrap(),
            parse_model(model).unwrap().into_pmc().unwrap(),
        )
    }

    fn fig2() -> (Gba, Pmc) {
        load(
            include_str!("../../../../models/fig2.pmc"),
            include_str!("../../../../models/fig1.gba"),
        )
    }

    fn fig4() -> (Gba, Pmc) {
        load(
            include_str!("../../../../models/fig4.pmc"),
            include_str!("../../../../models/fig3.gba"),
        )
    }

    fn names(g: &ProductGraph, nodes: &[u32]) -> Vec<String> {
        let mut v: Vec<String> = nodes.iter().map(|&n| g.node_name(n as usize)).collect();
        v.sort();
        v
    }

    #[test]
    fn fig2_non_isolated_nodes() {
        let (a, m) = fig2();
        let g = build_product(&a, &m).unwrap();
        let mut touched = vec![false; g.num_nodes()];
        for v in 0..g.num_nodes() {
            for &w in g.successors(v) {
                touched[v] = true;
                touched[w as usize] = true;
            }
        }
        let nodes: Vec<u32> = (0..g.num_nodes() as u32).filter(|&v| touched[v as usize]).collect();
        assert_eq!(
            names(&g, &nodes),
            vec!["(q1,w)", "(q1,x)", "(q1,y)", "(q1,z)", "(q2,x)", "(q2,y)", "(q2,z)", "(q3,x)", "(q3,y)"]
        );
    }

    #[test]
    fn fig2_sccs() {
        let (a, m) = fig2();
        let g = build_product(&a, &m).unwrap();
        let c = classify(&g, &a, &m, ClassifyOptions::default()).unwrap();
        assert_eq!(c.method, CompletenessMethod::Oracle);
        let nontrivial: Vec<Vec<String>> = c
            .records
            .iter()
            .filter(|r| !r.trivial)
            .map(|r| names(&g, &r.members))
            .collect();
        assert_eq!(
            nontrivial,
            vec![vec!["(q1,x)", "(q2,y)", "(q3,y)"], vec!["(q1,w)", "(q2,z)"]]
        );
        let c1 = c.records.iter().find(|r| !r.trivial && r.members.len() == 3).unwrap();
        let c2 = c.records.iter().find(|r| !r.trivial && r.members.len() == 2).unwrap();
        assert!(c1.accepting && !c2.accepting);
        assert!(!c1.projection_is_bscc && c2.projection_is_bscc);
        assert_eq!(c.pos_count(), 0);
        assert!(!c.qualitative_nonzero());
        // dead end (q1,z) is a bottom SCC
        let dead = g.find_node("q1", "z").unwrap();
        assert!(c.neg.contains(&c.partition.component_of(dead)));
    }

    #[test]
    fn fig2_refuses_rd_shortcut() {
        let (a, m) = fig2();
        let g = build_product(&a, &m).unwrap();
        let p = scc_decompose(&g, &a);
        assert_eq!(is_complete_rd(&p, &a), Err(ProductError::NotReverseDeterministic));
    }

    #[test]
    fn fig4_single_positive_scc() {
        let (a, m) = fig4();
        let g = build_product(&a, &m).unwrap();
        assert_eq!(g.num_nodes(), 20);
        let c = classify(&g, &a, &m, ClassifyOptions::default()).unwrap();
        assert_eq!(c.nontrivial_count(), 1);
        assert_eq!(c.pos.len(), 1);
        let pos = &c.records[c.pos[0]];
        assert_eq!(
            names(&g, &pos.members),
            vec!["(q1,x)", "(q2,x)", "(q3,y)", "(q4,z)", "(q5,w)"]
        );
        for (q, s) in [("q3", "z"), ("q4", "y")] {
            let v = g.find_node(q, s).unwrap();
            assert!(c.neg.contains(&c.partition.component_of(v)), "({q},{s})");
        }
        assert!(c.qualitative_nonzero());
    }

    #[test]
    fn fig4_cycles_present() {
        let (a, m) = fig4();
        let g = build_product(&a, &m).unwrap();
        let arc = |from: (&str, &str), to: (&str, &str)| {
            let v = g.find_node(from.0, from.1).unwrap();
            let w = g.find_node(to.0, to.1).unwrap() as u32;
            g.successors(v).contains(&w)
        };
        assert!(arc(("q1", "x"), ("q3", "y")));
        assert!(arc(("q3", "y"), ("q5", "w")));
        assert!(arc(("q5", "w"), ("q1", "x")));
        assert!(arc(("q2", "x"), ("q4", "z")));
        assert!(arc(("q4", "z"), ("q5", "w")));
        assert!(arc(("q5", "w"), ("q2", "x")));
    }

    #[test]
    fn eventually_on_single_state() {
        let f = parse_formula("F a").unwrap();
        let a = translate(&f, &["a".to_string()].into_iter().collect()).unwrap();
        let m = parse_model("pmc\nstate s { a };\ninit s;\ntrans s -> s : 1;")
            .unwrap()
            .into_pmc()
            .unwrap();
        let g = build_product(&a, &m).unwrap();
        assert_eq!(g.num_nodes(), 3);
        for v in 0..g.num_nodes() {
            let (q, _) = g.split(v);
            assert_eq!(g.successors(v).is_empty(), a.successors(q, 1).next().is_none());
        }
        let c = classify(&g, &a, &m, ClassifyOptions::default()).unwrap();
        assert_eq!(c.method, CompletenessMethod::ReverseDeterministic);
        assert_eq!(c.pos_count(), 1);
    }

    #[test]
    fn unsatisfiable_formula_has_no_positive_scc() {
        let f = parse_formula("a & !a").unwrap();
        let a = translate(&f, &["a".to_string()].into_iter().collect()).unwrap();
        let m = parse_model("pmc\nstate s { a };\ninit s;\ntrans s -> s : 1;")
            .unwrap()
            .into_pmc()
            .unwrap();
        let g = build_product(&a, &m).unwrap();
        let c = classify(&g, &a, &m, ClassifyOptions::default()).unwrap();
        assert_eq!(c.pos_count(), 0);
        assert!(!c.neg.is_empty());
    }

    #[test]
    fn capacity_error() {
        let (a, m) = fig4();
        assert_eq!(
            build_product_with(&a, &m, 10).unwrap_err(),
            ProductError::Capacity { nodes: 20, cap: 10 }
        );
    }
}
