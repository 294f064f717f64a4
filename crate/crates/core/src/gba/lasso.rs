use crate::graph::{tarjan, Csr};
use crate::ltl::LassoWord;

use super::Gba;

/// For each state `q`, whether `A^q` accepts `w`.
///
/// Works on the finite product of the lasso positions with the automaton
/// states: a run is accepting iff it reaches a non-trivial SCC whose internal
/// arcs cover every acceptance set.
pub fn accepting_states(a: &Gba, w: &LassoWord) -> Vec<bool> {
    let nq = a.num_states();
    let n = w.len();
    let letters: Vec<u32> = (0..n).map(|i| a.project(w.letter(i).props())).collect();

    let mut offsets = Vec::with_capacity(n * nq + 1);
    let mut targets = Vec::new();
    let mut arc_acc = Vec::new();
    offsets.push(0);
    for i in 0..n {
        let next = w.successor(i);
        for q in 0..nq {
            for e in a.successor_edges(q, letters[i]) {
                targets.push((next * nq + a.edges()[e].target as usize) as u32);
                arc_acc.push(a.edge_acceptance(e));
            }
            offsets.push(targets.len());
        }
    }
    let g = Csr::from_parts(offsets, targets);
    let sccs = tarjan(&g);

    let full = a.full_acceptance_mask();
    let mut covered = vec![0u64; sccs.components.len()];
    let mut nontrivial = vec![false; sccs.components.len()];
    for v in 0..g.num_nodes() {
        let c = sccs.component_of[v];
        for e in g.edge_range(v) {
            let t = g.targets()[e] as usize;
            if sccs.component_of[t] == c {
                nontrivial[c as usize] = true;
                covered[c as usize] |= arc_acc[e];
            }
        }
    }
    let good: Vec<usize> = sccs
        .components
        .iter()
        .enumerate()
        .filter(|(c, _)| nontrivial[*c] && covered[*c] & full == full)
        .flat_map(|(_, members)| members.iter().map(|&v| v as usize))
        .collect();
    let reaches = g.reversed().reachable_from(good);
    (0..nq).map(|q| reaches[q]).collect()
}

/// Whether some run of `A` from an initial state accepts `w`.
pub fn accepts_lasso(a: &Gba, w: &LassoWord) -> bool {
    let acc = accepting_states(a, w);
    a.initial().iter().any(|&q| acc[q as usize])
}
