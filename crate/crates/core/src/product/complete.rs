use std::collections::{HashMap, VecDeque};

use crate::gba::Gba;
use crate::pmc::Pmc;

use super::{group_by_projection, ProductError, ProductGraph, SccPartition};

/// Completeness of every SCC by the reverse-determinism criterion: a
/// non-trivial SCC is complete iff no other non-trivial SCC with the same
/// projection precedes it. Trivial SCCs are reported incomplete.
pub fn is_complete_rd(part: &SccPartition, a: &Gba) -> Result<Vec<bool>, ProductError> {
    if !a.check_reverse_deterministic().exactly_one {
        return Err(ProductError::NotReverseDeterministic);
    }
    let mut complete = part.nontrivial.clone();
    let mut stamp = vec![0u32; part.len()];
    let mut epoch = 0u32;
    let mut stack = Vec::new();
    for group in group_by_projection(part).values().filter(|grp| grp.len() > 1) {
        epoch += 1;
        for &c in group {
            for &d in part.condensation.successors(c) {
                if stamp[d as usize] != epoch {
                    stamp[d as usize] = epoch;
                    stack.push(d as usize);
                }
            }
        }
        while let Some(c) = stack.pop() {
            for &d in part.condensation.successors(c) {
                if stamp[d as usize] != epoch {
                    stamp[d as usize] = epoch;
                    stack.push(d as usize);
                }
            }
        }
        for &c in group {
            if stamp[c] == epoch {
                complete[c] = false;
            }
        }
    }
    Ok(complete)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleVerdict {
    pub complete: bool,
    /// A path of the projection (chain state indices) that no path inside
    /// the SCC projects onto.
    pub witness: Option<Vec<usize>>,
    /// Number of distinct subsets explored.
    pub explored: usize,
}

/// Decides completeness of SCC `c` from the definition.
///
/// For each path `s0 … sk` of the projection `K`, tracks the set of nodes of
/// `C` at which some path of `C` projecting onto it can end. The SCC is
/// incomplete iff some path drives that set empty. Exponential in the worst
/// case; `budget` bounds the number of sets explored.
pub fn is_complete_oracle(
    g: &ProductGraph,
    part: &SccPartition,
    c: usize,
    m: &Pmc,
    budget: usize,
) -> Result<OracleVerdict, ProductError> {
    let members = part.members(c);
    let k = &part.projections[c];
    let in_k = |s: usize| k.binary_search(&(s as u32)).is_ok();

    // (last chain state, sorted node set) -> index in `states`
    let mut index: HashMap<(u32, Vec<u32>), usize> = HashMap::new();
    let mut states: Vec<(u32, Vec<u32>)> = Vec::new();
    let mut parent: Vec<Option<usize>> = Vec::new();
    let mut queue = VecDeque::new();

    for &s in k {
        let set: Vec<u32> = members
            .iter()
            .copied()
            .filter(|&v| g.chain_state(v as usize) == s as usize)
            .collect();
        let key = (s, set);
        index.insert(key.clone(), states.len());
        queue.push_back(states.len());
        states.push(key);
        parent.push(None);
    }

    let path_to = |mut i: usize, states: &[(u32, Vec<u32>)], parent: &[Option<usize>]| {
        let mut path = vec![states[i].0 as usize];
        while let Some(p) = parent[i] {
            path.push(states[p].0 as usize);
            i = p;
        }
        path.reverse();
        path
    };

    while let Some(i) = queue.pop_front() {
        let (s, set) = states[i].clone();
        for &(t, _) in m.row(s as usize) {
            if !in_k(t) {
                continue;
            }
            let mut next: Vec<u32> = Vec::new();
            for &v in &set {
                for &w in g.successors(v as usize) {
                    if g.chain_state(w as usize) == t && part.component_of(w as usize) == c {
                        next.push(w);
                    }
                }
            }
            next.sort_unstable();
            next.dedup();
            if next.is_empty() {
                let mut witness = path_to(i, &states, &parent);
                witness.push(t);
                return Ok(OracleVerdict {
                    complete: false,
                    witness: Some(witness),
                    explored: states.len(),
                });
            }
            let key = (t as u32, next);
            if !index.contains_key(&key) {
                if states.len() >= budget {
                    return Err(ProductError::OracleBudget { scc: c, budget });
                }
                index.insert(key.clone(), states.len());
                queue.push_back(states.len());
                states.push(key);
                parent.push(Some(i));
            }
        }
    }
    Ok(OracleVerdict {
        complete: true,
        witness: None,
        explored: states.len(),
    })
}
