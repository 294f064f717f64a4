//! Closed-form probabilities of simple properties on concrete chains.
//!
//! Everything here works on the chain alone, with its own dense solver and
//! its own bottom-SCC detection, so that it can serve as an independent check
//! of the automaton-based pipeline.

use std::collections::{BTreeSet, VecDeque};

use num_traits::{One, Zero};

use crate::ltl::{atomic_props, Formula};
use crate::pmc::{Evaluation, Pmc, PmcError, Rational};

/// A Markov chain with constant rational rows.
#[derive(Debug, Clone)]
pub struct ConcreteMc {
    rows: Vec<Vec<(usize, Rational)>>,
    labels: Vec<BTreeSet<String>>,
    initial: usize,
}

impl ConcreteMc {
    /// The chain induced by `v`; `v` must assign every parameter.
    pub fn new(m: &Pmc, v: &Evaluation) -> Result<Self, PmcError> {
        Ok(ConcreteMc {
            rows: m.concrete_rows(v)?,
            labels: (0..m.num_states()).map(|s| m.label(s).clone()).collect(),
            initial: m.initial(),
        })
    }

    pub fn num_states(&self) -> usize {
        self.rows.len()
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    fn labelled(&self, p: &str) -> Vec<bool> {
        self.labels.iter().map(|l| l.contains(p)).collect()
    }

    fn reach_sets(&self) -> Vec<Vec<bool>> {
        (0..self.num_states())
            .map(|s| self.closure(&[s], &vec![true; self.num_states()]))
            .collect()
    }

    /// States reachable from `from` moving only through `allowed` states
    /// (the start states themselves are always included).
    fn closure(&self, from: &[usize], allowed: &[bool]) -> Vec<bool> {
        let mut seen = vec![false; self.num_states()];
        let mut queue: VecDeque<usize> = from.iter().copied().collect();
        for &s in from {
            seen[s] = true;
        }
        while let Some(s) = queue.pop_front() {
            if !allowed[s] {
                continue;
            }
            for (t, _) in &self.rows[s] {
                if !seen[*t] {
                    seen[*t] = true;
                    queue.push_back(*t);
                }
            }
        }
        seen
    }

    /// Bottom SCCs, each as a sorted list of states.
    pub fn bottom_sccs(&self) -> Vec<Vec<usize>> {
        let reach = self.reach_sets();
        let n = self.num_states();
        let mut assigned = vec![false; n];
        let mut out = Vec::new();
        for s in 0..n {
            if assigned[s] {
                continue;
            }
            // s is in a bottom SCC iff everything it reaches reaches it back
            let bottom = (0..n).all(|t| !reach[s][t] || reach[t][s]);
            if bottom {
                let scc: Vec<usize> = (0..n).filter(|&t| reach[s][t]).collect();
                for &t in &scc {
                    assigned[t] = true;
                }
                out.push(scc);
            }
        }
        out
    }
}

/// Solves `A x = b` by dense Gaussian elimination. `A` must be nonsingular.
fn dense_solve(mut a: Vec<Vec<Rational>>, mut b: Vec<Rational>) -> Vec<Rational> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero()).expect("nonsingular system");
        a.swap(col, pivot);
        b.swap(col, pivot);
        let inv = a[col][col].recip();
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = &a[r][col] * &inv;
            for c in col..n {
                let d = &f * &a[col][c];
                a[r][c] -= d;
            }
            let d = &f * &b[col];
            b[r] -= d;
        }
    }
    (0..n).map(|i| &b[i] / &a[i][i]).collect()
}

/// Probability of reaching a `target` state while only passing through
/// `allowed` states, for every start state.
fn constrained_reach(mc: &ConcreteMc, allowed: &[bool], target: &[bool]) -> Vec<Rational> {
    let n = mc.num_states();
    // states that can reach the target through allowed states
    let mut can = target.to_vec();
    let mut changed = true;
    while changed {
        changed = false;
        for s in 0..n {
            if !can[s] && allowed[s] && mc.rows[s].iter().any(|(t, _)| can[*t]) {
                can[s] = true;
                changed = true;
            }
        }
    }
    let unknown: Vec<usize> = (0..n).filter(|&s| can[s] && !target[s]).collect();
    let mut pos = vec![usize::MAX; n];
    for (i, &s) in unknown.iter().enumerate() {
        pos[s] = i;
    }
    let k = unknown.len();
    let mut a = vec![vec![Rational::zero(); k]; k];
    let mut b = vec![Rational::zero(); k];
    for (i, &s) in unknown.iter().enumerate() {
        a[i][i] += Rational::one();
        for (t, p) in &mc.rows[s] {
            if target[*t] {
                b[i] += p;
            } else if can[*t] {
                a[i][pos[*t]] -= p;
            }
        }
    }
    let x = dense_solve(a, b);
    (0..n)
        .map(|s| {
            if target[s] {
                Rational::one()
            } else if can[s] {
                x[pos[s]].clone()
            } else {
                Rational::zero()
            }
        })
        .collect()
}

/// `x_s = P(reach target from s)` for every state.
pub fn reach_prob(mc: &ConcreteMc, target: &[bool]) -> Vec<Rational> {
    constrained_reach(mc, &vec![true; mc.num_states()], target)
}

/// `P(F p)`.
pub fn prob_eventually(mc: &ConcreteMc, p: &str) -> Rational {
    reach_prob(mc, &mc.labelled(p))[mc.initial].clone()
}

/// `P(G p)`.
pub fn prob_always(mc: &ConcreteMc, p: &str) -> Rational {
    let not_p: Vec<bool> = mc.labelled(p).iter().map(|b| !b).collect();
    Rational::one() - &reach_prob(mc, &not_p)[mc.initial]
}

fn reach_bsccs(mc: &ConcreteMc, keep: impl Fn(&[usize]) -> bool) -> Rational {
    let mut target = vec![false; mc.num_states()];
    for scc in mc.bottom_sccs() {
        if keep(&scc) {
            for s in scc {
                target[s] = true;
            }
        }
    }
    reach_prob(mc, &target)[mc.initial].clone()
}

/// `P(G F p)`: mass of bottom SCCs containing a `p` state.
pub fn prob_infinitely_often(mc: &ConcreteMc, p: &str) -> Rational {
    let l = mc.labelled(p);
    reach_bsccs(mc, |scc| scc.iter().any(|&s| l[s]))
}

/// `P(F G p)`: mass of bottom SCCs made only of `p` states.
pub fn prob_eventually_always(mc: &ConcreteMc, p: &str) -> Rational {
    let l = mc.labelled(p);
    reach_bsccs(mc, |scc| scc.iter().all(|&s| l[s]))
}

/// `P(a U b)`.
pub fn prob_until(mc: &ConcreteMc, a: &str, b: &str) -> Rational {
    let allowed: Vec<bool> = mc.labelled(a);
    constrained_reach(mc, &allowed, &mc.labelled(b))[mc.initial].clone()
}

/// `P(X p)`.
pub fn prob_next(mc: &ConcreteMc, p: &str) -> Rational {
    let l = mc.labelled(p);
    mc.rows[mc.initial]
        .iter()
        .filter(|(t, _)| l[*t])
        .map(|(_, q)| q)
        .sum()
}

/// The probability of `phi` if it is one of `F p`, `G p`, `G F p`, `F G p`,
/// `p U r`, `X p` or `p` over atoms.
pub fn closed_form(mc: &ConcreteMc, phi: &Formula) -> Option<Rational> {
    let props: Vec<String> = atomic_props(phi).into_iter().collect();
    if let Formula::Until(l, r) = phi {
        if let (Formula::Atom(a), Formula::Atom(b)) = (&**l, &**r) {
            return Some(prob_until(mc, a, b));
        }
    }
    let [p] = props.as_slice() else { return None };
    let atom = Formula::atom(p.as_str());
    if *phi == atom {
        return Some(if mc.labels[mc.initial].contains(p) {
            Rational::one()
        } else {
            Rational::zero()
        });
    }
    let shapes: [(Formula, fn(&ConcreteMc, &str) -> Rational); 5] = [
        (Formula::eventually(atom.clone()), prob_eventually),
        (Formula::always(atom.clone()), prob_always),
        (Formula::always(Formula::eventually(atom.clone())), prob_infinitely_often),
        (Formula::eventually(Formula::always(atom.clone())), prob_eventually_always),
        (Formula::next(atom.clone()), prob_next),
    ];
    shapes.iter().find(|(f, _)| f == phi).map(|(_, prob)| prob(mc, p))
}
