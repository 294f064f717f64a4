use std::collections::HashMap;

use crate::ltl::{atomic_props, subformulas, Formula, Letter};

use super::GbaError;

/// A subset `V ⊆ el(φ)`, as a bitmask over the ordered elementary list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct ElementarySet(pub u64);

impl ElementarySet {
    pub fn contains(self, i: usize) -> bool {
        self.0 >> i & 1 == 1
    }

    pub fn with(self, i: usize) -> Self {
        ElementarySet(self.0 | 1 << i)
    }

    pub fn members(self, width: usize) -> impl Iterator<Item = usize> {
        (0..width).filter(move |&i| self.contains(i))
    }
}

#[derive(Debug, Clone, Copy)]
enum Node {
    True,
    Atom(usize),
    Not(usize),
    And(usize, usize),
    /// Index into the elementary list.
    Next(usize),
    /// Operands and the elementary index of `X(l U r)`.
    Until(usize, usize, usize),
}

/// `el(φ)` in bottom-up subformula order: an `X ψ` subformula contributes
/// itself, a `ψ1 U ψ2` subformula contributes `X(ψ1 U ψ2)`.
pub fn elementary(phi: &Formula) -> Vec<Formula> {
    let mut out: Vec<Formula> = Vec::new();
    for f in subformulas(phi) {
        let x = match &f {
            Formula::Next(_) => f.clone(),
            Formula::Until(..) => Formula::next(f.clone()),
            _ => continue,
        };
        if !out.contains(&x) {
            out.push(x);
        }
    }
    out
}

/// The formula compiled for repeated evaluation of `(V, a) ⊩ ψ` over all
/// subformulas at once.
#[derive(Debug, Clone)]
pub struct Tableau {
    root: Formula,
    subs: Vec<Formula>,
    sub_index: HashMap<Formula, usize>,
    nodes: Vec<Node>,
    elementary: Vec<Formula>,
    /// For each elementary `X ψ`, the subformula index of `ψ`.
    el_arg: Vec<usize>,
    /// Subformula indices of the until-subformulas, bottom-up.
    untils: Vec<usize>,
    aps: Vec<String>,
}

impl Tableau {
    pub fn new(phi: &Formula) -> Self {
        let subs = subformulas(phi);
        let sub_index: HashMap<Formula, usize> =
            subs.iter().cloned().enumerate().map(|(i, f)| (f, i)).collect();
        let elementary = elementary(phi);
        let el_index: HashMap<&Formula, usize> =
            elementary.iter().enumerate().map(|(i, f)| (f, i)).collect();
        let aps: Vec<String> = atomic_props(phi).into_iter().collect();

        let el_arg = elementary
            .iter()
            .map(|x| match x {
                Formula::Next(g) => sub_index[&**g],
                _ => unreachable!("elementary formulas are X-rooted"),
            })
            .collect();

        let mut untils = Vec::new();
        let nodes = subs
            .iter()
            .enumerate()
            .map(|(i, f)| match f {
                Formula::True => Node::True,
                Formula::Atom(a) => Node::Atom(aps.binary_search(a).expect("atom collected")),
                Formula::Not(g) => Node::Not(sub_index[&**g]),
                Formula::And(l, r) => Node::And(sub_index[&**l], sub_index[&**r]),
                Formula::Next(_) => Node::Next(el_index[f]),
                Formula::Until(l, r) => {
                    untils.push(i);
                    let x = Formula::next(f.clone());
                    Node::Until(sub_index[&**l], sub_index[&**r], el_index[&x])
                }
            })
            .collect();

        Tableau {
            root: phi.clone(),
            subs,
            sub_index,
            nodes,
            elementary,
            el_arg,
            untils,
            aps,
        }
    }

    pub fn root(&self) -> &Formula {
        &self.root
    }

    pub fn elementary(&self) -> &[Formula] {
        &self.elementary
    }

    pub fn subformulas(&self) -> &[Formula] {
        &self.subs
    }

    /// Atomic propositions of the root, sorted; letters are masks over this list.
    pub fn aps(&self) -> &[String] {
        &self.aps
    }

    pub fn untils(&self) -> &[usize] {
        &self.untils
    }

    pub(crate) fn until_operands(&self, sub: usize) -> (usize, usize) {
        match self.nodes[sub] {
            Node::Until(l, r, _) => (l, r),
            _ => panic!("subformula {sub} is not an until"),
        }
    }

    pub fn letter_mask(&self, a: &Letter) -> u32 {
        self.aps
            .iter()
            .enumerate()
            .filter(|(_, p)| a.contains(p))
            .fold(0, |m, (i, _)| m | 1 << i)
    }

    /// Evaluates `(V, a) ⊩ ψ` for every subformula `ψ`, indexed like
    /// [`Tableau::subformulas`].
    pub fn eval_all(&self, v: ElementarySet, letter: u32) -> Vec<bool> {
        let mut out = vec![false; self.nodes.len()];
        for (i, node) in self.nodes.iter().enumerate() {
            out[i] = match *node {
                Node::True => true,
                Node::Atom(p) => letter >> p & 1 == 1,
                Node::Not(g) => !out[g],
                Node::And(l, r) => out[l] && out[r],
                Node::Next(e) => v.contains(e),
                Node::Until(l, r, e) => out[r] || (out[l] && v.contains(e)),
            };
        }
        out
    }

    /// `(V, a) ⊩ ψ` for a single subformula `ψ` of the root.
    pub fn sat(&self, v: ElementarySet, a: &Letter, psi: &Formula) -> Result<bool, GbaError> {
        let idx = *self
            .sub_index
            .get(psi)
            .ok_or_else(|| GbaError::NotSubformula(psi.to_string()))?;
        Ok(self.eval_all(v, self.letter_mask(a))[idx])
    }

    /// The unique `a`-predecessor of `U` among subset states:
    /// `{X ψ ∈ el(φ) : (U, a) ⊩ ψ}`.
    pub fn predecessor(&self, sat: &[bool]) -> ElementarySet {
        self.el_arg
            .iter()
            .enumerate()
            .filter(|(_, &arg)| sat[arg])
            .fold(ElementarySet(0), |m, (e, _)| m.with(e))
    }

    /// Subformula index of the root formula.
    pub fn root_index(&self) -> usize {
        self.subs.len() - 1
    }
}
