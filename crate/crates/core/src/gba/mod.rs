//! Transition-based generalized Büchi automata and the tableau translation
//! from LTL.
//!
//! Letters are bitmasks over the automaton's sorted atomic propositions.
//! Labels carrying propositions outside that list are projected onto it
//! before any transition lookup.

mod dump;
mod lasso;
mod tableau;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::ltl::{atomic_props, Formula};

pub use dump::parse_gba;
pub use lasso::{accepting_states, accepts_lasso};
pub use tableau::{elementary, ElementarySet, Tableau};

/// Default cap on `|el(φ)|` for [`translate`].
pub const DEFAULT_MAX_ELEMENTARY: usize = 20;
/// Largest number of atomic propositions an automaton may read.
pub const MAX_APS: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GbaError {
    #[error("|el(φ)| = {size} exceeds the configured cap of {cap}")]
    Capacity { size: usize, cap: usize },
    #[error("{count} atomic propositions exceed the supported maximum of {max}")]
    TooManyAps { count: usize, max: usize },
    #[error("{0} acceptance sets exceed the supported maximum of 64")]
    TooManyAcceptanceSets(usize),
    #[error("`{0}` is not a subformula of the translated formula")]
    NotSubformula(String),
    #[error("atomic proposition `{0}` is not in the declared universe")]
    UnknownAp(String),
    #[error("unknown automaton state `{0}`")]
    UnknownState(String),
    #[error("duplicate automaton state `{0}`")]
    DuplicateState(String),
    #[error("letter {0} is not in the automaton alphabet")]
    UnknownLetter(String),
    #[error("acceptance set {set} refers to edge {edge}, which does not exist")]
    UnknownEdge { set: usize, edge: usize },
    #[error("automaton has no initial state")]
    NoInitialState,
    #[error("automaton file line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum GbaState {
    /// The non-reenterable initial state `φ` of a translated automaton.
    Initial(Formula),
    /// A subset of `el(φ)`.
    Subset(ElementarySet),
    /// A state of a hand-written automaton.
    Named(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GbaEdge {
    pub source: u32,
    pub letter: u32,
    pub target: u32,
}

/// `A = (Σ, Q, T, Q0, ACC)` with transition-based acceptance.
#[derive(Debug, Clone)]
pub struct Gba {
    aps: Vec<String>,
    alphabet: Vec<u32>,
    /// Position of each letter mask in `alphabet`, or `u32::MAX`.
    letter_slot: Vec<u32>,
    states: Vec<GbaState>,
    initial: Vec<u32>,
    /// Sorted by (source, letter slot, target).
    edges: Vec<GbaEdge>,
    /// `edges[succ[q * |Σ| + slot] .. succ[q * |Σ| + slot + 1]]` leave `q` on that letter.
    succ: Vec<usize>,
    acceptance: Vec<Vec<u32>>,
    /// Bit `i` set iff the edge belongs to `F_i`.
    edge_acc: Vec<u64>,
    tableau: Option<Tableau>,
}

/// Per-letter predecessor counts of the reenterable states.
#[derive(Debug, Clone)]
pub struct RdReport {
    /// `counts[q * |Σ| + slot]`: `slot`-predecessors of `q` among reenterable
    /// states; zero for states that are not reenterable.
    pub counts: Vec<u32>,
    pub reenterable: Vec<bool>,
    pub exactly_one: bool,
    pub at_most_one: bool,
}

impl Gba {
    fn assemble(
        aps: Vec<String>,
        alphabet: Vec<u32>,
        states: Vec<GbaState>,
        initial: Vec<u32>,
        mut edges: Vec<GbaEdge>,
        acceptance: Vec<BTreeSet<GbaEdge>>,
        tableau: Option<Tableau>,
    ) -> Result<Gba, GbaError> {
        if aps.len() > MAX_APS {
            return Err(GbaError::TooManyAps {
                count: aps.len(),
                max: MAX_APS,
            });
        }
        if acceptance.len() > 64 {
            return Err(GbaError::TooManyAcceptanceSets(acceptance.len()));
        }
        if initial.is_empty() {
            return Err(GbaError::NoInitialState);
        }
        let mut letter_slot = vec![u32::MAX; 1usize << aps.len()];
        for (i, &m) in alphabet.iter().enumerate() {
            letter_slot[m as usize] = i as u32;
        }
        for e in &edges {
            if letter_slot[e.letter as usize] == u32::MAX {
                return Err(GbaError::UnknownLetter(mask_to_string(&aps, e.letter)));
            }
        }
        edges.sort_by_key(|e| (e.source, letter_slot[e.letter as usize], e.target));
        edges.dedup();

        let width = alphabet.len();
        let mut succ = vec![0usize; states.len() * width + 1];
        for e in &edges {
            succ[e.source as usize * width + letter_slot[e.letter as usize] as usize + 1] += 1;
        }
        for i in 0..states.len() * width {
            succ[i + 1] += succ[i];
        }

        let index: BTreeMap<GbaEdge, u32> =
            edges.iter().enumerate().map(|(i, e)| (*e, i as u32)).collect();
        let mut edge_acc = vec![0u64; edges.len()];
        let mut acc_ids = Vec::with_capacity(acceptance.len());
        for (set_idx, set) in acceptance.iter().enumerate() {
            let mut ids: Vec<u32> = Vec::with_capacity(set.len());
            for e in set {
                let id = *index.get(e).ok_or(GbaError::UnknownEdge {
                    set: set_idx,
                    edge: usize::MAX,
                })?;
                edge_acc[id as usize] |= 1 << set_idx;
                ids.push(id);
            }
            ids.sort_unstable();
            acc_ids.push(ids);
        }

        let mut initial = initial;
        initial.sort_unstable();
        initial.dedup();
        Ok(Gba {
            aps,
            alphabet,
            letter_slot,
            states,
            initial,
            edges,
            succ,
            acceptance: acc_ids,
            edge_acc,
            tableau,
        })
    }

    pub fn aps(&self) -> &[String] {
        &self.aps
    }

    /// Letter masks of `Σ`.
    pub fn alphabet(&self) -> &[u32] {
        &self.alphabet
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[GbaState] {
        &self.states
    }

    pub fn initial(&self) -> &[u32] {
        &self.initial
    }

    pub fn edges(&self) -> &[GbaEdge] {
        &self.edges
    }

    /// Acceptance sets as sorted edge ids.
    pub fn acceptance(&self) -> &[Vec<u32>] {
        &self.acceptance
    }

    /// Bitmask of the acceptance sets containing edge `id`.
    pub fn edge_acceptance(&self, id: usize) -> u64 {
        self.edge_acc[id]
    }

    /// Bitmask with one bit per acceptance set.
    pub fn full_acceptance_mask(&self) -> u64 {
        if self.acceptance.is_empty() {
            0
        } else {
            u64::MAX >> (64 - self.acceptance.len())
        }
    }

    /// The tableau this automaton was translated from, if any.
    pub fn tableau(&self) -> Option<&Tableau> {
        self.tableau.as_ref()
    }

    /// Projects a set of propositions onto the automaton's letter mask.
    pub fn project<'a>(&self, props: impl IntoIterator<Item = &'a String>) -> u32 {
        let mut m = 0;
        for p in props {
            if let Ok(i) = self.aps.binary_search(p) {
                m |= 1 << i;
            }
        }
        m
    }

    /// Edge ids leaving `q` on letter mask `letter`.
    pub fn successor_edges(&self, q: usize, letter: u32) -> std::ops::Range<usize> {
        let slot = self.letter_slot[letter as usize];
        if slot == u32::MAX {
            return 0..0;
        }
        let i = q * self.alphabet.len() + slot as usize;
        self.succ[i]..self.succ[i + 1]
    }

    pub fn successors(&self, q: usize, letter: u32) -> impl Iterator<Item = usize> + '_ {
        self.edges[self.successor_edges(q, letter)]
            .iter()
            .map(|e| e.target as usize)
    }

    /// `A^U`: the same automaton with `initial` as its initial states.
    pub fn with_initial(&self, initial: &[u32]) -> Gba {
        let mut out = self.clone();
        let mut init = initial.to_vec();
        init.sort_unstable();
        init.dedup();
        out.initial = init;
        out
    }

    /// Index of a subset state of a translated automaton.
    pub fn subset_state(&self, v: ElementarySet) -> Option<usize> {
        self.tableau.as_ref()?;
        Some(1 + v.0 as usize)
    }

    pub fn state_name(&self, q: usize) -> String {
        match &self.states[q] {
            GbaState::Initial(_) => "init".to_string(),
            GbaState::Subset(v) => {
                let el = self.tableau.as_ref().map(|t| t.elementary()).unwrap_or(&[]);
                let members: Vec<String> =
                    v.members(el.len()).map(|i| el[i].to_string()).collect();
                format!("{{{}}}", members.join(", "))
            }
            GbaState::Named(n) => n.clone(),
        }
    }

    pub fn letter_name(&self, letter: u32) -> String {
        mask_to_string(&self.aps, letter)
    }

    /// States with at least one incoming edge.
    pub fn reenterable_states(&self) -> Vec<bool> {
        let mut r = vec![false; self.states.len()];
        for e in &self.edges {
            r[e.target as usize] = true;
        }
        r
    }

    /// Counts, per reenterable state and letter, the predecessors among
    /// reenterable states.
    pub fn check_reverse_deterministic(&self) -> RdReport {
        let reenterable = self.reenterable_states();
        let width = self.alphabet.len();
        let mut counts = vec![0u32; self.states.len() * width];
        for e in &self.edges {
            if reenterable[e.source as usize] && reenterable[e.target as usize] {
                let slot = self.letter_slot[e.letter as usize] as usize;
                counts[e.target as usize * width + slot] += 1;
            }
        }
        let mut exactly_one = true;
        let mut at_most_one = true;
        for (q, _) in reenterable.iter().enumerate().filter(|(_, r)| **r) {
            for &c in &counts[q * width..(q + 1) * width] {
                exactly_one &= c == 1;
                at_most_one &= c <= 1;
            }
        }
        RdReport {
            counts,
            reenterable,
            exactly_one,
            at_most_one,
        }
    }

    /// Renders the automaton in the line-oriented dump format read by
    /// [`parse_gba`]. Ordering is deterministic.
    pub fn dump(&self) -> String {
        dump::write_gba(self)
    }
}

pub(crate) fn mask_to_string(aps: &[String], letter: u32) -> String {
    let props: Vec<&str> = aps
        .iter()
        .enumerate()
        .filter(|(i, _)| letter >> i & 1 == 1)
        .map(|(_, p)| p.as_str())
        .collect();
    format!("{{{}}}", props.join(","))
}

impl fmt::Display for Gba {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.dump())
    }
}

/// Options for [`translate_with`].
#[derive(Debug, Clone, Copy)]
pub struct TranslateOptions {
    pub max_elementary: usize,
}

impl Default for TranslateOptions {
    fn default() -> Self {
        TranslateOptions {
            max_elementary: DEFAULT_MAX_ELEMENTARY,
        }
    }
}

/// Translates `φ` with the default capacity.
pub fn translate(phi: &Formula, ap_universe: &BTreeSet<String>) -> Result<Gba, GbaError> {
    translate_with(phi, ap_universe, TranslateOptions::default())
}

/// The tableau automaton `A_φ`.
///
/// State 0 is the initial state `φ`; state `1 + m` is the subset of `el(φ)`
/// with bitmask `m`. `T(φ, a) = {V : (V,a) ⊩ φ}` and `U ∈ T(V, a)` iff `V` is
/// exactly `{X ψ : (U,a) ⊩ ψ}`. There is one acceptance set per until
/// subformula `ψ1 U ψ2`, holding the edges `(U, a, V)` with `(V,a) ⊩ ψ2` or
/// `(V,a) ⊩ ¬(ψ1 U ψ2)`.
pub fn translate_with(
    phi: &Formula,
    ap_universe: &BTreeSet<String>,
    opts: TranslateOptions,
) -> Result<Gba, GbaError> {
    for p in atomic_props(phi) {
        if !ap_universe.contains(&p) {
            return Err(GbaError::UnknownAp(p));
        }
    }
    let tableau = Tableau::new(phi);
    let width = tableau.elementary().len();
    if width > opts.max_elementary || width > 62 {
        return Err(GbaError::Capacity {
            size: width,
            cap: opts.max_elementary.min(62),
        });
    }
    let aps = tableau.aps().to_vec();
    if aps.len() > MAX_APS {
        return Err(GbaError::TooManyAps {
            count: aps.len(),
            max: MAX_APS,
        });
    }

    let num_subsets = 1u64 << width;
    let mut states = Vec::with_capacity(num_subsets as usize + 1);
    states.push(GbaState::Initial(phi.clone()));
    states.extend((0..num_subsets).map(|m| GbaState::Subset(ElementarySet(m))));

    let alphabet: Vec<u32> = (0..1u32 << aps.len()).collect();
    let root = tableau.root_index();
    let untils: Vec<(usize, usize)> = tableau
        .untils()
        .iter()
        .map(|&u| (u, tableau.until_operands(u).1))
        .collect();

    let mut edges = Vec::new();
    let mut acceptance: Vec<BTreeSet<GbaEdge>> = vec![BTreeSet::new(); untils.len()];
    for &letter in &alphabet {
        for m in 0..num_subsets {
            let target = ElementarySet(m);
            let sat = tableau.eval_all(target, letter);
            let pred = tableau.predecessor(&sat);
            let mut sources = vec![1 + pred.0 as u32];
            if sat[root] {
                sources.push(0);
            }
            for source in sources {
                let e = GbaEdge {
                    source,
                    letter,
                    target: 1 + m as u32,
                };
                for (i, &(u, rhs)) in untils.iter().enumerate() {
                    if sat[rhs] || !sat[u] {
                        acceptance[i].insert(e);
                    }
                }
                edges.push(e);
            }
        }
    }

    Gba::assemble(
        aps,
        alphabet,
        states,
        vec![0],
        edges,
        acceptance,
        Some(tableau),
    )
}

/// Builds hand-written automata by state name.
#[derive(Debug, Default, Clone)]
pub struct GbaBuilder {
    aps: BTreeSet<String>,
    alphabet: Option<Vec<BTreeSet<String>>>,
    states: Vec<String>,
    initial: Vec<String>,
    edges: Vec<(String, BTreeSet<String>, String)>,
    acceptance: Vec<Vec<(String, BTreeSet<String>, String)>>,
}

fn prop_set<S: AsRef<str>>(letter: &[S]) -> BTreeSet<String> {
    letter.iter().map(|s| s.as_ref().to_string()).collect()
}

impl GbaBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Declares atomic propositions in addition to those used on edges.
    pub fn ap(&mut self, name: &str) -> &mut Self {
        self.aps.insert(name.to_string());
        self
    }

    /// Adds a letter to an explicit alphabet. Without any, the alphabet is
    /// the set of letters used on edges.
    pub fn letter<S: AsRef<str>>(&mut self, letter: &[S]) -> &mut Self {
        let l = prop_set(letter);
        self.aps.extend(l.iter().cloned());
        self.alphabet.get_or_insert_with(Vec::new).push(l);
        self
    }

    pub fn state(&mut self, name: &str) -> &mut Self {
        self.states.push(name.to_string());
        self
    }

    pub fn initial(&mut self, name: &str) -> &mut Self {
        self.initial.push(name.to_string());
        self
    }

    pub fn edge<S: AsRef<str>>(&mut self, src: &str, letter: &[S], dst: &str) -> &mut Self {
        let l = prop_set(letter);
        self.aps.extend(l.iter().cloned());
        self.edges.push((src.to_string(), l, dst.to_string()));
        self
    }

    /// Adds an acceptance set given by its edges.
    pub fn acceptance_set<S: AsRef<str>>(&mut self, edges: &[(&str, &[S], &str)]) -> &mut Self {
        self.acceptance.push(
            edges
                .iter()
                .map(|(s, l, d)| (s.to_string(), prop_set(l), d.to_string()))
                .collect(),
        );
        self
    }

    pub fn build(&self) -> Result<Gba, GbaError> {
        let aps: Vec<String> = self.aps.iter().cloned().collect();
        if aps.len() > MAX_APS {
            return Err(GbaError::TooManyAps {
                count: aps.len(),
                max: MAX_APS,
            });
        }
        let mask = |l: &BTreeSet<String>| -> u32 {
            l.iter()
                .map(|p| 1u32 << aps.binary_search(p).expect("ap registered"))
                .fold(0, |m, b| m | b)
        };
        let mut index = BTreeMap::new();
        for (i, s) in self.states.iter().enumerate() {
            if index.insert(s.clone(), i as u32).is_some() {
                return Err(GbaError::DuplicateState(s.clone()));
            }
        }
        let lookup = |s: &String| -> Result<u32, GbaError> {
            index
                .get(s)
                .copied()
                .ok_or_else(|| GbaError::UnknownState(s.clone()))
        };
        let to_edge = |(s, l, d): &(String, BTreeSet<String>, String)| -> Result<GbaEdge, GbaError> {
            Ok(GbaEdge {
                source: lookup(s)?,
                letter: mask(l),
                target: lookup(d)?,
            })
        };
        let edges = self.edges.iter().map(to_edge).collect::<Result<Vec<_>, _>>()?;
        let alphabet: Vec<u32> = match &self.alphabet {
            Some(ls) => ls.iter().map(mask).collect::<BTreeSet<_>>().into_iter().collect(),
            None => edges.iter().map(|e| e.letter).collect::<BTreeSet<_>>().into_iter().collect(),
        };
        let edge_set: BTreeSet<GbaEdge> = edges.iter().copied().collect();
        let mut acceptance = Vec::new();
        for (i, set) in self.acceptance.iter().enumerate() {
            let mut s = BTreeSet::new();
            for e in set {
                let e = to_edge(e)?;
                if !edge_set.contains(&e) {
                    return Err(GbaError::UnknownEdge { set: i, edge: usize::MAX });
                }
                s.insert(e);
            }
            acceptance.push(s);
        }
        let initial = self.initial.iter().map(lookup).collect::<Result<Vec<_>, _>>()?;
        let states = self.states.iter().cloned().map(GbaState::Named).collect();
        Gba::assemble(aps, alphabet, states, initial, edges, acceptance, None)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ltl::parse_formula;

    fn universe(aps: &[&str]) -> BTreeSet<String> {
        aps.iter().map(|s| s.to_string()).collect()
    }

    fn targets(a: &Gba, q: usize, letter: u32) -> Vec<usize> {
        a.successors(q, letter).collect()
    }

    /// Figure-1 style automaton over the letters {x}, {y}, {z}, {w}.
    pub(crate) fn fig1() -> Gba {
        let mut b = GbaBuilder::new();
        b.state("q1").state("q2").state("q3").initial("q1");
        b.edge("q1", &["x"], "q2")
            .edge("q1", &["w"], "q2")
            .edge("q2", &["y"], "q1")
            .edge("q2", &["z"], "q1")
            .edge("q2", &["y"], "q3")
            .edge("q3", &["y"], "q2");
        b.build().unwrap()
    }

    #[test]
    fn next_p_transition_table() {
        let a = translate(&parse_formula("X p").unwrap(), &universe(&["p"])).unwrap();
        assert_eq!(a.num_states(), 3);
        assert!(a.acceptance().is_empty());
        // states: 0 = init, 1 = ∅, 2 = {Xp}; letters: 0 = ∅, 1 = {p}
        for letter in 0..2 {
            assert_eq!(targets(&a, 0, letter), vec![2]);
        }
        assert_eq!(targets(&a, 2, 1), vec![1, 2]);
        assert!(targets(&a, 2, 0).is_empty());
        assert_eq!(targets(&a, 1, 0), vec![1, 2]);
        assert!(targets(&a, 1, 1).is_empty());
    }

    #[test]
    fn until_has_three_states_and_one_set() {
        let a = translate(&parse_formula("a U b").unwrap(), &universe(&["a", "b"])).unwrap();
        assert_eq!(a.num_states(), 3);
        assert_eq!(a.acceptance().len(), 1);
    }

    #[test]
    fn propositional_formula() {
        let a = translate(&parse_formula("p").unwrap(), &universe(&["p"])).unwrap();
        assert_eq!(a.num_states(), 2);
        assert!(a.acceptance().is_empty());
        assert_eq!(targets(&a, 0, 1), vec![1]);
        assert!(targets(&a, 0, 0).is_empty());
    }

    #[test]
    fn capacity_and_universe_errors() {
        let f = parse_formula("X X X a").unwrap();
        let err = translate_with(&f, &universe(&["a"]), TranslateOptions { max_elementary: 2 })
            .unwrap_err();
        assert_eq!(err, GbaError::Capacity { size: 3, cap: 2 });
        let err = translate(&f, &universe(&["b"])).unwrap_err();
        assert_eq!(err, GbaError::UnknownAp("a".into()));
    }

    #[test]
    fn reenterable_excludes_initial() {
        let a = translate(&parse_formula("X p").unwrap(), &universe(&["p"])).unwrap();
        assert_eq!(a.reenterable_states(), vec![false, true, true]);
    }

    #[test]
    fn reenterable_trivial_automata() {
        let mut b = GbaBuilder::new();
        b.state("s").initial("s").edge("s", &["a"], "s");
        assert_eq!(b.build().unwrap().reenterable_states(), vec![true]);

        let mut b = GbaBuilder::new();
        b.ap("a").letter(&["a"]).state("s").state("t").initial("s");
        assert_eq!(b.build().unwrap().reenterable_states(), vec![false, false]);
    }

    #[test]
    fn translated_automata_are_reverse_deterministic() {
        for text in ["a U b", "G F a", "X a & (b U !a)", "F G a", "X X a"] {
            let f = parse_formula(text).unwrap();
            let a = translate(&f, &crate::ltl::atomic_props(&f)).unwrap();
            let rd = a.check_reverse_deterministic();
            assert!(rd.exactly_one, "{text}");
            assert!(rd.at_most_one, "{text}");
        }
    }

    #[test]
    fn fig1_is_only_at_most_one() {
        let rd = fig1().check_reverse_deterministic();
        assert!(!rd.exactly_one);
        assert!(rd.at_most_one);
    }

    #[test]
    fn single_state_full_self_loops() {
        let mut b = GbaBuilder::new();
        b.state("s").initial("s");
        b.letter::<&str>(&[]).letter(&["a"]);
        b.edge::<&str>("s", &[], "s").edge("s", &["a"], "s");
        let rd = b.build().unwrap().check_reverse_deterministic();
        assert!(rd.exactly_one);
    }

    #[test]
    fn builder_rejects_unknown_states() {
        let mut b = GbaBuilder::new();
        b.state("s").initial("t");
        assert_eq!(b.build().unwrap_err(), GbaError::UnknownState("t".into()));
    }

    #[test]
    fn accepting_sets_are_subsets_of_edges() {
        let a = translate(&parse_formula("G F a").unwrap(), &universe(&["a"])).unwrap();
        for set in a.acceptance() {
            assert!(set.iter().all(|&e| (e as usize) < a.edges().len()));
        }
        assert_eq!(a.acceptance().len(), 2);
    }
}
