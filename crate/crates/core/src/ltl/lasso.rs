use std::collections::{BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use super::{subformulas, Formula};

/// A set of atomic propositions read at one position of a word.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter(BTreeSet<String>);

impl Letter {
    pub fn new<I, S>(props: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Letter(props.into_iter().map(Into::into).collect())
    }

    pub fn empty() -> Self {
        Letter(BTreeSet::new())
    }

    pub fn contains(&self, prop: &str) -> bool {
        self.0.contains(prop)
    }

    pub fn props(&self) -> &BTreeSet<String> {
        &self.0
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, p) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, "}}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LassoError {
    #[error("the loop of a lasso word must be nonempty")]
    EmptyLoop,
}

/// The ultimately periodic word `stem · cycle^ω`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LassoWord {
    stem: Vec<Letter>,
    cycle: Vec<Letter>,
}

impl LassoWord {
    pub fn new(stem: Vec<Letter>, cycle: Vec<Letter>) -> Result<Self, LassoError> {
        if cycle.is_empty() {
            return Err(LassoError::EmptyLoop);
        }
        Ok(LassoWord { stem, cycle })
    }

    pub fn stem(&self) -> &[Letter] {
        &self.stem
    }

    pub fn cycle(&self) -> &[Letter] {
        &self.cycle
    }

    /// Number of distinct positions in the finite representation.
    pub fn len(&self) -> usize {
        self.stem.len() + self.cycle.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Position following `i` in the folded representation.
    pub fn successor(&self, i: usize) -> usize {
        if i + 1 < self.len() {
            i + 1
        } else {
            self.stem.len()
        }
    }

    /// Letter at folded position `i < len()`.
    pub fn letter(&self, i: usize) -> &Letter {
        if i < self.stem.len() {
            &self.stem[i]
        } else {
            &self.cycle[i - self.stem.len()]
        }
    }

    /// Letter at position `i` of the infinite word.
    pub fn letter_at(&self, i: usize) -> &Letter {
        if i < self.stem.len() {
            &self.stem[i]
        } else {
            &self.cycle[(i - self.stem.len()) % self.cycle.len()]
        }
    }

    /// The word with its first letter removed.
    pub fn shifted(&self) -> LassoWord {
        if self.stem.is_empty() {
            let mut cycle = self.cycle.clone();
            cycle.rotate_left(1);
            LassoWord {
                stem: Vec::new(),
                cycle,
            }
        } else {
            LassoWord {
                stem: self.stem[1..].to_vec(),
                cycle: self.cycle.clone(),
            }
        }
    }

    /// The same infinite word written as `stem · cycle · cycle^ω`.
    pub fn unrolled(&self) -> LassoWord {
        let mut stem = self.stem.clone();
        stem.extend(self.cycle.iter().cloned());
        LassoWord {
            stem,
            cycle: self.cycle.clone(),
        }
    }
}

impl fmt::Display for LassoWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.stem {
            write!(f, "{l} ")?;
        }
        write!(f, "(")?;
        for (i, l) in self.cycle.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{l}")?;
        }
        write!(f, ")^w")
    }
}

/// Decides `w ⊨ φ` exactly.
///
/// Truth values are computed for every subformula at every folded position.
/// Positions inside the loop are identified with their residue, so `U` is the
/// least fixed point of `ψ2 ∨ (ψ1 ∧ X(ψ1 U ψ2))` over a finite set of
/// positions.
pub fn eval_lasso(phi: &Formula, w: &LassoWord) -> bool {
    let subs = subformulas(phi);
    let index: HashMap<&Formula, usize> = subs.iter().enumerate().map(|(i, f)| (f, i)).collect();
    let n = w.len();
    let mut truth: Vec<Vec<bool>> = Vec::with_capacity(subs.len());
    for f in &subs {
        let row: Vec<bool> = match f {
            Formula::True => vec![true; n],
            Formula::Atom(a) => (0..n).map(|i| w.letter(i).contains(a)).collect(),
            Formula::Not(g) => truth[index[&**g]].iter().map(|v| !v).collect(),
            Formula::And(l, r) => {
                let (l, r) = (&truth[index[&**l]], &truth[index[&**r]]);
                (0..n).map(|i| l[i] && r[i]).collect()
            }
            Formula::Next(g) => {
                let g = &truth[index[&**g]];
                (0..n).map(|i| g[w.successor(i)]).collect()
            }
            Formula::Until(l, r) => {
                let (l, r) = (&truth[index[&**l]], &truth[index[&**r]]);
                let mut u = r.clone();
                loop {
                    let mut changed = false;
                    for i in (0..n).rev() {
                        if !u[i] && l[i] && u[w.successor(i)] {
                            u[i] = true;
                            changed = true;
                        }
                    }
                    if !changed {
                        break;
                    }
                }
                u
            }
        };
        truth.push(row);
    }
    truth[subs.len() - 1][0]
}
