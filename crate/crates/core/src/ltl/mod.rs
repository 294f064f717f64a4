//! Linear temporal logic over the core connectives `!`, `&`, `X` and `U`.
//!
//! Derived operators (`|`, `->`, `F`, `G`, `false`) are lowered by the parser,
//! so every [`Formula`] value is built from the core connectives and the
//! constant `true`.

mod lasso;
mod parse;

use std::collections::{BTreeSet, HashSet};
use std::fmt;

pub use lasso::{eval_lasso, LassoError, LassoWord, Letter};
pub use parse::{parse_formula, LtlError};

/// An LTL formula in core connectives.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    True,
    Atom(String),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Next(Box<Formula>),
    Until(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn atom(name: impl Into<String>) -> Self {
        Formula::Atom(name.into())
    }

    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(l: Formula, r: Formula) -> Self {
        Formula::And(Box::new(l), Box::new(r))
    }

    pub fn next(f: Formula) -> Self {
        Formula::Next(Box::new(f))
    }

    pub fn until(l: Formula, r: Formula) -> Self {
        Formula::Until(Box::new(l), Box::new(r))
    }

    /// `false`, lowered as `!true`.
    pub fn falsity() -> Self {
        Formula::not(Formula::True)
    }

    /// `l | r` lowered as `!(!l & !r)`.
    pub fn or(l: Formula, r: Formula) -> Self {
        Formula::not(Formula::and(Formula::not(l), Formula::not(r)))
    }

    /// `l -> r` lowered as `!(l & !r)`.
    pub fn implies(l: Formula, r: Formula) -> Self {
        Formula::not(Formula::and(l, Formula::not(r)))
    }

    /// `F f` lowered as `true U f`.
    pub fn eventually(f: Formula) -> Self {
        Formula::until(Formula::True, f)
    }

    /// `G f` lowered as `!F !f`.
    pub fn always(f: Formula) -> Self {
        Formula::not(Formula::eventually(Formula::not(f)))
    }

    pub fn children(&self) -> Vec<&Formula> {
        match self {
            Formula::True | Formula::Atom(_) => vec![],
            Formula::Not(f) | Formula::Next(f) => vec![f],
            Formula::And(l, r) | Formula::Until(l, r) => vec![l, r],
        }
    }

    pub fn is_temporal(&self) -> bool {
        matches!(self, Formula::Next(_) | Formula::Until(..))
    }

    /// Number of nodes in the syntax tree.
    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|c| c.size()).sum::<usize>()
    }

    /// Nesting depth of temporal operators.
    pub fn temporal_depth(&self) -> usize {
        let inner = self
            .children()
            .iter()
            .map(|c| c.temporal_depth())
            .max()
            .unwrap_or(0);
        if self.is_temporal() {
            inner + 1
        } else {
            inner
        }
    }

    fn is_binary(&self) -> bool {
        matches!(self, Formula::And(..) | Formula::Until(..))
    }
}

/// All distinct subformulas, children before parents; `f` itself comes last.
pub fn subformulas(f: &Formula) -> Vec<Formula> {
    fn walk<'a>(f: &'a Formula, seen: &mut HashSet<&'a Formula>, out: &mut Vec<&'a Formula>) {
        if seen.contains(f) {
            return;
        }
        for c in f.children() {
            walk(c, seen, out);
        }
        seen.insert(f);
        out.push(f);
    }
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    walk(f, &mut seen, &mut out);
    out.into_iter().cloned().collect()
}

/// The atomic propositions occurring in `f`.
pub fn atomic_props(f: &Formula) -> BTreeSet<String> {
    fn walk(f: &Formula, out: &mut BTreeSet<String>) {
        if let Formula::Atom(a) = f {
            out.insert(a.clone());
        }
        for c in f.children() {
            walk(c, out);
        }
    }
    let mut out = BTreeSet::new();
    walk(f, &mut out);
    out
}

impl fmt::Display for Formula {
    /// Prints core connectives; every binary operand that is itself binary is
    /// parenthesised, so the output re-parses to the same tree.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn operand(g: &Formula, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            if g.is_binary() {
                write!(f, "({g})")
            } else {
                write!(f, "{g}")
            }
        }
        match self {
            Formula::True => write!(f, "true"),
            Formula::Atom(a) => write!(f, "{a}"),
            Formula::Not(g) => {
                write!(f, "!")?;
                operand(g, f)
            }
            Formula::Next(g) => {
                write!(f, "X ")?;
                operand(g, f)
            }
            Formula::And(l, r) => {
                operand(l, f)?;
                write!(f, " & ")?;
                operand(r, f)
            }
            Formula::Until(l, r) => {
                operand(l, f)?;
                write!(f, " U ")?;
                operand(r, f)
            }
        }
    }
}
