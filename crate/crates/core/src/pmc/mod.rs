//! Parametric and interval Markov chains with exact rational arithmetic.

mod parse;
mod poly;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::graph::Csr;

pub use parse::{parse_model, parse_rational, Model};
pub use poly::{Monomial, Polynomial, RationalFunction};

pub type Rational = num_rational::BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PmcError {
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("duplicate state `{0}`")]
    DuplicateState(String),
    #[error("duplicate parameter `{0}`")]
    DuplicateParam(String),
    #[error("unknown parameter `{0}`")]
    UnknownParam(String),
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("duplicate transition {0} -> {1}")]
    DuplicateTransition(String, String),
    #[error("interval for {src} -> {dst} has lower bound {lower} above upper bound {upper}")]
    IntervalOrder {
        src: String,
        dst: String,
        lower: Rational,
        upper: Rational,
    },
    #[error("parameter `{name}` has an empty domain")]
    EmptyDomain { name: String },
    #[error("no initial state declared")]
    NoInitial,
    #[error("state `{0}` has no outgoing transition")]
    NoOutgoing(String),
    #[error("constant row of state `{state}` is not a distribution: {reason}")]
    BadConstantRow { state: String, reason: String },
    #[error("row of state `{0}` admits no distribution within its intervals")]
    InfeasibleRow(String),
    #[error("denominator vanishes in `{0}`")]
    ZeroDenominator(String),
    #[error("parameter `{0}` has no assigned value")]
    MissingParam(String),
    #[error("evaluation is not well defined: {0}")]
    IllDefined(Diagnostic),
    #[error("expected an imc model")]
    NotImc,
}

/// Reason an evaluation fails to induce a Markov chain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Diagnostic {
    MissingParam(String),
    OutOfBounds { param: String, value: Rational },
    ZeroDenominator { src: String, dst: String },
    NotPositive { src: String, dst: String, value: Rational },
    AboveOne { src: String, dst: String, value: Rational },
    RowSum { state: String, sum: Rational },
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::MissingParam(p) => write!(f, "parameter `{p}` is unassigned"),
            Diagnostic::OutOfBounds { param, value } => {
                write!(f, "value {value} of `{param}` lies outside its domain")
            }
            Diagnostic::ZeroDenominator { src, dst } => {
                write!(f, "P({src},{dst}) has a vanishing denominator")
            }
            Diagnostic::NotPositive { src, dst, value } => {
                write!(f, "P({src},{dst}) = {value} is not positive")
            }
            Diagnostic::AboveOne { src, dst, value } => {
                write!(f, "P({src},{dst}) = {value} exceeds 1")
            }
            Diagnostic::RowSum { state, sum } => {
                write!(f, "row of `{state}` sums to {sum}")
            }
        }
    }
}

/// A named parameter with an optional lower and upper bound.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Param {
    pub name: String,
    pub lower: Option<Rational>,
    pub upper: Option<Rational>,
    pub lower_strict: bool,
    pub upper_strict: bool,
}

impl Param {
    pub fn unbounded(name: &str) -> Self {
        Param {
            name: name.to_string(),
            lower: None,
            upper: None,
            lower_strict: false,
            upper_strict: false,
        }
    }

    pub fn closed(name: &str, lower: Rational, upper: Rational) -> Self {
        Param {
            name: name.to_string(),
            lower: Some(lower),
            upper: Some(upper),
            lower_strict: false,
            upper_strict: false,
        }
    }

    pub fn open(name: &str, lower: Rational, upper: Rational) -> Self {
        Param {
            lower_strict: true,
            upper_strict: true,
            ..Param::closed(name, lower, upper)
        }
    }

    pub fn contains(&self, v: &Rational) -> bool {
        let lo_ok = match &self.lower {
            None => true,
            Some(l) if self.lower_strict => v > l,
            Some(l) => v >= l,
        };
        let hi_ok = match &self.upper {
            None => true,
            Some(u) if self.upper_strict => v < u,
            Some(u) => v <= u,
        };
        lo_ok && hi_ok
    }

    pub fn is_bounded(&self) -> bool {
        self.lower.is_some() && self.upper.is_some()
    }

    fn is_empty(&self) -> bool {
        match (&self.lower, &self.upper) {
            (Some(l), Some(u)) => l > u || (l == u && (self.lower_strict || self.upper_strict)),
            _ => false,
        }
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lo = self.lower.as_ref().map_or("-inf".to_string(), |l| l.to_string());
        let hi = self.upper.as_ref().map_or("inf".to_string(), |u| u.to_string());
        let open = if self.lower_strict || self.lower.is_none() { '(' } else { '[' };
        let close = if self.upper_strict || self.upper.is_none() { ')' } else { ']' };
        write!(f, "{} in {open}{lo},{hi}{close}", self.name)
    }
}

/// A partial assignment of parameters to rationals.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Evaluation(BTreeMap<String, Rational>);

impl Evaluation {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, Rational)>) -> Self {
        Evaluation(pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect())
    }

    pub fn get(&self, name: &str) -> Option<&Rational> {
        self.0.get(name)
    }

    pub fn insert(&mut self, name: &str, value: Rational) {
        self.0.insert(name.to_string(), value);
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Rational)> {
        self.0.iter()
    }

    /// Parses `p=1/10,q=0.3`.
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut out = Evaluation::new();
        for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| format!("expected `name=value`, found `{part}`"))?;
            let value = parse_rational(v.trim()).map_err(|e| format!("`{part}`: {e}"))?;
            out.insert(k.trim(), value);
        }
        Ok(out)
    }
}

impl fmt::Display for Evaluation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (k, v)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{k}={v}")?;
        }
        Ok(())
    }
}

/// `M = (S, L, s̄, V, P)`: rows hold the nonzero entries sorted by target.
#[derive(Debug, Clone)]
pub struct Pmc {
    states: Vec<String>,
    labels: Vec<BTreeSet<String>>,
    initial: usize,
    params: Vec<Param>,
    rows: Vec<Vec<(usize, RationalFunction)>>,
}

impl Pmc {
    /// Validates and assembles a model. Identically zero entries are dropped;
    /// rows without parameters must be probability distributions.
    pub fn new(
        states: Vec<String>,
        labels: Vec<BTreeSet<String>>,
        initial: usize,
        params: Vec<Param>,
        rows: Vec<Vec<(usize, RationalFunction)>>,
    ) -> Result<Self, PmcError> {
        assert_eq!(states.len(), labels.len());
        assert_eq!(states.len(), rows.len());
        let mut names = BTreeSet::new();
        for s in &states {
            if !names.insert(s) {
                return Err(PmcError::DuplicateState(s.clone()));
            }
        }
        let mut pnames = BTreeSet::new();
        for p in &params {
            if !pnames.insert(p.name.clone()) {
                return Err(PmcError::DuplicateParam(p.name.clone()));
            }
            if p.is_empty() {
                return Err(PmcError::EmptyDomain {
                    name: p.name.clone(),
                });
            }
        }
        if initial >= states.len() {
            return Err(PmcError::NoInitial);
        }
        let mut clean = Vec::with_capacity(rows.len());
        for (s, row) in rows.into_iter().enumerate() {
            let mut row: Vec<(usize, RationalFunction)> =
                row.into_iter().filter(|(_, f)| !f.is_zero()).collect();
            row.sort_by_key(|(t, _)| *t);
            for w in row.windows(2) {
                if w[0].0 == w[1].0 {
                    return Err(PmcError::DuplicateTransition(
                        states[s].clone(),
                        states[w[0].0].clone(),
                    ));
                }
            }
            if row.is_empty() {
                return Err(PmcError::NoOutgoing(states[s].clone()));
            }
            for (_, f) in &row {
                if let Some(v) = f.vars().into_iter().find(|v| !pnames.contains(v)) {
                    return Err(PmcError::UnknownParam(v));
                }
            }
            if row.iter().all(|(_, f)| f.as_constant().is_some()) {
                let mut sum = Rational::zero();
                for (t, f) in &row {
                    let c = f.as_constant().unwrap();
                    if !c.is_positive() || c > Rational::one() {
                        return Err(PmcError::BadConstantRow {
                            state: states[s].clone(),
                            reason: format!("P({},{}) = {c}", states[s], states[*t]),
                        });
                    }
                    sum += c;
                }
                if !sum.is_one() {
                    return Err(PmcError::BadConstantRow {
                        state: states[s].clone(),
                        reason: format!("entries sum to {sum}"),
                    });
                }
            }
            clean.push(row);
        }
        Ok(Pmc {
            states,
            labels,
            initial,
            params,
            rows: clean,
        })
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_transitions(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn state_name(&self, s: usize) -> &str {
        &self.states[s]
    }

    pub fn state_names(&self) -> &[String] {
        &self.states
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s == name)
    }

    pub fn label(&self, s: usize) -> &BTreeSet<String> {
        &self.labels[s]
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn params(&self) -> &[Param] {
        &self.params
    }

    pub fn row(&self, s: usize) -> &[(usize, RationalFunction)] {
        &self.rows[s]
    }

    pub fn entry(&self, s: usize, t: usize) -> Option<&RationalFunction> {
        let row = &self.rows[s];
        row.binary_search_by_key(&t, |(u, _)| *u).ok().map(|i| &row[i].1)
    }

    /// Whether some entry of the row mentions a parameter.
    pub fn is_parametric_row(&self, s: usize) -> bool {
        self.rows[s].iter().any(|(_, f)| f.as_constant().is_none())
    }

    /// All atomic propositions used by the labelling.
    pub fn aps(&self) -> BTreeSet<String> {
        self.labels.iter().flatten().cloned().collect()
    }

    /// Checks that `v` induces a Markov chain, reporting the first violation.
    pub fn well_defined(&self, v: &Evaluation) -> Result<(), Diagnostic> {
        for p in &self.params {
            match v.get(&p.name) {
                None => return Err(Diagnostic::MissingParam(p.name.clone())),
                Some(x) if !p.contains(x) => {
                    return Err(Diagnostic::OutOfBounds {
                        param: p.name.clone(),
                        value: x.clone(),
                    })
                }
                _ => {}
            }
        }
        for s in 0..self.num_states() {
            let mut sum = Rational::zero();
            for (t, f) in &self.rows[s] {
                let (src, dst) = (self.states[s].clone(), self.states[*t].clone());
                let value = match f.value(v) {
                    Ok(x) => x,
                    Err(PmcError::MissingParam(p)) => return Err(Diagnostic::MissingParam(p)),
                    Err(_) => return Err(Diagnostic::ZeroDenominator { src, dst }),
                };
                if !value.is_positive() {
                    return Err(Diagnostic::NotPositive { src, dst, value });
                }
                if value > Rational::one() {
                    return Err(Diagnostic::AboveOne { src, dst, value });
                }
                sum += value;
            }
            if !sum.is_one() {
                return Err(Diagnostic::RowSum {
                    state: self.states[s].clone(),
                    sum,
                });
            }
        }
        Ok(())
    }

    /// Constant transition rows under a total, well-defined evaluation.
    pub fn concrete_rows(&self, v: &Evaluation) -> Result<Vec<Vec<(usize, Rational)>>, PmcError> {
        self.well_defined(v).map_err(PmcError::IllDefined)?;
        self.rows
            .iter()
            .map(|row| {
                row.iter()
                    .map(|(t, f)| Ok((*t, f.value(v)?)))
                    .collect::<Result<Vec<_>, PmcError>>()
            })
            .collect()
    }

    /// `M_υ`: substitutes `v` and drops the assigned parameters. Entries must
    /// stay nonzero.
    pub fn instantiate(&self, v: &Evaluation) -> Result<Pmc, PmcError> {
        let mut rows = Vec::with_capacity(self.rows.len());
        for (s, row) in self.rows.iter().enumerate() {
            let mut out = Vec::with_capacity(row.len());
            for (t, f) in row {
                let g = f.evaluate(v)?;
                if g.is_zero() {
                    return Err(PmcError::IllDefined(Diagnostic::NotPositive {
                        src: self.states[s].clone(),
                        dst: self.states[*t].clone(),
                        value: Rational::zero(),
                    }));
                }
                out.push((*t, g));
            }
            rows.push(out);
        }
        let params = self
            .params
            .iter()
            .filter(|p| v.get(&p.name).is_none())
            .cloned()
            .collect();
        Pmc::new(
            self.states.clone(),
            self.labels.clone(),
            self.initial,
            params,
            rows,
        )
    }

    /// `𝔓(Cyl(s0 … sk))` under a total evaluation.
    pub fn cylinder_prob(&self, v: &Evaluation, path: &[usize]) -> Result<Rational, PmcError> {
        self.well_defined(v).map_err(PmcError::IllDefined)?;
        match path.first() {
            Some(&s0) if s0 == self.initial => {}
            _ => return Ok(Rational::zero()),
        }
        let mut p = Rational::one();
        for w in path.windows(2) {
            match self.entry(w[0], w[1]) {
                Some(f) => p *= f.value(v)?,
                None => return Ok(Rational::zero()),
            }
        }
        Ok(p)
    }

    /// Support graph `{(s,t) : P(s,t) ≠ 0}`.
    pub fn underlying_graph(&self) -> Csr {
        let adj: Vec<Vec<usize>> = self
            .rows
            .iter()
            .map(|row| row.iter().map(|(t, _)| *t).collect())
            .collect();
        Csr::from_adjacency(&adj)
    }
}

impl fmt::Display for Pmc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "pmc")?;
        for p in &self.params {
            writeln!(f, "param {p} ;")?;
        }
        for (s, name) in self.states.iter().enumerate() {
            let labels: Vec<&str> = self.labels[s].iter().map(String::as_str).collect();
            writeln!(f, "state {name} {{ {} }} ;", labels.join(", "))?;
        }
        writeln!(f, "init {} ;", self.states[self.initial])?;
        for (s, row) in self.rows.iter().enumerate() {
            for (t, g) in row {
                writeln!(f, "trans {} -> {} : {g} ;", self.states[s], self.states[*t])?;
            }
        }
        Ok(())
    }
}

/// Interval Markov chain: rows hold `(target, P_l, P_u)` with `P_u > 0`.
#[derive(Debug, Clone)]
pub struct Imc {
    states: Vec<String>,
    labels: Vec<BTreeSet<String>>,
    initial: usize,
    rows: Vec<Vec<(usize, Rational, Rational)>>,
}

impl Imc {
    pub fn new(
        states: Vec<String>,
        labels: Vec<BTreeSet<String>>,
        initial: usize,
        rows: Vec<Vec<(usize, Rational, Rational)>>,
    ) -> Result<Self, PmcError> {
        let mut names = BTreeSet::new();
        for s in &states {
            if !names.insert(s) {
                return Err(PmcError::DuplicateState(s.clone()));
            }
        }
        if initial >= states.len() {
            return Err(PmcError::NoInitial);
        }
        let mut clean = Vec::with_capacity(rows.len());
        for (s, row) in rows.into_iter().enumerate() {
            let mut row = row;
            row.sort_by(|a, b| a.0.cmp(&b.0));
            for w in row.windows(2) {
                if w[0].0 == w[1].0 {
                    return Err(PmcError::DuplicateTransition(
                        states[s].clone(),
                        states[w[0].0].clone(),
                    ));
                }
            }
            for (t, lo, hi) in &row {
                if lo > hi || lo.is_negative() || *hi > Rational::one() {
                    return Err(PmcError::IntervalOrder {
                        src: states[s].clone(),
                        dst: states[*t].clone(),
                        lower: lo.clone(),
                        upper: hi.clone(),
                    });
                }
            }
            clean.push(row);
        }
        Ok(Imc {
            states,
            labels,
            initial,
            rows: clean,
        })
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn state_names(&self) -> &[String] {
        &self.states
    }

    pub fn row(&self, s: usize) -> &[(usize, Rational, Rational)] {
        &self.rows[s]
    }

    /// One parameter `p_<s>_<t>` in `[P_l, P_u]` per pair with `P_u > 0`.
    pub fn to_pmc(&self) -> Result<Pmc, PmcError> {
        let mut params = Vec::new();
        let mut used = BTreeSet::new();
        let mut rows = Vec::with_capacity(self.rows.len());
        for (s, row) in self.rows.iter().enumerate() {
            let lo_sum: Rational = row.iter().map(|(_, l, _)| l.clone()).sum();
            let hi_sum: Rational = row.iter().map(|(_, _, u)| u.clone()).sum();
            if hi_sum < Rational::one() || lo_sum > Rational::one() {
                return Err(PmcError::InfeasibleRow(self.states[s].clone()));
            }
            let mut out = Vec::new();
            for (t, lo, hi) in row {
                if hi.is_zero() {
                    continue;
                }
                let base = format!("p_{}_{}", self.states[s], self.states[*t]);
                let mut name = base.clone();
                let mut k = 1;
                while !used.insert(name.clone()) {
                    name = format!("{base}_{k}");
                    k += 1;
                }
                params.push(Param::closed(&name, lo.clone(), hi.clone()));
                out.push((*t, RationalFunction::var(&name)));
            }
            rows.push(out);
        }
        Pmc::new(
            self.states.clone(),
            self.labels.clone(),
            self.initial,
            params,
            rows,
        )
    }
}

/// Converts an interval chain into the equivalent parametric chain.
pub fn imc_to_pmc(imc: &Imc) -> Result<Pmc, PmcError> {
    imc.to_pmc()
}
