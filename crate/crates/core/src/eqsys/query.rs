use std::fmt;

use num_traits::{One, Zero};

use crate::ltl::{parse_formula, Formula};
use crate::pmc::{parse_rational, Rational};

use super::EqsysError;

/// A subinterval `J` of `[0, 1]` with open or closed ends.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interval {
    pub lower: Rational,
    pub upper: Rational,
    pub lower_strict: bool,
    pub upper_strict: bool,
}

impl Interval {
    pub fn new(lower: Rational, upper: Rational, lower_strict: bool, upper_strict: bool) -> Result<Self, EqsysError> {
        let j = Interval {
            lower,
            upper,
            lower_strict,
            upper_strict,
        };
        if j.lower < Rational::zero()
            || j.upper > Rational::one()
            || j.is_empty()
        {
            return Err(EqsysError::InvalidInterval(j.to_string()));
        }
        Ok(j)
    }

    pub fn closed(lower: Rational, upper: Rational) -> Result<Self, EqsysError> {
        Interval::new(lower, upper, false, false)
    }

    fn is_empty(&self) -> bool {
        self.lower > self.upper || (self.lower == self.upper && (self.lower_strict || self.upper_strict))
    }

    pub fn contains(&self, x: &Rational) -> bool {
        let lo = if self.lower_strict { x > &self.lower } else { x >= &self.lower };
        let hi = if self.upper_strict { x < &self.upper } else { x <= &self.upper };
        lo && hi
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}{}, {}{}",
            if self.lower_strict { '(' } else { '[' },
            self.lower,
            self.upper,
            if self.upper_strict { ')' } else { ']' }
        )
    }
}

/// `P_J(φ)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PltlQuery {
    pub interval: Interval,
    pub formula: Formula,
}

impl fmt::Display for PltlQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "P in {} [ {} ]", self.interval, self.formula)
    }
}

fn bad(text: &str, why: &str) -> EqsysError {
    EqsysError::Query(format!("`{text}`: {why}"))
}

fn constant(text: &str, whole: &str) -> Result<Rational, EqsysError> {
    parse_rational(text.trim()).map_err(|e| bad(whole, &e.to_string()))
}

/// Parses `P >= c [ φ ]`, `P > c [ φ ]`, `P <= c [ φ ]`, `P < c [ φ ]` and
/// `P in [a,b] [ φ ]` with either end of the interval open.
pub fn parse_query(text: &str) -> Result<PltlQuery, EqsysError> {
    let t = text.trim();
    let rest = t
        .strip_prefix('P')
        .ok_or_else(|| bad(text, "a query starts with `P`"))?
        .trim_start();
    let open = rest.rfind('[').ok_or_else(|| bad(text, "missing `[ formula ]`"))?;
    let close = rest.rfind(']').filter(|&c| c > open).ok_or_else(|| bad(text, "missing `]`"))?;
    if !rest[close + 1..].trim().is_empty() {
        return Err(bad(text, "unexpected text after `]`"));
    }
    let formula = parse_formula(&rest[open + 1..close])?;
    let head = rest[..open].trim();

    let zero = Rational::zero();
    let one = Rational::one();
    let interval = if let Some(c) = head.strip_prefix(">=") {
        Interval::new(constant(c, text)?, one, false, false)?
    } else if let Some(c) = head.strip_prefix("<=") {
        Interval::new(zero, constant(c, text)?, false, false)?
    } else if let Some(c) = head.strip_prefix('>') {
        Interval::new(constant(c, text)?, one, true, false)?
    } else if let Some(c) = head.strip_prefix('<') {
        Interval::new(zero, constant(c, text)?, false, true)?
    } else if let Some(j) = head.strip_prefix("in") {
        let j = j.trim();
        let lower_strict = match j.chars().next() {
            Some('(') => true,
            Some('[') => false,
            _ => return Err(bad(text, "interval must start with `(` or `[`")),
        };
        let upper_strict = match j.chars().last() {
            Some(')') => true,
            Some(']') => false,
            _ => return Err(bad(text, "interval must end with `)` or `]`")),
        };
        let (a, b) = j[1..j.len() - 1]
            .split_once(',')
            .ok_or_else(|| bad(text, "interval needs two bounds"))?;
        Interval::new(constant(a, text)?, constant(b, text)?, lower_strict, upper_strict)?
    } else {
        return Err(bad(text, "expected `>=`, `>`, `<=`, `<` or `in`"));
    };
    Ok(PltlQuery { interval, formula })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pmc::rat;

    #[test]
    fn comparison_forms() {
        let q = parse_query("P >= 9/10 [ G F a ]").unwrap();
        assert_eq!(q.interval, Interval::closed(rat(9, 10), rat(1, 1)).unwrap());
        assert_eq!(q.formula, parse_formula("G F a").unwrap());

        let q = parse_query("P > 0 [ F a ]").unwrap();
        assert!(!q.interval.contains(&rat(0, 1)));
        assert!(q.interval.contains(&rat(1, 1000)));

        let q = parse_query("P < 0.5 [a U b]").unwrap();
        assert!(q.interval.contains(&rat(0, 1)));
        assert!(!q.interval.contains(&rat(1, 2)));

        let q = parse_query("P <= 1/3 [X a]").unwrap();
        assert!(q.interval.contains(&rat(1, 3)));
    }

    #[test]
    fn interval_forms() {
        let q = parse_query("P in (1/4, 1] [ true ]").unwrap();
        assert!(q.interval.lower_strict && !q.interval.upper_strict);
        assert!(q.interval.contains(&rat(1, 1)));
        let q = parse_query("P in [1,1] [true]").unwrap();
        assert!(q.interval.contains(&rat(1, 1)));
    }

    #[test]
    fn empty_or_out_of_range_rejected() {
        for text in ["P in (1, 1] [ a ]", "P in [0.6, 0.5] [ a ]", "P >= 3/2 [ a ]", "P in [-1, 1] [a]", "P > 1 [a]"] {
            assert!(matches!(parse_query(text), Err(EqsysError::InvalidInterval(_))), "{text}");
        }
    }

    #[test]
    fn malformed() {
        for text in ["Q >= 1 [a]", "P >= 1 a", "P == 1 [a]", "P >= x [a]"] {
            assert!(matches!(parse_query(text), Err(EqsysError::Query(_))), "{text}");
        }
        assert!(matches!(parse_query("P >= 1 [a &]"), Err(EqsysError::Formula(_))));
    }
}
