use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Signed, Zero};

use super::{Evaluation, PmcError, Rational};

/// Exponents of a monomial, keyed by parameter name; zero exponents are
/// never stored.
pub type Monomial = BTreeMap<String, u32>;

/// A polynomial with exact rational coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Polynomial {
    terms: BTreeMap<Monomial, Rational>,
}

fn mul_monomials(a: &Monomial, b: &Monomial) -> Monomial {
    let mut out = a.clone();
    for (v, e) in b {
        *out.entry(v.clone()).or_insert(0) += e;
    }
    out
}

fn pow(base: &Rational, exp: u32) -> Rational {
    let mut acc = Rational::one();
    for _ in 0..exp {
        acc *= base;
    }
    acc
}

impl Polynomial {
    pub fn zero() -> Self {
        Polynomial::default()
    }

    pub fn constant(c: Rational) -> Self {
        let mut p = Polynomial::zero();
        if !c.is_zero() {
            p.terms.insert(Monomial::new(), c);
        }
        p
    }

    pub fn one() -> Self {
        Polynomial::constant(Rational::one())
    }

    pub fn var(name: &str) -> Self {
        let mut m = Monomial::new();
        m.insert(name.to_string(), 1);
        let mut p = Polynomial::zero();
        p.terms.insert(m, Rational::one());
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The value if the polynomial has no variables.
    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => self.terms.get(&Monomial::new()).cloned(),
            _ => None,
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn vars(&self) -> BTreeSet<String> {
        self.terms.keys().flat_map(|m| m.keys().cloned()).collect()
    }

    /// Coefficient of the largest monomial in the term order.
    pub fn leading_coefficient(&self) -> Option<&Rational> {
        self.terms.values().next_back()
    }

    fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn scale(&self, c: &Rational) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero();
        }
        Polynomial {
            terms: self.terms.iter().map(|(m, k)| (m.clone(), k * c)).collect(),
        }
    }

    /// Substitutes the assigned parameters; others are kept symbolic.
    pub fn evaluate(&self, v: &Evaluation) -> Polynomial {
        let mut out = Polynomial::zero();
        for (m, c) in &self.terms {
            let mut coeff = c.clone();
            let mut rest = Monomial::new();
            for (var, &e) in m {
                match v.get(var) {
                    Some(x) => coeff *= pow(x, e),
                    None => {
                        rest.insert(var.clone(), e);
                    }
                }
            }
            out.add_term(rest, coeff);
        }
        out
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        Polynomial {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        self + &(-rhs)
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        let mut out = Polynomial::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(mul_monomials(ma, mb), ca * cb);
            }
        }
        out
    }
}

fn write_monomial(f: &mut fmt::Formatter<'_>, m: &Monomial) -> fmt::Result {
    for (i, (v, e)) in m.iter().enumerate() {
        if i > 0 {
            write!(f, "*")?;
        }
        write!(f, "{v}")?;
        if *e > 1 {
            write!(f, "^{e}")?;
        }
    }
    Ok(())
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            let mag = c.abs();
            if i == 0 {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            if m.is_empty() {
                write!(f, "{mag}")?;
            } else {
                if !mag.is_one() {
                    write!(f, "{mag}*")?;
                }
                write_monomial(f, m)?;
            }
        }
        Ok(())
    }
}

/// `num / den` over the parameters. The denominator is never the zero
/// polynomial and is scaled to have leading coefficient 1; zero is `0/1`.
#[derive(Debug, Clone)]
pub struct RationalFunction {
    num: Polynomial,
    den: Polynomial,
}

impl RationalFunction {
    pub fn new(num: Polynomial, den: Polynomial) -> Result<Self, PmcError> {
        if den.is_zero() {
            return Err(PmcError::ZeroDenominator(format!("({num})/0")));
        }
        Ok(Self::normalized(num, den))
    }

    fn normalized(num: Polynomial, den: Polynomial) -> Self {
        if num.is_zero() {
            return RationalFunction {
                num,
                den: Polynomial::one(),
            };
        }
        if let Some(c) = den.as_constant() {
            return RationalFunction {
                num: num.scale(&c.recip()),
                den: Polynomial::one(),
            };
        }
        let lead = den.leading_coefficient().expect("nonzero denominator").recip();
        RationalFunction {
            num: num.scale(&lead),
            den: den.scale(&lead),
        }
    }

    pub fn constant(c: Rational) -> Self {
        RationalFunction {
            num: Polynomial::constant(c),
            den: Polynomial::one(),
        }
    }

    pub fn zero() -> Self {
        Self::constant(Rational::zero())
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn var(name: &str) -> Self {
        RationalFunction {
            num: Polynomial::var(name),
            den: Polynomial::one(),
        }
    }

    pub fn numerator(&self) -> &Polynomial {
        &self.num
    }

    pub fn denominator(&self) -> &Polynomial {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn as_constant(&self) -> Option<Rational> {
        let n = self.num.as_constant()?;
        let d = self.den.as_constant()?;
        Some(n / d)
    }

    pub fn vars(&self) -> BTreeSet<String> {
        let mut v = self.num.vars();
        v.extend(self.den.vars());
        v
    }

    pub fn recip(&self) -> Result<Self, PmcError> {
        RationalFunction::new(self.den.clone(), self.num.clone())
    }

    pub fn checked_div(&self, rhs: &RationalFunction) -> Result<Self, PmcError> {
        if rhs.is_zero() {
            return Err(PmcError::ZeroDenominator(format!("({self})/0")));
        }
        RationalFunction::new(&self.num * &rhs.den, &self.den * &rhs.num)
    }

    /// Substitutes `v` on the parameters it assigns.
    pub fn evaluate(&self, v: &Evaluation) -> Result<Self, PmcError> {
        let den = self.den.evaluate(v);
        if den.is_zero() {
            return Err(PmcError::ZeroDenominator(self.to_string()));
        }
        Ok(Self::normalized(self.num.evaluate(v), den))
    }

    /// Evaluates to a constant; fails if some parameter is unassigned.
    pub fn value(&self, v: &Evaluation) -> Result<Rational, PmcError> {
        let r = self.evaluate(v)?;
        r.as_constant().ok_or_else(|| {
            let missing = r.vars().into_iter().next().unwrap_or_default();
            PmcError::MissingParam(missing)
        })
    }

    pub fn pow(&self, exp: u32) -> Self {
        let mut acc = RationalFunction::one();
        for _ in 0..exp {
            acc = &acc * self;
        }
        acc
    }
}

impl PartialEq for RationalFunction {
    fn eq(&self, other: &Self) -> bool {
        &self.num * &other.den == &other.num * &self.den
    }
}

impl Eq for RationalFunction {}

impl Add for &RationalFunction {
    type Output = RationalFunction;
    fn add(self, rhs: &RationalFunction) -> RationalFunction {
        if self.den == rhs.den {
            return RationalFunction::normalized(&self.num + &rhs.num, self.den.clone());
        }
        RationalFunction::normalized(
            &(&self.num * &rhs.den) + &(&rhs.num * &self.den),
            &self.den * &rhs.den,
        )
    }
}

impl Neg for &RationalFunction {
    type Output = RationalFunction;
    fn neg(self) -> RationalFunction {
        RationalFunction {
            num: -&self.num,
            den: self.den.clone(),
        }
    }
}

impl Sub for &RationalFunction {
    type Output = RationalFunction;
    fn sub(self, rhs: &RationalFunction) -> RationalFunction {
        self + &(-rhs)
    }
}

impl Mul for &RationalFunction {
    type Output = RationalFunction;
    fn mul(self, rhs: &RationalFunction) -> RationalFunction {
        RationalFunction::normalized(&self.num * &rhs.num, &self.den * &rhs.den)
    }
}

impl From<Rational> for RationalFunction {
    fn from(c: Rational) -> Self {
        RationalFunction::constant(c)
    }
}

impl fmt::Display for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.as_constant().is_some_and(|d| d.is_one()) {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({})/({})", self.num, self.den)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(BigInt::from(n), BigInt::from(d))
    }

    fn x() -> RationalFunction {
        RationalFunction::var("x")
    }

    fn c(n: i64, d: i64) -> RationalFunction {
        RationalFunction::constant(q(n, d))
    }

    #[test]
    fn complement_sums_to_one() {
        let one_minus_x = &c(1, 1) - &x();
        assert_eq!(&x() + &one_minus_x, RationalFunction::one());
        assert_eq!((&x() + &one_minus_x).as_constant(), Some(q(1, 1)));
    }

    #[test]
    fn multiplicative_identity() {
        let f = &c(1, 2) + &RationalFunction::var("eps");
        assert_eq!(&f * &RationalFunction::one(), f);
    }

    #[test]
    fn equality_by_cross_multiplication() {
        let one_minus_x = &c(1, 1) - &x();
        let ratio = x().checked_div(&one_minus_x).unwrap();
        let prod = &ratio * &one_minus_x;
        assert_eq!(prod, x());
        assert!(prod.denominator().as_constant().is_none());
    }

    #[test]
    fn evaluation_examples() {
        let f = &c(1, 2) + &RationalFunction::var("eps");
        let v = Evaluation::from_pairs([("eps", q(1, 10))]);
        assert_eq!(f.value(&v).unwrap(), q(3, 5));

        let xy = &x() * &RationalFunction::var("y");
        let v = Evaluation::from_pairs([("x", q(0, 1))]);
        assert!(xy.evaluate(&v).unwrap().is_zero());

        let g = x().checked_div(&(&c(1, 1) - &x())).unwrap();
        let v = Evaluation::from_pairs([("x", q(1, 1))]);
        assert!(matches!(g.evaluate(&v), Err(PmcError::ZeroDenominator(_))));
    }

    #[test]
    fn partial_evaluation_keeps_free_parameters() {
        let f = &x() * &RationalFunction::var("y");
        let v = Evaluation::from_pairs([("x", q(2, 1))]);
        let g = f.evaluate(&v).unwrap();
        assert_eq!(g.vars().into_iter().collect::<Vec<_>>(), vec!["y".to_string()]);
        assert!(matches!(g.value(&v), Err(PmcError::MissingParam(p)) if p == "y"));
    }

    #[test]
    fn display() {
        let f = &c(1, 2) - &RationalFunction::var("eps");
        assert_eq!(f.to_string(), "1/2 - eps");
        let g = &(&x() * &x()).checked_div(&(&c(1, 1) - &x())).unwrap() * &c(3, 1);
        assert_eq!(g.to_string(), "(-3*x^2)/(-1 + x)");
        assert_eq!(RationalFunction::zero().to_string(), "0");
    }

    #[test]
    fn zero_denominator_rejected() {
        assert!(RationalFunction::new(Polynomial::one(), Polynomial::zero()).is_err());
        assert!(x().checked_div(&RationalFunction::zero()).is_err());
    }
}
