use std::collections::{BTreeSet, HashMap};

use num_bigint::BigInt;
use num_traits::Zero;

use super::{Imc, Param, Pmc, PmcError, Rational, RationalFunction};

/// A parsed model file.
#[derive(Debug, Clone)]
pub enum Model {
    Pmc(Pmc),
    Imc(Imc),
}

impl Model {
    /// The model as a PMC, converting interval chains.
    pub fn into_pmc(self) -> Result<Pmc, PmcError> {
        match self {
            Model::Pmc(m) => Ok(m),
            Model::Imc(i) => i.to_pmc(),
        }
    }

    pub fn into_imc(self) -> Result<Imc, PmcError> {
        match self {
            Model::Imc(i) => Ok(i),
            Model::Pmc(_) => Err(PmcError::NotImc),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(Rational),
    Sym(&'static str),
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Number(n) => format!("number {n}"),
            Tok::Sym(s) => format!("`{s}`"),
            Tok::Eof => "end of input".into(),
        }
    }
}

const SYMBOLS: &[&str] = &[
    "->", ";", "{", "}", ",", "(", ")", "[", "]", "+", "-", "*", "/", "^", ":",
];

/// Reads an unsigned decimal literal exactly.
fn decimal(text: &str) -> Option<Rational> {
    let (int, frac) = text.split_once('.').unwrap_or((text, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    let digits = format!("{int}{frac}");
    let n: BigInt = digits.parse().ok()?;
    let d = num_traits::pow(BigInt::from(10), frac.len());
    Some(Rational::new(n, d))
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize, usize)>, PmcError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut line, mut col) = (1usize, 1usize);
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        if c == '\n' {
            line += 1;
            col = 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            col += i - start;
            out.push((Tok::Ident(chars[start..i].iter().collect()), tl, tc));
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            let lit: String = chars[start..i].iter().collect();
            col += i - start;
            let value = decimal(&lit).ok_or_else(|| PmcError::Syntax {
                line: tl,
                column: tc,
                message: format!("malformed number `{lit}`"),
            })?;
            out.push((Tok::Number(value), tl, tc));
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
        match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
            Some(s) => {
                i += s.len();
                col += s.len();
                out.push((Tok::Sym(s), tl, tc));
            }
            None => {
                return Err(PmcError::Syntax {
                    line: tl,
                    column: tc,
                    message: format!("unexpected character `{c}`"),
                })
            }
        }
    }
    out.push((Tok::Eof, line, col));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize, usize)>,
    pos: usize,
    /// Parameters that may appear in expressions.
    params: BTreeSet<String>,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, message: String) -> PmcError {
        let (_, line, column) = self.toks[self.pos];
        PmcError::Syntax {
            line,
            column,
            message,
        }
    }

    fn at_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(t) if *t == s)
    }

    fn expect_sym(&mut self, s: &str) -> Result<(), PmcError> {
        if self.at_sym(s) {
            self.bump();
            Ok(())
        } else {
            Err(self.error(format!("expected `{s}`, found {}", self.peek().describe())))
        }
    }

    fn ident(&mut self) -> Result<String, PmcError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            other => Err(self.error(format!("expected an identifier, found {}", other.describe()))),
        }
    }

    fn expr(&mut self) -> Result<RationalFunction, PmcError> {
        let mut lhs = self.term()?;
        loop {
            if self.at_sym("+") {
                self.bump();
                lhs = &lhs + &self.term()?;
            } else if self.at_sym("-") {
                self.bump();
                lhs = &lhs - &self.term()?;
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<RationalFunction, PmcError> {
        let mut lhs = self.unary()?;
        loop {
            if self.at_sym("*") {
                self.bump();
                lhs = &lhs * &self.unary()?;
            } else if self.at_sym("/") {
                let pos = self.pos;
                self.bump();
                let rhs = self.unary()?;
                lhs = lhs.checked_div(&rhs).map_err(|_| {
                    let (_, line, column) = self.toks[pos];
                    PmcError::Syntax {
                        line,
                        column,
                        message: "division by zero".into(),
                    }
                })?;
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<RationalFunction, PmcError> {
        if self.at_sym("-") {
            self.bump();
            return Ok(-&self.unary()?);
        }
        if self.at_sym("+") {
            self.bump();
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<RationalFunction, PmcError> {
        let base = self.atom()?;
        if self.at_sym("^") {
            self.bump();
            match self.peek().clone() {
                Tok::Number(n) if n.is_integer() && n <= Rational::from_integer(64.into()) => {
                    self.bump();
                    let e: u32 = n.to_integer().try_into().expect("small exponent");
                    return Ok(base.pow(e));
                }
                other => {
                    return Err(self.error(format!(
                        "expected a small non-negative integer exponent, found {}",
                        other.describe()
                    )))
                }
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<RationalFunction, PmcError> {
        match self.peek().clone() {
            Tok::Number(n) => {
                self.bump();
                Ok(RationalFunction::constant(n))
            }
            Tok::Ident(name) if self.params.contains(&name) => {
                self.bump();
                Ok(RationalFunction::var(&name))
            }
            Tok::Ident(name) => Err(PmcError::UnknownParam(name)),
            Tok::Sym("(") => {
                self.bump();
                let e = self.expr()?;
                self.expect_sym(")")?;
                Ok(e)
            }
            other => Err(self.error(format!("expected an expression, found {}", other.describe()))),
        }
    }

    /// A constant expression, `inf` or `-inf` (as `None` with its sign).
    fn bound(&mut self) -> Result<Result<Rational, bool>, PmcError> {
        let neg = if self.at_sym("-") {
            self.bump();
            true
        } else {
            false
        };
        if let Tok::Ident(w) = self.peek() {
            if w == "inf" {
                self.bump();
                return Ok(Err(neg));
            }
        }
        let (line, column) = (self.toks[self.pos].1, self.toks[self.pos].2);
        let e = self.term()?;
        let c = e.as_constant().ok_or(PmcError::Syntax {
            line,
            column,
            message: "bounds must be constant".into(),
        })?;
        Ok(Ok(if neg { -c } else { c }))
    }
}

/// Parses a constant such as `3`, `-1/2` or `0.25`.
pub fn parse_rational(text: &str) -> Result<Rational, PmcError> {
    let mut p = Parser {
        toks: tokenize(text)?,
        pos: 0,
        params: BTreeSet::new(),
    };
    let e = p.expr()?;
    if *p.peek() != Tok::Eof {
        return Err(p.error(format!("unexpected {}", p.peek().describe())));
    }
    e.as_constant().ok_or_else(|| p.error("expected a constant".into()))
}

/// Parses a model file (see the crate README for the grammar).
pub fn parse_model(text: &str) -> Result<Model, PmcError> {
    let toks = tokenize(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        params: BTreeSet::new(),
    };
    let kind = p.ident()?;
    let interval = match kind.as_str() {
        "pmc" => false,
        "imc" => true,
        _ => {
            p.pos = 0;
            return Err(p.error(format!("expected `pmc` or `imc`, found `{kind}`")));
        }
    };
    if p.at_sym(";") {
        p.bump();
    }

    let mut params: Vec<Param> = Vec::new();
    let mut param_index: HashMap<String, usize> = HashMap::new();
    let mut states: Vec<String> = Vec::new();
    let mut labels: Vec<BTreeSet<String>> = Vec::new();
    let mut state_index: HashMap<String, usize> = HashMap::new();
    let mut init: Option<String> = None;
    // (src, dst, position of src token, entry)
    let mut trans: Vec<(String, String, usize, TransEntry)> = Vec::new();

    while *p.peek() != Tok::Eof {
        let kw_pos = p.pos;
        let kw = p.ident()?;
        match kw.as_str() {
            "param" if !interval => {
                let name = p.ident()?;
                if param_index.contains_key(&name) {
                    return Err(PmcError::DuplicateParam(name));
                }
                match p.ident()?.as_str() {
                    "in" => {}
                    _ => {
                        p.pos -= 1;
                        return Err(p.error("expected `in`".into()));
                    }
                }
                let lower_strict = if p.at_sym("(") {
                    true
                } else if p.at_sym("[") {
                    false
                } else {
                    return Err(p.error("expected `(` or `[`".into()));
                };
                p.bump();
                let lo = p.bound()?;
                p.expect_sym(",")?;
                let hi = p.bound()?;
                let upper_strict = if p.at_sym(")") {
                    true
                } else if p.at_sym("]") {
                    false
                } else {
                    return Err(p.error("expected `)` or `]`".into()));
                };
                p.bump();
                let lower = match lo {
                    Ok(v) => Some(v),
                    Err(true) => None,
                    Err(false) => return Err(p.error("lower bound cannot be +inf".into())),
                };
                let upper = match hi {
                    Ok(v) => Some(v),
                    Err(false) => None,
                    Err(true) => return Err(p.error("upper bound cannot be -inf".into())),
                };
                param_index.insert(name.clone(), params.len());
                p.params.insert(name.clone());
                params.push(Param {
                    name,
                    lower_strict: lower_strict && lower.is_some(),
                    upper_strict: upper_strict && upper.is_some(),
                    lower,
                    upper,
                });
            }
            "state" => {
                let name = p.ident()?;
                if state_index.contains_key(&name) {
                    return Err(PmcError::DuplicateState(name));
                }
                let mut set = BTreeSet::new();
                if p.at_sym("{") {
                    p.bump();
                    while !p.at_sym("}") {
                        set.insert(p.ident()?);
                        if p.at_sym(",") {
                            p.bump();
                        } else if !p.at_sym("}") {
                            return Err(p.error("expected `,` or `}`".into()));
                        }
                    }
                    p.bump();
                }
                state_index.insert(name.clone(), states.len());
                states.push(name);
                labels.push(set);
            }
            "init" => {
                if init.is_some() {
                    p.pos = kw_pos;
                    return Err(p.error("initial state declared twice".into()));
                }
                init = Some(p.ident()?);
            }
            "trans" => {
                let src_pos = p.pos;
                let src = p.ident()?;
                p.expect_sym("->")?;
                let dst = p.ident()?;
                p.expect_sym(":")?;
                let entry = if interval {
                    p.expect_sym("[")?;
                    let lo = p.bound()?;
                    p.expect_sym(",")?;
                    let hi = p.bound()?;
                    p.expect_sym("]")?;
                    match (lo, hi) {
                        (Ok(l), Ok(h)) => TransEntry::Interval(l, h),
                        _ => return Err(p.error("interval bounds must be finite".into())),
                    }
                } else {
                    TransEntry::Function(p.expr()?)
                };
                trans.push((src, dst, src_pos, entry));
            }
            other => {
                p.pos = kw_pos;
                return Err(p.error(format!("unknown declaration `{other}`")));
            }
        }
        p.expect_sym(";")?;
    }

    let init = init.ok_or(PmcError::NoInitial)?;
    let initial = *state_index.get(&init).ok_or(PmcError::UnknownState(init))?;
    let n = states.len();
    let mut seen = BTreeSet::new();
    let mut resolved = Vec::with_capacity(trans.len());
    for (src, dst, _, entry) in trans {
        let s = *state_index.get(&src).ok_or_else(|| PmcError::UnknownState(src.clone()))?;
        let t = *state_index.get(&dst).ok_or_else(|| PmcError::UnknownState(dst.clone()))?;
        if !seen.insert((s, t)) {
            return Err(PmcError::DuplicateTransition(src, dst));
        }
        resolved.push((s, t, src, dst, entry));
    }

    if interval {
        let mut rows = vec![Vec::new(); n];
        for (s, t, src, dst, entry) in resolved {
            let TransEntry::Interval(lo, hi) = entry else { unreachable!() };
            if lo > hi {
                return Err(PmcError::IntervalOrder {
                    src,
                    dst,
                    lower: lo,
                    upper: hi,
                });
            }
            if !hi.is_zero() {
                rows[s].push((t, lo, hi));
            }
        }
        for (s, row) in rows.iter().enumerate() {
            if row.is_empty() {
                return Err(PmcError::NoOutgoing(states[s].clone()));
            }
        }
        Ok(Model::Imc(Imc::new(states, labels, initial, rows)?))
    } else {
        let mut rows = vec![Vec::new(); n];
        for (s, t, _, _, entry) in resolved {
            let TransEntry::Function(f) = entry else { unreachable!() };
            rows[s].push((t, f));
        }
        Ok(Model::Pmc(Pmc::new(states, labels, initial, params, rows)?))
    }
}

#[derive(Debug, Clone)]
enum TransEntry {
    Function(RationalFunction),
    Interval(Rational, Rational),
}
