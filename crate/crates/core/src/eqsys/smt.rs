//! SMT-LIB 2 output for synthesis, with a small reader used to check and
//! evaluate emitted files.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::pmc::{Param, Polynomial, Rational, RationalFunction};

use super::{EquationSystem, Interval, PltlQuery};

fn quote(name: &str) -> String {
    format!("|{name}|")
}

fn number(c: &Rational) -> String {
    let abs = c.abs();
    let body = if abs.is_integer() {
        format!("{}.0", abs.numer())
    } else {
        format!("(/ {}.0 {}.0)", abs.numer(), abs.denom())
    };
    if c.is_negative() {
        format!("(- {body})")
    } else {
        body
    }
}

fn polynomial(p: &Polynomial) -> String {
    let mut terms = Vec::new();
    for (mono, c) in p.terms() {
        let mut factors = Vec::new();
        if !c.is_one() || mono.is_empty() {
            factors.push(number(c));
        }
        for (x, &e) in mono {
            for _ in 0..e {
                factors.push(quote(x));
            }
        }
        terms.push(if factors.len() == 1 {
            factors.pop().unwrap()
        } else {
            format!("(* {})", factors.join(" "))
        });
    }
    match terms.len() {
        0 => "0.0".to_string(),
        1 => terms.pop().unwrap(),
        _ => format!("(+ {})", terms.join(" ")),
    }
}

fn function(f: &RationalFunction) -> String {
    let num = polynomial(f.numerator());
    if f.denominator().as_constant().is_some_and(|d| d.is_one()) {
        num
    } else {
        format!("(/ {num} {})", polynomial(f.denominator()))
    }
}

fn sum(items: Vec<String>) -> String {
    match items.len() {
        0 => "0.0".to_string(),
        1 => items.into_iter().next().unwrap(),
        _ => format!("(+ {})", items.join(" ")),
    }
}

fn conj(items: Vec<String>) -> String {
    match items.len() {
        0 => "true".to_string(),
        1 => items.into_iter().next().unwrap(),
        _ => format!("(and {})", items.join(" ")),
    }
}

fn param_domain(p: &Param) -> Option<String> {
    let x = quote(&p.name);
    let mut parts = Vec::new();
    if let Some(lo) = &p.lower {
        parts.push(format!("({} {} {x})", if p.lower_strict { "<" } else { "<=" }, number(lo)));
    }
    if let Some(hi) = &p.upper {
        parts.push(format!("({} {x} {})", if p.upper_strict { "<" } else { "<=" }, number(hi)));
    }
    (!parts.is_empty()).then(|| conj(parts))
}

fn interval(j: &Interval, x: &str) -> String {
    conj(vec![
        format!("({} {} {x})", if j.lower_strict { "<" } else { "<=" }, number(&j.lower)),
        format!("({} {x} {})", if j.upper_strict { "<" } else { "<=" }, number(&j.upper)),
    ])
}

/// Writes the system, the parameter side conditions and `target ∈ J` as a
/// QF_NRA problem. Declarations are sorted; the output is deterministic.
pub fn emit_smtlib(sys: &EquationSystem, query: &PltlQuery) -> String {
    let m = sys.model();
    let mut out = String::new();
    let n = sys.num_variables();
    let mu: Vec<String> = (0..n).map(|i| quote(&sys.symbol(i))).collect();

    writeln!(out, "; {query}").unwrap();
    writeln!(
        out,
        "; {} parameters, {} product nodes, {} normalised groups",
        m.params().len(),
        n,
        sys.positives().len()
    )
    .unwrap();
    if sys.target_is_zero() {
        writeln!(out, "; no locally positive SCC is reachable: target provably 0").unwrap();
    }
    writeln!(out, "(set-logic QF_NRA)").unwrap();

    let mut params: Vec<&Param> = m.params().iter().collect();
    params.sort_by(|a, b| a.name.cmp(&b.name));
    for p in &params {
        writeln!(out, "(declare-fun {} () Real)", quote(&p.name)).unwrap();
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| mu[i].cmp(&mu[j]));
    for &i in &order {
        writeln!(out, "(declare-fun {} () Real)", mu[i]).unwrap();
    }

    for p in &params {
        if let Some(d) = param_domain(p) {
            writeln!(out, "(assert {d})").unwrap();
        }
    }
    for s in 0..m.num_states() {
        if !m.is_parametric_row(s) {
            continue;
        }
        let mut row = Vec::new();
        for (_, f) in m.row(s) {
            let e = function(f);
            if f.as_constant().is_none() {
                writeln!(out, "(assert (> {e} 0.0))").unwrap();
            }
            row.push(e);
        }
        writeln!(out, "(assert (= {} 1.0))", sum(row)).unwrap();
    }

    for i in 0..n {
        let mut terms = Vec::new();
        for t in sys.flow(i) {
            let inner = sum(t.targets.iter().map(|&j| mu[j].clone()).collect());
            terms.push(if t.coefficient.as_constant().is_some_and(|c| c.is_one()) {
                inner
            } else {
                format!("(* {} {inner})", function(&t.coefficient))
            });
        }
        writeln!(out, "(assert (= {} {}))", mu[i], sum(terms)).unwrap();
    }
    for group in sys.positives() {
        let s = sum(group.iter().map(|&j| mu[j].clone()).collect());
        writeln!(out, "(assert (= {s} 1.0))").unwrap();
    }
    for i in sys.zeros() {
        writeln!(out, "(assert (= {} 0.0))", mu[i]).unwrap();
    }
    if n > 0 {
        let range = order
            .iter()
            .map(|&i| format!("(<= 0.0 {x}) (<= {x} 1.0)", x = mu[i]))
            .collect::<Vec<_>>()
            .join(" ");
        writeln!(out, "(assert (and {range}))").unwrap();
    }

    let target = sum(sys.target().iter().map(|&j| mu[j].clone()).collect());
    writeln!(out, "(define-fun target () Real {target})").unwrap();
    writeln!(out, "(assert {})", interval(&query.interval, "target")).unwrap();
    writeln!(out, "(check-sat)").unwrap();
    writeln!(out, "(get-model)").unwrap();
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SmtError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: undeclared symbol `{symbol}`")]
    Undeclared { line: usize, symbol: String },
    #[error("line {line}: symbol `{symbol}` declared twice")]
    Redeclared { line: usize, symbol: String },
    #[error("line {line}: unknown command `{command}`")]
    UnknownCommand { line: usize, command: String },
    #[error("cannot evaluate: {0}")]
    Eval(String),
}

#[derive(Debug, Clone, PartialEq)]
enum Sexp {
    Atom { text: String, quoted: bool, line: usize },
    List { items: Vec<Sexp>, line: usize },
}

impl Sexp {
    fn line(&self) -> usize {
        match self {
            Sexp::Atom { line, .. } | Sexp::List { line, .. } => *line,
        }
    }

    fn head(&self) -> Option<&str> {
        match self {
            Sexp::List { items, .. } => match items.first() {
                Some(Sexp::Atom { text, quoted: false, .. }) => Some(text),
                _ => None,
            },
            _ => None,
        }
    }
}

fn read(text: &str) -> Result<Vec<Sexp>, SmtError> {
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    let mut line = 1;
    let mut stack: Vec<(usize, Vec<Sexp>)> = Vec::new();
    let mut top = Vec::new();
    let syntax = |line, message: &str| SmtError::Syntax {
        line,
        message: message.to_string(),
    };
    let push = |stack: &mut Vec<(usize, Vec<Sexp>)>, top: &mut Vec<Sexp>, e: Sexp| match stack.last_mut() {
        Some((_, items)) => items.push(e),
        None => top.push(e),
    };
    while i < chars.len() {
        let c = chars[i];
        match c {
            '\n' => {
                line += 1;
                i += 1;
            }
            c if c.is_whitespace() => i += 1,
            ';' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '(' => {
                stack.push((line, Vec::new()));
                i += 1;
            }
            ')' => {
                let (l, items) = stack.pop().ok_or_else(|| syntax(line, "unbalanced `)`"))?;
                push(&mut stack, &mut top, Sexp::List { items, line: l });
                i += 1;
            }
            '|' => {
                let start = line;
                let mut j = i + 1;
                while j < chars.len() && chars[j] != '|' {
                    if chars[j] == '\\' {
                        return Err(syntax(line, "backslash in quoted symbol"));
                    }
                    if chars[j] == '\n' {
                        line += 1;
                    }
                    j += 1;
                }
                if j == chars.len() {
                    return Err(syntax(start, "unterminated quoted symbol"));
                }
                let text: String = chars[i + 1..j].iter().collect();
                push(&mut stack, &mut top, Sexp::Atom { text, quoted: true, line: start });
                i = j + 1;
            }
            '"' => {
                let start = line;
                let mut j = i + 1;
                loop {
                    match chars.get(j) {
                        None => return Err(syntax(start, "unterminated string")),
                        Some('"') if chars.get(j + 1) == Some(&'"') => j += 2,
                        Some('"') => break,
                        Some('\n') => {
                            line += 1;
                            j += 1
                        }
                        Some(_) => j += 1,
                    }
                }
                let text: String = chars[i..=j].iter().collect();
                push(&mut stack, &mut top, Sexp::Atom { text, quoted: false, line: start });
                i = j + 1;
            }
            _ => {
                let mut j = i;
                while j < chars.len() && !chars[j].is_whitespace() && !"()|;\"".contains(chars[j]) {
                    j += 1;
                }
                let text: String = chars[i..j].iter().collect();
                push(&mut stack, &mut top, Sexp::Atom { text, quoted: false, line });
                i = j;
            }
        }
    }
    if let Some((l, _)) = stack.last() {
        return Err(syntax(*l, "unbalanced `(`"));
    }
    Ok(top)
}

const BUILTINS: &[&str] = &[
    "true", "false", "and", "or", "not", "=>", "xor", "=", "distinct", "ite", "<", "<=", ">", ">=", "+", "-",
    "*", "/", "Real", "Bool", "Int",
];

fn is_numeral(s: &str) -> bool {
    let mut parts = s.splitn(2, '.');
    let int = parts.next().unwrap_or("");
    let frac = parts.next();
    !int.is_empty() && int.bytes().all(|b| b.is_ascii_digit()) && frac.is_none_or(|f| !f.is_empty() && f.bytes().all(|b| b.is_ascii_digit()))
}

fn simple_symbol(s: &str) -> bool {
    let ok = |c: char| c.is_ascii_alphanumeric() || "~!@$%^&*_-+=<>.?/".contains(c);
    !s.is_empty() && !s.starts_with(|c: char| c.is_ascii_digit()) && s.chars().all(ok)
}

/// Counts from a successful well-formedness check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SmtSummary {
    pub declarations: usize,
    pub definitions: usize,
    pub assertions: usize,
    pub commands: usize,
}

fn check_term(t: &Sexp, scope: &HashSet<String>) -> Result<(), SmtError> {
    match t {
        Sexp::Atom { text, quoted, line } => {
            if *quoted {
                if scope.contains(text) {
                    return Ok(());
                }
            } else if is_numeral(text) || text.starts_with('"') || BUILTINS.contains(&text.as_str()) || scope.contains(text) {
                return Ok(());
            } else if !simple_symbol(text) {
                return Err(SmtError::Syntax {
                    line: *line,
                    message: format!("malformed token `{text}`"),
                });
            }
            Err(SmtError::Undeclared {
                line: *line,
                symbol: text.clone(),
            })
        }
        Sexp::List { items, line } => {
            if items.is_empty() {
                return Err(SmtError::Syntax {
                    line: *line,
                    message: "empty application".to_string(),
                });
            }
            items.iter().try_for_each(|x| check_term(x, scope))
        }
    }
}

fn symbol_name(e: Option<&Sexp>, line: usize) -> Result<String, SmtError> {
    match e {
        Some(Sexp::Atom { text, quoted, .. }) if *quoted || simple_symbol(text) => Ok(text.clone()),
        _ => Err(SmtError::Syntax {
            line,
            message: "expected a symbol".to_string(),
        }),
    }
}

/// Checks balanced parentheses, quoted symbols, known commands and that
/// every symbol is declared before use.
pub fn check_smtlib(text: &str) -> Result<SmtSummary, SmtError> {
    let mut scope: HashSet<String> = HashSet::new();
    let mut summary = SmtSummary::default();
    for cmd in read(text)? {
        let line = cmd.line();
        let items = match &cmd {
            Sexp::List { items, .. } => items,
            Sexp::Atom { text, .. } => {
                return Err(SmtError::Syntax {
                    line,
                    message: format!("stray token `{text}` at top level"),
                })
            }
        };
        let head = cmd.head().ok_or_else(|| SmtError::Syntax {
            line,
            message: "command must start with a keyword".to_string(),
        })?;
        summary.commands += 1;
        match head {
            "set-logic" | "set-option" | "set-info" | "check-sat" | "get-model" | "exit" => {}
            "declare-fun" | "declare-const" | "define-fun" => {
                let name = symbol_name(items.get(1), line)?;
                if head == "define-fun" {
                    if items.len() != 5 {
                        return Err(SmtError::Syntax {
                            line,
                            message: "define-fun takes a name, arguments, sort and body".to_string(),
                        });
                    }
                    check_term(&items[4], &scope)?;
                    summary.definitions += 1;
                } else {
                    summary.declarations += 1;
                }
                if !scope.insert(name.clone()) {
                    return Err(SmtError::Redeclared { line, symbol: name });
                }
            }
            "assert" => {
                if items.len() != 2 {
                    return Err(SmtError::Syntax {
                        line,
                        message: "assert takes one term".to_string(),
                    });
                }
                check_term(&items[1], &scope)?;
                summary.assertions += 1;
            }
            other => {
                return Err(SmtError::UnknownCommand {
                    line,
                    command: other.to_string(),
                })
            }
        }
    }
    Ok(summary)
}

#[derive(Debug, Clone, PartialEq)]
enum Value {
    Num(Rational),
    Bool(bool),
}

fn parse_numeral(s: &str) -> Rational {
    match s.split_once('.') {
        None => Rational::from_integer(s.parse::<BigInt>().expect("numeral")),
        Some((i, f)) => {
            let digits: BigInt = format!("{i}{f}").parse().expect("numeral");
            Rational::new(digits, num_traits::pow(BigInt::from(10), f.len()))
        }
    }
}

fn eval(t: &Sexp, env: &HashMap<String, Value>) -> Result<Value, SmtError> {
    let fail = |m: String| SmtError::Eval(m);
    match t {
        Sexp::Atom { text, quoted, .. } => {
            if !quoted {
                if text == "true" {
                    return Ok(Value::Bool(true));
                }
                if text == "false" {
                    return Ok(Value::Bool(false));
                }
                if is_numeral(text) {
                    return Ok(Value::Num(parse_numeral(text)));
                }
            }
            env.get(text).cloned().ok_or_else(|| fail(format!("no value for `{text}`")))
        }
        Sexp::List { items, .. } => {
            let op = t.head().ok_or_else(|| fail("application without operator".into()))?;
            let args: Vec<Value> = items[1..].iter().map(|a| eval(a, env)).collect::<Result<_, _>>()?;
            let nums = || -> Result<Vec<Rational>, SmtError> {
                args.iter()
                    .map(|v| match v {
                        Value::Num(x) => Ok(x.clone()),
                        Value::Bool(_) => Err(fail(format!("`{op}` expects numbers"))),
                    })
                    .collect()
            };
            let bools = || -> Result<Vec<bool>, SmtError> {
                args.iter()
                    .map(|v| match v {
                        Value::Bool(b) => Ok(*b),
                        Value::Num(_) => Err(fail(format!("`{op}` expects booleans"))),
                    })
                    .collect()
            };
            let chain = |f: fn(&Rational, &Rational) -> bool| -> Result<Value, SmtError> {
                let xs = nums()?;
                Ok(Value::Bool(xs.windows(2).all(|w| f(&w[0], &w[1]))))
            };
            match op {
                "+" => Ok(Value::Num(nums()?.iter().sum())),
                "*" => Ok(Value::Num(nums()?.iter().fold(Rational::one(), |a, b| a * b))),
                "-" => {
                    let xs = nums()?;
                    match xs.len() {
                        1 => Ok(Value::Num(-&xs[0])),
                        0 => Err(fail("`-` without arguments".into())),
                        _ => Ok(Value::Num(xs[1..].iter().fold(xs[0].clone(), |a, b| a - b))),
                    }
                }
                "/" => {
                    let xs = nums()?;
                    let mut acc = xs.first().cloned().ok_or_else(|| fail("`/` without arguments".into()))?;
                    for d in &xs[1..] {
                        if d.is_zero() {
                            return Err(fail("division by zero".into()));
                        }
                        acc /= d;
                    }
                    Ok(Value::Num(acc))
                }
                "<" => chain(|a, b| a < b),
                "<=" => chain(|a, b| a <= b),
                ">" => chain(|a, b| a > b),
                ">=" => chain(|a, b| a >= b),
                "=" => Ok(Value::Bool(args.windows(2).all(|w| w[0] == w[1]))),
                "distinct" => Ok(Value::Bool(
                    (0..args.len()).all(|i| (i + 1..args.len()).all(|j| args[i] != args[j])),
                )),
                "and" => Ok(Value::Bool(bools()?.iter().all(|&b| b))),
                "or" => Ok(Value::Bool(bools()?.iter().any(|&b| b))),
                "xor" => Ok(Value::Bool(bools()?.iter().fold(false, |a, &b| a ^ b))),
                "not" => Ok(Value::Bool(!bools()?.first().copied().unwrap_or(false))),
                "=>" => {
                    let bs = bools()?;
                    Ok(Value::Bool(bs.len() == 2 && (!bs[0] || bs[1])))
                }
                "ite" => match args.as_slice() {
                    [Value::Bool(c), a, b] => Ok(if *c { a.clone() } else { b.clone() }),
                    _ => Err(fail("malformed `ite`".into())),
                },
                other => Err(fail(format!("unsupported operator `{other}`"))),
            }
        }
    }
}

/// Outcome of substituting an assignment into an emitted file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmtEvaluation {
    pub assertions: usize,
    /// Zero-based indices of assertions that evaluate to false.
    pub violated: Vec<usize>,
    /// Values of the nullary `define-fun`s.
    pub definitions: BTreeMap<String, Rational>,
}

impl SmtEvaluation {
    pub fn satisfied(&self) -> bool {
        self.violated.is_empty()
    }
}

/// Evaluates every assertion of a well-formed file under `assignment`, which
/// must give a value to each declared constant.
pub fn evaluate_smtlib(text: &str, assignment: &BTreeMap<String, Rational>) -> Result<SmtEvaluation, SmtError> {
    check_smtlib(text)?;
    let mut env: HashMap<String, Value> =
        assignment.iter().map(|(k, v)| (k.clone(), Value::Num(v.clone()))).collect();
    let mut result = SmtEvaluation {
        assertions: 0,
        violated: Vec::new(),
        definitions: BTreeMap::new(),
    };
    for cmd in read(text)? {
        let Sexp::List { items, .. } = &cmd else { continue };
        match cmd.head() {
            Some("define-fun") => {
                let name = symbol_name(items.get(1), cmd.line())?;
                let v = eval(&items[4], &env)?;
                if let Value::Num(x) = &v {
                    result.definitions.insert(name.clone(), x.clone());
                }
                env.insert(name, v);
            }
            Some("declare-fun") | Some("declare-const") => {
                let name = symbol_name(items.get(1), cmd.line())?;
                if !env.contains_key(&name) {
                    return Err(SmtError::Eval(format!("no value for `{name}`")));
                }
            }
            Some("assert") => {
                match eval(&items[1], &env)? {
                    Value::Bool(true) => {}
                    Value::Bool(false) => result.violated.push(result.assertions),
                    Value::Num(_) => return Err(SmtError::Eval("assertion is not boolean".into())),
                }
                result.assertions += 1;
            }
            _ => {}
        }
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pmc::rat;

    #[test]
    fn numbers() {
        assert_eq!(number(&rat(1, 2)), "(/ 1.0 2.0)");
        assert_eq!(number(&rat(-3, 1)), "(- 3.0)");
        assert_eq!(number(&rat(0, 1)), "0.0");
        assert_eq!(parse_numeral("0.125"), rat(1, 8));
    }

    #[test]
    fn checker_accepts_and_counts() {
        let text = "; c\n(set-logic QF_NRA)\n(declare-fun |a b| () Real)\n(declare-fun x () Real)\n\
                    (assert (and (<= 0.0 |a b|) (< x (/ 1.0 2.0))))\n(define-fun t () Real (+ x |a b|))\n\
                    (assert (= t 1.0))\n(check-sat)\n(get-model)\n";
        let s = check_smtlib(text).unwrap();
        assert_eq!(s.declarations, 2);
        assert_eq!(s.definitions, 1);
        assert_eq!(s.assertions, 2);
    }

    #[test]
    fn checker_rejects() {
        assert!(matches!(check_smtlib("(assert (= x 1.0))"), Err(SmtError::Undeclared { .. })));
        assert!(matches!(check_smtlib("(set-logic QF_NRA"), Err(SmtError::Syntax { .. })));
        assert!(matches!(check_smtlib("(check-sat))"), Err(SmtError::Syntax { .. })));
        assert!(matches!(check_smtlib("(frobnicate)"), Err(SmtError::UnknownCommand { .. })));
        assert!(matches!(
            check_smtlib("(declare-fun x () Real)(declare-fun x () Real)"),
            Err(SmtError::Redeclared { .. })
        ));
        assert!(matches!(check_smtlib("(declare-fun |x () Real)"), Err(SmtError::Syntax { .. })));
        assert!(matches!(check_smtlib("(assert (+ 1.0 |y|))"), Err(SmtError::Undeclared { .. })));
    }

    #[test]
    fn evaluator() {
        let text = "(declare-fun x () Real)(define-fun t () Real (* 2.0 x))\
                    (assert (= t 1.0))(assert (< x (- 1.0)))";
        let r = evaluate_smtlib(text, &BTreeMap::from([("x".to_string(), rat(1, 2))])).unwrap();
        assert_eq!(r.assertions, 2);
        assert_eq!(r.violated, vec![1]);
        assert_eq!(r.definitions["t"], rat(1, 1));
    }
}
