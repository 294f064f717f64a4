use thiserror::Error;

use super::Formula;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LtlError {
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unknown operator `{op}` at {line}:{column}")]
    UnknownOperator {
        line: usize,
        column: usize,
        op: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    True,
    False,
    Not,
    Next,
    Eventually,
    Always,
    Until,
    And,
    Or,
    Implies,
    LParen,
    RParen,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::True => "`true`".into(),
            Tok::False => "`false`".into(),
            Tok::Not => "`!`".into(),
            Tok::Next => "`X`".into(),
            Tok::Eventually => "`F`".into(),
            Tok::Always => "`G`".into(),
            Tok::Until => "`U`".into(),
            Tok::And => "`&`".into(),
            Tok::Or => "`|`".into(),
            Tok::Implies => "`->`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

// Identifiers reserved for temporal operators this grammar does not support.
const UNSUPPORTED_OPERATORS: &[&str] = &["R", "W", "M", "V"];

fn tokenize(text: &str) -> Result<Vec<(Tok, usize, usize)>, LtlError> {
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
            col += 1;
            i += 1;
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            col += i - start;
            let tok = match word.as_str() {
                "true" => Tok::True,
                "false" => Tok::False,
                "X" => Tok::Next,
                "F" => Tok::Eventually,
                "G" => Tok::Always,
                "U" => Tok::Until,
                w if UNSUPPORTED_OPERATORS.contains(&w) => {
                    return Err(LtlError::UnknownOperator {
                        line: tl,
                        column: tc,
                        op: word,
                    })
                }
                _ => Tok::Ident(word),
            };
            out.push((tok, tl, tc));
            continue;
        }
        let tok = match c {
            '!' => Tok::Not,
            '&' => Tok::And,
            '|' => Tok::Or,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '-' if chars.get(i + 1) == Some(&'>') => {
                i += 1;
                col += 1;
                Tok::Implies
            }
            _ => {
                let start = i;
                let mut end = i + 1;
                while end < chars.len()
                    && !chars[end].is_whitespace()
                    && !chars[end].is_ascii_alphanumeric()
                    && !matches!(chars[end], '(' | ')' | '_')
                {
                    end += 1;
                }
                return Err(LtlError::UnknownOperator {
                    line: tl,
                    column: tc,
                    op: chars[start..end].iter().collect(),
                });
            }
        };
        out.push((tok, tl, tc));
        i += 1;
        col += 1;
    }
    out.push((Tok::Eof, line, col));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize, usize)>,
    pos: usize,
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

    fn error(&self, message: String) -> LtlError {
        let (_, line, column) = self.toks[self.pos];
        LtlError::Syntax {
            line,
            column,
            message,
        }
    }

    fn implies(&mut self) -> Result<Formula, LtlError> {
        let lhs = self.or()?;
        if *self.peek() == Tok::Implies {
            self.bump();
            let rhs = self.implies()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Formula, LtlError> {
        let mut lhs = self.and()?;
        while *self.peek() == Tok::Or {
            self.bump();
            let rhs = self.and()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Formula, LtlError> {
        let mut lhs = self.until()?;
        while *self.peek() == Tok::And {
            self.bump();
            let rhs = self.until()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn until(&mut self) -> Result<Formula, LtlError> {
        let lhs = self.unary()?;
        if *self.peek() == Tok::Until {
            self.bump();
            let rhs = self.until()?;
            return Ok(Formula::until(lhs, rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, LtlError> {
        match self.peek() {
            Tok::Not => {
                self.bump();
                Ok(Formula::not(self.unary()?))
            }
            Tok::Next => {
                self.bump();
                Ok(Formula::next(self.unary()?))
            }
            Tok::Eventually => {
                self.bump();
                Ok(Formula::eventually(self.unary()?))
            }
            Tok::Always => {
                self.bump();
                Ok(Formula::always(self.unary()?))
            }
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> Result<Formula, LtlError> {
        match self.peek().clone() {
            Tok::True => {
                self.bump();
                Ok(Formula::True)
            }
            Tok::False => {
                self.bump();
                Ok(Formula::falsity())
            }
            Tok::Ident(name) => {
                self.bump();
                Ok(Formula::Atom(name))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.implies()?;
                if *self.peek() != Tok::RParen {
                    return Err(self.error(format!("expected `)`, found {}", self.peek().describe())));
                }
                self.bump();
                Ok(inner)
            }
            other => Err(self.error(format!("expected a formula, found {}", other.describe()))),
        }
    }
}

/// Parses a formula and lowers derived operators to the core connectives.
pub fn parse_formula(text: &str) -> Result<Formula, LtlError> {
    let mut p = Parser {
        toks: tokenize(text)?,
        pos: 0,
    };
    let f = p.implies()?;
    if *p.peek() != Tok::Eof {
        return Err(p.error(format!("unexpected {}", p.peek().describe())));
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a() -> Formula {
        Formula::atom("a")
    }
    fn b() -> Formula {
        Formula::atom("b")
    }

    #[test]
    fn until_production() {
        assert_eq!(parse_formula("a U b").unwrap(), Formula::until(a(), b()));
    }

    #[test]
    fn gf_lowering() {
        let t = Formula::True;
        let expected = Formula::not(Formula::until(
            t.clone(),
            Formula::not(Formula::until(t, a())),
        ));
        assert_eq!(parse_formula("G F a").unwrap(), expected);
    }

    #[test]
    fn implication_lowering() {
        let expected = Formula::not(Formula::and(a(), Formula::not(Formula::next(b()))));
        assert_eq!(parse_formula("a -> X b").unwrap(), expected);
    }

    #[test]
    fn precedence_and_associativity() {
        // `->` binds weakest and associates to the right
        assert_eq!(
            parse_formula("a -> b -> a").unwrap(),
            Formula::implies(a(), Formula::implies(b(), a()))
        );
        // `U` binds tighter than `&`, and associates to the right
        assert_eq!(
            parse_formula("a & b U a U b").unwrap(),
            Formula::and(a(), Formula::until(b(), Formula::until(a(), b())))
        );
        assert_eq!(
            parse_formula("a | b & a").unwrap(),
            Formula::or(a(), Formula::and(b(), a()))
        );
        assert_eq!(
            parse_formula("!a U b").unwrap(),
            Formula::until(Formula::not(a()), b())
        );
    }

    #[test]
    fn constants() {
        assert_eq!(parse_formula("true").unwrap(), Formula::True);
        assert_eq!(parse_formula("false").unwrap(), Formula::falsity());
    }

    #[test]
    fn syntax_error_reports_position() {
        match parse_formula("a &\n  (b U") {
            Err(LtlError::Syntax { line, column, .. }) => assert_eq!((line, column), (2, 7)),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse_formula(""), Err(LtlError::Syntax { .. })));
        assert!(matches!(parse_formula("a b"), Err(LtlError::Syntax { .. })));
    }

    #[test]
    fn unknown_operators() {
        match parse_formula("a R b") {
            Err(LtlError::UnknownOperator { op, column, .. }) => {
                assert_eq!(op, "R");
                assert_eq!(column, 3);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            parse_formula("a <-> b"),
            Err(LtlError::UnknownOperator { .. })
        ));
        assert!(matches!(
            parse_formula("~a"),
            Err(LtlError::UnknownOperator { .. })
        ));
    }

    #[test]
    fn print_then_reparse() {
        for text in ["G F a", "a -> X b", "!(a U b) & X X a", "(a | b) U G !a", "false"] {
            let f = parse_formula(text).unwrap();
            assert_eq!(parse_formula(&f.to_string()).unwrap(), f, "{text}");
        }
    }
}
