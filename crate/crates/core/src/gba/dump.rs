//! Line-oriented automaton text format.
//!
//! ```text
//! aps a b
//! alphabet {} {a} {b} {a,b}
//! state q1
//! state q2
//! initial q1
//! edge q1 --{a}--> q2
//! acc 0: 0
//! ```
//!
//! Edges are numbered by their order in the file, starting at 0. `aps` and
//! `alphabet` are optional; by default they are taken from the edges. Text
//! after the state id on a `state` line is a description and is ignored, as
//! are `el` lines and `#` comments.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use super::{Gba, GbaBuilder, GbaError};

pub(super) fn write_gba(a: &Gba) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "aps {}", a.aps().join(" "));
    let letters: Vec<String> = a.alphabet().iter().map(|&l| a.letter_name(l)).collect();
    let _ = writeln!(out, "alphabet {}", letters.join(" "));
    if let Some(t) = a.tableau() {
        for (i, x) in t.elementary().iter().enumerate() {
            let _ = writeln!(out, "el {i} {x}");
        }
    }
    let id = |q: usize| -> String {
        if a.tableau().is_some() {
            q.to_string()
        } else {
            a.state_name(q)
        }
    };
    for q in 0..a.num_states() {
        if a.tableau().is_some() {
            let _ = writeln!(out, "state {} {}", q, a.state_name(q));
        } else {
            let _ = writeln!(out, "state {}", a.state_name(q));
        }
    }
    for &q in a.initial() {
        let _ = writeln!(out, "initial {}", id(q as usize));
    }
    for e in a.edges() {
        let _ = writeln!(
            out,
            "edge {} --{}--> {}",
            id(e.source as usize),
            a.letter_name(e.letter),
            id(e.target as usize)
        );
    }
    for (i, set) in a.acceptance().iter().enumerate() {
        let ids: Vec<String> = set.iter().map(|e| e.to_string()).collect();
        let _ = writeln!(out, "acc {i}: {}", ids.join(" "));
    }
    out
}

fn parse_letter(text: &str, line: usize) -> Result<Vec<String>, GbaError> {
    let inner = text
        .trim()
        .strip_prefix('{')
        .and_then(|t| t.strip_suffix('}'))
        .ok_or_else(|| GbaError::Parse {
            line,
            message: format!("expected a letter `{{a,b}}`, found `{text}`"),
        })?;
    Ok(inner
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(String::from)
        .collect())
}

/// Splits `{a} {a,b} {}` into its braced groups.
fn braced_groups(text: &str, line: usize) -> Result<Vec<&str>, GbaError> {
    let mut out = Vec::new();
    let mut rest = text.trim();
    while !rest.is_empty() {
        let end = rest.find('}').ok_or_else(|| GbaError::Parse {
            line,
            message: "unterminated letter".into(),
        })?;
        out.push(&rest[..=end]);
        rest = rest[end + 1..].trim_start();
    }
    Ok(out)
}

/// Reads an automaton written in the format produced by [`Gba::dump`].
pub fn parse_gba(text: &str) -> Result<Gba, GbaError> {
    let mut b = GbaBuilder::new();
    let mut edges: Vec<(String, Vec<String>, String)> = Vec::new();
    let mut acc: Vec<(usize, usize, Vec<usize>)> = Vec::new();
    let mut seen_states = BTreeSet::new();

    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (kw, rest) = content.split_once(char::is_whitespace).unwrap_or((content, ""));
        let rest = rest.trim();
        match kw {
            "aps" => {
                for p in rest.split_whitespace() {
                    b.ap(p);
                }
            }
            "alphabet" => {
                for g in braced_groups(rest, line)? {
                    b.letter(&parse_letter(g, line)?);
                }
            }
            "el" => {}
            "state" => {
                let id = rest.split_whitespace().next().ok_or_else(|| GbaError::Parse {
                    line,
                    message: "missing state id".into(),
                })?;
                if !seen_states.insert(id.to_string()) {
                    return Err(GbaError::DuplicateState(id.to_string()));
                }
                b.state(id);
            }
            "initial" => {
                for id in rest.split_whitespace() {
                    b.initial(id);
                }
            }
            "edge" => {
                let err = || GbaError::Parse {
                    line,
                    message: "expected `edge <src> --{..}--> <dst>`".into(),
                };
                let (src, tail) = rest.split_once("--").ok_or_else(err)?;
                let (letter, dst) = tail.split_once("-->").ok_or_else(err)?;
                let (src, dst) = (src.trim(), dst.trim());
                if src.is_empty() || dst.is_empty() || dst.contains(char::is_whitespace) {
                    return Err(err());
                }
                edges.push((src.to_string(), parse_letter(letter, line)?, dst.to_string()));
            }
            "acc" => {
                let (idx, ids) = rest.split_once(':').ok_or_else(|| GbaError::Parse {
                    line,
                    message: "expected `acc <i>: <edge ids>`".into(),
                })?;
                let idx: usize = idx.trim().parse().map_err(|_| GbaError::Parse {
                    line,
                    message: format!("bad acceptance index `{}`", idx.trim()),
                })?;
                let ids = ids
                    .split_whitespace()
                    .map(|t| {
                        t.parse::<usize>().map_err(|_| GbaError::Parse {
                            line,
                            message: format!("bad edge id `{t}`"),
                        })
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                acc.push((line, idx, ids));
            }
            other => {
                return Err(GbaError::Parse {
                    line,
                    message: format!("unknown directive `{other}`"),
                })
            }
        }
    }

    for (s, l, d) in &edges {
        b.edge(s, l, d);
    }
    acc.sort_by_key(|(_, i, _)| *i);
    for (k, (line, idx, ids)) in acc.iter().enumerate() {
        if *idx != k {
            return Err(GbaError::Parse {
                line: *line,
                message: format!("acceptance sets must be numbered 0.. in order, found {idx}"),
            });
        }
        let mut set = Vec::with_capacity(ids.len());
        for &id in ids {
            let (s, l, d) = edges.get(id).ok_or(GbaError::UnknownEdge { set: k, edge: id })?;
            set.push((s.as_str(), l.as_slice(), d.as_str()));
        }
        b.acceptance_set(&set);
    }
    b.build()
}
