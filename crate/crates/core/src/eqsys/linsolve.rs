//! Exact sparse Gauss-Jordan elimination over the rationals.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_traits::{One, Zero};
use thiserror::Error;

use crate::pmc::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error("linear system is inconsistent (equation {equation} reduces to 0 = {rhs})")]
    Inconsistent { equation: usize, rhs: Rational },
    #[error("linear system is underdetermined: rank {rank} for {unknowns} unknowns")]
    Underdetermined {
        rank: usize,
        unknowns: usize,
        free: Vec<usize>,
    },
}

/// `Σ coeffs[i] · x_i = rhs`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LinearEquation {
    pub coeffs: BTreeMap<usize, Rational>,
    pub rhs: Rational,
}

impl LinearEquation {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, var: usize, c: &Rational) {
        if c.is_zero() {
            return;
        }
        let e = self.coeffs.entry(var).or_insert_with(Rational::zero);
        *e += c;
        if e.is_zero() {
            self.coeffs.remove(&var);
        }
    }
}

/// Incremental elimination keeping every pivot row fully reduced.
#[derive(Debug, Default)]
struct Eliminator {
    /// pivot variable -> row with coefficient 1 on the pivot and no other pivot
    pivots: HashMap<usize, LinearEquation>,
    /// non-pivot variable -> pivots whose rows mention it
    occurs: HashMap<usize, BTreeSet<usize>>,
}

impl Eliminator {
    fn reduce(&self, mut eq: LinearEquation) -> LinearEquation {
        let hits: Vec<usize> = eq.coeffs.keys().copied().filter(|v| self.pivots.contains_key(v)).collect();
        for v in hits {
            let c = match eq.coeffs.get(&v) {
                Some(c) => c.clone(),
                None => continue,
            };
            let row = &self.pivots[&v];
            for (&w, a) in &row.coeffs {
                eq.add(w, &(-(&c * a)));
            }
            eq.rhs -= &c * &row.rhs;
        }
        eq
    }

    fn insert(&mut self, index: usize, eq: LinearEquation) -> Result<(), SolveError> {
        let mut eq = self.reduce(eq);
        if eq.coeffs.is_empty() {
            if eq.rhs.is_zero() {
                return Ok(());
            }
            return Err(SolveError::Inconsistent {
                equation: index,
                rhs: eq.rhs,
            });
        }
        let pivot = *eq
            .coeffs
            .keys()
            .min_by_key(|v| (self.occurs.get(v).map_or(0, BTreeSet::len), **v))
            .expect("nonempty row");
        let inv = eq.coeffs[&pivot].recip();
        if !inv.is_one() {
            for c in eq.coeffs.values_mut() {
                *c *= &inv;
            }
            eq.rhs *= &inv;
        }

        // eliminate the new pivot from existing rows
        if let Some(users) = self.occurs.remove(&pivot) {
            for p in users {
                let row = self.pivots.get_mut(&p).expect("pivot row");
                let c = match row.coeffs.remove(&pivot) {
                    Some(c) => c,
                    None => continue,
                };
                for (&w, a) in &eq.coeffs {
                    if w == pivot {
                        continue;
                    }
                    let before = row.coeffs.contains_key(&w);
                    row.add(w, &(-(&c * a)));
                    let after = row.coeffs.contains_key(&w);
                    if before && !after {
                        if let Some(s) = self.occurs.get_mut(&w) {
                            s.remove(&p);
                        }
                    } else if !before && after {
                        self.occurs.entry(w).or_default().insert(p);
                    }
                }
                row.rhs -= &c * &eq.rhs;
            }
        }
        for &w in eq.coeffs.keys() {
            if w != pivot {
                self.occurs.entry(w).or_default().insert(pivot);
            }
        }
        self.pivots.insert(pivot, eq);
        Ok(())
    }
}

/// Solves for `x_0 … x_{n-1}`, requiring a unique solution.
pub fn solve(n: usize, equations: impl IntoIterator<Item = LinearEquation>) -> Result<Vec<Rational>, SolveError> {
    let mut el = Eliminator::default();
    for (i, eq) in equations.into_iter().enumerate() {
        el.insert(i, eq)?;
    }
    if el.pivots.len() < n {
        let mut free: Vec<usize> = (0..n).filter(|v| !el.pivots.contains_key(v)).collect();
        free.truncate(16);
        return Err(SolveError::Underdetermined {
            rank: el.pivots.len(),
            unknowns: n,
            free,
        });
    }
    let mut x = vec![Rational::zero(); n];
    for (v, row) in el.pivots {
        debug_assert_eq!(row.coeffs.len(), 1);
        x[v] = row.rhs;
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pmc::rat;

    fn eq(terms: &[(usize, i64)], rhs: i64) -> LinearEquation {
        let mut e = LinearEquation::new();
        for &(v, c) in terms {
            e.add(v, &rat(c, 1));
        }
        e.rhs = rat(rhs, 1);
        e
    }

    #[test]
    fn two_by_two() {
        // x + y = 3, x - y = 1
        let x = solve(2, [eq(&[(0, 1), (1, 1)], 3), eq(&[(0, 1), (1, -1)], 1)]).unwrap();
        assert_eq!(x, vec![rat(2, 1), rat(1, 1)]);
    }

    #[test]
    fn redundant_equations_are_fine() {
        let x = solve(
            2,
            [eq(&[(0, 1), (1, 1)], 3), eq(&[(0, 2), (1, 2)], 6), eq(&[(0, 1)], 1)],
        )
        .unwrap();
        assert_eq!(x, vec![rat(1, 1), rat(2, 1)]);
    }

    #[test]
    fn inconsistent() {
        let err = solve(1, [eq(&[(0, 1)], 1), eq(&[(0, 1)], 2)]).unwrap_err();
        assert!(matches!(err, SolveError::Inconsistent { equation: 1, .. }));
    }

    #[test]
    fn underdetermined() {
        let err = solve(2, [eq(&[(0, 1), (1, 1)], 1)]).unwrap_err();
        assert!(matches!(err, SolveError::Underdetermined { rank: 1, unknowns: 2, .. }));
    }

    #[test]
    fn fractional_chain() {
        // x0 = 1/2 x1 + 1/2 x2, x1 = 1, x2 = 0
        let mut e0 = LinearEquation::new();
        e0.add(0, &rat(1, 1));
        e0.add(1, &rat(-1, 2));
        e0.add(2, &rat(-1, 2));
        let x = solve(3, [e0, eq(&[(1, 1)], 1), eq(&[(2, 1)], 0)]).unwrap();
        assert_eq!(x[0], rat(1, 2));
    }
}
