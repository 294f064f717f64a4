use num_traits::Zero;
use rayon::prelude::*;

use crate::pmc::{Evaluation, Param, Rational};

use super::{EqsysError, EquationSystem, PltlQuery};

/// Result of a grid search. Finding nothing is not a proof of infeasibility.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GridOutcome {
    Witness {
        evaluation: Evaluation,
        probability: Rational,
    },
    InfeasibleOnGrid {
        points: u64,
    },
}

/// `n` evenly spaced points of a bounded domain, keeping clear of open ends.
pub fn grid_points(p: &Param, n: usize) -> Result<Vec<Rational>, EqsysError> {
    let (lo, hi) = match (&p.lower, &p.upper) {
        (Some(lo), Some(hi)) => (lo.clone(), hi.clone()),
        _ => return Err(EqsysError::UnboundedParam(p.name.clone())),
    };
    if n == 0 {
        return Err(EqsysError::GridSize(n));
    }
    if lo == hi {
        return Ok(if p.contains(&lo) { vec![lo] } else { Vec::new() });
    }
    let width = &hi - &lo;
    // index range over a uniform subdivision with `gaps` intervals
    let (first, gaps) = match (p.lower_strict, p.upper_strict) {
        (false, false) if n == 1 => return Ok(vec![(&lo + &hi) / Rational::from_integer(2.into())]),
        (false, false) => (0, n - 1),
        (true, true) => (1, n + 1),
        _ => (usize::from(p.lower_strict), n),
    };
    let step = width / Rational::from_integer((gaps as i64).into());
    Ok((0..n)
        .map(|k| &lo + &step * Rational::from_integer(((first + k) as i64).into()))
        .collect())
}

/// Solves the system at every well-defined point of a uniform grid over the
/// parameter box and returns the first point whose probability lies in the
/// query interval.
pub fn synth_grid(sys: &EquationSystem, query: &PltlQuery, resolution: usize) -> Result<GridOutcome, EqsysError> {
    let params = sys.model().params();
    let axes: Vec<Vec<Rational>> = params
        .iter()
        .map(|p| grid_points(p, resolution))
        .collect::<Result<_, _>>()?;
    let total = axes
        .iter()
        .try_fold(1u64, |acc, a| acc.checked_mul(a.len() as u64))
        .ok_or(EqsysError::GridSize(resolution))?;
    if total.is_zero() {
        return Ok(GridOutcome::InfeasibleOnGrid { points: 0 });
    }

    let point = |mut idx: u64| {
        let mut v = Evaluation::new();
        for (p, axis) in params.iter().zip(&axes).rev() {
            let len = axis.len() as u64;
            v.insert(&p.name, axis[(idx % len) as usize].clone());
            idx /= len;
        }
        v
    };

    let found = (0..total).into_par_iter().find_map_first(|idx| {
        let v = point(idx);
        if sys.model().well_defined(&v).is_err() {
            return None;
        }
        match sys.solve_concrete(&v) {
            Ok(sol) if query.interval.contains(&sol.target) => Some(Ok((v, sol.target))),
            Ok(_) => None,
            Err(e) => Some(Err(e)),
        }
    });
    match found {
        Some(Ok((evaluation, probability))) => Ok(GridOutcome::Witness {
            evaluation,
            probability,
        }),
        Some(Err(e)) => Err(e),
        None => Ok(GridOutcome::InfeasibleOnGrid { points: total }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pmc::rat;

    #[test]
    fn closed_axis_hits_both_ends() {
        let p = Param::closed("p", rat(1, 5), rat(7, 10));
        let pts = grid_points(&p, 9).unwrap();
        assert_eq!(pts.first(), Some(&rat(1, 5)));
        assert_eq!(pts.last(), Some(&rat(7, 10)));
        assert_eq!(pts[6], rat(23, 40));
    }

    #[test]
    fn open_axis_avoids_ends() {
        let p = Param::open("e", rat(-1, 2), rat(1, 2));
        let pts = grid_points(&p, 9).unwrap();
        assert_eq!(pts.len(), 9);
        assert!(pts.iter().all(|x| p.contains(x)));
        assert_eq!(pts[4], rat(0, 1));
    }

    #[test]
    fn half_open_and_degenerate() {
        let mut p = Param::closed("h", rat(0, 1), rat(1, 1));
        p.upper_strict = true;
        let pts = grid_points(&p, 4).unwrap();
        assert_eq!(pts, vec![rat(0, 1), rat(1, 4), rat(1, 2), rat(3, 4)]);
        let d = Param::closed("d", rat(1, 1), rat(1, 1));
        assert_eq!(grid_points(&d, 5).unwrap(), vec![rat(1, 1)]);
    }

    #[test]
    fn unbounded_rejected() {
        assert!(matches!(
            grid_points(&Param::unbounded("u"), 3),
            Err(EqsysError::UnboundedParam(_))
        ));
    }
}
