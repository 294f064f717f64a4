//! Seeded generators for benchmark and test inputs: random formulas, lasso
//! words, concrete chains, and a Crowds-style parametric protocol model.

use std::collections::BTreeSet;

use rand::seq::index::sample;
use rand::Rng;

use crate::gba::elementary;
use crate::ltl::{Formula, LassoWord, Letter};
use crate::pmc::{rat, Param, Pmc, Polynomial, RationalFunction};

/// A random formula over `props` with at most `depth` nested operators.
pub fn random_formula<R: Rng>(rng: &mut R, props: &[&str], depth: usize) -> Formula {
    if depth == 0 || rng.gen_ratio(1, 5) {
        return match rng.gen_range(0..10) {
            0 => Formula::True,
            _ => Formula::atom(props[rng.gen_range(0..props.len())]),
        };
    }
    let sub = |rng: &mut R| random_formula(rng, props, depth - 1);
    match rng.gen_range(0..8) {
        0 => Formula::not(sub(rng)),
        1 => Formula::and(sub(rng), sub(rng)),
        2 => Formula::or(sub(rng), sub(rng)),
        3 => Formula::next(sub(rng)),
        4 => Formula::until(sub(rng), sub(rng)),
        5 => Formula::eventually(sub(rng)),
        6 => Formula::always(sub(rng)),
        _ => Formula::implies(sub(rng), sub(rng)),
    }
}

/// A random formula with `1 ≤ |el(φ)| ≤ max_el`.
pub fn random_temporal_formula<R: Rng>(rng: &mut R, props: &[&str], max_el: usize) -> Formula {
    loop {
        let depth = rng.gen_range(1..=4);
        let f = random_formula(rng, props, depth);
        let n = elementary(&f).len();
        if (1..=max_el).contains(&n) {
            return f;
        }
    }
}

fn random_letter<R: Rng>(rng: &mut R, props: &[&str]) -> Letter {
    Letter::new(props.iter().filter(|_| rng.gen_bool(0.5)).copied())
}

/// A lasso with `|stem| ≤ max_stem` and `1 ≤ |loop| ≤ max_loop`.
pub fn random_lasso<R: Rng>(rng: &mut R, props: &[&str], max_stem: usize, max_loop: usize) -> LassoWord {
    let stem = (0..rng.gen_range(0..=max_stem)).map(|_| random_letter(rng, props)).collect();
    let cycle = (0..rng.gen_range(1..=max_loop)).map(|_| random_letter(rng, props)).collect();
    LassoWord::new(stem, cycle).expect("nonempty loop")
}

/// Splits 1 into `k` positive multiples of `1/2^bits`.
fn dyadic_split<R: Rng>(rng: &mut R, k: usize, bits: u32) -> Vec<(i64, i64)> {
    let total = 1i64 << bits;
    let mut cuts: Vec<i64> = sample(rng, (total - 1) as usize, k - 1)
        .into_iter()
        .map(|c| c as i64 + 1)
        .collect();
    cuts.sort_unstable();
    let mut parts = Vec::with_capacity(k);
    let mut prev = 0;
    for c in cuts.into_iter().chain([total]) {
        parts.push((c - prev, total));
        prev = c;
    }
    parts
}

/// A concrete chain with `n` states, out-degree between 1 and `max_degree`,
/// dyadic probabilities, and each proposition holding with probability 1/2.
pub fn random_chain<R: Rng>(rng: &mut R, n: usize, max_degree: usize, props: &[&str]) -> Pmc {
    let states: Vec<String> = (0..n).map(|i| format!("s{i}")).collect();
    let labels: Vec<BTreeSet<String>> = (0..n)
        .map(|_| props.iter().filter(|_| rng.gen_bool(0.5)).map(|p| p.to_string()).collect())
        .collect();
    let rows = (0..n)
        .map(|_| {
            let k = rng.gen_range(1..=max_degree.min(n));
            let targets = sample(rng, n, k).into_vec();
            let probs = dyadic_split(rng, k, 4);
            targets
                .into_iter()
                .zip(probs)
                .map(|(t, (a, b))| (t, RationalFunction::constant(rat(a, b))))
                .collect()
        })
        .collect();
    Pmc::new(states, labels, 0, Vec::new(), rows).expect("generated chain is valid")
}

/// A large sparse chain for timing: state `i` moves to `i+1` and to `degree-1`
/// random states, uniformly.
pub fn sparse_chain<R: Rng>(rng: &mut R, n: usize, degree: usize, props: &[&str]) -> Pmc {
    let states: Vec<String> = (0..n).map(|i| format!("s{i}")).collect();
    let labels: Vec<BTreeSet<String>> = (0..n)
        .map(|_| props.iter().filter(|_| rng.gen_bool(0.5)).map(|p| p.to_string()).collect())
        .collect();
    let rows = (0..n)
        .map(|i| {
            let mut targets = BTreeSet::from([(i + 1) % n]);
            while targets.len() < degree.min(n) {
                targets.insert(rng.gen_range(0..n));
            }
            let p = RationalFunction::constant(rat(1, targets.len() as i64));
            targets.into_iter().map(|t| (t, p.clone())).collect()
        })
        .collect();
    Pmc::new(states, labels, 0, Vec::new(), rows).expect("generated chain is valid")
}

/// A Crowds-style anonymity protocol run `runs` times in a loop.
///
/// In each run the initiator hands the message to a crowd member, which is
/// corrupt with probability `badC`; an honest member forwards with
/// probability `pf` and delivers otherwise. Hop counts are tracked up to
/// `hops`, and the number of runs in which the initiator was observed is
/// tracked as well. Labels: `newInstance` on run starts, `run0` on states of
/// the first run, `obs` when a corrupt member receives the message.
pub fn crowds(runs: usize, hops: usize) -> Pmc {
    let pf = Polynomial::var("pf");
    let bad = Polynomial::var("badC");
    let one = Polynomial::one();
    let f = |p: Polynomial| RationalFunction::new(p, Polynomial::one()).expect("unit denominator");
    let p_bad = f(bad.clone());
    let p_good = f(&one - &bad);
    let p_fwd_bad = f(&pf * &bad);
    let p_fwd_good = f(&pf * &(&one - &bad));
    let p_deliver = f(&one - &pf);
    let certain = RationalFunction::one();

    // per (run, observed) block: start, hop 1..=hops, caught, delivered
    let block = hops + 3;
    let pairs: Vec<(usize, usize)> = (0..runs).flat_map(|r| (0..=r).map(move |k| (r, k))).collect();
    let base = |r: usize, k: usize| pairs.iter().position(|&p| p == (r, k)).expect("pair") * block;
    let start = |r, k| base(r, k);
    let hop = |r, k, j: usize| base(r, k) + j;
    let caught = |r, k| base(r, k) + hops + 1;
    let delivered = |r, k| base(r, k) + hops + 2;
    let next_run = |r: usize, k: usize| {
        if r + 1 < runs {
            start(r + 1, k.min(r + 1))
        } else {
            start(0, 0)
        }
    };

    let n = pairs.len() * block;
    let mut states = vec![String::new(); n];
    let mut labels = vec![BTreeSet::new(); n];
    let mut rows = vec![Vec::new(); n];
    for &(r, k) in &pairs {
        let mut tag = |s: usize, name: String, props: &[&str]| {
            states[s] = name;
            labels[s] = props.iter().map(|p| p.to_string()).collect();
            if r == 0 {
                labels[s].insert("run0".to_string());
            }
        };
        tag(start(r, k), format!("start_{r}_{k}"), &["newInstance"]);
        for j in 1..=hops {
            tag(hop(r, k, j), format!("hop_{r}_{k}_{j}"), &[]);
        }
        tag(caught(r, k), format!("caught_{r}_{k}"), &["obs"]);
        tag(delivered(r, k), format!("delivered_{r}_{k}"), &[]);

        rows[start(r, k)] = vec![(caught(r, k), p_bad.clone()), (hop(r, k, 1), p_good.clone())];
        for j in 1..=hops {
            rows[hop(r, k, j)] = vec![
                (caught(r, k), p_fwd_bad.clone()),
                (hop(r, k, (j + 1).min(hops)), p_fwd_good.clone()),
                (delivered(r, k), p_deliver.clone()),
            ];
        }
        rows[caught(r, k)] = vec![(next_run(r, k + 1), certain.clone())];
        rows[delivered(r, k)] = vec![(next_run(r, k), certain.clone())];
    }
    let params = vec![
        Param::closed("badC", rat(1, 10), rat(9, 10)),
        Param::closed("pf", rat(1, 10), rat(9, 10)),
    ];
    Pmc::new(states, labels, 0, params, rows).expect("crowds model is valid")
}
