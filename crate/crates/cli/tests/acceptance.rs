use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pmc_core::corpus::{crowds, random_chain, random_lasso, random_temporal_formula, sparse_chain};
use pmc_core::eqsys::{
    check_smtlib, emit_smtlib, evaluate_smtlib, parse_query, Analysis, PipelineOptions,
};
use pmc_core::gba::{accepting_states, accepts_lasso, elementary, parse_gba, translate, Gba, GbaState};
use pmc_core::ltl::{atomic_props, eval_lasso, parse_formula, Formula};
use pmc_core::oracle::{closed_form, ConcreteMc};
use pmc_core::pmc::{parse_model, rat, Evaluation, Model, Pmc, Rational};
use pmc_core::product::{build_product, is_complete_oracle, is_complete_rd, Scope};

const BIN: &str = env!("CARGO_BIN_EXE_pmc-synth");
const MODELS: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../models");
const PROPS: &[&str] = &["a", "b"];
const FRAGMENT: &[&str] = &["F a", "G a", "G F a", "F G a", "a U b", "X a"];

fn seed() -> u64 {
    std::env::var("PMC_SYNTH_SEED")
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(0x5eed_2024)
}

fn model(name: &str) -> Pmc {
    let text = std::fs::read_to_string(Path::new(MODELS).join(name)).unwrap();
    parse_model(&text).unwrap().into_pmc().unwrap()
}

fn automaton(name: &str) -> Gba {
    parse_gba(&std::fs::read_to_string(Path::new(MODELS).join(name)).unwrap()).unwrap()
}

fn universe(f: &Formula) -> BTreeSet<String> {
    let mut u: BTreeSet<String> = PROPS.iter().map(|p| p.to_string()).collect();
    u.extend(atomic_props(f));
    u
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn run(args: &[&str], dir: &Path) -> (i32, String, String) {
    let out = Command::new(BIN).args(args).current_dir(dir).output().unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

/// Shared random corpus: formulas with lassos, and concrete chains.
struct Corpus {
    formulas: Vec<(Formula, Vec<pmc_core::ltl::LassoWord>)>,
    chains: Vec<Pmc>,
}

fn corpus() -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed());
    let formulas = (0..200)
        .map(|_| {
            let f = random_temporal_formula(&mut rng, PROPS, 4);
            let ws = (0..50).map(|_| random_lasso(&mut rng, PROPS, 4, 4)).collect();
            (f, ws)
        })
        .collect();
    let chains = (0..100)
        .map(|_| {
            let n = rng.gen_range(5..=15);
            random_chain(&mut rng, n, 3, PROPS)
        })
        .collect();
    Corpus { formulas, chains }
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let m = model("fig4.pmc");
    let an = Analysis::with_automaton(&m, automaton("fig3.gba"), PipelineOptions::default()).unwrap();
    let pos = &an.classification.pos;
    if pos.len() != 1 || an.classification.records[pos[0]].members.len() != 5 {
        return outcome(false, format!("expected one positive SCC of 5 nodes, got {pos:?}"));
    }
    let sys = an.system(&m);
    for eps in [rat(-2, 5), rat(0, 1), rat(1, 10), rat(2, 5)] {
        let sol = sys
            .solve_concrete(&Evaluation::from_pairs([("eps", eps.clone())]))
            .unwrap();
        let mu = |q: &str, s: &str| sol.value(&sys, an.product.find_node(q, s).unwrap()).unwrap().clone();
        let ok = mu("q1", "x") == rat(1, 2) + &eps
            && mu("q2", "x") == rat(1, 2) - &eps
            && mu("q3", "y") == rat(1, 1)
            && mu("q4", "z") == rat(1, 1)
            && mu("q5", "w") == rat(1, 1)
            && sol.target == rat(1, 1);
        if !ok {
            return outcome(false, format!("wrong values at eps = {eps}"));
        }
    }
    let t = start.elapsed();
    outcome(
        t < Duration::from_secs(1),
        format!("one positive SCC of 5 nodes, exact values for 4 eps, target 1, {t:.2?}"),
    )
}

/// Returns the outcome and whether every part except the C1 claim holds.
fn criterion_2() -> (Outcome, bool) {
    let start = Instant::now();
    let m = model("fig2.pmc");
    let a = automaton("fig1.gba");
    let an = Analysis::with_automaton(&m, a, PipelineOptions::default()).unwrap();
    let part = &an.classification.partition;
    let nontrivial: Vec<usize> = (0..part.len()).filter(|&c| part.nontrivial[c]).collect();
    let (x, y, z) = (
        m.state_index("x").unwrap(),
        m.state_index("y").unwrap(),
        m.state_index("z").unwrap(),
    );
    let find = |k: &[usize]| {
        nontrivial.iter().copied().find(|&c| {
            part.projections[c].iter().map(|&s| s as usize).collect::<BTreeSet<_>>() == k.iter().copied().collect()
        })
    };
    let (Some(c1), Some(c2)) = (find(&[x, y]), find(&[z, m.state_index("w").unwrap()])) else {
        return (outcome(false, "C1 or C2 not found"), false);
    };
    let v1 = is_complete_oracle(&an.product, part, c1, &m, 10_000).unwrap();
    let v2 = is_complete_oracle(&an.product, part, c2, &m, 10_000).unwrap();
    let scc_pos = an.classification.pos.len();
    let t = start.elapsed();

    let rest = nontrivial.len() == 2
        && !v2.complete
        && v2.witness == Some(vec![z, z])
        && scc_pos == 0
        && t < Duration::from_secs(1);
    let c1_truth = !v1.complete && v1.witness == Some(vec![x, y, y, x]);
    let names = |w: &Option<Vec<usize>>| {
        w.as_ref()
            .map(|p| p.iter().map(|&s| m.state_name(s)).collect::<Vec<_>>().join(" "))
            .unwrap_or_default()
    };
    let detail = format!(
        "SCC_G = {}, C1 complete = {} (witness {}), C2 complete = {} (witness {}), SCC_pos = {scc_pos}, {t:.2?}",
        nontrivial.len(),
        v1.complete,
        names(&v1.witness),
        v2.complete,
        names(&v2.witness),
    );
    (outcome(rest && v1.complete, detail), rest && c1_truth)
}

fn criterion_3(c: &Corpus) -> Outcome {
    let start = Instant::now();
    let mut disagreements = 0;
    let mut checks = 0;
    for (f, ws) in &c.formulas {
        let a = translate(f, &universe(f)).unwrap();
        for w in ws {
            checks += 1;
            if accepts_lasso(&a, w) != eval_lasso(f, w) {
                disagreements += 1;
            }
        }
    }
    let t = start.elapsed();
    outcome(
        disagreements == 0 && t < Duration::from_secs(60),
        format!("{} formulas, {checks} lasso checks, {disagreements} disagreements, {t:.2?}", c.formulas.len()),
    )
}

fn criterion_4(c: &Corpus) -> Outcome {
    let mut violations = 0;
    for (f, ws) in &c.formulas {
        let a = translate(f, &universe(f)).unwrap();
        if !a.check_reverse_deterministic().exactly_one {
            violations += 1;
        }
        for w in ws {
            let acc = accepting_states(&a, w);
            let n = a
                .states()
                .iter()
                .enumerate()
                .filter(|(q, s)| matches!(s, GbaState::Subset(_)) && acc[*q])
                .count();
            if n != 1 {
                violations += 1;
            }
        }
    }
    outcome(violations == 0, format!("{violations} violations"))
}

fn criterion_5_and_6(c: &Corpus) -> (Outcome, Outcome) {
    let start = Instant::now();
    let mut mismatches = 0;
    let mut disagreements = 0;
    let mut sccs = 0;
    for m in &c.chains {
        let mc = ConcreteMc::new(m, &Evaluation::new()).unwrap();
        for text in FRAGMENT {
            let f = parse_formula(text).unwrap();
            let an = Analysis::run(m, &f, PipelineOptions::default()).unwrap();
            let got = an.system(m).solve_concrete(&Evaluation::new()).unwrap().target;
            if Some(got) != closed_form(&mc, &f) {
                mismatches += 1;
            }
            let part = &an.classification.partition;
            let rd = is_complete_rd(part, &an.automaton).unwrap();
            for s in (0..part.len()).filter(|&s| part.nontrivial[s]) {
                sccs += 1;
                let oracle = is_complete_oracle(&an.product, part, s, m, 1_000_000).unwrap();
                if oracle.complete != rd[s] {
                    disagreements += 1;
                }
            }
        }
    }
    let t = start.elapsed();
    (
        outcome(
            mismatches == 0 && t < Duration::from_secs(120),
            format!("{} chains x {} formulas, {mismatches} mismatches, {t:.2?}", c.chains.len(), FRAGMENT.len()),
        ),
        outcome(disagreements == 0, format!("{sccs} non-trivial SCCs, {disagreements} disagreements")),
    )
}

fn criterion_7(dir: &Path) -> Outcome {
    let text = std::fs::read_to_string(Path::new(MODELS).join("imc_row.imc")).unwrap();
    let Model::Imc(imc) = parse_model(&text).unwrap() else {
        return outcome(false, "not an imc");
    };
    let m = imc.to_pmc().unwrap();
    let bounds = |n: &str| {
        let p = m.params().iter().find(|p| p.name == n).unwrap();
        (p.lower.clone(), p.upper.clone(), p.lower_strict || p.upper_strict)
    };
    let bounds_ok = bounds("p_s_t") == (Some(rat(1, 5)), Some(rat(7, 10)), false)
        && bounds("p_s_w") == (Some(rat(3, 10)), Some(rat(1, 2)), false);

    let path = Path::new(MODELS).join("imc_row.imc");
    let (code, out, err) = run(
        &["synth", "-m", path.to_str().unwrap(), "-q", "P in [0,1] [ true ]", "--solve", "grid:9", "-o", "imc.smt2"],
        dir,
    );
    let witness = out.lines().find_map(|l| l.strip_prefix("witness ")).map(str::to_string);
    let Some(w) = witness else {
        return outcome(false, format!("no witness (exit {code}): {out}{err}"));
    };
    let v = Evaluation::parse(&w).unwrap();
    let (t, s) = (v.get("p_s_t").unwrap().clone(), v.get("p_s_w").unwrap().clone());
    let inside = rat(1, 5) <= t && t <= rat(7, 10) && rat(3, 10) <= s && s <= rat(1, 2);
    outcome(
        bounds_ok && inside && &t + &s == rat(1, 1) && code == 0,
        format!("bounds [1/5,7/10] and [3/10,1/2]; grid witness p_s_t = {t}, p_s_w = {s}"),
    )
}

fn r_squared(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, sxy * sxy / (sxx * syy))
}

fn z3_model_value(text: &str, name: &str) -> Option<Rational> {
    let key = format!("define-fun {name} () Real");
    let alt = format!("define-fun |{name}| () Real");
    let start = text.find(&key).map(|i| i + key.len()).or_else(|| text.find(&alt).map(|i| i + alt.len()))?;
    let body: String = text[start..].chars().take_while(|&c| c != ')').collect();
    let tokens: Vec<&str> = body
        .split(|c: char| c.is_whitespace() || c == '(')
        .filter(|t| !t.is_empty())
        .collect();
    let num = |t: &str| pmc_core::pmc::parse_rational(t).ok();
    match tokens.as_slice() {
        ["/", a, b, ..] => Some(num(a)? / num(b)?),
        [a, ..] => num(a),
        _ => None,
    }
}

fn criterion_8(c: &Corpus, dir: &Path, smt_files: &mut Vec<String>) -> Outcome {
    // size law over the corpus
    let mut law_violations = 0;
    for (f, _) in c.formulas.iter().take(50) {
        let a = translate(f, &universe(f)).unwrap();
        for m in c.chains.iter().take(10) {
            let g = build_product(&a, m).unwrap();
            if g.num_nodes() != m.num_states() * ((1 << elementary(f).len()) + 1) {
                law_violations += 1;
            }
        }
    }

    // build time against arc count
    let mut rng = ChaCha8Rng::seed_from_u64(seed() ^ 8);
    let phi = parse_formula("G F a").unwrap();
    let a = translate(&phi, &universe(&phi)).unwrap();
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for n in [100usize, 300, 1_000, 3_000, 10_000, 30_000, 100_000] {
        let m = sparse_chain(&mut rng, n, 3, PROPS);
        let mut best = f64::INFINITY;
        let mut arcs = 0;
        for _ in 0..3 {
            let t = Instant::now();
            let g = build_product(&a, &m).unwrap();
            best = best.min(t.elapsed().as_secs_f64());
            arcs = g.num_arcs();
        }
        xs.push((arcs as f64).ln());
        ys.push(best.max(1e-7).ln());
    }
    let (slope, r2) = r_squared(&xs, &ys);

    // Crowds-style example through the command line
    let crowd = crowds(5, 40);
    let crowd_path = dir.join("crowds.pmc");
    std::fs::write(&crowd_path, crowd.to_string()).unwrap();
    let query = "P >= 9/10 [ G F (run0 & obs) ]";
    let t = Instant::now();
    let (code, out, _) = run(&["classify", "-m", "crowds.pmc", "-q", query], dir);
    let t_classify = t.elapsed();
    let (synth_code, synth_out, _) = run(&["synth", "-m", "crowds.pmc", "-q", query, "-o", "crowds.smt2"], dir);
    let smt = std::fs::read_to_string(dir.join("crowds.smt2")).unwrap_or_default();
    let well_formed = check_smtlib(&smt).is_ok();
    smt_files.push(smt.clone());

    let solver = match which("z3") {
        None => "no external solver installed, solver step skipped".to_string(),
        Some(z3) => {
            let (code, out, _) = run(&["synth", "-m", "crowds.pmc", "-q", query, "-o", "crowds.smt2", "--solver", &format!("{z3} -smt2")], dir);
            let badc = z3_model_value(&out, "badC");
            let pf = z3_model_value(&out, "pf");
            let holds = match (badc, pf) {
                (Some(b), Some(p)) => {
                    let v = Evaluation::from_pairs([("badC", b), ("pf", p)]);
                    let q = parse_query(query).unwrap();
                    pmc_core::eqsys::check_pltl(&crowd, &q, &v).map(|r| r.0).unwrap_or(false)
                }
                _ => false,
            };
            if code != 0 || !holds {
                return outcome(false, format!("external solver did not return a valid witness: {out}"));
            }
            "external solver answered sat with a valid witness".to_string()
        }
    };
    let nodes = out
        .lines()
        .find_map(|l| l.strip_prefix("V_G"))
        .map(|s| s.trim().to_string())
        .unwrap_or_default();
    outcome(
        law_violations == 0
            && r2 >= 0.9
            && code == 0
            && synth_code == 0
            && t_classify < Duration::from_secs(10)
            && well_formed
            && crowd.num_states() <= 2_000,
        format!(
            "size law violations {law_violations}; log-log slope {slope:.2}, R^2 {r2:.3}; crowds {} states, {nodes} product nodes, classify {t_classify:.2?}, .smt2 well-formed {well_formed} ({}); {solver}",
            crowd.num_states(),
            synth_out.lines().next().unwrap_or("")
        ),
    )
}

fn which(program: &str) -> Option<String> {
    let path = std::env::var_os("PATH")?;
    std::env::split_paths(&path)
        .map(|d| d.join(program))
        .find(|p| p.is_file())
        .map(|p| p.to_string_lossy().into_owned())
}

fn criterion_9(c: &Corpus, dir: &Path, smt_files: &mut Vec<String>) -> Outcome {
    // files written by the command line
    for (name, q) in [("fig4.pmc", "P >= 9/10 [ G F x ]"), ("fig2.pmc", "P >= 9/10 [ G F z ]")] {
        let path = Path::new(MODELS).join(name);
        let out = format!("{name}.smt2");
        run(&["synth", "-m", path.to_str().unwrap(), "-q", q, "-o", &out], dir);
        smt_files.push(std::fs::read_to_string(dir.join(&out)).unwrap_or_default());
    }
    smt_files.push(std::fs::read_to_string(dir.join("imc.smt2")).unwrap_or_default());

    let mut mismatches = 0;
    let mut instances = 0;
    for m in c.chains.iter().take(30) {
        for text in FRAGMENT {
            let f = parse_formula(text).unwrap();
            let reach = Analysis::run(m, &f, PipelineOptions::default()).unwrap();
            let expected = reach.system(m).solve_concrete(&Evaluation::new()).unwrap().target;
            let all = Analysis::run(m, &f, PipelineOptions::default().with_scope(Scope::All)).unwrap();
            let sys = all.system(m);
            let sol = sys.solve_concrete(&Evaluation::new()).unwrap();
            let q = parse_query(&format!("P >= 0 [ {text} ]")).unwrap();
            let smt = emit_smtlib(&sys, &q);
            let assignment: BTreeMap<String, Rational> =
                (0..sys.num_variables()).map(|i| (sys.symbol(i), sol.values[i].clone())).collect();
            instances += 1;
            match evaluate_smtlib(&smt, &assignment) {
                Ok(r) if r.satisfied() && r.definitions.get("target") == Some(&expected) => {}
                _ => mismatches += 1,
            }
            smt_files.push(smt);
        }
    }
    let malformed = smt_files.iter().filter(|s| check_smtlib(s).is_err() || s.is_empty()).count();
    outcome(
        malformed == 0 && mismatches == 0,
        format!(
            "{} files checked, {malformed} malformed; {instances} parameter-free instances, {mismatches} substitution mismatches",
            smt_files.len()
        ),
    )
}

#[test]
fn acceptance() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = corpus();
    let mut smt_files = Vec::new();

    let c1 = criterion_1();
    let (c2, c2_rest) = criterion_2();
    let c3 = criterion_3(&corpus);
    let c4 = criterion_4(&corpus);
    let (c5, c6) = criterion_5_and_6(&corpus);
    let c7 = criterion_7(dir.path());
    let c8 = criterion_8(&corpus, dir.path(), &mut smt_files);
    let c9 = criterion_9(&corpus, dir.path(), &mut smt_files);

    let results = [c1, c2, c3, c4, c5, c6, c7, c8, c9];
    // written past the test harness capture so the report shows in every run
    let mut out = std::io::stdout().lock();
    writeln!(out, "seed {}", seed()).unwrap();
    for (i, r) in results.iter().enumerate() {
        writeln!(out, "criterion {}: {} - {}", i + 1, if r.pass { "PASS" } else { "FAIL" }, r.detail).unwrap();
    }
    drop(out);

    // Criterion 2 claims C1 is complete, but the path x y y x of K1 has no
    // lift into C1; everything else it states must hold.
    assert!(c2_rest, "criterion 2: {}", results[1].detail);
    for (i, r) in results.iter().enumerate() {
        if i != 1 {
            assert!(r.pass, "criterion {}: {}", i + 1, r.detail);
        }
    }
}
