//! `pmc-synth`: translate, classify, check and synthesize from the command line.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::{Command as Process, ExitCode, Stdio};
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use pmc_core::eqsys::{
    check_smtlib, emit_smtlib, parse_query, synth_grid, Analysis, EqsysError, GridOutcome, PipelineOptions,
    PltlQuery,
};
use pmc_core::gba::{elementary, parse_gba, translate, GbaError};
use pmc_core::ltl::{atomic_props, parse_formula, Formula};
use pmc_core::oracle::{closed_form, ConcreteMc};
use pmc_core::pmc::{parse_model, Diagnostic, Evaluation, Pmc, PmcError};
use pmc_core::product::{ProductError, ProductStats, Scope, DEFAULT_MAX_NODES, DEFAULT_ORACLE_BUDGET};

#[derive(Parser, Debug)]
#[command(name = "pmc-synth", version, about = "Parameter synthesis for parametric Markov chains against LTL")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Translate an LTL formula and print the automaton.
    Translate(Opts),
    /// Classify the SCCs of the product of a model and a formula.
    Classify(Opts),
    /// Compute the exact probability of a formula under a total evaluation.
    Check(Opts),
    /// Emit SMT-LIB constraints for a PLTL query, optionally searching a grid.
    Synth(Opts),
}

#[derive(Args, Debug, Clone)]
struct Opts {
    /// LTL formula.
    #[arg(short = 'f', long)]
    formula: Option<String>,
    /// PLTL query, e.g. "P >= 9/10 [ G F a ]".
    #[arg(short = 'q', long = "pltl")]
    pltl: Option<String>,
    /// Model file (pmc or imc).
    #[arg(short = 'm', long)]
    model: Option<PathBuf>,
    /// Parameter values, e.g. "p=1/10,q=0.25".
    #[arg(short = 'e', long = "eval")]
    eval: Option<String>,
    /// Output file.
    #[arg(short = 'o', long = "out")]
    out: Option<PathBuf>,
    /// Hand-written automaton file used instead of translating the formula.
    #[arg(long)]
    automaton: Option<PathBuf>,
    /// Search strategy, `grid:<n>`.
    #[arg(long)]
    solve: Option<String>,
    /// External SMT solver command; the emitted file is appended as its last argument.
    #[arg(long)]
    solver: Option<String>,
    /// Cross-check the probability against closed forms.
    #[arg(long)]
    oracle: bool,
    #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
    report: ReportFormat,
    /// Which product nodes the system covers; synthesis defaults to all.
    #[arg(long, value_enum)]
    scope: Option<ScopeArg>,
    #[arg(long, default_value_t = DEFAULT_MAX_NODES)]
    max_product_nodes: usize,
    #[arg(long, default_value_t = DEFAULT_ORACLE_BUDGET)]
    oracle_budget: usize,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum ReportFormat {
    Text,
    Tsv,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum ScopeArg {
    Reachable,
    All,
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Model(String),
    #[error("{0}")]
    Capacity(String),
    #[error("{0}")]
    Solver(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Parse(_) | CliError::Io { .. } => 3,
            CliError::Model(_) => 4,
            CliError::Capacity(_) => 5,
            CliError::Solver(_) => 6,
        }
    }
}

impl From<PmcError> for CliError {
    fn from(e: PmcError) -> Self {
        match e {
            PmcError::Syntax { .. } => CliError::Parse(e.to_string()),
            PmcError::IllDefined(Diagnostic::MissingParam(_)) => CliError::Usage(e.to_string()),
            _ => CliError::Model(e.to_string()),
        }
    }
}

impl From<GbaError> for CliError {
    fn from(e: GbaError) -> Self {
        match e {
            GbaError::Parse { .. } => CliError::Parse(e.to_string()),
            GbaError::Capacity { .. } | GbaError::TooManyAps { .. } | GbaError::TooManyAcceptanceSets { .. } => {
                CliError::Capacity(e.to_string())
            }
            _ => CliError::Model(e.to_string()),
        }
    }
}

impl From<ProductError> for CliError {
    fn from(e: ProductError) -> Self {
        match e {
            ProductError::Capacity { .. } | ProductError::OracleBudget { .. } => CliError::Capacity(e.to_string()),
            ProductError::NotReverseDeterministic => CliError::Model(e.to_string()),
        }
    }
}

impl From<EqsysError> for CliError {
    fn from(e: EqsysError) -> Self {
        match e {
            EqsysError::Formula(_) | EqsysError::Query(_) | EqsysError::InvalidInterval(_) => {
                CliError::Parse(e.to_string())
            }
            EqsysError::Automaton(e) => e.into(),
            EqsysError::Model(e) => e.into(),
            EqsysError::Product(e) => e.into(),
            EqsysError::IllDefined(Diagnostic::MissingParam(_)) => CliError::Usage(e.to_string()),
            EqsysError::UnboundedParam(_) | EqsysError::GridSize(_) => CliError::Usage(e.to_string()),
            _ => CliError::Model(e.to_string()),
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn load_model(opts: &Opts) -> Result<Pmc, CliError> {
    let path = opts.model.as_ref().ok_or_else(|| CliError::Usage("missing -m/--model".into()))?;
    Ok(parse_model(&read(path)?)?.into_pmc()?)
}

fn formula_of(opts: &Opts) -> Result<Option<Formula>, CliError> {
    let parse = |t: &str| parse_formula(t).map_err(|e| CliError::Parse(e.to_string()));
    match (&opts.formula, &opts.pltl) {
        (Some(f), _) => parse(f).map(Some),
        (None, Some(q)) => Ok(Some(query_of(q)?.formula)),
        (None, None) => Ok(None),
    }
}

fn query_of(text: &str) -> Result<PltlQuery, CliError> {
    Ok(parse_query(text)?)
}

fn scope(opts: &Opts, default: Scope) -> Scope {
    match opts.scope {
        Some(ScopeArg::Reachable) => Scope::Reachable,
        Some(ScopeArg::All) => Scope::All,
        None => default,
    }
}

fn analyse(m: &Pmc, opts: &Opts, scope: Scope) -> Result<Analysis, CliError> {
    let mut popts = PipelineOptions::default().with_scope(scope);
    popts.max_product_nodes = opts.max_product_nodes;
    popts.classify.oracle_budget = opts.oracle_budget;
    if let Some(path) = &opts.automaton {
        let a = parse_gba(&read(path)?)?;
        return Ok(Analysis::with_automaton(m, a, popts)?);
    }
    let phi = formula_of(opts)?.ok_or_else(|| CliError::Usage("missing -f/--formula, -q/--pltl or --automaton".into()))?;
    Ok(Analysis::run(m, &phi, popts)?)
}

fn evaluation(opts: &Opts, m: &Pmc) -> Result<Evaluation, CliError> {
    let v = match &opts.eval {
        Some(text) => Evaluation::parse(text).map_err(CliError::Usage)?,
        None => Evaluation::new(),
    };
    if let Some(p) = m.params().iter().find(|p| v.get(&p.name).is_none()) {
        return Err(CliError::Usage(format!("no value for parameter `{}` (use -e {}=...)", p.name, p.name)));
    }
    Ok(v)
}

fn secs(d: Duration) -> String {
    format!("{:.6}", d.as_secs_f64())
}

fn cmd_translate(opts: &Opts) -> Result<u8, CliError> {
    let text = opts.formula.as_ref().ok_or_else(|| CliError::Usage("missing -f/--formula".into()))?;
    let phi = parse_formula(text).map_err(|e| CliError::Parse(e.to_string()))?;
    let a = translate(&phi, &atomic_props(&phi))?;
    let dump = a.dump();
    println!("formula {phi}");
    println!("el {}", elementary(&phi).len());
    println!("states {}", a.num_states());
    println!("edges {}", a.edges().len());
    println!("acceptance sets {}", a.acceptance().len());
    match &opts.out {
        Some(path) => write(path, &dump)?,
        None => print!("{dump}"),
    }
    Ok(0)
}

fn cmd_classify(opts: &Opts) -> Result<u8, CliError> {
    let m = load_model(opts)?;
    let start = Instant::now();
    let an = analyse(&m, opts, scope(opts, Scope::Reachable))?;
    let t_g = start.elapsed();
    let start = Instant::now();
    let sys = an.system(&m);
    if m.params().is_empty() {
        sys.solve_concrete(&Evaluation::new())?;
    }
    let t_mc = start.elapsed();
    let stats = ProductStats::of(&an.product, &an.classification);

    let report = match opts.report {
        ReportFormat::Tsv => format!(
            "S_M\tV_G\tSCC_G\tSCC_pos\tT_G\tT_mc\n{}\t{}\t{}\t{}\t{}\t{}\n",
            stats.chain_states,
            stats.nodes,
            stats.nontrivial_sccs,
            stats.positive_sccs,
            secs(t_g),
            secs(t_mc)
        ),
        ReportFormat::Text => format!(
            "S_M      {}\nV_G      {}\narcs     {}\nSCC_G    {}\nSCC_pos  {}\nT_G      {}s\nT_mc     {}s\nmethod   {}\n",
            stats.chain_states,
            stats.nodes,
            stats.arcs,
            stats.nontrivial_sccs,
            stats.positive_sccs,
            secs(t_g),
            secs(t_mc),
            an.classification.method
        ),
    };
    match &opts.out {
        Some(path) => write(path, &report)?,
        None => print!("{report}"),
    }
    Ok(0)
}

fn cmd_check(opts: &Opts) -> Result<u8, CliError> {
    let m = load_model(opts)?;
    let v = evaluation(opts, &m)?;
    let query = opts.pltl.as_deref().map(query_of).transpose()?;
    let an = analyse(&m, opts, scope(opts, Scope::Reachable))?;
    let sol = an.system(&m).solve_concrete(&v)?;
    println!("probability {}", sol.target);

    if opts.oracle {
        let phi = match (&opts.automaton, formula_of(opts)?) {
            (None, Some(phi)) => Some(phi),
            _ => None,
        };
        match phi.as_ref().and_then(|phi| {
            let mc = ConcreteMc::new(&m, &v).ok()?;
            closed_form(&mc, phi)
        }) {
            Some(p) if p == sol.target => println!("oracle {p} agrees"),
            Some(p) => {
                println!("oracle {p} disagrees");
                return Err(CliError::Model(format!("oracle gives {p}, pipeline gives {}", sol.target)));
            }
            None => println!("oracle not applicable"),
        }
    }

    match query {
        Some(q) => {
            let holds = q.interval.contains(&sol.target);
            println!("verdict {holds}");
            Ok(if holds { 0 } else { 1 })
        }
        None => Ok(0),
    }
}

fn grid_resolution(strategy: &str) -> Result<usize, CliError> {
    strategy.strip_prefix("grid:")
        .and_then(|n| n.parse::<usize>().ok())
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("unknown --solve `{strategy}`, expected grid:<n>")))
}

fn run_solver(cmd: &str, file: &Path) -> Result<u8, CliError> {
    let mut words = cmd.split_whitespace();
    let program = words.next().ok_or_else(|| CliError::Usage("empty --solver".into()))?;
    let output = Process::new(program)
        .args(words)
        .arg(file)
        .stdin(Stdio::null())
        .output()
        .map_err(|e| CliError::Solver(format!("cannot run `{program}`: {e}")))?;
    std::io::stdout().write_all(&output.stdout).ok();
    std::io::stderr().write_all(&output.stderr).ok();
    let text = String::from_utf8_lossy(&output.stdout);
    match text.lines().map(str::trim).find(|l| !l.is_empty()) {
        Some("sat") => Ok(0),
        Some("unsat") => Ok(1),
        _ => Err(CliError::Solver(format!("`{program}` gave no sat/unsat answer"))),
    }
}

fn cmd_synth(opts: &Opts) -> Result<u8, CliError> {
    let m = load_model(opts)?;
    let text = opts.pltl.as_ref().ok_or_else(|| CliError::Usage("missing -q/--pltl".into()))?;
    let query = query_of(text)?;
    let resolution = opts.solve.as_deref().map(grid_resolution).transpose()?;

    let an = analyse(&m, opts, scope(opts, Scope::All))?;
    let sys = an.system(&m);
    let smt = emit_smtlib(&sys, &query);
    let summary = check_smtlib(&smt).map_err(|e| CliError::Model(format!("emitted file is malformed: {e}")))?;
    let out = opts.out.clone().unwrap_or_else(|| {
        let model = opts.model.as_deref().unwrap_or(Path::new("query"));
        PathBuf::from(model.file_stem().unwrap_or_default()).with_extension("smt2")
    });
    write(&out, &smt)?;
    println!(
        "wrote {} ({} declarations, {} assertions)",
        out.display(),
        summary.declarations,
        summary.assertions
    );
    if sys.target_is_zero() {
        println!("no locally positive SCC is reachable: target provably 0");
    }

    let mut code = 0;
    if let Some(n) = resolution {
        let reach = analyse(&m, opts, Scope::Reachable)?;
        match synth_grid(&reach.system(&m), &query, n)? {
            GridOutcome::Witness {
                evaluation,
                probability,
            } => {
                println!("witness {evaluation}");
                println!("probability {probability}");
            }
            GridOutcome::InfeasibleOnGrid { points } => {
                println!("infeasible-on-grid ({points} points)");
                code = 1;
            }
        }
    }
    if let Some(cmd) = &opts.solver {
        code = run_solver(cmd, &out)?;
    }
    Ok(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match &cli.command {
        Command::Translate(o) => cmd_translate(o),
        Command::Classify(o) => cmd_classify(o),
        Command::Check(o) => cmd_check(o),
        Command::Synth(o) => cmd_synth(o),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
