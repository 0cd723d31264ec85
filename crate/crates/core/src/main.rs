use std::collections::VecDeque;
use std::fmt::Debug;
use std::hash::Hash;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use ccs_playground::acceptance;
use ccs_playground::ccs::{parse_ccs, Context, LabelA, Process, TypedProcess};
use ccs_playground::fairtest::{
    fair_equiv_semantic, fair_equiv_standard, gen_tree_tests, Interfaced, Report, SemanticOptions, Verdict, Witness,
};
use ccs_playground::game::GlobalMove;
use ccs_playground::lts::{
    weak_bisim_bounded, BisimOptions, BisimVerdict, CcsLts, ChiPullback, Configuration, Explorer, InterfacedConfig,
    LEdge, Lts, LtsError, StrategyLts, TermLts, XiPostcompose,
};
use ccs_playground::strategy::{theta, translate_ccs, Arena, DefiniteId, TermArena};

/// Environment variable overriding the default state cap.
const BUDGET_ENV: &str = "CCS_PLAYGROUND_BUDGET";

const PASS: u8 = 0;
const FAIL: u8 = 1;
const INCONCLUSIVE: u8 = 2;
const USAGE: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "ccs-playground", version, about = "Game semantics for CCS: translation, transition systems, bisimulation and fair testing")]
struct Cli {
    /// Print machine-readable JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Write the explored transition system as DOT (lts only).
    #[arg(long, global = true, value_name = "PATH")]
    dot: Option<String>,
    /// Largest player arity any move may create.
    #[arg(long, global = true, default_value_t = ccs_playground::DEFAULT_MAX_ARITY)]
    max_arity: usize,
    /// Cap on explored states [default: $CCS_PLAYGROUND_BUDGET or 100000].
    #[arg(long, global = true)]
    state_cap: Option<usize>,
    /// Depth bound: weak steps for bisim, play depth for semantic fairtest,
    /// BFS depth for lts.
    #[arg(long, global = true)]
    depth: Option<usize>,
    /// Worker threads for test-family evaluation.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Translate a process into a strategy and print it.
    Translate { process: String },
    /// Explore a transition system of a process.
    Lts(LtsArgs),
    /// Compare two processes by bisimilarity.
    Bisim(BisimArgs),
    /// Compare two processes by fair testing against a family of tests.
    Fairtest(FairArgs),
    /// Run the acceptance suite.
    Accept {
        /// Only this criterion.
        #[arg(long)]
        only: Option<u8>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Source {
    Ccs,
    Terms,
    Strategies,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Base {
    #[value(name = "F")]
    F,
    #[value(name = "L")]
    L,
    #[value(name = "A")]
    A,
}

#[derive(Args, Debug)]
struct LtsArgs {
    process: String,
    #[arg(long, value_enum, default_value = "ccs")]
    source: Source,
    /// F: full moves, L: moves on the interface, A: the CCS alphabet.
    #[arg(long, value_enum, default_value = "A")]
    base: Base,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Side {
    Ccs,
    Strategies,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("mode").args(["strong", "weak"])))]
struct BisimArgs {
    #[arg(long)]
    strong: bool,
    /// The default.
    #[arg(long)]
    weak: bool,
    #[arg(long, value_name = "PROCESS")]
    left_ccs: String,
    #[arg(long, value_name = "PROCESS")]
    right_ccs: String,
    /// Compare the left process's CCS LTS or its strategy LTS over the CCS alphabet.
    #[arg(long, value_enum, default_value = "ccs")]
    left_source: Side,
    #[arg(long, value_enum, default_value = "ccs")]
    right_source: Side,
    /// Skip the exact check and only compare up to the depth.
    #[arg(long)]
    bounded: bool,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("side").args(["standard", "semantic"])))]
struct FairArgs {
    /// Test the CCS processes (the default).
    #[arg(long)]
    standard: bool,
    /// Test their translations as strategies.
    #[arg(long)]
    semantic: bool,
    #[arg(long, value_name = "PROCESS")]
    left: String,
    #[arg(long, value_name = "PROCESS")]
    right: String,
    /// Depth of the generated tree tests.
    #[arg(long, default_value_t = 2)]
    gen_depth: usize,
    /// Branching of the generated tree tests.
    #[arg(long, default_value_t = 2)]
    gen_width: usize,
    /// Do not generate tree tests; only use --test.
    #[arg(long)]
    no_gen: bool,
    /// An extra test, at the same context as the subjects.
    #[arg(long = "test", value_name = "PROCESS")]
    tests: Vec<String>,
}

struct Usage(String);

struct Outcome {
    code: u8,
    text: String,
    json: serde_json::Value,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => PASS,
                _ => USAGE,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(out) => {
            if cli.json {
                println!("{}", serde_json::to_string_pretty(&out.json).expect("json output"));
            } else {
                print!("{}", out.text);
            }
            ExitCode::from(out.code)
        }
        Err(Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(USAGE)
        }
    }
}

fn run(cli: &Cli) -> Result<Outcome, Usage> {
    if cli.dot.is_some() && !matches!(cli.command, Command::Lts(_)) {
        return Err(Usage("--dot is only supported by the lts subcommand".into()));
    }
    if cli.jobs == 0 {
        return Err(Usage("--jobs must be at least 1".into()));
    }
    let cap = state_cap(cli)?;
    match &cli.command {
        Command::Translate { process } => translate(process),
        Command::Lts(args) => lts(cli, args, cap),
        Command::Bisim(args) => bisim(cli, args, cap),
        Command::Fairtest(args) => fairtest(cli, args, cap),
        Command::Accept { only } => accept(*only),
    }
}

fn state_cap(cli: &Cli) -> Result<usize, Usage> {
    if let Some(n) = cli.state_cap {
        return Ok(n);
    }
    match std::env::var(BUDGET_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| Usage(format!("{BUDGET_ENV}={v:?} is not a number"))),
        Err(_) => Ok(ccs_playground::DEFAULT_STATE_CAP),
    }
}

fn parse(flag: &str, text: &str) -> Result<TypedProcess, Usage> {
    parse_ccs(text).map_err(|e| Usage(format!("{flag}: {e}")))
}

fn translate(text: &str) -> Result<Outcome, Usage> {
    let t = parse("process", text)?;
    let mut arena = Arena::new();
    let s = translate_ccs(&mut arena, t.context, &t.process);
    let dump = arena.dump(s);
    Ok(Outcome {
        code: PASS,
        text: format!("{t}\n{dump}\n"),
        json: json!({ "process": t.to_string(), "context": t.context.0, "dump": dump, "strategy": arena.to_json(s) }),
    })
}

// lts -------------------------------------------------------------------

struct Graph {
    states: Vec<String>,
    edges: Vec<(usize, String, usize)>,
    initial: Vec<usize>,
    capped: bool,
    truncated: bool,
}

/// Breadth-first exploration from `starts`, numbering states in the order
/// they are met.
fn explore<L: Lts>(lts: L, starts: &[L::State], cap: usize, depth: Option<usize>, label: impl Fn(&L::Label) -> String) -> Graph
where
    L::State: Clone + Eq + Hash + Debug,
{
    let mut e = Explorer::new(lts, cap);
    let mut g = Graph { states: Vec::new(), edges: Vec::new(), initial: Vec::new(), capped: false, truncated: false };
    let mut queue = VecDeque::new();
    let mut level = Vec::new();
    for s in starts {
        match e.id(s) {
            Ok(i) => {
                if !g.initial.contains(&i) {
                    g.initial.push(i);
                    queue.push_back(i);
                }
            }
            Err(_) => g.capped = true,
        }
    }
    level.resize(e.len(), 0usize);
    let mut done = vec![false; e.len()];
    while let Some(i) = queue.pop_front() {
        if done[i] {
            continue;
        }
        done[i] = true;
        if depth.is_some_and(|d| level[i] >= d) {
            g.truncated = true;
            continue;
        }
        match e.successors(i) {
            Ok(out) => {
                for (l, t) in out {
                    if t >= level.len() {
                        level.resize(t + 1, level[i] + 1);
                        done.resize(t + 1, false);
                        queue.push_back(t);
                    }
                    g.edges.push((i, label(&l), t));
                }
            }
            Err(LtsError::StateCap(_)) => {
                g.capped = true;
                break;
            }
            Err(LtsError::ArityExceeded { .. }) => {
                g.capped = true;
                g.truncated = true;
            }
        }
    }
    g.states = (0..e.len()).map(|i| e.describe(i)).collect();
    g.edges.retain(|&(_, _, t)| t < g.states.len());
    g
}

fn to_dot(g: &Graph) -> String {
    let mut s = String::from("digraph lts {\n  node [shape=circle];\n");
    for (i, d) in g.states.iter().enumerate() {
        let shape = if g.initial.contains(&i) { ", shape=doublecircle" } else { "" };
        let d = d.replace('\\', "\\\\").replace('"', "\\\"");
        s.push_str(&format!("  s{i} [label=\"{i}\", tooltip=\"{d}\"{shape}];\n"));
    }
    for (i, l, t) in &g.edges {
        s.push_str(&format!("  s{i} -> s{t} [label=\"{l}\"];\n"));
    }
    s.push_str("}\n");
    s
}

fn lts(cli: &Cli, args: &LtsArgs, cap: usize) -> Result<Outcome, Usage> {
    let t = parse("process", &args.process)?;
    let n = t.context.0;
    let iface: Vec<usize> = (0..n).collect();
    let edge = |e: &LEdge| e.mv.label();
    let action = |l: &LabelA| l.to_string();
    let full = |m: &GlobalMove| m.label();
    let g = match (args.source, args.base) {
        (Source::Ccs, Base::A) => explore(CcsLts { ctx: t.context }, std::slice::from_ref(&t.process), cap, cli.depth, action),
        (Source::Ccs, b) => {
            return Err(Usage(format!("--base {b:?} is not available for --source ccs; CCS processes live over A")));
        }
        (Source::Terms, base) => {
            let mut terms = TermArena::new();
            let root = theta(&mut terms, t.context, &t.process);
            let start = Configuration::individual(n, root);
            let base_lts = TermLts { terms, max_arity: cli.max_arity };
            match base {
                Base::F => explore(base_lts, &[start], cap, cli.depth, full),
                Base::L => {
                    let chi = ChiPullback::new(base_lts, true);
                    let s = chi.state(iface, start);
                    explore(chi, &[s], cap, cli.depth, edge)
                }
                Base::A => {
                    let chi = ChiPullback::new(base_lts, true);
                    let s = chi.state(iface, start);
                    explore(XiPostcompose { inner: chi }, &[s], cap, cli.depth, action)
                }
            }
        }
        (Source::Strategies, base) => {
            let mut arena = Arena::new();
            let s = translate_ccs(&mut arena, t.context, &t.process);
            let starts: Vec<Configuration<DefiniteId>> =
                arena.get(s).defs.iter().map(|&d| Configuration::individual(n, d)).collect();
            let base_lts = StrategyLts { arena: Arc::new(arena), max_arity: cli.max_arity };
            match base {
                Base::F => explore(base_lts, &starts, cap, cli.depth, full),
                Base::L => {
                    let chi = ChiPullback::new(base_lts, true);
                    let ss: Vec<InterfacedConfig<DefiniteId>> = starts.into_iter().map(|c| chi.state(iface.clone(), c)).collect();
                    explore(chi, &ss, cap, cli.depth, edge)
                }
                Base::A => {
                    let chi = ChiPullback::new(base_lts, true);
                    let ss: Vec<InterfacedConfig<DefiniteId>> = starts.into_iter().map(|c| chi.state(iface.clone(), c)).collect();
                    explore(XiPostcompose { inner: chi }, &ss, cap, cli.depth, action)
                }
            }
        }
    };
    if let Some(path) = &cli.dot {
        std::fs::write(path, to_dot(&g)).map_err(|e| Usage(format!("--dot {path}: {e}")))?;
    }
    let mut text = format!("{} states, {} edges{}\n", g.states.len(), g.edges.len(), status(&g));
    for (i, d) in g.states.iter().enumerate() {
        let mark = if g.initial.contains(&i) { ">" } else { " " };
        text.push_str(&format!("{mark}{i:>5}  {d}\n"));
    }
    for (i, l, t) in &g.edges {
        text.push_str(&format!("{i:>6} --{l}--> {t}\n"));
    }
    let json = json!({
        "source": format!("{:?}", args.source).to_lowercase(),
        "base": format!("{:?}", args.base),
        "initial": g.initial,
        "states": g.states,
        "edges": g.edges.iter().map(|(s, l, t)| json!({ "source": s, "label": l, "target": t })).collect::<Vec<_>>(),
        "complete": !g.capped && !g.truncated,
        "state_cap_hit": g.capped,
    });
    Ok(Outcome { code: if g.capped { INCONCLUSIVE } else { PASS }, text, json })
}

fn status(g: &Graph) -> &'static str {
    match (g.capped, g.truncated) {
        (true, _) => " (state cap hit)",
        (false, true) => " (cut at depth)",
        _ => "",
    }
}

// bisim -----------------------------------------------------------------

type StrategySide = XiPostcompose<ChiPullback<StrategyLts>>;

enum Built {
    Ccs(Explorer<CcsLts>, Process),
    Strategies(Explorer<StrategySide>, InterfacedConfig<DefiniteId>),
}

fn build(t: &TypedProcess, side: Side, cap: usize, max_arity: usize) -> Built {
    match side {
        Side::Ccs => Built::Ccs(Explorer::new(CcsLts { ctx: t.context }, cap), t.process.clone()),
        Side::Strategies => {
            let mut arena = Arena::new();
            let s = translate_ccs(&mut arena, t.context, &t.process);
            let d = arena.get(s).defs[0];
            let chi = ChiPullback::new(StrategyLts { arena: Arc::new(arena), max_arity }, true);
            let start = chi.state((0..t.context.0).collect(), Configuration::individual(t.context.0, d));
            Built::Strategies(Explorer::new(XiPostcompose { inner: chi }, cap), start)
        }
    }
}

fn bisim(cli: &Cli, args: &BisimArgs, cap: usize) -> Result<Outcome, Usage> {
    let p = parse("--left-ccs", &args.left_ccs)?;
    let q = parse("--right-ccs", &args.right_ccs)?;
    if p.context != q.context {
        return Err(Usage(format!("--right-ccs: context [{}] differs from the left context [{}]", q.context, p.context)));
    }
    let opts = BisimOptions { depth: cli.depth.unwrap_or(6), exact: !args.bounded, strong: args.strong };
    let l = build(&p, args.left_source, cap, cli.max_arity);
    let r = build(&q, args.right_source, cap, cli.max_arity);
    let v = match (l, r) {
        (Built::Ccs(mut a, s), Built::Ccs(mut b, t)) => weak_bisim_bounded(&mut a, &s, &mut b, &t, opts),
        (Built::Ccs(mut a, s), Built::Strategies(mut b, t)) => weak_bisim_bounded(&mut a, &s, &mut b, &t, opts),
        (Built::Strategies(mut a, s), Built::Ccs(mut b, t)) => weak_bisim_bounded(&mut a, &s, &mut b, &t, opts),
        (Built::Strategies(mut a, s), Built::Strategies(mut b, t)) => weak_bisim_bounded(&mut a, &s, &mut b, &t, opts),
    };
    let mode = if args.strong { "strongly" } else { "weakly" };
    let (code, text) = match &v {
        BisimVerdict::Bisimilar { exact: true, .. } => (PASS, format!("{mode} bisimilar (exact)\n")),
        BisimVerdict::Bisimilar { depth, .. } => (PASS, format!("{mode} bisimilar up to depth {depth}\n")),
        BisimVerdict::NotBisimilar { depth, trace } => {
            let moves: Vec<&str> = trace.iter().skip(1).step_by(2).map(String::as_str).collect();
            (FAIL, format!("not {mode} bisimilar at depth {depth}\ndistinguishing moves: {}\n", moves.join(" ")))
        }
        BisimVerdict::BudgetExceeded { states } => (INCONCLUSIVE, format!("inconclusive: state cap of {states} exceeded\n")),
    };
    let mut json = serde_json::to_value(&v).expect("verdict json");
    json["mode"] = json!(if args.strong { "strong" } else { "weak" });
    Ok(Outcome { code, text, json })
}

// fairtest --------------------------------------------------------------

/// Combines per-chunk reports into the report of a sequential run over the
/// concatenated chunks: the first failure wins, then the first
/// inconclusive test.
fn aggregate(reports: Vec<Report>, family_size: usize, depth: usize) -> Report {
    // A sequential run never reaches the chunks after the first failure.
    let ran = reports.iter().position(|r| r.verdict.is_fail()).map_or(reports.len(), |i| i + 1);
    let reports = &reports[..ran];
    let budget_used = reports.iter().map(|r| r.budget_used).max().unwrap_or(0);
    let bounded = reports.iter().any(|r| matches!(r.verdict, Verdict::Pass { bounded: true }));
    let verdict = if let Some(r) = reports.last().filter(|r| r.verdict.is_fail()) {
        r.verdict.clone()
    } else if let Some(r) = reports.iter().find(|r| matches!(r.verdict, Verdict::Inconclusive { .. })) {
        r.verdict.clone()
    } else {
        Verdict::Pass { bounded }
    };
    Report { verdict, budget_used, depth, family_size }
}

fn chunks<T>(items: &[T], jobs: usize) -> Vec<&[T]> {
    let size = items.len().div_ceil(jobs.max(1)).max(1);
    items.chunks(size).collect()
}

fn fairtest(cli: &Cli, args: &FairArgs, cap: usize) -> Result<Outcome, Usage> {
    let p = parse("--left", &args.left)?;
    let q = parse("--right", &args.right)?;
    let ctx = p.context;
    if q.context != ctx {
        return Err(Usage(format!("--right: context [{}] differs from the left context [{ctx}]", q.context)));
    }
    let mut tests: Vec<Process> = if args.no_gen { Vec::new() } else { gen_tree_tests(ctx, args.gen_depth, args.gen_width) };
    for text in &args.tests {
        let t = parse("--test", text)?;
        if t.context != ctx {
            return Err(Usage(format!("--test {text}: context [{}] differs from [{ctx}]", t.context)));
        }
        tests.push(t.process);
    }
    if tests.is_empty() {
        return Err(Usage("--no-gen: no tests left; add --test".into()));
    }
    let report = if args.semantic {
        semantic(cli, &p, &q, ctx, &tests, cap)?
    } else {
        let parts: Vec<Report> = std::thread::scope(|scope| {
            let handles: Vec<_> = chunks(&tests, cli.jobs)
                .into_iter()
                .map(|c| scope.spawn(|| fair_equiv_standard(&p.process, &q.process, ctx, c, cap)))
                .collect();
            handles.into_iter().map(|h| h.join().expect("worker")).collect()
        });
        aggregate(parts, tests.len(), 0)
    };
    Ok(outcome(&report, if args.semantic { "semantic" } else { "standard" }))
}

fn semantic(cli: &Cli, p: &TypedProcess, q: &TypedProcess, ctx: Context, tests: &[Process], cap: usize) -> Result<Report, Usage> {
    let depth = cli.depth.unwrap_or(4);
    let opts = SemanticOptions { depth, budget: cap, max_arity: cli.max_arity };
    let mut arena = Arena::new();
    let sp = translate_ccs(&mut arena, ctx, &p.process);
    let sq = translate_ccs(&mut arena, ctx, &q.process);
    let st: Vec<_> = tests.iter().map(|t| translate_ccs(&mut arena, ctx, t)).collect();
    let left = Interfaced::individual(&arena, sp, p.process.to_string());
    let right = Interfaced::individual(&arena, sq, q.process.to_string());
    let ts: Vec<Interfaced> = st.iter().zip(tests).map(|(&s, t)| Interfaced::individual(&arena, s, t.to_string())).collect();
    let arena = Arc::new(arena);
    let parts: Result<Vec<Report>, String> = std::thread::scope(|scope| {
        let handles: Vec<_> = chunks(&ts, cli.jobs)
            .into_iter()
            .map(|c| {
                let arena = &arena;
                let (left, right) = (&left, &right);
                scope.spawn(move || fair_equiv_semantic(arena, left, right, c, opts))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker")).collect()
    });
    Ok(aggregate(parts.map_err(Usage)?, tests.len(), depth))
}

fn outcome(report: &Report, side: &str) -> Outcome {
    let scope = |bounded: bool| if bounded { format!(" up to play depth {}", report.depth) } else { String::new() };
    let (code, head) = match &report.verdict {
        Verdict::Pass { bounded } => (PASS, format!("pass: no test among {} separates them{}", report.family_size, scope(*bounded))),
        Verdict::Fail { witness, bounded } => (FAIL, format!("fail{}\nwitness: {}", scope(*bounded), witness_text(witness))),
        Verdict::Inconclusive { reason } => (INCONCLUSIVE, format!("inconclusive: {reason}")),
    };
    let text = format!("{side} fair testing\n{head}\nfamily size: {}\nbudget used: {}\n", report.family_size, report.budget_used);
    Outcome { code, text, json: serde_json::to_value(report).expect("report json") }
}

fn witness_text(w: &Witness) -> String {
    let verdict = |b: bool| if b { "passes" } else { "fails" };
    match w {
        Witness::Test { test, left_passes, right_passes } => {
            format!("test {test} (left {}, right {})", verdict(*left_passes), verdict(*right_passes))
        }
        Witness::SilentPath { states } => format!("silent path {}", states.join(" -> ")),
        Witness::Play { moves } => format!("play {}", moves.join(" ")),
    }
}

// accept ----------------------------------------------------------------

fn accept(only: Option<u8>) -> Result<Outcome, Usage> {
    let results = match only {
        Some(id) => vec![acceptance::run(id).ok_or_else(|| Usage(format!("--only {id}: criteria are numbered 1 to 8")))?],
        None => acceptance::run_all(),
    };
    let text: String = results.iter().map(|r| r.line() + "\n").collect();
    let code = if results.iter().all(|r| r.passed) { PASS } else { FAIL };
    Ok(Outcome { code, text, json: serde_json::to_value(&results).expect("results json") })
}
