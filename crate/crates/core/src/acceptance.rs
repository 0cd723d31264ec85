//! The acceptance suite: golden values and independent oracles checked
//! against the engine, one entry per criterion. Run by the `accept`
//! subcommand and by the `acceptance` test target.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ccs::{parse_ccs, wellformed, Context, Prefix, Process};
use crate::fairtest::{bot_s_ccs, fair_equiv_semantic, fair_equiv_standard, gen_tree_tests, passes, Interfaced, SemanticOptions, Verdict, Witness};
use crate::game::{carrier_summary, enabled_moves, view_of, BasicMoveClass, MoveFilter, Play, Position};
use crate::lts::{
    interpret_is_strong_bisim, weak_bisim_bounded, BisimOptions, CcsLts, ChiPullback, Configuration, Explorer, Lts,
    StrategyLts, XiPostcompose,
};
use crate::presheaf::{elements_of_representable, pushout, BaseObject, MoveKind, PresheafMorphism};
use crate::strategy::{extend, theta, translate_ccs, Arena, BehaviourElement, Interpreter, StrategyFamily, StrategyId, TermArena, ViewKey};

/// Seed of every pseudo-random choice in the suite.
pub const SEED: u64 = 0x05ee_dcc5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub elapsed_ms: u128,
    pub limit_ms: u128,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "criterion {} [{}] {}: {} ({} ms, limit {} ms)",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.detail,
            self.elapsed_ms,
            self.limit_ms
        )
    }
}

fn timed(id: u8, name: &str, limit: Duration, f: impl FnOnce() -> Result<String, String>) -> CriterionResult {
    let start = Instant::now();
    let out = f();
    let elapsed = start.elapsed();
    let in_time = elapsed <= limit;
    let (ok, detail) = match out {
        Ok(d) if in_time => (true, d),
        Ok(d) => (false, format!("{d}; over time")),
        Err(d) => (false, d),
    };
    CriterionResult {
        id,
        name: name.to_string(),
        passed: ok,
        detail,
        elapsed_ms: elapsed.as_millis(),
        limit_ms: limit.as_millis(),
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

pub fn run(id: u8) -> Option<CriterionResult> {
    let secs = Duration::from_secs;
    Some(match id {
        1 => timed(1, "element counts", secs(1), element_counts),
        2 => timed(2, "translation goldens", secs(1), translation_goldens),
        3 => timed(3, "interpretation bisimulation", secs(60), interpretation_suite),
        4 => timed(4, "change of base", secs(60), change_of_base_suite),
        5 => timed(5, "undue transitions", secs(1), undue_transitions),
        6 => timed(6, "success predicate oracle", secs(120), bot_s_oracle_suite),
        7 => timed(7, "fair testing coherence", secs(300), fair_testing_coherence),
        8 => timed(8, "extension oracle", secs(60), extension_oracle_suite),
        _ => return None,
    })
}

pub fn run_all() -> Vec<CriterionResult> {
    (1..=8).filter_map(run).collect()
}

// 1 ---------------------------------------------------------------------

fn counts(pairs: &[(&str, usize)]) -> BTreeMap<String, usize> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn nonzero(m: BTreeMap<String, usize>) -> BTreeMap<String, usize> {
    m.into_iter().filter(|(_, v)| *v > 0).collect()
}

fn element_counts() -> Result<String, String> {
    let y3 = nonzero(carrier_summary(&elements_of_representable(BaseObject::Player(3)).presheaf));
    ensure(y3 == counts(&[("star", 3), ("player:3", 1)]), || format!("y[3] = {y3:?}"))?;
    let para = nonzero(carrier_summary(&elements_of_representable(BaseObject::Move(MoveKind::Para { arity: 2 })).presheaf));
    let expected = counts(&[("star", 2), ("player:2", 3), ("paral:2", 1), ("parar:2", 1), ("para:2", 1)]);
    ensure(para == expected, || format!("y Para(2) = {para:?}"))?;
    let i = Position::interface(2).to_presheaf();
    let x = Position::individual(2).to_presheaf();
    let leg = PresheafMorphism::new(i, x, BTreeMap::from([(BaseObject::Star, vec![0, 1])])).map_err(|e| e.to_string())?;
    let po = pushout(&leg, &leg).map_err(|e| e.to_string())?;
    let apex = nonzero(carrier_summary(&po.apex));
    ensure(apex == counts(&[("star", 2), ("player:2", 2)]), || format!("pushout = {apex:?}"))?;
    Ok("y[3], y Para(2) and the doubled [2] match".into())
}

// 2 ---------------------------------------------------------------------

fn translation_goldens() -> Result<String, String> {
    let mut a = Arena::new();
    let tr = |a: &mut Arena, text: &str| {
        let t = parse_ccs(text).expect("golden parses");
        translate_ccs(a, t.context, &t.process)
    };
    // Hand-built tables for the continuations: P = tick.0, Q = 0, R = a1.0 at [2].
    let dead2 = a.deadlock(2);
    let nil2 = a.singleton(dead2);
    let p = a.definite_with(2, &[(BasicMoveClass::Tick, nil2)]);
    let r = a.definite_with(2, &[(BasicMoveClass::In(1), nil2)]);
    let pq = a.strategy(2, vec![p, dead2]);
    let rs = a.singleton(r);
    let sum = a.definite_with(2, &[(BasicMoveClass::In(1), pq), (BasicMoveClass::Out(2), rs)]);
    let expected = a.singleton(sum);
    let got = tr(&mut a, "[2] a1.tick.0 + a1.0 + 'a2.a1.0");
    ensure(got == expected && a.equal(got, expected), || format!("sum: {}", a.dump(got)))?;

    // new a. P with P = a2.tick.0 at [2], under [1].
    let body_tick = a.definite_with(2, &[(BasicMoveClass::Tick, nil2)]);
    let body_tick = a.singleton(body_tick);
    let body = a.definite_with(2, &[(BasicMoveClass::In(2), body_tick)]);
    let body = a.singleton(body);
    let nu = a.definite_with(1, &[(BasicMoveClass::Nu, body)]);
    let expected = a.singleton(nu);
    let got = tr(&mut a, "[1] new a. a2.tick.0");
    ensure(got == expected && a.equal(got, expected), || format!("restriction: {}", a.dump(got)))?;

    // P | Q with P = a1.0, Q = 'a1.tick.0 at [1].
    let dead1 = a.deadlock(1);
    let nil1 = a.singleton(dead1);
    let l = a.definite_with(1, &[(BasicMoveClass::In(1), nil1)]);
    let l = a.singleton(l);
    let t = a.definite_with(1, &[(BasicMoveClass::Tick, nil1)]);
    let t = a.singleton(t);
    let rr = a.definite_with(1, &[(BasicMoveClass::Out(1), t)]);
    let rr = a.singleton(rr);
    let par = a.definite_with(1, &[(BasicMoveClass::ParaL, l), (BasicMoveClass::ParaR, rr)]);
    let expected = a.singleton(par);
    let got = tr(&mut a, "[1] a1.0 | 'a1.tick.0");
    ensure(got == expected && a.equal(got, expected), || format!("parallel: {}", a.dump(got)))?;
    Ok("sum, restriction and parallel tables equal".into())
}

// 3 ---------------------------------------------------------------------

/// Random well-formed processes, at most `max_size` nodes, over contexts up
/// to `max_ctx`.
pub fn random_processes(seed: u64, count: usize, max_size: usize, max_ctx: usize) -> Vec<(Context, Process)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    let mut attempts = 0;
    while out.len() < count && attempts < count * 1000 {
        attempts += 1;
        let ctx = rng.random_range(0..=max_ctx);
        let budget = rng.random_range(1..=max_size);
        let p = gen_process(&mut rng, ctx, budget, None);
        if p.size() <= max_size && wellformed(Context(ctx), &p) && seen.insert((ctx, p.clone())) {
            out.push((Context(ctx), p));
        }
    }
    out
}

fn gen_prefix(rng: &mut ChaCha8Rng, ctx: usize) -> Prefix {
    if ctx == 0 {
        return Prefix::Tick;
    }
    match rng.random_range(0..5) {
        0 => Prefix::Tick,
        1 | 2 => Prefix::In(rng.random_range(1..=ctx)),
        _ => Prefix::Out(rng.random_range(1..=ctx)),
    }
}

/// `var` is the context of the enclosing recursion binder, if any, and
/// whether a prefix separates it from here.
fn gen_process(rng: &mut ChaCha8Rng, ctx: usize, budget: usize, var: Option<(usize, bool)>) -> Process {
    if budget <= 1 {
        return match var {
            Some((c, true)) if c == ctx && rng.random_bool(0.5) => Process::RecVar("X".into()),
            _ => Process::nil(),
        };
    }
    match rng.random_range(0..10) {
        0..=3 => {
            let first = budget.min(rng.random_range(2..=budget.max(2)));
            let pre = gen_prefix(rng, ctx);
            let guarded = var.map(|(c, _)| (c, true));
            let cont = gen_process(rng, ctx, first - 1, guarded);
            let mut branches = vec![(pre, cont)];
            if budget - first >= 2 && rng.random_bool(0.4) {
                let pre = gen_prefix(rng, ctx);
                branches.push((pre, gen_process(rng, ctx, budget - first - 1, guarded)));
            }
            Process::Sum(branches)
        }
        4..=6 => {
            let left = rng.random_range(1..budget.max(2));
            let l = gen_process(rng, ctx, left, var);
            let r = gen_process(rng, ctx, budget.saturating_sub(1 + left).max(1), var);
            Process::par(l, r)
        }
        7 | 8 => Process::nu(gen_process(rng, ctx + 1, budget - 1, var)),
        _ if var.is_none() => Process::rec("X", gen_process(rng, ctx, budget - 1, Some((ctx, false)))),
        _ => Process::nil(),
    }
}

fn fork_seeds(p: &Process) -> bool {
    match p {
        Process::Par(..) => true,
        Process::Nu(b) | Process::RecDef(_, b) => fork_seeds(b),
        Process::Sum(bs) => bs.iter().any(|(_, q)| fork_seeds(q)),
        Process::RecVar(_) => false,
    }
}

fn interpretation_suite() -> Result<String, String> {
    let samples = random_processes(SEED, 120, 8, 3);
    ensure(samples.len() >= 100, || format!("only {} processes generated", samples.len()))?;
    let mut detected = 0;
    let mut with_forks = 0;
    for (ctx, p) in &samples {
        let mut terms = TermArena::new();
        let t = theta(&mut terms, *ctx, p);
        let seed = Configuration::individual(ctx.0, t);
        let mut arena = Arena::new();
        interpret_is_strong_bisim(&mut arena, &terms, &mut Interpreter::new(), &seed, 4)
            .map_err(|m| format!("{p} at [{}]: {m:?}", ctx.0))?;
        if fork_seeds(p) {
            with_forks += 1;
            if interpret_is_strong_bisim(&mut arena, &terms, &mut Interpreter::with_swapped_forks(), &seed, 4).is_err() {
                detected += 1;
            }
        }
    }
    let t = parse_ccs("[2] a1.0 | a2.0").expect("parses");
    let mut terms = TermArena::new();
    let id = theta(&mut terms, t.context, &t.process);
    let mismatch = interpret_is_strong_bisim(&mut Arena::new(), &terms, &mut Interpreter::with_swapped_forks(), &Configuration::individual(2, id), 4);
    let caught = matches!(&mismatch, Err(m) if m.label.starts_with("para"));
    ensure(caught, || format!("swapped forks not caught: {mismatch:?}"))?;
    Ok(format!(
        "{} processes, 0 mismatches; swapped forks caught on a1|a2 and on {detected}/{with_forks} random processes with forks",
        samples.len()
    ))
}

// 4 ---------------------------------------------------------------------

/// The CCS LTS and the change-of-based strategy LTS of a process, compared
/// by weak bisimilarity.
pub fn compare_with_strategies(ctx: Context, p: &Process, cap: usize, depth: usize) -> crate::lts::BisimVerdict {
    let mut arena = Arena::new();
    let s = translate_ccs(&mut arena, ctx, p);
    let d = arena.get(s).defs[0];
    let chi = ChiPullback::new(StrategyLts { arena: Arc::new(arena), max_arity: crate::DEFAULT_MAX_ARITY }, true);
    let start = chi.state((0..ctx.0).collect(), Configuration::individual(ctx.0, d));
    let mut right = Explorer::new(XiPostcompose { inner: chi }, cap);
    let mut left = Explorer::new(CcsLts { ctx }, cap);
    weak_bisim_bounded(&mut left, p, &mut right, &start, BisimOptions { depth, exact: true, strong: false })
}

fn change_of_base_suite() -> Result<String, String> {
    let samples = ["[1] a1.0 | 'a1.0", "[0] new a. (a1.tick.0 | 'a1.0)", "[2] a1.a2.0 + a2.a1.0", "[0] new a. a1.0"];
    let mut exact = 0;
    for text in samples {
        let t = parse_ccs(text).expect("sample parses");
        match compare_with_strategies(t.context, &t.process, 10_000, 6) {
            crate::lts::BisimVerdict::Bisimilar { exact: e, .. } => exact += usize::from(e),
            v => return Err(format!("{text}: {v:?}")),
        }
    }
    Ok(format!("{} samples weakly bisimilar, {exact} decided exactly", samples.len()))
}

// 5 ---------------------------------------------------------------------

fn undue_transitions() -> Result<String, String> {
    let t = parse_ccs("[0] new a. a1.0").expect("parses");
    let mut arena = Arena::new();
    let s = translate_ccs(&mut arena, t.context, &t.process);
    let d = arena.get(s).defs[0];
    let mut base = StrategyLts { arena: Arc::new(arena), max_arity: crate::DEFAULT_MAX_ARITY };
    let c0 = Configuration::individual(0, d);
    let steps = base.successors(&c0).map_err(|e| e.to_string())?;
    ensure(steps.len() == 1 && matches!(steps[0].0.kind, MoveKind::Nu { arity: 0 }), || format!("{} moves from the root", steps.len()))?;
    let c1 = steps[0].1.clone();
    let full_in = base
        .successors(&c1)
        .map_err(|e| e.to_string())?
        .iter()
        .filter(|(m, _)| matches!(m.kind, MoveKind::In { .. }))
        .count();
    ensure(full_in == 1, || format!("{full_in} input transitions over full moves"))?;
    let mut chi = ChiPullback::new(base, false);
    let s0 = chi.state(Vec::new(), c0);
    let l_steps = chi.successors(&s0).map_err(|e| e.to_string())?;
    ensure(l_steps.len() == 1, || "channel creation missing after pullback".into())?;
    let after = chi.successors(&l_steps[0].1).map_err(|e| e.to_string())?;
    ensure(after.is_empty(), || format!("{} transitions after pullback", after.len()))?;
    Ok("one input over full moves, none over interfaced moves".into())
}

// 6 ---------------------------------------------------------------------

/// Every well-formed process of exactly `size` nodes at `ctx`, with at most
/// one recursion variable `X` bound at context `var`.
pub fn enumerate_processes(ctx: usize, size: usize, var: Option<usize>, memo: &mut HashMap<(usize, usize, Option<usize>), Vec<Process>>) -> Vec<Process> {
    if let Some(v) = memo.get(&(ctx, size, var)) {
        return v.clone();
    }
    let mut out = Vec::new();
    if size == 1 {
        out.push(Process::nil());
        if var == Some(ctx) {
            out.push(Process::RecVar("X".into()));
        }
    }
    if size >= 3 {
        for left in 1..size - 1 {
            for l in enumerate_processes(ctx, left, var, memo) {
                for r in enumerate_processes(ctx, size - 1 - left, var, memo) {
                    out.push(Process::par(l.clone(), r));
                }
            }
        }
    }
    if size >= 2 {
        for b in enumerate_processes(ctx + 1, size - 1, var, memo) {
            out.push(Process::nu(b));
        }
        if var.is_none() {
            for b in enumerate_processes(ctx, size - 1, Some(ctx), memo) {
                out.push(Process::rec("X", b));
            }
        }
        out.extend(enumerate_sums(ctx, size, var, memo));
    }
    out.retain(|p| !matches!(p, Process::RecDef(_, b) if matches!(**b, Process::RecVar(_))));
    memo.insert((ctx, size, var), out.clone());
    out
}

fn enumerate_sums(ctx: usize, size: usize, var: Option<usize>, memo: &mut HashMap<(usize, usize, Option<usize>), Vec<Process>>) -> Vec<Process> {
    let mut prefixes = vec![Prefix::Tick];
    for c in 1..=ctx {
        prefixes.push(Prefix::In(c));
        prefixes.push(Prefix::Out(c));
    }
    let mut out = Vec::new();
    for first in 2..=size {
        for cont in enumerate_processes(ctx, first - 1, var, memo) {
            for &pre in &prefixes {
                let head = (pre, cont.clone());
                if first == size {
                    out.push(Process::Sum(vec![head]));
                } else if size - first >= 2 {
                    for rest in enumerate_sums(ctx, size - first, var, memo) {
                        let Process::Sum(mut bs) = rest else { unreachable!() };
                        bs.insert(0, head.clone());
                        out.push(Process::Sum(bs));
                    }
                }
            }
        }
    }
    out
}

/// An independent reduction semantics: a state is a multiset of sequential
/// threads over global channel names.
pub mod oracle {
    use super::*;

    #[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
    pub enum Term {
        Nil,
        Sum(Vec<(Act, Term)>),
        Par(Box<Term>, Box<Term>),
        New(Box<Term>),
        Rec(Box<Term>),
        Var,
    }

    #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
    pub enum Act {
        Tick,
        /// Channel level, 1-based.
        Get(usize),
        Put(usize),
    }

    pub fn from_process(p: &Process) -> Term {
        match p {
            Process::Par(l, r) => Term::Par(Box::new(from_process(l)), Box::new(from_process(r))),
            Process::Nu(b) => Term::New(Box::new(from_process(b))),
            Process::Sum(bs) if bs.is_empty() => Term::Nil,
            Process::Sum(bs) => Term::Sum(
                bs.iter()
                    .map(|(pre, q)| {
                        let a = match pre {
                            Prefix::Tick => Act::Tick,
                            Prefix::In(c) => Act::Get(*c),
                            Prefix::Out(c) => Act::Put(*c),
                        };
                        (a, from_process(q))
                    })
                    .collect(),
            ),
            Process::RecVar(_) => Term::Var,
            Process::RecDef(_, b) => Term::Rec(Box::new(from_process(b))),
        }
    }

    fn subst(t: &Term, r: &Term) -> Term {
        match t {
            Term::Var => r.clone(),
            Term::Rec(_) | Term::Nil => t.clone(),
            Term::Sum(bs) => Term::Sum(bs.iter().map(|(a, u)| (*a, subst(u, r))).collect()),
            Term::Par(a, b) => Term::Par(Box::new(subst(a, r)), Box::new(subst(b, r))),
            Term::New(b) => Term::New(Box::new(subst(b, r))),
        }
    }

    /// A guarded sum with the global names of its channel levels.
    pub type Thread = (Vec<(Act, Term)>, Vec<u32>);
    pub type State = Vec<Thread>;

    fn spawn(t: &Term, names: &[u32], fresh: &mut u32, out: &mut State) {
        match t {
            Term::Nil | Term::Var => {}
            Term::Sum(bs) => out.push((bs.clone(), names.to_vec())),
            Term::Par(a, b) => {
                spawn(a, names, fresh, out);
                spawn(b, names, fresh, out);
            }
            Term::New(b) => {
                let mut inner = names.to_vec();
                inner.push(*fresh);
                *fresh += 1;
                spawn(b, &inner, fresh, out);
            }
            Term::Rec(b) => spawn(&subst(b, t), names, fresh, out),
        }
    }

    /// Renames private names (those above `free`) by first occurrence and
    /// sorts the threads, twice.
    fn normalise(mut s: State, free: u32) -> State {
        for _ in 0..2 {
            s.sort();
            let mut map: HashMap<u32, u32> = HashMap::new();
            let mut next = free + 1;
            for (_, names) in &s {
                for &n in names {
                    if n > free && !map.contains_key(&n) {
                        map.insert(n, next);
                        next += 1;
                    }
                }
            }
            for (_, names) in s.iter_mut() {
                for n in names.iter_mut() {
                    if *n > free {
                        *n = map[n];
                    }
                }
            }
        }
        s.sort();
        s
    }

    pub fn initial(ctx: usize, p: &Process) -> State {
        let names: Vec<u32> = (1..=ctx as u32).collect();
        let mut fresh = ctx as u32 + 1;
        let mut out = Vec::new();
        spawn(&from_process(p), &names, &mut fresh, &mut out);
        normalise(out, ctx as u32)
    }

    fn channel(names: &[u32], level: usize) -> u32 {
        names[level - 1]
    }

    /// Internal reductions: an input and an output on the same name in two
    /// different threads.
    /// Copies of a thread give the same reductions, so only the first copy
    /// of each (`s` is sorted) is paired.
    pub fn reductions(s: &State, free: u32) -> Vec<State> {
        let mut fresh = s.iter().flat_map(|(_, ns)| ns.iter().copied()).max().unwrap_or(free).max(free) + 1;
        let mut out = Vec::new();
        for (i, (bi, ni)) in s.iter().enumerate() {
            if i > 0 && s[i - 1] == s[i] {
                continue;
            }
            let mut prev = None;
            for (j, (bj, nj)) in s.iter().enumerate() {
                if i == j || prev == Some(&s[j]) {
                    continue;
                }
                prev = Some(&s[j]);
                for (ai, ci) in bi {
                    let Act::Get(x) = ai else { continue };
                    for (aj, cj) in bj {
                        let Act::Put(y) = aj else { continue };
                        if channel(ni, *x) != channel(nj, *y) {
                            continue;
                        }
                        let mut next: State =
                            s.iter().enumerate().filter(|(k, _)| *k != i && *k != j).map(|(_, t)| t.clone()).collect();
                        spawn(ci, ni, &mut fresh, &mut next);
                        spawn(cj, nj, &mut fresh, &mut next);
                        out.push(normalise(next, free));
                    }
                }
            }
        }
        out
    }

    pub fn can_tick(s: &State) -> bool {
        s.iter().any(|(bs, _)| bs.iter().any(|(a, _)| *a == Act::Tick))
    }

    /// `Some(true)` when success stays reachable along every internal
    /// path; `None` past `budget` states.
    pub fn must_reach_success(ctx: usize, p: &Process, budget: usize) -> Option<bool> {
        let free = ctx as u32;
        let start = initial(ctx, p);
        let mut index: HashMap<State, usize> = HashMap::from([(start.clone(), 0)]);
        let mut states = vec![start];
        let mut edges: Vec<Vec<usize>> = Vec::new();
        let mut queue = VecDeque::from([0usize]);
        while let Some(i) = queue.pop_front() {
            let mut succ = Vec::new();
            for t in reductions(&states[i], free) {
                let k = match index.get(&t) {
                    Some(&k) => k,
                    None => {
                        if states.len() >= budget {
                            return None;
                        }
                        index.insert(t.clone(), states.len());
                        states.push(t);
                        queue.push_back(states.len() - 1);
                        states.len() - 1
                    }
                };
                succ.push(k);
            }
            if edges.len() <= i {
                edges.resize(i + 1, Vec::new());
            }
            edges[i] = succ;
        }
        edges.resize(states.len(), Vec::new());
        let mut good: Vec<bool> = states.iter().map(can_tick).collect();
        let mut changed = true;
        while changed {
            changed = false;
            for i in 0..states.len() {
                if !good[i] && edges[i].iter().any(|&k| good[k]) {
                    good[i] = true;
                    changed = true;
                }
            }
        }
        Some(good.iter().all(|&g| g))
    }
}

fn bot_s_oracle_suite() -> Result<String, String> {
    let mut memo = HashMap::new();
    let (mut checked, mut skipped) = (0usize, 0usize);
    for ctx in 0..=2 {
        for size in 1..=5 {
            for p in enumerate_processes(ctx, size, None, &mut memo) {
                if !wellformed(Context(ctx), &p) {
                    continue;
                }
                let (v, _) = bot_s_ccs(Context(ctx), &p, 2_000);
                let o = oracle::must_reach_success(ctx, &p, 2_000);
                match (&v, o) {
                    (Verdict::Inconclusive { .. }, _) | (_, None) => skipped += 1,
                    (v, Some(b)) if v.is_pass() == b => checked += 1,
                    (v, Some(b)) => return Err(format!("[{ctx}] {p}: engine {v:?}, oracle {b}")),
                }
            }
        }
    }
    ensure(skipped == 0, || format!("{skipped} processes over budget"))?;
    Ok(format!("{checked} processes agree"))
}

// 7 ---------------------------------------------------------------------

/// The pairs compared in the coherence check, at `[1]` except the last.
pub const COHERENCE_PAIRS: &[(&str, &str)] = &[
    ("[1] a1.0", "[1] 0"),
    ("[1] 'a1.0", "[1] 0"),
    ("[1] tick.0", "[1] 0"),
    ("[1] a1.tick.0", "[1] a1.0"),
    ("[1] 'a1.tick.0", "[1] tick.0"),
    ("[1] a1.0 + tick.0", "[1] tick.0"),
    ("[1] a1.0 + tick.0", "[1] a1.0"),
    ("[1] a1.0 | 'a1.0", "[1] a1.'a1.0 + 'a1.a1.0"),
    ("[1] a1.0 | 'a1.0", "[1] 0"),
    ("[1] new a. (a2.0 | 'a2.0)", "[1] 0"),
    ("[1] new a. (a2.tick.0 | 'a2.0)", "[1] tick.0"),
    ("[1] new a. (a2.tick.0 | 'a2.0)", "[1] 0"),
    ("[1] rec X. a1.X", "[1] a1.a1.0"),
    ("[1] rec X. a1.X", "[1] rec X. a1.a1.X"),
    ("[1] a1.(a1.0 + tick.0)", "[1] a1.a1.0 + a1.tick.0"),
    ("[1] a1.0 + a1.tick.0", "[1] a1.tick.0"),
    ("[1] a1.0 + a1.tick.0", "[1] a1.0"),
    ("[1] 'a1.0 | 'a1.0", "[1] 'a1.'a1.0"),
    ("[1] a1.0 | a1.0", "[1] a1.a1.0"),
    ("[1] tick.0 | a1.0", "[1] tick.0"),
    ("[1] tick.0 + 'a1.0", "[1] 'a1.0 + tick.0"),
    ("[1] a1.'a1.0", "[1] a1.0"),
    ("[1] 'a1.a1.0", "[1] 'a1.0"),
    ("[1] new a. a2.0", "[1] 0"),
    ("[1] new a. (a1.0 | 'a2.0)", "[1] a1.0"),
    ("[1] tick.tick.0", "[1] tick.0"),
    ("[1] a1.tick.0 | 'a1.0", "[1] tick.0 | a1.0 | 'a1.0"),
    ("[1] rec X. (a1.X + tick.0)", "[1] a1.0 + tick.0"),
    ("[1] rec X. new a. (a2.0 | 'a2.0)", "[1] 0"),
    ("[1] a1.0 + 'a1.0", "[1] a1.0 | 'a1.0"),
    ("[1] 'a1.tick.0 + 'a1.0", "[1] 'a1.tick.0"),
    ("[2] a1.0 | a2.0", "[2] a2.0 | a1.0"),
];

/// Per-test agreement of the two sides and the two equivalence verdicts.
pub struct Coherence {
    pub pairs: usize,
    pub tests_compared: usize,
    pub both_definite: usize,
}

fn coherence(opts: SemanticOptions) -> Result<Coherence, String> {
    let mut stats = Coherence { pairs: 0, tests_compared: 0, both_definite: 0 };
    let mut families: HashMap<usize, Vec<Process>> = HashMap::new();
    for &(p_text, q_text) in COHERENCE_PAIRS {
        let (p, q) = (parse_ccs(p_text).map_err(|e| e.to_string())?, parse_ccs(q_text).map_err(|e| e.to_string())?);
        let ctx = p.context;
        let tests = families.entry(ctx.0).or_insert_with(|| gen_tree_tests(ctx, 2, 2)).clone();
        let mut arena = Arena::new();
        let sp = translate_ccs(&mut arena, ctx, &p.process);
        let sq = translate_ccs(&mut arena, ctx, &q.process);
        let ts: Vec<StrategyId> = tests.iter().map(|t| translate_ccs(&mut arena, ctx, t)).collect();
        let sp = Interfaced::individual(&arena, sp, p.process.to_string());
        let sq = Interfaced::individual(&arena, sq, q.process.to_string());
        let ts: Vec<Interfaced> = ts.iter().zip(&tests).map(|(&s, t)| Interfaced::individual(&arena, s, t.to_string())).collect();
        let arena = Arc::new(arena);
        for (t, st) in tests.iter().zip(&ts) {
            for (proc, subj) in [(&p.process, &sp), (&q.process, &sq)] {
                let (std, _) = bot_s_ccs(ctx, &Process::par(proc.clone(), t.clone()), 10_000);
                let (sem, _) = passes(&arena, subj, st, opts)?;
                stats.tests_compared += 1;
                if std.is_definite() && sem.is_definite() {
                    stats.both_definite += 1;
                    ensure(std.is_pass() == sem.is_pass(), || format!("{proc} against {t}: standard {std:?}, semantic {sem:?}"))?;
                }
            }
        }
        let standard = fair_equiv_standard(&p.process, &q.process, ctx, &tests, 10_000);
        let semantic = fair_equiv_semantic(&arena, &sp, &sq, &ts, opts)?;
        if standard.verdict.is_definite() && semantic.verdict.is_definite() {
            ensure(standard.verdict.is_pass() == semantic.verdict.is_pass(), || {
                format!("{p_text} vs {q_text}: {:?} / {:?}", standard.verdict, semantic.verdict)
            })?;
        }
        if (p_text, q_text) == COHERENCE_PAIRS[0] {
            let w = |v: &Verdict| match v {
                Verdict::Fail { witness: Witness::Test { test, .. }, .. } => Some(test.clone()),
                _ => None,
            };
            let (a, b) = (w(&standard.verdict), w(&semantic.verdict));
            ensure(a.as_deref() == Some("'a1.tick.0") && a == b, || format!("witnesses differ: {a:?} / {b:?}"))?;
        }
        if p_text == "[2] a1.0 | a2.0" {
            ensure(standard.verdict.is_pass() && semantic.verdict.is_pass(), || "a|b and b|a separated".into())?;
        }
        stats.pairs += 1;
    }
    Ok(stats)
}

fn fair_testing_coherence() -> Result<String, String> {
    let opts = SemanticOptions { depth: 4, budget: 20_000, max_arity: crate::DEFAULT_MAX_ARITY };
    let c = coherence(opts)?;
    ensure(c.pairs >= 30, || format!("{} pairs", c.pairs))?;
    Ok(format!(
        "{} pairs, {} test runs per side agree ({} definite on both sides)",
        c.pairs, c.tests_compared, c.both_definite
    ))
}

// 8 ---------------------------------------------------------------------

/// States of `s` over a view, enumerated directly on the arena.
fn brute_states(arena: &Arena, s: StrategyId, moves: &[BasicMoveClass]) -> Vec<Vec<usize>> {
    let st = arena.get(s);
    let mut out = Vec::new();
    for (i, &d) in st.defs.iter().enumerate() {
        match moves.split_first() {
            None => out.push(vec![i]),
            Some((b, rest)) => {
                let table = &arena.get_definite(d).table;
                let Some(&next) = table.get(b.index()).filter(|_| b.is_valid_at(st.arity)) else { continue };
                for tail in brute_states(arena, next, rest) {
                    out.push([vec![i], tail].concat());
                }
            }
        }
    }
    out
}

/// Matching families by brute force: every assignment of a state to every
/// (root, view) met along the play, kept when states over comparable views
/// of the same root agree on the common prefix.
pub fn brute_force_extend(arena: &Arena, family: &StrategyFamily, play: &Play) -> Vec<BehaviourElement> {
    let mut keys: BTreeSet<ViewKey> = BTreeSet::new();
    for k in 0..=play.len() {
        let q = play.prefix(k);
        for x in 0..q.final_position().players.len() {
            keys.insert((q.lineage(x)[0], view_of(&q, x).expect("player exists")));
        }
    }
    let keys: Vec<ViewKey> = keys.into_iter().collect();
    let options: Vec<Vec<Vec<usize>>> =
        keys.iter().map(|(root, v)| brute_states(arena, family.components[*root], &v.moves)).collect();
    let mut out = Vec::new();
    let mut pick = vec![0usize; keys.len()];
    if options.iter().any(|o| o.is_empty()) {
        return out;
    }
    loop {
        let ok = (0..keys.len()).all(|a| {
            (0..keys.len()).all(|b| {
                let ((ra, va), (rb, vb)) = (&keys[a], &keys[b]);
                ra != rb || !va.is_prefix_of(vb) || {
                    let (sa, sb) = (&options[a][pick[a]], &options[b][pick[b]]);
                    sb[..sa.len()] == sa[..]
                }
            })
        });
        if ok {
            let states = keys.iter().zip(&pick).enumerate().map(|(k, (key, &i))| (key.clone(), options[k][i].clone())).collect();
            out.push(BehaviourElement { states });
        }
        let mut k = 0;
        loop {
            if k == keys.len() {
                out.sort();
                return out;
            }
            pick[k] += 1;
            if pick[k] < options[k].len() {
                break;
            }
            pick[k] = 0;
            k += 1;
        }
    }
}

/// Strategies of each arity used to populate the families: translations
/// and two-state sums of them.
fn strategy_pool(arena: &mut Arena, arity: usize) -> Vec<StrategyId> {
    let texts: &[&str] = match arity {
        0 => &["0", "tick.0", "tick.0 | tick.0", "new a. (a1.0 | 'a1.tick.0)"],
        1 => &["a1.0 + a1.tick.0", "a1.0 | 'a1.0", "'a1.(tick.0 | a1.0)", "new a. (a2.0 + a1.0)"],
        _ => &["a1.0 + 'a2.tick.0", "a1.0 | a2.0", "new a. a3.'a1.0", "tick.0 + tick.a2.0"],
    };
    let mut out: Vec<StrategyId> = texts
        .iter()
        .map(|t| {
            let p = parse_ccs(&format!("[{arity}] {t}")).expect("pool parses");
            translate_ccs(arena, p.context, &p.process)
        })
        .collect();
    let d: Vec<_> = out.iter().map(|&s| arena.get(s).defs[0]).collect();
    out.push(arena.strategy(arity, vec![d[0], d[1]]));
    out.push(arena.strategy(arity, vec![d[1], d[2], d[3]]));
    out
}

fn extension_oracle_suite() -> Result<String, String> {
    let mut arena = Arena::new();
    let pools: Vec<Vec<StrategyId>> = (0..=2).map(|n| strategy_pool(&mut arena, n)).collect();
    let positions = vec![
        Position::individual(0),
        Position::individual(1),
        Position::individual(2),
        Position::new(1, vec![vec![0], vec![0]]).map_err(|e| e.to_string())?,
        Position::new(2, vec![vec![0], vec![1]]).map_err(|e| e.to_string())?,
        Position::new(2, vec![vec![0, 1], vec![1]]).map_err(|e| e.to_string())?,
        Position::new(1, vec![vec![0], vec![]]).map_err(|e| e.to_string())?,
    ];
    let (mut plays, mut families, mut elements) = (0usize, 0usize, 0usize);
    for pos in &positions {
        let choices: Vec<&Vec<StrategyId>> = pos.players.iter().map(|p| &pools[p.len()]).collect();
        let mut combos: Vec<Vec<StrategyId>> = vec![Vec::new()];
        for c in choices {
            combos = combos.into_iter().flat_map(|v| c.iter().map(move |&s| [v.clone(), vec![s]].concat())).collect();
        }
        for comps in combos {
            let family = StrategyFamily::new(&arena, pos.clone(), comps).map_err(|e| e.to_string())?;
            families += 1;
            let mut frontier = vec![Play::identity(pos.clone())];
            for len in 0..=2 {
                let mut next = Vec::new();
                for play in &frontier {
                    let got = extend(&arena, &family, play);
                    let want = brute_force_extend(&arena, &family, play);
                    ensure(got == want, || {
                        format!("{} on {pos}: {} vs {} elements", play.steps.iter().map(|m| m.label()).collect::<Vec<_>>().join(" "), got.len(), want.len())
                    })?;
                    plays += 1;
                    elements += got.len();
                    if len < 2 {
                        for m in enabled_moves(play.final_position(), MoveFilter::All) {
                            next.push(play.compose(m).map_err(|e| e.to_string())?);
                        }
                    }
                }
                frontier = next;
            }
        }
    }
    Ok(format!("{plays} plays over {families} families, {elements} elements, no disagreement"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_processes_are_well_formed_and_deterministic() {
        let a = random_processes(7, 30, 8, 3);
        assert_eq!(a, random_processes(7, 30, 8, 3));
        assert!(a.iter().all(|(c, p)| wellformed(*c, p) && p.size() <= 8));
    }

    #[test]
    fn enumeration_counts() {
        let mut memo = HashMap::new();
        assert_eq!(enumerate_processes(0, 1, None, &mut memo), vec![Process::nil()]);
        let two: Vec<String> = enumerate_processes(0, 2, None, &mut memo).iter().map(ToString::to_string).collect();
        assert_eq!(two, vec!["new a. 0", "rec X. 0", "tick.0"]);
        let all = enumerate_processes(1, 4, None, &mut memo);
        assert_eq!(all.iter().collect::<BTreeSet<_>>().len(), all.len());
    }

    #[test]
    fn oracle_on_examples() {
        let check = |text: &str| {
            let t = parse_ccs(text).unwrap();
            oracle::must_reach_success(t.context.0, &t.process, 100).unwrap()
        };
        assert!(check("[0] tick.0"));
        assert!(!check("[1] 'a1.tick.0"));
        assert!(check("[1] a1.tick.0 | 'a1.0"));
        assert!(!check("[1] a1.tick.0 + a1.0 | 'a1.0"));
        assert!(check("[0] new a. (a1.tick.0 | 'a1.0)"));
        assert!(check("[1] new a. (a2.0 | 'a2.0) | tick.0 + 'a1.0"));
    }

    #[test]
    fn brute_force_on_fork() {
        let mut a = Arena::new();
        let pool = strategy_pool(&mut a, 1);
        let f = StrategyFamily::individual(&a, pool[1]);
        let m = crate::game::instantiate(MoveKind::Para { arity: 1 }, &f.position, crate::game::Anchor::Player(0)).unwrap();
        let play = Play::identity(f.position.clone()).compose(m).unwrap();
        assert_eq!(extend(&a, &f, &play), brute_force_extend(&a, &f, &play));
        assert_eq!(extend(&a, &f, &play).len(), 1);
    }

    #[test]
    fn cheap_criteria() {
        for id in [1, 2, 5] {
            let r = run(id).unwrap();
            assert!(r.passed, "{}", r.line());
        }
    }
}
