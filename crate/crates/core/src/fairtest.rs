//! Fair testing: the success predicate on CCS-labelled LTSs, standard fair
//! testing against finite families, tree tests, and the semantic check on
//! strategy families.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::ccs::{Context, LabelA, Prefix, Process};
use crate::game::{enabled_moves, is_successful, MoveFilter, Play, Position};
use crate::lts::{ChiPullback, Configuration, Explorer, Lts, LtsError, StrategyLts, XiPostcompose};
use crate::strategy::{extend, extend_step, pair, Arena, BehaviourElement, DefiniteId, StrategyFamily};

/// Evidence for a failed check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// A silent path to a state from which success is unreachable.
    SilentPath { states: Vec<String> },
    /// A test on which the two sides disagree.
    Test { test: String, left_passes: bool, right_passes: bool },
    /// An unsuccessful closed-world play none of whose extensions succeed.
    Play { moves: Vec<String> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    /// `bounded` when only checked up to a depth.
    Pass { bounded: bool },
    Fail { witness: Witness, bounded: bool },
    Inconclusive { reason: String },
}

impl Verdict {
    pub fn is_pass(&self) -> bool {
        matches!(self, Verdict::Pass { .. })
    }

    pub fn is_fail(&self) -> bool {
        matches!(self, Verdict::Fail { .. })
    }

    /// Decided on the whole state space.
    pub fn is_definite(&self) -> bool {
        matches!(self, Verdict::Pass { bounded: false } | Verdict::Fail { bounded: false, .. })
    }

    fn budget(e: LtsError) -> Verdict {
        Verdict::Inconclusive { reason: e.to_string() }
    }
}

/// A verdict with the figures reported alongside it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    #[serde(flatten)]
    pub verdict: Verdict,
    pub budget_used: usize,
    pub depth: usize,
    pub family_size: usize,
}

/// Whether every silent path from `s` can be continued by silent steps to a
/// success edge. At most `budget` states are visited.
pub fn bot_s<L: Lts<Label = LabelA>>(e: &mut Explorer<L>, s: &L::State, budget: usize) -> Verdict {
    match bot_s_inner(e, s, budget) {
        Ok(v) => v,
        Err(err) => Verdict::budget(err),
    }
}

fn bot_s_inner<L: Lts<Label = LabelA>>(e: &mut Explorer<L>, s: &L::State, budget: usize) -> Result<Verdict, LtsError> {
    let root = e.id(s)?;
    let mut parent: HashMap<usize, usize> = HashMap::from([(root, root)]);
    let mut order = vec![root];
    let mut queue = VecDeque::from([root]);
    let mut silent: HashMap<usize, Vec<usize>> = HashMap::new();
    let mut good: BTreeSet<usize> = BTreeSet::new();
    while let Some(i) = queue.pop_front() {
        let mut next = Vec::new();
        for (l, t) in e.successors(i)? {
            if l.is_tick() {
                good.insert(i);
            } else if l.is_silent() {
                next.push(t);
                if let std::collections::hash_map::Entry::Vacant(v) = parent.entry(t) {
                    if order.len() >= budget {
                        return Err(LtsError::StateCap(budget));
                    }
                    v.insert(i);
                    order.push(t);
                    queue.push_back(t);
                }
            }
        }
        silent.insert(i, next);
    }
    // Backward closure of the success states along silent edges.
    let mut changed = true;
    while changed {
        changed = false;
        for &i in &order {
            if !good.contains(&i) && silent[&i].iter().any(|t| good.contains(t)) {
                good.insert(i);
                changed = true;
            }
        }
    }
    let Some(&bad) = order.iter().find(|i| !good.contains(i)) else {
        return Ok(Verdict::Pass { bounded: false });
    };
    let mut path = vec![bad];
    while *path.last().expect("non-empty") != root {
        path.push(parent[path.last().expect("non-empty")]);
    }
    path.reverse();
    let states = path.into_iter().map(|i| e.describe(i)).collect();
    Ok(Verdict::Fail { witness: Witness::SilentPath { states }, bounded: false })
}

/// [`bot_s`] on the CCS LTS of `p` at `ctx`, with the number of states used.
pub fn bot_s_ccs(ctx: Context, p: &Process, budget: usize) -> (Verdict, usize) {
    let mut e = Explorer::new(crate::lts::CcsLts { ctx }, budget.saturating_add(1));
    let v = bot_s(&mut e, p, budget);
    (v, e.len())
}

/// Compares `p` and `q` under every test of the family: both must pass or
/// both fail each composite with the test.
pub fn fair_equiv_standard(p: &Process, q: &Process, ctx: Context, tests: &[Process], budget: usize) -> Report {
    let mut used = 0;
    let mut inconclusive = None;
    for t in tests {
        let (vp, np) = bot_s_ccs(ctx, &Process::par(p.clone(), t.clone()), budget);
        let (vq, nq) = bot_s_ccs(ctx, &Process::par(q.clone(), t.clone()), budget);
        used = used.max(np).max(nq);
        match (&vp, &vq) {
            (Verdict::Inconclusive { reason }, _) | (_, Verdict::Inconclusive { reason }) => {
                inconclusive.get_or_insert_with(|| format!("test {t}: {reason}"));
            }
            _ if vp.is_pass() != vq.is_pass() => {
                let witness = Witness::Test { test: t.to_string(), left_passes: vp.is_pass(), right_passes: vq.is_pass() };
                return Report { verdict: Verdict::Fail { witness, bounded: false }, budget_used: used, depth: 0, family_size: tests.len() };
            }
            _ => {}
        }
    }
    let verdict = match inconclusive {
        Some(reason) => Verdict::Inconclusive { reason },
        None => Verdict::Pass { bounded: false },
    };
    Report { verdict, budget_used: used, depth: 0, family_size: tests.len() }
}

/// Guarded-sum trees over inputs, outputs and ticks on channels `1..=ctx`,
/// of depth at most `depth` and branching at most `width`, up to branch
/// order. Narrow trees come first, then shallow ones.
pub fn gen_tree_tests(ctx: Context, depth: usize, width: usize) -> Vec<Process> {
    let mut prefixes = Vec::new();
    for c in 1..=ctx.0 {
        prefixes.push(Prefix::In(c));
        prefixes.push(Prefix::Out(c));
    }
    prefixes.push(Prefix::Tick);
    // (tree, depth, width)
    let mut level: Vec<(Process, usize, usize)> = vec![(Process::nil(), 0, 0)];
    for _ in 0..depth {
        let branches: Vec<(Prefix, &(Process, usize, usize))> =
            prefixes.iter().flat_map(|&pre| level.iter().map(move |t| (pre, t))).collect();
        let mut next = vec![(Process::nil(), 0, 0)];
        let mut layer: Vec<(usize, Vec<usize>)> = vec![(0, Vec::new())];
        for _ in 0..width {
            let mut grown = Vec::new();
            for (from, picks) in &layer {
                for k in *from..branches.len() {
                    let mut p = picks.clone();
                    p.push(k);
                    grown.push((k, p));
                }
            }
            for (_, picks) in &grown {
                let sum = picks.iter().map(|&k| (branches[k].0, branches[k].1 .0.clone())).collect();
                let d = 1 + picks.iter().map(|&k| branches[k].1 .1).max().unwrap_or(0);
                let w = picks.len().max(picks.iter().map(|&k| branches[k].1 .2).max().unwrap_or(0));
                next.push((Process::Sum(sum), d, w));
            }
            layer = grown;
        }
        level = next;
    }
    let mut indexed: Vec<(usize, usize, usize, Process)> =
        level.into_iter().enumerate().map(|(i, (p, d, w))| (w, d, i, p)).collect();
    indexed.sort_by_key(|&(w, d, i, _)| (w, d, i));
    indexed.into_iter().map(|(.., p)| p).collect()
}

/// A strategy family over a position with an interface into it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interfaced {
    pub interface: usize,
    pub embedding: Vec<usize>,
    pub family: StrategyFamily,
    /// Shown in witnesses.
    pub name: String,
}

impl Interfaced {
    /// A single strategy whose channels are all in the interface.
    pub fn individual(arena: &Arena, s: crate::strategy::StrategyId, name: impl Into<String>) -> Interfaced {
        let family = StrategyFamily::individual(arena, s);
        let n = family.position.channels;
        Interfaced { interface: n, embedding: (0..n).collect(), family, name: name.into() }
    }
}

/// Budgets of the semantic check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SemanticOptions {
    /// Play depth of the fallback search.
    pub depth: usize,
    /// States of the closed-world graph, or plays of the fallback search.
    pub budget: usize,
    pub max_arity: usize,
}

/// The initial configurations of a family: one per choice of an initial
/// state for every component.
fn initial_configs(arena: &Arena, f: &StrategyFamily) -> Vec<Configuration<DefiniteId>> {
    let mut out = vec![Vec::new()];
    for &s in &f.components {
        let defs = &arena.get(s).defs;
        out = out
            .into_iter()
            .flat_map(|c: Vec<DefiniteId>| {
                defs.iter().map(move |&d| {
                    let mut c = c.clone();
                    c.push(d);
                    c
                })
            })
            .collect();
    }
    out.into_iter().map(|components| Configuration { position: f.position.clone(), components }).collect()
}

/// Whether every unsuccessful closed-world play of the family extends to a
/// successful one. Decided exactly on the closed-world strategy graph when
/// it fits in the budget; otherwise searched over plays up to the depth.
pub fn semantic_bot(arena: &Arc<Arena>, f: &StrategyFamily, opts: SemanticOptions) -> (Verdict, usize) {
    let lts = ChiPullback::new(StrategyLts { arena: arena.clone(), max_arity: opts.max_arity }, true);
    let mut e = Explorer::new(XiPostcompose { inner: lts }, opts.budget.saturating_add(1));
    let mut exact = Some(Verdict::Pass { bounded: false });
    for c in initial_configs(arena, f) {
        let s = e.lts.inner.state(Vec::new(), c);
        match bot_s(&mut e, &s, opts.budget) {
            Verdict::Pass { .. } => {}
            Verdict::Fail { witness, .. } => {
                exact = Some(Verdict::Fail { witness, bounded: false });
                break;
            }
            Verdict::Inconclusive { .. } => {
                exact = None;
                break;
            }
        }
    }
    if let Some(v) = exact {
        return (v, e.len());
    }
    semantic_bot_plays(arena, f, opts)
}

/// The literal bounded check over plays and their behaviour elements.
pub fn semantic_bot_plays(arena: &Arena, f: &StrategyFamily, opts: SemanticOptions) -> (Verdict, usize) {
    let mut visited = 0usize;
    let root = Play::identity(f.position.clone());
    let elements = extend(arena, f, &root);
    match search(arena, f, root, elements, opts, &mut visited) {
        Ok(None) => (Verdict::Pass { bounded: true }, visited),
        Ok(Some(play)) => {
            let moves = play.steps.iter().map(|m| m.label()).collect();
            (Verdict::Fail { witness: Witness::Play { moves }, bounded: true }, visited)
        }
        Err(e) => (Verdict::budget(e), visited),
    }
}

fn moves_from(p: &Play, max_arity: usize) -> Vec<crate::game::GlobalMove> {
    enabled_moves(p.final_position(), MoveFilter::ClosedWorld)
        .into_iter()
        .filter(|m| m.final_position.max_arity() <= max_arity)
        .collect()
}

/// Finds an unsuccessful play shorter than the depth with an element that
/// has no successful extension within the depth.
fn search(
    arena: &Arena,
    f: &StrategyFamily,
    play: Play,
    elements: Vec<BehaviourElement>,
    opts: SemanticOptions,
    visited: &mut usize,
) -> Result<Option<Play>, LtsError> {
    *visited += 1;
    if *visited > opts.budget {
        return Err(LtsError::StateCap(opts.budget));
    }
    if is_successful(&play) || play.len() >= opts.depth {
        return Ok(None);
    }
    for el in &elements {
        if !succeeds(arena, f, &play, vec![el.clone()], opts.depth - play.len(), opts, visited)? {
            return Ok(Some(play));
        }
    }
    for m in moves_from(&play, opts.max_arity) {
        let next = play.compose(m).expect("enabled move");
        let els = extend_step(arena, f, &next, elements.clone());
        if els.is_empty() {
            continue;
        }
        if let Some(w) = search(arena, f, next, els, opts, visited)? {
            return Ok(Some(w));
        }
    }
    Ok(None)
}

fn succeeds(
    arena: &Arena,
    f: &StrategyFamily,
    play: &Play,
    elements: Vec<BehaviourElement>,
    remaining: usize,
    opts: SemanticOptions,
    visited: &mut usize,
) -> Result<bool, LtsError> {
    if remaining == 0 {
        return Ok(false);
    }
    for m in moves_from(play, opts.max_arity) {
        *visited += 1;
        if *visited > opts.budget {
            return Err(LtsError::StateCap(opts.budget));
        }
        let tick = matches!(m.kind, crate::presheaf::MoveKind::Tick { .. });
        let next = play.compose(m).expect("enabled move");
        let els = extend_step(arena, f, &next, elements.clone());
        if els.is_empty() {
            continue;
        }
        if tick || succeeds(arena, f, &next, els, remaining - 1, opts, visited)? {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Whether the subject passes the test: the two families are glued along
/// the interface and checked with [`semantic_bot`].
pub fn passes(arena: &Arc<Arena>, subject: &Interfaced, test: &Interfaced, opts: SemanticOptions) -> Result<(Verdict, usize), String> {
    if subject.interface != test.interface {
        return Err(format!("interfaces differ: {} and {}", subject.interface, test.interface));
    }
    let z = pair(&subject.family, &test.family, &Position::interface(subject.interface), &subject.embedding, &test.embedding)
        .map_err(|e| e.to_string())?;
    Ok(semantic_bot(arena, &z, opts))
}

/// Compares two subjects under every test of the family.
pub fn fair_equiv_semantic(
    arena: &Arc<Arena>,
    s1: &Interfaced,
    s2: &Interfaced,
    tests: &[Interfaced],
    opts: SemanticOptions,
) -> Result<Report, String> {
    if s1.interface != s2.interface {
        return Err(format!("interfaces differ: {} and {}", s1.interface, s2.interface));
    }
    let mut used = 0;
    let mut inconclusive = None;
    let mut bounded = false;
    for t in tests {
        let (v1, n1) = passes(arena, s1, t, opts)?;
        let (v2, n2) = passes(arena, s2, t, opts)?;
        used = used.max(n1).max(n2);
        match (&v1, &v2) {
            (Verdict::Inconclusive { reason }, _) | (_, Verdict::Inconclusive { reason }) => {
                inconclusive.get_or_insert_with(|| format!("test {}: {reason}", t.name));
            }
            _ => {
                let both = v1.is_definite() && v2.is_definite();
                if v1.is_pass() != v2.is_pass() {
                    let witness = Witness::Test { test: t.name.clone(), left_passes: v1.is_pass(), right_passes: v2.is_pass() };
                    let verdict = Verdict::Fail { witness, bounded: !both };
                    return Ok(Report { verdict, budget_used: used, depth: opts.depth, family_size: tests.len() });
                }
                bounded |= !both;
            }
        }
    }
    let verdict = match inconclusive {
        Some(reason) => Verdict::Inconclusive { reason },
        None => Verdict::Pass { bounded },
    };
    Ok(Report { verdict, budget_used: used, depth: opts.depth, family_size: tests.len() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ccs::parse_ccs;
    use crate::strategy::translate_ccs;

    fn bot(text: &str) -> Verdict {
        let t = parse_ccs(text).unwrap();
        bot_s_ccs(t.context, &t.process, 1000).0
    }

    const OPTS: SemanticOptions = SemanticOptions { depth: 4, budget: 10_000, max_arity: 8 };

    #[test]
    fn bot_s_examples() {
        assert_eq!(bot("[0] tick.0"), Verdict::Pass { bounded: false });
        assert!(bot("[1] 'a1.tick.0").is_fail());
        assert!(bot("[1] a1.tick.0 | 'a1.0").is_pass());
        assert!(bot("[1] a1.tick.0 + a1.0 | 'a1.0").is_fail());
        let Verdict::Fail { witness: Witness::SilentPath { states }, .. } = bot("[1] a1.tick.0 + a1.0 | 'a1.0") else { panic!() };
        assert_eq!(states.len(), 2);
    }

    #[test]
    fn bot_s_budget() {
        let t = parse_ccs("[1] rec X. ('a1.0 | a1.X)").unwrap();
        assert!(matches!(bot_s_ccs(t.context, &t.process, 20).0, Verdict::Inconclusive { .. }));
    }

    #[test]
    fn tree_families() {
        let one = |d, w| gen_tree_tests(Context(1), d, w).iter().map(ToString::to_string).collect::<Vec<_>>();
        assert_eq!(one(0, 2), vec!["0"]);
        assert_eq!(one(1, 1), vec!["0", "a1.0", "'a1.0", "tick.0"]);
        assert_eq!(gen_tree_tests(Context(1), 2, 2).len(), 496);
        for (d, w) in [(0, 1), (1, 1), (1, 2), (2, 1), (2, 2)] {
            assert!(gen_tree_tests(Context(1), d, w).len() <= gen_tree_tests(Context(1), d + 1, w).len());
            assert!(gen_tree_tests(Context(1), d, w).len() <= gen_tree_tests(Context(1), d, w + 1).len());
        }
        let set: BTreeSet<_> = gen_tree_tests(Context(2), 2, 2).into_iter().collect();
        assert_eq!(set.len(), gen_tree_tests(Context(2), 2, 2).len());
    }

    #[test]
    fn standard_examples() {
        let tests = gen_tree_tests(Context(1), 2, 2);
        let (a, nil) = (parse_ccs("[1] a1.0").unwrap().process, Process::nil());
        assert!(fair_equiv_standard(&a, &a, Context(1), &tests, 1000).verdict.is_pass());
        let r = fair_equiv_standard(&a, &nil, Context(1), &tests, 1000);
        assert_eq!(
            r.verdict,
            Verdict::Fail {
                witness: Witness::Test { test: "'a1.tick.0".into(), left_passes: true, right_passes: false },
                bounded: false
            }
        );
        let ab = parse_ccs("[2] a1.0 | a2.0").unwrap().process;
        let ba = parse_ccs("[2] a2.0 | a1.0").unwrap().process;
        assert!(fair_equiv_standard(&ab, &ba, Context(2), &gen_tree_tests(Context(2), 3, 1), 1000).verdict.is_pass());
    }

    fn subject(arena: &mut Arena, text: &str) -> Interfaced {
        let t = parse_ccs(text).unwrap();
        let s = translate_ccs(arena, t.context, &t.process);
        Interfaced::individual(arena, s, t.process.to_string())
    }

    #[test]
    fn semantic_examples() {
        let mut a = Arena::new();
        let tick = subject(&mut a, "[0] tick.0");
        let inert = subject(&mut a, "[0] 0");
        let p = subject(&mut a, "[1] a1.tick.0");
        let q = subject(&mut a, "[1] 'a1.0");
        let p0 = subject(&mut a, "[1] 'a1.tick.0");
        let z = subject(&mut a, "[1] 0");
        let a = Arc::new(a);
        assert!(passes(&a, &tick, &inert, OPTS).unwrap().0.is_pass());
        assert_eq!(passes(&a, &p, &q, OPTS).unwrap().0, Verdict::Pass { bounded: false });
        assert!(passes(&a, &z, &p0, OPTS).unwrap().0.is_fail());
        let fam = pair(&p.family, &q.family, &Position::interface(1), &[0], &[0]).unwrap();
        assert_eq!(semantic_bot_plays(&a, &fam, SemanticOptions { depth: 3, ..OPTS }).0, Verdict::Pass { bounded: true });
        let fam = pair(&p0.family, &z.family, &Position::interface(1), &[0], &[0]).unwrap();
        assert!(semantic_bot_plays(&a, &fam, OPTS).0.is_fail());
        assert!(passes(&a, &tick, &p, OPTS).is_err());
    }

    #[test]
    fn semantic_equivalence() {
        let mut a = Arena::new();
        let s = subject(&mut a, "[1] a1.0");
        let z = subject(&mut a, "[1] 0");
        let t = subject(&mut a, "[1] 'a1.tick.0");
        let a = Arc::new(a);
        let r = fair_equiv_semantic(&a, &s, &z, &[t], OPTS).unwrap();
        assert!(r.verdict.is_fail() && r.verdict.is_definite());
        assert!(fair_equiv_semantic(&a, &s, &s, &[], OPTS).unwrap().verdict.is_pass());
    }

    #[test]
    fn literal_and_saturated_agree_on_small_families() {
        let mut a = Arena::new();
        let cases = [
            ("[1] a1.tick.0", "[1] 'a1.0"),
            ("[1] a1.tick.0 + a1.0", "[1] 'a1.0"),
            ("[1] tick.0 | a1.0", "[1] 0"),
            ("[1] new a. (a2.tick.0 | 'a2.0)", "[1] 0"),
            ("[1] a1.0", "[1] 'a1.0"),
        ];
        let pairs: Vec<_> = cases.iter().map(|(p, t)| (subject(&mut a, p), subject(&mut a, t))).collect();
        let a = Arc::new(a);
        for (p, t) in &pairs {
            let fam = pair(&p.family, &t.family, &Position::interface(1), &[0], &[0]).unwrap();
            let exact = semantic_bot(&a, &fam, OPTS).0;
            let literal = semantic_bot_plays(&a, &fam, SemanticOptions { depth: 5, ..OPTS }).0;
            assert!(exact.is_definite());
            assert_eq!(exact.is_pass(), literal.is_pass(), "{} / {}", p.name, t.name);
        }
    }
}
