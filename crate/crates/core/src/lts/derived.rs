//! The LTSs of strategy families and of process-term families over the
//! alphabet of full moves, and the check that interpretation relates them.

use std::collections::HashSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{Configuration, Lts, LtsError};
use crate::game::{enabled_moves, Anchor, BasicMoveClass, GlobalMove, MoveFilter};
use crate::presheaf::MoveKind;
use crate::strategy::{Arena, DefiniteId, Interpreter, ProcessTerm, TermArena, TermId};

/// What an anchored player turns into after its part of a move: one
/// component, or two after a fork.
type Replacement<T> = Vec<T>;

/// The basic move seen by each anchored player, in anchor order.
fn anchored_classes(mv: &GlobalMove) -> Vec<(usize, Option<BasicMoveClass>)> {
    match (mv.kind, mv.anchor) {
        (MoveKind::Tau { out_channel, in_channel, .. }, Anchor::Sync { output, input }) => vec![
            (output, Some(BasicMoveClass::Out(out_channel))),
            (input, Some(BasicMoveClass::In(in_channel))),
        ],
        (MoveKind::Para { .. }, Anchor::Player(p)) => vec![(p, None)],
        (kind, Anchor::Player(p)) => vec![(p, BasicMoveClass::of_kind(kind))],
        _ => unreachable!("moves are anchored by their shape"),
    }
}

/// Builds every successor family of `comps` along `mv`, given the options
/// of each anchored player. `None` as the class stands for a fork.
fn assemble<T: Clone>(
    mv: &GlobalMove,
    comps: &[T],
    mut options: impl FnMut(usize, Option<BasicMoveClass>) -> Vec<Replacement<T>>,
) -> Vec<Configuration<T>> {
    let anchored = anchored_classes(mv);
    let per_player: Vec<(usize, Vec<Replacement<T>>)> =
        anchored.iter().map(|&(p, b)| (p, options(p, b))).collect();
    let mut choices: Vec<Vec<(usize, Replacement<T>)>> = vec![Vec::new()];
    for (p, opts) in per_player {
        choices = choices
            .into_iter()
            .flat_map(|c| {
                opts.iter().map(move |o| {
                    let mut c = c.clone();
                    c.push((p, o.clone()));
                    c
                })
            })
            .collect();
    }
    let n_final = mv.final_position.players.len();
    choices
        .into_iter()
        .map(|choice| {
            let mut next: Vec<Option<T>> = vec![None; n_final];
            for (p, targets) in mv.correspondence.players.iter().enumerate() {
                match choice.iter().find(|(q, _)| *q == p) {
                    Some((_, repl)) => {
                        for (&t, c) in targets.iter().zip(repl) {
                            next[t] = Some(c.clone());
                        }
                    }
                    None => next[targets[0]] = Some(comps[p].clone()),
                }
            }
            Configuration {
                position: mv.final_position.clone(),
                components: next.into_iter().map(|c| c.expect("every final player is covered")).collect(),
            }
        })
        .collect()
}

/// Transitions of a family of definite strategies: for each full move, the
/// anchored players take their residuals and pick an initial state each.
pub fn strategy_step(arena: &Arena, config: &Configuration<DefiniteId>) -> Vec<(GlobalMove, Configuration<DefiniteId>)> {
    let mut out = Vec::new();
    for mv in enabled_moves(&config.position, MoveFilter::FullOnly) {
        let next = assemble(&mv, &config.components, |p, b| {
            let d = config.components[p];
            match b {
                None => {
                    let l = &arena.get(arena.residual(d, BasicMoveClass::ParaL)).defs;
                    let r = &arena.get(arena.residual(d, BasicMoveClass::ParaR)).defs;
                    l.iter().flat_map(|&x| r.iter().map(move |&y| vec![x, y])).collect()
                }
                Some(b) => arena.get(arena.residual(d, b)).defs.iter().map(|&x| vec![x]).collect(),
            }
        });
        out.extend(next.into_iter().map(|c| (mv.clone(), c)));
    }
    out
}

/// Transitions of a family of process terms: forks split, guarded sums fire
/// one matching branch, and two players synchronise on an output branch and
/// an input branch over a shared channel.
pub fn term_step(terms: &TermArena, config: &Configuration<TermId>) -> Vec<(GlobalMove, Configuration<TermId>)> {
    let mut out = Vec::new();
    for mv in enabled_moves(&config.position, MoveFilter::FullOnly) {
        let next = assemble(&mv, &config.components, |p, b| match (terms.get(config.components[p]), b) {
            (ProcessTerm::Fork(l, r), None) => vec![vec![*l, *r]],
            (ProcessTerm::GuardedSum(bs), Some(b)) => {
                bs.iter().filter(|(g, _)| g.class() == b).map(|(_, t)| vec![*t]).collect()
            }
            _ => Vec::new(),
        });
        out.extend(next.into_iter().map(|c| (mv.clone(), c)));
    }
    out
}

fn check_arity(mv: &GlobalMove, max_arity: usize) -> Result<(), LtsError> {
    let arity = mv.final_position.max_arity();
    if arity > max_arity {
        return Err(LtsError::ArityExceeded { arity, max_arity });
    }
    Ok(())
}

/// The LTS of definite strategy families over full moves.
#[derive(Clone, Debug)]
pub struct StrategyLts {
    pub arena: Arc<Arena>,
    pub max_arity: usize,
}

impl Lts for StrategyLts {
    type State = Configuration<DefiniteId>;
    type Label = GlobalMove;

    fn successors(&mut self, s: &Self::State) -> Result<Vec<(GlobalMove, Self::State)>, LtsError> {
        let out = strategy_step(&self.arena, s);
        for (mv, _) in &out {
            check_arity(mv, self.max_arity)?;
        }
        Ok(out)
    }

    fn describe(&self, s: &Self::State) -> String {
        let comps: Vec<String> = s.components.iter().map(|c| format!("d{}", c.0)).collect();
        format!("{} [{}]", s.position, comps.join(", "))
    }
}

/// The LTS of process-term families over full moves.
#[derive(Clone, Debug)]
pub struct TermLts {
    pub terms: TermArena,
    pub max_arity: usize,
}

impl Lts for TermLts {
    type State = Configuration<TermId>;
    type Label = GlobalMove;

    fn successors(&mut self, s: &Self::State) -> Result<Vec<(GlobalMove, Self::State)>, LtsError> {
        let out = term_step(&self.terms, s);
        for (mv, _) in &out {
            check_arity(mv, self.max_arity)?;
        }
        Ok(out)
    }

    fn describe(&self, s: &Self::State) -> String {
        let comps: Vec<String> = s.components.iter().map(|c| format!("t{}", c.0)).collect();
        format!("{} [{}]", s.position, comps.join(", "))
    }
}

/// A transition of one LTS with no counterpart in the other.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mismatch {
    /// Labels of the moves leading to the offending state.
    pub path: Vec<String>,
    pub label: String,
    /// `"terms"` when a term transition is unmatched, `"strategies"` otherwise.
    pub side: String,
}

/// Checks that interpretation maps the term LTS from `seed` onto the
/// strategy LTS from its image up to `depth` moves: every term transition is
/// matched by a strategy transition with the same label and the image of the
/// target, and conversely.
pub fn interpret_is_strong_bisim(
    arena: &mut Arena,
    terms: &TermArena,
    interpreter: &mut Interpreter,
    seed: &Configuration<TermId>,
    depth: usize,
) -> Result<(), Mismatch> {
    let mut image = |arena: &mut Arena, c: &Configuration<TermId>| Configuration {
        position: c.position.clone(),
        components: c.components.iter().map(|&t| interpreter.interpret_definite(arena, terms, t)).collect(),
    };
    let same = |arena: &Arena, a: &Configuration<DefiniteId>, b: &Configuration<DefiniteId>| {
        a.position == b.position
            && a.components.len() == b.components.len()
            && a.components.iter().zip(&b.components).all(|(&x, &y)| arena.equal_definite(x, y))
    };
    let mut seen = HashSet::new();
    let mut frontier = vec![(seed.clone(), Vec::<String>::new())];
    for _ in 0..depth {
        let mut next = Vec::new();
        for (t, path) in frontier {
            if !seen.insert(t.clone()) {
                continue;
            }
            let s = image(arena, &t);
            let t_steps = term_step(terms, &t);
            let images: Vec<(GlobalMove, Configuration<DefiniteId>)> =
                t_steps.iter().map(|(m, t2)| (m.clone(), image(arena, t2))).collect();
            let s_steps = strategy_step(arena, &s);
            for (m, s2) in &images {
                if !s_steps.iter().any(|(m2, s3)| m2 == m && same(arena, s2, s3)) {
                    return Err(Mismatch { path, label: m.label(), side: "terms".into() });
                }
            }
            for (m, s3) in &s_steps {
                if !images.iter().any(|(m2, s2)| m2 == m && same(arena, s2, s3)) {
                    return Err(Mismatch { path, label: m.label(), side: "strategies".into() });
                }
            }
            for (m, t2) in t_steps {
                let mut p = path.clone();
                p.push(m.label());
                next.push((t2, p));
            }
        }
        frontier = next;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ccs::parse_ccs;
    use crate::game::Position;
    use crate::strategy::{theta, translate_ccs};

    fn seed(text: &str) -> (TermArena, Configuration<TermId>) {
        let t = parse_ccs(text).unwrap();
        let mut terms = TermArena::new();
        let id = theta(&mut terms, t.context, &t.process);
        (terms, Configuration::individual(t.context.0, id))
    }

    #[test]
    fn fork_strategy_has_one_para_transition() {
        let mut a = Arena::new();
        let s = translate_ccs(&mut a, crate::ccs::Context(2), &parse_ccs("[2] a1.0 | a2.0").unwrap().process);
        let d = a.get(s).defs[0];
        let steps = strategy_step(&a, &Configuration::individual(2, d));
        assert_eq!(steps.len(), 1);
        assert_eq!(steps[0].0.kind, MoveKind::Para { arity: 2 });
        assert_eq!(steps[0].1.position, Position::new(2, vec![vec![0, 1], vec![0, 1]]).unwrap());
    }

    #[test]
    fn nondeterministic_child_gives_two_para_transitions() {
        let mut a = Arena::new();
        let x = a.deadlock(1);
        let tick = a.singleton(x);
        let y = a.definite_with(1, &[(BasicMoveClass::Tick, tick)]);
        let left = a.strategy(1, vec![x, y]);
        let right = a.singleton(x);
        let d = a.definite_with(1, &[(BasicMoveClass::ParaL, left), (BasicMoveClass::ParaR, right)]);
        let steps = strategy_step(&a, &Configuration::individual(1, d));
        assert_eq!(steps.len(), 2);
        assert_eq!(steps[0].1.components, vec![x, x]);
        assert_eq!(steps[1].1.components, vec![y, x]);
    }

    #[test]
    fn deadlock_has_no_transitions() {
        let mut a = Arena::new();
        let d = a.deadlock(3);
        assert!(strategy_step(&a, &Configuration::individual(3, d)).is_empty());
        let (terms, s) = seed("[3] 0");
        assert!(term_step(&terms, &s).is_empty());
    }

    #[test]
    fn term_fork_then_input() {
        let (terms, s) = seed("[2] a1.0 | a2.0");
        let steps = term_step(&terms, &s);
        assert_eq!(steps.len(), 1);
        let (_, s1) = &steps[0];
        let moves: Vec<String> = term_step(&terms, s1).iter().map(|(m, _)| m.label()).collect();
        assert_eq!(moves, vec!["in:2:1@0", "in:2:2@1"]);

        // the swapped composite offers the second input from the first player
        let (terms2, s2) = seed("[2] a2.0 | a1.0");
        let s2 = term_step(&terms2, &s2).remove(0).1;
        let moves2: Vec<String> = term_step(&terms2, &s2).iter().map(|(m, _)| m.label()).collect();
        assert_eq!(moves2, vec!["in:2:2@0", "in:2:1@1"]);
        assert_ne!(moves, moves2);
    }

    #[test]
    fn synchronisation_consumes_both_branches() {
        let (terms, s) = seed("[1] a1.0 | 'a1.0");
        let s1 = term_step(&terms, &s).remove(0).1;
        let taus: Vec<_> = term_step(&terms, &s1).into_iter().filter(|(m, _)| matches!(m.kind, MoveKind::Tau { .. })).collect();
        assert_eq!(taus.len(), 1);
        assert!(taus[0].1.components.iter().all(|&t| terms.get(t) == &ProcessTerm::GuardedSum(vec![])));
    }

    #[test]
    fn interpretation_is_a_bisimulation() {
        for text in ["[1] a1.0 | 'a1.0", "[2] a1.0 | a2.tick.0", "[0] new a. (a1.0 | 'a1.0)", "[1] rec X. (a1.X | tick.0)"] {
            let (terms, s) = seed(text);
            let mut a = Arena::new();
            assert_eq!(interpret_is_strong_bisim(&mut a, &terms, &mut Interpreter::new(), &s, 0), Ok(()));
            assert_eq!(interpret_is_strong_bisim(&mut a, &terms, &mut Interpreter::new(), &s, 4), Ok(()), "{text}");
        }
    }

    #[test]
    fn swapped_forks_are_caught() {
        let (terms, s) = seed("[2] a1.0 | a2.0");
        let mut a = Arena::new();
        let err = interpret_is_strong_bisim(&mut a, &terms, &mut Interpreter::with_swapped_forks(), &s, 2).unwrap_err();
        assert!(err.label.starts_with("para"), "{err:?}");
        assert!(err.path.is_empty());
    }
}
