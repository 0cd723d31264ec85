//! Process terms over full moves, the embedding of CCS into them, and their
//! interpretation as strategies.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::translate::{prefix_class, sum_table};
use super::{Arena, DefiniteId, StrategyId};
use crate::ccs::{Context, Process};
use crate::game::BasicMoveClass;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TermId(pub u32);

/// Guards of a guarded sum: the full moves with a single player.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Guard {
    Tick,
    Nu,
    In(usize),
    Out(usize),
}

impl Guard {
    pub fn class(self) -> BasicMoveClass {
        match self {
            Guard::Tick => BasicMoveClass::Tick,
            Guard::Nu => BasicMoveClass::Nu,
            Guard::In(i) => BasicMoveClass::In(i),
            Guard::Out(i) => BasicMoveClass::Out(i),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ProcessTerm {
    Fork(TermId, TermId),
    GuardedSum(Vec<(Guard, TermId)>),
}

/// Hash-consed, possibly cyclic process terms.
#[derive(Clone, Debug, Default)]
pub struct TermArena {
    nodes: Vec<(usize, Option<ProcessTerm>)>,
    index: HashMap<(usize, ProcessTerm), TermId>,
}

impl TermArena {
    pub fn new() -> TermArena {
        TermArena::default()
    }

    pub fn term(&mut self, arity: usize, t: ProcessTerm) -> TermId {
        let key = (arity, t);
        if let Some(id) = self.index.get(&key) {
            return *id;
        }
        let id = TermId(self.nodes.len() as u32);
        self.nodes.push((arity, Some(key.1.clone())));
        self.index.insert(key, id);
        id
    }

    pub fn reserve(&mut self, arity: usize) -> TermId {
        self.nodes.push((arity, None));
        TermId(self.nodes.len() as u32 - 1)
    }

    pub fn fill(&mut self, id: TermId, t: ProcessTerm) {
        let slot = &mut self.nodes[id.0 as usize];
        assert!(slot.1.is_none(), "term filled twice");
        slot.1 = Some(t.clone());
        let arity = slot.0;
        self.index.entry((arity, t)).or_insert(id);
    }

    pub fn get(&self, id: TermId) -> &ProcessTerm {
        self.nodes[id.0 as usize].1.as_ref().expect("filled term")
    }

    pub fn arity(&self, id: TermId) -> usize {
        self.nodes[id.0 as usize].0
    }

    pub fn nil(&mut self, arity: usize) -> TermId {
        self.term(arity, ProcessTerm::GuardedSum(Vec::new()))
    }

    /// Text form: `(t | u)` for forks, `g.t + …` for sums, `0` for the empty
    /// sum, `@tN` labels and references on cycles.
    pub fn dump(&self, id: TermId) -> String {
        let mut out = String::new();
        self.dump_into(id, &mut Vec::new(), &mut HashSet::new(), &mut out);
        out
    }

    fn dump_into(&self, id: TermId, stack: &mut Vec<TermId>, referenced: &mut HashSet<TermId>, out: &mut String) {
        if stack.contains(&id) {
            let _ = write!(out, "@t{}", id.0);
            referenced.insert(id);
            return;
        }
        stack.push(id);
        let mut body = String::new();
        match self.get(id) {
            ProcessTerm::Fork(l, r) => {
                body.push('(');
                self.dump_into(*l, stack, referenced, &mut body);
                body.push_str(" | ");
                self.dump_into(*r, stack, referenced, &mut body);
                body.push(')');
            }
            ProcessTerm::GuardedSum(bs) if bs.is_empty() => body.push('0'),
            ProcessTerm::GuardedSum(bs) => {
                for (k, (g, t)) in bs.iter().enumerate() {
                    if k > 0 {
                        body.push_str(" + ");
                    }
                    let _ = write!(body, "{}.", g.class().key());
                    self.dump_into(*t, stack, referenced, &mut body);
                }
                if bs.len() > 1 {
                    body = format!("({body})");
                }
            }
        }
        stack.pop();
        if referenced.remove(&id) {
            let _ = write!(out, "@t{}:", id.0);
        }
        out.push_str(&body);
    }
}

struct TermBinding {
    name: String,
    arity: usize,
    node: Option<TermId>,
}

/// The process term of a well-formed process: parallel composition becomes
/// a fork, restriction a channel-creation guard, prefixes guards.
pub fn theta(terms: &mut TermArena, ctx: Context, p: &Process) -> TermId {
    theta_at(terms, ctx.0, p, &mut Vec::new())
}

fn theta_at(terms: &mut TermArena, n: usize, p: &Process, env: &mut Vec<TermBinding>) -> TermId {
    match p {
        Process::Par(l, r) => {
            let tl = theta_at(terms, n, l, env);
            let tr = theta_at(terms, n, r, env);
            terms.term(n, ProcessTerm::Fork(tl, tr))
        }
        Process::Nu(body) => {
            let t = theta_at(terms, n + 1, body, env);
            terms.term(n, ProcessTerm::GuardedSum(vec![(Guard::Nu, t)]))
        }
        Process::Sum(branches) => {
            let mut bs = Vec::with_capacity(branches.len());
            for (prefix, cont) in branches {
                let guard = match prefix_class(*prefix) {
                    BasicMoveClass::In(i) => Guard::In(i),
                    BasicMoveClass::Out(i) => Guard::Out(i),
                    _ => Guard::Tick,
                };
                bs.push((guard, theta_at(terms, n, cont, env)));
            }
            terms.term(n, ProcessTerm::GuardedSum(bs))
        }
        Process::RecDef(name, body) => {
            env.push(TermBinding { name: name.clone(), arity: n, node: None });
            let t = theta_at(terms, n, body, env);
            let b = env.pop().expect("pushed above");
            match b.node {
                None => t,
                Some(r) => {
                    let body = terms.get(t).clone();
                    terms.fill(r, body);
                    r
                }
            }
        }
        Process::RecVar(name) => {
            let b = env.iter_mut().rev().find(|b| b.name == *name).expect("well-formed: variable is bound");
            *b.node.get_or_insert_with(|| terms.reserve(b.arity))
        }
    }
}

/// Interprets process terms as strategies, memoised per term node.
#[derive(Clone, Debug, Default)]
pub struct Interpreter {
    memo: HashMap<TermId, DefiniteId>,
    pending: HashMap<TermId, Option<DefiniteId>>,
    swap_forks: bool,
}

impl Interpreter {
    pub fn new() -> Interpreter {
        Interpreter::default()
    }

    /// A deliberately wrong interpreter exchanging the two sides of every fork.
    pub fn with_swapped_forks() -> Interpreter {
        Interpreter { swap_forks: true, ..Interpreter::default() }
    }

    pub fn interpret(&mut self, arena: &mut Arena, terms: &TermArena, t: TermId) -> StrategyId {
        let d = self.interpret_definite(arena, terms, t);
        arena.singleton(d)
    }

    pub fn interpret_definite(&mut self, arena: &mut Arena, terms: &TermArena, t: TermId) -> DefiniteId {
        if let Some(&d) = self.memo.get(&t) {
            return d;
        }
        let n = terms.arity(t);
        if let Some(slot) = self.pending.get_mut(&t) {
            return *slot.get_or_insert_with(|| arena.reserve(n));
        }
        self.pending.insert(t, None);
        let table = match terms.get(t).clone() {
            ProcessTerm::Fork(l, r) => {
                let dl = self.interpret_definite(arena, terms, l);
                let dr = self.interpret_definite(arena, terms, r);
                let (mut sl, mut sr) = (arena.singleton(dl), arena.singleton(dr));
                if self.swap_forks {
                    std::mem::swap(&mut sl, &mut sr);
                }
                let d = arena.definite_with(n, &[(BasicMoveClass::ParaL, sl), (BasicMoveClass::ParaR, sr)]);
                arena.get_definite(d).table.clone()
            }
            ProcessTerm::GuardedSum(bs) => {
                let mut entries = Vec::with_capacity(bs.len());
                for (g, u) in bs {
                    entries.push((g.class(), self.interpret_definite(arena, terms, u)));
                }
                sum_table(arena, n, &entries)
            }
        };
        let d = match self.pending.remove(&t).flatten() {
            Some(r) => {
                arena.fill(r, table);
                r
            }
            None => arena.definite(n, table),
        };
        self.memo.insert(t, d);
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ccs::parse_ccs;
    use crate::strategy::translate_ccs;

    #[test]
    fn theta_shapes() {
        let mut terms = TermArena::new();
        let t = parse_ccs("[2] a1.0 | a2.0").unwrap();
        let id = theta(&mut terms, t.context, &t.process);
        let ProcessTerm::Fork(l, r) = terms.get(id).clone() else { panic!() };
        let nil = terms.nil(2);
        assert_eq!(terms.get(l), &ProcessTerm::GuardedSum(vec![(Guard::In(1), nil)]));
        assert_eq!(terms.get(r), &ProcessTerm::GuardedSum(vec![(Guard::In(2), nil)]));
        assert_eq!(terms.dump(id), "(in1.0 | in2.0)");
    }

    #[test]
    fn interpretation_commutes_with_translation() {
        for text in ["[1] a1.0 + a1.tick.0", "[0] new a. (a1.0 | 'a1.0)", "[1] rec X. (a1.X + tick.0)", "[2] 0 | 0"] {
            let t = parse_ccs(text).unwrap();
            let mut arena = Arena::new();
            let mut terms = TermArena::new();
            let direct = translate_ccs(&mut arena, t.context, &t.process);
            let th = theta(&mut terms, t.context, &t.process);
            let via = Interpreter::new().interpret(&mut arena, &terms, th);
            assert!(arena.equal(direct, via), "{text}");
        }
    }

    #[test]
    fn small_terms() {
        let mut arena = Arena::new();
        let mut terms = TermArena::new();
        let nil = terms.nil(1);
        let fork = terms.term(1, ProcessTerm::Fork(nil, nil));
        let s = Interpreter::new().interpret(&mut arena, &terms, fork);
        assert_eq!(arena.dump(s), "⟨paraL↦⟨_↦∅⟩, paraR↦⟨_↦∅⟩, _↦∅⟩");
        let tick = terms.term(1, ProcessTerm::GuardedSum(vec![(Guard::Tick, nil)]));
        let s = Interpreter::new().interpret(&mut arena, &terms, tick);
        assert_eq!(arena.dump(s), "⟨tick↦⟨_↦∅⟩, _↦∅⟩");
    }
}
