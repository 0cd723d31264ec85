//! The translation of CCS processes into strategies.

use crate::ccs::{Context, Prefix, Process};
use crate::game::BasicMoveClass;

use super::{Arena, DefiniteId, StrategyId};

pub(crate) struct Binding {
    pub name: String,
    pub arity: usize,
    pub node: Option<DefiniteId>,
}

/// Resolves a recursion variable, reserving its node on first use.
pub(crate) fn bound_node(arena: &mut Arena, env: &mut [Binding], name: &str) -> DefiniteId {
    let b = env.iter_mut().rev().find(|b| b.name == name).expect("well-formed: variable is bound");
    *b.node.get_or_insert_with(|| arena.reserve(b.arity))
}

/// Ties the knot for a recursive definition whose body translated to `body`.
pub(crate) fn close_binding(arena: &mut Arena, binding: Binding, body: DefiniteId) -> DefiniteId {
    match binding.node {
        None => body,
        Some(r) => {
            let table = arena.get_definite(body).table.clone();
            arena.fill(r, table);
            r
        }
    }
}

pub(crate) fn prefix_class(prefix: Prefix) -> BasicMoveClass {
    match prefix {
        Prefix::In(c) => BasicMoveClass::In(c),
        Prefix::Out(c) => BasicMoveClass::Out(c),
        Prefix::Tick => BasicMoveClass::Tick,
    }
}

/// Builds the table of a guarded choice from `(class, continuation)` pairs:
/// each entry is the `⊕` of the continuations offered under that class.
pub(crate) fn sum_table(arena: &mut Arena, arity: usize, branches: &[(BasicMoveClass, DefiniteId)]) -> Vec<StrategyId> {
    BasicMoveClass::all(arity)
        .into_iter()
        .map(|b| {
            let defs = branches.iter().filter(|(c, _)| *c == b).map(|(_, d)| *d).collect();
            arena.strategy(b.next_arity(arity), defs)
        })
        .collect()
}

/// The strategy of a well-formed process: always definite.
pub fn translate_ccs(arena: &mut Arena, ctx: Context, p: &Process) -> StrategyId {
    let d = translate_definite(arena, ctx.0, p, &mut Vec::new());
    arena.singleton(d)
}

fn translate_definite(arena: &mut Arena, n: usize, p: &Process, env: &mut Vec<Binding>) -> DefiniteId {
    match p {
        Process::Sum(branches) => {
            let mut entries = Vec::with_capacity(branches.len());
            for (prefix, cont) in branches {
                let d = translate_definite(arena, n, cont, env);
                entries.push((prefix_class(*prefix), d));
            }
            let table = sum_table(arena, n, &entries);
            arena.definite(n, table)
        }
        Process::Par(l, r) => {
            let dl = translate_definite(arena, n, l, env);
            let dr = translate_definite(arena, n, r, env);
            let (sl, sr) = (arena.singleton(dl), arena.singleton(dr));
            arena.definite_with(n, &[(BasicMoveClass::ParaL, sl), (BasicMoveClass::ParaR, sr)])
        }
        Process::Nu(body) => {
            let d = translate_definite(arena, n + 1, body, env);
            let s = arena.singleton(d);
            arena.definite_with(n, &[(BasicMoveClass::Nu, s)])
        }
        Process::RecDef(name, body) => {
            env.push(Binding { name: name.clone(), arity: n, node: None });
            let d = translate_definite(arena, n, body, env);
            let binding = env.pop().expect("pushed above");
            close_binding(arena, binding, d)
        }
        Process::RecVar(name) => bound_node(arena, env, name),
    }
}
