//! Strategies as regular terms `⊕[⟨table⟩, …]`, stored in a hash-consed
//! arena. Cycles go through definite nodes reserved before their table is
//! known.

mod behaviour;
mod terms;
mod translate;

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::game::{BasicMoveClass, ViewPath};

pub use behaviour::{extend, extend_step, pair, BehaviourElement, StrategyFamily, ViewKey};
pub use terms::{theta, Guard, Interpreter, ProcessTerm, TermArena, TermId};
pub use translate::translate_ccs;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum StrategyError {
    #[error("state index {index} out of range for a strategy with {states} initial states")]
    IndexOutOfRange { index: usize, states: usize },
    #[error("arity mismatch: expected {expected}, found {found}")]
    ArityMismatch { expected: usize, found: usize },
    #[error("the gluing interface has players")]
    InterfaceHasPlayers,
    #[error("family has {components} components for {players} players")]
    FamilyShape { components: usize, players: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct StrategyId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DefiniteId(pub u32);

/// `⊕` over a finite list of definite strategies; the empty list is `∅`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Strategy {
    pub arity: usize,
    pub defs: Vec<DefiniteId>,
}

/// A table from the basic move classes at `arity`, in canonical order, to
/// strategies. The channel-creation entry has arity `arity + 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Definite {
    pub arity: usize,
    pub table: Vec<StrategyId>,
}

#[derive(Clone, Debug, Default)]
pub struct Arena {
    strategies: Vec<Strategy>,
    strategy_index: HashMap<Strategy, StrategyId>,
    definites: Vec<Option<Definite>>,
    definite_index: HashMap<Definite, DefiniteId>,
}

impl Arena {
    pub fn new() -> Arena {
        Arena::default()
    }

    pub fn strategy(&mut self, arity: usize, defs: Vec<DefiniteId>) -> StrategyId {
        debug_assert!(defs.iter().all(|d| self.definite_arity(*d) == arity));
        let s = Strategy { arity, defs };
        if let Some(id) = self.strategy_index.get(&s) {
            return *id;
        }
        let id = StrategyId(self.strategies.len() as u32);
        self.strategies.push(s.clone());
        self.strategy_index.insert(s, id);
        id
    }

    pub fn empty(&mut self, arity: usize) -> StrategyId {
        self.strategy(arity, Vec::new())
    }

    pub fn singleton(&mut self, d: DefiniteId) -> StrategyId {
        let arity = self.definite_arity(d);
        self.strategy(arity, vec![d])
    }

    /// Interns a definite strategy from its table.
    pub fn definite(&mut self, arity: usize, table: Vec<StrategyId>) -> DefiniteId {
        assert_eq!(table.len(), BasicMoveClass::count(arity), "table must cover every basic class");
        let d = Definite { arity, table };
        if let Some(id) = self.definite_index.get(&d) {
            return *id;
        }
        let id = DefiniteId(self.definites.len() as u32);
        self.definites.push(Some(d.clone()));
        self.definite_index.insert(d, id);
        id
    }

    /// A definite strategy whose table is given by the listed entries, all
    /// others `∅`.
    pub fn definite_with(&mut self, arity: usize, entries: &[(BasicMoveClass, StrategyId)]) -> DefiniteId {
        let mut table: Vec<StrategyId> = BasicMoveClass::all(arity)
            .into_iter()
            .map(|b| {
                let a = b.next_arity(arity);
                self.empty(a)
            })
            .collect();
        for &(b, s) in entries {
            table[b.index()] = s;
        }
        self.definite(arity, table)
    }

    /// The deadlocked definite strategy: every entry `∅`.
    pub fn deadlock(&mut self, arity: usize) -> DefiniteId {
        self.definite_with(arity, &[])
    }

    /// Reserves a definite node to be filled later, so that it can be
    /// referred to before its table is known.
    pub fn reserve(&mut self, arity: usize) -> DefiniteId {
        let id = DefiniteId(self.definites.len() as u32);
        self.definites.push(Some(Definite { arity, table: Vec::new() }));
        id
    }

    pub fn fill(&mut self, id: DefiniteId, table: Vec<StrategyId>) {
        let slot = self.definites[id.0 as usize].as_mut().expect("reserved node");
        assert!(slot.table.is_empty(), "node filled twice");
        assert_eq!(table.len(), BasicMoveClass::count(slot.arity));
        slot.table = table;
        let d = slot.clone();
        self.definite_index.entry(d).or_insert(id);
    }

    pub fn get(&self, s: StrategyId) -> &Strategy {
        &self.strategies[s.0 as usize]
    }

    pub fn get_definite(&self, d: DefiniteId) -> &Definite {
        self.definites[d.0 as usize].as_ref().expect("definite node")
    }

    pub fn definite_arity(&self, d: DefiniteId) -> usize {
        self.get_definite(d).arity
    }

    pub fn num_nodes(&self) -> (usize, usize) {
        (self.strategies.len(), self.definites.len())
    }

    /// The residual of a definite strategy after a basic move.
    pub fn residual(&self, d: DefiniteId, b: BasicMoveClass) -> StrategyId {
        self.get_definite(d).table[b.index()]
    }

    /// The `i`-th definite component.
    pub fn restrict(&self, s: StrategyId, i: usize) -> Result<DefiniteId, StrategyError> {
        let st = self.get(s);
        st.defs.get(i).copied().ok_or(StrategyError::IndexOutOfRange { index: i, states: st.defs.len() })
    }

    pub fn initial_states(&self, s: StrategyId) -> usize {
        self.get(s).defs.len()
    }

    pub fn is_definite(&self, s: StrategyId) -> bool {
        self.initial_states(s) == 1
    }

    /// The number of states of `s` over the view `v`.
    pub fn value_on_view(&self, s: StrategyId, v: &ViewPath) -> usize {
        self.count_from(s, &v.moves)
    }

    fn count_from(&self, s: StrategyId, moves: &[BasicMoveClass]) -> usize {
        let st = self.get(s);
        let Some((&b, rest)) = moves.split_first() else {
            return st.defs.len();
        };
        if !b.is_valid_at(st.arity) {
            return 0;
        }
        st.defs.iter().map(|&d| self.count_from(self.residual(d, b), rest)).sum()
    }

    /// The states of `s` over `v`, each a sequence of component choices
    /// (one per strategy passed through), in lexicographic order. The
    /// restriction to a prefix of `v` is truncation.
    pub fn states_on_view(&self, s: StrategyId, v: &ViewPath) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        self.collect_states(s, &v.moves, &mut Vec::new(), &mut out);
        out
    }

    fn collect_states(&self, s: StrategyId, moves: &[BasicMoveClass], prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        let st = self.get(s);
        for (i, &d) in st.defs.iter().enumerate() {
            prefix.push(i);
            match moves.split_first() {
                None => out.push(prefix.clone()),
                Some((&b, rest)) => {
                    if b.is_valid_at(st.arity) {
                        self.collect_states(self.residual(d, b), rest, prefix, out);
                    }
                }
            }
            prefix.pop();
        }
    }

    /// The strategy reached by following a state sequence along a view:
    /// returns the definite node selected by the last choice.
    pub fn follow(&self, s: StrategyId, v: &ViewPath, state: &[usize]) -> Option<DefiniteId> {
        let mut d = *self.get(s).defs.get(state[0])?;
        for (b, &i) in v.moves.iter().zip(&state[1..]) {
            d = *self.get(self.residual(d, *b)).defs.get(i)?;
        }
        Some(d)
    }

    /// Coinductive structural equality of strategies.
    pub fn equal(&self, a: StrategyId, b: StrategyId) -> bool {
        self.equal_strategies(a, b, &mut HashSet::new())
    }

    pub fn equal_definite(&self, a: DefiniteId, b: DefiniteId) -> bool {
        self.equal_definites(a, b, &mut HashSet::new())
    }

    fn equal_strategies(&self, a: StrategyId, b: StrategyId, assumed: &mut HashSet<(DefiniteId, DefiniteId)>) -> bool {
        if a == b {
            return true;
        }
        let (x, y) = (self.get(a), self.get(b));
        x.arity == y.arity
            && x.defs.len() == y.defs.len()
            && x.defs.iter().zip(&y.defs).all(|(&d, &e)| self.equal_definites(d, e, assumed))
    }

    fn equal_definites(&self, a: DefiniteId, b: DefiniteId, assumed: &mut HashSet<(DefiniteId, DefiniteId)>) -> bool {
        if a == b || !assumed.insert((a, b)) {
            return true;
        }
        let (x, y) = (self.get_definite(a), self.get_definite(b));
        x.arity == y.arity
            && x.table.iter().zip(&y.table).all(|(&s, &t)| self.equal_strategies(s, t, assumed))
    }

    /// Copy of `s` with the two fork entries of every reachable definite node
    /// swapped. Used to build deliberately wrong interpretations.
    pub fn swap_forks(&mut self, s: StrategyId) -> StrategyId {
        let mut memo = HashMap::new();
        self.swap_strategy(s, &mut memo)
    }

    fn swap_strategy(&mut self, s: StrategyId, memo: &mut HashMap<DefiniteId, DefiniteId>) -> StrategyId {
        let st = self.get(s).clone();
        let defs = st.defs.iter().map(|&d| self.swap_definite(d, memo)).collect();
        self.strategy(st.arity, defs)
    }

    fn swap_definite(&mut self, d: DefiniteId, memo: &mut HashMap<DefiniteId, DefiniteId>) -> DefiniteId {
        if let Some(&e) = memo.get(&d) {
            return e;
        }
        let def = self.get_definite(d).clone();
        let e = self.reserve(def.arity);
        memo.insert(d, e);
        let mut table: Vec<StrategyId> = def.table.iter().map(|&s| self.swap_strategy(s, memo)).collect();
        table.swap(0, 1);
        self.fill(e, table);
        e
    }

    /// The strategy as text: `∅`, `⟨class↦…, _↦∅⟩` for a definite node,
    /// `⊕[…]` for several. Nodes on cycles are labelled `@dN:` at first
    /// occurrence and referred to as `@dN`.
    pub fn dump(&self, s: StrategyId) -> String {
        let mut targets = BTreeSet::new();
        self.back_edges_strategy(s, &mut Vec::new(), &mut HashSet::new(), &mut targets);
        let mut labels: BTreeMap<DefiniteId, usize> = BTreeMap::new();
        let mut out = String::new();
        self.dump_strategy(s, &targets, &mut labels, &mut out);
        out
    }

    fn back_edges_strategy(&self, s: StrategyId, stack: &mut Vec<DefiniteId>, done: &mut HashSet<DefiniteId>, targets: &mut BTreeSet<DefiniteId>) {
        for &d in &self.get(s).defs {
            if stack.contains(&d) {
                targets.insert(d);
            } else if done.insert(d) {
                stack.push(d);
                for &t in &self.get_definite(d).table {
                    self.back_edges_strategy(t, stack, done, targets);
                }
                stack.pop();
            }
        }
    }

    fn dump_strategy(&self, s: StrategyId, targets: &BTreeSet<DefiniteId>, labels: &mut BTreeMap<DefiniteId, usize>, out: &mut String) {
        let defs = &self.get(s).defs;
        match defs.len() {
            0 => out.push('∅'),
            1 => self.dump_definite(defs[0], targets, labels, out),
            _ => {
                out.push_str("⊕[");
                for (k, &d) in defs.iter().enumerate() {
                    if k > 0 {
                        out.push_str(", ");
                    }
                    self.dump_definite(d, targets, labels, out);
                }
                out.push(']');
            }
        }
    }

    fn dump_definite(&self, d: DefiniteId, targets: &BTreeSet<DefiniteId>, labels: &mut BTreeMap<DefiniteId, usize>, out: &mut String) {
        if targets.contains(&d) {
            if let Some(n) = labels.get(&d) {
                out.push_str(&format!("@d{n}"));
                return;
            }
            let n = labels.len();
            labels.insert(d, n);
            out.push_str(&format!("@d{n}:"));
        }
        let def = self.get_definite(d);
        out.push('⟨');
        let mut any_empty = false;
        let mut first = true;
        for (k, &s) in def.table.iter().enumerate() {
            if self.get(s).defs.is_empty() {
                any_empty = true;
                continue;
            }
            if !first {
                out.push_str(", ");
            }
            first = false;
            out.push_str(&format!("{}↦", BasicMoveClass::from_index(k).key()));
            self.dump_strategy(s, targets, labels, out);
        }
        if any_empty {
            if !first {
                out.push_str(", ");
            }
            out.push_str("_↦∅");
        }
        out.push('⟩');
    }

    /// JSON form of the nodes reachable from `s`.
    pub fn to_json(&self, s: StrategyId) -> Value {
        let mut strategies = BTreeMap::new();
        let mut definites = BTreeMap::new();
        let mut stack = vec![s];
        while let Some(t) = stack.pop() {
            if strategies.contains_key(&t.0) {
                continue;
            }
            let st = self.get(t);
            strategies.insert(t.0, json!({ "arity": st.arity, "defs": st.defs.iter().map(|d| d.0).collect::<Vec<_>>() }));
            for &d in &st.defs {
                if definites.contains_key(&d.0) {
                    continue;
                }
                let def = self.get_definite(d);
                let table: serde_json::Map<String, Value> = def
                    .table
                    .iter()
                    .enumerate()
                    .map(|(k, x)| (BasicMoveClass::from_index(k).key(), json!(x.0)))
                    .collect();
                definites.insert(d.0, json!({ "arity": def.arity, "table": table }));
                stack.extend(def.table.iter().copied());
            }
        }
        let strategies: serde_json::Map<String, Value> = strategies.into_iter().map(|(k, v)| (k.to_string(), v)).collect();
        let definites: serde_json::Map<String, Value> = definites.into_iter().map(|(k, v)| (k.to_string(), v)).collect();
        json!({ "root": s.0, "strategies": strategies, "definites": definites })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_view_counts_components() {
        let mut a = Arena::new();
        let d0 = a.deadlock(1);
        let t = a.singleton(d0);
        let d1 = a.definite_with(1, &[(BasicMoveClass::Tick, t)]);
        let s = a.strategy(1, vec![d0, d1, d1]);
        assert_eq!(a.value_on_view(s, &ViewPath::empty(1)), 3);
        assert_eq!(a.value_on_view(s, &ViewPath::new(1, vec![BasicMoveClass::Tick])), 2);
        assert_eq!(a.states_on_view(s, &ViewPath::new(1, vec![BasicMoveClass::Tick])), vec![vec![1, 0], vec![2, 0]]);
        assert_eq!(a.restrict(s, 1), Ok(d1));
        let e = a.empty(1);
        assert!(a.restrict(e, 0).is_err());
    }

    #[test]
    fn hash_consing_identifies_equal_nodes() {
        let mut a = Arena::new();
        let x = a.deadlock(2);
        let y = a.deadlock(2);
        assert_eq!(x, y);
        let s = a.singleton(x);
        assert_eq!(a.dump(s), "⟨_↦∅⟩");
    }

    #[test]
    fn cyclic_equality() {
        let mut a = Arena::new();
        let r1 = a.reserve(0);
        let s1 = a.singleton(r1);
        let t1 = a.definite_with(0, &[(BasicMoveClass::Tick, s1)]);
        let table = a.get_definite(t1).table.clone();
        a.fill(r1, table);
        let r2 = a.reserve(0);
        let s2 = a.singleton(r2);
        let dead = a.deadlock(0);
        let mut table2 = a.get_definite(dead).table.clone();
        table2[BasicMoveClass::Tick.index()] = s2;
        a.fill(r2, table2);
        assert!(a.equal(s1, s2));
        assert_eq!(a.dump(s1), "@d0:⟨tick↦@d0, _↦∅⟩");
        let dead = a.deadlock(0);
        let dead = a.singleton(dead);
        assert!(!a.equal(s1, dead));
    }
}
