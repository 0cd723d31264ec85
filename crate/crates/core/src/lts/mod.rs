//! Labelled transition systems generated lazily by step functions, the
//! systems derived from strategies and process terms, change of base along
//! the alphabet maps, and bisimulation checks.

mod bisim;
mod change_of_base;
mod derived;

use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::fmt::Debug;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ccs::{Action, LabelA};
use crate::game::Position;

pub use bisim::{weak_bisim_bounded, BisimOptions, BisimVerdict};
pub use change_of_base::{
    admits, build_chi, xi, CcsLts, FamilyLts, ChiPullback, InterfacedConfig, InterfacedPosition, LEdge, LFragment, XiPostcompose,
};
pub use derived::{
    interpret_is_strong_bisim, strategy_step, term_step, Mismatch, StrategyLts, TermLts,
};

#[derive(Clone, Debug, PartialEq, Eq, Error, Serialize, Deserialize)]
pub enum LtsError {
    #[error("state cap of {0} states exceeded")]
    StateCap(usize),
    #[error("arity {arity} exceeds the maximum arity {max_arity}")]
    ArityExceeded { arity: usize, max_arity: usize },
}

/// Outgoing edges of a state.
pub type Steps<L, S> = Vec<(L, S)>;

/// A labelled graph given by its successor function.
pub trait Lts {
    type State: Clone + Eq + Hash + Debug;
    type Label: Clone + Debug;

    fn successors(&mut self, s: &Self::State) -> Result<Steps<Self::Label, Self::State>, LtsError>;

    /// Human-readable form of a state, for witnesses.
    fn describe(&self, s: &Self::State) -> String {
        format!("{s:?}")
    }
}

/// A position with one component (strategy node or term) per player.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Configuration<T> {
    pub position: Position,
    pub components: Vec<T>,
}

impl<T> Configuration<T> {
    pub fn individual(arity: usize, component: T) -> Configuration<T> {
        Configuration { position: Position::individual(arity), components: vec![component] }
    }
}

/// A stable hash of a state, used to name states in traces.
pub fn state_hash<S: Hash>(s: &S) -> String {
    let mut h = DefaultHasher::new();
    s.hash(&mut h);
    format!("{:016x}", h.finish())
}

/// Memoised exploration of an LTS with a state cap.
pub struct Explorer<L: Lts> {
    pub lts: L,
    cap: usize,
    index: HashMap<L::State, usize>,
    states: Vec<L::State>,
    succ: Vec<Option<Steps<L::Label, usize>>>,
    closure: HashMap<usize, Vec<usize>>,
}

impl<L: Lts> Explorer<L> {
    pub fn new(lts: L, cap: usize) -> Explorer<L> {
        Explorer { lts, cap, index: HashMap::new(), states: Vec::new(), succ: Vec::new(), closure: HashMap::new() }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn state(&self, i: usize) -> &L::State {
        &self.states[i]
    }

    pub fn describe(&self, i: usize) -> String {
        self.lts.describe(&self.states[i])
    }

    pub fn id(&mut self, s: &L::State) -> Result<usize, LtsError> {
        if let Some(&i) = self.index.get(s) {
            return Ok(i);
        }
        if self.states.len() >= self.cap {
            return Err(LtsError::StateCap(self.cap));
        }
        let i = self.states.len();
        self.states.push(s.clone());
        self.succ.push(None);
        self.index.insert(s.clone(), i);
        Ok(i)
    }

    pub fn successors(&mut self, i: usize) -> Result<Vec<(L::Label, usize)>, LtsError> {
        if let Some(out) = &self.succ[i] {
            return Ok(out.clone());
        }
        let s = self.states[i].clone();
        let mut out = Vec::new();
        for (l, t) in self.lts.successors(&s)? {
            out.push((l, self.id(&t)?));
        }
        self.succ[i] = Some(out.clone());
        Ok(out)
    }

    /// Explores everything reachable from `i`.
    pub fn explore_all(&mut self, i: usize) -> Result<(), LtsError> {
        let mut stack = vec![i];
        let mut seen = vec![false; self.states.len()];
        while let Some(j) = stack.pop() {
            if seen.len() < self.states.len() {
                seen.resize(self.states.len(), false);
            }
            if std::mem::replace(&mut seen[j], true) {
                continue;
            }
            for (_, k) in self.successors(j)? {
                if seen.len() <= k || !seen[k] {
                    stack.push(k);
                }
            }
        }
        Ok(())
    }
}

impl<L: Lts<Label = LabelA>> Explorer<L> {
    /// States reachable by silent edges, including `i` itself, in BFS order.
    pub fn silent_closure(&mut self, i: usize) -> Result<Vec<usize>, LtsError> {
        if let Some(c) = self.closure.get(&i) {
            return Ok(c.clone());
        }
        let mut seen = std::collections::HashSet::from([i]);
        let mut order = vec![i];
        let mut k = 0;
        while k < order.len() {
            let j = order[k];
            k += 1;
            for (l, t) in self.successors(j)? {
                if l.is_silent() && seen.insert(t) {
                    order.push(t);
                }
            }
        }
        self.closure.insert(i, order.clone());
        Ok(order)
    }

    /// Weak transitions: `(Id, t)` for every silent-reachable `t`, and
    /// `(a, t)` for `silent* a silent*`. Sorted and deduplicated.
    pub fn weak_successors(&mut self, i: usize) -> Result<Vec<(Action, usize)>, LtsError> {
        let pre = self.silent_closure(i)?;
        let mut out: Vec<(Action, usize)> = pre.iter().map(|&t| (Action::Id, t)).collect();
        for &j in &pre {
            for (l, t) in self.successors(j)? {
                if !l.is_silent() {
                    for u in self.silent_closure(t)? {
                        out.push((l.kind, u));
                    }
                }
            }
        }
        out.sort();
        out.dedup();
        Ok(out)
    }

    /// DOT rendering of the explored fragment: silent edges dashed, tick
    /// edges bold.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph lts {\n  node [shape=circle];\n");
        for (i, st) in self.states.iter().enumerate() {
            let label = format!("{st:?}").replace('"', "'");
            let label: String = label.chars().take(60).collect();
            s.push_str(&format!("  s{i} [label=\"{i}\", tooltip=\"{label}\"];\n"));
        }
        for (i, edges) in self.succ.iter().enumerate() {
            for (l, t) in edges.iter().flatten() {
                let style = if l.is_silent() {
                    ", style=dashed"
                } else if l.is_tick() {
                    ", style=bold"
                } else {
                    ""
                };
                s.push_str(&format!("  s{i} -> s{t} [label=\"{l}\"{style}];\n"));
            }
        }
        s.push_str("}\n");
        s
    }
}
