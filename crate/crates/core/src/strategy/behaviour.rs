//! Families of strategies over positions and their behaviours on plays.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Arena, StrategyError, StrategyId};
use crate::game::{view_of, Play, Position, ViewPath};

/// One strategy per player of a position.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StrategyFamily {
    pub position: Position,
    pub components: Vec<StrategyId>,
}

impl StrategyFamily {
    pub fn new(arena: &Arena, position: Position, components: Vec<StrategyId>) -> Result<StrategyFamily, StrategyError> {
        if components.len() != position.players.len() {
            return Err(StrategyError::FamilyShape { components: components.len(), players: position.players.len() });
        }
        for (p, s) in position.players.iter().zip(&components) {
            let found = arena.get(*s).arity;
            if found != p.len() {
                return Err(StrategyError::ArityMismatch { expected: p.len(), found });
            }
        }
        Ok(StrategyFamily { position, components })
    }

    /// The family of a single strategy on its individual.
    pub fn individual(arena: &Arena, s: StrategyId) -> StrategyFamily {
        let n = arena.get(s).arity;
        StrategyFamily { position: Position::individual(n), components: vec![s] }
    }
}

/// The copairing of two families over a pushout along an interface: the
/// players of `f` followed by those of `g`. `hx` and `hy` send the
/// interface channels into the two positions.
pub fn pair(
    f: &StrategyFamily,
    g: &StrategyFamily,
    interface: &Position,
    hx: &[usize],
    hy: &[usize],
) -> Result<StrategyFamily, StrategyError> {
    if !interface.is_interface() {
        return Err(StrategyError::InterfaceHasPlayers);
    }
    let identify: Vec<(usize, usize)> = hx.iter().copied().zip(hy.iter().copied()).collect();
    let (position, _) = f.position.glue(&g.position, &identify);
    let mut components = f.components.clone();
    components.extend(&g.components);
    Ok(StrategyFamily { position, components })
}

/// A lineage root (a player of the play's initial position) and a view of
/// one of its descendants.
pub type ViewKey = (usize, ViewPath);

/// A matching family: for every view met along the play's prefixes, a state
/// of the root player's strategy over that view. States are the component
/// choice sequences of [`Arena::states_on_view`]; restriction along a view
/// prefix is truncation.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BehaviourElement {
    pub states: BTreeMap<ViewKey, Vec<usize>>,
}

impl BehaviourElement {
    /// The states as indices into the lexicographic enumeration.
    pub fn indices(&self, arena: &Arena, family: &StrategyFamily) -> BTreeMap<ViewKey, usize> {
        self.states
            .iter()
            .map(|(key, state)| {
                let all = arena.states_on_view(family.components[key.0], &key.1);
                let idx = all.iter().position(|s| s == state).expect("state over its view");
                (key.clone(), idx)
            })
            .collect()
    }
}

/// The views of every player of the play's final position, keyed by root.
fn final_keys(play: &Play) -> Vec<ViewKey> {
    (0..play.final_position().players.len())
        .map(|x| {
            let root = play.lineage(x)[0];
            (root, view_of(play, x).expect("player exists"))
        })
        .collect()
}

/// Elements over the identity play.
fn identity_elements(arena: &Arena, family: &StrategyFamily) -> Vec<BehaviourElement> {
    let mut out = vec![BehaviourElement::default()];
    for (p, &s) in family.components.iter().enumerate() {
        let n = family.position.players[p].len();
        let m = arena.initial_states(s);
        out = out
            .into_iter()
            .flat_map(|e| {
                (0..m).map(move |i| {
                    let mut e = e.clone();
                    e.states.insert((p, ViewPath::empty(n)), vec![i]);
                    e
                })
            })
            .collect();
    }
    out
}

/// Extends elements over `play` minus its last move to elements over `play`:
/// each view that appears for the first time gets a state extending the
/// state of its one-move-shorter prefix.
pub fn extend_step(arena: &Arena, family: &StrategyFamily, play: &Play, elements: Vec<BehaviourElement>) -> Vec<BehaviourElement> {
    let mut elements = elements;
    let keys = final_keys(play);
    for key in keys {
        if elements.is_empty() {
            break;
        }
        if elements[0].states.contains_key(&key) {
            continue;
        }
        let (root, view) = key.clone();
        let k = view.moves.len();
        assert!(k > 0, "a new view extends an older one");
        let parent: ViewKey = (root, view.prefix(k - 1));
        let b = view.moves[k - 1];
        let s = family.components[root];
        let mut next = Vec::new();
        for e in elements {
            let state = &e.states[&parent];
            let d = arena.follow(s, &parent.1, state).expect("valid state");
            let m = arena.initial_states(arena.residual(d, b));
            for i in 0..m {
                let mut e2 = e.clone();
                let mut st = state.clone();
                st.push(i);
                e2.states.insert(key.clone(), st);
                next.push(e2);
            }
        }
        elements = next;
    }
    elements
}

/// The behaviour of a family on a play: all matching families over the
/// views of the play's prefixes, in lexicographic order.
pub fn extend(arena: &Arena, family: &StrategyFamily, play: &Play) -> Vec<BehaviourElement> {
    assert_eq!(play.initial, family.position, "play starts at the family's position");
    let mut elements = identity_elements(arena, family);
    for k in 1..=play.len() {
        elements = extend_step(arena, family, &play.prefix(k), elements);
    }
    elements.sort();
    elements
}
