//! Change of base: interfaced positions, the privacy filter on full moves,
//! and the map from interfaced moves to CCS labels.

use std::fmt::Debug;
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use super::{Configuration, Lts, LtsError, StrategyLts, TermLts};
use crate::ccs::{ccs_transitions, Action, Context, LabelA, Process};
use crate::game::{enabled_moves, first_use_numbering, Anchor, GlobalMove, MoveFilter, Position};
use crate::presheaf::MoveKind;
use crate::strategy::{DefiniteId, ProcessTerm, TermId};

/// A position together with an injection of an interface of `embedding.len()`
/// channels into its channels.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct InterfacedPosition {
    pub position: Position,
    pub embedding: Vec<usize>,
}

impl InterfacedPosition {
    pub fn interface(&self) -> usize {
        self.embedding.len()
    }
}

/// A state of a pulled-back LTS: a family over a position with an interface.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct InterfacedConfig<T> {
    pub embedding: Vec<usize>,
    pub config: Configuration<T>,
}

impl<T> InterfacedConfig<T> {
    pub fn vertex(&self) -> InterfacedPosition {
        InterfacedPosition { position: self.config.position.clone(), embedding: self.embedding.clone() }
    }
}

/// An edge of the interfaced alphabet: a full move from an interfaced
/// position whose inputs and outputs are on interface channels.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LEdge {
    pub embedding: Vec<usize>,
    pub mv: GlobalMove,
}

impl LEdge {
    /// The interface of the target, along the move's channel correspondence.
    pub fn target(&self) -> InterfacedPosition {
        InterfacedPosition {
            position: self.mv.final_position.clone(),
            embedding: self.embedding.iter().map(|&c| self.mv.correspondence.channels[c]).collect(),
        }
    }

    /// The underlying full move.
    pub fn chi(&self) -> &GlobalMove {
        &self.mv
    }
}

/// The position channel an input or output move talks on.
fn anchored_channel(mv: &GlobalMove) -> Option<(Action, usize)> {
    let Anchor::Player(p) = mv.anchor else { return None };
    match mv.kind {
        MoveKind::In { channel, .. } => Some((Action::In(0), mv.initial.players[p][channel - 1])),
        MoveKind::Out { channel, .. } => Some((Action::Out(0), mv.initial.players[p][channel - 1])),
        _ => None,
    }
}

/// Whether a full move is an edge of the interfaced alphabet: inputs and
/// outputs must be on a channel in the image of the interface.
pub fn admits(embedding: &[usize], mv: &GlobalMove) -> bool {
    anchored_channel(mv).is_none_or(|(_, c)| embedding.contains(&c))
}

/// The CCS label of an interfaced edge: tick moves give the success label,
/// inputs and outputs the interface channel, everything else is silent.
pub fn xi(edge: &LEdge) -> LabelA {
    let endpoint = Context(edge.embedding.len());
    let kind = match (edge.mv.kind, anchored_channel(&edge.mv)) {
        (MoveKind::Tick { .. }, _) => Action::Tick,
        (_, Some((a, c))) => {
            let i = edge.embedding.iter().position(|&x| x == c).expect("edge of the interfaced alphabet") + 1;
            match a {
                Action::In(_) => Action::In(i),
                _ => Action::Out(i),
            }
        }
        _ => Action::Id,
    };
    LabelA::new(endpoint, kind)
}

/// A finite fragment of the interfaced alphabet.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LFragment {
    pub vertices: Vec<InterfacedPosition>,
    pub edges: Vec<LEdge>,
}

fn assignments(channels: usize, arity: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..arity {
        out = out.into_iter().flat_map(|a| (0..channels).map(move |c| [a.clone(), vec![c]].concat())).collect();
    }
    out
}

fn multisets<T: Clone>(items: &[T], max: usize) -> Vec<Vec<T>> {
    let mut out = vec![Vec::new()];
    let mut layer: Vec<(usize, Vec<T>)> = vec![(0, Vec::new())];
    for _ in 0..max {
        let mut next = Vec::new();
        for (from, m) in &layer {
            for (k, it) in items.iter().enumerate().skip(*from) {
                let mut m2 = m.clone();
                m2.push(it.clone());
                next.push((k, m2));
            }
        }
        out.extend(next.iter().map(|(_, m)| m.clone()));
        layer = next;
    }
    out
}

fn subsets(n: usize) -> Vec<Vec<usize>> {
    (0u32..1 << n).map(|mask| (0..n).filter(|&c| mask & (1 << c) != 0).collect()).collect()
}

/// The interfaced positions with at most the given numbers of channels,
/// players and player arity (players as multisets, interfaces as ordered
/// channel subsets), and all their edges. Each edge maps to the full move
/// it carries.
pub fn build_chi(max_channels: usize, max_players: usize, max_arity: usize) -> LFragment {
    let mut vertices = Vec::new();
    for channels in 0..=max_channels {
        let kinds: Vec<Vec<usize>> = (0..=max_arity).flat_map(|n| assignments(channels, n)).collect();
        for players in multisets(&kinds, max_players) {
            let position = Position { channels, players };
            for embedding in subsets(channels) {
                vertices.push(InterfacedPosition { position: position.clone(), embedding });
            }
        }
    }
    let edges = vertices
        .iter()
        .flat_map(|v| {
            enabled_moves(&v.position, MoveFilter::FullOnly)
                .into_iter()
                .filter(|m| admits(&v.embedding, m))
                .map(|mv| LEdge { embedding: v.embedding.clone(), mv })
        })
        .collect();
    LFragment { vertices, edges }
}

/// An LTS of families over full moves whose components can be compared and
/// recognised as inert.
pub trait FamilyLts: Lts<State = Configuration<Self::Component>, Label = GlobalMove> {
    type Component: Clone + Eq + Hash + Ord + Debug;

    /// A component that can never take part in a move.
    fn is_inert(&self, c: &Self::Component) -> bool;
}

impl FamilyLts for StrategyLts {
    type Component = DefiniteId;

    fn is_inert(&self, c: &DefiniteId) -> bool {
        self.arena.get_definite(*c).table.iter().all(|&s| self.arena.initial_states(s) == 0)
    }
}

impl FamilyLts for TermLts {
    type Component = TermId;

    fn is_inert(&self, c: &TermId) -> bool {
        matches!(self.terms.get(*c), ProcessTerm::GuardedSum(bs) if bs.is_empty())
    }
}

/// The pullback of a family LTS along the forgetful map from interfaced
/// positions: states carry an interface, and inputs and outputs off the
/// interface are removed. With `canonical` set, states are normalised:
/// inert players and unused private channels are dropped, interface
/// channels come first, the rest are numbered by first use after sorting
/// players by component.
pub struct ChiPullback<L: FamilyLts> {
    pub base: L,
    pub canonical: bool,
}

impl<L: FamilyLts> ChiPullback<L> {
    pub fn new(base: L, canonical: bool) -> ChiPullback<L> {
        ChiPullback { base, canonical }
    }

    /// The state over `config` with interface `embedding`.
    pub fn state(&self, embedding: Vec<usize>, config: Configuration<L::Component>) -> InterfacedConfig<L::Component> {
        let s = InterfacedConfig { embedding, config };
        if self.canonical {
            self.canonicalize(s)
        } else {
            s
        }
    }

    fn canonicalize(&self, s: InterfacedConfig<L::Component>) -> InterfacedConfig<L::Component> {
        let pos = &s.config.position;
        let live: Vec<usize> =
            (0..pos.players.len()).filter(|&p| !self.base.is_inert(&s.config.components[p])).collect();
        let iface = s.embedding.len();
        let number = |order: &[usize]| {
            let seq = std::iter::once(s.embedding.as_slice()).chain(order.iter().map(|&p| pos.players[p].as_slice()));
            first_use_numbering(pos.channels, seq)
        };
        let mut order = live.clone();
        let mut map = number(&order);
        for _ in 0..=live.len() {
            let mut next = order.clone();
            next.sort_by(|&a, &b| {
                let key = |p: usize| (pos.players[p].len(), &s.config.components[p], pos.players[p].iter().map(|&c| map[c]).collect::<Vec<_>>());
                key(a).cmp(&key(b))
            });
            let map2 = number(&next);
            if next == order && map2 == map {
                break;
            }
            order = next;
            map = map2;
        }
        let used = order.iter().flat_map(|&p| pos.players[p].iter().map(|&c| map[c])).max().map_or(0, |m| m + 1);
        let channels = used.max(iface);
        let position = Position { channels, players: order.iter().map(|&p| pos.players[p].iter().map(|&c| map[c]).collect()).collect() };
        let components = order.iter().map(|&p| s.config.components[p].clone()).collect();
        InterfacedConfig { embedding: (0..iface).collect(), config: Configuration { position, components } }
    }
}

impl<L: FamilyLts> Lts for ChiPullback<L> {
    type State = InterfacedConfig<L::Component>;
    type Label = LEdge;

    fn successors(&mut self, s: &Self::State) -> Result<Vec<(LEdge, Self::State)>, LtsError> {
        let steps = self.base.successors(&s.config)?;
        Ok(steps
            .into_iter()
            .filter(|(mv, _)| admits(&s.embedding, mv))
            .map(|(mv, c)| {
                let edge = LEdge { embedding: s.embedding.clone(), mv };
                let target = self.state(edge.target().embedding, c);
                (edge, target)
            })
            .collect())
    }

    fn describe(&self, s: &Self::State) -> String {
        self.base.describe(&s.config)
    }
}

/// Relabels an LTS over interfaced moves by [`xi`].
pub struct XiPostcompose<L> {
    pub inner: L,
}

impl<L: Lts<Label = LEdge>> Lts for XiPostcompose<L> {
    type State = L::State;
    type Label = LabelA;

    fn successors(&mut self, s: &Self::State) -> Result<Vec<(LabelA, Self::State)>, LtsError> {
        Ok(self.inner.successors(s)?.into_iter().map(|(e, t)| (xi(&e), t)).collect())
    }

    fn describe(&self, s: &Self::State) -> String {
        self.inner.describe(s)
    }
}

/// The standard CCS LTS at a fixed context.
#[derive(Clone, Copy, Debug)]
pub struct CcsLts {
    pub ctx: Context,
}

impl Lts for CcsLts {
    type State = Process;
    type Label = LabelA;

    fn successors(&mut self, s: &Process) -> Result<Vec<(LabelA, Process)>, LtsError> {
        Ok(ccs_transitions(self.ctx, s))
    }

    fn describe(&self, s: &Process) -> String {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ccs::parse_ccs;
    use crate::strategy::{translate_ccs, Arena};

    fn strategy_lts(text: &str) -> (ChiPullback<StrategyLts>, Configuration<DefiniteId>) {
        let t = parse_ccs(text).unwrap();
        let mut arena = Arena::new();
        let s = translate_ccs(&mut arena, t.context, &t.process);
        let d = arena.get(s).defs[0];
        (ChiPullback::new(StrategyLts { arena: arena.into(), max_arity: 8 }, true), Configuration::individual(t.context.0, d))
    }

    #[test]
    fn filter_on_interface() {
        let f = build_chi(1, 1, 1);
        let one = Position::individual(1);
        let ins = |emb: Vec<usize>| {
            f.edges.iter().filter(|e| e.mv.initial == one && e.embedding == emb && matches!(e.mv.kind, MoveKind::In { .. })).count()
        };
        assert_eq!(ins(vec![]), 0);
        assert_eq!(ins(vec![0]), 1);
        assert!(f.edges.iter().all(|e| admits(&e.embedding, e.chi())));
    }

    #[test]
    fn tau_edges_kept_without_interface() {
        let f = build_chi(1, 2, 1);
        assert!(f.edges.iter().any(|e| e.embedding.is_empty() && matches!(e.mv.kind, MoveKind::Tau { .. })));
    }

    #[test]
    fn xi_cases() {
        let z = Position::new(2, vec![vec![0, 1]]).unwrap();
        let edge = |kind| LEdge { embedding: vec![1], mv: crate::game::instantiate(kind, &z, Anchor::Player(0)).unwrap() };
        assert_eq!(xi(&edge(MoveKind::Tick { arity: 2 })).kind, Action::Tick);
        assert_eq!(xi(&edge(MoveKind::Nu { arity: 2 })).kind, Action::Id);
        assert_eq!(xi(&edge(MoveKind::Para { arity: 2 })).kind, Action::Id);
        assert_eq!(xi(&edge(MoveKind::Out { arity: 2, channel: 2 })), LabelA::new(Context(1), Action::Out(1)));
        assert!(!admits(&[1], &edge(MoveKind::Out { arity: 2, channel: 1 }).mv));
    }

    #[test]
    fn undue_input_vanishes() {
        let (mut chi, c) = strategy_lts("[0] new a. a1.0");
        let after_nu = chi.base.successors(&c).unwrap().remove(0).1;
        assert_eq!(chi.base.successors(&after_nu).unwrap().len(), 1);
        let s = chi.state(vec![], c);
        let s1 = chi.successors(&s).unwrap().remove(0).1;
        assert!(chi.successors(&s1).unwrap().is_empty());
    }

    #[test]
    fn full_interface_keeps_everything() {
        let (mut chi, c) = strategy_lts("[2] a1.0 | 'a2.tick.0");
        chi.canonical = false;
        let s = chi.state(vec![0, 1], c.clone());
        let s1 = chi.successors(&s).unwrap().remove(0).1;
        let base = chi.base.successors(&s1.config).unwrap().len();
        assert_eq!(chi.successors(&s1).unwrap().len(), base);
        for (e, t) in chi.successors(&s1).unwrap() {
            assert!(chi.base.successors(&s1.config).unwrap().iter().any(|(m, c)| *m == e.mv && *c == t.config));
        }
    }

    #[test]
    fn canonical_states_drop_inert_players() {
        let (mut chi, c) = strategy_lts("[1] a1.0 | 'a1.0");
        let mut xi_lts = XiPostcompose { inner: ChiPullback::new(StrategyLts { arena: chi.base.arena.clone(), max_arity: 8 }, true) };
        let s = chi.state(vec![0], c);
        let s1 = chi.successors(&s).unwrap().remove(0).1;
        let labels: Vec<Action> = xi_lts.successors(&s1).unwrap().iter().map(|(l, _)| l.kind).collect();
        assert_eq!(labels, vec![Action::In(1), Action::Out(1), Action::Id]);
        let tau = chi.successors(&s1).unwrap().into_iter().find(|(e, _)| matches!(e.mv.kind, MoveKind::Tau { .. })).unwrap().1;
        assert!(tau.config.components.is_empty());
        assert_eq!(tau.config.position, Position::interface(1));
    }

    #[test]
    fn ccs_lts_wraps_transitions() {
        let t = parse_ccs("[1] a1.tick.0").unwrap();
        let mut l = CcsLts { ctx: t.context };
        let steps = l.successors(&t.process).unwrap();
        assert_eq!(steps.len(), 1);
        assert_eq!(l.successors(&steps[0].1).unwrap()[0].0.kind, Action::Tick);
    }
}
