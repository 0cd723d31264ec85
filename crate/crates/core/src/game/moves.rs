//! Local seeds and their instantiation as global moves.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{GameError, Position};
use crate::presheaf::{
    elements_of_representable, pushout, BaseMorphism, BaseObject, FinPresheaf, Generator, MoveKind,
    PresheafMorphism,
};

/// The players of the initial position performing a move.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Anchor {
    Player(usize),
    /// An ordered pair: the output side and the input side.
    Sync { output: usize, input: usize },
}

impl Anchor {
    pub fn players(self) -> Vec<usize> {
        match self {
            Anchor::Player(p) => vec![p],
            Anchor::Sync { output, input } => vec![output, input],
        }
    }
}

/// Where the players and channels of the initial position went.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Correspondence {
    /// For each initial player, its final counterparts (two after a fork).
    pub players: Vec<Vec<usize>>,
    /// For each initial channel, its final counterpart.
    pub channels: Vec<usize>,
}

impl Correspondence {
    /// The initial player a final player descends from, and which of its
    /// counterparts it is.
    pub fn ancestor(&self, final_player: usize) -> Option<(usize, usize)> {
        self.players
            .iter()
            .enumerate()
            .find_map(|(p, cs)| cs.iter().position(|&c| c == final_player).map(|k| (p, k)))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GlobalMove {
    pub kind: MoveKind,
    pub anchor: Anchor,
    pub initial: Position,
    #[serde(rename = "final")]
    pub final_position: Position,
    pub correspondence: Correspondence,
}

impl GlobalMove {
    /// The mid object of the move and its two legs, computed by pushing the
    /// local seed along the anchoring. Used as a cross-check of the
    /// combinatorial instantiation.
    pub fn middle_presheaf(&self) -> (FinPresheaf, PresheafMorphism, PresheafMorphism) {
        let seed = local_seed(self.kind);
        let anchored = self.anchor.players();
        let z = &self.initial;
        let rest: Vec<usize> = (0..z.players.len()).filter(|p| !anchored.contains(p)).collect();
        let context = Position {
            channels: z.channels,
            players: rest.iter().map(|&p| z.players[p].clone()).collect(),
        };
        let interface = Position::interface(seed.initial.channels).to_presheaf();
        let mut into_ambient = vec![usize::MAX; seed.initial.channels];
        for (q, &a) in anchored.iter().enumerate() {
            for (k, &c) in seed.initial.players[q].iter().enumerate() {
                into_ambient[c] = z.players[a][k];
            }
        }
        let f = PresheafMorphism::new(
            interface.clone(),
            seed.mid.clone(),
            BTreeMap::from([(BaseObject::Star, seed.initial_leg.components[&BaseObject::Star].clone())]),
        )
        .expect("seed interface");
        let g = PresheafMorphism::new(
            interface,
            context.to_presheaf(),
            BTreeMap::from([(BaseObject::Star, into_ambient)]),
        )
        .expect("ambient interface");
        let po = pushout(&f, &g).expect("shared domain");

        let seed_player = |seed_pos: &Position, leg: &PresheafMorphism, q: usize| {
            let (n, idx) = seed_pos.player_element(q);
            (n, po.left.apply(BaseObject::Player(n), leg.apply(BaseObject::Player(n), idx)))
        };
        let context_player = |p: usize| {
            let (n, idx) = context.player_element(rest.iter().position(|&r| r == p).unwrap());
            (n, po.right.apply(BaseObject::Player(n), idx))
        };

        let mut init: BTreeMap<BaseObject, Vec<usize>> = BTreeMap::new();
        init.insert(BaseObject::Star, (0..z.channels).map(|c| po.right.apply(BaseObject::Star, c)).collect());
        for p in 0..z.players.len() {
            let (n, e) = match anchored.iter().position(|&a| a == p) {
                Some(q) => seed_player(&seed.initial, &seed.initial_leg, q),
                None => context_player(p),
            };
            init.entry(BaseObject::Player(n)).or_default().push(e);
        }

        let x = &self.final_position;
        let fresh = seed.final_position.players.iter().flatten().copied().find(|&c| {
            !seed.initial_channel_in_final().contains(&c)
        });
        let mut fin: BTreeMap<BaseObject, Vec<usize>> = BTreeMap::new();
        let mut star = vec![usize::MAX; x.channels];
        for (c, &d) in self.correspondence.channels.iter().enumerate() {
            star[d] = po.right.apply(BaseObject::Star, c);
        }
        for slot in star.iter_mut().filter(|s| **s == usize::MAX) {
            let c = fresh.expect("fresh channel only for channel creation");
            *slot = po.left.apply(BaseObject::Star, seed.final_leg.apply(BaseObject::Star, c));
        }
        fin.insert(BaseObject::Star, star);
        for r in 0..x.players.len() {
            let (p, k) = self.correspondence.ancestor(r).expect("every final player has an ancestor");
            let (n, e) = match anchored.iter().position(|&a| a == p) {
                Some(q) => {
                    let before: usize = (0..q).map(|q2| self.correspondence.players[anchored[q2]].len()).sum();
                    seed_player(&seed.final_position, &seed.final_leg, before + k)
                }
                None => context_player(p),
            };
            fin.entry(BaseObject::Player(n)).or_default().push(e);
        }
        let init = PresheafMorphism::new(z.to_presheaf(), po.apex.clone(), init).expect("initial leg is natural");
        let fin = PresheafMorphism::new(x.to_presheaf(), po.apex.clone(), fin).expect("final leg is natural");
        (po.apex, init, fin)
    }

    pub fn is_full(&self) -> bool {
        self.kind.is_full()
    }

    pub fn is_closed_world(&self) -> bool {
        self.kind.is_closed_world()
    }

    pub fn label(&self) -> String {
        match self.anchor {
            Anchor::Player(p) => format!("{}@{p}", self.kind),
            Anchor::Sync { output, input } => format!("{}@{output}>{input}", self.kind),
        }
    }
}

/// A local move `final -> mid <- initial`, with the mid object the
/// representable on the move kind.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalSeed {
    pub kind: MoveKind,
    pub initial: Position,
    pub mid: FinPresheaf,
    #[serde(rename = "final")]
    pub final_position: Position,
    pub initial_leg: PresheafMorphism,
    pub final_leg: PresheafMorphism,
}

impl LocalSeed {
    fn initial_channel_in_final(&self) -> Vec<usize> {
        // Final channels whose image in the mid object is also hit from the initial position.
        let init: Vec<usize> = self.initial_leg.components[&BaseObject::Star].clone();
        self.final_leg.components[&BaseObject::Star]
            .iter()
            .enumerate()
            .filter(|(_, e)| init.contains(e))
            .map(|(c, _)| c)
            .collect()
    }
}

fn player_paths(kind: MoveKind) -> (Vec<Vec<Generator>>, Vec<Vec<Generator>>) {
    use Generator::*;
    match kind {
        MoveKind::Para { arity } => {
            let (l, r) = (MoveKind::ParaL { arity }, MoveKind::ParaR { arity });
            (
                vec![vec![InitialLeg(l), ForkLeft(arity)]],
                vec![vec![FinalLeg(l), ForkLeft(arity)], vec![FinalLeg(r), ForkRight(arity)]],
            )
        }
        MoveKind::Tau { .. } => {
            let (out, inp) = kind.components().unwrap();
            (
                vec![vec![InitialLeg(out), SyncOut(kind)], vec![InitialLeg(inp), SyncIn(kind)]],
                vec![vec![FinalLeg(out), SyncOut(kind)], vec![FinalLeg(inp), SyncIn(kind)]],
            )
        }
        _ => (vec![vec![InitialLeg(kind)]], vec![vec![FinalLeg(kind)]]),
    }
}

fn position_in(mid: &crate::presheaf::ElementCategory, paths: &[Vec<Generator>]) -> (Position, PresheafMorphism) {
    let find = |m: &BaseMorphism| {
        mid.elements
            .iter()
            .find(|e| e.object == m.source && e.morphism == *m)
            .map(|e| e.index)
            .expect("element of the representable")
    };
    let mut chan_elems: Vec<usize> = Vec::new();
    let mut players = Vec::new();
    let mut player_comp: BTreeMap<BaseObject, Vec<usize>> = BTreeMap::new();
    for path in paths {
        let m = BaseMorphism::from_path(path.clone()).expect("composable");
        let BaseObject::Player(n) = m.source else { unreachable!() };
        player_comp.entry(BaseObject::Player(n)).or_default().push(find(&m));
        let mut assignment = Vec::with_capacity(n);
        for index in 1..=n {
            let c = BaseMorphism::generator(Generator::Channel { arity: n, index }).then(&m).expect("composable");
            let e = find(&c);
            let id = chan_elems.iter().position(|&x| x == e).unwrap_or_else(|| {
                chan_elems.push(e);
                chan_elems.len() - 1
            });
            assignment.push(id);
        }
        players.push(assignment);
    }
    let pos = Position { channels: chan_elems.len(), players };
    player_comp.insert(BaseObject::Star, chan_elems);
    let leg = PresheafMorphism::new(pos.to_presheaf(), mid.presheaf.clone(), player_comp).expect("natural leg");
    (pos, leg)
}

/// The local seed of a move kind.
pub fn local_seed(kind: MoveKind) -> LocalSeed {
    let mid = elements_of_representable(BaseObject::Move(kind));
    let (init_paths, fin_paths) = player_paths(kind);
    let (initial, initial_leg) = position_in(&mid, &init_paths);
    let (final_position, final_leg) = position_in(&mid, &fin_paths);
    LocalSeed { kind, initial, mid: mid.presheaf, final_position, initial_leg, final_leg }
}

fn check_arity(z: &Position, p: usize, expected: usize) -> Result<(), GameError> {
    let found = z.arity(p).ok_or(GameError::UnknownPlayer(p))?;
    if found != expected {
        return Err(GameError::ArityMismatch { player: p, expected, found });
    }
    Ok(())
}

/// Instantiates a move kind at the anchored player(s) of `z`.
pub fn instantiate(kind: MoveKind, z: &Position, anchor: Anchor) -> Result<GlobalMove, GameError> {
    if !kind.is_valid() {
        let (index, arity) = match kind {
            MoveKind::In { arity, channel } | MoveKind::Out { arity, channel } => (channel, arity),
            MoveKind::Tau { out_arity, out_channel, in_arity, in_channel } => {
                if out_channel > out_arity || out_channel == 0 {
                    (out_channel, out_arity)
                } else {
                    (in_channel, in_arity)
                }
            }
            _ => unreachable!(),
        };
        return Err(GameError::IndexOutOfRange { index, arity });
    }
    let identity_channels: Vec<usize> = (0..z.channels).collect();
    let identity_players: Vec<Vec<usize>> = (0..z.players.len()).map(|p| vec![p]).collect();
    let mut final_position = z.clone();
    let mut players = identity_players;
    match (kind, anchor) {
        (MoveKind::Tau { out_arity, out_channel, in_arity, in_channel }, Anchor::Sync { output, input }) => {
            check_arity(z, output, out_arity)?;
            check_arity(z, input, in_arity)?;
            if output == input {
                return Err(GameError::SelfSync);
            }
            if z.players[output][out_channel - 1] != z.players[input][in_channel - 1] {
                return Err(GameError::NotSharing);
            }
        }
        (MoveKind::Tau { .. }, _) | (_, Anchor::Sync { .. }) => {
            return Err(GameError::AnchorShape(kind.key()));
        }
        (_, Anchor::Player(p)) => {
            check_arity(z, p, kind.initial_arity())?;
            match kind {
                MoveKind::Nu { .. } => {
                    final_position.channels += 1;
                    final_position.players[p].push(z.channels);
                }
                MoveKind::Para { .. } => {
                    final_position.players.insert(p + 1, z.players[p].clone());
                    for (q, slot) in players.iter_mut().enumerate() {
                        if q == p {
                            *slot = vec![p, p + 1];
                        } else if q > p {
                            *slot = vec![q + 1];
                        }
                    }
                }
                _ => {}
            }
        }
    }
    Ok(GlobalMove {
        kind,
        anchor,
        initial: z.clone(),
        final_position,
        correspondence: Correspondence { players, channels: identity_channels },
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MoveFilter {
    All,
    FullOnly,
    ClosedWorld,
}

impl MoveFilter {
    fn admits(self, kind: MoveKind) -> bool {
        match self {
            MoveFilter::All => true,
            MoveFilter::FullOnly => kind.is_full(),
            MoveFilter::ClosedWorld => kind.is_closed_world(),
        }
    }
}

/// All moves from `x`: per player the fork halves, fork, tick, channel
/// creation, then inputs and outputs by channel index; then every ordered
/// synchronisation.
pub fn enabled_moves(x: &Position, filter: MoveFilter) -> Vec<GlobalMove> {
    let mut out = Vec::new();
    for (p, assignment) in x.players.iter().enumerate() {
        let n = assignment.len();
        let mut kinds = vec![
            MoveKind::ParaL { arity: n },
            MoveKind::ParaR { arity: n },
            MoveKind::Para { arity: n },
            MoveKind::Tick { arity: n },
            MoveKind::Nu { arity: n },
        ];
        for channel in 1..=n {
            kinds.push(MoveKind::In { arity: n, channel });
            kinds.push(MoveKind::Out { arity: n, channel });
        }
        for kind in kinds.into_iter().filter(|k| filter.admits(*k)) {
            out.push(instantiate(kind, x, Anchor::Player(p)).expect("anchor fits"));
        }
    }
    if filter.admits(MoveKind::Tau { out_arity: 1, out_channel: 1, in_arity: 1, in_channel: 1 }) {
        for (output, xs) in x.players.iter().enumerate() {
            for (input, ys) in x.players.iter().enumerate() {
                if output == input {
                    continue;
                }
                for (j, cx) in xs.iter().enumerate() {
                    for (i, cy) in ys.iter().enumerate() {
                        if cx == cy {
                            let kind = MoveKind::Tau {
                                out_arity: xs.len(),
                                out_channel: j + 1,
                                in_arity: ys.len(),
                                in_channel: i + 1,
                            };
                            out.push(instantiate(kind, x, Anchor::Sync { output, input }).expect("shared"));
                        }
                    }
                }
            }
        }
    }
    out
}

pub fn is_full(m: &GlobalMove) -> bool {
    m.is_full()
}

pub fn is_closed_world(m: &GlobalMove) -> bool {
    m.is_closed_world()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presheaf::{check_presheaf, is_isomorphic, is_mono, move_kinds};

    #[test]
    fn fork_seed() {
        let s = local_seed(MoveKind::Para { arity: 2 });
        assert_eq!(s.initial, Position::individual(2));
        assert_eq!(s.final_position, Position::new(2, vec![vec![0, 1], vec![0, 1]]).unwrap());
        assert!(is_mono(&s.initial_leg) && is_mono(&s.final_leg));
    }

    #[test]
    fn channel_creation_seed() {
        let s = local_seed(MoveKind::Nu { arity: 2 });
        assert_eq!(s.initial, Position::individual(2));
        assert_eq!(s.final_position, Position::individual(3));
        let init = &s.initial_leg.components[&BaseObject::Star];
        let fin = &s.final_leg.components[&BaseObject::Star];
        assert_eq!(&fin[..2], &init[..]);
        assert!(!init.contains(&fin[2]));
    }

    #[test]
    fn sync_seed() {
        let kind = MoveKind::Tau { out_arity: 3, out_channel: 3, in_arity: 2, in_channel: 1 };
        let s = local_seed(kind);
        assert_eq!(s.initial, Position::shared_pair(3, 3, 2, 1));
        assert_eq!(s.final_position, s.initial);
    }

    #[test]
    fn every_seed_is_a_pair_of_monos() {
        for kind in move_kinds(2) {
            let s = local_seed(kind);
            assert!(check_presheaf(&s.mid), "{kind}");
            assert!(is_mono(&s.initial_leg) && is_mono(&s.final_leg), "{kind}");
        }
    }

    #[test]
    fn instantiate_fork() {
        let m = instantiate(MoveKind::Para { arity: 2 }, &Position::individual(2), Anchor::Player(0)).unwrap();
        assert_eq!(m.final_position.players.len(), 2);
        assert_eq!(m.correspondence.players, vec![vec![0, 1]]);
    }

    #[test]
    fn instantiate_errors() {
        let z = Position::new(3, vec![vec![0], vec![1], vec![2]]).unwrap();
        let tau = MoveKind::Tau { out_arity: 1, out_channel: 1, in_arity: 1, in_channel: 1 };
        assert_eq!(instantiate(tau, &z, Anchor::Sync { output: 0, input: 1 }), Err(GameError::NotSharing));
        assert!(matches!(
            instantiate(MoveKind::Tick { arity: 2 }, &z, Anchor::Player(0)),
            Err(GameError::ArityMismatch { .. })
        ));
        let m = instantiate(MoveKind::Tick { arity: 1 }, &z, Anchor::Player(2)).unwrap();
        assert_eq!(m.final_position, z);
    }

    #[test]
    fn enabled_on_shared_pair() {
        let x = Position::new(2, vec![vec![0, 1], vec![0, 1]]).unwrap();
        let moves = enabled_moves(&x, MoveFilter::FullOnly);
        let taus = moves.iter().filter(|m| matches!(m.kind, MoveKind::Tau { .. })).count();
        // Per player: fork, tick, creation, two inputs, two outputs.
        assert_eq!(moves.len() - taus, 14);
        // Two directions times two shared channels.
        assert_eq!(taus, 4);
        assert!(enabled_moves(&Position::interface(3), MoveFilter::All).is_empty());
        let kinds: Vec<MoveKind> =
            enabled_moves(&Position::individual(0), MoveFilter::ClosedWorld).iter().map(|m| m.kind).collect();
        assert_eq!(kinds, vec![MoveKind::Para { arity: 0 }, MoveKind::Tick { arity: 0 }, MoveKind::Nu { arity: 0 }]);
    }

    #[test]
    fn classification() {
        let all = enabled_moves(&Position::shared_pair(2, 1, 1, 1), MoveFilter::All);
        for m in &all {
            let fork_half = matches!(m.kind, MoveKind::ParaL { .. } | MoveKind::ParaR { .. });
            assert_ne!(is_full(m), fork_half);
        }
        assert!(is_closed_world(&instantiate(MoveKind::Tick { arity: 1 }, &Position::individual(1), Anchor::Player(0)).unwrap()));
        assert!(!is_closed_world(
            &instantiate(MoveKind::In { arity: 2, channel: 1 }, &Position::individual(2), Anchor::Player(0)).unwrap()
        ));
    }

    #[test]
    fn instantiation_agrees_with_pushout() {
        let positions = [
            Position::new(3, vec![vec![0, 1], vec![1, 2], vec![2]]).unwrap(),
            Position::new(2, vec![vec![0, 1], vec![0, 1]]).unwrap(),
            Position::new(2, vec![vec![0, 0], vec![]]).unwrap(),
        ];
        for z in &positions {
            for m in enabled_moves(z, MoveFilter::All) {
                let (mid, init, fin) = m.middle_presheaf();
                assert!(check_presheaf(&mid), "{}", m.label());
                assert!(is_mono(&fin), "{}", m.label());
                assert!(check_presheaf(&m.final_position.to_presheaf()));
                let _ = init;
            }
        }
    }

    #[test]
    fn seed_reproduced_at_own_interface() {
        for kind in move_kinds(2) {
            let s = local_seed(kind);
            let anchor = if matches!(kind, MoveKind::Tau { .. }) {
                Anchor::Sync { output: 0, input: 1 }
            } else {
                Anchor::Player(0)
            };
            let m = instantiate(kind, &s.initial, anchor).unwrap();
            assert_eq!(m.final_position, s.final_position, "{kind}");
            let (mid, _, _) = m.middle_presheaf();
            assert!(is_isomorphic(&mid, &s.mid), "{kind}");
        }
    }
}
