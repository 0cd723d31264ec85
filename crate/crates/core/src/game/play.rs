//! Plays as move sequences, views, and the presheaf of a play.

use serde::{Deserialize, Serialize};

use super::{dot_position, Anchor, BasicMoveClass, GameError, GlobalMove, Position, ViewPath};
use crate::presheaf::{pushout, FinPresheaf, MoveKind, PresheafMorphism};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Play {
    pub initial: Position,
    pub steps: Vec<GlobalMove>,
}

impl Play {
    pub fn identity(x: Position) -> Play {
        Play { initial: x, steps: Vec::new() }
    }

    pub fn final_position(&self) -> &Position {
        self.steps.last().map_or(&self.initial, |m| &m.final_position)
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn push(&mut self, m: GlobalMove) -> Result<(), GameError> {
        if m.initial != *self.final_position() {
            return Err(GameError::NotComposable);
        }
        self.steps.push(m);
        Ok(())
    }

    /// `self` followed by `m`.
    pub fn compose(&self, m: GlobalMove) -> Result<Play, GameError> {
        let mut p = self.clone();
        p.push(m)?;
        Ok(p)
    }

    pub fn prefix(&self, len: usize) -> Play {
        Play { initial: self.initial.clone(), steps: self.steps[..len].to_vec() }
    }

    /// The lineage of a final player: its index in the position before each
    /// step, oldest first, ending with `player` itself.
    pub fn lineage(&self, player: usize) -> Vec<usize> {
        let mut out = vec![player];
        let mut current = player;
        for m in self.steps.iter().rev() {
            let (p, _) = m.correspondence.ancestor(current).expect("lineage");
            current = p;
            out.push(p);
        }
        out.reverse();
        out
    }

    /// The underlying presheaf of the play: the composite of the move
    /// cospans, together with the leg from the final position.
    pub fn underlying_presheaf(&self) -> (FinPresheaf, PresheafMorphism) {
        let mut u = self.initial.to_presheaf();
        let mut leg = PresheafMorphism::identity(&u);
        for m in &self.steps {
            let (_, init, fin) = m.middle_presheaf();
            let po = pushout(&leg, &init).expect("legs share the intermediate position");
            leg = fin.then(&po.right);
            u = po.apex;
        }
        (u, leg)
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph play {\n  compound=true;\n");
        let positions: Vec<&Position> =
            std::iter::once(&self.initial).chain(self.steps.iter().map(|m| &m.final_position)).collect();
        for (k, pos) in positions.iter().enumerate() {
            s.push_str(&format!("  subgraph cluster_{k} {{\n  label=\"X{k}\";\n  edge [dir=none];\n"));
            dot_position(&mut s, pos, &format!("x{k}_"), "->");
            s.push_str("  }\n");
        }
        for (k, m) in self.steps.iter().enumerate() {
            s.push_str(&format!("  m{k} [shape=box, label=\"{}\"];\n", m.label()));
            for p in m.anchor.players() {
                s.push_str(&format!("  x{k}_p{p} -> m{k};\n"));
                for &q in &m.correspondence.players[p] {
                    s.push_str(&format!("  m{k} -> x{}_p{q};\n", k + 1));
                }
            }
        }
        s.push_str("}\n");
        s
    }
}

/// The basic moves seen by the lineage of `player` (a player of the final
/// position), in order.
pub fn view_of(p: &Play, player: usize) -> Result<ViewPath, GameError> {
    if player >= p.final_position().players.len() {
        return Err(GameError::UnknownPlayer(player));
    }
    let lineage = p.lineage(player);
    let arity = p.initial.players[lineage[0]].len();
    let mut moves = Vec::new();
    for (k, m) in p.steps.iter().enumerate() {
        let (before, after) = (lineage[k], lineage[k + 1]);
        let class = match (m.anchor, m.kind) {
            (Anchor::Player(a), MoveKind::Para { .. }) if a == before => {
                if m.correspondence.players[a][0] == after {
                    Some(BasicMoveClass::ParaL)
                } else {
                    Some(BasicMoveClass::ParaR)
                }
            }
            (Anchor::Player(a), kind) if a == before => BasicMoveClass::of_kind(kind),
            (Anchor::Sync { output, .. }, MoveKind::Tau { out_channel, .. }) if output == before => {
                Some(BasicMoveClass::Out(out_channel))
            }
            (Anchor::Sync { input, .. }, MoveKind::Tau { in_channel, .. }) if input == before => {
                Some(BasicMoveClass::In(in_channel))
            }
            _ => None,
        };
        moves.extend(class);
    }
    Ok(ViewPath { arity, moves })
}

/// Whether some step is a tick.
pub fn is_successful(p: &Play) -> bool {
    p.steps.iter().any(|m| matches!(m.kind, MoveKind::Tick { .. }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{enabled_moves, instantiate, MoveFilter};
    use crate::presheaf::{check_presheaf, is_isomorphic};

    fn mv(kind: MoveKind, z: &Position, anchor: Anchor) -> GlobalMove {
        instantiate(kind, z, anchor).unwrap()
    }

    #[test]
    fn identity_play() {
        let x = Position::individual(2);
        let id = Play::identity(x.clone());
        assert_eq!(view_of(&id, 0).unwrap(), ViewPath::empty(2));
        assert!(!is_successful(&id));
        let m = mv(MoveKind::Tick { arity: 2 }, &x, Anchor::Player(0));
        let p = id.compose(m).unwrap();
        assert_eq!(p.len(), 1);
        assert!(is_successful(&p));
    }

    #[test]
    fn mismatched_composition() {
        let m = mv(MoveKind::Tick { arity: 1 }, &Position::individual(1), Anchor::Player(0));
        assert_eq!(Play::identity(Position::individual(2)).compose(m), Err(GameError::NotComposable));
    }

    #[test]
    fn fork_views() {
        let x = Position::individual(2);
        let p = Play::identity(x.clone()).compose(mv(MoveKind::Para { arity: 2 }, &x, Anchor::Player(0))).unwrap();
        assert_eq!(view_of(&p, 0).unwrap(), ViewPath::new(2, vec![BasicMoveClass::ParaL]));
        assert_eq!(view_of(&p, 1).unwrap(), ViewPath::new(2, vec![BasicMoveClass::ParaR]));
    }

    #[test]
    fn fork_then_input_side_sync() {
        let x = Position::individual(1);
        let p = Play::identity(x.clone()).compose(mv(MoveKind::Para { arity: 1 }, &x, Anchor::Player(0))).unwrap();
        let tau = MoveKind::Tau { out_arity: 1, out_channel: 1, in_arity: 1, in_channel: 1 };
        let p = p.compose(mv(tau, p.final_position(), Anchor::Sync { output: 1, input: 0 })).unwrap();
        assert_eq!(view_of(&p, 0).unwrap(), ViewPath::new(1, vec![BasicMoveClass::ParaL, BasicMoveClass::In(1)]));
        assert_eq!(view_of(&p, 1).unwrap(), ViewPath::new(1, vec![BasicMoveClass::ParaR, BasicMoveClass::Out(1)]));
        assert!(!is_successful(&p));
    }

    #[test]
    fn interleaved_outputs_have_isomorphic_presheaves() {
        let x = Position::new(1, vec![vec![0], vec![0]]).unwrap();
        let out = MoveKind::Out { arity: 1, channel: 1 };
        let a = Play::identity(x.clone())
            .compose(mv(out, &x, Anchor::Player(0)))
            .and_then(|p| p.compose(mv(out, &x, Anchor::Player(1))))
            .unwrap();
        let b = Play::identity(x.clone())
            .compose(mv(out, &x, Anchor::Player(1)))
            .and_then(|p| p.compose(mv(out, &x, Anchor::Player(0))))
            .unwrap();
        let (ua, _) = a.underlying_presheaf();
        let (ub, _) = b.underlying_presheaf();
        assert!(check_presheaf(&ua));
        assert!(is_isomorphic(&ua, &ub));
        let c = Play::identity(x.clone())
            .compose(mv(out, &x, Anchor::Player(0)))
            .and_then(|p| p.compose(mv(out, &x, Anchor::Player(0))))
            .unwrap();
        assert!(!is_isomorphic(&ua, &c.underlying_presheaf().0));
    }

    #[test]
    fn views_replay_as_plays() {
        let x = Position::new(2, vec![vec![0, 1], vec![1]]).unwrap();
        let mut frontier = vec![Play::identity(x)];
        for _ in 0..2 {
            let mut next = Vec::new();
            for p in &frontier {
                for m in enabled_moves(p.final_position(), MoveFilter::All) {
                    next.push(p.compose(m).unwrap());
                }
            }
            frontier = next;
        }
        for p in &frontier {
            for q in 0..p.final_position().players.len() {
                let v = view_of(p, q).unwrap();
                assert!(v.is_valid());
                assert_eq!(v.to_play().unwrap().len(), v.moves.len());
                assert_eq!(v.final_arity(), p.final_position().players[q].len());
            }
        }
    }
}
