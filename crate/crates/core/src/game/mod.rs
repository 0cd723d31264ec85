//! Positions, local seeds, global moves, plays and views.

mod moves;
mod play;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::presheaf::{BaseObject, FinPresheaf, Generator, MoveKind};

pub use moves::{
    enabled_moves, instantiate, is_closed_world, is_full, local_seed, Anchor, Correspondence,
    GlobalMove, LocalSeed, MoveFilter,
};
pub use play::{is_successful, view_of, Play};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum GameError {
    #[error("player {0} does not exist")]
    UnknownPlayer(usize),
    #[error("channel {0} does not exist")]
    UnknownChannel(usize),
    #[error("player {player} has arity {found}, the move needs {expected}")]
    ArityMismatch { player: usize, expected: usize, found: usize },
    #[error("channel index {index} is out of range for arity {arity}")]
    IndexOutOfRange { index: usize, arity: usize },
    #[error("the synchronising players do not share the required channel")]
    NotSharing,
    #[error("a synchronisation needs two distinct players")]
    SelfSync,
    #[error("anchor does not fit a {0} move")]
    AnchorShape(String),
    #[error("move starts at a position different from the play's final position")]
    NotComposable,
    #[error("arity {arity} exceeds the maximum arity {max_arity}")]
    ArityExceeded { arity: usize, max_arity: usize },
}

/// A position: channels `0..channels` and players given by their channel
/// assignments. A player's arity is the length of its assignment; repeated
/// channels are allowed.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Position {
    pub channels: usize,
    pub players: Vec<Vec<usize>>,
}

impl Position {
    pub fn new(channels: usize, players: Vec<Vec<usize>>) -> Result<Position, GameError> {
        for p in &players {
            if let Some(&c) = p.iter().find(|&&c| c >= channels) {
                return Err(GameError::UnknownChannel(c));
            }
        }
        Ok(Position { channels, players })
    }

    /// The individual `[n]`: one player on `n` distinct channels.
    pub fn individual(n: usize) -> Position {
        Position { channels: n, players: vec![(0..n).collect()] }
    }

    /// A position with channels only.
    pub fn interface(channels: usize) -> Position {
        Position { channels, players: Vec::new() }
    }

    /// `[m]` and `[n]` glued along the `j`-th channel of the first and the
    /// `i`-th of the second (1-based).
    pub fn shared_pair(m: usize, j: usize, n: usize, i: usize) -> Position {
        let first: Vec<usize> = (0..m).collect();
        let mut next = m;
        let second = (1..=n)
            .map(|k| {
                if k == i {
                    j - 1
                } else {
                    next += 1;
                    next - 1
                }
            })
            .collect();
        Position { channels: m + n - 1, players: vec![first, second] }
    }

    pub fn is_interface(&self) -> bool {
        self.players.is_empty()
    }

    pub fn arity(&self, player: usize) -> Option<usize> {
        self.players.get(player).map(Vec::len)
    }

    pub fn max_arity(&self) -> usize {
        self.players.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// The element of `[n]` representing `player` in [`Position::to_presheaf`].
    pub fn player_element(&self, player: usize) -> (usize, usize) {
        let n = self.players[player].len();
        let idx = self.players[..player].iter().filter(|p| p.len() == n).count();
        (n, idx)
    }

    pub fn to_presheaf(&self) -> FinPresheaf {
        let mut f = FinPresheaf::new();
        f.set_carrier(BaseObject::Star, self.channels);
        for assignment in &self.players {
            let n = assignment.len();
            let x = f.add_element(BaseObject::Player(n));
            for (k, &c) in assignment.iter().enumerate() {
                f.set_image(Generator::Channel { arity: n, index: k + 1 }, x, c);
            }
        }
        f
    }

    /// Glues `other` onto `self`, identifying each pair `(a, b)` of a channel
    /// of `self` with a channel of `other`. Returns the glued position
    /// (players of `self` first) and where the channels of `other` went.
    pub fn glue(&self, other: &Position, identify: &[(usize, usize)]) -> (Position, Vec<usize>) {
        let mut map = vec![usize::MAX; other.channels];
        for &(a, b) in identify {
            map[b] = a;
        }
        let mut channels = self.channels;
        for slot in map.iter_mut().filter(|s| **s == usize::MAX) {
            *slot = channels;
            channels += 1;
        }
        let mut players = self.players.clone();
        players.extend(other.players.iter().map(|p| p.iter().map(|&c| map[c]).collect()));
        (Position { channels, players }, map)
    }

    /// Renames channels and permutes players: `channel_map[old] = new`,
    /// `player_order[new] = old`.
    pub fn relabel(&self, channel_map: &[usize], player_order: &[usize]) -> Position {
        let players = player_order
            .iter()
            .map(|&p| self.players[p].iter().map(|&c| channel_map[c]).collect())
            .collect();
        Position { channels: self.channels, players }
    }

    /// A canonical representative up to renaming channels and permuting
    /// players: players sorted by assignment, channels numbered by first use,
    /// iterated to a fixed point. Unused channels come last.
    pub fn canonical_form(&self) -> Position {
        let mut current = self.clone();
        for _ in 0..=self.players.len() + 1 {
            let mut order: Vec<usize> = (0..current.players.len()).collect();
            order.sort_by(|&a, &b| {
                current.players[a].len().cmp(&current.players[b].len()).then(current.players[a].cmp(&current.players[b]))
            });
            let map = first_use_numbering(current.channels, order.iter().map(|&p| current.players[p].as_slice()));
            let next = current.relabel(&map, &order);
            if next == current {
                break;
            }
            current = next;
        }
        current
    }

    /// Graphviz rendering: channels as circles, players as points.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("graph position {\n");
        dot_position(&mut s, self, "", "--");
        s.push_str("}\n");
        s
    }
}

pub(crate) fn dot_position(s: &mut String, pos: &Position, prefix: &str, edge: &str) {
    for c in 0..pos.channels {
        s.push_str(&format!("  {prefix}c{c} [shape=circle, label=\"{c}\"];\n"));
    }
    for (p, assignment) in pos.players.iter().enumerate() {
        s.push_str(&format!("  {prefix}p{p} [shape=point, xlabel=\"{p}\"];\n"));
        for (k, c) in assignment.iter().enumerate() {
            s.push_str(&format!("  {prefix}p{p} {edge} {prefix}c{c} [label=\"{}\"];\n", k + 1));
        }
    }
}

/// Numbers channels by first occurrence along the given assignments, then
/// the unused ones in their original order.
pub(crate) fn first_use_numbering<'a>(channels: usize, order: impl Iterator<Item = &'a [usize]>) -> Vec<usize> {
    let mut map = vec![usize::MAX; channels];
    let mut next = 0;
    for assignment in order {
        for &c in assignment {
            if map[c] == usize::MAX {
                map[c] = next;
                next += 1;
            }
        }
    }
    for slot in map.iter_mut().filter(|s| **s == usize::MAX) {
        *slot = next;
        next += 1;
    }
    map
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}ch", self.channels)?;
        for p in &self.players {
            let cs: Vec<String> = p.iter().map(ToString::to_string).collect();
            write!(f, " [{}]", cs.join(","))?;
        }
        Ok(())
    }
}

/// Isomorphism classes of basic moves from an individual, 1-based channel
/// indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BasicMoveClass {
    ParaL,
    ParaR,
    Tick,
    Nu,
    In(usize),
    Out(usize),
}

impl BasicMoveClass {
    /// Number of classes at arity `n`.
    pub fn count(n: usize) -> usize {
        4 + 2 * n
    }

    /// Position in the canonical enumeration.
    pub fn index(self) -> usize {
        match self {
            BasicMoveClass::ParaL => 0,
            BasicMoveClass::ParaR => 1,
            BasicMoveClass::Tick => 2,
            BasicMoveClass::Nu => 3,
            BasicMoveClass::In(i) => 4 + 2 * (i - 1),
            BasicMoveClass::Out(i) => 5 + 2 * (i - 1),
        }
    }

    pub fn from_index(k: usize) -> BasicMoveClass {
        match k {
            0 => BasicMoveClass::ParaL,
            1 => BasicMoveClass::ParaR,
            2 => BasicMoveClass::Tick,
            3 => BasicMoveClass::Nu,
            k if k % 2 == 0 => BasicMoveClass::In((k - 4) / 2 + 1),
            k => BasicMoveClass::Out((k - 5) / 2 + 1),
        }
    }

    /// The canonical enumeration at arity `n`.
    pub fn all(n: usize) -> Vec<BasicMoveClass> {
        (0..Self::count(n)).map(Self::from_index).collect()
    }

    pub fn is_valid_at(self, n: usize) -> bool {
        match self {
            BasicMoveClass::In(i) | BasicMoveClass::Out(i) => (1..=n).contains(&i),
            _ => true,
        }
    }

    /// Arity after the move, from arity `n`.
    pub fn next_arity(self, n: usize) -> usize {
        if self == BasicMoveClass::Nu {
            n + 1
        } else {
            n
        }
    }

    pub fn kind(self, n: usize) -> MoveKind {
        match self {
            BasicMoveClass::ParaL => MoveKind::ParaL { arity: n },
            BasicMoveClass::ParaR => MoveKind::ParaR { arity: n },
            BasicMoveClass::Tick => MoveKind::Tick { arity: n },
            BasicMoveClass::Nu => MoveKind::Nu { arity: n },
            BasicMoveClass::In(i) => MoveKind::In { arity: n, channel: i },
            BasicMoveClass::Out(i) => MoveKind::Out { arity: n, channel: i },
        }
    }

    pub fn of_kind(kind: MoveKind) -> Option<BasicMoveClass> {
        Some(match kind {
            MoveKind::ParaL { .. } => BasicMoveClass::ParaL,
            MoveKind::ParaR { .. } => BasicMoveClass::ParaR,
            MoveKind::Tick { .. } => BasicMoveClass::Tick,
            MoveKind::Nu { .. } => BasicMoveClass::Nu,
            MoveKind::In { channel, .. } => BasicMoveClass::In(channel),
            MoveKind::Out { channel, .. } => BasicMoveClass::Out(channel),
            MoveKind::Para { .. } | MoveKind::Tau { .. } => return None,
        })
    }

    pub fn key(self) -> String {
        match self {
            BasicMoveClass::ParaL => "paraL".into(),
            BasicMoveClass::ParaR => "paraR".into(),
            BasicMoveClass::Tick => "tick".into(),
            BasicMoveClass::Nu => "nu".into(),
            BasicMoveClass::In(i) => format!("in{i}"),
            BasicMoveClass::Out(i) => format!("out{i}"),
        }
    }
}

impl fmt::Display for BasicMoveClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.key())
    }
}

/// A view: the basic moves seen by one player, starting at arity `arity`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ViewPath {
    pub arity: usize,
    pub moves: Vec<BasicMoveClass>,
}

impl ViewPath {
    pub fn empty(arity: usize) -> ViewPath {
        ViewPath { arity, moves: Vec::new() }
    }

    pub fn new(arity: usize, moves: Vec<BasicMoveClass>) -> ViewPath {
        ViewPath { arity, moves }
    }

    /// Whether channel indices stay within the arity as it evolves.
    pub fn is_valid(&self) -> bool {
        let mut n = self.arity;
        for b in &self.moves {
            if !b.is_valid_at(n) {
                return false;
            }
            n = b.next_arity(n);
        }
        true
    }

    pub fn final_arity(&self) -> usize {
        self.moves.iter().fold(self.arity, |n, b| b.next_arity(n))
    }

    pub fn prefix(&self, len: usize) -> ViewPath {
        ViewPath { arity: self.arity, moves: self.moves[..len].to_vec() }
    }

    pub fn is_prefix_of(&self, other: &ViewPath) -> bool {
        self.arity == other.arity && other.moves.starts_with(&self.moves)
    }

    /// The view as a play on the individual `[arity]`.
    pub fn to_play(&self) -> Result<Play, GameError> {
        let mut play = Play::identity(Position::individual(self.arity));
        for b in &self.moves {
            let n = play.final_position().players[0].len();
            if !b.is_valid_at(n) {
                let (BasicMoveClass::In(i) | BasicMoveClass::Out(i)) = b else { unreachable!() };
                return Err(GameError::IndexOutOfRange { index: *i, arity: n });
            }
            let m = instantiate(b.kind(n), play.final_position(), Anchor::Player(0))?;
            play.push(m)?;
        }
        Ok(play)
    }
}

impl fmt::Display for ViewPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ms: Vec<String> = self.moves.iter().map(|b| b.key()).collect();
        write!(f, "[{}] {}", self.arity, ms.join("."))
    }
}

/// Channel counts per object for a position's presheaf, as a quick summary.
pub fn carrier_summary(p: &FinPresheaf) -> BTreeMap<String, usize> {
    p.carriers().iter().map(|(o, n)| (o.key(), *n)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presheaf::check_presheaf;

    #[test]
    fn class_enumeration() {
        let all = BasicMoveClass::all(2);
        assert_eq!(
            all,
            vec![
                BasicMoveClass::ParaL,
                BasicMoveClass::ParaR,
                BasicMoveClass::Tick,
                BasicMoveClass::Nu,
                BasicMoveClass::In(1),
                BasicMoveClass::Out(1),
                BasicMoveClass::In(2),
                BasicMoveClass::Out(2),
            ]
        );
        for (k, b) in all.iter().enumerate() {
            assert_eq!(b.index(), k);
        }
    }

    #[test]
    fn shared_pair_layout() {
        let p = Position::shared_pair(3, 3, 2, 1);
        assert_eq!(p.channels, 4);
        assert_eq!(p.players, vec![vec![0, 1, 2], vec![2, 3]]);
        assert!(check_presheaf(&p.to_presheaf()));
    }

    #[test]
    fn canonical_form_identifies_renamings() {
        let a = Position::new(3, vec![vec![2, 0], vec![1]]).unwrap();
        let b = Position::new(3, vec![vec![0], vec![1, 2]]).unwrap();
        assert_eq!(a.canonical_form(), b.canonical_form());
    }

    #[test]
    fn glue_over_interface() {
        let (z, map) = Position::individual(2).glue(&Position::individual(2), &[(0, 0), (1, 1)]);
        assert_eq!(z.channels, 2);
        assert_eq!(z.players, vec![vec![0, 1], vec![0, 1]]);
        assert_eq!(map, vec![0, 1]);
    }

    #[test]
    fn view_arity_chain() {
        let v = ViewPath::new(0, vec![BasicMoveClass::Nu, BasicMoveClass::In(1)]);
        assert!(v.is_valid());
        assert_eq!(v.final_arity(), 1);
        assert!(!ViewPath::new(0, vec![BasicMoveClass::In(1)]).is_valid());
        assert_eq!(v.to_play().unwrap().len(), 2);
        assert!(ViewPath::new(0, vec![BasicMoveClass::In(1)]).to_play().is_err());
    }
}
