//! The base category as a finite presentation: objects, generating arrows,
//! the four equation schemes, and normal forms of composites.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::PresheafError;

/// The kinds of local moves. Arities count channels of the moving player(s);
/// channel indices are 1-based positions in a player's channel list.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MoveKind {
    /// Input on the player's `channel`-th channel.
    In { arity: usize, channel: usize },
    /// Output on the player's `channel`-th channel.
    Out { arity: usize, channel: usize },
    /// Channel creation: `[arity]` becomes `[arity + 1]`.
    Nu { arity: usize },
    /// Left half of a fork.
    ParaL { arity: usize },
    /// Right half of a fork.
    ParaR { arity: usize },
    /// Fork: one player becomes two players sharing its channels.
    Para { arity: usize },
    Tick { arity: usize },
    /// Synchronisation between an output player and an input player sharing
    /// a channel.
    Tau {
        out_arity: usize,
        out_channel: usize,
        in_arity: usize,
        in_channel: usize,
    },
}

impl MoveKind {
    /// Index bounds: channels lie in `1..=arity`.
    pub fn is_valid(self) -> bool {
        match self {
            MoveKind::In { arity, channel } | MoveKind::Out { arity, channel } => {
                (1..=arity).contains(&channel)
            }
            MoveKind::Tau { out_arity, out_channel, in_arity, in_channel } => {
                (1..=out_arity).contains(&out_channel) && (1..=in_arity).contains(&in_channel)
            }
            _ => true,
        }
    }

    /// Largest player arity appearing in the move's initial or final position.
    pub fn max_arity(self) -> usize {
        match self {
            MoveKind::Nu { arity } => arity + 1,
            MoveKind::Tau { out_arity, in_arity, .. } => out_arity.max(in_arity),
            MoveKind::In { arity, .. }
            | MoveKind::Out { arity, .. }
            | MoveKind::ParaL { arity }
            | MoveKind::ParaR { arity }
            | MoveKind::Para { arity }
            | MoveKind::Tick { arity } => arity,
        }
    }

    /// Arity of the (first) anchored player in the initial position.
    pub fn initial_arity(self) -> usize {
        match self {
            MoveKind::Tau { out_arity, .. } => out_arity,
            MoveKind::In { arity, .. }
            | MoveKind::Out { arity, .. }
            | MoveKind::Nu { arity }
            | MoveKind::ParaL { arity }
            | MoveKind::ParaR { arity }
            | MoveKind::Para { arity }
            | MoveKind::Tick { arity } => arity,
        }
    }

    /// Full moves are all moves except the two halves of a fork.
    pub fn is_full(self) -> bool {
        !matches!(self, MoveKind::ParaL { .. } | MoveKind::ParaR { .. })
    }

    pub fn is_closed_world(self) -> bool {
        matches!(
            self,
            MoveKind::Nu { .. } | MoveKind::Tick { .. } | MoveKind::Para { .. } | MoveKind::Tau { .. }
        )
    }

    /// Basic moves have a single player in both their initial and final position.
    pub fn is_basic(self) -> bool {
        !matches!(self, MoveKind::Para { .. } | MoveKind::Tau { .. })
    }

    /// Whether the kind has exactly one player on each side of its cospan,
    /// related by a pair of legs `[n] -> kind <- [n']`.
    fn is_single(self) -> bool {
        self.is_basic()
    }

    /// The kind of the objects the fork and synchronisation kinds are glued from.
    pub fn components(self) -> Option<(MoveKind, MoveKind)> {
        match self {
            MoveKind::Para { arity } => Some((MoveKind::ParaL { arity }, MoveKind::ParaR { arity })),
            MoveKind::Tau { out_arity, out_channel, in_arity, in_channel } => Some((
                MoveKind::Out { arity: out_arity, channel: out_channel },
                MoveKind::In { arity: in_arity, channel: in_channel },
            )),
            _ => None,
        }
    }

    pub fn key(self) -> String {
        match self {
            MoveKind::In { arity, channel } => format!("in:{arity}:{channel}"),
            MoveKind::Out { arity, channel } => format!("out:{arity}:{channel}"),
            MoveKind::Nu { arity } => format!("nu:{arity}"),
            MoveKind::ParaL { arity } => format!("paral:{arity}"),
            MoveKind::ParaR { arity } => format!("parar:{arity}"),
            MoveKind::Para { arity } => format!("para:{arity}"),
            MoveKind::Tick { arity } => format!("tick:{arity}"),
            MoveKind::Tau { out_arity, out_channel, in_arity, in_channel } => {
                format!("tau:{out_arity}:{out_channel}:{in_arity}:{in_channel}")
            }
        }
    }
}

impl fmt::Display for MoveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.key())
    }
}

fn parse_numbers(parts: &[&str]) -> Option<Vec<usize>> {
    parts.iter().map(|p| p.parse().ok()).collect()
}

impl FromStr for MoveKind {
    type Err = PresheafError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || PresheafError::BadKey(s.to_string());
        let nums = parse_numbers(&parts[1..]).ok_or_else(bad)?;
        let kind = match (parts[0], nums.as_slice()) {
            ("in", [a, c]) => MoveKind::In { arity: *a, channel: *c },
            ("out", [a, c]) => MoveKind::Out { arity: *a, channel: *c },
            ("nu", [a]) => MoveKind::Nu { arity: *a },
            ("paral", [a]) => MoveKind::ParaL { arity: *a },
            ("parar", [a]) => MoveKind::ParaR { arity: *a },
            ("para", [a]) => MoveKind::Para { arity: *a },
            ("tick", [a]) => MoveKind::Tick { arity: *a },
            ("tau", [m, j, n, i]) => MoveKind::Tau {
                out_arity: *m,
                out_channel: *j,
                in_arity: *n,
                in_channel: *i,
            },
            _ => return Err(bad()),
        };
        if kind.is_valid() {
            Ok(kind)
        } else {
            Err(bad())
        }
    }
}

/// Objects of the base category.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BaseObject {
    /// Channels live over this object.
    Star,
    /// Players of the given arity live over this object.
    Player(usize),
    Move(MoveKind),
}

impl BaseObject {
    /// Length of the longest generator path ending here.
    pub fn level(self) -> usize {
        match self {
            BaseObject::Star => 0,
            BaseObject::Player(_) => 1,
            BaseObject::Move(k) if k.is_basic() => 2,
            BaseObject::Move(_) => 3,
        }
    }

    pub fn max_arity(self) -> usize {
        match self {
            BaseObject::Star => 0,
            BaseObject::Player(n) => n,
            BaseObject::Move(k) => k.max_arity(),
        }
    }

    pub fn key(self) -> String {
        match self {
            BaseObject::Star => "star".to_string(),
            BaseObject::Player(n) => format!("player:{n}"),
            BaseObject::Move(k) => k.key(),
        }
    }
}

impl fmt::Display for BaseObject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.key())
    }
}

impl FromStr for BaseObject {
    type Err = PresheafError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "star" {
            return Ok(BaseObject::Star);
        }
        if let Some(n) = s.strip_prefix("player:") {
            return n
                .parse()
                .map(BaseObject::Player)
                .map_err(|_| PresheafError::BadKey(s.to_string()));
        }
        s.parse().map(BaseObject::Move)
    }
}

/// Generating arrows of the base category.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Generator {
    /// The `index`-th channel of a player: `star -> [arity]`.
    Channel { arity: usize, index: usize },
    /// Leg from the final player of a basic kind: `[n'] -> kind`.
    FinalLeg(MoveKind),
    /// Leg from the initial player of a basic kind: `[n] -> kind`.
    InitialLeg(MoveKind),
    /// `ParaL(n) -> Para(n)`.
    ForkLeft(usize),
    /// `ParaR(n) -> Para(n)`.
    ForkRight(usize),
    /// `Out -> Tau`, carrying the synchronisation kind.
    SyncOut(MoveKind),
    /// `In -> Tau`, carrying the synchronisation kind.
    SyncIn(MoveKind),
}

impl Generator {
    pub fn source(self) -> BaseObject {
        match self {
            Generator::Channel { .. } => BaseObject::Star,
            Generator::FinalLeg(MoveKind::Nu { arity }) => BaseObject::Player(arity + 1),
            Generator::FinalLeg(k) | Generator::InitialLeg(k) => BaseObject::Player(k.initial_arity()),
            Generator::ForkLeft(arity) => BaseObject::Move(MoveKind::ParaL { arity }),
            Generator::ForkRight(arity) => BaseObject::Move(MoveKind::ParaR { arity }),
            Generator::SyncOut(tau) | Generator::SyncIn(tau) => {
                let (out, inp) = tau.components().expect("synchronisation generator");
                BaseObject::Move(if matches!(self, Generator::SyncOut(_)) { out } else { inp })
            }
        }
    }

    pub fn target(self) -> BaseObject {
        match self {
            Generator::Channel { arity, .. } => BaseObject::Player(arity),
            Generator::FinalLeg(k) | Generator::InitialLeg(k) => BaseObject::Move(k),
            Generator::ForkLeft(arity) | Generator::ForkRight(arity) => {
                BaseObject::Move(MoveKind::Para { arity })
            }
            Generator::SyncOut(tau) | Generator::SyncIn(tau) => BaseObject::Move(tau),
        }
    }

    pub fn key(self) -> String {
        match self {
            Generator::Channel { arity, index } => format!("s:{arity}:{index}"),
            Generator::FinalLeg(k) => format!("fin:{}", k.key()),
            Generator::InitialLeg(k) => format!("ini:{}", k.key()),
            Generator::ForkLeft(n) => format!("l:{n}"),
            Generator::ForkRight(n) => format!("r:{n}"),
            Generator::SyncOut(k) => format!("eps:{}", k.key()),
            Generator::SyncIn(k) => format!("rho:{}", k.key()),
        }
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.key())
    }
}

impl FromStr for Generator {
    type Err = PresheafError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || PresheafError::BadKey(s.to_string());
        let (head, rest) = s.split_once(':').ok_or_else(bad)?;
        let g = match head {
            "s" => {
                let nums = parse_numbers(&rest.split(':').collect::<Vec<_>>()).ok_or_else(bad)?;
                match nums.as_slice() {
                    [arity, index] if (1..=*arity).contains(index) => {
                        Generator::Channel { arity: *arity, index: *index }
                    }
                    _ => return Err(bad()),
                }
            }
            "fin" | "ini" => {
                let k: MoveKind = rest.parse()?;
                if !k.is_single() {
                    return Err(bad());
                }
                if head == "fin" {
                    Generator::FinalLeg(k)
                } else {
                    Generator::InitialLeg(k)
                }
            }
            "l" => Generator::ForkLeft(rest.parse().map_err(|_| bad())?),
            "r" => Generator::ForkRight(rest.parse().map_err(|_| bad())?),
            "eps" | "rho" => {
                let k: MoveKind = rest.parse()?;
                if !matches!(k, MoveKind::Tau { .. }) {
                    return Err(bad());
                }
                if head == "eps" {
                    Generator::SyncOut(k)
                } else {
                    Generator::SyncIn(k)
                }
            }
            _ => return Err(bad()),
        };
        Ok(g)
    }
}

/// The generators whose target is `object`, in a fixed order.
pub fn generators_into(object: BaseObject) -> Vec<Generator> {
    match object {
        BaseObject::Star => Vec::new(),
        BaseObject::Player(arity) => (1..=arity)
            .map(|index| Generator::Channel { arity, index })
            .collect(),
        BaseObject::Move(k) => match k {
            MoveKind::Para { arity } => vec![Generator::ForkLeft(arity), Generator::ForkRight(arity)],
            MoveKind::Tau { .. } => vec![Generator::SyncOut(k), Generator::SyncIn(k)],
            _ => vec![Generator::FinalLeg(k), Generator::InitialLeg(k)],
        },
    }
}

/// A morphism of the base category, stored as a generator path in
/// traversal order (source first). The empty path is the identity.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BaseMorphism {
    pub source: BaseObject,
    pub target: BaseObject,
    pub path: Vec<Generator>,
}

impl BaseMorphism {
    pub fn identity(object: BaseObject) -> BaseMorphism {
        BaseMorphism { source: object, target: object, path: Vec::new() }
    }

    pub fn generator(g: Generator) -> BaseMorphism {
        BaseMorphism { source: g.source(), target: g.target(), path: vec![g] }
    }

    /// Builds a morphism from a path, checking composability, and normalises it.
    pub fn from_path(path: Vec<Generator>) -> Result<BaseMorphism, PresheafError> {
        let (first, last) = match (path.first(), path.last()) {
            (Some(f), Some(l)) => (*f, *l),
            _ => return Err(PresheafError::EmptyPath),
        };
        for w in path.windows(2) {
            if w[0].target() != w[1].source() {
                return Err(PresheafError::NotComposable(w[0].key(), w[1].key()));
            }
        }
        Ok(BaseMorphism {
            source: first.source(),
            target: last.target(),
            path: normalize_path(path),
        })
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &BaseMorphism) -> Result<BaseMorphism, PresheafError> {
        if self.target != next.source {
            return Err(PresheafError::NotComposable(self.target.key(), next.source.key()));
        }
        let mut path = self.path.clone();
        path.extend_from_slice(&next.path);
        Ok(BaseMorphism { source: self.source, target: next.target, path: normalize_path(path) })
    }

    pub fn normalized(&self) -> BaseMorphism {
        BaseMorphism {
            source: self.source,
            target: self.target,
            path: normalize_path(self.path.clone()),
        }
    }
}

impl fmt::Display for BaseMorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            return write!(f, "id[{}]", self.source);
        }
        let keys: Vec<String> = self.path.iter().map(|g| g.key()).collect();
        f.write_str(&keys.join(";"))
    }
}

/// Rewrites a path to its normal form by exhaustively orienting the four
/// equation schemes:
///
/// 1. `s_i ; fin(c)  ->  s_i ; ini(c)` for basic non-creating kinds `c`;
/// 2. `s_i ; fin(nu_n)  ->  s_i ; ini(nu_n)` for `i <= n`;
/// 3. `ini(parar_n) ; r  ->  ini(paral_n) ; l`;
/// 4. `s_i ; ini(in) ; rho  ->  s_j ; ini(out) ; eps` at the shared channel.
pub fn normalize_path(mut path: Vec<Generator>) -> Vec<Generator> {
    loop {
        let mut changed = false;
        for k in 0..path.len() {
            if let (Generator::Channel { arity, index }, Some(Generator::FinalLeg(c))) =
                (path[k], path.get(k + 1).copied())
            {
                match c {
                    MoveKind::Nu { arity: n } if index <= n => {
                        debug_assert_eq!(arity, n + 1);
                        path[k] = Generator::Channel { arity: n, index };
                        path[k + 1] = Generator::InitialLeg(c);
                        changed = true;
                    }
                    MoveKind::Nu { .. } => {}
                    _ => {
                        path[k + 1] = Generator::InitialLeg(c);
                        changed = true;
                    }
                }
            }
            if let (Generator::InitialLeg(MoveKind::ParaR { arity }), Some(Generator::ForkRight(_))) =
                (path[k], path.get(k + 1).copied())
            {
                path[k] = Generator::InitialLeg(MoveKind::ParaL { arity });
                path[k + 1] = Generator::ForkLeft(arity);
                changed = true;
            }
            if let (
                Generator::Channel { index, .. },
                Some(Generator::InitialLeg(MoveKind::In { .. })),
                Some(Generator::SyncIn(tau)),
            ) = (path[k], path.get(k + 1).copied(), path.get(k + 2).copied())
            {
                if let MoveKind::Tau { out_arity, out_channel, in_channel, .. } = tau {
                    if index == in_channel {
                        path[k] = Generator::Channel { arity: out_arity, index: out_channel };
                        path[k + 1] = Generator::InitialLeg(MoveKind::Out {
                            arity: out_arity,
                            channel: out_channel,
                        });
                        path[k + 2] = Generator::SyncOut(tau);
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            return path;
        }
    }
}

/// All morphisms into `target`, grouped by source and sorted, one per
/// equivalence class.
pub fn hom_into(target: BaseObject) -> BTreeMap<BaseObject, Vec<BaseMorphism>> {
    let mut out: BTreeMap<BaseObject, Vec<BaseMorphism>> = BTreeMap::new();
    let mut stack: Vec<(BaseObject, Vec<Generator>)> = vec![(target, Vec::new())];
    while let Some((obj, suffix)) = stack.pop() {
        out.entry(obj).or_default().push(BaseMorphism {
            source: obj,
            target,
            path: normalize_path(suffix.clone()),
        });
        for g in generators_into(obj) {
            let mut path = Vec::with_capacity(suffix.len() + 1);
            path.push(g);
            path.extend_from_slice(&suffix);
            stack.push((g.source(), path));
        }
    }
    for homs in out.values_mut() {
        homs.sort();
        homs.dedup();
    }
    out
}

/// One instance of an equation scheme: two parallel paths required equal.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Equation {
    pub left: Vec<Generator>,
    pub right: Vec<Generator>,
}

/// The generating equation instances whose common target is `object`.
pub fn equations_into(object: BaseObject) -> Vec<Equation> {
    let BaseObject::Move(kind) = object else {
        return Vec::new();
    };
    match kind {
        MoveKind::Nu { arity } => (1..=arity)
            .map(|i| Equation {
                left: vec![Generator::Channel { arity: arity + 1, index: i }, Generator::FinalLeg(kind)],
                right: vec![Generator::Channel { arity, index: i }, Generator::InitialLeg(kind)],
            })
            .collect(),
        MoveKind::Para { arity } => vec![Equation {
            left: vec![Generator::InitialLeg(MoveKind::ParaL { arity }), Generator::ForkLeft(arity)],
            right: vec![Generator::InitialLeg(MoveKind::ParaR { arity }), Generator::ForkRight(arity)],
        }],
        MoveKind::Tau { out_arity, out_channel, in_arity, in_channel } => vec![Equation {
            left: vec![
                Generator::Channel { arity: out_arity, index: out_channel },
                Generator::InitialLeg(MoveKind::Out { arity: out_arity, channel: out_channel }),
                Generator::SyncOut(kind),
            ],
            right: vec![
                Generator::Channel { arity: in_arity, index: in_channel },
                Generator::InitialLeg(MoveKind::In { arity: in_arity, channel: in_channel }),
                Generator::SyncIn(kind),
            ],
        }],
        _ => {
            let arity = kind.initial_arity();
            (1..=arity)
                .map(|i| Equation {
                    left: vec![Generator::Channel { arity, index: i }, Generator::FinalLeg(kind)],
                    right: vec![Generator::Channel { arity, index: i }, Generator::InitialLeg(kind)],
                })
                .collect()
        }
    }
}

/// Every move kind whose objects fit within `max_arity`.
pub fn move_kinds(max_arity: usize) -> Vec<MoveKind> {
    let mut kinds = Vec::new();
    for arity in 0..=max_arity {
        kinds.push(MoveKind::ParaL { arity });
        kinds.push(MoveKind::ParaR { arity });
        kinds.push(MoveKind::Para { arity });
        kinds.push(MoveKind::Tick { arity });
        if arity < max_arity {
            kinds.push(MoveKind::Nu { arity });
        }
        for channel in 1..=arity {
            kinds.push(MoveKind::In { arity, channel });
            kinds.push(MoveKind::Out { arity, channel });
        }
    }
    for out_arity in 1..=max_arity {
        for out_channel in 1..=out_arity {
            for in_arity in 1..=max_arity {
                for in_channel in 1..=in_arity {
                    kinds.push(MoveKind::Tau { out_arity, out_channel, in_arity, in_channel });
                }
            }
        }
    }
    kinds
}

/// The base category truncated to a maximum arity, with its hom-sets
/// tabulated.
#[derive(Clone, Debug)]
pub struct Presentation {
    pub max_arity: usize,
    pub objects: Vec<BaseObject>,
    pub generators: Vec<Generator>,
    pub equations: Vec<Equation>,
    homs: BTreeMap<(BaseObject, BaseObject), Vec<BaseMorphism>>,
}

impl Presentation {
    pub fn contains(&self, object: BaseObject) -> bool {
        object.max_arity() <= self.max_arity
    }

    pub fn check_object(&self, object: BaseObject) -> Result<(), PresheafError> {
        if self.contains(object) {
            Ok(())
        } else {
            Err(PresheafError::ArityExceeded { object: object.key(), max_arity: self.max_arity })
        }
    }

    /// The hom-set `C(source, target)`, one normal form per morphism.
    pub fn hom(&self, source: BaseObject, target: BaseObject) -> &[BaseMorphism] {
        self.homs.get(&(source, target)).map_or(&[], Vec::as_slice)
    }
}

/// Objects, generators, equation instances and hom tables for arities up to
/// `max_arity`.
pub fn base_presentation(max_arity: usize) -> Presentation {
    let mut objects = vec![BaseObject::Star];
    objects.extend((0..=max_arity).map(BaseObject::Player));
    objects.extend(move_kinds(max_arity).into_iter().map(BaseObject::Move));
    let generators: Vec<Generator> = objects.iter().flat_map(|o| generators_into(*o)).collect();
    let equations: Vec<Equation> = objects.iter().flat_map(|o| equations_into(*o)).collect();
    let mut homs = BTreeMap::new();
    for &target in &objects {
        for (source, ms) in hom_into(target) {
            homs.insert((source, target), ms);
        }
    }
    Presentation { max_arity, objects, generators, equations, homs }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arity_one_generators() {
        let p = base_presentation(1);
        let has = |g: Generator| p.generators.contains(&g);
        assert!(has(Generator::Channel { arity: 1, index: 1 }));
        let tick = MoveKind::Tick { arity: 1 };
        assert!(has(Generator::FinalLeg(tick)) && has(Generator::InitialLeg(tick)));
        assert!(has(Generator::ForkLeft(1)) && has(Generator::ForkRight(1)));
        let tau = MoveKind::Tau { out_arity: 1, out_channel: 1, in_arity: 1, in_channel: 1 };
        assert!(has(Generator::SyncOut(tau)) && has(Generator::SyncIn(tau)));
        assert!(p.generators.iter().all(|g| g.source().max_arity() <= 1 && g.target().max_arity() <= 1));
    }

    #[test]
    fn arity_zero_has_no_channel_edges() {
        let p = base_presentation(0);
        let tick = MoveKind::Tick { arity: 0 };
        assert!(p.generators.contains(&Generator::FinalLeg(tick)));
        assert!(p.generators.contains(&Generator::InitialLeg(tick)));
        assert!(!p.generators.iter().any(|g| matches!(g, Generator::Channel { .. })));
    }

    #[test]
    fn tick_equation_instance() {
        let tick = MoveKind::Tick { arity: 2 };
        let eqs = equations_into(BaseObject::Move(tick));
        assert_eq!(eqs.len(), 2);
        assert_eq!(
            eqs[0],
            Equation {
                left: vec![Generator::Channel { arity: 2, index: 1 }, Generator::FinalLeg(tick)],
                right: vec![Generator::Channel { arity: 2, index: 1 }, Generator::InitialLeg(tick)],
            }
        );
        assert_eq!(normalize_path(eqs[0].left.clone()), normalize_path(eqs[0].right.clone()));
    }

    #[test]
    fn every_equation_is_identified_by_normal_forms() {
        let p = base_presentation(3);
        for eq in &p.equations {
            assert_eq!(normalize_path(eq.left.clone()), normalize_path(eq.right.clone()), "{eq:?}");
        }
    }

    #[test]
    fn hom_set_sizes() {
        let p = base_presentation(3);
        let para2 = BaseObject::Move(MoveKind::Para { arity: 2 });
        assert_eq!(p.hom(BaseObject::Star, para2).len(), 2);
        assert_eq!(p.hom(BaseObject::Player(2), para2).len(), 3);
        let tau = BaseObject::Move(MoveKind::Tau { out_arity: 3, out_channel: 3, in_arity: 2, in_channel: 1 });
        assert_eq!(p.hom(BaseObject::Star, tau).len(), 4);
        assert_eq!(p.hom(BaseObject::Player(3), tau).len(), 2);
        assert_eq!(p.hom(BaseObject::Player(2), tau).len(), 2);
        let nu = BaseObject::Move(MoveKind::Nu { arity: 2 });
        assert_eq!(p.hom(BaseObject::Star, nu).len(), 3);
    }

    #[test]
    fn keys_round_trip() {
        let p = base_presentation(2);
        for o in &p.objects {
            assert_eq!(o.key().parse::<BaseObject>().unwrap(), *o);
        }
        for g in &p.generators {
            assert_eq!(g.key().parse::<Generator>().unwrap(), *g);
        }
        assert_eq!(Generator::Channel { arity: 3, index: 1 }.key(), "s:3:1");
        assert_eq!(BaseObject::Player(3).key(), "player:3");
        assert_eq!(BaseObject::Move(MoveKind::Para { arity: 2 }).key(), "para:2");
    }

    #[test]
    fn composition_rejects_mismatched_paths() {
        let f = BaseMorphism::generator(Generator::Channel { arity: 2, index: 1 });
        let g = BaseMorphism::generator(Generator::InitialLeg(MoveKind::Tick { arity: 3 }));
        assert!(f.then(&g).is_err());
    }
}
