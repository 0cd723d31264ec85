//! CCS syntax over ordinal contexts, the alphabet of CCS labels, and the
//! standard transition relation.
//!
//! Channels are numbered `1..=gamma`. A restriction `new a. P` at context
//! `gamma` binds channel `gamma + 1` inside `P`, so outer channels keep their
//! numbers under binders. Recursion is finite: `rec X. P` with guarded
//! occurrences of `X`.

mod parse;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use parse::{parse_ccs, ParseError};

/// Channel number, 1-based.
pub type Channel = usize;

/// Number of free channels; the free channels are `1..=gamma`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Context(pub usize);

impl Context {
    pub fn contains(self, channel: Channel) -> bool {
        (1..=self.0).contains(&channel)
    }

    /// The context under one more binder.
    pub fn extended(self) -> Context {
        Context(self.0 + 1)
    }
}

impl fmt::Display for Context {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Prefix {
    In(Channel),
    Out(Channel),
    Tick,
}

impl Prefix {
    pub fn channel(self) -> Option<Channel> {
        match self {
            Prefix::In(c) | Prefix::Out(c) => Some(c),
            Prefix::Tick => None,
        }
    }

    fn action(self) -> Action {
        match self {
            Prefix::In(c) => Action::In(c),
            Prefix::Out(c) => Action::Out(c),
            Prefix::Tick => Action::Tick,
        }
    }
}

impl fmt::Display for Prefix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Prefix::In(c) => write!(f, "a{c}"),
            Prefix::Out(c) => write!(f, "'a{c}"),
            Prefix::Tick => f.write_str("tick"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Process {
    Par(Box<Process>, Box<Process>),
    Nu(Box<Process>),
    /// Guarded sum; the empty sum is the inert process `0`.
    Sum(Vec<(Prefix, Process)>),
    RecVar(String),
    RecDef(String, Box<Process>),
}

impl Process {
    pub fn nil() -> Process {
        Process::Sum(Vec::new())
    }

    pub fn prefixed(prefix: Prefix, cont: Process) -> Process {
        Process::Sum(vec![(prefix, cont)])
    }

    pub fn par(left: Process, right: Process) -> Process {
        Process::Par(Box::new(left), Box::new(right))
    }

    pub fn nu(body: Process) -> Process {
        Process::Nu(Box::new(body))
    }

    pub fn rec(name: impl Into<String>, body: Process) -> Process {
        Process::RecDef(name.into(), Box::new(body))
    }

    pub fn is_nil(&self) -> bool {
        matches!(self, Process::Sum(b) if b.is_empty())
    }

    /// Number of syntax nodes, counting each prefix once and `0` once.
    pub fn size(&self) -> usize {
        match self {
            Process::Par(l, r) => 1 + l.size() + r.size(),
            Process::Nu(b) => 1 + b.size(),
            Process::Sum(branches) if branches.is_empty() => 1,
            Process::Sum(branches) => branches.iter().map(|(_, p)| 1 + p.size()).sum(),
            Process::RecVar(_) => 1,
            Process::RecDef(_, b) => 1 + b.size(),
        }
    }

    /// Replaces free occurrences of `name` by `replacement`.
    ///
    /// `replacement` is expected to be closed with respect to recursion
    /// variables, so no capture can occur.
    pub fn substitute(&self, name: &str, replacement: &Process) -> Process {
        match self {
            Process::Par(l, r) => Process::par(
                l.substitute(name, replacement),
                r.substitute(name, replacement),
            ),
            Process::Nu(b) => Process::nu(b.substitute(name, replacement)),
            Process::Sum(branches) => Process::Sum(
                branches
                    .iter()
                    .map(|(a, p)| (*a, p.substitute(name, replacement)))
                    .collect(),
            ),
            Process::RecVar(x) if x == name => replacement.clone(),
            Process::RecVar(_) => self.clone(),
            Process::RecDef(x, _) if x == name => self.clone(),
            Process::RecDef(x, b) => Process::rec(x.clone(), b.substitute(name, replacement)),
        }
    }

    /// One-step unfolding of a top-level `rec`; other processes are returned as is.
    pub fn unfold(&self) -> Process {
        match self {
            Process::RecDef(x, b) => b.substitute(x, self).unfold(),
            _ => self.clone(),
        }
    }
}

/// Kind of a label of the CCS alphabet graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Action {
    /// The identity edge; silent.
    Id,
    /// The success label.
    Tick,
    In(Channel),
    Out(Channel),
}

impl Action {
    pub fn channel(self) -> Option<Channel> {
        match self {
            Action::In(c) | Action::Out(c) => Some(c),
            _ => None,
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Id => f.write_str("id"),
            Action::Tick => f.write_str("tick"),
            Action::In(c) => write!(f, "a{c}"),
            Action::Out(c) => write!(f, "'a{c}"),
        }
    }
}

/// An edge of the CCS alphabet graph. All edges are endo-edges on `endpoint`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LabelA {
    pub endpoint: Context,
    pub kind: Action,
}

impl LabelA {
    pub fn new(endpoint: Context, kind: Action) -> LabelA {
        debug_assert!(kind.channel().is_none_or(|c| endpoint.contains(c)));
        LabelA { endpoint, kind }
    }

    pub fn identity(endpoint: Context) -> LabelA {
        LabelA { endpoint, kind: Action::Id }
    }

    pub fn is_silent(&self) -> bool {
        self.kind == Action::Id
    }

    pub fn is_tick(&self) -> bool {
        self.kind == Action::Tick
    }
}

impl fmt::Display for LabelA {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.kind.fmt(f)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum WellFormedError {
    #[error("channel {channel} is not bound in context {context}")]
    UnboundChannel { channel: Channel, context: Context },
    #[error("recursion variable {0} is not bound")]
    UnboundVariable(String),
    #[error("recursion variable {0} is not guarded by a prefix")]
    UnguardedVariable(String),
    #[error("recursion variable {0} occurs under a restriction inside its definition")]
    VariableUnderRestriction(String),
}

struct Binder<'a> {
    name: &'a str,
    context: Context,
    guarded: bool,
}

/// Checks the typing rules for `p` under `ctx`, reporting the first violation.
pub fn check_wellformed(ctx: Context, p: &Process) -> Result<(), WellFormedError> {
    fn go<'a>(
        ctx: Context,
        p: &'a Process,
        binders: &mut Vec<Binder<'a>>,
    ) -> Result<(), WellFormedError> {
        match p {
            Process::Par(l, r) => {
                go(ctx, l, binders)?;
                go(ctx, r, binders)
            }
            Process::Nu(b) => go(ctx.extended(), b, binders),
            Process::Sum(branches) => {
                for (prefix, cont) in branches {
                    if let Some(c) = prefix.channel() {
                        if !ctx.contains(c) {
                            return Err(WellFormedError::UnboundChannel { channel: c, context: ctx });
                        }
                    }
                    let saved: Vec<bool> = binders.iter().map(|b| b.guarded).collect();
                    binders.iter_mut().for_each(|b| b.guarded = true);
                    let res = go(ctx, cont, binders);
                    for (b, g) in binders.iter_mut().zip(saved) {
                        b.guarded = g;
                    }
                    res?;
                }
                Ok(())
            }
            Process::RecVar(x) => match binders.iter().rev().find(|b| b.name == x) {
                None => Err(WellFormedError::UnboundVariable(x.clone())),
                Some(b) if !b.guarded => Err(WellFormedError::UnguardedVariable(x.clone())),
                Some(b) if b.context != ctx => {
                    Err(WellFormedError::VariableUnderRestriction(x.clone()))
                }
                Some(_) => Ok(()),
            },
            Process::RecDef(x, b) => {
                binders.push(Binder { name: x, context: ctx, guarded: false });
                let res = go(ctx, b, binders);
                binders.pop();
                res
            }
        }
    }
    go(ctx, p, &mut Vec::new())
}

pub fn wellformed(ctx: Context, p: &Process) -> bool {
    check_wellformed(ctx, p).is_ok()
}

/// The transitions of `p` in the standard CCS LTS over the alphabet at `ctx`,
/// sorted and without duplicates.
pub fn ccs_transitions(ctx: Context, p: &Process) -> Vec<(LabelA, Process)> {
    let mut out: Vec<(LabelA, Process)> = step(ctx, p)
        .into_iter()
        .map(|(a, q)| (LabelA::new(ctx, a), q))
        .collect();
    out.sort();
    out.dedup();
    out
}

fn step(ctx: Context, p: &Process) -> Vec<(Action, Process)> {
    match p {
        Process::Sum(branches) => branches
            .iter()
            .map(|(prefix, cont)| (prefix.action(), cont.clone()))
            .collect(),
        Process::Par(l, r) => {
            let left = step(ctx, l);
            let right = step(ctx, r);
            let mut out = Vec::with_capacity(left.len() + right.len());
            for (a, l2) in &left {
                for (b, r2) in &right {
                    let synchronises = matches!(
                        (a, b),
                        (Action::In(x), Action::Out(y)) | (Action::Out(x), Action::In(y)) if x == y
                    );
                    if synchronises {
                        out.push((Action::Id, Process::par(l2.clone(), r2.clone())));
                    }
                }
            }
            out.extend(left.into_iter().map(|(a, l2)| (a, Process::par(l2, (**r).clone()))));
            out.extend(right.into_iter().map(|(a, r2)| (a, Process::par((**l).clone(), r2))));
            out
        }
        Process::Nu(b) => {
            let bound = ctx.0 + 1;
            step(ctx.extended(), b)
                .into_iter()
                .filter(|(a, _)| a.channel() != Some(bound))
                .map(|(a, q)| (a, Process::nu(q)))
                .collect()
        }
        Process::RecDef(..) => step(ctx, &p.unfold()),
        Process::RecVar(_) => Vec::new(),
    }
}

/// Syntax tree together with its declared context, as exported to JSON.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypedProcess {
    pub context: Context,
    pub process: Process,
}

impl TypedProcess {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("process serialisation cannot fail")
    }
}

impl fmt::Display for TypedProcess {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}", self.context, self.process)
    }
}

impl fmt::Display for Process {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_body(f, self)
    }
}

// Binders extend as far right as possible; `|` is left associative and binds
// looser than `+`.
fn write_body(f: &mut fmt::Formatter<'_>, p: &Process) -> fmt::Result {
    match p {
        Process::Nu(b) => {
            f.write_str("new a. ")?;
            write_body(f, b)
        }
        Process::RecDef(x, b) => {
            write!(f, "rec {x}. ")?;
            write_body(f, b)
        }
        Process::Par(l, r) => {
            match **l {
                Process::Par(..) | Process::Sum(_) | Process::RecVar(_) => write_body(f, l)?,
                _ => write_parens(f, l)?,
            }
            f.write_str(" | ")?;
            match **r {
                Process::Sum(_) | Process::RecVar(_) => write_body(f, r),
                _ => write_parens(f, r),
            }
        }
        Process::Sum(branches) if branches.is_empty() => f.write_str("0"),
        Process::Sum(branches) => {
            for (k, (prefix, cont)) in branches.iter().enumerate() {
                if k > 0 {
                    f.write_str(" + ")?;
                }
                write!(f, "{prefix}.")?;
                write_atom(f, cont)?;
            }
            Ok(())
        }
        Process::RecVar(x) => f.write_str(x),
    }
}

fn write_atom(f: &mut fmt::Formatter<'_>, p: &Process) -> fmt::Result {
    match p {
        Process::Sum(b) if b.len() <= 1 => write_body(f, p),
        Process::RecVar(_) => write_body(f, p),
        _ => write_parens(f, p),
    }
}

fn write_parens(f: &mut fmt::Formatter<'_>, p: &Process) -> fmt::Result {
    f.write_str("(")?;
    write_body(f, p)?;
    f.write_str(")")
}

/// All reachable states of the CCS LTS from `p`, breadth first, up to `cap`
/// states. Returns `None` when the cap is exceeded.
pub fn reachable_states(ctx: Context, p: &Process, cap: usize) -> Option<BTreeSet<Process>> {
    let mut seen = BTreeSet::new();
    let mut frontier = vec![p.clone()];
    seen.insert(p.clone());
    while let Some(q) = frontier.pop() {
        for (_, r) in ccs_transitions(ctx, &q) {
            if seen.insert(r.clone()) {
                if seen.len() > cap {
                    return None;
                }
                frontier.push(r);
            }
        }
    }
    Some(seen)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inp(c: Channel) -> Prefix {
        Prefix::In(c)
    }

    fn out(c: Channel) -> Prefix {
        Prefix::Out(c)
    }

    #[test]
    fn wellformed_examples() {
        assert!(wellformed(Context(1), &Process::prefixed(inp(1), Process::nil())));
        assert!(!wellformed(Context(0), &Process::prefixed(inp(1), Process::nil())));
        assert!(wellformed(Context(1), &Process::nu(Process::prefixed(inp(2), Process::nil()))));
    }

    #[test]
    fn recursion_must_be_guarded_and_bound() {
        let unguarded = Process::rec("X", Process::RecVar("X".into()));
        assert_eq!(
            check_wellformed(Context(0), &unguarded),
            Err(WellFormedError::UnguardedVariable("X".into()))
        );
        let free = Process::prefixed(Prefix::Tick, Process::RecVar("Y".into()));
        assert_eq!(
            check_wellformed(Context(0), &free),
            Err(WellFormedError::UnboundVariable("Y".into()))
        );
        let guarded = Process::rec("X", Process::prefixed(Prefix::Tick, Process::RecVar("X".into())));
        assert!(wellformed(Context(0), &guarded));
        let under_nu = Process::rec(
            "X",
            Process::nu(Process::prefixed(Prefix::Tick, Process::RecVar("X".into()))),
        );
        assert_eq!(
            check_wellformed(Context(0), &under_nu),
            Err(WellFormedError::VariableUnderRestriction("X".into()))
        );
    }

    #[test]
    fn par_interleaves_and_synchronises() {
        let a = Process::prefixed(inp(1), Process::nil());
        let abar = Process::prefixed(out(1), Process::nil());
        let p = Process::par(a.clone(), abar.clone());
        let ctx = Context(1);
        let ts = ccs_transitions(ctx, &p);
        let expected = vec![
            (LabelA::new(ctx, Action::Id), Process::par(Process::nil(), Process::nil())),
            (LabelA::new(ctx, Action::In(1)), Process::par(Process::nil(), abar.clone())),
            (LabelA::new(ctx, Action::Out(1)), Process::par(a.clone(), Process::nil())),
        ];
        let mut expected_sorted = expected.clone();
        expected_sorted.sort();
        assert_eq!(ts, expected_sorted);
    }

    #[test]
    fn restriction_blocks_bound_channel() {
        let body = Process::par(
            Process::prefixed(inp(1), Process::nil()),
            Process::prefixed(out(1), Process::nil()),
        );
        let p = Process::nu(body);
        let ts = ccs_transitions(Context(0), &p);
        assert_eq!(
            ts,
            vec![(
                LabelA::identity(Context(0)),
                Process::nu(Process::par(Process::nil(), Process::nil()))
            )]
        );
    }

    #[test]
    fn empty_sum_is_deadlock() {
        assert!(ccs_transitions(Context(0), &Process::nil()).is_empty());
    }

    #[test]
    fn recursion_unfolds_silently() {
        let p = Process::rec("X", Process::prefixed(Prefix::Tick, Process::RecVar("X".into())));
        let ts = ccs_transitions(Context(0), &p);
        assert_eq!(ts, vec![(LabelA::new(Context(0), Action::Tick), p.clone())]);
        assert_eq!(reachable_states(Context(0), &p, 10).unwrap().len(), 1);
    }

    #[test]
    fn every_label_is_an_endo_edge_of_the_context() {
        let p = Process::par(
            Process::Sum(vec![(inp(2), Process::nil()), (Prefix::Tick, Process::nil())]),
            Process::nu(Process::prefixed(out(3), Process::prefixed(out(1), Process::nil()))),
        );
        for (l, _) in ccs_transitions(Context(2), &p) {
            assert_eq!(l.endpoint, Context(2));
        }
    }

    #[test]
    fn size_counts_prefixes_and_nodes() {
        assert_eq!(Process::nil().size(), 1);
        assert_eq!(Process::prefixed(inp(1), Process::nil()).size(), 2);
        let p = Process::par(Process::nil(), Process::nu(Process::nil()));
        assert_eq!(p.size(), 4);
    }
}
