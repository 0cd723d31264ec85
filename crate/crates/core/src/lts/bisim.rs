//! Weak and strong bisimilarity over the CCS alphabet: exact on finite state spaces,
//! otherwise up to a depth.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::{state_hash, Explorer, Lts, LtsError};
use crate::ccs::{Action, LabelA};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BisimOptions {
    /// Depth of the approximant used when the state spaces are not both
    /// finite within the explorers' caps.
    pub depth: usize,
    /// Try the exact check first.
    pub exact: bool,
    /// Match single edges, silent ones included, instead of weak steps.
    pub strong: bool,
}

impl Default for BisimOptions {
    fn default() -> Self {
        BisimOptions { depth: 6, exact: true, strong: false }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum BisimVerdict {
    /// `exact` when decided on the whole state spaces; otherwise the states
    /// agree up to `depth` weak steps.
    Bisimilar { exact: bool, depth: usize },
    /// The states differ after `depth` weak steps. The trace alternates
    /// state-pair hashes and the labels of the distinguishing moves.
    NotBisimilar { depth: usize, trace: Vec<String> },
    BudgetExceeded { states: usize },
}

impl BisimVerdict {
    pub fn is_bisimilar(&self) -> bool {
        matches!(self, BisimVerdict::Bisimilar { .. })
    }
}

type Weak = Vec<(Action, usize)>;

/// Weak transitions of one side, cached.
struct Side<'a, L: Lts<Label = LabelA>> {
    ex: &'a mut Explorer<L>,
    strong: bool,
    weak: HashMap<usize, Weak>,
}

impl<L: Lts<Label = LabelA>> Side<'_, L> {
    fn weak(&mut self, i: usize) -> Result<Weak, LtsError> {
        if let Some(w) = self.weak.get(&i) {
            return Ok(w.clone());
        }
        let w = if self.strong {
            let mut w: Weak = self.ex.successors(i)?.into_iter().map(|(l, t)| (l.kind, t)).collect();
            w.sort();
            w.dedup();
            w
        } else {
            self.ex.weak_successors(i)?
        };
        self.weak.insert(i, w.clone());
        Ok(w)
    }

    fn hash(&self, i: usize) -> String {
        state_hash(self.ex.state(i))
    }

    /// All states weakly reachable from `i`.
    fn reachable(&mut self, i: usize) -> Result<Vec<usize>, LtsError> {
        let mut seen = BTreeSet::from([i]);
        let mut stack = vec![i];
        while let Some(j) = stack.pop() {
            for (_, k) in self.weak(j)? {
                if seen.insert(k) {
                    stack.push(k);
                }
            }
        }
        Ok(seen.into_iter().collect())
    }
}

fn label(a: Action, left: bool) -> String {
    format!("{}:{a}", if left { "left" } else { "right" })
}

/// Decides weak (or, with `opts.strong`, strong) bisimilarity of `s1` in the first LTS and `s2` in the
/// second. Exact when both reachable state spaces fit in their explorers'
/// caps, otherwise bounded by `opts.depth`.
pub fn weak_bisim_bounded<A, B>(
    l1: &mut Explorer<A>,
    s1: &A::State,
    l2: &mut Explorer<B>,
    s2: &B::State,
    opts: BisimOptions,
) -> BisimVerdict
where
    A: Lts<Label = LabelA>,
    B: Lts<Label = LabelA>,
{
    let budget = |e: LtsError| match e {
        LtsError::StateCap(n) => BisimVerdict::BudgetExceeded { states: n },
        LtsError::ArityExceeded { .. } => BisimVerdict::BudgetExceeded { states: 0 },
    };
    let (i, j) = match (l1.id(s1), l2.id(s2)) {
        (Ok(i), Ok(j)) => (i, j),
        (Err(e), _) | (_, Err(e)) => return budget(e),
    };
    let mut a = Side { ex: l1, strong: opts.strong, weak: HashMap::new() };
    let mut b = Side { ex: l2, strong: opts.strong, weak: HashMap::new() };
    if opts.exact {
        if let Some(v) = exact(&mut a, i, &mut b, j) {
            return v;
        }
    }
    let mut memo = HashMap::new();
    match approx(&mut a, i, &mut b, j, opts.depth, &mut memo) {
        Err(e) => budget(e),
        Ok(true) => BisimVerdict::Bisimilar { exact: false, depth: opts.depth },
        Ok(false) => {
            let mut k = 1;
            while approx(&mut a, i, &mut b, j, k, &mut memo) == Ok(true) {
                k += 1;
            }
            let trace = bounded_trace(&mut a, i, &mut b, j, k, &mut memo).unwrap_or_default();
            BisimVerdict::NotBisimilar { depth: k, trace }
        }
    }
}

/// Partition refinement over both reachable weak graphs. `None` when either
/// exploration runs out of budget.
fn exact<A, B>(a: &mut Side<A>, i: usize, b: &mut Side<B>, j: usize) -> Option<BisimVerdict>
where
    A: Lts<Label = LabelA>,
    B: Lts<Label = LabelA>,
{
    let ra = a.reachable(i).ok()?;
    let rb = b.reachable(j).ok()?;
    // Global numbering: left states first.
    let pos_a: HashMap<usize, usize> = ra.iter().enumerate().map(|(k, &s)| (s, k)).collect();
    let pos_b: HashMap<usize, usize> = rb.iter().enumerate().map(|(k, &s)| (s, ra.len() + k)).collect();
    let mut edges: Vec<Vec<(Action, usize)>> = Vec::with_capacity(ra.len() + rb.len());
    for &s in &ra {
        edges.push(a.weak(s).ok()?.into_iter().map(|(l, t)| (l, pos_a[&t])).collect());
    }
    for &s in &rb {
        edges.push(b.weak(s).ok()?.into_iter().map(|(l, t)| (l, pos_b[&t])).collect());
    }
    let n = edges.len();
    let mut history = vec![vec![0usize; n]];
    loop {
        let block = history.last().expect("non-empty");
        let mut index: HashMap<(usize, BTreeSet<(Action, usize)>), usize> = HashMap::new();
        let mut next = vec![0; n];
        for s in 0..n {
            let sig: BTreeSet<(Action, usize)> = edges[s].iter().map(|&(l, t)| (l, block[t])).collect();
            let k = index.len();
            next[s] = *index.entry((block[s], sig)).or_insert(k);
        }
        let before = block.iter().collect::<BTreeSet<_>>().len();
        let stable = index.len() == before;
        history.push(next);
        if stable {
            break;
        }
    }
    let (x, y) = (pos_a[&i], pos_b[&j]);
    let last = history.last().expect("non-empty");
    if last[x] == last[y] {
        return Some(BisimVerdict::Bisimilar { exact: true, depth: history.len() - 1 });
    }
    let k = history.iter().position(|h| h[x] != h[y]).expect("separated at some round");
    let hashes: Vec<String> = ra.iter().map(|&s| a.hash(s)).chain(rb.iter().map(|&s| b.hash(s))).collect();
    let mut trace = Vec::new();
    let depth = k;
    let (mut x, mut y, mut k) = (x, y, k);
    while k > 0 {
        trace.push(format!("{}/{}", hashes[x], hashes[y]));
        let prev = &history[k - 1];
        let unmatched = |p: usize, q: usize| {
            edges[p].iter().copied().find(|&(l, t)| !edges[q].iter().any(|&(l2, u)| l2 == l && prev[u] == prev[t]))
        };
        let (left, (l, t), q) = match unmatched(x, y) {
            Some(m) => (true, m, y),
            None => (false, unmatched(y, x).expect("signatures differ"), x),
        };
        trace.push(label(l, left));
        let Some(&(_, u)) = edges[q].iter().find(|(l2, _)| *l2 == l) else { break };
        (x, y) = if left { (t, u) } else { (u, t) };
        match history.iter().position(|h| h[x] != h[y]) {
            Some(k2) => k = k2,
            None => break,
        }
    }
    Some(BisimVerdict::NotBisimilar { depth, trace })
}

type Memo = HashMap<(usize, usize, usize), bool>;

/// The `k`-th weak bisimulation approximant.
fn approx<A, B>(a: &mut Side<A>, i: usize, b: &mut Side<B>, j: usize, k: usize, memo: &mut Memo) -> Result<bool, LtsError>
where
    A: Lts<Label = LabelA>,
    B: Lts<Label = LabelA>,
{
    if k == 0 {
        return Ok(true);
    }
    if let Some(&v) = memo.get(&(i, j, k)) {
        return Ok(v);
    }
    let (wa, wb) = (a.weak(i)?, b.weak(j)?);
    let mut ok = true;
    'left: for &(l, t) in &wa {
        for &(l2, u) in &wb {
            if l2 == l && approx(a, t, b, u, k - 1, memo)? {
                continue 'left;
            }
        }
        ok = false;
        break;
    }
    if ok {
        'right: for &(l, u) in &wb {
            for &(l2, t) in &wa {
                if l2 == l && approx(a, t, b, u, k - 1, memo)? {
                    continue 'right;
                }
            }
            ok = false;
            break;
        }
    }
    memo.insert((i, j, k), ok);
    Ok(ok)
}

fn bounded_trace<A, B>(a: &mut Side<A>, i: usize, b: &mut Side<B>, j: usize, k: usize, memo: &mut Memo) -> Result<Vec<String>, LtsError>
where
    A: Lts<Label = LabelA>,
    B: Lts<Label = LabelA>,
{
    let mut trace = Vec::new();
    let (mut i, mut j, mut k) = (i, j, k);
    while k > 0 {
        trace.push(format!("{}/{}", a.hash(i), b.hash(j)));
        let (wa, wb) = (a.weak(i)?, b.weak(j)?);
        let mut found = None;
        for &(l, t) in &wa {
            let mut matched = false;
            for &(l2, u) in &wb {
                if l2 == l && approx(a, t, b, u, k - 1, memo)? {
                    matched = true;
                    break;
                }
            }
            if !matched {
                found = Some((true, l, t));
                break;
            }
        }
        if found.is_none() {
            for &(l, u) in &wb {
                let mut matched = false;
                for &(l2, t) in &wa {
                    if l2 == l && approx(a, t, b, u, k - 1, memo)? {
                        matched = true;
                        break;
                    }
                }
                if !matched {
                    found = Some((false, l, u));
                    break;
                }
            }
        }
        let Some((left, l, t)) = found else { break };
        trace.push(label(l, left));
        let response = if left { wb.iter().find(|(l2, _)| *l2 == l) } else { wa.iter().find(|(l2, _)| *l2 == l) };
        let Some(&(_, u)) = response else { break };
        (i, j) = if left { (t, u) } else { (u, t) };
        k -= 1;
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ccs::parse_ccs;
    use crate::lts::CcsLts;

    fn check(p: &str, q: &str, opts: BisimOptions) -> BisimVerdict {
        let (p, q) = (parse_ccs(p).unwrap(), parse_ccs(q).unwrap());
        let mut l1 = Explorer::new(CcsLts { ctx: p.context }, 10_000);
        let mut l2 = Explorer::new(CcsLts { ctx: q.context }, 10_000);
        weak_bisim_bounded(&mut l1, &p.process, &mut l2, &q.process, opts)
    }

    #[test]
    fn reflexive() {
        for exact in [true, false] {
            for depth in [0, 1, 3] {
                let v = check("[2] a1.'a2.0 + tick.0 | 'a1.0", "[2] a1.'a2.0 + tick.0 | 'a1.0", BisimOptions { depth, exact, strong: false });
                assert!(v.is_bisimilar(), "{v:?}");
            }
        }
    }

    #[test]
    fn unmatched_input() {
        let v = check("[1] a1.0", "[1] 0", BisimOptions { depth: 1, exact: false, strong: false });
        let BisimVerdict::NotBisimilar { depth, trace } = v else { panic!("{v:?}") };
        assert_eq!(depth, 1);
        assert_eq!(trace[1], "left:a1");
        let v = check("[1] a1.0", "[1] 0", BisimOptions::default());
        assert!(matches!(v, BisimVerdict::NotBisimilar { .. }));
    }

    #[test]
    fn private_synchronisation_is_inert() {
        let v = check("[0] new a. (a1.0 | 'a1.0)", "[0] 0", BisimOptions::default());
        assert!(matches!(v, BisimVerdict::Bisimilar { exact: true, .. }), "{v:?}");
        let v = check("[1] new a. (a2.0 | 'a2.0)", "[1] 0", BisimOptions::default());
        assert!(v.is_bisimilar());
    }

    #[test]
    fn weak_but_not_strong() {
        assert!(check("[1] new a. (a2.a1.0 | 'a2.0)", "[1] a1.0", BisimOptions::default()).is_bisimilar());
        let v = check("[1] a1.0 | 'a1.0", "[1] a1.'a1.0 + 'a1.a1.0", BisimOptions::default());
        assert!(!v.is_bisimilar());
        let strong = BisimOptions { strong: true, ..BisimOptions::default() };
        assert!(!check("[1] new a. (a2.a1.0 | 'a2.0)", "[1] a1.0", strong).is_bisimilar());
        assert!(check("[1] a1.0 | tick.0", "[1] tick.0 | a1.0", strong).is_bisimilar());
    }

    #[test]
    fn monotone_in_depth() {
        let pairs = [("[1] a1.a1.0", "[1] a1.0"), ("[1] a1.(a1.0 + tick.0)", "[1] a1.a1.0 + a1.tick.0")];
        for (p, q) in pairs {
            let mut failed = false;
            for depth in 0..5 {
                let ok = check(p, q, BisimOptions { depth, exact: false, strong: false }).is_bisimilar();
                assert!(!(failed && ok), "{p} {q} {depth}");
                failed |= !ok;
            }
            assert!(failed);
        }
    }

    #[test]
    fn budget_is_distinct() {
        let p = parse_ccs("[1] rec X. (a1.0 | tick.X)").unwrap();
        let mut l1 = Explorer::new(CcsLts { ctx: p.context }, 50);
        let mut l2 = Explorer::new(CcsLts { ctx: p.context }, 50);
        let v = weak_bisim_bounded(&mut l1, &p.process, &mut l2, &p.process, BisimOptions { depth: 60, exact: true, strong: false });
        assert_eq!(v, BisimVerdict::BudgetExceeded { states: 50 });
    }
}
