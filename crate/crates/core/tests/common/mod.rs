//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use workbench::catalog::Catalog;
use workbench::classes::{BitString, PathDecision, PathDecisionLog, PathVerdict, TreePresentation};
use workbench::forcing::{Certificate, ColorTable, InstanceData, Transcript};
use workbench::machine::{Oracle, Program, RunOutcome};

/// A finite set read as an oracle: every bit outside the set is 0.
pub struct FiniteSet(pub BTreeSet<u64>);

impl Oracle for FiniteSet {
    fn bit(&mut self, n: u128) -> Option<bool> {
        Some(u64::try_from(n).is_ok_and(|n| self.0.contains(&n)))
    }
}

/// A string read as an oracle: bits past its end are unknown.
pub struct Prefix<'a>(pub &'a [bool]);

impl Oracle for Prefix<'_> {
    fn bit(&mut self, n: u128) -> Option<bool> {
        usize::try_from(n).ok().and_then(|i| self.0.get(i).copied())
    }
}

pub fn run_on_set(p: &Program, x: u128, set: &[u64], fuel: u64) -> RunOutcome {
    p.run(x, &mut FiniteSet(set.iter().copied().collect()), fuel)
}

/// All strings of length `depth` in lexicographic order.
fn strings(depth: usize) -> impl Iterator<Item = Vec<bool>> {
    (0u64..1 << depth).map(move |v| (0..depth).rev().map(|i| (v >> i) & 1 == 1).collect())
}

fn in_table(levels: &[BTreeSet<BitString>], s: &[bool]) -> bool {
    (0..=s.len()).all(|d| levels.get(d).is_some_and(|l| l.contains(&BitString(s[..d].to_vec()))))
}

/// Low-basis forcing by enumeration of every leaf of a table tree: each
/// `e` is forced divergent when some surviving leaf keeps `Φ_e(e)` from
/// halting, otherwise the leftmost survivor's halting run fixes a prefix.
pub fn exhaustive_low_basis(
    tree: &TreePresentation,
    e_bound: u64,
    depth: usize,
    catalog: &Catalog,
    fuel: u64,
) -> Option<(BitString, PathDecisionLog)> {
    let TreePresentation::Table { levels } = tree else { panic!("table trees only") };
    let mut alive: Vec<Vec<bool>> = strings(depth).filter(|s| in_table(levels, s)).collect();
    if alive.is_empty() {
        return None;
    }
    let mut log = PathDecisionLog::default();
    for e in 0..e_bound {
        let p = catalog.get(e);
        let diverging: Vec<Vec<bool>> =
            alive.iter().filter(|s| !p.run(u128::from(e), &mut Prefix(s), fuel).is_halted()).cloned().collect();
        if !diverging.is_empty() {
            alive = diverging;
            log.decisions.push(PathDecision {
                e,
                verdict: PathVerdict::Diverges { probe_depth: depth },
                provisional: false,
            });
            continue;
        }
        let out = p.run(u128::from(e), &mut Prefix(&alive[0]), fuel);
        let prefix = alive[0][..out.use_bound as usize].to_vec();
        alive.retain(|s| s.starts_with(&prefix));
        log.decisions.push(PathDecision {
            e,
            verdict: PathVerdict::Halts {
                probe_depth: depth,
                oracle_prefix: BitString(prefix),
                value: out.halted().unwrap(),
                steps: out.steps,
                use_bound: out.use_bound,
            },
            provisional: false,
        });
    }
    Some((BitString(alive[0].clone()), log))
}

/// Color of `(x, y)` from the table embedded in a transcript header.
fn header_table(t: &Transcript) -> Option<&ColorTable> {
    match &t.header.instance {
        InstanceData::Coloring { table, .. } => Some(table),
        _ => None,
    }
}

fn fallow_with(table: &ColorTable, s: &[u64]) -> bool {
    let mut s = s.to_vec();
    s.sort_unstable();
    for a in 0..s.len() {
        for b in a + 1..s.len() {
            for c in b + 1..s.len() {
                let (x, y, z) = (s[a], s[b], s[c]);
                let xz = table.get(x, z);
                if xz != table.get(x, y) && xz != table.get(y, z) {
                    return false;
                }
            }
        }
    }
    true
}

/// Problems found when replaying the transcript's jump ledger: positive
/// certificates rerun on the finite set they name, negative ones are
/// retried on every `D` of at most two elements from the first `prefix`
/// reservoir points at `fuel`.
pub fn jump_ledger_problems(t: &Transcript, fuel: u64, prefix: usize) -> Vec<String> {
    let mut problems = Vec::new();
    for rec in &t.stages {
        for cert in &rec.certificates {
            match cert {
                Certificate::Halting { e, oracle, value, steps, use_bound, fuel: f, .. } => {
                    let out = run_on_set(&t.header.catalog.get(*e), u128::from(*e), oracle, *f);
                    if out.halted() != Some(*value) || out.steps != *steps || out.use_bound != *use_bound {
                        problems.push(format!("stage {}: R_{e} does not replay", rec.stage));
                    }
                }
                Certificate::Negative { e, fixed, reservoir, fallow, .. } => {
                    let p = t.header.catalog.get(*e);
                    let head = &reservoir[..reservoir.len().min(prefix)];
                    let mut ds: Vec<Vec<u64>> = vec![vec![]];
                    for (a, &x) in head.iter().enumerate() {
                        ds.push(vec![x]);
                        ds.extend(head[a + 1..].iter().map(|&y| vec![x, y]));
                    }
                    for d in ds {
                        let set: Vec<u64> = fixed.iter().chain(&d).copied().collect();
                        if *fallow && !header_table(t).is_some_and(|tb| fallow_with(tb, &set)) {
                            continue;
                        }
                        if run_on_set(&p, u128::from(*e), &set, fuel).is_halted() {
                            problems.push(format!("stage {}: N_{e} refuted by {d:?} at fuel {fuel}", rec.stage));
                        }
                    }
                }
                _ => {}
            }
        }
    }
    problems
}
