//! Search for a finite `D ⊆ S` with `Φ^{F ∪ D}(input)` halting.
//!
//! The run is replayed against a lazy oracle: positions of `F` answer from
//! `F`, other positions outside `S` answer 0, and the first query at an
//! undecided position of `S` stops the run so the search can branch on it
//! (member first). A halting branch yields `D`; when the run looked past
//! `max(F ∪ D)`, the least element of `S` above every query is added so the
//! finite-set oracle `F ∪ D` covers the use.

use std::collections::BTreeMap;

use crate::machine::{Oracle, OracleWindow, Program, RunOutcome, RunStatus};

pub struct ExtensionSearch<'a> {
    pub program: &'a Program,
    pub input: u128,
    /// `F`, sorted.
    pub fixed: &'a [u64],
    /// `S`, sorted, every element above `max F`.
    pub candidates: &'a [u64],
    pub fuel: u64,
    /// Maximum number of program runs.
    pub node_cap: u64,
    /// Extra constraint on `F ∪ D` (sorted), checked whenever `D` grows.
    pub admissible: Option<&'a dyn Fn(&[u64]) -> bool>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SearchOutcome {
    Found {
        extension: Vec<u64>,
        outcome: RunOutcome,
        nodes: u64,
    },
    /// `exhaustive` is false when the node cap stopped the search.
    NotFound {
        exhaustive: bool,
        nodes: u64,
    },
}

struct LazyOracle<'a> {
    fixed: &'a [u64],
    candidates: &'a [u64],
    assigned: &'a BTreeMap<u64, bool>,
    pending: Option<u64>,
    top_query: Option<u128>,
}

impl Oracle for LazyOracle<'_> {
    fn bit(&mut self, n: u128) -> Option<bool> {
        self.top_query = Some(self.top_query.map_or(n, |t| t.max(n)));
        let Ok(n) = u64::try_from(n) else {
            return Some(false);
        };
        if self.fixed.binary_search(&n).is_ok() {
            return Some(true);
        }
        if self.candidates.binary_search(&n).is_err() {
            return Some(false);
        }
        match self.assigned.get(&n) {
            Some(&b) => Some(b),
            None => {
                self.pending = Some(n);
                None
            }
        }
    }
}

fn union(fixed: &[u64], extension: &[u64]) -> Vec<u64> {
    let mut all: Vec<u64> = fixed.iter().chain(extension).copied().collect();
    all.sort_unstable();
    all
}

impl ExtensionSearch<'_> {
    fn allowed(&self, extension: &[u64]) -> bool {
        self.admissible.map_or(true, |f| f(&union(self.fixed, extension)))
    }

    pub fn run(&self) -> SearchOutcome {
        let mut stack: Vec<BTreeMap<u64, bool>> = vec![BTreeMap::new()];
        let mut nodes = 0u64;
        while let Some(assigned) = stack.pop() {
            if nodes >= self.node_cap {
                return SearchOutcome::NotFound { exhaustive: false, nodes };
            }
            nodes += 1;
            let mut oracle = LazyOracle {
                fixed: self.fixed,
                candidates: self.candidates,
                assigned: &assigned,
                pending: None,
                top_query: None,
            };
            let out = self.program.run(self.input, &mut oracle, self.fuel);
            let (pending, top_query) = (oracle.pending, oracle.top_query);
            match out.status {
                RunStatus::Halted { .. } => {
                    let extension: Vec<u64> = assigned.iter().filter(|(_, b)| **b).map(|(n, _)| *n).collect();
                    if let Some(found) = self.close_over_use(extension, top_query) {
                        return SearchOutcome::Found { extension: found.0, outcome: found.1, nodes };
                    }
                }
                RunStatus::OracleInsufficient { .. } => {
                    let Some(p) = pending else { continue };
                    let mut out_branch = assigned.clone();
                    out_branch.insert(p, false);
                    stack.push(out_branch);
                    let mut in_branch = assigned;
                    in_branch.insert(p, true);
                    let ext: Vec<u64> = in_branch.iter().filter(|(_, b)| **b).map(|(n, _)| *n).collect();
                    if self.allowed(&ext) {
                        stack.push(in_branch);
                    }
                }
                RunStatus::OutOfFuel => {}
            }
        }
        SearchOutcome::NotFound { exhaustive: true, nodes }
    }

    /// Makes `F ∪ D` reach past every query, then replays on the finite set.
    fn close_over_use(&self, mut extension: Vec<u64>, top_query: Option<u128>) -> Option<(Vec<u64>, RunOutcome)> {
        let top_member = self.fixed.iter().chain(&extension).max().copied();
        let needs_more = match (top_query, top_member) {
            (None, _) => false,
            (Some(_), None) => true,
            (Some(q), Some(m)) => u128::from(m) < q,
        };
        if needs_more {
            let above = top_query.unwrap();
            let z = self.candidates.iter().filter(|&&z| u128::from(z) > above).find(|&&z| {
                let mut ext = extension.clone();
                ext.push(z);
                self.allowed(&ext)
            })?;
            extension.push(*z);
        }
        extension.sort_unstable();
        let window = OracleWindow::of_finite_set(union(self.fixed, &extension));
        let out = self.program.run(self.input, &mut &window, self.fuel);
        out.is_halted().then_some((extension, out))
    }
}
