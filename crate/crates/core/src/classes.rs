//! Binary trees, leftmost-path search and the low-basis forcing procedure.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::Catalog;
use crate::machine::{library::string_code, OracleWindow, Program, RunStatus};

pub const DEFAULT_MAX_DEPTH: usize = 24;

/// A finite binary string, ordered lexicographically with `0 < 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct BitString(pub Vec<bool>);

impl BitString {
    pub fn zeros(n: usize) -> Self {
        BitString(vec![false; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn child(&self, bit: bool) -> Self {
        let mut v = self.0.clone();
        v.push(bit);
        BitString(v)
    }

    pub fn prefix(&self, n: usize) -> Self {
        BitString(self.0[..n.min(self.0.len())].to_vec())
    }

    pub fn parent(&self) -> Option<Self> {
        (!self.0.is_empty()).then(|| self.prefix(self.0.len() - 1))
    }

    pub fn is_prefix_of(&self, other: &BitString) -> bool {
        other.0.starts_with(&self.0)
    }

    pub fn comparable(&self, other: &BitString) -> bool {
        self.is_prefix_of(other) || other.is_prefix_of(self)
    }

    /// Oracle window whose bits are the string, bound `len`.
    pub fn window(&self) -> OracleWindow {
        OracleWindow::new(self.0.clone())
    }

    pub fn code(&self) -> u128 {
        string_code(&self.0)
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for BitString {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(format!("invalid bit `{other}`")),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(BitString)
    }
}

impl Serialize for BitString {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for BitString {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClassError {
    #[error("depth {depth} exceeds the configured maximum {max}")]
    DepthTooLarge { depth: usize, max: usize },
    #[error("membership of {node} not decided within fuel")]
    Inconclusive { node: BitString },
    #[error("tree has no node at level {depth}")]
    EmptyLevel { depth: usize },
}

/// A binary tree given by a membership test.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TreePresentation {
    /// Accepted nodes per level; nothing is accepted past the last level.
    Table { levels: Vec<BTreeSet<BitString>> },
    /// Strings containing none of the patterns as a substring.
    Excluded { patterns: Vec<BitString> },
    /// Decider on the string code: output 0 rejects, anything else accepts.
    Program { program: Program, oracle: Option<OracleWindow>, fuel: u64 },
    /// Π₁ class: `σ ∈ T` iff for no prefix `ρ ⊆ σ` does the program halt on
    /// the code of `ρ` within `fuel`, with oracle `W↾|ρ|`.
    Pi1Class { program: Program, oracle: OracleWindow, fuel: u64 },
}

impl TreePresentation {
    pub fn full() -> Self {
        TreePresentation::Excluded { patterns: Vec::new() }
    }

    pub fn excluding(patterns: &[&str]) -> Self {
        TreePresentation::Excluded { patterns: patterns.iter().map(|p| p.parse().unwrap()).collect() }
    }

    /// Table tree from the accepted nodes of its deepest level: every prefix
    /// of a listed node is accepted.
    pub fn from_leaves<'a>(depth: usize, leaves: impl IntoIterator<Item = &'a BitString>) -> Self {
        let mut levels = vec![BTreeSet::new(); depth + 1];
        for leaf in leaves {
            assert_eq!(leaf.len(), depth);
            for d in 0..=depth {
                levels[d].insert(leaf.prefix(d));
            }
        }
        TreePresentation::Table { levels }
    }

    /// Acceptance of `σ` assuming its parent is accepted.
    pub fn accepts_local(&self, node: &BitString) -> Result<bool, ClassError> {
        match self {
            TreePresentation::Table { levels } => Ok(levels.get(node.len()).is_some_and(|l| l.contains(node))),
            TreePresentation::Excluded { patterns } => {
                Ok(!patterns.iter().any(|p| !p.is_empty() && node.0.ends_with(&p.0)))
            }
            TreePresentation::Program { program, oracle, fuel } => {
                let empty = OracleWindow::empty();
                let w = oracle.as_ref().unwrap_or(&empty);
                match program.run(node.code(), &mut &*w, *fuel).status {
                    RunStatus::Halted { value } => Ok(value != 0),
                    _ => Err(ClassError::Inconclusive { node: node.clone() }),
                }
            }
            TreePresentation::Pi1Class { program, oracle, fuel } => {
                let w = oracle.truncated(node.len());
                Ok(!program.run(node.code(), &mut &w, *fuel).is_halted())
            }
        }
    }

    /// Raw membership: `σ` and all its prefixes are accepted.
    pub fn member(&self, node: &BitString) -> Result<bool, ClassError> {
        for d in 0..=node.len() {
            if !self.accepts_local(&node.prefix(d))? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// A level of the tree, after pruning nodes whose parent is missing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Level {
    pub depth: usize,
    pub nodes: Vec<BitString>,
    /// Accepted strings at this level whose parent is not in the tree.
    pub orphans: Vec<BitString>,
}

/// All nodes of length `depth`, in lexicographic order.
pub fn tree_level(t: &TreePresentation, depth: usize, max_depth: usize) -> Result<Level, ClassError> {
    if depth > max_depth {
        return Err(ClassError::DepthTooLarge { depth, max: max_depth });
    }
    let mut nodes = if t.accepts_local(&BitString::default())? { vec![BitString::default()] } else { Vec::new() };
    let mut prev: Vec<BitString> = Vec::new();
    for _ in 0..depth {
        let mut next = Vec::with_capacity(nodes.len() * 2);
        for n in &nodes {
            for bit in [false, true] {
                let c = n.child(bit);
                if t.accepts_local(&c)? {
                    next.push(c);
                }
            }
        }
        prev = std::mem::replace(&mut nodes, next);
    }
    let orphans = match t {
        TreePresentation::Table { levels } => match levels.get(depth) {
            Some(listed) if depth > 0 => {
                let parents: BTreeSet<&BitString> = prev.iter().collect();
                listed.iter().filter(|s| !parents.contains(&s.parent().unwrap())).cloned().collect()
            }
            Some(listed) if !nodes.is_empty() || listed.is_empty() => Vec::new(),
            Some(listed) => listed.iter().cloned().collect(),
            None => Vec::new(),
        },
        _ => Vec::new(),
    };
    Ok(Level { depth, nodes, orphans })
}

/// Extra node constraint used while forcing inside a tree.
#[derive(Debug, Clone, PartialEq, Eq)]
enum Restriction {
    /// `Φ_e^σ(input)` must not halt within `fuel`.
    Diverge { program: Program, input: u128, fuel: u64 },
    /// `σ` must be comparable with the string.
    Through(BitString),
}

impl Restriction {
    fn allows(&self, node: &BitString) -> bool {
        match self {
            Restriction::Diverge { program, input, fuel } => {
                !program.run(*input, &mut &node.window(), *fuel).is_halted()
            }
            Restriction::Through(s) => node.comparable(s),
        }
    }
}

/// Leftmost node at level `target` of `t` cut down by `restrictions`.
fn leftmost_at(
    t: &TreePresentation,
    restrictions: &[Restriction],
    target: usize,
) -> Result<Option<BitString>, ClassError> {
    let root = BitString::default();
    if !t.accepts_local(&root)? || !restrictions.iter().all(|r| r.allows(&root)) {
        return Ok(None);
    }
    // depth-first, 0-child first
    let mut stack = vec![root];
    while let Some(node) = stack.pop() {
        if node.len() == target {
            return Ok(Some(node));
        }
        for bit in [true, false] {
            let c = node.child(bit);
            if t.accepts_local(&c)? && restrictions.iter().all(|r| r.allows(&c)) {
                stack.push(c);
            }
        }
    }
    Ok(None)
}

/// Leftmost node of the tree at `target` (no lookahead).
pub fn leftmost_node(t: &TreePresentation, target: usize) -> Result<Option<BitString>, ClassError> {
    leftmost_at(t, &[], target)
}

/// Leftmost string of length `depth` that extends to level
/// `depth + lookahead` (capped at `max_depth`). When no node reaches that
/// far, the leftmost node with the deepest extension is returned.
pub fn wkl_path_prefix(
    t: &TreePresentation,
    depth: usize,
    lookahead: usize,
    max_depth: usize,
) -> Result<BitString, ClassError> {
    if depth > max_depth {
        return Err(ClassError::DepthTooLarge { depth, max: max_depth });
    }
    let horizon = (depth + lookahead).min(max_depth).max(depth);
    for target in (depth..=horizon).rev() {
        if let Some(node) = leftmost_at(t, &[], target)? {
            return Ok(node.prefix(depth));
        }
    }
    Err(ClassError::EmptyLevel { depth })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathVerdict {
    /// The subtree forcing divergence was nonempty at `probe_depth`.
    Diverges { probe_depth: usize },
    /// Every node at `probe_depth` forced halting; the path goes through
    /// `oracle_prefix`, on which the run halts.
    Halts { probe_depth: usize, oracle_prefix: BitString, value: u128, steps: u64, use_bound: u128 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathDecision {
    pub e: u64,
    pub verdict: PathVerdict,
    /// Probe depth below the requested depth.
    pub provisional: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PathDecisionLog {
    pub decisions: Vec<PathDecision>,
}

#[derive(Debug, Clone)]
pub struct LowBasisConfig {
    pub catalog: Catalog,
    pub fuel: u64,
    pub max_depth: usize,
}

impl Default for LowBasisConfig {
    fn default() -> Self {
        LowBasisConfig { catalog: Catalog::standard(), fuel: 256, max_depth: DEFAULT_MAX_DEPTH }
    }
}

/// Decides `Φ_e^P(e)` for `e < e_bound` along the path `P` being built:
/// divergence is forced whenever some node at the probe depth keeps the
/// computation from halting, otherwise the path commits to the leftmost
/// halting node. Returns the leftmost surviving node at `depth`.
pub fn low_basis_path(
    t: &TreePresentation,
    e_bound: u64,
    depth: usize,
    cfg: &LowBasisConfig,
) -> Result<(BitString, PathDecisionLog), ClassError> {
    let probe = depth.min(cfg.max_depth);
    let provisional = probe < depth;
    let mut restrictions: Vec<Restriction> = Vec::new();
    if leftmost_at(t, &restrictions, probe)?.is_none() {
        return Err(ClassError::EmptyLevel { depth: probe });
    }
    let mut log = PathDecisionLog::default();
    for e in 0..e_bound {
        let program = cfg.catalog.get(e);
        let diverge = Restriction::Diverge { program: program.clone(), input: u128::from(e), fuel: cfg.fuel };
        restrictions.push(diverge);
        if leftmost_at(t, &restrictions, probe)?.is_some() {
            log.decisions.push(PathDecision { e, verdict: PathVerdict::Diverges { probe_depth: probe }, provisional });
            continue;
        }
        restrictions.pop();
        let node = leftmost_at(t, &restrictions, probe)?.expect("subclass nonempty at probe depth");
        let out = program.run(u128::from(e), &mut &node.window(), cfg.fuel);
        let value = out.halted().expect("every probe node forces halting");
        let prefix = node.prefix(out.use_bound as usize);
        restrictions.push(Restriction::Through(prefix.clone()));
        log.decisions.push(PathDecision {
            e,
            verdict: PathVerdict::Halts {
                probe_depth: probe,
                oracle_prefix: prefix,
                value,
                steps: out.steps,
                use_bound: out.use_bound,
            },
            provisional,
        });
    }
    let path = leftmost_at(t, &restrictions, depth.min(cfg.max_depth))?.ok_or(ClassError::EmptyLevel { depth })?;
    Ok((path, log))
}

/// Re-checks a low-basis result: every prefix of the path is in the tree,
/// every halting certificate replays on the path, and every divergence
/// verdict is consistent with the path itself.
pub fn audit_low_basis(
    t: &TreePresentation,
    path: &BitString,
    log: &PathDecisionLog,
    cfg: &LowBasisConfig,
) -> Result<Vec<String>, ClassError> {
    let mut findings = Vec::new();
    if !t.member(path)? {
        findings.push(format!("path {path} leaves the tree"));
    }
    for d in &log.decisions {
        let program = cfg.catalog.get(d.e);
        match &d.verdict {
            PathVerdict::Halts { oracle_prefix, value, steps, use_bound, .. } => {
                let out = program.run(u128::from(d.e), &mut &oracle_prefix.window(), *steps);
                if out.halted() != Some(*value) || out.steps != *steps || out.use_bound != *use_bound {
                    findings.push(format!("e = {}: halting certificate does not replay", d.e));
                }
                if !oracle_prefix.is_prefix_of(path) {
                    findings.push(format!("e = {}: path leaves the committed prefix", d.e));
                }
            }
            PathVerdict::Diverges { .. } => {
                if program.run(u128::from(d.e), &mut &path.window(), cfg.fuel).is_halted() {
                    findings.push(format!("e = {}: path makes a forced-divergent run halt", d.e));
                }
            }
        }
    }
    Ok(findings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::library;

    fn bs(s: &str) -> BitString {
        s.parse().unwrap()
    }

    fn strings(level: &Level) -> Vec<String> {
        level.nodes.iter().map(|n| n.to_string()).collect()
    }

    #[test]
    fn full_tree_level() {
        let l = tree_level(&TreePresentation::full(), 3, 24).unwrap();
        assert_eq!(l.nodes.len(), 8);
        assert_eq!(l.nodes[0], bs("000"));
    }

    #[test]
    fn no_adjacent_ones_level() {
        let l = tree_level(&TreePresentation::excluding(&["11"]), 3, 24).unwrap();
        assert_eq!(strings(&l), vec!["000", "001", "010", "100", "101"]);
        let p = TreePresentation::Program { program: library::decide_no_adjacent_ones(), oracle: None, fuel: 500 };
        assert_eq!(tree_level(&p, 3, 24).unwrap().nodes, l.nodes);
        let c = TreePresentation::Pi1Class {
            program: library::reject_adjacent_ones(),
            oracle: OracleWindow::empty(),
            fuel: 500,
        };
        assert_eq!(tree_level(&c, 3, 24).unwrap().nodes, l.nodes);
    }

    #[test]
    fn depth_cap_and_inconclusive() {
        assert_eq!(
            tree_level(&TreePresentation::full(), 25, 24),
            Err(ClassError::DepthTooLarge { depth: 25, max: 24 })
        );
        let p = TreePresentation::Program { program: library::diverge(), oracle: None, fuel: 10 };
        assert!(matches!(tree_level(&p, 1, 24), Err(ClassError::Inconclusive { .. })));
    }

    #[test]
    fn orphans_are_pruned_and_reported() {
        let mut levels = vec![BTreeSet::new(); 3];
        levels[0].insert(bs(""));
        levels[1].insert(bs("0"));
        levels[2].insert(bs("00"));
        levels[2].insert(bs("11"));
        let t = TreePresentation::Table { levels };
        let l = tree_level(&t, 2, 24).unwrap();
        assert_eq!(strings(&l), vec!["00"]);
        assert_eq!(l.orphans, vec![bs("11")]);
    }

    #[test]
    fn leftmost_paths() {
        assert_eq!(wkl_path_prefix(&TreePresentation::full(), 5, 4, 24).unwrap(), bs("00000"));
        assert_eq!(wkl_path_prefix(&TreePresentation::excluding(&["11"]), 6, 4, 24).unwrap(), bs("000000"));
        let alt = TreePresentation::excluding(&["00", "11", "01", "10"]);
        assert!(wkl_path_prefix(&alt, 2, 0, 24).is_err());
        let one_path = TreePresentation::from_leaves(8, [&bs("10101010")]);
        assert_eq!(wkl_path_prefix(&one_path, 5, 3, 24).unwrap(), bs("10101"));
    }

    #[test]
    fn lookahead_skips_dead_ends() {
        // 0-side dies at level 3, 1-side survives to 6
        let t = TreePresentation::from_leaves(6, [&bs("100000")]);
        let mut levels = match t {
            TreePresentation::Table { levels } => levels,
            _ => unreachable!(),
        };
        for d in 1..=3 {
            levels[d].insert(BitString::zeros(d));
        }
        let t = TreePresentation::Table { levels };
        assert_eq!(wkl_path_prefix(&t, 2, 0, 24).unwrap(), bs("00"));
        assert_eq!(wkl_path_prefix(&t, 2, 4, 24).unwrap(), bs("10"));
    }

    #[test]
    fn oracle_free_programs_decide_by_plain_halting() {
        let cfg = LowBasisConfig { catalog: Catalog::oracle_free(), ..Default::default() };
        let (path, log) = low_basis_path(&TreePresentation::full(), 7, 10, &cfg).unwrap();
        assert_eq!(path, BitString::zeros(10));
        let expected: Vec<bool> = (0..7)
            .map(|e| cfg.catalog.get(e).run(u128::from(e), &mut &OracleWindow::empty(), cfg.fuel).is_halted())
            .collect();
        let got: Vec<bool> = log.decisions.iter().map(|d| matches!(d.verdict, PathVerdict::Halts { .. })).collect();
        assert_eq!(got, expected);
        assert!(audit_low_basis(&TreePresentation::full(), &path, &log, &cfg).unwrap().is_empty());
    }

    #[test]
    fn single_path_tree_returns_it() {
        let leaf = bs("110100111010");
        let t = TreePresentation::from_leaves(12, [&leaf]);
        for e_bound in [0, 3, 8] {
            let (path, log) = low_basis_path(&t, e_bound, 12, &LowBasisConfig::default()).unwrap();
            assert_eq!(path, leaf);
            assert!(audit_low_basis(&t, &path, &log, &LowBasisConfig::default()).unwrap().is_empty());
        }
    }

    #[test]
    fn standard_catalog_forces_divergence_when_possible() {
        // Φ_0 halts on any nonempty oracle: divergence forces the all-zero path.
        let (path, log) = low_basis_path(&TreePresentation::full(), 1, 8, &LowBasisConfig::default()).unwrap();
        assert_eq!(path, BitString::zeros(8));
        assert_eq!(log.decisions[0].verdict, PathVerdict::Diverges { probe_depth: 8 });
        // Without the all-zero branch, Φ_0 must halt.
        let t = TreePresentation::from_leaves(4, [&bs("0100"), &bs("0010")]);
        let (path, log) = low_basis_path(&t, 1, 4, &LowBasisConfig::default()).unwrap();
        assert_eq!(path, bs("0010"));
        assert!(matches!(log.decisions[0].verdict, PathVerdict::Halts { use_bound: 3, .. }));
    }
}
