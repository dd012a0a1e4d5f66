//! Finite-depth approximations of effectively coded ω-models.
//!
//! A model is a bit string `σ` of length `depth`. Bit `⟨r, x⟩` of `σ` is
//! `W_r(x)`, so row `r` is known on `x < row_len(r, depth)`. Row indices
//! carry structure through triples `⟨a, b, c⟩ = 1 + ⟨a, ⟨b, c⟩⟩`:
//!
//! * row 0 is the base set `A`;
//! * row `⟨0, i, j⟩` is `W_i ⊕ W_j`;
//! * row `⟨1, e, i⟩` lies on the `e`th Π₁ class relative to `W_i` whenever
//!   that class has a node at the row's length;
//! * rows `⟨a, b, c⟩` with `a ≥ 2` form the derived-index region, filled on
//!   request by [`derived_index`], and are zero otherwise.
//!
//! The offset in the triple keeps `⟨0, 0, 0⟩` away from row 0.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::approx::SetPresentation;
use crate::catalog::Catalog;
use crate::classes::{
    leftmost_node, low_basis_path, tree_level, BitString, ClassError, LowBasisConfig, PathDecisionLog, TreePresentation,
};
use crate::machine::{library, OracleWindow};
use crate::pairing::{pair, try_pair, unpair};

pub fn triple(a: u128, b: u128, c: u128) -> u128 {
    1 + pair(a, pair(b, c))
}

pub fn untriple(r: u128) -> Option<(u128, u128, u128)> {
    if r == 0 {
        return None;
    }
    let (a, z) = unpair(r - 1);
    let (b, c) = unpair(z);
    Some((a, b, c))
}

/// Number of bits of row `r` inside a node of length `depth`.
pub fn row_len(r: u128, depth: usize) -> usize {
    let mut x = 0u128;
    while try_pair(r, x).is_some_and(|p| p < depth as u128) {
        x += 1;
    }
    x as usize
}

/// Rows with at least one bit below `depth` are `0..row_count(depth)`.
pub fn row_count(depth: usize) -> u128 {
    let mut r = 0u128;
    while row_len(r, depth) > 0 {
        r += 1;
    }
    r
}

/// Largest `b` such that rows `0..b` all know `0..b`.
pub fn square_bound(depth: usize) -> usize {
    let mut b = 0usize;
    while b * 2 * (b + 1) < depth {
        b += 1;
    }
    b
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", content = "args", rename_all = "snake_case")]
pub enum Operator {
    Join(u128, u128),
    Union(u128, u128),
    Intersect(u128, u128),
    Complement(u128),
    DropLeast(u128, u64),
}

impl Operator {
    pub fn operands(&self) -> Vec<u128> {
        match *self {
            Operator::Join(i, j) | Operator::Union(i, j) | Operator::Intersect(i, j) => vec![i, j],
            Operator::Complement(i) | Operator::DropLeast(i, _) => vec![i],
        }
    }

    /// Bit `x` of the result, from operand windows in [`Self::operands`]
    /// order; `None` when an operand window is too short.
    pub fn apply(&self, rows: &[Vec<bool>], x: usize) -> Option<bool> {
        let at = |k: usize, y: usize| rows[k].get(y).copied();
        match *self {
            Operator::Join(..) => at(x % 2, x / 2),
            Operator::Union(..) => Some(at(0, x)? || at(1, x)?),
            Operator::Intersect(..) => Some(at(0, x)? && at(1, x)?),
            Operator::Complement(_) => Some(!at(0, x)?),
            Operator::DropLeast(_, k) => {
                let bit = at(0, x)?;
                let below = rows[0][..x].iter().filter(|b| **b).count() as u64;
                Some(bit && below >= k)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowKind {
    Base,
    Join(u128, u128),
    Class { e: u128, i: u128 },
    Derived(Operator),
    Free,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("base window has {have} bits, the model needs {need}")]
    BaseWindowTooShort { need: usize, have: usize },
    #[error("row {index} has no bits at this depth")]
    InvalidIndex { index: u128 },
    #[error("no row realizes {op:?} on the window")]
    UnrealizedOperator { op: Operator },
    #[error("Π₁ class {e} relative to W_{i} is empty at the probe depth")]
    EmptyClass { e: u128, i: u128 },
    #[error("W_{index} has no element on the window")]
    EmptyWindow { index: u128 },
    #[error(transparent)]
    Class(#[from] ClassError),
}

/// Π₁ class programs: `e = 0` never rejects, `e = 1` rejects strings with
/// two adjacent ones, `e = 2` rejects everything; then the numbering.
pub fn class_catalog() -> Catalog {
    Catalog::explicit(vec![library::diverge(), library::reject_adjacent_ones(), library::reject_everything()])
        .with_numbering_tail()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub class_catalog: Catalog,
    pub class_fuel: u64,
    /// Requirement catalog for the low-basis decisions on class rows.
    pub low_catalog: Catalog,
    pub low_fuel: u64,
    pub low_e_bound: u64,
    /// Minimum number of compared bits for an existing row to count as
    /// realizing an operator, and minimum length of a derived row. The
    /// square bound of the depth is always enforced as well.
    pub min_match: usize,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            class_catalog: class_catalog(),
            class_fuel: 64,
            low_catalog: Catalog::standard(),
            low_fuel: 256,
            low_e_bound: 4,
            min_match: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DerivedEntry {
    pub row: u128,
    pub op: Operator,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LowRowLog {
    pub row: u128,
    pub log: PathDecisionLog,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodedModelApprox {
    pub base: SetPresentation,
    pub depth: usize,
    pub low: bool,
    pub config: ModelConfig,
    node: BitString,
    /// Rows of the derived region holding an operator result.
    derived: Vec<DerivedEntry>,
    /// Operator requests answered so far, with the index returned.
    realized: Vec<DerivedEntry>,
    /// Class rows whose class had no node at the row's length.
    empty_classes: Vec<u128>,
    low_logs: Vec<LowRowLog>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Membership {
    In,
    Out,
    BeyondWindow,
}

impl CodedModelApprox {
    pub fn node(&self) -> &BitString {
        &self.node
    }

    pub fn derived(&self) -> &[DerivedEntry] {
        &self.derived
    }

    pub fn realized(&self) -> &[DerivedEntry] {
        &self.realized
    }

    pub fn low_logs(&self) -> &[LowRowLog] {
        &self.low_logs
    }

    pub fn row_len(&self, r: u128) -> usize {
        row_len(r, self.depth)
    }

    pub fn row_count(&self) -> u128 {
        row_count(self.depth)
    }

    pub fn row(&self, r: u128) -> Vec<bool> {
        (0..self.row_len(r) as u128).map(|x| self.node.0[pair(r, x) as usize]).collect()
    }

    fn set_row(&mut self, r: u128, bits: &[bool]) {
        for (x, &b) in bits.iter().enumerate() {
            self.node.0[pair(r, x as u128) as usize] = b;
        }
    }

    pub fn kind(&self, r: u128) -> RowKind {
        if r == 0 {
            return RowKind::Base;
        }
        if let Some(d) = self.derived.iter().find(|d| d.row == r) {
            return RowKind::Derived(d.op);
        }
        match untriple(r) {
            Some((0, i, j)) => RowKind::Join(i, j),
            Some((1, e, i)) => RowKind::Class { e, i },
            _ => RowKind::Free,
        }
    }

    fn class_tree(&self, e: u128, i: u128) -> TreePresentation {
        let program = match u64::try_from(e) {
            Ok(e) => self.config.class_catalog.get(e),
            Err(_) => library::diverge(),
        };
        TreePresentation::Pi1Class { program, oracle: OracleWindow::new(self.row(i)), fuel: self.config.class_fuel }
    }

    /// Recomputes rows `from..` in index order.
    fn fill_rows(&mut self, from: u128) -> Result<(), ModelError> {
        self.empty_classes.retain(|&r| r < from);
        self.low_logs.retain(|l| l.row < from);
        for r in from..self.row_count() {
            let len = self.row_len(r);
            let bits: Vec<bool> = match self.kind(r) {
                RowKind::Base => self.base.window.bits()[..len].to_vec(),
                RowKind::Join(i, j) => {
                    let rows = [self.row(i), self.row(j)];
                    (0..len).map(|x| Operator::Join(i, j).apply(&rows, x).unwrap_or(false)).collect()
                }
                RowKind::Derived(op) => {
                    let rows: Vec<Vec<bool>> = op.operands().iter().map(|&o| self.row(o)).collect();
                    (0..len).map(|x| op.apply(&rows, x).unwrap_or(false)).collect()
                }
                RowKind::Class { e, i } => self.class_row(r, e, i, len)?,
                RowKind::Free => vec![false; len],
            };
            self.set_row(r, &bits);
        }
        Ok(())
    }

    fn class_row(&mut self, r: u128, e: u128, i: u128, len: usize) -> Result<Vec<bool>, ModelError> {
        let tree = self.class_tree(e, i);
        let found = if self.low {
            let cfg =
                LowBasisConfig { catalog: self.config.low_catalog.clone(), fuel: self.config.low_fuel, max_depth: len };
            match low_basis_path(&tree, self.config.low_e_bound, len, &cfg) {
                Ok((path, log)) => {
                    self.low_logs.push(LowRowLog { row: r, log });
                    Some(path)
                }
                Err(ClassError::EmptyLevel { .. }) => None,
                Err(err) => return Err(err.into()),
            }
        } else {
            leftmost_node(&tree, len)?
        };
        Ok(match found {
            Some(path) => path.0,
            None => {
                self.empty_classes.push(r);
                vec![false; len]
            }
        })
    }
}

/// Builds the leftmost node of length `depth` of the model tree over `a`;
/// with `low`, class rows are chosen by low-basis forcing.
pub fn build_model(
    a: &SetPresentation,
    depth: usize,
    low: bool,
    config: ModelConfig,
) -> Result<CodedModelApprox, ModelError> {
    let need = row_len(0, depth);
    if a.bound() < need {
        return Err(ModelError::BaseWindowTooShort { need, have: a.bound() });
    }
    let mut m = CodedModelApprox {
        base: a.clone(),
        depth,
        low,
        config,
        node: BitString::zeros(depth),
        derived: Vec::new(),
        realized: Vec::new(),
        empty_classes: Vec::new(),
        low_logs: Vec::new(),
    };
    m.fill_rows(0)?;
    Ok(m)
}

/// Builds a model whose base set is row `row` of `outer`.
pub fn build_nested(
    outer: &CodedModelApprox,
    row: u128,
    depth: usize,
    low: bool,
    config: ModelConfig,
) -> Result<CodedModelApprox, ModelError> {
    let base = SetPresentation::from_table(&format!("W_{row} of model over {}", outer.base.name), outer.row(row));
    build_model(&base, depth, low, config)
}

pub fn model_member(m: &CodedModelApprox, i: u128, n: u64) -> Membership {
    match try_pair(i, u128::from(n)) {
        Some(p) if p < m.depth as u128 => {
            if m.node.0[p as usize] {
                Membership::In
            } else {
                Membership::Out
            }
        }
        _ => Membership::BeyondWindow,
    }
}

/// Re-checks the node conditions without reusing the builder: base row
/// against the presentation, join rows bit by bit, class rows by tree
/// membership (or emptiness of the class level), derived rows and answered
/// operator requests by recomputation.
pub fn audit(m: &CodedModelApprox) -> Result<Vec<String>, ModelError> {
    let mut findings = Vec::new();
    if !m.base.audit() {
        findings.push(format!("base presentation {} does not match its decider", m.base.name));
    }
    let bit = |i: u128, n: usize| match model_member(m, i, n as u64) {
        Membership::In => Some(true),
        Membership::Out => Some(false),
        Membership::BeyondWindow => None,
    };
    for r in 0..m.row_count() {
        let len = m.row_len(r);
        let row: Vec<bool> = (0..len).map(|x| bit(r, x).unwrap()).collect();
        match m.kind(r) {
            RowKind::Base => {
                for (x, &b) in row.iter().enumerate() {
                    if m.base.contains(x as u64) != Some(b) {
                        findings.push(format!("row 0 disagrees with the base set at {x}"));
                    }
                }
            }
            RowKind::Join(i, j) => {
                for (x, &b) in row.iter().enumerate() {
                    let src = if x % 2 == 0 { bit(i, x / 2) } else { bit(j, x / 2) };
                    if src != Some(b) {
                        findings.push(format!("join row {r} = ⟨0,{i},{j}⟩ wrong at {x}"));
                    }
                }
            }
            RowKind::Class { e, i } => {
                let tree = m.class_tree(e, i);
                if !tree.member(&BitString(row.clone()))? && !tree_level(&tree, len, len)?.nodes.is_empty() {
                    findings.push(format!("class row {r} = ⟨1,{e},{i}⟩ leaves a nonempty class"));
                }
            }
            RowKind::Derived(op) => {
                if !realizes(m, r, op, len) {
                    findings.push(format!("derived row {r} does not realize {op:?}"));
                }
            }
            RowKind::Free => {}
        }
    }
    for d in &m.realized {
        if !matches!(d.op, Operator::Join(..)) && !realizes(m, d.row, d.op, square_bound(m.depth)) {
            findings.push(format!("index {} no longer realizes {:?}", d.row, d.op));
        }
    }
    Ok(findings)
}

/// Violations of `W_⟨0,i,j⟩(2n) = W_i(n)`, `W_⟨0,i,j⟩(2n+1) = W_j(n)` for
/// `i, j < range`, read through [`model_member`] only.
pub fn join_law_violations(m: &CodedModelApprox, range: u128) -> Vec<String> {
    let mut out = Vec::new();
    for i in 0..range {
        for j in 0..range {
            let k = triple(0, i, j);
            for n in 0..(m.row_len(k) as u64).div_ceil(2) {
                for (side, src) in [(0, i), (1, j)] {
                    let lhs = model_member(m, k, 2 * n + side);
                    if lhs != Membership::BeyondWindow && lhs != model_member(m, src, n) {
                        out.push(format!("join ({i}, {j}) fails at {}", 2 * n + side));
                    }
                }
            }
        }
    }
    out
}

/// Whether row `r` agrees with `op` on every bit where both are known,
/// with at least `min_bits` bits compared.
fn realizes(m: &CodedModelApprox, r: u128, op: Operator, min_bits: usize) -> bool {
    let rows: Vec<Vec<bool>> = op.operands().iter().map(|&o| m.row(o)).collect();
    let row = m.row(r);
    let mut compared = 0;
    for (x, &b) in row.iter().enumerate() {
        match op.apply(&rows, x) {
            Some(v) if v == b => compared += 1,
            Some(_) => return false,
            None => break,
        }
    }
    compared >= min_bits
}

/// An index realizing `op` on the window: `⟨0,i,j⟩` for joins; otherwise the
/// least built row that matches, else a fresh row of the derived region.
pub fn derived_index(m: &mut CodedModelApprox, op: Operator) -> Result<u128, ModelError> {
    for o in op.operands() {
        if m.row_len(o) == 0 {
            return Err(ModelError::InvalidIndex { index: o });
        }
    }
    if let Operator::Join(i, j) = op {
        let r = triple(0, i, j);
        m.realized.push(DerivedEntry { row: r, op });
        return Ok(r);
    }
    let min = m.config.min_match.max(square_bound(m.depth));
    let found = (0..m.row_count()).find(|&r| m.kind(r) != RowKind::Free && realizes(m, r, op, min));
    if let Some(r) = found {
        m.realized.push(DerivedEntry { row: r, op });
        return Ok(r);
    }
    let top = op.operands().into_iter().max().unwrap_or(0);
    let slot = (top + 1..m.row_count())
        .take_while(|&r| m.row_len(r) >= min.max(1))
        .find(|&r| m.kind(r) == RowKind::Free)
        .ok_or(ModelError::UnrealizedOperator { op })?;
    m.derived.push(DerivedEntry { row: slot, op });
    m.fill_rows(slot)?;
    m.realized.push(DerivedEntry { row: slot, op });
    Ok(slot)
}

/// `⟨1, e, i⟩`, after checking that the class has a node at the row's
/// length (or at the length of `W_i` when the row is beyond the node).
pub fn class_member_index(m: &CodedModelApprox, e: u128, i: u128) -> Result<u128, ModelError> {
    if m.row_len(i) == 0 {
        return Err(ModelError::InvalidIndex { index: i });
    }
    let r = triple(1, e, i);
    if m.empty_classes.contains(&r) {
        return Err(ModelError::EmptyClass { e, i });
    }
    if m.row_len(r) == 0 {
        let probe = m.row_len(i).min(crate::classes::DEFAULT_MAX_DEPTH);
        if leftmost_node(&m.class_tree(e, i), probe)?.is_none() {
            return Err(ModelError::EmptyClass { e, i });
        }
    }
    Ok(r)
}

/// Quantifier-free formulas in one variable `n` over the model's rows.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Formula {
    True,
    Member(u128),
    Even,
    Lt(u64),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
}

impl Formula {
    /// Value at `n`; `None` when some membership is beyond the window.
    pub fn eval(&self, m: &CodedModelApprox, n: u64) -> Option<bool> {
        Some(match self {
            Formula::True => true,
            Formula::Member(i) => match model_member(m, *i, n) {
                Membership::In => true,
                Membership::Out => false,
                Membership::BeyondWindow => return None,
            },
            Formula::Even => n % 2 == 0,
            Formula::Lt(k) => n < *k,
            Formula::Not(a) => !a.eval(m, n)?,
            Formula::And(a, b) => a.eval(m, n)? && b.eval(m, n)?,
            Formula::Or(a, b) => a.eval(m, n)? || b.eval(m, n)?,
            Formula::Implies(a, b) => !a.eval(m, n)? || b.eval(m, n)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Pi1Verdict {
    /// No counterexample below `checked`; provisional.
    True {
        checked: u64,
    },
    False {
        witness: u64,
    },
}

/// Truth of `∀n φ(n)`: searches for a counterexample below `probe`,
/// stopping early where `φ` leaves the window.
pub fn pi1_truth(m: &CodedModelApprox, phi: &Formula, probe: u64) -> Pi1Verdict {
    for n in 0..probe {
        match phi.eval(m, n) {
            Some(true) => {}
            Some(false) => return Pi1Verdict::False { witness: n },
            None => return Pi1Verdict::True { checked: n },
        }
    }
    Pi1Verdict::True { checked: probe }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    IntersectSide,
    ComplementSide,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pi2Selection {
    pub side: Side,
    /// `(n, k)` found by the search: no element of `W_i` at or beyond `n`
    /// has `W_j = 1 - k`.
    pub witness: Option<(u64, u8)>,
    /// The search found nothing and the complement side was taken.
    pub defaulted: bool,
    pub cut_points_tried: u64,
    /// Elements of `W_i` at or beyond the caller's bound on each side.
    pub on_side: u64,
    pub off_side: u64,
}

/// Chooses the side of `W_j` on which `W_i` stays infinite, from windows.
///
/// The search tries cut points `n = 0, 1, …` (at most `fuel` of them, and
/// only while a quarter of the window remains beyond `n`) for `k ∈ {0, 1}`.
/// `k = 0` means `W_i ∩ W_j` looks finite, so the complement side is taken;
/// `k = 1` selects the intersection side.
pub fn pi2_select_windows(wi: &[bool], wj: &[bool], beyond: u64, fuel: u64) -> Result<Pi2Selection, ModelError> {
    let len = wi.len().min(wj.len());
    if !wi[..len].iter().any(|b| *b) {
        return Err(ModelError::EmptyWindow { index: 0 });
    }
    // last position of W_i with W_j = 1 - k, for k = 0, 1
    let last = |k: bool| (0..len).rev().find(|&m| wi[m] && wj[m] != k);
    let tail_clear_from = [last(false), last(true)].map(|l| l.map_or(0, |m| m + 1));
    let cut_limit = ((len - len / 4) as u64).min(fuel);
    let mut witness = None;
    let mut tried = 0;
    'search: for n in 0..cut_limit {
        tried = n + 1;
        for k in 0..2u8 {
            if tail_clear_from[k as usize] as u64 <= n {
                witness = Some((n, k));
                break 'search;
            }
        }
    }
    let side = match witness {
        Some((_, 1)) => Side::IntersectSide,
        _ => Side::ComplementSide,
    };
    let count = |want: bool| (beyond as usize..len).filter(|&m| wi[m] && wj[m] == want).count() as u64;
    let (on_side, off_side) = match side {
        Side::IntersectSide => (count(true), count(false)),
        Side::ComplementSide => (count(false), count(true)),
    };
    Ok(Pi2Selection { side, witness, defaulted: witness.is_none(), cut_points_tried: tried, on_side, off_side })
}

pub fn pi2_select(m: &CodedModelApprox, i: u128, j: u128, fuel: u64) -> Result<Pi2Selection, ModelError> {
    pi2_select_windows(&m.row(i), &m.row(j), 0, fuel).map_err(|err| match err {
        ModelError::EmptyWindow { .. } => ModelError::EmptyWindow { index: i },
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn evens_model(depth: usize) -> CodedModelApprox {
        build_model(&SetPresentation::evens(64), depth, false, ModelConfig::default()).unwrap()
    }

    fn members(m: &CodedModelApprox, r: u128) -> Vec<u64> {
        m.row(r).iter().enumerate().filter(|(_, b)| **b).map(|(x, _)| x as u64).collect()
    }

    #[test]
    fn row_geometry() {
        assert_eq!(square_bound(200), 10);
        assert_eq!(row_len(0, 200), 19);
        assert!((0..10).all(|r| row_len(r, 200) >= 10));
        assert!(row_len(10, 200) < 10 || row_len(9, 200) < 11);
        assert_eq!(triple(0, 0, 0), 1);
        assert_eq!(untriple(triple(3, 4, 5)), Some((3, 4, 5)));
        assert_eq!(row_count(200), 20);
    }

    #[test]
    fn base_row_is_the_base_set() {
        let m = evens_model(200);
        for k in 0..19 {
            let want = if k % 2 == 0 { Membership::In } else { Membership::Out };
            assert_eq!(model_member(&m, 0, k), want);
        }
        assert_eq!(model_member(&m, 0, 19), Membership::BeyondWindow);
        assert_eq!(model_member(&m, 0, 4), Membership::In);
        assert_eq!(model_member(&m, 0, 3), Membership::Out);
        assert!(audit(&m).unwrap().is_empty());
        assert!(join_law_violations(&m, 6).is_empty());
    }

    #[test]
    fn short_base_window_is_rejected() {
        let err = build_model(&SetPresentation::evens(10), 200, false, ModelConfig::default()).unwrap_err();
        assert_eq!(err, ModelError::BaseWindowTooShort { need: 19, have: 10 });
    }

    #[test]
    fn join_of_base_with_itself() {
        let mut m = evens_model(200);
        let r = derived_index(&mut m, Operator::Join(0, 0)).unwrap();
        assert_eq!(r, triple(0, 0, 0));
        for (x, b) in m.row(r).iter().enumerate() {
            assert_eq!(*b, (x / 2) % 2 == 0);
        }
    }

    #[test]
    fn derived_operators() {
        let mut m = evens_model(300);
        let drop = derived_index(&mut m, Operator::DropLeast(0, 3)).unwrap();
        let got = members(&m, drop);
        assert_eq!(got[0], 6);
        assert!(got.iter().all(|x| x % 2 == 0 && *x >= 6));
        let comp = derived_index(&mut m, Operator::Complement(0)).unwrap();
        assert!(m.row(comp).iter().enumerate().all(|(x, b)| *b == (x % 2 == 1)));
        let union = derived_index(&mut m, Operator::Union(0, comp)).unwrap();
        assert!(m.row(union).iter().all(|b| *b));
        assert!(audit(&m).unwrap().is_empty());
        assert!(matches!(derived_index(&mut m, Operator::Complement(10_000)), Err(ModelError::InvalidIndex { .. })));
    }

    #[test]
    fn class_rows() {
        let m = evens_model(200);
        // always-true class: any row works
        assert_eq!(class_member_index(&m, 0, 0).unwrap(), triple(1, 0, 0));
        let r = class_member_index(&m, 1, 0).unwrap();
        let row = m.row(r);
        assert!(!row.is_empty());
        assert!(row.windows(2).all(|w| !(w[0] && w[1])));
        assert_eq!(class_member_index(&m, 2, 0), Err(ModelError::EmptyClass { e: 2, i: 0 }));
    }

    #[test]
    fn low_build_passes_audit() {
        let m = build_model(&SetPresentation::primes(64), 200, true, ModelConfig::default()).unwrap();
        assert!(audit(&m).unwrap().is_empty());
        assert!(!m.low_logs().is_empty());
    }

    #[test]
    fn nested_model_passes_audit() {
        let outer = evens_model(400);
        let inner = build_nested(&outer, 0, 200, false, ModelConfig::default()).unwrap();
        assert!(audit(&inner).unwrap().is_empty());
        assert_eq!(inner.row(0), outer.row(0)[..19].to_vec());
    }

    #[test]
    fn pi1_examples() {
        let m = evens_model(200);
        let evens_only = Formula::Implies(Box::new(Formula::Member(0)), Box::new(Formula::Even));
        assert!(matches!(pi1_truth(&m, &evens_only, 100), Pi1Verdict::True { .. }));
        assert_eq!(pi1_truth(&m, &Formula::Member(0), 100), Pi1Verdict::False { witness: 1 });
    }

    #[test]
    fn pi2_examples() {
        let all = vec![true; 64];
        let small: Vec<bool> = (0..64).map(|x| x < 3).collect();
        let sel = pi2_select_windows(&all, &small, 0, 1000).unwrap();
        assert_eq!(sel.side, Side::ComplementSide);
        assert_eq!(sel.witness, Some((3, 0)));

        let evens: Vec<bool> = (0..64).map(|x| x % 2 == 0).collect();
        let sel = pi2_select_windows(&all, &evens, 0, 1000).unwrap();
        assert!(sel.on_side >= 16);

        let fours: Vec<bool> = (0..64).map(|x| x % 4 == 0).collect();
        let sel = pi2_select_windows(&evens, &fours, 0, 1000).unwrap();
        assert!(sel.on_side >= 8);

        let cofinite: Vec<bool> = (0..64).map(|x| x >= 5).collect();
        let sel = pi2_select_windows(&all, &cofinite, 0, 1000).unwrap();
        assert_eq!(sel.side, Side::IntersectSide);

        assert!(pi2_select_windows(&[false; 8], &evens, 0, 10).is_err());
    }

    #[test]
    fn serde_round_trip() {
        let mut m = evens_model(200);
        derived_index(&mut m, Operator::Complement(0)).unwrap();
        let json = serde_json::to_string(&m).unwrap();
        let back: CodedModelApprox = serde_json::from_str(&json).unwrap();
        assert_eq!(back, m);
    }
}
