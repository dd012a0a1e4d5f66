//! Conditions, the extension order, fallowness and the partition question.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::coloring::{Coloring, ColoringError, FnColoring};

/// A condition `(F⁰, …, F^{k-1}, I)` with the reservoir kept as the list of
/// its elements below the instance window. COH and EM conditions have one
/// finite part.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Condition {
    pub parts: Vec<Vec<u64>>,
    pub reservoir: Vec<u64>,
}

impl Condition {
    pub fn new(parts: usize, reservoir: Vec<u64>) -> Self {
        Condition { parts: vec![Vec::new(); parts], reservoir }
    }

    pub fn max_fixed(&self) -> Option<u64> {
        self.parts.iter().filter_map(|p| p.last().copied()).max()
    }

    /// `max F^i < min I` for every part.
    pub fn separated(&self) -> bool {
        match (self.max_fixed(), self.reservoir.first()) {
            (Some(f), Some(&i)) => f < i,
            _ => true,
        }
    }

    pub fn union_parts(&self) -> Vec<u64> {
        let mut all: Vec<u64> = self.parts.concat();
        all.sort_unstable();
        all.dedup();
        all
    }

    /// Adds `extension` to part `i` and drops reservoir elements `<= cut`.
    pub fn extend(&mut self, i: usize, extension: &[u64], cut: Option<u64>) {
        self.parts[i].extend_from_slice(extension);
        self.parts[i].sort_unstable();
        self.parts[i].dedup();
        if let Some(cut) = cut {
            self.reservoir.retain(|&z| z > cut);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Extends {
    Holds,
    Fails(String),
    /// Conditions of different shapes.
    Inconclusive(String),
}

impl Extends {
    pub fn holds(&self) -> bool {
        matches!(self, Extends::Holds)
    }
}

fn subset(a: &[u64], b: &[u64]) -> bool {
    a.iter().all(|x| b.binary_search(x).is_ok())
}

/// `p ⪯ q`: each `F^i_p ⊇ F^i_q` with the new elements taken from `I_q`,
/// and `I_p ⊆ I_q`.
pub fn extends(p: &Condition, q: &Condition) -> Extends {
    if p.parts.len() != q.parts.len() {
        return Extends::Inconclusive(format!("{} parts against {}", p.parts.len(), q.parts.len()));
    }
    for (i, (fp, fq)) in p.parts.iter().zip(&q.parts).enumerate() {
        if !subset(fq, fp) {
            return Extends::Fails(format!("part {i} lost elements"));
        }
        let new: Vec<u64> = fp.iter().filter(|x| fq.binary_search(x).is_err()).copied().collect();
        if !subset(&new, &q.reservoir) {
            return Extends::Fails(format!("part {i} gained elements outside the reservoir"));
        }
    }
    if !subset(&p.reservoir, &q.reservoir) {
        return Extends::Fails("reservoir grew".into());
    }
    Extends::Holds
}

/// Colors of pairs inside `[0, size)`, precomputed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColorTable {
    pub colors: u8,
    pub size: u64,
    /// `rows[x][y - x - 1] = c(x, y)`.
    pub rows: Vec<Vec<u8>>,
}

impl ColorTable {
    pub fn from_coloring(c: &Coloring, size: u64) -> Result<Self, ColoringError> {
        match c.to_table(size)? {
            Coloring::Table { colors, size, rows } => Ok(ColorTable { colors, size, rows }),
            _ => unreachable!("to_table returns a table"),
        }
    }

    pub fn get(&self, x: u64, y: u64) -> u8 {
        debug_assert!(x < y && y < self.size);
        self.rows[x as usize][(y - x - 1) as usize]
    }

    /// The table as a coloring, carrying `bound` when one is declared.
    pub fn to_coloring(&self, bound: Option<u64>) -> Coloring {
        match bound {
            None => Coloring::Table { colors: self.colors, size: self.size, rows: self.rows.clone() },
            Some(b) => {
                let table = Arc::new(self.clone());
                Coloring::Fn(FnColoring::new("table", self.colors, move |x, y| table.get(x, y)).with_bound(b))
            }
        }
    }
}

/// Least (in lexicographic order of increasing lists) `D ⊆ candidates` with
/// `|D| = need` and `fixed ∪ D` fallow, within `node_cap` steps. `fixed` is
/// assumed fallow and below every candidate.
pub fn fallow_extension(
    color: &dyn Fn(u64, u64) -> u8,
    fixed: &[u64],
    candidates: &[u64],
    need: usize,
    node_cap: u64,
) -> Option<Vec<u64>> {
    fn grow(
        color: &dyn Fn(u64, u64) -> u8,
        set: &mut Vec<u64>,
        candidates: &[u64],
        need: usize,
        nodes: &mut u64,
        cap: u64,
    ) -> bool {
        if need == 0 {
            return true;
        }
        for (k, &z) in candidates.iter().enumerate() {
            if *nodes >= cap {
                return false;
            }
            *nodes += 1;
            let ok = set.iter().enumerate().all(|(a, &x)| {
                let cxz = color(x, z);
                set[a + 1..].iter().all(|&y| cxz == color(x, y) || cxz == color(y, z))
            });
            if ok {
                set.push(z);
                if grow(color, set, &candidates[k + 1..], need - 1, nodes, cap) {
                    return true;
                }
                set.pop();
            }
        }
        false
    }
    let mut set = fixed.to_vec();
    let mut nodes = 0;
    grow(color, &mut set, candidates, need, &mut nodes, node_cap).then(|| set[fixed.len()..].to_vec())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Fallow {
    Fallow,
    /// Least triple `x < y < z` with `c(x, z) ∉ {c(x, y), c(y, z)}`.
    Violation {
        x: u64,
        y: u64,
        z: u64,
    },
}

/// Least violating triple of a sorted set under `color`.
pub fn fallow_violation(color: impl Fn(u64, u64) -> u8, s: &[u64]) -> Option<(u64, u64, u64)> {
    for (a, &x) in s.iter().enumerate() {
        for (b, &y) in s.iter().enumerate().skip(a + 1) {
            let cxy = color(x, y);
            for &z in &s[b + 1..] {
                let cxz = color(x, z);
                if cxz != cxy && cxz != color(y, z) {
                    return Some((x, y, z));
                }
            }
        }
    }
    None
}

pub fn fallow_check(c: &Coloring, s: &[u64]) -> Result<Fallow, ColoringError> {
    let mut sorted = s.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    for (a, &x) in sorted.iter().enumerate() {
        for (b, &y) in sorted.iter().enumerate().skip(a + 1) {
            let cxy = c.color(x, y)?;
            for &z in &sorted[b + 1..] {
                let cxz = c.color(x, z)?;
                if cxz != cxy && cxz != c.color(y, z)? {
                    return Ok(Fallow::Violation { x, y, z });
                }
            }
        }
    }
    Ok(Fallow::Fallow)
}

/// Upward closure of `good` over subsets of a `t`-element universe.
pub fn upward_closure(good: &[bool], t: usize) -> Vec<bool> {
    let mut up = good.to_vec();
    for bit in 0..t {
        let b = 1usize << bit;
        for mask in 0..up.len() {
            if mask & b != 0 && up[mask ^ b] {
                up[mask] = true;
            }
        }
    }
    up
}

/// A partition of `universe` into `k` ordered parts with part `i`
/// incompatible for `i` (that is, `!compatible(i, part)`), if one exists.
/// Incompatibility is assumed downward closed.
pub fn incompatible_partition(
    universe: usize,
    k: usize,
    compatible: &dyn Fn(usize, usize) -> bool,
) -> Option<Vec<usize>> {
    fn cover(i: usize, k: usize, mask: usize, compatible: &dyn Fn(usize, usize) -> bool) -> Option<Vec<usize>> {
        if i + 1 == k {
            return (!compatible(i, mask)).then(|| vec![mask]);
        }
        // every submask of `mask`, largest first
        let mut sub = mask;
        loop {
            if !compatible(i, sub) {
                if let Some(mut rest) = cover(i + 1, k, mask & !sub, compatible) {
                    rest.insert(0, sub);
                    return Some(rest);
                }
            }
            if sub == 0 {
                return None;
            }
            sub = (sub - 1) & mask;
        }
    }
    cover(0, k, universe, compatible)
}

/// Submasks of `mask` ordered by size, then numerically.
pub fn submasks_by_size(mask: usize) -> Vec<usize> {
    let mut subs = Vec::new();
    let mut sub = mask;
    loop {
        subs.push(sub);
        if sub == 0 {
            break;
        }
        sub = (sub - 1) & mask;
    }
    subs.sort_by_key(|s| (s.count_ones(), *s));
    subs
}

/// Largest `t <= len` with `k^t <= partition_cap` and `2^t <= subset_cap`.
pub fn question_horizon(len: usize, k: u32, partition_cap: u64, subset_cap: u64) -> usize {
    let mut t = 0usize;
    while t < len
        && u64::from(k).checked_pow(t as u32 + 1).is_some_and(|p| p <= partition_cap)
        && 2u64.checked_pow(t as u32 + 1).is_some_and(|p| p <= subset_cap)
    {
        t += 1;
    }
    t
}
