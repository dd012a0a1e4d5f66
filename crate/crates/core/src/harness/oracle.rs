//! Exhaustive ground-truth oracles. Each works on its own copy of the
//! instance and shares no search code with the constructions.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::approx::{limit_value, ApproxError, Delta2Presentation, Limit, SetPresentation};
use crate::coloring::{Coloring, ColoringError};

/// Largest domain the subset searches accept.
pub const SUBSET_CAP: u64 = 20;
/// Search nodes allowed before the subset searches give up.
pub const NODE_CAP: u64 = 50_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("refused: domain {bound} exceeds the exhaustive cap {cap}")]
    TooLarge { bound: u64, cap: u64 },
    #[error("refused: search passed {cap} nodes without finishing")]
    NodeCap { cap: u64 },
    #[error("point {n} has no limit within {budget} stages")]
    NoLimit { n: u64, budget: u64 },
    #[error(transparent)]
    Coloring(#[from] ColoringError),
    #[error(transparent)]
    Approx(#[from] ApproxError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleKind {
    Homogeneous,
    Fallow,
    D2Subset,
    CohesiveCheck,
}

/// Exceptions of `C` against one set of the family.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exceptions {
    pub set: usize,
    /// `C ∖ R_e`.
    pub outside: Vec<u64>,
    /// `C ∖ R_e^c`.
    pub inside: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Optimum {
    /// A largest set with the property, and its color when homogeneous.
    Set {
        members: Vec<u64>,
        color: Option<u8>,
    },
    /// Limit part of each point.
    Parts {
        limits: Vec<u8>,
    },
    Exceptions(Vec<Exceptions>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleReport {
    pub kind: OracleKind,
    pub optimum: Optimum,
    pub size: usize,
    pub method: String,
}

/// The coloring restricted to sorted `points`, by position.
struct Table {
    points: Vec<u64>,
    n: usize,
    c: Vec<Vec<u8>>,
}

impl Table {
    fn of(col: &Coloring, points: &[u64]) -> Result<Self, OracleError> {
        let mut points = points.to_vec();
        points.sort_unstable();
        points.dedup();
        let n = points.len();
        if n as u64 > SUBSET_CAP {
            return Err(OracleError::TooLarge { bound: n as u64, cap: SUBSET_CAP });
        }
        let mut c = vec![vec![0u8; n]; n];
        for x in 0..n {
            for y in x + 1..n {
                c[x][y] = col.color(points[x], points[y])?;
            }
        }
        Ok(Table { points, n, c })
    }

    fn lift(&self, s: &[usize]) -> Vec<u64> {
        s.iter().map(|&i| self.points[i]).collect()
    }
}

/// Extends `chosen` by candidates above `from`; `admits(chosen, z)` says
/// whether `z` may go on top. Keeps the first strictly largest set found.
fn grow(
    chosen: &mut Vec<usize>,
    from: usize,
    n: usize,
    admits: &dyn Fn(&[usize], usize) -> bool,
    best: &mut Vec<usize>,
    nodes: &mut u64,
) -> Result<(), OracleError> {
    *nodes += 1;
    if *nodes > NODE_CAP {
        return Err(OracleError::NodeCap { cap: NODE_CAP });
    }
    if chosen.len() > best.len() {
        *best = chosen.clone();
    }
    for z in from..n {
        if chosen.len() + (n - z) <= best.len() {
            break;
        }
        if admits(chosen, z) {
            chosen.push(z);
            grow(chosen, z + 1, n, admits, best, nodes)?;
            chosen.pop();
        }
    }
    Ok(())
}

/// A largest monochromatic subset of `[0, bound)`.
pub fn homogeneous(col: &Coloring, bound: u64) -> Result<OracleReport, OracleError> {
    homogeneous_among(col, &(0..bound).collect::<Vec<_>>())
}

/// A largest monochromatic subset of `points`.
pub fn homogeneous_among(col: &Coloring, points: &[u64]) -> Result<OracleReport, OracleError> {
    let t = Table::of(col, points)?;
    let mut nodes = 0;
    let mut best: (Vec<usize>, Option<u8>) = (Vec::new(), None);
    for i in 0..col.colors() {
        let admits = |s: &[usize], z: usize| s.iter().all(|&x| t.c[x][z] == i);
        let mut found = Vec::new();
        grow(&mut Vec::new(), 0, t.n, &admits, &mut found, &mut nodes)?;
        if found.len() > best.0.len() {
            best = (found, Some(i));
        }
    }
    // fewer than two points have no color to speak of
    let color = if best.0.len() >= 2 { best.1 } else { None };
    let members = t.lift(&best.0);
    Ok(OracleReport {
        kind: OracleKind::Homogeneous,
        size: members.len(),
        optimum: Optimum::Set { members, color },
        method: format!("branch and bound over subsets of {} points per color, {nodes} nodes", t.n),
    })
}

/// A largest subset of `[0, bound)` with no triple `x < y < z` where
/// `c(x, z) ∉ {c(x, y), c(y, z)}`.
pub fn fallow(col: &Coloring, bound: u64) -> Result<OracleReport, OracleError> {
    fallow_among(col, &(0..bound).collect::<Vec<_>>())
}

/// A largest fallow subset of `points`.
pub fn fallow_among(col: &Coloring, points: &[u64]) -> Result<OracleReport, OracleError> {
    let t = Table::of(col, points)?;
    let admits = |s: &[usize], z: usize| {
        s.iter().enumerate().all(|(a, &x)| s[a + 1..].iter().all(|&y| t.c[x][z] == t.c[x][y] || t.c[x][z] == t.c[y][z]))
    };
    let (mut best, mut nodes) = (Vec::new(), 0);
    grow(&mut Vec::new(), 0, t.n, &admits, &mut best, &mut nodes)?;
    let members = t.lift(&best);
    Ok(OracleReport {
        kind: OracleKind::Fallow,
        size: members.len(),
        optimum: Optimum::Set { members, color: None },
        method: format!("branch and bound over subsets of {} points, {nodes} nodes", t.n),
    })
}

/// Limit part of every point below `range`: the last stage of each table
/// row, or the settled value within `budget` stages for programs.
pub fn d2_subset(d: &Delta2Presentation, range: u64, budget: u64) -> Result<OracleReport, OracleError> {
    let mut limits = Vec::with_capacity(range as usize);
    for n in 0..range {
        let value = match d.max_stage(n) {
            Some(top) => d.eval(n, top)?,
            None => match limit_value(d, n, budget)? {
                Limit::Value { value, .. } => value,
                Limit::Unstable => return Err(OracleError::NoLimit { n, budget }),
            },
        };
        limits.push(value);
    }
    Ok(OracleReport {
        kind: OracleKind::D2Subset,
        size: limits.len(),
        optimum: Optimum::Parts { limits },
        method: format!("limit of every row below {range} at its full length"),
    })
}

/// Exceptions of the finite set `c` against each set of the family.
pub fn cohesive_check(c: &[u64], family: &[SetPresentation]) -> OracleReport {
    let table = family
        .iter()
        .enumerate()
        .map(|(e, r)| Exceptions {
            set: e,
            outside: c.iter().copied().filter(|&x| r.contains(x) != Some(true)).collect(),
            inside: c.iter().copied().filter(|&x| r.contains(x) != Some(false)).collect(),
        })
        .collect();
    OracleReport {
        kind: OracleKind::CohesiveCheck,
        size: c.len(),
        optimum: Optimum::Exceptions(table),
        method: format!("membership of {} points in {} sets", c.len(), family.len()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forcing::{fallow_check, Fallow};

    fn members(r: &OracleReport) -> &[u64] {
        match &r.optimum {
            Optimum::Set { members, .. } => members,
            _ => panic!(),
        }
    }

    #[test]
    fn constant_coloring_is_homogeneous() {
        let r = homogeneous(&Coloring::constant(2, 1), 8).unwrap();
        assert_eq!(r.size, 8);
        assert_eq!(r.optimum, Optimum::Set { members: (0..8).collect(), color: Some(1) });
    }

    #[test]
    fn every_two_coloring_of_six_points_has_a_triangle() {
        let pairs: Vec<(u64, u64)> = (0..6).flat_map(|x| (x + 1..6).map(move |y| (x, y))).collect();
        let mut least = usize::MAX;
        for mask in 0u32..1 << 15 {
            let c = Coloring::table(2, 6, |x, y| {
                let i = pairs.iter().position(|&p| p == (x, y)).unwrap();
                ((mask >> i) & 1) as u8
            });
            let r = homogeneous(&c, 6).unwrap();
            let m = members(&r);
            for (a, &x) in m.iter().enumerate() {
                for &y in &m[a + 1..] {
                    assert_eq!(
                        Some(c.color(x, y).unwrap()),
                        match r.optimum {
                            Optimum::Set { color, .. } => color,
                            _ => None,
                        }
                    );
                }
            }
            least = least.min(r.size);
        }
        assert_eq!(least, 3);
    }

    #[test]
    fn first_coordinate_is_fallow() {
        let c = Coloring::from_fn("x mod 2", 2, |x, _| (x % 2) as u8);
        let r = fallow(&c, 10).unwrap();
        assert_eq!(r.size, 10);
        assert_eq!(fallow_check(&c, members(&r)), Ok(Fallow::Fallow));
    }

    #[test]
    fn fallow_witness_rechecks() {
        let c = Coloring::from_fn("sum mod 3", 3, |x, y| ((x + y) % 3) as u8);
        let r = fallow(&c, 14).unwrap();
        assert!(r.size >= 3);
        assert_eq!(fallow_check(&c, members(&r)), Ok(Fallow::Fallow));
    }

    #[test]
    fn large_domains_are_refused() {
        let c = Coloring::constant(2, 0);
        assert_eq!(homogeneous(&c, 21), Err(OracleError::TooLarge { bound: 21, cap: SUBSET_CAP }));
        assert_eq!(fallow(&c, 40), Err(OracleError::TooLarge { bound: 40, cap: SUBSET_CAP }));
    }

    #[test]
    fn restriction_to_given_points() {
        let c = Coloring::from_fn("parity of sum", 2, |x, y| ((x + y) % 2) as u8);
        let r = homogeneous_among(&c, &[30, 2, 40, 44, 9]).unwrap();
        assert_eq!(r.optimum, Optimum::Set { members: vec![2, 30, 40, 44], color: Some(0) });
    }

    #[test]
    fn exceptions_of_a_prefix() {
        let r = cohesive_check(&[0, 2, 3, 4], &[SetPresentation::evens(8)]);
        assert_eq!(
            r.optimum,
            Optimum::Exceptions(vec![Exceptions { set: 0, outside: vec![3], inside: vec![0, 2, 4] }])
        );
    }

    #[test]
    fn d2_parts_from_rows() {
        let d = Delta2Presentation::table(vec![vec![0, 1, 1], vec![1, 0, 0]], 2, Some(1));
        let r = d2_subset(&d, 2, 8).unwrap();
        assert_eq!(r.optimum, Optimum::Parts { limits: vec![1, 0] });
    }
}
