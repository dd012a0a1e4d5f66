//! Instance files: TOML with a `kind` tag.
//!
//! ```toml
//! kind = "coloring"      # family | stable_coloring | delta2_partition | coloring | tree
//! name = "four points"
//! colors = 2
//! size = 4
//! rows = [[0, 1, 1], [0, 1], [1]]   # rows[x] lists c(x, y) for x < y < size
//! ```
//!
//! Coloring rows may also be the full `size × size` matrix. `family` takes `window` and `[[sets]]` entries with either `members` or a
//! decider `program` (assembler text) and `fuel`. `stable_coloring` takes
//! `colors`, `bound`, `limits`, `settle` and `prefix`. `delta2_partition`
//! takes `colors`, `window`, an optional `promised_bound` and `table`
//! (`table[n][s] = f(n, s)`). `tree` takes `depth` and `leaves`, or
//! `excluded` patterns.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::approx::{ApproxError, Delta2Presentation, SetPresentation};
use crate::classes::{BitString, TreePresentation};
use crate::coloring::{Coloring, StableColoring};
use crate::machine::Program;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InstanceError {
    #[error("line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("partial table: {0}")]
    Partial(String),
    #[error("declared bound {bound} violated at ({x}, {y})")]
    BoundViolation { x: u64, y: u64, bound: u64 },
    #[error("invalid instance: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InstanceKind {
    Family,
    StableColoring,
    Delta2Partition,
    Coloring,
    Tree,
}

#[derive(Debug, Clone)]
pub enum InstanceBody {
    Family {
        window: u64,
        sets: Vec<SetPresentation>,
    },
    /// `Coloring::Stable` or `Coloring::Table`.
    Coloring(Coloring),
    Partition {
        window: u64,
        presentation: Delta2Presentation,
    },
    Tree {
        depth: usize,
        tree: TreePresentation,
    },
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub kind: InstanceKind,
    pub name: String,
    pub seed: Option<u64>,
    pub body: InstanceBody,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetSpec {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub members: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub program: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fuel: Option<u64>,
}

/// The file format, field for field.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InstanceFile {
    Family {
        name: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
        window: u64,
        sets: Vec<SetSpec>,
    },
    StableColoring {
        name: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
        colors: u8,
        bound: u64,
        limits: Vec<u8>,
        settle: Vec<u64>,
        prefix: Vec<Vec<u8>>,
    },
    Delta2Partition {
        name: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
        colors: u8,
        window: u64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        promised_bound: Option<u64>,
        table: Vec<Vec<u8>>,
    },
    Coloring {
        name: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
        colors: u8,
        size: u64,
        rows: Vec<Vec<u8>>,
    },
    Tree {
        name: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
        depth: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        leaves: Option<Vec<String>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        excluded: Option<Vec<String>>,
    },
}

impl InstanceFile {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("instance file serializes")
    }
}

fn line_column(source: &str, offset: usize) -> (usize, usize) {
    let before = &source[..offset.min(source.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.len() - before.rfind('\n').map_or(0, |p| p + 1) + 1;
    (line, column)
}

fn invalid(e: impl std::fmt::Display) -> InstanceError {
    InstanceError::Invalid(e.to_string())
}

fn bits(s: &str) -> Result<BitString, InstanceError> {
    s.parse().map_err(|_| invalid(format!("`{s}` is not a binary string")))
}

pub fn parse_instance(source: &str) -> Result<Instance, InstanceError> {
    let file: InstanceFile = toml::from_str(source).map_err(|e| {
        let (line, column) = e.span().map_or((0, 0), |s| line_column(source, s.start));
        InstanceError::Syntax { line, column, message: e.message().to_string() }
    })?;
    build(file)
}

/// Checks an instance file and builds the instance.
pub fn build(file: InstanceFile) -> Result<Instance, InstanceError> {
    match file {
        InstanceFile::Family { name, seed, window, sets } => {
            let sets = sets
                .into_iter()
                .map(|s| match (s.members, s.program) {
                    (Some(members), None) => {
                        if let Some(&m) = members.iter().find(|&&m| m >= window) {
                            return Err(invalid(format!("{}: member {m} outside the window", s.name)));
                        }
                        let mut bits = vec![false; window as usize];
                        members.iter().for_each(|&m| bits[m as usize] = true);
                        Ok(SetPresentation::from_table(&s.name, bits))
                    }
                    (None, Some(text)) => {
                        let program = Program::parse(&text).map_err(|e| invalid(format!("{}: {e}", s.name)))?;
                        SetPresentation::from_program(&s.name, program, s.fuel.unwrap_or(256), window as usize)
                            .map_err(|e| invalid(format!("{}: {e}", s.name)))
                    }
                    _ => Err(invalid(format!("{}: give exactly one of `members` and `program`", s.name))),
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Instance { kind: InstanceKind::Family, name, seed, body: InstanceBody::Family { window, sets } })
        }
        InstanceFile::StableColoring { name, seed, colors, bound, limits, settle, prefix } => {
            let size = limits.len();
            if settle.len() != size || prefix.len() != size {
                return Err(InstanceError::Partial(format!(
                    "{size} limits, {} settle points, {} prefixes",
                    settle.len(),
                    prefix.len()
                )));
            }
            for x in 0..size {
                let xu = x as u64;
                if settle[x] <= xu {
                    return Err(invalid(format!("settle point of column {x} is not above {x}")));
                }
                if settle[x] > bound.max(xu + 1) {
                    return Err(InstanceError::BoundViolation { x: xu, y: settle[x] - 1, bound });
                }
                let need = (settle[x] - xu - 1) as usize;
                if prefix[x].len() < need {
                    return Err(InstanceError::Partial(format!(
                        "column {x} lists {} of {need} colors",
                        prefix[x].len()
                    )));
                }
                if limits[x] >= colors || prefix[x].iter().any(|&c| c >= colors) {
                    return Err(invalid(format!("column {x} uses a color outside 0..{colors}")));
                }
                // the prefix must not contradict the settle point
                if need > 0 && prefix[x][need - 1] == limits[x] {
                    return Err(invalid(format!("column {x} settles before its declared settle point")));
                }
            }
            let coloring = Coloring::Stable(StableColoring { colors, bound, limits, settle, prefix });
            Ok(Instance { kind: InstanceKind::StableColoring, name, seed, body: InstanceBody::Coloring(coloring) })
        }
        InstanceFile::Delta2Partition { name, seed, colors, window, promised_bound, table } => {
            if (table.len() as u64) < window {
                return Err(InstanceError::Partial(format!("{} rows for window {window}", table.len())));
            }
            if let Some(n) = table.iter().position(Vec::is_empty) {
                return Err(InstanceError::Partial(format!("row {n} is empty")));
            }
            let presentation = Delta2Presentation::table(table, colors, promised_bound);
            let top = (0..window).filter_map(|n| presentation.max_stage(n)).max().unwrap_or(0);
            presentation.audit_bound(window, top).map_err(|e| match e {
                ApproxError::BoundViolation { n, s, bound } => InstanceError::BoundViolation { x: n, y: s, bound },
                other => invalid(other),
            })?;
            for n in 0..window {
                for s in 0..=presentation.max_stage(n).unwrap_or(0) {
                    presentation.eval(n, s).map_err(invalid)?;
                }
            }
            Ok(Instance {
                kind: InstanceKind::Delta2Partition,
                name,
                seed,
                body: InstanceBody::Partition { window, presentation },
            })
        }
        InstanceFile::Coloring { name, seed, colors, size, mut rows } => {
            let n = size as usize;
            // triangular rows may omit the empty last row; square rows list
            // the whole matrix and only entries above the diagonal are read
            if rows.len() + 1 == n && rows.iter().enumerate().all(|(x, r)| r.len() == n - x - 1) {
                rows.push(Vec::new());
            }
            if rows.len() != n {
                return Err(InstanceError::Partial(format!("{} rows for size {size}", rows.len())));
            }
            if rows.iter().all(|r| r.len() == n) {
                rows = rows.into_iter().enumerate().map(|(x, r)| r[x + 1..].to_vec()).collect();
            }
            for (x, row) in rows.iter().enumerate() {
                let want = n - x - 1;
                if row.len() != want {
                    return Err(InstanceError::Partial(format!("row {x} has {} of {want} colors", row.len())));
                }
                if let Some(c) = row.iter().find(|&&c| c >= colors) {
                    return Err(invalid(format!("row {x} uses color {c} outside 0..{colors}")));
                }
            }
            let coloring = Coloring::Table { colors, size, rows };
            Ok(Instance { kind: InstanceKind::Coloring, name, seed, body: InstanceBody::Coloring(coloring) })
        }
        InstanceFile::Tree { name, seed, depth, leaves, excluded } => {
            let tree = match (leaves, excluded) {
                (Some(leaves), None) => {
                    let leaves = leaves.iter().map(|l| bits(l)).collect::<Result<Vec<_>, _>>()?;
                    if let Some(l) = leaves.iter().find(|l| l.len() != depth) {
                        return Err(invalid(format!("leaf {l} is not of length {depth}")));
                    }
                    TreePresentation::from_leaves(depth, &leaves)
                }
                (None, Some(patterns)) => TreePresentation::Excluded {
                    patterns: patterns.iter().map(|p| bits(p)).collect::<Result<Vec<_>, _>>()?,
                },
                _ => return Err(invalid("give exactly one of `leaves` and `excluded`")),
            };
            Ok(Instance { kind: InstanceKind::Tree, name, seed, body: InstanceBody::Tree { depth, tree } })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_point_coloring() {
        let src = "kind = \"coloring\"\nname = \"four\"\ncolors = 2\nsize = 4\nrows = [[0, 1, 1], [0, 1], [1]]\n";
        let inst = parse_instance(src).unwrap();
        assert_eq!(inst.kind, InstanceKind::Coloring);
        let InstanceBody::Coloring(c) = inst.body else { panic!() };
        assert_eq!(c.color(0, 3), Ok(1));
        assert_eq!(c.color(1, 2), Ok(0));
    }

    #[test]
    fn square_coloring_table() {
        let src = "kind = \"coloring\"\nname = \"square\"\ncolors = 2\nsize = 4\n\
                   rows = [[0, 0, 1, 1], [0, 0, 0, 1], [0, 0, 0, 1], [0, 0, 0, 0]]\n";
        let InstanceBody::Coloring(c) = parse_instance(src).unwrap().body else { panic!() };
        let Coloring::Table { rows, .. } = c else { panic!() };
        assert_eq!(rows, vec![vec![0, 1, 1], vec![0, 1], vec![1], vec![]]);
    }

    #[test]
    fn partial_rows_are_rejected() {
        let src = "kind = \"coloring\"\nname = \"short\"\ncolors = 2\nsize = 4\nrows = [[0, 1, 1], [0], [1]]\n";
        assert!(matches!(parse_instance(src), Err(InstanceError::Partial(_))));
    }

    #[test]
    fn promised_bound_violation() {
        let mut row = vec![0u8; 12];
        row[9] = 1;
        let file = InstanceFile::Delta2Partition {
            name: "late change".into(),
            seed: None,
            colors: 2,
            window: 1,
            promised_bound: Some(8),
            table: vec![row],
        };
        assert_eq!(
            parse_instance(&file.to_toml()).unwrap_err(),
            InstanceError::BoundViolation { x: 0, y: 9, bound: 8 }
        );
    }

    #[test]
    fn program_family() {
        let src = r#"
kind = "family"
name = "three deciders"
window = 16

[[sets]]
name = "evens"
program = "jodd r0 3\ninc r1\nhalt r1\nhalt r3"
fuel = 16

[[sets]]
name = "odds"
program = "jodd r0 2\nhalt r1\ninc r1\nhalt r1"

[[sets]]
name = "small"
members = [0, 1, 2]
"#;
        let inst = parse_instance(src).unwrap();
        let InstanceBody::Family { sets, .. } = inst.body else { panic!() };
        assert_eq!(sets.len(), 3);
        assert_eq!(sets[0].contains(4), Some(true));
        assert_eq!(sets[1].contains(4), Some(false));
        assert_eq!(sets[2].contains(2), Some(true));
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let err = parse_instance("kind = \"coloring\"\nname = \n").unwrap_err();
        assert!(matches!(err, InstanceError::Syntax { line: 2, .. }), "{err:?}");
    }

    #[test]
    fn stable_coloring_bound_is_audited() {
        let file = InstanceFile::StableColoring {
            name: "late".into(),
            seed: None,
            colors: 2,
            bound: 3,
            limits: vec![1],
            settle: vec![5],
            prefix: vec![vec![0, 0, 0, 0]],
        };
        assert_eq!(
            parse_instance(&file.to_toml()).unwrap_err(),
            InstanceError::BoundViolation { x: 0, y: 4, bound: 3 }
        );
    }
}
