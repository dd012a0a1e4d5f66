//! Colorings of pairs `x < y`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::machine::{OracleWindow, Program};
use crate::pairing::pair;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ColoringError {
    #[error("pair ({x}, {y}) is not increasing")]
    NotIncreasing { x: u64, y: u64 },
    #[error("pair ({x}, {y}) is outside the coloring's domain")]
    OutOfDomain { x: u64, y: u64 },
    #[error("c({x}, {y}) = {color} is not below {colors}")]
    ColorOutOfRange { x: u64, y: u64, color: u128, colors: u8 },
    #[error("coloring program did not halt on ({x}, {y})")]
    Diverged { x: u64, y: u64 },
}

/// A k-coloring whose columns settle: `c(x, y) = limits[x]` for every
/// `y >= settle[x]`, and `settle[x] <= max(bound, x + 1)`. Before settling the
/// column follows `prefix[x][y - x - 1]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StableColoring {
    pub colors: u8,
    pub bound: u64,
    pub limits: Vec<u8>,
    pub settle: Vec<u64>,
    pub prefix: Vec<Vec<u8>>,
}

impl StableColoring {
    pub fn size(&self) -> u64 {
        self.limits.len() as u64
    }

    fn color(&self, x: u64, y: u64) -> Result<u8, ColoringError> {
        let xi = x as usize;
        if xi >= self.limits.len() {
            return Err(ColoringError::OutOfDomain { x, y });
        }
        if y >= self.settle[xi] {
            Ok(self.limits[xi])
        } else {
            Ok(self.prefix[xi][(y - x - 1) as usize])
        }
    }
}

/// Closure-backed coloring for tests and examples.
#[derive(Clone)]
pub struct FnColoring {
    pub name: String,
    pub colors: u8,
    pub bound: Option<u64>,
    f: Arc<dyn Fn(u64, u64) -> u8 + Send + Sync>,
}

impl FnColoring {
    pub fn new(name: &str, colors: u8, f: impl Fn(u64, u64) -> u8 + Send + Sync + 'static) -> Self {
        FnColoring { name: name.to_string(), colors, bound: None, f: Arc::new(f) }
    }

    /// Declares that every column is constant from `max(bound, x + 1)` on.
    pub fn with_bound(mut self, bound: u64) -> Self {
        self.bound = Some(bound);
        self
    }
}

impl fmt::Debug for FnColoring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnColoring").field("name", &self.name).field("colors", &self.colors).finish()
    }
}

#[derive(Debug, Clone)]
pub enum Coloring {
    /// `rows[x][y - x - 1] = c(x, y)` for `x < y < size`.
    Table {
        colors: u8,
        size: u64,
        rows: Vec<Vec<u8>>,
    },
    Stable(StableColoring),
    /// Output of the program on input `⟨x, y⟩`.
    Program {
        colors: u8,
        program: Program,
        fuel: u64,
    },
    Fn(FnColoring),
}

impl Coloring {
    pub fn constant(colors: u8, value: u8) -> Self {
        Coloring::Fn(FnColoring::new("constant", colors, move |_, _| value).with_bound(0))
    }

    /// `c(x, y) = x mod k`, settled from the start.
    pub fn first_coordinate(colors: u8) -> Self {
        Coloring::Fn(
            FnColoring::new("first-coordinate", colors, move |x, _| (x % u64::from(colors)) as u8).with_bound(0),
        )
    }

    pub fn from_fn(name: &str, colors: u8, f: impl Fn(u64, u64) -> u8 + Send + Sync + 'static) -> Self {
        Coloring::Fn(FnColoring::new(name, colors, f))
    }

    pub fn table(colors: u8, size: u64, f: impl Fn(u64, u64) -> u8) -> Self {
        let rows = (0..size).map(|x| (x + 1..size).map(|y| f(x, y)).collect()).collect();
        Coloring::Table { colors, size, rows }
    }

    pub fn colors(&self) -> u8 {
        match self {
            Coloring::Table { colors, .. } | Coloring::Program { colors, .. } => *colors,
            Coloring::Stable(s) => s.colors,
            Coloring::Fn(f) => f.colors,
        }
    }

    /// Stabilization bound declared by the presentation, if any.
    pub fn declared_bound(&self) -> Option<u64> {
        match self {
            Coloring::Stable(s) => Some(s.bound),
            Coloring::Fn(f) => f.bound,
            _ => None,
        }
    }

    /// Points `x` the coloring is defined for (all `y > x` when stable).
    pub fn domain(&self) -> Option<u64> {
        match self {
            Coloring::Table { size, .. } => Some(*size),
            Coloring::Stable(s) => Some(s.size()),
            _ => None,
        }
    }

    pub fn color(&self, x: u64, y: u64) -> Result<u8, ColoringError> {
        if x >= y {
            return Err(ColoringError::NotIncreasing { x, y });
        }
        let k = self.colors();
        let raw: u128 = match self {
            Coloring::Table { size, rows, .. } => {
                if y >= *size {
                    return Err(ColoringError::OutOfDomain { x, y });
                }
                u128::from(rows[x as usize][(y - x - 1) as usize])
            }
            Coloring::Stable(s) => u128::from(s.color(x, y)?),
            Coloring::Program { program, fuel, .. } => program
                .run(pair(u128::from(x), u128::from(y)), &mut &OracleWindow::empty(), *fuel)
                .halted()
                .ok_or(ColoringError::Diverged { x, y })?,
            Coloring::Fn(f) => u128::from((f.f)(x, y)),
        };
        if raw >= u128::from(k) {
            return Err(ColoringError::ColorOutOfRange { x, y, color: raw, colors: k });
        }
        Ok(raw as u8)
    }

    /// Restriction to `[0, size)` as an explicit table.
    pub fn to_table(&self, size: u64) -> Result<Coloring, ColoringError> {
        let mut rows = Vec::with_capacity(size as usize);
        for x in 0..size {
            rows.push((x + 1..size).map(|y| self.color(x, y)).collect::<Result<Vec<_>, _>>()?);
        }
        Ok(Coloring::Table { colors: self.colors(), size, rows })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_lookup_and_domain() {
        let c = Coloring::table(2, 4, |x, y| ((x + y) % 2) as u8);
        assert_eq!(c.color(1, 2), Ok(1));
        assert_eq!(c.color(0, 2), Ok(0));
        assert_eq!(c.color(2, 4), Err(ColoringError::OutOfDomain { x: 2, y: 4 }));
        assert_eq!(c.color(2, 2), Err(ColoringError::NotIncreasing { x: 2, y: 2 }));
    }

    #[test]
    fn out_of_range_colors_are_rejected() {
        let c = Coloring::from_fn("bad", 2, |_, _| 3);
        assert!(matches!(c.color(0, 1), Err(ColoringError::ColorOutOfRange { color: 3, .. })));
    }

    #[test]
    fn stable_coloring_settles() {
        let s = StableColoring {
            colors: 2,
            bound: 4,
            limits: vec![1, 0],
            settle: vec![3, 2],
            prefix: vec![vec![0, 0], vec![]],
        };
        let c = Coloring::Stable(s);
        assert_eq!((1..8).map(|y| c.color(0, y).unwrap()).collect::<Vec<_>>(), vec![0, 0, 1, 1, 1, 1, 1]);
        assert_eq!(c.color(1, 5), Ok(0));
        assert!(c.color(2, 5).is_err());
    }
}
