//! Staged approximations: set presentations with decided windows, jump
//! windows, limits of Δ⁰₂ approximations and limit colors of stable
//! colorings.
//!
//! The jump is the halting set `{⟨e, n⟩ : Φ_e^X(n)↓}` with Cantor pairing.
//! Membership is certified by a halting run; non-membership at a finite
//! stage is provisional and must be recorded with its stage by consumers.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coloring::{Coloring, ColoringError};
use crate::machine::{library, OracleWindow, Program, RunStatus};
use crate::pairing::{pair, unpair};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ApproxError {
    #[error("decider did not return 0/1 on {n} within {fuel} steps: {status:?}")]
    DeciderFailed { n: u64, fuel: u64, status: RunStatus },
    #[error("run of ⟨{e}, {n}⟩ queried {index}, beyond the oracle window")]
    OracleInsufficient { e: u128, n: u128, index: u128 },
    #[error("approximation f({n}, {s}) = {value} is not below {colors}")]
    Malformed { n: u64, s: u64, value: u128, colors: u8 },
    #[error("approximation does not halt on ({n}, {s})")]
    Diverged { n: u64, s: u64 },
    #[error("table has no column f({n}, {s})")]
    OutsideTable { n: u64, s: u64 },
    #[error("promised bound {bound} violated at n = {n}: f({n}, {s}) differs from f({n}, {bound})")]
    BoundViolation { n: u64, s: u64, bound: u64 },
    #[error(transparent)]
    Coloring(#[from] ColoringError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Decider {
    Program { program: Program, fuel: u64 },
    Table,
}

/// A set given by a decider together with its decided window.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SetPresentation {
    pub name: String,
    pub decider: Decider,
    pub window: OracleWindow,
}

impl SetPresentation {
    pub fn from_table(name: &str, bits: Vec<bool>) -> Self {
        SetPresentation { name: name.to_string(), decider: Decider::Table, window: OracleWindow::new(bits) }
    }

    /// Evaluates the (oracle-free) decider on `0..bound`. Output 1 means
    /// member, 0 non-member; anything else is an error.
    pub fn from_program(name: &str, program: Program, fuel: u64, bound: usize) -> Result<Self, ApproxError> {
        let mut bits = Vec::with_capacity(bound);
        for n in 0..bound as u64 {
            let out = program.run(u128::from(n), &mut &OracleWindow::empty(), fuel);
            match out.status {
                RunStatus::Halted { value: 0 } => bits.push(false),
                RunStatus::Halted { value: 1 } => bits.push(true),
                status => return Err(ApproxError::DeciderFailed { n, fuel, status }),
            }
        }
        Ok(SetPresentation {
            name: name.to_string(),
            decider: Decider::Program { program, fuel },
            window: OracleWindow::new(bits),
        })
    }

    pub fn evens(bound: usize) -> Self {
        SetPresentation::from_program("evens", library::decide_even(), 16, bound).expect("evens decider is total")
    }

    pub fn primes(bound: usize) -> Self {
        SetPresentation::from_table("primes", (0..bound as u64).map(is_prime).collect())
    }

    pub fn contains(&self, n: u64) -> Option<bool> {
        self.window.get(u128::from(n))
    }

    pub fn bound(&self) -> usize {
        self.window.bound()
    }

    /// Re-runs the decider on the window and compares.
    pub fn audit(&self) -> bool {
        match &self.decider {
            Decider::Table => true,
            Decider::Program { program, fuel } => {
                match SetPresentation::from_program(&self.name, program.clone(), *fuel, self.bound()) {
                    Ok(fresh) => fresh.window == self.window,
                    Err(_) => false,
                }
            }
        }
    }
}

fn is_prime(n: u64) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
}

/// A certified jump element: `Φ_e^X(n)` halted after `steps` with this use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct JumpEntry {
    pub e: u128,
    pub n: u128,
    pub value: u128,
    pub steps: u64,
    #[serde(rename = "use")]
    pub use_bound: u128,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JumpWindow {
    pub bound: u128,
    pub stage: u64,
    pub positives: Vec<JumpEntry>,
}

impl JumpWindow {
    pub fn contains(&self, code: u128) -> bool {
        self.positives.binary_search_by_key(&code, |p| pair(p.e, p.n)).is_ok()
    }

    pub fn codes(&self) -> impl Iterator<Item = u128> + '_ {
        self.positives.iter().map(|p| pair(p.e, p.n))
    }
}

/// Stage-`stage` approximation of `X'` below `bound`.
pub fn jump_window(x: &SetPresentation, bound: u128, stage: u64) -> Result<JumpWindow, ApproxError> {
    assert!(bound >= 1 && stage >= 1);
    let mut positives = Vec::new();
    for code in 0..bound {
        let (e, n) = unpair(code);
        positives.extend(jump_probe(x, e, n, stage)?);
    }
    Ok(JumpWindow { bound, stage, positives })
}

/// Single jump question `⟨e, n⟩ ∈ X'` at `stage`; `None` is provisional.
pub fn jump_probe(x: &SetPresentation, e: u128, n: u128, stage: u64) -> Result<Option<JumpEntry>, ApproxError> {
    let out = Program::decode(e).run(n, &mut &x.window, stage);
    match out.status {
        RunStatus::Halted { value } => Ok(Some(JumpEntry { e, n, value, steps: out.steps, use_bound: out.use_bound })),
        RunStatus::OracleInsufficient { index } => Err(ApproxError::OracleInsufficient { e, n, index }),
        RunStatus::OutOfFuel => Ok(None),
    }
}

/// Replays a jump certificate: the run must halt in exactly the recorded steps.
pub fn replay_jump_entry(x: &SetPresentation, entry: &JumpEntry) -> bool {
    let out = Program::decode(entry.e).run(entry.n, &mut &x.window, entry.steps);
    out.halted() == Some(entry.value) && out.steps == entry.steps && out.use_bound == entry.use_bound
}

/// Outcome of watching an approximation settle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Limit {
    /// Constant from `at` to the end of the budget; `at` is least. `certified`
    /// when a declared stabilization bound was available and honored.
    Value {
        value: u8,
        at: u64,
        certified: bool,
    },
    Unstable,
}

impl Limit {
    pub fn value(&self) -> Option<u8> {
        match self {
            Limit::Value { value, .. } => Some(*value),
            Limit::Unstable => None,
        }
    }
}

/// Least `t` such that `values` is constant on `[t, end]`, scanning from
/// `start`. Without a declared bound, a last change within the final quarter
/// of `[start, end]` is reported as unstable.
fn settle(
    start: u64,
    end: u64,
    declared: Option<u64>,
    mut value_at: impl FnMut(u64) -> Result<u8, ApproxError>,
) -> Result<Limit, ApproxError> {
    let last = value_at(end)?;
    let mut at = end;
    while at > start {
        if value_at(at - 1)? != last {
            break;
        }
        at -= 1;
    }
    match declared {
        Some(bound) if end >= bound => {
            if at > bound.max(start) {
                return Err(ApproxError::BoundViolation { n: 0, s: at - 1, bound });
            }
            Ok(Limit::Value { value: last, at, certified: true })
        }
        _ => {
            let span = end - start;
            let guard_start = end - span / 4;
            if at > guard_start {
                Ok(Limit::Unstable)
            } else {
                Ok(Limit::Value { value: last, at, certified: false })
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Approximator {
    /// `table[n][s] = f(n, s)`.
    Table(Vec<Vec<u8>>),
    /// Output of the program on `⟨n, s⟩`.
    Program { program: Program, fuel: u64 },
}

/// A Δ⁰₂ presentation `f(n, s)` with values below `colors` (2 for sets).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Delta2Presentation {
    pub approximator: Approximator,
    pub colors: u8,
    /// `f(n, s) = f(n, b)` for all `s >= b`.
    pub promised_bound: Option<u64>,
}

impl Delta2Presentation {
    pub fn table(table: Vec<Vec<u8>>, colors: u8, promised_bound: Option<u64>) -> Self {
        Delta2Presentation { approximator: Approximator::Table(table), colors, promised_bound }
    }

    pub fn eval(&self, n: u64, s: u64) -> Result<u8, ApproxError> {
        let raw = match &self.approximator {
            Approximator::Table(t) => u128::from(
                *t.get(n as usize).and_then(|row| row.get(s as usize)).ok_or(ApproxError::OutsideTable { n, s })?,
            ),
            Approximator::Program { program, fuel } => program
                .run(pair(u128::from(n), u128::from(s)), &mut &OracleWindow::empty(), *fuel)
                .halted()
                .ok_or(ApproxError::Diverged { n, s })?,
        };
        if raw >= u128::from(self.colors) {
            return Err(ApproxError::Malformed { n, s, value: raw, colors: self.colors });
        }
        Ok(raw as u8)
    }

    /// Largest stage available for `n` (tables are finite).
    pub fn max_stage(&self, n: u64) -> Option<u64> {
        match &self.approximator {
            Approximator::Table(t) => t.get(n as usize).map(|row| row.len().saturating_sub(1) as u64),
            Approximator::Program { .. } => None,
        }
    }

    /// Checks the promised bound on `n < range`, `s <= max_stage`.
    pub fn audit_bound(&self, range: u64, max_stage: u64) -> Result<(), ApproxError> {
        let Some(b) = self.promised_bound else {
            return Ok(());
        };
        for n in 0..range {
            let top = self.max_stage(n).map_or(max_stage, |m| m.min(max_stage));
            if top < b {
                continue;
            }
            let at_b = self.eval(n, b)?;
            for s in b + 1..=top {
                if self.eval(n, s)? != at_b {
                    return Err(ApproxError::BoundViolation { n, s, bound: b });
                }
            }
        }
        Ok(())
    }
}

/// `lim_s f(n, s)` as seen within `stage_budget`.
pub fn limit_value(d: &Delta2Presentation, n: u64, stage_budget: u64) -> Result<Limit, ApproxError> {
    assert!(stage_budget >= 1);
    let end = d.max_stage(n).map_or(stage_budget, |m| m.min(stage_budget));
    settle(0, end, d.promised_bound, |s| d.eval(n, s)).map_err(|e| match e {
        ApproxError::BoundViolation { s, bound, .. } => ApproxError::BoundViolation { n, s, bound },
        other => other,
    })
}

/// The value the promise commits to: `f(n, b)`.
pub fn limit_by_promise(d: &Delta2Presentation, n: u64) -> Option<Result<u8, ApproxError>> {
    d.promised_bound.map(|b| d.eval(n, b))
}

/// `lim_y c(x, y)` within `budget`. Uses the coloring's declared bound when
/// the budget reaches it, the guard interval otherwise.
pub fn stable_color_limit(c: &Coloring, x: u64, budget: u64) -> Result<Limit, ApproxError> {
    let declared = c.declared_bound().map(|b| b.max(x + 1));
    let end = budget.max(x + 1).max(declared.unwrap_or(0));
    let end = match c.domain() {
        Some(size) if declared.is_none() => end.min(size.saturating_sub(1)).max(x + 1),
        _ => end,
    };
    settle(x + 1, end, declared, |y| Ok(c.color(x, y)?)).map_err(|e| match e {
        ApproxError::BoundViolation { s, bound, .. } => ApproxError::BoundViolation { n: x, s, bound },
        other => other,
    })
}
