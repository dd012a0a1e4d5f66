use serde::{Deserialize, Serialize};

use super::isa::{Instruction, Program, REGISTERS};

/// A finite oracle prefix: verdicts for every `n < bound`, nothing above.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct OracleWindow {
    bits: Vec<bool>,
}

impl OracleWindow {
    pub fn new(bits: Vec<bool>) -> Self {
        OracleWindow { bits }
    }

    pub fn empty() -> Self {
        OracleWindow::default()
    }

    /// Window of a finite set `F`, with bound `max F + 1` (0 for the empty set).
    pub fn of_finite_set<I: IntoIterator<Item = u64>>(elements: I) -> Self {
        let elements: Vec<u64> = elements.into_iter().collect();
        let bound = elements.iter().max().map_or(0, |&m| m as usize + 1);
        let mut bits = vec![false; bound];
        for x in elements {
            bits[x as usize] = true;
        }
        OracleWindow { bits }
    }

    pub fn from_fn(bound: usize, f: impl Fn(u64) -> bool) -> Self {
        OracleWindow { bits: (0..bound as u64).map(f).collect() }
    }

    pub fn bound(&self) -> usize {
        self.bits.len()
    }

    pub fn get(&self, n: u128) -> Option<bool> {
        usize::try_from(n).ok().and_then(|i| self.bits.get(i).copied())
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn members(&self) -> impl Iterator<Item = u64> + '_ {
        self.bits.iter().enumerate().filter(|(_, b)| **b).map(|(i, _)| i as u64)
    }

    pub fn truncated(&self, bound: usize) -> Self {
        OracleWindow { bits: self.bits[..bound.min(self.bits.len())].to_vec() }
    }

    /// True when both windows agree on every `n < below` (both must cover it).
    pub fn agrees_below(&self, other: &OracleWindow, below: usize) -> bool {
        below <= self.bound() && below <= other.bound() && self.bits[..below] == other.bits[..below]
    }
}

/// Source of oracle bits during a run. `None` means the verdict is not
/// available, which ends the run with [`RunStatus::OracleInsufficient`].
pub trait Oracle {
    fn bit(&mut self, n: u128) -> Option<bool>;
}

impl Oracle for &OracleWindow {
    fn bit(&mut self, n: u128) -> Option<bool> {
        self.get(n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Halted {
        value: u128,
    },
    OutOfFuel,
    /// First queried index at or beyond the window bound.
    OracleInsufficient {
        index: u128,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RunOutcome {
    pub status: RunStatus,
    pub steps: u64,
    /// `1 + max` answered query index, 0 when nothing was queried.
    #[serde(rename = "use")]
    pub use_bound: u128,
}

impl RunOutcome {
    pub fn halted(&self) -> Option<u128> {
        match self.status {
            RunStatus::Halted { value } => Some(value),
            _ => None,
        }
    }

    pub fn is_halted(&self) -> bool {
        self.halted().is_some()
    }
}

impl Program {
    /// Runs on input `x` for at most `fuel` instructions. Every instruction,
    /// queries included, costs one unit. Control leaving the program (falling
    /// off the end or jumping past it) diverges.
    pub fn run(&self, x: u128, oracle: &mut impl Oracle, fuel: u64) -> RunOutcome {
        let mut regs = [0u128; REGISTERS];
        regs[0] = x;
        let mut pc = 0usize;
        let mut steps = 0u64;
        let mut use_bound = 0u128;
        let code = self.instructions();
        while steps < fuel {
            let Some(&instr) = code.get(pc) else {
                return RunOutcome { status: RunStatus::OutOfFuel, steps: fuel, use_bound };
            };
            steps += 1;
            pc += 1;
            match instr {
                Instruction::Inc(r) => regs[r.index()] = regs[r.index()].saturating_add(1),
                Instruction::Dec(r) => regs[r.index()] = regs[r.index()].saturating_sub(1),
                Instruction::Shr(r) => regs[r.index()] >>= 1,
                Instruction::Halt(r) => {
                    return RunOutcome { status: RunStatus::Halted { value: regs[r.index()] }, steps, use_bound }
                }
                Instruction::Mov { dst, src } => regs[dst.index()] = regs[src.index()],
                Instruction::Query { dst, at } => {
                    let n = regs[at.index()];
                    match oracle.bit(n) {
                        Some(b) => {
                            use_bound = use_bound.max(n.saturating_add(1));
                            regs[dst.index()] = u128::from(b);
                        }
                        None => {
                            return RunOutcome { status: RunStatus::OracleInsufficient { index: n }, steps, use_bound }
                        }
                    }
                }
                Instruction::JumpZero(r, t) => {
                    if regs[r.index()] == 0 {
                        pc = t.get();
                    }
                }
                Instruction::JumpOdd(r, t) => {
                    if regs[r.index()] % 2 == 1 {
                        pc = t.get();
                    }
                }
            }
        }
        RunOutcome { status: RunStatus::OutOfFuel, steps, use_bound }
    }
}

/// Runs the program with index `e` on `x` against the window.
pub fn run_program(e: u128, x: u128, oracle: &OracleWindow, fuel: u64) -> RunOutcome {
    assert!(fuel >= 1, "fuel must be at least 1");
    Program::decode(e).run(x, &mut &*oracle, fuel)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ReductionVerdict {
    In,
    Out,
    /// Both indices halt: the pair fails the reduction contract at this input.
    Conflict,
    Unknown,
}

/// Evaluates the reduction pair `(e1, e2)` at `n`: `e1` halting witnesses
/// membership, `e2` halting witnesses non-membership.
pub fn turing_reduce_eval(e1: u128, e2: u128, n: u128, y: &OracleWindow, fuel: u64) -> ReductionVerdict {
    let pos = run_program(e1, n, y, fuel).is_halted();
    let neg = run_program(e2, n, y, fuel).is_halted();
    match (pos, neg) {
        (true, false) => ReductionVerdict::In,
        (false, true) => ReductionVerdict::Out,
        (true, true) => ReductionVerdict::Conflict,
        (false, false) => ReductionVerdict::Unknown,
    }
}
