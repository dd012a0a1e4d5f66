//! Deterministic oracle register machine.
//!
//! The bounded-halting predicate is the workbench's normal form: "program `e`
//! on `x` with oracle prefix `σ` has not halted within `m` steps". Halting is
//! the positive (Σ₁) event. Runs report their *use*, `1 + ` the largest
//! queried index, and a query at or beyond the window bound stops the run
//! with [`RunStatus::OracleInsufficient`] instead of inventing a bit.

mod exec;
mod isa;
pub mod library;

pub use exec::{run_program, turing_reduce_eval, Oracle, OracleWindow, ReductionVerdict, RunOutcome, RunStatus};
pub use isa::{AsmError, Instruction, Program, Reg, Target, ALPHABET, JUMP_TARGETS, REGISTERS};

#[cfg(test)]
mod tests {
    use super::library::*;
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn idx(p: Program) -> u128 {
        p.index().unwrap()
    }

    #[test]
    fn constant_program_halts_without_queries() {
        let out = run_program(idx(halt_zero()), 7, &OracleWindow::empty(), 10);
        assert_eq!(out.status, RunStatus::Halted { value: 0 });
        assert_eq!(out.use_bound, 0);
    }

    #[test]
    fn query_reports_bit_and_use() {
        let w = OracleWindow::from_fn(6, |n| n == 5);
        let out = run_program(idx(oracle_bit_at_5()), 0, &w, 10);
        assert_eq!(out.status, RunStatus::Halted { value: 1 });
        assert_eq!(out.use_bound, 6);
    }

    #[test]
    fn short_window_is_reported_not_guessed() {
        let w = OracleWindow::from_fn(5, |_| true);
        let out = run_program(idx(oracle_bit_at_5()), 0, &w, 10);
        assert_eq!(out.status, RunStatus::OracleInsufficient { index: 5 });
    }

    #[test]
    fn loop_runs_out_of_fuel() {
        let out = run_program(idx(diverge()), 3, &OracleWindow::empty(), 1_000_000);
        assert_eq!(out.status, RunStatus::OutOfFuel);
        assert_eq!(out.steps, 1_000_000);
    }

    #[test]
    fn step_count_is_exact() {
        let p = idx(halt_at_step_17());
        assert_eq!(run_program(p, 0, &OracleWindow::empty(), 17).steps, 17);
        assert!(!run_program(p, 0, &OracleWindow::empty(), 16).is_halted());
    }

    #[test]
    fn parity_reduction() {
        let (e1, e2) = (idx(halt_if_even()), idx(halt_if_odd()));
        let w = OracleWindow::empty();
        assert_eq!(turing_reduce_eval(e1, e2, 4, &w, 50), ReductionVerdict::In);
        assert_eq!(turing_reduce_eval(e1, e2, 3, &w, 50), ReductionVerdict::Out);
        let always = idx(halt_zero());
        assert_eq!(turing_reduce_eval(always, always, 0, &w, 50), ReductionVerdict::Conflict);
        let never = idx(diverge());
        assert_eq!(turing_reduce_eval(never, never, 0, &w, 50), ReductionVerdict::Unknown);
    }

    #[test]
    fn decoded_index_runs_identically() {
        let w = OracleWindow::from_fn(16, |n| n % 3 == 0);
        for n in 0..10_000u128 {
            let p = Program::decode(n);
            assert_eq!(p.run(n % 7, &mut &w, 40), run_program(p.index().unwrap(), n % 7, &w, 40));
        }
    }

    #[test]
    fn fuel_monotonicity_sweep() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let w = OracleWindow::from_fn(64, |n| (n * 7 + 3) % 5 < 2);
        for _ in 0..1000 {
            let len = rng.gen_range(1..=12);
            let p = random_program(&mut rng, len);
            let x = rng.gen_range(0..32u128);
            let mut first: Option<RunOutcome> = None;
            for fuel in 1..=256 {
                let out = p.run(x, &mut &w, fuel);
                if let Some(h) = first {
                    assert_eq!(out, h, "halted outcome changed at fuel {fuel}");
                } else if out.is_halted() {
                    first = Some(out);
                }
            }
        }
    }
}
