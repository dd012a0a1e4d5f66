//! Hand-written programs used by examples, generators and the default
//! requirement catalog. Binary strings are passed as inputs through
//! [`string_code`].

use rand::Rng;

use super::isa::{Instruction, Program, Reg, Target, ALPHABET};

fn asm(text: &str) -> Program {
    Program::parse(text).expect("library program must assemble")
}

/// Input code of a binary string: `Σ (τᵢ + 1)·2ⁱ`, first bit least significant.
/// A bijection between binary strings and the naturals.
pub fn string_code(bits: &[bool]) -> u128 {
    bits.iter().rev().fold(0u128, |acc, &b| acc * 2 + if b { 2 } else { 1 })
}

pub fn string_decode(mut n: u128) -> Vec<bool> {
    let mut out = Vec::new();
    while n > 0 {
        if n % 2 == 1 {
            out.push(false);
            n = (n - 1) / 2;
        } else {
            out.push(true);
            n = (n - 2) / 2;
        }
    }
    out
}

/// Halts with output 0.
pub fn halt_zero() -> Program {
    asm("halt r3")
}

/// Echoes its input.
pub fn identity() -> Program {
    asm("halt r0")
}

pub fn diverge() -> Program {
    asm("jz r3 0")
}

/// Outputs the oracle bit at 5.
pub fn oracle_bit_at_5() -> Program {
    asm("inc r1\ninc r1\ninc r1\ninc r1\ninc r1\nqry r2 r1\nhalt r2")
}

/// Outputs the oracle bit at the input.
pub fn oracle_bit_at_input() -> Program {
    asm("qry r1 r0\nhalt r1")
}

pub fn halt_if_even() -> Program {
    asm("jodd r0 0\nhalt r3")
}

pub fn halt_if_odd() -> Program {
    asm("jodd r0 2\njz r3 1\nhalt r3")
}

/// Outputs `1` on even inputs and `0` on odd ones; a decider for the evens.
pub fn decide_even() -> Program {
    asm("jodd r0 3\ninc r1\nhalt r1\nhalt r3")
}

/// Halts after exactly 17 steps on every input.
pub fn halt_at_step_17() -> Program {
    let mut text = "inc r1\n".repeat(16);
    text.push_str("halt r1");
    asm(&text)
}

/// Scans the oracle upwards from 0 and halts on the first member.
pub fn halt_if_oracle_nonempty() -> Program {
    asm("qry r2 r1\njz r2 3\nhalt r1\ninc r1\njz r3 0")
}

/// Scans upwards from 11 and halts on the first member above 10.
pub fn halt_if_member_above_10() -> Program {
    let mut text = "inc r1\n".repeat(11);
    text.push_str("qry r2 r1\njz r2 14\nhalt r1\ninc r1\njz r3 11");
    asm(&text)
}

/// Halts once two members have been seen, scanning from 0.
pub fn halt_if_two_members() -> Program {
    asm("qry r2 r1\ninc r1\njz r2 0\njz r3 5\nhalt r1\nqry r2 r1\ninc r1\njz r2 5\nhalt r1")
}

/// Halts iff some odd number is a member, scanning from 1.
pub fn halt_if_odd_member() -> Program {
    asm("inc r1\nqry r2 r1\njz r2 5\nhalt r1\nhalt r1\ninc r1\ninc r1\njz r3 1")
}

/// Halts iff the oracle contains 3.
pub fn halt_if_contains_3() -> Program {
    asm("inc r1\ninc r1\ninc r1\nqry r2 r1\njz r2 4\nhalt r2")
}

/// Halts iff the oracle contains its input.
pub fn halt_if_contains_input() -> Program {
    asm("qry r1 r0\njz r1 1\nhalt r1")
}

/// Decider for the binary strings without two adjacent ones: reads the
/// input as [`string_code`] and outputs 1 (accept) or 0 (reject).
pub fn decide_no_adjacent_ones() -> Program {
    asm(&NO_ADJACENT_ONES_PREFIX.replace("@ACCEPT", "inc r2\nhalt r2"))
}

/// Rejector for the same tree: halts iff the input string contains `11`,
/// runs forever otherwise. Its Π₁ class is the set of `11`-free sequences.
pub fn reject_adjacent_ones() -> Program {
    asm(&NO_ADJACENT_ONES_PREFIX.replace("@ACCEPT", "jz r3 13"))
}

const NO_ADJACENT_ONES_PREFIX: &str = "\
jz r0 13
jodd r0 9
dec r0
dec r0
shr r0
jz r1 7
halt r3
inc r1
jz r3 0
shr r0
mov r1 r3
jz r3 0
halt r3
@ACCEPT";

/// Rejects every string: halts immediately.
pub fn reject_everything() -> Program {
    halt_zero()
}

/// Random program of exactly `len` instructions.
pub fn random_program(rng: &mut impl Rng, len: usize) -> Program {
    let code = (0..len).map(|_| Instruction::from_letter(rng.gen_range(0..ALPHABET as u8)).unwrap()).collect();
    Program::new(code)
}

/// Random program biased towards terminating 0/1 deciders: straight-line
/// arithmetic and queries, forward jumps only, ending in `halt`.
pub fn random_forward_program(rng: &mut impl Rng, len: usize) -> Program {
    assert!((2..=16).contains(&len));
    let reg = |rng: &mut dyn rand::RngCore| Reg::new(rng.gen_range(0..4)).unwrap();
    let mut code = Vec::with_capacity(len);
    for pc in 0..len - 1 {
        let instr = match rng.gen_range(0..6) {
            0 => Instruction::Inc(reg(rng)),
            1 => Instruction::Dec(reg(rng)),
            2 => Instruction::Shr(reg(rng)),
            3 => Instruction::Mov { dst: reg(rng), src: reg(rng) },
            4 => {
                let t = Target::new(rng.gen_range(pc as u8 + 1..len as u8)).unwrap();
                Instruction::JumpOdd(reg(rng), t)
            }
            _ => {
                let t = Target::new(rng.gen_range(pc as u8 + 1..len as u8)).unwrap();
                Instruction::JumpZero(reg(rng), t)
            }
        };
        code.push(instr);
    }
    code.push(Instruction::Halt(reg(rng)));
    Program::new(code)
}
