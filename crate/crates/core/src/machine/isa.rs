//! Instruction set, the program numbering and the assembler text format.
//!
//! Four registers `r0..r3`; `r0` holds the input, the rest start at zero.
//! Jump targets are absolute and range over `0..16`. Each instruction is a
//! letter of a 176-symbol alphabet:
//!
//! | letters     | instruction  | meaning                                   |
//! |-------------|--------------|-------------------------------------------|
//! | `0..4`      | `inc r`      | `r += 1` (saturating)                     |
//! | `4..8`      | `dec r`      | `r -= 1` (saturating at 0)                |
//! | `8..12`     | `shr r`      | `r /= 2`                                  |
//! | `12..16`    | `halt r`     | halt with output `r`                      |
//! | `16..32`    | `mov d s`    | `d = s`, letter `16 + 4d + s`             |
//! | `32..48`    | `qry d s`    | `d = oracle bit at index s`, `32 + 4d + s`|
//! | `48..112`   | `jz r t`     | jump to `t` if `r == 0`, `48 + 16r + t`   |
//! | `112..176`  | `jodd r t`   | jump to `t` if `r` is odd, `112 + 16r + t`|
//!
//! A program `l₀ l₁ … l_{n-1}` (letters, first instruction first) has index
//! `Σ (lᵢ + 1)·176ⁱ`, the bijective base-176 numeral with the first
//! instruction as least significant digit. Index 0 is the empty program.
//! Every natural is the index of exactly one program. Indices are `u128`, so
//! programs longer than 17 instructions have no representable index.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

pub const REGISTERS: usize = 4;
pub const JUMP_TARGETS: u8 = 16;
pub const ALPHABET: u128 = 176;

/// Register name `r0..r3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Reg(u8);

impl Reg {
    pub fn new(r: u8) -> Option<Self> {
        (usize::from(r) < REGISTERS).then_some(Reg(r))
    }

    pub fn index(self) -> usize {
        usize::from(self.0)
    }
}

/// Jump target `0..16`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Target(u8);

impl Target {
    pub fn new(t: u8) -> Option<Self> {
        (t < JUMP_TARGETS).then_some(Target(t))
    }

    pub fn get(self) -> usize {
        usize::from(self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Instruction {
    Inc(Reg),
    Dec(Reg),
    Shr(Reg),
    Halt(Reg),
    Mov { dst: Reg, src: Reg },
    Query { dst: Reg, at: Reg },
    JumpZero(Reg, Target),
    JumpOdd(Reg, Target),
}

impl Instruction {
    pub fn letter(self) -> u8 {
        match self {
            Instruction::Inc(r) => r.0,
            Instruction::Dec(r) => 4 + r.0,
            Instruction::Shr(r) => 8 + r.0,
            Instruction::Halt(r) => 12 + r.0,
            Instruction::Mov { dst, src } => 16 + 4 * dst.0 + src.0,
            Instruction::Query { dst, at } => 32 + 4 * dst.0 + at.0,
            Instruction::JumpZero(r, t) => 48 + 16 * r.0 + t.0,
            Instruction::JumpOdd(r, t) => 112 + 16 * r.0 + t.0,
        }
    }

    pub fn from_letter(letter: u8) -> Option<Self> {
        let reg = |v: u8| Reg(v);
        Some(match letter {
            0..=3 => Instruction::Inc(reg(letter)),
            4..=7 => Instruction::Dec(reg(letter - 4)),
            8..=11 => Instruction::Shr(reg(letter - 8)),
            12..=15 => Instruction::Halt(reg(letter - 12)),
            16..=31 => {
                let v = letter - 16;
                Instruction::Mov { dst: reg(v / 4), src: reg(v % 4) }
            }
            32..=47 => {
                let v = letter - 32;
                Instruction::Query { dst: reg(v / 4), at: reg(v % 4) }
            }
            48..=111 => {
                let v = letter - 48;
                Instruction::JumpZero(reg(v / 16), Target(v % 16))
            }
            112..=175 => {
                let v = letter - 112;
                Instruction::JumpOdd(reg(v / 16), Target(v % 16))
            }
            _ => return None,
        })
    }
}

impl fmt::Display for Instruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Instruction::Inc(r) => write!(f, "inc r{}", r.0),
            Instruction::Dec(r) => write!(f, "dec r{}", r.0),
            Instruction::Shr(r) => write!(f, "shr r{}", r.0),
            Instruction::Halt(r) => write!(f, "halt r{}", r.0),
            Instruction::Mov { dst, src } => write!(f, "mov r{} r{}", dst.0, src.0),
            Instruction::Query { dst, at } => write!(f, "qry r{} r{}", dst.0, at.0),
            Instruction::JumpZero(r, t) => write!(f, "jz r{} {}", r.0, t.0),
            Instruction::JumpOdd(r, t) => write!(f, "jodd r{} {}", r.0, t.0),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AsmError {
    #[error("line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("program of {0} instructions has no index below 2^128")]
    IndexOverflow(usize),
}

/// A register-machine program with an oracle-query instruction.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Program {
    code: Vec<Instruction>,
}

impl Program {
    pub fn new(code: Vec<Instruction>) -> Self {
        Program { code }
    }

    pub fn instructions(&self) -> &[Instruction] {
        &self.code
    }

    pub fn len(&self) -> usize {
        self.code.len()
    }

    pub fn is_empty(&self) -> bool {
        self.code.is_empty()
    }

    /// Decodes an index. Total: every natural names a program.
    pub fn decode(mut index: u128) -> Self {
        let mut code = Vec::new();
        while index > 0 {
            index -= 1;
            let letter = (index % ALPHABET) as u8;
            code.push(Instruction::from_letter(letter).expect("letter below alphabet size"));
            index /= ALPHABET;
        }
        Program { code }
    }

    pub fn index(&self) -> Result<u128, AsmError> {
        let mut acc: u128 = 0;
        for instr in self.code.iter().rev() {
            acc = acc
                .checked_mul(ALPHABET)
                .and_then(|a| a.checked_add(u128::from(instr.letter()) + 1))
                .ok_or(AsmError::IndexOverflow(self.code.len()))?;
        }
        Ok(acc)
    }

    /// Parses assembler text: one instruction per line, `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, AsmError> {
        let mut code = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("");
            let trimmed = line.trim_start();
            if trimmed.trim().is_empty() {
                continue;
            }
            let offset = line.len() - trimmed.len();
            code.push(parse_instruction(trimmed.trim_end(), lineno + 1, offset + 1)?);
        }
        Ok(Program { code })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for instr in &self.code {
            out.push_str(&instr.to_string());
            out.push('\n');
        }
        out
    }
}

impl FromStr for Program {
    type Err = AsmError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Program::parse(s)
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

fn parse_instruction(text: &str, line: usize, column: usize) -> Result<Instruction, AsmError> {
    let err = |col: usize, message: String| AsmError::Syntax { line, column: col, message };
    let mut tokens = Vec::new();
    let mut pos = 0;
    for tok in text.split_whitespace() {
        let at = text[pos..].find(tok).unwrap() + pos;
        tokens.push((tok, column + at));
        pos = at + tok.len();
    }
    let (mnemonic, mcol) = tokens[0];
    let operands = &tokens[1..];
    let expect = |n: usize| {
        if operands.len() != n {
            Err(err(mcol, format!("`{mnemonic}` takes {n} operand(s), found {}", operands.len())))
        } else {
            Ok(())
        }
    };
    let reg = |(tok, col): (&str, usize)| -> Result<Reg, AsmError> {
        tok.strip_prefix('r')
            .and_then(|d| d.parse::<u8>().ok())
            .and_then(Reg::new)
            .ok_or_else(|| err(col, format!("expected register r0..r3, found `{tok}`")))
    };
    let target = |(tok, col): (&str, usize)| -> Result<Target, AsmError> {
        tok.parse::<u8>()
            .ok()
            .and_then(Target::new)
            .ok_or_else(|| err(col, format!("expected jump target 0..15, found `{tok}`")))
    };
    Ok(match mnemonic {
        "inc" => {
            expect(1)?;
            Instruction::Inc(reg(operands[0])?)
        }
        "dec" => {
            expect(1)?;
            Instruction::Dec(reg(operands[0])?)
        }
        "shr" => {
            expect(1)?;
            Instruction::Shr(reg(operands[0])?)
        }
        "halt" => {
            expect(1)?;
            Instruction::Halt(reg(operands[0])?)
        }
        "mov" => {
            expect(2)?;
            Instruction::Mov { dst: reg(operands[0])?, src: reg(operands[1])? }
        }
        "qry" => {
            expect(2)?;
            Instruction::Query { dst: reg(operands[0])?, at: reg(operands[1])? }
        }
        "jz" => {
            expect(2)?;
            Instruction::JumpZero(reg(operands[0])?, target(operands[1])?)
        }
        "jodd" => {
            expect(2)?;
            Instruction::JumpOdd(reg(operands[0])?, target(operands[1])?)
        }
        other => return Err(err(mcol, format!("unknown mnemonic `{other}`"))),
    })
}

/// Serialized as assembler text.
impl serde::Serialize for Program {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_text())
    }
}

impl<'de> serde::Deserialize<'de> for Program {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = <String as serde::Deserialize>::deserialize(d)?;
        Program::parse(&text).map_err(serde::de::Error::custom)
    }
}
