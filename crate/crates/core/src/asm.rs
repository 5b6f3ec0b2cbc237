//! Text assembly for Xposit programs.
//!
//! One instruction per line, `#` starts a comment, registers are `x0`-`x31`
//! and `p0`-`p31` (no ABI aliases), memory operands are written
//! `offset(base)`. A `.word 0x...` directive emits a raw word, which is
//! also how the disassembler prints words it cannot decode, so
//! disassemble-then-assemble reproduces any binary. Binaries are flat
//! little-endian 32-bit words.

use crate::isa::{decode_with, encode, EncodeError, Instruction, Mnemonic, RegFile};
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AsmErrorKind {
    UnknownMnemonic(String),
    UnknownRegister(String),
    WrongRegisterFile { token: String, expected: RegFile },
    MalformedOperand(String),
    MalformedImmediate(String),
    ImmediateOutOfRange(i64),
    OperandCount { expected: usize, got: usize },
    MalformedWordDirective(String),
    Encode(EncodeError),
}

/// Assembly diagnostic. `line` and `col` are 1-based positions in the
/// source listing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AsmError {
    pub line: usize,
    pub col: usize,
    pub kind: AsmErrorKind,
}

impl std::error::Error for AsmError {}

impl fmt::Display for AsmError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: ", self.line, self.col)?;
        match &self.kind {
            AsmErrorKind::UnknownMnemonic(name) => write!(f, "unknown mnemonic {name:?}"),
            AsmErrorKind::UnknownRegister(token) => write!(f, "unknown register {token:?}"),
            AsmErrorKind::WrongRegisterFile { token, expected } => {
                let file = match expected {
                    RegFile::X => "integer",
                    RegFile::P => "posit",
                };
                write!(f, "{token:?} where a {file} register is required")
            }
            AsmErrorKind::MalformedOperand(token) => write!(f, "malformed operand {token:?}"),
            AsmErrorKind::MalformedImmediate(token) => {
                write!(f, "malformed immediate {token:?}")
            }
            AsmErrorKind::ImmediateOutOfRange(value) => {
                write!(f, "immediate {value} outside [-2048, 2047]")
            }
            AsmErrorKind::OperandCount { expected, got } => {
                write!(f, "expected {expected} operands, got {got}")
            }
            AsmErrorKind::MalformedWordDirective(token) => {
                write!(f, ".word expects one 0x literal, got {token:?}")
            }
            AsmErrorKind::Encode(e) => write!(f, "{e}"),
        }
    }
}

fn err(line: usize, col: usize, kind: AsmErrorKind) -> AsmError {
    AsmError { line, col, kind }
}

/// `(col, text)` pieces of a comma-separated operand list, columns
/// 1-based in the original line.
fn split_operands(rest: &str, base: usize) -> Vec<(usize, &str)> {
    if rest.trim().is_empty() {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut start = 0;
    for (i, c) in rest.char_indices().chain([(rest.len(), ',')]) {
        if c != ',' {
            continue;
        }
        let piece = &rest[start..i];
        let lead = piece.len() - piece.trim_start().len();
        out.push((base + start + lead + 1, piece.trim()));
        start = i + 1;
    }
    out
}

fn parse_reg(token: &str, expected: RegFile, line: usize, col: usize) -> Result<u8, AsmError> {
    let lower = token.to_ascii_lowercase();
    let (file, index) = match lower.split_at_checked(1) {
        Some(("x", rest)) => (RegFile::X, rest),
        Some(("p", rest)) => (RegFile::P, rest),
        _ => return Err(err(line, col, AsmErrorKind::UnknownRegister(token.into()))),
    };
    if index.is_empty() || !index.bytes().all(|b| b.is_ascii_digit()) {
        return Err(err(line, col, AsmErrorKind::UnknownRegister(token.into())));
    }
    let index: u8 = index
        .parse()
        .ok()
        .filter(|&i| i < 32)
        .ok_or_else(|| err(line, col, AsmErrorKind::UnknownRegister(token.into())))?;
    if file != expected {
        let kind = AsmErrorKind::WrongRegisterFile { token: token.into(), expected };
        return Err(err(line, col, kind));
    }
    Ok(index)
}

fn parse_imm(token: &str, line: usize, col: usize) -> Result<i16, AsmError> {
    let value: i64 = token
        .parse()
        .map_err(|_| err(line, col, AsmErrorKind::MalformedImmediate(token.into())))?;
    if !(-2048..=2047).contains(&value) {
        return Err(err(line, col, AsmErrorKind::ImmediateOutOfRange(value)));
    }
    Ok(value as i16)
}

/// `offset(base)` memory operand; the offset sign is part of the offset.
fn parse_mem(token: &str, line: usize, col: usize) -> Result<(i16, u8), AsmError> {
    let open = token
        .find('(')
        .ok_or_else(|| err(line, col, AsmErrorKind::MalformedOperand(token.into())))?;
    let close = token.len() - 1;
    if !token.ends_with(')') || open + 1 >= close {
        return Err(err(line, col, AsmErrorKind::MalformedOperand(token.into())));
    }
    let imm = parse_imm(token[..open].trim(), line, col)?;
    let base = parse_reg(token[open + 1..close].trim(), RegFile::X, line, col + open + 1)?;
    Ok((imm, base))
}

fn parse_word_directive(rest: &str, line: usize, col: usize) -> Result<u32, AsmError> {
    let token = rest.trim();
    let digits = token
        .strip_prefix("0x")
        .or_else(|| token.strip_prefix("0X"))
        .filter(|d| !d.is_empty());
    match digits.and_then(|d| u32::from_str_radix(d, 16).ok()) {
        Some(word) => Ok(word),
        None => Err(err(line, col, AsmErrorKind::MalformedWordDirective(token.into()))),
    }
}

fn parse_line(line: &str, lineno: usize) -> Result<Option<u32>, AsmError> {
    let code = line.split('#').next().unwrap().trim_end();
    let indent = code.len() - code.trim_start().len();
    let code = code.trim_start();
    if code.is_empty() {
        return Ok(None);
    }
    let mcol = indent + 1;
    let (head, rest) = code.split_once(char::is_whitespace).unwrap_or((code, ""));
    let rest_base = indent + head.len() + 1;

    if head == ".word" {
        return parse_word_directive(rest, lineno, rest_base + 1).map(Some);
    }
    let mnemonic = Mnemonic::from_name(head)
        .ok_or_else(|| err(lineno, mcol, AsmErrorKind::UnknownMnemonic(head.into())))?;

    let operands = split_operands(rest, rest_base);
    let mut i = Instruction { mnemonic, rd: 0, rs1: 0, rs2: 0, imm: 0 };

    if mnemonic.has_imm() {
        if operands.len() != 2 {
            let kind = AsmErrorKind::OperandCount { expected: 2, got: operands.len() };
            return Err(err(lineno, mcol, kind));
        }
        let (rcol, rtok) = operands[0];
        let reg = parse_reg(rtok, RegFile::P, lineno, rcol)?;
        match mnemonic.rd_file() {
            Some(_) => i.rd = reg,
            None => i.rs2 = reg,
        }
        let (mcol2, mtok) = operands[1];
        let (imm, base) = parse_mem(mtok, lineno, mcol2)?;
        i.imm = imm;
        i.rs1 = base;
    } else {
        let slots: Vec<(&mut u8, RegFile)> = {
            let Instruction { rd, rs1, rs2, .. } = &mut i;
            [
                mnemonic.rd_file().map(|f| (rd, f)),
                mnemonic.rs1_file().map(|f| (rs1, f)),
                mnemonic.rs2_file().map(|f| (rs2, f)),
            ]
            .into_iter()
            .flatten()
            .collect()
        };
        if operands.len() != slots.len() {
            let kind = AsmErrorKind::OperandCount { expected: slots.len(), got: operands.len() };
            return Err(err(lineno, mcol, kind));
        }
        for ((slot, file), &(col, token)) in slots.into_iter().zip(&operands) {
            *slot = parse_reg(token, file, lineno, col)?;
        }
    }

    match encode(i) {
        Ok(word) => Ok(Some(word)),
        Err(e) => Err(err(lineno, mcol, AsmErrorKind::Encode(e))),
    }
}

/// Assembles a listing into instruction words, stopping at the first
/// diagnostic.
pub fn assemble(text: &str) -> Result<Vec<u32>, AsmError> {
    let mut words = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if let Some(word) = parse_line(line, idx + 1)? {
            words.push(word);
        }
    }
    Ok(words)
}

/// Disassembly listing plus one warning per word that failed to decode;
/// such words are preserved as `.word` lines.
pub struct Disassembly {
    pub text: String,
    pub warnings: Vec<String>,
}

pub fn disassemble(words: &[u32], fmt_lenient: bool) -> Disassembly {
    let mut text = String::new();
    let mut warnings = Vec::new();
    for (idx, &word) in words.iter().enumerate() {
        match decode_with(word, fmt_lenient) {
            Ok(i) => text.push_str(&i.to_string()),
            Err(e) => {
                text.push_str(&format!(".word {word:#010x}"));
                warnings.push(format!("word {idx}: {e}"));
            }
        }
        text.push('\n');
    }
    Disassembly { text, warnings }
}

/// Flat little-endian binary image of a word sequence.
pub fn words_to_le_bytes(words: &[u32]) -> Vec<u8> {
    words.iter().flat_map(|w| w.to_le_bytes()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RaggedBinary {
    pub len: usize,
}

impl std::error::Error for RaggedBinary {}

impl fmt::Display for RaggedBinary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "binary length {} is not a multiple of 4 bytes", self.len)
    }
}

pub fn words_from_le_bytes(bytes: &[u8]) -> Result<Vec<u32>, RaggedBinary> {
    if bytes.len() % 4 != 0 {
        return Err(RaggedBinary { len: bytes.len() });
    }
    Ok(bytes
        .chunks_exact(4)
        .map(|c| u32::from_le_bytes(c.try_into().unwrap()))
        .collect())
}
