//! Xposit instruction words: encoding, decoding, dispatch metadata.
//!
//! All thirty instructions live under the custom POSIT major opcode
//! 0001011 and are told apart by funct3: 000 for computational ops
//! (further split by funct5 and a two-bit fmt fixed at 10 for 32-bit
//! posits), 001 for the posit load, 011 for the posit store. One table
//! below carries each row's encoding constants, operand shape, and
//! dispatch unit; encoder, decoder, assembler, and simulator all read it,
//! so the directions cannot drift apart.

use std::fmt;

pub const OPCODE: u32 = 0b0001011;
const FMT: u32 = 0b10;
const FMT_ALT: u32 = 0b01;

const FUNCT3_COMP: u32 = 0b000;
const FUNCT3_LOAD: u32 = 0b001;
const FUNCT3_STORE: u32 = 0b011;

/// Execution unit the decoder dispatches to. Min/max and the comparisons
/// run in the integer ALU on raw patterns; loads and stores bypass the
/// arithmetic units entirely; everything else goes to the posit unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Unit {
    Pau,
    Alu,
    Load,
    Store,
}

/// Register file an operand field addresses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegFile {
    X,
    P,
}

impl RegFile {
    fn prefix(self) -> char {
        match self {
            RegFile::X => 'x',
            RegFile::P => 'p',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mnemonic {
    Plw,
    Psw,
    PaddS,
    PsubS,
    PmulS,
    PdivS,
    PminS,
    PmaxS,
    PsqrtS,
    QmaddS,
    QmsubS,
    QclrS,
    QnegS,
    QroundS,
    PcvtWS,
    PcvtWuS,
    PcvtLS,
    PcvtLuS,
    PcvtSW,
    PcvtSWu,
    PcvtSL,
    PcvtSLu,
    PsgnjS,
    PsgnjnS,
    PsgnjxS,
    PmvXW,
    PmvWX,
    PeqS,
    PltS,
    PleS,
}

/// One instruction-table row. `funct5` is `None` for the two memory ops,
/// which are selected by funct3 alone and carry an immediate. An operand
/// field listed as `None` is fixed to zero in the word.
struct Row {
    mnemonic: Mnemonic,
    name: &'static str,
    funct5: Option<u32>,
    rd: Option<RegFile>,
    rs1: Option<RegFile>,
    rs2: Option<RegFile>,
    unit: Unit,
}

use Mnemonic as M;
use RegFile::{P, X};

#[rustfmt::skip]
const TABLE: [Row; 30] = [
    Row { mnemonic: M::Plw,     name: "plw",       funct5: None,          rd: Some(P), rs1: Some(X), rs2: None,    unit: Unit::Load },
    Row { mnemonic: M::Psw,     name: "psw",       funct5: None,          rd: None,    rs1: Some(X), rs2: Some(P), unit: Unit::Store },
    Row { mnemonic: M::PaddS,   name: "padd.s",    funct5: Some(0b00000), rd: Some(P), rs1: Some(P), rs2: Some(P), unit: Unit::Pau },
    Row { mnemonic: M::PsubS,   name: "psub.s",    funct5: Some(0b00001), rd: Some(P), rs1: Some(P), rs2: Some(P), unit: Unit::Pau },
    Row { mnemonic: M::PmulS,   name: "pmul.s",    funct5: Some(0b00010), rd: Some(P), rs1: Some(P), rs2: Some(P), unit: Unit::Pau },
    Row { mnemonic: M::PdivS,   name: "pdiv.s",    funct5: Some(0b00011), rd: Some(P), rs1: Some(P), rs2: Some(P), unit: Unit::Pau },
    Row { mnemonic: M::PminS,   name: "pmin.s",    funct5: Some(0b00100), rd: Some(P), rs1: Some(P), rs2: Some(P), unit: Unit::Alu },
    Row { mnemonic: M::PmaxS,   name: "pmax.s",    funct5: Some(0b00101), rd: Some(P), rs1: Some(P), rs2: Some(P), unit: Unit::Alu },
    Row { mnemonic: M::PsqrtS,  name: "psqrt.s",   funct5: Some(0b00110), rd: Some(P), rs1: Some(P), rs2: None,    unit: Unit::Pau },
    Row { mnemonic: M::QmaddS,  name: "qmadd.s",   funct5: Some(0b00111), rd: None,    rs1: Some(P), rs2: Some(P), unit: Unit::Pau },
    Row { mnemonic: M::QmsubS,  name: "qmsub.s",   funct5: Some(0b01000), rd: None,    rs1: Some(P), rs2: Some(P), unit: Unit::Pau },
    Row { mnemonic: M::QclrS,   name: "qclr.s",    funct5: Some(0b01001), rd: None,    rs1: None,    rs2: None,    unit: Unit::Pau },
    Row { mnemonic: M::QnegS,   name: "qneg.s",    funct5: Some(0b01010), rd: None,    rs1: None,    rs2: None,    unit: Unit::Pau },
    Row { mnemonic: M::QroundS, name: "qround.s",  funct5: Some(0b01011), rd: Some(P), rs1: None,    rs2: None,    unit: Unit::Pau },
    Row { mnemonic: M::PcvtWS,  name: "pcvt.w.s",  funct5: Some(0b01100), rd: Some(X), rs1: Some(P), rs2: None,    unit: Unit::Pau },
    Row { mnemonic: M::PcvtWuS, name: "pcvt.wu.s", funct5: Some(0b01101), rd: Some(X), rs1: Some(P), rs2: None,    unit: Unit::Pau },
    Row { mnemonic: M::PcvtLS,  name: "pcvt.l.s",  funct5: Some(0b01110), rd: Some(X), rs1: Some(P), rs2: None,    unit: Unit::Pau },
    Row { mnemonic: M::PcvtLuS, name: "pcvt.lu.s", funct5: Some(0b01111), rd: Some(X), rs1: Some(P), rs2: None,    unit: Unit::Pau },
    Row { mnemonic: M::PcvtSW,  name: "pcvt.s.w",  funct5: Some(0b10000), rd: Some(P), rs1: Some(X), rs2: None,    unit: Unit::Pau },
    Row { mnemonic: M::PcvtSWu, name: "pcvt.s.wu", funct5: Some(0b10001), rd: Some(P), rs1: Some(X), rs2: None,    unit: Unit::Pau },
    Row { mnemonic: M::PcvtSL,  name: "pcvt.s.l",  funct5: Some(0b10010), rd: Some(P), rs1: Some(X), rs2: None,    unit: Unit::Pau },
    Row { mnemonic: M::PcvtSLu, name: "pcvt.s.lu", funct5: Some(0b10011), rd: Some(P), rs1: Some(X), rs2: None,    unit: Unit::Pau },
    Row { mnemonic: M::PsgnjS,  name: "psgnj.s",   funct5: Some(0b10100), rd: Some(P), rs1: Some(P), rs2: Some(P), unit: Unit::Pau },
    Row { mnemonic: M::PsgnjnS, name: "psgnjn.s",  funct5: Some(0b10101), rd: Some(P), rs1: Some(P), rs2: Some(P), unit: Unit::Pau },
    Row { mnemonic: M::PsgnjxS, name: "psgnjx.s",  funct5: Some(0b10110), rd: Some(P), rs1: Some(P), rs2: Some(P), unit: Unit::Pau },
    Row { mnemonic: M::PmvXW,   name: "pmv.x.w",   funct5: Some(0b10111), rd: Some(X), rs1: Some(P), rs2: None,    unit: Unit::Pau },
    Row { mnemonic: M::PmvWX,   name: "pmv.w.x",   funct5: Some(0b11000), rd: Some(P), rs1: Some(X), rs2: None,    unit: Unit::Pau },
    Row { mnemonic: M::PeqS,    name: "peq.s",     funct5: Some(0b11001), rd: Some(X), rs1: Some(P), rs2: Some(P), unit: Unit::Alu },
    Row { mnemonic: M::PltS,    name: "plt.s",     funct5: Some(0b11010), rd: Some(X), rs1: Some(P), rs2: Some(P), unit: Unit::Alu },
    Row { mnemonic: M::PleS,    name: "ple.s",     funct5: Some(0b11011), rd: Some(X), rs1: Some(P), rs2: Some(P), unit: Unit::Alu },
];

impl Mnemonic {
    pub const ALL: [Mnemonic; 30] = {
        let mut all = [M::Plw; 30];
        let mut i = 0;
        while i < 30 {
            all[i] = TABLE[i].mnemonic;
            i += 1;
        }
        all
    };

    fn row(self) -> &'static Row {
        TABLE.iter().find(|r| r.mnemonic == self).unwrap()
    }

    /// Canonical lowercase assembly name.
    pub fn name(self) -> &'static str {
        self.row().name
    }

    /// Case-insensitive mnemonic lookup.
    pub fn from_name(name: &str) -> Option<Mnemonic> {
        TABLE
            .iter()
            .find(|r| r.name.eq_ignore_ascii_case(name))
            .map(|r| r.mnemonic)
    }

    pub fn unit(self) -> Unit {
        self.row().unit
    }

    /// Register file of the rd field, or `None` when the row fixes it to
    /// zero.
    pub fn rd_file(self) -> Option<RegFile> {
        self.row().rd
    }

    pub fn rs1_file(self) -> Option<RegFile> {
        self.row().rs1
    }

    pub fn rs2_file(self) -> Option<RegFile> {
        self.row().rs2
    }

    /// True for the two memory ops, the only rows with an immediate.
    pub fn has_imm(self) -> bool {
        self.row().funct5.is_none()
    }
}

/// One Xposit instruction. Operand fields a mnemonic does not use must be
/// zero; `imm` is the signed 12-bit byte offset of the memory ops and zero
/// elsewhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Instruction {
    pub mnemonic: Mnemonic,
    pub rd: u8,
    pub rs1: u8,
    pub rs2: u8,
    pub imm: i16,
}

impl Instruction {
    pub fn unit(&self) -> Unit {
        self.mnemonic.unit()
    }
}

impl fmt::Display for Instruction {
    /// Canonical assembly text: `name rd, rs1, rs2` with unused fields
    /// omitted, or `name reg, imm(base)` for the memory ops.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let row = self.mnemonic.row();
        write!(f, "{}", row.name)?;
        if self.mnemonic.has_imm() {
            let (file, reg) = match row.rd {
                Some(file) => (file, self.rd),
                None => (row.rs2.unwrap(), self.rs2),
            };
            return write!(f, " {}{}, {}(x{})", file.prefix(), reg, self.imm, self.rs1);
        }
        let mut first = true;
        for (file, reg) in [(row.rd, self.rd), (row.rs1, self.rs1), (row.rs2, self.rs2)] {
            if let Some(file) = file {
                let sep = if first { " " } else { ", " };
                write!(f, "{sep}{}{}", file.prefix(), reg)?;
                first = false;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EncodeError {
    RegisterOutOfRange { field: &'static str, value: u8 },
    ImmediateOutOfRange { value: i16 },
    FixedFieldNotZero { field: &'static str, value: u8 },
    ImmediateOnNonMemoryOp { value: i16 },
}

impl std::error::Error for EncodeError {}

impl fmt::Display for EncodeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::RegisterOutOfRange { field, value } => {
                write!(f, "{field} register index {value} exceeds 31")
            }
            Self::ImmediateOutOfRange { value } => {
                write!(f, "immediate {value} outside [-2048, 2047]")
            }
            Self::FixedFieldNotZero { field, value } => {
                write!(f, "{field} is fixed to zero for this mnemonic, got {value}")
            }
            Self::ImmediateOnNonMemoryOp { value } => {
                write!(f, "immediate {value} on a non-memory mnemonic")
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecodeError {
    /// The low seven bits are not the POSIT opcode.
    NotPosit { word: u32 },
    /// POSIT opcode with a funct3 no row uses.
    BadFunct3 { word: u32, funct3: u32 },
    /// Computational funct3 with an unassigned funct5.
    UnassignedFunct5 { word: u32, funct5: u32 },
    /// Computational row with a fmt other than 10 (or 01 when lenient).
    BadFmt { word: u32, fmt: u32 },
    /// A field the matched row fixes to zero is set.
    FixedFieldNotZero { word: u32, field: &'static str },
}

impl DecodeError {
    pub fn word(&self) -> u32 {
        match *self {
            Self::NotPosit { word }
            | Self::BadFunct3 { word, .. }
            | Self::UnassignedFunct5 { word, .. }
            | Self::BadFmt { word, .. }
            | Self::FixedFieldNotZero { word, .. } => word,
        }
    }
}

impl std::error::Error for DecodeError {}

impl fmt::Display for DecodeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NotPosit { word } => write!(f, "{word:#010x} is not a POSIT-opcode word"),
            Self::BadFunct3 { word, funct3 } => {
                write!(f, "illegal instruction {word:#010x}: funct3 {funct3:03b}")
            }
            Self::UnassignedFunct5 { word, funct5 } => {
                write!(f, "illegal instruction {word:#010x}: unassigned funct5 {funct5:05b}")
            }
            Self::BadFmt { word, fmt } => {
                write!(f, "illegal instruction {word:#010x}: fmt {fmt:02b}")
            }
            Self::FixedFieldNotZero { word, field } => {
                write!(f, "illegal instruction {word:#010x}: fixed-zero {field} is set")
            }
        }
    }
}

fn bits(word: u32, lo: u32, len: u32) -> u32 {
    (word >> lo) & ((1 << len) - 1)
}

/// Builds the instruction word, rejecting out-of-range operands and
/// nonzero values in fields the mnemonic fixes to zero. Computational
/// words always carry fmt = 10.
pub fn encode(i: Instruction) -> Result<u32, EncodeError> {
    let row = i.mnemonic.row();
    for (name, file, value) in [
        ("rd", row.rd, i.rd),
        ("rs1", row.rs1, i.rs1),
        ("rs2", row.rs2, i.rs2),
    ] {
        match file {
            Some(_) if value > 31 => {
                return Err(EncodeError::RegisterOutOfRange { field: name, value })
            }
            None if value != 0 => {
                return Err(EncodeError::FixedFieldNotZero { field: name, value })
            }
            _ => {}
        }
    }
    if i.mnemonic.has_imm() {
        if !(-2048..=2047).contains(&i.imm) {
            return Err(EncodeError::ImmediateOutOfRange { value: i.imm });
        }
    } else if i.imm != 0 {
        return Err(EncodeError::ImmediateOnNonMemoryOp { value: i.imm });
    }

    let (rd, rs1, rs2) = (i.rd as u32, i.rs1 as u32, i.rs2 as u32);
    let word = match row.funct5 {
        Some(funct5) => {
            (funct5 << 27)
                | (FMT << 25)
                | (rs2 << 20)
                | (rs1 << 15)
                | (FUNCT3_COMP << 12)
                | (rd << 7)
                | OPCODE
        }
        None if i.mnemonic == M::Plw => {
            let imm = (i.imm as u32) & 0xFFF;
            (imm << 20) | (rs1 << 15) | (FUNCT3_LOAD << 12) | (rd << 7) | OPCODE
        }
        None => {
            let imm = (i.imm as u32) & 0xFFF;
            (bits(imm, 5, 7) << 25)
                | (rs2 << 20)
                | (rs1 << 15)
                | (FUNCT3_STORE << 12)
                | (bits(imm, 0, 5) << 7)
                | OPCODE
        }
    };
    Ok(word)
}

/// Strict decode: fmt must be 10 exactly as the instruction table prints.
pub fn decode(word: u32) -> Result<Instruction, DecodeError> {
    decode_with(word, false)
}

/// Decode with optional fmt leniency: when `fmt_lenient` is set, fmt = 01
/// is accepted alongside the table's 10.
pub fn decode_with(word: u32, fmt_lenient: bool) -> Result<Instruction, DecodeError> {
    if bits(word, 0, 7) != OPCODE {
        return Err(DecodeError::NotPosit { word });
    }
    let funct3 = bits(word, 12, 3);
    let (rd, rs1, rs2) = (bits(word, 7, 5), bits(word, 15, 5), bits(word, 20, 5));
    match funct3 {
        FUNCT3_COMP => {
            let funct5 = bits(word, 27, 5);
            let row = TABLE
                .iter()
                .find(|r| r.funct5 == Some(funct5))
                .ok_or(DecodeError::UnassignedFunct5 { word, funct5 })?;
            let fmt = bits(word, 25, 2);
            if fmt != FMT && !(fmt_lenient && fmt == FMT_ALT) {
                return Err(DecodeError::BadFmt { word, fmt });
            }
            for (name, file, value) in
                [("rd", row.rd, rd), ("rs1", row.rs1, rs1), ("rs2", row.rs2, rs2)]
            {
                if file.is_none() && value != 0 {
                    return Err(DecodeError::FixedFieldNotZero { word, field: name });
                }
            }
            Ok(Instruction {
                mnemonic: row.mnemonic,
                rd: rd as u8,
                rs1: rs1 as u8,
                rs2: rs2 as u8,
                imm: 0,
            })
        }
        FUNCT3_LOAD => Ok(Instruction {
            mnemonic: M::Plw,
            rd: rd as u8,
            rs1: rs1 as u8,
            rs2: 0,
            imm: sign_extend_12(bits(word, 20, 12)),
        }),
        FUNCT3_STORE => Ok(Instruction {
            mnemonic: M::Psw,
            rd: 0,
            rs1: rs1 as u8,
            rs2: rs2 as u8,
            imm: sign_extend_12((bits(word, 25, 7) << 5) | bits(word, 7, 5)),
        }),
        _ => Err(DecodeError::BadFunct3 { word, funct3 }),
    }
}

fn sign_extend_12(raw: u32) -> i16 {
    ((raw << 4) as u16 as i16) >> 4
}
