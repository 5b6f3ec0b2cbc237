//! Instruction-set simulator for straight-line Xposit programs.
//!
//! The machine holds the RV64 integer file (x0 pinned to zero), a 32-entry
//! posit register file, the single quire, and a byte-addressed
//! little-endian memory. Programs are sequences of instruction words
//! indexed by pc; there is no control flow, so loops are host-driven or
//! unrolled. Every architectural write is reported in a trace entry, and
//! a fault (illegal word, out-of-range access) halts the machine for good.

use crate::asm::words_to_le_bytes;
use crate::convert::{pmv_w_x, pmv_x_w};
use crate::isa::{decode_with, DecodeError, Instruction, Mnemonic};
use crate::{Posit32, Quire32};
use serde::Serialize;
use std::fmt;

/// Architectural change made by one instruction. Comparison and
/// conversion results land in `xreg`; `xreg` writes to index 0 report the
/// pinned value actually visible, zero.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "target", rename_all = "lowercase")]
pub enum Effect {
    Xreg { index: u8, value: u64 },
    Preg { index: u8, bits: u32 },
    Quire { hex: String },
    Mem { addr: u64, bits: u32 },
}

/// One executed instruction: where it sat, its canonical text, and what
/// it wrote.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceEntry {
    pub pc: usize,
    pub instr: String,
    pub effect: Effect,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaultKind {
    Illegal(DecodeError),
    Memory { addr: u64 },
}

/// Unrecoverable failure; the machine refuses further steps after one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Fault {
    pub pc: usize,
    pub kind: FaultKind,
}

impl std::error::Error for Fault {}

impl fmt::Display for Fault {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            FaultKind::Illegal(e) => write!(f, "pc {}: {e}", self.pc),
            FaultKind::Memory { addr } => {
                write!(f, "pc {}: memory access at {addr:#x} out of range", self.pc)
            }
        }
    }
}

/// Why stepping stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Halt {
    /// pc ran off the end of the program.
    Done,
    /// The step budget was exhausted with instructions left.
    MaxSteps,
    Fault(Fault),
}

pub struct Machine {
    xregs: [u64; 32],
    pregs: [Posit32; 32],
    quire: Quire32,
    mem: Vec<u8>,
    pc: usize,
    fault: Option<Fault>,
    fmt_lenient: bool,
}

impl Machine {
    pub fn new(mem_bytes: usize) -> Self {
        Machine {
            xregs: [0; 32],
            pregs: [Posit32::ZERO; 32],
            quire: Quire32::new(),
            mem: vec![0; mem_bytes],
            pc: 0,
            fault: None,
            fmt_lenient: false,
        }
    }

    /// Accept fmt = 01 words alongside the canonical 10.
    pub fn set_fmt_lenient(&mut self, on: bool) {
        self.fmt_lenient = on;
    }

    pub fn xreg(&self, index: u8) -> u64 {
        self.xregs[index as usize]
    }

    /// Writes an integer register; x0 stays zero.
    pub fn set_xreg(&mut self, index: u8, value: u64) {
        if index != 0 {
            self.xregs[index as usize] = value;
        }
    }

    pub fn preg(&self, index: u8) -> Posit32 {
        self.pregs[index as usize]
    }

    pub fn set_preg(&mut self, index: u8, value: Posit32) {
        self.pregs[index as usize] = value;
    }

    pub fn quire(&self) -> &Quire32 {
        &self.quire
    }

    pub fn set_quire(&mut self, quire: Quire32) {
        self.quire = quire;
    }

    pub fn mem_len(&self) -> usize {
        self.mem.len()
    }

    /// Memory block starting at `addr`, or `None` when any byte falls
    /// outside the array.
    pub fn read_mem(&self, addr: u64, len: usize) -> Option<&[u8]> {
        let start = usize::try_from(addr).ok()?;
        let end = start.checked_add(len)?;
        self.mem.get(start..end)
    }

    /// Writes a block; false (and no change) when it does not fit.
    pub fn write_mem(&mut self, addr: u64, bytes: &[u8]) -> bool {
        let Ok(start) = usize::try_from(addr) else { return false };
        let Some(end) = start.checked_add(bytes.len()) else { return false };
        match self.mem.get_mut(start..end) {
            Some(slot) => {
                slot.copy_from_slice(bytes);
                true
            }
            None => false,
        }
    }

    pub fn pc(&self) -> usize {
        self.pc
    }

    /// Repositions pc, e.g. to rerun a straight-line program. Does not
    /// clear a fault.
    pub fn set_pc(&mut self, pc: usize) {
        self.pc = pc;
    }

    pub fn fault(&self) -> Option<Fault> {
        self.fault
    }

    /// Executes the instruction at pc and advances. A fault is sticky:
    /// once one occurs, stepping keeps returning it.
    pub fn step(&mut self, program: &[u32]) -> Result<TraceEntry, Halt> {
        if let Some(f) = self.fault {
            return Err(Halt::Fault(f));
        }
        let Some(&word) = program.get(self.pc) else {
            return Err(Halt::Done);
        };
        let instr = match decode_with(word, self.fmt_lenient) {
            Ok(i) => i,
            Err(e) => return Err(self.fault_at(FaultKind::Illegal(e))),
        };
        let effect = match self.exec(instr) {
            Ok(effect) => effect,
            Err(kind) => return Err(self.fault_at(kind)),
        };
        let entry = TraceEntry { pc: self.pc, instr: instr.to_string(), effect };
        self.pc += 1;
        Ok(entry)
    }

    /// Steps until end-of-program, a fault, or `max_steps`, collecting the
    /// trace.
    pub fn run(&mut self, program: &[u32], max_steps: usize) -> (Halt, Vec<TraceEntry>) {
        let mut trace = Vec::new();
        for _ in 0..max_steps {
            match self.step(program) {
                Ok(entry) => trace.push(entry),
                Err(halt) => return (halt, trace),
            }
        }
        if self.pc < program.len() {
            (Halt::MaxSteps, trace)
        } else {
            (Halt::Done, trace)
        }
    }

    fn fault_at(&mut self, kind: FaultKind) -> Halt {
        let fault = Fault { pc: self.pc, kind };
        self.fault = Some(fault);
        Halt::Fault(fault)
    }

    fn write_x(&mut self, index: u8, value: u64) -> Effect {
        self.set_xreg(index, value);
        Effect::Xreg { index, value: self.xregs[index as usize] }
    }

    fn write_p(&mut self, index: u8, value: Posit32) -> Effect {
        self.pregs[index as usize] = value;
        Effect::Preg { index, bits: value.to_bits() }
    }

    fn quire_effect(&self) -> Effect {
        Effect::Quire { hex: self.quire.to_hex() }
    }

    fn exec(&mut self, i: Instruction) -> Result<Effect, FaultKind> {
        use Mnemonic::*;
        let (a, b) = (self.preg(i.rs1), self.preg(i.rs2));
        let xa = self.xreg(i.rs1);
        let effect = match i.mnemonic {
            Plw => {
                let addr = xa.wrapping_add(i.imm as i64 as u64);
                let bytes = self.read_mem(addr, 4).ok_or(FaultKind::Memory { addr })?;
                let bits = u32::from_le_bytes(bytes.try_into().unwrap());
                self.write_p(i.rd, Posit32::from_bits(bits))
            }
            Psw => {
                let addr = xa.wrapping_add(i.imm as i64 as u64);
                let bits = b.to_bits();
                if !self.write_mem(addr, &bits.to_le_bytes()) {
                    return Err(FaultKind::Memory { addr });
                }
                Effect::Mem { addr, bits }
            }
            PaddS => self.write_p(i.rd, a + b),
            PsubS => self.write_p(i.rd, a - b),
            PmulS => self.write_p(i.rd, a * b),
            PdivS => self.write_p(i.rd, a.adiv(b)),
            PminS => self.write_p(i.rd, a.min(b)),
            PmaxS => self.write_p(i.rd, a.max(b)),
            PsqrtS => self.write_p(i.rd, a.asqrt()),
            QmaddS => {
                self.quire.madd(a, b);
                self.quire_effect()
            }
            QmsubS => {
                self.quire.msub(a, b);
                self.quire_effect()
            }
            QclrS => {
                self.quire.clear();
                self.quire_effect()
            }
            QnegS => {
                self.quire.negate();
                self.quire_effect()
            }
            QroundS => {
                let rounded = self.quire.round();
                self.write_p(i.rd, rounded)
            }
            // The W-form results are sign-extended to 64 bits, unsigned
            // included, following the RV64 convention for 32-bit values.
            PcvtWS => self.write_x(i.rd, a.to_i32() as i64 as u64),
            PcvtWuS => self.write_x(i.rd, a.to_u32() as i32 as i64 as u64),
            PcvtLS => self.write_x(i.rd, a.to_i64() as u64),
            PcvtLuS => self.write_x(i.rd, a.to_u64()),
            PcvtSW => self.write_p(i.rd, Posit32::from_i32(xa as u32 as i32)),
            PcvtSWu => self.write_p(i.rd, Posit32::from_u32(xa as u32)),
            PcvtSL => self.write_p(i.rd, Posit32::from_i64(xa as i64)),
            PcvtSLu => self.write_p(i.rd, Posit32::from_u64(xa)),
            PsgnjS => self.write_p(i.rd, a.sign_inject(b)),
            PsgnjnS => self.write_p(i.rd, a.sign_inject_not(b)),
            PsgnjxS => self.write_p(i.rd, a.sign_inject_xor(b)),
            PmvXW => self.write_x(i.rd, pmv_x_w(a)),
            PmvWX => self.write_p(i.rd, pmv_w_x(xa)),
            PeqS => self.write_x(i.rd, (a == b) as u64),
            PltS => self.write_x(i.rd, (a < b) as u64),
            PleS => self.write_x(i.rd, (a <= b) as u64),
        };
        Ok(effect)
    }
}

/// Convenience for memory images in tests and the CLI.
pub fn write_words(machine: &mut Machine, addr: u64, words: &[u32]) -> bool {
    machine.write_mem(addr, &words_to_le_bytes(words))
}
