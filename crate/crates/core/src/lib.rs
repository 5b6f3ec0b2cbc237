//! Posit arithmetic (8/16/32-bit, two exponent bits) with exact quire
//! accumulation, logarithmic approximate divide and square root, the Xposit
//! RISC-V instruction codec with assembler and disassembler, an instruction
//! set simulator, and accuracy benchmarks (GEMM and max-pooling) comparing
//! posit and IEEE float pipelines.

pub mod approx;
pub mod asm;
pub mod bench;
pub mod convert;
pub mod isa;
pub mod posit;
pub mod quire;
pub mod sim;

pub use posit::{Posit16, Posit32, Posit8, PositFields};
pub use quire::{Quire16, Quire32, Quire8};
