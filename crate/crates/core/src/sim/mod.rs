//! RV32IM instruction-set simulator with the multiplier control CSR.

pub mod asm;
pub mod cpu;
pub mod elf;
pub mod encode;
pub mod isa;
pub mod memory;
pub mod model;

pub use asm::{assemble_program, AsmError, ProgramImage};
pub use cpu::{CpuState, ExitReason, Halt, Isa, MulUnit, Retired, RunReport, SimError, Simulator};
pub use memory::{Memory, DEFAULT_MEMORY_SIZE};
pub use model::{InstrClass, ModelError, PowerMode, TimingEnergyModel};
