//! Instruction-accurate RV32IM(E) core with the `mulcsr` extension.
//!
//! Timing and energy are accumulated per retired instruction through
//! [`TimingEnergyModel`]; there is no pipeline model.
//!
//! Environment: `ebreak` halts; `ecall` with `a7 = 93` exits with code `a0`,
//! `a7 = 64` writes `a2` bytes from address `a1` to the captured output when
//! `a0` is 1 or 2. Every other `ecall` is a diagnostic. RV32E has no `a7`, so
//! there the call number is taken from `t0`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hier::{mul_signed, reference_mul, HierConfig, MulCsr, MulOp};
use crate::mul8::Mul8Kind;

use super::isa::{decode, BranchOp, CsrOp, ImmOp, Instr, LoadOp, Reg, RegOp, StoreOp};
use super::memory::{Memory, OutOfBounds};
use super::model::{InstrClass, PowerMode, TimingEnergyModel};

pub const CSR_ALU: u16 = 0x800;
pub const CSR_MUL: u16 = 0x801;
pub const CSR_DIV: u16 = 0x802;
pub const CSR_CYCLE: u16 = 0xC00;
pub const CSR_TIME: u16 = 0xC01;
pub const CSR_INSTRET: u16 = 0xC02;
pub const CSR_CYCLEH: u16 = 0xC80;
pub const CSR_TIMEH: u16 = 0xC81;
pub const CSR_INSTRETH: u16 = 0xC82;

pub const SYS_WRITE: u32 = 64;
pub const SYS_EXIT: u32 = 93;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Isa {
    Rv32i,
    /// 16 registers; `x16..x31` are illegal.
    Rv32e,
}

/// Which multiplier sits behind the M-extension multiply instructions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MulUnit {
    /// Conventional exact multiplier; `mulcsr` is stored but ignored.
    Baseline,
    /// Hierarchical multiplier built from the given 8-bit core, configured
    /// from `mulcsr`.
    Reconfigurable(Mul8Kind),
}

impl Isa {
    pub fn parse(s: &str) -> Option<Isa> {
        match s {
            "rv32im" | "rv32i" => Some(Isa::Rv32i),
            "rv32em" | "rv32e" => Some(Isa::Rv32e),
            _ => None,
        }
    }

    pub fn syscall_reg(self) -> Reg {
        match self {
            Isa::Rv32i => Reg::A7,
            Isa::Rv32e => Reg::T0,
        }
    }
}

impl MulUnit {
    pub fn parse(s: &str) -> Option<MulUnit> {
        match s {
            "exact" | "baseline" => Some(MulUnit::Baseline),
            other => Mul8Kind::parse(other).map(MulUnit::Reconfigurable),
        }
    }

    pub fn power_mode(self, csr: &MulCsr) -> PowerMode {
        match (self, csr.enable) {
            (MulUnit::Baseline, _) | (MulUnit::Reconfigurable(Mul8Kind::ExactDadda), _) => PowerMode::Baseline,
            (MulUnit::Reconfigurable(Mul8Kind::Ssm), false) => PowerMode::SsmExact,
            (MulUnit::Reconfigurable(Mul8Kind::Ssm), true) => PowerMode::SsmApprox,
            (MulUnit::Reconfigurable(Mul8Kind::Dfm), false) => PowerMode::DfmExact,
            (MulUnit::Reconfigurable(Mul8Kind::Dfm), true) => PowerMode::DfmApprox,
        }
    }

    pub fn name(self) -> String {
        match self {
            MulUnit::Baseline => "exact".to_string(),
            MulUnit::Reconfigurable(k) => k.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
pub enum SimError {
    #[error("pc 0x{pc:08x}: instruction fetch not 4-byte aligned")]
    MisalignedPc { pc: u32 },
    #[error("pc 0x{pc:08x}: illegal instruction 0x{word:08x}")]
    IllegalInstruction { pc: u32, word: u32 },
    #[error("pc 0x{pc:08x}: register x{reg} does not exist in RV32E")]
    RegisterOutOfRange { pc: u32, reg: u8 },
    #[error("pc 0x{pc:08x}: access of {len} bytes at 0x{addr:08x} is outside memory")]
    MemoryFault { pc: u32, addr: u32, len: u32 },
    #[error("pc 0x{pc:08x}: unknown CSR 0x{csr:03x}")]
    UnknownCsr { pc: u32, csr: u16 },
    #[error("pc 0x{pc:08x}: write to read-only CSR 0x{csr:03x}")]
    ReadOnlyCsr { pc: u32, csr: u16 },
    #[error("pc 0x{pc:08x}: unsupported ecall number {number}")]
    UnsupportedSyscall { pc: u32, number: u32 },
    #[error("the core has already halted")]
    Halted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Halt {
    Ebreak,
    Exit { code: i32 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExitReason {
    Ebreak,
    Exit,
    BudgetExhausted,
    Fault,
}

/// Architectural and accounting state.
#[derive(Debug, Clone, PartialEq)]
pub struct CpuState {
    pub regs: [u32; 32],
    pub pc: u32,
    pub alucsr: u32,
    pub mulcsr: u32,
    pub divcsr: u32,
    pub cycle: u64,
    pub instret: u64,
    pub energy_pj: f64,
    pub mul_count: u64,
    pub mulh_count: u64,
    pub halted: Option<Halt>,
}

impl CpuState {
    pub fn new(pc: u32, sp: u32) -> Self {
        let mut regs = [0u32; 32];
        regs[Reg::SP.index()] = sp;
        CpuState {
            regs,
            pc,
            alucsr: 0,
            mulcsr: 0,
            divcsr: 0,
            cycle: 0,
            instret: 0,
            energy_pj: 0.0,
            mul_count: 0,
            mulh_count: 0,
            halted: None,
        }
    }

    #[inline]
    pub fn reg(&self, r: Reg) -> u32 {
        self.regs[r.index()]
    }

    #[inline]
    fn set(&mut self, r: Reg, v: u32) {
        if r != Reg::ZERO {
            self.regs[r.index()] = v;
        }
    }
}

/// One retired instruction, recorded when tracing is on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Retired {
    pub pc: u32,
    pub word: u32,
    pub cycles: u32,
    pub mode: PowerMode,
    pub energy_pj: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub exit_reason: ExitReason,
    pub exit_code: Option<i32>,
    pub diagnostic: Option<String>,
    pub unit: String,
    pub instret: u64,
    pub cycle: u64,
    pub cpi: f64,
    pub energy_pj: f64,
    pub pj_per_instr: f64,
    pub mul_count: u64,
    pub mulh_count: u64,
    pub final_mulcsr: u32,
    pub stdout: String,
    pub warnings: Vec<String>,
}

pub struct Simulator {
    pub state: CpuState,
    pub mem: Memory,
    pub model: TimingEnergyModel,
    pub unit: MulUnit,
    pub isa: Isa,
    pub stdout: Vec<u8>,
    pub warnings: Vec<String>,
    trace: Option<Vec<Retired>>,
}

fn mem_fault(pc: u32) -> impl Fn(OutOfBounds) -> SimError {
    move |e| SimError::MemoryFault { pc, addr: e.addr, len: e.len }
}

impl Simulator {
    /// Core reset at `entry` with `sp` at the top of memory.
    pub fn new(mem: Memory, entry: u32, unit: MulUnit, model: TimingEnergyModel) -> Self {
        let sp = (mem.size() as u64).min(u32::MAX as u64 + 1) as u32 & !0xF;
        Simulator {
            state: CpuState::new(entry, sp),
            mem,
            model,
            unit,
            isa: Isa::Rv32i,
            stdout: Vec::new(),
            warnings: Vec::new(),
            trace: None,
        }
    }

    pub fn with_isa(mut self, isa: Isa) -> Self {
        self.isa = isa;
        self
    }

    pub fn enable_trace(&mut self) {
        self.trace.get_or_insert_with(Vec::new);
    }

    pub fn trace(&self) -> &[Retired] {
        self.trace.as_deref().unwrap_or(&[])
    }

    fn mul(&self, a: u32, b: u32, op: MulOp) -> u32 {
        match self.unit {
            MulUnit::Baseline => reference_mul(a, b, op),
            MulUnit::Reconfigurable(kind) => {
                let cfg = HierConfig::from_csr(kind, &MulCsr::decode(self.state.mulcsr));
                mul_signed(a, b, op, &cfg)
            }
        }
    }

    fn csr_read(&self, pc: u32, csr: u16) -> Result<u32, SimError> {
        let s = &self.state;
        Ok(match csr {
            CSR_ALU => s.alucsr,
            CSR_MUL => s.mulcsr,
            CSR_DIV => s.divcsr,
            CSR_CYCLE | CSR_TIME => s.cycle as u32,
            CSR_CYCLEH | CSR_TIMEH => (s.cycle >> 32) as u32,
            CSR_INSTRET => s.instret as u32,
            CSR_INSTRETH => (s.instret >> 32) as u32,
            _ => return Err(SimError::UnknownCsr { pc, csr }),
        })
    }

    fn csr_write(&mut self, pc: u32, csr: u16, v: u32) -> Result<(), SimError> {
        match csr {
            CSR_ALU => self.state.alucsr = v,
            CSR_MUL => {
                let decoded = MulCsr::decode(v);
                if let Err(e) = decoded.validate() {
                    self.warnings.push(format!("pc 0x{pc:08x}: {e}; treated as 0b00"));
                }
                self.state.mulcsr = v;
            }
            CSR_DIV => self.state.divcsr = v,
            CSR_CYCLE | CSR_TIME | CSR_INSTRET | CSR_CYCLEH | CSR_TIMEH | CSR_INSTRETH => {
                return Err(SimError::ReadOnlyCsr { pc, csr })
            }
            _ => return Err(SimError::UnknownCsr { pc, csr }),
        }
        Ok(())
    }

    fn syscall(&mut self, pc: u32) -> Result<Option<Halt>, SimError> {
        let number = self.state.reg(self.isa.syscall_reg());
        let a0 = self.state.reg(Reg::A0);
        match number {
            SYS_EXIT => Ok(Some(Halt::Exit { code: a0 as i32 })),
            SYS_WRITE => {
                let (buf, len) = (self.state.reg(Reg::A1), self.state.reg(Reg::A2));
                let ret = if a0 == 1 || a0 == 2 {
                    let bytes = self.mem.read(buf, len).map_err(mem_fault(pc))?;
                    self.stdout.extend_from_slice(bytes);
                    len
                } else {
                    u32::MAX
                };
                self.state.set(Reg::A0, ret);
                Ok(None)
            }
            _ => Err(SimError::UnsupportedSyscall { pc, number }),
        }
    }

    /// Executes one instruction. On error the architectural state is left as
    /// it was before the instruction.
    pub fn step(&mut self) -> Result<(), SimError> {
        if self.state.halted.is_some() {
            return Err(SimError::Halted);
        }
        let pc = self.state.pc;
        if !pc.is_multiple_of(4) {
            return Err(SimError::MisalignedPc { pc });
        }
        let word = self.mem.load_u32(pc).map_err(mem_fault(pc))?;
        let instr = decode(word);
        if instr.is_illegal() {
            return Err(SimError::IllegalInstruction { pc, word });
        }
        if self.isa == Isa::Rv32e && instr.max_reg() >= 16 {
            return Err(SimError::RegisterOutOfRange { pc, reg: instr.max_reg() });
        }
        let mode = self.unit.power_mode(&MulCsr::decode(self.state.mulcsr));
        let mut next = pc.wrapping_add(4);
        let class;
        let s = &self.state;
        match instr {
            Instr::Lui { rd, imm } => {
                self.state.set(rd, imm);
                class = InstrClass::Alu;
            }
            Instr::Auipc { rd, imm } => {
                self.state.set(rd, pc.wrapping_add(imm));
                class = InstrClass::Alu;
            }
            Instr::Jal { rd, offset } => {
                next = pc.wrapping_add(offset as u32);
                self.state.set(rd, pc.wrapping_add(4));
                class = InstrClass::Jump;
            }
            Instr::Jalr { rd, rs1, offset } => {
                next = s.reg(rs1).wrapping_add(offset as u32) & !1;
                self.state.set(rd, pc.wrapping_add(4));
                class = InstrClass::Jump;
            }
            Instr::Branch { op, rs1, rs2, offset } => {
                let (a, b) = (s.reg(rs1), s.reg(rs2));
                let taken = match op {
                    BranchOp::Beq => a == b,
                    BranchOp::Bne => a != b,
                    BranchOp::Blt => (a as i32) < (b as i32),
                    BranchOp::Bge => (a as i32) >= (b as i32),
                    BranchOp::Bltu => a < b,
                    BranchOp::Bgeu => a >= b,
                };
                if taken {
                    next = pc.wrapping_add(offset as u32);
                }
                class = InstrClass::Branch { taken };
            }
            Instr::Load { op, rd, rs1, offset } => {
                let addr = s.reg(rs1).wrapping_add(offset as u32);
                let f = mem_fault(pc);
                let v = match op {
                    LoadOp::Lb => self.mem.load_u8(addr).map_err(f)? as i8 as i32 as u32,
                    LoadOp::Lbu => self.mem.load_u8(addr).map_err(f)? as u32,
                    LoadOp::Lh => self.mem.load_u16(addr).map_err(f)? as i16 as i32 as u32,
                    LoadOp::Lhu => self.mem.load_u16(addr).map_err(f)? as u32,
                    LoadOp::Lw => self.mem.load_u32(addr).map_err(f)?,
                };
                self.state.set(rd, v);
                class = InstrClass::Load;
            }
            Instr::Store { op, rs1, rs2, offset } => {
                let addr = s.reg(rs1).wrapping_add(offset as u32);
                let v = s.reg(rs2);
                let f = mem_fault(pc);
                match op {
                    StoreOp::Sb => self.mem.store_u8(addr, v as u8).map_err(f)?,
                    StoreOp::Sh => self.mem.store_u16(addr, v as u16).map_err(f)?,
                    StoreOp::Sw => self.mem.store_u32(addr, v).map_err(f)?,
                }
                class = InstrClass::Store;
            }
            Instr::OpImm { op, rd, rs1, imm } => {
                let a = s.reg(rs1);
                let i = imm as u32;
                let v = match op {
                    ImmOp::Addi => a.wrapping_add(i),
                    ImmOp::Slti => ((a as i32) < imm) as u32,
                    ImmOp::Sltiu => (a < i) as u32,
                    ImmOp::Xori => a ^ i,
                    ImmOp::Ori => a | i,
                    ImmOp::Andi => a & i,
                    ImmOp::Slli => a << (i & 31),
                    ImmOp::Srli => a >> (i & 31),
                    ImmOp::Srai => ((a as i32) >> (i & 31)) as u32,
                };
                self.state.set(rd, v);
                class = InstrClass::Alu;
            }
            Instr::Op { op, rd, rs1, rs2 } => {
                let (a, b) = (s.reg(rs1), s.reg(rs2));
                let (sa, sb) = (a as i32, b as i32);
                let (v, c) = match op {
                    RegOp::Add => (a.wrapping_add(b), InstrClass::Alu),
                    RegOp::Sub => (a.wrapping_sub(b), InstrClass::Alu),
                    RegOp::Sll => (a << (b & 31), InstrClass::Alu),
                    RegOp::Slt => ((sa < sb) as u32, InstrClass::Alu),
                    RegOp::Sltu => ((a < b) as u32, InstrClass::Alu),
                    RegOp::Xor => (a ^ b, InstrClass::Alu),
                    RegOp::Srl => (a >> (b & 31), InstrClass::Alu),
                    RegOp::Sra => ((sa >> (b & 31)) as u32, InstrClass::Alu),
                    RegOp::Or => (a | b, InstrClass::Alu),
                    RegOp::And => (a & b, InstrClass::Alu),
                    RegOp::Mul(m) => (self.mul(a, b, m), InstrClass::Mul),
                    RegOp::Div => {
                        let q = if b == 0 { u32::MAX } else { sa.wrapping_div(sb) as u32 };
                        (q, InstrClass::Div)
                    }
                    RegOp::Divu => (a.checked_div(b).unwrap_or(u32::MAX), InstrClass::Div),
                    RegOp::Rem => {
                        let r = if b == 0 { a } else { sa.wrapping_rem(sb) as u32 };
                        (r, InstrClass::Div)
                    }
                    RegOp::Remu => (a.checked_rem(b).unwrap_or(a), InstrClass::Div),
                };
                if let RegOp::Mul(m) = op {
                    self.state.mul_count += 1;
                    if m != MulOp::Mul {
                        self.state.mulh_count += 1;
                    }
                }
                self.state.set(rd, v);
                class = c;
            }
            Instr::Fence { .. } => class = InstrClass::System,
            Instr::Ecall => {
                if let Some(h) = self.syscall(pc)? {
                    self.state.halted = Some(h);
                }
                class = InstrClass::System;
            }
            Instr::Ebreak => {
                self.state.halted = Some(Halt::Ebreak);
                class = InstrClass::System;
            }
            Instr::Csr { op, rd, src, csr } => {
                let old = self.csr_read(pc, csr)?;
                let operand = if op.is_immediate() { src as u32 } else { s.reg(Reg(src)) };
                // rs/rc with a zero source do not write.
                let new = match op {
                    CsrOp::Rw | CsrOp::Rwi => Some(operand),
                    CsrOp::Rs | CsrOp::Rsi => (src != 0).then_some(old | operand),
                    CsrOp::Rc | CsrOp::Rci => (src != 0).then_some(old & !operand),
                };
                if let Some(v) = new {
                    self.csr_write(pc, csr, v)?;
                }
                self.state.set(rd, old);
                class = InstrClass::System;
            }
            Instr::Illegal(_) => unreachable!("rejected above"),
        }
        let cycles = self.model.cycles_for(class);
        let energy = self.model.instr_energy_pj(cycles, mode);
        let st = &mut self.state;
        st.pc = next;
        st.cycle += cycles as u64;
        st.instret += 1;
        st.energy_pj += energy;
        if let Some(t) = self.trace.as_mut() {
            t.push(Retired { pc, word, cycles, mode, energy_pj: energy });
        }
        Ok(())
    }

    /// Runs until halt, fault, or `budget` retired instructions.
    pub fn run(&mut self, budget: u64) -> RunReport {
        let mut fault = None;
        let start = self.state.instret;
        while self.state.halted.is_none() && self.state.instret - start < budget {
            if let Err(e) = self.step() {
                fault = Some(e);
                break;
            }
        }
        let (exit_reason, exit_code) = match (&fault, self.state.halted) {
            (Some(_), _) => (ExitReason::Fault, None),
            (None, Some(Halt::Ebreak)) => (ExitReason::Ebreak, None),
            (None, Some(Halt::Exit { code })) => (ExitReason::Exit, Some(code)),
            (None, None) => (ExitReason::BudgetExhausted, None),
        };
        self.report(exit_reason, exit_code, fault.map(|e| e.to_string()))
    }

    fn report(&self, exit_reason: ExitReason, exit_code: Option<i32>, diagnostic: Option<String>) -> RunReport {
        let s = &self.state;
        let per = |x: f64| if s.instret == 0 { 0.0 } else { x / s.instret as f64 };
        RunReport {
            exit_reason,
            exit_code,
            diagnostic,
            unit: self.unit.name(),
            instret: s.instret,
            cycle: s.cycle,
            cpi: per(s.cycle as f64),
            energy_pj: s.energy_pj,
            pj_per_instr: per(s.energy_pj),
            mul_count: s.mul_count,
            mulh_count: s.mulh_count,
            final_mulcsr: s.mulcsr,
            stdout: String::from_utf8_lossy(&self.stdout).into_owned(),
            warnings: self.warnings.clone(),
        }
    }
}
