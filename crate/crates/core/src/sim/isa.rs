//! RV32IM instruction representation and decoder.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::hier::MulOp;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Reg(pub u8);

impl Reg {
    pub const ZERO: Reg = Reg(0);
    pub const RA: Reg = Reg(1);
    pub const SP: Reg = Reg(2);
    pub const T0: Reg = Reg(5);
    pub const T1: Reg = Reg(6);
    pub const T2: Reg = Reg(7);
    pub const S0: Reg = Reg(8);
    pub const S1: Reg = Reg(9);
    pub const A0: Reg = Reg(10);
    pub const A1: Reg = Reg(11);
    pub const A2: Reg = Reg(12);
    pub const A3: Reg = Reg(13);
    pub const A4: Reg = Reg(14);
    pub const A5: Reg = Reg(15);
    pub const A6: Reg = Reg(16);
    pub const A7: Reg = Reg(17);

    const ABI: [&'static str; 32] = [
        "zero", "ra", "sp", "gp", "tp", "t0", "t1", "t2", "s0", "s1", "a0", "a1", "a2", "a3", "a4", "a5", "a6", "a7",
        "s2", "s3", "s4", "s5", "s6", "s7", "s8", "s9", "s10", "s11", "t3", "t4", "t5", "t6",
    ];

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn abi_name(self) -> &'static str {
        Self::ABI[self.index() & 31]
    }

    /// Accepts `x0`..`x31`, ABI names and `fp`.
    pub fn parse(s: &str) -> Option<Reg> {
        let s = s.trim();
        if let Some(n) = s.strip_prefix('x') {
            if let Ok(n) = n.parse::<u8>() {
                return (n < 32).then_some(Reg(n));
            }
        }
        if s == "fp" {
            return Some(Reg::S0);
        }
        Self::ABI.iter().position(|&name| name == s).map(|i| Reg(i as u8))
    }
}

impl fmt::Display for Reg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.abi_name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BranchOp {
    Beq,
    Bne,
    Blt,
    Bge,
    Bltu,
    Bgeu,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LoadOp {
    Lb,
    Lh,
    Lw,
    Lbu,
    Lhu,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StoreOp {
    Sb,
    Sh,
    Sw,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ImmOp {
    Addi,
    Slti,
    Sltiu,
    Xori,
    Ori,
    Andi,
    Slli,
    Srli,
    Srai,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegOp {
    Add,
    Sub,
    Sll,
    Slt,
    Sltu,
    Xor,
    Srl,
    Sra,
    Or,
    And,
    Mul(MulOp),
    Div,
    Divu,
    Rem,
    Remu,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CsrOp {
    Rw,
    Rs,
    Rc,
    Rwi,
    Rsi,
    Rci,
}

impl CsrOp {
    pub fn is_immediate(self) -> bool {
        matches!(self, Self::Rwi | Self::Rsi | Self::Rci)
    }
}

/// One decoded instruction. Immediates are stored sign-extended as they are
/// used; `Lui`/`Auipc` hold the already-shifted upper immediate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Instr {
    Lui { rd: Reg, imm: u32 },
    Auipc { rd: Reg, imm: u32 },
    Jal { rd: Reg, offset: i32 },
    Jalr { rd: Reg, rs1: Reg, offset: i32 },
    Branch { op: BranchOp, rs1: Reg, rs2: Reg, offset: i32 },
    Load { op: LoadOp, rd: Reg, rs1: Reg, offset: i32 },
    Store { op: StoreOp, rs1: Reg, rs2: Reg, offset: i32 },
    OpImm { op: ImmOp, rd: Reg, rs1: Reg, imm: i32 },
    Op { op: RegOp, rd: Reg, rs1: Reg, rs2: Reg },
    Fence { pred: u8, succ: u8 },
    Ecall,
    Ebreak,
    /// `src` is a register index for the register forms and the 5-bit
    /// immediate for the `*i` forms.
    Csr { op: CsrOp, rd: Reg, src: u8, csr: u16 },
    Illegal(u32),
}

impl Instr {
    pub const NOP: Instr = Instr::OpImm { op: ImmOp::Addi, rd: Reg::ZERO, rs1: Reg::ZERO, imm: 0 };

    pub fn is_illegal(&self) -> bool {
        matches!(self, Instr::Illegal(_))
    }

    /// Highest register index referenced, for RV32E checks.
    pub fn max_reg(&self) -> u8 {
        match *self {
            Instr::Lui { rd, .. } | Instr::Auipc { rd, .. } | Instr::Jal { rd, .. } => rd.0,
            Instr::Jalr { rd, rs1, .. } | Instr::Load { rd, rs1, .. } | Instr::OpImm { rd, rs1, .. } => rd.0.max(rs1.0),
            Instr::Branch { rs1, rs2, .. } | Instr::Store { rs1, rs2, .. } => rs1.0.max(rs2.0),
            Instr::Op { rd, rs1, rs2, .. } => rd.0.max(rs1.0).max(rs2.0),
            Instr::Csr { op, rd, src, .. } => {
                if op.is_immediate() {
                    rd.0
                } else {
                    rd.0.max(src)
                }
            }
            Instr::Fence { .. } | Instr::Ecall | Instr::Ebreak | Instr::Illegal(_) => 0,
        }
    }
}

fn rd(w: u32) -> Reg {
    Reg(((w >> 7) & 31) as u8)
}
fn rs1(w: u32) -> Reg {
    Reg(((w >> 15) & 31) as u8)
}
fn rs2(w: u32) -> Reg {
    Reg(((w >> 20) & 31) as u8)
}
fn funct3(w: u32) -> u32 {
    (w >> 12) & 7
}
fn funct7(w: u32) -> u32 {
    w >> 25
}
fn imm_i(w: u32) -> i32 {
    (w as i32) >> 20
}
fn imm_s(w: u32) -> i32 {
    (((w as i32) >> 25) << 5) | ((w >> 7) & 0x1F) as i32
}
fn imm_b(w: u32) -> i32 {
    let sign = ((w as i32) >> 31) << 12;
    sign | (((w >> 7) & 1) << 11) as i32 | (((w >> 25) & 0x3F) << 5) as i32 | (((w >> 8) & 0xF) << 1) as i32
}
fn imm_j(w: u32) -> i32 {
    let sign = ((w as i32) >> 31) << 20;
    sign | (w & 0xF_F000) as i32 | (((w >> 20) & 1) << 11) as i32 | (((w >> 21) & 0x3FF) << 1) as i32
}

/// Total decoder: every word maps to an instruction or `Illegal`.
pub fn decode(w: u32) -> Instr {
    let illegal = Instr::Illegal(w);
    if w & 3 != 3 {
        return illegal;
    }
    match w & 0x7F {
        0x37 => Instr::Lui { rd: rd(w), imm: w & 0xFFFF_F000 },
        0x17 => Instr::Auipc { rd: rd(w), imm: w & 0xFFFF_F000 },
        0x6F => Instr::Jal { rd: rd(w), offset: imm_j(w) },
        0x67 if funct3(w) == 0 => Instr::Jalr { rd: rd(w), rs1: rs1(w), offset: imm_i(w) },
        0x63 => {
            let op = match funct3(w) {
                0 => BranchOp::Beq,
                1 => BranchOp::Bne,
                4 => BranchOp::Blt,
                5 => BranchOp::Bge,
                6 => BranchOp::Bltu,
                7 => BranchOp::Bgeu,
                _ => return illegal,
            };
            Instr::Branch { op, rs1: rs1(w), rs2: rs2(w), offset: imm_b(w) }
        }
        0x03 => {
            let op = match funct3(w) {
                0 => LoadOp::Lb,
                1 => LoadOp::Lh,
                2 => LoadOp::Lw,
                4 => LoadOp::Lbu,
                5 => LoadOp::Lhu,
                _ => return illegal,
            };
            Instr::Load { op, rd: rd(w), rs1: rs1(w), offset: imm_i(w) }
        }
        0x23 => {
            let op = match funct3(w) {
                0 => StoreOp::Sb,
                1 => StoreOp::Sh,
                2 => StoreOp::Sw,
                _ => return illegal,
            };
            Instr::Store { op, rs1: rs1(w), rs2: rs2(w), offset: imm_s(w) }
        }
        0x13 => {
            let shamt = ((w >> 20) & 31) as i32;
            let (op, imm) = match (funct3(w), funct7(w)) {
                (0, _) => (ImmOp::Addi, imm_i(w)),
                (2, _) => (ImmOp::Slti, imm_i(w)),
                (3, _) => (ImmOp::Sltiu, imm_i(w)),
                (4, _) => (ImmOp::Xori, imm_i(w)),
                (6, _) => (ImmOp::Ori, imm_i(w)),
                (7, _) => (ImmOp::Andi, imm_i(w)),
                (1, 0) => (ImmOp::Slli, shamt),
                (5, 0) => (ImmOp::Srli, shamt),
                (5, 0x20) => (ImmOp::Srai, shamt),
                _ => return illegal,
            };
            Instr::OpImm { op, rd: rd(w), rs1: rs1(w), imm }
        }
        0x33 => {
            let op = match (funct7(w), funct3(w)) {
                (0, 0) => RegOp::Add,
                (0x20, 0) => RegOp::Sub,
                (0, 1) => RegOp::Sll,
                (0, 2) => RegOp::Slt,
                (0, 3) => RegOp::Sltu,
                (0, 4) => RegOp::Xor,
                (0, 5) => RegOp::Srl,
                (0x20, 5) => RegOp::Sra,
                (0, 6) => RegOp::Or,
                (0, 7) => RegOp::And,
                (1, 0) => RegOp::Mul(MulOp::Mul),
                (1, 1) => RegOp::Mul(MulOp::Mulh),
                (1, 2) => RegOp::Mul(MulOp::Mulhsu),
                (1, 3) => RegOp::Mul(MulOp::Mulhu),
                (1, 4) => RegOp::Div,
                (1, 5) => RegOp::Divu,
                (1, 6) => RegOp::Rem,
                (1, 7) => RegOp::Remu,
                _ => return illegal,
            };
            Instr::Op { op, rd: rd(w), rs1: rs1(w), rs2: rs2(w) }
        }
        0x0F if funct3(w) == 0 && w >> 28 == 0 && rd(w) == Reg::ZERO && rs1(w) == Reg::ZERO => Instr::Fence {
            pred: ((w >> 24) & 0xF) as u8,
            succ: ((w >> 20) & 0xF) as u8,
        },
        0x73 => {
            let csr = (w >> 20) as u16;
            let op = match funct3(w) {
                0 => {
                    return match w {
                        0x0000_0073 => Instr::Ecall,
                        0x0010_0073 => Instr::Ebreak,
                        _ => illegal,
                    }
                }
                1 => CsrOp::Rw,
                2 => CsrOp::Rs,
                3 => CsrOp::Rc,
                5 => CsrOp::Rwi,
                6 => CsrOp::Rsi,
                7 => CsrOp::Rci,
                _ => return illegal,
            };
            Instr::Csr { op, rd: rd(w), src: rs1(w).0, csr }
        }
        _ => illegal,
    }
}

impl fmt::Display for Instr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Instr::Lui { rd, imm } => write!(f, "lui {rd}, 0x{:x}", imm >> 12),
            Instr::Auipc { rd, imm } => write!(f, "auipc {rd}, 0x{:x}", imm >> 12),
            Instr::Jal { rd, offset } => write!(f, "jal {rd}, {offset}"),
            Instr::Jalr { rd, rs1, offset } => write!(f, "jalr {rd}, {offset}({rs1})"),
            Instr::Branch { op, rs1, rs2, offset } => {
                write!(f, "{} {rs1}, {rs2}, {offset}", format!("{op:?}").to_lowercase())
            }
            Instr::Load { op, rd, rs1, offset } => {
                write!(f, "{} {rd}, {offset}({rs1})", format!("{op:?}").to_lowercase())
            }
            Instr::Store { op, rs1, rs2, offset } => {
                write!(f, "{} {rs2}, {offset}({rs1})", format!("{op:?}").to_lowercase())
            }
            Instr::OpImm { op, rd, rs1, imm } => {
                write!(f, "{} {rd}, {rs1}, {imm}", format!("{op:?}").to_lowercase())
            }
            Instr::Op { op, rd, rs1, rs2 } => {
                let name = match op {
                    RegOp::Mul(m) => format!("{m:?}"),
                    other => format!("{other:?}"),
                };
                write!(f, "{} {rd}, {rs1}, {rs2}", name.to_lowercase())
            }
            Instr::Fence { pred, succ } => write!(f, "fence {pred:#x}, {succ:#x}"),
            Instr::Ecall => f.write_str("ecall"),
            Instr::Ebreak => f.write_str("ebreak"),
            Instr::Csr { op, rd, src, csr } => {
                let name = format!("csrr{}", &format!("{op:?}").to_lowercase()[1..]);
                if op.is_immediate() {
                    write!(f, "{name} {rd}, {csr:#x}, {src}")
                } else {
                    write!(f, "{name} {rd}, {csr:#x}, {}", Reg(src))
                }
            }
            Instr::Illegal(w) => write!(f, "illegal 0x{w:08x}"),
        }
    }
}
