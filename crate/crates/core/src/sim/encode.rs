//! Instruction encoder and a one-line assembler used to build test programs.

use thiserror::Error;

use super::isa::{BranchOp, CsrOp, ImmOp, Instr, LoadOp, Reg, RegOp, StoreOp};
use crate::hier::MulOp;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EncodeError {
    #[error("unknown mnemonic `{0}`")]
    UnknownMnemonic(String),
    #[error("immediate {value} out of range for {what}")]
    ImmediateRange { what: &'static str, value: i64 },
    #[error("bad operand `{0}`")]
    BadOperand(String),
    #[error("expected {expected} operands, found {found}")]
    OperandCount { expected: usize, found: usize },
    #[error("register x{0} out of range")]
    Register(u8),
    #[error("cannot encode illegal instruction 0x{0:08x}")]
    Illegal(u32),
}

fn reg(r: Reg) -> Result<u32, EncodeError> {
    if r.0 < 32 {
        Ok(r.0 as u32)
    } else {
        Err(EncodeError::Register(r.0))
    }
}

fn check(what: &'static str, value: i32, lo: i32, hi: i32, align: i32) -> Result<u32, EncodeError> {
    if value < lo || value > hi || value % align != 0 {
        return Err(EncodeError::ImmediateRange { what, value: value as i64 });
    }
    Ok(value as u32)
}

fn r_type(op: u32, rd: Reg, f3: u32, rs1: Reg, rs2: Reg, f7: u32) -> Result<u32, EncodeError> {
    Ok((f7 << 25) | (reg(rs2)? << 20) | (reg(rs1)? << 15) | (f3 << 12) | (reg(rd)? << 7) | op)
}

fn i_type(op: u32, rd: Reg, f3: u32, rs1: Reg, imm: i32) -> Result<u32, EncodeError> {
    let imm = check("12-bit immediate", imm, -2048, 2047, 1)?;
    Ok(((imm & 0xFFF) << 20) | (reg(rs1)? << 15) | (f3 << 12) | (reg(rd)? << 7) | op)
}

/// Encodes one instruction. Immediates are range- and alignment-checked.
pub fn encode(instr: &Instr) -> Result<u32, EncodeError> {
    match *instr {
        Instr::Lui { rd, imm } | Instr::Auipc { rd, imm } => {
            if imm & 0xFFF != 0 {
                return Err(EncodeError::ImmediateRange { what: "upper immediate", value: imm as i64 });
            }
            let op = if matches!(instr, Instr::Lui { .. }) { 0x37 } else { 0x17 };
            Ok(imm | (reg(rd)? << 7) | op)
        }
        Instr::Jal { rd, offset } => {
            let v = check("jump offset", offset, -(1 << 20), (1 << 20) - 2, 2)?;
            let bits = (((v >> 20) & 1) << 31) | (((v >> 1) & 0x3FF) << 21) | (((v >> 11) & 1) << 20) | (v & 0xF_F000);
            Ok(bits | (reg(rd)? << 7) | 0x6F)
        }
        Instr::Jalr { rd, rs1, offset } => i_type(0x67, rd, 0, rs1, offset),
        Instr::Branch { op, rs1, rs2, offset } => {
            let f3 = match op {
                BranchOp::Beq => 0,
                BranchOp::Bne => 1,
                BranchOp::Blt => 4,
                BranchOp::Bge => 5,
                BranchOp::Bltu => 6,
                BranchOp::Bgeu => 7,
            };
            let v = check("branch offset", offset, -4096, 4094, 2)?;
            let bits = (((v >> 12) & 1) << 31)
                | (((v >> 5) & 0x3F) << 25)
                | (((v >> 1) & 0xF) << 8)
                | (((v >> 11) & 1) << 7);
            Ok(bits | (reg(rs2)? << 20) | (reg(rs1)? << 15) | (f3 << 12) | 0x63)
        }
        Instr::Load { op, rd, rs1, offset } => {
            let f3 = match op {
                LoadOp::Lb => 0,
                LoadOp::Lh => 1,
                LoadOp::Lw => 2,
                LoadOp::Lbu => 4,
                LoadOp::Lhu => 5,
            };
            i_type(0x03, rd, f3, rs1, offset)
        }
        Instr::Store { op, rs1, rs2, offset } => {
            let f3 = match op {
                StoreOp::Sb => 0,
                StoreOp::Sh => 1,
                StoreOp::Sw => 2,
            };
            let v = check("store offset", offset, -2048, 2047, 1)?;
            Ok((((v >> 5) & 0x7F) << 25)
                | (reg(rs2)? << 20)
                | (reg(rs1)? << 15)
                | (f3 << 12)
                | ((v & 0x1F) << 7)
                | 0x23)
        }
        Instr::OpImm { op, rd, rs1, imm } => {
            let (f3, shift_f7) = match op {
                ImmOp::Addi => (0, None),
                ImmOp::Slti => (2, None),
                ImmOp::Sltiu => (3, None),
                ImmOp::Xori => (4, None),
                ImmOp::Ori => (6, None),
                ImmOp::Andi => (7, None),
                ImmOp::Slli => (1, Some(0)),
                ImmOp::Srli => (5, Some(0)),
                ImmOp::Srai => (5, Some(0x20)),
            };
            match shift_f7 {
                None => i_type(0x13, rd, f3, rs1, imm),
                Some(f7) => {
                    let shamt = check("shift amount", imm, 0, 31, 1)?;
                    Ok((f7 << 25) | (shamt << 20) | (reg(rs1)? << 15) | (f3 << 12) | (reg(rd)? << 7) | 0x13)
                }
            }
        }
        Instr::Op { op, rd, rs1, rs2 } => {
            let (f7, f3) = match op {
                RegOp::Add => (0, 0),
                RegOp::Sub => (0x20, 0),
                RegOp::Sll => (0, 1),
                RegOp::Slt => (0, 2),
                RegOp::Sltu => (0, 3),
                RegOp::Xor => (0, 4),
                RegOp::Srl => (0, 5),
                RegOp::Sra => (0x20, 5),
                RegOp::Or => (0, 6),
                RegOp::And => (0, 7),
                RegOp::Mul(MulOp::Mul) => (1, 0),
                RegOp::Mul(MulOp::Mulh) => (1, 1),
                RegOp::Mul(MulOp::Mulhsu) => (1, 2),
                RegOp::Mul(MulOp::Mulhu) => (1, 3),
                RegOp::Div => (1, 4),
                RegOp::Divu => (1, 5),
                RegOp::Rem => (1, 6),
                RegOp::Remu => (1, 7),
            };
            r_type(0x33, rd, f3, rs1, rs2, f7)
        }
        Instr::Fence { pred, succ } => Ok((((pred & 0xF) as u32) << 24) | (((succ & 0xF) as u32) << 20) | 0x0F),
        Instr::Ecall => Ok(0x0000_0073),
        Instr::Ebreak => Ok(0x0010_0073),
        Instr::Csr { op, rd, src, csr } => {
            let f3 = match op {
                CsrOp::Rw => 1,
                CsrOp::Rs => 2,
                CsrOp::Rc => 3,
                CsrOp::Rwi => 5,
                CsrOp::Rsi => 6,
                CsrOp::Rci => 7,
            };
            if csr > 0xFFF {
                return Err(EncodeError::ImmediateRange { what: "csr address", value: csr as i64 });
            }
            if src > 31 {
                return Err(EncodeError::ImmediateRange { what: "csr source", value: src as i64 });
            }
            Ok(((csr as u32) << 20) | ((src as u32) << 15) | (f3 << 12) | (reg(rd)? << 7) | 0x73)
        }
        Instr::Illegal(w) => Err(EncodeError::Illegal(w)),
    }
}

fn parse_int(s: &str) -> Result<i64, EncodeError> {
    let t = s.trim();
    let (neg, body) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t),
    };
    let v = if let Some(hex) = body.strip_prefix("0x").or_else(|| body.strip_prefix("0X")) {
        i64::from_str_radix(hex, 16)
    } else {
        body.parse::<i64>()
    }
    .map_err(|_| EncodeError::BadOperand(s.to_string()))?;
    Ok(if neg { -v } else { v })
}

fn parse_i32(s: &str) -> Result<i32, EncodeError> {
    let v = parse_int(s)?;
    i32::try_from(v).map_err(|_| EncodeError::ImmediateRange { what: "32-bit immediate", value: v })
}

fn parse_reg(s: &str) -> Result<Reg, EncodeError> {
    Reg::parse(s).ok_or_else(|| EncodeError::BadOperand(s.to_string()))
}

/// Parses `offset(reg)`.
fn parse_mem(s: &str) -> Result<(i32, Reg), EncodeError> {
    let s = s.trim();
    let open = s.find('(').ok_or_else(|| EncodeError::BadOperand(s.to_string()))?;
    let inner = s[open + 1..]
        .strip_suffix(')')
        .ok_or_else(|| EncodeError::BadOperand(s.to_string()))?;
    let off = if open == 0 { 0 } else { parse_i32(&s[..open])? };
    Ok((off, parse_reg(inner)?))
}

fn parse_csr(s: &str) -> Result<u16, EncodeError> {
    match s.trim() {
        "cycle" => Ok(0xC00),
        "time" => Ok(0xC01),
        "instret" => Ok(0xC02),
        "cycleh" => Ok(0xC80),
        "timeh" => Ok(0xC81),
        "instreth" => Ok(0xC82),
        "alucsr" => Ok(0x800),
        "mulcsr" => Ok(0x801),
        "divcsr" => Ok(0x802),
        other => {
            let v = parse_int(other)?;
            u16::try_from(v)
                .ok()
                .filter(|&c| c <= 0xFFF)
                .ok_or(EncodeError::ImmediateRange { what: "csr address", value: v })
        }
    }
}

/// Assembles one line such as `mul a0, a0, a1` or `csrrw x0, 0x801, t1`.
/// Branch and jump targets are numeric byte offsets. Supports the RV32IM
/// base mnemonics plus `nop`.
pub fn assemble(line: &str) -> Result<u32, EncodeError> {
    encode(&parse_instr(line)?)
}

pub fn parse_instr(line: &str) -> Result<Instr, EncodeError> {
    let line = line.split('#').next().unwrap_or("").trim();
    let (mnemonic, rest) = match line.find(char::is_whitespace) {
        Some(i) => (&line[..i], line[i..].trim()),
        None => (line, ""),
    };
    let ops: Vec<&str> = if rest.is_empty() { Vec::new() } else { rest.split(',').map(str::trim).collect() };
    let want = |n: usize| -> Result<(), EncodeError> {
        if ops.len() == n {
            Ok(())
        } else {
            Err(EncodeError::OperandCount { expected: n, found: ops.len() })
        }
    };
    let m = mnemonic.to_ascii_lowercase();

    let reg_op = |op: RegOp| -> Result<Instr, EncodeError> {
        want(3)?;
        Ok(Instr::Op { op, rd: parse_reg(ops[0])?, rs1: parse_reg(ops[1])?, rs2: parse_reg(ops[2])? })
    };
    let imm_op = |op: ImmOp| -> Result<Instr, EncodeError> {
        want(3)?;
        Ok(Instr::OpImm { op, rd: parse_reg(ops[0])?, rs1: parse_reg(ops[1])?, imm: parse_i32(ops[2])? })
    };
    let branch = |op: BranchOp| -> Result<Instr, EncodeError> {
        want(3)?;
        Ok(Instr::Branch { op, rs1: parse_reg(ops[0])?, rs2: parse_reg(ops[1])?, offset: parse_i32(ops[2])? })
    };
    let load = |op: LoadOp| -> Result<Instr, EncodeError> {
        want(2)?;
        let (offset, rs1) = parse_mem(ops[1])?;
        Ok(Instr::Load { op, rd: parse_reg(ops[0])?, rs1, offset })
    };
    let store = |op: StoreOp| -> Result<Instr, EncodeError> {
        want(2)?;
        let (offset, rs1) = parse_mem(ops[1])?;
        Ok(Instr::Store { op, rs1, rs2: parse_reg(ops[0])?, offset })
    };
    let csr = |op: CsrOp| -> Result<Instr, EncodeError> {
        want(3)?;
        let src = if op.is_immediate() {
            let v = parse_int(ops[2])?;
            u8::try_from(v)
                .ok()
                .filter(|&v| v < 32)
                .ok_or(EncodeError::ImmediateRange { what: "csr immediate", value: v })?
        } else {
            parse_reg(ops[2])?.0
        };
        Ok(Instr::Csr { op, rd: parse_reg(ops[0])?, src, csr: parse_csr(ops[1])? })
    };
    let upper = |lui: bool| -> Result<Instr, EncodeError> {
        want(2)?;
        let v = parse_int(ops[1])?;
        if !(0..=0xF_FFFF).contains(&v) {
            return Err(EncodeError::ImmediateRange { what: "20-bit upper immediate", value: v });
        }
        let rd = parse_reg(ops[0])?;
        let imm = (v as u32) << 12;
        Ok(if lui { Instr::Lui { rd, imm } } else { Instr::Auipc { rd, imm } })
    };

    match m.as_str() {
        "nop" => {
            want(0)?;
            Ok(Instr::NOP)
        }
        "lui" => upper(true),
        "auipc" => upper(false),
        "jal" => {
            want(2)?;
            Ok(Instr::Jal { rd: parse_reg(ops[0])?, offset: parse_i32(ops[1])? })
        }
        "jalr" => {
            want(2)?;
            let (offset, rs1) = parse_mem(ops[1])?;
            Ok(Instr::Jalr { rd: parse_reg(ops[0])?, rs1, offset })
        }
        "beq" => branch(BranchOp::Beq),
        "bne" => branch(BranchOp::Bne),
        "blt" => branch(BranchOp::Blt),
        "bge" => branch(BranchOp::Bge),
        "bltu" => branch(BranchOp::Bltu),
        "bgeu" => branch(BranchOp::Bgeu),
        "lb" => load(LoadOp::Lb),
        "lh" => load(LoadOp::Lh),
        "lw" => load(LoadOp::Lw),
        "lbu" => load(LoadOp::Lbu),
        "lhu" => load(LoadOp::Lhu),
        "sb" => store(StoreOp::Sb),
        "sh" => store(StoreOp::Sh),
        "sw" => store(StoreOp::Sw),
        "addi" => imm_op(ImmOp::Addi),
        "slti" => imm_op(ImmOp::Slti),
        "sltiu" => imm_op(ImmOp::Sltiu),
        "xori" => imm_op(ImmOp::Xori),
        "ori" => imm_op(ImmOp::Ori),
        "andi" => imm_op(ImmOp::Andi),
        "slli" => imm_op(ImmOp::Slli),
        "srli" => imm_op(ImmOp::Srli),
        "srai" => imm_op(ImmOp::Srai),
        "add" => reg_op(RegOp::Add),
        "sub" => reg_op(RegOp::Sub),
        "sll" => reg_op(RegOp::Sll),
        "slt" => reg_op(RegOp::Slt),
        "sltu" => reg_op(RegOp::Sltu),
        "xor" => reg_op(RegOp::Xor),
        "srl" => reg_op(RegOp::Srl),
        "sra" => reg_op(RegOp::Sra),
        "or" => reg_op(RegOp::Or),
        "and" => reg_op(RegOp::And),
        "mul" => reg_op(RegOp::Mul(MulOp::Mul)),
        "mulh" => reg_op(RegOp::Mul(MulOp::Mulh)),
        "mulhsu" => reg_op(RegOp::Mul(MulOp::Mulhsu)),
        "mulhu" => reg_op(RegOp::Mul(MulOp::Mulhu)),
        "div" => reg_op(RegOp::Div),
        "divu" => reg_op(RegOp::Divu),
        "rem" => reg_op(RegOp::Rem),
        "remu" => reg_op(RegOp::Remu),
        "fence" => {
            if ops.is_empty() {
                return Ok(Instr::Fence { pred: 0xF, succ: 0xF });
            }
            want(2)?;
            let pred = parse_int(ops[0])?;
            let succ = parse_int(ops[1])?;
            if !(0..16).contains(&pred) || !(0..16).contains(&succ) {
                return Err(EncodeError::BadOperand(rest.to_string()));
            }
            Ok(Instr::Fence { pred: pred as u8, succ: succ as u8 })
        }
        "ecall" => {
            want(0)?;
            Ok(Instr::Ecall)
        }
        "ebreak" => {
            want(0)?;
            Ok(Instr::Ebreak)
        }
        "csrrw" => csr(CsrOp::Rw),
        "csrrs" => csr(CsrOp::Rs),
        "csrrc" => csr(CsrOp::Rc),
        "csrrwi" => csr(CsrOp::Rwi),
        "csrrsi" => csr(CsrOp::Rsi),
        "csrrci" => csr(CsrOp::Rci),
        _ => Err(EncodeError::UnknownMnemonic(mnemonic.to_string())),
    }
}
