//! Two-pass text assembler with labels, plus a loadable program image.
//!
//! Lines hold one instruction, a `label:` or both. Branch and `jal` targets
//! may be labels. Pseudo-instructions: `li rd, imm`, `mv rd, rs`, `j label`,
//! `ret`, `beqz`/`bnez rs, label`, `csrr rd, csr`, `csrw csr, rs`.

use std::collections::HashMap;

use thiserror::Error;

use super::elf::write_exec;
use super::encode::{encode, parse_instr, EncodeError};
use super::memory::{Memory, OutOfBounds};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AsmError {
    #[error("line {line}: {source}")]
    Encode { line: usize, source: EncodeError },
    #[error("line {line}: duplicate label `{label}`")]
    DuplicateLabel { line: usize, label: String },
    #[error("line {line}: undefined label `{label}`")]
    UndefinedLabel { line: usize, label: String },
    #[error("line {line}: bad immediate `{text}`")]
    BadImmediate { line: usize, text: String },
}

fn split_hi_lo(v: i32) -> (u32, i32) {
    let lo = (v << 20) >> 20;
    let hi = (v.wrapping_sub(lo) as u32) >> 12;
    (hi, lo)
}

fn parse_imm(s: &str) -> Option<i64> {
    let s = s.trim();
    let (neg, body) = match s.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, s),
    };
    let v = match body.strip_prefix("0x").or_else(|| body.strip_prefix("0X")) {
        Some(h) => i64::from_str_radix(h, 16).ok()?,
        None => body.parse::<i64>().ok()?,
    };
    Some(if neg { -v } else { v })
}

/// Expands pseudo-instructions into base instruction text. Target labels are
/// left in place for the second pass.
fn expand(line_no: usize, text: &str) -> Result<Vec<String>, AsmError> {
    let (m, rest) = match text.find(char::is_whitespace) {
        Some(i) => (&text[..i], text[i..].trim()),
        None => (text, ""),
    };
    let ops: Vec<&str> = rest.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    let op = |i: usize| ops.get(i).copied().unwrap_or("");
    Ok(match m {
        "li" => {
            let v = parse_imm(op(1))
                .filter(|v| (i32::MIN as i64..=u32::MAX as i64).contains(v))
                .ok_or_else(|| AsmError::BadImmediate { line: line_no, text: op(1).to_string() })?
                as i32;
            if (-2048..2048).contains(&v) {
                vec![format!("addi {}, zero, {v}", op(0))]
            } else {
                let (hi, lo) = split_hi_lo(v);
                vec![format!("lui {}, {hi:#x}", op(0)), format!("addi {0}, {0}, {lo}", op(0))]
            }
        }
        "mv" => vec![format!("addi {}, {}, 0", op(0), op(1))],
        "j" => vec![format!("jal zero, {}", op(0))],
        "ret" => vec!["jalr zero, 0(ra)".to_string()],
        "beqz" => vec![format!("beq {}, zero, {}", op(0), op(1))],
        "bnez" => vec![format!("bne {}, zero, {}", op(0), op(1))],
        "csrr" => vec![format!("csrrs {}, {}, zero", op(0), op(1))],
        "csrw" => vec![format!("csrrw zero, {}, {}", op(0), op(1))],
        _ => vec![text.to_string()],
    })
}

fn is_label(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_' || c == '.')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.')
}

/// Assembles `source` for execution at `base`.
pub fn assemble_program(source: &str, base: u32) -> Result<Vec<u32>, AsmError> {
    let mut labels: HashMap<String, u32> = HashMap::new();
    let mut lines: Vec<(usize, String)> = Vec::new();
    for (i, raw) in source.lines().enumerate() {
        let line_no = i + 1;
        let mut text = raw.split('#').next().unwrap_or("").trim();
        while let Some(colon) = text.find(':') {
            let label = text[..colon].trim();
            if !is_label(label) {
                break;
            }
            let addr = base + 4 * lines.len() as u32;
            if labels.insert(label.to_string(), addr).is_some() {
                return Err(AsmError::DuplicateLabel { line: line_no, label: label.to_string() });
            }
            text = text[colon + 1..].trim();
        }
        if !text.is_empty() {
            for l in expand(line_no, text)? {
                lines.push((line_no, l));
            }
        }
    }

    let mut words = Vec::with_capacity(lines.len());
    for (idx, (line_no, text)) in lines.iter().enumerate() {
        let pc = base + 4 * idx as u32;
        let mnemonic = text.split_whitespace().next().unwrap_or("");
        let is_target = matches!(mnemonic, "beq" | "bne" | "blt" | "bge" | "bltu" | "bgeu" | "jal");
        let resolved = match text.rsplit_once(',') {
            Some((head, last)) if is_target && is_label(last.trim()) => {
                let label = last.trim();
                let target = labels
                    .get(label)
                    .ok_or_else(|| AsmError::UndefinedLabel { line: *line_no, label: label.to_string() })?;
                format!("{head}, {}", target.wrapping_sub(pc) as i32)
            }
            _ => text.clone(),
        };
        let word = parse_instr(&resolved)
            .and_then(|i| encode(&i))
            .map_err(|source| AsmError::Encode { line: *line_no, source })?;
        words.push(word);
    }
    Ok(words)
}

/// Code and data segments with an entry point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProgramImage {
    pub entry: u32,
    pub segments: Vec<(u32, Vec<u8>)>,
}

impl ProgramImage {
    pub fn from_words(entry: u32, words: &[u32]) -> Self {
        let bytes = words.iter().flat_map(|w| w.to_le_bytes()).collect();
        ProgramImage { entry, segments: vec![(entry, bytes)] }
    }

    pub fn add_segment(&mut self, addr: u32, bytes: Vec<u8>) {
        self.segments.push((addr, bytes));
    }

    pub fn load_into(&self, mem: &mut Memory) -> Result<(), OutOfBounds> {
        for (addr, bytes) in &self.segments {
            mem.write(*addr, bytes)?;
        }
        Ok(())
    }

    pub fn load(&self, mem_size: usize) -> Result<Memory, OutOfBounds> {
        let mut mem = Memory::new(mem_size);
        self.load_into(&mut mem)?;
        Ok(mem)
    }

    pub fn to_elf(&self) -> Vec<u8> {
        let segs: Vec<(u32, &[u8])> = self.segments.iter().map(|(a, b)| (*a, b.as_slice())).collect();
        write_exec(self.entry, &segs)
    }
}
