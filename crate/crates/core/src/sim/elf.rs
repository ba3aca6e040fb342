//! Minimal ELF32 support: load little-endian RISC-V executables, and write
//! simple ones for test fixtures and generated workloads.

use thiserror::Error;

use super::memory::Memory;

const EHDR_SIZE: usize = 52;
const PHDR_SIZE: usize = 32;
const PT_LOAD: u32 = 1;
const ET_EXEC: u16 = 2;
const EM_RISCV: u16 = 0xF3;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ElfError {
    #[error("file too short for an ELF header ({0} bytes)")]
    TooShort(usize),
    #[error("bad ELF magic")]
    BadMagic,
    #[error("ELF class {0} is not 32-bit")]
    WrongClass(u8),
    #[error("ELF data encoding {0} is not little-endian")]
    WrongEndian(u8),
    #[error("ELF machine {0:#x} is not RISC-V")]
    WrongMachine(u16),
    #[error("ELF type {0} is not an executable")]
    WrongType(u16),
    #[error("program header table at {offset:#x} ({count} entries) runs past end of file")]
    BadProgramHeaders { offset: u32, count: u16 },
    #[error("segment {index} file range {offset:#x}+{size:#x} runs past end of file")]
    SegmentOutOfFile { index: usize, offset: u32, size: u32 },
    #[error("segment {index} at {vaddr:#x}+{memsz:#x} does not fit in memory")]
    SegmentOutOfMemory { index: usize, vaddr: u32, memsz: u32 },
    #[error("segment {index} has file size larger than memory size")]
    SegmentSizes { index: usize },
    #[error("segments {first} and {second} overlap")]
    OverlappingSegments { first: usize, second: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LoadSegment {
    pub offset: u32,
    pub vaddr: u32,
    pub filesz: u32,
    pub memsz: u32,
}

fn u16_at(b: &[u8], at: usize) -> u16 {
    u16::from_le_bytes([b[at], b[at + 1]])
}

fn u32_at(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes([b[at], b[at + 1], b[at + 2], b[at + 3]])
}

/// Validates the header and returns the entry point and PT_LOAD segments.
pub fn parse(bytes: &[u8]) -> Result<(u32, Vec<LoadSegment>), ElfError> {
    if bytes.len() < 4 || &bytes[..4] != b"\x7fELF" {
        return Err(if bytes.len() < 4 { ElfError::TooShort(bytes.len()) } else { ElfError::BadMagic });
    }
    if bytes.len() < EHDR_SIZE {
        return Err(ElfError::TooShort(bytes.len()));
    }
    if bytes[4] != 1 {
        return Err(ElfError::WrongClass(bytes[4]));
    }
    if bytes[5] != 1 {
        return Err(ElfError::WrongEndian(bytes[5]));
    }
    let e_type = u16_at(bytes, 16);
    let machine = u16_at(bytes, 18);
    if machine != EM_RISCV {
        return Err(ElfError::WrongMachine(machine));
    }
    if e_type != ET_EXEC {
        return Err(ElfError::WrongType(e_type));
    }
    let entry = u32_at(bytes, 24);
    let phoff = u32_at(bytes, 28);
    let phentsize = u16_at(bytes, 42) as usize;
    let phnum = u16_at(bytes, 44);
    let table_end = (phoff as usize).checked_add(phnum as usize * phentsize.max(PHDR_SIZE));
    if phnum > 0 && (phentsize < PHDR_SIZE || table_end.is_none_or(|end| end > bytes.len())) {
        return Err(ElfError::BadProgramHeaders { offset: phoff, count: phnum });
    }

    let mut segments = Vec::new();
    for i in 0..phnum as usize {
        let at = phoff as usize + i * phentsize;
        if u32_at(bytes, at) != PT_LOAD {
            continue;
        }
        let seg = LoadSegment {
            offset: u32_at(bytes, at + 4),
            vaddr: u32_at(bytes, at + 8),
            filesz: u32_at(bytes, at + 16),
            memsz: u32_at(bytes, at + 20),
        };
        let index = segments.len();
        if seg.filesz > seg.memsz {
            return Err(ElfError::SegmentSizes { index });
        }
        if (seg.offset as u64 + seg.filesz as u64) > bytes.len() as u64 {
            return Err(ElfError::SegmentOutOfFile { index, offset: seg.offset, size: seg.filesz });
        }
        segments.push(seg);
    }
    for (i, a) in segments.iter().enumerate() {
        for (j, b) in segments.iter().enumerate().skip(i + 1) {
            let (a0, a1) = (a.vaddr as u64, a.vaddr as u64 + a.memsz as u64);
            let (b0, b1) = (b.vaddr as u64, b.vaddr as u64 + b.memsz as u64);
            if a.memsz > 0 && b.memsz > 0 && a0 < b1 && b0 < a1 {
                return Err(ElfError::OverlappingSegments { first: i, second: j });
            }
        }
    }
    Ok((entry, segments))
}

/// Maps every PT_LOAD segment into `mem` (zero-filling `memsz - filesz`)
/// and returns the entry point.
pub fn load_elf_into(bytes: &[u8], mem: &mut Memory) -> Result<u32, ElfError> {
    let (entry, segments) = parse(bytes)?;
    for (index, seg) in segments.iter().enumerate() {
        let err = ElfError::SegmentOutOfMemory { index, vaddr: seg.vaddr, memsz: seg.memsz };
        if seg.vaddr as u64 + seg.memsz as u64 > mem.size() as u64 {
            return Err(err);
        }
        let data = &bytes[seg.offset as usize..(seg.offset + seg.filesz) as usize];
        mem.write(seg.vaddr, data).map_err(|_| err.clone())?;
        mem.fill(seg.vaddr + seg.filesz, seg.memsz - seg.filesz, 0).map_err(|_| err)?;
    }
    Ok(entry)
}

/// Loads an executable into a fresh memory of `mem_size` bytes.
pub fn load_elf(bytes: &[u8], mem_size: usize) -> Result<(Memory, u32), ElfError> {
    let mut mem = Memory::new(mem_size);
    let entry = load_elf_into(bytes, &mut mem)?;
    Ok((mem, entry))
}

/// Builds an ELF32 RISC-V executable with one PT_LOAD per `(vaddr, bytes)`.
pub fn write_exec(entry: u32, segments: &[(u32, &[u8])]) -> Vec<u8> {
    let phoff = EHDR_SIZE;
    let mut data_off = phoff + PHDR_SIZE * segments.len();
    let mut out = Vec::new();
    out.extend_from_slice(b"\x7fELF");
    out.extend_from_slice(&[1, 1, 1, 0]);
    out.extend_from_slice(&[0; 8]);
    out.extend_from_slice(&ET_EXEC.to_le_bytes());
    out.extend_from_slice(&EM_RISCV.to_le_bytes());
    out.extend_from_slice(&1u32.to_le_bytes()); // e_version
    out.extend_from_slice(&entry.to_le_bytes());
    out.extend_from_slice(&(phoff as u32).to_le_bytes());
    out.extend_from_slice(&0u32.to_le_bytes()); // e_shoff
    out.extend_from_slice(&0u32.to_le_bytes()); // e_flags
    out.extend_from_slice(&(EHDR_SIZE as u16).to_le_bytes());
    out.extend_from_slice(&(PHDR_SIZE as u16).to_le_bytes());
    out.extend_from_slice(&(segments.len() as u16).to_le_bytes());
    out.extend_from_slice(&40u16.to_le_bytes()); // e_shentsize
    out.extend_from_slice(&0u16.to_le_bytes());
    out.extend_from_slice(&0u16.to_le_bytes());
    debug_assert_eq!(out.len(), EHDR_SIZE);
    for (vaddr, bytes) in segments {
        let len = bytes.len() as u32;
        for field in [PT_LOAD, data_off as u32, *vaddr, *vaddr, len, len, 0x7, 4] {
            out.extend_from_slice(&field.to_le_bytes());
        }
        data_off += bytes.len();
    }
    for (_, bytes) in segments {
        out.extend_from_slice(bytes);
    }
    out
}
