use thiserror::Error;

pub const DEFAULT_MEMORY_SIZE: usize = 16 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("access of {len} bytes at 0x{addr:08x} is outside memory")]
pub struct OutOfBounds {
    pub addr: u32,
    pub len: u32,
}

/// Flat little-endian byte-addressable memory starting at address 0.
#[derive(Clone)]
pub struct Memory {
    bytes: Vec<u8>,
}

impl Memory {
    pub fn new(size: usize) -> Self {
        Memory { bytes: vec![0; size] }
    }

    pub fn size(&self) -> usize {
        self.bytes.len()
    }

    fn range(&self, addr: u32, len: u32) -> Result<std::ops::Range<usize>, OutOfBounds> {
        let start = addr as usize;
        match start.checked_add(len as usize) {
            Some(end) if end <= self.bytes.len() => Ok(start..end),
            _ => Err(OutOfBounds { addr, len }),
        }
    }

    pub fn read(&self, addr: u32, len: u32) -> Result<&[u8], OutOfBounds> {
        Ok(&self.bytes[self.range(addr, len)?])
    }

    pub fn write(&mut self, addr: u32, data: &[u8]) -> Result<(), OutOfBounds> {
        let r = self.range(addr, data.len() as u32)?;
        self.bytes[r].copy_from_slice(data);
        Ok(())
    }

    pub fn fill(&mut self, addr: u32, len: u32, value: u8) -> Result<(), OutOfBounds> {
        let r = self.range(addr, len)?;
        self.bytes[r].fill(value);
        Ok(())
    }

    pub fn load_u8(&self, addr: u32) -> Result<u8, OutOfBounds> {
        Ok(self.read(addr, 1)?[0])
    }

    pub fn load_u16(&self, addr: u32) -> Result<u16, OutOfBounds> {
        let b = self.read(addr, 2)?;
        Ok(u16::from_le_bytes([b[0], b[1]]))
    }

    pub fn load_u32(&self, addr: u32) -> Result<u32, OutOfBounds> {
        let b = self.read(addr, 4)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }

    pub fn store_u8(&mut self, addr: u32, v: u8) -> Result<(), OutOfBounds> {
        self.write(addr, &[v])
    }

    pub fn store_u16(&mut self, addr: u32, v: u16) -> Result<(), OutOfBounds> {
        self.write(addr, &v.to_le_bytes())
    }

    pub fn store_u32(&mut self, addr: u32, v: u32) -> Result<(), OutOfBounds> {
        self.write(addr, &v.to_le_bytes())
    }

    pub fn read_words(&self, addr: u32, count: usize) -> Result<Vec<u32>, OutOfBounds> {
        (0..count).map(|i| self.load_u32(addr.wrapping_add(4 * i as u32))).collect()
    }

    pub fn write_words(&mut self, addr: u32, words: &[u32]) -> Result<(), OutOfBounds> {
        let bytes: Vec<u8> = words.iter().flat_map(|w| w.to_le_bytes()).collect();
        self.write(addr, &bytes)
    }
}

impl Default for Memory {
    fn default() -> Self {
        Memory::new(DEFAULT_MEMORY_SIZE)
    }
}

impl std::fmt::Debug for Memory {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Memory").field("size", &self.bytes.len()).finish()
    }
}
