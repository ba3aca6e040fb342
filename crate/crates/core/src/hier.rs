//! 16- and 32-bit multipliers composed from the 8-bit core, the `mulcsr`
//! control word, and the signed RV32M wrappers.
//!
//! `mulcsr` layout (bit-exact, also the value of CSR 0x801):
//!
//! | bits  | field            |
//! |-------|------------------|
//! | 0     | approximation enable |
//! | 2:1   | circuit select (must be `00`) |
//! | 10:3  | Er for the low x low sub-product |
//! | 18:11 | Er for the two cross sub-products |
//! | 26:19 | Er for the high x high sub-product |
//! | 31:27 | reserved |

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mul8::{ErMask, Mul8Kind, Mul8Table, ReductionTree, TreeConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct MulCsr {
    pub enable: bool,
    pub circuit_select: u8,
    pub er_ll: ErMask,
    pub er_x: ErMask,
    pub er_hh: ErMask,
    pub reserved: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CsrConfigError {
    #[error("mulcsr circuit_select is {0:#04b}, only 0b00 is implemented")]
    CircuitSelect(u8),
}

impl MulCsr {
    pub const EXACT: u32 = 0x0000_0000;
    pub const MAX_APPROX: u32 = 0x0000_0001;

    pub fn decode(raw: u32) -> Self {
        MulCsr {
            enable: raw & 1 == 1,
            circuit_select: ((raw >> 1) & 0b11) as u8,
            er_ll: ErMask((raw >> 3) as u8),
            er_x: ErMask((raw >> 11) as u8),
            er_hh: ErMask((raw >> 19) as u8),
            reserved: ((raw >> 27) & 0x1F) as u8,
        }
    }

    pub fn encode(&self) -> u32 {
        (self.enable as u32)
            | ((self.circuit_select as u32 & 0b11) << 1)
            | ((self.er_ll.0 as u32) << 3)
            | ((self.er_x.0 as u32) << 11)
            | ((self.er_hh.0 as u32) << 19)
            | ((self.reserved as u32 & 0x1F) << 27)
    }

    pub fn validate(&self) -> Result<(), CsrConfigError> {
        match self.circuit_select {
            0 => Ok(()),
            other => Err(CsrConfigError::CircuitSelect(other)),
        }
    }

    /// Er fields as the multiplier sees them; a clear enable bit forces exact.
    pub fn effective(&self) -> (ErMask, ErMask, ErMask) {
        if self.enable {
            (self.er_ll, self.er_x, self.er_hh)
        } else {
            (ErMask::EXACT, ErMask::EXACT, ErMask::EXACT)
        }
    }
}

impl fmt::Display for MulCsr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "mulcsr=0x{:08X} (enable={} sel={:02b} er_ll={} er_x={} er_hh={})",
            self.encode(),
            self.enable as u8,
            self.circuit_select,
            self.er_ll,
            self.er_x,
            self.er_hh
        )
    }
}

/// Configuration of one hierarchical multiply.
///
/// Fields map onto sub-products by significance: low x low uses `er_ll`, the
/// two cross products share `er_x`, high x high uses `er_hh`.
///
/// At 32 bits, `recursive = true` (the default) gives every 16-bit unit the
/// full three-field configuration, so the fields act on 8-bit sub-products by
/// their significance inside each unit. With `recursive = false`, a 16-bit
/// unit takes its own significance-class field and applies it to all four of
/// its 8-bit products.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HierConfig {
    pub kind: Mul8Kind,
    pub er_ll: ErMask,
    pub er_x: ErMask,
    pub er_hh: ErMask,
    pub recursive: bool,
    pub tree: TreeConfig,
}

impl HierConfig {
    pub fn exact(kind: Mul8Kind) -> Self {
        Self::uniform(kind, ErMask::EXACT)
    }

    pub fn uniform(kind: Mul8Kind, er: ErMask) -> Self {
        HierConfig {
            kind,
            er_ll: er,
            er_x: er,
            er_hh: er,
            recursive: true,
            tree: TreeConfig::default(),
        }
    }

    pub fn from_csr(kind: Mul8Kind, csr: &MulCsr) -> Self {
        let (er_ll, er_x, er_hh) = csr.effective();
        HierConfig {
            kind,
            er_ll,
            er_x,
            er_hh,
            recursive: true,
            tree: TreeConfig::default(),
        }
    }

    pub fn is_exact(&self) -> bool {
        self.kind == Mul8Kind::ExactDadda
            || (self.er_ll.is_exact() && self.er_x.is_exact() && self.er_hh.is_exact())
    }

    fn with_uniform(self, er: ErMask) -> Self {
        HierConfig { er_ll: er, er_x: er, er_hh: er, ..self }
    }

    pub fn id(&self) -> String {
        format!(
            "{}:ll={}:x={}:hh={}{}",
            self.kind,
            self.er_ll,
            self.er_x,
            self.er_hh,
            if self.recursive { "" } else { ":flat" }
        )
    }
}

/// Something that can produce 8-bit sub-products for a hierarchical multiply.
pub trait Mul8Source {
    fn mul8(&self, a: u8, b: u8, er: ErMask) -> u32;
}

struct TreeSource<'a> {
    tree: &'a ReductionTree,
    kind: Mul8Kind,
}

impl Mul8Source for TreeSource<'_> {
    #[inline]
    fn mul8(&self, a: u8, b: u8, er: ErMask) -> u32 {
        self.tree.mul(a, b, self.kind, er)
    }
}

fn tree_for(config: TreeConfig) -> ReductionTree {
    ReductionTree::new(config)
}

fn with_tree<R>(cfg: &HierConfig, f: impl FnOnce(&TreeSource<'_>) -> R) -> R {
    if cfg.tree == TreeConfig::default() {
        f(&TreeSource { tree: ReductionTree::reference(), kind: cfg.kind })
    } else {
        let tree = tree_for(cfg.tree);
        f(&TreeSource { tree: &tree, kind: cfg.kind })
    }
}

/// 16x16 multiply from four 8-bit products (one unit reused over four cycles).
/// The result can slightly exceed 32 bits when the approximation overshoots.
#[inline]
pub fn mul16_with(src: &impl Mul8Source, a: u16, b: u16, ll: ErMask, x: ErMask, hh: ErMask) -> u64 {
    let (al, ah) = (a as u8, (a >> 8) as u8);
    let (bl, bh) = (b as u8, (b >> 8) as u8);
    let p_ll = src.mul8(al, bl, ll) as u64;
    let p_lh = src.mul8(al, bh, x) as u64;
    let p_hl = src.mul8(ah, bl, x) as u64;
    let p_hh = src.mul8(ah, bh, hh) as u64;
    p_ll + ((p_lh + p_hl) << 8) + (p_hh << 16)
}

/// 32x32 multiply from four 16-bit units. Returns the full-width value,
/// which can slightly exceed 64 bits when the approximation overshoots.
pub fn mul32_with(src: &impl Mul8Source, a: u32, b: u32, cfg: &HierConfig) -> u128 {
    let (al, ah) = (a as u16, (a >> 16) as u16);
    let (bl, bh) = (b as u16, (b >> 16) as u16);
    let unit = |x: u16, y: u16, class: ErMask| -> u128 {
        let c = if cfg.recursive { *cfg } else { cfg.with_uniform(class) };
        mul16_with(src, x, y, c.er_ll, c.er_x, c.er_hh) as u128
    };
    let p_ll = unit(al, bl, cfg.er_ll);
    let p_lh = unit(al, bh, cfg.er_x);
    let p_hl = unit(ah, bl, cfg.er_x);
    let p_hh = unit(ah, bh, cfg.er_hh);
    p_ll + ((p_lh + p_hl) << 16) + (p_hh << 32)
}

pub fn mul16(a: u16, b: u16, cfg: &HierConfig) -> u64 {
    with_tree(cfg, |src| mul16_with(src, a, b, cfg.er_ll, cfg.er_x, cfg.er_hh))
}

pub fn mul32u(a: u32, b: u32, cfg: &HierConfig) -> u128 {
    with_tree(cfg, |src| mul32_with(src, a, b, cfg))
}

/// `mul32u` configured directly from a decoded `mulcsr`.
pub fn mul32u_csr(a: u32, b: u32, kind: Mul8Kind, csr: &MulCsr) -> u128 {
    mul32u(a, b, &HierConfig::from_csr(kind, csr))
}

/// Precomputed 8-bit tables for the three Er fields of one configuration.
/// Used by sampled characterization where millions of multiplies share a
/// single configuration.
pub struct TabulatedMul8 {
    tables: Vec<(ErMask, Mul8Table)>,
}

impl TabulatedMul8 {
    pub fn new(cfg: &HierConfig) -> Self {
        let tree = if cfg.tree == TreeConfig::default() {
            ReductionTree::reference().clone()
        } else {
            tree_for(cfg.tree)
        };
        let mut tables: Vec<(ErMask, Mul8Table)> = Vec::new();
        for er in [cfg.er_ll, cfg.er_x, cfg.er_hh] {
            if !tables.iter().any(|(e, _)| *e == er) {
                tables.push((er, Mul8Table::build(&tree, cfg.kind, er)));
            }
        }
        TabulatedMul8 { tables }
    }
}

impl Mul8Source for TabulatedMul8 {
    #[inline]
    fn mul8(&self, a: u8, b: u8, er: ErMask) -> u32 {
        let (_, table) = self
            .tables
            .iter()
            .find(|(e, _)| *e == er)
            .expect("Er value outside the tabulated configuration");
        table.get(a, b)
    }
}

/// The four RV32M multiply instructions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MulOp {
    Mul,
    Mulh,
    Mulhsu,
    Mulhu,
}

impl MulOp {
    pub const ALL: [MulOp; 4] = [Self::Mul, Self::Mulh, Self::Mulhsu, Self::Mulhu];

    fn signedness(self) -> (bool, bool) {
        match self {
            Self::Mul | Self::Mulh => (true, true),
            Self::Mulhsu => (true, false),
            Self::Mulhu => (false, false),
        }
    }
}

/// Sign-magnitude wrapper around the unsigned core: multiply magnitudes,
/// negate the product when the signs differ, then select the requested word.
/// `MUL` is computed with signed magnitudes as well; its low word is
/// independent of signedness in exact mode.
pub fn mul_signed_with(src: &impl Mul8Source, a: u32, b: u32, op: MulOp, cfg: &HierConfig) -> u32 {
    let (sa, sb) = op.signedness();
    let neg_a = sa && (a as i32) < 0;
    let neg_b = sb && (b as i32) < 0;
    let mag_a = if neg_a { (a as i32).unsigned_abs() } else { a };
    let mag_b = if neg_b { (b as i32).unsigned_abs() } else { b };
    let mag = mul32_with(src, mag_a, mag_b, cfg) as u64;
    let product = if neg_a != neg_b { mag.wrapping_neg() } else { mag };
    match op {
        MulOp::Mul => product as u32,
        _ => (product >> 32) as u32,
    }
}

pub fn mul_signed(a: u32, b: u32, op: MulOp, cfg: &HierConfig) -> u32 {
    with_tree(cfg, |src| mul_signed_with(src, a, b, op, cfg))
}

/// Two's-complement reference semantics for the four multiply instructions.
pub fn reference_mul(a: u32, b: u32, op: MulOp) -> u32 {
    match op {
        MulOp::Mul => a.wrapping_mul(b),
        MulOp::Mulh => (((a as i32 as i64) * (b as i32 as i64)) >> 32) as u32,
        MulOp::Mulhsu => (((a as i32 as i64) * (b as u64 as i64)) >> 32) as u32,
        MulOp::Mulhu => (((a as u64) * (b as u64)) >> 32) as u32,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CORNERS: [u32; 7] = [0, 1, 2, 0x7FFF_FFFF, 0x8000_0000, 0xFFFF_FFFE, 0xFFFF_FFFF];

    #[test]
    fn decode_examples() {
        let exact = MulCsr::decode(0);
        assert!(!exact.enable);
        assert_eq!(exact.effective(), (ErMask::EXACT, ErMask::EXACT, ErMask::EXACT));

        let approx = MulCsr::decode(1);
        assert!(approx.enable);
        assert_eq!(approx.effective(), (ErMask(0), ErMask(0), ErMask(0)));

        let all_ff = MulCsr::decode(0x07FF_FFF9);
        assert!(all_ff.enable);
        assert_eq!(all_ff.circuit_select, 0);
        assert_eq!((all_ff.er_ll, all_ff.er_x, all_ff.er_hh), (ErMask::EXACT, ErMask::EXACT, ErMask::EXACT));
        assert_eq!(all_ff.reserved, 0);
        assert!(all_ff.validate().is_ok());
    }

    #[test]
    fn circuit_select_rejected() {
        let csr = MulCsr::decode(0b101);
        assert_eq!(csr.validate(), Err(CsrConfigError::CircuitSelect(0b10)));
    }

    #[test]
    fn field_positions() {
        let csr = MulCsr { er_x: ErMask(0x01), ..Default::default() };
        assert_eq!(csr.encode(), 1 << 11);
        let csr = MulCsr { er_hh: ErMask(0x80), reserved: 0x1F, ..Default::default() };
        assert_eq!(csr.encode(), (1 << 26) | 0xF800_0000);
    }

    #[test]
    fn mul16_exact_examples() {
        let cfg = HierConfig::exact(Mul8Kind::Ssm);
        assert_eq!(mul16(0xFFFF, 0xFFFF, &cfg), 0xFFFE_0001);
        let from_zero = HierConfig::from_csr(Mul8Kind::Dfm, &MulCsr::decode(0));
        for (a, b) in [(0x1234u16, 0xBEEFu16), (0xFFFF, 1), (0x8001, 0x7FFF)] {
            assert_eq!(mul16(a, b, &from_zero), a as u64 * b as u64);
        }
    }

    #[test]
    fn mul32_exact_examples() {
        let exact = HierConfig::from_csr(Mul8Kind::Ssm, &MulCsr::decode(0));
        assert_eq!(mul32u(0xDEAD_BEEF, 0x1234_5678, &exact), 0xDEAD_BEEFu128 * 0x1234_5678);
        for a in CORNERS {
            for b in CORNERS {
                assert_eq!(mul32u(a, b, &exact), a as u128 * b as u128);
            }
        }
    }

    #[test]
    fn signed_examples() {
        let cfg = HierConfig::exact(Mul8Kind::Ssm);
        assert_eq!(mul_signed(-1i32 as u32, 1, MulOp::Mul, &cfg), 0xFFFF_FFFF);
        assert_eq!(mul_signed(0xFFFF_FFFF, 0xFFFF_FFFF, MulOp::Mulhu, &cfg), 0xFFFF_FFFE);
        assert_eq!(mul_signed(-2i32 as u32, 3, MulOp::Mulh, &cfg), 0xFFFF_FFFF);
        for op in MulOp::ALL {
            for a in CORNERS {
                for b in CORNERS {
                    assert_eq!(mul_signed(a, b, op, &cfg), reference_mul(a, b, op), "{op:?} {a:#x} {b:#x}");
                }
            }
        }
    }

    #[test]
    fn tabulated_matches_tree() {
        let cfg = HierConfig {
            er_ll: ErMask(0x13),
            er_x: ErMask(0x00),
            er_hh: ErMask(0xF0),
            ..HierConfig::exact(Mul8Kind::Dfm)
        };
        let tab = TabulatedMul8::new(&cfg);
        for (a, b) in [(0xDEAD_BEEFu32, 0x1234_5678u32), (0xFFFF_FFFF, 0xFFFF_FFFF), (7, 9)] {
            assert_eq!(mul32_with(&tab, a, b, &cfg), mul32u(a, b, &cfg));
        }
    }

    #[test]
    fn flat_and_recursive_differ_in_error_weighting() {
        // Only er_hh approximate: errors stay above bit 16 (recursive) or 32 (flat).
        let rec = HierConfig { er_hh: ErMask(0), ..HierConfig::exact(Mul8Kind::Ssm) };
        let flat = HierConfig { recursive: false, ..rec };
        let (a, b) = (0xFFEE_DDCCu32, 0xBBAA_9988u32);
        let exact = a as u128 * b as u128;
        let e_rec = mul32u(a, b, &rec) - exact;
        let e_flat = mul32u(a, b, &flat) - exact;
        assert_eq!(e_rec % (1 << 16), 0);
        assert_eq!(e_flat % (1u128 << 32), 0);
    }
}
