//! Error characterization of multiplier configurations.
//!
//! Metric conventions:
//! * ER: fraction of input pairs whose approximate product differs from the
//!   exact one.
//! * MRED: mean over *all* pairs of `|ED| / exact`, where pairs with an exact
//!   product of zero contribute 0 (their approximate product is provably 0).
//! * NMED: mean `|ED|` divided by the largest exact product of the width.
//!
//! Sampled (16/32-bit) characterization draws operands from SplitMix64: each
//! 64-bit output supplies one pair, `a` from the high 32 bits and `b` from the
//! low 32 bits, truncated to the operand width.

use std::io::{self, Write};

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hier::{mul16_with, mul32_with, HierConfig, TabulatedMul8};
use crate::mul8::{ErMask, Mul8Kind, Mul8Table, ReductionTree, TreeConfig, MAX_PRODUCT};

pub const MRED_CONVENTION: &str = "mean_over_all_pairs_red0_when_exact0";
pub const PRNG_NAME: &str = "splitmix64";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorStats {
    pub config: String,
    pub er_rate: f64,
    pub mred: f64,
    pub nmed: f64,
    /// Signed error distance of largest magnitude (first one found on ties).
    pub max_ed: i128,
    pub min_signed_ed: i128,
    pub max_signed_ed: i128,
    pub worst_pair: (u64, u64),
    pub n_samples: u64,
}

#[derive(Debug, Error)]
pub enum LabError {
    #[error("sample count must be at least 1")]
    NoSamples,
    #[error("unsupported operand width {0}, expected 16 or 32")]
    Width(u32),
}

#[derive(Debug, Clone, Copy)]
struct Accum {
    wrong: u64,
    red_sum: f64,
    abs_sum: f64,
    max_ed: i128,
    min_ed: i128,
    max_pos: i128,
    worst: (u64, u64),
    n: u64,
}

impl Accum {
    const EMPTY: Accum = Accum {
        wrong: 0,
        red_sum: 0.0,
        abs_sum: 0.0,
        max_ed: 0,
        min_ed: 0,
        max_pos: 0,
        worst: (0, 0),
        n: 0,
    };

    #[inline]
    fn push(&mut self, a: u64, b: u64, exact: u128, approx: u128) {
        let ed = approx as i128 - exact as i128;
        self.n += 1;
        if ed != 0 {
            self.wrong += 1;
            let mag = ed.unsigned_abs() as f64;
            self.abs_sum += mag;
            if exact != 0 {
                self.red_sum += mag / exact as f64;
            }
            if ed.unsigned_abs() > self.max_ed.unsigned_abs() {
                self.max_ed = ed;
                self.worst = (a, b);
            }
            self.min_ed = self.min_ed.min(ed);
            self.max_pos = self.max_pos.max(ed);
        }
    }

    fn finish(self, config: String, max_product: f64) -> ErrorStats {
        let n = self.n as f64;
        ErrorStats {
            config,
            er_rate: self.wrong as f64 / n,
            mred: self.red_sum / n,
            nmed: self.abs_sum / n / max_product,
            max_ed: self.max_ed,
            min_signed_ed: self.min_ed,
            max_signed_ed: self.max_pos,
            worst_pair: self.worst,
            n_samples: self.n,
        }
    }
}

fn config_id8(kind: Mul8Kind, er: ErMask) -> String {
    format!("{kind}:er={}", er.0)
}

fn characterize_table(kind: Mul8Kind, er: ErMask, table: &Mul8Table) -> ErrorStats {
    let mut acc = Accum::EMPTY;
    for a in 0..=255u8 {
        for b in 0..=255u8 {
            acc.push(a as u64, b as u64, a as u128 * b as u128, table.get(a, b) as u128);
        }
    }
    acc.finish(config_id8(kind, er), MAX_PRODUCT as f64)
}

/// Exhaustive characterization of one 8-bit configuration.
pub fn characterize8(kind: Mul8Kind, er: ErMask) -> ErrorStats {
    characterize8_on(ReductionTree::reference(), kind, er)
}

pub fn characterize8_on(tree: &ReductionTree, kind: Mul8Kind, er: ErMask) -> ErrorStats {
    characterize_table(kind, er, &Mul8Table::build(tree, kind, er))
}

/// Exhaustive characterization of every Er value, ordered by Er.
pub fn sweep8(kind: Mul8Kind) -> Vec<ErrorStats> {
    sweep8_on(ReductionTree::reference(), kind)
}

pub fn sweep8_on(tree: &ReductionTree, kind: Mul8Kind) -> Vec<ErrorStats> {
    (0..=255u8)
        .into_par_iter()
        .map(|er| characterize8_on(tree, kind, ErMask(er)))
        .collect()
}

/// Sampled characterization of a 16- or 32-bit configuration.
pub fn characterize_wide(width: u32, cfg: &HierConfig, n: u64, seed: u64) -> Result<ErrorStats, LabError> {
    if n == 0 {
        return Err(LabError::NoSamples);
    }
    let (mask, max_product) = match width {
        16 => (0xFFFFu64, (0xFFFFu128 * 0xFFFF) as f64),
        32 => (0xFFFF_FFFFu64, (0xFFFF_FFFFu128 * 0xFFFF_FFFF) as f64),
        w => return Err(LabError::Width(w)),
    };
    let src = TabulatedMul8::new(cfg);
    let mut rng = SplitMix64::seed_from_u64(seed);
    let mut acc = Accum::EMPTY;
    for _ in 0..n {
        let r = rng.next_u64();
        let a = (r >> 32) & mask;
        let b = r & mask;
        let approx = if width == 16 {
            mul16_with(&src, a as u16, b as u16, cfg.er_ll, cfg.er_x, cfg.er_hh) as u128
        } else {
            mul32_with(&src, a as u32, b as u32, cfg)
        };
        acc.push(a, b, a as u128 * b as u128, approx);
    }
    Ok(acc.finish(format!("w{width}:{}:seed={seed}", cfg.id()), max_product))
}

/// Writes a sweep in the CSV schema:
/// `# kind=..., tree=..., ermap=..., mred_convention=...` then
/// `er,er_rate,mred,nmed,max_ed,worst_a,worst_b,n`.
pub fn write_sweep_csv(out: &mut impl Write, kind: Mul8Kind, tree: TreeConfig, rows: &[ErrorStats]) -> io::Result<()> {
    writeln!(
        out,
        "# kind={}, tree=two-stage-4:2-v1, ermap={}, mred_convention={}",
        kind,
        tree.ermap.name(),
        MRED_CONVENTION
    )?;
    writeln!(out, "er,er_rate,mred,nmed,max_ed,worst_a,worst_b,n")?;
    for (er, s) in rows.iter().enumerate() {
        writeln!(
            out,
            "{er},{:.9},{:.9},{:.9},{},{},{},{}",
            s.er_rate, s.mred, s.nmed, s.max_ed, s.worst_pair.0, s.worst_pair.1, s.n_samples
        )?;
    }
    Ok(())
}
