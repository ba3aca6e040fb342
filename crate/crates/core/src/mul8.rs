//! 8x8 unsigned multiplier with an Er-controlled reconfigurable region.
//!
//! The reduction tree is a two-level arrangement of 4:2 compressors:
//!
//! * stage 1 compresses partial-product rows 0..=3 and 4..=7 separately, each
//!   down to two rows;
//! * stage 2 compresses the resulting four rows down to two;
//! * an exact ripple-carry adder sums the last two rows.
//!
//! Within a stage, compressors are chained along ascending columns through
//! `cout -> cin`. A compressor's `carry` lands one column up in the second
//! output row, and its `sum` stays in the first. A column therefore needs a
//! compressor whenever it holds more bits than the output slots left for it.
//!
//! Every compressor whose `sum` lands in columns 4..=11 is reconfigurable and
//! takes its error-control bit from the [`ErMask`]; all other cells are exact.
//! The tree is compiled once into a flat netlist of wire indices, so
//! evaluating it does not allocate.

use std::fmt::{self, Write as _};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::compressor::{full_adder, CompressorKind, EXACT_LUT};

/// First and last output column of the reconfigurable region.
pub const REGION_LO: usize = 4;
pub const REGION_HI: usize = 11;

/// Largest exact 8x8 product.
pub const MAX_PRODUCT: u32 = 255 * 255;

const COLUMNS: usize = 20;
const MAX_WIRES: usize = 256;
const ZERO: u16 = 0;

/// 8-bit error-control word. A set bit makes its column exact, so `0xFF` is
/// fully exact and `0x00` maximally approximate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct ErMask(pub u8);

impl ErMask {
    pub const EXACT: ErMask = ErMask(0xFF);
    pub const MAX_APPROX: ErMask = ErMask(0x00);

    pub fn bit(self, i: u8) -> u8 {
        (self.0 >> i) & 1
    }

    pub fn is_exact(self) -> bool {
        self.0 == 0xFF
    }
}

impl fmt::Display for ErMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "0x{:02X}", self.0)
    }
}

impl From<u8> for ErMask {
    fn from(v: u8) -> Self {
        ErMask(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mul8Kind {
    /// Same tree with exact compressors everywhere; ignores Er.
    ExactDadda,
    /// DFC cells in the reconfigurable region.
    Dfm,
    /// SSC cells in the reconfigurable region.
    Ssm,
}

impl Mul8Kind {
    pub const ALL: [Mul8Kind; 3] = [Self::ExactDadda, Self::Dfm, Self::Ssm];

    pub fn compressor(self) -> CompressorKind {
        match self {
            Self::ExactDadda => CompressorKind::Exact,
            Self::Dfm => CompressorKind::Dfc,
            Self::Ssm => CompressorKind::Ssc,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::ExactDadda => "exact",
            Self::Dfm => "dfm",
            Self::Ssm => "ssm",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "exact" | "dadda" => Some(Self::ExactDadda),
            "dfm" => Some(Self::Dfm),
            "ssm" => Some(Self::Ssm),
            _ => None,
        }
    }
}

impl fmt::Display for Mul8Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// How Er bits map onto reconfigurable columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum ErMap {
    /// Bit `i` controls column `4 + i`.
    #[default]
    Ascending,
    /// Bit `i` controls column `11 - i`.
    Descending,
}

impl ErMap {
    pub fn bit_for_column(self, column: usize) -> Option<u8> {
        if !(REGION_LO..=REGION_HI).contains(&column) {
            return None;
        }
        Some(match self {
            Self::Ascending => (column - REGION_LO) as u8,
            Self::Descending => (REGION_HI - column) as u8,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Ascending => "bit_i->col_4+i",
            Self::Descending => "bit_i->col_11-i",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct TreeConfig {
    pub ermap: ErMap,
}

/// Partial products `a_i & b_j`; row `j` holds `a` gated by bit `j` of `b`
/// and sits at column offset `j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PartialProductMatrix {
    rows: [u8; 8],
}

impl PartialProductMatrix {
    pub fn bit(&self, row: usize, i: usize) -> u8 {
        (self.rows[row] >> i) & 1
    }

    pub fn rows(&self) -> &[u8; 8] {
        &self.rows
    }

    /// Bits of column `c`, ordered by row.
    pub fn column(&self, c: usize) -> Vec<u8> {
        (0..8)
            .filter(|&j| c >= j && c - j < 8)
            .map(|j| self.bit(j, c - j))
            .collect()
    }

    pub fn column_heights() -> [usize; 15] {
        let mut h = [0; 15];
        for (c, slot) in h.iter_mut().enumerate() {
            *slot = (0..8).filter(|&j| c >= j && c - j < 8).count();
        }
        h
    }

    /// Weighted bit-sum of the whole matrix.
    pub fn value(&self) -> u32 {
        (0..15)
            .map(|c| self.column(c).iter().map(|&b| b as u32).sum::<u32>() << c)
            .sum()
    }
}

pub fn gen_partial_products(a: u8, b: u8) -> PartialProductMatrix {
    let mut rows = [0u8; 8];
    for (j, row) in rows.iter_mut().enumerate() {
        if (b >> j) & 1 == 1 {
            *row = a;
        }
    }
    PartialProductMatrix { rows }
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    inputs: [u16; 5],
    outputs: [u16; 3],
    stage: u8,
    column: u8,
    er_bit: Option<u8>,
}

/// Compiled reduction tree.
#[derive(Debug, Clone)]
pub struct ReductionTree {
    config: TreeConfig,
    cells: Vec<Cell>,
    row_a: [u16; COLUMNS],
    row_b: [u16; COLUMNS],
    wires: usize,
}

fn pp_wire(row: usize, i: usize) -> u16 {
    (1 + row * 8 + i) as u16
}

impl ReductionTree {
    pub fn new(config: TreeConfig) -> Self {
        let mut tree = ReductionTree {
            config,
            cells: Vec::new(),
            row_a: [ZERO; COLUMNS],
            row_b: [ZERO; COLUMNS],
            wires: 65,
        };

        let mut groups = Vec::with_capacity(2);
        for group in 0..2 {
            let mut cols: Vec<Vec<u16>> = vec![Vec::new(); COLUMNS];
            for j in 4 * group..4 * group + 4 {
                for i in 0..8 {
                    cols[i + j].push(pp_wire(j, i));
                }
            }
            groups.push(tree.compress_stage(1, &cols));
        }
        // Stage-2 columns list both sum rows before both carry rows.
        let [(a0, b0), (a1, b1)] = [groups[0], groups[1]];
        let stage2: Vec<Vec<u16>> = (0..COLUMNS)
            .map(|c| [a0[c], a1[c], b0[c], b1[c]].into_iter().filter(|&w| w != ZERO).collect())
            .collect();
        let (a, b) = tree.compress_stage(2, &stage2);
        tree.row_a = a;
        tree.row_b = b;
        assert!(tree.wires <= MAX_WIRES);
        tree
    }

    /// Shared instance for the default configuration.
    pub fn reference() -> &'static ReductionTree {
        static TREE: OnceLock<ReductionTree> = OnceLock::new();
        TREE.get_or_init(|| ReductionTree::new(TreeConfig::default()))
    }

    pub fn config(&self) -> TreeConfig {
        self.config
    }

    fn alloc(&mut self) -> u16 {
        let w = self.wires as u16;
        self.wires += 1;
        w
    }

    fn compress_stage(&mut self, stage: u8, cols: &[Vec<u16>]) -> ([u16; COLUMNS], [u16; COLUMNS]) {
        let mut row_a = [ZERO; COLUMNS];
        let mut row_b = [ZERO; COLUMNS];
        let mut chain: Option<(u16, u16)> = None; // (cout, carry) of the previous column
        for c in 0..COLUMNS {
            let bits = &cols[c];
            assert!(bits.len() <= 4, "column {c} overfull in stage {stage}");
            let needs_cell = match chain {
                Some(_) => !bits.is_empty(),
                None => bits.len() > 2,
            };
            if needs_cell {
                let mut inputs = [ZERO; 5];
                inputs[..bits.len()].copy_from_slice(bits);
                if let Some((cout, carry)) = chain {
                    inputs[4] = cout;
                    row_b[c] = carry;
                }
                let cout = self.alloc();
                let carry = self.alloc();
                let sum = self.alloc();
                self.cells.push(Cell {
                    inputs,
                    outputs: [cout, carry, sum],
                    stage,
                    column: c as u8,
                    er_bit: self.config.ermap.bit_for_column(c),
                });
                row_a[c] = sum;
                chain = Some((cout, carry));
            } else {
                match chain.take() {
                    Some((cout, carry)) => {
                        row_a[c] = cout;
                        row_b[c] = carry;
                    }
                    None => {
                        row_a[c] = bits.first().copied().unwrap_or(ZERO);
                        row_b[c] = bits.get(1).copied().unwrap_or(ZERO);
                    }
                }
            }
        }
        assert!(chain.is_none(), "stage {stage} carry chain overflows the tree width");
        (row_a, row_b)
    }

    /// Number of compressor cells, and how many of them are reconfigurable.
    pub fn cell_counts(&self) -> (usize, usize) {
        (self.cells.len(), self.cells.iter().filter(|c| c.er_bit.is_some()).count())
    }

    #[inline]
    fn eval_rows(&self, rows: &[u8; 8], kind: Mul8Kind, er: ErMask) -> u32 {
        let mut w = [0u8; MAX_WIRES];
        for (j, &row) in rows.iter().enumerate() {
            for i in 0..8 {
                w[1 + j * 8 + i] = (row >> i) & 1;
            }
        }
        let approx = kind.compressor().approx_lut();
        for cell in &self.cells {
            let [i1, i2, i3, i4, ic] = cell.inputs;
            let idx = ((w[i1 as usize] as usize) << 4)
                | ((w[i2 as usize] as usize) << 3)
                | ((w[i3 as usize] as usize) << 2)
                | ((w[i4 as usize] as usize) << 1)
                | w[ic as usize] as usize;
            let lut = match cell.er_bit {
                Some(bit) if er.bit(bit) == 0 => approx,
                _ => &EXACT_LUT,
            };
            let out = lut[idx];
            w[cell.outputs[0] as usize] = (out >> 2) & 1;
            w[cell.outputs[1] as usize] = (out >> 1) & 1;
            w[cell.outputs[2] as usize] = out & 1;
        }
        // Exact carry-propagate adder.
        let mut carry = 0;
        let mut result = 0u32;
        for c in 0..COLUMNS {
            let (s, co) = full_adder(w[self.row_a[c] as usize], w[self.row_b[c] as usize], carry);
            result |= (s as u32) << c;
            carry = co;
        }
        result | ((carry as u32) << COLUMNS)
    }

    pub fn reduce_and_add(&self, m: &PartialProductMatrix, kind: Mul8Kind, er: ErMask) -> u32 {
        self.eval_rows(&m.rows, kind, er)
    }

    #[inline]
    pub fn mul(&self, a: u8, b: u8, kind: Mul8Kind, er: ErMask) -> u32 {
        self.eval_rows(gen_partial_products(a, b).rows(), kind, er)
    }

    /// Upper bound on `|approx - exact|` for any input: every approximated
    /// cell contributes at most `max|ED| * 2^column`.
    pub fn error_bound(&self, kind: Mul8Kind, er: ErMask) -> u32 {
        let max_ed = kind.compressor().max_abs_error() as u32;
        self.cells
            .iter()
            .filter(|c| matches!(c.er_bit, Some(bit) if er.bit(bit) == 0))
            .map(|c| max_ed << c.column)
            .sum()
    }

    /// Human-readable wiring summary, used whenever reported error figures
    /// need to be tied to a specific tree.
    pub fn describe(&self) -> String {
        let mut s = String::new();
        let (total, reconf) = self.cell_counts();
        let _ = writeln!(
            s,
            "tree: two-stage 4:2 compressor tree, rows 0-3 and 4-7 compressed separately then merged; \
             exact ripple-carry final adder; {total} cells, {reconf} reconfigurable (columns {REGION_LO}-{REGION_HI}); ermap={}",
            self.config.ermap.name()
        );
        for stage in 1..=2 {
            let mut per_col = [0usize; COLUMNS];
            for c in self.cells.iter().filter(|c| c.stage == stage) {
                per_col[c.column as usize] += 1;
            }
            let cols: Vec<String> = per_col
                .iter()
                .enumerate()
                .filter(|(_, &n)| n > 0)
                .map(|(c, n)| format!("c{c}x{n}"))
                .collect();
            let _ = writeln!(s, "  stage {stage}: {}", cols.join(" "));
        }
        let _ = write!(s, "  inputs: stage 1 fills x1..x4 in row order; stage 2 fills sum rows (group 0, group 1) then carry rows; zero padded; cin is the previous column's cout");
        s
    }
}

/// 8x8 multiply on the reference tree. The result can exceed 16 bits when
/// the approximation overshoots near the top of the range.
#[inline]
pub fn mul8(a: u8, b: u8, kind: Mul8Kind, er: ErMask) -> u32 {
    ReductionTree::reference().mul(a, b, kind, er)
}

pub fn reduce_and_add(m: &PartialProductMatrix, kind: Mul8Kind, er: ErMask) -> u32 {
    ReductionTree::reference().reduce_and_add(m, kind, er)
}

/// All 65,536 products for one configuration, indexed by `(a << 8) | b`.
#[derive(Clone)]
pub struct Mul8Table {
    values: Box<[u32]>,
}

impl Mul8Table {
    pub fn build(tree: &ReductionTree, kind: Mul8Kind, er: ErMask) -> Self {
        let mut values = vec![0u32; 1 << 16].into_boxed_slice();
        for a in 0..=255u8 {
            for b in 0..=255u8 {
                values[((a as usize) << 8) | b as usize] = tree.mul(a, b, kind, er);
            }
        }
        Mul8Table { values }
    }

    #[inline]
    pub fn get(&self, a: u8, b: u8) -> u32 {
        self.values[((a as usize) << 8) | b as usize]
    }
}

impl fmt::Debug for Mul8Table {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Mul8Table").finish_non_exhaustive()
    }
}
