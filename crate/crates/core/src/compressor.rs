//! Exact and reconfigurable 4:2 compressors, plus the full and half adders
//! used by the final carry-propagate stage.
//!
//! A 4:2 compressor takes four same-weight bits `x1..x4` and a carry-in and
//! produces `sum` (weight 1) together with `carry` and `cout` (weight 2 each).
//! The two reconfigurable designs behave exactly when their error-control
//! input is 1. When it is 0 they follow a fixed behavioral truth table, stored
//! here as an explicit 32-entry lookup per design so it can be audited row by
//! row.

use std::fmt;

use serde::{Deserialize, Serialize};

/// The `(cout, carry, sum)` triple produced by a 4:2 compressor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CompressorOutputs {
    pub cout: u8,
    pub carry: u8,
    pub sum: u8,
}

impl CompressorOutputs {
    pub const fn new(cout: u8, carry: u8, sum: u8) -> Self {
        Self { cout, carry, sum }
    }

    /// Arithmetic value `2*cout + 2*carry + sum`, in `0..=5`.
    pub const fn value(self) -> u8 {
        2 * self.cout + 2 * self.carry + self.sum
    }

    const fn pack(self) -> u8 {
        (self.cout << 2) | (self.carry << 1) | self.sum
    }

    const fn unpack(packed: u8) -> Self {
        Self::new((packed >> 2) & 1, (packed >> 1) & 1, packed & 1)
    }
}

impl fmt::Display for CompressorOutputs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.cout, self.carry, self.sum)
    }
}

/// The five compressor inputs in table order `x1 x2 x3 x4 cin`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CompressorInputs {
    pub x1: u8,
    pub x2: u8,
    pub x3: u8,
    pub x4: u8,
    pub cin: u8,
}

impl CompressorInputs {
    pub const fn new(x1: u8, x2: u8, x3: u8, x4: u8, cin: u8) -> Self {
        Self { x1, x2, x3, x4, cin }
    }

    /// Row index with `x1` as the most significant bit, matching the order
    /// the truth table is printed in.
    pub const fn index(self) -> usize {
        ((self.x1 as usize) << 4)
            | ((self.x2 as usize) << 3)
            | ((self.x3 as usize) << 2)
            | ((self.x4 as usize) << 1)
            | self.cin as usize
    }

    pub const fn from_index(index: usize) -> Self {
        Self::new(
            ((index >> 4) & 1) as u8,
            ((index >> 3) & 1) as u8,
            ((index >> 2) & 1) as u8,
            ((index >> 1) & 1) as u8,
            (index & 1) as u8,
        )
    }

    /// Bit-sum of all five inputs.
    pub const fn value(self) -> u8 {
        self.x1 + self.x2 + self.x3 + self.x4 + self.cin
    }

    /// Iterator over all 32 input combinations in table order.
    pub fn all() -> impl Iterator<Item = Self> {
        (0..32).map(Self::from_index)
    }
}

impl fmt::Display for CompressorInputs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} {} {}", self.x1, self.x2, self.x3, self.x4, self.cin)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CompressorKind {
    Exact,
    /// Dual full-adder based reconfigurable compressor.
    Dfc,
    /// Single stacking based reconfigurable compressor.
    Ssc,
}

impl CompressorKind {
    pub const ALL: [CompressorKind; 3] = [Self::Exact, Self::Dfc, Self::Ssc];

    pub fn name(self) -> &'static str {
        match self {
            Self::Exact => "exact",
            Self::Dfc => "dfc",
            Self::Ssc => "ssc",
        }
    }

    /// Largest `|ED|` any single approximate evaluation can produce.
    pub fn max_abs_error(self) -> u8 {
        match self {
            Self::Exact => 0,
            Self::Dfc => 2,
            Self::Ssc => 1,
        }
    }

    /// The packed 32-entry lookup for approximate mode (`er = 0`).
    pub(crate) fn approx_lut(self) -> &'static [u8; 32] {
        match self {
            Self::Exact => &EXACT_LUT,
            Self::Dfc => &DFC_LUT,
            Self::Ssc => &SSC_LUT,
        }
    }
}

impl fmt::Display for CompressorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Returns `(sum, carry)` with `2*carry + sum == a + b + c`.
#[inline]
pub const fn full_adder(a: u8, b: u8, c: u8) -> (u8, u8) {
    let sum = a ^ b ^ c;
    let carry = (a & b) | (a & c) | (b & c);
    (sum, carry)
}

/// Returns `(sum, carry)` with `2*carry + sum == a + b`.
#[inline]
pub const fn half_adder(a: u8, b: u8) -> (u8, u8) {
    (a ^ b, a & b)
}

/// Exact 4:2 compressor built from two cascaded full adders. `cout` depends
/// only on `x1..x3`, so a row of these never ripples through the carry-in.
#[inline]
pub const fn exact_compressor(x1: u8, x2: u8, x3: u8, x4: u8, cin: u8) -> CompressorOutputs {
    let (s1, cout) = full_adder(x1, x2, x3);
    let (sum, carry) = full_adder(s1, x4, cin);
    CompressorOutputs::new(cout, carry, sum)
}

/// Evaluates a compressor of the given kind. `er = 1` selects exact operation
/// for the reconfigurable kinds; `Exact` ignores `er`.
#[inline]
pub fn compress(kind: CompressorKind, inputs: CompressorInputs, er: u8) -> CompressorOutputs {
    let lut = if er != 0 { &EXACT_LUT } else { kind.approx_lut() };
    CompressorOutputs::unpack(lut[inputs.index()])
}

/// Signed error distance of one evaluation: output value minus input bit-sum.
pub fn error_distance(kind: CompressorKind, inputs: CompressorInputs, er: u8) -> i8 {
    compress(kind, inputs, er).value() as i8 - inputs.value() as i8
}

/// One row of a compressor truth table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableRow {
    pub inputs: CompressorInputs,
    pub outputs: CompressorOutputs,
    pub ed: i8,
}

/// All 32 rows in table order for the given kind and mode.
pub fn truth_table(kind: CompressorKind, er: u8) -> Vec<TableRow> {
    CompressorInputs::all()
        .map(|inputs| TableRow {
            inputs,
            outputs: compress(kind, inputs, er),
            ed: error_distance(kind, inputs, er),
        })
        .collect()
}

/// Rows with nonzero error distance in approximate mode (`er = 0`).
pub fn error_table(kind: CompressorKind) -> Vec<(CompressorInputs, i8)> {
    truth_table(kind, 0)
        .into_iter()
        .filter(|row| row.ed != 0)
        .map(|row| (row.inputs, row.ed))
        .collect()
}

const fn build_exact_lut() -> [u8; 32] {
    let mut lut = [0u8; 32];
    let mut i = 0;
    while i < 32 {
        let x = CompressorInputs::from_index(i);
        lut[i] = exact_compressor(x.x1, x.x2, x.x3, x.x4, x.cin).pack();
        i += 1;
    }
    lut
}

const fn patch_lut(overrides: &[(usize, CompressorOutputs)]) -> [u8; 32] {
    let mut lut = build_exact_lut();
    let mut i = 0;
    while i < overrides.len() {
        lut[overrides[i].0] = overrides[i].1.pack();
        i += 1;
    }
    lut
}

#[allow(clippy::too_many_arguments)]
const fn row(x1: u8, x2: u8, x3: u8, x4: u8, cin: u8, cout: u8, carry: u8, sum: u8) -> (usize, CompressorOutputs) {
    (
        CompressorInputs::new(x1, x2, x3, x4, cin).index(),
        CompressorOutputs::new(cout, carry, sum),
    )
}

/// Approximate-mode rows that differ from the exact compressor; every other
/// row is exact. The `1 0 1 1 0` row is `(1,1,0)` so that its error distance
/// is +1.
const DFC_ROWS: [(usize, CompressorOutputs); 13] = [
    row(0, 0, 0, 1, 1, 0, 1, 1),
    row(0, 0, 1, 0, 1, 0, 0, 1),
    row(0, 1, 0, 0, 1, 0, 0, 1),
    row(0, 1, 1, 0, 0, 0, 0, 1),
    row(0, 1, 1, 0, 1, 0, 0, 1),
    row(0, 1, 1, 1, 0, 0, 1, 0),
    row(0, 1, 1, 1, 1, 0, 1, 1),
    row(1, 0, 0, 0, 1, 0, 0, 1),
    row(1, 0, 1, 0, 0, 1, 0, 1),
    row(1, 0, 1, 1, 0, 1, 1, 0),
    row(1, 0, 1, 1, 1, 1, 1, 1),
    row(1, 1, 0, 1, 1, 1, 1, 1),
    row(1, 1, 1, 0, 1, 1, 0, 1),
];

/// Same input rows as the DFC listing. Five of them carry the right value
/// with a different bit encoding, leaving eight erroneous rows.
const SSC_ROWS: [(usize, CompressorOutputs); 13] = [
    row(0, 0, 0, 1, 1, 0, 1, 1),
    row(0, 0, 1, 0, 1, 0, 1, 1),
    row(0, 1, 0, 0, 1, 0, 1, 1),
    row(0, 1, 1, 0, 0, 0, 1, 0),
    row(0, 1, 1, 0, 1, 0, 1, 1),
    row(0, 1, 1, 1, 0, 0, 1, 1),
    row(0, 1, 1, 1, 1, 1, 1, 1),
    row(1, 0, 0, 0, 1, 0, 1, 1),
    row(1, 0, 1, 0, 0, 0, 1, 0),
    row(1, 0, 1, 1, 0, 0, 1, 1),
    row(1, 0, 1, 1, 1, 1, 1, 1),
    row(1, 1, 0, 1, 1, 1, 1, 1),
    row(1, 1, 1, 0, 1, 1, 1, 1),
];

pub(crate) const EXACT_LUT: [u8; 32] = build_exact_lut();
pub(crate) const DFC_LUT: [u8; 32] = patch_lut(&DFC_ROWS);
pub(crate) const SSC_LUT: [u8; 32] = patch_lut(&SSC_ROWS);

/// Input rows where the approximate tables deviate or re-encode, in table order.
pub fn listed_rows() -> Vec<CompressorInputs> {
    DFC_ROWS.iter().map(|(i, _)| CompressorInputs::from_index(*i)).collect()
}
