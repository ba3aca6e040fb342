//! Error-resilient benchmark kernels, evaluated natively and as simulator
//! programs.
//!
//! Kernels and data:
//! * `conv2d3x3`, `conv2d6x6`: N x N image (N = 3 or 6) convolved with a 3x3
//!   kernel, zero-padded "same" output. Image and kernel are uniform
//!   integers in `[0, 255]`.
//! * `matmul3x3`, `matmul6x6`: `C = A * B`, entries uniform in `[0, 255]`.
//! * `fir_int`: 32 signed 16-bit samples through the 8-tap filter
//!   [`FIR_TAPS`], raw 32-bit accumulator output.
//! * `iir_int`: 32 signed 16-bit samples through a Q14 direct-form-I biquad
//!   ([`IIR_B`], [`IIR_A`]); the feedback accumulation is exact, only the
//!   multiplies are approximate.
//! * `factorial`: `n!` by repeated multiplication, default `n = 10`.
//!
//! All arithmetic is wrapping 32-bit, matching the simulator. Each multiply
//! goes through the same function in both paths with the data operand first
//! (`rs1`) and the coefficient second (`rs2`), so native and simulated outputs
//! agree bit for bit.
//!
//! Simulator memory map: code at [`CODE_BASE`], inputs from [`DATA_BASE`],
//! results as 32-bit words from [`RESULT_ADDR`].

use std::fmt;

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hier::{mul_signed, reference_mul, HierConfig, MulCsr, MulOp};
use crate::sim::asm::{assemble_program, AsmError, ProgramImage};
use crate::sim::{Isa, Memory, MulUnit, RunReport, Simulator, TimingEnergyModel, DEFAULT_MEMORY_SIZE};

pub const CODE_BASE: u32 = 0x1000;
pub const DATA_BASE: u32 = 0x0010_0000;
pub const RESULT_ADDR: u32 = 0x0020_0000;

pub const FIR_TAPS: [i32; 8] = [-3, 6, 21, 40, 40, 21, 6, -3];
pub const IIR_B: [i32; 3] = [1106, 2210, 1106];
/// Denominator `1 + a1 z^-1 + a2 z^-2` in Q14.
pub const IIR_A: [i32; 2] = [-18727, 6763];
pub const IIR_SHIFT: u32 = 14;
pub const SIGNAL_LEN: usize = 32;
pub const DEFAULT_FACTORIAL_N: u32 = 10;

/// Instruction budget for workload programs; generous for every kernel.
pub const RUN_BUDGET: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Workload {
    Conv2d3x3,
    Conv2d6x6,
    Matmul3x3,
    Matmul6x6,
    FirInt,
    IirInt,
    Factorial,
}

impl Workload {
    pub const ALL: [Workload; 7] = [
        Self::Conv2d3x3,
        Self::Conv2d6x6,
        Self::Matmul3x3,
        Self::Matmul6x6,
        Self::FirInt,
        Self::IirInt,
        Self::Factorial,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Conv2d3x3 => "conv2d3x3",
            Self::Conv2d6x6 => "conv2d6x6",
            Self::Matmul3x3 => "matmul3x3",
            Self::Matmul6x6 => "matmul6x6",
            Self::FirInt => "fir_int",
            Self::IirInt => "iir_int",
            Self::Factorial => "factorial",
        }
    }

    pub fn parse(s: &str) -> Result<Self, WorkloadError> {
        Self::ALL
            .into_iter()
            .find(|w| w.name() == s)
            .ok_or_else(|| WorkloadError::Unknown(s.to_string()))
    }

    fn image_like(self) -> bool {
        matches!(self, Self::Conv2d3x3 | Self::Conv2d6x6)
    }
}

impl fmt::Display for Workload {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WorkloadError {
    #[error("unknown workload `{0}`")]
    Unknown(String),
    #[error("{what}: expected {expected} elements, got {found}")]
    Dimension { what: &'static str, expected: usize, found: usize },
    #[error("input data is for {data}, not {workload}")]
    Mismatch { workload: Workload, data: Workload },
    #[error("{0}")]
    Invalid(String),
    #[error("program assembly failed: {0}")]
    Asm(#[from] AsmError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WorkloadData {
    Conv { n: usize, image: Vec<i32>, kernel: Vec<i32> },
    Matmul { n: usize, a: Vec<i32>, b: Vec<i32> },
    Fir { samples: Vec<i32> },
    Iir { samples: Vec<i32> },
    Factorial { n: u32 },
}

fn check_len(what: &'static str, v: &[i32], expected: usize) -> Result<(), WorkloadError> {
    if v.len() == expected {
        Ok(())
    } else {
        Err(WorkloadError::Dimension { what, expected, found: v.len() })
    }
}

fn check_i16(samples: &[i32]) -> Result<(), WorkloadError> {
    match samples.iter().find(|&&s| i16::try_from(s).is_err()) {
        Some(s) => Err(WorkloadError::Invalid(format!("sample {s} is outside the 16-bit range"))),
        None => Ok(()),
    }
}

impl WorkloadData {
    pub fn conv(n: usize, image: Vec<i32>, kernel: Vec<i32>) -> Result<Self, WorkloadError> {
        check_len("conv image", &image, n * n)?;
        check_len("conv kernel", &kernel, 9)?;
        Ok(WorkloadData::Conv { n, image, kernel })
    }

    pub fn matmul(n: usize, a: Vec<i32>, b: Vec<i32>) -> Result<Self, WorkloadError> {
        check_len("matmul A", &a, n * n)?;
        check_len("matmul B", &b, n * n)?;
        Ok(WorkloadData::Matmul { n, a, b })
    }

    pub fn fir(samples: Vec<i32>) -> Result<Self, WorkloadError> {
        check_i16(&samples)?;
        Ok(WorkloadData::Fir { samples })
    }

    pub fn iir(samples: Vec<i32>) -> Result<Self, WorkloadError> {
        check_i16(&samples)?;
        Ok(WorkloadData::Iir { samples })
    }

    /// Seeded inputs for `workload`.
    pub fn generate(workload: Workload, seed: u64) -> Self {
        let mut rng = SplitMix64::seed_from_u64(seed);
        let mut bytes = |len: usize| -> Vec<i32> { (0..len).map(|_| (rng.next_u64() >> 56) as i32).collect() };
        match workload {
            Workload::Conv2d3x3 | Workload::Conv2d6x6 => {
                let n = if workload == Workload::Conv2d3x3 { 3 } else { 6 };
                let image = bytes(n * n);
                let kernel = bytes(9);
                WorkloadData::Conv { n, image, kernel }
            }
            Workload::Matmul3x3 | Workload::Matmul6x6 => {
                let n = if workload == Workload::Matmul3x3 { 3 } else { 6 };
                let a = bytes(n * n);
                let b = bytes(n * n);
                WorkloadData::Matmul { n, a, b }
            }
            Workload::FirInt | Workload::IirInt => {
                let samples: Vec<i32> = (0..SIGNAL_LEN).map(|_| (rng.next_u64() >> 48) as u16 as i16 as i32).collect();
                if workload == Workload::FirInt {
                    WorkloadData::Fir { samples }
                } else {
                    WorkloadData::Iir { samples }
                }
            }
            Workload::Factorial => WorkloadData::Factorial { n: DEFAULT_FACTORIAL_N },
        }
    }

    /// Workloads this data can drive. Explicit conv and matmul data may have
    /// any size; the size in the id only fixes seeded dimensions.
    fn fits(&self, workload: Workload) -> bool {
        matches!(
            (self, workload),
            (WorkloadData::Conv { .. }, Workload::Conv2d3x3 | Workload::Conv2d6x6)
                | (WorkloadData::Matmul { .. }, Workload::Matmul3x3 | Workload::Matmul6x6)
                | (WorkloadData::Fir { .. }, Workload::FirInt)
                | (WorkloadData::Iir { .. }, Workload::IirInt)
                | (WorkloadData::Factorial { .. }, Workload::Factorial)
        )
    }

    fn kind(&self) -> Workload {
        match self {
            WorkloadData::Conv { .. } => Workload::Conv2d3x3,
            WorkloadData::Matmul { .. } => Workload::Matmul3x3,
            WorkloadData::Fir { .. } => Workload::FirInt,
            WorkloadData::Iir { .. } => Workload::IirInt,
            WorkloadData::Factorial { .. } => Workload::Factorial,
        }
    }
}

/// Where workload inputs come from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum InputSpec {
    Seeded(u64),
    Explicit(WorkloadData),
}

impl InputSpec {
    pub fn resolve(&self, workload: Workload) -> Result<WorkloadData, WorkloadError> {
        match self {
            InputSpec::Seeded(seed) => Ok(WorkloadData::generate(workload, *seed)),
            InputSpec::Explicit(d) if d.fits(workload) => Ok(d.clone()),
            InputSpec::Explicit(d) => Err(WorkloadError::Mismatch { workload, data: d.kind() }),
        }
    }
}

fn conv_padded(n: usize, image: &[i32]) -> Vec<i32> {
    let w = n + 2;
    let mut p = vec![0; w * w];
    for y in 0..n {
        p[(y + 1) * w + 1..(y + 1) * w + 1 + n].copy_from_slice(&image[y * n..(y + 1) * n]);
    }
    p
}

/// `mul(rs1, rs2)` is the low word of the multiply.
fn compute(data: &WorkloadData, mul: &dyn Fn(i32, i32) -> i32) -> Vec<i32> {
    match data {
        WorkloadData::Conv { n, image, kernel } => {
            let (n, w) = (*n, *n + 2);
            let p = conv_padded(n, image);
            let mut out = Vec::with_capacity(n * n);
            for y in 0..n {
                for x in 0..n {
                    let mut acc = 0i32;
                    for ky in 0..3 {
                        for kx in 0..3 {
                            acc = acc.wrapping_add(mul(p[(y + ky) * w + x + kx], kernel[ky * 3 + kx]));
                        }
                    }
                    out.push(acc);
                }
            }
            out
        }
        WorkloadData::Matmul { n, a, b } => {
            let n = *n;
            let mut out = Vec::with_capacity(n * n);
            for i in 0..n {
                for j in 0..n {
                    let mut acc = 0i32;
                    for k in 0..n {
                        acc = acc.wrapping_add(mul(a[i * n + k], b[k * n + j]));
                    }
                    out.push(acc);
                }
            }
            out
        }
        WorkloadData::Fir { samples } => (0..samples.len())
            .map(|i| {
                FIR_TAPS.iter().enumerate().fold(0i32, |acc, (k, &h)| {
                    let x = if i >= k { samples[i - k] } else { 0 };
                    acc.wrapping_add(mul(x, h))
                })
            })
            .collect(),
        WorkloadData::Iir { samples } => {
            let (mut x1, mut x2, mut y1, mut y2) = (0i32, 0i32, 0i32, 0i32);
            let mut out = Vec::with_capacity(samples.len());
            for &x in samples {
                let acc = mul(x, IIR_B[0])
                    .wrapping_add(mul(x1, IIR_B[1]))
                    .wrapping_add(mul(x2, IIR_B[2]))
                    .wrapping_sub(mul(y1, IIR_A[0]))
                    .wrapping_sub(mul(y2, IIR_A[1]));
                let y = acc >> IIR_SHIFT;
                out.push(y);
                (x2, x1, y2, y1) = (x1, x, y1, y);
            }
            out
        }
        WorkloadData::Factorial { n } => {
            let mut acc = 1i32;
            for i in (1..=*n).rev() {
                acc = mul(acc, i as i32);
            }
            vec![acc]
        }
    }
}

/// Output of the kernel with a straightforward host-integer multiply.
pub fn reference_output(data: &WorkloadData) -> Vec<i32> {
    compute(data, &|a, b| a.wrapping_mul(b))
}

/// Output of the kernel when every multiply runs on `unit` configured by `csr`.
pub fn configured_output(data: &WorkloadData, unit: MulUnit, csr: u32) -> Vec<i32> {
    match unit {
        MulUnit::Baseline => compute(data, &|a, b| reference_mul(a as u32, b as u32, MulOp::Mul) as i32),
        MulUnit::Reconfigurable(kind) => {
            let cfg = HierConfig::from_csr(kind, &MulCsr::decode(csr));
            compute(data, &|a, b| mul_signed(a as u32, b as u32, MulOp::Mul, &cfg) as i32)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityReport {
    pub workload: String,
    pub config: String,
    pub mse: f64,
    /// Peak is the largest exact output magnitude; `None` when the output is
    /// not image-like or the error is zero.
    pub psnr_db: Option<f64>,
    /// Largest `|approx - exact| / |exact|`; an element with exact value 0
    /// counts its absolute error.
    pub max_rel_err: f64,
    pub n: usize,
}

pub fn quality(workload: Workload, config: String, exact: &[i32], approx: &[i32]) -> QualityReport {
    let n = exact.len();
    let mut sq = 0.0;
    let mut max_rel = 0.0f64;
    for (&e, &a) in exact.iter().zip(approx) {
        let d = (a as i64 - e as i64) as f64;
        sq += d * d;
        let rel = if e == 0 { d.abs() } else { d.abs() / (e as i64).abs() as f64 };
        max_rel = max_rel.max(rel);
    }
    let mse = if n == 0 { 0.0 } else { sq / n as f64 };
    let peak = exact.iter().map(|&e| (e as i64).abs()).max().unwrap_or(0) as f64;
    let psnr_db = (workload.image_like() && mse > 0.0 && peak > 0.0).then(|| 10.0 * (peak * peak / mse).log10());
    QualityReport { workload: workload.name().to_string(), config, mse, psnr_db, max_rel_err: max_rel, n }
}

pub fn config_label(unit: MulUnit, csr: u32) -> String {
    format!("{} {}", unit.name(), MulCsr::decode(csr))
}

/// Runs the kernel exactly and with the configured multiplier.
pub fn run_native(
    workload: Workload,
    input: &InputSpec,
    unit: MulUnit,
    csr: u32,
) -> Result<(Vec<i32>, QualityReport), WorkloadError> {
    let data = input.resolve(workload)?;
    let exact = reference_output(&data);
    let approx = configured_output(&data, unit, csr);
    let q = quality(workload, config_label(unit, csr), &exact, &approx);
    Ok((approx, q))
}

/// A program image plus where its results land.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimProgram {
    pub workload: Workload,
    pub image: ProgramImage,
    pub result_addr: u32,
    pub result_len: usize,
    pub source: String,
}

fn words_to_bytes(words: &[i32]) -> Vec<u8> {
    words.iter().flat_map(|w| w.to_le_bytes()).collect()
}

/// Loads `v` into `rd` with a fixed two-instruction sequence, so program
/// length does not depend on the CSR value.
fn load_const(rd: &str, v: u32) -> String {
    let lo = ((v as i32) << 20) >> 20;
    let hi = v.wrapping_sub(lo as u32) >> 12;
    format!("  lui {rd}, {hi:#x}\n  addi {rd}, {rd}, {lo}\n")
}

fn epilogue(isa: Isa) -> String {
    format!("  li a0, 0\n  li {}, 93\n  ecall\n", isa.syscall_reg().abi_name())
}

// Register use stays within x0..x15 so every kernel also runs on RV32E.

fn matmul_asm(n: usize, a_addr: u32, b_addr: u32) -> String {
    let row = 4 * n;
    format!(
        "  li s0, {a_addr}
  li s1, {RESULT_ADDR}
  li ra, {n}
row:
  li gp, {b_addr}
  li tp, {n}
col:
  mv t0, s0
  mv t1, gp
  li t2, 0
  li a0, {n}
inner:
  lw a1, 0(t0)
  lw a2, 0(t1)
  mul a3, a1, a2
  add t2, t2, a3
  addi t0, t0, 4
  addi t1, t1, {row}
  addi a0, a0, -1
  bnez a0, inner
  sw t2, 0(s1)
  addi s1, s1, 4
  addi gp, gp, 4
  addi tp, tp, -1
  bnez tp, col
  addi s0, s0, {row}
  addi ra, ra, -1
  bnez ra, row
"
    )
}

fn conv_asm(n: usize, p_addr: u32, k_addr: u32) -> String {
    let stride = 4 * (n + 2);
    let rewind = stride - 12;
    format!(
        "  li s0, {p_addr}
  li s1, {RESULT_ADDR}
  li ra, {n}
yl:
  mv gp, s0
  li tp, {n}
xl:
  mv t0, gp
  li t1, {k_addr}
  li t2, 0
  li a0, 3
kyl:
  li a4, 3
kxl:
  lw a1, 0(t0)
  lw a2, 0(t1)
  mul a3, a1, a2
  add t2, t2, a3
  addi t0, t0, 4
  addi t1, t1, 4
  addi a4, a4, -1
  bnez a4, kxl
  addi t0, t0, {rewind}
  addi a0, a0, -1
  bnez a0, kyl
  sw t2, 0(s1)
  addi s1, s1, 4
  addi gp, gp, 4
  addi tp, tp, -1
  bnez tp, xl
  addi s0, s0, {stride}
  addi ra, ra, -1
  bnez ra, yl
"
    )
}

/// FIR over a sample buffer pre-padded with `taps - 1` zeros, taps stored
/// reversed so both pointers walk forward.
fn fir_asm(len: usize, xp_addr: u32, hr_addr: u32) -> String {
    let taps = FIR_TAPS.len();
    format!(
        "  li s0, {xp_addr}
  li s1, {RESULT_ADDR}
  li ra, {len}
nl:
  mv t0, s0
  li t1, {hr_addr}
  li t2, 0
  li a0, {taps}
kl:
  lw a1, 0(t0)
  lw a2, 0(t1)
  mul a3, a1, a2
  add t2, t2, a3
  addi t0, t0, 4
  addi t1, t1, 4
  addi a0, a0, -1
  bnez a0, kl
  sw t2, 0(s1)
  addi s1, s1, 4
  addi s0, s0, 4
  addi ra, ra, -1
  bnez ra, nl
"
    )
}

fn iir_asm(len: usize, x_addr: u32) -> String {
    let [b0, b1, b2] = IIR_B;
    let [a1, a2] = IIR_A;
    format!(
        "  li s0, {x_addr}
  li s1, {RESULT_ADDR}
  li ra, {len}
  li gp, 0
  li tp, 0
  li t0, 0
  li t1, 0
loop:
  lw a0, 0(s0)
  li a2, {b0}
  mul t2, a0, a2
  li a2, {b1}
  mul a3, gp, a2
  add t2, t2, a3
  li a2, {b2}
  mul a3, tp, a2
  add t2, t2, a3
  li a2, {a1}
  mul a3, t0, a2
  sub t2, t2, a3
  li a2, {a2}
  mul a3, t1, a2
  sub t2, t2, a3
  srai t2, t2, {IIR_SHIFT}
  sw t2, 0(s1)
  mv tp, gp
  mv gp, a0
  mv t1, t0
  mv t0, t2
  addi s0, s0, 4
  addi s1, s1, 4
  addi ra, ra, -1
  bnez ra, loop
"
    )
}

/// `n!` into `a0` with label prefix `p`, leaving the result in `a0`.
fn factorial_asm(n: u32, p: &str) -> String {
    format!(
        "  li a0, 1
  li a1, {n}
{p}loop:
  beqz a1, {p}done
  mul a0, a0, a1
  addi a1, a1, -1
  j {p}loop
{p}done:
"
    )
}

struct Builder {
    workload: Workload,
    csr: u32,
    isa: Isa,
}

impl Builder {
    fn finish(&self, body: String, data: Vec<(u32, Vec<u8>)>, len: usize) -> Result<SimProgram, WorkloadError> {
        let (workload, csr) = (self.workload, self.csr);
        let source = format!("{}  csrrw zero, mulcsr, t0\n{body}{}", load_const("t0", csr), epilogue(self.isa));
        let words = assemble_program(&source, CODE_BASE)?;
        let mut image = ProgramImage::from_words(CODE_BASE, &words);
        for (addr, bytes) in data {
            image.add_segment(addr, bytes);
        }
        Ok(SimProgram { workload, image, result_addr: RESULT_ADDR, result_len: len, source })
    }
}

/// Program that writes `csr` to `mulcsr`, runs the kernel, stores results
/// at [`RESULT_ADDR`] and exits with code 0.
pub fn build_sim_program(workload: Workload, input: &InputSpec, csr: u32) -> Result<SimProgram, WorkloadError> {
    build_sim_program_for(workload, input, csr, Isa::Rv32i)
}

/// [`build_sim_program`] with the exit call convention of `isa`.
pub fn build_sim_program_for(
    workload: Workload,
    input: &InputSpec,
    csr: u32,
    isa: Isa,
) -> Result<SimProgram, WorkloadError> {
    let data = input.resolve(workload)?;
    let bld = Builder { workload, csr, isa };
    match &data {
        WorkloadData::Conv { n, image, kernel } => {
            let p = conv_padded(*n, image);
            let k_addr = DATA_BASE + 4 * p.len() as u32;
            let body = conv_asm(*n, DATA_BASE, k_addr);
            bld.finish(body, vec![(DATA_BASE, words_to_bytes(&p)), (k_addr, words_to_bytes(kernel))], n * n)
        }
        WorkloadData::Matmul { n, a, b } => {
            let b_addr = DATA_BASE + 4 * a.len() as u32;
            let body = matmul_asm(*n, DATA_BASE, b_addr);
            bld.finish(body, vec![(DATA_BASE, words_to_bytes(a)), (b_addr, words_to_bytes(b))], n * n)
        }
        WorkloadData::Fir { samples } => {
            let mut xp = vec![0; FIR_TAPS.len() - 1];
            xp.extend_from_slice(samples);
            let hr: Vec<i32> = FIR_TAPS.iter().rev().copied().collect();
            let hr_addr = DATA_BASE + 4 * xp.len() as u32;
            let body = fir_asm(samples.len(), DATA_BASE, hr_addr);
            bld.finish(body, vec![(DATA_BASE, words_to_bytes(&xp)), (hr_addr, words_to_bytes(&hr))], samples.len())
        }
        WorkloadData::Iir { samples } => {
            let body = iir_asm(samples.len(), DATA_BASE);
            bld.finish(body, vec![(DATA_BASE, words_to_bytes(samples))], samples.len())
        }
        WorkloadData::Factorial { n } => {
            let body = format!("{}  li t0, {RESULT_ADDR}\n  sw a0, 0(t0)\n", factorial_asm(*n, "f"));
            bld.finish(body, Vec::new(), 1)
        }
    }
}

/// Factorial computed once per `csr` value, each result stored at
/// `RESULT_ADDR + 4 * i`. The CSR is written right before each run.
pub fn factorial_csr_sequence(n: u32, csrs: &[u32]) -> Result<SimProgram, WorkloadError> {
    let mut source = String::new();
    for (i, csr) in csrs.iter().enumerate() {
        source.push_str(&load_const("t1", *csr));
        source.push_str("  csrrw zero, 0x801, t1\n");
        source.push_str(&factorial_asm(n, &format!("f{i}")));
        source.push_str(&format!("  li t0, {}\n  sw a0, 0(t0)\n", RESULT_ADDR + 4 * i as u32));
    }
    source.push_str(&epilogue(Isa::Rv32i));
    let words = assemble_program(&source, CODE_BASE)?;
    Ok(SimProgram {
        workload: Workload::Factorial,
        image: ProgramImage::from_words(CODE_BASE, &words),
        result_addr: RESULT_ADDR,
        result_len: csrs.len(),
        source,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimOutcome {
    pub outputs: Vec<i32>,
    pub report: RunReport,
}

impl SimProgram {
    pub fn simulator(&self, unit: MulUnit, model: TimingEnergyModel, isa: Isa) -> Simulator {
        let mut mem = Memory::new(DEFAULT_MEMORY_SIZE);
        self.image.load_into(&mut mem).expect("workload image fits the default memory");
        Simulator::new(mem, self.image.entry, unit, model).with_isa(isa)
    }

    pub fn run(&self, unit: MulUnit, model: TimingEnergyModel, isa: Isa) -> SimOutcome {
        let mut sim = self.simulator(unit, model, isa);
        let report = sim.run(RUN_BUDGET);
        let outputs = self.read_results(&sim.mem);
        SimOutcome { outputs, report }
    }

    pub fn read_results(&self, mem: &Memory) -> Vec<i32> {
        mem.read_words(self.result_addr, self.result_len)
            .map(|w| w.into_iter().map(|x| x as i32).collect())
            .unwrap_or_default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mul8::Mul8Kind;

    #[test]
    fn factorial_5() {
        let input = InputSpec::Explicit(WorkloadData::Factorial { n: 5 });
        let (out, q) = run_native(Workload::Factorial, &input, MulUnit::Baseline, 0).unwrap();
        assert_eq!(out, vec![120]);
        assert_eq!(q.mse, 0.0);
    }

    #[test]
    fn dimension_checks() {
        assert_eq!(
            WorkloadData::matmul(3, vec![0; 9], vec![0; 8]),
            Err(WorkloadError::Dimension { what: "matmul B", expected: 9, found: 8 })
        );
        assert!(WorkloadData::conv(3, vec![0; 9], vec![0; 4]).is_err());
        assert!(WorkloadData::fir(vec![40000]).is_err());
        let fir = InputSpec::Explicit(WorkloadData::fir(vec![1, 2]).unwrap());
        assert!(matches!(fir.resolve(Workload::Matmul3x3), Err(WorkloadError::Mismatch { .. })));
        assert!(Workload::parse("fft").is_err());
    }

    #[test]
    fn names_round_trip() {
        for w in Workload::ALL {
            assert_eq!(Workload::parse(w.name()).unwrap(), w);
        }
    }

    #[test]
    fn sim_matches_native_exact_and_approx() {
        for w in Workload::ALL {
            for (unit, csr) in [(MulUnit::Baseline, 0), (MulUnit::Reconfigurable(Mul8Kind::Ssm), 1)] {
                let input = InputSpec::Seeded(3);
                let (native, _) = run_native(w, &input, unit, csr).unwrap();
                let prog = build_sim_program_for(w, &input, csr, Isa::Rv32e).unwrap();
                let out = prog.run(unit, TimingEnergyModel::default(), Isa::Rv32e);
                assert_eq!(out.report.exit_code, Some(0), "{w}: {:?}", out.report.diagnostic);
                assert_eq!(out.outputs, native, "{w} {unit:?}");
            }
        }
    }
}
