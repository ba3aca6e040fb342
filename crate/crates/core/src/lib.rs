//! Reconfigurable approximate multipliers built from 4:2 compressors, their
//! error characterization, and an RV32IM simulator whose multiply unit is
//! controlled through a custom CSR.
//!
//! Layers, bottom up:
//! * [`compressor`]: exact, DFC and SSC 4:2 compressor cells.
//! * [`mul8`]: 8x8 multiplier netlist with an Er-controlled approximate
//!   region.
//! * [`hier`]: 16/32-bit multipliers composed from the 8-bit core and the
//!   `mulcsr` control word.
//! * [`error_lab`]: exhaustive and sampled error metrics.
//! * [`sim`]: instruction-set simulator with a timing/energy model.
//! * [`workloads`]: benchmark kernels, native and simulated.

pub mod compressor;
pub mod error_lab;
pub mod hier;
pub mod mul8;
pub mod sim;
pub mod workloads;

pub use compressor::{CompressorInputs, CompressorKind, CompressorOutputs};
pub use error_lab::ErrorStats;
pub use hier::{HierConfig, MulCsr, MulOp};
pub use mul8::{ErMap, ErMask, Mul8Kind, ReductionTree, TreeConfig};
pub use sim::{Isa, MulUnit, RunReport, Simulator, TimingEnergyModel};
pub use workloads::{InputSpec, QualityReport, Workload, WorkloadData};
