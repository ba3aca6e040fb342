//! Additive timing and energy model.
//!
//! Each retired instruction costs a class-dependent number of cycles. Its
//! energy is `base_pj` plus the multiplier unit's power integrated over those
//! cycles, using the power figure for the multiplier mode active when the
//! instruction issued. Unit power figures are per-mode constants in mW; at
//! `freq_mhz` one cycle of a unit drawing `P` mW costs `1000 * P / freq_mhz`
//! pJ.
//!
//! The defaults are a calibrated model, not a measurement: the unit power
//! figures are those of a 620 MHz core running a 3x3
//! matrix multiply (exact multiplier 1.450 mW, SSM exact mode 0.692 mW,
//! SSM approximate mode 0.467 mW). DFM figures scale the SSM ones by the
//! 8-bit DFM/SSM energy ratios (504/403 exact mode, 278/295 approximate
//! mode).

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PowerMode {
    /// Conventional exact multiplier.
    Baseline,
    SsmExact,
    SsmApprox,
    DfmExact,
    DfmApprox,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InstrClass {
    Alu,
    Load,
    Store,
    Branch { taken: bool },
    Jump,
    Mul,
    Div,
    System,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CycleCosts {
    pub base: u32,
    pub load: u32,
    pub store: u32,
    pub taken_branch_penalty: u32,
    pub mul: u32,
    pub div: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyConstants {
    pub freq_mhz: f64,
    pub base_pj: f64,
    pub mul_exact_mw: f64,
    pub mul_ssm_exactmode_mw: f64,
    pub mul_ssm_approxmode_mw: f64,
    pub mul_dfm_exactmode_mw: f64,
    pub mul_dfm_approxmode_mw: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimingEnergyModel {
    pub cycles: CycleCosts,
    pub energy: EnergyConstants,
}

impl Default for TimingEnergyModel {
    fn default() -> Self {
        TimingEnergyModel {
            cycles: CycleCosts { base: 1, load: 1, store: 1, taken_branch_penalty: 1, mul: 4, div: 32 },
            energy: EnergyConstants {
                freq_mhz: 620.0,
                base_pj: 0.0,
                mul_exact_mw: 1.450,
                mul_ssm_exactmode_mw: 0.692,
                mul_ssm_approxmode_mw: 0.467,
                mul_dfm_exactmode_mw: 0.692 * 504.0 / 403.0,
                mul_dfm_approxmode_mw: 0.467 * 278.0 / 295.0,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: bad value `{value}` for `{key}`")]
    BadValue { line: usize, key: String, value: String },
    #[error("`{0}` must be at least 1 cycle")]
    ZeroCycles(&'static str),
    #[error("`{0}` must be a finite non-negative number")]
    Negative(&'static str),
    #[error("energy.freq_mhz must be positive")]
    Frequency,
}

impl TimingEnergyModel {
    pub fn cycles_for(&self, class: InstrClass) -> u32 {
        let c = &self.cycles;
        match class {
            InstrClass::Alu | InstrClass::System | InstrClass::Branch { taken: false } => c.base,
            InstrClass::Branch { taken: true } | InstrClass::Jump => c.base + c.taken_branch_penalty,
            InstrClass::Load => c.load,
            InstrClass::Store => c.store,
            InstrClass::Mul => c.mul,
            InstrClass::Div => c.div,
        }
    }

    pub fn unit_mw(&self, mode: PowerMode) -> f64 {
        let e = &self.energy;
        match mode {
            PowerMode::Baseline => e.mul_exact_mw,
            PowerMode::SsmExact => e.mul_ssm_exactmode_mw,
            PowerMode::SsmApprox => e.mul_ssm_approxmode_mw,
            PowerMode::DfmExact => e.mul_dfm_exactmode_mw,
            PowerMode::DfmApprox => e.mul_dfm_approxmode_mw,
        }
    }

    pub fn pj_per_cycle(&self, mode: PowerMode) -> f64 {
        1000.0 * self.unit_mw(mode) / self.energy.freq_mhz
    }

    pub fn instr_energy_pj(&self, cycles: u32, mode: PowerMode) -> f64 {
        self.energy.base_pj + cycles as f64 * self.pj_per_cycle(mode)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let c = &self.cycles;
        for (name, v) in [
            ("cycles.base", c.base),
            ("cycles.load", c.load),
            ("cycles.store", c.store),
            ("cycles.mul", c.mul),
            ("cycles.div", c.div),
        ] {
            if v == 0 {
                return Err(ModelError::ZeroCycles(name));
            }
        }
        let e = &self.energy;
        if !(e.freq_mhz.is_finite() && e.freq_mhz > 0.0) {
            return Err(ModelError::Frequency);
        }
        for (name, v) in [
            ("energy.base_pj", e.base_pj),
            ("energy.mul_exact_mw", e.mul_exact_mw),
            ("energy.mul_ssm_exactmode_mw", e.mul_ssm_exactmode_mw),
            ("energy.mul_ssm_approxmode_mw", e.mul_ssm_approxmode_mw),
            ("energy.mul_dfm_exactmode_mw", e.mul_dfm_exactmode_mw),
            ("energy.mul_dfm_approxmode_mw", e.mul_dfm_approxmode_mw),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(ModelError::Negative(name));
            }
        }
        Ok(())
    }

    /// Parses a flat `key = value` file. `#` starts a comment. Keys not
    /// present keep their default values.
    pub fn parse(text: &str) -> Result<Self, ModelError> {
        let mut m = TimingEnergyModel::default();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or(ModelError::Syntax { line: line_no })?;
            let (key, value) = (key.trim(), value.trim());
            let bad = || ModelError::BadValue { line: line_no, key: key.to_string(), value: value.to_string() };
            let int = || value.parse::<u32>().map_err(|_| bad());
            let float = || value.parse::<f64>().map_err(|_| bad());
            match key {
                "cycles.base" => m.cycles.base = int()?,
                "cycles.load" => m.cycles.load = int()?,
                "cycles.store" => m.cycles.store = int()?,
                "cycles.taken_branch_penalty" => m.cycles.taken_branch_penalty = int()?,
                "cycles.mul" => m.cycles.mul = int()?,
                "cycles.div" => m.cycles.div = int()?,
                "energy.freq_mhz" => m.energy.freq_mhz = float()?,
                "energy.base_pj" => m.energy.base_pj = float()?,
                "energy.mul_exact_mw" => m.energy.mul_exact_mw = float()?,
                "energy.mul_ssm_exactmode_mw" => m.energy.mul_ssm_exactmode_mw = float()?,
                "energy.mul_ssm_approxmode_mw" => m.energy.mul_ssm_approxmode_mw = float()?,
                "energy.mul_dfm_exactmode_mw" => m.energy.mul_dfm_exactmode_mw = float()?,
                "energy.mul_dfm_approxmode_mw" => m.energy.mul_dfm_approxmode_mw = float()?,
                other => return Err(ModelError::UnknownKey { line: line_no, key: other.to_string() }),
            }
        }
        m.validate()?;
        Ok(m)
    }

    pub fn to_config_string(&self) -> String {
        let c = &self.cycles;
        let e = &self.energy;
        let mut s = String::from("# timing/energy model (calibrated constants, not measurements)\n");
        let _ = writeln!(s, "cycles.base = {}", c.base);
        let _ = writeln!(s, "cycles.load = {}", c.load);
        let _ = writeln!(s, "cycles.store = {}", c.store);
        let _ = writeln!(s, "cycles.taken_branch_penalty = {}", c.taken_branch_penalty);
        let _ = writeln!(s, "cycles.mul = {}", c.mul);
        let _ = writeln!(s, "cycles.div = {}", c.div);
        let _ = writeln!(s, "energy.freq_mhz = {}", e.freq_mhz);
        let _ = writeln!(s, "energy.base_pj = {}", e.base_pj);
        let _ = writeln!(s, "energy.mul_exact_mw = {}", e.mul_exact_mw);
        let _ = writeln!(s, "energy.mul_ssm_exactmode_mw = {}", e.mul_ssm_exactmode_mw);
        let _ = writeln!(s, "energy.mul_ssm_approxmode_mw = {}", e.mul_ssm_approxmode_mw);
        let _ = writeln!(s, "energy.mul_dfm_exactmode_mw = {}", e.mul_dfm_exactmode_mw);
        let _ = writeln!(s, "energy.mul_dfm_approxmode_mw = {}", e.mul_dfm_approxmode_mw);
        s
    }
}
