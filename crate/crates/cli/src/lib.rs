//! `axcli`: batch front end for the multiplier models, error sweeps, the
//! simulator and the benchmark suite.
//!
//! Every command writes a resolved-configuration header first: a `#` line
//! for text and CSV output, a `{"header": ...}` object for JSON lines.

use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use axmul::compressor::{truth_table, CompressorKind};
use axmul::error_lab::{sweep8_on, write_sweep_csv, PRNG_NAME};
use axmul::hier::{mul16, mul32u, HierConfig, MulCsr};
use axmul::mul8::{ErMap, ErMask, Mul8Kind, ReductionTree, TreeConfig};
use axmul::sim::elf::load_elf;
use axmul::sim::{ExitReason, Isa, MulUnit, RunReport, Simulator, TimingEnergyModel, DEFAULT_MEMORY_SIZE};
use axmul::workloads::{
    build_sim_program_for, quality, reference_output, InputSpec, QualityReport, Workload, RUN_BUDGET,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

#[derive(Debug, Parser)]
#[command(name = "axcli", version, about = "Reconfigurable approximate multiplier toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print compressor truth tables with error distances.
    Compressors(CompressorsArgs),
    /// Exhaustive 8-bit error sweep over all 256 Er values, as CSV.
    Sweep(SweepArgs),
    /// Run an ELF file or a built-in workload on the simulator.
    Run(RunArgs),
    /// Run every workload under exact, SSM exact-mode and SSM approximate-mode.
    Bench(BenchArgs),
    /// Multiply two operands on a configured multiplier.
    Mul(MulArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CompressorSel {
    All,
    Exact,
    Dfc,
    Ssc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Dfm,
    Ssm,
}

impl KindArg {
    fn kind(self) -> Mul8Kind {
        match self {
            KindArg::Dfm => Mul8Kind::Dfm,
            KindArg::Ssm => Mul8Kind::Ssm,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum UnitArg {
    Exact,
    Dfm,
    Ssm,
}

impl UnitArg {
    fn unit(self) -> MulUnit {
        match self {
            UnitArg::Exact => MulUnit::Baseline,
            UnitArg::Dfm => MulUnit::Reconfigurable(Mul8Kind::Dfm),
            UnitArg::Ssm => MulUnit::Reconfigurable(Mul8Kind::Ssm),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ErMapArg {
    Ascending,
    Descending,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum IsaArg {
    Rv32im,
    Rv32em,
}

impl IsaArg {
    fn isa(self) -> Isa {
        match self {
            IsaArg::Rv32im => Isa::Rv32i,
            IsaArg::Rv32em => Isa::Rv32e,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Default,
}

#[derive(Debug, Args)]
pub struct CompressorsArgs {
    #[arg(long, value_enum, default_value = "all")]
    pub kind: CompressorSel,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub kind: KindArg,
    #[arg(long)]
    pub out: PathBuf,
    /// Mapping from Er bits to reconfigurable columns.
    #[arg(long, value_enum, default_value = "ascending")]
    pub ermap: ErMapArg,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long, conflicts_with = "workload", required_unless_present = "workload")]
    pub elf: Option<PathBuf>,
    #[arg(long)]
    pub workload: Option<String>,
    /// Value written to CSR 0x801: by the workload prologue, or before reset
    /// for an ELF.
    #[arg(long, default_value = "0x0", value_parser = parse_u32)]
    pub mulcsr: u32,
    #[arg(long, value_enum, default_value = "rv32im")]
    pub isa: IsaArg,
    /// Timing/energy model in `key = value` form.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Multiplier behind the M-extension instructions.
    #[arg(long, value_enum, default_value = "ssm")]
    pub unit: UnitArg,
    /// Seed for workload input data.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = RUN_BUDGET)]
    pub max_instructions: u64,
    /// Write workload outputs as CSV (`index,exact,approx`).
    #[arg(long)]
    pub outputs: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, value_enum, default_value = "default")]
    pub suite: Suite,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub model: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MulArgs {
    #[arg(long, value_parser = parse_u32)]
    pub a: u32,
    #[arg(long, value_parser = parse_u32)]
    pub b: u32,
    /// Operand width: 8, 16 or 32.
    #[arg(long, default_value_t = 8)]
    pub width: u32,
    #[arg(long, value_enum, default_value = "ssm")]
    pub kind: KindArg,
    /// Er mask for 8-bit multiplies.
    #[arg(long, default_value = "0x00", value_parser = parse_u32)]
    pub er: u32,
    /// Control word for 16/32-bit multiplies.
    #[arg(long, default_value = "0x1", value_parser = parse_u32)]
    pub mulcsr: u32,
}

fn parse_u32(s: &str) -> Result<u32, String> {
    let t = s.trim();
    let r = match t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")) {
        Some(h) => u32::from_str_radix(&h.replace('_', ""), 16),
        None => t.replace('_', "").parse::<u32>(),
    };
    r.map_err(|e| format!("`{s}` is not a 32-bit value: {e}"))
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Input(String),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Input(_) => 3,
            CliError::Runtime(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Input(m) => write!(f, "input error: {m}"),
            CliError::Runtime(m) => write!(f, "runtime error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

fn io_err(path: &Path) -> impl Fn(io::Error) -> CliError + '_ {
    move |e| CliError::Input(format!("{}: {e}", path.display()))
}

fn out_err(e: io::Error) -> CliError {
    CliError::Runtime(format!("writing output: {e}"))
}

fn json_line(out: &mut dyn Write, v: &impl Serialize) -> Result<(), CliError> {
    let s = serde_json::to_string(v).map_err(|e| CliError::Runtime(e.to_string()))?;
    writeln!(out, "{s}").map_err(out_err)
}

fn load_model(path: Option<&Path>) -> Result<TimingEnergyModel, CliError> {
    match path {
        None => Ok(TimingEnergyModel::default()),
        Some(p) => {
            let text = fs::read_to_string(p).map_err(io_err(p))?;
            TimingEnergyModel::parse(&text).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))
        }
    }
}

pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match &cli.command {
        Command::Compressors(a) => cmd_compressors(a, out),
        Command::Sweep(a) => cmd_sweep(a, out),
        Command::Run(a) => cmd_run(a, out),
        Command::Bench(a) => cmd_bench(a, out),
        Command::Mul(a) => cmd_mul(a, out),
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_with_args<I, T>(args: I, out: &mut dyn Write) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| CliError::Usage(e.to_string()))?;
    execute(&cli, out)
}

pub fn cmd_compressors(args: &CompressorsArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let kinds: Vec<CompressorKind> = match args.kind {
        CompressorSel::All => CompressorKind::ALL.to_vec(),
        CompressorSel::Exact => vec![CompressorKind::Exact],
        CompressorSel::Dfc => vec![CompressorKind::Dfc],
        CompressorSel::Ssc => vec![CompressorKind::Ssc],
    };
    let w = |r: io::Result<()>| r.map_err(out_err);
    w(writeln!(out, "# axcli compressors kind={:?}", args.kind).map(|_| ()))?;
    for kind in kinds {
        let approx = truth_table(kind, 0);
        let exact = truth_table(kind, 1);
        let bad0 = approx.iter().filter(|r| r.ed != 0).count();
        let bad1 = exact.iter().filter(|r| r.ed != 0).count();
        w(writeln!(out, "## kind={kind} rows=32 erroneous_er0={bad0} erroneous_er1={bad1}"))?;
        w(writeln!(out, "x1 x2 x3 x4 cin | cout carry sum  ed | er=1: cout carry sum  ed"))?;
        for (r0, r1) in approx.iter().zip(&exact) {
            let i = r0.inputs;
            let (o, e) = (r0.outputs, r1.outputs);
            w(writeln!(
                out,
                " {}  {}  {}  {}   {} |    {}     {}   {} {:>+3} |          {}     {}   {} {:>+3}",
                i.x1, i.x2, i.x3, i.x4, i.cin, o.cout, o.carry, o.sum, r0.ed, e.cout, e.carry, e.sum, r1.ed
            ))?;
        }
    }
    Ok(())
}

pub fn cmd_sweep(args: &SweepArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let kind = args.kind.kind();
    let ermap = match args.ermap {
        ErMapArg::Ascending => ErMap::Ascending,
        ErMapArg::Descending => ErMap::Descending,
    };
    let config = TreeConfig { ermap };
    writeln!(out, "# axcli sweep kind={kind} ermap={} out={}", ermap.name(), args.out.display()).map_err(out_err)?;
    let tree = ReductionTree::new(config);
    let rows = sweep8_on(&tree, kind);
    let mut buf = Vec::new();
    write_sweep_csv(&mut buf, kind, config, &rows).map_err(out_err)?;
    fs::write(&args.out, &buf).map_err(|e| CliError::Input(format!("{}: {e}", args.out.display())))?;
    let worst = rows.iter().enumerate().max_by(|a, b| a.1.mred.total_cmp(&b.1.mred)).map(|(er, s)| (er, s.mred)).unwrap();
    writeln!(
        out,
        "# rows={} er0_er_rate={:.6} er0_mred={:.6} max_mred_er={} max_mred={:.6}",
        rows.len(),
        rows[0].er_rate,
        rows[0].mred,
        worst.0,
        worst.1
    )
    .map_err(out_err)?;
    for line in tree.describe().lines() {
        writeln!(out, "# {line}").map_err(out_err)?;
    }
    Ok(())
}

fn write_outputs_csv(path: &Path, exact: &[i32], approx: &[i32]) -> Result<(), CliError> {
    let mut s = String::from("index,exact,approx\n");
    for (i, (e, a)) in exact.iter().zip(approx).enumerate() {
        s.push_str(&format!("{i},{e},{a}\n"));
    }
    fs::write(path, s).map_err(io_err(path))
}

fn check_report(r: &RunReport) -> Result<(), CliError> {
    match r.exit_reason {
        ExitReason::Fault => Err(CliError::Runtime(r.diagnostic.clone().unwrap_or_default())),
        ExitReason::BudgetExhausted => Err(CliError::Runtime(format!("instruction budget of {} exhausted", r.instret))),
        _ => Ok(()),
    }
}

pub fn cmd_run(args: &RunArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let model = load_model(args.model.as_deref())?;
    let unit = args.unit.unit();
    let isa = args.isa.isa();
    let source = match (&args.elf, &args.workload) {
        (Some(p), _) => p.display().to_string(),
        (None, Some(w)) => w.clone(),
        (None, None) => return Err(CliError::Usage("one of --elf or --workload is required".into())),
    };
    json_line(
        out,
        &json!({"header": {
            "command": "run",
            "source": source,
            "unit": unit.name(),
            "mulcsr": format!("0x{:08X}", args.mulcsr),
            "isa": format!("{:?}", args.isa).to_lowercase(),
            "model": args.model.as_ref().map(|p| p.display().to_string()).unwrap_or_else(|| "default".into()),
            "seed": args.seed,
            "prng": PRNG_NAME,
            "max_instructions": args.max_instructions,
        }}),
    )?;

    if let Some(path) = &args.elf {
        let bytes = fs::read(path).map_err(io_err(path))?;
        let (mem, entry) =
            load_elf(&bytes, DEFAULT_MEMORY_SIZE).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        let mut sim = Simulator::new(mem, entry, unit, model).with_isa(isa);
        sim.state.mulcsr = args.mulcsr;
        let report = sim.run(args.max_instructions);
        json_line(out, &report)?;
        return check_report(&report);
    }

    let workload = Workload::parse(args.workload.as_deref().unwrap_or_default()).map_err(|e| {
        let names: Vec<&str> = Workload::ALL.iter().map(|w| w.name()).collect();
        CliError::Input(format!("{e} (known: {})", names.join(", ")))
    })?;
    let input = InputSpec::Seeded(args.seed);
    let prog = build_sim_program_for(workload, &input, args.mulcsr, isa).map_err(|e| CliError::Runtime(e.to_string()))?;
    let mut sim = prog.simulator(unit, model, isa);
    let report = sim.run(args.max_instructions);
    let outputs = prog.read_results(&sim.mem);
    let data = input.resolve(workload).map_err(|e| CliError::Runtime(e.to_string()))?;
    let exact = reference_output(&data);
    let q = quality(workload, axmul::workloads::config_label(unit, args.mulcsr), &exact, &outputs);
    json_line(out, &report)?;
    json_line(out, &q)?;
    if let Some(p) = &args.outputs {
        write_outputs_csv(p, &exact, &outputs)?;
    }
    check_report(&report)
}

/// One bench configuration.
#[derive(Debug, Clone, Copy)]
pub struct BenchConfig {
    pub name: &'static str,
    pub unit: MulUnit,
    pub mulcsr: u32,
}

pub const BENCH_CONFIGS: [BenchConfig; 3] = [
    BenchConfig { name: "exact", unit: MulUnit::Baseline, mulcsr: MulCsr::EXACT },
    BenchConfig { name: "ssm-e", unit: MulUnit::Reconfigurable(Mul8Kind::Ssm), mulcsr: MulCsr::EXACT },
    BenchConfig { name: "ssm-a", unit: MulUnit::Reconfigurable(Mul8Kind::Ssm), mulcsr: MulCsr::MAX_APPROX },
];

#[derive(Debug, Clone, Serialize)]
pub struct BenchRecord {
    pub workload: String,
    pub config: String,
    pub mulcsr: String,
    pub run: RunReport,
    pub quality: QualityReport,
}

pub fn bench_records(seed: u64, model: TimingEnergyModel) -> Result<Vec<BenchRecord>, CliError> {
    let mut records = Vec::new();
    let input = InputSpec::Seeded(seed);
    for w in Workload::ALL {
        let data = input.resolve(w).map_err(|e| CliError::Runtime(e.to_string()))?;
        let exact = reference_output(&data);
        for c in BENCH_CONFIGS {
            let prog = build_sim_program_for(w, &input, c.mulcsr, Isa::Rv32i).map_err(|e| CliError::Runtime(e.to_string()))?;
            let outcome = prog.run(c.unit, model, Isa::Rv32i);
            check_report(&outcome.report)?;
            let q = quality(w, axmul::workloads::config_label(c.unit, c.mulcsr), &exact, &outcome.outputs);
            records.push(BenchRecord {
                workload: w.name().to_string(),
                config: c.name.to_string(),
                mulcsr: format!("0x{:08X}", c.mulcsr),
                run: outcome.report,
                quality: q,
            });
        }
    }
    Ok(records)
}

pub fn cmd_bench(args: &BenchArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let model = load_model(args.model.as_deref())?;
    json_line(
        out,
        &json!({"header": {
            "command": "bench",
            "suite": "default",
            "out": args.out.display().to_string(),
            "seed": args.seed,
            "prng": PRNG_NAME,
            "model": args.model.as_ref().map(|p| p.display().to_string()).unwrap_or_else(|| "default".into()),
            "configs": BENCH_CONFIGS.iter().map(|c| c.name).collect::<Vec<_>>(),
        }}),
    )?;
    fs::create_dir_all(&args.out).map_err(io_err(&args.out))?;
    let records = bench_records(args.seed, model)?;

    let mut csv = String::from("workload,config,mulcsr,instret,cycle,cpi,energy_pj,pj_per_instr,mul_count,mulh_count,mse,max_rel_err\n");
    for w in Workload::ALL {
        let mut lines = String::new();
        for r in records.iter().filter(|r| r.workload == w.name()) {
            lines.push_str(&serde_json::to_string(r).map_err(|e| CliError::Runtime(e.to_string()))?);
            lines.push('\n');
            csv.push_str(&format!(
                "{},{},{},{},{},{:.6},{:.6},{:.6},{},{},{:.6},{:.6}\n",
                r.workload,
                r.config,
                r.mulcsr,
                r.run.instret,
                r.run.cycle,
                r.run.cpi,
                r.run.energy_pj,
                r.run.pj_per_instr,
                r.run.mul_count,
                r.run.mulh_count,
                r.quality.mse,
                r.quality.max_rel_err
            ));
        }
        let path = args.out.join(format!("{}.jsonl", w.name()));
        fs::write(&path, lines).map_err(io_err(&path))?;
    }
    let path = args.out.join("summary.csv");
    fs::write(&path, &csv).map_err(io_err(&path))?;

    writeln!(out, "# {:<10} {:>6} {:>8} {:>6} {:>8} {:>8} {:>8}", "workload", "config", "instret", "cpi", "pJ/inst", "mul", "mse")
        .map_err(out_err)?;
    for r in &records {
        writeln!(
            out,
            "# {:<10} {:>6} {:>8} {:>6.3} {:>8.3} {:>8} {:>8.1}",
            r.workload, r.config, r.run.instret, r.run.cpi, r.run.pj_per_instr, r.run.mul_count, r.quality.mse
        )
        .map_err(out_err)?;
    }
    Ok(())
}

pub fn cmd_mul(args: &MulArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let kind = args.kind.kind();
    if ![8, 16, 32].contains(&args.width) {
        return Err(CliError::Usage(format!("--width must be 8, 16 or 32, not {}", args.width)));
    }
    let mask = |v: u32| if args.width == 32 { v } else { v & ((1 << args.width) - 1) };
    let (a, b) = (mask(args.a), mask(args.b));
    if (a, b) != (args.a, args.b) {
        return Err(CliError::Input(format!("operands must fit in {} bits", args.width)));
    }
    let exact = a as u128 * b as u128;
    let (approx, config) = match args.width {
        8 => {
            let er = u8::try_from(args.er).map_err(|_| CliError::Input("--er must fit in 8 bits".into()))?;
            (axmul::mul8::mul8(a as u8, b as u8, kind, ErMask(er)) as u128, format!("{kind}:er={}", ErMask(er)))
        }
        w => {
            let csr = MulCsr::decode(args.mulcsr);
            let cfg = HierConfig::from_csr(kind, &csr);
            let p = if w == 16 { mul16(a as u16, b as u16, &cfg) as u128 } else { mul32u(a, b, &cfg) };
            (p, format!("{} {csr}", cfg.id()))
        }
    };
    json_line(
        out,
        &json!({"header": {"command": "mul", "width": args.width, "kind": kind.name(), "config": config}}),
    )?;
    json_line(
        out,
        &json!({"a": a, "b": b, "exact": exact.to_string(), "approx": approx.to_string(),
                "ed": (approx as i128 - exact as i128).to_string()}),
    )
}
