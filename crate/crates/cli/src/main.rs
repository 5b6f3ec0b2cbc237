//! Command-line front end: assembler, disassembler, instruction-set
//! simulator, and accuracy benchmarks.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use xposit::asm::{assemble, disassemble, words_from_le_bytes, words_to_le_bytes};
use xposit::bench::{
    gen_tensor, maxpool_f64, maxpool_posit, run as run_bench, to_csv, BenchConfig,
    BenchTarget, GemmFormat, MseRow, PoolLayer, POOL_LAYERS,
};
use xposit::sim::{Halt, Machine};
use xposit::Posit32;

#[derive(Parser)]
#[command(
    name = "xposit",
    version,
    about = "Posit arithmetic toolkit: Xposit assembler, simulator, and accuracy benchmarks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Assemble Xposit text into a little-endian binary
    Asm {
        /// Input assembly file
        input: PathBuf,
        /// Output binary path
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Disassemble a little-endian binary to canonical text
    Disasm {
        /// Input binary file
        input: PathBuf,
        /// Also accept the 01 format field seen in published listings
        #[arg(long)]
        fmt_lenient: bool,
    },
    /// Execute a straight-line program on the simulator
    Run(RunArgs),
    /// Accuracy benchmarks with CSV output
    Bench {
        #[command(subcommand)]
        bench: BenchCommand,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Program binary (little-endian 32-bit words)
    program: PathBuf,
    /// File whose bytes initialize data memory at address 0
    #[arg(long)]
    mem_init: Option<PathBuf>,
    /// Data memory size in bytes
    #[arg(long, default_value_t = 65536)]
    mem_size: usize,
    /// Print nonzero registers and the quire after the run
    #[arg(long)]
    dump_regs: bool,
    /// Write the execution trace as JSON lines
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Step budget
    #[arg(long, default_value_t = 1_000_000)]
    max_steps: usize,
    /// Also accept the 01 format field seen in published listings
    #[arg(long)]
    fmt_lenient: bool,
}

#[derive(Subcommand)]
enum BenchCommand {
    /// Matrix multiplication accuracy across arithmetic formats
    Gemm(GemmArgs),
    /// Max-pooling layers, posit versus f64
    Maxpool(MaxpoolArgs),
}

#[derive(Args)]
struct GemmArgs {
    /// Square matrix dims, comma separated
    #[arg(long, default_value = "16,32,64,128,256", value_delimiter = ',')]
    sizes: Vec<usize>,
    /// Range exponents: inputs are uniform on [-10^i, 10^i]; "a..b" inclusive or comma list
    #[arg(long, default_value = "-1..3", allow_hyphen_values = true)]
    ranges: String,
    /// Number of seeds per cell
    #[arg(long, default_value_t = 10)]
    seeds: u64,
    /// "all" or a comma list of posit32_quire, posit32_noquire, f32_fused, f32_nofused, f64
    #[arg(long, default_value = "all")]
    formats: String,
    /// Write the report here instead of stdout
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Offset added to every seed
    #[arg(long, default_value_t = 0)]
    seed_base: u64,
    /// Exit nonzero if quire dominance or fused/unfused closeness fails
    #[arg(long)]
    check: bool,
}

#[derive(Args)]
struct MaxpoolArgs {
    /// "all" or one of lenet5, alexnet, resnet50
    #[arg(long, default_value = "all")]
    layer: String,
    /// Range exponents: "a..b" inclusive or comma list
    #[arg(long, default_value = "1", allow_hyphen_values = true)]
    ranges: String,
    /// Number of seeds per cell
    #[arg(long, default_value_t = 3)]
    seeds: u64,
    /// Write the report here instead of stdout
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Offset added to every seed
    #[arg(long, default_value_t = 0)]
    seed_base: u64,
    /// Exit nonzero if posit pooling differs from monotone-converted f64 pooling
    #[arg(long)]
    check: bool,
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Asm { input, output } => cmd_asm(&input, &output),
        Command::Disasm { input, fmt_lenient } => cmd_disasm(&input, fmt_lenient),
        Command::Run(args) => cmd_run(&args),
        Command::Bench { bench: BenchCommand::Gemm(args) } => cmd_bench_gemm(&args),
        Command::Bench { bench: BenchCommand::Maxpool(args) } => cmd_bench_maxpool(&args),
    }
}

fn cmd_asm(input: &Path, output: &Path) -> Result<()> {
    let text = fs::read_to_string(input)
        .with_context(|| format!("reading {}", input.display()))?;
    let words = assemble(&text).map_err(|e| anyhow!("{}: {e}", input.display()))?;
    fs::write(output, words_to_le_bytes(&words))
        .with_context(|| format!("writing {}", output.display()))?;
    println!("assembled {} instructions to {}", words.len(), output.display());
    Ok(())
}

fn cmd_disasm(input: &Path, fmt_lenient: bool) -> Result<()> {
    let bytes = fs::read(input).with_context(|| format!("reading {}", input.display()))?;
    let words =
        words_from_le_bytes(&bytes).map_err(|e| anyhow!("{}: {e}", input.display()))?;
    let out = disassemble(&words, fmt_lenient);
    print!("{}", out.text);
    for warning in &out.warnings {
        eprintln!("warning: {warning}");
    }
    Ok(())
}

fn cmd_run(args: &RunArgs) -> Result<()> {
    let bytes = fs::read(&args.program)
        .with_context(|| format!("reading {}", args.program.display()))?;
    let program =
        words_from_le_bytes(&bytes).map_err(|e| anyhow!("{}: {e}", args.program.display()))?;

    let mut machine = Machine::new(args.mem_size);
    machine.set_fmt_lenient(args.fmt_lenient);
    if let Some(init) = &args.mem_init {
        let image = fs::read(init).with_context(|| format!("reading {}", init.display()))?;
        if !machine.write_mem(0, &image) {
            bail!(
                "memory image {} is {} bytes but --mem-size is {}",
                init.display(),
                image.len(),
                args.mem_size
            );
        }
    }

    let (halt, trace) = machine.run(&program, args.max_steps);

    if let Some(path) = &args.trace {
        let mut file = fs::File::create(path)
            .with_context(|| format!("creating {}", path.display()))?;
        for entry in &trace {
            writeln!(file, "{}", serde_json::to_string(entry)?)?;
        }
    }

    println!("executed {} instructions", trace.len());
    if args.dump_regs {
        dump_regs(&machine);
    }
    match halt {
        Halt::Done => {
            println!("halt: done");
            Ok(())
        }
        Halt::MaxSteps => {
            println!("halt: step budget {} exhausted", args.max_steps);
            Ok(())
        }
        Halt::Fault(fault) => bail!("{fault}"),
    }
}

fn dump_regs(machine: &Machine) {
    println!("pc = {}", machine.pc());
    for index in 0..32u8 {
        let value = machine.xreg(index);
        if value != 0 {
            println!("x{index} = {value:#018x}");
        }
    }
    for index in 0..32u8 {
        let p = machine.preg(index);
        if !p.is_zero() {
            println!("p{index} = {:#010x} ({p})", p.to_bits());
        }
    }
    println!("quire = {}", machine.quire().to_hex());
}

fn parse_ranges(spec: &str) -> Result<Vec<i32>> {
    if let Some((lo, hi)) = spec.split_once("..") {
        let lo: i32 = lo.trim().parse().with_context(|| format!("range start {lo:?}"))?;
        let hi: i32 = hi.trim().parse().with_context(|| format!("range end {hi:?}"))?;
        if lo > hi {
            bail!("empty range {spec:?}");
        }
        return Ok((lo..=hi).collect());
    }
    spec.split(',')
        .map(|s| s.trim().parse::<i32>().with_context(|| format!("range exponent {s:?}")))
        .collect()
}

fn parse_formats(spec: &str) -> Result<Vec<GemmFormat>> {
    if spec == "all" {
        return Ok(GemmFormat::ALL.to_vec());
    }
    spec.split(',')
        .map(|s| {
            let s = s.trim();
            GemmFormat::from_name(s).ok_or_else(|| anyhow!("unknown format {s:?}"))
        })
        .collect()
}

fn parse_layers(spec: &str) -> Result<Vec<PoolLayer>> {
    if spec == "all" {
        return Ok(POOL_LAYERS.to_vec());
    }
    spec.split(',')
        .map(|s| {
            let s = s.trim();
            PoolLayer::from_name(s).ok_or_else(|| anyhow!("unknown layer {s:?}"))
        })
        .collect()
}

fn emit_csv(rows: &[MseRow], path: Option<&PathBuf>) -> Result<()> {
    let csv = to_csv(rows);
    match path {
        Some(path) => {
            fs::write(path, csv).with_context(|| format!("writing {}", path.display()))?;
            println!("wrote {} rows to {}", rows.len(), path.display());
        }
        None => print!("{csv}"),
    }
    Ok(())
}

fn cmd_bench_gemm(args: &GemmArgs) -> Result<()> {
    let formats = parse_formats(&args.formats)?;
    let config = BenchConfig {
        target: BenchTarget::Gemm { sizes: args.sizes.clone(), formats },
        range_exps: parse_ranges(&args.ranges)?,
        seeds: (0..args.seeds).map(|s| args.seed_base + s).collect(),
    };
    let rows = run_bench(&config);
    emit_csv(&rows, args.csv.as_ref())?;

    if args.check {
        let mut cells: BTreeMap<(String, i32, u64), BTreeMap<String, f64>> = BTreeMap::new();
        for row in &rows {
            cells
                .entry((row.size_or_shape.clone(), row.range_exp, row.seed))
                .or_default()
                .insert(row.format.clone(), row.mse);
        }
        let mut violations = 0u32;
        for ((size, range_exp, seed), mses) in &cells {
            if let (Some(&quire), Some(&noquire)) =
                (mses.get("posit32_quire"), mses.get("posit32_noquire"))
            {
                if quire >= noquire {
                    eprintln!(
                        "check failed: n={size} range_exp={range_exp} seed={seed}: \
                         posit32_quire {quire:e} >= posit32_noquire {noquire:e}"
                    );
                    violations += 1;
                }
            }
            if let (Some(&fused), Some(&nofused)) =
                (mses.get("f32_fused"), mses.get("f32_nofused"))
            {
                let ratio = fused / nofused;
                if !(0.1..=10.0).contains(&ratio) {
                    eprintln!(
                        "check failed: n={size} range_exp={range_exp} seed={seed}: \
                         f32 fused/nofused ratio {ratio:e}"
                    );
                    violations += 1;
                }
            }
        }
        if violations > 0 {
            bail!("{violations} invariant violations");
        }
        println!("check passed over {} cells", cells.len());
    }
    Ok(())
}

fn cmd_bench_maxpool(args: &MaxpoolArgs) -> Result<()> {
    let layers = parse_layers(&args.layer)?;
    let range_exps = parse_ranges(&args.ranges)?;
    let seeds: Vec<u64> = (0..args.seeds).map(|s| args.seed_base + s).collect();
    let config = BenchConfig {
        target: BenchTarget::Maxpool { layers: layers.clone() },
        range_exps: range_exps.clone(),
        seeds: seeds.clone(),
    };
    let rows = run_bench(&config);
    emit_csv(&rows, args.csv.as_ref())?;

    if args.check {
        let mut violations = 0u32;
        for &layer in &layers {
            for &range_exp in &range_exps {
                for &seed in &seeds {
                    let input = gen_tensor(layer, range_exp, seed);
                    let pin: Vec<Posit32> =
                        input.iter().map(|&x| Posit32::from_f64(x)).collect();
                    let via_f64: Vec<Posit32> = maxpool_f64(&input, layer)
                        .iter()
                        .map(|&x| Posit32::from_f64(x))
                        .collect();
                    if maxpool_posit(&pin, layer) != via_f64 {
                        eprintln!(
                            "check failed: layer={} range_exp={range_exp} seed={seed}: \
                             posit pooling differs from converted f64 pooling",
                            layer.name
                        );
                        violations += 1;
                    }
                }
            }
        }
        if violations > 0 {
            bail!("{violations} invariant violations");
        }
        println!("check passed over {} cells", layers.len() * range_exps.len() * seeds.len());
    }
    Ok(())
}
