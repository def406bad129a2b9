use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use qcsim::graph::{run_single, SingleOptions, DEFAULT_RANK_CAP};
use qcsim::noise::NoiseModel;
use qcsim::partition::{run_partial, PartialOptions, DEFAULT_BRANCH_BUDGET};
use qcsim::program::parse_program;
use qcsim::qfbe::{arctan_digits, parse_dyadic, reference_value, RefFunction};
use qcsim::report::{format_complex, format_pmeasure, format_probability, parse_bits, table_deviation, to_bits};
use qcsim::rqc::{generate_rqc, RqcConfig};
use qcsim::statevector::{run_full, write_dump, FullOptions, DEFAULT_CHUNK_LOG2, DEFAULT_MAX_QUBITS};
use qcsim::Error;

#[derive(Parser)]
#[command(name = "qcsim", version, about = "Quantum circuit simulator with full, partial and single amplitude modes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate an instruction script.
    Run(RunArgs),
    /// Write a seeded random grid circuit.
    Rqc(RqcArgs),
    /// Binary expansion of a function value.
    Qfbe(QfbeArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Full,
    Partial,
    Single,
}

#[derive(Args)]
struct RunArgs {
    /// Script file (.qprog).
    script: PathBuf,
    #[arg(long, value_enum, default_value = "full")]
    mode: Mode,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Seed of the MEASURE stream (noise draws use a separate stream of the same seed).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Partial mode: qubits below the cut form the lower block (default n/2).
    #[arg(long)]
    cut: Option<usize>,
    /// Partial mode: a file with one bitstring per line, or a comma-separated list.
    #[arg(long)]
    targets: Option<String>,
    /// Single mode: input basis state, qubit n-1 leftmost (default all zeros).
    #[arg(long)]
    in_bits: Option<String>,
    /// Single mode: output basis state, qubit n-1 leftmost.
    #[arg(long)]
    out_bits: Option<String>,
    /// Single mode: number of split vertices (default ceil(log2(workers))).
    #[arg(long)]
    split_n: Option<usize>,
    /// Full mode: kind:p[:GATE,GATE...]; repeatable.
    #[arg(long)]
    noise: Vec<String>,
    /// Result file (default stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Diagnostics file; errors and warnings are also echoed to stderr.
    #[arg(long)]
    log: Option<PathBuf>,
    /// Full mode: write the final state vector here.
    #[arg(long)]
    dump: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_MAX_QUBITS)]
    max_qubits: usize,
    #[arg(long, default_value_t = DEFAULT_CHUNK_LOG2)]
    chunk_log2: u32,
    #[arg(long, default_value_t = DEFAULT_RANK_CAP)]
    rank_cap: usize,
    #[arg(long, default_value_t = DEFAULT_BRANCH_BUDGET)]
    branch_budget: u64,
}

#[derive(Args)]
struct RqcArgs {
    #[arg(long)]
    rows: usize,
    #[arg(long)]
    cols: usize,
    #[arg(long)]
    depth: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct QfbeArgs {
    /// arctan, log2, ln, arccos, arcsin, arccot, exp2, exp, cos, sin, cot, tan
    /// (or the table names COS, ARCCOT, EXP, LOG, ...).
    function: String,
    /// Argument: decimal, or binary with a 0b prefix such as 0b.01.
    #[arg(allow_hyphen_values = true)]
    x: String,
    /// Fractional bits.
    #[arg(long)]
    bits: u32,
    /// Integer bits of a signed fixed-point result; omitting it for arctan
    /// runs the digit recurrence instead.
    #[arg(long)]
    int_bits: Option<u32>,
}

struct Log {
    file: Option<fs::File>,
}

impl Log {
    fn open(path: Option<&Path>) -> Result<Self, Error> {
        Ok(Self { file: path.map(fs::File::create).transpose()? })
    }

    fn line(&mut self, text: &str) {
        eprintln!("{text}");
        if let Some(f) = self.file.as_mut() {
            let _ = writeln!(f, "{text}");
        }
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Error> {
    match out {
        Some(path) => fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn bits_arg(text: &str, n: usize) -> Result<usize, Error> {
    parse_bits(text, n).ok_or_else(|| Error::Input(format!("`{text}` is not a {n}-character bitstring")))
}

fn read_targets(spec: &str, n: usize) -> Result<Vec<usize>, Error> {
    let text = if Path::new(spec).is_file() { fs::read_to_string(spec)? } else { spec.replace(',', "\n") };
    let targets: Vec<usize> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(|l| bits_arg(l, n))
        .collect::<Result<_, _>>()?;
    if targets.is_empty() {
        return Err(Error::Input("no target bitstrings given".into()));
    }
    Ok(targets)
}

fn run(args: &RunArgs, log: &mut Log) -> Result<String, Error> {
    let text = fs::read_to_string(&args.script)?;
    let program = parse_program(&text)?;
    let n = program.qubit_count;
    if !args.noise.is_empty() && args.mode != Mode::Full {
        return Err(Error::Input("noise is only available in full mode".into()));
    }
    match args.mode {
        Mode::Full => {
            let noise = if args.noise.is_empty() {
                None
            } else {
                let mut model = NoiseModel::new(args.seed);
                for spec in &args.noise {
                    model.add_spec(spec)?;
                }
                Some(model)
            };
            let options = FullOptions {
                workers: args.workers,
                chunk_log2: args.chunk_log2,
                max_qubits: args.max_qubits,
                seed: args.seed,
            };
            let result = run_full(&program, &options, noise.as_ref())?;
            let mut blocks = Vec::new();
            for table in &result.tables {
                let dev = table_deviation(table);
                if dev > 1e-9 {
                    log.line(&format!("warning: PMEASURE probabilities sum to 1{:+e}", dev));
                }
                blocks.push(format_pmeasure(table));
            }
            let mut out = blocks.join("\n");
            if program.has_measure() {
                if !out.is_empty() {
                    out.push('\n');
                }
                for (j, v) in result.cregs.iter().enumerate() {
                    out += &format!("${j}: {v}\n");
                }
            }
            if let Some(path) = &args.dump {
                write_dump(&result.state, std::io::BufWriter::new(fs::File::create(path)?))?;
            }
            Ok(out)
        }
        Mode::Partial => {
            let spec = args.targets.as_deref().ok_or_else(|| Error::Input("partial mode needs --targets".into()))?;
            let targets = read_targets(spec, n)?;
            let options = PartialOptions {
                cut: args.cut,
                workers: args.workers,
                branch_budget: args.branch_budget,
                max_qubits: args.max_qubits,
                chunk_log2: args.chunk_log2,
            };
            let amps = run_partial(&program, &options, &targets)?;
            Ok(targets
                .iter()
                .zip(amps)
                .map(|(&t, a)| format!("{}: {}\n", to_bits(t, n), format_complex(a)))
                .collect())
        }
        Mode::Single => {
            let out_bits = args.out_bits.as_deref().ok_or_else(|| Error::Input("single mode needs --out-bits".into()))?;
            let output = bits_arg(out_bits, n)?;
            let input = match &args.in_bits {
                Some(b) => bits_arg(b, n)?,
                None => 0,
            };
            let options = SingleOptions { split_n: args.split_n, workers: args.workers, rank_cap: args.rank_cap };
            let result = run_single(&program, input, output, &options)?;
            Ok(format!("amplitude: {}\n", format_complex(result.amplitude)))
        }
    }
}

fn rqc(args: &RqcArgs) -> Result<(), Error> {
    if args.depth == 0 || args.rows * args.cols < 2 {
        return Err(Error::Input("rqc needs depth >= 1 and at least two qubits".into()));
    }
    let program = generate_rqc(&RqcConfig::new(args.rows, args.cols, args.depth, args.seed));
    emit(args.out.as_deref(), &program.to_string())
}

fn qfbe(args: &QfbeArgs) -> Result<String, Error> {
    let x = parse_dyadic(&args.x)?;
    let function: RefFunction = args.function.parse()?;
    if function == RefFunction::Arctan && args.int_bits.is_none() {
        let trace = arctan_digits(x, args.bits as usize)?;
        return Ok(format!("bits: .{}\nvalue: {}\n", trace.digit_string(), format_probability(trace.value())));
    }
    let fixed = reference_value(function, x, args.int_bits.unwrap_or(1), args.bits)?;
    Ok(format!("bits: {fixed}\nvalue: {}\n", fixed.to_f64()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (result, mut log) = match &cli.command {
        Command::Run(args) => match Log::open(args.log.as_deref()) {
            Ok(mut log) => {
                let r = run(args, &mut log).and_then(|text| emit(args.out.as_deref(), &text));
                (r, log)
            }
            Err(e) => (Err(e), Log { file: None }),
        },
        Command::Rqc(args) => (rqc(args), Log { file: None }),
        Command::Qfbe(args) => (qfbe(args).map(|text| print!("{text}")), Log { file: None }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log.line(&e.render());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
