//! `costcode` command-line front-end.
//!
//! Every library operation is exposed by exactly one subcommand; see
//! [`COMMAND_TABLE`]. Inputs are JSON documents for sources and cost models,
//! outputs are JSON on stdout or CSV (stdout or `--out`). Exit codes: 0 on
//! success, 2 for configuration errors, 3 for numeric failures, with a JSON
//! error object on stderr.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use costcode::analysis::{
    first_order_threshold, fl_to_vl, lemma_bounds, second_order_threshold, vl_to_fl, FixedLengthCode,
    LemmaMethod, ThresholdResult,
};
use costcode::codec::{
    build_exact_code_with, cost_bound_report, decode, encode, kraft_sum, overflow, BuildOptions, OverflowMethod,
    OverflowQuery, OverflowTarget, PrefixCode, ThresholdFamily, DEFAULT_PRECISION_BITS, MAX_PRECISION_BITS,
};
use costcode::cost_model::{symbol_measure, validate_conditional_model, CostModel, DEFAULT_CONTEXT_DEPTH};
use costcode::io::{
    cost_model_from_json, format_symbols, parse_symbols, source_from_json, write_code_csv, write_curve_csv,
    write_overflow_csv,
};
use costcode::sources::{
    entropy, enumerate_support, log_prob, sample_self_info, varentropy, IidSource, SequenceDist, Source,
    DEFAULT_SUPPORT_CAP,
};
use costcode::spectrum::{
    first_order_spectrum, gaussian_cdf, gaussian_quantile, second_order_spectrum, strong_converse_diagnostic,
    SpectrumMethod, SpectrumQuery, DEFAULT_LATTICE_STEP,
};

/// Environment variable holding the default fixed-point precision in bits.
pub const PRECISION_ENV: &str = "COSTCODE_PRECISION_BITS";

/// Library operation and the subcommand exposing it.
pub const COMMAND_TABLE: &[(&str, &str)] = &[
    ("solve_cost_capacity", "capacity"),
    ("symbol_measure", "capacity"),
    ("validate_conditional_model", "capacity"),
    ("log_prob", "source logprob"),
    ("entropy", "source info"),
    ("varentropy", "source info"),
    ("sample_self_info", "source sample"),
    ("enumerate_support", "source enumerate"),
    ("gaussian_cdf", "gaussian cdf"),
    ("gaussian_quantile", "gaussian quantile"),
    ("first_order_spectrum", "spectrum first"),
    ("second_order_spectrum", "spectrum second"),
    ("strong_converse_diagnostic", "diagnose strong-converse"),
    ("build_exact_code", "code build"),
    ("encode", "code encode"),
    ("decode", "code decode"),
    ("kraft_sum", "code kraft"),
    ("overflow", "overflow"),
    ("first_order_threshold", "threshold first"),
    ("second_order_threshold", "threshold second"),
    ("vl_to_fl", "equiv vl2fl"),
    ("fl_to_vl", "equiv fl2vl"),
    ("lemma_bounds", "lemma-bounds"),
];

#[derive(Parser, Debug)]
#[command(name = "costcode", version, about = "Overflow probability of variable-length codes with unequal symbol costs")]
pub struct Cli {
    /// Report information quantities in this logarithm base instead of K.
    #[arg(long, global = true)]
    log_base: Option<f64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Cost capacity and symbol measure of a cost model.
    Capacity(ModelArgs),
    /// Build, use and check the interval code.
    #[command(subcommand)]
    Code(CodeCmd),
    /// Overflow probability of the interval code.
    Overflow(OverflowArgs),
    /// Information-spectrum tail curves.
    #[command(subcommand)]
    Spectrum(SpectrumCmd),
    /// Optimal first- and second-order overflow thresholds.
    #[command(subcommand)]
    Threshold(ThresholdCmd),
    /// Variable-length and fixed-length code transformations.
    #[command(subcommand)]
    Equiv(EquivCmd),
    /// Information-spectrum bounds on overflow.
    LemmaBounds(LemmaArgs),
    /// Empirical strong-converse check.
    #[command(subcommand)]
    Diagnose(DiagnoseCmd),
    /// Source statistics, sampling and enumeration.
    #[command(subcommand)]
    Source(SourceCmd),
    /// Standard normal CDF and quantile.
    #[command(subcommand)]
    Gaussian(GaussianCmd),
}

#[derive(Args, Debug)]
struct ModelArgs {
    /// Cost model JSON; unit costs over the source alphabet when omitted.
    #[arg(long)]
    costs: Option<PathBuf>,
    /// Longest context used by conditional cost tables.
    #[arg(long, default_value_t = DEFAULT_CONTEXT_DEPTH)]
    context_depth: usize,
}

#[derive(Args, Debug)]
struct Problem {
    /// Source JSON.
    #[arg(long)]
    source: PathBuf,
    #[command(flatten)]
    model: ModelArgs,
}

#[derive(Args, Debug)]
struct Block {
    #[command(flatten)]
    problem: Problem,
    /// Blocklength.
    #[arg(long)]
    n: usize,
}

#[derive(Args, Debug)]
struct Sampling {
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
struct BuildArgs {
    #[command(flatten)]
    block: Block,
    /// Fixed-point precision; defaults to $COSTCODE_PRECISION_BITS or 192.
    #[arg(long)]
    precision_bits: Option<u32>,
    /// Give up with exit code 3 beyond this precision.
    #[arg(long, default_value_t = MAX_PRECISION_BITS)]
    max_precision_bits: u32,
}

#[derive(Subcommand, Debug)]
enum CodeCmd {
    /// Build the interval code and write its table as CSV.
    Build {
        #[command(flatten)]
        build: BuildArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    Encode {
        #[command(flatten)]
        build: BuildArgs,
        /// Source sequence, e.g. 0110.
        #[arg(long)]
        sequence: String,
    },
    Decode {
        #[command(flatten)]
        build: BuildArgs,
        /// Code string, e.g. 0110.
        #[arg(long)]
        codeword: String,
    },
    /// Cost Kraft sum and per-sequence cost bound check.
    Kraft {
        #[command(flatten)]
        build: BuildArgs,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Method {
    Exact,
    Dp,
    Mc,
    SurrogateMc,
}

#[derive(Args, Debug)]
struct OverflowArgs {
    #[command(flatten)]
    build: BuildArgs,
    /// First-order rates R (grid), threshold nR.
    #[arg(long, conflicts_with_all = ["eta", "center"])]
    rate: Option<String>,
    /// Second-order center a, threshold na + L sqrt(n).
    #[arg(long, requires = "offset", conflicts_with = "eta")]
    center: Option<f64>,
    /// Second-order offsets L (grid).
    #[arg(long, requires = "center")]
    offset: Option<String>,
    /// Raw thresholds (grid).
    #[arg(long)]
    eta: Option<String>,
    /// exact, mc or surrogate-mc; mc when --samples is given, else exact.
    #[arg(long)]
    method: Option<Method>,
    #[command(flatten)]
    sampling: Sampling,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CurveArgs {
    #[command(flatten)]
    block: Block,
    /// Grid as start:stop:step or a comma list.
    #[arg(long)]
    grid: Option<String>,
    /// exact, dp or mc; mc when --samples is given, else exact.
    #[arg(long)]
    method: Option<Method>,
    /// Lattice step of the dp method.
    #[arg(long, default_value_t = DEFAULT_LATTICE_STEP)]
    step: f64,
    #[command(flatten)]
    sampling: Sampling,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum SpectrumCmd {
    /// F_n(R) = Pr{ -log P(X^n) >= n alpha_c R } over a grid of R.
    First(CurveArgs),
    /// F_{a,n}(L) = Pr{ -log P(X^n) >= n alpha_c a + sqrt(n) alpha_c L } over a grid of L.
    Second {
        #[command(flatten)]
        curve: CurveArgs,
        /// Center a; defaults to the largest component entropy over alpha_c.
        #[arg(long)]
        a: Option<f64>,
    },
}

#[derive(Subcommand, Debug)]
enum ThresholdCmd {
    First {
        #[command(flatten)]
        problem: Problem,
        #[arg(long)]
        eps: f64,
    },
    Second {
        #[command(flatten)]
        problem: Problem,
        #[arg(long)]
        eps: f64,
        /// Center a; defaults to the admissible one.
        #[arg(long)]
        a: Option<f64>,
    },
}

#[derive(Subcommand, Debug)]
enum EquivCmd {
    /// Fixed-length code of the sequences whose codeword cost is at most eta.
    Vl2fl {
        #[command(flatten)]
        build: BuildArgs,
        #[arg(long)]
        eta: f64,
    },
    /// Variable-length code from the fixed-length code of the `size` most
    /// probable sequences.
    Fl2vl {
        #[command(flatten)]
        block: Block,
        #[arg(long)]
        size: usize,
        /// Also write the code table as CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct LemmaArgs {
    #[command(flatten)]
    block: Block,
    /// Thresholds (grid).
    #[arg(long)]
    eta: String,
    #[arg(long)]
    z: f64,
    /// exact or mc; mc when --samples is given, else exact.
    #[arg(long)]
    method: Option<Method>,
    #[command(flatten)]
    sampling: Sampling,
}

#[derive(Subcommand, Debug)]
enum DiagnoseCmd {
    /// Inter-quantile gap of the normalized self-information across n.
    StrongConverse {
        #[command(flatten)]
        problem: Problem,
        /// Comma-separated blocklengths.
        #[arg(long, default_value = "1000,10000")]
        n_list: String,
        #[arg(long, default_value_t = 0.05)]
        delta: f64,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Subcommand, Debug)]
enum SourceCmd {
    /// Entropy and varentropy of the source or its components.
    Info(Problem),
    Logprob {
        #[command(flatten)]
        problem: Problem,
        #[arg(long)]
        sequence: String,
    },
    /// Self-information samples as CSV.
    Sample {
        #[command(flatten)]
        block: Block,
        #[arg(long)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Full support with probabilities as CSV.
    Enumerate {
        #[command(flatten)]
        block: Block,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
enum GaussianCmd {
    Cdf {
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
    },
    Quantile {
        #[arg(long)]
        p: f64,
    },
}

#[derive(Debug)]
enum CliError {
    Config(String),
    Numeric(String),
    /// The reader closed stdout early.
    Closed,
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Closed => 0,
        }
    }

    fn to_json(&self) -> Value {
        let (kind, message) = match self {
            CliError::Config(m) => ("config", m),
            CliError::Numeric(m) => ("numeric", m),
            CliError::Closed => return Value::Null,
        };
        json!({ "error": kind, "message": message, "exit_code": self.code() })
    }
}

impl From<costcode::Error> for CliError {
    fn from(e: costcode::Error) -> Self {
        if e.is_numeric() {
            CliError::Numeric(e.to_string())
        } else {
            CliError::Config(e.to_string())
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        if e.kind() == std::io::ErrorKind::BrokenPipe {
            return CliError::Closed;
        }
        CliError::Config(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Parses `args` (program name first), runs the command and returns the exit
/// code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}

pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = write!(out, "{e}");
            return 0;
        }
        Err(e) => {
            let failure = CliError::Config(e.to_string().trim_end().to_string());
            let _ = writeln!(err, "{}", failure.to_json());
            return failure.code();
        }
    };
    match execute(&cli, out) {
        Ok(()) | Err(CliError::Closed) => 0,
        Err(e) => {
            let _ = writeln!(err, "{}", e.to_json());
            e.code()
        }
    }
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn load_source(path: &Path) -> CliResult<Source> {
    Ok(source_from_json(&read(path)?)?)
}

fn load_model(args: &ModelArgs, alphabet: usize) -> CliResult<CostModel> {
    match &args.costs {
        Some(path) => Ok(cost_model_from_json(&read(path)?, args.context_depth)?),
        None => Ok(CostModel::unit(alphabet)?),
    }
}

fn load_problem(p: &Problem) -> CliResult<(Source, CostModel)> {
    let source = load_source(&p.source)?;
    let model = load_model(&p.model, source.alphabet_size())?;
    if model.k() != source.alphabet_size() {
        return Err(CliError::Config(format!(
            "source alphabet has {} symbols but the cost model has K = {}",
            source.alphabet_size(),
            model.k()
        )));
    }
    Ok((source, model))
}

fn support(source: &Source, n: usize) -> CliResult<SequenceDist> {
    if n == 0 {
        return Err(CliError::Config("--n must be at least 1".into()));
    }
    Ok(enumerate_support(source, n, DEFAULT_SUPPORT_CAP)?)
}

fn precision(flag: Option<u32>) -> CliResult<u32> {
    if let Some(bits) = flag {
        return Ok(bits);
    }
    match std::env::var(PRECISION_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Config(format!("{PRECISION_ENV}={v:?} is not a bit count"))),
        Err(_) => Ok(DEFAULT_PRECISION_BITS),
    }
}

fn build(args: &BuildArgs) -> CliResult<(Source, CostModel, SequenceDist, PrefixCode)> {
    let (source, model) = load_problem(&args.block.problem)?;
    let dist = support(&source, args.block.n)?;
    let bits = precision(args.precision_bits)?;
    if !(8..=args.max_precision_bits).contains(&bits) || args.max_precision_bits > MAX_PRECISION_BITS {
        return Err(CliError::Config(format!(
            "need 8 <= precision <= max precision <= {MAX_PRECISION_BITS} bits"
        )));
    }
    let opts = BuildOptions { precision_bits: bits, max_precision_bits: args.max_precision_bits };
    let code = build_exact_code_with(&dist, &model, &opts)?;
    Ok((source, model, dist, code))
}

/// `start:stop:step` (inclusive, the count rounded to the nearest step) or a
/// comma list.
fn parse_grid(spec: &str) -> CliResult<Vec<f64>> {
    let bad = || CliError::Config(format!("bad grid {spec:?}"));
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
    let grid: Vec<f64> = if spec.contains(':') {
        let parts: Vec<f64> = spec.split(':').map(num).collect::<CliResult<_>>()?;
        let [start, stop, step] = parts[..] else { return Err(bad()) };
        if step.is_nan() || step <= 0.0 || stop < start {
            return Err(bad());
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        (0..count).map(|i| start + i as f64 * step).collect()
    } else {
        spec.split(',').map(num).collect::<CliResult<_>>()?
    };
    if grid.is_empty() || grid.iter().any(|g| !g.is_finite()) {
        return Err(bad());
    }
    Ok(grid)
}

fn parse_list(spec: &str) -> CliResult<Vec<usize>> {
    spec.split(',')
        .map(|s| s.trim().parse().map_err(|_| CliError::Config(format!("bad list {spec:?}"))))
        .collect()
}

/// Multiplier taking base-K information to the display base.
fn display_factor(log_base: Option<f64>, k: usize) -> CliResult<f64> {
    match log_base {
        None => Ok(1.0),
        Some(b) if b > 1.0 && b.is_finite() => Ok((k as f64).ln() / b.ln()),
        Some(b) => Err(CliError::Config(format!("--log-base {b} must exceed 1"))),
    }
}

fn emit_json<T: Serialize>(out: &mut dyn Write, value: &T) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).map_err(costcode::Error::from)?;
    writeln!(out, "{text}")?;
    Ok(())
}

fn emit_csv(
    out: &mut dyn Write,
    path: Option<&Path>,
    write: impl FnOnce(&mut dyn Write) -> std::io::Result<()>,
) -> CliResult<()> {
    match path {
        Some(p) => {
            let mut buf = Vec::new();
            write(&mut buf)?;
            fs::write(p, buf).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
        }
        None => write(out)?,
    }
    Ok(())
}

fn method_or_default(method: Option<Method>, sampling: &Sampling) -> Method {
    method.unwrap_or(if sampling.samples.is_some() { Method::Mc } else { Method::Exact })
}

fn samples(sampling: &Sampling) -> CliResult<usize> {
    sampling.samples.ok_or_else(|| CliError::Config("Monte Carlo methods need --samples".into()))
}

fn execute(cli: &Cli, out: &mut dyn Write) -> CliResult<()> {
    match &cli.command {
        Command::Capacity(args) => capacity(args, cli.log_base, out),
        Command::Code(cmd) => code(cmd, out),
        Command::Overflow(args) => overflow_cmd(args, out),
        Command::Spectrum(cmd) => spectrum(cmd, out),
        Command::Threshold(cmd) => threshold(cmd, cli.log_base, out),
        Command::Equiv(cmd) => equiv(cmd, out),
        Command::LemmaBounds(args) => lemmas(args, out),
        Command::Diagnose(DiagnoseCmd::StrongConverse { problem, n_list, delta, samples, seed }) => {
            let (source, model) = load_problem(problem)?;
            let k = model.k();
            let factor = display_factor(cli.log_base, k)?;
            let mut report = strong_converse_diagnostic(&source, &parse_list(n_list)?, *delta, *samples, *seed, k)?;
            for row in &mut report.rows {
                row.lower_quantile *= factor;
                row.upper_quantile *= factor;
                row.gap *= factor;
            }
            report.reference_gap *= factor;
            emit_json(out, &report)
        }
        Command::Source(cmd) => source_cmd(cmd, cli.log_base, out),
        Command::Gaussian(GaussianCmd::Cdf { x }) => emit_json(out, &json!({ "x": x, "cdf": gaussian_cdf(*x) })),
        Command::Gaussian(GaussianCmd::Quantile { p }) => {
            emit_json(out, &json!({ "p": p, "quantile": gaussian_quantile(*p)? }))
        }
    }
}

fn capacity(args: &ModelArgs, log_base: Option<f64>, out: &mut dyn Write) -> CliResult<()> {
    let model = load_model(args, 2)?;
    let cap = validate_conditional_model(&model)?;
    let factor = display_factor(log_base, model.k())?;
    emit_json(
        out,
        &json!({
            "K": model.k(),
            "costs": model.costs(),
            "conditional": model.is_conditional(),
            "alpha_c": cap.alpha_c * factor,
            "log_base": log_base.unwrap_or(model.k() as f64),
            "residual": cap.residual,
            "bracket": [cap.bracket.0, cap.bracket.1],
            "symbol_measure": symbol_measure(&model, &cap),
        }),
    )
}

fn code(cmd: &CodeCmd, out: &mut dyn Write) -> CliResult<()> {
    match cmd {
        CodeCmd::Build { build: args, out: path } => {
            let (source, _, _, code) = build(args)?;
            emit_csv(out, path.as_deref(), |w| write_code_csv(w, &code, source.alphabet_size()))
        }
        CodeCmd::Encode { build: args, sequence } => {
            let (source, model, _, code) = build(args)?;
            let x = parse_symbols(sequence, source.alphabet_size())?;
            let w = encode(&code, &x)?;
            emit_json(
                out,
                &json!({
                    "sequence": format_symbols(&x, source.alphabet_size()),
                    "codeword": format_symbols(w, model.k()),
                    "cost": model.word_cost(w),
                }),
            )
        }
        CodeCmd::Decode { build: args, codeword } => {
            let (source, model, _, code) = build(args)?;
            let w: Vec<u8> = parse_symbols(codeword, model.k())?.into_iter().map(|u| u as u8).collect();
            let x = decode(&code, &w)?;
            emit_json(
                out,
                &json!({
                    "codeword": format_symbols(&w, model.k()),
                    "sequence": format_symbols(x, source.alphabet_size()),
                }),
            )
        }
        CodeCmd::Kraft { build: args } => {
            let (_, _, _, code) = build(args)?;
            emit_json(
                out,
                &json!({
                    "n": code.n(),
                    "codewords": code.len(),
                    "alpha_c": code.alpha_c(),
                    "kraft_sum": kraft_sum(&code),
                    "prefix_free": code.is_prefix_free(),
                    "min_cost": code.min_cost(),
                    "max_cost": code.max_cost(),
                    "cost_bound": cost_bound_report(&code),
                }),
            )
        }
    }
}

fn overflow_cmd(args: &OverflowArgs, out: &mut dyn Write) -> CliResult<()> {
    let families: Vec<ThresholdFamily> = match (&args.rate, args.center, &args.offset, &args.eta) {
        (Some(r), None, None, None) => parse_grid(r)?.into_iter().map(|rate| ThresholdFamily::FirstOrder { rate }).collect(),
        (None, Some(center), Some(l), None) => parse_grid(l)?
            .into_iter()
            .map(|offset| ThresholdFamily::SecondOrder { center, offset })
            .collect(),
        (None, None, None, Some(e)) => parse_grid(e)?.into_iter().map(|eta| ThresholdFamily::Raw { eta }).collect(),
        _ => return Err(CliError::Config("give exactly one of --rate, --center with --offset, or --eta".into())),
    };
    let n = args.build.block.n;
    let method = match method_or_default(args.method, &args.sampling) {
        Method::Exact => OverflowMethod::Exact,
        Method::Mc => OverflowMethod::MonteCarlo { samples: samples(&args.sampling)?, seed: args.sampling.seed },
        Method::SurrogateMc => {
            OverflowMethod::SurrogateMonteCarlo { samples: samples(&args.sampling)?, seed: args.sampling.seed }
        }
        Method::Dp => return Err(CliError::Config("overflow supports exact, mc and surrogate-mc".into())),
    };
    let rows = if let OverflowMethod::SurrogateMonteCarlo { .. } = method {
        let (source, model) = load_problem(&args.build.block.problem)?;
        families
            .into_iter()
            .map(|family| overflow(OverflowTarget::Source { source: &source, model: &model }, &OverflowQuery { n, family, method }))
            .collect::<costcode::Result<Vec<_>>>()?
    } else {
        let (_, _, _, code) = build(&args.build)?;
        families
            .into_iter()
            .map(|family| overflow(OverflowTarget::Code(&code), &OverflowQuery { n, family, method }))
            .collect::<costcode::Result<Vec<_>>>()?
    };
    emit_csv(out, args.out.as_deref(), |w| write_overflow_csv(w, &rows))
}

fn spectrum(cmd: &SpectrumCmd, out: &mut dyn Write) -> CliResult<()> {
    let (args, center) = match cmd {
        SpectrumCmd::First(args) => (args, None),
        SpectrumCmd::Second { curve, a } => (curve, Some(*a)),
    };
    let (source, model) = load_problem(&args.block.problem)?;
    let alpha = model.capacity()?.alpha_c;
    let k = model.k();
    let method = match method_or_default(args.method, &args.sampling) {
        Method::Exact => SpectrumMethod::Exact,
        Method::Dp => SpectrumMethod::Dp { step: args.step },
        Method::Mc => SpectrumMethod::MonteCarlo { samples: samples(&args.sampling)?, seed: args.sampling.seed },
        Method::SurrogateMc => return Err(CliError::Config("spectrum supports exact, dp and mc".into())),
    };
    let grid = match (&args.grid, center) {
        (Some(g), _) => parse_grid(g)?,
        // rates up to 1.25 log_K |alphabet| / alpha_c
        (None, None) => {
            let top = 1.25 * (source.alphabet_size() as f64).ln() / (k as f64).ln() / alpha;
            (0..=40).map(|i| top * i as f64 / 40.0).collect()
        }
        (None, Some(_)) => (0..=24).map(|i| -3.0 + 0.25 * i as f64).collect(),
    };
    let query = SpectrumQuery { source: &source, n: args.block.n, alpha_c: alpha, base: k, method, grid };
    let curve = match center {
        None => first_order_spectrum(&query)?,
        Some(a) => {
            let a = match a {
                Some(a) => a,
                None => largest_entropy(&source, k) / alpha,
            };
            second_order_spectrum(&query, a)?
        }
    };
    emit_csv(out, args.out.as_deref(), |w| write_curve_csv(w, &curve))
}

fn components(source: &Source) -> Vec<&IidSource> {
    match source {
        Source::Iid(s) => vec![s],
        Source::Mixed(m) => m.components().iter().collect(),
    }
}

fn largest_entropy(source: &Source, k: usize) -> f64 {
    components(source).into_iter().map(|c| entropy(c, k)).fold(f64::NEG_INFINITY, f64::max)
}

fn threshold(cmd: &ThresholdCmd, log_base: Option<f64>, out: &mut dyn Write) -> CliResult<()> {
    let mut result: ThresholdResult = match cmd {
        ThresholdCmd::First { problem, eps } => {
            let (source, model) = load_problem(problem)?;
            first_order_threshold(&source, &model, *eps)?
        }
        ThresholdCmd::Second { problem, eps, a } => {
            let (source, model) = load_problem(problem)?;
            second_order_threshold(&source, &model, *eps, *a)?
        }
    };
    if log_base.is_some() {
        let k = match cmd {
            ThresholdCmd::First { problem, .. } | ThresholdCmd::Second { problem, .. } => {
                load_problem(problem)?.1.k()
            }
        };
        let factor = display_factor(log_base, k)?;
        let inputs = &mut result.inputs;
        inputs.alpha_c *= factor;
        inputs.entropy.iter_mut().for_each(|h| *h *= factor);
        inputs.sigma.iter_mut().for_each(|s| *s *= factor);
    }
    emit_json(out, &result)
}

fn equiv(cmd: &EquivCmd, out: &mut dyn Write) -> CliResult<()> {
    match cmd {
        EquivCmd::Vl2fl { build: args, eta } => {
            let (source, model, _, code) = build(args)?;
            let fl = vl_to_fl(&code, *eta);
            let m = source.alphabet_size();
            emit_json(
                out,
                &json!({
                    "n": fl.n,
                    "eta": eta,
                    "size": fl.size,
                    "log_size": fl.log_size(model.k()),
                    "alpha_eta": code.alpha_c() * eta,
                    "error_probability": fl.error_probability,
                    "members": fl.members.iter().map(|x| format_symbols(x, m)).collect::<Vec<_>>(),
                }),
            )
        }
        EquivCmd::Fl2vl { block, size, out: path } => {
            let (source, model) = load_problem(&block.problem)?;
            let dist = support(&source, block.n)?;
            let fl = FixedLengthCode::most_probable(&dist, *size)?;
            let (code, cert) = fl_to_vl(&fl, &dist, &model)?;
            let q = OverflowQuery {
                n: block.n,
                family: ThresholdFamily::Raw { eta: cert.threshold },
                method: OverflowMethod::Exact,
            };
            let ov = overflow(OverflowTarget::Code(&code), &q)?;
            if let Some(p) = path {
                emit_csv(out, Some(p), |w| write_code_csv(w, &code, source.alphabet_size()))?;
            }
            emit_json(
                out,
                &json!({
                    "n": block.n,
                    "size": fl.size,
                    "fixed_length_error": fl.error_probability,
                    "certificate": cert,
                    "overflow_at_threshold": ov.probability,
                }),
            )
        }
    }
}

fn lemmas(args: &LemmaArgs, out: &mut dyn Write) -> CliResult<()> {
    let (source, model) = load_problem(&args.block.problem)?;
    let method = match method_or_default(args.method, &args.sampling) {
        Method::Exact => LemmaMethod::Exact,
        Method::Mc => LemmaMethod::MonteCarlo { samples: samples(&args.sampling)?, seed: args.sampling.seed },
        _ => return Err(CliError::Config("lemma-bounds supports exact and mc".into())),
    };
    let rows = parse_grid(&args.eta)?
        .into_iter()
        .map(|eta| lemma_bounds(&source, &model, args.block.n, eta, args.z, method))
        .collect::<costcode::Result<Vec<_>>>()?;
    emit_json(out, &rows)
}

fn source_cmd(cmd: &SourceCmd, log_base: Option<f64>, out: &mut dyn Write) -> CliResult<()> {
    match cmd {
        SourceCmd::Info(problem) => {
            let (source, model) = load_problem(problem)?;
            let k = model.k();
            let f = display_factor(log_base, k)?;
            let parts: Vec<Value> = components(&source)
                .into_iter()
                .map(|c| json!({ "pmf": c.pmf(), "entropy": entropy(c, k) * f, "varentropy": varentropy(c, k) * f * f }))
                .collect();
            let weights = match &source {
                Source::Mixed(m) => Some(m.weights()),
                Source::Iid(_) => None,
            };
            emit_json(
                out,
                &json!({
                    "alphabet": source.alphabet_size(),
                    "log_base": log_base.unwrap_or(k as f64),
                    "weights": weights,
                    "components": parts,
                }),
            )
        }
        SourceCmd::Logprob { problem, sequence } => {
            let (source, model) = load_problem(problem)?;
            let k = model.k();
            let x = parse_symbols(sequence, source.alphabet_size())?;
            let lp = log_prob(&source, &x, k)? * display_factor(log_base, k)?;
            emit_json(out, &json!({ "sequence": sequence, "log_prob": lp }))
        }
        SourceCmd::Sample { block, samples, seed, out: path } => {
            let (source, model) = load_problem(&block.problem)?;
            let k = model.k();
            if block.n == 0 || *samples == 0 {
                return Err(CliError::Config("--n and --samples must be positive".into()));
            }
            let f = display_factor(log_base, k)?;
            let values = sample_self_info(&source, block.n, *samples, *seed, k);
            emit_csv(out, path.as_deref(), |w| {
                writeln!(w, "self_information")?;
                values.iter().try_for_each(|v| writeln!(w, "{}", v * f))
            })
        }
        SourceCmd::Enumerate { block, out: path } => {
            let (source, model) = load_problem(&block.problem)?;
            let k = model.k();
            let f = display_factor(log_base, k)?;
            let dist = support(&source, block.n)?;
            let info = dist.self_info(k);
            let m = source.alphabet_size();
            emit_csv(out, path.as_deref(), |w| {
                writeln!(w, "sequence,probability,self_information")?;
                dist.entries()
                    .iter()
                    .zip(info)
                    .try_for_each(|(e, i)| writeln!(w, "{},{},{}", format_symbols(&e.symbols, m), e.prob, i * f))
            })
        }
    }
}
