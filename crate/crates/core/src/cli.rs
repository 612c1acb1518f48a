//! Command-line front end: `compress`, `decompress`, `bench`, `inspect`.

use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::audio::{load_audio, save_audio, LoadOptions, MIN_FRAME_LEN};
use crate::bench::{self, BenchConfig, ReportFormat};
use crate::codec::{decode_container, encode_signal, CodecConfig, DecodeOptions, Rate};
use crate::container::{Container, EncodedFrame, Method};
use crate::corpus::{bundled_corpus, CorpusSignal};
use crate::error::{invalid, Error, Result};
use crate::metrics::{median_duration, SimilarityNorm};
use crate::recovery::{RecoveryConfig, Solver};
use crate::sfft::{unpack_spectrum, SublinearParams, MAX_PACKED_N};
use crate::transforms::BasisKind;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INPUT_FORMAT: i32 = 3;
pub const EXIT_CORRUPT: i32 = 4;

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidArgument(_) | Error::DimensionMismatch { .. } => EXIT_USAGE,
        Error::MissingFile(_)
        | Error::UnsupportedChannels(_)
        | Error::UnsupportedEncoding(_)
        | Error::CorruptHeader(_)
        | Error::UnsupportedMethod(_)
        | Error::VersionMismatch { .. } => EXIT_INPUT_FORMAT,
        Error::CorruptContainer(_) | Error::Truncated { .. } => EXIT_CORRUPT,
        Error::Io(_) | Error::NonContiguousFrames { .. } | Error::NonFinite(_) => EXIT_FAILURE,
    }
}

#[derive(Debug, Parser)]
#[command(name = "sacx", version, about = "Compressive-sensing and sparse-FFT audio codec")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Encode a WAV file into a .sacx container.
    Compress(CompressArgs),
    /// Decode a .sacx container to a 16-bit WAV file.
    Decompress(DecompressArgs),
    /// Run the compression-ratio or bit-budget sweep and write a CSV report.
    Bench(BenchArgs),
    /// Print a container's header and per-frame summary.
    Inspect(InspectArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Cs,
    Sfft,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Cs => Method::Cs,
            MethodArg::Sfft => Method::Sfft,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolverArg {
    Omp,
    Bp,
}

impl From<SolverArg> for Solver {
    fn from(s: SolverArg) -> Self {
        match s {
            SolverArg::Omp => Solver::Omp,
            SolverArg::Bp => Solver::Bp,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepArg {
    CrSweep,
    BitSweep,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("rate").required(true).args(["cr", "bits", "k"])))]
pub struct CompressArgs {
    pub input: PathBuf,
    #[arg(short, long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value = "cs")]
    pub method: MethodArg,
    /// dft, dct, dwt-haar or dwt-db4 (CS only).
    #[arg(long, default_value = "dct", value_parser = parse_basis)]
    pub basis: BasisKind,
    /// Compression ratio in percent, 1 − M/N.
    #[arg(long)]
    pub cr: Option<f64>,
    /// Payload bits per frame.
    #[arg(long)]
    pub bits: Option<usize>,
    /// SFFT coefficients per frame.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, env = "SACX_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = crate::audio::DEFAULT_FRAME_LEN)]
    pub frame_len: usize,
    /// Find SFFT bins with the sublinear search instead of a full FFT.
    #[arg(long)]
    pub sublinear: bool,
    /// Average multi-channel input to mono.
    #[arg(long)]
    pub mixdown: bool,
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
pub struct DecompressArgs {
    pub input: PathBuf,
    #[arg(short, long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value = "omp")]
    pub solver: SolverArg,
    /// OMP sparsity; defaults to M/4.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, default_value_t = RecoveryConfig::default().bp_max_iter)]
    pub bp_max_iter: usize,
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// WAV file to benchmark; the bundled synthetic corpus when omitted.
    pub input: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "cr-sweep")]
    pub mode: SweepArg,
    #[arg(short, long, default_value = "bench.csv")]
    pub out: PathBuf,
    #[arg(long, default_value = "csv")]
    pub format: ReportFormat,
    #[arg(long, env = "SACX_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = crate::audio::DEFAULT_FRAME_LEN)]
    pub frame_len: usize,
    /// Frames per bundled corpus signal.
    #[arg(long, default_value_t = 4)]
    pub frames: usize,
    #[arg(long, default_value_t = 5)]
    pub reps: usize,
    #[arg(long, default_value_t = RecoveryConfig::default().bp_max_iter)]
    pub bp_max_iter: usize,
    /// Report ‖x − x̂‖/‖x‖ instead of the squared ratio.
    #[arg(long)]
    pub plain_norm: bool,
    #[arg(long)]
    pub mixdown: bool,
}

#[derive(Debug, Args)]
pub struct InspectArgs {
    pub input: PathBuf,
}

fn parse_basis(s: &str) -> std::result::Result<BasisKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    match threads {
        None => f(),
        Some(0) => Err(invalid("--threads must be at least 1")),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| invalid(e.to_string()))?
            .install(f),
    }
}

fn check_frame_len(n: usize) -> Result<()> {
    if n < MIN_FRAME_LEN || !n.is_power_of_two() || n > u16::MAX as usize {
        return Err(invalid(format!("--frame-len {n} must be a power of two in {MIN_FRAME_LEN}..=32768")));
    }
    Ok(())
}

impl CompressArgs {
    pub fn codec_config(&self) -> Result<CodecConfig> {
        check_frame_len(self.frame_len)?;
        let method = Method::from(self.method);
        let rate = match (self.cr, self.bits, self.k) {
            (Some(cr), None, None) => {
                if !(0.0..100.0).contains(&cr) {
                    return Err(invalid(format!("--cr {cr} must lie in [0, 100)")));
                }
                Rate::CompressionRatio(cr / 100.0)
            }
            (None, Some(b), None) => Rate::BitBudget(b),
            (None, None, Some(k)) => Rate::Coefficients(k),
            _ => return Err(invalid("give exactly one of --cr, --bits, --k")),
        };
        if method == Method::Sfft && self.frame_len > MAX_PACKED_N {
            return Err(invalid(format!("SFFT frames are limited to {MAX_PACKED_N} samples")));
        }
        if self.sublinear && method != Method::Sfft {
            return Err(invalid("--sublinear applies to the SFFT method only"));
        }
        Ok(CodecConfig {
            method,
            basis: self.basis,
            rate,
            seed: self.seed,
            frame_len: self.frame_len,
            quant_bits: crate::cs::DEFAULT_MEASUREMENT_BITS,
            sublinear: self.sublinear.then(SublinearParams::default),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompressSummary {
    pub frames: usize,
    pub bits_per_frame: f64,
    pub container_bytes: usize,
    /// Container size over the 16-bit PCM size of the input.
    pub size_ratio: f64,
}

pub fn cmd_compress(args: &CompressArgs) -> Result<CompressSummary> {
    let cfg = args.codec_config()?;
    let signal = load_audio(&args.input, LoadOptions { mixdown: args.mixdown })?;
    let container = with_threads(args.threads, || encode_signal(&signal, &cfg))?;
    let bytes = container.to_bytes()?;
    std::fs::write(&args.out, &bytes)?;
    Ok(CompressSummary {
        frames: container.frames.len(),
        bits_per_frame: container.bits_per_frame()?,
        container_bytes: bytes.len(),
        size_ratio: bytes.len() as f64 / (2 * signal.len()).max(1) as f64,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecompressSummary {
    pub frames: usize,
    pub samples: usize,
    pub median_frame_time: Duration,
    pub total_time: Duration,
    pub unconverged_frames: Vec<usize>,
    /// Frames with duplicate or out-of-range SFFT bins.
    pub corrupt_frames: Vec<usize>,
}

/// Writes the WAV even when SFFT bins were dropped, then reports the
/// corruption as an error so scripts see exit code 4.
pub fn cmd_decompress(args: &DecompressArgs) -> Result<DecompressSummary> {
    let container = Container::read(&args.input)?;
    let opts = DecodeOptions {
        solver: args.solver.into(),
        sparsity: args.k,
        recovery: RecoveryConfig { bp_max_iter: args.bp_max_iter, ..RecoveryConfig::default() },
    };
    let decoded = with_threads(args.threads, || decode_container(&container, &opts))?;
    save_audio(&decoded.signal, &args.out)?;
    let mut times: Vec<Duration> = decoded.frames.iter().map(|f| f.decode_time).collect();
    let summary = DecompressSummary {
        frames: decoded.frames.len(),
        samples: decoded.signal.len(),
        total_time: times.iter().sum(),
        median_frame_time: median_duration(&mut times),
        unconverged_frames: decoded.frames.iter().filter(|f| f.unconverged).map(|f| f.frame_index).collect(),
        corrupt_frames: decoded.frames.iter().filter(|f| !f.issues.is_clean()).map(|f| f.frame_index).collect(),
    };
    if let Some(&i) = summary.corrupt_frames.first() {
        let issues = &decoded.frames[i].issues;
        return Err(Error::CorruptContainer(format!(
            "frame {i}: duplicate bins {:?}, out-of-range bins {:?} dropped ({} frames affected, output written)",
            issues.duplicates,
            issues.out_of_range,
            summary.corrupt_frames.len()
        )));
    }
    Ok(summary)
}

pub fn cmd_bench(args: &BenchArgs) -> Result<Vec<(String, Vec<bench::BenchRow>)>> {
    check_frame_len(args.frame_len)?;
    let cfg = BenchConfig {
        frame_len: args.frame_len,
        seed: args.seed,
        timing_reps: args.reps,
        recovery: RecoveryConfig { bp_max_iter: args.bp_max_iter, ..RecoveryConfig::default() },
        norm: if args.plain_norm { SimilarityNorm::Plain } else { SimilarityNorm::Squared },
        ..BenchConfig::default()
    };
    let signals = match &args.input {
        Some(path) => {
            let signal = load_audio(path, LoadOptions { mixdown: args.mixdown })?;
            vec![CorpusSignal { name: "input", signal }]
        }
        None => bundled_corpus(args.frames, args.frame_len)?,
    };
    let mut all = Vec::new();
    let mut results = Vec::new();
    for s in signals {
        let rows = match args.mode {
            SweepArg::CrSweep => bench::run_cr_sweep(&s.signal, &bench::CR_SWEEP, &cfg)?,
            SweepArg::BitSweep => bench::run_bit_budget_sweep(&s.signal, &bench::BIT_BUDGETS, &cfg)?,
        };
        all.extend(rows.iter().cloned());
        results.push((s.name.to_string(), rows));
    }
    if results.len() == 1 {
        bench::emit_report(&all, &args.out, args.format)?;
    } else {
        for (name, rows) in &results {
            bench::emit_report(rows, suffixed(&args.out, name), args.format)?;
        }
    }
    Ok(results)
}

/// `bench.csv` → `bench-music.csv`.
pub fn suffixed(path: &Path, name: &str) -> PathBuf {
    let stem = path.file_stem().map_or("bench".into(), |s| s.to_string_lossy().into_owned());
    let file = match path.extension() {
        Some(ext) => format!("{stem}-{name}.{}", ext.to_string_lossy()),
        None => format!("{stem}-{name}"),
    };
    path.with_file_name(file)
}

pub fn cmd_inspect(args: &InspectArgs) -> Result<String> {
    let c = Container::read(&args.input)?;
    let h = &c.header;
    let mut s = format!(
        "SACX v{} method={} sample_rate={} frame_len={} frames={} original_len={} seed={}\n",
        crate::container::VERSION,
        h.method,
        h.sample_rate,
        h.frame_len,
        h.frame_count,
        h.original_len,
        h.master_seed
    );
    for f in &c.frames {
        s += &match f {
            EncodedFrame::Cs(e) => {
                let q = e.quant.as_ref().expect("parsed frames are quantized");
                format!(
                    "frame {}: CS N={} M={} basis={} seed={:#x} bits={} scale={:.6e} record_bits={}\n",
                    e.frame_index,
                    e.n,
                    e.m(),
                    e.basis,
                    e.seed,
                    q.bits,
                    q.scale,
                    f.record_bits()?
                )
            }
            EncodedFrame::Sfft(e) => {
                let (_, issues) = unpack_spectrum(e);
                let idx: Vec<usize> = e.packed.iter().map(|p| p.index()).collect();
                format!(
                    "frame {}: SFFT N={} K={} scale={:.6e} record_bits={} bins={:?}{}\n",
                    e.frame_index,
                    e.n,
                    e.k(),
                    e.scale,
                    f.record_bits()?,
                    idx,
                    if issues.is_clean() { String::new() } else { format!(" CORRUPT {issues:?}") }
                )
            }
        };
    }
    Ok(s)
}

/// Runs a parsed command, printing its summary to stdout.
pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Compress(a) => {
            let s = cmd_compress(&a)?;
            println!(
                "{} frames, {:.1} bits/frame, {} bytes ({:.3} of 16-bit PCM)",
                s.frames, s.bits_per_frame, s.container_bytes, s.size_ratio
            );
        }
        Command::Decompress(a) => {
            let s = cmd_decompress(&a)?;
            println!(
                "{} frames, {} samples, median {:.3?}/frame, total {:.3?}",
                s.frames, s.samples, s.median_frame_time, s.total_time
            );
            if !s.unconverged_frames.is_empty() {
                println!("BP hit its iteration cap in frames {:?}", s.unconverged_frames);
            }
        }
        Command::Bench(a) => {
            for (name, rows) in cmd_bench(&a)? {
                println!("== {name} ==\n{}", bench::summary_table(&rows));
            }
        }
        Command::Inspect(a) => print!("{}", cmd_inspect(&a)?),
    }
    Ok(())
}
