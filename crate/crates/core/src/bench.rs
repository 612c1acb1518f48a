//! Compression-ratio and bit-budget sweeps with per-cell similarity and timing.
//!
//! Each cell is timed alone on the calling thread; per-frame times are the
//! median of `timing_reps` repetitions. Reported totals sum those medians over
//! the frames of the signal.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::time::{Duration, Instant};

use crate::audio::{assemble_signal, frame_signal, AudioSignal, Frame};
use crate::codec::{cs_measurements, sfft_coefficients, Rate};
use crate::container::{cs_record_bits, sfft_record_bits, Method};
use crate::cs::{CsEncoder, DEFAULT_MEASUREMENT_BITS};
use crate::error::{invalid, Result};
use crate::metrics::{median_duration, similarity_with, time_median, SimilarityNorm};
use crate::recovery::{cs_decode_with, four_to_one_sparsity, RecoveryConfig, Solver};
use crate::sfft::{top_k_spectrum, SfftCodec};
use crate::transforms::{BasisKind, Coefficients, Transform};

/// Compression ratios swept by default.
pub const CR_SWEEP: [f64; 7] = [0.20, 0.50, 0.60, 0.66, 0.75, 0.80, 0.83];
/// Per-frame payload budgets swept by default.
pub const BIT_BUDGETS: [usize; 3] = [3264, 5568, 8192];

pub const CSV_HEADER: [&str; 9] = [
    "method",
    "solver",
    "basis",
    "setting_kind",
    "setting_value",
    "similarity",
    "encode_time_s",
    "reconstruct_time_s",
    "bits_per_frame",
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Setting {
    CompressionRatio(f64),
    BitBudget(usize),
}

impl Setting {
    fn rate(self) -> Rate {
        match self {
            Setting::CompressionRatio(c) => Rate::CompressionRatio(c),
            Setting::BitBudget(b) => Rate::BitBudget(b),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Setting::CompressionRatio(_) => "cr",
            Setting::BitBudget(_) => "bits",
        }
    }

    /// C/R in percent, or the bit budget.
    pub fn value(&self) -> String {
        match *self {
            Setting::CompressionRatio(c) => format!("{}", (c * 1e4).round() / 100.0),
            Setting::BitBudget(b) => b.to_string(),
        }
    }
}

impl fmt::Display for Setting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Setting::CompressionRatio(_) => write!(f, "C/R {}%", self.value()),
            Setting::BitBudget(b) => write!(f, "{b} bits"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub method: Method,
    /// `None` for SFFT.
    pub solver: Option<Solver>,
    pub basis: Option<BasisKind>,
    pub setting: Setting,
    pub similarity: f64,
    /// SFFT only: similarity with exact top-K values, before packing.
    pub unquantized_similarity: Option<f64>,
    pub encode_time: Duration,
    pub reconstruct_time: Duration,
    pub median_frame_decode: Duration,
    pub bits_per_frame: usize,
    /// Frames where BP stopped at its iteration cap.
    pub unconverged_frames: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub frame_len: usize,
    pub seed: u64,
    pub timing_reps: usize,
    pub recovery: RecoveryConfig,
    pub bases: Vec<BasisKind>,
    pub solvers: Vec<Solver>,
    pub quant_bits: u8,
    pub norm: SimilarityNorm,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            frame_len: crate::audio::DEFAULT_FRAME_LEN,
            seed: 0,
            timing_reps: 5,
            recovery: RecoveryConfig::default(),
            bases: BasisKind::benchmark_bases().to_vec(),
            solvers: vec![Solver::Omp, Solver::Bp],
            quant_bits: DEFAULT_MEASUREMENT_BITS,
            norm: SimilarityNorm::default(),
        }
    }
}

impl BenchConfig {
    fn validate(&self) -> Result<()> {
        if self.timing_reps == 0 {
            return Err(invalid("timing_reps must be at least 1"));
        }
        Ok(())
    }
}

fn timed<T>(reps: usize, mut f: impl FnMut() -> Result<T>) -> Result<(T, Duration)> {
    let (out, t) = time_median(reps, &mut f);
    Ok((out?, t))
}

struct CellTimes {
    encode: Vec<Duration>,
    decode: Vec<Duration>,
}

impl CellTimes {
    fn new(n: usize) -> Self {
        Self { encode: Vec::with_capacity(n), decode: Vec::with_capacity(n) }
    }

    fn totals(mut self) -> (Duration, Duration, Duration) {
        let enc = self.encode.iter().sum();
        let dec = self.decode.iter().sum();
        (enc, dec, median_duration(&mut self.decode))
    }
}

/// One CS cell over every frame of the signal.
pub fn run_cs_cell(
    signal: &AudioSignal,
    basis: BasisKind,
    solver: Solver,
    setting: Setting,
    cfg: &BenchConfig,
) -> Result<BenchRow> {
    cfg.validate()?;
    let n = cfg.frame_len;
    let frames = frame_signal(signal, n)?;
    let m = cs_measurements(setting.rate(), n, cfg.quant_bits)?;
    let encoder = CsEncoder { basis, n, m, master_seed: cfg.seed, quant_bits: Some(cfg.quant_bits) };
    let t = Transform::new(basis, n)?;
    let recovery = RecoveryConfig { sparsity_k: four_to_one_sparsity(m), ..cfg.recovery };
    let mut times = CellTimes::new(frames.len());
    let mut decoded = Vec::with_capacity(frames.len());
    let mut unconverged = 0;
    for frame in &frames {
        let (enc, te) = timed(cfg.timing_reps, || encoder.encode(frame))?;
        let ((out, res), td) = timed(cfg.timing_reps, || cs_decode_with(&enc, &t, solver, &recovery))?;
        unconverged += !res.converged as usize;
        times.encode.push(te);
        times.decode.push(td);
        decoded.push(out);
    }
    let sim = signal_similarity(signal, &decoded, cfg.norm)?;
    let (encode_time, reconstruct_time, median_frame_decode) = times.totals();
    Ok(BenchRow {
        method: Method::Cs,
        solver: Some(solver),
        basis: Some(basis),
        setting,
        similarity: sim,
        unquantized_similarity: None,
        encode_time,
        reconstruct_time,
        median_frame_decode,
        bits_per_frame: cs_record_bits(m, cfg.quant_bits),
        unconverged_frames: unconverged,
    })
}

/// One SFFT cell with exact top-K selection.
pub fn run_sfft_cell(signal: &AudioSignal, setting: Setting, cfg: &BenchConfig) -> Result<BenchRow> {
    cfg.validate()?;
    let n = cfg.frame_len;
    let frames = frame_signal(signal, n)?;
    let k = sfft_coefficients(setting.rate(), n)?;
    let codec = SfftCodec::new(n)?;
    let dft = Transform::new(BasisKind::Dft, n)?;
    let mut times = CellTimes::new(frames.len());
    let mut decoded = Vec::with_capacity(frames.len());
    let mut exact = Vec::with_capacity(frames.len());
    for frame in &frames {
        let (enc, te) = timed(cfg.timing_reps, || codec.encode(frame, k))?;
        let (out, td) = timed(cfg.timing_reps, || codec.decode(&enc))?;
        times.encode.push(te);
        times.decode.push(td);
        decoded.push(out);
        let top = top_k_spectrum(&codec.spectrum(frame)?, k)?;
        exact.push(Frame::new(frame.index, dft.inverse(&Coefficients::Complex(top.to_dense()))?));
    }
    let sim = signal_similarity(signal, &decoded, cfg.norm)?;
    let unquantized = signal_similarity(signal, &exact, cfg.norm)?;
    let (encode_time, reconstruct_time, median_frame_decode) = times.totals();
    Ok(BenchRow {
        method: Method::Sfft,
        solver: None,
        basis: None,
        setting,
        similarity: sim,
        unquantized_similarity: Some(unquantized),
        encode_time,
        reconstruct_time,
        median_frame_decode,
        bits_per_frame: sfft_record_bits(k),
        unconverged_frames: 0,
    })
}

fn signal_similarity(signal: &AudioSignal, frames: &[Frame], norm: SimilarityNorm) -> Result<f64> {
    let recon = assemble_signal(frames, signal.len(), signal.sample_rate())?;
    similarity_with(signal.samples(), recon.samples(), norm)
}

fn run_settings(signal: &AudioSignal, settings: &[Setting], cfg: &BenchConfig) -> Result<Vec<BenchRow>> {
    let mut rows = Vec::new();
    for &setting in settings {
        for &basis in &cfg.bases {
            for &solver in &cfg.solvers {
                let start = Instant::now();
                rows.push(run_cs_cell(signal, basis, solver, setting, cfg)?);
                log::info!("{setting} CS {basis} {solver}: {:.2?}", start.elapsed());
            }
        }
        rows.push(run_sfft_cell(signal, setting, cfg)?);
    }
    Ok(rows)
}

/// Every basis × solver at each C/R, plus an SFFT row with `K = M/2`.
pub fn run_cr_sweep(signal: &AudioSignal, ratios: &[f64], cfg: &BenchConfig) -> Result<Vec<BenchRow>> {
    let settings: Vec<Setting> = ratios.iter().map(|&c| Setting::CompressionRatio(c)).collect();
    run_settings(signal, &settings, cfg)
}

/// Every basis × solver at each payload budget (`M = budget/16`), plus SFFT
/// with `K = budget/32`.
pub fn run_bit_budget_sweep(signal: &AudioSignal, budgets: &[usize], cfg: &BenchConfig) -> Result<Vec<BenchRow>> {
    let settings: Vec<Setting> = budgets.iter().map(|&b| Setting::BitBudget(b)).collect();
    run_settings(signal, &settings, cfg)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReportFormat {
    #[default]
    Csv,
    Tsv,
}

impl std::str::FromStr for ReportFormat {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(ReportFormat::Csv),
            "tsv" => Ok(ReportFormat::Tsv),
            _ => Err(invalid(format!("unknown report format {s:?}"))),
        }
    }
}

fn record(row: &BenchRow) -> [String; 9] {
    [
        row.method.to_string(),
        row.solver.map_or("-".into(), |s| s.to_string()),
        row.basis.map_or("-".into(), |b| b.to_string()),
        row.setting.kind().into(),
        row.setting.value(),
        format!("{:.6e}", row.similarity),
        format!("{:.6}", row.encode_time.as_secs_f64()),
        format!("{:.6}", row.reconstruct_time.as_secs_f64()),
        row.bits_per_frame.to_string(),
    ]
}

pub fn write_report<W: Write>(rows: &[BenchRow], out: W, format: ReportFormat) -> Result<()> {
    if rows.is_empty() {
        return Err(invalid("no benchmark rows to report"));
    }
    let delim = match format {
        ReportFormat::Csv => b',',
        ReportFormat::Tsv => b'\t',
    };
    let mut w = csv::WriterBuilder::new().delimiter(delim).from_writer(out);
    let io = |e: csv::Error| crate::Error::Io(e.into());
    w.write_record(CSV_HEADER).map_err(io)?;
    for row in rows {
        w.write_record(record(row)).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_report(rows: &[BenchRow], path: impl AsRef<Path>, format: ReportFormat) -> Result<()> {
    if rows.is_empty() {
        return Err(invalid("no benchmark rows to report"));
    }
    write_report(rows, std::fs::File::create(path)?, format)
}

/// Human-readable table with median decode times.
pub fn summary_table(rows: &[BenchRow]) -> String {
    let mut s = format!(
        "{:<6} {:<4} {:<9} {:<10} {:>12} {:>12} {:>10} {:>12}\n",
        "method", "solv", "basis", "setting", "similarity", "unquantized", "bits", "median dec"
    );
    for r in rows {
        s += &format!(
            "{:<6} {:<4} {:<9} {:<10} {:>12.4e} {:>12} {:>10} {:>12.3?}\n",
            r.method.to_string(),
            r.solver.map_or("-".into(), |v| v.to_string()),
            r.basis.map_or("-".into(), |v| v.to_string()),
            r.setting.to_string(),
            r.similarity,
            r.unquantized_similarity.map_or("-".into(), |v| format!("{v:.4e}")),
            r.bits_per_frame,
            r.median_frame_decode,
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::multitone;

    fn quick() -> BenchConfig {
        BenchConfig { frame_len: 128, timing_reps: 1, recovery: RecoveryConfig { bp_max_iter: 300, ..RecoveryConfig::default() }, ..BenchConfig::default() }
    }

    #[test]
    fn sweep_shape_and_report() {
        let x = multitone(256, 4).unwrap();
        let rows = run_cr_sweep(&x, &[0.5, 0.75], &quick()).unwrap();
        assert_eq!(rows.len(), 2 * 7);
        assert_eq!(rows[6].method, Method::Sfft);
        assert_eq!(rows[0].bits_per_frame, 8 * 28 + 64 * 16);
        let mut a = Vec::new();
        write_report(&rows, &mut a, ReportFormat::Csv).unwrap();
        let text = String::from_utf8(a).unwrap();
        assert!(text.starts_with(&CSV_HEADER.join(",")));
        assert_eq!(text.lines().count(), 15);
        let mut b = Vec::new();
        write_report(&rows, &mut b, ReportFormat::Csv).unwrap();
        assert_eq!(text.as_bytes(), &b[..]);
        assert!(write_report(&[], Vec::new(), ReportFormat::Csv).is_err());
    }

    #[test]
    fn setting_labels() {
        assert_eq!(Setting::CompressionRatio(0.83).value(), "83");
        assert_eq!(Setting::CompressionRatio(0.665).value(), "66.5");
        assert_eq!(Setting::BitBudget(3264).value(), "3264");
    }
}
