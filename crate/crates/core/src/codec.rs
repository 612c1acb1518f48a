//! Whole-signal encoding into a [`Container`] and decoding back to audio.

use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::audio::{assemble_signal, frame_signal, AudioSignal, Frame};
use crate::container::{Container, ContainerHeader, EncodedFrame, Method};
use crate::cs::{measurement_count, CsEncoder, DEFAULT_MEASUREMENT_BITS};
use crate::error::{invalid, Result};
use crate::recovery::{cs_decode_with, four_to_one_sparsity, RecoveryConfig, Solver};
use crate::sfft::{encode_spectrum, DecodeIssues, SfftCodec, SublinearParams, SublinearPlan};
use crate::transforms::{BasisKind, Transform};

/// Per-frame rate target. Exactly one is given on the command line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Rate {
    /// Fraction of samples dropped, `C/R = 1 − M/N`.
    CompressionRatio(f64),
    /// Payload bits per frame: `M = budget / quant_bits` or `K = budget / 32`.
    BitBudget(usize),
    /// SFFT coefficient count.
    Coefficients(usize),
}

/// CS measurement count for a rate.
pub fn cs_measurements(rate: Rate, n: usize, quant_bits: u8) -> Result<usize> {
    let m = match rate {
        Rate::CompressionRatio(cr) => measurement_count(cr, n)?,
        Rate::BitBudget(b) => b / quant_bits as usize,
        Rate::Coefficients(_) => return Err(invalid("--k applies to the SFFT method only")),
    };
    if m == 0 || m > n {
        return Err(invalid(format!("rate gives M={m}, outside 1..={n}")));
    }
    Ok(m)
}

/// SFFT coefficient count for a rate. A compression ratio maps to the `K`
/// whose payload matches CS at the same ratio, `K = M/2`.
pub fn sfft_coefficients(rate: Rate, n: usize) -> Result<usize> {
    let k = match rate {
        Rate::CompressionRatio(cr) => measurement_count(cr, n)? / 2,
        Rate::BitBudget(b) => b / crate::sfft::BITS_PER_COEFFICIENT,
        Rate::Coefficients(k) => k,
    };
    if k == 0 || k > n {
        return Err(invalid(format!("rate gives K={k}, outside 1..={n}")));
    }
    Ok(k)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CodecConfig {
    pub method: Method,
    pub basis: BasisKind,
    pub rate: Rate,
    pub seed: u64,
    pub frame_len: usize,
    pub quant_bits: u8,
    /// Use the sublinear search for SFFT bin selection.
    pub sublinear: Option<SublinearParams>,
}

impl CodecConfig {
    pub fn new(method: Method, rate: Rate) -> Self {
        Self {
            method,
            basis: BasisKind::Dct,
            rate,
            seed: 0,
            frame_len: crate::audio::DEFAULT_FRAME_LEN,
            quant_bits: DEFAULT_MEASUREMENT_BITS,
            sublinear: None,
        }
    }
}

enum FrameEncoder {
    Cs(CsEncoder),
    Sfft { codec: SfftCodec, k: usize, plan: Option<SublinearPlan> },
}

impl FrameEncoder {
    fn new(cfg: &CodecConfig) -> Result<Self> {
        let n = cfg.frame_len;
        Ok(match cfg.method {
            Method::Cs => {
                let m = cs_measurements(cfg.rate, n, cfg.quant_bits)?;
                Transform::new(cfg.basis, n)?;
                FrameEncoder::Cs(CsEncoder { basis: cfg.basis, n, m, master_seed: cfg.seed, quant_bits: Some(cfg.quant_bits) })
            }
            Method::Sfft => {
                let k = sfft_coefficients(cfg.rate, n)?;
                let plan = match cfg.sublinear {
                    Some(p) => Some(SublinearPlan::new(n, k, SublinearParams { seed: cfg.seed ^ p.seed, ..p })?),
                    None => None,
                };
                FrameEncoder::Sfft { codec: SfftCodec::new(n)?, k, plan }
            }
        })
    }

    fn encode(&self, frame: &Frame) -> Result<EncodedFrame> {
        Ok(match self {
            FrameEncoder::Cs(enc) => EncodedFrame::Cs(enc.encode(frame)?),
            FrameEncoder::Sfft { codec, k, plan: None } => EncodedFrame::Sfft(codec.encode(frame, *k)?),
            FrameEncoder::Sfft { plan: Some(plan), .. } => {
                EncodedFrame::Sfft(encode_spectrum(frame.index, &plan.top_k(frame)?.spectrum)?)
            }
        })
    }
}

/// Frames the signal and encodes every frame on the current rayon pool.
/// Output does not depend on the number of threads.
pub fn encode_signal(signal: &AudioSignal, cfg: &CodecConfig) -> Result<Container> {
    let frames = frame_signal(signal, cfg.frame_len)?;
    let enc = FrameEncoder::new(cfg)?;
    let encoded = frames.par_iter().map(|f| enc.encode(f)).collect::<Result<Vec<_>>>()?;
    let header = ContainerHeader {
        method: cfg.method,
        sample_rate: signal.sample_rate(),
        frame_len: cfg.frame_len,
        frame_count: encoded.len(),
        original_len: signal.len() as u64,
        master_seed: cfg.seed,
    };
    Ok(Container { header, frames: encoded })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecodeOptions {
    pub solver: Solver,
    /// OMP sparsity; `None` uses `max(1, M/4)`.
    pub sparsity: Option<usize>,
    pub recovery: RecoveryConfig,
}

impl Default for DecodeOptions {
    fn default() -> Self {
        Self { solver: Solver::Omp, sparsity: None, recovery: RecoveryConfig::default() }
    }
}

#[derive(Debug, Clone)]
pub struct FrameReport {
    pub frame_index: usize,
    pub decode_time: Duration,
    /// BP stopped at its cap.
    pub unconverged: bool,
    pub issues: DecodeIssues,
}

#[derive(Debug, Clone)]
pub struct DecodedSignal {
    pub signal: AudioSignal,
    pub frames: Vec<FrameReport>,
}

/// Decodes one frame, regenerating `Φ` from the stored seed for CS.
pub fn decode_frame(frame: &EncodedFrame, opts: &DecodeOptions) -> Result<(Frame, bool, DecodeIssues)> {
    match frame {
        EncodedFrame::Cs(enc) => {
            let t = Transform::new(enc.basis, enc.n)?;
            let cfg = RecoveryConfig {
                sparsity_k: opts.sparsity.unwrap_or_else(|| four_to_one_sparsity(enc.m())).min(enc.m()),
                ..opts.recovery
            };
            let (f, res) = cs_decode_with(enc, &t, opts.solver, &cfg)?;
            Ok((f, !res.converged, DecodeIssues::default()))
        }
        EncodedFrame::Sfft(enc) => {
            let (f, issues) = SfftCodec::new(enc.n)?.decode_checked(enc)?;
            Ok((f, false, issues))
        }
    }
}

pub fn decode_container(c: &Container, opts: &DecodeOptions) -> Result<DecodedSignal> {
    let decoded = c
        .frames
        .par_iter()
        .map(|ef| {
            let start = Instant::now();
            let (frame, unconverged, issues) = decode_frame(ef, opts)?;
            let report = FrameReport { frame_index: frame.index, decode_time: start.elapsed(), unconverged, issues };
            Ok((frame, report))
        })
        .collect::<Result<Vec<_>>>()?;
    let (frames, reports): (Vec<Frame>, Vec<FrameReport>) = decoded.into_iter().unzip();
    let signal = assemble_signal(&frames, c.header.original_len as usize, c.header.sample_rate)?;
    Ok(DecodedSignal { signal, frames: reports })
}
