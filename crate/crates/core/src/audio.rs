//! WAV ingest/emit and fixed-length framing.

use std::path::Path;

use crate::error::{invalid, Error, Result};

/// Default frame length in samples.
pub const DEFAULT_FRAME_LEN: usize = 1024;

/// Smallest frame length the codec CLI accepts.
pub const MIN_FRAME_LEN: usize = 64;

/// Mono audio with samples normalized to `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioSignal {
    samples: Vec<f64>,
    sample_rate: u32,
}

impl AudioSignal {
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Result<Self> {
        if sample_rate == 0 {
            return Err(invalid("sample rate must be positive"));
        }
        if let Some(s) = samples.iter().find(|s| !(-1.0..=1.0).contains(*s)) {
            return Err(invalid(format!("sample {s} outside [-1, 1]")));
        }
        Ok(Self { samples, sample_rate })
    }

    /// Clips every sample into `[-1, 1]`; NaN maps to zero.
    pub fn from_clipped(samples: Vec<f64>, sample_rate: u32) -> Result<Self> {
        let samples = samples
            .into_iter()
            .map(|s| if s.is_nan() { 0.0 } else { s.clamp(-1.0, 1.0) })
            .collect();
        Self::new(samples, sample_rate)
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }
}

/// One non-overlapping window of `N` samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub index: usize,
    pub samples: Vec<f64>,
}

impl Frame {
    pub fn new(index: usize, samples: Vec<f64>) -> Self {
        Self { index, samples }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LoadOptions {
    /// Average stereo channels to mono instead of rejecting the file.
    pub mixdown: bool,
}

pub fn load_audio(path: impl AsRef<Path>, opts: LoadOptions) -> Result<AudioSignal> {
    let path = path.as_ref();
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    let reader = hound::WavReader::open(path).map_err(map_hound)?;
    let spec = reader.spec();
    if spec.sample_format != hound::SampleFormat::Int {
        return Err(Error::UnsupportedEncoding("floating-point samples (PCM integer only)".into()));
    }
    if !matches!(spec.bits_per_sample, 8 | 16 | 24) {
        return Err(Error::UnsupportedEncoding(format!(
            "{}-bit PCM (8/16/24 supported)",
            spec.bits_per_sample
        )));
    }
    let channels = spec.channels;
    match channels {
        1 => {}
        2 if opts.mixdown => {}
        c => return Err(Error::UnsupportedChannels(c)),
    }
    let full_scale = (1u32 << (spec.bits_per_sample - 1)) as f64;
    let raw: Vec<i32> = reader
        .into_samples::<i32>()
        .collect::<std::result::Result<_, _>>()
        .map_err(map_hound)?;
    let samples = raw
        .chunks(channels as usize)
        .map(|ch| ch.iter().map(|&v| v as f64 / full_scale).sum::<f64>() / ch.len() as f64)
        .collect();
    AudioSignal::new(samples, spec.sample_rate)
}

/// Writes 16-bit mono PCM.
pub fn save_audio(signal: &AudioSignal, path: impl AsRef<Path>) -> Result<()> {
    save_audio_with_depth(signal, path, 16)
}

pub fn save_audio_with_depth(signal: &AudioSignal, path: impl AsRef<Path>, bits: u16) -> Result<()> {
    if !matches!(bits, 8 | 16 | 24) {
        return Err(invalid(format!("unsupported bit depth {bits}")));
    }
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: signal.sample_rate,
        bits_per_sample: bits,
        sample_format: hound::SampleFormat::Int,
    };
    let mut writer = hound::WavWriter::create(path, spec).map_err(map_hound)?;
    for &s in &signal.samples {
        let q = quantize_sample(s, bits);
        match bits {
            8 => writer.write_sample(q as i8),
            16 => writer.write_sample(q as i16),
            _ => writer.write_sample(q),
        }
        .map_err(map_hound)?;
    }
    writer.finalize().map_err(map_hound)?;
    Ok(())
}

/// `round(s · 2^(bits-1))`, saturated to the signed range.
pub fn quantize_sample(s: f64, bits: u16) -> i32 {
    let full = (1i64 << (bits - 1)) as f64;
    (s * full).round().clamp(-full, full - 1.0) as i32
}

fn map_hound(e: hound::Error) -> Error {
    match e {
        hound::Error::IoError(io) if io.kind() == std::io::ErrorKind::UnexpectedEof => {
            Error::CorruptHeader(io.to_string())
        }
        hound::Error::IoError(io) => Error::Io(io),
        hound::Error::FormatError(msg) => Error::CorruptHeader(msg.to_string()),
        hound::Error::Unsupported => Error::UnsupportedEncoding("unsupported WAV variant".into()),
        other => Error::CorruptHeader(other.to_string()),
    }
}

/// Splits into `ceil(len / frame_len)` frames, zero-padding the last one.
pub fn frame_signal(signal: &AudioSignal, frame_len: usize) -> Result<Vec<Frame>> {
    if frame_len == 0 || !frame_len.is_power_of_two() {
        return Err(invalid(format!("frame length {frame_len} is not a power of two")));
    }
    if signal.is_empty() {
        return Err(invalid("cannot frame an empty signal"));
    }
    Ok(signal
        .samples
        .chunks(frame_len)
        .enumerate()
        .map(|(index, chunk)| {
            let mut samples = chunk.to_vec();
            samples.resize(frame_len, 0.0);
            Frame { index, samples }
        })
        .collect())
}

/// Concatenates consecutive frames, truncates to `original_len`, and clips to `[-1, 1]`.
pub fn assemble_signal(frames: &[Frame], original_len: usize, sample_rate: u32) -> Result<AudioSignal> {
    let mut out = Vec::with_capacity(frames.iter().map(Frame::len).sum());
    for (expected, frame) in frames.iter().enumerate() {
        if frame.index != expected {
            return Err(Error::NonContiguousFrames { expected, found: frame.index });
        }
        out.extend_from_slice(&frame.samples);
    }
    if original_len > out.len() {
        return Err(invalid(format!(
            "original length {original_len} exceeds {} framed samples",
            out.len()
        )));
    }
    out.truncate(original_len);
    AudioSignal::from_clipped(out, sample_rate)
}
