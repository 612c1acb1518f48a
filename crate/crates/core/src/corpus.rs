//! Deterministic synthetic test signals used by the benchmarks and examples.

use std::f64::consts::PI;

use crate::audio::AudioSignal;
use crate::error::Result;
use crate::rng::GaussianStream;

pub const CORPUS_SAMPLE_RATE: u32 = 16_000;

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusSignal {
    pub name: &'static str,
    pub signal: AudioSignal,
}

/// Five off-bin sinusoids with slow amplitude modulation over a low noise floor.
pub fn multitone(len: usize, seed: u64) -> Result<AudioSignal> {
    let fs = CORPUS_SAMPLE_RATE as f64;
    let tones = [(220.0, 0.30), (440.7, 0.22), (1337.3, 0.15), (2500.9, 0.10), (3901.1, 0.06)];
    let mut rng = GaussianStream::new(seed);
    let samples = (0..len)
        .map(|t| {
            let time = t as f64 / fs;
            let mut v: f64 = tones
                .iter()
                .enumerate()
                .map(|(i, &(f, a))| a * (1.0 + 0.3 * (2.0 * PI * (0.5 + i as f64 * 0.3) * time).sin()) * (2.0 * PI * f * time + i as f64).sin())
                .sum();
            v += 0.003 * rng.next_gaussian();
            v
        })
        .collect();
    normalized(samples)
}

/// A plucked melody with harmonics, a bass line, vibrato and noisy
/// percussion hits.
pub fn music_like(len: usize, seed: u64) -> Result<AudioSignal> {
    let fs = CORPUS_SAMPLE_RATE as f64;
    let note_len = (0.25 * fs) as usize;
    // Semitones above A3 for a repeating eight-note phrase.
    let melody = [0, 3, 7, 12, 10, 7, 5, 3];
    let bass = [-12, -12, -7, -7, -9, -9, -5, -5];
    let mut rng = GaussianStream::new(seed);
    let mut hit = 0.0f64;
    let samples = (0..len)
        .map(|t| {
            let time = t as f64 / fs;
            let note = (t / note_len) % melody.len();
            let age = (t % note_len) as f64 / fs;
            let env = (1.0 - (-age * 200.0).exp()) * (-age * 6.0).exp();
            let f0 = 220.0 * 2f64.powf(melody[note] as f64 / 12.0) * (1.0 + 0.004 * (2.0 * PI * 5.0 * time).sin());
            let lead: f64 = (1..=6).map(|h| (2.0 * PI * f0 * h as f64 * time).sin() / h as f64).sum();
            let fb = 220.0 * 2f64.powf(bass[note] as f64 / 12.0);
            let low = (2.0 * PI * fb * time).sin() + 0.3 * (4.0 * PI * fb * time).sin();
            if t % (2 * note_len) == 0 {
                hit = 1.0;
            }
            hit *= 0.9985;
            0.25 * env * lead + 0.2 * low + 0.08 * hit * rng.next_gaussian() + 0.002 * rng.next_gaussian()
        })
        .collect();
    normalized(samples)
}

fn normalized(mut samples: Vec<f64>) -> Result<AudioSignal> {
    let peak = samples.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak > 0.0 {
        samples.iter_mut().for_each(|v| *v *= 0.9 / peak);
    }
    AudioSignal::new(samples, CORPUS_SAMPLE_RATE)
}

/// The built-in corpus, each signal `frames × frame_len` samples long.
pub fn bundled_corpus(frames: usize, frame_len: usize) -> Result<Vec<CorpusSignal>> {
    let len = frames * frame_len;
    Ok(vec![
        CorpusSignal { name: "multitone", signal: multitone(len, 1)? },
        CorpusSignal { name: "music", signal: music_like(len, 2)? },
    ])
}
