//! Sublinear sparse FFT: locate planted tones and compare run time across N.

use std::f64::consts::PI;
use std::time::Instant;

use sacx::audio::Frame;
use sacx::sfft::sublinear::{SublinearParams, SublinearPlan};

fn main() -> sacx::Result<()> {
    let k = 8;
    for n in [1024usize, 4096, 16384] {
        let bins: Vec<usize> = (0..k / 2).map(|i| (n / 16) * (i + 1) + 3 * i).collect();
        let x: Vec<f64> = (0..n)
            .map(|t| bins.iter().map(|&f| (2.0 * PI * (f * t) as f64 / n as f64).cos()).sum())
            .collect();
        let plan = SublinearPlan::new(n, k, SublinearParams::default())?;
        let frame = Frame::new(0, x);
        let est = plan.top_k(&frame)?;
        let reps = 50;
        let start = Instant::now();
        for _ in 0..reps {
            plan.top_k(&frame)?;
        }
        println!(
            "N={n:>5} B={:>3} w={:>4}: found {:?} in {:.2?}",
            plan.filter().bucket_count(),
            plan.filter().width(),
            est.spectrum.indices(),
            start.elapsed() / reps
        );
    }
    Ok(())
}
