//! Top-K FFT coding with the bin index carried inside the value words.

use sacx::audio::Frame;
use sacx::metrics::similarity;
use sacx::sfft::{sfft_decode, sfft_encode};

fn main() -> sacx::Result<()> {
    let n = 1024;
    let x: Vec<f64> = (0..n).map(|t| 0.5 * (t as f64 * 0.3).sin() + 0.25 * (t as f64 * 1.1 + 0.4).cos()).collect();
    let frame = Frame::new(0, x.clone());
    for k in [4, 16, 64, 1024] {
        let enc = sfft_encode(&frame, k)?;
        let out = sfft_decode(&enc)?;
        println!("K={k:>4}: {} bits/frame, similarity {:.3e}", enc.bits(), similarity(&x, &out.samples)?);
    }
    let enc = sfft_encode(&frame, 4)?;
    for pc in &enc.packed {
        println!("  words {:#06x} {:#06x} -> bin {}", pc.real_word, pc.imag_word, pc.index());
    }
    Ok(())
}
