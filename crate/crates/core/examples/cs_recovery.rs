//! Compressive sensing of one frame: Gaussian measurements, then OMP and BP.

use sacx::audio::Frame;
use sacx::cs::{measurement_count, CsEncoder};
use sacx::metrics::similarity;
use sacx::recovery::{cs_decode_with, four_to_one_sparsity, RecoveryConfig, Solver};
use sacx::transforms::{BasisKind, Transform};

fn main() -> sacx::Result<()> {
    let n = 512;
    let x: Vec<f64> = (0..n).map(|t| 0.6 * (t as f64 * 0.21).sin() + 0.2 * (t as f64 * 0.9).sin()).collect();
    let frame = Frame::new(0, x.clone());
    for cr in [0.5, 0.75] {
        let m = measurement_count(cr, n)?;
        let enc = CsEncoder { basis: BasisKind::Dct, n, m, master_seed: 1, quant_bits: Some(16) }.encode(&frame)?;
        let t = Transform::new(BasisKind::Dct, n)?;
        for solver in [Solver::Omp, Solver::Bp] {
            let cfg = RecoveryConfig { sparsity_k: four_to_one_sparsity(m), bp_max_iter: 3000, ..RecoveryConfig::default() };
            let (out, res) = cs_decode_with(&enc, &t, solver, &cfg)?;
            println!(
                "C/R {:.0}% M={m} {solver}: similarity {:.3e}, {} iterations, {:.1?}",
                cr * 100.0,
                similarity(&x, &out.samples)?,
                res.iterations,
                res.wall_time
            );
        }
    }
    Ok(())
}
