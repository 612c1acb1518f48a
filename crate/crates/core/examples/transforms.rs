//! Round trip and energy compaction of each basis on a two-tone frame.

use sacx::transforms::{BasisKind, Coefficients, Transform};

fn main() -> sacx::Result<()> {
    let n = 1024;
    let x: Vec<f64> = (0..n).map(|t| (t as f64 * 0.11).sin() + 0.3 * (t as f64 * 0.57).cos()).collect();
    for basis in [BasisKind::Dft, BasisKind::Dct, BasisKind::haar(), BasisKind::db4()] {
        let t = Transform::new(basis, n)?;
        let f = t.forward(&x)?;
        let back = t.inverse(&f)?;
        let err = x.iter().zip(&back).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        let mut mags: Vec<f64> = match &f {
            Coefficients::Real(v) => v.iter().map(|c| c * c).collect(),
            Coefficients::Complex(v) => v.iter().map(|c| c.norm_sqr()).collect(),
        };
        mags.sort_by(|a, b| b.total_cmp(a));
        let top: f64 = mags[..32].iter().sum();
        println!("{basis:>9}: round-trip error {err:.1e}, 32 largest coefficients hold {:.2}% of the energy", 100.0 * top / f.energy());
    }
    Ok(())
}
