//! Brute-force sparsest solution on a tiny instance, compared with OMP and BP.

use sacx::linalg::Matrix;
use sacx::recovery::{basis_pursuit, l0_oracle, omp, RecoveryConfig};
use sacx::rng::GaussianStream;

fn main() -> sacx::Result<()> {
    let (m, n) = (8, 16);
    let mut g = GaussianStream::new(3);
    let a = Matrix::from_fn(m, n, |_, _| g.next_gaussian() / (m as f64).sqrt());
    let mut f = vec![0.0; n];
    f[2] = 1.0;
    f[9] = -0.7;
    f[13] = 0.4;
    let y = a.mul_vec(&f);
    let oracle = l0_oracle(&a, &y, 3)?;
    let o = omp(&a, &y, &RecoveryConfig::with_sparsity(3))?;
    let b = basis_pursuit(&a, &y, &RecoveryConfig::default())?;
    println!("planted support [2, 9, 13]");
    println!("l0 oracle {:?}, OMP {:?}, BP {:?}", oracle.sorted_support(), o.sorted_support(), b.sorted_support());
    Ok(())
}
