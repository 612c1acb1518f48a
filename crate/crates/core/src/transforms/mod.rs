//! Orthonormal sparsifying transforms: unitary DFT, orthonormal DCT-II and a
//! periodized orthonormal DWT (Haar or 4-tap Daubechies).
//!
//! Every transform satisfies `x = Ψ f` with `Ψ` orthonormal (unitary for the
//! DFT), so `inverse(forward(x)) = x` and Parseval holds exactly up to
//! rounding.
//!
//! Real-valued solvers see DFT coefficients through a *stacked* layout of
//! length `2N`: `[Re f₀ … Re f_{N−1}, Im f₀ … Im f_{N−1}]`, with the synthesis
//! map `x = Re(Ψ f)`.

mod dct;
mod dwt;
mod matrix;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::audio::Frame;
use crate::error::{invalid, Error, Result};

pub use dwt::WaveletFamily;
pub use matrix::{basis_matrix, stacked_basis_matrix, BasisMatrix, ComplexMatrix, MAX_DENSE_BASIS};

/// Which orthonormal basis `Ψ` a frame is expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BasisKind {
    Dft,
    Dct,
    /// `levels: None` means full decomposition (`log2 N` levels).
    Dwt { family: WaveletFamily, levels: Option<u32> },
}

impl BasisKind {
    pub const fn haar() -> Self {
        BasisKind::Dwt { family: WaveletFamily::Haar, levels: None }
    }

    pub const fn db4() -> Self {
        BasisKind::Dwt { family: WaveletFamily::Daubechies4, levels: None }
    }

    /// Bases swept by the benchmarks, in table order (DWT, DCT, DFT).
    pub fn benchmark_bases() -> [BasisKind; 3] {
        [BasisKind::haar(), BasisKind::Dct, BasisKind::Dft]
    }

    pub fn is_complex(&self) -> bool {
        matches!(self, BasisKind::Dft)
    }

    /// Length of the real coefficient vector solvers operate on.
    pub fn stacked_len(&self, n: usize) -> usize {
        if self.is_complex() {
            2 * n
        } else {
            n
        }
    }

    /// Effective DWT depth for frame length `n`, validated.
    pub fn dwt_levels(&self, n: usize) -> Result<Option<u32>> {
        match *self {
            BasisKind::Dwt { levels, .. } => {
                let max = n.trailing_zeros();
                let lv = levels.unwrap_or(max);
                if lv == 0 || lv > max {
                    return Err(invalid(format!("dwt levels {lv} outside 1..={max} for N={n}")));
                }
                Ok(Some(lv))
            }
            _ => Ok(None),
        }
    }

    /// Wire tag: 0 DFT, 1 DCT, 2 Haar DWT, 3 Daubechies-4 DWT.
    pub fn tag(&self) -> u8 {
        match self {
            BasisKind::Dft => 0,
            BasisKind::Dct => 1,
            BasisKind::Dwt { family: WaveletFamily::Haar, .. } => 2,
            BasisKind::Dwt { family: WaveletFamily::Daubechies4, .. } => 3,
        }
    }

    /// Wire encoding of the DWT depth: 0 means full decomposition.
    pub fn levels_byte(&self) -> u8 {
        match self {
            BasisKind::Dwt { levels: Some(l), .. } => *l as u8,
            _ => 0,
        }
    }

    pub fn from_wire(tag: u8, levels: u8) -> Result<Self> {
        let levels = (levels != 0).then_some(levels as u32);
        Ok(match tag {
            0 => BasisKind::Dft,
            1 => BasisKind::Dct,
            2 => BasisKind::Dwt { family: WaveletFamily::Haar, levels },
            3 => BasisKind::Dwt { family: WaveletFamily::Daubechies4, levels },
            t => return Err(Error::CorruptContainer(format!("unknown basis tag {t}"))),
        })
    }
}

impl fmt::Display for BasisKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BasisKind::Dft => f.write_str("dft"),
            BasisKind::Dct => f.write_str("dct"),
            BasisKind::Dwt { family, levels } => {
                write!(f, "dwt-{family}")?;
                if let Some(l) = levels {
                    write!(f, ":{l}")?;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for BasisKind {
    type Err = Error;

    /// Accepts `dft`, `dct`, `dwt`/`haar`, `db4`, with an optional `:levels` suffix on DWT names.
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        let (name, levels) = match lower.split_once(':') {
            Some((n, l)) => {
                let l: u32 = l.parse().map_err(|_| invalid(format!("bad dwt levels in {s:?}")))?;
                (n.to_string(), Some(l))
            }
            None => (lower, None),
        };
        let family = match name.as_str() {
            "dft" | "fft" if levels.is_none() => return Ok(BasisKind::Dft),
            "dct" if levels.is_none() => return Ok(BasisKind::Dct),
            "dwt" | "haar" | "dwt-haar" => WaveletFamily::Haar,
            "db4" | "dwt-db4" => WaveletFamily::Daubechies4,
            _ => return Err(invalid(format!("unknown basis {s:?}"))),
        };
        Ok(BasisKind::Dwt { family, levels })
    }
}

/// Transform-domain coefficients `f`.
#[derive(Debug, Clone, PartialEq)]
pub enum Coefficients {
    Real(Vec<f64>),
    Complex(Vec<Complex64>),
}

impl Coefficients {
    pub fn len(&self) -> usize {
        match self {
            Coefficients::Real(v) => v.len(),
            Coefficients::Complex(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn energy(&self) -> f64 {
        match self {
            Coefficients::Real(v) => v.iter().map(|c| c * c).sum(),
            Coefficients::Complex(v) => v.iter().map(|c| c.norm_sqr()).sum(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralVector {
    pub basis: BasisKind,
    pub frame_index: usize,
    pub coefficients: Coefficients,
}

/// A planned transform for one `(basis, N)` pair. Twiddles and filters are
/// fixed at construction; the plan is `Send + Sync` and reusable.
#[derive(Clone)]
pub struct Transform {
    basis: BasisKind,
    n: usize,
    kind: Plan,
}

#[derive(Clone)]
enum Plan {
    Dft { fwd: Arc<dyn Fft<f64>>, inv: Arc<dyn Fft<f64>> },
    Dct(dct::Dct),
    Dwt(dwt::Dwt),
}

impl fmt::Debug for Transform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Transform").field("basis", &self.basis).field("n", &self.n).finish()
    }
}

impl Transform {
    pub fn new(basis: BasisKind, n: usize) -> Result<Self> {
        if n < 2 || !n.is_power_of_two() {
            return Err(invalid(format!("transform length {n} must be a power of two ≥ 2")));
        }
        let kind = match basis {
            BasisKind::Dft => {
                let mut planner = FftPlanner::new();
                Plan::Dft { fwd: planner.plan_fft_forward(n), inv: planner.plan_fft_inverse(n) }
            }
            BasisKind::Dct => Plan::Dct(dct::Dct::new(n)),
            BasisKind::Dwt { family, .. } => {
                let levels = basis.dwt_levels(n)?.expect("dwt levels");
                Plan::Dwt(dwt::Dwt::new(family, n, levels))
            }
        };
        Ok(Self { basis, n, kind })
    }

    pub fn basis(&self) -> BasisKind {
        self.basis
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn check(&self, len: usize) -> Result<()> {
        if len != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, actual: len });
        }
        Ok(())
    }

    pub fn forward(&self, x: &[f64]) -> Result<Coefficients> {
        self.check(x.len())?;
        Ok(match &self.kind {
            Plan::Dft { fwd, .. } => {
                let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
                fwd.process(&mut buf);
                let s = 1.0 / (self.n as f64).sqrt();
                buf.iter_mut().for_each(|c| *c *= s);
                Coefficients::Complex(buf)
            }
            Plan::Dct(d) => Coefficients::Real(d.forward(x)),
            Plan::Dwt(w) => Coefficients::Real(w.forward(x)),
        })
    }

    /// Synthesis `x = Ψ f`; for complex coefficients the real part is returned.
    pub fn inverse(&self, f: &Coefficients) -> Result<Vec<f64>> {
        self.check(f.len())?;
        match (&self.kind, f) {
            (Plan::Dft { inv, .. }, Coefficients::Complex(c)) => {
                Ok(self.inverse_complex(inv.as_ref(), c.clone()).into_iter().map(|c| c.re).collect())
            }
            (Plan::Dct(d), Coefficients::Real(c)) => Ok(d.inverse(c)),
            (Plan::Dwt(w), Coefficients::Real(c)) => Ok(w.inverse(c)),
            _ => Err(invalid(format!("coefficient kind does not match basis {}", self.basis))),
        }
    }

    fn inverse_complex(&self, inv: &dyn Fft<f64>, mut buf: Vec<Complex64>) -> Vec<Complex64> {
        inv.process(&mut buf);
        let s = 1.0 / (self.n as f64).sqrt();
        buf.iter_mut().for_each(|c| *c *= s);
        buf
    }

    /// Forward transform into the real stacked layout used by the solvers.
    pub fn forward_stacked(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(match self.forward(x)? {
            Coefficients::Real(v) => v,
            Coefficients::Complex(c) => stack(&c),
        })
    }

    /// Synthesis from the stacked layout.
    pub fn inverse_stacked(&self, s: &[f64]) -> Result<Vec<f64>> {
        let expected = self.basis.stacked_len(self.n);
        if s.len() != expected {
            return Err(Error::DimensionMismatch { expected, actual: s.len() });
        }
        let coeffs = if self.basis.is_complex() {
            Coefficients::Complex(unstack(s))
        } else {
            Coefficients::Real(s.to_vec())
        };
        self.inverse(&coeffs)
    }

    /// One row of `A = Φ Ψ` in stacked layout, given a row `φ` of `Φ`.
    ///
    /// Real bases: `(Ψᵀ φ)`, i.e. the forward transform of `φ`. DFT: `φᵀ Ψ`
    /// is the unitary inverse DFT of `φ`, stacked as `[Re, −Im]` so that
    /// `Re(φᵀ Ψ f)` equals the stacked inner product.
    pub fn sensing_row(&self, phi_row: &[f64]) -> Result<Vec<f64>> {
        self.check(phi_row.len())?;
        match &self.kind {
            Plan::Dft { inv, .. } => {
                let buf: Vec<Complex64> = phi_row.iter().map(|&v| Complex64::new(v, 0.0)).collect();
                let row = self.inverse_complex(inv.as_ref(), buf);
                let mut out = Vec::with_capacity(2 * self.n);
                out.extend(row.iter().map(|c| c.re));
                out.extend(row.iter().map(|c| -c.im));
                Ok(out)
            }
            _ => self.forward_stacked(phi_row),
        }
    }
}

pub fn stack(c: &[Complex64]) -> Vec<f64> {
    c.iter().map(|v| v.re).chain(c.iter().map(|v| v.im)).collect()
}

pub fn unstack(s: &[f64]) -> Vec<Complex64> {
    let n = s.len() / 2;
    (0..n).map(|k| Complex64::new(s[k], s[n + k])).collect()
}

/// `f` such that `x = Ψ f`.
pub fn forward(frame: &Frame, basis: BasisKind) -> Result<SpectralVector> {
    let t = Transform::new(basis, frame.len())?;
    Ok(SpectralVector { basis, frame_index: frame.index, coefficients: t.forward(&frame.samples)? })
}

pub fn inverse(spec: &SpectralVector) -> Result<Frame> {
    let t = Transform::new(spec.basis, spec.coefficients.len())?;
    Ok(Frame::new(spec.frame_index, t.inverse(&spec.coefficients)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_bases() -> Vec<BasisKind> {
        vec![BasisKind::Dft, BasisKind::Dct, BasisKind::haar(), BasisKind::db4()]
    }

    fn noise(n: usize, seed: u64) -> Vec<f64> {
        let mut g = crate::rng::GaussianStream::new(seed);
        (0..n).map(|_| g.next_gaussian()).collect()
    }

    #[test]
    fn zero_frame_gives_zero_coefficients() {
        for b in all_bases() {
            let spec = forward(&Frame::new(0, vec![0.0; 64]), b).unwrap();
            assert_eq!(spec.coefficients.energy(), 0.0, "{b}");
        }
    }

    #[test]
    fn constant_frame_dft_dc() {
        let c = 0.3;
        let spec = forward(&Frame::new(0, vec![c; 256]), BasisKind::Dft).unwrap();
        let Coefficients::Complex(v) = spec.coefficients else { panic!() };
        assert!((v[0].re - 16.0 * c).abs() < 1e-12);
        assert!(v[1..].iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn dft_impulse_inverse_is_constant() {
        let n = 128;
        let mut c = vec![Complex64::new(0.0, 0.0); n];
        c[0] = Complex64::new(1.0, 0.0);
        let spec = SpectralVector { basis: BasisKind::Dft, frame_index: 3, coefficients: Coefficients::Complex(c) };
        let frame = inverse(&spec).unwrap();
        assert_eq!(frame.index, 3);
        let expect = 1.0 / (n as f64).sqrt();
        assert!(frame.samples.iter().all(|&s| (s - expect).abs() < 1e-14));
    }

    #[test]
    fn round_trip_and_parseval() {
        for b in all_bases() {
            for n in [2usize, 4, 64, 1024] {
                let x = noise(n, n as u64);
                let t = Transform::new(b, n).unwrap();
                let f = t.forward(&x).unwrap();
                let ex: f64 = x.iter().map(|v| v * v).sum();
                assert!((f.energy() - ex).abs() <= 1e-9 * ex, "{b} n={n}");
                let back = t.inverse(&f).unwrap();
                let err = x.iter().zip(&back).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                assert!(err < 1e-10, "{b} n={n} err={err}");
            }
        }
    }

    #[test]
    fn stacked_round_trip() {
        let x = noise(64, 5);
        for b in all_bases() {
            let t = Transform::new(b, 64).unwrap();
            let s = t.forward_stacked(&x).unwrap();
            assert_eq!(s.len(), b.stacked_len(64));
            let back = t.inverse_stacked(&s).unwrap();
            assert!(x.iter().zip(&back).all(|(a, b)| (a - b).abs() < 1e-12));
        }
    }

    #[test]
    fn size_mismatch_and_bad_levels() {
        let t = Transform::new(BasisKind::Dct, 64).unwrap();
        assert!(matches!(t.forward(&[0.0; 32]), Err(Error::DimensionMismatch { .. })));
        let deep = BasisKind::Dwt { family: WaveletFamily::Haar, levels: Some(7) };
        assert!(Transform::new(deep, 64).is_err());
        let zero = BasisKind::Dwt { family: WaveletFamily::Haar, levels: Some(0) };
        assert!(Transform::new(zero, 64).is_err());
        assert!(Transform::new(BasisKind::Dct, 48).is_err());
    }

    #[test]
    fn partial_depth_dwt_round_trips() {
        let x = noise(256, 2);
        for family in [WaveletFamily::Haar, WaveletFamily::Daubechies4] {
            for levels in 1..=8 {
                let b = BasisKind::Dwt { family, levels: Some(levels) };
                let t = Transform::new(b, 256).unwrap();
                let back = t.inverse(&t.forward(&x).unwrap()).unwrap();
                assert!(x.iter().zip(&back).all(|(a, b)| (a - b).abs() < 1e-12), "{b}");
            }
        }
    }

    #[test]
    fn basis_names_parse_back() {
        for b in all_bases()
            .into_iter()
            .chain([BasisKind::Dwt { family: WaveletFamily::Daubechies4, levels: Some(3) }])
        {
            assert_eq!(b.to_string().parse::<BasisKind>().unwrap(), b);
            assert_eq!(BasisKind::from_wire(b.tag(), b.levels_byte()).unwrap(), b);
        }
        assert!("wavelet".parse::<BasisKind>().is_err());
    }
}
