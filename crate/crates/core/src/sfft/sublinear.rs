//! Sublinear-time search for the largest Fourier coefficients: permute the
//! spectrum, bin it through a flat window into `B` buckets, keep the loud
//! buckets and vote over several independent rounds.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::SparseSpectrum;
use crate::audio::Frame;
use crate::error::{invalid, Error, Result};
use crate::rng::GaussianStream;

pub const DEFAULT_ROUNDS: usize = 4;
pub const DEFAULT_DELTA: f64 = 0.01;
/// Buckets below this fraction of the loudest bucket never vote.
const SILENT_BUCKET: f64 = 1e-12;
const BOX_SEARCH_STEPS: usize = 48;
const REFINE_SWEEPS: usize = 3;
/// Admitted frequencies refined below this fraction of the largest are dropped.
const NEGLIGIBLE: f64 = 1e-3;

/// Symmetric real window whose spectrum is flat over one bucket and small
/// beyond [`FlatWindowFilter::stopband_edge`].
#[derive(Clone)]
pub struct FlatWindowFilter {
    n: usize,
    buckets: usize,
    delta: f64,
    /// Taps at time offsets `-h..=h`, `h = (w - 1) / 2`.
    taps: Vec<f64>,
    freq_response: Vec<f64>,
    stopband_edge: usize,
    bucket_fft: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for FlatWindowFilter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FlatWindowFilter")
            .field("n", &self.n)
            .field("buckets", &self.buckets)
            .field("width", &self.taps.len())
            .field("delta", &self.delta)
            .field("stopband_edge", &self.stopband_edge)
            .finish()
    }
}

impl FlatWindowFilter {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bucket_count(&self) -> usize {
        self.buckets
    }

    pub fn width(&self) -> usize {
        self.taps.len()
    }

    pub fn time_taps(&self) -> &[f64] {
        &self.taps
    }

    /// `Ĝ(ξ) = Σ_t g_t e^{-2πi tξ/N}` for `ξ = 0..N`; real because the taps are symmetric.
    pub fn freq_response(&self) -> &[f64] {
        &self.freq_response
    }

    /// Response at a signed bin offset.
    pub fn response_at(&self, offset: isize) -> f64 {
        self.freq_response[offset.rem_euclid(self.n as isize) as usize]
    }

    /// Bins per bucket, `N / B`; the passband is `|offset| ≤ N / 2B`.
    pub fn passband_width(&self) -> usize {
        self.n / self.buckets
    }

    pub fn passband_half_width(&self) -> usize {
        self.n / (2 * self.buckets)
    }

    /// Smallest offset from which `|Ĝ| ≤ δ` holds out to `N / 2`.
    pub fn stopband_edge(&self) -> usize {
        self.stopband_edge
    }

    pub fn leakage_bound(&self) -> f64 {
        self.delta
    }
}

struct Design {
    taps: Vec<f64>,
    response: Vec<f64>,
    stopband_edge: usize,
}

/// Gaussian (σ = w/4) times the kernel of a box of half-width `c` bins, summing to 1.
fn window_taps(n: usize, w: usize, c: f64) -> Vec<f64> {
    let h = (w - 1) as isize / 2;
    let sigma = w as f64 / 4.0;
    let mut taps: Vec<f64> = (-h..=h)
        .map(|t| {
            let t = t as f64;
            let kernel = if t == 0.0 { 2.0 * c / n as f64 } else { (2.0 * PI * c * t / n as f64).sin() / (PI * t) };
            kernel * (-0.5 * (t / sigma).powi(2)).exp()
        })
        .collect();
    let sum: f64 = taps.iter().sum();
    taps.iter_mut().for_each(|g| *g /= sum);
    taps
}

fn response(fft: &dyn Fft<f64>, n: usize, taps: &[f64]) -> Vec<f64> {
    let h = (taps.len() - 1) as isize / 2;
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for (j, &g) in taps.iter().enumerate() {
        buf[(j as isize - h).rem_euclid(n as isize) as usize] = Complex64::new(g, 0.0);
    }
    fft.process(&mut buf);
    buf.into_iter().map(|c| c.re).collect()
}

/// Narrowest box meeting the passband for width `w`, with its measured stopband.
fn design(fft: &dyn Fft<f64>, n: usize, b: usize, delta: f64, w: usize) -> Design {
    let pass = n / (2 * b);
    let passes = |r: &[f64]| (0..=pass).all(|off| r[off] >= 1.0 - delta);
    let (mut lo, mut hi) = (0.5 * pass as f64, n as f64 / 4.0);
    for _ in 0..BOX_SEARCH_STEPS {
        let mid = 0.5 * (lo + hi);
        if passes(&response(fft, n, &window_taps(n, w, mid))) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let taps = window_taps(n, w, hi);
    let response = response(fft, n, &taps);
    let loud = (0..=n / 2).rev().find(|&off| response[off].abs() > delta);
    let stopband_edge = loud.map_or(0, |off| off + 1);
    Design { taps, response, stopband_edge }
}

fn smallest_width(fft: &dyn Fft<f64>, n: usize, b: usize, delta: f64, max_w: usize) -> Option<(usize, Design)> {
    let target = 3 * n / (2 * b);
    let ok = |w| {
        let d = design(fft, n, b, delta, w);
        (d.stopband_edge <= target).then_some(d)
    };
    let top = if max_w.is_multiple_of(2) { max_w - 1 } else { max_w };
    let mut best = (top, ok(top)?);
    // odd widths 2i + 1
    let (mut lo, mut hi) = (1usize, top / 2);
    while lo < hi {
        let mid = (lo + hi) / 2;
        match ok(2 * mid + 1) {
            Some(d) => {
                best = (2 * mid + 1, d);
                hi = mid;
            }
            None => lo = mid + 1,
        }
    }
    Some(best)
}

/// Flat window for `n` bins and `b` buckets: passband response `≥ 1 − δ` for
/// `|offset| ≤ n/2b`, `|Ĝ| ≤ δ` from an offset of at most `3n/2b`, and the
/// shortest odd length with `w ≤ n/4` that achieves both.
pub fn build_flat_filter(n: usize, b: usize, delta: f64) -> Result<FlatWindowFilter> {
    if !n.is_power_of_two() || n < 8 {
        return Err(invalid(format!("filter length {n} must be a power of two ≥ 8")));
    }
    if !b.is_power_of_two() || b < 2 || b >= n {
        return Err(invalid(format!("bucket count {b} must be a power of two in [2, {n})")));
    }
    if !(delta > 0.0 && delta < 0.5) {
        return Err(invalid(format!("leakage bound {delta} outside (0, 0.5)")));
    }
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(n);
    let Some((_, d)) = smallest_width(fft.as_ref(), n, b, delta, n / 4) else {
        let needed = smallest_width(fft.as_ref(), n, b, delta, n).map(|(w, _)| w.to_string());
        return Err(invalid(format!(
            "flat filter infeasible for N={n}, B={b}, δ={delta}: needs width {} > N/4",
            needed.as_deref().unwrap_or("beyond N")
        )));
    };
    Ok(FlatWindowFilter {
        n,
        buckets: b,
        delta,
        taps: d.taps,
        freq_response: d.response,
        stopband_edge: d.stopband_edge,
        bucket_fft: planner.plan_fft_forward(b),
    })
}

/// Spectral permutation: sample `i` of the permuted signal is `x[(σi + τ) mod N]`,
/// which moves bin `f` to `σf mod N` with phase `e^{2πiτf/N}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Permutation {
    n: usize,
    sigma: usize,
    sigma_inv: usize,
    tau: usize,
}

impl Permutation {
    pub fn new(n: usize, sigma: usize, tau: usize) -> Result<Self> {
        if !n.is_power_of_two() {
            return Err(invalid(format!("permutation length {n} must be a power of two")));
        }
        if sigma.is_multiple_of(2) {
            return Err(invalid(format!("sigma {sigma} must be odd")));
        }
        let s = sigma as u64;
        // Newton iteration for the inverse modulo 2^64.
        let mut inv = s;
        for _ in 0..6 {
            inv = inv.wrapping_mul(2u64.wrapping_sub(s.wrapping_mul(inv)));
        }
        let mask = n as u64 - 1;
        Ok(Self { n, sigma: sigma & (n - 1), sigma_inv: (inv & mask) as usize, tau: tau & (n - 1) })
    }

    pub fn random(n: usize, rng: &mut GaussianStream) -> Result<Self> {
        let sigma = (rng.next_u64() as usize % n) | 1;
        let tau = rng.next_u64() as usize % n;
        Self::new(n, sigma, tau)
    }

    pub fn sigma(&self) -> usize {
        self.sigma
    }

    pub fn tau(&self) -> usize {
        self.tau
    }

    pub fn sample_index(&self, i: usize) -> usize {
        (self.sigma * i + self.tau) & (self.n - 1)
    }

    pub fn permuted_bin(&self, f: usize) -> usize {
        (self.sigma * f) & (self.n - 1)
    }

    pub fn original_bin(&self, p: usize) -> usize {
        (self.sigma_inv * p) & (self.n - 1)
    }

    /// `e^{2πiτf/N}`.
    pub fn phase(&self, f: usize) -> Complex64 {
        let k = (self.tau * f) & (self.n - 1);
        Complex64::from_polar(1.0, 2.0 * PI * k as f64 / self.n as f64)
    }
}

/// One round of binning: `values[b] = Σ_f X_f e^{2πiτf/N} Ĝ(bN/B − σf)`, with
/// `X` the unitary spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct BucketSketch {
    pub values: Vec<Complex64>,
    pub perm: Permutation,
    pub round_id: usize,
}

fn hash_with(at: impl Fn(usize) -> Complex64, filt: &FlatWindowFilter, perm: Permutation, round_id: usize) -> BucketSketch {
    let (n, b) = (filt.n as isize, filt.buckets as isize);
    let h = (filt.taps.len() - 1) as isize / 2;
    let mut u = vec![Complex64::new(0.0, 0.0); filt.buckets];
    for (j, &g) in filt.taps.iter().enumerate() {
        let t = j as isize - h;
        let i = t.rem_euclid(n) as usize;
        u[t.rem_euclid(b) as usize] += at(perm.sample_index(i)) * g;
    }
    filt.bucket_fft.process(&mut u);
    let s = (filt.n as f64).sqrt();
    u.iter_mut().for_each(|v| *v *= s);
    BucketSketch { values: u, perm, round_id }
}

fn check_perm(filt: &FlatWindowFilter, perm: &Permutation, len: usize) -> Result<()> {
    if len != filt.n {
        return Err(Error::DimensionMismatch { expected: filt.n, actual: len });
    }
    if perm.n != filt.n {
        return Err(invalid("permutation length does not match the filter"));
    }
    Ok(())
}

/// Bins a real frame in `O(w + B log B)`.
pub fn hash_to_bins(frame: &Frame, filt: &FlatWindowFilter, perm: Permutation) -> Result<BucketSketch> {
    hash_to_bins_round(frame, filt, perm, 0)
}

pub fn hash_to_bins_round(frame: &Frame, filt: &FlatWindowFilter, perm: Permutation, round_id: usize) -> Result<BucketSketch> {
    check_perm(filt, &perm, frame.len())?;
    let x = &frame.samples;
    Ok(hash_with(|i| Complex64::new(x[i], 0.0), filt, perm, round_id))
}

pub fn hash_to_bins_complex(x: &[Complex64], filt: &FlatWindowFilter, perm: Permutation, round_id: usize) -> Result<BucketSketch> {
    check_perm(filt, &perm, x.len())?;
    Ok(hash_with(|i| x[i], filt, perm, round_id))
}

/// Bucket nearest to a permuted position, and the signed offset from its center.
fn bucket_of(filt: &FlatWindowFilter, p: usize) -> (usize, isize) {
    let width = filt.n / filt.buckets;
    let b = ((p + width / 2) / width) % filt.buckets;
    let mut off = p as isize - (b * width) as isize;
    if off > filt.n as isize / 2 {
        off -= filt.n as isize;
    }
    (b, off)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SublinearEstimate {
    pub spectrum: SparseSpectrum,
    /// Frequencies that collected enough votes.
    pub candidates: usize,
    /// False when fewer than `k` frequencies were accepted.
    pub complete: bool,
}

fn keep_largest(est: &mut Vec<(usize, Complex64)>, k: usize) {
    if est.len() > k {
        est.select_nth_unstable_by(k - 1, |a, b| b.1.norm_sqr().total_cmp(&a.1.norm_sqr()).then(a.0.cmp(&b.0)));
        est.truncate(k);
    }
    est.sort_unstable_by_key(|e| e.0);
}

fn max_stages(k: usize) -> usize {
    2 * (k.ilog2() as usize + 1) + k.min(8)
}

/// Frequencies landing in one of the `2k` loudest buckets in at least `quorum` rounds, ascending.
fn vote(sketches: &[BucketSketch], values: &[Vec<Complex64>], filt: &FlatWindowFilter, k: usize, quorum: usize) -> Vec<usize> {
    let width = filt.n / filt.buckets;
    let mut votes: HashMap<usize, usize> = HashMap::new();
    let loudest_raw = sketches.iter().flat_map(|s| s.values.iter()).fold(0.0f64, |m, v| m.max(v.norm_sqr()));
    let floor = SILENT_BUCKET * SILENT_BUCKET * loudest_raw;
    for (sketch, v) in sketches.iter().zip(values) {
        let mags: Vec<f64> = v.iter().map(|v| v.norm_sqr()).collect();
        let mut live: Vec<usize> = (0..filt.buckets).filter(|&b| mags[b] > floor).collect();
        let keep = (2 * k).min(live.len());
        if keep == 0 {
            continue;
        }
        if keep < live.len() {
            live.select_nth_unstable_by(keep - 1, |&a, &b| mags[b].total_cmp(&mags[a]).then(a.cmp(&b)));
            live.truncate(keep);
        }
        for b in live {
            let start = (b * width + filt.n - width / 2) % filt.n;
            for j in 0..width {
                let f = sketch.perm.original_bin((start + j) % filt.n);
                *votes.entry(f).or_insert(0) += 1;
            }
        }
    }
    let mut accepted: Vec<usize> = votes.into_iter().filter(|&(_, v)| v >= quorum).map(|(f, _)| f).collect();
    accepted.sort_unstable();
    accepted
}

/// Bucket values with the modelled contributions of `known` removed.
fn residual_values(sketches: &[BucketSketch], filt: &FlatWindowFilter, known: &[(usize, Complex64)]) -> Vec<Vec<Complex64>> {
    let width = filt.n / filt.buckets;
    sketches
        .iter()
        .map(|s| {
            let mut v = s.values.clone();
            for &(g, xg) in known {
                let (pos, c) = (s.perm.permuted_bin(g) as isize, xg * s.perm.phase(g));
                for (b, vb) in v.iter_mut().enumerate() {
                    *vb -= c * filt.response_at((b * width) as isize - pos);
                }
            }
            v
        })
        .collect()
}

/// Componentwise median over rounds of `value · e^{−2πiτf/N} / Ĝ(offset)`.
fn estimate(sketches: &[BucketSketch], values: &[Vec<Complex64>], filt: &FlatWindowFilter, f: usize) -> Complex64 {
    let mut re = Vec::with_capacity(sketches.len());
    let mut im = Vec::with_capacity(sketches.len());
    for (s, v) in sketches.iter().zip(values) {
        let (b, off) = bucket_of(filt, s.perm.permuted_bin(f));
        let e = v[b] * s.perm.phase(f).conj() / filt.response_at(off);
        re.push(e.re);
        im.push(e.im);
    }
    Complex64::new(median(&mut re), median(&mut im))
}

/// Gauss–Seidel pass: each entry is re-estimated with the others peeled off.
fn refine(sketches: &[BucketSketch], filt: &FlatWindowFilter, est: &mut [(usize, Complex64)]) {
    let mut resid = residual_values(sketches, filt, est);
    let width = filt.n / filt.buckets;
    for i in 0..est.len() {
        let (f, old) = est[i];
        // put f's own contribution back before estimating it
        for (s, v) in sketches.iter().zip(resid.iter_mut()) {
            let (pos, c) = (s.perm.permuted_bin(f) as isize, old * s.perm.phase(f));
            for (b, vb) in v.iter_mut().enumerate() {
                *vb += c * filt.response_at((b * width) as isize - pos);
            }
        }
        let new = estimate(sketches, &resid, filt, f);
        for (s, v) in sketches.iter().zip(resid.iter_mut()) {
            let (pos, c) = (s.perm.permuted_bin(f) as isize, new * s.perm.phase(f));
            for (b, vb) in v.iter_mut().enumerate() {
                *vb -= c * filt.response_at((b * width) as isize - pos);
            }
        }
        est[i].1 = new;
    }
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_unstable_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Votes over rounds and estimates the accepted frequencies.
///
/// Each round keeps its `2k` loudest buckets and every frequency landing in
/// one of them gets a vote. Frequencies with at least `⌈L/2⌉` votes are
/// estimated in every round as `bucket · e^{−2πiτf/N} / Ĝ(offset)`, and the
/// componentwise median is kept. Estimates are taken from bucket values with
/// the already admitted frequencies' contributions subtracted, so a loud
/// coefficient leaking into a neighbouring bucket does not mask a quiet one.
pub fn locate_and_estimate(sketches: &[BucketSketch], k: usize, filt: &FlatWindowFilter) -> Result<SublinearEstimate> {
    if sketches.len() < 2 {
        return Err(invalid("location needs at least two rounds"));
    }
    if k == 0 {
        return Err(invalid("k must be at least 1"));
    }
    if let Some(s) = sketches.iter().find(|s| s.values.len() != filt.buckets || s.perm.n != filt.n) {
        return Err(invalid(format!("round {} does not match the filter geometry", s.round_id)));
    }
    // Greedy peeling: vote on the residual sketches, admit the loudest
    // candidates, refine jointly, prune to the k largest, repeat until the
    // admitted set stops changing.
    let quorum = sketches.len().div_ceil(2);
    let mut found: Vec<(usize, Complex64)> = Vec::with_capacity(2 * k);
    let mut candidates = 0;
    for stage in 0..max_stages(k) {
        let resid = residual_values(sketches, filt, &found);
        let mut pool = vote(sketches, &resid, filt, k, quorum);
        pool.retain(|f| !found.iter().any(|e| e.0 == *f));
        if stage == 0 {
            candidates = pool.len();
        }
        if pool.is_empty() {
            break;
        }
        let mut scored: Vec<(usize, Complex64)> = pool.iter().map(|&f| (f, estimate(sketches, &resid, filt, f))).collect();
        keep_largest(&mut scored, (k - found.len()).div_ceil(2).max(1));
        let added: Vec<usize> = scored.iter().map(|e| e.0).collect();
        found.extend(scored);
        found.sort_unstable_by_key(|e| e.0);
        for _ in 0..REFINE_SWEEPS {
            refine(sketches, filt, &mut found);
        }
        let peak = found.iter().fold(0.0f64, |m, e| m.max(e.1.norm()));
        found.retain(|e| e.1.norm() > NEGLIGIBLE * peak);
        keep_largest(&mut found, k);
        if found.len() == k && !found.iter().any(|e| added.contains(&e.0)) {
            break;
        }
    }
    let mut estimates = found;
    estimates.sort_unstable_by_key(|e| e.0);
    let complete = estimates.len() == k;
    Ok(SublinearEstimate { spectrum: SparseSpectrum { n: filt.n, entries: estimates }, candidates, complete })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SublinearParams {
    /// Bucket count; `None` picks [`default_bucket_count`].
    pub buckets: Option<usize>,
    pub rounds: usize,
    pub delta: f64,
    /// Permutation seed, mixed with the frame index.
    pub seed: u64,
}

impl Default for SublinearParams {
    fn default() -> Self {
        Self { buckets: None, rounds: DEFAULT_ROUNDS, delta: DEFAULT_DELTA, seed: 0x5eed_5fff }
    }
}

/// Smallest power of two `≥ max(8k, √(Nk))`, below `N`.
pub fn default_bucket_count(n: usize, k: usize) -> usize {
    let want = (8 * k).max(((n * k) as f64).sqrt().ceil() as usize);
    want.next_power_of_two().min(n / 2).max(2)
}

/// Filter and round count fixed for one `(N, k)`; reusable across frames.
#[derive(Debug, Clone)]
pub struct SublinearPlan {
    k: usize,
    rounds: usize,
    seed: u64,
    filter: FlatWindowFilter,
}

impl SublinearPlan {
    /// With no explicit bucket count, the default is halved until a filter fits in `N/4` taps.
    pub fn new(n: usize, k: usize, params: SublinearParams) -> Result<Self> {
        if k == 0 || k > n {
            return Err(invalid(format!("sublinear top-K needs 1 ≤ k ≤ N (k={k}, N={n})")));
        }
        if params.rounds < 2 {
            return Err(invalid("sublinear search needs at least two rounds"));
        }
        let filter = match params.buckets {
            Some(b) => build_flat_filter(n, b, params.delta)?,
            None => {
                let mut b = default_bucket_count(n, k);
                loop {
                    match build_flat_filter(n, b, params.delta) {
                        Ok(f) => break f,
                        Err(e) if b <= 2 => return Err(e),
                        Err(_) => b /= 2,
                    }
                }
            }
        };
        Ok(Self { k, rounds: params.rounds, seed: params.seed, filter })
    }

    pub fn filter(&self) -> &FlatWindowFilter {
        &self.filter
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    fn permutations(&self, frame_index: usize) -> Result<Vec<Permutation>> {
        let mut rng = GaussianStream::new(self.seed ^ frame_index as u64);
        (0..self.rounds).map(|_| Permutation::random(self.filter.n, &mut rng)).collect()
    }

    pub fn top_k(&self, frame: &Frame) -> Result<SublinearEstimate> {
        let sketches = self
            .permutations(frame.index)?
            .into_iter()
            .enumerate()
            .map(|(r, p)| hash_to_bins_round(frame, &self.filter, p, r))
            .collect::<Result<Vec<_>>>()?;
        locate_and_estimate(&sketches, self.k, &self.filter)
    }

    pub fn top_k_complex(&self, x: &[Complex64], frame_index: usize) -> Result<SublinearEstimate> {
        let sketches = self
            .permutations(frame_index)?
            .into_iter()
            .enumerate()
            .map(|(r, p)| hash_to_bins_complex(x, &self.filter, p, r))
            .collect::<Result<Vec<_>>>()?;
        locate_and_estimate(&sketches, self.k, &self.filter)
    }
}

/// One-shot [`SublinearPlan::top_k`].
pub fn sublinear_top_k(frame: &Frame, k: usize, params: SublinearParams) -> Result<SublinearEstimate> {
    SublinearPlan::new(frame.len(), k, params)?.top_k(frame)
}
