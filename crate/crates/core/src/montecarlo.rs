//! Monte Carlo simulation of the relay link.
//!
//! Work is split into fixed-size chunks. Each chunk draws from its own
//! generator seeded by `(seed, chunk index)`, and per-chunk statistics are
//! merged in chunk order, so results do not depend on the thread count.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::power::{PowerAllocation, Scenario};
use crate::snr::GammaDParams;
use num_complex::Complex64;

/// Samples per chunk.
pub const CHUNK: usize = 8192;

/// Smallest sample count accepted by [`ergodic_rate`].
pub const MIN_RATE_SAMPLES: usize = 1000;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Generator for one chunk.
pub fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(splitmix64(seed) ^ chunk))
}

fn chunk_lengths(samples: usize) -> impl IndexedParallelIterator<Item = (u64, usize)> {
    let chunks = samples.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(move |c| (c as u64, CHUNK.min(samples - c * CHUNK)))
}

/// Runs `f` on every chunk in parallel and returns the results in chunk order.
pub(crate) fn map_chunks<T, F>(samples: usize, seed: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng, usize) -> T + Sync + Send,
{
    chunk_lengths(samples)
        .map(|(c, len)| f(&mut chunk_rng(seed, c), len))
        .collect()
}

/// Statistics that can be merged chunk by chunk.
pub(crate) trait Mergeable: Default {
    fn merge(&mut self, other: &Self);
}

pub(crate) fn reduce_chunks<T, F>(samples: usize, seed: u64, f: F) -> T
where
    T: Send + Mergeable,
    F: Fn(&mut ChaCha8Rng, usize) -> T + Sync + Send,
{
    let parts = map_chunks(samples, seed, f);
    let mut acc = T::default();
    for p in &parts {
        acc.merge(p);
    }
    acc
}

/// Unit-mean exponential, i.e. `|h|²` for a standard complex Gaussian `h`.
#[inline]
pub(crate) fn exp1(rng: &mut ChaCha8Rng) -> f64 {
    -(1.0 - rng.gen::<f64>()).ln()
}

/// Fills `x` with `X_j ~ Exp(1)` and returns `Y`, the mean of `n_s` more.
#[inline]
pub(crate) fn draw_xy(rng: &mut ChaCha8Rng, n_s: u32, x: &mut [f64]) -> f64 {
    for v in x.iter_mut() {
        *v = exp1(rng);
    }
    let mut y = 0.0;
    for _ in 0..n_s {
        y += exp1(rng);
    }
    y / f64::from(n_s)
}

/// Single-pass mean and variance (Welford, merged with Chan's formula).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    pub fn push(&mut self, v: f64) {
        self.n += 1;
        let d = v - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (v - self.mean);
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub fn std_err(&self) -> f64 {
        (self.variance() / self.n as f64).sqrt()
    }
}

impl Mergeable for Moments {
    fn merge(&mut self, o: &Self) {
        if o.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *o;
            return;
        }
        let n = self.n + o.n;
        let d = o.mean - self.mean;
        let w = o.n as f64 / n as f64;
        self.mean += d * w;
        self.m2 += o.m2 + d * d * self.n as f64 * w;
        self.n = n;
    }
}

/// Joint moments of a pair of variables.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub(crate) struct BiMoments {
    n: u64,
    ma: f64,
    mb: f64,
    saa: f64,
    sbb: f64,
    sab: f64,
}

impl BiMoments {
    pub fn push(&mut self, a: f64, b: f64) {
        self.n += 1;
        let n = self.n as f64;
        let da = a - self.ma;
        let db = b - self.mb;
        self.ma += da / n;
        self.mb += db / n;
        self.saa += da * (a - self.ma);
        self.sbb += db * (b - self.mb);
        self.sab += da * (b - self.mb);
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean_a(&self) -> f64 {
        self.ma
    }

    pub fn mean_b(&self) -> f64 {
        self.mb
    }

    pub fn var_a(&self) -> f64 {
        self.saa / (self.n - 1) as f64
    }

    pub fn var_b(&self) -> f64 {
        self.sbb / (self.n - 1) as f64
    }

    pub fn cov(&self) -> f64 {
        self.sab / (self.n - 1) as f64
    }
}

impl Mergeable for BiMoments {
    fn merge(&mut self, o: &Self) {
        if o.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *o;
            return;
        }
        let n = (self.n + o.n) as f64;
        let (n1, n2) = (self.n as f64, o.n as f64);
        let da = o.ma - self.ma;
        let db = o.mb - self.mb;
        let f = n1 * n2 / n;
        self.saa += o.saa + da * da * f;
        self.sbb += o.sbb + db * db * f;
        self.sab += o.sab + da * db * f;
        self.ma += da * n2 / n;
        self.mb += db * n2 / n;
        self.n += o.n;
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Count(u64);

impl Mergeable for Count {
    fn merge(&mut self, o: &Self) {
        self.0 += o.0;
    }
}

/// i.i.d. standard complex Gaussian channels before correlation is applied.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSample {
    /// `n_R × n_S` source-to-relay channel.
    pub h1w: CMatrix,
    /// `1 × n_R` relay-to-destination channel.
    pub h2w: CMatrix,
}

fn complex_gaussian(rng: &mut ChaCha8Rng) -> Complex64 {
    // Box–Muller: |h|² ~ Exp(1), uniform phase
    let r = exp1(rng).sqrt();
    let theta = TAU * rng.gen::<f64>();
    Complex64::from_polar(r, theta)
}

pub fn sample_channel(s: &Scenario, rng: &mut ChaCha8Rng) -> ChannelSample {
    let (n_r, n_s) = (s.n_r(), s.n_s() as usize);
    let h1w = CMatrix::from_fn(n_r, n_s, |_, _| complex_gaussian(rng));
    let h2w = CMatrix::from_fn(1, n_r, |_, _| complex_gaussian(rng));
    ChannelSample { h1w, h2w }
}

/// Destination SNR from full channel matrices, with relay matrix
/// `F = U diag(√λ^G) Uᴴ`, `H₁ = Σ^{1/2} H_{1w}` and `h₂ = h_{2w} Σ^{1/2}`:
/// `γ_D = (γ_S/n_S) ‖h₂ F H₁‖² / (1 + ‖h₂ F‖²)`.
pub fn gamma_d_direct(sample: &ChannelSample, alloc: &PowerAllocation, s: &Scenario) -> Result<f64> {
    let n_r = s.n_r();
    let n_s = s.n_s() as usize;
    if sample.h1w.rows() != n_r || sample.h1w.cols() != n_s {
        return Err(Error::DimensionMismatch(format!(
            "H1w is {}x{}, expected {n_r}x{n_s}",
            sample.h1w.rows(),
            sample.h1w.cols()
        )));
    }
    if sample.h2w.rows() != 1 || sample.h2w.cols() != n_r {
        return Err(Error::DimensionMismatch(format!(
            "h2w is {}x{}, expected 1x{n_r}",
            sample.h2w.rows(),
            sample.h2w.cols()
        )));
    }
    if alloc.gain_lambdas().len() != n_r {
        return Err(Error::DimensionMismatch(format!(
            "{} gains for {n_r} relay antennas",
            alloc.gain_lambdas().len()
        )));
    }
    let spectrum = s.spectrum();
    let u = spectrum.basis();
    let sqrt_g: Vec<f64> = alloc.gain_lambdas().iter().map(|g| g.sqrt()).collect();
    let f = &(u * &CMatrix::diagonal(&sqrt_g)) * &u.adjoint();
    let root = spectrum.sqrt();
    let h2f = &(&sample.h2w * &root) * &f;
    let signal = &h2f * &(&root * &sample.h1w);
    let num = signal.frobenius_norm().powi(2);
    let den = 1.0 + h2f.frobenius_norm().powi(2);
    Ok(s.gamma_s() / n_s as f64 * num / den)
}

/// `γ_S Y Σ λ^G_j λ_j² X_j / (1 + Σ λ^G_j λ_j X_j)` from raw slices.
#[inline]
pub fn reduced_snr(x: &[f64], y: f64, gains: &[f64], lambdas: &[f64], gamma_s: f64) -> f64 {
    let mut num = 0.0;
    let mut den = 1.0;
    for ((&xj, &g), &l) in x.iter().zip(gains).zip(lambdas) {
        let a = g * l * xj;
        num += a * l;
        den += a;
    }
    gamma_s * y * num / den
}

/// Destination SNR from `X_j = |h_{2w,j}|²` and `Y = ‖h_{1w}‖²/n_S`.
pub fn gamma_d_reduced(x: &[f64], y: f64, alloc: &PowerAllocation, s: &Scenario) -> f64 {
    reduced_snr(x, y, alloc.gain_lambdas(), s.lambdas(), s.gamma_s())
}

/// Draws `γ_D` samples in chunk order.
pub fn sample_gamma_d(p: &GammaDParams, samples: usize, seed: u64) -> Vec<f64> {
    let k = p.kappa();
    map_chunks(samples, seed, |rng, len| {
        let mut x = vec![0.0; k];
        (0..len)
            .map(|_| {
                let y = draw_xy(rng, p.n_s(), &mut x);
                reduced_snr(&x, y, p.gains(), p.spectrum(), p.gamma_s())
            })
            .collect::<Vec<f64>>()
    })
    .concat()
}

/// Draws `X = Σ λ^G_j λ_j² X_j / (1 + Σ λ^G_j λ_j X_j)` samples in chunk order.
pub fn sample_x(p: &GammaDParams, samples: usize, seed: u64) -> Vec<f64> {
    let k = p.kappa();
    map_chunks(samples, seed, |rng, len| {
        let mut x = vec![0.0; k];
        (0..len)
            .map(|_| {
                draw_xy(rng, p.n_s(), &mut x);
                reduced_snr(&x, 1.0, p.gains(), p.spectrum(), 1.0)
            })
            .collect::<Vec<f64>>()
    })
    .concat()
}

/// Fraction of simulated `γ_D` values at or below `threshold`.
pub fn outage_fraction(p: &GammaDParams, threshold: f64, samples: usize, seed: u64) -> f64 {
    let k = p.kappa();
    let c = reduce_chunks(samples, seed, |rng, len| {
        let mut x = vec![0.0; k];
        let mut hits = 0;
        for _ in 0..len {
            let y = draw_xy(rng, p.n_s(), &mut x);
            if reduced_snr(&x, y, p.gains(), p.spectrum(), p.gamma_s()) <= threshold {
                hits += 1;
            }
        }
        Count(hits)
    });
    c.0 as f64 / samples as f64
}

/// Right-continuous empirical distribution function.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn new(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyInput);
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        Ok(Self { sorted })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    /// Fraction of values `≤ x`.
    pub fn eval(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&v| v <= x) as f64 / self.sorted.len() as f64
    }

    /// Kolmogorov–Smirnov distance to a continuous CDF.
    pub fn ks_distance(&self, cdf: impl Fn(f64) -> f64) -> f64 {
        let n = self.sorted.len() as f64;
        let mut d = 0.0_f64;
        let mut i = 0;
        while i < self.sorted.len() {
            let v = self.sorted[i];
            let j = i + self.sorted[i..].partition_point(|&w| w <= v);
            let f = cdf(v);
            d = d.max((f - i as f64 / n).abs()).max((j as f64 / n - f).abs());
            i = j;
        }
        d
    }
}

pub fn empirical_cdf(values: &[f64]) -> Result<EmpiricalCdf> {
    EmpiricalCdf::new(values)
}

/// Ergodic rate estimate in bits per channel use, half-duplex factor included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateEstimate {
    pub mean: f64,
    pub std_err: f64,
    pub samples: usize,
    pub seed: u64,
}

#[inline]
fn rate_of(gamma: f64) -> f64 {
    0.5 * gamma.ln_1p() / std::f64::consts::LN_2
}

fn chunk_rate(x: &[f64], y: &[f64], gains: &[f64], lambdas: &[f64], gamma_s: f64) -> Moments {
    let k = lambdas.len();
    let mut m = Moments::default();
    for (i, &yi) in y.iter().enumerate() {
        m.push(rate_of(reduced_snr(
            &x[i * k..(i + 1) * k],
            yi,
            gains,
            lambdas,
            gamma_s,
        )));
    }
    m
}

fn check_rate_samples(samples: usize) -> Result<()> {
    if samples < MIN_RATE_SAMPLES {
        Err(Error::Domain(format!(
            "at least {MIN_RATE_SAMPLES} samples are required, got {samples}"
        )))
    } else {
        Ok(())
    }
}

fn draw_chunk(rng: &mut ChaCha8Rng, len: usize, k: usize, n_s: u32) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; len * k];
    let mut y = Vec::with_capacity(len);
    for i in 0..len {
        y.push(draw_xy(rng, n_s, &mut x[i * k..(i + 1) * k]));
    }
    (x, y)
}

/// `E{½ log₂(1 + γ_D)}` over the reduced `(X, Y)` representation.
pub fn ergodic_rate(s: &Scenario, alloc: &PowerAllocation, samples: usize, seed: u64) -> Result<RateEstimate> {
    check_rate_samples(samples)?;
    let k = s.kappa();
    let gains = &alloc.gain_lambdas()[..k];
    let lambdas = &s.lambdas()[..k];
    let m = reduce_chunks(samples, seed, |rng, len| {
        let (x, y) = draw_chunk(rng, len, k, s.n_s());
        chunk_rate(&x, &y, gains, lambdas, s.gamma_s())
    });
    Ok(RateEstimate {
        mean: m.mean(),
        std_err: m.std_err(),
        samples,
        seed,
    })
}

/// Pre-drawn `(X, Y)` samples for evaluating many allocations on the same
/// channel realizations. Produces exactly the estimates of [`ergodic_rate`]
/// for the same `(samples, seed)`.
#[derive(Debug, Clone)]
pub struct SampleBank {
    kappa: usize,
    samples: usize,
    seed: u64,
    lambdas: Vec<f64>,
    gamma_s: f64,
    chunks: Vec<(Vec<f64>, Vec<f64>)>,
}

impl SampleBank {
    pub fn new(s: &Scenario, samples: usize, seed: u64) -> Result<Self> {
        check_rate_samples(samples)?;
        let k = s.kappa();
        let chunks = map_chunks(samples, seed, |rng, len| draw_chunk(rng, len, k, s.n_s()));
        Ok(Self {
            kappa: k,
            samples,
            seed,
            lambdas: s.lambdas()[..k].to_vec(),
            gamma_s: s.gamma_s(),
            chunks,
        })
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    /// Rate for gains listed per mode (entries beyond `κ` are ignored).
    pub fn rate_for_gains(&self, gains: &[f64]) -> RateEstimate {
        let g = &gains[..self.kappa];
        let parts: Vec<Moments> = self
            .chunks
            .par_iter()
            .map(|(x, y)| chunk_rate(x, y, g, &self.lambdas, self.gamma_s))
            .collect();
        let mut m = Moments::default();
        for p in &parts {
            m.merge(p);
        }
        RateEstimate {
            mean: m.mean(),
            std_err: m.std_err(),
            samples: self.samples,
            seed: self.seed,
        }
    }

    pub fn rate(&self, alloc: &PowerAllocation) -> RateEstimate {
        self.rate_for_gains(alloc.gain_lambdas())
    }
}
