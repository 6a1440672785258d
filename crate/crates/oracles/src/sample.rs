//! Direct samplers for the random variables appearing in the relay model,
//! built on `rand_distr` rather than on the crate under test.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Exp1, Gamma};

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

fn exp1(r: &mut ChaCha20Rng) -> f64 {
    Exp1.sample(r)
}

/// `X = Σ gλ² X_j / (1 + Σ gλ X_j)` with `X_j ~ Exp(1)`.
pub fn sample_x(spectrum: &[f64], gains: &[f64], n: usize, seed: u64) -> Vec<f64> {
    let mut r = rng(seed);
    (0..n)
        .map(|_| {
            let mut num = 0.0;
            let mut den = 1.0;
            for (l, g) in spectrum.iter().zip(gains) {
                let xj = exp1(&mut r);
                num += g * l * l * xj;
                den += g * l * xj;
            }
            num / den
        })
        .collect()
}

/// `Y ~ Gamma(shape = n_s, scale = 1/n_s)` (mean one).
pub fn sample_y(n_s: u32, n: usize, seed: u64) -> Vec<f64> {
    let mut r = rng(seed);
    let g = Gamma::new(f64::from(n_s), 1.0 / f64::from(n_s)).unwrap();
    (0..n).map(|_| g.sample(&mut r)).collect()
}

/// `γ_D = γ_S · Y · X`.
pub fn sample_gamma_d(gamma_s: f64, n_s: u32, spectrum: &[f64], gains: &[f64], n: usize, seed: u64) -> Vec<f64> {
    let x = sample_x(spectrum, gains, n, seed);
    let y = sample_y(n_s, n, seed ^ 0x9e37_79b9_7f4a_7c15);
    x.iter().zip(&y).map(|(x, y)| gamma_s * x * y).collect()
}

/// Full correlation: `γ_S n_R Y V/(1+V)`, `V ~ Exp(mean n_R λG)`.
pub fn sample_gamma_fc(n_s: u32, n_r: u32, gain: f64, gamma_s: f64, n: usize, seed: u64) -> Vec<f64> {
    let mut r = rng(seed);
    let y = Gamma::new(f64::from(n_s), 1.0 / f64::from(n_s)).unwrap();
    let mean_v = f64::from(n_r) * gain;
    (0..n)
        .map(|_| {
            let v = mean_v * exp1(&mut r);
            gamma_s * f64::from(n_r) * y.sample(&mut r) * v / (1.0 + v)
        })
        .collect()
}

/// No correlation: `γ_S Y V/(1+V)`, `V ~ Gamma(n_R, scale λeq)`.
pub fn sample_gamma_nc(n_s: u32, n_r: u32, gain: f64, gamma_s: f64, n: usize, seed: u64) -> Vec<f64> {
    let mut r = rng(seed);
    let y = Gamma::new(f64::from(n_s), 1.0 / f64::from(n_s)).unwrap();
    let v = Gamma::new(f64::from(n_r), gain).unwrap();
    (0..n)
        .map(|_| {
            let v = v.sample(&mut r);
            gamma_s * y.sample(&mut r) * v / (1.0 + v)
        })
        .collect()
}

/// Single-antenna fixed-gain AF relay: `|h1|²` and `|h2|²` unit exponentials,
/// relay gain `γ_R / (1 + γ_S)` in normalized units.
pub fn sample_gamma_single(gamma_s: f64, gamma_r: f64, n: usize, seed: u64) -> Vec<f64> {
    let mut r = rng(seed);
    let gain = gamma_r / (1.0 + gamma_s);
    (0..n)
        .map(|_| {
            let h1 = exp1(&mut r);
            let h2 = exp1(&mut r);
            gamma_s * h1 * gain * h2 / (1.0 + gain * h2)
        })
        .collect()
}

/// Sample mean and standard error.
pub fn mean_and_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

/// `E{1/(1 + Σ a_j X_j)}` by direct sampling.
pub fn mean_reciprocal(weights: &[f64], n: usize, seed: u64) -> (f64, f64) {
    let mut r = rng(seed);
    let v: Vec<f64> = (0..n)
        .map(|_| {
            let s: f64 = weights.iter().map(|w| w * exp1(&mut r)).sum::<f64>();
            1.0 / (1.0 + s)
        })
        .collect();
    mean_and_se(&v)
}
