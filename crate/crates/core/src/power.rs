//! Power allocation over the eigenmodes of the relay correlation matrix:
//! the n-LER optimality test and the proportional allocation procedure.

use crate::error::{Error, Result};
use crate::expsum;
use crate::linalg::{eig_hermitian, kappa, CorrelationMatrix, CorrelationSpectrum};
use crate::montecarlo::{self, BiMoments};

/// Smallest sample count accepted by the condition estimator.
pub const MIN_CONDITION_SAMPLES: usize = 10_000;

/// Relative gap under which two eigenvalues are treated as equal.
pub const EQUAL_EIGENVALUE_TOLERANCE: f64 = 1e-9;

/// System parameters. Powers are linear.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    n_s: u32,
    p_s: f64,
    p_r: f64,
    n0: f64,
    sigma: Option<CorrelationMatrix>,
    spectrum: CorrelationSpectrum,
}

fn check_power(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be positive, got {v}")))
    }
}

impl Scenario {
    pub fn new(n_s: u32, p_s: f64, p_r: f64, n0: f64, sigma: CorrelationMatrix) -> Result<Self> {
        let spectrum = eig_hermitian(&sigma)?;
        Self::build(n_s, p_s, p_r, n0, Some(sigma), spectrum)
    }

    /// Scenario specified by the correlation eigenvalues alone.
    pub fn from_eigenvalues(n_s: u32, p_s: f64, p_r: f64, n0: f64, lambdas: &[f64]) -> Result<Self> {
        let spectrum = CorrelationSpectrum::from_eigenvalues(lambdas)?;
        Self::build(n_s, p_s, p_r, n0, None, spectrum)
    }

    fn build(
        n_s: u32,
        p_s: f64,
        p_r: f64,
        n0: f64,
        sigma: Option<CorrelationMatrix>,
        spectrum: CorrelationSpectrum,
    ) -> Result<Self> {
        if n_s == 0 {
            return Err(Error::Domain("n_S must be positive".into()));
        }
        check_power("P_S", p_s)?;
        check_power("P_R", p_r)?;
        check_power("N0", n0)?;
        if spectrum.lambdas()[0] <= 0.0 {
            return Err(Error::Domain("correlation matrix has no positive eigenvalue".into()));
        }
        Ok(Self {
            n_s,
            p_s,
            p_r,
            n0,
            sigma,
            spectrum,
        })
    }

    /// Same scenario with a different relay power.
    pub fn with_p_r(&self, p_r: f64) -> Result<Self> {
        check_power("P_R", p_r)?;
        Ok(Self { p_r, ..self.clone() })
    }

    pub fn n_s(&self) -> u32 {
        self.n_s
    }

    pub fn n_r(&self) -> usize {
        self.spectrum.n_r()
    }

    pub fn p_s(&self) -> f64 {
        self.p_s
    }

    pub fn p_r(&self) -> f64 {
        self.p_r
    }

    pub fn n0(&self) -> f64 {
        self.n0
    }

    pub fn gamma_s(&self) -> f64 {
        self.p_s / self.n0
    }

    pub fn gamma_r(&self) -> f64 {
        self.p_r / self.n0
    }

    pub fn sigma(&self) -> Option<&CorrelationMatrix> {
        self.sigma.as_ref()
    }

    pub fn spectrum(&self) -> &CorrelationSpectrum {
        &self.spectrum
    }

    pub fn lambdas(&self) -> &[f64] {
        self.spectrum.lambdas()
    }

    pub fn kappa(&self) -> usize {
        kappa(&self.spectrum, self.n_r())
    }

    /// Relay transmit power `P_S Σ λ^Σ_j λ^G_j + N₀ Σ λ^G_j` for given gains.
    pub fn relay_power(&self, gains: &[f64]) -> f64 {
        self.lambdas()
            .iter()
            .zip(gains)
            .map(|(&l, &g)| (self.p_s * l + self.n0) * g)
            .sum()
    }
}

/// Gain eigenvalues `λ^G` (descending, length `n_R`) and the number of
/// modes carrying power.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerAllocation {
    gain_lambdas: Vec<f64>,
    active_modes: usize,
}

impl PowerAllocation {
    /// Validates that gains are nonnegative, descending, of length `n_R` and
    /// zero on modes beyond `κ`.
    pub fn from_gains(s: &Scenario, gains: Vec<f64>) -> Result<Self> {
        if gains.len() != s.n_r() {
            return Err(Error::DimensionMismatch(format!(
                "{} gains for {} relay antennas",
                gains.len(),
                s.n_r()
            )));
        }
        if gains.iter().any(|&g| !(g >= 0.0 && g.is_finite())) {
            return Err(Error::Domain("gains must be nonnegative and finite".into()));
        }
        if gains.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::Domain("gains must be sorted in descending order".into()));
        }
        if gains[s.kappa()..].iter().any(|&g| g > 0.0) {
            return Err(Error::Domain("power assigned to a mode with zero eigenvalue".into()));
        }
        let active_modes = gains.iter().take_while(|&&g| g > 0.0).count();
        Ok(Self {
            gain_lambdas: gains,
            active_modes,
        })
    }

    pub fn gain_lambdas(&self) -> &[f64] {
        &self.gain_lambdas
    }

    pub fn active_modes(&self) -> usize {
        self.active_modes
    }

    /// Fraction of the relay budget consumed by each mode.
    pub fn power_fractions(&self, s: &Scenario) -> Vec<f64> {
        self.gain_lambdas
            .iter()
            .zip(s.lambdas())
            .map(|(&g, &l)| (s.p_s() * l + s.n0()) * g / s.p_r())
            .collect()
    }
}

/// Audit record of one n-LER test.
#[derive(Debug, Clone, PartialEq)]
pub struct NlerTestReport {
    pub n: usize,
    pub p_n: f64,
    pub alpha_n: f64,
    pub d_term: f64,
    pub e1: f64,
    pub e2: f64,
    pub rhs: f64,
    pub lhs: f64,
    pub holds: bool,
    /// Standard error of `rhs` (delta method over `e1`, `e2`).
    pub mc_std_err: f64,
}

/// Monte Carlo estimates of the two condition expectations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionExpectations {
    pub e1: f64,
    pub e2: f64,
    pub se1: f64,
    pub se2: f64,
    /// Covariance of the two sample means.
    pub cov: f64,
    pub samples: usize,
}

fn check_mode_index(n: usize, max: usize) -> Result<()> {
    if n == 0 || n > max {
        Err(Error::IndexOutOfRange { index: n, max })
    } else {
        Ok(())
    }
}

fn sums(s: &Scenario, n: usize) -> f64 {
    let l = &s.lambdas()[..n];
    s.n0() * l.iter().sum::<f64>() + s.p_s() * l.iter().map(|x| x * x).sum::<f64>()
}

/// `P_n = P_R / (N₀ Σ_{m≤n} λ_m + P_S Σ_{m≤n} λ_m²)`.
pub fn p_n(s: &Scenario, n: usize) -> Result<f64> {
    check_mode_index(n, s.kappa())?;
    Ok(s.p_r() / sums(s, n))
}

/// `α_n = (N₀ + P_S λ_{n+1}) / (N₀ Σ_{m≤n} λ_m + P_S Σ_{m≤n} λ_m²)`.
pub fn alpha_n(s: &Scenario, n: usize) -> Result<f64> {
    check_mode_index(n, s.n_r().saturating_sub(1).min(s.kappa()))?;
    Ok((s.n0() + s.p_s() * s.lambdas()[n]) / sums(s, n))
}

/// Proportional-allocation scale: the `g` with `λ^G_j = g λ^Σ_j`, `j ≤ n`,
/// that spends the whole relay budget.
pub fn proportional_scale(s: &Scenario, n: usize) -> Result<f64> {
    check_mode_index(n, s.kappa())?;
    let l = &s.lambdas()[..n];
    let per_unit: f64 = l.iter().map(|&x| (s.p_s() * x + s.n0()) * x).sum();
    Ok(s.p_r() / per_unit)
}

/// `D = E{1/(1 + p Σ a_m X_m)}` with `X_m ~ Exp(1)`.
///
/// Called with `a_m = λ_m` this is the closed form
/// `Σ_m λ_m^{n−2} / Π_{k≠m}(λ_m − λ_k) · Γ(0, ζ_m) e^{ζ_m}`, `ζ_m = 1/(p λ_m)`;
/// repeated weights use the limiting form.
pub fn d_term(weights: &[f64], p: f64) -> Result<f64> {
    if weights.is_empty() {
        return Err(Error::EmptyInput);
    }
    check_power("p", p)?;
    if weights.iter().any(|&a| !(a > 0.0 && a.is_finite())) {
        return Err(Error::Domain("weights must be positive".into()));
    }
    let scaled: Vec<f64> = weights.iter().map(|&a| p * a).collect();
    Ok(expsum::mean_reciprocal(&scaled))
}

/// Estimates `E{1/(1 + P_n Z_n)}` and `E{(1 + λ_{n+1} γ_S Y)/(1 + P_n Z_n)}`,
/// `Z_n = Σ_{m≤n} λ_m² (1 + γ_S Y λ_m) X_m`.
pub fn mc_condition_expectations(s: &Scenario, n: usize, samples: usize, seed: u64) -> Result<ConditionExpectations> {
    if samples < MIN_CONDITION_SAMPLES {
        return Err(Error::Domain(format!(
            "at least {MIN_CONDITION_SAMPLES} samples are required, got {samples}"
        )));
    }
    let pn = p_n(s, n)?;
    let lambdas = s.lambdas();
    let next = lambdas.get(n).copied().unwrap_or(0.0);
    let gamma_s = s.gamma_s();
    let (kappa, n_s) = (s.kappa(), s.n_s());
    let m = montecarlo::reduce_chunks(samples, seed, |rng, len| {
        let mut acc = BiMoments::default();
        let mut x = vec![0.0; kappa];
        for _ in 0..len {
            let y = montecarlo::draw_xy(rng, n_s, &mut x);
            let z: f64 = (0..n)
                .map(|j| lambdas[j] * lambdas[j] * (1.0 + gamma_s * y * lambdas[j]) * x[j])
                .sum();
            let u1 = 1.0 / (1.0 + pn * z);
            acc.push(u1, (1.0 + next * gamma_s * y) * u1);
        }
        acc
    });
    let nf = m.count() as f64;
    Ok(ConditionExpectations {
        e1: m.mean_a(),
        e2: m.mean_b(),
        se1: (m.var_a() / nf).sqrt(),
        se2: (m.var_b() / nf).sqrt(),
        cov: m.cov() / nf,
        samples,
    })
}

/// Tests whether the `n` largest eigenmodes suffice:
/// `λ_{n+1} ≤ [(α_n + P_n λ_{n+1}) D − α_n e1] / (P_n e2)` with
/// `D = E{1/(1 + P_n Σ_{m≤n} λ_m² X_m)}`.
///
/// A gap within two standard errors counts as holding, except when
/// `λ_{n+1} = λ_n`: equal eigenmodes are interchangeable, so a cut between
/// them is never selected.
pub fn nler_condition(s: &Scenario, n: usize, samples: usize, seed: u64) -> Result<NlerTestReport> {
    let k = s.kappa();
    if n == 0 || n >= k {
        return Err(Error::IndexOutOfRange {
            index: n,
            max: k.saturating_sub(1),
        });
    }
    let pn = p_n(s, n)?;
    let alpha = alpha_n(s, n)?;
    let lambdas = s.lambdas();
    let squares: Vec<f64> = lambdas[..n].iter().map(|l| l * l).collect();
    let d = d_term(&squares, pn)?;
    let ex = mc_condition_expectations(s, n, samples, seed)?;
    let lhs = lambdas[n];
    let same_eigenvalue = lhs >= lambdas[n - 1] * (1.0 - EQUAL_EIGENVALUE_TOLERANCE);
    let rhs = ((alpha + pn * lhs) * d - alpha * ex.e1) / (pn * ex.e2);
    let de1 = -alpha / (pn * ex.e2);
    let de2 = -rhs / ex.e2;
    let var = de1 * de1 * ex.se1 * ex.se1 + de2 * de2 * ex.se2 * ex.se2 + 2.0 * de1 * de2 * ex.cov;
    let se = var.max(0.0).sqrt();
    Ok(NlerTestReport {
        n,
        p_n: pn,
        alpha_n: alpha,
        d_term: d,
        e1: ex.e1,
        e2: ex.e2,
        rhs,
        lhs,
        holds: lhs <= rhs + 2.0 * se && !same_eigenvalue,
        mc_std_err: se,
    })
}

fn proportional(s: &Scenario, n: usize) -> Result<PowerAllocation> {
    let g = proportional_scale(s, n)?;
    let mut gains = vec![0.0; s.n_r()];
    for (gj, l) in gains.iter_mut().zip(&s.lambdas()[..n]) {
        *gj = g * l;
    }
    PowerAllocation::from_gains(s, gains)
}

/// Proportional allocation over the smallest eigenmode set passing the
/// n-LER test.
pub fn allocate(s: &Scenario, samples: usize, seed: u64) -> Result<PowerAllocation> {
    allocate_with_report(s, samples, seed).map(|(a, _)| a)
}

/// [`allocate`] together with the condition audit for every tested `n`.
pub fn allocate_with_report(s: &Scenario, samples: usize, seed: u64) -> Result<(PowerAllocation, Vec<NlerTestReport>)> {
    let k = s.kappa();
    let mut reports = Vec::new();
    for n in 1..k {
        let r = nler_condition(s, n, samples, seed)?;
        let holds = r.holds;
        reports.push(r);
        if holds {
            return Ok((proportional(s, n)?, reports));
        }
    }
    Ok((proportional(s, k)?, reports))
}

/// Equal gains on all `κ` modes, spending the whole budget.
pub fn equal_power_allocation(s: &Scenario) -> Result<PowerAllocation> {
    let k = s.kappa();
    let l = &s.lambdas()[..k];
    let eq = s.p_r() / (s.p_s() * l.iter().sum::<f64>() + s.n0() * k as f64);
    let mut gains = vec![0.0; s.n_r()];
    gains[..k].fill(eq);
    PowerAllocation::from_gains(s, gains)
}
