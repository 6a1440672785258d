//! Distribution of the destination SNR `γ_D = γ_S · Y · X`: the piecewise
//! closed form of `F_X`, the fully correlated and uncorrelated closed forms,
//! the single-antenna reduction and the large-`n_S` approximation.

use crate::error::{Error, Result};
use crate::expsum;
use crate::linalg::kappa_of;
use crate::montecarlo;
use crate::special::{ln_bessel_k, ln_factorial};

/// `|λ_j − x|` below this fraction of `λ_1` counts as sitting on a breakpoint.
pub const BREAKPOINT_TOLERANCE: f64 = 1e-12;

/// Parameters of `γ_D`: source SNR, correlation spectrum, relay gains and
/// antenna counts. Lists are truncated to the `κ` nonzero modes.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaDParams {
    gamma_s: f64,
    spectrum: Vec<f64>,
    gains: Vec<f64>,
    n_s: u32,
    n_r: u32,
}

impl GammaDParams {
    pub fn new(gamma_s: f64, spectrum: &[f64], gains: &[f64], n_s: u32, n_r: u32) -> Result<Self> {
        if !(gamma_s > 0.0 && gamma_s.is_finite()) {
            return Err(Error::Domain(format!("gamma_s must be positive, got {gamma_s}")));
        }
        if n_s == 0 || n_r == 0 {
            return Err(Error::Domain("antenna counts must be positive".into()));
        }
        if spectrum.len() != gains.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} eigenvalues but {} gains",
                spectrum.len(),
                gains.len()
            )));
        }
        if spectrum.is_empty() {
            return Err(Error::EmptyInput);
        }
        for (name, v) in [("eigenvalues", spectrum), ("gains", gains)] {
            if v.iter().any(|&l| !(l >= 0.0 && l.is_finite())) {
                return Err(Error::Domain(format!("{name} must be nonnegative and finite")));
            }
            if v.windows(2).any(|w| w[1] > w[0]) {
                return Err(Error::Domain(format!("{name} must be sorted in descending order")));
            }
        }
        if spectrum[0] == 0.0 {
            return Err(Error::Domain("at least one eigenvalue must be positive".into()));
        }
        let k = kappa_of(spectrum, n_r as usize);
        Ok(Self {
            gamma_s,
            spectrum: spectrum[..k].to_vec(),
            gains: gains[..k].to_vec(),
            n_s,
            n_r,
        })
    }

    pub fn gamma_s(&self) -> f64 {
        self.gamma_s
    }

    pub fn spectrum(&self) -> &[f64] {
        &self.spectrum
    }

    pub fn gains(&self) -> &[f64] {
        &self.gains
    }

    pub fn n_s(&self) -> u32 {
        self.n_s
    }

    pub fn n_r(&self) -> u32 {
        self.n_r
    }

    pub fn kappa(&self) -> usize {
        self.spectrum.len()
    }
}

/// One interval `(λ_{j+1}, λ_j)` of the piecewise form with its active modes
/// `{1..j}` (stored 0-based).
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub lower: f64,
    pub upper: f64,
    pub active: Vec<usize>,
}

/// Piecewise closed form of `F_X`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseCdf {
    breakpoints: Vec<f64>,
    segments: Vec<Segment>,
    spectrum: Vec<f64>,
    gains: Vec<f64>,
}

impl PiecewiseCdf {
    pub fn new(p: &GammaDParams) -> Self {
        let mut breakpoints = vec![0.0];
        for &l in p.spectrum().iter().rev() {
            if l > *breakpoints.last().unwrap() {
                breakpoints.push(l);
            }
        }
        let segments = breakpoints
            .windows(2)
            .map(|w| Segment {
                lower: w[0],
                upper: w[1],
                active: (0..p.kappa()).filter(|&i| p.spectrum()[i] >= w[1]).collect(),
            })
            .collect();
        Self {
            breakpoints,
            segments,
            spectrum: p.spectrum().to_vec(),
            gains: p.gains().to_vec(),
        }
    }

    /// `{0, λ_κ, …, λ_1}` ascending, repeated eigenvalues listed once.
    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// Segment containing `x`, using the right-continuous convention at
    /// breakpoints.
    pub fn segment_at(&self, x: f64) -> Option<&Segment> {
        self.segments.iter().find(|s| s.lower <= x && x < s.upper)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let l1 = self.spectrum[0];
        if x <= 0.0 {
            return 0.0;
        }
        if x >= l1 {
            return 1.0;
        }
        // X ≤ x  ⇔  Σ λ^G_j λ_j (λ_j − x) X_j ≤ x
        let betas: Vec<f64> = self
            .spectrum
            .iter()
            .zip(&self.gains)
            .map(|(&l, &g)| {
                let d = l - x;
                if d.abs() <= BREAKPOINT_TOLERANCE * l1 {
                    0.0
                } else {
                    g * l * d
                }
            })
            .collect();
        (1.0 - expsum::tail(&betas, x)).clamp(0.0, 1.0)
    }

    /// Density by central differences of [`Self::eval`]; one-sided next to a
    /// breakpoint so that the right limit is returned there.
    pub fn pdf(&self, x: f64) -> f64 {
        if x < 0.0 || x >= self.spectrum[0] {
            return 0.0;
        }
        let h = (1e-7 * x.abs()).max(1e-7);
        let (a, b) = if self.breakpoints.iter().any(|&bp| bp > x && bp <= x + h) {
            (x - h, x)
        } else if self.breakpoints.iter().any(|&bp| bp >= x - h && bp <= x) {
            (x, x + h)
        } else {
            (x - h, x + h)
        };
        let d = (self.eval(b) - self.eval(a)) / (b - a);
        d.max(0.0)
    }
}

/// `F_X(x)`.
pub fn cdf_x(p: &GammaDParams, x: f64) -> f64 {
    PiecewiseCdf::new(p).eval(x)
}

/// `f_X(x)`.
pub fn pdf_x(p: &GammaDParams, x: f64) -> f64 {
    PiecewiseCdf::new(p).pdf(x)
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be positive, got {v}")))
    }
}

fn check_counts(n_s: u32, n_r: u32) -> Result<()> {
    if n_s == 0 || n_r == 0 {
        Err(Error::Domain("antenna counts must be positive".into()))
    } else {
        Ok(())
    }
}

/// CDF of `γ_D` with fully correlated relay antennas.
pub fn cdf_gamma_fc(n_s: u32, n_r: u32, lambda1_g: f64, gamma_s: f64, x: f64) -> Result<f64> {
    check_counts(n_s, n_r)?;
    check_positive("lambda1_g", lambda1_g)?;
    check_positive("gamma_s", gamma_s)?;
    if x <= 0.0 {
        return Ok(0.0);
    }
    let (ns, nr) = (f64::from(n_s), f64::from(n_r));
    let w = x / (nr * gamma_s);
    let z = 2.0 * (ns * w / (lambda1_g * nr)).sqrt();
    let base = std::f64::consts::LN_2 + ns * (ns * w).ln() - ns * w;
    let ln_scale = (lambda1_g * ns * nr * w).ln();
    let mut sum = 0.0;
    for m in 0..n_s {
        let ln_term = base - 0.5 * f64::from(m + 1) * ln_scale + ln_bessel_k(m as i32 + 1, z)?
            - ln_factorial(m)
            - ln_factorial(n_s - m - 1);
        sum += ln_term.exp();
    }
    Ok((1.0 - sum).clamp(0.0, 1.0))
}

/// CDF of `γ_D` with uncorrelated relay antennas and equal gains.
pub fn cdf_gamma_nc(n_s: u32, n_r: u32, lambda_eq_g: f64, gamma_s: f64, x: f64) -> Result<f64> {
    check_counts(n_s, n_r)?;
    check_positive("lambda_eq_g", lambda_eq_g)?;
    check_positive("gamma_s", gamma_s)?;
    if x <= 0.0 {
        return Ok(0.0);
    }
    let ns = f64::from(n_s);
    let w = x / gamma_s;
    let z = 2.0 * (ns * w / lambda_eq_g).sqrt();
    let base = std::f64::consts::LN_2 + ns * (ns * w).ln() - ns * w;
    let ln_scale = (lambda_eq_g * ns * w).ln();
    let (ln_ns, ln_w) = (ns.ln(), w.ln());
    let mut sum = 0.0;
    for m in 0..n_r {
        for k in 0..n_s {
            let order = m as i32 - k as i32 - 1;
            let ln_term = base + f64::from(m) * (ln_ns + ln_w) - 0.5 * f64::from(m + k + 1) * ln_scale
                + ln_bessel_k(order, z)?
                - ln_factorial(m)
                - ln_factorial(k)
                - ln_factorial(n_s - k - 1);
            sum += ln_term.exp();
        }
    }
    Ok((1.0 - sum).clamp(0.0, 1.0))
}

/// CDF of `γ_D` for a single-antenna fixed-gain relay.
pub fn cdf_gamma_single(gamma_s: f64, gamma_r: f64, x: f64) -> Result<f64> {
    check_positive("gamma_s", gamma_s)?;
    check_positive("gamma_r", gamma_r)?;
    if x <= 0.0 {
        return Ok(0.0);
    }
    let a = ((1.0 + gamma_s) * x / (gamma_s * gamma_r)).sqrt();
    let ln = std::f64::consts::LN_2 + a.ln() - x / gamma_s + ln_bessel_k(1, 2.0 * a)?;
    Ok((1.0 - ln.exp()).clamp(0.0, 1.0))
}

/// Large-`n_S` approximation `F_γD(z) ≈ F_X(z/γ_S)`.
pub fn cdf_gamma_approx(p: &GammaDParams, z: f64) -> f64 {
    cdf_x(p, z / p.gamma_s())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutageMethod {
    Approx,
    Fc,
    Nc,
    MonteCarlo { samples: usize, seed: u64 },
}

/// Outage probability `P(γ_D ≤ threshold)`.
pub fn outage_probability(p: &GammaDParams, snr_threshold: f64, method: OutageMethod) -> Result<f64> {
    match method {
        OutageMethod::Approx => Ok(cdf_gamma_approx(p, snr_threshold)),
        OutageMethod::Fc => {
            let nr = f64::from(p.n_r());
            if p.kappa() != 1 || (p.spectrum()[0] - nr).abs() > 1e-9 * nr {
                return Err(Error::MethodMismatch {
                    method: "fc",
                    reason: format!("needs a fully correlated relay (a single eigenvalue equal to {nr})"),
                });
            }
            cdf_gamma_fc(p.n_s(), p.n_r(), p.gains()[0], p.gamma_s(), snr_threshold)
        }
        OutageMethod::Nc => {
            let uncorrelated = p.kappa() == p.n_r() as usize && p.spectrum().iter().all(|&l| (l - 1.0).abs() <= 1e-9);
            let g = p.gains()[0];
            let equal_gains = p.gains().iter().all(|&v| (v - g).abs() <= 1e-9 * g);
            if !uncorrelated || !equal_gains {
                return Err(Error::MethodMismatch {
                    method: "nc",
                    reason: "needs an uncorrelated relay (all eigenvalues 1) with equal gains".into(),
                });
            }
            cdf_gamma_nc(p.n_s(), p.n_r(), g, p.gamma_s(), snr_threshold)
        }
        OutageMethod::MonteCarlo { samples, seed } => {
            if samples == 0 {
                return Err(Error::EmptyInput);
            }
            Ok(montecarlo::outage_fraction(p, snr_threshold, samples, seed))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use afrelay_oracles::sample::{sample_gamma_fc, sample_gamma_nc, sample_gamma_single, sample_x};
    use afrelay_oracles::stats::empirical_at;
    use proptest::prelude::*;

    fn fig3() -> GammaDParams {
        GammaDParams::new(1.0, &[4.0, 1.0], &[2.0, 2.0], 2, 2).unwrap()
    }

    #[test]
    fn support_edges() {
        let p = fig3();
        assert_eq!(cdf_x(&p, -1.0), 0.0);
        assert_eq!(cdf_x(&p, 0.0), 0.0);
        assert_eq!(cdf_x(&p, 5.0), 1.0);
        assert_eq!(cdf_x(&p, 4.0), 1.0);
        assert_eq!(pdf_x(&p, -0.5), 0.0);
    }

    #[test]
    fn two_mode_closed_form() {
        // on (λ₂, λ₁) only mode 1 is active: F = 1 − c₂/(c₂ − c₁) e^{−c₁ x}
        let p = fig3();
        let x: f64 = 2.0;
        let c1 = 1.0 / (2.0 * 4.0 * (4.0 - x));
        let c2 = 1.0 / (2.0 * 1.0 * (1.0 - x));
        let want = 1.0 - c2 / (c2 - c1) * (-c1 * x).exp();
        assert!((cdf_x(&p, x) - want).abs() < 1e-14);
        // on (0, λ₂) both are active
        let x: f64 = 0.5;
        let c1 = 1.0 / (2.0 * 4.0 * (4.0 - x));
        let c2 = 1.0 / (2.0 * 1.0 * (1.0 - x));
        let want = 1.0 - c2 / (c2 - c1) * (-c1 * x).exp() - c1 / (c1 - c2) * (-c2 * x).exp();
        assert!((cdf_x(&p, x) - want).abs() < 1e-14);
    }

    #[test]
    fn fig3_point_against_sampling() {
        let p = fig3();
        let samples = sample_x(&[4.0, 1.0], &[2.0, 2.0], 10_000_000, 5);
        let emp = empirical_at(&samples, 2.0);
        assert!((cdf_x(&p, 2.0) - emp).abs() < 0.002);
    }

    #[test]
    fn breakpoints_and_segments() {
        let p = GammaDParams::new(1.0, &[3.0, 1.5, 0.5], &[1.0; 3], 1, 3).unwrap();
        let f = PiecewiseCdf::new(&p);
        assert_eq!(f.breakpoints(), &[0.0, 0.5, 1.5, 3.0]);
        assert_eq!(f.segment_at(0.2).unwrap().active, vec![0, 1, 2]);
        assert_eq!(f.segment_at(1.0).unwrap().active, vec![0, 1]);
        assert_eq!(f.segment_at(1.5).unwrap().active, vec![0]);
        assert!(f.segment_at(3.0).is_none());
    }

    #[test]
    fn repeated_eigenvalues_do_not_fail() {
        let p = GammaDParams::new(1.0, &[1.0, 1.0, 1.0], &[0.7; 3], 1, 3).unwrap();
        let f = PiecewiseCdf::new(&p);
        assert_eq!(f.breakpoints(), &[0.0, 1.0]);
        let samples = sample_x(&[1.0; 3], &[0.7; 3], 1_000_000, 9);
        let d = afrelay_oracles::ks_statistic(&samples, |x| f.eval(x));
        assert!(d < 0.005, "KS {d}");
    }

    #[test]
    fn truncates_to_kappa() {
        let p = GammaDParams::new(1.0, &[2.0, 0.0], &[0.5, 0.0], 1, 2).unwrap();
        assert_eq!(p.kappa(), 1);
        assert_eq!(p.gains(), &[0.5]);
        assert!(GammaDParams::new(1.0, &[2.0, 1.0], &[0.5], 1, 2).is_err());
        assert!(GammaDParams::new(0.0, &[2.0], &[0.5], 1, 2).is_err());
        assert!(GammaDParams::new(1.0, &[1.0, 2.0], &[0.5, 0.5], 1, 2).is_err());
    }

    #[test]
    fn continuity_at_breakpoints() {
        let p = GammaDParams::new(2.0, &[2.2, 1.1, 0.5, 0.2], &[1.3, 0.8, 0.4, 0.1], 2, 4).unwrap();
        let f = PiecewiseCdf::new(&p);
        for &b in &f.breakpoints()[1..f.breakpoints().len() - 1] {
            assert!((f.eval(b - 1e-9) - f.eval(b + 1e-9)).abs() < 1e-6);
            assert!((f.eval(b) - f.eval(b + 1e-9)).abs() < 1e-6);
        }
    }

    #[test]
    fn pdf_integrates_to_one() {
        let p = GammaDParams::new(1.0, &[4.0, 1.0], &[1.0, 1.0], 1, 2).unwrap();
        let f = PiecewiseCdf::new(&p);
        let total = afrelay_oracles::quad::integrate_panels(|x| f.pdf(x), 0.0, 4.0, 40, 1e-9, 1e-9);
        assert!((total - 1.0).abs() < 1e-4, "{total}");
    }

    #[test]
    fn fc_limits() {
        assert!(cdf_gamma_fc(2, 2, 1.0, 1.0, 1e-12).unwrap().abs() < 1e-6);
        assert!(cdf_gamma_fc(2, 2, 1.0, 3.0, 100.0 * 3.0 * 2.0).unwrap() >= 0.99);
        assert_eq!(cdf_gamma_fc(2, 2, 1.0, 1.0, -1.0).unwrap(), 0.0);
        assert!(matches!(cdf_gamma_fc(2, 2, 0.0, 1.0, 1.0), Err(Error::Domain(_))));
        assert!(matches!(cdf_gamma_fc(0, 2, 1.0, 1.0, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn fc_against_sampling() {
        let samples = sample_gamma_fc(2, 2, 1.0, 1.0, 10_000_000, 3);
        let emp = empirical_at(&samples, 1.0);
        assert!((cdf_gamma_fc(2, 2, 1.0, 1.0, 1.0).unwrap() - emp).abs() < 0.002);
    }

    #[test]
    fn nc_against_sampling() {
        let samples = sample_gamma_nc(2, 2, 0.5, 2.0, 10_000_000, 4);
        let emp = empirical_at(&samples, 1.0);
        assert!((cdf_gamma_nc(2, 2, 0.5, 2.0, 1.0).unwrap() - emp).abs() < 0.002);
        assert!(cdf_gamma_nc(2, 2, 0.5, 2.0, 1e-12).unwrap().abs() < 1e-6);
    }

    #[test]
    fn single_antenna_against_sampling() {
        let samples = sample_gamma_single(10.0, 10.0, 10_000_000, 6);
        let emp = empirical_at(&samples, 1.0);
        assert!((cdf_gamma_single(10.0, 10.0, 1.0).unwrap() - emp).abs() < 0.002);
        assert!(cdf_gamma_single(10.0, 10.0, 1e-12).unwrap() < 1e-6);
    }

    #[test]
    fn one_by_one_reductions_agree() {
        let (gs, gr) = (10.0, 10.0);
        let g = gr / (1.0 + gs);
        for i in 1..=1000 {
            let x = 0.05 * f64::from(i);
            let s = cdf_gamma_single(gs, gr, x).unwrap();
            assert!((cdf_gamma_fc(1, 1, g, gs, x).unwrap() - s).abs() < 1e-10);
            assert!((cdf_gamma_nc(1, 1, g, gs, x).unwrap() - s).abs() < 1e-10);
        }
    }

    #[test]
    fn approx_edges() {
        let p = GammaDParams::new(3.0, &[4.0, 1.0], &[2.0, 2.0], 8, 2).unwrap();
        assert_eq!(cdf_gamma_approx(&p, 0.0), 0.0);
        assert_eq!(cdf_gamma_approx(&p, 12.0), 1.0);
    }

    #[test]
    fn outage_dispatch() {
        let p = fig3();
        assert_eq!(outage_probability(&p, 1e-300, OutageMethod::Approx).unwrap(), 0.0);
        assert_eq!(outage_probability(&p, 1e300, OutageMethod::Approx).unwrap(), 1.0);
        assert!(matches!(
            outage_probability(&p, 1.0, OutageMethod::Fc),
            Err(Error::MethodMismatch { method: "fc", .. })
        ));
        assert!(matches!(
            outage_probability(&p, 1.0, OutageMethod::Nc),
            Err(Error::MethodMismatch { method: "nc", .. })
        ));
        let fc = GammaDParams::new(1.0, &[2.0, 0.0], &[0.5, 0.0], 2, 2).unwrap();
        assert_eq!(
            outage_probability(&fc, 1.0, OutageMethod::Fc).unwrap(),
            cdf_gamma_fc(2, 2, 0.5, 1.0, 1.0).unwrap()
        );
        let nc = GammaDParams::new(1.0, &[1.0, 1.0], &[0.5, 0.5], 2, 2).unwrap();
        assert_eq!(
            outage_probability(&nc, 1.0, OutageMethod::Nc).unwrap(),
            cdf_gamma_nc(2, 2, 0.5, 1.0, 1.0).unwrap()
        );
        let mc = OutageMethod::MonteCarlo {
            samples: 100_000,
            seed: 1,
        };
        assert_eq!(outage_probability(&p, 1e-300, mc).unwrap(), 0.0);
        assert_eq!(outage_probability(&p, 1e300, mc).unwrap(), 1.0);
    }

    #[test]
    fn approx_error_shrinks_with_source_antennas() {
        let mut prev = f64::INFINITY;
        for n_s in [2, 8, 32, 128] {
            let p = GammaDParams::new(1.0, &[4.0, 1.0], &[2.0, 2.0], n_s, 2).unwrap();
            let mc = OutageMethod::MonteCarlo {
                samples: 1_000_000,
                seed: 2,
            };
            let gap = (0..40)
                .map(|i| {
                    let z = 0.1 * f64::from(i + 1);
                    (outage_probability(&p, z, OutageMethod::Approx).unwrap() - outage_probability(&p, z, mc).unwrap())
                        .abs()
                })
                .fold(0.0, f64::max);
            assert!(gap < prev, "n_S={n_s}: {gap}");
            prev = gap;
        }
    }

    fn random_params() -> impl Strategy<Value = GammaDParams> {
        (1usize..=4)
            .prop_flat_map(|k| {
                (
                    prop::collection::vec(0.05f64..4.0, k),
                    prop::collection::vec(0.05f64..3.0, k),
                    0.1f64..10.0,
                )
            })
            .prop_filter_map("distinct eigenvalues", |(mut l, mut g, gs)| {
                l.sort_by(|a, b| b.total_cmp(a));
                g.sort_by(|a, b| b.total_cmp(a));
                if l.windows(2).any(|w| w[0] - w[1] < 1e-3) {
                    return None;
                }
                let k = l.len() as u32;
                GammaDParams::new(gs, &l, &g, 2, k).ok()
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn fx_continuous(p in random_params()) {
            let f = PiecewiseCdf::new(&p);
            let bps = f.breakpoints();
            for &b in &bps[1..bps.len() - 1] {
                prop_assert!((f.eval(b - 1e-9) - f.eval(b + 1e-9)).abs() < 1e-6);
            }
        }

        #[test]
        fn fx_monotone(p in random_params()) {
            let f = PiecewiseCdf::new(&p);
            let hi = p.spectrum()[0] + 0.1;
            let mut prev = f.eval(-0.1);
            for i in 1..=10_000 {
                let x = -0.1 + (hi + 0.1) * f64::from(i) / 10_000.0;
                let v = f.eval(x);
                prop_assert!(v >= prev - 1e-9, "x={x}: {v} < {prev}");
                prev = v;
            }
        }

        #[test]
        fn fc_and_nc_are_cdfs(n_s in 1u32..6, n_r in 1u32..6, g in 0.05f64..5.0, gs in 0.1f64..20.0) {
            let mut prev_fc = 0.0;
            let mut prev_nc = 0.0;
            for i in 1..200 {
                let x = gs * 0.05 * f64::from(i);
                let fc = cdf_gamma_fc(n_s, n_r, g, gs, x).unwrap();
                let nc = cdf_gamma_nc(n_s, n_r, g, gs, x).unwrap();
                prop_assert!((0.0..=1.0).contains(&fc) && (0.0..=1.0).contains(&nc));
                prop_assert!(fc >= prev_fc - 1e-9 && nc >= prev_nc - 1e-9);
                prev_fc = fc;
                prev_nc = nc;
            }
        }

        #[test]
        fn fc_nonincreasing_in_gain(n_s in 1u32..5, n_r in 1u32..5, g in 0.05f64..5.0, dg in 0.0f64..2.0, gs in 0.1f64..20.0) {
            for i in 1..50 {
                let x = gs * 0.1 * f64::from(i);
                let lo = cdf_gamma_fc(n_s, n_r, g, gs, x).unwrap();
                let hi = cdf_gamma_fc(n_s, n_r, g + dg, gs, x).unwrap();
                prop_assert!(hi <= lo + 1e-9);
            }
        }
    }
}
