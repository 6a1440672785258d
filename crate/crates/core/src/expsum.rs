//! Distribution of `S = Σ β_j E_j` for independent unit exponentials `E_j`
//! and real (possibly negative, possibly repeated) weights `β_j`.
//!
//! The Laplace transform `Π (1 + β_j s)^{-1}` is expanded in partial
//! fractions around each pole `s = −1/β_i`. Weights closer than
//! [`MERGE_TOLERANCE`] in relative terms are replaced by their mean and
//! treated as one pole of higher multiplicity, which removes the
//! catastrophic cancellation of the distinct-pole formula.

use crate::special::exp_e1_scaled;

/// Relative gap below which two weights are merged into one pole.
pub const MERGE_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Pole {
    pub beta: f64,
    pub multiplicity: u32,
}

/// Groups nonzero weights into poles, merging near-equal values.
pub(crate) fn poles(weights: &[f64]) -> Vec<Pole> {
    let mut w: Vec<f64> = weights.iter().copied().filter(|&b| b != 0.0).collect();
    w.sort_by(|a, b| b.total_cmp(a));
    let mut out: Vec<Pole> = Vec::new();
    let mut sum = 0.0;
    let mut last = f64::NAN;
    for b in w {
        if let Some(p) = out.last_mut() {
            if (b - last).abs() <= MERGE_TOLERANCE * b.abs().max(last.abs()) {
                sum += b;
                p.multiplicity += 1;
                p.beta = sum / f64::from(p.multiplicity);
                last = b;
                continue;
            }
        }
        out.push(Pole {
            beta: b,
            multiplicity: 1,
        });
        sum = b;
        last = b;
    }
    out
}

/// Coefficients `c_k`, `k = 1..=r`, of `(μ/(μ+s))^k` at the pole of index `i`,
/// where `μ = 1/β_i`.
fn pole_coefficients(poles: &[Pole], i: usize) -> Vec<f64> {
    let bi = poles[i].beta;
    let r = poles[i].multiplicity as usize;
    // h(s) = Π_{j≠i} (1 + β_j s)^{-r_j} and its log-derivatives at s = −1/β_i
    let mut h0 = 1.0;
    let mut ell = vec![0.0; r]; // ell[p-1] = (ln h)^{(p)}
    for (j, pj) in poles.iter().enumerate() {
        if j == i {
            continue;
        }
        let u = 1.0 - pj.beta / bi;
        let rj = f64::from(pj.multiplicity);
        h0 *= u.powi(-(pj.multiplicity as i32));
        let q = pj.beta / u;
        let mut qp = 1.0;
        let mut fact = 1.0; // (p-1)!
        for p in 1..r {
            qp *= q;
            let sign = if p % 2 == 1 { 1.0 } else { -1.0 };
            ell[p - 1] -= rj * sign * fact * qp;
            fact *= p as f64;
        }
    }
    // derivatives h^{(n)} for n < r
    let mut h = vec![h0; r];
    for n in 1..r {
        let mut acc = 0.0;
        let mut binom = 1.0;
        for p in 0..n {
            acc += binom * ell[p] * h[n - 1 - p];
            binom = binom * (n - 1 - p) as f64 / (p + 1) as f64;
        }
        h[n] = acc;
    }
    let mu = 1.0 / bi;
    // c_k = μ^{r−k} h^{(r−k)} / (r−k)!
    let mut c = vec![0.0; r];
    let mut scale = 1.0;
    for d in 0..r {
        c[r - 1 - d] = h[d] * scale;
        scale *= mu / (d + 1) as f64;
    }
    c
}

/// `P(S > x)` for `x ≥ 0`.
pub(crate) fn tail(weights: &[f64], x: f64) -> f64 {
    debug_assert!(x >= 0.0);
    let poles = poles(weights);
    let mut total = 0.0;
    for i in 0..poles.len() {
        if poles[i].beta <= 0.0 {
            continue;
        }
        let c = pole_coefficients(&poles, i);
        let mux = x / poles[i].beta;
        let e = (-mux).exp();
        if e == 0.0 {
            continue;
        }
        // Erlang(k) survival: e^{-μx} Σ_{l<k} (μx)^l / l!
        let mut term = 1.0;
        let mut partial = 0.0;
        for (k, ck) in c.iter().enumerate() {
            partial += term;
            term *= mux / (k + 1) as f64;
            total += ck * e * partial;
        }
    }
    total
}

/// `E{1/(1 + G)}` for `G ~ Gamma(k, rate μ)`, `k = 1..=r`.
fn reciprocal_moments(mu: f64, r: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(r);
    if mu > 40.0 + 2.0 * r as f64 {
        // asymptotic series Σ_l (−1)^l (k)_l / μ^l, cut at its smallest term
        for k in 1..=r {
            let mut term = 1.0;
            let mut sum: f64 = 1.0;
            let mut l = 0.0;
            loop {
                let next = -term * (k as f64 + l) / mu;
                if next.abs() >= term.abs() || next.abs() < 1e-18 * sum.abs() {
                    break;
                }
                sum += next;
                term = next;
                l += 1.0;
            }
            out.push(sum);
        }
    } else {
        let mut j = mu * exp_e1_scaled(mu).expect("mu is positive");
        out.push(j);
        for k in 2..=r {
            j = mu * (1.0 - j) / (k - 1) as f64;
            out.push(j);
        }
    }
    out
}

/// `E{1/(1 + Σ a_j E_j)}` for nonnegative weights `a_j`.
pub(crate) fn mean_reciprocal(weights: &[f64]) -> f64 {
    debug_assert!(weights.iter().all(|&a| a >= 0.0));
    let poles = poles(weights);
    if poles.is_empty() {
        return 1.0;
    }
    let mut total = 0.0;
    for i in 0..poles.len() {
        let c = pole_coefficients(&poles, i);
        let j = reciprocal_moments(1.0 / poles[i].beta, c.len());
        total += c.iter().zip(&j).map(|(c, j)| c * j).sum::<f64>();
    }
    total
}
