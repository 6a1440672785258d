//! Modified Bessel functions of the second kind (integer order), the
//! exponential integral E₁ and the Erlang distribution.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

const EPS: f64 = 1e-16;

fn check_positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "{name} requires a positive finite argument, got {x}"
        )))
    }
}

/// `e^x K₀(x)` and `e^x K₁(x)` for `x > 0`.
fn k01_scaled(x: f64) -> (f64, f64) {
    if x <= 2.0 {
        let (k0, k1) = k01_series(x);
        let e = x.exp();
        (k0 * e, k1 * e)
    } else {
        k01_steed(x)
    }
}

/// Power series about the origin.
fn k01_series(x: f64) -> (f64, f64) {
    let q = 0.25 * x * x;
    let l = (0.5 * x).ln();
    // k = 0 terms
    let mut t0 = 1.0; // q^k / (k!)^2
    let mut t1 = 1.0; // q^k / (k! (k+1)!)
    let mut harmonic = 0.0; // H_k
    let mut psi_k1 = -EULER_GAMMA; // ψ(k+1)
    let mut i0 = 1.0;
    let mut s0 = 0.0;
    let mut i1 = 1.0;
    let mut s1 = psi_k1 + (psi_k1 + 1.0);
    let mut k = 0.0;
    loop {
        k += 1.0;
        t0 *= q / (k * k);
        t1 *= q / (k * (k + 1.0));
        harmonic += 1.0 / k;
        psi_k1 += 1.0 / k;
        let psi_k2 = psi_k1 + 1.0 / (k + 1.0);
        i0 += t0;
        s0 += harmonic * t0;
        i1 += t1;
        s1 += (psi_k1 + psi_k2) * t1;
        if t0 < EPS * i0 && t1 < EPS * i1 {
            break;
        }
    }
    let k0 = -(l + EULER_GAMMA) * i0 + s0;
    let big_i1 = 0.5 * x * i1;
    let k1 = 1.0 / x + l * big_i1 - 0.25 * x * s1;
    (k0, k1)
}

/// Steed's continued fraction (Temme's form with ν = 0), scaled by `e^x`.
fn k01_steed(x: f64) -> (f64, f64) {
    let a1 = 0.25;
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut h = d;
    let mut delh = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 1..100_000 {
        let fi = f64::from(i);
        a -= 2.0 * fi;
        c = -a * c / (fi + 1.0);
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh *= b * d - 1.0;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < EPS {
            break;
        }
    }
    h *= a1;
    let k0 = (FRAC_PI_2 / x).sqrt() / s;
    let k1 = k0 * (x + 0.5 - h) / x;
    (k0, k1)
}

/// `e^x K_n(x)`; negative orders use `K_{−n} = K_n`.
pub fn bessel_k_scaled(order: i32, x: f64) -> Result<f64> {
    check_positive("bessel_k", x)?;
    let n = order.unsigned_abs();
    let (k0, k1) = k01_scaled(x);
    if n == 0 {
        return Ok(k0);
    }
    let (mut prev, mut cur) = (k0, k1);
    for j in 1..n {
        let next = prev + 2.0 * f64::from(j) / x * cur;
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// `K_n(x)`; underflows to zero for large `x`.
pub fn bessel_k(order: i32, x: f64) -> Result<f64> {
    let scaled = bessel_k_scaled(order, x)?;
    Ok(if x > 745.0 {
        (scaled.ln() - x).exp()
    } else {
        scaled * (-x).exp()
    })
}

/// `ln K_n(x)`, finite for arguments where `K_n` itself over- or underflows.
pub fn ln_bessel_k(order: i32, x: f64) -> Result<f64> {
    check_positive("ln_bessel_k", x)?;
    let n = order.unsigned_abs();
    let (k0, k1) = k01_scaled(x);
    let mut ln = k0.ln() - x;
    let mut ratio = k1 / k0;
    for j in 1..=n {
        ln += ratio.ln();
        ratio = 1.0 / ratio + 2.0 * f64::from(j) / x;
    }
    Ok(ln)
}

/// `e^x E₁(x)`.
pub fn exp_e1_scaled(x: f64) -> Result<f64> {
    check_positive("exp_integral_e1", x)?;
    if x <= 1.0 {
        return Ok(e1_series(x) * x.exp());
    }
    // modified Lentz on the even continued fraction
    let tiny = 1e-300;
    let mut b = x + 1.0;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..100_000 {
        let a = -f64::from(i) * f64::from(i);
        b += 2.0;
        d = 1.0 / (a * d + b);
        c = b + a / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    Ok(h)
}

fn e1_series(x: f64) -> f64 {
    let mut sum = 0.0;
    let mut term = 1.0;
    let mut k = 0.0;
    loop {
        k += 1.0;
        term *= -x / k;
        let add = term / k;
        sum += add;
        if add.abs() < EPS * sum.abs().max(1e-300) {
            break;
        }
    }
    -EULER_GAMMA - x.ln() - sum
}

/// Exponential integral `E₁(x) = Γ(0, x) = ∫ₓ^∞ e^{−t}/t dt`.
pub fn exp_integral_e1(x: f64) -> Result<f64> {
    check_positive("exp_integral_e1", x)?;
    if x <= 1.0 {
        Ok(e1_series(x))
    } else {
        Ok(exp_e1_scaled(x)? * (-x).exp())
    }
}

/// `ln n!`.
pub fn ln_factorial(n: u32) -> f64 {
    (2..=n).map(|k| f64::from(k).ln()).sum()
}

/// Erlang distribution with integer shape `k` and rate `λ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErlangParams {
    shape: u32,
    rate: f64,
}

impl ErlangParams {
    pub fn new(shape: u32, rate: f64) -> Result<Self> {
        if shape == 0 {
            return Err(Error::Domain("Erlang shape must be at least 1".into()));
        }
        check_positive("Erlang rate", rate)?;
        Ok(Self { shape, rate })
    }

    pub fn shape(&self) -> u32 {
        self.shape
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn mean(&self) -> f64 {
        f64::from(self.shape) / self.rate
    }

    pub fn variance(&self) -> f64 {
        f64::from(self.shape) / (self.rate * self.rate)
    }
}

pub fn erlang_pdf(p: ErlangParams, y: f64) -> f64 {
    if y < 0.0 {
        return 0.0;
    }
    let k = f64::from(p.shape);
    if y == 0.0 {
        return if p.shape == 1 { p.rate } else { 0.0 };
    }
    let ln = k * p.rate.ln() + (k - 1.0) * y.ln() - p.rate * y - ln_factorial(p.shape - 1);
    ln.exp()
}

pub fn erlang_cdf(p: ErlangParams, y: f64) -> f64 {
    if y <= 0.0 {
        return 0.0;
    }
    let t = p.rate * y;
    let k = f64::from(p.shape);
    if t < k + 1.0 {
        // lower series: e^{-t} t^k / k! Σ_j t^j / ((k+1)…(k+j))
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut j = 1.0;
        while term > EPS * sum {
            term *= t / (k + j);
            sum += term;
            j += 1.0;
        }
        let ln = -t + k * t.ln() - ln_factorial(p.shape) + sum.ln();
        ln.exp().min(1.0)
    } else {
        // upper tail: e^{-t} Σ_{m<k} t^m / m!, summed from the largest term down
        let mut term = 1.0;
        let mut sum = 1.0;
        for m in (1..p.shape).rev() {
            term *= f64::from(m) / t;
            sum += term;
        }
        let ln = -t + (k - 1.0) * t.ln() - ln_factorial(p.shape - 1) + sum.ln();
        (1.0 - ln.exp()).max(0.0)
    }
}
