//! Adaptive Gauss–Kronrod (7/15) quadrature.

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for i in 0..7 {
        let dx = h * XGK[i];
        let s = f(c - dx) + f(c + dx);
        kronrod += WGK[i] * s;
        if i % 2 == 1 {
            gauss += WG[i / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

fn adapt<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, whole: (f64, f64), abs_tol: f64, rel_tol: f64, depth: u32) -> f64 {
    let (est, err) = whole;
    if depth == 0 || err <= abs_tol.max(rel_tol * est.abs()) {
        return est;
    }
    let m = 0.5 * (a + b);
    let left = gk15(f, a, m);
    let right = gk15(f, m, b);
    adapt(f, a, m, left, 0.5 * abs_tol, rel_tol, depth - 1) + adapt(f, m, b, right, 0.5 * abs_tol, rel_tol, depth - 1)
}

/// Integrates `f` over `[a, b]` to the requested absolute or relative tolerance.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let whole = gk15(&f, a, b);
    adapt(&f, a, b, whole, abs_tol, rel_tol, 40)
}

/// Integrates `f` over `[a, b]` after splitting it into `pieces` equal panels.
pub fn integrate_panels<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, pieces: usize, abs_tol: f64, rel_tol: f64) -> f64 {
    let h = (b - a) / pieces as f64;
    (0..pieces)
        .map(|i| {
            let lo = a + h * i as f64;
            integrate(&f, lo, lo + h, abs_tol / pieces as f64, rel_tol)
        })
        .sum()
}

/// Iterated 2-D integral of `f(x, y)` over `[ax, bx] × [ay, by]`.
pub fn integrate_2d<F: Fn(f64, f64) -> f64>(f: F, (ax, bx): (f64, f64), (ay, by): (f64, f64), tol: f64) -> f64 {
    integrate(
        |x| integrate(|y| f(x, y), ay, by, tol * 0.1, tol * 0.1),
        ax,
        bx,
        tol,
        tol,
    )
}

/// K_ν(x) from `∫₀^∞ exp(−x cosh t) cosh(νt) dt`.
pub fn bessel_k_integral(order: i32, x: f64) -> f64 {
    let nu = f64::from(order.abs());
    let log_f = |t: f64| -x * t.cosh() + nu * t;
    // peak of the log-integrand, then cut where it has fallen by 60 nats
    let t_peak = if nu > 0.0 { (nu / x).asinh() } else { 0.0 };
    let peak = log_f(t_peak);
    let mut upper = t_peak + 1.0;
    while log_f(upper) > peak - 60.0 {
        upper += 0.5;
    }
    let pieces = (upper * 4.0).ceil() as usize;
    integrate_panels(
        |t| (-x * t.cosh()).exp() * (nu * t).cosh(),
        0.0,
        upper,
        pieces,
        0.0,
        1e-13,
    )
}

/// E₁(x) from `∫_{ln x}^∞ exp(−e^v) dv`.
pub fn e1_integral(x: f64) -> f64 {
    let lo = x.ln();
    let hi = (x + 60.0).ln();
    let pieces = ((hi - lo) * 4.0).ceil().max(4.0) as usize;
    integrate_panels(|v| (-v.exp()).exp(), lo, hi, pieces, 0.0, 1e-13)
}
