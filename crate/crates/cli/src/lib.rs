//! Driver behind the `afrelay` binary: scenario files in, CSV or TOML out.

pub mod config;

use std::io::Write;

use afrelay_core::benchmark::{rate_sweep_with, Method, SearchConfig, SearchStrategy, SweepSettings};
use afrelay_core::montecarlo::{empirical_cdf, sample_gamma_d, sample_x, EmpiricalCdf};
use afrelay_core::power::{allocate_with_report, PowerAllocation};
use afrelay_core::snr::{cdf_gamma_single, cdf_x, outage_probability, pdf_x, GammaDParams, OutageMethod};
use afrelay_core::Error;
use serde::Serialize;

use config::{ScenarioFile, Sweep, DEFAULT_SAMPLES, DEFAULT_SEED};

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Config(String),
    Mismatch(String),
    Cap(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Mismatch(_) => 3,
            CliError::Cap(_) => 4,
            CliError::Io(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Mismatch(m) => write!(f, "method mismatch: {m}"),
            CliError::Cap(m) => write!(f, "resource cap: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::MethodMismatch { .. } => CliError::Mismatch(e.to_string()),
            Error::BudgetExplosion { suggested_db, .. } => CliError::Cap(format!(
                "{e}; rerun with --resolution-db {suggested_db} or --search coarse-to-fine"
            )),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

/// Overrides shared by every command.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub resolution_db: Option<f64>,
}

impl Overrides {
    fn seed(&self, f: &ScenarioFile) -> u64 {
        self.seed.or(f.seed).unwrap_or(DEFAULT_SEED)
    }

    fn samples(&self, f: &ScenarioFile) -> Result<usize, CliError> {
        match self.samples.or(f.mc_samples).unwrap_or(DEFAULT_SAMPLES) {
            0 => Err(CliError::Config("`--samples` must be positive".into())),
            n => Ok(n),
        }
    }
}

/// Full double precision.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variable {
    X,
    GammaFc,
    GammaNc,
    GammaSingle,
    GammaApprox,
}

impl std::str::FromStr for Variable {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "x" => Ok(Variable::X),
            "gamma_fc" => Ok(Variable::GammaFc),
            "gamma_nc" => Ok(Variable::GammaNc),
            "gamma_single" => Ok(Variable::GammaSingle),
            "gamma_approx" => Ok(Variable::GammaApprox),
            other => Err(format!("unknown variable `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CdfOptions {
    pub variable: Variable,
    pub grid: Vec<f64>,
    pub mc_overlay: bool,
    /// Density instead of distribution (variable `x` only).
    pub density: bool,
}

fn gamma_params(f: &ScenarioFile, ov: &Overrides) -> Result<(GammaDParams, f64), CliError> {
    let p_r_db = f.p_r_single()?;
    let s = f.scenario(p_r_db)?;
    let gains = match &f.gains {
        Some(g) => {
            if g.len() != f.n_r {
                return Err(CliError::Config(format!("`gains`: need {} values", f.n_r)));
            }
            g.clone()
        }
        None => {
            let samples = ov.samples(f)?.max(afrelay_core::power::MIN_CONDITION_SAMPLES);
            allocate_with_report(&s, samples, ov.seed(f))?.0.gain_lambdas().to_vec()
        }
    };
    let p = GammaDParams::new(s.gamma_s(), s.lambdas(), &gains, f.n_s, f.n_r as u32)
        .map_err(|e| CliError::Config(format!("`gains`: {e}")))?;
    Ok((p, s.gamma_r()))
}

/// Empirical density by central differences of the empirical CDF over half
/// the grid spacing.
fn empirical_density(e: &EmpiricalCdf, grid: &[f64], x: f64) -> f64 {
    let h = if grid.len() > 1 {
        0.5 * (grid[grid.len() - 1] - grid[0]) / (grid.len() - 1) as f64
    } else {
        1e-2
    };
    (e.eval(x + h) - e.eval(x - h)) / (2.0 * h)
}

pub fn cmd_cdf(f: &ScenarioFile, opts: &CdfOptions, ov: &Overrides, out: &mut dyn Write) -> Result<(), CliError> {
    if opts.grid.is_empty() {
        return Err(CliError::Config("`--grid`: no points".into()));
    }
    if opts.density && opts.variable != Variable::X {
        return Err(CliError::Config(
            "`--density` is only available for `--variable x`".into(),
        ));
    }
    let (p, gamma_r) = gamma_params(f, ov)?;
    let closed: Box<dyn Fn(f64) -> Result<f64, CliError>> = match opts.variable {
        Variable::X if opts.density => Box::new(|x| Ok(pdf_x(&p, x))),
        Variable::X => Box::new(|x| Ok(cdf_x(&p, x))),
        Variable::GammaFc => Box::new(|x| Ok(outage_probability(&p, x, OutageMethod::Fc)?)),
        Variable::GammaNc => Box::new(|x| Ok(outage_probability(&p, x, OutageMethod::Nc)?)),
        Variable::GammaApprox => Box::new(|x| Ok(outage_probability(&p, x, OutageMethod::Approx)?)),
        Variable::GammaSingle => {
            if f.n_s != 1 || f.n_r != 1 {
                return Err(CliError::Mismatch(format!(
                    "gamma_single needs n_s = n_r = 1, got n_s = {}, n_r = {}",
                    f.n_s, f.n_r
                )));
            }
            let fixed = gamma_r / (1.0 + p.gamma_s());
            if (p.gains()[0] - fixed).abs() > 1e-9 * fixed {
                return Err(CliError::Mismatch(format!(
                    "gamma_single assumes the fixed gain γ_R/(1 + γ_S) = {fixed}, `gains` gives {}",
                    p.gains()[0]
                )));
            }
            let gs = p.gamma_s();
            Box::new(move |x| Ok(cdf_gamma_single(gs, gamma_r, x)?))
        }
    };
    // surface a mismatch before any sampling
    closed(opts.grid[0])?;
    let empirical = if opts.mc_overlay {
        let (samples, seed) = (ov.samples(f)?, ov.seed(f));
        let v = match opts.variable {
            Variable::X => sample_x(&p, samples, seed),
            _ => sample_gamma_d(&p, samples, seed),
        };
        Some(empirical_cdf(&v)?)
    } else {
        None
    };
    let mut w = csv::Writer::from_writer(out);
    if empirical.is_some() {
        w.write_record(["x", "closed_form", "empirical"])?;
    } else {
        w.write_record(["x", "closed_form"])?;
    }
    for &x in &opts.grid {
        let c = closed(x)?;
        let mut rec = vec![fmt_f64(x), fmt_f64(c)];
        if let Some(e) = &empirical {
            rec.push(fmt_f64(if opts.density {
                empirical_density(e, &opts.grid, x)
            } else {
                e.eval(x)
            }));
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct AllocationOutput {
    allocation: Vec<AllocationPoint>,
}

#[derive(Debug, Serialize)]
struct AllocationPoint {
    p_r_db: f64,
    active_modes: usize,
    gain_lambdas: Vec<f64>,
    power_fractions: Vec<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    condition: Vec<ConditionAudit>,
}

#[derive(Debug, Serialize)]
struct ConditionAudit {
    n: usize,
    holds: bool,
    lhs: f64,
    rhs: f64,
    rhs_std_err: f64,
    p_n: f64,
    alpha_n: f64,
    d_term: f64,
    e1: f64,
    e2: f64,
}

/// Allocation at every relay power of the file (or `p_r_db` if given), as TOML.
pub fn cmd_allocate(f: &ScenarioFile, report: bool, ov: &Overrides, out: &mut dyn Write) -> Result<(), CliError> {
    let samples = ov.samples(f)?.max(afrelay_core::power::MIN_CONDITION_SAMPLES);
    let seed = ov.seed(f);
    let points = match f.p_r_db {
        Some(p) => vec![p],
        None => f.p_r_points()?,
    };
    let mut doc = AllocationOutput { allocation: Vec::new() };
    for db in points {
        let s = f.scenario(db)?;
        let (a, reports): (PowerAllocation, _) = allocate_with_report(&s, samples, seed)?;
        doc.allocation.push(AllocationPoint {
            p_r_db: db,
            active_modes: a.active_modes(),
            power_fractions: a.power_fractions(&s),
            gain_lambdas: a.gain_lambdas().to_vec(),
            condition: if report {
                reports
                    .iter()
                    .map(|r| ConditionAudit {
                        n: r.n,
                        holds: r.holds,
                        lhs: r.lhs,
                        rhs: r.rhs,
                        rhs_std_err: r.mc_std_err,
                        p_n: r.p_n,
                        alpha_n: r.alpha_n,
                        d_term: r.d_term,
                        e1: r.e1,
                        e2: r.e2,
                    })
                    .collect()
            } else {
                Vec::new()
            },
        });
    }
    let text = toml::to_string(&doc).map_err(|e| CliError::Io(e.to_string()))?;
    out.write_all(text.as_bytes())?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatesOptions {
    pub methods: Vec<Method>,
    pub sweep: Option<Sweep>,
    pub strategy: SearchStrategy,
    /// Adds active_modes, grid_points and cell_gap columns.
    pub details: bool,
}

pub fn cmd_rates(f: &ScenarioFile, opts: &RatesOptions, ov: &Overrides, out: &mut dyn Write) -> Result<(), CliError> {
    let points = match &opts.sweep {
        Some(s) => s.points()?,
        None => f.p_r_points()?,
    };
    let s = f.scenario(points[0])?;
    let samples = ov.samples(f)?;
    let mut settings = SweepSettings::new(samples, ov.seed(f));
    settings.search = SearchConfig {
        resolution_db: ov
            .resolution_db
            .or(f.resolution_db)
            .unwrap_or(settings.search.resolution_db),
        strategy: opts.strategy,
        ..settings.search
    };
    let rows = rate_sweep_with(&s, &points, &opts.methods, &settings)?;
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["p_r_db", "method", "rate", "std_err"];
    if opts.details {
        header.extend(["active_modes", "grid_points", "cell_gap"]);
    }
    w.write_record(&header)?;
    for r in &rows {
        let mut rec = vec![
            fmt_f64(r.p_r_db),
            r.method.to_string(),
            fmt_f64(r.rate.mean),
            fmt_f64(r.rate.std_err),
        ];
        if opts.details {
            rec.push(r.active_modes.map(|n| n.to_string()).unwrap_or_default());
            rec.push(r.grid_points.map(|n| n.to_string()).unwrap_or_default());
            rec.push(r.cell_gap.map(fmt_f64).unwrap_or_default());
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Parses a comma-separated method list.
pub fn parse_methods(list: &str) -> Result<Vec<Method>, CliError> {
    let mut out = Vec::new();
    for m in list.split(',').map(str::trim).filter(|m| !m.is_empty()) {
        out.push(
            m.parse::<Method>()
                .map_err(|e| CliError::Config(format!("`--methods`: {e}")))?,
        );
    }
    if out.is_empty() {
        return Err(CliError::Config("`--methods`: no methods requested".into()));
    }
    Ok(out)
}
