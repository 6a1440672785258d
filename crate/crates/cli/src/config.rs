//! Scenario files.
//!
//! TOML with every power in dB. Example:
//!
//! ```toml
//! n_s = 2
//! n_r = 3
//! p_s_db = 0.0
//! sweep = { start = -10.0, stop = 30.0, step = 5.0 }
//! mc_samples = 100000
//! seed = 7
//!
//! [correlation]
//! rho = [[1, 2, 0.7], [2, 3, 0.5], [1, 3, 0.2]]
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use afrelay_core::benchmark::db_to_linear;
use afrelay_core::linalg::{build_correlation, CorrelationMatrix};
use afrelay_core::power::Scenario;
use num_complex::Complex64;
use serde::Deserialize;

use crate::CliError;

pub const DEFAULT_SAMPLES: usize = 1_000_000;
pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub n_s: u32,
    pub n_r: usize,
    pub p_s_db: f64,
    pub p_r_db: Option<f64>,
    pub sweep: Option<Sweep>,
    #[serde(default)]
    pub n0_db: f64,
    pub correlation: Correlation,
    /// Explicit `λ^G` for the distribution commands.
    pub gains: Option<Vec<f64>>,
    pub mc_samples: Option<usize>,
    pub seed: Option<u64>,
    pub resolution_db: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

/// Exactly one of the fields must be given.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Correlation {
    /// Real part of the full matrix, row by row.
    pub rows: Option<Vec<Vec<f64>>>,
    /// Imaginary part accompanying `rows`.
    pub rows_im: Option<Vec<Vec<f64>>>,
    /// `[i, j, re]` or `[i, j, re, im]` with 1-based `i < j`; missing pairs are 0.
    pub rho: Option<Vec<Vec<f64>>>,
    /// Eigenvalues of the correlation matrix, used as given.
    pub eigenvalues: Option<Vec<f64>>,
    /// `"identity"` or `"full"`.
    pub model: Option<String>,
}

fn config_err(key: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("`{key}`: {msg}"))
}

impl Sweep {
    pub fn points(&self) -> Result<Vec<f64>, CliError> {
        if !(self.step > 0.0 && self.step.is_finite()) || !self.start.is_finite() || !self.stop.is_finite() {
            return Err(config_err("sweep", "step must be positive and bounds finite"));
        }
        if self.stop < self.start {
            return Err(config_err("sweep", "stop is below start"));
        }
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        Ok((0..=n).map(|i| self.start + i as f64 * self.step).collect())
    }
}

/// Parses `start:stop:step`.
pub fn parse_sweep(spec: &str) -> Result<Sweep, CliError> {
    let v = parse_triple(spec, "--sweep")?;
    Ok(Sweep {
        start: v[0],
        stop: v[1],
        step: v[2],
    })
}

fn parse_triple(spec: &str, key: &str) -> Result<[f64; 3], CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(config_err(key, format!("expected start:stop:n, got `{spec}`")));
    }
    let mut out = [0.0; 3];
    for (o, p) in out.iter_mut().zip(&parts) {
        *o = p
            .trim()
            .parse()
            .map_err(|_| config_err(key, format!("`{p}` is not a number")))?;
    }
    Ok(out)
}

/// Parses `start:stop:count` into `count` evenly spaced points.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let [a, b, n] = parse_triple(spec, "--grid")?;
    if n < 1.0 || n.fract() != 0.0 {
        return Err(config_err(
            "--grid",
            format!("point count must be a positive integer, got {n}"),
        ));
    }
    if !(a.is_finite() && b.is_finite() && b >= a) {
        return Err(config_err("--grid", "bounds must be finite with start ≤ stop"));
    }
    let n = n as usize;
    if n == 1 {
        return Ok(vec![a]);
    }
    let h = (b - a) / (n - 1) as f64;
    Ok((0..n).map(|i| if i == n - 1 { b } else { a + i as f64 * h }).collect())
}

impl ScenarioFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let f: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        if f.n_r == 0 {
            return Err(config_err("n_r", "must be positive"));
        }
        if f.n_s == 0 {
            return Err(config_err("n_s", "must be positive"));
        }
        if f.p_r_db.is_none() && f.sweep.is_none() {
            return Err(config_err("p_r_db", "either `p_r_db` or `sweep` is required"));
        }
        if let Some(s) = &f.sweep {
            s.points()?;
        }
        if f.mc_samples == Some(0) {
            return Err(config_err("mc_samples", "must be positive"));
        }
        Ok(f)
    }

    /// Relay powers in dB: the sweep if present, else `p_r_db`.
    pub fn p_r_points(&self) -> Result<Vec<f64>, CliError> {
        match (&self.sweep, self.p_r_db) {
            (Some(s), _) => s.points(),
            (None, Some(p)) => Ok(vec![p]),
            (None, None) => Err(config_err("p_r_db", "missing")),
        }
    }

    /// `p_r_db` if given, else the first sweep point.
    pub fn p_r_single(&self) -> Result<f64, CliError> {
        match self.p_r_db {
            Some(p) => Ok(p),
            None => Ok(self.p_r_points()?[0]),
        }
    }

    fn sigma(&self) -> Result<Option<CorrelationMatrix>, CliError> {
        let c = &self.correlation;
        let given = [
            c.rows.is_some(),
            c.rho.is_some(),
            c.eigenvalues.is_some(),
            c.model.is_some(),
        ]
        .iter()
        .filter(|&&b| b)
        .count();
        if given != 1 {
            return Err(config_err(
                "correlation",
                "give exactly one of `rows`, `rho`, `eigenvalues`, `model`",
            ));
        }
        if c.rows_im.is_some() && c.rows.is_none() {
            return Err(config_err("correlation.rows_im", "requires `rows`"));
        }
        let n = self.n_r;
        if let Some(rows) = &c.rows {
            if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                return Err(config_err("correlation.rows", format!("must be {n}×{n}")));
            }
            let im = match &c.rows_im {
                Some(im) if im.len() != n || im.iter().any(|r| r.len() != n) => {
                    return Err(config_err("correlation.rows_im", format!("must be {n}×{n}")));
                }
                Some(im) => im.clone(),
                None => vec![vec![0.0; n]; n],
            };
            let entries: Vec<Vec<Complex64>> = (0..n)
                .map(|i| (0..n).map(|j| Complex64::new(rows[i][j], im[i][j])).collect())
                .collect();
            return CorrelationMatrix::from_rows(&entries)
                .map(Some)
                .map_err(|e| config_err("correlation.rows", e));
        }
        if let Some(rho) = &c.rho {
            let mut pairs = BTreeMap::new();
            for e in rho {
                if !(e.len() == 3 || e.len() == 4) {
                    return Err(config_err(
                        "correlation.rho",
                        "entries are [i, j, re] or [i, j, re, im]",
                    ));
                }
                let (i, j) = (e[0], e[1]);
                if i.fract() != 0.0 || j.fract() != 0.0 || i < 1.0 || j > n as f64 || i >= j {
                    return Err(config_err(
                        "correlation.rho",
                        format!("indices must satisfy 1 ≤ i < j ≤ {n}, got ({i}, {j})"),
                    ));
                }
                let v = Complex64::new(e[2], e.get(3).copied().unwrap_or(0.0));
                if pairs.insert((i as usize - 1, j as usize - 1), v).is_some() {
                    return Err(config_err("correlation.rho", format!("pair ({i}, {j}) given twice")));
                }
            }
            return build_correlation(n, &pairs)
                .map(Some)
                .map_err(|e| config_err("correlation.rho", e));
        }
        if c.eigenvalues.is_some() {
            return Ok(None);
        }
        match c.model.as_deref() {
            Some("identity") => Ok(Some(CorrelationMatrix::identity(n))),
            Some("full") => Ok(Some(CorrelationMatrix::full(n))),
            Some(other) => Err(config_err("correlation.model", format!("unknown model `{other}`"))),
            None => unreachable!(),
        }
    }

    /// Scenario at relay power `p_r_db`.
    pub fn scenario(&self, p_r_db: f64) -> Result<Scenario, CliError> {
        let (p_s, p_r, n0) = (
            db_to_linear(self.p_s_db),
            db_to_linear(p_r_db),
            db_to_linear(self.n0_db),
        );
        match self.sigma()? {
            Some(sigma) => Scenario::new(self.n_s, p_s, p_r, n0, sigma).map_err(|e| config_err("correlation", e)),
            None => {
                let l = self.correlation.eigenvalues.as_ref().expect("checked");
                if l.len() != self.n_r {
                    return Err(config_err(
                        "correlation.eigenvalues",
                        format!("need {} values", self.n_r),
                    ));
                }
                Scenario::from_eigenvalues(self.n_s, p_s, p_r, n0, l)
                    .map_err(|e| config_err("correlation.eigenvalues", e))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = "n_s = 2\nn_r = 2\np_s_db = 0.0\np_r_db = 10.0\n";

    #[test]
    fn db_fields_become_linear() {
        let f = ScenarioFile::parse(&format!("{BASE}[correlation]\nrho = [[1, 2, 0.3]]\n")).unwrap();
        let s = f.scenario(10.0).unwrap();
        assert_eq!(s.p_s(), 1.0);
        assert_eq!(s.p_r(), 10.0);
        assert_eq!(s.n0(), 1.0);
        let l = s.lambdas();
        assert!((l[0] - 1.3).abs() < 1e-12 && (l[1] - 0.7).abs() < 1e-12);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let e = ScenarioFile::parse(&format!("{BASE}colour = 3\n[correlation]\nmodel = \"identity\"\n")).unwrap_err();
        assert!(e.to_string().contains("colour"), "{e}");
        let e = ScenarioFile::parse(&format!("{BASE}[correlation]\nmodel = \"identity\"\nextra = 1\n")).unwrap_err();
        assert!(e.to_string().contains("extra"), "{e}");
    }

    #[test]
    fn correlation_forms_agree() {
        let a = ScenarioFile::parse(&format!("{BASE}[correlation]\nrows = [[1.0, 0.3], [0.3, 1.0]]\n")).unwrap();
        let b = ScenarioFile::parse(&format!("{BASE}[correlation]\nrho = [[1, 2, 0.3]]\n")).unwrap();
        let c = ScenarioFile::parse(&format!("{BASE}[correlation]\neigenvalues = [1.3, 0.7]\n")).unwrap();
        let (a, b, c) = (
            a.scenario(0.0).unwrap(),
            b.scenario(0.0).unwrap(),
            c.scenario(0.0).unwrap(),
        );
        for i in 0..2 {
            assert!((a.lambdas()[i] - b.lambdas()[i]).abs() < 1e-12);
            assert!((a.lambdas()[i] - c.lambdas()[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn complex_rho_is_accepted() {
        let f = ScenarioFile::parse(&format!("{BASE}[correlation]\nrho = [[1, 2, 0.3, 0.4]]\n")).unwrap();
        let l = f.scenario(0.0).unwrap().lambdas().to_vec();
        assert!((l[0] - 1.5).abs() < 1e-12 && (l[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn bad_correlation_names_the_key() {
        let e = ScenarioFile::parse(&format!("{BASE}[correlation]\nrho = [[1, 2, 1.5]]\n"))
            .unwrap()
            .scenario(0.0)
            .unwrap_err();
        assert!(e.to_string().contains("correlation.rho"), "{e}");
        let e = ScenarioFile::parse(&format!("{BASE}[correlation]\nrho = [[2, 1, 0.5]]\n"))
            .unwrap()
            .scenario(0.0)
            .unwrap_err();
        assert!(e.to_string().contains("correlation.rho"), "{e}");
        let e = ScenarioFile::parse(&format!("{BASE}[correlation]\nrho = [[1, 2, 0.5]]\nmodel = \"full\"\n"))
            .unwrap()
            .scenario(0.0)
            .unwrap_err();
        assert!(e.to_string().contains("exactly one"), "{e}");
    }

    #[test]
    fn sweeps_and_grids() {
        let s = parse_sweep("-20:20:10").unwrap();
        assert_eq!(s.points().unwrap(), vec![-20.0, -10.0, 0.0, 10.0, 20.0]);
        assert_eq!(parse_sweep("0:0:1").unwrap().points().unwrap(), vec![0.0]);
        assert!(parse_sweep("0:1").is_err());
        assert_eq!(parse_grid("0:1:3").unwrap(), vec![0.0, 0.5, 1.0]);
        assert!(parse_grid("0:1:0").is_err());
        assert!(parse_grid("0:1:2.5").is_err());
    }

    #[test]
    fn missing_relay_power_is_an_error() {
        let e =
            ScenarioFile::parse("n_s = 1\nn_r = 1\np_s_db = 0.0\n[correlation]\nmodel = \"identity\"\n").unwrap_err();
        assert!(e.to_string().contains("p_r_db"));
    }
}
