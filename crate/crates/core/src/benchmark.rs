//! Grid-search benchmark for the relay power split and rate sweeps over
//! the relay power.
//!
//! Candidates are indexed by the budget fraction consumed by modes `2..=κ`,
//! each taking a level from `{10^{-k r/10} : 0 ≤ k ≤ K} ∪ {0}` with
//! `K = ⌊floor_db / r⌋`. Mode 1 receives the remainder, so every candidate
//! spends exactly `P_R`. Candidates whose gains are not descending are
//! skipped.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::montecarlo::{RateEstimate, SampleBank};
use crate::power::{allocate, equal_power_allocation, PowerAllocation, Scenario, MIN_CONDITION_SAMPLES};

pub const DEFAULT_RESOLUTION_DB: f64 = 0.1;

/// Smallest nonzero fraction of the budget a mode can receive, in dB below
/// the full budget.
pub const DEFAULT_FLOOR_DB: f64 = 30.0;

pub const DEFAULT_GRID_CAP: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SearchStrategy {
    /// Every point of the grid.
    Exhaustive,
    /// Exhaustive on a grid at `coarse_db`, then the full-resolution grid
    /// within one coarse step of the coarse optimum in every coordinate.
    CoarseToFine { coarse_db: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchConfig {
    pub resolution_db: f64,
    pub floor_db: f64,
    /// Largest raw grid (before feasibility filtering) that may be searched.
    pub cap: usize,
    pub strategy: SearchStrategy,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            resolution_db: DEFAULT_RESOLUTION_DB,
            floor_db: DEFAULT_FLOOR_DB,
            cap: DEFAULT_GRID_CAP,
            strategy: SearchStrategy::Exhaustive,
        }
    }
}

fn levels_for(resolution_db: f64, floor_db: f64) -> usize {
    (floor_db / resolution_db + 1e-9).floor() as usize
}

fn raw_size(levels: usize, kappa: usize) -> u128 {
    (levels as u128 + 2).pow(kappa.saturating_sub(1) as u32)
}

impl SearchConfig {
    pub fn with_resolution(resolution_db: f64) -> Self {
        Self {
            resolution_db,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.resolution_db > 0.0 && self.resolution_db.is_finite()) {
            return Err(Error::Domain(format!(
                "resolution must be positive, got {} dB",
                self.resolution_db
            )));
        }
        if !(self.floor_db >= self.resolution_db && self.floor_db.is_finite()) {
            return Err(Error::Domain(format!(
                "floor of {} dB is below the resolution of {} dB",
                self.floor_db, self.resolution_db
            )));
        }
        if let SearchStrategy::CoarseToFine { coarse_db } = self.strategy {
            let ratio = coarse_db / self.resolution_db;
            if !(ratio >= 1.0 && (ratio - ratio.round()).abs() < 1e-9 && coarse_db <= self.floor_db) {
                return Err(Error::Domain(format!(
                    "coarse step {coarse_db} dB must be a multiple of {} dB and at most the floor",
                    self.resolution_db
                )));
            }
        }
        Ok(())
    }

    /// Index `K` of the smallest nonzero level.
    pub fn levels(&self) -> usize {
        levels_for(self.resolution_db, self.floor_db)
    }

    /// Raw exhaustive grid size `(K + 2)^{κ−1}`.
    pub fn grid_size(&self, kappa: usize) -> u128 {
        raw_size(self.levels(), kappa)
    }

    /// Smallest resolution, on a 0.01 dB grid, that fits under the cap.
    fn suggested_resolution(&self, kappa: usize) -> f64 {
        let mut r = (self.resolution_db * 100.0).ceil() / 100.0;
        while r < self.floor_db && raw_size(levels_for(r, self.floor_db), kappa) > self.cap as u128 {
            r += 0.01;
        }
        (r * 100.0).round() / 100.0
    }

    fn check_cap(&self, size: u128, kappa: usize) -> Result<()> {
        if size > self.cap as u128 {
            Err(Error::BudgetExplosion {
                cap: self.cap,
                resolution_db: self.resolution_db,
                suggested_db: self.suggested_resolution(kappa),
            })
        } else {
            Ok(())
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub best_alloc: PowerAllocation,
    pub best_rate: RateEstimate,
    /// Feasible candidates whose rate was estimated.
    pub grid_points_evaluated: usize,
    /// Raw grid points visited, feasible or not.
    pub grid_size: usize,
    pub resolution_db: f64,
    /// Largest rate difference between the optimum and its feasible
    /// neighbours one step away at full resolution.
    pub cell_gap: f64,
}

/// Candidate grid at one resolution: coordinate `i` in `0..=K` is the level
/// `10^{-i r/10}`, and `K + 1` stands for zero.
struct Grid<'a> {
    s: &'a Scenario,
    kappa: usize,
    levels: usize,
    step: f64,
}

impl<'a> Grid<'a> {
    fn new(s: &'a Scenario, resolution_db: f64, floor_db: f64) -> Self {
        Self {
            s,
            kappa: s.kappa(),
            levels: levels_for(resolution_db, floor_db),
            step: resolution_db,
        }
    }

    fn fraction(&self, i: usize) -> f64 {
        if i > self.levels {
            0.0
        } else {
            10f64.powf(-(i as f64) * self.step / 10.0)
        }
    }

    /// Gains for the index vector, or `None` if infeasible.
    fn gains(&self, idx: &[usize]) -> Option<Vec<f64>> {
        let s = self.s;
        let mut f = vec![0.0; self.kappa];
        for (j, &i) in idx.iter().enumerate() {
            f[j + 1] = self.fraction(i);
        }
        let rest: f64 = f[1..].iter().sum();
        f[0] = 1.0 - rest;
        if f[0] <= 1e-12 {
            return None;
        }
        let mut gains = vec![0.0; s.n_r()];
        for (j, &fj) in f.iter().enumerate() {
            gains[j] = fj * s.p_r() / (s.p_s() * s.lambdas()[j] + s.n0());
        }
        if gains.windows(2).any(|w| w[1] > w[0]) {
            return None;
        }
        let scale = s.p_r() / s.relay_power(&gains);
        for g in &mut gains {
            *g *= scale;
        }
        Some(gains)
    }
}

/// Calls `f` on every index vector in the box `lo..=hi`, last coordinate
/// fastest.
fn for_each_index(lo: &[usize], hi: &[usize], mut f: impl FnMut(&[usize])) {
    let mut idx = lo.to_vec();
    loop {
        f(&idx);
        let mut d = idx.len();
        loop {
            if d == 0 {
                return;
            }
            d -= 1;
            if idx[d] < hi[d] {
                idx[d] += 1;
                break;
            }
            idx[d] = lo[d];
        }
    }
}

/// Gains of a feasible candidate with their rate.
type Candidate = (Vec<f64>, RateEstimate);

fn better(a: &Candidate, b: &Candidate) -> bool {
    match a.1.mean.total_cmp(&b.1.mean) {
        std::cmp::Ordering::Greater => true,
        std::cmp::Ordering::Less => false,
        std::cmp::Ordering::Equal => {
            for (x, y) in a.0.iter().zip(&b.0) {
                match x.total_cmp(y) {
                    std::cmp::Ordering::Greater => return true,
                    std::cmp::Ordering::Less => return false,
                    std::cmp::Ordering::Equal => {}
                }
            }
            false
        }
    }
}

/// Memoized rate evaluation over one grid.
struct Evaluator<'a> {
    grid: Grid<'a>,
    bank: &'a SampleBank,
    seen: HashMap<Vec<usize>, Option<Candidate>>,
    evaluated: usize,
    visited: usize,
}

impl<'a> Evaluator<'a> {
    fn new(grid: Grid<'a>, bank: &'a SampleBank) -> Self {
        Self {
            grid,
            bank,
            seen: HashMap::new(),
            evaluated: 0,
            visited: 0,
        }
    }

    fn eval(&mut self, idx: &[usize]) -> Option<Candidate> {
        if let Some(v) = self.seen.get(idx) {
            return v.clone();
        }
        self.visited += 1;
        let v = self.grid.gains(idx).map(|g| {
            self.evaluated += 1;
            let r = self.bank.rate_for_gains(&g);
            (g, r)
        });
        self.seen.insert(idx.to_vec(), v.clone());
        v
    }

    /// Best point in the box `lo..=hi`.
    fn best_in(&mut self, lo: &[usize], hi: &[usize]) -> Option<(Vec<usize>, Vec<f64>, RateEstimate)> {
        let mut best: Option<(Vec<usize>, Candidate)> = None;
        for_each_index(lo, hi, |idx| {
            if let Some(c) = self.eval(idx) {
                if best.as_ref().is_none_or(|(_, b)| better(&c, b)) {
                    best = Some((idx.to_vec(), c));
                }
            }
        });
        best.map(|(i, (g, r))| (i, g, r))
    }

    fn neighbour_gap(&mut self, idx: &[usize], rate: f64) -> f64 {
        let top = self.grid.levels + 1;
        let mut gap = 0.0_f64;
        for d in 0..idx.len() {
            for up in [false, true] {
                let mut n = idx.to_vec();
                if up && n[d] < top {
                    n[d] += 1;
                } else if !up && n[d] > 0 {
                    n[d] -= 1;
                } else {
                    continue;
                }
                if let Some((_, r)) = self.eval(&n) {
                    gap = gap.max((r.mean - rate).abs());
                }
            }
        }
        gap
    }
}

/// Searches the default grid at `resolution_db`.
pub fn exhaustive_search(s: &Scenario, resolution_db: f64, samples: usize, seed: u64) -> Result<SearchResult> {
    search(s, &SearchConfig::with_resolution(resolution_db), samples, seed)
}

pub fn search(s: &Scenario, cfg: &SearchConfig, samples: usize, seed: u64) -> Result<SearchResult> {
    cfg.validate()?;
    let bank = SampleBank::new(s, samples, seed)?;
    search_with_bank(s, cfg, &bank)
}

/// Search using pre-drawn samples; `bank` must come from `s`.
pub fn search_with_bank(s: &Scenario, cfg: &SearchConfig, bank: &SampleBank) -> Result<SearchResult> {
    cfg.validate()?;
    let kappa = s.kappa();
    let dims = kappa - 1;
    let fine_levels = cfg.levels();
    let (lo, hi, coarse_stats) = match cfg.strategy {
        SearchStrategy::Exhaustive => {
            cfg.check_cap(cfg.grid_size(kappa), kappa)?;
            (vec![0; dims], vec![fine_levels + 1; dims], (0, 0))
        }
        SearchStrategy::CoarseToFine { coarse_db } => {
            let coarse_levels = levels_for(coarse_db, cfg.floor_db);
            cfg.check_cap(raw_size(coarse_levels, kappa), kappa)?;
            let m = (coarse_db / cfg.resolution_db).round() as usize;
            cfg.check_cap((2 * m as u128 + 1).pow(dims as u32), kappa)?;
            let mut coarse = Evaluator::new(Grid::new(s, coarse_db, cfg.floor_db), bank);
            let (c_idx, _, _) = coarse
                .best_in(&vec![0; dims], &vec![coarse_levels + 1; dims])
                .ok_or_else(|| Error::Domain("no feasible candidate".into()))?;
            let centre: Vec<usize> = c_idx
                .iter()
                .map(|&c| if c > coarse_levels { fine_levels + 1 } else { c * m })
                .collect();
            let lo = centre.iter().map(|&c| c.saturating_sub(m)).collect();
            let hi = centre.iter().map(|&c| (c + m).min(fine_levels + 1)).collect();
            (lo, hi, (coarse.evaluated, coarse.visited))
        }
    };
    let mut fine = Evaluator::new(Grid::new(s, cfg.resolution_db, cfg.floor_db), bank);
    let (idx, gains, rate) = fine
        .best_in(&lo, &hi)
        .ok_or_else(|| Error::Domain("no feasible candidate".into()))?;
    let (evaluated, visited) = (fine.evaluated, fine.visited);
    let cell_gap = fine.neighbour_gap(&idx, rate.mean);
    Ok(SearchResult {
        best_alloc: PowerAllocation::from_gains(s, gains)?,
        best_rate: rate,
        grid_points_evaluated: evaluated + coarse_stats.0,
        grid_size: visited + coarse_stats.1,
        resolution_db: cfg.resolution_db,
        cell_gap,
    })
}

/// Every feasible candidate of the exhaustive grid.
pub fn grid_candidates(s: &Scenario, cfg: &SearchConfig) -> Result<Vec<PowerAllocation>> {
    cfg.validate()?;
    let kappa = s.kappa();
    cfg.check_cap(cfg.grid_size(kappa), kappa)?;
    let grid = Grid::new(s, cfg.resolution_db, cfg.floor_db);
    let dims = kappa - 1;
    let mut out = Vec::new();
    let mut err = None;
    for_each_index(&vec![0; dims], &vec![grid.levels + 1; dims], |idx| {
        if let Some(g) = grid.gains(idx) {
            match PowerAllocation::from_gains(s, g) {
                Ok(a) => out.push(a),
                Err(e) => err = Some(e),
            }
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Proposed,
    Equal,
    Benchmark,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Proposed => "proposed",
            Method::Equal => "equal",
            Method::Benchmark => "benchmark",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(v: &str) -> Result<Self> {
        match v.trim() {
            "proposed" => Ok(Method::Proposed),
            "equal" => Ok(Method::Equal),
            "benchmark" => Ok(Method::Benchmark),
            other => Err(Error::Domain(format!("unknown method `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSettings {
    /// Samples for every rate estimate.
    pub samples: usize,
    /// Samples for the n-LER condition estimates.
    pub condition_samples: usize,
    pub seed: u64,
    pub search: SearchConfig,
}

impl SweepSettings {
    pub fn new(samples: usize, seed: u64) -> Self {
        Self {
            samples,
            condition_samples: samples.max(MIN_CONDITION_SAMPLES),
            seed,
            search: SearchConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub p_r_db: f64,
    pub method: Method,
    pub rate: RateEstimate,
    pub alloc: PowerAllocation,
    /// Active modes of the proposed allocation.
    pub active_modes: Option<usize>,
    /// Candidates evaluated by the benchmark.
    pub grid_points: Option<usize>,
    /// Benchmark rate gap to its grid neighbours.
    pub cell_gap: Option<f64>,
}

/// `10^{db/10}`.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn rate_sweep(
    s: &Scenario,
    p_r_grid_db: &[f64],
    methods: &[Method],
    samples: usize,
    seed: u64,
) -> Result<Vec<SweepRow>> {
    rate_sweep_with(s, p_r_grid_db, methods, &SweepSettings::new(samples, seed))
}

/// One row per relay power and method, in the given orders. All rates share
/// one sample bank; the relay power does not enter the channel draws.
pub fn rate_sweep_with(
    s: &Scenario,
    p_r_grid_db: &[f64],
    methods: &[Method],
    cfg: &SweepSettings,
) -> Result<Vec<SweepRow>> {
    if methods.is_empty() {
        return Err(Error::EmptyMethods);
    }
    if p_r_grid_db.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut unique: Vec<Method> = Vec::new();
    for &m in methods {
        if !unique.contains(&m) {
            unique.push(m);
        }
    }
    let bank = SampleBank::new(s, cfg.samples, cfg.seed)?;
    let mut rows = Vec::new();
    for &db in p_r_grid_db {
        let sp = s.with_p_r(db_to_linear(db))?;
        for &m in &unique {
            let row = match m {
                Method::Proposed => {
                    let a = allocate(&sp, cfg.condition_samples, cfg.seed)?;
                    SweepRow {
                        p_r_db: db,
                        method: m,
                        rate: bank.rate(&a),
                        active_modes: Some(a.active_modes()),
                        alloc: a,
                        grid_points: None,
                        cell_gap: None,
                    }
                }
                Method::Equal => {
                    let a = equal_power_allocation(&sp)?;
                    SweepRow {
                        p_r_db: db,
                        method: m,
                        rate: bank.rate(&a),
                        alloc: a,
                        active_modes: None,
                        grid_points: None,
                        cell_gap: None,
                    }
                }
                Method::Benchmark => {
                    let r = search_with_bank(&sp, &cfg.search, &bank)?;
                    SweepRow {
                        p_r_db: db,
                        method: m,
                        rate: r.best_rate,
                        alloc: r.best_alloc,
                        active_modes: None,
                        grid_points: Some(r.grid_points_evaluated),
                        cell_gap: Some(r.cell_gap),
                    }
                }
            };
            rows.push(row);
        }
    }
    Ok(rows)
}
