//! Seeded Monte-Carlo sweeps over one cell parameter, with CSV output.
//!
//! Every (sweep point, trial) pair gets its own scenario seed derived from the
//! master seed, so results do not depend on thread count or scheduling.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::assignment::AssignmentPolicy;
use crate::channel::{generate_scenario, CellConfig, DEFAULT_P_B_OVER_N0_DB, DEFAULT_TAU_OVER_N0};
use crate::dinkelbach::{solve, tau_filtered_fraction, SolverConfig};
use crate::error::{Error, Result};
use crate::power::RateMode;

/// Environment variable capping the worker pool size.
pub const THREADS_ENV: &str = "D2D_EE_THREADS";
pub const DEFAULT_TRIALS: usize = 500;
pub const DEFAULT_MASTER_SEED: u64 = 20_170_101;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SweepParam {
    PbOverN0Db,
    ND2d,
    D2dDistanceM,
    GammaBps,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::PbOverN0Db => "p_b_over_n0_db",
            SweepParam::ND2d => "n_d2d",
            SweepParam::D2dDistanceM => "d2d_distance_m",
            SweepParam::GammaBps => "gamma_bps",
        }
    }

    /// Returns a copy of `base` with this parameter set to `value`.
    pub fn apply(self, base: &CellConfig, value: f64) -> Result<CellConfig> {
        let mut cfg = base.clone();
        match self {
            SweepParam::PbOverN0Db => cfg.p_b_over_n0_db = value,
            SweepParam::ND2d => {
                if !(value >= 0.0) || value.fract() != 0.0 || value > usize::MAX as f64 {
                    return Err(Error::InvalidConfig(format!("n_d2d sweep value must be a non-negative integer, got {value}")));
                }
                cfg.n_d2d = value as usize;
            }
            SweepParam::D2dDistanceM => cfg.d2d_distance_m = value,
            SweepParam::GammaBps => cfg.gamma_bps = value,
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "p_b_over_n0_db" => Ok(SweepParam::PbOverN0Db),
            "n_d2d" => Ok(SweepParam::ND2d),
            "d2d_distance_m" => Ok(SweepParam::D2dDistanceM),
            "gamma_bps" => Ok(SweepParam::GammaBps),
            other => Err(Error::InvalidConfig(format!("unknown sweep parameter '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub param: SweepParam,
    pub values: Vec<f64>,
}

/// The four canned sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Preset {
    /// CU received power at the BS, 10 dB span.
    PbSweep,
    /// Number of D2D pairs, for iteration counts.
    Iterations,
    /// D2D link length from 10 m to 100 m.
    Distance,
    /// Per-pair minimum rate.
    Gamma,
}

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::PbSweep => "pb_sweep",
            Preset::Iterations => "iterations",
            Preset::Distance => "distance",
            Preset::Gamma => "gamma",
        }
    }

    pub fn sweep(self) -> Sweep {
        match self {
            Preset::PbSweep => Sweep {
                param: SweepParam::PbOverN0Db,
                values: (0..=5).map(|k| DEFAULT_P_B_OVER_N0_DB - 10.0 + 2.0 * k as f64).collect(),
            },
            Preset::Iterations => Sweep {
                param: SweepParam::ND2d,
                values: vec![4.0, 8.0, 12.0],
            },
            Preset::Distance => Sweep {
                param: SweepParam::D2dDistanceM,
                values: (1..=10).map(|k| 10.0 * k as f64).collect(),
            },
            Preset::Gamma => Sweep {
                param: SweepParam::GammaBps,
                values: [0.0, 0.5, 1.0, 2.0, 4.0, 6.0, 8.0, 10.0, 12.0, 14.0, 16.0]
                    .iter()
                    .map(|per_hz| per_hz * crate::channel::DEFAULT_RB_BANDWIDTH_HZ)
                    .collect(),
            },
        }
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pb_sweep" => Ok(Preset::PbSweep),
            "iterations" => Ok(Preset::Iterations),
            "distance" => Ok(Preset::Distance),
            "gamma" => Ok(Preset::Gamma),
            other => Err(Error::InvalidConfig(format!("unknown experiment '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub base: CellConfig,
    pub sweep: Sweep,
    pub trials: usize,
    pub master_seed: u64,
    pub mode: RateMode,
    pub output_path: PathBuf,
    pub epsilon: f64,
    pub max_iterations: usize,
    pub policy: AssignmentPolicy,
    /// Reuse the same scenario seeds at every sweep point.
    pub common_random_numbers: bool,
    /// Fill `runtime_ms` with wall-clock time instead of 0.
    pub record_runtime: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self::from_preset(Preset::Distance)
    }
}

impl ExperimentConfig {
    pub fn from_preset(preset: Preset) -> Self {
        let solver = SolverConfig::default();
        Self {
            base: CellConfig::default(),
            sweep: preset.sweep(),
            trials: DEFAULT_TRIALS,
            master_seed: DEFAULT_MASTER_SEED,
            mode: RateMode::NoCuLoss,
            output_path: PathBuf::from(format!("{}.csv", preset.name())),
            epsilon: solver.epsilon,
            max_iterations: solver.max_iterations,
            policy: AssignmentPolicy::DropInfeasible,
            common_random_numbers: true,
            record_runtime: false,
        }
    }

    pub fn solver(&self) -> SolverConfig {
        SolverConfig {
            epsilon: self.epsilon,
            max_iterations: self.max_iterations,
            mode: self.mode,
            policy: self.policy,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        if self.sweep.values.is_empty() {
            return Err(Error::InvalidConfig("sweep values must not be empty".into()));
        }
        self.base.validate()?;
        self.solver().validate()?;
        for &v in &self.sweep.values {
            if !v.is_finite() {
                return Err(Error::InvalidConfig(format!("sweep value {v} is not finite")));
            }
            self.sweep.param.apply(&self.base, v)?;
        }
        Ok(())
    }

    /// Builds a config from `key = value` pairs on top of the defaults.
    ///
    /// An `experiment` key selects a preset first; explicit keys then override
    /// it. `tau_over_n0` sets the threshold relative to the configured noise.
    pub fn from_pairs(pairs: &BTreeMap<String, String>) -> Result<Self> {
        let mut cfg = match pairs.get("experiment") {
            Some(name) => Self::from_preset(name.parse()?),
            None => Self::default(),
        };
        let mut tau_over_n0 = None;
        let mut tau_set = false;
        for (key, value) in pairs {
            let b = &mut cfg.base;
            match key.as_str() {
                "experiment" => {}
                "cell_radius_m" => b.cell_radius_m = parse(key, value)?,
                "kappa" => b.kappa = parse(key, value)?,
                "chi" => b.chi = parse(key, value)?,
                "shadowing_sigma_db" => b.shadowing_sigma_db = parse(key, value)?,
                "noise_psd_dbm_per_hz" => b.noise_psd_dbm_per_hz = parse(key, value)?,
                "rb_bandwidth_hz" => b.rb_bandwidth_hz = parse(key, value)?,
                "n_cu" => b.n_cu = parse(key, value)?,
                "n_rb" => b.n_rb = parse(key, value)?,
                "n_d2d" => b.n_d2d = parse(key, value)?,
                "p_max_w" => b.p_max_w = parse(key, value)?,
                "p_b_over_n0_db" => b.p_b_over_n0_db = parse(key, value)?,
                "tau_w" => {
                    b.tau_w = parse(key, value)?;
                    tau_set = true;
                }
                "tau_over_n0" => tau_over_n0 = Some(parse::<f64>(key, value)?),
                "gamma_bps" => b.gamma_bps = parse(key, value)?,
                "p_c_w" => b.p_c_w = parse(key, value)?,
                "d2d_distance_m" => b.d2d_distance_m = parse(key, value)?,
                "sweep_param" => cfg.sweep.param = value.parse()?,
                "sweep_values" => cfg.sweep.values = parse_list(key, value)?,
                "trials" => cfg.trials = parse(key, value)?,
                "master_seed" => cfg.master_seed = parse(key, value)?,
                "mode" => cfg.mode = parse_mode(value)?,
                "output_path" => cfg.output_path = PathBuf::from(value),
                "epsilon" => cfg.epsilon = parse(key, value)?,
                "max_iterations" => cfg.max_iterations = parse(key, value)?,
                "policy" => cfg.policy = parse_policy(value)?,
                "common_random_numbers" => cfg.common_random_numbers = parse(key, value)?,
                "record_runtime" => cfg.record_runtime = parse(key, value)?,
                other => return Err(Error::InvalidConfig(format!("unknown key '{other}'"))),
            }
        }
        match (tau_over_n0, tau_set) {
            (Some(_), true) => {
                return Err(Error::InvalidConfig("set only one of tau_w and tau_over_n0".into()));
            }
            (Some(ratio), false) => cfg.base.tau_w = ratio * cfg.base.noise_w(),
            (None, false) => cfg.base.tau_w = DEFAULT_TAU_OVER_N0 * cfg.base.noise_w(),
            (None, true) => {}
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::InvalidConfig(format!("cannot parse value '{value}' for key '{key}'")))
}

fn parse_list(key: &str, value: &str) -> Result<Vec<f64>> {
    value.split(',').filter(|s| !s.trim().is_empty()).map(|s| parse(key, s)).collect()
}

pub fn parse_mode(value: &str) -> Result<RateMode> {
    match value.trim() {
        "no-cu-loss" | "no_cu_loss" => Ok(RateMode::NoCuLoss),
        "cu-loss" | "cu_loss" => Ok(RateMode::CuLoss),
        other => Err(Error::InvalidConfig(format!("unknown mode '{other}'"))),
    }
}

fn parse_policy(value: &str) -> Result<AssignmentPolicy> {
    match value.trim() {
        "strict" => Ok(AssignmentPolicy::Strict),
        "drop" | "drop-infeasible" | "drop_infeasible" => Ok(AssignmentPolicy::DropInfeasible),
        other => Err(Error::InvalidConfig(format!("unknown policy '{other}'"))),
    }
}

/// Parses a flat `key = value` file. `#` starts a comment; blank lines are skipped.
pub fn parse_key_values(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::InvalidConfig(format!("line {}: expected key = value", lineno + 1)));
        };
        let key = key.trim();
        if key.is_empty() {
            return Err(Error::InvalidConfig(format!("line {}: empty key", lineno + 1)));
        }
        if out.insert(key.to_string(), value.trim().to_string()).is_some() {
            return Err(Error::InvalidConfig(format!("line {}: duplicate key '{key}'", lineno + 1)));
        }
    }
    Ok(out)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Scenario seed for one (sweep stream, trial) cell.
pub fn trial_seed(master_seed: u64, sweep_index: u64, trial: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(master_seed) ^ sweep_index) ^ trial)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub sweep_param: String,
    pub sweep_value: f64,
    pub trial: usize,
    pub seed: u64,
    pub ee_per_hz: f64,
    pub iterations: usize,
    pub feasible_pairs: usize,
    pub runtime_ms: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrialOutcome {
    Converged,
    NotConverged,
    Failed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub rows: Vec<ResultRow>,
    pub outcomes: Vec<TrialOutcome>,
    /// Mean fraction of (pair, RB) entries rejected by the interference threshold.
    pub tau_filtered_fraction: f64,
}

impl ExperimentReport {
    pub fn count(&self, outcome: TrialOutcome) -> usize {
        self.outcomes.iter().filter(|&&o| o == outcome).count()
    }
}

fn run_trial(cfg: &ExperimentConfig, cell: &CellConfig, value: f64, stream: u64, trial: usize) -> (ResultRow, TrialOutcome, f64) {
    let seed = trial_seed(cfg.master_seed, stream, trial as u64);
    let start = Instant::now();
    let mut row = ResultRow {
        sweep_param: cfg.sweep.param.name().to_string(),
        sweep_value: value,
        trial,
        seed,
        ee_per_hz: 0.0,
        iterations: 0,
        feasible_pairs: 0,
        runtime_ms: 0.0,
    };
    let (outcome, filtered) = match generate_scenario(cell, seed) {
        Ok(scenario) => {
            let inst = scenario.instance();
            let filtered = tau_filtered_fraction(&inst);
            let outcome = match solve(&inst, &cfg.solver()) {
                Ok(sol) => {
                    row.ee_per_hz = sol.ee / inst.w_hz;
                    row.iterations = sol.iterations();
                    row.feasible_pairs = sol.assignment.served_count();
                    TrialOutcome::Converged
                }
                Err(Error::NotConverged { iterations, best_ee, .. }) => {
                    row.ee_per_hz = best_ee / inst.w_hz;
                    row.iterations = iterations;
                    TrialOutcome::NotConverged
                }
                Err(_) => TrialOutcome::Failed,
            };
            (outcome, filtered)
        }
        Err(_) => (TrialOutcome::Failed, 0.0),
    };
    if cfg.record_runtime {
        row.runtime_ms = start.elapsed().as_secs_f64() * 1e3;
    }
    (row, outcome, filtered)
}

fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(raw) = std::env::var(THREADS_ENV) {
        let n: usize = raw
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| Error::InvalidConfig(format!("{THREADS_ENV} must be a positive integer, got '{raw}'")))?;
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| Error::InvalidConfig(format!("cannot build thread pool: {e}")))
}

/// Runs every (sweep value, trial) cell and returns rows in sweep-then-trial order.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let cells = cfg
        .sweep
        .values
        .iter()
        .enumerate()
        .map(|(k, &v)| Ok((k, v, cfg.sweep.param.apply(&cfg.base, v)?)))
        .collect::<Result<Vec<_>>>()?;
    let jobs: Vec<(usize, usize)> = (0..cells.len()).flat_map(|k| (0..cfg.trials).map(move |t| (k, t))).collect();
    let pool = thread_pool()?;
    let results: Vec<_> = pool.install(|| {
        jobs.par_iter()
            .map(|&(k, t)| {
                let (index, value, cell) = &cells[k];
                let stream = if cfg.common_random_numbers { 0 } else { *index as u64 };
                run_trial(cfg, cell, *value, stream, t)
            })
            .collect()
    });
    let n = results.len() as f64;
    let tau_filtered_fraction = results.iter().map(|r| r.2).sum::<f64>() / n;
    let (rows, outcomes) = results.into_iter().map(|(r, o, _)| (r, o)).unzip();
    Ok(ExperimentReport {
        rows,
        outcomes,
        tau_filtered_fraction,
    })
}

pub fn write_csv<W: Write>(rows: &[ResultRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for row in rows {
        w.serialize(row)?;
    }
    if rows.is_empty() {
        w.write_record(CSV_HEADER)?;
    }
    w.flush()?;
    Ok(())
}

pub const CSV_HEADER: [&str; 8] = [
    "sweep_param",
    "sweep_value",
    "trial",
    "seed",
    "ee_per_hz",
    "iterations",
    "feasible_pairs",
    "runtime_ms",
];

pub fn write_csv_file(rows: &[ResultRow], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_csv(rows, std::io::BufWriter::new(file))
}

pub fn read_csv<R: Read>(reader: R) -> Result<Vec<ResultRow>> {
    let mut r = csv::Reader::from_reader(reader);
    let header = r.headers()?.clone();
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(Error::Parse(format!("unexpected CSV header: {}", header.iter().collect::<Vec<_>>().join(","))));
    }
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Stats {
    pub mean: f64,
    pub std: f64,
    pub count: usize,
}

impl Stats {
    /// Mean and sample standard deviation (0 for a single value).
    pub fn of(values: &[f64]) -> Stats {
        let count = values.len();
        if count == 0 {
            return Stats {
                mean: f64::NAN,
                std: f64::NAN,
                count,
            };
        }
        let mean = values.iter().sum::<f64>() / count as f64;
        let std = if count > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1) as f64).sqrt()
        } else {
            0.0
        };
        Stats { mean, std, count }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub sweep_param: String,
    pub sweep_value: f64,
    pub ee_per_hz: Stats,
    pub iterations: Stats,
}

/// Groups rows by (sweep_param, sweep_value) in first-seen order.
pub fn summarize_rows(rows: &[ResultRow]) -> Vec<SummaryRow> {
    let mut groups: Vec<(String, f64, Vec<f64>, Vec<f64>)> = Vec::new();
    for row in rows {
        let pos = groups
            .iter()
            .position(|g| g.0 == row.sweep_param && g.1.to_bits() == row.sweep_value.to_bits());
        let g = match pos {
            Some(p) => &mut groups[p],
            None => {
                groups.push((row.sweep_param.clone(), row.sweep_value, Vec::new(), Vec::new()));
                groups.last_mut().expect("just pushed")
            }
        };
        g.2.push(row.ee_per_hz);
        g.3.push(row.iterations as f64);
    }
    groups
        .into_iter()
        .map(|(sweep_param, sweep_value, ee, it)| SummaryRow {
            sweep_param,
            sweep_value,
            ee_per_hz: Stats::of(&ee),
            iterations: Stats::of(&it),
        })
        .collect()
}

pub fn summarize(path: &Path) -> Result<Vec<SummaryRow>> {
    let file = std::fs::File::open(path)?;
    Ok(summarize_rows(&read_csv(std::io::BufReader::new(file))?))
}
