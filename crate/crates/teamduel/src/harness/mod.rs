//! Seeded batch experiments: configuration, trial execution, verification,
//! weak regret and reports.

mod io;

use std::path::PathBuf;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::detalg::{find_condorcet_additive, find_condorcet_general, reduce_players_bound, MAX_GENERAL_K};
use crate::model::{
    generate_instance, verify_condorcet, GeneratorSpec, Instance, ModelError, OrderSpec, Team, DEFAULT_COMPARISON_CAP,
    DEFAULT_TRIPLE_CAP,
};
use crate::oracle::{AmplifiedOracle, DeterministicOracle, DuelOracle, DuelRecord, OracleError, StochasticOracle};
use crate::reduction::{identify_top_k, DEFAULT_SAMPLE_BUDGET};
use crate::witness::{gap, triple_count};

pub use io::{load_instance, read_config, save_instance, write_csv, write_summary, CSV_HEADER};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("invalid config: {0}")]
    Config(String),
    #[error("trace holds {got} duels, horizon is {needed}")]
    TraceTooShort { needed: usize, got: usize },
}

/// Solver run in each trial.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    /// Player reduction plus the partition-based search; additive orders.
    Additive,
    /// Player reduction plus exhaustive candidate tests; any consistent order.
    General,
    /// Successive elimination on simulated single-player duels.
    TopK,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Additive => "additive",
            Algorithm::General => "general",
            Algorithm::TopK => "topk",
        }
    }
}

/// Where trial instances come from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InstanceSource {
    /// A fresh instance per trial, drawn with the trial's seed.
    Generate(GeneratorSpec),
    /// One fixed instance; only the oracle randomness changes between trials.
    File(PathBuf),
}

/// Caps and guards applied in every trial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Limits {
    /// Largest opponent count for exhaustive Condorcet verification.
    pub comparison_cap: u64,
    /// Largest triple count for computing the gap.
    pub triple_cap: u64,
    /// Singles samples allowed to the top-k solver.
    pub sample_budget: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            comparison_cap: DEFAULT_COMPARISON_CAP,
            triple_cap: DEFAULT_TRIPLE_CAP,
            sample_budget: DEFAULT_SAMPLE_BUDGET,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub instance: InstanceSource,
    pub algorithm: Algorithm,
    #[serde(default = "one")]
    pub trials: u64,
    #[serde(default)]
    pub seed_base: u64,
    /// Confidence level for top-k and amplification.
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default)]
    pub csv: Option<PathBuf>,
    #[serde(default)]
    pub summary: Option<PathBuf>,
    #[serde(default)]
    pub limits: Limits,
    /// Fill `wall_ms`; off by default so reports are byte-reproducible.
    #[serde(default)]
    pub record_wall_time: bool,
}

fn one() -> u64 {
    1
}

fn default_delta() -> f64 {
    0.1
}

impl ExperimentConfig {
    pub fn new(instance: InstanceSource, algorithm: Algorithm, trials: u64) -> Self {
        Self {
            instance,
            algorithm,
            trials,
            seed_base: 0,
            delta: default_delta(),
            csv: None,
            summary: None,
            limits: Limits::default(),
            record_wall_time: false,
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |msg: String| Err(HarnessError::Config(msg));
        if self.trials == 0 {
            return bad("trials must be positive".into());
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return bad(format!("delta must lie in (0, 1), got {}", self.delta));
        }
        let l = &self.limits;
        if l.comparison_cap == 0 || l.triple_cap == 0 || l.sample_budget == 0 {
            return bad("caps must be positive".into());
        }
        if let InstanceSource::Generate(spec) = &self.instance {
            match self.algorithm {
                Algorithm::Additive if matches!(spec.order, OrderSpec::Explicit) => {
                    return bad("the additive solver needs an additive or lexicographic order".into());
                }
                Algorithm::General if spec.k > MAX_GENERAL_K => {
                    return bad(format!("the general solver supports k <= {MAX_GENERAL_K}"));
                }
                Algorithm::TopK if spec.n < 3 * spec.k => return bad("top-k needs n >= 3k".into()),
                _ => {}
            }
        }
        Ok(())
    }
}

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Generator stream of trial `index`: the trial seed `base + index` run through [`mix64`].
pub fn trial_stream(seed_base: u64, index: u64) -> u64 {
    mix64(seed_base.wrapping_add(index))
}

/// Duels the additive solver is assumed to issue at most, used to size amplification.
pub fn declared_duel_budget(n: usize, k: usize) -> u64 {
    reduce_players_bound(n, k) + 8 * (k as u64).pow(5)
}

/// One row of a report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialResult {
    pub instance_id: String,
    pub n: usize,
    pub k: usize,
    pub algo: Algorithm,
    pub seed: u64,
    /// Duels issued to the environment, counting every repetition.
    pub duels: u64,
    pub success: bool,
    pub wall_ms: u64,
    /// Gap of the instance when the triple count fits the cap.
    pub delta: Option<f64>,
    pub regret: Option<f64>,
    /// Output team, if the solver returned one.
    pub team: Option<Team>,
    pub error: Option<String>,
}

/// Aggregates over the rows of a report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub trials: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub mean_duels: f64,
    pub median_duels: f64,
}

impl Summary {
    pub fn from_rows(rows: &[TrialResult]) -> Self {
        let trials = rows.len();
        let successes = rows.iter().filter(|r| r.success).count();
        let mut duels: Vec<u64> = rows.iter().map(|r| r.duels).collect();
        duels.sort_unstable();
        let mean_duels = if trials == 0 { 0.0 } else { duels.iter().sum::<u64>() as f64 / trials as f64 };
        let median_duels = match trials {
            0 => 0.0,
            t if t % 2 == 1 => duels[t / 2] as f64,
            t => (duels[t / 2 - 1] + duels[t / 2]) as f64 / 2.0,
        };
        let success_rate = if trials == 0 { 0.0 } else { successes as f64 / trials as f64 };
        Self { trials, successes, success_rate, mean_duels, median_duels }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub rows: Vec<TrialResult>,
    pub summary: Summary,
}

impl Report {
    pub fn all_verified(&self) -> bool {
        self.rows.iter().all(|r| r.success)
    }
}

/// What a solver claims, checked by [`verify_trial`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TrialOutput {
    Condorcet(Team),
    TopK(Team),
}

/// Ground-truth verdict on a solver output.
pub fn verify_trial(instance: &Instance, output: TrialOutput, comparison_cap: u64) -> Result<bool, ModelError> {
    let order = instance.order();
    match output {
        TrialOutput::Condorcet(team) => verify_condorcet(order, team, comparison_cap),
        TrialOutput::TopK(team) => Ok(team == order.top_players(order.k())),
    }
}

/// `Σ_{t ≤ T} min(P(A*, A_t) − 1/2, P(A*, B_t) − 1/2)` over the first
/// `horizon` duels of `trace`, with `A*` the top `k` players.
pub fn weak_regret(instance: &Instance, trace: &[DuelRecord], horizon: usize) -> Result<f64, HarnessError> {
    if trace.len() < horizon {
        return Err(HarnessError::TraceTooShort { needed: horizon, got: trace.len() });
    }
    let best = instance.order().top_players(instance.k());
    Ok(trace[..horizon]
        .iter()
        .map(|d| (instance.prob(best, d.first) - 0.5).min(instance.prob(best, d.second) - 0.5))
        .sum())
}

struct Solved {
    output: TrialOutput,
    duels: u64,
    trace: Option<Vec<DuelRecord>>,
}

fn solve(config: &ExperimentConfig, instance: &Instance, stream: u64) -> Result<Solved, String> {
    let (n, k) = (instance.n(), instance.k());
    match config.algorithm {
        Algorithm::TopK => {
            let mut rng = ChaCha8Rng::seed_from_u64(mix64(stream));
            let mut oracle = StochasticOracle::new(instance, stream);
            if !instance.is_deterministic() {
                oracle = oracle.traced();
            }
            let res = identify_top_k(&mut oracle, config.delta, &mut rng, config.limits.sample_budget)
                .map_err(|e| e.to_string())?;
            let trace = oracle.log().trace().map(<[_]>::to_vec);
            Ok(Solved { output: TrialOutput::TopK(res.team), duels: oracle.duel_count(), trace })
        }
        algo => {
            if instance.is_deterministic() {
                let mut oracle = DeterministicOracle::new(instance.order());
                let team = run_driver(algo, &mut oracle)?;
                return Ok(Solved { output: TrialOutput::Condorcet(team), duels: oracle.duel_count(), trace: None });
            }
            let theta =
                instance.uniform_margin().ok_or_else(|| "amplification needs a uniform noise margin".to_string())?;
            let inner = StochasticOracle::new(instance, stream).traced();
            let mut oracle = AmplifiedOracle::new(inner, theta, config.delta, declared_duel_budget(n, k))
                .map_err(|e: OracleError| e.to_string())?;
            let team = run_driver(algo, &mut oracle)?;
            let inner = oracle.into_inner();
            let trace = inner.log().trace().map(<[_]>::to_vec);
            Ok(Solved { output: TrialOutput::Condorcet(team), duels: inner.duel_count(), trace })
        }
    }
}

fn run_driver<O: DuelOracle>(algo: Algorithm, oracle: &mut O) -> Result<Team, String> {
    let cert = match algo {
        Algorithm::General => find_condorcet_general(oracle),
        _ => find_condorcet_additive(oracle),
    };
    cert.map(|c| c.team).map_err(|e| e.to_string())
}

fn instance_id(config: &ExperimentConfig, seed: u64) -> String {
    match &config.instance {
        InstanceSource::Generate(spec) => {
            let kind = match spec.order {
                OrderSpec::Additive { .. } => "additive",
                OrderSpec::Lexicographic { .. } => "lexicographic",
                OrderSpec::Explicit => "explicit",
            };
            format!("{kind}-n{}-k{}-s{seed}", spec.n, spec.k)
        }
        InstanceSource::File(path) => path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default(),
    }
}

fn run_trial(config: &ExperimentConfig, fixed: Option<&Instance>, index: u64) -> TrialResult {
    let seed = config.seed_base.wrapping_add(index);
    let stream = trial_stream(config.seed_base, index);
    let start = Instant::now();
    let mut row = TrialResult {
        instance_id: instance_id(config, seed),
        n: 0,
        k: 0,
        algo: config.algorithm,
        seed,
        duels: 0,
        success: false,
        wall_ms: 0,
        delta: None,
        regret: None,
        team: None,
        error: None,
    };
    let generated;
    let instance = match (fixed, &config.instance) {
        (Some(inst), _) => inst,
        (None, InstanceSource::Generate(spec)) => match generate_instance(spec, stream) {
            Ok(inst) => {
                generated = inst;
                &generated
            }
            Err(e) => {
                row.error = Some(e.to_string());
                return row;
            }
        },
        (None, InstanceSource::File(_)) => unreachable!("file instances are loaded up front"),
    };
    row.n = instance.n();
    row.k = instance.k();
    if triple_count(row.n, row.k) <= config.limits.triple_cap {
        row.delta = gap(instance, config.limits.triple_cap).ok().map(|g| g.to_f64());
    }
    match solve(config, instance, stream) {
        Ok(solved) => {
            row.duels = solved.duels;
            row.regret = solved.trace.as_ref().and_then(|t| weak_regret(instance, t, t.len()).ok());
            let (TrialOutput::Condorcet(team) | TrialOutput::TopK(team)) = solved.output;
            row.team = Some(team);
            match verify_trial(instance, solved.output, config.limits.comparison_cap) {
                Ok(ok) => row.success = ok,
                Err(e) => row.error = Some(e.to_string()),
            }
        }
        Err(e) => row.error = Some(e),
    }
    if config.record_wall_time {
        row.wall_ms = start.elapsed().as_millis() as u64;
    }
    row
}

/// Runs every trial in parallel, merges rows in trial order and writes the
/// configured CSV and summary files.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Report, HarnessError> {
    config.validate()?;
    let fixed = match &config.instance {
        InstanceSource::File(path) => Some(load_instance(path)?),
        InstanceSource::Generate(_) => None,
    };
    let rows: Vec<TrialResult> =
        (0..config.trials).into_par_iter().map(|i| run_trial(config, fixed.as_ref(), i)).collect();
    let summary = Summary::from_rows(&rows);
    let report = Report { rows, summary };
    if let Some(path) = &config.csv {
        write_csv(&report.rows, std::fs::File::create(path)?)?;
    }
    if let Some(path) = &config.summary {
        write_summary(&report.summary, std::fs::File::create(path)?)?;
    }
    Ok(report)
}
