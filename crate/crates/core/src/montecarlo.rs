//! Reproducible parallel replication of trials.
//!
//! Replication `i` draws everything from a substream keyed by
//! `(master_seed, i)`, and results are aggregated in index order, so a
//! summary does not depend on how many worker threads ran it.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::allocation::{Hypothesis, TrialRng};
use crate::analytics::{self, wald_thresholds};
use crate::distributions::HypothesisPair;
use crate::error::{Error, Result};
use crate::stopping::{run_trial, Procedure, TrialOutcome, DEFAULT_CAP};

/// Environment variable overriding the number of worker threads.
pub const THREADS_ENV: &str = "ADAPTIVE_SPRT_THREADS";

pub const DEFAULT_REPLICATIONS: u64 = 1000;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn replication_key(master_seed: u64, replication_index: u64) -> u64 {
    mix64(mix64(master_seed) ^ mix64(replication_index.wrapping_add(GOLDEN_GAMMA)))
}

/// Random sources for replication `replication_index` of an experiment.
pub fn derive_substream(master_seed: u64, replication_index: u64) -> TrialRng {
    let mut state = replication_key(master_seed, replication_index);
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        state = state.wrapping_add(GOLDEN_GAMMA);
        chunk.copy_from_slice(&mix64(state).to_le_bytes());
    }
    TrialRng::from_key(key)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TruthMode {
    H0,
    H1,
    /// Each replication picks H0 or H1 with probability ½.
    Random,
}

impl TruthMode {
    fn resolve(self, master_seed: u64, replication_index: u64) -> Hypothesis {
        match self {
            TruthMode::H0 => Hypothesis::H0,
            TruthMode::H1 => Hypothesis::H1,
            TruthMode::Random => {
                let bit = mix64(replication_key(master_seed, replication_index) ^ 0x0054_5255_5448) & 1;
                if bit == 0 {
                    Hypothesis::H0
                } else {
                    Hypothesis::H1
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub pair: HypothesisPair,
    pub truth: TruthMode,
    pub alpha: f64,
    pub beta: f64,
    pub replications: u64,
    pub master_seed: u64,
    pub procedure: Procedure,
    pub cap: u64,
    /// Worker threads; `None` defers to the environment, then to rayon's default.
    pub threads: Option<usize>,
}

impl ExperimentConfig {
    pub fn new(pair: HypothesisPair, alpha: f64, beta: f64) -> Self {
        ExperimentConfig {
            pair,
            truth: TruthMode::H0,
            alpha,
            beta,
            replications: DEFAULT_REPLICATIONS,
            master_seed: 0,
            procedure: Procedure::Adaptive,
            cap: DEFAULT_CAP,
            threads: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::domain("replications must be at least 1"));
        }
        if self.cap < 2 {
            return Err(Error::domain(format!("cap must be at least 2, got {}", self.cap)));
        }
        if self.threads == Some(0) {
            return Err(Error::domain("thread count must be at least 1"));
        }
        wald_thresholds(self.alpha, self.beta)?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub procedure: Procedure,
    pub alpha: f64,
    pub beta: f64,
    pub master_seed: u64,
    pub replications: u64,
    /// Share of trials with `selection_correct`.
    pub pcs: f64,
    pub se_pcs: f64,
    /// Share of trials whose declared superior population is right.
    pub accuracy: f64,
    pub mean_n_inferior: f64,
    pub se_n_inferior: f64,
    /// Adaptive: mean total draws. Classical: mean rounds.
    pub asn: f64,
    pub se_asn: f64,
    pub mean_total_draws: f64,
    pub n1_star_closed: f64,
    pub n1_star_series: f64,
    pub asn_wald_k0: f64,
}

/// Mean and standard error (sample sd / √n; zero for a single value).
pub fn mean_and_se(values: impl IntoIterator<Item = f64>) -> (f64, f64) {
    let values: Vec<f64> = values.into_iter().collect();
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, (ss / (n - 1.0)).sqrt() / n.sqrt())
}

fn worker_threads(cfg: &ExperimentConfig) -> Result<Option<usize>> {
    if let Some(n) = cfg.threads {
        return Ok(Some(n));
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::config(format!("{THREADS_ENV} must be a positive integer, got {v:?}"))),
        },
        Err(_) => Ok(None),
    }
}

/// Runs every replication and returns the outcomes in index order.
pub fn run_trials(cfg: &ExperimentConfig) -> Result<Vec<TrialOutcome>> {
    cfg.validate()?;
    let t = wald_thresholds(cfg.alpha, cfg.beta)?;
    let one = |i: u64| {
        let mut rng = derive_substream(cfg.master_seed, i);
        let truth = cfg.truth.resolve(cfg.master_seed, i);
        run_trial(cfg.procedure, &cfg.pair, truth, &t, cfg.cap, &mut rng)
    };
    let run = || (0..cfg.replications).into_par_iter().map(one).collect::<Result<Vec<_>>>();
    match worker_threads(cfg)? {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::config(format!("cannot start worker pool: {e}")))?
            .install(run),
        None => run(),
    }
}

/// Aggregates outcomes and attaches the analytic reference values.
pub fn summarize(cfg: &ExperimentConfig, outcomes: &[TrialOutcome]) -> Result<ExperimentSummary> {
    if outcomes.is_empty() {
        return Err(Error::domain("cannot summarize zero outcomes"));
    }
    let t = wald_thresholds(cfg.alpha, cfg.beta)?;
    let moments = cfg.pair.llr_moments()?;
    let reference = analytics::AnalyticSummary::new(&moments, &t);

    let indicator = |b: bool| if b { 1.0 } else { 0.0 };
    let (pcs, se_pcs) = mean_and_se(outcomes.iter().map(|o| indicator(o.selection_correct)));
    let (accuracy, _) = mean_and_se(outcomes.iter().map(|o| indicator(o.correct)));
    let (mean_n_inferior, se_n_inferior) = mean_and_se(outcomes.iter().map(|o| o.n_inferior as f64));
    let (asn, se_asn) = mean_and_se(outcomes.iter().map(|o| match cfg.procedure {
        Procedure::Adaptive => o.n_total as f64,
        Procedure::Classical => o.steps_statistic as f64,
    }));
    let (mean_total_draws, _) = mean_and_se(outcomes.iter().map(|o| o.n_total as f64));

    Ok(ExperimentSummary {
        procedure: cfg.procedure,
        alpha: cfg.alpha,
        beta: cfg.beta,
        master_seed: cfg.master_seed,
        replications: outcomes.len() as u64,
        pcs,
        se_pcs,
        accuracy,
        mean_n_inferior,
        se_n_inferior,
        asn,
        se_asn,
        mean_total_draws,
        n1_star_closed: reference.n1_star_closed,
        n1_star_series: reference.n1_star_series,
        asn_wald_k0: reference.asn_k0,
    })
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentSummary> {
    let outcomes = run_trials(cfg)?;
    summarize(cfg, &outcomes)
}
