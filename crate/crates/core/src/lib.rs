//! Adaptive sequential testing of two simple hypotheses.
//!
//! Two data streams are observed, one from the superior density `f0` and one
//! from the inferior `f1`, without knowing which is which. A likelihood-ratio
//! rule decides which stream to sample next so that the inferior population
//! receives only a finite expected number of draws, and an SPRT on the
//! better-sampled stream decides when to stop.
//!
//! Modules, bottom up:
//! - [`distributions`]: normal, Poisson and asymmetric Laplace models, samplers, LLR moments.
//! - [`analytics`]: expected inferior allocations, Wald thresholds and ASN approximations.
//! - [`allocation`]: the per-step allocation state machine.
//! - [`stopping`]: adaptive and classical SPRT trials.
//! - [`montecarlo`]: reproducible parallel replication.
//! - [`config`] and [`report`]: table presets, TOML documents, CSV and markdown output.

pub mod allocation;
pub mod analytics;
pub mod cli;
pub mod config;
pub mod distributions;
pub mod error;
pub mod montecarlo;
mod quadrature;
pub mod report;
pub mod stopping;

pub use allocation::{Hypothesis, StreamId, TrialRng, TrialState};
pub use analytics::{AnalyticSummary, Thresholds};
pub use distributions::{DistributionSpec, Family, HypothesisPair, LlrMoments};
pub use error::{Error, Result};
pub use montecarlo::{ExperimentConfig, ExperimentSummary, TruthMode};
pub use stopping::{Decision, Procedure, TrialOutcome};
