//! SPRT stopping for the adaptive procedure, the classical alternating SPRT
//! baseline, and outcome classification.

use serde::{Deserialize, Serialize};

use crate::allocation::{allocate_next, apply_observation, init_trial, Hypothesis, StreamId, TrialRng, TrialState};
use crate::analytics::Thresholds;
use crate::distributions::HypothesisPair;
use crate::error::{Error, Result};

/// Default step cap; orders of magnitude above any realistic ASN.
pub const DEFAULT_CAP: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Decision {
    /// The tested stream follows `f0`.
    AcceptK0,
    /// The tested stream follows `f1`.
    AcceptK1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SprtStep {
    Continue,
    Stop(Decision),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Procedure {
    Adaptive,
    Classical,
}

impl Procedure {
    pub fn name(self) -> &'static str {
        match self {
            Procedure::Adaptive => "adaptive",
            Procedure::Classical => "classical",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub decision: Decision,
    /// Stream whose statistic crossed a boundary.
    pub deciding_stream: StreamId,
    pub truth: Hypothesis,
    /// The population declared superior is the truly superior one.
    pub correct: bool,
    /// The trial counts towards the reported PCS. For adaptive trials this
    /// requires accepting K0 on the truly superior stream: a trial that ends
    /// by rejecting the stream the allocation rule had concentrated on is not
    /// a correct selection. For classical trials it equals `correct`.
    pub selection_correct: bool,
    /// Adaptive: all draws. Classical: both streams, twice the rounds.
    pub n_total: u64,
    /// Draws from the truly inferior population.
    pub n_inferior: u64,
    /// Terms in the terminal statistic (`n_max` adaptive, rounds classical).
    pub steps_statistic: u64,
}

/// Boundary test on the active stream. The stopping statistic is
/// `T = Σ log(f1/f0) = −active_llr`; boundaries are inclusive.
pub fn sprt_decision(state: &TrialState, t: &Thresholds) -> SprtStep {
    test_statistic(-state.active_llr(), t)
}

fn test_statistic(stat: f64, t: &Thresholds) -> SprtStep {
    if stat >= t.a {
        SprtStep::Stop(Decision::AcceptK1)
    } else if stat <= t.b {
        SprtStep::Stop(Decision::AcceptK0)
    } else {
        SprtStep::Continue
    }
}

/// True iff the population declared superior is the truly superior one.
/// Accepting K0 declares the deciding stream superior; accepting K1 declares
/// the other stream superior.
pub fn classify_outcome(decision: Decision, deciding_stream: StreamId, truth: Hypothesis) -> bool {
    let declared = match decision {
        Decision::AcceptK0 => deciding_stream,
        Decision::AcceptK1 => deciding_stream.other(),
    };
    truth.is_superior(declared)
}

fn check_cap(cap: u64) -> Result<()> {
    if cap < 2 {
        return Err(Error::domain(format!("step cap must be at least 2, got {cap}")));
    }
    Ok(())
}

/// Runs the adaptive procedure to a decision.
pub fn run_adaptive_trial(
    pair: &HypothesisPair,
    truth: Hypothesis,
    t: &Thresholds,
    cap: u64,
    rng: &mut TrialRng,
) -> Result<TrialOutcome> {
    check_cap(cap)?;
    let mut state = init_trial(pair, truth, rng)?;
    loop {
        match sprt_decision(&state, t) {
            SprtStep::Continue => {
                if state.step() >= cap {
                    return Err(Error::NonTermination { cap, state: Box::new(state) });
                }
                let next = allocate_next(&state, rng);
                apply_observation(&mut state, next, pair, truth, rng)?;
            }
            SprtStep::Stop(decision) => {
                let deciding_stream = state.active;
                return Ok(TrialOutcome {
                    decision,
                    deciding_stream,
                    truth,
                    correct: classify_outcome(decision, deciding_stream, truth),
                    selection_correct: decision == Decision::AcceptK0 && truth.is_superior(deciding_stream),
                    n_total: state.step(),
                    n_inferior: state.count(truth.superior_stream().other()),
                    steps_statistic: state.count(deciding_stream),
                });
            }
        }
    }
}

/// Classical SPRT: one draw from each stream per round, statistic
/// `Σ log(f1(X_i)/f0(X_i))` over the X stream only.
pub fn run_classical_trial(
    pair: &HypothesisPair,
    truth: Hypothesis,
    t: &Thresholds,
    cap: u64,
    rng: &mut TrialRng,
) -> Result<TrialOutcome> {
    check_cap(cap)?;
    let density_x = truth.density_of(pair, StreamId::X);
    let density_y = truth.density_of(pair, StreamId::Y);
    let (mut l_x, mut l_y) = (0.0, 0.0);
    let mut rounds = 0u64;
    loop {
        if 2 * rounds >= cap {
            let state = TrialState { n_x: rounds, n_y: rounds, l_x, l_y, active: StreamId::X };
            return Err(Error::NonTermination { cap, state: Box::new(state) });
        }
        let x = density_x.sample(rng.stream(StreamId::X));
        let y = density_y.sample(rng.stream(StreamId::Y));
        l_x += pair.llr(x)?;
        l_y += pair.llr(y)?;
        rounds += 1;
        if let SprtStep::Stop(decision) = test_statistic(-l_x, t) {
            let correct = classify_outcome(decision, StreamId::X, truth);
            return Ok(TrialOutcome {
                decision,
                deciding_stream: StreamId::X,
                truth,
                correct,
                selection_correct: correct,
                n_total: 2 * rounds,
                n_inferior: rounds,
                steps_statistic: rounds,
            });
        }
    }
}

pub fn run_trial(
    procedure: Procedure,
    pair: &HypothesisPair,
    truth: Hypothesis,
    t: &Thresholds,
    cap: u64,
    rng: &mut TrialRng,
) -> Result<TrialOutcome> {
    match procedure {
        Procedure::Adaptive => run_adaptive_trial(pair, truth, t, cap, rng),
        Procedure::Classical => run_classical_trial(pair, truth, t, cap, rng),
    }
}
