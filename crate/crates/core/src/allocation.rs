//! Likelihood-ratio driven allocation between two data streams.
//!
//! At every step the stream holding more observations is the *active* stream
//! (ties broken by a fair coin). If its cumulative `log(f0/f1)` is positive the
//! next draw goes to the active stream, if negative to the other one, and an
//! exact zero is settled by another fair coin.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::distributions::{DistributionSpec, HypothesisPair};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StreamId {
    X,
    Y,
}

impl StreamId {
    pub fn other(self) -> StreamId {
        match self {
            StreamId::X => StreamId::Y,
            StreamId::Y => StreamId::X,
        }
    }
}

/// Which assignment of densities to streams is true.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Hypothesis {
    /// X ~ f0, Y ~ f1.
    H0,
    /// X ~ f1, Y ~ f0.
    H1,
}

impl Hypothesis {
    /// The stream whose observations truly follow `f0`.
    pub fn superior_stream(self) -> StreamId {
        match self {
            Hypothesis::H0 => StreamId::X,
            Hypothesis::H1 => StreamId::Y,
        }
    }

    pub fn is_superior(self, stream: StreamId) -> bool {
        self.superior_stream() == stream
    }

    pub fn density_of(self, pair: &HypothesisPair, stream: StreamId) -> &DistributionSpec {
        if self.is_superior(stream) {
            pair.f0()
        } else {
            pair.f1()
        }
    }
}

/// Random sources for one trial: one substream per data stream plus one for
/// tie-breaking coins.
///
/// The k-th observation of a stream depends only on that stream's substream,
/// never on how draws were interleaved, so each stream stays an i.i.d.
/// sequence whatever the allocation path.
#[derive(Debug, Clone)]
pub struct TrialRng {
    x: ChaCha8Rng,
    y: ChaCha8Rng,
    coin: ChaCha8Rng,
}

impl TrialRng {
    pub fn from_key(key: [u8; 32]) -> Self {
        let stream = |id: u64| {
            let mut rng = ChaCha8Rng::from_seed(key);
            rng.set_stream(id);
            rng
        };
        TrialRng { x: stream(0), y: stream(1), coin: stream(2) }
    }

    pub fn seed_from_u64(seed: u64) -> Self {
        let mut key = [0u8; 32];
        ChaCha8Rng::seed_from_u64(seed).fill(&mut key);
        Self::from_key(key)
    }

    pub fn stream(&mut self, id: StreamId) -> &mut ChaCha8Rng {
        match id {
            StreamId::X => &mut self.x,
            StreamId::Y => &mut self.y,
        }
    }

    pub fn coin(&mut self) -> &mut ChaCha8Rng {
        &mut self.coin
    }

    fn flip(&mut self) -> StreamId {
        if self.coin.random::<bool>() {
            StreamId::X
        } else {
            StreamId::Y
        }
    }
}

/// Live state of one adaptive run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialState {
    /// Draws from X.
    pub n_x: u64,
    /// Draws from Y.
    pub n_y: u64,
    /// Cumulative `log(f0/f1)` over the X draws.
    pub l_x: f64,
    /// Cumulative `log(f0/f1)` over the Y draws.
    pub l_y: f64,
    /// Stream currently holding the larger count.
    pub active: StreamId,
}

impl TrialState {
    /// Builds a state from its parts, checking the count invariants.
    pub fn new(n_x: u64, n_y: u64, l_x: f64, l_y: f64, active: StreamId) -> Result<Self> {
        if n_x == 0 || n_y == 0 {
            return Err(Error::domain("both streams need at least one observation"));
        }
        let expected = match n_x.cmp(&n_y) {
            std::cmp::Ordering::Greater => Some(StreamId::X),
            std::cmp::Ordering::Less => Some(StreamId::Y),
            std::cmp::Ordering::Equal => None,
        };
        if expected.is_some_and(|s| s != active) {
            return Err(Error::domain(format!(
                "active stream must hold the larger count (n_x = {n_x}, n_y = {n_y}, active = {active:?})"
            )));
        }
        Ok(TrialState { n_x, n_y, l_x, l_y, active })
    }

    /// Total draws so far.
    pub fn step(&self) -> u64 {
        self.n_x + self.n_y
    }

    pub fn count(&self, stream: StreamId) -> u64 {
        match stream {
            StreamId::X => self.n_x,
            StreamId::Y => self.n_y,
        }
    }

    pub fn llr_sum(&self, stream: StreamId) -> f64 {
        match stream {
            StreamId::X => self.l_x,
            StreamId::Y => self.l_y,
        }
    }

    /// Cumulative `log(f0/f1)` over the active stream.
    pub fn active_llr(&self) -> f64 {
        self.llr_sum(self.active)
    }

    fn refresh_active(&mut self, rng: &mut TrialRng) {
        self.active = match self.n_x.cmp(&self.n_y) {
            std::cmp::Ordering::Greater => StreamId::X,
            std::cmp::Ordering::Less => StreamId::Y,
            std::cmp::Ordering::Equal => rng.flip(),
        };
    }
}

/// Draws one observation from each stream and picks the active stream by coin.
pub fn init_trial(pair: &HypothesisPair, truth: Hypothesis, rng: &mut TrialRng) -> Result<TrialState> {
    let x = truth.density_of(pair, StreamId::X).sample(rng.stream(StreamId::X));
    let y = truth.density_of(pair, StreamId::Y).sample(rng.stream(StreamId::Y));
    let mut state = TrialState { n_x: 1, n_y: 1, l_x: pair.llr(x)?, l_y: pair.llr(y)?, active: StreamId::X };
    state.refresh_active(rng);
    Ok(state)
}

/// Chooses the stream for the next draw.
pub fn allocate_next(state: &TrialState, rng: &mut TrialRng) -> StreamId {
    let s = state.active_llr();
    if s > 0.0 {
        state.active
    } else if s < 0.0 {
        state.active.other()
    } else {
        rng.flip()
    }
}

/// Draws the next observation of `stream`, folds its LLR into the state and
/// re-derives the active stream.
pub fn apply_observation(
    state: &mut TrialState,
    stream: StreamId,
    pair: &HypothesisPair,
    truth: Hypothesis,
    rng: &mut TrialRng,
) -> Result<()> {
    let u = truth.density_of(pair, stream).sample(rng.stream(stream));
    let z = pair.llr(u)?;
    match stream {
        StreamId::X => {
            state.n_x += 1;
            state.l_x += z;
        }
        StreamId::Y => {
            state.n_y += 1;
            state.l_y += z;
        }
    }
    state.refresh_active(rng);
    Ok(())
}
