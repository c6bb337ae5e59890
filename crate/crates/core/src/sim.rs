//! Seeded simulation of hidden state paths and photon counts.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{PhotonRecord, DEFAULT_BIN_WIDTH, DEFAULT_TICK_RESOLUTION};
use crate::model::{ModelSpec, ObservationSequence};

/// Mean counts per 50 us bin of the high-transmission state (30 counts/ms).
pub const HIGH_MEAN: f64 = 1.5;
/// Mean counts per bin of the two low-transmission sub-states (5 and 10
/// counts/ms).
pub const LOW_MEANS: [f64; 2] = [0.25, 0.5];
/// Per-bin probability of leaving the high-transmission state (60 /s).
pub const HIGH_TO_LOW: f64 = 0.003;
/// Per-bin probability of returning to the high-transmission state (80 /s).
pub const LOW_TO_HIGH: f64 = 0.004;
/// Per-bin mixing probability between the two low sub-states.
pub const LOW_MIXING: f64 = 0.001;
/// Emission table size of the default model.
pub const DEFAULT_MAX_COUNT: usize = 15;
/// 20 s of 50 us bins.
pub const DEFAULT_N_BINS: usize = 400_000;

fn default_tick_resolution() -> f64 {
    DEFAULT_TICK_RESOLUTION
}

fn default_bin_width() -> f64 {
    DEFAULT_BIN_WIDTH
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub model: ModelSpec,
    pub n_bins: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub emit_timestamps: bool,
    #[serde(default = "default_tick_resolution")]
    pub tick_resolution: f64,
    #[serde(default = "default_bin_width")]
    pub bin_width: f64,
}

impl SimConfig {
    pub fn new(model: ModelSpec, n_bins: usize, seed: u64) -> Self {
        SimConfig {
            model,
            n_bins,
            seed,
            emit_timestamps: false,
            tick_resolution: DEFAULT_TICK_RESOLUTION,
            bin_width: DEFAULT_BIN_WIDTH,
        }
    }

    /// 20 s of data from [`default_model`].
    pub fn default_run(seed: u64) -> Self {
        Self::new(default_model(), DEFAULT_N_BINS, seed)
    }

    fn validate(&self) -> Result<()> {
        if self.n_bins == 0 {
            return Err(Error::InvalidArgument("n_bins must be at least 1".into()));
        }
        if !(self.bin_width > 0.0 && self.tick_resolution > 0.0) {
            return Err(Error::InvalidArgument(
                "bin width and tick resolution must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    pub states: Vec<usize>,
    pub observations: ObservationSequence,
    /// Click times, present when the config asks for them.
    pub timestamps: Option<PhotonRecord>,
}

fn sample_index<R: Rng>(rng: &mut R, probs: &[f64]) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    // Rounding left the cumulative sum just below u; take the last
    // state with positive probability.
    probs.iter().rposition(|p| *p > 0.0).unwrap_or(probs.len() - 1)
}

/// Draws a hidden path and its counts from the model:
/// `X_1 ~ initial`, `X_{t+1} ~ transition[X_t]`, `s_t ~ emission[X_t]`.
///
/// Click times, when requested, are spread uniformly over the ticks of each
/// bin using an independent stream, so the counts do not depend on
/// `emit_timestamps`.
pub fn simulate_chain(config: &SimConfig) -> Result<Simulation> {
    config.validate()?;
    let model = &config.model;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut states = Vec::with_capacity(config.n_bins);
    let mut counts = Vec::with_capacity(config.n_bins);
    let mut x = sample_index(&mut rng, model.initial());
    for t in 0..config.n_bins {
        if t > 0 {
            x = sample_index(&mut rng, model.transition_row(x));
        }
        states.push(x);
        counts.push(sample_index(&mut rng, model.emission_row(x)) as u32);
    }
    let observations = ObservationSequence::new(counts, config.bin_width)?;

    let timestamps = if config.emit_timestamps {
        let probe = PhotonRecord::new(Vec::new(), config.tick_resolution)?;
        let width = probe.seconds_to_ticks(config.bin_width)?;
        if width == 0 {
            return Err(Error::Binning("bin width is shorter than one tick".into()));
        }
        let mut trng = ChaCha8Rng::seed_from_u64(config.seed);
        trng.set_stream(1);
        let mut ticks = Vec::new();
        let mut bin = Vec::new();
        for (t, &c) in observations.counts().iter().enumerate() {
            bin.clear();
            let start = t as u64 * width;
            bin.extend((0..c).map(|_| start + trng.random_range(0..width)));
            bin.sort_unstable();
            ticks.extend_from_slice(&bin);
        }
        Some(PhotonRecord::new(ticks, config.tick_resolution)?)
    } else {
        None
    };

    Ok(Simulation {
        states,
        observations,
        timestamps,
    })
}

/// Poisson probabilities `e^{-mean} mean^s / s!` for `s < max_count`, with
/// all remaining tail mass placed on `s = max_count`.
pub fn poisson_emission_table(mean: f64, max_count: usize) -> Result<Vec<f64>> {
    if !(mean >= 0.0 && mean.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "Poisson mean must be non-negative, got {mean}"
        )));
    }
    let mut row = Vec::with_capacity(max_count + 1);
    let mut p = (-mean).exp();
    let mut acc = 0.0;
    for s in 0..max_count {
        row.push(p);
        acc += p;
        p *= mean / (s + 1) as f64;
    }
    row.push((1.0 - acc).max(0.0));
    Ok(row)
}

/// Three-state model at the signal levels of the cavity transmission
/// experiment: state 0 transmits at 30 counts/ms, states 1 and 2 at 5 and
/// 10 counts/ms, with 50 us bins. Leaving state 0 happens at 60 /s split
/// evenly over the two low states, returning at 80 /s, and the low states
/// mix at [`LOW_MIXING`] per bin. The initial distribution is uniform.
pub fn default_model() -> ModelSpec {
    let half = HIGH_TO_LOW / 2.0;
    let stay_low = 1.0 - LOW_TO_HIGH - LOW_MIXING;
    let transition = vec![
        vec![1.0 - HIGH_TO_LOW, half, half],
        vec![LOW_TO_HIGH, stay_low, LOW_MIXING],
        vec![LOW_TO_HIGH, LOW_MIXING, stay_low],
    ];
    let emission = [HIGH_MEAN, LOW_MEANS[0], LOW_MEANS[1]]
        .iter()
        .map(|&m| poisson_emission_table(m, DEFAULT_MAX_COUNT).expect("valid mean"))
        .collect();
    ModelSpec::from_rows(vec![1.0 / 3.0; 3], transition, emission).expect("default model is valid")
}
