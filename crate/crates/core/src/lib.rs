//! Hidden Markov Model analysis of photon-count telegraph signals.
//!
//! The crate estimates a hidden state (for instance the hyperfine state of
//! an atom strongly coupled to a cavity) from the number of photons detected
//! in consecutive time bins:
//!
//! * [`inference`]: normalized forward filtering, scaled backward pass,
//!   forward-backward smoothing, pairwise posteriors and single-bin
//!   predictions.
//! * [`reestimate`] and [`em`]: Baum-Welch re-estimation of the initial,
//!   transition and emission probabilities.
//! * [`oracle`]: exact posteriors by path enumeration for small instances.
//! * [`ingest`]: photon timestamp parsing and binning.
//! * [`sim`]: seeded generation of state paths, counts and timestamps.
//! * [`select`]: multi-restart fits, AIC/BIC comparison, level labeling,
//!   aggregated populations and jump rates.
//!
//! ```
//! use telegraph_hmm::{default_model, simulate_chain, smooth, SimConfig};
//!
//! let sim = simulate_chain(&SimConfig::new(default_model(), 1000, 7)).unwrap();
//! let (posterior, _) = smooth(&default_model(), &sim.observations).unwrap();
//! assert_eq!(posterior.len(), 1000);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod em;
pub mod error;
pub mod inference;
pub mod ingest;
pub mod model;
pub mod oracle;
pub mod output;
pub mod reestimate;
pub mod select;
pub mod sim;

pub use em::{baum_welch, em_step, FitResult, DEFAULT_MAX_ITER, DEFAULT_TOLERANCE};
pub use error::{Error, Result};
pub use inference::{
    backward_pass, forward_filter, log_likelihood, predict_bin, smooth, BinPrediction, PairwisePosterior,
    PosteriorKind, PosteriorTrajectory, ScaledBackward,
};
pub use ingest::{
    bin_counts, count_bins, parse_timestamps, rebin, PhotonRecord, TimeSpan, TimestampFormat, DEFAULT_BIN_WIDTH,
    DEFAULT_TICK_RESOLUTION,
};
pub use model::{ModelSpec, ObservationSequence};
pub use oracle::brute_force_posterior;
pub use reestimate::{reestimate_emissions, reestimate_initial, reestimate_transitions, EMISSION_FLOOR};
pub use select::{
    aggregate_populations, assign_labels, compare_models, count_crossings, fit_k_states, rates_from_transitions,
    FitOptions, KStateFit, LabelPolicy, Level, LevelPopulations, LevelRates, ModelComparison, StateLabeling,
};
pub use sim::{default_model, poisson_emission_table, simulate_chain, SimConfig, Simulation};
