//! Baum-Welch (EM) fitting of a full model to one observation record.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inference::{check_compatible, expected_counts};
use crate::model::{ModelSpec, ObservationSequence};
use crate::reestimate::{emissions_from_expectations, transitions_from_expectations};

pub const DEFAULT_TOLERANCE: f64 = 1e-9;
pub const DEFAULT_MAX_ITER: usize = 2000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: ModelSpec,
    /// Log-likelihood of the model entering each iteration.
    pub loglik_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Largest absolute parameter change in the last iteration.
    pub final_delta: f64,
}

impl FitResult {
    /// Log-likelihood of the last evaluated iterate.
    pub fn final_loglik(&self) -> f64 {
        self.loglik_trace.last().copied().unwrap_or(f64::NEG_INFINITY)
    }
}

/// One EM update: smoothed expectations under `model`, then re-estimated
/// initial, transition and emission parameters. Returns the new model and
/// the log-likelihood of `model`.
pub fn em_step(model: &ModelSpec, obs: &ObservationSequence) -> Result<(ModelSpec, f64)> {
    check_compatible(model, obs)?;
    let e = expected_counts(model, obs.counts())?;
    let transition = transitions_from_expectations(&e.transitions, &e.transition_occupancy, model.transition());
    let emission = emissions_from_expectations(&e.emissions, &e.occupancy, model.emission());
    let s: f64 = e.first.iter().sum();
    let initial = e.first.iter().map(|p| p / s).collect();
    Ok((
        ModelSpec::from_normalized(initial, transition, emission),
        e.log_likelihood,
    ))
}

/// Iterates [`em_step`] until no parameter moves by `tol` or more, or
/// `max_iter` iterations have run.
pub fn baum_welch(model0: &ModelSpec, obs: &ObservationSequence, tol: f64, max_iter: usize) -> Result<FitResult> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    if max_iter == 0 {
        return Err(Error::InvalidArgument("max_iter must be at least 1".into()));
    }
    check_compatible(model0, obs)?;

    let mut model = model0.clone();
    let mut trace = Vec::new();
    let mut delta = f64::INFINITY;
    let mut converged = false;
    for iteration in 1..=max_iter {
        let (next, ll) = em_step(&model, obs).map_err(|e| Error::Em {
            iteration,
            source: Box::new(e),
        })?;
        trace.push(ll);
        delta = next.max_abs_diff(&model);
        model = next;
        log::trace!("iteration {iteration}: loglik {ll:.6} delta {delta:.3e}");
        if delta < tol {
            converged = true;
            break;
        }
    }
    log::debug!(
        "EM finished after {} iterations (converged: {converged}, delta {delta:.3e})",
        trace.len()
    );
    Ok(FitResult {
        model,
        iterations: trace.len(),
        loglik_trace: trace,
        converged,
        final_delta: delta,
    })
}
