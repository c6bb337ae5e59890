//! Exact posteriors by enumerating every hidden path.
//!
//! Exponential in the record length; intended as a reference for small
//! instances.

use crate::error::{Error, Result};
use crate::inference::{check_compatible, PosteriorKind, PosteriorTrajectory};
use crate::model::{ModelSpec, ObservationSequence};

/// Largest number of hidden paths [`brute_force_posterior`] will enumerate.
pub const MAX_PATHS: u64 = 10_000_000;

/// Joint probability of one hidden path and the observed counts.
fn path_weight(model: &ModelSpec, counts: &[u32], path: &[usize]) -> f64 {
    let mut w = model.initial()[path[0]] * model.emission_prob(path[0], counts[0]);
    for t in 1..path.len() {
        w *= model.transition_row(path[t - 1])[path[t]] * model.emission_prob(path[t], counts[t]);
    }
    w
}

/// Advances `path` as a base-`k` odometer; false once it wraps around.
fn next_path(path: &mut [usize], k: usize) -> bool {
    for digit in path.iter_mut().rev() {
        *digit += 1;
        if *digit < k {
            return true;
        }
        *digit = 0;
    }
    false
}

/// Sum of the joint over all paths of the first `len` bins.
fn prefix_probability(model: &ModelSpec, counts: &[u32], len: usize) -> f64 {
    let k = model.n_states();
    let mut path = vec![0; len];
    let mut total = 0.0;
    loop {
        total += path_weight(model, &counts[..len], &path);
        if !next_path(&mut path, k) {
            return total;
        }
    }
}

/// Smoothed posteriors and log-likelihood by direct summation of the joint
/// distribution over all `n_states^N` hidden paths.
///
/// The per-bin log normalizers are `ln P(s_1..s_t) - ln P(s_1..s_{t-1})`,
/// each prefix probability enumerated separately.
pub fn brute_force_posterior(model: &ModelSpec, obs: &ObservationSequence) -> Result<(PosteriorTrajectory, f64)> {
    check_compatible(model, obs)?;
    let k = model.n_states();
    let n = obs.len();
    let too_large = || Error::TooLarge {
        n_states: k,
        n_bins: n,
        limit: MAX_PATHS,
    };
    let n_paths = u32::try_from(n)
        .ok()
        .and_then(|e| (k as u64).checked_pow(e))
        .ok_or_else(too_large)?;
    if n_paths > MAX_PATHS {
        return Err(too_large());
    }
    let counts = obs.counts();

    let mut log_normalizers = Vec::with_capacity(n);
    let mut prev = 0.0;
    for t in 1..=n {
        let p = prefix_probability(model, counts, t);
        if !(p > 0.0) {
            return Err(Error::ZeroLikelihood { bin: t - 1 });
        }
        let lp = p.ln();
        log_normalizers.push(lp - prev);
        prev = lp;
    }

    let mut marginals = vec![0.0; n * k];
    let mut total = 0.0;
    let mut path = vec![0; n];
    loop {
        let w = path_weight(model, counts, &path);
        total += w;
        for (t, &s) in path.iter().enumerate() {
            marginals[t * k + s] += w;
        }
        if !next_path(&mut path, k) {
            break;
        }
    }
    marginals.iter_mut().for_each(|m| *m /= total);
    let posterior = PosteriorTrajectory::new(PosteriorKind::Smoothed, k, marginals, log_normalizers)?;
    Ok((posterior, total.ln()))
}
