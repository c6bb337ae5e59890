//! Baum-Welch re-estimation formulas.
//!
//! Transitions are expected transition counts divided by the expected
//! occupancy of the source state; emissions are occupancy-weighted count
//! histograms. A state whose expected occupancy is below
//! [`MIN_OCCUPANCY`] keeps its previous rows.

use crate::error::{Error, Result};
use crate::inference::{PairwisePosterior, PosteriorTrajectory};
use crate::model::ObservationSequence;

/// Lower bound on every re-estimated emission probability.
pub const EMISSION_FLOOR: f64 = 1e-12;
/// Expected occupancy below which a state's rows are carried over.
pub const MIN_OCCUPANCY: f64 = 1e-12;

/// Maximizes `sum_s w_s ln p_s` over distributions with `p_s >= floor`.
///
/// Without the bound the maximizer is `w / sum(w)`. Entries that would fall
/// below the floor are pinned to it and the remaining mass is shared in
/// proportion to the weights. Because this is the exact constrained
/// maximizer, EM with floored emissions keeps its monotone likelihood.
pub fn floored_distribution(weights: &[f64], floor: f64) -> Vec<f64> {
    let n = weights.len();
    assert!(floor * n as f64 <= 1.0, "floor too large for {n} entries");
    let mut pinned = vec![false; n];
    let mut out = vec![floor; n];
    loop {
        let n_pinned = pinned.iter().filter(|p| **p).count();
        let free_mass = 1.0 - floor * n_pinned as f64;
        let free_weight: f64 = weights.iter().zip(&pinned).filter(|(_, p)| !**p).map(|(w, _)| *w).sum();
        if free_weight <= 0.0 {
            // Nothing observed: spread the remainder evenly.
            let free = n - n_pinned;
            for (o, p) in out.iter_mut().zip(&pinned) {
                if !p {
                    *o = free_mass / free as f64;
                }
            }
            return out;
        }
        let mut changed = false;
        for s in 0..n {
            if pinned[s] {
                continue;
            }
            let p = weights[s] * free_mass / free_weight;
            if p < floor {
                pinned[s] = true;
                changed = true;
            } else {
                out[s] = p;
            }
        }
        if !changed {
            for (o, p) in out.iter_mut().zip(&pinned) {
                if *p {
                    *o = floor;
                }
            }
            return out;
        }
    }
}

fn normalize_rows_into(numerator: &[f64], denominators: &[f64], previous: &[f64], width: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(numerator.len());
    for (i, row) in numerator.chunks(width).enumerate() {
        if denominators[i] < MIN_OCCUPANCY {
            out.extend_from_slice(&previous[i * width..(i + 1) * width]);
            continue;
        }
        let raw: Vec<f64> = row.iter().map(|x| x / denominators[i]).collect();
        // The numerator rows sum to the denominator only up to rounding.
        let s: f64 = raw.iter().sum();
        out.extend(raw.iter().map(|x| x / s));
    }
    out
}

/// Transition matrix from expected counts and occupancies (over bins
/// `0..N-1`), falling back to `previous` rows for unoccupied states.
pub(crate) fn transitions_from_expectations(counts: &[f64], occupancy: &[f64], previous: &[f64]) -> Vec<f64> {
    normalize_rows_into(counts, occupancy, previous, occupancy.len())
}

pub(crate) fn emissions_from_expectations(counts: &[f64], occupancy: &[f64], previous: &[f64]) -> Vec<f64> {
    let k = occupancy.len();
    let width = counts.len() / k;
    let mut out = Vec::with_capacity(counts.len());
    for i in 0..k {
        let row = &counts[i * width..(i + 1) * width];
        if occupancy[i] < MIN_OCCUPANCY {
            out.extend_from_slice(&previous[i * width..(i + 1) * width]);
        } else {
            out.extend(floored_distribution(row, EMISSION_FLOOR));
        }
    }
    out
}

/// Re-estimated row-major transition matrix,
/// `P(j | i) = sum_t xi_t(i, j) / sum_t P(X_t = i)` with `t` over the first
/// `N - 1` bins. `previous` supplies rows for unoccupied states.
pub fn reestimate_transitions(
    xi: &PairwisePosterior,
    smoothed: &PosteriorTrajectory,
    previous: &[f64],
) -> Result<Vec<f64>> {
    let k = smoothed.n_states();
    if xi.n_states() != k || xi.len() + 1 != smoothed.len() || previous.len() != k * k {
        return Err(Error::InvalidArgument(
            "pairwise and smoothed posteriors do not describe the same record".into(),
        ));
    }
    let mut counts = vec![0.0; k * k];
    for t in 0..xi.len() {
        counts.iter_mut().zip(xi.at(t)).for_each(|(c, x)| *c += x);
    }
    let mut occupancy = vec![0.0; k];
    for t in 0..xi.len() {
        occupancy.iter_mut().zip(smoothed.row(t)).for_each(|(o, p)| *o += p);
    }
    Ok(transitions_from_expectations(&counts, &occupancy, previous))
}

/// Re-estimated emission tables over counts `0..=max_count`, floored at
/// [`EMISSION_FLOOR`]. `previous` supplies rows for unoccupied states.
pub fn reestimate_emissions(
    smoothed: &PosteriorTrajectory,
    obs: &ObservationSequence,
    max_count: usize,
    previous: &[f64],
) -> Result<Vec<f64>> {
    let k = smoothed.n_states();
    let width = max_count + 1;
    if smoothed.len() != obs.len() || previous.len() != k * width {
        return Err(Error::InvalidArgument(
            "smoothed posterior, observations and previous emissions disagree in shape".into(),
        ));
    }
    obs.check_max_count(max_count)?;
    let mut counts = vec![0.0; k * width];
    let mut occupancy = vec![0.0; k];
    for (row, &s) in smoothed.rows().zip(obs.counts()) {
        for (i, &p) in row.iter().enumerate() {
            counts[i * width + s as usize] += p;
            occupancy[i] += p;
        }
    }
    Ok(emissions_from_expectations(&counts, &occupancy, previous))
}

/// Re-estimated initial distribution: the smoothed posterior of the first bin.
pub fn reestimate_initial(smoothed: &PosteriorTrajectory) -> Vec<f64> {
    smoothed.row(0).to_vec()
}
