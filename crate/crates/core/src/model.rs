//! Model parameters and observation sequences.
//!
//! A [`ModelSpec`] holds a discrete-emission HMM: an initial state
//! distribution, a per-bin transition matrix and one probability table over
//! photon counts `0..=max_count` per hidden state. Matrices are stored
//! row-major in flat vectors.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row sums further than this from 1 are rejected outright.
pub const HARD_TOLERANCE: f64 = 1e-6;
/// Row sums within this of 1 are renormalized silently; between this and
/// [`HARD_TOLERANCE`] they are renormalized with a warning.
pub const SOFT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelFile", into = "ModelFile")]
pub struct ModelSpec {
    n_states: usize,
    max_count: usize,
    initial: Vec<f64>,
    transition: Vec<f64>,
    emission: Vec<f64>,
}

/// On-disk JSON layout of a model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelFile {
    pub n_states: usize,
    pub max_count: usize,
    pub initial: Vec<f64>,
    pub transition: Vec<Vec<f64>>,
    pub emission: Vec<Vec<f64>>,
}

impl TryFrom<ModelFile> for ModelSpec {
    type Error = Error;

    fn try_from(f: ModelFile) -> Result<Self> {
        if f.transition.len() != f.n_states || f.emission.len() != f.n_states {
            return Err(Error::InvalidModel(format!(
                "expected {} transition and emission rows, got {} and {}",
                f.n_states,
                f.transition.len(),
                f.emission.len()
            )));
        }
        if let Some(row) = f.emission.iter().find(|r| r.len() != f.max_count + 1) {
            return Err(Error::InvalidModel(format!(
                "emission rows must have max_count + 1 = {} entries, found {}",
                f.max_count + 1,
                row.len()
            )));
        }
        ModelSpec::new(
            f.initial,
            f.transition.into_iter().flatten().collect(),
            f.emission.into_iter().flatten().collect(),
        )
    }
}

impl From<ModelSpec> for ModelFile {
    fn from(m: ModelSpec) -> Self {
        ModelFile {
            n_states: m.n_states,
            max_count: m.max_count,
            transition: m.transition.chunks(m.n_states).map(<[f64]>::to_vec).collect(),
            emission: m.emission.chunks(m.max_count + 1).map(<[f64]>::to_vec).collect(),
            initial: m.initial,
        }
    }
}

fn check_distribution(what: &str, row: &mut [f64]) -> Result<()> {
    if let Some(bad) = row.iter().find(|p| !p.is_finite() || **p < 0.0 || **p > 1.0) {
        return Err(Error::InvalidModel(format!("{what} has entry {bad} outside [0, 1]")));
    }
    let sum: f64 = row.iter().sum();
    let dev = (sum - 1.0).abs();
    if dev > HARD_TOLERANCE {
        return Err(Error::InvalidModel(format!("{what} sums to {sum}")));
    }
    if dev > SOFT_TOLERANCE {
        log::warn!("{what} sums to {sum}; renormalizing");
    }
    row.iter_mut().for_each(|p| *p /= sum);
    Ok(())
}

impl ModelSpec {
    /// Builds a model from an initial vector and row-major transition and
    /// emission matrices. The number of states is taken from `initial`, the
    /// emission width from `emission.len() / n_states`.
    ///
    /// Rows within [`HARD_TOLERANCE`] of summing to one are renormalized.
    pub fn new(mut initial: Vec<f64>, mut transition: Vec<f64>, mut emission: Vec<f64>) -> Result<Self> {
        let n = initial.len();
        if n == 0 {
            return Err(Error::InvalidModel("at least one state is required".into()));
        }
        if transition.len() != n * n {
            return Err(Error::InvalidModel(format!(
                "transition has {} entries, expected {}",
                transition.len(),
                n * n
            )));
        }
        if emission.is_empty() || !emission.len().is_multiple_of(n) {
            return Err(Error::InvalidModel(format!(
                "emission has {} entries, not a positive multiple of {n}",
                emission.len()
            )));
        }
        let width = emission.len() / n;
        check_distribution("initial", &mut initial)?;
        for (i, row) in transition.chunks_mut(n).enumerate() {
            check_distribution(&format!("transition row {i}"), row)?;
        }
        for (i, row) in emission.chunks_mut(width).enumerate() {
            check_distribution(&format!("emission row {i}"), row)?;
        }
        Ok(ModelSpec {
            n_states: n,
            max_count: width - 1,
            initial,
            transition,
            emission,
        })
    }

    /// Like [`ModelSpec::new`] but taking nested rows.
    pub fn from_rows(initial: Vec<f64>, transition: Vec<Vec<f64>>, emission: Vec<Vec<f64>>) -> Result<Self> {
        let n = initial.len();
        if transition.len() != n || emission.len() != n {
            return Err(Error::InvalidModel(format!(
                "expected {n} transition and emission rows"
            )));
        }
        let width = emission.first().map_or(0, Vec::len);
        if transition.iter().any(|r| r.len() != n) || emission.iter().any(|r| r.len() != width) {
            return Err(Error::InvalidModel("ragged matrix rows".into()));
        }
        Self::new(
            initial,
            transition.into_iter().flatten().collect(),
            emission.into_iter().flatten().collect(),
        )
    }

    /// Assembles a model from rows that the caller guarantees are already
    /// normalized (re-estimation output).
    pub(crate) fn from_normalized(initial: Vec<f64>, transition: Vec<f64>, emission: Vec<f64>) -> Self {
        let n = initial.len();
        debug_assert_eq!(transition.len(), n * n);
        debug_assert_eq!(emission.len() % n, 0);
        ModelSpec {
            n_states: n,
            max_count: emission.len() / n - 1,
            initial,
            transition,
            emission,
        }
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn max_count(&self) -> usize {
        self.max_count
    }

    /// Number of entries in an emission row (`max_count + 1`).
    pub fn n_symbols(&self) -> usize {
        self.max_count + 1
    }

    pub fn initial(&self) -> &[f64] {
        &self.initial
    }

    /// Row-major transition matrix, `transition()[i * n + j] = P(j | i)`.
    pub fn transition(&self) -> &[f64] {
        &self.transition
    }

    /// Row-major emission matrix, `emission()[i * (max_count + 1) + s] = P(s | i)`.
    pub fn emission(&self) -> &[f64] {
        &self.emission
    }

    pub fn transition_row(&self, i: usize) -> &[f64] {
        &self.transition[i * self.n_states..(i + 1) * self.n_states]
    }

    pub fn emission_row(&self, i: usize) -> &[f64] {
        let w = self.n_symbols();
        &self.emission[i * w..(i + 1) * w]
    }

    #[inline]
    pub fn emission_prob(&self, state: usize, count: u32) -> f64 {
        self.emission[state * self.n_symbols() + count as usize]
    }

    /// Mean photon count per bin of each state's emission table.
    pub fn emission_means(&self) -> Vec<f64> {
        (0..self.n_states)
            .map(|i| self.emission_row(i).iter().enumerate().map(|(s, p)| s as f64 * p).sum())
            .collect()
    }

    /// Returns the model with states reordered so that new state `a` is old
    /// state `order[a]`.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        let n = self.n_states;
        let mut seen = vec![false; n];
        if order.len() != n || order.iter().any(|&o| o >= n || std::mem::replace(&mut seen[o], true)) {
            return Err(Error::InvalidArgument(format!(
                "{order:?} is not a permutation of 0..{n}"
            )));
        }
        let initial = order.iter().map(|&o| self.initial[o]).collect();
        let mut transition = Vec::with_capacity(n * n);
        for &a in order {
            for &b in order {
                transition.push(self.transition[a * n + b]);
            }
        }
        let emission = order
            .iter()
            .flat_map(|&o| self.emission_row(o).iter().copied())
            .collect();
        Ok(Self::from_normalized(initial, transition, emission))
    }

    /// State order sorted by ascending emission mean, ties by index.
    pub fn mean_order(&self) -> Vec<usize> {
        let means = self.emission_means();
        let mut order: Vec<usize> = (0..self.n_states).collect();
        order.sort_by(|&a, &b| means[a].total_cmp(&means[b]).then(a.cmp(&b)));
        order
    }

    /// The model relabeled so that states appear in ascending emission mean.
    pub fn canonicalized(&self) -> Self {
        self.permuted(&self.mean_order()).expect("mean_order is a permutation")
    }

    /// Largest absolute difference over all initial, transition and emission
    /// entries. Models must have equal shapes.
    pub fn max_abs_diff(&self, other: &ModelSpec) -> f64 {
        assert_eq!(self.n_states, other.n_states);
        assert_eq!(self.max_count, other.max_count);
        self.initial
            .iter()
            .zip(&other.initial)
            .chain(self.transition.iter().zip(&other.transition))
            .chain(self.emission.iter().zip(&other.emission))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Photon counts in consecutive bins of equal width.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationSequence {
    counts: Vec<u32>,
    bin_width: f64,
}

impl ObservationSequence {
    pub fn new(counts: Vec<u32>, bin_width: f64) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::InvalidObservations("at least one bin is required".into()));
        }
        if !(bin_width > 0.0 && bin_width.is_finite()) {
            return Err(Error::InvalidObservations(format!(
                "bin width must be positive, got {bin_width}"
            )));
        }
        Ok(ObservationSequence { counts, bin_width })
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn bin_width(&self) -> f64 {
        self.bin_width
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn max_observed(&self) -> u32 {
        self.counts.iter().copied().max().unwrap_or(0)
    }

    /// Emission table size used when none is given: largest count plus 2.
    pub fn default_max_count(&self) -> usize {
        self.max_observed() as usize + 2
    }

    /// Errors if any count exceeds `max_count`.
    pub fn check_max_count(&self, max_count: usize) -> Result<()> {
        match self.counts.iter().position(|&c| c as usize > max_count) {
            Some(i) => Err(Error::InvalidObservations(format!(
                "count {} at bin index {i} exceeds max_count {max_count}",
                self.counts[i]
            ))),
            None => Ok(()),
        }
    }

    /// Copy with every count above `max_count` replaced by `max_count`.
    pub fn clamped(&self, max_count: usize) -> Self {
        let cap = u32::try_from(max_count).unwrap_or(u32::MAX);
        ObservationSequence {
            counts: self.counts.iter().map(|&c| c.min(cap)).collect(),
            bin_width: self.bin_width,
        }
    }

    /// Empirical distribution of counts over `0..=max_count`.
    pub fn histogram(&self, max_count: usize) -> Vec<f64> {
        let mut h = vec![0.0; max_count + 1];
        for &c in &self.counts {
            h[(c as usize).min(max_count)] += 1.0;
        }
        let n = self.counts.len() as f64;
        h.iter_mut().for_each(|x| *x /= n);
        h
    }
}
