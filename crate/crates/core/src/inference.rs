//! Forward filtering and forward-backward smoothing.
//!
//! The forward recursion is normalized at every bin: the stored rows are the
//! filtered posteriors `P(X_t | s_1..s_t)` and the scale constant of bin `t`
//! is `c_t = P(s_t | s_1..s_{t-1})`, so `sum(ln c_t)` is the data
//! log-likelihood. The backward table is divided by the same constants,
//! which keeps every entry of order one on long records.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{ModelSpec, ObservationSequence};

/// Tolerance on the row sums of supplied posterior tables.
const ROW_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PosteriorKind {
    Filtered,
    Smoothed,
}

/// Per-bin hidden-state probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorTrajectory {
    kind: PosteriorKind,
    n_states: usize,
    probs: Vec<f64>,
    log_normalizers: Vec<f64>,
}

impl PosteriorTrajectory {
    /// Wraps an `N x n_states` row-major table. Rows must sum to one.
    pub fn new(kind: PosteriorKind, n_states: usize, probs: Vec<f64>, log_normalizers: Vec<f64>) -> Result<Self> {
        if n_states == 0 || probs.len() != n_states * log_normalizers.len() || probs.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "posterior table of {} entries does not match {} bins x {n_states} states",
                probs.len(),
                log_normalizers.len()
            )));
        }
        for (t, row) in probs.chunks(n_states).enumerate() {
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_TOLERANCE || row.iter().any(|p| *p < 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "posterior row {t} is not a distribution (sum {sum})"
                )));
            }
        }
        Ok(PosteriorTrajectory {
            kind,
            n_states,
            probs,
            log_normalizers,
        })
    }

    pub fn kind(&self) -> PosteriorKind {
        self.kind
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn len(&self) -> usize {
        self.log_normalizers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_normalizers.is_empty()
    }

    pub fn row(&self, t: usize) -> &[f64] {
        &self.probs[t * self.n_states..(t + 1) * self.n_states]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, f64> {
        self.probs.chunks_exact(self.n_states)
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn log_normalizers(&self) -> &[f64] {
        &self.log_normalizers
    }

    /// `ln P(s_1..s_N)`, the sum of the per-bin log normalizers.
    pub fn log_likelihood(&self) -> f64 {
        self.log_normalizers.iter().sum()
    }
}

/// Smoothed joint probabilities of consecutive states,
/// `xi[t][i][j] = P(X_t = i, X_{t+1} = j | s_1..s_N)` for `t < N - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairwisePosterior {
    n_states: usize,
    xi: Vec<f64>,
}

impl PairwisePosterior {
    pub fn new(n_states: usize, xi: Vec<f64>) -> Result<Self> {
        let block = n_states * n_states;
        if n_states == 0 || !xi.len().is_multiple_of(block) {
            return Err(Error::InvalidArgument(format!(
                "pairwise table of {} entries is not a multiple of {block}",
                xi.len()
            )));
        }
        for (t, m) in xi.chunks(block).enumerate() {
            let sum: f64 = m.iter().sum();
            if (sum - 1.0).abs() > ROW_TOLERANCE || m.iter().any(|p| *p < 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "pairwise matrix {t} is not a distribution (sum {sum})"
                )));
            }
        }
        Ok(PairwisePosterior { n_states, xi })
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    /// Number of consecutive pairs, `N - 1`.
    pub fn len(&self) -> usize {
        self.xi.len() / (self.n_states * self.n_states)
    }

    pub fn is_empty(&self) -> bool {
        self.xi.is_empty()
    }

    /// Row-major `n_states x n_states` matrix for the pair `(t, t + 1)`.
    pub fn at(&self, t: usize) -> &[f64] {
        let b = self.n_states * self.n_states;
        &self.xi[t * b..(t + 1) * b]
    }

    pub fn get(&self, t: usize, i: usize, j: usize) -> f64 {
        self.at(t)[i * self.n_states + j]
    }
}

/// Backward table divided by the forward scale constants:
/// `beta_hat_t(i) = P(s_{t+1}..s_N | X_t = i) / prod_{u > t} c_u`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledBackward {
    n_states: usize,
    beta: Vec<f64>,
}

impl ScaledBackward {
    pub fn row(&self, t: usize) -> &[f64] {
        &self.beta[t * self.n_states..(t + 1) * self.n_states]
    }

    pub fn len(&self) -> usize {
        self.beta.len() / self.n_states
    }

    pub fn is_empty(&self) -> bool {
        self.beta.is_empty()
    }

    /// Unscaled `ln beta_t(i)`, recovered from the log normalizers used to
    /// build the table.
    pub fn log_unscaled(&self, t: usize, i: usize, log_normalizers: &[f64]) -> f64 {
        let tail: f64 = log_normalizers[t + 1..].iter().sum();
        self.row(t)[i].ln() + tail
    }
}

pub(crate) fn check_compatible(model: &ModelSpec, obs: &ObservationSequence) -> Result<()> {
    obs.check_max_count(model.max_count())
}

/// Emission factor of bin `t`, or 1 when the bin is hidden.
#[inline]
fn emission_factor(model: &ModelSpec, counts: &[u32], hidden: Option<usize>, t: usize, state: usize) -> f64 {
    if hidden == Some(t) {
        1.0
    } else {
        model.emission_prob(state, counts[t])
    }
}

/// Normalized forward pass. Returns the filtered rows and the scale
/// constants `c_t`.
pub(crate) fn forward_scaled(model: &ModelSpec, counts: &[u32], hidden: Option<usize>) -> Result<(Vec<f64>, Vec<f64>)> {
    let k = model.n_states();
    let a = model.transition();
    let n = counts.len();
    let mut alpha = vec![0.0; n * k];
    let mut scale = vec![0.0; n];
    for t in 0..n {
        let (done, rest) = alpha.split_at_mut(t * k);
        let cur = &mut rest[..k];
        if t == 0 {
            cur.copy_from_slice(model.initial());
        } else {
            let prev = &done[(t - 1) * k..];
            cur.iter_mut().for_each(|x| *x = 0.0);
            for (i, &p) in prev.iter().enumerate() {
                if p == 0.0 {
                    continue;
                }
                for (x, &aij) in cur.iter_mut().zip(&a[i * k..(i + 1) * k]) {
                    *x += p * aij;
                }
            }
        }
        let mut c = 0.0;
        for (j, x) in cur.iter_mut().enumerate() {
            *x *= emission_factor(model, counts, hidden, t, j);
            c += *x;
        }
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::ZeroLikelihood { bin: t });
        }
        cur.iter_mut().for_each(|x| *x /= c);
        scale[t] = c;
    }
    Ok((alpha, scale))
}

/// Scaled backward pass using the forward scale constants.
pub(crate) fn backward_scaled(
    model: &ModelSpec,
    counts: &[u32],
    scale: &[f64],
    hidden: Option<usize>,
) -> Result<Vec<f64>> {
    let k = model.n_states();
    let a = model.transition();
    let n = counts.len();
    let mut beta = vec![0.0; n * k];
    beta[(n - 1) * k..].iter_mut().for_each(|b| *b = 1.0);
    let mut w = vec![0.0; k];
    for t in (0..n - 1).rev() {
        let c = scale[t + 1];
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::ZeroLikelihood { bin: t + 1 });
        }
        let (head, tail) = beta.split_at_mut((t + 1) * k);
        let next = &tail[..k];
        for j in 0..k {
            w[j] = emission_factor(model, counts, hidden, t + 1, j) * next[j] / c;
        }
        let cur = &mut head[t * k..];
        let mut any = false;
        for i in 0..k {
            let b: f64 = a[i * k..(i + 1) * k].iter().zip(&w).map(|(x, y)| x * y).sum();
            cur[i] = b;
            any |= b > 0.0;
        }
        if !any {
            return Err(Error::ZeroLikelihood { bin: t + 1 });
        }
    }
    Ok(beta)
}

/// Smoothed rows from filtered rows and the scaled backward table. The last
/// row is the filtered row itself.
fn combine(alpha: &[f64], beta: &[f64], k: usize) -> Vec<f64> {
    let n = alpha.len() / k;
    let mut out = alpha.to_vec();
    for t in 0..n.saturating_sub(1) {
        let row = &mut out[t * k..(t + 1) * k];
        let b = &beta[t * k..(t + 1) * k];
        row.iter_mut().zip(b).for_each(|(x, y)| *x *= y);
        let s: f64 = row.iter().sum();
        row.iter_mut().for_each(|x| *x /= s);
    }
    out
}

fn logs(scale: &[f64]) -> Vec<f64> {
    scale.iter().map(|c| c.ln()).collect()
}

/// Filtered posteriors `P(X_t | s_1..s_t)` with per-bin log normalizers.
pub fn forward_filter(model: &ModelSpec, obs: &ObservationSequence) -> Result<PosteriorTrajectory> {
    check_compatible(model, obs)?;
    let (alpha, scale) = forward_scaled(model, obs.counts(), None)?;
    Ok(PosteriorTrajectory {
        kind: PosteriorKind::Filtered,
        n_states: model.n_states(),
        probs: alpha,
        log_normalizers: logs(&scale),
    })
}

/// Backward table scaled by the forward normalizers of the same data.
pub fn backward_pass(model: &ModelSpec, obs: &ObservationSequence, log_normalizers: &[f64]) -> Result<ScaledBackward> {
    check_compatible(model, obs)?;
    if log_normalizers.len() != obs.len() {
        return Err(Error::InvalidArgument(format!(
            "{} normalizers for {} bins",
            log_normalizers.len(),
            obs.len()
        )));
    }
    let scale: Vec<f64> = log_normalizers.iter().map(|l| l.exp()).collect();
    let beta = backward_scaled(model, obs.counts(), &scale, None)?;
    Ok(ScaledBackward {
        n_states: model.n_states(),
        beta,
    })
}

/// Smoothed posteriors `P(X_t | s_1..s_N)` and pairwise posteriors.
pub fn smooth(model: &ModelSpec, obs: &ObservationSequence) -> Result<(PosteriorTrajectory, PairwisePosterior)> {
    check_compatible(model, obs)?;
    let k = model.n_states();
    let counts = obs.counts();
    let (alpha, scale) = forward_scaled(model, counts, None)?;
    let beta = backward_scaled(model, counts, &scale, None)?;
    let a = model.transition();
    let n = counts.len();
    let mut xi = vec![0.0; (n - 1) * k * k];
    for t in 0..n - 1 {
        let m = &mut xi[t * k * k..(t + 1) * k * k];
        let c = scale[t + 1];
        for i in 0..k {
            let ai = alpha[t * k + i];
            for j in 0..k {
                m[i * k + j] = ai * a[i * k + j] * model.emission_prob(j, counts[t + 1]) * beta[(t + 1) * k + j] / c;
            }
        }
    }
    let probs = combine(&alpha, &beta, k);
    Ok((
        PosteriorTrajectory {
            kind: PosteriorKind::Smoothed,
            n_states: k,
            probs,
            log_normalizers: logs(&scale),
        },
        PairwisePosterior { n_states: k, xi },
    ))
}

/// `ln P(s_1..s_N)` under the model.
pub fn log_likelihood(model: &ModelSpec, obs: &ObservationSequence) -> Result<f64> {
    check_compatible(model, obs)?;
    let (_, scale) = forward_scaled(model, obs.counts(), None)?;
    Ok(scale.iter().map(|c| c.ln()).sum())
}

/// Predicted count distribution for one bin whose data is withheld.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BinPrediction {
    pub bin_index: usize,
    /// `P(X_t | all bins except t)`.
    pub state_full_record: Vec<f64>,
    /// `P(X_t | bins before t)`.
    pub state_forward_only: Vec<f64>,
    /// Count distribution over `0..=max_count` from the full record.
    pub full_record: Vec<f64>,
    /// Count distribution from earlier bins only.
    pub forward_only: Vec<f64>,
}

impl BinPrediction {
    /// Natural-log scores of an observed count under both predictions.
    pub fn log_scores(&self, count: u32) -> (f64, f64) {
        let c = count as usize;
        let at = |d: &[f64]| d.get(c).copied().unwrap_or(0.0).ln();
        (at(&self.full_record), at(&self.forward_only))
    }
}

fn mix_emissions(model: &ModelSpec, state_probs: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; model.n_symbols()];
    for (i, &p) in state_probs.iter().enumerate() {
        for (o, e) in out.iter_mut().zip(model.emission_row(i)) {
            *o += p * e;
        }
    }
    out
}

/// Predicts the count in bin `t` (0-based) from the remaining data:
/// `P(s_t) = sum_i P(s_t | X_t = i) P(X_t = i | ...)`, once conditioning on
/// every other bin and once on earlier bins only.
pub fn predict_bin(model: &ModelSpec, obs: &ObservationSequence, t: usize) -> Result<BinPrediction> {
    check_compatible(model, obs)?;
    if t >= obs.len() {
        return Err(Error::InvalidArgument(format!(
            "bin index {t} out of range for {} bins",
            obs.len()
        )));
    }
    let k = model.n_states();
    let counts = obs.counts();
    let (alpha, scale) = forward_scaled(model, counts, Some(t))?;
    let beta = backward_scaled(model, counts, &scale, Some(t))?;

    // With the emission factor at t set to one, the forward row at t is the
    // one-step prediction from earlier bins.
    let state_forward_only = alpha[t * k..(t + 1) * k].to_vec();
    let mut state_full_record: Vec<f64> = state_forward_only
        .iter()
        .zip(&beta[t * k..(t + 1) * k])
        .map(|(x, y)| x * y)
        .collect();
    let s: f64 = state_full_record.iter().sum();
    state_full_record.iter_mut().for_each(|x| *x /= s);

    Ok(BinPrediction {
        bin_index: t,
        full_record: mix_emissions(model, &state_full_record),
        forward_only: mix_emissions(model, &state_forward_only),
        state_full_record,
        state_forward_only,
    })
}

/// Accumulated expectations for one Baum-Welch step, gathered in a single
/// backward sweep without storing the pairwise table.
#[derive(Debug, Clone)]
pub(crate) struct ExpectedCounts {
    /// Smoothed posterior of the first bin.
    pub first: Vec<f64>,
    /// `sum_t xi_t(i, j)` over `t < N - 1`, row-major.
    pub transitions: Vec<f64>,
    /// `sum_t P(X_t = i)` over `t < N - 1`.
    pub transition_occupancy: Vec<f64>,
    /// `sum_t P(X_t = i) [s_t = s]`, row-major `n_states x n_symbols`.
    pub emissions: Vec<f64>,
    /// `sum_t P(X_t = i)` over all bins.
    pub occupancy: Vec<f64>,
    pub log_likelihood: f64,
}

pub(crate) fn expected_counts(model: &ModelSpec, counts: &[u32]) -> Result<ExpectedCounts> {
    let k = model.n_states();
    let m = model.n_symbols();
    let a = model.transition();
    let n = counts.len();
    let (alpha, scale) = forward_scaled(model, counts, None)?;

    let mut transitions = vec![0.0; k * k];
    let mut transition_occupancy = vec![0.0; k];
    let mut emissions = vec![0.0; k * m];
    let mut occupancy = vec![0.0; k];

    let last = &alpha[(n - 1) * k..];
    for i in 0..k {
        emissions[i * m + counts[n - 1] as usize] += last[i];
        occupancy[i] += last[i];
    }

    let mut next = vec![1.0; k];
    let mut cur = vec![0.0; k];
    let mut w = vec![0.0; k];
    let mut gamma = vec![0.0; k];
    for t in (0..n - 1).rev() {
        let c = scale[t + 1];
        let s_next = counts[t + 1];
        for j in 0..k {
            w[j] = model.emission_prob(j, s_next) * next[j] / c;
        }
        let at = &alpha[t * k..(t + 1) * k];
        let mut norm = 0.0;
        for i in 0..k {
            let row = &a[i * k..(i + 1) * k];
            let mut b = 0.0;
            for j in 0..k {
                let aw = row[j] * w[j];
                transitions[i * k + j] += at[i] * aw;
                b += aw;
            }
            cur[i] = b;
            gamma[i] = at[i] * b;
            norm += gamma[i];
        }
        if !(norm > 0.0) {
            return Err(Error::ZeroLikelihood { bin: t + 1 });
        }
        let s = counts[t] as usize;
        for i in 0..k {
            let g = gamma[i] / norm;
            gamma[i] = g;
            emissions[i * m + s] += g;
            occupancy[i] += g;
            transition_occupancy[i] += g;
        }
        std::mem::swap(&mut next, &mut cur);
    }
    let first = if n == 1 { last.to_vec() } else { gamma };

    Ok(ExpectedCounts {
        first,
        transitions,
        transition_occupancy,
        emissions,
        occupancy,
        log_likelihood: scale.iter().map(|c| c.ln()).sum(),
    })
}
