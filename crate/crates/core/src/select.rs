//! Fitting models with several hidden-state counts, comparing them, and
//! mapping fitted states onto the two physical transmission levels.
//!
//! Fitted models are always reported in canonical order (ascending emission
//! mean), so results from different restarts and different `k` line up.

use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::em::{baum_welch, FitResult, DEFAULT_MAX_ITER, DEFAULT_TOLERANCE};
use crate::error::{Error, Result};
use crate::inference::{log_likelihood, PosteriorTrajectory};
use crate::model::{ModelSpec, ObservationSequence};
use crate::reestimate::{floored_distribution, EMISSION_FLOOR};

#[derive(Debug, Clone, PartialEq)]
pub struct FitOptions {
    pub restarts: usize,
    pub base_seed: u64,
    pub tol: f64,
    pub max_iter: usize,
    /// Worker threads for independent restarts.
    pub workers: usize,
    /// Emission table size; defaults to the largest observed count plus 2.
    pub max_count: Option<usize>,
}

impl FitOptions {
    pub fn new(restarts: usize, base_seed: u64) -> Self {
        FitOptions {
            restarts,
            base_seed,
            tol: DEFAULT_TOLERANCE,
            max_iter: DEFAULT_MAX_ITER,
            workers: 1,
            max_count: None,
        }
    }
}

/// Outcome of one random restart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartSummary {
    pub seed: u64,
    pub loglik: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub error: Option<String>,
}

/// Best of several restarts for one state count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KStateFit {
    pub k: usize,
    pub n_bins: usize,
    /// Winning fit, model in canonical order.
    pub best: FitResult,
    pub best_seed: u64,
    /// Log-likelihood of the returned model.
    pub loglik: f64,
    pub restarts: Vec<RestartSummary>,
}

/// Seed of restart `r`.
pub fn restart_seed(base_seed: u64, r: usize) -> u64 {
    base_seed.wrapping_add(r as u64)
}

fn dirichlet_uniform<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let g: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let s: f64 = g.iter().sum();
    g.into_iter().map(|x| x / s).collect()
}

/// Random starting model.
///
/// The initial distribution is uniform. Each transition row keeps the
/// current state with probability `1 - q` and otherwise jumps according to
/// a uniform draw from the simplex, with `q` log-uniform in `[1e-3, 1e-1]`.
/// Each emission row is the global count histogram, exponentially tilted by
/// a random slope in `[-1, 1]` and scaled entrywise by unit-exponential
/// noise.
pub fn random_initial_model(obs: &ObservationSequence, k: usize, max_count: usize, seed: u64) -> Result<ModelSpec> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let hist = obs.histogram(max_count);
    let mean: f64 = hist.iter().enumerate().map(|(s, h)| s as f64 * h).sum();
    let mut transition = Vec::with_capacity(k * k);
    for i in 0..k {
        let leave = 10f64.powf(rng.random_range(-3.0..-1.0));
        let row = dirichlet_uniform(&mut rng, k);
        transition.extend(row.iter().enumerate().map(|(j, p)| {
            let stay = if i == j { 1.0 - leave } else { 0.0 };
            stay + leave * p
        }));
    }
    let mut emission = Vec::with_capacity(k * (max_count + 1));
    for _ in 0..k {
        let tilt: f64 = rng.random_range(-1.0..1.0);
        let w: Vec<f64> = hist
            .iter()
            .enumerate()
            .map(|(s, h)| h * (tilt * (s as f64 - mean)).exp() * rng.sample::<f64, _>(Exp1))
            .collect();
        emission.extend(floored_distribution(&w, EMISSION_FLOOR));
    }
    ModelSpec::new(vec![1.0 / k as f64; k], transition, emission)
}

fn run_restart(
    obs: &ObservationSequence,
    k: usize,
    max_count: usize,
    seed: u64,
    opts: &FitOptions,
) -> Result<(FitResult, f64)> {
    let init = random_initial_model(obs, k, max_count, seed)?;
    let fit = baum_welch(&init, obs, opts.tol, opts.max_iter)?;
    let ll = log_likelihood(&fit.model, obs)?;
    Ok((fit, ll))
}

/// Runs Baum-Welch from `opts.restarts` random starting points and keeps the
/// fit with the highest log-likelihood, ties going to the lowest seed.
pub fn fit_k_states(obs: &ObservationSequence, k: usize, opts: &FitOptions) -> Result<KStateFit> {
    if k == 0 || opts.restarts == 0 {
        return Err(Error::InvalidArgument("k and restarts must be at least 1".into()));
    }
    let max_count = opts.max_count.unwrap_or_else(|| obs.default_max_count());
    obs.check_max_count(max_count)?;
    let seeds: Vec<u64> = (0..opts.restarts).map(|r| restart_seed(opts.base_seed, r)).collect();

    let results: Vec<Result<(FitResult, f64)>> = if opts.workers <= 1 {
        seeds.iter().map(|&s| run_restart(obs, k, max_count, s, opts)).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(opts.workers)
            .build()
            .map_err(|e| Error::InvalidArgument(format!("worker pool: {e}")))?;
        pool.install(|| {
            seeds
                .par_iter()
                .map(|&s| run_restart(obs, k, max_count, s, opts))
                .collect()
        })
    };

    let mut summaries = Vec::with_capacity(seeds.len());
    let mut best: Option<(FitResult, f64, u64)> = None;
    for (&seed, res) in seeds.iter().zip(results) {
        match res {
            Ok((fit, ll)) => {
                log::info!(
                    "k={k} seed={seed}: loglik {ll:.6} after {} iterations (converged: {})",
                    fit.iterations,
                    fit.converged
                );
                summaries.push(RestartSummary {
                    seed,
                    loglik: Some(ll),
                    iterations: fit.iterations,
                    converged: fit.converged,
                    error: None,
                });
                if best.as_ref().is_none_or(|(_, b, _)| ll > *b) {
                    best = Some((fit, ll, seed));
                }
            }
            Err(e) => {
                log::warn!("k={k} seed={seed}: restart failed: {e}");
                summaries.push(RestartSummary {
                    seed,
                    loglik: None,
                    iterations: 0,
                    converged: false,
                    error: Some(e.to_string()),
                });
            }
        }
    }
    let (mut fit, loglik, best_seed) = best.ok_or(Error::AllRestartsFailed(opts.restarts))?;
    fit.model = fit.model.canonicalized();
    Ok(KStateFit {
        k,
        n_bins: obs.len(),
        best: fit,
        best_seed,
        loglik,
        restarts: summaries,
    })
}

/// Free parameters of a `k`-state model with counts `0..=max_count`.
pub fn parameter_count(k: usize, max_count: usize) -> usize {
    (k - 1) + k * (k - 1) + k * max_count
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRecord {
    pub k: usize,
    pub loglik: f64,
    pub n_params: usize,
    pub aic: f64,
    pub bic: f64,
    pub best_seed: u64,
    pub restart_seeds: Vec<u64>,
    pub converged: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelComparison {
    pub n_bins: usize,
    pub records: Vec<ComparisonRecord>,
    /// State counts ordered from best to worst AIC.
    pub aic_ranking: Vec<usize>,
    /// State counts ordered from best to worst BIC.
    pub bic_ranking: Vec<usize>,
}

fn ranking(records: &[ComparisonRecord], key: impl Fn(&ComparisonRecord) -> f64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..records.len()).collect();
    idx.sort_by(|&a, &b| key(&records[a]).total_cmp(&key(&records[b])).then(a.cmp(&b)));
    idx.into_iter().map(|i| records[i].k).collect()
}

/// Scores each fit by `AIC = 2p - 2 ln L` and `BIC = p ln N - 2 ln L`.
pub fn compare_models(fits: &[KStateFit]) -> Result<ModelComparison> {
    if fits.len() < 2 {
        return Err(Error::InvalidArgument(
            "at least two fits are needed for a comparison".into(),
        ));
    }
    let n_bins = fits[0].n_bins;
    if fits.iter().any(|f| f.n_bins != n_bins) {
        return Err(Error::InvalidArgument(
            "fits were made on records of different length".into(),
        ));
    }
    let records: Vec<ComparisonRecord> = fits
        .iter()
        .map(|f| {
            let p = parameter_count(f.k, f.best.model.max_count());
            ComparisonRecord {
                k: f.k,
                loglik: f.loglik,
                n_params: p,
                aic: 2.0 * p as f64 - 2.0 * f.loglik,
                bic: p as f64 * (n_bins as f64).ln() - 2.0 * f.loglik,
                best_seed: f.best_seed,
                restart_seeds: f.restarts.iter().map(|r| r.seed).collect(),
                converged: f.restarts.iter().map(|r| r.converged).collect(),
            }
        })
        .collect();
    Ok(ModelComparison {
        n_bins,
        aic_ranking: ranking(&records, |r| r.aic),
        bic_ranking: ranking(&records, |r| r.bic),
        records,
    })
}

/// Physical hyperfine level a hidden state is attributed to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Level {
    /// High cavity transmission.
    F3,
    /// Low cavity transmission.
    F4,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LabelPolicy {
    /// Only the state with the highest emission mean is high-transmission.
    HighestMean,
    /// States with emission mean above the threshold are high-transmission.
    Threshold(f64),
    /// Sorted means are split at their largest gap; states above it are
    /// high-transmission.
    LargestGap,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateLabeling {
    /// State indices by ascending emission mean.
    pub order: Vec<usize>,
    /// Level of each state, indexed by state.
    pub groups: Vec<Level>,
    pub means: Vec<f64>,
}

impl StateLabeling {
    pub fn states_in(&self, level: Level) -> impl Iterator<Item = usize> + '_ {
        self.groups
            .iter()
            .enumerate()
            .filter(move |(_, l)| **l == level)
            .map(|(i, _)| i)
    }
}

pub fn assign_labels(model: &ModelSpec, policy: LabelPolicy) -> StateLabeling {
    let means = model.emission_means();
    let order = model.mean_order();
    if order.windows(2).any(|w| means[w[0]] == means[w[1]]) {
        log::warn!("states share an emission mean; ordering ties by state index");
    }
    let mut groups = vec![Level::F4; means.len()];
    match policy {
        LabelPolicy::HighestMean => {
            if let Some(&top) = order.last() {
                groups[top] = Level::F3;
            }
        }
        LabelPolicy::LargestGap => {
            let cut = order
                .windows(2)
                .enumerate()
                .max_by(|(a, x), (b, y)| {
                    (means[x[1]] - means[x[0]])
                        .total_cmp(&(means[y[1]] - means[y[0]]))
                        .then(b.cmp(a))
                })
                .map_or(0, |(i, _)| i + 1);
            for &s in &order[cut..] {
                groups[s] = Level::F3;
            }
        }
        LabelPolicy::Threshold(th) => {
            for (g, m) in groups.iter_mut().zip(&means) {
                if *m > th {
                    *g = Level::F3;
                }
            }
        }
    }
    StateLabeling { order, groups, means }
}

/// Per-bin total probability of the two levels.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelPopulations {
    pub p_f3: Vec<f64>,
    pub p_f4: Vec<f64>,
}

pub fn aggregate_populations(posterior: &PosteriorTrajectory, labeling: &StateLabeling) -> Result<LevelPopulations> {
    if labeling.groups.len() != posterior.n_states() {
        return Err(Error::InvalidArgument(format!(
            "labeling covers {} states, posterior has {}",
            labeling.groups.len(),
            posterior.n_states()
        )));
    }
    let mut p_f3 = Vec::with_capacity(posterior.len());
    let mut p_f4 = Vec::with_capacity(posterior.len());
    for row in posterior.rows() {
        let (mut hi, mut lo) = (0.0, 0.0);
        for (p, g) in row.iter().zip(&labeling.groups) {
            match g {
                Level::F3 => hi += p,
                Level::F4 => lo += p,
            }
        }
        p_f3.push(hi);
        p_f4.push(lo);
    }
    Ok(LevelPopulations { p_f3, p_f4 })
}

/// Number of times a series crosses `level` between consecutive samples.
pub fn count_crossings(series: &[f64], level: f64) -> usize {
    series.windows(2).filter(|w| (w[0] < level) != (w[1] < level)).count()
}

/// Aggregate jump rates between the two levels, per second.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LevelRates {
    pub f3_to_f4: f64,
    pub f4_to_f3: f64,
}

fn reachable(adj: &[Vec<usize>], from: usize) -> Vec<bool> {
    let mut seen = vec![false; adj.len()];
    let mut queue = VecDeque::from([from]);
    seen[from] = true;
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                queue.push_back(v);
            }
        }
    }
    seen
}

fn is_irreducible(model: &ModelSpec) -> bool {
    let k = model.n_states();
    let mut fwd = vec![Vec::new(); k];
    let mut rev = vec![Vec::new(); k];
    for (i, out) in fwd.iter_mut().enumerate() {
        for (j, &p) in model.transition_row(i).iter().enumerate() {
            if p > 0.0 && i != j {
                out.push(j);
                rev[j].push(i);
            }
        }
    }
    reachable(&fwd, 0).into_iter().all(|x| x) && reachable(&rev, 0).into_iter().all(|x| x)
}

/// Stationary distribution of an irreducible transition matrix.
pub fn stationary_distribution(model: &ModelSpec) -> Result<Vec<f64>> {
    if !is_irreducible(model) {
        return Err(Error::NonErgodic("transition graph is not strongly connected".into()));
    }
    let k = model.n_states();
    // (A^T - I) pi = 0 with the last equation replaced by sum(pi) = 1.
    let mut m = DMatrix::from_fn(k, k, |r, c| model.transition_row(c)[r] - if r == c { 1.0 } else { 0.0 });
    for c in 0..k {
        m[(k - 1, c)] = 1.0;
    }
    let mut rhs = DVector::zeros(k);
    rhs[k - 1] = 1.0;
    let pi = m
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::NonErgodic("singular stationary system".into()))?;
    let mut pi: Vec<f64> = pi.iter().map(|p| p.max(0.0)).collect();
    let s: f64 = pi.iter().sum();
    pi.iter_mut().for_each(|p| *p /= s);
    Ok(pi)
}

/// Per-second rates of leaving each level, with source states weighted by
/// their stationary occupancy within the level.
///
/// A chain that never moves between the two levels yields zero rates with
/// a warning; any other reducible chain is an error.
pub fn rates_from_transitions(model: &ModelSpec, labeling: &StateLabeling, bin_width: f64) -> Result<LevelRates> {
    if !(bin_width > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "bin width must be positive, got {bin_width}"
        )));
    }
    let k = model.n_states();
    if labeling.groups.len() != k {
        return Err(Error::InvalidArgument("labeling does not match model".into()));
    }
    let cross = |i: usize| -> f64 {
        model
            .transition_row(i)
            .iter()
            .zip(&labeling.groups)
            .filter(|(_, g)| **g != labeling.groups[i])
            .map(|(p, _)| p)
            .sum()
    };
    let pi = match stationary_distribution(model) {
        Ok(pi) => pi,
        Err(e) => {
            if (0..k).all(|i| cross(i) == 0.0) {
                log::warn!("levels are disconnected ({e}); reporting zero rates");
                return Ok(LevelRates {
                    f3_to_f4: 0.0,
                    f4_to_f3: 0.0,
                });
            }
            return Err(e);
        }
    };
    let rate = |level: Level| -> f64 {
        let (mut flow, mut mass) = (0.0, 0.0);
        for i in labeling.states_in(level) {
            flow += pi[i] * cross(i);
            mass += pi[i];
        }
        if mass > 0.0 {
            flow / mass / bin_width
        } else {
            0.0
        }
    };
    Ok(LevelRates {
        f3_to_f4: rate(Level::F3),
        f4_to_f3: rate(Level::F4),
    })
}
