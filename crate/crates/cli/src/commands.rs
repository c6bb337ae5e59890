use std::fs::{self, File};
use std::io::BufReader;
use std::path::Path;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use telegraph_hmm::ingest::{read_counts_csv, write_counts_csv, write_timestamps};
use telegraph_hmm::output::{sig9, write_aggregate_csv, write_posterior_csv, write_trace_csv};
use telegraph_hmm::*;

use crate::files::OutDir;
use crate::{
    Cli, Command, CompareArgs, FitArgs, Format, Global, IngestArgs, LabelArg, PredictArgs, SimulateArgs, SmoothArgs,
};

pub fn run(cli: Cli) -> Result<ExitCode> {
    let g = &cli.global;
    if !(g.tol > 0.0) {
        bail!("--tol must be positive, got {}", g.tol);
    }
    if g.max_iter == 0 || g.workers == 0 {
        bail!("--max-iter and --workers must be at least 1");
    }
    if let Some(w) = g.bin_width {
        if !(w > 0.0) {
            bail!("--bin-width must be positive, got {w}");
        }
    }
    let out = OutDir::new(&g.out, g.force)?;
    match cli.command {
        Command::Ingest(a) => ingest(g, &out, a),
        Command::Simulate(a) => simulate(g, &out, a),
        Command::Fit(a) => fit(g, &out, a),
        Command::Smooth(a) => smooth_cmd(g, &out, a),
        Command::Predict(a) => predict(g, &out, a),
        Command::Compare(a) => compare(&out, a),
    }
}

fn require_seed(g: &Global, what: &str) -> Result<u64> {
    g.seed.with_context(|| format!("{what} needs an explicit --seed"))
}

fn bin_width(g: &Global) -> f64 {
    g.bin_width.unwrap_or(DEFAULT_BIN_WIDTH)
}

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(
        File::open(path).with_context(|| format!("opening {}", path.display()))?,
    ))
}

fn load_counts(g: &Global, path: &Path) -> Result<ObservationSequence> {
    let counts = read_counts_csv(open(path)?).with_context(|| format!("reading {}", path.display()))?;
    ObservationSequence::new(counts, bin_width(g)).with_context(|| format!("reading {}", path.display()))
}

fn load_model(path: &Path) -> Result<ModelSpec> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    ModelSpec::from_json(&text).with_context(|| format!("parsing model {}", path.display()))
}

fn fit_to_model(obs: ObservationSequence, model: &ModelSpec, clamp: bool) -> Result<ObservationSequence> {
    if clamp {
        return Ok(obs.clamped(model.max_count()));
    }
    obs.check_max_count(model.max_count())
        .context("counts do not fit the model's emission table (use --clamp)")?;
    Ok(obs)
}

fn ingest(g: &Global, out: &OutDir, a: IngestArgs) -> Result<ExitCode> {
    out.claim(&["counts.csv".into()])?;
    let record = parse_timestamps(open(&a.input)?, a.format.into(), a.tick_resolution)
        .with_context(|| format!("reading {}", a.input.display()))?;
    let span = a
        .start
        .zip(a.duration)
        .map(|(start, duration)| TimeSpan { start, duration });
    let span = span.or(a.duration.map(|duration| TimeSpan { start: 0.0, duration }));
    let width = bin_width(g);
    let counts = count_bins(&record, width, span)?;
    out.write("counts.csv", |w| Ok(write_counts_csv(w, &counts)?))?;
    let clicks: u64 = counts.iter().map(|&c| c as u64).sum();
    let seconds = counts.len() as f64 * width;
    let rate = if seconds > 0.0 {
        clicks as f64 / seconds / 1000.0
    } else {
        0.0
    };
    println!(
        "{} timestamps read, {clicks} in {} bins of {} s, mean rate {} counts/ms",
        record.len(),
        counts.len(),
        sig9(width),
        sig9(rate)
    );
    Ok(ExitCode::SUCCESS)
}

fn simulate(g: &Global, out: &OutDir, a: SimulateArgs) -> Result<ExitCode> {
    let seed = require_seed(g, "simulate")?;
    let mut config = match &a.config {
        Some(p) => serde_json::from_reader(open(p)?).with_context(|| format!("parsing {}", p.display()))?,
        None => SimConfig::default_run(seed),
    };
    config.seed = seed;
    if let Some(n) = a.n_bins {
        config.n_bins = n;
    }
    if let Some(w) = g.bin_width {
        config.bin_width = w;
    }
    config.emit_timestamps = a.timestamps.is_some();
    let ts_name = match a.timestamps {
        Some(Format::Text) => Some("timestamps.txt"),
        Some(Format::Binary) => Some("timestamps.bin"),
        None => None,
    };
    let mut names = vec!["counts.csv".to_string(), "states.csv".into(), "sim_config.json".into()];
    names.extend(ts_name.map(String::from));
    out.claim(&names)?;

    let sim = simulate_chain(&config)?;
    out.write("counts.csv", |w| Ok(write_counts_csv(w, sim.observations.counts())?))?;
    out.write("states.csv", |w| {
        writeln!(w, "bin_index,state")?;
        for (t, s) in sim.states.iter().enumerate() {
            writeln!(w, "{t},{s}")?;
        }
        Ok(())
    })?;
    out.write_str("sim_config.json", &serde_json::to_string_pretty(&config)?)?;
    if let (Some(name), Some(rec), Some(fmt)) = (ts_name, &sim.timestamps, a.timestamps) {
        out.write(name, |w| Ok(write_timestamps(w, rec.ticks(), fmt.into())?))?;
    }
    let clicks: u64 = sim.observations.counts().iter().map(|&c| c as u64).sum();
    println!(
        "simulated {} bins of {} s with seed {seed}: {clicks} clicks",
        config.n_bins,
        sig9(config.bin_width)
    );
    Ok(ExitCode::SUCCESS)
}

fn fit(g: &Global, out: &OutDir, a: FitArgs) -> Result<ExitCode> {
    let seed = require_seed(g, "fit")?;
    if a.k.is_empty() || a.k.contains(&0) {
        bail!("--k needs state counts of at least 1");
    }
    let mut ks = a.k.clone();
    ks.sort_unstable();
    ks.dedup();
    let mut names = Vec::new();
    for k in &ks {
        names.push(format!("model_k{k}.json"));
        names.push(format!("fit_k{k}.json"));
        names.push(format!("trace_k{k}.csv"));
    }
    if ks.len() > 1 {
        names.push("comparison.json".into());
    }
    out.claim(&names)?;

    let mut obs = load_counts(g, &a.counts)?;
    if a.clamp {
        obs = obs.clamped(a.max_count.expect("clap requires --max-count with --clamp"));
    }
    let opts = FitOptions {
        restarts: a.restarts,
        base_seed: seed,
        tol: g.tol,
        max_iter: g.max_iter,
        workers: g.workers,
        max_count: a.max_count,
    };
    let mut fits = Vec::new();
    let mut all_converged = true;
    println!("k  loglik  iterations  converged  final_change  best_seed");
    for &k in &ks {
        let f = fit_k_states(&obs, k, &opts).with_context(|| format!("fitting k={k}"))?;
        out.write_str(&format!("model_k{k}.json"), &f.best.model.to_json()?)?;
        out.write_str(&format!("fit_k{k}.json"), &serde_json::to_string_pretty(&f)?)?;
        out.write(&format!("trace_k{k}.csv"), |w| {
            Ok(write_trace_csv(w, &f.best.loglik_trace)?)
        })?;
        println!(
            "{k}  {:.6}  {}  {}  {:.3e}  {}",
            f.loglik, f.best.iterations, f.best.converged, f.best.final_delta, f.best_seed
        );
        if !f.best.converged {
            all_converged = false;
            eprintln!(
                "k={k}: best restart did not converge in {} iterations (last change {:.3e}, tolerance {:.3e})",
                f.best.iterations, f.best.final_delta, g.tol
            );
        }
        fits.push(f);
    }
    if fits.len() > 1 {
        let cmp = compare_models(&fits)?;
        out.write_str("comparison.json", &serde_json::to_string_pretty(&cmp)?)?;
        print_comparison(&cmp);
    }
    Ok(if all_converged {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn print_comparison(cmp: &ModelComparison) {
    println!("k  params  loglik  AIC  BIC");
    for r in &cmp.records {
        println!("{}  {}  {:.6}  {:.6}  {:.6}", r.k, r.n_params, r.loglik, r.aic, r.bic);
    }
    println!("AIC ranking {:?}, BIC ranking {:?}", cmp.aic_ranking, cmp.bic_ranking);
}

fn policy(l: &LabelArg) -> LabelPolicy {
    match *l {
        LabelArg::HighestMean => LabelPolicy::HighestMean,
        LabelArg::LargestGap => LabelPolicy::LargestGap,
        LabelArg::Threshold(x) => LabelPolicy::Threshold(x),
    }
}

fn smooth_cmd(g: &Global, out: &OutDir, a: SmoothArgs) -> Result<ExitCode> {
    let names = [
        "filtered.csv",
        "smoothed.csv",
        "aggregate.csv",
        "aggregate_filtered.csv",
    ];
    out.claim(&names.map(String::from))?;
    let model = load_model(&a.model)?;
    let obs = fit_to_model(load_counts(g, &a.counts)?, &model, a.clamp)?;
    let filtered = forward_filter(&model, &obs)?;
    let (smoothed, _) = smooth(&model, &obs)?;
    let labels = assign_labels(&model, policy(&a.labels));
    let agg_s = aggregate_populations(&smoothed, &labels)?;
    let agg_f = aggregate_populations(&filtered, &labels)?;
    let w = obs.bin_width();
    out.write("filtered.csv", |o| Ok(write_posterior_csv(o, &filtered, w)?))?;
    out.write("smoothed.csv", |o| Ok(write_posterior_csv(o, &smoothed, w)?))?;
    out.write("aggregate.csv", |o| Ok(write_aggregate_csv(o, &agg_s, w)?))?;
    out.write("aggregate_filtered.csv", |o| Ok(write_aggregate_csv(o, &agg_f, w)?))?;
    println!(
        "{} bins, log-likelihood {:.6}; P_F4 0.5-crossings: filtered {}, smoothed {}",
        obs.len(),
        filtered.log_likelihood(),
        count_crossings(&agg_f.p_f4, 0.5),
        count_crossings(&agg_s.p_f4, 0.5)
    );
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct PredictionReport {
    bin_index: usize,
    count: u32,
    full_record: Vec<f64>,
    forward_only: Vec<f64>,
    state_full_record: Vec<f64>,
    state_forward_only: Vec<f64>,
    log_score_full_record: f64,
    log_score_forward_only: f64,
}

#[derive(Serialize)]
struct SampledBin {
    bin_index: usize,
    count: u32,
    log_score_full_record: f64,
    log_score_forward_only: f64,
}

#[derive(Serialize)]
struct SampleReport {
    seed: u64,
    n_hidden: usize,
    mean_log_score_full_record: f64,
    mean_log_score_forward_only: f64,
    bins: Vec<SampledBin>,
}

fn predict(g: &Global, out: &OutDir, a: PredictArgs) -> Result<ExitCode> {
    let name = if a.sample.is_some() {
        "prediction_sample.json"
    } else {
        "prediction.json"
    };
    out.claim(&[name.into()])?;
    let model = load_model(&a.model)?;
    let obs = fit_to_model(load_counts(g, &a.counts)?, &model, a.clamp)?;
    let n = obs.len();

    if let Some(t) = a.bin {
        if t >= n {
            bail!("--bin {t} is out of range for {n} bins (indices start at 0)");
        }
        let p = predict_bin(&model, &obs, t)?;
        let count = obs.counts()[t];
        let (full, fwd) = p.log_scores(count);
        let report = PredictionReport {
            bin_index: t,
            count,
            full_record: p.full_record,
            forward_only: p.forward_only,
            state_full_record: p.state_full_record,
            state_forward_only: p.state_forward_only,
            log_score_full_record: full,
            log_score_forward_only: fwd,
        };
        out.write_str(name, &serde_json::to_string_pretty(&report)?)?;
        println!("bin {t}: count {count}, log-score full record {full:.6}, forward only {fwd:.6}");
        return Ok(ExitCode::SUCCESS);
    }

    let m = a.sample.expect("clap requires --bin or --sample");
    let seed = require_seed(g, "predict --sample")?;
    if m == 0 || m > n {
        bail!("--sample must be between 1 and the number of bins ({n})");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx = sample(&mut rng, n, m).into_vec();
    idx.sort_unstable();
    let mut bins = Vec::with_capacity(m);
    for t in idx {
        let count = obs.counts()[t];
        let (full, fwd) = predict_bin(&model, &obs, t)?.log_scores(count);
        bins.push(SampledBin {
            bin_index: t,
            count,
            log_score_full_record: full,
            log_score_forward_only: fwd,
        });
    }
    let mean_full = bins.iter().map(|b| b.log_score_full_record).sum::<f64>() / m as f64;
    let mean_fwd = bins.iter().map(|b| b.log_score_forward_only).sum::<f64>() / m as f64;
    let report = SampleReport {
        seed,
        n_hidden: m,
        mean_log_score_full_record: mean_full,
        mean_log_score_forward_only: mean_fwd,
        bins,
    };
    out.write_str(name, &serde_json::to_string_pretty(&report)?)?;
    println!("{m} hidden bins: mean log-score full record {mean_full:.6}, forward only {mean_fwd:.6}");
    Ok(ExitCode::SUCCESS)
}

fn compare(out: &OutDir, a: CompareArgs) -> Result<ExitCode> {
    out.claim(&["comparison.json".into()])?;
    let fits = a
        .fits
        .iter()
        .map(|p| {
            serde_json::from_reader::<_, KStateFit>(open(p)?).with_context(|| format!("parsing fit {}", p.display()))
        })
        .collect::<Result<Vec<_>>>()?;
    let cmp = compare_models(&fits)?;
    out.write_str("comparison.json", &serde_json::to_string_pretty(&cmp)?)?;
    print_comparison(&cmp);
    Ok(ExitCode::SUCCESS)
}
