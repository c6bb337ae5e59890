//! CSV writers for posterior and aggregated trajectories.

use std::io::Write;

use crate::error::{Error, Result};
use crate::inference::PosteriorTrajectory;
use crate::select::LevelPopulations;

/// Formats like C's `%.9g`: nine significant digits, trailing zeros
/// removed, scientific notation for very small or large magnitudes.
pub fn sig9(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}"))
    } else {
        format!(
            "{}e{}{:02}",
            trim_zeros(mantissa),
            if exp < 0 { '-' } else { '+' },
            exp.abs()
        )
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

/// `bin_index,time_s,state_0,...,state_{k-1}`, time at the start of each bin.
pub fn write_posterior_csv<W: Write>(out: W, posterior: &PosteriorTrajectory, bin_width: f64) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["bin_index".to_string(), "time_s".to_string()];
    header.extend((0..posterior.n_states()).map(|i| format!("state_{i}")));
    w.write_record(&header)?;
    for (t, row) in posterior.rows().enumerate() {
        let mut rec = vec![t.to_string(), sig9(t as f64 * bin_width)];
        rec.extend(row.iter().map(|p| sig9(*p)));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// `bin_index,time_s,P_F3,P_F4`.
pub fn write_aggregate_csv<W: Write>(out: W, pops: &LevelPopulations, bin_width: f64) -> Result<()> {
    if pops.p_f3.len() != pops.p_f4.len() {
        return Err(Error::InvalidArgument("population columns differ in length".into()));
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["bin_index", "time_s", "P_F3", "P_F4"])?;
    for (t, (a, b)) in pops.p_f3.iter().zip(&pops.p_f4).enumerate() {
        w.write_record([t.to_string(), sig9(t as f64 * bin_width), sig9(*a), sig9(*b)])?;
    }
    w.flush()?;
    Ok(())
}

/// `iteration,loglik` for an EM trace.
pub fn write_trace_csv<W: Write>(out: W, trace: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["iteration", "loglik"])?;
    for (i, ll) in trace.iter().enumerate() {
        w.write_record([(i + 1).to_string(), format!("{ll:.17e}")])?;
    }
    w.flush()?;
    Ok(())
}
