//! Photon arrival-time records and their reduction to binned counts.
//!
//! Two on-disk timestamp layouts are supported: text with one decimal tick
//! per line, and contiguous little-endian `u64` ticks. Counts are exchanged
//! as CSV with header `bin_index,count`.

use std::io::{BufRead, BufReader, Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ObservationSequence;

/// Timestamp resolution of the acquisition hardware, in seconds per tick.
pub const DEFAULT_TICK_RESOLUTION: f64 = 50e-9;
/// Analysis bin width, in seconds.
pub const DEFAULT_BIN_WIDTH: f64 = 50e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TimestampFormat {
    Text,
    Binary,
}

impl std::str::FromStr for TimestampFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text" | "txt" => Ok(TimestampFormat::Text),
            "binary" | "bin" => Ok(TimestampFormat::Binary),
            other => Err(Error::InvalidArgument(format!("unknown timestamp format {other:?}"))),
        }
    }
}

/// Sorted photon arrival times in integer ticks.
#[derive(Debug, Clone, PartialEq)]
pub struct PhotonRecord {
    ticks: Vec<u64>,
    tick_resolution: f64,
}

fn check_sorted(ticks: &[u64]) -> Result<()> {
    match ticks.windows(2).position(|w| w[1] < w[0]) {
        Some(i) => Err(Error::Unsorted {
            index: i + 1,
            previous: ticks[i],
            value: ticks[i + 1],
        }),
        None => Ok(()),
    }
}

impl PhotonRecord {
    pub fn new(ticks: Vec<u64>, tick_resolution: f64) -> Result<Self> {
        if !(tick_resolution > 0.0 && tick_resolution.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "tick resolution must be positive, got {tick_resolution}"
            )));
        }
        check_sorted(&ticks)?;
        Ok(PhotonRecord { ticks, tick_resolution })
    }

    pub fn ticks(&self) -> &[u64] {
        &self.ticks
    }

    pub fn tick_resolution(&self) -> f64 {
        self.tick_resolution
    }

    pub fn len(&self) -> usize {
        self.ticks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ticks.is_empty()
    }

    /// Duration from tick 0 through the last recorded tick, in seconds.
    pub fn duration(&self) -> f64 {
        self.ticks
            .last()
            .map_or(0.0, |&t| (t + 1) as f64 * self.tick_resolution)
    }

    /// Number of ticks spanned by `seconds`, which must be a whole number
    /// of ticks.
    pub fn seconds_to_ticks(&self, seconds: f64) -> Result<u64> {
        let ticks = seconds / self.tick_resolution;
        let rounded = ticks.round();
        if !ticks.is_finite() || ticks < 0.0 || (ticks - rounded).abs() > 1e-6 * rounded.max(1.0) {
            return Err(Error::Binning(format!(
                "{seconds} s is not a whole multiple of the {} s tick",
                self.tick_resolution
            )));
        }
        Ok(rounded as u64)
    }
}

/// Reads a timestamp stream in the given layout.
pub fn parse_timestamps<R: Read>(input: R, format: TimestampFormat, tick_resolution: f64) -> Result<PhotonRecord> {
    let ticks = match format {
        TimestampFormat::Text => parse_text(input)?,
        TimestampFormat::Binary => parse_binary(input)?,
    };
    PhotonRecord::new(ticks, tick_resolution)
}

fn parse_text<R: Read>(input: R) -> Result<Vec<u64>> {
    let mut ticks = Vec::new();
    for (i, line) in BufReader::new(input).lines().enumerate() {
        let line = line?;
        let s = line.trim();
        if s.is_empty() {
            continue;
        }
        let v = s.parse::<u64>().map_err(|e| Error::Parse {
            location: format!("line {}", i + 1),
            message: format!("{s:?}: {e}"),
        })?;
        ticks.push(v);
    }
    Ok(ticks)
}

fn parse_binary<R: Read>(mut input: R) -> Result<Vec<u64>> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    if bytes.len() % 8 != 0 {
        return Err(Error::Parse {
            location: format!("byte {}", bytes.len() - bytes.len() % 8),
            message: format!("truncated record: {} trailing bytes", bytes.len() % 8),
        });
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| u64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect())
}

pub fn write_timestamps<W: Write>(mut out: W, ticks: &[u64], format: TimestampFormat) -> Result<()> {
    match format {
        TimestampFormat::Text => {
            for t in ticks {
                writeln!(out, "{t}")?;
            }
        }
        TimestampFormat::Binary => {
            for t in ticks {
                out.write_all(&t.to_le_bytes())?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

/// Interval of a record to bin, in seconds from tick 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeSpan {
    pub start: f64,
    pub duration: f64,
}

/// Counts per bin of width `bin_width` seconds. Bins are half-open,
/// `[start + k W, start + (k + 1) W)`, and a trailing partial bin is dropped.
/// Without a span the record is binned from tick 0 through its last tick.
pub fn count_bins(record: &PhotonRecord, bin_width: f64, span: Option<TimeSpan>) -> Result<Vec<u32>> {
    if !(bin_width > 0.0) {
        return Err(Error::Binning(format!("bin width must be positive, got {bin_width}")));
    }
    let w = record.seconds_to_ticks(bin_width)?;
    if w == 0 {
        return Err(Error::Binning("bin width is shorter than one tick".into()));
    }
    let (start, end) = match span {
        Some(s) => {
            if !(s.start >= 0.0 && s.duration > 0.0) {
                return Err(Error::Binning(format!(
                    "span [{} s, +{} s) lies outside the record",
                    s.start, s.duration
                )));
            }
            let start = record.seconds_to_ticks(s.start)?;
            let len = (s.duration / record.tick_resolution()).round() as u64;
            (start, start + len)
        }
        None => (0, record.ticks().last().map_or(0, |&t| t + 1)),
    };
    let n_bins = ((end - start) / w) as usize;
    let mut counts = vec![0u32; n_bins];
    let limit = start + n_bins as u64 * w;
    let first = record.ticks().partition_point(|&t| t < start);
    for &t in &record.ticks()[first..] {
        if t >= limit {
            break;
        }
        counts[((t - start) / w) as usize] += 1;
    }
    Ok(counts)
}

/// [`count_bins`] wrapped as an observation sequence; at least one complete
/// bin is required.
pub fn bin_counts(record: &PhotonRecord, bin_width: f64, span: Option<TimeSpan>) -> Result<ObservationSequence> {
    let counts = count_bins(record, bin_width, span)?;
    if counts.is_empty() {
        return Err(Error::Binning("no complete bin in the requested span".into()));
    }
    ObservationSequence::new(counts, bin_width)
}

/// Sums adjacent groups of `factor` counts, dropping a trailing partial group.
pub fn rebin_counts(counts: &[u32], factor: usize) -> Result<Vec<u32>> {
    if factor == 0 {
        return Err(Error::Binning("rebin factor must be at least 1".into()));
    }
    Ok(counts.chunks_exact(factor).map(|c| c.iter().sum()).collect())
}

pub fn rebin(obs: &ObservationSequence, factor: usize) -> Result<ObservationSequence> {
    let counts = rebin_counts(obs.counts(), factor)?;
    if counts.is_empty() {
        return Err(Error::Binning(format!(
            "rebinning {} bins by {factor} leaves no complete bin",
            obs.len()
        )));
    }
    ObservationSequence::new(counts, obs.bin_width() * factor as f64)
}

pub fn write_counts_csv<W: Write>(out: W, counts: &[u32]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["bin_index", "count"])?;
    for (i, c) in counts.iter().enumerate() {
        w.write_record([i.to_string(), c.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a `bin_index,count` CSV. Bin indices must run 0, 1, 2, ...
pub fn read_counts_csv<R: Read>(input: R) -> Result<Vec<u32>> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers = r.headers()?.clone();
    if headers.len() != 2 || &headers[0] != "bin_index" || &headers[1] != "count" {
        return Err(Error::Parse {
            location: "line 1".into(),
            message: format!("expected header bin_index,count, found {headers:?}"),
        });
    }
    let mut counts = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let loc = || format!("line {}", i + 2);
        let idx: usize = rec[0].parse().map_err(|e| Error::Parse {
            location: loc(),
            message: format!("bin_index {:?}: {e}", &rec[0]),
        })?;
        if idx != i {
            return Err(Error::Parse {
                location: loc(),
                message: format!("expected bin_index {i}, found {idx}"),
            });
        }
        let c: u32 = rec[1].parse().map_err(|e| Error::Parse {
            location: loc(),
            message: format!("count {:?}: {e}", &rec[1]),
        })?;
        counts.push(c);
    }
    Ok(counts)
}
