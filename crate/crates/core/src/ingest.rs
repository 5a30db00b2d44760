//! Heartbeat recording ingestion.
//!
//! A recording is a delimiter-separated table with a required header row. The
//! value column is either `hb_ms` (beat-to-beat interval in milliseconds) or
//! `hr_bpm` (integer heart rate). An optional `t_s` column carries timestamps in
//! seconds; when it is absent timestamps are the cumulative sum of intervals.
//! Lines starting with `#` are comments.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lower bound of the physiological plausibility window (240 bpm).
pub const MIN_PLAUSIBLE_HB_MS: f64 = 250.0;
/// Upper bound of the physiological plausibility window (20 bpm).
pub const MAX_PLAUSIBLE_HB_MS: f64 = 3000.0;

/// Heart rate from a beat interval: `round(60000 / hb_ms)`, ties rounded up.
pub fn hb_to_hr(hb_ms: f64) -> Result<u32> {
    if !hb_ms.is_finite() {
        return Err(Error::NonFinite(hb_ms));
    }
    if hb_ms <= 0.0 {
        return Err(Error::NonPositive {
            what: "heartbeat interval",
            value: hb_ms,
        });
    }
    let bpm = (60_000.0 / hb_ms + 0.5).floor();
    if bpm > u32::MAX as f64 {
        return Err(Error::InvalidConfig(format!(
            "interval {hb_ms} ms is too short"
        )));
    }
    Ok(bpm as u32)
}

/// Beat interval implied by an integer heart rate. Lossy: the rate was rounded.
pub fn hr_to_hb(hr_bpm: u32) -> Result<f64> {
    if hr_bpm == 0 {
        return Err(Error::NonPositive {
            what: "heart rate",
            value: 0.0,
        });
    }
    Ok(60_000.0 / hr_bpm as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeartSample {
    pub t: f64,
    pub hb_ms: f64,
    pub hr_bpm: u32,
}

/// Where the interval values came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Precision {
    /// Measured intervals.
    Interval,
    /// Intervals reconstructed from rounded heart rates.
    RateDerived,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    RestBefore,
    Exercise,
    RestAfter,
}

impl Phase {
    pub const ALL: [Phase; 3] = [Phase::RestBefore, Phase::Exercise, Phase::RestAfter];

    pub fn as_str(self) -> &'static str {
        match self {
            Phase::RestBefore => "rest_before",
            Phase::Exercise => "exercise",
            Phase::RestAfter => "rest_after",
        }
    }
}

impl std::str::FromStr for Phase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rest_before" => Ok(Phase::RestBefore),
            "exercise" => Ok(Phase::Exercise),
            "rest_after" => Ok(Phase::RestAfter),
            other => Err(Error::InvalidConfig(format!("unknown phase '{other}'"))),
        }
    }
}

/// Exercise start `S` and end `E`, in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseMarks {
    pub start_s: f64,
    pub end_s: f64,
}

impl PhaseMarks {
    /// Samples before `S` rest, samples in `[S, E)` exercise, the rest recover.
    pub fn phase_of(&self, t: f64) -> Phase {
        if t < self.start_s {
            Phase::RestBefore
        } else if t < self.end_s {
            Phase::Exercise
        } else {
            Phase::RestAfter
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeartSeries {
    samples: Vec<HeartSample>,
    marks: Option<PhaseMarks>,
    precision: Precision,
}

impl HeartSeries {
    /// Builds a series, rejecting empty input and decreasing timestamps.
    pub fn new(samples: Vec<HeartSample>, precision: Precision) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptyInput);
        }
        for (i, pair) in samples.windows(2).enumerate() {
            if pair[1].t < pair[0].t {
                return Err(Error::NonMonotoneTimestamp {
                    line: i + 2,
                    prev: pair[0].t,
                    t: pair[1].t,
                });
            }
        }
        Ok(Self {
            samples,
            marks: None,
            precision,
        })
    }

    /// Series from raw intervals with a per-beat clock.
    pub fn from_intervals(hb_ms: &[f64]) -> Result<Self> {
        let mut t = 0.0;
        let mut samples = Vec::with_capacity(hb_ms.len());
        for &hb in hb_ms {
            let hr_bpm = hb_to_hr(hb)?;
            t += hb / 1000.0;
            samples.push(HeartSample {
                t,
                hb_ms: hb,
                hr_bpm,
            });
        }
        Self::new(samples, Precision::Interval)
    }

    pub fn samples(&self) -> &[HeartSample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn precision(&self) -> Precision {
        self.precision
    }

    pub fn is_low_precision(&self) -> bool {
        self.precision == Precision::RateDerived
    }

    pub fn marks(&self) -> Option<PhaseMarks> {
        self.marks
    }

    pub fn intervals(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.hb_ms).collect()
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    /// First and last timestamps.
    pub fn span(&self) -> (f64, f64) {
        (self.samples[0].t, self.samples[self.samples.len() - 1].t)
    }

    /// Sets exercise start and end. Both must lie inside the recording span.
    pub fn mark_phases(mut self, start_s: f64, end_s: f64) -> Result<Self> {
        if !(start_s.is_finite() && end_s.is_finite()) {
            return Err(Error::InvalidMarkers("markers must be finite".into()));
        }
        if start_s >= end_s {
            return Err(Error::InvalidMarkers(format!(
                "start {start_s} is not before end {end_s}"
            )));
        }
        let (first, last) = self.span();
        if start_s < first || end_s > last {
            return Err(Error::InvalidMarkers(format!(
                "markers [{start_s}, {end_s}] outside recording span [{first}, {last}]"
            )));
        }
        self.marks = Some(PhaseMarks { start_s, end_s });
        Ok(self)
    }

    /// Phase of every sample, or `None` when no marks are set.
    pub fn phases(&self) -> Option<Vec<Phase>> {
        let marks = self.marks?;
        Some(self.samples.iter().map(|s| marks.phase_of(s.t)).collect())
    }

    /// Seconds spent in each phase, in `Phase::ALL` order.
    pub fn phase_durations(&self) -> Option<[f64; 3]> {
        let marks = self.marks?;
        let (first, last) = self.span();
        Some([
            marks.start_s - first,
            marks.end_s - marks.start_s,
            last - marks.end_s,
        ])
    }

    /// Samples belonging to one phase, as a new unmarked series.
    pub fn phase_slice(&self, phase: Phase) -> Result<Self> {
        let marks = self
            .marks
            .ok_or_else(|| Error::InvalidMarkers("series has no phase marks".into()))?;
        let samples: Vec<_> = self
            .samples
            .iter()
            .copied()
            .filter(|s| marks.phase_of(s.t) == phase)
            .collect();
        Self::new(samples, self.precision)
    }

    /// Drops samples outside the plausibility window. Marks are kept if still in span.
    pub fn drop_implausible(&self) -> Result<Self> {
        let samples: Vec<_> = self
            .samples
            .iter()
            .copied()
            .filter(|s| (MIN_PLAUSIBLE_HB_MS..=MAX_PLAUSIBLE_HB_MS).contains(&s.hb_ms))
            .collect();
        let out = Self::new(samples, self.precision)?;
        match self.marks {
            Some(m) => out.mark_phases(m.start_s, m.end_s),
            None => Ok(out),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ValueColumn {
    /// Whichever of `hb_ms` / `hr_bpm` the header names.
    #[default]
    Auto,
    IntervalMs,
    RateBpm,
}

#[derive(Debug, Clone, Copy)]
pub struct SchemaConfig {
    pub delimiter: u8,
    pub value: ValueColumn,
}

impl Default for SchemaConfig {
    fn default() -> Self {
        Self {
            delimiter: b',',
            value: ValueColumn::Auto,
        }
    }
}

/// Parses a recording. Decreasing timestamps are an error; equal timestamps are
/// kept and surface in [`validate_series`].
pub fn parse_recording<R: Read>(reader: R, config: &SchemaConfig) -> Result<HeartSeries> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(config.delimiter)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .has_headers(true)
        .from_reader(reader);

    let headers = rdr.headers()?.clone();
    let find = |name: &str| headers.iter().position(|h| h == name);
    let t_col = find("t_s");
    let hb_col = find("hb_ms");
    let hr_col = find("hr_bpm");

    let (value_col, precision) = match (config.value, hb_col, hr_col) {
        (ValueColumn::Auto, Some(_), Some(_)) => {
            return Err(Error::Schema("header names both hb_ms and hr_bpm".into()))
        }
        (ValueColumn::Auto | ValueColumn::IntervalMs, Some(c), _) => (c, Precision::Interval),
        (ValueColumn::Auto | ValueColumn::RateBpm, _, Some(c)) => (c, Precision::RateDerived),
        (ValueColumn::IntervalMs, None, _) => {
            return Err(Error::Schema("header has no hb_ms column".into()))
        }
        (ValueColumn::RateBpm, _, None) => {
            return Err(Error::Schema("header has no hr_bpm column".into()))
        }
        (ValueColumn::Auto, None, None) => {
            return Err(Error::Schema("header must name hb_ms or hr_bpm".into()))
        }
    };

    let mut samples: Vec<HeartSample> = Vec::new();
    let mut clock = 0.0;
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let field = |col: usize| -> Result<&str> {
            record
                .get(col)
                .filter(|f| !f.is_empty())
                .ok_or_else(|| Error::Parse {
                    line,
                    message: format!("missing column {}", col + 1),
                })
        };
        let number = |col: usize| -> Result<f64> {
            let raw = field(col)?;
            raw.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Parse {
                    line,
                    message: format!("'{raw}' is not a finite number"),
                })
        };

        let (hb_ms, hr_bpm) = match precision {
            Precision::Interval => {
                let hb = number(value_col)?;
                let hr = hb_to_hr(hb).map_err(|e| Error::Parse {
                    line,
                    message: e.to_string(),
                })?;
                (hb, hr)
            }
            Precision::RateDerived => {
                let raw = field(value_col)?;
                let hr: u32 = raw.parse().map_err(|_| Error::Parse {
                    line,
                    message: format!("'{raw}' is not a positive integer rate"),
                })?;
                let hb = hr_to_hb(hr).map_err(|e| Error::Parse {
                    line,
                    message: e.to_string(),
                })?;
                (hb, hr)
            }
        };

        let t = match t_col {
            Some(c) => {
                let t = number(c)?;
                if t < 0.0 {
                    return Err(Error::Parse {
                        line,
                        message: format!("negative timestamp {t}"),
                    });
                }
                t
            }
            None => {
                clock += hb_ms / 1000.0;
                clock
            }
        };
        if let Some(prev) = samples.last() {
            if t < prev.t {
                return Err(Error::NonMonotoneTimestamp {
                    line,
                    prev: prev.t,
                    t,
                });
            }
        }
        samples.push(HeartSample { t, hb_ms, hr_bpm });
    }

    HeartSeries::new(samples, precision)
}

/// Writes a recording in the format [`parse_recording`] reads back exactly.
pub fn write_recording<W: Write>(series: &HeartSeries, mut out: W) -> Result<()> {
    match series.precision {
        Precision::Interval => {
            writeln!(out, "t_s,hb_ms")?;
            for s in &series.samples {
                writeln!(out, "{},{}", s.t, s.hb_ms)?;
            }
        }
        Precision::RateDerived => {
            writeln!(out, "t_s,hr_bpm")?;
            for s in &series.samples {
                writeln!(out, "{},{}", s.t, s.hr_bpm)?;
            }
        }
    }
    Ok(())
}

/// Reads `start end` phase markers from a sidecar file body.
pub fn parse_marks(text: &str) -> Result<(f64, f64)> {
    let nums: Vec<f64> = text
        .lines()
        .filter(|l| !l.trim_start().starts_with('#'))
        .flat_map(|l| l.split(|c: char| c == ',' || c.is_whitespace()))
        .filter(|tok| !tok.is_empty())
        .map(|tok| {
            tok.parse::<f64>()
                .map_err(|_| Error::InvalidMarkers(format!("'{tok}' is not a number")))
        })
        .collect::<Result<_>>()?;
    match nums.as_slice() {
        [s, e] => Ok((*s, *e)),
        _ => Err(Error::InvalidMarkers(format!(
            "expected two numbers, found {}",
            nums.len()
        ))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RangeViolation {
    pub index: usize,
    pub hb_ms: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct GapStats {
    pub count: usize,
    pub min_s: f64,
    pub mean_s: f64,
    pub max_s: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct ValidationReport {
    pub range_violations: Vec<RangeViolation>,
    /// Index of each sample whose timestamp equals its predecessor's.
    pub duplicate_timestamps: Vec<usize>,
    pub gaps: GapStats,
    pub low_precision: bool,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.range_violations.is_empty() && self.duplicate_timestamps.is_empty()
    }
}

pub fn validate_series(series: &HeartSeries) -> ValidationReport {
    let range_violations = series
        .samples
        .iter()
        .enumerate()
        .filter(|(_, s)| !(MIN_PLAUSIBLE_HB_MS..=MAX_PLAUSIBLE_HB_MS).contains(&s.hb_ms))
        .map(|(index, s)| RangeViolation {
            index,
            hb_ms: s.hb_ms,
        })
        .collect();

    let mut duplicate_timestamps = Vec::new();
    let mut gaps = GapStats {
        min_s: f64::INFINITY,
        ..GapStats::default()
    };
    let mut total = 0.0;
    for (i, pair) in series.samples.windows(2).enumerate() {
        let gap = pair[1].t - pair[0].t;
        if gap == 0.0 {
            duplicate_timestamps.push(i + 1);
        }
        gaps.count += 1;
        gaps.min_s = gaps.min_s.min(gap);
        gaps.max_s = gaps.max_s.max(gap);
        total += gap;
    }
    if gaps.count == 0 {
        gaps.min_s = 0.0;
    } else {
        gaps.mean_s = total / gaps.count as f64;
    }

    ValidationReport {
        range_violations,
        duplicate_timestamps,
        gaps,
        low_precision: series.is_low_precision(),
    }
}
