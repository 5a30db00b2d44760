//! Seeded synthetic heartbeat recordings built from Gaussian segments.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{HeartSeries, PhaseMarks, MAX_PLAUSIBLE_HB_MS, MIN_PLAUSIBLE_HB_MS};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub beats: usize,
    pub mean_ms: f64,
    pub std_ms: f64,
    /// Change of the mean per beat, in ms.
    #[serde(default)]
    pub trend_ms: f64,
}

impl Segment {
    pub const fn new(beats: usize, mean_ms: f64, std_ms: f64) -> Self {
        Self {
            beats,
            mean_ms,
            std_ms,
            trend_ms: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub segments: Vec<Segment>,
    pub seed: u64,
}

impl SynthSpec {
    /// Rest, exercise, rest: 1000 beats each around 800 ms with standard
    /// deviations 80, 15 and 80 ms.
    pub fn rest_exercise_rest(seed: u64) -> Self {
        Self {
            segments: vec![
                Segment::new(1000, 800.0, 80.0),
                Segment::new(1000, 800.0, 15.0),
                Segment::new(1000, 800.0, 80.0),
            ],
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.segments.is_empty() {
            return Err(Error::InvalidConfig(
                "synthetic spec has no segments".into(),
            ));
        }
        for (i, s) in self.segments.iter().enumerate() {
            if s.beats == 0 {
                return Err(Error::InvalidConfig(format!("segment {i} has no beats")));
            }
            if !(s.std_ms >= 0.0) || !s.std_ms.is_finite() || !s.trend_ms.is_finite() {
                return Err(Error::InvalidConfig(format!(
                    "segment {i} has invalid std or trend"
                )));
            }
            if !(MIN_PLAUSIBLE_HB_MS..=MAX_PLAUSIBLE_HB_MS).contains(&s.mean_ms) {
                return Err(Error::InvalidConfig(format!(
                    "segment {i} mean {} ms outside [{MIN_PLAUSIBLE_HB_MS}, {MAX_PLAUSIBLE_HB_MS}]",
                    s.mean_ms
                )));
            }
        }
        Ok(())
    }

    pub fn total_beats(&self) -> usize {
        self.segments.iter().map(|s| s.beats).sum()
    }

    /// Beat indices where each segment after the first begins.
    pub fn boundaries(&self) -> Vec<usize> {
        self.segments
            .iter()
            .scan(0, |acc, s| {
                *acc += s.beats;
                Some(*acc)
            })
            .take(self.segments.len() - 1)
            .collect()
    }
}

/// Intervals clamped to the plausible range; timestamps are cumulative sums.
pub fn generate_intervals(spec: &SynthSpec) -> Result<Vec<f64>> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut out = Vec::with_capacity(spec.total_beats());
    for s in &spec.segments {
        let noise = Normal::new(0.0, s.std_ms).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        for i in 0..s.beats {
            let hb = s.mean_ms + s.trend_ms * i as f64 + noise.sample(&mut rng);
            out.push(hb.clamp(MIN_PLAUSIBLE_HB_MS, MAX_PLAUSIBLE_HB_MS));
        }
    }
    Ok(out)
}

pub fn generate(spec: &SynthSpec) -> Result<HeartSeries> {
    HeartSeries::from_intervals(&generate_intervals(spec)?)
}

/// Phase markers placing the exercise on the second segment of a
/// three-segment recording.
pub fn marks_for(spec: &SynthSpec, series: &HeartSeries) -> Option<PhaseMarks> {
    let b = spec.boundaries();
    if b.len() != 2 {
        return None;
    }
    let t = series.times();
    // boundary beats end at t[b - 1]
    Some(PhaseMarks {
        start_s: t[b[0] - 1],
        end_s: t[b[1] - 1],
    })
}
