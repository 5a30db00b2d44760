//! Streaming statistical ensembles.
//!
//! Two ensemble shapes are tracked: everything accumulated since the start of
//! the recording, and the most recent `w` samples. Both report population
//! moments (divide by `n`) and non-excess kurtosis, so a normal sample sits at
//! kurtosis 3.

use std::collections::VecDeque;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ingest::HeartSeries;

/// Smallest ensemble for which a summary is reported.
pub const MIN_SAMPLES: usize = 4;
/// Default sliding-window length in samples.
pub const DEFAULT_WINDOW: usize = 100;
/// Pushes between full recomputations of the window power sums.
pub const WINDOW_REBUILD_INTERVAL: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentSummary {
    pub n: usize,
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
    /// `m3 / m2^(3/2)`.
    pub skewness: f64,
    /// `m4 / m2^2`, non-excess.
    pub kurtosis: f64,
}

impl MomentSummary {
    pub fn excess_kurtosis(&self) -> f64 {
        self.kurtosis - 3.0
    }
}

/// Variance this small relative to the data scale is treated as zero.
fn is_degenerate(mean: f64, variance: f64) -> bool {
    let scale = 16.0 * f64::EPSILON * mean.abs().max(f64::MIN_POSITIVE);
    !(variance > scale * scale)
}

/// Builds a summary from central moments `m_k = (1/n) Σ (x - mean)^k`.
fn summarize(n: usize, mean: f64, m2: f64, m3: f64, m4: f64) -> Result<MomentSummary> {
    if n < MIN_SAMPLES {
        return Err(Error::InsufficientData {
            needed: MIN_SAMPLES,
            got: n,
        });
    }
    if is_degenerate(mean, m2) {
        return Err(Error::Degenerate);
    }
    Ok(MomentSummary {
        n,
        mean,
        std: m2.sqrt(),
        skewness: m3 / (m2 * m2.sqrt()),
        kurtosis: m4 / (m2 * m2),
    })
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Two-pass moments of a complete sample. Reference path for the streaming
/// accumulators.
pub fn batch_moments(samples: &[f64]) -> Result<MomentSummary> {
    if let Some(&bad) = samples.iter().find(|x| !x.is_finite()) {
        return Err(Error::NonFinite(bad));
    }
    let n = samples.len();
    if n < MIN_SAMPLES {
        return Err(Error::InsufficientData {
            needed: MIN_SAMPLES,
            got: n,
        });
    }
    let nf = n as f64;
    let mut total = CompensatedSum::default();
    samples.iter().for_each(|&x| total.add(x));
    let mean = total.value() / nf;

    let (mut s2, mut s3, mut s4) = (
        CompensatedSum::default(),
        CompensatedSum::default(),
        CompensatedSum::default(),
    );
    for &x in samples {
        let d = x - mean;
        let d2 = d * d;
        s2.add(d2);
        s3.add(d2 * d);
        s4.add(d2 * d2);
    }
    summarize(n, mean, s2.value() / nf, s3.value() / nf, s4.value() / nf)
}

/// Single-pass accumulator of count, mean and central moment sums
/// `M_k = Σ (x - mean)^k` for k = 2, 3, 4.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct MomentAccumulator {
    n: u64,
    mean: f64,
    m2: f64,
    m3: f64,
    m4: f64,
}

impl MomentAccumulator {
    pub const fn new() -> Self {
        Self {
            n: 0,
            mean: 0.0,
            m2: 0.0,
            m3: 0.0,
            m4: 0.0,
        }
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Central moment sums `(M2, M3, M4)`.
    pub fn central_sums(&self) -> (f64, f64, f64) {
        (self.m2, self.m3, self.m4)
    }

    pub fn push(&mut self, x: f64) -> Result<()> {
        if !x.is_finite() {
            return Err(Error::NonFinite(x));
        }
        let n1 = self.n as f64;
        self.n += 1;
        let n = self.n as f64;
        let delta = x - self.mean;
        let delta_n = delta / n;
        let delta_n2 = delta_n * delta_n;
        let term1 = delta * delta_n * n1;
        self.m4 += term1 * delta_n2 * (n * n - 3.0 * n + 3.0) + 6.0 * delta_n2 * self.m2
            - 4.0 * delta_n * self.m3;
        self.m3 += term1 * delta_n * (n - 2.0) - 3.0 * delta_n * self.m2;
        self.m2 += term1;
        self.mean += delta_n;
        Ok(())
    }

    /// Combines two accumulators as if one had seen both streams.
    pub fn merge(&self, other: &Self) -> Self {
        if self.n == 0 {
            return *other;
        }
        if other.n == 0 {
            return *self;
        }
        let na = self.n as f64;
        let nb = other.n as f64;
        let n = na + nb;
        let delta = other.mean - self.mean;
        let delta2 = delta * delta;
        let delta3 = delta2 * delta;
        let delta4 = delta2 * delta2;

        let mean = self.mean + delta * nb / n;
        let m2 = self.m2 + other.m2 + delta2 * na * nb / n;
        let m3 = self.m3
            + other.m3
            + delta3 * na * nb * (na - nb) / (n * n)
            + 3.0 * delta * (na * other.m2 - nb * self.m2) / n;
        let m4 = self.m4
            + other.m4
            + delta4 * na * nb * (na * na - na * nb + nb * nb) / (n * n * n)
            + 6.0 * delta2 * (na * na * other.m2 + nb * nb * self.m2) / (n * n)
            + 4.0 * delta * (na * other.m3 - nb * self.m3) / n;
        Self {
            n: self.n + other.n,
            mean,
            m2,
            m3,
            m4,
        }
    }

    pub fn summary(&self) -> Result<MomentSummary> {
        let n = self.n as f64;
        summarize(
            self.n as usize,
            self.mean,
            self.m2 / n,
            self.m3 / n,
            self.m4 / n,
        )
    }
}

impl Extend<f64> for MomentAccumulator {
    /// Non-finite values are skipped.
    fn extend<I: IntoIterator<Item = f64>>(&mut self, iter: I) {
        for x in iter {
            let _ = self.push(x);
        }
    }
}

/// Moments of the last `capacity` samples.
///
/// Keeps power sums of `x - shift` with compensated summation. `shift` is reset
/// to the buffer mean on every full recomputation, which happens every
/// [`WINDOW_REBUILD_INTERVAL`] pushes or when the window mean has drifted far
/// from `shift` relative to the window spread.
#[derive(Debug, Clone)]
pub struct WindowAccumulator {
    capacity: usize,
    buffer: VecDeque<f64>,
    shift: f64,
    sums: [CompensatedSum; 4],
    since_rebuild: usize,
}

impl WindowAccumulator {
    pub fn new(capacity: usize) -> Result<Self> {
        if capacity < MIN_SAMPLES {
            return Err(Error::InvalidConfig(format!(
                "window capacity must be at least {MIN_SAMPLES}, got {capacity}"
            )));
        }
        Ok(Self {
            capacity,
            buffer: VecDeque::with_capacity(capacity + 1),
            shift: 0.0,
            sums: [CompensatedSum::default(); 4],
            since_rebuild: 0,
        })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.buffer.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buffer.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.buffer.len() == self.capacity
    }

    pub fn buffer(&self) -> &VecDeque<f64> {
        &self.buffer
    }

    fn add_powers(&mut self, x: f64, sign: f64) {
        let d = x - self.shift;
        let d2 = d * d;
        self.sums[0].add(sign * d);
        self.sums[1].add(sign * d2);
        self.sums[2].add(sign * d2 * d);
        self.sums[3].add(sign * d2 * d2);
    }

    fn rebuild(&mut self) {
        let n = self.buffer.len() as f64;
        let mut total = CompensatedSum::default();
        self.buffer.iter().for_each(|&x| total.add(x));
        self.shift = if n > 0.0 { total.value() / n } else { 0.0 };
        self.sums = [CompensatedSum::default(); 4];
        for i in 0..self.buffer.len() {
            let x = self.buffer[i];
            self.add_powers(x, 1.0);
        }
        self.since_rebuild = 0;
    }

    /// Returns the evicted sample, if any.
    pub fn push(&mut self, x: f64) -> Result<Option<f64>> {
        if !x.is_finite() {
            return Err(Error::NonFinite(x));
        }
        if self.buffer.is_empty() {
            self.shift = x;
        }
        let evicted = if self.buffer.len() == self.capacity {
            let old = self.buffer.pop_front().expect("full buffer");
            self.add_powers(old, -1.0);
            Some(old)
        } else {
            None
        };
        self.buffer.push_back(x);
        self.add_powers(x, 1.0);
        self.since_rebuild += 1;

        if self.since_rebuild >= WINDOW_REBUILD_INTERVAL {
            self.rebuild();
        } else if self.is_full() {
            let (d, m2) = self.shifted_mean_and_variance();
            if d * d > 16.0 * m2 {
                self.rebuild();
            }
        }
        Ok(evicted)
    }

    fn shifted_mean_and_variance(&self) -> (f64, f64) {
        let n = self.buffer.len() as f64;
        let d = self.sums[0].value() / n;
        (d, self.sums[1].value() / n - d * d)
    }

    pub fn summary(&self) -> Result<MomentSummary> {
        let len = self.buffer.len();
        if len < MIN_SAMPLES {
            return Err(Error::InsufficientData {
                needed: MIN_SAMPLES,
                got: len,
            });
        }
        let n = len as f64;
        let d = self.sums[0].value() / n;
        let r2 = self.sums[1].value() / n;
        let r3 = self.sums[2].value() / n;
        let r4 = self.sums[3].value() / n;
        let m2 = r2 - d * d;
        // Cancellation would dominate: recompute from the buffer.
        if !(m2 > 1e-8 * r2) {
            let (a, b) = self.buffer.as_slices();
            let mut all = Vec::with_capacity(len);
            all.extend_from_slice(a);
            all.extend_from_slice(b);
            return batch_moments(&all);
        }
        let d2 = d * d;
        let m3 = r3 - 3.0 * d * r2 + 2.0 * d2 * d;
        let m4 = r4 - 4.0 * d * r3 + 6.0 * d2 * r2 - 3.0 * d2 * d2;
        summarize(len, self.shift + d, m2, m3, m4)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimedSummary {
    /// Timestamp of the last sample in the ensemble.
    pub t: f64,
    pub summary: MomentSummary,
}

/// A skipped zero-variance ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DegeneratePoint {
    pub t: f64,
    pub n: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Trajectory {
    pub points: Vec<TimedSummary>,
    pub degenerate: Vec<DegeneratePoint>,
}

impl Trajectory {
    fn record(&mut self, t: f64, n: usize, result: Result<MomentSummary>) -> Result<()> {
        match result {
            Ok(summary) => self.points.push(TimedSummary { t, summary }),
            Err(Error::Degenerate) => self.degenerate.push(DegeneratePoint { t, n }),
            Err(Error::InsufficientData { .. }) => {}
            Err(e) => return Err(e),
        }
        Ok(())
    }
}

fn check_stride(stride: usize) -> Result<()> {
    if stride == 0 {
        return Err(Error::InvalidConfig("stride must be at least 1".into()));
    }
    Ok(())
}

/// Accumulated-from-start summaries, one per `stride` samples.
pub fn accumulated_trajectory_of(
    times: &[f64],
    values: &[f64],
    stride: usize,
) -> Result<Trajectory> {
    check_stride(stride)?;
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    if times.len() != values.len() {
        return Err(Error::DimensionMismatch {
            expected: values.len(),
            got: times.len(),
        });
    }
    let mut acc = MomentAccumulator::new();
    let mut out = Trajectory::default();
    for (i, (&t, &x)) in times.iter().zip(values).enumerate() {
        acc.push(x)?;
        if (i + 1) % stride == 0 {
            out.record(t, i + 1, acc.summary())?;
        }
    }
    Ok(out)
}

/// Sliding-window summaries: once the window holds `window` samples, one
/// summary every `stride` pushes.
pub fn window_trajectory_of(
    times: &[f64],
    values: &[f64],
    window: usize,
    stride: usize,
) -> Result<Trajectory> {
    check_stride(stride)?;
    if times.len() != values.len() {
        return Err(Error::DimensionMismatch {
            expected: values.len(),
            got: times.len(),
        });
    }
    let mut acc = WindowAccumulator::new(window)?;
    if values.len() < window {
        return Err(Error::InsufficientData {
            needed: window,
            got: values.len(),
        });
    }
    let mut out = Trajectory::default();
    for (i, (&t, &x)) in times.iter().zip(values).enumerate() {
        acc.push(x)?;
        if i + 1 >= window && (i + 1 - window).is_multiple_of(stride) {
            out.record(t, window, acc.summary())?;
        }
    }
    Ok(out)
}

pub fn accumulated_trajectory(series: &HeartSeries, stride: usize) -> Result<Trajectory> {
    accumulated_trajectory_of(&series.times(), &series.intervals(), stride)
}

pub fn window_trajectory(series: &HeartSeries, window: usize, stride: usize) -> Result<Trajectory> {
    window_trajectory_of(&series.times(), &series.intervals(), window, stride)
}
