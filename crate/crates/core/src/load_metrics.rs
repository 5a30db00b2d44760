//! Load and fatigue indicators derived from Pearson-plane trajectories.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::PhaseMarks;
use crate::moments::{TimedSummary, Trajectory};
use crate::pearson::{metric1, metric2, to_pearson};

/// Scale factor turning a median absolute deviation into a normal-consistent
/// standard deviation.
const MAD_TO_SIGMA: f64 = 1.4826;
pub const DEFAULT_RECOVERY_DELTA: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricEntry {
    pub t: f64,
    pub metric1: f64,
    pub metric2: f64,
    pub beta1: f64,
    pub beta2: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct MetricSeries {
    pub entries: Vec<MetricEntry>,
}

impl MetricSeries {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn column(&self, which: MetricKind) -> Vec<f64> {
        self.entries.iter().map(|e| which.of(e)).collect()
    }

    pub fn times(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.t).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    Metric1,
    Metric2,
    Beta1,
    Beta2,
}

impl MetricKind {
    pub fn of(self, e: &MetricEntry) -> f64 {
        match self {
            MetricKind::Metric1 => e.metric1,
            MetricKind::Metric2 => e.metric2,
            MetricKind::Beta1 => e.beta1,
            MetricKind::Beta2 => e.beta2,
        }
    }
}

pub fn metric_series_of(points: &[TimedSummary]) -> Result<MetricSeries> {
    if points.is_empty() {
        return Err(Error::EmptyInput);
    }
    let entries = points
        .iter()
        .filter_map(|p| {
            let q = to_pearson(&p.summary).ok()?;
            Some(MetricEntry {
                t: p.t,
                metric1: metric1(q),
                metric2: metric2(q),
                beta1: q.beta1,
                beta2: q.beta2,
            })
        })
        .collect();
    Ok(MetricSeries { entries })
}

pub fn metric_series(trajectory: &Trajectory) -> Result<MetricSeries> {
    metric_series_of(&trajectory.points)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlopeEstimate {
    pub t0: f64,
    pub t1: f64,
    pub n: usize,
    /// Metric units per second.
    pub slope: f64,
    pub intercept: f64,
    pub residual_std: f64,
}

/// Least-squares line of one metric against time over `[t0, t1]`.
pub fn slope(series: &MetricSeries, t0: f64, t1: f64, which: MetricKind) -> Result<SlopeEstimate> {
    if !(t0 < t1) {
        return Err(Error::InvalidConfig(format!(
            "slope interval [{t0}, {t1}] is empty"
        )));
    }
    let pts: Vec<(f64, f64)> = series
        .entries
        .iter()
        .filter(|e| e.t >= t0 && e.t <= t1)
        .map(|e| (e.t, which.of(e)))
        .collect();
    if pts.len() < 3 {
        return Err(Error::InsufficientData {
            needed: 3,
            got: pts.len(),
        });
    }
    let n = pts.len() as f64;
    let tm = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let ym = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let stt: f64 = pts.iter().map(|p| (p.0 - tm) * (p.0 - tm)).sum();
    let sty: f64 = pts.iter().map(|p| (p.0 - tm) * (p.1 - ym)).sum();
    if stt == 0.0 {
        return Err(Error::Degenerate);
    }
    let b = sty / stt;
    let a = ym - b * tm;
    let ssr: f64 = pts.iter().map(|p| (p.1 - a - b * p.0).powi(2)).sum();
    Ok(SlopeEstimate {
        t0,
        t1,
        n: pts.len(),
        slope: b,
        intercept: a,
        residual_std: (ssr / (n - 2.0)).sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PeakSource {
    WindowMetric1,
    WindowKurtosis,
    WindowSkew2,
}

impl PeakSource {
    fn kind(self) -> MetricKind {
        match self {
            PeakSource::WindowMetric1 => MetricKind::Metric1,
            PeakSource::WindowKurtosis => MetricKind::Beta2,
            PeakSource::WindowSkew2 => MetricKind::Beta1,
        }
    }
}

/// Peak detector settings.
///
/// A sample is a peak when it is the largest value within `half_width`
/// samples on either side and rises above the median of the `2 * half_width`
/// preceding samples by more than `k` robust standard deviations of the whole
/// series (`1.4826 * MAD`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeakConfig {
    pub half_width: usize,
    pub k: f64,
    pub source: PeakSource,
}

impl Default for PeakConfig {
    fn default() -> Self {
        Self {
            half_width: 25,
            k: 8.0,
            source: PeakSource::WindowMetric1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Peak,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegimeEvent {
    pub t: f64,
    /// Position in the metric series.
    pub index: usize,
    pub kind: EventKind,
    /// Height above the trailing median baseline.
    pub magnitude: f64,
    pub source: PeakSource,
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

fn mad(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    let m = median(&mut v);
    let mut dev: Vec<f64> = values.iter().map(|x| (x - m).abs()).collect();
    median(&mut dev)
}

pub fn detect_regime_changes(
    series: &MetricSeries,
    config: &PeakConfig,
) -> Result<Vec<RegimeEvent>> {
    let h = config.half_width;
    if h == 0 || !(config.k >= 0.0) {
        return Err(Error::InvalidConfig(
            "peak half-width must be positive and k non-negative".into(),
        ));
    }
    let values = series.column(config.source.kind());
    let n = values.len();
    if n < 2 * h + 1 {
        return Err(Error::InsufficientData {
            needed: 2 * h + 1,
            got: n,
        });
    }
    let threshold = config.k * MAD_TO_SIGMA * mad(&values);

    let mut raw: Vec<(usize, f64)> = Vec::new();
    let mut baseline = Vec::with_capacity(2 * h);
    for i in h..n {
        let x = values[i];
        let neighborhood = &values[i - h..(i + h + 1).min(n)];
        if neighborhood.iter().any(|&v| v > x) {
            continue;
        }
        baseline.clear();
        baseline.extend_from_slice(&values[i.saturating_sub(2 * h)..i]);
        let rise = x - median(&mut baseline);
        if rise > 0.0 && rise > threshold {
            raw.push((i, rise));
        }
    }

    // Single-linkage merge of detections closer than one half-width.
    let mut merged: Vec<(usize, f64)> = Vec::new();
    let mut last_index: Option<usize> = None;
    for (i, rise) in raw {
        match (last_index, merged.last_mut()) {
            (Some(prev), Some(best)) if i - prev <= h => {
                if rise > best.1 {
                    *best = (i, rise);
                }
            }
            _ => merged.push((i, rise)),
        }
        last_index = Some(i);
    }

    Ok(merged
        .into_iter()
        .map(|(index, magnitude)| RegimeEvent {
            t: series.entries[index].t,
            index,
            kind: EventKind::Peak,
            magnitude,
            source: config.source,
        })
        .collect())
}

/// Seconds after exercise end until metric1 settles within `delta` of its
/// pre-exercise median for good. `None` if it never settles.
pub fn recovery_delay(series: &MetricSeries, marks: PhaseMarks, delta: f64) -> Result<Option<f64>> {
    if !(delta > 0.0) {
        return Err(Error::NonPositive {
            what: "recovery tolerance",
            value: delta,
        });
    }
    let mut before: Vec<f64> = series
        .entries
        .iter()
        .filter(|e| e.t < marks.start_s)
        .map(|e| e.metric1)
        .collect();
    if before.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    let baseline = median(&mut before);

    let after: Vec<&MetricEntry> = series
        .entries
        .iter()
        .filter(|e| e.t >= marks.end_s)
        .collect();
    let mut settled_from = None;
    for (j, e) in after.iter().enumerate().rev() {
        if (e.metric1 - baseline).abs() <= delta {
            settled_from = Some(j);
        } else {
            break;
        }
    }
    Ok(settled_from.map(|j| after[j].t - marks.end_s))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseSlopes {
    /// Metric1 slope over the exercise phase.
    pub accommodation: Option<SlopeEstimate>,
    /// Metric1 slope from exercise end to the end of the series.
    pub recovery: Option<SlopeEstimate>,
}

pub fn phase_slopes(series: &MetricSeries, marks: PhaseMarks) -> PhaseSlopes {
    let last = series.entries.last().map_or(marks.end_s, |e| e.t);
    PhaseSlopes {
        accommodation: slope(series, marks.start_s, marks.end_s, MetricKind::Metric1).ok(),
        recovery: slope(series, marks.end_s, last, MetricKind::Metric1).ok(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::MomentSummary;
    use crate::pearson::PearsonPoint;
    use proptest::prelude::*;

    fn from_metric1(ts: &[f64], m1: &[f64]) -> MetricSeries {
        MetricSeries {
            entries: ts
                .iter()
                .zip(m1)
                .map(|(&t, &m)| MetricEntry {
                    t,
                    metric1: m,
                    metric2: 0.0,
                    beta1: 0.0,
                    beta2: 3.0 - m,
                })
                .collect(),
        }
    }

    fn timed(t: f64, skewness: f64, kurtosis: f64) -> TimedSummary {
        TimedSummary {
            t,
            summary: MomentSummary {
                n: 100,
                mean: 800.0,
                std: 50.0,
                skewness,
                kurtosis,
            },
        }
    }

    #[test]
    fn metric_series_examples() {
        let traj: Vec<_> = (0..5).map(|i| timed(i as f64, 0.0, 3.0)).collect();
        let s = metric_series_of(&traj).unwrap();
        assert!(s
            .entries
            .iter()
            .all(|e| e.metric1 == 0.0 && (e.metric2 - 1.2).abs() < 1e-12));
        assert_eq!(s.times(), vec![0.0, 1.0, 2.0, 3.0, 4.0]);

        let one = metric_series_of(&[timed(7.5, 0.0, 1.7)]).unwrap();
        assert!((one.entries[0].metric1 - 1.3).abs() < 1e-12);
        assert!((one.entries[0].metric2 - 0.1).abs() < 1e-12);
        assert!(matches!(metric_series_of(&[]), Err(Error::EmptyInput)));
    }

    #[test]
    fn metric_series_composes_with_pearson() {
        let p = timed(1.0, -0.7, 4.4);
        let e = metric_series_of(&[p]).unwrap().entries[0];
        let q = PearsonPoint::new(0.49, 4.4);
        assert!((e.beta1 - q.beta1).abs() < 1e-15);
        assert_eq!(e.metric1, metric1(q));
        assert_eq!(e.metric2, metric2(q));
    }

    #[test]
    fn slope_of_exact_line() {
        let ts: Vec<f64> = (0..=10).map(f64::from).collect();
        let s = from_metric1(&ts, &ts.iter().map(|t| 2.0 * t).collect::<Vec<_>>());
        let est = slope(&s, 0.0, 10.0, MetricKind::Metric1).unwrap();
        assert!((est.slope - 2.0).abs() < 1e-12);
        assert!(est.intercept.abs() < 1e-12);
        assert!(est.residual_std < 1e-12);
        assert_eq!(est.n, 11);

        let flat = from_metric1(&ts, &[0.5; 11]);
        assert_eq!(
            slope(&flat, 0.0, 10.0, MetricKind::Metric1).unwrap().slope,
            0.0
        );
        assert!(matches!(
            slope(&s, 0.0, 1.5, MetricKind::Metric1),
            Err(Error::InsufficientData { .. })
        ));
        assert!(slope(&s, 5.0, 5.0, MetricKind::Metric1).is_err());
    }

    #[test]
    fn flat_series_has_no_events() {
        let ts: Vec<f64> = (0..200).map(f64::from).collect();
        let flat = from_metric1(&ts, &[0.4; 200]);
        let cfg = PeakConfig::default();
        assert!(detect_regime_changes(&flat, &cfg).unwrap().is_empty());
        let doubled = PeakConfig {
            k: cfg.k * 2.0,
            ..cfg
        };
        assert!(detect_regime_changes(&flat, &doubled).unwrap().is_empty());
        assert!(matches!(
            detect_regime_changes(&from_metric1(&ts[..50], &[0.4; 50]), &cfg),
            Err(Error::InsufficientData { .. })
        ));
    }

    #[test]
    fn isolated_spike_is_found_once() {
        let ts: Vec<f64> = (0..300).map(f64::from).collect();
        let mut m: Vec<f64> = (0..300)
            .map(|i| 0.3 + 0.05 * ((i * 7919) % 13) as f64 / 13.0)
            .collect();
        for (k, v) in m[150..160].iter_mut().enumerate() {
            *v += 5.0 - (k as f64 - 4.0).abs() * 0.3;
        }
        let events = detect_regime_changes(&from_metric1(&ts, &m), &PeakConfig::default()).unwrap();
        assert_eq!(events.len(), 1);
        assert_eq!(events[0].index, 154);
        assert!(events[0].magnitude > 4.0);
    }

    #[test]
    fn recovery_delay_examples() {
        let marks = PhaseMarks {
            start_s: 10.0,
            end_s: 20.0,
        };
        let ts: Vec<f64> = (0..40).map(f64::from).collect();
        let at_base = from_metric1(&ts, &[0.2; 40]);
        assert_eq!(recovery_delay(&at_base, marks, 0.1).unwrap(), Some(0.0));

        let never: Vec<f64> = ts
            .iter()
            .map(|&t| if t < 10.0 { 0.2 } else { 2.0 })
            .collect();
        assert_eq!(
            recovery_delay(&from_metric1(&ts, &never), marks, 0.1).unwrap(),
            None
        );

        let late = PhaseMarks {
            start_s: -5.0,
            end_s: 20.0,
        };
        assert!(recovery_delay(&at_base, late, 0.1).is_err());
    }

    #[test]
    fn exponential_return_matches_analytic_crossing() {
        let (tau, peak, delta, base) = (30.0, 2.0, 0.1, 0.25);
        let marks = PhaseMarks {
            start_s: 60.0,
            end_s: 200.0,
        };
        let ts: Vec<f64> = (0..6000).map(|i| i as f64 * 0.1).collect();
        let m1: Vec<f64> = ts
            .iter()
            .map(|&t| {
                if t < marks.end_s {
                    base + if t >= marks.start_s { peak } else { 0.0 }
                } else {
                    base + peak * (-(t - marks.end_s) / tau).exp()
                }
            })
            .collect();
        let delay = recovery_delay(&from_metric1(&ts, &m1), marks, delta)
            .unwrap()
            .unwrap();
        let expected = tau * (peak / delta).ln();
        assert!(
            (delay - expected).abs() <= 0.1 * expected,
            "{delay} vs {expected}"
        );
    }

    proptest! {
        #[test]
        fn slope_reverses_with_time(ys in prop::collection::vec(-5.0f64..5.0, 3..60)) {
            let ts: Vec<f64> = (0..ys.len()).map(|i| i as f64).collect();
            let fwd = from_metric1(&ts, &ys);
            let rev_ys: Vec<f64> = ys.iter().rev().copied().collect();
            let rev = from_metric1(&ts, &rev_ys);
            let end = (ys.len() - 1) as f64;
            let a = slope(&fwd, 0.0, end, MetricKind::Metric1).unwrap().slope;
            let b = slope(&rev, 0.0, end, MetricKind::Metric1).unwrap().slope;
            prop_assert!((a + b).abs() <= 1e-9 * a.abs().max(1.0));
        }

        #[test]
        fn detection_ignores_constant_offset(
            m in prop::collection::vec(0.0f64..4.0, 60..200),
            offset in -8i32..8,
        ) {
            // Values and offset on a dyadic grid keep the shift exact.
            let m: Vec<f64> = m.iter().map(|v| (v * 64.0).round() / 64.0).collect();
            let ts: Vec<f64> = (0..m.len()).map(|i| i as f64).collect();
            let shifted: Vec<f64> = m.iter().map(|v| v + offset as f64 * 0.5).collect();
            let cfg = PeakConfig { k: 2.0, ..PeakConfig::default() };
            let a = detect_regime_changes(&from_metric1(&ts, &m), &cfg).unwrap();
            let b = detect_regime_changes(&from_metric1(&ts, &shifted), &cfg).unwrap();
            prop_assert_eq!(a.iter().map(|e| e.index).collect::<Vec<_>>(), b.iter().map(|e| e.index).collect::<Vec<_>>());
        }
    }
}
