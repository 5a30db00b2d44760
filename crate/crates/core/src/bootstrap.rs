//! Resampling clouds on the Pearson plane.
//!
//! Trial `i` draws its indices from a ChaCha8 generator seeded with the
//! configured seed and switched to stream `i`. Trials share no generator
//! state, so the cloud does not depend on how trials are spread over threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::moments::{batch_moments, MIN_SAMPLES};
use crate::pearson::{to_pearson, PearsonPoint};

pub const DEFAULT_TRIALS: usize = 1000;
pub const DEFAULT_SEED: u64 = 20180503;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BootstrapConfig {
    pub trials: usize,
    /// Resample size; `None` means the input size.
    pub subsample: Option<usize>,
    pub seed: u64,
    /// Worker threads. Results are identical for every value.
    pub workers: usize,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self {
            trials: DEFAULT_TRIALS,
            subsample: None,
            seed: DEFAULT_SEED,
            workers: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CloudPoint {
    pub trial: usize,
    pub beta1: f64,
    pub beta2: f64,
}

impl CloudPoint {
    pub fn point(&self) -> PearsonPoint {
        PearsonPoint::new(self.beta1, self.beta2)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BootstrapCloud {
    pub seed: u64,
    pub trials: usize,
    pub subsample: usize,
    pub points: Vec<CloudPoint>,
    pub degenerate_count: usize,
    pub centroid: PearsonPoint,
    /// Population covariance of `(beta1, beta2)`.
    pub dispersion: [[f64; 2]; 2],
}

impl BootstrapCloud {
    pub fn pearson_points(&self) -> Vec<PearsonPoint> {
        self.points.iter().map(CloudPoint::point).collect()
    }

    pub fn summary(&self) -> Result<CloudSummary> {
        cloud_summary(&self.pearson_points())
    }
}

fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

fn run_trial(
    samples: &[f64],
    m: usize,
    seed: u64,
    trial: usize,
    scratch: &mut Vec<f64>,
) -> Option<PearsonPoint> {
    let mut rng = trial_rng(seed, trial);
    let n = samples.len() as u64;
    scratch.clear();
    scratch.extend((0..m).map(|_| samples[rng.gen_range(0..n) as usize]));
    batch_moments(scratch)
        .ok()
        .and_then(|s| to_pearson(&s).ok())
}

fn run_range(
    samples: &[f64],
    m: usize,
    seed: u64,
    range: std::ops::Range<usize>,
) -> Vec<Option<PearsonPoint>> {
    let mut scratch = Vec::with_capacity(m);
    range
        .map(|trial| run_trial(samples, m, seed, trial, &mut scratch))
        .collect()
}

pub fn bootstrap_cloud(samples: &[f64], config: &BootstrapConfig) -> Result<BootstrapCloud> {
    if samples.len() < MIN_SAMPLES {
        return Err(Error::InsufficientData {
            needed: MIN_SAMPLES,
            got: samples.len(),
        });
    }
    if let Some(&bad) = samples.iter().find(|x| !x.is_finite()) {
        return Err(Error::NonFinite(bad));
    }
    if config.trials == 0 {
        return Err(Error::InvalidConfig(
            "bootstrap needs at least one trial".into(),
        ));
    }
    let m = config.subsample.unwrap_or(samples.len());
    if m < MIN_SAMPLES {
        return Err(Error::InvalidConfig(format!(
            "subsample size must be at least {MIN_SAMPLES}, got {m}"
        )));
    }

    let workers = config.workers.clamp(1, config.trials);
    let results: Vec<Option<PearsonPoint>> = if workers == 1 {
        run_range(samples, m, config.seed, 0..config.trials)
    } else {
        let chunk = config.trials.div_ceil(workers);
        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..workers)
                .map(|w| {
                    let range =
                        (w * chunk).min(config.trials)..((w + 1) * chunk).min(config.trials);
                    scope.spawn(move || run_range(samples, m, config.seed, range))
                })
                .collect();
            handles
                .into_iter()
                .flat_map(|h| h.join().expect("bootstrap worker panicked"))
                .collect()
        })
    };

    let points: Vec<CloudPoint> = results
        .iter()
        .enumerate()
        .filter_map(|(trial, p)| {
            p.map(|p| CloudPoint {
                trial,
                beta1: p.beta1,
                beta2: p.beta2,
            })
        })
        .collect();
    let degenerate_count = config.trials - points.len();
    if points.is_empty() {
        return Err(Error::AllTrialsDegenerate {
            trials: config.trials,
        });
    }

    let k = points.len() as f64;
    let c1 = points.iter().map(|p| p.beta1).sum::<f64>() / k;
    let c2 = points.iter().map(|p| p.beta2).sum::<f64>() / k;
    let mut cov = [[0.0; 2]; 2];
    for p in &points {
        let (d1, d2) = (p.beta1 - c1, p.beta2 - c2);
        cov[0][0] += d1 * d1;
        cov[0][1] += d1 * d2;
        cov[1][1] += d2 * d2;
    }
    cov[0][0] /= k;
    cov[0][1] /= k;
    cov[1][1] /= k;
    cov[1][0] = cov[0][1];

    Ok(BootstrapCloud {
        seed: config.seed,
        trials: config.trials,
        subsample: m,
        points,
        degenerate_count,
        centroid: PearsonPoint::new(c1, c2),
        dispersion: cov,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CloudSummary {
    pub points: usize,
    pub centroid: PearsonPoint,
    pub std_beta1: f64,
    pub std_beta2: f64,
    /// Lower corner of the axis-aligned 2.5%..97.5% quantile box.
    pub q_low: PearsonPoint,
    pub q_high: PearsonPoint,
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

fn axis_stats(mut values: Vec<f64>) -> (f64, f64, f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n).sqrt();
    values.sort_by(f64::total_cmp);
    (
        mean,
        std,
        quantile(&values, 0.025),
        quantile(&values, 0.975),
    )
}

pub fn cloud_summary(points: &[PearsonPoint]) -> Result<CloudSummary> {
    if points.is_empty() {
        return Err(Error::EmptyInput);
    }
    let (m1, s1, lo1, hi1) = axis_stats(points.iter().map(|p| p.beta1).collect());
    let (m2, s2, lo2, hi2) = axis_stats(points.iter().map(|p| p.beta2).collect());
    Ok(CloudSummary {
        points: points.len(),
        centroid: PearsonPoint::new(m1, m2),
        std_beta1: s1,
        std_beta2: s2,
        q_low: PearsonPoint::new(lo1, lo2),
        q_high: PearsonPoint::new(hi1, hi2),
    })
}
