//! Activity-type prediction from exercise dynamics and heart-rate summaries.
//!
//! Four feature sets are supported:
//!
//! | model | columns |
//! |-------|---------|
//! | 1 | distance, duration |
//! | 2 | MHR, AHR |
//! | 3 | distance, duration, pace, velocity, metricD |
//! | 4 | distance, duration, pace, velocity, metricD, MHR, AHR |
//!
//! The target is the activity code (running 1, skiing 2, walking 3) regressed
//! as a real number.

pub mod artifact;
pub mod evaluate;
pub mod linear;
pub mod mlp;
pub mod rprop;

use std::io::Read;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DATASET_HEADER: [&str; 8] = [
    "activity",
    "distance_m",
    "duration_s",
    "hr_rest",
    "hr_min",
    "hr_max",
    "hr_avg",
    "hr_rest_after",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActivityType {
    Running = 1,
    Skiing = 2,
    Walking = 3,
}

impl ActivityType {
    pub const ALL: [ActivityType; 3] = [
        ActivityType::Running,
        ActivityType::Skiing,
        ActivityType::Walking,
    ];

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Result<Self> {
        match code {
            1 => Ok(ActivityType::Running),
            2 => Ok(ActivityType::Skiing),
            3 => Ok(ActivityType::Walking),
            other => Err(Error::Schema(format!(
                "activity code {other} is not one of 1, 2, 3"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ActivityType::Running => "running",
            ActivityType::Skiing => "skiing",
            ActivityType::Walking => "walking",
        }
    }
}

impl std::str::FromStr for ActivityType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "running" => Ok(ActivityType::Running),
            "skiing" => Ok(ActivityType::Skiing),
            "walking" => Ok(ActivityType::Walking),
            code => code
                .parse::<u8>()
                .map_err(|_| Error::Schema(format!("unknown activity '{code}'")))
                .and_then(Self::from_code),
        }
    }
}

/// One exercise. Heart-rate fields are in bpm and optional: only models 2
/// and 4 read MHR and AHR.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExerciseRecord {
    pub activity: ActivityType,
    pub distance_m: f64,
    pub duration_s: f64,
    pub hr_rest: Option<f64>,
    pub hr_min: Option<f64>,
    pub hr_max: Option<f64>,
    pub hr_avg: Option<f64>,
    pub hr_rest_after: Option<f64>,
}

impl ExerciseRecord {
    pub fn validate(&self) -> Result<()> {
        if !(self.distance_m > 0.0) {
            return Err(Error::NonPositive {
                what: "distance",
                value: self.distance_m,
            });
        }
        if !(self.duration_s > 0.0) {
            return Err(Error::NonPositive {
                what: "duration",
                value: self.duration_s,
            });
        }
        if let (Some(lo), Some(avg), Some(hi)) = (self.hr_min, self.hr_avg, self.hr_max) {
            if !(lo <= avg && avg <= hi) {
                return Err(Error::Schema(format!(
                    "heart rates violate min <= avg <= max: {lo}, {avg}, {hi}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DynamicFeatures {
    /// Minutes per kilometer.
    pub pace: f64,
    /// Meters per minute.
    pub velocity: f64,
    /// Pace squared.
    pub metric_d: f64,
}

pub fn dynamic_features(distance_m: f64, duration_s: f64) -> Result<DynamicFeatures> {
    if !(distance_m > 0.0) {
        return Err(Error::NonPositive {
            what: "distance",
            value: distance_m,
        });
    }
    if !(duration_s > 0.0) {
        return Err(Error::NonPositive {
            what: "duration",
            value: duration_s,
        });
    }
    let minutes = duration_s / 60.0;
    let pace = minutes / (distance_m / 1000.0);
    Ok(DynamicFeatures {
        pace,
        velocity: distance_m / minutes,
        metric_d: pace * pace,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HeartDerivedFeatures {
    pub working_range: f64,
    pub reserve: f64,
    pub recovery: f64,
}

pub fn heart_derived(
    hr_rest: f64,
    mhr: f64,
    min_hr: f64,
    hr_rest_after: f64,
) -> Result<HeartDerivedFeatures> {
    for (what, v) in [
        ("resting rate", hr_rest),
        ("maximal rate", mhr),
        ("minimal rate", min_hr),
        ("post-exercise rate", hr_rest_after),
    ] {
        if !(v > 0.0) {
            return Err(Error::NonPositive { what, value: v });
        }
    }
    if min_hr > mhr {
        return Err(Error::InvalidConfig(format!(
            "minimal rate {min_hr} exceeds maximal rate {mhr}"
        )));
    }
    Ok(HeartDerivedFeatures {
        working_range: mhr - min_hr,
        reserve: mhr - hr_rest,
        recovery: mhr - hr_rest_after,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct ModelId(u8);

impl ModelId {
    pub fn new(id: u8) -> Result<Self> {
        if (1..=4).contains(&id) {
            Ok(Self(id))
        } else {
            Err(Error::InvalidConfig(format!(
                "model id must be 1..=4, got {id}"
            )))
        }
    }

    pub fn get(self) -> u8 {
        self.0
    }

    pub fn columns(self) -> &'static [&'static str] {
        match self.0 {
            1 => &["distance", "duration"],
            2 => &["mhr", "ahr"],
            3 => &["distance", "duration", "pace", "velocity", "metric_d"],
            _ => &[
                "distance", "duration", "pace", "velocity", "metric_d", "mhr", "ahr",
            ],
        }
    }

    fn features(self, r: &ExerciseRecord, row: usize) -> Result<Vec<f64>> {
        let hr = |v: Option<f64>, name: &str| {
            v.ok_or_else(|| {
                Error::Schema(format!(
                    "record {row} lacks {name}, required by model {}",
                    self.0
                ))
            })
        };
        let dynamic = || dynamic_features(r.distance_m, r.duration_s);
        Ok(match self.0 {
            1 => vec![r.distance_m, r.duration_s],
            2 => vec![hr(r.hr_max, "hr_max")?, hr(r.hr_avg, "hr_avg")?],
            3 => {
                let d = dynamic()?;
                vec![r.distance_m, r.duration_s, d.pace, d.velocity, d.metric_d]
            }
            _ => {
                let d = dynamic()?;
                vec![
                    r.distance_m,
                    r.duration_s,
                    d.pace,
                    d.velocity,
                    d.metric_d,
                    hr(r.hr_max, "hr_max")?,
                    hr(r.hr_avg, "hr_avg")?,
                ]
            }
        })
    }
}

impl TryFrom<u8> for ModelId {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        Self::new(v)
    }
}

impl From<ModelId> for u8 {
    fn from(id: ModelId) -> u8 {
        id.0
    }
}

/// Per-column z-score parameters. Constant columns keep `std = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardizer {
    pub fn fit(rows: &[Vec<f64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let n = rows.len() as f64;
        let mut mean = vec![0.0; cols];
        let mut std = vec![0.0; cols];
        for j in 0..cols {
            mean[j] = rows.iter().map(|r| r[j]).sum::<f64>() / n;
            let var = rows.iter().map(|r| (r[j] - mean[j]).powi(2)).sum::<f64>() / n;
            std[j] = if var > 0.0 { var.sqrt() } else { 1.0 };
        }
        Self { mean, std }
    }

    pub fn identity(cols: usize) -> Self {
        Self {
            mean: vec![0.0; cols],
            std: vec![1.0; cols],
        }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(x.iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(v, (m, s))| (v - m) / s)
            .collect())
    }
}

/// Design matrix (raw features, one row per record) and targets.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub model_id: ModelId,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub targets: Vec<f64>,
    pub standardizer: Standardizer,
    /// Indices of columns with zero variance. Kept in the design.
    pub constant_columns: Vec<usize>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.columns.len()
    }

    /// Rows mapped through the dataset's own standardizer.
    pub fn standardized_rows(&self) -> Vec<Vec<f64>> {
        self.rows
            .iter()
            .map(|r| self.standardizer.apply(r).expect("row width"))
            .collect()
    }
}

pub fn build_dataset(records: &[ExerciseRecord], model_id: ModelId) -> Result<Dataset> {
    if records.is_empty() {
        return Err(Error::EmptyInput);
    }
    if records.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: records.len(),
        });
    }
    let mut rows = Vec::with_capacity(records.len());
    let mut targets = Vec::with_capacity(records.len());
    for (i, r) in records.iter().enumerate() {
        r.validate()?;
        rows.push(model_id.features(r, i + 1)?);
        targets.push(f64::from(r.activity.code()));
    }
    let cols = model_id.columns().len();
    let constant_columns = (0..cols)
        .filter(|&j| rows.iter().all(|r| r[j] == rows[0][j]))
        .collect();
    let standardizer = Standardizer::fit(&rows);
    Ok(Dataset {
        model_id,
        columns: model_id.columns().iter().map(|s| s.to_string()).collect(),
        rows,
        targets,
        standardizer,
        constant_columns,
    })
}

fn optional(field: &str) -> std::result::Result<Option<f64>, String> {
    if field.is_empty() {
        Ok(None)
    } else {
        field
            .parse::<f64>()
            .map(Some)
            .map_err(|_| format!("'{field}' is not a number"))
    }
}

/// Reads the exercise table. The header must list exactly [`DATASET_HEADER`].
pub fn parse_exercises<R: Read>(reader: R) -> Result<Vec<ExerciseRecord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = rdr.headers()?.clone();
    if header.iter().ne(DATASET_HEADER.iter().copied()) {
        return Err(Error::Schema(format!(
            "exercise header must be '{}', found '{}'",
            DATASET_HEADER.join(","),
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let bad = |message: String| Error::Parse { line, message };
        let activity: ActivityType = rec[0].parse().map_err(|e: Error| bad(e.to_string()))?;
        let required = |i: usize| -> Result<f64> {
            rec[i].parse::<f64>().map_err(|_| {
                bad(format!(
                    "{} '{}' is not a number",
                    DATASET_HEADER[i], &rec[i]
                ))
            })
        };
        let opt = |i: usize| optional(&rec[i]).map_err(bad);
        let record = ExerciseRecord {
            activity,
            distance_m: required(1)?,
            duration_s: required(2)?,
            hr_rest: opt(3)?,
            hr_min: opt(4)?,
            hr_max: opt(5)?,
            hr_avg: opt(6)?,
            hr_rest_after: opt(7)?,
        };
        record.validate().map_err(|e| bad(e.to_string()))?;
        out.push(record);
    }
    if out.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(out)
}

pub fn write_exercises<W: std::io::Write>(records: &[ExerciseRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(DATASET_HEADER)?;
    let cell = |v: Option<f64>| v.map_or_else(String::new, |v| v.to_string());
    for r in records {
        w.write_record([
            r.activity.code().to_string(),
            r.distance_m.to_string(),
            r.duration_s.to_string(),
            cell(r.hr_rest),
            cell(r.hr_min),
            cell(r.hr_max),
            cell(r.hr_avg),
            cell(r.hr_rest_after),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Seeded exercises whose activity is determined by pace and average heart
/// rate. Activities cycle running, skiing, walking.
pub fn synthetic_exercises(n: usize, seed: u64) -> Vec<ExerciseRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // (pace mean, sd, bounds), (AHR mean, sd, bounds), distance range
    type Profile = ((f64, f64, (f64, f64)), (f64, f64, (f64, f64)), (f64, f64));
    let profile = |a: ActivityType| -> Profile {
        match a {
            ActivityType::Running => (
                (5.0, 0.35, (4.2, 6.0)),
                (162.0, 4.0, (152.0, 175.0)),
                (3_000.0, 15_000.0),
            ),
            ActivityType::Skiing => (
                (7.5, 0.45, (6.5, 8.8)),
                (145.0, 4.0, (133.0, 157.0)),
                (5_000.0, 20_000.0),
            ),
            ActivityType::Walking => (
                (11.5, 0.6, (9.7, 13.5)),
                (108.0, 5.0, (90.0, 125.0)),
                (2_000.0, 8_000.0),
            ),
        }
    };
    // redraw until inside the class box, so classes never overlap
    let truncated = |rng: &mut ChaCha8Rng, (mean, sd, (lo, hi)): (f64, f64, (f64, f64))| {
        let d = Normal::new(mean, sd).unwrap();
        loop {
            let v = d.sample(rng);
            if (lo..=hi).contains(&v) {
                return v;
            }
        }
    };
    (0..n)
        .map(|i| {
            let activity = ActivityType::ALL[i % 3];
            let (pace_profile, ahr_profile, (dlo, dhi)) = profile(activity);
            let pace = truncated(&mut rng, pace_profile);
            let ahr = truncated(&mut rng, ahr_profile).round();
            let distance_m = rng.gen_range(dlo..dhi).round();
            let duration_s = (pace * distance_m / 1000.0 * 60.0).round();
            let hr_rest = rng.gen_range(50.0f64..65.0).round();
            ExerciseRecord {
                activity,
                distance_m,
                duration_s,
                hr_rest: Some(hr_rest),
                hr_min: Some(ahr - rng.gen_range(20.0f64..40.0).round()),
                hr_max: Some(ahr + rng.gen_range(10.0f64..25.0).round()),
                hr_avg: Some(ahr),
                hr_rest_after: Some(hr_rest + rng.gen_range(5.0f64..15.0).round()),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn dynamic_feature_examples() {
        let f = dynamic_features(5000.0, 1500.0).unwrap();
        assert_eq!((f.pace, f.velocity, f.metric_d), (5.0, 200.0, 25.0));
        let g = dynamic_features(1000.0, 60.0).unwrap();
        assert_eq!((g.pace, g.velocity, g.metric_d), (1.0, 1000.0, 1.0));
        assert!(dynamic_features(0.0, 10.0).is_err());
        assert!(dynamic_features(10.0, -1.0).is_err());
    }

    #[test]
    fn heart_feature_examples() {
        let h = heart_derived(55.0, 180.0, 60.0, 65.0).unwrap();
        assert_eq!(
            (h.working_range, h.reserve, h.recovery),
            (120.0, 125.0, 115.0)
        );
        let z = heart_derived(70.0, 70.0, 70.0, 70.0).unwrap();
        assert_eq!((z.working_range, z.reserve, z.recovery), (0.0, 0.0, 0.0));
        assert!(heart_derived(55.0, 180.0, 190.0, 65.0).is_err());
    }

    #[test]
    fn dataset_columns_follow_model() {
        let records = synthetic_exercises(9, 1);
        assert_eq!(
            build_dataset(&records, ModelId::new(1).unwrap())
                .unwrap()
                .dim(),
            2
        );
        assert_eq!(
            build_dataset(&records, ModelId::new(2).unwrap())
                .unwrap()
                .columns,
            vec!["mhr", "ahr"]
        );
        assert_eq!(
            build_dataset(&records, ModelId::new(3).unwrap())
                .unwrap()
                .dim(),
            5
        );
        let d4 = build_dataset(&records, ModelId::new(4).unwrap()).unwrap();
        assert_eq!(
            d4.columns,
            vec!["distance", "duration", "pace", "velocity", "metric_d", "mhr", "ahr"]
        );
        let walking = records
            .iter()
            .position(|r| r.activity == ActivityType::Walking)
            .unwrap();
        assert_eq!(d4.targets[walking], 3.0);
        assert!(ModelId::new(5).is_err());
        assert!(matches!(
            build_dataset(&[], ModelId::new(1).unwrap()),
            Err(Error::EmptyInput)
        ));
    }

    #[test]
    fn constant_column_reported_and_kept() {
        let mut records = synthetic_exercises(6, 2);
        records.iter_mut().for_each(|r| r.hr_max = Some(200.0));
        let d = build_dataset(&records, ModelId::new(2).unwrap()).unwrap();
        assert_eq!(d.constant_columns, vec![0]);
        assert_eq!(d.standardizer.std[0], 1.0);
        assert_eq!(d.dim(), 2);
    }

    #[test]
    fn missing_heart_rate_is_schema_error() {
        let mut records = synthetic_exercises(3, 3);
        records[1].hr_avg = None;
        assert!(build_dataset(&records, ModelId::new(1).unwrap()).is_ok());
        assert!(matches!(
            build_dataset(&records, ModelId::new(4).unwrap()),
            Err(Error::Schema(_))
        ));
    }

    #[test]
    fn exercise_table_roundtrip_and_schema() {
        let records = synthetic_exercises(12, 4);
        let mut buf = Vec::new();
        write_exercises(&records, &mut buf).unwrap();
        assert_eq!(parse_exercises(buf.as_slice()).unwrap(), records);

        let bad = "activity,distance_m,duration_s\n1,5000,1500\n";
        assert!(matches!(
            parse_exercises(bad.as_bytes()),
            Err(Error::Schema(_))
        ));
        let named = format!(
            "{}\nwalking,3000,2000,60,80,120,100,\n",
            DATASET_HEADER.join(",")
        );
        let parsed = parse_exercises(named.as_bytes()).unwrap();
        assert_eq!(parsed[0].activity, ActivityType::Walking);
        assert_eq!(parsed[0].hr_rest_after, None);
    }

    #[test]
    fn fixture_is_separable_in_pace_and_ahr() {
        let records = synthetic_exercises(60, 11);
        for r in &records {
            let pace = dynamic_features(r.distance_m, r.duration_s).unwrap().pace;
            let ahr = r.hr_avg.unwrap();
            let guess = if pace < 6.25 {
                1
            } else if pace < 9.25 {
                2
            } else {
                3
            };
            assert_eq!(ahr < 130.0, r.activity == ActivityType::Walking);
            assert_eq!(guess, r.activity.code(), "pace {pace} ahr {ahr}");
        }
    }

    proptest! {
        #[test]
        fn pace_times_velocity_is_1000(d in 1.0f64..50_000.0, t in 1.0f64..50_000.0) {
            let f = dynamic_features(d, t).unwrap();
            prop_assert!((f.pace * f.velocity - 1000.0).abs() < 1e-9);
        }
    }
}
