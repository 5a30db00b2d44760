//! Scoring trained models against labelled data.

use serde::Serialize;

use super::linear::LinearModel;
use super::mlp::MlpModel;
use super::{ActivityType, Dataset};
use crate::error::Result;

/// Anything that maps a raw feature row to a predicted activity code.
pub trait Predictor {
    fn predict_row(&self, raw: &[f64]) -> Result<f64>;
}

impl Predictor for LinearModel {
    fn predict_row(&self, raw: &[f64]) -> Result<f64> {
        self.predict(raw)
    }
}

impl Predictor for MlpModel {
    fn predict_row(&self, raw: &[f64]) -> Result<f64> {
        self.predict(raw)
    }
}

/// Nearest activity code, clamped to the valid range.
pub fn round_to_class(prediction: f64) -> ActivityType {
    let code = if prediction.is_nan() {
        1.0
    } else {
        prediction.round().clamp(1.0, 3.0)
    };
    ActivityType::from_code(code as u8).expect("clamped code")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluationReport {
    pub predictions: Vec<f64>,
    pub classes: Vec<ActivityType>,
    pub sse: f64,
    pub accuracy: f64,
}

pub fn evaluate_predictions(predictions: Vec<f64>, targets: &[f64]) -> EvaluationReport {
    let classes: Vec<ActivityType> = predictions.iter().map(|&p| round_to_class(p)).collect();
    let sse = predictions
        .iter()
        .zip(targets)
        .map(|(p, t)| (p - t) * (p - t))
        .sum();
    let correct = classes
        .iter()
        .zip(targets)
        .filter(|(c, &t)| f64::from(c.code()) == t)
        .count();
    let accuracy = if targets.is_empty() {
        0.0
    } else {
        correct as f64 / targets.len() as f64
    };
    EvaluationReport {
        predictions,
        classes,
        sse,
        accuracy,
    }
}

pub fn evaluate<P: Predictor + ?Sized>(model: &P, data: &Dataset) -> Result<EvaluationReport> {
    let predictions = data
        .rows
        .iter()
        .map(|r| model.predict_row(r))
        .collect::<Result<Vec<_>>>()?;
    Ok(evaluate_predictions(predictions, &data.targets))
}
