//! Full-batch resilient backpropagation with conditional weight backtracking
//! (the iRPROP+ variant).

use serde::{Deserialize, Serialize};

use super::mlp::MlpModel;
use super::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainingConfig {
    /// Initial per-weight step.
    pub initial_step: f64,
    /// Training stops once every gradient component is below this.
    pub grad_threshold: f64,
    pub max_epochs: usize,
    /// Seeds weight initialization.
    pub seed: u64,
    pub step_min: f64,
    pub step_max: f64,
    pub increase: f64,
    pub decrease: f64,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            initial_step: 0.001,
            grad_threshold: 0.001,
            max_epochs: 100_000,
            seed: crate::bootstrap::DEFAULT_SEED,
            step_min: 1e-6,
            step_max: 50.0,
            increase: 1.2,
            decrease: 0.5,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.initial_step > 0.0
            && self.grad_threshold >= 0.0
            && self.step_min > 0.0
            && self.step_min <= self.step_max
            && self.increase > 1.0
            && self.decrease > 0.0
            && self.decrease < 1.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!(
                "invalid training configuration {self:?}"
            )))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainedMlp {
    pub model: MlpModel,
    /// Batch SSE before each update; the last entry is the returned model's.
    pub history: Vec<f64>,
    /// Weight updates performed.
    pub epochs: usize,
    pub converged: bool,
    /// Stopped by the epoch limit.
    pub exhausted: bool,
}

impl TrainedMlp {
    pub fn final_sse(&self) -> f64 {
        *self
            .history
            .last()
            .expect("history holds at least the initial error")
    }
}

/// Trains `model` on the dataset's standardized rows. The dataset's
/// standardizer is stored in the returned model.
pub fn train_rprop(model: MlpModel, data: &Dataset, config: &TrainingConfig) -> Result<TrainedMlp> {
    config.validate()?;
    let mut model = model.with_standardizer(data.standardizer.clone())?;
    let xs = data.standardized_rows();
    let ys = &data.targets;

    let mut params = model.params();
    let np = params.len();
    let mut step = vec![config.initial_step; np];
    let mut prev_grad = vec![0.0; np];
    let mut prev_delta = vec![0.0; np];
    let mut prev_error = f64::INFINITY;
    let mut history = Vec::new();
    let mut epochs = 0;

    loop {
        let (error, mut grad) = model.error_and_gradient(&xs, ys)?;
        if !error.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFiniteTraining { epoch: epochs });
        }
        history.push(error);
        if grad.iter().all(|g| g.abs() < config.grad_threshold) {
            return Ok(TrainedMlp {
                model,
                history,
                epochs,
                converged: true,
                exhausted: false,
            });
        }
        if epochs == config.max_epochs {
            return Ok(TrainedMlp {
                model,
                history,
                epochs,
                converged: false,
                exhausted: true,
            });
        }

        for k in 0..np {
            let agreement = prev_grad[k] * grad[k];
            if agreement > 0.0 {
                step[k] = (step[k] * config.increase).min(config.step_max);
                prev_delta[k] = -grad[k].signum() * step[k];
                params[k] += prev_delta[k];
            } else if agreement < 0.0 {
                step[k] = (step[k] * config.decrease).max(config.step_min);
                if error > prev_error {
                    params[k] -= prev_delta[k];
                }
                prev_delta[k] = 0.0;
                grad[k] = 0.0;
            } else {
                prev_delta[k] = -grad[k].signum() * step[k];
                params[k] += prev_delta[k];
            }
        }
        prev_grad = grad;
        prev_error = error;
        model.set_params(&params)?;
        epochs += 1;
    }
}

/// Initializes a network of the given hidden sizes from `config.seed` and
/// trains it.
pub fn train_network(
    data: &Dataset,
    hidden: &[usize],
    config: &TrainingConfig,
) -> Result<TrainedMlp> {
    let sizes: Vec<usize> = std::iter::once(data.dim())
        .chain(hidden.iter().copied())
        .chain([1])
        .collect();
    train_rprop(MlpModel::init(&sizes, config.seed)?, data, config)
}
