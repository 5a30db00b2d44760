//! JSON model artifacts shared by `train` and `predict`.

use serde::{Deserialize, Serialize};

use super::evaluate::Predictor;
use super::linear::{fit_linear, LinearModel};
use super::mlp::{MlpModel, DEEP_HIDDEN, SHALLOW_HIDDEN};
use super::rprop::{train_network, TrainingConfig};
use super::{Dataset, ModelId, Standardizer};
use crate::error::{Error, Result};

pub const ARTIFACT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Learner {
    /// Ordinary least squares.
    Lm,
    /// One hidden layer of six units.
    Nn,
    /// Hidden layers of 12, 8, 6 and 3 units.
    Dl,
}

impl Learner {
    pub const ALL: [Learner; 3] = [Learner::Lm, Learner::Nn, Learner::Dl];

    pub fn as_str(self) -> &'static str {
        match self {
            Learner::Lm => "lm",
            Learner::Nn => "nn",
            Learner::Dl => "dl",
        }
    }

    pub fn hidden(self) -> Option<&'static [usize]> {
        match self {
            Learner::Lm => None,
            Learner::Nn => Some(&SHALLOW_HIDDEN),
            Learner::Dl => Some(&DEEP_HIDDEN),
        }
    }
}

impl std::str::FromStr for Learner {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lm" => Ok(Learner::Lm),
            "nn" => Ok(Learner::Nn),
            "dl" => Ok(Learner::Dl),
            other => Err(Error::InvalidConfig(format!(
                "unknown learner '{other}' (expected lm, nn or dl)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ArtifactBody {
    Linear {
        intercept: f64,
        coefficients: Vec<f64>,
        residual_std: f64,
    },
    Network {
        sizes: Vec<usize>,
        params: Vec<f64>,
        standardizer: Standardizer,
        training: TrainingConfig,
        epochs: usize,
        converged: bool,
        exhausted: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelArtifact {
    pub version: u32,
    pub learner: Learner,
    pub model_id: ModelId,
    pub columns: Vec<String>,
    pub training_sse: f64,
    pub body: ArtifactBody,
}

impl ModelArtifact {
    pub fn from_linear(data: &Dataset, model: &LinearModel) -> Self {
        Self {
            version: ARTIFACT_VERSION,
            learner: Learner::Lm,
            model_id: data.model_id,
            columns: data.columns.clone(),
            training_sse: model.sse(),
            body: ArtifactBody::Linear {
                intercept: model.intercept,
                coefficients: model.coefficients.clone(),
                residual_std: model.residual_std,
            },
        }
    }

    pub fn input_dim(&self) -> usize {
        self.columns.len()
    }

    /// Rebuilds the network, checking that sizes and parameters agree.
    pub fn network(&self) -> Result<Option<MlpModel>> {
        match &self.body {
            ArtifactBody::Linear { .. } => Ok(None),
            ArtifactBody::Network {
                sizes,
                params,
                standardizer,
                ..
            } => {
                if sizes.first() != Some(&self.input_dim()) {
                    return Err(Error::Schema(format!(
                        "network input size {:?} does not match {} columns",
                        sizes.first(),
                        self.input_dim()
                    )));
                }
                let mut m = MlpModel::zeros(sizes)?.with_standardizer(standardizer.clone())?;
                m.set_params(params)?;
                Ok(Some(m))
            }
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let a: Self = serde_json::from_str(text)?;
        if a.version != ARTIFACT_VERSION {
            return Err(Error::Schema(format!(
                "unsupported artifact version {}",
                a.version
            )));
        }
        if a.columns.len() != a.model_id.columns().len() {
            return Err(Error::Schema(format!(
                "model {} expects {} columns, artifact lists {}",
                a.model_id.get(),
                a.model_id.columns().len(),
                a.columns.len()
            )));
        }
        if let ArtifactBody::Linear { coefficients, .. } = &a.body {
            if coefficients.len() != a.columns.len() {
                return Err(Error::Schema(
                    "coefficient count does not match columns".into(),
                ));
            }
        }
        a.network()?;
        Ok(a)
    }
}

impl Predictor for ModelArtifact {
    fn predict_row(&self, raw: &[f64]) -> Result<f64> {
        if raw.len() != self.input_dim() {
            return Err(Error::Schema(format!(
                "artifact expects {} features, got {}",
                self.input_dim(),
                raw.len()
            )));
        }
        match &self.body {
            ArtifactBody::Linear {
                intercept,
                coefficients,
                ..
            } => Ok(intercept
                + raw
                    .iter()
                    .zip(coefficients)
                    .map(|(x, b)| x * b)
                    .sum::<f64>()),
            ArtifactBody::Network { .. } => self.network()?.expect("network body").predict(raw),
        }
    }
}

/// Fits one learner on a dataset and packages the result.
pub fn fit_learner(
    data: &Dataset,
    learner: Learner,
    config: &TrainingConfig,
) -> Result<ModelArtifact> {
    match learner.hidden() {
        None => Ok(ModelArtifact::from_linear(
            data,
            &fit_linear(&data.rows, &data.targets)?,
        )),
        Some(hidden) => {
            let out = train_network(data, hidden, config)?;
            Ok(ModelArtifact {
                version: ARTIFACT_VERSION,
                learner,
                model_id: data.model_id,
                columns: data.columns.clone(),
                training_sse: out.final_sse(),
                body: ArtifactBody::Network {
                    sizes: out.model.sizes.clone(),
                    params: out.model.params(),
                    standardizer: out.model.standardizer.clone(),
                    training: *config,
                    epochs: out.epochs,
                    converged: out.converged,
                    exhausted: out.exhausted,
                },
            })
        }
    }
}
