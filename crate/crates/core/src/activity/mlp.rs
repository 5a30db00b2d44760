//! Fully connected networks with logistic hidden units and one affine output.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Standardizer;
use crate::error::{Error, Result};

pub const SHALLOW_HIDDEN: [usize; 1] = [6];
pub const DEEP_HIDDEN: [usize; 4] = [12, 8, 6, 3];
/// Initial weights are uniform on `[-INIT_RANGE, INIT_RANGE]`.
pub const INIT_RANGE: f64 = 0.5;

pub fn logistic(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// One layer. `weights` is row-major, one row per output unit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl Layer {
    fn zeros(inputs: usize, outputs: usize) -> Self {
        Self {
            inputs,
            outputs,
            weights: vec![0.0; inputs * outputs],
            biases: vec![0.0; outputs],
        }
    }

    fn param_count(&self) -> usize {
        self.weights.len() + self.biases.len()
    }

    fn affine(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.extend(
            self.weights
                .chunks_exact(self.inputs)
                .zip(&self.biases)
                .map(|(row, b)| b + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>()),
        );
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub sizes: Vec<usize>,
    pub layers: Vec<Layer>,
    /// Maps raw features to network inputs.
    pub standardizer: Standardizer,
}

fn check_sizes(sizes: &[usize]) -> Result<()> {
    if sizes.len() < 2 {
        return Err(Error::InvalidConfig(
            "a network needs an input and an output layer".into(),
        ));
    }
    if sizes.contains(&0) {
        return Err(Error::InvalidConfig(format!(
            "layer sizes must be positive, got {sizes:?}"
        )));
    }
    if sizes[sizes.len() - 1] != 1 {
        return Err(Error::InvalidConfig(
            "the output layer must have exactly one unit".into(),
        ));
    }
    Ok(())
}

impl MlpModel {
    pub fn zeros(sizes: &[usize]) -> Result<Self> {
        check_sizes(sizes)?;
        Ok(Self {
            sizes: sizes.to_vec(),
            layers: sizes.windows(2).map(|w| Layer::zeros(w[0], w[1])).collect(),
            standardizer: Standardizer::identity(sizes[0]),
        })
    }

    /// Uniform weights from a seeded generator, zero biases.
    pub fn init(sizes: &[usize], seed: u64) -> Result<Self> {
        let mut model = Self::zeros(sizes)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for layer in &mut model.layers {
            for w in &mut layer.weights {
                *w = rng.gen_range(-INIT_RANGE..=INIT_RANGE);
            }
        }
        Ok(model)
    }

    pub fn shallow_sizes(inputs: usize) -> Vec<usize> {
        std::iter::once(inputs)
            .chain(SHALLOW_HIDDEN)
            .chain([1])
            .collect()
    }

    pub fn deep_sizes(inputs: usize) -> Vec<usize> {
        std::iter::once(inputs)
            .chain(DEEP_HIDDEN)
            .chain([1])
            .collect()
    }

    pub fn with_standardizer(mut self, standardizer: Standardizer) -> Result<Self> {
        if standardizer.dim() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                got: standardizer.dim(),
            });
        }
        self.standardizer = standardizer;
        Ok(self)
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(Layer::param_count).sum()
    }

    /// Flattened parameters: per layer, weights then biases.
    pub fn params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for l in &self.layers {
            out.extend_from_slice(&l.weights);
            out.extend_from_slice(&l.biases);
        }
        out
    }

    pub fn set_params(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.param_count() {
            return Err(Error::DimensionMismatch {
                expected: self.param_count(),
                got: params.len(),
            });
        }
        let mut rest = params;
        for l in &mut self.layers {
            let (w, r) = rest.split_at(l.weights.len());
            let (b, r) = r.split_at(l.biases.len());
            l.weights.copy_from_slice(w);
            l.biases.copy_from_slice(b);
            rest = r;
        }
        Ok(())
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                got: x.len(),
            });
        }
        Ok(())
    }

    /// Output for an already standardized input.
    pub fn forward_standardized(&self, x: &[f64]) -> Result<f64> {
        self.check_input(x)?;
        let mut cur = x.to_vec();
        let mut next = Vec::new();
        let last = self.layers.len() - 1;
        for (i, l) in self.layers.iter().enumerate() {
            l.affine(&cur, &mut next);
            if i < last {
                next.iter_mut().for_each(|z| *z = logistic(*z));
            }
            std::mem::swap(&mut cur, &mut next);
        }
        Ok(cur[0])
    }

    /// Output for a raw feature vector.
    pub fn predict(&self, raw: &[f64]) -> Result<f64> {
        self.forward_standardized(&self.standardizer.apply(raw)?)
    }

    /// `sum (y_hat - y)^2` over standardized inputs.
    pub fn sse(&self, xs: &[Vec<f64>], ys: &[f64]) -> Result<f64> {
        check_batch(xs, ys)?;
        xs.iter()
            .zip(ys)
            .map(|(x, y)| self.forward_standardized(x).map(|p| (p - y) * (p - y)))
            .sum()
    }

    /// Gradient of the batch SSE with respect to [`Self::params`].
    pub fn gradient(&self, xs: &[Vec<f64>], ys: &[f64]) -> Result<Vec<f64>> {
        self.error_and_gradient(xs, ys).map(|(_, g)| g)
    }

    pub fn error_and_gradient(&self, xs: &[Vec<f64>], ys: &[f64]) -> Result<(f64, Vec<f64>)> {
        check_batch(xs, ys)?;
        let offsets: Vec<usize> = self
            .layers
            .iter()
            .scan(0, |acc, l| {
                let at = *acc;
                *acc += l.param_count();
                Some(at)
            })
            .collect();
        let mut grad = vec![0.0; self.param_count()];
        let mut error = 0.0;
        let last = self.layers.len() - 1;
        // activations[0] is the input, activations[i + 1] the output of layer i
        let mut activations: Vec<Vec<f64>> =
            self.sizes.iter().map(|&s| Vec::with_capacity(s)).collect();
        let mut delta = Vec::new();
        let mut prev_delta = Vec::new();

        for (x, &y) in xs.iter().zip(ys) {
            self.check_input(x)?;
            activations[0].clear();
            activations[0].extend_from_slice(x);
            for (i, l) in self.layers.iter().enumerate() {
                let (done, todo) = activations.split_at_mut(i + 1);
                l.affine(&done[i], &mut todo[0]);
                if i < last {
                    todo[0].iter_mut().for_each(|z| *z = logistic(*z));
                }
            }
            let out = activations[last + 1][0];
            let r = out - y;
            error += r * r;

            delta.clear();
            delta.push(2.0 * r);
            for (i, l) in self.layers.iter().enumerate().rev() {
                let input = &activations[i];
                let g = &mut grad[offsets[i]..offsets[i] + l.param_count()];
                let (gw, gb) = g.split_at_mut(l.weights.len());
                for (o, &d) in delta.iter().enumerate() {
                    gb[o] += d;
                    for (gwk, a) in gw[o * l.inputs..(o + 1) * l.inputs].iter_mut().zip(input) {
                        *gwk += d * a;
                    }
                }
                if i > 0 {
                    prev_delta.clear();
                    prev_delta.extend((0..l.inputs).map(|k| {
                        let back: f64 = delta
                            .iter()
                            .enumerate()
                            .map(|(o, d)| d * l.weights[o * l.inputs + k])
                            .sum();
                        let a = input[k];
                        back * a * (1.0 - a)
                    }));
                    std::mem::swap(&mut delta, &mut prev_delta);
                }
            }
        }
        Ok((error, grad))
    }
}

fn check_batch(xs: &[Vec<f64>], ys: &[f64]) -> Result<()> {
    if xs.is_empty() {
        return Err(Error::EmptyInput);
    }
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch {
            expected: xs.len(),
            got: ys.len(),
        });
    }
    Ok(())
}
