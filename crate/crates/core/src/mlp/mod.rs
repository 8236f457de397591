//! Fully connected tanh network trained with plain backpropagation.
//!
//! Every layer, including the output layer, applies `tanh`. Inputs are
//! z-scored with constants fitted on the training set and stored with the
//! model. Two output nodes encode GOAL as `(+1, -1)` and NO_GOAL as
//! `(-1, +1)`; [`score`] maps them to `[0, 1]`.

mod io;
mod train;

pub use io::{load_model, read_model, save_model, write_model, MODEL_FORMAT_VERSION};
pub use train::{train, EarlyStopping, FailureRule, StopReason, StopVerdict, TrainConfig, TrainReport};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SimRng;
use crate::scene::Outcome;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    pub mean: f64,
    pub std: f64,
}

impl Normalization {
    pub const IDENTITY: Normalization = Normalization { mean: 0.0, std: 1.0 };

    /// Column-wise mean and population std; zero spread becomes 1.
    pub fn fit(inputs: &[Vec<f64>]) -> Vec<Normalization> {
        let Some(width) = inputs.first().map(Vec::len) else {
            return Vec::new();
        };
        let n = inputs.len() as f64;
        (0..width)
            .map(|j| {
                let mean = inputs.iter().map(|x| x[j]).sum::<f64>() / n;
                let var = inputs.iter().map(|x| (x[j] - mean).powi(2)).sum::<f64>() / n;
                let std = var.sqrt();
                Normalization { mean, std: if std > 0.0 && std.is_finite() { std } else { 1.0 } }
            })
            .collect()
    }
}

/// Weights are stored per layer as row-major `fan_in x fan_out` matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpParams {
    pub layer_sizes: Vec<usize>,
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
    pub normalization: Vec<Normalization>,
}

/// Same shape as the trainable part of [`MlpParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct MlpGradient {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

impl MlpParams {
    pub fn zeros(layer_sizes: &[usize]) -> Result<Self> {
        if layer_sizes.len() < 2 || layer_sizes.contains(&0) {
            return Err(Error::config("a network needs at least two non-empty layers"));
        }
        let weights = layer_sizes.windows(2).map(|w| vec![0.0; w[0] * w[1]]).collect();
        let biases = layer_sizes[1..].iter().map(|&n| vec![0.0; n]).collect();
        Ok(MlpParams {
            layer_sizes: layer_sizes.to_vec(),
            weights,
            biases,
            normalization: vec![Normalization::IDENTITY; layer_sizes[0]],
        })
    }

    /// Weights and biases uniform in `[-half_range, half_range]`.
    pub fn random(layer_sizes: &[usize], half_range: f64, rng: &mut SimRng) -> Result<Self> {
        let mut p = Self::zeros(layer_sizes)?;
        if half_range > 0.0 {
            for v in p.weights.iter_mut().chain(p.biases.iter_mut()).flatten() {
                *v = rng.random_range(-half_range..=half_range);
            }
        }
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let sizes = &self.layer_sizes;
        if sizes.len() < 2 || sizes.contains(&0) {
            return Err(Error::Model("a network needs at least two non-empty layers".into()));
        }
        let layers = sizes.len() - 1;
        if self.weights.len() != layers || self.biases.len() != layers {
            return Err(Error::Model("layer count does not match layer sizes".into()));
        }
        for l in 0..layers {
            if self.weights[l].len() != sizes[l] * sizes[l + 1] || self.biases[l].len() != sizes[l + 1] {
                return Err(Error::Model(format!("layer {} has inconsistent dimensions", l + 1)));
            }
        }
        if self.normalization.len() != sizes[0] {
            return Err(Error::Model("normalization width does not match the input layer".into()));
        }
        if self.normalization.iter().any(|n| !(n.std > 0.0 && n.std.is_finite() && n.mean.is_finite())) {
            return Err(Error::Model("normalization stds must be positive and finite".into()));
        }
        Ok(())
    }

    pub fn input_size(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn output_size(&self) -> usize {
        *self.layer_sizes.last().expect("at least two layers")
    }

    fn normalize(&self, input: &[f64]) -> Result<Vec<f64>> {
        if input.len() != self.input_size() {
            return Err(Error::Dimension { expected: self.input_size(), actual: input.len() });
        }
        Ok(input.iter().zip(&self.normalization).map(|(x, n)| (x - n.mean) / n.std).collect())
    }

    /// Activations of every layer, starting with the normalized input.
    fn activations(&self, input: &[f64]) -> Result<Vec<Vec<f64>>> {
        let mut acts = vec![self.normalize(input)?];
        for l in 0..self.weights.len() {
            let fan_out = self.layer_sizes[l + 1];
            let prev = &acts[l];
            let mut next = self.biases[l].clone();
            for (i, &a) in prev.iter().enumerate() {
                let row = &self.weights[l][i * fan_out..(i + 1) * fan_out];
                for (n, w) in next.iter_mut().zip(row) {
                    *n += a * w;
                }
            }
            next.iter_mut().for_each(|v| *v = v.tanh());
            acts.push(next);
        }
        Ok(acts)
    }

    /// Output-layer activations for a raw (unnormalized) input.
    pub fn outputs(&self, input: &[f64]) -> Result<Vec<f64>> {
        Ok(self.activations(input)?.pop().expect("output layer"))
    }

    /// Per-example loss: mean squared error over the output nodes.
    pub fn loss(&self, input: &[f64], target: &[f64]) -> Result<f64> {
        let out = self.outputs(input)?;
        if target.len() != out.len() {
            return Err(Error::Dimension { expected: out.len(), actual: target.len() });
        }
        Ok(out.iter().zip(target).map(|(y, t)| (y - t).powi(2)).sum::<f64>() / out.len() as f64)
    }

    /// Overwrite `grad` with the gradient of [`MlpParams::loss`].
    pub fn backprop_into(&self, input: &[f64], target: &[f64], grad: &mut MlpGradient) -> Result<f64> {
        let acts = self.activations(input)?;
        let out = acts.last().expect("output layer");
        if target.len() != out.len() {
            return Err(Error::Dimension { expected: out.len(), actual: target.len() });
        }
        let n_out = out.len() as f64;
        let loss = out.iter().zip(target).map(|(y, t)| (y - t).powi(2)).sum::<f64>() / n_out;
        // dL/dz at the output, through tanh' = 1 - y^2
        let mut delta: Vec<f64> = out.iter().zip(target).map(|(y, t)| 2.0 * (y - t) / n_out * (1.0 - y * y)).collect();
        for l in (0..self.weights.len()).rev() {
            let fan_out = self.layer_sizes[l + 1];
            let prev = &acts[l];
            let gw = &mut grad.weights[l];
            for (i, &a) in prev.iter().enumerate() {
                for (g, d) in gw[i * fan_out..(i + 1) * fan_out].iter_mut().zip(&delta) {
                    *g = a * d;
                }
            }
            grad.biases[l].copy_from_slice(&delta);
            if l > 0 {
                delta = prev
                    .iter()
                    .enumerate()
                    .map(|(i, &a)| {
                        let row = &self.weights[l][i * fan_out..(i + 1) * fan_out];
                        row.iter().zip(&delta).map(|(w, d)| w * d).sum::<f64>() * (1.0 - a * a)
                    })
                    .collect();
            }
        }
        Ok(loss)
    }

    /// `self -= rate * grad`.
    pub fn apply(&mut self, grad: &MlpGradient, rate: f64) {
        for (p, g) in self.weights.iter_mut().zip(&grad.weights).chain(self.biases.iter_mut().zip(&grad.biases)) {
            for (pv, gv) in p.iter_mut().zip(g) {
                *pv -= rate * gv;
            }
        }
    }
}

impl MlpGradient {
    pub fn zeros_like(params: &MlpParams) -> Self {
        MlpGradient {
            weights: params.weights.iter().map(|w| vec![0.0; w.len()]).collect(),
            biases: params.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
        }
    }

    pub fn add_assign(&mut self, other: &MlpGradient) {
        for (a, b) in self.weights.iter_mut().zip(&other.weights).chain(self.biases.iter_mut().zip(&other.biases)) {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = &f64> {
        self.weights.iter().chain(&self.biases).flatten()
    }
}

/// The two output nodes for a two-output network.
pub fn forward(params: &MlpParams, input: &[f64]) -> Result<(f64, f64)> {
    match params.outputs(input)?.as_slice() {
        &[a, b] => Ok((a, b)),
        other => Err(Error::Dimension { expected: 2, actual: other.len() }),
    }
}

/// Gradient of the per-example MSE with respect to every weight and bias.
pub fn gradient(params: &MlpParams, input: &[f64], target: (f64, f64)) -> Result<MlpGradient> {
    if !((-1.0..=1.0).contains(&target.0) && (-1.0..=1.0).contains(&target.1)) {
        return Err(Error::domain("targets must lie in [-1, 1]"));
    }
    let mut g = MlpGradient::zeros_like(params);
    params.backprop_into(input, &[target.0, target.1], &mut g)?;
    Ok(g)
}

/// Map the two output nodes to `[0, 1]`: `(node1 - node2) / 4 + 0.5`.
pub fn score(node1: f64, node2: f64) -> Result<f64> {
    if !((-1.0..=1.0).contains(&node1) && (-1.0..=1.0).contains(&node2)) {
        return Err(Error::domain(format!("output nodes ({node1}, {node2}) outside [-1, 1]")));
    }
    Ok((node1 - node2) / 4.0 + 0.5)
}

/// Training target for a label.
pub fn encode_label(label: Outcome) -> [f64; 2] {
    match label {
        Outcome::Goal => [1.0, -1.0],
        Outcome::NoGoal => [-1.0, 1.0],
    }
}

/// Forward pass followed by [`score`].
pub fn predict_score(params: &MlpParams, input: &[f64]) -> Result<f64> {
    let (a, b) = forward(params, input)?;
    score(a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    #[test]
    fn score_extremes() {
        assert_eq!(score(1.0, -1.0).unwrap(), 1.0);
        assert_eq!(score(0.3, 0.3).unwrap(), 0.5);
        assert_eq!(score(-1.0, 1.0).unwrap(), 0.0);
        assert!(score(1.5, 0.0).is_err());
        assert!(score(0.0, f64::NAN).is_err());
    }

    #[test]
    fn zero_network_outputs_zero() {
        let p = MlpParams::zeros(&[22, 5, 2]).unwrap();
        assert_eq!(forward(&p, &[3.0; 22]).unwrap(), (0.0, 0.0));
        assert!(matches!(forward(&p, &[0.0; 21]), Err(Error::Dimension { expected: 22, actual: 21 })));
    }

    #[test]
    fn hand_computed_tiny_net() {
        let p = MlpParams {
            layer_sizes: vec![1, 1, 2],
            weights: vec![vec![0.5], vec![2.0, -1.0]],
            biases: vec![vec![0.1], vec![0.0, 0.3]],
            normalization: vec![Normalization { mean: 1.0, std: 2.0 }],
        };
        // x = 3 -> z = 1 -> h = tanh(0.6)
        let h = (0.5f64 * 1.0 + 0.1).tanh();
        let expected = ((2.0 * h).tanh(), (-h + 0.3).tanh());
        let got = forward(&p, &[3.0]).unwrap();
        assert!((got.0 - expected.0).abs() < 1e-15 && (got.1 - expected.1).abs() < 1e-15);
    }

    #[test]
    fn outputs_stay_in_open_interval() {
        let mut r = rng::seeded(3);
        for _ in 0..200 {
            let p = MlpParams::random(&[22, 5, 2], 1.0, &mut r).unwrap();
            let x: Vec<f64> = (0..22).map(|_| r.random_range(-50.0..50.0)).collect();
            let (a, b) = forward(&p, &x).unwrap();
            assert!(a.abs() <= 1.0 && b.abs() <= 1.0);
        }
    }

    #[test]
    fn zero_gradient_at_target() {
        let mut r = rng::seeded(4);
        let p = MlpParams::random(&[4, 3, 2], 0.5, &mut r).unwrap();
        let x = [0.3, -0.2, 1.0, 0.0];
        let (a, b) = forward(&p, &x).unwrap();
        let g = gradient(&p, &x, (a, b)).unwrap();
        assert!(g.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn duplicated_example_doubles_summed_gradient() {
        let mut r = rng::seeded(5);
        let p = MlpParams::random(&[4, 3, 2], 0.5, &mut r).unwrap();
        let x = [0.3, -0.2, 1.0, 0.5];
        let g = gradient(&p, &x, (1.0, -1.0)).unwrap();
        let mut sum = MlpGradient::zeros_like(&p);
        sum.add_assign(&g);
        sum.add_assign(&g);
        for (s, one) in sum.iter().zip(g.iter()) {
            assert_eq!(*s, 2.0 * one);
        }
    }

    #[test]
    fn small_step_reduces_loss() {
        let mut r = rng::seeded(6);
        for _ in 0..100 {
            let mut p = MlpParams::random(&[6, 5, 2], 0.5, &mut r).unwrap();
            let x: Vec<f64> = (0..6).map(|_| r.random_range(-2.0..2.0)).collect();
            let t = if r.random_bool(0.5) { (1.0, -1.0) } else { (-1.0, 1.0) };
            let before = p.loss(&x, &[t.0, t.1]).unwrap();
            let g = gradient(&p, &x, t).unwrap();
            if g.iter().all(|v| *v == 0.0) {
                continue;
            }
            p.apply(&g, 1e-4);
            assert!(p.loss(&x, &[t.0, t.1]).unwrap() < before);
        }
    }

    #[test]
    fn normalization_fit() {
        let n = Normalization::fit(&[vec![1.0, 5.0], vec![3.0, 5.0]]);
        assert_eq!(n[0], Normalization { mean: 2.0, std: 1.0 });
        assert_eq!(n[1], Normalization { mean: 5.0, std: 1.0 });
    }
}
