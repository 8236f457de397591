use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{encode_label, MlpGradient, MlpParams, Normalization};
use crate::error::{Error, Result};
use crate::rng;
use crate::scene::Outcome;

/// What counts as a validation failure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureRule {
    /// validation MSE not below the best seen so far
    #[default]
    BestSoFar,
    /// validation MSE not below the previous epoch's
    PreviousEpoch,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub max_epochs: usize,
    /// consecutive validation failures that stop training
    pub patience: usize,
    pub init_half_range: f64,
    pub hidden_layers: Vec<usize>,
    pub failure_rule: FailureRule,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.001,
            max_epochs: 10_000,
            patience: 5,
            init_half_range: 0.1,
            hidden_layers: vec![5],
            failure_rule: FailureRule::BestSoFar,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::config("learning_rate must be positive"));
        }
        if self.patience == 0 {
            return Err(Error::config("patience must be at least 1"));
        }
        if self.max_epochs == 0 {
            return Err(Error::config("max_epochs must be at least 1"));
        }
        if !(self.init_half_range >= 0.0 && self.init_half_range.is_finite()) {
            return Err(Error::config("init_half_range must be finite and >= 0"));
        }
        if self.hidden_layers.contains(&0) {
            return Err(Error::config("hidden layers must be non-empty"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum StopReason {
    MaxEpochs,
    EarlyStop,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub epochs_run: usize,
    /// 1-based epoch whose parameters were returned
    pub best_epoch: usize,
    pub train_mse_history: Vec<f64>,
    pub validation_mse_history: Vec<f64>,
    pub stop_reason: StopReason,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopVerdict {
    Improved,
    Failed,
    Stop,
}

/// Early-stopping bookkeeping over a stream of validation errors.
#[derive(Debug, Clone)]
pub struct EarlyStopping {
    rule: FailureRule,
    patience: usize,
    best: f64,
    best_epoch: usize,
    previous: f64,
    failures: usize,
    epoch: usize,
}

impl EarlyStopping {
    pub fn new(rule: FailureRule, patience: usize) -> Self {
        EarlyStopping {
            rule,
            patience,
            best: f64::INFINITY,
            best_epoch: 0,
            previous: f64::INFINITY,
            failures: 0,
            epoch: 0,
        }
    }

    /// Record the validation error of the next epoch.
    pub fn observe(&mut self, mse: f64) -> StopVerdict {
        self.epoch += 1;
        let reference = match self.rule {
            FailureRule::BestSoFar => self.best,
            FailureRule::PreviousEpoch => self.previous,
        };
        let failed = mse.partial_cmp(&reference) != Some(std::cmp::Ordering::Less);
        self.previous = mse;
        let improved_best = mse < self.best;
        if improved_best {
            self.best = mse;
            self.best_epoch = self.epoch;
        }
        if failed {
            self.failures += 1;
            if self.failures >= self.patience {
                return StopVerdict::Stop;
            }
            return StopVerdict::Failed;
        }
        self.failures = 0;
        if improved_best {
            StopVerdict::Improved
        } else {
            StopVerdict::Failed
        }
    }

    pub fn best_epoch(&self) -> usize {
        self.best_epoch
    }

    pub fn best(&self) -> f64 {
        self.best
    }

    pub fn epoch(&self) -> usize {
        self.epoch
    }
}

fn mean_loss(params: &MlpParams, inputs: &[Vec<f64>], targets: &[[f64; 2]]) -> Result<f64> {
    let mut total = 0.0;
    for (x, t) in inputs.iter().zip(targets) {
        total += params.loss(x, t)?;
    }
    Ok(total / inputs.len() as f64)
}

fn check_set(inputs: &[Vec<f64>], labels: &[Outcome], width: usize, what: &str) -> Result<()> {
    if inputs.is_empty() {
        return Err(Error::data(format!("{what} set is empty")));
    }
    if inputs.len() != labels.len() {
        return Err(Error::Dimension { expected: inputs.len(), actual: labels.len() });
    }
    if let Some(bad) = inputs.iter().find(|x| x.len() != width) {
        return Err(Error::Dimension { expected: width, actual: bad.len() });
    }
    Ok(())
}

/// Online backpropagation with early stopping on validation MSE.
///
/// Each epoch visits the training set in a freshly shuffled order and
/// updates after every example. The returned parameters are those of the
/// epoch with the lowest validation MSE.
pub fn train(
    train_inputs: &[Vec<f64>],
    train_labels: &[Outcome],
    val_inputs: &[Vec<f64>],
    val_labels: &[Outcome],
    config: &TrainConfig,
) -> Result<(MlpParams, TrainReport)> {
    config.validate()?;
    let width = train_inputs.first().map_or(0, Vec::len);
    check_set(train_inputs, train_labels, width, "training")?;
    check_set(val_inputs, val_labels, width, "validation")?;

    let mut sizes = vec![width];
    sizes.extend(&config.hidden_layers);
    sizes.push(2);
    let mut params =
        MlpParams::random(&sizes, config.init_half_range, &mut rng::derived(config.seed, rng::tag::INIT, 0))?;
    params.normalization = Normalization::fit(train_inputs);

    let train_targets: Vec<[f64; 2]> = train_labels.iter().map(|l| encode_label(*l)).collect();
    let val_targets: Vec<[f64; 2]> = val_labels.iter().map(|l| encode_label(*l)).collect();

    let mut order: Vec<usize> = (0..train_inputs.len()).collect();
    let mut shuffle_rng = rng::derived(config.seed, rng::tag::SHUFFLE, 0);
    let mut grad = MlpGradient::zeros_like(&params);
    let mut stopper = EarlyStopping::new(config.failure_rule, config.patience);
    let mut best = params.clone();
    let mut train_hist = Vec::new();
    let mut val_hist = Vec::new();
    let mut stop_reason = StopReason::MaxEpochs;

    for _ in 0..config.max_epochs {
        order.shuffle(&mut shuffle_rng);
        for &i in &order {
            params.backprop_into(&train_inputs[i], &train_targets[i], &mut grad)?;
            params.apply(&grad, config.learning_rate);
        }
        train_hist.push(mean_loss(&params, train_inputs, &train_targets)?);
        let val = mean_loss(&params, val_inputs, &val_targets)?;
        val_hist.push(val);
        let verdict = stopper.observe(val);
        if stopper.best_epoch() == stopper.epoch() {
            best.clone_from(&params);
        }
        if verdict == StopVerdict::Stop {
            stop_reason = StopReason::EarlyStop;
            break;
        }
    }

    let report = TrainReport {
        epochs_run: train_hist.len(),
        best_epoch: stopper.best_epoch(),
        train_mse_history: train_hist,
        validation_mse_history: val_hist,
        stop_reason,
    };
    Ok((best, report))
}
