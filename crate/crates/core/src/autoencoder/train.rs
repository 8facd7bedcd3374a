use serde::{Deserialize, Serialize};

use super::adam::{AdamHyper, AdamState};
use super::loss::objective;
use super::network::AeParams;
use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Full-batch Adam training with validation-based early stopping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_epsilon: f64,
    pub max_epochs: usize,
    /// Epochs without a validation improvement before stopping.
    pub patience: usize,
    /// Only full-batch training is implemented.
    pub full_batch: bool,
    /// Keep every PReLU slope at its initial value (a linear net at α = 1).
    pub freeze_alphas: bool,
    /// Recorded for provenance; full-batch training itself draws no randomness.
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_epsilon: 1e-8,
            max_epochs: 10_000,
            patience: 100,
            full_batch: true,
            freeze_alphas: false,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return Err(Error::Config("learning_rate must be positive".into()));
        }
        if self.patience == 0 {
            return Err(Error::Config("patience must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.adam_beta1) || !(0.0..1.0).contains(&self.adam_beta2) {
            return Err(Error::Config("Adam betas must lie in [0, 1)".into()));
        }
        if !(self.adam_epsilon > 0.0) {
            return Err(Error::Config("adam_epsilon must be positive".into()));
        }
        if !self.full_batch {
            return Err(Error::Config("mini-batch training is not supported".into()));
        }
        Ok(())
    }

    fn hyper(&self) -> AdamHyper {
        AdamHyper {
            learning_rate: self.learning_rate,
            beta1: self.adam_beta1,
            beta2: self.adam_beta2,
            epsilon: self.adam_epsilon,
        }
    }
}

/// Losses after `epoch` parameter updates (epoch 0 is the initialization).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Parameters with the lowest validation loss seen.
    pub params: AeParams,
    pub best_epoch: usize,
    pub best_val_loss: f64,
    /// Number of updates performed.
    pub epochs_trained: usize,
    /// One record per epoch, `epochs_trained + 1` rows.
    pub history: Vec<EpochRecord>,
}

/// Trains `params` on `train`, stopping once the validation loss has not
/// improved for `patience` epochs or after `max_epochs`. Returns the best
/// checkpoint, so the result is never worse on `val` than the initialization.
pub fn train(
    params: AeParams,
    train: &Matrix,
    val: &Matrix,
    config: &TrainConfig,
) -> Result<TrainOutcome> {
    config.validate()?;
    let n = params.arch.n_inputs();
    if train.cols() != n || val.cols() != n {
        return Err(Error::Shape(format!(
            "train/val have {}/{} columns, network expects {n}",
            train.cols(),
            val.cols()
        )));
    }
    let hp = config.hyper();
    let mut current = params;
    let mut state = AdamState::new(current.slices().iter().map(|s| s.len()));

    let val_loss = |p: &AeParams| -> Result<f64> { Ok(objective(val, &p.predict(val)?)) };

    let initial_val = val_loss(&current)?;
    if !initial_val.is_finite() {
        return Err(Error::Diverged { epoch: 0 });
    }
    let mut history = vec![EpochRecord {
        epoch: 0,
        train_loss: f64::NAN,
        val_loss: initial_val,
    }];
    let mut best = current.clone();
    let mut best_epoch = 0;
    let mut best_val = initial_val;
    let mut stale = 0;

    for epoch in 1..=config.max_epochs {
        let (train_loss, mut grads) = current.gradients(train)?;
        history[epoch - 1].train_loss = train_loss;
        if !train_loss.is_finite() || !grads.is_finite() {
            return Err(Error::Diverged { epoch: epoch - 1 });
        }
        if config.freeze_alphas {
            grads.zero_alphas();
        }
        state.update(current.slices_mut(), grads.slices(), &hp);

        let v = val_loss(&current)?;
        if !v.is_finite() {
            return Err(Error::Diverged { epoch });
        }
        history.push(EpochRecord {
            epoch,
            train_loss: f64::NAN,
            val_loss: v,
        });
        if v < best_val {
            best_val = v;
            best_epoch = epoch;
            best.clone_from(&current);
            stale = 0;
        } else {
            stale += 1;
            if stale >= config.patience {
                break;
            }
        }
    }

    let last = history.last_mut().expect("non-empty");
    last.train_loss = objective(train, &current.predict(train)?);
    let epochs_trained = history.len() - 1;
    Ok(TrainOutcome {
        params: best,
        best_epoch,
        best_val_loss: best_val,
        epochs_trained,
        history,
    })
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::autoencoder::Architecture;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn identity_net() -> AeParams {
        let arch: Architecture = "2-1-2".parse().unwrap();
        let w1 = Matrix::from_rows(&[[1.0], [0.0]]).unwrap();
        let w2 = Matrix::from_rows(&[[1.0, 0.0]]).unwrap();
        AeParams::from_weights(arch, vec![w1, w2]).unwrap()
    }

    #[test]
    fn optimal_init_is_returned() {
        let x = Matrix::from_rows(&[[1.0, 0.0], [-2.0, 0.0], [0.5, 0.0]]).unwrap();
        let init = identity_net();
        let cfg = TrainConfig {
            patience: 1,
            ..Default::default()
        };
        let out = train(init.clone(), &x, &x, &cfg).unwrap();
        assert_eq!(out.params, init);
        assert_eq!(out.best_epoch, 0);
        assert_eq!(out.epochs_trained, 1);
        assert_eq!(out.history.len(), 2);
    }

    #[test]
    fn best_checkpoint_never_worse_than_init() {
        let mut r = rng(1);
        let arch: Architecture = "3-6-3-2-3-6-3".parse().unwrap();
        let x = Matrix::random_normal(20, 3, &mut r);
        let v = Matrix::random_normal(4, 3, &mut r);
        let init = AeParams::random(arch, &mut r);
        let cfg = TrainConfig {
            max_epochs: 300,
            patience: 20,
            learning_rate: 1e-2,
            ..Default::default()
        };
        let out = train(init, &x, &v, &cfg).unwrap();
        let min = out
            .history
            .iter()
            .map(|h| h.val_loss)
            .fold(f64::INFINITY, f64::min);
        assert_eq!(out.best_val_loss, min);
        assert!(out.best_val_loss <= out.history[0].val_loss);
        assert_eq!(out.history.len(), out.epochs_trained + 1);
        assert!(out.history.iter().all(|h| h.train_loss.is_finite()));
        let recomputed = objective(&v, &out.params.predict(&v).unwrap());
        assert!((recomputed - out.best_val_loss).abs() < 1e-12);
    }

    #[test]
    fn zero_epochs_returns_init() {
        let mut r = rng(2);
        let init = AeParams::random("3-2-3".parse().unwrap(), &mut r);
        let x = Matrix::random_normal(5, 3, &mut r);
        let cfg = TrainConfig {
            max_epochs: 0,
            ..Default::default()
        };
        let out = train(init.clone(), &x, &x, &cfg).unwrap();
        assert_eq!(out.params, init);
        assert_eq!(out.epochs_trained, 0);
        assert_eq!(out.history.len(), 1);
    }

    #[test]
    fn frozen_alphas_stay_at_one() {
        let mut r = rng(3);
        let init = AeParams::random("3-6-3-2-3-6-3".parse().unwrap(), &mut r);
        let x = Matrix::random_normal(10, 3, &mut r);
        let cfg = TrainConfig {
            max_epochs: 50,
            freeze_alphas: true,
            learning_rate: 1e-2,
            ..Default::default()
        };
        let out = train(init, &x, &x, &cfg).unwrap();
        assert!(out.params.alphas.iter().flatten().all(|&a| a == 1.0));
    }

    #[test]
    fn divergence_is_reported() {
        let mut r = rng(4);
        let init = AeParams::random("3-20-3-2-3-20-3".parse().unwrap(), &mut r);
        let x = Matrix::random_normal(10, 3, &mut r).scale(1e200);
        let cfg = TrainConfig {
            max_epochs: 5,
            ..Default::default()
        };
        assert!(matches!(
            train(init, &x, &x, &cfg),
            Err(Error::Diverged { .. })
        ));
    }

    #[test]
    fn rejects_bad_config() {
        let x = Matrix::zeros(3, 2);
        for cfg in [
            TrainConfig {
                patience: 0,
                ..Default::default()
            },
            TrainConfig {
                learning_rate: 0.0,
                ..Default::default()
            },
            TrainConfig {
                full_batch: false,
                ..Default::default()
            },
        ] {
            assert!(matches!(
                train(identity_net(), &x, &x, &cfg),
                Err(Error::Config(_))
            ));
        }
    }
}
