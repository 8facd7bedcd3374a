//! Trains a single PCA-Robust autoencoder on 80 curved points and compares
//! its held-out error with the PCA solution it started from.

use pcaboost::autoencoder::{mean_distance, train, Architecture, TrainConfig};
use pcaboost::data::{gen_power_surface, split, SplitSpec, TestSize, Transform};
use pcaboost::init::pca_robust_init;
use pcaboost::Dataset;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> pcaboost::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let data = gen_power_surface(1000, 4.0, &mut rng)?;
    let parts = split(
        &data,
        &SplitSpec {
            test: Some(TestSize::Count(250)),
            pool_size: Some(80),
            seed: 5,
            ..Default::default()
        },
    )?;
    println!(
        "train {} / val {} / select {} / test {}",
        parts.train.len(),
        parts.val.len(),
        parts.select.len(),
        parts.test.len()
    );

    let raw_train = Dataset::new(data.x.select_rows(&parts.train), None)?;
    let t = Transform::fit(&raw_train, false)?;
    let z_train = t.apply(&raw_train.x);
    let z_val = t.apply(&data.x.select_rows(&parts.val));
    let z_test = t.apply(&data.x.select_rows(&parts.test));

    let arch: Architecture = "3-20-3-2-3-20-3".parse()?;
    let init = pca_robust_init(&z_train, &arch, &mut rng)?;
    let pca_err = mean_distance(&z_test, &init.pca.reconstruct_data(&z_test)?);

    let out = train(init.params, &z_train, &z_val, &TrainConfig::default())?;
    let ae_err = mean_distance(&z_test, &out.params.predict(&z_test)?);

    println!(
        "stopped after {} epochs, best epoch {} (val loss {:.3e})",
        out.epochs_trained, out.best_epoch, out.best_val_loss
    );
    for rec in out.history.iter().step_by((out.history.len() / 8).max(1)) {
        println!("  epoch {:>5}  train {:.3e}  val {:.3e}", rec.epoch, rec.train_loss, rec.val_loss);
    }
    println!("test error: PCA {pca_err:.5}, trained {ae_err:.5}");
    let slopes: Vec<f64> = out.params.alphas.iter().flatten().copied().collect();
    let (lo, hi) = slopes.iter().fold((f64::MAX, f64::MIN), |(a, b), &s| (a.min(s), b.max(s)));
    println!("PReLU slopes now span {lo:.3}..{hi:.3}");
    Ok(())
}
