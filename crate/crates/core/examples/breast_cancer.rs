//! Reduces a 30-feature CSV (the Wisconsin breast cancer table by default) to
//! 15 dimensions with PCA and with a PCA-Robust autoencoder.
//!
//! ```text
//! cargo run --release --example breast_cancer -- [data.csv] [sample size]
//! ```

use std::path::PathBuf;

use pcaboost::bench::{DataSource, Experiment, ExperimentConfig, Method};
use pcaboost::data::{load_csv, TestSize};
use pcaboost::pca::ErrorUnits;

fn main() -> pcaboost::Result<()> {
    let mut args = std::env::args().skip(1);
    let path = args.next().map(PathBuf::from).unwrap_or_else(|| {
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data/breast_cancer.csv")
    });
    let size: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(50);

    let ds = load_csv(&path)?;
    println!("{}: {} rows x {} columns", path.display(), ds.rows(), ds.cols());

    let config = ExperimentConfig {
        data: DataSource::Csv { path },
        test: TestSize::Fraction(0.5),
        architecture: "30-100-30-15-30-100-30".parse()?,
        methods: vec![Method::Pca, Method::PcaRobust],
        sample_sizes: vec![size],
        repetitions: 3,
        restarts: 2,
        // Features range from ~1e-3 to ~1e3, so work in standardized units.
        scale: true,
        error_units: ErrorUnits::Standardized,
        ..Default::default()
    };
    let exp = Experiment::with_dataset(config, ds)?;
    for rep in 0..3 {
        let pca = exp.run_trial(Method::Pca, size, rep)?;
        let ae = exp.run_trial(Method::PcaRobust, size, rep)?;
        println!(
            "rep {rep}: PCA {:.4}  PCA-Robust {:.4} ({} epochs)",
            pca.test_error, ae.test_error, ae.epochs_trained
        );
    }
    Ok(())
}
