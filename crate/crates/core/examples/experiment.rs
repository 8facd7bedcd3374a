//! A reduced version of the synthetic benchmark: four methods, three sample
//! sizes, paired splits, and a mean ± standard-error table.
//!
//! ```text
//! cargo run --release --example experiment -- [repetitions]
//! ```

use pcaboost::bench::{write_aggregates_csv, DataSource, Experiment, ExperimentConfig};
use pcaboost::cli::print_table;

fn main() -> pcaboost::Result<()> {
    let reps = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(5);
    let config = ExperimentConfig {
        data: DataSource::Synthetic {
            count: 1000,
            exponent: 4.0,
        },
        sample_sizes: vec![20, 40, 80],
        repetitions: reps,
        restarts: 3,
        seed: 1,
        ..Default::default()
    };
    println!("{}", serde_json::to_string(&config)?);

    let exp = Experiment::new(config)?;
    let jobs = std::thread::available_parallelism().map_or(1, |n| n.get());
    let outcome = exp.run(jobs, &|r| {
        eprint!("\r{} m={} rep {}        ", r.method, r.sample_size, r.repetition)
    })?;
    eprintln!();

    print_table(&outcome.stats, &mut std::io::stdout()).expect("stdout");
    println!();
    write_aggregates_csv(&outcome.stats, &mut std::io::stdout()).expect("stdout");
    Ok(())
}
