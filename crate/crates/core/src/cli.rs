//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 for usage or configuration errors, 2 for
//! numerical failures (divergence, failed verification).

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::autoencoder::{AeParams, Architecture, EpochRecord};
use crate::bench::{
    write_aggregates_csv, write_results_csv, AggregateStats, Experiment, ExperimentConfig, Method,
    StreamingCsv, TrialModel,
};
use crate::data::{gen_power_surface, load_csv, save_csv, SplitIndices, Transform};
use crate::error::{Error, Result};
use crate::init::{pca_naive_init_with, pca_robust_init_with, verify_init, RobustOptions};
use crate::pca::PcaModel;

#[derive(Debug, Parser)]
#[command(name = "pcaboost", version, about = "PCA-initialized PReLU autoencoders")]
pub struct Cli {
    /// Print the default experiment config as JSON and exit.
    #[arg(long, global = true)]
    pub print_default_config: bool,

    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample points from the surface z = x^e + y^e on [0,1]^2.
    Synth {
        #[arg(long, default_value_t = 1000)]
        count: usize,
        #[arg(long, default_value_t = 4.0)]
        exponent: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build an initialization on a dataset and print its verification report.
    InitCheck {
        #[arg(long)]
        data: PathBuf,
        /// Layer widths, e.g. 3-20-3-2-3-20-3.
        #[arg(long)]
        arch: Architecture,
        /// Bottleneck width (must agree with --arch).
        #[arg(long)]
        q: Option<usize>,
        #[arg(long, value_enum, default_value_t = InitMethod::Robust)]
        method: InitMethod,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Scale features to unit variance before PCA.
        #[arg(long)]
        scale: bool,
        /// Equivalence tolerance; 1e-8 for robust, 1e-6 otherwise by default.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Run a single trial and write the kept model and its training history.
    Train {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Defaults to the first autoencoder method of the config.
        #[arg(long)]
        method: Option<Method>,
        /// Defaults to the first sample size of the config.
        #[arg(long)]
        size: Option<usize>,
        #[arg(long, default_value_t = 0)]
        rep: usize,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the full method x sample size x repetition grid.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InitMethod {
    Robust,
    Naive,
    Random,
}

/// Parses arguments, runs, and maps the outcome to an exit code.
pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .try_init();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 2 } else { 1 })
        }
    }
}

pub fn run(cli: Cli) -> Result<ExitCode> {
    if cli.print_default_config {
        let json = serde_json::to_string_pretty(&ExperimentConfig::default())?;
        println!("{json}");
        return Ok(ExitCode::SUCCESS);
    }
    let Some(command) = cli.command else {
        return Err(Error::Config(
            "no subcommand given (try --help or --print-default-config)".into(),
        ));
    };
    match command {
        Command::Synth {
            count,
            exponent,
            seed,
            out,
        } => cmd_synth(count, exponent, seed, &out),
        Command::InitCheck {
            data,
            arch,
            q,
            method,
            seed,
            scale,
            tol,
        } => cmd_init_check(&data, &arch, q, method, seed, scale, tol),
        Command::Train {
            config,
            out,
            method,
            size,
            rep,
            seed,
        } => cmd_train(&config, &out, method, size, rep, seed),
        Command::Experiment {
            config,
            out,
            jobs,
            seed,
        } => cmd_experiment(&config, &out, jobs, seed),
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn create_file(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut w = create_file(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w).and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
}

pub fn cmd_synth(count: usize, exponent: f64, seed: u64, out: &Path) -> Result<ExitCode> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ds = gen_power_surface(count, exponent, &mut rng)?;
    save_csv(&ds, out)?;
    println!("wrote {} rows to {}", ds.rows(), out.display());
    Ok(ExitCode::SUCCESS)
}

pub fn cmd_init_check(
    data: &Path,
    arch: &Architecture,
    q: Option<usize>,
    method: InitMethod,
    seed: u64,
    scale: bool,
    tol: Option<f64>,
) -> Result<ExitCode> {
    if let Some(q) = q {
        if q != arch.q() {
            return Err(Error::Config(format!("--q {q} disagrees with --arch {arch}")));
        }
    }
    arch.check_vase()?;
    let ds = load_csv(data)?;
    if ds.cols() != arch.n_inputs() {
        return Err(Error::Config(format!(
            "data has {} columns, architecture expects {}",
            ds.cols(),
            arch.n_inputs()
        )));
    }
    let pca = PcaModel::fit_with(&ds.x, arch.q(), scale)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let params = match method {
        InitMethod::Robust => {
            pca_robust_init_with(&pca, arch, &mut rng, RobustOptions::default())?.params
        }
        InitMethod::Naive => pca_naive_init_with(&pca, arch, &mut rng)?.params,
        InitMethod::Random => AeParams::random(arch.clone(), &mut rng),
    };
    let tol = tol.unwrap_or(if method == InitMethod::Robust { 1e-8 } else { 1e-6 });
    let report = verify_init(&params, &ds.x, &pca, tol)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(if report.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    })
}

fn load_config(path: &Path, seed: Option<u64>) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

#[derive(Serialize)]
struct HistorySummary {
    epochs_trained: usize,
    best_epoch: usize,
    best_val_loss: f64,
}

#[derive(Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum ModelBody<'a> {
    Pca { pca: &'a PcaModel },
    Autoencoder {
        params: &'a AeParams,
        history: HistorySummary,
    },
}

#[derive(Serialize)]
struct ModelDocument<'a> {
    method: Method,
    architecture: &'a Architecture,
    sample_size: usize,
    repetition: usize,
    seed: u64,
    selected_restart: usize,
    test_error: f64,
    transform: &'a Transform,
    model: ModelBody<'a>,
}

fn write_history(path: &Path, history: &[EpochRecord]) -> Result<()> {
    let mut w = create_file(path)?;
    let io = |e| Error::io(path, e);
    writeln!(w, "epoch,train_loss,val_loss").map_err(io)?;
    for h in history {
        writeln!(w, "{},{:?},{:?}", h.epoch, h.train_loss, h.val_loss).map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn cmd_train(
    config: &Path,
    out: &Path,
    method: Option<Method>,
    size: Option<usize>,
    rep: usize,
    seed: Option<u64>,
) -> Result<ExitCode> {
    let cfg = load_config(config, seed)?;
    let method = method
        .or_else(|| cfg.methods.iter().copied().find(|m| m.is_autoencoder()))
        .unwrap_or(Method::PcaRobust);
    let size = size.unwrap_or(cfg.sample_sizes[0]);
    let exp = Experiment::new(cfg)?;
    let detail = exp.run_trial_detailed(method, size, rep)?;
    let Some(model) = &detail.model else {
        return Err(Error::Diverged {
            epoch: detail.result.epochs_trained,
        });
    };
    create_dir(out)?;
    let body = match model {
        TrialModel::Pca(pca) => ModelBody::Pca { pca },
        TrialModel::Autoencoder {
            params,
            history,
            best_epoch,
        } => {
            write_history(&out.join("history.csv"), history)?;
            ModelBody::Autoencoder {
                params,
                history: HistorySummary {
                    epochs_trained: detail.result.epochs_trained,
                    best_epoch: *best_epoch,
                    best_val_loss: history[*best_epoch].val_loss,
                },
            }
        }
    };
    let doc = ModelDocument {
        method,
        architecture: &exp.config().architecture,
        sample_size: size,
        repetition: rep,
        seed: exp.config().seed,
        selected_restart: detail.result.selected_restart,
        test_error: detail.result.test_error,
        transform: &detail.transform,
        model: body,
    };
    write_json(&out.join("model.json"), &doc)?;
    write_json(&out.join("split.json"), &detail.split)?;
    println!(
        "{method} size {size} rep {rep}: test error {:.6} after {} epochs",
        detail.result.test_error, detail.result.epochs_trained
    );
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct SplitRecord {
    sample_size: usize,
    repetition: usize,
    #[serde(flatten)]
    split: SplitIndices,
}

pub fn cmd_experiment(
    config: &Path,
    out: &Path,
    jobs: Option<usize>,
    seed: Option<u64>,
) -> Result<ExitCode> {
    let cfg = load_config(config, seed)?;
    let jobs = jobs.unwrap_or_else(|| {
        std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1)
    });
    let exp = Experiment::new(cfg)?;
    create_dir(out)?;

    let mut splits = Vec::new();
    for &size in &exp.config().sample_sizes {
        for rep in 0..exp.config().repetitions {
            splits.push(SplitRecord {
                sample_size: size,
                repetition: rep,
                split: exp.split_for(size, rep)?,
            });
        }
    }
    write_json(&out.join("splits.json"), &splits)?;

    let partial = out.join("results.csv.partial");
    let stream = StreamingCsv::new(create_file(&partial)?).map_err(|e| Error::io(&partial, e))?;
    let total = exp.grid().len();
    let done = std::sync::atomic::AtomicUsize::new(0);
    let outcome = exp.run(jobs, &|r| {
        stream.push(r);
        let k = done.fetch_add(1, std::sync::atomic::Ordering::Relaxed) + 1;
        log::info!(
            "[{k}/{total}] {} size {} rep {}: {:.6}",
            r.method,
            r.sample_size,
            r.repetition,
            r.test_error
        );
    })?;
    drop(stream);

    let results_path = out.join("results.csv");
    let mut w = create_file(&results_path)?;
    write_results_csv(&outcome.results, &mut w)
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(&results_path, e))?;
    let agg_path = out.join("aggregates.csv");
    let mut w = create_file(&agg_path)?;
    write_aggregates_csv(&outcome.stats, &mut w)
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(&agg_path, e))?;
    let _ = fs::remove_file(&partial);

    print_table(&outcome.stats, &mut io::stdout()).map_err(|e| Error::io("<stdout>", e))?;
    let failed = outcome.results.iter().filter(|r| r.failed).count();
    if failed > 0 {
        log::warn!("{failed} of {} trials failed", outcome.results.len());
    }
    Ok(if failed == outcome.results.len() {
        ExitCode::from(2)
    } else {
        ExitCode::SUCCESS
    })
}

pub fn print_table(stats: &AggregateStats, w: &mut impl Write) -> io::Result<()> {
    writeln!(w, "{:<11} {:>6} {:>12} {:>10} {:>4} {:>5}", "method", "size", "mean", "sem", "n", "fail")?;
    for c in &stats.cells {
        let mean = c.mean.map_or("-".to_string(), |v| format!("{v:.6}"));
        let sem = c.sem.map_or("-".to_string(), |v| format!("{v:.6}"));
        writeln!(
            w,
            "{:<11} {:>6} {:>12} {:>10} {:>4} {:>5}",
            c.method.name(),
            c.sample_size,
            mean,
            sem,
            c.n,
            c.failures
        )?;
    }
    Ok(())
}
