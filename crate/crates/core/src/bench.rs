//! Experiment harness.
//!
//! A trial draws one data split, fits the centering/scaling transform on its
//! training rows, then either fits PCA directly or trains `restarts`
//! autoencoder candidates and keeps the one with the lowest error on the
//! model-selection rows. The kept model is scored on the test rows in
//! original units.
//!
//! # Seed tree
//!
//! Every random draw is keyed off the master seed with [`derive_seed`]:
//!
//! | purpose               | path                                          |
//! |-----------------------|-----------------------------------------------|
//! | synthetic data        | `[0]`                                         |
//! | split of (size, rep)  | `[1, size, rep]`                              |
//! | init of one restart   | `[2, size, rep, method id, restart]`          |
//!
//! The split path does not include the method, so all methods of one
//! repetition see the same rows.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Mutex;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::autoencoder::{mean_distance, train, AeParams, Architecture, EpochRecord, TrainConfig};
use crate::data::{gen_power_surface, load_csv, split_rows, Dataset, SplitIndices, SplitSpec, TestSize, Transform};
use crate::error::{Error, Result};
use crate::init::{pca_naive_init_with, pca_robust_init_with, RobustOptions};
use crate::linalg::Matrix;
use crate::pca::{ErrorUnits, PcaModel};

/// Dimensionality reduction methods under comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "PCA", alias = "pca")]
    Pca,
    #[serde(rename = "PCA-Robust", alias = "pca_robust", alias = "pca-robust")]
    PcaRobust,
    #[serde(rename = "PCA-Naive", alias = "pca_naive", alias = "pca-naive")]
    PcaNaive,
    #[serde(rename = "Random", alias = "random")]
    Random,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Pca, Method::PcaRobust, Method::PcaNaive, Method::Random];

    pub fn name(self) -> &'static str {
        match self {
            Method::Pca => "PCA",
            Method::PcaRobust => "PCA-Robust",
            Method::PcaNaive => "PCA-Naive",
            Method::Random => "Random",
        }
    }

    fn id(self) -> u64 {
        match self {
            Method::Pca => 0,
            Method::PcaRobust => 1,
            Method::PcaNaive => 2,
            Method::Random => 3,
        }
    }

    pub fn is_autoencoder(self) -> bool {
        self != Method::Pca
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.to_ascii_lowercase().replace('_', "-");
        Method::ALL
            .into_iter()
            .find(|m| m.name().to_ascii_lowercase() == key)
            .ok_or_else(|| Error::Config(format!("unknown method {s:?}")))
    }
}

/// Where the rows of an experiment come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DataSource {
    /// `count` points of the surface `z = xᵉ + yᵉ`.
    Synthetic { count: usize, exponent: f64 },
    /// A numeric CSV file; relative paths resolve against the config file.
    Csv { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub data: DataSource,
    pub test: TestSize,
    pub architecture: Architecture,
    /// Optional cross-check of the architecture's bottleneck width.
    pub q: Option<usize>,
    pub methods: Vec<Method>,
    pub sample_sizes: Vec<usize>,
    pub repetitions: usize,
    /// Candidates trained per autoencoder trial for model selection.
    pub restarts: usize,
    pub train: TrainConfig,
    /// Divide each feature by its training standard deviation.
    pub scale: bool,
    pub error_units: ErrorUnits,
    pub independent_decoder_basis: bool,
    /// PReLU on the output layer as well.
    pub prelu_output: bool,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            data: DataSource::Synthetic {
                count: 1000,
                exponent: 4.0,
            },
            test: TestSize::Count(250),
            architecture: "3-20-3-2-3-20-3".parse().expect("valid"),
            q: None,
            methods: Method::ALL.to_vec(),
            sample_sizes: vec![20, 30, 40, 50, 80, 100],
            repetitions: 50,
            restarts: 5,
            train: TrainConfig::default(),
            scale: false,
            error_units: ErrorUnits::Original,
            independent_decoder_basis: false,
            prelu_output: false,
            seed: 0,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a JSON config; a relative CSV path is resolved against the
    /// config file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_json(&text)?;
        if let DataSource::Csv { path: csv } = &mut cfg.data {
            if csv.is_relative() {
                if let Some(dir) = path.parent() {
                    *csv = dir.join(&*csv);
                }
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.repetitions == 0 || self.restarts == 0 {
            return Err(Error::Config("repetitions and restarts must be >= 1".into()));
        }
        if self.methods.is_empty() || self.sample_sizes.is_empty() {
            return Err(Error::Config("methods and sample_sizes must be non-empty".into()));
        }
        if let Some(&s) = self.sample_sizes.iter().find(|&&s| s < 10) {
            return Err(Error::Config(format!("sample size {s} is below 10")));
        }
        if let Some(q) = self.q {
            if q != self.architecture.q() {
                return Err(Error::Config(format!(
                    "q = {q} disagrees with architecture {}",
                    self.architecture
                )));
            }
        }
        if self
            .methods
            .iter()
            .any(|m| matches!(m, Method::PcaRobust | Method::PcaNaive))
        {
            self.architecture.check_vase()?;
        }
        self.train.validate()
    }

    /// Generates or loads the full dataset.
    pub fn load_dataset(&self) -> Result<Dataset> {
        let ds = match &self.data {
            DataSource::Synthetic { count, exponent } => {
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(self.seed, &[0]));
                gen_power_surface(*count, *exponent, &mut rng)?
            }
            DataSource::Csv { path } => load_csv(path)?,
        };
        if ds.cols() != self.architecture.n_inputs() {
            return Err(Error::Config(format!(
                "data has {} columns, architecture {} expects {}",
                ds.cols(),
                self.architecture,
                self.architecture.n_inputs()
            )));
        }
        Ok(ds)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Child seed of `master` along `path`, by chained SplitMix64 mixing.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(master), |h, &p| splitmix64(h ^ splitmix64(p)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub method: Method,
    pub sample_size: usize,
    pub repetition: usize,
    /// Mean Euclidean reconstruction error on the test rows (NaN if failed).
    pub test_error: f64,
    pub selected_restart: usize,
    pub epochs_trained: usize,
    pub failed: bool,
}

/// The model kept by a trial.
#[derive(Debug, Clone)]
pub enum TrialModel {
    Pca(PcaModel),
    Autoencoder {
        params: AeParams,
        history: Vec<EpochRecord>,
        best_epoch: usize,
    },
}

#[derive(Debug, Clone)]
pub struct TrialDetail {
    pub result: TrialResult,
    pub split: SplitIndices,
    pub transform: Transform,
    /// `None` when every restart failed.
    pub model: Option<TrialModel>,
}

struct Prepared {
    split: SplitIndices,
    transform: Transform,
    train: Matrix,
    val: Matrix,
    select: Matrix,
    test: Matrix,
    pca: PcaModel,
}

/// A validated config together with its dataset.
pub struct Experiment {
    config: ExperimentConfig,
    dataset: Dataset,
}

impl Experiment {
    pub fn new(config: ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let dataset = config.load_dataset()?;
        Ok(Self { config, dataset })
    }

    pub fn with_dataset(config: ExperimentConfig, dataset: Dataset) -> Result<Self> {
        config.validate()?;
        if dataset.cols() != config.architecture.n_inputs() {
            return Err(Error::Config("dataset width does not match architecture".into()));
        }
        Ok(Self { config, dataset })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.config
    }

    pub fn dataset(&self) -> &Dataset {
        &self.dataset
    }

    pub fn split_for(&self, sample_size: usize, repetition: usize) -> Result<SplitIndices> {
        let spec = SplitSpec {
            test: Some(self.config.test),
            pool_size: Some(sample_size),
            seed: derive_seed(self.config.seed, &[1, sample_size as u64, repetition as u64]),
            ..Default::default()
        };
        split_rows(self.dataset.rows(), &spec)
    }

    fn prepare(&self, sample_size: usize, repetition: usize) -> Result<Prepared> {
        let split = self.split_for(sample_size, repetition)?;
        let x = &self.dataset.x;
        let train_raw = Dataset::new(x.select_rows(&split.train), None)?;
        let transform = Transform::fit(&train_raw, self.config.scale)?;
        let pca = PcaModel::fit(&transform.apply(&train_raw.x), self.config.architecture.q())?;
        Ok(Prepared {
            train: train_raw.x,
            val: x.select_rows(&split.val),
            select: x.select_rows(&split.select),
            test: x.select_rows(&split.test),
            split,
            transform,
            pca,
        })
    }

    /// Error of reconstructions `z_hat` (transformed units) against `raw`.
    fn score(&self, transform: &Transform, raw: &Matrix, z_hat: &Matrix) -> f64 {
        match self.config.error_units {
            ErrorUnits::Original => mean_distance(raw, &transform.invert(z_hat)),
            ErrorUnits::Standardized => mean_distance(&transform.apply(raw), z_hat),
        }
    }

    fn init_params(
        &self,
        method: Method,
        pca: &PcaModel,
        rng: &mut ChaCha8Rng,
    ) -> Result<AeParams> {
        let arch = &self.config.architecture;
        let params = match method {
            Method::PcaRobust => {
                let opts = RobustOptions {
                    independent_decoder_basis: self.config.independent_decoder_basis,
                };
                pca_robust_init_with(pca, arch, rng, opts)?.params
            }
            Method::PcaNaive => pca_naive_init_with(pca, arch, rng)?.params,
            Method::Random => AeParams::random(arch.clone(), rng),
            Method::Pca => unreachable!("PCA has no network"),
        };
        Ok(if self.config.prelu_output {
            params.with_output_prelu()
        } else {
            params
        })
    }

    pub fn run_trial(&self, method: Method, sample_size: usize, repetition: usize) -> Result<TrialResult> {
        Ok(self.run_trial_detailed(method, sample_size, repetition)?.result)
    }

    pub fn run_trial_detailed(
        &self,
        method: Method,
        sample_size: usize,
        repetition: usize,
    ) -> Result<TrialDetail> {
        let prep = self.prepare(sample_size, repetition)?;
        let t = &prep.transform;
        let mut result = TrialResult {
            method,
            sample_size,
            repetition,
            test_error: f64::NAN,
            selected_restart: 0,
            epochs_trained: 0,
            failed: true,
        };

        if method == Method::Pca {
            let z_hat = prep.pca.reconstruct_data(&t.apply(&prep.test))?;
            result.test_error = self.score(t, &prep.test, &z_hat);
            result.failed = !result.test_error.is_finite();
            return Ok(TrialDetail {
                result,
                split: prep.split,
                transform: prep.transform,
                model: Some(TrialModel::Pca(prep.pca)),
            });
        }

        let z_train = t.apply(&prep.train);
        let z_val = t.apply(&prep.val);
        let z_select = t.apply(&prep.select);
        let mut best: Option<(f64, usize, crate::autoencoder::TrainOutcome)> = None;
        for restart in 0..self.config.restarts {
            let seed = derive_seed(
                self.config.seed,
                &[2, sample_size as u64, repetition as u64, method.id(), restart as u64],
            );
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let attempt = self
                .init_params(method, &prep.pca, &mut rng)
                .and_then(|p| train(p, &z_train, &z_val, &self.config.train));
            let outcome = match attempt {
                Ok(o) => o,
                Err(e) if e.is_numerical() => {
                    log::warn!("{method} size {sample_size} rep {repetition} restart {restart}: {e}");
                    continue;
                }
                Err(e) => return Err(e),
            };
            let sel = self.score(t, &prep.select, &outcome.params.predict(&z_select)?);
            if !sel.is_finite() {
                continue;
            }
            if best.as_ref().map_or(true, |(b, _, _)| sel < *b) {
                best = Some((sel, restart, outcome));
            }
        }

        let model = match best {
            None => None,
            Some((_, restart, outcome)) => {
                let z_hat = outcome.params.predict(&t.apply(&prep.test))?;
                result.test_error = self.score(t, &prep.test, &z_hat);
                result.failed = !result.test_error.is_finite();
                result.selected_restart = restart;
                result.epochs_trained = outcome.epochs_trained;
                Some(TrialModel::Autoencoder {
                    params: outcome.params,
                    history: outcome.history,
                    best_epoch: outcome.best_epoch,
                })
            }
        };
        Ok(TrialDetail {
            result,
            split: prep.split,
            transform: prep.transform,
            model,
        })
    }

    /// Grid coordinates in output order: size, then repetition, then method.
    pub fn grid(&self) -> Vec<(Method, usize, usize)> {
        let c = &self.config;
        let mut cells = Vec::new();
        for &size in &c.sample_sizes {
            for rep in 0..c.repetitions {
                for &m in &c.methods {
                    cells.push((m, size, rep));
                }
            }
        }
        cells
    }

    /// Runs the whole grid on `jobs` worker threads. `on_result` sees each
    /// trial as it finishes (in completion order); the returned results are
    /// in grid order.
    pub fn run(
        &self,
        jobs: usize,
        on_result: &(dyn Fn(&TrialResult) + Sync),
    ) -> Result<ExperimentOutcome> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
        let grid = self.grid();
        let results: Result<Vec<TrialResult>> = pool.install(|| {
            grid.par_iter()
                .map(|&(m, size, rep)| {
                    let r = self.run_trial(m, size, rep)?;
                    on_result(&r);
                    Ok(r)
                })
                .collect()
        });
        let results = results?;
        let stats = aggregate(&results);
        Ok(ExperimentOutcome { results, stats })
    }
}

/// Runs `config` with `jobs` workers; shorthand for [`Experiment::run`].
pub fn run_experiment(config: ExperimentConfig, jobs: usize) -> Result<ExperimentOutcome> {
    Experiment::new(config)?.run(jobs, &|_| {})
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub results: Vec<TrialResult>,
    pub stats: AggregateStats,
}

/// Mean and standard error of the test error for one (method, size) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellStats {
    pub method: Method,
    pub sample_size: usize,
    /// `None` when every trial of the cell failed.
    pub mean: Option<f64>,
    /// Sample standard deviation over √n; `None` when fewer than 2 trials.
    pub sem: Option<f64>,
    pub n: usize,
    pub failures: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AggregateStats {
    pub cells: Vec<CellStats>,
}

impl AggregateStats {
    pub fn get(&self, method: Method, sample_size: usize) -> Option<&CellStats> {
        self.cells
            .iter()
            .find(|c| c.method == method && c.sample_size == sample_size)
    }
}

pub fn aggregate(results: &[TrialResult]) -> AggregateStats {
    let mut groups: BTreeMap<(Method, usize), (Vec<f64>, usize)> = BTreeMap::new();
    for r in results {
        let entry = groups.entry((r.method, r.sample_size)).or_default();
        if r.failed {
            entry.1 += 1;
        } else {
            entry.0.push(r.test_error);
        }
    }
    let cells = groups
        .into_iter()
        .map(|((method, sample_size), (values, failures))| {
            let n = values.len();
            let mean = (n > 0).then(|| values.iter().sum::<f64>() / n as f64);
            let sem = mean.filter(|_| n >= 2).map(|mu| {
                let var = values.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / (n - 1) as f64;
                (var / n as f64).sqrt()
            });
            CellStats {
                method,
                sample_size,
                mean,
                sem,
                n,
                failures,
            }
        })
        .collect();
    AggregateStats { cells }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:?}")).unwrap_or_default()
}

/// `method,sample_size,repetition,test_error,selected_restart,epochs,failed`
pub fn write_results_csv(results: &[TrialResult], w: &mut impl Write) -> std::io::Result<()> {
    writeln!(w, "method,sample_size,repetition,test_error,selected_restart,epochs,failed")?;
    for r in results {
        writeln!(
            w,
            "{},{},{},{:?},{},{},{}",
            r.method, r.sample_size, r.repetition, r.test_error, r.selected_restart, r.epochs_trained, r.failed
        )?;
    }
    Ok(())
}

/// `method,sample_size,mean,sem,n,failures`; absent values are empty.
pub fn write_aggregates_csv(stats: &AggregateStats, w: &mut impl Write) -> std::io::Result<()> {
    writeln!(w, "method,sample_size,mean,sem,n,failures")?;
    for c in &stats.cells {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            c.method,
            c.sample_size,
            fmt_opt(c.mean),
            fmt_opt(c.sem),
            c.n,
            c.failures
        )?;
    }
    Ok(())
}

/// Appends each finished trial to a CSV sink; rows arrive in completion order.
pub struct StreamingCsv<W: Write + Send> {
    inner: Mutex<W>,
}

impl<W: Write + Send> StreamingCsv<W> {
    pub fn new(mut inner: W) -> std::io::Result<Self> {
        writeln!(inner, "method,sample_size,repetition,test_error,selected_restart,epochs,failed")?;
        Ok(Self {
            inner: Mutex::new(inner),
        })
    }

    pub fn push(&self, r: &TrialResult) {
        let mut w = self.inner.lock().expect("poisoned");
        let _ = writeln!(
            w,
            "{},{},{},{:?},{},{},{}",
            r.method, r.sample_size, r.repetition, r.test_error, r.selected_restart, r.epochs_trained, r.failed
        );
        let _ = w.flush();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config() -> ExperimentConfig {
        ExperimentConfig {
            data: DataSource::Synthetic {
                count: 200,
                exponent: 4.0,
            },
            test: TestSize::Count(50),
            methods: vec![Method::Pca, Method::PcaRobust],
            sample_sizes: vec![20, 30],
            repetitions: 3,
            restarts: 2,
            train: TrainConfig {
                max_epochs: 30,
                ..Default::default()
            },
            seed: 7,
            ..Default::default()
        }
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
            let json = serde_json::to_string(&m).unwrap();
            assert_eq!(serde_json::from_str::<Method>(&json).unwrap(), m);
        }
        assert_eq!("pca_robust".parse::<Method>().unwrap(), Method::PcaRobust);
        assert!("pcaa".parse::<Method>().is_err());
    }

    #[test]
    fn derived_seeds_differ_by_path() {
        let a = derive_seed(1, &[1, 20, 0]);
        assert_eq!(a, derive_seed(1, &[1, 20, 0]));
        assert_ne!(a, derive_seed(1, &[1, 20, 1]));
        assert_ne!(a, derive_seed(2, &[1, 20, 0]));
        assert_ne!(derive_seed(1, &[1, 2]), derive_seed(1, &[2, 1]));
    }

    #[test]
    fn config_rejects_unknown_keys_and_bad_values() {
        assert!(ExperimentConfig::from_json(r#"{"repetitons": 3}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"repetitions": 0}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"sample_sizes": [5]}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"q": 3}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"architecture": [3,4,2,4,3]}"#).is_err());
        let cfg = ExperimentConfig::from_json(r#"{"methods": ["PCA", "random"], "seed": 4}"#).unwrap();
        assert_eq!(cfg.methods, vec![Method::Pca, Method::Random]);
        let dumped = serde_json::to_string(&ExperimentConfig::default()).unwrap();
        assert_eq!(ExperimentConfig::from_json(&dumped).unwrap(), ExperimentConfig::default());
    }

    #[test]
    fn pca_on_planar_data_is_exact() {
        // Rows on the plane z = x + y.
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let ds = gen_power_surface(120, 1.0, &mut rng).unwrap();
        let cfg = ExperimentConfig {
            data: DataSource::Synthetic {
                count: 120,
                exponent: 1.0,
            },
            test: TestSize::Count(40),
            ..small_config()
        };
        let exp = Experiment::with_dataset(cfg, ds).unwrap();
        let r = exp.run_trial(Method::Pca, 20, 0).unwrap();
        assert!(!r.failed && r.test_error < 1e-12, "{r:?}");
    }

    #[test]
    fn zero_epochs_matches_pca() {
        let cfg = ExperimentConfig {
            train: TrainConfig {
                max_epochs: 0,
                ..Default::default()
            },
            methods: vec![Method::Pca, Method::PcaRobust, Method::PcaNaive],
            ..small_config()
        };
        let exp = Experiment::new(cfg).unwrap();
        let pca = exp.run_trial(Method::Pca, 20, 1).unwrap().test_error;
        let robust = exp.run_trial(Method::PcaRobust, 20, 1).unwrap().test_error;
        let naive = exp.run_trial(Method::PcaNaive, 20, 1).unwrap().test_error;
        assert!((pca - robust).abs() < 1e-8 * pca);
        assert!((pca - naive).abs() < 1e-6 * pca);
    }

    #[test]
    fn trials_are_deterministic_and_paired() {
        let exp = Experiment::new(small_config()).unwrap();
        let a = exp.run_trial(Method::PcaRobust, 30, 2).unwrap();
        assert_eq!(a, exp.run_trial(Method::PcaRobust, 30, 2).unwrap());
        let d1 = exp.run_trial_detailed(Method::Pca, 30, 2).unwrap();
        let d2 = exp.run_trial_detailed(Method::PcaRobust, 30, 2).unwrap();
        assert_eq!(d1.split, d2.split);
        assert_eq!(d1.split.train.len(), 24);
        assert_ne!(d1.split, exp.run_trial_detailed(Method::Pca, 30, 1).unwrap().split);
    }

    #[test]
    fn grid_size_and_order() {
        let exp = Experiment::new(small_config()).unwrap();
        let out = exp.run(2, &|_| {}).unwrap();
        assert_eq!(out.results.len(), 12);
        let keys: Vec<_> = out
            .results
            .iter()
            .map(|r| (r.method, r.sample_size, r.repetition))
            .collect();
        assert_eq!(keys, exp.grid());
        assert_eq!(out.stats.cells.len(), 4);
        let again = exp.run(1, &|_| {}).unwrap();
        assert_eq!(again.results, out.results);
    }

    fn result(method: Method, err: f64, failed: bool) -> TrialResult {
        TrialResult {
            method,
            sample_size: 20,
            repetition: 0,
            test_error: err,
            selected_restart: 0,
            epochs_trained: 0,
            failed,
        }
    }

    #[test]
    fn aggregate_arithmetic() {
        let rs = vec![
            result(Method::Pca, 1.0, false),
            result(Method::Pca, 2.0, false),
            result(Method::Pca, 3.0, false),
            result(Method::Pca, f64::NAN, true),
            result(Method::Random, 4.0, false),
            result(Method::PcaNaive, f64::NAN, true),
        ];
        let s = aggregate(&rs);
        let pca = s.get(Method::Pca, 20).unwrap();
        assert_eq!(pca.mean, Some(2.0));
        assert!((pca.sem.unwrap() - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        assert_eq!((pca.n, pca.failures), (3, 1));
        let single = s.get(Method::Random, 20).unwrap();
        assert_eq!((single.mean, single.sem, single.n), (Some(4.0), None, 1));
        let dead = s.get(Method::PcaNaive, 20).unwrap();
        assert_eq!((dead.mean, dead.n, dead.failures), (None, 0, 1));

        let mut buf = Vec::new();
        write_aggregates_csv(&s, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("method,sample_size,mean,sem,n,failures\n"));
        assert!(text.contains("Random,20,4.0,,1,0"));
        assert!(text.contains("PCA-Naive,20,,,0,1"));
    }
}
