//! Datasets: synthetic power surfaces, CSV ingestion, centering/scaling and
//! train/validation/selection/test splits.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::pca::{column_means, column_std};

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub x: Matrix,
    pub feature_names: Option<Vec<String>>,
    /// Subtracted column offsets (zeros when untransformed).
    pub center: Vec<f64>,
    /// Column divisors (ones when untransformed).
    pub scale: Vec<f64>,
    pub is_transformed: bool,
}

impl Dataset {
    pub fn new(x: Matrix, feature_names: Option<Vec<String>>) -> Result<Self> {
        if let Some(names) = &feature_names {
            if names.len() != x.cols() {
                return Err(Error::Shape(format!(
                    "{} feature names for {} columns",
                    names.len(),
                    x.cols()
                )));
            }
        }
        let n = x.cols();
        Ok(Self {
            x,
            feature_names,
            center: vec![0.0; n],
            scale: vec![1.0; n],
            is_transformed: false,
        })
    }

    pub fn rows(&self) -> usize {
        self.x.rows()
    }

    pub fn cols(&self) -> usize {
        self.x.cols()
    }

    fn column_label(&self, j: usize) -> String {
        match &self.feature_names {
            Some(names) => format!("{j} ({})", names[j]),
            None => j.to_string(),
        }
    }
}

/// Points `(x, y, xⁿ + yⁿ)` with `x, y` uniform on `[0, 1]`.
pub fn gen_power_surface<R: Rng + ?Sized>(count: usize, exponent: f64, rng: &mut R) -> Result<Dataset> {
    if count == 0 {
        return Err(Error::Config("count must be at least 1".into()));
    }
    if !(exponent >= 1.0) || !exponent.is_finite() {
        return Err(Error::Config(format!("exponent {exponent} must be >= 1")));
    }
    let mut data = Vec::with_capacity(count * 3);
    for _ in 0..count {
        let x: f64 = rng.gen();
        let y: f64 = rng.gen();
        data.extend_from_slice(&[x, y, x.powf(exponent) + y.powf(exponent)]);
    }
    Dataset::new(
        Matrix::new(count, 3, data)?,
        Some(vec!["x".into(), "y".into(), "z".into()]),
    )
}

/// Reads a rectangular numeric CSV. A first row containing any non-numeric
/// cell is taken as the header.
pub fn load_csv(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file)
}

pub fn read_csv(reader: impl std::io::Read) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let mut header: Option<Vec<String>> = None;
    let mut width: Option<usize> = None;
    let mut data = Vec::new();
    let mut rows = 0;
    for (line, record) in rdr.records().enumerate() {
        let record = record?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        let parsed: Vec<std::result::Result<f64, _>> =
            record.iter().map(str::parse::<f64>).collect();
        if line == 0 && parsed.iter().any(|v| v.is_err()) {
            header = Some(record.iter().map(str::to_owned).collect());
            width = Some(record.len());
            continue;
        }
        let expected = *width.get_or_insert(record.len());
        if record.len() != expected {
            return Err(Error::Parse {
                row: line + 1,
                col: record.len().min(expected) + 1,
                msg: format!("expected {expected} fields, found {}", record.len()),
            });
        }
        for (col, (value, text)) in parsed.into_iter().zip(record.iter()).enumerate() {
            match value {
                Ok(v) if v.is_finite() => data.push(v),
                _ => {
                    return Err(Error::Parse {
                        row: line + 1,
                        col: col + 1,
                        msg: format!("not a finite number: {text:?}"),
                    })
                }
            }
        }
        rows += 1;
    }
    if rows == 0 {
        return Err(Error::Parse {
            row: 1,
            col: 1,
            msg: "no data rows".into(),
        });
    }
    let cols = width.expect("set with the first row");
    Dataset::new(Matrix::new(rows, cols, data)?, header)
}

/// Writes `dataset.x` as CSV, with a header row when feature names exist.
/// Values use the shortest decimal form that parses back to the same `f64`.
pub fn save_csv(dataset: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_csv(dataset, &mut w).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_csv(dataset: &Dataset, w: &mut impl Write) -> std::io::Result<()> {
    if let Some(names) = &dataset.feature_names {
        writeln!(w, "{}", names.join(","))?;
    }
    for row in dataset.x.iter_rows() {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
        writeln!(w, "{}", cells.join(","))?;
    }
    Ok(())
}

/// Centering and optional scaling fitted on one split and applied to others.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transform {
    pub center: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Transform {
    /// Column means, and population standard deviations if `scale` is set.
    pub fn fit(dataset: &Dataset, scale: bool) -> Result<Self> {
        if dataset.is_transformed {
            return Err(Error::Config("dataset is already transformed".into()));
        }
        let center = column_means(&dataset.x);
        let scale = if scale {
            let sd = column_std(&dataset.x, &center);
            if let Some(j) = sd.iter().position(|&s| s == 0.0) {
                return Err(Error::ZeroVariance {
                    column: dataset.column_label(j),
                });
            }
            sd
        } else {
            vec![1.0; dataset.cols()]
        };
        Ok(Self { center, scale })
    }

    pub fn apply(&self, x: &Matrix) -> Matrix {
        let mut out = x.clone();
        for i in 0..out.rows() {
            for ((v, c), s) in out.row_mut(i).iter_mut().zip(&self.center).zip(&self.scale) {
                *v = (*v - c) / s;
            }
        }
        out
    }

    pub fn invert(&self, z: &Matrix) -> Matrix {
        let mut out = z.clone();
        for i in 0..out.rows() {
            for ((v, c), s) in out.row_mut(i).iter_mut().zip(&self.center).zip(&self.scale) {
                *v = *v * s + c;
            }
        }
        out
    }

    pub fn transform(&self, dataset: &Dataset) -> Result<Dataset> {
        if dataset.is_transformed {
            return Err(Error::Config("dataset is already transformed".into()));
        }
        Ok(Dataset {
            x: self.apply(&dataset.x),
            feature_names: dataset.feature_names.clone(),
            center: self.center.clone(),
            scale: self.scale.clone(),
            is_transformed: true,
        })
    }
}

/// Fits a [`Transform`] on `dataset` and applies it.
pub fn fit_transform(dataset: &Dataset, scale: bool) -> Result<(Dataset, Transform)> {
    let t = Transform::fit(dataset, scale)?;
    Ok((t.transform(dataset)?, t))
}

pub fn inverse_transform(dataset: &Dataset) -> Dataset {
    if !dataset.is_transformed {
        return dataset.clone();
    }
    let t = Transform {
        center: dataset.center.clone(),
        scale: dataset.scale.clone(),
    };
    let n = dataset.cols();
    Dataset {
        x: t.invert(&dataset.x),
        feature_names: dataset.feature_names.clone(),
        center: vec![0.0; n],
        scale: vec![1.0; n],
        is_transformed: false,
    }
}

/// Size of the held-out test set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestSize {
    Count(usize),
    Fraction(f64),
}

/// How to split a dataset. The test set is drawn first; an optional
/// `pool_size` then subsamples the remaining rows before the pool is divided
/// into train/validation/selection shares.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitSpec {
    pub train_frac: f64,
    pub val_frac: f64,
    pub select_frac: f64,
    pub test: Option<TestSize>,
    pub pool_size: Option<usize>,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self {
            train_frac: 0.8,
            val_frac: 0.1,
            select_frac: 0.1,
            test: None,
            pool_size: None,
            seed: 0,
        }
    }
}

/// Row indices of each split.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub select: Vec<usize>,
    pub test: Vec<usize>,
}

impl SplitIndices {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

pub fn split(dataset: &Dataset, spec: &SplitSpec) -> Result<SplitIndices> {
    split_rows(dataset.rows(), spec)
}

/// Index-level split of `rows` rows. Validation and selection sizes are
/// rounded down; train receives the remainder.
pub fn split_rows(rows: usize, spec: &SplitSpec) -> Result<SplitIndices> {
    let fracs = [spec.train_frac, spec.val_frac, spec.select_frac];
    if fracs.iter().any(|&f| !(f > 0.0)) {
        return Err(Error::Config("split fractions must be positive".into()));
    }
    if (fracs.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(Error::Config(
            "train + val + select fractions must sum to 1".into(),
        ));
    }
    let test_count = match spec.test {
        None => 0,
        Some(TestSize::Count(c)) => c,
        Some(TestSize::Fraction(f)) => {
            if !(f > 0.0 && f < 1.0) {
                return Err(Error::Config(format!("test fraction {f} not in (0, 1)")));
            }
            (f * rows as f64).floor() as usize
        }
    };
    if spec.test.is_some() && test_count == 0 {
        return Err(Error::Config("empty test split".into()));
    }
    if test_count >= rows {
        return Err(Error::Config(format!(
            "test size {test_count} leaves no rows out of {rows}"
        )));
    }
    let mut order: Vec<usize> = (0..rows).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(spec.seed));
    let (test, rest) = order.split_at(test_count);
    let pool = match spec.pool_size {
        Some(p) if p > rest.len() => {
            return Err(Error::Config(format!(
                "pool size {p} exceeds the {} available rows",
                rest.len()
            )))
        }
        Some(p) => &rest[..p],
        None => rest,
    };
    let p = pool.len() as f64;
    let n_val = (spec.val_frac * p + 1e-9).floor() as usize;
    let n_select = (spec.select_frac * p + 1e-9).floor() as usize;
    let n_train = pool.len() - n_val - n_select;
    if n_val == 0 || n_select == 0 || n_train == 0 {
        return Err(Error::Config(format!(
            "pool of {} rows gives an empty split ({n_train}/{n_val}/{n_select})",
            pool.len()
        )));
    }
    Ok(SplitIndices {
        train: pool[..n_train].to_vec(),
        val: pool[n_train..n_train + n_val].to_vec(),
        select: pool[n_train + n_val..].to_vec(),
        test: test.to_vec(),
    })
}
