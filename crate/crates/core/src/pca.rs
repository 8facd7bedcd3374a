//! Rank-q principal component analysis.

use serde::{Deserialize, Serialize};

use crate::autoencoder::loss::mean_distance;
use crate::error::{Error, Result};
use crate::linalg::{default_pinv_tolerance, svd, Matrix};

/// Units in which reconstruction errors are measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorUnits {
    /// The units of the data passed in by the caller.
    #[default]
    Original,
    /// After centering and per-feature scaling.
    Standardized,
}

/// Fitted rank-q PCA.
///
/// `v` holds the loadings (`n × q`, orthonormal columns). Each column is
/// sign-normalized so its largest-magnitude entry is positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "PcaDocument", try_from = "PcaDocument")]
pub struct PcaModel {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
    pub v: Matrix,
    pub s: Vec<f64>,
    pub q: usize,
    /// Set when the data had numerical rank below `q`; the trailing
    /// components then carry (near) zero singular values.
    pub rank_deficient: bool,
}

impl PcaModel {
    /// Fits on centered, unscaled data.
    pub fn fit(x: &Matrix, q: usize) -> Result<Self> {
        Self::fit_with(x, q, false)
    }

    /// Fits on centered data, optionally dividing each feature by its
    /// population standard deviation first.
    pub fn fit_with(x: &Matrix, q: usize, scale: bool) -> Result<Self> {
        let (m, n) = x.shape();
        if m < 2 {
            return Err(Error::Shape(format!("PCA needs at least 2 rows, got {m}")));
        }
        if q == 0 || q > m.min(n) {
            return Err(Error::Shape(format!(
                "q = {q} must lie in 1..={} for {m}x{n} data",
                m.min(n)
            )));
        }
        let mean = column_means(x);
        let scale = if scale {
            let sd = column_std(x, &mean);
            if let Some(j) = sd.iter().position(|&s| s == 0.0) {
                return Err(Error::ZeroVariance {
                    column: j.to_string(),
                });
            }
            sd
        } else {
            vec![1.0; n]
        };
        let z = standardize_with(x, &mean, &scale);
        let dec = svd(&z)?;

        let tol = default_pinv_tolerance(z.shape(), dec.s[0]);
        let rank = dec.s.iter().filter(|&&s| s > tol).count();
        let rank_deficient = rank < q;
        if rank_deficient {
            log::warn!("data rank {rank} is below requested q = {q}");
        }

        let mut v = dec.v.leading_columns(q);
        for j in 0..q {
            let col = v.column(j);
            let pivot = col
                .iter()
                .copied()
                .fold(0.0_f64, |best, c| if c.abs() > best.abs() { c } else { best });
            if pivot < 0.0 {
                for i in 0..n {
                    v[(i, j)] = -v[(i, j)];
                }
            }
        }
        Ok(Self {
            mean,
            scale,
            v,
            s: dec.s[..q].to_vec(),
            q,
            rank_deficient,
        })
    }

    pub fn n_features(&self) -> usize {
        self.mean.len()
    }

    fn check_cols(&self, x: &Matrix, expected: usize) -> Result<()> {
        if x.cols() != expected {
            return Err(Error::Shape(format!(
                "expected {expected} columns, got {}",
                x.cols()
            )));
        }
        Ok(())
    }

    /// Centers and scales `x` with the fitted parameters.
    pub fn standardize(&self, x: &Matrix) -> Result<Matrix> {
        self.check_cols(x, self.n_features())?;
        Ok(standardize_with(x, &self.mean, &self.scale))
    }

    /// Inverse of [`PcaModel::standardize`].
    pub fn unstandardize(&self, z: &Matrix) -> Result<Matrix> {
        self.check_cols(z, self.n_features())?;
        let mut out = z.clone();
        for i in 0..out.rows() {
            for ((v, m), s) in out.row_mut(i).iter_mut().zip(&self.mean).zip(&self.scale) {
                *v = *v * s + m;
            }
        }
        Ok(out)
    }

    /// `m × q` scores.
    pub fn project(&self, x: &Matrix) -> Result<Matrix> {
        Ok(self.standardize(x)?.matmul(&self.v))
    }

    /// Maps scores back to the original (un-scaled, un-centered) space.
    pub fn reconstruct(&self, scores: &Matrix) -> Result<Matrix> {
        self.check_cols(scores, self.q)?;
        self.unstandardize(&scores.matmul_t(&self.v))
    }

    pub fn reconstruct_data(&self, x: &Matrix) -> Result<Matrix> {
        self.reconstruct(&self.project(x)?)
    }

    /// Mean over rows of the Euclidean distance between each row and its
    /// reconstruction, in original units.
    pub fn avg_projection_error(&self, x: &Matrix) -> Result<f64> {
        self.avg_projection_error_in(x, ErrorUnits::Original)
    }

    pub fn avg_projection_error_in(&self, x: &Matrix, units: ErrorUnits) -> Result<f64> {
        let recon = self.reconstruct_data(x)?;
        Ok(match units {
            ErrorUnits::Original => mean_distance(x, &recon),
            ErrorUnits::Standardized => {
                mean_distance(&self.standardize(x)?, &self.standardize(&recon)?)
            }
        })
    }
}

pub(crate) fn column_means(x: &Matrix) -> Vec<f64> {
    let mut mean = vec![0.0; x.cols()];
    for row in x.iter_rows() {
        for (m, v) in mean.iter_mut().zip(row) {
            *m += v;
        }
    }
    let rows = x.rows() as f64;
    mean.iter_mut().for_each(|m| *m /= rows);
    mean
}

/// Population standard deviation (divisor `m`).
pub(crate) fn column_std(x: &Matrix, mean: &[f64]) -> Vec<f64> {
    let mut var = vec![0.0; x.cols()];
    for row in x.iter_rows() {
        for ((acc, v), m) in var.iter_mut().zip(row).zip(mean) {
            *acc += (v - m).powi(2);
        }
    }
    let rows = x.rows() as f64;
    var.into_iter().map(|v| (v / rows).sqrt()).collect()
}

pub(crate) fn standardize_with(x: &Matrix, mean: &[f64], scale: &[f64]) -> Matrix {
    let mut out = x.clone();
    for i in 0..out.rows() {
        for ((v, m), s) in out.row_mut(i).iter_mut().zip(mean).zip(scale) {
            *v = (*v - m) / s;
        }
    }
    out
}

/// On-disk form: loadings stored as a flat column-major list.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PcaDocument {
    n: usize,
    q: usize,
    mean: Vec<f64>,
    scale: Vec<f64>,
    v: Vec<f64>,
    s: Vec<f64>,
    #[serde(default)]
    rank_deficient: bool,
}

impl From<PcaModel> for PcaDocument {
    fn from(m: PcaModel) -> Self {
        let n = m.n_features();
        let v = (0..m.q)
            .flat_map(|j| (0..n).map(move |i| (i, j)))
            .map(|idx| m.v[idx])
            .collect();
        Self {
            n,
            q: m.q,
            mean: m.mean,
            scale: m.scale,
            v,
            s: m.s,
            rank_deficient: m.rank_deficient,
        }
    }
}

impl TryFrom<PcaDocument> for PcaModel {
    type Error = Error;

    fn try_from(d: PcaDocument) -> Result<Self> {
        if d.mean.len() != d.n || d.scale.len() != d.n || d.s.len() != d.q || d.q > d.n {
            return Err(Error::Shape("inconsistent PCA document".into()));
        }
        if d.scale.iter().any(|&s| !(s > 0.0)) {
            return Err(Error::Config("PCA scale entries must be positive".into()));
        }
        let col_major = Matrix::new(d.q, d.n, d.v)?;
        Ok(Self {
            mean: d.mean,
            scale: d.scale,
            v: col_major.transpose(),
            s: d.s,
            q: d.q,
            rank_deficient: d.rank_deficient,
        })
    }
}
