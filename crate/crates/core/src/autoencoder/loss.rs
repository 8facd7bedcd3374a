//! Reconstruction losses. Training minimizes the mean squared row distance;
//! results are reported as the mean (unsquared) row distance.

use crate::linalg::Matrix;

/// Mean over rows of the squared Euclidean distance. This is the training
/// objective.
pub fn objective(x: &Matrix, x_hat: &Matrix) -> f64 {
    assert_eq!(x.shape(), x_hat.shape());
    let total: f64 = x
        .as_slice()
        .iter()
        .zip(x_hat.as_slice())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    total / x.rows() as f64
}

/// Mean over rows of the Euclidean distance. This is the reported metric.
pub fn mean_distance(x: &Matrix, x_hat: &Matrix) -> f64 {
    assert_eq!(x.shape(), x_hat.shape());
    let total: f64 = x
        .iter_rows()
        .zip(x_hat.iter_rows())
        .map(|(a, b)| {
            a.iter()
                .zip(b)
                .map(|(p, q)| (p - q) * (p - q))
                .sum::<f64>()
                .sqrt()
        })
        .sum();
    total / x.rows() as f64
}
