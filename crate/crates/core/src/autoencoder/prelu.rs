/// Parametric ReLU: `z` for `z >= 0`, `alpha * z` otherwise.
#[inline]
pub fn prelu(z: f64, alpha: f64) -> f64 {
    if z >= 0.0 {
        z
    } else {
        alpha * z
    }
}

/// Partial derivatives `(d/dz, d/dalpha)`.
#[inline]
pub fn prelu_grad(z: f64, alpha: f64) -> (f64, f64) {
    if z >= 0.0 {
        (1.0, 0.0)
    } else {
        (alpha, z)
    }
}
