use rand::Rng;
use serde::{Deserialize, Serialize};

use super::arch::Architecture;
use super::loss::objective;
use super::prelu::{prelu, prelu_grad};
use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Weights, biases and PReLU slopes of an autoencoder.
///
/// Row-vector convention: layer `l` maps `a ↦ prelu(a · W_l + b_l, α_l)`, with
/// `W_l` of shape `widths[l] × widths[l + 1]`. Every layer except the output
/// carries per-node slopes; the output layer is linear unless
/// [`AeParams::with_output_prelu`] was applied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams")]
pub struct AeParams {
    pub arch: Architecture,
    pub weights: Vec<Matrix>,
    pub biases: Vec<Vec<f64>>,
    /// One slope vector per activated layer, in layer order.
    pub alphas: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
struct RawParams {
    arch: Architecture,
    weights: Vec<Matrix>,
    biases: Vec<Vec<f64>>,
    alphas: Vec<Vec<f64>>,
}

impl TryFrom<RawParams> for AeParams {
    type Error = Error;

    fn try_from(r: RawParams) -> Result<Self> {
        let p = AeParams {
            arch: r.arch,
            weights: r.weights,
            biases: r.biases,
            alphas: r.alphas,
        };
        p.validate()?;
        Ok(p)
    }
}

/// Same-shaped gradient bundle for [`AeParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Vec<Matrix>,
    pub biases: Vec<Vec<f64>>,
    pub alphas: Vec<Vec<f64>>,
}

impl Gradients {
    /// All partials in the same order as [`AeParams::slices_mut`].
    pub fn slices(&self) -> Vec<&[f64]> {
        self.weights
            .iter()
            .map(Matrix::as_slice)
            .chain(self.biases.iter().map(Vec::as_slice))
            .chain(self.alphas.iter().map(Vec::as_slice))
            .collect()
    }

    pub fn norm(&self) -> f64 {
        self.slices()
            .iter()
            .flat_map(|s| s.iter())
            .map(|g| g * g)
            .sum::<f64>()
            .sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.slices().iter().all(|s| s.iter().all(|g| g.is_finite()))
    }

    pub fn zero_alphas(&mut self) {
        self.alphas.iter_mut().flatten().for_each(|g| *g = 0.0);
    }
}

/// Per-layer values kept by [`AeParams::forward`] for backpropagation.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    /// Pre-activations, one per layer.
    pub pre: Vec<Matrix>,
    /// Layer outputs; `post[0]` is the input.
    pub post: Vec<Matrix>,
}

impl ForwardCache {
    pub fn output(&self) -> &Matrix {
        self.post.last().expect("at least one layer")
    }
}

impl AeParams {
    /// Wraps weights with zero biases and unit slopes (a purely linear net).
    pub fn from_weights(arch: Architecture, weights: Vec<Matrix>) -> Result<Self> {
        let biases = arch.widths()[1..].iter().map(|&w| vec![0.0; w]).collect();
        let alphas = arch.widths()[1..arch.widths().len() - 1]
            .iter()
            .map(|&w| vec![1.0; w])
            .collect();
        let p = Self {
            arch,
            weights,
            biases,
            alphas,
        };
        p.validate()?;
        Ok(p)
    }

    /// Uniform fan-in initialization `U(-1/√fan_in, 1/√fan_in)` with zero
    /// biases and unit slopes.
    pub fn random<R: Rng + ?Sized>(arch: Architecture, rng: &mut R) -> Self {
        let weights = random_weights(arch.widths(), rng);
        Self::from_weights(arch, weights).expect("shapes follow the architecture")
    }

    /// Adds unit slopes to the output layer so it is PReLU-activated too.
    pub fn with_output_prelu(mut self) -> Self {
        if !self.output_activated() {
            self.alphas.push(vec![1.0; self.arch.n_inputs()]);
        }
        self
    }

    pub fn output_activated(&self) -> bool {
        self.alphas.len() == self.weights.len()
    }

    pub fn validate(&self) -> Result<()> {
        let widths = self.arch.widths();
        let layers = self.arch.n_layers();
        if self.weights.len() != layers || self.biases.len() != layers {
            return Err(Error::Shape(format!(
                "expected {layers} weight matrices and bias vectors"
            )));
        }
        if self.alphas.len() != layers - 1 && self.alphas.len() != layers {
            return Err(Error::Shape(format!(
                "expected {} or {layers} slope vectors, got {}",
                layers - 1,
                self.alphas.len()
            )));
        }
        for l in 0..layers {
            if self.weights[l].shape() != (widths[l], widths[l + 1]) {
                return Err(Error::Shape(format!(
                    "layer {l}: weight {:?}, expected {:?}",
                    self.weights[l].shape(),
                    (widths[l], widths[l + 1])
                )));
            }
            if self.biases[l].len() != widths[l + 1] {
                return Err(Error::Shape(format!("layer {l}: bias length")));
            }
            if let Some(a) = self.alphas.get(l) {
                if a.len() != widths[l + 1] {
                    return Err(Error::Shape(format!("layer {l}: slope length")));
                }
            }
        }
        let finite = self.weights.iter().all(Matrix::is_finite)
            && self
                .biases
                .iter()
                .chain(&self.alphas)
                .flatten()
                .all(|v| v.is_finite());
        if !finite {
            return Err(Error::Shape("parameters contain non-finite values".into()));
        }
        Ok(())
    }

    pub fn n_params(&self) -> usize {
        self.slices().iter().map(|s| s.len()).sum()
    }

    pub fn slices(&self) -> Vec<&[f64]> {
        self.weights
            .iter()
            .map(Matrix::as_slice)
            .chain(self.biases.iter().map(Vec::as_slice))
            .chain(self.alphas.iter().map(Vec::as_slice))
            .collect()
    }

    /// Mutable views of every parameter: weights, then biases, then slopes.
    pub fn slices_mut(&mut self) -> Vec<&mut [f64]> {
        self.weights
            .iter_mut()
            .map(Matrix::as_mut_slice)
            .chain(self.biases.iter_mut().map(Vec::as_mut_slice))
            .chain(self.alphas.iter_mut().map(Vec::as_mut_slice))
            .collect()
    }

    fn check_input(&self, x: &Matrix, layer: usize) -> Result<()> {
        let expected = self.arch.widths()[layer];
        if x.cols() != expected {
            return Err(Error::Shape(format!(
                "input has {} columns, layer {layer} expects {expected}",
                x.cols()
            )));
        }
        Ok(())
    }

    /// Applies layer `l`, returning its pre- and post-activations.
    fn layer(&self, l: usize, input: &Matrix) -> (Matrix, Matrix) {
        let mut z = input.matmul(&self.weights[l]);
        for i in 0..z.rows() {
            for (v, b) in z.row_mut(i).iter_mut().zip(&self.biases[l]) {
                *v += b;
            }
        }
        let a = match self.alphas.get(l) {
            Some(alpha) => {
                let mut a = z.clone();
                for i in 0..a.rows() {
                    for (v, &al) in a.row_mut(i).iter_mut().zip(alpha) {
                        *v = prelu(*v, al);
                    }
                }
                a
            }
            None => z.clone(),
        };
        (z, a)
    }

    fn run_layers(&self, x: &Matrix, layers: std::ops::Range<usize>) -> Matrix {
        layers.fold(x.clone(), |a, l| self.layer(l, &a).1)
    }

    pub fn forward(&self, x: &Matrix) -> Result<ForwardCache> {
        self.check_input(x, 0)?;
        let layers = self.arch.n_layers();
        let mut pre = Vec::with_capacity(layers);
        let mut post = Vec::with_capacity(layers + 1);
        post.push(x.clone());
        for l in 0..layers {
            let (z, a) = self.layer(l, &post[l]);
            pre.push(z);
            post.push(a);
        }
        Ok(ForwardCache { pre, post })
    }

    /// Network output without keeping the intermediate layers.
    pub fn predict(&self, x: &Matrix) -> Result<Matrix> {
        self.check_input(x, 0)?;
        Ok(self.run_layers(x, 0..self.arch.n_layers()))
    }

    /// Output of the bottleneck layer (`m × q`).
    pub fn encode(&self, x: &Matrix) -> Result<Matrix> {
        self.check_input(x, 0)?;
        Ok(self.run_layers(x, 0..self.arch.bottleneck_index()))
    }

    /// Maps bottleneck codes to the output (`m × n`).
    pub fn decode(&self, codes: &Matrix) -> Result<Matrix> {
        let b = self.arch.bottleneck_index();
        self.check_input(codes, b)?;
        Ok(self.run_layers(codes, b..self.arch.n_layers()))
    }

    /// Training objective on `x` and its gradient with respect to every
    /// parameter.
    pub fn gradients(&self, x: &Matrix) -> Result<(f64, Gradients)> {
        let cache = self.forward(x)?;
        let out = cache.output();
        let loss = objective(x, out);
        let m = x.rows() as f64;

        // dL/d(output)
        let mut upstream = out.sub(x).scale(2.0 / m);
        let layers = self.arch.n_layers();
        let mut gw = vec![Matrix::zeros(1, 1); layers];
        let mut gb = vec![Vec::new(); layers];
        let mut ga: Vec<Vec<f64>> = self.alphas.iter().map(|a| vec![0.0; a.len()]).collect();

        for l in (0..layers).rev() {
            let z = &cache.pre[l];
            // upstream becomes dL/dz
            if let Some(alpha) = self.alphas.get(l) {
                let g_alpha = &mut ga[l];
                for i in 0..z.rows() {
                    let up = upstream.row_mut(i);
                    for (j, (u, &zv)) in up.iter_mut().zip(z.row(i)).enumerate() {
                        let (dz, dalpha) = prelu_grad(zv, alpha[j]);
                        g_alpha[j] += *u * dalpha;
                        *u *= dz;
                    }
                }
            }
            gw[l] = cache.post[l].t_matmul(&upstream);
            let mut bias = vec![0.0; upstream.cols()];
            for row in upstream.iter_rows() {
                for (b, u) in bias.iter_mut().zip(row) {
                    *b += u;
                }
            }
            gb[l] = bias;
            if l > 0 {
                upstream = upstream.matmul_t(&self.weights[l]);
            }
        }
        Ok((
            loss,
            Gradients {
                weights: gw,
                biases: gb,
                alphas: ga,
            },
        ))
    }
}

pub(crate) fn random_weights<R: Rng + ?Sized>(widths: &[usize], rng: &mut R) -> Vec<Matrix> {
    widths
        .windows(2)
        .map(|w| {
            let bound = 1.0 / (w[0] as f64).sqrt();
            Matrix::from_fn(w[0], w[1], |_, _| rng.gen_range(-bound..bound))
        })
        .collect()
}
