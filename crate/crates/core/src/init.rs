//! PCA-based initializations.
//!
//! Both initializations produce a linear network (all slopes 1, zero biases)
//! whose output on centered data equals the rank-q PCA reconstruction.
//!
//! * PCA-Robust builds every non-bottleneck layer so that each prefix product
//!   on either side of the bottleneck is a random matrix with orthonormal
//!   rows. Every layer is then norm preserving on the input space.
//! * PCA-Naive draws the non-bottleneck layers at random and solves only the
//!   two bottleneck layers with pseudo-inverses. It is exact in theory but
//!   the conditioning of the random products is left uncontrolled.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::autoencoder::network::random_weights;
use crate::autoencoder::{AeParams, Architecture};
use crate::error::{Error, Result};
use crate::linalg::{chain_product, condition_number, norm, pinv, random_orthonormal, Matrix};
use crate::pca::PcaModel;

/// Options for [`pca_robust_init_with`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RobustOptions {
    /// Draw a separate random orthonormal target for the decoder side
    /// instead of reusing the encoder's.
    pub independent_decoder_basis: bool,
}

/// An initialized network together with the PCA it replicates.
#[derive(Debug, Clone)]
pub struct PcaInit {
    pub params: AeParams,
    pub pca: PcaModel,
}

/// Splits `a` (`arch[0] × arch[last]`) into a chain of matrices with shapes
/// `arch[i] × arch[i + 1]` whose product is `a`.
///
/// Each step draws a random orthonormal `B` of shape `arch[0] × arch[k-1]`,
/// solves `B · W = a` with `W = B† · a`, and recurses on `B`. Every prefix
/// of the returned chain is therefore a matrix with orthonormal rows when `a`
/// has orthonormal rows.
pub fn rwi<R: Rng + ?Sized>(a: &Matrix, arch: &[usize], rng: &mut R) -> Result<Vec<Matrix>> {
    let (Some(&first), Some(&last)) = (arch.first(), arch.last()) else {
        return Err(Error::Architecture("empty width list".into()));
    };
    if first != a.rows() || last != a.cols() {
        return Err(Error::Shape(format!(
            "matrix {:?} does not match widths {first}..{last}",
            a.shape()
        )));
    }
    if let Some(&w) = arch.iter().find(|&&w| w < first) {
        return Err(Error::Architecture(format!(
            "width {w} is below the input width {first}"
        )));
    }
    if arch.len() <= 2 {
        return Ok(vec![a.clone()]);
    }
    let inner = &arch[..arch.len() - 1];
    let b = random_orthonormal(first, inner[inner.len() - 1], rng);
    let w = pinv(&b, None)?.matmul(a);
    let mut chain = rwi(&b, inner, rng)?;
    chain.push(w);
    Ok(chain)
}

/// Chain for one side of the bottleneck; empty when the side has no
/// non-bottleneck layer.
fn robust_side<R: Rng + ?Sized>(a: &Matrix, widths: &[usize], rng: &mut R) -> Result<Vec<Matrix>> {
    if widths.len() < 2 {
        Ok(Vec::new())
    } else {
        rwi(a, widths, rng)
    }
}

/// PCA-Robust initialization fitted on `x_train`, which should already be
/// centered (and scaled, if scaling is wanted).
pub fn pca_robust_init<R: Rng + ?Sized>(
    x_train: &Matrix,
    arch: &Architecture,
    rng: &mut R,
) -> Result<PcaInit> {
    let pca = PcaModel::fit(x_train, arch.q())?;
    pca_robust_init_with(&pca, arch, rng, RobustOptions::default())
}

/// PCA-Robust initialization from an existing PCA model. The network
/// operates in the model's standardized coordinates.
pub fn pca_robust_init_with<R: Rng + ?Sized>(
    pca: &PcaModel,
    arch: &Architecture,
    rng: &mut R,
    opts: RobustOptions,
) -> Result<PcaInit> {
    check_compatible(pca, arch)?;
    let n = arch.n_inputs();
    let a = random_orthonormal(n, n, rng);
    let enc = robust_side(&a, arch.encoder_widths(), rng)?;
    let a_dec = if opts.independent_decoder_basis {
        random_orthonormal(n, n, rng)
    } else {
        a
    };
    let dec = robust_side(&a_dec, arch.decoder_widths(), rng)?;
    // P has orthonormal columns, so P† = Pᵀ.
    assemble(pca, arch, enc, dec, |p| Ok(p.transpose()))
}

/// PCA-Naive initialization fitted on `x_train`.
pub fn pca_naive_init<R: Rng + ?Sized>(
    x_train: &Matrix,
    arch: &Architecture,
    rng: &mut R,
) -> Result<PcaInit> {
    let pca = PcaModel::fit(x_train, arch.q())?;
    pca_naive_init_with(&pca, arch, rng)
}

pub fn pca_naive_init_with<R: Rng + ?Sized>(
    pca: &PcaModel,
    arch: &Architecture,
    rng: &mut R,
) -> Result<PcaInit> {
    check_compatible(pca, arch)?;
    let side = |widths: &[usize], rng: &mut R| {
        if widths.len() < 2 {
            Vec::new()
        } else {
            random_weights(widths, rng)
        }
    };
    let enc = side(arch.encoder_widths(), rng);
    let dec = side(arch.decoder_widths(), rng);
    for (label, chain) in [("encoder", &enc), ("decoder", &dec)] {
        if !chain.is_empty() {
            let cond = condition_number(&chain_product(chain, arch.n_inputs()))?;
            log::debug!("PCA-Naive {label} product condition number {cond:.3e}");
        }
    }
    assemble(pca, arch, enc, dec, |p| pinv(p, None))
}

fn check_compatible(pca: &PcaModel, arch: &Architecture) -> Result<()> {
    arch.check_vase()?;
    if pca.n_features() != arch.n_inputs() || pca.q != arch.q() {
        return Err(Error::Shape(format!(
            "PCA with n = {}, q = {} does not fit architecture {arch}",
            pca.n_features(),
            pca.q
        )));
    }
    Ok(())
}

/// Solves the bottleneck layers `W_enc = (∏enc)† · P` and
/// `W_dec = P† · (∏dec)†` and assembles the full weight list.
fn assemble(
    pca: &PcaModel,
    arch: &Architecture,
    enc: Vec<Matrix>,
    dec: Vec<Matrix>,
    pinv_p: impl Fn(&Matrix) -> Result<Matrix>,
) -> Result<PcaInit> {
    let n = arch.n_inputs();
    let p = &pca.v;
    let w_enc = pinv(&chain_product(&enc, n), None)?.matmul(p);
    let w_dec = pinv_p(p)?.matmul(&pinv(&chain_product(&dec, n), None)?);
    let mut weights = enc;
    weights.push(w_enc);
    weights.push(w_dec);
    weights.extend(dec);
    let params = AeParams::from_weights(arch.clone(), weights)?;
    Ok(PcaInit {
        params,
        pca: pca.clone(),
    })
}

/// Diagnostics for an initialized network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitReport {
    /// Largest absolute deviation between the network output and the PCA
    /// reconstruction, divided by the largest absolute reconstruction entry.
    /// Both are taken in the PCA's standardized coordinates.
    pub pca_equivalence_residual: f64,
    /// Condition numbers of the encoder prefix products, then the decoder
    /// prefix products (bottleneck layers excluded).
    pub prefix_condition_numbers: Vec<f64>,
    /// Largest `|‖x·M‖ − ‖x‖| / ‖x‖` over probe rows `x` and prefix products `M`.
    pub norm_preservation_residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl InitReport {
    pub fn max_condition_number(&self) -> f64 {
        self.prefix_condition_numbers
            .iter()
            .copied()
            .fold(1.0, f64::max)
    }
}

/// Prefix products `W₁`, `W₁W₂`, … of the non-bottleneck layers on each side
/// of the bottleneck, encoder side first.
pub fn prefix_products(params: &AeParams) -> Vec<Matrix> {
    let b = params.arch.bottleneck_index();
    let enc = &params.weights[..b - 1];
    let dec = &params.weights[b + 1..];
    let mut out = Vec::new();
    for side in [enc, dec] {
        let mut acc: Option<Matrix> = None;
        for w in side {
            let next = match acc {
                None => w.clone(),
                Some(m) => m.matmul(w),
            };
            out.push(next.clone());
            acc = Some(next);
        }
    }
    out
}

/// Measures how closely `params` replicates `pca` on `x_probe` (given in the
/// original data units) and how well its non-bottleneck layers preserve
/// norms. Verification is diagnostic: a report is produced for any network.
pub fn verify_init(
    params: &AeParams,
    x_probe: &Matrix,
    pca: &PcaModel,
    tol: f64,
) -> Result<InitReport> {
    let z = pca.standardize(x_probe)?;
    let out = params.predict(&z)?;
    let reference = z.matmul(&pca.v).matmul_t(&pca.v);
    let scale = reference.max_abs().max(f64::MIN_POSITIVE);
    let residual = out.sub(&reference).max_abs() / scale;

    let prefixes = prefix_products(params);
    let prefix_condition_numbers = prefixes
        .iter()
        .map(condition_number)
        .collect::<Result<Vec<_>>>()?;
    let mut norm_residual: f64 = 0.0;
    for m in &prefixes {
        let mapped = z.matmul(m);
        for (row, image) in z.iter_rows().zip(mapped.iter_rows()) {
            let r = norm(row);
            if r > 0.0 {
                norm_residual = norm_residual.max((norm(image) - r).abs() / r);
            }
        }
    }
    Ok(InitReport {
        pca_equivalence_residual: residual,
        prefix_condition_numbers,
        norm_preservation_residual: norm_residual,
        tolerance: tol,
        passed: residual < tol,
    })
}
