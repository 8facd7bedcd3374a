//! PCA-initialized PReLU autoencoders for nonlinear dimensionality reduction
//! on small datasets.
//!
//! An autoencoder whose PReLU slopes all equal 1 is a linear map. With the
//! right weights it reproduces rank-q PCA exactly. Training then lets the
//! slopes move away from 1, so the network starts from the PCA solution and
//! bends only as far as the data supports.
//!
//! - [`linalg`]: dense matrices, SVD, pseudo-inverse, Haar random orthonormal matrices
//! - [`pca`]: rank-q PCA and the average projection error
//! - [`autoencoder`]: vase-shaped PReLU network, backpropagation, Adam, early stopping
//! - [`init`]: PCA-Robust and PCA-Naive initializations and their verifier
//! - [`data`]: synthetic power surfaces, CSV, centering/scaling, splits
//! - [`bench`]: seeded trial grids comparing PCA, PCA-Robust, PCA-Naive and Random
//! - [`cli`]: the `pcaboost` command-line tool
//!
//! ```
//! use pcaboost::data::gen_power_surface;
//! use pcaboost::init::{pca_robust_init_with, verify_init, RobustOptions};
//! use pcaboost::{Architecture, PcaModel};
//! use rand::SeedableRng;
//!
//! let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
//! let data = gen_power_surface(40, 4.0, &mut rng).unwrap();
//! let arch: Architecture = "3-20-3-2-3-20-3".parse().unwrap();
//! let pca = PcaModel::fit(&data.x, arch.q()).unwrap();
//!
//! let init = pca_robust_init_with(&pca, &arch, &mut rng, RobustOptions::default()).unwrap();
//! let report = verify_init(&init.params, &data.x, &pca, 1e-8).unwrap();
//! assert!(report.passed);
//! ```

pub mod autoencoder;
pub mod bench;
pub mod cli;
pub mod data;
pub mod error;
pub mod init;
pub mod linalg;
pub mod pca;

pub use autoencoder::{AeParams, Architecture};
pub use data::Dataset;
pub use error::{Error, Result};
pub use linalg::Matrix;
pub use pca::PcaModel;
