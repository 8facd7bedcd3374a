//! Builds PCA-Robust and PCA-Naive initializations for the same PCA model and
//! compares how exactly each reproduces PCA and how well-conditioned its
//! hidden layers are.

use pcaboost::autoencoder::Architecture;
use pcaboost::data::gen_power_surface;
use pcaboost::init::{pca_naive_init_with, pca_robust_init_with, verify_init, RobustOptions};
use pcaboost::pca::PcaModel;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> pcaboost::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let data = gen_power_surface(200, 4.0, &mut rng)?;

    for spec in ["3-20-3-2-3-20-3", "3-50-3-2-3", "3-2-3"] {
        let arch: Architecture = spec.parse()?;
        let pca = PcaModel::fit(&data.x, arch.q())?;

        let robust = pca_robust_init_with(&pca, &arch, &mut rng, RobustOptions::default())?;
        let naive = pca_naive_init_with(&pca, &arch, &mut rng)?;
        let r = verify_init(&robust.params, &data.x, &pca, 1e-8)?;
        let n = verify_init(&naive.params, &data.x, &pca, 1e-6)?;

        println!("{arch}");
        println!(
            "  robust: residual {:.1e}, max cond {:.3}, norm drift {:.1e}",
            r.pca_equivalence_residual,
            r.max_condition_number(),
            r.norm_preservation_residual
        );
        println!(
            "  naive:  residual {:.1e}, max cond {:.3}, norm drift {:.1e}",
            n.pca_equivalence_residual,
            n.max_condition_number(),
            n.norm_preservation_residual
        );
    }

    // The bottleneck code of a robust init spans the PCA score space.
    let arch: Architecture = "3-20-3-2-3-20-3".parse()?;
    let pca = PcaModel::fit(&data.x, 2)?;
    let init = pca_robust_init_with(&pca, &arch, &mut rng, RobustOptions::default())?;
    let z = pca.standardize(&data.x)?;
    let codes = init.params.encode(&z)?;
    let scores = pca.project(&data.x)?;
    println!("first code {:?}\nfirst score {:?}", codes.row(0), scores.row(0));
    Ok(())
}
