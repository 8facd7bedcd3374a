//! Samples the surface z = x^e + y^e and shows how a 2-component PCA fit
//! degrades as the exponent bends the surface away from a plane.
//!
//! ```text
//! cargo run --example power_surface -- [out.csv]
//! ```

use pcaboost::data::{gen_power_surface, save_csv};
use pcaboost::pca::PcaModel;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> pcaboost::Result<()> {
    println!("{:>8}  {:>12}  {:>12}", "exponent", "PCA error", "3rd sv");
    for exponent in [1.0, 1.1, 2.0, 4.0, 8.0] {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let data = gen_power_surface(1000, exponent, &mut rng)?;
        let pca = PcaModel::fit(&data.x, 2)?;
        // The discarded singular value measures how far the cloud is from a plane.
        let full = PcaModel::fit(&data.x, 3)?;
        println!(
            "{exponent:>8.1}  {:>12.6}  {:>12.6}",
            pca.avg_projection_error(&data.x)?,
            full.s[2]
        );
    }

    if let Some(path) = std::env::args().nth(1) {
        let data = gen_power_surface(1000, 4.0, &mut ChaCha8Rng::seed_from_u64(0))?;
        save_csv(&data, &path)?;
        println!("wrote {} rows to {path}", data.rows());
    }
    Ok(())
}
