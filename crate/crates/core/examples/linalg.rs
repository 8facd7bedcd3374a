//! The dense linear algebra underneath the initializations: Haar-distributed
//! orthonormal matrices, SVD and the pseudo-inverse.

use pcaboost::linalg::{condition_number, pinv, random_orthonormal, svd, Matrix};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> pcaboost::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);

    // 3x20 with orthonormal rows: an isometry from R^3 into R^20.
    let a = random_orthonormal(3, 20, &mut rng);
    let gram = a.matmul_t(&a);
    println!("A·Aᵀ - I: {:.1e}", gram.sub(&Matrix::identity(3)).max_abs());
    println!("cond(A) = {}", condition_number(&a)?);

    let x = Matrix::from_rows(&[[1.0, -2.0, 0.5]])?;
    let y = x.matmul(&a);
    println!("|x| = {:.12}, |xA| = {:.12}", x.frobenius_norm(), y.frobenius_norm());

    // For orthonormal rows the pseudo-inverse is the transpose.
    let p = pinv(&a, None)?;
    println!("pinv(A) - Aᵀ: {:.1e}", p.sub(&a.transpose()).max_abs());

    let b = Matrix::random_normal(5, 4, &mut rng);
    let d = svd(&b)?;
    println!("singular values {:?}", d.s);
    println!("reconstruction error {:.1e}", d.reconstruct().sub(&b).max_abs());
    println!("cond(B) = {:.3}", condition_number(&b)?);
    Ok(())
}
