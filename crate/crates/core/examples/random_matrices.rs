//! Portable seeded matrices: the same seed gives the same bits everywhere.

use svd_perturb::rng::{DIRECTION_STREAM, MATRIX_STREAM};
use svd_perturb::{random_matrix, Distribution, MatrixRng};

fn main() -> svd_perturb::Result<()> {
    let a = random_matrix(1, 2, 3, Distribution::Normal01)?;
    let mut csv = Vec::new();
    a.write_csv_to(&mut csv).unwrap();
    print!(
        "seed 1, normal01, 2x3:\n{}",
        String::from_utf8(csv).unwrap()
    );

    let u = MatrixRng::with_stream(1, MATRIX_STREAM).matrix(2, 3, Distribution::Uniform01)?;
    println!("uniform01 entries: {:?}", u.as_slice());

    let d = MatrixRng::with_stream(1, DIRECTION_STREAM).unit_direction(2, 3)?;
    println!("direction stream, ||dA||_F = {}", d.norm_fro());
    Ok(())
}
