//! Inputs shared by the benchmarks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tensorid::{Decomposition, Field, Matrix, PrimeField, Rational, Tensor};

pub fn fixture() -> Decomposition<Rational> {
    Decomposition::from_path(concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures/555r7.json")).expect("fixture parses")
}

pub fn random_matrix(field: &PrimeField, rows: usize, cols: usize, seed: u64) -> Matrix<u32> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..rows * cols).map(|_| field.random_element(&mut rng)).collect();
    Matrix::from_vec(rows, cols, data)
}

/// Sum of `r` random rank-one tensors.
pub fn random_tensor(field: &PrimeField, dims: &[usize], r: usize, seed: u64) -> Tensor<u32> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Tensor::zeros(field, dims.to_vec());
    for _ in 0..r {
        let factors: Vec<Vec<u32>> = dims
            .iter()
            .map(|&n| (0..n).map(|_| field.random_element(&mut rng)).collect())
            .collect();
        t.add_assign(field, &Tensor::outer(field, &factors));
    }
    t
}
