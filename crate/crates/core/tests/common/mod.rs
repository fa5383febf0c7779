#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use svmark::ImageMatrix;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform entries in `[0, 1)`.
pub fn random_image(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> ImageMatrix {
    ImageMatrix::from_fn(rows, cols, |_, _| rng.gen::<f64>())
}

/// Uniform entries in `[-1, 1)`.
pub fn random_signed(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> ImageMatrix {
    ImageMatrix::from_fn(rows, cols, |_, _| rng.gen_range(-1.0..1.0))
}

/// Largest deviation of `QᵀQ` from the identity.
pub fn orthogonality_defect(q: &ImageMatrix) -> f64 {
    let g = q.transpose().matmul(q).unwrap();
    g.max_abs_diff(&ImageMatrix::identity(g.rows()))
}

pub fn bits(m: &ImageMatrix) -> Vec<u64> {
    m.as_slice().iter().map(|v| v.to_bits()).collect()
}
