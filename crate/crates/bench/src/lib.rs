//! Benchmark fixtures.

use logsupmod::experiments::denoise::grid_bases;
use logsupmod::random::{logistic_vector, stream};
use logsupmod::SubmodularMixture;

/// A denoising-style grid model with coupling `alpha` and logistic unaries.
pub fn grid_model(height: usize, width: usize, alpha: f64, seed: u64) -> SubmodularMixture {
    let bases = grid_bases(height, width).expect("valid grid");
    let t = logistic_vector(&mut stream(seed, 0), height * width);
    SubmodularMixture::new(bases, vec![alpha, alpha], t).expect("valid parameters")
}
