//! Fourier grid, spectral fields, exact linear operators and snapshot I/O.

mod field;
mod grid;
mod ops;
pub mod snapshot;

pub use field::{SpectralMatrixField, SpectralVectorField, ZERO};
pub use grid::{freq, FourierGrid};
pub use ops::*;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Seeded Gaussian field with spectrum `(1 + |k|²)^{-decay/2}`; Leray-projected on request.
pub fn random_field(grid: &FourierGrid, seed: u64, decay: f64, divergence_free: bool) -> SpectralVectorField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let f = SpectralVectorField::from_canonical_fn(grid, |a, b| {
        let amp = (1.0 + (a * a + b * b) as f64).powf(-decay / 2.0);
        std::array::from_fn(|_| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            Complex64::new(re, im) * amp
        })
    });
    if divergence_free {
        leray_project(&f)
    } else {
        f
    }
}
