use crate::error::Result;
use crate::paracalc::{besov_norm, DyadicPartition};
use crate::solver::split_w;
use crate::spectral::{sobolev_norm, SpectralVectorField};

/// `|||φ|||_λ = ‖φ^𝔏‖_{H¹} + ‖φ^ℌ‖_{C^{1-3κ}_4}` with the split taken through `Q`.
pub fn hl_norm(
    part: &DyadicPartition,
    phi: &SpectralVectorField,
    q: &SpectralVectorField,
    lambda: f64,
    kappa: f64,
) -> Result<f64> {
    let (low, high) = split_w(part, phi, q, lambda)?;
    Ok(sobolev_norm(&low, 1.0) + besov_norm(part, &high, 1.0 - 3.0 * kappa, 4.0, f64::INFINITY)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{random_field, FourierGrid};

    #[test]
    fn zero_q_gives_h1_norm() {
        let g = FourierGrid::new(32).unwrap();
        let part = DyadicPartition::new(&g);
        let w = random_field(&g, 1, 2.0, true);
        let z = SpectralVectorField::zeros(&g);
        let v = hl_norm(&part, &w, &z, 8.0, 0.05).unwrap();
        assert!((v - sobolev_norm(&w, 1.0)).abs() < 1e-14);
    }
}
