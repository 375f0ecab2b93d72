use super::renorm::{renorm_constant, RenormWeight};
use crate::error::Result;
use crate::paracalc::{besov_norm, besov_norm_matrix, lowpass, resonant_matrix, DyadicPartition};
use crate::spectral::{sym_gradient, SpectralMatrixField, SpectralVectorField};

/// Potential `∇_sym 𝔏_λ X` of the renormalized operator.
pub fn potential(x: &SpectralVectorField, lambda: f64) -> Result<SpectralMatrixField> {
    Ok(sym_gradient(&lowpass(x, lambda)?))
}

/// `P^λ = (-Δ/2 + 1)^{-1} 2∇_sym 𝔏_λ X`.
pub fn build_p_lambda(x: &SpectralVectorField, lambda: f64) -> Result<SpectralMatrixField> {
    let k2 = x.grid().ksq();
    Ok(potential(x, lambda)?.map_modes(|i| 2.0 / (k2[i] / 2.0 + 1.0)))
}

/// `(∇_sym 𝔏_λ X) ⊙ P^λ - r Id`.
pub fn enhanced_product(
    part: &DyadicPartition,
    x: &SpectralVectorField,
    lambda: f64,
    r: f64,
) -> Result<SpectralMatrixField> {
    let v = potential(x, lambda)?;
    let p = build_p_lambda(x, lambda)?;
    let mut out = resonant_matrix(part, &v, &p)?;
    out.axpy(-1.0, &SpectralMatrixField::identity(x.grid(), r));
    Ok(out)
}

/// Renormalized objects of one cutoff level.
#[derive(Clone, Debug)]
pub struct LevelObjects {
    pub lambda: f64,
    pub r: f64,
    pub p: SpectralMatrixField,
    pub enhanced: SpectralMatrixField,
}

impl LevelObjects {
    pub fn build(part: &DyadicPartition, x: &SpectralVectorField, lambda: f64, t: f64, weight: RenormWeight) -> Result<Self> {
        let r = renorm_constant(x.grid(), lambda, t, weight)?;
        Ok(LevelObjects {
            lambda,
            r,
            p: build_p_lambda(x, lambda)?,
            enhanced: enhanced_product(part, x, lambda, r)?,
        })
    }
}

/// Stochastic objects at one time: `X`, `Q` and per-level renormalized products.
#[derive(Clone, Debug)]
pub struct StochasticObjects {
    pub t: f64,
    pub x: SpectralVectorField,
    pub q: SpectralVectorField,
    pub levels: Vec<LevelObjects>,
}

impl StochasticObjects {
    pub fn level(&self, lambda: f64) -> Option<&LevelObjects> {
        self.levels.iter().find(|l| l.lambda == lambda)
    }
}

/// Running suprema behind `N^κ_t`:
/// `L = 1 + sup_s (‖X‖_{C^{-κ}} + ‖Y‖_{C^{2κ}})` and the enhanced products in `C^{-κ}`.
#[derive(Clone, Debug)]
pub struct MagnitudeTracker {
    kappa: f64,
    sup_linear: f64,
    sup_enhanced: f64,
}

impl MagnitudeTracker {
    pub fn new(kappa: f64) -> Self {
        MagnitudeTracker {
            kappa,
            sup_linear: 0.0,
            sup_enhanced: 0.0,
        }
    }

    /// Folds one time slice into the suprema and returns the current `N^κ`.
    pub fn update(
        &mut self,
        part: &DyadicPartition,
        x: &SpectralVectorField,
        y: &SpectralVectorField,
        enhanced: &[&SpectralMatrixField],
    ) -> Result<f64> {
        let inf = f64::INFINITY;
        let lin = besov_norm(part, x, -self.kappa, inf, inf)? + besov_norm(part, y, 2.0 * self.kappa, inf, inf)?;
        self.sup_linear = self.sup_linear.max(lin);
        for e in enhanced {
            self.sup_enhanced = self.sup_enhanced.max(besov_norm_matrix(part, e, -self.kappa, inf, inf)?);
        }
        Ok(self.value())
    }

    pub fn value(&self) -> f64 {
        1.0 + self.sup_linear + self.sup_enhanced
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::OuEnsemble;
    use crate::spectral::FourierGrid;

    #[test]
    fn zero_noise_objects() {
        let g = FourierGrid::new(32).unwrap();
        let part = DyadicPartition::new(&g);
        let x = SpectralVectorField::zeros(&g);
        let e = enhanced_product(&part, &x, 8.0, 0.7).unwrap();
        assert!((e.mean()[0] + 0.7).abs() < 1e-15 && (e.mean()[3] + 0.7).abs() < 1e-15);
        let mut m = MagnitudeTracker::new(0.1);
        let n = m.update(&part, &x, &x, &[]).unwrap();
        assert_eq!(n, 1.0);
    }

    #[test]
    fn p_lambda_is_symmetric_and_monotone_tracker() {
        let g = FourierGrid::new(32).unwrap();
        let part = DyadicPartition::new(&g);
        let mut ens = OuEnsemble::new(&g, 2);
        ens.evolve(0.5).unwrap();
        let x = ens.x_field();
        let p = build_p_lambda(&x, 8.0).unwrap();
        assert!(p.is_symmetric());
        let mut m = MagnitudeTracker::new(0.1);
        let a = m.update(&part, &x, &x, &[&p]).unwrap();
        let zero = SpectralVectorField::zeros(&g);
        let b = m.update(&part, &zero, &zero, &[]).unwrap();
        assert!(a > 1.0 && b == a);
    }
}
