//! Renormalized Schrödinger-type operator `A^λ = ½Δ + ∇_sym 𝔏_λ X - r Id`.

use crate::error::{Result, SnsError};
use crate::noise::potential;
use crate::paracalc::{para_lt_vector_matrix, DyadicPartition};
use crate::spectral::{
    inner, l2_norm, laplacian, matvec_values, random_field, sobolev_norm, SpectralMatrixField, SpectralVectorField,
};

/// Frozen instance of `A^λ` at one time slice.
#[derive(Clone, Debug)]
pub struct OperatorHandle {
    lambda: f64,
    r: f64,
    potential: SpectralMatrixField,
    values: [Vec<f64>; 4],
    sup_potential: f64,
}

/// Result of a power iteration.
#[derive(Clone, Copy, Debug)]
pub struct Eigen {
    pub value: f64,
    pub iterations: usize,
}

impl OperatorHandle {
    pub fn new(x: &SpectralVectorField, lambda: f64, r: f64) -> Result<Self> {
        if !r.is_finite() {
            return Err(SnsError::InvalidArgument(format!("renormalization {r}")));
        }
        let potential = potential(x, lambda)?;
        let values = potential.to_physical();
        let sup_potential = (0..values[0].len())
            .map(|i| (values.iter().map(|v| v[i] * v[i]).sum::<f64>()).sqrt())
            .fold(0.0, f64::max);
        Ok(OperatorHandle {
            lambda,
            r,
            potential,
            values,
            sup_potential,
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
    pub fn renormalization(&self) -> f64 {
        self.r
    }
    pub fn potential(&self) -> &SpectralMatrixField {
        &self.potential
    }

    /// `A w`, with the potential product masked to retained modes; no Leray projection.
    pub fn apply(&self, w: &SpectralVectorField) -> Result<SpectralVectorField> {
        self.potential.grid().check_same(w.grid())?;
        let pv = matvec_values(&self.values, &w.to_physical());
        let mut out = SpectralVectorField::from_physical(w.grid(), &pv);
        out.axpy(0.5, &laplacian(w));
        out.axpy(-self.r, w);
        Ok(out)
    }

    /// `⟨w, A w⟩` for divergence-free `w`.
    pub fn quadratic_form(&self, w: &SpectralVectorField) -> Result<f64> {
        let res = w.divergence_residual();
        if res > 1e-10 {
            return Err(SnsError::NotDivergenceFree(res));
        }
        Ok(inner(w, &self.apply(w)?))
    }

    /// Largest eigenvalue by power iteration on `A + s Id`, where `s` bounds the
    /// bottom of the spectrum so that the shifted operator is nonnegative.
    pub fn top_eigenvalue(&self, tol: f64, max_iter: usize, seed: u64) -> Result<Eigen> {
        let g = self.potential.grid();
        let kmax = g.kmax() as f64;
        let shift = kmax * kmax + self.r.max(0.0) + self.sup_potential;
        let mut v = random_field(g, seed, 4.0, false);
        let norm = l2_norm(&v);
        v = v.scaled(1.0 / norm);
        let mut rq = f64::NAN;
        for it in 1..=max_iter {
            let mut bv = self.apply(&v)?;
            bv.axpy(shift, &v);
            let next = inner(&v, &bv) - shift;
            let nb = l2_norm(&bv);
            if !(nb > 0.0) || !next.is_finite() {
                return Err(SnsError::NumericNan { t: f64::NAN });
            }
            v = bv.scaled(1.0 / nb);
            if (next - rq).abs() <= tol * next.abs().max(1.0) {
                return Ok(Eigen { value: next, iterations: it });
            }
            rq = next;
        }
        Err(SnsError::NonConvergence {
            iterations: max_iter,
            last_change: rq,
        })
    }
}

/// `‖w‖_{H^{1-κ}} + ‖w - w ≼ P‖_{H^{2-2κ}}`.
pub fn paracontrolled_remainder(
    part: &DyadicPartition,
    w: &SpectralVectorField,
    p: &SpectralMatrixField,
    kappa: f64,
) -> Result<f64> {
    let sharp = w - &para_lt_vector_matrix(part, w, p)?;
    Ok(sobolev_norm(w, 1.0 - kappa) + sobolev_norm(&sharp, 2.0 - 2.0 * kappa))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::OuEnsemble;
    use crate::spectral::{divergence, leray_project, tensor_sym, FourierGrid};

    #[test]
    fn free_operator_is_half_laplacian() {
        let g = FourierGrid::new(16).unwrap();
        let a = OperatorHandle::new(&SpectralVectorField::zeros(&g), 4.0, 0.0).unwrap();
        let w = random_field(&g, 1, 1.0, true);
        let d = &a.apply(&w).unwrap() - &laplacian(&w).scaled(0.5);
        assert!(d.max_abs() < 1e-15);
        let e = a.top_eigenvalue(1e-12, 200_000, 3).unwrap();
        assert!((e.value + 0.5).abs() < 1e-6, "{e:?}");
    }

    #[test]
    fn symmetric_and_energy_identity() {
        let g = FourierGrid::new(32).unwrap();
        let mut ens = OuEnsemble::new(&g, 5);
        ens.evolve(1.0).unwrap();
        let x = ens.x_field();
        let a = OperatorHandle::new(&x, 8.0, 1.3).unwrap();
        let u = random_field(&g, 2, 1.0, false);
        let v = random_field(&g, 3, 1.0, false);
        let (uav, vau) = (inner(&u, &a.apply(&v).unwrap()), inner(&v, &a.apply(&u).unwrap()));
        assert!((uav - vau).abs() <= 1e-12 * uav.abs().max(1.0));

        // ⟨w, Δw + div(2 𝔏X ⊗_s w)⟩ = -½‖w‖²_{H¹} + ⟨w, Aw⟩ + r‖w‖²
        let w = random_field(&g, 4, 1.5, true);
        let lx = crate::paracalc::lowpass(&x, 8.0).unwrap();
        let lhs = inner(&w, &laplacian(&w)) + inner(&w, &divergence(&tensor_sym(&lx, &w).unwrap()).scaled(2.0));
        let rhs = -0.5 * sobolev_norm(&w, 1.0).powi(2) + a.quadratic_form(&w).unwrap() + 1.3 * inner(&w, &w);
        assert!((lhs - rhs).abs() <= 1e-10 * lhs.abs().max(1.0), "{lhs} {rhs}");
    }

    #[test]
    fn quadratic_form_requires_divergence_free() {
        let g = FourierGrid::new(16).unwrap();
        let a = OperatorHandle::new(&SpectralVectorField::zeros(&g), 4.0, 0.0).unwrap();
        let w = random_field(&g, 1, 1.0, false);
        assert!(matches!(a.quadratic_form(&w), Err(SnsError::NotDivergenceFree(_))));
        assert!(a.quadratic_form(&leray_project(&w)).is_ok());
    }
}
