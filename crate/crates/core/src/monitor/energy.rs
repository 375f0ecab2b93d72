use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::operator::OperatorHandle;
use crate::paracalc::{commutator_with_rate, highpass, lowpass, para_lt, DyadicPartition};
use crate::solver::nonlinearity_w;
use crate::spectral::{
    divergence, inner, laplacian, leray_project, sobolev_norm, tensor_sym, SpectralMatrixField, SpectralVectorField,
};

/// The four-term decomposition of `∂_t ‖w^𝔏‖²` at one time.
#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize)]
pub struct EnergyTerms {
    pub t: f64,
    pub lambda: f64,
    pub r: f64,
    pub term1: f64,
    pub term2: f64,
    pub term3: f64,
    pub term4: f64,
    /// `‖w^𝔏‖²_{H¹}`
    pub h1: f64,
    /// `⟨w^𝔏, A w^𝔏⟩`
    pub qform: f64,
    /// `r ‖w^𝔏‖²`
    pub r_term: f64,
    /// `‖w^𝔏‖²`
    pub wl_sq: f64,
    /// `‖w^𝔏‖_{H^{1-3κ/2}}`
    pub wl_frac: f64,
}

impl EnergyTerms {
    pub fn total(&self) -> f64 {
        self.term1 + self.term2 + self.term3 + self.term4
    }
    pub fn magnitude(&self) -> f64 {
        self.term1.abs() + self.term2.abs() + self.term3.abs() + self.term4.abs()
    }
    /// `term1 - (-‖w^𝔏‖²_{H¹} + 2⟨w^𝔏, A w^𝔏⟩ + 2r‖w^𝔏‖²)`.
    pub fn lap_split_residual(&self) -> f64 {
        self.term1 - (-self.h1 + 2.0 * self.qform + 2.0 * self.r_term)
    }
    /// Nonnegative part of the estimate's right side, excluding the operator terms.
    pub fn remainder_scale(&self, n_kappa: f64, k: i32) -> f64 {
        let nk = n_kappa.powi(k);
        self.lambda.cbrt() * nk * self.wl_frac + nk * (self.wl_frac + self.wl_frac * self.wl_frac)
    }
    /// `term2 + term3 + term4`, the part bounded by the remainder.
    pub fn remainder_terms(&self) -> f64 {
        self.term2 + self.term3 + self.term4
    }
}

fn pair_div(wl: &SpectralVectorField, m: &SpectralMatrixField) -> f64 {
    2.0 * inner(wl, &divergence(m))
}

/// Fields entering the decomposition.
pub struct EnergyInputs<'a> {
    pub t: f64,
    pub w: &'a SpectralVectorField,
    pub x: &'a SpectralVectorField,
    pub y: &'a SpectralVectorField,
    pub q: &'a SpectralVectorField,
    pub lambda: f64,
    pub r: f64,
    pub kappa: f64,
}

/// Evaluates all four terms; returns them with `w^𝔏`.
pub fn energy_terms(part: &DyadicPartition, inp: &EnergyInputs<'_>) -> Result<(EnergyTerms, SpectralVectorField)> {
    let EnergyInputs { t, w, x, y, q, lambda, r, kappa } = *inp;
    let hx = highpass(x, lambda)?;
    let lx = lowpass(x, lambda)?;
    let qh = highpass(q, lambda)?;
    let wh = leray_project(&divergence(&para_lt(part, w, &qh)?));
    let mut wl = w - &wh;
    wl.set_divergence_free(true);

    let term1 = 2.0 * inner(&wl, &laplacian(&wl)) + pair_div(&wl, &tensor_sym(&lx, &wl)?.scaled(2.0));

    let mut m2 = tensor_sym(&hx, &wl)?.scaled(2.0);
    m2.axpy(-2.0, &para_lt(part, &wl, &hx)?);
    let term2 = pair_div(&wl, &m2);

    let mut m3 = tensor_sym(x, &wh)?.scaled(2.0);
    m3.axpy(-2.0, &para_lt(part, &wh, &hx)?);
    let term3 = pair_div(&wl, &m3);

    let rate = nonlinearity_w(x, y, w)?;
    let comm = commutator_with_rate(part, w, &rate, &qh)?;
    let mut m4 = tensor_sym(w, w)?;
    m4.axpy(2.0, &tensor_sym(y, w)?);
    m4.axpy(-1.0, &comm);
    m4.axpy(1.0, &tensor_sym(y, y)?);
    let term4 = pair_div(&wl, &m4);

    let op = OperatorHandle::new(x, lambda, r)?;
    let qform = op.quadratic_form(&wl)?;
    let wl_sq = inner(&wl, &wl);
    let terms = EnergyTerms {
        t,
        lambda,
        r,
        term1,
        term2,
        term3,
        term4,
        h1: sobolev_norm(&wl, 1.0).powi(2),
        qform,
        r_term: r * wl_sq,
        wl_sq,
        wl_frac: sobolev_norm(&wl, 1.0 - 1.5 * kappa),
    };
    Ok((terms, wl))
}

/// `‖w^𝔏‖²_{H^ε}` for the fractional energy.
pub fn fractional_energy(wl: &SpectralVectorField, eps: f64) -> f64 {
    sobolev_norm(wl, eps).powi(2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::OuEnsemble;
    use crate::spectral::{random_field, FourierGrid};

    #[test]
    fn lap_split_holds_on_random_state() {
        let g = FourierGrid::new(32).unwrap();
        let part = DyadicPartition::new(&g);
        let mut ens = OuEnsemble::new(&g, 3);
        ens.evolve(0.3).unwrap();
        let (x, q) = (ens.x_field(), ens.q_field());
        let w = random_field(&g, 1, 2.0, true);
        let y = random_field(&g, 2, 2.5, true).scaled(0.1);
        let inp = EnergyInputs { t: 0.3, w: &w, x: &x, y: &y, q: &q, lambda: 8.0, r: 1.1, kappa: 0.05 };
        let (e, wl) = energy_terms(&part, &inp).unwrap();
        assert!(e.lap_split_residual().abs() < 1e-10 * e.term1.abs().max(1.0), "{e:?}");
        assert!(wl.divergence_residual() < 1e-12);
    }

    #[test]
    fn zero_noise_leaves_only_dissipation() {
        let g = FourierGrid::new(32).unwrap();
        let part = DyadicPartition::new(&g);
        let z = SpectralVectorField::zeros(&g);
        let w = random_field(&g, 1, 2.0, true);
        let inp = EnergyInputs { t: 0.0, w: &w, x: &z, y: &z, q: &z, lambda: 8.0, r: 0.0, kappa: 0.05 };
        let (e, _) = energy_terms(&part, &inp).unwrap();
        assert_eq!(e.term2, 0.0);
        assert_eq!(e.term3, 0.0);
        assert!(e.term4.abs() < 1e-12);
        assert!((e.term1 + 2.0 * e.h1).abs() < 1e-12 * e.h1);
    }
}
