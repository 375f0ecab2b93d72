use crate::error::Result;
use crate::paracalc::{highpass, para_lt, DyadicPartition};
use crate::spectral::{divergence, leray_project, SpectralVectorField};

/// `w^ℌ = P div(w ≼ ℌ_λ Q)` and `w^𝔏 = w - w^ℌ`.
pub fn split_w(
    part: &DyadicPartition,
    w: &SpectralVectorField,
    q: &SpectralVectorField,
    lambda: f64,
) -> Result<(SpectralVectorField, SpectralVectorField)> {
    let qh = highpass(q, lambda)?;
    let wh = leray_project(&divergence(&para_lt(part, w, &qh)?));
    let mut wl = w - &wh;
    wl.set_divergence_free(true);
    Ok((wl, wh))
}
