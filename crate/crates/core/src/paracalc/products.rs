use super::blocks::scalar_blocks;
use super::partition::{CutoffPair, DyadicPartition};
use crate::error::{Result, SnsError};
use crate::spectral::{laplacian, partial, SpectralMatrixField, SpectralVectorField};

/// Block grid values of every component of a vector field.
pub struct VectorBlocks {
    comps: [Vec<Vec<f64>>; 2],
}

/// Block grid values of every component of a matrix field.
pub struct MatrixBlocks {
    comps: [Vec<Vec<f64>>; 4],
}

impl VectorBlocks {
    pub fn new(part: &DyadicPartition, phi: &SpectralVectorField) -> Result<Self> {
        part.grid().check_same(phi.grid())?;
        Ok(VectorBlocks {
            comps: [scalar_blocks(part, phi.comp(0)), scalar_blocks(part, phi.comp(1))],
        })
    }
}

impl MatrixBlocks {
    pub fn new(part: &DyadicPartition, m: &SpectralMatrixField) -> Result<Self> {
        part.grid().check_same(m.grid())?;
        let c = m.comps();
        Ok(MatrixBlocks {
            comps: std::array::from_fn(|i| scalar_blocks(part, &c[i])),
        })
    }
    fn entry(&self, i: usize, j: usize) -> &[Vec<f64>] {
        &self.comps[2 * i + j]
    }
}

/// `out += s · Σ_j S_{j-1}a · Δ_j b` with `S_{j-1} = Σ_{i <= j-2} Δ_i`.
fn lt_acc(out: &mut [f64], a: &[Vec<f64>], b: &[Vec<f64>], s: f64) {
    let mut low = vec![0.0; out.len()];
    for t in 0..b.len() {
        if t >= 2 {
            for (l, v) in low.iter_mut().zip(&a[t - 2]) {
                *l += v;
            }
        }
        if t >= 2 {
            for ((o, l), v) in out.iter_mut().zip(&low).zip(&b[t]) {
                *o += s * l * v;
            }
        }
    }
}

/// `out += s · Σ_{|i-j| <= 1} Δ_i a · Δ_j b`.
fn res_acc(out: &mut [f64], a: &[Vec<f64>], b: &[Vec<f64>], s: f64) {
    let nb = a.len();
    for t in 0..nb {
        let lo = t.saturating_sub(1);
        let hi = (t + 1).min(nb - 1);
        let mut near = vec![0.0; out.len()];
        for u in lo..=hi {
            for (x, v) in near.iter_mut().zip(&b[u]) {
                *x += v;
            }
        }
        for ((o, x), v) in out.iter_mut().zip(&near).zip(&a[t]) {
            *o += s * x * v;
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Kind {
    Lt,
    Res,
    Gt,
}

fn acc(kind: Kind, out: &mut [f64], a: &[Vec<f64>], b: &[Vec<f64>], s: f64) {
    match kind {
        Kind::Lt => lt_acc(out, a, b, s),
        Kind::Res => res_acc(out, a, b, s),
        Kind::Gt => lt_acc(out, b, a, s),
    }
}

fn tensor_blocks(kind: Kind, a: &VectorBlocks, b: &VectorBlocks, len: usize) -> [Vec<f64>; 4] {
    let mut out: [Vec<f64>; 4] = std::array::from_fn(|_| vec![0.0; len]);
    for (p, q, c) in [(0, 0, 0), (0, 1, 1), (1, 1, 3)] {
        acc(kind, &mut out[c], &a.comps[p], &b.comps[q], 0.5);
        acc(kind, &mut out[c], &a.comps[q], &b.comps[p], 0.5);
    }
    out[2] = out[1].clone();
    out
}

fn tensor(kind: Kind, part: &DyadicPartition, a: &VectorBlocks, b: &VectorBlocks) -> SpectralMatrixField {
    let g = part.grid();
    SpectralMatrixField::from_physical(g, &tensor_blocks(kind, a, b, g.len()), true)
}

/// `φ ≼ ψ = Σ_j S_{j-1}φ ⊗_s Δ_j ψ`.
pub fn para_lt(part: &DyadicPartition, phi: &SpectralVectorField, psi: &SpectralVectorField) -> Result<SpectralMatrixField> {
    Ok(tensor(Kind::Lt, part, &VectorBlocks::new(part, phi)?, &VectorBlocks::new(part, psi)?))
}

/// `φ ⊙ ψ = Σ_{|i-j| <= 1} Δ_i φ ⊗_s Δ_j ψ`.
pub fn resonant(part: &DyadicPartition, phi: &SpectralVectorField, psi: &SpectralVectorField) -> Result<SpectralMatrixField> {
    Ok(tensor(Kind::Res, part, &VectorBlocks::new(part, phi)?, &VectorBlocks::new(part, psi)?))
}

/// `φ ≽ ψ = ψ ≼ φ`.
pub fn para_gt(part: &DyadicPartition, phi: &SpectralVectorField, psi: &SpectralVectorField) -> Result<SpectralMatrixField> {
    Ok(tensor(Kind::Gt, part, &VectorBlocks::new(part, phi)?, &VectorBlocks::new(part, psi)?))
}

/// Paraproduct from precomputed blocks.
pub fn para_lt_blocks(part: &DyadicPartition, a: &VectorBlocks, b: &VectorBlocks) -> SpectralMatrixField {
    tensor(Kind::Lt, part, a, b)
}

fn matmat(kind: Kind, part: &DyadicPartition, m: &MatrixBlocks, n: &MatrixBlocks) -> SpectralMatrixField {
    let g = part.grid();
    let mut out: [Vec<f64>; 4] = std::array::from_fn(|_| vec![0.0; g.len()]);
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                acc(kind, &mut out[2 * i + j], m.entry(i, k), n.entry(k, j), 1.0);
            }
        }
    }
    SpectralMatrixField::from_physical(g, &out, false)
}

/// `(M ≼ N)_{ij} = Σ_k M_{ik} ≼ N_{kj}`.
pub fn para_lt_matrix(part: &DyadicPartition, m: &SpectralMatrixField, n: &SpectralMatrixField) -> Result<SpectralMatrixField> {
    Ok(matmat(Kind::Lt, part, &MatrixBlocks::new(part, m)?, &MatrixBlocks::new(part, n)?))
}

/// `(M ⊙ N)_{ij} = Σ_k M_{ik} ⊙ N_{kj}`.
pub fn resonant_matrix(part: &DyadicPartition, m: &SpectralMatrixField, n: &SpectralMatrixField) -> Result<SpectralMatrixField> {
    Ok(matmat(Kind::Res, part, &MatrixBlocks::new(part, m)?, &MatrixBlocks::new(part, n)?))
}

/// `(M ≽ N)_{ij} = Σ_k M_{ik} ≽ N_{kj}`.
pub fn para_gt_matrix(part: &DyadicPartition, m: &SpectralMatrixField, n: &SpectralMatrixField) -> Result<SpectralMatrixField> {
    Ok(matmat(Kind::Gt, part, &MatrixBlocks::new(part, m)?, &MatrixBlocks::new(part, n)?))
}

fn vecmat(kind: Kind, part: &DyadicPartition, phi: &VectorBlocks, m: &MatrixBlocks) -> SpectralVectorField {
    let g = part.grid();
    let mut out = [vec![0.0; g.len()], vec![0.0; g.len()]];
    for (i, o) in out.iter_mut().enumerate() {
        for j in 0..2 {
            acc(kind, o, &phi.comps[j], m.entry(j, i), 1.0);
        }
    }
    SpectralVectorField::from_physical(g, &out)
}

/// `(φ ≼ M)_i = Σ_j φ_j ≼ M_{ji}`; the mean is dropped.
pub fn para_lt_vector_matrix(part: &DyadicPartition, phi: &SpectralVectorField, m: &SpectralMatrixField) -> Result<SpectralVectorField> {
    Ok(vecmat(Kind::Lt, part, &VectorBlocks::new(part, phi)?, &MatrixBlocks::new(part, m)?))
}

/// `(φ ⊙ M)_i = Σ_j φ_j ⊙ M_{ji}`; the mean is dropped.
pub fn resonant_vector_matrix(part: &DyadicPartition, phi: &SpectralVectorField, m: &SpectralMatrixField) -> Result<SpectralVectorField> {
    Ok(vecmat(Kind::Res, part, &VectorBlocks::new(part, phi)?, &MatrixBlocks::new(part, m)?))
}

/// `(φ ≽ M)_i = Σ_j φ_j ≽ M_{ji}`; the mean is dropped.
pub fn para_gt_vector_matrix(part: &DyadicPartition, phi: &SpectralVectorField, m: &SpectralMatrixField) -> Result<SpectralVectorField> {
    Ok(vecmat(Kind::Gt, part, &VectorBlocks::new(part, phi)?, &MatrixBlocks::new(part, m)?))
}

fn check_level(lambda: f64) -> Result<()> {
    if !(lambda >= 1.0) {
        return Err(SnsError::InvalidArgument(format!("cutoff level λ={lambda} < 1")));
    }
    Ok(())
}

/// `𝔏_λ φ`, the multiplier `l(|k|/λ)`.
pub fn lowpass(phi: &SpectralVectorField, lambda: f64) -> Result<SpectralVectorField> {
    check_level(lambda)?;
    let kabs = phi.grid().kabs();
    let mut out = phi.map_modes(|i| CutoffPair::low(kabs[i], lambda));
    out.set_divergence_free(phi.is_divergence_free());
    Ok(out)
}

/// `ℌ_λ φ`, the multiplier `h(|k|/λ)`.
pub fn highpass(phi: &SpectralVectorField, lambda: f64) -> Result<SpectralVectorField> {
    check_level(lambda)?;
    let kabs = phi.grid().kabs();
    let mut out = phi.map_modes(|i| CutoffPair::high(kabs[i], lambda));
    out.set_divergence_free(phi.is_divergence_free());
    Ok(out)
}

pub fn lowpass_matrix(m: &SpectralMatrixField, lambda: f64) -> Result<SpectralMatrixField> {
    check_level(lambda)?;
    let kabs = m.grid().kabs();
    Ok(m.map_modes(|i| CutoffPair::low(kabs[i], lambda)))
}

pub fn highpass_matrix(m: &SpectralMatrixField, lambda: f64) -> Result<SpectralMatrixField> {
    check_level(lambda)?;
    let kabs = m.grid().kabs();
    Ok(m.map_modes(|i| CutoffPair::high(kabs[i], lambda)))
}

/// `Σ_m ∂_m f ≼ ∂_m g`.
fn gradient_pairing(part: &DyadicPartition, f: &SpectralVectorField, g: &SpectralVectorField) -> Result<SpectralMatrixField> {
    let mut out = para_lt(part, &partial(f, 0), &partial(g, 0))?;
    out.axpy(1.0, &para_lt(part, &partial(f, 1), &partial(g, 1))?);
    Ok(out)
}

/// `C^≼(f, g) = rate ≼ g - 2 Σ_m ∂_m f ≼ ∂_m g`, where `rate` is `(∂_t - Δ)f`.
pub fn commutator_with_rate(
    part: &DyadicPartition,
    f: &SpectralVectorField,
    rate: &SpectralVectorField,
    g: &SpectralVectorField,
) -> Result<SpectralMatrixField> {
    let mut out = para_lt(part, rate, g)?;
    out.axpy(-2.0, &gradient_pairing(part, f, g)?);
    Ok(out)
}

/// Heat commutator of two time slices by the Leibniz expansion, with
/// `∂_t f ≈ (f1 - f0)/dt` and spatial terms on the later slice.
pub fn heat_commutator(
    part: &DyadicPartition,
    f0: &SpectralVectorField,
    f1: &SpectralVectorField,
    g1: &SpectralVectorField,
    dt: f64,
) -> Result<SpectralMatrixField> {
    if !(dt > 0.0) {
        return Err(SnsError::InvalidArgument(format!("time step {dt} <= 0")));
    }
    let mut rate = (f1 - f0).scaled(1.0 / dt);
    rate.axpy(-1.0, &laplacian(f1));
    commutator_with_rate(part, f1, &rate, g1)
}

/// The same commutator from its definition
/// `(∂_t - Δ)(f ≼ g) - f ≼ (∂_t - Δ)g`, with the discrete product rule in time.
pub fn heat_commutator_defining(
    part: &DyadicPartition,
    f0: &SpectralVectorField,
    f1: &SpectralVectorField,
    g0: &SpectralVectorField,
    g1: &SpectralVectorField,
    dt: f64,
) -> Result<SpectralMatrixField> {
    if !(dt > 0.0) {
        return Err(SnsError::InvalidArgument(format!("time step {dt} <= 0")));
    }
    let p1 = para_lt(part, f1, g1)?;
    let p0 = para_lt(part, f0, g0)?;
    let k2 = part.grid().ksq();
    let mut out = (&p1 - &p0).scaled(1.0 / dt);
    out.axpy(1.0, &p1.map_modes(|i| k2[i]));
    let dg = (g1 - g0).scaled(1.0 / dt);
    out.axpy(-1.0, &para_lt(part, f0, &dg)?);
    out.axpy(1.0, &para_lt(part, f1, &laplacian(g1))?);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{matrix_inner, random_field, sym_tensor_values, FourierGrid};

    fn rel(a: &SpectralMatrixField, b: &SpectralMatrixField) -> f64 {
        let d = a - b;
        (matrix_inner(&d, &d) / matrix_inner(b, b).max(1e-300)).sqrt()
    }

    #[test]
    fn vector_decomposition_is_exact() {
        let g = FourierGrid::new(48).unwrap();
        let part = DyadicPartition::new(&g);
        let a = random_field(&g, 1, 1.0, true);
        let b = random_field(&g, 2, 0.5, true);
        let mut sum = para_lt(&part, &a, &b).unwrap();
        sum.axpy(1.0, &resonant(&part, &a, &b).unwrap());
        sum.axpy(1.0, &para_gt(&part, &a, &b).unwrap());
        let full = SpectralMatrixField::from_physical(&g, &sym_tensor_values(&a.to_physical(), &b.to_physical()), true);
        assert!(rel(&sum, &full) < 1e-12);
    }

    #[test]
    fn constant_low_factor_gives_no_paraproduct_below_two_blocks() {
        let g = FourierGrid::new(32).unwrap();
        let part = DyadicPartition::new(&g);
        let zero = SpectralVectorField::zeros(&g);
        let b = random_field(&g, 2, 0.5, true);
        assert_eq!(para_lt(&part, &zero, &b).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn cutoff_rejects_small_level() {
        let g = FourierGrid::new(16).unwrap();
        let f = random_field(&g, 2, 0.5, true);
        assert!(lowpass(&f, 0.5).is_err());
        let sum = &lowpass(&f, 3.0).unwrap() + &highpass(&f, 3.0).unwrap();
        assert!((&sum - &f).max_abs() < 1e-15);
    }

    #[test]
    fn commutator_forms_agree() {
        let g = FourierGrid::new(32).unwrap();
        let part = DyadicPartition::new(&g);
        let f0 = random_field(&g, 3, 1.5, true);
        let f1 = random_field(&g, 4, 1.5, true);
        let g0 = random_field(&g, 5, 1.0, true);
        let g1 = random_field(&g, 6, 1.0, true);
        let a = heat_commutator(&part, &f0, &f1, &g1, 1e-2).unwrap();
        let b = heat_commutator_defining(&part, &f0, &f1, &g0, &g1, 1e-2).unwrap();
        assert!(rel(&a, &b) < 1e-10);
    }
}
