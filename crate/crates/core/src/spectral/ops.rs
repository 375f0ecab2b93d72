use num_complex::Complex64;

use super::field::{SpectralMatrixField, SpectralVectorField, ZERO};
use super::grid::FourierGrid;
use crate::error::{Result, SnsError};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Leray projection `û - (k·û) k / |k|²`, written as `((û·k⊥)/|k|²) k⊥`.
pub fn leray_project(u: &SpectralVectorField) -> SpectralVectorField {
    let g = u.grid();
    let mut c0 = u.comp(0).to_vec();
    let mut c1 = u.comp(1).to_vec();
    for idx in 0..g.len() {
        let (a, b) = g.wavevector(idx);
        if (a, b) == (0, 0) {
            c0[idx] = ZERO;
            c1[idx] = ZERO;
            continue;
        }
        let (pa, pb) = (-(b as f64), a as f64);
        let s = (c0[idx] * pa + c1[idx] * pb) / g.ksq()[idx];
        c0[idx] = s * pa;
        c1[idx] = s * pb;
    }
    let mut out = SpectralVectorField::from_components(g, [c0, c1]).expect("same grid");
    out.set_divergence_free(true);
    out
}

/// Heat semigroup `e^{sΔ}`; `s` must be nonnegative.
pub fn heat_propagate(u: &SpectralVectorField, s: f64) -> Result<SpectralVectorField> {
    if !(s >= 0.0) {
        return Err(SnsError::InvalidArgument(format!("negative heat time {s}")));
    }
    let k2 = u.grid().ksq();
    let mut out = u.map_modes(|i| (-k2[i] * s).exp());
    out.set_divergence_free(u.is_divergence_free());
    Ok(out)
}

pub fn laplacian(u: &SpectralVectorField) -> SpectralVectorField {
    let k2 = u.grid().ksq();
    let mut out = u.map_modes(|i| -k2[i]);
    out.set_divergence_free(u.is_divergence_free());
    out
}

/// Fourier multiplier `m(|k|)` applied to a vector field.
pub fn radial_multiplier<F: Fn(f64) -> f64>(u: &SpectralVectorField, m: F) -> SpectralVectorField {
    let kabs = u.grid().kabs();
    let mut out = u.map_modes(|i| m(kabs[i]));
    out.set_divergence_free(u.is_divergence_free());
    out
}

/// `(∇φ)_{ij} = ∂_i φ_j`.
pub fn gradient(u: &SpectralVectorField) -> SpectralMatrixField {
    let g = u.grid();
    let k = [g.k1(), g.k2()];
    let comps = std::array::from_fn(|c| {
        let (i, j) = (c / 2, c % 2);
        (0..g.len())
            .map(|idx| I * k[i][idx] as f64 * u.comp(j)[idx])
            .collect()
    });
    SpectralMatrixField::from_components(g, comps).expect("same grid")
}

/// `(∇_sym φ)_{ij} = ½(∂_i φ_j + ∂_j φ_i)`.
pub fn sym_gradient(u: &SpectralVectorField) -> SpectralMatrixField {
    let g = u.grid();
    let k = [g.k1(), g.k2()];
    let d = |i: usize, j: usize, idx: usize| I * k[i][idx] as f64 * u.comp(j)[idx];
    let m11: Vec<_> = (0..g.len()).map(|x| d(0, 0, x)).collect();
    let m12: Vec<_> = (0..g.len()).map(|x| 0.5 * (d(0, 1, x) + d(1, 0, x))).collect();
    let m22: Vec<_> = (0..g.len()).map(|x| d(1, 1, x)).collect();
    SpectralMatrixField::from_components(g, [m11, m12.clone(), m12, m22]).expect("same grid")
}

/// `(div M)_j = Σ_i ∂_i M_{ij}`.
pub fn divergence(m: &SpectralMatrixField) -> SpectralVectorField {
    let g = m.grid();
    let k = [g.k1(), g.k2()];
    let comps = std::array::from_fn(|j| {
        (0..g.len())
            .map(|idx| I * (k[0][idx] as f64 * m.entry(0, j)[idx] + k[1][idx] as f64 * m.entry(1, j)[idx]))
            .collect()
    });
    SpectralVectorField::from_components(g, comps).expect("same grid")
}

/// `∂_m u` for `m ∈ {0, 1}`.
pub fn partial(u: &SpectralVectorField, m: usize) -> SpectralVectorField {
    let g = u.grid();
    let k = if m == 0 { g.k1() } else { g.k2() };
    let comps = std::array::from_fn(|c| {
        u.comp(c)
            .iter()
            .zip(k)
            .map(|(v, &kk)| I * kk as f64 * v)
            .collect()
    });
    let mut out = SpectralVectorField::from_components(g, comps).expect("same grid");
    out.set_divergence_free(u.is_divergence_free());
    out
}

/// Normalized `L²` pairing `Σ_k Re(û·conj v̂) = (2π)^{-2} ∫ u·v`.
pub fn inner(u: &SpectralVectorField, v: &SpectralVectorField) -> f64 {
    let mut s = 0.0;
    for c in 0..2 {
        for (a, b) in u.comp(c).iter().zip(v.comp(c)) {
            s += a.re * b.re + a.im * b.im;
        }
    }
    s
}

pub fn matrix_inner(m: &SpectralMatrixField, n: &SpectralMatrixField) -> f64 {
    let mut s = 0.0;
    for c in 0..4 {
        for (a, b) in m.comps()[c].iter().zip(&n.comps()[c]) {
            s += a.re * b.re + a.im * b.im;
        }
    }
    s
}

pub fn l2_norm(u: &SpectralVectorField) -> f64 {
    inner(u, u).sqrt()
}

/// Homogeneous Sobolev norm `(Σ |k|^{2α} |û(k)|²)^{1/2}`.
pub fn sobolev_norm(u: &SpectralVectorField, alpha: f64) -> f64 {
    let g = u.grid();
    let mut s = 0.0;
    for c in 0..2 {
        for (idx, v) in u.comp(c).iter().enumerate() {
            if idx != 0 {
                s += g.ksq()[idx].powf(alpha) * v.norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Pointwise `½(u⊗v + v⊗u)` on grid values.
pub fn sym_tensor_values(u: &[Vec<f64>; 2], v: &[Vec<f64>; 2]) -> [Vec<f64>; 4] {
    let len = u[0].len();
    let mut out: [Vec<f64>; 4] = std::array::from_fn(|_| vec![0.0; len]);
    for x in 0..len {
        out[0][x] = u[0][x] * v[0][x];
        out[1][x] = 0.5 * (u[0][x] * v[1][x] + u[1][x] * v[0][x]);
        out[3][x] = u[1][x] * v[1][x];
    }
    out[2] = out[1].clone();
    out
}

/// `u ⊗_s v` with the product evaluated on the grid and masked to retained modes.
pub fn tensor_sym(u: &SpectralVectorField, v: &SpectralVectorField) -> Result<SpectralMatrixField> {
    u.grid().check_same(v.grid())?;
    let (pu, pv) = (u.to_physical(), v.to_physical());
    Ok(SpectralMatrixField::from_physical(
        u.grid(),
        &sym_tensor_values(&pu, &pv),
        true,
    ))
}

/// Pointwise `M v` on grid values.
pub fn matvec_values(m: &[Vec<f64>; 4], v: &[Vec<f64>; 2]) -> [Vec<f64>; 2] {
    let len = v[0].len();
    let mut out = [vec![0.0; len], vec![0.0; len]];
    for x in 0..len {
        out[0][x] = m[0][x] * v[0][x] + m[1][x] * v[1][x];
        out[1][x] = m[2][x] * v[0][x] + m[3][x] * v[1][x];
    }
    out
}

/// `M v` masked to retained modes; the mean is dropped.
pub fn matvec(m: &SpectralMatrixField, v: &SpectralVectorField) -> Result<SpectralVectorField> {
    m.grid().check_same(v.grid())?;
    let out = matvec_values(&m.to_physical(), &v.to_physical());
    Ok(SpectralVectorField::from_physical(v.grid(), &out))
}

/// Largest imaginary part left after synthesizing a field on the grid.
pub fn imaginary_residue(grid: &FourierGrid, coeffs: &[Complex64]) -> f64 {
    let n = grid.n();
    let mut worst: f64 = 0.0;
    let two_pi = 2.0 * std::f64::consts::PI;
    // direct synthesis on a few points
    for &(x1, x2) in &[(0usize, 0usize), (1, n / 3), (n / 2, n - 1)] {
        let mut s = Complex64::new(0.0, 0.0);
        for (idx, c) in coeffs.iter().enumerate() {
            let (a, b) = grid.wavevector(idx);
            let ph = two_pi * (a as f64 * x1 as f64 + b as f64 * x2 as f64) / n as f64;
            s += c * Complex64::new(ph.cos(), ph.sin());
        }
        worst = worst.max(s.im.abs());
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::random_field;

    #[test]
    fn shear_sym_gradient() {
        let g = FourierGrid::new(16).unwrap();
        // φ = (sin y, 0)
        let mut c0 = vec![ZERO; g.len()];
        c0[g.index(0, 1)] = Complex64::new(0.0, -0.5);
        c0[g.index(0, -1)] = Complex64::new(0.0, 0.5);
        let phi = SpectralVectorField::from_components(&g, [c0, vec![ZERO; g.len()]]).unwrap();
        let s = sym_gradient(&phi).to_physical();
        let n = g.n();
        for x2 in 0..n {
            let y = 2.0 * std::f64::consts::PI * x2 as f64 / n as f64;
            assert!((s[1][3 * n + x2] - 0.5 * y.cos()).abs() < 1e-13);
            assert!(s[0][3 * n + x2].abs() < 1e-13);
        }
        assert!((l2_norm(&phi) - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn leray_kills_gradients() {
        let g = FourierGrid::new(24).unwrap();
        let f = SpectralVectorField::from_canonical_fn(&g, |a, b| {
            let s = Complex64::new(1.0 / (1 + a * a + b * b) as f64, 0.3);
            [s * a as f64, s * b as f64]
        });
        assert!(l2_norm(&leray_project(&f)) < 1e-14);
    }

    #[test]
    fn heat_rejects_negative_time() {
        let g = FourierGrid::new(8).unwrap();
        let u = SpectralVectorField::zeros(&g);
        assert!(heat_propagate(&u, -1e-3).is_err());
    }

    #[test]
    fn imaginary_residue_small_for_hermitian() {
        let g = FourierGrid::new(16).unwrap();
        let f = random_field(&g, 3, 1.0, false);
        assert!(imaginary_residue(&g, f.comp(0)) < 1e-12);
    }

    #[test]
    fn trace_of_sym_gradient_is_divergence() {
        let g = FourierGrid::new(24).unwrap();
        let f = random_field(&g, 9, 1.0, false);
        let s = sym_gradient(&f);
        for idx in 0..g.len() {
            let (a, b) = g.wavevector(idx);
            let div = I * (a as f64 * f.comp(0)[idx] + b as f64 * f.comp(1)[idx]);
            assert!((s.entry(0, 0)[idx] + s.entry(1, 1)[idx] - div).norm() < 1e-12);
        }
    }
}
