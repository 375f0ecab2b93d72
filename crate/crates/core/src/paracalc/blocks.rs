use num_complex::Complex64;

use super::partition::DyadicPartition;
use crate::error::{Result, SnsError};
use crate::spectral::{SpectralMatrixField, SpectralVectorField};

/// Grid values of every block `Δ_j a`, `j = -1..=j_max`, of one scalar coefficient array.
pub(crate) fn scalar_blocks(part: &DyadicPartition, coeffs: &[Complex64]) -> Vec<Vec<f64>> {
    let g = part.grid();
    (-1..=part.j_max())
        .map(|j| {
            let w = part.weights(j).expect("index in range");
            let mut any = false;
            let c: Vec<Complex64> = coeffs
                .iter()
                .zip(w)
                .map(|(v, &r)| {
                    let out = v * r;
                    any |= out.re != 0.0 || out.im != 0.0;
                    out
                })
                .collect();
            if any {
                g.to_physical(&c)
            } else {
                vec![0.0; g.len()]
            }
        })
        .collect()
}

/// `Δ_j φ`.
pub fn paley_block(part: &DyadicPartition, phi: &SpectralVectorField, j: i32) -> Result<SpectralVectorField> {
    part.grid().check_same(phi.grid())?;
    let w = part.weights(j)?;
    let mut out = phi.map_modes(|i| w[i]);
    out.set_divergence_free(phi.is_divergence_free());
    Ok(out)
}

/// `Δ_j M`.
pub fn paley_block_matrix(part: &DyadicPartition, m: &SpectralMatrixField, j: i32) -> Result<SpectralMatrixField> {
    part.grid().check_same(m.grid())?;
    let w = part.weights(j)?;
    Ok(m.map_modes(|i| w[i]))
}

fn check_exponents(p: f64, q: f64) -> Result<()> {
    if !(p >= 1.0) || !(q >= 1.0) {
        return Err(SnsError::InvalidArgument(format!("Besov exponents p={p}, q={q} must be >= 1")));
    }
    Ok(())
}

/// `L^p` norm of pointwise Euclidean magnitudes, area-normalized.
fn lp_of_magnitude(mag2: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        mag2.iter().fold(0.0f64, |m, v| m.max(*v)).sqrt()
    } else {
        let s: f64 = mag2.iter().map(|v| v.powf(p / 2.0)).sum();
        (s / mag2.len() as f64).powf(1.0 / p)
    }
}

/// `L^p` norm of a field given by component coefficient arrays; `p = 2` by Parseval,
/// other exponents by quadrature on the `2n` refinement.
fn lp_norm_components(part: &DyadicPartition, comps: &[&[Complex64]], p: f64, has_mean: bool) -> f64 {
    let g = part.grid();
    if p == 2.0 {
        let s: f64 = comps
            .iter()
            .flat_map(|c| c.iter().enumerate())
            .filter(|(i, _)| *i != 0 || has_mean)
            .map(|(_, v)| v.norm_sqr())
            .sum();
        return s.sqrt();
    }
    let mut mag2 = vec![0.0; 4 * g.len()];
    for pair in comps.chunks(2) {
        let (u, v) = if pair.len() == 2 {
            g.to_fine_physical_pair(pair[0], pair[1])
        } else {
            (g.to_fine_physical(pair[0]), Vec::new())
        };
        for (i, m) in mag2.iter_mut().enumerate() {
            *m += u[i] * u[i] + v.get(i).map_or(0.0, |x| x * x);
        }
    }
    lp_of_magnitude(&mag2, p)
}

fn combine(block_norms: impl Iterator<Item = (i32, f64)>, alpha: f64, q: f64) -> f64 {
    let weighted = block_norms.map(|(j, v)| 2f64.powf(alpha * j as f64) * v);
    if q.is_infinite() {
        weighted.fold(0.0, f64::max)
    } else {
        weighted.map(|v| v.powf(q)).sum::<f64>().powf(1.0 / q)
    }
}

/// `‖φ‖_{B^α_{p,q}} = ‖(2^{jα} ‖Δ_j φ‖_{L^p})_j‖_{ℓ^q}`.
pub fn besov_norm(part: &DyadicPartition, phi: &SpectralVectorField, alpha: f64, p: f64, q: f64) -> Result<f64> {
    check_exponents(p, q)?;
    part.grid().check_same(phi.grid())?;
    let norms = (-1..=part.j_max()).map(|j| {
        let b = paley_block(part, phi, j).expect("checked");
        (j, lp_norm_components(part, &[b.comp(0), b.comp(1)], p, false))
    });
    Ok(combine(norms.collect::<Vec<_>>().into_iter(), alpha, q))
}

/// Besov norm of a matrix field with pointwise Frobenius magnitude.
pub fn besov_norm_matrix(part: &DyadicPartition, m: &SpectralMatrixField, alpha: f64, p: f64, q: f64) -> Result<f64> {
    check_exponents(p, q)?;
    part.grid().check_same(m.grid())?;
    let norms: Vec<_> = (-1..=part.j_max())
        .map(|j| {
            let b = paley_block_matrix(part, m, j).expect("checked");
            let c = b.comps();
            (j, lp_norm_components(part, &[&c[0], &c[1], &c[2], &c[3]], p, true))
        })
        .collect();
    Ok(combine(norms.into_iter(), alpha, q))
}

/// Plain `L^p` norm of a vector field.
pub fn lp_norm(part: &DyadicPartition, phi: &SpectralVectorField, p: f64) -> Result<f64> {
    check_exponents(p, 1.0)?;
    Ok(lp_norm_components(part, &[phi.comp(0), phi.comp(1)], p, false))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{l2_norm, random_field, FourierGrid};

    #[test]
    fn blocks_reassemble_field() {
        let g = FourierGrid::new(48).unwrap();
        let part = DyadicPartition::new(&g);
        let f = random_field(&g, 5, 1.0, true);
        let mut acc = SpectralVectorField::zeros(&g);
        for j in -1..=part.j_max() {
            acc.axpy(1.0, &paley_block(&part, &f, j).unwrap());
        }
        assert!((&acc - &f).max_abs() < 1e-14);
    }

    #[test]
    fn b022_is_l2_up_to_overlap() {
        let g = FourierGrid::new(32).unwrap();
        let part = DyadicPartition::new(&g);
        let f = random_field(&g, 2, 1.0, true);
        let b = besov_norm(&part, &f, 0.0, 2.0, 2.0).unwrap();
        let l2 = l2_norm(&f);
        assert!(b <= l2 * (1.0 + 1e-12) && b >= l2 / 2f64.sqrt());
    }

    #[test]
    fn quadrature_lp_matches_parseval_for_p2() {
        let g = FourierGrid::new(24).unwrap();
        let part = DyadicPartition::new(&g);
        let f = random_field(&g, 3, 1.0, true);
        let comps = [f.comp(0), f.comp(1)];
        let quad = lp_of_magnitude(
            &{
                let mut m = vec![0.0; 4 * g.len()];
                for c in comps {
                    for (a, v) in m.iter_mut().zip(g.to_fine_physical(c)) {
                        *a += v * v;
                    }
                }
                m
            },
            2.0,
        );
        assert!((quad - lp_norm(&part, &f, 2.0).unwrap()).abs() < 1e-12 * quad);
    }

    #[test]
    fn invalid_exponent_rejected() {
        let g = FourierGrid::new(16).unwrap();
        let part = DyadicPartition::new(&g);
        let f = SpectralVectorField::zeros(&g);
        assert!(besov_norm(&part, &f, 0.0, 0.5, 2.0).is_err());
        assert!(paley_block(&part, &f, 40).is_err());
    }
}
