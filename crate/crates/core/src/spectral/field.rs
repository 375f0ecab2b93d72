use num_complex::Complex64;
use std::ops::{Add, Mul, Neg, Sub};

use super::grid::FourierGrid;
use crate::error::{Result, SnsError};

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Mean-free real 2-vector field stored by its Fourier coefficients.
#[derive(Clone, Debug)]
pub struct SpectralVectorField {
    grid: FourierGrid,
    comps: [Vec<Complex64>; 2],
    divergence_free: bool,
}

/// Real 2x2 matrix field `[m11, m12, m21, m22]`; the mean mode is kept.
#[derive(Clone, Debug)]
pub struct SpectralMatrixField {
    grid: FourierGrid,
    comps: [Vec<Complex64>; 4],
    symmetric: bool,
}

impl SpectralVectorField {
    pub fn zeros(grid: &FourierGrid) -> Self {
        SpectralVectorField {
            grid: grid.clone(),
            comps: [vec![ZERO; grid.len()], vec![ZERO; grid.len()]],
            divergence_free: true,
        }
    }

    /// Builds a field from coefficient arrays, zeroing non-retained modes.
    pub fn from_components(grid: &FourierGrid, comps: [Vec<Complex64>; 2]) -> Result<Self> {
        for c in &comps {
            if c.len() != grid.len() {
                return Err(SnsError::InvalidArgument(format!(
                    "component length {} != {}",
                    c.len(),
                    grid.len()
                )));
            }
        }
        let mut f = SpectralVectorField {
            grid: grid.clone(),
            comps,
            divergence_free: false,
        };
        f.apply_mask();
        Ok(f)
    }

    /// Masked Fourier projection of grid values.
    pub fn from_physical(grid: &FourierGrid, values: &[Vec<f64>; 2]) -> Self {
        let (a, b) = grid.from_physical_pair(&values[0], &values[1], false);
        SpectralVectorField {
            grid: grid.clone(),
            comps: [a, b],
            divergence_free: false,
        }
    }

    /// Field with `û(k) = f(k1, k2)` on the canonical half-plane, completed by Hermitian symmetry.
    pub fn from_canonical_fn<F>(grid: &FourierGrid, mut f: F) -> Self
    where
        F: FnMut(i32, i32) -> [Complex64; 2],
    {
        let mut out = Self::zeros(grid);
        for idx in grid.canonical_modes() {
            let (a, b) = grid.wavevector(idx);
            let v = f(a, b);
            let j = grid.neg(idx);
            for c in 0..2 {
                out.comps[c][idx] = v[c];
                out.comps[c][j] = v[c].conj();
            }
        }
        out.divergence_free = false;
        out
    }

    pub fn grid(&self) -> &FourierGrid {
        &self.grid
    }
    pub fn comp(&self, c: usize) -> &[Complex64] {
        &self.comps[c]
    }
    pub fn comps(&self) -> &[Vec<Complex64>; 2] {
        &self.comps
    }
    pub fn comp_mut(&mut self, c: usize) -> &mut Vec<Complex64> {
        self.divergence_free = false;
        &mut self.comps[c]
    }
    pub fn into_components(self) -> [Vec<Complex64>; 2] {
        self.comps
    }
    pub fn is_divergence_free(&self) -> bool {
        self.divergence_free
    }
    pub(crate) fn set_divergence_free(&mut self, v: bool) {
        self.divergence_free = v;
    }

    fn apply_mask(&mut self) {
        let keep = self.grid.retained();
        for c in self.comps.iter_mut() {
            for (v, &k) in c.iter_mut().zip(keep) {
                if !k {
                    *v = ZERO;
                }
            }
        }
    }

    pub fn to_physical(&self) -> [Vec<f64>; 2] {
        let (a, b) = self.grid.to_physical_pair(&self.comps[0], &self.comps[1]);
        [a, b]
    }

    /// Largest `|û(-k) - conj û(k)|` over all modes.
    pub fn hermitian_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for c in &self.comps {
            for idx in 0..self.grid.len() {
                let j = self.grid.neg(idx);
                worst = worst.max((c[j] - c[idx].conj()).norm());
            }
        }
        worst
    }

    /// Largest `|k·û(k)| / |û(k)|` over retained modes.
    pub fn divergence_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for idx in 0..self.grid.len() {
            let (a, b) = self.grid.wavevector(idx);
            let u = [self.comps[0][idx], self.comps[1][idx]];
            let mag = (u[0].norm_sqr() + u[1].norm_sqr()).sqrt();
            if mag > 0.0 {
                let d = u[0] * a as f64 + u[1] * b as f64;
                worst = worst.max(d.norm() / mag);
            }
        }
        worst
    }

    /// Checks `|k·û(k)| <= tol·|û(k)|` and tags the field divergence-free.
    pub fn check_divergence_free(mut self, tol: f64) -> Result<Self> {
        let r = self.divergence_residual();
        if r > tol {
            return Err(SnsError::NotDivergenceFree(r));
        }
        self.divergence_free = true;
        Ok(self)
    }

    pub fn map_modes<F: Fn(usize) -> f64>(&self, f: F) -> Self {
        let mut out = self.clone();
        for c in out.comps.iter_mut() {
            for (i, v) in c.iter_mut().enumerate() {
                *v *= f(i);
            }
        }
        out
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        for c in out.comps.iter_mut() {
            for v in c.iter_mut() {
                *v *= s;
            }
        }
        out
    }

    /// `self += s * other`
    pub fn axpy(&mut self, s: f64, other: &SpectralVectorField) {
        for (a, b) in self.comps.iter_mut().zip(&other.comps) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y * s;
            }
        }
        self.divergence_free = self.divergence_free && other.divergence_free;
    }

    pub fn max_abs(&self) -> f64 {
        self.comps
            .iter()
            .flat_map(|c| c.iter())
            .fold(0.0f64, |m, v| m.max(v.norm()))
    }

    pub fn is_finite(&self) -> bool {
        self.comps
            .iter()
            .flat_map(|c| c.iter())
            .all(|v| v.re.is_finite() && v.im.is_finite())
    }
}

impl SpectralMatrixField {
    pub fn zeros(grid: &FourierGrid) -> Self {
        SpectralMatrixField {
            grid: grid.clone(),
            comps: std::array::from_fn(|_| vec![ZERO; grid.len()]),
            symmetric: true,
        }
    }

    /// Constant field `s·Id`.
    pub fn identity(grid: &FourierGrid, s: f64) -> Self {
        let mut m = Self::zeros(grid);
        m.comps[0][0] = Complex64::new(s, 0.0);
        m.comps[3][0] = Complex64::new(s, 0.0);
        m
    }

    pub fn from_components(grid: &FourierGrid, comps: [Vec<Complex64>; 4]) -> Result<Self> {
        if comps.iter().any(|c| c.len() != grid.len()) {
            return Err(SnsError::InvalidArgument("matrix component length".into()));
        }
        let symmetric = comps[1]
            .iter()
            .zip(&comps[2])
            .all(|(a, b)| (a - b).norm() <= 1e-14 * (1.0 + a.norm()));
        let mut m = SpectralMatrixField {
            grid: grid.clone(),
            comps,
            symmetric,
        };
        let keep = grid.retained();
        for c in m.comps.iter_mut() {
            for (i, v) in c.iter_mut().enumerate() {
                if i != 0 && !keep[i] {
                    *v = ZERO;
                }
            }
        }
        Ok(m)
    }

    /// Masked projection of grid values, keeping the mean.
    pub fn from_physical(grid: &FourierGrid, values: &[Vec<f64>; 4], symmetric: bool) -> Self {
        let (c0, c3) = grid.from_physical_pair(&values[0], &values[3], true);
        let (c1, c2) = if symmetric {
            let c1 = grid.from_physical(&values[1], true);
            (c1.clone(), c1)
        } else {
            grid.from_physical_pair(&values[1], &values[2], true)
        };
        SpectralMatrixField {
            grid: grid.clone(),
            comps: [c0, c1, c2, c3],
            symmetric,
        }
    }

    pub fn grid(&self) -> &FourierGrid {
        &self.grid
    }
    /// Component `(i, j)` with `i, j ∈ {0, 1}`.
    pub fn entry(&self, i: usize, j: usize) -> &[Complex64] {
        &self.comps[2 * i + j]
    }
    pub fn comps(&self) -> &[Vec<Complex64>; 4] {
        &self.comps
    }
    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn to_physical(&self) -> [Vec<f64>; 4] {
        let (p0, p3) = self.grid.to_physical_pair(&self.comps[0], &self.comps[3]);
        let (p1, p2) = if self.symmetric {
            let p1 = self.grid.to_physical(&self.comps[1]);
            (p1.clone(), p1)
        } else {
            self.grid.to_physical_pair(&self.comps[1], &self.comps[2])
        };
        [p0, p1, p2, p3]
    }

    pub fn mean(&self) -> [f64; 4] {
        std::array::from_fn(|c| self.comps[c][0].re)
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        for c in out.comps.iter_mut() {
            for v in c.iter_mut() {
                *v *= s;
            }
        }
        out
    }

    pub fn map_modes<F: Fn(usize) -> f64>(&self, f: F) -> Self {
        let mut out = self.clone();
        for c in out.comps.iter_mut() {
            for (i, v) in c.iter_mut().enumerate() {
                *v *= f(i);
            }
        }
        out
    }

    pub fn axpy(&mut self, s: f64, other: &SpectralMatrixField) {
        for (a, b) in self.comps.iter_mut().zip(&other.comps) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y * s;
            }
        }
        self.symmetric = self.symmetric && other.symmetric;
    }

    pub fn max_abs(&self) -> f64 {
        self.comps
            .iter()
            .flat_map(|c| c.iter())
            .fold(0.0f64, |m, v| m.max(v.norm()))
    }
}

impl Add for &SpectralVectorField {
    type Output = SpectralVectorField;
    fn add(self, rhs: Self) -> SpectralVectorField {
        let mut out = self.clone();
        out.axpy(1.0, rhs);
        out
    }
}

impl Sub for &SpectralVectorField {
    type Output = SpectralVectorField;
    fn sub(self, rhs: Self) -> SpectralVectorField {
        let mut out = self.clone();
        out.axpy(-1.0, rhs);
        out
    }
}

impl Neg for &SpectralVectorField {
    type Output = SpectralVectorField;
    fn neg(self) -> SpectralVectorField {
        self.scaled(-1.0)
    }
}

impl Mul<&SpectralVectorField> for f64 {
    type Output = SpectralVectorField;
    fn mul(self, rhs: &SpectralVectorField) -> SpectralVectorField {
        rhs.scaled(self)
    }
}

impl Add for &SpectralMatrixField {
    type Output = SpectralMatrixField;
    fn add(self, rhs: Self) -> SpectralMatrixField {
        let mut out = self.clone();
        out.axpy(1.0, rhs);
        out
    }
}

impl Sub for &SpectralMatrixField {
    type Output = SpectralMatrixField;
    fn sub(self, rhs: Self) -> SpectralMatrixField {
        let mut out = self.clone();
        out.axpy(-1.0, rhs);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mask_drops_mean_and_high_modes() {
        let g = FourierGrid::new(16).unwrap();
        let mut c = vec![Complex64::new(1.0, 0.0); g.len()];
        c[0] = Complex64::new(3.0, 0.0);
        let f = SpectralVectorField::from_components(&g, [c.clone(), c]).unwrap();
        assert_eq!(f.comp(0)[0], ZERO);
        assert_eq!(f.comp(0)[g.index(6, 0)], ZERO);
        assert_eq!(f.comp(0)[g.index(5, -5)], Complex64::new(1.0, 0.0));
    }

    #[test]
    fn canonical_fn_is_hermitian() {
        let g = FourierGrid::new(24).unwrap();
        let f = SpectralVectorField::from_canonical_fn(&g, |a, b| {
            [Complex64::new(a as f64, b as f64), Complex64::new(1.0, -(a * b) as f64)]
        });
        assert_eq!(f.hermitian_residual(), 0.0);
        let p = f.to_physical();
        let back = SpectralVectorField::from_physical(&g, &p);
        assert!((&back - &f).max_abs() < 1e-12);
    }

    #[test]
    fn identity_has_only_mean() {
        let g = FourierGrid::new(8).unwrap();
        let m = SpectralMatrixField::identity(&g, 2.5);
        let p = m.to_physical();
        assert!(p[0].iter().all(|v| (v - 2.5).abs() < 1e-14));
        assert!(p[1].iter().all(|v| v.abs() < 1e-14));
    }
}
