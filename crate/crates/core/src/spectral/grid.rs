use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::fmt;
use std::sync::Arc;

use crate::error::{Result, SnsError};

/// Square Fourier grid on the torus `[0, 2π)²`.
///
/// Coefficients live in FFT layout: index `i1 * n + i2` carries the wavevector
/// `(freq(i1), freq(i2))`. Retained modes satisfy `|k1|, |k2| <= kmax`, `k != 0`,
/// with `kmax = floor((n - 1) / 3)` when dealiasing is on and `n / 2 - 1` otherwise.
#[derive(Clone)]
pub struct FourierGrid {
    inner: Arc<GridInner>,
}

struct GridInner {
    n: usize,
    kmax: i32,
    dealiased: bool,
    k1: Vec<i32>,
    k2: Vec<i32>,
    ksq: Vec<f64>,
    kabs: Vec<f64>,
    retained: Vec<bool>,
    neg: Vec<usize>,
    plans: FftPair,
    fine: FftPair,
}

struct FftPair {
    m: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl FftPair {
    fn new(m: usize) -> Self {
        let mut planner = FftPlanner::new();
        FftPair {
            m,
            fwd: planner.plan_fft_forward(m),
            inv: planner.plan_fft_inverse(m),
        }
    }

    fn transform(&self, buf: &mut [Complex64], inverse: bool) {
        let m = self.m;
        let plan = if inverse { &self.inv } else { &self.fwd };
        let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
        plan.process_with_scratch(buf, &mut scratch);
        transpose(buf, m);
        plan.process_with_scratch(buf, &mut scratch);
        transpose(buf, m);
    }
}

fn transpose(buf: &mut [Complex64], m: usize) {
    const B: usize = 16;
    for bi in (0..m).step_by(B) {
        for bj in (bi..m).step_by(B) {
            for i in bi..(bi + B).min(m) {
                let start = if bi == bj { i + 1 } else { bj };
                for j in start..(bj + B).min(m) {
                    buf.swap(i * m + j, j * m + i);
                }
            }
        }
    }
}

/// Signed frequency of FFT index `i` on an `m`-point axis.
pub fn freq(i: usize, m: usize) -> i32 {
    if i < m.div_ceil(2) {
        i as i32
    } else {
        i as i32 - m as i32
    }
}

fn index_of(k: i32, m: usize) -> usize {
    k.rem_euclid(m as i32) as usize
}

impl FourierGrid {
    /// Dealiased grid with `n` points per axis.
    pub fn new(n: usize) -> Result<Self> {
        Self::with_dealiasing(n, true)
    }

    pub fn with_dealiasing(n: usize, dealiased: bool) -> Result<Self> {
        if n < 4 {
            return Err(SnsError::InvalidArgument(format!("grid size {n} < 4")));
        }
        let kmax = if dealiased {
            ((n - 1) / 3) as i32
        } else {
            (n / 2) as i32 - 1
        };
        let len = n * n;
        let mut k1 = Vec::with_capacity(len);
        let mut k2 = Vec::with_capacity(len);
        for i1 in 0..n {
            for i2 in 0..n {
                k1.push(freq(i1, n));
                k2.push(freq(i2, n));
            }
        }
        let ksq: Vec<f64> = k1
            .iter()
            .zip(&k2)
            .map(|(&a, &b)| (a * a + b * b) as f64)
            .collect();
        let kabs = ksq.iter().map(|v| v.sqrt()).collect();
        let retained = k1
            .iter()
            .zip(&k2)
            .map(|(&a, &b)| a.abs() <= kmax && b.abs() <= kmax && (a, b) != (0, 0))
            .collect();
        let neg = k1
            .iter()
            .zip(&k2)
            .map(|(&a, &b)| index_of(-a, n) * n + index_of(-b, n))
            .collect();
        Ok(FourierGrid {
            inner: Arc::new(GridInner {
                neg,
                n,
                kmax,
                dealiased,
                k1,
                k2,
                ksq,
                kabs,
                retained,
                plans: FftPair::new(n),
                fine: FftPair::new(2 * n),
            }),
        })
    }

    pub fn n(&self) -> usize {
        self.inner.n
    }
    pub fn len(&self) -> usize {
        self.inner.n * self.inner.n
    }
    pub fn is_empty(&self) -> bool {
        false
    }
    pub fn kmax(&self) -> i32 {
        self.inner.kmax
    }
    pub fn dealiased(&self) -> bool {
        self.inner.dealiased
    }
    /// Largest retained `|k|`.
    pub fn radius(&self) -> f64 {
        (2.0f64).sqrt() * self.inner.kmax as f64
    }
    pub fn k1(&self) -> &[i32] {
        &self.inner.k1
    }
    pub fn k2(&self) -> &[i32] {
        &self.inner.k2
    }
    pub fn ksq(&self) -> &[f64] {
        &self.inner.ksq
    }
    pub fn kabs(&self) -> &[f64] {
        &self.inner.kabs
    }
    pub fn retained(&self) -> &[bool] {
        &self.inner.retained
    }
    pub fn wavevector(&self, idx: usize) -> (i32, i32) {
        (self.inner.k1[idx], self.inner.k2[idx])
    }
    pub fn index(&self, k1: i32, k2: i32) -> usize {
        index_of(k1, self.inner.n) * self.inner.n + index_of(k2, self.inner.n)
    }
    /// Index of `-k`.
    pub fn neg(&self, idx: usize) -> usize {
        self.inner.neg[idx]
    }
    pub fn is_retained(&self, k1: i32, k2: i32) -> bool {
        let m = self.inner.kmax;
        k1.abs() <= m && k2.abs() <= m && (k1, k2) != (0, 0)
    }
    /// Canonical half-plane: `k1 > 0`, or `k1 == 0` and `k2 > 0`.
    pub fn is_canonical(k1: i32, k2: i32) -> bool {
        k1 > 0 || (k1 == 0 && k2 > 0)
    }
    /// Retained wavevectors in the canonical half-plane, in row-major order.
    pub fn canonical_modes(&self) -> Vec<usize> {
        let m = self.inner.kmax;
        let mut out = Vec::new();
        for a in -m..=m {
            for b in -m..=m {
                if Self::is_canonical(a, b) {
                    out.push(self.index(a, b));
                }
            }
        }
        out
    }
    /// Every retained wavevector, row-major in `(k1, k2)` from `-kmax` to `kmax`.
    pub fn retained_modes(&self) -> Vec<usize> {
        let m = self.inner.kmax;
        let mut out = Vec::new();
        for a in -m..=m {
            for b in -m..=m {
                if (a, b) != (0, 0) {
                    out.push(self.index(a, b));
                }
            }
        }
        out
    }
    pub fn same_as(&self, other: &FourierGrid) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.inner.n == other.inner.n && self.inner.dealiased == other.inner.dealiased)
    }
    pub fn check_same(&self, other: &FourierGrid) -> Result<()> {
        if self.same_as(other) {
            Ok(())
        } else {
            Err(SnsError::GridMismatch(self.n(), other.n()))
        }
    }

    /// Grid values `u(x_j) = Σ û(k) e^{ik·x_j}` of a real field.
    pub fn to_physical(&self, coeffs: &[Complex64]) -> Vec<f64> {
        let mut buf = coeffs.to_vec();
        self.inner.plans.transform(&mut buf, true);
        buf.into_iter().map(|c| c.re).collect()
    }

    /// Masked Fourier coefficients of grid values; modes outside the retained set are zeroed.
    /// `keep_mean` keeps the `k = 0` coefficient.
    pub fn from_physical(&self, values: &[f64], keep_mean: bool) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.inner.plans.transform(&mut buf, false);
        let scale = 1.0 / self.len() as f64;
        for (i, c) in buf.iter_mut().enumerate() {
            if self.inner.retained[i] || (keep_mean && i == 0) {
                *c *= scale;
            } else {
                *c = Complex64::new(0.0, 0.0);
            }
        }
        buf
    }

    /// Grid values of two real fields from one complex transform of `a + i b`.
    pub fn to_physical_pair(&self, a: &[Complex64], b: &[Complex64]) -> (Vec<f64>, Vec<f64>) {
        let i = Complex64::new(0.0, 1.0);
        let mut buf: Vec<Complex64> = a.iter().zip(b).map(|(x, y)| x + i * y).collect();
        self.inner.plans.transform(&mut buf, true);
        buf.into_iter().map(|c| (c.re, c.im)).unzip()
    }

    /// Masked coefficients of two real grid fields from one complex transform.
    pub fn from_physical_pair(&self, u: &[f64], v: &[f64], keep_mean: bool) -> (Vec<Complex64>, Vec<Complex64>) {
        let mut buf: Vec<Complex64> = u.iter().zip(v).map(|(&x, &y)| Complex64::new(x, y)).collect();
        self.inner.plans.transform(&mut buf, false);
        let scale = 0.5 / self.len() as f64;
        let zero = Complex64::new(0.0, 0.0);
        let mut a = vec![zero; buf.len()];
        let mut b = vec![zero; buf.len()];
        for idx in 0..buf.len() {
            if self.inner.retained[idx] || (keep_mean && idx == 0) {
                let z = buf[idx];
                let zc = buf[self.inner.neg[idx]].conj();
                a[idx] = (z + zc) * scale;
                let d = (z - zc) * scale;
                b[idx] = Complex64::new(d.im, -d.re);
            }
        }
        (a, b)
    }

    /// Grid values on the `2n` refinement, used for `L^p` quadrature with `p != 2`.
    pub fn to_fine_physical(&self, coeffs: &[Complex64]) -> Vec<f64> {
        let buf = self.fine_transform(coeffs, None);
        buf.into_iter().map(|c| c.re).collect()
    }

    /// Two real fields on the `2n` refinement from one complex transform.
    pub fn to_fine_physical_pair(&self, a: &[Complex64], b: &[Complex64]) -> (Vec<f64>, Vec<f64>) {
        let buf = self.fine_transform(a, Some(b));
        buf.into_iter().map(|c| (c.re, c.im)).unzip()
    }

    fn fine_transform(&self, a: &[Complex64], b: Option<&[Complex64]>) -> Vec<Complex64> {
        let n = self.n();
        let m = 2 * n;
        let i = Complex64::new(0.0, 1.0);
        let mut buf = vec![Complex64::new(0.0, 0.0); m * m];
        for idx in 0..a.len() {
            let c = match b {
                Some(b) => a[idx] + i * b[idx],
                None => a[idx],
            };
            if c.re != 0.0 || c.im != 0.0 {
                let (k1, k2) = self.wavevector(idx);
                if k1.unsigned_abs() as usize * 2 == n || k2.unsigned_abs() as usize * 2 == n {
                    continue;
                }
                buf[index_of(k1, m) * m + index_of(k2, m)] = c;
            }
        }
        self.inner.fine.transform(&mut buf, true);
        buf
    }
}

impl fmt::Debug for FourierGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FourierGrid")
            .field("n", &self.inner.n)
            .field("kmax", &self.inner.kmax)
            .field("dealiased", &self.inner.dealiased)
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dealiased_radius() {
        let g = FourierGrid::new(64).unwrap();
        assert_eq!(g.kmax(), 21);
        assert_eq!(FourierGrid::new(128).unwrap().kmax(), 42);
        assert_eq!(FourierGrid::with_dealiasing(64, false).unwrap().kmax(), 31);
    }

    #[test]
    fn roundtrip_single_mode() {
        let g = FourierGrid::new(16).unwrap();
        let mut c = vec![Complex64::new(0.0, 0.0); g.len()];
        c[g.index(1, 2)] = Complex64::new(0.25, -0.5);
        c[g.index(-1, -2)] = Complex64::new(0.25, 0.5);
        let u = g.to_physical(&c);
        let back = g.from_physical(&u, false);
        for (a, b) in c.iter().zip(&back) {
            assert!((a - b).norm() < 1e-14);
        }
        let fine = g.to_fine_physical(&c);
        // x = (2π·3/32·2, ...) on the fine grid equals the coarse point (3, 5)
        assert!((fine[6 * 32 + 10] - u[3 * 16 + 5]).abs() < 1e-13);
    }

    #[test]
    fn canonical_half_plane_pairs_everything() {
        let g = FourierGrid::new(20).unwrap();
        let canon = g.canonical_modes();
        assert_eq!(2 * canon.len(), g.retained_modes().len());
        for &i in &canon {
            assert!(g.retained()[g.neg(i)]);
        }
    }
}
