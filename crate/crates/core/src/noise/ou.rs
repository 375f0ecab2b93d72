use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Result, SnsError};
use crate::spectral::{FourierGrid, SpectralVectorField, ZERO};

/// Stream purposes; each mode pair draws from its own ChaCha stream per purpose.
#[derive(Clone, Copy, Debug)]
pub enum Purpose {
    Forcing = 1,
    Zeta = 2,
    Initial = 3,
    Sampling = 4,
}

fn zigzag(k: i32) -> u64 {
    ((k << 1) ^ (k >> 31)) as u32 as u64
}

/// Counter-based generator for the mode pair `±k`: independent of grid size and thread count.
pub fn mode_stream(seed: u64, purpose: Purpose, k1: i32, k2: i32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((purpose as u64) << 56) | (zigzag(k1) << 28) | zigzag(k2));
    rng
}

/// Complex Gaussian with `E|z|² = 1`.
pub fn complex_normal(rng: &mut ChaCha8Rng) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// `e^{-x} Σ_{j >= m} x^j / j!`, i.e. `1 - e^{-x} Σ_{j < m} x^j / j!`, without cancellation.
fn exp_tail(x: f64, m: u32) -> f64 {
    if x > 1.0 {
        let mut partial = 0.0;
        let mut term = 1.0;
        for j in 0..m {
            if j > 0 {
                term *= x / j as f64;
            }
            partial += term;
        }
        1.0 - (-x).exp() * partial
    } else {
        if x == 0.0 {
            return 0.0;
        }
        let mut term = 1.0;
        for j in 1..=m {
            term *= x / j as f64;
        }
        let mut sum = 0.0;
        let mut j = m;
        loop {
            sum += term;
            j += 1;
            term *= x / j as f64;
            if term < 1e-18 * sum {
                break;
            }
        }
        (-x).exp() * sum
    }
}

/// Variance `(1 - e^{-2|k|²δ}) / (2|k|²)` of one OU increment.
pub fn ou_increment_variance(ksq: f64, delta: f64) -> f64 {
    if ksq == 0.0 {
        return delta;
    }
    exp_tail(2.0 * ksq * delta, 1) / (2.0 * ksq)
}

/// Covariance of `(∫ e^{-a(δ-u)} dW_u, ∫ (δ-u) e^{-a(δ-u)} dW_u)` over one step, `a = |k|²`.
pub fn joint_covariance(ksq: f64, delta: f64) -> [f64; 3] {
    let a = ksq;
    let x = 2.0 * a * delta;
    if a * delta < 1e-300 {
        return [delta, delta * delta / 2.0, delta.powi(3) / 3.0];
    }
    let v11 = exp_tail(x, 1) / (2.0 * a);
    let v12 = exp_tail(x, 2) / (4.0 * a * a);
    let v22 = exp_tail(x, 3) / (4.0 * a * a * a);
    [v11, v12, v22]
}

/// One exact OU step `F ← e^{-|k|²δ} F + G` from a unit complex Gaussian `z`.
pub fn ou_step(f: Complex64, ksq: f64, delta: f64, z: Complex64) -> Complex64 {
    f * (-ksq * delta).exp() + z * ou_increment_variance(ksq, delta).sqrt()
}

/// Direction `d(k) = ±k⊥/|k|`, sign chosen so that `d(-k) = d(k)`.
pub fn direction(k1: i32, k2: i32) -> [f64; 2] {
    let r = ((k1 * k1 + k2 * k2) as f64).sqrt();
    let s = if FourierGrid::is_canonical(k1, k2) { 1.0 } else { -1.0 };
    [-s * k2 as f64 / r, s * k1 as f64 / r]
}

#[derive(Clone)]
struct ModeState {
    idx: usize,
    neg: usize,
    ksq: f64,
    dir: [f64; 2],
    f: Complex64,
    q: Complex64,
    rng: ChaCha8Rng,
    /// `(δ, [√V11, V12/√V11, rest, e^{-|k|²δ}])` for the last step size.
    coeffs: Option<(f64, [f64; 4])>,
}

fn step_coefficients(ksq: f64, delta: f64) -> [f64; 4] {
    let [v11, v12, v22] = joint_covariance(ksq, delta);
    let decay = (-ksq * delta).exp();
    if v11 > 0.0 {
        let s11 = v11.sqrt();
        let c = v12 / s11;
        [s11, c, (v22 - c * c).max(0.0).sqrt(), decay]
    } else {
        [0.0, 0.0, 0.0, decay]
    }
}

/// Ensemble of the divergence-free OU modes `F_t(k)` driving `X`, together with the
/// heat convolution `Q = ∫ e^{(t-s)Δ} 2X_s ds`, both advanced exactly.
#[derive(Clone)]
pub struct OuEnsemble {
    grid: FourierGrid,
    modes: Vec<ModeState>,
    t: f64,
}

impl OuEnsemble {
    /// `X_0 = Q_0 = 0`.
    pub fn new(grid: &FourierGrid, seed: u64) -> Self {
        Self::with_purpose(grid, seed, Purpose::Forcing)
    }

    pub fn with_purpose(grid: &FourierGrid, seed: u64, purpose: Purpose) -> Self {
        let modes = grid
            .canonical_modes()
            .into_iter()
            .map(|idx| {
                let (a, b) = grid.wavevector(idx);
                ModeState {
                    idx,
                    neg: grid.neg(idx),
                    ksq: grid.ksq()[idx],
                    dir: direction(a, b),
                    f: ZERO,
                    q: ZERO,
                    rng: mode_stream(seed, purpose, a, b),
                    coeffs: None,
                }
            })
            .collect();
        OuEnsemble {
            grid: grid.clone(),
            modes,
            t: 0.0,
        }
    }

    pub fn grid(&self) -> &FourierGrid {
        &self.grid
    }
    pub fn time(&self) -> f64 {
        self.t
    }
    pub fn num_modes(&self) -> usize {
        self.modes.len()
    }
    /// `F(k)` on the canonical half-plane, in grid index order of `canonical_modes`.
    pub fn amplitudes(&self) -> Vec<Complex64> {
        self.modes.iter().map(|m| m.f).collect()
    }
    pub fn wavevector_sq(&self) -> Vec<f64> {
        self.modes.iter().map(|m| m.ksq).collect()
    }

    /// Advances `(F, Q)` by `δ` with the exact joint Gaussian transition.
    pub fn evolve(&mut self, delta: f64) -> Result<()> {
        if !(delta >= 0.0) {
            return Err(SnsError::InvalidArgument(format!("negative step {delta}")));
        }
        self.modes.par_iter_mut().for_each(|m| {
            let z1 = complex_normal(&mut m.rng);
            let z2 = complex_normal(&mut m.rng);
            let [s11, c, rest, decay] = match m.coeffs {
                Some((d, k)) if d == delta => k,
                _ => {
                    let k = step_coefficients(m.ksq, delta);
                    m.coeffs = Some((delta, k));
                    k
                }
            };
            let (g1, g2) = (z1 * s11, z1 * c + z2 * rest);
            m.q = m.q * decay + 2.0 * (m.f * (delta * decay) + g2);
            m.f = m.f * decay + g1;
        });
        self.t += delta;
        Ok(())
    }

    /// Draws every mode from its law at time `t` started from zero.
    pub fn sample_at(&mut self, t: f64) {
        self.modes.par_iter_mut().for_each(|m| {
            m.f = complex_normal(&mut m.rng) * ou_increment_variance(m.ksq, t).sqrt();
            m.q = ZERO;
        });
        self.t = t;
    }

    fn assemble(&self, pick: impl Fn(&ModeState) -> Complex64) -> SpectralVectorField {
        let len = self.grid.len();
        let mut c = [vec![ZERO; len], vec![ZERO; len]];
        for m in &self.modes {
            let v = pick(m);
            for (comp, d) in c.iter_mut().zip(m.dir) {
                comp[m.idx] = v * d;
                comp[m.neg] = v.conj() * d;
            }
        }
        let mut out = SpectralVectorField::from_components(&self.grid, c).expect("grid");
        out.set_divergence_free(true);
        out
    }

    /// `X̂(k) = F(k) d(k)`.
    pub fn x_field(&self) -> SpectralVectorField {
        self.assemble(|m| m.f)
    }

    /// `Q̂(k) = q(k) d(k)`.
    pub fn q_field(&self) -> SpectralVectorField {
        self.assemble(|m| m.q)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tails_match_closed_forms() {
        for &x in &[1e-6f64, 1e-3, 0.3, 0.99, 1.01, 5.0, 40.0] {
            let e = (-x).exp();
            let exact1 = -(-x).exp_m1();
            assert!((exp_tail(x, 1) - exact1).abs() <= 1e-15 * exact1.max(1e-300) * 4.0);
            let closed3 = 1.0 - e * (1.0 + x + x * x / 2.0);
            if x > 0.5 {
                assert!((exp_tail(x, 3) - closed3).abs() < 1e-13);
            }
        }
        let x = 1e-4f64;
        let series = (-x).exp() * x.powi(3) / 6.0 * (1.0 + x / 4.0 + x * x / 20.0);
        assert!((exp_tail(x, 3) - series).abs() < 1e-14 * series);
    }

    #[test]
    fn tiny_step_limit() {
        let delta = 1e-15;
        for &ksq in &[1.0, 50.0, 500.0, 2000.0] {
            let f = Complex64::new(0.8, -0.3);
            let moved = (ou_step(f, ksq, delta, Complex64::new(0.0, 0.0)) - f).norm();
            assert!(moved <= 1.01 * ksq * delta * f.norm());
            if ksq <= 500.0 {
                assert!(moved < 1e-12);
            }
            let v = ou_increment_variance(ksq, delta);
            assert!(v > 0.0 && v <= delta);
            let [v11, v12, v22] = joint_covariance(ksq, delta);
            assert!(v11 <= delta && v12 <= delta * delta && v22 <= delta.powi(3));
        }
    }

    #[test]
    fn direction_is_even_and_orthogonal() {
        for (a, b) in [(1, 0), (0, 1), (3, -2), (-4, 5)] {
            let d = direction(a, b);
            assert_eq!(d, direction(-a, -b));
            assert!((d[0] * a as f64 + d[1] * b as f64).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_step_keeps_state() {
        let g = FourierGrid::new(16).unwrap();
        let mut e = OuEnsemble::new(&g, 3);
        e.evolve(0.1).unwrap();
        let before = e.amplitudes();
        e.evolve(0.0).unwrap();
        assert_eq!(before, e.amplitudes());
        assert!(e.evolve(-1.0).is_err());
    }

    #[test]
    fn fields_are_hermitian_and_divergence_free() {
        let g = FourierGrid::new(24).unwrap();
        let mut e = OuEnsemble::new(&g, 1);
        e.evolve(0.5).unwrap();
        let x = e.x_field();
        assert_eq!(x.hermitian_residual(), 0.0);
        assert!(x.divergence_residual() < 1e-15);
        assert!(e.q_field().divergence_residual() < 1e-15);
    }

    #[test]
    fn streams_do_not_depend_on_grid() {
        let a = OuEnsemble::new(&FourierGrid::new(16).unwrap(), 9);
        let b = OuEnsemble::new(&FourierGrid::new(32).unwrap(), 9);
        let (mut a, mut b) = (a, b);
        a.evolve(0.2).unwrap();
        b.evolve(0.2).unwrap();
        let xa = a.x_field();
        let xb = b.x_field();
        let (ga, gb) = (a.grid().clone(), b.grid().clone());
        assert_eq!(xa.comp(0)[ga.index(2, -3)], xb.comp(0)[gb.index(2, -3)]);
    }
}
