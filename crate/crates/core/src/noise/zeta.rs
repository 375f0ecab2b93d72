use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;

use super::ou::{complex_normal, mode_stream, ou_increment_variance, Purpose};
use crate::error::{Result, SnsError};
use crate::spectral::{leray_project, FourierGrid, SpectralVectorField, ZERO};

/// Additional perturbation `ζ` entering the `Y` equation.
#[derive(Clone, Debug)]
pub enum ZetaMode {
    Off,
    /// Spectral Brownian increments with per-component standard deviation `σ|k|^{-θ}√δ`.
    Spectral { sigma: f64, theta: f64 },
    /// Constant-in-time forcing profile.
    Deterministic(SpectralVectorField),
}

impl ZetaMode {
    pub fn validate(&self) -> Result<()> {
        match self {
            ZetaMode::Spectral { sigma, theta } if !(*sigma >= 0.0) || !theta.is_finite() => Err(
                SnsError::InvalidArgument(format!("zeta sigma={sigma}, theta={theta}")),
            ),
            _ => Ok(()),
        }
    }
}

struct ZetaMode1 {
    idx: usize,
    neg: usize,
    ksq: f64,
    rng: ChaCha8Rng,
}

/// Sampler of `ζ` increments with per-mode counter-based streams.
pub struct ZetaDriver {
    grid: FourierGrid,
    mode: ZetaMode,
    modes: Vec<ZetaMode1>,
}

impl ZetaDriver {
    pub fn new(grid: &FourierGrid, seed: u64, mode: ZetaMode) -> Result<Self> {
        mode.validate()?;
        if let ZetaMode::Deterministic(f) = &mode {
            grid.check_same(f.grid())?;
        }
        let modes = grid
            .canonical_modes()
            .into_iter()
            .map(|idx| {
                let (a, b) = grid.wavevector(idx);
                ZetaMode1 {
                    idx,
                    neg: grid.neg(idx),
                    ksq: grid.ksq()[idx],
                    rng: mode_stream(seed, Purpose::Zeta, a, b),
                }
            })
            .collect();
        Ok(ZetaDriver {
            grid: grid.clone(),
            mode,
            modes,
        })
    }

    pub fn mode(&self) -> &ZetaMode {
        &self.mode
    }

    pub fn is_off(&self) -> bool {
        matches!(self.mode, ZetaMode::Off)
    }

    fn gaussian_field(&mut self, std: impl Fn(f64) -> f64) -> SpectralVectorField {
        let len = self.grid.len();
        let mut c = [vec![ZERO; len], vec![ZERO; len]];
        for m in self.modes.iter_mut() {
            let s = std(m.ksq);
            for comp in c.iter_mut() {
                let z: Complex64 = complex_normal(&mut m.rng) * s;
                comp[m.idx] = z;
                comp[m.neg] = z.conj();
            }
        }
        leray_project(&SpectralVectorField::from_components(&self.grid, c).expect("grid"))
    }

    /// Raw increment `ζ_{t+δ} - ζ_t`, Leray-projected.
    pub fn sample_increment(&mut self, delta: f64) -> Result<SpectralVectorField> {
        if !(delta >= 0.0) {
            return Err(SnsError::InvalidArgument(format!("negative step {delta}")));
        }
        match self.mode.clone() {
            ZetaMode::Off => Ok(SpectralVectorField::zeros(&self.grid)),
            ZetaMode::Spectral { sigma, theta } => {
                Ok(self.gaussian_field(|k2| sigma * k2.powf(-theta / 2.0) * delta.sqrt()))
            }
            ZetaMode::Deterministic(f) => Ok(f.scaled(delta)),
        }
    }

    /// `∫_0^δ e^{(δ-s)Δ} dζ_s` with its exact law.
    pub fn heat_convolved_increment(&mut self, delta: f64) -> Result<SpectralVectorField> {
        if !(delta >= 0.0) {
            return Err(SnsError::InvalidArgument(format!("negative step {delta}")));
        }
        match self.mode.clone() {
            ZetaMode::Off => Ok(SpectralVectorField::zeros(&self.grid)),
            ZetaMode::Spectral { sigma, theta } => Ok(self.gaussian_field(|k2| {
                sigma * k2.powf(-theta / 2.0) * ou_increment_variance(k2, delta).sqrt()
            })),
            ZetaMode::Deterministic(f) => {
                let k2 = self.grid.ksq();
                Ok(leray_project(&f.map_modes(|i| {
                    if k2[i] == 0.0 {
                        delta
                    } else {
                        -(-k2[i] * delta).exp_m1() / k2[i]
                    }
                })))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::l2_norm;

    #[test]
    fn off_mode_is_zero() {
        let g = FourierGrid::new(16).unwrap();
        let mut z = ZetaDriver::new(&g, 1, ZetaMode::Off).unwrap();
        assert_eq!(l2_norm(&z.sample_increment(0.1).unwrap()), 0.0);
    }

    #[test]
    fn spectral_increments_are_projected_and_scale() {
        let g = FourierGrid::new(32).unwrap();
        let mode = ZetaMode::Spectral { sigma: 1.0, theta: 0.5 };
        let mut z = ZetaDriver::new(&g, 4, mode).unwrap();
        let inc = z.sample_increment(1e-2).unwrap();
        assert!(inc.divergence_residual() < 1e-14);
        assert!(z.sample_increment(-1.0).is_err());
        let bad = ZetaMode::Spectral { sigma: -1.0, theta: 0.5 };
        assert!(ZetaDriver::new(&g, 4, bad).is_err());
    }
}
