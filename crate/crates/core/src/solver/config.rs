use std::collections::BTreeMap;
use std::path::PathBuf;

use crate::error::{Result, SnsError};
use crate::noise::{RenormWeight, ZetaMode};
use crate::spectral::SpectralVectorField;

/// Initial velocity `u_0`.
#[derive(Clone, Debug)]
pub enum InitialCondition {
    Zero,
    /// `(A sin y, 0)`.
    Shear { amplitude: f64 },
    /// Seeded divergence-free Gaussian field rescaled to the given `L²` norm.
    Random { norm: f64, decay: f64 },
    Field(SpectralVectorField),
}

/// How `ζ` is configured before the grid exists.
#[derive(Clone, Debug)]
pub enum ZetaSpec {
    Off,
    Spectral { sigma: f64, theta: f64 },
    Deterministic(PathBuf),
}

#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub n: usize,
    pub dt: f64,
    pub t_end: f64,
    pub kappa: f64,
    pub a: f64,
    pub seed: u64,
    pub zeta: ZetaSpec,
    pub ceiling: f64,
    pub dealias: bool,
    /// `false` freezes `X = Q = 0`.
    pub noise: bool,
    /// Exact noise sub-steps per solver step.
    pub noise_substeps: usize,
    pub u0: InitialCondition,
    pub renorm_weight: RenormWeight,
    /// Output every `cadence` steps.
    pub cadence: usize,
    /// Energy decomposition at every output step.
    pub monitor: bool,
    /// Write a `w` snapshot every `snapshot_every` outputs; 0 keeps the final one only.
    pub snapshot_every: usize,
    pub out_dir: PathBuf,
}

impl SolverConfig {
    /// Defaults for every key except `n` and `seed`.
    pub fn new(n: usize, seed: u64) -> Self {
        SolverConfig {
            n,
            dt: 5e-4,
            t_end: 2.0,
            kappa: 0.05,
            a: 3.0,
            seed,
            zeta: ZetaSpec::Off,
            ceiling: 1e6,
            dealias: true,
            noise: true,
            noise_substeps: 1,
            u0: InitialCondition::Random { norm: 0.5, decay: 3.0 },
            renorm_weight: RenormWeight::Squared,
            cadence: 10,
            monitor: true,
            snapshot_every: 0,
            out_dir: PathBuf::from("run"),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(SnsError::InvalidArgument(m));
        if self.n < 8 {
            return bad(format!("n={} < 8", self.n));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return bad(format!("dt={} must be positive", self.dt));
        }
        if !(self.t_end >= 0.0) || !self.t_end.is_finite() {
            return bad(format!("t_end={} must be nonnegative", self.t_end));
        }
        if !(self.kappa > 0.0 && self.kappa < 0.25) {
            return bad(format!("kappa={} outside (0, 1/4)", self.kappa));
        }
        if !(self.a > 2.0 && self.a <= 3.0) {
            return bad(format!("a={} outside (2, 3]", self.a));
        }
        if !(self.ceiling > 0.0) {
            return bad(format!("ceiling={} must be positive", self.ceiling));
        }
        if self.noise_substeps == 0 || self.cadence == 0 {
            return bad("noise_substeps and cadence must be >= 1".into());
        }
        if let ZetaSpec::Spectral { sigma, theta } = self.zeta {
            if !(sigma >= 0.0) || !theta.is_finite() {
                return bad(format!("zeta sigma={sigma}, theta={theta}"));
            }
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.t_end / self.dt - 1e-9).ceil().max(0.0) as usize
    }

    pub(crate) fn zeta_mode(&self, grid: &crate::spectral::FourierGrid) -> Result<ZetaMode> {
        Ok(match &self.zeta {
            ZetaSpec::Off => ZetaMode::Off,
            ZetaSpec::Spectral { sigma, theta } => ZetaMode::Spectral {
                sigma: *sigma,
                theta: *theta,
            },
            ZetaSpec::Deterministic(p) => {
                let f = crate::spectral::snapshot::read_snapshot(std::fs::File::open(p)?)?;
                grid.check_same(f.grid())?;
                ZetaMode::Deterministic(f)
            }
        })
    }

    /// Canonical `key=value` echo, sorted by key.
    pub fn echo(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        let mut put = |k: &str, v: String| {
            m.insert(k.to_string(), v);
        };
        put("n", self.n.to_string());
        put("dt", self.dt.to_string());
        put("t_end", self.t_end.to_string());
        put("kappa", self.kappa.to_string());
        put("a", self.a.to_string());
        put("seed", self.seed.to_string());
        put("ceiling", self.ceiling.to_string());
        put("dealias", on_off(self.dealias));
        put("noise", on_off(self.noise));
        put("noise_substeps", self.noise_substeps.to_string());
        put("cadence", self.cadence.to_string());
        put("monitor", on_off(self.monitor));
        put("snapshot_every", self.snapshot_every.to_string());
        put(
            "renorm.weight",
            match self.renorm_weight {
                RenormWeight::Squared => "squared".into(),
                RenormWeight::Linear => "linear".into(),
            },
        );
        match &self.zeta {
            ZetaSpec::Off => put("zeta.mode", "off".into()),
            ZetaSpec::Spectral { sigma, theta } => {
                put("zeta.mode", "spectral".into());
                put("zeta.sigma", sigma.to_string());
                put("zeta.theta", theta.to_string());
            }
            ZetaSpec::Deterministic(p) => {
                put("zeta.mode", "deterministic".into());
                put("zeta.path", p.display().to_string());
            }
        }
        match &self.u0 {
            InitialCondition::Zero => put("u0.mode", "zero".into()),
            InitialCondition::Shear { amplitude } => {
                put("u0.mode", "shear".into());
                put("u0.amplitude", amplitude.to_string());
            }
            InitialCondition::Random { norm, decay } => {
                put("u0.mode", "random".into());
                put("u0.norm", norm.to_string());
                put("u0.decay", decay.to_string());
            }
            InitialCondition::Field(_) => put("u0.mode", "file".into()),
        }
        put("out_dir", self.out_dir.display().to_string());
        m
    }
}

fn on_off(b: bool) -> String {
    if b { "on" } else { "off" }.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        let c = SolverConfig::new(64, 7);
        c.validate().unwrap();
        assert_eq!(c.steps(), 4000);
    }

    #[test]
    fn rejects_out_of_range() {
        let mut c = SolverConfig::new(64, 7);
        c.a = 2.0;
        assert!(c.validate().is_err());
        let mut c = SolverConfig::new(64, 7);
        c.dt = 0.0;
        assert!(c.validate().is_err());
    }
}
