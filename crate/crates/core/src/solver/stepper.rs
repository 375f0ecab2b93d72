use num_complex::Complex64;

use crate::error::{Result, SnsError};
use crate::noise::{OuEnsemble, ZetaDriver};
use crate::paracalc::lowpass;
use crate::spectral::{
    divergence, heat_propagate, leray_project, random_field, sym_tensor_values, FourierGrid, SpectralMatrixField,
    SpectralVectorField, ZERO,
};

use super::config::{InitialCondition, SolverConfig};
use super::ledger::StoppingLedger;

/// `φ_1(z) = (e^z - 1)/z`.
fn phi1(z: f64) -> f64 {
    if z == 0.0 {
        1.0
    } else {
        z.exp_m1() / z
    }
}

/// Exponential Euler update `e^{δΔ}u + δ φ_1(-|k|²δ) N`.
pub fn etd1(u: &SpectralVectorField, n: &SpectralVectorField, delta: f64) -> Result<SpectralVectorField> {
    let k2 = u.grid().ksq();
    let mut out = heat_propagate(u, delta)?;
    out.axpy(1.0, &n.map_modes(|i| delta * phi1(-k2[i] * delta)));
    out.set_divergence_free(u.is_divergence_free() && n.is_divergence_free());
    Ok(out)
}

/// Per-mode factors `e^{-|k|²δ}` and `δ φ_1(-|k|²δ)` for a fixed step.
#[derive(Clone, Debug)]
pub struct EtdFactors {
    delta: f64,
    decay: Vec<f64>,
    gain: Vec<f64>,
}

impl EtdFactors {
    pub fn new(grid: &FourierGrid, delta: f64) -> Result<Self> {
        if !(delta >= 0.0) {
            return Err(SnsError::InvalidArgument(format!("negative step {delta}")));
        }
        let k2 = grid.ksq();
        Ok(EtdFactors {
            delta,
            decay: k2.iter().map(|k| (-k * delta).exp()).collect(),
            gain: k2.iter().map(|k| delta * phi1(-k * delta)).collect(),
        })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// `e^{δΔ}u`
    pub fn heat(&self, u: &SpectralVectorField) -> SpectralVectorField {
        let mut out = u.map_modes(|i| self.decay[i]);
        out.set_divergence_free(u.is_divergence_free());
        out
    }

    /// `e^{δΔ}u + δ φ_1(-|k|²δ) N`
    pub fn apply(&self, u: &SpectralVectorField, n: &SpectralVectorField) -> SpectralVectorField {
        let mut out = u.clone();
        for c in 0..2 {
            let (uc, nc) = (out.comp_mut(c), n.comp(c));
            for i in 0..uc.len() {
                uc[i] = uc[i] * self.decay[i] + nc[i] * self.gain[i];
            }
        }
        out.set_divergence_free(u.is_divergence_free() && n.is_divergence_free());
        out
    }
}

fn add_into(acc: &mut [Vec<f64>; 4], t: [Vec<f64>; 4], s: f64) {
    for (a, b) in acc.iter_mut().zip(t) {
        for (x, y) in a.iter_mut().zip(b) {
            *x += s * y;
        }
    }
}

fn project_div(grid: &FourierGrid, m: &[Vec<f64>; 4]) -> SpectralVectorField {
    leray_project(&divergence(&SpectralMatrixField::from_physical(grid, m, true)))
}

/// `P div M` for a symmetric matrix given by the coefficients of `m11, m12, m22`.
fn div_project_sym(grid: &FourierGrid, m11: &[Complex64], m12: &[Complex64], m22: &[Complex64]) -> SpectralVectorField {
    let (k1, k2, ksq, keep) = (grid.k1(), grid.k2(), grid.ksq(), grid.retained());
    let mut c0 = vec![ZERO; grid.len()];
    let mut c1 = vec![ZERO; grid.len()];
    for idx in 0..grid.len() {
        if !keep[idx] {
            continue;
        }
        let (a, b) = (k1[idx] as f64, k2[idx] as f64);
        let v0 = a * m11[idx] + b * m12[idx];
        let v1 = a * m12[idx] + b * m22[idx];
        // i·P v with P = Id - k k^T/|k|²
        let s = (-b * v0 + a * v1) / ksq[idx];
        c0[idx] = Complex64::new(0.0, -b) * s;
        c1[idx] = Complex64::new(0.0, a) * s;
    }
    let mut out = SpectralVectorField::from_components(grid, [c0, c1]).expect("same grid");
    out.set_divergence_free(true);
    out
}

/// `(P div(2X ⊗_s Y + X ⊗ X), P div(w ⊗ w + D ⊗_s w + Y ⊗ Y))` from shared transforms.
pub fn nonlinearities(
    x: &SpectralVectorField,
    y: &SpectralVectorField,
    w: &SpectralVectorField,
) -> Result<(SpectralVectorField, SpectralVectorField)> {
    let grid = x.grid();
    grid.check_same(y.grid())?;
    grid.check_same(w.grid())?;
    let (xp, yp, wp) = (x.to_physical(), y.to_physical(), w.to_physical());
    let len = grid.len();
    let mut ty: [Vec<f64>; 3] = std::array::from_fn(|_| vec![0.0; len]);
    let mut tw: [Vec<f64>; 3] = std::array::from_fn(|_| vec![0.0; len]);
    for i in 0..len {
        let (x0, x1, y0, y1, w0, w1) = (xp[0][i], xp[1][i], yp[0][i], yp[1][i], wp[0][i], wp[1][i]);
        ty[0][i] = 2.0 * x0 * y0 + x0 * x0;
        ty[1][i] = x0 * y1 + x1 * y0 + x0 * x1;
        ty[2][i] = 2.0 * x1 * y1 + x1 * x1;
        let (d0, d1) = (2.0 * (x0 + y0), 2.0 * (x1 + y1));
        tw[0][i] = w0 * w0 + d0 * w0 + y0 * y0;
        tw[1][i] = w0 * w1 + 0.5 * (d0 * w1 + d1 * w0) + y0 * y1;
        tw[2][i] = w1 * w1 + d1 * w1 + y1 * y1;
    }
    let (y11, y22) = grid.from_physical_pair(&ty[0], &ty[2], false);
    let (w11, w22) = grid.from_physical_pair(&tw[0], &tw[2], false);
    let (y12, w12) = grid.from_physical_pair(&ty[1], &tw[1], false);
    Ok((
        div_project_sym(grid, &y11, &y12, &y22),
        div_project_sym(grid, &w11, &w12, &w22),
    ))
}

/// `P div(2X ⊗_s Y + X ⊗ X)`.
pub fn nonlinearity_y(x: &SpectralVectorField, y: &SpectralVectorField) -> Result<SpectralVectorField> {
    x.grid().check_same(y.grid())?;
    let (xp, yp) = (x.to_physical(), y.to_physical());
    let mut t = sym_tensor_values(&xp, &yp);
    add_into(&mut t, sym_tensor_values(&xp, &xp), 0.5);
    for c in t.iter_mut() {
        for v in c.iter_mut() {
            *v *= 2.0;
        }
    }
    Ok(project_div(x.grid(), &t))
}

/// `P div(w ⊗ w + D ⊗_s w + Y ⊗ Y)` with `D = 2(X + Y)`.
pub fn nonlinearity_w(x: &SpectralVectorField, y: &SpectralVectorField, w: &SpectralVectorField) -> Result<SpectralVectorField> {
    x.grid().check_same(y.grid())?;
    x.grid().check_same(w.grid())?;
    let (xp, yp, wp) = (x.to_physical(), y.to_physical(), w.to_physical());
    let dp: [Vec<f64>; 2] = std::array::from_fn(|c| xp[c].iter().zip(&yp[c]).map(|(a, b)| 2.0 * (a + b)).collect());
    let mut t = sym_tensor_values(&wp, &wp);
    add_into(&mut t, sym_tensor_values(&dp, &wp), 1.0);
    add_into(&mut t, sym_tensor_values(&yp, &yp), 1.0);
    Ok(project_div(x.grid(), &t))
}

/// One exponential-Euler step of `∂_t Y = ΔY + P div(2X ⊗_s Y + X ⊗ X)`, plus the `ζ` convolution.
pub fn step_y(
    y: &SpectralVectorField,
    x: &SpectralVectorField,
    zeta_conv: &SpectralVectorField,
    delta: f64,
) -> Result<SpectralVectorField> {
    let mut out = etd1(y, &nonlinearity_y(x, y)?, delta)?;
    out.axpy(1.0, zeta_conv);
    Ok(out)
}

/// One exponential-Euler step of `∂_t w = Δw + P div(w ⊗ w + D ⊗_s w + Y ⊗ Y)`.
pub fn step_w(
    w: &SpectralVectorField,
    x: &SpectralVectorField,
    y: &SpectralVectorField,
    delta: f64,
) -> Result<SpectralVectorField> {
    etd1(w, &nonlinearity_w(x, y, w)?, delta)
}

pub(crate) fn initial_field(grid: &FourierGrid, cfg: &SolverConfig) -> Result<SpectralVectorField> {
    Ok(match &cfg.u0 {
        InitialCondition::Zero => SpectralVectorField::zeros(grid),
        InitialCondition::Shear { amplitude } => {
            let mut c0 = vec![ZERO; grid.len()];
            c0[grid.index(0, 1)] = num_complex::Complex64::new(0.0, -0.5 * amplitude);
            c0[grid.index(0, -1)] = num_complex::Complex64::new(0.0, 0.5 * amplitude);
            let mut f = SpectralVectorField::from_components(grid, [c0, vec![ZERO; grid.len()]])?;
            f.set_divergence_free(true);
            f
        }
        InitialCondition::Random { norm, decay } => {
            let f = random_field(grid, cfg.seed ^ 0x5eed_0000_0000_0001, *decay, true);
            let l2 = crate::spectral::l2_norm(&f);
            if l2 > 0.0 {
                let mut g = f.scaled(norm / l2);
                g.set_divergence_free(true);
                g
            } else {
                f
            }
        }
        InitialCondition::Field(f) => {
            grid.check_same(f.grid())?;
            leray_project(f)
        }
    })
}

/// Time stepper for `(X, Q, Y, w)` with the stopping ledger.
pub struct Solver {
    cfg: SolverConfig,
    grid: FourierGrid,
    ensemble: OuEnsemble,
    zeta: ZetaDriver,
    y: SpectralVectorField,
    w: SpectralVectorField,
    t: f64,
    steps: usize,
    ledger: StoppingLedger,
    factors: EtdFactors,
    sub_factors: EtdFactors,
    mollify: Option<f64>,
}

impl Solver {
    pub fn new(cfg: SolverConfig) -> Result<Self> {
        Self::build(cfg, None)
    }

    /// Galerkin level: the noise is replaced by `X^n = 𝔏_n X` and `u_0` by `𝔏_n u_0`,
    /// with the same underlying draws as the unmollified solver.
    pub fn with_mollification(cfg: SolverConfig, n: f64) -> Result<Self> {
        Self::build(cfg, Some(n))
    }

    fn build(cfg: SolverConfig, mollify: Option<f64>) -> Result<Self> {
        cfg.validate()?;
        let grid = FourierGrid::with_dealiasing(cfg.n, cfg.dealias)?;
        let mut w = initial_field(&grid, &cfg)?;
        if let Some(n) = mollify {
            w = lowpass(&w, n)?;
        }
        let ledger = StoppingLedger::new(crate::spectral::l2_norm(&w), cfg.a)?;
        let zeta = ZetaDriver::new(&grid, cfg.seed, cfg.zeta_mode(&grid)?)?;
        let factors = EtdFactors::new(&grid, cfg.dt)?;
        let sub_factors = EtdFactors::new(&grid, cfg.dt / cfg.noise_substeps as f64)?;
        Ok(Solver {
            mollify,
            factors,
            sub_factors,
            ensemble: OuEnsemble::new(&grid, cfg.seed),
            y: SpectralVectorField::zeros(&grid),
            zeta,
            w,
            t: 0.0,
            steps: 0,
            ledger,
            grid,
            cfg,
        })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }
    pub fn grid(&self) -> &FourierGrid {
        &self.grid
    }
    pub fn time(&self) -> f64 {
        self.t
    }
    pub fn steps_taken(&self) -> usize {
        self.steps
    }
    pub fn w(&self) -> &SpectralVectorField {
        &self.w
    }
    pub fn y(&self) -> &SpectralVectorField {
        &self.y
    }
    pub fn mollification(&self) -> Option<f64> {
        self.mollify
    }
    fn mollified(&self, f: SpectralVectorField) -> SpectralVectorField {
        match self.mollify {
            Some(n) => lowpass(&f, n).expect("level checked at construction"),
            None => f,
        }
    }
    pub fn x(&self) -> SpectralVectorField {
        if self.cfg.noise {
            self.mollified(self.ensemble.x_field())
        } else {
            SpectralVectorField::zeros(&self.grid)
        }
    }
    pub fn q(&self) -> SpectralVectorField {
        if self.cfg.noise {
            self.mollified(self.ensemble.q_field())
        } else {
            SpectralVectorField::zeros(&self.grid)
        }
    }
    pub fn ledger(&self) -> &StoppingLedger {
        &self.ledger
    }
    /// Cutoff level in force at the current time.
    pub fn lambda(&self) -> f64 {
        if self.steps == 0 {
            self.ledger.initial_lambda()
        } else {
            self.ledger.lambda()
        }
    }

    /// Advances every field by `dt`; the noise moves in `noise_substeps` exact sub-steps.
    pub fn step(&mut self) -> Result<()> {
        let dt = self.cfg.dt;
        let x = self.x();
        let (ny, nw) = nonlinearities(&x, &self.y, &self.w)?;
        let mut y_next = self.factors.apply(&self.y, &ny);
        let w_next = self.factors.apply(&self.w, &nw);

        let m = self.cfg.noise_substeps;
        let h = self.sub_factors.delta();
        let mut zeta_acc = SpectralVectorField::zeros(&self.grid);
        for _ in 0..m {
            if self.cfg.noise {
                self.ensemble.evolve(h)?;
            }
            if !self.zeta.is_off() {
                zeta_acc = self.sub_factors.heat(&zeta_acc);
                zeta_acc.axpy(1.0, &self.zeta.heat_convolved_increment(h)?);
            }
        }
        if !self.zeta.is_off() {
            y_next.axpy(1.0, &zeta_acc);
        }

        self.y = y_next;
        self.w = w_next;
        self.steps += 1;
        self.t = self.steps as f64 * dt;

        if !self.w.is_finite() || !self.y.is_finite() {
            return Err(SnsError::NumericNan { t: self.t });
        }
        let norm = crate::spectral::l2_norm(&self.w);
        if norm > self.cfg.ceiling {
            return Err(SnsError::Explosion { t: self.t, norm });
        }
        self.ledger.observe(self.t, norm);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::l2_norm;

    #[test]
    fn zero_data_stays_zero_without_noise() {
        let mut cfg = SolverConfig::new(16, 1);
        cfg.noise = false;
        cfg.u0 = InitialCondition::Zero;
        let mut s = Solver::new(cfg).unwrap();
        for _ in 0..10 {
            s.step().unwrap();
        }
        assert_eq!(l2_norm(s.w()), 0.0);
        assert_eq!(l2_norm(s.y()), 0.0);
    }

    #[test]
    fn fused_nonlinearities_match_separate_ones() {
        let g = FourierGrid::new(24).unwrap();
        let x = random_field(&g, 1, 1.0, true);
        let y = random_field(&g, 2, 2.0, true);
        let w = random_field(&g, 3, 2.0, true);
        let (ny, nw) = nonlinearities(&x, &y, &w).unwrap();
        assert!((&ny - &nonlinearity_y(&x, &y).unwrap()).max_abs() < 1e-13);
        assert!((&nw - &nonlinearity_w(&x, &y, &w).unwrap()).max_abs() < 1e-13);
    }

    #[test]
    fn cached_factors_match_etd1() {
        let g = FourierGrid::new(24).unwrap();
        let u = random_field(&g, 4, 2.0, true);
        let n = random_field(&g, 5, 1.0, true);
        let f = EtdFactors::new(&g, 3e-3).unwrap();
        assert!((&f.apply(&u, &n) - &etd1(&u, &n, 3e-3).unwrap()).max_abs() < 1e-15);
        assert!((&f.heat(&u) - &heat_propagate(&u, 3e-3).unwrap()).max_abs() < 1e-15);
    }

    #[test]
    fn shear_decays_exactly() {
        let mut cfg = SolverConfig::new(16, 1);
        cfg.noise = false;
        cfg.dt = 1e-3;
        cfg.u0 = InitialCondition::Shear { amplitude: 1.0 };
        let mut s = Solver::new(cfg).unwrap();
        for _ in 0..1000 {
            s.step().unwrap();
        }
        let expect = 0.5f64.sqrt() * (-1.0f64).exp();
        assert!((l2_norm(s.w()) - expect).abs() < 1e-12);
    }

    #[test]
    fn ceiling_reports_explosion() {
        let mut cfg = SolverConfig::new(16, 1);
        cfg.noise = false;
        cfg.ceiling = 0.1;
        cfg.u0 = InitialCondition::Shear { amplitude: 1.0 };
        let mut s = Solver::new(cfg).unwrap();
        assert!(matches!(s.step(), Err(SnsError::Explosion { .. })));
    }
}
