//! Coupled Galerkin levels `w^n` driven by the mollified noise `X^n = 𝔏_n X`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SnsError};
use crate::noise::{enhanced_product, renorm_constant_n, MagnitudeTracker};
use crate::paracalc::DyadicPartition;
use crate::solver::{split_w, RunStatus, Solver, SolverConfig, StoppingLedger};
use crate::spectral::{inner, sobolev_norm, SpectralVectorField};

/// Regularity of the level distance `‖w^n - w^{2n}‖_{L²_t H^β}`.
pub const DISTANCE_BETA: f64 = 0.5;

/// Summary of one level.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LevelRecord {
    pub n: f64,
    /// `sup_t ‖w^{n,𝔏}_t‖²`
    pub sup_norm: f64,
    /// `∫ ‖w^{n,𝔏}‖²_{H¹} dt`
    pub h1_integral: f64,
    /// `‖w^n - w^{2n}‖_{L²_t H^{1/2}}`, `NaN` when `2n` is not among the levels.
    pub distance_to_double: f64,
    /// `‖∂_t w^n‖_{L²_t H^{-2-κ}}` from output-step differences.
    pub dt_norm: f64,
    /// `N^{n,κ}` at the end of the run, `NaN` when magnitudes are off.
    pub n_kappa: f64,
    pub status: RunStatus,
}

impl LevelRecord {
    pub fn uniform_quantity(&self) -> f64 {
        self.sup_norm + self.h1_integral
    }
}

#[derive(Clone, Debug)]
pub struct GalerkinReport {
    pub levels: Vec<LevelRecord>,
    pub final_w: Vec<SpectralVectorField>,
}

impl GalerkinReport {
    /// `max_n (sup_t ‖w^{n,𝔏}‖² + ∫ ‖w^{n,𝔏}‖²_{H¹})`.
    pub fn uniform_bound(&self) -> f64 {
        self.levels.iter().map(LevelRecord::uniform_quantity).fold(0.0, f64::max)
    }

    /// Distances for the levels that have a double, in level order.
    pub fn distances(&self) -> Vec<(f64, f64)> {
        self.levels
            .iter()
            .filter(|l| !l.distance_to_double.is_nan())
            .map(|l| (l.n, l.distance_to_double))
            .collect()
    }

    /// Strictly decreasing distances.
    pub fn distances_decrease(&self) -> bool {
        self.distances().windows(2).all(|p| p[1].1 < p[0].1)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,sup_norm,h1_integral,distance_to_double\n");
        for l in &self.levels {
            s.push_str(&format!(
                "{},{:e},{:e},{:e}\n",
                l.n, l.sup_norm, l.h1_integral, l.distance_to_double
            ));
        }
        s
    }
}

struct LevelState {
    solver: Solver,
    tracker: Option<MagnitudeTracker>,
    status: RunStatus,
    sup_norm: f64,
    h1: Trapezoid,
    dt_sq: f64,
    prev: Option<(f64, SpectralVectorField)>,
    n_kappa: f64,
}

#[derive(Default)]
struct Trapezoid {
    last: Option<(f64, f64)>,
    sum: f64,
}

impl Trapezoid {
    fn push(&mut self, t: f64, v: f64) {
        if let Some((t0, v0)) = self.last {
            self.sum += 0.5 * (t - t0) * (v + v0);
        }
        self.last = Some((t, v));
    }
}

fn observe(part: &DyadicPartition, st: &mut LevelState, kappa: f64) -> Result<()> {
    let s = &st.solver;
    let t = s.time();
    let q = s.q();
    let (wl, _) = split_w(part, s.w(), &q, s.lambda())?;
    st.sup_norm = st.sup_norm.max(inner(&wl, &wl));
    st.h1.push(t, sobolev_norm(&wl, 1.0).powi(2));
    if let Some((t0, w0)) = &st.prev {
        let rate = (s.w() - w0).scaled(1.0 / (t - t0));
        st.dt_sq += (t - t0) * sobolev_norm(&rate, -2.0 - kappa).powi(2);
    }
    st.prev = Some((t, s.w().clone()));
    if let Some(tr) = st.tracker.as_mut() {
        let cfg = s.config();
        let x = s.x();
        let n = s.mollification().unwrap_or(f64::INFINITY);
        let mut levels = Vec::new();
        if cfg.noise && t > 0.0 {
            for i in s.ledger().i0()..=s.ledger().segment() {
                let lam = StoppingLedger::level(i, cfg.a);
                let r = if n.is_finite() {
                    renorm_constant_n(s.grid(), lam, n, t, cfg.renorm_weight)?
                } else {
                    crate::noise::renorm_constant(s.grid(), lam, t, cfg.renorm_weight)?
                };
                levels.push(enhanced_product(part, &x, lam, r)?);
            }
        }
        st.n_kappa = tr.update(part, &x, s.y(), &levels.iter().collect::<Vec<_>>())?;
    }
    Ok(())
}

/// Runs the levels in lockstep from one seed; every `cadence` steps the split energies,
/// the level distances and the time-derivative surrogate are accumulated.
pub fn run_levels(cfg: &SolverConfig, levels: &[f64], magnitudes: bool) -> Result<GalerkinReport> {
    if levels.is_empty() {
        return Err(SnsError::InvalidArgument("no levels".into()));
    }
    let mut states = levels
        .iter()
        .map(|&n| {
            Ok(LevelState {
                solver: Solver::with_mollification(cfg.clone(), n)?,
                tracker: magnitudes.then(|| MagnitudeTracker::new(cfg.kappa)),
                status: RunStatus::Completed,
                sup_norm: 0.0,
                h1: Trapezoid::default(),
                dt_sq: 0.0,
                prev: None,
                n_kappa: f64::NAN,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let part = DyadicPartition::new(states[0].solver.grid());
    let doubles: Vec<Option<usize>> = levels
        .iter()
        .map(|&n| levels.iter().position(|&m| m == 2.0 * n))
        .collect();
    let mut dist: Vec<Trapezoid> = levels.iter().map(|_| Trapezoid::default()).collect();
    let total = cfg.steps();

    for step in 0..=total {
        if step % cfg.cadence == 0 || step == total {
            states
                .par_iter_mut()
                .filter(|s| s.status == RunStatus::Completed)
                .try_for_each(|s| observe(&part, s, cfg.kappa))?;
            let t = step as f64 * cfg.dt;
            for (i, d) in doubles.iter().enumerate() {
                if let Some(j) = *d {
                    let alive = states[i].status == RunStatus::Completed && states[j].status == RunStatus::Completed;
                    if alive {
                        let diff = states[i].solver.w() - states[j].solver.w();
                        dist[i].push(t, sobolev_norm(&diff, DISTANCE_BETA).powi(2));
                    }
                }
            }
        }
        if step == total {
            break;
        }
        states
            .par_iter_mut()
            .filter(|s| s.status == RunStatus::Completed)
            .try_for_each(|s| {
                match s.solver.step() {
                    Ok(()) => {}
                    Err(SnsError::Explosion { t, norm }) => s.status = RunStatus::Explosion { t, norm },
                    Err(SnsError::NumericNan { t }) => s.status = RunStatus::NumericNan { t },
                    Err(e) => return Err(e),
                }
                Ok(())
            })?;
    }

    let records = states
        .iter()
        .zip(levels)
        .zip(&doubles)
        .zip(&dist)
        .map(|(((s, &n), d), dist)| LevelRecord {
            n,
            sup_norm: s.sup_norm,
            h1_integral: s.h1.sum,
            distance_to_double: if d.is_some() { dist.sum.sqrt() } else { f64::NAN },
            dt_norm: s.dt_sq.sqrt(),
            n_kappa: s.n_kappa,
            status: s.status,
        })
        .collect();
    Ok(GalerkinReport {
        levels: records,
        final_w: states.iter().map(|s| s.solver.w().clone()).collect(),
    })
}

/// Steps a level and the unmollified solver side by side and reports whether
/// `w` and `Y` agree bit for bit after every step.
pub fn coupling_is_exact(cfg: &SolverConfig, n: f64) -> Result<bool> {
    let mut a = Solver::new(cfg.clone())?;
    let mut b = Solver::with_mollification(cfg.clone(), n)?;
    let same = |a: &Solver, b: &Solver| bits_equal(a.w(), b.w()) && bits_equal(a.y(), b.y());
    if !same(&a, &b) {
        return Ok(false);
    }
    for _ in 0..cfg.steps() {
        let ra = a.step();
        let rb = b.step();
        if ra.is_err() != rb.is_err() || !same(&a, &b) {
            return Ok(false);
        }
        if ra.is_err() {
            break;
        }
    }
    Ok(true)
}

/// Bitwise equality of the coefficient arrays.
pub fn bits_equal(u: &SpectralVectorField, v: &SpectralVectorField) -> bool {
    u.comps()
        .iter()
        .zip(v.comps())
        .all(|(a, b)| a.iter().zip(b).all(|(x, y)| x.re.to_bits() == y.re.to_bits() && x.im.to_bits() == y.im.to_bits()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::paracalc::lowpass;
    use crate::spectral::l2_norm;

    fn small(seed: u64) -> SolverConfig {
        let mut c = SolverConfig::new(16, seed);
        c.t_end = 0.05;
        c.dt = 5e-3;
        c.cadence = 2;
        c
    }

    #[test]
    fn level_above_twice_radius_is_the_primary_run() {
        let c = small(3);
        let r = crate::spectral::FourierGrid::new(16).unwrap().radius();
        assert!(coupling_is_exact(&c, 2.0 * r + 0.5).unwrap());
        assert!(!coupling_is_exact(&c, 2.0).unwrap());
    }

    #[test]
    fn identical_levels_have_zero_distance() {
        let rep = run_levels(&small(1), &[15.0, 30.0], false).unwrap();
        assert_eq!(rep.levels[0].distance_to_double, 0.0);
        let rep = run_levels(&small(1), &[2.0, 4.0], false).unwrap();
        assert!(rep.levels[0].distance_to_double > 0.0);
        let rep2 = run_levels(&small(1), &[8.0, 16.0], false).unwrap();
        let same = run_levels(&small(1), &[8.0], false).unwrap();
        assert!(bits_equal(&rep2.final_w[0], &same.final_w[0]));
        assert!(same.levels[0].distance_to_double.is_nan());
    }

    #[test]
    fn unit_level_contracts_noise() {
        let c = small(5);
        let s = Solver::with_mollification(c.clone(), 1.0).unwrap();
        let mut full = Solver::new(c.clone()).unwrap();
        let mut lvl = s;
        for _ in 0..3 {
            full.step().unwrap();
            lvl.step().unwrap();
            assert!(l2_norm(&lvl.x()) < l2_norm(&full.x()));
        }
        let x = full.x();
        assert!(bits_equal(&lvl.x(), &lowpass(&x, 1.0).unwrap()));
    }

    #[test]
    fn csv_has_one_row_per_level() {
        let rep = run_levels(&small(2), &[4.0, 8.0], true).unwrap();
        let csv = rep.to_csv();
        assert_eq!(csv.lines().count(), 3);
        assert!(csv.lines().nth(2).unwrap().ends_with("NaN"));
        assert!(rep.uniform_bound().is_finite());
        assert!(rep.levels.iter().all(|l| l.n_kappa.is_finite() && l.dt_norm.is_finite()));
    }
}
