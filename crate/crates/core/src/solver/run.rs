use serde::{Deserialize, Serialize};

use super::config::SolverConfig;
use super::split::split_w;
use super::stepper::Solver;
use crate::error::{Result, SnsError};
use crate::monitor::{energy_terms, EnergyInputs, EnergyTerms};
use crate::noise::{enhanced_product, renorm_constant, MagnitudeTracker};
use crate::paracalc::DyadicPartition;
use crate::spectral::{inner, l2_norm, sobolev_norm, SpectralVectorField};

use super::ledger::StoppingLedger;

/// One `trajectory.csv` row.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub t: f64,
    pub norm_w: f64,
    pub norm_wl: f64,
    pub norm_wl_h1: f64,
    pub norm_wh: f64,
    pub lambda: f64,
    pub segment: usize,
    pub n_kappa: f64,
}

/// Energy terms at an output step with the centered difference of `‖w^𝔏‖²`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct EnergySample {
    pub terms: EnergyTerms,
    /// `NaN` when the level changes inside the stencil.
    pub fd_derivative: f64,
    pub n_kappa: f64,
}

impl EnergySample {
    pub fn residual(&self) -> f64 {
        self.fd_derivative - self.terms.total()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum RunStatus {
    Completed,
    Explosion { t: f64, norm: f64 },
    NumericNan { t: f64 },
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub rows: Vec<TrajectoryRow>,
    pub energy: Vec<EnergySample>,
    pub crossings: Vec<(usize, f64)>,
    pub status: RunStatus,
    pub final_w: SpectralVectorField,
    pub snapshots: Vec<(usize, SpectralVectorField)>,
    pub steps: usize,
}

struct Pending {
    terms: EnergyTerms,
    n_kappa: f64,
    wl_prev_sq: f64,
    segment: usize,
}

fn wl_sq(part: &DyadicPartition, w: &SpectralVectorField, q: &SpectralVectorField, lambda: f64) -> Result<f64> {
    let (wl, _) = split_w(part, w, q, lambda)?;
    Ok(inner(&wl, &wl))
}

/// Runs to `t_end`, recording output rows, energy samples and crossings.
/// Blow-up and NaN stop the run and are reported in `status`.
pub fn run(cfg: SolverConfig) -> Result<RunOutput> {
    let mut solver = Solver::new(cfg.clone())?;
    let part = DyadicPartition::new(solver.grid());
    let grid = solver.grid().clone();
    let total = cfg.steps();
    let mut tracker = MagnitudeTracker::new(cfg.kappa);
    let mut rows = Vec::new();
    let mut energy = Vec::new();
    let mut snapshots = Vec::new();
    let mut status = RunStatus::Completed;
    let mut prev: Option<(SpectralVectorField, SpectralVectorField, usize)> = None;
    let mut pending: Option<Pending> = None;

    for step in 0..=total {
        let lambda = solver.lambda();
        let segment = solver.ledger().segment();
        if let Some(p) = pending.take() {
            if segment == p.segment {
                let now = wl_sq(&part, solver.w(), &solver.q(), p.terms.lambda)?;
                energy.push(EnergySample {
                    terms: p.terms,
                    fd_derivative: (now - p.wl_prev_sq) / (2.0 * cfg.dt),
                    n_kappa: p.n_kappa,
                });
            }
        }
        if step % cfg.cadence == 0 || step == total {
            let t = solver.time();
            let x = solver.x();
            let q = solver.q();
            let w = solver.w();
            let r = renorm_constant(&grid, lambda, t, cfg.renorm_weight)?;
            let mut levels = Vec::new();
            if cfg.noise && t > 0.0 {
                for i in solver.ledger().i0()..=segment {
                    let lam = StoppingLedger::level(i, cfg.a);
                    let ri = renorm_constant(&grid, lam, t, cfg.renorm_weight)?;
                    levels.push(enhanced_product(&part, &x, lam, ri)?);
                }
            }
            let n_kappa = tracker.update(&part, &x, solver.y(), &levels.iter().collect::<Vec<_>>())?;
            let (wl, wh) = split_w(&part, w, &q, lambda)?;
            rows.push(TrajectoryRow {
                t,
                norm_w: l2_norm(w),
                norm_wl: l2_norm(&wl),
                norm_wl_h1: sobolev_norm(&wl, 1.0),
                norm_wh: l2_norm(&wh),
                lambda,
                segment,
                n_kappa,
            });
            if cfg.snapshot_every > 0 && (rows.len() - 1) % cfg.snapshot_every == 0 {
                snapshots.push((step, w.clone()));
            }
            if cfg.monitor && step > 0 && step < total {
                if let Some((pw, pq, pseg)) = &prev {
                    if *pseg == segment {
                        let inp = EnergyInputs {
                            t,
                            w,
                            x: &x,
                            y: solver.y(),
                            q: &q,
                            lambda,
                            r,
                            kappa: cfg.kappa,
                        };
                        let (terms, _) = energy_terms(&part, &inp)?;
                        pending = Some(Pending {
                            terms,
                            n_kappa,
                            wl_prev_sq: wl_sq(&part, pw, pq, lambda)?,
                            segment,
                        });
                    }
                }
            }
        }
        if step == total {
            break;
        }
        if cfg.monitor && (step + 1) % cfg.cadence == 0 {
            prev = Some((solver.w().clone(), solver.q(), segment));
        }
        match solver.step() {
            Ok(()) => {}
            Err(SnsError::Explosion { t, norm }) => {
                status = RunStatus::Explosion { t, norm };
                break;
            }
            Err(SnsError::NumericNan { t }) => {
                status = RunStatus::NumericNan { t };
                break;
            }
            Err(e) => return Err(e),
        }
    }
    let final_w = solver.w().clone();
    if snapshots.last().map(|s| s.0) != Some(solver.steps_taken()) {
        snapshots.push((solver.steps_taken(), final_w.clone()));
    }
    Ok(RunOutput {
        rows,
        energy,
        crossings: solver.ledger().crossings().to_vec(),
        status,
        final_w,
        snapshots,
        steps: solver.steps_taken(),
    })
}
