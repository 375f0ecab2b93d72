//! Exponential time stepping of `(X, Q, Y, w)`, the stopping ledger and the
//! high/low splitting of `w`.

mod config;
mod ledger;
mod run;
mod split;
mod stepper;

pub use config::{InitialCondition, SolverConfig, ZetaSpec};
pub use ledger::StoppingLedger;
pub use run::*;
pub use split::split_w;
pub use stepper::{etd1, nonlinearities, EtdFactors, nonlinearity_w, nonlinearity_y, step_w, step_y, Solver};
