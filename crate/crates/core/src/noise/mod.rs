//! Exact Ornstein–Uhlenbeck modes, renormalization constants, enhanced
//! products, `ζ` sampling and stochastic magnitudes.

mod objects;
mod ou;
mod renorm;
mod zeta;

pub use objects::*;
pub use ou::{
    complex_normal, direction, joint_covariance, mode_stream, ou_increment_variance, ou_step, OuEnsemble, Purpose,
};
pub use renorm::{renorm_constant, renorm_constant_n, RenormWeight};
pub use zeta::{ZetaDriver, ZetaMode};
