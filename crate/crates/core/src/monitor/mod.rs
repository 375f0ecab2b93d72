//! Energy decomposition, estimate calibration, crossing bounds, growth
//! envelope and the high/low norm.

mod bounds;
mod energy;
mod hl;

pub use bounds::*;
pub use energy::*;
pub use hl::hl_norm;
