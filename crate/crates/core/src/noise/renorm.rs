use crate::error::{Result, SnsError};
use crate::paracalc::CutoffPair;
use crate::spectral::FourierGrid;

/// Weight of the low-pass cutoff inside the renormalization sum.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum RenormWeight {
    /// `l(|k|/λ)²`: the zeroth chaos of the enhanced product.
    #[default]
    Squared,
    /// `l(|k|/λ)`.
    Linear,
}

impl RenormWeight {
    fn apply(self, l: f64) -> f64 {
        match self {
            RenormWeight::Squared => l * l,
            RenormWeight::Linear => l,
        }
    }
}

fn check(lambda: f64, t: f64) -> Result<()> {
    if !(lambda >= 1.0) || !(t >= 0.0) {
        return Err(SnsError::InvalidArgument(format!("renormalization at λ={lambda}, t={t}")));
    }
    Ok(())
}

/// `r_λ(t) = ¼ Σ_k w(|k|/λ) (1 - e^{-2|k|²t}) / (|k|²/2 + 1)` over retained modes.
pub fn renorm_constant(grid: &FourierGrid, lambda: f64, t: f64, weight: RenormWeight) -> Result<f64> {
    check(lambda, t)?;
    Ok(lattice_sum(grid, |k| weight.apply(CutoffPair::low(k, lambda)), t))
}

/// `r^n_λ(t)`, the same sum with the extra Galerkin cutoff `l(|k|/n)`.
pub fn renorm_constant_n(grid: &FourierGrid, lambda: f64, n: f64, t: f64, weight: RenormWeight) -> Result<f64> {
    check(lambda, t)?;
    check(n, t)?;
    Ok(lattice_sum(
        grid,
        |k| weight.apply(CutoffPair::low(k, lambda) * CutoffPair::low(k, n)),
        t,
    ))
}

fn lattice_sum(grid: &FourierGrid, w: impl Fn(f64) -> f64, t: f64) -> f64 {
    let mut s = 0.0;
    for idx in grid.retained_modes() {
        let k2 = grid.ksq()[idx];
        let weight = w(k2.sqrt());
        if weight != 0.0 {
            s += weight * -(-2.0 * k2 * t).exp_m1() / (k2 / 2.0 + 1.0);
        }
    }
    0.25 * s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vanishes_at_time_zero() {
        let g = FourierGrid::new(64).unwrap();
        assert_eq!(renorm_constant(&g, 8.0, 0.0, RenormWeight::Squared).unwrap(), 0.0);
    }

    #[test]
    fn increases_in_level_and_time() {
        let g = FourierGrid::new(96).unwrap();
        let mut prev = 0.0;
        for lam in [2.0, 4.0, 8.0, 16.0] {
            let r = renorm_constant(&g, lam, 1.0, RenormWeight::Squared).unwrap();
            assert!(r > prev);
            prev = r;
        }
        let a = renorm_constant(&g, 8.0, 0.1, RenormWeight::Linear).unwrap();
        let b = renorm_constant(&g, 8.0, 1.0, RenormWeight::Linear).unwrap();
        assert!(b > a);
    }

    #[test]
    fn galerkin_version_converges_termwise() {
        let g = FourierGrid::new(64).unwrap();
        let big = 1e6;
        let a = renorm_constant_n(&g, 8.0, big, 1.0, RenormWeight::Linear).unwrap();
        let b = renorm_constant(&g, 8.0, 1.0, RenormWeight::Linear).unwrap();
        assert_eq!(a, b);
        assert!(renorm_constant(&g, 0.5, 1.0, RenormWeight::Linear).is_err());
        assert!(renorm_constant(&g, 2.0, -1.0, RenormWeight::Linear).is_err());
    }
}
