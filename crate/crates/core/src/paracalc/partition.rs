use std::fmt::Write as _;

use crate::error::{Result, SnsError};
use crate::spectral::FourierGrid;

const INNER: f64 = 0.75;
const OUTER: f64 = 4.0 / 3.0;

/// `C^∞` step: 0 for `x <= 0`, 1 for `x >= 1`.
fn smooth_step(x: f64) -> f64 {
    let f = |t: f64| if t <= 0.0 { 0.0 } else { (-1.0 / t).exp() };
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        let a = f(x);
        a / (a + f(1.0 - x))
    }
}

/// Radial low-frequency profile: 1 on `[0, 3/4]`, 0 beyond `4/3`.
pub fn chi(r: f64) -> f64 {
    1.0 - smooth_step((r - INNER) / (OUTER - INNER))
}

/// Annular profile `ρ(r) = χ(r/2) - χ(r)`, supported in `[3/4, 8/3]`.
pub fn rho(r: f64) -> f64 {
    chi(r / 2.0) - chi(r)
}

/// Dyadic partition `ρ_{-1} = χ`, `ρ_j = ρ(2^{-j} ·)` truncated at the grid.
#[derive(Clone, Debug)]
pub struct DyadicPartition {
    j_max: i32,
    weights: Vec<Vec<f64>>,
    grid: FourierGrid,
}

impl DyadicPartition {
    pub fn new(grid: &FourierGrid) -> Self {
        let radius = grid.radius();
        let mut j_max = -1;
        while INNER * 2f64.powi(j_max + 1) < radius {
            j_max += 1;
        }
        let weights = (-1..=j_max)
            .map(|j| grid.kabs().iter().map(|&k| Self::profile(j, k)).collect())
            .collect();
        DyadicPartition {
            j_max,
            weights,
            grid: grid.clone(),
        }
    }

    /// `ρ_j(|k|)` for `j >= -1`.
    pub fn profile(j: i32, k: f64) -> f64 {
        if j < 0 {
            chi(k)
        } else {
            rho(k / 2f64.powi(j))
        }
    }

    /// Largest block index whose support meets the retained modes.
    pub fn j_max(&self) -> i32 {
        self.j_max
    }
    /// Number of blocks, `j = -1..=j_max`.
    pub fn len(&self) -> usize {
        self.weights.len()
    }
    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
    pub fn grid(&self) -> &FourierGrid {
        &self.grid
    }

    /// Multiplier array of block `j`.
    pub fn weights(&self, j: i32) -> Result<&[f64]> {
        if j < -1 || j > self.j_max {
            return Err(SnsError::InvalidArgument(format!(
                "block {j} outside -1..={}",
                self.j_max
            )));
        }
        Ok(&self.weights[(j + 1) as usize])
    }

    /// Largest `|Σ_j ρ_j(|k|) - 1|` over retained modes.
    pub fn sum_residual(&self) -> f64 {
        let keep = self.grid.retained();
        (0..self.grid.len())
            .filter(|&i| keep[i])
            .map(|i| (self.weights.iter().map(|w| w[i]).sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Two-column CSV `(|k|, ρ_j(|k|))` sampled on `samples` points of `[0, radius]`.
    pub fn to_csv(&self, j: i32, samples: usize) -> Result<String> {
        self.weights(j)?;
        let radius = self.grid.radius();
        let mut out = String::from("k,rho\n");
        for s in 0..samples {
            let k = radius * s as f64 / (samples.max(2) - 1) as f64;
            writeln!(out, "{k},{}", Self::profile(j, k)).unwrap();
        }
        Ok(out)
    }
}

/// Smooth high-pass `h` and low-pass `l = 1 - h` at level `λ`:
/// `h(r) = 0` for `r <= ½`, `1` for `r >= 1`, quintic smoothstep in between.
#[derive(Clone, Copy, Debug)]
pub struct CutoffPair;

impl CutoffPair {
    pub fn h(r: f64) -> f64 {
        let x = ((r - 0.5) / 0.5).clamp(0.0, 1.0);
        x * x * x * (x * (6.0 * x - 15.0) + 10.0)
    }
    pub fn l(r: f64) -> f64 {
        1.0 - Self::h(r)
    }
    /// `h(|k|/λ)`.
    pub fn high(k: f64, lambda: f64) -> f64 {
        Self::h(k / lambda)
    }
    /// `l(|k|/λ)`.
    pub fn low(k: f64, lambda: f64) -> f64 {
        Self::l(k / lambda)
    }

    /// CSV `(|k|, h, l)` at level `λ`.
    pub fn to_csv(lambda: f64, radius: f64, samples: usize) -> String {
        let mut out = String::from("k,h,l\n");
        for s in 0..samples {
            let k = radius * s as f64 / (samples.max(2) - 1) as f64;
            writeln!(out, "{k},{},{}", Self::high(k, lambda), Self::low(k, lambda)).unwrap();
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn j_max_for_reference_grids() {
        assert_eq!(DyadicPartition::new(&FourierGrid::new(64).unwrap()).j_max(), 5);
        assert_eq!(DyadicPartition::new(&FourierGrid::new(128).unwrap()).j_max(), 6);
    }

    #[test]
    fn partition_of_unity_on_grid() {
        for n in [16, 64, 128] {
            let p = DyadicPartition::new(&FourierGrid::new(n).unwrap());
            assert!(p.sum_residual() < 1e-14, "n={n}");
        }
    }

    #[test]
    fn out_of_range_block_rejected() {
        let p = DyadicPartition::new(&FourierGrid::new(32).unwrap());
        assert!(p.weights(p.j_max() + 1).is_err());
        assert!(p.weights(-2).is_err());
        assert!(p.to_csv(-1, 5).unwrap().starts_with("k,rho\n0,1\n"));
    }

    proptest! {
        #[test]
        fn blocks_two_apart_are_disjoint(j in -1i32..10, k in 0.0f64..3000.0) {
            let a = DyadicPartition::profile(j, k);
            let b = DyadicPartition::profile(j + 2, k);
            prop_assert_eq!(a * b, 0.0);
        }

        #[test]
        fn partition_telescopes(k in 0.0f64..1000.0) {
            let s: f64 = (-1..=12).map(|j| DyadicPartition::profile(j, k)).sum();
            prop_assert!((s - 1.0).abs() < 1e-14);
        }

        #[test]
        fn annulus_support(j in 0i32..8, k in 0.0f64..2000.0) {
            let s = 2f64.powi(j);
            if k < 0.75 * s || k > 8.0 / 3.0 * s {
                prop_assert_eq!(DyadicPartition::profile(j, k), 0.0);
            }
        }

        #[test]
        fn cutoffs_sum_to_one(r in 0.0f64..4.0) {
            let (h, l) = (CutoffPair::h(r), CutoffPair::l(r));
            prop_assert!((h + l - 1.0).abs() < 1e-15);
            prop_assert!((0.0..=1.0).contains(&h));
            if r <= 0.5 { prop_assert_eq!(h, 0.0); }
            if r >= 1.0 { prop_assert_eq!(h, 1.0); }
        }
    }
}
