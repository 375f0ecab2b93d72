//! Tables behind `noise-stats` and `spectra`.

use crate::error::Result;
use crate::noise::{enhanced_product, renorm_constant, OuEnsemble, Purpose, RenormWeight};
use crate::operator::OperatorHandle;
use crate::paracalc::DyadicPartition;
use crate::spectral::FourierGrid;

use super::artifacts::fmt_real;

/// One `noise-stats` row. The diagonal mean is taken before subtracting `r_λ(t)`.
#[derive(Clone, Copy, Debug)]
pub struct NoiseStatsRow {
    pub lambda: f64,
    pub t: f64,
    pub r_lambda: f64,
    pub mc_diag_mean: f64,
    pub mc_diag_stderr: f64,
    pub mc_offdiag_mean: f64,
    pub samples: usize,
}

/// Monte-Carlo moments of the spatial mean of `(2∇_sym 𝔏_λ X_t) ⊙ P^λ_t`.
pub fn noise_stats(n: usize, lambdas: &[f64], times: &[f64], samples: usize, seed: u64) -> Result<Vec<NoiseStatsRow>> {
    let g = FourierGrid::new(n)?;
    let part = DyadicPartition::new(&g);
    let mut rows = Vec::new();
    for &lambda in lambdas {
        for &t in times {
            let r = renorm_constant(&g, lambda, t, RenormWeight::Squared)?;
            let mut ens = OuEnsemble::with_purpose(&g, seed, Purpose::Sampling);
            let (mut d, mut o) = (Vec::with_capacity(samples), Vec::with_capacity(samples));
            for _ in 0..samples {
                ens.sample_at(t);
                let m = enhanced_product(&part, &ens.x_field(), lambda, 0.0)?.mean();
                d.push(0.5 * (m[0] + m[3]));
                o.push(m[1]);
            }
            let k = samples.max(1) as f64;
            let mean = d.iter().sum::<f64>() / k;
            let var = d.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0).max(1.0);
            rows.push(NoiseStatsRow {
                lambda,
                t,
                r_lambda: r,
                mc_diag_mean: mean,
                mc_diag_stderr: (var / k).sqrt(),
                mc_offdiag_mean: o.iter().sum::<f64>() / k,
                samples,
            });
        }
    }
    Ok(rows)
}

pub fn noise_stats_csv(rows: &[NoiseStatsRow]) -> String {
    let mut s = String::from("lambda,t,r_lambda,mc_diag_mean,mc_diag_stderr,mc_offdiag_mean,samples\n");
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.lambda,
            r.t,
            fmt_real(r.r_lambda),
            fmt_real(r.mc_diag_mean),
            fmt_real(r.mc_diag_stderr),
            fmt_real(r.mc_offdiag_mean),
            r.samples
        ));
    }
    s
}

#[derive(Clone, Copy, Debug)]
pub struct SpectraRow {
    pub lambda: f64,
    pub seed: u64,
    pub t: f64,
    pub top_eig: f64,
    pub r_lambda: f64,
    pub iterations: usize,
}

/// Top eigenvalue of `A^λ_t` for `X_t` sampled from its law at `t`.
pub fn spectra(n: usize, lambdas: &[f64], seeds: &[u64], t: f64) -> Result<Vec<SpectraRow>> {
    let g = FourierGrid::new(n)?;
    let mut rows = Vec::new();
    for &seed in seeds {
        let mut ens = OuEnsemble::new(&g, seed);
        ens.evolve(t)?;
        let x = ens.x_field();
        for &lambda in lambdas {
            let r = renorm_constant(&g, lambda, t, RenormWeight::Squared)?;
            let e = OperatorHandle::new(&x, lambda, r)?.top_eigenvalue(1e-9, 50_000, seed)?;
            rows.push(SpectraRow {
                lambda,
                seed,
                t,
                top_eig: e.value,
                r_lambda: r,
                iterations: e.iterations,
            });
        }
    }
    Ok(rows)
}

pub fn spectra_csv(rows: &[SpectraRow]) -> String {
    let mut s = String::from("lambda,seed,t,top_eig,r_lambda,iterations\n");
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.lambda,
            r.seed,
            r.t,
            fmt_real(r.top_eig),
            fmt_real(r.r_lambda),
            r.iterations
        ));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tables_have_expected_shape() {
        let rows = noise_stats(16, &[2.0, 4.0], &[0.5], 5, 1).unwrap();
        let csv = noise_stats_csv(&rows);
        assert_eq!(csv.lines().count(), 3);
        assert!(rows.iter().all(|r| r.mc_diag_stderr > 0.0 && r.samples == 5));
        let rows = spectra(16, &[4.0], &[1, 2], 0.5).unwrap();
        assert_eq!(spectra_csv(&rows).lines().count(), 3);
    }
}
