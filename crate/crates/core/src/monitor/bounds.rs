use serde::{Deserialize, Serialize};

use crate::solver::{EnergySample, TrajectoryRow};

const MARGIN: f64 = 1.1;

/// End of the calibration window; energy constants are fitted and validated on `[0, 1]`.
pub const CALIBRATION_WINDOW: f64 = 1.0;

/// Number of leading samples inside the calibration window.
pub fn window_len(times: impl Iterator<Item = f64>) -> usize {
    times.take_while(|&t| t <= CALIBRATION_WINDOW + 1e-12).count()
}

/// `max(0, log((i² + 2i - C)/(i² + C)) / (C (1 + log(1 + i))))`.
pub fn interval_lower_bound(i: usize, c: f64) -> f64 {
    let i = i as f64;
    let num = i * i + 2.0 * i - c;
    let den = i * i + c;
    if num <= 0.0 || den <= 0.0 || c <= 0.0 {
        return 0.0;
    }
    ((num / den).ln() / (c * (1.0 + (1.0 + i).ln()))).max(0.0)
}

/// `exp(exp(c t))`.
pub fn growth_envelope(t: f64, c: f64) -> f64 {
    (c * t).exp().exp()
}

/// Constants of the energy estimate fitted on the first half of the calibration window.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct EnergyCalibration {
    pub k: i32,
    pub c: f64,
    pub train: usize,
    pub validate: usize,
    /// Negative slack on the second half of the window.
    pub violations: usize,
    /// Negative slack after the window.
    pub beyond_window: usize,
}

impl EnergyCalibration {
    /// Estimate right side minus `∂_t ‖w^𝔏‖²`.
    pub fn slack(&self, s: &EnergySample) -> f64 {
        self.c * s.terms.remainder_scale(s.n_kappa, self.k) - s.terms.remainder_terms()
    }
}

/// Fits `C` for each `k ∈ {1, 2, 3}` and keeps the smallest `k` without validation violations.
pub fn calibrate_energy(samples: &[EnergySample]) -> EnergyCalibration {
    let (window, rest) = samples.split_at(window_len(samples.iter().map(|s| s.terms.t)));
    let (train, val) = window.split_at(window.len() / 2);
    let mut best = None;
    for k in 1..=3 {
        let c = MARGIN
            * train
                .iter()
                .filter_map(|s| {
                    let scale = s.terms.remainder_scale(s.n_kappa, k);
                    (scale > 0.0).then(|| s.terms.remainder_terms() / scale)
                })
                .fold(0.0f64, f64::max);
        let cal = EnergyCalibration {
            k,
            c,
            train: train.len(),
            validate: val.len(),
            violations: 0,
            beyond_window: 0,
        };
        let violations = val.iter().filter(|s| cal.slack(s) < 0.0).count();
        let beyond_window = rest.iter().filter(|s| cal.slack(s) < 0.0).count();
        let cal = EnergyCalibration {
            violations,
            beyond_window,
            ..cal
        };
        if violations == 0 {
            return cal;
        }
        best = Some(cal);
    }
    best.expect("k loop runs")
}

/// Smallest `C` with `∂_t ‖w^𝔏‖² <= C (1 + log(1 + i)) (‖w^𝔏‖² + C)` on the first half, times a margin.
pub fn fit_interval_constant(samples: &[EnergySample], segment_of: impl Fn(f64) -> usize) -> f64 {
    let train = &samples[..samples.len() / 2];
    let holds = |c: f64| {
        train.iter().all(|s| {
            let i = segment_of(s.terms.t) as f64;
            s.terms.total() <= c * (1.0 + (1.0 + i).ln()) * (s.terms.wl_sq + c)
        })
    };
    let mut hi = 1.0;
    while !holds(hi) && hi < 1e12 {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if holds(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    MARGIN * hi.max(f64::MIN_POSITIVE)
}

/// One crossing interval checked against the lower bound.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct CrossingAudit {
    pub i: usize,
    pub t_i: f64,
    pub lower_bound: f64,
    /// `T_{i+1} - T_i`, or `NaN` for the open last interval.
    pub observed_gap: f64,
}

impl CrossingAudit {
    pub fn holds(&self) -> bool {
        self.observed_gap.is_nan() || self.observed_gap >= self.lower_bound
    }
}

pub fn audit_crossings(crossings: &[(usize, f64)], c: f64) -> Vec<CrossingAudit> {
    crossings
        .iter()
        .enumerate()
        .map(|(n, &(i, t))| CrossingAudit {
            i,
            t_i: t,
            lower_bound: interval_lower_bound(i, c),
            observed_gap: crossings.get(n + 1).map_or(f64::NAN, |next| next.1 - t),
        })
        .collect()
}

/// Double-exponential envelope fitted on `[0, T/2]`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct EnvelopeCheck {
    pub c: f64,
    pub violations: usize,
    pub first_violation: Option<f64>,
}

pub fn check_envelope(rows: &[TrajectoryRow]) -> EnvelopeCheck {
    let t_end = rows.last().map_or(0.0, |r| r.t);
    let c = MARGIN
        * rows
            .iter()
            .filter(|r| r.t > 0.0 && r.t <= 0.5 * t_end)
            .map(|r| r.norm_w.max(std::f64::consts::E).ln().ln() / r.t)
            .fold(0.0f64, f64::max);
    let bad: Vec<f64> = rows
        .iter()
        .filter(|r| r.norm_w > growth_envelope(r.t, c))
        .map(|r| r.t)
        .collect();
    EnvelopeCheck {
        c,
        violations: bad.len(),
        first_violation: bad.first().copied(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn bound_vanishes_when_log_argument_small() {
        assert_eq!(interval_lower_bound(1, 2.0), 0.0);
        assert_eq!(interval_lower_bound(2, 2.0), 0.0);
        assert!(interval_lower_bound(3, 2.0) > 0.0);
    }

    #[test]
    fn envelope_at_zero_is_e() {
        assert!((growth_envelope(0.0, 3.0) - std::f64::consts::E).abs() < 1e-15);
    }

    #[test]
    fn audit_marks_open_interval() {
        let a = audit_crossings(&[(0, 0.0), (1, 0.5), (2, 0.9)], 2.0);
        assert_eq!(a.len(), 3);
        assert!((a[1].observed_gap - 0.4).abs() < 1e-15);
        assert!(a[2].observed_gap.is_nan() && a[2].holds());
    }

    proptest! {
        #[test]
        fn bound_is_nonnegative_and_finite(i in 0usize..100_000, c in 0.01f64..100.0) {
            let b = interval_lower_bound(i, c);
            prop_assert!(b >= 0.0 && b.is_finite());
        }
    }
}
