use crate::error::{Result, SnsError};

/// Stopping times `T_{i+1} = inf{t >= T_i : ‖w_t‖ >= i + 1}` and the cutoff level
/// `λ = (1 + i)^a` on segment `i`.
#[derive(Clone, Debug)]
pub struct StoppingLedger {
    a: f64,
    i0: usize,
    segment: usize,
    initial_lambda: f64,
    crossings: Vec<(usize, f64)>,
}

impl StoppingLedger {
    pub fn new(initial_norm: f64, a: f64) -> Result<Self> {
        if !(initial_norm >= 0.0) || !initial_norm.is_finite() {
            return Err(SnsError::InvalidArgument(format!("initial norm {initial_norm}")));
        }
        let i0 = initial_norm.floor() as usize;
        Ok(StoppingLedger {
            a,
            i0,
            segment: i0,
            initial_lambda: (1.0 + initial_norm.ceil()).powf(a),
            crossings: vec![(i0, 0.0)],
        })
    }

    pub fn i0(&self) -> usize {
        self.i0
    }
    pub fn segment(&self) -> usize {
        self.segment
    }
    /// `λ` at `t = 0`.
    pub fn initial_lambda(&self) -> f64 {
        self.initial_lambda
    }
    /// `λ = (1 + i)^a` on the current segment.
    pub fn lambda(&self) -> f64 {
        Self::level(self.segment, self.a)
    }
    pub fn level(i: usize, a: f64) -> f64 {
        (1.0 + i as f64).powf(a)
    }
    /// `(i, T_i)` for `i >= i0`, starting with `(i0, 0)`.
    pub fn crossings(&self) -> &[(usize, f64)] {
        &self.crossings
    }

    /// Records every crossing reached by `‖w_t‖`; returns how many were added.
    pub fn observe(&mut self, t: f64, norm: f64) -> usize {
        let mut added = 0;
        while norm >= (self.segment + 1) as f64 {
            self.segment += 1;
            self.crossings.push((self.segment, t));
            added += 1;
        }
        added
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn initial_level_and_first_crossings() {
        let mut l = StoppingLedger::new(0.5, 3.0).unwrap();
        assert_eq!(l.i0(), 0);
        assert_eq!(l.initial_lambda(), 8.0);
        l.observe(0.2, 0.9);
        assert_eq!(l.crossings().len(), 1);
        l.observe(0.3, 1.2);
        l.observe(0.4, 2.0);
        assert_eq!(l.crossings(), &[(0, 0.0), (1, 0.3), (2, 0.4)]);
        assert_eq!(l.lambda(), 27.0);
    }

    #[test]
    fn jump_over_several_levels_in_one_step() {
        let mut l = StoppingLedger::new(1.0, 3.0).unwrap();
        assert_eq!(l.observe(0.1, 3.5), 2);
        assert_eq!(l.segment(), 3);
        assert_eq!(l.observe(0.2, 0.1), 0);
        assert!(StoppingLedger::new(f64::NAN, 3.0).is_err());
    }
}
