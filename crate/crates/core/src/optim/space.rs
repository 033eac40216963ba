use serde::{Deserialize, Serialize};

use super::OptimError;
use crate::model::DecisionVector;
use crate::params::ModelParameters;

/// Box bounds, one `[lower, upper]` pair per dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl SearchSpace {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self, OptimError> {
        let space = SearchSpace { lower, upper };
        space.check()?;
        Ok(space)
    }

    /// The same interval in every one of `dim` dimensions.
    pub fn cube(dim: usize, lo: f64, hi: f64) -> Result<Self, OptimError> {
        Self::new(vec![lo; dim], vec![hi; dim])
    }

    /// Default bounds for `(T0, ξ1, ξ2, G, W_r)`.
    pub fn model_default(params: &ModelParameters) -> Self {
        SearchSpace {
            lower: vec![1e-3, 0.0, 0.0, 0.01, params.w_m],
            upper: vec![2.0, 500.0, 500.0, 50.0, params.max_retail_price()],
        }
    }

    /// Replace the bounds of one decision variable by name.
    pub fn with_decision_bounds(mut self, name: &str, lo: f64, hi: f64) -> Result<Self, OptimError> {
        let i = DecisionVector::index_of(name)
            .ok_or_else(|| OptimError::InvalidSpace(format!("unknown decision variable {name:?}")))?;
        if i >= self.dim() {
            return Err(OptimError::InvalidSpace(format!(
                "{name} is outside a {}-D space",
                self.dim()
            )));
        }
        self.lower[i] = lo;
        self.upper[i] = hi;
        self.check()?;
        Ok(self)
    }

    pub fn check(&self) -> Result<(), OptimError> {
        if self.lower.is_empty() || self.lower.len() != self.upper.len() {
            return Err(OptimError::InvalidSpace(format!(
                "bound vectors have lengths {} and {}",
                self.lower.len(),
                self.upper.len()
            )));
        }
        for (i, (lo, hi)) in self.lower.iter().zip(&self.upper).enumerate() {
            if !lo.is_finite() || !hi.is_finite() || lo >= hi {
                return Err(OptimError::InvalidSpace(format!(
                    "dimension {i}: need finite lower < upper, got [{lo}, {hi}]"
                )));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (lo, hi))| *v >= *lo && *v <= *hi)
    }

    /// Fold an out-of-range value back into `[lo, hi]` by mirroring at the
    /// bounds. Anything still outside after one mirror is clamped.
    pub fn reflect(&self, x: &mut [f64]) {
        for (j, v) in x.iter_mut().enumerate() {
            let (lo, hi) = (self.lower[j], self.upper[j]);
            if v.is_nan() {
                *v = lo;
            } else if *v < lo {
                *v = (2.0 * lo - *v).min(hi);
            } else if *v > hi {
                *v = (2.0 * hi - *v).max(lo);
            }
        }
    }

    /// Clamp into the box. Returns which dimensions were clamped.
    pub fn clamp(&self, x: &mut [f64]) -> Vec<bool> {
        x.iter_mut()
            .enumerate()
            .map(|(j, v)| {
                let (lo, hi) = (self.lower[j], self.upper[j]);
                if v.is_nan() || *v < lo {
                    *v = lo;
                    true
                } else if *v > hi {
                    *v = hi;
                    true
                } else {
                    false
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_space_brackets_the_price_range() {
        let p = ModelParameters::reference(0.04, 0.06);
        let s = SearchSpace::model_default(&p);
        assert_eq!(s.lower[4], 80.0);
        assert_eq!(s.upper[4], 300.0);
        assert!(s.check().is_ok());
    }

    #[test]
    fn rejects_bad_bounds() {
        assert!(SearchSpace::new(vec![1.0], vec![1.0]).is_err());
        assert!(SearchSpace::new(vec![0.0, 0.0], vec![1.0]).is_err());
        assert!(SearchSpace::new(vec![], vec![]).is_err());
        let p = ModelParameters::reference(0.04, 0.06);
        assert!(SearchSpace::model_default(&p)
            .with_decision_bounds("Q", 0.0, 1.0)
            .is_err());
    }

    #[test]
    fn reflection_and_clamping_stay_inside() {
        let s = SearchSpace::cube(3, 0.0, 1.0).unwrap();
        let mut x = [-0.25, 1.5, 7.0];
        s.reflect(&mut x);
        assert_eq!(x, [0.25, 0.5, 0.0]);
        let mut y = [-1.0, 0.5, 2.0];
        assert_eq!(s.clamp(&mut y), vec![true, false, true]);
        assert_eq!(y, [0.0, 0.5, 1.0]);
    }
}
