use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Per-edge success probability as a saturating function of practice:
/// `p(k) = p0 + (p_max - p0) * (1 - exp(-k / tau))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompetenceModel<F: Scalar> {
    pub p0: F,
    pub p_max: F,
    pub tau: F,
}

impl<F: Scalar> CompetenceModel<F> {
    pub fn new(p0: F, p_max: F, tau: F) -> Result<Self> {
        let m = CompetenceModel { p0, p_max, tau };
        m.validate()?;
        Ok(m)
    }

    /// Every move succeeds.
    pub fn perfect() -> Self {
        CompetenceModel { p0: F::one(), p_max: F::one(), tau: F::one() }
    }

    /// No move ever succeeds.
    pub fn null() -> Self {
        CompetenceModel { p0: F::zero(), p_max: F::zero(), tau: F::one() }
    }

    /// Practice-independent success probability `p`.
    pub fn constant(p: F) -> Self {
        CompetenceModel { p0: p, p_max: p, tau: F::one() }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.p0 >= F::zero()
            && self.p0 <= self.p_max
            && self.p_max <= F::one()
            && self.tau > F::zero()
            && self.tau.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "competence requires 0 <= p0 <= p_max <= 1 and tau > 0 (got p0={:?}, p_max={:?}, tau={:?})",
                self.p0, self.p_max, self.tau
            )))
        }
    }

    /// Success probability after `practice` attempts on an edge.
    pub fn probability(&self, practice: u64) -> F {
        let k = F::from_u64(practice).unwrap_or_else(F::max_value);
        let gain = F::one() - (-k / self.tau).exp();
        (self.p0 + (self.p_max - self.p0) * gain).min(F::one()).max(F::zero())
    }
}

impl<F: Scalar> Default for CompetenceModel<F> {
    fn default() -> Self {
        CompetenceModel { p0: F::lit(0.3), p_max: F::lit(0.95), tau: F::lit(10.0) }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn curve_endpoints() {
        let m = CompetenceModel::<f64>::new(0.2, 0.9, 7.0).unwrap();
        assert_eq!(m.probability(0), 0.2);
        assert!((m.probability(700) - 0.9).abs() < 1e-9);
        let m32 = CompetenceModel::<f32>::new(0.2, 0.9, 7.0).unwrap();
        assert!((m32.probability(700) - 0.9).abs() < 1e-6);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(CompetenceModel::<f64>::new(0.5, 0.4, 1.0).is_err());
        assert!(CompetenceModel::<f64>::new(0.1, 0.4, 0.0).is_err());
        assert!(CompetenceModel::<f64>::new(-0.1, 0.4, 1.0).is_err());
        assert!(CompetenceModel::<f64>::new(0.1, 1.4, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn nondecreasing_in_practice(p0 in 0.0f64..1.0, span in 0.0f64..1.0, tau in 0.1f64..100.0, k in 0u64..10_000) {
            let p_max = p0 + (1.0 - p0) * span;
            let m = CompetenceModel::new(p0, p_max, tau).unwrap();
            prop_assert!(m.probability(k + 1) >= m.probability(k));
            prop_assert!(m.probability(k) <= p_max + 1e-12);
        }
    }
}
