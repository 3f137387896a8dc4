//! Discounted Asian basket payoffs, with optional up-and-out barriers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::PathMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PayoffKind {
    /// `e^{−rT} (Σ w S − K)⁺`
    Asian,
    /// Knocked out when the last monitored price reaches the barrier.
    BarrierExpiry,
    /// Knocked out when any monitored price reaches the barrier.
    BarrierComplete,
}

impl PayoffKind {
    pub fn label(self) -> &'static str {
        match self {
            PayoffKind::Asian => "asian",
            PayoffKind::BarrierExpiry => "barrier-expiry",
            PayoffKind::BarrierComplete => "barrier-complete",
        }
    }

    pub fn has_barrier(self) -> bool {
        !matches!(self, PayoffKind::Asian)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PayoffSpec {
    pub kind: PayoffKind,
    pub strike: f64,
    pub barrier: Option<f64>,
    /// Weights in node order, summing to one.
    pub weights: Vec<f64>,
    pub discount: f64,
}

impl PayoffSpec {
    pub fn new(
        kind: PayoffKind,
        strike: f64,
        barrier: Option<f64>,
        weights: Vec<f64>,
        discount: f64,
    ) -> Result<Self> {
        if !(strike > 0.0) {
            return Err(Error::InvalidArgument(format!("strike must be positive, got {strike}")));
        }
        match (kind.has_barrier(), barrier) {
            (true, None) => {
                return Err(Error::InvalidArgument("barrier payoff needs a barrier level".into()))
            }
            (true, Some(b)) if !(b > strike) => {
                return Err(Error::InvalidArgument(format!(
                    "barrier {b} must exceed strike {strike}"
                )))
            }
            (false, Some(_)) => {
                return Err(Error::InvalidArgument("asian payoff takes no barrier".into()))
            }
            _ => {}
        }
        let total: f64 = weights.iter().sum();
        if weights.is_empty() || (total - 1.0).abs() > 1e-12 || weights.iter().any(|w| *w < 0.0) {
            return Err(Error::InvalidArgument(format!(
                "weights must be non-negative and sum to 1, got sum {total}"
            )));
        }
        Ok(Self {
            kind,
            strike,
            barrier,
            weights,
            discount,
        })
    }

    pub fn evaluate(&self, path: &PathMatrix) -> f64 {
        match self.kind {
            PayoffKind::Asian => asian_basket(path, self),
            PayoffKind::BarrierExpiry => asian_barrier_expiry(path, self),
            PayoffKind::BarrierComplete => asian_barrier_complete(path, self),
        }
    }

    fn average(&self, path: &PathMatrix) -> f64 {
        self.weights.iter().zip(&path.values).map(|(w, s)| w * s).sum()
    }
}

pub fn asian_basket(path: &PathMatrix, spec: &PayoffSpec) -> f64 {
    spec.discount * (spec.average(path) - spec.strike).max(0.0)
}

/// Zero when `S(T) ≥ B` (strict survival `S(T) < B`).
pub fn asian_barrier_expiry(path: &PathMatrix, spec: &PayoffSpec) -> f64 {
    let barrier = spec.barrier.unwrap_or(f64::INFINITY);
    let last = *path.values.last().expect("non-empty path");
    if last >= barrier {
        0.0
    } else {
        asian_basket(path, spec)
    }
}

/// Zero when any monitored `S(t_j) ≥ B`.
pub fn asian_barrier_complete(path: &PathMatrix, spec: &PayoffSpec) -> f64 {
    let barrier = spec.barrier.unwrap_or(f64::INFINITY);
    if path.values.iter().any(|s| *s >= barrier) {
        0.0
    } else {
        asian_basket(path, spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(kind: PayoffKind, barrier: Option<f64>) -> PayoffSpec {
        PayoffSpec::new(kind, 50.0, barrier, vec![0.25; 4], 1.0).unwrap()
    }

    #[test]
    fn asian_is_positive_part() {
        let s = spec(PayoffKind::Asian, None);
        let path = PathMatrix::single_asset(vec![40.0, 50.0, 60.0, 70.0]);
        assert_eq!(s.evaluate(&path), 5.0);
        let path = PathMatrix::single_asset(vec![40.0; 4]);
        assert_eq!(s.evaluate(&path), 0.0);
    }

    #[test]
    fn barrier_at_expiry_is_strict() {
        let s = spec(PayoffKind::BarrierExpiry, Some(60.0));
        let below = PathMatrix::single_asset(vec![70.0, 70.0, 70.0, 59.999]);
        assert!(s.evaluate(&below) > 0.0);
        let at = PathMatrix::single_asset(vec![70.0, 70.0, 70.0, 60.0]);
        assert_eq!(s.evaluate(&at), 0.0);
    }

    #[test]
    fn barrier_complete_checks_every_node() {
        let s = spec(PayoffKind::BarrierComplete, Some(60.0));
        let hit = PathMatrix::single_asset(vec![55.0, 60.0, 55.0, 55.0]);
        assert_eq!(s.evaluate(&hit), 0.0);
        let miss = PathMatrix::single_asset(vec![55.0, 59.0, 55.0, 55.0]);
        assert_eq!(s.evaluate(&miss), 6.0);
    }

    #[test]
    fn complete_never_exceeds_expiry_never_exceeds_plain() {
        let plain = spec(PayoffKind::Asian, None);
        let exp = spec(PayoffKind::BarrierExpiry, Some(60.0));
        let comp = spec(PayoffKind::BarrierComplete, Some(60.0));
        for a in [45.0, 58.0, 61.0] {
            for b in [52.0, 62.0] {
                let path = PathMatrix::single_asset(vec![a, b, a, b]);
                let (p, e, c) = (plain.evaluate(&path), exp.evaluate(&path), comp.evaluate(&path));
                assert!(c <= e && e <= p);
            }
        }
    }

    #[test]
    fn validation() {
        assert!(PayoffSpec::new(PayoffKind::Asian, 0.0, None, vec![1.0], 1.0).is_err());
        assert!(PayoffSpec::new(PayoffKind::BarrierExpiry, 50.0, Some(40.0), vec![1.0], 1.0).is_err());
        assert!(PayoffSpec::new(PayoffKind::BarrierExpiry, 50.0, None, vec![1.0], 1.0).is_err());
        assert!(PayoffSpec::new(PayoffKind::Asian, 50.0, None, vec![0.3, 0.3], 1.0).is_err());
    }
}
