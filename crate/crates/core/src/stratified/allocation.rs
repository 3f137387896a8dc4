use crate::error::{Error, Result};

/// Minimum draws per stratum, so that a within-stratum variance exists.
pub const N_MIN: usize = 2;

/// Sample budget split over strata.
#[derive(Debug, Clone, PartialEq)]
pub struct AllocationPlan {
    pub probabilities: Vec<f64>,
    /// Target fractions `q_k`, summing to one.
    pub fractions: Vec<f64>,
    pub counts: Vec<usize>,
    pub total: usize,
}

impl AllocationPlan {
    pub fn strata(&self) -> usize {
        self.counts.len()
    }
}

/// `q_k = p_k`.
pub fn proportional_allocation(p: &[f64], total: usize) -> Result<AllocationPlan> {
    let s: f64 = p.iter().sum();
    if p.is_empty() || p.iter().any(|x| *x < 0.0) || !(s > 0.0) {
        return Err(Error::InvalidArgument("probabilities must be non-negative with positive sum".into()));
    }
    let q: Vec<f64> = p.iter().map(|x| x / s).collect();
    plan(p, q, total)
}

/// `q_k ∝ p_k σ̂_k`; strata with `σ̂_k = 0` fall back to [`N_MIN`] draws.
pub fn optimal_allocation(p: &[f64], sigma_hat: &[f64], total: usize) -> Result<AllocationPlan> {
    if p.len() != sigma_hat.len() {
        return Err(Error::DimensionMismatch {
            expected: p.len(),
            got: sigma_hat.len(),
        });
    }
    if p.iter().sum::<f64>() > 1.0 + 1e-9 || p.iter().any(|x| *x < 0.0) {
        return Err(Error::InvalidArgument("probabilities must be non-negative and sum to at most 1".into()));
    }
    if sigma_hat.iter().any(|s| !(*s >= 0.0)) {
        return Err(Error::InvalidArgument("standard deviations must be non-negative".into()));
    }
    let raw: Vec<f64> = p.iter().zip(sigma_hat).map(|(a, b)| a * b).collect();
    let s: f64 = raw.iter().sum();
    if !(s > 0.0) {
        return Err(Error::AllZeroSigma);
    }
    plan(p, raw.iter().map(|x| x / s).collect(), total)
}

/// Per-draw variance `Σ p_k² σ_k² / q_k` of the stratified estimator.
pub fn theoretical_variance(p: &[f64], sigma: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(sigma)
        .zip(q)
        .map(|((p, s), q)| if p * s == 0.0 { 0.0 } else { (p * s).powi(2) / q })
        .sum()
}

fn plan(p: &[f64], q: Vec<f64>, total: usize) -> Result<AllocationPlan> {
    let k = q.len();
    if total < k * N_MIN {
        return Err(Error::InvalidArgument(format!(
            "{total} draws cannot give {N_MIN} to each of {k} strata"
        )));
    }
    let counts = round_counts(&q, total);
    Ok(AllocationPlan {
        probabilities: p.to_vec(),
        fractions: q,
        counts,
        total,
    })
}

// Strata whose share falls below N_MIN are pinned there and the rest of the
// budget is re-spread; the remainder is then rounded by largest remainders,
// ties going to the lower index.
fn round_counts(q: &[f64], total: usize) -> Vec<usize> {
    let k = q.len();
    let mut pinned = vec![false; k];
    let mut ideal = vec![0.0; k];
    loop {
        let n_pinned = pinned.iter().filter(|p| **p).count();
        let budget = (total - n_pinned * N_MIN) as f64;
        let mass: f64 = q.iter().zip(&pinned).filter(|(_, p)| !**p).map(|(q, _)| q).sum();
        let mut changed = false;
        for i in 0..k {
            if pinned[i] {
                continue;
            }
            ideal[i] = if mass > 0.0 { q[i] / mass * budget } else { 0.0 };
            if ideal[i] < N_MIN as f64 {
                pinned[i] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let mut counts: Vec<usize> = (0..k)
        .map(|i| if pinned[i] { N_MIN } else { ideal[i].floor() as usize })
        .collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..k).filter(|i| !pinned[*i]).collect();
    order.sort_by(|a, b| {
        let (ra, rb) = (ideal[*a] - ideal[*a].floor(), ideal[*b] - ideal[*b].floor());
        rb.total_cmp(&ra).then(a.cmp(b))
    });
    for i in order.iter().cycle().take(total - assigned) {
        counts[*i] += 1;
    }
    counts
}
