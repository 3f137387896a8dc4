use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::allocation::{optimal_allocation, proportional_allocation, AllocationPlan, N_MIN};
use super::Stratifier;
use crate::error::{Error, Result};
use crate::gaussian::{lhs_normals, RandomStream};
use crate::linalg::Matrix;

/// Share of the budget spent on the pilot stage of optimal allocation.
pub const PILOT_FRACTION: f64 = 0.1;

const MC_CHUNK: usize = 4096;
const PILOT_STREAM: u64 = 0;
const MAIN_STREAM: u64 = 1;

/// Function of a standard-normal vector to be integrated.
pub trait Integrand: Sync {
    fn dim(&self) -> usize;
    fn evaluate(&self, z: &[f64]) -> f64;
}

/// Wraps a closure as an [`Integrand`].
pub struct FnIntegrand<F> {
    dim: usize,
    f: F,
}

impl<F: Fn(&[f64]) -> f64 + Sync> FnIntegrand<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F: Fn(&[f64]) -> f64 + Sync> Integrand for FnIntegrand<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn evaluate(&self, z: &[f64]) -> f64 {
        (self.f)(z)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Allocation {
    /// Equal counts in every stratum.
    Const,
    /// Pilot run, then counts proportional to `p_k σ̂_k`.
    Opt,
}

impl Allocation {
    pub fn label(self) -> &'static str {
        match self {
            Allocation::Const => "const",
            Allocation::Opt => "opt",
        }
    }
}

/// Sample statistics of the summand inside one stratum (`g`, or `weight·g`
/// for weighted strata).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StratumSummary {
    pub count: usize,
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateReport {
    pub price: f64,
    /// Variance of the price estimator.
    pub estimator_variance: f64,
    /// `n_samples · estimator_variance`: single-draw equivalent variance.
    pub variance: f64,
    pub strata: Vec<StratumSummary>,
    /// Draws entering the estimate.
    pub n_samples: usize,
    /// Extra draws spent on a pilot stage.
    pub pilot_samples: usize,
    pub wall_time: Duration,
}

impl EstimateReport {
    pub fn std_error(&self) -> f64 {
        self.estimator_variance.sqrt()
    }

    pub fn n_strata(&self) -> usize {
        self.strata.len().max(1)
    }

    pub fn total_samples(&self) -> usize {
        self.n_samples + self.pilot_samples
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: usize,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    fn merge(self, other: Moments) -> Moments {
        if self.n == 0 {
            return other;
        }
        if other.n == 0 {
            return self;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        Moments {
            n,
            mean: self.mean + d * other.n as f64 / n as f64,
            m2: self.m2 + other.m2 + d * d * (self.n as f64 * other.n as f64) / n as f64,
        }
    }

    fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }
}

fn check_dim(integrand: &dyn Integrand, dim: usize) -> Result<()> {
    if integrand.dim() != dim {
        Err(Error::DimensionMismatch {
            expected: dim,
            got: integrand.dim(),
        })
    } else {
        Ok(())
    }
}

/// Stratified estimator for a fixed allocation plan.
///
/// Equiprobable strata give `Σ p_k · mean_k` with variance `Σ p_k² s_k²/n_k`;
/// weighted strata give `Σ mean_k(weight·g)` with variance `Σ s_k²/n_k`.
/// Stratum `k` draws from `stream.substream(k)`, so the result does not
/// depend on the worker count.
pub fn stratified_estimate(
    integrand: &dyn Integrand,
    stratifier: &Stratifier,
    plan: &AllocationPlan,
    stream: &RandomStream,
) -> Result<EstimateReport> {
    let start = Instant::now();
    check_dim(integrand, stratifier.dim())?;
    if plan.strata() != stratifier.strata() {
        return Err(Error::DimensionMismatch {
            expected: stratifier.strata(),
            got: plan.strata(),
        });
    }
    let dim = stratifier.dim();
    let moments: Vec<Moments> = plan
        .counts
        .par_iter()
        .enumerate()
        .map(|(k, &n)| {
            let mut s = stream.substream(k as u64);
            let mut z = vec![0.0; dim];
            let mut m = Moments::default();
            for _ in 0..n {
                match stratifier.draw_into(k, &mut s, &mut z) {
                    Ok(w) if stratifier.is_weighted() => m.push(w * integrand.evaluate(&z)),
                    Ok(_) => m.push(integrand.evaluate(&z)),
                    Err(Error::EmptyBoundInterval { .. }) => m.push(0.0),
                    Err(e) => return Err(e),
                }
            }
            Ok(m)
        })
        .collect::<Result<_>>()?;

    let weighted = stratifier.is_weighted();
    let (mut price, mut est_var) = (0.0, 0.0);
    for (m, p) in moments.iter().zip(&plan.probabilities) {
        let c = if weighted { 1.0 } else { *p };
        price += c * m.mean;
        if m.n > 0 {
            est_var += c * c * m.variance() / m.n as f64;
        }
    }
    let n_samples = plan.counts.iter().sum();
    Ok(EstimateReport {
        price,
        estimator_variance: est_var,
        variance: est_var * n_samples as f64,
        strata: moments
            .iter()
            .map(|m| StratumSummary {
                count: m.n,
                mean: m.mean,
                std: m.variance().sqrt(),
            })
            .collect(),
        n_samples,
        pilot_samples: 0,
        wall_time: start.elapsed(),
    })
}

/// Stratified estimate under a total budget.
///
/// `Const` spends the whole budget with equal counts per stratum. `Opt`
/// first spends `pilot_fraction` of it with equal counts to estimate the
/// per-stratum deviations, then allocates the rest optimally; the estimate
/// comes from the second stage alone.
pub fn two_stage_estimate(
    integrand: &dyn Integrand,
    stratifier: &Stratifier,
    allocation: Allocation,
    total: usize,
    pilot_fraction: f64,
    stream: &RandomStream,
) -> Result<EstimateReport> {
    let start = Instant::now();
    let k = stratifier.strata();
    let uniform = vec![1.0 / k as f64; k];
    let mut report = match allocation {
        Allocation::Const => {
            let plan = proportional_allocation(&uniform, total)?;
            stratified_estimate(integrand, stratifier, &plan, &stream.substream(MAIN_STREAM))?
        }
        Allocation::Opt => {
            let pilot_n = ((pilot_fraction * total as f64).round() as usize).max(k * N_MIN);
            if total < pilot_n + k * N_MIN {
                return Err(Error::InvalidArgument(format!(
                    "budget {total} too small for a pilot of {pilot_n} and {k} strata"
                )));
            }
            let pilot_plan = proportional_allocation(&uniform, pilot_n)?;
            let pilot = stratified_estimate(
                integrand,
                stratifier,
                &pilot_plan,
                &stream.substream(PILOT_STREAM),
            )?;
            let sigma: Vec<f64> = pilot.strata.iter().map(|s| s.std).collect();
            let main_n = total - pilot_n;
            let plan = match optimal_allocation(&uniform, &sigma, main_n) {
                Err(Error::AllZeroSigma) => proportional_allocation(&uniform, main_n)?,
                other => other?,
            };
            let mut r =
                stratified_estimate(integrand, stratifier, &plan, &stream.substream(MAIN_STREAM))?;
            r.pilot_samples = pilot_n;
            r
        }
    };
    report.wall_time = start.elapsed();
    Ok(report)
}

/// Plain Monte Carlo: sample mean and unbiased sample variance.
pub fn plain_mc_estimate(
    integrand: &dyn Integrand,
    total: usize,
    stream: &RandomStream,
) -> Result<EstimateReport> {
    let start = Instant::now();
    if total < 2 {
        return Err(Error::InvalidArgument("plain Monte Carlo needs at least 2 draws".into()));
    }
    let dim = integrand.dim();
    let chunks = total.div_ceil(MC_CHUNK);
    let parts: Vec<Moments> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut s = stream.substream(c as u64);
            let n = MC_CHUNK.min(total - c * MC_CHUNK);
            let mut z = vec![0.0; dim];
            let mut m = Moments::default();
            for _ in 0..n {
                s.fill_normal(&mut z);
                m.push(integrand.evaluate(&z));
            }
            m
        })
        .collect();
    let m = parts.into_iter().fold(Moments::default(), Moments::merge);
    let variance = m.variance();
    Ok(EstimateReport {
        price: m.mean,
        estimator_variance: variance / total as f64,
        variance,
        strata: Vec::new(),
        n_samples: total,
        pilot_samples: 0,
        wall_time: start.elapsed(),
    })
}

/// Latin Hypercube estimate with the integrand evaluated at `rotation · x`.
///
/// The budget is split into `replications` independent LHS designs; the
/// estimator variance is the sample variance of the replication means
/// divided by their number.
pub fn lhs_estimate(
    integrand: &dyn Integrand,
    rotation: &Matrix,
    total: usize,
    replications: usize,
    stream: &RandomStream,
) -> Result<EstimateReport> {
    let start = Instant::now();
    let d = integrand.dim();
    if rotation.rows() != d || rotation.cols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: rotation.rows(),
        });
    }
    let gram = rotation.transpose().matmul(rotation)?;
    let deviation = gram.max_abs_diff(&Matrix::identity(d));
    if deviation > super::SAMPLER_ORTHO_TOL {
        return Err(Error::NotOrthogonal { deviation });
    }
    if replications < 2 || total < replications {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 replications of at least one draw, got {replications} for {total} draws"
        )));
    }
    let n = total / replications;
    let means: Vec<f64> = (0..replications)
        .into_par_iter()
        .map(|r| {
            let x = lhs_normals(n, d, &mut stream.substream(r as u64))?;
            let sum: f64 = (0..n).map(|i| integrand.evaluate(&rotation.mul_vec(x.row(i)))).sum();
            Ok(sum / n as f64)
        })
        .collect::<Result<_>>()?;
    let mut m = Moments::default();
    means.iter().for_each(|x| m.push(*x));
    let estimator_variance = m.variance() / replications as f64;
    let n_samples = n * replications;
    Ok(EstimateReport {
        price: m.mean,
        estimator_variance,
        variance: estimator_variance * n_samples as f64,
        strata: Vec::new(),
        n_samples,
        pilot_samples: 0,
        wall_time: start.elapsed(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{normal_cdf, normal_inv_cdf, normal_pdf};
    use crate::stratified::{theoretical_variance, DirectionSet, StratumSpec};

    fn slab(dim: usize, k: usize) -> Stratifier {
        let mut v = vec![0.0; dim];
        v[0] = 1.0;
        Stratifier::orthogonal(DirectionSet::single(v).unwrap(), StratumSpec::new(vec![k]).unwrap())
            .unwrap()
    }

    #[test]
    fn constant_integrand_is_exact() {
        let f = FnIntegrand::new(3, |_| 2.5);
        let s = slab(3, 10);
        let plan = proportional_allocation(&[0.1; 10], 200).unwrap();
        let r = stratified_estimate(&f, &s, &plan, &RandomStream::new(1, 0)).unwrap();
        assert!((r.price - 2.5).abs() < 1e-14);
        assert_eq!(r.estimator_variance, 0.0);
        let r = plain_mc_estimate(&f, 1000, &RandomStream::new(1, 0)).unwrap();
        assert_eq!((r.price, r.variance), (2.5, 0.0));
        let r = lhs_estimate(&f, &Matrix::identity(3), 300, 30, &RandomStream::new(1, 0)).unwrap();
        assert_eq!(r.variance, 0.0);
        let r = two_stage_estimate(&f, &s, Allocation::Opt, 400, 0.1, &RandomStream::new(1, 0)).unwrap();
        assert!((r.price - 2.5).abs() < 1e-14);
    }

    // Within-stratum variance of Z given Z ∈ (a, b), truncated normal moments.
    fn truncated_var(a: f64, b: f64) -> f64 {
        let pa = if a.is_finite() { normal_pdf(a) } else { 0.0 };
        let pb = if b.is_finite() { normal_pdf(b) } else { 0.0 };
        let ta = if a.is_finite() { a * pa } else { 0.0 };
        let tb = if b.is_finite() { b * pb } else { 0.0 };
        let mass = normal_cdf(b) - normal_cdf(a);
        let mean = (pa - pb) / mass;
        1.0 + (ta - tb) / mass - mean * mean
    }

    #[test]
    fn linear_function_along_direction() {
        let k = 100;
        let f = FnIntegrand::new(2, |z: &[f64]| z[0]);
        let s = slab(2, k);
        let bound = |i: usize| match i {
            0 => f64::NEG_INFINITY,
            i if i == k => f64::INFINITY,
            i => normal_inv_cdf(i as f64 / k as f64).unwrap(),
        };
        let p = vec![1.0 / k as f64; k];
        let sigma: Vec<f64> = (0..k).map(|i| truncated_var(bound(i), bound(i + 1)).sqrt()).collect();
        let stream = RandomStream::new(2, 0);

        let plan = proportional_allocation(&p, 100_000).unwrap();
        let r = stratified_estimate(&f, &s, &plan, &stream).unwrap();
        let oracle = theoretical_variance(&p, &sigma, &plan.fractions);
        assert!((r.variance / oracle - 1.0).abs() < 0.1, "{} vs {oracle}", r.variance);

        let plan = optimal_allocation(&p, &sigma, 100_000).unwrap();
        let r = stratified_estimate(&f, &s, &plan, &stream).unwrap();
        let oracle = theoretical_variance(&p, &sigma, &plan.fractions);
        assert!(1.0 / oracle >= 1e3);
        assert!(1.0 / r.variance >= 1e3, "per-draw variance {}", r.variance);
        assert!((r.variance / oracle - 1.0).abs() < 0.1, "{} vs {oracle}", r.variance);
    }

    #[test]
    fn deterministic_across_pools() {
        let f = FnIntegrand::new(4, |z: &[f64]| (z[0] + 0.5 * z[1]).exp());
        let s = slab(4, 16);
        let plan = proportional_allocation(&[1.0 / 16.0; 16], 4000).unwrap();
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| {
                    let a = stratified_estimate(&f, &s, &plan, &RandomStream::new(7, 3)).unwrap();
                    let b = plain_mc_estimate(&f, 20_000, &RandomStream::new(7, 3)).unwrap();
                    (a.price, a.variance, b.price, b.variance)
                })
        };
        assert_eq!(run(1), run(4));
    }

    #[test]
    fn additive_function_under_lhs() {
        let f = FnIntegrand::new(5, |z: &[f64]| z.iter().sum());
        let stream = RandomStream::new(9, 0);
        let lhs = lhs_estimate(&f, &Matrix::identity(5), 30_000, 30, &stream).unwrap();
        let mc = plain_mc_estimate(&f, 30_000, &stream).unwrap();
        assert!(lhs.variance < 1e-3 * mc.variance);
    }

    #[test]
    fn lhs_rejects_non_orthogonal_rotation() {
        let f = FnIntegrand::new(2, |z: &[f64]| z[0]);
        let m = Matrix::from_rows(&[vec![1.0, 0.5], vec![0.0, 1.0]]).unwrap();
        assert!(matches!(
            lhs_estimate(&f, &m, 100, 10, &RandomStream::new(1, 0)),
            Err(Error::NotOrthogonal { .. })
        ));
    }
}
