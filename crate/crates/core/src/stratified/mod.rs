//! Conditional Gaussian sampling on strata cut out by linear projections.
//!
//! A stratum is a box in the projected coordinates `(e_1·z, …, e_d′·z)`,
//! built from equiprobable marginal intervals. Orthogonal directions give
//! equiprobable strata sampled exactly; non-orthogonal directions go through
//! Gram-Schmidt and carry a likelihood weight instead of a known `p_k`.

mod allocation;
mod estimator;

pub use allocation::{optimal_allocation, proportional_allocation, theoretical_variance, AllocationPlan, N_MIN};
pub use estimator::{
    lhs_estimate, plain_mc_estimate, stratified_estimate, two_stage_estimate, Allocation,
    EstimateReport, FnIntegrand, Integrand, StratumSummary, PILOT_FRACTION,
};

use crate::error::{Error, Result};
use crate::gaussian::{normal_inv_cdf, truncated_normal, RandomStream};
use crate::linalg::{dot, gram_schmidt, norm, GramSchmidt};

const UNIT_TOL: f64 = 1e-12;
const ORTHO_TOL: f64 = 1e-10;
/// Samplers refuse direction sets whose Gram matrix is further than this
/// from the identity.
pub const SAMPLER_ORTHO_TOL: f64 = 1e-8;

/// `d′` unit vectors in `R^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionSet {
    dim: usize,
    columns: Vec<Vec<f64>>,
    orthogonal: bool,
}

impl DirectionSet {
    /// Orthonormal set; fails with `NotOrthogonal` when `VᵀV` is off by more
    /// than 1e-10.
    pub fn orthogonal(columns: Vec<Vec<f64>>) -> Result<Self> {
        let set = Self::checked(columns, true)?;
        let dev = set.gram_deviation();
        if dev > ORTHO_TOL {
            return Err(Error::NotOrthogonal { deviation: dev });
        }
        Ok(set)
    }

    /// Linearly independent unit vectors, not necessarily orthogonal.
    pub fn general(columns: Vec<Vec<f64>>) -> Result<Self> {
        let set = Self::checked(columns, false)?;
        gram_schmidt(&set.columns)?;
        Ok(set)
    }

    pub fn single(v: Vec<f64>) -> Result<Self> {
        Self::orthogonal(vec![v])
    }

    fn checked(columns: Vec<Vec<f64>>, orthogonal: bool) -> Result<Self> {
        let dim = columns.first().map(Vec::len).ok_or(Error::ZeroVector)?;
        if columns.len() > dim {
            return Err(Error::InvalidArgument(format!(
                "{} directions in dimension {dim}",
                columns.len()
            )));
        }
        for c in &columns {
            if c.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: c.len(),
                });
            }
            let n = norm(c);
            if (n - 1.0).abs() > UNIT_TOL {
                return Err(Error::InvalidArgument(format!(
                    "direction has norm {n}, expected 1"
                )));
            }
        }
        Ok(Self {
            dim,
            columns,
            orthogonal,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn count(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.columns[j]
    }

    pub fn is_orthogonal(&self) -> bool {
        self.orthogonal
    }

    /// `max |VᵀV − I|`
    pub fn gram_deviation(&self) -> f64 {
        let mut dev: f64 = 0.0;
        for (i, a) in self.columns.iter().enumerate() {
            for (j, b) in self.columns.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                dev = dev.max((dot(a, b) - target).abs());
            }
        }
        dev
    }
}

/// Grid of per-direction interval counts `K_j`; strata are addressed by
/// 1-based multi-indices or by a flat index in `0..K`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StratumSpec {
    counts: Vec<usize>,
}

impl StratumSpec {
    pub fn new(counts: Vec<usize>) -> Result<Self> {
        if counts.is_empty() || counts.contains(&0) {
            return Err(Error::InvalidArgument(format!(
                "interval counts must be positive, got {counts:?}"
            )));
        }
        Ok(Self { counts })
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn directions(&self) -> usize {
        self.counts.len()
    }

    /// `K = ∏ K_j`
    pub fn total(&self) -> usize {
        self.counts.iter().product()
    }

    /// Multi-index of flat stratum `flat`; the last direction varies fastest.
    pub fn multi_index(&self, flat: usize) -> Vec<usize> {
        let mut rest = flat;
        let mut k = vec![0; self.counts.len()];
        for (j, kj) in self.counts.iter().enumerate().rev() {
            k[j] = rest % kj + 1;
            rest /= kj;
        }
        k
    }

    pub fn flat_index(&self, k: &[usize]) -> Result<usize> {
        self.check(k)?;
        Ok(k.iter()
            .zip(&self.counts)
            .fold(0, |acc, (kj, cj)| acc * cj + (kj - 1)))
    }

    fn check(&self, k: &[usize]) -> Result<()> {
        if k.len() != self.counts.len() {
            return Err(Error::DimensionMismatch {
                expected: self.counts.len(),
                got: k.len(),
            });
        }
        for (kj, cj) in k.iter().zip(&self.counts) {
            if *kj == 0 || kj > cj {
                return Err(Error::IndexOutOfRange {
                    index: *kj,
                    max: *cj,
                });
            }
        }
        Ok(())
    }

    /// `(a⁻, a⁺) = (Φ⁻¹((k−1)/K), Φ⁻¹(k/K))` for direction `j`.
    pub fn bounds(&self, j: usize, k: usize) -> (f64, f64) {
        let c = self.counts[j];
        (boundary(k - 1, c), boundary(k, c))
    }
}

// Φ⁻¹(i/K), evaluated from the nearer tail.
fn boundary(i: usize, strata: usize) -> f64 {
    if i == 0 {
        f64::NEG_INFINITY
    } else if i == strata {
        f64::INFINITY
    } else if 2 * i <= strata {
        normal_inv_cdf(i as f64 / strata as f64).expect("interior quantile")
    } else {
        -normal_inv_cdf((strata - i) as f64 / strata as f64).expect("interior quantile")
    }
}

// X = Φ⁻¹((k − U)/K), using the symmetric form in the upper half.
fn stratum_normal(k: usize, strata: usize, u: f64) -> f64 {
    let x = if 2 * k <= strata {
        normal_inv_cdf((k as f64 - u) / strata as f64)
    } else {
        normal_inv_cdf(((strata - k) as f64 + u) / strata as f64).map(|x| -x)
    }
    .expect("argument in (0, 1)");
    x.clamp(boundary(k - 1, strata), boundary(k, strata))
}

#[derive(Debug, Clone, PartialEq)]
pub struct StratifiedDraw {
    pub z: Vec<f64>,
    /// 1-based multi-index.
    pub stratum: Vec<usize>,
    pub weight: f64,
}

/// Draw from stratum `k ∈ 1..=K` of the slab partition along `v`:
/// `z = vX + Z′ − v(v·Z′)`.
pub fn sample_stratum_1d(
    v: &[f64],
    k: usize,
    strata: usize,
    stream: &mut RandomStream,
) -> Result<StratifiedDraw> {
    if k == 0 || k > strata {
        return Err(Error::IndexOutOfRange {
            index: k,
            max: strata,
        });
    }
    let x = stratum_normal(k, strata, stream.uniform());
    let mut z = vec![0.0; v.len()];
    stream.fill_normal(&mut z);
    let c = x - dot(v, &z);
    z.iter_mut().zip(v).for_each(|(zi, vi)| *zi += c * vi);
    Ok(StratifiedDraw {
        z,
        stratum: vec![k],
        weight: 1.0,
    })
}

/// Draw from stratum `k` of the product partition along orthonormal `V`:
/// `z = VX + (I − VVᵀ)Z′`.
pub fn sample_stratum_orthogonal(
    directions: &DirectionSet,
    k: &[usize],
    spec: &StratumSpec,
    stream: &mut RandomStream,
) -> Result<StratifiedDraw> {
    check_orthogonal(directions)?;
    check_dims(directions, spec)?;
    spec.check(k)?;
    let mut z = vec![0.0; directions.dim()];
    orthogonal_into(directions, k, spec, stream, &mut z);
    Ok(StratifiedDraw {
        z,
        stratum: k.to_vec(),
        weight: 1.0,
    })
}

fn check_orthogonal(directions: &DirectionSet) -> Result<()> {
    if directions.is_orthogonal() {
        return Ok(());
    }
    let deviation = directions.gram_deviation();
    if deviation > SAMPLER_ORTHO_TOL {
        Err(Error::NotOrthogonal { deviation })
    } else {
        Ok(())
    }
}

fn check_dims(directions: &DirectionSet, spec: &StratumSpec) -> Result<()> {
    if directions.count() != spec.directions() {
        Err(Error::DimensionMismatch {
            expected: directions.count(),
            got: spec.directions(),
        })
    } else {
        Ok(())
    }
}

fn orthogonal_into(
    directions: &DirectionSet,
    k: &[usize],
    spec: &StratumSpec,
    stream: &mut RandomStream,
    z: &mut [f64],
) {
    let xs: Vec<f64> = k
        .iter()
        .zip(spec.counts())
        .map(|(kj, cj)| stratum_normal(*kj, *cj, stream.uniform()))
        .collect();
    stream.fill_normal(z);
    let coeffs: Vec<f64> = directions
        .columns()
        .iter()
        .zip(&xs)
        .map(|(v, x)| x - dot(v, z))
        .collect();
    for (v, c) in directions.columns().iter().zip(coeffs) {
        z.iter_mut().zip(v).for_each(|(zi, vi)| *zi += c * vi);
    }
}

/// Sampler for boxes along linearly independent, possibly non-orthogonal
/// directions `e_1 … e_d′`.
///
/// Coordinates along the Gram-Schmidt basis `f_m` are drawn one after the
/// other from normals truncated to
/// `ã_m^± = (a_m^± − Σ_{j<m} (e_m·f_j) X_j) / ‖f'_m‖`, and the draw carries the
/// weight `∏ (Φ(ã_m⁺) − Φ(ã_m⁻))`.
#[derive(Debug, Clone)]
pub struct NonOrthogonalSampler {
    directions: DirectionSet,
    gs: GramSchmidt,
}

impl NonOrthogonalSampler {
    pub fn new(directions: DirectionSet) -> Result<Self> {
        let gs = gram_schmidt(directions.columns())?;
        Ok(Self { directions, gs })
    }

    pub fn directions(&self) -> &DirectionSet {
        &self.directions
    }

    pub fn gram_schmidt(&self) -> &GramSchmidt {
        &self.gs
    }

    pub fn sample(
        &self,
        k: &[usize],
        spec: &StratumSpec,
        stream: &mut RandomStream,
    ) -> Result<StratifiedDraw> {
        check_dims(&self.directions, spec)?;
        spec.check(k)?;
        let mut z = vec![0.0; self.directions.dim()];
        let weight = self.sample_into(k, spec, stream, &mut z)?;
        Ok(StratifiedDraw {
            z,
            stratum: k.to_vec(),
            weight,
        })
    }

    // The stream is consumed identically whether or not the draw succeeds.
    fn sample_into(
        &self,
        k: &[usize],
        spec: &StratumSpec,
        stream: &mut RandomStream,
        z: &mut [f64],
    ) -> Result<f64> {
        let us: Vec<f64> = k.iter().map(|_| stream.uniform()).collect();
        stream.fill_normal(z);
        let mut xs = Vec::with_capacity(k.len());
        let mut weight = 1.0;
        for m in 0..k.len() {
            let shift: f64 = self.gs.projections[m].iter().zip(&xs).map(|(p, x)| p * x).sum();
            let (lo, hi) = spec.bounds(m, k[m]);
            let scale = self.gs.norms[m];
            let (x, mass) = truncated_normal((lo - shift) / scale, (hi - shift) / scale, us[m]);
            if !(mass > 0.0) {
                return Err(Error::EmptyBoundInterval { direction: m });
            }
            weight *= mass;
            xs.push(x);
        }
        let coeffs: Vec<f64> = self
            .gs
            .basis
            .iter()
            .zip(&xs)
            .map(|(f, x)| x - dot(f, z))
            .collect();
        for (f, c) in self.gs.basis.iter().zip(coeffs) {
            z.iter_mut().zip(f).for_each(|(zi, fi)| *zi += c * fi);
        }
        Ok(weight)
    }
}

/// One-shot form of [`NonOrthogonalSampler::sample`].
pub fn sample_stratum_nonorthogonal(
    directions: &DirectionSet,
    k: &[usize],
    spec: &StratumSpec,
    stream: &mut RandomStream,
) -> Result<StratifiedDraw> {
    NonOrthogonalSampler::new(directions.clone())?.sample(k, spec, stream)
}

/// A direction set paired with its stratum grid, ready for estimation.
#[derive(Debug, Clone)]
pub enum Stratifier {
    Orthogonal {
        directions: DirectionSet,
        spec: StratumSpec,
    },
    NonOrthogonal {
        sampler: NonOrthogonalSampler,
        spec: StratumSpec,
    },
}

impl Stratifier {
    pub fn orthogonal(directions: DirectionSet, spec: StratumSpec) -> Result<Self> {
        check_orthogonal(&directions)?;
        check_dims(&directions, &spec)?;
        Ok(Self::Orthogonal { directions, spec })
    }

    pub fn nonorthogonal(directions: DirectionSet, spec: StratumSpec) -> Result<Self> {
        check_dims(&directions, &spec)?;
        Ok(Self::NonOrthogonal {
            sampler: NonOrthogonalSampler::new(directions)?,
            spec,
        })
    }

    /// Orthogonal sampler when the set is flagged orthogonal, weighted one otherwise.
    pub fn auto(directions: DirectionSet, spec: StratumSpec) -> Result<Self> {
        if directions.is_orthogonal() {
            Self::orthogonal(directions, spec)
        } else {
            Self::nonorthogonal(directions, spec)
        }
    }

    pub fn spec(&self) -> &StratumSpec {
        match self {
            Self::Orthogonal { spec, .. } | Self::NonOrthogonal { spec, .. } => spec,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Orthogonal { directions, .. } => directions.dim(),
            Self::NonOrthogonal { sampler, .. } => sampler.directions().dim(),
        }
    }

    pub fn strata(&self) -> usize {
        self.spec().total()
    }

    pub fn is_weighted(&self) -> bool {
        matches!(self, Self::NonOrthogonal { .. })
    }

    /// Fills `z` with a draw from flat stratum `flat` and returns its weight.
    pub(crate) fn draw_into(&self, flat: usize, stream: &mut RandomStream, z: &mut [f64]) -> Result<f64> {
        match self {
            Self::Orthogonal { directions, spec } => {
                orthogonal_into(directions, &spec.multi_index(flat), spec, stream, z);
                Ok(1.0)
            }
            Self::NonOrthogonal { sampler, spec } => {
                sampler.sample_into(&spec.multi_index(flat), spec, stream, z)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::normal_cdf;
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn half_line_stratum() {
        let mut s = RandomStream::new(3, 0);
        for _ in 0..1000 {
            let d = sample_stratum_1d(&[1.0], 2, 2, &mut s).unwrap();
            assert!(d.z[0] > 0.0);
        }
        assert!(matches!(
            sample_stratum_1d(&[1.0], 3, 2, &mut s),
            Err(Error::IndexOutOfRange { index: 3, max: 2 })
        ));
    }

    #[test]
    fn extreme_strata_stay_finite_and_inside() {
        let mut s = RandomStream::new(4, 0);
        for k in [1, 2, 999, 1000] {
            for _ in 0..200 {
                let d = sample_stratum_1d(&[1.0], k, 1000, &mut s).unwrap();
                let (lo, hi) = (boundary(k - 1, 1000), boundary(k, 1000));
                assert!(d.z[0].is_finite() && d.z[0] >= lo && d.z[0] <= hi);
            }
        }
    }

    #[test]
    fn second_coordinate_is_standard_normal() {
        let mut s = RandomStream::new(5, 0);
        let n = 100_000;
        let (mut sum, mut sq) = (0.0, 0.0);
        for i in 0..n {
            let d = sample_stratum_1d(&[1.0, 0.0], 1 + i % 10, 10, &mut s).unwrap();
            sum += d.z[1];
            sq += d.z[1] * d.z[1];
        }
        let var = sq / n as f64 - (sum / n as f64).powi(2);
        // se of the sample std is about 1/sqrt(2n)
        assert!((var.sqrt() - 1.0).abs() < 3.0 / (2.0 * n as f64).sqrt());
    }

    #[test]
    fn quadrant_stratum() {
        let dirs = DirectionSet::orthogonal(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let spec = StratumSpec::new(vec![2, 2]).unwrap();
        let mut s = RandomStream::new(6, 0);
        for _ in 0..500 {
            let d = sample_stratum_orthogonal(&dirs, &[2, 2], &spec, &mut s).unwrap();
            assert!(d.z[0] > 0.0 && d.z[1] > 0.0);
        }
    }

    #[test]
    fn orthogonal_sampler_rejects_skewed_directions() {
        let dirs = DirectionSet::general(vec![vec![1.0, 0.0], vec![FRAC_1_SQRT_2, FRAC_1_SQRT_2]]).unwrap();
        let spec = StratumSpec::new(vec![2, 2]).unwrap();
        let mut s = RandomStream::new(6, 0);
        assert!(matches!(
            sample_stratum_orthogonal(&dirs, &[1, 1], &spec, &mut s),
            Err(Error::NotOrthogonal { .. })
        ));
    }

    #[test]
    fn spec_index_round_trip() {
        let spec = StratumSpec::new(vec![3, 4, 2]).unwrap();
        assert_eq!(spec.total(), 24);
        for flat in 0..24 {
            let k = spec.multi_index(flat);
            assert_eq!(spec.flat_index(&k).unwrap(), flat);
        }
        let (lo, hi) = spec.bounds(0, 2);
        assert!(lo < hi);
        assert!((normal_cdf(hi) - normal_cdf(lo) - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn orthogonal_input_gives_constant_weight() {
        let dirs = DirectionSet::general(vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]]).unwrap();
        let spec = StratumSpec::new(vec![4, 4]).unwrap();
        let sampler = NonOrthogonalSampler::new(dirs).unwrap();
        let mut s = RandomStream::new(8, 0);
        for _ in 0..100 {
            let d = sampler.sample(&[1, 3], &spec, &mut s).unwrap();
            assert!((d.weight - 1.0 / 16.0).abs() < 1e-15);
        }
    }

    #[test]
    fn nonorthogonal_hard_constraints() {
        let e2 = vec![FRAC_1_SQRT_2, FRAC_1_SQRT_2, 0.0];
        let dirs = DirectionSet::general(vec![vec![1.0, 0.0, 0.0], e2]).unwrap();
        let spec = StratumSpec::new(vec![4, 4]).unwrap();
        let sampler = NonOrthogonalSampler::new(dirs.clone()).unwrap();
        let mut s = RandomStream::new(9, 0);
        for flat in 0..16 {
            let k = spec.multi_index(flat);
            for _ in 0..200 {
                match sampler.sample(&k, &spec, &mut s) {
                    Ok(d) => {
                        assert!(d.weight > 0.0 && d.weight <= 1.0);
                        for (i, e) in dirs.columns().iter().enumerate() {
                            let (lo, hi) = spec.bounds(i, k[i]);
                            let p = dot(e, &d.z);
                            assert!(p >= lo - 1e-9 && p <= hi + 1e-9, "{p} not in [{lo}, {hi}]");
                        }
                    }
                    Err(Error::EmptyBoundInterval { .. }) => {}
                    Err(e) => panic!("{e}"),
                }
            }
        }
    }
}
