//! Scalar normal distribution functions, seedable random streams and
//! Latin Hypercube normals.

use rand::seq::SliceRandom;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;
const SQRT_2PI: f64 = 2.506_628_274_631_000_5;

/// Standard normal CDF `Φ(x)`, via the complementary error function.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// Upper tail `1 − Φ(x)` without cancellation.
pub fn normal_sf(x: f64) -> f64 {
    0.5 * libm::erfc(x * FRAC_1_SQRT_2)
}

pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / SQRT_2PI
}

/// Standard normal quantile `Φ⁻¹(p)`.
///
/// Acklam's rational approximation followed by one Halley step on `Φ`.
/// The upper half is mapped onto the lower one (`1 − p` is exact there), so
/// the correction always works with an accurate lower tail.
pub fn normal_inv_cdf(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::OutOfDomain(p));
    }
    if p > 0.5 {
        return Ok(-lower_quantile(1.0 - p));
    }
    Ok(lower_quantile(p))
}

// q in (0, 0.5]
fn lower_quantile(q: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const P_LOW: f64 = 0.02425;

    if q == 0.5 {
        return 0.0;
    }
    let x = if q < P_LOW {
        let t = (-2.0 * q.ln()).sqrt();
        (((((C[0] * t + C[1]) * t + C[2]) * t + C[3]) * t + C[4]) * t + C[5])
            / ((((D[0] * t + D[1]) * t + D[2]) * t + D[3]) * t + 1.0)
    } else {
        let t = q - 0.5;
        let r = t * t;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * t
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    };
    // Halley refinement
    let e = normal_cdf(x) - q;
    let u = e * SQRT_2PI * (0.5 * x * x).exp();
    x - u / (1.0 + 0.5 * x * u)
}

/// Draws from `N(0, 1)` conditioned on `[lo, hi]` by inversion, given a
/// uniform `u ∈ (0, 1)`. Returns the draw and the interval mass
/// `Φ(hi) − Φ(lo)`. Intervals in the upper half-line are handled through the
/// survival function so that far-tail masses keep their precision.
pub fn truncated_normal(lo: f64, hi: f64, u: f64) -> (f64, f64) {
    let (x, mass) = if lo >= 0.0 {
        let (sl, sh) = (normal_sf(lo), normal_sf(hi));
        let mass = sl - sh;
        let target = sl - u * mass;
        let x = if target > 0.0 && target < 1.0 {
            -lower_or_upper(target)
        } else {
            lo
        };
        (x, mass)
    } else {
        let (pl, ph) = (normal_cdf(lo), normal_cdf(hi));
        let mass = ph - pl;
        let target = pl + u * mass;
        let x = if target > 0.0 && target < 1.0 {
            lower_or_upper(target)
        } else if target <= 0.0 {
            lo
        } else {
            hi
        };
        (x, mass)
    };
    (x.clamp(lo, hi), mass)
}

fn lower_or_upper(p: f64) -> f64 {
    if p > 0.5 {
        -lower_quantile(1.0 - p)
    } else {
        lower_quantile(p)
    }
}

/// Deterministic random stream selected by `(seed, stream_id)`.
///
/// Backed by ChaCha12 with the stream id mapped onto the cipher's 64-bit
/// stream selector, so distinct ids give non-overlapping keystreams and the
/// output depends on nothing but the pair.
#[derive(Debug, Clone)]
pub struct RandomStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha12Rng,
}

impl RandomStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        Self {
            seed,
            stream_id,
            rng,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Child stream keyed by `(self.stream_id, child)`.
    pub fn substream(&self, child: u64) -> RandomStream {
        RandomStream::new(self.seed, mix(self.stream_id, child))
    }

    /// Uniform on the open interval `(0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    pub fn standard_normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }

    pub fn fill_normal(&mut self, out: &mut [f64]) {
        for x in out {
            *x = self.standard_normal();
        }
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        items.shuffle(&mut self.rng);
    }
}

// splitmix64 finalizer over the pair
fn mix(parent: u64, child: u64) -> u64 {
    let mut z = parent
        .rotate_left(29)
        .wrapping_add(child.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(0xD1B5_4A32_D192_ED03);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `V = (k − U) / K`, uniform on `((k − 1)/K, k/K)` for `k ∈ 1..=K`.
pub fn stratum_uniform(k: usize, strata: usize, stream: &mut RandomStream) -> Result<f64> {
    if k == 0 || k > strata {
        return Err(Error::IndexOutOfRange {
            index: k,
            max: strata,
        });
    }
    Ok(stratum_uniform_from(k, strata, stream.uniform()))
}

/// Deterministic core of [`stratum_uniform`] for a given `u`.
pub fn stratum_uniform_from(k: usize, strata: usize, u: f64) -> f64 {
    (k as f64 - u) / strata as f64
}

/// `n × d` matrix of Latin Hypercube standard normals, row-major.
#[derive(Debug, Clone)]
pub struct LhsMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl LhsMatrix {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }
}

/// Latin Hypercube sample of `n` standard-normal points in `d` dimensions:
/// every column places exactly one point in each of the `n` equiprobable
/// cells, with an independent random permutation per column.
pub fn lhs_normals(n: usize, d: usize, stream: &mut RandomStream) -> Result<LhsMatrix> {
    if n == 0 || d == 0 {
        return Err(Error::InvalidArgument(format!(
            "LHS needs n >= 1 and d >= 1, got n={n}, d={d}"
        )));
    }
    let mut data = vec![0.0; n * d];
    let mut perm: Vec<usize> = (0..n).collect();
    for j in 0..d {
        stream.shuffle(&mut perm);
        for (i, &cell) in perm.iter().enumerate() {
            let v = (cell as f64 + stream.uniform()) / n as f64;
            data[i * d + j] = lower_or_upper(v);
        }
    }
    Ok(LhsMatrix { rows: n, cols: d, data })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn cdf_reference_values() {
        assert_eq!(normal_cdf(0.0), 0.5);
        // Φ(1.959963984540054) = 0.975 to double precision.
        assert_abs_diff_eq!(normal_cdf(1.959_963_984_540_054), 0.975, epsilon = 1e-15);
        // Φ(1) = 0.841344746068542948585... (erf oracle, mpmath 30 digits)
        assert_abs_diff_eq!(normal_cdf(1.0), 0.841_344_746_068_542_9, epsilon = 1e-15);
        // Φ(−5) = 2.866515718791939e-7
        assert_abs_diff_eq!(normal_cdf(-5.0), 2.866_515_718_791_939e-7, epsilon = 1e-20);
        for i in 0..200 {
            let x = -7.0 + 0.07 * i as f64;
            assert_abs_diff_eq!(normal_cdf(x) + normal_cdf(-x), 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn cdf_strictly_increasing() {
        // beyond x ≈ 5 consecutive values are closer than an ulp of 1
        let mut prev = normal_cdf(-8.0);
        for i in 1..=13_000 {
            let x = -8.0 + i as f64 * 1e-3;
            let c = normal_cdf(x);
            assert!(c > prev, "not increasing at {x}");
            prev = c;
        }
    }

    #[test]
    fn inverse_reference_values() {
        assert_eq!(normal_inv_cdf(0.5).unwrap(), 0.0);
        assert_abs_diff_eq!(normal_inv_cdf(0.975).unwrap(), 1.959_964, epsilon = 1e-6);
        assert_abs_diff_eq!(
            normal_inv_cdf(0.975).unwrap(),
            1.959_963_984_540_054,
            epsilon = 1e-13
        );
        assert!(matches!(normal_inv_cdf(0.0), Err(Error::OutOfDomain(_))));
        assert!(matches!(normal_inv_cdf(1.0), Err(Error::OutOfDomain(_))));
        assert!(normal_inv_cdf(f64::NAN).is_err());
    }

    #[test]
    fn inverse_round_trips() {
        for i in 0..=1100 {
            let x = -6.0 + i as f64 * 0.01;
            assert_abs_diff_eq!(normal_inv_cdf(normal_cdf(x)).unwrap(), x, epsilon = 1e-9);
        }
        for k in 1..=9 {
            for p in [10f64.powi(-k), 0.5 - 10f64.powi(-k), 1.0 - 10f64.powi(-k)] {
                let x = normal_inv_cdf(p).unwrap();
                assert!((normal_cdf(x) - p).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn inverse_strictly_increasing() {
        let mut ps: Vec<f64> = (1..=9).map(|k| 10f64.powi(-k)).collect();
        ps.extend((1..1000).map(|i| i as f64 / 1000.0));
        ps.extend((1..=9).map(|k| 1.0 - 10f64.powi(-k)));
        ps.sort_by(f64::total_cmp);
        ps.dedup();
        let xs: Vec<f64> = ps.iter().map(|p| normal_inv_cdf(*p).unwrap()).collect();
        assert!(xs.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn truncated_draws_stay_inside() {
        let cases = [
            (f64::NEG_INFINITY, -3.0),
            (-1.0, 0.5),
            (2.0, f64::INFINITY),
            (8.0, 8.5),
            (-9.0, -8.9),
        ];
        let mut s = RandomStream::new(3, 0);
        for (lo, hi) in cases {
            for _ in 0..1000 {
                let (x, mass) = truncated_normal(lo, hi, s.uniform());
                assert!(x >= lo && x <= hi, "{x} not in [{lo}, {hi}]");
                assert!(mass > 0.0);
            }
        }
        let (_, mass) = truncated_normal(8.0, 8.5, 0.5);
        assert_abs_diff_eq!(mass, normal_sf(8.0) - normal_sf(8.5), epsilon = 1e-30);
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let mut a = RandomStream::new(7, 11);
        let mut b = RandomStream::new(7, 11);
        let mut c = RandomStream::new(7, 12);
        let xa: Vec<f64> = (0..16).map(|_| a.standard_normal()).collect();
        let xb: Vec<f64> = (0..16).map(|_| b.standard_normal()).collect();
        let xc: Vec<f64> = (0..16).map(|_| c.standard_normal()).collect();
        assert_eq!(xa, xb);
        assert_ne!(xa, xc);
        let s1 = RandomStream::new(7, 11).substream(3);
        let s2 = RandomStream::new(7, 11).substream(3);
        assert_eq!(s1.stream_id(), s2.stream_id());
        assert_ne!(s1.stream_id(), RandomStream::new(7, 11).substream(4).stream_id());
    }

    #[test]
    fn stratum_uniform_cases() {
        let mut s = RandomStream::new(1, 0);
        for _ in 0..100 {
            let v = stratum_uniform(1, 1, &mut s).unwrap();
            assert!(v > 0.0 && v < 1.0);
        }
        assert_eq!(stratum_uniform_from(3, 4, 0.5), 0.625);
        assert!(matches!(
            stratum_uniform(0, 4, &mut s),
            Err(Error::IndexOutOfRange { .. })
        ));
        assert!(stratum_uniform(5, 4, &mut s).is_err());

        let n = 100_000;
        let vals: Vec<f64> = (0..n).map(|_| stratum_uniform(1, 2, &mut s).unwrap()).collect();
        let mean = vals.iter().sum::<f64>() / n as f64;
        // V ~ U(0, 1/2): sd = 0.5/√12
        let se = 0.5 / 12f64.sqrt() / (n as f64).sqrt();
        assert!((mean - 0.25).abs() < 3.0 * se, "mean {mean}");
        assert!(vals.iter().all(|v| *v > 0.0 && *v < 0.5));
    }

    fn assert_one_per_cell(m: &LhsMatrix) {
        let n = m.rows();
        for j in 0..m.cols() {
            let mut seen = vec![false; n];
            for i in 0..n {
                let cell = (normal_cdf(m.get(i, j)) * n as f64).floor() as usize;
                assert!(!seen[cell], "cell {cell} hit twice in column {j}");
                seen[cell] = true;
            }
        }
    }

    #[test]
    fn lhs_marginals() {
        let mut s = RandomStream::new(5, 1);
        let m = lhs_normals(4, 1, &mut s).unwrap();
        assert_one_per_cell(&m);
        let m = lhs_normals(2, 2, &mut s).unwrap();
        assert_one_per_cell(&m);

        let n = 10_000;
        let m = lhs_normals(n, 3, &mut s).unwrap();
        assert_one_per_cell(&m);
        for j in 0..3 {
            let mean = (0..n).map(|i| m.get(i, j)).sum::<f64>() / n as f64;
            assert!(mean.abs() < 0.05);
        }
        assert!(lhs_normals(0, 3, &mut s).is_err());
    }
}
