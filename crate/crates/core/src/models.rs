//! Maps standard-normal driver vectors to asset-price paths.
//!
//! Black-Scholes paths are sampled exactly at the grid nodes through the
//! Cholesky factor of `Σ_B ⊗ Σ_A`; CIR paths use the Euler scheme with the
//! square-root argument floored at zero.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{bm_covariance, cholesky, kronecker, LowerTriangular, Matrix, SymmetricMatrix};

/// Strictly increasing, strictly positive monitoring times.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid(Vec<f64>);

impl TimeGrid {
    pub fn new(times: Vec<f64>) -> Result<Self> {
        for (i, t) in times.iter().enumerate() {
            let prev = if i == 0 { 0.0 } else { times[i - 1] };
            if !(*t > prev) || !t.is_finite() {
                return Err(Error::NonIncreasingGrid { index: i });
            }
        }
        if times.is_empty() {
            return Err(Error::InvalidArgument("empty time grid".into()));
        }
        Ok(Self(times))
    }

    /// `t_i = i·T/N`, `i = 1..=N`.
    pub fn regular(steps: usize, maturity: f64) -> Result<Self> {
        Self::new((1..=steps).map(|i| i as f64 * maturity / steps as f64).collect())
    }

    pub fn times(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn maturity(&self) -> f64 {
        *self.0.last().expect("grid is non-empty")
    }
}

/// Index `k` (0-based, `0..M·N`) of asset `asset` at time index `time`.
///
/// 1-based this reads `k₁ = (k−1) mod M + 1`, `k₂ = ⌊(k−1)/M⌋ + 1`.
pub fn node_index(assets: usize, asset: usize, time: usize) -> usize {
    time * assets + asset
}

/// Inverse of [`node_index`]: `(asset, time)`.
pub fn node_position(assets: usize, k: usize) -> (usize, usize) {
    (k % assets, k / assets)
}

/// Multi-asset Black-Scholes market observed on a time grid.
#[derive(Debug, Clone)]
pub struct BsParams {
    pub spots: Vec<f64>,
    pub vols: Vec<f64>,
    pub correlation: SymmetricMatrix,
    pub rate: f64,
    pub grid: TimeGrid,
    /// Averaging weights `w_ij` laid out in node order (see [`node_index`]).
    pub weights: Vec<f64>,
}

impl BsParams {
    pub fn new(
        spots: Vec<f64>,
        vols: Vec<f64>,
        correlation: SymmetricMatrix,
        rate: f64,
        grid: TimeGrid,
        weights: Vec<f64>,
    ) -> Result<Self> {
        let m = spots.len();
        if m == 0 || vols.len() != m || correlation.dim() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: vols.len().max(correlation.dim()),
            });
        }
        if weights.len() != m * grid.len() {
            return Err(Error::DimensionMismatch {
                expected: m * grid.len(),
                got: weights.len(),
            });
        }
        if vols.iter().any(|s| !(*s > 0.0)) {
            return Err(Error::InvalidArgument("volatilities must be positive".into()));
        }
        if spots.iter().any(|s| !(*s > 0.0)) {
            return Err(Error::InvalidArgument("spot prices must be positive".into()));
        }
        if (0..m).any(|i| correlation[(i, i)] != 1.0) {
            return Err(Error::InvalidArgument(
                "correlation matrix must have unit diagonal".into(),
            ));
        }
        if weights.iter().any(|w| *w < 0.0) {
            return Err(Error::InvalidArgument("weights must be non-negative".into()));
        }
        Ok(Self {
            spots,
            vols,
            correlation,
            rate,
            grid,
            weights,
        })
    }

    /// Single asset averaged with equal weights over a regular grid.
    pub fn asian(spot: f64, vol: f64, rate: f64, steps: usize, maturity: f64) -> Result<Self> {
        Self::new(
            vec![spot],
            vec![vol],
            SymmetricMatrix::identity(1),
            rate,
            TimeGrid::regular(steps, maturity)?,
            vec![1.0 / steps as f64; steps],
        )
    }

    /// Equally weighted basket observed once at maturity, with a constant
    /// pairwise correlation.
    pub fn basket(
        spots: Vec<f64>,
        vols: Vec<f64>,
        correlation: f64,
        rate: f64,
        maturity: f64,
    ) -> Result<Self> {
        let m = spots.len();
        let corr = SymmetricMatrix::new(Matrix::from_fn(m, m, |i, j| {
            if i == j {
                1.0
            } else {
                correlation
            }
        }))?;
        Self::new(
            spots,
            vols,
            corr,
            rate,
            TimeGrid::regular(1, maturity)?,
            vec![1.0 / m as f64; m],
        )
    }

    pub fn assets(&self) -> usize {
        self.spots.len()
    }

    pub fn steps(&self) -> usize {
        self.grid.len()
    }

    pub fn maturity(&self) -> f64 {
        self.grid.maturity()
    }

    /// `Σ_A` with entries `σ_i ρ_im σ_m`.
    pub fn asset_covariance(&self) -> Result<SymmetricMatrix> {
        let m = self.assets();
        SymmetricMatrix::new(Matrix::from_fn(m, m, |i, k| {
            if i <= k {
                self.vols[i] * self.correlation[(i, k)] * self.vols[k]
            } else {
                self.vols[k] * self.correlation[(k, i)] * self.vols[i]
            }
        }))
    }
}

/// Black-Scholes path generator with its precomputed covariance factor.
#[derive(Debug, Clone)]
pub struct BsModel {
    params: BsParams,
    covariance: SymmetricMatrix,
    factor: LowerTriangular,
    /// `ln S_{k₁}(0) + (r − σ_{k₁}²/2) t_{k₂}`
    log_drift: Vec<f64>,
    /// `ln(w_{k₁k₂}) + log_drift`
    mu: Vec<f64>,
}

impl BsModel {
    pub fn new(params: BsParams) -> Result<Self> {
        let covariance = kronecker(&bm_covariance(params.grid.times())?, &params.asset_covariance()?);
        let factor = cholesky(&covariance)?;
        let m = params.assets();
        let dim = m * params.steps();
        let log_drift: Vec<f64> = (0..dim)
            .map(|k| {
                let (i, j) = node_position(m, k);
                let s = params.vols[i];
                params.spots[i].ln() + (params.rate - 0.5 * s * s) * params.grid.times()[j]
            })
            .collect();
        let mu = log_drift
            .iter()
            .zip(&params.weights)
            .map(|(d, w)| w.ln() + d)
            .collect();
        Ok(Self {
            params,
            covariance,
            factor,
            log_drift,
            mu,
        })
    }

    pub fn params(&self) -> &BsParams {
        &self.params
    }

    /// Driver dimension `M·N`.
    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    /// `Σ_MN = Σ_B ⊗ Σ_A`
    pub fn covariance(&self) -> &SymmetricMatrix {
        &self.covariance
    }

    pub fn factor(&self) -> &LowerTriangular {
        &self.factor
    }

    /// `μ_k = ln(w_{k₁k₂} S_{k₁}(0)) + (r − σ_{k₁}²/2) t_{k₂}`
    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    /// Weighted sum `g(ε) = Σ_k exp(μ_k + (C ε)_k)`.
    pub fn basket_g(&self, eps: &[f64]) -> f64 {
        self.factor
            .mul_vec(eps)
            .iter()
            .zip(&self.mu)
            .map(|(x, m)| (m + x).exp())
            .sum()
    }

    /// `∇g(ε) = Cᵀ u` with `u_k = exp(μ_k + (C ε)_k)`.
    pub fn basket_g_gradient(&self, eps: &[f64]) -> Vec<f64> {
        let u: Vec<f64> = self
            .factor
            .mul_vec(eps)
            .iter()
            .zip(&self.mu)
            .map(|(x, m)| (m + x).exp())
            .collect();
        self.factor.tr_mul_vec(&u)
    }

    pub fn path(&self, eps: &[f64]) -> PathMatrix {
        let values = self
            .factor
            .mul_vec(eps)
            .iter()
            .zip(&self.log_drift)
            .map(|(x, d)| (d + x).exp())
            .collect();
        PathMatrix {
            assets: self.params.assets(),
            values,
            floored: false,
        }
    }
}

/// Prices at the monitoring nodes, in node order (time-major, asset-minor).
#[derive(Debug, Clone, PartialEq)]
pub struct PathMatrix {
    pub assets: usize,
    pub values: Vec<f64>,
    /// Set when an Euler step had to floor a negative square-root argument.
    pub floored: bool,
}

impl PathMatrix {
    pub fn single_asset(values: Vec<f64>) -> Self {
        Self {
            assets: 1,
            values,
            floored: false,
        }
    }

    pub fn steps(&self) -> usize {
        self.values.len() / self.assets
    }

    pub fn get(&self, asset: usize, time: usize) -> f64 {
        self.values[node_index(self.assets, asset, time)]
    }
}

/// Which Euler nodes a CIR path reports as monitoring values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Monitoring {
    /// `S_1, …, S_N`: the value at the end of every step.
    #[default]
    EndOfStep,
    /// `S_0, …, S_{N−1}`: the value at the start of every step.
    StartOfStep,
}

/// Square-root diffusion `dS = α(μ − S)dt + σ√S dW`, Euler-discretized.
#[derive(Debug, Clone, PartialEq)]
pub struct CirParams {
    pub s0: f64,
    pub alpha: f64,
    pub mu: f64,
    pub sigma: f64,
    pub rate: f64,
    pub steps: usize,
    pub maturity: f64,
    pub monitoring: Monitoring,
}

impl CirParams {
    /// Validated constructor: positive parameters and `2αμ > σ²`.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        s0: f64,
        alpha: f64,
        mu: f64,
        sigma: f64,
        rate: f64,
        steps: usize,
        maturity: f64,
        monitoring: Monitoring,
    ) -> Result<Self> {
        let p = Self {
            s0,
            alpha,
            mu,
            sigma,
            rate,
            steps,
            maturity,
            monitoring,
        };
        if [s0, alpha, mu, sigma, maturity].iter().any(|x| !(*x > 0.0)) || steps == 0 {
            return Err(Error::InvalidArgument(
                "CIR parameters S0, alpha, mu, sigma, T and N must be positive".into(),
            ));
        }
        p.check_feller()?;
        Ok(p)
    }

    pub fn check_feller(&self) -> Result<()> {
        let lhs = 2.0 * self.alpha * self.mu;
        let rhs = self.sigma * self.sigma;
        if lhs > rhs {
            Ok(())
        } else {
            Err(Error::InvalidFeller { lhs, rhs })
        }
    }

    pub fn dt(&self) -> f64 {
        self.maturity / self.steps as f64
    }

    /// Zero-noise path `S_j = (1 − αΔt)^j (S_0 − μ) + μ`, `j = 0..=N`.
    pub fn zero_noise_path(&self) -> Vec<f64> {
        let decay = 1.0 - self.alpha * self.dt();
        (0..=self.steps)
            .map(|j| decay.powi(j as i32) * (self.s0 - self.mu) + self.mu)
            .collect()
    }

    /// Euler nodes `S_0, …, S_N` and whether any square-root argument was floored.
    pub fn euler_nodes(&self, z: &[f64]) -> (Vec<f64>, bool) {
        let dt = self.dt();
        let mut nodes = Vec::with_capacity(self.steps + 1);
        let mut s = self.s0;
        let mut floored = false;
        nodes.push(s);
        for zj in z.iter().take(self.steps) {
            if s < 0.0 {
                floored = true;
            }
            s = s + self.alpha * (self.mu - s) * dt + self.sigma * (s.max(0.0) * dt).sqrt() * zj;
            nodes.push(s);
        }
        (nodes, floored)
    }

    /// Range of [`Self::euler_nodes`] indices that are monitored.
    pub fn monitored_range(&self) -> std::ops::Range<usize> {
        match self.monitoring {
            Monitoring::EndOfStep => 1..self.steps + 1,
            Monitoring::StartOfStep => 0..self.steps,
        }
    }
}

/// Euler path of the CIR model restricted to the monitored nodes.
pub fn cir_euler_path(z: &[f64], params: &CirParams) -> Result<PathMatrix> {
    if z.len() != params.steps {
        return Err(Error::DimensionMismatch {
            expected: params.steps,
            got: z.len(),
        });
    }
    let (nodes, floored) = params.euler_nodes(z);
    Ok(PathMatrix {
        assets: 1,
        values: nodes[params.monitored_range()].to_vec(),
        floored,
    })
}
