//! Stratification directions: principal components, linear approximation
//! (gradient at zero noise) and the column-by-column linear transformation,
//! for the Black-Scholes basket and the CIR model.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::RandomStream;
use crate::linalg::{dot, gram_schmidt, norm, sign_normalize, symmetric_eigen, Matrix, SymmetricMatrix};
use crate::models::{BsModel, CirParams};
use crate::stratified::DirectionSet;

const GRADIENT_TOL: f64 = 1e-14;
const COLUMN_TOL: f64 = 1e-12;

/// Gradient of a smooth function of the driver vector.
pub trait GradientField {
    fn dim(&self) -> usize;
    fn gradient(&self, x: &[f64]) -> Vec<f64>;
}

impl GradientField for BsModel {
    fn dim(&self) -> usize {
        BsModel::dim(self)
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        self.basket_g_gradient(x)
    }
}

/// Average of the monitored Euler values, `h(Z) = mean_j S_j(Z)`.
#[derive(Debug, Clone, Copy)]
pub struct CirAverage<'a>(pub &'a CirParams);

impl GradientField for CirAverage<'_> {
    fn dim(&self) -> usize {
        self.0.steps
    }

    fn gradient(&self, z: &[f64]) -> Vec<f64> {
        let n = self.0.monitored_range().len() as f64;
        let w = vec![1.0 / n; self.0.steps];
        cir_weighted_gradient(self.0, z, &w)
    }
}

impl CirAverage<'_> {
    pub fn value(&self, z: &[f64]) -> f64 {
        let (nodes, _) = self.0.euler_nodes(z);
        let r = self.0.monitored_range();
        nodes[r.clone()].iter().sum::<f64>() / r.len() as f64
    }
}

/// Gradient of `Σ_j c_j S_j` over the monitored nodes by a backward sweep
/// through the Euler recursion (floored square root included).
pub fn cir_weighted_gradient(params: &CirParams, z: &[f64], c: &[f64]) -> Vec<f64> {
    let (nodes, _) = params.euler_nodes(z);
    let n = params.steps;
    let dt = params.dt();
    let mut direct = vec![0.0; n + 1];
    for (j, cj) in params.monitored_range().zip(c) {
        direct[j] = *cj;
    }
    let mut grad = vec![0.0; n];
    // lambda = total derivative of the objective with respect to S_j
    let mut lambda = direct[n];
    for j in (1..=n).rev() {
        let prev = nodes[j - 1];
        let root = (prev.max(0.0) * dt).sqrt();
        grad[j - 1] = lambda * params.sigma * root;
        let mut ds = 1.0 - params.alpha * dt;
        if prev > 0.0 {
            ds += 0.5 * params.sigma * z[j - 1] * (dt / prev).sqrt();
        }
        lambda = direct[j - 1] + lambda * ds;
    }
    grad
}

fn unit_direction(mut g: Vec<f64>) -> Result<Vec<f64>> {
    let n = norm(&g);
    if !(n >= GRADIENT_TOL) {
        return Err(Error::DegenerateGradient { norm: n });
    }
    g.iter_mut().for_each(|x| *x /= n);
    sign_normalize(&mut g);
    Ok(g)
}

/// Leading `m` eigenvectors of `sigma` and the share of the trace they carry.
pub fn pca_directions(sigma: &SymmetricMatrix, m: usize) -> Result<(DirectionSet, f64)> {
    if m == 0 || m > sigma.dim() {
        return Err(Error::InvalidArgument(format!(
            "cannot take {m} components of a {}-dimensional matrix",
            sigma.dim()
        )));
    }
    let eig = symmetric_eigen(sigma)?;
    let total: f64 = eig.eigenvalues.iter().sum();
    let explained = eig.eigenvalues[..m].iter().sum::<f64>() / total;
    let set = DirectionSet::orthogonal((0..m).map(|i| eig.vector(i)).collect())?;
    Ok((set, explained))
}

/// Normalized gradient at zero noise.
pub fn la_direction(field: &dyn GradientField) -> Result<Vec<f64>> {
    unit_direction(field.gradient(&vec![0.0; field.dim()]))
}

/// `∇g(0) = Cᵀu`, `u_k = e^{μ_k}`, normalized.
pub fn la_direction_bs(model: &BsModel) -> Result<Vec<f64>> {
    la_direction(model)
}

/// Normalized gradient of the monitored average at zero noise.
pub fn la_direction_cir(params: &CirParams) -> Result<Vec<f64>> {
    params.check_feller()?;
    la_direction(&CirAverage(params))
}

/// Gradients along the sequence `x_1 = 0`, `x_{l+1} = v_l`, where `v_l` is
/// the normalized gradient at `x_l`. The directions are left as they are,
/// not orthogonalized.
pub fn la_directions_multi(field: &dyn GradientField, count: usize) -> Result<DirectionSet> {
    let mut point = vec![0.0; field.dim()];
    let mut dirs: Vec<Vec<f64>> = Vec::with_capacity(count);
    for l in 0..count {
        let v = unit_direction(field.gradient(&point))?;
        dirs.push(v.clone());
        if gram_schmidt(&dirs).is_err() {
            return Err(Error::DependentDirections { index: l });
        }
        point = v;
    }
    DirectionSet::general(dirs)
}

// Removes the span of `columns` from `v` (two passes) and normalizes.
fn orthonormal_residual(v: &[f64], columns: &[Vec<f64>], column: usize) -> Result<Vec<f64>> {
    let scale = norm(v);
    let mut r = v.to_vec();
    for _ in 0..2 {
        for a in columns {
            let c = dot(&r, a);
            r.iter_mut().zip(a).for_each(|(x, y)| *x -= c * y);
        }
    }
    let n = norm(&r);
    if !(n >= COLUMN_TOL * scale) || n == 0.0 {
        return Err(Error::DegenerateColumn { column });
    }
    r.iter_mut().for_each(|x| *x /= n);
    Ok(r)
}

/// Intermediate quantities of the Black-Scholes linear transformation.
#[derive(Debug, Clone)]
pub struct LtBsWorkspace {
    /// `u^(p)_i = exp(μ_i + Σ_{k<p} (C A_k)_i)` for each step.
    pub u: Vec<Vec<f64>>,
    /// `B^(p) = Cᵀ u^(p)`
    pub b: Vec<Vec<f64>>,
    pub columns: Vec<Vec<f64>>,
    /// `Σ_k (C A_k)_i` over all fixed columns.
    pub partial: Vec<f64>,
}

pub fn lt_bs_workspace(model: &BsModel, p: usize) -> Result<LtBsWorkspace> {
    let d = model.dim();
    if p == 0 || p > d {
        return Err(Error::InvalidArgument(format!("column count {p} outside 1..={d}")));
    }
    let mut ws = LtBsWorkspace {
        u: Vec::with_capacity(p),
        b: Vec::with_capacity(p),
        columns: Vec::with_capacity(p),
        partial: vec![0.0; d],
    };
    for step in 0..p {
        let u: Vec<f64> = model.mu().iter().zip(&ws.partial).map(|(m, c)| (m + c).exp()).collect();
        let b = model.factor().tr_mul_vec(&u);
        let a = orthonormal_residual(&b, &ws.columns, step)?;
        model
            .factor()
            .mul_vec(&a)
            .iter()
            .zip(ws.partial.iter_mut())
            .for_each(|(ca, s)| *s += ca);
        ws.u.push(u);
        ws.b.push(b);
        ws.columns.push(a);
    }
    Ok(ws)
}

/// First `p` columns of the linear transformation for the Black-Scholes basket.
pub fn lt_directions_bs(model: &BsModel, p: usize) -> Result<DirectionSet> {
    DirectionSet::orthogonal(lt_bs_workspace(model, p)?.columns)
}

/// Coefficients of one CIR linear-transformation step, evaluated on the path
/// driven by `Z = A ε̂_l`.
#[derive(Debug, Clone)]
pub struct LtCirStep {
    /// Euler nodes `S_0 … S_N` at the expansion point.
    pub path: Vec<f64>,
    /// `α_j = 1 − αΔt + (σ/2)√(Δt/S_j) Z_{j+1}`, `j = 0 … N−1`.
    pub alpha: Vec<f64>,
    /// `β_j = σ√(Δt S_j)`, `j = 0 … N−1`.
    pub beta: Vec<f64>,
    /// `weights[m−1][j−1] = w_m(j) = ∂S_j/∂Z_m` for `m ≤ j`, zero above.
    pub weights: Vec<Vec<f64>>,
    /// `t_j = β_{j−1}(1 + Σ_{l=j}^{N−1} ∏_{i=j}^{l} α_i)`, `j = 1 … N`.
    pub t: Vec<f64>,
    /// `p_j = Σ_m w_m(j) A_m` with `A` the resulting column.
    pub partials: Vec<f64>,
    pub column: Vec<f64>,
}

impl LtCirStep {
    /// `t_N = β_{N−1}` and `w_m(j+1) = α_j w_m(j)`, both bit-exact.
    pub fn invariants_hold(&self) -> bool {
        let n = self.t.len();
        let last = self.t[n - 1] == self.beta[n - 1];
        let chain = (0..n).all(|m| (m + 1..n).all(|j| self.weights[m][j] == self.alpha[j] * self.weights[m][j - 1]));
        last && chain
    }
}

#[derive(Debug, Clone)]
pub struct LtCirWorkspace {
    /// Closed-form zero-noise path `S_j(0)`, `j = 0 … N`.
    pub zero_noise: Vec<f64>,
    pub steps: Vec<LtCirStep>,
}

impl LtCirWorkspace {
    pub fn columns(&self) -> Vec<Vec<f64>> {
        self.steps.iter().map(|s| s.column.clone()).collect()
    }
}

pub fn lt_cir_workspace(params: &CirParams, p: usize) -> Result<LtCirWorkspace> {
    params.check_feller()?;
    lt_cir_unchecked(params, p)
}

fn lt_cir_unchecked(params: &CirParams, p: usize) -> Result<LtCirWorkspace> {
    let n = params.steps;
    if p == 0 || p > n {
        return Err(Error::InvalidArgument(format!("column count {p} outside 1..={n}")));
    }
    let dt = params.dt();
    let zero_noise = params.zero_noise_path();
    let mut steps: Vec<LtCirStep> = Vec::with_capacity(p);
    let mut z = vec![0.0; n];
    for l in 0..p {
        let path = if l == 0 {
            zero_noise.clone()
        } else {
            params.euler_nodes(&z).0
        };
        if let Some(j) = path[..n].iter().position(|s| !(*s > 0.0)) {
            return Err(Error::NegativePathValue { step: j, value: path[j] });
        }
        let alpha: Vec<f64> = (0..n)
            .map(|j| 1.0 - params.alpha * dt + 0.5 * params.sigma * (dt / path[j]).sqrt() * z[j])
            .collect();
        let beta: Vec<f64> = (0..n).map(|j| params.sigma * (dt * path[j]).sqrt()).collect();

        let mut weights = vec![vec![0.0; n]; n];
        for m in 0..n {
            weights[m][m] = beta[m];
            for j in m + 1..n {
                weights[m][j] = alpha[j] * weights[m][j - 1];
            }
        }
        let mut t = vec![0.0; n];
        let mut tail = 1.0;
        for j in (0..n).rev() {
            t[j] = beta[j] * tail;
            tail = 1.0 + alpha[j] * tail;
        }

        let previous: Vec<Vec<f64>> = steps.iter().map(|s| s.column.clone()).collect();
        let column = orthonormal_residual(&t, &previous, l)?;
        let partials = (0..n)
            .map(|j| (0..=j).map(|m| weights[m][j] * column[m]).sum())
            .collect();
        z.iter_mut().zip(&column).for_each(|(zi, a)| *zi += a);
        let step = LtCirStep {
            path,
            alpha,
            beta,
            weights,
            t,
            partials,
            column,
        };
        debug_assert!(step.invariants_hold());
        steps.push(step);
    }
    Ok(LtCirWorkspace { zero_noise, steps })
}

/// First `p` columns of the CIR linear transformation.
pub fn lt_directions_cir(params: &CirParams, p: usize) -> Result<DirectionSet> {
    DirectionSet::orthogonal(lt_cir_workspace(params, p)?.columns())
}

/// How a price-space eigenvector becomes a direction for the driving noise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum PcaMapping {
    /// The eigenvector is used as the noise direction as it stands.
    #[default]
    Direct,
    /// `Jᵀw` normalized, with `J_{ji} = ∂S_j/∂Z_i` at zero noise.
    Pullback,
}

/// Sample covariance of the monitored CIR path over `pilot_n` simulated paths.
pub fn pilot_covariance(params: &CirParams, pilot_n: usize, stream: &mut RandomStream) -> Result<SymmetricMatrix> {
    if pilot_n < 2 {
        return Err(Error::InvalidArgument("pilot needs at least 2 paths".into()));
    }
    let n = params.steps;
    let range = params.monitored_range();
    let mut z = vec![0.0; n];
    let mut paths = Vec::with_capacity(pilot_n);
    for _ in 0..pilot_n {
        stream.fill_normal(&mut z);
        paths.push(params.euler_nodes(&z).0[range.clone()].to_vec());
    }
    let mut mean = vec![0.0; n];
    for p in &paths {
        mean.iter_mut().zip(p).for_each(|(m, x)| *m += x);
    }
    mean.iter_mut().for_each(|m| *m /= pilot_n as f64);
    let mut cov = Matrix::zeros(n, n);
    for p in &paths {
        for i in 0..n {
            let di = p[i] - mean[i];
            for j in 0..=i {
                cov[(i, j)] += di * (p[j] - mean[j]);
            }
        }
    }
    let scale = 1.0 / (pilot_n - 1) as f64;
    let full = Matrix::from_fn(n, n, |i, j| scale * if j <= i { cov[(i, j)] } else { cov[(j, i)] });
    SymmetricMatrix::new(full)
}

/// Leading `m` principal directions of the simulated price path, mapped to
/// the driving noise according to `mapping`.
pub fn pilot_pca_cir(
    params: &CirParams,
    pilot_n: usize,
    m: usize,
    mapping: PcaMapping,
    stream: &mut RandomStream,
) -> Result<DirectionSet> {
    let cov = pilot_covariance(params, pilot_n, stream)?;
    let level: f64 = (0..params.steps).map(|j| params.zero_noise_path()[j].powi(2)).sum();
    if !(cov.trace() > 1e-20 * level) {
        return Err(Error::DegenerateCovariance);
    }
    let (set, _) = pca_directions(&cov, m)?;
    match mapping {
        PcaMapping::Direct => Ok(set),
        PcaMapping::Pullback => {
            let zero = vec![0.0; params.steps];
            let dirs = set
                .columns()
                .iter()
                .map(|w| unit_direction(cir_weighted_gradient(params, &zero, w)))
                .collect::<Result<Vec<_>>>()?;
            DirectionSet::general(dirs)
        }
    }
}

/// Plain-text export: one value per line with 17 significant digits,
/// columns separated by a blank line.
pub fn export_directions(set: &DirectionSet) -> String {
    let mut out = String::new();
    for (i, c) in set.columns().iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        for x in c {
            let _ = writeln!(out, "{x:.16e}");
        }
    }
    out
}
