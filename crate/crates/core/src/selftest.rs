//! Acceptance checks at desk scale, one function per criterion.

use std::f64::consts::FRAC_1_SQRT_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::directions::{
    la_direction_bs, la_direction_cir, lt_cir_workspace, lt_directions_bs, lt_directions_cir, pca_directions,
    CirAverage, GradientField,
};
use crate::error::Result;
use crate::experiment::{run_experiment, to_csv, ExperimentConfig, Model, PricingProblem};
use crate::gaussian::RandomStream;
use crate::linalg::{angle_degrees, dot, norm, normalized};
use crate::models::{BsModel, CirParams};
use crate::payoffs::{PayoffKind, PayoffSpec};
use crate::presets;
use crate::stratified::{
    optimal_allocation, plain_mc_estimate, proportional_allocation, sample_stratum_1d, sample_stratum_orthogonal,
    theoretical_variance, DirectionSet, NonOrthogonalSampler, StratumSpec,
};

/// Result of one acceptance criterion.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl std::fmt::Display for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "[{tag}] criterion {:>2} {}: {}", self.id, self.name, self.detail)
    }
}

pub const CRITERIA: [(u32, &str); 10] = [
    (1, "sampler correctness"),
    (2, "non-orthogonal oracle equivalence"),
    (3, "LA equals LT first direction"),
    (4, "angle reproduction"),
    (5, "price reproduction"),
    (6, "variance-reduction ordering"),
    (7, "allocation optimality"),
    (8, "direction-engine invariants"),
    (9, "determinism across thread counts"),
    (10, "barrier monotonicity"),
];

pub fn run(id: u32) -> Result<Outcome> {
    let name = CRITERIA
        .iter()
        .find(|c| c.0 == id)
        .map(|c| c.1)
        .unwrap_or("unknown criterion");
    let (passed, detail) = match id {
        1 => sampler_correctness()?,
        2 => nonorthogonal_oracle()?,
        3 => la_equals_lt()?,
        4 => angle_reproduction()?,
        5 => price_reproduction()?,
        6 => variance_ordering()?,
        7 => allocation_optimality()?,
        8 => direction_invariants()?,
        9 => determinism()?,
        10 => barrier_monotonicity()?,
        _ => (false, format!("no criterion {id}")),
    };
    Ok(Outcome { id, name, passed, detail })
}

/// Runs every criterion; numerical failures count as failed criteria.
pub fn run_all() -> Vec<Outcome> {
    CRITERIA
        .iter()
        .map(|(id, name)| {
            run(*id).unwrap_or_else(|e| Outcome {
                id: *id,
                name,
                passed: false,
                detail: format!("error: {e}"),
            })
        })
        .collect()
}

type Check = Result<(bool, String)>;

fn random_unit(d: usize, stream: &mut RandomStream) -> Vec<f64> {
    let mut v = vec![0.0; d];
    stream.fill_normal(&mut v);
    normalized(&v).expect("nonzero draw")
}

fn within(x: f64, lo: f64, hi: f64, tol: f64) -> bool {
    x >= lo - tol * lo.abs().max(1.0) && x <= hi + tol * hi.abs().max(1.0)
}

fn sampler_correctness() -> Check {
    let mut stream = RandomStream::new(101, 0);
    let d = 8;
    let strata = 10;
    let v = random_unit(d, &mut stream);
    let spec1 = StratumSpec::new(vec![strata])?;
    let n = 100_000;
    let mut violations = 0usize;
    let mut resid_cov = vec![0.0; d * d];
    let mut pooled = vec![0.0; d * d];
    for i in 0..n {
        let k = i % strata + 1;
        let draw = sample_stratum_1d(&v, k, strata, &mut stream)?;
        let (lo, hi) = spec1.bounds(0, k);
        if !within(dot(&v, &draw.z), lo, hi, 1e-12) {
            violations += 1;
        }
        let p = dot(&v, &draw.z);
        let r: Vec<f64> = draw.z.iter().zip(&v).map(|(z, vi)| z - p * vi).collect();
        for a in 0..d {
            for b in 0..d {
                resid_cov[a * d + b] += r[a] * r[b] / n as f64;
                pooled[a * d + b] += draw.z[a] * draw.z[b] / n as f64;
            }
        }
    }
    let mut resid_dev: f64 = 0.0;
    let mut pooled_dev: f64 = 0.0;
    for a in 0..d {
        for b in 0..d {
            let id = if a == b { 1.0 } else { 0.0 };
            resid_dev = resid_dev.max((resid_cov[a * d + b] - (id - v[a] * v[b])).abs());
            pooled_dev = pooled_dev.max((pooled[a * d + b] - id).abs());
        }
    }

    // two orthogonal directions in R^4
    let e1 = random_unit(4, &mut stream);
    let raw = random_unit(4, &mut stream);
    let c = dot(&raw, &e1);
    let e2 = normalized(&raw.iter().zip(&e1).map(|(r, e)| r - c * e).collect::<Vec<_>>())?;
    let dirs = DirectionSet::orthogonal(vec![e1, e2])?;
    let spec2 = StratumSpec::new(vec![4, 5])?;
    for i in 0..n {
        let k = spec2.multi_index(i % spec2.total());
        let draw = sample_stratum_orthogonal(&dirs, &k, &spec2, &mut stream)?;
        for (j, col) in dirs.columns().iter().enumerate() {
            let (lo, hi) = spec2.bounds(j, k[j]);
            if !within(dot(col, &draw.z), lo, hi, 1e-12) {
                violations += 1;
            }
        }
    }

    // non-orthogonal pair at 45 degrees in R^3
    let dirs = DirectionSet::general(vec![vec![1.0, 0.0, 0.0], vec![FRAC_1_SQRT_2, FRAC_1_SQRT_2, 0.0]])?;
    let sampler = NonOrthogonalSampler::new(dirs.clone())?;
    let spec3 = StratumSpec::new(vec![4, 4])?;
    let mut empty = 0usize;
    for i in 0..n {
        let k = spec3.multi_index(i % spec3.total());
        match sampler.sample(&k, &spec3, &mut stream) {
            Ok(draw) => {
                if !(draw.weight > 0.0 && draw.weight <= 1.0) {
                    violations += 1;
                }
                for (j, col) in dirs.columns().iter().enumerate() {
                    let (lo, hi) = spec3.bounds(j, k[j]);
                    if !within(dot(col, &draw.z), lo, hi, 1e-12) {
                        violations += 1;
                    }
                }
            }
            Err(crate::Error::EmptyBoundInterval { .. }) => empty += 1,
            Err(e) => return Err(e),
        }
    }
    let passed = violations == 0 && resid_dev <= 0.02 && pooled_dev <= 0.02;
    Ok((
        passed,
        format!(
            "constraint violations {violations}, empty-interval draws {empty}, \
             max |cov(residual) - (I - vv')| = {resid_dev:.4}, max |cov(z) - I| = {pooled_dev:.4} (tol 0.02)"
        ),
    ))
}

struct MeanSe {
    mean: f64,
    se: f64,
}

fn mean_se(values: &[f64]) -> MeanSe {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    MeanSe {
        mean,
        se: (var / n).sqrt(),
    }
}

fn agree(a: &MeanSe, b: &MeanSe) -> (bool, f64) {
    let z = (a.mean - b.mean).abs() / (a.se * a.se + b.se * b.se).sqrt();
    (z <= 3.0 || a.mean == b.mean, z)
}

fn nonorthogonal_oracle() -> Check {
    let e1 = vec![1.0, 0.0, 0.0];
    let e2 = vec![FRAC_1_SQRT_2, FRAC_1_SQRT_2, 0.0];
    let dirs = DirectionSet::general(vec![e1.clone(), e2.clone()])?;
    let sampler = NonOrthogonalSampler::new(dirs)?;
    let spec = StratumSpec::new(vec![4, 4])?;
    let g1 = |z: &[f64]| z[0];
    let g2 = |z: &[f64]| (z[0] + z[1]).exp();

    // rejection oracle: unconditional draws sorted into strata
    let n_oracle = 1_000_000;
    let mut oracle_stream = RandomStream::new(202, 1);
    let mut members = vec![Vec::new(); spec.total()];
    let mut z = vec![0.0; 3];
    let locate = |p: f64, count: usize| -> usize {
        (1..=count)
            .find(|k| {
                let (lo, hi) = spec.bounds(0, *k);
                let _ = hi;
                p >= lo && (p < spec.bounds(0, *k).1 || *k == count)
            })
            .unwrap_or(count)
    };
    for _ in 0..n_oracle {
        oracle_stream.fill_normal(&mut z);
        let k1 = locate(dot(&e1, &z), 4);
        let k2 = locate(dot(&e2, &z), 4);
        members[spec.flat_index(&[k1, k2])?].push(z.clone());
    }

    let n_draws = 20_000;
    let mut stream = RandomStream::new(202, 2);
    let mut worst: f64 = 0.0;
    let mut failures = 0;
    let mut comparisons = 0;
    for (flat, inside) in members.iter().enumerate() {
        let k = spec.multi_index(flat);
        let (mut w, mut wg1, mut wg2) = (Vec::new(), Vec::new(), Vec::new());
        for _ in 0..n_draws {
            match sampler.sample(&k, &spec, &mut stream) {
                Ok(d) => {
                    w.push(d.weight);
                    wg1.push(d.weight * g1(&d.z));
                    wg2.push(d.weight * g2(&d.z));
                }
                Err(crate::Error::EmptyBoundInterval { .. }) => {
                    w.push(0.0);
                    wg1.push(0.0);
                    wg2.push(0.0);
                }
                Err(e) => return Err(e),
            }
        }
        // oracle estimates of E[1_k], E[g 1_k] over all unconditional draws
        let indicator = |f: &dyn Fn(&[f64]) -> f64| -> MeanSe {
            let n = n_oracle as f64;
            let s: f64 = inside.iter().map(|z| f(z)).sum();
            let s2: f64 = inside.iter().map(|z| f(z).powi(2)).sum();
            let mean = s / n;
            MeanSe {
                mean,
                se: ((s2 / n - mean * mean) / (n - 1.0)).max(0.0).sqrt(),
            }
        };
        let pairs = [
            (mean_se(&w), indicator(&|_| 1.0)),
            (mean_se(&wg1), indicator(&g1)),
            (mean_se(&wg2), indicator(&g2)),
        ];
        for (a, b) in pairs {
            let (ok, z) = agree(&a, &b);
            comparisons += 1;
            worst = worst.max(z);
            if !ok {
                failures += 1;
            }
        }
    }

    // orthant: both projections positive
    let dirs = DirectionSet::general(vec![vec![1.0, 0.0], vec![FRAC_1_SQRT_2, FRAC_1_SQRT_2]])?;
    let sampler = NonOrthogonalSampler::new(dirs)?;
    let spec = StratumSpec::new(vec![2, 2])?;
    let weights: Vec<f64> = (0..100_000)
        .map(|_| sampler.sample(&[2, 2], &spec, &mut stream).map(|d| d.weight))
        .collect::<Result<_>>()?;
    let orthant = mean_se(&weights);
    let orthant_ok = (orthant.mean - 0.375).abs() <= 3.0 * orthant.se;

    Ok((
        failures == 0 && orthant_ok,
        format!(
            "{failures}/{comparisons} stratum comparisons beyond 3 combined SE (largest {worst:.2} SE); \
             orthant mean weight {:.5} ± {:.5} vs 0.375",
            orthant.mean, orthant.se
        ),
    ))
}

fn la_equals_lt() -> Check {
    let mut detail = Vec::new();
    let mut passed = true;
    for (name, params) in [("asian", presets::asian_bs()), ("basket", presets::basket_bs())] {
        let model = BsModel::new(params)?;
        let la = la_direction_bs(&model)?;
        let lt = lt_directions_bs(&model, 1)?;
        let angle = angle_degrees(&la, lt.column(0))?;
        passed &= angle <= 1e-8;
        detail.push(format!("{name} {angle:.2e} deg"));
    }
    Ok((passed, format!("{} (tol 1e-8)", detail.join(", "))))
}

fn angle_reproduction() -> Check {
    let model = BsModel::new(presets::asian_bs())?;
    let la = la_direction_bs(&model)?;
    let (pca, _) = pca_directions(model.covariance(), 1)?;
    let bs_angle = angle_degrees(&la, pca.column(0))?;
    let cir = presets::cir_asian();
    let cir_angle = angle_degrees(&la_direction_cir(&cir)?, lt_directions_cir(&cir, 1)?.column(0))?;
    let bs_ok = (bs_angle - 52.73).abs() <= 1.0;
    let cir_ok = (cir_angle - 1.00).abs() <= 0.5;
    Ok((
        bs_ok && cir_ok,
        format!(
            "BS asian LA-PCA {bs_angle:.2} deg (target 52.73 ± 1) {}; CIR LA-LT {cir_angle:.2} deg (target 1.00 ± 0.5) {}",
            if bs_ok { "ok" } else { "off" },
            if cir_ok { "ok" } else { "off" }
        ),
    ))
}

struct PriceTarget {
    name: &'static str,
    model: Model,
    kind: PayoffKind,
    strike: f64,
    barrier: Option<f64>,
    price: f64,
    /// Single-draw variance printed alongside, from 2·10⁶ draws.
    variance: f64,
}

const REFERENCE_DRAWS: f64 = 2e6;

fn price_reproduction() -> Check {
    let asian = BsModel::new(presets::asian_bs())?;
    let barrier = BsModel::new(presets::barrier_bs())?;
    let basket = BsModel::new(presets::basket_bs())?;
    let targets = [
        (asian.clone(), PayoffKind::Asian, 45.0, None, 7.02, 55.89, "asian K=45"),
        (asian.clone(), PayoffKind::Asian, 50.0, None, 4.02, 36.966, "asian K=50"),
        (asian, PayoffKind::Asian, 55.0, None, 2.06, 20.357, "asian K=55"),
        (barrier.clone(), PayoffKind::BarrierExpiry, 50.0, Some(60.0), 1.38, 2.99, "expiry barrier"),
        (barrier, PayoffKind::BarrierComplete, 50.0, Some(60.0), 1.22, 2.42, "complete barrier"),
        (basket, PayoffKind::Asian, 40.0, None, 4.15, 34.88, "basket K=40"),
    ]
    .map(|(m, kind, strike, barrier, price, variance, name)| PriceTarget {
        name,
        model: Model::Bs(m),
        kind,
        strike,
        barrier,
        price,
        variance,
    });
    let cir = PriceTarget {
        name: "cir K=100",
        model: Model::Cir(presets::cir_asian()),
        kind: PayoffKind::Asian,
        strike: 100.0,
        barrier: None,
        price: 10.6,
        variance: 310.11,
    };

    let n = 100_000;
    let mut passed = true;
    let mut detail = Vec::new();
    for (i, t) in targets.iter().chain(std::iter::once(&cir)).enumerate() {
        let problem = PricingProblem::from_model(t.model.clone(), t.kind, t.strike, t.barrier)?;
        let r = plain_mc_estimate(&problem, n, &RandomStream::new(303, i as u64))?;
        let se = (r.estimator_variance + t.variance / REFERENCE_DRAWS).sqrt();
        let ok = (r.price - t.price).abs() <= 3.0 * se;
        passed &= ok;
        detail.push(format!(
            "{} {:.4} vs {} ({:.1} SE){}",
            t.name,
            r.price,
            t.price,
            (r.price - t.price).abs() / se,
            if ok { "" } else { " FAIL" }
        ));
        if t.name == cir.name {
            let rel = r.variance / t.variance - 1.0;
            let var_ok = rel.abs() <= 0.10;
            passed &= var_ok;
            detail.push(format!(
                "cir MC variance {:.2} vs 310.11 ({:+.1}%){}",
                r.variance,
                100.0 * rel,
                if var_ok { "" } else { " FAIL" }
            ));
        }
    }
    Ok((passed, detail.join("; ")))
}

const BS_DESK: &str = r#"
[run]
seed = 404
samples = 100000
strata = 100
allocations = ["opt"]
methods = ["la", "pca"]
timing = false

[model]
kind = "bs"
spots = [50.0]
vols = [0.3]
rate = 0.05
steps = 64
maturity = 1.0

[payoff]
kind = "asian"
strikes = [50.0]
"#;

const CIR_DESK: &str = r#"
[run]
seed = 404
samples = 100000
strata = 100
allocations = ["opt"]
methods = ["la"]
timing = false

[model]
kind = "cir"
s0 = 100.0
alpha = 1.5
mu = 100.0
sigma = 8.0
rate = 0.05
steps = 64
maturity = 1.0
monitoring = "start-of-step"

[payoff]
kind = "asian"
strikes = [100.0]
"#;

fn variance_ordering() -> Check {
    let rows = run_experiment(&ExperimentConfig::from_toml(BS_DESK)?)?;
    let var = |m: &str| rows.iter().find(|r| r.method == m).map(|r| r.variance).unwrap_or(f64::NAN);
    let (mc, la, pca) = (var("mc"), var("la"), var("pca"));
    let cir_rows = run_experiment(&ExperimentConfig::from_toml(CIR_DESK)?)?;
    let cvar = |m: &str| cir_rows.iter().find(|r| r.method == m).map(|r| r.variance).unwrap_or(f64::NAN);
    let (cmc, cla) = (cvar("mc"), cvar("la"));
    let bs_ratio = mc / la;
    let cir_ratio = cmc / cla;
    let passed = bs_ratio >= 100.0 && la < pca && pca < mc && cir_ratio >= 100.0;
    Ok((
        passed,
        format!(
            "BS asian K=50: var MC {mc:.3}, PCA {pca:.3}, LA {la:.4}, MC/LA {bs_ratio:.0} (>= 100); \
             CIR K=100: var MC {cmc:.2}, LA {cla:.3}, MC/LA {cir_ratio:.0} (>= 100)"
        ),
    ))
}

fn allocation_optimality() -> Check {
    let mut rng = ChaCha12Rng::seed_from_u64(505);
    let mut violations = 0;
    let mut identity_err: f64 = 0.0;
    for _ in 0..100 {
        let k = rng.random_range(2..50);
        let raw: Vec<f64> = (0..k).map(|_| rng.random_range(0.01..1.0)).collect();
        let s: f64 = raw.iter().sum();
        let p: Vec<f64> = raw.iter().map(|x| x / s).collect();
        let sigma: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..5.0)).collect();
        let opt = optimal_allocation(&p, &sigma, 100_000)?;
        let prop = proportional_allocation(&p, 100_000)?;
        let v_opt = theoretical_variance(&p, &sigma, &opt.fractions);
        let v_prop = theoretical_variance(&p, &sigma, &prop.fractions);
        if v_opt > v_prop {
            violations += 1;
        }
        // Cauchy-Schwarz: the optimum equals (Σ p σ)²
        let cs = p.iter().zip(&sigma).map(|(a, b)| a * b).sum::<f64>().powi(2);
        identity_err = identity_err.max((v_opt / cs - 1.0).abs());
    }
    Ok((
        violations == 0 && identity_err <= 1e-12,
        format!("{violations}/100 instances with optimal > proportional; max |opt/(Σpσ)² - 1| = {identity_err:.1e}"),
    ))
}

fn direction_invariants() -> Check {
    let mut notes = Vec::new();
    let mut passed = true;

    for (name, params) in [("cir", presets::cir_asian()), ("cir literal", presets::cir_asian_literal())] {
        let ws = lt_cir_workspace(&params, 4)?;
        let exact = ws.steps.iter().all(|s| s.invariants_hold());
        passed &= exact;
        let (nodes, _) = params.euler_nodes(&vec![0.0; params.steps]);
        let closed = params.zero_noise_path();
        let err = nodes
            .iter()
            .zip(&closed)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        passed &= err <= 1e-12;
        notes.push(format!("{name}: recurrences exact {exact}, zero-noise max err {err:.1e}"));
    }

    let model = BsModel::new(presets::asian_bs())?;
    let zero = vec![0.0; model.dim()];
    let grad = model.basket_g_gradient(&zero);
    let h = 1e-5;
    let fd: Vec<f64> = (0..model.dim())
        .map(|i| {
            let (mut a, mut b) = (zero.clone(), zero.clone());
            a[i] += h;
            b[i] -= h;
            (model.basket_g(&a) - model.basket_g(&b)) / (2.0 * h)
        })
        .collect();
    let bs_err = rel_err(&grad, &fd);
    passed &= bs_err < 1e-5;

    let cir = presets::cir_asian_literal();
    let field = CirAverage(&cir);
    let zero = vec![0.0; cir.steps];
    let grad = field.gradient(&zero);
    let h = 1e-6;
    let fd: Vec<f64> = (0..cir.steps)
        .map(|i| {
            let (mut a, mut b) = (zero.clone(), zero.clone());
            a[i] += h;
            b[i] -= h;
            (field.value(&a) - field.value(&b)) / (2.0 * h)
        })
        .collect();
    let cir_err = rel_err(&grad, &fd);
    passed &= cir_err < 1e-4;
    notes.push(format!("BS gradient FD rel err {bs_err:.1e} (< 1e-5), CIR {cir_err:.1e} (< 1e-4)"));
    Ok((passed, notes.join("; ")))
}

fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    norm(&diff) / norm(a)
}

const DETERMINISM: &str = r#"
[run]
seed = 606
samples = 20000
strata = 25
methods = ["la", "pca", "la+pca", "two-dir-lt"]
lhs = true
lhs_replications = 10
timing = false

[model]
kind = "bs"
spots = [50.0]
vols = [0.3]
rate = 0.05
steps = 16
maturity = 1.0

[payoff]
kind = "asian"
strikes = [50.0]
"#;

fn determinism() -> Check {
    let config = ExperimentConfig::from_toml(DETERMINISM)?;
    let run = |threads: usize| -> Result<String> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| crate::Error::Io(e.to_string()))?;
        pool.install(|| to_csv(&run_experiment(&config)?))
    };
    let one = run(1)?;
    let four = run(4)?;
    let again = run(3)?;
    Ok((
        one == four && four == again,
        format!("{} CSV bytes; 1 vs 4 threads identical: {}, 4 vs 3: {}", one.len(), one == four, four == again),
    ))
}

fn barrier_monotonicity() -> Check {
    let model = BsModel::new(presets::barrier_bs())?;
    let weights = model.params().weights.clone();
    let disc = (-0.05f64).exp();
    let plain = PayoffSpec::new(PayoffKind::Asian, 50.0, None, weights.clone(), disc)?;
    let expiry = PayoffSpec::new(PayoffKind::BarrierExpiry, 50.0, Some(60.0), weights.clone(), disc)?;
    let complete = PayoffSpec::new(PayoffKind::BarrierComplete, 50.0, Some(60.0), weights, disc)?;
    let mut stream = RandomStream::new(707, 0);
    let mut z = vec![0.0; model.dim()];
    let mut violations = 0;
    let mut knocked = 0;
    for _ in 0..10_000 {
        stream.fill_normal(&mut z);
        // wider paths so that both barriers are actually hit
        z.iter_mut().for_each(|x| *x *= 3.0);
        let path = model.path(&z);
        let (p, e, c) = (plain.evaluate(&path), expiry.evaluate(&path), complete.evaluate(&path));
        if !(c <= e && e <= p) {
            violations += 1;
        }
        if c < p {
            knocked += 1;
        }
    }
    let cir: CirParams = presets::cir_asian();
    let cw = vec![1.0 / cir.steps as f64; cir.steps];
    let cplain = PayoffSpec::new(PayoffKind::Asian, 100.0, None, cw.clone(), 1.0)?;
    let cexp = PayoffSpec::new(PayoffKind::BarrierExpiry, 100.0, Some(130.0), cw.clone(), 1.0)?;
    let ccomp = PayoffSpec::new(PayoffKind::BarrierComplete, 100.0, Some(130.0), cw, 1.0)?;
    let mut z = vec![0.0; cir.steps];
    for _ in 0..10_000 {
        stream.fill_normal(&mut z);
        let path = crate::models::cir_euler_path(&z, &cir)?;
        let (p, e, c) = (cplain.evaluate(&path), cexp.evaluate(&path), ccomp.evaluate(&path));
        if !(c <= e && e <= p) {
            violations += 1;
        }
    }
    Ok((
        violations == 0,
        format!("{violations} violations over 2 x 10^4 paths ({knocked} BS paths knocked out)"),
    ))
}
