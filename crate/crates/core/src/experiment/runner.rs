use std::time::Instant;

use super::config::{ExperimentConfig, Method, ModelConfig};
use super::table::ResultRow;
use crate::directions::{
    la_direction_bs, la_direction_cir, la_directions_multi, lt_directions_bs, lt_directions_cir,
    pca_directions, pilot_pca_cir, CirAverage, PcaMapping,
};
use crate::error::{Error, Result};
use crate::gaussian::RandomStream;
use crate::linalg::Matrix;
use crate::models::{cir_euler_path, BsModel, CirParams};
use crate::payoffs::{PayoffKind, PayoffSpec};
use crate::stratified::{
    lhs_estimate, plain_mc_estimate, two_stage_estimate, Allocation, DirectionSet, EstimateReport,
    Integrand, StratumSpec, Stratifier,
};

/// Path model ready to generate prices from a driver vector.
#[derive(Debug, Clone)]
#[allow(clippy::large_enum_variant)]
pub enum Model {
    Bs(BsModel),
    Cir(CirParams),
}

impl Model {
    pub fn build(config: &ModelConfig) -> Result<Self> {
        Ok(match config {
            ModelConfig::Bs(p) => Model::Bs(BsModel::new(p.clone())?),
            ModelConfig::Cir { params, .. } => Model::Cir(params.clone()),
        })
    }

    pub fn dim(&self) -> usize {
        match self {
            Model::Bs(m) => m.dim(),
            Model::Cir(p) => p.steps,
        }
    }
}

/// Discounted payoff as a function of the standard-normal driver.
#[derive(Debug, Clone)]
pub struct PricingProblem {
    pub model: Model,
    pub payoff: PayoffSpec,
}

impl Integrand for PricingProblem {
    fn dim(&self) -> usize {
        self.model.dim()
    }

    fn evaluate(&self, z: &[f64]) -> f64 {
        match &self.model {
            Model::Bs(m) => self.payoff.evaluate(&m.path(z)),
            Model::Cir(p) => self
                .payoff
                .evaluate(&cir_euler_path(z, p).expect("driver length checked by the estimator")),
        }
    }
}

impl PricingProblem {
    pub fn new(config: &ExperimentConfig, strike: f64) -> Result<Self> {
        Self::from_model(Model::build(&config.model)?, config.payoff.kind, strike, config.payoff.barrier)
    }

    /// Equal averaging weights over the monitored nodes, discounted from maturity.
    pub fn from_model(model: Model, kind: PayoffKind, strike: f64, barrier: Option<f64>) -> Result<Self> {
        let (weights, rate, maturity) = match &model {
            Model::Bs(m) => (m.params().weights.clone(), m.params().rate, m.params().maturity()),
            Model::Cir(p) => (vec![1.0 / p.steps as f64; p.steps], p.rate, p.maturity),
        };
        let payoff = PayoffSpec::new(kind, strike, barrier, weights, (-rate * maturity).exp())?;
        Ok(Self { model, payoff })
    }
}

fn label_hash(label: &str) -> u64 {
    // FNV-1a
    label
        .bytes()
        .fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

/// Stream for a named piece of work, independent of what else the run does.
pub fn labelled_stream(seed: u64, label: &str) -> RandomStream {
    RandomStream::new(seed, 0).substream(label_hash(label))
}

fn pilot_directions(config: &ExperimentConfig, params: &CirParams, mapping: PcaMapping, m: usize) -> Result<DirectionSet> {
    let mut s = labelled_stream(config.seed, "pilot-pca");
    pilot_pca_cir(params, config.pilot_paths, m, mapping, &mut s)
}

/// Direction set used by `method` for the configured model.
pub fn method_directions(config: &ExperimentConfig, model: &Model, method: Method) -> Result<DirectionSet> {
    match (model, &config.model) {
        (Model::Bs(bs), _) => {
            let pca = |m| pca_directions(bs.covariance(), m).map(|(set, _)| set);
            match method {
                Method::La => DirectionSet::single(la_direction_bs(bs)?),
                Method::Lt => lt_directions_bs(bs, 1),
                Method::Pca => pca(1),
                Method::PilotPca => Err(Error::config("methods", "pilot-pca is only available for the cir model")),
                Method::LaPca => DirectionSet::general(vec![la_direction_bs(bs)?, pca(1)?.column(0).to_vec()]),
                Method::LtPca => DirectionSet::general(vec![
                    lt_directions_bs(bs, 1)?.column(0).to_vec(),
                    pca(1)?.column(0).to_vec(),
                ]),
                Method::TwoDirLa => la_directions_multi(bs, 2),
                Method::TwoDirLt => lt_directions_bs(bs, 2),
                Method::TwoDirPca => pca(2),
            }
        }
        (Model::Cir(p), ModelConfig::Cir { pca_mapping, .. }) => {
            let pilot = |m| pilot_directions(config, p, *pca_mapping, m);
            match method {
                Method::La => DirectionSet::single(la_direction_cir(p)?),
                Method::Lt => lt_directions_cir(p, 1),
                Method::Pca | Method::PilotPca => pilot(1),
                Method::LaPca => DirectionSet::general(vec![la_direction_cir(p)?, pilot(1)?.column(0).to_vec()]),
                Method::LtPca => DirectionSet::general(vec![
                    lt_directions_cir(p, 1)?.column(0).to_vec(),
                    pilot(1)?.column(0).to_vec(),
                ]),
                Method::TwoDirLa => {
                    p.check_feller()?;
                    la_directions_multi(&CirAverage(p), 2)
                }
                Method::TwoDirLt => lt_directions_cir(p, 2),
                Method::TwoDirPca => pilot(2),
            }
        }
        (Model::Cir(_), ModelConfig::Bs(_)) => unreachable!("model built from its config"),
    }
}

/// Full orthogonal linear-transformation matrix, used to rotate LHS draws.
pub fn lt_rotation(model: &Model) -> Result<Matrix> {
    let set = match model {
        Model::Bs(bs) => lt_directions_bs(bs, bs.dim())?,
        Model::Cir(p) => lt_directions_cir(p, p.steps)?,
    };
    Matrix::from_columns(set.columns())
}

fn stratum_spec(config: &ExperimentConfig, method: Method) -> Result<StratumSpec> {
    if method.directions() == 1 {
        StratumSpec::new(vec![config.strata])
    } else {
        StratumSpec::new(config.grid.to_vec())
    }
}

/// Estimate for one (method, allocation) cell, directions included.
pub fn estimate_cell(
    config: &ExperimentConfig,
    problem: &PricingProblem,
    method: Method,
    allocation: Allocation,
    stream: &RandomStream,
) -> Result<EstimateReport> {
    let start = Instant::now();
    let dirs = method_directions(config, &problem.model, method)?;
    let stratifier = Stratifier::auto(dirs, stratum_spec(config, method)?)?;
    let mut r = two_stage_estimate(problem, &stratifier, allocation, config.samples, config.pilot_fraction, stream)?;
    r.wall_time = start.elapsed();
    Ok(r)
}

/// One computed table cell with its full estimator report.
#[derive(Debug, Clone)]
pub struct CellResult {
    pub row: ResultRow,
    pub report: EstimateReport,
}

fn cell_label(method: &str, alloc: &str, payoff: &str, strike: f64, barrier: Option<f64>) -> String {
    format!("{method}/{alloc}/{payoff}/{strike:e}/{}", barrier.map(|b| format!("{b:e}")).unwrap_or_default())
}

fn annotate(label: &str) -> impl Fn(Error) -> Error + '_ {
    move |e| match e {
        e @ Error::ConfigInvalid { .. } => e,
        e => Error::Cell {
            cell: label.to_string(),
            source: Box::new(e),
        },
    }
}

/// Runs every (payoff, method, allocation) cell plus the Monte Carlo baseline
/// (and the LHS row when enabled).
pub fn run_cells(config: &ExperimentConfig) -> Result<Vec<CellResult>> {
    let mut out = Vec::new();
    let payoff_label = config.payoff.kind.label();
    let barrier = config.payoff.barrier;
    let rotation = if config.lhs {
        Some(lt_rotation(&Model::build(&config.model)?).map_err(annotate("lhs rotation"))?)
    } else {
        None
    };
    for &strike in &config.payoff.strikes {
        let problem = PricingProblem::new(config, strike).map_err(|e| Error::config("payoff", e.to_string()))?;
        let row = |method: &str, alloc: &str, r: &EstimateReport, ratio: Option<f64>| ResultRow {
            method: method.to_string(),
            alloc: alloc.to_string(),
            payoff: payoff_label.to_string(),
            strike,
            barrier,
            price: r.price,
            variance: r.variance,
            time_ratio: ratio,
            n_samples: r.total_samples(),
            strata: r.n_strata(),
            seed: config.seed,
        };

        let label = cell_label("mc", "none", payoff_label, strike, barrier);
        let mc = plain_mc_estimate(&problem, config.samples, &labelled_stream(config.seed, &label))
            .map_err(annotate(&label))?;
        let base = mc.wall_time.as_secs_f64();
        let ratio = |r: &EstimateReport| {
            config
                .timing
                .then(|| if base > 0.0 { r.wall_time.as_secs_f64() / base } else { 0.0 })
        };
        out.push(CellResult {
            row: row("mc", "none", &mc, config.timing.then_some(1.0)),
            report: mc.clone(),
        });

        for &method in &config.methods {
            for &alloc in &config.allocations {
                let label = cell_label(method.label(), alloc.label(), payoff_label, strike, barrier);
                let r = estimate_cell(config, &problem, method, alloc, &labelled_stream(config.seed, &label))
                    .map_err(annotate(&label))?;
                out.push(CellResult {
                    row: row(method.label(), alloc.label(), &r, ratio(&r)),
                    report: r,
                });
            }
        }

        if let Some(rot) = &rotation {
            let label = cell_label("lhs", "none", payoff_label, strike, barrier);
            let start = Instant::now();
            let mut r = lhs_estimate(
                &problem,
                rot,
                config.samples,
                config.lhs_replications,
                &labelled_stream(config.seed, &label),
            )
            .map_err(annotate(&label))?;
            r.wall_time = start.elapsed();
            out.push(CellResult {
                row: row("lhs", "none", &r, ratio(&r)),
                report: r,
            });
        }
    }
    Ok(out)
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    Ok(run_cells(config)?.into_iter().map(|c| c.row).collect())
}

/// Single cell without the baseline; `method = None` gives plain Monte Carlo.
pub fn price_cell(
    config: &ExperimentConfig,
    method: Option<Method>,
    allocation: Allocation,
    strike: f64,
) -> Result<CellResult> {
    let payoff_label = config.payoff.kind.label();
    let barrier = config.payoff.barrier;
    let problem = PricingProblem::new(config, strike).map_err(|e| Error::config("payoff", e.to_string()))?;
    let (m, a) = match method {
        Some(m) => (m.label(), allocation.label()),
        None => ("mc", "none"),
    };
    let label = cell_label(m, a, payoff_label, strike, barrier);
    let stream = labelled_stream(config.seed, &label);
    let r = match method {
        Some(method) => estimate_cell(config, &problem, method, allocation, &stream),
        None => plain_mc_estimate(&problem, config.samples, &stream),
    }
    .map_err(annotate(&label))?;
    Ok(CellResult {
        row: ResultRow {
            method: m.to_string(),
            alloc: a.to_string(),
            payoff: payoff_label.to_string(),
            strike,
            barrier,
            price: r.price,
            variance: r.variance,
            time_ratio: None,
            n_samples: r.total_samples(),
            strata: r.n_strata(),
            seed: config.seed,
        },
        report: r,
    })
}
