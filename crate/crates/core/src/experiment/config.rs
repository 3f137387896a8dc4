use std::path::Path;

use serde::Deserialize;

use crate::directions::PcaMapping;
use crate::error::{Error, Result};
use crate::linalg::{Matrix, SymmetricMatrix};
use crate::models::{BsModel, BsParams, CirParams, Monitoring, TimeGrid};
use crate::payoffs::PayoffKind;
use crate::stratified::{Allocation, N_MIN, PILOT_FRACTION};

/// Direction method of one table column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Deserialize)]
pub enum Method {
    #[serde(rename = "la")]
    La,
    #[serde(rename = "lt")]
    Lt,
    #[serde(rename = "pca")]
    Pca,
    #[serde(rename = "pilot-pca")]
    PilotPca,
    #[serde(rename = "la+pca")]
    LaPca,
    #[serde(rename = "lt+pca")]
    LtPca,
    #[serde(rename = "two-dir-la")]
    TwoDirLa,
    #[serde(rename = "two-dir-lt")]
    TwoDirLt,
    #[serde(rename = "two-dir-pca")]
    TwoDirPca,
}

impl Method {
    pub const ALL: [Method; 9] = [
        Method::La,
        Method::Lt,
        Method::Pca,
        Method::PilotPca,
        Method::LaPca,
        Method::LtPca,
        Method::TwoDirLa,
        Method::TwoDirLt,
        Method::TwoDirPca,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Method::La => "la",
            Method::Lt => "lt",
            Method::Pca => "pca",
            Method::PilotPca => "pilot-pca",
            Method::LaPca => "la+pca",
            Method::LtPca => "lt+pca",
            Method::TwoDirLa => "two-dir-la",
            Method::TwoDirLt => "two-dir-lt",
            Method::TwoDirPca => "two-dir-pca",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.label() == s)
            .ok_or_else(|| Error::config("methods", format!("unknown method `{s}`")))
    }

    /// Number of stratification directions.
    pub fn directions(self) -> usize {
        match self {
            Method::La | Method::Lt | Method::Pca | Method::PilotPca => 1,
            _ => 2,
        }
    }
}

pub fn parse_allocation(s: &str) -> Result<Allocation> {
    match s {
        "const" => Ok(Allocation::Const),
        "opt" => Ok(Allocation::Opt),
        other => Err(Error::config("allocations", format!("unknown allocation `{other}`"))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone)]
pub enum ModelConfig {
    Bs(BsParams),
    Cir { params: CirParams, pca_mapping: PcaMapping },
}

impl ModelConfig {
    pub fn label(&self) -> &'static str {
        match self {
            ModelConfig::Bs(_) => "bs",
            ModelConfig::Cir { .. } => "cir",
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            ModelConfig::Bs(p) => p.assets() * p.steps(),
            ModelConfig::Cir { params, .. } => params.steps,
        }
    }

    pub fn rate(&self) -> f64 {
        match self {
            ModelConfig::Bs(p) => p.rate,
            ModelConfig::Cir { params, .. } => params.rate,
        }
    }

    pub fn maturity(&self) -> f64 {
        match self {
            ModelConfig::Bs(p) => p.maturity(),
            ModelConfig::Cir { params, .. } => params.maturity,
        }
    }

    pub fn assets(&self) -> usize {
        match self {
            ModelConfig::Bs(p) => p.assets(),
            ModelConfig::Cir { .. } => 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PayoffConfig {
    pub kind: PayoffKind,
    pub strikes: Vec<f64>,
    pub barrier: Option<f64>,
}

/// Validated experiment description.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub samples: usize,
    pub strata: usize,
    /// Interval counts for two-direction methods.
    pub grid: [usize; 2],
    pub pilot_fraction: f64,
    pub pilot_paths: usize,
    pub lhs: bool,
    pub lhs_replications: usize,
    pub allocations: Vec<Allocation>,
    pub methods: Vec<Method>,
    pub timing: bool,
    pub model: ModelConfig,
    pub payoff: PayoffConfig,
    pub output: Option<String>,
    pub format: OutputFormat,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    run: RawRun,
    model: RawModel,
    payoff: RawPayoff,
    #[serde(default)]
    output: RawOutput,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawRun {
    seed: u64,
    samples: usize,
    strata: usize,
    grid: Option<Vec<usize>>,
    pilot_fraction: f64,
    pilot_paths: usize,
    lhs: bool,
    lhs_replications: usize,
    allocations: Vec<String>,
    methods: Vec<String>,
    timing: bool,
}

impl Default for RawRun {
    fn default() -> Self {
        Self {
            seed: 1,
            samples: 100_000,
            strata: 100,
            grid: None,
            pilot_fraction: PILOT_FRACTION,
            pilot_paths: 2000,
            lhs: false,
            lhs_replications: 30,
            allocations: vec!["const".into(), "opt".into()],
            methods: Vec::new(),
            timing: true,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    kind: String,
    rate: f64,
    steps: usize,
    maturity: f64,
    // Black-Scholes
    spots: Option<Vec<f64>>,
    vols: Option<Vec<f64>>,
    assets: Option<usize>,
    spot_range: Option<[f64; 2]>,
    vol_range: Option<[f64; 2]>,
    correlation: Option<f64>,
    // CIR
    s0: Option<f64>,
    alpha: Option<f64>,
    mu: Option<f64>,
    sigma: Option<f64>,
    monitoring: Option<Monitoring>,
    pca_mapping: Option<PcaMapping>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPayoff {
    kind: PayoffKind,
    strikes: Vec<f64>,
    barrier: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    path: Option<String>,
    #[serde(default)]
    format: OutputFormat,
}

fn linspace(range: [f64; 2], n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![range[0]];
    }
    (0..n)
        .map(|i| range[0] + (range[1] - range[0]) * i as f64 / (n - 1) as f64)
        .collect()
}

fn require<T>(value: Option<T>, field: &str) -> Result<T> {
    value.ok_or_else(|| Error::config(field, "missing for this model kind"))
}

fn field_error(field: &str) -> impl Fn(Error) -> Error + '_ {
    move |e| match e {
        Error::ConfigInvalid { .. } => e,
        other => Error::config(field, other.to_string()),
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| {
            let field = e
                .span()
                .map(|s| text[..s.start.min(text.len())].lines().count().to_string())
                .map(|line| format!("line {line}"))
                .unwrap_or_else(|| "config".into());
            Error::config(field, e.message().to_string())
        })?;
        Self::from_raw(raw)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(path.display().to_string(), e.to_string()))?;
        Self::from_toml(&text)
    }

    fn from_raw(raw: RawConfig) -> Result<Self> {
        let model = build_model(&raw.model)?;
        let r = raw.run;
        let methods = r
            .methods
            .iter()
            .map(|m| Method::parse(m))
            .collect::<Result<Vec<_>>>()?;
        for (i, m) in methods.iter().enumerate() {
            if methods[..i].contains(m) {
                return Err(Error::config("methods", format!("`{}` listed twice", m.label())));
            }
            if *m == Method::PilotPca && matches!(model, ModelConfig::Bs(_)) {
                return Err(Error::config("methods", "pilot-pca is only available for the cir model"));
            }
            if *m == Method::Pca && methods.contains(&Method::PilotPca) && matches!(model, ModelConfig::Cir { .. }) {
                return Err(Error::config(
                    "methods",
                    "pca and pilot-pca are the same direction for the cir model; list one",
                ));
            }
        }
        let mut allocations = Vec::new();
        for a in &r.allocations {
            let a = parse_allocation(a)?;
            if allocations.contains(&a) {
                return Err(Error::config("allocations", format!("`{}` listed twice", a.label())));
            }
            allocations.push(a);
        }
        if !methods.is_empty() && allocations.is_empty() {
            return Err(Error::config("allocations", "at least one allocation is needed"));
        }
        let side = (r.strata as f64).sqrt().round() as usize;
        let grid = match &r.grid {
            None => [side.max(1), side.max(1)],
            Some(g) if g.len() == 2 && g.iter().all(|k| *k > 0) => [g[0], g[1]],
            Some(_) => return Err(Error::config("grid", "expected two positive interval counts")),
        };
        if r.strata == 0 {
            return Err(Error::config("strata", "must be positive"));
        }
        if !(r.pilot_fraction > 0.0 && r.pilot_fraction < 1.0) {
            return Err(Error::config("pilot_fraction", "must lie in (0, 1)"));
        }
        if r.samples < 2 {
            return Err(Error::config("samples", "need at least 2 draws"));
        }
        for m in &methods {
            let k = if m.directions() == 1 { r.strata } else { grid[0] * grid[1] };
            for a in &allocations {
                let need = match a {
                    Allocation::Const => k * N_MIN,
                    Allocation::Opt => {
                        ((r.pilot_fraction * r.samples as f64).round() as usize).max(k * N_MIN) + k * N_MIN
                    }
                };
                if r.samples < need {
                    return Err(Error::config(
                        "samples",
                        format!(
                            "{} draws are too few for `{}` with {k} strata and {} allocation (need {need})",
                            r.samples,
                            m.label(),
                            a.label()
                        ),
                    ));
                }
            }
        }
        if methods.iter().any(|m| matches!(m, Method::PilotPca | Method::Pca | Method::LaPca | Method::LtPca | Method::TwoDirPca))
            && matches!(model, ModelConfig::Cir { .. })
            && r.pilot_paths < 2
        {
            return Err(Error::config("pilot_paths", "need at least 2 pilot paths"));
        }
        if r.lhs && (r.lhs_replications < 2 || r.samples < r.lhs_replications) {
            return Err(Error::config(
                "lhs_replications",
                "need at least 2 replications and one draw per replication",
            ));
        }
        let payoff = build_payoff(raw.payoff, &model)?;
        Ok(Self {
            seed: r.seed,
            samples: r.samples,
            strata: r.strata,
            grid,
            pilot_fraction: r.pilot_fraction,
            pilot_paths: r.pilot_paths,
            lhs: r.lhs,
            lhs_replications: r.lhs_replications,
            allocations,
            methods,
            timing: r.timing,
            model,
            payoff,
            output: raw.output.path,
            format: raw.output.format,
        })
    }
}

fn build_model(m: &RawModel) -> Result<ModelConfig> {
    if m.steps == 0 {
        return Err(Error::config("model.steps", "must be positive"));
    }
    if !(m.maturity > 0.0) {
        return Err(Error::config("model.maturity", "must be positive"));
    }
    match m.kind.as_str() {
        "bs" => {
            let spots = match (&m.spots, m.assets, m.spot_range) {
                (Some(s), _, None) => s.clone(),
                (None, Some(n), Some(r)) if n > 0 => linspace(r, n),
                _ => {
                    return Err(Error::config(
                        "model.spots",
                        "give either `spots` or `assets` with `spot_range`",
                    ))
                }
            };
            let n = spots.len();
            let vols = match (&m.vols, m.vol_range) {
                (Some(v), None) => v.clone(),
                (None, Some(r)) => linspace(r, n),
                _ => return Err(Error::config("model.vols", "give either `vols` or `vol_range`")),
            };
            if vols.len() != n {
                return Err(Error::config("model.vols", format!("expected {n} volatilities, got {}", vols.len())));
            }
            let rho = m.correlation.unwrap_or(0.0);
            if n > 1 && !(rho > -1.0 / (n as f64 - 1.0) && rho < 1.0) {
                return Err(Error::config("model.correlation", "constant correlation must give a positive definite matrix"));
            }
            let corr = SymmetricMatrix::new(Matrix::from_fn(n, n, |i, j| if i == j { 1.0 } else { rho }))
                .map_err(field_error("model.correlation"))?;
            let weights = vec![1.0 / (n * m.steps) as f64; n * m.steps];
            let grid = TimeGrid::regular(m.steps, m.maturity).map_err(field_error("model.steps"))?;
            let params = BsParams::new(spots, vols, corr, m.rate, grid, weights).map_err(field_error("model"))?;
            BsModel::new(params.clone()).map_err(field_error("model"))?;
            Ok(ModelConfig::Bs(params))
        }
        "cir" => {
            let params = CirParams::new(
                require(m.s0, "model.s0")?,
                require(m.alpha, "model.alpha")?,
                require(m.mu, "model.mu")?,
                require(m.sigma, "model.sigma")?,
                m.rate,
                m.steps,
                m.maturity,
                m.monitoring.unwrap_or_default(),
            )
            .map_err(field_error("model"))?;
            Ok(ModelConfig::Cir {
                params,
                pca_mapping: m.pca_mapping.unwrap_or_default(),
            })
        }
        other => Err(Error::config("model.kind", format!("unknown model `{other}` (bs or cir)"))),
    }
}

fn build_payoff(p: RawPayoff, model: &ModelConfig) -> Result<PayoffConfig> {
    if p.strikes.is_empty() {
        return Err(Error::config("payoff.strikes", "at least one strike is needed"));
    }
    if p.strikes.iter().any(|k| !(*k > 0.0)) {
        return Err(Error::config("payoff.strikes", "strikes must be positive"));
    }
    if p.kind.has_barrier() {
        let b = p
            .barrier
            .ok_or_else(|| Error::config("payoff.barrier", "barrier payoffs need a barrier"))?;
        if let Some(k) = p.strikes.iter().find(|k| !(b > **k)) {
            return Err(Error::config("payoff.barrier", format!("barrier {b} must exceed strike {k}")));
        }
        if model.assets() != 1 {
            return Err(Error::config("payoff.kind", "barrier payoffs need a single asset"));
        }
    } else if p.barrier.is_some() {
        return Err(Error::config("payoff.barrier", "only barrier payoffs take a barrier"));
    }
    Ok(PayoffConfig {
        kind: p.kind,
        strikes: p.strikes,
        barrier: p.barrier,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const BS: &str = r#"
[run]
seed = 7
samples = 20000
strata = 100
methods = ["la", "pca", "la+pca"]

[model]
kind = "bs"
spots = [50.0]
vols = [0.3]
rate = 0.05
steps = 16
maturity = 1.0

[payoff]
kind = "asian"
strikes = [45, 50]
"#;

    #[test]
    fn parses_bs() {
        let c = ExperimentConfig::from_toml(BS).unwrap();
        assert_eq!(c.seed, 7);
        assert_eq!(c.grid, [10, 10]);
        assert_eq!(c.methods, vec![Method::La, Method::Pca, Method::LaPca]);
        assert_eq!(c.allocations, vec![Allocation::Const, Allocation::Opt]);
        assert_eq!(c.model.dim(), 16);
    }

    #[test]
    fn rejects_pilot_pca_for_bs() {
        let text = BS.replace(r#"["la", "pca", "la+pca"]"#, r#"["pilot-pca"]"#);
        let e = ExperimentConfig::from_toml(&text).unwrap_err();
        assert!(e.is_config());
        assert!(e.to_string().contains("methods"));
    }

    #[test]
    fn rejects_unknown_keys_and_small_budgets() {
        let e = ExperimentConfig::from_toml(&BS.replace("seed = 7", "seed = 7\nsed = 3")).unwrap_err();
        assert!(e.is_config());
        let e = ExperimentConfig::from_toml(&BS.replace("samples = 20000", "samples = 250")).unwrap_err();
        assert!(e.to_string().contains("samples"));
    }

    #[test]
    fn basket_ranges() {
        let text = r#"
[model]
kind = "bs"
assets = 40
spot_range = [20, 60]
vol_range = [0.1, 0.4]
correlation = 0.5
rate = 0.05
steps = 1
maturity = 1.0

[payoff]
kind = "asian"
strikes = [40]
"#;
        let c = ExperimentConfig::from_toml(text).unwrap();
        match c.model {
            ModelConfig::Bs(p) => {
                assert_eq!(p.assets(), 40);
                assert_eq!(p.spots[39], 60.0);
                assert_eq!(p.vols[0], 0.1);
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn barrier_checks() {
        let text = BS.replace("kind = \"asian\"", "kind = \"barrier-expiry\"\nbarrier = 48");
        assert!(ExperimentConfig::from_toml(&text).is_err());
        let text = BS.replace("kind = \"asian\"", "kind = \"barrier-expiry\"\nbarrier = 60");
        assert!(ExperimentConfig::from_toml(&text).is_ok());
    }
}
