//! Parameter sets of the reference experiments.

use crate::models::{BsParams, CirParams, Monitoring};

/// Single-asset Asian option, 64 monitoring dates over one year.
pub fn asian_bs() -> BsParams {
    BsParams::asian(50.0, 0.3, 0.05, 64, 1.0).expect("valid preset")
}

pub const ASIAN_STRIKES: [f64; 3] = [45.0, 50.0, 55.0];

/// Low-volatility single asset with 16 monitoring dates, for barrier options.
pub fn barrier_bs() -> BsParams {
    BsParams::asian(50.0, 0.1, 0.05, 16, 1.0).expect("valid preset")
}

/// 40 assets, spots 20 to 60 and volatilities 0.1 to 0.4 evenly spaced,
/// pairwise correlation 0.5, observed once at maturity.
pub fn basket_bs() -> BsParams {
    let m = 40;
    let spots = (0..m).map(|i| 20.0 + 40.0 * i as f64 / (m - 1) as f64).collect();
    let vols = (0..m).map(|i| 0.1 + 0.3 * i as f64 / (m - 1) as f64).collect();
    BsParams::basket(spots, vols, 0.5, 0.05, 1.0).expect("valid preset")
}

pub const BASKET_STRIKES: [f64; 3] = [30.0, 40.0, 50.0];

/// CIR price `S = 100·X` where the factor `X` starts at 1 and reverts at
/// speed 1.5 to 1 with volatility 0.8; in terms of `S` this is `S_0 = 100`,
/// `μ = 100`, `σ = 8`. Prices are averaged over the values at the start of
/// each of the 64 steps.
pub fn cir_asian() -> CirParams {
    CirParams::new(100.0, 1.5, 100.0, 8.0, 0.05, 64, 1.0, Monitoring::StartOfStep).expect("valid preset")
}

/// The same CIR table read literally: `S_0 = 100` with long-run level 1 and
/// volatility 0.8, averaged over the end-of-step values.
pub fn cir_asian_literal() -> CirParams {
    CirParams::new(100.0, 1.5, 1.0, 0.8, 0.05, 64, 1.0, Monitoring::EndOfStep).expect("valid preset")
}

pub const CIR_STRIKES: [f64; 3] = [90.0, 100.0, 110.0];
