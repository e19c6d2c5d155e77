//! Numerical cross-checks of the closed forms and simulation of default
//! dynamics. Everything here works from primitives (payoffs, zero-profit
//! conditions, the price law) rather than from the derived formulas.

mod collateral_grid;
mod constant_price;
mod montecarlo;
mod olg;
mod optimize;
mod quad;
mod verify;

use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};

pub use collateral_grid::{
    collateral_date0_grid, collateral_date1_objective, collateral_date1_grid, CollateralGridOptimum,
};
pub use constant_price::{constant_price_solve, EquilibriumSummary};
pub use montecarlo::{analytic_strategic_default_rate, monte_carlo, monte_carlo_with, SimStats};
pub use olg::{olg_simulate, olg_simulate_with_prices, CohortStatus, Generation, OlgDateStats, OlgRun, OlgState, TypeMass};
pub use optimize::{
    keep_contract_grid, keep_interval_oracle, max_u_keep, numeric_optimal_r1, pi0_star, pi0_star_oracle,
    BoundStatus, KeepInterval, NumericOptimum, OracleBound, Pi0StarReport,
};
pub use quad::{gauss_legendre, honest_value_at, lender_recovery_at, numeric_loan, numeric_u_keep};
pub use verify::{
    grid_verify_date1, grid_verify_date1_with, mutated_behavior, Date1Mutation, Date1Residuals, MutField, MUTATION_SIZE,
};

/// Resolution of oracle grids.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Points across a price support.
    pub price_points: usize,
    /// Points along a contract axis.
    pub contract_points: usize,
    pub tolerance: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            price_points: 10_000,
            contract_points: 2_001,
            tolerance: 1e-9,
        }
    }
}

impl GridSpec {
    pub fn new(price_points: usize, contract_points: usize, tolerance: f64) -> Result<Self> {
        GridSpec {
            price_points,
            contract_points,
            tolerance,
        }
        .validate()
    }

    pub fn validate(self) -> Result<Self> {
        if self.price_points < 100 {
            return Err(ModelError::domain("price_points", "need at least 100 points"));
        }
        if self.contract_points < 100 {
            return Err(ModelError::domain("contract_points", "need at least 100 points"));
        }
        if !(self.tolerance > 0.0) {
            return Err(ModelError::domain("tolerance", "must be > 0"));
        }
        Ok(self)
    }

    /// Grid whose contract axis over `[0, span]` has spacing at most `step`.
    pub fn with_contract_step(self, span: f64, step: f64) -> Self {
        let n = (span / step).ceil() as usize + 1;
        GridSpec {
            contract_points: n.max(100),
            ..self
        }
    }
}

/// `n` evenly spaced points from `lo` to `hi` inclusive.
pub(crate) fn linspace(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> + Clone {
    let step = (hi - lo) / (n - 1) as f64;
    (0..n).map(move |i| if i + 1 == n { hi } else { lo + step * i as f64 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_spec_invariants() {
        assert!(GridSpec::new(99, 100, 1e-9).is_err());
        assert!(GridSpec::new(100, 100, 0.0).is_err());
        assert!(GridSpec::default().validate().is_ok());
        let g = GridSpec::default().with_contract_step(2.0, 1e-4);
        assert_eq!(g.contract_points, 20_001);
    }

    #[test]
    fn linspace_hits_endpoints() {
        let v: Vec<f64> = linspace(0.0, 2.4, 7).collect();
        assert_eq!(v.len(), 7);
        assert_eq!(v[0], 0.0);
        assert_eq!(v[6], 2.4);
    }
}
