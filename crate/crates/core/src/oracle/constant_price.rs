//! The combined regime when the asset price never moves: the date-1 game is
//! played at `p`, and the date-0 objective is evaluated at that single price
//! instead of being averaged over a distribution.

use serde::{Deserialize, Serialize};

use super::quad::honest_value_at;
use crate::combined::{
    combined_income, date1_behavior, lower_threshold, rationing_threshold, upper_threshold, Date0Action,
    Date1Outcome, Date1Region,
};
use crate::error::{ModelError, Result};
use crate::model::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumSummary {
    pub price: f64,
    #[serde(rename = "R1")]
    pub r1: f64,
    pub region: Date1Region,
    pub date1: Date1Outcome,
    /// `(R1 - y, R1 - beta y, R1)`.
    pub thresholds: [f64; 3],
    /// Best promise at this constant price, over `[0, 2y]`.
    #[serde(rename = "R1_best")]
    pub r1_best: f64,
    pub u_keep: f64,
    pub u_sell: f64,
    pub decision: Date0Action,
}

/// Date-1 outcome at `p` for the promise `R1`, and the date-0 choice with
/// the price known to stay at `p`.
pub fn constant_price_solve(params: &ModelParams, p: f64, r1: f64) -> Result<EquilibriumSummary> {
    let y = combined_income(params)?;
    if !(p >= 0.0 && p.is_finite()) {
        return Err(ModelError::domain("p", format!("p = {p} must be >= 0")));
    }
    let date1 = date1_behavior(p, r1, params)?;
    // The value is continuous and piecewise linear in R1 with kinks where p
    // crosses a region boundary, so the maximum sits at a kink or an end.
    let mut candidates = vec![0.0, 2.0 * y, p, p + params.beta * y, p + y];
    candidates.retain(|r| (0.0..=2.0 * y).contains(r));
    let mut best = (0.0, f64::NEG_INFINITY);
    for r in candidates {
        let v = honest_value_at(p, r, params)?;
        if v > best.1 {
            best = (r, v);
        }
    }
    let u_sell = params.beta * (1.0 + params.beta) * y + p;
    Ok(EquilibriumSummary {
        price: p,
        r1,
        region: date1.region,
        date1,
        thresholds: [
            lower_threshold(r1, y),
            rationing_threshold(r1, params.beta, y),
            upper_threshold(r1),
        ],
        r1_best: best.0,
        u_keep: best.1,
        u_sell,
        decision: if best.1 >= u_sell {
            Date0Action::Keep
        } else {
            Date0Action::Sell
        },
    })
}
