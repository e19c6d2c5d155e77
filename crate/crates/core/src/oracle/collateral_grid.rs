//! Grid searches for the asset-only benchmark with a dividend, built from
//! payoffs under `p ~ U[0, 2 p_prev]` and lenders who know the borrower is
//! strategic.

use serde::{Deserialize, Serialize};

use super::linspace;
use super::quad::gauss_legendre;
use crate::collateral::{date1_keep_value, date1_repayment_threshold, date1_switch_price};
use crate::error::{ModelError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollateralGridOptimum {
    /// Best promised repayment on the grid.
    pub r: f64,
    pub value: f64,
}

/// Date-1 value of promising `R2` against the asset, net of `x - R1` and
/// income: the loan lenders grant plus the discounted equity left in the
/// asset, `E[max(x + p2 - R2, 0)]`. The borrower defaults iff `p2 < R2 - x`.
pub fn collateral_date1_objective(p1: f64, r2: f64, x: f64, beta: f64) -> f64 {
    let top = 2.0 * p1;
    let t = (r2 - x).clamp(0.0, top);
    let loan = (0.5 * t * t + r2 * (top - t)) / top;
    let equity = ((x - r2) * (top - t) + 0.5 * (top * top - t * t)) / top;
    loan + beta * equity
}

/// Grid maximum of [`collateral_date1_objective`] over `R2 in [0, 2 p1 + x]`.
pub fn collateral_date1_grid(p1: f64, x: f64, beta: f64, n: usize) -> Result<CollateralGridOptimum> {
    if !(p1 > 0.0) {
        return Err(ModelError::domain("p1", format!("p1 = {p1} must be > 0")));
    }
    if n < 2 {
        return Err(ModelError::domain("n", "need at least two grid points"));
    }
    let mut best = CollateralGridOptimum {
        r: 0.0,
        value: f64::NEG_INFINITY,
    };
    for r2 in linspace(0.0, 2.0 * p1 + x, n) {
        let v = collateral_date1_objective(p1, r2, x, beta);
        if v > best.value {
            best = CollateralGridOptimum { r: r2, value: v };
        }
    }
    Ok(best)
}

/// Date-0 value of keeping the asset and promising `R1`: the loan plus the
/// discounted date-1 value, where the borrower defaults (and loses the asset)
/// whenever the continuation is negative.
fn date0_value(r1: f64, p0: f64, x: f64, beta: f64) -> Result<f64> {
    let top = 2.0 * p0;
    let f = |p1: f64| -> Result<f64> {
        if p1 <= 0.0 {
            return Ok(0.0);
        }
        let keep = date1_keep_value(p1, r1, x, beta)?;
        let (lender, own) = if keep >= 0.0 { (r1, keep) } else { (p1, 0.0) };
        Ok(lender + beta * own)
    };
    let mut breaks = vec![date1_repayment_threshold(r1, x, beta)?, date1_switch_price(x, beta)?];
    // the continuation has a 1/p1 term: subdivide for accuracy
    breaks.extend(linspace(0.0, top, 257));
    Ok(gauss_legendre(f, 0.0, top, &breaks)? / top)
}

/// Grid maximum of the date-0 value over `R1 in [0, 4 (p0 + x)]`. With
/// `R1` large enough the borrower always defaults, which is the sale.
pub fn collateral_date0_grid(p0: f64, x: f64, beta: f64, n: usize) -> Result<CollateralGridOptimum> {
    if !(p0 > 0.0) {
        return Err(ModelError::domain("p0", format!("p0 = {p0} must be > 0")));
    }
    if n < 2 {
        return Err(ModelError::domain("n", "need at least two grid points"));
    }
    let mut best = CollateralGridOptimum {
        r: 0.0,
        value: f64::NEG_INFINITY,
    };
    for r1 in linspace(0.0, 4.0 * (p0 + x), n) {
        let v = date0_value(r1, p0, x, beta)?;
        if v > best.value {
            best = CollateralGridOptimum { r: r1, value: v };
        }
    }
    Ok(best)
}
