//! Expected date-0 values under `p1 ~ U[0, 2 p0]`, integrated from the
//! date-1 equilibrium outcome and the primitive payoffs.

use crate::combined::{combined_income, date1_behavior};
use crate::error::Result;
use crate::model::ModelParams;

// 5-point Gauss-Legendre on [-1, 1]; exact for polynomials up to degree 9.
const GL_NODES: [f64; 5] = [
    0.0,
    -0.538_469_310_105_683_1,
    0.538_469_310_105_683_1,
    -0.906_179_845_938_664,
    0.906_179_845_938_664,
];
const GL_WEIGHTS: [f64; 5] = [
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
    0.236_926_885_056_189_1,
];

/// Integral of `f` over `[lo, hi]`, split at every breakpoint inside the
/// interval, with 5-point Gauss-Legendre on each piece. Nodes never touch a
/// breakpoint, so the one-sided value on each piece is used.
pub fn gauss_legendre<F>(f: F, lo: f64, hi: f64, breaks: &[f64]) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let mut pts: Vec<f64> = breaks.iter().copied().filter(|&b| b > lo && b < hi).collect();
    pts.push(lo);
    pts.push(hi);
    pts.sort_by(f64::total_cmp);
    let mut total = 0.0;
    for w in pts.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        let mut piece = 0.0;
        for (x, wt) in GL_NODES.iter().zip(GL_WEIGHTS) {
            piece += wt * f(mid + half * x)?;
        }
        total += half * piece;
    }
    Ok(total)
}

/// Lender's expected date-1 recovery on the date-0 loan at price `p1`:
/// repayment from whoever repays, the seized asset otherwise.
pub fn lender_recovery_at(p1: f64, r1: f64, params: &ModelParams) -> Result<f64> {
    let o = date1_behavior(p1, r1, params)?;
    let repay = params.pi0 + (1.0 - params.pi0) * (1.0 - o.delta1);
    Ok(repay * r1 + (1.0 - repay) * p1)
}

/// Honest type's date-0 value for one realization of `p1`: the lender's
/// recovery (which funds the date-0 loan) plus the discounted continuation,
/// computed from payoffs: repay, sell the asset, and borrow `pi1 y` against
/// reputation when accepted and the posterior is at least `beta`.
pub fn honest_value_at(p1: f64, r1: f64, params: &ModelParams) -> Result<f64> {
    let y = combined_income(params)?;
    let beta = params.beta;
    let o = date1_behavior(p1, r1, params)?;
    let cont = (1.0 + beta) * y - r1 + p1 + o.alpha * (o.pi1 - beta).max(0.0) * y;
    Ok(lender_recovery_at(p1, r1, params)? + beta * cont)
}

fn breaks(r1: f64, params: &ModelParams) -> Result<[f64; 3]> {
    let y = combined_income(params)?;
    Ok([r1 - y, r1 - params.beta * y, r1])
}

/// Honest date-0 utility of keeping the asset and promising `R1`.
pub fn numeric_u_keep(r1: f64, params: &ModelParams) -> Result<f64> {
    let top = 2.0 * params.p0;
    let total = gauss_legendre(|p| honest_value_at(p, r1, params), 0.0, top, &breaks(r1, params)?)?;
    Ok(total / top)
}

/// Zero-profit date-0 loan for the promise `R1`.
pub fn numeric_loan(r1: f64, params: &ModelParams) -> Result<f64> {
    let top = 2.0 * params.p0;
    let total = gauss_legendre(|p| lender_recovery_at(p, r1, params), 0.0, top, &breaks(r1, params)?)?;
    Ok(total / top)
}
