//! The combined regime: a borrower with some initial reputation who also owns
//! the asset. Flat income (`y1 = y2 = y`), no dividend (`x = 0`) and a prior
//! below the discount factor (`pi0 < beta`), so that without the asset the
//! outcome would be autarky.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};
use crate::model::{Contract, ModelParams, TOL};

/// Date-1 regions, ordered by rising `p1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Date1Region {
    CompleteSeparation,
    PartialSeparation,
    CreditRationing,
    PoolingAutarky,
}

impl Date1Region {
    pub const ALL: [Date1Region; 4] = [
        Date1Region::CompleteSeparation,
        Date1Region::PartialSeparation,
        Date1Region::CreditRationing,
        Date1Region::PoolingAutarky,
    ];

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Date1Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Date1Region::CompleteSeparation => "CompleteSeparation",
            Date1Region::PartialSeparation => "PartialSeparation",
            Date1Region::CreditRationing => "CreditRationing",
            Date1Region::PoolingAutarky => "PoolingAutarky",
        };
        f.write_str(s)
    }
}

/// Equilibrium of the date-1 continuation game at one price.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Date1Outcome {
    pub region: Date1Region,
    pub pi1: f64,
    pub delta1: f64,
    pub alpha: f64,
    pub u1_honest: f64,
}

/// Flat income of the combined regime after checking its standing assumptions.
pub fn combined_income(params: &ModelParams) -> Result<f64> {
    let p = params.validate()?;
    if p.y1 != p.y2 {
        return Err(ModelError::domain("y", "the combined regime needs y1 = y2"));
    }
    if p.x != 0.0 {
        return Err(ModelError::domain("x", "the combined regime needs x = 0"));
    }
    if !(p.y1 > 0.0) {
        return Err(ModelError::domain("y", "the combined regime needs y > 0"));
    }
    if p.pi0 >= p.beta {
        return Err(ModelError::domain(
            "pi0",
            format!("pi0 = {} must be below beta = {}", p.pi0, p.beta),
        ));
    }
    Ok(p.y1)
}

fn check_r1(r1: f64) -> Result<()> {
    if r1 >= 0.0 && r1.is_finite() {
        Ok(())
    } else {
        Err(ModelError::domain("R1", format!("R1 = {r1} must be >= 0")))
    }
}

/// Lower threshold: the strategic type always defaults below `R1 - y`.
pub fn lower_threshold(r1: f64, y: f64) -> f64 {
    r1 - y
}

/// Upper threshold: the strategic type always repays above `R1`.
pub fn upper_threshold(r1: f64) -> f64 {
    r1
}

/// Start of the rationing region, `R1 - beta y`.
pub fn rationing_threshold(r1: f64, beta: f64, y: f64) -> f64 {
    r1 - beta * y
}

/// Posterior, default probability, acceptance and honest continuation value
/// at date 1. Regions are closed on the left; at `p1 = R1` lenders ration.
pub fn date1_behavior(p1: f64, r1: f64, params: &ModelParams) -> Result<Date1Outcome> {
    let y = combined_income(params)?;
    let cuts = [
        lower_threshold(r1, y),
        rationing_threshold(r1, params.beta, y),
        upper_threshold(r1),
    ];
    date1_behavior_with_cuts(p1, r1, params, cuts)
}

/// [`date1_behavior`] with the three region boundaries supplied by the caller.
/// Lets the verifier check that misplaced boundaries are detected.
pub fn date1_behavior_with_cuts(p1: f64, r1: f64, params: &ModelParams, cuts: [f64; 3]) -> Result<Date1Outcome> {
    let y = combined_income(params)?;
    check_r1(r1)?;
    if !(p1 >= 0.0 && p1.is_finite()) {
        return Err(ModelError::domain("p1", format!("p1 = {p1} must be >= 0")));
    }
    let (beta, pi0) = (params.beta, params.pi0);
    let out = if p1 < cuts[0] {
        Date1Outcome {
            region: Date1Region::CompleteSeparation,
            pi1: 1.0,
            delta1: 1.0,
            alpha: 1.0,
            u1_honest: 2.0 * y - r1 + p1,
        }
    } else if p1 < cuts[1] {
        let gap = r1 - p1;
        Date1Outcome {
            region: Date1Region::PartialSeparation,
            pi1: gap / y,
            delta1: 1.0 - pi0 / (1.0 - pi0) * (y / gap - 1.0),
            alpha: 1.0,
            u1_honest: y,
        }
    } else if p1 <= cuts[2] {
        Date1Outcome {
            region: Date1Region::CreditRationing,
            pi1: beta,
            delta1: (beta - pi0) / (beta * (1.0 - pi0)),
            alpha: (r1 - p1) / (beta * y),
            u1_honest: (1.0 + beta) * y - r1 + p1,
        }
    } else {
        // no date-1 loan is made, so acceptance is moot; report 1
        Date1Outcome {
            region: Date1Region::PoolingAutarky,
            pi1: pi0,
            delta1: 0.0,
            alpha: 1.0,
            u1_honest: (1.0 + beta) * y - r1 + p1,
        }
    };
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KeepOrSell {
    Keep,
    Sell,
}

/// The honest type's best collateralized date-1 loan and how it compares
/// with selling the asset. Utilities are net of the terms both options share.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KeepContract {
    pub contract: Contract,
    pub verdict: KeepOrSell,
    pub u_borrow: f64,
    pub u_sell: f64,
}

/// Date-1 collateralized contract of an honest borrower who kept the asset.
///
/// For `pi1 >= beta` the loan `pi1 y + (1 - pi1) p1` prices the strategic
/// type as always defaulting, which is right only when `y >= 2 p1`; for
/// smaller incomes it overstates what lenders would pay. Selling still wins.
pub fn date1_keep_contract(p1: f64, pi1: f64, params: &ModelParams) -> Result<KeepContract> {
    let p = params.validate()?;
    if p.y1 != p.y2 {
        return Err(ModelError::domain("y", "the combined regime needs y1 = y2"));
    }
    if !(p1 > 0.0 && p1.is_finite()) {
        return Err(ModelError::domain("p1", format!("p1 = {p1} must be > 0")));
    }
    if !(0.0..1.0).contains(&pi1) {
        return Err(ModelError::domain("pi1", format!("pi1 = {pi1} not in [0, 1)")));
    }
    let (beta, y) = (p.beta, p.y1);
    let (contract, u_borrow) = if pi1 < beta {
        let c = Contract::collateralized(
            (1.0 - beta * beta) / (1.0 - pi1) * p1,
            2.0 * (1.0 - beta) / (1.0 - pi1) * p1,
        );
        (c, beta * p1 + (1.0 - beta).powi(2) * p1 / (1.0 - pi1))
    } else {
        let c = Contract::collateralized(pi1 * y + (1.0 - pi1) * p1, y);
        (c, beta * p1 + (pi1 - beta) * y + (1.0 - pi1) * p1)
    };
    let u_sell = p1 + (pi1 - beta).max(0.0) * y;
    let verdict = if u_sell >= u_borrow {
        KeepOrSell::Sell
    } else {
        KeepOrSell::Keep
    };
    Ok(KeepContract {
        contract,
        verdict,
        u_borrow,
        u_sell,
    })
}

/// Honest date-0 value of the loan `R1` and the matching loan amount.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Date0Objective {
    pub u_keep: f64,
    pub b0: f64,
}

// a + b p on [lo, hi], clipped to [0, top]
fn linear_piece(a: f64, b: f64, lo: f64, hi: f64, top: f64) -> f64 {
    let lo = lo.clamp(0.0, top);
    let hi = hi.clamp(0.0, top);
    if hi <= lo {
        return 0.0;
    }
    a * (hi - lo) + 0.5 * b * (hi * hi - lo * lo)
}

// Average over U[0, 2 p0] of a function that is linear on each of the four
// date-1 regions; `coef[k] = (a, b)` on region k.
fn average_by_region(coef: [(f64, f64); 4], r1: f64, beta: f64, y: f64, p0: f64) -> f64 {
    let top = 2.0 * p0;
    let cuts = [
        f64::NEG_INFINITY,
        lower_threshold(r1, y),
        rationing_threshold(r1, beta, y),
        upper_threshold(r1),
        f64::INFINITY,
    ];
    let total: f64 = coef
        .iter()
        .enumerate()
        .map(|(k, &(a, b))| linear_piece(a, b, cuts[k], cuts[k + 1], top))
        .sum();
    total / top
}

/// Date-0 loan consistent with zero lender profit, by exact integration of
/// the expected date-1 recovery (repayment or the seized asset) over `p1`.
pub fn date0_loan(r1: f64, params: &ModelParams) -> Result<f64> {
    let y = combined_income(params)?;
    check_r1(r1)?;
    let (beta, pi0) = (params.beta, params.pi0);
    let coef = [
        (pi0 * r1, 1.0 - pi0),
        (pi0 * y, 1.0),
        (pi0 / beta * r1, 1.0 - pi0 / beta),
        (r1, 0.0),
    ];
    Ok(average_by_region(coef, r1, beta, y, params.p0))
}

/// Honest date-0 utility of keeping the asset with loan `R1`, integrating
/// the loan and discounted continuation region by region over the actual
/// support `[0, 2 p0]`. Valid for every `R1 >= 0`.
pub fn date0_objective_exact(r1: f64, params: &ModelParams) -> Result<f64> {
    let y = combined_income(params)?;
    check_r1(r1)?;
    let (beta, pi0) = (params.beta, params.pi0);
    let coef = [
        (2.0 * beta * y - (beta - pi0) * r1, 1.0 + beta - pi0),
        ((beta + pi0) * y, 1.0),
        (beta * (1.0 + beta) * y + (pi0 / beta - beta) * r1, 1.0 + beta - pi0 / beta),
        (beta * (1.0 + beta) * y + (1.0 - beta) * r1, beta),
    ];
    Ok(average_by_region(coef, r1, beta, y, params.p0))
}

/// Closed-form quadratic for the honest date-0 utility.
///
/// The quadratic assumes every region lies inside `[0, 2 p0]`, i.e.
/// `y <= R1 <= 2 p0`. `R1 > 2y` (infeasible) and `R1 > 2 p0` are rejected;
/// for `R1 < y` the formula is evaluated as written and then differs from
/// [`date0_objective_exact`].
pub fn date0_objective(r1: f64, params: &ModelParams) -> Result<Date0Objective> {
    let y = combined_income(params)?;
    check_r1(r1)?;
    if r1 > 2.0 * y + TOL {
        return Err(ModelError::domain("R1", format!("R1 = {r1} exceeds 2y = {}", 2.0 * y)));
    }
    let (beta, pi0, p0) = (params.beta, params.pi0, params.p0);
    if r1 > 2.0 * p0 + TOL {
        return Err(ModelError::domain("R1", format!("R1 = {r1} exceeds 2 p0 = {}", 2.0 * p0)));
    }
    let u_keep = -(1.0 - pi0) / (4.0 * p0) * r1 * r1
        + (1.0 - beta) * (1.0 + beta * y / (2.0 * p0)) * r1
        + (1.0 - beta) * (pi0 - beta * (1.0 + beta)) * y * y / (4.0 * p0)
        + beta * (1.0 + beta) * y
        + beta * p0;
    Ok(Date0Objective {
        u_keep,
        b0: date0_loan(r1, params)?,
    })
}

/// Utility from selling the asset at date 0 and staying in autarky.
pub fn sell_utility(params: &ModelParams) -> Result<f64> {
    let y = combined_income(params)?;
    Ok(params.beta * (1.0 + params.beta) * y + params.p0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Date0Action {
    Keep,
    Sell,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Date0Solution {
    #[serde(rename = "R1_star")]
    pub r1_star: f64,
    pub b0: f64,
    pub binding: bool,
    /// Whether `y <= R1_star <= 2 p0`, where the quadratic objective holds.
    /// Outside it `u_keep` comes from exact region-by-region integration.
    pub closed_form_valid: bool,
    pub u_keep: f64,
    pub u_sell: f64,
    pub decision: Date0Action,
}

/// Unconstrained maximizer of the quadratic objective.
pub fn unconstrained_r1(params: &ModelParams) -> Result<f64> {
    let y = combined_income(params)?;
    let (beta, pi0) = (params.beta, params.pi0);
    Ok((1.0 - beta) * (2.0 * params.p0 + beta * y) / (1.0 - pi0))
}

/// Income level up to which `R1 <= 2y` binds.
pub fn binding_income(params: &ModelParams) -> Result<f64> {
    combined_income(params)?;
    let (beta, pi0) = (params.beta, params.pi0);
    Ok(params.p0 / ((1.0 - pi0) / (1.0 - beta) - beta / 2.0))
}

/// Optimal date-0 repayment and the associated utilities and decision.
pub fn optimal_r1(params: &ModelParams) -> Result<Date0Solution> {
    let y = combined_income(params)?;
    let r1_star = unconstrained_r1(params)?.min(2.0 * y);
    let binding = y <= binding_income(params)?;
    let closed_form_valid = r1_star >= y - TOL && r1_star <= 2.0 * params.p0 + TOL;
    let u_keep = if closed_form_valid {
        date0_objective(r1_star, params)?.u_keep
    } else {
        date0_objective_exact(r1_star, params)?
    };
    let u_sell = sell_utility(params)?;
    let decision = if u_keep >= u_sell {
        Date0Action::Keep
    } else {
        Date0Action::Sell
    };
    Ok(Date0Solution {
        r1_star,
        b0: date0_loan(r1_star, params)?,
        binding,
        closed_form_valid,
        u_keep,
        u_sell,
        decision,
    })
}

/// Date-0 keep/sell choice; ties keep.
pub fn date0_decision(params: &ModelParams) -> Result<Date0Solution> {
    optimal_r1(params)
}

/// Closed-form lower bound on the prior that makes keeping optimal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pi0StarFormula {
    /// `1 - (1 - beta)(r + beta/2)` with `r = p0/y`.
    pub branch1: f64,
    /// Second branch with its constant as printed.
    pub branch2_literal: f64,
    /// Second branch with the constant of opposite sign, which is what the
    /// comparison of the objective at `R1 = 2y` with selling gives.
    pub branch2_corrected: f64,
    pub literal: f64,
    pub corrected: f64,
}

pub fn pi0_star_formula(beta: f64, y: f64, p0: f64) -> Result<Pi0StarFormula> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(ModelError::domain("beta", format!("beta = {beta} not in (0, 1)")));
    }
    if !(y > 0.0) {
        return Err(ModelError::domain("y", format!("y = {y} must be > 0")));
    }
    if !(p0 > 0.0) {
        return Err(ModelError::domain("p0", format!("p0 = {p0} must be > 0")));
    }
    let r = p0 / y;
    let branch1 = 1.0 - (1.0 - beta) * (r + beta / 2.0);
    let slope = 4.0 * (1.0 - beta) / (5.0 - beta) * (r - 2.0) * r;
    let constant = (beta * (3.0 + beta * beta) - 4.0 * (1.0 + beta * beta)) / (5.0 - beta);
    let branch2_literal = slope + constant;
    let branch2_corrected = slope - constant;
    Ok(Pi0StarFormula {
        branch1,
        branch2_literal,
        branch2_corrected,
        literal: branch1.max(branch2_literal),
        corrected: branch1.max(branch2_corrected),
    })
}

/// Range of `p0/y` on which the closed-form bound lies below `beta`.
pub fn keep_interval_formula(beta: f64) -> Result<(f64, f64)> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(ModelError::domain("beta", format!("beta = {beta} not in (0, 1)")));
    }
    let lo = 1.0 - beta / 2.0;
    let hi = 1.0 + (2.0 / (1.0 - beta) - beta / 2.0 * (1.0 - beta / 2.0)).sqrt();
    Ok((lo, hi))
}
