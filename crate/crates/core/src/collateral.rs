//! Borrowing against the asset when lenders know the borrower is strategic
//! (`pi0 = 0`). With `x = 0` every optimal loan is payoff-equivalent to
//! selling the asset; with a non-pledgeable dividend `x > 0` the borrower
//! may keep the asset and borrow safely.

use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};
use crate::model::Contract;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CollateralAction {
    Sell,
    KeepAndBorrow,
}

/// Safe loans are repaid for every date-2 price; risky ones default with
/// positive probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ContractMode {
    Safe,
    Risky,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollateralDecision {
    pub action: CollateralAction,
    /// For `Sell` this is the risky loan that defaults with probability one
    /// at date 1, i.e. the sale in loan form.
    pub contract: Contract,
    /// Date-0 price at and above which the asset is sold.
    pub threshold: f64,
    pub u_keep: f64,
    pub u_sell: f64,
}

fn check_beta(beta: f64) -> Result<()> {
    if beta > 0.0 && beta < 1.0 {
        Ok(())
    } else {
        Err(ModelError::domain("beta", format!("beta = {beta} not in (0, 1)")))
    }
}

fn check_nonneg(name: &'static str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(ModelError::domain(name, format!("{name} = {v} must be >= 0")))
    }
}

/// Date-2 price below which the loan `R2` is defaulted on: `max(R2 - x, 0)`.
pub fn date2_default_threshold(r2: f64, x: f64) -> Result<f64> {
    check_nonneg("R2", r2)?;
    check_nonneg("x", x)?;
    Ok((r2 - x).max(0.0))
}

/// Date-1 price at which the risky loan becomes preferable: `x / (2(1-beta))`.
pub fn date1_switch_price(x: f64, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    check_nonneg("x", x)?;
    Ok(x / (2.0 * (1.0 - beta)))
}

/// The loan offered at date 1 by a borrower who kept the asset.
///
/// Below the switch price the borrower rolls a safe loan `(x, x)`;
/// otherwise the risky contract
/// `(p1 + (1-2 beta)/p1 * (x/(2(1-beta)))^2, 2 p1 - beta x/(1-beta))`.
pub fn date1_optimal_contract(p1: f64, x: f64, beta: f64) -> Result<(Contract, ContractMode)> {
    if !(p1 > 0.0 && p1.is_finite()) {
        return Err(ModelError::domain("p1", format!("p1 = {p1} must be > 0")));
    }
    let switch = date1_switch_price(x, beta)?;
    if p1 < switch {
        return Ok((Contract::collateralized(x, x), ContractMode::Safe));
    }
    let b = p1 + (1.0 - 2.0 * beta) / p1 * switch * switch;
    let r = 2.0 * p1 - beta * x / (1.0 - beta);
    Ok((Contract::collateralized(b, r), ContractMode::Risky))
}

/// Date-1 value of repaying `R1` and keeping the asset to borrow against it.
pub fn date1_keep_value(p1: f64, r1: f64, x: f64, beta: f64) -> Result<f64> {
    let switch = date1_switch_price(x, beta)?;
    if p1 >= switch && p1 > 0.0 {
        Ok(x - r1 + p1 + x * x / (4.0 * p1 * (1.0 - beta)))
    } else {
        Ok(2.0 * x - r1 + beta * p1)
    }
}

/// Date-1 value of repaying `R1` and selling: `x - R1 + p1`.
pub fn date1_sell_value(p1: f64, r1: f64, x: f64) -> f64 {
    x - r1 + p1
}

/// Repayment `R1` at which the middle branch of the repayment threshold
/// hands over to the upper branch.
pub fn date1_branch_cut(x: f64, beta: f64) -> f64 {
    2.0 * x + beta * x / (2.0 * (1.0 - beta))
}

/// Date-1 price below which the date-0 loan `R1` is defaulted on.
pub fn date1_repayment_threshold(r1: f64, x: f64, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    check_nonneg("R1", r1)?;
    check_nonneg("x", x)?;
    if r1 <= 2.0 * x {
        return Ok(0.0);
    }
    if r1 <= date1_branch_cut(x, beta) {
        return Ok((r1 - 2.0 * x) / beta);
    }
    let shifted = r1 - x;
    let disc = (shifted * shifted - x * x / (1.0 - beta)).max(0.0);
    Ok(0.5 * (shifted + disc.sqrt()))
}

/// Date-0 price at and above which the asset is sold: `2x / (1 - beta^2)`.
pub fn date0_sell_threshold(x: f64, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    check_nonneg("x", x)?;
    Ok(2.0 * x / (1.0 - beta * beta))
}

/// Date-0 keep/sell choice. Ties go to `Sell`.
///
/// The utilities compare the two corner candidates of the date-0 problem:
/// the sale (`p0`) against the safe loan `(2x, 2x)` (`2x + beta^2 p0`).
pub fn date0_decision(p0: f64, x: f64, beta: f64) -> Result<CollateralDecision> {
    if !(p0 > 0.0 && p0.is_finite()) {
        return Err(ModelError::domain("p0", format!("p0 = {p0} must be > 0")));
    }
    let threshold = date0_sell_threshold(x, beta)?;
    let u_sell = p0;
    let u_keep = 2.0 * x + beta * beta * p0;
    if p0 >= threshold {
        let r1 = 2.0 * p0 + x + x * x / (8.0 * p0 * (1.0 - beta));
        Ok(CollateralDecision {
            action: CollateralAction::Sell,
            contract: Contract::collateralized(p0, r1),
            threshold,
            u_keep,
            u_sell,
        })
    } else {
        Ok(CollateralDecision {
            action: CollateralAction::KeepAndBorrow,
            contract: Contract::collateralized(2.0 * x, 2.0 * x),
            threshold,
            u_keep,
            u_sell,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::TOL;

    #[test]
    fn date2_threshold_examples() {
        assert_eq!(date2_default_threshold(3.0, 0.0).unwrap(), 3.0);
        assert_eq!(date2_default_threshold(3.0, 1.0).unwrap(), 2.0);
        assert_eq!(date2_default_threshold(0.5, 1.0).unwrap(), 0.0);
        assert!(date2_default_threshold(-1.0, 0.0).is_err());
    }

    #[test]
    fn date1_contract_examples() {
        let (c, m) = date1_optimal_contract(3.0, 0.0, 0.5).unwrap();
        assert_eq!(m, ContractMode::Risky);
        assert_eq!(c.pair(), [3.0, 6.0]);

        let (c, m) = date1_optimal_contract(0.8, 1.0, 0.5).unwrap();
        assert_eq!(m, ContractMode::Safe);
        assert_eq!(c.pair(), [1.0, 1.0]);

        let (c, m) = date1_optimal_contract(2.0, 1.0, 0.5).unwrap();
        assert_eq!(m, ContractMode::Risky);
        assert!((c.b - 2.0).abs() < TOL && (c.r - 3.0).abs() < TOL);
        assert!(c.kappa);
    }

    #[test]
    fn zero_dividend_contract_is_a_sale() {
        for &p1 in &[0.1, 1.0, 2.5, 7.0] {
            let (c, _) = date1_optimal_contract(p1, 0.0, 0.7).unwrap();
            let r1 = 1.3;
            assert_eq!(-r1 + c.b, -r1 + p1);
            assert_eq!(c.r, 2.0 * p1);
        }
    }

    #[test]
    fn repayment_threshold_branches() {
        assert_eq!(date1_repayment_threshold(1.5, 1.0, 0.5).unwrap(), 0.0);
        assert!((date1_repayment_threshold(2.5, 1.0, 0.5).unwrap() - 1.0).abs() < TOL);
        let p = date1_repayment_threshold(4.0, 1.0, 0.5).unwrap();
        assert!((p - 2.822876).abs() < 1e-6);
        assert!(date1_keep_value(p, 4.0, 1.0, 0.5).unwrap().abs() < TOL);
    }

    #[test]
    fn repayment_threshold_continuous_at_cut() {
        for &(x, beta) in &[(1.0, 0.5), (0.3, 0.2), (2.0, 0.9)] {
            let cut = date1_branch_cut(x, beta);
            let below = date1_repayment_threshold(cut * (1.0 - 1e-12), x, beta).unwrap();
            let above = date1_repayment_threshold(cut * (1.0 + 1e-12), x, beta).unwrap();
            assert!((below - above).abs() < 1e-9, "{below} vs {above}");
        }
    }

    #[test]
    fn zero_dividend_threshold_is_repayment() {
        for &r in &[0.0, 0.4, 3.0] {
            assert!((date1_repayment_threshold(r, 0.0, 0.6).unwrap() - r).abs() < TOL);
        }
    }

    #[test]
    fn date0_examples() {
        let keep = date0_decision(2.0, 1.0, 0.5).unwrap();
        assert_eq!(keep.action, CollateralAction::KeepAndBorrow);
        assert_eq!(keep.contract.pair(), [2.0, 2.0]);
        assert!((keep.threshold - 8.0 / 3.0).abs() < TOL);

        let sell = date0_decision(3.0, 1.0, 0.5).unwrap();
        assert_eq!(sell.action, CollateralAction::Sell);
        assert_eq!(sell.contract.b, 3.0);
        assert!((sell.contract.r - 7.083333).abs() < 1e-6);
        assert!((sell.u_sell - 3.0).abs() < TOL && (sell.u_keep - 2.75).abs() < TOL);

        for &p0 in &[0.01, 1.0, 50.0] {
            let d = date0_decision(p0, 0.0, 0.5).unwrap();
            assert_eq!(d.action, CollateralAction::Sell);
            assert_eq!(d.contract.pair(), [p0, 2.0 * p0]);
        }
    }

    #[test]
    fn tie_at_threshold_sells() {
        let t = date0_sell_threshold(1.0, 0.5).unwrap();
        assert_eq!(date0_decision(t, 1.0, 0.5).unwrap().action, CollateralAction::Sell);
    }

    #[test]
    fn keeping_dominates_selling_at_date1() {
        for &(x, beta) in &[(1.0, 0.5), (0.2, 0.9), (3.0, 0.1)] {
            for i in 1..=10_000 {
                let p1 = 10.0 * f64::from(i) / 10_000.0;
                let keep = date1_keep_value(p1, 1.0, x, beta).unwrap();
                assert!(keep >= date1_sell_value(p1, 1.0, x) - 1e-12);
            }
        }
    }

    #[test]
    fn sell_threshold_increases_in_x_and_beta() {
        let mut prev = 0.0;
        for i in 1..50 {
            let t = date0_sell_threshold(0.1 * f64::from(i), 0.5).unwrap();
            assert!(t > prev);
            prev = t;
        }
        let mut prev = 0.0;
        for i in 1..99 {
            let t = date0_sell_threshold(1.0, 0.01 * f64::from(i)).unwrap();
            assert!(t > prev);
            prev = t;
        }
    }
}
