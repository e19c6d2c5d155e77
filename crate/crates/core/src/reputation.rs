//! Borrowing against reputation alone (no asset). Membership checks for the
//! classes of pooling equilibria and the selection of the equilibrium that
//! is best for the honest type.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};
use crate::model::{Contract, TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegionLabel {
    Autarky,
    Pooling,
    Separating,
}

impl fmt::Display for RegionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RegionLabel::Autarky => "Autarky",
            RegionLabel::Pooling => "Pooling",
            RegionLabel::Separating => "Separating",
        };
        f.write_str(s)
    }
}

/// Selected region plus the two `pi0` boundaries at this `(beta, g)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReputationRegion {
    pub label: RegionLabel,
    /// Below this prior the outcome is autarky (equals `beta`).
    pub autarky_below: f64,
    /// From this prior on the types separate at date 1. Never below
    /// `autarky_below`; the pooling band is `[autarky_below, separating_from)`.
    pub separating_from: f64,
}

/// Contracts at dates 0 and 1 and the strategic type's date-1 default
/// probability along the equilibrium path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContractPlan {
    pub date0: Contract,
    pub date1: Contract,
    pub strategic_default_date1: f64,
}

impl ContractPlan {
    pub fn new(b0: f64, r1: f64, b1: f64, r2: f64, strategic_default_date1: f64) -> Self {
        ContractPlan {
            date0: Contract::unsecured(b0, r1),
            date1: Contract::unsecured(b1, r2),
            strategic_default_date1,
        }
    }

    pub fn autarky() -> Self {
        Self::new(0.0, 0.0, 0.0, 0.0, 0.0)
    }

    pub fn pairs(&self) -> [[f64; 2]; 2] {
        [self.date0.pair(), self.date1.pair()]
    }
}

fn check_prob(name: &'static str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(ModelError::domain(name, format!("{name} = {v} not in [0, 1]")))
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if beta > 0.0 && beta < 1.0 {
        Ok(())
    } else {
        Err(ModelError::domain("beta", format!("beta = {beta} not in (0, 1)")))
    }
}

/// Largest date-1 loan the honest type can take without risk:
/// `max((pi0 - beta) y2 / (1 - beta), 0)`.
pub fn max_riskless_loan(pi0: f64, beta: f64, y2: f64) -> Result<f64> {
    check_prob("pi0", pi0)?;
    check_beta(beta)?;
    if !(y2 >= 0.0) {
        return Err(ModelError::domain("y2", format!("y2 = {y2} must be >= 0")));
    }
    Ok(((pi0 - beta) * y2 / (1.0 - beta)).max(0.0))
}

/// Upper edge of the pooling band, `1 - (1 - beta)/(1 + g)`, written with
/// `(1 + g) = y2 / y1`. Equals `-inf` when `y2 = 0`.
///
/// Evaluated as `beta + (1 - beta) g / (1 + g)` so that flat income lands
/// exactly on `beta` and the band is empty rather than one ulp wide.
pub fn pooling_upper_boundary(beta: f64, y1: f64, y2: f64) -> f64 {
    if y2 == 0.0 {
        return f64::NEG_INFINITY;
    }
    beta + (1.0 - beta) * (y2 - y1) / y2
}

/// Honest type's date-0 utility from the pooling plan: `(1 - beta^2) Rbar`.
pub fn pooling_utility(pi0: f64, beta: f64, y2: f64) -> Result<f64> {
    Ok((1.0 - beta * beta) * max_riskless_loan(pi0, beta, y2)?)
}

/// Honest type's date-0 utility from the plan separating at date 1:
/// `(pi0 - beta) y1 + (pi0 - beta^2) Rbar`.
pub fn separating_utility(pi0: f64, beta: f64, y1: f64, y2: f64) -> Result<f64> {
    let rbar = max_riskless_loan(pi0, beta, y2)?;
    Ok((pi0 - beta) * y1 + (pi0 - beta * beta) * rbar)
}

/// Selects the equilibrium best for the honest type and returns its plan.
pub fn classify_region(pi0: f64, beta: f64, y1: f64, y2: f64) -> Result<(ReputationRegion, ContractPlan)> {
    check_prob("pi0", pi0)?;
    check_beta(beta)?;
    if !(y1 > 0.0 && y1.is_finite()) {
        return Err(ModelError::domain("y1", "income growth is undefined unless y1 > 0"));
    }
    let rbar = max_riskless_loan(pi0, beta, y2)?;
    let separating_from = pooling_upper_boundary(beta, y1, y2).max(beta);
    let label = if pi0 < beta {
        RegionLabel::Autarky
    } else if pi0 < separating_from {
        RegionLabel::Pooling
    } else {
        RegionLabel::Separating
    };
    let plan = match label {
        RegionLabel::Autarky => ContractPlan::autarky(),
        RegionLabel::Pooling => ContractPlan::new(rbar, rbar, pi0 * y2, y2, 0.0),
        RegionLabel::Separating => ContractPlan::new(pi0 * (rbar + y1), rbar + y1, rbar, rbar, 1.0),
    };
    let region = ReputationRegion {
        label,
        autarky_below: beta,
        separating_from,
    };
    Ok((region, plan))
}

/// Regions whose plan maximizes the honest type's utility, compared directly
/// rather than through the closed-form boundary. Two labels come back when
/// the utilities tie within `1e-12`. Used to cross-check [`classify_region`].
pub fn regions_by_utility(pi0: f64, beta: f64, y1: f64, y2: f64) -> Result<Vec<RegionLabel>> {
    if pi0 < beta {
        return Ok(vec![RegionLabel::Autarky]);
    }
    let pool = pooling_utility(pi0, beta, y2)?;
    let sep = separating_utility(pi0, beta, y1, y2)?;
    Ok(if (sep - pool).abs() <= 1e-12 {
        vec![RegionLabel::Pooling, RegionLabel::Separating]
    } else if sep > pool {
        vec![RegionLabel::Separating]
    } else {
        vec![RegionLabel::Pooling]
    })
}

/// Strategic type's date-1 default probability in the roll-over class:
/// `1 - pi0/(1 - pi0) * (R2/b1 - 1)`.
pub fn mixed_default_prob(b1: f64, r2: f64, pi0: f64) -> Result<f64> {
    if !(b1 > 0.0) {
        return Err(ModelError::domain("b1", format!("b1 = {b1} must be > 0")));
    }
    if !(pi0 > 0.0 && pi0 < 1.0) {
        return Err(ModelError::domain("pi0", format!("pi0 = {pi0} not in (0, 1)")));
    }
    let delta = 1.0 - pi0 / (1.0 - pi0) * (r2 / b1 - 1.0);
    if !(-TOL..=1.0 + TOL).contains(&delta) {
        return Err(ModelError::OutOfRange {
            what: "default probability",
            value: delta,
        });
    }
    Ok(delta.clamp(0.0, 1.0))
}

/// Equilibrium classes for plans that pool at date 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Lemma1Class {
    /// Autarky.
    I,
    /// Strategic type defaults for sure at date 1; risk-free roll-over after.
    #[serde(rename = "II(i)")]
    IIi,
    /// Exact roll-over at date 1 with mixed default.
    #[serde(rename = "II(ii)")]
    IIii,
    /// No default at date 1.
    III,
}

impl fmt::Display for Lemma1Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Lemma1Class::I => "I",
            Lemma1Class::IIi => "II(i)",
            Lemma1Class::IIii => "II(ii)",
            Lemma1Class::III => "III",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lemma1Report {
    /// Every class whose conditions hold, in the order I, II(i), II(ii), III.
    pub classes: Vec<Lemma1Class>,
    /// First violated condition for each class that failed.
    pub violations: Vec<(Lemma1Class, String)>,
    /// Mixed default probability when the plan is in class II(ii).
    pub delta1: Option<f64>,
}

impl Lemma1Report {
    /// First satisfied class, or `None` when the plan is not an equilibrium.
    pub fn primary(&self) -> Option<Lemma1Class> {
        self.classes.first().copied()
    }

    pub fn is_equilibrium(&self) -> bool {
        !self.classes.is_empty()
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= TOL
}

fn leq(a: f64, b: f64) -> bool {
    a <= b + TOL
}

type Check = std::result::Result<(), String>;

fn require(cond: bool, msg: impl FnOnce() -> String) -> Check {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Checks which equilibrium classes a plan belongs to.
pub fn lemma1_classify(plan: &ContractPlan, pi0: f64, beta: f64, y1: f64, y2: f64) -> Result<Lemma1Report> {
    check_prob("pi0", pi0)?;
    check_beta(beta)?;
    let (b0, r1) = (plan.date0.b, plan.date0.r);
    let (b1, r2) = (plan.date1.b, plan.date1.r);
    if [b0, r1, b1, r2].iter().any(|v| !(*v >= 0.0)) {
        return Err(ModelError::domain("plan", "contract amounts must be >= 0"));
    }

    let class_i = || -> Check {
        require([b0, r1, b1, r2].iter().all(|v| v.abs() <= TOL), || {
            "autarky needs all contracts to be (0, 0)".into()
        })
    };

    let class_ii_i = || -> Check {
        require(pi0 >= beta * beta - TOL, || format!("pi0 = {pi0} < beta^2"))?;
        require(close(b0, pi0 * r1), || format!("b0 = {b0} != pi0 R1 = {}", pi0 * r1))?;
        require(close(b1, r2), || format!("b1 = {b1} != R2 = {r2}"))?;
        require(leq(b1, r1), || format!("R1 = {r1} < b1 = {b1}: strategic type would repay"))?;
        let mut cap = y1 + b1;
        if pi0 < beta {
            cap = cap.min(beta * (1.0 - beta) / (beta - pi0) * b1);
        }
        require(leq(r1, cap), || format!("R1 = {r1} exceeds cap {cap}"))?;
        require(leq(r2, y2), || format!("R2 = {r2} exceeds y2 = {y2}"))
    };

    let mut delta1 = None;
    let mut class_ii_ii = || -> Check {
        require(pi0 >= beta * beta - TOL, || format!("pi0 = {pi0} < beta^2"))?;
        require(close(b1, r1), || format!("b1 = {b1} != R1 = {r1}"))?;
        require(close(b0, pi0 * r2), || format!("b0 = {b0} != pi0 R2 = {}", pi0 * r2))?;
        require(leq(r2, y1 + y2), || format!("R2 = {r2} exceeds y1 + y2"))?;
        let d = mixed_default_prob(b1, r2, pi0).map_err(|e| e.to_string())?;
        delta1 = Some(d);
        Ok(())
    };
    let ii_ii = class_ii_ii();

    let class_iii = || -> Check {
        require(pi0 >= beta - TOL, || format!("pi0 = {pi0} < beta"))?;
        require(close(b0, r1), || format!("b0 = {b0} != R1 = {r1}"))?;
        require(close(b1, pi0 * r2), || format!("b1 = {b1} != pi0 R2 = {}", pi0 * r2))?;
        require(leq(r1, y1 + b1), || format!("R1 = {r1} exceeds y1 + b1"))?;
        require(leq(r2, y2), || format!("R2 = {r2} exceeds y2 = {y2}"))
    };

    let outcomes = [
        (Lemma1Class::I, class_i()),
        (Lemma1Class::IIi, class_ii_i()),
        (Lemma1Class::IIii, ii_ii),
        (Lemma1Class::III, class_iii()),
    ];
    let mut report = Lemma1Report {
        classes: Vec::new(),
        violations: Vec::new(),
        delta1: None,
    };
    for (class, outcome) in outcomes {
        match outcome {
            Ok(()) => report.classes.push(class),
            Err(why) => report.violations.push((class, why)),
        }
    }
    if report.classes.contains(&Lemma1Class::IIii) {
        report.delta1 = delta1;
    }
    Ok(report)
}

/// The class an equilibrium plan of each region is expected to satisfy.
pub fn expected_class(label: RegionLabel) -> Lemma1Class {
    match label {
        RegionLabel::Autarky => Lemma1Class::I,
        RegionLabel::Pooling => Lemma1Class::III,
        RegionLabel::Separating => Lemma1Class::IIi,
    }
}

/// One row of the `(beta, pi0)` region map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionPoint {
    pub beta: f64,
    pub pi0: f64,
    pub g: f64,
    pub label: RegionLabel,
}

/// Region labels on an `n x n` grid of cell midpoints in `(0,1)^2`, with
/// `y1 = 1` and `y2 = 1 + g`.
pub fn region_map(g: f64, n: usize) -> Result<Vec<RegionPoint>> {
    if !(g > -1.0) {
        return Err(ModelError::domain("g", format!("g = {g} must exceed -1")));
    }
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        let beta = (i as f64 + 0.5) / n as f64;
        for j in 0..n {
            let pi0 = (j as f64 + 0.5) / n as f64;
            let (region, _) = classify_region(pi0, beta, 1.0, 1.0 + g)?;
            out.push(RegionPoint {
                beta,
                pi0,
                g,
                label: region.label,
            });
        }
    }
    Ok(out)
}
