//! Overlapping generations: every date a unit-mass cohort is born (share
//! `pi0` honest) and lives three dates. All cohorts alive at a date face the
//! same, exogenous asset price. The young decide keep/sell taking the
//! current price as their date-0 price; the middle-aged play the date-1
//! game at their own promise; the old settle date-1 loans.

use serde::{Deserialize, Serialize};

use crate::combined::{combined_income, date0_decision, date1_behavior, Date0Action, Date1Region};
use crate::error::{ModelError, Result};
use crate::model::{sample_price_path, ModelParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CohortStatus {
    /// Sold the asset when young; autarky thereafter.
    Sold,
    /// Kept the asset and owes `R1`.
    Borrowing,
    Defaulted,
    /// Repaid and took no new loan.
    Repaid,
    /// Repaid and was granted a new unsecured loan.
    Financed,
    /// Repaid, applied for a loan and was turned down.
    Rationed,
    /// Old, with nothing outstanding.
    Settled,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct TypeMass {
    pub honest: f64,
    pub strategic: f64,
}

impl TypeMass {
    pub fn total(&self) -> f64 {
        self.honest + self.strategic
    }

    fn scale(self, h: f64, s: f64) -> TypeMass {
        TypeMass {
            honest: self.honest * h,
            strategic: self.strategic * s,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Generation {
    pub birth: usize,
    #[serde(rename = "R1")]
    pub r1: f64,
    pub masses: Vec<(CohortStatus, TypeMass)>,
}

impl Generation {
    pub fn mass(&self, status: CohortStatus) -> TypeMass {
        self.masses
            .iter()
            .filter(|(s, _)| *s == status)
            .fold(TypeMass::default(), |acc, (_, m)| TypeMass {
                honest: acc.honest + m.honest,
                strategic: acc.strategic + m.strategic,
            })
    }

    pub fn total(&self) -> f64 {
        self.masses.iter().map(|(_, m)| m.total()).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OlgState {
    pub date: usize,
    pub price: f64,
    pub young: Option<Generation>,
    pub middle: Option<Generation>,
    pub old: Option<Generation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OlgDateStats {
    pub date: usize,
    pub price: f64,
    pub young_keep_mass: f64,
    pub young_sell_mass: f64,
    pub middle_region: Option<Date1Region>,
    /// Strategic middle-aged who had borrowed at date 0.
    pub middle_strategic_borrowers: f64,
    pub middle_default_mass: f64,
    pub middle_repay_mass: f64,
    pub middle_loan_mass: f64,
    pub middle_rationed_mass: f64,
    pub old_default_mass: f64,
    pub old_repay_mass: f64,
    pub old_settled_mass: f64,
    pub total_mass: f64,
    pub expected_mass: f64,
}

impl OlgDateStats {
    pub fn conserved(&self, tol: f64) -> bool {
        (self.total_mass - self.expected_mass).abs() <= tol
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OlgRun {
    pub seed: Option<u64>,
    pub prices: Vec<f64>,
    pub states: Vec<OlgState>,
    pub stats: Vec<OlgDateStats>,
}

fn young(params: &ModelParams, date: usize, price: f64) -> Result<Generation> {
    let entering = TypeMass {
        honest: params.pi0,
        strategic: 1.0 - params.pi0,
    };
    let sold = Generation {
        birth: date,
        r1: 0.0,
        masses: vec![(CohortStatus::Sold, entering)],
    };
    if !(price > 0.0) {
        return Ok(sold);
    }
    let sol = date0_decision(&ModelParams { p0: price, ..*params })?;
    Ok(match sol.decision {
        Date0Action::Keep => Generation {
            birth: date,
            r1: sol.r1_star,
            masses: vec![(CohortStatus::Borrowing, entering)],
        },
        Date0Action::Sell => sold,
    })
}

fn middle(params: &ModelParams, gen: &Generation, price: f64) -> Result<(Generation, Option<Date1Region>)> {
    let borrowing = gen.mass(CohortStatus::Borrowing);
    let mut masses: Vec<(CohortStatus, TypeMass)> = gen
        .masses
        .iter()
        .filter(|(s, _)| *s != CohortStatus::Borrowing)
        .copied()
        .collect();
    if borrowing.total() == 0.0 {
        return Ok((Generation { masses, ..gen.clone() }, None));
    }
    let o = date1_behavior(price, gen.r1, params)?;
    masses.push((CohortStatus::Defaulted, borrowing.scale(0.0, o.delta1)));
    let repaid = borrowing.scale(1.0, 1.0 - o.delta1);
    if o.region != Date1Region::PoolingAutarky && o.pi1 >= params.beta {
        masses.push((CohortStatus::Financed, repaid.scale(o.alpha, o.alpha)));
        masses.push((CohortStatus::Rationed, repaid.scale(1.0 - o.alpha, 1.0 - o.alpha)));
    } else {
        masses.push((CohortStatus::Repaid, repaid));
    }
    Ok((Generation { masses, ..gen.clone() }, Some(o.region)))
}

fn old(gen: &Generation) -> Generation {
    let financed = gen.mass(CohortStatus::Financed);
    let rest: f64 = gen
        .masses
        .iter()
        .filter(|(s, _)| *s != CohortStatus::Financed)
        .map(|(_, m)| m.total())
        .sum();
    let settled_honest: f64 = gen
        .masses
        .iter()
        .filter(|(s, _)| *s != CohortStatus::Financed)
        .map(|(_, m)| m.honest)
        .sum();
    Generation {
        masses: vec![
            (CohortStatus::Defaulted, TypeMass { honest: 0.0, strategic: financed.strategic }),
            (CohortStatus::Repaid, TypeMass { honest: financed.honest, strategic: 0.0 }),
            (
                CohortStatus::Settled,
                TypeMass {
                    honest: settled_honest,
                    strategic: rest - settled_honest,
                },
            ),
        ],
        ..gen.clone()
    }
}

/// OLG run on a price path drawn from `U[0, 2 p_{t-1}]` starting at `p0`.
pub fn olg_simulate(params: &ModelParams, periods: usize, seed: u64) -> Result<OlgRun> {
    if periods < 3 {
        return Err(ModelError::domain("periods", "need at least 3 periods"));
    }
    let path = sample_price_path(params.p0, periods - 1, seed)?;
    let mut run = olg_simulate_with_prices(params, &path.p)?;
    run.seed = Some(seed);
    Ok(run)
}

/// OLG run on a given price path (one entry per date).
pub fn olg_simulate_with_prices(params: &ModelParams, prices: &[f64]) -> Result<OlgRun> {
    combined_income(params)?;
    if let Some(bad) = prices.iter().find(|p| !(**p >= 0.0 && p.is_finite())) {
        return Err(ModelError::domain("price", format!("price {bad} must be >= 0")));
    }
    let mut states: Vec<OlgState> = Vec::with_capacity(prices.len());
    let mut stats = Vec::with_capacity(prices.len());
    for (t, &price) in prices.iter().enumerate() {
        let prev = states.last();
        let y_gen = young(params, t, price)?;
        let (m_gen, region) = match prev.and_then(|s| s.young.as_ref()) {
            Some(g) => {
                let (g, r) = middle(params, g, price)?;
                (Some(g), r)
            }
            None => (None, None),
        };
        let o_gen = prev.and_then(|s| s.middle.as_ref()).map(old);

        let m = |g: &Option<Generation>, s: CohortStatus| g.as_ref().map_or(TypeMass::default(), |g| g.mass(s));
        let prev_borrowing = prev
            .and_then(|s| s.young.as_ref())
            .map_or(0.0, |g| g.mass(CohortStatus::Borrowing).strategic);
        let gens = [Some(&y_gen), m_gen.as_ref(), o_gen.as_ref()];
        let total_mass: f64 = gens.iter().flatten().map(|g| g.total()).sum();
        let expected_mass = gens.iter().flatten().count() as f64;
        let y_opt = Some(y_gen.clone());
        stats.push(OlgDateStats {
            date: t,
            price,
            young_keep_mass: m(&y_opt, CohortStatus::Borrowing).total(),
            young_sell_mass: m(&y_opt, CohortStatus::Sold).total(),
            middle_region: region,
            middle_strategic_borrowers: prev_borrowing,
            middle_default_mass: if region.is_some() {
                m(&m_gen, CohortStatus::Defaulted).total()
            } else {
                0.0
            },
            middle_repay_mass: [CohortStatus::Repaid, CohortStatus::Financed, CohortStatus::Rationed]
                .iter()
                .map(|&s| m(&m_gen, s).total())
                .sum(),
            middle_loan_mass: m(&m_gen, CohortStatus::Financed).total(),
            middle_rationed_mass: m(&m_gen, CohortStatus::Rationed).total(),
            old_default_mass: m(&o_gen, CohortStatus::Defaulted).total(),
            old_repay_mass: m(&o_gen, CohortStatus::Repaid).total(),
            old_settled_mass: m(&o_gen, CohortStatus::Settled).total(),
            total_mass,
            expected_mass,
        });
        states.push(OlgState {
            date: t,
            price,
            young: Some(y_gen),
            middle: m_gen,
            old: o_gen,
        });
    }
    Ok(OlgRun {
        seed: None,
        prices: prices.to_vec(),
        states,
        stats,
    })
}
