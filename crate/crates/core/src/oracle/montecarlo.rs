//! Monte Carlo over borrower types and date-1 prices, playing the
//! equilibrium of the combined regime at a given date-0 promise `R1`.
//!
//! Path `i` draws from stream `i` of the seed, so results do not depend on
//! how paths are spread across threads. Paths are reduced in fixed-size
//! chunks whose partial sums are combined in chunk order.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combined::{combined_income, date0_decision, date1_behavior, Date0Action, Date1Region};
use crate::error::{ModelError, Result};
use crate::model::{CounterRng, ModelParams};

const SLOT_P1: u64 = 1;
const SLOT_TYPE: u64 = 16;
const SLOT_DEFAULT: u64 = 17;
const SLOT_ACCEPT: u64 = 18;
const CHUNK: u64 = 4096;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimStats {
    pub n_paths: u64,
    pub seed: u64,
    #[serde(rename = "R1")]
    pub r1: f64,
    pub n_honest: u64,
    pub n_strategic: u64,
    /// Date-1 default rate among strategic borrowers.
    pub date1_default_rate: f64,
    pub date1_default_se: f64,
    /// Date-1 default rate over all borrowers.
    pub date1_default_rate_all: f64,
    /// Defaults on date-1 loans, as a share of date-1 loans granted.
    pub date2_default_rate: f64,
    /// Share of repaying borrowers who applied and were turned down.
    pub rationed_rate: f64,
    /// Date-0 decision for these parameters (the continuation is simulated
    /// at the given `R1` either way).
    pub sell_rate_date0: f64,
    pub keep_rate_date0: f64,
    /// Lenders' posterior averaged over borrowers who repaid at date 1.
    pub mean_posterior_after_repay: f64,
    /// Paths per date-1 region, in `Date1Region::ALL` order.
    pub region_counts: [u64; 4],
}

#[derive(Debug, Clone, Copy, Default)]
struct Partial {
    honest: u64,
    strategic: u64,
    strategic_defaults: u64,
    loans: u64,
    loan_defaults: u64,
    applicants: u64,
    rationed: u64,
    repaid: u64,
    posterior_sum: f64,
    regions: [u64; 4],
}

impl Partial {
    fn merge(mut self, o: Partial) -> Partial {
        self.honest += o.honest;
        self.strategic += o.strategic;
        self.strategic_defaults += o.strategic_defaults;
        self.loans += o.loans;
        self.loan_defaults += o.loan_defaults;
        self.applicants += o.applicants;
        self.rationed += o.rationed;
        self.repaid += o.repaid;
        self.posterior_sum += o.posterior_sum;
        for k in 0..4 {
            self.regions[k] += o.regions[k];
        }
        self
    }
}

/// Monte Carlo with the type mix given by `pi0`.
pub fn monte_carlo(params: &ModelParams, r1: f64, n: u64, seed: u64) -> Result<SimStats> {
    monte_carlo_with(params, r1, n, seed, None)
}

/// Monte Carlo where `honest_share`, if given, replaces `pi0` as the
/// population share of honest borrowers. Lenders still hold the prior `pi0`,
/// so the equilibrium played is unchanged.
pub fn monte_carlo_with(params: &ModelParams, r1: f64, n: u64, seed: u64, honest_share: Option<f64>) -> Result<SimStats> {
    let y = combined_income(params)?;
    if n == 0 {
        return Err(ModelError::domain("n", "need at least one path"));
    }
    let share = honest_share.unwrap_or(params.pi0);
    if !(0.0..=1.0).contains(&share) {
        return Err(ModelError::domain("honest_share", format!("{share} not in [0, 1]")));
    }
    let beta = params.beta;
    // surfaces domain errors before entering the parallel section
    date1_behavior(params.p0, r1, params)?;

    let run_path = |i: u64, acc: &mut Partial| -> Result<()> {
        let mut rng = CounterRng::new(seed, i);
        let p1 = 2.0 * params.p0 * rng.uniform(SLOT_P1);
        let honest = rng.uniform(SLOT_TYPE) < share;
        let o = date1_behavior(p1, r1, params)?;
        acc.regions[o.region.index()] += 1;
        if honest {
            acc.honest += 1;
        } else {
            acc.strategic += 1;
            if rng.uniform(SLOT_DEFAULT) < o.delta1 {
                acc.strategic_defaults += 1;
                return Ok(());
            }
        }
        acc.repaid += 1;
        acc.posterior_sum += o.pi1;
        if o.region != Date1Region::PoolingAutarky && o.pi1 >= beta && y > 0.0 {
            acc.applicants += 1;
            if rng.uniform(SLOT_ACCEPT) < o.alpha {
                acc.loans += 1;
                if !honest {
                    acc.loan_defaults += 1;
                }
            } else {
                acc.rationed += 1;
            }
        }
        Ok(())
    };

    let chunks = n.div_ceil(CHUNK);
    let partials: Vec<Partial> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = Partial::default();
            for i in c * CHUNK..((c + 1) * CHUNK).min(n) {
                run_path(i, &mut acc)?;
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    let t = partials.into_iter().fold(Partial::default(), Partial::merge);

    let ratio = |a: u64, b: u64| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    let rate = ratio(t.strategic_defaults, t.strategic);
    let se = if t.strategic == 0 {
        0.0
    } else {
        (rate * (1.0 - rate) / t.strategic as f64).sqrt()
    };
    let keep = date0_decision(params)?.decision == Date0Action::Keep;
    Ok(SimStats {
        n_paths: n,
        seed,
        r1,
        n_honest: t.honest,
        n_strategic: t.strategic,
        date1_default_rate: rate,
        date1_default_se: se,
        date1_default_rate_all: ratio(t.strategic_defaults, n),
        date2_default_rate: ratio(t.loan_defaults, t.loans),
        rationed_rate: ratio(t.rationed, t.repaid),
        sell_rate_date0: if keep { 0.0 } else { 1.0 },
        keep_rate_date0: if keep { 1.0 } else { 0.0 },
        mean_posterior_after_repay: if t.repaid == 0 {
            params.pi0
        } else {
            t.posterior_sum / t.repaid as f64
        },
        region_counts: t.regions,
    })
}

/// Expected strategic date-1 default probability under `p1 ~ U[0, 2 p0]`,
/// integrated piece by piece in closed form (the mixing piece has a log).
pub fn analytic_strategic_default_rate(params: &ModelParams, r1: f64) -> Result<f64> {
    let y = combined_income(params)?;
    let (beta, pi0) = (params.beta, params.pi0);
    let top = 2.0 * params.p0;
    let clip = |a: f64, b: f64| (a.clamp(0.0, top), b.clamp(0.0, top));
    let k = pi0 / (1.0 - pi0);

    let (a, b) = clip(f64::NEG_INFINITY, r1 - y);
    let complete = b - a;
    let (a, b) = clip(r1 - y, r1 - beta * y);
    let partial = if b > a {
        (b - a) * (1.0 + k) - k * y * ((r1 - a) / (r1 - b)).ln()
    } else {
        0.0
    };
    let (a, b) = clip(r1 - beta * y, r1);
    let rationing = (b - a) * (beta - pi0) / (beta * (1.0 - pi0));
    Ok((complete + partial + rationing) / top)
}
