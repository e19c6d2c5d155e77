//! Residual checks of the date-1 equilibrium on a price grid: Bayes
//! consistency, strategic indifference where the strategic type mixes,
//! best responses where it does not, and the honest continuation value.

use serde::{Deserialize, Serialize};

use super::{linspace, GridSpec};
use crate::combined::{
    combined_income, date1_behavior, date1_behavior_with_cuts, lower_threshold, rationing_threshold,
    upper_threshold, Date1Outcome, Date1Region,
};
use crate::error::{ModelError, Result};
use crate::model::{bayes_update, ModelParams};

/// Size of the perturbation applied by [`Date1Mutation`].
pub const MUTATION_SIZE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MutField {
    Pi1,
    Delta1,
    Alpha,
    U1,
}

/// A deliberate error in the date-1 outcome, used to show the verifier
/// catches it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Date1Mutation {
    /// Add [`MUTATION_SIZE`] to one output on one region.
    Field(Date1Region, MutField),
    /// Shift boundary `k` (0 = lower, 1 = rationing, 2 = upper) up.
    Cut(usize),
    /// Replace the default probability on one region by zero.
    ZeroDelta(Date1Region),
}

impl Date1Mutation {
    /// Every coefficient-level perturbation.
    pub fn all() -> Vec<Date1Mutation> {
        let fields = [MutField::Pi1, MutField::Delta1, MutField::Alpha, MutField::U1];
        let mut out: Vec<_> = Date1Region::ALL
            .iter()
            .flat_map(|&r| fields.iter().map(move |&f| Date1Mutation::Field(r, f)))
            .collect();
        out.extend((0..3).map(Date1Mutation::Cut));
        out
    }
}

/// Date-1 outcome with `mutation` applied.
pub fn mutated_behavior(p1: f64, r1: f64, params: &ModelParams, mutation: Date1Mutation) -> Result<Date1Outcome> {
    let y = combined_income(params)?;
    let mut cuts = [
        lower_threshold(r1, y),
        rationing_threshold(r1, params.beta, y),
        upper_threshold(r1),
    ];
    if let Date1Mutation::Cut(k) = mutation {
        cuts[k] += MUTATION_SIZE;
    }
    let mut o = date1_behavior_with_cuts(p1, r1, params, cuts)?;
    match mutation {
        Date1Mutation::Field(region, field) if o.region == region => {
            let slot = match field {
                MutField::Pi1 => &mut o.pi1,
                MutField::Delta1 => &mut o.delta1,
                MutField::Alpha => &mut o.alpha,
                MutField::U1 => &mut o.u1_honest,
            };
            *slot += MUTATION_SIZE;
        }
        Date1Mutation::ZeroDelta(region) if o.region == region => o.delta1 = 0.0,
        _ => {}
    }
    Ok(o)
}

/// Largest residuals over the grid, by kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Date1Residuals {
    #[serde(rename = "R1")]
    pub r1: f64,
    pub n_points: usize,
    /// `|bayes_update(pi0, delta1) - pi1|`.
    pub bayes: f64,
    /// Strategic repay payoff minus autarky, where the strategic type mixes.
    pub indifference: f64,
    /// Honest continuation versus its direct payoff computation.
    pub u1_mismatch: f64,
    /// Distance of `delta1` from the strategic best response where that
    /// response is strict.
    pub best_response: f64,
    /// Distance of `pi1`, `delta1`, `alpha` outside `[0, 1]`.
    pub range: f64,
    /// Grid points per region, in [`Date1Region::ALL`] order.
    pub region_counts: [usize; 4],
    /// Regions of zero length inside the price support.
    pub empty_regions: Vec<Date1Region>,
}

impl Date1Residuals {
    pub fn max_residual(&self) -> f64 {
        [self.bayes, self.indifference, self.u1_mismatch, self.best_response, self.range]
            .into_iter()
            .fold(0.0, f64::max)
    }

    pub fn within(&self, tol: f64) -> bool {
        self.max_residual() < tol
    }
}

fn outside_unit(v: f64) -> f64 {
    (-v).max(v - 1.0).max(0.0)
}

/// Residuals of the implemented date-1 equilibrium.
pub fn grid_verify_date1(params: &ModelParams, r1: f64, grid: &GridSpec) -> Result<Date1Residuals> {
    grid_verify_date1_with(params, r1, grid, |p| date1_behavior(p, r1, params))
}

/// Residuals of an arbitrary date-1 behavior, e.g. a mutated one.
pub fn grid_verify_date1_with<F>(params: &ModelParams, r1: f64, grid: &GridSpec, behavior: F) -> Result<Date1Residuals>
where
    F: Fn(f64) -> Result<Date1Outcome>,
{
    let grid = grid.validate()?;
    let y = combined_income(params)?;
    if !(r1 >= 0.0) {
        return Err(ModelError::domain("R1", format!("R1 = {r1} must be >= 0")));
    }
    let (beta, pi0) = (params.beta, params.pi0);
    let autarky = (1.0 + beta) * y;
    let mut rep = Date1Residuals {
        r1,
        n_points: grid.price_points,
        bayes: 0.0,
        indifference: 0.0,
        u1_mismatch: 0.0,
        best_response: 0.0,
        range: 0.0,
        region_counts: [0; 4],
        empty_regions: Vec::new(),
    };
    for p1 in linspace(0.0, 2.0 * params.p0, grid.price_points) {
        let o = behavior(p1)?;
        rep.region_counts[o.region.index()] += 1;
        let range = outside_unit(o.pi1).max(outside_unit(o.delta1)).max(outside_unit(o.alpha));
        rep.range = rep.range.max(range);

        match bayes_update(pi0, o.delta1.clamp(0.0, 1.0)) {
            Ok(post) => rep.bayes = rep.bayes.max((post - o.pi1).abs()),
            Err(ModelError::Indeterminate) => {}
            Err(e) => return Err(e),
        }

        // strategic type: repay, sell, borrow pi1 y if offered, default later
        let offered = if o.pi1 >= beta { o.alpha * o.pi1 * y } else { 0.0 };
        let repay = autarky - r1 + p1 + offered;
        match o.region {
            Date1Region::PartialSeparation | Date1Region::CreditRationing => {
                rep.indifference = rep.indifference.max((repay - autarky).abs());
            }
            Date1Region::CompleteSeparation | Date1Region::PoolingAutarky => {
                let br = if repay < autarky { 1.0 } else { 0.0 };
                rep.best_response = rep.best_response.max((o.delta1 - br).abs());
            }
        }

        let honest = autarky - r1 + p1 + o.alpha * (o.pi1 - beta).max(0.0) * y;
        rep.u1_mismatch = rep.u1_mismatch.max((honest - o.u1_honest).abs());
    }

    let top = 2.0 * params.p0;
    let cuts = [
        f64::NEG_INFINITY,
        lower_threshold(r1, y),
        rationing_threshold(r1, beta, y),
        upper_threshold(r1),
        f64::INFINITY,
    ];
    for (k, region) in Date1Region::ALL.iter().enumerate() {
        let lo = cuts[k].clamp(0.0, top);
        let hi = cuts[k + 1].clamp(0.0, top);
        if hi <= lo {
            rep.empty_regions.push(*region);
        }
    }
    Ok(rep)
}
