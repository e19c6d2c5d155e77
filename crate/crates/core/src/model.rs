//! Model primitives shared by every regime: parameters, contracts, the
//! budget identity, linear discounted utility, Bayes updating of the
//! lenders' belief, and the uniform martingale price law
//! `p[t+1] | p[t] ~ U[0, 2 p[t]]`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};

/// Absolute tolerance used for closed-form comparisons.
pub const TOL: f64 = 1e-9;

/// Model primitives.
///
/// `beta` discounts the future, `pi0` is the lenders' prior that the
/// borrower is honest, `y1`/`y2` are non-financial incomes at dates 1 and 2,
/// `p0` is the initial asset price and `x` the per-period dividend that
/// only the holder can collect.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams")]
pub struct ModelParams {
    pub beta: f64,
    pub pi0: f64,
    pub y1: f64,
    pub y2: f64,
    pub p0: f64,
    pub x: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    beta: f64,
    pi0: f64,
    #[serde(default)]
    y: Option<f64>,
    #[serde(default)]
    y1: Option<f64>,
    #[serde(default)]
    y2: Option<f64>,
    p0: f64,
    #[serde(default)]
    x: f64,
}

impl TryFrom<RawParams> for ModelParams {
    type Error = String;

    fn try_from(raw: RawParams) -> std::result::Result<Self, String> {
        let (y1, y2) = match (raw.y, raw.y1, raw.y2) {
            (Some(y), None, None) => (y, y),
            (None, Some(y1), Some(y2)) => (y1, y2),
            (Some(_), _, _) => return Err("`y` cannot be combined with `y1`/`y2`".into()),
            _ => return Err("income missing: give `y` or both `y1` and `y2`".into()),
        };
        Ok(ModelParams {
            beta: raw.beta,
            pi0: raw.pi0,
            y1,
            y2,
            p0: raw.p0,
            x: raw.x,
        })
    }
}

impl ModelParams {
    pub fn new(beta: f64, pi0: f64, y1: f64, y2: f64, p0: f64, x: f64) -> Self {
        ModelParams {
            beta,
            pi0,
            y1,
            y2,
            p0,
            x,
        }
    }

    /// Flat income `y1 = y2 = y`, no dividend.
    pub fn flat(beta: f64, pi0: f64, y: f64, p0: f64) -> Self {
        Self::new(beta, pi0, y, y, p0, 0.0)
    }

    /// Checks every invariant and returns the same values.
    pub fn validate(self) -> Result<Self> {
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(ModelError::domain("beta", format!("beta = {} not in (0, 1)", self.beta)));
        }
        if !(0.0..=1.0).contains(&self.pi0) {
            return Err(ModelError::domain("pi0", format!("pi0 = {} not in [0, 1]", self.pi0)));
        }
        if !(self.y1 >= 0.0 && self.y1.is_finite()) {
            return Err(ModelError::domain("y1", format!("y1 = {} must be >= 0", self.y1)));
        }
        if !(self.y2 >= 0.0 && self.y2.is_finite()) {
            return Err(ModelError::domain("y2", format!("y2 = {} must be >= 0", self.y2)));
        }
        if !(self.p0 > 0.0 && self.p0.is_finite()) {
            return Err(ModelError::domain("p0", format!("p0 = {} must be > 0", self.p0)));
        }
        if !(self.x >= 0.0 && self.x.is_finite()) {
            return Err(ModelError::domain("x", format!("x = {} must be >= 0", self.x)));
        }
        Ok(self)
    }

    /// Growth of non-financial income between dates 1 and 2.
    pub fn income_growth(&self) -> Result<f64> {
        if self.y1 <= 0.0 {
            return Err(ModelError::domain("y1", "income growth needs y1 > 0"));
        }
        Ok((self.y2 - self.y1) / self.y1)
    }
}

/// Free-function form of [`ModelParams::validate`].
pub fn validate_params(raw: ModelParams) -> Result<ModelParams> {
    raw.validate()
}

/// A loan offer: borrow `b` now, repay `r` next date, `kappa` marks a
/// collateralized loan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Contract {
    pub b: f64,
    #[serde(rename = "R")]
    pub r: f64,
    pub kappa: bool,
}

impl Contract {
    pub const AUTARKY: Contract = Contract {
        b: 0.0,
        r: 0.0,
        kappa: false,
    };

    pub fn unsecured(b: f64, r: f64) -> Self {
        Contract { b, r, kappa: false }
    }

    pub fn collateralized(b: f64, r: f64) -> Self {
        Contract { b, r, kappa: true }
    }

    pub fn is_autarky(&self) -> bool {
        self.b == 0.0 && self.r == 0.0
    }

    /// `[b, R]` pair, the form used in plan listings.
    pub fn pair(&self) -> [f64; 2] {
        [self.b, self.r]
    }
}

/// Period decisions entering the budget identity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BorrowerState {
    pub defaulted: bool,
    pub holds_asset: bool,
    pub sells: bool,
    /// Probability that the lender accepts the new contract.
    pub alpha: f64,
}

impl BorrowerState {
    pub fn new(defaulted: bool, holds_asset: bool, sells: bool, alpha: f64) -> Result<Self> {
        if sells && !holds_asset {
            return Err(ModelError::domain("s", "cannot sell an asset that is not held"));
        }
        if !(0.0..=1.0).contains(&alpha) {
            return Err(ModelError::domain("alpha", format!("alpha = {alpha} not in [0, 1]")));
        }
        Ok(BorrowerState {
            defaulted,
            holds_asset,
            sells,
            alpha,
        })
    }
}

/// Date-t consumption `y + (1-d)[(x + p s) a - R + alpha b]`.
///
/// Negative consumption is reported as an error: the plan is infeasible.
pub fn consumption(y: f64, repay: f64, state: &BorrowerState, p: f64, x: f64, b: f64) -> Result<f64> {
    if state.defaulted {
        return Ok(y);
    }
    let a = if state.holds_asset { 1.0 } else { 0.0 };
    let s = if state.sells { 1.0 } else { 0.0 };
    let c = y + (x + p * s) * a - repay + state.alpha * b;
    if c < 0.0 {
        return Err(ModelError::NegativeConsumption(c));
    }
    Ok(c)
}

/// Discounted sum `sum_t beta^t c_t` (linear utility).
pub fn lifetime_utility(consumption: &[f64], beta: f64) -> f64 {
    consumption
        .iter()
        .rev()
        .fold(0.0, |acc, &c| c + beta * acc)
}

/// Lenders' posterior after observing repayment, when the strategic type
/// defaults with probability `delta`.
pub fn bayes_update(pi_prev: f64, delta: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&pi_prev) {
        return Err(ModelError::domain("pi_prev", format!("{pi_prev} not in [0, 1]")));
    }
    if !(0.0..=1.0).contains(&delta) {
        return Err(ModelError::domain("delta", format!("{delta} not in [0, 1]")));
    }
    let denom = pi_prev + (1.0 - pi_prev) * (1.0 - delta);
    if denom == 0.0 {
        return Err(ModelError::Indeterminate);
    }
    Ok((pi_prev / denom).min(1.0))
}

/// A realized price path `p0, p1, ...`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PricePath {
    pub p: Vec<f64>,
}

impl PricePath {
    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }
}

/// Counter-based uniform draws: the value for `(seed, stream, slot)` does not
/// depend on how many other draws were made, or in which order.
#[derive(Debug, Clone)]
pub struct CounterRng {
    inner: ChaCha8Rng,
}

impl CounterRng {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        CounterRng { inner }
    }

    /// Uniform draw on [0, 1) bound to `slot`.
    pub fn uniform(&mut self, slot: u64) -> f64 {
        // an f64 consumes one u64, i.e. two 32-bit words of the block stream
        self.inner.set_word_pos(u128::from(slot) * 2);
        self.inner.random::<f64>()
    }
}

/// Draw `p[t+1] ~ U[0, 2 p[t]]` for `dates` steps. Path index 0 of `seed`.
pub fn sample_price_path(p0: f64, dates: usize, seed: u64) -> Result<PricePath> {
    sample_price_path_indexed(p0, dates, seed, 0)
}

/// Same as [`sample_price_path`] for an arbitrary path index; draws for date
/// `t` live in slot `t` of stream `path`.
pub fn sample_price_path_indexed(p0: f64, dates: usize, seed: u64, path: u64) -> Result<PricePath> {
    if !(p0 > 0.0 && p0.is_finite()) {
        return Err(ModelError::domain("p0", format!("p0 = {p0} must be > 0")));
    }
    let mut rng = CounterRng::new(seed, path);
    let mut p = Vec::with_capacity(dates + 1);
    p.push(p0);
    for t in 1..=dates {
        let prev = p[t - 1];
        p.push(2.0 * prev * rng.uniform(t as u64));
    }
    Ok(PricePath { p })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validate_accepts_reference_point() {
        let p = ModelParams::flat(0.5, 0.3, 1.0, 1.2);
        assert_eq!(validate_params(p).unwrap(), p);
    }

    #[test]
    fn validate_names_violated_invariant() {
        let bad_beta = ModelParams::flat(1.0, 0.3, 1.0, 1.2);
        assert_eq!(validate_params(bad_beta).unwrap_err().param(), Some("beta"));
        let bad_p0 = ModelParams::flat(0.5, 0.3, 1.0, 0.0);
        assert_eq!(validate_params(bad_p0).unwrap_err().param(), Some("p0"));
        let bad_pi = ModelParams::flat(0.5, 1.3, 1.0, 1.0);
        assert_eq!(validate_params(bad_pi).unwrap_err().param(), Some("pi0"));
        let nan = ModelParams::flat(f64::NAN, 0.3, 1.0, 1.0);
        assert_eq!(validate_params(nan).unwrap_err().param(), Some("beta"));
        let neg_x = ModelParams::new(0.5, 0.3, 1.0, 1.0, 1.0, -0.1);
        assert_eq!(validate_params(neg_x).unwrap_err().param(), Some("x"));
    }

    #[test]
    fn consumption_budget_identity() {
        let st = BorrowerState::new(false, true, true, 1.0).unwrap();
        let c = consumption(1.0, 0.5, &st, 2.0, 0.0, 0.7).unwrap();
        assert!((c - 3.2).abs() < TOL);
    }

    #[test]
    fn default_zeroes_the_bracket() {
        let st = BorrowerState::new(true, true, true, 0.3).unwrap();
        assert_eq!(consumption(1.25, 99.0, &st, 7.0, 3.0, 11.0).unwrap(), 1.25);
    }

    #[test]
    fn negative_consumption_is_an_error() {
        let st = BorrowerState::new(false, false, false, 1.0).unwrap();
        assert_eq!(
            consumption(0.0, 1.0, &st, 0.0, 0.0, 0.0),
            Err(ModelError::NegativeConsumption(-1.0))
        );
    }

    #[test]
    fn selling_without_asset_rejected() {
        assert!(BorrowerState::new(false, false, true, 1.0).is_err());
        assert!(BorrowerState::new(false, true, false, 1.5).is_err());
    }

    #[test]
    fn lifetime_utility_examples() {
        assert!((lifetime_utility(&[1.0, 1.0, 1.0], 0.5) - 1.75).abs() < TOL);
        assert_eq!(lifetime_utility(&[3.0, 0.0, 0.0], 0.9), 3.0);
        assert!((lifetime_utility(&[0.0, 0.0, 4.0], 0.5) - 1.0).abs() < TOL);
    }

    #[test]
    fn bayes_examples() {
        assert!((bayes_update(0.2, 0.0).unwrap() - 0.2).abs() < TOL);
        assert_eq!(bayes_update(0.2, 1.0).unwrap(), 1.0);
        assert_eq!(bayes_update(0.0, 1.0), Err(ModelError::Indeterminate));
        assert_eq!(bayes_update(0.0, 0.5).unwrap(), 0.0);
    }

    #[test]
    fn bayes_matches_partial_separation_posterior() {
        // posterior (R1 - p1) / y at R1 = 1.5, p1 = 0.8, y = 1
        let pi0: f64 = 0.2;
        let (r1, p1, y) = (1.5_f64, 0.8_f64, 1.0_f64);
        let delta = 1.0 - pi0 / (1.0 - pi0) * (y / (r1 - p1) - 1.0);
        assert!((delta - 0.892857).abs() < 1e-6);
        let post = bayes_update(pi0, delta).unwrap();
        assert!((post - (r1 - p1) / y).abs() < TOL);
        assert!((post - 0.7).abs() < TOL);
    }

    #[test]
    fn price_paths_are_deterministic_and_bounded() {
        let a = sample_price_path(1.0, 2, 42).unwrap();
        let b = sample_price_path(1.0, 2, 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 3);
        for seed in 0..200 {
            let path = sample_price_path(1.0, 2, seed).unwrap();
            assert!(path.p.iter().all(|&v| (0.0..=4.0).contains(&v)));
            assert!(path.p[2] <= 2.0 * path.p[1]);
        }
        assert!(sample_price_path(0.0, 2, 1).is_err());
    }

    #[test]
    fn counter_rng_is_order_independent() {
        let mut a = CounterRng::new(9, 3);
        let mut b = CounterRng::new(9, 3);
        let late = a.uniform(5);
        let _ = b.uniform(1);
        let _ = b.uniform(2);
        assert_eq!(b.uniform(5), late);
        let mut other = CounterRng::new(9, 4);
        assert_ne!(other.uniform(5), late);
    }

    #[test]
    fn params_json_accepts_y_shorthand() {
        let p: ModelParams =
            serde_json::from_str(r#"{"beta":0.5,"pi0":0.3,"y":1.0,"p0":1.2}"#).unwrap();
        assert_eq!(p, ModelParams::flat(0.5, 0.3, 1.0, 1.2));
        let q: ModelParams =
            serde_json::from_str(r#"{"beta":0.5,"pi0":0.6,"y1":5,"y2":10,"p0":1,"x":0.5}"#).unwrap();
        assert_eq!(q, ModelParams::new(0.5, 0.6, 5.0, 10.0, 1.0, 0.5));
        let back: ModelParams = serde_json::from_str(&serde_json::to_string(&q).unwrap()).unwrap();
        assert_eq!(back, q);
        assert!(serde_json::from_str::<ModelParams>(r#"{"beta":0.5,"pi0":0.3,"p0":1.2}"#).is_err());
        assert!(
            serde_json::from_str::<ModelParams>(r#"{"beta":0.5,"pi0":0.3,"y":1,"y1":2,"p0":1.2}"#)
                .is_err()
        );
    }
}
