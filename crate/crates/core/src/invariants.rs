//! Property checks across modules, through the public API only.

use proptest::prelude::*;

use crate::collateral::date1_repayment_threshold;
use crate::combined::{
    date0_decision, date0_objective, date0_objective_exact, date1_behavior, date1_keep_contract, Date0Action,
    Date1Region, KeepOrSell,
};
use crate::model::{bayes_update, consumption, sample_price_path_indexed, BorrowerState};
use crate::oracle::{pi0_star_oracle, BoundStatus, GridSpec};
use crate::reputation::{classify_region, RegionLabel};
use crate::ModelParams;

fn combined() -> impl Strategy<Value = ModelParams> {
    (0.2f64..0.9, 0.02f64..0.98, 0.5f64..3.0, 0.5f64..4.0)
        .prop_map(|(beta, share, y, p0)| ModelParams::flat(beta, share * beta, y, p0))
}

fn coarse() -> GridSpec {
    GridSpec::new(200, 401, 1e-9).unwrap()
}

proptest! {
    #[test]
    fn posterior_rises_with_default_probability(pi in 0.0f64..1.0, d1 in 0.0f64..0.99, d2 in 0.0f64..0.99) {
        let (lo, hi) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
        let a = bayes_update(pi, lo).unwrap();
        let b = bayes_update(pi, hi).unwrap();
        prop_assert!(a <= b + 1e-15);
        prop_assert!(a >= pi - 1e-15 && b <= 1.0);
    }

    #[test]
    fn default_consumes_income(y in 0.0f64..5.0, r in 0.0f64..10.0, p in 0.0f64..5.0, b in 0.0f64..5.0) {
        let st = BorrowerState::new(true, true, true, 1.0).unwrap();
        prop_assert_eq!(consumption(y, r, &st, p, 0.3, b).unwrap(), y);
    }

    #[test]
    fn date1_outcome_is_consistent(params in combined(), r_share in 0.0f64..1.0, p_share in 0.0f64..1.0) {
        let y = params.y1;
        let r1 = 2.0 * y * r_share;
        let p1 = 2.0 * params.p0 * p_share;
        let o = date1_behavior(p1, r1, &params).unwrap();
        prop_assert!((0.0..=1.0).contains(&o.delta1));
        prop_assert!((0.0..=1.0).contains(&o.alpha));
        prop_assert!(o.pi1 >= params.pi0 - 1e-12 && o.pi1 <= 1.0);
        if o.delta1 < 1.0 {
            let post = bayes_update(params.pi0, o.delta1).unwrap();
            prop_assert!((post - o.pi1).abs() < 1e-12);
        }
        match o.region {
            Date1Region::CompleteSeparation => prop_assert!(p1 < r1 - y),
            Date1Region::PoolingAutarky => prop_assert!(p1 > r1),
            _ => prop_assert!(p1 >= r1 - y && p1 <= r1),
        }
    }

    #[test]
    fn quadratic_matches_exact_on_its_domain(params in combined(), t in 0.0f64..1.0) {
        let y = params.y1;
        let top = (2.0 * y).min(2.0 * params.p0);
        prop_assume!(top >= y);
        let r1 = y + (top - y) * t;
        let q = date0_objective(r1, &params).unwrap().u_keep;
        let e = date0_objective_exact(r1, &params).unwrap();
        prop_assert!((q - e).abs() < 1e-9, "quadratic {} exact {}", q, e);
    }

    #[test]
    fn collateral_repayment_threshold_is_monotone_and_continuous(
        x in 0.0f64..3.0, beta in 0.05f64..0.95, r in 0.0f64..12.0, dr in 0.0f64..1.0,
    ) {
        let a = date1_repayment_threshold(r, x, beta).unwrap();
        let b = date1_repayment_threshold(r + dr, x, beta).unwrap();
        prop_assert!(b >= a - 1e-12);
        let c = date1_repayment_threshold(r + 1e-9, x, beta).unwrap();
        prop_assert!((c - a).abs() < 1e-6);
    }

    #[test]
    fn reputation_regions_partition_the_square(pi0 in 0.0f64..=1.0, beta in 0.01f64..0.99, g in -0.9f64..4.0) {
        let (r, _) = classify_region(pi0, beta, 1.0, 1.0 + g).unwrap();
        let expected = if pi0 < beta {
            RegionLabel::Autarky
        } else if pi0 < r.separating_from {
            RegionLabel::Pooling
        } else {
            RegionLabel::Separating
        };
        prop_assert_eq!(r.label, expected);
        prop_assert!(r.separating_from >= beta);
        if g <= 0.0 {
            prop_assert!(r.label != RegionLabel::Pooling);
        }
    }

    #[test]
    fn honest_type_sells_at_date_1(beta in 0.05f64..0.95, y in 0.1f64..5.0, p1 in 0.01f64..10.0, pi1 in 0.0f64..0.999) {
        let params = ModelParams::flat(beta, 0.0, y, 1.0);
        let k = date1_keep_contract(p1, pi1, &params).unwrap();
        prop_assert_eq!(k.verdict, KeepOrSell::Sell);
        prop_assert!(k.u_sell >= k.u_borrow - 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn keep_margin_rises_with_prior(beta in 0.3f64..0.8, y in 0.5f64..2.0, p0 in 0.5f64..3.0, a in 0.0f64..1.0, b in 0.0f64..1.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let m = |s: f64| {
            let sol = date0_decision(&ModelParams::flat(beta, s * beta * 0.999, y, p0)).unwrap();
            sol.u_keep - sol.u_sell
        };
        prop_assert!(m(hi) >= m(lo) - 1e-12);
    }
}

#[test]
fn price_is_a_martingale() {
    let (p0, n) = (1.7, 1_000_000u64);
    let (mut sum, mut sq) = (0.0, 0.0);
    for path in 0..n {
        let p1 = sample_price_path_indexed(p0, 1, 11, path).unwrap().p[1];
        sum += p1;
        sq += p1 * p1;
    }
    let mean = sum / n as f64;
    let se = ((sq / n as f64 - mean * mean) / n as f64).sqrt();
    assert!((mean - p0).abs() <= 3.0 * se, "mean {mean} vs {p0}, se {se}");
}

#[test]
fn prior_bound_is_quasiconvex_in_price_income_ratio() {
    let grid = coarse();
    let bounds: Vec<f64> = (1..=24)
        .map(|i| pi0_star_oracle(0.5, 1.0, 0.125 * f64::from(i), &grid).unwrap().value)
        .collect();
    let bottom = bounds
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap();
    for w in bounds[..=bottom].windows(2) {
        assert!(w[1] <= w[0] + 1e-6, "{bounds:?}");
    }
    for w in bounds[bottom..].windows(2) {
        assert!(w[1] >= w[0] - 1e-6, "{bounds:?}");
    }
}

#[test]
fn keep_decision_switches_at_the_prior_bound() {
    let bound = pi0_star_oracle(0.5, 1.0, 1.2, &GridSpec::default()).unwrap();
    assert_eq!(bound.status, BoundStatus::Interior);
    assert!(bound.value < 0.5);
    for i in 1..50 {
        let pi0 = 0.01 * f64::from(i);
        if (pi0 - bound.value).abs() < 1e-3 {
            continue;
        }
        let d = date0_decision(&ModelParams::flat(0.5, pi0, 1.0, 1.2)).unwrap().decision;
        let want = if pi0 > bound.value { Date0Action::Keep } else { Date0Action::Sell };
        assert_eq!(d, want, "pi0 = {pi0}");
    }
}
