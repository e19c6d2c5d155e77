use dce_core::collateral::{
    self, date0_sell_threshold, date1_branch_cut, date1_keep_value, date1_optimal_contract,
    date1_repayment_threshold, date1_switch_price, date2_default_threshold, CollateralDecision, ContractMode,
};
use dce_core::combined::{
    self, binding_income, date0_loan, date0_objective, date0_objective_exact, date1_behavior, lower_threshold,
    optimal_r1, rationing_threshold, sell_utility, unconstrained_r1, upper_threshold, Date0Action, Date0Solution,
    Date1Outcome,
};
use dce_core::oracle::{
    grid_verify_date1, monte_carlo_with, numeric_optimal_r1, numeric_u_keep, olg_simulate, OlgDateStats,
};
use dce_core::reputation::{
    classify_region, lemma1_classify, max_riskless_loan, pooling_utility, region_map, separating_utility,
    ContractPlan, Lemma1Report, RegionLabel, ReputationRegion,
};
use dce_core::{Contract, ModelParams};
use serde::{Deserialize, Serialize};

use crate::args::{Axis, Command, Figure, Format, Regime, RunArgs};
use crate::error::{CliError, CliResult};
use crate::output::{num, Artifact, Table};

/// Serialized name of a unit enum variant.
fn label<T: Serialize>(v: &T) -> String {
    match serde_json::to_value(v) {
        Ok(serde_json::Value::String(s)) => s,
        Ok(other) => other.to_string(),
        Err(e) => panic!("unserializable label: {e}"),
    }
}

fn flag(b: bool) -> String {
    b.to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReputationSolution {
    pub region: ReputationRegion,
    pub plan: ContractPlan,
    #[serde(rename = "Rbar")]
    pub rbar: f64,
    pub u_pool: f64,
    pub u_sep: f64,
    pub lemma1: Lemma1Report,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionClassification {
    pub region: RegionLabel,
    pub plan: [[f64; 2]; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollateralContract {
    pub p1: f64,
    pub mode: ContractMode,
    pub contract: Contract,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CombinedThresholds {
    #[serde(rename = "R1")]
    pub r1: f64,
    pub lower: f64,
    pub rationing: f64,
    pub upper: f64,
    /// Largest income at which the repayment cap binds.
    pub binding_income: f64,
    #[serde(rename = "R1_unconstrained")]
    pub r1_unconstrained: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollateralThresholds {
    pub date0_sell: f64,
    pub date1_switch: f64,
    pub date1_branch_cut: f64,
    pub date1_repayment: Option<f64>,
    pub date2_default: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReputationThresholds {
    pub autarky_below: f64,
    pub separating_from: f64,
    #[serde(rename = "Rbar")]
    pub rbar: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyCase {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub cases: Vec<VerifyCase>,
    pub pass: bool,
}

/// Runs a parsed command. Returns the exit status on success.
pub fn run(command: &Command) -> CliResult<u8> {
    let name = command.name();
    let args = command.args().resolve(name)?;
    let (artifact, status) = match command {
        Command::Solve(_) => (solve(&args)?, 0),
        Command::Classify(_) => (classify(&args)?, 0),
        Command::Thresholds(_) => (thresholds(&args)?, 0),
        Command::Verify(_) => {
            let report = verify(&args)?;
            let status = if report.pass { 0 } else { 3 };
            (Artifact::json(&report), status)
        }
        Command::Sweep(_) => (sweep(&args)?, 0),
        Command::Simulate(_) => (simulate(&args)?, 0),
        Command::Olg(_) => (olg(&args)?, 0),
        Command::Figures(_) => (figures(&args)?, 0),
    };
    check_format(name, &args, &artifact)?;
    artifact.emit(args.out.as_deref())?;
    Ok(status)
}

fn check_format(name: &str, args: &RunArgs, artifact: &Artifact) -> CliResult<()> {
    let produced = match artifact {
        Artifact::Json(_) => Format::Json,
        Artifact::Csv(_) => Format::Csv,
    };
    match args.format {
        Some(f) if f != produced => Err(CliError::config(format!(
            "`{name}` writes {}, not {}",
            label(&produced),
            label(&f)
        ))),
        _ => Ok(()),
    }
}

fn solve(args: &RunArgs) -> CliResult<Artifact> {
    let regime = args.regime();
    let p = args.params(regime)?;
    Ok(match regime {
        Regime::Combined => Artifact::json(&optimal_r1(&p)?),
        Regime::Collateral => Artifact::json(&collateral::date0_decision(p.p0, p.x, p.beta)?),
        Regime::Reputation => Artifact::json(&reputation_solution(&p)?),
    })
}

fn reputation_solution(p: &ModelParams) -> CliResult<ReputationSolution> {
    let (region, plan) = classify_region(p.pi0, p.beta, p.y1, p.y2)?;
    Ok(ReputationSolution {
        region,
        plan,
        rbar: max_riskless_loan(p.pi0, p.beta, p.y2)?,
        u_pool: pooling_utility(p.pi0, p.beta, p.y2)?,
        u_sep: separating_utility(p.pi0, p.beta, p.y1, p.y2)?,
        lemma1: lemma1_classify(&plan, p.pi0, p.beta, p.y1, p.y2)?,
    })
}

fn classify(args: &RunArgs) -> CliResult<Artifact> {
    let regime = args.regime();
    let p = args.params(regime)?;
    Ok(match regime {
        Regime::Reputation => {
            let (region, plan) = classify_region(p.pi0, p.beta, p.y1, p.y2)?;
            Artifact::json(&RegionClassification {
                region: region.label,
                plan: plan.pairs(),
            })
        }
        Regime::Combined => {
            let p1 = args.require("p", args.p)?;
            let r1 = args.require("R1", args.r1)?;
            Artifact::json(&date1_behavior(p1, r1, &p)?)
        }
        Regime::Collateral => {
            let p1 = args.require("p", args.p)?;
            let (contract, mode) = date1_optimal_contract(p1, p.x, p.beta)?;
            Artifact::json(&CollateralContract { p1, mode, contract })
        }
    })
}

fn thresholds(args: &RunArgs) -> CliResult<Artifact> {
    let regime = args.regime();
    let p = args.params(regime)?;
    Ok(match regime {
        Regime::Combined => {
            let y = combined::combined_income(&p)?;
            let r1 = args.require("R1", args.r1)?;
            Artifact::json(&CombinedThresholds {
                r1,
                lower: lower_threshold(r1, y),
                rationing: rationing_threshold(r1, p.beta, y),
                upper: upper_threshold(r1),
                binding_income: binding_income(&p)?,
                r1_unconstrained: unconstrained_r1(&p)?,
            })
        }
        Regime::Collateral => Artifact::json(&CollateralThresholds {
            date0_sell: date0_sell_threshold(p.x, p.beta)?,
            date1_switch: date1_switch_price(p.x, p.beta)?,
            date1_branch_cut: date1_branch_cut(p.x, p.beta),
            date1_repayment: args.r1.map(|r| date1_repayment_threshold(r, p.x, p.beta)).transpose()?,
            date2_default: args.r2.map(|r| date2_default_threshold(r, p.x)).transpose()?,
        }),
        Regime::Reputation => {
            let (region, _) = classify_region(p.pi0, p.beta, p.y1, p.y2)?;
            Artifact::json(&ReputationThresholds {
                autarky_below: region.autarky_below,
                separating_from: region.separating_from,
                rbar: max_riskless_loan(p.pi0, p.beta, p.y2)?,
            })
        }
    })
}

/// The worked examples, each reduced to one residual.
pub fn verify(args: &RunArgs) -> CliResult<VerifyReport> {
    let grid = args.grid()?;
    let tol = grid.tolerance;
    let mut cases = Vec::new();
    let mut case = |name: String, residual: f64, tolerance: f64| {
        cases.push(VerifyCase {
            name,
            residual,
            tolerance,
            pass: residual <= tolerance,
        });
    };

    let reference = ModelParams::flat(0.5, 0.2, 1.0, 1.2);
    for r1 in [1.0, 1.2, 1.5, 2.0] {
        let rep = grid_verify_date1(&reference, r1, &grid)?;
        case(format!("date-1 residuals (0.5, 0.2, 1, 1.2), R1 = {r1}"), rep.max_residual(), tol);
    }

    let anchor = ModelParams::flat(0.5, 0.3, 1.0, 1.2);
    let u = date0_objective(2.0, &anchor)?.u_keep;
    case("U0 at R1 = 2, (0.5, 0.3, 1, 1.2) = 1.928125".into(), (u - 1.928125).abs(), tol);
    for r1 in [1.0, 1.5, 2.0] {
        let q = numeric_u_keep(r1, &anchor)?;
        let c = date0_objective(r1, &anchor)?.u_keep;
        case(format!("U0 closed form vs quadrature, R1 = {r1}"), (q - c).abs(), 1e-8);
    }
    let sol = optimal_r1(&anchor)?;
    let num = numeric_optimal_r1(&anchor, &grid.with_contract_step(2.0, 1e-3))?;
    case(
        "R1* = 2 and grid argmax within one step".into(),
        (sol.r1_star - 2.0).abs().max(((num.r1_hat - sol.r1_star).abs() - num.step).max(0.0)),
        tol,
    );
    let keep = optimal_r1(&ModelParams::flat(0.5, 0.4, 1.0, 1.2))?;
    case(
        "(0.5, 0.4, 1, 1.2) keeps".into(),
        if keep.decision == Date0Action::Keep { 0.0 } else { 1.0 },
        0.0,
    );

    for (pi0, y1, y2, want) in [
        (0.3, 5.0, 10.0, RegionLabel::Autarky),
        (0.6, 5.0, 10.0, RegionLabel::Pooling),
        (0.9, 5.0, 10.0, RegionLabel::Separating),
    ] {
        let (region, plan) = classify_region(pi0, 0.5, y1, y2)?;
        let report = lemma1_classify(&plan, pi0, 0.5, y1, y2)?;
        let bad = region.label != want || !report.is_equilibrium();
        case(
            format!("reputation (0.5, {pi0}, {y1}, {y2}) is {want} with a consistent plan"),
            if bad { 1.0 } else { 0.0 },
            0.0,
        );
    }

    let t = date0_sell_threshold(1.0, 0.5)?;
    case("collateral date-0 switch at 8/3".into(), (t - 8.0 / 3.0).abs(), tol);
    let p1 = date1_repayment_threshold(4.0, 1.0, 0.5)?;
    case(
        "collateral repayment threshold is indifferent".into(),
        date1_keep_value(p1, 4.0, 1.0, 0.5)?.abs(),
        tol,
    );
    case("collateral p1_hat(4) = 2.822876".into(), (p1 - 2.822876).abs(), 1e-6);

    let pass = cases.iter().all(|c| c.pass);
    Ok(VerifyReport { cases, pass })
}

fn sweep_points(range: &[f64]) -> CliResult<Vec<f64>> {
    let [lo, hi, step] = range else {
        return Err(CliError::Range("range needs lo,hi,step".into()));
    };
    let (lo, hi, step) = (*lo, *hi, *step);
    if !(lo.is_finite() && hi.is_finite() && step.is_finite()) {
        return Err(CliError::Range("range bounds must be finite".into()));
    }
    if lo >= hi {
        return Err(CliError::Range(format!("empty range: lo = {lo} >= hi = {hi}")));
    }
    if step <= 0.0 {
        return Err(CliError::Range(format!("step = {step} must be > 0")));
    }
    let n = ((hi - lo) / step * (1.0 + 1e-12)).floor() as usize + 1;
    if n > 10_000_000 {
        return Err(CliError::Range(format!("{n} points is too many")));
    }
    Ok((0..n).map(|i| (lo + step * i as f64).min(hi)).collect())
}

fn with_axis(args: &RunArgs, axis: Axis, v: f64) -> RunArgs {
    let mut a = args.clone();
    match axis {
        Axis::Beta => a.beta = Some(v),
        Axis::Pi0 => a.pi0 = Some(v),
        Axis::Y => {
            a.y = Some(v);
            a.y1 = None;
            a.y2 = None;
        }
        Axis::P0 => a.p0 = Some(v),
        Axis::X => a.x = Some(v),
        Axis::R1 => a.r1 = Some(v),
    }
    a
}

fn sweep(args: &RunArgs) -> CliResult<Artifact> {
    let axis = args.axis.ok_or_else(|| CliError::config("missing --axis"))?;
    let range = args.range.as_deref().ok_or_else(|| CliError::config("missing --range"))?;
    let points = sweep_points(range)?;
    let regime = args.regime();
    let mut table = match (regime, axis) {
        (Regime::Combined, Axis::R1) => Table::new(["R1", "beta", "pi0", "y", "p0", "b0", "u_keep", "u_sell", "decision"]),
        (Regime::Combined, _) => Table::new([
            axis.name(),
            "beta",
            "pi0",
            "y",
            "p0",
            "R1_star",
            "b0",
            "binding",
            "closed_form_valid",
            "u_keep",
            "u_sell",
            "decision",
        ]),
        (Regime::Collateral, Axis::R1) => Table::new(["R1", "beta", "x", "p1_hat"]),
        (Regime::Collateral, _) => {
            Table::new([axis.name(), "beta", "p0", "x", "action", "threshold", "u_keep", "u_sell", "b", "R"])
        }
        (Regime::Reputation, Axis::R1) => {
            return Err(CliError::config("R1 is not a parameter of the reputation regime"));
        }
        (Regime::Reputation, _) => Table::new([
            axis.name(),
            "beta",
            "pi0",
            "y1",
            "y2",
            "label",
            "separating_from",
            "Rbar",
            "u_pool",
            "u_sep",
            "b0",
            "R1",
            "b1",
            "R2",
            "delta1",
        ]),
    };
    for v in points {
        let a = with_axis(args, axis, v);
        let p = a.params(regime)?;
        let row = match (regime, axis) {
            (Regime::Combined, Axis::R1) => {
                let y = combined::combined_income(&p)?;
                if v > 2.0 * y {
                    return Err(CliError::Range(format!("R1 = {v} exceeds 2y = {}", 2.0 * y)));
                }
                let u_keep = date0_objective_exact(v, &p)?;
                let u_sell = sell_utility(&p)?;
                let d = if u_keep >= u_sell { Date0Action::Keep } else { Date0Action::Sell };
                vec![
                    num(v),
                    num(p.beta),
                    num(p.pi0),
                    num(y),
                    num(p.p0),
                    num(date0_loan(v, &p)?),
                    num(u_keep),
                    num(u_sell),
                    label(&d),
                ]
            }
            (Regime::Combined, _) => {
                let s: Date0Solution = optimal_r1(&p)?;
                vec![
                    num(v),
                    num(p.beta),
                    num(p.pi0),
                    num(p.y1),
                    num(p.p0),
                    num(s.r1_star),
                    num(s.b0),
                    flag(s.binding),
                    flag(s.closed_form_valid),
                    num(s.u_keep),
                    num(s.u_sell),
                    label(&s.decision),
                ]
            }
            (Regime::Collateral, Axis::R1) => {
                vec![num(v), num(p.beta), num(p.x), num(date1_repayment_threshold(v, p.x, p.beta)?)]
            }
            (Regime::Collateral, _) => {
                let d: CollateralDecision = collateral::date0_decision(p.p0, p.x, p.beta)?;
                vec![
                    num(v),
                    num(p.beta),
                    num(p.p0),
                    num(p.x),
                    label(&d.action),
                    num(d.threshold),
                    num(d.u_keep),
                    num(d.u_sell),
                    num(d.contract.b),
                    num(d.contract.r),
                ]
            }
            (Regime::Reputation, _) => {
                let s = reputation_solution(&p)?;
                let [[b0, r1], [b1, r2]] = s.plan.pairs();
                vec![
                    num(v),
                    num(p.beta),
                    num(p.pi0),
                    num(p.y1),
                    num(p.y2),
                    s.region.label.to_string(),
                    num(s.region.separating_from),
                    num(s.rbar),
                    num(s.u_pool),
                    num(s.u_sep),
                    num(b0),
                    num(r1),
                    num(b1),
                    num(r2),
                    num(s.plan.strategic_default_date1),
                ]
            }
        };
        table.push(row);
    }
    Ok(Artifact::Csv(table))
}

fn simulate(args: &RunArgs) -> CliResult<Artifact> {
    let p = args.params(Regime::Combined)?;
    let r1 = match args.r1 {
        Some(r) => r,
        None => optimal_r1(&p)?.r1_star,
    };
    let n = args.paths.unwrap_or(1_000_000);
    Ok(Artifact::json(&monte_carlo_with(&p, r1, n, args.seed(), args.honest_share)?))
}

const OLG_HEADER: [&str; 15] = [
    "date",
    "price",
    "young_keep_mass",
    "young_sell_mass",
    "middle_region",
    "middle_strategic_borrowers",
    "middle_default_mass",
    "middle_repay_mass",
    "middle_loan_mass",
    "middle_rationed_mass",
    "old_default_mass",
    "old_repay_mass",
    "old_settled_mass",
    "total_mass",
    "expected_mass",
];

fn olg_row(d: &OlgDateStats) -> Vec<String> {
    vec![
        d.date.to_string(),
        num(d.price),
        num(d.young_keep_mass),
        num(d.young_sell_mass),
        d.middle_region.map(|r| r.to_string()).unwrap_or_default(),
        num(d.middle_strategic_borrowers),
        num(d.middle_default_mass),
        num(d.middle_repay_mass),
        num(d.middle_loan_mass),
        num(d.middle_rationed_mass),
        num(d.old_default_mass),
        num(d.old_repay_mass),
        num(d.old_settled_mass),
        num(d.total_mass),
        num(d.expected_mass),
    ]
}

fn olg(args: &RunArgs) -> CliResult<Artifact> {
    let p = args.params(Regime::Combined)?;
    let run = olg_simulate(&p, args.periods.unwrap_or(100), args.seed())?;
    if args.format == Some(Format::Json) {
        return Ok(Artifact::json(&run));
    }
    let mut t = Table::new(OLG_HEADER);
    for d in &run.stats {
        t.push(olg_row(d));
    }
    Ok(Artifact::Csv(t))
}

fn figures(args: &RunArgs) -> CliResult<Artifact> {
    let which = args.which.ok_or_else(|| CliError::config("missing --which"))?;
    match which {
        Figure::Fig2 => {
            let g = args.g.unwrap_or(1.0);
            let n = args.n.unwrap_or(100);
            let mut t = Table::new(["beta", "pi0", "g", "label"]);
            for pt in region_map(g, n)? {
                t.push(vec![num(pt.beta), num(pt.pi0), num(pt.g), pt.label.to_string()]);
            }
            Ok(Artifact::Csv(t))
        }
        Figure::Fig3 => {
            let p = args.params(Regime::Combined)?;
            let r1 = match args.r1 {
                Some(r) => r,
                None => optimal_r1(&p)?.r1_star,
            };
            let n = args.n.unwrap_or(1000).max(2);
            let mut t = Table::new(["p1", "region", "pi1", "delta1", "alpha"]);
            for i in 0..n {
                let p1 = 2.0 * p.p0 * i as f64 / (n - 1) as f64;
                let o: Date1Outcome = date1_behavior(p1, r1, &p)?;
                t.push(vec![num(p1), o.region.to_string(), num(o.pi1), num(o.delta1), num(o.alpha)]);
            }
            Ok(Artifact::Csv(t))
        }
    }
}
