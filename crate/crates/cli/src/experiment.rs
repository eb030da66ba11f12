//! Strategy and oracle runs over a parsed instance, assembled into
//! deterministic reports.

use anyhow::{bail, Result};

use probe_core::eval::{EvalOptions, ValueEstimate};
use probe_core::kmedian::{kmedian_nonadaptive, kmedian_policy_for_set};
use probe_core::makespan::{makespan_nonadaptive, makespan_policy_for_set};
use probe_core::oracle::{
    adaptive_opt_hard, adaptive_opt_soft_lb, default_lambda_grid, exact_outlier_opt,
    nonadaptive_opt, KMedianObjective, ProbeObjective, SteinerObjective, WctObjective,
    DEFAULT_STATE_CAP,
};
use probe_core::steiner::{steiner_nonadaptive, steiner_policy_for_set};
use probe_core::wct::{wct_nonadaptive, wct_policy_value};

use crate::instance::Instance;
use crate::report::{describe_probe_set, Report, ReportRow};

#[derive(Debug, Clone, Copy)]
pub struct RunConfig {
    pub seed: u64,
    pub mc_trials: u64,
    pub eps: f64,
    pub enum_cap: u64,
    pub with_oracle: bool,
}

impl RunConfig {
    fn eval_options(&self) -> EvalOptions {
        EvalOptions { exact_cap: self.enum_cap as u128, seed: self.seed, trials: self.mc_trials }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StrategyName {
    NoProbe,
    ProbeAll,
    Nonadaptive,
}

impl std::str::FromStr for StrategyName {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "none" => Ok(StrategyName::NoProbe),
            "all" => Ok(StrategyName::ProbeAll),
            "nonadaptive" => Ok(StrategyName::Nonadaptive),
            other => Err(format!("{other:?} is not none, all, or nonadaptive")),
        }
    }
}

impl StrategyName {
    pub fn label(&self) -> &'static str {
        match self {
            StrategyName::NoProbe => "none",
            StrategyName::ProbeAll => "all",
            StrategyName::Nonadaptive => "nonadaptive",
        }
    }
}

impl std::fmt::Display for StrategyName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

fn estimate_fields(value: &ValueEstimate) -> (f64, String, Option<f64>) {
    match value {
        ValueEstimate::Exact(v) => (*v, "exact".into(), None),
        ValueEstimate::MonteCarlo { mean, half_width, .. } => {
            (*mean, "mc".into(), Some(*half_width))
        }
    }
}

fn probe_cost_of(inst: &Instance, set: &[usize]) -> f64 {
    match inst {
        Instance::Wct(i) => i.probe_cost_of(set),
        Instance::Makespan(i) => i.probe_cost_of(set),
        Instance::KMedian(i) => i.nodes().probe_cost_of(set),
        Instance::Steiner(i) => i.nodes().probe_cost_of(set),
    }
}

fn strategy_probe_set(inst: &Instance, strategy: StrategyName) -> Option<Vec<usize>> {
    match strategy {
        StrategyName::NoProbe => Some(Vec::new()),
        StrategyName::ProbeAll => Some((0..inst.num_items()).collect()),
        StrategyName::Nonadaptive => None,
    }
}

/// Evaluates a fixed probe set (or the objective's non-adaptive strategy
/// when `set` is `None`) and returns the realized set plus its value.
pub fn evaluate_strategy(
    inst: &Instance,
    set: Option<Vec<usize>>,
    cfg: &RunConfig,
) -> Result<(Vec<usize>, ValueEstimate)> {
    let opts = cfg.eval_options();
    Ok(match inst {
        Instance::Wct(i) => match set {
            Some(s) => {
                let v = ValueEstimate::Exact(wct_policy_value(i, &s));
                (s, v)
            }
            None => {
                let policy = wct_nonadaptive(i)?;
                (policy.probe_set, ValueEstimate::Exact(policy.value))
            }
        },
        Instance::Makespan(i) => {
            let policy = match set {
                Some(s) => makespan_policy_for_set(i, s, cfg.eps, &opts)?,
                None => makespan_nonadaptive(i, cfg.eps, &opts)?,
            };
            (policy.probe_set, policy.value)
        }
        Instance::KMedian(i) => {
            let policy = match set {
                Some(s) => kmedian_policy_for_set(i, s, &opts)?,
                None => kmedian_nonadaptive(i, &opts)?,
            };
            (policy.probe_set, policy.value)
        }
        Instance::Steiner(i) => {
            let policy = match set {
                Some(s) => steiner_policy_for_set(i, s, &opts)?,
                None => steiner_nonadaptive(i, &opts)?,
            };
            (policy.probe_set, policy.value)
        }
    })
}

fn with_objective<T>(
    inst: &Instance,
    f: impl FnOnce(&dyn DynObjective) -> Result<T>,
) -> Result<T> {
    match inst {
        Instance::Wct(i) => f(&WctObjective(i)),
        Instance::KMedian(i) => f(&KMedianObjective(i)),
        Instance::Steiner(i) => f(&SteinerObjective(i)),
        Instance::Makespan(_) => {
            bail!("oracle values are not available for the makespan objective")
        }
    }
}

/// Object-safe shim so the oracle entry points can be driven through a
/// trait object.
pub trait DynObjective {
    fn hard(&self, budget: f64, cap: u128) -> probe_core::Result<probe_core::oracle::OracleResult>;
    fn soft_lb(&self, budget: f64, cap: u128) -> probe_core::Result<probe_core::oracle::SoftBudgetBound>;
    fn nonadaptive(&self, budget: f64, cap: u128) -> probe_core::Result<probe_core::oracle::OracleResult>;
    fn outlier(&self, budget: f64) -> probe_core::Result<probe_core::oracle::OracleResult>;
}

impl<O: ProbeObjective> DynObjective for O {
    fn hard(&self, budget: f64, cap: u128) -> probe_core::Result<probe_core::oracle::OracleResult> {
        adaptive_opt_hard(self, budget, cap)
    }

    fn soft_lb(&self, budget: f64, cap: u128) -> probe_core::Result<probe_core::oracle::SoftBudgetBound> {
        adaptive_opt_soft_lb(self, budget, &default_lambda_grid(), cap)
    }

    fn nonadaptive(&self, budget: f64, cap: u128) -> probe_core::Result<probe_core::oracle::OracleResult> {
        nonadaptive_opt(self, budget, cap)
    }

    fn outlier(&self, budget: f64) -> probe_core::Result<probe_core::oracle::OracleResult> {
        exact_outlier_opt(self, budget)
    }
}

/// Runs the requested strategies, optionally adding hard-oracle columns.
pub fn run_experiment(
    inst: &Instance,
    strategies: &[StrategyName],
    cfg: &RunConfig,
) -> Result<Report> {
    let opt_hard = if cfg.with_oracle {
        Some(with_objective(inst, |obj| Ok(obj.hard(inst.budget(), DEFAULT_STATE_CAP)?))?.value)
    } else {
        None
    };
    let mut rows = Vec::with_capacity(strategies.len());
    for &strategy in strategies {
        let (set, value) = evaluate_strategy(inst, strategy_probe_set(inst, strategy), cfg)?;
        let (value, value_kind, half_width) = estimate_fields(&value);
        let cost = probe_cost_of(inst, &set);
        rows.push(ReportRow {
            strategy: strategy.label().into(),
            policy: describe_probe_set(&set),
            value,
            value_kind,
            half_width,
            probe_cost_max: cost,
            probe_cost_expected: cost,
            opt_hard,
            value_over_opt: opt_hard.map(|o| if o > 0.0 { value / o } else { f64::NAN }),
            cost_over_budget: Some(cost / inst.budget()),
        });
    }
    Ok(Report { objective: inst.objective_name().into(), seed: cfg.seed, rows })
}

/// One oracle run as a single-row report.
pub fn run_oracle(inst: &Instance, mode: &str, cfg: &RunConfig) -> Result<Report> {
    let budget = inst.budget();
    let row = match mode {
        "hard" => with_objective(inst, |obj| {
            let res = obj.hard(budget, DEFAULT_STATE_CAP)?;
            let tree = res.tree.as_ref().expect("hard oracle builds a tree");
            Ok(ReportRow {
                strategy: "oracle:hard".into(),
                policy: "decision-tree".into(),
                value: res.value,
                value_kind: "exact".into(),
                half_width: None,
                probe_cost_max: max_path_cost(inst, tree),
                probe_cost_expected: res.expected_cost,
                opt_hard: Some(res.value),
                value_over_opt: Some(1.0),
                cost_over_budget: Some(res.expected_cost / budget),
            })
        })?,
        "soft-lb" => with_objective(inst, |obj| {
            let res = obj.soft_lb(budget, DEFAULT_STATE_CAP)?;
            // The hard-budget optimum sandwiches the soft optimum from above.
            let hard = obj.hard(budget, DEFAULT_STATE_CAP)?;
            Ok(ReportRow {
                strategy: "oracle:soft-lb".into(),
                policy: format!("lagrangian lambda={}", crate::report::fmt_sig(res.best_lambda, 6)),
                value: res.bound,
                value_kind: "exact".into(),
                half_width: None,
                probe_cost_max: 0.0,
                probe_cost_expected: 0.0,
                opt_hard: Some(hard.value),
                value_over_opt: Some(if hard.value > 0.0 { res.bound / hard.value } else { f64::NAN }),
                cost_over_budget: None,
            })
        })?,
        "nonadaptive" => with_objective(inst, |obj| {
            let res = obj.nonadaptive(budget, cfg.enum_cap as u128)?;
            let set = res.probe_set.clone().unwrap_or_default();
            Ok(ReportRow {
                strategy: "oracle:nonadaptive".into(),
                policy: describe_probe_set(&set),
                value: res.value,
                value_kind: "exact".into(),
                half_width: None,
                probe_cost_max: res.expected_cost,
                probe_cost_expected: res.expected_cost,
                opt_hard: None,
                value_over_opt: None,
                cost_over_budget: Some(res.expected_cost / budget),
            })
        })?,
        "outlier" => with_objective(inst, |obj| {
            let res = obj.outlier(budget)?;
            let set = res.probe_set.clone().unwrap_or_default();
            Ok(ReportRow {
                strategy: "oracle:outlier".into(),
                policy: describe_probe_set(&set),
                value: res.value,
                value_kind: "exact".into(),
                half_width: None,
                probe_cost_max: res.expected_cost,
                probe_cost_expected: res.expected_cost,
                opt_hard: None,
                value_over_opt: None,
                cost_over_budget: Some(res.expected_cost / budget),
            })
        })?,
        other => bail!("oracle mode {other:?} is not hard, soft-lb, nonadaptive, or outlier"),
    };
    Ok(Report { objective: inst.objective_name().into(), seed: cfg.seed, rows: vec![row] })
}

fn max_path_cost(inst: &Instance, tree: &probe_core::oracle::DecisionTree) -> f64 {
    match inst {
        Instance::Wct(i) => tree.max_path_cost(&WctObjective(i)),
        Instance::KMedian(i) => tree.max_path_cost(&KMedianObjective(i)),
        Instance::Steiner(i) => tree.max_path_cost(&SteinerObjective(i)),
        Instance::Makespan(_) => f64::NAN,
    }
}
