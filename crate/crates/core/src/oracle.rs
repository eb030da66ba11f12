//! Ground-truth solvers for small instances: the yardsticks every
//! strategy is measured against.
//!
//! The adaptive optimum is computed by exact dynamic programming over
//! information states `(probed set, observed outcomes)` — adaptivity
//! matters only through what has been observed, so memoizing on that pair
//! is lossless. The hard-budget variant enforces the probe budget on every
//! path; the soft-budget optimum (budget in expectation) is bounded from
//! below by a Lagrangian sweep that prices probes at `λ` and maximizes
//! `root_value(λ) − λ·C` over a geometric grid.

use std::collections::HashMap;

use crate::dist::{enumerate_joint, DiscreteDist};
use crate::error::{Error, Result};
use crate::kmedian::{kmedian_exhaustive, KMedianInstance};
use crate::metric::Elem;
use crate::steiner::{mst_over_terminals, SteinerInstance};
use crate::wct::{wct_value_given_realization, WctInstance};

/// Default cap on `Π(support_i + 1)` information states.
pub const DEFAULT_STATE_CAP: u128 = 10_000_000;

/// An objective that the brute-force oracles can drive: per-item
/// distributions and probe costs, the exact value of the best committed
/// solution given observations, and the no-probe value after discarding a
/// subset outright.
pub trait ProbeObjective {
    fn num_items(&self) -> usize;
    fn item_dist(&self, item: usize) -> &DiscreteDist;
    fn probe_cost(&self, item: usize) -> f64;
    /// `min_o E_unprobed[h(o; outcomes, ·)]`: probed items realized at
    /// `outcomes`, everything else in expectation.
    fn committed_value(&self, probed: &[usize], outcomes: &[f64]) -> f64;
    /// Best no-probe value on the complement of `removed`.
    fn outlier_value(&self, removed: &[usize]) -> f64;
}

/// An adaptive probing policy: internal nodes probe an item and branch per
/// outcome, leaves commit.
#[derive(Debug, Clone)]
pub enum DecisionTree {
    Leaf { probed: Vec<usize>, outcomes: Vec<f64>, value: f64 },
    Probe { item: usize, branches: Vec<(f64, f64, DecisionTree)> },
}

impl DecisionTree {
    pub fn expected_value(&self) -> f64 {
        match self {
            DecisionTree::Leaf { value, .. } => *value,
            DecisionTree::Probe { branches, .. } => {
                branches.iter().map(|(p, _, sub)| p * sub.expected_value()).sum()
            }
        }
    }

    pub fn expected_cost(&self, obj: &impl ProbeObjective) -> f64 {
        match self {
            DecisionTree::Leaf { probed, .. } => probed.iter().map(|&i| obj.probe_cost(i)).sum(),
            DecisionTree::Probe { branches, .. } => {
                branches.iter().map(|(p, _, sub)| p * sub.expected_cost(obj)).sum()
            }
        }
    }

    pub fn max_path_cost(&self, obj: &impl ProbeObjective) -> f64 {
        match self {
            DecisionTree::Leaf { probed, .. } => probed.iter().map(|&i| obj.probe_cost(i)).sum(),
            DecisionTree::Probe { branches, .. } => branches
                .iter()
                .map(|(_, _, sub)| sub.max_path_cost(obj))
                .fold(0.0, f64::max),
        }
    }

    pub fn total_leaf_probability(&self) -> f64 {
        match self {
            DecisionTree::Leaf { .. } => 1.0,
            DecisionTree::Probe { branches, .. } => {
                branches.iter().map(|(p, _, sub)| p * sub.total_leaf_probability()).sum()
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct OracleResult {
    pub value: f64,
    /// Expected probe spend of the optimal policy (for the outlier oracle,
    /// the cost of the chosen set).
    pub expected_cost: f64,
    /// The optimal fixed set, when the oracle produces one.
    pub probe_set: Option<Vec<usize>>,
    /// The optimal decision tree, for the adaptive oracle.
    pub tree: Option<DecisionTree>,
}

fn subsets_within_budget(obj: &impl ProbeObjective, budget: f64) -> Result<Vec<Vec<usize>>> {
    let n = obj.num_items();
    if n > 20 {
        return Err(Error::StateSpaceTooLarge { needed: 1u128 << n, cap: 1 << 20 });
    }
    let mut sets = Vec::new();
    for mask in 0u32..1 << n {
        let set: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
        let cost: f64 = set.iter().map(|&i| obj.probe_cost(i)).sum();
        if cost <= budget + 1e-9 {
            sets.push(set);
        }
    }
    Ok(sets)
}

/// Best fixed probe set under the budget, by exhaustive search with exact
/// expectation per subset.
pub fn nonadaptive_opt(
    obj: &impl ProbeObjective,
    budget: f64,
    enum_cap: u128,
) -> Result<OracleResult> {
    let mut best: Option<(f64, Vec<usize>)> = None;
    for set in subsets_within_budget(obj, budget)? {
        let ds: Vec<DiscreteDist> = set.iter().map(|&i| obj.item_dist(i).clone()).collect();
        let mut value = 0.0;
        for (outcomes, p) in enumerate_joint(&ds, enum_cap)? {
            value += p * obj.committed_value(&set, &outcomes);
        }
        if best.as_ref().is_none_or(|(bv, _)| value < *bv - 1e-12) {
            best = Some((value, set));
        }
    }
    let (value, set) = best.expect("the empty set is always affordable");
    let expected_cost = set.iter().map(|&i| obj.probe_cost(i)).sum();
    Ok(OracleResult { value, expected_cost, probe_set: Some(set), tree: None })
}

/// Exact optimum of the outlier problem: the cheapest-to-ignore subset
/// within the budget.
pub fn exact_outlier_opt(obj: &impl ProbeObjective, budget: f64) -> Result<OracleResult> {
    let mut best: Option<(f64, Vec<usize>)> = None;
    for set in subsets_within_budget(obj, budget)? {
        let value = obj.outlier_value(&set);
        if best.as_ref().is_none_or(|(bv, _)| value < *bv - 1e-12) {
            best = Some((value, set));
        }
    }
    let (value, set) = best.expect("the empty set is always affordable");
    let expected_cost = set.iter().map(|&i| obj.probe_cost(i)).sum();
    Ok(OracleResult { value, expected_cost, probe_set: Some(set), tree: None })
}

type StateKey = (u32, Vec<u8>);

struct AdaptiveDp<'a, O: ProbeObjective> {
    obj: &'a O,
    /// Hard budget, or infinity for the Lagrangian variant.
    budget: f64,
    /// Price per unit probe cost (zero for the hard variant).
    lambda: f64,
    memo: HashMap<StateKey, (f64, Option<usize>)>,
}

impl<'a, O: ProbeObjective> AdaptiveDp<'a, O> {
    fn new(obj: &'a O, budget: f64, lambda: f64) -> Self {
        Self { obj, budget, lambda, memo: HashMap::new() }
    }

    fn state_space(&self) -> u128 {
        (0..self.obj.num_items())
            .fold(1u128, |acc, i| acc.saturating_mul(self.obj.item_dist(i).len() as u128 + 1))
    }

    fn probed_of(mask: u32, n: usize) -> Vec<usize> {
        (0..n).filter(|&i| mask >> i & 1 == 1).collect()
    }

    fn solve(&mut self, mask: u32, outcome_idx: &[u8]) -> f64 {
        let key = (mask, outcome_idx.to_vec());
        if let Some(&(v, _)) = self.memo.get(&key) {
            return v;
        }
        let n = self.obj.num_items();
        let probed = Self::probed_of(mask, n);
        let outcomes: Vec<f64> = probed
            .iter()
            .zip(outcome_idx)
            .map(|(&i, &k)| self.obj.item_dist(i).support()[k as usize].0)
            .collect();
        let spent: f64 = probed.iter().map(|&i| self.obj.probe_cost(i)).sum();

        let mut best = self.obj.committed_value(&probed, &outcomes);
        let mut action = None;
        for i in 0..n {
            if mask >> i & 1 == 1 {
                continue;
            }
            let cost = self.obj.probe_cost(i);
            if spent + cost > self.budget + 1e-9 {
                continue;
            }
            let slot = probed.iter().filter(|&&j| j < i).count();
            let mut expect = self.lambda * cost;
            for (k, &(_, p)) in self.obj.item_dist(i).support().iter().enumerate() {
                let mut child_idx = outcome_idx.to_vec();
                child_idx.insert(slot, k as u8);
                expect += p * self.solve(mask | 1 << i, &child_idx);
            }
            if expect < best - 1e-12 {
                best = expect;
                action = Some(i);
            }
        }
        self.memo.insert(key, (best, action));
        best
    }

    fn extract_tree(&self, mask: u32, outcome_idx: &[u8]) -> DecisionTree {
        let n = self.obj.num_items();
        let key = (mask, outcome_idx.to_vec());
        let &(value, action) = self.memo.get(&key).expect("state was solved");
        let probed = Self::probed_of(mask, n);
        match action {
            None => {
                let outcomes: Vec<f64> = probed
                    .iter()
                    .zip(outcome_idx)
                    .map(|(&i, &k)| self.obj.item_dist(i).support()[k as usize].0)
                    .collect();
                DecisionTree::Leaf { probed, outcomes, value }
            }
            Some(i) => {
                let slot = probed.iter().filter(|&&j| j < i).count();
                let branches = self
                    .obj
                    .item_dist(i)
                    .support()
                    .iter()
                    .enumerate()
                    .map(|(k, &(v, p))| {
                        let mut child_idx = outcome_idx.to_vec();
                        child_idx.insert(slot, k as u8);
                        (p, v, self.extract_tree(mask | 1 << i, &child_idx))
                    })
                    .collect();
                DecisionTree::Probe { item: i, branches }
            }
        }
    }
}

/// Exact optimum over all adaptive policies whose probe cost stays within
/// the budget on every decision path, with an optimal tree.
pub fn adaptive_opt_hard(
    obj: &impl ProbeObjective,
    budget: f64,
    state_cap: u128,
) -> Result<OracleResult> {
    if obj.num_items() > 25 {
        return Err(Error::StateSpaceTooLarge { needed: 1u128 << obj.num_items(), cap: 1 << 25 });
    }
    let mut dp = AdaptiveDp::new(obj, budget, 0.0);
    let needed = dp.state_space();
    if needed > state_cap {
        return Err(Error::StateSpaceTooLarge { needed, cap: state_cap });
    }
    let value = dp.solve(0, &[]);
    let tree = dp.extract_tree(0, &[]);
    let expected_cost = tree.expected_cost(obj);
    Ok(OracleResult { value, expected_cost, probe_set: None, tree: Some(tree) })
}

#[derive(Debug, Clone, Copy)]
pub struct SoftBudgetBound {
    /// Certified lower bound on the soft-budget adaptive optimum.
    pub bound: f64,
    pub best_lambda: f64,
}

/// Geometric λ grid `{0} ∪ {2^-10 … 2^10}`.
pub fn default_lambda_grid() -> Vec<f64> {
    let mut grid = vec![0.0];
    grid.extend((-10..=10).map(|k| (k as f64).exp2()));
    grid
}

/// Lower bound on the soft-budget adaptive optimum: for each `λ ≥ 0`, the
/// unconstrained optimum with probes priced at `λ` minus `λ·C` bounds any
/// policy whose expected spend is within `C`; take the best over the grid.
pub fn adaptive_opt_soft_lb(
    obj: &impl ProbeObjective,
    budget: f64,
    lambdas: &[f64],
    state_cap: u128,
) -> Result<SoftBudgetBound> {
    if obj.num_items() > 25 {
        return Err(Error::StateSpaceTooLarge { needed: 1u128 << obj.num_items(), cap: 1 << 25 });
    }
    let mut best: Option<SoftBudgetBound> = None;
    for &lambda in lambdas {
        assert!(lambda >= 0.0, "negative probe prices are not a relaxation");
        let mut dp = AdaptiveDp::new(obj, f64::INFINITY, lambda);
        let needed = dp.state_space();
        if needed > state_cap {
            return Err(Error::StateSpaceTooLarge { needed, cap: state_cap });
        }
        let bound = dp.solve(0, &[]) - lambda * budget;
        if best.is_none_or(|b| bound > b.bound) {
            best = Some(SoftBudgetBound { bound, best_lambda: lambda });
        }
    }
    best.ok_or_else(|| Error::Internal("empty lambda grid".into()))
}

/// Weighted completion time as an oracle objective.
pub struct WctObjective<'a>(pub &'a WctInstance);

impl ProbeObjective for WctObjective<'_> {
    fn num_items(&self) -> usize {
        self.0.len()
    }

    fn item_dist(&self, item: usize) -> &DiscreteDist {
        &self.0.jobs()[item].size
    }

    fn probe_cost(&self, item: usize) -> f64 {
        self.0.jobs()[item].probe_cost
    }

    fn committed_value(&self, probed: &[usize], outcomes: &[f64]) -> f64 {
        wct_value_given_realization(self.0, probed, outcomes)
    }

    fn outlier_value(&self, removed: &[usize]) -> f64 {
        let keep: Vec<usize> = (0..self.0.len()).filter(|i| !removed.contains(i)).collect();
        self.0.no_probe_value(&keep)
    }
}

/// K-median as an oracle objective; clusterings are solved exhaustively,
/// so instances must be small.
pub struct KMedianObjective<'a>(pub &'a KMedianInstance);

impl KMedianObjective<'_> {
    fn exhaustive(&self, clients: &[usize]) -> f64 {
        kmedian_exhaustive(self.0.metric(), clients, &self.0.candidate_elems(), self.0.k(), 1_000_000)
            .expect("oracle instances must be exhaustively solvable")
            .value
    }
}

impl ProbeObjective for KMedianObjective<'_> {
    fn num_items(&self) -> usize {
        self.0.nodes().len()
    }

    fn item_dist(&self, item: usize) -> &DiscreteDist {
        &self.0.nodes().nodes()[item].location
    }

    fn probe_cost(&self, item: usize) -> f64 {
        self.0.nodes().nodes()[item].probe_cost
    }

    fn committed_value(&self, probed: &[usize], outcomes: &[f64]) -> f64 {
        let unprobed: Vec<usize> =
            (0..self.num_items()).filter(|v| !probed.contains(v)).collect();
        let mut clients: Vec<usize> = outcomes.iter().map(|&p| p as usize).collect();
        clients.extend(unprobed.iter().map(|&v| self.0.metric().flat(Elem::Node(v))));
        self.exhaustive(&clients)
    }

    fn outlier_value(&self, removed: &[usize]) -> f64 {
        let keep: Vec<usize> = (0..self.num_items()).filter(|v| !removed.contains(v)).collect();
        self.exhaustive(&self.0.node_elems(&keep))
    }
}

/// Spanning trees as an oracle objective (terminal-MST surrogate).
pub struct SteinerObjective<'a>(pub &'a SteinerInstance);

impl ProbeObjective for SteinerObjective<'_> {
    fn num_items(&self) -> usize {
        self.0.nodes().len()
    }

    fn item_dist(&self, item: usize) -> &DiscreteDist {
        &self.0.nodes().nodes()[item].location
    }

    fn probe_cost(&self, item: usize) -> f64 {
        self.0.nodes().nodes()[item].probe_cost
    }

    fn committed_value(&self, probed: &[usize], outcomes: &[f64]) -> f64 {
        let unprobed: Vec<usize> =
            (0..self.num_items()).filter(|v| !probed.contains(v)).collect();
        let mut terminals: Vec<usize> = outcomes.iter().map(|&p| p as usize).collect();
        terminals.extend(self.0.node_elems(&unprobed));
        mst_over_terminals(self.0.metric(), &terminals).value
    }

    fn outlier_value(&self, removed: &[usize]) -> f64 {
        let keep: Vec<usize> = (0..self.num_items()).filter(|v| !removed.contains(v)).collect();
        mst_over_terminals(self.0.metric(), &self.0.node_elems(&keep)).value
    }
}
