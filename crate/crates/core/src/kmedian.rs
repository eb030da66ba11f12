//! K-median clustering over distributional nodes.
//!
//! Clients are the instance's nodes; once a probe set is observed, the
//! problem is deterministic K-median on the extended metric: realized
//! nodes sit at concrete points, unprobed nodes stay as node elements at
//! expected distances. Centers come from a fixed candidate subset of the
//! points (the well-behaved variant) or, for the gap construction, from
//! any element including nodes.
//!
//! Small clusterings are solved exhaustively; larger ones by single-swap
//! local search. The outlier step — which nodes to drop within the probe
//! budget so the surviving clustering is cheapest — is exhaustive up to
//! 2^20 subsets and greedy (against a 5x relaxed budget) beyond that.

use itertools::Itertools;

use crate::dist::DiscreteDist;
use crate::error::{Error, Result};
use crate::eval::{evaluate_expectation, EvalOptions};
use crate::metric::{Elem, ExtendedMetric, MetricProbePolicy, NodeSet, PointSet};

/// Where centers may be opened.
#[derive(Debug, Clone)]
pub enum CenterPolicy {
    /// Only these concrete points.
    FixedPoints(Vec<usize>),
    /// Any element of the extended space, nodes included.
    AnyElement,
}

#[derive(Debug, Clone)]
pub struct KMedianInstance {
    points: PointSet,
    nodes: NodeSet,
    k: usize,
    centers: CenterPolicy,
    budget: f64,
    metric: ExtendedMetric,
}

impl KMedianInstance {
    pub fn new(
        points: PointSet,
        nodes: NodeSet,
        k: usize,
        centers: CenterPolicy,
        budget: f64,
    ) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidInstance("need k >= 1".into()));
        }
        if let CenterPolicy::FixedPoints(cand) = &centers {
            if cand.len() < k {
                return Err(Error::InvalidInstance(format!(
                    "{} candidate centers for k = {k}",
                    cand.len()
                )));
            }
            if let Some(&bad) = cand.iter().find(|&&p| p >= points.len()) {
                return Err(Error::InvalidInstance(format!("candidate center {bad} out of range")));
            }
        }
        let max_cost = nodes.nodes().iter().map(|n| n.probe_cost).fold(0.0, f64::max);
        if !budget.is_finite() || budget < max_cost {
            return Err(Error::InvalidInstance(format!(
                "budget {budget} below the largest probe cost {max_cost}"
            )));
        }
        let metric = ExtendedMetric::build(&points, &nodes)?;
        Ok(Self { points, nodes, k, centers, budget, metric })
    }

    pub fn points(&self) -> &PointSet {
        &self.points
    }

    pub fn nodes(&self) -> &NodeSet {
        &self.nodes
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }

    pub fn metric(&self) -> &ExtendedMetric {
        &self.metric
    }

    pub fn center_policy(&self) -> &CenterPolicy {
        &self.centers
    }

    /// Candidate centers as flat metric indices.
    pub fn candidate_elems(&self) -> Vec<usize> {
        match &self.centers {
            CenterPolicy::FixedPoints(cand) => cand.clone(),
            CenterPolicy::AnyElement => (0..self.metric.len()).collect(),
        }
    }

    /// Flat indices of a set of nodes.
    pub fn node_elems(&self, nodes: &[usize]) -> Vec<usize> {
        nodes.iter().map(|&v| self.metric.flat(Elem::Node(v))).collect()
    }
}

#[derive(Debug, Clone)]
pub struct ClusteringSolution {
    /// Open centers, flat metric indices.
    pub centers: Vec<usize>,
    /// For each client, the index into `centers` it is assigned to.
    pub assignment: Vec<usize>,
    pub value: f64,
}

/// Assigns every client to its nearest open center (ties to the lowest
/// flat index).
pub fn assign_clients(d: &ExtendedMetric, clients: &[usize], centers: &[usize]) -> ClusteringSolution {
    assert!(!centers.is_empty() || clients.is_empty());
    let mut assignment = Vec::with_capacity(clients.len());
    let mut value = 0.0;
    for &c in clients {
        let mut best = 0;
        for (slot, &ctr) in centers.iter().enumerate().skip(1) {
            let cur = d.dist(c, centers[best]);
            let cand = d.dist(c, ctr);
            if cand < cur || (cand == cur && ctr < centers[best]) {
                best = slot;
            }
        }
        value += d.dist(c, centers[best]);
        assignment.push(best);
    }
    ClusteringSolution { centers: centers.to_vec(), assignment, value }
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let mut acc: u128 = 1;
    for i in 0..k.min(n - k) {
        acc = acc.saturating_mul((n - i) as u128) / (i + 1) as u128;
    }
    acc
}

/// Exact K-median by enumerating every k-subset of the candidates.
pub fn kmedian_exhaustive(
    d: &ExtendedMetric,
    clients: &[usize],
    candidates: &[usize],
    k: usize,
    cap: u128,
) -> Result<ClusteringSolution> {
    let k = k.min(candidates.len());
    if clients.is_empty() {
        return Ok(ClusteringSolution { centers: candidates[..k].to_vec(), assignment: vec![], value: 0.0 });
    }
    let needed = binomial(candidates.len(), k);
    if needed > cap {
        return Err(Error::EnumerationTooLarge { needed, cap });
    }
    let mut best: Option<ClusteringSolution> = None;
    for combo in candidates.iter().cloned().combinations(k) {
        let sol = assign_clients(d, clients, &combo);
        if best.as_ref().is_none_or(|b| sol.value < b.value) {
            best = Some(sol);
        }
    }
    Ok(best.expect("k >= 1 and candidates nonempty"))
}

/// Single-swap local search: greedy start, then replace one open center by
/// one closed candidate while the improvement exceeds `1e-6` of the
/// current value.
pub fn kmedian_local_search(
    d: &ExtendedMetric,
    clients: &[usize],
    candidates: &[usize],
    k: usize,
) -> ClusteringSolution {
    let k = k.min(candidates.len());
    if clients.is_empty() {
        return ClusteringSolution { centers: candidates[..k].to_vec(), assignment: vec![], value: 0.0 };
    }
    assert!(k >= 1, "need at least one center for nonempty clients");
    let mut open: Vec<usize> = Vec::with_capacity(k);
    // Greedy: each step opens the candidate that helps most.
    for _ in 0..k {
        let mut best: Option<(usize, f64)> = None;
        for &cand in candidates {
            if open.contains(&cand) {
                continue;
            }
            open.push(cand);
            let value = assign_clients(d, clients, &open).value;
            open.pop();
            if best.is_none_or(|(_, bv)| value < bv) {
                best = Some((cand, value));
            }
        }
        open.push(best.expect("enough candidates").0);
    }

    let mut current = assign_clients(d, clients, &open);
    loop {
        let mut improved = false;
        let mut best_swap: Option<(usize, usize, f64)> = None;
        for slot in 0..current.centers.len() {
            for &cand in candidates {
                if current.centers.contains(&cand) {
                    continue;
                }
                let mut trial = current.centers.clone();
                trial[slot] = cand;
                let value = assign_clients(d, clients, &trial).value;
                if best_swap.is_none_or(|(_, _, bv)| value < bv) {
                    best_swap = Some((slot, cand, value));
                }
            }
        }
        if let Some((slot, cand, value)) = best_swap {
            if value < current.value - 1e-6 * current.value.max(1e-12) {
                let mut centers = current.centers.clone();
                centers[slot] = cand;
                current = assign_clients(d, clients, &centers);
                improved = true;
            }
        }
        if !improved {
            break;
        }
    }
    current
}

/// Exhaustive when small, local search otherwise.
pub fn solve_kmedian(
    d: &ExtendedMetric,
    clients: &[usize],
    candidates: &[usize],
    k: usize,
) -> ClusteringSolution {
    const EXHAUSTIVE_CAP: u128 = 100_000;
    match kmedian_exhaustive(d, clients, candidates, k, EXHAUSTIVE_CAP) {
        Ok(sol) => sol,
        Err(_) => kmedian_local_search(d, clients, candidates, k),
    }
}

/// Clustering value of the nodes in `keep` (no probing, node elements at
/// expected distances).
pub fn remaining_value(inst: &KMedianInstance, keep: &[usize]) -> f64 {
    let clients = inst.node_elems(keep);
    solve_kmedian(&inst.metric, &clients, &inst.candidate_elems(), inst.k).value
}

/// Picks the outlier set: the nodes to probe. Exhaustive over subsets
/// within the budget when `2^|V|` is enumerable; otherwise greedy removal
/// by clustering-cost reduction per unit probe cost against budget `5C`.
pub fn outlier_kmedian(inst: &KMedianInstance) -> Vec<usize> {
    let n = inst.nodes.len();
    if n <= 20 {
        let mut best: Option<(f64, Vec<usize>)> = None;
        for mask in 0u32..1 << n {
            let set: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
            if inst.nodes.probe_cost_of(&set) > inst.budget + 1e-12 {
                continue;
            }
            let keep: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 0).collect();
            let value = remaining_value(inst, &keep);
            if best.as_ref().is_none_or(|(bv, _)| value < *bv - 1e-12) {
                best = Some((value, set));
            }
        }
        return best.expect("empty set is always affordable").1;
    }

    let relaxed = 5.0 * inst.budget;
    let mut outliers: Vec<usize> = Vec::new();
    let mut keep: Vec<usize> = (0..n).collect();
    let mut current = remaining_value(inst, &keep);
    loop {
        let spent = inst.nodes.probe_cost_of(&outliers);
        let mut best: Option<(usize, f64)> = None;
        for (pos, &v) in keep.iter().enumerate() {
            let cost = inst.nodes.nodes()[v].probe_cost;
            if spent + cost > relaxed + 1e-12 {
                continue;
            }
            let trial: Vec<usize> =
                keep.iter().enumerate().filter(|&(p, _)| p != pos).map(|(_, &x)| x).collect();
            let value = remaining_value(inst, &trial);
            let gain = (current - value) / cost.max(1e-12);
            if gain > 0.0 && best.is_none_or(|(_, bg)| gain > bg) {
                best = Some((pos, gain));
            }
        }
        match best {
            Some((pos, _)) => {
                let v = keep.remove(pos);
                outliers.push(v);
                current = remaining_value(inst, &keep);
            }
            None => break,
        }
    }
    outliers.sort_unstable();
    outliers
}

/// Expected clustering value of probing `probe_set`: per realization the
/// probed nodes become concrete points and the rest stay node elements.
pub fn kmedian_policy_for_set(
    inst: &KMedianInstance,
    probe_set: Vec<usize>,
    opts: &EvalOptions,
) -> Result<MetricProbePolicy> {
    let unprobed: Vec<usize> = (0..inst.nodes.len()).filter(|v| !probe_set.contains(v)).collect();
    let unprobed_elems = inst.node_elems(&unprobed);
    let candidates = inst.candidate_elems();
    let ds: Vec<DiscreteDist> =
        probe_set.iter().map(|&v| inst.nodes.nodes()[v].location.clone()).collect();
    let value = evaluate_expectation(&ds, opts.exact_cap, opts.seed, opts.trials, |locs| {
        let mut clients: Vec<usize> = locs.iter().map(|&p| p as usize).collect();
        clients.extend_from_slice(&unprobed_elems);
        solve_kmedian(&inst.metric, &clients, &candidates, inst.k).value
    })?;
    let probe_cost = inst.nodes.probe_cost_of(&probe_set);
    Ok(MetricProbePolicy { probe_set, probe_cost, value })
}

/// The non-adaptive strategy: probe the outlier set, then solve the
/// deterministic K-median per realization.
pub fn kmedian_nonadaptive(inst: &KMedianInstance, opts: &EvalOptions) -> Result<MetricProbePolicy> {
    kmedian_policy_for_set(inst, outlier_kmedian(inst), opts)
}

#[derive(Debug, Clone, Copy)]
pub struct RecombinantCheck {
    /// Optimum of the mixed problem: realized probed points plus unprobed
    /// node elements.
    pub q1: f64,
    /// Optimum over the unprobed nodes alone.
    pub q2: f64,
    /// Expected per-scenario optimum with the probed values held fixed.
    pub q3: f64,
    pub holds: bool,
}

/// Verifies `Q1 ≤ 5·Q2 + 4·Q3` on an exhaustively solvable instance, for
/// the probed set `probed` realized at point indices `values`.
pub fn recombinant_check_kmedian(
    inst: &KMedianInstance,
    probed: &[usize],
    values: &[usize],
    cap: u128,
) -> Result<RecombinantCheck> {
    assert_eq!(probed.len(), values.len());
    let candidates = inst.candidate_elems();
    let unprobed: Vec<usize> = (0..inst.nodes.len()).filter(|v| !probed.contains(v)).collect();
    let unprobed_elems = inst.node_elems(&unprobed);

    let mut mixed_clients: Vec<usize> = values.to_vec();
    mixed_clients.extend_from_slice(&unprobed_elems);
    let q1 = kmedian_exhaustive(&inst.metric, &mixed_clients, &candidates, inst.k, cap)?.value;

    let q2 = kmedian_exhaustive(&inst.metric, &unprobed_elems, &candidates, inst.k, cap)?.value;

    let ds: Vec<DiscreteDist> =
        unprobed.iter().map(|&v| inst.nodes.nodes()[v].location.clone()).collect();
    let mut q3 = 0.0;
    for (locs, prob) in crate::dist::enumerate_joint(&ds, cap)? {
        let mut scenario: Vec<usize> = values.to_vec();
        scenario.extend(locs.iter().map(|&p| p as usize));
        q3 += prob * kmedian_exhaustive(&inst.metric, &scenario, &candidates, inst.k, cap)?.value;
    }

    Ok(RecombinantCheck { q1, q2, q3, holds: q1 <= 5.0 * q2 + 4.0 * q3 + 1e-9 })
}
