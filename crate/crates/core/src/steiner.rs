//! Spanning trees over distributional nodes, with the terminal-MST
//! surrogate for the Steiner objective.
//!
//! After probing, the tree must connect every node: realized ones at
//! their points, unprobed ones as node elements of the extended metric.
//! The minimum spanning tree over the terminals is the committed solution;
//! its union property (two partial trees plus any cross edge span the
//! whole set) is what makes probed/unprobed recombination lossless.

use crate::dist::DiscreteDist;
use crate::error::{Error, Result};
use crate::eval::{evaluate_expectation, EvalOptions};
use crate::metric::{Elem, ExtendedMetric, MetricProbePolicy, NodeSet, PointSet};

#[derive(Debug, Clone)]
pub struct SteinerInstance {
    points: PointSet,
    nodes: NodeSet,
    budget: f64,
    metric: ExtendedMetric,
}

impl SteinerInstance {
    pub fn new(points: PointSet, nodes: NodeSet, budget: f64) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::InvalidInstance("need at least two nodes to connect".into()));
        }
        let max_cost = nodes.nodes().iter().map(|n| n.probe_cost).fold(0.0, f64::max);
        if !budget.is_finite() || budget < max_cost {
            return Err(Error::InvalidInstance(format!(
                "budget {budget} below the largest probe cost {max_cost}"
            )));
        }
        let metric = ExtendedMetric::build(&points, &nodes)?;
        Ok(Self { points, nodes, budget, metric })
    }

    pub fn points(&self) -> &PointSet {
        &self.points
    }

    pub fn nodes(&self) -> &NodeSet {
        &self.nodes
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }

    pub fn metric(&self) -> &ExtendedMetric {
        &self.metric
    }

    pub fn node_elems(&self, nodes: &[usize]) -> Vec<usize> {
        nodes.iter().map(|&v| self.metric.flat(Elem::Node(v))).collect()
    }
}

#[derive(Debug, Clone)]
pub struct TreeSolution {
    /// Tree edges as flat metric index pairs `(a, b)` with `a < b`.
    pub edges: Vec<(usize, usize)>,
    pub value: f64,
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        Self((0..n).collect())
    }

    fn find(&mut self, x: usize) -> usize {
        if self.0[x] != x {
            let root = self.find(self.0[x]);
            self.0[x] = root;
        }
        self.0[x]
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.0[ra.max(rb)] = ra.min(rb);
        true
    }
}

/// Exact MST of the complete graph induced on `terminals` (duplicates are
/// collapsed). Kruskal with edges ordered by `(weight, a, b)`, so equal
/// weights break deterministically.
pub fn mst_over_terminals(d: &ExtendedMetric, terminals: &[usize]) -> TreeSolution {
    let mut verts: Vec<usize> = terminals.to_vec();
    verts.sort_unstable();
    verts.dedup();
    if verts.len() <= 1 {
        return TreeSolution { edges: vec![], value: 0.0 };
    }
    let mut edges: Vec<(f64, usize, usize)> = Vec::with_capacity(verts.len() * (verts.len() - 1) / 2);
    for (i, &a) in verts.iter().enumerate() {
        for &b in &verts[i + 1..] {
            edges.push((d.dist(a, b), a, b));
        }
    }
    edges.sort_by(|x, y| x.partial_cmp(y).expect("finite distances"));

    let index_of = |v: usize| verts.binary_search(&v).expect("terminal");
    let mut uf = UnionFind::new(verts.len());
    let mut tree = Vec::with_capacity(verts.len() - 1);
    let mut value = 0.0;
    for (w, a, b) in edges {
        if uf.union(index_of(a), index_of(b)) {
            tree.push((a, b));
            value += w;
            if tree.len() == verts.len() - 1 {
                break;
            }
        }
    }
    TreeSolution { edges: tree, value }
}

/// MST value of the given nodes with no probing.
pub fn remaining_value(inst: &SteinerInstance, keep: &[usize]) -> f64 {
    mst_over_terminals(&inst.metric, &inst.node_elems(keep)).value
}

/// Picks the outlier set: exhaustive over affordable subsets up to
/// `2^20`, greedy drop-per-unit-cost against budget `4C` beyond.
pub fn outlier_steiner(inst: &SteinerInstance) -> Vec<usize> {
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

    let relaxed = 4.0 * inst.budget;
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

/// Expected MST value of probing `probe_set`.
pub fn steiner_policy_for_set(
    inst: &SteinerInstance,
    probe_set: Vec<usize>,
    opts: &EvalOptions,
) -> Result<MetricProbePolicy> {
    let unprobed: Vec<usize> = (0..inst.nodes.len()).filter(|v| !probe_set.contains(v)).collect();
    let unprobed_elems = inst.node_elems(&unprobed);
    let ds: Vec<DiscreteDist> =
        probe_set.iter().map(|&v| inst.nodes.nodes()[v].location.clone()).collect();
    let value = evaluate_expectation(&ds, opts.exact_cap, opts.seed, opts.trials, |locs| {
        let mut terminals: Vec<usize> = locs.iter().map(|&p| p as usize).collect();
        terminals.extend_from_slice(&unprobed_elems);
        mst_over_terminals(&inst.metric, &terminals).value
    })?;
    let probe_cost = inst.nodes.probe_cost_of(&probe_set);
    Ok(MetricProbePolicy { probe_set, probe_cost, value })
}

/// The non-adaptive strategy: probe the outlier set, then connect the
/// realized points and remaining node elements by an MST per realization.
pub fn steiner_nonadaptive(inst: &SteinerInstance, opts: &EvalOptions) -> Result<MetricProbePolicy> {
    steiner_policy_for_set(inst, outlier_steiner(inst), opts)
}

#[derive(Debug, Clone, Copy)]
pub struct SteinerRecombinantCheck {
    /// MST over realized probed points plus unprobed node elements.
    pub mixed: f64,
    /// MST over the realized probed points alone.
    pub probed_tree: f64,
    /// MST over the unprobed node elements alone.
    pub unprobed_tree: f64,
    /// Cheapest edge between the two sides (zero when a side is empty).
    pub cross_edge: f64,
    pub holds: bool,
}

/// Union bound for the MST surrogate: joining the two partial trees by the
/// cheapest cross edge spans the mixed terminal set, so
/// `mixed ≤ probed_tree + unprobed_tree + cross_edge`.
pub fn recombinant_check_steiner(
    inst: &SteinerInstance,
    probed: &[usize],
    values: &[usize],
) -> SteinerRecombinantCheck {
    assert_eq!(probed.len(), values.len());
    let unprobed: Vec<usize> = (0..inst.nodes.len()).filter(|v| !probed.contains(v)).collect();
    let unprobed_elems = inst.node_elems(&unprobed);
    let probed_elems: Vec<usize> = values.to_vec();

    let mut mixed_terminals = probed_elems.clone();
    mixed_terminals.extend_from_slice(&unprobed_elems);
    let mixed = mst_over_terminals(&inst.metric, &mixed_terminals).value;
    let probed_tree = mst_over_terminals(&inst.metric, &probed_elems).value;
    let unprobed_tree = mst_over_terminals(&inst.metric, &unprobed_elems).value;

    let cross_edge = if probed_elems.is_empty() || unprobed_elems.is_empty() {
        0.0
    } else {
        let mut best = f64::INFINITY;
        for &a in &probed_elems {
            for &b in &unprobed_elems {
                best = best.min(inst.metric.dist(a, b));
            }
        }
        best
    };

    let holds = mixed <= probed_tree + unprobed_tree + cross_edge + 1e-9;
    SteinerRecombinantCheck { mixed, probed_tree, unprobed_tree, cross_edge, holds }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{unit_f64, SeedSpec};
    use crate::metric::{MetricNode, Norm};

    fn line_points(xs: &[f64]) -> PointSet {
        PointSet::new_coords(xs.iter().map(|&x| [x, 0.0]).collect(), Norm::L1).unwrap()
    }

    fn node_at(support: Vec<(usize, f64)>, cost: f64) -> MetricNode {
        MetricNode {
            location: DiscreteDist::new(support.into_iter().map(|(i, p)| (i as f64, p)).collect())
                .unwrap(),
            probe_cost: cost,
        }
    }

    fn random_instance(rng: &mut impl rand_core::RngCore, np: usize, nv: usize) -> SteinerInstance {
        let pts: Vec<[f64; 2]> =
            (0..np).map(|_| [unit_f64(rng) * 10.0, unit_f64(rng) * 10.0]).collect();
        let points = PointSet::new_coords(pts, Norm::L2).unwrap();
        let nodes: Vec<MetricNode> = (0..nv)
            .map(|_| {
                let s = 1 + (unit_f64(rng) * 3.0) as usize;
                let raw: Vec<(usize, f64)> =
                    (0..s).map(|_| ((unit_f64(rng) * np as f64) as usize % np, 0.1 + unit_f64(rng))).collect();
                let total: f64 = raw.iter().map(|&(_, p)| p).sum();
                node_at(raw.into_iter().map(|(i, p)| (i, p / total)).collect(), 0.5 + unit_f64(rng))
            })
            .collect();
        let node_set = NodeSet::new(nodes, &points).unwrap();
        let max_c = node_set.nodes().iter().map(|n| n.probe_cost).fold(0.0, f64::max);
        let sum_c: f64 = node_set.nodes().iter().map(|n| n.probe_cost).sum();
        let budget = max_c + unit_f64(rng) * (sum_c - max_c);
        SteinerInstance::new(points, node_set, budget).unwrap()
    }

    #[test]
    fn collinear_terminals() {
        let ps = line_points(&[0.0, 1.0, 2.0]);
        let ns = NodeSet::new(vec![], &ps).unwrap();
        let m = ExtendedMetric::build(&ps, &ns).unwrap();
        let tree = mst_over_terminals(&m, &[0, 1, 2]);
        assert!((tree.value - 2.0).abs() < 1e-12);
        assert_eq!(tree.edges.len(), 2);
    }

    #[test]
    fn single_terminal_is_free() {
        let ps = line_points(&[0.0, 1.0]);
        let ns = NodeSet::new(vec![], &ps).unwrap();
        let m = ExtendedMetric::build(&ps, &ns).unwrap();
        assert_eq!(mst_over_terminals(&m, &[1]).value, 0.0);
        assert_eq!(mst_over_terminals(&m, &[]).value, 0.0);
        // Duplicates collapse.
        assert_eq!(mst_over_terminals(&m, &[1, 1, 1]).value, 0.0);
    }

    /// All labeled trees on the terminals via Prüfer sequences.
    fn brute_force_mst(d: &ExtendedMetric, verts: &[usize]) -> f64 {
        let n = verts.len();
        if n <= 1 {
            return 0.0;
        }
        if n == 2 {
            return d.dist(verts[0], verts[1]);
        }
        let mut best = f64::INFINITY;
        let seq_len = n - 2;
        let total = (n as u64).pow(seq_len as u32);
        for code in 0..total {
            let mut seq = Vec::with_capacity(seq_len);
            let mut c = code;
            for _ in 0..seq_len {
                seq.push((c % n as u64) as usize);
                c /= n as u64;
            }
            // Decode the Prüfer sequence into edges.
            let mut degree = vec![1u32; n];
            for &s in &seq {
                degree[s] += 1;
            }
            let mut value = 0.0;
            let mut deg = degree.clone();
            for &s in &seq {
                let leaf = (0..n).find(|&v| deg[v] == 1).unwrap();
                value += d.dist(verts[leaf], verts[s]);
                deg[leaf] = 0;
                deg[s] -= 1;
            }
            let rest: Vec<usize> = (0..n).filter(|&v| deg[v] == 1).collect();
            value += d.dist(verts[rest[0]], verts[rest[1]]);
            best = best.min(value);
        }
        best
    }

    #[test]
    fn mst_matches_all_spanning_trees_on_small_sets() {
        let mut rng = SeedSpec::new(79, 0).rng();
        for _ in 0..10 {
            let inst = random_instance(&mut rng, 6, 2);
            let verts: Vec<usize> = (0..6).collect();
            let fast = mst_over_terminals(inst.metric(), &verts).value;
            let slow = brute_force_mst(inst.metric(), &verts);
            assert!((fast - slow).abs() < 1e-9, "{fast} vs {slow}");
        }
    }

    #[test]
    fn big_budget_drops_to_one_node() {
        let ps = line_points(&[0.0, 7.0]);
        let nodes = vec![node_at(vec![(0, 1.0)], 1.0), node_at(vec![(1, 1.0)], 1.0)];
        let ns = NodeSet::new(nodes, &ps).unwrap();
        let inst = SteinerInstance::new(ps, ns, 5.0).unwrap();
        let s = outlier_steiner(&inst);
        let keep: Vec<usize> = (0..2).filter(|v| !s.contains(v)).collect();
        assert!(remaining_value(&inst, &keep) < 1e-12);
    }

    #[test]
    fn outlier_prefers_the_distant_node() {
        let ps = line_points(&[0.0, 1.0, 50.0]);
        let nodes = vec![
            node_at(vec![(0, 1.0)], 1.0),
            node_at(vec![(1, 1.0)], 1.0),
            node_at(vec![(2, 1.0)], 1.0),
        ];
        let ns = NodeSet::new(nodes, &ps).unwrap();
        let inst = SteinerInstance::new(ps, ns, 1.0).unwrap();
        assert_eq!(outlier_steiner(&inst), vec![2]);
    }

    #[test]
    fn exhaustive_outlier_is_optimal_within_budget() {
        let mut rng = SeedSpec::new(83, 0).rng();
        for _ in 0..10 {
            let inst = random_instance(&mut rng, 5, 5);
            let s = outlier_steiner(&inst);
            assert!(inst.nodes().probe_cost_of(&s) <= inst.budget() + 1e-9);
            let keep: Vec<usize> = (0..5).filter(|v| !s.contains(v)).collect();
            let chosen = remaining_value(&inst, &keep);
            for mask in 0u32..32 {
                let set: Vec<usize> = (0..5).filter(|i| mask >> i & 1 == 1).collect();
                if inst.nodes().probe_cost_of(&set) > inst.budget() + 1e-12 {
                    continue;
                }
                let other: Vec<usize> = (0..5).filter(|i| mask >> i & 1 == 0).collect();
                assert!(chosen <= remaining_value(&inst, &other) + 1e-9);
            }
        }
    }

    #[test]
    fn point_mass_nodes_make_probing_irrelevant() {
        let ps = line_points(&[0.0, 2.0, 5.0]);
        let nodes = vec![
            node_at(vec![(0, 1.0)], 1.0),
            node_at(vec![(1, 1.0)], 1.0),
            node_at(vec![(2, 1.0)], 1.0),
        ];
        let ns = NodeSet::new(nodes, &ps).unwrap();
        let inst = SteinerInstance::new(ps, ns, 1.0).unwrap();
        let policy = steiner_nonadaptive(&inst, &EvalOptions::default()).unwrap();
        let all_elems = inst.node_elems(&[0, 1, 2]);
        let direct = mst_over_terminals(inst.metric(), &all_elems).value;
        // Probed point masses land on the same points the nodes already
        // occupy, so the evaluated value equals the no-probe MST.
        assert!((policy.value.value() - direct).abs() < 1e-9);
    }

    #[test]
    fn empty_probe_set_is_plain_mst() {
        let mut rng = SeedSpec::new(89, 0).rng();
        let inst = random_instance(&mut rng, 5, 4);
        let policy = steiner_policy_for_set(&inst, vec![], &EvalOptions::default()).unwrap();
        let direct = remaining_value(&inst, &[0, 1, 2, 3]);
        assert!(policy.value.is_exact());
        assert!((policy.value.value() - direct).abs() < 1e-12);
    }

    #[test]
    fn policy_value_matches_manual_enumeration() {
        let mut rng = SeedSpec::new(97, 0).rng();
        let inst = random_instance(&mut rng, 4, 4);
        let probe_set = vec![1, 3];
        let policy =
            steiner_policy_for_set(&inst, probe_set.clone(), &EvalOptions::default()).unwrap();
        let ds = [
            inst.nodes().nodes()[1].location.clone(),
            inst.nodes().nodes()[3].location.clone(),
        ];
        let unprobed = inst.node_elems(&[0, 2]);
        let manual: f64 = crate::dist::enumerate_joint(&ds, 1000)
            .unwrap()
            .map(|(locs, p)| {
                let mut terms: Vec<usize> = locs.iter().map(|&x| x as usize).collect();
                terms.extend_from_slice(&unprobed);
                p * mst_over_terminals(inst.metric(), &terms).value
            })
            .sum();
        assert!((policy.value.value() - manual).abs() < 1e-9);
    }

    #[test]
    fn recombinant_trivial_splits() {
        let mut rng = SeedSpec::new(101, 0).rng();
        let inst = random_instance(&mut rng, 5, 4);

        let empty = recombinant_check_steiner(&inst, &[], &[]);
        assert!((empty.mixed - empty.unprobed_tree).abs() < 1e-12);
        assert!(empty.holds);

        let probed: Vec<usize> = (0..4).collect();
        let values: Vec<usize> = probed
            .iter()
            .map(|&v| inst.nodes().nodes()[v].location.support()[0].0 as usize)
            .collect();
        let full = recombinant_check_steiner(&inst, &probed, &values);
        assert!((full.mixed - full.probed_tree).abs() < 1e-12);
        assert!(full.holds);
    }

    #[test]
    fn recombinant_holds_on_random_splits() {
        let mut rng = SeedSpec::new(103, 0).rng();
        for _ in 0..50 {
            let nv = 2 + (unit_f64(&mut rng) * 4.0) as usize;
            let inst = random_instance(&mut rng, 5, nv);
            let probed: Vec<usize> = (0..nv).filter(|_| unit_f64(&mut rng) < 0.5).collect();
            let values: Vec<usize> = probed
                .iter()
                .map(|&v| inst.nodes().nodes()[v].location.sample(&mut rng) as usize)
                .collect();
            let check = recombinant_check_steiner(&inst, &probed, &values);
            assert!(check.holds, "{check:?}");
        }
    }
}
