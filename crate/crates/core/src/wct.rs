//! Weighted completion time on a single machine with probeable job sizes.
//!
//! A policy probes a set `S` of jobs (paying their probe costs), observes
//! the realized sizes, then commits to one ordering of all jobs before the
//! unprobed sizes reveal themselves. The committed-ordering optimum is
//! Smith's rule on effective sizes (realized for probed jobs, expected for
//! unprobed), which gives closed forms for every expectation this module
//! needs.
//!
//! The non-adaptive strategy picks `S` by solving the outlier relaxation
//! (which jobs to ignore within the probe budget so the remaining no-probe
//! schedule is cheapest) as a linear program and thresholding at 1/3. The
//! rounded set costs at most `3C` and its outlier objective is within a
//! factor 3 of the LP optimum.

use crate::dist::{pairwise_expect_min, DiscreteDist};
use crate::error::{Error, Result};
use crate::lp::{Cmp, LinearProgram};

const ONE_THIRD: f64 = 1.0 / 3.0;
/// Absolute slack when comparing LP values against the rounding threshold.
const ROUND_EPS: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct WctJob {
    pub size: DiscreteDist,
    pub weight: f64,
    pub probe_cost: f64,
}

#[derive(Debug, Clone)]
pub struct WctInstance {
    jobs: Vec<WctJob>,
    budget: f64,
}

impl WctInstance {
    pub fn new(jobs: Vec<WctJob>, budget: f64) -> Result<Self> {
        if jobs.is_empty() {
            return Err(Error::InvalidInstance("need at least one job".into()));
        }
        for (i, job) in jobs.iter().enumerate() {
            if !job.weight.is_finite() || job.weight < 0.0 {
                return Err(Error::InvalidInstance(format!("job {i}: weight {} invalid", job.weight)));
            }
            if !job.probe_cost.is_finite() || job.probe_cost < 0.0 {
                return Err(Error::InvalidInstance(format!("job {i}: probe cost {} invalid", job.probe_cost)));
            }
        }
        let max_cost = jobs.iter().map(|j| j.probe_cost).fold(0.0, f64::max);
        if !budget.is_finite() || budget < max_cost {
            return Err(Error::InvalidInstance(format!(
                "budget {budget} below the largest probe cost {max_cost}"
            )));
        }
        Ok(Self { jobs, budget })
    }

    pub fn jobs(&self) -> &[WctJob] {
        &self.jobs
    }

    pub fn len(&self) -> usize {
        self.jobs.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }

    pub fn probe_cost_of(&self, set: &[usize]) -> f64 {
        set.iter().map(|&i| self.jobs[i].probe_cost).sum()
    }

    /// Expected weighted completion time of the no-probe schedule on a
    /// subset of jobs (everything else ignored).
    pub fn no_probe_value(&self, subset: &[usize]) -> f64 {
        let pairs: Vec<(f64, f64)> =
            subset.iter().map(|&i| (self.jobs[i].weight, self.jobs[i].size.mean())).collect();
        schedule_value(&pairs)
    }
}

/// Indices ordered by Smith's rule over `(weight, size)` pairs: decreasing
/// weight-to-size ratio. Zero-size jobs come first, ordered among
/// themselves by decreasing weight; all remaining ties break to the lower
/// index.
pub fn smith_order(effective: &[(f64, f64)]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..effective.len()).collect();
    order.sort_by(|&a, &b| {
        let (wa, la) = effective[a];
        let (wb, lb) = effective[b];
        match (la == 0.0, lb == 0.0) {
            (true, false) => std::cmp::Ordering::Less,
            (false, true) => std::cmp::Ordering::Greater,
            (true, true) => wb.partial_cmp(&wa).unwrap().then(a.cmp(&b)),
            (false, false) => {
                // wa/la > wb/lb  ⇔  wa·lb > wb·la
                (wb * la).partial_cmp(&(wa * lb)).unwrap().then(a.cmp(&b))
            }
        }
    });
    order
}

/// Weighted completion time of the optimal (Smith) schedule on jobs with
/// deterministic sizes, in closed form:
/// `Σ_i w_i·l_i + Σ_{i<j} min(w_i·l_j, w_j·l_i)`.
pub fn schedule_value(effective: &[(f64, f64)]) -> f64 {
    let mut total = 0.0;
    for (i, &(wi, li)) in effective.iter().enumerate() {
        total += wi * li;
        for &(wj, lj) in &effective[i + 1..] {
            total += (wi * lj).min(wj * li);
        }
    }
    total
}

/// Weighted completion time of a specific ordering on deterministic sizes.
pub fn ordering_value(effective: &[(f64, f64)], order: &[usize]) -> f64 {
    let mut elapsed = 0.0;
    let mut total = 0.0;
    for &i in order {
        let (w, l) = effective[i];
        elapsed += l;
        total += w * elapsed;
    }
    total
}

fn effective_sizes(inst: &WctInstance, probed: &[usize], values: &[f64]) -> Vec<(f64, f64)> {
    debug_assert_eq!(probed.len(), values.len());
    let mut eff: Vec<(f64, f64)> =
        inst.jobs.iter().map(|j| (j.weight, j.size.mean())).collect();
    for (&i, &v) in probed.iter().zip(values) {
        eff[i].1 = v;
    }
    eff
}

/// Exact expected completion time of the best committed ordering, given
/// that the jobs in `probed` realized to `values` (expectation over the
/// unprobed sizes).
pub fn wct_value_given_realization(inst: &WctInstance, probed: &[usize], values: &[f64]) -> f64 {
    schedule_value(&effective_sizes(inst, probed, values))
}

/// Exact value of probing the set `probed`: the expectation of
/// [`wct_value_given_realization`] over the probed outcomes, computed in
/// `O(n²·s²)` by per-pair enumeration instead of joint enumeration.
pub fn wct_policy_value(inst: &WctInstance, probed: &[usize]) -> f64 {
    let n = inst.len();
    let mut in_s = vec![false; n];
    for &i in probed {
        in_s[i] = true;
    }
    // Diagonal terms: E[w_i·l_i] = w_i·μ_i whether or not i is probed.
    let mut total: f64 =
        inst.jobs.iter().map(|j| j.weight * j.size.mean()).sum();
    for i in 0..n {
        let ji = &inst.jobs[i];
        for j in i + 1..n {
            let jj = &inst.jobs[j];
            total += match (in_s[i], in_s[j]) {
                (true, true) => pairwise_expect_min(&ji.size, ji.weight, &jj.size, jj.weight),
                (false, false) => {
                    (ji.weight * jj.size.mean()).min(jj.weight * ji.size.mean())
                }
                (true, false) => pairwise_expect_min(
                    &ji.size,
                    ji.weight,
                    &DiscreteDist::point(jj.size.mean()),
                    jj.weight,
                ),
                (false, true) => pairwise_expect_min(
                    &DiscreteDist::point(ji.size.mean()),
                    ji.weight,
                    &jj.size,
                    jj.weight,
                ),
            };
        }
    }
    total
}

/// Fractional solution of the outlier relaxation. `z[i]` is the fractional
/// outlier mass on job `i`; the pair variables are implicit as
/// `e_ij = max(0, 1 − z_i − z_j)`.
#[derive(Debug, Clone)]
pub struct OutlierLpSolution {
    pub z: Vec<f64>,
    pub lp_value: f64,
}

/// Objective of the outlier relaxation at `z` with the pair variables at
/// their optimal settings.
pub fn outlier_objective_at(inst: &WctInstance, z: &[f64]) -> f64 {
    let mut value = 0.0;
    for (i, ji) in inst.jobs.iter().enumerate() {
        let mu_i = ji.size.mean();
        value += (1.0 - z[i]) * ji.weight * mu_i;
        for (j, jj) in inst.jobs.iter().enumerate().skip(i + 1) {
            let q = (ji.weight * jj.size.mean()).min(jj.weight * mu_i);
            value += q * (1.0 - z[i] - z[j]).max(0.0);
        }
    }
    value
}

/// Solves the linear relaxation of the outlier problem:
/// minimize `Σ_{i<j} e_ij·min(w_j μ_i, w_i μ_j) + Σ_i (1−z_i)·w_i μ_i`
/// subject to `Σ z_i c_i ≤ C`, `e_ij + z_i + z_j ≥ 1`, `0 ≤ z ≤ 1`, `e ≥ 0`.
pub fn outlier_lp_solve(inst: &WctInstance) -> Result<OutlierLpSolution> {
    let n = inst.len();
    let total_cost: f64 = inst.jobs.iter().map(|j| j.probe_cost).sum();
    if inst.budget >= total_cost {
        // Everything fits in the outlier set; skip the degenerate LP.
        let z = vec![1.0; n];
        let lp_value = outlier_objective_at(inst, &z);
        return Ok(OutlierLpSolution { z, lp_value });
    }

    // Variables: z_0..z_{n-1}, then e_{ij} for i < j in row-major order.
    let num_pairs = n * (n - 1) / 2;
    let mut objective = vec![0.0; n + num_pairs];
    for (i, job) in inst.jobs.iter().enumerate() {
        objective[i] = -job.weight * job.size.mean();
    }
    let mut e_col = n;
    for i in 0..n {
        for j in i + 1..n {
            objective[e_col] = (inst.jobs[i].weight * inst.jobs[j].size.mean())
                .min(inst.jobs[j].weight * inst.jobs[i].size.mean());
            e_col += 1;
        }
    }

    let mut lp = LinearProgram::minimize(objective);
    lp.constraint(
        (0..n).map(|i| (i, inst.jobs[i].probe_cost)).collect(),
        Cmp::Le,
        inst.budget,
    );
    let mut e_col = n;
    for i in 0..n {
        for j in i + 1..n {
            lp.constraint(vec![(i, 1.0), (j, 1.0), (e_col, 1.0)], Cmp::Ge, 1.0);
            e_col += 1;
        }
    }
    for i in 0..n {
        lp.constraint(vec![(i, 1.0)], Cmp::Le, 1.0);
    }

    let sol = lp.solve()?;
    let z: Vec<f64> = sol.x[..n].iter().map(|&v| v.clamp(0.0, 1.0)).collect();
    let lp_value = outlier_objective_at(inst, &z);
    Ok(OutlierLpSolution { z, lp_value })
}

/// Threshold rounding of the LP solution: every job with `z_i ≥ 1/3` is an
/// outlier. The set costs at most `3C` and the surviving jobs' no-probe
/// objective is at most `3·lp_value`.
pub fn round_outliers(sol: &OutlierLpSolution) -> Vec<usize> {
    sol.z
        .iter()
        .enumerate()
        .filter(|&(_, &z)| z >= ONE_THIRD - ROUND_EPS)
        .map(|(i, _)| i)
        .collect()
}

#[derive(Debug, Clone)]
pub struct WctProbePolicy {
    /// Jobs to probe, ascending.
    pub probe_set: Vec<usize>,
    /// Exact expected weighted completion time of the policy.
    pub value: f64,
    /// Total probe cost of the set (at most three times the budget).
    pub probe_cost: f64,
    /// Optimum of the outlier relaxation that produced the set.
    pub lp_value: f64,
}

/// The non-adaptive strategy: probe the rounded outlier set, then schedule
/// by Smith's rule on effective sizes.
pub fn wct_nonadaptive(inst: &WctInstance) -> Result<WctProbePolicy> {
    let sol = outlier_lp_solve(inst)?;
    let probe_set = round_outliers(&sol);
    let probe_cost = inst.probe_cost_of(&probe_set);
    debug_assert!(probe_cost <= 3.0 * inst.budget + 1e-6);
    let value = wct_policy_value(inst, &probe_set);
    Ok(WctProbePolicy { probe_set, value, probe_cost, lp_value: sol.lp_value })
}

/// The instance family where probing helps by a factor `Ω(n)`: `n` unit
/// weight, unit probe cost jobs with size 1 w.p. `1/n` and 0 otherwise,
/// probe budget `n`. Probing nothing costs `(n+1)/2`; probing everything
/// costs `(3 − 1/n)/2`.
pub fn gen_benefit_instance(n: usize) -> WctInstance {
    assert!(n >= 2, "benefit instance needs n >= 2");
    let p = 1.0 / n as f64;
    let jobs = (0..n)
        .map(|_| WctJob {
            size: DiscreteDist::new(vec![(0.0, 1.0 - p), (1.0, p)]).expect("valid by construction"),
            weight: 1.0,
            probe_cost: 1.0,
        })
        .collect();
    WctInstance::new(jobs, n as f64).expect("valid by construction")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{enumerate_joint, unit_f64, SeedSpec, DEFAULT_JOINT_CAP};
    use itertools::Itertools;

    fn job(support: Vec<(f64, f64)>, weight: f64, cost: f64) -> WctJob {
        WctJob { size: DiscreteDist::new(support).unwrap(), weight, probe_cost: cost }
    }

    fn det_job(size: f64, weight: f64, cost: f64) -> WctJob {
        WctJob { size: DiscreteDist::point(size), weight, probe_cost: cost }
    }

    fn random_instance(rng: &mut impl rand_core::RngCore, n: usize, max_support: usize) -> WctInstance {
        let jobs: Vec<WctJob> = (0..n)
            .map(|_| {
                let s = 1 + (unit_f64(rng) * max_support as f64) as usize;
                let raw: Vec<(f64, f64)> = (0..s)
                    .map(|k| (k as f64 * 3.0 + unit_f64(rng) * 2.0, 0.05 + unit_f64(rng)))
                    .collect();
                let total: f64 = raw.iter().map(|&(_, p)| p).sum();
                WctJob {
                    size: DiscreteDist::new(raw.into_iter().map(|(v, p)| (v, p / total)).collect())
                        .unwrap(),
                    weight: 0.1 + unit_f64(rng) * 5.0,
                    probe_cost: 0.5 + unit_f64(rng) * 1.5,
                }
            })
            .collect();
        let max_c = jobs.iter().map(|j| j.probe_cost).fold(0.0, f64::max);
        let sum_c: f64 = jobs.iter().map(|j| j.probe_cost).sum();
        let budget = max_c + unit_f64(rng) * (sum_c - max_c);
        WctInstance::new(jobs, budget).unwrap()
    }

    #[test]
    fn smith_orders_by_ratio() {
        assert_eq!(smith_order(&[(1.0, 2.0), (1.0, 1.0)]), vec![1, 0]);
    }

    #[test]
    fn smith_ratio_tie_breaks_by_index() {
        assert_eq!(smith_order(&[(2.0, 2.0), (1.0, 1.0)]), vec![0, 1]);
    }

    #[test]
    fn smith_zero_size_first() {
        assert_eq!(smith_order(&[(1.0, 5.0), (0.5, 0.0)]), vec![1, 0]);
        // Among zero-size jobs, decreasing weight.
        assert_eq!(smith_order(&[(1.0, 0.0), (2.0, 0.0), (3.0, 4.0)]), vec![1, 0, 2]);
    }

    #[test]
    fn closed_form_equals_smith_schedule() {
        let mut rng = SeedSpec::new(5, 0).rng();
        for _ in 0..200 {
            let n = 1 + (unit_f64(&mut rng) * 6.0) as usize;
            let eff: Vec<(f64, f64)> = (0..n)
                .map(|_| (unit_f64(&mut rng) * 4.0 + 0.01, (unit_f64(&mut rng) * 5.0).floor()))
                .collect();
            let direct = schedule_value(&eff);
            let by_order = ordering_value(&eff, &smith_order(&eff));
            assert!((direct - by_order).abs() < 1e-9, "{direct} vs {by_order} on {eff:?}");
        }
    }

    #[test]
    fn realization_value_single_probed_job() {
        let inst = WctInstance::new(vec![job(vec![(0.0, 0.5), (5.0, 0.5)], 1.0, 1.0)], 1.0).unwrap();
        assert!((wct_value_given_realization(&inst, &[0], &[5.0]) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn realization_value_two_unprobed_jobs() {
        let inst =
            WctInstance::new(vec![det_job(1.0, 1.0, 1.0), det_job(2.0, 1.0, 1.0)], 1.0).unwrap();
        assert!((wct_value_given_realization(&inst, &[], &[]) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn benefit_no_probe_value() {
        let inst = gen_benefit_instance(20);
        assert!((wct_value_given_realization(&inst, &[], &[]) - 10.5).abs() < 1e-9);
        assert!((wct_policy_value(&inst, &[]) - 10.5).abs() < 1e-9);
    }

    #[test]
    fn benefit_all_probe_value() {
        let inst = gen_benefit_instance(20);
        let all: Vec<usize> = (0..20).collect();
        assert!((wct_policy_value(&inst, &all) - 1.475).abs() < 1e-9);
    }

    #[test]
    fn benefit_instance_shape() {
        let inst = gen_benefit_instance(2);
        assert_eq!(inst.len(), 2);
        let support = inst.jobs()[0].size.support();
        assert_eq!(support.len(), 2);
        assert!((support[1].1 - 0.5).abs() < 1e-12);
    }

    /// Brute-force policy value: expectation of the realization values over
    /// the joint support of the probed sizes.
    fn policy_value_by_joint(inst: &WctInstance, probed: &[usize]) -> f64 {
        let ds: Vec<DiscreteDist> =
            probed.iter().map(|&i| inst.jobs()[i].size.clone()).collect();
        enumerate_joint(&ds, DEFAULT_JOINT_CAP)
            .unwrap()
            .map(|(values, p)| p * wct_value_given_realization(inst, probed, &values))
            .sum()
    }

    #[test]
    fn policy_value_matches_joint_enumeration() {
        let mut rng = SeedSpec::new(11, 0).rng();
        for _ in 0..50 {
            let inst = random_instance(&mut rng, 4, 3);
            for mask in 0u32..16 {
                let probed: Vec<usize> = (0..4).filter(|i| mask >> i & 1 == 1).collect();
                let fast = wct_policy_value(&inst, &probed);
                let slow = policy_value_by_joint(&inst, &probed);
                assert!((fast - slow).abs() < 1e-9, "mask {mask}: {fast} vs {slow}");
            }
        }
    }

    /// The committed-ordering optimum really is Smith's rule on effective
    /// sizes: compare against minimizing over every ordering, where a fixed
    /// ordering's expectation only needs the effective sizes by linearity.
    #[test]
    fn smith_is_optimal_committed_ordering() {
        let mut rng = SeedSpec::new(13, 0).rng();
        for _ in 0..100 {
            let inst = random_instance(&mut rng, 4, 2);
            let probed: Vec<usize> = (0..4).filter(|_| unit_f64(&mut rng) < 0.5).collect();
            let values: Vec<f64> = probed
                .iter()
                .map(|&i| {
                    let sup = inst.jobs()[i].size.support();
                    sup[(unit_f64(&mut rng) * sup.len() as f64) as usize % sup.len()].0
                })
                .collect();
            let eff = effective_sizes(&inst, &probed, &values);
            let best_over_orderings = (0..inst.len())
                .permutations(inst.len())
                .map(|o| ordering_value(&eff, &o))
                .fold(f64::INFINITY, f64::min);
            let closed = wct_value_given_realization(&inst, &probed, &values);
            assert!((closed - best_over_orderings).abs() < 1e-9);
        }
    }

    #[test]
    fn lp_zero_means_zero_value() {
        let inst = WctInstance::new(
            vec![det_job(0.0, 1.0, 1.0), det_job(0.0, 2.0, 1.0)],
            1.5,
        )
        .unwrap();
        let sol = outlier_lp_solve(&inst).unwrap();
        assert!(sol.lp_value.abs() < 1e-9);
    }

    #[test]
    fn lp_big_budget_outliers_everything() {
        let inst = WctInstance::new(
            vec![det_job(3.0, 1.0, 1.0), det_job(2.0, 1.0, 1.0)],
            5.0,
        )
        .unwrap();
        let sol = outlier_lp_solve(&inst).unwrap();
        assert!(sol.z.iter().all(|&z| (z - 1.0).abs() < 1e-9));
        assert!(sol.lp_value.abs() < 1e-9);
    }

    #[test]
    fn lp_matches_grid_search() {
        let inst = WctInstance::new(
            vec![det_job(4.0, 1.0, 1.0), det_job(3.0, 2.0, 1.2), det_job(1.0, 0.5, 0.9)],
            1.5,
        )
        .unwrap();
        let sol = outlier_lp_solve(&inst).unwrap();

        // Grid over z with e at its induced optimum; the LP objective is
        // piecewise linear in z so a 1e-2 grid brackets the optimum tightly.
        let steps = 100usize;
        let mut best = f64::INFINITY;
        for a in 0..=steps {
            for b in 0..=steps {
                for c in 0..=steps {
                    let z = [a as f64 / steps as f64, b as f64 / steps as f64, c as f64 / steps as f64];
                    let cost = z[0] * 1.0 + z[1] * 1.2 + z[2] * 0.9;
                    if cost <= 1.5 + 1e-12 {
                        best = best.min(outlier_objective_at(&inst, &z));
                    }
                }
            }
        }
        assert!(sol.lp_value <= best + 1e-7, "lp {} vs grid {}", sol.lp_value, best);
        // Slope of the objective in z is bounded by the total weighted mass.
        let slope: f64 = 3.0 * inst.jobs().iter().map(|j| j.weight * j.size.mean()).sum::<f64>();
        assert!(best <= sol.lp_value + slope / steps as f64 + 1e-7);
    }

    #[test]
    fn lp_matches_grid_search_four_jobs() {
        let mut rng = SeedSpec::new(19, 0).rng();
        for _ in 0..3 {
            let inst = random_instance(&mut rng, 4, 2);
            let sol = outlier_lp_solve(&inst).unwrap();
            let steps = 25usize;
            let costs: Vec<f64> = inst.jobs().iter().map(|j| j.probe_cost).collect();
            let mut best = f64::INFINITY;
            let mut z = [0.0f64; 4];
            for a in 0..=steps {
                z[0] = a as f64 / steps as f64;
                for b in 0..=steps {
                    z[1] = b as f64 / steps as f64;
                    for c in 0..=steps {
                        z[2] = c as f64 / steps as f64;
                        for d in 0..=steps {
                            z[3] = d as f64 / steps as f64;
                            let cost: f64 = z.iter().zip(&costs).map(|(zi, ci)| zi * ci).sum();
                            if cost <= inst.budget() + 1e-12 {
                                best = best.min(outlier_objective_at(&inst, &z));
                            }
                        }
                    }
                }
            }
            assert!(sol.lp_value <= best + 1e-7, "lp {} vs grid {}", sol.lp_value, best);
            let slope: f64 =
                4.0 * inst.jobs().iter().map(|j| j.weight * j.size.mean()).sum::<f64>();
            assert!(best <= sol.lp_value + slope / steps as f64 + 1e-7);
        }
    }

    #[test]
    fn rounding_threshold_examples() {
        let sol = OutlierLpSolution { z: vec![0.5, 0.2, ONE_THIRD], lp_value: 0.0 };
        assert_eq!(round_outliers(&sol), vec![0, 2]);
        let zero = OutlierLpSolution { z: vec![0.0; 3], lp_value: 0.0 };
        assert!(round_outliers(&zero).is_empty());
        let one = OutlierLpSolution { z: vec![1.0; 3], lp_value: 0.0 };
        assert_eq!(round_outliers(&one), vec![0, 1, 2]);
    }

    #[test]
    fn rounding_guarantees_on_random_instances() {
        let mut rng = SeedSpec::new(17, 0).rng();
        for _ in 0..60 {
            let inst = random_instance(&mut rng, 5, 3);
            let sol = outlier_lp_solve(&inst).unwrap();
            let z_cost: f64 =
                sol.z.iter().zip(inst.jobs()).map(|(z, j)| z * j.probe_cost).sum();
            assert!(z_cost <= inst.budget() + 1e-7, "fractional cost {z_cost} over budget");
            let outliers = round_outliers(&sol);
            let cost = inst.probe_cost_of(&outliers);
            assert!(cost <= 3.0 * inst.budget() + 1e-6, "cost {} > 3C {}", cost, 3.0 * inst.budget());
            let keep: Vec<usize> = (0..inst.len()).filter(|i| !outliers.contains(i)).collect();
            let kept_value = inst.no_probe_value(&keep);
            assert!(
                kept_value <= 3.0 * sol.lp_value + 1e-6,
                "rounded objective {} > 3·lp {}",
                kept_value,
                3.0 * sol.lp_value
            );
        }
    }

    #[test]
    fn nonadaptive_on_benefit_instance_probes_everything() {
        let inst = gen_benefit_instance(20);
        let policy = wct_nonadaptive(&inst).unwrap();
        assert_eq!(policy.probe_set.len(), 20);
        assert!((policy.value - 1.475).abs() < 1e-9);
    }

    #[test]
    fn nonadaptive_on_deterministic_sizes_changes_nothing() {
        let inst = WctInstance::new(
            vec![det_job(2.0, 1.0, 1.0), det_job(5.0, 2.0, 1.0), det_job(1.0, 1.5, 1.0)],
            2.0,
        )
        .unwrap();
        let policy = wct_nonadaptive(&inst).unwrap();
        let no_probe = wct_policy_value(&inst, &[]);
        assert!((policy.value - no_probe).abs() < 1e-9);
    }

    #[test]
    fn nonadaptive_single_dominant_job() {
        // One heavy random job, three light deterministic ones; with the
        // budget only fitting one probe, exhaustive comparison over subsets
        // within cost 3C must not beat the policy by more than the theory
        // allows; here we just check the chosen set stays within 3C.
        let inst = WctInstance::new(
            vec![
                job(vec![(0.0, 0.5), (10.0, 0.5)], 3.0, 2.0),
                det_job(1.0, 1.0, 2.0),
                det_job(2.0, 1.0, 2.0),
                det_job(1.5, 1.0, 2.0),
            ],
            2.0,
        )
        .unwrap();
        let policy = wct_nonadaptive(&inst).unwrap();
        assert!(inst.probe_cost_of(&policy.probe_set) <= 6.0 + 1e-9);
        for &i in &policy.probe_set {
            assert!(i < 4);
        }
    }

    fn lemma2_sides(jobs: &[(f64, f64)], in_a: &[bool]) -> (f64, f64) {
        let mut lhs = 0.0;
        let mut rhs = 0.0;
        for i in 0..jobs.len() {
            for j in i..jobs.len() {
                let (wi, li) = jobs[i];
                let (wj, lj) = jobs[j];
                let term = (wi * lj).min(wj * li);
                if in_a[i] == in_a[j] {
                    lhs += term;
                } else {
                    rhs += term;
                }
            }
        }
        (lhs, rhs)
    }

    #[test]
    fn partition_interaction_bound_holds() {
        let mut rng = SeedSpec::new(23, 0).rng();
        for _ in 0..300 {
            let n = 2 + (unit_f64(&mut rng) * 10.0) as usize;
            let jobs: Vec<(f64, f64)> = (0..n)
                .map(|_| (unit_f64(&mut rng) * 10.0, unit_f64(&mut rng) * 10.0))
                .collect();
            let in_a: Vec<bool> = (0..n).map(|_| unit_f64(&mut rng) < 0.5).collect();
            let (lhs, rhs) = lemma2_sides(&jobs, &in_a);
            assert!(lhs + 1e-9 >= rhs, "within {lhs} < across {rhs}");
        }
    }

    #[test]
    fn recombination_within_factor_two() {
        let mut rng = SeedSpec::new(29, 0).rng();
        for _ in 0..300 {
            let n = 2 + (unit_f64(&mut rng) * 5.0) as usize;
            let inst = random_instance(&mut rng, n, 3);
            let probed: Vec<usize> = (0..n).filter(|_| unit_f64(&mut rng) < 0.5).collect();
            let values: Vec<f64> = probed
                .iter()
                .map(|&i| inst.jobs()[i].size.sample(&mut rng))
                .collect();
            let mixed = wct_value_given_realization(&inst, &probed, &values);
            let on_probed: Vec<(f64, f64)> = probed
                .iter()
                .zip(&values)
                .map(|(&i, &v)| (inst.jobs()[i].weight, v))
                .collect();
            let unprobed: Vec<(f64, f64)> = (0..n)
                .filter(|i| !probed.contains(i))
                .map(|i| (inst.jobs()[i].weight, inst.jobs()[i].size.mean()))
                .collect();
            let split = schedule_value(&on_probed) + schedule_value(&unprobed);
            assert!(mixed <= 2.0 * split + 1e-9, "{mixed} > 2·{split}");
        }
    }

    #[test]
    fn rejects_budget_below_max_cost() {
        let jobs = vec![det_job(1.0, 1.0, 2.0)];
        assert!(WctInstance::new(jobs, 1.0).is_err());
    }
}
