//! Minimum makespan on identical machines with probeable job sizes.
//!
//! The no-probe scheduling of stochastic jobs is driven by truncated
//! moments: at scale `t`, a job contributes its mass above the threshold
//! outright (`E[Z]`) plus a log-moment "effective size"
//! `η(t) = log_m E[m^Y]` for the part below, and `f(t) = E[Z] + (t/m)·η(t)`
//! measures whether expected makespan `O(t)` is achievable — small total
//! `f` means yes, scheduling by Graham's rule on the effective sizes.
//!
//! The probe set is chosen by a threshold search: for increasing `t` on a
//! geometric grid, a knapsack decides whether some affordable outlier set
//! brings the remaining total `f` under `t/2`; the smallest such `t` wins.
//! After probing, realized jobs are scheduled by Graham's rule on observed
//! sizes and the unprobed schedule is appended machine by machine.

use crate::dist::DiscreteDist;
use crate::error::{Error, Result};
use crate::eval::{evaluate_expectation, EvalOptions, ValueEstimate};

#[derive(Debug, Clone)]
pub struct MakespanJob {
    pub size: DiscreteDist,
    pub probe_cost: f64,
}

#[derive(Debug, Clone)]
pub struct MakespanInstance {
    jobs: Vec<MakespanJob>,
    machines: usize,
    budget: f64,
}

impl MakespanInstance {
    pub fn new(jobs: Vec<MakespanJob>, machines: usize, budget: f64) -> Result<Self> {
        if jobs.is_empty() {
            return Err(Error::InvalidInstance("need at least one job".into()));
        }
        if machines < 2 {
            return Err(Error::InvalidInstance("need at least two machines".into()));
        }
        for (i, job) in jobs.iter().enumerate() {
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
        Ok(Self { jobs, machines, budget })
    }

    pub fn jobs(&self) -> &[MakespanJob] {
        &self.jobs
    }

    pub fn len(&self) -> usize {
        self.jobs.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn machines(&self) -> usize {
        self.machines
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }

    pub fn probe_cost_of(&self, set: &[usize]) -> f64 {
        set.iter().map(|&i| self.jobs[i].probe_cost).sum()
    }

    /// `max(Σ μ / m, max μ)`: a lower bound on the expected makespan of
    /// every policy, probing or not.
    pub fn mean_load_floor(&self) -> f64 {
        let total: f64 = self.jobs.iter().map(|j| j.size.mean()).sum();
        let largest = self.jobs.iter().map(|j| j.size.mean()).fold(0.0, f64::max);
        (total / self.machines as f64).max(largest)
    }
}

/// `(E[Z_t], η(t))` for one size distribution at threshold `t > 0`:
/// the expected mass above `t`, and `log_m E[m^{Y}]` where `Y = X/t` below
/// the threshold and `Y = 0` above it.
pub fn truncation_moments(d: &DiscreteDist, t: f64, machines: usize) -> (f64, f64) {
    assert!(t > 0.0, "threshold must be positive");
    assert!(machines >= 2, "effective size needs log m > 0");
    let ln_m = (machines as f64).ln();
    let mut above = 0.0;
    let mut mgf = 0.0;
    for &(v, p) in d.support() {
        if v <= t {
            mgf += p * ((v / t) * ln_m).exp();
        } else {
            above += p * v;
            mgf += p;
        }
    }
    (above, mgf.ln() / ln_m)
}

/// Per-job truncated moments at one threshold.
#[derive(Debug, Clone, Copy)]
pub struct JobMoments {
    pub ez: f64,
    pub eta: f64,
    pub f: f64,
}

#[derive(Debug, Clone)]
pub struct ThresholdProfile {
    pub t: f64,
    pub per_job: Vec<JobMoments>,
}

impl ThresholdProfile {
    pub fn new(inst: &MakespanInstance, t: f64) -> Self {
        let m = inst.machines();
        let per_job = inst
            .jobs()
            .iter()
            .map(|job| {
                let (ez, eta) = truncation_moments(&job.size, t, m);
                JobMoments { ez, eta, f: ez + t / m as f64 * eta }
            })
            .collect();
        Self { t, per_job }
    }
}

/// `Σ_{i ∉ exclude} f_i(t)`.
pub fn f_total(inst: &MakespanInstance, t: f64, exclude: &[usize]) -> f64 {
    let profile = ThresholdProfile::new(inst, t);
    let mut out = vec![false; inst.len()];
    for &i in exclude {
        out[i] = true;
    }
    profile.per_job.iter().enumerate().filter(|&(i, _)| !out[i]).map(|(_, jm)| jm.f).sum()
}

/// Profit-scaled knapsack FPTAS: a subset of cost at most `budget` whose
/// profit is at least `(1−eps)` times the best achievable.
pub fn knapsack_max_profit(profits: &[f64], costs: &[f64], budget: f64, eps: f64) -> Vec<usize> {
    assert_eq!(profits.len(), costs.len());
    assert!(eps > 0.0 && eps < 1.0, "eps must lie in (0,1)");
    let items: Vec<usize> = (0..profits.len())
        .filter(|&i| costs[i] <= budget + 1e-12 && profits[i] > 0.0)
        .collect();
    let max_profit = items.iter().map(|&i| profits[i]).fold(0.0, f64::max);
    if items.is_empty() || max_profit <= 0.0 {
        return Vec::new();
    }
    let scale = eps * max_profit / items.len() as f64;
    let scaled: Vec<usize> = items.iter().map(|&i| (profits[i] / scale).floor() as usize).collect();
    let total: usize = scaled.iter().sum();
    assert!(total <= 20_000_000, "scaled profit table too large; raise eps");

    // dp[k][q]: min cost reaching scaled profit exactly q using items[..k].
    let mut dp: Vec<Vec<f64>> = Vec::with_capacity(items.len() + 1);
    let mut first = vec![f64::INFINITY; total + 1];
    first[0] = 0.0;
    dp.push(first);
    for (k, &i) in items.iter().enumerate() {
        let prev = &dp[k];
        let mut row = prev.clone();
        for q in scaled[k]..row.len() {
            let cand = prev[q - scaled[k]] + costs[i];
            if cand < row[q] {
                row[q] = cand;
            }
        }
        dp.push(row);
    }
    let last = &dp[items.len()];
    let best_q = (0..=total).rev().find(|&q| last[q] <= budget + 1e-9).unwrap_or(0);

    let mut take = Vec::new();
    let mut q = best_q;
    for k in (0..items.len()).rev() {
        // Rows copy the previous value bit-for-bit when the item is skipped.
        if dp[k + 1][q] == dp[k][q] {
            continue;
        }
        take.push(items[k]);
        q -= scaled[k];
    }
    take.sort_unstable();
    take
}

/// Decides threshold `t`: picks an affordable outlier set maximizing the
/// removed `f`-mass, and reports whether the rest fits under
/// `(t/2)·(1+eps)` (the slack absorbs the knapsack's approximation).
pub fn outlier_knapsack(
    inst: &MakespanInstance,
    t: f64,
    budget: f64,
    eps: f64,
) -> (bool, Vec<usize>) {
    let profile = ThresholdProfile::new(inst, t);
    let profits: Vec<f64> = profile.per_job.iter().map(|jm| jm.f).collect();
    let costs: Vec<f64> = inst.jobs().iter().map(|j| j.probe_cost).collect();
    let outliers = knapsack_max_profit(&profits, &costs, budget, eps);
    let mut removed = 0.0;
    for &i in &outliers {
        removed += profits[i];
    }
    let remaining: f64 = profits.iter().sum::<f64>() - removed;
    (remaining <= t / 2.0 * (1.0 + eps) + 1e-12, outliers)
}

fn threshold_grid(inst: &MakespanInstance, eps: f64) -> (f64, f64) {
    let means: Vec<f64> = inst.jobs().iter().map(|j| j.size.mean()).collect();
    let t0 = (means.iter().cloned().fold(0.0, f64::max))
        .max(means.iter().sum::<f64>() / inst.machines() as f64)
        / 4.0;
    let t_max: f64 = inst.jobs().iter().map(|j| j.size.max_value()).sum();
    debug_assert!(eps > 0.0);
    (t0, t_max)
}

/// Smallest threshold on the geometric grid `t0·(1+eps)^k` (capped by the
/// sum of maximum sizes, which is always feasible) whose outlier knapsack
/// succeeds, together with the chosen probe set.
pub fn find_tstar(inst: &MakespanInstance, budget: f64, eps: f64) -> Result<(f64, Vec<usize>)> {
    let (t0, t_max) = threshold_grid(inst, eps);
    if t0 == 0.0 {
        // Zero means with nonnegative support: every size is identically 0.
        return Ok((0.0, Vec::new()));
    }
    let mut t = t0;
    loop {
        let probe = t.min(t_max);
        let (feasible, outliers) = outlier_knapsack(inst, probe, budget, eps);
        if feasible {
            return Ok((probe, outliers));
        }
        if probe >= t_max {
            return Err(Error::Internal(
                "no feasible threshold up to the sum of maximum sizes".into(),
            ));
        }
        t *= 1.0 + eps;
    }
}

/// List scheduling: jobs in the order given, each to the currently
/// least-loaded machine, ties to the lowest machine index. Returns the
/// machine per job.
pub fn graham_schedule(sizes: &[f64], machines: usize) -> Vec<usize> {
    assert!(machines >= 1);
    let mut loads = vec![0.0; machines];
    sizes
        .iter()
        .map(|&s| {
            let mut best = 0;
            for k in 1..machines {
                if loads[k] < loads[best] {
                    best = k;
                }
            }
            loads[best] += s;
            best
        })
        .collect()
}

/// Per-machine loads of an assignment.
pub fn loads_of(assignment: &[usize], sizes: &[f64], machines: usize) -> Vec<f64> {
    let mut loads = vec![0.0; machines];
    for (&mach, &s) in assignment.iter().zip(sizes) {
        loads[mach] += s;
    }
    loads
}

pub fn makespan_of(loads: &[f64]) -> f64 {
    loads.iter().cloned().fold(0.0, f64::max)
}

/// A committed two-phase schedule: probe `probe_set`, schedule it by
/// Graham's rule on observed sizes, then append the fixed unprobed
/// assignment (Graham's rule on effective sizes at `t_star`).
#[derive(Debug, Clone)]
pub struct MakespanPolicy {
    pub probe_set: Vec<usize>,
    pub t_star: f64,
    pub unprobed: Vec<usize>,
    /// Machine for each entry of `unprobed`.
    pub unprobed_assignment: Vec<usize>,
    pub probe_cost: f64,
    pub value: ValueEstimate,
}

impl MakespanPolicy {
    /// Phase-1 and phase-2 per-machine loads for one realization of all
    /// job sizes (indexed like the instance).
    pub fn realized_loads(&self, inst: &MakespanInstance, all_sizes: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let m = inst.machines();
        let probed_sizes: Vec<f64> = self.probe_set.iter().map(|&i| all_sizes[i]).collect();
        let phase1 = graham_schedule(&probed_sizes, m);
        let l1 = loads_of(&phase1, &probed_sizes, m);
        let unprobed_sizes: Vec<f64> = self.unprobed.iter().map(|&i| all_sizes[i]).collect();
        let l2 = loads_of(&self.unprobed_assignment, &unprobed_sizes, m);
        (l1, l2)
    }

    /// Makespan of the concatenated schedule for one realization.
    pub fn realized_makespan(&self, inst: &MakespanInstance, all_sizes: &[f64]) -> f64 {
        let (l1, l2) = self.realized_loads(inst, all_sizes);
        l1.iter().zip(&l2).map(|(a, b)| a + b).fold(0.0, f64::max)
    }
}

fn build_policy(
    inst: &MakespanInstance,
    probe_set: Vec<usize>,
    t_star: f64,
    opts: &EvalOptions,
) -> Result<MakespanPolicy> {
    let m = inst.machines();
    let unprobed: Vec<usize> = (0..inst.len()).filter(|i| !probe_set.contains(i)).collect();
    let etas: Vec<f64> = unprobed
        .iter()
        .map(|&i| {
            if t_star > 0.0 {
                truncation_moments(&inst.jobs()[i].size, t_star, m).1
            } else {
                0.0
            }
        })
        .collect();
    let unprobed_assignment = graham_schedule(&etas, m);
    let probe_cost = inst.probe_cost_of(&probe_set);
    let policy = MakespanPolicy {
        probe_set,
        t_star,
        unprobed,
        unprobed_assignment,
        probe_cost,
        value: ValueEstimate::Exact(0.0),
    };
    let ds: Vec<DiscreteDist> = inst.jobs().iter().map(|j| j.size.clone()).collect();
    let value = evaluate_expectation(&ds, opts.exact_cap, opts.seed, opts.trials, |sizes| {
        policy.realized_makespan(inst, sizes)
    })?;
    Ok(MakespanPolicy { value, ..policy })
}

/// The non-adaptive strategy: probe the threshold-search outlier set, then
/// run the two-phase schedule.
pub fn makespan_nonadaptive(
    inst: &MakespanInstance,
    eps: f64,
    opts: &EvalOptions,
) -> Result<MakespanPolicy> {
    let (t_star, probe_set) = find_tstar(inst, inst.budget(), eps)?;
    build_policy(inst, probe_set, t_star, opts)
}

/// Two-phase policy for a caller-chosen probe set: the threshold for the
/// unprobed effective sizes is the smallest grid `t` with
/// `Σ_{i ∉ S} f_i(t) ≤ t/2`.
pub fn makespan_policy_for_set(
    inst: &MakespanInstance,
    probe_set: Vec<usize>,
    eps: f64,
    opts: &EvalOptions,
) -> Result<MakespanPolicy> {
    let (t0, t_max) = threshold_grid(inst, eps);
    let t_star = if t0 == 0.0 {
        0.0
    } else {
        let mut t = t0;
        loop {
            let probe = t.min(t_max);
            if f_total(inst, probe, &probe_set) <= probe / 2.0 + 1e-12 {
                break probe;
            }
            if probe >= t_max {
                return Err(Error::Internal(
                    "no feasible threshold up to the sum of maximum sizes".into(),
                ));
            }
            t *= 1.0 + eps;
        }
    };
    build_policy(inst, probe_set, t_star, opts)
}
