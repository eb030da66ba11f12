//! Instance generators: the probing-benefit family, the adaptivity-gap
//! construction, and seeded random instances for every objective.

use anyhow::{bail, Result};

use probe_core::dist::{unit_f64, RngCore, SeedSpec};
use probe_core::gap::{gen_gap_instance, GapInstanceSpec};
use probe_core::metric::PointSet;
use probe_core::wct::gen_benefit_instance;

use crate::instance::{InstanceFile, ItemSpec, MetricSpec};

pub fn benefit_file(n: usize) -> InstanceFile {
    let inst = gen_benefit_instance(n);
    InstanceFile {
        objective: "wct".into(),
        budget: inst.budget(),
        machines: None,
        k: None,
        centers: None,
        arbitrary_centers: false,
        items: inst
            .jobs()
            .iter()
            .map(|job| ItemSpec {
                dist: job.size.support().to_vec(),
                cost: job.probe_cost,
                weight: Some(job.weight),
            })
            .collect(),
        metric: None,
    }
}

pub fn gap_file(copies: usize, pairs: usize, redundancy: usize) -> Result<InstanceFile> {
    let spec = GapInstanceSpec::new(copies, pairs, redundancy)?;
    let gap = gen_gap_instance(spec)?;
    let points = match gap.inst.points() {
        PointSet::Coords { points, .. } => points.clone(),
        PointSet::Matrix(_) => unreachable!("the generator builds coordinates"),
    };
    Ok(InstanceFile {
        objective: "kmedian".into(),
        budget: gap.inst.budget(),
        machines: None,
        k: Some(gap.inst.k()),
        centers: None,
        arbitrary_centers: true,
        items: gap
            .inst
            .nodes()
            .nodes()
            .iter()
            .map(|node| ItemSpec {
                dist: node.location.support().to_vec(),
                cost: node.probe_cost,
                weight: None,
            })
            .collect(),
        metric: Some(MetricSpec { points: Some(points), matrix: None, norm: Some("l2".into()) }),
    })
}

fn random_dist(rng: &mut impl RngCore, max_support: usize, max_value: f64) -> Vec<(f64, f64)> {
    let s = 1 + (unit_f64(rng) * max_support as f64) as usize;
    let raw: Vec<(f64, f64)> = (0..s)
        .map(|k| {
            let v = (k as f64 * max_value / max_support as f64 + unit_f64(rng) * 2.0) * 100.0;
            (v.round() / 100.0, 0.05 + unit_f64(rng))
        })
        .collect();
    let total: f64 = raw.iter().map(|&(_, p)| p).sum();
    let mut dist: Vec<(f64, f64)> = raw.into_iter().map(|(v, p)| (v, p / total)).collect();
    dist.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    dist.dedup_by(|a, b| {
        if a.0 == b.0 {
            b.1 += a.1;
            true
        } else {
            false
        }
    });
    dist
}

fn random_point_dist(rng: &mut impl RngCore, max_support: usize, num_points: usize) -> Vec<(f64, f64)> {
    let s = 1 + (unit_f64(rng) * max_support as f64) as usize;
    let raw: Vec<(usize, f64)> = (0..s)
        .map(|_| ((unit_f64(rng) * num_points as f64) as usize % num_points, 0.05 + unit_f64(rng)))
        .collect();
    let total: f64 = raw.iter().map(|&(_, p)| p).sum();
    let mut dist: Vec<(f64, f64)> = raw.into_iter().map(|(i, p)| (i as f64, p / total)).collect();
    dist.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    dist.dedup_by(|a, b| {
        if a.0 == b.0 {
            b.1 += a.1;
            true
        } else {
            false
        }
    });
    dist
}

fn random_cost(rng: &mut impl RngCore) -> f64 {
    (0.5 + unit_f64(rng) * 1.5) * 100.0_f64
}

fn rounded_cost(rng: &mut impl RngCore) -> f64 {
    random_cost(rng).round() / 100.0
}

fn budget_between(rng: &mut impl RngCore, costs: &[f64]) -> f64 {
    let max_c = costs.iter().cloned().fold(0.0, f64::max);
    let sum_c: f64 = costs.iter().sum();
    let b = max_c + unit_f64(rng) * (sum_c - max_c);
    (b * 100.0).ceil() / 100.0
}

/// A seeded random instance of the requested objective.
pub fn random_file(objective: &str, n: usize, max_support: usize, seed: u64) -> Result<InstanceFile> {
    if n == 0 {
        bail!("need at least one item");
    }
    let mut rng = SeedSpec::new(seed, 0).rng();
    let metric_objective = matches!(objective, "kmedian" | "steiner");

    let num_points = (2 * n).max(4);
    let items: Vec<ItemSpec> = (0..n)
        .map(|_| {
            let dist = if metric_objective {
                random_point_dist(&mut rng, max_support, num_points)
            } else {
                random_dist(&mut rng, max_support, 10.0)
            };
            ItemSpec {
                dist,
                cost: rounded_cost(&mut rng),
                weight: if objective == "wct" {
                    Some(((0.1 + unit_f64(&mut rng) * 5.0) * 100.0).round() / 100.0)
                } else {
                    None
                },
            }
        })
        .collect();
    let costs: Vec<f64> = items.iter().map(|i| i.cost).collect();
    let budget = budget_between(&mut rng, &costs);

    let metric = if metric_objective {
        let points: Vec<[f64; 2]> = (0..num_points)
            .map(|_| {
                [
                    (unit_f64(&mut rng) * 1000.0).round() / 100.0,
                    (unit_f64(&mut rng) * 1000.0).round() / 100.0,
                ]
            })
            .collect();
        Some(MetricSpec { points: Some(points), matrix: None, norm: Some("l2".into()) })
    } else {
        None
    };

    let file = InstanceFile {
        objective: objective.into(),
        budget,
        machines: if objective == "makespan" { Some(2 + (unit_f64(&mut rng) * 2.0) as usize) } else { None },
        k: if objective == "kmedian" { Some(1 + (unit_f64(&mut rng) * 2.0) as usize) } else { None },
        centers: if objective == "kmedian" { Some((0..num_points).collect()) } else { None },
        arbitrary_centers: false,
        items,
        metric,
    };
    // Fail fast if the draw produced something inconsistent.
    file.to_instance()?;
    Ok(file)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::Instance;

    #[test]
    fn benefit_round_trips() {
        let file = benefit_file(20);
        assert_eq!(file.items.len(), 20);
        match file.to_instance().unwrap() {
            Instance::Wct(inst) => {
                assert_eq!(inst.budget(), 20.0);
                assert!((probe_core::wct::wct_policy_value(&inst, &[]) - 10.5).abs() < 1e-9);
            }
            _ => panic!("benefit instances are wct"),
        }
    }

    #[test]
    fn gap_file_round_trips() {
        let file = gap_file(1, 4, 6).unwrap();
        assert_eq!(file.items.len(), 15);
        assert!(file.arbitrary_centers);
        match file.to_instance().unwrap() {
            Instance::KMedian(inst) => assert_eq!(inst.k(), 14),
            _ => panic!("gap instances are kmedian"),
        }
    }

    #[test]
    fn random_instances_parse_for_every_objective() {
        for objective in ["wct", "makespan", "kmedian", "steiner"] {
            let n = if objective == "steiner" { 4 } else { 3 };
            let file = random_file(objective, n, 3, 11).unwrap();
            let text = file.emit();
            let back: InstanceFile = serde_json::from_str(&text).unwrap();
            assert_eq!(file, back, "{objective}");
            back.to_instance().unwrap();
        }
    }

    #[test]
    fn random_generation_is_seed_deterministic() {
        let a = random_file("wct", 5, 3, 42).unwrap();
        let b = random_file("wct", 5, 3, 42).unwrap();
        assert_eq!(a, b);
        let c = random_file("wct", 5, 3, 43).unwrap();
        assert_ne!(a, c);
    }
}
