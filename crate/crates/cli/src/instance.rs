//! The instance file format: one JSON document per problem, covering all
//! four objectives. Parsing validates eagerly and names the offending
//! field; emit/parse round-trips are value-identical.

use std::fmt;
use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use probe_core::dist::DiscreteDist;
use probe_core::kmedian::{CenterPolicy, KMedianInstance};
use probe_core::makespan::{MakespanInstance, MakespanJob};
use probe_core::metric::{MetricNode, NodeSet, Norm, PointSet};
use probe_core::steiner::SteinerInstance;
use probe_core::wct::{WctInstance, WctJob};

/// A semantic problem in the instance file. Maps to exit code 2.
#[derive(Debug)]
pub struct ValidationError(pub String);

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid instance: {}", self.0)
    }
}

impl std::error::Error for ValidationError {}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct InstanceFile {
    pub objective: String,
    pub budget: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub machines: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub centers: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub arbitrary_centers: bool,
    pub items: Vec<ItemSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<MetricSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ItemSpec {
    /// `[[value, probability], ...]`; values are point indices for the
    /// metric objectives.
    pub dist: Vec<(f64, f64)>,
    pub cost: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MetricSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub norm: Option<String>,
}

/// A parsed instance, ready for the strategy and oracle layers.
#[derive(Debug)]
pub enum Instance {
    Wct(WctInstance),
    Makespan(MakespanInstance),
    KMedian(KMedianInstance),
    Steiner(SteinerInstance),
}

impl Instance {
    pub fn objective_name(&self) -> &'static str {
        match self {
            Instance::Wct(_) => "wct",
            Instance::Makespan(_) => "makespan",
            Instance::KMedian(_) => "kmedian",
            Instance::Steiner(_) => "steiner",
        }
    }

    pub fn budget(&self) -> f64 {
        match self {
            Instance::Wct(i) => i.budget(),
            Instance::Makespan(i) => i.budget(),
            Instance::KMedian(i) => i.budget(),
            Instance::Steiner(i) => i.budget(),
        }
    }

    pub fn num_items(&self) -> usize {
        match self {
            Instance::Wct(i) => i.len(),
            Instance::Makespan(i) => i.len(),
            Instance::KMedian(i) => i.nodes().len(),
            Instance::Steiner(i) => i.nodes().len(),
        }
    }
}

fn invalid(msg: String) -> anyhow::Error {
    ValidationError(msg).into()
}

impl InstanceFile {
    pub fn to_instance(&self) -> Result<Instance> {
        if self.items.is_empty() {
            return Err(invalid("items: need at least one".into()));
        }
        for (idx, item) in self.items.iter().enumerate() {
            if !item.cost.is_finite() || item.cost < 0.0 {
                return Err(invalid(format!("items[{idx}].cost: {} is not a nonnegative real", item.cost)));
            }
            let sum: f64 = item.dist.iter().map(|&(_, p)| p).sum();
            if (sum - 1.0).abs() > probe_core::dist::PROB_SUM_TOLERANCE {
                return Err(invalid(format!(
                    "items[{idx}].dist: probabilities sum to {sum}, expected 1"
                )));
            }
        }
        let max_cost = self.items.iter().map(|i| i.cost).fold(0.0, f64::max);
        if !self.budget.is_finite() || self.budget < max_cost {
            return Err(invalid(format!(
                "budget: {} is below the largest probe cost {max_cost}",
                self.budget
            )));
        }

        match self.objective.as_str() {
            "wct" => self.to_wct().map(Instance::Wct),
            "makespan" => self.to_makespan().map(Instance::Makespan),
            "kmedian" => self.to_kmedian().map(Instance::KMedian),
            "steiner" => self.to_steiner().map(Instance::Steiner),
            other => Err(invalid(format!(
                "objective: {other:?} is not one of wct, makespan, kmedian, steiner"
            ))),
        }
    }

    fn item_dist(&self, idx: usize) -> Result<DiscreteDist> {
        DiscreteDist::new(self.items[idx].dist.clone())
            .map_err(|e| invalid(format!("items[{idx}].dist: {e}")))
    }

    fn to_wct(&self) -> Result<WctInstance> {
        let mut jobs = Vec::with_capacity(self.items.len());
        for (idx, item) in self.items.iter().enumerate() {
            let weight = item.weight.unwrap_or(1.0);
            if !weight.is_finite() || weight < 0.0 {
                return Err(invalid(format!("items[{idx}].weight: {weight} is not a nonnegative real")));
            }
            jobs.push(WctJob { size: self.item_dist(idx)?, weight, probe_cost: item.cost });
        }
        WctInstance::new(jobs, self.budget).map_err(|e| invalid(e.to_string()))
    }

    fn to_makespan(&self) -> Result<MakespanInstance> {
        let machines = self
            .machines
            .ok_or_else(|| invalid("machines: required for the makespan objective".into()))?;
        let mut jobs = Vec::with_capacity(self.items.len());
        for (idx, item) in self.items.iter().enumerate() {
            jobs.push(MakespanJob { size: self.item_dist(idx)?, probe_cost: item.cost });
        }
        MakespanInstance::new(jobs, machines, self.budget).map_err(|e| invalid(e.to_string()))
    }

    fn point_set(&self) -> Result<PointSet> {
        let metric = self
            .metric
            .as_ref()
            .ok_or_else(|| invalid("metric: required for metric objectives".into()))?;
        match (&metric.points, &metric.matrix) {
            (Some(points), None) => {
                let norm = match metric.norm.as_deref() {
                    None | Some("l2") => Norm::L2,
                    Some("l1") => Norm::L1,
                    Some(other) => {
                        return Err(invalid(format!("metric.norm: {other:?} is not l1 or l2")))
                    }
                };
                PointSet::new_coords(points.clone(), norm).map_err(|e| invalid(format!("metric.points: {e}")))
            }
            (None, Some(matrix)) => PointSet::new_matrix(matrix.clone())
                .map_err(|e| invalid(format!("metric.matrix: {e}"))),
            (Some(_), Some(_)) => Err(invalid("metric: give points or matrix, not both".into())),
            (None, None) => Err(invalid("metric: needs points or matrix".into())),
        }
    }

    fn node_set(&self, points: &PointSet) -> Result<NodeSet> {
        let mut nodes = Vec::with_capacity(self.items.len());
        for (idx, item) in self.items.iter().enumerate() {
            nodes.push(MetricNode { location: self.item_dist(idx)?, probe_cost: item.cost });
        }
        NodeSet::new(nodes, points).map_err(|e| invalid(format!("items: {e}")))
    }

    fn to_kmedian(&self) -> Result<KMedianInstance> {
        let k = self.k.ok_or_else(|| invalid("k: required for the kmedian objective".into()))?;
        let points = self.point_set()?;
        let nodes = self.node_set(&points)?;
        let centers = match (&self.centers, self.arbitrary_centers) {
            (Some(c), false) => CenterPolicy::FixedPoints(c.clone()),
            (None, true) => CenterPolicy::AnyElement,
            (None, false) => {
                return Err(invalid("centers: required unless arbitrary_centers is true".into()))
            }
            (Some(_), true) => {
                return Err(invalid("centers: conflicts with arbitrary_centers".into()))
            }
        };
        KMedianInstance::new(points, nodes, k, centers, self.budget)
            .map_err(|e| invalid(e.to_string()))
    }

    fn to_steiner(&self) -> Result<SteinerInstance> {
        let points = self.point_set()?;
        let nodes = self.node_set(&points)?;
        SteinerInstance::new(points, nodes, self.budget).map_err(|e| invalid(e.to_string()))
    }

    pub fn emit(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("instance files serialize");
        text.push('\n');
        text
    }
}

/// Reads and validates an instance file.
pub fn parse_instance(path: &Path) -> Result<(InstanceFile, Instance)> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let file: InstanceFile = serde_json::from_str(&text)
        .map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    let instance = file.to_instance()?;
    Ok((file, instance))
}
