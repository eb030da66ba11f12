//! The expected-distance metric over concrete points and distributional
//! nodes.
//!
//! A node's location is a distribution over the point set; the distance
//! between two elements is the expectation of the underlying point
//! distance over their (independent) locations. Linearity of expectation
//! preserves the triangle inequality, so points and nodes together form a
//! metric space — every downstream solver works on that matrix and never
//! needs to know which elements were random.

use crate::dist::DiscreteDist;
use crate::error::{Error, Result};

pub const TRIANGLE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Norm {
    L1,
    L2,
}

/// The underlying point metric: explicit matrix, or planar coordinates.
#[derive(Debug, Clone)]
pub enum PointSet {
    Matrix(Vec<Vec<f64>>),
    Coords { points: Vec<[f64; 2]>, norm: Norm },
}

impl PointSet {
    /// Validates a matrix point set: square, symmetric, zero diagonal,
    /// triangle inequality within tolerance. Coordinate sets are metrics by
    /// construction and skip the scan.
    pub fn new_matrix(matrix: Vec<Vec<f64>>) -> Result<Self> {
        let n = matrix.len();
        if n == 0 {
            return Err(Error::BrokenMetric("empty point set".into()));
        }
        for (i, row) in matrix.iter().enumerate() {
            if row.len() != n {
                return Err(Error::BrokenMetric(format!("row {i} has length {}, want {n}", row.len())));
            }
            if matrix[i][i] != 0.0 {
                return Err(Error::BrokenMetric(format!("nonzero diagonal at {i}")));
            }
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::BrokenMetric(format!("distance ({i},{j}) = {v}")));
                }
                if (v - matrix[j][i]).abs() > 1e-12 {
                    return Err(Error::BrokenMetric(format!("asymmetry at ({i},{j})")));
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if matrix[i][j] + matrix[j][k] < matrix[i][k] - TRIANGLE_TOLERANCE {
                        return Err(Error::BrokenMetric(format!(
                            "triangle violated at ({i},{j},{k})"
                        )));
                    }
                }
            }
        }
        Ok(PointSet::Matrix(matrix))
    }

    pub fn new_coords(points: Vec<[f64; 2]>, norm: Norm) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::BrokenMetric("empty point set".into()));
        }
        for (i, p) in points.iter().enumerate() {
            if !p[0].is_finite() || !p[1].is_finite() {
                return Err(Error::BrokenMetric(format!("point {i} has non-finite coordinates")));
            }
        }
        Ok(PointSet::Coords { points, norm })
    }

    pub fn len(&self) -> usize {
        match self {
            PointSet::Matrix(m) => m.len(),
            PointSet::Coords { points, .. } => points.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dist(&self, p: usize, q: usize) -> f64 {
        match self {
            PointSet::Matrix(m) => m[p][q],
            PointSet::Coords { points, norm } => {
                let dx = points[p][0] - points[q][0];
                let dy = points[p][1] - points[q][1];
                match norm {
                    Norm::L1 => dx.abs() + dy.abs(),
                    Norm::L2 => (dx * dx + dy * dy).sqrt(),
                }
            }
        }
    }
}

/// One uncertain input of a metric problem: a location distribution over
/// point indices plus its probe cost.
#[derive(Debug, Clone)]
pub struct MetricNode {
    pub location: DiscreteDist,
    pub probe_cost: f64,
}

impl MetricNode {
    /// The support as point indices (values must be integral and in range;
    /// validated by [`NodeSet::new`]).
    pub fn support_points(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.location.support().iter().map(|&(v, p)| (v as usize, p))
    }
}

#[derive(Debug, Clone)]
pub struct NodeSet {
    nodes: Vec<MetricNode>,
}

impl NodeSet {
    pub fn new(nodes: Vec<MetricNode>, points: &PointSet) -> Result<Self> {
        for (i, node) in nodes.iter().enumerate() {
            if !node.probe_cost.is_finite() || node.probe_cost < 0.0 {
                return Err(Error::InvalidInstance(format!("node {i}: probe cost {} invalid", node.probe_cost)));
            }
            for &(v, _) in node.location.support() {
                if v.fract().abs() > 1e-9 {
                    return Err(Error::InvalidInstance(format!(
                        "node {i}: support value {v} is not a point index"
                    )));
                }
                if (v as usize) >= points.len() {
                    return Err(Error::InvalidInstance(format!(
                        "node {i}: point index {v} out of range (have {} points)",
                        points.len()
                    )));
                }
            }
        }
        Ok(Self { nodes })
    }

    pub fn nodes(&self) -> &[MetricNode] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn probe_cost_of(&self, set: &[usize]) -> f64 {
        set.iter().map(|&i| self.nodes[i].probe_cost).sum()
    }
}

/// An element of the extended space: a concrete point or a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Elem {
    Point(usize),
    Node(usize),
}

/// A fixed probe set over metric nodes with its evaluated expected value.
#[derive(Debug, Clone)]
pub struct MetricProbePolicy {
    pub probe_set: Vec<usize>,
    pub probe_cost: f64,
    pub value: crate::eval::ValueEstimate,
}

/// Exact expected distance between two elements by support enumeration.
/// A node paired with itself is one random variable, not two independent
/// copies, so its self-distance is zero.
pub fn expected_distance(a: Elem, b: Elem, points: &PointSet, nodes: &NodeSet) -> f64 {
    if a == b {
        return 0.0;
    }
    match (a, b) {
        (Elem::Point(p), Elem::Point(q)) => points.dist(p, q),
        (Elem::Point(p), Elem::Node(v)) | (Elem::Node(v), Elem::Point(p)) => nodes.nodes()[v]
            .support_points()
            .map(|(q, prob)| prob * points.dist(p, q))
            .sum(),
        (Elem::Node(u), Elem::Node(v)) => {
            let mut acc = 0.0;
            for (p, pp) in nodes.nodes()[u].support_points() {
                for (q, pq) in nodes.nodes()[v].support_points() {
                    acc += pp * pq * points.dist(p, q);
                }
            }
            acc
        }
    }
}

/// The full distance matrix over points then nodes. Flat index `i < P`
/// is point `i`; index `P + j` is node `j`.
#[derive(Debug, Clone)]
pub struct ExtendedMetric {
    num_points: usize,
    num_nodes: usize,
    d: Vec<Vec<f64>>,
}

impl ExtendedMetric {
    // Index loops keep the symmetric fill readable.
    #[allow(clippy::needless_range_loop)]
    pub fn build(points: &PointSet, nodes: &NodeSet) -> Result<Self> {
        let np = points.len();
        let nv = nodes.len();
        let total = np + nv;
        let elem = |i: usize| if i < np { Elem::Point(i) } else { Elem::Node(i - np) };
        let mut d = vec![vec![0.0; total]; total];
        for i in 0..total {
            for j in i + 1..total {
                let v = expected_distance(elem(i), elem(j), points, nodes);
                d[i][j] = v;
                d[j][i] = v;
            }
        }
        // The expectation construction preserves triangles exactly; a
        // violation beyond rounding means the point set itself is broken.
        for i in 0..total {
            for j in 0..total {
                for k in 0..total {
                    if d[i][j] + d[j][k] < d[i][k] - TRIANGLE_TOLERANCE {
                        return Err(Error::BrokenMetric(format!(
                            "extended triangle violated at ({i},{j},{k})"
                        )));
                    }
                }
            }
        }
        Ok(Self { num_points: np, num_nodes: nv, d })
    }

    pub fn num_points(&self) -> usize {
        self.num_points
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn len(&self) -> usize {
        self.num_points + self.num_nodes
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn flat(&self, e: Elem) -> usize {
        match e {
            Elem::Point(p) => p,
            Elem::Node(v) => self.num_points + v,
        }
    }

    pub fn dist(&self, a: usize, b: usize) -> f64 {
        self.d[a][b]
    }

    pub fn dist_elem(&self, a: Elem, b: Elem) -> f64 {
        self.d[self.flat(a)][self.flat(b)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{unit_f64, SeedSpec};

    fn line_points(xs: &[f64]) -> PointSet {
        PointSet::new_coords(xs.iter().map(|&x| [x, 0.0]).collect(), Norm::L1).unwrap()
    }

    fn node_at(points: Vec<(usize, f64)>, cost: f64) -> MetricNode {
        MetricNode {
            location: DiscreteDist::new(points.into_iter().map(|(i, p)| (i as f64, p)).collect())
                .unwrap(),
            probe_cost: cost,
        }
    }

    #[test]
    fn point_mass_nodes_inherit_point_distance() {
        let ps = line_points(&[0.0, 3.0]);
        let ns = NodeSet::new(vec![node_at(vec![(0, 1.0)], 1.0), node_at(vec![(1, 1.0)], 1.0)], &ps)
            .unwrap();
        let d = expected_distance(Elem::Node(0), Elem::Node(1), &ps, &ns);
        assert!((d - 3.0).abs() < 1e-12);
    }

    #[test]
    fn uniform_nodes_on_a_line() {
        let ps = line_points(&[0.0, 2.0]);
        let u = node_at(vec![(0, 0.5), (1, 0.5)], 1.0);
        let ns = NodeSet::new(vec![u.clone(), u], &ps).unwrap();
        let d = expected_distance(Elem::Node(0), Elem::Node(1), &ps, &ns);
        assert!((d - 1.0).abs() < 1e-12);
    }

    #[test]
    fn point_versus_uniform_node() {
        let ps = line_points(&[0.0, 4.0]);
        let ns = NodeSet::new(vec![node_at(vec![(0, 0.5), (1, 0.5)], 1.0)], &ps).unwrap();
        let d = expected_distance(Elem::Point(0), Elem::Node(0), &ps, &ns);
        assert!((d - 2.0).abs() < 1e-12);
    }

    #[test]
    fn self_distance_is_zero_by_convention() {
        let ps = line_points(&[0.0, 2.0]);
        let ns = NodeSet::new(vec![node_at(vec![(0, 0.5), (1, 0.5)], 1.0)], &ps).unwrap();
        assert_eq!(expected_distance(Elem::Node(0), Elem::Node(0), &ps, &ns), 0.0);
    }

    #[test]
    fn extended_matrix_shape_and_symmetry() {
        let ps = line_points(&[0.0, 5.0]);
        let ns = NodeSet::new(vec![node_at(vec![(0, 0.3), (1, 0.7)], 1.0)], &ps).unwrap();
        let m = ExtendedMetric::build(&ps, &ns).unwrap();
        assert_eq!(m.len(), 3);
        for i in 0..3 {
            assert_eq!(m.dist(i, i), 0.0);
            for j in 0..3 {
                assert_eq!(m.dist(i, j), m.dist(j, i));
            }
        }
        assert_eq!(m.dist_elem(Elem::Point(0), Elem::Point(1)), 5.0);
    }

    #[test]
    fn point_mass_nodes_relabel_the_point_metric() {
        let ps = line_points(&[0.0, 1.0, 4.0]);
        let ns = NodeSet::new(
            vec![
                node_at(vec![(2, 1.0)], 1.0),
                node_at(vec![(0, 1.0)], 1.0),
                node_at(vec![(1, 1.0)], 1.0),
            ],
            &ps,
        )
        .unwrap();
        let m = ExtendedMetric::build(&ps, &ns).unwrap();
        let perm = [2usize, 0, 1];
        for a in 0..3 {
            for b in 0..3 {
                assert_eq!(
                    m.dist_elem(Elem::Node(a), Elem::Node(b)),
                    ps.dist(perm[a], perm[b])
                );
            }
        }
    }

    #[test]
    fn random_extended_metrics_satisfy_triangles() {
        let mut rng = SeedSpec::new(47, 0).rng();
        for _ in 0..30 {
            let np = 2 + (unit_f64(&mut rng) * 4.0) as usize;
            let pts: Vec<[f64; 2]> =
                (0..np).map(|_| [unit_f64(&mut rng) * 10.0, unit_f64(&mut rng) * 10.0]).collect();
            let ps = PointSet::new_coords(pts, Norm::L2).unwrap();
            let nv = 1 + (unit_f64(&mut rng) * 4.0) as usize;
            let nodes: Vec<MetricNode> = (0..nv)
                .map(|_| {
                    let s = 1 + (unit_f64(&mut rng) * 3.0) as usize;
                    let raw: Vec<(usize, f64)> = (0..s)
                        .map(|_| ((unit_f64(&mut rng) * np as f64) as usize % np, 0.1 + unit_f64(&mut rng)))
                        .collect();
                    let total: f64 = raw.iter().map(|&(_, p)| p).sum();
                    // Duplicate indices are merged by the distribution.
                    node_at(raw.into_iter().map(|(i, p)| (i, p / total)).collect(), 1.0)
                })
                .collect();
            let ns = NodeSet::new(nodes, &ps).unwrap();
            // build() runs the exhaustive triangle scan internally.
            ExtendedMetric::build(&ps, &ns).unwrap();
        }
    }

    #[test]
    fn matrix_validation_rejects_violations() {
        assert!(PointSet::new_matrix(vec![vec![0.0, 1.0], vec![2.0, 0.0]]).is_err());
        assert!(PointSet::new_matrix(vec![
            vec![0.0, 1.0, 5.0],
            vec![1.0, 0.0, 1.0],
            vec![5.0, 1.0, 0.0]
        ])
        .is_err());
        assert!(PointSet::new_matrix(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).is_ok());
    }

    #[test]
    fn node_validation_rejects_dangling_indices() {
        let ps = line_points(&[0.0, 1.0]);
        assert!(NodeSet::new(vec![node_at(vec![(2, 1.0)], 1.0)], &ps).is_err());
        let frac = MetricNode {
            location: DiscreteDist::new(vec![(0.5, 1.0)]).unwrap(),
            probe_cost: 1.0,
        };
        assert!(NodeSet::new(vec![frac], &ps).is_err());
    }
}
