//! Weighted undirected graphs and their Laplacians.
//!
//! Adjacency is stored in compressed rows with, per node, neighbors sorted by
//! id and a running prefix of the edge weights. The prefix makes
//! weight-proportional neighbor sampling a binary search.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::operator::SymmetricOperator;

/// Undirected graph with strictly positive edge weights and no self-loops.
///
/// Immutable once built, so it can be shared freely between worker threads.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    offsets: Vec<usize>,
    targets: Vec<usize>,
    weights: Vec<f64>,
    cumulative: Vec<f64>,
    degrees: Vec<f64>,
    num_edges: usize,
}

/// A single broken invariant found by [`WeightedGraph::validate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Violation {
    SymmetryViolation(usize, usize),
    DegreeMismatch(usize),
    SelfLoop(usize),
    DuplicateEdge(usize, usize),
    NonPositiveWeight(usize, usize),
    NodeOutOfRange(usize, usize),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::SymmetryViolation(i, j) => write!(f, "SymmetryViolation({i},{j})"),
            Violation::DegreeMismatch(i) => write!(f, "DegreeMismatch({i})"),
            Violation::SelfLoop(i) => write!(f, "SelfLoop({i})"),
            Violation::DuplicateEdge(i, j) => write!(f, "DuplicateEdge({i},{j})"),
            Violation::NonPositiveWeight(i, j) => write!(f, "NonPositiveWeight({i},{j})"),
            Violation::NodeOutOfRange(i, j) => write!(f, "NodeOutOfRange({i},{j})"),
        }
    }
}

impl WeightedGraph {
    /// Graph on `n` nodes with no edges.
    pub fn edgeless(n: usize) -> Self {
        Self {
            offsets: vec![0; n + 1],
            targets: Vec::new(),
            weights: Vec::new(),
            cumulative: Vec::new(),
            degrees: vec![0.0; n],
            num_edges: 0,
        }
    }

    /// Builds a graph from `(i, j, w)` rows, inferring `n` as the largest id plus one.
    pub fn from_edge_list(rows: &[(usize, usize, f64)]) -> Result<Self> {
        let n = rows
            .iter()
            .map(|&(i, j, _)| i.max(j) + 1)
            .max()
            .unwrap_or(0);
        Self::with_nodes(n, rows)
    }

    /// Builds a graph on exactly `n` nodes; isolated nodes are allowed.
    ///
    /// Repeated rows for the same unordered pair are merged when their weights
    /// agree and rejected otherwise.
    pub fn with_nodes(n: usize, rows: &[(usize, usize, f64)]) -> Result<Self> {
        let mut edges: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for &(i, j, w) in rows {
            if i >= n || j >= n {
                return Err(Error::NodeOutOfRange { node: i.max(j), n });
            }
            if i == j {
                return Err(Error::SelfLoop(i));
            }
            if !(w > 0.0) || !w.is_finite() {
                return Err(Error::NegativeWeight { i, j, w });
            }
            let key = (i.min(j), i.max(j));
            match edges.get(&key) {
                Some(&prev) if prev != w => {
                    return Err(Error::ConflictingDuplicate {
                        i: key.0,
                        j: key.1,
                        first: prev,
                        second: w,
                    })
                }
                Some(_) => {}
                None => {
                    edges.insert(key, w);
                }
            }
        }
        let mut adjacency: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        // BTreeMap order keeps every row sorted by neighbor id.
        for (&(i, j), &w) in &edges {
            adjacency[i].push((j, w));
            adjacency[j].push((i, w));
        }
        Ok(Self::from_rows(adjacency, None))
    }

    /// Wraps raw adjacency rows without any checking.
    ///
    /// Degrees default to the row sums; passing `degrees` overrides them. Used
    /// to inspect malformed inputs with [`WeightedGraph::validate`].
    pub fn from_adjacency_unchecked(
        adjacency: Vec<Vec<(usize, f64)>>,
        degrees: Option<Vec<f64>>,
    ) -> Self {
        Self::from_rows(adjacency, degrees)
    }

    fn from_rows(adjacency: Vec<Vec<(usize, f64)>>, degrees: Option<Vec<f64>>) -> Self {
        let n = adjacency.len();
        let total: usize = adjacency.iter().map(Vec::len).sum();
        let mut offsets = Vec::with_capacity(n + 1);
        let mut targets = Vec::with_capacity(total);
        let mut weights = Vec::with_capacity(total);
        let mut cumulative = Vec::with_capacity(total);
        let mut row_sums = Vec::with_capacity(n);
        let mut num_edges = 0;
        offsets.push(0);
        for (i, row) in adjacency.iter().enumerate() {
            let mut acc = 0.0;
            for &(j, w) in row {
                acc += w;
                targets.push(j);
                weights.push(w);
                cumulative.push(acc);
                if i < j {
                    num_edges += 1;
                }
            }
            row_sums.push(acc);
            offsets.push(targets.len());
        }
        Self {
            offsets,
            targets,
            weights,
            cumulative,
            degrees: degrees.unwrap_or(row_sums),
            num_edges,
        }
    }

    pub fn n(&self) -> usize {
        self.degrees.len()
    }

    /// Number of undirected edges.
    pub fn num_edges(&self) -> usize {
        self.num_edges
    }

    pub fn degree(&self, i: usize) -> f64 {
        self.degrees[i]
    }

    pub fn degrees(&self) -> &[f64] {
        &self.degrees
    }

    /// Σ d_i, i.e. twice the summed edge weight.
    pub fn total_weight(&self) -> f64 {
        self.degrees.iter().sum()
    }

    pub fn max_degree(&self) -> f64 {
        self.degrees.iter().copied().fold(0.0, f64::max)
    }

    /// Neighbors of `i` with edge weights, ascending by neighbor id.
    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.offsets[i]..self.offsets[i + 1];
        self.targets[range.clone()]
            .iter()
            .copied()
            .zip(self.weights[range].iter().copied())
    }

    /// Each undirected edge once, as `(i, j, w)` with `i < j`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n()).flat_map(move |i| {
            self.neighbors(i)
                .filter(move |&(j, _)| i < j)
                .map(move |(j, w)| (i, j, w))
        })
    }

    /// Picks a neighbor of `i` with probability `A_ij / d_i`, given `u` uniform in `[0, 1)`.
    ///
    /// Returns `None` for isolated nodes.
    #[inline]
    pub fn pick_neighbor(&self, i: usize, u: f64) -> Option<usize> {
        let lo = self.offsets[i];
        let hi = self.offsets[i + 1];
        if lo == hi {
            return None;
        }
        let prefix = &self.cumulative[lo..hi];
        let target = u * prefix[prefix.len() - 1];
        let k = prefix
            .partition_point(|&c| c <= target)
            .min(prefix.len() - 1);
        Some(self.targets[lo + k])
    }

    pub fn laplacian(&self) -> LaplacianOperator<'_> {
        LaplacianOperator { graph: self }
    }

    /// Returns `(D - A) x`.
    pub fn laplacian_apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                got: x.len(),
            });
        }
        let mut out = vec![0.0; x.len()];
        self.laplacian_apply_into(x, &mut out);
        Ok(out)
    }

    pub(crate) fn laplacian_apply_into(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let off: f64 = self.neighbors(i).map(|(j, w)| w * x[j]).sum();
            *o = self.degrees[i] * x[i] - off;
        }
    }

    /// Dense `D - A`.
    pub fn dense_laplacian(&self) -> DMatrix<f64> {
        let n = self.n();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = self.degrees[i];
            for (j, w) in self.neighbors(i) {
                m[(i, j)] -= w;
            }
        }
        m
    }

    /// Connected component count (isolated nodes count as components).
    pub fn component_count(&self) -> usize {
        let n = self.n();
        let mut seen = vec![false; n];
        let mut stack = Vec::new();
        let mut count = 0;
        for s in 0..n {
            if seen[s] {
                continue;
            }
            count += 1;
            seen[s] = true;
            stack.push(s);
            while let Some(u) = stack.pop() {
                for (v, _) in self.neighbors(u) {
                    if v < n && !seen[v] {
                        seen[v] = true;
                        stack.push(v);
                    }
                }
            }
        }
        count
    }

    /// Lists every broken invariant. Empty means the graph is well formed.
    pub fn validate(&self) -> Vec<Violation> {
        let n = self.n();
        let mut out = Vec::new();
        let mut seen: HashMap<(usize, usize), f64> = HashMap::with_capacity(self.targets.len());
        for i in 0..n {
            let mut abs_sum = 0.0;
            let mut sum = 0.0;
            let mut count = 0usize;
            for (j, w) in self.neighbors(i) {
                count += 1;
                sum += w;
                abs_sum += w.abs();
                if j >= n {
                    out.push(Violation::NodeOutOfRange(i, j));
                    continue;
                }
                if j == i {
                    out.push(Violation::SelfLoop(i));
                    continue;
                }
                if !(w > 0.0) || !w.is_finite() {
                    out.push(Violation::NonPositiveWeight(i, j));
                }
                if seen.insert((i, j), w).is_some() {
                    out.push(Violation::DuplicateEdge(i, j));
                }
            }
            let tol = 1e-12 * (count.max(1) as f64) * abs_sum.max(f64::MIN_POSITIVE);
            if (self.degrees[i] - sum).abs() > tol || !self.degrees[i].is_finite() {
                out.push(Violation::DegreeMismatch(i));
            }
        }
        let mut asym: Vec<(usize, usize)> = seen
            .iter()
            .filter(|&(&(i, j), &w)| seen.get(&(j, i)) != Some(&w))
            .map(|(&(i, j), _)| (i.min(j), i.max(j)))
            .collect();
        asym.sort_unstable();
        asym.dedup();
        out.extend(
            asym.into_iter()
                .map(|(i, j)| Violation::SymmetryViolation(i, j)),
        );
        out
    }
}

/// `L = D - A` viewed as a linear operator.
#[derive(Debug, Clone, Copy)]
pub struct LaplacianOperator<'g> {
    graph: &'g WeightedGraph,
}

impl<'g> LaplacianOperator<'g> {
    pub fn graph(&self) -> &'g WeightedGraph {
        self.graph
    }
}

impl SymmetricOperator for LaplacianOperator<'_> {
    fn dim(&self) -> usize {
        self.graph.n()
    }

    fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        self.graph.laplacian_apply_into(x, out);
    }

    fn diagonal(&self) -> Vec<f64> {
        self.graph.degrees.clone()
    }

    fn to_dense(&self) -> DMatrix<f64> {
        self.graph.dense_laplacian()
    }
}

impl SymmetricOperator for WeightedGraph {
    fn dim(&self) -> usize {
        self.n()
    }

    fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        self.laplacian_apply_into(x, out);
    }

    fn diagonal(&self) -> Vec<f64> {
        self.degrees.clone()
    }

    fn to_dense(&self) -> DMatrix<f64> {
        self.dense_laplacian()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn triangle() -> WeightedGraph {
        WeightedGraph::from_edge_list(&[(0, 1, 1.0), (1, 2, 1.0), (2, 0, 1.0)]).unwrap()
    }

    #[test]
    fn single_edge() {
        let g = WeightedGraph::from_edge_list(&[(0, 1, 1.0)]).unwrap();
        assert_eq!(g.n(), 2);
        assert_eq!(g.degrees(), &[1.0, 1.0]);
        assert_eq!(g.num_edges(), 1);
    }

    #[test]
    fn triangle_degrees() {
        assert_eq!(triangle().degrees(), &[2.0, 2.0, 2.0]);
        assert_eq!(triangle().num_edges(), 3);
    }

    #[test]
    fn duplicate_rows_merge() {
        let g = WeightedGraph::from_edge_list(&[(0, 1, 2.0), (1, 0, 2.0)]).unwrap();
        assert_eq!(g.num_edges(), 1);
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1, 2.0)]);
    }

    #[test]
    fn construction_errors() {
        assert!(matches!(
            WeightedGraph::from_edge_list(&[(0, 1, -1.0)]),
            Err(Error::NegativeWeight { .. })
        ));
        assert!(matches!(
            WeightedGraph::from_edge_list(&[(0, 1, 0.0)]),
            Err(Error::NegativeWeight { .. })
        ));
        assert_eq!(
            WeightedGraph::from_edge_list(&[(2, 2, 1.0)]),
            Err(Error::SelfLoop(2))
        );
        assert!(matches!(
            WeightedGraph::from_edge_list(&[(0, 1, 1.0), (1, 0, 2.0)]),
            Err(Error::ConflictingDuplicate { i: 0, j: 1, .. })
        ));
        assert!(matches!(
            WeightedGraph::with_nodes(2, &[(0, 2, 1.0)]),
            Err(Error::NodeOutOfRange { node: 2, n: 2 })
        ));
    }

    #[test]
    fn laplacian_examples() {
        let k3 = triangle();
        assert_eq!(
            k3.laplacian_apply(&[1.0, 1.0, 1.0]).unwrap(),
            vec![0.0, 0.0, 0.0]
        );
        assert_eq!(
            k3.laplacian_apply(&[1.0, 0.0, 0.0]).unwrap(),
            vec![2.0, -1.0, -1.0]
        );
        let e = WeightedGraph::from_edge_list(&[(0, 1, 2.5)]).unwrap();
        assert_eq!(e.laplacian_apply(&[1.0, 0.0]).unwrap(), vec![2.5, -2.5]);
        assert_eq!(
            k3.laplacian_apply(&[1.0]),
            Err(Error::DimensionMismatch {
                expected: 3,
                got: 1
            })
        );
    }

    #[test]
    fn validate_reports() {
        assert!(triangle().validate().is_empty());
        let asym =
            WeightedGraph::from_adjacency_unchecked(vec![vec![(1, 1.0)], vec![(0, 2.0)]], None);
        assert_eq!(asym.validate(), vec![Violation::SymmetryViolation(0, 1)]);
        let one_sided = WeightedGraph::from_adjacency_unchecked(vec![vec![(1, 1.0)], vec![]], None);
        assert_eq!(
            one_sided.validate(),
            vec![Violation::SymmetryViolation(0, 1)]
        );
        let bad_deg = WeightedGraph::from_adjacency_unchecked(
            vec![vec![(1, 1.0)], vec![(0, 1.0)]],
            Some(vec![1.0, 3.0]),
        );
        assert_eq!(bad_deg.validate(), vec![Violation::DegreeMismatch(1)]);
        let looped = WeightedGraph::from_adjacency_unchecked(vec![vec![(0, 1.0)]], None);
        assert_eq!(looped.validate(), vec![Violation::SelfLoop(0)]);
    }

    #[test]
    fn neighbor_pick_follows_prefix() {
        let g = WeightedGraph::from_edge_list(&[(0, 1, 1.0), (0, 2, 3.0)]).unwrap();
        assert_eq!(g.pick_neighbor(0, 0.0), Some(1));
        assert_eq!(g.pick_neighbor(0, 0.2499), Some(1));
        assert_eq!(g.pick_neighbor(0, 0.25), Some(2));
        assert_eq!(g.pick_neighbor(0, 0.999_999), Some(2));
        assert_eq!(WeightedGraph::edgeless(1).pick_neighbor(0, 0.5), None);
    }

    #[test]
    fn components() {
        let g = WeightedGraph::with_nodes(5, &[(0, 1, 1.0), (2, 3, 1.0)]).unwrap();
        assert_eq!(g.component_count(), 3);
    }

    fn small_graph() -> impl Strategy<Value = WeightedGraph> {
        (2usize..50).prop_flat_map(|n| {
            proptest::collection::vec((0..n, 0..n, 0.1f64..5.0), 0..(3 * n)).prop_map(move |rows| {
                let mut seen = std::collections::HashSet::new();
                let rows: Vec<_> = rows
                    .into_iter()
                    .filter(|&(i, j, _)| i != j && seen.insert((i.min(j), i.max(j))))
                    .collect();
                WeightedGraph::with_nodes(n, &rows).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn operator_is_symmetric_and_psd(g in small_graph(), seed in 0u64..1000) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let n = g.n();
            let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let y: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let lx = g.laplacian_apply(&x).unwrap();
            let ly = g.laplacian_apply(&y).unwrap();
            let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| p * q).sum::<f64>();
            let (a, b) = (dot(&x, &ly), dot(&y, &lx));
            prop_assert!((a - b).abs() <= 1e-10 * (a.abs().max(b.abs()).max(1.0)));

            let quad = dot(&x, &lx);
            let by_edges: f64 = g.edges().map(|(i, j, w)| w * (x[i] - x[j]).powi(2)).sum();
            prop_assert!(quad >= -1e-12);
            prop_assert!((quad - by_edges).abs() <= 1e-10 * by_edges.max(1.0));

            let dense = g.dense_laplacian() * nalgebra::DVector::from_vec(x.clone());
            for i in 0..n {
                let scale = g.degree(i) * x[i].abs() + g.neighbors(i).map(|(j, w)| w * x[j].abs()).sum::<f64>();
                prop_assert!((dense[i] - lx[i]).abs() <= 1e-12 * scale.max(1e-300));
            }
            prop_assert!(g.validate().is_empty());
        }
    }
}
