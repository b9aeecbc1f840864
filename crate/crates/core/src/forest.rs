//! Random spanning forests via interrupted loop-erased random walks.
//!
//! The graph is augmented with an absorbing node Δ joined to every node by an
//! edge of weight `q`. Walks start from every node not yet in the forest, in
//! ascending id order, and stop when they are absorbed into Δ or hit the
//! forest. At node `i` the walk is absorbed with probability `q / (q + d_i)`;
//! otherwise it moves to neighbor `j` with probability `A_ij / d_i`. The node
//! a walk is absorbed from becomes a root. The expected number of roots is
//! `Σ q / (q + λ_i)` over the Laplacian spectrum.
//!
//! Loops are erased implicitly: each node keeps a successor pointer that is
//! overwritten on every exit, and the branch added to the forest is the chain
//! of last exits from the start node.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{check_q, Result};
use crate::estimate::{check_replicates, EstimatorResult, Method};
use crate::graph::WeightedGraph;
use crate::rng::{StreamFamily, SubstreamId};

/// Root set of one sampled forest.
#[derive(Debug, Clone, PartialEq)]
pub struct ForestSample {
    /// Roots in ascending id order.
    pub roots: Vec<usize>,
    /// Walk transitions taken, absorptions included.
    pub steps: u64,
    pub q: f64,
    pub stream: SubstreamId,
}

/// Reusable per-thread buffers for repeated sampling on one graph.
pub struct ForestSampler<'g> {
    graph: &'g WeightedGraph,
    in_forest: Vec<bool>,
    next: Vec<usize>,
    roots: Vec<usize>,
}

impl<'g> ForestSampler<'g> {
    pub fn new(graph: &'g WeightedGraph) -> Self {
        let n = graph.n();
        Self {
            graph,
            in_forest: vec![false; n],
            next: vec![usize::MAX; n],
            roots: Vec::new(),
        }
    }

    /// Samples one forest and returns `(root count, steps)`.
    ///
    /// The roots stay available through [`ForestSampler::roots`] until the
    /// next call. `q` must be positive; this is not rechecked here.
    pub fn sample<R: Rng + ?Sized>(&mut self, q: f64, rng: &mut R) -> (usize, u64) {
        let g = self.graph;
        let n = g.n();
        self.in_forest.iter_mut().for_each(|f| *f = false);
        self.roots.clear();
        let mut steps = 0u64;

        for start in 0..n {
            if self.in_forest[start] {
                continue;
            }
            let mut u = start;
            loop {
                steps += 1;
                let d = g.degree(u);
                if rng.random::<f64>() < q / (q + d) {
                    self.in_forest[u] = true;
                    self.roots.push(u);
                    break;
                }
                let v = g
                    .pick_neighbor(u, rng.random::<f64>())
                    .expect("node with positive degree has a neighbor");
                self.next[u] = v;
                if self.in_forest[v] {
                    break;
                }
                u = v;
            }
            let mut u = start;
            while !self.in_forest[u] {
                self.in_forest[u] = true;
                u = self.next[u];
            }
        }
        (self.roots.len(), steps)
    }

    pub fn roots(&self) -> &[usize] {
        &self.roots
    }
}

/// Samples one forest from the given substream.
pub fn sample_forest(g: &WeightedGraph, q: f64, stream: SubstreamId) -> Result<ForestSample> {
    check_q(q)?;
    let mut sampler = ForestSampler::new(g);
    let mut rng = stream.rng();
    let (_, steps) = sampler.sample(q, &mut rng);
    let mut roots = sampler.roots().to_vec();
    roots.sort_unstable();
    Ok(ForestSample {
        roots,
        steps,
        q,
        stream,
    })
}

/// Mean root count over `k` independent forests.
///
/// Replicate `l` uses substream `(master_seed, Forest, l)`; the result does not
/// depend on thread count or scheduling.
pub fn estimate_rf(
    g: &WeightedGraph,
    q: f64,
    k: usize,
    master_seed: u64,
) -> Result<EstimatorResult> {
    estimate_rf_in_family(g, q, k, master_seed, StreamFamily::Forest)
}

pub(crate) fn estimate_rf_in_family(
    g: &WeightedGraph,
    q: f64,
    k: usize,
    master_seed: u64,
    family: StreamFamily,
) -> Result<EstimatorResult> {
    check_q(q)?;
    check_replicates(k)?;
    let draws: Vec<(usize, u64)> = (0..k as u64)
        .into_par_iter()
        .map_init(
            || ForestSampler::new(g),
            |sampler, l| {
                let mut rng = SubstreamId::new(master_seed, family, l).rng();
                sampler.sample(q, &mut rng)
            },
        )
        .collect();
    let counts: Vec<f64> = draws.iter().map(|&(c, _)| c as f64).collect();
    let steps = draws.iter().map(|&(_, s)| s).sum();
    Ok(EstimatorResult::from_samples(
        &counts,
        Method::Forest,
        q,
        steps,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::gen::gen_ring;

    fn k2() -> WeightedGraph {
        WeightedGraph::from_edge_list(&[(0, 1, 1.0)]).unwrap()
    }

    /// Exact distribution of the root count by enumerating every rooted
    /// spanning forest: each node points at a neighbor or at Δ, acyclic
    /// configurations only, weighted by Π A_ij · q^{roots}.
    fn root_count_distribution(g: &WeightedGraph, q: f64) -> Vec<f64> {
        let n = g.n();
        let choices: Vec<Vec<(Option<usize>, f64)>> = (0..n)
            .map(|i| {
                std::iter::once((None, q))
                    .chain(g.neighbors(i).map(|(j, w)| (Some(j), w)))
                    .collect()
            })
            .collect();
        let mut dist = vec![0.0; n + 1];
        let mut idx = vec![0usize; n];
        loop {
            let parent: Vec<Option<usize>> = (0..n).map(|i| choices[i][idx[i]].0).collect();
            let acyclic = (0..n).all(|s| {
                let mut u = s;
                for _ in 0..=n {
                    match parent[u] {
                        None => return true,
                        Some(p) => u = p,
                    }
                }
                false
            });
            if acyclic {
                let w: f64 = (0..n).map(|i| choices[i][idx[i]].1).product();
                dist[parent.iter().filter(|p| p.is_none()).count()] += w;
            }
            let mut pos = 0;
            loop {
                if pos == n {
                    let total: f64 = dist.iter().sum();
                    return dist.into_iter().map(|d| d / total).collect();
                }
                idx[pos] += 1;
                if idx[pos] < choices[pos].len() {
                    break;
                }
                idx[pos] = 0;
                pos += 1;
            }
        }
    }

    #[test]
    fn edgeless_graph_roots_everything() {
        let g = WeightedGraph::edgeless(6);
        let s = sample_forest(&g, 0.3, SubstreamId::new(1, StreamFamily::Forest, 0)).unwrap();
        assert_eq!(s.roots, (0..6).collect::<Vec<_>>());
        assert_eq!(s.steps, 6);
        let r = estimate_rf(&WeightedGraph::edgeless(7), 0.5, 3, 9).unwrap();
        assert_eq!(r.mean, 7.0);
        assert_eq!(r.sample_variance, 0.0);
    }

    #[test]
    fn single_node() {
        let s = sample_forest(
            &WeightedGraph::edgeless(1),
            2.0,
            SubstreamId::new(0, StreamFamily::Forest, 0),
        )
        .unwrap();
        assert_eq!(s.roots, vec![0]);
    }

    #[test]
    fn rejects_bad_arguments() {
        let g = k2();
        assert_eq!(estimate_rf(&g, 0.0, 10, 1), Err(Error::NonPositiveQ(0.0)));
        assert_eq!(estimate_rf(&g, -1.0, 10, 1), Err(Error::NonPositiveQ(-1.0)));
        assert_eq!(estimate_rf(&g, 1.0, 0, 1), Err(Error::ZeroReplicates));
    }

    #[test]
    fn sample_invariants() {
        let g = gen_ring(30).unwrap();
        for l in 0..50 {
            let s = sample_forest(&g, 0.2, SubstreamId::new(3, StreamFamily::Forest, l)).unwrap();
            assert!(!s.roots.is_empty() && s.roots.len() <= 30);
            assert!(s.steps >= s.roots.len() as u64);
            assert!(s.roots.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn enumeration_oracle_matches_k2_closed_form() {
        let dist = root_count_distribution(&k2(), 1.0);
        assert!((dist[1] - 2.0 / 3.0).abs() < 1e-12);
        assert!((dist[2] - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn k2_mean_and_variance() {
        let r = estimate_rf(&k2(), 1.0, 20_000, 11).unwrap();
        assert!((r.mean - 4.0 / 3.0).abs() <= 4.0 * r.stderr);
        assert!((r.sample_variance / (2.0 / 9.0) - 1.0).abs() <= 0.15);
    }

    #[test]
    fn root_count_law_matches_enumeration() {
        // Weighted path plus a pendant, small enough to enumerate.
        let g =
            WeightedGraph::from_edge_list(&[(0, 1, 1.5), (1, 2, 0.5), (2, 3, 2.0), (1, 3, 1.0)])
                .unwrap();
        let q = 0.7;
        let dist = root_count_distribution(&g, q);
        let k = 40_000;
        let mut sampler = ForestSampler::new(&g);
        let mut hist = vec![0usize; g.n() + 1];
        for l in 0..k {
            let mut rng = SubstreamId::new(5, StreamFamily::Forest, l).rng();
            hist[sampler.sample(q, &mut rng).0] += 1;
        }
        for (c, &p) in dist.iter().enumerate() {
            let expected = p * k as f64;
            let sd = (k as f64 * p * (1.0 - p)).sqrt();
            assert!(
                (hist[c] as f64 - expected).abs() <= 5.0 * sd + 1e-9,
                "count {c}: observed {} expected {expected}",
                hist[c]
            );
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let g = gen_ring(40).unwrap();
        let a = estimate_rf(&g, 0.5, 500, 42).unwrap();
        let b = estimate_rf(&g, 0.5, 500, 42).unwrap();
        assert_eq!(a, b);
        let c = estimate_rf(&g, 0.5, 500, 43).unwrap();
        assert_ne!(a.mean, c.mean);
    }
}
