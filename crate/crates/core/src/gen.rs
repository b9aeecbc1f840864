//! Seedable generators for the benchmark graph families.

use std::collections::HashSet;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;

/// Neighbor count used for point-cloud graphs unless overridden.
pub const DEFAULT_KNN_K: usize = 8;
/// Gaussian offset scale for heart-surface samples unless overridden.
pub const DEFAULT_NOISE_SIGMA: f64 = 0.01;
/// Attachment count giving average degree ≈ 30.
pub const DEFAULT_BA_M: usize = 15;

/// A generator family with its size parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum GenSpec {
    Ring {
        n: usize,
    },
    Grid2d {
        rows: usize,
        cols: usize,
    },
    Grid3d {
        a: usize,
        b: usize,
        c: usize,
    },
    BarabasiAlbert {
        n: usize,
        m: usize,
        seed: u64,
    },
    KnnCloud {
        n: usize,
        k: usize,
        noise_sigma: f64,
        seed: u64,
    },
}

impl GenSpec {
    pub fn generate(&self) -> Result<WeightedGraph> {
        match *self {
            GenSpec::Ring { n } => gen_ring(n),
            GenSpec::Grid2d { rows, cols } => gen_grid2d(rows, cols),
            GenSpec::Grid3d { a, b, c } => gen_grid3d(a, b, c),
            GenSpec::BarabasiAlbert { n, m, seed } => gen_barabasi_albert(n, m, seed),
            GenSpec::KnnCloud {
                n,
                k,
                noise_sigma,
                seed,
            } => gen_knn_cloud(&sample_heart_surface(n, noise_sigma, seed), k),
        }
    }
}

impl fmt::Display for GenSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GenSpec::Ring { n } => write!(f, "ring:{n}"),
            GenSpec::Grid2d { rows, cols } => write!(f, "grid2d:{rows}x{cols}"),
            GenSpec::Grid3d { a, b, c } => write!(f, "grid3d:{a}x{b}x{c}"),
            GenSpec::BarabasiAlbert { n, m, seed } => write!(f, "ba:{n}:{m}:{seed}"),
            GenSpec::KnnCloud {
                n,
                k,
                noise_sigma,
                seed,
            } => write!(f, "heart:{n}:{k}:{noise_sigma}:{seed}"),
        }
    }
}

/// Parses the compact form written by `Display`, e.g. `ring:200`,
/// `grid2d:50x50`, `grid3d:30x30x30`, `ba:3000:15:7`, `heart:4096:8:0.01:7`.
/// Trailing fields of `ba` and `heart` may be omitted.
impl FromStr for GenSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::BadParameters(format!("cannot parse graph spec '{s}'"));
        let mut parts = s.trim().split(':');
        let family = parts.next().ok_or_else(bad)?;
        let rest: Vec<&str> = parts.collect();
        let num = |i: usize| -> Result<usize> {
            rest.get(i)
                .ok_or_else(bad)?
                .trim()
                .parse()
                .map_err(|_| bad())
        };
        let dims = |field: &str| -> Result<Vec<usize>> {
            field
                .split(['x', 'X', ','])
                .map(|d| d.trim().parse().map_err(|_| bad()))
                .collect()
        };
        match family {
            "ring" | "circle" => Ok(GenSpec::Ring { n: num(0)? }),
            "grid2d" | "grid_2d" => match dims(rest.first().ok_or_else(bad)?)?.as_slice() {
                &[rows, cols] => Ok(GenSpec::Grid2d { rows, cols }),
                _ => Err(bad()),
            },
            "grid3d" | "grid_3d" => match dims(rest.first().ok_or_else(bad)?)?.as_slice() {
                &[a, b, c] => Ok(GenSpec::Grid3d { a, b, c }),
                _ => Err(bad()),
            },
            "ba" | "barabasi_albert" => Ok(GenSpec::BarabasiAlbert {
                n: num(0)?,
                m: if rest.len() > 1 {
                    num(1)?
                } else {
                    DEFAULT_BA_M
                },
                seed: if rest.len() > 2 { num(2)? as u64 } else { 0 },
            }),
            "heart" | "knn" | "knn_cloud" | "noisy_heart" => Ok(GenSpec::KnnCloud {
                n: num(0)?,
                k: if rest.len() > 1 {
                    num(1)?
                } else {
                    DEFAULT_KNN_K
                },
                noise_sigma: match rest.get(2) {
                    Some(v) => v.trim().parse().map_err(|_| bad())?,
                    None => DEFAULT_NOISE_SIGMA,
                },
                seed: if rest.len() > 3 { num(3)? as u64 } else { 0 },
            }),
            _ => Err(bad()),
        }
    }
}

fn unit_graph(n: usize, edges: Vec<(usize, usize)>) -> WeightedGraph {
    let rows: Vec<_> = edges.into_iter().map(|(i, j)| (i, j, 1.0)).collect();
    WeightedGraph::with_nodes(n, &rows).expect("generated edges are valid")
}

/// Cycle on `n ≥ 3` nodes with unit weights.
pub fn gen_ring(n: usize) -> Result<WeightedGraph> {
    if n < 3 {
        return Err(Error::SizeTooSmall(format!("ring needs n >= 3, got {n}")));
    }
    Ok(unit_graph(n, (0..n).map(|i| (i, (i + 1) % n)).collect()))
}

/// Non-periodic `rows × cols` lattice, node `r * cols + c`.
pub fn gen_grid2d(rows: usize, cols: usize) -> Result<WeightedGraph> {
    if rows < 2 || cols < 2 {
        return Err(Error::SizeTooSmall(format!(
            "grid needs dims >= 2, got {rows}x{cols}"
        )));
    }
    let id = |r: usize, c: usize| r * cols + c;
    let mut edges = Vec::with_capacity(2 * rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            if c + 1 < cols {
                edges.push((id(r, c), id(r, c + 1)));
            }
            if r + 1 < rows {
                edges.push((id(r, c), id(r + 1, c)));
            }
        }
    }
    Ok(unit_graph(rows * cols, edges))
}

/// Non-periodic `a × b × c` lattice with 6-neighbor connectivity.
pub fn gen_grid3d(a: usize, b: usize, c: usize) -> Result<WeightedGraph> {
    if a < 2 || b < 2 || c < 2 {
        return Err(Error::SizeTooSmall(format!(
            "grid needs dims >= 2, got {a}x{b}x{c}"
        )));
    }
    let id = |x: usize, y: usize, z: usize| (x * b + y) * c + z;
    let mut edges = Vec::with_capacity(3 * a * b * c);
    for x in 0..a {
        for y in 0..b {
            for z in 0..c {
                if x + 1 < a {
                    edges.push((id(x, y, z), id(x + 1, y, z)));
                }
                if y + 1 < b {
                    edges.push((id(x, y, z), id(x, y + 1, z)));
                }
                if z + 1 < c {
                    edges.push((id(x, y, z), id(x, y, z + 1)));
                }
            }
        }
    }
    Ok(unit_graph(a * b * c, edges))
}

/// Preferential attachment: a clique on `m + 1` nodes, then each new node
/// links to `m` distinct existing nodes drawn proportionally to degree.
/// Average degree is close to `2m`.
pub fn gen_barabasi_albert(n: usize, m: usize, seed: u64) -> Result<WeightedGraph> {
    if m < 1 || m >= n {
        return Err(Error::BadParameters(format!(
            "need 1 <= m < n, got m = {m}, n = {n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::with_capacity(m * (m + 1) / 2 + m * (n - m - 1));
    // Each edge contributes both endpoints, so uniform draws from this list
    // are degree-proportional.
    let mut endpoints: Vec<usize> = Vec::with_capacity(2 * edges.capacity());
    for i in 0..=m {
        for j in (i + 1)..=m {
            edges.push((i, j));
            endpoints.extend([i, j]);
        }
    }
    let mut chosen: Vec<usize> = Vec::with_capacity(m);
    let mut chosen_set: HashSet<usize> = HashSet::with_capacity(m);
    for v in (m + 1)..n {
        chosen.clear();
        chosen_set.clear();
        while chosen.len() < m {
            let t = endpoints[rng.random_range(0..endpoints.len())];
            if chosen_set.insert(t) {
                chosen.push(t);
            }
        }
        for &t in &chosen {
            edges.push((t, v));
            endpoints.extend([t, v]);
        }
    }
    Ok(unit_graph(n, edges))
}

/// Union-symmetrized k-nearest-neighbor graph with unit weights.
///
/// Distance ties are broken toward the lower index.
pub fn gen_knn_cloud(points: &[[f64; 3]], k: usize) -> Result<WeightedGraph> {
    let n = points.len();
    if k == 0 || k >= n {
        return Err(Error::BadK { k, n });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        points[a]
            .partial_cmp(&points[b])
            .expect("finite coordinates")
            .then(a.cmp(&b))
    });
    for w in order.windows(2) {
        if points[w[0]] == points[w[1]] {
            return Err(Error::DuplicatePoints(w[0].min(w[1]), w[0].max(w[1])));
        }
    }
    let dist2 = |a: &[f64; 3], b: &[f64; 3]| (0..3).map(|d| (a[d] - b[d]).powi(2)).sum::<f64>();
    let mut edges = HashSet::new();
    let mut cand: Vec<(f64, usize)> = Vec::with_capacity(n);
    for i in 0..n {
        cand.clear();
        cand.extend(
            (0..n)
                .filter(|&j| j != i)
                .map(|j| (dist2(&points[i], &points[j]), j)),
        );
        cand.select_nth_unstable_by(k - 1, |a, b| a.partial_cmp(b).expect("finite distances"));
        for &(_, j) in &cand[..k] {
            edges.insert((i.min(j), i.max(j)));
        }
    }
    let mut edges: Vec<_> = edges.into_iter().collect();
    edges.sort_unstable();
    Ok(unit_graph(n, edges))
}

/// Point on the heart-shaped surface for `θ ∈ [0, π]`, `φ ∈ [0, 2π]`:
/// `x = sin θ cos φ`, `y = sin θ sin φ (1 + e^{-θ/10})`, `z = cos θ (0.1 + θ)`.
pub fn heart_point(theta: f64, phi: f64) -> [f64; 3] {
    [
        theta.sin() * phi.cos(),
        theta.sin() * phi.sin() * (1.0 + (-0.1 * theta).exp()),
        theta.cos() * (0.1 + theta),
    ]
}

/// `n` points with `(θ, φ)` uniform on `[0, π] × [0, 2π]`, each shifted by an
/// isotropic Gaussian offset of scale `noise_sigma`.
pub fn sample_heart_surface(n: usize, noise_sigma: f64, seed: u64) -> Vec<[f64; 3]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let theta = rng.random::<f64>() * PI;
            let phi = rng.random::<f64>() * 2.0 * PI;
            let mut p = heart_point(theta, phi);
            if noise_sigma > 0.0 {
                for c in &mut p {
                    *c += noise_sigma * rng.sample::<f64, _>(StandardNormal);
                }
            }
            p
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ring_shapes() {
        let g = gen_ring(4).unwrap();
        assert_eq!(
            g.edges().map(|(i, j, _)| (i, j)).collect::<Vec<_>>(),
            vec![(0, 1), (0, 3), (1, 2), (2, 3)]
        );
        assert!(g.degrees().iter().all(|&d| d == 2.0));
        assert_eq!(gen_ring(3).unwrap().num_edges(), 3);
        let big = gen_ring(27_000).unwrap();
        assert_eq!((big.n(), big.num_edges()), (27_000, 27_000));
        assert!(matches!(gen_ring(2), Err(Error::SizeTooSmall(_))));
    }

    #[test]
    fn grid_shapes() {
        let g = gen_grid2d(2, 2).unwrap();
        assert_eq!((g.n(), g.num_edges()), (4, 4));
        assert!(g.degrees().iter().all(|&d| d == 2.0));
        let g = gen_grid2d(164, 164).unwrap();
        assert_eq!(g.n(), 26_896);
        assert_eq!(g.num_edges(), 2 * 164 * 163);
        let g = gen_grid2d(3, 5).unwrap();
        assert_eq!(g.num_edges(), 3 * 4 + 5 * 2);
        let g = gen_grid3d(30, 30, 30).unwrap();
        assert_eq!(g.n(), 27_000);
        assert_eq!(g.num_edges(), 3 * 30 * 30 * 29);
        assert!(g.validate().is_empty());
        assert!(gen_grid2d(1, 4).is_err());
        assert!(gen_grid3d(2, 2, 1).is_err());
    }

    #[test]
    fn barabasi_albert_counts() {
        let k5 = gen_barabasi_albert(5, 4, 1).unwrap();
        assert_eq!(k5.num_edges(), 10);
        for (n, m) in [(50, 3), (200, 1), (300, 7)] {
            let g = gen_barabasi_albert(n, m, 9).unwrap();
            assert_eq!(g.num_edges(), m * (m + 1) / 2 + m * (n - m - 1));
            assert!(g.validate().is_empty());
            assert_eq!(g.component_count(), 1);
        }
        let g = gen_barabasi_albert(3000, DEFAULT_BA_M, 3).unwrap();
        let avg = g.total_weight() / g.n() as f64;
        assert!((avg - 30.0).abs() < 0.5, "average degree {avg}");
        assert_eq!(
            gen_barabasi_albert(100, 4, 77).unwrap(),
            gen_barabasi_albert(100, 4, 77).unwrap()
        );
        assert!(gen_barabasi_albert(4, 4, 0).is_err());
        assert!(gen_barabasi_albert(4, 0, 0).is_err());
    }

    #[test]
    fn knn_small_cases() {
        let line = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [2.5, 0.0, 0.0]];
        let g = gen_knn_cloud(&line, 1).unwrap();
        assert_eq!(
            g.edges().map(|(i, j, _)| (i, j)).collect::<Vec<_>>(),
            vec![(0, 1), (1, 2)]
        );
        let pts = sample_heart_surface(9, 0.05, 4);
        assert_eq!(gen_knn_cloud(&pts, 8).unwrap().num_edges(), 36);
        assert_eq!(gen_knn_cloud(&line, 3), Err(Error::BadK { k: 3, n: 3 }));
        let dup = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]];
        assert_eq!(gen_knn_cloud(&dup, 1), Err(Error::DuplicatePoints(0, 2)));
    }

    #[test]
    fn knn_tie_prefers_lower_index() {
        // Node 1 is equidistant from 0 and 2.
        let pts = [
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [2.0, 0.0, 0.0],
            [10.0, 0.0, 0.0],
        ];
        let g = gen_knn_cloud(&pts, 1).unwrap();
        let e: Vec<_> = g.edges().map(|(i, j, _)| (i, j)).collect();
        assert_eq!(e, vec![(0, 1), (1, 2), (2, 3)]);
    }

    #[test]
    fn heart_samples_lie_on_surface() {
        let pts = sample_heart_surface(500, 0.0, 12);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for p in &pts {
            let theta = rng.random::<f64>() * PI;
            let phi = rng.random::<f64>() * 2.0 * PI;
            assert!((0.0..=PI).contains(&theta) && (0.0..=2.0 * PI).contains(&phi));
            assert!((p[0] - theta.sin() * phi.cos()).abs() <= 1e-12);
            assert!((p[1] / (1.0 + (-0.1 * theta).exp()) - theta.sin() * phi.sin()).abs() <= 1e-12);
            assert!((p[2] - theta.cos() * (0.1 + theta)).abs() <= 1e-12);
        }
        // Noise draws follow each point's (θ, φ), so the first point shares its parameters.
        let noisy = sample_heart_surface(1, 0.01, 12);
        let shift: f64 = (0..3)
            .map(|d| (noisy[0][d] - pts[0][d]).powi(2))
            .sum::<f64>()
            .sqrt();
        assert!(shift > 0.0 && shift < 0.1);
    }

    #[test]
    fn full_size_heart_graph_is_connected() {
        let g = GenSpec::KnnCloud {
            n: 4096,
            k: DEFAULT_KNN_K,
            noise_sigma: DEFAULT_NOISE_SIGMA,
            seed: 1,
        }
        .generate()
        .unwrap();
        assert!(g.validate().is_empty());
        assert_eq!(g.component_count(), 1);
    }

    #[test]
    fn spec_strings_round_trip() {
        for s in [
            "ring:200",
            "grid2d:50x50",
            "grid3d:3x4x5",
            "ba:3000:15:7",
            "heart:4096:8:0.01:7",
        ] {
            let spec: GenSpec = s.parse().unwrap();
            assert_eq!(spec.to_string(), s);
        }
        assert!("ring".parse::<GenSpec>().is_err());
        assert!("torus:5".parse::<GenSpec>().is_err());
    }
}
