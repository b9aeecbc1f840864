//! Symmetric diagonally dominant matrices reduced to a pair of Laplacians.
//!
//! Write `G = D1 + D2 + Ap + An` with `Ap`/`An` the positive/negative
//! off-diagonal parts, `D1(i,i) = Σ_{j≠i} |G_ij|` and `D2 = diag(G) − D1 ≥ 0`.
//! Then `L1 = D1 + An − Ap` is the Laplacian of an `n`-node graph and
//!
//! ```text
//! L2 = [ D1 + D2/2 + An    −D2/2 − Ap     ]
//!      [ −D2/2 − Ap        D1 + D2/2 + An ]
//! ```
//!
//! the Laplacian of a `2n`-node graph, with `λ(L2) = λ(L1) ∪ λ(G)`. Hence
//! `s_G(q) = s_L2(q) − s_L1(q)`, and both terms have forest estimators.

use nalgebra::DMatrix;

use crate::error::{check_q, Error, Result};
use crate::estimate::{check_replicates, EstimatorResult, Method};
use crate::forest::estimate_rf_in_family;
use crate::graph::WeightedGraph;
use crate::operator::SymmetricOperator;
use crate::rng::StreamFamily;

/// Sparse symmetric matrix with `G_ii ≥ Σ_{j≠i} |G_ij|`.
#[derive(Debug, Clone, PartialEq)]
pub struct SddMatrix {
    diag: Vec<f64>,
    /// Off-diagonal nonzeros per row, ascending by column.
    rows: Vec<Vec<(usize, f64)>>,
}

impl SddMatrix {
    /// Builds from `(i, j, value)` entries, each setting both `G_ij` and `G_ji`.
    ///
    /// An entry listed as both `(i, j)` and `(j, i)` must carry the same value.
    /// Explicit zeros are dropped.
    pub fn from_entries(n: usize, entries: &[(usize, usize, f64)]) -> Result<Self> {
        let mut diag = vec![0.0; n];
        let mut seen_diag = vec![false; n];
        let mut off = std::collections::BTreeMap::new();
        for &(i, j, v) in entries {
            if i >= n || j >= n {
                return Err(Error::NodeOutOfRange { node: i.max(j), n });
            }
            if !v.is_finite() {
                return Err(Error::FormatViolation(format!(
                    "non-finite entry at ({i}, {j})"
                )));
            }
            if i == j {
                if seen_diag[i] && diag[i] != v {
                    return Err(Error::NotSymmetric { i, j });
                }
                seen_diag[i] = true;
                diag[i] = v;
                continue;
            }
            let key = (i.min(j), i.max(j));
            if let Some(&prev) = off.get(&key) {
                if prev != v {
                    return Err(Error::NotSymmetric { i: key.0, j: key.1 });
                }
            }
            off.insert(key, v);
        }
        let mut rows = vec![Vec::new(); n];
        for (&(i, j), &v) in &off {
            if v != 0.0 {
                rows[i].push((j, v));
                rows[j].push((i, v));
            }
        }
        let m = Self { diag, rows };
        m.check_dominance()?;
        Ok(m)
    }

    /// Builds from a dense matrix, which must be exactly symmetric.
    pub fn from_dense(m: &DMatrix<f64>) -> Result<Self> {
        let n = m.nrows();
        if m.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: m.ncols(),
            });
        }
        let mut entries = Vec::new();
        for i in 0..n {
            for j in i..n {
                if m[(i, j)] != m[(j, i)] {
                    return Err(Error::NotSymmetric { i, j });
                }
                if i == j || m[(i, j)] != 0.0 {
                    entries.push((i, j, m[(i, j)]));
                }
            }
        }
        Self::from_entries(n, &entries)
    }

    /// The Laplacian of `g` as an SDD matrix.
    pub fn from_laplacian(g: &WeightedGraph) -> Self {
        let mut entries: Vec<_> = (0..g.n()).map(|i| (i, i, g.degree(i))).collect();
        entries.extend(g.edges().map(|(i, j, w)| (i, j, -w)));
        Self::from_entries(g.n(), &entries).expect("graph Laplacians are diagonally dominant")
    }

    fn check_dominance(&self) -> Result<()> {
        for (i, row) in self.rows.iter().enumerate() {
            let off: f64 = row.iter().map(|&(_, v)| v.abs()).sum();
            let tol = 1e-12 * off.max(self.diag[i].abs());
            if self.diag[i] < off - tol {
                return Err(Error::NotDiagonallyDominant(i));
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    /// Off-diagonal nonzeros of row `i`.
    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    /// Upper-triangle entries `(i, j, G_ij)` with `i ≤ j`, diagonal included.
    pub fn upper_entries(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for i in 0..self.n() {
            out.push((i, i, self.diag[i]));
            out.extend(
                self.rows[i]
                    .iter()
                    .filter(|&&(j, _)| j > i)
                    .map(|&(j, v)| (i, j, v)),
            );
        }
        out
    }
}

impl SymmetricOperator for SddMatrix {
    fn dim(&self) -> usize {
        self.n()
    }

    fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.diag[i] * x[i] + self.rows[i].iter().map(|&(j, v)| v * x[j]).sum::<f64>();
        }
    }

    fn diagonal(&self) -> Vec<f64> {
        self.diag.clone()
    }

    fn to_dense(&self) -> DMatrix<f64> {
        let n = self.n();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = self.diag[i];
            for &(j, v) in &self.rows[i] {
                m[(i, j)] = v;
            }
        }
        m
    }
}

/// `G = D1 + D2 + Ap + An`.
#[derive(Debug, Clone, PartialEq)]
pub struct SddDecomposition {
    pub d1: Vec<f64>,
    pub d2: Vec<f64>,
    /// Positive off-diagonal entries `(i, j, v)`, both orientations.
    pub ap: Vec<(usize, usize, f64)>,
    /// Negative off-diagonal entries `(i, j, v)`, both orientations.
    pub an: Vec<(usize, usize, f64)>,
}

impl SddDecomposition {
    pub fn n(&self) -> usize {
        self.d1.len()
    }

    /// Reassembles `D1 + D2 + Ap + An` densely.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.n();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = self.d1[i] + self.d2[i];
        }
        for &(i, j, v) in self.ap.iter().chain(&self.an) {
            m[(i, j)] += v;
        }
        m
    }
}

/// Splits an SDD matrix into its diagonal and signed off-diagonal parts.
pub fn dd_decompose(g: &SddMatrix) -> SddDecomposition {
    let n = g.n();
    let mut d1 = vec![0.0; n];
    let mut d2 = vec![0.0; n];
    let mut ap = Vec::new();
    let mut an = Vec::new();
    for i in 0..n {
        for &(j, v) in g.row(i) {
            d1[i] += v.abs();
            if v > 0.0 {
                ap.push((i, j, v));
            } else {
                an.push((i, j, v));
            }
        }
        // Weak dominance within rounding can leave a tiny negative remainder.
        d2[i] = (g.diag()[i] - d1[i]).max(0.0);
    }
    SddDecomposition { d1, d2, ap, an }
}

/// Builds the `n`-node graph of `L1` and the `2n`-node graph of `L2`.
pub fn build_laplacians(dec: &SddDecomposition) -> Result<(WeightedGraph, WeightedGraph)> {
    let n = dec.n();
    let mut l1 = Vec::new();
    let mut l2 = Vec::new();
    for &(i, j, v) in dec.ap.iter().filter(|e| e.0 < e.1) {
        l1.push((i, j, v));
        l2.push((i, j + n, v));
        l2.push((j, i + n, v));
    }
    for &(i, j, v) in dec.an.iter().filter(|e| e.0 < e.1) {
        l1.push((i, j, -v));
        l2.push((i, j, -v));
        l2.push((i + n, j + n, -v));
    }
    for (i, &d) in dec.d2.iter().enumerate() {
        if d > 0.0 {
            l2.push((i, i + n, d / 2.0));
        }
    }
    let g1 = WeightedGraph::with_nodes(n, &l1)?;
    let g2 = WeightedGraph::with_nodes(2 * n, &l2)?;
    let close =
        |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
    for i in 0..n {
        if !close(g1.degree(i), dec.d1[i]) {
            return Err(Error::InternalInconsistency(format!(
                "L1 degree {} at node {i} differs from D1 = {}",
                g1.degree(i),
                dec.d1[i]
            )));
        }
        let expected = dec.d1[i] + dec.d2[i] / 2.0;
        if !close(g2.degree(i), expected) || !close(g2.degree(i + n), expected) {
            return Err(Error::InternalInconsistency(format!(
                "L2 degree at node {i} differs from D1 + D2/2 = {expected}"
            )));
        }
    }
    Ok((g1, g2))
}

/// `s_G(q)` as the difference of forest estimates on `L2` and `L1`.
///
/// The two runs use separate substream families, so the replicates are
/// independent; the reported variance is the sum of both sample variances.
pub fn estimate_sdd(g: &SddMatrix, q: f64, k: usize, master_seed: u64) -> Result<EstimatorResult> {
    check_q(q)?;
    check_replicates(k)?;
    let (l1, l2) = build_laplacians(&dd_decompose(g))?;
    let big = estimate_rf_in_family(&l2, q, k, master_seed, StreamFamily::SddDoubled)?;
    let small = estimate_rf_in_family(&l1, q, k, master_seed, StreamFamily::SddSingle)?;
    let sample_variance = big.sample_variance + small.sample_variance;
    Ok(EstimatorResult {
        mean: big.mean - small.mean,
        sample_variance,
        k,
        stderr: (sample_variance / k as f64).sqrt(),
        method: Method::Forest,
        q,
        total_work: big.total_work + small.total_work,
    })
}

/// Random `n × n` SDD matrix with mixed-sign off-diagonals; for tests and demos.
pub fn random_sdd(n: usize, seed: u64) -> SddMatrix {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut entries = Vec::new();
    let mut d1 = vec![0.0; n];
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.random::<f64>() < 0.6 {
                let v: f64 = rng.random_range(-2.0..2.0);
                entries.push((i, j, v));
                d1[i] += v.abs();
                d1[j] += v.abs();
            }
        }
    }
    for (i, d) in d1.iter().enumerate() {
        // About a third of rows are only weakly dominant.
        let slack = if rng.random::<f64>() < 0.33 {
            0.0
        } else {
            rng.random_range(0.0..1.5)
        };
        entries.push((i, i, d + slack));
    }
    SddMatrix::from_entries(n, &entries).expect("constructed to be dominant")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{exact_s, spectrum};

    fn dense(rows: &[&[f64]]) -> DMatrix<f64> {
        let n = rows.len();
        DMatrix::from_row_slice(n, n, &rows.concat())
    }

    #[test]
    fn decomposition_examples() {
        let g = SddMatrix::from_dense(&dense(&[&[2.0]])).unwrap();
        let d = dd_decompose(&g);
        assert_eq!((d.d1.clone(), d.d2.clone()), (vec![0.0], vec![2.0]));
        assert!(d.ap.is_empty() && d.an.is_empty());

        let g = SddMatrix::from_dense(&dense(&[&[2.0, -1.0], &[-1.0, 2.0]])).unwrap();
        let d = dd_decompose(&g);
        assert_eq!(d.d1, vec![1.0, 1.0]);
        assert_eq!(d.d2, vec![1.0, 1.0]);
        assert!(d.ap.is_empty());
        assert_eq!(d.an, vec![(0, 1, -1.0), (1, 0, -1.0)]);

        let g = SddMatrix::from_dense(&dense(&[
            &[3.0, 1.0, -1.0],
            &[1.0, 2.0, 0.0],
            &[-1.0, 0.0, 2.0],
        ]))
        .unwrap();
        let d = dd_decompose(&g);
        assert_eq!(d.d1, vec![2.0, 1.0, 1.0]);
        assert_eq!(d.d2, vec![1.0, 1.0, 1.0]);
        assert_eq!(d.ap, vec![(0, 1, 1.0), (1, 0, 1.0)]);
        assert_eq!(d.an, vec![(0, 2, -1.0), (2, 0, -1.0)]);
        assert_eq!(d.to_dense(), g.to_dense());
    }

    #[test]
    fn rejects_invalid_matrices() {
        assert_eq!(
            SddMatrix::from_dense(&dense(&[&[2.0, 1.0], &[0.5, 2.0]])),
            Err(Error::NotSymmetric { i: 0, j: 1 })
        );
        assert_eq!(
            SddMatrix::from_dense(&dense(&[
                &[2.0, -1.0, 0.0],
                &[-1.0, 0.5, 0.0],
                &[0.0, 0.0, 1.0]
            ])),
            Err(Error::NotDiagonallyDominant(1))
        );
    }

    #[test]
    fn scalar_matrix_laplacians() {
        let g = SddMatrix::from_dense(&dense(&[&[2.0]])).unwrap();
        let (l1, l2) = build_laplacians(&dd_decompose(&g)).unwrap();
        assert_eq!(l1, WeightedGraph::edgeless(1));
        assert_eq!(l2.dense_laplacian(), dense(&[&[1.0, -1.0], &[-1.0, 1.0]]));
    }

    #[test]
    fn laplacian_input_gives_block_copies() {
        let g = WeightedGraph::from_edge_list(&[(0, 1, 1.0), (1, 2, 2.0), (0, 3, 0.5)]).unwrap();
        let (l1, l2) = build_laplacians(&dd_decompose(&SddMatrix::from_laplacian(&g))).unwrap();
        assert_eq!(l1, g);
        let n = g.n();
        let lap = g.dense_laplacian();
        let mut block = DMatrix::zeros(2 * n, 2 * n);
        block.view_mut((0, 0), (n, n)).copy_from(&lap);
        block.view_mut((n, n), (n, n)).copy_from(&lap);
        assert_eq!(l2.dense_laplacian(), block);
    }

    #[test]
    fn spectra_union_on_random_matrices() {
        for seed in 0..10 {
            let g = random_sdd(6, seed);
            let d = dd_decompose(&g);
            assert_eq!(d.to_dense(), g.to_dense());
            let (l1, l2) = build_laplacians(&d).unwrap();
            assert!(l1.validate().is_empty() && l2.validate().is_empty());
            let mut union = spectrum(&l1).unwrap().eigenvalues;
            union.extend(spectrum(&g).unwrap().eigenvalues);
            union.sort_by(f64::total_cmp);
            for (a, b) in spectrum(&l2).unwrap().eigenvalues.iter().zip(&union) {
                assert!((a - b).abs() <= 1e-8, "seed {seed}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn identity_matrix_estimate() {
        let g =
            SddMatrix::from_entries(10, &(0..10).map(|i| (i, i, 2.0)).collect::<Vec<_>>()).unwrap();
        let r = estimate_sdd(&g, 2.0, 20_000, 5).unwrap();
        assert!((r.mean - 5.0).abs() <= 4.0 * r.stderr.max(1e-12), "{r:?}");
    }

    #[test]
    fn laplacian_input_matches_graph_estimator_in_expectation() {
        let g = WeightedGraph::from_edge_list(&[(0, 1, 1.0)]).unwrap();
        let sdd = SddMatrix::from_laplacian(&g);
        let (l1, l2) = build_laplacians(&dd_decompose(&sdd)).unwrap();
        let direct = exact_s(&spectrum(&g).unwrap(), 1.0).unwrap();
        let via = exact_s(&spectrum(&l2).unwrap(), 1.0).unwrap()
            - exact_s(&spectrum(&l1).unwrap(), 1.0).unwrap();
        assert!((direct - via).abs() < 1e-12);
        let r = estimate_sdd(&sdd, 1.0, 20_000, 3).unwrap();
        assert!((r.mean - 4.0 / 3.0).abs() <= 4.0 * r.stderr);
    }
}
