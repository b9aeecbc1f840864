//! Dense ground truth: eigenvalues, exact `s(q)` and the single-replicate
//! variances of both estimators.

use nalgebra::DMatrix;

use crate::error::{check_q, Error, Result};
use crate::operator::SymmetricOperator;

/// Largest dimension accepted by the dense routines.
pub const DENSE_LIMIT: usize = 2000;

/// Sorted eigenvalues of a symmetric matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSummary {
    pub eigenvalues: Vec<f64>,
}

impl SpectralSummary {
    pub fn from_eigenvalues(mut eigenvalues: Vec<f64>) -> Self {
        eigenvalues.sort_by(f64::total_cmp);
        Self { eigenvalues }
    }

    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Number of eigenvalues below `tol`.
    pub fn count_below(&self, tol: f64) -> usize {
        self.eigenvalues.iter().filter(|&&l| l < tol).count()
    }

    pub fn exact_s(&self, q: f64) -> Result<f64> {
        exact_s(self, q)
    }
}

/// Eigenvalues of a dense symmetric matrix.
pub fn eig_sym_dense(m: &DMatrix<f64>) -> Result<SpectralSummary> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: m.ncols(),
        });
    }
    if n > DENSE_LIMIT {
        return Err(Error::TooLarge {
            n,
            limit: DENSE_LIMIT,
        });
    }
    let scale = m.amax();
    for i in 0..n {
        for j in (i + 1)..n {
            if (m[(i, j)] - m[(j, i)]).abs() > 1e-12 * scale {
                return Err(Error::NotSymmetric { i, j });
            }
        }
    }
    if n == 0 {
        return Ok(SpectralSummary::from_eigenvalues(Vec::new()));
    }
    let sym = (m + m.transpose()) * 0.5;
    Ok(SpectralSummary::from_eigenvalues(
        sym.symmetric_eigenvalues().iter().copied().collect(),
    ))
}

/// Spectrum of a positive semidefinite operator small enough to densify.
/// Round-off negatives are clamped to zero.
pub fn spectrum<O: SymmetricOperator + ?Sized>(op: &O) -> Result<SpectralSummary> {
    let n = op.dim();
    if n > DENSE_LIMIT {
        return Err(Error::TooLarge {
            n,
            limit: DENSE_LIMIT,
        });
    }
    let mut spec = eig_sym_dense(&op.to_dense())?;
    for l in &mut spec.eigenvalues {
        *l = l.max(0.0);
    }
    Ok(spec)
}

/// `Σ q / (λ_i + q)`.
pub fn exact_s(spec: &SpectralSummary, q: f64) -> Result<f64> {
    check_q(q)?;
    Ok(spec.eigenvalues.iter().map(|&l| q / (l + q)).sum())
}

/// Single-forest root count variance, `q Σ λ_i / (q + λ_i)²`.
pub fn var_wilson(spec: &SpectralSummary, q: f64) -> Result<f64> {
    check_q(q)?;
    Ok(q * spec
        .eigenvalues
        .iter()
        .map(|&l| l / (q + l).powi(2))
        .sum::<f64>())
}

/// Single Gaussian-probe variance, `Σ 2q² / (q + λ_i)²`.
pub fn var_girard(spec: &SpectralSummary, q: f64) -> Result<f64> {
    check_q(q)?;
    Ok(spec
        .eigenvalues
        .iter()
        .map(|&l| 2.0 * q * q / (q + l).powi(2))
        .sum())
}
