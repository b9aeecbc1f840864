use nalgebra::DMatrix;

/// A real symmetric positive semidefinite matrix accessed through products.
///
/// Implemented by graph Laplacians and by SDD matrices so that the probe
/// estimator and the dense oracle can treat both alike.
pub trait SymmetricOperator: Sync {
    fn dim(&self) -> usize;

    /// Writes `M x` into `out`. Both slices have length `dim()`.
    fn apply_into(&self, x: &[f64], out: &mut [f64]);

    fn diagonal(&self) -> Vec<f64>;

    fn to_dense(&self) -> DMatrix<f64>;
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
