use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which estimator produced a result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Root count of random spanning forests.
    Forest,
    /// Gaussian probes with conjugate gradient solves.
    GirardCg,
    /// Gaussian probes with a dense factorization.
    GirardDirect,
    /// Dense eigendecomposition.
    Exact,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Forest => "forest",
            Method::GirardCg => "girard_cg",
            Method::GirardDirect => "girard_direct",
            Method::Exact => "exact",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "forest" | "rf" => Ok(Method::Forest),
            "girard_cg" | "cg" => Ok(Method::GirardCg),
            "girard_direct" | "girard_exact" | "direct" => Ok(Method::GirardDirect),
            "exact" => Ok(Method::Exact),
            _ => Err(Error::BadParameters(format!("unknown method '{s}'"))),
        }
    }
}

/// Monte Carlo summary of `k` replicates.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorResult {
    pub mean: f64,
    /// Unbiased sample variance of a single replicate (zero when `k = 1`).
    pub sample_variance: f64,
    pub k: usize,
    /// `sqrt(sample_variance / k)`.
    pub stderr: f64,
    pub method: Method,
    pub q: f64,
    /// Random-walk steps (forest) or solver iterations (probe methods), summed over replicates.
    pub total_work: u64,
}

impl EstimatorResult {
    /// Summarizes per-replicate values, aggregating in slice order.
    pub fn from_samples(values: &[f64], method: Method, q: f64, total_work: u64) -> Self {
        let k = values.len();
        let mean = values.iter().sum::<f64>() / k as f64;
        let sample_variance = if k > 1 {
            values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1) as f64
        } else {
            0.0
        };
        Self {
            mean,
            sample_variance,
            k,
            stderr: (sample_variance / k as f64).sqrt(),
            method,
            q,
            total_work,
        }
    }

    /// Work per replicate.
    pub fn work_per_replicate(&self) -> f64 {
        self.total_work as f64 / self.k as f64
    }

    /// Squared relative standard error, `Var / (k mean²)`.
    pub fn relative_variance(&self) -> f64 {
        self.sample_variance / (self.k as f64 * self.mean * self.mean)
    }
}

pub(crate) fn check_replicates(k: usize) -> Result<()> {
    if k == 0 {
        Err(Error::ZeroReplicates)
    } else {
        Ok(())
    }
}
