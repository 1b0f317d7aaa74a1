//! Singular-value profile of the adjacency matrix, embedded dimension by the
//! profile-likelihood elbow, and adjacency spectral embedding.
//!
//! For a symmetric 0/1 adjacency matrix the singular values are the absolute
//! eigenvalues, so everything here goes through one symmetric eigensolver.

mod lanczos;
mod tridiag;

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::SpectralError;
use crate::graph::Network;

/// Number of leading singular values the elbow sees unless configured.
pub const DEFAULT_K: usize = 120;

/// Residual tolerance of the eigensolver relative to the largest value.
const EIGEN_REL_TOL: f64 = 1e-10;

/// Leading singular values, descending.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingularProfile {
    values: Vec<f64>,
    source_n: usize,
}

impl SingularProfile {
    /// Validates ordering, sign and length against the source size.
    pub fn new(values: Vec<f64>, source_n: usize) -> Result<Self, SpectralError> {
        if values.len() > source_n {
            return Err(SpectralError::InvalidProfile(format!(
                "{} values for a graph of {source_n}",
                values.len()
            )));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(SpectralError::InvalidProfile(format!(
                "value {bad} is not a finite non-negative number"
            )));
        }
        if values.windows(2).any(|w| w[0] < w[1]) {
            return Err(SpectralError::InvalidProfile(
                "values are not sorted descending".into(),
            ));
        }
        Ok(Self { values, source_n })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn source_n(&self) -> usize {
        self.source_n
    }

    /// One value per line, shortest round-trip formatting.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for v in &self.values {
            let _ = writeln!(s, "{v}");
        }
        s
    }

    /// Parses [`to_text`](Self::to_text) output. Blank lines and `#` comments
    /// are skipped.
    pub fn from_text(text: &str, source_n: usize) -> Result<Self, SpectralError> {
        let values = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|l| {
                l.parse::<f64>()
                    .map_err(|e| SpectralError::InvalidProfile(format!("'{l}': {e}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(values, source_n)
    }
}

/// Elbow estimate and the log-likelihood curve it maximises.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimEstimate {
    pub d_hat: usize,
    /// `profile_loglik[d - 1]` is the log-likelihood of the split after `d`
    /// values. A split with zero pooled variance scores `+inf`.
    pub profile_loglik: Vec<f64>,
    /// All values identical; `d_hat` falls back to 1.
    pub degenerate: bool,
}

/// The `k` largest singular values of the adjacency matrix of `net`.
pub fn singular_values(net: &Network, k: usize) -> Result<SingularProfile, SpectralError> {
    if k < 2 {
        return Err(SpectralError::TooFewValues { k, min: 2 });
    }
    if k > net.n() {
        return Err(SpectralError::TooManyValues { k, n: net.n() });
    }
    let eig = lanczos::top_magnitude(
        net.n(),
        k,
        |x, y| net.adjacency_mul(x, y),
        EIGEN_REL_TOL,
        false,
    );
    let mut values: Vec<f64> = eig.values.iter().map(|v| v.abs()).collect();
    values.sort_by(|a, b| b.partial_cmp(a).unwrap());
    SingularProfile::new(values, net.n())
}

/// Profile-likelihood elbow over the candidate splits `d = 1 .. K-1`.
///
/// The top `d` values and the remaining `K - d` are each modelled as Gaussian
/// with their own mean and a shared variance, taken as the maximum-likelihood
/// pooled estimate (within-group sum of squares over `K`). With that variance
/// the summed log-density collapses to `-K/2 * (ln(2 pi v) + 1)`. The smallest
/// maximising `d` wins.
pub fn zhu_ghodsi_dim(profile: &SingularProfile) -> Result<DimEstimate, SpectralError> {
    let x = profile.values();
    let k = x.len();
    if k < 3 {
        return Err(SpectralError::TooFewValues { k, min: 3 });
    }
    if x.iter().all(|v| *v == x[0]) {
        return Ok(DimEstimate {
            d_hat: 1,
            profile_loglik: vec![f64::NAN; k - 1],
            degenerate: true,
        });
    }

    let kf = k as f64;
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut curve = Vec::with_capacity(k - 1);
    for d in 1..k {
        let ss = sum_sq_dev(&x[..d]) + sum_sq_dev(&x[d..]);
        let v = ss / kf;
        let ll = if v > 0.0 {
            -0.5 * kf * ((two_pi * v).ln() + 1.0)
        } else {
            f64::INFINITY
        };
        curve.push(ll);
    }
    let mut best = 0;
    for (i, ll) in curve.iter().enumerate() {
        if *ll > curve[best] {
            best = i;
        }
    }
    Ok(DimEstimate {
        d_hat: best + 1,
        profile_loglik: curve,
        degenerate: false,
    })
}

fn sum_sq_dev(xs: &[f64]) -> f64 {
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    xs.iter().map(|x| (x - mean) * (x - mean)).sum()
}

/// Latent positions from the rank-`d` adjacency spectral embedding.
#[derive(Clone, Debug, PartialEq)]
pub struct Embedding {
    n: usize,
    d: usize,
    coords: Vec<f64>,
    /// Signed eigenvalues behind each column, by descending magnitude.
    pub eigenvalues: Vec<f64>,
}

impl Embedding {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.coords[i * self.d..(i + 1) * self.d]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.coords[i * self.d + j]).collect()
    }

    /// `(X X^T)[i][j]`.
    pub fn gram(&self, i: usize, j: usize) -> f64 {
        self.row(i)
            .iter()
            .zip(self.row(j))
            .map(|(a, b)| a * b)
            .sum()
    }
}

/// Rows `X_i = U_i diag(sigma)^(1/2)` from the top-`d` singular triplets.
pub fn ase_embed(net: &Network, d: usize) -> Result<Embedding, SpectralError> {
    let n = net.n();
    if d == 0 || d > n {
        return Err(SpectralError::InvalidDimension { d, n });
    }
    let eig = lanczos::top_magnitude(n, d, |x, y| net.adjacency_mul(x, y), EIGEN_REL_TOL, true);
    let mut coords = vec![0.0; n * d];
    for (j, (lambda, u)) in eig.values.iter().zip(&eig.vectors).enumerate() {
        let w = lambda.abs().sqrt();
        for i in 0..n {
            coords[i * d + j] = u[i] * w;
        }
    }
    Ok(Embedding {
        n,
        d,
        coords,
        eigenvalues: eig.values,
    })
}
