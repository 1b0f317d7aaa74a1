#![allow(dead_code)]

use nalgebra::DMatrix;
use schelling_core::Network;

/// Pearson statistic of `counts` against a uniform expectation.
pub fn chi_square_uniform(counts: &[u64]) -> f64 {
    let total: u64 = counts.iter().sum();
    let expected = total as f64 / counts.len() as f64;
    counts
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum()
}

/// Upper quantile of chi-square with `df` degrees of freedom at standard
/// normal quantile `z` (Wilson-Hilferty).
pub fn chi_square_critical(df: usize, z: f64) -> f64 {
    let k = df as f64;
    let h = 2.0 / (9.0 * k);
    k * (1.0 - h + z * h.sqrt()).powi(3)
}

/// Dense symmetric adjacency in row-major order.
pub fn dense_adjacency(net: &Network) -> Vec<f64> {
    let n = net.n();
    let mut a = vec![0.0; n * n];
    for (i, j) in net.edges() {
        a[i * n + j] = 1.0;
        a[j * n + i] = 1.0;
    }
    a
}

/// Disjoint union: `b`'s agents are shifted past `a`'s.
pub fn disjoint_union(a: &Network, b: &Network) -> Network {
    let off = a.n();
    let mut edges = a.edges();
    edges.extend(b.edges().into_iter().map(|(x, y)| (x + off, y + off)));
    Network::from_edges(a.n() + b.n(), &edges).unwrap()
}

/// Dense reference: absolute eigenvalues, descending.
pub fn reference_singular_values(net: &Network) -> Vec<f64> {
    let n = net.n();
    let a = DMatrix::from_row_slice(n, n, &dense_adjacency(net));
    let mut v: Vec<f64> = a
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .map(|x| x.abs())
        .collect();
    v.sort_by(|x, y| y.partial_cmp(x).unwrap());
    v
}

pub fn reference_eigenvalues(net: &Network) -> Vec<f64> {
    let n = net.n();
    let a = DMatrix::from_row_slice(n, n, &dense_adjacency(net));
    a.symmetric_eigen().eigenvalues.iter().copied().collect()
}

/// Profile log-likelihood by summing Gaussian log-densities value by value.
pub fn direct_loglik(x: &[f64], d: usize) -> f64 {
    let k = x.len() as f64;
    let mean = |s: &[f64]| s.iter().sum::<f64>() / s.len() as f64;
    let (top, rest) = x.split_at(d);
    let (m1, m2) = (mean(top), mean(rest));
    let ss: f64 = top.iter().map(|v| (v - m1).powi(2)).sum::<f64>()
        + rest.iter().map(|v| (v - m2).powi(2)).sum::<f64>();
    let var = ss / k;
    if var == 0.0 {
        return f64::INFINITY;
    }
    let logpdf = |v: f64, mu: f64| {
        -0.5 * (2.0 * std::f64::consts::PI * var).ln() - (v - mu).powi(2) / (2.0 * var)
    };
    top.iter().map(|&v| logpdf(v, m1)).sum::<f64>()
        + rest.iter().map(|&v| logpdf(v, m2)).sum::<f64>()
}

pub fn direct_argmax(x: &[f64]) -> usize {
    let mut best = 1;
    let mut best_ll = direct_loglik(x, 1);
    for d in 2..x.len() {
        let ll = direct_loglik(x, d);
        if ll > best_ll {
            best = d;
            best_ll = ll;
        }
    }
    best
}
