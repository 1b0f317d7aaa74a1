//! Lanczos iteration with full reorthogonalisation for the eigenvalues of
//! largest magnitude of a symmetric operator.
//!
//! Breakdowns (an invariant Krylov subspace) restart from a fresh vector
//! orthogonal to the basis, so the iteration can always run to the full
//! dimension, where the result is exact up to rounding. Eigenvalues repeated
//! exactly in a large operator may be reported with short multiplicity if the
//! residual test passes before the Krylov space exhausts their first copy.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::tridiag;

const START_SEED: u64 = 0x5eed_1a2c_2b0f_u64;
const MIN_CHECK_GAP: usize = 5;

pub(crate) struct TopEigen {
    /// Sorted by descending magnitude.
    pub values: Vec<f64>,
    /// Unit eigenvectors matching `values`, when requested.
    pub vectors: Vec<Vec<f64>>,
}

/// Eight independent partial sums so the loop vectorises.
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 8];
    let (ca, cb) = (a.chunks_exact(8), b.chunks_exact(8));
    let tail: f64 = ca
        .remainder()
        .iter()
        .zip(cb.remainder())
        .map(|(x, y)| x * y)
        .sum();
    for (x, y) in ca.zip(cb) {
        for i in 0..8 {
            acc[i] += x[i] * y[i];
        }
    }
    acc.iter().sum::<f64>() + tail
}

fn normalize(v: &mut [f64]) -> f64 {
    let norm = dot(v, v).sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    norm
}

/// Basis vectors handled together by [`sweep`].
const BLOCK: usize = 32;

/// One Gram-Schmidt sweep against the rows of `basis`: classical within
/// blocks of [`BLOCK`] rows, modified across them.
fn sweep(w: &mut [f64], basis: &[f64], n: usize) {
    let mut coeffs = [0.0; BLOCK];
    for block in basis.chunks(BLOCK * n) {
        for (c, q) in coeffs.iter_mut().zip(block.chunks_exact(n)) {
            *c = dot(w, q);
        }
        for (c, q) in coeffs.iter().zip(block.chunks_exact(n)) {
            for (wi, qi) in w.iter_mut().zip(q) {
                *wi -= c * qi;
            }
        }
    }
}

/// Sweeps `w` against `basis` until a sweep keeps at least `1/sqrt(2)` of
/// its norm (at most three times).
fn orthogonalize(w: &mut [f64], basis: &[f64], n: usize) {
    let mut norm = dot(w, w).sqrt();
    for _ in 0..3 {
        sweep(w, basis, n);
        let after = dot(w, w).sqrt();
        if after > std::f64::consts::FRAC_1_SQRT_2 * norm {
            break;
        }
        norm = after;
    }
}

/// Simon's recurrence for the loss of orthogonality between the next
/// Lanczos vector and the basis, so that values-only runs sweep against the
/// basis only when the estimate passes `sqrt(eps)`. Semi-orthogonality at
/// that level keeps the Ritz values accurate to working precision.
struct OmegaTracker {
    /// Estimates of `|q_{j-1} . q_i|`.
    prev: Vec<f64>,
    /// Estimates of `|q_j . q_i|`.
    cur: Vec<f64>,
    eps1: f64,
    /// The vector after a swept one must be swept too.
    sweep_next: bool,
}

impl OmegaTracker {
    fn new(n: usize) -> Self {
        Self {
            prev: Vec::new(),
            cur: vec![1.0],
            eps1: (n as f64).sqrt() * f64::EPSILON / 2.0,
            sweep_next: true,
        }
    }

    /// Estimates for `q_{j+1} = r / b`, where `alpha` and `beta[..j]` are the
    /// coefficients so far and `scale` bounds the operator norm. Returns
    /// whether `r` needs a sweep.
    fn advance(&mut self, alpha: &[f64], beta: &[f64], b: f64, scale: f64) -> bool {
        if self.sweep_next || b == 0.0 {
            self.sweep_next = false;
            return true;
        }
        let j = alpha.len() - 1;
        let mut next = vec![0.0; j + 2];
        let noise = self.eps1 * scale.max(b);
        let mut worst: f64 = 0.0;
        for k in 0..j {
            let mut x = beta[k] * self.cur[k + 1] + (alpha[k] - alpha[j]) * self.cur[k]
                - beta[j - 1] * self.prev[k];
            if k > 0 {
                x += beta[k - 1] * self.cur[k - 1];
            }
            x = (x + noise.copysign(x)) / b;
            worst = worst.max(x.abs());
            next[k] = x;
        }
        if worst > f64::EPSILON.sqrt() {
            self.sweep_next = true;
            return true;
        }
        next[j] = self.eps1;
        next[j + 1] = 1.0;
        self.prev = std::mem::replace(&mut self.cur, next);
        false
    }

    /// Records that the vector following `alpha.len()` steps was swept.
    fn reset(&mut self, m: usize) {
        let mut next = vec![self.eps1; m + 1];
        next[m] = 1.0;
        self.prev = std::mem::replace(&mut self.cur, next);
    }
}

fn random_unit(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.5..0.5)).collect();
    normalize(&mut v);
    v
}

/// Top `k` eigenpairs by `|lambda|` of the `n x n` symmetric operator `apply`.
///
/// Stops once every wanted Ritz pair has residual at most `rel_tol` times the
/// largest Ritz magnitude; for a symmetric operator that residual bounds the
/// eigenvalue error.
pub(crate) fn top_magnitude<F>(
    n: usize,
    k: usize,
    apply: F,
    rel_tol: f64,
    want_vectors: bool,
) -> TopEigen
where
    F: Fn(&[f64], &mut [f64]),
{
    assert!(k <= n, "k exceeds dimension");
    if n == 0 || k == 0 {
        return TopEigen {
            values: Vec::new(),
            vectors: Vec::new(),
        };
    }
    let mut rng = ChaCha8Rng::seed_from_u64(START_SEED);
    let first_check = n.min((3 * k + 20).max(40));
    let mut next_check = first_check;

    let mut basis: Vec<f64> = Vec::with_capacity(n * first_check.min(n));
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut v = random_unit(n, &mut rng);
    let mut w = vec![0.0; n];
    let mut scale: f64 = 0.0;
    let mut omega = OmegaTracker::new(n);
    // the recurrence does not model restarts, so sweep every vector after one
    let mut full = want_vectors;

    loop {
        basis.extend_from_slice(&v);
        apply(&v, &mut w);
        let a = dot(&w, &v);
        alpha.push(a);
        let m = alpha.len();
        let prev_beta = if m > 1 { beta[m - 2] } else { 0.0 };
        for (i, wi) in w.iter_mut().enumerate() {
            *wi -= a * v[i];
            if m > 1 {
                *wi -= prev_beta * basis[(m - 2) * n + i];
            }
        }
        let mut b = dot(&w, &w).sqrt();
        if full || omega.advance(&alpha, &beta, b, scale.max(a.abs())) {
            orthogonalize(&mut w, &basis, n);
            b = dot(&w, &w).sqrt();
            omega.reset(m);
        }
        scale = scale.max(a.abs()).max(b);
        if m == n {
            break;
        }
        if m == next_check {
            let done = converged_count(&alpha, &beta, b, k, rel_tol);
            if done == k {
                break;
            }
            // halfway to where the current convergence rate would finish
            let ahead = (k - done) * m / (2 * done.max(1));
            next_check = m + ahead.max(MIN_CHECK_GAP);
        }
        if b <= 1e-12 * scale.max(1.0) {
            // invariant subspace: continue in its orthogonal complement
            full = true;
            loop {
                v = random_unit(n, &mut rng);
                orthogonalize(&mut v, &basis, n);
                if normalize(&mut v) > 1e-8 {
                    break;
                }
            }
            beta.push(0.0);
        } else {
            for (vi, wi) in v.iter_mut().zip(&w) {
                *vi = wi / b;
            }
            beta.push(b);
        }
    }

    let m = alpha.len();
    let rows: Vec<usize> = if want_vectors {
        (0..m).collect()
    } else {
        Vec::new()
    };
    let (theta, z) = tridiag::eigen(&alpha, &beta, &rows);
    let order = by_magnitude(&theta);
    let values = order[..k].iter().map(|&i| theta[i]).collect();
    let vectors = if want_vectors {
        order[..k]
            .iter()
            .map(|&i| {
                let mut y = vec![0.0; n];
                for (j, q) in basis.chunks_exact(n).enumerate() {
                    let c = z[j][i];
                    for (yi, qi) in y.iter_mut().zip(q) {
                        *yi += c * qi;
                    }
                }
                normalize(&mut y);
                orient(&mut y);
                y
            })
            .collect()
    } else {
        Vec::new()
    };
    TopEigen { values, vectors }
}

fn by_magnitude(theta: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..theta.len()).collect();
    order.sort_by(|&a, &b| {
        theta[b]
            .abs()
            .partial_cmp(&theta[a].abs())
            .unwrap()
            .then(theta[b].partial_cmp(&theta[a]).unwrap())
    });
    order
}

/// How many of the `k` wanted Ritz pairs meet the residual test.
fn converged_count(alpha: &[f64], beta: &[f64], next_beta: f64, k: usize, rel_tol: f64) -> usize {
    let m = alpha.len();
    let (theta, last) = tridiag::eigen(alpha, beta, &[m - 1]);
    let order = by_magnitude(&theta);
    let top = theta[order[0]].abs().max(f64::MIN_POSITIVE);
    order[..k]
        .iter()
        .filter(|&&i| (next_beta * last[0][i]).abs() <= rel_tol * top)
        .count()
}

/// Deterministic sign: positive entry sum, or positive first nonzero entry.
fn orient(y: &mut [f64]) {
    let sum: f64 = y.iter().sum();
    let flip = if sum.abs() > 1e-12 {
        sum < 0.0
    } else {
        y.iter().find(|x| x.abs() > 1e-12).is_some_and(|x| *x < 0.0)
    };
    if flip {
        y.iter_mut().for_each(|x| *x = -*x);
    }
}
