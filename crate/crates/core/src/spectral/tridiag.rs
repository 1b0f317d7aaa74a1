//! Symmetric tridiagonal eigenvalues by implicit QL with Wilkinson shifts.
//!
//! Only the requested rows of the eigenvector matrix are accumulated, so the
//! Lanczos convergence test (which needs just the last row) costs O(m^2).

/// `sqrt(a^2 + b^2)` without overflow; cheaper than `f64::hypot`.
fn pythag(a: f64, b: f64) -> f64 {
    let (a, b) = (a.abs(), b.abs());
    let (big, small) = if a >= b { (a, b) } else { (b, a) };
    if big == 0.0 {
        return 0.0;
    }
    let r = small / big;
    big * (1.0 + r * r).sqrt()
}

/// Diagonalises the tridiagonal matrix with diagonal `diag` and coupling
/// `off[i]` between `i` and `i + 1` (`off.len() == diag.len() - 1`).
///
/// Returns the eigenvalues (unsorted, in the order matching eigenvector
/// columns) and, for each index in `rows`, that row of the orthogonal
/// eigenvector matrix.
pub(crate) fn eigen(diag: &[f64], off: &[f64], rows: &[usize]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let m = diag.len();
    assert!(m == 0 || off.len() + 1 == m, "off-diagonal length mismatch");
    let mut d = diag.to_vec();
    let mut e = off.to_vec();
    e.push(0.0);
    let mut z: Vec<Vec<f64>> = rows
        .iter()
        .map(|&r| {
            let mut row = vec![0.0; m];
            row[r] = 1.0;
            row
        })
        .collect();

    for l in 0..m {
        let mut iter = 0;
        loop {
            let mut split = l;
            while split + 1 < m {
                let dd = d[split].abs() + d[split + 1].abs();
                if e[split].abs() <= f64::EPSILON * dd {
                    break;
                }
                split += 1;
            }
            if split == l {
                break;
            }
            iter += 1;
            assert!(iter <= 100, "tridiagonal QL failed to converge");

            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = pythag(g, 1.0);
            g = d[split] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = split;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = pythag(f, g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[split] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for row in z.iter_mut() {
                    let f = row[i + 1];
                    row[i + 1] = s * row[i] + c * f;
                    row[i] = c * row[i] - s * f;
                }
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[split] = 0.0;
        }
    }
    (d, z)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two() {
        let (vals, rows) = eigen(&[2.0, 2.0], &[1.0], &[0, 1]);
        let mut sorted = vals.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((sorted[0] - 1.0).abs() < 1e-14);
        assert!((sorted[1] - 3.0).abs() < 1e-14);
        // columns are unit eigenvectors
        for j in 0..2 {
            let norm = rows[0][j].powi(2) + rows[1][j].powi(2);
            assert!((norm - 1.0).abs() < 1e-14);
            let av0 = 2.0 * rows[0][j] + rows[1][j];
            assert!((av0 - vals[j] * rows[0][j]).abs() < 1e-13);
        }
    }

    #[test]
    fn path_graph_spectrum() {
        // adjacency of the path on m nodes: 2 cos(pi k / (m + 1))
        let m = 30;
        let (mut vals, _) = eigen(&vec![0.0; m], &vec![1.0; m - 1], &[]);
        vals.sort_by(|a, b| b.partial_cmp(a).unwrap());
        for (k, v) in vals.iter().enumerate() {
            let exact = 2.0 * (std::f64::consts::PI * (k + 1) as f64 / (m + 1) as f64).cos();
            assert!((v - exact).abs() < 1e-12, "{k}: {v} vs {exact}");
        }
    }

    #[test]
    fn decoupled_blocks_and_empty() {
        let (vals, _) = eigen(&[5.0, -1.0, 3.0], &[0.0, 0.0], &[]);
        assert_eq!(vals, vec![5.0, -1.0, 3.0]);
        let (vals, rows) = eigen(&[], &[], &[]);
        assert!(vals.is_empty() && rows.is_empty());
        let (vals, _) = eigen(&[4.0], &[], &[0]);
        assert_eq!(vals, vec![4.0]);
    }
}
