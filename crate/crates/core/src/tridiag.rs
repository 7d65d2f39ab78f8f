//! Eigendecomposition of real symmetric tridiagonal matrices by the implicit
//! QL algorithm with Wilkinson shifts (the `tql2` scheme).

/// Eigenvalues in ascending order and the matching unit eigenvectors.
#[derive(Debug, Clone)]
pub struct TridiagEigen {
    pub values: Vec<f64>,
    /// `vectors[k]` belongs to `values[k]`.
    pub vectors: Vec<Vec<f64>>,
}

const MAX_SWEEPS: usize = 60;

/// Diagonalises the matrix with diagonal `diag` and off-diagonal `offdiag`
/// (`offdiag.len() + 1 == diag.len()`). Returns `None` when an eigenvalue
/// fails to converge.
///
/// Each eigenvector is normalised and its largest-magnitude component is made
/// positive (the first such component on ties).
pub fn tridiag_eigen(diag: &[f64], offdiag: &[f64]) -> Option<TridiagEigen> {
    let n = diag.len();
    assert!(n >= 1 && offdiag.len() + 1 == n, "offdiag must be one shorter than diag");
    let mut d = diag.to_vec();
    let mut e = offdiag.to_vec();
    e.push(0.0);
    // z[i][k]: component i of eigenvector k
    let mut z = vec![vec![0.0; n]; n];
    for (i, row) in z.iter_mut().enumerate() {
        row[i] = 1.0;
    }

    let mut tst = 0.0_f64;
    for l in 0..n {
        tst = tst.max(d[l].abs() + e[l].abs());
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = (d[m].abs() + d[m + 1].abs()).max(tst);
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > MAX_SWEEPS {
                return None;
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut deflated = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
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
                    let t = row[i + 1];
                    row[i + 1] = s * row[i] + c * t;
                    row[i] = c * row[i] - s * t;
                }
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let values = order.iter().map(|&k| d[k]).collect();
    let vectors = order
        .iter()
        .map(|&k| {
            let mut v: Vec<f64> = z.iter().map(|row| row[k]).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            let mut big = 0;
            for (i, x) in v.iter().enumerate() {
                if x.abs() > v[big].abs() * (1.0 + 1e-12) {
                    big = i;
                }
            }
            let sign = if v[big] < 0.0 { -1.0 } else { 1.0 };
            for x in v.iter_mut() {
                *x *= sign / norm;
            }
            v
        })
        .collect();
    Some(TridiagEigen { values, vectors })
}

/// `H v` for the tridiagonal matrix `(diag, offdiag)`.
pub fn tridiag_apply(diag: &[f64], offdiag: &[f64], v: &[f64]) -> Vec<f64> {
    let n = diag.len();
    (0..n)
        .map(|i| {
            let mut acc = diag[i] * v[i];
            if i > 0 {
                acc += offdiag[i - 1] * v[i - 1];
            }
            if i + 1 < n {
                acc += offdiag[i] * v[i + 1];
            }
            acc
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn residual(diag: &[f64], off: &[f64], eig: &TridiagEigen) -> f64 {
        eig.values
            .iter()
            .zip(&eig.vectors)
            .map(|(&lam, v)| {
                let hv = tridiag_apply(diag, off, v);
                hv.iter().zip(v).map(|(a, b)| (a - lam * b).powi(2)).sum::<f64>().sqrt()
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn two_by_two() {
        let g = 0.37;
        let eig = tridiag_eigen(&[0.0, 0.0], &[g]).unwrap();
        assert!((eig.values[0] + g).abs() < 1e-15);
        assert!((eig.values[1] - g).abs() < 1e-15);
        let s = 0.5f64.sqrt();
        assert!((eig.vectors[1][0] - s).abs() < 1e-15 && (eig.vectors[1][1] - s).abs() < 1e-15);
        assert!((eig.vectors[0][0].abs() - s).abs() < 1e-15);
        assert!((eig.vectors[0][0] + eig.vectors[0][1]).abs() < 1e-15);
    }

    #[test]
    fn three_by_three_zero_diagonal() {
        let (g1, g2) = (0.3, -1.1);
        let eig = tridiag_eigen(&[0.0; 3], &[g1, g2]).unwrap();
        let w = f64::hypot(g1, g2);
        assert!((eig.values[0] + w).abs() < 1e-14);
        assert!(eig.values[1].abs() < 1e-14);
        assert!((eig.values[2] - w).abs() < 1e-14);
    }

    #[test]
    fn single_element() {
        let eig = tridiag_eigen(&[2.5], &[]).unwrap();
        assert_eq!(eig.values, vec![2.5]);
        assert_eq!(eig.vectors, vec![vec![1.0]]);
    }

    #[test]
    fn sign_convention() {
        let eig = tridiag_eigen(&[0.0; 6], &[1.0, 0.5, 2.0, 0.1, 0.7]).unwrap();
        for v in &eig.vectors {
            let big = v.iter().cloned().fold(0.0, |a: f64, b| if b.abs() > a.abs() { b } else { a });
            assert!(big > 0.0);
        }
    }

    proptest! {
        #[test]
        fn random_zero_diagonal_spectrum_is_symmetric(off in prop::collection::vec(-1.0f64..1.0, 1..50)) {
            let n = off.len() + 1;
            let diag = vec![0.0; n];
            let eig = tridiag_eigen(&diag, &off).unwrap();
            let scale = off.iter().fold(0.0f64, |a, b| a.max(b.abs())).max(1e-300);
            for i in 0..n {
                prop_assert!((eig.values[i] + eig.values[n - 1 - i]).abs() < 1e-10 * scale.max(1.0));
            }
            prop_assert!(residual(&diag, &off, &eig) < 1e-10 * (2.0 * scale).max(1e-12));
            for w in eig.values.windows(2) {
                prop_assert!(w[0] <= w[1]);
            }
        }

        #[test]
        fn general_matrices_are_diagonalised(
            diag in prop::collection::vec(-3.0f64..3.0, 2..30),
            seed in prop::collection::vec(-2.0f64..2.0, 29),
        ) {
            let off = &seed[..diag.len() - 1];
            let eig = tridiag_eigen(&diag, off).unwrap();
            let norm = diag.iter().chain(off).fold(0.0f64, |a, b| a.max(b.abs())) * 3.0;
            prop_assert!(residual(&diag, off, &eig) < 1e-10 * norm.max(1.0));
            // orthonormality
            for a in 0..eig.vectors.len() {
                for b in 0..=a {
                    let dot: f64 = eig.vectors[a].iter().zip(&eig.vectors[b]).map(|(x, y)| x * y).sum();
                    let want = if a == b { 1.0 } else { 0.0 };
                    prop_assert!((dot - want).abs() < 1e-10);
                }
            }
        }
    }
}
