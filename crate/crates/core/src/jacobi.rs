//! Cyclic Jacobi eigensolver for real symmetric matrices.
//!
//! Used for certification, so it deliberately shares no code with the
//! factorizations inside the conic solver.

use crate::linalg::Mat;

#[derive(Debug, Clone)]
pub struct SymEigen {
    /// Eigenvalues in ascending order.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors stored as columns, matching `values`.
    pub vectors: Mat,
    pub sweeps: usize,
}

const MAX_SWEEPS: usize = 100;

/// Diagonalizes `m` by plane rotations. Only the lower triangle is read.
pub fn sym_eigen(m: &Mat) -> SymEigen {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "jacobi needs a square matrix");
    let mut a = Mat::from_fn(n, n, |r, c| if r >= c { m[(r, c)] } else { m[(c, r)] });
    let mut v = Mat::identity(n, n);
    let mut sweeps = 0;

    while sweeps < MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|p| (p + 1..n).map(move |q| (p, q)))
            .map(|(p, q)| a[(p, q)] * a[(p, q)])
            .sum();
        let diag: f64 = (0..n).map(|p| a[(p, p)] * a[(p, p)]).sum();
        if off == 0.0 || off.sqrt() <= f64::EPSILON * 1e-3 * diag.sqrt().max(f64::MIN_POSITIVE) {
            break;
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let app = a[(p, p)];
                let aqq = a[(q, q)];
                // rotation angle annihilating a[p][q]
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[(x, x)].total_cmp(&a[(y, y)]));
    let values = order.iter().map(|&k| a[(k, k)]).collect();
    let vectors = Mat::from_fn(n, n, |r, c| v[(r, order[c])]);
    SymEigen { values, vectors, sweeps }
}

/// Smallest eigenvalue; `+inf` for an empty matrix.
pub fn min_eigenvalue(m: &Mat) -> f64 {
    if m.nrows() == 0 {
        return f64::INFINITY;
    }
    sym_eigen(m).values[0]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs;

    #[test]
    fn diagonal_is_fixed_point() {
        let m = Mat::from_diagonal(&nalgebra::DVector::from_vec(vec![3.0, -1.0, 2.0]));
        let e = sym_eigen(&m);
        assert_eq!(e.values, vec![-1.0, 2.0, 3.0]);
        assert_eq!(e.sweeps, 0);
    }

    #[test]
    fn two_by_two_closed_form() {
        // [[-0.5, 1], [1, -1]]: eigenvalues (-1.5 ± sqrt(4.25)) / 2
        let m = Mat::from_row_slice(2, 2, &[-0.5, 1.0, 1.0, -1.0]);
        let e = sym_eigen(&m);
        let disc = 4.25_f64.sqrt();
        assert!((e.values[0] - (-1.5 - disc) / 2.0).abs() < 1e-14);
        assert!((e.values[1] - (-1.5 + disc) / 2.0).abs() < 1e-14);
    }

    #[test]
    fn reconstruction_and_orthogonality() {
        let n = 7;
        let m = Mat::from_fn(n, n, |r, c| ((r * 3 + c * 5) as f64).sin() + ((c * 3 + r * 5) as f64).sin());
        let e = sym_eigen(&m);
        let lam = Mat::from_diagonal(&nalgebra::DVector::from_vec(e.values.clone()));
        let rec = &e.vectors * lam * e.vectors.transpose();
        assert!(max_abs(&(rec - &m)) <= 1e-12 * max_abs(&m));
        let gram = e.vectors.transpose() * &e.vectors;
        assert!(max_abs(&(gram - Mat::identity(n, n))) <= 1e-13);
    }

    #[test]
    fn empty_matrix_min_is_infinite() {
        assert_eq!(min_eigenvalue(&Mat::zeros(0, 0)), f64::INFINITY);
    }
}
