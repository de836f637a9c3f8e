//! Cyclic Jacobi eigensolver for dense complex Hermitian matrices.
//!
//! Each rotation acts on one index pair `(p, q)`. A diagonal phase first
//! makes the 2x2 block real symmetric, then a real Givens rotation
//! annihilates the off-diagonal entry. Sweeps visit every pair in row
//! order and stop once the off-diagonal Frobenius norm drops below
//! `tol * ||A||_F`.

use crate::error::{Error, Result};
use crate::linalg::matrix::{ComplexMatrix, C64, ONE, ZERO};

/// Default off-diagonal stopping tolerance (relative to `||A||_F`).
pub const DEFAULT_JACOBI_TOL: f64 = 1e-12;

/// Hermiticity check used on entry, relative to the largest entry.
pub const HERMITIAN_CHECK_TOL: f64 = 1e-12;

const MAX_SWEEPS: usize = 60;

/// Eigenvalues (ascending) and matching orthonormal eigenvector columns.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
    pub sweeps: usize,
}

impl HermitianEigen {
    /// `max_k ||A v_k - lambda_k v_k||`.
    pub fn residual(&self, a: &ComplexMatrix) -> f64 {
        let av = a.matmul(&self.vectors);
        let n = a.rows();
        (0..self.values.len())
            .map(|k| {
                (0..n).map(|i| (av[(i, k)] - self.vectors[(i, k)] * self.values[k]).norm_sqr()).sum::<f64>().sqrt()
            })
            .fold(0.0, f64::max)
    }
}

/// Full eigendecomposition of a Hermitian matrix by cyclic Jacobi sweeps.
pub fn hermitian_eig(a: &ComplexMatrix, tol: f64) -> Result<HermitianEigen> {
    if !a.is_square() {
        return Err(Error::NotSquare { rows: a.rows(), cols: a.cols() });
    }
    let defect = a.hermitian_defect();
    if defect > HERMITIAN_CHECK_TOL * a.max_abs().max(1.0) {
        return Err(Error::NotHermitian { defect });
    }
    let n = a.rows();
    let mut work = Workspace::new(a);
    let sweeps = work.run(tol)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| work.a[x * n + x].re.total_cmp(&work.a[y * n + y].re));
    let values = order.iter().map(|&k| work.a[k * n + k].re).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, k| work.vt[order[k] * n + i]);
    Ok(HermitianEigen { values, vectors, sweeps })
}

struct Workspace {
    n: usize,
    // Hermitian working copy, row-major.
    a: Vec<C64>,
    // Accumulated rotations; row k holds eigenvector k.
    vt: Vec<C64>,
}

impl Workspace {
    fn new(m: &ComplexMatrix) -> Self {
        let n = m.rows();
        let mut a = vec![ZERO; n * n];
        for i in 0..n {
            a[i * n + i] = C64::new(m[(i, i)].re, 0.0);
            for j in i + 1..n {
                let z = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
                a[i * n + j] = z;
                a[j * n + i] = z.conj();
            }
        }
        let mut vt = vec![ZERO; n * n];
        for i in 0..n {
            vt[i * n + i] = ONE;
        }
        Self { n, a, vt }
    }

    fn off_norm(&self) -> f64 {
        let n = self.n;
        let mut s = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                s += self.a[i * n + j].norm_sqr();
            }
        }
        (2.0 * s).sqrt()
    }

    fn run(&mut self, tol: f64) -> Result<usize> {
        let scale = self.a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if scale == 0.0 {
            return Ok(0);
        }
        let stop = tol * scale;
        for sweep in 0..MAX_SWEEPS {
            if self.off_norm() <= stop {
                return Ok(sweep);
            }
            for p in 0..self.n {
                for q in p + 1..self.n {
                    self.rotate(p, q, sweep >= 4);
                }
            }
        }
        let off_norm = self.off_norm();
        if off_norm <= stop {
            Ok(MAX_SWEEPS)
        } else {
            Err(Error::NoConvergence { sweeps: MAX_SWEEPS, off_norm })
        }
    }

    fn rotate(&mut self, p: usize, q: usize, late: bool) {
        let n = self.n;
        let apq = self.a[p * n + q];
        let g = apq.norm();
        if g == 0.0 {
            return;
        }
        let app = self.a[p * n + p].re;
        let aqq = self.a[q * n + q].re;
        // Negligible against both diagonal entries: drop it.
        if late && app.abs() + 100.0 * g == app.abs() && aqq.abs() + 100.0 * g == aqq.abs() {
            self.a[p * n + q] = ZERO;
            self.a[q * n + p] = ZERO;
            return;
        }
        let e = apq / g;
        let theta = (aqq - app) / (2.0 * g);
        let t = if theta.abs() > 1e150 {
            0.5 / theta
        } else {
            theta.signum() / (theta.abs() + (1.0 + theta * theta).sqrt())
        };
        let c = 1.0 / (1.0 + t * t).sqrt();
        let s = t * c;
        let es = e * s;
        let ec = e * c;
        let ebar_s = e.conj() * s;
        let ebar_c = e.conj() * c;

        // Rows p and q of J^H A; columns follow by Hermitian symmetry.
        let (row_p, row_q) = two_rows(&mut self.a, n, p, q);
        for k in 0..n {
            let ap = row_p[k];
            let aq = row_q[k];
            row_p[k] = ap * c - aq * es;
            row_q[k] = ap * s + aq * ec;
        }
        for k in 0..n {
            if k != p && k != q {
                self.a[k * n + p] = self.a[p * n + k].conj();
                self.a[k * n + q] = self.a[q * n + k].conj();
            }
        }
        self.a[p * n + p] = C64::new(app - t * g, 0.0);
        self.a[q * n + q] = C64::new(aqq + t * g, 0.0);
        self.a[p * n + q] = ZERO;
        self.a[q * n + p] = ZERO;

        let (vp, vq) = two_rows(&mut self.vt, n, p, q);
        for k in 0..n {
            let xp = vp[k];
            let xq = vq[k];
            vp[k] = xp * c - xq * ebar_s;
            vq[k] = xp * s + xq * ebar_c;
        }
    }
}

fn two_rows(buf: &mut [C64], n: usize, p: usize, q: usize) -> (&mut [C64], &mut [C64]) {
    debug_assert!(p < q);
    let (head, tail) = buf.split_at_mut(q * n);
    (&mut head[p * n..(p + 1) * n], &mut tail[..n])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn real_diag(d: &[f64]) -> ComplexMatrix {
        ComplexMatrix::from_diagonal(&d.iter().map(|&x| C64::new(x, 0.0)).collect::<Vec<_>>())
    }

    #[test]
    fn identity_has_unit_eigenvalues() {
        let e = hermitian_eig(&ComplexMatrix::identity(4), DEFAULT_JACOBI_TOL).unwrap();
        assert_eq!(e.values, vec![1.0; 4]);
        assert_eq!(e.sweeps, 0);
    }

    #[test]
    fn diagonal_is_sorted_with_permutation_columns() {
        let e = hermitian_eig(&real_diag(&[3.0, 1.0, 2.0]), DEFAULT_JACOBI_TOL).unwrap();
        assert_eq!(e.values, vec![1.0, 2.0, 3.0]);
        // eigenvector for 1.0 is e_2, for 2.0 is e_3, for 3.0 is e_1
        assert_eq!(e.vectors[(1, 0)], ONE);
        assert_eq!(e.vectors[(2, 1)], ONE);
        assert_eq!(e.vectors[(0, 2)], ONE);
    }

    #[test]
    fn two_by_two_complex_block() {
        // [[1, i], [-i, 1]] has eigenvalues 0 and 2
        let m = ComplexMatrix::from_row_major(2, 2, vec![ONE, C64::new(0.0, 1.0), C64::new(0.0, -1.0), ONE]).unwrap();
        let e = hermitian_eig(&m, DEFAULT_JACOBI_TOL).unwrap();
        assert!((e.values[0]).abs() < 1e-14);
        assert!((e.values[1] - 2.0).abs() < 1e-14);
        assert!(e.residual(&m) < 1e-14);
    }

    #[test]
    fn rejects_non_hermitian_and_non_square() {
        let m = ComplexMatrix::from_row_major(2, 2, vec![ONE, ONE, ZERO, ONE]).unwrap();
        assert!(matches!(hermitian_eig(&m, 1e-12), Err(Error::NotHermitian { .. })));
        assert!(matches!(hermitian_eig(&ComplexMatrix::zeros(2, 3), 1e-12), Err(Error::NotSquare { .. })));
    }

    #[test]
    fn zero_matrix_is_already_diagonal() {
        let e = hermitian_eig(&ComplexMatrix::zeros(3, 3), DEFAULT_JACOBI_TOL).unwrap();
        assert_eq!(e.values, vec![0.0; 3]);
    }
}
