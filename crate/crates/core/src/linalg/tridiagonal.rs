//! Householder reduction to real tridiagonal form followed by implicit QL.
//!
//! Roughly an order of magnitude cheaper than cyclic Jacobi on the
//! 20..80-dimensional matrices produced by chain-size sweeps, at the cost
//! of a longer code path. [`super::jacobi`] stays the reference solver.

use crate::error::{Error, Result};
use crate::linalg::jacobi::{HermitianEigen, HERMITIAN_CHECK_TOL};
use crate::linalg::matrix::{ComplexMatrix, C64, ZERO};

const MAX_QL_ITERATIONS: usize = 60;

/// Hermitian eigendecomposition via tridiagonalization and implicit QL.
/// Eigenvalues ascending, eigenvector columns orthonormal.
pub fn hermitian_eig_tridiagonal(a: &ComplexMatrix) -> Result<HermitianEigen> {
    if !a.is_square() {
        return Err(Error::NotSquare { rows: a.rows(), cols: a.cols() });
    }
    let defect = a.hermitian_defect();
    if defect > HERMITIAN_CHECK_TOL * a.max_abs().max(1.0) {
        return Err(Error::NotHermitian { defect });
    }
    let n = a.rows();
    if n == 0 {
        return Ok(HermitianEigen { values: vec![], vectors: ComplexMatrix::zeros(0, 0), sweeps: 0 });
    }

    let mut work = a.as_slice().to_vec();
    for i in 0..n {
        work[i * n + i] = C64::new(work[i * n + i].re, 0.0);
    }
    let reflectors = tridiagonalize(&mut work, n);

    let mut diag: Vec<f64> = (0..n).map(|i| work[i * n + i].re).collect();
    let mut off = vec![0.0; n];
    // Phases that make the off-diagonal real and non-negative.
    let mut phase = vec![C64::new(1.0, 0.0); n];
    for i in 0..n - 1 {
        let t = work[(i + 1) * n + i];
        let r = t.norm();
        off[i] = r;
        phase[i + 1] = if r > 0.0 { phase[i] * (t / r) } else { phase[i] };
    }

    let mut zt = vec![0.0; n * n];
    for i in 0..n {
        zt[i * n + i] = 1.0;
    }
    let iterations = implicit_ql(&mut diag, &mut off, &mut zt, n)?;

    // eigenvectors = H_0 ... H_{n-3} * diag(phase) * Z
    let mut vecs = ComplexMatrix::from_fn(n, n, |row, col| phase[row] * zt[col * n + row]);
    for (k, v) in reflectors.iter().enumerate().rev() {
        apply_reflector_left(&mut vecs, v, k + 1);
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| diag[x].total_cmp(&diag[y]));
    let values = order.iter().map(|&k| diag[k]).collect();
    let vectors = vecs.select_columns(&order);
    Ok(HermitianEigen { values, vectors, sweeps: iterations })
}

/// In-place `A <- H A H` for successive unit reflectors `H = I - 2 v v^H`.
/// Returns the reflectors; reflector `k` acts on rows `k + 1..n`.
fn tridiagonalize(a: &mut [C64], n: usize) -> Vec<Vec<C64>> {
    let mut reflectors = Vec::with_capacity(n.saturating_sub(2));
    for k in 0..n.saturating_sub(2) {
        let m = n - k - 1;
        let x: Vec<C64> = (0..m).map(|i| a[(k + 1 + i) * n + k]).collect();
        let xnorm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let tail = x[1..].iter().map(|z| z.norm_sqr()).sum::<f64>();
        if xnorm == 0.0 || tail == 0.0 {
            reflectors.push(vec![ZERO; m]);
            continue;
        }
        let x0 = x[0];
        let unit = if x0.norm() > 0.0 { x0 / x0.norm() } else { C64::new(1.0, 0.0) };
        let alpha = -unit * xnorm;
        let mut v = x;
        v[0] -= alpha;
        let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in v.iter_mut() {
            *z /= vnorm;
        }

        // Trailing block B = A[k+1.., k+1..]; B <- B - v w^H - w v^H,
        // w = 2 (B v) - 2 (v^H B v) v.
        let mut p = vec![ZERO; m];
        for i in 0..m {
            let row = &a[(k + 1 + i) * n + k + 1..(k + 1 + i) * n + n];
            p[i] = row.iter().zip(&v).map(|(b, vj)| b * vj).sum();
        }
        let kk: C64 = v.iter().zip(&p).map(|(vi, pi)| vi.conj() * pi).sum();
        let w: Vec<C64> = p.iter().zip(&v).map(|(pi, vi)| (pi - vi * kk) * 2.0).collect();
        for i in 0..m {
            let (vi, wi) = (v[i], w[i]);
            let row = &mut a[(k + 1 + i) * n + k + 1..(k + 1 + i) * n + n];
            for j in 0..m {
                row[j] -= vi * w[j].conj() + wi * v[j].conj();
            }
        }
        a[(k + 1) * n + k] = alpha;
        a[k * n + k + 1] = alpha.conj();
        for i in 1..m {
            a[(k + 1 + i) * n + k] = ZERO;
            a[k * n + k + 1 + i] = ZERO;
        }
        reflectors.push(v);
    }
    reflectors
}

/// `M <- (I - 2 v v^H) M` on rows `start..start + v.len()`.
fn apply_reflector_left(m: &mut ComplexMatrix, v: &[C64], start: usize) {
    if v.iter().all(|z| *z == ZERO) {
        return;
    }
    let cols = m.cols();
    let mut s = vec![ZERO; cols];
    for (i, vi) in v.iter().enumerate() {
        let vc = vi.conj();
        for (sj, mij) in s.iter_mut().zip(m.row(start + i)) {
            *sj += vc * mij;
        }
    }
    for (i, vi) in v.iter().enumerate() {
        let f = vi * 2.0;
        for j in 0..cols {
            let sj = s[j];
            m[(start + i, j)] -= f * sj;
        }
    }
}

/// QL with implicit Wilkinson shifts on a real symmetric tridiagonal
/// matrix. `off[i]` couples `i` and `i + 1`. Row `k` of `zt` accumulates
/// eigenvector `k`.
fn implicit_ql(d: &mut [f64], e: &mut [f64], zt: &mut [f64], n: usize) -> Result<usize> {
    let mut total = 0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            total += 1;
            if iter > MAX_QL_ITERATIONS {
                return Err(Error::NoConvergence { sweeps: iter, off_norm: e[l].abs() });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut underflow = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                let (lo, hi) = zt.split_at_mut((i + 1) * n);
                let zi = &mut lo[i * n..(i + 1) * n];
                let zi1 = &mut hi[..n];
                for k in 0..n {
                    let fz = zi1[k];
                    zi1[k] = s * zi[k] + c * fz;
                    zi[k] = c * zi[k] - s * fz;
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(total)
}
