//! Eigendecomposition of unitary matrices.
//!
//! A unitary `W` is normal, so its Hermitian part `H_R = (W + W^H)/2` and
//! its skew part `H_I = (W - W^H)/(2i)` commute and share an eigenbasis.
//! Eigenvalues of `H_R` are `cos(omega)`, which cannot tell `omega` from
//! `-omega`; every group of close `H_R` eigenvalues is therefore
//! re-diagonalized with the compression of `H_I`, whose eigenvalues are
//! `sin(omega)`, and whatever is still close after that with the
//! compression of `H_R`. Phases come from `atan2(<H_I>, <H_R>)`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::jacobi::{hermitian_eig, DEFAULT_JACOBI_TOL};
use crate::linalg::matrix::{inner, ComplexMatrix, C64};
use crate::linalg::tridiagonal::hermitian_eig_tridiagonal;

pub const DEFAULT_CLUSTER_TOL: f64 = 1e-8;
pub const DEFAULT_RESIDUAL_GATE: f64 = 1e-9;
pub const DEFAULT_UNITARITY_TOL: f64 = 1e-10;

// H_R eigenvalues closer than this are treated as one group. Eigenvectors
// of distinct values with gap `g` carry mixing of order eps / g.
const SPLIT_TOL: f64 = 1e-4;

/// Solver for the first-stage diagonalization of `H_R`. Compressed
/// second-stage blocks always use Jacobi.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HermitianSolver {
    Jacobi,
    #[default]
    Tridiagonal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitaryEigOptions {
    /// Jacobi off-diagonal stopping tolerance.
    pub tol: f64,
    pub cluster_tol: f64,
    pub unitarity_tol: f64,
    pub residual_gate: f64,
    pub solver: HermitianSolver,
}

impl Default for UnitaryEigOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_JACOBI_TOL,
            cluster_tol: DEFAULT_CLUSTER_TOL,
            unitarity_tol: DEFAULT_UNITARITY_TOL,
            residual_gate: DEFAULT_RESIDUAL_GATE,
            solver: HermitianSolver::default(),
        }
    }
}

/// Group of eigenvectors sharing one eigenphase (within tolerance).
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseCluster {
    /// Circular mean of the member phases, in `(-pi, pi]`.
    pub phase: f64,
    /// Column indices into [`UnitaryEigensystem::vectors`].
    pub members: Vec<usize>,
}

impl PhaseCluster {
    pub fn dim(&self) -> usize {
        self.members.len()
    }
}

#[derive(Debug, Clone)]
pub struct UnitaryEigensystem {
    /// Eigenphases in `(-pi, pi]`, ascending.
    pub phases: Vec<f64>,
    /// Orthonormal eigenvectors; column `m` belongs to `phases[m]`.
    pub vectors: ComplexMatrix,
    /// Clusters ordered by phase.
    pub clusters: Vec<PhaseCluster>,
    /// `max_m ||W psi_m - e^{i omega_m} psi_m||`.
    pub residual: f64,
}

/// Probability mass of a state on one eigenspace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClusterProbability {
    pub phase: f64,
    pub p: f64,
    pub dim: usize,
}

/// Maps any angle into `(-pi, pi]`.
pub fn wrap_phase(x: f64) -> f64 {
    let mut y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y -= 2.0 * PI;
    }
    if y <= -PI {
        y += 2.0 * PI;
    }
    y
}

/// Shortest distance between two angles on the circle.
pub fn circular_distance(a: f64, b: f64) -> f64 {
    wrap_phase(a - b).abs()
}

pub fn unitary_eig(w: &ComplexMatrix, tol: f64, cluster_tol: f64) -> Result<UnitaryEigensystem> {
    unitary_eig_with(w, &UnitaryEigOptions { tol, cluster_tol, ..Default::default() })
}

pub fn unitary_eig_with(w: &ComplexMatrix, opts: &UnitaryEigOptions) -> Result<UnitaryEigensystem> {
    if !w.is_square() {
        return Err(Error::NotSquare { rows: w.rows(), cols: w.cols() });
    }
    let n = w.rows();
    let defect = w.unitarity_defect();
    if !(defect <= opts.unitarity_tol) {
        return Err(Error::NotUnitary { defect });
    }

    // H_R = (W + W^H)/2, H_I = (W - W^H)/(2i)
    let h_re = ComplexMatrix::from_fn(n, n, |i, j| (w[(i, j)] + w[(j, i)].conj()) * 0.5);
    let h_im = ComplexMatrix::from_fn(n, n, |i, j| (w[(i, j)] - w[(j, i)].conj()) * C64::new(0.0, -0.5));

    let re_eig = match opts.solver {
        HermitianSolver::Jacobi => hermitian_eig(&h_re, opts.tol)?,
        HermitianSolver::Tridiagonal => hermitian_eig_tridiagonal(&h_re)?,
    };
    let mut vectors = re_eig.vectors;

    let split = opts.cluster_tol.max(SPLIT_TOL);
    for group in consecutive_groups(&re_eig.values, split) {
        if group.len() > 1 {
            refine_group(&mut vectors, &group, &h_im, &h_re, split, opts.tol)?;
        }
    }

    let wv = w.matmul(&vectors);
    let mut phases = Vec::with_capacity(n);
    for m in 0..n {
        let mut z = C64::new(0.0, 0.0);
        for i in 0..n {
            z += vectors[(i, m)].conj() * wv[(i, m)];
        }
        phases.push(wrap_phase(z.im.atan2(z.re)));
    }
    let mut residual = 0.0f64;
    for m in 0..n {
        let e = C64::from_polar(1.0, phases[m]);
        let r: f64 = (0..n).map(|i| (wv[(i, m)] - e * vectors[(i, m)]).norm_sqr()).sum();
        residual = residual.max(r.sqrt());
    }
    if !(residual < opts.residual_gate) {
        return Err(Error::ResidualGate { residual, gate: opts.residual_gate });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| phases[a].total_cmp(&phases[b]));
    let phases: Vec<f64> = order.iter().map(|&k| phases[k]).collect();
    let vectors = vectors.select_columns(&order);
    let clusters = cluster_phases(&phases, opts.cluster_tol);

    Ok(UnitaryEigensystem { phases, vectors, clusters, residual })
}

/// Re-diagonalizes the columns `group` of `vectors` with the compression
/// of `first`, then splits still-close subgroups with `second`.
fn refine_group(
    vectors: &mut ComplexMatrix,
    group: &[usize],
    first: &ComplexMatrix,
    second: &ComplexMatrix,
    split: f64,
    tol: f64,
) -> Result<()> {
    let basis = vectors.select_columns(group);
    let compressed = basis.adjoint_matmul(&first.matmul(&basis));
    let compressed = compressed.add(&compressed.adjoint()).scale(C64::new(0.5, 0.0));
    let sub = hermitian_eig(&compressed, tol)?;
    let rotated = basis.matmul(&sub.vectors);
    let n = vectors.rows();
    for (k, &col) in group.iter().enumerate() {
        for i in 0..n {
            vectors[(i, col)] = rotated[(i, k)];
        }
    }
    for inner_group in consecutive_groups(&sub.values, split) {
        if inner_group.len() > 1 {
            let cols: Vec<usize> = inner_group.iter().map(|&k| group[k]).collect();
            let basis = vectors.select_columns(&cols);
            let compressed = basis.adjoint_matmul(&second.matmul(&basis));
            let compressed = compressed.add(&compressed.adjoint()).scale(C64::new(0.5, 0.0));
            let rotated = basis.matmul(&hermitian_eig(&compressed, tol)?.vectors);
            for (k, &col) in cols.iter().enumerate() {
                for i in 0..n {
                    vectors[(i, col)] = rotated[(i, k)];
                }
            }
        }
    }
    Ok(())
}

fn consecutive_groups(sorted: &[f64], tol: f64) -> Vec<Vec<usize>> {
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (i, &x) in sorted.iter().enumerate() {
        match groups.last_mut() {
            Some(g) if x - sorted[*g.last().unwrap()] <= tol => g.push(i),
            _ => groups.push(vec![i]),
        }
    }
    groups
}

/// Clusters ascending phases on the circle, joining across `+-pi`.
pub fn cluster_phases(sorted_phases: &[f64], tol: f64) -> Vec<PhaseCluster> {
    let mut groups = consecutive_groups(sorted_phases, tol);
    if groups.len() > 1 {
        let first = sorted_phases[0];
        let last = sorted_phases[sorted_phases.len() - 1];
        if first + 2.0 * PI - last <= tol {
            let head = groups.remove(0);
            groups.last_mut().unwrap().extend(head);
        }
    }
    let mut clusters: Vec<PhaseCluster> = groups
        .into_iter()
        .map(|members| {
            let s: C64 = members.iter().map(|&m| C64::from_polar(1.0, sorted_phases[m])).sum();
            PhaseCluster { phase: wrap_phase(s.im.atan2(s.re)), members }
        })
        .collect();
    clusters.sort_by(|a, b| a.phase.total_cmp(&b.phase));
    clusters
}

impl UnitaryEigensystem {
    pub fn dim(&self) -> usize {
        self.phases.len()
    }

    /// Orthonormal basis of one cluster's eigenspace, as columns.
    pub fn cluster_basis(&self, cluster: &PhaseCluster) -> ComplexMatrix {
        self.vectors.select_columns(&cluster.members)
    }

    /// `V diag(e^{i omega}) V^H`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.dim();
        let mut scaled = self.vectors.clone();
        for m in 0..n {
            let e = C64::from_polar(1.0, self.phases[m]);
            for i in 0..n {
                scaled[(i, m)] *= e;
            }
        }
        scaled.matmul(&self.vectors.adjoint())
    }

    /// Orthogonal projection of `phi` onto a cluster's eigenspace.
    pub fn project(&self, cluster: &PhaseCluster, phi: &[C64]) -> Vec<C64> {
        let n = self.dim();
        let mut out = vec![C64::new(0.0, 0.0); n];
        for &m in &cluster.members {
            let col = self.vectors.column(m);
            let c = inner(&col, phi);
            for i in 0..n {
                out[i] += col[i] * c;
            }
        }
        out
    }

    /// Largest `<psi|Q|psi>` over unit vectors `psi` in each cluster's
    /// eigenspace, where `Q` projects onto the coordinate slots `slots`.
    /// For one-dimensional clusters this is the plain weight of the
    /// eigenvector on those slots.
    pub fn cluster_max_slot_weight(&self, slots: &[usize]) -> Result<Vec<ClusterProbability>> {
        let n = self.dim();
        if let Some(&bad) = slots.iter().find(|&&s| s >= n) {
            return Err(Error::DimensionMismatch { expected: n, got: bad + 1 });
        }
        let mut out = Vec::with_capacity(self.clusters.len());
        for c in &self.clusters {
            let k = c.dim();
            let gram = ComplexMatrix::from_fn(k, k, |a, b| {
                slots.iter().map(|&s| self.vectors[(s, c.members[a])].conj() * self.vectors[(s, c.members[b])]).sum()
            });
            let p = if k == 1 {
                gram[(0, 0)].re
            } else {
                let e = hermitian_eig(&gram, DEFAULT_JACOBI_TOL)?;
                *e.values.last().unwrap()
            };
            out.push(ClusterProbability { phase: c.phase, p: p.clamp(0.0, 1.0), dim: k });
        }
        Ok(out)
    }
}

/// Squared norm of the projection of `phi` onto each eigenspace.
pub fn eigenspace_projection_probability(sys: &UnitaryEigensystem, phi: &[C64]) -> Result<Vec<ClusterProbability>> {
    if phi.len() != sys.dim() {
        return Err(Error::DimensionMismatch { expected: sys.dim(), got: phi.len() });
    }
    let overlaps: Vec<f64> = (0..sys.dim()).map(|m| inner(&sys.vectors.column(m), phi).norm_sqr()).collect();
    Ok(sys
        .clusters
        .iter()
        .map(|c| ClusterProbability { phase: c.phase, p: c.members.iter().map(|&m| overlaps[m]).sum(), dim: c.dim() })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::matrix::{ONE, ZERO};

    fn swap12_on3() -> ComplexMatrix {
        ComplexMatrix::from_fn(3, 3, |i, j| match (i, j) {
            (0, 1) | (1, 0) | (2, 2) => ONE,
            _ => ZERO,
        })
    }

    #[test]
    fn identity_gives_one_zero_phase_cluster() {
        let s = unitary_eig(&ComplexMatrix::identity(4), 1e-12, 1e-8).unwrap();
        assert!(s.phases.iter().all(|&p| p == 0.0));
        assert_eq!(s.clusters.len(), 1);
        assert_eq!(s.clusters[0].dim(), 4);
    }

    #[test]
    fn two_cycle_eigenstructure() {
        let s = unitary_eig(&swap12_on3(), 1e-12, 1e-8).unwrap();
        assert_eq!(s.clusters.len(), 2);
        let pi_cluster = s.clusters.iter().find(|c| (c.phase - PI).abs() < 1e-12).unwrap();
        assert_eq!(pi_cluster.dim(), 1);
        let v = s.vectors.column(pi_cluster.members[0]);
        // (e1 - e2)/sqrt(2) up to a global phase
        assert!((v[0] + v[1]).norm() < 1e-12);
        assert!((v[0].norm() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert!(v[2].norm() < 1e-12);
        let zero = s.clusters.iter().find(|c| c.phase.abs() < 1e-12).unwrap();
        assert_eq!(zero.dim(), 2);
    }

    #[test]
    fn swap_projection_splits_evenly() {
        let s = unitary_eig(&swap12_on3(), 1e-12, 1e-8).unwrap();
        let probs = eigenspace_projection_probability(&s, &[ONE, ZERO, ZERO]).unwrap();
        for cp in &probs {
            assert!((cp.p - 0.5).abs() < 1e-12, "{cp:?}");
        }
    }

    #[test]
    fn minus_pi_is_reported_as_plus_pi() {
        assert_eq!(wrap_phase(-PI), PI);
        assert_eq!(wrap_phase(3.0 * PI), PI);
        let m = ComplexMatrix::from_diagonal(&[C64::new(-1.0, -0.0), ONE]);
        let s = unitary_eig(&m, 1e-12, 1e-8).unwrap();
        assert_eq!(s.phases, vec![0.0, PI]);
    }

    #[test]
    fn clusters_join_across_the_branch_cut() {
        let phases = [-PI + 1e-10, -1.0, 0.5, PI];
        let cl = cluster_phases(&phases, 1e-8);
        assert_eq!(cl.len(), 3);
        let wrapped = cl.iter().find(|c| c.dim() == 2).unwrap();
        assert!(circular_distance(wrapped.phase, PI) < 1e-9);
    }

    #[test]
    fn rejects_non_unitary_with_defect() {
        let m = ComplexMatrix::from_diagonal(&[ONE, C64::new(0.5, 0.0)]);
        match unitary_eig(&m, 1e-12, 1e-8) {
            Err(Error::NotUnitary { defect }) => assert!((defect - 0.75).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn conjugate_phase_pairs_are_separated() {
        // diag(e^{i a}, e^{-i a}) rotated by a real orthogonal matrix: H_R is
        // cos(a) I, only H_I tells the two apart.
        let a = 0.7;
        let d = ComplexMatrix::from_diagonal(&[C64::from_polar(1.0, a), C64::from_polar(1.0, -a)]);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let q = ComplexMatrix::from_row_major(
            2,
            2,
            vec![C64::new(h, 0.0), C64::new(h, 0.0), C64::new(h, 0.0), C64::new(-h, 0.0)],
        )
        .unwrap();
        let w = q.matmul(&d).matmul(&q.adjoint());
        let s = unitary_eig(&w, 1e-12, 1e-8).unwrap();
        assert!((s.phases[0] + a).abs() < 1e-12);
        assert!((s.phases[1] - a).abs() < 1e-12);
        assert!(s.residual < 1e-12);
    }

    #[test]
    fn projection_dimension_mismatch() {
        let s = unitary_eig(&ComplexMatrix::identity(2), 1e-12, 1e-8).unwrap();
        assert!(eigenspace_projection_probability(&s, &[ONE]).is_err());
    }
}
