use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig_tridiagonal, norm_sqr, ComplexMatrix, HermitianEigen, C64};
use crate::sector::{SectorBasis, SectorState, NORM_TOL};

/// Largest qubit count the brute-force path accepts.
pub const FULL_SPACE_CAP: usize = 12;

pub(crate) fn check_cap(n: usize) -> Result<()> {
    if n == 0 || n > FULL_SPACE_CAP {
        return Err(Error::CapExceeded { n, cap: FULL_SPACE_CAP });
    }
    Ok(())
}

/// Basis index of the state with exactly the given sites up.
/// Bit `j - 1` of the index is site `j` (little-endian).
pub fn site_index(sites: &[usize]) -> usize {
    sites.iter().fold(0, |acc, &s| acc | 1 << (s - 1))
}

/// Spin configuration of an index, site 1 first, `1` for up.
pub fn bitstring(index: usize, n: usize) -> String {
    (0..n).map(|b| if index >> b & 1 == 1 { '1' } else { '0' }).collect()
}

/// State of `n` qubits, indexed by bit patterns.
#[derive(Debug, Clone, PartialEq)]
pub struct FullState {
    n: usize,
    amplitudes: Vec<C64>,
}

impl FullState {
    pub fn new(n: usize, amplitudes: Vec<C64>) -> Result<Self> {
        check_cap(n)?;
        if amplitudes.len() != 1 << n {
            return Err(Error::DimensionMismatch { expected: 1 << n, got: amplitudes.len() });
        }
        let n2 = norm_sqr(&amplitudes);
        if (n2 - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(n2));
        }
        Ok(Self { n, amplitudes })
    }

    pub fn basis(n: usize, index: usize) -> Result<Self> {
        check_cap(n)?;
        if index >= 1 << n {
            return Err(Error::DimensionMismatch { expected: 1 << n, got: index + 1 });
        }
        let mut amps = vec![C64::new(0.0, 0.0); 1 << n];
        amps[index] = C64::new(1.0, 0.0);
        Ok(Self { n, amplitudes: amps })
    }

    /// Embeds a sector state: `|0^>` is index 0, `|j^>` is `1 << (j - 1)`.
    pub fn from_sector(state: &SectorState) -> Result<Self> {
        let basis = state.basis();
        check_cap(basis.n())?;
        let mut amps = vec![C64::new(0.0, 0.0); 1 << basis.n()];
        for (slot, &a) in state.amplitudes().iter().enumerate() {
            amps[sector_slot_index(basis, slot)] += a;
        }
        Ok(Self { n: basis.n(), amplitudes: amps })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.amplitudes)
    }

    /// Amplitudes on the sector slots, in sector order.
    pub fn project_to_sector(&self, basis: SectorBasis) -> Result<Vec<C64>> {
        if basis.n() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: basis.n() });
        }
        Ok((0..basis.dim()).map(|s| self.amplitudes[sector_slot_index(basis, s)]).collect())
    }

    /// Mean number of up spins.
    pub fn magnon_number(&self) -> f64 {
        self.amplitudes.iter().enumerate().map(|(i, a)| i.count_ones() as f64 * a.norm_sqr()).sum()
    }

    /// Nonzero amplitudes as `(bitstring, amplitude)`, ascending index.
    pub fn support(&self, tol: f64) -> Vec<(String, C64)> {
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm() > tol)
            .map(|(i, &a)| (bitstring(i, self.n), a))
            .collect()
    }
}

/// Full-space index of a sector slot.
pub fn sector_slot_index(basis: SectorBasis, slot: usize) -> usize {
    match basis.zero_slot() {
        Some(z) if z == slot => 0,
        _ => 1 << (slot - basis.offset()),
    }
}

/// Sparse operator on `n` qubits, stored by rows.
#[derive(Debug, Clone, PartialEq)]
pub struct FullOperator {
    n: usize,
    rows: Vec<Vec<(usize, C64)>>,
}

impl FullOperator {
    /// Builds from `(row, col, value)` triplets; duplicates add up and
    /// exact zeros are dropped.
    pub fn from_triplets(n: usize, entries: impl IntoIterator<Item = (usize, usize, C64)>) -> Result<Self> {
        check_cap(n)?;
        let dim = 1 << n;
        let mut rows: Vec<Vec<(usize, C64)>> = vec![Vec::new(); dim];
        for (i, j, v) in entries {
            if i >= dim || j >= dim {
                return Err(Error::DimensionMismatch { expected: dim, got: i.max(j) + 1 });
            }
            rows[i].push((j, v));
        }
        for row in rows.iter_mut() {
            row.sort_by_key(|&(j, _)| j);
            let mut merged: Vec<(usize, C64)> = Vec::with_capacity(row.len());
            for &(j, v) in row.iter() {
                match merged.last_mut() {
                    Some((k, w)) if *k == j => *w += v,
                    _ => merged.push((j, v)),
                }
            }
            merged.retain(|&(_, v)| v != C64::new(0.0, 0.0));
            *row = merged;
        }
        Ok(Self { n, rows })
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::from_triplets(n, (0..1 << n).map(|i| (i, i, C64::new(1.0, 0.0))))
    }

    /// Operator sending `|x>` to `|f(x)>`; `f` must be a bijection.
    pub fn from_permutation(n: usize, f: impl Fn(usize) -> usize) -> Result<Self> {
        Self::from_triplets(n, (0..1 << n).map(|x| (f(x), x, C64::new(1.0, 0.0))))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, i: usize) -> &[(usize, C64)] {
        &self.rows[i]
    }

    pub fn entry(&self, i: usize, j: usize) -> C64 {
        match self.rows[i].binary_search_by_key(&j, |&(k, _)| k) {
            Ok(p) => self.rows[i][p].1,
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn apply(&self, v: &[C64]) -> Result<Vec<C64>> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: v.len() });
        }
        Ok(self.rows.iter().map(|row| row.iter().map(|&(j, a)| a * v[j]).sum()).collect())
    }

    pub fn apply_state(&self, s: &FullState) -> Result<FullState> {
        Ok(FullState { n: self.n, amplitudes: self.apply(s.amplitudes())? })
    }

    /// `self * other`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: other.n });
        }
        let mut entries = Vec::new();
        for (i, row) in self.rows.iter().enumerate() {
            for &(k, a) in row {
                for &(j, b) in &other.rows[k] {
                    entries.push((i, j, a * b));
                }
            }
        }
        Self::from_triplets(self.n, entries)
    }

    pub fn adjoint(&self) -> Self {
        let mut rows: Vec<Vec<(usize, C64)>> = vec![Vec::new(); self.dim()];
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, a) in row {
                rows[j].push((i, a.conj()));
            }
        }
        Self { n: self.n, rows }
    }

    pub fn to_dense(&self) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(self.dim(), self.dim());
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, a) in row {
                m[(i, j)] = a;
            }
        }
        m
    }

    /// Largest `|A_ij - conj(A_ji)|`.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, a) in row {
                worst = worst.max((a - self.entry(j, i).conj()).norm());
            }
        }
        worst
    }

    /// Largest entry of `|self^2 - I|`.
    pub fn involution_defect(&self) -> f64 {
        let sq = self.compose(self).expect("same size");
        let mut worst = 0.0f64;
        for i in 0..self.dim() {
            worst = worst.max((sq.entry(i, i) - C64::new(1.0, 0.0)).norm());
            for &(j, a) in sq.row(i) {
                if j != i {
                    worst = worst.max(a.norm());
                }
            }
        }
        worst
    }

    /// One entry equal to 1 in every row and column, zeros elsewhere.
    pub fn is_permutation(&self) -> bool {
        let mut seen = vec![false; self.dim()];
        for row in &self.rows {
            if row.len() != 1 || row[0].1 != C64::new(1.0, 0.0) || seen[row[0].0] {
                return false;
            }
            seen[row[0].0] = true;
        }
        true
    }

    /// Largest entry of `[A, M]` with `M` the up-spin count.
    pub fn magnon_commutator_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, a) in row {
                let d = j.count_ones() as f64 - i.count_ones() as f64;
                worst = worst.max((a * d).norm());
            }
        }
        worst
    }

    /// Compression onto the sector slots, in sector order.
    pub fn restrict_to_sector(&self, basis: SectorBasis) -> Result<ComplexMatrix> {
        if basis.n() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: basis.n() });
        }
        let idx: Vec<usize> = (0..basis.dim()).map(|s| sector_slot_index(basis, s)).collect();
        Ok(ComplexMatrix::from_fn(basis.dim(), basis.dim(), |a, b| self.entry(idx[a], idx[b])))
    }

    /// Groups of basis indices that the operator connects, each sorted.
    pub fn connected_blocks(&self) -> Vec<Vec<usize>> {
        let dim = self.dim();
        let mut parent: Vec<usize> = (0..dim).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, _) in row {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        let mut slot = vec![usize::MAX; dim];
        for i in 0..dim {
            let r = find(&mut parent, i);
            if slot[r] == usize::MAX {
                slot[r] = blocks.len();
                blocks.push(Vec::new());
            }
            blocks[slot[r]].push(i);
        }
        blocks
    }
}

/// Eigendecomposition of a Hermitian [`FullOperator`], block by block.
/// A block is diagonalized the first time a state touches it.
#[derive(Debug)]
pub struct FullSpectrum {
    n: usize,
    blocks: Vec<Vec<usize>>,
    // (block, position inside block) for every basis index
    location: Vec<(usize, usize)>,
    dense: Vec<ComplexMatrix>,
    eig: Vec<OnceLock<Result<HermitianEigen>>>,
}

impl FullSpectrum {
    pub fn new(h: &FullOperator) -> Result<Self> {
        let defect = h.hermitian_defect();
        if defect > 1e-12 {
            return Err(Error::NotHermitian { defect });
        }
        let blocks = h.connected_blocks();
        let mut location = vec![(0, 0); h.dim()];
        for (b, members) in blocks.iter().enumerate() {
            for (p, &i) in members.iter().enumerate() {
                location[i] = (b, p);
            }
        }
        let dense = blocks
            .iter()
            .map(|members| ComplexMatrix::from_fn(members.len(), members.len(), |a, b| h.entry(members[a], members[b])))
            .collect();
        let eig = blocks.iter().map(|_| OnceLock::new()).collect();
        Ok(Self { n: h.n(), blocks, location, dense, eig })
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    fn block_eig(&self, b: usize) -> Result<&HermitianEigen> {
        self.eig[b].get_or_init(|| hermitian_eig_tridiagonal(&self.dense[b])).as_ref().map_err(Clone::clone)
    }

    /// `exp(-i H tau) |state>`.
    pub fn evolve(&self, state: &FullState, tau: f64) -> Result<FullState> {
        if state.n() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: state.n() });
        }
        if tau == 0.0 {
            return Ok(state.clone());
        }
        let amps = state.amplitudes();
        let mut out = vec![C64::new(0.0, 0.0); amps.len()];
        let mut touched = vec![false; self.blocks.len()];
        for (i, a) in amps.iter().enumerate() {
            if *a != C64::new(0.0, 0.0) {
                touched[self.location[i].0] = true;
            }
        }
        for (b, members) in self.blocks.iter().enumerate() {
            if !touched[b] {
                continue;
            }
            let e = self.block_eig(b)?;
            let local: Vec<C64> = members.iter().map(|&i| amps[i]).collect();
            // V diag(exp(-i lambda tau)) V^H local
            let k = members.len();
            let mut coeff = vec![C64::new(0.0, 0.0); k];
            for m in 0..k {
                let c: C64 = (0..k).map(|i| e.vectors[(i, m)].conj() * local[i]).sum();
                coeff[m] = c * C64::from_polar(1.0, -e.values[m] * tau);
            }
            for (i, &idx) in members.iter().enumerate() {
                out[idx] = (0..k).map(|m| e.vectors[(i, m)] * coeff[m]).sum();
            }
        }
        Ok(FullState { n: self.n, amplitudes: out })
    }

    /// Dense `exp(-i H tau)`; meant for small `n`.
    pub fn propagator_dense(&self, tau: f64) -> Result<ComplexMatrix> {
        let dim = 1 << self.n;
        let mut u = ComplexMatrix::zeros(dim, dim);
        for (b, members) in self.blocks.iter().enumerate() {
            let e = self.block_eig(b)?;
            let k = members.len();
            for (a, &ia) in members.iter().enumerate() {
                for (c, &ic) in members.iter().enumerate() {
                    u[(ia, ic)] = (0..k)
                        .map(|m| {
                            e.vectors[(a, m)] * C64::from_polar(1.0, -e.values[m] * tau) * e.vectors[(c, m)].conj()
                        })
                        .sum();
                }
            }
        }
        Ok(u)
    }
}

/// `exp(-i H tau) |state>` through a fresh block decomposition.
pub fn full_evolve(h: &FullOperator, state: &FullState, tau: f64) -> Result<FullState> {
    FullSpectrum::new(h)?.evolve(state, tau)
}
