//! Zero- and one-magnon sector of a periodic spin-1/2 ring.
//!
//! Slot layout: when the zero-magnon state `|0^>` (all spins down) is
//! included it occupies slot 0, and the single-flip states `|j^>`,
//! `j = 1..=N`, follow in site order. Without it, `|j^>` sits in slot
//! `j - 1`. One-magnon code therefore only needs [`SectorBasis::offset`].

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{norm_sqr, ComplexMatrix, C64};

/// Tolerance on `sum |amplitude|^2 = 1`.
pub const NORM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SectorBasis {
    n: usize,
    include_zero: bool,
}

impl SectorBasis {
    pub fn new(n: usize, include_zero: bool) -> Result<Self> {
        if n < 3 || n % 2 == 0 {
            return Err(Error::InvalidChainLength(n));
        }
        Ok(Self { n, include_zero })
    }

    /// Number of sites.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn include_zero(&self) -> bool {
        self.include_zero
    }

    pub fn dim(&self) -> usize {
        self.n + usize::from(self.include_zero)
    }

    /// Receiver site `r = (N + 1) / 2`.
    pub fn receiver(&self) -> usize {
        (self.n + 1) / 2
    }

    /// Slot of `|1^>`.
    pub fn offset(&self) -> usize {
        usize::from(self.include_zero)
    }

    /// Slot holding `|j^>` for a 1-based site.
    pub fn site_slot(&self, site: usize) -> Result<usize> {
        if site == 0 || site > self.n {
            return Err(Error::SiteOutOfRange { site, n: self.n });
        }
        Ok(site - 1 + self.offset())
    }

    pub fn zero_slot(&self) -> Option<usize> {
        self.include_zero.then_some(0)
    }

    pub fn slot(&self, state: BasisLabel) -> Result<usize> {
        match state {
            BasisLabel::Zero => self.zero_slot().ok_or(Error::ZeroMagnonUnavailable),
            BasisLabel::Site(j) => self.site_slot(j),
        }
    }
}

/// Shorthand for [`SectorBasis::new`].
pub fn make_basis(n: usize, include_zero: bool) -> Result<SectorBasis> {
    SectorBasis::new(n, include_zero)
}

/// Names one computational basis state of the sector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BasisLabel {
    /// `|0^>`, every spin down.
    Zero,
    /// `|j^>`, only site `j` (1-based) flipped up.
    Site(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SectorState {
    basis: SectorBasis,
    amplitudes: Vec<C64>,
}

impl SectorState {
    /// Normalized state from raw amplitudes.
    pub fn new(basis: SectorBasis, amplitudes: Vec<C64>) -> Result<Self> {
        let s = Self::unnormalized(basis, amplitudes)?;
        let n2 = s.norm_sqr();
        if (n2 - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(n2));
        }
        Ok(s)
    }

    /// Intermediate vector with no norm constraint.
    pub fn unnormalized(basis: SectorBasis, amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.len() != basis.dim() {
            return Err(Error::DimensionMismatch { expected: basis.dim(), got: amplitudes.len() });
        }
        Ok(Self { basis, amplitudes })
    }

    /// Normalized superposition of labelled basis states.
    pub fn superposition(basis: SectorBasis, terms: &[(BasisLabel, C64)]) -> Result<Self> {
        let mut amps = vec![C64::new(0.0, 0.0); basis.dim()];
        for &(label, c) in terms {
            amps[basis.slot(label)?] += c;
        }
        Self::new(basis, amps)
    }

    pub fn basis(&self) -> SectorBasis {
        self.basis
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.amplitudes)
    }
}

/// Unit vector on one basis slot.
pub fn basis_state(basis: SectorBasis, label: BasisLabel) -> Result<SectorState> {
    let slot = basis.slot(label)?;
    let mut amps = vec![C64::new(0.0, 0.0); basis.dim()];
    amps[slot] = C64::new(1.0, 0.0);
    Ok(SectorState { basis, amplitudes: amps })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Xy,
    Xxz,
}

/// Hamiltonian parameters.
///
/// XY: `H = -J sum_j (Sx_j Sx_{j+1} + Sy_j Sy_{j+1})`.
/// XXZ: `H = J sum_j (Sx_j Sx_{j+1} + Sy_j Sy_{j+1} + Delta Sz_j Sz_{j+1}) + h sum_j Sz_j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub model: Model,
    pub coupling: f64,
    pub anisotropy: f64,
    pub field: f64,
}

impl ModelParams {
    pub fn xy(coupling: f64) -> Result<Self> {
        Self::checked(Model::Xy, coupling, 0.0, 0.0)
    }

    pub fn xxz(coupling: f64, anisotropy: f64, field: f64) -> Result<Self> {
        Self::checked(Model::Xxz, coupling, anisotropy, field)
    }

    fn checked(model: Model, coupling: f64, anisotropy: f64, field: f64) -> Result<Self> {
        if coupling == 0.0 || !coupling.is_finite() {
            return Err(Error::InvalidModel(format!("coupling J must be finite and nonzero, got {coupling}")));
        }
        if !anisotropy.is_finite() || !field.is_finite() {
            return Err(Error::InvalidModel("Delta and h must be finite".into()));
        }
        Ok(Self { model, coupling, anisotropy, field })
    }

    /// Nearest-neighbour hopping amplitude `<j|H|j+1>` in the one-magnon sector.
    pub fn hopping(&self) -> f64 {
        match self.model {
            Model::Xy => -0.5 * self.coupling,
            Model::Xxz => 0.5 * self.coupling,
        }
    }

    /// Diagonal energy shared by every one-magnon state.
    pub fn one_magnon_diagonal(&self, n: usize) -> f64 {
        match self.model {
            Model::Xy => 0.0,
            Model::Xxz => {
                let n = n as f64;
                self.coupling * self.anisotropy * (n - 4.0) / 4.0 + self.field * (2.0 - n) / 2.0
            }
        }
    }

    /// Energy of the all-down state.
    pub fn zero_magnon_energy(&self, n: usize) -> f64 {
        match self.model {
            Model::Xy => 0.0,
            Model::Xxz => {
                let n = n as f64;
                self.coupling * self.anisotropy * n / 4.0 - self.field * n / 2.0
            }
        }
    }
}

impl Default for ModelParams {
    fn default() -> Self {
        Self { model: Model::Xy, coupling: 1.0, anisotropy: 0.0, field: 0.0 }
    }
}

/// Eigenpairs of the sector Hamiltonian.
#[derive(Debug, Clone)]
pub struct SpectralData {
    pub basis: SectorBasis,
    /// `E_m` for `m = 1..=N`, stored at index `m - 1`.
    pub energies: Vec<f64>,
    /// `N x N`; column `m - 1` is the plane wave `Phi_m` over the sites.
    pub modes: ComplexMatrix,
    pub zero_energy: f64,
}

/// Plane-wave spectrum of the ring, valid for both XY and XXZ since the
/// XXZ sector matrix differs from XY only by sign and a diagonal shift.
pub fn sector_spectrum(basis: SectorBasis, params: &ModelParams) -> SpectralData {
    let n = basis.n();
    let nf = n as f64;
    let hop = params.hopping();
    let diag = params.one_magnon_diagonal(n);
    // A ring with hopping t has eigenvalues 2 t cos(2 pi m / N).
    let energies = (1..=n).map(|m| 2.0 * hop * (2.0 * PI * m as f64 / nf).cos() + diag).collect();
    let norm = 1.0 / nf.sqrt();
    let modes = ComplexMatrix::from_fn(n, n, |row, col| {
        let j = (row + 1) as f64;
        let m = (col + 1) as f64;
        C64::from_polar(norm, 2.0 * PI * m * j / nf)
    });
    SpectralData { basis, energies, modes, zero_energy: params.zero_magnon_energy(n) }
}

/// XY spectrum `E_m = -J cos(2 pi m / N)` with plane-wave modes.
pub fn xy_spectrum(basis: SectorBasis, params: &ModelParams) -> Result<SpectralData> {
    if params.model != Model::Xy {
        return Err(Error::InvalidModel("xy_spectrum requires the XY model".into()));
    }
    Ok(sector_spectrum(basis, params))
}

/// Dense sector Hamiltonian, including the zero-magnon slot when present.
pub fn one_magnon_hamiltonian(basis: SectorBasis, params: &ModelParams) -> ComplexMatrix {
    let n = basis.n();
    let off = basis.offset();
    let mut h = ComplexMatrix::zeros(basis.dim(), basis.dim());
    let hop = C64::new(params.hopping(), 0.0);
    let diag = C64::new(params.one_magnon_diagonal(n), 0.0);
    for j in 0..n {
        let k = (j + 1) % n;
        h[(off + j, off + k)] = hop;
        h[(off + k, off + j)] = hop;
        h[(off + j, off + j)] = diag;
    }
    if let Some(z) = basis.zero_slot() {
        h[(z, z)] = C64::new(params.zero_magnon_energy(n), 0.0);
    }
    h
}

impl SpectralData {
    /// Same eigenvectors, every energy shifted by `c`.
    pub fn shifted(&self, c: f64) -> Self {
        Self {
            basis: self.basis,
            energies: self.energies.iter().map(|e| e + c).collect(),
            modes: self.modes.clone(),
            zero_energy: self.zero_energy + c,
        }
    }

    /// `modes * diag(E) * modes^H` embedded in the sector basis.
    pub fn reconstruct_hamiltonian(&self) -> ComplexMatrix {
        self.spectral_sum(|e| C64::new(e, 0.0))
    }

    /// `U(tau) = exp(-i H tau)` with hbar = 1.
    pub fn propagator(&self, tau: f64) -> ComplexMatrix {
        if tau == 0.0 {
            return ComplexMatrix::identity(self.basis.dim());
        }
        self.spectral_sum(|e| C64::from_polar(1.0, -e * tau))
    }

    // The ring is translation invariant, so the one-magnon block is
    // circulant: entry (i, j) depends only on (i - j) mod N.
    fn spectral_sum(&self, f: impl Fn(f64) -> C64) -> ComplexMatrix {
        let n = self.basis.n();
        let off = self.basis.offset();
        let weights: Vec<C64> = self.energies.iter().map(|&e| f(e)).collect();
        let first: Vec<C64> = (0..n)
            .map(|d| {
                let row = self.modes.row(d);
                let origin = self.modes.row(0);
                (0..n).map(|m| row[m] * weights[m] * origin[m].conj()).sum()
            })
            .collect();
        let dim = self.basis.dim();
        let mut out = ComplexMatrix::zeros(dim, dim);
        for i in 0..n {
            for j in 0..n {
                out[(off + i, off + j)] = first[(i + n - j) % n];
            }
        }
        if let Some(z) = self.basis.zero_slot() {
            out[(z, z)] = f(self.zero_energy);
        }
        out
    }
}

/// Free-function form of [`SpectralData::propagator`].
pub fn propagator(spec: &SpectralData, tau: f64) -> ComplexMatrix {
    spec.propagator(tau)
}
