//! Brute-force `2^N` reference implementation.
//!
//! Basis index `x` has site `j` spin-up when bit `j - 1` of `x` is set.
//! Everything here is independent of the plane-wave fast path and is used
//! to check it.

mod gates;
mod operator;

pub use gates::{
    exchange_with_gate, gate_demos, local_gate_v_b, permutation_e_ab, GateDemo, LocalGate, ProcessorLayout,
};
pub use operator::{
    bitstring, full_evolve, sector_slot_index, site_index, FullOperator, FullSpectrum, FullState, FULL_SPACE_CAP,
};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exchange::{self, ExchangeKind, ExchangeSpec};
use crate::linalg::C64;
use crate::sector::{basis_state, sector_spectrum, BasisLabel, Model, ModelParams, SectorBasis};
use operator::check_cap;

/// Pass threshold for oracle deviations.
pub const ORACLE_TOL: f64 = 1e-10;

/// Spin-1/2 Hamiltonian of [`ModelParams`] on `n` sites.
///
/// Bonds are `(j, j + 1)` for `j < n`, plus `(n, 1)` when `periodic`.
pub fn full_hamiltonian(n: usize, params: &ModelParams, periodic: bool) -> Result<FullOperator> {
    check_cap(n)?;
    let (flip, zz, field) = match params.model {
        // S+S- + S-S+ = 2 (SxSx + SySy)
        Model::Xy => (-0.5 * params.coupling, 0.0, 0.0),
        Model::Xxz => (0.5 * params.coupling, params.coupling * params.anisotropy, params.field),
    };
    let mut bonds: Vec<(usize, usize)> = (0..n.saturating_sub(1)).map(|j| (j, j + 1)).collect();
    if periodic && n > 1 {
        bonds.push((n - 1, 0));
    }
    let mut entries = Vec::new();
    for x in 0..1usize << n {
        let sz = |b: usize| if x >> b & 1 == 1 { 0.5 } else { -0.5 };
        let mut diag = 0.0;
        for &(a, b) in &bonds {
            diag += zz * sz(a) * sz(b);
            if (x >> a & 1) != (x >> b & 1) {
                entries.push((x ^ (1 << a) ^ (1 << b), x, C64::new(flip, 0.0)));
            }
        }
        diag += field * (0..n).map(sz).sum::<f64>();
        entries.push((x, x, C64::new(diag, 0.0)));
    }
    FullOperator::from_triplets(n, entries)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivalenceReport {
    pub n: usize,
    pub model: ModelParams,
    /// Worst deviation per time, in input order.
    pub per_tau: Vec<(f64, f64)>,
    pub max_deviation: f64,
}

/// Evolves every sector basis state (zero-magnon included) in the full
/// space and compares the result, amplitude by amplitude over all `2^N`
/// entries, with the sector propagator.
pub fn sector_equivalence_check(n: usize, params: &ModelParams, taus: &[f64]) -> Result<EquivalenceReport> {
    check_cap(n)?;
    let basis = SectorBasis::new(n, true)?;
    let h = full_hamiltonian(n, params, true)?;
    let full = FullSpectrum::new(&h)?;
    let spectrum = sector_spectrum(basis, params);
    let labels: Vec<BasisLabel> = std::iter::once(BasisLabel::Zero).chain((1..=n).map(BasisLabel::Site)).collect();

    let mut per_tau = Vec::with_capacity(taus.len());
    for &tau in taus {
        let u = spectrum.propagator(tau);
        let mut worst = 0.0f64;
        for &label in &labels {
            let col = basis.slot(label)?;
            let evolved = full.evolve(&FullState::from_sector(&basis_state(basis, label)?)?, tau)?;
            let mut expected = vec![C64::new(0.0, 0.0); 1 << n];
            for row in 0..basis.dim() {
                expected[sector_slot_index(basis, row)] = u[(row, col)];
            }
            for (a, b) in evolved.amplitudes().iter().zip(&expected) {
                worst = worst.max((a - b).norm());
            }
        }
        per_tau.push((tau, worst));
    }
    let max_deviation = per_tau.iter().map(|&(_, d)| d).fold(0.0, f64::max);
    Ok(EquivalenceReport { n, model: *params, per_tau, max_deviation })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleCheck {
    pub name: String,
    pub n: usize,
    pub deviation: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub checks: Vec<OracleCheck>,
    pub max_deviation: f64,
    pub pass: bool,
}

impl OracleReport {
    pub fn render(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            let verdict = if c.pass { "PASS" } else { "FAIL" };
            s.push_str(&format!("{verdict}  N={:<2} {:<40} deviation {:.3e}\n", c.n, c.name, c.deviation));
        }
        s.push_str(&format!("{}  max deviation {:.3e}\n", if self.pass { "PASS" } else { "FAIL" }, self.max_deviation));
        s
    }
}

/// Sector equivalence for XY and XXZ(0.5, 0.2), magnon conservation and
/// the one-magnon restriction of `E_AB` for each `n`.
pub fn run_oracle(ns: &[usize], taus: &[f64]) -> Result<OracleReport> {
    if ns.is_empty() || taus.is_empty() {
        return Err(Error::InvalidGrid("oracle needs at least one N and one tau".into()));
    }
    for &n in ns {
        check_cap(n)?;
        SectorBasis::new(n, true)?;
    }
    let models = [("XY J=1", ModelParams::xy(1.0)?), ("XXZ J=1 Delta=0.5 h=0.2", ModelParams::xxz(1.0, 0.5, 0.2)?)];
    let mut checks = Vec::new();
    for &n in ns {
        for (label, params) in &models {
            let rep = sector_equivalence_check(n, params, taus)?;
            checks.push(OracleCheck {
                name: format!("sector propagator, {label}"),
                n,
                deviation: rep.max_deviation,
                pass: rep.max_deviation < ORACLE_TOL,
            });
            let h = full_hamiltonian(n, params, true)?;
            let d = h.magnon_commutator_defect();
            checks.push(OracleCheck { name: format!("[H, M] = 0, {label}"), n, deviation: d, pass: d < ORACLE_TOL });
        }
        let basis = SectorBasis::new(n, true)?;
        let r = basis.receiver();
        let e = permutation_e_ab(&ProcessorLayout::new(vec![1], vec![r], n)?, n)?;
        let p1 = exchange::build(&ExchangeSpec::new(ExchangeKind::P1, n), basis)?;
        let d = e.restrict_to_sector(basis)?.max_abs_diff(&p1.matrix);
        checks.push(OracleCheck { name: "E_AB restriction = P1".into(), n, deviation: d, pass: d < ORACLE_TOL });
    }
    let max_deviation = checks.iter().map(|c| c.deviation).fold(0.0, f64::max);
    let pass = checks.iter().all(|c| c.pass);
    Ok(OracleReport { checks, max_deviation, pass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ComplexMatrix;
    use crate::sector::one_magnon_hamiltonian;

    #[test]
    fn two_site_open_xy() {
        let h = full_hamiltonian(2, &ModelParams::xy(1.0).unwrap(), false).unwrap();
        assert_eq!(h.entry(0b01, 0b10), C64::new(-0.5, 0.0));
        assert_eq!(h.entry(0b10, 0b01), C64::new(-0.5, 0.0));
        assert_eq!(h.nnz(), 2);
    }

    #[test]
    fn restriction_matches_sector_matrix() {
        for params in [ModelParams::xy(1.0).unwrap(), ModelParams::xxz(0.7, 0.5, 0.2).unwrap()] {
            for n in [3, 5] {
                let basis = SectorBasis::new(n, true).unwrap();
                let h = full_hamiltonian(n, &params, true).unwrap();
                let restricted = h.restrict_to_sector(basis).unwrap();
                let direct = one_magnon_hamiltonian(basis, &params);
                assert!(restricted.max_abs_diff(&direct) < 1e-14);
                assert!(h.magnon_commutator_defect() == 0.0);
            }
        }
    }

    #[test]
    fn swap_gate_on_two_sites() {
        let e = permutation_e_ab(&ProcessorLayout::new(vec![1], vec![2], 2).unwrap(), 2).unwrap();
        assert!(e.is_permutation());
        assert_eq!(e.entry(0b10, 0b01), C64::new(1.0, 0.0));
        assert_eq!(e.entry(0b00, 0b00), C64::new(1.0, 0.0));
        assert_eq!(e.entry(0b11, 0b11), C64::new(1.0, 0.0));
    }

    #[test]
    fn layout_validation() {
        assert!(matches!(ProcessorLayout::new(vec![1, 2], vec![2, 3], 4), Err(Error::InvalidLayout(_))));
        assert!(matches!(ProcessorLayout::new(vec![1], vec![2, 3], 4), Err(Error::InvalidLayout(_))));
        assert!(matches!(ProcessorLayout::new(vec![1], vec![5], 4), Err(Error::SiteOutOfRange { .. })));
        let l = ProcessorLayout::new(vec![1, 2], vec![3, 4], 4).unwrap();
        assert!(matches!(local_gate_v_b(LocalGate::XxxFlip, &l, 4), Err(Error::ArityMismatch { .. })));
    }

    #[test]
    fn cap_is_enforced() {
        assert!(matches!(full_hamiltonian(13, &ModelParams::default(), true), Err(Error::CapExceeded { .. })));
        assert!(matches!(run_oracle(&[13], &[0.1]), Err(Error::CapExceeded { .. })));
    }

    #[test]
    fn evolution_at_zero_is_identity_and_conserves() {
        let h = full_hamiltonian(5, &ModelParams::xy(1.0).unwrap(), true).unwrap();
        let s = FullState::basis(5, site_index(&[2])).unwrap();
        assert_eq!(full_evolve(&h, &s, 0.0).unwrap().amplitudes(), s.amplitudes());
        let later = full_evolve(&h, &s, 3.7).unwrap();
        assert!((later.norm_sqr() - 1.0).abs() < 1e-12);
        assert!((later.magnon_number() - 1.0).abs() < 1e-12);
        let leak: f64 =
            later.amplitudes().iter().enumerate().filter(|(i, _)| i.count_ones() != 1).map(|(_, a)| a.norm_sqr()).sum();
        assert!(leak < 1e-24);
    }

    #[test]
    fn equivalence_small_chains() {
        let rep = sector_equivalence_check(5, &ModelParams::default(), &[0.0]).unwrap();
        assert_eq!(rep.max_deviation, 0.0);
        let rep = sector_equivalence_check(3, &ModelParams::default(), &[0.1, 1.0, 10.0]).unwrap();
        assert!(rep.max_deviation < ORACLE_TOL, "{}", rep.max_deviation);
    }

    #[test]
    fn remote_exchange_amplitudes() {
        let demos = gate_demos().unwrap();
        let rx = &demos[2];
        assert_eq!(rx.output.len(), 2);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let b01 = rx.output.iter().find(|o| o.1 == "01").unwrap();
        let b10 = rx.output.iter().find(|o| o.1 == "10").unwrap();
        assert!((b01.2 - h).abs() < 1e-15 && b01.3 == 0.0);
        assert!(b10.2 == 0.0 && (b10.3 + h).abs() < 1e-15);
        let amp = &demos[1];
        assert_eq!(amp.output.len(), 1);
        assert_eq!(amp.output[0].1, "111");
    }

    #[test]
    fn full_w_is_unitary() {
        let n = 4;
        let layout = ProcessorLayout::new(vec![1, 2], vec![3, 4], n).unwrap();
        let h = full_hamiltonian(n, &ModelParams::xxz(1.0, 0.5, 0.2).unwrap(), true).unwrap();
        let u = FullSpectrum::new(&h).unwrap().propagator_dense(0.8).unwrap();
        for gate in [LocalGate::Identity, LocalGate::RemoteExchange] {
            let p = exchange_with_gate(gate, &layout, n).unwrap().to_dense();
            let w: ComplexMatrix = p.matmul(&u);
            assert!(w.unitarity_defect() < 1e-10);
        }
    }
}
