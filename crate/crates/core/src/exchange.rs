//! Exchange operators `P_AB` on the sector basis.
//!
//! Pair-swap kinds (`p1`, `p3`, `pall`, explicit pair lists) are
//! permutation matrices. The entangling kinds (`pe`, `pe-prime`, `pes`)
//! map one source site onto an equal-weight superposition of target
//! sites. Written as `c |s><targets| + h.c. + identity elsewhere` they are
//! not unitary, so by default they are replaced by the reflection that
//! exchanges `|s>` with the normalized target vector and fixes the
//! orthogonal complement. `Completion::RawAsWritten` keeps the literal
//! matrix so its unitarity defect can be inspected.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64};
use crate::sector::SectorBasis;

/// Tolerance for the involution check `||P^2 - I|| < tol`.
pub const INVOLUTION_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ExchangeKind {
    /// `P = I`; a reference point where `W = U`.
    Identity,
    P1,
    P3,
    PAll,
    PE,
    PEPrime,
    PES,
    /// Explicit list of site pairs to swap.
    Pairs(Vec<(usize, usize)>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Completion {
    UnitaryCompletion,
    RawAsWritten,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ExchangeSpec {
    pub kind: ExchangeKind,
    pub n: usize,
    pub completion: Completion,
    /// Permits `pe-prime` on N = 3, where site 2 is both source and
    /// receiver `r`.
    pub allow_degenerate: bool,
}

/// Source/target description of an entangling kind.
#[derive(Debug, Clone, PartialEq)]
struct Spread {
    source: usize,
    targets: Vec<usize>,
    // prefactor of the literal expression
    literal_weight: f64,
}

impl ExchangeSpec {
    pub fn new(kind: ExchangeKind, n: usize) -> Self {
        Self { kind, n, completion: Completion::UnitaryCompletion, allow_degenerate: false }
    }

    pub fn raw(mut self) -> Self {
        self.completion = Completion::RawAsWritten;
        self
    }

    pub fn degenerate(mut self) -> Self {
        self.allow_degenerate = true;
        self
    }

    /// Same kind and flags on a different chain length.
    pub fn with_n(&self, n: usize) -> Self {
        Self { n, ..self.clone() }
    }

    fn receiver(&self) -> usize {
        (self.n + 1) / 2
    }

    /// Site pairs swapped by the permutation kinds, after dropping
    /// self-pairs. `None` for the entangling kinds.
    pub fn swap_pairs(&self) -> Option<Vec<(usize, usize)>> {
        let n = self.n;
        let r = self.receiver();
        let pairs = match &self.kind {
            ExchangeKind::Identity => vec![],
            ExchangeKind::P1 => vec![(1, r)],
            ExchangeKind::P3 => vec![(1, r), (2, r - 1), (n, r + 1)],
            ExchangeKind::PAll => {
                let (m1, m2) = if ((n - 3) / 2) % 2 == 0 {
                    ((n + 1) / 4, (3 * n - 1) / 4)
                } else {
                    ((n - 1) / 4, (3 * n + 1) / 4)
                };
                let first = (1..=m1).map(|j| (j, r + 1 - j));
                let second = (r + 1..=m2).map(|j| (j, n + r + 1 - j));
                first.chain(second).filter(|(a, b)| a != b).collect()
            }
            ExchangeKind::Pairs(p) => p.clone(),
            ExchangeKind::PE | ExchangeKind::PEPrime | ExchangeKind::PES => return None,
        };
        Some(pairs)
    }

    fn spread(&self) -> Option<Spread> {
        let n = self.n;
        let r = self.receiver();
        let half = std::f64::consts::FRAC_1_SQRT_2;
        match self.kind {
            ExchangeKind::PE => Some(Spread { source: 1, targets: vec![r, r + 1], literal_weight: half }),
            ExchangeKind::PEPrime => Some(Spread { source: 2, targets: vec![1, r], literal_weight: half }),
            ExchangeKind::PES => {
                Some(Spread { source: 1, targets: (2..=n).collect(), literal_weight: 1.0 / (n as f64).sqrt() })
            }
            _ => None,
        }
    }

    /// Sites of the sending processor.
    pub fn sender_sites(&self) -> Vec<usize> {
        match &self.kind {
            ExchangeKind::P3 => vec![1, 2, self.n],
            ExchangeKind::PAll => (1..=self.receiver()).collect(),
            ExchangeKind::Pairs(p) => p.iter().map(|&(a, _)| a).collect(),
            _ => match self.spread() {
                Some(s) => vec![s.source],
                None => vec![1],
            },
        }
    }

    /// Site whose single-flip state is the natural initial state.
    pub fn default_initial_site(&self) -> usize {
        self.sender_sites()[0]
    }

    /// Multi-site probability targets used by default (`p3`, `pall`).
    pub fn default_target_sites(&self) -> Option<Vec<usize>> {
        match self.kind {
            ExchangeKind::P3 | ExchangeKind::PAll => Some(self.sender_sites()),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n;
        if n < 3 || n % 2 == 0 {
            return Err(Error::InvalidChainLength(n));
        }
        match self.kind {
            ExchangeKind::P3 if n < 7 => {
                return Err(Error::SiteCollision(format!(
                    "p3 needs N >= 7 so that sites 1, 2, N, r-1, r, r+1 are distinct (N = {n})"
                )))
            }
            ExchangeKind::PEPrime if n < 5 && !self.allow_degenerate => {
                return Err(Error::SiteCollision(format!(
                    "pe-prime needs N >= 5 so that sites 1, 2, r are distinct (N = {n}); \
                     pass the degenerate-case flag to build it anyway"
                )))
            }
            _ => {}
        }
        if let Some(pairs) = self.swap_pairs() {
            let mut seen = BTreeSet::new();
            for &(a, b) in &pairs {
                for s in [a, b] {
                    if s == 0 || s > n {
                        return Err(Error::SiteOutOfRange { site: s, n });
                    }
                }
                if a == b {
                    return Err(Error::SiteCollision(format!("pair ({a}, {b}) swaps a site with itself")));
                }
                if !seen.insert(a) || !seen.insert(b) {
                    return Err(Error::SiteCollision(format!("pairs overlap at ({a}, {b})")));
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for ExchangeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExchangeKind::Identity => f.write_str("identity"),
            ExchangeKind::P1 => f.write_str("p1"),
            ExchangeKind::P3 => f.write_str("p3"),
            ExchangeKind::PAll => f.write_str("pall"),
            ExchangeKind::PE => f.write_str("pe"),
            ExchangeKind::PEPrime => f.write_str("pe-prime"),
            ExchangeKind::PES => f.write_str("pes"),
            ExchangeKind::Pairs(p) => {
                f.write_str("pairs:")?;
                let items: Vec<String> = p.iter().map(|(a, b)| format!("{a}-{b}")).collect();
                f.write_str(&items.join(","))
            }
        }
    }
}

impl FromStr for ExchangeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        Ok(match lower.as_str() {
            "identity" => ExchangeKind::Identity,
            "p1" => ExchangeKind::P1,
            "p3" => ExchangeKind::P3,
            "pall" => ExchangeKind::PAll,
            "pe" => ExchangeKind::PE,
            "pe-prime" | "peprime" => ExchangeKind::PEPrime,
            "pes" => ExchangeKind::PES,
            other => {
                let list = other.strip_prefix("pairs:").ok_or_else(|| {
                    Error::Parse(format!(
                        "unknown exchange '{s}' (expected identity, p1, p3, pall, pe, pe-prime, pes or pairs:a-b,...)"
                    ))
                })?;
                let mut pairs = Vec::new();
                for item in list.split(',').filter(|x| !x.is_empty()) {
                    let (a, b) =
                        item.split_once('-').ok_or_else(|| Error::Parse(format!("bad pair '{item}', expected a-b")))?;
                    let a = a.trim().parse().map_err(|_| Error::Parse(format!("bad site '{a}'")))?;
                    let b = b.trim().parse().map_err(|_| Error::Parse(format!("bad site '{b}'")))?;
                    pairs.push((a, b));
                }
                if pairs.is_empty() {
                    return Err(Error::Parse("pairs: list is empty".into()));
                }
                ExchangeKind::Pairs(pairs)
            }
        })
    }
}

#[derive(Debug, Clone)]
pub struct ExchangeOperator {
    pub spec: ExchangeSpec,
    pub basis: SectorBasis,
    pub matrix: ComplexMatrix,
    /// `||P^H P - I||_F`.
    pub unitarity_defect: f64,
}

pub fn build(spec: &ExchangeSpec, basis: SectorBasis) -> Result<ExchangeOperator> {
    spec.validate()?;
    if spec.n != basis.n() {
        return Err(Error::DimensionMismatch { expected: basis.n(), got: spec.n });
    }
    let dim = basis.dim();
    let mut m = ComplexMatrix::identity(dim);
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);

    if let Some(pairs) = spec.swap_pairs() {
        for (a, b) in pairs {
            let (sa, sb) = (basis.site_slot(a)?, basis.site_slot(b)?);
            m[(sa, sa)] = zero;
            m[(sb, sb)] = zero;
            m[(sa, sb)] = one;
            m[(sb, sa)] = one;
        }
    } else {
        let spread = spec.spread().expect("entangling kind");
        let src = basis.site_slot(spread.source)?;
        let targets = spread.targets.iter().map(|&t| basis.site_slot(t)).collect::<Result<Vec<_>>>()?;
        match spec.completion {
            Completion::UnitaryCompletion => {
                // v = (e_s - t) / |e_s - t| with t the normalized target sum;
                // I - 2 v v^H maps e_s to t and t to e_s.
                let mut v = vec![0.0; dim];
                let w = 1.0 / (targets.len() as f64).sqrt();
                for &t in &targets {
                    v[t] -= w;
                }
                v[src] += 1.0;
                let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                for i in 0..dim {
                    for j in 0..dim {
                        m[(i, j)] -= C64::new(2.0 * v[i] * v[j] / (norm * norm), 0.0);
                    }
                }
            }
            Completion::RawAsWritten => {
                let c = C64::new(spread.literal_weight, 0.0);
                let mut touched: BTreeSet<usize> = targets.iter().copied().collect();
                touched.insert(src);
                for &s in &touched {
                    m[(s, s)] = zero;
                }
                for &t in &targets {
                    m[(src, t)] += c;
                    m[(t, src)] += c;
                }
            }
        }
    }
    let unitarity_defect = m.unitarity_defect();
    Ok(ExchangeOperator { spec: spec.clone(), basis, matrix: m, unitarity_defect })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExchangeReport {
    pub involution: bool,
    pub involution_defect: f64,
    pub unitarity_defect: f64,
    /// Sites `j` with `P |j^> = |j^>`.
    pub fixed_sites: Vec<usize>,
}

pub fn verify_exchange(op: &ExchangeOperator) -> ExchangeReport {
    let dim = op.basis.dim();
    let sq = op.matrix.matmul(&op.matrix);
    let involution_defect = sq.sub(&ComplexMatrix::identity(dim)).frobenius_norm();
    let fixed_sites = (1..=op.basis.n())
        .filter(|&j| {
            let s = op.basis.site_slot(j).unwrap();
            (0..dim).all(|i| {
                let expect = if i == s { 1.0 } else { 0.0 };
                (op.matrix[(i, s)] - C64::new(expect, 0.0)).norm() < INVOLUTION_TOL
            })
        })
        .collect();
    ExchangeReport {
        involution: involution_defect < INVOLUTION_TOL,
        involution_defect,
        unitarity_defect: op.unitarity_defect,
        fixed_sites,
    }
}
