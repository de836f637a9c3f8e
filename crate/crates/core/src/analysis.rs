//! Swap probabilities of `W(tau) = P U(tau)` over time grids and chain sizes.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exchange::{self, ExchangeOperator, ExchangeSpec};
use crate::linalg::{
    eigenspace_projection_probability, unitary_eig_with, ClusterProbability, ComplexMatrix, UnitaryEigOptions,
    UnitaryEigensystem, C64,
};
use crate::sector::{sector_spectrum, BasisLabel, ModelParams, SectorBasis, SectorState, SpectralData};

/// `p` above this is labelled an exact swap.
pub const EXACT_LABEL_THRESHOLD: f64 = 1.0 - 1e-3;
/// Probabilities closer than this are treated as tied when picking the best cluster.
pub const TIE_TOL: f64 = 1e-10;
/// Weight on the sender sites an eigenvector needs to count as a product state.
pub const FACTORIZATION_TOL: f64 = 1e-8;
/// Allowed slack on `a^2 + b^2 = 1`.
pub const AMPLITUDE_NORM_TOL: f64 = 1e-12;

/// Ascending list of evolution times.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TauGrid {
    points: Vec<f64>,
    #[serde(skip)]
    step: Option<f64>,
}

impl TauGrid {
    /// `start, start + step, ...` up to `end` inclusive.
    pub fn range(start: f64, end: f64, step: f64) -> Result<Self> {
        if !(start.is_finite() && end.is_finite() && step.is_finite()) {
            return Err(Error::InvalidGrid("grid bounds must be finite".into()));
        }
        if !(step > 0.0) {
            return Err(Error::InvalidGrid(format!("step must be positive (got {step})")));
        }
        if start < 0.0 || end < start {
            return Err(Error::InvalidGrid(format!("need 0 <= start <= end (got {start}:{end})")));
        }
        let count = ((end - start) / step + 1e-9).floor() as usize;
        let points = (0..=count).map(|k| start + k as f64 * step).collect();
        Ok(Self { points, step: Some(step) })
    }

    pub fn from_points(mut points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidGrid("empty grid".into()));
        }
        if let Some(bad) = points.iter().find(|t| !t.is_finite() || **t < 0.0) {
            return Err(Error::InvalidGrid(format!("times must be finite and non-negative (got {bad})")));
        }
        points.sort_by(f64::total_cmp);
        points.dedup();
        Ok(Self { points, step: None })
    }

    pub fn single(tau: f64) -> Result<Self> {
        Self::from_points(vec![tau])
    }

    /// `[0, 50]` in steps of 0.01.
    pub fn default_scan() -> Self {
        Self::range(0.0, 50.0, 0.01).unwrap()
    }

    /// `[0.01, 50]` in steps of 0.01. `tau = 0` is left out because `W = P`
    /// there and its degenerate eigenspaces say nothing about the dynamics.
    pub fn default_sweep() -> Self {
        Self::range(0.01, 50.0, 0.01).unwrap()
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn step(&self) -> Option<f64> {
        self.step
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn start(&self) -> f64 {
        self.points[0]
    }

    pub fn end(&self) -> f64 {
        *self.points.last().unwrap()
    }
}

/// Parses `start:end:step` or a comma-separated list of times.
impl FromStr for TauGrid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let num = |x: &str| x.trim().parse::<f64>().map_err(|_| Error::InvalidGrid(format!("not a number: {x:?}")));
        let parts: Vec<&str> = s.split(':').collect();
        match parts.len() {
            1 => Self::from_points(s.split(',').map(num).collect::<Result<_>>()?),
            3 => Self::range(num(parts[0])?, num(parts[1])?, num(parts[2])?),
            _ => Err(Error::InvalidGrid(format!("expected start:end:step or a list (got {s:?})"))),
        }
    }
}

/// Initial state of a scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum InitialState {
    /// `|s^>` for the exchange's natural sender site.
    Sender,
    Site(usize),
    Zero,
    /// `a |0^> + b |site^>`; needs the zero-magnon slot.
    Superposition {
        a: f64,
        b: f64,
        site: usize,
    },
}

impl InitialState {
    pub fn resolve(&self, basis: SectorBasis, spec: &ExchangeSpec) -> Result<SectorState> {
        let one = C64::new(1.0, 0.0);
        match *self {
            InitialState::Sender => {
                SectorState::superposition(basis, &[(BasisLabel::Site(spec.default_initial_site()), one)])
            }
            InitialState::Site(s) => SectorState::superposition(basis, &[(BasisLabel::Site(s), one)]),
            InitialState::Zero => SectorState::superposition(basis, &[(BasisLabel::Zero, one)]),
            InitialState::Superposition { a, b, site } => SectorState::superposition(
                basis,
                &[(BasisLabel::Zero, C64::new(a, 0.0)), (BasisLabel::Site(site), C64::new(b, 0.0))],
            ),
        }
    }

    fn site(&self, spec: &ExchangeSpec) -> Option<usize> {
        match *self {
            InitialState::Sender => Some(spec.default_initial_site()),
            InitialState::Site(s) | InitialState::Superposition { site: s, .. } => Some(s),
            InitialState::Zero => None,
        }
    }
}

impl FromStr for InitialState {
    type Err = Error;

    /// `sender`, `zero` or a 1-based site number.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "sender" => Ok(InitialState::Sender),
            "zero" | "0" => Ok(InitialState::Zero),
            t => t
                .parse::<usize>()
                .map(InitialState::Site)
                .map_err(|_| Error::Parse(format!("initial state must be sender, zero or a site (got {t:?})"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanConfig {
    pub exchange: ExchangeSpec,
    pub model: ModelParams,
    pub initial: InitialState,
    pub grid: TauGrid,
    pub include_zero: bool,
    /// Sites whose summed weight replaces the single-state overlap.
    pub target_sites: Option<Vec<usize>>,
    /// Adds `|F|` for `a |0^> + b |s^>` to every record.
    pub fidelity: Option<(f64, f64)>,
    pub keep_clusters: bool,
    #[serde(skip)]
    pub eig: UnitaryEigOptions,
}

impl ScanConfig {
    /// XY with `J = 1`, sender-site initial state, default grid and the
    /// exchange's own multi-site targets.
    pub fn new(exchange: ExchangeSpec) -> Self {
        let target_sites = exchange.default_target_sites();
        Self {
            exchange,
            model: ModelParams::default(),
            initial: InitialState::Sender,
            grid: TauGrid::default_scan(),
            include_zero: false,
            target_sites,
            fidelity: None,
            keep_clusters: false,
            eig: UnitaryEigOptions::default(),
        }
    }

    pub fn n(&self) -> usize {
        self.exchange.n
    }

    pub fn with_grid(mut self, grid: TauGrid) -> Self {
        self.grid = grid;
        self
    }

    pub fn with_model(mut self, model: ModelParams) -> Self {
        self.model = model;
        self
    }

    pub fn with_initial(mut self, initial: InitialState) -> Self {
        self.initial = initial;
        self
    }

    pub fn with_fidelity(mut self, a: f64, b: f64) -> Self {
        self.fidelity = Some((a, b));
        self
    }

    pub fn with_targets(mut self, targets: Option<Vec<usize>>) -> Self {
        self.target_sites = targets;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SwapLabel {
    Exact,
    Partial,
    None,
}

impl SwapLabel {
    pub fn classify(p: f64) -> Self {
        if p > EXACT_LABEL_THRESHOLD {
            SwapLabel::Exact
        } else if p > 0.5 + TIE_TOL {
            SwapLabel::Partial
        } else {
            SwapLabel::None
        }
    }
}

impl fmt::Display for SwapLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SwapLabel::Exact => "exact",
            SwapLabel::Partial => "partial",
            SwapLabel::None => "none",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanRecord {
    pub tau: f64,
    pub best_phase: f64,
    pub best_p: f64,
    pub cluster_dim: usize,
    pub label: SwapLabel,
    /// Best `|F|` over eigenspaces, when requested.
    pub fidelity: Option<f64>,
    pub all_clusters: Option<Vec<ClusterProbability>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanOutcome {
    pub records: Vec<ScanRecord>,
    /// Index of the record with the largest `best_p` (earliest on ties).
    pub best: usize,
}

impl ScanOutcome {
    pub fn peak(&self) -> &ScanRecord {
        &self.records[self.best]
    }

    /// Largest fidelity on the grid, if it was computed.
    pub fn peak_fidelity(&self) -> Option<(f64, f64)> {
        self.records.iter().filter_map(|r| r.fidelity.map(|f| (r.tau, f))).fold(None, |acc, (t, f)| match acc {
            Some((_, g)) if g >= f => acc,
            _ => Some((t, f)),
        })
    }

    /// Record whose `tau` is closest to the given time.
    pub fn at(&self, tau: f64) -> &ScanRecord {
        self.records.iter().min_by(|a, b| (a.tau - tau).abs().total_cmp(&(b.tau - tau).abs())).unwrap()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRecord {
    pub n: usize,
    pub p_peak: f64,
    pub tau_at_peak: f64,
    pub phase_at_peak: f64,
}

/// `W = P U`.
pub fn compose_w(p: &ExchangeOperator, u: &ComplexMatrix) -> Result<ComplexMatrix> {
    p.matrix.try_matmul(u)
}

/// Everything about a scan that does not depend on `tau`.
#[derive(Debug, Clone)]
pub struct SwapProblem {
    pub basis: SectorBasis,
    pub spectrum: SpectralData,
    pub exchange: ExchangeOperator,
    pub initial: SectorState,
    target_slots: Option<Vec<usize>>,
    fidelity: Option<(f64, f64, Vec<C64>)>,
    keep_clusters: bool,
    eig: UnitaryEigOptions,
}

impl SwapProblem {
    pub fn new(config: &ScanConfig) -> Result<Self> {
        let basis = SectorBasis::new(config.n(), config.include_zero)?;
        let exchange = exchange::build(&config.exchange, basis)?;
        let spectrum = sector_spectrum(basis, &config.model);
        let initial = config.initial.resolve(basis, &config.exchange)?;
        let target_slots = match &config.target_sites {
            Some(sites) if sites.is_empty() => return Err(Error::InvalidGrid("target site list is empty".into())),
            Some(sites) => Some(sites.iter().map(|&s| basis.site_slot(s)).collect::<Result<Vec<_>>>()?),
            None => None,
        };
        let fidelity = match config.fidelity {
            Some((a, b)) => {
                check_amplitudes(a, b)?;
                let site = config
                    .initial
                    .site(&config.exchange)
                    .ok_or_else(|| Error::Parse("fidelity needs a one-magnon initial site".into()))?;
                let mut src = vec![C64::new(0.0, 0.0); basis.dim()];
                src[basis.site_slot(site)?] = C64::new(1.0, 0.0);
                Some((a, b, src))
            }
            None => None,
        };
        Ok(Self {
            basis,
            spectrum,
            exchange,
            initial,
            target_slots,
            fidelity,
            keep_clusters: config.keep_clusters,
            eig: config.eig,
        })
    }

    pub fn w(&self, tau: f64) -> Result<ComplexMatrix> {
        compose_w(&self.exchange, &self.spectrum.propagator(tau))
    }

    pub fn eigensystem(&self, tau: f64) -> Result<UnitaryEigensystem> {
        unitary_eig_with(&self.w(tau)?, &self.eig)
    }

    /// Per-cluster probabilities: summed target-site weight maximized inside
    /// each eigenspace, or the projection of the initial state.
    pub fn cluster_probabilities(&self, sys: &UnitaryEigensystem) -> Result<Vec<ClusterProbability>> {
        match &self.target_slots {
            Some(slots) => sys.cluster_max_slot_weight(slots),
            None => eigenspace_projection_probability(sys, self.initial.amplitudes()),
        }
    }

    pub fn record(&self, tau: f64) -> Result<ScanRecord> {
        let sys = self.eigensystem(tau)?;
        let clusters = self.cluster_probabilities(&sys)?;
        let best = best_cluster(&clusters);
        let fidelity = match &self.fidelity {
            Some((a, b, src)) => Some(best_fidelity(&sys, *a, *b, src)?),
            None => None,
        };
        Ok(ScanRecord {
            tau,
            best_phase: best.phase,
            best_p: best.p,
            cluster_dim: best.dim,
            label: SwapLabel::classify(best.p),
            fidelity,
            all_clusters: self.keep_clusters.then_some(clusters),
        })
    }
}

/// Largest `p`; ties go to the smaller eigenspace, then the larger phase.
fn best_cluster(clusters: &[ClusterProbability]) -> ClusterProbability {
    let mut best = clusters[0];
    for &c in &clusters[1..] {
        let better = if (c.p - best.p).abs() > TIE_TOL {
            c.p > best.p
        } else if c.dim != best.dim {
            c.dim < best.dim
        } else {
            c.phase > best.phase
        };
        if better {
            best = c;
        }
    }
    best
}

fn check_amplitudes(a: f64, b: f64) -> Result<()> {
    if !(a >= 0.0 && b >= 0.0) {
        return Err(Error::Parse(format!("amplitudes must be real and non-negative (got {a}, {b})")));
    }
    let s = a * a + b * b;
    if (s - 1.0).abs() > AMPLITUDE_NORM_TOL {
        return Err(Error::NotNormalized(s));
    }
    Ok(())
}

/// `|a^2 + b^2 e^{i omega} overlap|`.
pub fn joint_fidelity(a: f64, b: f64, phase: f64, overlap: C64) -> Result<f64> {
    check_amplitudes(a, b)?;
    Ok((C64::new(a * a, 0.0) + C64::from_polar(b * b, phase) * overlap).norm())
}

/// Best `|F|` over the eigenspaces of `W`. Inside an eigenspace the
/// representative is the normalized projection of `|s^>`, rephased so that
/// `e^{i omega} <s|psi>` is real and positive.
fn best_fidelity(sys: &UnitaryEigensystem, a: f64, b: f64, src: &[C64]) -> Result<f64> {
    let mut best = joint_fidelity(a, b, 0.0, C64::new(0.0, 0.0))?;
    for c in &sys.clusters {
        let proj = sys.project(c, src);
        let q: f64 = proj.iter().map(|z| z.norm_sqr()).sum();
        if q <= 0.0 {
            continue;
        }
        let overlap = C64::from_polar(q.sqrt(), -c.phase);
        best = best.max(joint_fidelity(a, b, c.phase, overlap)?);
    }
    Ok(best)
}

pub fn swap_probability_profile(config: &ScanConfig, tau: f64) -> Result<ScanRecord> {
    if !tau.is_finite() {
        return Err(Error::InvalidGrid(format!("tau must be finite (got {tau})")));
    }
    SwapProblem::new(config)?.record(tau)
}

/// One record per grid point, in grid order.
pub fn scan_tau(config: &ScanConfig) -> Result<ScanOutcome> {
    let problem = SwapProblem::new(config)?;
    scan_problem(&problem, config.grid.points())
}

fn scan_problem(problem: &SwapProblem, taus: &[f64]) -> Result<ScanOutcome> {
    if taus.is_empty() {
        return Err(Error::InvalidGrid("empty grid".into()));
    }
    let records = taus.par_iter().map(|&t| problem.record(t)).collect::<Result<Vec<_>>>()?;
    let mut best = 0;
    for (i, r) in records.iter().enumerate() {
        if r.best_p > records[best].best_p {
            best = i;
        }
    }
    Ok(ScanOutcome { records, best })
}

/// Template for [`sweep_chain_sizes`]; the exchange's own `n` is ignored.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepConfig {
    pub exchange: ExchangeSpec,
    pub ns: Vec<usize>,
    pub grid: TauGrid,
    pub model: ModelParams,
    pub include_zero: bool,
    #[serde(skip)]
    pub eig: UnitaryEigOptions,
}

impl SweepConfig {
    pub fn new(exchange: ExchangeSpec, ns: Vec<usize>) -> Self {
        Self {
            exchange,
            ns,
            grid: TauGrid::default_sweep(),
            model: ModelParams::default(),
            include_zero: false,
            eig: UnitaryEigOptions::default(),
        }
    }

    pub fn with_grid(mut self, grid: TauGrid) -> Self {
        self.grid = grid;
        self
    }

    /// Scan configuration for one member of the sweep.
    pub fn member(&self, n: usize) -> ScanConfig {
        let mut c = ScanConfig::new(self.exchange.with_n(n));
        c.grid = self.grid.clone();
        c.model = self.model;
        c.include_zero = self.include_zero;
        c.eig = self.eig;
        c
    }
}

/// Peak of `best_p` over the grid for every chain length, in the given order.
pub fn sweep_chain_sizes(config: &SweepConfig) -> Result<Vec<SweepRecord>> {
    if config.ns.is_empty() {
        return Err(Error::InvalidGrid("no chain lengths given".into()));
    }
    for &n in &config.ns {
        SectorBasis::new(n, false)?;
    }
    config
        .ns
        .iter()
        .map(|&n| {
            let outcome = scan_tau(&config.member(n))?;
            let peak = outcome.peak();
            Ok(SweepRecord { n, p_peak: peak.best_p, tau_at_peak: peak.tau, phase_at_peak: peak.best_phase })
        })
        .collect()
}

/// An eigenvector of `W` that lives entirely on the sender sites.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProductWitness {
    pub tau: f64,
    pub phase: f64,
    /// Largest weight on the sender sites inside the eigenspace.
    pub sender_weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransferCertificate {
    pub found: bool,
    /// First grid time reaching the threshold, or the global peak otherwise.
    pub tau: f64,
    pub p: f64,
    pub threshold: f64,
    pub grid_points: usize,
    pub grid_start: f64,
    pub grid_end: f64,
    pub grid_step: Option<f64>,
    pub sender_sites: Vec<usize>,
    pub product_witnesses: Vec<ProductWitness>,
    /// Human-readable resolution caveat.
    pub note: String,
}

/// Searches the grid for `best_p >= threshold`, and separately for
/// eigenvectors whose support is confined to the sender sites.
pub fn exact_transfer_search(config: &ScanConfig, threshold: f64) -> Result<TransferCertificate> {
    if !(threshold > 0.5 && threshold <= 1.0) {
        return Err(Error::InvalidThreshold(threshold));
    }
    let problem = SwapProblem::new(config)?;
    let senders = config.exchange.sender_sites();
    let sender_slots = senders.iter().map(|&s| problem.basis.site_slot(s)).collect::<Result<Vec<_>>>()?;

    let per_tau = config
        .grid
        .points()
        .par_iter()
        .map(|&tau| {
            let sys = problem.eigensystem(tau)?;
            let best = best_cluster(&problem.cluster_probabilities(&sys)?);
            let witnesses: Vec<ProductWitness> = sys
                .cluster_max_slot_weight(&sender_slots)?
                .into_iter()
                .filter(|c| c.p >= 1.0 - FACTORIZATION_TOL)
                .map(|c| ProductWitness { tau, phase: c.phase, sender_weight: c.p })
                .collect();
            Ok((tau, best.p, witnesses))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut hit = None;
    let mut peak = (per_tau[0].0, per_tau[0].1);
    let mut product_witnesses = Vec::new();
    for (tau, p, w) in per_tau {
        if hit.is_none() && p >= threshold {
            hit = Some((tau, p));
        }
        if p > peak.1 {
            peak = (tau, p);
        }
        product_witnesses.extend(w);
    }
    let grid = &config.grid;
    let resolution = match grid.step() {
        Some(s) => format!("step {s}"),
        None => format!("{} listed points", grid.len()),
    };
    let note = match hit {
        Some((t, p)) => format!("best_p = {p:.12} >= {threshold} at tau = {t}"),
        None => format!(
            "no grid point in [{}, {}] ({resolution}) reaches best_p >= {threshold}; peak {:.12} at tau = {}; \
             times between grid points are not covered",
            grid.start(),
            grid.end(),
            peak.1,
            peak.0
        ),
    };
    let (tau, p) = hit.unwrap_or(peak);
    Ok(TransferCertificate {
        found: hit.is_some(),
        tau,
        p,
        threshold,
        grid_points: grid.len(),
        grid_start: grid.start(),
        grid_end: grid.end(),
        grid_step: grid.step(),
        sender_sites: senders,
        product_witnesses,
        note,
    })
}

/// Closed-form `tau = 0` value: `W = P`, so the best probability is the
/// larger of the initial state's weights on the `+1` and `-1` eigenspaces.
pub fn involution_weights(p: &ExchangeOperator, phi: &[C64]) -> Result<(f64, f64)> {
    if phi.len() != p.matrix.rows() {
        return Err(Error::DimensionMismatch { expected: p.matrix.rows(), got: phi.len() });
    }
    let pphi = p.matrix.matvec(phi);
    let plus: f64 = phi.iter().zip(&pphi).map(|(x, y)| ((x + y) * 0.5).norm_sqr()).sum();
    let minus: f64 = phi.iter().zip(&pphi).map(|(x, y)| ((x - y) * 0.5).norm_sqr()).sum();
    Ok((plus, minus))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exchange::ExchangeKind;
    use std::f64::consts::PI;

    fn p1(n: usize) -> ScanConfig {
        ScanConfig::new(ExchangeSpec::new(ExchangeKind::P1, n))
    }

    #[test]
    fn grid_parsing() {
        let g: TauGrid = "0:0.6:0.01".parse().unwrap();
        assert_eq!(g.len(), 61);
        assert!((g.end() - 0.6).abs() < 1e-12);
        let g: TauGrid = "0.13, 0.07".parse().unwrap();
        assert_eq!(g.points(), &[0.07, 0.13]);
        assert!("1:0:0.1".parse::<TauGrid>().is_err());
        assert!("0:1:0".parse::<TauGrid>().is_err());
        assert!("0:1".parse::<TauGrid>().is_err());
        assert!("-1".parse::<TauGrid>().is_err());
    }

    #[test]
    fn p1_at_zero_is_half_at_pi() {
        let r = swap_probability_profile(&p1(7), 0.0).unwrap();
        assert!((r.best_p - 0.5).abs() < 1e-12);
        assert!((r.best_phase - PI).abs() < 1e-12);
        assert_eq!(r.label, SwapLabel::None);
    }

    #[test]
    fn p1_table_point() {
        let r = swap_probability_profile(&p1(9), 0.07).unwrap();
        assert!((r.best_p - 0.4997).abs() < 1e-4, "{}", r.best_p);
        assert!(crate::linalg::circular_distance(r.best_phase, PI) < 0.05);
    }

    #[test]
    fn compose_identity_and_tau_zero() {
        let cfg = ScanConfig::new(ExchangeSpec::new(ExchangeKind::Identity, 5));
        let prob = SwapProblem::new(&cfg).unwrap();
        let u = prob.spectrum.propagator(0.3);
        assert!(prob.w(0.3).unwrap().max_abs_diff(&u) < 1e-15);
        let prob = SwapProblem::new(&p1(5)).unwrap();
        assert!(prob.w(0.0).unwrap().max_abs_diff(&prob.exchange.matrix) < 1e-14);
    }

    #[test]
    fn compose_rejects_mismatch() {
        let prob = SwapProblem::new(&p1(5)).unwrap();
        assert!(matches!(
            compose_w(&prob.exchange, &ComplexMatrix::identity(4)),
            Err(Error::DimensionMismatch { .. }) | Err(Error::NotSquare { .. })
        ));
    }

    #[test]
    fn fidelity_formula() {
        assert!((joint_fidelity(1.0, 0.0, 1.0, C64::new(0.0, 0.0)).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(joint_fidelity(0.9, 0.3, 0.0, C64::new(1.0, 0.0)), Err(Error::NotNormalized(_))));
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((joint_fidelity(h, h, PI, C64::new(-1.0, 0.0)).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn threshold_validation() {
        let cfg = p1(5).with_grid(TauGrid::single(0.0).unwrap());
        assert!(matches!(exact_transfer_search(&cfg, 0.5), Err(Error::InvalidThreshold(_))));
        assert!(matches!(exact_transfer_search(&cfg, 1.5), Err(Error::InvalidThreshold(_))));
    }

    #[test]
    fn identity_exchange_certifies_trivially() {
        let cfg =
            ScanConfig::new(ExchangeSpec::new(ExchangeKind::Identity, 7)).with_grid(TauGrid::single(0.0).unwrap());
        let cert = exact_transfer_search(&cfg, 0.999).unwrap();
        assert!(cert.found);
        assert!((cert.p - 1.0).abs() < 1e-12);
    }

    #[test]
    fn involution_weights_match_tau_zero() {
        let prob = SwapProblem::new(&p1(7)).unwrap();
        let (plus, minus) = involution_weights(&prob.exchange, prob.initial.amplitudes()).unwrap();
        assert!((plus - 0.5).abs() < 1e-15 && (minus - 0.5).abs() < 1e-15);
    }

    #[test]
    fn sweep_keeps_order() {
        let cfg = SweepConfig::new(ExchangeSpec::new(ExchangeKind::P1, 3), vec![7, 3, 5])
            .with_grid("0.1:0.3:0.1".parse().unwrap());
        let rows = sweep_chain_sizes(&cfg).unwrap();
        assert_eq!(rows.iter().map(|r| r.n).collect::<Vec<_>>(), vec![7, 3, 5]);
        assert!(rows.iter().all(|r| r.p_peak <= 1.0));
        let bad = SweepConfig::new(ExchangeSpec::new(ExchangeKind::P1, 3), vec![4]);
        assert!(matches!(sweep_chain_sizes(&bad), Err(Error::InvalidChainLength(4))));
    }
}
