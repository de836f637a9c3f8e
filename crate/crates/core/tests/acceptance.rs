//! Exit criteria. Each test prints one `criterion N: PASS|FAIL` line to
//! stderr, visible without `--nocapture`.
//! Tests are serialized so that the runtime limits measure one workload.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::io::Write;
use std::sync::Mutex;
use std::time::Instant;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use spinswap::analysis::{
    exact_transfer_search, scan_tau, sweep_chain_sizes, ScanConfig, SwapProblem, SweepConfig, TauGrid,
};
use spinswap::exchange::{self, verify_exchange, ExchangeKind, ExchangeSpec};
use spinswap::linalg::{
    circular_distance, eigenspace_projection_probability, ClusterProbability, ComplexMatrix, UnitaryEigensystem, C64,
};
use spinswap::oracle::sector_equivalence_check;
use spinswap::sector::{ModelParams, SectorBasis};

static SERIAL: Mutex<()> = Mutex::new(());

fn verdict(id: u32, title: &str, pass: bool, detail: &str) {
    let line = format!("criterion {id} ({title}): {}  {detail}\n", if pass { "PASS" } else { "FAIL" });
    let _ = std::io::stderr().write_all(line.as_bytes());
}

fn odd(from: usize, to: usize, step: usize) -> Vec<usize> {
    (from..=to).step_by(step).collect()
}

const TABLE_TAUS: [f64; 7] = [0.07, 0.13, 0.17, 0.19, 0.38, 0.44, 0.52];

#[test]
fn criterion_1_short_time_table() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let mut pass = true;
    let mut notes = Vec::new();
    for n in odd(7, 21, 2) {
        let start = Instant::now();
        let cfg = ScanConfig::new(ExchangeSpec::new(ExchangeKind::P1, n)).with_grid("0:0.6:0.01".parse().unwrap());
        let out = scan_tau(&cfg).unwrap();
        let elapsed = start.elapsed().as_secs_f64();
        let at = out.at(0.07);
        let column: Vec<f64> = TABLE_TAUS.iter().map(|&t| out.at(t).best_p).collect();
        let monotone = column.windows(2).all(|w| w[1] <= w[0]);
        let ok = (0.49..=0.50).contains(&at.best_p)
            && circular_distance(at.best_phase, PI) <= 0.05
            && monotone
            && elapsed < 10.0;
        pass &= ok;
        let cells: Vec<String> = column.iter().map(|p| format!("{p:.4}")).collect();
        notes.push(format!("N={n} [{}] {elapsed:.2}s", cells.join(" ")));
    }
    verdict(1, "short-time table, P1", pass, &notes.join("; "));
    assert!(pass);
}

#[test]
fn criterion_2_joint_fidelity() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let grid: TauGrid = "0:0.6:0.01".parse().unwrap();
    let cases = [((0.9f64).sqrt(), (0.1f64).sqrt(), 0.95), (FRAC_1_SQRT_2, FRAC_1_SQRT_2, 0.83)];
    let mut pass = true;
    let mut notes = Vec::new();
    for (a, b, floor) in cases {
        let mut best = (0, 0.0, 0.0);
        for n in odd(7, 21, 2) {
            let cfg =
                ScanConfig::new(ExchangeSpec::new(ExchangeKind::P1, n)).with_grid(grid.clone()).with_fidelity(a, b);
            let (tau, f) = scan_tau(&cfg).unwrap().peak_fidelity().unwrap();
            if f > best.2 {
                best = (n, tau, f);
            }
        }
        pass &= best.2 >= floor;
        notes.push(format!("a={a:.5}: max |F| = {:.4} at N={} tau={} (need >= {floor})", best.2, best.0, best.1));
    }
    verdict(2, "joint fidelity, P1", pass, &notes.join("; "));
    assert!(pass);
}

#[test]
fn criterion_3_remote_entanglement_sweep() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let cfg = SweepConfig::new(ExchangeSpec::new(ExchangeKind::PE, 5), odd(5, 73, 4));
    let rows = sweep_chain_sizes(&cfg).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let all = rows.iter().all(|r| r.p_peak >= 0.49);
    let last = rows.last().unwrap();
    let pass = all && last.n == 73 && (0.49..=0.51).contains(&last.p_peak) && elapsed < 120.0;
    let min = rows.iter().map(|r| r.p_peak).fold(f64::INFINITY, f64::min);
    verdict(
        3,
        "P_E sweep N = 5..73",
        pass,
        &format!("min p_peak {min:.6}, N=73 p_peak {:.6}, {elapsed:.1}s", last.p_peak),
    );
    assert!(pass);
}

#[test]
fn criterion_4_all_pairs_decay() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let cfg = SweepConfig::new(ExchangeSpec::new(ExchangeKind::PAll, 7), odd(7, 31, 4));
    let rows = sweep_chain_sizes(&cfg).unwrap();
    let rises: Vec<f64> = rows.windows(2).map(|w| w[1].p_peak - w[0].p_peak).filter(|&d| d > 0.0).collect();
    let pass = rises.len() <= 1 && rises.iter().all(|&d| d <= 0.005);
    let peaks: Vec<String> = rows.iter().map(|r| format!("N={} {:.4}", r.n, r.p_peak)).collect();
    verdict(4, "P_All decay with N", pass, &format!("{} (increases: {rises:?})", peaks.join(", ")));
    assert!(pass);
}

#[test]
fn criterion_5_pe_prime_three_sites() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let spec = ExchangeSpec::new(ExchangeKind::PEPrime, 3).degenerate();
    let a = 3f64.sqrt() / 2.0;
    let cfg = ScanConfig::new(spec).with_fidelity(a, 0.5);
    let out = scan_tau(&cfg).unwrap();
    let peak = out.peak();
    let (ftau, f) = out.peak_fidelity().unwrap();
    let p_ok = (0.70..=0.76).contains(&peak.best_p);
    let pass = p_ok && f >= 0.94;
    verdict(
        5,
        "P'_E on N = 3 (colliding sites)",
        pass,
        &format!(
            "max p {:.4} at tau={} (need [0.70, 0.76]); max |F| {f:.4} at tau={ftau} (need >= 0.94); \
             sites 1, 2 and r coincide on N = 3, see project notes",
            peak.best_p, peak.tau
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_6_no_exact_transfer() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let mut pass = true;
    let mut notes = Vec::new();
    for n in [5, 7, 9] {
        let cfg =
            ScanConfig::new(ExchangeSpec::new(ExchangeKind::P1, n)).with_grid(TauGrid::range(0.0, 50.0, 0.01).unwrap());
        let cert = exact_transfer_search(&cfg, 0.999).unwrap();
        pass &= !cert.found;
        notes.push(format!("N={n} found={} peak {:.6}", cert.found, cert.p));
    }
    verdict(6, "no exact transfer, P1", pass, &notes.join("; "));
    assert!(pass);
}

#[test]
fn criterion_7_full_space_equivalence() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let models = [ModelParams::xy(1.0).unwrap(), ModelParams::xxz(1.0, 0.5, 0.2).unwrap()];
    let mut worst = 0.0f64;
    for n in [3, 5, 7] {
        for m in &models {
            worst = worst.max(sector_equivalence_check(n, m, &[0.1, 1.0, 10.0]).unwrap().max_deviation);
        }
    }
    let pass = worst < 1e-10;
    verdict(7, "sector vs full 2^N evolution", pass, &format!("max deviation {worst:.3e}"));
    assert!(pass);
}

fn random_unitary(k: usize, rng: &mut StdRng) -> ComplexMatrix {
    let mut cols: Vec<Vec<C64>> = Vec::new();
    for _ in 0..k {
        let mut v: Vec<C64> = (0..k).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        for c in &cols {
            let d: C64 = c.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
            for (vi, ci) in v.iter_mut().zip(c) {
                *vi -= ci * d;
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        cols.push(v.into_iter().map(|z| z / norm).collect());
    }
    ComplexMatrix::from_columns(k, &cols)
}

fn rotate_clusters(sys: &UnitaryEigensystem, rng: &mut StdRng) -> UnitaryEigensystem {
    let mut out = sys.clone();
    for c in &sys.clusters {
        if c.dim() < 2 {
            continue;
        }
        let rotated = sys.cluster_basis(c).matmul(&random_unitary(c.dim(), rng));
        for (k, &col) in c.members.iter().enumerate() {
            for i in 0..sys.dim() {
                out.vectors[(i, col)] = rotated[(i, k)];
            }
        }
    }
    out
}

fn same_pairs(a: &[ClusterProbability], b: &[ClusterProbability], tol: f64) -> f64 {
    let mut worst = 0.0f64;
    for x in a {
        let d = b
            .iter()
            .filter(|y| circular_distance(x.phase, y.phase) < 1e-6)
            .map(|y| circular_distance(x.phase, y.phase).max((x.p - y.p).abs()))
            .fold(f64::INFINITY, f64::min);
        worst = worst.max(d);
    }
    if a.len() != b.len() {
        worst = worst.max(tol * 10.0);
    }
    worst
}

#[test]
fn criterion_8_numerical_contracts() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let kinds = [
        ExchangeKind::P1,
        ExchangeKind::P3,
        ExchangeKind::PAll,
        ExchangeKind::PE,
        ExchangeKind::PEPrime,
        ExchangeKind::PES,
    ];
    let (mut residual, mut sum_dev, mut rot_dev, mut shift_dev, mut inv_dev) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut cases = 0;
    while cases < 100 {
        let n = 2 * rng.gen_range(1..=15) + 1;
        let kind = kinds[rng.gen_range(0..kinds.len())].clone();
        let spec = ExchangeSpec::new(kind, n);
        if spec.validate().is_err() {
            continue;
        }
        // a quarter of the cases sit at tau = 0, where W = P is maximally degenerate
        let tau = if rng.gen_bool(0.25) { 0.0 } else { rng.gen_range(0.0..50.0) };
        let include_zero = rng.gen_bool(0.5);
        let mut cfg = ScanConfig::new(spec.clone());
        cfg.include_zero = include_zero;
        cfg.target_sites = None;
        let problem = SwapProblem::new(&cfg).unwrap();
        let sys = problem.eigensystem(tau).unwrap();
        residual = residual.max(sys.residual);
        let probs = problem.cluster_probabilities(&sys).unwrap();
        sum_dev = sum_dev.max((probs.iter().map(|c| c.p).sum::<f64>() - 1.0).abs());

        let rotated = rotate_clusters(&sys, &mut rng);
        let again = eigenspace_projection_probability(&rotated, problem.initial.amplitudes()).unwrap();
        rot_dev = rot_dev.max(same_pairs(&probs, &again, 1e-10));
        let slots: Vec<usize> = spec.sender_sites().iter().map(|&s| problem.basis.site_slot(s).unwrap()).collect();
        rot_dev = rot_dev.max(same_pairs(
            &sys.cluster_max_slot_weight(&slots).unwrap(),
            &rotated.cluster_max_slot_weight(&slots).unwrap(),
            1e-10,
        ));

        let c = rng.gen_range(-2.0..2.0);
        let mut shifted = problem.clone();
        shifted.spectrum = problem.spectrum.shifted(c);
        let moved: Vec<ClusterProbability> = probs
            .iter()
            .map(|x| ClusterProbability { phase: spinswap::linalg::wrap_phase(x.phase - c * tau), ..*x })
            .collect();
        let sys2 = shifted.eigensystem(tau).unwrap();
        shift_dev = shift_dev.max(same_pairs(&moved, &shifted.cluster_probabilities(&sys2).unwrap(), 1e-10));

        let op = exchange::build(&spec, SectorBasis::new(n, include_zero).unwrap()).unwrap();
        inv_dev = inv_dev.max(verify_exchange(&op).involution_defect);
        cases += 1;
    }
    let pass = residual < 1e-9 && sum_dev <= 1e-10 && rot_dev <= 1e-10 && shift_dev <= 1e-10 && inv_dev < 1e-12;
    verdict(
        8,
        "numerical contracts, 100 random cases",
        pass,
        &format!(
            "residual {residual:.2e}, |sum p - 1| {sum_dev:.2e}, rotation {rot_dev:.2e}, shift {shift_dev:.2e}, |P^2 - I| {inv_dev:.2e}"
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_9_three_pairs_match_single() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let ns = odd(7, 21, 2);
    let one = sweep_chain_sizes(&SweepConfig::new(ExchangeSpec::new(ExchangeKind::P1, 7), ns.clone())).unwrap();
    let three = sweep_chain_sizes(&SweepConfig::new(ExchangeSpec::new(ExchangeKind::P3, 7), ns)).unwrap();
    let worst = one.iter().zip(&three).map(|(a, b)| (a.p_peak - b.p_peak).abs()).fold(0.0, f64::max);
    let pass = worst < 0.05;
    verdict(9, "P3 vs P1 peaks", pass, &format!("max |p3 - p1| = {worst:.4}"));
    assert!(pass);
}
