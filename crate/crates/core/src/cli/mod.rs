//! `spinswap` command-line front end.

mod output;

pub use output::{fmt_g, fmt_sig, manifest_path, Csv, RunManifest};

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::analysis::{
    exact_transfer_search, scan_tau, sweep_chain_sizes, InitialState, ScanConfig, SweepConfig, TauGrid,
};
use crate::error::{Error, Result};
use crate::exchange::{ExchangeKind, ExchangeSpec};
use crate::linalg::{hermitian_eig, DEFAULT_JACOBI_TOL};
use crate::oracle::{gate_demos, run_oracle};
use crate::sector::{one_magnon_hamiltonian, sector_spectrum, ModelParams, SectorBasis};

/// `(a, b)` pairs this close to normalized are rescaled instead of rejected.
const FIDELITY_RENORM_SLACK: f64 = 1e-3;

#[derive(Debug, Parser)]
#[command(name = "spinswap", version, about = "Swap probabilities of exchange-composed spin-chain propagators")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// One-magnon energies E_m, m = 1..N.
    Spectrum(SpectrumArgs),
    /// Best swap probability of W(tau) = P U(tau) over a tau grid.
    Scan(ScanArgs),
    /// Peak swap probability for each chain length.
    Sweep(SweepArgs),
    /// Look for a grid time with best_p above a threshold.
    Search(SearchArgs),
    /// Compare the sector fast path with full 2^N evolution.
    Oracle(OracleArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelName {
    Xy,
    Xxz,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    #[arg(long, value_enum, default_value = "xy")]
    pub model: ModelName,
    /// Coupling J.
    #[arg(long = "j", default_value_t = 1.0, allow_negative_numbers = true)]
    pub coupling: f64,
    /// Anisotropy Delta (xxz only).
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub delta: f64,
    /// Field h (xxz only).
    #[arg(long = "h", default_value_t = 0.0, allow_negative_numbers = true)]
    pub field: f64,
}

impl ModelArgs {
    fn params(&self) -> Result<ModelParams> {
        match self.model {
            ModelName::Xy if self.delta != 0.0 || self.field != 0.0 => {
                Err(Error::InvalidModel("--delta and --h need --model xxz".into()))
            }
            ModelName::Xy => ModelParams::xy(self.coupling),
            ModelName::Xxz => ModelParams::xxz(self.coupling, self.delta, self.field),
        }
    }
}

#[derive(Debug, Args)]
pub struct ExchangeArgs {
    /// identity, p1, p3, pall, pe, pe-prime, pes or pairs:a-b,c-d
    #[arg(long, value_parser = parse_kind)]
    pub exchange: ExchangeKind,
    /// Keep the entangling operators exactly as written (not unitary).
    #[arg(long)]
    pub raw: bool,
    /// Allow pe-prime on N = 3, where its sites collide.
    #[arg(long)]
    pub degenerate: bool,
}

impl ExchangeArgs {
    fn spec(&self, n: usize) -> ExchangeSpec {
        let mut s = ExchangeSpec::new(self.exchange.clone(), n);
        if self.raw {
            s = s.raw();
        }
        if self.degenerate {
            s = s.degenerate();
        }
        s
    }
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[arg(long)]
    pub n: usize,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Cross-check against Jacobi eigenvalues of the sector matrix.
    #[arg(long)]
    pub verify: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[command(flatten)]
    pub exchange: ExchangeArgs,
    #[arg(long)]
    pub n: usize,
    /// start:end:step or a comma-separated list.
    #[arg(long, default_value = "0:50:0.01", value_parser = parse_grid)]
    pub tau: TauGrid,
    /// sender, zero or a site number.
    #[arg(long, default_value = "sender", value_parser = parse_initial)]
    pub initial: InitialState,
    /// Add the all-down state to the basis.
    #[arg(long)]
    pub include_zero: bool,
    /// Sites for the multi-site probability: a list, `none` or `default`.
    #[arg(long, default_value = "default")]
    pub targets: String,
    /// Adds the joint fidelity |F| for a|0> + b|s>.
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
    pub fidelity: Option<(f64, f64)>,
    /// Writes every cluster's (phase, p, dim) per tau as JSON.
    #[arg(long)]
    pub clusters_json: Option<PathBuf>,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub exchange: ExchangeArgs,
    /// start:end:step or a comma-separated list of odd N.
    #[arg(long, value_parser = parse_sizes)]
    pub ns: Sizes,
    #[arg(long, default_value = "0.01:50:0.01", value_parser = parse_grid)]
    pub tau: TauGrid,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[command(flatten)]
    pub exchange: ExchangeArgs,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value = "0:50:0.01", value_parser = parse_grid)]
    pub tau: TauGrid,
    #[arg(long, default_value_t = 0.999)]
    pub threshold: f64,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long, default_value = "3,5,7", value_parser = parse_sizes)]
    pub ns: Sizes,
    #[arg(long, default_value = "0.1,1,10", value_parser = parse_times)]
    pub taus: Times,
    /// Also print the transfer, amplification and remote-exchange examples.
    #[arg(long)]
    pub demo_gates: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Chain lengths given on the command line.
#[derive(Debug, Clone, PartialEq)]
pub struct Sizes(pub Vec<usize>);

#[derive(Debug, Clone, PartialEq)]
pub struct Times(pub Vec<f64>);

fn parse_times(s: &str) -> std::result::Result<Times, String> {
    parse_list(s).map(Times)
}

fn parse_kind(s: &str) -> std::result::Result<ExchangeKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_grid(s: &str) -> std::result::Result<TauGrid, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_initial(s: &str) -> std::result::Result<InitialState, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_list(s: &str) -> std::result::Result<Vec<f64>, String> {
    s.split(',').map(|x| x.trim().parse::<f64>().map_err(|_| format!("not a number: {x:?}"))).collect()
}

fn parse_pair(s: &str) -> std::result::Result<(f64, f64), String> {
    match parse_list(s)?.as_slice() {
        [a, b] => Ok((*a, *b)),
        _ => Err(format!("expected a,b (got {s:?})")),
    }
}

/// `start:end:step` or a comma-separated list.
pub fn parse_sizes(s: &str) -> std::result::Result<Sizes, String> {
    let num = |x: &str| x.trim().parse::<usize>().map_err(|_| format!("not a chain length: {x:?}"));
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [one] => one.split(',').map(num).collect::<std::result::Result<_, _>>().map(Sizes),
        [a, b, c] => {
            let (a, b, c) = (num(a)?, num(b)?, num(c)?);
            if c == 0 || b < a {
                return Err(format!("need start <= end and step > 0 (got {s:?})"));
            }
            Ok(Sizes((a..=b).step_by(c).collect()))
        }
        _ => Err(format!("expected start:end:step or a list (got {s:?})")),
    }
}

fn parse_targets(s: &str, spec: &ExchangeSpec) -> Result<Option<Vec<usize>>> {
    match s.trim() {
        "default" => Ok(spec.default_target_sites()),
        "none" => Ok(None),
        list => list
            .split(',')
            .map(|x| x.trim().parse::<usize>().map_err(|_| Error::Parse(format!("not a site: {x:?}"))))
            .collect::<Result<Vec<_>>>()
            .map(Some),
    }
}

/// Accepts `(a, b)` within a small slack of normalization and rescales it.
fn normalize_pair(a: f64, b: f64) -> Result<(f64, f64)> {
    let s = a * a + b * b;
    if !(s.is_finite() && (s - 1.0).abs() <= FIDELITY_RENORM_SLACK) {
        return Err(Error::NotNormalized(s));
    }
    let r = s.sqrt();
    if (s - 1.0).abs() > 1e-12 {
        eprintln!("note: rescaled --fidelity {a},{b} by 1/{r} to unit norm");
    }
    Ok((a / r, b / r))
}

/// Runs the CLI and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(CliError::Core(e)) => {
            eprintln!("error: {e}");
            if e.is_numerical() {
                3
            } else {
                2
            }
        }
        Err(CliError::Io(e)) => {
            eprintln!("error: {e}");
            2
        }
    }
}

enum CliError {
    Core(Error),
    Io(std::io::Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

fn dispatch(cmd: Command) -> std::result::Result<i32, CliError> {
    match cmd {
        Command::Spectrum(a) => cmd_spectrum(a),
        Command::Scan(a) => cmd_scan(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Search(a) => cmd_search(a),
        Command::Oracle(a) => cmd_oracle(a),
    }
}

fn cmd_spectrum(a: SpectrumArgs) -> std::result::Result<i32, CliError> {
    let params = a.model.params()?;
    let basis = SectorBasis::new(a.n, false)?;
    let spec = sector_spectrum(basis, &params);
    let mut csv = Csv::new(&["m", "E_m"]);
    for (m, e) in spec.energies.iter().enumerate() {
        csv.push(vec![(m + 1).to_string(), fmt_g(*e)]);
    }
    let mut manifest = RunManifest::new(
        "spectrum",
        json!({ "n": a.n, "model": params, "verify": a.verify, "zero_magnon_energy": spec.zero_energy }),
    );
    let mut code = 0;
    if a.verify {
        let direct = hermitian_eig(&one_magnon_hamiltonian(basis, &params), DEFAULT_JACOBI_TOL)?;
        let mut analytic = spec.energies.clone();
        analytic.sort_by(f64::total_cmp);
        let dev = analytic.iter().zip(&direct.values).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        let pass = dev < 1e-10;
        eprintln!("verify: max |E_analytic - E_jacobi| = {dev:.3e} ({})", if pass { "PASS" } else { "FAIL" });
        manifest.summary = Some(json!({ "verify_max_deviation": dev, "verify_pass": pass }));
        if !pass {
            code = 3;
        }
    }
    output::emit(a.out.as_deref(), &csv.render(), &manifest)?;
    Ok(code)
}

fn cmd_scan(a: ScanArgs) -> std::result::Result<i32, CliError> {
    let spec = a.exchange.spec(a.n);
    let mut cfg = ScanConfig::new(spec.clone()).with_grid(a.tau.clone()).with_model(a.model.params()?);
    cfg.initial = a.initial;
    cfg.include_zero = a.include_zero;
    cfg.target_sites = parse_targets(&a.targets, &spec)?;
    cfg.keep_clusters = a.clusters_json.is_some();
    if let Some((x, y)) = a.fidelity {
        let (x, y) = normalize_pair(x, y)?;
        cfg.fidelity = Some((x, y));
    }
    let outcome = scan_tau(&cfg)?;

    let mut header = vec!["tau", "best_phase", "best_p", "cluster_dim", "label"];
    if cfg.fidelity.is_some() {
        header.push("fidelity");
    }
    let mut csv = Csv::new(&header);
    for r in &outcome.records {
        let mut row =
            vec![fmt_g(r.tau), fmt_g(r.best_phase), fmt_g(r.best_p), r.cluster_dim.to_string(), r.label.to_string()];
        if let Some(f) = r.fidelity {
            row.push(fmt_g(f));
        }
        csv.push(row);
    }
    if let Some(path) = &a.clusters_json {
        let dump: Vec<_> =
            outcome.records.iter().map(|r| json!({ "tau": r.tau, "clusters": r.all_clusters })).collect();
        std::fs::write(path, serde_json::to_string_pretty(&dump).map_err(std::io::Error::other)? + "\n")?;
    }
    let peak = outcome.peak();
    let mut manifest = RunManifest::new("scan", json!({ "config": cfg, "grid_points": cfg.grid.len() }));
    manifest.summary = Some(json!({
        "peak_tau": peak.tau,
        "peak_best_p": peak.best_p,
        "peak_phase": peak.best_phase,
        "peak_fidelity": outcome.peak_fidelity().map(|(t, f)| json!({ "tau": t, "fidelity": f })),
    }));
    output::emit(a.out.as_deref(), &csv.render(), &manifest)?;
    Ok(0)
}

fn cmd_sweep(a: SweepArgs) -> std::result::Result<i32, CliError> {
    let mut cfg = SweepConfig::new(a.exchange.spec(3), a.ns.0.clone()).with_grid(a.tau.clone());
    cfg.model = a.model.params()?;
    let rows = sweep_chain_sizes(&cfg)?;
    let mut csv = Csv::new(&["n", "p_peak", "tau_at_peak", "phase_at_peak"]);
    for r in &rows {
        csv.push(vec![r.n.to_string(), fmt_g(r.p_peak), fmt_g(r.tau_at_peak), fmt_g(r.phase_at_peak)]);
    }
    let manifest = RunManifest::new(
        "sweep",
        json!({ "exchange": cfg.exchange.kind.to_string(), "raw": a.exchange.raw, "degenerate": a.exchange.degenerate,
                "ns": cfg.ns, "grid_start": cfg.grid.start(), "grid_end": cfg.grid.end(),
                "grid_step": cfg.grid.step(), "grid_points": cfg.grid.len(), "model": cfg.model }),
    );
    output::emit(a.out.as_deref(), &csv.render(), &manifest)?;
    Ok(0)
}

fn cmd_search(a: SearchArgs) -> std::result::Result<i32, CliError> {
    let cfg = ScanConfig::new(a.exchange.spec(a.n)).with_grid(a.tau.clone()).with_model(a.model.params()?);
    let cert = exact_transfer_search(&cfg, a.threshold)?;
    let body = serde_json::to_string_pretty(&cert).map_err(std::io::Error::other)? + "\n";
    let manifest = RunManifest::new("search", json!({ "config": cfg, "threshold": a.threshold }));
    output::emit(a.out.as_deref(), &body, &manifest)?;
    Ok(0)
}

fn cmd_oracle(a: OracleArgs) -> std::result::Result<i32, CliError> {
    let report = run_oracle(&a.ns.0, &a.taus.0)?;
    let mut body = String::new();
    if a.demo_gates {
        for d in gate_demos()? {
            body.push_str(&d.transcript());
            body.push('\n');
        }
    }
    body.push_str(&report.render());
    let mut manifest =
        RunManifest::new("oracle", json!({ "ns": a.ns.0, "taus": a.taus.0, "demo_gates": a.demo_gates }));
    manifest.summary = Some(json!({ "pass": report.pass, "max_deviation": report.max_deviation }));
    output::emit(a.out.as_deref(), &body, &manifest)?;
    Ok(if report.pass { 0 } else { 3 })
}
