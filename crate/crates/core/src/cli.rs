//! Command-line front end.
//!
//! Every run prints (or writes to `--out`) a JSON document with top-level
//! keys `manifest`, `params` and `results`. The scan subcommands `bell` and
//! `report-eq5` also accept `--format csv`: the manifest is then written as a
//! `# manifest: {...}` comment line, followed by a header row and one row per
//! scanned value of mu.
//!
//! Exit status: 0 on success, 2 on usage or validation errors, 1 on I/O
//! failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::bell::{chsh_grid_scan, duan_epr, maximize_chsh, ChshOptimum, ChshSearch};
use crate::coinflip::{self, Cheat, CoinFlipConfig, DetectorModel, Party};
use crate::error::{check_mu, Error};
use crate::frames::{self, AccelParams};
use crate::gaussian::{two_mode_squeezed, vacuum_state, GaussianState};
use crate::qkd::generate_key_bits;
use crate::teleport::{self, OutcomeMode, TeleportationConfig};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Tolerances of the near-ideal check reported by `teleport`.
pub const MU_LIMIT_THRESHOLD: f64 = 0.99;
pub const MU_LIMIT_CENTER_TOL: f64 = 0.01;
pub const MU_LIMIT_VARIANCE_TOL: f64 = 1e-3;

#[derive(Debug, Parser)]
#[command(
    name = "unruh",
    version,
    about = "Protocols between accelerated observers sharing the vacuum"
)]
pub struct Cli {
    /// RNG seed; runs are reproducible for a fixed seed.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads for Monte Carlo loops. Results do not depend on it.
    #[arg(long, global = true, default_value_t = 1)]
    pub shards: usize,
    /// Write output here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Steer Bob's mirror mode with Alice's homodyne measurement.
    Teleport(TeleportArgs),
    /// Coin flip from correlated photon counts, optionally with a cheat.
    Coinflip(CoinflipArgs),
    /// Frame parameters: mu, Unruh temperature, Bogoliubov map.
    Frames(FramesArgs),
    /// EPR variance and displaced-parity CHSH of the vacuum mode pair.
    Bell(BellArgs),
    /// Key bits with error rate and CHSH check.
    Qkd(QkdArgs),
    /// Compare the reference conditional state with the pipeline over mu.
    #[command(name = "report-eq5")]
    ReportEq5(ReportArgs),
}

#[derive(Debug, Clone, Args)]
#[group(required = true, multiple = false)]
pub struct MuArg {
    /// Squeezing parameter, 0 <= mu < 1.
    #[arg(long, allow_hyphen_values = true)]
    pub mu: Option<f64>,
    /// mu^2, 0 <= mu^2 < 1.
    #[arg(long = "mu-squared", allow_hyphen_values = true)]
    pub mu_squared: Option<f64>,
}

#[derive(Debug, Clone, Args)]
#[group(required = false, multiple = false)]
pub struct OptionalMuArg {
    /// Squeezing parameter, 0 <= mu < 1. Without it a default grid is scanned.
    #[arg(long, allow_hyphen_values = true)]
    pub mu: Option<f64>,
    #[arg(long = "mu-squared", allow_hyphen_values = true)]
    pub mu_squared: Option<f64>,
}

fn resolve_mu(mu: Option<f64>, mu_squared: Option<f64>) -> Result<Option<f64>, Error> {
    match (mu, mu_squared) {
        (Some(m), None) => {
            check_mu(m)?;
            Ok(Some(m))
        }
        (None, Some(m2)) => {
            if !(0.0..1.0).contains(&m2) {
                return Err(Error::InvalidParameter(format!(
                    "mu^2 = {m2} is out of range; require 0 <= mu^2 < 1"
                )));
            }
            Ok(Some(m2.sqrt()))
        }
        _ => Ok(None),
    }
}

impl MuArg {
    fn resolve(&self) -> Result<f64, Error> {
        resolve_mu(self.mu, self.mu_squared)?.ok_or_else(|| {
            Error::InvalidParameter("one of --mu or --mu-squared is required".into())
        })
    }
}

/// Parses `re,im` into a pair of finite reals.
pub fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 2 {
        return Err(format!("expected `re,im`, got `{s}`"));
    }
    let re: f64 = parts[0]
        .parse()
        .map_err(|e| format!("`{}`: {e}", parts[0]))?;
    let im: f64 = parts[1]
        .parse()
        .map_err(|e| format!("`{}`: {e}", parts[1]))?;
    if !(re.is_finite() && im.is_finite()) {
        return Err(format!("non-finite value in `{s}`"));
    }
    Ok((re, im))
}

#[derive(Debug, Clone, Args)]
pub struct TeleportArgs {
    #[command(flatten)]
    pub mu: MuArg,
    /// Coherent amplitude of Alice's input mode, `re,im`.
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true, default_value = "0,0")]
    pub alpha: (f64, f64),
    /// Alice's outcomes `X,P`. Sampled from the seed when absent.
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
    pub outcomes: Option<(f64, f64)>,
    /// Leave Bob's input mode in its thermal state instead of cooling it.
    #[arg(long)]
    pub thermal_bob: bool,
    /// Monte Carlo trials for the outcome-averaged fidelity; 0 skips it.
    #[arg(long, default_value_t = 0)]
    pub trials: u64,
    /// Displacement gain used for the averaged fidelity.
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub gain: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheatKind {
    None,
    Injection,
    ReportFlip,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PartyArg {
    Alice,
    Bob,
}

impl From<PartyArg> for Party {
    fn from(p: PartyArg) -> Self {
        match p {
            PartyArg::Alice => Party::Alice,
            PartyArg::Bob => Party::Bob,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct DetectorArgs {
    /// Detector efficiency for both parties.
    #[arg(long, default_value_t = 1.0)]
    pub efficiency: f64,
    /// Dark-count probability per detection for both parties.
    #[arg(long, default_value_t = 0.0)]
    pub dark_count: f64,
}

impl DetectorArgs {
    fn model(&self) -> Result<DetectorModel, Error> {
        DetectorModel::new(self.efficiency, self.dark_count)
    }
}

#[derive(Debug, Clone, Args)]
pub struct CoinflipArgs {
    #[command(flatten)]
    pub mu: MuArg,
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
    #[command(flatten)]
    pub detectors: DetectorArgs,
    #[arg(long, value_enum, default_value_t = CheatKind::None)]
    pub cheat: CheatKind,
    /// Photons injected into Alice's mode (injection cheat).
    #[arg(long, default_value_t = 1)]
    pub photons: u64,
    /// Probability that the injection evades Alice's vacuum check.
    #[arg(long, default_value_t = 1.0)]
    pub evade_prob: f64,
    /// Party that negates its announcement (report-flip cheat).
    #[arg(long, value_enum, default_value_t = PartyArg::Bob)]
    pub cheater: PartyArg,
}

#[derive(Debug, Clone, Args)]
pub struct FramesArgs {
    /// Proper acceleration.
    #[arg(long)]
    pub accel: f64,
    /// Rindler frequency.
    #[arg(long)]
    pub omega: f64,
    /// Speed of light; defaults to the SI value.
    #[arg(long)]
    pub c: Option<f64>,
    /// Use hbar = k_B = 1 (and c = 1 unless `--c` is given).
    #[arg(long)]
    pub natural: bool,
    /// Mirror separation for the geometric form of mu.
    #[arg(long, requires = "wavelength")]
    pub distance: Option<f64>,
    #[arg(long, requires = "distance")]
    pub wavelength: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct BellArgs {
    #[command(flatten)]
    pub mu: OptionalMuArg,
    /// Coarse grid points per setting coordinate.
    #[arg(long, default_value_t = 9)]
    pub grid: usize,
    /// Half-width of the searched displacement box.
    #[arg(long, default_value_t = 1.0)]
    pub radius: f64,
    /// Random restarts of the local search.
    #[arg(long, default_value_t = 8)]
    pub restarts: usize,
}

#[derive(Debug, Clone, Args)]
pub struct QkdArgs {
    #[command(flatten)]
    pub mu: MuArg,
    #[arg(long, default_value_t = 10_000)]
    pub bits: u64,
    #[command(flatten)]
    pub detectors: DetectorArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ReportArgs {
    /// Comma-separated values of mu.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "0.1,0.3,0.5,0.7,0.9,0.99,0.999"
    )]
    pub mu_grid: Vec<f64>,
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true, default_value = "1,0")]
    pub alpha: (f64, f64),
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true, default_value = "0.5,-0.2")]
    pub outcomes: (f64, f64),
}

/// Provenance block embedded in every output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub params: Value,
    pub seed: u64,
    pub version: String,
    pub timestamp: String,
}

impl RunManifest {
    pub fn new(subcommand: &str, params: Value, seed: u64) -> Self {
        Self {
            subcommand: subcommand.to_string(),
            params,
            seed,
            version: VERSION.to_string(),
            timestamp: chrono::Utc::now().to_rfc3339(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Validation(#[from] Error),
    #[error("{0}")]
    Usage(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization: {0}")]
    Serialize(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) | CliError::Usage(_) => 2,
            CliError::Io(_) | CliError::Serialize(_) => 1,
        }
    }
}

#[derive(Serialize)]
struct StateView {
    labels: Vec<String>,
    center: Vec<f64>,
    covariance: Vec<Vec<f64>>,
}

fn view(state: &GaussianState) -> StateView {
    let c = state.covariance();
    StateView {
        labels: state.labels().to_vec(),
        center: state.mean().iter().copied().collect(),
        covariance: (0..c.nrows())
            .map(|i| c.row(i).iter().copied().collect())
            .collect(),
    }
}

struct Report {
    subcommand: &'static str,
    params: Value,
    results: Value,
    csv: Option<(Vec<&'static str>, Vec<Vec<f64>>)>,
}

fn to_value<T: Serialize>(v: &T) -> Result<Value, CliError> {
    serde_json::to_value(v).map_err(|e| CliError::Serialize(e.to_string()))
}

fn teleport_cmd(a: &TeleportArgs, seed: u64, shards: usize) -> Result<Report, CliError> {
    let mu = a.mu.resolve()?;
    let alpha0 = Complex64::new(a.alpha.0, a.alpha.1);
    let outcomes = match a.outcomes {
        Some((x, p)) => OutcomeMode::Fixed { x, p },
        None => OutcomeMode::Sampled { seed },
    };
    let mut config = TeleportationConfig::new(mu, alpha0, outcomes);
    config.cool_bob = !a.thermal_bob;
    let r = teleport::run_teleportation(&config)?;
    let (x, p) = r.outcomes;

    // As mu -> 1 the conditional centre tends to (X - x0, -(P + p0)).
    let limit = [x - alpha0.re, -(p + alpha0.im)];
    let centre = r.bob_conditional.mean();
    let mag = centre[0].hypot(centre[1]);
    let limit_mag = limit[0].hypot(limit[1]);
    let cov = r.bob_conditional.covariance();
    let variance_gap = (cov[(0, 0)] - 0.25).abs().max((cov[(1, 1)] - 0.25).abs());
    let applicable = mu >= MU_LIMIT_THRESHOLD;
    let passed = applicable
        && (mag - limit_mag).abs() <= MU_LIMIT_CENTER_TOL
        && variance_gap <= MU_LIMIT_VARIANCE_TOL;

    let average = if a.trials > 0 {
        Some(teleport::average_fidelity(
            mu, a.gain, alpha0, a.trials, seed, shards,
        )?)
    } else {
        None
    };
    let params = json!({
        "mu": mu,
        "alpha": [alpha0.re, alpha0.im],
        "outcomes": a.outcomes.map(|(x, p)| [x, p]),
        "thermal_bob": a.thermal_bob,
        "trials": a.trials,
        "gain": a.gain,
    });
    let results = json!({
        "outcomes": [x, p],
        "bob_conditional": view(&r.bob_conditional),
        "eq5_reference": view(&r.eq5_reference),
        "fidelity_recentred": r.fidelity_recentred,
        "mu_limit": {
            "applicable": applicable,
            "limit_center": limit,
            "center_magnitude": mag,
            "limit_center_magnitude": limit_mag,
            "variance_gap": variance_gap,
            "passed": passed,
        },
        "mork": {
            "labels": r.mork.state.labels(),
            "measured_observables": r.mork.measured_observables,
            "entanglement": to_value(&r.mork.entanglement)?,
        },
        "average_fidelity": average.map(|e| to_value(&e)).transpose()?,
    });
    Ok(Report {
        subcommand: "teleport",
        params,
        results,
        csv: None,
    })
}

fn coinflip_cmd(a: &CoinflipArgs, seed: u64, shards: usize) -> Result<Report, CliError> {
    let mu = a.mu.resolve()?;
    let detector = a.detectors.model()?;
    let cheat = match a.cheat {
        CheatKind::None => Cheat::None,
        CheatKind::Injection => Cheat::Injection {
            photons: a.photons,
            evade_prob: a.evade_prob,
        },
        CheatKind::ReportFlip => Cheat::ReportFlip {
            party: a.cheater.into(),
        },
    };
    let config = CoinFlipConfig {
        mu,
        alice_detector: detector,
        bob_detector: detector,
        trials: a.trials,
        seed,
        cheat,
    };
    let stats = coinflip::run(&config, shards)?;
    let params = json!({
        "mu": mu,
        "mu_squared": mu * mu,
        "trials": a.trials,
        "detector": to_value(&detector)?,
        "cheat": to_value(&cheat)?,
    });
    Ok(Report {
        subcommand: "coinflip",
        params,
        results: to_value(&stats)?,
        csv: None,
    })
}

fn frames_cmd(a: &FramesArgs) -> Result<Report, CliError> {
    let base = if a.natural {
        AccelParams::natural(a.accel, a.omega)?
    } else {
        AccelParams::new(a.accel, a.omega)?
    };
    let params = AccelParams {
        speed_of_light: a.c.unwrap_or(base.speed_of_light),
        ..base
    }
    .validated()?;
    let mu = frames::mu_from_acceleration(&params);
    let fair = frames::fair_coin_acceleration(params.rindler_frequency, params.speed_of_light)?;
    let geometry = match (a.distance, a.wavelength) {
        (Some(d), Some(l)) => Some(frames::mu_from_geometry(d, l)?),
        _ => None,
    };
    let bogoliubov = if mu < 1.0 {
        let m = frames::bogoliubov_symplectic(mu)?;
        let m = m.matrix();
        Some(
            (0..4)
                .map(|i| m.row(i).iter().copied().collect::<Vec<f64>>())
                .collect::<Vec<_>>(),
        )
    } else {
        None
    };
    let results = json!({
        "mu": mu,
        "mu_squared": mu * mu,
        "unruh_temperature": frames::unruh_temperature(&params),
        "fair_coin_acceleration": fair,
        "mu_geometry": geometry,
        "bogoliubov_matrix": bogoliubov,
    });
    Ok(Report {
        subcommand: "frames",
        params: json!({
            "accel": to_value(&params)?,
            "distance": a.distance,
            "wavelength": a.wavelength,
        }),
        results,
        csv: None,
    })
}

pub const BELL_DEFAULT_GRID: [f64; 6] = [0.0, 0.2, 0.4, 0.6, 0.8, 0.9];

#[derive(Serialize)]
struct BellRow {
    mu: f64,
    duan_epr: f64,
    chsh: ChshOptimum,
    chsh_refined: ChshOptimum,
    refinement_gap: f64,
}

fn bell_cmd(a: &BellArgs, seed: u64) -> Result<Report, CliError> {
    let mus = match resolve_mu(a.mu.mu, a.mu.mu_squared)? {
        Some(m) => vec![m],
        None => BELL_DEFAULT_GRID.to_vec(),
    };
    let search = ChshSearch {
        grid_points: a.grid,
        radius: a.radius,
        restarts: a.restarts,
        seed,
        ..ChshSearch::default()
    };
    let refined = ChshSearch {
        grid_points: 2 * a.grid - 1,
        ..search
    };
    let mut rows = Vec::new();
    for &mu in &mus {
        let state = two_mode_squeezed(mu, 1.0, ["A", "B"])?;
        let chsh = maximize_chsh(&state, &search)?;
        let chsh_refined = maximize_chsh(&state, &refined)?;
        rows.push(BellRow {
            mu,
            duan_epr: duan_epr(&state)?,
            refinement_gap: (chsh.value - chsh_refined.value).abs(),
            chsh,
            chsh_refined,
        });
    }
    let vacuum = chsh_grid_scan(&vacuum_state(&["A", "B"])?, &search)?;
    let csv = rows
        .iter()
        .map(|r| {
            let s = r.chsh.setting;
            vec![
                r.mu,
                r.duan_epr,
                r.chsh.value,
                r.chsh_refined.value,
                s.a.re,
                s.a.im,
                s.b.re,
                s.b.im,
            ]
        })
        .collect();
    Ok(Report {
        subcommand: "bell",
        params: json!({
            "mu": mus,
            "grid": a.grid,
            "radius": a.radius,
            "restarts": a.restarts,
        }),
        results: json!({
            "rows": to_value(&rows)?,
            "vacuum_scan_max_abs": vacuum,
        }),
        csv: Some((
            vec![
                "mu",
                "duan_epr",
                "chsh_max",
                "chsh_refined",
                "a_re",
                "a_im",
                "b_re",
                "b_im",
            ],
            csv,
        )),
    })
}

fn bits_string(bits: &[u8]) -> String {
    bits.iter()
        .map(|&b| if b == 1 { '1' } else { '0' })
        .collect()
}

fn qkd_cmd(a: &QkdArgs, seed: u64, shards: usize) -> Result<Report, CliError> {
    let mu = a.mu.resolve()?;
    let d = a.detectors.model()?;
    let k = generate_key_bits(mu, a.bits, (d, d), seed, shards)?;
    Ok(Report {
        subcommand: "qkd",
        params: json!({
            "mu": mu,
            "bits": a.bits,
            "detector": to_value(&d)?,
        }),
        results: json!({
            "alice_bits": bits_string(&k.alice_bits),
            "bob_bits": bits_string(&k.bob_bits),
            "qber": k.qber,
            "qber_stderr": k.qber_stderr,
            "bit_bias": k.bit_bias,
            "bit_bias_stderr": k.bit_bias_stderr,
            "chsh_estimate": k.chsh_estimate,
            "chsh_setting": to_value(&k.chsh.setting)?,
        }),
        csv: None,
    })
}

const REPORT_HEADER: [&str; 10] = [
    "mu",
    "pipeline_center_x",
    "pipeline_center_p",
    "pipeline_variance",
    "reference_center_x",
    "reference_center_p",
    "reference_variance",
    "center_distance",
    "center_magnitude_gap",
    "variance_gap",
];

fn report_cmd(a: &ReportArgs) -> Result<Report, CliError> {
    let (a0, a1) = a.alpha;
    let (x, p) = a.outcomes;
    if a.mu_grid.is_empty() {
        return Err(CliError::Usage("--mu-grid is empty".into()));
    }
    let alpha0 = Complex64::new(a0, a1);
    let mut rows = Vec::new();
    for &mu in &a.mu_grid {
        let r = teleport::run_teleportation(&TeleportationConfig::new(
            mu,
            alpha0,
            OutcomeMode::Fixed { x, p },
        ))?;
        let (b, e) = (r.bob_conditional.mean(), r.eq5_reference.mean());
        let (bv, ev) = (
            r.bob_conditional.covariance()[(0, 0)],
            r.eq5_reference.covariance()[(0, 0)],
        );
        rows.push(vec![
            mu,
            b[0],
            b[1],
            bv,
            e[0],
            e[1],
            ev,
            (b[0] - e[0]).hypot(b[1] - e[1]),
            (b[0].hypot(b[1]) - e[0].hypot(e[1])).abs(),
            (bv - ev).abs(),
        ]);
    }
    let json_rows: Vec<Value> = rows
        .iter()
        .map(|r| {
            Value::Object(
                REPORT_HEADER
                    .iter()
                    .zip(r)
                    .map(|(k, v)| (k.to_string(), json!(v)))
                    .collect(),
            )
        })
        .collect();
    Ok(Report {
        subcommand: "report-eq5",
        params: json!({
            "mu_grid": a.mu_grid,
            "alpha": [a0, a1],
            "outcomes": [x, p],
        }),
        results: json!({ "rows": json_rows }),
        csv: Some((REPORT_HEADER.to_vec(), rows)),
    })
}

/// Runs a parsed command and renders its output document.
pub fn render(cli: &Cli) -> Result<String, CliError> {
    if cli.shards == 0 {
        return Err(Error::InvalidParameter("--shards must be at least 1".into()).into());
    }
    let report = match &cli.command {
        Command::Teleport(a) => teleport_cmd(a, cli.seed, cli.shards)?,
        Command::Coinflip(a) => coinflip_cmd(a, cli.seed, cli.shards)?,
        Command::Frames(a) => frames_cmd(a)?,
        Command::Bell(a) => bell_cmd(a, cli.seed)?,
        Command::Qkd(a) => qkd_cmd(a, cli.seed, cli.shards)?,
        Command::ReportEq5(a) => report_cmd(a)?,
    };
    let manifest = RunManifest::new(report.subcommand, report.params.clone(), cli.seed);
    match cli.format {
        Format::Json => {
            let doc = json!({
                "manifest": to_value(&manifest)?,
                "params": report.params,
                "results": report.results,
            });
            let mut s = serde_json::to_string_pretty(&doc)
                .map_err(|e| CliError::Serialize(e.to_string()))?;
            s.push('\n');
            Ok(s)
        }
        Format::Csv => {
            let (header, rows) = report.csv.ok_or_else(|| {
                CliError::Usage(format!(
                    "--format csv is only available for bell and report-eq5, not {}",
                    report.subcommand
                ))
            })?;
            let mut out = format!(
                "# manifest: {}\n",
                serde_json::to_string(&manifest).map_err(|e| CliError::Serialize(e.to_string()))?
            );
            let mut w = csv::Writer::from_writer(Vec::new());
            let ser = |e: csv::Error| CliError::Serialize(e.to_string());
            w.write_record(&header).map_err(ser)?;
            for r in rows {
                w.write_record(r.iter().map(|v| v.to_string()))
                    .map_err(ser)?;
            }
            let bytes = w
                .into_inner()
                .map_err(|e| CliError::Serialize(e.to_string()))?;
            out.push_str(
                &String::from_utf8(bytes).map_err(|e| CliError::Serialize(e.to_string()))?,
            );
            Ok(out)
        }
    }
}

/// Parses `argv` (program name first), runs, writes output, returns the exit code.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match render(&cli).and_then(|text| write_output(&cli, &text)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn write_output(cli: &Cli, text: &str) -> Result<(), CliError> {
    match &cli.out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}
