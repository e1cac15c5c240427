//! Command-line experiment runner for the displacement-product metrology
//! toolkit: Monte Carlo simulation of every measurement scheme, log-log
//! scaling-exponent fits with pass/fail bands, analytic bound sweeps,
//! Fisher-information tables, and a truncated-basis oracle cross-check —
//! all emitted as deterministic CSV or JSON reports.
//!
//! Determinism contract: every random number derives from the master
//! `--seed` through named substreams, and trial results are reduced in
//! trial order, so identical configurations produce byte-identical report
//! files across runs and across `--workers` settings.
//!
//! Exit codes: 0 success, 1 usage/config error, 2 numerical failure,
//! 3 tolerance failure (a FAIL row in `scaling` or `oracle-check`).

mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64 as C64;
use rand::Rng;
use thiserror::Error;

use cvswitch::bounds;
use cvswitch::estimation;
use cvswitch::fock_oracle::{
    apply_controlled_word, coherent_amplitudes, control_outcome_probs, displacement_matrix,
    ControlProbeState,
};
use cvswitch::rng::stream;
use cvswitch::schemes::{
    ion_trap_plus_probability, ion_trap_word, switch_plus_probability, ProblemInstance, SchemeTag,
};
use cvswitch::weyl::{normalize, switch_word, Displacement, DisplacementWord};

use config::FileConfig;
use report::{Cell, Format, Report, Table};

/// Substream family for drawing random problem instances (`[6, n]`);
/// families 0–5 are reserved for the per-scheme Monte Carlo trial streams.
const INSTANCE_STREAM: u64 = 6;
/// Substream family for the oracle cross-check draws.
const ORACLE_STREAM: u64 = 7;

#[derive(Debug, Error)]
enum CliError {
    /// Bad flags, config contents, or unwritable output.
    #[error("{0}")]
    Usage(String),
    /// A computation reported failure (singular information, truncation too
    /// small, every trial discarded, ...).
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn numerical(err: impl std::fmt::Display) -> CliError {
    CliError::Numerical(err.to_string())
}

fn parse_range(text: &str) -> Result<(f64, f64), String> {
    let Some((lo, hi)) = text.split_once(',') else {
        return Err("expected LO,HI".to_string());
    };
    let lo: f64 = lo.trim().parse().map_err(|e| format!("bad lower endpoint: {e}"))?;
    let hi: f64 = hi.trim().parse().map_err(|e| format!("bad upper endpoint: {e}"))?;
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(format!("need finite LO ≤ HI, got {lo},{hi}"));
    }
    Ok((lo, hi))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SchemeArg {
    /// One probe per box, one homodyne read each
    Parallel,
    /// One probe through every box in a fixed order, two homodyne reads
    Sequential,
    /// Superposed-order probe, control qubit read only
    #[value(name = "switch_control")]
    SwitchControl,
    /// Superposed-order probe, control qubit plus heterodyne read
    #[value(name = "switch_joint")]
    SwitchJoint,
    /// Conjugated-gate echo variant carrying a doubled phase
    #[value(name = "ion_trap")]
    IonTrap,
}

impl SchemeArg {
    const ALL: [SchemeArg; 5] = [
        SchemeArg::Parallel,
        SchemeArg::Sequential,
        SchemeArg::SwitchControl,
        SchemeArg::SwitchJoint,
        SchemeArg::IonTrap,
    ];

    fn tag(self) -> SchemeTag {
        match self {
            SchemeArg::Parallel => SchemeTag::Parallel,
            SchemeArg::Sequential => SchemeTag::Sequential,
            SchemeArg::SwitchControl => SchemeTag::SwitchControl,
            SchemeArg::SwitchJoint => SchemeTag::SwitchJoint,
            SchemeArg::IonTrap => SchemeTag::IonTrap,
        }
    }

    fn parse_name(name: &str) -> CliResult<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|s| s.tag().as_str() == name)
            .ok_or_else(|| {
                usage(format!(
                    "unknown scheme `{name}` (expected one of: parallel, sequential, \
                     switch_control, switch_joint, ion_trap)"
                ))
            })
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "cvswitch",
    version,
    about = "Simulate and bound estimation of a product of mean displacements",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Monte Carlo RMSE and bias of the measurement schemes
    #[command(after_help = "Config keys: scheme, n, nu, trials, seed, xbar, pbar, \
                            x-range, p-range, xs, ps")]
    Simulate(SimulateArgs),
    /// Fit log-log RMSE-vs-n slopes and check them against expected bands
    #[command(after_help = "Config keys: scheme, n, nu, trials, seed, xbar, pbar, \
                            expected-slope, slope-tol")]
    Scaling(ScalingArgs),
    /// Analytic comparison curves over a grid of common displacement means
    #[command(after_help = "Config keys: energy, n, nu, z-start, z-stop, z-step")]
    Figure3(Figure3Args),
    /// Closed-form precision limits at one parameter point
    #[command(after_help = "Config keys: n, nu, energy, budget, xbar, pbar, zmax")]
    Bounds(BoundsArgs),
    /// Joint-readout Fisher information: closed form against quadrature
    #[command(after_help = "Config keys: n, nu, xbar, pbar")]
    Fisher(FisherArgs),
    /// Cross-check analytic phases and probabilities against the truncated-basis oracle
    #[command(after_help = "Config keys: cases, n, dim, max-mag, seed")]
    OracleCheck(OracleArgs),
}

#[derive(Debug, clap::Args)]
struct OutputArgs {
    /// Write the report to this file instead of stdout
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Report format
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Flat TOML file supplying values for omitted flags (flags win)
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Worker threads for Monte Carlo trials (results do not depend on it)
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Debug, clap::Args)]
struct SimulateArgs {
    /// Scheme to run (repeatable; default: all five)
    #[arg(long = "scheme", value_enum)]
    scheme: Vec<SchemeArg>,
    /// Boxes per quadrature group (repeatable; default: 5)
    #[arg(long = "n")]
    n: Vec<usize>,
    /// Measurement shots per trial (default: 10000)
    #[arg(long)]
    nu: Option<u64>,
    /// Monte Carlo trials per (scheme, n) cell (default: 1000)
    #[arg(long)]
    trials: Option<u64>,
    /// Give every position shift exactly this value (default: 0.2)
    #[arg(long, allow_negative_numbers = true)]
    xbar: Option<f64>,
    /// Give every momentum shift exactly this value (default: 0.2)
    #[arg(long, allow_negative_numbers = true)]
    pbar: Option<f64>,
    /// Draw position shifts uniformly from LO,HI (one instance per n)
    #[arg(long, value_name = "LO,HI", allow_hyphen_values = true, value_parser = parse_range)]
    x_range: Option<(f64, f64)>,
    /// Draw momentum shifts uniformly from LO,HI
    #[arg(long, value_name = "LO,HI", allow_hyphen_values = true, value_parser = parse_range)]
    p_range: Option<(f64, f64)>,
    /// Master seed; every random draw derives from it
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, clap::Args)]
struct ScalingArgs {
    /// Scheme to fit (repeatable; default: switch_control, sequential, parallel)
    #[arg(long = "scheme", value_enum)]
    scheme: Vec<SchemeArg>,
    /// Boxes per group; at least three values (default: 3 5 8 12 20)
    #[arg(long = "n")]
    n: Vec<usize>,
    /// Measurement shots per trial (default: 10000)
    #[arg(long)]
    nu: Option<u64>,
    /// Monte Carlo trials per point (default: 500)
    #[arg(long)]
    trials: Option<u64>,
    /// Common position-shift value (default: 0.087584)
    #[arg(long, allow_negative_numbers = true)]
    xbar: Option<f64>,
    /// Common momentum-shift value (default: 0.087584)
    #[arg(long, allow_negative_numbers = true)]
    pbar: Option<f64>,
    /// Override the expected slope for every listed scheme
    #[arg(long, allow_negative_numbers = true)]
    expected_slope: Option<f64>,
    /// Override the slope tolerance for every listed scheme
    #[arg(long, allow_negative_numbers = true)]
    slope_tol: Option<f64>,
    /// Master seed; every random draw derives from it
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, clap::Args)]
struct Figure3Args {
    /// Probe energy, at least the vacuum value 0.5 (repeatable; default: 0.5)
    #[arg(long, allow_negative_numbers = true)]
    energy: Vec<f64>,
    /// Boxes per group (repeatable; default: 5)
    #[arg(long = "n")]
    n: Vec<usize>,
    /// Measurement shots (default: 10)
    #[arg(long)]
    nu: Option<u64>,
    /// First common mean on the sweep grid (default: 0.05)
    #[arg(long, allow_negative_numbers = true)]
    z_start: Option<f64>,
    /// Last common mean, inclusive (default: 1.0)
    #[arg(long, allow_negative_numbers = true)]
    z_stop: Option<f64>,
    /// Grid step (default: 0.05)
    #[arg(long, allow_negative_numbers = true)]
    z_step: Option<f64>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, clap::Args)]
struct BoundsArgs {
    /// Boxes per group (repeatable; default: 5)
    #[arg(long = "n")]
    n: Vec<usize>,
    /// Measurement shots (default: 1)
    #[arg(long)]
    nu: Option<u64>,
    /// Probe energy, at least the vacuum value 0.5 (default: 0.5)
    #[arg(long, allow_negative_numbers = true)]
    energy: Option<f64>,
    /// Total energy budget for the superposed-order limit (default: the probe energy)
    #[arg(long, allow_negative_numbers = true)]
    budget: Option<f64>,
    /// Mean position shift (default: 0.2)
    #[arg(long, allow_negative_numbers = true)]
    xbar: Option<f64>,
    /// Mean momentum shift (default: 0.2)
    #[arg(long, allow_negative_numbers = true)]
    pbar: Option<f64>,
    /// Largest magnitude any single shift may take (default: max(|xbar|, |pbar|))
    #[arg(long, allow_negative_numbers = true)]
    zmax: Option<f64>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, clap::Args)]
struct FisherArgs {
    /// Boxes per group (repeatable; default: 2)
    #[arg(long = "n")]
    n: Vec<usize>,
    /// Measurement shots entering the error bound (default: 1)
    #[arg(long)]
    nu: Option<u64>,
    /// Mean position shift (default: 1.0)
    #[arg(long, allow_negative_numbers = true)]
    xbar: Option<f64>,
    /// Mean momentum shift (default: 0.5)
    #[arg(long, allow_negative_numbers = true)]
    pbar: Option<f64>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, clap::Args)]
struct OracleArgs {
    /// Random words per check (default: 200)
    #[arg(long)]
    cases: Option<u64>,
    /// Largest boxes-per-group in a drawn word; at most 3 (default: 3)
    #[arg(long = "n")]
    n: Option<usize>,
    /// Truncated-basis dimension (default: 64)
    #[arg(long)]
    dim: Option<usize>,
    /// Largest magnitude of any drawn shift (default: 0.5)
    #[arg(long, allow_negative_numbers = true)]
    max_mag: Option<f64>,
    /// Seed for the drawn words (default: 1)
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    output: OutputArgs,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            if matches!(err.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                err.exit();
            }
            let _ = err.print();
            return ExitCode::from(1);
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.code())
        }
    }
}

fn run(command: Command) -> CliResult<u8> {
    match command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Scaling(args) => cmd_scaling(args),
        Command::Figure3(args) => cmd_figure3(args),
        Command::Bounds(args) => cmd_bounds(args),
        Command::Fisher(args) => cmd_fisher(args),
        Command::OracleCheck(args) => cmd_oracle_check(args),
    }
}

// ---------------------------------------------------------------------------
// Shared plumbing
// ---------------------------------------------------------------------------

fn load_config(output: &OutputArgs, allowed: &[&str]) -> CliResult<FileConfig> {
    let cfg = match &output.config {
        Some(path) => FileConfig::load(path).map_err(usage)?,
        None => FileConfig::empty(),
    };
    cfg.check_keys(allowed).map_err(usage)?;
    Ok(cfg)
}

fn configure_workers(output: &OutputArgs) -> CliResult<()> {
    if let Some(workers) = output.workers {
        if workers == 0 {
            return Err(usage("--workers must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
            .map_err(|e| usage(format!("worker pool: {e}")))?;
    }
    Ok(())
}

fn emit(report: &Report, output: &OutputArgs) -> CliResult<()> {
    let text = report.render(output.format);
    match &output.out {
        Some(path) => std::fs::write(path, &text)
            .map_err(|e| usage(format!("writing {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Record the effective run parameters as metadata plus their hash. Output
/// routing (path, format, workers) never appears here: it cannot change the
/// numbers.
fn stamp(report: &mut Report, command: &str, entries: &[(&str, String)]) {
    for (key, value) in entries {
        report.meta(key, value.clone());
    }
    let mut hashed: Vec<(&str, String)> = vec![("command", command.to_string())];
    hashed.extend(entries.iter().map(|(k, v)| (*k, v.clone())));
    report.meta("config_hash", config::canonical_hash(&hashed));
}

fn merge<T>(flag: Option<T>, file: Option<T>) -> Option<T> {
    flag.or(file)
}

fn resolve_list<T: Clone>(flag: &[T], file: Option<Vec<T>>, default: &[T]) -> Vec<T> {
    if !flag.is_empty() {
        flag.to_vec()
    } else {
        file.unwrap_or_else(|| default.to_vec())
    }
}

fn resolve_schemes(
    flag: &[SchemeArg],
    cfg: &FileConfig,
    default: &[SchemeArg],
) -> CliResult<Vec<SchemeArg>> {
    if !flag.is_empty() {
        return Ok(flag.to_vec());
    }
    match cfg.string_list("scheme").map_err(usage)? {
        Some(names) => names.iter().map(|name| SchemeArg::parse_name(name)).collect(),
        None => Ok(default.to_vec()),
    }
}

fn resolve_seed(flag: Option<u64>, cfg: &FileConfig) -> CliResult<u64> {
    merge(flag, cfg.u64("seed").map_err(usage)?).ok_or_else(|| {
        usage("a master seed is required: pass --seed or set `seed` in the config file")
    })
}

fn require_positive_n(ns: &[usize]) -> CliResult<()> {
    if ns.is_empty() {
        return Err(usage("at least one --n value is required"));
    }
    if ns.iter().any(|&n| n == 0) {
        return Err(usage("--n must be at least 1"));
    }
    Ok(())
}

fn require_shots(nu: u64) -> CliResult<()> {
    if nu == 0 {
        return Err(usage("--nu must be at least 1"));
    }
    Ok(())
}

/// The interference readouts identify the product only on one cosine
/// branch; reject configurations whose true product falls outside it
/// before any trial runs.
fn validate_windows(schemes: &[SchemeArg], product_mean: f64, n: usize) -> CliResult<()> {
    for scheme in schemes {
        let window = match scheme {
            SchemeArg::SwitchControl | SchemeArg::SwitchJoint => {
                Some(estimation::control_window(n))
            }
            SchemeArg::IonTrap => Some(estimation::ion_trap_window(n)),
            SchemeArg::Parallel | SchemeArg::Sequential => None,
        };
        if let Some((lo, hi)) = window {
            if !(product_mean > lo && product_mean < hi) {
                return Err(usage(format!(
                    "scheme {} identifies the product only inside ({lo}, {hi:.6}) at n = {n}; \
                     the configured shifts give {product_mean:.6} — shrink them or lower n",
                    scheme.tag().as_str(),
                )));
            }
        }
    }
    Ok(())
}

/// The closed-form precision limit each scheme's empirical RMSE is compared
/// against: readout-noise propagation for the two fixed-order baselines,
/// the interference values for the superposed-order schemes.
fn analytic_bound(tag: SchemeTag, inst: &ProblemInstance, nu: u64) -> f64 {
    let (x_bar, p_bar, n) = (inst.x_bar(), inst.p_bar(), inst.n());
    match tag {
        SchemeTag::Parallel => bounds::parallel_rmse(x_bar, p_bar, n, nu),
        SchemeTag::Sequential => bounds::sequential_rmse(x_bar, p_bar, n, nu),
        SchemeTag::SwitchControl => bounds::switch_rmse_control(n, nu),
        SchemeTag::SwitchJoint => bounds::switch_rmse_joint(x_bar, p_bar, n, nu),
        SchemeTag::IonTrap => bounds::ion_trap_rmse(n, nu),
        SchemeTag::BetaProbe => unreachable!("no command-line scheme maps to the phase probe"),
    }
}

/// Expected log-log slope and tolerance for each scheme's RMSE-vs-n line.
/// The joint readout approaches −2 only asymptotically (its prefactor is
/// n-dependent at moderate n), so it carries no default band.
fn default_band(scheme: SchemeArg) -> Option<(f64, f64)> {
    match scheme {
        SchemeArg::Parallel => Some((-0.5, 0.15)),
        SchemeArg::Sequential => Some((-1.0, 0.15)),
        SchemeArg::SwitchControl | SchemeArg::IonTrap => Some((-2.0, 0.1)),
        SchemeArg::SwitchJoint => None,
    }
}

fn join_display<T: std::fmt::Display>(items: &[T]) -> String {
    items.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn join_names(schemes: &[SchemeArg]) -> String {
    schemes.iter().map(|s| s.tag().as_str()).collect::<Vec<_>>().join(",")
}

/// `start + i·step` up to and including `stop` (with a small tolerance so
/// binary representation of the step cannot drop the endpoint).
fn grid_points(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let count = ((stop - start) / step + 1.0 + 1e-9).floor() as usize;
    (0..count).map(|i| start + i as f64 * step).collect()
}

fn wrap_angle(theta: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut t = theta % two_pi;
    if t > std::f64::consts::PI {
        t -= two_pi;
    }
    if t <= -std::f64::consts::PI {
        t += two_pi;
    }
    t
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

#[derive(Debug)]
enum InstancePlan {
    Means { xbar: f64, pbar: f64 },
    Ranges { x: (f64, f64), p: (f64, f64) },
    Lists { xs: Vec<f64>, ps: Vec<f64> },
}

fn build_instance(plan: &InstancePlan, n: usize, seed: u64) -> CliResult<ProblemInstance> {
    let built = match plan {
        InstancePlan::Means { xbar, pbar } => {
            ProblemInstance::from_lists(vec![*xbar; n], vec![*pbar; n])
        }
        InstancePlan::Ranges { x, p } => {
            let mut rng = stream(seed, &[INSTANCE_STREAM, n as u64]);
            ProblemInstance::uniform(n, *x, *p, &mut rng)
        }
        InstancePlan::Lists { xs, ps } => ProblemInstance::from_lists(xs.clone(), ps.clone()),
    };
    built.map_err(|e| usage(e.to_string()))
}

const SIMULATE_KEYS: &[&str] = &[
    "scheme", "n", "nu", "trials", "seed", "xbar", "pbar", "x-range", "p-range", "xs", "ps",
];

fn cmd_simulate(args: SimulateArgs) -> CliResult<u8> {
    let cfg = load_config(&args.output, SIMULATE_KEYS)?;
    configure_workers(&args.output)?;

    let schemes = resolve_schemes(&args.scheme, &cfg, &SchemeArg::ALL)?;
    let nu = merge(args.nu, cfg.u64("nu").map_err(usage)?).unwrap_or(10_000);
    let trials = merge(args.trials, cfg.u64("trials").map_err(usage)?).unwrap_or(1_000);
    require_shots(nu)?;
    if trials < 2 {
        return Err(usage("--trials must be at least 2"));
    }
    let seed = resolve_seed(args.seed, &cfg)?;

    let xbar = merge(args.xbar, cfg.f64("xbar").map_err(usage)?);
    let pbar = merge(args.pbar, cfg.f64("pbar").map_err(usage)?);
    let x_range = merge(args.x_range, cfg.pair("x-range").map_err(usage)?);
    let p_range = merge(args.p_range, cfg.pair("p-range").map_err(usage)?);
    let xs = cfg.f64_list("xs").map_err(usage)?;
    let ps = cfg.f64_list("ps").map_err(usage)?;

    let means_given = xbar.is_some() || pbar.is_some();
    let ranges_given = x_range.is_some() || p_range.is_some();
    let lists_given = xs.is_some() || ps.is_some();
    if u8::from(means_given) + u8::from(ranges_given) + u8::from(lists_given) > 1 {
        return Err(usage(
            "give exactly one instance description: xbar/pbar, x-range/p-range, or xs/ps",
        ));
    }
    let plan = if ranges_given {
        let (Some(x), Some(p)) = (x_range, p_range) else {
            return Err(usage("x-range and p-range must be given together"));
        };
        InstancePlan::Ranges { x, p }
    } else if lists_given {
        let (Some(xs), Some(ps)) = (xs, ps) else {
            return Err(usage("xs and ps must be given together"));
        };
        if xs.is_empty() || xs.len() != ps.len() {
            return Err(usage("xs and ps must be non-empty lists of equal length"));
        }
        InstancePlan::Lists { xs, ps }
    } else {
        InstancePlan::Means { xbar: xbar.unwrap_or(0.2), pbar: pbar.unwrap_or(0.2) }
    };

    let explicit_ns =
        if !args.n.is_empty() { Some(args.n.clone()) } else { cfg.usize_list("n").map_err(usage)? };
    let ns: Vec<usize> = match &plan {
        InstancePlan::Lists { xs, .. } => {
            let len = xs.len();
            if let Some(given) = &explicit_ns {
                if given.as_slice() != [len] {
                    return Err(usage(format!(
                        "explicit shift lists fix n = {len}; drop --n or set it to {len}"
                    )));
                }
            }
            vec![len]
        }
        _ => explicit_ns.unwrap_or_else(|| vec![5]),
    };
    require_positive_n(&ns)?;

    let mut entries: Vec<(&str, String)> = vec![
        ("scheme", join_names(&schemes)),
        ("n", join_display(&ns)),
        ("nu", nu.to_string()),
        ("trials", trials.to_string()),
    ];
    match &plan {
        InstancePlan::Means { xbar, pbar } => {
            entries.push(("instance", "means".to_string()));
            entries.push(("xbar", xbar.to_string()));
            entries.push(("pbar", pbar.to_string()));
        }
        InstancePlan::Ranges { x, p } => {
            entries.push(("instance", "ranges".to_string()));
            entries.push(("x-range", format!("{},{}", x.0, x.1)));
            entries.push(("p-range", format!("{},{}", p.0, p.1)));
        }
        InstancePlan::Lists { xs, ps } => {
            entries.push(("instance", "lists".to_string()));
            entries.push(("xs", join_display(xs)));
            entries.push(("ps", join_display(ps)));
        }
    }
    entries.push(("seed", seed.to_string()));

    let mut prepared = Vec::with_capacity(ns.len());
    for &n in &ns {
        let inst = build_instance(&plan, n, seed)?;
        validate_windows(&schemes, inst.product_mean(), n)?;
        prepared.push(inst);
    }

    let mut table = Table::new(
        "results",
        &[
            "scheme",
            "n",
            "nu",
            "trials",
            "discarded",
            "truth",
            "rmse",
            "rmse_stderr",
            "bias",
            "bias_stderr",
            "bound",
        ],
    );
    for inst in &prepared {
        for &scheme in &schemes {
            let tag = scheme.tag();
            let result =
                estimation::monte_carlo_rmse(tag, inst, nu, trials, seed).map_err(numerical)?;
            table.row(vec![
                tag.as_str().into(),
                result.n.into(),
                result.nu.into(),
                result.trials.into(),
                result.discarded.into(),
                inst.product_mean().into(),
                result.rmse.into(),
                result.rmse_std_error.into(),
                result.bias.into(),
                result.bias_std_error.into(),
                analytic_bound(tag, inst, nu).into(),
            ]);
        }
    }

    let mut report = Report::new("simulate");
    stamp(&mut report, "simulate", &entries);
    report.push(table);
    emit(&report, &args.output)?;
    Ok(0)
}

// ---------------------------------------------------------------------------
// scaling
// ---------------------------------------------------------------------------

const SCALING_KEYS: &[&str] =
    &["scheme", "n", "nu", "trials", "seed", "xbar", "pbar", "expected-slope", "slope-tol"];

fn cmd_scaling(args: ScalingArgs) -> CliResult<u8> {
    let cfg = load_config(&args.output, SCALING_KEYS)?;
    configure_workers(&args.output)?;

    let default_schemes =
        [SchemeArg::SwitchControl, SchemeArg::Sequential, SchemeArg::Parallel];
    let schemes = resolve_schemes(&args.scheme, &cfg, &default_schemes)?;
    let ns = resolve_list(&args.n, cfg.usize_list("n").map_err(usage)?, &[3, 5, 8, 12, 20]);
    require_positive_n(&ns)?;
    let distinct = {
        let mut d = ns.clone();
        d.sort_unstable();
        d.dedup();
        d.len()
    };
    if ns.len() < 3 || distinct < 2 {
        return Err(usage("the scaling fit needs at least three n values, two of them distinct"));
    }
    let nu = merge(args.nu, cfg.u64("nu").map_err(usage)?).unwrap_or(10_000);
    let trials = merge(args.trials, cfg.u64("trials").map_err(usage)?).unwrap_or(500);
    require_shots(nu)?;
    if trials < 2 {
        return Err(usage("--trials must be at least 2"));
    }
    let xbar = merge(args.xbar, cfg.f64("xbar").map_err(usage)?).unwrap_or(0.087584);
    let pbar = merge(args.pbar, cfg.f64("pbar").map_err(usage)?).unwrap_or(0.087584);
    let expected_override =
        merge(args.expected_slope, cfg.f64("expected-slope").map_err(usage)?);
    let tol_override = merge(args.slope_tol, cfg.f64("slope-tol").map_err(usage)?);
    if let Some(tol) = tol_override {
        if tol <= 0.0 {
            return Err(usage("--slope-tol must be positive"));
        }
    }
    let seed = resolve_seed(args.seed, &cfg)?;

    for &n in &ns {
        validate_windows(&schemes, xbar * pbar, n)?;
    }

    let mut entries: Vec<(&str, String)> = vec![
        ("scheme", join_names(&schemes)),
        ("n", join_display(&ns)),
        ("nu", nu.to_string()),
        ("trials", trials.to_string()),
        ("xbar", xbar.to_string()),
        ("pbar", pbar.to_string()),
    ];
    if let Some(e) = expected_override {
        entries.push(("expected-slope", e.to_string()));
    }
    if let Some(t) = tol_override {
        entries.push(("slope-tol", t.to_string()));
    }
    entries.push(("seed", seed.to_string()));

    let mut points = Table::new(
        "points",
        &["scheme", "n", "nu", "trials", "discarded", "rmse", "rmse_stderr", "bound"],
    );
    let mut fits = Table::new(
        "fits",
        &["scheme", "slope", "intercept", "r_squared", "expected", "tolerance", "status"],
    );
    let mut any_failed = false;
    for &scheme in &schemes {
        let tag = scheme.tag();
        let mut line = Vec::with_capacity(ns.len());
        for &n in &ns {
            let inst = ProblemInstance::from_lists(vec![xbar; n], vec![pbar; n])
                .map_err(|e| usage(e.to_string()))?;
            let result =
                estimation::monte_carlo_rmse(tag, &inst, nu, trials, seed).map_err(numerical)?;
            points.row(vec![
                tag.as_str().into(),
                n.into(),
                nu.into(),
                result.trials.into(),
                result.discarded.into(),
                result.rmse.into(),
                result.rmse_std_error.into(),
                analytic_bound(tag, &inst, nu).into(),
            ]);
            line.push((n as f64, result.rmse));
        }
        let fit = estimation::scaling_fit(&line).map_err(numerical)?;
        let band = match (expected_override, tol_override) {
            (Some(e), Some(t)) => Some((e, t)),
            (Some(e), None) => {
                Some((e, default_band(scheme).map(|(_, t)| t).unwrap_or(0.15)))
            }
            (None, Some(t)) => default_band(scheme).map(|(e, _)| (e, t)),
            (None, None) => default_band(scheme),
        };
        match band {
            Some((expected, tolerance)) => {
                let ok = (fit.slope - expected).abs() <= tolerance;
                any_failed |= !ok;
                fits.row(vec![
                    tag.as_str().into(),
                    fit.slope.into(),
                    fit.intercept.into(),
                    fit.r_squared.into(),
                    expected.into(),
                    tolerance.into(),
                    if ok { "PASS" } else { "FAIL" }.into(),
                ]);
            }
            None => {
                fits.row(vec![
                    tag.as_str().into(),
                    fit.slope.into(),
                    fit.intercept.into(),
                    fit.r_squared.into(),
                    "n/a".into(),
                    "n/a".into(),
                    "n/a".into(),
                ]);
            }
        }
    }

    let mut report = Report::new("scaling");
    stamp(&mut report, "scaling", &entries);
    report.push(points);
    report.push(fits);
    emit(&report, &args.output)?;
    Ok(if any_failed { 3 } else { 0 })
}

// ---------------------------------------------------------------------------
// figure3
// ---------------------------------------------------------------------------

const FIGURE3_KEYS: &[&str] = &["energy", "n", "nu", "z-start", "z-stop", "z-step"];

fn cmd_figure3(args: Figure3Args) -> CliResult<u8> {
    let cfg = load_config(&args.output, FIGURE3_KEYS)?;
    let energies = resolve_list(&args.energy, cfg.f64_list("energy").map_err(usage)?, &[0.5]);
    let ns = resolve_list(&args.n, cfg.usize_list("n").map_err(usage)?, &[5]);
    require_positive_n(&ns)?;
    let nu = merge(args.nu, cfg.u64("nu").map_err(usage)?).unwrap_or(10);
    require_shots(nu)?;
    let z_start = merge(args.z_start, cfg.f64("z-start").map_err(usage)?).unwrap_or(0.05);
    let z_stop = merge(args.z_stop, cfg.f64("z-stop").map_err(usage)?).unwrap_or(1.0);
    let z_step = merge(args.z_step, cfg.f64("z-step").map_err(usage)?).unwrap_or(0.05);
    for &energy in &energies {
        if energy < 0.5 {
            return Err(usage(format!(
                "probe energy must be at least the vacuum value 0.5 (got {energy})"
            )));
        }
    }
    if !(z_start > 0.0 && z_step > 0.0 && z_stop >= z_start) {
        return Err(usage("need 0 < z-start ≤ z-stop and z-step > 0"));
    }
    let grid = grid_points(z_start, z_stop, z_step);

    let entries: Vec<(&str, String)> = vec![
        ("energy", join_display(&energies)),
        ("n", join_display(&ns)),
        ("nu", nu.to_string()),
        ("z-start", z_start.to_string()),
        ("z-stop", z_stop.to_string()),
        ("z-step", z_step.to_string()),
        // the error columns are expressed in the natural phase unit of the
        // interference readout, 2π/n² per unit product
        ("rmse_units", "2*pi/n^2".to_string()),
    ];

    let mut table = Table::new(
        "curves",
        &["energy", "n", "nu", "z_bar", "switch_joint", "switch_control", "fixed_order",
          "crossover"],
    );
    for &energy in &energies {
        for &n in &ns {
            let unit = (n * n) as f64 / (2.0 * std::f64::consts::PI);
            let crossover = bounds::crossover_mean(energy, n);
            for row in bounds::comparison_rows(n, nu, energy, &grid) {
                table.row(vec![
                    energy.into(),
                    n.into(),
                    nu.into(),
                    row.z_bar.into(),
                    (row.switch_joint * unit).into(),
                    (row.switch_control * unit).into(),
                    (row.fixed_order * unit).into(),
                    crossover.into(),
                ]);
            }
        }
    }

    let mut report = Report::new("figure3");
    stamp(&mut report, "figure3", &entries);
    report.push(table);
    emit(&report, &args.output)?;
    Ok(0)
}

// ---------------------------------------------------------------------------
// bounds
// ---------------------------------------------------------------------------

const BOUNDS_KEYS: &[&str] = &["n", "nu", "energy", "budget", "xbar", "pbar", "zmax"];

fn cmd_bounds(args: BoundsArgs) -> CliResult<u8> {
    let cfg = load_config(&args.output, BOUNDS_KEYS)?;
    let ns = resolve_list(&args.n, cfg.usize_list("n").map_err(usage)?, &[5]);
    require_positive_n(&ns)?;
    let nu = merge(args.nu, cfg.u64("nu").map_err(usage)?).unwrap_or(1);
    require_shots(nu)?;
    let energy = merge(args.energy, cfg.f64("energy").map_err(usage)?).unwrap_or(0.5);
    let budget = merge(args.budget, cfg.f64("budget").map_err(usage)?).unwrap_or(energy);
    let xbar = merge(args.xbar, cfg.f64("xbar").map_err(usage)?).unwrap_or(0.2);
    let pbar = merge(args.pbar, cfg.f64("pbar").map_err(usage)?).unwrap_or(0.2);
    let zmax = merge(args.zmax, cfg.f64("zmax").map_err(usage)?)
        .unwrap_or_else(|| xbar.abs().max(pbar.abs()));
    if energy < 0.5 || budget < 0.5 {
        return Err(usage(
            "energy and budget must be at least the vacuum value 0.5",
        ));
    }
    if zmax < xbar.abs().max(pbar.abs()) {
        return Err(usage(
            "zmax caps every single shift, so it cannot be smaller than max(|xbar|, |pbar|)",
        ));
    }

    let entries: Vec<(&str, String)> = vec![
        ("n", join_display(&ns)),
        ("nu", nu.to_string()),
        ("energy", energy.to_string()),
        ("budget", budget.to_string()),
        ("xbar", xbar.to_string()),
        ("pbar", pbar.to_string()),
        ("zmax", zmax.to_string()),
    ];

    let mut table = Table::new(
        "limits",
        &[
            "n",
            "nu",
            "energy",
            "budget",
            "x_bar",
            "p_bar",
            "z_max",
            "single_probe",
            "switch_control",
            "switch_joint",
            "fixed_order",
            "ion_trap",
            "superposition",
            "crossover",
        ],
    );
    for &n in &ns {
        let query =
            bounds::BoundQuery { n, nu, energy, x_bar: xbar, p_bar: pbar, z_max: zmax };
        // the superposed-order limit is stated for a positive momentum mean
        let superposition: Cell = if pbar > 0.0 {
            query.superposition_bound(budget).into()
        } else {
            "n/a".into()
        };
        table.row(vec![
            n.into(),
            nu.into(),
            energy.into(),
            budget.into(),
            xbar.into(),
            pbar.into(),
            zmax.into(),
            query.single_displacement_crb().into(),
            query.switch_rmse_control().into(),
            query.switch_rmse_joint().into(),
            query.fixed_order_bound().into(),
            query.ion_trap_rmse().into(),
            superposition,
            bounds::crossover_mean(energy, n).into(),
        ]);
    }

    let mut report = Report::new("bounds");
    stamp(&mut report, "bounds", &entries);
    report.push(table);
    emit(&report, &args.output)?;
    Ok(0)
}

// ---------------------------------------------------------------------------
// fisher
// ---------------------------------------------------------------------------

const FISHER_KEYS: &[&str] = &["n", "nu", "xbar", "pbar"];

fn cmd_fisher(args: FisherArgs) -> CliResult<u8> {
    let cfg = load_config(&args.output, FISHER_KEYS)?;
    let ns = resolve_list(&args.n, cfg.usize_list("n").map_err(usage)?, &[2]);
    require_positive_n(&ns)?;
    let nu = merge(args.nu, cfg.u64("nu").map_err(usage)?).unwrap_or(1);
    require_shots(nu)?;
    let xbar = merge(args.xbar, cfg.f64("xbar").map_err(usage)?).unwrap_or(1.0);
    let pbar = merge(args.pbar, cfg.f64("pbar").map_err(usage)?).unwrap_or(0.5);

    let entries: Vec<(&str, String)> = vec![
        ("n", join_display(&ns)),
        ("nu", nu.to_string()),
        ("xbar", xbar.to_string()),
        ("pbar", pbar.to_string()),
    ];

    let mut table = Table::new(
        "fisher",
        &[
            "n",
            "nu",
            "x_bar",
            "p_bar",
            "f11",
            "f12",
            "f22",
            "det",
            "inv11",
            "crb",
            "control_info",
            "quad_rel_dev",
        ],
    );
    let rel = |got: f64, want: f64| {
        if want == 0.0 {
            (got - want).abs()
        } else {
            ((got - want) / want).abs()
        }
    };
    for &n in &ns {
        let closed = estimation::fisher_joint(xbar, pbar, n).map_err(numerical)?;
        let numeric = estimation::fisher_joint_numeric(xbar, pbar, n).map_err(numerical)?;
        let quad_rel_dev = rel(numeric.f11, closed.f11)
            .max(rel(numeric.f12, closed.f12))
            .max(rel(numeric.f22, closed.f22));
        table.row(vec![
            n.into(),
            nu.into(),
            xbar.into(),
            pbar.into(),
            closed.f11.into(),
            closed.f12.into(),
            closed.f22.into(),
            closed.determinant().into(),
            closed.inverse_11().map_err(numerical)?.into(),
            closed.crb(nu).map_err(numerical)?.into(),
            estimation::fisher_control(xbar * pbar, n).into(),
            quad_rel_dev.into(),
        ]);
    }

    let mut report = Report::new("fisher");
    stamp(&mut report, "fisher", &entries);
    report.push(table);
    emit(&report, &args.output)?;
    Ok(0)
}

// ---------------------------------------------------------------------------
// oracle-check
// ---------------------------------------------------------------------------

const ORACLE_KEYS: &[&str] = &["cases", "n", "dim", "max-mag", "seed"];

fn random_axis_word<R: Rng + ?Sized>(
    rng: &mut R,
    max_factors: usize,
    max_mag: f64,
) -> DisplacementWord {
    let count = rng.random_range(1..=max_factors);
    let factors = (0..count)
        .map(|_| {
            let magnitude = rng.random_range(-max_mag..=max_mag);
            if rng.random::<bool>() {
                Displacement::position(magnitude)
            } else {
                Displacement::momentum(magnitude)
            }
        })
        .collect();
    DisplacementWord::new(factors)
}

fn cmd_oracle_check(args: OracleArgs) -> CliResult<u8> {
    let cfg = load_config(&args.output, ORACLE_KEYS)?;
    let cases = merge(args.cases, cfg.u64("cases").map_err(usage)?).unwrap_or(200);
    let max_n = merge(args.n, cfg.usize("n").map_err(usage)?).unwrap_or(3);
    let dim = merge(args.dim, cfg.usize("dim").map_err(usage)?).unwrap_or(64);
    let max_mag = merge(args.max_mag, cfg.f64("max-mag").map_err(usage)?).unwrap_or(0.5);
    let seed = merge(args.seed, cfg.u64("seed").map_err(usage)?).unwrap_or(1);
    if cases == 0 {
        return Err(usage("--cases must be at least 1"));
    }
    if !(1..=3).contains(&max_n) {
        return Err(usage(format!(
            "the oracle runs dense matrix mechanics; n must be between 1 and 3 (got {max_n})"
        )));
    }
    if dim < 8 {
        return Err(usage("--dim must be at least 8"));
    }
    if !(max_mag.is_finite() && max_mag > 0.0) {
        return Err(usage("--max-mag must be positive"));
    }

    let entries: Vec<(&str, String)> = vec![
        ("cases", cases.to_string()),
        ("n", max_n.to_string()),
        ("dim", dim.to_string()),
        ("max-mag", max_mag.to_string()),
        ("seed", seed.to_string()),
    ];

    let mut rng = stream(seed, &[ORACLE_STREAM]);
    let mut interference_dev = 0.0f64;
    let mut echo_dev = 0.0f64;
    let mut phase_dev = 0.0f64;
    let mut normalization_dev = 0.0f64;

    for _ in 0..cases {
        let n = rng.random_range(1..=max_n);
        let xs: Vec<f64> = (0..n).map(|_| rng.random_range(-max_mag..=max_mag)).collect();
        let ps: Vec<f64> = (0..n).map(|_| rng.random_range(-max_mag..=max_mag)).collect();
        let inst =
            ProblemInstance::from_lists(xs.clone(), ps.clone()).map_err(|e| usage(e.to_string()))?;

        let word = switch_word(&xs, &ps);
        let state = apply_controlled_word(&ControlProbeState::plus_vacuum(dim), &word)
            .map_err(numerical)?;
        let (p_plus, _) = control_outcome_probs(&state);
        interference_dev = interference_dev.max((p_plus - switch_plus_probability(&inst)).abs());
        normalization_dev = normalization_dev.max((state.norm_sqr() - 1.0).abs());

        let echo = ion_trap_word(&xs, &ps);
        let echo_state = apply_controlled_word(&ControlProbeState::plus_vacuum(dim), &echo)
            .map_err(numerical)?;
        let (p_plus_echo, _) = control_outcome_probs(&echo_state);
        echo_dev = echo_dev.max((p_plus_echo - ion_trap_plus_probability(&inst)).abs());

        let word = random_axis_word(&mut rng, 2 * max_n, max_mag);
        // guard the intermediate excursion of the factor-by-factor product,
        // exactly like the controlled application does internally
        let mut net = C64::new(0.0, 0.0);
        let mut reach = 0.0f64;
        for factor in word.factors.iter().rev() {
            net += factor.alpha;
            reach = reach.max(net.norm_sqr());
        }
        if 4.0 * reach > dim as f64 {
            return Err(CliError::Numerical(format!(
                "truncation dimension {dim} cannot hold a word reaching |α|² = {reach:.2}; \
                 raise --dim or lower --max-mag"
            )));
        }
        let normal_form = normalize(&word);
        let mut vector = vec![C64::new(0.0, 0.0); dim];
        vector[0] = C64::new(1.0, 0.0);
        for factor in word.factors.iter().rev() {
            vector = displacement_matrix(factor.alpha, dim).map_err(numerical)?.apply(&vector);
        }
        let target = coherent_amplitudes(normal_form.total_alpha, dim);
        let overlap: C64 = target.iter().zip(&vector).map(|(&t, &g)| t.conj() * g).sum();
        phase_dev = phase_dev.max(wrap_angle(overlap.arg() - normal_form.phase).abs());
    }

    let checks: [(&str, f64, f64); 4] = [
        ("interference_probability", interference_dev, 1e-8),
        ("echo_probability", echo_dev, 1e-8),
        ("branch_phase", phase_dev, 1e-6),
        ("state_normalization", normalization_dev, 1e-10),
    ];
    let mut table = Table::new("checks", &["check", "cases", "max_dev", "tolerance", "status"]);
    let mut any_failed = false;
    for (name, max_dev, tolerance) in checks {
        let ok = max_dev <= tolerance;
        any_failed |= !ok;
        table.row(vec![
            name.into(),
            cases.into(),
            max_dev.into(),
            tolerance.into(),
            if ok { "PASS" } else { "FAIL" }.into(),
        ]);
    }

    let mut report = Report::new("oracle-check");
    stamp(&mut report, "oracle-check", &entries);
    report.push(table);
    emit(&report, &args.output)?;
    Ok(if any_failed { 3 } else { 0 })
}
