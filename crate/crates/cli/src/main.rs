//! Command-line driver: builds oracles from input files, runs one algorithm
//! per invocation and prints a JSON (or CSV) report with exact probabilities
//! and query ledgers.

mod inputs;
mod report;
mod selftest;

use clap::{Args, Parser, Subcommand, ValueEnum};
use inputs::{read_amplitudes, read_array, read_truth_table, read_weights};
use qfilter::amp_est::{decode_estimate, qae, AEConfig};
use qfilter::apps::{array_to_oracle, kdistinctness, mode_search, nonlinearity, InputArray, Padding};
use qfilter::biased_aa::{errored_amplify, AmplifyBackend, AmplifyConfig, BiasedOracle, Goodness, KMode};
use qfilter::filters::{ampfil, profil, AmpMode, DistributionOracle, FilterOptions};
use qfilter::hadamard::{true_amp_est, EstimationBackend, TrueAmpEstConfig};
use qfilter::mdist::{audit_query_count, demo_family, mdist_amp_est};
use qfilter::sim::{CountedOracle, Gate, PhaseFlip};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use report::{emit, Format};
use serde::Serialize;
use serde_json::{json, Value};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

#[derive(Parser, Debug)]
#[command(name = "qfilter", version, about = "Amplitude estimation and quantum filtering experiments on a statevector simulator")]
struct Cli {
    #[command(flatten)]
    run: RunOptions,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Serialize)]
struct RunOptions {
    /// Base seed; trial i uses seed + i.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Independent seeded trials.
    #[arg(long, global = true, default_value_t = 1)]
    trials: u64,
    /// Worker threads for the trials.
    #[arg(long, global = true, default_value_t = 1)]
    parallel: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Report file. Defaults to $QFILTER_OUTPUT_DIR/<command>.<ext>, else stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Include wall time in the report (makes reports non-reproducible).
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Args, Debug, Clone, Copy, Serialize)]
struct AmplifyArgs {
    #[arg(long, value_enum, default_value_t = Backend::Factored)]
    backend: Backend,
    /// Use this many oracle copies in the majority instead of the guaranteed count.
    #[arg(long)]
    relaxed_k: Option<usize>,
}

impl AmplifyArgs {
    fn options(&self, seed: u64) -> FilterOptions {
        FilterOptions { seed, backend: self.backend.into(), k_mode: self.k_mode() }
    }
    fn k_mode(&self) -> KMode {
        self.relaxed_k.map_or(KMode::Strict, KMode::Relaxed)
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, Serialize)]
#[serde(rename_all = "lowercase")]
enum Backend {
    Auto,
    Statevector,
    Factored,
}

impl From<Backend> for AmplifyBackend {
    fn from(b: Backend) -> Self {
        match b {
            Backend::Auto => AmplifyBackend::Auto,
            Backend::Statevector => AmplifyBackend::Statevector,
            Backend::Factored => AmplifyBackend::Factored,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, Serialize)]
#[serde(rename_all = "lowercase")]
enum EstBackend {
    Qae,
    Mdist,
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
enum Command {
    /// Amplitude estimation of a marked probability.
    Qae {
        /// Probability of a one-qubit rotation preparation.
        #[arg(long, conflicts_with = "input")]
        p: Option<f64>,
        /// JSON list of weights; the preparation samples an index.
        #[arg(long, requires = "marked")]
        input: Option<PathBuf>,
        /// Index whose probability is estimated (with --input).
        #[arg(long)]
        marked: Option<u64>,
        /// Estimation register width.
        #[arg(long, default_value_t = 7)]
        m: usize,
    },
    /// Estimate |⟨y|A|0⟩| from real and imaginary Hadamard tests.
    TrueAmpEst {
        /// JSON list of amplitudes (numbers or [re, im] pairs) prepared by A.
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 0)]
        target: u64,
        #[arg(long, default_value_t = 0.0625)]
        eps: f64,
        #[arg(long, default_value_t = 0.2)]
        delta: f64,
        #[arg(long, value_enum, default_value_t = EstBackend::Qae)]
        backend: EstBackend,
    },
    /// Count oracle calls of the shared-oracle family estimator.
    MdistAudit {
        #[arg(long, default_value_t = 3)]
        m: usize,
        #[arg(long, default_value_t = 1)]
        k: usize,
        /// Family sizes to compare.
        #[arg(long, value_delimiter = ',', default_values_t = vec![1usize, 2, 4])]
        members: Vec<usize>,
        #[arg(long, default_value_t = 2)]
        work: usize,
    },
    /// Amplification with a bounded-error marking oracle.
    BiasedAa {
        /// JSON list of weights of the preparation over 2^n inputs.
        #[arg(long)]
        input: PathBuf,
        /// Indices the oracle marks with probability p.
        #[arg(long, value_delimiter = ',')]
        good: Vec<u64>,
        #[arg(long, default_value_t = 0.85)]
        p: f64,
        #[arg(long)]
        lambda: f64,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
        #[command(flatten)]
        amplify: AmplifyArgs,
    },
    /// Is some outcome at least τ likely (versus all below τ − ε)?
    Profil {
        /// JSON list of weights, or of array values with --array.
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        array: bool,
        #[arg(long)]
        tau: f64,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
        #[command(flatten)]
        amplify: AmplifyArgs,
    },
    /// Is some amplitude at least τ (versus all below τ − ε)?
    Ampfil {
        /// JSON list of amplitudes (numbers or [re, im] pairs).
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        tau: f64,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
        /// Threshold |Re α| instead of Re α.
        #[arg(long, conflicts_with = "complex")]
        signed: bool,
        /// Threshold |α|.
        #[arg(long)]
        complex: bool,
        #[command(flatten)]
        amplify: AmplifyArgs,
    },
    /// Does some value occur at least k times in the array?
    Kdist {
        /// JSON list of non-negative integers.
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
        /// Alphabet size; inferred from the values when absent.
        #[arg(long)]
        alphabet: Option<u64>,
        #[command(flatten)]
        amplify: AmplifyArgs,
    },
    /// Most likely outcome of a distribution with a known gap.
    Mode {
        /// JSON list of weights.
        #[arg(long)]
        input: PathBuf,
        /// Lower bound on the gap between the two largest probabilities.
        #[arg(long)]
        gap: f64,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
        #[command(flatten)]
        amplify: AmplifyArgs,
    },
    /// Distance of a Boolean function from the nearest affine function.
    Nonlin {
        /// Text file holding a truth table of length 2^n, first input most significant.
        #[arg(long)]
        truth_table: PathBuf,
        #[arg(long)]
        lambda: f64,
        #[arg(long, default_value_t = 0.2)]
        delta: f64,
        #[command(flatten)]
        amplify: AmplifyArgs,
    },
    /// Quick end-to-end checks of the installation.
    Selftest,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Qae { .. } => "qae",
            Command::TrueAmpEst { .. } => "true-amp-est",
            Command::MdistAudit { .. } => "mdist-audit",
            Command::BiasedAa { .. } => "biased-aa",
            Command::Profil { .. } => "profil",
            Command::Ampfil { .. } => "ampfil",
            Command::Kdist { .. } => "kdist",
            Command::Mode { .. } => "mode",
            Command::Nonlin { .. } => "nonlin",
            Command::Selftest => "selftest",
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Parse(String),
    Budget(String),
    Output(String),
    Failed(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Parse(_) => 3,
            CliError::Budget(_) => 4,
            CliError::Output(_) | CliError::Failed(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Parse(m) => write!(f, "parse error: {m}"),
            CliError::Budget(m) => write!(f, "budget exceeded: {m}"),
            CliError::Output(m) => write!(f, "output error: {m}"),
            CliError::Failed(m) => write!(f, "{m}"),
        }
    }
}

impl From<qfilter::Error> for CliError {
    fn from(e: qfilter::Error) -> Self {
        match e {
            qfilter::Error::WidthBudgetExceeded { .. } => CliError::Budget(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

type Trial = Box<dyn Fn(u64) -> Result<Value, CliError> + Send + Sync>;

fn to_value(v: impl Serialize) -> Result<Value, CliError> {
    serde_json::to_value(v).map_err(|e| CliError::Output(e.to_string()))
}

fn check_unit(name: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(CliError::Config(format!("{name} must lie in (0, 1), got {v}")))
    }
}

fn prepare(command: &Command) -> Result<Trial, CliError> {
    Ok(match command.clone() {
        Command::Qae { p, input, marked, m } => {
            let config = AEConfig::new(m)?;
            let od = match (&p, &input) {
                (Some(p), None) => {
                    if !(0.0..=1.0).contains(p) {
                        return Err(CliError::Config(format!("p must lie in [0, 1], got {p}")));
                    }
                    None
                }
                (None, Some(path)) => {
                    let od = DistributionOracle::from_weights(&read_weights(path)?)?;
                    let x = marked.unwrap_or(0);
                    if x as usize >= od.exact_probs().len() {
                        return Err(CliError::Config(format!("marked index {x} out of range")));
                    }
                    Some(od)
                }
                _ => return Err(CliError::Config("give either --p or --input with --marked".into())),
            };
            Box::new(move |seed| {
                let (prep, marker, p_true) = match (&od, p) {
                    (Some(od), _) => {
                        let od = od.fresh();
                        let x = marked.unwrap_or(0);
                        let marker = PhaseFlip::on_value(&od.outcome_register(0), x);
                        (od.oracle().clone(), CountedOracle::from_op("marker", Arc::new(marker)), od.exact_probs()[x as usize])
                    }
                    (None, Some(p)) => (
                        CountedOracle::from_op("prep", Arc::new(Gate::ry(0, 2.0 * p.sqrt().asin()))),
                        CountedOracle::from_op("marker", Arc::new(Gate::z(0))),
                        p,
                    ),
                    (None, None) => unreachable!(),
                };
                let run = qae(&prep, &marker, config)?;
                let dist = run.raw_distribution()?;
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let (raw, _) = run.state.measure(&run.estimation, &mut rng)?;
                let accuracy = if m > 3 { 1.0 / (1u64 << (m - 3)) as f64 } else { 1.0 };
                let mut success = 0.0;
                for (a, w) in dist.iter().enumerate() {
                    if (decode_estimate(a as u64, m)? - p_true).abs() <= accuracy {
                        success += w;
                    }
                }
                Ok(json!({
                    "estimate": decode_estimate(raw, m)?,
                    "raw": raw,
                    "true_probability": p_true,
                    "accuracy": accuracy,
                    "exact_success_prob": success,
                    "qubits": run.layout.width(),
                    "calls": { "prep": prep.snapshot(), "marker": marker.snapshot() },
                }))
            })
        }
        Command::TrueAmpEst { input, target, eps, delta, backend } => {
            check_unit("eps", eps)?;
            check_unit("delta", delta)?;
            let od = DistributionOracle::from_amplitudes(&read_amplitudes(&input)?)?;
            if target as usize >= od.exact_amps().len() {
                return Err(CliError::Config(format!("target {target} out of range")));
            }
            let backend = match backend {
                EstBackend::Qae => EstimationBackend::Qae,
                EstBackend::Mdist => EstimationBackend::MDist,
            };
            Box::new(move |seed| {
                let a = od.fresh().oracle().clone();
                let rep = true_amp_est(&a, target, TrueAmpEstConfig { epsilon: eps, delta, backend, seed })?;
                let qubits = 1 + a.width() + rep.m + usize::from(backend == EstimationBackend::MDist);
                let mut v = to_value(&rep)?;
                v["qubits"] = json!(qubits);
                v["within_eps"] = json!((rep.estimate.norm - rep.true_norm).abs() <= eps);
                Ok(v)
            })
        }
        Command::MdistAudit { m, k, members, work } => {
            AEConfig::new(m)?;
            if k == 0 || work == 0 || members.is_empty() || members.contains(&0) {
                return Err(CliError::Config("k, work and member counts must be positive".into()));
            }
            Box::new(move |_| {
                let mut rows = Vec::new();
                let mut totals = Vec::new();
                for &n in &members {
                    let index_width = (n.next_power_of_two().trailing_zeros() as usize).max(1);
                    let fam = demo_family(index_width, work, n, k)?;
                    let res = mdist_amp_est(&fam, m)?;
                    let audit = audit_query_count(&res);
                    totals.push(audit.oracle_calls);
                    rows.push(json!({ "members": n, "audit": audit, "qubits": index_width + work + m }));
                }
                let same = totals.iter().all(|t| *t == totals[0]);
                let pass = same && rows.iter().all(|r| r["audit"]["within_budget"] == json!(true));
                Ok(json!({ "m": m, "k": k, "runs": rows, "independent_of_members": same, "pass": pass }))
            })
        }
        Command::BiasedAa { input, good, p, lambda, delta, amplify } => {
            let od = DistributionOracle::from_weights(&read_weights(&input)?)?;
            let n = od.outcome_width();
            let mut goodness = vec![false; 1 << n];
            for &x in &good {
                *goodness
                    .get_mut(x as usize)
                    .ok_or_else(|| CliError::Config(format!("good index {x} out of range")))? = true;
            }
            let oracle = BiasedOracle::new(n, goodness.clone(), p)?;
            let truth: Vec<Goodness> = goodness.iter().map(|&g| if g { Goodness::Good } else { Goodness::Bad }).collect();
            Box::new(move |seed| {
                let cfg = AmplifyConfig {
                    lambda,
                    delta,
                    p,
                    k_mode: amplify.k_mode(),
                    backend: amplify.backend.into(),
                    seed,
                };
                let oracle = BiasedOracle::new(n, oracle.goodness().to_vec(), oracle.p())?;
                to_value(errored_amplify(od.fresh().oracle(), &oracle, cfg, Some(&truth))?)
            })
        }
        Command::Profil { input, array, tau, eps, delta, amplify } => {
            let od = if array {
                array_to_oracle(&InputArray::from_values(read_array(&input)?)?, Padding::Pad)?
            } else {
                DistributionOracle::from_weights(&read_weights(&input)?)?
            };
            Box::new(move |seed| to_value(profil(&od.fresh(), tau, eps, delta, amplify.options(seed))?))
        }
        Command::Ampfil { input, tau, eps, delta, signed, complex, amplify } => {
            let od = DistributionOracle::from_amplitudes(&read_amplitudes(&input)?)?;
            let mode = if complex {
                AmpMode::Complex
            } else if signed {
                AmpMode::Signed
            } else {
                AmpMode::Real
            };
            Box::new(move |seed| to_value(ampfil(&od.fresh(), tau, eps, delta, mode, amplify.options(seed))?))
        }
        Command::Kdist { input, k, delta, alphabet, amplify } => {
            let values = read_array(&input)?;
            let array = match alphabet {
                Some(a) => InputArray::new(values, a)?,
                None => InputArray::from_values(values)?,
            };
            Box::new(move |seed| to_value(kdistinctness(&array, k, delta, amplify.options(seed))?))
        }
        Command::Mode { input, gap, delta, amplify } => {
            let od = DistributionOracle::from_weights(&read_weights(&input)?)?;
            Box::new(move |seed| to_value(mode_search(&od.fresh(), gap, delta, amplify.options(seed))?))
        }
        Command::Nonlin { truth_table, lambda, delta, amplify } => {
            let f = read_truth_table(&truth_table)?;
            Box::new(move |seed| to_value(nonlinearity(&f, lambda, delta, amplify.options(seed))?))
        }
        Command::Selftest => Box::new(|_| selftest::run()),
    })
}

fn run(cli: &Cli) -> Result<Value, CliError> {
    let opts = &cli.run;
    if opts.trials == 0 || opts.parallel == 0 {
        return Err(CliError::Config("--trials and --parallel must be positive".into()));
    }
    let start = Instant::now();
    let trial = prepare(&cli.command)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.parallel)
        .build()
        .map_err(|e| CliError::Config(e.to_string()))?;
    let results: Vec<Value> = pool.install(|| {
        (0..opts.trials)
            .into_par_iter()
            .map(|i| {
                let seed = opts.seed.wrapping_add(i);
                let mut v = trial(seed)?;
                if let Value::Object(map) = &mut v {
                    map.insert("trial".into(), json!(i));
                    map.insert("seed".into(), json!(seed));
                }
                Ok(v)
            })
            .collect::<Result<_, CliError>>()
    })?;
    let mut report = json!({
        "command": cli.command.name(),
        "config": { "args": to_value(&cli.command)?, "seed": opts.seed, "trials": opts.trials },
        "trials": results,
    });
    if opts.timing {
        report["wall_time_s"] = json!(start.elapsed().as_secs_f64());
    }
    Ok(report)
}

/// Whether a finished report signals failure through its own verdict.
fn verdict_failed(command: &Command, report: &Value) -> bool {
    matches!(command, Command::Selftest | Command::MdistAudit { .. })
        && report["trials"].as_array().is_some_and(|t| t.iter().any(|r| r["pass"] == json!(false)))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = run(&cli).and_then(|report| {
        emit(&report, cli.command.name(), cli.run.format, cli.run.output.as_deref())?;
        if verdict_failed(&cli.command, &report) {
            return Err(CliError::Failed(format!("{} reported a failure", cli.command.name())));
        }
        Ok(())
    });
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qfilter: {e}");
            ExitCode::from(e.code())
        }
    }
}
