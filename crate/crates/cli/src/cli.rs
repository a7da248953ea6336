//! Flag parsing and process-level wiring: flags or a config file become a
//! `RunConfig`, worker threads are pinned, artifacts are written, and
//! failures map to distinct exit codes (2 invalid request, 3 numerical,
//! 4 I/O).

use crate::config::{
    parse_config, LabelMode, LineConfig, PdeConfig, PdeInit, PhaseDiagramConfig, PsiChoice,
    RunConfig, SimulateConfig, SolveConfig, ThresholdConfig, VerifyConfig,
};
use crate::presets::{preset, PRESET_NAMES};
use crate::run::{execute, CliError};
use clap::{Parser, Subcommand, ValueEnum};
use kuramoto2c_core::selfcons::Psi;
use kuramoto2c_core::{CouplingConfig, DisorderKind, InitialSpec, SimulationConfig};

pub const THREADS_ENV: &str = "KURAMOTO2C_THREADS";

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PsiArg {
    Zero,
    Pi,
}

impl From<PsiArg> for Psi {
    fn from(p: PsiArg) -> Psi {
        match p {
            PsiArg::Zero => Psi::Zero,
            PsiArg::Pi => Psi::Pi,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PsiChoiceArg {
    Zero,
    Pi,
    Both,
}

impl From<PsiChoiceArg> for PsiChoice {
    fn from(p: PsiChoiceArg) -> PsiChoice {
        match p {
            PsiChoiceArg::Zero => PsiChoice::Zero,
            PsiChoiceArg::Pi => PsiChoice::Pi,
            PsiChoiceArg::Both => PsiChoice::Both,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum LabelsArg {
    CriticalLine,
    Refined,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum KindArg {
    PointMassZero,
    Bimodal,
    Gaussian,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum InitArg {
    Uniform,
    VonMises,
    FirstHarmonic,
    Resume,
}

/// Shared disorder flags; which are required depends on --kind.
#[derive(Debug, clap::Args)]
struct DisorderArgs {
    /// Disorder law for the natural frequencies
    #[arg(long, value_enum, default_value = "point-mass-zero")]
    kind: KindArg,
    /// Frequency magnitude of the bimodal law
    #[arg(long)]
    omega0: Option<f64>,
    /// Standard deviation of the discretized gaussian law
    #[arg(long)]
    sigma: Option<f64>,
    /// Node count of the discretized gaussian law (odd)
    #[arg(long)]
    n_nodes: Option<usize>,
}

impl DisorderArgs {
    fn build(&self) -> Result<DisorderKind, CliError> {
        let reject = |name: &str| -> Result<(), CliError> {
            Err(CliError::Validation(format!(
                "--{name} does not apply to --kind {:?}",
                self.kind
            )))
        };
        match self.kind {
            KindArg::PointMassZero => {
                if self.omega0.is_some() {
                    reject("omega0")?;
                }
                if self.sigma.is_some() {
                    reject("sigma")?;
                }
                if self.n_nodes.is_some() {
                    reject("n-nodes")?;
                }
                Ok(DisorderKind::PointMassZero)
            }
            KindArg::Bimodal => {
                if self.sigma.is_some() {
                    reject("sigma")?;
                }
                if self.n_nodes.is_some() {
                    reject("n-nodes")?;
                }
                let omega0 = self.omega0.ok_or_else(|| {
                    CliError::Validation("--kind bimodal needs --omega0".into())
                })?;
                Ok(DisorderKind::Bimodal { omega0 })
            }
            KindArg::Gaussian => {
                if self.omega0.is_some() {
                    reject("omega0")?;
                }
                let sigma = self.sigma.ok_or_else(|| {
                    CliError::Validation("--kind gaussian needs --sigma".into())
                })?;
                let n_nodes = self.n_nodes.ok_or_else(|| {
                    CliError::Validation("--kind gaussian needs --n-nodes".into())
                })?;
                Ok(DisorderKind::DiscretizedGaussian { sigma, n_nodes })
            }
        }
    }
}

#[derive(Parser)]
#[command(
    name = "kuramoto2c",
    version,
    about = "Numerics for a noisy two-community oscillator model",
    long_about = "Fixed points, bifurcation geometry, frequency disorder, particle \
                  simulation, and spectral density evolution for a noisy two-community \
                  oscillator model. Every artifact starts with '#' header lines echoing \
                  the exact configuration, so a run can be reproduced from its output."
)]
struct Cli {
    /// JSON run configuration; replaces the subcommand
    #[arg(long)]
    config: Option<String>,
    /// Output file; stdout when omitted
    #[arg(long, global = true)]
    out: Option<String>,
    /// Seed override for stochastic commands
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (fallback: env KURAMOTO2C_THREADS, then all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Find all fixed points at one coupling, or emit its vector field
    Solve {
        /// Intra-community coupling
        #[arg(long, allow_hyphen_values = true)]
        k: Option<f64>,
        /// Inter-community coupling
        #[arg(long, allow_hyphen_values = true)]
        l: Option<f64>,
        /// Phase offset branch
        #[arg(long, value_enum, default_value = "zero")]
        psi: PsiArg,
        /// Emit the vector field at this grid resolution instead of the
        /// solution table
        #[arg(long)]
        vector_field: Option<usize>,
        /// Named parameter set (fig3)
        #[arg(long)]
        preset: Option<String>,
    },
    /// Trace the branch line K*(L) over a range of L < 0
    BifurcationLine {
        #[arg(long, allow_hyphen_values = true)]
        l_min: f64,
        #[arg(long, allow_hyphen_values = true)]
        l_max: f64,
        /// Number of samples
        #[arg(long, default_value_t = 200)]
        points: usize,
    },
    /// Classify a (K, L) grid into U, S, and optionally NS regions
    PhaseDiagram {
        #[arg(long)]
        k_min: Option<f64>,
        #[arg(long)]
        k_max: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        l_min: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        l_max: Option<f64>,
        /// Grid resolution per axis
        #[arg(long, default_value_t = 81)]
        resolution: usize,
        /// Phase offset branch, or both stacked into one table
        #[arg(long, value_enum, default_value = "zero")]
        psi: PsiChoiceArg,
        /// Region labeling: critical line only, or refined with NS
        #[arg(long, value_enum, default_value = "refined")]
        labels: LabelsArg,
        /// Named parameter set (fig2, fig8)
        #[arg(long)]
        preset: Option<String>,
    },
    /// Critical threshold and synchronization curve under disorder
    DisorderThreshold {
        #[command(flatten)]
        disorder: DisorderArgs,
        /// Smallest total coupling of the sweep (default: half the threshold)
        #[arg(long)]
        total_min: Option<f64>,
        /// Largest total coupling of the sweep (default: three thresholds)
        #[arg(long)]
        total_max: Option<f64>,
        /// Number of samples
        #[arg(long, default_value_t = 121)]
        points: usize,
    },
    /// Integrate the finite-population stochastic dynamics
    Simulate {
        /// Intra-community coupling
        #[arg(long, allow_hyphen_values = true)]
        k: Option<f64>,
        /// Inter-community coupling
        #[arg(long, allow_hyphen_values = true)]
        l: Option<f64>,
        /// Noise level
        #[arg(long, default_value_t = 1.0)]
        d: f64,
        /// Oscillators in community 1
        #[arg(long, default_value_t = 1000)]
        n1: usize,
        /// Oscillators in community 2
        #[arg(long, default_value_t = 1000)]
        n2: usize,
        /// Time step
        #[arg(long, default_value_t = 0.01)]
        dt: f64,
        /// Number of steps
        #[arg(long)]
        steps: Option<usize>,
        /// Initial mean phase of community 1
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        mean1: f64,
        /// Initial mean phase of community 2
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        mean2: f64,
        /// Initial concentration of community 1
        #[arg(long, default_value_t = 4.0)]
        conc1: f64,
        /// Initial concentration of community 2
        #[arg(long, default_value_t = 4.0)]
        conc2: f64,
        #[command(flatten)]
        disorder: DisorderArgs,
        /// Named parameter set (fig9, fig10)
        #[arg(long)]
        preset: Option<String>,
    },
    /// Evolve the mean-field density spectrally and snapshot it
    PdeEvolve {
        /// Intra-community coupling
        #[arg(long, allow_hyphen_values = true)]
        k: f64,
        /// Inter-community coupling
        #[arg(long, allow_hyphen_values = true)]
        l: f64,
        /// Noise level
        #[arg(long, default_value_t = 1.0)]
        d: f64,
        /// Retained Fourier modes per density
        #[arg(long, default_value_t = 64)]
        modes: usize,
        /// Final time
        #[arg(long)]
        t_end: f64,
        /// Time step (default: just under the stability cap)
        #[arg(long)]
        dt: Option<f64>,
        /// Initial condition shape
        #[arg(long, value_enum, default_value = "von-mises")]
        init: InitArg,
        /// Initial mean phase (von-mises)
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        mean: f64,
        /// Initial concentration (von-mises)
        #[arg(long, default_value_t = 2.0)]
        kappa: f64,
        /// First-harmonic perturbation amplitude
        #[arg(long, default_value_t = 0.1)]
        amplitude: f64,
        /// Coefficient dump to resume from (init = resume)
        #[arg(long)]
        state: Option<String>,
        /// Write the final coefficient dump here
        #[arg(long)]
        dump_state: Option<String>,
        /// Angular samples per density in the snapshot
        #[arg(long, default_value_t = 256)]
        snapshot_points: usize,
        #[command(flatten)]
        disorder: DisorderArgs,
    },
    /// Run a named invariant suite and print its pass/fail table
    Verify {
        /// Suite: bessel, selfcons, bifurcation, disorder, pde, sde, all
        #[arg(long)]
        suite: String,
    },
}

fn require<T>(v: Option<T>, flag: &str) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::Validation(format!("missing required flag --{flag}")))
}

fn preset_or_flags(
    name: Option<String>,
    expected: &[&str],
    explicit: bool,
    from_flags: impl FnOnce() -> Result<RunConfig, CliError>,
) -> Result<RunConfig, CliError> {
    match name {
        None => from_flags(),
        Some(name) => {
            if explicit {
                return Err(CliError::Validation(format!(
                    "--preset {name} conflicts with explicit parameter flags"
                )));
            }
            let cfg = preset(&name).ok_or_else(|| {
                CliError::Validation(format!(
                    "unknown preset {name:?}; available: {}",
                    PRESET_NAMES.join(", ")
                ))
            })?;
            if !expected.contains(&name.as_str()) {
                return Err(CliError::Validation(format!(
                    "preset {name} belongs to a different command; here: {}",
                    expected.join(", ")
                )));
            }
            Ok(cfg)
        }
    }
}

fn config_from_command(cmd: Command) -> Result<RunConfig, CliError> {
    match cmd {
        Command::Solve {
            k,
            l,
            psi,
            vector_field,
            preset,
        } => preset_or_flags(
            preset,
            &["fig3"],
            k.is_some() || l.is_some() || vector_field.is_some(),
            || {
                Ok(RunConfig::Solve(SolveConfig {
                    k: require(k, "k")?,
                    l: require(l, "l")?,
                    psi: psi.into(),
                    vector_field,
                    out: None,
                }))
            },
        ),
        Command::BifurcationLine {
            l_min,
            l_max,
            points,
        } => Ok(RunConfig::BifurcationLine(LineConfig {
            l_min,
            l_max,
            points,
            out: None,
        })),
        Command::PhaseDiagram {
            k_min,
            k_max,
            l_min,
            l_max,
            resolution,
            psi,
            labels,
            preset,
        } => preset_or_flags(
            preset,
            &["fig2", "fig8"],
            k_min.is_some() || k_max.is_some() || l_min.is_some() || l_max.is_some(),
            || {
                Ok(RunConfig::PhaseDiagram(PhaseDiagramConfig {
                    k_min: require(k_min, "k-min")?,
                    k_max: require(k_max, "k-max")?,
                    l_min: require(l_min, "l-min")?,
                    l_max: require(l_max, "l-max")?,
                    resolution,
                    psi: psi.into(),
                    labels: match labels {
                        LabelsArg::CriticalLine => LabelMode::CriticalLine,
                        LabelsArg::Refined => LabelMode::Refined,
                    },
                    out: None,
                }))
            },
        ),
        Command::DisorderThreshold {
            disorder,
            total_min,
            total_max,
            points,
        } => Ok(RunConfig::DisorderThreshold(ThresholdConfig {
            disorder: disorder.build()?,
            total_min,
            total_max,
            points,
            out: None,
        })),
        Command::Simulate {
            k,
            l,
            d,
            n1,
            n2,
            dt,
            steps,
            mean1,
            mean2,
            conc1,
            conc2,
            disorder,
            preset,
        } => {
            let explicit = k.is_some() || l.is_some() || steps.is_some();
            preset_or_flags(preset, &["fig9", "fig10"], explicit, || {
                let k = require(k, "k")?;
                let l = require(l, "l")?;
                let total = (n1 + n2) as f64;
                if n1 == 0 || n2 == 0 {
                    return Err(CliError::Validation(
                        "both communities need at least one oscillator".into(),
                    ));
                }
                let coupling =
                    CouplingConfig::new(k, k, l, l, n1 as f64 / total, n2 as f64 / total, d)?;
                let sim = SimulationConfig {
                    n1,
                    n2,
                    dt,
                    steps: require(steps, "steps")?,
                    seed: 1,
                    initial: [
                        InitialSpec::VonMises {
                            mean: mean1,
                            concentration: conc1,
                        },
                        InitialSpec::VonMises {
                            mean: mean2,
                            concentration: conc2,
                        },
                    ],
                    coupling,
                    disorder: disorder.build()?.try_into().map_err(CliError::from)?,
                    community_seeds: None,
                    allow_degenerate: false,
                };
                Ok(RunConfig::Simulate(SimulateConfig { sim, out: None }))
            })
        }
        Command::PdeEvolve {
            k,
            l,
            d,
            modes,
            t_end,
            dt,
            init,
            mean,
            kappa,
            amplitude,
            state,
            dump_state,
            snapshot_points,
            disorder,
        } => {
            let initial = match init {
                InitArg::Uniform => PdeInit::Uniform,
                InitArg::VonMises => PdeInit::VonMises {
                    mean,
                    concentration: kappa,
                },
                InitArg::FirstHarmonic => PdeInit::FirstHarmonic { amplitude },
                InitArg::Resume => PdeInit::Resume {
                    path: require(state, "state")?,
                },
            };
            Ok(RunConfig::PdeEvolve(PdeConfig {
                k,
                l,
                d,
                disorder: disorder.build()?,
                modes,
                t_end,
                dt,
                initial,
                dump_state,
                snapshot_points,
                out: None,
            }))
        }
        Command::Verify { suite } => Ok(RunConfig::Verify(VerifyConfig { suite, out: None })),
    }
}

fn thread_count(flag: Option<usize>) -> Result<Option<usize>, CliError> {
    if let Some(n) = flag {
        if n == 0 {
            return Err(CliError::Validation("--threads must be at least 1".into()));
        }
        return Ok(Some(n));
    }
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(raw) => {
            let n: usize = raw.parse().map_err(|_| {
                CliError::Validation(format!("{THREADS_ENV} = {raw:?} is not a thread count"))
            })?;
            if n == 0 {
                return Err(CliError::Validation(format!(
                    "{THREADS_ENV} must be at least 1"
                )));
            }
            Ok(Some(n))
        }
    }
}

fn run_process(cli: Cli) -> Result<bool, CliError> {
    if let Some(n) = thread_count(cli.threads)? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Validation(format!("thread pool: {e}")))?;
    }

    let mut cfg = match (cli.config, cli.command) {
        (Some(_), Some(_)) => {
            return Err(CliError::Validation(
                "--config replaces the subcommand; pass one or the other".into(),
            ))
        }
        (None, None) => {
            return Err(CliError::Validation(
                "nothing to do: pass a subcommand or --config".into(),
            ))
        }
        (Some(path), None) => {
            let text = std::fs::read_to_string(&path)
                .map_err(|e| CliError::Io(format!("reading config {path}: {e}")))?;
            parse_config(&text).map_err(CliError::Validation)?
        }
        (None, Some(cmd)) => config_from_command(cmd)?,
    };

    if let Some(seed) = cli.seed {
        cfg.set_seed(seed).map_err(CliError::Validation)?;
    }
    if cli.out.is_some() {
        cfg.set_out(cli.out);
    }

    let output = execute(&cfg)?;
    match cfg.out() {
        None => print!("{}", output.text),
        Some(path) => std::fs::write(path, &output.text)
            .map_err(|e| CliError::Io(format!("writing {path}: {e}")))?,
    }
    for (path, content) in &output.side_files {
        std::fs::write(path, content)
            .map_err(|e| CliError::Io(format!("writing {path}: {e}")))?;
    }
    Ok(output.clean)
}

/// Process entry point; returns the exit code.
pub fn cli_main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    match run_process(cli) {
        Ok(true) => 0,
        Ok(false) => 3,
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.exit_code()
        }
    }
}
