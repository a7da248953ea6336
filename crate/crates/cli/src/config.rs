//! Run configuration: one serializable description per command, strict
//! enough that a header echo re-parses to exactly the run that produced it.

use kuramoto2c_core::selfcons::Psi;
use kuramoto2c_core::{DisorderKind, SimulationConfig};
use serde::{Deserialize, Serialize};

/// Which symmetric phase offsets a phase-diagram scan covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PsiChoice {
    Zero,
    Pi,
    Both,
}

impl PsiChoice {
    pub fn panels(self) -> Vec<Psi> {
        match self {
            PsiChoice::Zero => vec![Psi::Zero],
            PsiChoice::Pi => vec![Psi::Pi],
            PsiChoice::Both => vec![Psi::Zero, Psi::Pi],
        }
    }
}

/// Region labeling scheme: the critical line alone separates U from S;
/// the refined scheme additionally splits off NS above the branch line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LabelMode {
    CriticalLine,
    Refined,
}

/// Initial condition for the spectral evolution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum PdeInit {
    Uniform,
    VonMises { mean: f64, concentration: f64 },
    FirstHarmonic { amplitude: f64 },
    Resume { path: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveConfig {
    pub k: f64,
    pub l: f64,
    pub psi: Psi,
    /// When set, emit the self-consistency vector field at this resolution
    /// instead of the solution table; fixed points move to header comments.
    #[serde(default)]
    pub vector_field: Option<usize>,
    #[serde(default)]
    pub out: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineConfig {
    pub l_min: f64,
    pub l_max: f64,
    pub points: usize,
    #[serde(default)]
    pub out: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseDiagramConfig {
    pub k_min: f64,
    pub k_max: f64,
    pub l_min: f64,
    pub l_max: f64,
    pub resolution: usize,
    pub psi: PsiChoice,
    pub labels: LabelMode,
    #[serde(default)]
    pub out: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdConfig {
    pub disorder: DisorderKind,
    /// Sweep range for the total coupling; defaults bracket the threshold.
    #[serde(default)]
    pub total_min: Option<f64>,
    #[serde(default)]
    pub total_max: Option<f64>,
    pub points: usize,
    #[serde(default)]
    pub out: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateConfig {
    pub sim: SimulationConfig,
    #[serde(default)]
    pub out: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdeConfig {
    pub k: f64,
    pub l: f64,
    pub d: f64,
    pub disorder: DisorderKind,
    pub modes: usize,
    pub t_end: f64,
    /// Time step; defaults to just under the stability cap for `modes`.
    #[serde(default)]
    pub dt: Option<f64>,
    pub initial: PdeInit,
    #[serde(default)]
    pub dump_state: Option<String>,
    pub snapshot_points: usize,
    #[serde(default)]
    pub out: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub suite: String,
    #[serde(default)]
    pub out: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum RunConfig {
    Solve(SolveConfig),
    BifurcationLine(LineConfig),
    PhaseDiagram(PhaseDiagramConfig),
    DisorderThreshold(ThresholdConfig),
    Simulate(SimulateConfig),
    PdeEvolve(PdeConfig),
    Verify(VerifyConfig),
}

impl RunConfig {
    pub fn out(&self) -> Option<&str> {
        match self {
            RunConfig::Solve(c) => c.out.as_deref(),
            RunConfig::BifurcationLine(c) => c.out.as_deref(),
            RunConfig::PhaseDiagram(c) => c.out.as_deref(),
            RunConfig::DisorderThreshold(c) => c.out.as_deref(),
            RunConfig::Simulate(c) => c.out.as_deref(),
            RunConfig::PdeEvolve(c) => c.out.as_deref(),
            RunConfig::Verify(c) => c.out.as_deref(),
        }
    }

    pub fn set_out(&mut self, path: Option<String>) {
        let slot = match self {
            RunConfig::Solve(c) => &mut c.out,
            RunConfig::BifurcationLine(c) => &mut c.out,
            RunConfig::PhaseDiagram(c) => &mut c.out,
            RunConfig::DisorderThreshold(c) => &mut c.out,
            RunConfig::Simulate(c) => &mut c.out,
            RunConfig::PdeEvolve(c) => &mut c.out,
            RunConfig::Verify(c) => &mut c.out,
        };
        *slot = path;
    }

    /// Seed override; errors for commands that have no randomness.
    pub fn set_seed(&mut self, seed: u64) -> Result<(), String> {
        match self {
            RunConfig::Simulate(c) => {
                c.sim.seed = seed;
                Ok(())
            }
            _ => Err("--seed applies to the simulate command only".into()),
        }
    }

    pub fn to_echo(&self) -> String {
        serde_json::to_string(self).expect("run config serialization cannot fail")
    }
}

/// Top-level keys accepted for each command, beyond `command` itself.
/// Nested objects enforce their own schemas.
fn allowed_keys(command: &str) -> Option<&'static [&'static str]> {
    match command {
        "solve" => Some(&["k", "l", "psi", "vector_field", "out"]),
        "bifurcation-line" => Some(&["l_min", "l_max", "points", "out"]),
        "phase-diagram" => Some(&[
            "k_min",
            "k_max",
            "l_min",
            "l_max",
            "resolution",
            "psi",
            "labels",
            "out",
        ]),
        "disorder-threshold" => Some(&["disorder", "total_min", "total_max", "points", "out"]),
        "simulate" => Some(&["sim", "out"]),
        "pde-evolve" => Some(&[
            "k",
            "l",
            "d",
            "disorder",
            "modes",
            "t_end",
            "dt",
            "initial",
            "dump_state",
            "snapshot_points",
            "out",
        ]),
        "verify" => Some(&["suite", "out"]),
        _ => None,
    }
}

/// Parse a config document, rejecting unknown top-level keys. Internally
/// tagged enums skip serde's own unknown-field check, so the key set is
/// enforced against the raw document first.
pub fn parse_config(text: &str) -> Result<RunConfig, String> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| format!("config is not valid JSON: {e}"))?;
    let map = value
        .as_object()
        .ok_or_else(|| "config must be a JSON object".to_string())?;
    let command = map
        .get("command")
        .and_then(|v| v.as_str())
        .ok_or_else(|| "config needs a string \"command\" field".to_string())?;
    let allowed = allowed_keys(command).ok_or_else(|| format!("unknown command {command:?}"))?;
    for key in map.keys() {
        if key != "command" && !allowed.contains(&key.as_str()) {
            return Err(format!("unknown key {key:?} for command {command:?}"));
        }
    }
    serde_json::from_value(value).map_err(|e| format!("config invalid: {e}"))
}
