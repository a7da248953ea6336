//! Named parameter sets for the scenarios the package is expected to
//! reproduce out of the box. Each returns a full run configuration;
//! `--seed` and `--out` may still override their fields.

use crate::config::{
    LabelMode, PhaseDiagramConfig, PsiChoice, RunConfig, SimulateConfig, SolveConfig,
};
use kuramoto2c_core::selfcons::Psi;
use kuramoto2c_core::{CouplingConfig, DisorderKind, DisorderSpec, InitialSpec, SimulationConfig};
use std::f64::consts::PI;

pub const PRESET_NAMES: [&str; 5] = ["fig2", "fig3", "fig8", "fig9", "fig10"];

/// Look up a preset by name.
pub fn preset(name: &str) -> Option<RunConfig> {
    match name {
        "fig2" => Some(fig2()),
        "fig3" => Some(fig3()),
        "fig8" => Some(fig8()),
        "fig9" => Some(fig9()),
        "fig10" => Some(fig10()),
        _ => None,
    }
}

/// Existence regions on both phase branches, split only by the critical
/// line: U below it, S above.
pub fn fig2() -> RunConfig {
    RunConfig::PhaseDiagram(PhaseDiagramConfig {
        k_min: 0.05,
        k_max: 4.0,
        l_min: -2.0,
        l_max: 2.0,
        resolution: 81,
        psi: PsiChoice::Both,
        labels: LabelMode::CriticalLine,
        out: None,
    })
}

/// Self-consistency vector field at K = 5, L = -1 with the fixed points
/// recorded in the header.
pub fn fig3() -> RunConfig {
    RunConfig::Solve(SolveConfig {
        k: 5.0,
        l: -1.0,
        psi: Psi::Zero,
        vector_field: Some(25),
        out: None,
    })
}

/// Refined zero-offset phase diagram: U, S, and the NS wedge above the
/// branch line at negative cross coupling.
pub fn fig8() -> RunConfig {
    RunConfig::PhaseDiagram(PhaseDiagramConfig {
        k_min: 0.05,
        k_max: 8.0,
        l_min: -4.0,
        l_max: 1.0,
        resolution: 81,
        psi: PsiChoice::Zero,
        labels: LabelMode::Refined,
        out: None,
    })
}

fn particle_run(k: f64, l: f64, steps: usize, initial: [InitialSpec; 2]) -> RunConfig {
    RunConfig::Simulate(SimulateConfig {
        sim: SimulationConfig {
            n1: 1000,
            n2: 1000,
            dt: 0.01,
            steps,
            seed: 1,
            initial,
            coupling: CouplingConfig::symmetric(k, l, 1.0).expect("preset coupling is valid"),
            disorder: DisorderSpec::new(DisorderKind::PointMassZero)
                .expect("point mass disorder is valid"),
            community_seeds: None,
            allow_degenerate: false,
        },
        out: None,
    })
}

/// Suppression then separation at K = 7, L = -2: both communities start
/// around pi, the second much broader; while the phases agree its field
/// 0.5 (7 r2 - 2 r1) is negative, so its synchronization dips until the
/// phase difference opens toward pi and both levels recover.
pub fn fig9() -> RunConfig {
    particle_run(
        7.0,
        -2.0,
        1500,
        [
            InitialSpec::VonMises {
                mean: PI,
                concentration: 40.0,
            },
            InitialSpec::VonMises {
                mean: PI,
                concentration: 0.5,
            },
        ],
    )
}

/// Relaxation to the aligned branch at K = 5, L = 2 from opposed initial
/// mean phases.
pub fn fig10() -> RunConfig {
    particle_run(
        5.0,
        2.0,
        6000,
        [
            InitialSpec::VonMises {
                mean: 0.0,
                concentration: 8.0,
            },
            InitialSpec::VonMises {
                mean: PI,
                concentration: 8.0,
            },
        ],
    )
}
