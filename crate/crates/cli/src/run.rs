//! Command execution: turns a validated run configuration into artifact
//! text plus optional side files, with a reproducible header block.

use crate::config::{
    LabelMode, PdeConfig, PdeInit, PhaseDiagramConfig, RunConfig, SolveConfig, ThresholdConfig,
};
use crate::verify::run_suite;
use kuramoto2c_core::io_util::fmt_f64;
use kuramoto2c_core::selfcons::{
    find_all_solutions, solution_set_to_csv, vector_field_grid, vector_field_to_csv, Psi,
    SymmetricCoupling,
};
use kuramoto2c_core::{
    chi, critical_threshold, dl_star_dk, dr_star_dk, evolve, k_star_of_l, order_params_of_field,
    scan_phase_diagram, simulate, solve_symmetric_with_disorder, stationary_residual,
    DensityField, DisorderSpec, Error as CoreError, PhaseRegion,
};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Failure with the exit code the process should report.
#[derive(Debug)]
pub enum CliError {
    /// Exit 2: the request itself is invalid.
    Validation(String),
    /// Exit 3: a numerical routine gave up.
    Numerical(String),
    /// Exit 4: reading or writing an artifact failed.
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 4,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Validation(m) | CliError::Numerical(m) | CliError::Io(m) => m,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        if e.is_validation() {
            CliError::Validation(e.to_string())
        } else {
            CliError::Numerical(e.to_string())
        }
    }
}

/// Everything a run produces. `text` goes to the configured output path or
/// stdout; side files carry their own paths.
pub struct RunOutput {
    pub text: String,
    pub side_files: Vec<(String, String)>,
    /// False when the run completed but its checks did not pass
    /// (verification suites); the process should exit nonzero.
    pub clean: bool,
}

impl RunOutput {
    fn artifact(text: String) -> Self {
        RunOutput {
            text,
            side_files: Vec::new(),
            clean: true,
        }
    }
}

fn header(cfg: &RunConfig) -> String {
    format!("# kuramoto2c v{VERSION}\n# config = {}\n", cfg.to_echo())
}

/// Execute a run configuration. The caller handles file placement.
pub fn execute(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    match cfg {
        RunConfig::Solve(c) => solve_cmd(cfg, c),
        RunConfig::BifurcationLine(c) => line_cmd(cfg, c),
        RunConfig::PhaseDiagram(c) => phase_diagram_cmd(cfg, c),
        RunConfig::DisorderThreshold(c) => threshold_cmd(cfg, c),
        RunConfig::Simulate(c) => {
            let series = simulate(&c.sim)?;
            Ok(RunOutput::artifact(format!(
                "{}{}",
                header(cfg),
                series.to_csv()
            )))
        }
        RunConfig::PdeEvolve(c) => pde_cmd(cfg, c),
        RunConfig::Verify(c) => {
            let report = run_suite(&c.suite).map_err(CliError::Validation)?;
            let clean = report.all_pass();
            Ok(RunOutput {
                text: format!("{}{}", header(cfg), report.render()),
                side_files: Vec::new(),
                clean,
            })
        }
    }
}

fn solve_cmd(cfg: &RunConfig, c: &SolveConfig) -> Result<RunOutput, CliError> {
    let coupling = SymmetricCoupling::new(c.k, c.l, c.psi)?;
    let set = find_all_solutions(&coupling);
    let mut text = header(cfg);
    text.push_str(&format!("# failed_seeds = {}\n", set.failed_seeds));
    match c.vector_field {
        None => text.push_str(&solution_set_to_csv(&set)),
        Some(resolution) => {
            for p in &set.points {
                text.push_str(&format!(
                    "# fixed_point = {},{},{}\n",
                    fmt_f64(p.r1),
                    fmt_f64(p.r2),
                    p.kind.as_str()
                ));
            }
            let field = vector_field_grid(&coupling, resolution)?;
            text.push_str(&vector_field_to_csv(&field));
        }
    }
    Ok(RunOutput::artifact(text))
}

fn line_cmd(cfg: &RunConfig, c: &crate::config::LineConfig) -> Result<RunOutput, CliError> {
    if !(c.l_min.is_finite() && c.l_max.is_finite() && c.l_min <= c.l_max && c.l_max < 0.0) {
        return Err(CliError::Validation(format!(
            "L sweep needs l_min <= l_max < 0, got [{}, {}]",
            c.l_min, c.l_max
        )));
    }
    if !(2..=100_000).contains(&c.points) {
        return Err(CliError::Validation(format!(
            "points = {} outside [2, 100000]",
            c.points
        )));
    }
    let mut text = header(cfg);
    text.push_str("k,l,r_star,dr_dk,dl_dk\n");
    for i in 0..c.points {
        let l = c.l_min + (c.l_max - c.l_min) * i as f64 / (c.points - 1) as f64;
        let p = k_star_of_l(l)?;
        let dr = dr_star_dk(p.k_star, p.r_star)?;
        let dl = dl_star_dk(p.k_star, p.l)?;
        text.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt_f64(p.k_star),
            fmt_f64(p.l),
            fmt_f64(p.r_star),
            fmt_f64(dr),
            fmt_f64(dl)
        ));
    }
    Ok(RunOutput::artifact(text))
}

fn phase_diagram_cmd(cfg: &RunConfig, c: &PhaseDiagramConfig) -> Result<RunOutput, CliError> {
    let mut text = header(cfg);
    text.push_str("k,l,psi,region,r_sym,r_star\n");
    for psi in c.psi.panels() {
        let cells = scan_phase_diagram(
            (c.k_min, c.k_max),
            (c.l_min, c.l_max),
            c.resolution,
            psi,
        )?;
        let psi_name = match psi {
            Psi::Zero => "zero",
            Psi::Pi => "pi",
        };
        for cell in cells {
            let region = match (c.labels, cell.region) {
                (LabelMode::CriticalLine, PhaseRegion::NS) => PhaseRegion::S,
                (_, r) => r,
            };
            let r_sym = cell.r_sym.map(fmt_f64).unwrap_or_default();
            let r_star = match c.labels {
                LabelMode::CriticalLine => String::new(),
                LabelMode::Refined => cell.r_star.map(fmt_f64).unwrap_or_default(),
            };
            text.push_str(&format!(
                "{},{},{},{},{},{}\n",
                fmt_f64(cell.k),
                fmt_f64(cell.l),
                psi_name,
                region.as_str(),
                r_sym,
                r_star
            ));
        }
    }
    Ok(RunOutput::artifact(text))
}

fn threshold_cmd(cfg: &RunConfig, c: &ThresholdConfig) -> Result<RunOutput, CliError> {
    let mu = DisorderSpec::new(c.disorder)?;
    let th = critical_threshold(&mu);
    let total_min = c.total_min.unwrap_or(0.5 * th);
    let total_max = c.total_max.unwrap_or(3.0 * th);
    if !(total_min.is_finite() && total_max.is_finite() && 0.0 < total_min && total_min <= total_max)
    {
        return Err(CliError::Validation(format!(
            "total sweep needs 0 < total_min <= total_max, got [{total_min}, {total_max}]"
        )));
    }
    if !(2..=100_000).contains(&c.points) {
        return Err(CliError::Validation(format!(
            "points = {} outside [2, 100000]",
            c.points
        )));
    }
    let mut text = header(cfg);
    text.push_str(&format!("# chi = {}\n", fmt_f64(chi(&mu))));
    text.push_str(&format!("# threshold = {}\n", fmt_f64(th)));
    text.push_str(&format!("# conjectural = {}\n", mu.conjectural()));
    text.push_str(&format!(
        "# total_min = {}\n# total_max = {}\n",
        fmt_f64(total_min),
        fmt_f64(total_max)
    ));
    text.push_str("total,r\n");
    for i in 0..c.points {
        let total = total_min + (total_max - total_min) * i as f64 / (c.points - 1) as f64;
        let coupling = SymmetricCoupling::new(0.5 * total, 0.5 * total, Psi::Zero)?;
        let r = solve_symmetric_with_disorder(&coupling, &mu)?;
        text.push_str(&format!("{},{}\n", fmt_f64(total), fmt_f64(r)));
    }
    Ok(RunOutput::artifact(text))
}

fn pde_cmd(cfg: &RunConfig, c: &PdeConfig) -> Result<RunOutput, CliError> {
    let mu = DisorderSpec::new(c.disorder)?;
    let coupling = kuramoto2c_core::CouplingConfig::symmetric(c.k, c.l, c.d)?;
    let initial = match &c.initial {
        PdeInit::Uniform => DensityField::uniform(c.modes, &mu)?,
        PdeInit::VonMises {
            mean,
            concentration,
        } => DensityField::von_mises(c.modes, &mu, *mean, *concentration)?,
        PdeInit::FirstHarmonic { amplitude } => {
            DensityField::perturb_first_harmonic(c.modes, &mu, *amplitude)?
        }
        PdeInit::Resume { path } => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Io(format!("reading state {path}: {e}")))?;
            let field = DensityField::from_json(&text)?;
            if field.modes() != c.modes {
                return Err(CliError::Validation(format!(
                    "resumed state has {} modes, config asks for {}",
                    field.modes(),
                    c.modes
                )));
            }
            field
        }
    };
    let dt = c
        .dt
        .unwrap_or_else(|| 0.999 * 0.5 / (c.d * (c.modes * c.modes) as f64));
    let evolved = evolve(&initial, &coupling, &mu, dt, c.t_end)?;

    let mut text = header(cfg);
    text.push_str(&format!("# dt = {}\n", fmt_f64(dt)));
    for community in 0..2 {
        let (r, psi) = order_params_of_field(&evolved, community)?;
        text.push_str(&format!(
            "# r{} = {} psi{} = {}\n",
            community + 1,
            fmt_f64(r),
            community + 1,
            fmt_f64(psi)
        ));
    }
    let residual = stationary_residual(&evolved, &coupling, &mu)?;
    text.push_str(&format!("# residual_sup = {}\n", fmt_f64(residual)));
    text.push_str(&evolved.snapshot_csv(c.snapshot_points)?);

    let mut side_files = Vec::new();
    if let Some(path) = &c.dump_state {
        side_files.push((path.clone(), state_with_metadata(cfg, &evolved)?));
    }
    Ok(RunOutput {
        text,
        side_files,
        clean: true,
    })
}

/// The coefficient dump, with version and config spliced in as extra keys;
/// the loader ignores them.
fn state_with_metadata(cfg: &RunConfig, field: &DensityField) -> Result<String, CliError> {
    let mut value: serde_json::Value = serde_json::from_str(&field.to_json())
        .map_err(|e| CliError::Numerical(format!("state serialization: {e}")))?;
    let map = value
        .as_object_mut()
        .expect("state dump is a JSON object");
    map.insert(
        "version".to_string(),
        serde_json::Value::String(VERSION.to_string()),
    );
    map.insert(
        "config".to_string(),
        serde_json::from_str(&cfg.to_echo())
            .map_err(|e| CliError::Numerical(format!("config echo: {e}")))?,
    );
    serde_json::to_string(&value).map_err(|e| CliError::Numerical(format!("state dump: {e}")))
}
