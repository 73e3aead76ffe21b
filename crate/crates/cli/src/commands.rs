use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use aacs::classical::{mathieu_eigenvalues, ClassicalModel};
use aacs::config::{parse_epsilon_list, OperatorKind, RunConfig, Tolerances};
use aacs::dynamics::{
    phase_density_series, verify_upper_bound_linear, verify_upper_bound_quadratic, BoundReport, DensitySample,
    EvolutionSpec,
};
use aacs::export::{self, LowerSymbolRow};
use aacs::family::{classical_centers, fit_sigma, FamilyDocument, ProbabilityFamily};
use aacs::quantizer::{
    angle_lower_symbol_profile, coherent_state, husimi, lower_symbol, quantize_action, quantize_angle, quantize_energy,
    AlphaRule, CsFrame, FourierSymbol, OperatorMatrix,
};
use aacs::Error;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::check;
use crate::options::{AlphaArg, Cli, Command, Common, FamilyArg, ModelArg};

pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_NUMERIC: u8 = 3;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
    /// Machine-readable details printed after the message.
    pub report: Option<String>,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_CONFIG,
            message: message.into(),
            report: None,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = if e.is_input_error() { EXIT_CONFIG } else { EXIT_NUMERIC };
        let report = match &e {
            Error::NoBracket { level, lo, hi, scanned } => Some(
                serde_json::json!({
                    "error": "NoBracket",
                    "level": level,
                    "lo": lo,
                    "hi": hi,
                    "scanned": scanned,
                })
                .to_string(),
            ),
            _ => None,
        };
        Self {
            code,
            message: e.to_string(),
            report,
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError {
        code: EXIT_NUMERIC,
        message: format!("{}: {e}", path.display()),
        report: None,
    }
}

/// Reads the config file (if any) and applies the flag overrides.
pub fn load_config(common: &Common) -> CliResult<RunConfig> {
    let mut config = match &common.config {
        Some(path) => {
            let text =
                std::fs::read_to_string(path).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
            RunConfig::from_json(&text)?
        }
        None => RunConfig::default(),
    };
    if let Some(family) = common.family {
        let epsilon = config.family.epsilon.or(Some(1.0));
        config.family = match family {
            FamilyArg::Gaussian => FamilyDocument {
                kind: "gaussian".into(),
                epsilon,
                ..FamilyDocument::default()
            },
            FamilyArg::Gamma => FamilyDocument {
                kind: "gamma".into(),
                ..FamilyDocument::default()
            },
            FamilyArg::Gengamma => FamilyDocument {
                kind: "generalized_gamma".into(),
                ..FamilyDocument::default()
            },
        };
    }
    if let Some(model) = common.model {
        let name = match model {
            ModelArg::Rotor => "rotor",
            ModelArg::Oscillator => "oscillator",
            ModelArg::Pendulum => "pendulum",
        };
        config.model = config.model_named(name)?;
    }
    if let Some(eps) = common.epsilon {
        if config.sweeps_epsilon() {
            config.family.epsilon = Some(eps);
        }
        config.epsilon_list = Some(vec![eps]);
    }
    if let Some(list) = &common.epsilon_list {
        let list = parse_epsilon_list(list)?;
        if config.sweeps_epsilon() {
            config.family.epsilon = Some(list[0]);
        }
        config.epsilon_list = Some(list);
    }
    if let Some(alpha) = common.alpha {
        config.alpha = match alpha {
            AlphaArg::Linear => AlphaRule::Linear,
            AlphaArg::Quadratic => AlphaRule::Quadratic,
        };
    }
    if let Some(nmax) = common.nmax {
        config.window.nmax = nmax;
    }
    if let Some(tol) = common.tol {
        config.tolerances.operator = tol;
    }
    if let Some(out) = &common.out {
        config.output = Some(out.display().to_string());
    }
    config.validate()?;
    Ok(config)
}

pub fn config_hash(config: &RunConfig) -> String {
    hex::encode(Sha256::digest(config.to_json().as_bytes()))
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    command: &'a str,
    config_hash: String,
    tool_version: &'static str,
    tolerances: &'a Tolerances,
    outputs: Vec<String>,
}

/// `<out><suffix>`, e.g. `run.csv` -> `run.csv.manifest.json`.
pub fn sidecar(out: &Path, suffix: &str) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(suffix);
    PathBuf::from(name)
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| io_error(path, e))
}

fn finish(mut w: BufWriter<File>, path: &Path) -> CliResult<()> {
    w.flush().map_err(|e| io_error(path, e))
}

fn write_with<F>(path: &Path, f: F) -> CliResult<()>
where
    F: FnOnce(&mut BufWriter<File>) -> aacs::Result<()>,
{
    let mut w = create(path)?;
    f(&mut w).map_err(|e| CliError {
        code: EXIT_NUMERIC,
        message: format!("{}: {e}", path.display()),
        report: None,
    })?;
    finish(w, path)
}

pub fn run(cli: Cli) -> CliResult<bool> {
    let command = &cli.command;
    let config = load_config(command.common())?;
    let ext = if matches!(command, Command::Check(_)) {
        "json"
    } else {
        "csv"
    };
    let out = PathBuf::from(
        config
            .output
            .clone()
            .unwrap_or_else(|| format!("aacs-{}.{ext}", command.name())),
    );
    let (ok, mut outputs) = match command {
        Command::Spectrum(_) => (true, spectrum(&config, &out)?),
        Command::LowerSymbol(_) => (true, lower_symbol_cmd(&config, &out)?),
        Command::Husimi(_) => (true, husimi_cmd(&config, &out)?),
        Command::Evolve(_) => (true, evolve(&config, &out)?),
        Command::PendulumFit(_) => (true, pendulum_fit(&config, &out)?),
        Command::Check(_) => {
            let report = check::run_suite(&config);
            write_with(&out, |w| export::write_json(w, &report))?;
            (report.passed, vec![out.clone()])
        }
    };
    let manifest_path = sidecar(&out, ".manifest.json");
    let manifest = Manifest {
        command: command.name(),
        config_hash: config_hash(&config),
        tool_version: env!("CARGO_PKG_VERSION"),
        tolerances: &config.tolerances,
        outputs: outputs.drain(..).map(|p| p.display().to_string()).collect(),
    };
    write_with(&manifest_path, |w| export::write_json(w, &manifest))?;
    Ok(ok)
}

/// The configured operator on `frame`.
pub fn build_operator(config: &RunConfig, frame: &CsFrame) -> aacs::Result<OperatorMatrix> {
    match config.operator {
        OperatorKind::Angle => quantize_angle(frame, &FourierSymbol::sawtooth(config.tau)),
        OperatorKind::Action => quantize_action(frame, |j| j),
        OperatorKind::Energy => quantize_energy(frame, &config.model),
        OperatorKind::Identity => quantize_action(frame, |_| 1.0),
    }
}

fn spectrum(config: &RunConfig, out: &Path) -> CliResult<Vec<PathBuf>> {
    let mut blocks = Vec::new();
    for eps in config.epsilons()? {
        let frame = config.frame(config.family_at(eps)?)?;
        let op = build_operator(config, &frame)?;
        blocks.push((eps.unwrap_or(f64::NAN), op.eigenvalues()));
    }
    write_with(out, |w| export::write_spectrum_csv(w, &blocks))?;
    Ok(vec![out.to_path_buf()])
}

fn angle_nodes(config: &RunConfig) -> Vec<f64> {
    let n = config.grid.gamma_nodes;
    let shift = if config.grid.midpoint { 0.5 } else { 0.0 };
    (0..n).map(|k| config.tau * (k as f64 + shift) / n as f64).collect()
}

fn lower_symbol_cmd(config: &RunConfig, out: &Path) -> CliResult<Vec<PathBuf>> {
    let jt = config.point.j_tilde;
    let gammas = angle_nodes(config);
    let mut rows = Vec::new();
    for eps in config.epsilons()? {
        let frame = config.frame(config.family_at(eps)?)?;
        let closed_form = config.operator == OperatorKind::Angle
            && config.alpha == AlphaRule::Linear
            && matches!(frame.family, ProbabilityFamily::Gaussian(_));
        let values: Vec<f64> = if closed_form {
            angle_lower_symbol_profile(&frame, &FourierSymbol::sawtooth(config.tau), jt, &gammas)?
                .iter()
                .map(|z| z.re)
                .collect()
        } else {
            coherent_state(&frame, jt, 0.0)?;
            let op = build_operator(config, &frame)?;
            gammas.iter().map(|&g| lower_symbol(&frame, &op, jt, g).re).collect()
        };
        let epsilon = eps.unwrap_or(f64::NAN);
        rows.extend(gammas.iter().zip(values).map(|(&gamma, value)| LowerSymbolRow {
            epsilon,
            gamma,
            j_tilde: jt,
            value,
        }));
    }
    write_with(out, |w| export::write_lower_symbol_csv(w, &rows))?;
    Ok(vec![out.to_path_buf()])
}

fn husimi_cmd(config: &RunConfig, out: &Path) -> CliResult<Vec<PathBuf>> {
    let frame = config.frame(config.family_at(None)?)?;
    let (jt0, g0) = (config.point.j_tilde, config.point.gamma);
    coherent_state(&frame, jt0, g0)?;
    let grid = config.phase_grid(&frame.family)?;
    let rho = husimi(&frame, jt0, g0, &grid);
    let samples: Vec<DensitySample> = grid
        .points()
        .zip(rho)
        .map(|((j_tilde, gamma), rho)| DensitySample {
            t: 0.0,
            j_tilde,
            gamma,
            rho,
        })
        .collect();
    write_with(out, |w| export::write_density_csv(w, &samples))?;
    Ok(vec![out.to_path_buf()])
}

#[derive(Debug, Serialize)]
struct EvolveReport {
    times: Vec<f64>,
    /// Present for the free rotor with a Gaussian family.
    bound: Option<BoundReport>,
    bound_tolerance: f64,
    bound_satisfied: Option<bool>,
}

/// Evolution for the configured model; the rotor uses reduced times.
pub fn evolution_spec(config: &RunConfig, frame: CsFrame) -> aacs::Result<EvolutionSpec> {
    match &config.model {
        ClassicalModel::Rotor(r) => EvolutionSpec::free_rotor(frame, *r),
        model => {
            let h = quantize_energy(&frame, model)?;
            EvolutionSpec::new(frame, &h, model.hbar())
        }
    }
}

fn evolve(config: &RunConfig, out: &Path) -> CliResult<Vec<PathBuf>> {
    let frame = config.frame(config.family_at(None)?)?;
    let (jt0, g0) = (config.point.j_tilde, config.point.gamma);
    coherent_state(&frame, jt0, g0)?;
    let spec = evolution_spec(config, frame)?;
    let times: Vec<f64> = match &spec.rotor {
        Some(r) => config.times.iter().map(|&t| r.time_from_reduced(t)).collect(),
        None => config.times.clone(),
    };
    let grid = config.phase_grid(&spec.frame.family)?.with_times(times.clone());
    let samples = phase_density_series(&spec, jt0, g0, &grid);
    write_with(out, |w| export::write_density_csv(w, &samples))?;

    let bound = match (&spec.rotor, &spec.frame.family, &spec.frame.alpha) {
        (Some(_), ProbabilityFamily::Gaussian(_), AlphaRule::Linear) => {
            Some(verify_upper_bound_linear(&spec, jt0, g0, &grid, config.bound_form)?)
        }
        (Some(_), ProbabilityFamily::Gaussian(_), AlphaRule::Quadratic) => {
            Some(verify_upper_bound_quadratic(&spec, jt0, g0, &grid, config.bound_form)?)
        }
        _ => None,
    };
    let tol = config.tolerances.bound;
    let report = EvolveReport {
        times,
        bound_satisfied: bound.as_ref().map(|b| b.max_violation <= tol),
        bound,
        bound_tolerance: tol,
    };
    let report_path = sidecar(out, ".bound.json");
    write_with(&report_path, |w| export::write_json(w, &report))?;
    Ok(vec![out.to_path_buf(), report_path])
}

#[derive(Debug, Serialize)]
struct FitReport {
    levels: Vec<i64>,
    energies: Vec<f64>,
    #[serde(rename = "J_cl")]
    j_cl: Vec<f64>,
    sigma_n: Vec<f64>,
    residuals: Vec<f64>,
    cst: f64,
}

/// Target energies at the configured levels: `unit n^2` for the rotor, the
/// sorted Mathieu levels for the pendulum.
pub fn fit_targets(config: &RunConfig) -> aacs::Result<Vec<f64>> {
    let levels = &config.pendulum_fit.levels;
    if levels.is_empty() || levels.iter().any(|&n| n < 0) {
        return Err(Error::InvalidConfig("fit levels must be non-empty and >= 0".into()));
    }
    match &config.model {
        ClassicalModel::Rotor(r) => Ok(levels.iter().map(|&n| r.energy_unit() * (n * n) as f64).collect()),
        ClassicalModel::Pendulum(p) => {
            let q = 2.0 * p.inertia() * p.u0 / (p.hbar * p.hbar);
            let count = *levels.iter().max().unwrap() as usize + 1;
            let basis = config.pendulum_fit.basis_size.max(4 * count);
            let spectrum = mathieu_eigenvalues(q, count, basis)?;
            let energies = spectrum.pendulum_energies(p.inertia(), p.hbar);
            Ok(levels.iter().map(|&n| energies[n as usize]).collect())
        }
        ClassicalModel::Oscillator(_) => Err(Error::UnsupportedModel),
    }
}

fn pendulum_fit(config: &RunConfig, out: &Path) -> CliResult<Vec<PathBuf>> {
    let energies = fit_targets(config)?;
    let levels = &config.pendulum_fit.levels;
    let centers = classical_centers(&config.model, &energies)?;
    let fit = fit_sigma(&config.model, levels, &energies, &centers, config.pendulum_fit.anchor)?;
    write_with(out, |w| export::write_fit_csv(w, &fit))?;
    let report = FitReport {
        levels: fit.levels.clone(),
        energies: fit.energies.clone(),
        j_cl: fit.centers.clone(),
        sigma_n: fit.sigmas.clone(),
        residuals: fit.residuals.clone(),
        cst: fit.cst,
    };
    let json_path = sidecar(out, ".fit.json");
    write_with(&json_path, |w| export::write_json(w, &report))?;
    Ok(vec![out.to_path_buf(), json_path])
}
