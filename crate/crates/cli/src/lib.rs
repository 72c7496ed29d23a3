//! `continuum` command-line tool.
//!
//! Every command prints one JSON envelope on stdout:
//!
//! ```json
//! {"tool_version": "...", "command": "fk", "inputs_echo": {...}, "result": {...}, "warnings": [...]}
//! ```
//!
//! Angles on the command line are degrees; results are SI unless a key says
//! otherwise (`q_mm`). Matrices are row-major nested arrays. Tendons are
//! numbered 1..4 in output order, tendon 1 on the base x axis.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use continuum_core::nalgebra::{Matrix3, SMatrix, Vector3, Vector4};
use continuum_core::sim::write_sweep_csv;
use continuum_core::stiffness::relative_asymmetry;
use continuum_core::{
    estimate_force, forward_kinematics, inverse_kinematics_config_to_joint, jacobians, read_imu_log, save_imu_log,
    simulate_deflection, stiffness_bundle, stiffness_sweep, synthesize_imu_log, world_to_base, ArmParameters,
    Calibration, Configuration, Error, Grid, LoadCase, LoadDirection, OrientationMeasurement, ParameterFile, SweepSpec,
};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Asymmetry of K_psi above which a warning is attached.
pub const ASYMMETRY_WARNING: f64 = 1e-10;

#[derive(Debug, Parser)]
#[command(
    name = "continuum",
    version,
    about = "Continuum arm kinematics, stiffness and IMU force estimation"
)]
pub struct Cli {
    /// JSON parameter file (defaults to the prototype arm).
    #[arg(long, global = true, value_name = "FILE")]
    pub params: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone, Copy)]
pub struct ConfigArgs {
    /// Bending angle [deg], in [0, 180).
    #[arg(long, allow_hyphen_values = true)]
    pub theta_deg: f64,
    /// Bending-plane angle [deg].
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub delta_deg: f64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Forward kinematics: end-disk pose in the base frame.
    Fk(ConfigArgs),
    /// Configuration to tendon displacements.
    Ik(ConfigArgs),
    /// J_q, J_v, J_w and the stacked J_x.
    Jacobian(ConfigArgs),
    /// H_psi, K_q, K_psi and the task-space K_X.
    Stiffness {
        #[command(flatten)]
        config: ConfigArgs,
        /// Tendon tensions [N], four comma-separated values.
        #[arg(long, value_parser = parse_vec4, allow_hyphen_values = true)]
        tau: Option<[f64; 4]>,
        /// Tip force [N] entering the tensor term of K_X.
        #[arg(long, value_parser = parse_vec3, allow_hyphen_values = true)]
        force: Option<[f64; 3]>,
        /// Skip K_X (allows near-straight configurations).
        #[arg(long)]
        no_task_space: bool,
    },
    /// Estimate the tip force from one or more IMU logs.
    EstimateForce {
        /// IMU log; repeat to average several runs.
        #[arg(long = "log", required = true, value_name = "FILE")]
        logs: Vec<PathBuf>,
        #[arg(long, allow_hyphen_values = true)]
        ref_theta_deg: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        ref_delta_deg: f64,
        /// Number of trailing samples averaged per log.
        #[arg(long, default_value_t = 100)]
        window: usize,
        #[arg(long, value_parser = parse_vec4, allow_hyphen_values = true)]
        tau: Option<[f64; 4]>,
        /// `{"R_offset": ...}` file; overrides R_offset from --params.
        #[arg(long, value_name = "FILE")]
        calibration: Option<PathBuf>,
    },
    /// Apply a tip force in the linear model and write a synthetic IMU log.
    Simulate {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long, value_parser = parse_vec3, allow_hyphen_values = true)]
        force: [f64; 3],
        /// Per-axis orientation noise [deg].
        #[arg(long, default_value_t = 0.0)]
        noise_deg: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        samples: usize,
        #[arg(long, value_parser = parse_vec4, allow_hyphen_values = true)]
        tau: Option<[f64; 4]>,
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
    },
    /// Radial-load stiffness sweep written as CSV.
    Sweep {
        #[arg(long, value_name = "FILE")]
        spec: PathBuf,
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
    },
}

fn parse_floats<const N: usize>(text: &str) -> Result<[f64; N], String> {
    let values: Vec<f64> = text
        .split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|e| format!("{s:?}: {e}")))
        .collect::<Result<_, _>>()?;
    if values.iter().any(|v| !v.is_finite()) {
        return Err("values must be finite".into());
    }
    values
        .try_into()
        .map_err(|v: Vec<f64>| format!("expected {N} comma-separated values, got {}", v.len()))
}

pub fn parse_vec3(text: &str) -> Result<[f64; 3], String> {
    parse_floats::<3>(text)
}

pub fn parse_vec4(text: &str) -> Result<[f64; 4], String> {
    parse_floats::<4>(text)
}

/// Sweep spec file, angles in degrees:
/// `{"theta_deg": [10, 60, 10], "delta_deg": 0, "direction": "inward", "load_n": [0, 1, 0.2]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepFile {
    pub theta_deg: [f64; 3],
    #[serde(default)]
    pub delta_deg: f64,
    pub direction: LoadDirection,
    pub load_n: [f64; 3],
}

impl SweepFile {
    pub fn to_spec(&self) -> continuum_core::Result<SweepSpec> {
        let [t0, t1, dt] = self.theta_deg;
        let [l0, l1, dl] = self.load_n;
        Ok(SweepSpec {
            theta: Grid::new(t0.to_radians(), t1.to_radians(), dt.to_radians())?,
            delta: self.delta_deg.to_radians(),
            direction: self.direction,
            load: Grid::new(l0, l1, dl)?,
        })
    }
}

#[derive(Debug, Serialize)]
pub struct Envelope {
    pub tool_version: &'static str,
    pub command: &'static str,
    pub inputs_echo: Value,
    pub result: Value,
    pub warnings: Vec<String>,
}

/// Failure of a command. Contract errors exit with 2, internal ones with 1.
#[derive(Debug)]
pub enum CliError {
    Contract(String),
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Contract(_) => 2,
            CliError::Internal(_) => 1,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Contract(m) | CliError::Internal(m) => m,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Contract(e.to_string())
    }
}

fn with_path(path: &Path, e: Error) -> CliError {
    CliError::Contract(format!("{}: {e}", path.display()))
}

/// Row-major nested array.
pub fn rows<const R: usize, const C: usize>(m: &SMatrix<f64, R, C>) -> Vec<Vec<f64>> {
    (0..R).map(|i| (0..C).map(|j| m[(i, j)]).collect()).collect()
}

pub fn vec_of<const R: usize>(v: &SMatrix<f64, R, 1>) -> Vec<f64> {
    v.iter().copied().collect()
}

fn load_parameters(path: Option<&Path>) -> Result<(ArmParameters, ParameterFile), CliError> {
    let file = match path {
        Some(p) => ParameterFile::load(p).map_err(|e| with_path(p, e))?,
        None => ParameterFile::default(),
    };
    let params = file.to_parameters()?;
    Ok((params, file))
}

fn configuration(args: &ConfigArgs) -> Result<Configuration, CliError> {
    Configuration::from_degrees(args.theta_deg, args.delta_deg).map_err(|e| match e {
        Error::ThetaOutOfRange { .. } => CliError::Contract(format!("--theta-deg {} outside [0, 180)", args.theta_deg)),
        other => other.into(),
    })
}

fn config_echo(args: &ConfigArgs) -> Value {
    json!({"theta_deg": args.theta_deg, "delta_deg": args.delta_deg})
}

fn tau_or_zero(tau: Option<[f64; 4]>) -> Vector4<f64> {
    tau.map(Vector4::from).unwrap_or_else(Vector4::zeros)
}

pub fn run(cli: &Cli) -> Result<Envelope, CliError> {
    let (params, param_file) = load_parameters(cli.params.as_deref())?;
    let mut warnings = Vec::new();
    let (command, mut inputs_echo, result) = match &cli.command {
        Command::Fk(args) => {
            let pose = forward_kinematics(&params, &configuration(args)?);
            let result = json!({
                "rotation": rows(&pose.rotation),
                "position_m": vec_of(&pose.position),
            });
            ("fk", config_echo(args), result)
        }
        Command::Ik(args) => {
            let q = inverse_kinematics_config_to_joint(&params, &configuration(args)?);
            let q_mm: Vec<f64> = q.0.iter().map(|v| v * 1e3).collect();
            ("ik", config_echo(args), json!({ "q_mm": q_mm }))
        }
        Command::Jacobian(args) => {
            let j = jacobians(&params, &configuration(args)?);
            let result = json!({
                "J_q": rows(&j.j_q_psi),
                "J_v": rows(&j.j_v_psi),
                "J_w": rows(&j.j_w_psi),
                "J_x": rows(&j.j_x_psi),
            });
            ("jacobian", config_echo(args), result)
        }
        Command::Stiffness {
            config,
            tau,
            force,
            no_task_space,
        } => {
            let psi = configuration(config)?;
            let tau_v = tau_or_zero(*tau);
            let force_v = force.map(Vector3::from);
            let bundle = stiffness_bundle(&params, &psi, &tau_v, !no_task_space, force_v.as_ref())?;
            let asym = relative_asymmetry(&bundle.k_psi);
            if asym > ASYMMETRY_WARNING {
                warnings.push(format!(
                    "K_psi relative asymmetry {asym:e} exceeds {ASYMMETRY_WARNING:e}"
                ));
            }
            let result = json!({
                "H_psi": rows(&bundle.h_psi),
                "K_q": rows(&bundle.k_q),
                "K_psi": rows(&bundle.k_psi),
                "K_X": bundle.k_x.as_ref().map(rows),
            });
            let mut echo = config_echo(config);
            echo["tau_N"] = json!(vec_of(&tau_v));
            echo["force_N"] = json!(force);
            echo["task_space"] = json!(!no_task_space);
            ("stiffness", echo, result)
        }
        Command::EstimateForce {
            logs,
            ref_theta_deg,
            ref_delta_deg,
            window,
            tau,
            calibration,
        } => {
            let ref_args = ConfigArgs {
                theta_deg: *ref_theta_deg,
                delta_deg: *ref_delta_deg,
            };
            let psi_ref = configuration(&ref_args)?;
            let tau_v = tau_or_zero(*tau);
            let offset = match calibration {
                Some(p) => Some(Calibration::load(p).map_err(|e| with_path(p, e))?.offset()),
                None => param_file.offset(),
            };
            let mut estimates = Vec::new();
            for path in logs {
                let mut samples = read_imu_log(path).map_err(|e| with_path(path, e))?;
                if let Some(r) = &offset {
                    rotate_into_base(&mut samples, r).map_err(|e| with_path(path, e))?;
                }
                let est =
                    estimate_force(&params, &psi_ref, &tau_v, &samples, *window).map_err(|e| with_path(path, e))?;
                if est.window_clamped {
                    warnings.push(format!(
                        "{}: window {window} exceeds log length {}; used all samples",
                        path.display(),
                        samples.len()
                    ));
                }
                if est.ambiguous_samples > 0 {
                    warnings.push(format!(
                        "{}: {} samples had an undefined bending plane",
                        path.display(),
                        est.ambiguous_samples
                    ));
                }
                estimates.push(est);
            }
            let n = estimates.len() as f64;
            let mean_f = estimates.iter().map(|e| e.f_ext_hat).sum::<Vector3<f64>>() / n;
            let mean_star = estimates
                .iter()
                .map(|e| e.f_star_hat)
                .sum::<continuum_core::nalgebra::Vector2<f64>>()
                / n;
            let mean_dpsi = estimates
                .iter()
                .map(|e| e.deformation.delta_psi)
                .sum::<continuum_core::nalgebra::Vector2<f64>>()
                / n;
            let repeats: Vec<Value> = estimates
                .iter()
                .map(|e| {
                    json!({
                        "F_ext_N": vec_of(&e.f_ext_hat),
                        "F_star": vec_of(&e.f_star_hat),
                        "delta_psi": vec_of(&e.deformation.delta_psi),
                        "theta_bar": e.deformation.theta_bar,
                        "delta_bar": e.deformation.delta_bar,
                        "samples_used": e.samples_used,
                    })
                })
                .collect();
            let result = json!({
                "F_ext_N": vec_of(&mean_f),
                "F_star": vec_of(&mean_star),
                "delta_psi": vec_of(&mean_dpsi),
                "condition": estimates[0].condition_sigma_ratio,
                "repeats": repeats,
            });
            let echo = json!({
                "logs": logs,
                "ref_theta_deg": ref_theta_deg,
                "ref_delta_deg": ref_delta_deg,
                "window": window,
                "tau_N": vec_of(&tau_v),
                "calibration": calibration,
            });
            ("estimate-force", echo, result)
        }
        Command::Simulate {
            config,
            force,
            noise_deg,
            seed,
            samples,
            tau,
            out,
        } => {
            let case = LoadCase {
                psi_ref: configuration(config)?,
                force: Vector3::from(*force),
                tau: tau_or_zero(*tau),
                noise_std: noise_deg.to_radians(),
                seed: *seed,
                samples: *samples,
            };
            let deflection = simulate_deflection(&params, &case)?;
            let log = synthesize_imu_log(&params, &case)?;
            save_imu_log(out, &log).map_err(|e| with_path(out, e))?;
            let result = json!({
                "delta_psi": vec_of(&deflection.delta_psi),
                "psi_loaded": [deflection.psi_loaded.theta(), deflection.psi_loaded.delta()],
                "samples": log.len(),
                "out": out,
            });
            let mut echo = config_echo(config);
            echo["force_N"] = json!(force);
            echo["noise_deg"] = json!(noise_deg);
            echo["seed"] = json!(seed);
            echo["samples"] = json!(samples);
            echo["tau_N"] = json!(vec_of(&case.tau));
            ("simulate", echo, result)
        }
        Command::Sweep { spec, out } => {
            let text = std::fs::read_to_string(spec).map_err(|e| with_path(spec, e.into()))?;
            let file: SweepFile = serde_json::from_str(&text)
                .map_err(|e| CliError::Contract(format!("{}: invalid sweep spec: {e}", spec.display())))?;
            let rows_out = stiffness_sweep(&params, &file.to_spec()?)?;
            let writer = std::fs::File::create(out).map_err(|e| with_path(out, e.into()))?;
            write_sweep_csv(std::io::BufWriter::new(writer), &rows_out).map_err(|e| with_path(out, e))?;
            let result = json!({ "rows": rows_out.len(), "out": out });
            let echo = serde_json::to_value(&file).map_err(|e| CliError::Internal(e.to_string()))?;
            ("sweep", echo, result)
        }
    };
    inputs_echo["params"] = serde_json::to_value(&param_file).map_err(|e| CliError::Internal(e.to_string()))?;
    Ok(Envelope {
        tool_version: TOOL_VERSION,
        command,
        inputs_echo,
        result,
        warnings,
    })
}

fn rotate_into_base(samples: &mut [OrientationMeasurement], offset: &Matrix3<f64>) -> continuum_core::Result<()> {
    for s in samples.iter_mut() {
        s.rotation = world_to_base(&s.rotation, offset)?;
    }
    Ok(())
}
