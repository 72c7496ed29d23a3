//! Model-space load experiments: linearized tip deflection, synthetic IMU
//! logs and stiffness sweeps.
//!
//! The deflection model is the exact inverse of the estimator in
//! [`crate::estimation`]: `dpsi = K_psi^-1 J_v^T F`.

use std::io::Write;

use nalgebra::{Matrix2, Matrix3, Vector2, Vector3, Vector4};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imu::OrientationMeasurement;
use crate::kinematics::{forward_kinematics, jacobian_v_psi};
use crate::params::{ArmParameters, Configuration};
use crate::stiffness::{check_estimable, stiffness_config, stiffness_task};

/// Sample rate of synthesized logs [Hz].
pub const SYNTHETIC_RATE_HZ: f64 = 100.0;

/// `|det K_psi|` below this (SI units) counts as singular.
pub const SINGULAR_DET: f64 = 1e-14;

pub const SWEEP_CSV_HEADER: &str = "theta_rad,load_N,disp_m,kxx,kxz,kzx,kzz";

/// A tip load applied at a commanded configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoadCase {
    pub psi_ref: Configuration,
    /// Tip force in the base frame [N].
    pub force: Vector3<f64>,
    pub tau: Vector4<f64>,
    /// Per-axis orientation noise standard deviation [rad].
    pub noise_std: f64,
    pub seed: u64,
    pub samples: usize,
}

impl LoadCase {
    /// Noise-free single-sample case with slack tendons.
    pub fn new(psi_ref: Configuration, force: Vector3<f64>) -> Self {
        Self {
            psi_ref,
            force,
            tau: Vector4::zeros(),
            noise_std: 0.0,
            seed: 0,
            samples: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::InvalidLoadCase("samples must be at least 1".into()));
        }
        if !(self.noise_std.is_finite() && self.noise_std >= 0.0) {
            return Err(Error::InvalidLoadCase(format!(
                "noise_std {} must be >= 0",
                self.noise_std
            )));
        }
        if !self.force.iter().chain(self.tau.iter()).all(|v| v.is_finite()) {
            return Err(Error::InvalidLoadCase("force and tau must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Deflection {
    pub delta_psi: Vector2<f64>,
    pub psi_loaded: Configuration,
}

/// Explicit 2x2 solve; `None` when `|det| <= SINGULAR_DET`.
fn solve2(k: &Matrix2<f64>, rhs: &Vector2<f64>) -> std::result::Result<Vector2<f64>, f64> {
    let det = k[(0, 0)] * k[(1, 1)] - k[(0, 1)] * k[(1, 0)];
    if det.is_nan() || det.abs() <= SINGULAR_DET {
        return Err(det);
    }
    let inv = Matrix2::new(k[(1, 1)], -k[(0, 1)], -k[(1, 0)], k[(0, 0)]) / det;
    Ok(inv * rhs)
}

pub fn simulate_deflection(params: &ArmParameters, case: &LoadCase) -> Result<Deflection> {
    case.validate()?;
    check_estimable(params, &case.psi_ref)?;
    let k_psi = stiffness_config(params, &case.psi_ref, &case.tau);
    let f_star = jacobian_v_psi(params, &case.psi_ref).transpose() * case.force;
    let delta_psi = solve2(&k_psi, &f_star).map_err(|det| Error::SingularStiffness { det })?;
    Ok(Deflection {
        delta_psi,
        psi_loaded: case.psi_ref.offset(&delta_psi)?,
    })
}

/// `case.samples` orientations of the loaded pose at 100 Hz, each rotated by
/// an independent body-frame perturbation `Exp([n]x)`, `n ~ N(0, noise_std^2)`
/// per axis. Deterministic in `case.seed`.
pub fn synthesize_imu_log(params: &ArmParameters, case: &LoadCase) -> Result<Vec<OrientationMeasurement>> {
    let deflection = simulate_deflection(params, case)?;
    let truth = forward_kinematics(params, &deflection.psi_loaded).rotation;
    let mut rng = ChaCha8Rng::seed_from_u64(case.seed);
    let noise = Normal::new(0.0, case.noise_std).map_err(|e| Error::InvalidLoadCase(e.to_string()))?;
    let samples = (0..case.samples)
        .map(|k| {
            let rotation = if case.noise_std > 0.0 {
                let n = Vector3::new(noise.sample(&mut rng), noise.sample(&mut rng), noise.sample(&mut rng));
                truth * nalgebra::Rotation3::new(n).into_inner()
            } else {
                truth
            };
            OrientationMeasurement {
                timestamp: k as f64 / SYNTHETIC_RATE_HZ,
                rotation,
            }
        })
        .collect();
    Ok(samples)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LoadDirection {
    /// In the bending plane, pushing the tip further along the bend.
    Inward,
    /// In the bending plane, against the bend.
    Outward,
}

/// In-plane unit vector normal to the tip tangent.
pub fn radial_direction(psi: &Configuration, direction: LoadDirection) -> Vector3<f64> {
    let (st, ct) = psi.theta().sin_cos();
    let (sd, cd) = psi.delta().sin_cos();
    let inward = Vector3::new(cd * ct, sd * ct, -st);
    match direction {
        LoadDirection::Inward => inward,
        LoadDirection::Outward => -inward,
    }
}

/// Inclusive arithmetic grid `start, start + step, ..., <= stop`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Grid {
    pub fn new(start: f64, stop: f64, step: f64) -> Result<Self> {
        let g = Self { start, stop, step };
        if !(start.is_finite() && stop.is_finite() && step.is_finite()) {
            return Err(Error::InvalidSweep("grid bounds must be finite".into()));
        }
        if step.is_nan() || step <= 0.0 {
            return Err(Error::InvalidSweep(format!("step {step} must be > 0")));
        }
        if stop < start {
            return Err(Error::InvalidSweep(format!("empty range [{start}, {stop}]")));
        }
        Ok(g)
    }

    pub fn values(&self) -> Vec<f64> {
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        (0..=n).map(|k| self.start + k as f64 * self.step).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    /// Bending angles [rad].
    pub theta: Grid,
    pub delta: f64,
    pub direction: LoadDirection,
    /// Load magnitudes [N].
    pub load: Grid,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        Grid::new(self.theta.start, self.theta.stop, self.theta.step)?;
        Grid::new(self.load.start, self.load.stop, self.load.step)?;
        if !self.delta.is_finite() {
            return Err(Error::InvalidSweep("delta must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub theta: f64,
    pub load: f64,
    /// `||J_v dpsi||` [m].
    pub displacement: f64,
    /// Base-frame K_X entries (x,x), (x,z), (z,x), (z,z) [N/m].
    pub k_x: [f64; 4],
}

/// Loads the tip radially in the bending plane over a theta x load grid.
/// Rows are theta-major.
pub fn stiffness_sweep(params: &ArmParameters, spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let loads = spec.load.values();
    let mut rows = Vec::new();
    for theta in spec.theta.values() {
        let psi = Configuration::new(theta, spec.delta)?;
        let dir = radial_direction(&psi, spec.direction);
        let jv = jacobian_v_psi(params, &psi);
        for &load in &loads {
            let force = dir * load;
            let deflection = simulate_deflection(params, &LoadCase::new(psi, force))?;
            let k: Matrix3<f64> = stiffness_task(params, &psi, &Vector4::zeros(), Some(&force))?;
            rows.push(SweepRow {
                theta,
                load,
                displacement: (jv * deflection.delta_psi).norm(),
                k_x: [k[(0, 0)], k[(0, 2)], k[(2, 0)], k[(2, 2)]],
            });
        }
    }
    Ok(rows)
}

pub fn write_sweep_csv<W: Write>(mut writer: W, rows: &[SweepRow]) -> Result<()> {
    writeln!(writer, "{SWEEP_CSV_HEADER}")?;
    for r in rows {
        writeln!(
            writer,
            "{},{},{},{},{},{},{}",
            r.theta, r.load, r.displacement, r.k_x[0], r.k_x[1], r.k_x[2], r.k_x[3]
        )?;
    }
    writer.flush()?;
    Ok(())
}
