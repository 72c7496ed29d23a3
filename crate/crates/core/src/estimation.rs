//! Tip force estimation from end-disk orientation.
//!
//! Each orientation sample is projected onto the bending plane
//! (`theta = acos r33`, `delta = atan2(r23, r13)`), the last `window`
//! projections are averaged into a deformation `dpsi` relative to the
//! commanded configuration, and the force follows from the linear model
//! `F* = K_psi dpsi`, `F_ext = (J_v^T)^+ F*`.
//!
//! Only the component of a tip force that lies in the column space of `J_v`
//! is observable this way: a force orthogonal to both tip velocity
//! directions produces no configuration change.

use nalgebra::{Matrix3, Vector2, Vector3, Vector4};

use crate::error::{Error, Result};
use crate::imu::OrientationMeasurement;
use crate::kinematics::jacobian_v_psi;
use crate::linalg::{nearest_rotation, orthonormality_error, pseudoinverse_fixed};
use crate::params::{wrap_angle, ArmParameters, Configuration};
use crate::stiffness::{check_estimable, stiffness_config};

/// Rotations further than this from orthonormal are rejected.
pub const ROTATION_TOLERANCE: f64 = 1e-6;

/// Below this `sin(theta)` the bending plane of a measurement is undefined.
pub const PROJECTION_SIN_FLOOR: f64 = 1e-6;

/// Bending-plane projection of one orientation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection {
    pub theta: f64,
    pub delta: f64,
    /// `sin(theta) < 1e-6`; `delta` was reported as 0.
    pub ambiguous: bool,
}

/// Averaged measured configuration and its offset from the reference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeformationMeasurement {
    pub theta_bar: f64,
    pub delta_bar: f64,
    pub delta_psi: Vector2<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForceEstimate {
    /// Generalized force `K_psi dpsi` [N m].
    pub f_star_hat: Vector2<f64>,
    /// Tip force in the base frame [N].
    pub f_ext_hat: Vector3<f64>,
    /// sigma2 / sigma1 of `J_v` at the reference configuration.
    pub condition_sigma_ratio: f64,
    pub deformation: DeformationMeasurement,
    pub samples_used: usize,
    /// The requested window exceeded the log and all samples were used.
    pub window_clamped: bool,
    /// Number of averaged samples whose bending plane was ambiguous.
    pub ambiguous_samples: usize,
}

fn checked_rotation(r: &Matrix3<f64>) -> Result<Matrix3<f64>> {
    let deviation = orthonormality_error(r);
    match nearest_rotation(r) {
        Some(fixed) if deviation <= ROTATION_TOLERANCE => Ok(fixed),
        _ => Err(Error::NonOrthonormal { deviation }),
    }
}

/// Re-expresses an IMU orientation, given in the world frame, in the arm
/// base frame: `R_offset^T R_world`, where `R_offset` is the base
/// orientation in the world frame.
pub fn world_to_base(r_world: &Matrix3<f64>, r_offset: &Matrix3<f64>) -> Result<Matrix3<f64>> {
    let world = checked_rotation(r_world)?;
    let offset = checked_rotation(r_offset)?;
    nearest_rotation(&(offset.transpose() * world)).ok_or(Error::NonOrthonormal { deviation: f64::NAN })
}

pub fn project_to_configuration(r_bar: &Matrix3<f64>) -> Projection {
    let theta = r_bar[(2, 2)].clamp(-1.0, 1.0).acos();
    if theta.sin() < PROJECTION_SIN_FLOOR {
        return Projection {
            theta,
            delta: 0.0,
            ambiguous: true,
        };
    }
    Projection {
        theta,
        delta: r_bar[(1, 2)].atan2(r_bar[(0, 2)]),
        ambiguous: false,
    }
}

/// `F* = K_psi dpsi` and `F_ext = (J_v^T)^+ F*` at the reference.
pub fn force_from_deformation(
    params: &ArmParameters,
    psi_ref: &Configuration,
    tau: &Vector4<f64>,
    delta_psi: &Vector2<f64>,
) -> Result<(Vector2<f64>, Vector3<f64>)> {
    check_estimable(params, psi_ref)?;
    let f_star = stiffness_config(params, psi_ref, tau) * delta_psi;
    let jv = jacobian_v_psi(params, psi_ref);
    Ok((f_star, pseudoinverse_fixed(&jv.transpose()) * f_star))
}

/// Averages the projected configurations of the last `window` samples.
pub fn measure_deformation(
    psi_ref: &Configuration,
    samples: &[OrientationMeasurement],
    window: usize,
) -> Result<(DeformationMeasurement, usize, usize)> {
    if samples.is_empty() {
        return Err(Error::EmptyLog);
    }
    if window == 0 {
        return Err(Error::InvalidWindow);
    }
    let used = &samples[samples.len().saturating_sub(window)..];
    let mut sum = Vector2::zeros();
    let mut ambiguous = 0;
    for s in used {
        let p = project_to_configuration(&s.rotation);
        ambiguous += usize::from(p.ambiguous);
        // wrap each delta offset before averaging so samples straddling +-pi
        // do not cancel
        sum += Vector2::new(p.theta - psi_ref.theta(), wrap_angle(p.delta - psi_ref.delta()));
    }
    let delta_psi = sum / used.len() as f64;
    Ok((
        DeformationMeasurement {
            theta_bar: psi_ref.theta() + delta_psi[0],
            delta_bar: wrap_angle(psi_ref.delta() + delta_psi[1]),
            delta_psi,
        },
        used.len(),
        ambiguous,
    ))
}

/// Estimates the tip force from an orientation log recorded at the
/// commanded configuration `psi_ref`.
///
/// `tau` enters only through the active-stiffness term; pass zeros for the
/// slack-tendon model. A `window` larger than the log uses every sample.
pub fn estimate_force(
    params: &ArmParameters,
    psi_ref: &Configuration,
    tau: &Vector4<f64>,
    samples: &[OrientationMeasurement],
    window: usize,
) -> Result<ForceEstimate> {
    let condition_sigma_ratio = check_estimable(params, psi_ref)?;
    let (deformation, samples_used, ambiguous_samples) = measure_deformation(psi_ref, samples, window)?;
    let (f_star_hat, f_ext_hat) = force_from_deformation(params, psi_ref, tau, &deformation.delta_psi)?;
    Ok(ForceEstimate {
        f_star_hat,
        f_ext_hat,
        condition_sigma_ratio,
        deformation,
        samples_used,
        window_clamped: window > samples.len(),
        ambiguous_samples,
    })
}
