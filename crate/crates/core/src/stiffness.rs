//! Configuration-space and task-space stiffness.
//!
//! `K_psi = H_psi - [dJ_q^T/dpsi] tau - J_q^T K_q J_q` is evaluated exactly as
//! written. With the prototype constants the tendon term dominates H_psi, so
//! `K_psi[(0, 0)]` comes out negative; callers should not expect a positive
//! definite matrix.

use nalgebra::{Matrix2, Matrix2x3, Matrix3, Matrix3x2, Matrix4, Matrix4x2, Vector2, Vector3, Vector4};

use crate::error::{Error, Result};
use crate::kinematics::{jq_raw, jv_raw};
use crate::linalg::{pseudoinverse_fixed, sigma_ratio, PINV_RCOND};
use crate::params::{ArmParameters, Configuration, TENDON_COUNT};

/// Step of the central difference used for `d (J_v^T)^+ / d psi`.
pub const PINV_DERIVATIVE_STEP: f64 = 1e-6;

/// Stiffness matrices at one configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StiffnessBundle {
    /// Hessian of the elastic energy [N m / rad].
    pub h_psi: Matrix2<f64>,
    /// Tendon stiffness, `diag(E_T A / L)` [N / m].
    pub k_q: Matrix4<f64>,
    /// Configuration-space stiffness [N m / rad].
    pub k_psi: Matrix2<f64>,
    /// Task-space stiffness [N / m]; absent when not requested.
    pub k_x: Option<Matrix3<f64>>,
}

pub fn energy_hessian(params: &ArmParameters) -> Matrix2<f64> {
    Matrix2::new(params.backbone_bending_stiffness(), 0.0, 0.0, 0.0)
}

pub fn tendon_stiffness(params: &ArmParameters) -> Matrix4<f64> {
    Matrix4::from_diagonal_element(params.tendon_axial_stiffness())
}

/// `(dJ_q/dtheta, dJ_q/ddelta)`, analytic.
pub fn jacobian_q_psi_derivatives(params: &ArmParameters, psi: &Configuration) -> (Matrix4x2<f64>, Matrix4x2<f64>) {
    let r = params.pitch_radius;
    let theta = psi.theta();
    let mut d_theta = Matrix4x2::zeros();
    let mut d_delta = Matrix4x2::zeros();
    for i in 0..TENDON_COUNT {
        let (s, c) = ArmParameters::tendon_phase(i, psi.delta()).sin_cos();
        d_theta[(i, 1)] = -r * s;
        d_delta[(i, 0)] = -r * s;
        d_delta[(i, 1)] = -r * c * theta;
    }
    (d_theta, d_delta)
}

/// The tension-dependent term `[dJ_q^T/dtheta tau, dJ_q^T/ddelta tau]`.
pub fn active_stiffness(params: &ArmParameters, psi: &Configuration, tau: &Vector4<f64>) -> Matrix2<f64> {
    let (d_theta, d_delta) = jacobian_q_psi_derivatives(params, psi);
    Matrix2::from_columns(&[d_theta.transpose() * tau, d_delta.transpose() * tau])
}

/// `J_q^T K_q J_q`.
pub fn tendon_coupling(params: &ArmParameters, psi: &Configuration) -> Matrix2<f64> {
    let jq = jq_raw(params.pitch_radius, psi.theta(), psi.delta());
    jq.transpose() * tendon_stiffness(params) * jq
}

pub fn stiffness_config(params: &ArmParameters, psi: &Configuration, tau: &Vector4<f64>) -> Matrix2<f64> {
    energy_hessian(params) - active_stiffness(params, psi, tau) - tendon_coupling(params, psi)
}

fn jv_transpose_pinv(params: &ArmParameters, theta: f64, delta: f64) -> Matrix3x2<f64> {
    pseudoinverse_fixed(&jv_raw(params.backbone_length, theta, delta).transpose())
}

/// Central differences of `(J_v^T)^+` in theta and delta.
pub fn jv_transpose_pinv_derivatives(params: &ArmParameters, psi: &Configuration) -> [Matrix3x2<f64>; 2] {
    let (t, d, h) = (psi.theta(), psi.delta(), PINV_DERIVATIVE_STEP);
    [
        (jv_transpose_pinv(params, t + h, d) - jv_transpose_pinv(params, t - h, d)) / (2.0 * h),
        (jv_transpose_pinv(params, t, d + h) - jv_transpose_pinv(params, t, d - h)) / (2.0 * h),
    ]
}

/// Rejects configurations where the force map is ill-posed.
pub(crate) fn check_estimable(params: &ArmParameters, psi: &Configuration) -> Result<f64> {
    if psi.theta() < params.theta_est_min {
        return Err(Error::NearStraightConfiguration {
            theta: psi.theta(),
            min: params.theta_est_min,
        });
    }
    let ratio = sigma_ratio(&jv_raw(params.backbone_length, psi.theta(), psi.delta()));
    if ratio < PINV_RCOND {
        return Err(Error::RankDeficient { ratio });
    }
    Ok(ratio)
}

/// Task-space stiffness
/// `K_X = [d(J_v^T)^+/dpsi] F* J_v^+ + (J_v^T)^+ K_psi J_v^+`.
///
/// `F* = J_v^T force` when a tip force is given, zero otherwise. The tensor
/// term uses central differences of the pseudoinverse.
pub fn stiffness_task(
    params: &ArmParameters,
    psi: &Configuration,
    tau: &Vector4<f64>,
    force: Option<&Vector3<f64>>,
) -> Result<Matrix3<f64>> {
    check_estimable(params, psi)?;
    let jv = jv_raw(params.backbone_length, psi.theta(), psi.delta());
    let jv_pinv: Matrix2x3<f64> = pseudoinverse_fixed(&jv);
    let jvt_pinv: Matrix3x2<f64> = pseudoinverse_fixed(&jv.transpose());
    let k_psi = stiffness_config(params, psi, tau);

    let mut k_x = jvt_pinv * k_psi * jv_pinv;
    if let Some(f) = force {
        let f_star: Vector2<f64> = jv.transpose() * f;
        let [d_theta, d_delta] = jv_transpose_pinv_derivatives(params, psi);
        let tensor = Matrix3x2::from_columns(&[d_theta * f_star, d_delta * f_star]);
        k_x += tensor * jv_pinv;
    }
    Ok(k_x)
}

/// H_psi, K_q, K_psi and optionally K_X in one call.
pub fn stiffness_bundle(
    params: &ArmParameters,
    psi: &Configuration,
    tau: &Vector4<f64>,
    task_space: bool,
    force: Option<&Vector3<f64>>,
) -> Result<StiffnessBundle> {
    let k_x = if task_space {
        Some(stiffness_task(params, psi, tau, force)?)
    } else {
        None
    };
    Ok(StiffnessBundle {
        h_psi: energy_hessian(params),
        k_q: tendon_stiffness(params),
        k_psi: stiffness_config(params, psi, tau),
        k_x,
    })
}

/// `||K - K^T|| / ||K||` (Frobenius), 0 for the zero matrix.
pub fn relative_asymmetry(k: &Matrix2<f64>) -> f64 {
    let n = k.norm();
    if n == 0.0 {
        0.0
    } else {
        (k - k.transpose()).norm() / n
    }
}
