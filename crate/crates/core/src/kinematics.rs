//! Constant-curvature kinematics of a single four-tendon segment.
//!
//! Frames: {B} at the base with x on tendon 1, {1} rotated by delta about
//! z_b, {E} on the end disk with x_e in the bending plane, and {G} obtained
//! from {E} by a -delta twist so that x_g again passes through tendon 1.

use nalgebra::{Matrix3, Matrix3x2, Matrix4, Matrix4x2, Matrix6x2, Vector3, Vector4};

use crate::params::{ArmParameters, Configuration, TendonDisplacements, TENDON_COUNT, THETA_SMALL};

/// Pose of the end-disk frame {G} in the base frame {B}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transform {
    pub rotation: Matrix3<f64>,
    pub position: Vector3<f64>,
}

impl Transform {
    pub fn to_homogeneous(&self) -> Matrix4<f64> {
        let mut m = Matrix4::identity();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&self.rotation);
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&self.position);
        m
    }
}

/// The three configuration-space Jacobians plus the stacked twist Jacobian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobianSet {
    /// Tendon displacement rates per configuration rate, 4x2 [m/rad].
    pub j_q_psi: Matrix4x2<f64>,
    /// Tip linear velocity, 3x2 [m/rad].
    pub j_v_psi: Matrix3x2<f64>,
    /// Tip angular velocity, 3x2 [rad/rad].
    pub j_w_psi: Matrix3x2<f64>,
    /// `[j_v_psi; j_w_psi]`, 6x2.
    pub j_x_psi: Matrix6x2<f64>,
}

pub fn rot_z(angle: f64) -> Matrix3<f64> {
    let (s, c) = angle.sin_cos();
    Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

pub fn rot_y(angle: f64) -> Matrix3<f64> {
    let (s, c) = angle.sin_cos();
    Matrix3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c)
}

/// (1 - cos t) / t without cancellation; tends to t/2.
fn one_minus_cos_over(t: f64) -> f64 {
    let h = (0.5 * t).sin();
    2.0 * h * h / t
}

/// Tip position ^b p_g. Also used with perturbed angles by finite-difference
/// code, so it takes raw angles.
pub(crate) fn tip_position(length: f64, theta: f64, delta: f64) -> Vector3<f64> {
    if theta < THETA_SMALL {
        return Vector3::new(0.0, 0.0, length);
    }
    let (sd, cd) = delta.sin_cos();
    let radial = length * one_minus_cos_over(theta);
    Vector3::new(cd * radial, sd * radial, length * theta.sin() / theta)
}

pub(crate) fn tip_rotation(theta: f64, delta: f64) -> Matrix3<f64> {
    if theta < THETA_SMALL {
        return Matrix3::identity();
    }
    rot_z(delta) * rot_y(theta) * rot_z(-delta)
}

/// Pose of the end disk. Below [`THETA_SMALL`] returns the straight pose
/// `p = (0, 0, L)`, `R = I` for every delta.
pub fn forward_kinematics(params: &ArmParameters, psi: &Configuration) -> Transform {
    Transform {
        rotation: tip_rotation(psi.theta(), psi.delta()),
        position: tip_position(params.backbone_length, psi.theta(), psi.delta()),
    }
}

pub(crate) fn tendon_displacements(pitch_radius: f64, theta: f64, delta: f64) -> Vector4<f64> {
    Vector4::from_fn(|i, _| pitch_radius * ArmParameters::tendon_phase(i, delta).cos() * theta)
}

/// Configuration to joint space: `q_i = r cos(delta + i beta) theta`.
pub fn inverse_kinematics_config_to_joint(params: &ArmParameters, psi: &Configuration) -> TendonDisplacements {
    TendonDisplacements(tendon_displacements(params.pitch_radius, psi.theta(), psi.delta()))
}

pub(crate) fn jq_raw(pitch_radius: f64, theta: f64, delta: f64) -> Matrix4x2<f64> {
    let mut j = Matrix4x2::zeros();
    for i in 0..TENDON_COUNT {
        let (s, c) = ArmParameters::tendon_phase(i, delta).sin_cos();
        j[(i, 0)] = pitch_radius * c;
        j[(i, 1)] = -pitch_radius * s * theta;
    }
    j
}

pub fn jacobian_q_psi(params: &ArmParameters, psi: &Configuration) -> Matrix4x2<f64> {
    jq_raw(params.pitch_radius, psi.theta(), psi.delta())
}

pub(crate) fn jv_raw(length: f64, theta: f64, delta: f64) -> Matrix3x2<f64> {
    let (sd, cd) = delta.sin_cos();
    if theta < THETA_SMALL {
        return Matrix3x2::new(0.5 * length * cd, 0.0, 0.5 * length * sd, 0.0, 0.0, 0.0);
    }
    let (st, ct) = theta.sin_cos();
    let t2 = theta * theta;
    // theta sin + cos - 1, written as theta sin - 2 sin^2(theta/2)
    let h = (0.5 * theta).sin();
    let in_plane = (theta * st - 2.0 * h * h) / t2;
    let axial = (theta * ct - st) / t2;
    let sweep = one_minus_cos_over(theta);
    length * Matrix3x2::new(cd * in_plane, -sd * sweep, sd * in_plane, cd * sweep, axial, 0.0)
}

/// Linear-velocity Jacobian of the tip, with the straight limit
/// `[[L/2 cos d, 0], [L/2 sin d, 0], [0, 0]]` below [`THETA_SMALL`].
pub fn jacobian_v_psi(params: &ArmParameters, psi: &Configuration) -> Matrix3x2<f64> {
    jv_raw(params.backbone_length, psi.theta(), psi.delta())
}

pub(crate) fn jw_raw(theta: f64, delta: f64) -> Matrix3x2<f64> {
    let (sd, cd) = delta.sin_cos();
    let (st, ct) = theta.sin_cos();
    Matrix3x2::new(-sd, -cd * st, cd, -sd * st, 0.0, 1.0 - ct)
}

/// Angular-velocity Jacobian of frame {G}.
pub fn jacobian_w_psi(psi: &Configuration) -> Matrix3x2<f64> {
    jw_raw(psi.theta(), psi.delta())
}

pub fn jacobians(params: &ArmParameters, psi: &Configuration) -> JacobianSet {
    let j_v_psi = jacobian_v_psi(params, psi);
    let j_w_psi = jacobian_w_psi(psi);
    let mut j_x_psi = Matrix6x2::zeros();
    j_x_psi.fixed_view_mut::<3, 2>(0, 0).copy_from(&j_v_psi);
    j_x_psi.fixed_view_mut::<3, 2>(3, 0).copy_from(&j_w_psi);
    JacobianSet {
        j_q_psi: jacobian_q_psi(params, psi),
        j_v_psi,
        j_w_psi,
        j_x_psi,
    }
}
