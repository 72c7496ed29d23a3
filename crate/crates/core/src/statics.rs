//! Elastic energy of the backbone and the tendon/wrench equilibrium
//! `J_q^T tau + J_x^T w_ext = grad E`.

use nalgebra::{Vector2, Vector4, Vector6};

use crate::error::{Error, Result};
use crate::kinematics::jacobians;
use crate::linalg::pseudoinverse_fixed;
use crate::params::{ArmParameters, Configuration};

/// Largest equilibrium residual accepted from [`solve_tendon_tensions`] [N m].
pub const EQUILIBRIUM_TOLERANCE: f64 = 1e-9;

/// Backbone strain energy `theta^2 E_p I_p / (2 L)` [J].
pub fn elastic_energy(params: &ArmParameters, psi: &Configuration) -> f64 {
    let theta = psi.theta();
    0.5 * theta * theta * params.backbone_bending_stiffness()
}

/// `(theta E_p I_p / L, 0)` [N m]. The energy does not depend on delta.
pub fn grad_elastic_energy(params: &ArmParameters, psi: &Configuration) -> Vector2<f64> {
    Vector2::new(psi.theta() * params.backbone_bending_stiffness(), 0.0)
}

/// Generalized force `F* = grad E - J_q^T tau` [N m].
pub fn generalized_force(params: &ArmParameters, psi: &Configuration, tau: &Vector4<f64>) -> Vector2<f64> {
    let j = jacobians(params, psi);
    grad_elastic_energy(params, psi) - j.j_q_psi.transpose() * tau
}

/// Energy, gradient, tensions and load at one configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StaticsState {
    pub elastic_energy: f64,
    pub grad_e: Vector2<f64>,
    pub tendon_tension: Vector4<f64>,
    /// Force over moment [N; N m].
    pub external_wrench: Vector6<f64>,
    pub f_star: Vector2<f64>,
}

impl StaticsState {
    pub fn evaluate(params: &ArmParameters, psi: &Configuration, tau: &Vector4<f64>, w_ext: &Vector6<f64>) -> Self {
        Self {
            elastic_energy: elastic_energy(params, psi),
            grad_e: grad_elastic_energy(params, psi),
            tendon_tension: *tau,
            external_wrench: *w_ext,
            f_star: generalized_force(params, psi, tau),
        }
    }
}

/// Minimum-norm tendon tensions and how well they balance the load.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TensionSolution {
    pub tau: Vector4<f64>,
    pub residual: f64,
    /// Some tension is negative, i.e. a tendon would have to push.
    /// Returned as-is, not clamped.
    pub slack: bool,
}

/// Minimum-Euclidean-norm `tau` with `J_q^T tau = grad E - J_x^T w_ext`.
///
/// The system is 2x4 and underdetermined away from the straight pose. At
/// (or very near) `theta = 0` the delta row of `J_q^T` vanishes and a wrench
/// with a delta component cannot be balanced, which is reported as
/// [`Error::ResidualTooLarge`].
pub fn solve_tendon_tensions(
    params: &ArmParameters,
    psi: &Configuration,
    w_ext: &Vector6<f64>,
) -> Result<TensionSolution> {
    let j = jacobians(params, psi);
    let rhs = grad_elastic_energy(params, psi) - j.j_x_psi.transpose() * w_ext;
    let jq_t = j.j_q_psi.transpose();
    let tau = pseudoinverse_fixed(&jq_t) * rhs;
    let residual = (jq_t * tau - rhs).norm();
    if residual.is_nan() || residual > EQUILIBRIUM_TOLERANCE {
        return Err(Error::ResidualTooLarge {
            residual,
            tolerance: EQUILIBRIUM_TOLERANCE,
        });
    }
    Ok(TensionSolution {
        tau,
        residual,
        slack: tau.iter().any(|&t| t < 0.0),
    })
}
