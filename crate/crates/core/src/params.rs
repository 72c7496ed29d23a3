//! Arm constants and the configuration-space coordinates.
//!
//! Everything here is SI: metres, pascals, radians. Millimetre / gigapascal
//! values only appear at the parameter-file boundary (see [`crate::config`]).

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{Vector2, Vector4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Angular spacing between neighbouring tendons on the pitch circle.
pub const TENDON_DIVISION: f64 = FRAC_PI_2;

pub const TENDON_COUNT: usize = 4;

/// Below this bending angle the closed forms switch to their straight limits.
pub const THETA_SMALL: f64 = 1e-6;

/// Default lower bound on the reference bending angle for force estimation
/// and task-space stiffness (5 degrees).
pub const THETA_EST_MIN: f64 = 0.087;

/// Geometric and material constants of one continuum segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArmParameters {
    /// Backbone length L [m].
    pub backbone_length: f64,
    /// Pitch-circle radius r of the tendon routing [m].
    pub pitch_radius: f64,
    /// Young's modulus of the NiTi backbone E_p [Pa].
    pub backbone_youngs: f64,
    /// Second moment of area of the backbone I_p [m^4].
    pub backbone_inertia: f64,
    /// Young's modulus of the tendons E_T [Pa].
    pub tendon_youngs: f64,
    /// Tendon cross-section A [m^2].
    pub tendon_area: f64,
    /// Estimation floor on the reference bending angle [rad].
    pub theta_est_min: f64,
}

impl ArmParameters {
    pub fn new(
        backbone_length: f64,
        pitch_radius: f64,
        backbone_youngs: f64,
        backbone_inertia: f64,
        tendon_youngs: f64,
        tendon_area: f64,
    ) -> Result<Self> {
        let params = Self {
            backbone_length,
            pitch_radius,
            backbone_youngs,
            backbone_inertia,
            tendon_youngs,
            tendon_area,
            theta_est_min: THETA_EST_MIN,
        };
        params.validate()?;
        Ok(params)
    }

    /// The prototype arm: L = 222 mm, r = 12 mm, E_p = 82 GPa, E_T = 2.34 GPa,
    /// I_p = 0.2485 mm^4, A = 0.2642 mm^2.
    pub fn prototype() -> Self {
        Self {
            backbone_length: 0.222,
            pitch_radius: 0.012,
            backbone_youngs: 82e9,
            backbone_inertia: 0.2485e-12,
            tendon_youngs: 2.34e9,
            tendon_area: 0.2642e-6,
            theta_est_min: THETA_EST_MIN,
        }
    }

    pub fn with_theta_est_min(mut self, theta_est_min: f64) -> Result<Self> {
        self.theta_est_min = theta_est_min;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("backbone_length", self.backbone_length),
            ("pitch_radius", self.pitch_radius),
            ("backbone_youngs", self.backbone_youngs),
            ("backbone_inertia", self.backbone_inertia),
            ("tendon_youngs", self.tendon_youngs),
            ("tendon_area", self.tendon_area),
            ("theta_est_min", self.theta_est_min),
        ];
        for (name, value) in fields {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidParameter { name, value });
            }
        }
        Ok(())
    }

    /// Bending stiffness of the backbone, E_p I_p / L [N m / rad].
    pub fn backbone_bending_stiffness(&self) -> f64 {
        self.backbone_youngs * self.backbone_inertia / self.backbone_length
    }

    /// Axial stiffness of one tendon, E_T A / L [N / m]. Uses the backbone
    /// length as the tendon length.
    pub fn tendon_axial_stiffness(&self) -> f64 {
        self.tendon_youngs * self.tendon_area / self.backbone_length
    }

    /// Angular position of tendon `i` (0-based) relative to the bending plane.
    pub(crate) fn tendon_phase(i: usize, delta: f64) -> f64 {
        delta + i as f64 * TENDON_DIVISION
    }
}

impl Default for ArmParameters {
    fn default() -> Self {
        Self::prototype()
    }
}

/// Configuration-space vector psi = (theta, delta).
///
/// `theta` is the bending angle in `[0, pi)`, `delta` the bending-plane angle,
/// wrapped to `(-pi, pi]` on construction. At `theta = 0` the bending plane is
/// undefined and every model output is independent of `delta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Configuration {
    theta: f64,
    delta: f64,
}

impl Configuration {
    pub fn new(theta: f64, delta: f64) -> Result<Self> {
        if !theta.is_finite() || !delta.is_finite() {
            return Err(Error::NonFiniteAngle);
        }
        if !(0.0..PI).contains(&theta) {
            return Err(Error::ThetaOutOfRange { theta });
        }
        Ok(Self {
            theta,
            delta: wrap_angle(delta),
        })
    }

    pub fn from_degrees(theta_deg: f64, delta_deg: f64) -> Result<Self> {
        Self::new(theta_deg.to_radians(), delta_deg.to_radians())
    }

    pub fn straight() -> Self {
        Self { theta: 0.0, delta: 0.0 }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn as_vector(&self) -> Vector2<f64> {
        Vector2::new(self.theta, self.delta)
    }

    /// `self + step`, re-validated; delta wraps.
    pub fn offset(&self, step: &Vector2<f64>) -> Result<Self> {
        Self::new(self.theta + step[0], self.delta + step[1])
    }

    /// `self - reference` with the delta component wrapped to `(-pi, pi]`.
    pub fn difference(&self, reference: &Configuration) -> Vector2<f64> {
        Vector2::new(self.theta - reference.theta, wrap_angle(self.delta - reference.delta))
    }
}

/// Wraps an angle to `(-pi, pi]`.
pub fn wrap_angle(angle: f64) -> f64 {
    let mut a = angle.rem_euclid(2.0 * PI);
    if a > PI {
        a -= 2.0 * PI;
    }
    a
}

/// Tendon displacement vector q [m], tendon 1 on the base x axis.
///
/// Positive means the tendon is shortened on the arm side. Antagonistic pairs
/// satisfy `q[0] = -q[2]` and `q[1] = -q[3]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TendonDisplacements(pub Vector4<f64>);

impl TendonDisplacements {
    pub fn as_vector(&self) -> &Vector4<f64> {
        &self.0
    }
}
