//! Kinematics, statics, stiffness and IMU-based tip force estimation for a
//! single-segment, four-tendon continuum arm under the constant-curvature
//! assumption.
//!
//! All library quantities are SI (m, N, Pa, rad). The configuration is
//! `psi = (theta, delta)`: bending angle and bending-plane angle.
//!
//! ```
//! use continuum_core::{forward_kinematics, ArmParameters, Configuration};
//!
//! let arm = ArmParameters::prototype();
//! let pose = forward_kinematics(&arm, &Configuration::new(std::f64::consts::FRAC_PI_2, 0.0).unwrap());
//! assert!((pose.position.x - 0.14133).abs() < 1e-5);
//! ```

pub mod config;
pub mod error;
pub mod estimation;
pub mod imu;
pub mod kinematics;
pub mod linalg;
pub mod params;
pub mod sim;
pub mod statics;
pub mod stiffness;

pub use config::{Calibration, ParameterFile};
pub use error::{Error, Result};
pub use estimation::{
    estimate_force, force_from_deformation, project_to_configuration, world_to_base, DeformationMeasurement,
    ForceEstimate, Projection,
};
pub use imu::{parse_imu_log, read_imu_log, save_imu_log, write_imu_log, ImuStream, OrientationMeasurement};
pub use kinematics::{
    forward_kinematics, inverse_kinematics_config_to_joint, jacobian_q_psi, jacobian_v_psi, jacobian_w_psi, jacobians,
    JacobianSet, Transform,
};
pub use linalg::pseudoinverse;
pub use params::{ArmParameters, Configuration, TendonDisplacements, THETA_EST_MIN, THETA_SMALL};
pub use sim::{
    simulate_deflection, stiffness_sweep, synthesize_imu_log, Deflection, Grid, LoadCase, LoadDirection, SweepRow,
    SweepSpec,
};
pub use statics::{elastic_energy, grad_elastic_energy, solve_tendon_tensions, StaticsState, TensionSolution};
pub use stiffness::{stiffness_bundle, stiffness_config, stiffness_task, StiffnessBundle};

pub use nalgebra;
