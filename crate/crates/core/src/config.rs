//! JSON parameter and calibration files.
//!
//! Parameter file keys are in the units the arm is specified in:
//!
//! ```json
//! {"L_mm": 222, "r_mm": 12, "Ep_GPa": 82, "ET_GPa": 2.34,
//!  "Ip_mm4": 0.2485, "A_mm2": 0.2642,
//!  "R_offset": [[1,0,0],[0,1,0],[0,0,1]], "theta_est_min_deg": 5}
//! ```
//!
//! `R_offset` and `theta_est_min_deg` are optional. Everything is converted
//! to SI on load.

use std::path::Path;

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::ArmParameters;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParameterFile {
    #[serde(rename = "L_mm")]
    pub l_mm: f64,
    pub r_mm: f64,
    #[serde(rename = "Ep_GPa")]
    pub ep_gpa: f64,
    #[serde(rename = "ET_GPa")]
    pub et_gpa: f64,
    #[serde(rename = "Ip_mm4")]
    pub ip_mm4: f64,
    #[serde(rename = "A_mm2")]
    pub a_mm2: f64,
    #[serde(rename = "R_offset", default, skip_serializing_if = "Option::is_none")]
    pub r_offset: Option<[[f64; 3]; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_est_min_deg: Option<f64>,
}

impl Default for ParameterFile {
    fn default() -> Self {
        Self {
            l_mm: 222.0,
            r_mm: 12.0,
            ep_gpa: 82.0,
            et_gpa: 2.34,
            ip_mm4: 0.2485,
            a_mm2: 0.2642,
            r_offset: None,
            theta_est_min_deg: None,
        }
    }
}

impl ParameterFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidParameterFile(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_parameters(&self) -> Result<ArmParameters> {
        let params = ArmParameters::new(
            self.l_mm * 1e-3,
            self.r_mm * 1e-3,
            self.ep_gpa * 1e9,
            self.ip_mm4 * 1e-12,
            self.et_gpa * 1e9,
            self.a_mm2 * 1e-6,
        )?;
        match self.theta_est_min_deg {
            Some(deg) => params.with_theta_est_min(deg.to_radians()),
            None => Ok(params),
        }
    }

    pub fn offset(&self) -> Option<Matrix3<f64>> {
        self.r_offset.as_ref().map(matrix_from_rows)
    }
}

/// `{"R_offset": [[...], [...], [...]]}`: orientation of the arm base in the
/// IMU's world frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Calibration {
    #[serde(rename = "R_offset")]
    pub r_offset: [[f64; 3]; 3],
}

impl Calibration {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidParameterFile(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn offset(&self) -> Matrix3<f64> {
        matrix_from_rows(&self.r_offset)
    }
}

pub fn matrix_from_rows(rows: &[[f64; 3]; 3]) -> Matrix3<f64> {
    Matrix3::from_fn(|i, j| rows[i][j])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_the_prototype() {
        let p = ParameterFile::default().to_parameters().unwrap();
        let q = ArmParameters::prototype();
        assert!((p.backbone_length - q.backbone_length).abs() < 1e-15);
        assert!((p.backbone_bending_stiffness() / q.backbone_bending_stiffness() - 1.0).abs() < 1e-12);
        assert!((p.tendon_axial_stiffness() / q.tendon_axial_stiffness() - 1.0).abs() < 1e-12);
        assert_eq!(p.theta_est_min, q.theta_est_min);
    }

    #[test]
    fn parses_optional_keys() {
        let f = ParameterFile::from_json(
            r#"{"L_mm":200,"r_mm":10,"Ep_GPa":80,"ET_GPa":2,"Ip_mm4":0.25,"A_mm2":0.25,
                "R_offset":[[0,-1,0],[1,0,0],[0,0,1]],"theta_est_min_deg":10}"#,
        )
        .unwrap();
        let p = f.to_parameters().unwrap();
        assert!((p.backbone_length - 0.2).abs() < 1e-15);
        assert!((p.theta_est_min - 10f64.to_radians()).abs() < 1e-15);
        assert_eq!(f.offset().unwrap()[(0, 1)], -1.0);
    }

    #[test]
    fn rejects_missing_and_non_positive_keys() {
        assert!(matches!(
            ParameterFile::from_json(r#"{"L_mm":200}"#),
            Err(Error::InvalidParameterFile(_))
        ));
        let f = ParameterFile::from_json(r#"{"L_mm":-1,"r_mm":10,"Ep_GPa":80,"ET_GPa":2,"Ip_mm4":0.25,"A_mm2":0.25}"#)
            .unwrap();
        assert!(matches!(f.to_parameters(), Err(Error::InvalidParameter { .. })));
    }

    #[test]
    fn calibration_file() {
        let c = Calibration::from_json(r#"{"R_offset":[[1,0,0],[0,0,-1],[0,1,0]]}"#).unwrap();
        assert_eq!(c.offset()[(1, 2)], -1.0);
    }
}
