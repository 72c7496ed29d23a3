//! IMU orientation logs.
//!
//! Format (UTF-8, LF):
//!
//! ```text
//! imu-log,v1
//! t,qw,qx,qy,qz
//! ...
//! ```
//!
//! `t` is seconds, the quaternion is scalar-first and must have unit norm
//! within 1e-3; it is re-normalized on load. A row with ten fields
//! `t,r11,r12,r13,r21,r22,r23,r31,r32,r33` is read as a row-major rotation
//! matrix instead. Timestamps must be non-decreasing.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::sync::{Arc, RwLock};

use nalgebra::{Matrix3, Quaternion, Rotation3, UnitQuaternion};

use crate::error::{Error, Result};
use crate::linalg::{nearest_rotation, orthonormality_error};

pub const LOG_HEADER: &str = "imu-log,v1";

/// Quaternions further than this from unit norm are rejected.
pub const QUATERNION_NORM_TOLERANCE: f64 = 1e-3;

/// Matrix records further than this from orthonormal are rejected.
pub const ORTHONORMAL_TOLERANCE: f64 = 1e-6;

/// One end-disk orientation sample, expressed in the arm base frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrientationMeasurement {
    pub timestamp: f64,
    pub rotation: Matrix3<f64>,
}

/// Scalar-first quaternion to rotation matrix, re-normalizing the input.
pub fn quaternion_to_rotation(w: f64, x: f64, y: f64, z: f64) -> Matrix3<f64> {
    let q = UnitQuaternion::from_quaternion(Quaternion::new(w, x, y, z));
    q.to_rotation_matrix().into_inner()
}

/// Rotation matrix to a scalar-first quaternion with `w >= 0`.
pub fn rotation_to_quaternion(r: &Matrix3<f64>) -> [f64; 4] {
    let q = UnitQuaternion::from_rotation_matrix(&Rotation3::from_matrix_unchecked(*r));
    let mut c = [q.w, q.i, q.j, q.k];
    if c[0] < 0.0 {
        c.iter_mut().for_each(|v| *v = -*v);
    }
    c
}

fn parse_field(field: &str, line: usize, what: &str) -> Result<f64> {
    let value: f64 = field.trim().parse().map_err(|_| Error::MalformedRow {
        line,
        reason: format!("{what}: cannot parse {field:?} as a number"),
    })?;
    if !value.is_finite() {
        return Err(Error::MalformedRow {
            line,
            reason: format!("{what}: non-finite value"),
        });
    }
    Ok(value)
}

fn parse_row(text: &str, line: usize) -> Result<OrientationMeasurement> {
    let fields: Vec<&str> = text.split(',').collect();
    let rotation = match fields.len() {
        5 => {
            let mut q = [0.0; 4];
            for (k, name) in ["qw", "qx", "qy", "qz"].iter().enumerate() {
                q[k] = parse_field(fields[k + 1], line, name)?;
            }
            let norm = q.iter().map(|v| v * v).sum::<f64>().sqrt();
            if (norm - 1.0).abs() > QUATERNION_NORM_TOLERANCE {
                return Err(Error::MalformedRow {
                    line,
                    reason: format!("quaternion norm {norm} is not within {QUATERNION_NORM_TOLERANCE} of 1"),
                });
            }
            quaternion_to_rotation(q[0], q[1], q[2], q[3])
        }
        10 => {
            let mut m = Matrix3::zeros();
            for k in 0..9 {
                m[(k / 3, k % 3)] = parse_field(fields[k + 1], line, "matrix entry")?;
            }
            let deviation = orthonormality_error(&m);
            match nearest_rotation(&m) {
                Some(r) if deviation <= ORTHONORMAL_TOLERANCE => r,
                _ => {
                    return Err(Error::MalformedRow {
                        line,
                        reason: format!("rotation matrix is not orthonormal (deviation {deviation:e})"),
                    })
                }
            }
        }
        n => {
            return Err(Error::MalformedRow {
                line,
                reason: format!("expected 5 fields (t,qw,qx,qy,qz) or 10 (t + 3x3 matrix), found {n}"),
            })
        }
    };
    Ok(OrientationMeasurement {
        timestamp: parse_field(fields[0], line, "timestamp")?,
        rotation,
    })
}

/// Reads a v1 log. Line numbers in errors are 1-based and count the header.
pub fn parse_imu_log<R: BufRead>(reader: R) -> Result<Vec<OrientationMeasurement>> {
    let mut lines = reader.lines();
    let header = match lines.next() {
        Some(line) => line?,
        None => String::new(),
    };
    if header.trim_end_matches('\r') != LOG_HEADER {
        return Err(Error::UnsupportedVersion { found: header });
    }
    let mut samples: Vec<OrientationMeasurement> = Vec::new();
    for (idx, line) in lines.enumerate() {
        let line_no = idx + 2;
        let line = line?;
        let text = line.trim_end_matches('\r');
        if text.trim().is_empty() {
            continue;
        }
        let sample = parse_row(text, line_no)?;
        if let Some(prev) = samples.last() {
            if sample.timestamp < prev.timestamp {
                return Err(Error::NonMonotonicTimestamps {
                    line: line_no,
                    timestamp: sample.timestamp,
                    previous: prev.timestamp,
                });
            }
        }
        samples.push(sample);
    }
    Ok(samples)
}

pub fn read_imu_log(path: impl AsRef<Path>) -> Result<Vec<OrientationMeasurement>> {
    parse_imu_log(BufReader::new(File::open(path)?))
}

/// Writes quaternion records. Output is a pure function of the samples.
pub fn write_imu_log<W: Write>(mut writer: W, samples: &[OrientationMeasurement]) -> Result<()> {
    writeln!(writer, "{LOG_HEADER}")?;
    for s in samples {
        let [w, x, y, z] = rotation_to_quaternion(&s.rotation);
        writeln!(writer, "{:.6},{w},{x},{y},{z}", s.timestamp)?;
    }
    writer.flush()?;
    Ok(())
}

pub fn save_imu_log(path: impl AsRef<Path>, samples: &[OrientationMeasurement]) -> Result<()> {
    write_imu_log(BufWriter::new(File::create(path)?), samples)
}

/// A sample buffer shared between one producer and any number of readers.
///
/// Readers work on [`ImuStream::snapshot`] copies, so an estimate computed
/// from a snapshot never sees samples appended after it was taken.
#[derive(Debug, Clone, Default)]
pub struct ImuStream {
    samples: Arc<RwLock<Vec<OrientationMeasurement>>>,
}

impl ImuStream {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a sample; rejects timestamps earlier than the last one.
    pub fn push(&self, sample: OrientationMeasurement) -> Result<()> {
        let mut guard = self.samples.write().expect("imu stream lock poisoned");
        if let Some(prev) = guard.last() {
            if sample.timestamp < prev.timestamp {
                return Err(Error::NonMonotonicTimestamps {
                    line: guard.len() + 1,
                    timestamp: sample.timestamp,
                    previous: prev.timestamp,
                });
            }
        }
        guard.push(sample);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.samples.read().expect("imu stream lock poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn snapshot(&self) -> Vec<OrientationMeasurement> {
        self.samples.read().expect("imu stream lock poisoned").clone()
    }
}
