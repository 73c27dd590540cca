//! Rigid-body geometry: rotation composition, source placement on the
//! surrounding sphere, and the pinhole retina projection.
//!
//! Conventions (fixed once, config-visible):
//! - World frame: +x right, +y forward (rest gaze direction), +z up.
//! - `rotation_operator((alpha, beta, gamma))` composes intrinsic rotations in
//!   the order tilt(gamma, about z) * roll(beta, about y) * pitch(alpha, about x).
//! - Angles are degrees at every public interface, radians internally.

use nalgebra::{Matrix3, Vector2, Vector3};

/// Composition order applied by [`rotation_operator`], kept visible so output
/// metadata can record the convention.
pub const ROTATION_ORDER: &str = "tilt(z) * roll(y) * pitch(x)";

/// Proper rotation matrix for `(pitch, roll, tilt)` in degrees.
pub fn rotation_operator(angles: Vector3<f64>) -> Matrix3<f64> {
    let (a, b, g) = (
        angles.x.to_radians(),
        angles.y.to_radians(),
        angles.z.to_radians(),
    );
    let (sa, ca) = a.sin_cos();
    let (sb, cb) = b.sin_cos();
    let (sg, cg) = g.sin_cos();
    #[rustfmt::skip]
    let pitch = Matrix3::new(
        1.0, 0.0, 0.0,
        0.0, ca, -sa,
        0.0, sa, ca,
    );
    #[rustfmt::skip]
    let roll = Matrix3::new(
        cb, 0.0, sb,
        0.0, 1.0, 0.0,
        -sb, 0.0, cb,
    );
    #[rustfmt::skip]
    let tilt = Matrix3::new(
        cg, -sg, 0.0,
        sg, cg, 0.0,
        0.0, 0.0, 1.0,
    );
    tilt * roll * pitch
}

/// World position of a source at azimuth `theta`, elevation `phi` (degrees)
/// on the sphere of the given radius. `(0, 0)` maps to the forward +y
/// direction; `phi = 90` maps to the +z pole for any azimuth.
pub fn source_world_position(theta_deg: f64, phi_deg: f64, radius: f64) -> Vector3<f64> {
    let theta = theta_deg.to_radians();
    let phi = phi_deg.to_radians();
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    Vector3::new(radius * cp * st, radius * cp * ct, radius * sp)
}

/// Inverse of [`source_world_position`] up to periodicity: angles in degrees
/// for a direction vector (need not be normalized).
pub fn direction_to_angles(dir: &Vector3<f64>) -> (f64, f64) {
    let r = dir.norm();
    let phi = (dir.z / r).asin();
    let theta = dir.x.atan2(dir.y);
    (theta.to_degrees(), phi.to_degrees())
}

/// Pose of one eye: pinhole position and world-from-eye orientation.
/// The optical axis is the eye frame's +y; the retina lies `focal` behind
/// the pinhole with its axes along the eye frame's x and z.
#[derive(Debug, Clone, Copy)]
pub struct EyePose {
    pub position: Vector3<f64>,
    pub orientation: Matrix3<f64>,
}

impl EyePose {
    /// Pinhole projection of a world point onto the retina, in retina
    /// coordinates (cm). `None` when the point is at nonpositive depth
    /// (behind or in the lens plane).
    pub fn project(&self, source: &Vector3<f64>, focal: f64) -> Option<Vector2<f64>> {
        let v = self.orientation.transpose() * (source - self.position);
        let depth = v.y;
        if depth <= 0.0 {
            return None;
        }
        // Image inversion through the pinhole.
        Some(Vector2::new(-v.x * focal / depth, -v.z * focal / depth))
    }
}
