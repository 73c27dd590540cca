//! The agent/environment system: a two-eyed head surrounded by punctual
//! light sources on a sphere, sensed through cone excitations.
//!
//! The agent has 9 rotational degrees of freedom (head + both eyes, three
//! angles each); each source contributes an azimuth and an elevation. All
//! angles are degrees. The system is immutable after construction and every
//! operation is a pure function of its inputs, so trials can share one
//! `System` across workers.

use nalgebra::{Vector2, Vector3};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{direction_to_angles, rotation_operator, source_world_position, EyePose};
use crate::rng::{stream_rng, Stream};

/// Angular parameters of the agent alone.
pub const AGENT_DOF: usize = 9;

/// Half-angle (degrees) of the forward cone the reference sources are drawn
/// in, so every source projects onto both retinas at rest.
pub const REFERENCE_SOURCE_CAP_DEG: f64 = 30.0;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid system spec: field `{field}` {reason}")]
    InvalidSpec {
        field: &'static str,
        reason: &'static str,
    },
    #[error("configuration length {got} does not match system (expected {expected})")]
    DimensionMismatch { got: usize, expected: usize },
    #[error("empty configuration set")]
    EmptyConfigurations,
}

/// Immutable world description used to build a [`System`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SystemSpec {
    pub n_sources: usize,
    pub cones_per_eye: usize,
    /// Cone sensitivity `a` in the excitation law.
    pub cone_sensitivity: f64,
    /// Radius of the source sphere, cm.
    pub sphere_radius: f64,
    /// Pinhole positions of the left and right eye at rest, cm.
    pub eye_offsets: [Vector3<f64>; 2],
    /// Distance from pinhole to retina plane, cm.
    pub retina_focal: f64,
    /// Cones are drawn uniformly in `[-w, w]^2` on the retina, cm.
    pub cone_box_halfwidth: f64,
    pub seed: u64,
}

impl Default for SystemSpec {
    fn default() -> Self {
        Self {
            n_sources: 3,
            cones_per_eye: 20,
            cone_sensitivity: 1e-3,
            sphere_radius: 100.0,
            eye_offsets: [Vector3::new(-5.0, 5.0, 5.0), Vector3::new(5.0, 5.0, 5.0)],
            retina_focal: 1.0,
            cone_box_halfwidth: 1.0,
            seed: 0,
        }
    }
}

impl SystemSpec {
    pub fn validate(&self) -> Result<(), SimError> {
        fn positive(field: &'static str, v: f64) -> Result<(), SimError> {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(SimError::InvalidSpec {
                    field,
                    reason: "must be positive and finite",
                })
            }
        }
        if self.n_sources < 1 {
            return Err(SimError::InvalidSpec {
                field: "n_sources",
                reason: "must be >= 1",
            });
        }
        if self.cones_per_eye < 1 {
            return Err(SimError::InvalidSpec {
                field: "cones_per_eye",
                reason: "must be >= 1",
            });
        }
        positive("cone_sensitivity", self.cone_sensitivity)?;
        positive("sphere_radius", self.sphere_radius)?;
        positive("retina_focal", self.retina_focal)?;
        positive("cone_box_halfwidth", self.cone_box_halfwidth)?;
        Ok(())
    }

    /// Sensory dimension n = total cone count over both eyes.
    pub fn sensory_dim(&self) -> usize {
        2 * self.cones_per_eye
    }

    /// Configuration length = 9 agent angles + 2 per source.
    pub fn config_len(&self) -> usize {
        AGENT_DOF + 2 * self.n_sources
    }
}

/// One point of the joint motor/environment configuration space.
///
/// Layout: `(r_h, r_l, r_r, theta_1..theta_Ns, phi_1..phi_Ns)`, degrees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Configuration {
    pub angles: Vec<f64>,
}

impl Configuration {
    pub fn zeros(n_sources: usize) -> Self {
        Self {
            angles: vec![0.0; AGENT_DOF + 2 * n_sources],
        }
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    pub fn head_rotation(&self) -> Vector3<f64> {
        Vector3::new(self.angles[0], self.angles[1], self.angles[2])
    }

    pub fn left_eye_rotation(&self) -> Vector3<f64> {
        Vector3::new(self.angles[3], self.angles[4], self.angles[5])
    }

    pub fn right_eye_rotation(&self) -> Vector3<f64> {
        Vector3::new(self.angles[6], self.angles[7], self.angles[8])
    }

    pub fn source_azimuth(&self, k: usize, n_sources: usize) -> f64 {
        debug_assert!(k < n_sources);
        self.angles[AGENT_DOF + k]
    }

    pub fn source_elevation(&self, k: usize, n_sources: usize) -> f64 {
        debug_assert!(k < n_sources);
        self.angles[AGENT_DOF + n_sources + k]
    }
}

/// Which part of the configuration is allowed to move during an exploration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ExplorationMode {
    /// Only the 9 agent angles move; sources stay at the working point.
    #[serde(rename = "agent")]
    AgentOnly,
    /// Only the source angles move; the agent stays at the working point.
    #[serde(rename = "env")]
    EnvironmentOnly,
    /// Everything moves.
    #[serde(rename = "both")]
    Both,
}

impl std::str::FromStr for ExplorationMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "agent" => Ok(ExplorationMode::AgentOnly),
            "env" => Ok(ExplorationMode::EnvironmentOnly),
            "both" => Ok(ExplorationMode::Both),
            other => Err(format!(
                "unknown exploration mode `{other}` (expected agent, env or both)"
            )),
        }
    }
}

impl ExplorationMode {
    pub const ALL: [ExplorationMode; 3] = [
        ExplorationMode::AgentOnly,
        ExplorationMode::EnvironmentOnly,
        ExplorationMode::Both,
    ];

    /// Indices of the configuration entries free to move in this mode.
    pub fn free_indices(self, n_sources: usize) -> Vec<usize> {
        match self {
            ExplorationMode::AgentOnly => (0..AGENT_DOF).collect(),
            ExplorationMode::EnvironmentOnly => (AGENT_DOF..AGENT_DOF + 2 * n_sources).collect(),
            ExplorationMode::Both => (0..AGENT_DOF + 2 * n_sources).collect(),
        }
    }

    /// Number of degrees of freedom exercised by this mode.
    pub fn dof(self, n_sources: usize) -> usize {
        match self {
            ExplorationMode::AgentOnly => AGENT_DOF,
            ExplorationMode::EnvironmentOnly => 2 * n_sources,
            ExplorationMode::Both => AGENT_DOF + 2 * n_sources,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ExplorationMode::AgentOnly => "agent",
            ExplorationMode::EnvironmentOnly => "env",
            ExplorationMode::Both => "both",
        }
    }
}

/// Cone excitations of both retinas; left eye first, then right.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensoryVector {
    pub values: Vec<f64>,
}

/// The realized world: spec, frozen cone layout and working point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct System {
    pub spec: SystemSpec,
    /// Cone positions per eye, retina coordinates in cm.
    pub cone_positions: [Vec<Vector2<f64>>; 2],
    /// Working point C0 the explorations are sampled around.
    pub reference_config: Configuration,
}

/// Realizes a spec: draws the cone layouts and the working point.
///
/// Cones are i.i.d. uniform over the retina square. Reference source
/// directions are uniform over the forward spherical cap of half-angle
/// [`REFERENCE_SOURCE_CAP_DEG`], so at rest every source projects onto both
/// retinas. Fully deterministic given `spec.seed`.
pub fn build_system(spec: SystemSpec) -> Result<System, SimError> {
    spec.validate()?;
    let w = spec.cone_box_halfwidth;
    let mut cone_rng = stream_rng(spec.seed, Stream::Cones);
    let mut cone_positions = [Vec::new(), Vec::new()];
    for eye in &mut cone_positions {
        eye.reserve(spec.cones_per_eye);
        for _ in 0..spec.cones_per_eye {
            let x = cone_rng.random_range(-w..=w);
            let y = cone_rng.random_range(-w..=w);
            eye.push(Vector2::new(x, y));
        }
    }

    let mut reference_config = Configuration::zeros(spec.n_sources);
    let mut src_rng = stream_rng(spec.seed, Stream::ReferenceSources);
    let cap_cos = REFERENCE_SOURCE_CAP_DEG.to_radians().cos();
    for k in 0..spec.n_sources {
        // Uniform over the cap around +y: cosine uniform in [cos(cap), 1].
        let mu: f64 = src_rng.random_range(cap_cos..=1.0);
        let psi: f64 = src_rng.random_range(0.0..std::f64::consts::TAU);
        let s = (1.0 - mu * mu).sqrt();
        let dir = Vector3::new(s * psi.cos(), mu, s * psi.sin());
        let (theta, phi) = direction_to_angles(&dir);
        reference_config.angles[AGENT_DOF + k] = theta;
        reference_config.angles[AGENT_DOF + spec.n_sources + k] = phi;
    }

    Ok(System {
        spec,
        cone_positions,
        reference_config,
    })
}

impl System {
    pub fn sensory_dim(&self) -> usize {
        self.spec.sensory_dim()
    }

    /// Eye poses (pinhole position + orientation) for a configuration.
    /// The head rotates about the world origin; eye rotations compose
    /// intrinsically with the head rotation.
    pub fn eye_poses(&self, config: &Configuration) -> [EyePose; 2] {
        let head = rotation_operator(config.head_rotation());
        let eyes = [
            rotation_operator(config.left_eye_rotation()),
            rotation_operator(config.right_eye_rotation()),
        ];
        [0, 1].map(|i| EyePose {
            position: head * self.spec.eye_offsets[i],
            orientation: head * eyes[i],
        })
    }

    /// World positions of all sources for a configuration.
    pub fn source_positions(&self, config: &Configuration) -> Vec<Vector3<f64>> {
        let ns = self.spec.n_sources;
        (0..ns)
            .map(|k| {
                source_world_position(
                    config.source_azimuth(k, ns),
                    config.source_elevation(k, ns),
                    self.spec.sphere_radius,
                )
            })
            .collect()
    }
}

/// Cone excitations for a configuration.
///
/// Each cone of each eye accumulates, over the sources that project onto
/// that retina, `a * exp(-|cone - proj|^2) / |eye - source|^2` with all
/// distances in cm. Sources behind the lens plane contribute nothing.
pub fn sense(system: &System, config: &Configuration) -> Result<SensoryVector, SimError> {
    let expected = system.spec.config_len();
    if config.len() != expected {
        return Err(SimError::DimensionMismatch {
            got: config.len(),
            expected,
        });
    }
    let poses = system.eye_poses(config);
    let sources = system.source_positions(config);
    let a = system.spec.cone_sensitivity;
    let focal = system.spec.retina_focal;

    let mut values = Vec::with_capacity(system.sensory_dim());
    for (eye, pose) in poses.iter().enumerate() {
        // Projection and squared eye-source distance per source.
        let projected: Vec<(Vector2<f64>, f64)> = sources
            .iter()
            .filter_map(|s| {
                let d2 = (s - pose.position).norm_squared();
                pose.project(s, focal).map(|p| (p, d2))
            })
            .collect();
        for cone in &system.cone_positions[eye] {
            let mut excitation = 0.0;
            for (proj, d2) in &projected {
                excitation += a * (-(cone - proj).norm_squared()).exp() / d2;
            }
            values.push(excitation);
        }
    }
    Ok(SensoryVector { values })
}

/// Draws `n` configurations around the working point: every free parameter
/// (per `mode`) gets an i.i.d. uniform offset in `[-amplitude, +amplitude]`
/// degrees; frozen parameters are bit-equal to the working point's.
pub fn sample_configurations(
    system: &System,
    mode: ExplorationMode,
    amplitude: f64,
    n: usize,
    seed: u64,
) -> Vec<Configuration> {
    let free = mode.free_indices(system.spec.n_sources);
    let mut rng = stream_rng(seed, Stream::Sampling);
    let c0 = &system.reference_config;
    (0..n)
        .map(|_| {
            let mut config = c0.clone();
            for &idx in &free {
                config.angles[idx] += rng.random_range(-amplitude..=amplitude);
            }
            config
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_spec() -> SystemSpec {
        SystemSpec {
            n_sources: 3,
            cones_per_eye: 20,
            seed: 11,
            ..SystemSpec::default()
        }
    }

    #[test]
    fn paper_scale_dimensions() {
        let system = build_system(small_spec()).unwrap();
        assert_eq!(system.sensory_dim(), 40);
        assert_eq!(system.reference_config.len(), 15);
    }

    #[test]
    fn single_cone_single_source_counts() {
        let spec = SystemSpec {
            n_sources: 1,
            cones_per_eye: 1,
            seed: 5,
            ..SystemSpec::default()
        };
        let system = build_system(spec).unwrap();
        assert_eq!(system.sensory_dim(), 2);
        assert_eq!(system.reference_config.len(), 11);
    }

    #[test]
    fn same_seed_is_bit_identical() {
        let a = build_system(small_spec()).unwrap();
        let b = build_system(small_spec()).unwrap();
        for eye in 0..2 {
            for (ca, cb) in a.cone_positions[eye].iter().zip(&b.cone_positions[eye]) {
                assert_eq!(ca.x.to_bits(), cb.x.to_bits());
                assert_eq!(ca.y.to_bits(), cb.y.to_bits());
            }
        }
        for (x, y) in a
            .reference_config
            .angles
            .iter()
            .zip(&b.reference_config.angles)
        {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn cones_stay_in_retina_square() {
        let system = build_system(small_spec()).unwrap();
        let w = system.spec.cone_box_halfwidth;
        for eye in &system.cone_positions {
            assert_eq!(eye.len(), 20);
            for c in eye {
                assert!(c.x.abs() <= w && c.y.abs() <= w);
            }
        }
    }

    #[test]
    fn invalid_spec_names_field() {
        let spec = SystemSpec {
            sphere_radius: -1.0,
            ..small_spec()
        };
        let err = build_system(spec).unwrap_err();
        assert!(err.to_string().contains("sphere_radius"));
    }

    #[test]
    fn reference_sources_visible_from_both_eyes() {
        for seed in 0..20 {
            let system = build_system(SystemSpec {
                seed,
                ..small_spec()
            })
            .unwrap();
            let poses = system.eye_poses(&system.reference_config);
            for s in system.source_positions(&system.reference_config) {
                for pose in &poses {
                    let p = pose.project(&s, system.spec.retina_focal).unwrap();
                    // Projections stay well inside the Gaussian's useful range.
                    assert!(p.norm() < 2.0, "projection {p:?} too far off-retina");
                }
            }
        }
    }

    #[test]
    fn sensing_rejects_wrong_length() {
        let system = build_system(small_spec()).unwrap();
        let bad = Configuration::zeros(2);
        assert!(matches!(
            sense(&system, &bad),
            Err(SimError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn excitations_are_nonnegative() {
        let system = build_system(small_spec()).unwrap();
        let configs = sample_configurations(&system, ExplorationMode::Both, 10.0, 50, 3);
        for c in &configs {
            let s = sense(&system, c).unwrap();
            assert!(s.values.iter().all(|&v| v >= 0.0));
        }
    }

    #[test]
    fn exact_excitation_when_projection_hits_cone() {
        // One source straight ahead, one cone placed exactly on its
        // projection, eye at the origin: s = a * exp(0) / dist^2.
        let spec = SystemSpec {
            n_sources: 1,
            cones_per_eye: 1,
            eye_offsets: [Vector3::zeros(), Vector3::zeros()],
            seed: 0,
            ..SystemSpec::default()
        };
        let mut system = build_system(spec).unwrap();
        system.reference_config.angles[AGENT_DOF] = 0.0; // theta
        system.reference_config.angles[AGENT_DOF + 1] = 0.0; // phi
        system.cone_positions[0][0] = Vector2::zeros();
        system.cone_positions[1][0] = Vector2::zeros();
        let s = sense(&system, &system.reference_config).unwrap();
        let expected = 1e-3 / (100.0 * 100.0);
        assert!((s.values[0] - expected).abs() < 1e-18);
    }

    #[test]
    fn frozen_parameters_are_bit_exact() {
        let system = build_system(small_spec()).unwrap();
        let c0 = &system.reference_config;
        let agent = sample_configurations(&system, ExplorationMode::AgentOnly, 1.0, 20, 9);
        for c in &agent {
            for idx in AGENT_DOF..c.len() {
                assert_eq!(c.angles[idx].to_bits(), c0.angles[idx].to_bits());
            }
        }
        let env = sample_configurations(&system, ExplorationMode::EnvironmentOnly, 1.0, 20, 9);
        for c in &env {
            for idx in 0..AGENT_DOF {
                assert_eq!(c.angles[idx].to_bits(), c0.angles[idx].to_bits());
            }
        }
    }

    #[test]
    fn sampling_respects_amplitude_bound() {
        let system = build_system(small_spec()).unwrap();
        let amp = 1e-6;
        let configs = sample_configurations(&system, ExplorationMode::Both, amp, 100, 4);
        let c0 = &system.reference_config;
        for c in &configs {
            for (v, v0) in c.angles.iter().zip(&c0.angles) {
                assert!((v - v0).abs() <= amp);
            }
        }
        assert_eq!(
            sample_configurations(&system, ExplorationMode::Both, 1.0, 1000, 5).len(),
            1000
        );
    }
}
