//! Active unstretching of the exploration: iteratively reshape the command
//! set so the sensory singular values equalize, under a fixed maximum
//! movement amplitude.
//!
//! Commands are held as a dof x N matrix of configuration offsets from the
//! working point, restricted to the exploration mode's free parameters.
//! One step: sense, normalize by max absolute values, SVD the sensory data,
//! express the sensory-relevant right-singular directions in command space,
//! remove sensorially-silent command components, amplify each direction by
//! `min(ln(S1/Sj) + 1, L)`, rebuild the commands and restore the original
//! maximum amplitude.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::estimators::{estimate_dim_linear, SingularSpectrum};
use crate::sim::{Configuration, ExplorationMode, SimError, System};
use crate::variation::raw_variations;

/// Relative singular-value threshold for pseudoinverses.
pub const PINV_RELATIVE_EPS: f64 = 1e-12;

/// Condition number above which a step records a rank-deficiency warning.
pub const CONDITION_WARN: f64 = 1e12;

#[derive(Debug, Error)]
pub enum BootstrapError {
    #[error("insufficient exploration: need more movements than degrees of freedom ({dof}), got {n}")]
    InsufficientExploration { n: usize, dof: usize },
    #[error("degenerate exploration: commands produce no sensory variation")]
    DegenerateSensory,
    #[error("invalid bootstrap parameters: {0}")]
    InvalidParams(&'static str),
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// Strategy for integrating the unstretching into an exploration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BootstrapStrategy {
    /// Bootstrap at infinitesimal amplitude, then amplify the final command
    /// set to the target amplitude.
    Infinitesimal,
    /// Bootstrap directly at the target amplitude.
    Finite,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BootstrapParams {
    /// Number of bootstrap iterations B.
    pub iterations: usize,
    /// Clamp L on the amplification coefficients.
    pub clamp: f64,
    /// Singular values of the silent-command matrix above this are treated
    /// as significative (applies to max-normalized matrices).
    pub significance_threshold: f64,
    pub strategy: BootstrapStrategy,
    /// Amplitude used by the infinitesimal strategy, degrees.
    pub infinitesimal_amplitude: f64,
    /// Amplitude of the final exploration, degrees.
    pub target_amplitude: f64,
}

impl BootstrapParams {
    pub fn new(strategy: BootstrapStrategy, target_amplitude: f64) -> Self {
        Self {
            iterations: 10,
            clamp: 10.0,
            significance_threshold: 1.0,
            strategy,
            infinitesimal_amplitude: 1e-6,
            target_amplitude,
        }
    }

    fn validate(&self) -> Result<(), BootstrapError> {
        if self.iterations < 1 {
            return Err(BootstrapError::InvalidParams("iterations must be >= 1"));
        }
        if self.clamp < 1.0 {
            return Err(BootstrapError::InvalidParams("clamp must be >= 1"));
        }
        if self.significance_threshold <= 0.0 {
            return Err(BootstrapError::InvalidParams(
                "significance_threshold must be > 0",
            ));
        }
        if self.target_amplitude <= 0.0 || self.infinitesimal_amplitude <= 0.0 {
            return Err(BootstrapError::InvalidParams("amplitudes must be > 0"));
        }
        Ok(())
    }
}

/// Per-iteration record of what a bootstrap step saw and applied.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BootstrapIteration {
    /// Singular values of the normalized sensory data, decreasing.
    pub spectrum: Vec<f64>,
    /// Amplification coefficients applied, one per spectrum entry.
    pub gamma: Vec<f64>,
    /// Maximum absolute command value before normalization, degrees.
    pub cmax: f64,
    /// Spread of the significative singular values, S1 / S_k.
    pub spread: f64,
    /// Number of significative singular values k used for the spread.
    pub significative: usize,
    /// Set when the command-basis pseudoinverse was ill-conditioned.
    pub pinv_warning: bool,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct BootstrapTrace {
    pub iterations: Vec<BootstrapIteration>,
}

impl BootstrapTrace {
    /// CSV rows: iteration, cmax, spread, sigma_1..sigma_m.
    pub fn write_csv<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        let m = self.iterations.first().map_or(0, |it| it.spectrum.len());
        write!(out, "iteration,cmax,spread")?;
        for j in 1..=m {
            write!(out, ",sigma_{j}")?;
        }
        writeln!(out)?;
        for (b, it) in self.iterations.iter().enumerate() {
            write!(out, "{},{},{}", b + 1, it.cmax, it.spread)?;
            for s in &it.spectrum {
                write!(out, ",{s}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Amplification coefficients `min(ln(S1/Sj) + 1, L)`; a zero singular value
/// ratio is treated as infinite, i.e. clamped.
pub fn gamma_coefficients(spectrum: &[f64], clamp: f64) -> Vec<f64> {
    let s1 = spectrum.first().copied().unwrap_or(0.0);
    spectrum
        .iter()
        .map(|&sj| {
            if sj <= 0.0 {
                clamp
            } else {
                ((s1 / sj).ln() + 1.0).min(clamp)
            }
        })
        .collect()
}

/// Builds full configurations from free-parameter offsets (dof x N).
pub fn offsets_to_configs(
    system: &System,
    mode: ExplorationMode,
    offsets: &DMatrix<f64>,
) -> Vec<Configuration> {
    let free = mode.free_indices(system.spec.n_sources);
    let c0 = &system.reference_config;
    (0..offsets.ncols())
        .map(|i| {
            let mut config = c0.clone();
            for (d, &idx) in free.iter().enumerate() {
                config.angles[idx] = c0.angles[idx] + offsets[(d, i)];
            }
            config
        })
        .collect()
}

/// Extracts the free-parameter offsets of sampled configurations (dof x N).
pub fn configs_to_offsets(
    system: &System,
    mode: ExplorationMode,
    configs: &[Configuration],
) -> DMatrix<f64> {
    let free = mode.free_indices(system.spec.n_sources);
    let c0 = &system.reference_config;
    DMatrix::from_fn(free.len(), configs.len(), |d, i| {
        configs[i].angles[free[d]] - c0.angles[free[d]]
    })
}

/// Moore-Penrose pseudoinverse with a relative singular-value cutoff.
/// Returns the inverse and the condition number of the kept part.
fn pseudo_inverse(m: &DMatrix<f64>) -> (DMatrix<f64>, f64) {
    let svd = m.clone().svd(true, true);
    let u = svd.u.as_ref().expect("svd with u");
    let v_t = svd.v_t.as_ref().expect("svd with v_t");
    let smax = svd.singular_values.max();
    let cutoff = smax * PINV_RELATIVE_EPS;
    let mut smin_kept = f64::INFINITY;
    let inv_sigma: Vec<f64> = svd
        .singular_values
        .iter()
        .map(|&s| {
            if s > cutoff {
                smin_kept = smin_kept.min(s);
                1.0 / s
            } else {
                0.0
            }
        })
        .collect();
    let k = inv_sigma.len();
    let mut scaled = DMatrix::zeros(v_t.nrows(), v_t.ncols());
    for r in 0..k.min(v_t.nrows()) {
        for c in 0..v_t.ncols() {
            scaled[(r, c)] = v_t[(r, c)] * inv_sigma[r];
        }
    }
    let cond = if smin_kept.is_finite() && smin_kept > 0.0 {
        smax / smin_kept
    } else {
        f64::INFINITY
    };
    (scaled.transpose() * u.transpose(), cond)
}

/// One unstretching iteration on a dof x N command-offset matrix.
///
/// Sensory data is column-centered before the SVD; command and sensory
/// matrices are scaled by their maximum absolute values so the significance
/// threshold applies to normalized quantities; the output is rescaled so the
/// maximum absolute command amplitude is exactly what it was on entry.
pub fn bootstrap_step(
    system: &System,
    mode: ExplorationMode,
    commands: &DMatrix<f64>,
    params: &BootstrapParams,
) -> Result<(DMatrix<f64>, BootstrapIteration), BootstrapError> {
    params.validate()?;
    let dof = mode.dof(system.spec.n_sources);
    let n_moves = commands.ncols();
    if n_moves <= dof {
        return Err(BootstrapError::InsufficientExploration { n: n_moves, dof });
    }
    debug_assert_eq!(commands.nrows(), dof);

    // (1) sense
    let configs = offsets_to_configs(system, mode, commands);
    let mut sensory = raw_variations(system, &configs)?;
    // Column-mean centering ahead of the SVD, applied to both matrices:
    // centering only the sensory side would leave the command mean as a
    // rank-1 component orthogonal to every sensory direction, which the
    // silent-command detection then mistakes for a real silent axis.
    let mut centered = commands.clone();
    for m in [&mut sensory, &mut centered] {
        for r in 0..m.nrows() {
            let mean = m.row(r).sum() / n_moves as f64;
            for c in 0..n_moves {
                m[(r, c)] -= mean;
            }
        }
    }

    // (2) normalize by maxima; the amplitude to restore on exit is that of
    // the commands as given.
    let cmax = commands.amax();
    let smax = sensory.amax();
    if smax == 0.0 || cmax == 0.0 {
        return Err(BootstrapError::DegenerateSensory);
    }
    let commands_n = centered / cmax;
    let sensory_n = sensory / smax;

    // (3) SVD of the sensory data. The variability of S is explained by its
    // significative singular directions; the trailing values sit at the
    // numerical noise floor of the sensed variations and carry no command
    // information, so the basis is truncated at the ratio-rule boundary.
    // Keeping the noise block would feed near-null columns into the
    // pseudoinverse below and hand every noise slot the clamped
    // amplification, which measurably destroys the weakest real direction
    // within a few iterations.
    let svd = sensory_n.clone().svd(false, true);
    let full_v_t = svd.v_t.as_ref().expect("svd with v_t"); // min x N
    let mut spectrum: Vec<f64> = svd.singular_values.iter().copied().collect();
    spectrum.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let significative = estimate_dim_linear(&SingularSpectrum::new(spectrum.clone()))
        .map_err(|_| BootstrapError::DegenerateSensory)?
        .value;
    let v1_t = full_v_t.rows(0, significative).into_owned(); // k x N

    // (4) sensory-relevant directions in command space
    let relevant = &commands_n * v1_t.transpose(); // dof x k

    // (5) the remaining right singular vectors span the exploration's
    // sensorially-silent combinations. Their command-space expression
    // C * V2 shares nonzero singular values and left singular vectors with
    // C - (C * V1) * V1^T, which avoids materializing the N x N basis.
    let silent_span = &commands_n - &relevant * &v1_t; // dof x N

    // (6) significative silent directions
    let silent_svd = silent_span.svd(true, false);
    let silent_u = silent_svd.u.as_ref().expect("svd with u");
    let silent_cols: Vec<usize> = silent_svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > params.significance_threshold)
        .map(|(i, _)| i)
        .collect();

    // (7) remove them from the relevant directions
    let mut relevant = relevant;
    if !silent_cols.is_empty() {
        let u_silent = silent_u.select_columns(silent_cols.iter());
        // Orthonormal columns: the pseudoinverse is the transpose.
        relevant -= &u_silent * (u_silent.transpose() * &relevant);
    }

    // (8) commands expressed in the relevant basis
    let (relevant_pinv, cond) = pseudo_inverse(&relevant);
    let pinv_warning = cond > CONDITION_WARN;
    let mut reshaped = relevant_pinv * &commands_n; // min x N

    // (9) amplify weak directions
    let gamma = gamma_coefficients(&spectrum[..significative], params.clamp);
    for (j, &g) in gamma.iter().enumerate() {
        for c in 0..reshaped.ncols() {
            reshaped[(j, c)] *= g;
        }
    }

    // (10) back to the configuration basis
    let rebuilt = &relevant * reshaped; // dof x N

    // (11) restore the entry amplitude exactly
    let new_max = rebuilt.amax();
    if new_max == 0.0 {
        return Err(BootstrapError::DegenerateSensory);
    }
    let out = rebuilt * (cmax / new_max);

    let spread = spectrum[0] / spectrum[significative - 1].max(f64::MIN_POSITIVE);
    let record = BootstrapIteration {
        spectrum,
        gamma,
        cmax,
        spread,
        significative,
        pinv_warning,
    };
    Ok((out, record))
}

/// Runs a full bootstrap and returns the final command offsets (scaled to
/// the target amplitude) together with the per-iteration trace.
pub fn run_bootstrap(
    system: &System,
    mode: ExplorationMode,
    params: &BootstrapParams,
    n_moves: usize,
    seed: u64,
) -> Result<(DMatrix<f64>, BootstrapTrace), BootstrapError> {
    params.validate()?;
    let start_amplitude = match params.strategy {
        BootstrapStrategy::Infinitesimal => params.infinitesimal_amplitude,
        BootstrapStrategy::Finite => params.target_amplitude,
    };
    let configs =
        crate::sim::sample_configurations(system, mode, start_amplitude, n_moves, seed);
    let mut commands = configs_to_offsets(system, mode, &configs);

    let mut trace = BootstrapTrace::default();
    for _ in 0..params.iterations {
        let (next, record) = bootstrap_step(system, mode, &commands, params)?;
        commands = next;
        trace.iterations.push(record);
    }

    // The final exploration runs at the target amplitude for both
    // strategies; for the infinitesimal one this is the amplification of
    // the converged command set.
    let max = commands.amax();
    if max == 0.0 {
        return Err(BootstrapError::DegenerateSensory);
    }
    commands *= params.target_amplitude / max;
    Ok((commands, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{build_system, sample_configurations, SystemSpec};
    use crate::variation::{center_and_reduce, explore};

    fn system(seed: u64) -> System {
        build_system(SystemSpec {
            seed,
            ..SystemSpec::default()
        })
        .unwrap()
    }

    #[test]
    fn gamma_of_flat_spectrum_is_identity() {
        let g = gamma_coefficients(&[2.5, 2.5, 2.5], 10.0);
        assert_eq!(g, vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn gamma_matches_log_ratio() {
        let e2 = std::f64::consts::E.powi(2);
        let g = gamma_coefficients(&[e2, 1.0], 10.0);
        assert!((g[1] - 3.0).abs() < 1e-12);
        assert_eq!(g[0], 1.0);
    }

    #[test]
    fn gamma_clamps_extreme_ratios() {
        let e20 = std::f64::consts::E.powi(20);
        let g = gamma_coefficients(&[e20, 1.0, 0.0], 10.0);
        assert_eq!(g[1], 10.0);
        assert_eq!(g[2], 10.0);
    }

    #[test]
    fn too_few_movements_is_an_error() {
        let sys = system(1);
        let params = BootstrapParams::new(BootstrapStrategy::Finite, 1e-3);
        let commands = DMatrix::zeros(9, 9);
        assert!(matches!(
            bootstrap_step(&sys, ExplorationMode::AgentOnly, &commands, &params),
            Err(BootstrapError::InsufficientExploration { .. })
        ));
    }

    #[test]
    fn step_preserves_maximum_amplitude() {
        let sys = system(2);
        let mode = ExplorationMode::AgentOnly;
        let configs = sample_configurations(&sys, mode, 1e-4, 120, 7);
        let mut commands = configs_to_offsets(&sys, mode, &configs);
        let params = BootstrapParams::new(BootstrapStrategy::Finite, 1e-4);
        for _ in 0..3 {
            let before = commands.amax();
            let (next, record) = bootstrap_step(&sys, mode, &commands, &params).unwrap();
            let after = next.amax();
            assert!(
                ((after - before) / before).abs() < 1e-12,
                "amplitude drifted: {before} -> {after}"
            );
            assert_eq!(record.cmax, before);
            commands = next;
        }
    }

    #[test]
    fn gamma_bounds_hold_on_real_steps() {
        let sys = system(3);
        let mode = ExplorationMode::AgentOnly;
        let configs = sample_configurations(&sys, mode, 1e-6, 150, 11);
        let commands = configs_to_offsets(&sys, mode, &configs);
        let params = BootstrapParams::new(BootstrapStrategy::Infinitesimal, 1e-2);
        let (_, record) = bootstrap_step(&sys, mode, &commands, &params).unwrap();
        assert_eq!(record.gamma[0], 1.0);
        assert!(record
            .gamma
            .iter()
            .all(|&g| (1.0..=params.clamp).contains(&g)));
    }

    #[test]
    fn final_commands_hit_target_amplitude() {
        let sys = system(4);
        for strategy in [BootstrapStrategy::Infinitesimal, BootstrapStrategy::Finite] {
            let params = BootstrapParams {
                iterations: 2,
                ..BootstrapParams::new(strategy, 1e-3)
            };
            let (commands, trace) =
                run_bootstrap(&sys, ExplorationMode::AgentOnly, &params, 100, 5).unwrap();
            let max = commands.amax();
            assert!(((max - 1e-3) / 1e-3).abs() < 1e-12, "max {max}");
            assert_eq!(trace.iterations.len(), 2);
        }
    }

    #[test]
    fn spread_shrinks_over_infinitesimal_iterations() {
        let sys = system(6);
        let mode = ExplorationMode::AgentOnly;
        let params = BootstrapParams::new(BootstrapStrategy::Infinitesimal, 1e-6);
        let (_, trace) = run_bootstrap(&sys, mode, &params, 250, 13).unwrap();
        let spread = |it: &BootstrapIteration| it.spectrum[0] / it.spectrum[8];
        let first = spread(&trace.iterations[0]);
        let last = spread(&trace.iterations[9]);
        assert!(
            last < first,
            "spread must shrink over iterations: {first} -> {last}"
        );
    }

    #[test]
    fn bootstrap_keeps_linear_dimension() {
        let sys = system(7);
        let mode = ExplorationMode::AgentOnly;
        let configs = sample_configurations(&sys, mode, 1e-6, 600, 21);
        let plain = explore(&sys, &configs, mode, 1e-6).unwrap();
        let plain_dim = estimate_dim_linear(&crate::estimators::singular_spectrum(&plain))
            .unwrap()
            .value;

        let params = BootstrapParams::new(BootstrapStrategy::Infinitesimal, 1e-6);
        let (commands, _) = run_bootstrap(&sys, mode, &params, 600, 21).unwrap();
        let boot_configs = offsets_to_configs(&sys, mode, &commands);
        let mut boot_raw = raw_variations(&sys, &boot_configs).unwrap();
        center_and_reduce(&mut boot_raw);
        let boot_dim = estimate_dim_linear(&crate::estimators::spectrum_of(&boot_raw))
            .unwrap()
            .value;
        assert_eq!(plain_dim, 9);
        assert_eq!(boot_dim, 9);
    }
}
