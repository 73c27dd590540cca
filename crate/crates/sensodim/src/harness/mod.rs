//! Experiment orchestration: amplitude sweeps of Monte-Carlo trials over
//! the four estimation methods, with per-cell reproducible seeding.
//!
//! Every trial cell `(amplitude, mode, method, trial)` derives its seeds
//! from the master seed and the cell coordinates alone, so a single cell
//! recomputed in isolation matches the same cell inside a full sweep, and
//! serial and parallel execution produce identical record sets.

pub mod plot;
pub mod summary;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bootstrap::{
    offsets_to_configs, run_bootstrap, BootstrapParams, BootstrapStrategy,
};
use crate::cca::{estimate_dim_cca, CcaParams};
use crate::estimators::{
    estimate_dim_linear, singular_spectrum, EstimateDiagnostics, Method,
};
use crate::rng::{derive_seed, derive_seed_labeled};
use crate::sim::{build_system, sample_configurations, ExplorationMode, SystemSpec};
use crate::variation::explore;

/// The paper's amplitude grid, degrees.
pub const AMPLITUDE_GRID: [f64; 8] = [1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1e0, 1e1];

/// What to run: the cross product of amplitudes, modes, methods and trials.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentPlan {
    pub amplitudes: Vec<f64>,
    pub modes: Vec<ExplorationMode>,
    pub methods: Vec<Method>,
    pub trials: usize,
    /// Movements per exploration (N).
    pub n_moves: usize,
    pub n_sources: usize,
    pub p_max: usize,
    pub boot_iterations: usize,
    pub master_seed: u64,
}

impl Default for ExperimentPlan {
    fn default() -> Self {
        Self {
            amplitudes: AMPLITUDE_GRID.to_vec(),
            modes: ExplorationMode::ALL.to_vec(),
            methods: Method::ALL.to_vec(),
            trials: 20,
            n_moves: 1000,
            n_sources: 3,
            p_max: 15,
            boot_iterations: 10,
            master_seed: 0,
        }
    }
}

impl ExperimentPlan {
    /// The paper's statistical scale: 100 trials per cell.
    pub fn paper_scale(mut self) -> Self {
        self.trials = 100;
        self
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.trials < 1 {
            return Err("trials must be >= 1".into());
        }
        if self.amplitudes.is_empty() {
            return Err("amplitudes must be non-empty".into());
        }
        if self.amplitudes.iter().any(|&a| !(a > 0.0)) {
            return Err("amplitudes must be positive".into());
        }
        if self.n_moves < 2 {
            return Err("n_moves must be >= 2".into());
        }
        if self.n_sources < 1 {
            return Err("n_sources must be >= 1".into());
        }
        Ok(())
    }

    fn cells(&self) -> Vec<TrialCell> {
        let mut cells = Vec::new();
        for &amplitude in &self.amplitudes {
            for &mode in &self.modes {
                for &method in &self.methods {
                    for trial in 0..self.trials {
                        cells.push(TrialCell {
                            amplitude,
                            mode,
                            method,
                            trial,
                        });
                    }
                }
            }
        }
        cells
    }
}

/// Coordinates of one Monte-Carlo trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialCell {
    pub amplitude: f64,
    pub mode: ExplorationMode,
    pub method: Method,
    pub trial: usize,
}

/// Result of one trial. `wall_time_ms` is excluded from the canonical
/// serialization so record files compare byte-identically across runs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub amplitude: f64,
    pub mode: ExplorationMode,
    pub method: Method,
    pub estimated: Option<usize>,
    pub ground_truth: usize,
    pub correct: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<EstimateDiagnostics>,
    #[serde(skip, default)]
    pub wall_time_ms: f64,
}

fn mode_tag(mode: ExplorationMode) -> u64 {
    match mode {
        ExplorationMode::AgentOnly => 1,
        ExplorationMode::EnvironmentOnly => 2,
        ExplorationMode::Both => 3,
    }
}

fn method_tag(method: Method) -> u64 {
    match method {
        Method::Linear => 1,
        Method::Cca => 2,
        Method::CcaBootInfinitesimal => 3,
        Method::CcaBootFinite => 4,
    }
}

/// Seed of the system shared by every method at one `(amplitude, mode,
/// trial)` cell. Derived from the amplitude's value rather than its grid
/// index so a cell recomputed from a sliced plan stays identical.
pub fn system_seed(master_seed: u64, amplitude: f64, mode: ExplorationMode, trial: usize) -> u64 {
    let mut s = derive_seed(master_seed, amplitude.to_bits());
    s = derive_seed(s, mode_tag(mode));
    derive_seed(s, trial as u64)
}

fn method_seed(cell: &TrialCell, master_seed: u64) -> u64 {
    derive_seed(
        system_seed(master_seed, cell.amplitude, cell.mode, cell.trial),
        1000 + method_tag(cell.method),
    )
}

/// Correct intrinsic dimension of the sensory variations for a mode:
/// the agent contributes its 9 rotations, each source 2 angles, and the
/// joint exploration loses the 3-dimensional displacement group of head
/// rotations compensable by source moves.
pub fn ground_truth(mode: ExplorationMode, n_sources: usize) -> usize {
    match mode {
        ExplorationMode::AgentOnly => 9,
        ExplorationMode::EnvironmentOnly => 2 * n_sources,
        ExplorationMode::Both => 9 + 2 * n_sources - 3,
    }
}

/// Runs a single trial cell. Failures are reported inside the record.
pub fn run_trial(plan: &ExperimentPlan, cell: &TrialCell) -> TrialRecord {
    let start = std::time::Instant::now();
    let sys_seed = system_seed(plan.master_seed, cell.amplitude, cell.mode, cell.trial);
    let met_seed = method_seed(cell, plan.master_seed);
    let truth = ground_truth(cell.mode, plan.n_sources);

    let outcome = (|| -> Result<(usize, EstimateDiagnostics), String> {
        let system = build_system(SystemSpec {
            n_sources: plan.n_sources,
            seed: sys_seed,
            ..SystemSpec::default()
        })
        .map_err(|e| e.to_string())?;
        let sampling_seed = derive_seed_labeled(sys_seed, "sampling");

        match cell.method {
            Method::Linear | Method::Cca => {
                let configs = sample_configurations(
                    &system,
                    cell.mode,
                    cell.amplitude,
                    plan.n_moves,
                    sampling_seed,
                );
                let matrix = explore(&system, &configs, cell.mode, cell.amplitude)
                    .map_err(|e| e.to_string())?;
                if cell.method == Method::Linear {
                    let est = estimate_dim_linear(&singular_spectrum(&matrix))
                        .map_err(|e| e.to_string())?;
                    Ok((est.value, est.diagnostics))
                } else {
                    let params = CcaParams {
                        seed: derive_seed_labeled(met_seed, "cca"),
                        ..CcaParams::default()
                    };
                    let (est, _) = estimate_dim_cca(&matrix, plan.p_max, &params)
                        .map_err(|e| e.to_string())?;
                    Ok((est.value, est.diagnostics))
                }
            }
            Method::CcaBootInfinitesimal | Method::CcaBootFinite => {
                let strategy = if cell.method == Method::CcaBootInfinitesimal {
                    BootstrapStrategy::Infinitesimal
                } else {
                    BootstrapStrategy::Finite
                };
                let boot_params = BootstrapParams {
                    iterations: plan.boot_iterations,
                    ..BootstrapParams::new(strategy, cell.amplitude)
                };
                let (commands, _) = run_bootstrap(
                    &system,
                    cell.mode,
                    &boot_params,
                    plan.n_moves,
                    derive_seed_labeled(met_seed, "bootstrap"),
                )
                .map_err(|e| e.to_string())?;
                let configs = offsets_to_configs(&system, cell.mode, &commands);
                let matrix = explore(&system, &configs, cell.mode, cell.amplitude)
                    .map_err(|e| e.to_string())?;
                let params = CcaParams {
                    seed: derive_seed_labeled(met_seed, "cca"),
                    ..CcaParams::default()
                };
                let (est, _) =
                    estimate_dim_cca(&matrix, plan.p_max, &params).map_err(|e| e.to_string())?;
                Ok((est.value, est.diagnostics))
            }
        }
    })();

    let (estimated, diagnostics, error) = match outcome {
        Ok((value, diag)) => (Some(value), Some(diag), None),
        Err(msg) => (None, None, Some(msg)),
    };
    TrialRecord {
        trial: cell.trial,
        amplitude: cell.amplitude,
        mode: cell.mode,
        method: cell.method,
        estimated,
        ground_truth: truth,
        correct: estimated == Some(truth),
        error,
        diagnostics,
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
    }
}

fn sort_records(records: &mut [TrialRecord]) {
    records.sort_by(|a, b| {
        a.amplitude
            .partial_cmp(&b.amplitude)
            .unwrap()
            .then(mode_tag(a.mode).cmp(&mode_tag(b.mode)))
            .then(method_tag(a.method).cmp(&method_tag(b.method)))
            .then(a.trial.cmp(&b.trial))
    });
}

/// Runs the full sweep on the rayon thread pool.
pub fn run_experiment(plan: &ExperimentPlan) -> Result<Vec<TrialRecord>, String> {
    plan.validate()?;
    let cells = plan.cells();
    let mut records: Vec<TrialRecord> =
        cells.par_iter().map(|cell| run_trial(plan, cell)).collect();
    sort_records(&mut records);
    Ok(records)
}

/// Runs the full sweep on the current thread, one cell at a time, invoking
/// `progress` after each finished cell.
pub fn run_experiment_serial(
    plan: &ExperimentPlan,
    mut progress: impl FnMut(usize, usize, &TrialRecord),
) -> Result<Vec<TrialRecord>, String> {
    plan.validate()?;
    let cells = plan.cells();
    let total = cells.len();
    let mut records = Vec::with_capacity(total);
    for (i, cell) in cells.iter().enumerate() {
        let record = run_trial(plan, cell);
        progress(i + 1, total, &record);
        records.push(record);
    }
    sort_records(&mut records);
    Ok(records)
}

/// Canonical JSON-lines serialization of records (wall time excluded).
pub fn records_to_jsonl(records: &[TrialRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("record serializes"));
        out.push('\n');
    }
    out
}

/// Reads records back from JSON lines.
pub fn records_from_jsonl(text: &str) -> Result<Vec<TrialRecord>, serde_json::Error> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(serde_json::from_str)
        .collect()
}
