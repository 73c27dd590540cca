//! Success-rate tables over trial records.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::estimators::{displacement_dim, Method};
use crate::sim::ExplorationMode;

use super::TrialRecord;

/// What a summary row measures: one exploration mode's dimension, or the
/// displacement dimension derived from all three via `d = e + m - b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SummaryTarget {
    #[serde(rename = "agent")]
    Mode(ExplorationMode),
    #[serde(rename = "d")]
    DerivedDisplacement,
}

impl SummaryTarget {
    pub fn label(self) -> &'static str {
        match self {
            SummaryTarget::Mode(m) => m.label(),
            SummaryTarget::DerivedDisplacement => "d",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub amplitude: f64,
    pub target: SummaryTarget,
    pub method: Method,
    pub correct: usize,
    pub trials: usize,
    pub percent: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PerformanceTable {
    pub rows: Vec<SummaryRow>,
}

impl PerformanceTable {
    pub fn rate(&self, amplitude: f64, target: SummaryTarget, method: Method) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.amplitude == amplitude && r.target == target && r.method == method)
            .map(|r| r.percent)
    }

    /// CSV with one row per (amplitude, target, method) group.
    pub fn write_csv<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "amplitude,target,method,correct,trials,percent")?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                r.amplitude,
                r.target.label(),
                r.method.label(),
                r.correct,
                r.trials,
                r.percent
            )?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("table serializes")
    }
}

fn mode_order(mode: ExplorationMode) -> u8 {
    match mode {
        ExplorationMode::AgentOnly => 0,
        ExplorationMode::EnvironmentOnly => 1,
        ExplorationMode::Both => 2,
    }
}

fn method_order(method: Method) -> u8 {
    match method {
        Method::Linear => 0,
        Method::Cca => 1,
        Method::CcaBootInfinitesimal => 2,
        Method::CcaBootFinite => 3,
    }
}

/// Groups records into per-(amplitude, mode, method) success rates; groups
/// with no records are omitted. When a cell carries all three modes of one
/// trial and all were estimated correctly, the transversality relation
/// yields the displacement dimension, reported as a derived `d` row.
pub fn summarize(records: &[TrialRecord]) -> PerformanceTable {
    #[derive(Default)]
    struct Tally {
        correct: usize,
        total: usize,
    }
    // Keys ordered: amplitude bits (positive floats order like their bits),
    // method, mode.
    let mut groups: BTreeMap<(u64, u8, u8), Tally> = BTreeMap::new();
    for r in records {
        let t = groups
            .entry((r.amplitude.to_bits(), method_order(r.method), mode_order(r.mode)))
            .or_default();
        t.total += 1;
        t.correct += usize::from(r.correct);
    }

    // Derived d: per (amplitude, method, trial), all three modes present
    // and correct.
    let mut trials_seen: BTreeMap<(u64, u8, usize), Vec<&TrialRecord>> = BTreeMap::new();
    for r in records {
        trials_seen
            .entry((r.amplitude.to_bits(), method_order(r.method), r.trial))
            .or_default()
            .push(r);
    }
    let mut derived: BTreeMap<(u64, u8), Tally> = BTreeMap::new();
    for ((amp_bits, method, _trial), rs) in &trials_seen {
        let find = |mode| rs.iter().find(|r| r.mode == mode);
        let (Some(m), Some(e), Some(b)) = (
            find(ExplorationMode::AgentOnly),
            find(ExplorationMode::EnvironmentOnly),
            find(ExplorationMode::Both),
        ) else {
            continue;
        };
        let t = derived.entry((*amp_bits, *method)).or_default();
        t.total += 1;
        if m.correct && e.correct && b.correct {
            // All three correct: d = e + m - b comes out at the true value.
            let d = displacement_dim(
                m.estimated.unwrap(),
                e.estimated.unwrap(),
                b.estimated.unwrap(),
            );
            debug_assert_eq!(
                d,
                displacement_dim(m.ground_truth, e.ground_truth, b.ground_truth)
            );
            t.correct += 1;
        }
    }

    let mut rows = Vec::new();
    for ((amp_bits, method, mode), t) in &groups {
        rows.push(SummaryRow {
            amplitude: f64::from_bits(*amp_bits),
            target: SummaryTarget::Mode(match mode {
                0 => ExplorationMode::AgentOnly,
                1 => ExplorationMode::EnvironmentOnly,
                _ => ExplorationMode::Both,
            }),
            method: match method {
                0 => Method::Linear,
                1 => Method::Cca,
                2 => Method::CcaBootInfinitesimal,
                _ => Method::CcaBootFinite,
            },
            correct: t.correct,
            trials: t.total,
            percent: 100.0 * t.correct as f64 / t.total as f64,
        });
    }
    for ((amp_bits, method), t) in &derived {
        rows.push(SummaryRow {
            amplitude: f64::from_bits(*amp_bits),
            target: SummaryTarget::DerivedDisplacement,
            method: match method {
                0 => Method::Linear,
                1 => Method::Cca,
                2 => Method::CcaBootInfinitesimal,
                _ => Method::CcaBootFinite,
            },
            correct: t.correct,
            trials: t.total,
            percent: 100.0 * t.correct as f64 / t.total as f64,
        });
    }
    rows.sort_by(|a, b| {
        a.amplitude
            .partial_cmp(&b.amplitude)
            .unwrap()
            .then(method_order(a.method).cmp(&method_order(b.method)))
            .then(a.target.cmp(&b.target))
    });
    PerformanceTable { rows }
}
