//! Experiment harness: the equivalences and estimates of the theory, run on
//! concrete families, with every verdict backed by its level data.
//!
//! An [`EquivalenceReport`] lists the conditions of an equivalence that were
//! computed, each with its own growth classification. The report is
//! consistent when all computed classifications agree. Conditions that were
//! skipped (for instance the interpolation step for a sequence that is not
//! Carleson) do not take part in the comparison.

mod closure;
mod estimates;
mod prop22;
mod theorem21;
mod theorem32;

pub use closure::{
    bwy_witness, closure_test, log_tempered_test, ClosureConfig, ClosureReport, EpsilonResult, WitnessAttempt,
    WitnessReport, DEFAULT_EPSILONS,
};
pub use estimates::{
    forelli_rudin_pairs, validate_forelli_rudin, validate_zhu_estimate, zhu_samples, ForelliRudinReport, PairRatio,
    ZhuCase, ZhuReport, ZhuSample, FORELLI_RUDIN_STABILITY, ZHU_EXPONENT_TOL, ZHU_LOG_BRACKET,
};
pub use prop22::{check_prop22, Prop22Config};
pub use theorem21::{check_theorem21, Theorem21Config};
pub use theorem32::{check_theorem32, phi_form_integral, theorem32_integral, Theorem32Config};

use serde::{Deserialize, Serialize};

use crate::classify::{Classification, LevelValue};
use crate::carleson::CarlesonReport;
use crate::net::NetConfig;
use crate::sequences::{DiskSequence, SeparationReport};

/// One condition of an equivalence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub name: String,
    pub classification: Classification,
    /// False when a numerical step behind the verdict did not meet its
    /// convergence test.
    pub converged: bool,
    /// Skipped conditions are reported but not compared.
    pub skipped: bool,
    pub slope: f64,
    pub per_level: Vec<LevelValue>,
    /// Full sub-report.
    pub detail: serde_json::Value,
}

impl Condition {
    pub fn from_carleson(name: &str, report: &CarlesonReport) -> Self {
        Condition {
            name: name.to_string(),
            classification: report.classification,
            converged: true,
            skipped: false,
            slope: report.slope,
            per_level: report.levels.clone(),
            detail: serde_json::to_value(report).unwrap_or(serde_json::Value::Null),
        }
    }

    pub fn skipped(name: &str, reason: &str) -> Self {
        Condition {
            name: name.to_string(),
            classification: Classification::Inconclusive,
            converged: true,
            skipped: true,
            slope: 0.0,
            per_level: Vec::new(),
            detail: serde_json::Value::String(reason.to_string()),
        }
    }
}

/// Description of the input family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyMeta {
    pub label: String,
    pub size: usize,
    pub max_generation: u32,
    pub separation: Option<SeparationReport>,
}

impl FamilyMeta {
    pub fn of(seq: &DiskSequence) -> Self {
        FamilyMeta {
            label: seq.label().to_string(),
            size: seq.len(),
            max_generation: seq.max_generation(),
            separation: Some(seq.separation_report()),
        }
    }

    pub fn named(label: &str) -> Self {
        FamilyMeta {
            label: label.to_string(),
            size: 0,
            max_generation: 0,
            separation: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub theorem: String,
    pub family: FamilyMeta,
    pub parameters: serde_json::Value,
    pub conditions: Vec<Condition>,
    /// All compared classifications agree.
    pub consistent: bool,
    /// Every compared condition met its convergence test.
    pub converged: bool,
    pub notes: Vec<String>,
}

impl EquivalenceReport {
    pub fn new(theorem: &str, family: FamilyMeta, parameters: serde_json::Value, conditions: Vec<Condition>, notes: Vec<String>) -> Self {
        let compared: Vec<&Condition> = conditions.iter().filter(|c| !c.skipped).collect();
        let consistent = compared.windows(2).all(|w| w[0].classification == w[1].classification);
        let converged = compared.iter().all(|c| c.converged);
        EquivalenceReport {
            theorem: theorem.to_string(),
            family,
            parameters,
            conditions,
            consistent,
            converged,
            notes,
        }
    }

    /// An inconsistent report whose conditions all converged contradicts
    /// the theory (or the numerics) and fails a run.
    pub fn contradiction(&self) -> bool {
        !self.consistent && self.converged
    }

    pub fn condition(&self, name: &str) -> Option<&Condition> {
        self.conditions.iter().find(|c| c.name == name)
    }
}

/// Net used for suprema over a sequence: deep enough to see every point.
pub fn sequence_net_config(seq: &DiskSequence, base: &NetConfig) -> NetConfig {
    NetConfig {
        levels: base.levels.max(seq.max_generation() + 2).min(crate::sequences::LEVEL_CAP),
        ..*base
    }
}

/// Box generations used for a sequence.
pub fn box_generations(seq: &DiskSequence) -> u32 {
    (seq.max_generation() + 2).clamp(1, 60)
}
