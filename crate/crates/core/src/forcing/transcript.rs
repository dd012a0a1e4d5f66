//! Transcript schema shared by the constructions.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::approx::Delta2Presentation;
use crate::catalog::Catalog;
use crate::omega_model::Side;

use super::conditions::{ColorTable, Condition};

pub const TRANSCRIPT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstructionKind {
    Coh,
    Em,
    D2,
}

/// The instance as seen on the window, embedded so that transcripts can be
/// audited on their own.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InstanceData {
    /// Members of each `R_n` below `window`.
    Family { window: u64, sets: Vec<Vec<u64>> },
    /// The coloring on `[0, table.size)`; the construction window is
    /// `[0, window)` and the table reaches past it so limits are visible.
    Coloring { window: u64, bound: Option<u64>, table: ColorTable },
    /// A Δ⁰₂ partition of `[0, window)`.
    Partition { window: u64, presentation: Delta2Presentation, limit_budget: u64 },
}

impl InstanceData {
    pub fn window(&self) -> u64 {
        match self {
            InstanceData::Family { window, .. }
            | InstanceData::Coloring { window, .. }
            | InstanceData::Partition { window, .. } => *window,
        }
    }

    pub fn hash(&self) -> String {
        sha256_hex(&serde_json::to_vec(self).expect("instance serializes"))
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub role: String,
    pub base: String,
    pub depth: usize,
    pub low: bool,
    /// Node bits, hex-packed.
    pub node: String,
    pub audit_findings: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Header {
    pub kind: ConstructionKind,
    pub version: u32,
    pub instance_name: String,
    pub instance_hash: String,
    pub instance: InstanceData,
    pub catalog: Catalog,
    pub fuel: u64,
    pub node_cap: u64,
    /// Minimum reservoir size accepted as infinite.
    pub density: usize,
    pub partition_cap: u64,
    pub subset_cap: u64,
    pub stages: u64,
    pub schedule: String,
    pub models: Vec<ModelSummary>,
    pub routing: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Requirement {
    /// `I ⊆ R_n ∨ I ⊆ R_n^c`.
    D { n: u64 },
    /// `|F| ≥ n`.
    E { n: u64 },
    /// `R_e ∨ N_e`.
    R { e: u64 },
    /// `J^i_j`: even `j` is `E^{i,+}_{j/2}`, odd `j` is `R^i_{(j-1)/2}`.
    J { color: u8, j: u64 },
}

impl Requirement {
    /// The requirement addressed by code `j` of color `i`.
    pub fn j(color: u8, j: u64) -> Self {
        Requirement::J { color, j }
    }

    /// `(color, E-bound)` when this is an `E^{i,+}` code.
    pub fn j_as_e(&self) -> Option<(u8, u64)> {
        match *self {
            Requirement::J { color, j } if j % 2 == 0 => Some((color, j / 2)),
            _ => None,
        }
    }

    /// `(color, e)` when this is an `R^i` code.
    pub fn j_as_r(&self) -> Option<(u8, u64)> {
        match *self {
            Requirement::J { color, j } if j % 2 == 1 => Some((color, (j - 1) / 2)),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Case1,
    Case2,
    EExtension,
    DRestriction,
    /// Already satisfied by the current condition.
    Satisfied,
    /// Refers to a set outside the instance family.
    Vacuous,
    /// An `E` requirement the finite window cannot meet; nothing changes.
    Stalled,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Certificate {
    /// `Φ_e^{oracle}(e)` halts, `oracle` read as a finite set.
    Halting {
        e: u64,
        color: Option<u8>,
        oracle: Vec<u64>,
        value: u128,
        steps: u64,
        use_bound: u128,
        fuel: u64,
    },
    /// No `D ⊆ reservoir` makes `Φ_e^{fixed ∪ D}(e)` halt within `fuel`
    /// (keeping `fixed ∪ D` fallow when `fallow`).
    Negative {
        e: u64,
        color: Option<u8>,
        fixed: Vec<u64>,
        reservoir: Vec<u64>,
        fuel: u64,
        fallow: bool,
        nodes: u64,
        exhaustive: bool,
    },
    Extension {
        added: Vec<u64>,
    },
    /// Least `m` with every column of the listed points constant from `m`.
    Stabilization {
        m: u64,
        certified: bool,
        settle: Vec<(u64, u64)>,
    },
    Question {
        t_max: u64,
        answered_at: Option<u64>,
    },
    Partition {
        parts: Vec<Vec<u64>>,
        chosen: usize,
    },
    Selection {
        side: Side,
        witness: Option<(u64, u8)>,
        defaulted: bool,
        on_side: u64,
        off_side: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: u64,
    pub requirement: Requirement,
    pub branch: Branch,
    pub condition: Condition,
    pub certificates: Vec<Certificate>,
    /// Per-color requirement counters after the stage (D² only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counters: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Extraction {
    pub set: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub color: Option<u8>,
    /// Why the run ended before its stage budget.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stopped: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    pub header: Header,
    pub initial: Condition,
    pub stages: Vec<StageRecord>,
    pub extraction: Extraction,
}

impl Transcript {
    pub fn final_condition(&self) -> &Condition {
        self.stages.last().map_or(&self.initial, |s| &s.condition)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("transcript serializes")
    }

    pub fn hash(&self) -> String {
        sha256_hex(self.to_json().as_bytes())
    }
}
