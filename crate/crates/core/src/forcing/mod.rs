//! Mathias forcing with finite reservoirs: cohesiveness (COH), stable
//! Erdős–Moser (EM), Δ⁰₂ partitions (D²) and the RT² pipeline.
//!
//! A condition's reservoir is the explicit list of its elements below the
//! instance window. "Infinite" means at least `density` elements. Σ₁
//! questions about conditions are answered by bounded search
//! ([`search::ExtensionSearch`]) and set selections by
//! [`crate::omega_model::pi2_select_windows`] on the reservoir window. The
//! coded models are built and audited for every run and summarized in the
//! transcript header.

mod coh;
pub mod conditions;
mod d2;
mod em;
mod rt2;
pub mod search;
pub mod transcript;
mod verify;

use thiserror::Error;

use crate::approx::{ApproxError, SetPresentation};
use crate::catalog::Catalog;
use crate::coloring::ColoringError;
use crate::machine::{OracleWindow, Program};
use crate::omega_model::{audit, build_model, ModelConfig, ModelError};
use crate::pairing::unpair;

pub use coh::{coh_step, run_coh, CohRun, CohSchedule, CohState, SelectionRule};
pub use conditions::{extends, fallow_check, fallow_extension, ColorTable, Condition, Extends, Fallow};
pub use d2::{d2_step, run_d2, select_color, D2Instance, D2Run, D2State};
pub use em::{em_step, run_em, EmInstance, EmRun, EmState};
pub use rt2::{rt2_pipeline, Rt2Run};
pub use search::{ExtensionSearch, SearchOutcome};
pub use transcript::{
    sha256_hex, Branch, Certificate, ConstructionKind, Extraction, Header, InstanceData, ModelSummary, Requirement,
    StageRecord, Transcript, TRANSCRIPT_VERSION,
};
pub use verify::{verify_transcript, AuditReport, Finding, Grade};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ForcingError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Approx(#[from] ApproxError),
    #[error(transparent)]
    Coloring(#[from] ColoringError),
    #[error("no stable limit visible for column {x}")]
    Unstable { x: u64 },
    #[error("instance: {0}")]
    Instance(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ForcingConfig {
    /// Requirement programs: `R_e` runs position `e` on input `e`.
    pub catalog: Catalog,
    /// Step bound for every halting question.
    pub fuel: u64,
    /// Run bound for one extension search.
    pub node_cap: u64,
    pub density: usize,
    /// Partition question: `k^t` and `2^t` caps on the horizon `t`.
    pub partition_cap: u64,
    pub subset_cap: u64,
    pub pi2_fuel: u64,
    /// Stage budget for reading limits.
    pub limit_budget: u64,
    pub models: Option<ModelPlan>,
}

/// Inner model over the instance base, outer model over the inner node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelPlan {
    pub inner_depth: usize,
    pub outer_depth: usize,
    pub config: ModelConfig,
}

impl Default for ModelPlan {
    fn default() -> Self {
        ModelPlan { inner_depth: 200, outer_depth: 400, config: ModelConfig::default() }
    }
}

impl Default for ForcingConfig {
    fn default() -> Self {
        ForcingConfig {
            catalog: Catalog::standard(),
            fuel: 256,
            node_cap: 20_000,
            density: 8,
            partition_cap: 19_683,
            subset_cap: 512,
            pi2_fuel: 4096,
            limit_budget: 256,
            models: Some(ModelPlan::default()),
        }
    }
}

impl ForcingConfig {
    pub fn with_density(mut self, density: usize) -> Self {
        self.density = density;
        self
    }

    pub fn without_models(mut self) -> Self {
        self.models = None;
        self
    }

    fn program(&self, e: u64) -> Program {
        self.catalog.get(e)
    }
}

pub(crate) const ROUTING: &str = "halting questions: bounded search on the reservoir window (outer model role); \
     set selection: pi2 search on the reservoir window (inner model role)";

fn pack_bits(bits: &[bool]) -> String {
    let bytes: Vec<u8> =
        bits.chunks(8).map(|c| c.iter().enumerate().fold(0u8, |acc, (i, b)| acc | (u8::from(*b) << i))).collect();
    hex::encode(bytes)
}

/// Builds and audits the model pair for `base`.
pub fn model_summaries(base: &SetPresentation, plan: &ModelPlan) -> Result<Vec<ModelSummary>, ForcingError> {
    let inner = build_model(base, plan.inner_depth, true, plan.config.clone())?;
    let inner_base = SetPresentation::from_table("inner model node", inner.node().0.clone());
    let outer = build_model(&inner_base, plan.outer_depth, false, plan.config.clone())?;
    Ok([("inner", &inner), ("outer", &outer)]
        .into_iter()
        .map(|(role, m)| ModelSummary {
            role: role.into(),
            base: m.base.name.clone(),
            depth: m.depth,
            low: m.low,
            node: pack_bits(&m.node().0),
            audit_findings: audit(m).map_or(usize::MAX, |f| f.len()),
        })
        .collect())
}

/// Halting question for `R_e` against `F ∪ D`, `D ⊆ candidates`.
pub(crate) fn halting_question(
    cfg: &ForcingConfig,
    e: u64,
    color: Option<u8>,
    fixed: &[u64],
    candidates: &[u64],
    admissible: Option<&dyn Fn(&[u64]) -> bool>,
) -> (Option<Vec<u64>>, Certificate) {
    let program = cfg.program(e);
    let search = ExtensionSearch {
        program: &program,
        input: u128::from(e),
        fixed,
        candidates,
        fuel: cfg.fuel,
        node_cap: cfg.node_cap,
        admissible,
    };
    match search.run() {
        SearchOutcome::Found { extension, outcome, .. } => {
            let mut oracle: Vec<u64> = fixed.iter().chain(&extension).copied().collect();
            oracle.sort_unstable();
            let cert = Certificate::Halting {
                e,
                color,
                oracle,
                value: outcome.halted().unwrap(),
                steps: outcome.steps,
                use_bound: outcome.use_bound,
                fuel: cfg.fuel,
            };
            (Some(extension), cert)
        }
        SearchOutcome::NotFound { exhaustive, nodes } => (
            None,
            Certificate::Negative {
                e,
                color,
                fixed: fixed.to_vec(),
                reservoir: candidates.to_vec(),
                fuel: cfg.fuel,
                fallow: admissible.is_some(),
                nodes,
                exhaustive,
            },
        ),
    }
}

/// Certificate for a run of `R_e` on the finite set `oracle`, if it halts.
pub(crate) fn halting_certificate(
    cfg: &ForcingConfig,
    e: u64,
    color: Option<u8>,
    oracle: &[u64],
) -> Option<Certificate> {
    let window = OracleWindow::of_finite_set(oracle.iter().copied());
    let out = cfg.program(e).run(u128::from(e), &mut &window, cfg.fuel);
    Some(Certificate::Halting {
        e,
        color,
        oracle: oracle.to_vec(),
        value: out.halted()?,
        steps: out.steps,
        use_bound: out.use_bound,
        fuel: cfg.fuel,
    })
}

/// Base set of a coloring instance: `⟨x, y⟩ ∈ A` iff `x < y` and `c(x, y) = 1`.
pub(crate) fn coloring_base(table: &ColorTable) -> SetPresentation {
    let bits = (0..64u128)
        .map(|n| {
            let (x, y) = unpair(n);
            x < y && y < u128::from(table.size) && table.get(x as u64, y as u64) == 1
        })
        .collect();
    SetPresentation::from_table("coloring", bits)
}

/// Indicator of `members` on `[0, window)`.
pub(crate) fn indicator(members: &[u64], window: u64) -> Vec<bool> {
    let mut bits = vec![false; window as usize];
    for &m in members {
        if m < window {
            bits[m as usize] = true;
        }
    }
    bits
}
