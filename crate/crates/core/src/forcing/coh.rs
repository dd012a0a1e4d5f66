//! Cohesive sets for a computable family `R_0, R_1, …`.

use std::collections::VecDeque;

use crate::approx::SetPresentation;
use crate::omega_model::{pi2_select_windows, Side};
use crate::pairing::unpair;

use super::conditions::Condition;
use super::transcript::{
    Branch, Certificate, ConstructionKind, Extraction, Header, InstanceData, Requirement, StageRecord, Transcript,
    TRANSCRIPT_VERSION,
};
use super::{halting_question, indicator, model_summaries, ForcingConfig, ForcingError, ROUTING};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CohSchedule {
    /// Stage `s` addresses `D_n`, `E_n`, `R_n ∨ N_n` for `n = s / 3` in turn.
    RoundRobin,
    /// Every element `x` added to `F` is followed by `D_n` for its columns
    /// `n = x·per_point + j`, `j < per_point`; otherwise `E_{|F|+1}`,
    /// alternating with `R_e ∨ N_e` when `jump` is set.
    ColumnsOfCommitted { jump: bool, per_point: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectionRule {
    /// Side chosen by the Π₂ search.
    Pi2Search,
    /// The side holding more reservoir elements (ties to the intersection);
    /// the Π₂ search is still run and recorded.
    Majority,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CohState {
    pub condition: Condition,
    pub stage: u64,
    pub stopped: Option<String>,
    schedule: CohSchedule,
    pending_columns: VecDeque<u64>,
    next_e: u64,
    jump_turn: bool,
}

impl CohState {
    pub fn new(window: u64, schedule: CohSchedule) -> Self {
        CohState {
            condition: Condition::new(1, (0..window).collect()),
            stage: 0,
            stopped: None,
            schedule,
            pending_columns: VecDeque::new(),
            next_e: 0,
            jump_turn: false,
        }
    }

    fn next_requirement(&mut self) -> Requirement {
        match self.schedule {
            CohSchedule::RoundRobin => {
                let n = self.stage / 3;
                match self.stage % 3 {
                    0 => Requirement::D { n },
                    1 => Requirement::E { n },
                    _ => Requirement::R { e: n },
                }
            }
            CohSchedule::ColumnsOfCommitted { jump, .. } => {
                if let Some(x) = self.pending_columns.pop_front() {
                    return Requirement::D { n: x };
                }
                self.jump_turn = jump && !self.jump_turn;
                if self.jump_turn {
                    let e = self.next_e;
                    self.next_e += 1;
                    Requirement::R { e }
                } else {
                    Requirement::E { n: self.condition.parts[0].len() as u64 + 1 }
                }
            }
        }
    }

    fn added(&mut self, xs: &[u64]) {
        if let CohSchedule::ColumnsOfCommitted { per_point, .. } = self.schedule {
            self.pending_columns.extend(xs.iter().flat_map(|&x| (0..per_point).map(move |j| x * per_point + j)));
        }
    }
}

/// One stage: picks the scheduled requirement and extends the condition.
/// `family[n]` is the indicator of `R_n` on the window.
pub fn coh_step(
    state: &mut CohState,
    family: &[Vec<bool>],
    window: u64,
    cfg: &ForcingConfig,
    rule: SelectionRule,
) -> Result<StageRecord, ForcingError> {
    let requirement = state.next_requirement();
    let mut certificates = Vec::new();
    let mut note = None;
    let branch = match requirement {
        Requirement::E { n } => {
            let have = state.condition.parts[0].len() as u64;
            if have >= n {
                Branch::Satisfied
            } else {
                let need = (n - have) as usize;
                if state.condition.reservoir.len() < need {
                    state.stopped = Some(format!("reservoir cannot supply E_{n}"));
                    Branch::Stalled
                } else {
                    let added: Vec<u64> = state.condition.reservoir[..need].to_vec();
                    state.condition.extend(0, &added, added.last().copied());
                    state.added(&added);
                    certificates.push(Certificate::Extension { added });
                    Branch::EExtension
                }
            }
        }
        Requirement::R { e } => {
            let (found, cert) = halting_question(
                cfg,
                e,
                None,
                &state.condition.parts[0].clone(),
                &state.condition.reservoir.clone(),
                None,
            );
            certificates.push(cert);
            match found {
                Some(d) => {
                    state.condition.extend(0, &d, d.last().copied());
                    state.added(&d);
                    if !d.is_empty() {
                        certificates.push(Certificate::Extension { added: d });
                    }
                    Branch::Case1
                }
                None => Branch::Case2,
            }
        }
        Requirement::D { n } => match family.get(n as usize) {
            None => Branch::Vacuous,
            Some(r) => {
                let wi = indicator(&state.condition.reservoir, window);
                let beyond = state.condition.max_fixed().map_or(0, |m| m + 1);
                match pi2_select_windows(&wi, r, beyond, cfg.pi2_fuel) {
                    Err(_) => {
                        state.stopped = Some(format!("reservoir empty at D_{n}"));
                        Branch::Stalled
                    }
                    Ok(sel) => {
                        let side = match rule {
                            SelectionRule::Pi2Search => sel.side,
                            SelectionRule::Majority => {
                                let inside = state.condition.reservoir.iter().filter(|&&z| r[z as usize]).count();
                                let outside = state.condition.reservoir.len() - inside;
                                if inside >= outside {
                                    Side::IntersectSide
                                } else {
                                    Side::ComplementSide
                                }
                            }
                        };
                        if side != sel.side {
                            note = Some(format!("majority rule overrides the Π₂ search ({:?})", sel.side));
                        }
                        let keep = side == Side::IntersectSide;
                        state.condition.reservoir.retain(|&z| r[z as usize] == keep);
                        let on = state.condition.reservoir.len() as u64;
                        let all = wi.iter().skip(beyond as usize).filter(|b| **b).count() as u64;
                        certificates.push(Certificate::Selection {
                            side,
                            witness: sel.witness,
                            defaulted: sel.defaulted,
                            on_side: on,
                            off_side: all - on,
                        });
                        Branch::DRestriction
                    }
                }
            }
        },
        Requirement::J { .. } => unreachable!("COH schedules no J requirements"),
    };
    if state.stopped.is_none() && state.condition.reservoir.len() < cfg.density {
        state.stopped = Some(format!(
            "density lost after stage {}: {} reservoir elements, {} required",
            state.stage,
            state.condition.reservoir.len(),
            cfg.density
        ));
    }
    let record = StageRecord {
        stage: state.stage,
        requirement,
        branch,
        condition: state.condition.clone(),
        certificates,
        counters: None,
        note,
    };
    state.stage += 1;
    Ok(record)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CohRun {
    pub transcript: Transcript,
    /// `C`, the union of the `F_s`.
    pub cohesive: Vec<u64>,
}

fn family_base(family: &[SetPresentation], window: u64) -> SetPresentation {
    let bits = (0..64u128)
        .map(|n| {
            let (i, y) = unpair(n);
            (i as usize) < family.len() && y < u128::from(window) && family[i as usize].contains(y as u64) == Some(true)
        })
        .collect();
    SetPresentation::from_table("family", bits)
}

/// Runs `stages` stages from `(∅, [0, window))`.
pub fn run_coh(
    family: &[SetPresentation],
    window: u64,
    stages: u64,
    cfg: &ForcingConfig,
    schedule: CohSchedule,
    rule: SelectionRule,
) -> Result<CohRun, ForcingError> {
    for (n, r) in family.iter().enumerate() {
        if (r.bound() as u64) < window {
            return Err(ForcingError::Instance(format!("R_{n} is decided only below {}", r.bound())));
        }
    }
    let rows: Vec<Vec<bool>> =
        family.iter().map(|r| (0..window).map(|y| r.contains(y) == Some(true)).collect()).collect();
    let instance = InstanceData::Family {
        window,
        sets: rows.iter().map(|r| (0..window).filter(|&y| r[y as usize]).collect()).collect(),
    };
    let models = match &cfg.models {
        Some(plan) => model_summaries(&family_base(family, window), plan)?,
        None => Vec::new(),
    };
    let mut state = CohState::new(window, schedule);
    let initial = state.condition.clone();
    let mut records = Vec::new();
    while state.stage < stages && state.stopped.is_none() {
        records.push(coh_step(&mut state, &rows, window, cfg, rule)?);
    }
    let cohesive = state.condition.parts[0].clone();
    let header = Header {
        kind: ConstructionKind::Coh,
        version: TRANSCRIPT_VERSION,
        instance_name: family.iter().map(|r| r.name.as_str()).collect::<Vec<_>>().join(", "),
        instance_hash: instance.hash(),
        instance,
        catalog: cfg.catalog.clone(),
        fuel: cfg.fuel,
        node_cap: cfg.node_cap,
        density: cfg.density,
        partition_cap: cfg.partition_cap,
        subset_cap: cfg.subset_cap,
        stages,
        schedule: format!("{schedule:?}, {rule:?}"),
        models,
        routing: ROUTING.into(),
    };
    let transcript = Transcript {
        header,
        initial,
        stages: records,
        extraction: Extraction { set: cohesive.clone(), color: None, stopped: state.stopped },
    };
    Ok(CohRun { transcript, cohesive })
}
