//! Subsets of one part of a Δ⁰₂ `k`-partition.

use crate::approx::{limit_value, Delta2Presentation, Limit};
use crate::machine::OracleWindow;
use crate::pairing::pair;

use super::conditions::{incompatible_partition, question_horizon, submasks_by_size, upward_closure, Condition};
use super::em::select_part;
use super::transcript::{
    Branch, Certificate, ConstructionKind, Extraction, Header, InstanceData, Requirement, StageRecord, Transcript,
    TRANSCRIPT_VERSION,
};
use super::{halting_certificate, halting_question, model_summaries, ForcingConfig, ForcingError, ROUTING};

/// A Δ⁰₂ partition read on `[0, window)` with its limits.
#[derive(Debug, Clone)]
pub struct D2Instance {
    pub name: String,
    pub window: u64,
    pub presentation: Delta2Presentation,
    /// `(lim_s f(x, s), settle stage, certified)` for `x < window`.
    pub limits: Vec<(u8, u64, bool)>,
    /// Starting reservoir, `[0, window)` unless set.
    pub reservoir: Vec<u64>,
}

pub(crate) fn partition_limits(
    d: &Delta2Presentation,
    window: u64,
    budget: u64,
) -> Result<Vec<(u8, u64, bool)>, ForcingError> {
    (0..window)
        .map(|x| match limit_value(d, x, budget)? {
            Limit::Value { value, at, certified } => Ok((value, at, certified)),
            Limit::Unstable => Err(ForcingError::Unstable { x }),
        })
        .collect()
}

impl D2Instance {
    pub fn new(
        name: &str,
        presentation: Delta2Presentation,
        window: u64,
        cfg: &ForcingConfig,
    ) -> Result<Self, ForcingError> {
        let limits = partition_limits(&presentation, window, cfg.limit_budget)?;
        Ok(D2Instance { name: name.to_string(), window, presentation, limits, reservoir: (0..window).collect() })
    }

    pub fn with_reservoir(mut self, reservoir: Vec<u64>) -> Self {
        self.reservoir = reservoir;
        self
    }

    pub fn colors(&self) -> usize {
        self.presentation.colors as usize
    }

    pub fn limit(&self, x: u64) -> usize {
        self.limits[x as usize].0 as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct D2State {
    pub condition: Condition,
    /// `e^i`: requirements of color `i` decided so far.
    pub counters: Vec<u64>,
    pub stage: u64,
    pub stopped: Option<String>,
}

impl D2State {
    pub fn new(colors: usize, reservoir: Vec<u64>) -> Self {
        D2State { condition: Condition::new(colors, reservoir), counters: vec![0; colors], stage: 0, stopped: None }
    }

    fn current(&self, i: usize) -> Requirement {
        Requirement::j(i as u8, self.counters[i])
    }
}

fn union(a: &[u64], b: &[u64]) -> Vec<u64> {
    let mut all: Vec<u64> = a.iter().chain(b).copied().collect();
    all.sort_unstable();
    all.dedup();
    all
}

/// `F^i ∪ E` satisfies the requirement.
fn satisfies(cfg: &ForcingConfig, req: Requirement, all: &[u64]) -> bool {
    if let Some((_, n)) = req.j_as_e() {
        return all.len() as u64 >= n;
    }
    let (_, e) = req.j_as_r().expect("J code");
    let w = OracleWindow::of_finite_set(all.iter().copied());
    cfg.catalog.get(e).run(u128::from(e), &mut &w, cfg.fuel).is_halted()
}

/// A finite `E ⊆ part` with `F^i ∪ E` satisfying the requirement, on the
/// whole window.
fn window_extension(
    cfg: &ForcingConfig,
    req: Requirement,
    fixed: &[u64],
    part: &[u64],
) -> (Option<Vec<u64>>, Option<Certificate>) {
    if let Some((_, n)) = req.j_as_e() {
        let need = (n as usize).saturating_sub(fixed.len());
        return ((part.len() >= need).then(|| part[..need].to_vec()), None);
    }
    let (color, e) = req.j_as_r().expect("J code");
    let (found, cert) = halting_question(cfg, e, Some(color), fixed, part, None);
    (found, Some(cert))
}

/// Index of the requirement in the `⟨e, i⟩` order.
fn order(state: &D2State, i: usize) -> u128 {
    pair(u128::from(state.counters[i]), i as u128)
}

pub fn d2_step(state: &mut D2State, inst: &D2Instance, cfg: &ForcingConfig) -> Result<StageRecord, ForcingError> {
    let k = inst.colors();
    let reservoir = state.condition.reservoir.clone();
    let mut certificates = Vec::new();
    let mut note = None;
    let least = (0..k).min_by_key(|&i| order(state, i)).expect("at least one color");
    let least_req = state.current(least);
    let (requirement, branch) = if satisfies(cfg, least_req, &state.condition.parts[least]) {
        if let Some((_, e)) = least_req.j_as_r() {
            certificates.extend(halting_certificate(cfg, e, Some(least as u8), &state.condition.parts[least]));
        }
        state.counters[least] += 1;
        (least_req, Branch::Satisfied)
    } else {
        let t_max = question_horizon(reservoir.len(), k as u32, cfg.partition_cap, cfg.subset_cap);
        let head = &reservoir[..t_max];
        let members =
            |mask: usize| -> Vec<u64> { (0..t_max).filter(|b| mask >> b & 1 == 1).map(|b| head[b]).collect() };
        let direct: Vec<Vec<bool>> = (0..k)
            .map(|i| {
                let (req, fixed) = (state.current(i), &state.condition.parts[i]);
                (0..1usize << t_max).map(|mask| satisfies(cfg, req, &union(fixed, &members(mask)))).collect()
            })
            .collect();
        let good: Vec<Vec<bool>> = direct.iter().map(|d| upward_closure(d, t_max)).collect();
        let answered_at = (0..=t_max).find(|&t| incompatible_partition((1 << t) - 1, k, &|i, m| good[i][m]).is_none());
        certificates.push(Certificate::Question { t_max: t_max as u64, answered_at: answered_at.map(|t| t as u64) });
        let limit_parts: Vec<Vec<u64>> =
            (0..k).map(|i| reservoir.iter().copied().filter(|&z| inst.limit(z) == i).collect()).collect();
        let found: Option<(usize, Vec<u64>, Option<Certificate>)> = match answered_at {
            Some(t) => {
                let part = |i: usize| (0..t).filter(|&b| inst.limit(head[b]) == i).fold(0usize, |m, b| m | 1 << b);
                let i = (0..k)
                    .filter(|&i| good[i][part(i)])
                    .min_by_key(|&i| order(state, i))
                    .expect("a limit part of a Yes window is compatible");
                let e_mask = submasks_by_size(part(i)).into_iter().find(|&s| direct[i][s]).expect("compatible part");
                Some((i, members(e_mask), None))
            }
            None => {
                let mut hits: Vec<(usize, Vec<u64>, Option<Certificate>)> = (0..k)
                    .filter_map(|i| {
                        match window_extension(cfg, state.current(i), &state.condition.parts[i], &limit_parts[i]) {
                            (Some(ext), cert) => Some((i, ext, cert)),
                            _ => None,
                        }
                    })
                    .collect();
                hits.sort_by_key(|h| order(state, h.0));
                hits.into_iter().next()
            }
        };
        match found {
            Some((i, extension, _)) => {
                let req = state.current(i);
                let all = union(&state.condition.parts[i], &extension);
                if let Some((color, e)) = req.j_as_r() {
                    certificates.extend(halting_certificate(cfg, e, Some(color), &all));
                }
                let settle: Vec<(u64, u64)> = extension.iter().map(|&x| (x, inst.limits[x as usize].1)).collect();
                let m = settle.iter().map(|p| p.1).max().unwrap_or(0);
                let certified = extension.iter().all(|&x| inst.limits[x as usize].2);
                state.condition.extend(i, &extension, extension.last().copied());
                if !extension.is_empty() {
                    certificates.push(Certificate::Extension { added: extension });
                    certificates.push(Certificate::Stabilization { m, certified, settle });
                }
                state.counters[i] += 1;
                (req, Branch::Case1)
            }
            None => {
                // an infinite part is never incompatible with E⁺, so only
                // colors waiting on an R requirement can take the negative side
                let candidates: Vec<Vec<u64>> = (0..k)
                    .map(|i| if state.current(i).j_as_r().is_some() { limit_parts[i].clone() } else { Vec::new() })
                    .collect();
                if candidates.iter().all(Vec::is_empty) {
                    note = Some("no color can take the negative side".into());
                    (least_req, Branch::Stalled)
                } else {
                    let beyond = state.condition.max_fixed().map_or(0, |m| m + 1);
                    let j = select_part(&candidates, inst.window, beyond, cfg, &mut certificates);
                    let req = state.current(j);
                    certificates.extend(window_extension(cfg, req, &state.condition.parts[j], &limit_parts[j]).1);
                    state.condition.reservoir = limit_parts[j].clone();
                    certificates.push(Certificate::Partition { parts: limit_parts, chosen: j });
                    state.counters[j] += 1;
                    (req, Branch::Case2)
                }
            }
        }
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
        counters: Some(state.counters.clone()),
        note,
    };
    state.stage += 1;
    Ok(record)
}

/// The color with the most decided requirements after `horizon` stages,
/// ties to the least index. `None` when no color has any.
pub fn select_color(t: &Transcript, horizon: u64) -> Option<u8> {
    let k = t.initial.parts.len();
    let counters = t
        .stages
        .iter()
        .take_while(|s| s.stage < horizon)
        .last()
        .and_then(|s| s.counters.clone())
        .unwrap_or_else(|| vec![0; k]);
    let best = *counters.iter().max()?;
    (best > 0).then(|| counters.iter().position(|&c| c == best).unwrap() as u8)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct D2Run {
    pub transcript: Transcript,
    pub color: Option<u8>,
    /// `F^i` for the selected color.
    pub set: Vec<u64>,
}

pub fn run_d2(inst: &D2Instance, stages: u64, cfg: &ForcingConfig) -> Result<D2Run, ForcingError> {
    let models = match &cfg.models {
        Some(plan) => {
            let bits = (0..64).map(|x| x < inst.window && inst.limit(x) == 1).collect();
            model_summaries(&crate::approx::SetPresentation::from_table("partition", bits), plan)?
        }
        None => Vec::new(),
    };
    let mut state = D2State::new(inst.colors(), inst.reservoir.clone());
    let initial = state.condition.clone();
    let mut records = Vec::new();
    while state.stage < stages && state.stopped.is_none() {
        records.push(d2_step(&mut state, inst, cfg)?);
    }
    let instance = InstanceData::Partition {
        window: inst.window,
        presentation: inst.presentation.clone(),
        limit_budget: cfg.limit_budget,
    };
    let header = Header {
        kind: ConstructionKind::D2,
        version: TRANSCRIPT_VERSION,
        instance_name: inst.name.clone(),
        instance_hash: instance.hash(),
        instance,
        catalog: cfg.catalog.clone(),
        fuel: cfg.fuel,
        node_cap: cfg.node_cap,
        density: cfg.density,
        partition_cap: cfg.partition_cap,
        subset_cap: cfg.subset_cap,
        stages,
        schedule: "least undecided J by <e, i>".into(),
        models,
        routing: ROUTING.into(),
    };
    let mut transcript = Transcript {
        header,
        initial,
        stages: records,
        extraction: Extraction { set: Vec::new(), color: None, stopped: state.stopped },
    };
    let color = select_color(&transcript, state.stage);
    let set = color.map_or_else(Vec::new, |i| state.condition.parts[i as usize].clone());
    transcript.extraction.set = set.clone();
    transcript.extraction.color = color;
    Ok(D2Run { transcript, color, set })
}
