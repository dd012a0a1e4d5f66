//! Fallow sets for stable `k`-colorings.

use crate::approx::{stable_color_limit, Limit};
use crate::coloring::Coloring;
use crate::machine::OracleWindow;
use crate::omega_model::{pi2_select_windows, Side};

use super::conditions::{
    fallow_extension, fallow_violation, incompatible_partition, question_horizon, submasks_by_size, upward_closure,
    ColorTable, Condition,
};
use super::transcript::{
    Branch, Certificate, ConstructionKind, Extraction, Header, InstanceData, Requirement, StageRecord, Transcript,
    TRANSCRIPT_VERSION,
};
use super::{
    coloring_base, halting_certificate, halting_question, indicator, model_summaries, ForcingConfig, ForcingError,
    ROUTING,
};

/// A stable coloring read on `[0, window)`, with the table and column limits
/// the construction works from.
#[derive(Debug, Clone)]
pub struct EmInstance {
    pub name: String,
    pub window: u64,
    pub bound: Option<u64>,
    pub table: ColorTable,
    /// `(lim_y c(x, y), settle point, certified)` for `x < window`.
    pub limits: Vec<(u8, u64, bool)>,
}

/// Table size that keeps every column limit below `window` visible.
pub(crate) fn table_size(c: &Coloring, window: u64, budget: u64) -> u64 {
    match (c.declared_bound(), c.domain()) {
        (Some(b), _) => window.max(b + 1) + 1,
        (None, Some(d)) if !matches!(c, Coloring::Stable(_)) => d,
        _ => window.max(budget + 1) + 1,
    }
}

/// Column limits of `table` read as a coloring with `bound`.
pub(crate) fn column_limits(
    table: &ColorTable,
    bound: Option<u64>,
    window: u64,
    budget: u64,
) -> Result<Vec<(u8, u64, bool)>, ForcingError> {
    let working = table.to_coloring(bound);
    let budget = budget.min(table.size - 1);
    (0..window)
        .map(|x| match stable_color_limit(&working, x, budget)? {
            Limit::Value { value, at, certified } => Ok((value, at, certified)),
            Limit::Unstable => Err(ForcingError::Unstable { x }),
        })
        .collect()
}

impl EmInstance {
    pub fn new(name: &str, c: &Coloring, window: u64, cfg: &ForcingConfig) -> Result<Self, ForcingError> {
        let size = table_size(c, window, cfg.limit_budget);
        if size <= window {
            return Err(ForcingError::Instance(format!("coloring defined below {size}, window {window}")));
        }
        let table = ColorTable::from_coloring(c, size)?;
        let bound = c.declared_bound();
        let limits = column_limits(&table, bound, window, cfg.limit_budget)?;
        Ok(EmInstance { name: name.to_string(), window, bound, table, limits })
    }

    pub fn colors(&self) -> u8 {
        self.table.colors
    }

    pub fn color(&self, x: u64, y: u64) -> u8 {
        self.table.get(x, y)
    }

    pub fn limit(&self, x: u64) -> u8 {
        self.limits[x as usize].0
    }

    fn fallow(&self, sorted: &[u64]) -> bool {
        fallow_violation(|x, y| self.color(x, y), sorted).is_none()
    }

    fn instance_data(&self) -> InstanceData {
        InstanceData::Coloring { window: self.window, bound: self.bound, table: self.table.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmState {
    pub condition: Condition,
    pub stage: u64,
    pub stopped: Option<String>,
}

impl EmState {
    pub fn new(window: u64) -> Self {
        EmState { condition: Condition::new(1, (0..window).collect()), stage: 0, stopped: None }
    }
}

/// Even stages address `E⁺_{s/2+1}`, odd stages `R_{(s-1)/2} ∨ N_{(s-1)/2}`.
fn requirement(stage: u64) -> Requirement {
    if stage % 2 == 0 {
        Requirement::E { n: stage / 2 + 1 }
    } else {
        Requirement::R { e: stage / 2 }
    }
}

fn union(a: &[u64], b: &[u64]) -> Vec<u64> {
    let mut all: Vec<u64> = a.iter().chain(b).copied().collect();
    all.sort_unstable();
    all.dedup();
    all
}

/// `F ∪ E` satisfies the requirement and is fallow.
fn direct(inst: &EmInstance, cfg: &ForcingConfig, req: Requirement, all: &[u64]) -> bool {
    inst.fallow(all)
        && match req {
            Requirement::E { n } => all.len() as u64 >= n,
            Requirement::R { e } => {
                let w = OracleWindow::of_finite_set(all.iter().copied());
                cfg.catalog.get(e).run(u128::from(e), &mut &w, cfg.fuel).is_halted()
            }
            _ => unreachable!("EM addresses E and R requirements"),
        }
}

/// Compatibility of `(F, part)` on the whole window. For `R_e` the
/// certificate is the search outcome.
fn window_extension(
    inst: &EmInstance,
    cfg: &ForcingConfig,
    req: Requirement,
    fixed: &[u64],
    part: &[u64],
) -> (Option<Vec<u64>>, Option<Certificate>) {
    match req {
        Requirement::E { n } => {
            let need = (n as usize).saturating_sub(fixed.len());
            (fallow_extension(&|x, y| inst.color(x, y), fixed, part, need, cfg.node_cap), None)
        }
        Requirement::R { e } => {
            let admissible = |s: &[u64]| inst.fallow(s);
            let (found, cert) = halting_question(cfg, e, None, fixed, part, Some(&admissible));
            (found, Some(cert))
        }
        _ => unreachable!("EM addresses E and R requirements"),
    }
}

/// Picks a part that is infinite on the window: each nonempty part but the
/// last is tested against the union of the parts from it on.
pub(crate) fn select_part(
    parts: &[Vec<u64>],
    window: u64,
    beyond: u64,
    cfg: &ForcingConfig,
    certificates: &mut Vec<Certificate>,
) -> usize {
    let nonempty: Vec<usize> = (0..parts.len()).filter(|&i| !parts[i].is_empty()).collect();
    for (pos, &i) in nonempty.iter().enumerate() {
        if pos + 1 == nonempty.len() {
            return i;
        }
        let rest: Vec<u64> = nonempty[pos..].iter().flat_map(|&j| parts[j].iter().copied()).collect();
        let Ok(sel) =
            pi2_select_windows(&indicator(&rest, window), &indicator(&parts[i], window), beyond, cfg.pi2_fuel)
        else {
            continue;
        };
        certificates.push(Certificate::Selection {
            side: sel.side,
            witness: sel.witness,
            defaulted: sel.defaulted,
            on_side: sel.on_side,
            off_side: sel.off_side,
        });
        if sel.side == Side::IntersectSide {
            return i;
        }
    }
    0
}

/// Commits `F ∪ E` and moves the reservoir past the stabilization point.
fn commit(
    state: &mut EmState,
    inst: &EmInstance,
    extension: Vec<u64>,
    certificates: &mut Vec<Certificate>,
) -> Option<String> {
    let all = union(&state.condition.parts[0], &extension);
    let settle: Vec<(u64, u64)> = all.iter().map(|&x| (x, inst.limits[x as usize].1)).collect();
    let m = settle.iter().map(|p| p.1).max().unwrap_or(0);
    let certified = all.iter().all(|&x| inst.limits[x as usize].2);
    state.condition.extend(0, &extension, Some(m));
    let before = state.condition.reservoir.len();
    // every column of F ∪ E constant on the reservoir, F ∪ E ∪ {z} fallow
    state
        .condition
        .reservoir
        .retain(|&z| all.iter().all(|&x| inst.color(x, z) == inst.limit(x)) && inst.fallow(&union(&all, &[z])));
    certificates.push(Certificate::Extension { added: extension });
    certificates.push(Certificate::Stabilization { m, certified, settle });
    let dropped = before - state.condition.reservoir.len();
    (dropped > 0).then(|| format!("{dropped} reservoir elements past m dropped by the column and fallow checks"))
}

pub fn em_step(state: &mut EmState, inst: &EmInstance, cfg: &ForcingConfig) -> Result<StageRecord, ForcingError> {
    let req = requirement(state.stage);
    let k = inst.colors() as usize;
    let fixed = state.condition.parts[0].clone();
    let reservoir = state.condition.reservoir.clone();
    let mut certificates = Vec::new();
    let mut note = None;
    let satisfied = matches!(req, Requirement::E { n } if fixed.len() as u64 >= n);
    let branch = if satisfied {
        Branch::Satisfied
    } else {
        let t_max = question_horizon(reservoir.len(), k as u32, cfg.partition_cap, cfg.subset_cap);
        let head = &reservoir[..t_max];
        let members =
            |mask: usize| -> Vec<u64> { (0..t_max).filter(|b| mask >> b & 1 == 1).map(|b| head[b]).collect() };
        let direct_ok: Vec<bool> =
            (0..1usize << t_max).map(|mask| direct(inst, cfg, req, &union(&fixed, &members(mask)))).collect();
        let good = upward_closure(&direct_ok, t_max);
        let answered_at = (0..=t_max).find(|&t| incompatible_partition((1 << t) - 1, k, &|_, m| good[m]).is_none());
        certificates.push(Certificate::Question { t_max: t_max as u64, answered_at: answered_at.map(|t| t as u64) });
        let limit_parts: Vec<Vec<u64>> =
            (0..k).map(|i| reservoir.iter().copied().filter(|&z| inst.limit(z) as usize == i).collect()).collect();
        if let Some(t) = answered_at {
            let part = |i: usize| (0..t).filter(|&b| inst.limit(head[b]) as usize == i).fold(0usize, |m, b| m | 1 << b);
            let i = (0..k).find(|&i| good[part(i)]).expect("a limit part of a Yes window is compatible");
            let e_mask = submasks_by_size(part(i)).into_iter().find(|&s| direct_ok[s]).expect("compatible part");
            let extension = members(e_mask);
            if let Requirement::R { e } = req {
                certificates.extend(halting_certificate(cfg, e, None, &union(&fixed, &extension)));
            }
            note = commit(state, inst, extension, &mut certificates);
            Branch::Case1
        } else {
            let (whole, whole_cert) = window_extension(inst, cfg, req, &fixed, &reservoir);
            let found = if whole.is_some() {
                (0..k).find_map(|i| match window_extension(inst, cfg, req, &fixed, &limit_parts[i]) {
                    (Some(ext), cert) => Some((ext, cert)),
                    _ => None,
                })
            } else {
                None
            };
            match (found, req) {
                (Some((extension, cert)), _) => {
                    match req {
                        Requirement::R { e } => {
                            certificates.extend(halting_certificate(cfg, e, None, &union(&fixed, &extension)))
                        }
                        _ => certificates.extend(cert),
                    }
                    note = commit(state, inst, extension, &mut certificates);
                    Branch::Case1
                }
                (None, Requirement::E { .. }) => Branch::Stalled,
                (None, _) => {
                    let (parts, chosen) = if whole.is_none() {
                        certificates.extend(whole_cert);
                        let mut parts = vec![Vec::new(); k];
                        parts[0] = reservoir.clone();
                        (parts, 0)
                    } else {
                        let beyond = fixed.last().map_or(0, |m| m + 1);
                        let chosen = select_part(&limit_parts, inst.window, beyond, cfg, &mut certificates);
                        certificates.extend(window_extension(inst, cfg, req, &fixed, &limit_parts[chosen]).1);
                        (limit_parts, chosen)
                    };
                    state.condition.reservoir = parts[chosen].clone();
                    certificates.push(Certificate::Partition { parts, chosen });
                    Branch::Case2
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
        requirement: req,
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
pub struct EmRun {
    pub transcript: Transcript,
    /// `B`, the union of the `F_s`.
    pub fallow_set: Vec<u64>,
}

pub fn run_em(inst: &EmInstance, stages: u64, cfg: &ForcingConfig) -> Result<EmRun, ForcingError> {
    let models = match &cfg.models {
        Some(plan) => model_summaries(&coloring_base(&inst.table), plan)?,
        None => Vec::new(),
    };
    let mut state = EmState::new(inst.window);
    let initial = state.condition.clone();
    let mut records = Vec::new();
    while state.stage < stages && state.stopped.is_none() {
        records.push(em_step(&mut state, inst, cfg)?);
    }
    let instance = inst.instance_data();
    let header = Header {
        kind: ConstructionKind::Em,
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
        schedule: "E+ on even stages, R or N on odd stages".into(),
        models,
        routing: ROUTING.into(),
    };
    let fallow_set = state.condition.parts[0].clone();
    let transcript = Transcript {
        header,
        initial,
        stages: records,
        extraction: Extraction { set: fallow_set.clone(), color: None, stopped: state.stopped },
    };
    Ok(EmRun { transcript, fallow_set })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forcing::conditions::fallow_check;
    use crate::forcing::Fallow;

    fn cfg() -> ForcingConfig {
        ForcingConfig::default().without_models().with_density(1)
    }

    #[test]
    fn constant_coloring_takes_least_elements() {
        let c = Coloring::from_fn("constant", 3, |_, _| 0);
        let inst = EmInstance::new("constant", &c, 40, &cfg()).unwrap();
        let mut state = EmState::new(40);
        state.stage = 4; // E+_3
        let rec = em_step(&mut state, &inst, &cfg()).unwrap();
        assert_eq!(rec.branch, Branch::Case1);
        assert_eq!(rec.condition.parts[0], vec![0, 1, 2]);
    }

    #[test]
    fn constant_coloring_run() {
        let c = Coloring::constant(3, 1);
        let inst = EmInstance::new("constant", &c, 64, &cfg()).unwrap();
        let run = run_em(&inst, 100, &cfg()).unwrap();
        assert!(run.fallow_set.len() >= 10, "{:?}", run.fallow_set);
        assert_eq!(fallow_check(&c, &run.fallow_set), Ok(Fallow::Fallow));
    }

    #[test]
    fn first_coordinate_run() {
        let c = Coloring::from_fn("x mod 3", 3, |x, _| (x % 3) as u8);
        let inst = EmInstance::new("x mod 3", &c, 64, &cfg()).unwrap();
        let run = run_em(&inst, 150, &cfg()).unwrap();
        assert!(run.fallow_set.len() >= 5);
        assert_eq!(fallow_check(&c, &run.fallow_set), Ok(Fallow::Fallow));
    }

    #[test]
    fn never_halting_requirement_goes_negative() {
        let c = Coloring::constant(2, 0);
        let inst = EmInstance::new("constant", &c, 40, &cfg()).unwrap();
        let mut state = EmState::new(40);
        state.stage = 3; // R_1, the diverging program
        let rec = em_step(&mut state, &inst, &cfg()).unwrap();
        assert_eq!(rec.branch, Branch::Case2);
        assert!(rec.certificates.iter().any(|c| matches!(c, Certificate::Negative { e: 1, exhaustive: true, .. })));
    }

    #[test]
    fn columns_of_f_are_constant_on_the_reservoir() {
        // column x flips at 2x + 3 to its limit x mod 2
        let c = Coloring::from_fn("flip", 2, |x, y| if y >= 2 * x + 3 { (x % 2) as u8 } else { ((x + 1) % 2) as u8 })
            .to_table(200)
            .unwrap();
        let inst = EmInstance::new("flip", &c, 48, &cfg()).unwrap();
        let run = run_em(&inst, 60, &cfg()).unwrap();
        assert_eq!(fallow_check(&c, &run.fallow_set), Ok(Fallow::Fallow));
        for rec in &run.transcript.stages {
            for &x in &rec.condition.parts[0] {
                for &z in &rec.condition.reservoir {
                    assert_eq!(c.color(x, z).unwrap(), (x % 2) as u8);
                }
            }
        }
    }
}
