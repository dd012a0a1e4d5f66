//! Transcript audit. Re-checks a transcript from its embedded instance with
//! the machine, the limit readers and plain enumeration; nothing here calls
//! the construction steps.

use serde::{Deserialize, Serialize};

use crate::approx::{limit_value, stable_color_limit, Limit};
use crate::machine::OracleWindow;

use super::conditions::{extends, fallow_violation, ColorTable, Condition, Extends};
use super::search::{ExtensionSearch, SearchOutcome};
use super::transcript::{Branch, Certificate, ConstructionKind, InstanceData, Requirement, StageRecord, Transcript};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Grade {
    Certified,
    Provisional,
    Refuted,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Finding {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stage: Option<u64>,
    pub check: String,
    pub grade: Grade,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditReport {
    pub transcript_hash: String,
    pub audit_fuel: u64,
    pub findings: Vec<Finding>,
}

impl AuditReport {
    pub fn count(&self, grade: Grade) -> usize {
        self.findings.iter().filter(|f| f.grade == grade).count()
    }

    pub fn refuted(&self) -> Vec<&Finding> {
        self.findings.iter().filter(|f| f.grade == Grade::Refuted).collect()
    }

    /// 0 when everything is certified, 1 with provisional findings, 2 with
    /// refuted ones.
    pub fn exit_code(&self) -> i32 {
        match self.findings.iter().map(|f| f.grade).max() {
            Some(Grade::Refuted) => 2,
            Some(Grade::Provisional) => 1,
            _ => 0,
        }
    }
}

/// Negative decisions are also checked on every `D` of at most two elements
/// drawn from this many leading reservoir elements.
const BRUTE_PREFIX: usize = 24;

struct Auditor<'a> {
    t: &'a Transcript,
    audit_fuel: u64,
    findings: Vec<Finding>,
    /// Colors of the instance table, for fallowness.
    table: Option<&'a ColorTable>,
}

fn is_subset(a: &[u64], b: &[u64]) -> bool {
    a.iter().all(|x| b.contains(x))
}

fn union(a: &[u64], b: &[u64]) -> Vec<u64> {
    let mut all: Vec<u64> = a.iter().chain(b).copied().collect();
    all.sort_unstable();
    all.dedup();
    all
}

impl Auditor<'_> {
    fn push(&mut self, stage: Option<u64>, check: &str, grade: Grade, detail: impl Into<String>) {
        self.findings.push(Finding { stage, check: check.into(), grade, detail: detail.into() });
    }

    fn expect(&mut self, stage: Option<u64>, check: &str, ok: bool, detail: impl Into<String>) {
        let grade = if ok { Grade::Certified } else { Grade::Refuted };
        self.push(stage, check, grade, detail);
    }

    fn fallow(&self, sorted: &[u64]) -> bool {
        self.table.map_or(true, |t| fallow_violation(|x, y| t.get(x, y), sorted).is_none())
    }

    fn header(&mut self) {
        let h = &self.t.header;
        self.expect(None, "instance hash", h.instance.hash() == h.instance_hash, &h.instance_hash);
        let window = h.instance.window();
        let init = &self.t.initial;
        self.expect(
            None,
            "initial condition",
            init.parts.iter().all(Vec::is_empty) && init.reservoir.iter().all(|&z| z < window),
            format!("{} parts, reservoir of {}", init.parts.len(), init.reservoir.len()),
        );
        for m in &h.models {
            self.expect(
                None,
                "model audit",
                m.audit_findings == 0,
                format!("{} model over {} at depth {}: {} findings", m.role, m.base, m.depth, m.audit_findings),
            );
        }
    }

    fn chain(&mut self) {
        let mut prev = &self.t.initial;
        for rec in &self.t.stages {
            let s = Some(rec.stage);
            match extends(&rec.condition, prev) {
                Extends::Holds => {}
                Extends::Fails(why) | Extends::Inconclusive(why) => {
                    self.push(s, "extension order", Grade::Refuted, why);
                }
            }
            if !rec.condition.separated() {
                self.push(s, "max F < min I", Grade::Refuted, "a finite part reaches into the reservoir");
            }
            prev = &rec.condition;
        }
        self.push(None, "extension order", Grade::Certified, format!("{} stages", self.t.stages.len()));
    }

    /// The set the jump ledger is read against for `color`.
    fn final_part(&self, color: Option<u8>) -> Vec<u64> {
        self.t.final_condition().parts[color.unwrap_or(0) as usize].clone()
    }

    fn halting(&mut self, rec: &StageRecord, cert: &Certificate) {
        let Certificate::Halting { e, color, oracle, value, steps, use_bound, fuel } = cert else {
            return;
        };
        let s = Some(rec.stage);
        let program = self.t.header.catalog.get(*e);
        let w = OracleWindow::of_finite_set(oracle.iter().copied());
        let out = program.run(u128::from(*e), &mut &w, *fuel);
        let replays = out.halted() == Some(*value) && out.steps == *steps && out.use_bound == *use_bound;
        self.expect(s, "halting replay", replays, format!("R_{e} on {oracle:?}"));
        let part = &rec.condition.parts[color.unwrap_or(0) as usize];
        self.expect(s, "halting oracle is the finite part", oracle == part, format!("R_{e}"));
        let fin = self.final_part(*color);
        let w = OracleWindow::of_finite_set(fin.iter().copied());
        let again = program.run(u128::from(*e), &mut &w, *fuel);
        self.expect(s, "jump ledger", again.halted() == Some(*value), format!("R_{e} on the extracted set"));
    }

    fn negative(&mut self, rec: &StageRecord, cert: &Certificate) {
        let Certificate::Negative { e, color, fixed, reservoir, fallow, exhaustive, .. } = cert else {
            return;
        };
        let s = Some(rec.stage);
        let part = &rec.condition.parts[color.unwrap_or(0) as usize];
        self.expect(
            s,
            "negative decision covers the condition",
            fixed == part && is_subset(&rec.condition.reservoir, reservoir),
            format!("N_{e}"),
        );
        let program = self.t.header.catalog.get(*e);
        let fuel = self.audit_fuel;
        let admissible = |set: &[u64]| self.fallow(set);
        let search = ExtensionSearch {
            program: &program,
            input: u128::from(*e),
            fixed,
            candidates: reservoir,
            fuel,
            node_cap: self.t.header.node_cap.saturating_mul(2),
            admissible: fallow.then_some(&admissible as &dyn Fn(&[u64]) -> bool),
        };
        match search.run() {
            SearchOutcome::Found { extension, .. } => {
                self.push(s, "negative re-search", Grade::Refuted, format!("N_{e}: {extension:?} halts at fuel {fuel}"))
            }
            SearchOutcome::NotFound { exhaustive: true, .. } if *exhaustive => {
                self.push(s, "negative re-search", Grade::Certified, format!("N_{e} at fuel {fuel}"))
            }
            SearchOutcome::NotFound { .. } => {
                self.push(s, "negative re-search", Grade::Provisional, format!("N_{e}: node cap reached"))
            }
        }
        // every D of at most two elements from the head of the reservoir
        let head = &reservoir[..reservoir.len().min(BRUTE_PREFIX)];
        let mut sets: Vec<Vec<u64>> = vec![vec![]];
        for (a, &x) in head.iter().enumerate() {
            sets.push(vec![x]);
            sets.extend(head[a + 1..].iter().map(|&y| vec![x, y]));
        }
        let refuting = sets.into_iter().find(|d| {
            let all = union(fixed, d);
            (!*fallow || self.fallow(&all))
                && program.run(u128::from(*e), &mut &OracleWindow::of_finite_set(all.iter().copied()), fuel).is_halted()
        });
        match refuting {
            Some(d) => self.push(s, "negative enumeration", Grade::Refuted, format!("N_{e}: {d:?} halts")),
            None => self.push(s, "negative enumeration", Grade::Certified, format!("N_{e}")),
        }
        let fin = self.final_part(*color);
        let halts =
            program.run(u128::from(*e), &mut &OracleWindow::of_finite_set(fin.iter().copied()), fuel).is_halted();
        self.expect(s, "jump ledger", !halts, format!("N_{e} on the extracted set"));
    }

    fn stage_certificates(&mut self, prev: &Condition, rec: &StageRecord) {
        let s = Some(rec.stage);
        for cert in &rec.certificates {
            match cert {
                Certificate::Halting { .. } => self.halting(rec, cert),
                Certificate::Negative { .. } => self.negative(rec, cert),
                Certificate::Question { t_max, .. } => {
                    let k = rec.condition.parts.len().max(self.colors()) as u64;
                    let ok = k.checked_pow(*t_max as u32).is_some_and(|p| p <= self.t.header.partition_cap)
                        && 2u64.checked_pow(*t_max as u32).is_some_and(|p| p <= self.t.header.subset_cap);
                    self.expect(s, "question horizon within caps", ok, format!("t = {t_max}"));
                }
                Certificate::Partition { parts, chosen } => {
                    let mut all: Vec<u64> = parts.concat();
                    all.sort_unstable();
                    let disjoint = all.windows(2).all(|w| w[0] < w[1]);
                    let ok = disjoint && all == prev.reservoir && parts.get(*chosen) == Some(&rec.condition.reservoir);
                    self.expect(s, "partition of the reservoir", ok, format!("part {chosen} of {}", parts.len()));
                }
                Certificate::Selection { defaulted: true, .. } => {
                    self.push(s, "selection", Grade::Provisional, "the search found no cut; complement side taken")
                }
                Certificate::Selection { .. } | Certificate::Extension { .. } | Certificate::Stabilization { .. } => {}
            }
        }
    }

    fn colors(&self) -> usize {
        match &self.t.header.instance {
            InstanceData::Coloring { table, .. } => table.colors as usize,
            InstanceData::Partition { presentation, .. } => presentation.colors as usize,
            InstanceData::Family { .. } => 1,
        }
    }

    /// Case 1 carries its witness and, outside COH, the stabilization point.
    fn case1_witness(&mut self, prev: &Condition, rec: &StageRecord) {
        let s = Some(rec.stage);
        let grown: Vec<u64> = rec
            .condition
            .parts
            .iter()
            .zip(&prev.parts)
            .flat_map(|(new, old)| new.iter().filter(|x| !old.contains(x)).copied().collect::<Vec<_>>())
            .collect();
        let mut added: Vec<u64> = rec
            .certificates
            .iter()
            .filter_map(|c| match c {
                Certificate::Extension { added } => Some(added.clone()),
                _ => None,
            })
            .flatten()
            .collect();
        added.sort_unstable();
        let mut grown_sorted = grown.clone();
        grown_sorted.sort_unstable();
        self.expect(s, "extension witness", added == grown_sorted, format!("{grown_sorted:?}"));
        if self.t.header.kind != ConstructionKind::Coh && !grown.is_empty() {
            let has_m = rec.certificates.iter().any(|c| matches!(c, Certificate::Stabilization { .. }));
            self.expect(s, "stabilization point recorded", has_m, "");
        }
    }

    fn coh(&mut self, sets: &[Vec<u64>]) {
        let cohesive = self.final_part(None);
        let mut prev = self.t.initial.clone();
        for rec in &self.t.stages {
            let s = Some(rec.stage);
            match (rec.requirement, rec.branch) {
                (Requirement::D { n }, Branch::DRestriction) => {
                    let r = &sets[n as usize];
                    let inside = rec.condition.reservoir.iter().filter(|z| r.binary_search(z).is_ok()).count();
                    let one_sided = inside == 0 || inside == rec.condition.reservoir.len();
                    self.expect(s, "D restriction", one_sided, format!("D_{n}"));
                    let later: Vec<u64> =
                        cohesive.iter().filter(|x| !rec.condition.parts[0].contains(x)).copied().collect();
                    let later_in = later.iter().filter(|z| r.binary_search(z).is_ok()).count();
                    let confined = if inside > 0 { later_in == later.len() } else { later_in == 0 };
                    self.expect(s, "cohesive exceptions confined to F_s", confined, format!("D_{n}"));
                }
                (Requirement::D { n }, Branch::Vacuous) => {
                    self.expect(s, "vacuous D", n as usize >= sets.len(), format!("D_{n}"))
                }
                (Requirement::E { n }, Branch::Satisfied | Branch::EExtension) => {
                    let ok = rec.condition.parts[0].len() as u64 >= n;
                    self.expect(s, "E requirement", ok, format!("E_{n}"));
                }
                (_, Branch::Stalled) => self.push(s, "stalled", Grade::Provisional, format!("{:?}", rec.requirement)),
                (Requirement::R { .. }, Branch::Case1) => self.case1_witness(&prev, rec),
                _ => {}
            }
            self.stage_certificates(&prev, rec);
            prev = rec.condition.clone();
        }
    }

    fn em(&mut self, table: &ColorTable, bound: Option<u64>) {
        let working = table.to_coloring(bound);
        let budget = self.t.header.stages.max(256).min(table.size - 1);
        let limit = |x: u64| stable_color_limit(&working, x, budget).ok();
        let mut prev = self.t.initial.clone();
        for rec in &self.t.stages {
            let s = Some(rec.stage);
            let f = &rec.condition.parts[0];
            if let Some((x, y, z)) = fallow_violation(|x, y| table.get(x, y), f) {
                self.push(s, "fallow", Grade::Refuted, format!("({x}, {y}, {z})"));
            }
            for &z in &rec.condition.reservoir {
                if !self.fallow(&union(f, &[z])) {
                    self.push(s, "fallow with one reservoir point", Grade::Refuted, format!("z = {z}"));
                    break;
                }
            }
            for &x in f {
                let mut colors = rec.condition.reservoir.iter().map(|&z| table.get(x, z));
                if let Some(first) = colors.next() {
                    if colors.any(|c| c != first) {
                        self.push(s, "columns of F constant on I", Grade::Refuted, format!("x = {x}"));
                    }
                }
            }
            match (rec.requirement, rec.branch) {
                (Requirement::E { n }, Branch::Satisfied | Branch::Case1) => {
                    self.expect(s, "E requirement", f.len() as u64 >= n, format!("E+_{n}"))
                }
                (_, Branch::Stalled) => self.push(s, "stalled", Grade::Provisional, format!("{:?}", rec.requirement)),
                _ => {}
            }
            if rec.branch == Branch::Case1 {
                self.case1_witness(&prev, rec);
            }
            for cert in &rec.certificates {
                if let Certificate::Stabilization { m, certified, settle } = cert {
                    let ok = settle
                        .iter()
                        .all(|&(x, at)| matches!(limit(x), Some(Limit::Value { at: a, .. }) if a == at && at <= *m))
                        && rec.condition.reservoir.iter().all(|z| z > m);
                    self.expect(s, "stabilization point", ok, format!("m = {m}"));
                    if !certified {
                        self.push(s, "stabilization point", Grade::Provisional, "no declared bound");
                    }
                }
            }
            self.stage_certificates(&prev, rec);
            prev = rec.condition.clone();
        }
        let b = &self.t.extraction.set;
        self.expect(
            None,
            "extracted set is fallow",
            fallow_violation(|x, y| table.get(x, y), b).is_none(),
            format!("|B| = {}", b.len()),
        );
    }

    fn d2(&mut self, presentation: &crate::approx::Delta2Presentation, budget: u64) {
        let generous = budget.saturating_mul(2);
        let limit = |x: u64| limit_value(presentation, x, generous).ok().and_then(|l| l.value());
        let mut prev = self.t.initial.clone();
        for rec in &self.t.stages {
            let s = Some(rec.stage);
            for (i, part) in rec.condition.parts.iter().enumerate() {
                for &x in part.iter().filter(|x| !prev.parts[i].contains(x)) {
                    self.expect(s, "F^i inside A_i", limit(x) == Some(i as u8), format!("{x} in color {i}"));
                }
            }
            match &rec.counters {
                Some(c) => {
                    let sum: u64 = c.iter().sum();
                    self.expect(s, "counter sum", sum <= rec.stage + 1, format!("{c:?}"));
                }
                None => self.push(s, "counter sum", Grade::Refuted, "no counters"),
            }
            match rec.branch {
                Branch::Case1 => self.case1_witness(&prev, rec),
                Branch::Stalled => self.push(s, "stalled", Grade::Provisional, format!("{:?}", rec.requirement)),
                _ => {}
            }
            if let Some((i, n)) = rec.requirement.j_as_e() {
                if matches!(rec.branch, Branch::Case1 | Branch::Satisfied) {
                    let ok = rec.condition.parts[i as usize].len() as u64 >= n;
                    self.expect(s, "E requirement", ok, format!("E^{i},+_{n}"));
                }
                if rec.branch == Branch::Case2 {
                    self.push(s, "E requirement", Grade::Refuted, "E⁺ taken negatively");
                }
            }
            self.stage_certificates(&prev, rec);
            prev = rec.condition.clone();
        }
        // max counter, least index
        let counters = self.t.stages.last().and_then(|r| r.counters.clone()).unwrap_or_default();
        let best = counters.iter().max().copied().unwrap_or(0);
        let expected = (best > 0).then(|| counters.iter().position(|&c| c == best).unwrap() as u8);
        self.expect(None, "selected color", expected == self.t.extraction.color, format!("{expected:?}"));
        let set = expected.map_or_else(Vec::new, |i| self.final_part(Some(i)));
        self.expect(None, "extracted set", set == self.t.extraction.set, format!("|B| = {}", set.len()));
    }
}

pub fn verify_transcript(t: &Transcript, audit_fuel: u64) -> AuditReport {
    let table = match &t.header.instance {
        InstanceData::Coloring { table, .. } => Some(table),
        _ => None,
    };
    let mut a = Auditor { t, audit_fuel, findings: Vec::new(), table };
    a.header();
    a.chain();
    match (&t.header.kind, &t.header.instance) {
        (ConstructionKind::Coh, InstanceData::Family { sets, .. }) => a.coh(sets),
        (ConstructionKind::Em, InstanceData::Coloring { table, bound, .. }) => a.em(table, *bound),
        (ConstructionKind::D2, InstanceData::Partition { presentation, limit_budget, .. }) => {
            a.d2(presentation, *limit_budget)
        }
        (kind, _) => a.push(None, "instance kind", Grade::Refuted, format!("{kind:?} with a mismatched instance")),
    }
    if t.header.kind != ConstructionKind::D2 {
        let fin = a.final_part(None);
        a.expect(None, "extracted set", fin == t.extraction.set, format!("{} elements", fin.len()));
    }
    if let Some(why) = &t.extraction.stopped {
        a.push(None, "run stopped early", Grade::Provisional, why.clone());
    }
    AuditReport { transcript_hash: t.hash(), audit_fuel, findings: a.findings }
}
