//! Acceptance suite: one line per criterion with its tolerance and time
//! limit. Runs without the test harness so the lines always print.

mod common;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use workbench::approx::{limit_value, Limit, SetPresentation};
use workbench::classes::{low_basis_path, BitString, LowBasisConfig, PathVerdict, TreePresentation};
use workbench::coloring::Coloring;
use workbench::forcing::{
    fallow_check, rt2_pipeline, run_coh, run_d2, run_em, verify_transcript, Branch, Certificate, CohSchedule,
    D2Instance, EmInstance, Fallow, ForcingConfig, Grade, Requirement, SelectionRule, Transcript,
};
use workbench::harness::generate;
use workbench::harness::instance::{build, InstanceBody};
use workbench::harness::oracle::{cohesive_check, homogeneous_among, Optimum};
use workbench::harness::persist::{emit_transcript, load_transcript};
use workbench::machine::library::{random_forward_program, random_program};
use workbench::machine::{OracleWindow, RunOutcome};
use workbench::omega_model::{audit, build_model, join_law_violations, untriple, CodedModelApprox, ModelConfig, Side};

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Transcripts of criteria 5 to 8 with their jump-ledger problems and the
/// time spent replaying them.
#[derive(Default)]
struct Ledger {
    transcripts: Vec<(String, Transcript)>,
    problems: Vec<String>,
    refuted: usize,
    replay_time: Duration,
}

impl Ledger {
    fn record(&mut self, label: String, t: Transcript) {
        let start = Instant::now();
        let audit = verify_transcript(&t, 2 * t.header.fuel);
        self.refuted += audit.count(Grade::Refuted);
        for f in audit.refuted() {
            self.problems.push(format!("{label}: {} {}", f.check, f.detail));
        }
        for p in common::jump_ledger_problems(&t, 2 * t.header.fuel, 12) {
            self.problems.push(format!("{label}: {p}"));
        }
        self.replay_time += start.elapsed();
        self.transcripts.push((label, t));
    }
}

fn c1_machine() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut halted, mut perturbed) = (0, 0);
    for pair in 0..1000 {
        let len = rng.gen_range(2..=16);
        let p = if pair % 2 == 0 { random_program(&mut rng, len) } else { random_forward_program(&mut rng, len) };
        let x: u128 = rng.gen_range(0..64);
        let bits: Vec<bool> = (0..64).map(|_| rng.gen_bool(0.5)).collect();
        let w = OracleWindow::new(bits.clone());
        let full = p.run(x, &mut &w, 256);
        let same =
            |a: &RunOutcome, b: &RunOutcome| a.status == b.status && a.steps == b.steps && a.use_bound == b.use_bound;
        for fuel in 1..=256 {
            let r = p.run(x, &mut &w, fuel);
            match full.halted() {
                Some(_) if fuel >= full.steps => {
                    ensure(same(&r, &full), || format!("pair {pair}: fuel {fuel} differs"))?
                }
                _ => ensure(!r.is_halted(), || format!("pair {pair}: halts at fuel {fuel} only"))?,
            }
        }
        halted += usize::from(full.is_halted());
        let used = full.use_bound.min(64) as usize;
        for _ in 0..3 {
            let mut other = bits.clone();
            other[used..].iter_mut().for_each(|b| *b = rng.gen_bool(0.5));
            let r = p.run(x, &mut &OracleWindow::new(other), 256);
            ensure(same(&r, &full), || format!("pair {pair}: bits above use {used} change the run"))?;
            perturbed += 1;
        }
    }
    Ok(format!("1000 pairs ({halted} halting), 256 fuels each, {perturbed} perturbed reruns"))
}

fn c2_limit_lemma() -> Check {
    for seed in 0..50 {
        let (file, truth) = generate::delta2_partition(seed, 2, 64, 32);
        let InstanceBody::Partition { presentation, .. } = build(file).map_err(|e| e.to_string())?.body else {
            unreachable!()
        };
        for n in 0..64 {
            let got = limit_value(&presentation, n, 64).map_err(|e| e.to_string())?;
            ensure(got.value() == Some(truth[n as usize]), || format!("seed {seed}: n = {n} gives {got:?}"))?;
            ensure(matches!(got, Limit::Value { .. }), || format!("seed {seed}: n = {n} unstable"))?;
        }
    }
    Ok("50 presentations x 64 points agree with ground truth".into())
}

fn c3_low_basis() -> Check {
    let cfg = LowBasisConfig::default();
    let mut halts = 0;
    for seed in 0..20 {
        let mut rng = ChaCha8Rng::seed_from_u64(300 + seed);
        let count = rng.gen_range(1..=48);
        let leaves: BTreeSet<BitString> =
            (0..count).map(|_| BitString((0..12).map(|_| rng.gen_bool(0.5)).collect())).collect();
        let tree = TreePresentation::from_leaves(12, &leaves);
        let got = low_basis_path(&tree, 6, 12, &cfg).map_err(|e| e.to_string())?;
        let want = common::exhaustive_low_basis(&tree, 6, 12, &cfg.catalog, cfg.fuel).ok_or("empty tree")?;
        ensure(got == want, || format!("tree {seed}: {got:?} vs {want:?}"))?;
        halts += got.1.decisions.iter().filter(|d| matches!(d.verdict, PathVerdict::Halts { .. })).count();
    }
    Ok(format!("20 trees, paths and logs identical ({halts} halting decisions)"))
}

/// Base row and join rows read straight off the node bits.
fn node_conditions(m: &CodedModelApprox) -> Result<(), String> {
    let row0 = m.row(0);
    for (x, &b) in row0.iter().enumerate() {
        ensure(m.base.contains(x as u64) == Some(b), || format!("{}: row 0 wrong at {x}", m.base.name))?;
    }
    for r in 1..m.row_count() {
        if let Some((0, i, j)) = untriple(r) {
            let (row, wi, wj) = (m.row(r), m.row(i), m.row(j));
            for (x, &b) in row.iter().enumerate() {
                let src = if x % 2 == 0 { wi.get(x / 2) } else { wj.get(x / 2) };
                ensure(src.is_none_or(|&s| s == b), || format!("{}: join row {r} wrong at {x}", m.base.name))?;
            }
        }
    }
    let findings = audit(m).map_err(|e| e.to_string())?;
    ensure(findings.is_empty(), || format!("{}: {findings:?}", m.base.name))?;
    let joins = join_law_violations(m, m.row_count());
    ensure(joins.is_empty(), || format!("{}: {joins:?}", m.base.name))
}

fn c4_models() -> Check {
    let InstanceBody::Family { mut sets, .. } = build(generate::program_set(4, 64)).map_err(|e| e.to_string())?.body
    else {
        unreachable!()
    };
    let bases = [SetPresentation::evens(64), SetPresentation::primes(64), sets.remove(0)];
    let mut audited = 0;
    for a in &bases {
        for low in [false, true] {
            let m = build_model(a, 200, low, ModelConfig::default()).map_err(|e| e.to_string())?;
            node_conditions(&m)?;
            let inner = SetPresentation::from_table("inner node", m.node().0.clone());
            let outer = build_model(&inner, 400, false, ModelConfig::default()).map_err(|e| e.to_string())?;
            node_conditions(&outer)?;
            audited += 2;
        }
    }
    Ok(format!("{audited} models (depth 200 and nested depth 400) pass node and join audits"))
}

fn c5_coh(ledger: &mut Ledger) -> Check {
    let cfg = ForcingConfig::default();
    let mut sizes = Vec::new();
    for seed in 0..3 {
        let InstanceBody::Family { window, sets } =
            build(generate::random_family(seed, 4, 512)).map_err(|e| e.to_string())?.body
        else {
            unreachable!()
        };
        let run = run_coh(&sets, window, 60, &cfg, CohSchedule::RoundRobin, SelectionRule::Pi2Search)
            .map_err(|e| e.to_string())?;
        let t = &run.transcript;
        for e in 0..=3u64 {
            let find = |req: Requirement| t.stages.iter().find(|r| r.requirement == req);
            let ee = find(Requirement::E { n: e }).ok_or(format!("seed {seed}: E_{e} not reached"))?;
            ensure(matches!(ee.branch, Branch::Satisfied | Branch::EExtension), || format!("E_{e} {:?}", ee.branch))?;
            let r = find(Requirement::R { e }).ok_or(format!("seed {seed}: R_{e} not reached"))?;
            ensure(matches!(r.branch, Branch::Case1 | Branch::Case2), || format!("R_{e} {:?}", r.branch))?;
            let d = find(Requirement::D { n: e }).ok_or(format!("seed {seed}: D_{e} not reached"))?;
            let side = d.certificates.iter().find_map(|c| match c {
                Certificate::Selection { side, .. } => Some(*side),
                _ => None,
            });
            let side = side.ok_or(format!("seed {seed}: D_{e} has no selection"))?;
            let Optimum::Exceptions(ex) = cohesive_check(&run.cohesive, &sets).optimum else { unreachable!() };
            let f = &d.condition.parts[0];
            let exceptions = match side {
                Side::IntersectSide => &ex[e as usize].outside,
                Side::ComplementSide => &ex[e as usize].inside,
            };
            ensure(exceptions.iter().all(|x| f.contains(x)), || {
                format!("seed {seed}: D_{e} exceptions {exceptions:?} outside F = {f:?}")
            })?;
        }
        ensure(run.cohesive.len() >= 8, || format!("seed {seed}: |C| = {}", run.cohesive.len()))?;
        sizes.push(run.cohesive.len());
        ledger.record(format!("coh {seed}"), run.transcript);
    }
    Ok(format!("3 families of 4 sets on [0, 512): |C| = {sizes:?}"))
}

fn c6_em(ledger: &mut Ledger) -> Check {
    let cfg = ForcingConfig::default().with_density(1);
    let mut least = usize::MAX;
    for seed in 0..100 {
        let c = Coloring::Stable(generate::stable_coloring(seed, 3, 40, 32));
        let inst = EmInstance::new(&format!("stable {seed}"), &c, 40, &cfg).map_err(|e| e.to_string())?;
        let run = run_em(&inst, 200, &cfg).map_err(|e| e.to_string())?;
        let b = &run.fallow_set;
        ensure(b.len() >= 5, || format!("seed {seed}: |B| = {}", b.len()))?;
        ensure(fallow_check(&c, b) == Ok(Fallow::Fallow), || format!("seed {seed}: B not fallow"))?;
        least = least.min(b.len());
        ledger.record(format!("em {seed}"), run.transcript);
    }
    Ok(format!("100 runs, least |B| = {least}, all fallow"))
}

fn c7_d2(ledger: &mut Ledger) -> Check {
    let cfg = ForcingConfig::default().with_density(1);
    let mut least = usize::MAX;
    for seed in 0..50 {
        let (file, truth) = generate::delta2_partition(1000 + seed, 2, 64, 32);
        let InstanceBody::Partition { window, presentation } = build(file).map_err(|e| e.to_string())?.body else {
            unreachable!()
        };
        let inst =
            D2Instance::new(&format!("partition {seed}"), presentation, window, &cfg).map_err(|e| e.to_string())?;
        let run = run_d2(&inst, 300, &cfg).map_err(|e| e.to_string())?;
        let color = run.color.ok_or(format!("seed {seed}: no color selected"))?;
        ensure(run.set.iter().all(|&x| truth[x as usize] == color), || format!("seed {seed}: B leaves A_{color}"))?;
        ensure(run.set.len() >= 6, || format!("seed {seed}: |B| = {}", run.set.len()))?;
        for r in &run.transcript.stages {
            let sum: u64 = r.counters.as_ref().ok_or("stage without counters")?.iter().sum();
            ensure(sum <= r.stage + 1, || format!("seed {seed}: counters sum {sum} after stage {}", r.stage))?;
        }
        least = least.min(run.set.len());
        ledger.record(format!("d2 {seed}"), run.transcript);
    }
    Ok(format!("50 runs, least |B| = {least}, B inside its part, counters bounded"))
}

fn c8_rt2(ledger: &mut Ledger) -> Check {
    let cfg = ForcingConfig::default();
    let mut least = usize::MAX;
    for seed in 0..30 {
        let InstanceBody::Coloring(c) = build(generate::random_coloring(seed, 2, 48)).map_err(|e| e.to_string())?.body
        else {
            unreachable!()
        };
        let run = rt2_pipeline(&c, 48, 200, &cfg).map_err(|e| e.to_string())?;
        let h = &run.homogeneous;
        ensure(h.len() >= 4, || format!("seed {seed}: |H| = {}", h.len()))?;
        let brute = homogeneous_among(&c, h).map_err(|e| e.to_string())?;
        ensure(brute.size == h.len(), || format!("seed {seed}: H = {h:?} is not monochromatic"))?;
        least = least.min(h.len());
        ledger.record(format!("rt2 coh {seed}"), run.coh);
        ledger.record(format!("rt2 d2 {seed}"), run.d2);
    }
    Ok(format!("30 colorings of [0, 48), least |H| = {least}, all monochromatic"))
}

fn c9_ledger(ledger: &Ledger) -> Check {
    let (mut positive, mut negative) = (0, 0);
    for (_, t) in &ledger.transcripts {
        for c in t.stages.iter().flat_map(|r| &r.certificates) {
            match c {
                Certificate::Halting { .. } => positive += 1,
                Certificate::Negative { .. } => negative += 1,
                _ => {}
            }
        }
    }
    ensure(ledger.problems.is_empty() && ledger.refuted == 0, || format!("{:?}", ledger.problems))?;
    Ok(format!(
        "{} transcripts: {positive} positive replays, {negative} negatives re-audited at 2x fuel, 0 refuted ({:.2}s)",
        ledger.transcripts.len(),
        ledger.replay_time.as_secs_f64()
    ))
}

fn c10_determinism(ledger: &Ledger) -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut second = Ledger::default();
    c5_coh(&mut second)?;
    c6_em(&mut second)?;
    c7_d2(&mut second)?;
    c8_rt2(&mut second)?;
    ensure(second.transcripts.len() == ledger.transcripts.len(), || "run count differs".into())?;
    for ((label, a), (_, b)) in ledger.transcripts.iter().zip(&second.transcripts) {
        ensure(a.hash() == b.hash(), || format!("{label}: hashes differ"))?;
    }
    for (i, (label, t)) in ledger.transcripts.iter().enumerate().step_by(25) {
        let path = dir.path().join(format!("{i}.json"));
        let hash = emit_transcript(t, &path).map_err(|e| e.to_string())?;
        ensure(hash == t.hash(), || format!("{label}: file hash differs"))?;
        ensure(load_transcript(&path).map_err(|e| e.to_string())? == *t, || format!("{label}: round trip"))?;
    }
    let cfg = LowBasisConfig::default();
    let tree = TreePresentation::excluding(&["11"]);
    ensure(low_basis_path(&tree, 6, 12, &cfg) == low_basis_path(&tree, 6, 12, &cfg), || "low basis".into())?;
    let model = || build_model(&SetPresentation::primes(64), 200, true, ModelConfig::default()).unwrap();
    ensure(model() == model(), || "model build".into())?;
    Ok(format!("{} transcripts rerun with identical hashes; files round-trip", ledger.transcripts.len()))
}

struct Suite {
    failures: usize,
}

impl Suite {
    fn run(&mut self, n: u32, name: &str, tolerance: &str, limit: Option<u64>, f: impl FnOnce() -> Check) {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or(p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default())
        });
        let secs = start.elapsed().as_secs_f64();
        let in_time = limit.is_none_or(|l| secs < l as f64);
        let pass = result.is_ok() && in_time;
        self.failures += usize::from(!pass);
        let limit = limit.map_or("within the runs above".to_string(), |l| format!("limit {l}s"));
        let detail = match &result {
            Ok(d) if in_time => d.clone(),
            Ok(d) => format!("{d}; over time"),
            Err(e) => e.clone(),
        };
        println!(
            "criterion {n:>2} {}: {name} [{tolerance}; {secs:.2}s, {limit}] {detail}",
            if pass { "PASS" } else { "FAIL" }
        );
    }
}

fn main() {
    let mut suite = Suite { failures: 0 };
    let mut ledger = Ledger::default();
    suite.run(1, "machine soundness", "exact", Some(10), c1_machine);
    suite.run(2, "limit-lemma round trip", "exact", Some(10), c2_limit_lemma);
    suite.run(3, "low basis oracle equivalence", "exact", Some(60), c3_low_basis);
    suite.run(4, "coded model audit", "exact", Some(30), c4_models);
    suite.run(5, "COH construction", "exact on window", Some(30), || c5_coh(&mut ledger));
    suite.run(6, "EM construction", "exact", Some(120), || c6_em(&mut ledger));
    suite.run(7, "D2 construction", "exact", Some(120), || c7_d2(&mut ledger));
    suite.run(8, "RT2 pipeline", "exact", Some(120), || c8_rt2(&mut ledger));
    suite.run(9, "jump-control ledger", "exact", None, || c9_ledger(&ledger));
    suite.run(10, "determinism", "exact", None, || c10_determinism(&ledger));
    if suite.failures > 0 {
        println!("{} criteria failed", suite.failures);
        std::process::exit(1);
    }
    println!("all 10 criteria pass");
}
