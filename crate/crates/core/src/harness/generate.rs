//! Seeded instance generators. Each generated payload is swept against its
//! declared bound before it is returned, and each generator that has a limit
//! emits it as ground truth.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::coloring::{Coloring, StableColoring};

use super::instance::{build, InstanceBody, InstanceError, InstanceFile, SetSpec};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform table coloring of `[0, size)`.
pub fn random_coloring(seed: u64, colors: u8, size: u64) -> InstanceFile {
    let mut r = rng(seed);
    let rows = (0..size).map(|x| (x + 1..size).map(|_| r.gen_range(0..colors)).collect()).collect();
    InstanceFile::Coloring { name: format!("random {colors}-coloring of {size}"), seed: Some(seed), colors, size, rows }
}

/// A value other than `avoid` below `colors`.
fn other(r: &mut ChaCha8Rng, colors: u8, avoid: u8) -> u8 {
    (avoid + r.gen_range(1..colors)) % colors
}

/// Stable coloring with a limit table and a toggle schedule below the bound.
/// The bound is drawn from `[1, max_bound]`; column `x` settles in
/// `[x + 1, min(bound, x + 8)]`, or at `x + 1` past the bound.
pub fn stable_coloring(seed: u64, colors: u8, size: u64, max_bound: u64) -> StableColoring {
    assert!(colors >= 2 && max_bound >= 1);
    let mut r = rng(seed);
    let bound = r.gen_range(1..=max_bound);
    let (mut limits, mut settle, mut prefix) = (Vec::new(), Vec::new(), Vec::new());
    for x in 0..size {
        let limit = r.gen_range(0..colors);
        let last = bound.min(x + 8).max(x + 1);
        let at = r.gen_range(x + 1..=last);
        let mut row: Vec<u8> = (x + 1..at).map(|_| r.gen_range(0..colors)).collect();
        if let Some(tail) = row.last_mut() {
            if *tail == limit {
                *tail = other(&mut r, colors, limit);
            }
        }
        limits.push(limit);
        settle.push(at);
        prefix.push(row);
    }
    let s = StableColoring { colors, bound, limits, settle, prefix };
    sweep_stable(&s).expect("generated stable coloring honors its bound");
    s
}

/// Confirms `c(x, y) = limits[x]` for all `y` from `max(bound, x + 1)` to a
/// guard past the last settle point, and that no column settles early.
pub fn sweep_stable(s: &StableColoring) -> Result<(), InstanceError> {
    let c = Coloring::Stable(s.clone());
    let guard = s.settle.iter().copied().max().unwrap_or(0).max(s.bound) + 8;
    for x in 0..s.size() {
        let from = s.bound.max(x + 1);
        for y in from..guard.max(from + 8) {
            if c.color(x, y).map_err(|e| InstanceError::Invalid(e.to_string()))? != s.limits[x as usize] {
                return Err(InstanceError::BoundViolation { x, y, bound: s.bound });
            }
        }
        let at = s.settle[x as usize];
        if at > x + 1 && c.color(x, at - 1).ok() == Some(s.limits[x as usize]) {
            return Err(InstanceError::Invalid(format!("column {x} settles before {at}")));
        }
    }
    Ok(())
}

pub fn stable_coloring_file(name: &str, seed: Option<u64>, s: &StableColoring) -> InstanceFile {
    InstanceFile::StableColoring {
        name: name.to_string(),
        seed,
        colors: s.colors,
        bound: s.bound,
        limits: s.limits.clone(),
        settle: s.settle.clone(),
        prefix: s.prefix.clone(),
    }
}

/// Δ⁰₂ k-partition of `[0, range)`: `f(n, s)` toggles until a settle stage
/// `t_n <= bound` and equals the limit from then on. Rows run 8 stages past
/// the bound. Returns the file and the limits.
pub fn delta2_partition(seed: u64, colors: u8, range: u64, max_bound: u64) -> (InstanceFile, Vec<u8>) {
    assert!(colors >= 2);
    let mut r = rng(seed);
    let bound = r.gen_range(0..=max_bound);
    let mut truth = Vec::new();
    let table: Vec<Vec<u8>> = (0..range)
        .map(|_| {
            let limit = r.gen_range(0..colors);
            let at = r.gen_range(0..=bound);
            let mut row: Vec<u8> = (0..at).map(|_| r.gen_range(0..colors)).collect();
            if let Some(tail) = row.last_mut() {
                if *tail == limit {
                    *tail = other(&mut r, colors, limit);
                }
            }
            row.resize((bound + 8) as usize, limit);
            truth.push(limit);
            row
        })
        .collect();
    let file = InstanceFile::Delta2Partition {
        name: format!("random Δ⁰₂ {colors}-partition of {range}"),
        seed: Some(seed),
        colors,
        window: range,
        promised_bound: Some(bound),
        table,
    };
    sweep_delta2(&file, &truth).expect("generated partition honors its bound");
    (file, truth)
}

/// Confirms the promised bound on every stage of every row and that the
/// last stage of each row is the claimed limit.
pub fn sweep_delta2(file: &InstanceFile, truth: &[u8]) -> Result<(), InstanceError> {
    let instance = build(file.clone())?;
    let InstanceBody::Partition { window, presentation } = instance.body else {
        return Err(InstanceError::Invalid("not a partition".into()));
    };
    for n in 0..window {
        let top = presentation.max_stage(n).unwrap_or(0);
        let value = presentation.eval(n, top).map_err(|e| InstanceError::Invalid(e.to_string()))?;
        if truth.get(n as usize) != Some(&value) {
            return Err(InstanceError::Invalid(format!("row {n} ends at {value}, not at its claimed limit")));
        }
    }
    Ok(())
}

/// Decider text for `bit j of n = b`, with `j < 4`.
pub fn bit_decider(j: u8, b: bool) -> String {
    assert!(j < 4);
    let mut lines = vec!["inc r1".to_string()];
    lines.extend((0..j).map(|_| "shr r0".to_string()));
    lines.push(format!("jodd r0 {}", j + 3));
    lines.push(format!("halt {}", if b { "r2" } else { "r1" }));
    lines.push(format!("halt {}", if b { "r1" } else { "r2" }));
    lines.join("\n")
}

/// A seeded bit-pattern decider as a one-set family.
pub fn program_set(seed: u64, window: u64) -> InstanceFile {
    let mut r = rng(seed);
    let (j, b) = (r.gen_range(0..4u8), r.gen_bool(0.5));
    InstanceFile::Family {
        name: format!("bit {j} is {}", u8::from(b)),
        seed: Some(seed),
        window,
        sets: vec![SetSpec {
            name: format!("bit {j} = {}", u8::from(b)),
            members: None,
            program: Some(bit_decider(j, b)),
            fuel: Some(32),
        }],
    }
}

/// `count` sets on `[0, window)`: bit deciders and coin-flip tables.
pub fn random_family(seed: u64, count: usize, window: u64) -> InstanceFile {
    let mut r = rng(seed);
    let mut deciders: Vec<(u8, bool)> = (0..4u8).flat_map(|j| [(j, false), (j, true)]).collect();
    deciders.shuffle(&mut r);
    let sets = (0..count)
        .map(|i| {
            if r.gen_bool(0.5) {
                let (j, b) = deciders[i % deciders.len()];
                SetSpec {
                    name: format!("R{i}: bit {j} = {}", u8::from(b)),
                    members: None,
                    program: Some(bit_decider(j, b)),
                    fuel: Some(32),
                }
            } else {
                let members = (0..window).filter(|_| r.gen_bool(0.5)).collect();
                SetSpec { name: format!("R{i}: coin flips"), members: Some(members), program: None, fuel: None }
            }
        })
        .collect();
    InstanceFile::Family { name: format!("random family of {count}"), seed: Some(seed), window, sets }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::approx::{limit_value, Limit};
    use crate::harness::instance::parse_instance;

    #[test]
    fn bit_deciders_decide() {
        for j in 0..4u8 {
            for b in [false, true] {
                let file = InstanceFile::Family {
                    name: "d".into(),
                    seed: None,
                    window: 64,
                    sets: vec![SetSpec {
                        name: "d".into(),
                        members: None,
                        program: Some(bit_decider(j, b)),
                        fuel: Some(32),
                    }],
                };
                let InstanceBody::Family { sets, .. } = build(file).unwrap().body else { panic!() };
                for n in 0..64u64 {
                    assert_eq!(sets[0].contains(n), Some((n >> j) & 1 == u64::from(b)), "j={j} b={b} n={n}");
                }
            }
        }
    }

    #[test]
    fn generators_are_seed_determined() {
        assert_eq!(random_coloring(3, 2, 10), random_coloring(3, 2, 10));
        assert_eq!(stable_coloring(3, 3, 40, 32), stable_coloring(3, 3, 40, 32));
        assert_eq!(delta2_partition(3, 2, 64, 32), delta2_partition(3, 2, 64, 32));
        assert_eq!(random_family(3, 4, 64), random_family(3, 4, 64));
        assert_ne!(random_coloring(3, 2, 10), random_coloring(4, 2, 10));
    }

    #[test]
    fn generated_files_round_trip_through_the_parser() {
        for seed in 0..10 {
            let s = stable_coloring(seed, 3, 40, 32);
            let file = stable_coloring_file("s", Some(seed), &s);
            assert!(parse_instance(&file.to_toml()).is_ok());
            let (d, _) = delta2_partition(seed, 2, 64, 32);
            assert!(parse_instance(&d.to_toml()).is_ok());
            assert!(parse_instance(&random_family(seed, 4, 64).to_toml()).is_ok());
            assert!(parse_instance(&program_set(seed, 64).to_toml()).is_ok());
            assert!(parse_instance(&random_coloring(seed, 2, 12).to_toml()).is_ok());
        }
    }

    #[test]
    fn partition_truth_matches_limits() {
        let (file, truth) = delta2_partition(11, 2, 64, 32);
        let InstanceBody::Partition { presentation, .. } = build(file).unwrap().body else { panic!() };
        for n in 0..64 {
            match limit_value(&presentation, n, 64).unwrap() {
                Limit::Value { value, .. } => assert_eq!(value, truth[n as usize]),
                Limit::Unstable => panic!("row {n} unstable"),
            }
        }
    }

    #[test]
    fn sweep_catches_a_late_change() {
        let mut s = stable_coloring(5, 2, 20, 10);
        s.bound = 10;
        s.prefix[0] = vec![1 - s.limits[0]; 14];
        s.settle[0] = 15;
        assert_eq!(sweep_stable(&s), Err(InstanceError::BoundViolation { x: 0, y: 10, bound: 10 }));
    }
}
