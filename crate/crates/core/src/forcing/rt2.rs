//! Homogeneous sets for computable colorings of pairs: COH on the columns,
//! then D² on the induced limit partition of the cohesive set.

use crate::approx::{Delta2Presentation, SetPresentation};
use crate::coloring::Coloring;

use super::coh::{run_coh, CohSchedule, SelectionRule};
use super::conditions::ColorTable;
use super::d2::{run_d2, D2Instance};
use super::transcript::Transcript;
use super::{ForcingConfig, ForcingError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rt2Run {
    pub coh: Transcript,
    pub d2: Transcript,
    /// `C`, cohesive for the columns.
    pub cohesive: Vec<u64>,
    /// Induced limit color of each element of `C` below the window edge.
    pub limits: Vec<u8>,
    /// `B` from D² and its color.
    pub d2_color: Option<u8>,
    pub d2_set: Vec<u64>,
    pub color: Option<u8>,
    /// Homogeneous set, checked on every pair.
    pub homogeneous: Vec<u64>,
}

/// Columns `{y > x : c(x, y) = j + 1}` for `j < k - 1`, indexed `x·(k-1) + j`.
fn columns(table: &ColorTable, window: u64) -> Vec<SetPresentation> {
    let k = u64::from(table.colors);
    (0..window * (k - 1))
        .map(|n| {
            let (x, j) = (n / (k - 1), n % (k - 1));
            let bits = (0..window).map(|y| y > x && u64::from(table.get(x, y)) == j + 1).collect();
            SetPresentation::from_table(&format!("column {x}, color {}", j + 1), bits)
        })
        .collect()
}

/// Greedy subset of `candidates` on which every pair has color `color`.
fn thin(table: &ColorTable, candidates: &[u64], color: u8) -> Vec<u64> {
    let mut h: Vec<u64> = Vec::new();
    for &z in candidates {
        if h.iter().all(|&x| table.get(x, z) == color) {
            h.push(z);
        }
    }
    h
}

pub fn rt2_pipeline(c: &Coloring, window: u64, stages: u64, cfg: &ForcingConfig) -> Result<Rt2Run, ForcingError> {
    let k = c.colors();
    if k < 2 {
        return Err(ForcingError::Instance("at least two colors".into()));
    }
    let table = ColorTable::from_coloring(c, window)?;
    let family = columns(&table, window);
    let coh_cfg = cfg.clone().with_density(1);
    let schedule = CohSchedule::ColumnsOfCommitted { jump: false, per_point: u64::from(k) - 1 };
    let coh = run_coh(&family, window, stages, &coh_cfg, schedule, SelectionRule::Majority)?;
    let cohesive = coh.cohesive.clone();
    // c(x, ·) constant on C above x
    for (a, &x) in cohesive.iter().enumerate() {
        if let Some(&next) = cohesive.get(a + 1) {
            if cohesive[a + 1..].iter().any(|&y| table.get(x, y) != table.get(x, next)) {
                return Err(ForcingError::Unstable { x });
            }
        }
    }
    // the last point reads its column at the window edge; the edge point
    // itself has no column and stays out of the partition. Any class of C
    // can take the last point of C on top.
    let mut limits: Vec<u8> = cohesive.windows(2).map(|w| table.get(w[0], w[1])).collect();
    let mut points = cohesive.clone();
    match cohesive.last() {
        Some(&last) if last + 1 < window => limits.push(table.get(last, window - 1)),
        Some(_) => {
            points.pop();
        }
        None => {}
    }
    let mut rows = vec![vec![0u8]; window as usize];
    for (&x, &l) in points.iter().zip(&limits) {
        rows[x as usize] = vec![l];
    }
    let presentation = Delta2Presentation::table(rows, k, Some(0));
    let d2_inst = D2Instance::new("limit colors on the cohesive set", presentation, window, &coh_cfg)?
        .with_reservoir(points.clone());
    let d2 = run_d2(&d2_inst, stages, &coh_cfg)?;
    // every subset of a limit class of C is homogeneous, since each column
    // is constant on C above its point; the largest class wins, ties to the
    // color selected by D²
    let mut best: Option<(u8, Vec<u64>)> = None;
    for i in d2.color.into_iter().chain(0..k) {
        let mut class: Vec<u64> = points.iter().copied().filter(|&z| d2_inst.limit(z) == i as usize).collect();
        class.extend(cohesive.last());
        class.dedup();
        let h = thin(&table, &class, i);
        if best.as_ref().map_or(true, |b| h.len() > b.1.len()) {
            best = Some((i, h));
        }
    }
    let (color, homogeneous) = best.map_or((None, Vec::new()), |(i, h)| (Some(i), h));
    for (a, &x) in homogeneous.iter().enumerate() {
        for &y in &homogeneous[a + 1..] {
            assert_eq!(Some(table.get(x, y)), color, "thinned set is monochromatic");
        }
    }
    Ok(Rt2Run {
        coh: coh.transcript,
        d2: d2.transcript,
        cohesive,
        limits,
        d2_color: d2.color,
        d2_set: d2.set,
        color,
        homogeneous,
    })
}
