//! Experiment harness: run a scenario to a trace, measure reaction times
//! against it, and sweep the blending factor over repeated seeded runs.

use std::collections::BTreeMap;
use std::io::Write as IoWrite;

use serde::{Deserialize, Serialize};

use crate::animat::WorldState;
use crate::error::{Error, Result};
use crate::network::{Network, SensorFrame};
use crate::scenario::{RtimeQuery, Scenario};
use crate::trace::{TickRecord, Trace};

/// Run one seeded simulation of `scenario` for its configured tick budget.
/// Each tick: sense, decide, act.
pub fn run_scenario(scenario: &Scenario, seed: u64) -> Result<Trace> {
    let mut network = Network::new(scenario.network.clone())?;
    let mut world = WorldState::new(scenario.world.clone(), seed)?;
    let drive_ids: Vec<String> = scenario
        .network
        .drives
        .iter()
        .map(|d| d.id.clone())
        .collect();

    let mut records = Vec::with_capacity(scenario.run.max_ticks as usize);
    for _ in 0..scenario.run.max_ticks {
        let percepts = world.sense();
        let internal: BTreeMap<String, f64> = drive_ids
            .iter()
            .map(|id| {
                world
                    .animat
                    .drive_value(id)
                    .map(|v| (id.clone(), v))
                    .ok_or_else(|| Error::structural(format!("drive {id:?} has no need")))
            })
            .collect::<Result<_>>()?;

        let position = world.animat.position;
        let heading = world.animat.heading;
        let strength = world.animat.strength;
        let lucidity = world.animat.lucidity;
        let world_kinds: Vec<String> = world.kinds_present().into_iter().collect();

        let frame = SensorFrame { percepts, internal };
        let report = network.step(&frame)?;
        let outcome = world.world_step(&report.selected.kind)?;

        records.push(TickRecord {
            tick: report.tick,
            position,
            heading,
            internal: frame.internal,
            strength,
            lucidity,
            percepts: report.percepts,
            world_kinds,
            congruents: report.congruents,
            drive_feedback: report.drive_feedback,
            preference: report.preference,
            candidates: report.candidates,
            selected: report.selected,
            outcome,
        });
    }
    Ok(Trace { records })
}

/// A reaction-time measurement over one trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RtimeResult {
    /// First tick the stimulus kind existed in the world.
    pub stimulus_tick: u64,
    /// First tick at or after it with the target action selected.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action_tick: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rtime: Option<u64>,
    pub resolved: bool,
}

/// Ticks from stimulus availability to target-action selection. A stimulus
/// that never appears is a query error; a target never selected leaves the
/// measurement unresolved.
pub fn measure_rtime(trace: &Trace, query: &RtimeQuery) -> Result<RtimeResult> {
    let stimulus_tick = trace
        .records
        .iter()
        .find(|r| r.world_kinds.iter().any(|k| k == &query.stimulus))
        .map(|r| r.tick)
        .ok_or_else(|| {
            Error::query(format!(
                "stimulus {:?} never present in the world",
                query.stimulus
            ))
        })?;
    let action_tick = trace
        .records
        .iter()
        .filter(|r| r.tick >= stimulus_tick)
        .find(|r| r.selected.kind.id() == query.target_action)
        .map(|r| r.tick);
    Ok(RtimeResult {
        stimulus_tick,
        action_tick,
        rtime: action_tick.map(|t| t - stimulus_tick),
        resolved: action_tick.is_some(),
    })
}

/// One sweep observation. Unresolved runs carry the tick budget as a
/// censored reaction time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub alpha: f64,
    pub seed: u64,
    pub rtime: u64,
    pub resolved: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    /// (alpha, median reaction time) in sweep order.
    pub medians: Vec<(f64, f64)>,
    /// Rank correlation between alpha and median reaction time; `None`
    /// when undefined (fewer than two alphas, or constant medians).
    pub spearman: Option<f64>,
}

/// Sweep the blending factor: `repeats` seeded runs per alpha, seeds
/// counting up from the scenario's first seed.
pub fn sweep_alpha(
    scenario: &Scenario,
    alphas: &[f64],
    repeats: usize,
) -> Result<(Vec<SweepRow>, SweepSummary)> {
    if alphas.is_empty() {
        return Err(Error::input("at least one alpha required"));
    }
    if repeats == 0 {
        return Err(Error::input("at least one repeat required"));
    }
    let query = scenario
        .rtime
        .as_ref()
        .ok_or_else(|| Error::query("scenario has no reaction-time query"))?;
    let seed_base = scenario.run.seeds[0];

    let mut rows = Vec::with_capacity(alphas.len() * repeats);
    let mut medians = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        let varied = scenario.clone().with_alpha(alpha);
        let mut rtimes = Vec::with_capacity(repeats);
        for i in 0..repeats {
            let seed = seed_base + i as u64;
            let trace = run_scenario(&varied, seed)?;
            let m = measure_rtime(&trace, query)?;
            let rtime = m.rtime.unwrap_or(scenario.run.max_ticks);
            rows.push(SweepRow {
                alpha,
                seed,
                rtime,
                resolved: m.resolved,
            });
            rtimes.push(rtime as f64);
        }
        medians.push((alpha, median(&mut rtimes)));
    }
    let spearman = spearman(&medians).ok();
    Ok((rows, SweepSummary { medians, spearman }))
}

/// Median with the usual midpoint rule for even counts. `values` is sorted
/// in place.
pub fn median(values: &mut [f64]) -> f64 {
    assert!(!values.is_empty());
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

fn average_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        // 1-based ranks, ties averaged across the group.
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Rank correlation of `(x, y)` pairs, ties handled by average ranks.
pub fn spearman(pairs: &[(f64, f64)]) -> Result<f64> {
    if pairs.len() < 2 {
        return Err(Error::query("rank correlation needs at least two pairs"));
    }
    let xs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let rx = average_ranks(&xs);
    let ry = average_ranks(&ys);
    let n = pairs.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for i in 0..pairs.len() {
        let dx = rx[i] - mx;
        let dy = ry[i] - my;
        cov += dx * dy;
        vx += dx * dx;
        vy += dy * dy;
    }
    if vx == 0.0 || vy == 0.0 {
        return Err(Error::query(
            "rank correlation undefined for constant input",
        ));
    }
    Ok(cov / (vx * vy).sqrt())
}

/// Fixed-header CSV of sweep rows.
pub fn write_sweep_csv(rows: &[SweepRow], w: &mut impl IoWrite) -> Result<()> {
    writeln!(w, "alpha,seed,rtime,resolved")?;
    for r in rows {
        writeln!(w, "{},{},{},{}", r.alpha, r.seed, r.rtime, r.resolved)?;
    }
    Ok(())
}
