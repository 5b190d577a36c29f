//! End-to-end checks for the behaviours the library promises. Each test
//! prints a single PASS/FAIL line (visible with `--nocapture`); tolerances
//! are pinned as constants next to the checks that use them.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ibenet::cognitive::ActionKind;
use ibenet::harness::{measure_rtime, run_scenario, sweep_alpha};
use ibenet::motivational::{congruence_condition, evaluate_congruence, CongruenceBehaviour};
use ibenet::network::{DriveConfig, Network, NetworkConfig, SensorFrame};
use ibenet::scenario::Scenario;
use ibenet::ObjectKind;
use ibenet::{Certainty, Percept};

const SAMPLES: usize = 10_000;
const EVAL_TOL: f64 = 1e-9;
const RHO_CEILING: f64 = -0.8;
const SEEDS: std::ops::Range<u64> = 101..121;

fn verdict(number: u32, name: &str, pass: bool) {
    println!(
        "criterion {number:>2} ({name}): {}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {number} ({name}) failed");
}

fn fig3() -> Scenario {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../scenarios/fig3.toml");
    Scenario::load(std::path::Path::new(path)).expect("bundled scenario loads")
}

fn behaviour(alpha: f64, couplings: &[(&str, f64)]) -> CongruenceBehaviour {
    let couplings: BTreeMap<String, f64> =
        couplings.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    CongruenceBehaviour::new("hunger", alpha, couplings, ActionKind::Eat).unwrap()
}

fn random_stimuli(rng: &mut ChaCha8Rng, kinds: &[&str]) -> BTreeMap<String, Certainty> {
    kinds
        .iter()
        .map(|k| (k.to_string(), Certainty::clamped(rng.gen_range(0.0..=1.0))))
        .collect()
}

// Raw activity equals an independently re-ordered evaluation of the same
// blend of internal weight, coupled stimuli, and feedback.
#[test]
fn criterion_01_activity_equation_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE01);
    let kinds = ["food", "grass", "water", "spot", "shade"];
    let mut worst: f64 = 0.0;
    for _ in 0..SAMPLES {
        let n = rng.gen_range(1..=kinds.len());
        let coupled: Vec<(&str, f64)> = kinds[..n]
            .iter()
            .map(|k| (*k, rng.gen_range(0.0..=2.0)))
            .collect();
        let beh = behaviour(rng.gen_range(0.0..=1.0), &coupled);
        let o_e = Certainty::clamped(rng.gen_range(0.0..=1.0));
        let o_d = Certainty::clamped(rng.gen_range(0.0..=1.0));
        let o_s = random_stimuli(&mut rng, &kinds[..n]);

        let engine = evaluate_congruence(&beh, o_e, &o_s, o_d);

        // Re-evaluate with the coupling terms folded in a shuffled order.
        let mut terms: Vec<f64> = beh
            .couplings
            .iter()
            .map(|(k, fa)| fa * o_s[k].value())
            .collect();
        for i in (1..terms.len()).rev() {
            terms.swap(i, rng.gen_range(0..=i));
        }
        let oracle = o_d.value() + (beh.alpha + terms.iter().sum::<f64>()) * o_e.value();

        worst = worst.max((engine - oracle).abs());
    }
    verdict(1, "activity equation oracle", worst <= EVAL_TOL);
}

// With no internal weight and no feedback, positive activity needs both a
// need and a coupled stimulus. Exact, no violations tolerated.
#[test]
fn criterion_02_zero_alpha_gating() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE02);
    let kinds = ["food", "grass"];
    let mut violations = 0usize;
    for i in 0..SAMPLES {
        let fa = rng.gen_range(0.0..=2.0);
        let beh = behaviour(0.0, &[("food", fa), ("grass", rng.gen_range(0.0..=2.0))]);
        // Force the interesting boundary cases often.
        let o_e = match i % 4 {
            0 => Certainty::ZERO,
            _ => Certainty::clamped(rng.gen_range(0.0..=1.0)),
        };
        let o_s = match i % 3 {
            0 => BTreeMap::new(),
            _ => random_stimuli(&mut rng, &kinds),
        };
        let weighted: f64 = beh
            .couplings
            .iter()
            .map(|(k, fa)| fa * o_s.get(k).map(|c| c.value()).unwrap_or(0.0))
            .sum();

        let activity = Certainty::clamped(evaluate_congruence(&beh, o_e, &o_s, Certainty::ZERO));
        let expected_positive = o_e.value() > 0.0 && weighted > 0.0;
        if (activity.value() > 0.0) != expected_positive {
            violations += 1;
        }
    }
    verdict(2, "zero-alpha gating", violations == 0);
}

// Without stimuli or feedback the activity is the internal weight times the
// need, bit-exact, and the firing condition tracks the need alone.
#[test]
fn criterion_03_need_only_activation() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE03);
    let empty = BTreeMap::new();
    let mut pass = true;
    for _ in 0..SAMPLES {
        let alpha = rng.gen_range(f64::MIN_POSITIVE..=1.0);
        let beh = behaviour(alpha, &[("food", rng.gen_range(0.0..=2.0))]);
        let o_e = Certainty::clamped(rng.gen_range(0.0..=1.0));

        let raw = evaluate_congruence(&beh, o_e, &empty, Certainty::ZERO);
        pass &= raw == alpha * o_e.value();
        pass &= congruence_condition(&beh, o_e, &empty) == (o_e.value() != 0.0);
    }
    verdict(3, "need-only activation", pass);
}

// Once eating brings hunger to zero, the hunger congruent and its feedback
// are exactly zero from that same tick on, with food still in view.
#[test]
fn criterion_04_satiety_zeroes_activity() {
    let text = r#"
name = "satiety"

[network]
alpha = 0.5

[[network.drives]]
id = "hunger"
consummatory = "eat"
couplings = { food = 1.0 }

[world]
bounds = [40.0, 40.0]

[world.animat]
position = [20.0, 20.0]
hunger = 0.2

[world.rates]
need_growth = 0.0
relief = 0.05
consumption = 0.01

[[world.objects]]
id = "patch"
kind = "food"
position = [22.0, 20.0]
quality = 1.0

[run]
max_ticks = 40
seeds = [7]
"#;
    let scenario = Scenario::from_toml(text).unwrap();
    let trace = run_scenario(&scenario, 7).unwrap();

    let sated: Vec<_> = trace
        .records
        .iter()
        .filter(|r| r.internal["hunger"] == 0.0)
        .collect();
    let mut pass = !sated.is_empty();
    for r in &sated {
        pass &= !r.congruents.contains_key("hunger");
        pass &= r.drive_feedback["hunger"] == 0.0;
        pass &= r.percepts.iter().any(|p| p.kind == "food");
    }
    verdict(4, "satiety zeroes activity", pass);
}

// Purely reactive setting: water in view, food absent. The animat drinks
// first and never selects food-directed behaviour, every seed.
#[test]
fn criterion_05_reactive_water_first() {
    let mut scenario = fig3().with_alpha(0.0);
    scenario.world.animat.thirst = 0.2;
    scenario
        .world
        .objects
        .retain(|o| o.kind != ObjectKind::Food);
    scenario.run.max_ticks = 150;

    let explore_food = ActionKind::ExploreFor("food".into());
    let mut pass = true;
    for seed in SEEDS {
        let trace = run_scenario(&scenario, seed).unwrap();
        let first_drink = trace
            .records
            .iter()
            .find_map(|r| r.outcome.consumed.as_ref().map(|c| c.kind));
        pass &= first_drink == Some(ObjectKind::Water);
        pass &= trace
            .records
            .iter()
            .all(|r| r.selected.kind != explore_food && r.selected.kind != ActionKind::Eat);
    }
    verdict(5, "reactive water first", pass);
}

// Motivated setting: hunger drives food search from the very first tick and
// the animat goes on to eat in at least 18 of 20 seeded walks.
#[test]
fn criterion_06_motivated_food_search() {
    let mut scenario = fig3().with_alpha(0.9);
    scenario.world.animat.thirst = 0.2;

    let explore_food = ActionKind::ExploreFor("food".into());
    let mut first_tick_explore = true;
    let mut fed = 0usize;
    for seed in SEEDS {
        let trace = run_scenario(&scenario, seed).unwrap();
        first_tick_explore &= trace.records[0].selected.kind == explore_food;
        if trace.records.iter().any(|r| {
            r.outcome
                .consumed
                .as_ref()
                .is_some_and(|c| c.kind == ObjectKind::Food)
        }) {
            fed += 1;
        }
    }
    verdict(6, "motivated food search", first_tick_explore && fed >= 18);
}

// Median reaction time to hidden food falls as the internal weight grows.
#[test]
fn criterion_07_rtime_falls_with_alpha() {
    let scenario = fig3();
    let alphas = [0.0, 0.25, 0.5, 0.75, 1.0];
    let (_, summary) = sweep_alpha(&scenario, &alphas, 20).unwrap();

    let rho = summary.spearman;
    let first = summary.medians.first().unwrap().1;
    let last = summary.medians.last().unwrap().1;
    println!("  medians: {:?}  spearman: {rho:?}", summary.medians);
    verdict(
        7,
        "reaction time falls with alpha",
        rho.is_some_and(|r| r <= RHO_CEILING) && last < first,
    );
}

// Constant input, two nearly tied drives: the winning preference settles
// instead of flapping.
#[test]
fn criterion_08_stable_preference_under_constant_input() {
    let drives = vec![
        DriveConfig {
            id: "hunger".into(),
            couplings: BTreeMap::from([("food".to_string(), 1.0)]),
            consummatory: ActionKind::Eat,
            alpha: None,
        },
        DriveConfig {
            id: "thirst".into(),
            couplings: BTreeMap::from([("water".to_string(), 1.0)]),
            consummatory: ActionKind::Drink,
            alpha: None,
        },
    ];
    let mut net = Network::new(NetworkConfig::new(0.5, drives)).unwrap();
    let frame = SensorFrame {
        percepts: vec![
            Percept {
                kind: "food".into(),
                certainty: Certainty::clamped(0.5),
                bearing: 0.0,
                distance: 5.0,
            },
            Percept {
                kind: "water".into(),
                certainty: Certainty::clamped(0.5),
                bearing: 1.0,
                distance: 5.0,
            },
        ],
        internal: BTreeMap::from([("hunger".to_string(), 0.6), ("thirst".to_string(), 0.55)]),
    };

    let winners: Vec<String> = (0..200)
        .map(|_| {
            let report = net.step(&frame).unwrap();
            report.preference.expect("both drives active").drive
        })
        .collect();

    let switches = winners.windows(2).filter(|w| w[0] != w[1]).count();
    let period2 = winners
        .windows(4)
        .any(|w| w[0] != w[1] && w[0] == w[2] && w[1] == w[3]);
    verdict(8, "stable preference", switches <= 1 && !period2);
}

// A threat popping up mid-meal preempts eating on the tick it appears.
#[test]
fn criterion_09_threat_interrupts_eating() {
    let text = r#"
name = "threat-interrupt"

[network]
alpha = 0.3

[[network.drives]]
id = "hunger"
consummatory = "eat"
couplings = { food = 1.0 }

[world]
bounds = [60.0, 60.0]

[world.animat]
position = [20.0, 30.0]
hunger = 0.6

[world.rates]
need_growth = 0.0
relief = 0.01
consumption = 0.01

[[world.objects]]
id = "patch"
kind = "food"
position = [26.0, 30.0]
quality = 0.5

[[world.events]]
tick = 40

[world.events.insert]
id = "lurker"
kind = "blob"
position = [28.0, 30.0]
quality = 0.9

[run]
max_ticks = 50
seeds = [1]
"#;
    let scenario = Scenario::from_toml(text).unwrap();
    let mut pass = true;
    for seed in SEEDS {
        let trace = run_scenario(&scenario, seed).unwrap();
        let blob_tick = trace
            .records
            .iter()
            .find(|r| r.world_kinds.iter().any(|k| k == "blob"))
            .map(|r| r.tick);
        pass &= blob_tick == Some(40);
        // Meal in progress right up to the interruption.
        pass &= trace.records[39].selected.kind == ActionKind::Eat;
        pass &= trace.records[40].selected.kind == ActionKind::Runaway;
    }
    verdict(9, "threat interrupts eating", pass);
}

// Two equidistant meals of different quality: the better one is chosen.
#[test]
fn criterion_10_quality_discrimination() {
    let text = r#"
name = "quality-choice"

[network]
alpha = 0.5

[[network.drives]]
id = "hunger"
consummatory = "eat"
couplings = { food = 1.0 }

[world]
bounds = [60.0, 60.0]

[world.animat]
position = [30.0, 30.0]
heading = 1.5707963267948966
hunger = 0.7

[[world.objects]]
id = "rich"
kind = "food"
position = [40.0, 30.0]
quality = 0.9

[[world.objects]]
id = "poor"
kind = "food"
position = [20.0, 30.0]
quality = 0.4

[run]
max_ticks = 60
seeds = [1]
"#;
    let scenario = Scenario::from_toml(text).unwrap();
    let mut rich = 0usize;
    for seed in 0..100 {
        let trace = run_scenario(&scenario, seed).unwrap();
        let first = trace
            .records
            .iter()
            .find_map(|r| r.outcome.consumed.as_ref().map(|c| c.object.clone()));
        if first.as_deref() == Some("rich") {
            rich += 1;
        }
    }
    verdict(10, "quality discrimination", rich >= 95);
}

// Same scenario, same weight, same seed: the trace is identical down to
// the last byte.
#[test]
fn criterion_11_deterministic_traces() {
    let scenario = fig3().with_alpha(0.5);
    let a = run_scenario(&scenario, 424_242).unwrap();
    let b = run_scenario(&scenario, 424_242).unwrap();
    let bytes_a = a.to_json_lines().unwrap();
    let bytes_b = b.to_json_lines().unwrap();
    verdict(11, "deterministic traces", bytes_a == bytes_b);
}

// The reaction-time measurement itself: stimulus presence starts the clock
// even while hidden, and runs that never act stay unresolved.
#[test]
fn rtime_measures_from_stimulus_presence() {
    let scenario = fig3();
    let query = scenario.rtime.clone().unwrap();
    let trace = run_scenario(&scenario.clone().with_alpha(1.0), 101).unwrap();
    let m = measure_rtime(&trace, &query).unwrap();
    assert_eq!(
        m.stimulus_tick, 0,
        "food exists in the world from the start"
    );
    assert_eq!(m.rtime, m.action_tick.map(|t| t - m.stimulus_tick));

    let censored = run_scenario(&scenario.clone().with_alpha(0.0), 101).unwrap();
    let m0 = measure_rtime(&censored, &query).unwrap();
    assert!(!m0.resolved);
    assert_eq!(m0.rtime, None);
}
